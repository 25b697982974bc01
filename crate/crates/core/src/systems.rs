//! The model systems: circle rotations, the interval-circle skew product with
//! plateau drift, the affine torus skew, and shifts over binary sequences.
//!
//! The skew product is the delicate one.  Its base map `tau(x) = x + alpha(x)`
//! drifts right at speed `2^-(3n+4)` on the plateau `I_n = [2^-n, 1.5 * 2^-n]`,
//! so an orbit entering `I_n` needs `2^(2n+3)` steps to cross it while the
//! fibre coordinate accumulates `beta` increments.  Plateau endpoints, drifts
//! and the witness grids below level 9 are all dyadic, so plateau crossings
//! are exact in double precision; nothing in this module may disturb that.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{circle_distance, mod_one, Scalar};
use crate::toeplitz::{regular_symbol_at, ToeplitzSpec};

pub const DEFAULT_PLATEAU_DEPTH: u32 = 20;
pub const MAX_PLATEAU_DEPTH: u32 = 40;
pub const DEFAULT_TRUNCATION_RADIUS: usize = 16;
pub const MIN_TRUNCATION_RADIUS: usize = 8;
pub const MAX_TRUNCATION_RADIUS: usize = 48;

/// (sqrt(5) - 1) / 2, the default rotation number.
pub fn golden_mean<T: Scalar>() -> T {
    let five = T::from_f64_exact(5.0);
    (five.sqrt() - T::one()) / (T::one() + T::one())
}

/// Drift speed on the n-th plateau.
pub fn plateau_drift<T: Scalar>(n: u32) -> T {
    T::exp2i(-(3 * n as i32 + 4))
}

/// Left endpoint 2^-n of the plateau `I_n`.
pub fn plateau_left<T: Scalar>(n: u32) -> T {
    T::exp2i(-(n as i32))
}

/// Right endpoint 1.5 * 2^-n of the plateau `I_n`.
pub fn plateau_right<T: Scalar>(n: u32) -> T {
    T::exp2i(-(n as i32)) + T::exp2i(-(n as i32 + 1))
}

/// Horizon tied to plateau n: drifting for this many steps moves an orbit by
/// 2^-(n+2), half the plateau width, so points started on the left half of
/// `I_n` never leave it within the horizon.
pub fn plateau_horizon_steps(n: u32) -> u64 {
    1u64 << (2 * n + 2)
}

fn smoothstep_between<T: Scalar>(x: T, lo: T, hi: T, v_lo: T, v_hi: T) -> T {
    let t = (x - lo) / (hi - lo);
    let three = T::from_f64_exact(3.0);
    let two = T::from_f64_exact(2.0);
    let s = t * t * (three - two * t);
    v_lo + (v_hi - v_lo) * s
}

/// Drift profile of the base map.  Zero exactly at 0 and 1, constant on each
/// plateau, interpolated by cubic steps in between; every slope stays strictly
/// above -1, so `tau` is a homeomorphism of [0, 1].
pub fn alpha<T: Scalar>(x: T, plateau_depth: u32) -> T {
    let zero = T::zero();
    let one = T::one();
    if x <= zero || x >= one {
        return zero;
    }
    let half = T::half();
    let top = T::exp2i(-3); // drift cap reached at x = 1/2
    if x >= half {
        return smoothstep_between(x, half, one, top, zero);
    }
    let ramp_lo = plateau_right::<T>(3); // 3/16
    if x >= ramp_lo {
        return smoothstep_between(x, ramp_lo, half, plateau_drift::<T>(3), top);
    }
    let floor_x = plateau_left::<T>(plateau_depth);
    if x < floor_x {
        return smoothstep_between(x, zero, floor_x, zero, plateau_drift::<T>(plateau_depth));
    }
    // 2^-depth <= x < 3/16: inside plateau n or the gap joining it to n - 1.
    // The float log only narrows the search; membership tests are exact
    // because the slice boundaries are powers of two.
    let e = (-x.as_f64().log2()).floor() as i32;
    for cand in [e - 1, e, e + 1] {
        if cand < 3 || cand > plateau_depth as i32 {
            continue;
        }
        let n = cand as u32;
        if x >= plateau_left::<T>(n) && x < plateau_left::<T>(n - 1) {
            if x <= plateau_right::<T>(n) {
                return plateau_drift::<T>(n);
            }
            return smoothstep_between(
                x,
                plateau_right::<T>(n),
                plateau_left::<T>(n - 1),
                plateau_drift::<T>(n),
                plateau_drift::<T>(n - 1),
            );
        }
    }
    unreachable!("probe candidates cover every dyadic slice")
}

/// Base map of the skew product; fixes 0 and 1, strictly increasing between.
pub fn tau<T: Scalar>(x: T, plateau_depth: u32) -> T {
    (x + alpha(x, plateau_depth)).min(T::one())
}

/// Fibre displacement.  Identity up to 7/8, then a monotone cubic bridge to
/// 1 = 0 (mod 1) completed by x = 1 - epsilon, then constant zero.
///
/// The bridge is Hermite with matched value and slope at 7/8 and a flat
/// landing at 1 - epsilon; for epsilon < 1/8 its derivative is positive on
/// the whole bridge, so beta is a circle map of degree one.
pub fn beta<T: Scalar>(x: T, epsilon: T) -> T {
    let a = T::one() - T::exp2i(-3); // 7/8
    if x <= a {
        return x.max(T::zero());
    }
    let b = T::one() - epsilon;
    if x >= b {
        return T::zero();
    }
    let h = b - a;
    let t = (x - a) / h;
    let one = T::one();
    let two = T::from_f64_exact(2.0);
    let three = T::from_f64_exact(3.0);
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = two * t3 - three * t2 + one;
    let h10 = t3 - two * t2 + t;
    let h01 = three * t2 - two * t3;
    let p = a * h00 + h * h10 + h01;
    mod_one(p)
}

/// k-th symbol of the rotation coding with parameter rho and phase x0.
pub fn sturmian_symbol<T: Scalar>(rho: T, x0: T, k: i64) -> u8 {
    let k_t = T::from_f64_exact(k as f64);
    let next = ((k_t + T::one()) * rho + x0).floor();
    let cur = (k_t * rho + x0).floor();
    if next > cur {
        1
    } else {
        0
    }
}

/// Where a symbolic point reads its symbols from.
#[derive(Clone, Debug)]
pub enum SequenceSource<T: Scalar> {
    Toeplitz(Arc<ToeplitzSpec>),
    Regular,
    Sturmian { rho: T, x0: T },
}

impl<T: Scalar> SequenceSource<T> {
    pub fn default_toeplitz() -> Self {
        SequenceSource::Toeplitz(Arc::new(ToeplitzSpec::default_irregular()))
    }

    pub fn default_sturmian() -> Self {
        SequenceSource::Sturmian {
            rho: golden_mean(),
            x0: T::zero(),
        }
    }

    pub fn symbol(&self, k: i64) -> Result<u8> {
        match self {
            SequenceSource::Toeplitz(spec) => spec.symbol_at(k),
            SequenceSource::Regular => Ok(regular_symbol_at(k)),
            SequenceSource::Sturmian { rho, x0 } => Ok(sturmian_symbol(*rho, *x0, k)),
        }
    }

    pub fn describe(&self) -> &'static str {
        match self {
            SequenceSource::Toeplitz(_) => "toeplitz",
            SequenceSource::Regular => "regular",
            SequenceSource::Sturmian { .. } => "sturmian",
        }
    }
}

/// A point of one of the four phase spaces.
#[derive(Clone, Debug)]
pub enum PhasePoint<T: Scalar> {
    IntervalCircle {
        x: T,
        y: T,
    },
    Torus {
        x: T,
        y: T,
    },
    Circle {
        x: T,
    },
    Symbolic {
        source: SequenceSource<T>,
        offset: i64,
    },
}

fn require_finite<T: Scalar>(what: &'static str, v: T) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value: v.as_f64(),
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        })
    }
}

impl<T: Scalar> PhasePoint<T> {
    pub fn interval_circle(x: T, y: T) -> Result<Self> {
        require_finite("fibre coordinate", y)?;
        if !(x >= T::zero() && x <= T::one()) {
            return Err(Error::Domain {
                what: "interval coordinate",
                value: x.as_f64(),
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(PhasePoint::IntervalCircle { x, y: mod_one(y) })
    }

    pub fn torus(x: T, y: T) -> Result<Self> {
        require_finite("torus x", x)?;
        require_finite("torus y", y)?;
        Ok(PhasePoint::Torus {
            x: mod_one(x),
            y: mod_one(y),
        })
    }

    pub fn circle(x: T) -> Result<Self> {
        require_finite("circle coordinate", x)?;
        Ok(PhasePoint::Circle { x: mod_one(x) })
    }

    pub fn symbolic(source: SequenceSource<T>, offset: i64) -> Self {
        PhasePoint::Symbolic { source, offset }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            PhasePoint::IntervalCircle { .. } => "interval-circle",
            PhasePoint::Torus { .. } => "torus",
            PhasePoint::Circle { .. } => "circle",
            PhasePoint::Symbolic { .. } => "symbolic",
        }
    }
}

/// A fully parameterized system.
#[derive(Clone, Debug)]
pub enum SystemSpec<T: Scalar> {
    CircleRotation {
        rho: T,
    },
    SkewProduct {
        rho: T,
        epsilon: T,
        plateau_depth: u32,
    },
    TorusSkew {
        rho: T,
    },
    ShiftOnSubshift {
        source: SequenceSource<T>,
        truncation_radius: usize,
    },
}

impl<T: Scalar> SystemSpec<T> {
    pub fn circle_rotation(rho: T) -> Result<Self> {
        require_finite("rotation number", rho)?;
        Ok(SystemSpec::CircleRotation { rho: mod_one(rho) })
    }

    pub fn skew_product(rho: T, epsilon: T, plateau_depth: u32) -> Result<Self> {
        require_finite("rotation number", rho)?;
        let rho = mod_one(rho);
        if rho <= T::zero() {
            return Err(Error::Domain {
                what: "rotation number",
                value: rho.as_f64(),
                lo: 0.0,
                hi: 1.0,
            });
        }
        // epsilon = 1/8 collapses the bridge to a point while its left slope
        // is pinned to 1; keep the inequality strict.
        if !(epsilon > T::zero() && epsilon < T::exp2i(-3)) {
            return Err(Error::Domain {
                what: "bridge width epsilon",
                value: epsilon.as_f64(),
                lo: 0.0,
                hi: 0.125,
            });
        }
        if !(3..=MAX_PLATEAU_DEPTH).contains(&plateau_depth) {
            return Err(Error::InvalidParameter(format!(
                "plateau depth {plateau_depth} outside 3..={MAX_PLATEAU_DEPTH}"
            )));
        }
        Ok(SystemSpec::SkewProduct {
            rho,
            epsilon,
            plateau_depth,
        })
    }

    pub fn default_skew_product() -> Self {
        Self::skew_product(golden_mean(), T::exp2i(-4), DEFAULT_PLATEAU_DEPTH)
            .expect("default skew parameters are valid")
    }

    pub fn torus_skew(rho: T) -> Result<Self> {
        require_finite("rotation number", rho)?;
        Ok(SystemSpec::TorusSkew { rho: mod_one(rho) })
    }

    pub fn shift_on_subshift(source: SequenceSource<T>, truncation_radius: usize) -> Result<Self> {
        if !(MIN_TRUNCATION_RADIUS..=MAX_TRUNCATION_RADIUS).contains(&truncation_radius) {
            return Err(Error::InvalidParameter(format!(
                "truncation radius {truncation_radius} outside \
                 {MIN_TRUNCATION_RADIUS}..={MAX_TRUNCATION_RADIUS}"
            )));
        }
        Ok(SystemSpec::ShiftOnSubshift {
            source,
            truncation_radius,
        })
    }

    pub fn phase_kind(&self) -> &'static str {
        match self {
            SystemSpec::CircleRotation { .. } => "circle",
            SystemSpec::SkewProduct { .. } => "interval-circle",
            SystemSpec::TorusSkew { .. } => "torus",
            SystemSpec::ShiftOnSubshift { .. } => "symbolic",
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SystemSpec::CircleRotation { .. } => "rotation",
            SystemSpec::SkewProduct { .. } => "skew",
            SystemSpec::TorusSkew { .. } => "torus-skew",
            SystemSpec::ShiftOnSubshift { source, .. } => match source {
                SequenceSource::Toeplitz(_) => "shift-toeplitz",
                SequenceSource::Regular => "shift-regular",
                SequenceSource::Sturmian { .. } => "shift-sturmian",
            },
        }
    }

    fn mismatch(&self, p: &PhasePoint<T>) -> Error {
        Error::KindMismatch {
            expected: self.phase_kind(),
            found: p.kind(),
        }
    }

    pub fn step(&self, p: &PhasePoint<T>) -> Result<PhasePoint<T>> {
        match (self, p) {
            (SystemSpec::CircleRotation { rho }, PhasePoint::Circle { x }) => {
                Ok(PhasePoint::Circle {
                    x: mod_one(*x + *rho),
                })
            }
            (
                SystemSpec::SkewProduct {
                    rho,
                    epsilon,
                    plateau_depth,
                },
                PhasePoint::IntervalCircle { x, y },
            ) => Ok(PhasePoint::IntervalCircle {
                x: tau(*x, *plateau_depth),
                y: mod_one(*y + beta(*x, *epsilon) + *rho),
            }),
            (SystemSpec::TorusSkew { rho }, PhasePoint::Torus { x, y }) => Ok(PhasePoint::Torus {
                x: mod_one(*x + *rho),
                y: mod_one(*x + *y),
            }),
            (SystemSpec::ShiftOnSubshift { .. }, PhasePoint::Symbolic { source, offset }) => {
                let next = offset.checked_add(1).ok_or_else(|| {
                    Error::InvalidParameter("symbolic offset overflows i64".into())
                })?;
                Ok(PhasePoint::Symbolic {
                    source: source.clone(),
                    offset: next,
                })
            }
            _ => Err(self.mismatch(p)),
        }
    }

    /// Points f^0(p), ..., f^n(p).
    pub fn orbit(&self, start: &PhasePoint<T>, n: usize) -> Result<Vec<PhasePoint<T>>> {
        let mut out = Vec::with_capacity(n + 1);
        out.push(start.clone());
        for _ in 0..n {
            let next = self.step(out.last().unwrap())?;
            out.push(next);
        }
        Ok(out)
    }

    /// Distance in the phase space of this system.
    pub fn base_distance(&self, p: &PhasePoint<T>, q: &PhasePoint<T>) -> Result<T> {
        match (self, p, q) {
            (
                SystemSpec::CircleRotation { .. },
                PhasePoint::Circle { x: a },
                PhasePoint::Circle { x: b },
            ) => Ok(circle_distance(*a, *b)),
            (
                SystemSpec::SkewProduct { .. },
                PhasePoint::IntervalCircle { x: ax, y: ay },
                PhasePoint::IntervalCircle { x: bx, y: by },
            ) => Ok((*ax - *bx).abs().max(circle_distance(*ay, *by))),
            (
                SystemSpec::TorusSkew { .. },
                PhasePoint::Torus { x: ax, y: ay },
                PhasePoint::Torus { x: bx, y: by },
            ) => Ok(circle_distance(*ax, *bx).max(circle_distance(*ay, *by))),
            (
                SystemSpec::ShiftOnSubshift {
                    truncation_radius, ..
                },
                PhasePoint::Symbolic {
                    source: sa,
                    offset: oa,
                },
                PhasePoint::Symbolic {
                    source: sb,
                    offset: ob,
                },
            ) => {
                let radius = *truncation_radius as i64;
                let mut d = T::zero();
                for k in -radius..=radius {
                    if sa.symbol(oa + k)? != sb.symbol(ob + k)? {
                        d = d + T::exp2i(-(k.unsigned_abs() as i32));
                    }
                }
                Ok(d)
            }
            _ => {
                if p.kind() != self.phase_kind() {
                    Err(self.mismatch(p))
                } else {
                    Err(self.mismatch(q))
                }
            }
        }
    }
}
