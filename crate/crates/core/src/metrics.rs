//! Finite-horizon orbit metrics: Bowen (max) and Hamming (mean) distances,
//! mismatch counts and separation frequencies over trajectory pairs.
//!
//! Symbolic pairs are evaluated in integer arithmetic.  With truncation
//! radius K every step distance is a multiple of 2^-K bounded by 3, so steps
//! are tracked as integers in units of 2^-K and the sliding-window recurrence
//! below is exact: no floating-point rounding can reorder a comparison
//! against a threshold.  Planar pairs use compensated summation for means.

use crate::error::{Error, Result};
use crate::scalar::{circle_distance, mod_one, Scalar};
use crate::systems::{beta, tau, PhasePoint, SequenceSource, SystemSpec};

/// Packed symbol window; bit i is the symbol at `start + i`.
#[derive(Clone, Debug)]
pub struct BitWindow {
    words: Vec<u64>,
    len: usize,
}

impl BitWindow {
    pub fn from_source<T: Scalar>(
        source: &SequenceSource<T>,
        start: i64,
        len: usize,
    ) -> Result<Self> {
        let mut words = vec![0u64; len.div_ceil(64)];
        for i in 0..len {
            let k = start
                .checked_add(i as i64)
                .ok_or_else(|| Error::InvalidParameter("symbol index overflows i64".into()))?;
            if source.symbol(k)? != 0 {
                words[i / 64] |= 1u64 << (i % 64);
            }
        }
        Ok(Self { words, len })
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        let mut words = vec![0u64; bits.len().div_ceil(64)];
        for (i, b) in bits.iter().enumerate() {
            if *b != 0 {
                words[i / 64] |= 1u64 << (i % 64);
            }
        }
        Self {
            words,
            len: bits.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> u64 {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1
    }
}

/// Any xor-mismatch between the windows in bit positions [lo, hi]?
fn xor_any_in(a: &BitWindow, b: &BitWindow, lo: usize, hi: usize) -> bool {
    debug_assert!(hi < a.len && a.len == b.len);
    let (wl, wh) = (lo / 64, hi / 64);
    for w in wl..=wh {
        let mut x = a.words[w] ^ b.words[w];
        if w == wl {
            x &= !0u64 << (lo % 64);
        }
        if w == wh {
            let top = hi % 64;
            if top < 63 {
                x &= (1u64 << (top + 1)) - 1;
            }
        }
        if x != 0 {
            return true;
        }
    }
    false
}

/// A sampled orbit segment of n points, stored by kind.
#[derive(Clone, Debug)]
pub enum Trajectory<T: Scalar> {
    /// Skew product: x in [0, 1] with the interval metric, y on the circle.
    Interval {
        xs: Vec<T>,
        ys: Vec<T>,
    },
    Torus {
        xs: Vec<T>,
        ys: Vec<T>,
    },
    Circle {
        xs: Vec<T>,
    },
    /// Symbols at offsets [start - radius, start + n - 1 + radius]; bit p +
    /// radius of the window is the symbol at stream position p.
    Symbolic {
        bits: BitWindow,
        n: usize,
        radius: usize,
    },
}

impl<T: Scalar> Trajectory<T> {
    /// Samples f^0(p), ..., f^(n-1)(p); n >= 1.
    pub fn generate(sys: &SystemSpec<T>, start: &PhasePoint<T>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "trajectory needs at least one sample".into(),
            ));
        }
        match (sys, start) {
            (SystemSpec::CircleRotation { rho }, PhasePoint::Circle { x }) => {
                let mut xs = Vec::with_capacity(n);
                let mut cur = *x;
                for _ in 0..n {
                    xs.push(cur);
                    cur = mod_one(cur + *rho);
                }
                Ok(Trajectory::Circle { xs })
            }
            (
                SystemSpec::SkewProduct {
                    rho,
                    epsilon,
                    plateau_depth,
                },
                PhasePoint::IntervalCircle { x, y },
            ) => {
                let mut xs = Vec::with_capacity(n);
                let mut ys = Vec::with_capacity(n);
                let (mut cx, mut cy) = (*x, *y);
                for _ in 0..n {
                    xs.push(cx);
                    ys.push(cy);
                    let nx = tau(cx, *plateau_depth);
                    cy = mod_one(cy + beta(cx, *epsilon) + *rho);
                    cx = nx;
                }
                Ok(Trajectory::Interval { xs, ys })
            }
            (SystemSpec::TorusSkew { rho }, PhasePoint::Torus { x, y }) => {
                let mut xs = Vec::with_capacity(n);
                let mut ys = Vec::with_capacity(n);
                let (mut cx, mut cy) = (*x, *y);
                for _ in 0..n {
                    xs.push(cx);
                    ys.push(cy);
                    cy = mod_one(cx + cy);
                    cx = mod_one(cx + *rho);
                }
                Ok(Trajectory::Torus { xs, ys })
            }
            (
                SystemSpec::ShiftOnSubshift {
                    truncation_radius, ..
                },
                PhasePoint::Symbolic { source, offset },
            ) => {
                let radius = *truncation_radius;
                let start = offset
                    .checked_sub(radius as i64)
                    .ok_or_else(|| Error::InvalidParameter("symbol index overflows i64".into()))?;
                let bits = BitWindow::from_source(source, start, n + 2 * radius)?;
                Ok(Trajectory::Symbolic { bits, n, radius })
            }
            _ => Err(Error::KindMismatch {
                expected: sys.phase_kind(),
                found: start.kind(),
            }),
        }
    }

    /// Number of time samples.
    pub fn len(&self) -> usize {
        match self {
            Trajectory::Interval { xs, .. } | Trajectory::Torus { xs, .. } => xs.len(),
            Trajectory::Circle { xs } => xs.len(),
            Trajectory::Symbolic { n, .. } => *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Trajectory::Interval { .. } => "interval-circle",
            Trajectory::Torus { .. } => "torus",
            Trajectory::Circle { .. } => "circle",
            Trajectory::Symbolic { .. } => "symbolic",
        }
    }
}

enum PairView<'a, T: Scalar> {
    Interval {
        ax: &'a [T],
        ay: &'a [T],
        bx: &'a [T],
        by: &'a [T],
    },
    Torus {
        ax: &'a [T],
        ay: &'a [T],
        bx: &'a [T],
        by: &'a [T],
    },
    Circle {
        a: &'a [T],
        b: &'a [T],
    },
    Symbolic {
        a: &'a BitWindow,
        b: &'a BitWindow,
        n: usize,
        radius: usize,
    },
}

fn pair_view<'a, T: Scalar>(a: &'a Trajectory<T>, b: &'a Trajectory<T>) -> Result<PairView<'a, T>> {
    if a.len() != b.len() {
        return Err(Error::WordLength {
            left: a.len(),
            right: b.len(),
        });
    }
    match (a, b) {
        (Trajectory::Interval { xs: ax, ys: ay }, Trajectory::Interval { xs: bx, ys: by }) => {
            Ok(PairView::Interval { ax, ay, bx, by })
        }
        (Trajectory::Torus { xs: ax, ys: ay }, Trajectory::Torus { xs: bx, ys: by }) => {
            Ok(PairView::Torus { ax, ay, bx, by })
        }
        (Trajectory::Circle { xs: a }, Trajectory::Circle { xs: b }) => {
            Ok(PairView::Circle { a, b })
        }
        (
            Trajectory::Symbolic {
                bits: wa,
                n,
                radius: ra,
            },
            Trajectory::Symbolic {
                bits: wb,
                radius: rb,
                ..
            },
        ) => {
            if ra != rb {
                return Err(Error::InvalidParameter(format!(
                    "truncation radii differ: {ra} vs {rb}"
                )));
            }
            Ok(PairView::Symbolic {
                a: wa,
                b: wb,
                n: *n,
                radius: *ra,
            })
        }
        _ => Err(Error::KindMismatch {
            expected: a.kind(),
            found: b.kind(),
        }),
    }
}

impl<'a, T: Scalar> PairView<'a, T> {
    fn len(&self) -> usize {
        match self {
            PairView::Interval { ax, .. } | PairView::Torus { ax, .. } => ax.len(),
            PairView::Circle { a, .. } => a.len(),
            PairView::Symbolic { n, .. } => *n,
        }
    }

    fn planar_step(&self, i: usize) -> T {
        match self {
            PairView::Interval { ax, ay, bx, by } => {
                (ax[i] - bx[i]).abs().max(circle_distance(ay[i], by[i]))
            }
            PairView::Torus { ax, ay, bx, by } => {
                circle_distance(ax[i], bx[i]).max(circle_distance(ay[i], by[i]))
            }
            PairView::Circle { a, b } => circle_distance(a[i], b[i]),
            PairView::Symbolic { .. } => unreachable!("symbolic pairs use the integer path"),
        }
    }

    fn step_units(&self) -> StepUnits<'a> {
        match self {
            PairView::Symbolic { a, b, n, radius } => StepUnits::new(a, b, *n, *radius),
            _ => unreachable!("planar pairs have no integer path"),
        }
    }
}

/// Exact step distances of a symbolic pair in units of 2^-radius.
///
/// Maintains the window tails L_i = sum_{j<i} e_j 2^-(i-j) and
/// R_i = sum_{j>i} e_j 2^-(j-i) (both truncated at the radius) as integers;
/// every update below shifts out exactly the bit that leaves the window, so
/// the division by two is always exact.
struct StepUnits<'a> {
    a: &'a BitWindow,
    b: &'a BitWindow,
    n: usize,
    radius: usize,
    i: usize,
    left: u64,
    right: u64,
}

impl<'a> StepUnits<'a> {
    fn new(a: &'a BitWindow, b: &'a BitWindow, n: usize, radius: usize) -> Self {
        let mut s = Self {
            a,
            b,
            n,
            radius,
            i: 0,
            left: 0,
            right: 0,
        };
        let k = radius as i64;
        for p in -k..0 {
            s.left += s.e(p) << (k + p);
        }
        for p in 1..=k {
            s.right += s.e(p) << (k - p);
        }
        s
    }

    /// Mismatch indicator at stream position p (window bit p + radius).
    fn e(&self, p: i64) -> u64 {
        let w = (p + self.radius as i64) as usize;
        self.a.get(w) ^ self.b.get(w)
    }

    fn max_units(radius: usize) -> u64 {
        3 * (1u64 << radius)
    }
}

impl<'a> Iterator for StepUnits<'a> {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.i >= self.n {
            return None;
        }
        let i = self.i as i64;
        let k = self.radius;
        let e0 = self.e(i);
        let s = self.left + (e0 << k) + self.right;
        if self.i + 1 < self.n {
            self.left = (self.left + (e0 << k) - self.e(i - k as i64)) >> 1;
            let e1 = self.e(i + 1);
            self.right = (self.right << 1) - (e1 << k) + self.e(i + 1 + k as i64);
        }
        self.i += 1;
        Some(s)
    }
}

/// Threshold in integer units: s >= t iff s * 2^-radius >= delta.
/// None when delta exceeds the metric diameter.
fn unit_threshold(delta: f64, radius: usize) -> Option<u64> {
    // Scaling by a power of two is exact, so the ceiling is the true one.
    let scaled = delta * (1u64 << radius) as f64;
    if scaled <= 0.0 {
        return Some(0);
    }
    if scaled > StepUnits::max_units(radius) as f64 {
        return None;
    }
    Some(scaled.ceil() as u64)
}

struct Neumaier<T: Scalar> {
    sum: T,
    comp: T,
}

impl<T: Scalar> Neumaier<T> {
    fn new() -> Self {
        Self {
            sum: T::zero(),
            comp: T::zero(),
        }
    }

    fn add(&mut self, v: T) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp = self.comp + ((self.sum - t) + v);
        } else {
            self.comp = self.comp + ((v - t) + self.sum);
        }
        self.sum = t;
    }

    fn total(&self) -> T {
        self.sum + self.comp
    }
}

/// Bowen distance: max step distance over the common horizon.
pub fn bowen<T: Scalar>(a: &Trajectory<T>, b: &Trajectory<T>) -> Result<T> {
    let view = pair_view(a, b)?;
    match &view {
        PairView::Symbolic { radius, .. } => {
            let m = view.step_units().max().unwrap_or(0);
            Ok(T::from_f64_exact(m as f64) * T::exp2i(-(*radius as i32)))
        }
        _ => {
            let mut m = T::zero();
            for i in 0..view.len() {
                m = m.max(view.planar_step(i));
            }
            Ok(m)
        }
    }
}

/// Hamming distance: mean step distance over the common horizon.
pub fn hamming<T: Scalar>(a: &Trajectory<T>, b: &Trajectory<T>) -> Result<T> {
    let view = pair_view(a, b)?;
    let n = view.len();
    match &view {
        PairView::Symbolic { radius, .. } => {
            let total: u128 = view.step_units().map(u128::from).sum();
            let mean = T::from_f64_exact(total as f64) * T::exp2i(-(*radius as i32))
                / T::from_usize_exact(n);
            Ok(mean)
        }
        _ => {
            let mut acc = Neumaier::new();
            let mut max = T::zero();
            for i in 0..n {
                let d = view.planar_step(i);
                max = max.max(d);
                acc.add(d);
            }
            let mean = acc.total() / T::from_usize_exact(n);
            // A mean of values bounded by max can only exceed max through
            // rounding; pin the invariant and insist the excess is at
            // rounding scale.
            if mean > max {
                debug_assert!(mean - max <= T::from_f64_exact(1e-10) * max.max(T::one()));
                return Ok(max);
            }
            Ok(mean)
        }
    }
}

/// Does the Bowen distance reach delta?  Decision-identical to
/// `bowen(a, b)? >= delta` but exits at the first step that settles it.
pub fn bowen_at_least<T: Scalar>(a: &Trajectory<T>, b: &Trajectory<T>, delta: T) -> Result<bool> {
    let view = pair_view(a, b)?;
    match &view {
        PairView::Symbolic {
            a: wa,
            b: wb,
            n,
            radius,
        } => {
            let Some(t) = unit_threshold(delta.as_f64(), *radius) else {
                return Ok(false);
            };
            // A mismatch at stream position p in [-1, n] puts weight >= 1/2
            // on some step, so for delta <= 1/2 it alone settles the test.
            if delta.as_f64() <= 0.5 {
                let lo = radius - 1;
                let hi = n + radius;
                if xor_any_in(wa, wb, lo, hi) {
                    return Ok(true);
                }
            }
            Ok(view.step_units().any(|s| s >= t))
        }
        _ => {
            for i in 0..view.len() {
                if view.planar_step(i) >= delta {
                    return Ok(true);
                }
            }
            Ok(false)
        }
    }
}

/// Index of the first step whose distance reaches delta.
pub fn first_excess_index<T: Scalar>(
    a: &Trajectory<T>,
    b: &Trajectory<T>,
    delta: T,
) -> Result<Option<usize>> {
    let view = pair_view(a, b)?;
    match &view {
        PairView::Symbolic { radius, .. } => {
            let Some(t) = unit_threshold(delta.as_f64(), *radius) else {
                return Ok(None);
            };
            Ok(view.step_units().position(|s| s >= t))
        }
        _ => {
            for i in 0..view.len() {
                if view.planar_step(i) >= delta {
                    return Ok(Some(i));
                }
            }
            Ok(None)
        }
    }
}

/// Number of steps whose distance reaches delta.
pub fn mismatch_count<T: Scalar>(a: &Trajectory<T>, b: &Trajectory<T>, delta: T) -> Result<usize> {
    let view = pair_view(a, b)?;
    match &view {
        PairView::Symbolic { radius, .. } => {
            let Some(t) = unit_threshold(delta.as_f64(), *radius) else {
                return Ok(0);
            };
            Ok(view.step_units().filter(|s| *s >= t).count())
        }
        _ => {
            let mut count = 0;
            for i in 0..view.len() {
                if view.planar_step(i) >= delta {
                    count += 1;
                }
            }
            Ok(count)
        }
    }
}

/// Mismatch frequency sampled at geometrically spaced horizons.
#[derive(Clone, Debug)]
pub struct FrequencyEstimate<T: Scalar> {
    /// Largest checkpoint frequency; stands in for the limsup.
    pub value: T,
    pub checkpoints: Vec<(usize, T)>,
    pub horizon: usize,
}

pub const FREQUENCY_CHECKPOINTS: usize = 12;

/// Geometrically spaced horizons in [n/4, n], last one exactly n.
pub fn frequency_checkpoints(n: usize) -> Vec<usize> {
    debug_assert!(n >= 1);
    let lo = (n.div_ceil(4)).max(1);
    let mut out = Vec::with_capacity(FREQUENCY_CHECKPOINTS);
    let ratio = (n as f64 / lo as f64).max(1.0);
    for j in 0..FREQUENCY_CHECKPOINTS {
        let t = j as f64 / (FREQUENCY_CHECKPOINTS - 1) as f64;
        let m = ((lo as f64) * ratio.powf(t)).round() as usize;
        out.push(m.clamp(lo, n));
    }
    *out.last_mut().unwrap() = n;
    out.dedup();
    out
}

/// Fraction of steps with distance >= delta, maximized over checkpoints.
pub fn separation_frequency<T: Scalar>(
    a: &Trajectory<T>,
    b: &Trajectory<T>,
    delta: T,
) -> Result<FrequencyEstimate<T>> {
    let view = pair_view(a, b)?;
    let n = view.len();
    let marks = frequency_checkpoints(n);
    let mut checkpoints = Vec::with_capacity(marks.len());
    let mut count = 0usize;
    let mut next = 0usize;

    let mut record = |i_plus_1: usize, count: usize, next: &mut usize| {
        while *next < marks.len() && marks[*next] == i_plus_1 {
            checkpoints.push((
                i_plus_1,
                T::from_usize_exact(count) / T::from_usize_exact(i_plus_1),
            ));
            *next += 1;
        }
    };

    match &view {
        PairView::Symbolic { radius, .. } => {
            let t = unit_threshold(delta.as_f64(), *radius);
            for (i, s) in view.step_units().enumerate() {
                if let Some(t) = t {
                    if s >= t {
                        count += 1;
                    }
                }
                record(i + 1, count, &mut next);
            }
        }
        _ => {
            for i in 0..n {
                if view.planar_step(i) >= delta {
                    count += 1;
                }
                record(i + 1, count, &mut next);
            }
        }
    }

    let value = checkpoints
        .iter()
        .map(|(_, f)| *f)
        .fold(T::zero(), |a, b| a.max(b));
    Ok(FrequencyEstimate {
        value,
        checkpoints,
        horizon: n,
    })
}

/// Normalized Hamming distance between two centered words of equal odd length.
pub fn word_distance<T: Scalar>(u: &[u8], v: &[u8]) -> Result<T> {
    if u.len() != v.len() {
        return Err(Error::WordLength {
            left: u.len(),
            right: v.len(),
        });
    }
    if u.len().is_multiple_of(2) {
        return Err(Error::WordParity { len: u.len() });
    }
    let mismatches = u.iter().zip(v).filter(|(a, b)| a != b).count();
    Ok(T::from_usize_exact(mismatches) / T::from_usize_exact(u.len()))
}

/// First step at which the orbits of p and q reach distance delta, streamed
/// without materializing trajectories.  Identical decisions to generating
/// both trajectories and calling [`first_excess_index`].
pub fn orbit_first_excess<T: Scalar>(
    sys: &SystemSpec<T>,
    p: &PhasePoint<T>,
    q: &PhasePoint<T>,
    n: usize,
    delta: T,
) -> Result<Option<usize>> {
    match (sys, p, q) {
        (
            SystemSpec::CircleRotation { rho },
            PhasePoint::Circle { x: xa },
            PhasePoint::Circle { x: xb },
        ) => {
            let (mut a, mut b) = (*xa, *xb);
            for i in 0..n {
                if circle_distance(a, b) >= delta {
                    return Ok(Some(i));
                }
                a = mod_one(a + *rho);
                b = mod_one(b + *rho);
            }
            Ok(None)
        }
        (
            SystemSpec::SkewProduct {
                rho,
                epsilon,
                plateau_depth,
            },
            PhasePoint::IntervalCircle { x: xa, y: ya },
            PhasePoint::IntervalCircle { x: xb, y: yb },
        ) => {
            let (mut ax, mut ay) = (*xa, *ya);
            let (mut bx, mut by) = (*xb, *yb);
            for i in 0..n {
                if (ax - bx).abs().max(circle_distance(ay, by)) >= delta {
                    return Ok(Some(i));
                }
                let nax = tau(ax, *plateau_depth);
                ay = mod_one(ay + beta(ax, *epsilon) + *rho);
                ax = nax;
                let nbx = tau(bx, *plateau_depth);
                by = mod_one(by + beta(bx, *epsilon) + *rho);
                bx = nbx;
            }
            Ok(None)
        }
        (
            SystemSpec::TorusSkew { rho },
            PhasePoint::Torus { x: xa, y: ya },
            PhasePoint::Torus { x: xb, y: yb },
        ) => {
            let (mut ax, mut ay) = (*xa, *ya);
            let (mut bx, mut by) = (*xb, *yb);
            for i in 0..n {
                if circle_distance(ax, bx).max(circle_distance(ay, by)) >= delta {
                    return Ok(Some(i));
                }
                ay = mod_one(ax + ay);
                ax = mod_one(ax + *rho);
                by = mod_one(bx + by);
                bx = mod_one(bx + *rho);
            }
            Ok(None)
        }
        (SystemSpec::ShiftOnSubshift { .. }, _, _) => {
            let ta = Trajectory::generate(sys, p, n)?;
            let tb = Trajectory::generate(sys, q, n)?;
            first_excess_index(&ta, &tb, delta)
        }
        _ => {
            if p.kind() != sys.phase_kind() {
                Err(Error::KindMismatch {
                    expected: sys.phase_kind(),
                    found: p.kind(),
                })
            } else {
                Err(Error::KindMismatch {
                    expected: sys.phase_kind(),
                    found: q.kind(),
                })
            }
        }
    }
}

/// Streaming form of `bowen(a, b)? >= delta` for point pairs.
pub fn orbit_bowen_at_least<T: Scalar>(
    sys: &SystemSpec<T>,
    p: &PhasePoint<T>,
    q: &PhasePoint<T>,
    n: usize,
    delta: T,
) -> Result<bool> {
    Ok(orbit_first_excess(sys, p, q, n, delta)?.is_some())
}
