//! Separated-set machinery: greedy and exact maximal delta-separated subsets
//! of candidate orbits, candidate samplers, and the plateau witness family.
//!
//! Separation is always the closed condition `distance >= delta`.  The greedy
//! scan keeps a candidate exactly when it is separated from every point kept
//! before it, so its result is a maximal separated subset and, for a metric,
//! its size is sandwiched between the exact numbers at 2 * delta and delta.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metrics::{
    bowen_at_least, hamming, orbit_first_excess, separation_frequency, Trajectory,
};
use crate::scalar::Scalar;
use crate::systems::{PhasePoint, SequenceSource, SystemSpec};
use crate::toeplitz::ToeplitzSpec;

/// Largest instance handed to the exact branch-and-bound search.
pub const EXACT_SEARCH_LIMIT: usize = 64;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut x = z;
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Stable per-purpose seed derived from one master seed and a text label.
pub fn derive_seed(master: u64, label: &str) -> u64 {
    let mut h = splitmix64(master);
    for &b in label.as_bytes() {
        h = splitmix64(h ^ u64::from(b));
    }
    splitmix64(h)
}

/// Symmetric distance matrix with a zero diagonal.
#[derive(Clone, Debug)]
pub struct DistanceMatrix<T: Scalar> {
    size: usize,
    data: Vec<T>,
}

impl<T: Scalar> DistanceMatrix<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let size = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != size {
                return Err(Error::MalformedMatrix(format!(
                    "row {i} has length {}, expected {size}",
                    row.len()
                )));
            }
        }
        let mut data = Vec::with_capacity(size * size);
        for row in &rows {
            data.extend_from_slice(row);
        }
        let m = Self { size, data };
        for i in 0..size {
            if m.get(i, i) != T::zero() {
                return Err(Error::MalformedMatrix(format!("nonzero diagonal at {i}")));
            }
            for j in 0..size {
                let d = m.get(i, j);
                if !d.is_finite() || d < T::zero() {
                    return Err(Error::MalformedMatrix(format!(
                        "entry ({i}, {j}) = {d} is not a distance"
                    )));
                }
                if d != m.get(j, i) {
                    return Err(Error::MalformedMatrix(format!("asymmetry at ({i}, {j})")));
                }
            }
        }
        Ok(m)
    }

    pub fn from_fn(size: usize, mut f: impl FnMut(usize, usize) -> Result<T>) -> Result<Self> {
        let mut rows: Vec<Vec<T>> = Vec::with_capacity(size);
        for i in 0..size {
            let mut row = Vec::with_capacity(size);
            row.extend(rows.iter().map(|prev| prev[i]));
            row.push(T::zero());
            for j in i + 1..size {
                row.push(f(i, j)?);
            }
            rows.push(row);
        }
        Self::from_rows(rows)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.size + j]
    }
}

/// Greedy maximal separated subset by ascending index.
pub fn greedy_separated<T: Scalar>(m: &DistanceMatrix<T>, delta: T) -> Vec<usize> {
    greedy_separated_with(m.size(), |i, j| Ok(m.get(i, j) >= delta))
        .expect("matrix predicate cannot fail")
}

/// Greedy scan over an arbitrary separation predicate.  The scan order and
/// the kept set are independent of the order in which the predicate is
/// consulted for the kept points.
pub fn greedy_separated_with<F>(count: usize, mut separated: F) -> Result<Vec<usize>>
where
    F: FnMut(usize, usize) -> Result<bool>,
{
    let mut kept: Vec<usize> = Vec::new();
    for i in 0..count {
        let mut ok = true;
        // Most recent first: in ordered candidate sets the nearest kept
        // point was usually kept last, so rejection is cheap.
        for &j in kept.iter().rev() {
            if !separated(i, j)? {
                ok = false;
                break;
            }
        }
        if ok {
            kept.push(i);
        }
    }
    Ok(kept)
}

/// Vertices in `p` in nondecreasing greedy-color order, with their colors.
fn greedy_coloring(adj: &[u64], mut p: u64) -> Vec<(usize, usize)> {
    let mut ordered = Vec::with_capacity(p.count_ones() as usize);
    let mut color = 0;
    while p != 0 {
        color += 1;
        let mut class = p;
        while class != 0 {
            let v = class.trailing_zeros() as usize;
            ordered.push((v, color));
            p &= !(1u64 << v);
            class &= !(1u64 << v);
            class &= !adj[v];
        }
    }
    ordered
}

fn expand_clique(adj: &[u64], p: u64, current: &mut Vec<usize>, best: &mut Vec<usize>) {
    if p == 0 {
        if current.len() > best.len() {
            *best = current.clone();
        }
        return;
    }
    let ordered = greedy_coloring(adj, p);
    let mut remaining = p;
    for &(v, c) in ordered.iter().rev() {
        // Colors bound the clique size hidden in the remaining candidates.
        if current.len() + c <= best.len() {
            return;
        }
        remaining &= !(1u64 << v);
        current.push(v);
        expand_clique(adj, remaining & adj[v], current, best);
        current.pop();
    }
}

/// Maximum clique of the adjacency graph, seeded with a known clique.
fn exact_max_adjacency(adj: &[u64], seed_clique: &[usize]) -> Vec<usize> {
    let n = adj.len();
    let mut best = seed_clique.to_vec();
    let p = if n == 64 { !0u64 } else { (1u64 << n) - 1 };
    let mut current = Vec::new();
    expand_clique(adj, p, &mut current, &mut best);
    best.sort_unstable();
    best
}

/// Exact maximum separated subset via branch and bound over the separation
/// graph.  Limited to [`EXACT_SEARCH_LIMIT`] points.
pub fn exact_max_separated<T: Scalar>(m: &DistanceMatrix<T>, delta: T) -> Result<Vec<usize>> {
    let n = m.size();
    if n > EXACT_SEARCH_LIMIT {
        return Err(Error::SizeLimit {
            size: n,
            limit: EXACT_SEARCH_LIMIT,
        });
    }
    let mut adj = vec![0u64; n];
    for (i, row) in adj.iter_mut().enumerate() {
        for j in 0..n {
            if i != j && m.get(i, j) >= delta {
                *row |= 1u64 << j;
            }
        }
    }
    let seed = greedy_separated(m, delta);
    Ok(exact_max_adjacency(&adj, &seed))
}

/// How a candidate set was produced; recorded alongside every count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub sampler: String,
    pub seed: Option<u64>,
    pub candidate_count: usize,
}

/// An ordered list of starting points fed to the separation scans.
#[derive(Clone, Debug)]
pub struct CandidateSet<T: Scalar> {
    pub points: Vec<PhasePoint<T>>,
    pub provenance: Provenance,
}

impl<T: Scalar> CandidateSet<T> {
    pub fn from_points(points: Vec<PhasePoint<T>>, sampler: impl Into<String>) -> Self {
        let provenance = Provenance {
            sampler: sampler.into(),
            seed: None,
            candidate_count: points.len(),
        };
        Self { points, provenance }
    }

    /// count equidistant circle points j / count.
    pub fn circle_grid(count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidParameter(
                "grid needs at least one point".into(),
            ));
        }
        let step = T::one() / T::from_usize_exact(count);
        let points = (0..count)
            .map(|j| PhasePoint::circle(T::from_usize_exact(j) * step))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_points(points, format!("circle-grid-{count}")))
    }

    /// count torus points (j / count, 0).
    pub fn torus_x_grid(count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidParameter(
                "grid needs at least one point".into(),
            ));
        }
        let step = T::one() / T::from_usize_exact(count);
        let points = (0..count)
            .map(|j| PhasePoint::torus(T::from_usize_exact(j) * step, T::zero()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_points(points, format!("torus-x-grid-{count}")))
    }

    /// count skew-product points (x_lo + j * (x_hi - x_lo) / count, 0).
    pub fn interval_grid(x_lo: T, x_hi: T, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidParameter(
                "grid needs at least one point".into(),
            ));
        }
        if !(T::zero() <= x_lo && x_lo < x_hi && x_hi <= T::one()) {
            return Err(Error::Domain {
                what: "interval grid bounds",
                value: x_lo.as_f64(),
                lo: 0.0,
                hi: x_hi.as_f64(),
            });
        }
        let step = (x_hi - x_lo) / T::from_usize_exact(count);
        let points = (0..count)
            .map(|j| PhasePoint::interval_circle(x_lo + T::from_usize_exact(j) * step, T::zero()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_points(
            points,
            format!("interval-grid-{}-{}-{count}", x_lo.as_f64(), x_hi.as_f64()),
        ))
    }

    /// Symbolic offsets: a centered stride-1 block of `arithmetic` offsets
    /// plus `random` draws from [-bound, bound], deduplicated in draw order.
    pub fn symbolic_mixed(
        source: &SequenceSource<T>,
        arithmetic: usize,
        random: usize,
        bound: i64,
        seed: u64,
    ) -> Result<Self> {
        if bound < 0 {
            return Err(Error::InvalidParameter("offset bound must be >= 0".into()));
        }
        let half = (arithmetic / 2) as i64;
        let mut offsets: Vec<i64> = (0..arithmetic as i64).map(|j| j - half).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut seen: std::collections::HashSet<i64> = offsets.iter().copied().collect();
        let mut drawn = 0usize;
        let mut attempts = 0usize;
        while drawn < random {
            let k = rng.gen_range(-bound..=bound);
            attempts += 1;
            if seen.insert(k) {
                offsets.push(k);
                drawn += 1;
            }
            if attempts > 100 * random.max(1) {
                return Err(Error::HorizonExhausted {
                    horizon: attempts,
                    detail: format!(
                        "could not draw {random} distinct offsets in [-{bound}, {bound}]"
                    ),
                });
            }
        }
        let points = offsets
            .into_iter()
            .map(|k| PhasePoint::symbolic(source.clone(), k))
            .collect();
        let mut set = Self::from_points(points, format!("symbolic-mixed-{arithmetic}-{random}"));
        set.provenance.seed = Some(seed);
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Greedy,
    Exact,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Greedy => "greedy",
            Method::Exact => "exact",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeparationKind {
    Bowen,
    Hamming,
    Asymptotic,
    Subword,
}

impl SeparationKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SeparationKind::Bowen => "bowen",
            SeparationKind::Hamming => "hamming",
            SeparationKind::Asymptotic => "asymptotic",
            SeparationKind::Subword => "subword",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SeparationResult<T: Scalar> {
    pub kind: SeparationKind,
    pub delta: T,
    /// Frequency threshold; present only for asymptotic counts.
    pub nu: Option<T>,
    /// Time horizon, or the word radius for subword counts.
    pub horizon: usize,
    pub count: usize,
    /// Indices into the candidate set, ascending.
    pub witness: Vec<usize>,
    pub method: Method,
    pub provenance: Provenance,
}

fn check_delta<T: Scalar>(delta: T) -> Result<()> {
    if delta > T::zero() && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "separation threshold delta",
            value: delta.as_f64(),
            lo: 0.0,
            hi: f64::INFINITY,
        })
    }
}

fn exact_over_predicate<F>(count: usize, mut separated: F) -> Result<Vec<usize>>
where
    F: FnMut(usize, usize) -> Result<bool>,
{
    if count > EXACT_SEARCH_LIMIT {
        return Err(Error::SizeLimit {
            size: count,
            limit: EXACT_SEARCH_LIMIT,
        });
    }
    let mut adj = vec![0u64; count];
    for i in 0..count {
        for j in (i + 1)..count {
            if separated(i, j)? {
                adj[i] |= 1u64 << j;
                adj[j] |= 1u64 << i;
            }
        }
    }
    let seed = greedy_separated_with(count, |i, j| Ok(adj[i] >> j & 1 == 1))?;
    Ok(exact_max_adjacency(&adj, &seed))
}

/// Separated subset under the Bowen distance at horizon n.
///
/// Greedy planar scans stream orbit pairs and never materialize
/// trajectories; symbolic scans cache the packed symbol windows.
pub fn bowen_separation<T: Scalar>(
    sys: &SystemSpec<T>,
    cands: &CandidateSet<T>,
    n: usize,
    delta: T,
    method: Method,
) -> Result<SeparationResult<T>> {
    check_delta(delta)?;
    let count = cands.len();
    let witness = match (method, sys) {
        (Method::Greedy, SystemSpec::ShiftOnSubshift { .. }) => {
            let mut kept: Vec<usize> = Vec::new();
            let mut trajs: Vec<Trajectory<T>> = Vec::new();
            for i in 0..count {
                let t = Trajectory::generate(sys, &cands.points[i], n)?;
                let mut ok = true;
                for tj in trajs.iter().rev() {
                    if !bowen_at_least(&t, tj, delta)? {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    kept.push(i);
                    trajs.push(t);
                }
            }
            kept
        }
        (Method::Greedy, _) => greedy_separated_with(count, |i, j| {
            orbit_first_excess(sys, &cands.points[i], &cands.points[j], n, delta)
                .map(|hit| hit.is_some())
        })?,
        (Method::Exact, _) => {
            let trajs = cands
                .points
                .iter()
                .map(|p| Trajectory::generate(sys, p, n))
                .collect::<Result<Vec<_>>>()?;
            exact_over_predicate(count, |i, j| bowen_at_least(&trajs[i], &trajs[j], delta))?
        }
    };
    Ok(SeparationResult {
        kind: SeparationKind::Bowen,
        delta,
        nu: None,
        horizon: n,
        count: witness.len(),
        witness,
        method,
        provenance: cands.provenance.clone(),
    })
}

/// Separated subset under the Hamming distance at horizon n.
pub fn hamming_separation<T: Scalar>(
    sys: &SystemSpec<T>,
    cands: &CandidateSet<T>,
    n: usize,
    delta: T,
    method: Method,
) -> Result<SeparationResult<T>> {
    check_delta(delta)?;
    let count = cands.len();
    let witness = match method {
        Method::Greedy => {
            let mut kept: Vec<usize> = Vec::new();
            let mut trajs: Vec<Trajectory<T>> = Vec::new();
            for i in 0..count {
                let t = Trajectory::generate(sys, &cands.points[i], n)?;
                let mut ok = true;
                for tj in trajs.iter().rev() {
                    if hamming(&t, tj)? < delta {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    kept.push(i);
                    trajs.push(t);
                }
            }
            kept
        }
        Method::Exact => {
            let trajs = cands
                .points
                .iter()
                .map(|p| Trajectory::generate(sys, p, n))
                .collect::<Result<Vec<_>>>()?;
            exact_over_predicate(count, |i, j| Ok(hamming(&trajs[i], &trajs[j])? >= delta))?
        }
    };
    Ok(SeparationResult {
        kind: SeparationKind::Hamming,
        delta,
        nu: None,
        horizon: n,
        count: witness.len(),
        witness,
        method,
        provenance: cands.provenance.clone(),
    })
}

/// Separated subset under the separation frequency: a pair counts as
/// separated when its checkpoint frequency reaches nu.
pub fn asymptotic_separation<T: Scalar>(
    sys: &SystemSpec<T>,
    cands: &CandidateSet<T>,
    horizon: usize,
    delta: T,
    nu: T,
    method: Method,
) -> Result<SeparationResult<T>> {
    check_delta(delta)?;
    if !(nu > T::zero() && nu <= T::one()) {
        return Err(Error::Domain {
            what: "frequency threshold nu",
            value: nu.as_f64(),
            lo: 0.0,
            hi: 1.0,
        });
    }
    let count = cands.len();
    let trajs = cands
        .points
        .iter()
        .map(|p| Trajectory::generate(sys, p, horizon))
        .collect::<Result<Vec<_>>>()?;
    let separated = |i: usize, j: usize| -> Result<bool> {
        Ok(separation_frequency(&trajs[i], &trajs[j], delta)?.value >= nu)
    };
    let witness = match method {
        Method::Greedy => greedy_separated_with(count, separated)?,
        Method::Exact => exact_over_predicate(count, separated)?,
    };
    Ok(SeparationResult {
        kind: SeparationKind::Asymptotic,
        delta,
        nu: Some(nu),
        horizon,
        count: witness.len(),
        witness,
        method,
        provenance: cands.provenance.clone(),
    })
}

/// Separated subset of centered words of radius n under the normalized
/// word distance.
pub fn subword_separation<T: Scalar>(
    spec: &ToeplitzSpec,
    centers: &[i64],
    n: usize,
    delta: T,
    method: Method,
) -> Result<SeparationResult<T>> {
    check_delta(delta)?;
    let len = 2 * n + 1;
    let words = centers
        .iter()
        .map(|&m| {
            spec.window(m, n)
                .map(|bits| crate::metrics::BitWindow::from_bits(&bits))
        })
        .collect::<Result<Vec<_>>>()?;
    let len_t = T::from_usize_exact(len);
    let separated = |i: usize, j: usize| -> Result<bool> {
        let mism = xor_count(&words[i], &words[j]);
        Ok(T::from_usize_exact(mism) / len_t >= delta)
    };
    let witness = match method {
        Method::Greedy => greedy_separated_with(centers.len(), separated)?,
        Method::Exact => exact_over_predicate(centers.len(), separated)?,
    };
    Ok(SeparationResult {
        kind: SeparationKind::Subword,
        delta,
        nu: None,
        horizon: n,
        count: witness.len(),
        witness,
        method,
        provenance: Provenance {
            sampler: format!("word-centers-{}", centers.len()),
            seed: None,
            candidate_count: centers.len(),
        },
    })
}

fn xor_count(a: &crate::metrics::BitWindow, b: &crate::metrics::BitWindow) -> usize {
    debug_assert_eq!(a.len(), b.len());
    let mut count = 0usize;
    for i in 0..a.len() {
        count += (a.get(i) ^ b.get(i)) as usize;
    }
    count
}

/// The plateau witness family: 2^m points on plateau I_m spaced by the
/// plateau crossing quantum, all on the zero fibre.
pub fn counterexample_witness_points<T: Scalar>(n_block: u32) -> Result<Vec<PhasePoint<T>>> {
    if !(3..=9).contains(&n_block) {
        return Err(Error::InvalidParameter(format!(
            "witness level {n_block} outside 3..=9"
        )));
    }
    let spacing = T::exp2i(-(2 * n_block as i32 + 2));
    let left = crate::systems::plateau_left::<T>(n_block);
    (0..(1usize << n_block))
        .map(|j| PhasePoint::interval_circle(left + T::from_usize_exact(j) * spacing, T::zero()))
        .collect()
}

/// Witness candidates with provenance, and the horizon they are built for.
pub fn counterexample_witness_set<T: Scalar>(n_block: u32) -> Result<(CandidateSet<T>, usize)> {
    let points = counterexample_witness_points(n_block)?;
    let set = CandidateSet::from_points(points, format!("witness-{n_block}"));
    Ok((set, 1usize << (2 * n_block + 2)))
}

#[derive(Clone, Debug)]
pub struct WitnessCheck<T: Scalar> {
    pub n_block: u32,
    pub horizon: usize,
    pub pair_count: usize,
    pub min_hamming: T,
    pub max_hamming: T,
}

/// Exhaustive pairwise verification of the witness family: every pair of the
/// 2^m witnesses must be Hamming-separated by delta over the crossing
/// horizon.  Cost grows as 2^(4m); keep m small.
pub fn verify_counterexample_witnesses<T: Scalar>(
    sys: &SystemSpec<T>,
    n_block: u32,
) -> Result<WitnessCheck<T>> {
    match sys {
        SystemSpec::SkewProduct { plateau_depth, .. } => {
            if *plateau_depth < n_block {
                return Err(Error::InvalidParameter(format!(
                    "witness level {n_block} exceeds plateau depth {plateau_depth}"
                )));
            }
        }
        _ => {
            return Err(Error::KindMismatch {
                expected: "interval-circle",
                found: sys.phase_kind(),
            })
        }
    }
    let (set, horizon) = counterexample_witness_set::<T>(n_block)?;
    let trajs = set
        .points
        .iter()
        .map(|p| Trajectory::generate(sys, p, horizon))
        .collect::<Result<Vec<_>>>()?;
    let mut min = T::infinity();
    let mut max = T::zero();
    let mut pairs = 0usize;
    for i in 0..trajs.len() {
        for j in (i + 1)..trajs.len() {
            let d = hamming(&trajs[i], &trajs[j])?;
            min = min.min(d);
            max = max.max(d);
            pairs += 1;
        }
    }
    Ok(WitnessCheck {
        n_block,
        horizon,
        pair_count: pairs,
        min_hamming: min,
        max_hamming: max,
    })
}

/// Smallest horizon at which the pair becomes Bowen-separated, if any within
/// the search horizon.  Converts frequency separation into finite-time
/// separation witnesses.
pub fn sep_to_bowen_witness<T: Scalar>(
    sys: &SystemSpec<T>,
    p: &PhasePoint<T>,
    q: &PhasePoint<T>,
    horizon: usize,
    delta: T,
) -> Result<Option<usize>> {
    Ok(orbit_first_excess(sys, p, q, horizon, delta)?.map(|i| i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::bowen;
    use crate::systems::golden_mean;
    use crate::toeplitz::BlockSchedule;

    fn matrix(rows: &[&[f64]]) -> DistanceMatrix<f64> {
        DistanceMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn matrix_validation() {
        assert!(DistanceMatrix::from_rows(vec![vec![0.0, 1.0], vec![1.0]]).is_err());
        assert!(DistanceMatrix::from_rows(vec![vec![0.1_f64]]).is_err());
        assert!(DistanceMatrix::from_rows(vec![vec![0.0, 1.0], vec![0.9, 0.0]]).is_err());
        assert!(DistanceMatrix::from_rows(vec![vec![0.0, -1.0], vec![-1.0, 0.0]]).is_err());
        assert!(DistanceMatrix::from_rows(vec![vec![0.0, f64::NAN], vec![f64::NAN, 0.0]]).is_err());
    }

    #[test]
    fn greedy_examples() {
        let m = matrix(&[&[0.0, 0.5, 0.2], &[0.5, 0.0, 0.4], &[0.2, 0.4, 0.0]]);
        assert_eq!(greedy_separated(&m, 0.3), vec![0, 1]);
        assert_eq!(greedy_separated(&m, 0.6), vec![0]);

        let m = matrix(&[&[0.0, 0.2, 0.4], &[0.2, 0.0, 0.9], &[0.4, 0.9, 0.0]]);
        assert_eq!(greedy_separated(&m, 0.3), vec![0, 2]);
        // Threshold is closed: equality separates.
        assert_eq!(greedy_separated(&m, 0.4), vec![0, 2]);
        assert_eq!(greedy_separated(&m, 0.41), vec![0]);
    }

    #[test]
    fn exact_beats_greedy_on_a_star() {
        // Hub at distance 0.5 from everyone, spokes mutually at 1.0.
        let m = matrix(&[
            &[0.0, 0.5, 0.5, 0.5],
            &[0.5, 0.0, 1.0, 1.0],
            &[0.5, 1.0, 0.0, 1.0],
            &[0.5, 1.0, 1.0, 0.0],
        ]);
        assert_eq!(greedy_separated(&m, 0.6), vec![0]);
        assert_eq!(exact_max_separated(&m, 0.6).unwrap(), vec![1, 2, 3]);
        // Packing sandwich: exact at 2 delta <= greedy at delta <= exact at delta.
        let g = greedy_separated(&m, 0.6).len();
        assert!(exact_max_separated(&m, 1.2).unwrap().len() <= g);
        assert!(g <= exact_max_separated(&m, 0.6).unwrap().len());
    }

    fn brute_force_max(m: &DistanceMatrix<f64>, delta: f64) -> usize {
        let n = m.size();
        let mut best = 0;
        for mask in 0u32..(1 << n) {
            let members: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let ok = members
                .iter()
                .enumerate()
                .all(|(a, &i)| members[a + 1..].iter().all(|&j| m.get(i, j) >= delta));
            if ok {
                best = best.max(members.len());
            }
        }
        best
    }

    #[test]
    fn exact_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for n in [1usize, 2, 5, 9, 13] {
            for _ in 0..6 {
                let m = DistanceMatrix::from_fn(n, |_, _| Ok(rng.gen_range(0.0..1.0))).unwrap();
                for delta in [0.2, 0.5, 0.8] {
                    let exact = exact_max_separated(&m, delta).unwrap();
                    assert_eq!(exact.len(), brute_force_max(&m, delta), "n = {n}");
                    // Returned set really is separated.
                    for (a, &i) in exact.iter().enumerate() {
                        for &j in &exact[a + 1..] {
                            assert!(m.get(i, j) >= delta);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn size_limit_enforced() {
        let m = DistanceMatrix::from_fn(65, |_, _| Ok(1.0_f64)).unwrap();
        assert!(matches!(
            exact_max_separated(&m, 0.5).unwrap_err(),
            Error::SizeLimit { .. }
        ));
    }

    #[test]
    fn derive_seed_is_stable_and_label_sensitive() {
        let a = derive_seed(42, "torus");
        assert_eq!(a, derive_seed(42, "torus"));
        assert_ne!(a, derive_seed(42, "torus2"));
        assert_ne!(a, derive_seed(43, "torus"));
    }

    #[test]
    fn sampler_layouts() {
        let g = CandidateSet::<f64>::circle_grid(4).unwrap();
        let xs: Vec<f64> = g
            .points
            .iter()
            .map(|p| match p {
                PhasePoint::Circle { x } => *x,
                _ => panic!(),
            })
            .collect();
        assert_eq!(xs, vec![0.0, 0.25, 0.5, 0.75]);
        assert_eq!(g.provenance.sampler, "circle-grid-4");

        let g = CandidateSet::<f64>::interval_grid(0.25, 1.0, 3).unwrap();
        let xs: Vec<f64> = g
            .points
            .iter()
            .map(|p| match p {
                PhasePoint::IntervalCircle { x, .. } => *x,
                _ => panic!(),
            })
            .collect();
        assert_eq!(xs, vec![0.25, 0.5, 0.75]);
        assert!(CandidateSet::<f64>::interval_grid(0.5, 0.25, 3).is_err());
        assert!(CandidateSet::<f64>::circle_grid(0).is_err());
    }

    #[test]
    fn symbolic_sampler_dedups_and_repeats() {
        let src = SequenceSource::<f64>::Regular;
        let a = CandidateSet::symbolic_mixed(&src, 10, 5, 1000, 7).unwrap();
        let b = CandidateSet::symbolic_mixed(&src, 10, 5, 1000, 7).unwrap();
        let offsets = |s: &CandidateSet<f64>| -> Vec<i64> {
            s.points
                .iter()
                .map(|p| match p {
                    PhasePoint::Symbolic { offset, .. } => *offset,
                    _ => panic!(),
                })
                .collect()
        };
        assert_eq!(offsets(&a), offsets(&b));
        assert_eq!(a.len(), 15);
        let all = offsets(&a);
        let mut dedup = all.clone();
        dedup.sort_unstable();
        dedup.dedup();
        assert_eq!(dedup.len(), all.len());
        assert_eq!(&all[..10], &[-5, -4, -3, -2, -1, 0, 1, 2, 3, 4]);
    }

    #[test]
    fn subword_example() {
        let spec = ToeplitzSpec::default_irregular();
        let res = subword_separation::<f64>(&spec, &[0, 3], 1, 0.3, Method::Greedy).unwrap();
        assert_eq!(res.count, 2);
        assert_eq!(res.witness, vec![0, 1]);
        // The words behind the count: (0,0,0) against (0,1,1).
        assert_eq!(spec.window(0, 1).unwrap(), vec![0, 0, 0]);
        assert_eq!(spec.window(3, 1).unwrap(), vec![0, 1, 1]);
        let res = subword_separation::<f64>(&spec, &[0, 3], 1, 0.7, Method::Greedy).unwrap();
        assert_eq!(res.count, 1);
    }

    #[test]
    fn witness_family_level_three() {
        let sys = SystemSpec::<f64>::default_skew_product();
        let check = verify_counterexample_witnesses(&sys, 3).unwrap();
        assert_eq!(check.pair_count, 28);
        assert_eq!(check.horizon, 256);
        assert!(check.min_hamming > 0.25, "min = {}", check.min_hamming);
        assert!(check.max_hamming < 0.5);

        let (set, horizon) = counterexample_witness_set::<f64>(3).unwrap();
        assert_eq!(set.len(), 8);
        let res = hamming_separation(&sys, &set, horizon, 0.25, Method::Greedy).unwrap();
        assert_eq!(res.count, 8);
        let res = hamming_separation(&sys, &set, horizon, 0.25, Method::Exact).unwrap();
        assert_eq!(res.count, 8);
    }

    #[test]
    fn witness_points_are_exact_dyadics() {
        let pts = counterexample_witness_points::<f64>(4).unwrap();
        assert_eq!(pts.len(), 16);
        match (&pts[0], &pts[15]) {
            (
                PhasePoint::IntervalCircle { x: x0, .. },
                PhasePoint::IntervalCircle { x: x15, .. },
            ) => {
                assert_eq!(*x0, 2.0_f64.powi(-4));
                assert_eq!(*x15, 2.0_f64.powi(-4) + 15.0 * 2.0_f64.powi(-10));
            }
            _ => panic!("wrong kind"),
        }
        assert!(counterexample_witness_points::<f64>(2).is_err());
        assert!(counterexample_witness_points::<f64>(10).is_err());
    }

    #[test]
    fn streaming_greedy_matches_matrix_greedy() {
        let sys = SystemSpec::torus_skew(golden_mean::<f64>()).unwrap();
        let cands = CandidateSet::torus_x_grid(24).unwrap();
        let n = 64;
        let delta = 0.1;
        let res = bowen_separation(&sys, &cands, n, delta, Method::Greedy).unwrap();
        let trajs: Vec<_> = cands
            .points
            .iter()
            .map(|p| Trajectory::generate(&sys, p, n).unwrap())
            .collect();
        let m = DistanceMatrix::from_fn(cands.len(), |i, j| bowen(&trajs[i], &trajs[j])).unwrap();
        assert_eq!(res.witness, greedy_separated(&m, delta));
    }

    #[test]
    fn asymptotic_pairs_on_a_shared_fibre() {
        let sys = SystemSpec::torus_skew(golden_mean::<f64>()).unwrap();
        let points = vec![
            PhasePoint::torus(0.0, 0.0).unwrap(),
            PhasePoint::torus(0.0, 0.5).unwrap(),
        ];
        let cands = CandidateSet::from_points(points, "explicit");
        let res = asymptotic_separation(&sys, &cands, 512, 0.3, 0.9, Method::Greedy).unwrap();
        assert_eq!(res.count, 2);
        assert_eq!(res.nu, Some(0.9));
    }

    #[test]
    fn sep_to_bowen_transfer() {
        let sys = SystemSpec::torus_skew(golden_mean::<f64>()).unwrap();
        let p = PhasePoint::torus(0.0, 0.0).unwrap();
        let q = PhasePoint::torus(0.0, 0.5).unwrap();
        assert_eq!(
            sep_to_bowen_witness(&sys, &p, &q, 100, 0.3).unwrap(),
            Some(1)
        );
        let q = PhasePoint::torus(0.0, 1e-9).unwrap();
        assert_eq!(sep_to_bowen_witness(&sys, &p, &q, 100, 0.3).unwrap(), None);
    }

    #[test]
    fn toeplitz_subword_counts_are_exact_methods_agree() {
        let spec = ToeplitzSpec::new(2, BlockSchedule::DoublingPowers, 8).unwrap();
        let centers: Vec<i64> = (-20..=20).collect();
        for n in [2usize, 5, 9] {
            let g = subword_separation::<f64>(&spec, &centers, n, 0.2, Method::Greedy).unwrap();
            let e = subword_separation::<f64>(&spec, &centers, n, 0.2, Method::Exact).unwrap();
            assert!(
                g.count <= e.count,
                "greedy {} vs exact {}",
                g.count,
                e.count
            );
            assert!(e.count <= centers.len());
        }
    }
}
