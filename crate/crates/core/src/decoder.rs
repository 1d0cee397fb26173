//! ML decoding on the real-valued equivalent channel.
//!
//! With `y = vec_realify(vec(Y))` the channel reads `y = Heq s + n`, where
//! `Heq = (I_T ⊗ Ȟ) G μ`. Both decoders return the same point: the
//! lexicographically smallest `s` whose metric is within a relative
//! [`tol::METRIC_TIE`] of the minimum, with the metric recomputed directly as
//! `||y - Heq s||^2`.

use serde::{Deserialize, Serialize};

use crate::constellations::enumerate_vectors;
use crate::linalg::{check_realify, dot, qr_real, RMat};
use crate::{tol, CMat, Error, LinearStbc, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RealEquivalent {
    pub heq: RMat,
    /// Thin QR of the (possibly permuted) `heq`; `None` when rank deficient.
    pub qr: Option<(RMat, RMat)>,
    /// Column order used by the QR: position `l` holds original column `perm[l]`.
    pub perm: Vec<usize>,
}

impl RealEquivalent {
    pub fn full_rank(&self) -> bool {
        self.qr.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnOrder {
    #[default]
    Natural,
    /// Columns by increasing Euclidean norm, so the strongest ones are decided first.
    SortedByNorm,
}

/// Builds `Heq = (I_T ⊗ Ȟ) G μ` for an `n_r x n_t` channel.
pub fn real_equivalent(h: &CMat, code: &LinearStbc, mu: f64) -> Result<RealEquivalent> {
    real_equivalent_ordered(h, code, mu, ColumnOrder::Natural)
}

pub fn real_equivalent_ordered(h: &CMat, code: &LinearStbc, mu: f64, order: ColumnOrder) -> Result<RealEquivalent> {
    if h.cols() != code.n_t() {
        return Err(Error::Dimension(format!("channel has {} columns, code has n_t = {}", h.cols(), code.n_t())));
    }
    from_generator(h, &code.generator_matrix().g, code.t(), mu, order)
}

/// Same as [`real_equivalent_ordered`] with a precomputed generator matrix.
pub fn from_generator(h: &CMat, g: &RMat, t: usize, mu: f64, order: ColumnOrder) -> Result<RealEquivalent> {
    let heq = check_realify(h).kron_identity(t).mul(g)?.scale(mu);
    let n = heq.cols();
    let mut perm: Vec<usize> = (0..n).collect();
    if order == ColumnOrder::SortedByNorm {
        let norms: Vec<f64> = (0..n).map(|j| heq.column(j).iter().map(|x| x * x).sum()).collect();
        perm.sort_by(|&a, &b| norms[a].total_cmp(&norms[b]).then(a.cmp(&b)));
    }
    let permuted = RMat::from_columns(&perm.iter().map(|&j| heq.column(j)).collect::<Vec<_>>())?;
    let qr = match qr_real(&permuted) {
        Ok(f) => Some(f),
        Err(Error::RankDeficient { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(RealEquivalent { heq, qr, perm })
}

/// Realified, vectorized received block.
pub fn receive_vector(y: &CMat) -> Vec<f64> {
    crate::linalg::vec_realify(&y.vec())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeResult {
    pub s_hat: Vec<f64>,
    /// `||y - Heq s_hat||^2`.
    pub metric: f64,
    pub nodes_visited: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderKind {
    #[default]
    Sphere,
    Exhaustive,
}

impl std::str::FromStr for DecoderKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sphere" => Ok(DecoderKind::Sphere),
            "exhaustive" => Ok(DecoderKind::Exhaustive),
            _ => Err(Error::InvalidArgument(format!("unknown decoder '{s}'; expected sphere or exhaustive"))),
        }
    }
}

pub fn metric(y: &[f64], heq: &RMat, s: &[f64]) -> f64 {
    let hs = heq.matvec(s);
    y.iter().zip(&hs).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn tie_tolerance(y: &[f64]) -> f64 {
    tol::METRIC_TIE * dot(y, y).max(1.0)
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()) == Some(std::cmp::Ordering::Less)
}

fn check_inputs(y: &[f64], eq: &RealEquivalent, sets: &[Vec<f64>]) -> Result<()> {
    if y.len() != eq.heq.rows() {
        return Err(Error::Dimension(format!("received vector has length {}, expected {}", y.len(), eq.heq.rows())));
    }
    if sets.len() != eq.heq.cols() {
        return Err(Error::Dimension(format!("{} symbol sets for {} coordinates", sets.len(), eq.heq.cols())));
    }
    if sets.iter().any(Vec::is_empty) {
        return Err(Error::InvalidArgument("empty symbol set".into()));
    }
    Ok(())
}

/// Brute-force ML over the full product of `sets`.
pub fn ml_exhaustive(y: &[f64], eq: &RealEquivalent, sets: &[Vec<f64>]) -> Result<DecodeResult> {
    ml_exhaustive_capped(y, eq, sets, tol::ENUMERATION_CAP)
}

pub fn ml_exhaustive_capped(y: &[f64], eq: &RealEquivalent, sets: &[Vec<f64>], cap: u128) -> Result<DecodeResult> {
    check_inputs(y, eq, sets)?;
    let sorted = sorted_sets(sets);
    let mut best = f64::INFINITY;
    let mut nodes = 0u64;
    for s in enumerate_vectors(&sorted, cap)? {
        nodes += 1;
        best = best.min(metric(y, &eq.heq, &s));
    }
    let limit = best + tie_tolerance(y);
    let s_hat = enumerate_vectors(&sorted, cap)?
        .find(|s| metric(y, &eq.heq, s) <= limit)
        .expect("the minimizer satisfies the bound");
    let metric = metric(y, &eq.heq, &s_hat);
    Ok(DecodeResult { s_hat, metric, nodes_visited: nodes })
}

fn sorted_sets(sets: &[Vec<f64>]) -> Vec<Vec<f64>> {
    sets.iter()
        .map(|s| {
            let mut s = s.clone();
            s.sort_by(f64::total_cmp);
            s.dedup();
            s
        })
        .collect()
}

struct Tree<'a> {
    r: &'a RMat,
    z: &'a [f64],
    sets: &'a [Vec<f64>],
    s: Vec<f64>,
    radius: f64,
    /// When set, collect every leaf within `radius` instead of shrinking it.
    collect: Option<Vec<Vec<f64>>>,
    nodes: u64,
}

impl Tree<'_> {
    fn descend(&mut self, level: usize, partial: f64) {
        let n = self.s.len();
        let rii = self.r[(level, level)];
        let mut acc = self.z[level];
        for j in level + 1..n {
            acc -= self.r[(level, j)] * self.s[j];
        }
        let c = acc / rii;
        let set = self.sets[level].as_slice();
        // Schnorr-Euchner zigzag: candidates by nondecreasing |x - c|.
        let mut hi = set.partition_point(|&x| x < c);
        let mut lo = hi as isize - 1;
        loop {
            let x = match (lo >= 0, hi < set.len()) {
                (false, false) => break,
                (true, false) => {
                    lo -= 1;
                    set[(lo + 1) as usize]
                }
                (false, true) => {
                    hi += 1;
                    set[hi - 1]
                }
                (true, true) => {
                    let (a, b) = (set[lo as usize], set[hi]);
                    if c - a <= b - c {
                        lo -= 1;
                        a
                    } else {
                        hi += 1;
                        b
                    }
                }
            };
            let e = rii * (x - c);
            let d = partial + e * e;
            let inside = if self.collect.is_some() { d <= self.radius } else { d < self.radius };
            if !inside {
                break;
            }
            self.nodes += 1;
            self.s[level] = x;
            if level == 0 {
                match &mut self.collect {
                    Some(leaves) => leaves.push(self.s.clone()),
                    None => self.radius = d,
                }
            } else {
                self.descend(level - 1, d);
            }
        }
    }
}

/// Depth-first Schnorr-Euchner sphere decoder, started with an infinite
/// radius. Exact ML; agrees with [`ml_exhaustive`] on argmin and metric.
pub fn sphere_decode(y: &[f64], eq: &RealEquivalent, sets: &[Vec<f64>]) -> Result<DecodeResult> {
    check_inputs(y, eq, sets)?;
    let (q, r) = eq.qr.as_ref().ok_or_else(|| {
        let n = eq.heq.cols();
        Error::RankDeficient { rank: eq.heq.rank(), needed: n }
    })?;
    let n = r.cols();
    let z = q.transpose().matvec(y);
    let sorted = sorted_sets(sets);
    let permuted: Vec<Vec<f64>> = eq.perm.iter().map(|&j| sorted[j].clone()).collect();
    let mut tree = Tree { r, z: &z, sets: &permuted, s: vec![0.0; n], radius: f64::INFINITY, collect: None, nodes: 0 };
    tree.descend(n - 1, 0.0);
    let first_pass = tree.nodes;
    if !tree.radius.is_finite() {
        return Err(Error::Numerical("sphere search found no leaf".into()));
    }
    // Second pass: every leaf near the optimum, then the ML tie-break rule.
    let tie = tie_tolerance(y);
    tree.radius += 2.0 * tie;
    tree.collect = Some(Vec::new());
    tree.nodes = 0;
    tree.descend(n - 1, 0.0);
    let leaves = tree.collect.take().unwrap_or_default();
    let nodes_visited = first_pass + tree.nodes;
    let unpermute = |p: &Vec<f64>| {
        let mut s = vec![0.0; n];
        for (l, &j) in eq.perm.iter().enumerate() {
            s[j] = p[l];
        }
        s
    };
    let cands: Vec<(Vec<f64>, f64)> = leaves
        .iter()
        .map(|p| {
            let s = unpermute(p);
            let m = metric(y, &eq.heq, &s);
            (s, m)
        })
        .collect();
    let best = cands.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let mut pick: Option<&(Vec<f64>, f64)> = None;
    for c in cands.iter().filter(|c| c.1 <= best + tie) {
        if pick.is_none_or(|p| lex_less(&c.0, &p.0)) {
            pick = Some(c);
        }
    }
    let (s_hat, metric) = pick.cloned().ok_or_else(|| Error::Numerical("sphere search lost its optimum".into()))?;
    Ok(DecodeResult { s_hat, metric, nodes_visited })
}

/// Decodes with `kind`; a sphere request on a rank-deficient channel falls
/// back to exhaustive search. The flag reports whether that happened.
pub fn decode(y: &[f64], eq: &RealEquivalent, sets: &[Vec<f64>], kind: DecoderKind) -> Result<(DecodeResult, bool)> {
    match kind {
        DecoderKind::Exhaustive => Ok((ml_exhaustive(y, eq, sets)?, false)),
        DecoderKind::Sphere if eq.full_rank() => Ok((sphere_decode(y, eq, sets)?, false)),
        DecoderKind::Sphere => Ok((ml_exhaustive(y, eq, sets)?, true)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vec_realify;
    use crate::stbc::{alamouti, golden};
    use crate::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gauss(rng: &mut ChaCha8Rng) -> Complex64 {
        let d = rand_distr::StandardNormal;
        let re: f64 = rng.sample(d);
        let im: f64 = rng.sample(d);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    fn channel(rng: &mut ChaCha8Rng, n_r: usize, n_t: usize) -> CMat {
        CMat::from_fn(n_r, n_t, |_, _| gauss(rng))
    }

    #[test]
    fn alamouti_identity_channel() {
        let eq = real_equivalent(&CMat::identity(2), &alamouti(), 1.0).unwrap();
        let h = &eq.heq;
        for i in 0..4 {
            for j in 0..4 {
                let d = dot(&h.column(i), &h.column(j));
                let want = if i == j { 2.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-12);
            }
        }
        assert!(h.matvec(&[0.0; 4]).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn equivalent_matches_direct_encoding() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = golden();
        let h = channel(&mut rng, 2, 2);
        let eq = real_equivalent(&h, &g, 0.7).unwrap();
        for _ in 0..100 {
            let s: Vec<f64> = (0..8).map(|_| rng.random_range(-3..=3) as f64).collect();
            let direct = vec_realify(&h.mul(&g.encode(&s, 0.7).unwrap()).unwrap().vec());
            let via = eq.heq.matvec(&s);
            assert!(direct.iter().zip(&via).all(|(a, b)| (a - b).abs() < 1e-10));
        }
    }

    #[test]
    fn noiseless_recovery() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = golden();
        let sets = g.coord_sets(2).unwrap();
        let h = channel(&mut rng, 2, 2);
        let eq = real_equivalent(&h, &g, 1.0).unwrap();
        let s0 = vec![1.0, -1.0, -1.0, 1.0, 1.0, 1.0, -1.0, -1.0];
        let y = eq.heq.matvec(&s0);
        let a = sphere_decode(&y, &eq, &sets).unwrap();
        let b = ml_exhaustive(&y, &eq, &sets).unwrap();
        assert_eq!(a.s_hat, s0);
        assert_eq!(b.s_hat, s0);
        assert!(a.metric < 1e-20);
        assert!(a.nodes_visited >= 8);
    }

    #[test]
    fn ties_go_to_the_lexicographically_smaller_vector() {
        // One real coordinate, y halfway between -1 and 1.
        let w = vec![CMat::identity(1), CMat::identity(1).scale(Complex64::new(0.0, 1.0))];
        let code = LinearStbc::new("t", 1, 1, w, crate::stbc::Alphabet::Pam).unwrap();
        let eq = real_equivalent(&CMat::identity(1), &code, 1.0).unwrap();
        let sets = code.coord_sets(2).unwrap();
        let y = vec![0.0, 1.0];
        let a = ml_exhaustive(&y, &eq, &sets).unwrap();
        let b = sphere_decode(&y, &eq, &sets).unwrap();
        assert_eq!(a.s_hat, vec![-1.0, 1.0]);
        assert_eq!(b.s_hat, a.s_hat);
    }

    #[test]
    fn sphere_agrees_with_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for (code, n_r, m) in [(golden(), 2, 2), (alamouti(), 1, 4), (alamouti(), 2, 3)] {
            let sets = code.coord_sets(m).unwrap();
            for trial in 0..300 {
                let h = channel(&mut rng, n_r, 2);
                let order = if trial % 2 == 0 { ColumnOrder::Natural } else { ColumnOrder::SortedByNorm };
                let eq = real_equivalent_ordered(&h, &code, 1.3, order).unwrap();
                let s: Vec<f64> = sets.iter().map(|s| s[rng.random_range(0..s.len())]).collect();
                let mut y = eq.heq.matvec(&s);
                for v in y.iter_mut() {
                    *v += rng.sample::<f64, _>(rand_distr::StandardNormal) * 1.5;
                }
                let a = sphere_decode(&y, &eq, &sets).unwrap();
                let b = ml_exhaustive(&y, &eq, &sets).unwrap();
                assert_eq!(a.s_hat, b.s_hat);
                assert_eq!(a.metric, b.metric);
                let rand_s: Vec<f64> = sets.iter().map(|s| s[rng.random_range(0..s.len())]).collect();
                assert!(b.metric <= metric(&y, &eq.heq, &rand_s) + 1e-12);
            }
        }
    }

    #[test]
    fn scale_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = golden();
        let sets = g.coord_sets(2).unwrap();
        let h = channel(&mut rng, 2, 2);
        let eq = real_equivalent(&h, &g, 1.0).unwrap();
        let eq2 = real_equivalent(&h, &g, 3.0).unwrap();
        let y: Vec<f64> = (0..8).map(|_| rng.random_range(-4.0..4.0)).collect();
        let y2: Vec<f64> = y.iter().map(|v| v * 3.0).collect();
        assert_eq!(sphere_decode(&y, &eq, &sets).unwrap().s_hat, sphere_decode(&y2, &eq2, &sets).unwrap().s_hat);
    }

    #[test]
    fn rank_deficient_channel_is_flagged() {
        // Golden code (8 real symbols) over 2x1 gives a 4x8 system.
        let g = golden();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = channel(&mut rng, 1, 2);
        let eq = real_equivalent(&h, &g, 1.0).unwrap();
        assert!(!eq.full_rank());
        let sets = g.coord_sets(2).unwrap();
        let y = vec![0.1; 4];
        assert!(matches!(sphere_decode(&y, &eq, &sets), Err(Error::RankDeficient { .. })));
        let (res, fell_back) = decode(&y, &eq, &sets, DecoderKind::Sphere).unwrap();
        assert!(fell_back);
        assert_eq!(res, ml_exhaustive(&y, &eq, &sets).unwrap());
    }
}
