//! Diversity-multiplexing theory oracles: the optimal tradeoff curve, the
//! water-filling solution of the pairwise-error program, and the outage
//! exponent minimization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Piecewise-linear optimal DMT through `(k, (n_t - k)(n_r - k))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmtCurve {
    pub n_t: usize,
    pub n_r: usize,
    pub vertices: Vec<(f64, f64)>,
}

pub fn optimal_dmt(n_t: usize, n_r: usize) -> Result<DmtCurve> {
    if n_t == 0 || n_r == 0 {
        return Err(Error::InvalidArgument("n_t and n_r must be at least 1".into()));
    }
    let vertices = (0..=n_t.min(n_r)).map(|k| (k as f64, ((n_t - k) * (n_r - k)) as f64)).collect();
    Ok(DmtCurve { n_t, n_r, vertices })
}

impl DmtCurve {
    pub fn n_min(&self) -> usize {
        self.n_t.min(self.n_r)
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        let top = self.n_min() as f64;
        if !(0.0..=top).contains(&r) {
            return Err(Error::InvalidArgument(format!("r = {r} is outside [0, {top}]")));
        }
        let k = (r.floor() as usize).min(self.n_min().saturating_sub(1));
        if self.n_min() == 0 {
            return Ok(self.vertices[0].1);
        }
        let (x0, y0) = self.vertices[k];
        let (x1, y1) = self.vertices[k + 1];
        Ok(y0 + (y1 - y0) * (r - x0) / (x1 - x0))
    }
}

/// `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2)
}

/// Chernoff-style bound `Q(x) <= exp(-x^2/2) / 2`, valid for `x >= 0`.
pub fn q_bound(x: f64) -> f64 {
    0.5 * (-0.5 * x * x).exp()
}

/// Pairwise-error program: minimize `Σ_ij a_ij d_j^2` over `a >= 0` subject to
/// `(1/n_t) Σ_ij ln(1 + a_ij snr) = (r + δ) ln snr`, with `i` over the `n_r`
/// receive antennas and `j` over the `n_t` squared singular values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktProblem {
    pub n_t: usize,
    pub n_r: usize,
    pub d_sq: Vec<f64>,
    pub snr: f64,
    pub r: f64,
    pub delta: f64,
}

impl KktProblem {
    /// Sorts `d_sq` descending and validates.
    pub fn new(n_t: usize, n_r: usize, mut d_sq: Vec<f64>, snr: f64, r: f64, delta: f64) -> Result<Self> {
        if n_t == 0 || n_r == 0 {
            return Err(Error::InvalidArgument("n_t and n_r must be at least 1".into()));
        }
        if d_sq.len() != n_t {
            return Err(Error::Dimension(format!("expected {n_t} squared singular values, got {}", d_sq.len())));
        }
        if d_sq.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::InvalidArgument("squared singular values must be positive".into()));
        }
        if !(snr.is_finite() && snr > 1.0) {
            return Err(Error::InvalidArgument("snr must exceed 1 (linear)".into()));
        }
        if !(delta > 0.0) || !(r >= 0.0) || !(r + delta).is_finite() {
            return Err(Error::InvalidArgument("need r >= 0 and delta > 0".into()));
        }
        d_sq.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { n_t, n_r, d_sq, snr, r, delta })
    }

    fn rate(&self) -> f64 {
        self.r + self.delta
    }

    /// Right-hand side of the constraint in nats, `n_t (r + δ) ln snr`.
    fn budget(&self) -> f64 {
        self.n_t as f64 * self.rate() * self.snr.ln()
    }

    pub fn objective(&self, a: &[Vec<f64>]) -> f64 {
        a.iter().map(|row| row.iter().zip(&self.d_sq).map(|(x, d)| x * d).sum::<f64>()).sum()
    }

    /// `(1/n_t) Σ ln(1 + a snr) - (r + δ) ln snr`.
    pub fn constraint_residual(&self, a: &[Vec<f64>]) -> f64 {
        let s: f64 = a.iter().flatten().map(|x| (x * self.snr).ln_1p()).sum();
        s / self.n_t as f64 - self.rate() * self.snr.ln()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktSolution {
    pub lambda: f64,
    /// `n_r x n_t`, identical rows.
    pub a: Vec<Vec<f64>>,
    pub objective: f64,
    pub residual: f64,
}

/// Water-filling `a_ij = (1/snr)[λ snr / (n_t d_j^2) - 1]^+` with `λ` from
/// bisection on the constraint, then refined exactly on the active set.
pub fn kkt_waterfill(p: &KktProblem) -> KktSolution {
    let nt = p.n_t as f64;
    let nr = p.n_r as f64;
    let level =
        |lambda: f64| -> f64 { p.d_sq.iter().map(|d| (lambda * p.snr / (nt * d)).ln().max(0.0)).sum::<f64>() * nr };
    let budget = p.budget();
    let d_max = p.d_sq[0];
    let d_min = p.d_sq[p.n_t - 1];
    let mut lo = nt * d_min / p.snr;
    let mut hi = nt * d_max * p.snr.powf(p.rate() / nr - 1.0) * 10.0;
    while level(hi) < budget {
        hi *= 2.0;
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if level(mid) < budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // On the active set A the constraint is n_r Σ_{j∈A} ln(λ snr / (n_t d_j)) = budget.
    let active: Vec<f64> = p.d_sq.iter().copied().filter(|d| hi * p.snr / (nt * d) > 1.0).collect();
    let lambda = if active.is_empty() {
        hi
    } else {
        let sum_logs: f64 = active.iter().map(|d| (p.snr / (nt * d)).ln()).sum();
        let exact = ((budget / nr - sum_logs) / active.len() as f64).exp();
        if exact >= lo * (1.0 - 1e-12) && exact <= hi * (1.0 + 1e-12) {
            exact
        } else {
            hi
        }
    };
    let row: Vec<f64> = p.d_sq.iter().map(|d| ((lambda * p.snr / (nt * d) - 1.0) / p.snr).max(0.0)).collect();
    let a = vec![row; p.n_r];
    let objective = p.objective(&a);
    let residual = p.constraint_residual(&a);
    KktSolution { lambda, a, objective, residual }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub kkt_objective: f64,
    pub descent_objective: f64,
    pub gap: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Euclidean projection onto `{u >= 0, Σ u = s}`.
pub fn project_simplex(v: &[f64], s: f64) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, &x) in sorted.iter().enumerate() {
        cum += x;
        let t = (cum - s) / (k + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

struct Descent {
    objective: f64,
    converged: bool,
    iterations: usize,
}

/// Projected gradient in `u_ij = ln(1 + a_ij snr)`, where the feasible set
/// is a scaled simplex and the objective `Σ d_j^2 (e^u - 1) / snr` is convex.
fn projected_descent(p: &KktProblem, start: Vec<f64>, max_iter: usize) -> Descent {
    let n_t = p.n_t;
    let s = p.budget();
    let weight = |idx: usize| p.d_sq[idx % n_t] / p.snr;
    let f = |u: &[f64]| u.iter().enumerate().map(|(i, x)| weight(i) * x.exp_m1()).sum::<f64>();
    let mut u = project_simplex(&start, s);
    let mut fu = f(&u);
    let mut step = 1.0 / u.iter().enumerate().map(|(i, x)| weight(i) * x.exp()).fold(0.0, f64::max).max(1e-300);
    for it in 0..max_iter {
        let grad: Vec<f64> = u.iter().enumerate().map(|(i, x)| weight(i) * x.exp()).collect();
        let mut t = step * 4.0;
        let (next, fnext) = loop {
            let trial: Vec<f64> = u.iter().zip(&grad).map(|(x, g)| x - t * g).collect();
            let cand = project_simplex(&trial, s);
            let fc = f(&cand);
            let decrease: f64 = grad.iter().zip(cand.iter().zip(&u)).map(|(g, (c, x))| g * (c - x)).sum();
            let dist: f64 = cand.iter().zip(&u).map(|(c, x)| (c - x) * (c - x)).sum();
            if fc <= fu + decrease + dist / (2.0 * t) || t < 1e-300 {
                break (cand, fc);
            }
            t *= 0.5;
        };
        step = t;
        let moved: f64 = next.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let improvement = fu - fnext;
        u = next;
        fu = fnext;
        if moved < 1e-13 * s.max(1.0) || (improvement >= 0.0 && improvement <= 1e-15 * fu.abs()) {
            return Descent { objective: fu, converged: true, iterations: it + 1 };
        }
    }
    Descent { objective: fu, converged: false, iterations: max_iter }
}

/// Solves the same program by projected gradient from `restarts` random
/// feasible points and compares with [`kkt_waterfill`].
pub fn kkt_crosscheck(p: &KktProblem, restarts: usize, seed: u64) -> Result<CrossCheck> {
    let dim = p.n_t * p.n_r;
    if dim > 16 {
        return Err(Error::InvalidArgument(format!("cross-check is limited to n_t n_r <= 16, got {dim}")));
    }
    let kkt = kkt_waterfill(p);
    let s = p.budget();
    let runs: Vec<Descent> = (0..restarts.max(1) as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ k.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let raw: Vec<f64> = (0..dim).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
            let total: f64 = raw.iter().sum();
            let start = raw.iter().map(|x| x / total * s).collect();
            projected_descent(p, start, 200_000)
        })
        .collect();
    let best = runs.iter().min_by(|a, b| a.objective.total_cmp(&b.objective)).expect("at least one restart");
    let gap = (kkt.objective - best.objective).abs() / kkt.objective.abs().max(f64::MIN_POSITIVE);
    Ok(CrossCheck {
        kkt_objective: kkt.objective,
        descent_objective: best.objective,
        gap,
        converged: runs.iter().any(|r| r.converged),
        iterations: best.iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    /// Maximize `c^T x` subject to the rows and `x >= 0`.
    pub c: Vec<f64>,
    pub rows: Vec<(Vec<f64>, Sense, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

const LP_EPS: f64 = 1e-10;

/// Dense two-phase tableau simplex with Bland's rule.
pub fn solve_lp(lp: &LinearProgram) -> LpOutcome {
    let n = lp.c.len();
    let m = lp.rows.len();
    let mut n_slack = 0;
    let mut n_art = 0;
    let rows: Vec<(Vec<f64>, Sense, f64)> = lp
        .rows
        .iter()
        .map(|(a, s, b)| {
            if *b < 0.0 {
                let flipped = match s {
                    Sense::Le => Sense::Ge,
                    Sense::Ge => Sense::Le,
                    Sense::Eq => Sense::Eq,
                };
                (a.iter().map(|x| -x).collect(), flipped, -b)
            } else {
                (a.clone(), *s, *b)
            }
        })
        .collect();
    for (_, s, _) in &rows {
        match s {
            Sense::Le => n_slack += 1,
            Sense::Ge => {
                n_slack += 1;
                n_art += 1
            }
            Sense::Eq => n_art += 1,
        }
    }
    let cols = n + n_slack + n_art;
    let w = cols + 1;
    let mut t = vec![0.0; (m + 1) * w];
    let mut basis = vec![0usize; m];
    let (mut si, mut ai) = (n, n + n_slack);
    let mut artificial = Vec::new();
    for (r, (a, s, b)) in rows.iter().enumerate() {
        t[r * w..r * w + n].copy_from_slice(a);
        t[r * w + cols] = *b;
        match s {
            Sense::Le => {
                t[r * w + si] = 1.0;
                basis[r] = si;
                si += 1;
            }
            Sense::Ge => {
                t[r * w + si] = -1.0;
                si += 1;
                t[r * w + ai] = 1.0;
                basis[r] = ai;
                artificial.push(ai);
                ai += 1;
            }
            Sense::Eq => {
                t[r * w + ai] = 1.0;
                basis[r] = ai;
                artificial.push(ai);
                ai += 1;
            }
        }
    }
    let pivot = |t: &mut [f64], basis: &mut [usize], r: usize, c: usize| {
        let p = t[r * w + c];
        for j in 0..w {
            t[r * w + j] /= p;
        }
        for i in 0..=m {
            if i != r {
                let f = t[i * w + c];
                if f != 0.0 {
                    for j in 0..w {
                        t[i * w + j] -= f * t[r * w + j];
                    }
                }
            }
        }
        basis[r] = c;
    };
    // The objective row stores reduced costs z_j - c_j for maximization; we
    // enter columns with a negative entry.
    let run = |t: &mut [f64], basis: &mut [usize], allowed: &dyn Fn(usize) -> bool| -> bool {
        for _ in 0..10_000 {
            let Some(c) = (0..cols).find(|&j| allowed(j) && t[m * w + j] < -LP_EPS) else {
                return true;
            };
            let mut best: Option<(f64, usize)> = None;
            for r in 0..m {
                let a = t[r * w + c];
                if a > LP_EPS {
                    let ratio = t[r * w + cols] / a;
                    let better = match best {
                        None => true,
                        Some((br, bidx)) => ratio < br - LP_EPS || (ratio <= br + LP_EPS && basis[r] < basis[bidx]),
                    };
                    if better {
                        best = Some((ratio, r));
                    }
                }
            }
            match best {
                None => return false,
                Some((_, r)) => pivot(t, basis, r, c),
            }
        }
        false
    };
    if !artificial.is_empty() {
        // Phase 1: maximize -Σ artificials.
        for &a in &artificial {
            t[m * w + a] = 1.0;
        }
        for r in 0..m {
            if artificial.contains(&basis[r]) {
                for j in 0..w {
                    t[m * w + j] -= t[r * w + j];
                }
            }
        }
        run(&mut t, &mut basis, &|_| true);
        if t[m * w + cols] < -1e-8 {
            return LpOutcome::Infeasible;
        }
        // Drive remaining (zero-level) artificials out of the basis.
        for r in 0..m {
            if artificial.contains(&basis[r]) {
                if let Some(c) = (0..n + n_slack).find(|&j| t[r * w + j].abs() > LP_EPS) {
                    pivot(&mut t, &mut basis, r, c);
                }
            }
        }
    }
    for j in 0..w {
        t[m * w + j] = 0.0;
    }
    for j in 0..n {
        t[m * w + j] = -lp.c[j];
    }
    for r in 0..m {
        let cb = if basis[r] < n { lp.c[basis[r]] } else { 0.0 };
        if cb != 0.0 {
            for j in 0..w {
                t[m * w + j] += cb * t[r * w + j];
            }
        }
    }
    let art_start = n + n_slack;
    if !run(&mut t, &mut basis, &|j| j < art_start) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for r in 0..m {
        if basis[r] < n {
            x[basis[r]] = t[r * w + cols];
        }
    }
    let value = lp.c.iter().zip(&x).map(|(c, v)| c * v).sum();
    LpOutcome::Optimal { x, value }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentLpResult {
    pub n_t: usize,
    pub n_r: usize,
    pub r: f64,
    /// `(η, infimum at η)` for each relaxation level.
    pub sequence: Vec<(f64, f64)>,
    /// Linear extrapolation of the two smallest-η values to `η = 0`.
    pub extrapolated: f64,
    pub expected: f64,
    /// Minimizing `α` (rows: receive index `i`, columns: `j`) at the smallest η.
    pub argmin: Vec<Vec<f64>>,
    /// Whether `α_ij = 1 - r/n_r` for every entry is feasible with value equal to the infimum.
    pub uniform_configuration_optimal: bool,
    /// Entries of the LP minimizer equal to `1 - r/n_r`.
    pub entries_at_uniform_level: usize,
}

pub const RELAXATION_ETAS: [f64; 3] = [0.1, 0.01, 0.001];

/// `min Σ α_ij` subject to `Σ_i max_j (1 - α_ij)^+ >= r_η` and
/// `Σ_ij (1 - α_ij)^+ <= n_t r_η`, `r_η = min(r + η, n_r)`.
///
/// With `β = (1 - α)^+ ∈ [0, 1]` the optimum has `α = 1 - β`, so the problem
/// becomes `n_t n_r - max Σ β`; the max over `j` is handled by solving one LP
/// per choice of maximizing column in each row.
pub fn outage_exponent_lp_at(n_t: usize, n_r: usize, r: f64, eta: f64) -> Result<(f64, Vec<Vec<f64>>)> {
    if n_t == 0 || n_r == 0 {
        return Err(Error::InvalidArgument("n_t and n_r must be at least 1".into()));
    }
    if !(0.0..=n_r as f64).contains(&r) {
        return Err(Error::InvalidArgument(format!("r = {r} is outside [0, {n_r}]")));
    }
    let choices = (n_t as u64)
        .checked_pow(n_r as u32)
        .filter(|&c| c <= 1 << 20)
        .ok_or_else(|| Error::InvalidArgument("too many column choices for the exponent search".into()))?;
    let r_eta = (r + eta).min(n_r as f64);
    let nv = n_t * n_r;
    let idx = |i: usize, j: usize| i * n_t + j;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for choice in 0..choices {
        let mut cols = Vec::with_capacity(n_r);
        let mut c = choice;
        for _ in 0..n_r {
            cols.push((c % n_t as u64) as usize);
            c /= n_t as u64;
        }
        let mut rows = Vec::new();
        let mut sel = vec![0.0; nv];
        for (i, &j) in cols.iter().enumerate() {
            sel[idx(i, j)] = 1.0;
        }
        rows.push((sel, Sense::Ge, r_eta));
        rows.push((vec![1.0; nv], Sense::Le, n_t as f64 * r_eta));
        for (i, &j) in cols.iter().enumerate() {
            // β_{i j_i} is the row maximum.
            for jj in 0..n_t {
                if jj != j {
                    let mut row = vec![0.0; nv];
                    row[idx(i, jj)] = 1.0;
                    row[idx(i, j)] = -1.0;
                    rows.push((row, Sense::Le, 0.0));
                }
            }
        }
        for v in 0..nv {
            let mut row = vec![0.0; nv];
            row[v] = 1.0;
            rows.push((row, Sense::Le, 1.0));
        }
        let lp = LinearProgram { c: vec![1.0; nv], rows };
        match solve_lp(&lp) {
            LpOutcome::Optimal { x, value } => {
                if best.as_ref().is_none_or(|(v, _)| value > *v + 1e-12) {
                    best = Some((value, x));
                }
            }
            LpOutcome::Infeasible => {}
            LpOutcome::Unbounded => return Err(Error::Numerical("bounded LP reported unbounded".into())),
        }
    }
    let (value, beta) = best.ok_or_else(|| Error::Numerical("exponent program is infeasible".into()))?;
    let alpha = (0..n_r).map(|i| (0..n_t).map(|j| 1.0 - beta[idx(i, j)]).collect()).collect();
    Ok((nv as f64 - value, alpha))
}

pub fn outage_exponent_lp(n_t: usize, n_r: usize, r: f64) -> Result<ExponentLpResult> {
    let mut sequence = Vec::new();
    let mut argmin = Vec::new();
    for &eta in &RELAXATION_ETAS {
        let (v, a) = outage_exponent_lp_at(n_t, n_r, r, eta)?;
        sequence.push((eta, v));
        argmin = a;
    }
    let (e1, v1) = sequence[sequence.len() - 2];
    let (e2, v2) = sequence[sequence.len() - 1];
    let extrapolated = v2 - e2 * (v1 - v2) / (e1 - e2);
    let expected = n_t as f64 * (n_r as f64 - r);
    let level = 1.0 - r / n_r as f64;
    let uniform_sum = (n_t * n_r) as f64 * level;
    // Feasibility of the uniform point at η = 0: Σ_i max_j β = r and Σβ = n_t r.
    let uniform_configuration_optimal = (uniform_sum - extrapolated).abs() <= 1e-6 * expected.max(1.0);
    let entries_at_uniform_level =
        argmin.iter().flatten().filter(|&&a: &&f64| (a - level).abs() < 1e-6 + RELAXATION_ETAS[2]).count();
    Ok(ExponentLpResult {
        n_t,
        n_r,
        r,
        sequence,
        extrapolated,
        expected,
        argmin,
        uniform_configuration_optimal,
        entries_at_uniform_level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curves() {
        let c = optimal_dmt(4, 2).unwrap();
        assert_eq!(c.vertices, vec![(0.0, 8.0), (1.0, 3.0), (2.0, 0.0)]);
        assert_eq!(optimal_dmt(2, 2).unwrap().eval(0.5).unwrap(), 2.5);
        let single = optimal_dmt(3, 1).unwrap();
        for r in [0.0, 0.25, 0.7, 1.0] {
            assert!((single.eval(r).unwrap() - 3.0 * (1.0 - r)).abs() < 1e-12);
        }
        assert!(single.eval(1.5).is_err());
        assert!(single.eval(-0.1).is_err());
        assert!(optimal_dmt(0, 2).is_err());
    }

    #[test]
    fn curve_shape_for_all_small_sizes() {
        for nt in 1..=16 {
            for nr in 1..=16 {
                let c = optimal_dmt(nt, nr).unwrap();
                assert_eq!(c.eval(0.0).unwrap(), (nt * nr) as f64);
                assert_eq!(c.eval(nt.min(nr) as f64).unwrap(), 0.0);
                let slopes: Vec<f64> = c.vertices.windows(2).map(|w| w[1].1 - w[0].1).collect();
                assert!(slopes.iter().all(|&s| s < 0.0));
                assert!(slopes.windows(2).all(|w| w[1] >= w[0]));
            }
        }
    }

    #[test]
    fn q_bound_holds() {
        for i in 0..=400 {
            let x = i as f64 * 0.025;
            assert!(q_function(x) <= q_bound(x) + 1e-300);
        }
        assert!((q_function(0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn scalar_kkt_case() {
        let p = KktProblem::new(1, 1, vec![1.0], 1e4, 0.25, 0.25).unwrap();
        let s = kkt_waterfill(&p);
        assert!((s.lambda - 0.01).abs() < 1e-12);
        assert!((s.a[0][0] - 0.0099).abs() < 1e-12);
        assert!((s.objective - 0.0099).abs() < 1e-12);
        assert!(s.residual.abs() < 1e-9);
    }

    #[test]
    fn symmetric_kkt_case() {
        let (nt, nr, c, snr, rd) = (3usize, 2usize, 2.5, 1e3, 1.2);
        let p = KktProblem::new(nt, nr, vec![c; nt], snr, rd - 0.1, 0.1).unwrap();
        let s = kkt_waterfill(&p);
        let want = nt as f64 * c * snr.powf(rd / nr as f64 - 1.0);
        assert!((s.lambda - want).abs() < 1e-12 * want);
        assert!(s.a.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn kkt_beats_random_feasible_points() {
        let p = KktProblem::new(2, 2, vec![4.0, 1.0], 1e3, 0.9, 0.1).unwrap();
        let s = kkt_waterfill(&p);
        assert!(s.residual.abs() < 1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let budget = p.budget();
        for _ in 0..1000 {
            let raw: Vec<f64> = (0..4).map(|_| rng.random::<f64>()).collect();
            let tot: f64 = raw.iter().sum();
            let a: Vec<Vec<f64>> =
                raw.chunks(2).map(|ch| ch.iter().map(|x| (x / tot * budget).exp_m1() / p.snr).collect()).collect();
            assert!(p.constraint_residual(&a).abs() < 1e-9);
            assert!(s.objective <= p.objective(&a) + 1e-12);
        }
    }

    #[test]
    fn kkt_objective_grows_with_delta() {
        let mut prev = 0.0;
        for delta in [0.05, 0.1, 0.2, 0.4] {
            let p = KktProblem::new(2, 3, vec![3.0, 0.5], 1e5, 0.5, delta).unwrap();
            let s = kkt_waterfill(&p);
            assert!(s.objective >= prev);
            prev = s.objective;
        }
    }

    #[test]
    fn kkt_objective_slope_follows_delta() {
        // With every a_ij active, snr * objective ≐ SNR^{δ/n_r} at r = 0.
        let (nr, delta) = (2usize, 0.5);
        let pts: Vec<(f64, f64)> = [1e6, 1e8, 1e10, 1e12]
            .iter()
            .map(|&snr| {
                let p = KktProblem::new(2, nr, vec![2.0, 1.0], snr, 0.0, delta).unwrap();
                (snr.ln(), (snr * kkt_waterfill(&p).objective).ln())
            })
            .collect();
        let slope = (pts[3].1 - pts[0].1) / (pts[3].0 - pts[0].0);
        assert!((slope - delta / nr as f64).abs() < 0.02, "{slope}");
    }

    #[test]
    fn crosscheck_cases() {
        let p = KktProblem::new(1, 1, vec![1.0], 1e4, 0.25, 0.25).unwrap();
        let c = kkt_crosscheck(&p, 2, 1).unwrap();
        assert!(c.gap < 1e-6, "{c:?}");
        let p = KktProblem::new(2, 2, vec![4.0, 1.0], 1e3, 0.9, 0.1).unwrap();
        let c = kkt_crosscheck(&p, 4, 2).unwrap();
        assert!(c.gap < 1e-4, "{c:?}");
        let p = KktProblem::new(2, 2, vec![4.0, 1.0], 1e3, 3.0, 0.5).unwrap();
        let c = kkt_crosscheck(&p, 4, 3).unwrap();
        assert!(c.gap < 1e-4, "{c:?}");
    }

    #[test]
    fn simplex_projection() {
        let p = project_simplex(&[0.5, 0.5, 3.0], 1.0);
        assert_eq!(p, vec![0.0, 0.0, 1.0]);
        let p = project_simplex(&[0.2, 0.3], 1.0);
        assert!((p[0] - 0.45).abs() < 1e-15 && (p[1] - 0.55).abs() < 1e-15);
    }

    #[test]
    fn lp_solver_small_cases() {
        // max x + y, x + 2y <= 4, 3x + y <= 6 -> (1.6, 1.2).
        let lp = LinearProgram {
            c: vec![1.0, 1.0],
            rows: vec![(vec![1.0, 2.0], Sense::Le, 4.0), (vec![3.0, 1.0], Sense::Le, 6.0)],
        };
        match solve_lp(&lp) {
            LpOutcome::Optimal { x, value } => {
                assert!((x[0] - 1.6).abs() < 1e-12 && (x[1] - 1.2).abs() < 1e-12);
                assert!((value - 2.8).abs() < 1e-12);
            }
            o => panic!("{o:?}"),
        }
        let infeasible =
            LinearProgram { c: vec![1.0], rows: vec![(vec![1.0], Sense::Ge, 2.0), (vec![1.0], Sense::Le, 1.0)] };
        assert_eq!(solve_lp(&infeasible), LpOutcome::Infeasible);
        let unbounded = LinearProgram { c: vec![1.0], rows: vec![(vec![1.0], Sense::Ge, 1.0)] };
        assert_eq!(solve_lp(&unbounded), LpOutcome::Unbounded);
        // max -x, x = 3 with a negative rhs written the other way round.
        let eq = LinearProgram { c: vec![-1.0], rows: vec![(vec![-1.0], Sense::Eq, -3.0)] };
        assert_eq!(solve_lp(&eq), LpOutcome::Optimal { x: vec![3.0], value: -3.0 });
    }

    #[test]
    fn exponent_lp_values() {
        for (nt, nr) in [(2, 2), (4, 2), (4, 1), (3, 3)] {
            for r in [0.0, 0.5, 1.0] {
                let res = outage_exponent_lp(nt, nr, r).unwrap();
                let want = nt as f64 * (nr as f64 - r);
                assert!((res.extrapolated - want).abs() < 1e-9, "({nt},{nr},{r}): {res:?}");
                assert!(res.uniform_configuration_optimal);
            }
        }
        assert!(outage_exponent_lp(2, 2, 2.5).is_err());
    }
}
