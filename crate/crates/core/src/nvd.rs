//! Minimum determinants and the two determinant criteria.
//!
//! All searches run over difference vectors. Since `det(ΔXΔX^H)` is even in
//! `Δs`, only vectors whose first nonzero coordinate is positive are visited.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constellations::{pam, product_size};
use crate::linalg::det_c_in_place;
use crate::stats::linear_fit;
use crate::stbc::{Alphabet, SchemeConfig};
use crate::{db_to_linear, tol, Error, LinearStbc, Result};

/// Default per-coordinate bound for integer-design searches.
pub const DEFAULT_BOUND: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchScope {
    /// Every nonzero difference of the finite code.
    Code,
    /// Every nonzero integer vector in a box; a certificate over the box only.
    IntegerBox,
    /// Random integer vectors in a box; an upper bound on the box minimum.
    RandomSample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinDetReport {
    pub code: String,
    pub scope: SearchScope,
    /// Minimum of `det(ΔX ΔX^H)`; values under [`tol::DET_ZERO`] are reported as 0.
    pub value: f64,
    /// A difference vector attaining `value`.
    pub argmin: Vec<f64>,
    /// PAM size for code searches.
    pub pam_size: Option<u32>,
    /// Per-coordinate bound `B` for integer searches.
    pub search_bound: Option<u32>,
    /// True only when every nonzero difference of the finite code was checked.
    pub exhaustive: bool,
    pub vectors_examined: u64,
}

impl MinDetReport {
    pub fn is_zero(&self) -> bool {
        self.value == 0.0
    }
}

/// `det(ΔX ΔX^H)` for `ΔX = Σ d_i W_i`.
pub fn diff_det(code: &LinearStbc, d: &[f64]) -> Result<f64> {
    let x = code.encode(d, 1.0)?;
    let mut g = x.gram().as_slice().to_vec();
    let v = det_c_in_place(&mut g, code.n_t()).re;
    Ok(clean(v))
}

fn clean(v: f64) -> f64 {
    if v < tol::DET_ZERO {
        0.0
    } else {
        v
    }
}

struct Best {
    value: f64,
    argmin: Vec<f64>,
    count: u64,
}

impl Best {
    fn empty() -> Self {
        Self { value: f64::INFINITY, argmin: Vec::new(), count: 0 }
    }

    fn offer(&mut self, value: f64, v: &[f64]) {
        let better = value < self.value
            || (value == self.value
                && v.iter().zip(&self.argmin).map(|(a, b)| a.total_cmp(b)).find(|o| o.is_ne())
                    == Some(std::cmp::Ordering::Less));
        if better {
            self.value = value;
            self.argmin.clear();
            self.argmin.extend_from_slice(v);
        }
    }

    fn merge(mut self, other: Best) -> Best {
        self.count += other.count;
        if other.argmin.is_empty() {
            return self;
        }
        if self.argmin.is_empty() {
            return Best { count: self.count, ..other };
        }
        self.offer(other.value, &other.argmin);
        self
    }
}

/// Evaluates `det(ΔXΔX^H)` incrementally while the trailing coordinates
/// sweep an odometer. Prefix sums per level keep rounding from drifting.
struct Sweep<'a> {
    n_t: usize,
    t: usize,
    weights: Vec<Vec<Complex64>>,
    levels: &'a [Vec<f64>],
}

impl Sweep<'_> {
    fn add_scaled(dst: &mut [Complex64], src: &[Complex64], w: &[Complex64], c: f64) {
        if c == 0.0 {
            dst.copy_from_slice(src);
        } else {
            for ((d, s), w) in dst.iter_mut().zip(src).zip(w) {
                *d = s + w * c;
            }
        }
    }

    fn det(&self, x: &[Complex64], gram: &mut [Complex64]) -> f64 {
        let (n, t) = (self.n_t, self.t);
        for i in 0..n {
            for j in i..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in 0..t {
                    acc += x[i * t + c] * x[j * t + c].conj();
                }
                gram[i * n + j] = acc;
                gram[j * n + i] = acc.conj();
            }
        }
        clean(det_c_in_place(gram, n).re)
    }

    /// Visits every vector whose first two coordinates are fixed at level
    /// indices `(i0, i1)`, keeping only the sign-canonical representative.
    fn stripe(&self, i0: usize, i1: usize) -> Best {
        let dim = self.levels.len();
        let size = self.n_t * self.t;
        let mut best = Best::empty();
        let mut v: Vec<f64> = vec![0.0; dim];
        v[0] = self.levels[0][i0];
        v[1] = self.levels[1][i1];
        if v[0] < 0.0 || (v[0] == 0.0 && v[1] < 0.0) {
            return best;
        }
        let lead_zero = v[0] == 0.0 && v[1] == 0.0;
        let mut prefix = vec![vec![Complex64::new(0.0, 0.0); size]; dim + 1];
        let zero = vec![Complex64::new(0.0, 0.0); size];
        {
            let (head, tail) = prefix.split_at_mut(1);
            Self::add_scaled(&mut head[0], &zero, &self.weights[0], v[0]);
            Self::add_scaled(&mut tail[0], &head[0], &self.weights[1], v[1]);
        }
        let mut idx = vec![0usize; dim];
        let mut gram = vec![Complex64::new(0.0, 0.0); self.n_t * self.n_t];
        let mut from = 2;
        loop {
            for l in from..dim {
                v[l] = self.levels[l][idx[l]];
                let (head, tail) = prefix.split_at_mut(l);
                Self::add_scaled(&mut tail[0], &head[l - 1], &self.weights[l], v[l]);
            }
            let canonical = !lead_zero || v[2..].iter().find(|&&x| x != 0.0).is_some_and(|&x| x > 0.0);
            if canonical {
                best.count += 1;
                let d = self.det(&prefix[dim - 1], &mut gram);
                best.offer(d, &v);
            }
            // Advance the odometer over coordinates 2..dim.
            let mut p = dim;
            loop {
                if p == 2 {
                    return best;
                }
                p -= 1;
                idx[p] += 1;
                if idx[p] < self.levels[p].len() {
                    break;
                }
                idx[p] = 0;
            }
            from = p;
        }
    }
}

fn search(code: &LinearStbc, levels: &[Vec<f64>]) -> Best {
    let sweep = Sweep {
        n_t: code.n_t(),
        t: code.t(),
        weights: code.weights().iter().map(|w| w.as_slice().to_vec()).collect(),
        levels,
    };
    let stripes: Vec<(usize, usize)> =
        (0..levels[0].len()).flat_map(|a| (0..levels[1].len()).map(move |b| (a, b))).collect();
    stripes.par_iter().map(|&(a, b)| sweep.stripe(a, b)).reduce(Best::empty, Best::merge)
}

fn check_cap(levels: &[Vec<f64>], cap: u128, hint: &str) -> Result<()> {
    let count = product_size(levels);
    if count > cap {
        return Err(Error::CapExceeded { count, cap, hint: hint.into() });
    }
    Ok(())
}

fn distinct_differences(set: &[f64]) -> Vec<f64> {
    let mut d: Vec<f64> = set.iter().flat_map(|a| set.iter().map(move |b| a - b)).collect();
    d.sort_by(f64::total_cmp);
    d.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(1.0));
    d
}

/// Exact minimum determinant of the finite code at PAM size `m`.
pub fn min_det_code(code: &LinearStbc, m: u32) -> Result<MinDetReport> {
    min_det_code_capped(code, m, tol::ENUMERATION_CAP)
}

pub fn min_det_code_capped(code: &LinearStbc, m: u32, cap: u128) -> Result<MinDetReport> {
    let levels: Vec<Vec<f64>> = match code.alphabet() {
        Alphabet::Pam => vec![pam(m)?.differences(); code.dim()],
        Alphabet::Explicit(sets) => sets.iter().map(|s| distinct_differences(s)).collect(),
    };
    check_cap(&levels, cap, "use an integer-box search with a small bound instead (--integer B)")?;
    let best = search(code, &levels);
    Ok(MinDetReport {
        code: code.name().to_string(),
        scope: SearchScope::Code,
        value: best.value,
        argmin: best.argmin,
        pam_size: matches!(code.alphabet(), Alphabet::Pam).then_some(m),
        search_bound: None,
        exhaustive: true,
        vectors_examined: best.count,
    })
}

/// Minimum of `det(XX^H)` over the integer design with `|s_i| <= b`.
pub fn min_det_z(code: &LinearStbc, b: u32) -> Result<MinDetReport> {
    min_det_z_capped(code, b, tol::ENUMERATION_CAP)
}

pub fn min_det_z_capped(code: &LinearStbc, b: u32, cap: u128) -> Result<MinDetReport> {
    if b == 0 {
        return Err(Error::InvalidArgument("integer bound must be at least 1".into()));
    }
    let bi = b as i64;
    let levels = vec![(-bi..=bi).map(|x| x as f64).collect::<Vec<_>>(); code.dim()];
    check_cap(&levels, cap, "lower the bound or request a randomized search")?;
    let best = search(code, &levels);
    Ok(MinDetReport {
        code: code.name().to_string(),
        scope: SearchScope::IntegerBox,
        value: best.value,
        argmin: best.argmin,
        pam_size: None,
        search_bound: Some(b),
        exhaustive: false,
        vectors_examined: best.count,
    })
}

/// Random nonzero integer vectors in the box `|s_i| <= b`.
pub fn min_det_z_random(code: &LinearStbc, b: u32, samples: u64, seed: u64) -> Result<MinDetReport> {
    if b == 0 || samples == 0 {
        return Err(Error::InvalidArgument("bound and sample count must be positive".into()));
    }
    let bi = b as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = Best::empty();
    let mut v = vec![0.0; code.dim()];
    while best.count < samples {
        for x in v.iter_mut() {
            *x = rng.random_range(-bi..=bi) as f64;
        }
        if v.iter().all(|&x| x == 0.0) {
            continue;
        }
        best.count += 1;
        best.offer(diff_det(code, &v)?, &v);
    }
    Ok(MinDetReport {
        code: code.name().to_string(),
        scope: SearchScope::RandomSample,
        value: best.value,
        argmin: best.argmin,
        pam_size: None,
        search_bound: Some(b),
        exhaustive: false,
        vectors_examined: best.count,
    })
}

/// Min-det of the finite code for each PAM size in `sizes`, plus the first
/// size after which the value no longer changes (relative 1e-9).
pub fn stabilization(code: &LinearStbc, sizes: &[u32]) -> Result<(Vec<(u32, f64)>, Option<u32>)> {
    let mut out = Vec::with_capacity(sizes.len());
    for &m in sizes {
        out.push((m, min_det_code(code, m)?.value));
    }
    let last = out.last().map(|p| p.1);
    let stable = last.and_then(|l| {
        let mut first = None;
        for &(m, v) in out.iter().rev() {
            if (v - l).abs() <= 1e-9 * l.abs().max(1e-300) {
                first = Some(m);
            } else {
                break;
            }
        }
        first
    });
    Ok((out, stable))
}

/// NVD constant of a PAM-alphabet code: PAM differences are twice an
/// integer vector, so every nonzero difference has
/// `det >= 4^{n_t} min_det_z(code, b)` inside the box.
pub fn pam_nvd_constant(code: &LinearStbc, b: u32) -> Result<(f64, MinDetReport)> {
    let rep = min_det_z(code, b)?;
    Ok((4f64.powi(code.n_t() as i32) * rep.value, rep))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// `det >= SNR^{n_t(1 - r/n_t)}`.
    Elia,
    /// `det >= SNR^{n_t(1 - r/n_min)}`.
    Enhanced,
}

impl std::str::FromStr for Criterion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "elia" => Ok(Criterion::Elia),
            "enhanced" => Ok(Criterion::Enhanced),
            _ => Err(Error::InvalidArgument(format!("unknown criterion '{s}'; expected elia or enhanced"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionVerdict {
    pub code: String,
    pub criterion: Criterion,
    pub n_t: usize,
    pub n_r: usize,
    pub r: f64,
    pub c0: f64,
    pub required_exponent: f64,
    /// `log(μ^{2n_t} c0) / log SNR` at each grid point.
    pub measured_exponents: Vec<f64>,
    /// Least-squares slope of `log(μ^{2n_t} c0)` against `log SNR` over the
    /// upper half of the grid.
    pub measured_slope: f64,
    pub pass: bool,
    /// Difference vector with vanishing determinant, when `c0 = 0`.
    pub witness: Option<Vec<f64>>,
}

/// Default grid for verdicts: wide enough that PAM-size rounding is
/// negligible in the slope.
pub fn criterion_grid_db() -> Vec<f64> {
    (0..=28).map(|i| 20.0 + 10.0 * i as f64).collect()
}

/// Compares the decay of the guaranteed determinant `μ^{2n_t} c0` with the
/// exponent demanded by `which`.
pub fn criterion_check(
    scheme: &SchemeConfig,
    n_r: usize,
    which: Criterion,
    c0: f64,
    witness: Option<Vec<f64>>,
) -> Result<CriterionVerdict> {
    if n_r == 0 {
        return Err(Error::InvalidArgument("n_r must be positive".into()));
    }
    let n_t = scheme.code.n_t();
    let n = match which {
        Criterion::Elia => n_t,
        Criterion::Enhanced => n_t.min(n_r),
    } as f64;
    let required = n_t as f64 * (1.0 - scheme.r / n);
    let mut verdict = CriterionVerdict {
        code: scheme.code.name().to_string(),
        criterion: which,
        n_t,
        n_r,
        r: scheme.r,
        c0,
        required_exponent: required,
        measured_exponents: Vec::new(),
        measured_slope: f64::NEG_INFINITY,
        pass: false,
        witness: None,
    };
    if !(c0 > tol::DET_ZERO) {
        verdict.witness = witness;
        return Ok(verdict);
    }
    let grid = &scheme.snr_grid_db;
    if grid.len() < 4 {
        return Err(Error::InsufficientData { have: grid.len(), need: 4 });
    }
    let mut xs = Vec::with_capacity(grid.len());
    let mut ys = Vec::with_capacity(grid.len());
    for &db in grid {
        let snr = db_to_linear(db);
        let mu = scheme.mu_at(snr);
        let y = 2.0 * n_t as f64 * mu.ln() + c0.ln();
        verdict.measured_exponents.push(y / snr.ln());
        xs.push(snr.ln());
        ys.push(y);
    }
    let half = grid.len() / 2;
    let fit = linear_fit(&xs[half..], &ys[half..])?;
    verdict.measured_slope = fit.slope;
    verdict.pass = fit.slope >= required - tol::EXPONENT_SLACK;
    Ok(verdict)
}
