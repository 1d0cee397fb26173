//! Quasi-static Rayleigh Monte-Carlo: codeword error rates, outage, slope
//! fits and the capacity and matrix-inequality checks.
//!
//! Every trial draws from its own ChaCha8 stream keyed by `(seed, stream)`
//! with the trial index as the stream selector, so results do not depend on
//! how trials are scheduled. Trials run in fixed-size batches; a stop rule is
//! only evaluated between batches.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decoder::{decode, from_generator, ColumnOrder, DecoderKind};
use crate::linalg::{check_realify, log2_det_spd, sym_eigvals, vec_realify, RMat};
use crate::stats::{linear_fit, wilson_interval, LineFit, Moments, Z95};
use crate::{db_to_linear, tol, CMat, Error, Result, SchemeConfig};

/// Trials per batch; also the granularity of the error-count stop rule.
pub const BATCH: u64 = 10_000;

/// Default error count at which a grid point stops.
pub const DEFAULT_ERROR_TARGET: u64 = 200;

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Independent stream for trial `trial` of stream `stream` (usually the SNR index).
pub fn trial_rng(seed: u64, stream: u64, trial: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut h = splitmix(seed ^ splitmix(stream));
    for chunk in key.chunks_exact_mut(8) {
        h = splitmix(h);
        chunk.copy_from_slice(&h.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial);
    rng
}

/// Circularly symmetric complex Gaussian with unit variance.
pub fn complex_gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// i.i.d. `CN(0, 1)` entries.
pub fn sample_channel(n_r: usize, n_t: usize, rng: &mut impl Rng) -> CMat {
    CMat::from_fn(n_r, n_t, |_, _| complex_gaussian(rng))
}

/// Haar-distributed unitary via Gram-Schmidt on a Gaussian matrix with the
/// phases of the implied `R` diagonal removed.
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> CMat {
    let a = sample_channel(n, n, rng);
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| (0..n).map(|i| a[(i, j)]).collect()).collect();
    for j in 0..n {
        for k in 0..j {
            let proj: Complex64 = (0..n).map(|i| cols[k][i].conj() * cols[j][i]).sum();
            for i in 0..n {
                let v = cols[k][i];
                cols[j][i] -= proj * v;
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in cols[j].iter_mut() {
            *z /= norm;
        }
    }
    CMat::from_fn(n, n, |i, j| cols[j][i])
}

/// Runs trials `0..max` in batches, folding each batch in trial order.
/// `stop` sees the running total after each batch.
fn batched<T, F, S>(seed: u64, stream: u64, max: u64, f: F, stop: S) -> Result<T>
where
    T: Send + Default,
    F: Fn(u64, &mut ChaCha8Rng) -> Result<T> + Sync,
    S: Fn(&T) -> bool,
    T: Merge,
{
    let mut total = T::default();
    let mut start = 0;
    while start < max {
        let end = (start + BATCH).min(max);
        let parts: Vec<Result<T>> = (start..end)
            .into_par_iter()
            .map(|i| {
                let mut rng = trial_rng(seed, stream, i);
                f(i, &mut rng)
            })
            .collect();
        for p in parts {
            total = total.merge(p?);
        }
        start = end;
        if stop(&total) {
            break;
        }
    }
    Ok(total)
}

trait Merge {
    fn merge(self, other: Self) -> Self;
}

#[derive(Debug, Clone, Copy, Default)]
struct Counts {
    trials: u64,
    errors: u64,
    fallbacks: u64,
    nodes: u64,
}

impl Merge for Counts {
    fn merge(self, o: Self) -> Self {
        Counts {
            trials: self.trials + o.trials,
            errors: self.errors + o.errors,
            fallbacks: self.fallbacks + o.fallbacks,
            nodes: self.nodes + o.nodes,
        }
    }
}

impl Merge for Moments {
    fn merge(self, o: Self) -> Self {
        Moments::merge(self, o)
    }
}

/// A Monte-Carlo error-probability run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimJob {
    pub scheme: SchemeConfig,
    pub n_r: usize,
    /// Trial budget per SNR point.
    pub max_trials: u64,
    /// Stop a point once this many errors are seen (checked per batch).
    pub error_target: Option<u64>,
    pub seed: u64,
    pub decoder: DecoderKind,
    pub column_order: ColumnOrder,
    /// Noise standard-deviation multiplier; 1 in normal use, 0 for a
    /// noiseless sanity run.
    pub noise_scale: f64,
}

impl SimJob {
    pub fn new(scheme: SchemeConfig, n_r: usize, max_trials: u64, seed: u64) -> Self {
        Self {
            scheme,
            n_r,
            max_trials,
            error_target: Some(DEFAULT_ERROR_TARGET),
            seed,
            decoder: DecoderKind::Sphere,
            column_order: ColumnOrder::Natural,
            noise_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrPoint {
    pub snr_db: f64,
    pub pam_size: u64,
    pub trials: u64,
    pub errors: u64,
    pub pe: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Sphere requests answered by exhaustive search on rank-deficient channels.
    pub fallbacks: u64,
    pub mean_nodes: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimStats {
    pub points: Vec<SnrPoint>,
}

impl SimStats {
    pub fn snr_db(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.snr_db).collect()
    }

    pub fn pe(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.pe).collect()
    }

    /// See [`dmt_slope`].
    pub fn slope(&self, window: f64) -> Result<LineFit> {
        dmt_slope(&self.snr_db(), &self.pe(), window)
    }
}

/// Codeword error probability at every grid point of the job's scheme.
pub fn error_probability(job: &SimJob) -> Result<SimStats> {
    if job.max_trials == 0 {
        return Err(Error::InvalidArgument("trial budget must be at least 1".into()));
    }
    if job.n_r == 0 {
        return Err(Error::InvalidArgument("n_r must be positive".into()));
    }
    let code = &job.scheme.code;
    let g = code.generator_matrix().g;
    let (n_t, t) = (code.n_t(), code.t());
    let mut points = Vec::with_capacity(job.scheme.snr_grid_db.len());
    for (idx, &snr_db) in job.scheme.snr_grid_db.iter().enumerate() {
        let snr = db_to_linear(snr_db);
        let m = job.scheme.m_at(snr);
        let m32 =
            u32::try_from(m).map_err(|_| Error::InvalidArgument(format!("PAM size {m} is too large to simulate")))?;
        let sets = code.coord_sets(m32)?;
        let mu = job.scheme.mu_at(snr);
        let trial = |_: u64, rng: &mut ChaCha8Rng| -> Result<Counts> {
            let h = sample_channel(job.n_r, n_t, rng);
            let s: Vec<f64> = sets.iter().map(|set| set[rng.random_range(0..set.len())]).collect();
            let x = code.encode(&s, mu)?;
            let mut y = h.mul(&x)?;
            for i in 0..job.n_r {
                for j in 0..t {
                    let n = complex_gaussian(rng);
                    y[(i, j)] += n * job.noise_scale;
                }
            }
            let yv = vec_realify(&y.vec());
            let eq = from_generator(&h, &g, t, mu, job.column_order)?;
            let (res, fell_back) = decode(&yv, &eq, &sets, job.decoder)?;
            Ok(Counts {
                trials: 1,
                errors: (res.s_hat != s) as u64,
                fallbacks: fell_back as u64,
                nodes: res.nodes_visited,
            })
        };
        let target = job.error_target;
        let c =
            batched(job.seed, idx as u64, job.max_trials, trial, |c: &Counts| target.is_some_and(|e| c.errors >= e))?;
        let (ci_lo, ci_hi) = wilson_interval(c.errors, c.trials, Z95);
        points.push(SnrPoint {
            snr_db,
            pam_size: m,
            trials: c.trials,
            errors: c.errors,
            pe: c.errors as f64 / c.trials as f64,
            ci_lo,
            ci_hi,
            fallbacks: c.fallbacks,
            mean_nodes: c.nodes as f64 / c.trials as f64,
        });
    }
    Ok(SimStats { points })
}

/// Least-squares slope of `-log10 p` against `log10 SNR` over the top
/// `window` fraction of the grid, skipping points with `p = 0`.
pub fn dmt_slope(snr_db: &[f64], p: &[f64], window: f64) -> Result<LineFit> {
    if snr_db.len() != p.len() {
        return Err(Error::Dimension("SNR and probability lists differ in length".into()));
    }
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::InvalidArgument(format!("window must be in (0, 1], got {window}")));
    }
    let n = snr_db.len();
    let keep = ((n as f64) * window).ceil() as usize;
    let (xs, ys): (Vec<f64>, Vec<f64>) = snr_db[n - keep..]
        .iter()
        .zip(&p[n - keep..])
        .filter(|(_, &q)| q > 0.0)
        .map(|(&db, &q)| (db / 10.0, -q.log10()))
        .unzip();
    if xs.len() < 3 {
        return Err(Error::InsufficientData { have: xs.len(), need: 3 });
    }
    linear_fit(&xs, &ys)
}

/// `log2 det(I + (snr/n_t) H H^H)`.
pub fn mutual_information(h: &CMat, snr: f64) -> f64 {
    let n_t = h.cols() as f64;
    let mut a = h.gram().scale(Complex64::new(snr / n_t, 0.0));
    for i in 0..h.rows() {
        a[(i, i)] += 1.0;
    }
    // The realified matrix has determinant |det A|^2.
    0.5 * log2_det_spd(&check_realify(&a)).expect("I + c HH^H is positive definite")
}

/// Target rate `R(SNR) = r log2 SNR + offset` in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSchedule {
    pub r: f64,
    pub offset_bits: f64,
}

impl RateSchedule {
    pub fn bits(&self, snr: f64) -> f64 {
        self.r * snr.log2() + self.offset_bits
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutageMethod {
    MonteCarlo,
    ImportanceSampling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutagePoint {
    pub snr_db: f64,
    pub rate_bits: f64,
    pub method: OutageMethod,
    pub trials: u64,
    /// Outage count for plain Monte-Carlo; proposal-side hits for importance sampling.
    pub hits: u64,
    pub p: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Fraction of channels with `log2 det(I + (snr/n_t) HH^H) <= R`.
pub fn outage_probability(
    n_t: usize,
    n_r: usize,
    rate: RateSchedule,
    snr_db: f64,
    trials: u64,
    seed: u64,
    stream: u64,
) -> Result<OutagePoint> {
    if trials == 0 || n_t == 0 || n_r == 0 {
        return Err(Error::InvalidArgument("trials, n_t and n_r must be positive".into()));
    }
    let snr = db_to_linear(snr_db);
    let bits = rate.bits(snr);
    let c = batched(
        seed,
        stream,
        trials,
        |_, rng| {
            let h = sample_channel(n_r, n_t, rng);
            Ok(Counts { trials: 1, errors: (mutual_information(&h, snr) <= bits) as u64, ..Counts::default() })
        },
        |_| false,
    )?;
    let (ci_lo, ci_hi) = wilson_interval(c.errors, c.trials, Z95);
    Ok(OutagePoint {
        snr_db,
        rate_bits: bits,
        method: OutageMethod::MonteCarlo,
        trials: c.trials,
        hits: c.errors,
        p: c.errors as f64 / c.trials as f64,
        ci_lo,
        ci_hi,
    })
}

/// Importance-sampling outage estimate for small probabilities.
///
/// Entries are drawn from `CN(0, v)` with `v = n_t / snr` (capped at 1), and
/// each outage hit is weighted by the likelihood ratio
/// `Π v exp(-|h|^2 (1 - 1/v))`. The interval is the normal one on the
/// weighted mean.
pub fn outage_probability_is(
    n_t: usize,
    n_r: usize,
    rate: RateSchedule,
    snr_db: f64,
    trials: u64,
    seed: u64,
    stream: u64,
) -> Result<OutagePoint> {
    if trials == 0 || n_t == 0 || n_r == 0 {
        return Err(Error::InvalidArgument("trials, n_t and n_r must be positive".into()));
    }
    let snr = db_to_linear(snr_db);
    let bits = rate.bits(snr);
    let v = (n_t as f64 / snr).min(1.0);
    let sd = v.sqrt();
    let (hits, m) = batched(
        seed,
        stream,
        trials,
        |_, rng| {
            let mut log_w = 0.0;
            let h = CMat::from_fn(n_r, n_t, |_, _| {
                let z = complex_gaussian(rng) * sd;
                log_w += v.ln() - z.norm_sqr() * (1.0 - 1.0 / v);
                z
            });
            let mut mom = Moments::default();
            let out = mutual_information(&h, snr) <= bits;
            mom.push(if out { log_w.exp() } else { 0.0 });
            Ok((out as u64, mom))
        },
        |_| false,
    )?;
    let half = Z95 * m.stderr();
    Ok(OutagePoint {
        snr_db,
        rate_bits: bits,
        method: OutageMethod::ImportanceSampling,
        trials,
        hits,
        p: m.mean,
        ci_lo: (m.mean - half).max(0.0),
        ci_hi: (m.mean + half).min(1.0),
    })
}

impl Merge for (u64, Moments) {
    fn merge(self, o: Self) -> Self {
        (self.0 + o.0, self.1.merge(o.1))
    }
}

/// `1 - exp(-(2^R - 1) n_t / snr)` for a single receive antenna and `n_t = 1`.
pub fn siso_outage(rate_bits: f64, snr: f64) -> f64 {
    -(-(2f64.powf(rate_bits) - 1.0) / snr).exp_m1()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityBound {
    pub lhs: f64,
    pub lhs_stderr: f64,
    pub rhs: f64,
    /// Number of nonzero eigenvalues of `G^T G`, i.e. of log terms in `rhs`.
    pub rhs_terms: usize,
    pub pass: bool,
}

/// Compares the Monte-Carlo mutual information of the real-equivalent
/// channel with Gaussian input `Q = (α snr / 2k) I` against the
/// eigenvalue bound `(1/2T) Σ log2(1 + α n_r d_i snr)`.
pub fn capacity_bound_check(
    g: &RMat,
    t: usize,
    n_r: usize,
    alpha: f64,
    snr: f64,
    trials: u64,
    seed: u64,
) -> Result<CapacityBound> {
    if !(alpha > 0.0) || trials == 0 || t == 0 || n_r == 0 {
        return Err(Error::InvalidArgument("alpha, trials, T and n_r must be positive".into()));
    }
    let rows = g.rows();
    if !rows.is_multiple_of(2 * t) {
        return Err(Error::Dimension(format!("generator has {rows} rows, not a multiple of 2T = {}", 2 * t)));
    }
    let n_t = rows / (2 * t);
    let two_k = g.cols();
    let q = alpha * snr / two_k as f64;
    let gtg = g.transpose().mul(g)?;
    let ev = sym_eigvals(&gtg)?;
    let scale = ev.first().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let nonzero: Vec<f64> = ev.into_iter().filter(|&d| d > tol::RANK * scale).collect();
    let rhs = nonzero.iter().map(|d| (1.0 + alpha * n_r as f64 * d * snr).log2()).sum::<f64>() / (2 * t) as f64;
    let (_, m) = batched(
        seed,
        0,
        trials,
        |_, rng| {
            let h = sample_channel(n_r, n_t, rng);
            let hg = check_realify(&h).kron_identity(t).mul(g)?;
            let mut a = hg.transpose().mul(&hg)?.scale(q);
            for i in 0..two_k {
                a[(i, i)] += 1.0;
            }
            let mut mom = Moments::default();
            mom.push(log2_det_spd(&a)? / (2 * t) as f64);
            Ok((0u64, mom))
        },
        |_| false,
    )?;
    let lhs_stderr = m.stderr();
    Ok(CapacityBound { lhs: m.mean, lhs_stderr, rhs, rhs_terms: nonzero.len(), pass: m.mean <= rhs + 3.0 * lhs_stderr })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub trials: u64,
    pub violations: u64,
    /// Largest amount by which the inequality failed (0 if it never did).
    pub worst: f64,
}

impl Merge for InequalityReport {
    fn merge(self, o: Self) -> Self {
        InequalityReport {
            trials: self.trials + o.trials,
            violations: self.violations + o.violations,
            worst: self.worst.max(o.worst),
        }
    }
}

impl Default for InequalityReport {
    fn default() -> Self {
        InequalityReport { trials: 0, violations: 0, worst: 0.0 }
    }
}

fn inequality<F>(n_t: usize, n_r: usize, trials: u64, seed: u64, slack: f64, gap: F) -> Result<InequalityReport>
where
    F: Fn(&CMat) -> f64 + Sync,
{
    batched(
        seed,
        0,
        trials,
        |_, rng| {
            let h = sample_channel(n_r, n_t, rng);
            // `gap` is rhs - lhs of an inequality lhs <= rhs.
            let g = gap(&h);
            Ok(InequalityReport { trials: 1, violations: (g < -slack) as u64, worst: (-g).max(0.0) })
        },
        |_| false,
    )
}

/// `log det(I + (snr/n_t) HH^H) <= Σ_i log(1 + (snr/n_t) ||h_i||^2)` over rows `h_i`.
pub fn hadamard_check(
    n_t: usize,
    n_r: usize,
    snr: f64,
    trials: u64,
    seed: u64,
    slack: f64,
) -> Result<InequalityReport> {
    inequality(n_t, n_r, trials, seed, slack, |h| {
        let c = snr / n_t as f64;
        let rhs: f64 =
            (0..h.rows()).map(|i| (1.0 + c * (0..h.cols()).map(|j| h[(i, j)].norm_sqr()).sum::<f64>()).log2()).sum();
        rhs - mutual_information(h, snr)
    })
}

/// `Σ_i log((1/n_t) Σ_j (1 + snr |h_ij|^2)) >= (1/n_t) Σ_i Σ_j log(1 + snr |h_ij|^2)`.
pub fn jensen_check(n_t: usize, n_r: usize, snr: f64, trials: u64, seed: u64, slack: f64) -> Result<InequalityReport> {
    inequality(n_t, n_r, trials, seed, slack, |h| {
        let mut big = 0.0;
        let mut small = 0.0;
        for i in 0..h.rows() {
            let terms: Vec<f64> = (0..h.cols()).map(|j| 1.0 + snr * h[(i, j)].norm_sqr()).collect();
            big += (terms.iter().sum::<f64>() / n_t as f64).log2();
            small += terms.iter().map(|x| x.log2()).sum::<f64>() / n_t as f64;
        }
        big - small
    })
}

/// Fraction of draws where `H` and `HU` (random unitary `U`) agree on
/// membership in `{Σ_ij log(1 + snr |h_ij|^2) > n_t r log snr}`.
pub fn rotation_agreement(n_t: usize, n_r: usize, r: f64, snr_db: f64, trials: u64, seed: u64) -> Result<f64> {
    let snr = db_to_linear(snr_db);
    let threshold = n_t as f64 * r * snr.log2();
    let inside = |h: &CMat| {
        let s: f64 = h.as_slice().iter().map(|z| (1.0 + snr * z.norm_sqr()).log2()).sum();
        s > threshold
    };
    let c = batched(
        seed,
        0,
        trials,
        |_, rng| {
            let h = sample_channel(n_r, n_t, rng);
            let u = random_unitary(n_t, rng);
            let hu = h.mul(&u)?;
            Ok(Counts { trials: 1, errors: (inside(&h) == inside(&hu)) as u64, ..Counts::default() })
        },
        |_| false,
    )?;
    Ok(c.errors as f64 / c.trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stbc::{alamouti, scheme};

    #[test]
    fn channel_moments() {
        let mut s = Moments::default();
        let mut re = Moments::default();
        let mut im = Moments::default();
        for i in 0..100_000u64 {
            let mut rng = trial_rng(1, 0, i);
            let h = complex_gaussian(&mut rng);
            s.push(h.norm_sqr());
            re.push(h.re);
            im.push(h.im);
        }
        assert!((s.mean - 1.0).abs() < 0.02);
        assert!(re.mean.abs() < 0.02 && im.mean.abs() < 0.02);
        let mut a = trial_rng(9, 2, 3);
        let mut b = trial_rng(9, 2, 3);
        assert_eq!(sample_channel(2, 2, &mut a), sample_channel(2, 2, &mut b));
        let mut c = trial_rng(9, 2, 4);
        assert_ne!(sample_channel(2, 2, &mut trial_rng(9, 2, 3)), sample_channel(2, 2, &mut c));
    }

    #[test]
    fn unitary_is_unitary() {
        let mut rng = trial_rng(4, 0, 0);
        let u = random_unitary(4, &mut rng);
        let g = u.gram();
        assert!(g.max_abs_diff(&CMat::identity(4)) < 1e-12);
    }

    #[test]
    fn noiseless_runs_have_no_errors() {
        let s = scheme(alamouti(), 0.0, vec![0.0, 10.0]).unwrap();
        let mut job = SimJob::new(s, 1, 2_000, 5);
        job.noise_scale = 0.0;
        let st = error_probability(&job).unwrap();
        assert!(st.points.iter().all(|p| p.errors == 0 && p.trials == 2_000));
    }

    #[test]
    fn error_runs_are_reproducible_and_stop_early() {
        let s = scheme(alamouti(), 0.0, vec![0.0, 6.0]).unwrap();
        let job = SimJob::new(s, 1, 100_000, 17);
        let a = error_probability(&job).unwrap();
        let b = error_probability(&job).unwrap();
        assert_eq!(a, b);
        // Pe is large at 0 dB, so the first batch already exceeds 200 errors.
        assert_eq!(a.points[0].trials, BATCH);
        for p in &a.points {
            assert!(p.ci_lo <= p.pe && p.pe <= p.ci_hi);
        }
    }

    #[test]
    fn synthetic_slopes() {
        let db: Vec<f64> = (0..8).map(|i| 10.0 + 3.0 * i as f64).collect();
        let p: Vec<f64> = db.iter().map(|d| db_to_linear(*d).powf(-3.0)).collect();
        let f = dmt_slope(&db, &p, 1.0).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-9);
        let mut rng = trial_rng(2, 0, 0);
        let noisy: Vec<f64> =
            db.iter().map(|d| 0.3 * db_to_linear(*d).powf(-2.0) * (1.0 + 0.05 * rng.random_range(-1.0..1.0))).collect();
        let f = dmt_slope(&db, &noisy, 1.0).unwrap();
        assert!((f.slope - 2.0).abs() < 0.15);
        assert!(matches!(dmt_slope(&db, &[0.0; 8], 1.0), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn siso_outage_matches_closed_form() {
        let rate = RateSchedule { r: 0.0, offset_bits: 1.0 };
        for (i, db) in [0.0, 5.0, 10.0].into_iter().enumerate() {
            let o = outage_probability(1, 1, rate, db, 200_000, 8, i as u64).unwrap();
            let exact = siso_outage(1.0, db_to_linear(db));
            assert!(o.ci_lo <= exact && exact <= o.ci_hi, "{db} dB: {exact} not in [{}, {}]", o.ci_lo, o.ci_hi);
            let is = outage_probability_is(1, 1, rate, db + 20.0, 100_000, 8, i as u64).unwrap();
            let exact = siso_outage(1.0, db_to_linear(db + 20.0));
            assert!(is.ci_lo <= exact && exact <= is.ci_hi, "IS {}: {exact} vs {:?}", db + 20.0, is);
        }
        let low = outage_probability(2, 2, rate, -30.0, 1000, 1, 0).unwrap();
        assert_eq!(low.p, 1.0);
    }

    #[test]
    fn importance_sampling_agrees_with_plain_mc() {
        let rate = RateSchedule { r: 0.0, offset_bits: 1.0 };
        let mc = outage_probability(2, 2, rate, 10.0, 400_000, 3, 0).unwrap();
        let is = outage_probability_is(2, 2, rate, 10.0, 400_000, 3, 1).unwrap();
        assert!(is.ci_lo <= mc.ci_hi && mc.ci_lo <= is.ci_hi, "{mc:?} {is:?}");
    }

    #[test]
    fn capacity_bound_on_orthogonal_generator() {
        let g = alamouti().generator_matrix().g;
        let b = capacity_bound_check(&g, 2, 1, 1.0, 100.0, 20_000, 1).unwrap();
        assert!(b.pass, "{b:?}");
        assert_eq!(b.rhs_terms, 4);
        let tiny = capacity_bound_check(&g, 2, 1, 1.0, 1e-9, 1000, 1).unwrap();
        assert!(tiny.lhs < 1e-8 && tiny.rhs < 1e-8);
        let p = crate::stbc::golden_punctured().generator_matrix().g;
        assert_eq!(capacity_bound_check(&p, 2, 2, 1.0, 100.0, 1000, 1).unwrap().rhs_terms, 4);
    }

    #[test]
    fn matrix_inequalities() {
        let h = hadamard_check(2, 2, 100.0, 20_000, 1, 1e-12).unwrap();
        assert_eq!(h.violations, 0);
        let j = jensen_check(3, 2, 100.0, 20_000, 1, 1e-12).unwrap();
        assert_eq!(j.violations, 0);
    }
}
