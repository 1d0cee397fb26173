//! Linear space-time block codes.
//!
//! A linear STBC with `k` complex symbols over `n_t` antennas and `T` channel
//! uses is the real-linear span
//!
//! ```text
//! X = Σ_i (s_iI A_iI + s_iQ A_iQ)
//! ```
//!
//! of `2k` complex `n_t x T` weight matrices. The real symbol vector is
//! interleaved as `[s_1I, s_1Q, ..., s_kI, s_kQ]`, and the generator matrix
//! `G` has column `i` equal to `vec_realify(vec(weight_i))`, so that
//! `vec_realify(vec(X)) = G s`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constellations::{pam, pam_mean, pam_variance};
use crate::linalg::{vec_realify, CMat, RMat};
use crate::{db_to_linear, tol, Error, Result};

/// Where each real coordinate of the symbol vector takes its values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alphabet {
    /// Every coordinate is drawn from the regular M-PAM set; `M` is chosen
    /// per use (scheme schedule, min-det search, decoder).
    Pam,
    /// Fixed finite sets, one per real coordinate.
    Explicit(Vec<Vec<f64>>),
}

/// A linear STBC given by its weight matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StbcRecord", into = "StbcRecord")]
pub struct LinearStbc {
    name: String,
    n_t: usize,
    t: usize,
    weights: Vec<CMat>,
    alphabet: Alphabet,
}

/// Serialized form of a [`LinearStbc`]: weights as flat row-major real and
/// imaginary arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StbcRecord {
    pub name: String,
    pub n_t: usize,
    pub t: usize,
    pub k: usize,
    pub weights: Vec<WeightRecord>,
    pub alphabet: Alphabet,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightRecord {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<LinearStbc> for StbcRecord {
    fn from(c: LinearStbc) -> Self {
        let k = c.k();
        StbcRecord {
            name: c.name,
            n_t: c.n_t,
            t: c.t,
            k,
            weights: c
                .weights
                .iter()
                .map(|w| WeightRecord {
                    re: w.as_slice().iter().map(|z| z.re).collect(),
                    im: w.as_slice().iter().map(|z| z.im).collect(),
                })
                .collect(),
            alphabet: c.alphabet,
        }
    }
}

impl TryFrom<StbcRecord> for LinearStbc {
    type Error = Error;

    fn try_from(r: StbcRecord) -> Result<Self> {
        if r.weights.len() != 2 * r.k {
            return Err(Error::InvalidArgument(format!("{} weights recorded for k = {}", r.weights.len(), r.k)));
        }
        let weights = r
            .weights
            .into_iter()
            .map(|w| {
                if w.re.len() != w.im.len() {
                    return Err(Error::Dimension("real and imaginary parts differ in length".into()));
                }
                let data = w.re.into_iter().zip(w.im).map(|(a, b)| Complex64::new(a, b)).collect();
                CMat::new(r.n_t, r.t, data)
            })
            .collect::<Result<Vec<_>>>()?;
        LinearStbc::new(r.name, r.n_t, r.t, weights, r.alphabet)
    }
}

/// The real `2 T n_t x 2k` generator matrix together with its rank.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorMatrix {
    pub g: RMat,
    pub rank: usize,
}

/// Code rate in complex dimensions per channel use, `rank(G) / 2T`, kept exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CodeRate {
    pub num: usize,
    pub den: usize,
}

impl CodeRate {
    fn reduced(num: usize, den: usize) -> Self {
        let (mut a, mut b) = (num, den);
        while b != 0 {
            (a, b) = (b, a % b);
        }
        let g = a.max(1);
        CodeRate { num: num / g, den: den / g }
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for CodeRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl LinearStbc {
    /// Validates shapes: an even, non-zero number of `n_t x T` weights.
    pub fn new(name: impl Into<String>, n_t: usize, t: usize, weights: Vec<CMat>, alphabet: Alphabet) -> Result<Self> {
        if n_t == 0 || t == 0 {
            return Err(Error::Dimension("n_t and T must be positive".into()));
        }
        if weights.is_empty() || !weights.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("expected 2k weight matrices, got {}", weights.len())));
        }
        if let Some(w) = weights.iter().find(|w| w.rows() != n_t || w.cols() != t) {
            return Err(Error::Dimension(format!("weight is {}x{}, expected {n_t}x{t}", w.rows(), w.cols())));
        }
        if let Alphabet::Explicit(sets) = &alphabet {
            if sets.len() != weights.len() || sets.iter().any(Vec::is_empty) {
                return Err(Error::InvalidArgument(
                    "explicit alphabet needs one non-empty set per real coordinate".into(),
                ));
            }
        }
        Ok(Self { name: name.into(), n_t, t, weights, alphabet })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    /// Block length in channel uses.
    pub fn t(&self) -> usize {
        self.t
    }

    /// Number of complex symbols.
    pub fn k(&self) -> usize {
        self.weights.len() / 2
    }

    /// Number of real symbols, `2k`.
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Weights in interleaved order `A_1I, A_1Q, A_2I, ...`.
    pub fn weights(&self) -> &[CMat] {
        &self.weights
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Per-coordinate symbol sets, ascending. `m` selects the PAM size when
    /// the alphabet is PAM and is ignored otherwise.
    pub fn coord_sets(&self, m: u32) -> Result<Vec<Vec<f64>>> {
        match &self.alphabet {
            Alphabet::Pam => {
                let p = pam(m)?;
                Ok(vec![p.points().to_vec(); self.dim()])
            }
            Alphabet::Explicit(sets) => Ok(sets
                .iter()
                .map(|s| {
                    let mut s = s.clone();
                    s.sort_by(f64::total_cmp);
                    s
                })
                .collect()),
        }
    }

    pub fn generator_matrix(&self) -> GeneratorMatrix {
        let cols: Vec<Vec<f64>> = self.weights.iter().map(|w| vec_realify(&w.vec())).collect();
        let g = RMat::from_columns(&cols).expect("weights share one shape");
        let rank = g.rank();
        GeneratorMatrix { g, rank }
    }

    /// `rank(G) / 2T` complex dimensions per channel use.
    pub fn code_rate(&self) -> CodeRate {
        CodeRate::reduced(self.generator_matrix().rank, 2 * self.t)
    }

    /// `mu * Σ s_i W_i`.
    pub fn encode(&self, s: &[f64], mu: f64) -> Result<CMat> {
        if s.len() != self.dim() {
            return Err(Error::Dimension(format!("symbol vector has length {}, expected {}", s.len(), self.dim())));
        }
        let mut x = CMat::zeros(self.n_t, self.t);
        for (w, &si) in self.weights.iter().zip(s) {
            if si != 0.0 {
                x.axpy(si * mu, w);
            }
        }
        Ok(x)
    }

    /// Keeps the complex symbols listed in `keep` (0-based), both the I and Q
    /// weights of each.
    pub fn puncture(&self, keep: &[usize]) -> Result<LinearStbc> {
        if keep.is_empty() {
            return Err(Error::InvalidArgument("puncturing set is empty".into()));
        }
        let mut idx = keep.to_vec();
        idx.sort_unstable();
        idx.dedup();
        if idx.len() != keep.len() {
            return Err(Error::InvalidArgument("puncturing set has repeated indices".into()));
        }
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.k()) {
            return Err(Error::InvalidArgument(format!("symbol index {bad} out of range for k = {}", self.k())));
        }
        let weights =
            idx.iter().flat_map(|&i| [self.weights[2 * i].clone(), self.weights[2 * i + 1].clone()]).collect();
        let alphabet = match &self.alphabet {
            Alphabet::Pam => Alphabet::Pam,
            Alphabet::Explicit(sets) => {
                Alphabet::Explicit(idx.iter().flat_map(|&i| [sets[2 * i].clone(), sets[2 * i + 1].clone()]).collect())
            }
        };
        let name = format!("{}_punctured", self.name);
        LinearStbc::new(name, self.n_t, self.t, weights, alphabet)
    }

    /// Re-expresses the code with generator `G G_L`: weight `j` becomes
    /// `Σ_i (G_L)_{ij} W_i`. Symbols then live on the integer lattice, so the
    /// result carries a PAM alphabet.
    pub fn lattice_rebase(&self, g_l: &RMat) -> Result<LinearStbc> {
        let n = self.dim();
        if g_l.rows() != n || g_l.cols() != n {
            return Err(Error::Dimension(format!("lattice generator must be {n}x{n}")));
        }
        let rank = g_l.rank();
        if rank < n {
            return Err(Error::RankDeficient { rank, needed: n });
        }
        let weights = (0..n)
            .map(|j| {
                let mut w = CMat::zeros(self.n_t, self.t);
                for (i, wi) in self.weights.iter().enumerate() {
                    let c = g_l[(i, j)];
                    if c != 0.0 {
                        w.axpy(c, wi);
                    }
                }
                w
            })
            .collect();
        LinearStbc::new(self.name.clone(), self.n_t, self.t, weights, Alphabet::Pam)
    }

    /// First and second moments of each real coordinate under uniform symbols.
    fn coord_moments(&self, m: u64) -> Vec<(f64, f64)> {
        match &self.alphabet {
            Alphabet::Pam => {
                let mean = pam_mean(m);
                vec![(mean, pam_variance(m) + mean * mean); self.dim()]
            }
            Alphabet::Explicit(sets) => sets
                .iter()
                .map(|s| {
                    let n = s.len() as f64;
                    (s.iter().sum::<f64>() / n, s.iter().map(|x| x * x).sum::<f64>() / n)
                })
                .collect(),
        }
    }

    /// `E ||G s||^2` for independent uniform coordinates (unnormalized code).
    pub fn mean_energy(&self, m: u64) -> f64 {
        let g = self.generator_matrix().g;
        let gram = g.transpose().mul(&g).expect("conformable");
        let mom = self.coord_moments(m);
        let mut e = 0.0;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let second = if i == j { mom[i].1 } else { mom[i].0 * mom[j].0 };
                e += gram[(i, j)] * second;
            }
        }
        e
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cmat(rows: usize, cols: usize, entries: &[Complex64]) -> CMat {
    CMat::new(rows, cols, entries.to_vec()).expect("static weight shape")
}

/// Alamouti code `[[x1, -x2*], [x2, x1*]]`.
pub fn alamouti() -> LinearStbc {
    let z = c(0.0, 0.0);
    let weights = vec![
        cmat(2, 2, &[c(1.0, 0.0), z, z, c(1.0, 0.0)]),
        cmat(2, 2, &[c(0.0, 1.0), z, z, c(0.0, -1.0)]),
        cmat(2, 2, &[z, c(-1.0, 0.0), c(1.0, 0.0), z]),
        cmat(2, 2, &[z, c(0.0, 1.0), c(0.0, 1.0), z]),
    ];
    LinearStbc::new("alamouti", 2, 2, weights, Alphabet::Pam).expect("valid")
}

/// Golden ratio `θ = (1 + √5) / 2` and its conjugate `θ̄ = (1 - √5) / 2`.
pub fn golden_theta() -> (f64, f64) {
    let r5 = 5f64.sqrt();
    ((1.0 + r5) / 2.0, (1.0 - r5) / 2.0)
}

/// Golden code (without the `1/√5` normalization):
///
/// ```text
/// [ α(s1 + s2 θ)      α(s3 + s4 θ)  ]
/// [ jᾱ(s3 + s4 θ̄)    ᾱ(s1 + s2 θ̄) ]
/// ```
///
/// with `α = 1 + jθ̄` and `ᾱ = 1 + jθ`.
pub fn golden() -> LinearStbc {
    let (th, thb) = golden_theta();
    let a = c(1.0, thb);
    let ab = c(1.0, th);
    let z = c(0.0, 0.0);
    let j = c(0.0, 1.0);
    let diag = |u: f64, v: f64| cmat(2, 2, &[a * u, z, z, ab * v]);
    let anti = |u: f64, v: f64| cmat(2, 2, &[z, a * u, j * ab * v, z]);
    let base = [diag(1.0, 1.0), diag(th, thb), anti(1.0, 1.0), anti(th, thb)];
    let weights = base.iter().flat_map(|w| [w.clone(), w.scale(j)]).collect();
    LinearStbc::new("golden", 2, 2, weights, Alphabet::Pam).expect("valid")
}

/// Golden code restricted to its diagonal symbols `s1, s2`.
pub fn golden_punctured() -> LinearStbc {
    golden().puncture(&[0, 1]).expect("valid indices").with_name("golden_punctured")
}

/// Rotation angle `½ tan⁻¹ 2` used by the coordinate-interleaved designs.
pub fn ciod_angle() -> f64 {
    0.5 * 2f64.atan()
}

/// Folds a QAM rotation into the weights: `A'_I = cosθ A_I + sinθ A_Q`,
/// `A'_Q = -sinθ A_I + cosθ A_Q`, so the coordinates become plain PAM.
fn fold_rotation(raw: &[CMat], theta: f64) -> Vec<CMat> {
    let (s, co) = theta.sin_cos();
    raw.chunks_exact(2)
        .flat_map(|p| {
            let mut wi = p[0].scale(c(co, 0.0));
            wi.axpy(s, &p[1]);
            let mut wq = p[1].scale(c(co, 0.0));
            wq.axpy(-s, &p[0]);
            [wi, wq]
        })
        .collect()
}

/// Two-antenna coordinate-interleaved design
/// `diag(x1I + j x2Q, x2I + j x1Q)` over `e^{jθ}`-rotated QAM.
pub fn ciod2_with_angle(theta: f64) -> LinearStbc {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let j = c(0.0, 1.0);
    let raw = [
        cmat(2, 2, &[one, z, z, z]),
        cmat(2, 2, &[z, z, z, j]),
        cmat(2, 2, &[z, z, z, one]),
        cmat(2, 2, &[j, z, z, z]),
    ];
    LinearStbc::new("ciod2", 2, 2, fold_rotation(&raw, theta), Alphabet::Pam).expect("valid")
}

pub fn ciod2() -> LinearStbc {
    ciod2_with_angle(ciod_angle())
}

/// Four-antenna coordinate-interleaved design
///
/// ```text
/// [ x1I + j x3Q    x2I + j x4Q    0              0           ]
/// [ -x2I + j x4Q   x1I - j x3Q    0              0           ]
/// [ 0              0              x3I + j x1Q    x4I + j x2Q ]
/// [ 0              0              -x4I + j x2Q   x3I - j x1Q ]
/// ```
///
/// with `x_i` from `e^{jθ}`-rotated QAM, stored with the rotation folded into
/// the weights.
pub fn ciod4_with_angle(theta: f64) -> LinearStbc {
    let entry = |cells: &[(usize, usize, Complex64)]| {
        let mut m = CMat::zeros(4, 4);
        for &(r, col, v) in cells {
            m[(r, col)] = v;
        }
        m
    };
    let one = c(1.0, 0.0);
    let j = c(0.0, 1.0);
    let raw = [
        // x1I, x1Q
        entry(&[(0, 0, one), (1, 1, one)]),
        entry(&[(2, 2, j), (3, 3, -j)]),
        // x2I, x2Q
        entry(&[(0, 1, one), (1, 0, -one)]),
        entry(&[(2, 3, j), (3, 2, j)]),
        // x3I, x3Q
        entry(&[(2, 2, one), (3, 3, one)]),
        entry(&[(0, 0, j), (1, 1, -j)]),
        // x4I, x4Q
        entry(&[(2, 3, one), (3, 2, -one)]),
        entry(&[(0, 1, j), (1, 0, j)]),
    ];
    LinearStbc::new("ciod4", 4, 4, fold_rotation(&raw, theta), Alphabet::Pam).expect("valid")
}

pub fn ciod4() -> LinearStbc {
    ciod4_with_angle(ciod_angle())
}

/// Per-pair HEX basis `[[1, -½], [0, √3/2]]` repeated `k` times along the diagonal.
pub fn hex_lattice_generator(k: usize) -> RMat {
    let mut g = RMat::zeros(2 * k, 2 * k);
    for i in 0..k {
        g[(2 * i, 2 * i)] = 1.0;
        g[(2 * i, 2 * i + 1)] = -0.5;
        g[(2 * i + 1, 2 * i + 1)] = 3f64.sqrt() / 2.0;
    }
    g
}

/// How a catalog row is realized.
#[derive(Debug, Clone, PartialEq)]
pub enum Construction {
    Builtin(LinearStbc),
    /// Known from the literature but not constructed here.
    External,
}

/// A row of the code catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub n_t: &'static str,
    pub t: &'static str,
    pub code_rate: &'static str,
    /// Receive-antenna counts for which the scheme is DMT optimal.
    pub dmt_optimal_nr: &'static str,
    pub constellation: &'static str,
    pub construction: Construction,
}

impl CatalogEntry {
    pub fn code(&self) -> Option<&LinearStbc> {
        match &self.construction {
            Construction::Builtin(c) => Some(c),
            Construction::External => None,
        }
    }
}

/// Executable codes.
pub fn catalog() -> Vec<LinearStbc> {
    vec![alamouti(), golden(), golden_punctured(), ciod2(), ciod4()]
}

/// Executable codes followed by metadata-only rows.
pub fn catalog_entries() -> Vec<CatalogEntry> {
    let builtin = |name, description, n_t, t, rate, nr, cons, code| CatalogEntry {
        name,
        description,
        n_t,
        t,
        code_rate: rate,
        dmt_optimal_nr: nr,
        constellation: cons,
        construction: Construction::Builtin(code),
    };
    let external = |name, description, n_t, t, rate, nr, cons| CatalogEntry {
        name,
        description,
        n_t,
        t,
        code_rate: rate,
        dmt_optimal_nr: nr,
        constellation: cons,
        construction: Construction::External,
    };
    vec![
        builtin("alamouti", "Alamouti orthogonal design", "2", "2", "1", "1", "QAM", alamouti()),
        builtin("golden", "Golden code", "2", "2", "2", "any", "QAM", golden()),
        builtin(
            "golden_punctured",
            "Golden code keeping the two diagonal symbols",
            "2",
            "2",
            "1",
            "1",
            "QAM",
            golden_punctured(),
        ),
        builtin(
            "ciod2",
            "Coordinate-interleaved orthogonal design, 2 antennas",
            "2",
            "2",
            "1",
            "1",
            "rotated QAM",
            ciod2(),
        ),
        builtin(
            "ciod4",
            "Coordinate-interleaved orthogonal design, 4 antennas",
            "4",
            "4",
            "1",
            "1",
            "rotated QAM",
            ciod4(),
        ),
        external("perfect", "Perfect codes", "2,3,4,6", "n_t", "n_t", "any", "QAM/HEX"),
        external("cda_structured", "Structured CDA codes for special n_t", "2^n, 3(2^n), 2(3^n), q^n(q-1)/2", "n_t", "n_t", "any", "QAM/HEX"),
        external("cda_square", "Codes from cyclic division algebras", "any", "n_t", "n_t", "any", "QAM"),
        external("cda_rectangular", "Codes from cyclic division algebras", "any", "> n_t", "n_t", "any", "QAM"),
        external("perfect_any", "Perfect STBCs for arbitrary n_t", "any", "n_t", "n_t", "any", "QAM/HEX"),
        external("diagonal_nvd", "Diagonal STBCs with NVD", "any", "n_t", "1", "1", "QAM"),
        external("lu_hollanti_2", "Lu-Hollanti rectangular codes", "> 2", "> n_t", "2", "2", "QAM"),
        external("lu_hollanti_nt1", "Lu-Hollanti rectangular codes", "> 2", "> n_t", "n_t - 1", "n_t - 1", "QAM"),
        external("miso_qostbc", "MISO codes including QOSTBC", "4", "4", "1", "1", "QAM"),
        external("miso_maximal", "MISO codes from maximal orders", "4", "4", "1", "1", "QAM"),
        external("four_group", "4-group decodable STBCs", "2^n", "n_t", "1", "1", "QAM"),
        external("fast_decodable_4x2", "Fast-decodable STBCs", "4", "4", "2", "<= 2", "QAM"),
        external(
            "fast_decodable_asym",
            "Fast-decodable asymmetric STBCs",
            "any",
            "n_t",
            "n_r < n_t",
            "n_r < n_t",
            "QAM",
        ),
        external("punctured_perfect", "Punctured perfect STBCs", "any", "n_t", "n_r < n_t", "n_r < n_t", "QAM"),
        external("punctured_lattice", "Punctured lattice codes", "n_r m", "n_t", "n_r < n_t", "n_r < n_t", "QAM"),
        external("block_diagonal", "Block-diagonal STBCs", "n_r m", "n_t", "n_r < n_t", "n_r < n_t", "QAM"),
    ]
}

/// Looks up an executable code by name, including the unrotated
/// coordinate-interleaved variants used for comparisons.
pub fn code_by_name(name: &str) -> Result<LinearStbc> {
    match name {
        "ciod4_unrotated" => return Ok(ciod4_with_angle(0.0).with_name("ciod4_unrotated")),
        "ciod2_unrotated" => return Ok(ciod2_with_angle(0.0).with_name("ciod2_unrotated")),
        _ => {}
    }
    let entries = catalog_entries();
    match entries.iter().find(|e| e.name == name) {
        Some(CatalogEntry { construction: Construction::Builtin(c), .. }) => Ok(c.clone()),
        Some(_) => Err(Error::InvalidArgument(format!("'{name}' has no built-in construction"))),
        None => Err(Error::UnknownCode {
            name: name.to_string(),
            valid: entries.iter().filter(|e| e.code().is_some()).map(|e| e.name).collect::<Vec<_>>().join(", "),
        }),
    }
}

/// Largest PAM size a schedule may produce; keeps `M^2` well inside `f64`.
pub const MAX_PAM: u64 = 1 << 52;

/// An SNR-indexed family of scaled codes at multiplexing gain `r`.
///
/// At linear SNR `ρ` the PAM size is `max(2, round(ρ^{rT/2k}))` (or the
/// nearest even value when `even_only`), and the scale `μ` makes the average
/// codeword energy exactly `T ρ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeConfig {
    pub code: LinearStbc,
    pub r: f64,
    pub snr_grid_db: Vec<f64>,
    pub even_only: bool,
}

impl SchemeConfig {
    pub fn new(code: LinearStbc, r: f64, snr_grid_db: Vec<f64>) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::InvalidArgument(format!("multiplexing gain must be nonnegative, got {r}")));
        }
        let rate = code.code_rate().as_f64();
        if r > rate + 1e-12 {
            return Err(Error::RateTooHigh { r, rate });
        }
        if snr_grid_db.windows(2).any(|w| w[1] <= w[0]) || snr_grid_db.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("SNR grid must be finite and strictly ascending".into()));
        }
        Ok(Self { code, r, snr_grid_db, even_only: false })
    }

    pub fn with_even_only(mut self, even_only: bool) -> Self {
        self.even_only = even_only;
        self
    }

    /// Exponent of the PAM size, `rT / 2k`.
    pub fn m_exponent(&self) -> f64 {
        self.r * self.code.t() as f64 / (2.0 * self.code.k() as f64)
    }

    /// PAM size at linear SNR `snr`.
    pub fn m_at(&self, snr: f64) -> u64 {
        let target = snr.powf(self.m_exponent());
        let m = if self.even_only { 2.0 * (target / 2.0).round() } else { target.round() };
        m.clamp(2.0, MAX_PAM as f64) as u64
    }

    /// Scale at linear SNR `snr`: `μ^2 E||G s||^2 = T snr`.
    pub fn mu_at(&self, snr: f64) -> f64 {
        let m = self.m_at(snr);
        (self.code.t() as f64 * snr / self.code.mean_energy(m)).sqrt()
    }

    pub fn m_at_db(&self, snr_db: f64) -> u64 {
        self.m_at(db_to_linear(snr_db))
    }

    pub fn mu_at_db(&self, snr_db: f64) -> f64 {
        self.mu_at(db_to_linear(snr_db))
    }

    /// Bit rate `log2 |code| / T` at linear SNR `snr`.
    pub fn rate_bits(&self, snr: f64) -> f64 {
        let per_coord = match self.code.alphabet() {
            Alphabet::Pam => vec![(self.m_at(snr) as f64).log2(); self.code.dim()],
            Alphabet::Explicit(sets) => sets.iter().map(|s| (s.len() as f64).log2()).collect(),
        };
        per_coord.iter().sum::<f64>() / self.code.t() as f64
    }
}

/// Builds a scheme; errors when `r` exceeds the code rate.
pub fn scheme(code: LinearStbc, r: f64, snr_grid_db: Vec<f64>) -> Result<SchemeConfig> {
    SchemeConfig::new(code, r, snr_grid_db)
}

#[doc(hidden)]
pub fn weights_close(a: &LinearStbc, b: &LinearStbc) -> bool {
    a.n_t == b.n_t
        && a.t == b.t
        && a.weights.len() == b.weights.len()
        && a.weights.iter().zip(&b.weights).all(|(x, y)| x.max_abs_diff(y) < tol::RANK)
}
