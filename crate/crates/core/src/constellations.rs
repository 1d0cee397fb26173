//! Signal sets: regular M-PAM, square QAM, hexagonal and rotated variants.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Regular M-PAM: `{2 floor(-M/2) + l : l = 1, 3, ..., 2M - 1}`.
///
/// Points are odd-spaced integers with spacing 2. Even `M` gives a
/// zero-mean set; odd `M` leans one step to the negative side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pam {
    m: u32,
    points: Vec<f64>,
}

impl Pam {
    pub fn new(m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("PAM size must be at least 1".into()));
        }
        let base = 2 * (-(m as i64)).div_euclid(2);
        let points = (0..m as i64).map(|i| (base + 2 * i + 1) as f64).collect();
        Ok(Self { m, points })
    }

    pub fn size(&self) -> u32 {
        self.m
    }

    /// Points in ascending order.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn mean(&self) -> f64 {
        pam_mean(self.m as u64)
    }

    pub fn variance(&self) -> f64 {
        pam_variance(self.m as u64)
    }

    /// Distinct pairwise differences `{-2(M-1), ..., 0, ..., 2(M-1)}`.
    pub fn differences(&self) -> Vec<f64> {
        let span = 2 * (self.m as i64 - 1);
        (-span..=span).step_by(2).map(|d| d as f64).collect()
    }
}

/// Shorthand for [`Pam::new`].
pub fn pam(m: u32) -> Result<Pam> {
    Pam::new(m)
}

/// Mean of the M-PAM points, `2 floor(-M/2) + M`.
pub fn pam_mean(m: u64) -> f64 {
    (2 * (-(m as i128)).div_euclid(2) + m as i128) as f64
}

/// Variance of the M-PAM points, `(M^2 - 1) / 3`.
pub fn pam_variance(m: u64) -> f64 {
    let m = m as f64;
    (m * m - 1.0) / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Complex2DKind {
    Qam,
    Hex,
}

/// A two-dimensional constellation held in Cartesian complex form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Complex2D {
    pub kind: Complex2DKind,
    /// PAM size per axis; the constellation has `m * m` points.
    pub m: u32,
    /// Rotation applied to every point, radians.
    pub angle: f64,
    pub points: Vec<Complex64>,
}

/// `{a + jb : a, b in M-PAM}`.
pub fn qam(m: u32) -> Result<Complex2D> {
    let p = pam(m)?;
    let points = p.points().iter().flat_map(|&a| p.points().iter().map(move |&b| Complex64::new(a, b))).collect();
    Ok(Complex2D { kind: Complex2DKind::Qam, m, angle: 0.0, points })
}

/// Unit vector `e^{j 2π/3}` spanning the hexagonal lattice with 1.
pub fn omega() -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0)
}

/// `{a + ω b : a, b in M-PAM}`, `ω = e^{j2π/3}`.
pub fn hex(m: u32) -> Result<Complex2D> {
    let p = pam(m)?;
    let w = omega();
    let points = p.points().iter().flat_map(|&a| p.points().iter().map(move |&b| a + w * b)).collect();
    Ok(Complex2D { kind: Complex2DKind::Hex, m, angle: 0.0, points })
}

/// Multiplies every point by `e^{jθ}`.
pub fn rotate(c: &Complex2D, theta: f64) -> Complex2D {
    let r = Complex64::from_polar(1.0, theta);
    Complex2D { kind: c.kind, m: c.m, angle: c.angle + theta, points: c.points.iter().map(|z| z * r).collect() }
}

/// Smallest distance between two distinct points.
pub fn min_distance(points: &[Complex64]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.min((a - b).norm());
        }
    }
    best
}

/// Lexicographic enumeration of the Cartesian product of per-coordinate sets.
///
/// The first coordinate varies slowest. Sets are used in the order given, so
/// passing ascending sets yields ascending lexicographic order.
#[derive(Debug, Clone)]
pub struct VectorEnumerator<'a> {
    sets: &'a [Vec<f64>],
    idx: Vec<usize>,
    done: bool,
}

/// Number of vectors in the product of `sets`.
pub fn product_size(sets: &[Vec<f64>]) -> u128 {
    sets.iter().map(|s| s.len() as u128).product()
}

/// Enumerates the product of `sets` after checking it is non-empty and no
/// larger than `cap`.
pub fn enumerate_vectors(sets: &[Vec<f64>], cap: u128) -> Result<VectorEnumerator<'_>> {
    if sets.is_empty() {
        return Err(Error::InvalidArgument("cannot enumerate an empty product (k = 0)".into()));
    }
    if sets.iter().any(Vec::is_empty) {
        return Err(Error::InvalidArgument("a coordinate set is empty".into()));
    }
    let count = product_size(sets);
    if count > cap {
        return Err(Error::CapExceeded {
            count,
            cap,
            hint: "reduce the constellation size or use a bounded search".into(),
        });
    }
    Ok(VectorEnumerator { sets, idx: vec![0; sets.len()], done: false })
}

impl Iterator for VectorEnumerator<'_> {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        if self.done {
            return None;
        }
        let out = self.idx.iter().zip(self.sets).map(|(&i, s)| s[i]).collect();
        let mut pos = self.idx.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            self.idx[pos] += 1;
            if self.idx[pos] < self.sets[pos].len() {
                break;
            }
            self.idx[pos] = 0;
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pam_points() {
        assert_eq!(pam(2).unwrap().points(), &[-1.0, 1.0]);
        assert_eq!(pam(4).unwrap().points(), &[-3.0, -1.0, 1.0, 3.0]);
        // floor(-3/2) = -2, so points start at -4 + 1.
        assert_eq!(pam(3).unwrap().points(), &[-3.0, -1.0, 1.0]);
        assert_eq!(pam(1).unwrap().points(), &[-1.0]);
        assert!(pam(0).is_err());
    }

    #[test]
    fn pam_moments_match_closed_forms() {
        for m in 1..=17u32 {
            let p = pam(m).unwrap();
            let n = p.points().len() as f64;
            let mean = p.points().iter().sum::<f64>() / n;
            let var = p.points().iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
            assert!((mean - p.mean()).abs() < 1e-12);
            assert!((var - p.variance()).abs() < 1e-9);
            if m % 2 == 0 {
                assert_eq!(mean, 0.0);
            }
            assert!(p.points().windows(2).all(|w| w[1] - w[0] == 2.0));
        }
        for m in [2u32, 4, 8, 16] {
            assert_eq!(pam_variance(m as u64), ((m * m - 1) as f64) / 3.0);
        }
    }

    #[test]
    fn pam_differences() {
        assert_eq!(pam(3).unwrap().differences(), vec![-4.0, -2.0, 0.0, 2.0, 4.0]);
    }

    #[test]
    fn qam_and_hex() {
        let q = qam(2).unwrap();
        assert_eq!(q.points.len(), 4);
        for z in &q.points {
            assert_eq!(z.re.abs(), 1.0);
            assert_eq!(z.im.abs(), 1.0);
        }
        for m in 1..=6 {
            assert_eq!(qam(m).unwrap().points.len(), (m * m) as usize);
        }
        let h = hex(2).unwrap();
        let w = omega();
        for (a, b) in [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)] {
            assert!(h.points.iter().any(|z| (z - (a + w * b)).norm() < 1e-12));
        }
        for m in 2..=6 {
            assert!((min_distance(&hex(m).unwrap().points) - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_preserves_distances() {
        let q = qam(2).unwrap();
        let r = rotate(&q, 0.5 * 2f64.atan());
        assert!((min_distance(&r.points) - 2.0).abs() < 1e-12);
        let q4 = qam(4).unwrap();
        let r4 = rotate(&q4, 0.3);
        for i in 0..q4.points.len() {
            for j in 0..q4.points.len() {
                let d0 = (q4.points[i] - q4.points[j]).norm();
                let d1 = (r4.points[i] - r4.points[j]).norm();
                assert!((d0 - d1).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn enumerate_small_products() {
        let sets = vec![vec![-1.0, 1.0]; 2];
        let all: Vec<_> = enumerate_vectors(&sets, 100).unwrap().collect();
        assert_eq!(all, vec![vec![-1.0, -1.0], vec![-1.0, 1.0], vec![1.0, -1.0], vec![1.0, 1.0]]);
        assert!(enumerate_vectors(&[], 100).is_err());
        let p4 = pam(4).unwrap().points().to_vec();
        let sets = vec![p4; 4];
        let all: Vec<_> = enumerate_vectors(&sets, 1000).unwrap().collect();
        assert_eq!(all.len(), 256);
        let mut sorted = all.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sorted.dedup();
        assert_eq!(sorted, all);
    }

    #[test]
    fn enumeration_cap_names_the_count() {
        let sets = vec![vec![0.0, 1.0, 2.0]; 10];
        match enumerate_vectors(&sets, 1000) {
            Err(Error::CapExceeded { count, .. }) => assert_eq!(count, 59049),
            other => panic!("unexpected {other:?}"),
        }
    }
}
