use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stbc_core::constellations::pam;
use stbc_core::decoder::{decode, real_equivalent, receive_vector, DecoderKind};
use stbc_core::nvd::{min_det_code, min_det_z};
use stbc_core::simulator::{error_probability, rotation_agreement, sample_channel, SimJob};
use stbc_core::stbc::{alamouti, catalog, ciod4, code_by_name, golden_punctured, scheme};
use stbc_core::{db_to_linear, CMat, Complex64, LinearStbc, RMat};

#[test]
fn catalog_codes_survive_json() {
    for code in catalog() {
        let text = serde_json::to_string(&code).unwrap();
        let back: LinearStbc = serde_json::from_str(&text).unwrap();
        assert_eq!(back, code, "{}", code.name());
    }
}

#[test]
fn scaled_codewords_have_energy_t_snr() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for code in catalog() {
        let rate = code.code_rate().as_f64();
        let s = scheme(code.clone(), 0.5 * rate, vec![20.0]).unwrap();
        let snr = db_to_linear(20.0);
        let m = s.m_at(snr);
        let mu = s.mu_at(snr);
        let pts = pam(m as u32).unwrap().points().to_vec();
        let n = 40_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let sym: Vec<f64> = (0..code.dim()).map(|_| pts[rng.random_range(0..pts.len())]).collect();
            acc += code.encode(&sym, mu).unwrap().norm_sqr();
        }
        let mean = acc / n as f64;
        let target = code.t() as f64 * snr;
        assert!((mean / target - 1.0).abs() < 0.03, "{}: {mean} vs {target}", code.name());
    }
}

#[test]
fn signed_permutation_rebase_keeps_box_minimum() {
    let code = ciod4();
    let n = code.dim();
    // Signed permutation: a unimodular map of the box onto itself.
    let perm = [3usize, 0, 6, 1, 7, 2, 5, 4];
    let g = RMat::from_fn(n, n, |i, j| {
        if perm[j] != i {
            0.0
        } else if j % 3 == 0 {
            -1.0
        } else {
            1.0
        }
    });
    let rebased = code.lattice_rebase(&g).unwrap();
    let a = min_det_z(&code, 1).unwrap().value;
    let b = min_det_z(&rebased, 1).unwrap().value;
    assert!((a - b).abs() <= 1e-9 * a.max(1.0), "{a} vs {b}");
}

#[test]
fn finite_code_min_det_does_not_grow_with_m() {
    for code in [alamouti(), golden_punctured()] {
        let vals: Vec<f64> = [2, 4, 6, 8].iter().map(|&m| min_det_code(&code, m).unwrap().value).collect();
        assert!(vals.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{}: {vals:?}", code.name());
    }
}

#[test]
fn unrotated_ciod4_has_vanishing_determinant() {
    let rot = min_det_code(&ciod4(), 2).unwrap();
    let flat = min_det_code(&code_by_name("ciod4_unrotated").unwrap(), 2).unwrap();
    assert!(rot.value > 1.0);
    assert_eq!(flat.value, 0.0);
}

#[test]
fn sphere_matches_exhaustive_on_ciod4() {
    let code = ciod4();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let sets = code.coord_sets(2).unwrap();
    let mu = 1.3;
    for _ in 0..300 {
        let h = sample_channel(1, 4, &mut rng);
        let eq = real_equivalent(&h, &code, mu).unwrap();
        let s: Vec<f64> = sets.iter().map(|c| c[rng.random_range(0..c.len())]).collect();
        let x = code.encode(&s, mu).unwrap();
        let noise = CMat::from_fn(1, 4, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let y = receive_vector(&h.mul(&x).unwrap().add(&noise).unwrap());
        let (a, _) = decode(&y, &eq, &sets, DecoderKind::Sphere).unwrap();
        let (b, _) = decode(&y, &eq, &sets, DecoderKind::Exhaustive).unwrap();
        assert_eq!(a.s_hat, b.s_hat);
    }
}

#[test]
fn rotation_helps_ciod4() {
    let run = |name: &str| {
        let s = scheme(code_by_name(name).unwrap(), 0.0, vec![20.0]).unwrap();
        let mut job = SimJob::new(s, 1, 40_000, 5);
        job.error_target = None;
        error_probability(&job).unwrap().points[0].clone()
    };
    let rot = run("ciod4");
    let flat = run("ciod4_unrotated");
    assert!(rot.ci_hi < flat.ci_lo, "rotated {} vs unrotated {}", rot.pe, flat.pe);
}

#[test]
fn rotation_agreement_rises_with_snr() {
    let a: Vec<f64> =
        [20.0, 40.0, 60.0].iter().map(|&db| rotation_agreement(2, 2, 0.5, db, 20_000, 1).unwrap()).collect();
    assert!(a[0] <= a[1] + 0.01 && a[1] <= a[2] + 0.01, "{a:?}");
    assert!(a[2] > 0.9, "{a:?}");
}
