//! Randomized structural invariants: PSD geometry of sampled Gram matrices,
//! symmetry and scaling laws of the densities, CDF shape constraints, and
//! agreement between independent evaluation routes.

use gram2x2::dist::{
    cdf_max, cdf_min, eig_pdf_general, eig_pdf_partial, inv_cdf_min, matrix_pdf,
};
use gram2x2::gram::{ChannelMatrix, EigenPair, GramMatrix2};
use gram2x2::profile::{FlatRow, PartialProfile, ProfileClass, VarianceProfile};
use gram2x2::quad::QuadratureConfig;
use gram2x2::specfun::sinhc_sqrt;
use num_complex::Complex64;
use proptest::prelude::*;

fn profile_strategy() -> impl Strategy<Value = VarianceProfile> {
    let phi = 0.05f64..4.0;
    (phi.clone(), phi.clone(), phi.clone(), phi)
        .prop_map(|(a, b, c, d)| VarianceProfile::new(a, b, c, d).unwrap())
}

fn partial_strategy() -> impl Strategy<Value = PartialProfile> {
    (0.05f64..2.0, 0.1f64..2.0, 0.05f64..4.0)
        .prop_map(|(p1, gap, p3)| PartialProfile::new(p1, p1 * (1.0 + gap), p3).unwrap())
        .prop_filter("phi3 collides with phi1 or phi2", |p| {
            p.check_all_distinct().is_ok()
        })
}

fn channel_strategy() -> impl Strategy<Value = ChannelMatrix> {
    let c = -3.0f64..3.0;
    proptest::array::uniform8(c).prop_map(|v| {
        ChannelMatrix::new([
            [Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3])],
            [Complex64::new(v[4], v[5]), Complex64::new(v[6], v[7])],
        ])
        .unwrap()
    })
}

fn eigen_strategy() -> impl Strategy<Value = EigenPair> {
    (0.01f64..5.0, 1e-3f64..5.0).prop_map(|(l2, gap)| EigenPair::new(l2 + gap, l2).unwrap())
}

fn class_discriminant(c: &ProfileClass) -> u8 {
    match c {
        ProfileClass::General => 0,
        ProfileClass::PartiallyAsymmetric { .. } => 1,
        ProfileClass::Symmetric => 2,
    }
}

proptest! {
    #[test]
    fn gram_from_channel_is_psd_with_consistent_spectrum(h in channel_strategy()) {
        let w = GramMatrix2::from_channel(&h);
        prop_assert!(w.det() >= -1e-9);
        let e = w.eigenvalues().unwrap();
        prop_assert!(e.min() >= 0.0);
        let scale = w.trace().max(1.0);
        prop_assert!((e.l1() + e.l2() - w.trace()).abs() <= 1e-9 * scale);
        prop_assert!((e.l1() * e.l2() - w.det()).abs() <= 1e-9 * scale * scale);
    }

    #[test]
    fn classification_commutes_with_transpose(p in profile_strategy()) {
        let a = p.classify();
        let b = p.transpose().classify();
        prop_assert_eq!(class_discriminant(&a), class_discriminant(&b));
        if let (
            ProfileClass::PartiallyAsymmetric { partial: pa, flat_row: fa },
            ProfileClass::PartiallyAsymmetric { partial: pb, flat_row: fb },
        ) = (a, b)
        {
            // transposing moves the flat row but keeps the three parameters
            prop_assert_eq!(fa == FlatRow::First, fb == FlatRow::Second);
            prop_assert!((pa.phi1() - pb.phi1()).abs() <= 1e-12 * pa.phi1());
            prop_assert!((pa.phi2() - pb.phi2()).abs() <= 1e-12 * pa.phi2());
            prop_assert!((pa.phi3() - pb.phi3()).abs() <= 1e-12 * pa.phi3());
        }
    }

    #[test]
    fn sinhc_is_monotone_and_at_least_one_on_nonnegatives(
        a in 0.0f64..100.0,
        b in 0.0f64..100.0,
    ) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let slo = sinhc_sqrt(lo);
        let shi = sinhc_sqrt(hi);
        prop_assert!(slo >= 1.0);
        prop_assert!(shi >= slo);
    }

    #[test]
    fn sinhc_matches_direct_formula_away_from_zero(z in 0.3f64..30.0) {
        let direct = z.sqrt().sinh() / z.sqrt();
        prop_assert!((sinhc_sqrt(z) / direct - 1.0).abs() <= 1e-13);
        let zn = -z / 4.0; // stays right of the first sine zero
        let rn = (-zn).sqrt();
        let direct_n = rn.sin() / rn;
        prop_assert!((sinhc_sqrt(zn) / direct_n - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn cdfs_are_monotone_and_bounded(
        p in partial_strategy(),
        a in 0.0f64..20.0,
        b in 0.0f64..20.0,
    ) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        for cdf in [cdf_min, cdf_max] {
            let flo = cdf(&p, lo).unwrap();
            let fhi = cdf(&p, hi).unwrap();
            prop_assert!((0.0..=1.0).contains(&flo));
            prop_assert!((0.0..=1.0).contains(&fhi));
            prop_assert!(fhi >= flo - 1e-12);
        }
        prop_assert!(cdf_max(&p, hi).unwrap() <= cdf_min(&p, hi).unwrap() + 1e-12);
    }

    #[test]
    fn cdf_min_scale_equivariance(
        p in partial_strategy(),
        x in 0.0f64..10.0,
        ci in 0usize..3,
    ) {
        let c = [0.5, 2.0, 10.0][ci];
        let scaled = PartialProfile::new(c * p.phi1(), c * p.phi2(), c * p.phi3()).unwrap();
        let base = cdf_min(&p, x).unwrap();
        let moved = cdf_min(&scaled, c * x).unwrap();
        prop_assert!((moved - base).abs() <= 1e-9 * base.max(1e-12));
    }

    #[test]
    fn matrix_pdf_scale_equivariance(
        p in profile_strategy(),
        h in channel_strategy(),
        ci in 0usize..3,
    ) {
        let c = [0.5, 2.0, 10.0][ci];
        let w = GramMatrix2::from_channel(&h);
        let rows = p.rows();
        let ps = VarianceProfile::new(
            c * rows[0][0],
            c * rows[0][1],
            c * rows[1][0],
            c * rows[1][1],
        )
        .unwrap();
        let ws = GramMatrix2::new(c * w.w1(), c * w.w2(), c * w.w3()).unwrap();
        // the 4 real matrix coordinates each contract by c
        let base = matrix_pdf(&p, &w);
        let moved = matrix_pdf(&ps, &ws) * c.powi(4);
        prop_assert!((moved - base).abs() <= 1e-12 * base.max(1e-300));
    }

    #[test]
    fn matrix_pdf_depends_on_w3_modulus_only(
        p in profile_strategy(),
        h in channel_strategy(),
        theta in 0.0f64..std::f64::consts::TAU,
    ) {
        let w = GramMatrix2::from_channel(&h);
        let rotated = GramMatrix2::new(
            w.w1(),
            w.w2(),
            w.w3() * Complex64::from_polar(1.0, theta),
        )
        .unwrap();
        let a = matrix_pdf(&p, &w);
        let b = matrix_pdf(&p, &rotated);
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
    }

    #[test]
    fn inverse_cdf_round_trips(p in partial_strategy(), prob in 1e-6f64..0.999) {
        let x = inv_cdf_min(&p, prob).unwrap();
        let back = cdf_min(&p, x).unwrap();
        prop_assert!((back - prob).abs() <= 1e-10 * prob);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn eig_pdf_ignores_profile_transpose(
        p in profile_strategy(),
        e in eigen_strategy(),
    ) {
        let q = QuadratureConfig::default();
        let a = eig_pdf_general(&p, &e, &q).unwrap();
        let b = eig_pdf_general(&p.transpose(), &e, &q).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1e-300));
    }

    #[test]
    fn eig_pdf_routes_agree_on_partial_profiles(
        p in partial_strategy(),
        e in eigen_strategy(),
    ) {
        let q = QuadratureConfig::default();
        let general = eig_pdf_general(&p.embed(), &e, &q).unwrap();
        let partial = eig_pdf_partial(&p, &e).unwrap();
        // both routes can legitimately underflow far in the tail
        prop_assume!(general > 1e-280);
        prop_assert!((general / partial - 1.0).abs() <= 1e-6);
    }
}
