//! Randomized invariants across module boundaries.

use g2lab::chernsimons::{cs_one_form, perturbed_rho, translation_tangent, CSContext};
use g2lab::exterior::{ConstForm, Metric, MultiIndex};
use g2lab::fibration::{build_fibration, decompose_deformation, type_iv_form, FibrationSpec};
use g2lab::g2core::{eigen_split, standard_phi};
use g2lab::gauge::snapshot::{decode, encode};
use g2lab::gauge::{constant_curvature_u1, field_residual, Connection, Flux, FourierField, Group, LatticeField, ResidualOperators};
use g2lab::rng::stream;
use g2lab::scalar::{Rational, Scalar};
use proptest::prelude::*;

fn ctx() -> CSContext {
    CSContext::new(build_fibration(&FibrationSpec::standard()).unwrap()).unwrap()
}

fn ops() -> ResidualOperators {
    ResidualOperators::new(&eigen_split(&standard_phi::<f64>()).unwrap()).unwrap()
}

fn unit(i: usize) -> Vec<f64> {
    (0..7).map(|j| if i == j { 1.0 } else { 0.0 }).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn deformation_blocks_are_orthogonal(coeffs in proptest::collection::vec(-6i64..=6, 35)) {
        let xi = ConstForm::from_terms(
            7, 4,
            MultiIndex::all(7, 4).into_iter().zip(&coeffs).map(|(k, &c)| (k, Rational::from_ratio(c, 3))),
        ).unwrap();
        let split = decompose_deformation(&xi).unwrap();
        prop_assert_eq!(split.reassemble(), xi.clone());
        let total = split.block_norms_sq().into_iter().fold(Rational::from_i64(0), |a, b| a + b);
        prop_assert_eq!(total, xi.inner(&xi, &Metric::euclidean(7)).unwrap());
    }

    #[test]
    fn self_dual_fluxes_lift_to_instantons(a in -3i64..=3, b in -3i64..=3, c in -3i64..=3) {
        let f = constant_curvature_u1(&Flux::four(a, b, c, c, -b, a)).lift(7).unwrap().field;
        prop_assert!(field_residual(&f, &ops()).unwrap().max() < 1e-11);
    }

    #[test]
    fn transverse_pairing_is_eps_times_charge(
        m in proptest::array::uniform6(-2i64..=2),
        eps in proptest::array::uniform4(-2.0f64..2.0),
    ) {
        let flux = Flux::four(m[0], m[1], m[2], m[3], m[4], m[5]);
        let q = flux.base_charge() as f64;
        let f = constant_curvature_u1(&flux).lift(7).unwrap().field;
        let xi = type_iv_form(&eps).unwrap();
        for (i, e) in eps.iter().enumerate() {
            let r = perturbed_rho(&f, &translation_tangent(&f, &unit(i)).unwrap(), &xi).unwrap();
            prop_assert!((r - e * q).abs() < 1e-9, "v = e{}: {} vs {}", i + 1, r, e * q);
        }
    }

    #[test]
    fn gauge_directions_are_annihilated(seed in 0u64..1000) {
        let mut rng = stream(seed, "orbit");
        let a = FourierField::random(&mut rng, Group::Su2, 7, 1, 2, 1, 0.3);
        let chi = FourierField::random(&mut rng, Group::Su2, 7, 0, 2, 1, 0.3);
        let conn = Connection::trivial(a).unwrap();
        let f = conn.curvature().unwrap().field;
        prop_assert!(cs_one_form(&ctx(), &f, &conn.covariant_d(&chi).unwrap()).unwrap().abs() < 1e-10);
    }

    #[test]
    fn snapshots_round_trip(seed in 0u64..1000, su2 in any::<bool>(), n in 2usize..4) {
        let group = if su2 { Group::Su2 } else { Group::U1 };
        let mut field = LatticeField::identity(&[n, 2, n, 2], group).unwrap();
        field.add_noise(&mut stream(seed, "snapshot"), 0.5);
        prop_assert_eq!(decode(&encode(&field)).unwrap(), field.clone());
        let lifted = field.lift(&[2, 3, 2]).unwrap();
        prop_assert_eq!(decode(&encode(&lifted)).unwrap(), lifted);
    }

    #[test]
    fn gauge_transforms_keep_lattice_charge(seed in 0u64..1000) {
        let mut rng = stream(seed, "gauge");
        let mut field = LatticeField::su2_half_flux(&[4; 4], &Flux::four(1, 1, 0, 0, -1, 1)).unwrap();
        field.add_noise(&mut rng, 0.1);
        let g = field.random_gauge(&mut rng, 1.0);
        let moved = field.gauge_transform(&g).unwrap();
        prop_assert!((moved.clover_charge().unwrap() - field.clover_charge().unwrap()).abs() < 1e-10);
        prop_assert!((moved.actions().unwrap().asd - field.actions().unwrap().asd).abs() < 1e-9);
    }
}
