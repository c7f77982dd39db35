//! Property tests for the structural invariants that hold on arbitrary
//! small inputs.

use corrlab::functions::{from_multilinear, to_multilinear, ProductFunction};
use corrlab::gaussian::{stability_lower, stability_upper};
use corrlab::spaces::{FiniteSpace, JointDistribution};
use proptest::prelude::*;

fn small_joint() -> impl Strategy<Value = JointDistribution> {
    ((2usize..=3), (2usize..=3)).prop_flat_map(|(d1, d2)| {
        proptest::collection::vec(0.05f64..1.0, d1 * d2).prop_map(move |weights| {
            let labels = |d: usize| (0..d).map(|a| a.to_string()).collect::<Vec<_>>();
            JointDistribution::from_weights(vec![labels(d1), labels(d2)], weights).unwrap()
        })
    })
}

fn small_function() -> impl Strategy<Value = ProductFunction> {
    (
        proptest::collection::vec(2usize..=3, 1..=3),
        proptest::collection::vec(0.1f64..1.0, 9),
    )
        .prop_flat_map(|(dims, raw_probs)| {
            let spaces: Vec<FiniteSpace> = dims
                .iter()
                .enumerate()
                .map(|(i, &d)| {
                    let raw = &raw_probs[(3 * i)..(3 * i + d)];
                    let total: f64 = raw.iter().sum();
                    FiniteSpace::new(
                        (0..d).map(|a| a.to_string()).collect::<Vec<_>>(),
                        raw.iter().map(|w| w / total).collect(),
                    )
                    .unwrap()
                })
                .collect();
            let len: usize = dims.iter().product();
            proptest::collection::vec(-1.0f64..1.0, len)
                .prop_map(move |values| ProductFunction::new(spaces.clone(), values).unwrap())
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn marginalization_chains_commute(j in small_joint()) {
        // re-marginalizing through the full set equals direct
        let direct = j.marginalize(&[1]).unwrap();
        let chained = j.marginalize(&[0, 1]).unwrap().marginalize(&[1]).unwrap();
        for (a, b) in direct.tensor().iter().zip(chained.tensor()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        let total: f64 = direct.tensor().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn correlation_respects_cheeger_and_merging(j in small_joint()) {
        let rho = j.maximal_correlation(&[0]).unwrap();
        prop_assert!((0.0..=1.0).contains(&rho));
        if let corrlab::spaces::CheegerBound::Bound(b) = j.cheeger_bound().unwrap() {
            prop_assert!(rho <= b + 1e-10);
        }
        // data processing: merging atoms never increases correlation
        if j.dims()[0] == 3 {
            let merged = j.merge_atoms(0, 0, 1).unwrap();
            prop_assert!(merged.maximal_correlation(&[0]).unwrap() <= rho + 1e-10);
        }
    }

    #[test]
    fn multilinear_round_trip_and_parseval(f in small_function()) {
        let poly = to_multilinear(&f).unwrap();
        let back = from_multilinear(&poly, f.domain()).unwrap();
        for (a, b) in back.values().iter().zip(f.values()) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
        let second: f64 = f
            .values()
            .iter()
            .zip(f.point_weights())
            .map(|(v, w)| v * v * w)
            .sum();
        prop_assert!((poly.second_moment() - second).abs() <= 1e-10);
        for i in 0..f.n() {
            prop_assert!((poly.influence(i) - f.influence(i).unwrap()).abs() <= 1e-10);
        }
    }

    #[test]
    fn fiber_operations_are_ordered(f in small_function(), coord in 0usize..3) {
        let coord = coord % f.n();
        let sup = f.sup_over(&[coord]).unwrap();
        let avg = f.average_over(&[coord]).unwrap();
        let inf = f.inf_over(&[coord]).unwrap();
        for ((lo, mid), hi) in inf.values().iter().zip(avg.values()).zip(sup.values()) {
            prop_assert!(lo <= mid && mid <= hi);
        }
        prop_assert!((avg.expectation() - f.expectation()).abs() <= 1e-12);
        prop_assert!(avg.influence(coord).unwrap() <= 1e-15);
    }

    #[test]
    fn stability_bracket(rho in 0.0f64..0.999, mu in 0.001f64..0.999, nu in 0.001f64..0.999) {
        let up = stability_upper(rho, mu, nu).unwrap();
        let lo = stability_lower(rho, mu, nu).unwrap();
        prop_assert!(lo <= mu * nu + 1e-10);
        prop_assert!(mu * nu <= up + 1e-10);
        prop_assert!(up <= mu.min(nu) + 1e-10);
        prop_assert!(lo >= (mu + nu - 1.0).max(0.0) - 1e-10);
        // 1-Lipschitz in each mass argument
        let up2 = stability_upper(rho, (mu + 0.05).min(1.0), nu).unwrap();
        prop_assert!((up2 - up).abs() <= 0.05 + 1e-9);
    }
}
