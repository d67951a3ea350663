//! Property-based invariants over randomly generated weight sequences
//! and regions.

use proptest::prelude::*;

use shiftspec::classify::SpectralRegion;
use shiftspec::radii::{compute_radii, radius_eq, RadiiOptions, RadiusEstimate};
use shiftspec::weights::{Side, Structure, WeightSequence};

fn weight_value() -> impl Strategy<Value = f64> {
    0.1f64..3.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// For a periodic sequence every radius in the family collapses to
    /// the geometric mean of the period, and the chain holds exactly.
    #[test]
    fn periodic_radii_collapse(period in prop::collection::vec(weight_value(), 1..6)) {
        let g = (period.iter().map(|w| w.ln()).sum::<f64>() / period.len() as f64).exp();
        let bound = period.iter().cloned().fold(0.0f64, f64::max);
        let w = WeightSequence {
            side: Side::Unilateral,
            structure: Structure::Periodic { period },
            bound,
            label: None,
        };
        let report = compute_radii(&w, &RadiiOptions::new((0, 256))).unwrap();
        prop_assert!(report.chain_ok);
        for (name, est) in [
            ("r1", &report.r1),
            ("r2", &report.plus.r2),
            ("r3", &report.plus.r3),
            ("r", &report.r),
        ] {
            prop_assert!(
                (est.value - g).abs() <= 1e-9 * g.max(1.0),
                "{name} = {} differs from the geometric mean {g}",
                est.value
            );
        }
    }

    /// Explicit random weights: the estimated radii always come out in
    /// chain order, whatever the sequence looks like.
    #[test]
    fn chain_order_on_random_sequences(
        values in prop::collection::vec(weight_value(), 64..200),
        tail in weight_value(),
    ) {
        let bound = values.iter().cloned().fold(tail, f64::max);
        let w = WeightSequence {
            side: Side::Unilateral,
            structure: Structure::Explicit { start: 0, values, tail },
            bound,
            label: None,
        };
        let report = compute_radii(&w, &RadiiOptions::new((0, 512))).unwrap();
        prop_assert!(report.chain_ok, "chain violated: {report:?}");
    }

    /// The estimate-equality predicate is symmetric and reflexive.
    #[test]
    fn radius_eq_symmetric(a in 0.0f64..4.0, b in 0.0f64..4.0, sa in 0.0f64..0.1, sb in 0.0f64..0.1) {
        let ea = RadiusEstimate::estimated(a, shiftspec::radii::Diagnostic {
            horizon: 100, spread: sa, monotone: true,
        });
        let eb = RadiusEstimate::estimated(b, shiftspec::radii::Diagnostic {
            horizon: 100, spread: sb, monotone: true,
        });
        prop_assert_eq!(radius_eq(&ea, &eb), radius_eq(&eb, &ea));
        prop_assert_eq!(radius_eq(&ea, &ea), shiftspec::radii::EqualityResult::Equal);
    }

    /// Region constructors canonicalize: degenerate annuli become the
    /// empty set or a circle, and constructors are idempotent under
    /// re-reading their own parameters.
    #[test]
    fn annulus_canonicalization(rho_in in 0.0f64..3.0, rho_out in 0.0f64..3.0) {
        let region = SpectralRegion::annulus(rho_in, rho_out, true, true);
        match &region {
            SpectralRegion::Empty => prop_assert!(rho_out < rho_in),
            SpectralRegion::Annulus { rho_in: a, rho_out: b, .. } => {
                prop_assert!(a <= b);
                prop_assert!(region.outer_radius() >= *a);
            }
            // a zero-width or zero-inner annulus may canonicalize to a
            // circle or disc
            _ => {}
        }
        let open = SpectralRegion::annulus(rho_in, rho_in, false, false);
        prop_assert_eq!(open, SpectralRegion::Empty);
    }
}
