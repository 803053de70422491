//! Cross-checks the coordinate-descent solver against the independent
//! projected-gradient reference on instances larger than the acceptance
//! grid, where indexing or accumulation mistakes would surface.

mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use alsvm::dataset::{Label, LabeledExample, SparseVector};
use alsvm::svm::{kkt_max_violation, train, CostFactors, SolverOptions};

fn random_instance(rng: &mut ChaCha8Rng, n: usize, dim: u32) -> Vec<LabeledExample> {
    (0..n)
        .map(|i| {
            let mut entries = Vec::new();
            for idx in 1..=dim {
                if !rng.random_bool(0.4) {
                    entries.push((idx, rng.random_range(-2.0..2.0)));
                }
            }
            let label = match i {
                0 => Label::Positive,
                1 => Label::Negative,
                _ => {
                    // Imbalanced, like the datasets this solver is for.
                    if rng.random_bool(0.25) {
                        Label::Positive
                    } else {
                        Label::Negative
                    }
                }
            };
            LabeledExample::new(SparseVector::new(entries).unwrap(), label)
        })
        .collect()
}

#[test]
fn medium_instances_match_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x51ae);
    let opts = SolverOptions {
        tolerance: 1e-10,
        max_epochs: 200_000,
        shuffle_seed: 1,
    };

    for trial in 0..8 {
        let n = rng.random_range(20..=40);
        let dim = rng.random_range(3..=6u32);
        let data = random_instance(&mut rng, n, dim);

        for costs in [
            CostFactors::from_pa(4.0, 0.5).unwrap(),
            CostFactors::from_pa(1.0, 2.0).unwrap(),
            CostFactors::from_pa(0.5, 1.0).unwrap(),
        ] {
            let model = train(&data, &costs, &opts).unwrap();
            assert!(model.converged, "trial {trial}: solver did not converge");

            let reference = common::solve_reference_qp(&data, &costs);
            assert!(
                reference.max_projected_gradient <= 1e-8,
                "trial {trial}: reference did not converge"
            );
            for (ex, &a) in data.iter().zip(&reference.alpha) {
                assert!((0.0..=costs.bound_for(ex.label)).contains(&a));
            }

            for ex in &data {
                let got = model.decision_value(&ex.features);
                let want = reference.decision_value(&ex.features);
                assert!(
                    (got - want).abs() <= 1e-3,
                    "trial {trial}: decision value {got} vs reference {want}"
                );
            }
            let tol = |o: f64| 1e-4 * (1.0 + o.abs());
            assert!(
                (model.primal_objective - reference.primal_objective).abs()
                    <= tol(reference.primal_objective),
                "trial {trial}: primal {} vs reference {}",
                model.primal_objective,
                reference.primal_objective
            );
            assert!(
                (model.dual_objective - reference.dual_objective).abs()
                    <= tol(reference.dual_objective),
                "trial {trial}: dual {} vs reference {}",
                model.dual_objective,
                reference.dual_objective
            );
            assert!(kkt_max_violation(&model, &data, &costs) <= 1e-4);
        }
    }
}
