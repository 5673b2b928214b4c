mod common;

use common::{gaussian_vec, random_overlapping, rng};
use ogl_core::data_io::{load_dataset, scale_features, ScalingMode};
use ogl_core::groups::generate_groups;
use ogl_core::metrics::*;
use ogl_core::outer::{OuterConfig, SubproblemSolver};
use ogl_core::prox_dual::{solve_subproblem_enhanced, DualSolverSettings, ProxSubproblem, TerminationRule};
use ogl_core::{GroupStructure, LogisticLoss};
use proptest::prelude::*;

fn entries() -> impl Strategy<Value = Vec<ProfileEntry>> {
    proptest::collection::vec((1e-3f64..1e3, any::<bool>(), 1e-3f64..1e3, any::<bool>()), 1..20).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(k, (ti, si, tj, sj))| ProfileEntry {
                instance: format!("p{k}"),
                time_i: ti,
                solved_i: si,
                time_j: tj,
                solved_j: sj,
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn profile_is_antisymmetric(es in entries()) {
        let swapped: Vec<ProfileEntry> = es
            .iter()
            .map(|e| ProfileEntry {
                instance: e.instance.clone(),
                time_i: e.time_j,
                solved_i: e.solved_j,
                time_j: e.time_i,
                solved_j: e.solved_i,
            })
            .collect();
        let a = performance_profile(&es).unwrap();
        let b = performance_profile(&swapped).unwrap();
        prop_assert_eq!(a.bars.len(), b.bars.len());
        for (x, y) in a.bars.iter().zip(&b.bars) {
            prop_assert_eq!(x.height, -y.height);
            prop_assert_eq!(x.failure, y.failure);
        }
        prop_assert_eq!(a.area_i, b.area_j);
    }
}

#[test]
fn exit_prediction_is_outside_support() {
    let mut r = rng(8);
    for _ in 0..50 {
        let gs = random_overlapping(&mut r, 30);
        let x0 = gaussian_vec(&mut r, gs.n(), 1.0);
        let g = gaussian_vec(&mut r, gs.n(), 1.0);
        let sp = ProxSubproblem::new(&gs, &x0, &g, 0.7).unwrap();
        let mut sigma = 1.0;
        let res = solve_subproblem_enhanced(
            &sp,
            &TerminationRule::gap(1e-8),
            &vec![0.0; gs.dual_dim()],
            &mut sigma,
            &DualSolverSettings::default(),
        )
        .unwrap();
        let support = support_of(&res.x_hat, &gs, 0.0);
        assert!(res.predicted_zero.iter().all(|i| !support.contains(i)));
    }
}

#[test]
fn plain_dual_ascent_returns_dense_solutions() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/wdbc.libsvm.gz");
    let data = scale_features(load_dataset(&path, None).unwrap(), ScalingMode::Standardize).unwrap();
    let loss = LogisticLoss::new(data);
    let groups = generate_groups(30, 0.1, 10).unwrap();
    let lam = 0.3 * ogl_core::lambda_min::initial_guess(&loss, &groups);
    let gs = GroupStructure::with_scaled_weights(30, groups, lam).unwrap();
    let solve = |solver| {
        let cfg = OuterConfig {
            solver,
            ..Default::default()
        };
        ogl_core::solve(&loss, &gs, &cfg).unwrap().x
    };
    assert_eq!(support_of(&solve(SubproblemSolver::Pga), &gs, 0.0).len(), gs.num_groups());
    assert!(support_of(&solve(SubproblemSolver::Enhanced), &gs, 0.0).len() < gs.num_groups());
}
