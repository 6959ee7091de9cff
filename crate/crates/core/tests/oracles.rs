mod common;

use binpack3d_core::heuristics::{best_fit_with, first_fit_with, CandidateMode};
use binpack3d_core::mpack::{solve_joint_exact, JointResult, SearchOptions};
use binpack3d_core::opack::{opack_step, packrule_mpl_with, BestFitRule, FirstFitRule, MpackLiteRule, PackRule};
use binpack3d_core::{is_feasible, RobotConfig, SelectionRule, StepOutcome, Weights};
use common::{brute_force_joint, exhaustive_single, objective, random_bins, random_box, random_config};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GRID: SearchOptions = SearchOptions { mode: CandidateMode::Grid, node_budget: 10_000_000 };

fn small_bin(rng: &mut ChaCha8Rng, hi: u32) -> [u32; 3] {
    [rng.gen_range(5..=hi), rng.gen_range(5..=hi), rng.gen_range(5..=hi)]
}

#[test]
fn full_grid_mpl_rule_hits_the_exhaustive_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let w = Weights::default();
    for _ in 0..20 {
        let bin = small_bin(&mut rng, 10);
        let n = rng.gen_range(1..=3);
        let (bins, id) = random_bins(&mut rng, n, bin, 8, 5, 1);
        let item = random_box(&mut rng, id, 1, 6);
        let cfg = random_config(&mut rng);
        let got = packrule_mpl_with(&bins, &item, &cfg, &w, CandidateMode::Grid);
        if let Some(p) = &got {
            let bin = bins.iter().find(|b| b.index == p.bin_index).unwrap();
            assert!(is_feasible(bin, p, &cfg).is_ok());
        }
        assert_eq!(got.map(|p| objective(&p, &w)), exhaustive_single(&bins, &item, &cfg, &w));
    }
}

#[test]
fn joint_search_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let w = Weights::default();
    for k in 0..8 {
        let bin = small_bin(&mut rng, 8);
        let n = rng.gen_range(1..=2);
        let (bins, mut id) = random_bins(&mut rng, n, bin, 4, 4, 1);
        let window: Vec<_> = (0..k % 3 + 1)
            .map(|_| {
                id += 1;
                random_box(&mut rng, id, 2, 5)
            })
            .collect();
        let cfg = RobotConfig { require_cep: rng.gen_bool(0.5), ..RobotConfig::default() };
        let result = solve_joint_exact(&bins, &window, &cfg, &w, GRID);
        assert!(!matches!(result, JointResult::BudgetExhausted { .. }));
        let expected = brute_force_joint(&bins, &window, &cfg, &w);
        assert_eq!(result.solution().map(|s| s.objective_value), expected, "instance {k}");
    }
}

#[test]
fn single_box_joint_search_is_the_mpl_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let w = Weights::default();
    for _ in 0..40 {
        let bin = small_bin(&mut rng, 12);
        let n = rng.gen_range(1..=3);
        let (bins, id) = random_bins(&mut rng, n, bin, 10, 6, 1);
        let item = random_box(&mut rng, id, 1, 7);
        let cfg = random_config(&mut rng);
        for mode in [CandidateMode::Grid, CandidateMode::Extreme] {
            let joint = solve_joint_exact(&bins, &[item], &cfg, &w, SearchOptions { mode, ..GRID });
            let rule = packrule_mpl_with(&bins, &item, &cfg, &w, mode);
            assert_eq!(joint.solution().map(|s| s.objective_value), rule.map(|p| objective(&p, &w)));
        }
    }
}

#[test]
fn bin_only_weights_reproduce_first_fit_bin_choice() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let w = Weights { w1: 0.0, w2: 0.0, w3: 1.0 };
    for _ in 0..60 {
        let bin = small_bin(&mut rng, 14);
        let (bins, id) = random_bins(&mut rng, 3, bin, 14, 7, 1);
        let item = random_box(&mut rng, id, 1, 8);
        let cfg = random_config(&mut rng);
        let mpl = packrule_mpl_with(&bins, &item, &cfg, &w, CandidateMode::Extreme).map(|p| p.bin_index);
        let ff = first_fit_with(&item, &bins, &cfg, CandidateMode::Extreme).map(|d| d.placement.bin_index);
        assert_eq!(mpl, ff);
    }
}

#[test]
fn first_fit_bin_is_the_lowest_bin_with_room() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let w = Weights::default();
    for _ in 0..30 {
        let bin = small_bin(&mut rng, 9);
        let (bins, id) = random_bins(&mut rng, 3, bin, 10, 6, 1);
        let item = random_box(&mut rng, id, 1, 6);
        let cfg = random_config(&mut rng);
        let expected = bins
            .iter()
            .find(|b| exhaustive_single(std::slice::from_ref(*b), &item, &cfg, &w).is_some())
            .map(|b| b.index);
        let ff = first_fit_with(&item, &bins, &cfg, CandidateMode::Grid);
        assert_eq!(ff.map(|d| d.placement.bin_index), expected);
    }
}

fn rules(mode: CandidateMode) -> Vec<Box<dyn PackRule>> {
    vec![
        Box::new(FirstFitRule { mode }),
        Box::new(BestFitRule { mode }),
        Box::new(MpackLiteRule { weights: Weights::default(), mode }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn one_box_lookahead_is_the_bare_rule(seed in any::<u64>(), grid in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bin = small_bin(&mut rng, 20);
        let n = rng.gen_range(1..=3);
        let (bins, id) = random_bins(&mut rng, n, bin, 12, 8, 1);
        let item = random_box(&mut rng, id, 1, 10);
        let cfg = random_config(&mut rng);
        let mode = if grid { CandidateMode::Grid } else { CandidateMode::Extreme };
        for rule in rules(mode) {
            let bare = match rule.name() {
                "FF" => first_fit_with(&item, &bins, &cfg, mode).map(|d| d.placement),
                "BF" => best_fit_with(&item, &bins, &cfg, mode).map(|d| d.placement),
                _ => packrule_mpl_with(&bins, &item, &cfg, &Weights::default(), mode),
            };
            let step = opack_step(rule.as_ref(), &bins, &[item], &cfg, &Weights::default(), SelectionRule::MinScore);
            let expected = bare.map_or(StepOutcome::Exhausted, |placement| StepOutcome::Placed { position: 0, placement });
            prop_assert_eq!(step, expected);
        }
    }

    #[test]
    fn committed_pick_is_stable_on_real_bins(seed in any::<u64>(), l in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bin = small_bin(&mut rng, 20);
        let (bins, mut id) = random_bins(&mut rng, 3, bin, 12, 8, 1);
        let window: Vec<_> = (0..l).map(|_| { id += 1; random_box(&mut rng, id, 1, 10) }).collect();
        let cfg = random_config(&mut rng);
        let before = bins.clone();
        for rule in rules(CandidateMode::Extreme) {
            if let StepOutcome::Placed { position, placement } =
                opack_step(rule.as_ref(), &bins, &window, &cfg, &Weights::default(), SelectionRule::MinScore)
            {
                prop_assert_eq!(placement.item, window[position]);
                let bin = bins.iter().find(|b| b.index == placement.bin_index).unwrap();
                prop_assert!(is_feasible(bin, &placement, &cfg).is_ok());
            }
        }
        prop_assert_eq!(bins, before);
    }

    #[test]
    fn removing_the_top_boxes_keeps_the_joint_solve_feasible(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bin = small_bin(&mut rng, 10);
        let (bins, mut id) = random_bins(&mut rng, 2, bin, 6, 5, 1);
        let window: Vec<_> = (0..3).map(|_| { id += 1; random_box(&mut rng, id, 1, 6) }).collect();
        let cfg = RobotConfig::default();
        let w = Weights::default();
        // a window box may rest on a later one, so only the bottom-up order is downward closed
        if let Some(sol) = solve_joint_exact(&bins, &window, &cfg, &w, SearchOptions::default()).solution() {
            let mut order: Vec<_> = sol.placements.iter().map(|(pos, p)| (p.corner[2], *pos)).collect();
            order.sort();
            for len in 1..order.len() {
                let lower: Vec<_> = order[..len].iter().map(|&(_, pos)| window[pos]).collect();
                let r = solve_joint_exact(&bins, &lower, &cfg, &w, SearchOptions::default());
                prop_assert!(r.solution().is_some(), "lowest {} boxes lost feasibility", len);
            }
        }
    }
}
