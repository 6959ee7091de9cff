//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Oracles come from the core test-support module, so the reference solvers
//! used here are the same independent brute-force code the unit suites use.
//! The benchmark criteria run through the library directly; the determinism
//! check goes through the HTTP service like the CLI does.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeMap;
use std::sync::OnceLock;
use std::time::Instant;

use axum::body::Body;
use axum::http::Request;
use http_body_util::BodyExt;
use tower::ServiceExt;
use binpack3d_core::api::{BenchRequest, BenchResponse};
use binpack3d_core::heuristics::{best_fit_with, first_fit_with, CandidateMode};
use binpack3d_core::mpack::{solve_joint_exact, JointResult, SearchOptions};
use binpack3d_core::opack::{opack_step, packrule_mpl_with, BestFitRule, FirstFitRule, MpackLiteRule, PackRule};
use binpack3d_core::sim::{
    gen_synthetic, metrics_csv, run_bench, run_episode, validate_trace, BenchSpec, EpisodeConfig, TraceIssue, SYNTHETIC_MAX_SIDE,
    SYNTHETIC_MIN_SIDE,
};
use binpack3d_core::{is_feasible, BinState, BoxDims, Policy, PolicyKind, RobotConfig, SelectionRule, StepOutcome, Weights};
use common::{brute_force_joint, exhaustive_single, objective, random_bins, random_box, random_config};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SYN: [u32; 3] = [80, 45, 45];
const SEEDS: u64 = 25;
const LOOKAHEADS: [usize; 3] = [1, 3, 5];
const BASE_POLICIES: [PolicyKind; 5] = [
    PolicyKind::FirstFit,
    PolicyKind::BestFit,
    PolicyKind::OpackFirstFit,
    PolicyKind::OpackBestFit,
    PolicyKind::MpackLite,
];

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

/// Paired synthetic runs shared by the feasibility, trend and CEP criteria.
struct SynRuns {
    /// Mean fill rate per seed, keyed by (policy name, look-ahead, CEP on).
    fill: BTreeMap<(&'static str, usize, bool), Vec<f64>>,
    traces_checked: usize,
    geometric_violations: usize,
    other_violations: usize,
    missing_fill: usize,
    secs: f64,
}

impl SynRuns {
    fn mean(&self, policy: PolicyKind, l: usize, cep: bool) -> f64 {
        let v = &self.fill[&(policy.name(), l, cep)];
        v.iter().sum::<f64>() / v.len() as f64
    }
}

fn syn_collections() -> Vec<Vec<BoxDims>> {
    (0..SEEDS).map(|k| gen_synthetic(SYN, 10, SYNTHETIC_MIN_SIDE, SYNTHETIC_MAX_SIDE, k).unwrap().boxes).collect()
}

fn syn_runs() -> &'static SynRuns {
    static RUNS: OnceLock<SynRuns> = OnceLock::new();
    RUNS.get_or_init(|| {
        let start = Instant::now();
        let collections = syn_collections();
        let seeds: Vec<u64> = (0..SEEDS).collect();
        let mut runs = SynRuns {
            fill: BTreeMap::new(),
            traces_checked: 0,
            geometric_violations: 0,
            other_violations: 0,
            missing_fill: 0,
            secs: 0.0,
        };
        for cep in [false, true] {
            let policies = if cep { vec![PolicyKind::MpackLite] } else { BASE_POLICIES.to_vec() };
            let mut spec = BenchSpec::new(policies, LOOKAHEADS.to_vec(), seeds.clone(), "SYN", SYN);
            spec.template.robot.require_cep = cep;
            spec.record_timing = false;
            spec.keep_traces = true;
            for ep in run_bench(&spec, &collections).expect("synthetic bench runs") {
                let trace = ep.trace.expect("traces kept");
                let report = validate_trace(&trace);
                runs.traces_checked += 1;
                let geometric = report.count(|i| {
                    matches!(i, TraceIssue::Containment | TraceIssue::Overlap { .. } | TraceIssue::Stability { .. })
                });
                runs.geometric_violations += geometric;
                runs.other_violations += report.violations.len() - geometric;
                match ep.row.mean_fill_rate {
                    Some(f) => runs.fill.entry((ep.row.policy.name(), ep.row.lookahead, cep)).or_default().push(f),
                    None => runs.missing_fill += 1,
                }
            }
        }
        runs.secs = start.elapsed().as_secs_f64();
        runs
    })
}

fn criterion_1() -> Verdict {
    let r = syn_runs();
    let expected = BASE_POLICIES.len() * LOOKAHEADS.len() * SEEDS as usize + LOOKAHEADS.len() * SEEDS as usize;
    Verdict::new(
        r.traces_checked == expected && r.geometric_violations == 0 && r.other_violations == 0 && r.secs < 1800.0,
        format!(
            "{} traces replayed (incl. MPL with CEP), {} containment/overlap/stability violations, {} other, {:.1}s",
            r.traces_checked, r.geometric_violations, r.other_violations, r.secs
        ),
    )
}

fn criterion_2() -> Verdict {
    let cases: Vec<([u32; 3], usize, u32, u32)> = vec![
        (SYN, 10, SYNTHETIC_MIN_SIDE, SYNTHETIC_MAX_SIDE),
        (SYN, 10, 8, 30),
        ([80, 80, 80], 4, 10, 40),
        ([120, 80, 80], 4, 15, 60),
        ([20, 12, 12], 3, 4, 8),
        ([7, 5, 3], 2, 1, 3),
    ];
    let mut collections = 0;
    let mut bad = Vec::new();
    for (case, (bin, n_bins, lo, hi)) in cases.into_iter().enumerate() {
        for seed in 0..30u64 {
            collections += 1;
            let c = gen_synthetic(bin, n_bins, lo, hi, seed).unwrap();
            let bin_dims = BoxDims::new(0, bin[0], bin[1], bin[2]).unwrap();
            let mut bins: Vec<BinState> = (1..=n_bins).map(|j| BinState::new(bin_dims, j, j as u64)).collect();
            let mut ok = c.boxes.len() == c.certificate.len();
            for p in &c.certificate {
                let b = &mut bins[p.bin_index - 1];
                ok &= is_feasible(b, p, &RobotConfig::default()).is_ok();
                b.push(*p);
            }
            ok &= bins.iter().all(|b| b.packed_volume_grid() == b.volume() && b.fill_rate() == 100.0);
            let total: u64 = c.boxes.iter().map(BoxDims::grid_volume).sum();
            ok &= total == n_bins as u64 * u64::from(bin[0]) * u64::from(bin[1]) * u64::from(bin[2]);
            if !ok {
                bad.push(format!("case {case} seed {seed}"));
            }
        }
    }
    Verdict::new(bad.is_empty(), format!("{collections} collections replayed, {} not exactly full {bad:?}", bad.len()))
}

fn criterion_3() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC3);
    let w = Weights::default();
    let (mut agree, mut placed) = (0, 0);
    for _ in 0..50 {
        let bin = [rng.gen_range(6..=12), rng.gen_range(6..=12), rng.gen_range(6..=12)];
        let n = rng.gen_range(1..=3);
        let (bins, id) = random_bins(&mut rng, n, bin, 15, 6, 1);
        let item = random_box(&mut rng, id, 1, 8);
        let cfg = random_config(&mut rng);
        let got = packrule_mpl_with(&bins, &item, &cfg, &w, CandidateMode::Grid).map(|p| objective(&p, &w));
        let want = exhaustive_single(&bins, &item, &cfg, &w);
        placed += usize::from(want.is_some());
        agree += usize::from(got == want);
    }
    let secs = start.elapsed().as_secs_f64();
    Verdict::new(
        agree == 50 && secs < 300.0,
        format!("{agree}/50 states match the exhaustive minimum ({placed} placeable), {secs:.1}s"),
    )
}

fn criterion_4() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC4);
    let w = Weights::default();
    let grid = SearchOptions { mode: CandidateMode::Grid, ..SearchOptions::default() };
    let (mut agree, mut solved, mut exhausted) = (0, 0, 0);
    for k in 0..20 {
        let bin = [rng.gen_range(5..=10), rng.gen_range(5..=10), rng.gen_range(5..=10)];
        let n = rng.gen_range(1..=2);
        let (bins, mut id) = random_bins(&mut rng, n, bin, 6, 5, 1);
        let window: Vec<BoxDims> = (0..=k % 3)
            .map(|_| {
                id += 1;
                random_box(&mut rng, id, 2, 5)
            })
            .collect();
        let cfg = RobotConfig { require_cep: k % 4 == 3, ..RobotConfig::default() };
        let result = solve_joint_exact(&bins, &window, &cfg, &w, grid);
        exhausted += usize::from(matches!(result, JointResult::BudgetExhausted { .. }));
        let got = result.solution().map(|s| s.objective_value);
        let want = brute_force_joint(&bins, &window, &cfg, &w);
        solved += usize::from(want.is_some());
        agree += usize::from(got == want);
    }
    let secs = start.elapsed().as_secs_f64();
    Verdict::new(
        agree == 20 && exhausted == 0 && secs < 600.0,
        format!("{agree}/20 instances match brute force ({solved} feasible, {exhausted} budget stops), {secs:.1}s"),
    )
}

fn pp(x: f64) -> String {
    format!("{x:.2}")
}

fn criterion_5() -> Verdict {
    let r = syn_runs();
    let mut pass = true;
    let mut parts = Vec::new();
    for p in [PolicyKind::OpackFirstFit, PolicyKind::OpackBestFit] {
        let (a, b) = (r.mean(p, 1, false), r.mean(p, 5, false));
        pass &= b - a >= 1.0;
        parts.push(format!("{} {}% -> {}% ({:+.2})", p.name(), pp(a), pp(b), b - a));
    }
    Verdict::new(pass && r.missing_fill == 0, parts.join("; "))
}

fn criterion_6() -> Verdict {
    let r = syn_runs();
    let mut pass = true;
    let mut parts = Vec::new();
    for l in LOOKAHEADS {
        let mpl = r.mean(PolicyKind::MpackLite, l, false);
        let off = r.mean(PolicyKind::OpackFirstFit, l, false);
        let obf = r.mean(PolicyKind::OpackBestFit, l, false);
        pass &= mpl - off >= -0.5 && off - obf >= -0.5;
        parts.push(format!("l={l}: MPL {} / O-FF {} / O-BF {}", pp(mpl), pp(off), pp(obf)));
    }
    Verdict::new(pass, parts.join("; "))
}

fn criterion_7() -> Verdict {
    let r = syn_runs();
    let mpl = r.mean(PolicyKind::MpackLite, 1, false);
    let off = r.mean(PolicyKind::OpackFirstFit, 1, false);
    Verdict::new(
        (63.0..=83.0).contains(&mpl) && (58.0..=79.0).contains(&off),
        format!("l=1: MPL {}% (band 63-83), O-FF {}% (band 58-79)", pp(mpl), pp(off)),
    )
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn median_step_time(kind: PolicyKind, l: usize) -> (f64, usize) {
    const BIN: [u32; 3] = [20, 12, 12];
    let mut times = Vec::new();
    let mut exhausted = 0;
    for seed in 0..6 {
        let boxes = gen_synthetic(BIN, 3, 4, 8, 100 + seed).unwrap().boxes;
        let cfg = EpisodeConfig::new(Policy::new(kind), l, BIN);
        let m = run_episode(&boxes, &cfg, seed).unwrap();
        exhausted += m.budget_exhausted_steps;
        times.extend(m.time_per_box);
    }
    (median(times), exhausted)
}

fn criterion_8() -> Verdict {
    let ls = [1usize, 2, 3, 4];
    let mpl: Vec<f64> = ls.iter().map(|&l| median_step_time(PolicyKind::MpackLite, l).0).collect();
    let mp: Vec<(f64, usize)> = ls.iter().map(|&l| median_step_time(PolicyKind::Mpack, l)).collect();
    // least-squares slope of log(time) against log(l)
    let xs: Vec<f64> = ls.iter().map(|&l| (l as f64).ln()).collect();
    let ys: Vec<f64> = mpl.iter().map(|t| t.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 4.0, ys.iter().sum::<f64>() / 4.0);
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let exponent = cov / var;
    let ratio = mp[3].0 / mp[0].0;
    let budget_stops: usize = mp.iter().map(|m| m.1).sum();
    let ms = |v: &[f64]| v.iter().map(|t| format!("{:.3}", t * 1e3)).collect::<Vec<_>>().join("/");
    Verdict::new(
        exponent <= 1.3 && ratio >= 4.0,
        format!(
            "MPL median ms {} (exponent {exponent:.2}); MP median ms {} (l=4 / l=1 = {ratio:.1}x, {budget_stops} budget stops)",
            ms(&mpl),
            ms(&mp.iter().map(|m| m.0).collect::<Vec<_>>())
        ),
    )
}

fn criterion_9() -> Verdict {
    let r = syn_runs();
    let mut pass = true;
    let mut parts = Vec::new();
    for l in LOOKAHEADS {
        let off = r.mean(PolicyKind::MpackLite, l, false);
        let on = r.mean(PolicyKind::MpackLite, l, true);
        pass &= (on - off).abs() <= 1.0;
        parts.push(format!("l={l}: off {} / on {} ({:+.2})", pp(off), pp(on), on - off));
    }
    Verdict::new(pass, parts.join("; "))
}

fn criterion_10() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xCA);
    let w = Weights::default();
    let mut mismatches = 0;
    let mut placed = 0;
    for _ in 0..1000 {
        let bin = [rng.gen_range(6..=30), rng.gen_range(6..=30), rng.gen_range(6..=30)];
        let n = rng.gen_range(1..=3);
        let (bins, id) = random_bins(&mut rng, n, bin, 20, 12, 1);
        let item = random_box(&mut rng, id, 1, 15);
        let cfg = random_config(&mut rng);
        let mode = if rng.gen_bool(0.5) { CandidateMode::Grid } else { CandidateMode::Extreme };
        let cases: [(Box<dyn PackRule>, Option<binpack3d_core::Placement>); 3] = [
            (Box::new(FirstFitRule { mode }), first_fit_with(&item, &bins, &cfg, mode).map(|d| d.placement)),
            (Box::new(BestFitRule { mode }), best_fit_with(&item, &bins, &cfg, mode).map(|d| d.placement)),
            (Box::new(MpackLiteRule { weights: w, mode }), packrule_mpl_with(&bins, &item, &cfg, &w, mode)),
        ];
        let mut same = true;
        for (rule, bare) in cases {
            let expected = bare.map_or(StepOutcome::Exhausted, |placement| StepOutcome::Placed { position: 0, placement });
            let step = opack_step(rule.as_ref(), &bins, &[item], &cfg, &w, SelectionRule::MinScore);
            placed += usize::from(expected != StepOutcome::Exhausted);
            same &= step == expected;
        }
        mismatches += usize::from(!same);
    }
    Verdict::new(mismatches == 0, format!("{mismatches} of 1000 states differ ({placed} of 3000 rule calls placed a box)"))
}

/// Two identical benchmark requests against the service, compared as the
/// metrics CSV and trace files the CLI would write from them.
fn criterion_11() -> Verdict {
    let collections: Vec<Vec<BoxDims>> = (0..5)
        .map(|k| gen_synthetic(SYN, 10, SYNTHETIC_MIN_SIDE, SYNTHETIC_MAX_SIDE, k).unwrap().boxes)
        .collect();
    let mut spec = BenchSpec::new(BASE_POLICIES.to_vec(), (1..=5).collect(), (0..5).collect(), "SYN", SYN);
    spec.record_timing = false;
    spec.keep_traces = true;
    let body = serde_json::to_string(&BenchRequest { spec, collections }).unwrap();
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build().unwrap();
    let run = || -> Option<BTreeMap<String, String>> {
        let res = runtime.block_on(async {
            let req = Request::post("/v1/bench")
                .header("content-type", "application/json")
                .body(Body::from(body.clone()))
                .unwrap();
            let res = binpack3d_server::router().oneshot(req).await.unwrap();
            let ok = res.status().is_success();
            (ok, res.into_body().collect().await.unwrap().to_bytes())
        });
        let (true, bytes) = res else { return None };
        let resp: BenchResponse = serde_json::from_slice(&bytes).ok()?;
        let rows: Vec<_> = resp.episodes.iter().map(|e| e.row.clone()).collect();
        let mut files = BTreeMap::from([("metrics.csv".to_string(), metrics_csv(&rows))]);
        for e in &resp.episodes {
            let r = &e.row;
            let name = format!("traces/trace_{}_l{}_s{}.json", r.policy.name(), r.lookahead, r.seed);
            files.insert(name, e.trace.as_ref()?.to_json());
        }
        Some(files)
    };
    let (Some(a), Some(b)) = (run(), run()) else {
        return Verdict::new(false, "bench request failed");
    };
    let differing = a.iter().filter(|(name, content)| b.get(*name) != Some(content)).count();
    Verdict::new(
        differing == 0 && a.len() == b.len() && a.len() == 1 + 5 * 5 * 5,
        format!("{} files compared across two runs, {differing} differ", a.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("feasibility of replayed traces", criterion_1),
        ("synthetic certificates", criterion_2),
        ("single-box score oracle", criterion_3),
        ("joint search oracle", criterion_4),
        ("virtual packing benefit", criterion_5),
        ("policy ordering", criterion_6),
        ("absolute fill-rate bands", criterion_7),
        ("time scaling", criterion_8),
        ("CEP neutrality for MPL", criterion_9),
        ("look-ahead 1 reduction", criterion_10),
        ("byte-identical reruns", criterion_11),
    ];
    let mut failed = Vec::new();
    for (n, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} [{tag}] {name}: {} ({:.1}s)", n + 1, v.detail, start.elapsed().as_secs_f64());
        if !v.pass {
            failed.push(n + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 11 criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
