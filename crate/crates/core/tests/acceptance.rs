//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use vmap::anneal::{accept, cooling_schedule};
use vmap::border::fixed_width_border;
use vmap::datasets::{bench_aspect_ratio, bench_optimize, builtin, lognormal_points, trial_rng, OptimizeRun};
use vmap::graph::LoadedGraph;
use vmap::metrics::{areal_error, contacts, CostWeights};
use vmap::partition::{best_cut, dar_partition};
use vmap::router::{channel_occludes, ego_network, route_query, RouteMode};
use vmap::{run_layout, LayoutOptions, Rect};

const PROPORTION_TOLERANCE: f64 = 1e-9;
const PROPORTION_TREES: usize = 500;
const PROPORTION_BUDGET: Duration = Duration::from_secs(30);
const ZERO_AREAL_TOLERANCE: f64 = 1e-9;
const RATIO_TRIALS: usize = 1000;
const RATIO_DAR_TARGET: f64 = 1.1111;
const RATIO_SEW_TARGET: f64 = 1.3303;
const RATIO_BAND: f64 = 0.10;
const RATIO_REPEATS: u64 = 3;
const RATIO_BUDGET: Duration = Duration::from_secs(120);
const CUT_CASES: usize = 200;
const BLOOD_STAGES: usize = 2048;
const BLOOD_TOTAL_ERROR: f64 = 0.25;
const BLOOD_BUDGET: Duration = Duration::from_secs(180);
const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
const CONTACT_LAYOUTS: usize = 1000;
const SAMPLE_STEP: f64 = 1.0;
const LENGTH_TOLERANCE: f64 = 1e-9;
const SCHEDULE_TOLERANCE: f64 = 1e-9;
const ACCEPT_DRAWS: usize = 100_000;
const ACCEPT_TARGET: f64 = 0.9048;
const ACCEPT_BAND: f64 = 0.01;

struct Outcome {
    pass: bool,
    detail: String,
}

type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn display() -> Rect {
    Rect::new(0.0, 0.0, 1200.0, 800.0)
}

fn proportion_preservation() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut failures = 0;
    for trial in 0..PROPORTION_TREES {
        let n = rng.random_range(10..=200);
        let d = [0.001, 0.005, 0.01, 0.02][trial % 4];
        let (raw, items) = random_feasible_tree(n, 100, trial as u64, d);
        match fixed_width_border(&raw, d) {
            Ok(adjusted) => worst = worst.max(max_share_deviation(&adjusted, &targets(&items))),
            Err(_) => failures += 1,
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures == 0 && worst < PROPORTION_TOLERANCE && elapsed < PROPORTION_BUDGET,
        format!("{PROPORTION_TREES} trees, max relative deviation {worst:.2e}, {failures} errors, {elapsed:.2?}"),
    )
}

fn zero_areal_error() -> Outcome {
    let mut worst = 0.0f64;
    for trial in 0..1000u64 {
        let mut rng = trial_rng(200, trial);
        let n = rng.random_range(1..=200);
        let r = rng.random_range(1.0..3.0);
        let items = lognormal_points(n, &mut rng);
        let rects = dar_partition(Rect::new(0.0, 0.0, r, 1.0), &items, r).leaf_rects(n);
        let props: Vec<f64> = items.iter().map(|i| i.weight).collect();
        worst = worst.max(areal_error(&props, &rects));
    }
    outcome(worst < ZERO_AREAL_TOLERANCE, format!("1000 inputs, max areal error {worst:.2e}"))
}

fn aspect_ratio_table() -> Outcome {
    let start = Instant::now();
    let runs: Vec<_> = (0..RATIO_REPEATS).map(|seed| bench_aspect_ratio(RATIO_TRIALS, 100, 1.5, seed)).collect();
    let elapsed = start.elapsed();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (dar, sew) = (mean(&runs[0].dar), mean(&runs[0].sew));
    let ordered = runs.iter().all(|b| mean(&b.dar) < mean(&b.sew));
    outcome(
        (dar - RATIO_DAR_TARGET).abs() <= RATIO_BAND
            && (sew - RATIO_SEW_TARGET).abs() <= RATIO_BAND
            && ordered
            && elapsed < RATIO_BUDGET,
        format!("DAR {dar:.4}, SEW {sew:.4}, DAR < SEW in all {RATIO_REPEATS} runs: {ordered}, {elapsed:.2?}"),
    )
}

fn cut_optimality() -> Outcome {
    let mut mismatches = 0;
    for case in 0..CUT_CASES as u64 {
        let mut rng = trial_rng(300, case);
        let n = rng.random_range(2..=5);
        let r = rng.random_range(1.0..2.5);
        let rect = Rect::new(0.0, 0.0, rng.random_range(0.5..3.0), rng.random_range(0.5..3.0));
        let items = lognormal_points(n, &mut rng);
        let choice = best_cut(rect, &items, r);
        let (orientation, count, _) = brute_force_cut(rect, &items, r);
        if (choice.orientation, choice.count) != (orientation, count) {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("{CUT_CASES} cases, {mismatches} mismatches"))
}

fn best_by_cost(runs: &[OptimizeRun]) -> &OptimizeRun {
    runs.iter().min_by(|a, b| a.cost.total_cmp(&b.cost)).expect("runs")
}

fn blood_optimization(blood: &LoadedGraph) -> Outcome {
    let start = Instant::now();
    let runs = bench_optimize(blood, CostWeights::default(), 1.5, display(), BLOOD_STAGES, &SEEDS);
    let elapsed = start.elapsed();
    match runs {
        Ok(runs) => {
            let best = best_by_cost(&runs);
            outcome(
                best.total_error <= BLOOD_TOTAL_ERROR && elapsed <= BLOOD_BUDGET,
                format!(
                    "best total error {:.2}% (areal {:.2}%, topological {:.2}%), {elapsed:.2?}",
                    100.0 * best.total_error,
                    100.0 * best.areal_error,
                    100.0 * best.topological_error
                ),
            )
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn tradeoff_direction(blood: &LoadedGraph) -> Outcome {
    let run = |t: f64| {
        let w = CostWeights::topology_tradeoff(t).expect("valid weights");
        bench_optimize(blood, w, 1.5, display(), BLOOD_STAGES, &SEEDS).expect("runs")
    };
    let (high, low) = (run(0.99), run(0.01));
    let med = |runs: &[OptimizeRun], f: fn(&OptimizeRun) -> f64| median(runs.iter().map(f).collect());
    let (t_hi, t_lo) = (med(&high, |r| r.topological_error), med(&low, |r| r.topological_error));
    let (a_hi, a_lo) = (med(&high, |r| r.areal_error), med(&low, |r| r.areal_error));
    outcome(
        t_hi < t_lo && a_hi > a_lo,
        format!(
            "median topological {:.2}% vs {:.2}%, median areal {:.2}% vs {:.2}%",
            100.0 * t_hi,
            100.0 * t_lo,
            100.0 * a_hi,
            100.0 * a_lo
        ),
    )
}

fn contact_oracle() -> Outcome {
    let mut mismatches = 0;
    for layout in 0..CONTACT_LAYOUTS as u64 {
        let mut rng = trial_rng(700, layout);
        let n = rng.random_range(1..=64);
        let rects = match layout % 3 {
            0 => {
                let items = lognormal_points(n, &mut rng);
                dar_partition(Rect::new(0.0, 0.0, 1200.0, 800.0), &items, 1.5).leaf_rects(n)
            }
            1 => {
                let (raw, _) = random_feasible_tree(n, 701, layout, 0.005);
                fixed_width_border(&raw, 0.005).map(|t| t.leaf_rects(n)).unwrap_or_default()
            }
            _ => random_grid_rects(n, &mut rng),
        };
        let eps = 1e-9 * 1200.0;
        if contacts(&rects, eps) != brute_force_contacts(&rects, eps) {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("{CONTACT_LAYOUTS} layouts, {mismatches} mismatches"))
}

fn routing() -> Outcome {
    let mut checked = 0;
    let mut occluded = 0;
    let mut length_errors = 0;
    let mut failures = Vec::new();
    for name in ["les-miserables", "netherlands"] {
        let loaded = builtin(name).expect("dataset");
        let options = LayoutOptions {
            stages: 256,
            seed: 11,
            ..LayoutOptions::default()
        };
        let doc = match run_layout(&loaded, &options) {
            Ok(out) => out.document,
            Err(e) => {
                failures.push(format!("{name}: {e}"));
                continue;
            }
        };
        let graph = doc.graph().expect("graph");
        let net = doc.network().expect("network");
        let rects = doc.rects();
        let mut channels = Vec::new();
        for v in 0..graph.len() {
            match ego_network(&net, &graph, v) {
                Ok(c) => channels.extend(c),
                Err(e) => failures.push(e.to_string()),
            }
        }
        let mut rng = trial_rng(800, 0);
        for _ in 0..100 {
            let a = rng.random_range(0..graph.len());
            let b = rng.random_range(0..graph.len());
            if a == b {
                continue;
            }
            for mode in [RouteMode::ShortestHop, RouteMode::Geometric] {
                if let Ok(route) = route_query(&net, &graph, a, b, mode) {
                    channels.extend(route.channels);
                }
            }
        }
        for ch in &channels {
            checked += 1;
            if channel_occludes(ch, &rects, SAMPLE_STEP) {
                occluded += 1;
            }
            let oracle = oracle_distance(&doc, ch.source, ch.target);
            if (ch.length - oracle).abs() > LENGTH_TOLERANCE * oracle.max(1.0) {
                length_errors += 1;
            }
        }
    }
    outcome(
        failures.is_empty() && occluded == 0 && length_errors == 0 && checked > 0,
        format!("{checked} channels, {occluded} occluded, {length_errors} length mismatches, {} errors", failures.len()),
    )
}

fn schedule_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(900);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let ns = rng.random_range(1..=20_000);
        let t_ub = rng.random_range(1.0..512.0);
        let t_lb = t_ub * rng.random_range(1e-7..0.99);
        let gamma = cooling_schedule(ns, t_ub, t_lb);
        worst = worst.max((t_ub * gamma.powi(ns as i32) - t_lb).abs());
    }
    let accepted = (0..ACCEPT_DRAWS).filter(|_| accept(0.0, 0.1, 256.0, &mut rng)).count();
    let freq = accepted as f64 / ACCEPT_DRAWS as f64;
    outcome(
        worst <= SCHEDULE_TOLERANCE && (freq - ACCEPT_TARGET).abs() <= ACCEPT_BAND,
        format!("max schedule error {worst:.2e}, acceptance frequency {freq:.4}"),
    )
}

fn determinism() -> Outcome {
    let mut identical = true;
    for name in ["blood", "les-miserables"] {
        let loaded = builtin(name).expect("dataset");
        let options = LayoutOptions {
            stages: 128,
            seed: 42,
            restarts: 3,
            precompute_ego: true,
            ..LayoutOptions::default()
        };
        let a = run_layout(&loaded, &options).map(|o| o.document.to_json());
        let b = run_layout(&loaded, &options).map(|o| o.document.to_json());
        identical &= matches!((&a, &b), (Ok(x), Ok(y)) if x == y);
    }
    outcome(identical, format!("documents byte-identical across runs: {identical}"))
}

fn dataset_structure() -> Outcome {
    let mut seen = Vec::new();
    let mut ok = true;
    for (name, v, e) in [("blood", 8, 19), ("netherlands", 12, 22), ("germany", 16, 28)] {
        let g = builtin(name).expect("dataset").graph;
        ok &= g.len() == v && g.edges().len() == e;
        seen.push(format!("{name} {}/{}", g.len(), g.edges().len()));
    }
    outcome(ok, seen.join(", "))
}

fn main() {
    let blood = builtin("blood").expect("dataset");
    let criteria: Vec<(&str, Check)> = vec![
        ("proportion preservation", Box::new(proportion_preservation)),
        ("DAR zero areal error", Box::new(zero_areal_error)),
        ("aspect ratio loss, DAR vs SEW", Box::new(aspect_ratio_table)),
        ("cut optimality oracle", Box::new(cut_optimality)),
        ("Blood optimization", Box::new(|| blood_optimization(&blood))),
        ("topology trade-off direction", Box::new(|| tradeoff_direction(&blood))),
        ("adjacency oracle", Box::new(contact_oracle)),
        ("routing occlusion and lengths", Box::new(routing)),
        ("schedule exactness", Box::new(schedule_exactness)),
        ("determinism", Box::new(determinism)),
        ("dataset structure", Box::new(dataset_structure)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("{} {:>2}. {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
