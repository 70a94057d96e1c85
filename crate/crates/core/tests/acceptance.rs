//! One PASS/FAIL line per acceptance criterion. Exits non-zero if any fails.
//! The Figure 2 and consistency criteria share one full-scale run.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::oracle::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seqmodel::baselines::propositions::{proposition1, proposition2};
use seqmodel::baselines::{guaranteed_value, kuhn_equilibrium, kuhn_game_value, ResponseKind};
use seqmodel::bayes::{gradient, neg_log_posterior, DirichletPrior};
use seqmodel::fmap::{dykstra_project, DykstraConfig, Projector, Termination};
use seqmodel::game::kuhn;
use seqmodel::sim::{run_experiment, ExperimentTable, MatchConfig};
use seqmodel::{ratio, ExactSeqGame, Player, Rational, Scalar};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn run(name: &str, limit: Option<Duration>, check: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let Outcome { mut pass, detail } = check();
    let took = start.elapsed();
    if let Some(limit) = limit {
        pass &= took < limit;
    }
    println!("{} {name}: {detail} [{:.2?}]", if pass { "PASS" } else { "FAIL" }, took);
    pass
}

fn tables() -> Outcome {
    let bad = common::table_mismatches();
    let head: Vec<_> = bad.iter().take(3).cloned().collect();
    outcome(bad.is_empty(), format!("{} mismatches in E, F, A and 30 observability rows {head:?}", bad.len()))
}

fn game_value() -> Outcome {
    let g = ExactSeqGame::derive(&kuhn::<Rational>().0).unwrap();
    let steps = 60;
    let mut worst = 0.0f64;
    let mut exact = true;
    for i in 0..=steps {
        let x = kuhn_equilibrium(&g, ratio(i, 3 * steps)).unwrap();
        let v = guaranteed_value(&g, &x).unwrap();
        exact &= v == kuhn_game_value::<Rational>();
        worst = worst.max((v - kuhn_game_value::<Rational>()).as_f64().abs());
    }
    outcome(worst <= 1e-10, format!("{} members α = i/180, max |v + 1/18| = {worst:.1e}, exact: {exact}", steps + 1))
}

fn gradients() -> Outcome {
    let mut worst = 0.0f64;
    let cases = 200;
    for case in 0..cases {
        let (tree, obs, g) = if case % 2 == 0 { kuhn_game() } else { rps_game() };
        let mut r = ChaCha8Rng::seed_from_u64(1000 + case as u64);
        let prior = DirichletPrior::symmetric(&g, Player::Two, 1.0 + 4.0 * r.gen::<f64>()).unwrap();
        let hands = r.gen_range(0..60);
        let log = random_log(tree.leaves().len(), &g, &obs, hands, &mut r);
        let y = g.behavioral_to_realization(Player::Two, &random_behavior(&g, Player::Two, 0.5, &mut r)).unwrap();
        let grad = gradient(y.as_slice(), &prior, &log).unwrap();
        let h = 1e-6;
        for i in 0..y.len() {
            let mut up = y.as_slice().to_vec();
            let mut down = up.clone();
            up[i] += h;
            down[i] -= h;
            let fd = (neg_log_posterior(&up, &prior, &log).unwrap() - neg_log_posterior(&down, &prior, &log).unwrap()) / (2.0 * h);
            worst = worst.max((fd - grad[i]).abs());
        }
    }
    outcome(worst < 1e-5, format!("{cases} instances (Kuhn and RPS), max |fd - analytic| = {worst:.2e}"))
}

fn projections() -> Outcome {
    let (_, _, g) = kuhn_game();
    let (e, rhs) = (g.constraint(Player::Two), g.constraint_rhs(Player::Two));
    let p = Projector::new(e, rhs, 1e-6).unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(7);
    let (mut kkt, mut idem, mut dyk) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let scale = 0.1 + 4.9 * r.gen::<f64>();
        let z: Vec<f64> = (0..p.dim()).map(|_| scale * (2.0 * r.gen::<f64>() - 0.5)).collect();
        let y = p.project(&z).unwrap();
        kkt = kkt.max(p.kkt_residual(&z, &y));
        let again = p.project(&y).unwrap();
        idem = idem.max(y.iter().zip(&again).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        let d = dykstra_project(e, rhs, 1e-6, &z, DykstraConfig::default()).unwrap();
        dyk = dyk.max(y.iter().zip(&d).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    outcome(
        kkt <= 1e-8 && idem <= 1e-9 && dyk <= 1e-6,
        format!("100 points, KKT residual {kkt:.1e}, idempotence {idem:.1e}, Dykstra gap {dyk:.1e}"),
    )
}

fn prop1() -> Outcome {
    let r = proposition1(10_000).unwrap();
    outcome(
        r.min_distance >= 0.2,
        format!("min BBR distance to σ* for t <= 10000 is {:.4} (t = {})", r.min_distance, r.argmin),
    )
}

fn prop2() -> Outcome {
    let r = proposition2(3_000).unwrap();
    let pass = r.final_weight > 0.99 && r.settled_at.is_some() && r.monotone_after_settling && r.ratio_rel_error <= 1e-9;
    outcome(
        pass,
        format!(
            "weight of s1 {:.6} at t = 3000, above 0.99 from t = {:?}, ratio rel. error {:.1e}",
            r.final_weight, r.settled_at, r.ratio_rel_error
        ),
    )
}

fn fully_observed() -> Outcome {
    let cases = 50;
    let (mut worst, mut failed, mut capped) = (0.0f64, 0, 0);
    for case in 0..cases {
        let (_, _, g) = if case % 2 == 0 { kuhn_game() } else { rps_game() };
        let r = fully_observed_error(&g, &mut ChaCha8Rng::seed_from_u64(5000 + case as u64));
        worst = worst.max(r.error);
        failed += usize::from(r.error >= 1e-5);
        capped += usize::from(r.termination == Termination::MaxIterations);
    }
    outcome(
        failed == 0,
        format!("{cases} cases, {failed} off by >= 1e-5, max error {worst:.1e}, {capped} hit the iteration cap"),
    )
}

const CHECKPOINTS: [usize; 5] = [10, 100, 500, 1000, 3000];

fn consistency(table: &ExperimentTable) -> Outcome {
    let dist = |k: ResponseKind, t: usize| table.mean_at(k, t).and_then(|r| r.mean_model_l2).unwrap_or(f64::NAN);
    let fmap: Vec<f64> = CHECKPOINTS.iter().map(|&t| dist(ResponseKind::Fmap, t)).collect();
    let decreasing = fmap.windows(2).all(|w| w[1] < w[0]);
    let last = fmap[fmap.len() - 1];
    let sampling: Vec<(ResponseKind, f64)> =
        [ResponseKind::Bbr, ResponseKind::Map, ResponseKind::Thompson].iter().map(|&k| (k, dist(k, 3000))).collect();
    let above = sampling.iter().all(|&(_, d)| d > last);
    let fmt: Vec<String> = CHECKPOINTS.iter().zip(&fmap).map(|(t, d)| format!("t={t}: {d:.4}")).collect();
    let others: Vec<String> = sampling.iter().map(|(k, d)| format!("{k} {d:.4}")).collect();
    outcome(
        decreasing && last < 0.1 && above,
        format!(
            "FMAP mean distance {} (decreasing: {decreasing}, < 0.1: {}); at t=3000 {}",
            fmt.join(", "),
            last < 0.1,
            others.join(", ")
        ),
    )
}

fn figure2(table: &ExperimentTable) -> Outcome {
    let targets = [
        (ResponseKind::BestResponse, 0.576, 0.04),
        (ResponseKind::Fmap, 0.573, 0.04),
        (ResponseKind::Bbr, 0.557, 0.04),
        (ResponseKind::Thompson, 0.547, 0.04),
        (ResponseKind::Map, 0.537, 0.04),
        (ResponseKind::BestNash, 0.173, 0.03),
    ];
    let value = |k| table.final_mean_payoff(k).unwrap_or(f64::NAN);
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, want, tol) in targets {
        let got = value(k);
        let ok = (got - want).abs() <= tol;
        pass &= ok;
        parts.push(format!("{k} {got:.4} ({:+.4}{})", got - want, if ok { "" } else { " out of range" }));
    }
    let fmap = value(ResponseKind::Fmap);
    let nash = value(ResponseKind::BestNash);
    let ordered = [ResponseKind::Bbr, ResponseKind::Map, ResponseKind::Thompson]
        .iter()
        .all(|&k| fmap > value(k) && value(k) > nash);
    outcome(pass && ordered, format!("{}; FMAP > sampling > BestNash: {ordered}", parts.join(", ")))
}

fn determinism() -> Outcome {
    let config = MatchConfig { opponents: 6, iterations: 300, seed: 7, ..MatchConfig::default() };
    let csvs = |jobs| {
        let t = run_experiment(&config, jobs).unwrap();
        let (mut rec, mut agg) = (Vec::new(), Vec::new());
        t.write_records_csv(&mut rec).unwrap();
        t.write_aggregate_csv(&mut agg).unwrap();
        (rec, agg)
    };
    let serial = csvs(1);
    let parallel = csvs(0);
    let again = csvs(1);
    let same = serial == parallel && serial == again;
    outcome(
        same,
        format!(
            "{} opponents x {} iterations, three runs (serial, parallel, serial), {} + {} bytes, identical: {same}",
            config.opponents,
            config.iterations,
            serial.0.len(),
            serial.1.len()
        ),
    )
}

fn main() -> ExitCode {
    let mut ok = true;
    ok &= run("table exactness", Some(Duration::from_secs(1)), tables);
    ok &= run("game value", Some(Duration::from_secs(1)), game_value);
    ok &= run("gradient correctness", None, gradients);
    ok &= run("projection correctness", None, projections);
    ok &= run("proposition 1", None, prop1);
    ok &= run("proposition 2", None, prop2);
    ok &= run("fully observed FMAP", None, fully_observed);
    ok &= run("determinism", None, determinism);

    let start = Instant::now();
    let table = run_experiment(&MatchConfig::default(), 0).expect("full-scale run");
    let took = start.elapsed();
    println!("full-scale run: {} opponents x {} iterations in {took:.2?}", table.config.opponents, table.config.iterations);
    ok &= run("consistency", None, || consistency(&table));
    ok &= run("figure 2", None, || figure2(&table));

    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
