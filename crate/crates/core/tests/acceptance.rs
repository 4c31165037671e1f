//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use crnp::balance::{self, ComplexGraph};
use crnp::compose::{self, Rule, Verdict, Witness};
use crnp::fixtures;
use crnp::linalg::rat;
use crnp::network::{parse_network, ReactionNetwork, SpeciesSet};
use crnp::reduce;
use crnp::siphon;
use crnp::sim::{self, HistoryFunction, SimOptions, Window};
use crnp::stoich;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{brute_force_semilocking, random_network};

const SEED: u64 = 20_240_611;
const DELAYS: [f64; 4] = [0.0, 0.2, 0.5, 1.0];
const T_END: f64 = 50.0;
const STEP: f64 = 1e-3;

/// Drift bound: |a.g(x_t) - a.g(psi)| <= 1e-6 (1 + |a.g(psi)|).
const DRIFT_TOL: f64 = 1e-6;
/// Lyapunov slack per sample: 1e-8 (1 + V).
const LYAPUNOV_SLACK: f64 = 1e-8;
const LYAPUNOV_ZERO_TOL: f64 = 1e-12;
const BALANCE_RESIDUAL_TOL: f64 = 1e-9;
const RHS_TOL: f64 = 1e-8;
const DELAY_AGREEMENT_TOL: f64 = 1e-6;
const MIN_ORDER: f64 = 3.5;
const REDUCTION_TOL: f64 = 1e-8;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn set(v: &[usize]) -> SpeciesSet {
    SpeciesSet::from_iter(v.iter().copied())
}

fn semilocking_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut elapsed = Duration::ZERO;
    let mut mismatches = 0;
    let mut total_sets = 0;
    for _ in 0..100 {
        let net = random_network(&mut rng, 12, 20);
        let start = Instant::now();
        let fast: BTreeSet<BTreeSet<usize>> = siphon::enumerate_semilocking(&net, 24)
            .unwrap()
            .iter()
            .map(|r| r.members.iter().collect())
            .collect();
        elapsed += start.elapsed();
        let slow = brute_force_semilocking(&net);
        total_sets += slow.len();
        if fast != slow {
            mismatches += 1;
        }
    }
    outcome(
        mismatches == 0 && elapsed < Duration::from_secs(60),
        format!("100 networks, {total_sets} sets, {mismatches} mismatches, enumeration {:.2?}", elapsed),
    )
}

fn worked_example() -> Outcome {
    let net = parse_network("species X1 X2 X3\nX2 + X1 <-> 2 X1 [k=1,1]\nX3 + X1 <-> 2 X1 [k=1,1]").unwrap();
    let w = set(&[0]);
    let semilocking = siphon::is_semilocking(&net, &w).unwrap();
    let report = siphon::report_for(&net, &w).unwrap();
    let kernel_ok = report.face_kernel.dim() == 1 && {
        let v = &report.face_kernel.vectors[0];
        v[0] == rat(0) && v[1] != rat(0) && v[2] == -v[1].clone()
    };
    let sr_ok = report.complement_partition.sr == set(&[1, 2]);
    outcome(
        semilocking && kernel_ok && sr_ok,
        format!(
            "semilocking={semilocking}, kernel={:?}, sr={:?}",
            report.face_kernel.as_strings(),
            report.complement_partition.sr.names(&net)
        ),
    )
}

fn rank_nullity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let mut failures = 0;
    for _ in 0..1000 {
        let net = random_network(&mut rng, 10, 12);
        let n = net.n_species();
        let w: SpeciesSet = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        let face = stoich::face_dimension(&net, &w).unwrap();
        let proj = stoich::projected_dimension(&net, &w).unwrap();
        if face + proj != stoich::dimension(&net) {
            failures += 1;
        }
    }
    outcome(failures == 0, format!("1000 pairs, {failures} failures"))
}

fn complex_balance() -> Outcome {
    let start = Instant::now();
    let ab = fixtures::net_ab();
    let at_one = balance::is_complex_balanced_at(&ab, &[1.0, 1.0], BALANCE_RESIDUAL_TOL).unwrap();
    let found = balance::find_complex_balanced_equilibrium(&ab).unwrap();
    let ab_ok = at_one.complex_balanced
        && at_one.residual == 0.0
        && found.concentrations.iter().all(|x| (x - 1.0).abs() < 1e-12);

    let candidates: Vec<ReactionNetwork> = fixtures::ALL
        .iter()
        .map(|(_, t)| parse_network(t).unwrap())
        .filter(|n| balance::deficiency(n) == 0 && balance::is_weakly_reversible(&ComplexGraph::new(n)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let mut worst_residual: f64 = 0.0;
    let mut worst_rhs: f64 = 0.0;
    let mut failures = 0;
    for trial in 0..50 {
        let base = &candidates[trial % candidates.len()];
        let rates: Vec<f64> = (0..base.n_reactions()).map(|_| rng.gen_range(0.1f64.ln()..10f64.ln()).exp()).collect();
        let net = base.with_rates(&rates);
        match balance::find_complex_balanced_equilibrium(&net) {
            Ok(eq) => {
                let rhs = balance::species_rhs(&net, &eq.concentrations)
                    .iter()
                    .fold(0.0f64, |m, v| m.max(v.abs()));
                worst_residual = worst_residual.max(eq.residual);
                worst_rhs = worst_rhs.max(rhs);
            }
            Err(_) => failures += 1,
        }
    }
    let elapsed = start.elapsed();
    outcome(
        ab_ok
            && failures == 0
            && worst_residual <= BALANCE_RESIDUAL_TOL
            && worst_rhs <= RHS_TOL
            && elapsed < Duration::from_secs(30),
        format!(
            "NET_AB residual {:e}; {} fixtures, 50 rate draws, {failures} failures, worst residual {worst_residual:e}, worst rhs {worst_rhs:e}, {:.2?}",
            at_one.residual,
            candidates.len(),
            elapsed
        ),
    )
}

fn certificates() -> Outcome {
    let trio = fixtures::net_trio();
    let cert = compose::certify_persistence(&trio, 24).unwrap();
    let got: Vec<(Vec<usize>, Rule)> = cert
        .records
        .iter()
        .map(|r| (r.report.members.to_vec(), r.discharge.rule))
        .collect();
    let want = vec![
        (vec![0], Rule::R1),
        (vec![0, 1], Rule::R2),
        (vec![0, 2], Rule::R2),
        (vec![0, 1, 2], Rule::TrivialConservation),
    ];
    let trio_ok = cert.verdict == Verdict::Persistent && got == want;

    let comb = fixtures::net_comb_open();
    let cc = compose::certify_persistence(&comb, 24).unwrap();
    let case3 = cc
        .records
        .iter()
        .filter(|r| matches!(r.discharge.rule, Rule::R3 | Rule::R4))
        .count();
    let comb_ok = cc.verdict == Verdict::Persistent && case3 > 0;

    let semi = fixtures::net_semi();
    let w = set(&[0, 1]);
    let report = siphon::report_for(&semi, &w).unwrap();
    let dec = compose::decompose_or_single(&semi);
    let analysis = compose::case_label(&semi, &dec, &w).unwrap();
    let rules = compose::applicable_rules(&semi, &report, &analysis).unwrap();
    let r8 = rules.iter().find(|d| d.rule == Rule::R8);
    let semi_ok = matches!(
        r8.map(|d| &d.witness),
        Some(Witness::ReducedDims { reduced_dim: 1, set_size: 2 })
    ) && compose::verify_discharge(&semi, &w, r8.unwrap());

    outcome(
        trio_ok && comb_ok && semi_ok,
        format!(
            "NET_TRIO {} {:?}; NET_COMB_OPEN {} with {case3} R3/R4; NET_SEMI R8 witness {:?}",
            cert.verdict.label(),
            got.iter().map(|(_, r)| r.label()).collect::<Vec<_>>(),
            cc.verdict.label(),
            r8.map(|d| &d.witness)
        ),
    )
}

struct Run {
    name: &'static str,
    tau: f64,
    net: ReactionNetwork,
    report: sim::RunReport,
    xbar: Vec<f64>,
}

fn runs() -> Vec<Run> {
    let mut out = Vec::new();
    for (name, base, psi) in [
        ("NET_AB", fixtures::net_ab(), vec![2.0, 0.5]),
        ("NET_TRIO", fixtures::net_trio(), vec![2.0, 0.5, 1.0]),
    ] {
        for tau in DELAYS {
            let net = base.with_delays(&vec![tau; base.n_reactions()]);
            let opts = SimOptions {
                sample_every: Some(10),
                ..Default::default()
            };
            let (_, report) = sim::simulate_with(&net, &HistoryFunction::Constant(psi.clone()), T_END, STEP, &opts)
                .expect("fixture run");
            let xbar = report.lyapunov_reference.clone().expect("complex balanced fixture");
            out.push(Run {
                name,
                tau,
                net,
                report,
                xbar,
            });
        }
    }
    out
}

fn conservation(runs: &[Run]) -> Outcome {
    let worst = runs
        .iter()
        .map(|r| r.report.conservation_drift)
        .fold(0.0, f64::max);
    let detail: Vec<String> = runs
        .iter()
        .map(|r| format!("{} tau={}: {:.1e}", r.name, r.tau, r.report.conservation_drift))
        .collect();
    outcome(worst < DRIFT_TOL, format!("worst drift {worst:.2e} [{}]", detail.join(", ")))
}

fn lyapunov(runs: &[Run]) -> Outcome {
    let mut worst_increase = f64::NEG_INFINITY;
    let mut min_v = f64::INFINITY;
    let mut monotone = true;
    let mut zero_ok = true;
    let mut worst_zero: f64 = 0.0;
    for r in runs {
        for pair in r.report.lyapunov_series.windows(2) {
            let (v0, v1) = (pair[0].1, pair[1].1);
            worst_increase = worst_increase.max((v1 - v0) / (1.0 + v0));
            if v1 - v0 > LYAPUNOV_SLACK * (1.0 + v0) {
                monotone = false;
            }
        }
        for &(_, v) in &r.report.lyapunov_series {
            min_v = min_v.min(v);
        }
        let at_eq = Window::constant(&r.xbar, r.tau, STEP);
        let v = sim::lyapunov_value(&r.net, &r.xbar, &at_eq).unwrap();
        worst_zero = worst_zero.max(v.abs());
        zero_ok &= v.abs() <= LYAPUNOV_ZERO_TOL;
    }
    outcome(
        monotone && min_v >= 0.0 && zero_ok,
        format!("largest relative increase {worst_increase:.2e}, min V {min_v:.2e}, V at equilibrium {worst_zero:.1e}"),
    )
}

fn delay_independence(runs: &[Run]) -> Outcome {
    let ab: Vec<&Run> = runs.iter().filter(|r| r.name == "NET_AB").collect();
    let mut worst: f64 = 0.0;
    for a in &ab {
        for b in &ab {
            for (x, y) in a.report.terminal_state.iter().zip(&b.report.terminal_state) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    outcome(
        worst <= DELAY_AGREEMENT_TOL,
        format!("{} delay settings, largest pairwise gap {worst:.2e}", ab.len()),
    )
}

fn integrator_order() -> Outcome {
    let steps = [0.1, 0.05, 0.025, 0.0125];
    let mut lines = Vec::new();
    let mut pass = true;
    for tau in [0.0, 0.2] {
        let net = fixtures::net_ab().with_delays(&[tau, tau]);
        let psi = HistoryFunction::Constant(vec![2.0, 0.5]);
        let finals: Vec<Vec<f64>> = steps
            .iter()
            .map(|&h| sim::integrate(&net, &psi, 2.0, h).unwrap().terminal().to_vec())
            .collect();
        let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let orders: Vec<f64> = (0..steps.len() - 2)
            .map(|i| (diff(&finals[i], &finals[i + 1]) / diff(&finals[i + 1], &finals[i + 2])).log2())
            .collect();
        pass &= orders.iter().all(|&p| p >= MIN_ORDER);
        lines.push(format!(
            "tau={tau}: {}",
            orders.iter().map(|p| format!("{p:.2}")).collect::<Vec<_>>().join(", ")
        ));
    }
    outcome(pass, format!("measured orders {}", lines.join("; ")))
}

fn reduction_consistency() -> Outcome {
    let net = fixtures::net_trio();
    let w = set(&[0]);
    let traj = sim::integrate(&net, &HistoryFunction::Constant(vec![2.0, 0.5, 1.0]), 10.0, 1e-3).unwrap();
    let rs = reduce::reduce_on(&net, &w).unwrap();
    let kept = w.to_vec();
    let origin = traj.origin();
    let last = traj.len() - 1;
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let i = origin + (k * (last - origin)) / 99;
        let full = traj.state(i);
        let pick = |x: &[f64]| kept.iter().map(|&s| x[s]).collect::<Vec<f64>>();
        let delayed_rows: Vec<&[f64]> = rs
            .reactions
            .iter()
            .map(|r| traj.state(i - traj.delay_offsets[r.source]))
            .collect();
        let kept_delayed: Vec<Vec<f64>> = delayed_rows.iter().map(|x| pick(x)).collect();
        let mod_now: Vec<f64> = rs.reactions.iter().map(|r| r.modulation_at(full)).collect();
        let mod_delayed: Vec<f64> = rs
            .reactions
            .iter()
            .zip(&delayed_rows)
            .map(|(r, x)| r.modulation_at(x))
            .collect();
        let reduced = rs.rhs(&pick(full), &kept_delayed, &mod_now, &mod_delayed);
        let projected = pick(traj.derivative(i).unwrap());
        for (a, b) in reduced.iter().zip(&projected) {
            worst = worst.max((a - b).abs());
        }
    }
    outcome(worst <= REDUCTION_TOL, format!("100 sample times, largest gap {worst:.2e}"))
}

fn main() -> ExitCode {
    let sim_runs = runs();
    let results: Vec<(&str, Outcome)> = vec![
        ("semilocking oracle equivalence", semilocking_oracle()),
        ("worked example W={X1}", worked_example()),
        ("rank-nullity", rank_nullity()),
        ("complex balance", complex_balance()),
        ("certificate end-to-end", certificates()),
        ("DDE conservation", conservation(&sim_runs)),
        ("Lyapunov monotonicity", lyapunov(&sim_runs)),
        ("delay-independence of equilibria", delay_independence(&sim_runs)),
        ("integrator order", integrator_order()),
        ("reduction consistency", reduction_consistency()),
    ];
    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag}: {name}: {}", i + 1, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
