//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::time::Instant;

use num_complex::Complex64 as C64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spinamp::algebra::{
    apply_spec, realize_dense, realize_sparse, BitConfig, StateVector, DENSE_CAP,
};
use spinamp::automaton::{ca_run, ca_vs_hamiltonian_report, Parity};
use spinamp::basis::{conjugate_hamiltonian, mirror_map};
use spinamp::chains::{
    cluster_chain, exchange_chain, wall_observable, ChainFamily, CouplingProfile, StarLayout,
};
use spinamp::evolution::{
    amplification_check, max_fidelity_scan, phase_separability_probe, pst_time,
    transfer_fidelity, Propagator, ScanOptions,
};
use spinamp::experiments::{
    dephasing_entries, random_profile, run, star_report, write_atomic, Command, ExperimentConfig,
};
use spinamp::noise::{noise_sweep, NoiseConfig};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn engineered(n: usize) -> CouplingProfile {
    CouplingProfile::engineered(n).unwrap()
}

fn cluster_propagator(profile: &CouplingProfile) -> Propagator {
    Propagator::dense(&cluster_chain(profile).unwrap()).unwrap()
}

/// Basis permutation of `C_2^1 ... C_N^{N-1}`, applying `C_N^{N-1}` first.
fn cnot_ladder(n: usize) -> Vec<usize> {
    let cnot = |b: usize, control: usize, target: usize| {
        if b >> (control - 1) & 1 == 1 { b ^ (1 << (target - 1)) } else { b }
    };
    (0..1usize << n)
        .map(|b| (2..=n).rev().fold(b, |s, control| cnot(s, control, control - 1)))
        .collect()
}

fn conjugation_identity() -> Outcome {
    let mut worst_sym = 0.0f64;
    let mut worst_dense = 0.0f64;
    let mut mismatched = Vec::new();
    for n in 2..=10 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + n as u64);
        let perm = cnot_ladder(n);
        for k in 0..20 {
            let profile = random_profile(n, &mut rng).unwrap();
            let ex = exchange_chain(&profile).unwrap();
            let h = cluster_chain(&profile).unwrap();
            let image = conjugate_hamiltonian(&ex);
            let target = h.canonical();
            let same_terms = image.terms().len() == target.terms().len()
                && image.terms().iter().zip(target.terms()).all(|(a, b)| a.string() == b.string());
            let sym = image.max_coefficient_difference(&target);
            worst_sym = worst_sym.max(sym);
            let m_ex = realize_dense(&ex).unwrap();
            let m_h = realize_dense(&h).unwrap();
            let mut dense = 0.0f64;
            for j in 0..m_ex.ncols() {
                for i in 0..m_ex.nrows() {
                    dense = dense.max((m_h[(perm[i], perm[j])] - m_ex[(i, j)]).norm());
                }
            }
            worst_dense = worst_dense.max(dense);
            if !same_terms || sym >= 1e-12 || dense >= 1e-12 {
                mismatched.push(format!("N={n}#{k}"));
            }
        }
    }
    outcome(
        mismatched.is_empty(),
        format!(
            "N=2..10 x 20 profiles: max symbolic dev {worst_sym:.2e}, max dense dev {worst_dense:.2e}{}",
            if mismatched.is_empty() { String::new() } else { format!(", failing {mismatched:?}") }
        ),
    )
}

fn symmetry() -> Outcome {
    let mut worst = 0.0f64;
    for n in 2..=10 {
        let w = realize_sparse(&wall_observable(n).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + n as u64);
        let mut profiles = vec![engineered(n), CouplingProfile::uniform(n).unwrap()];
        profiles.extend((0..5).map(|_| random_profile(n, &mut rng).unwrap()));
        for p in &profiles {
            let h = realize_sparse(&cluster_chain(p).unwrap()).unwrap();
            worst = worst.max(h.commutator_max_abs(&w));
        }
    }
    outcome(worst < 1e-12, format!("max |[H, sum ZZ + Z_N]| over N=2..10: {worst:.2e}"))
}

fn perfect_amplification() -> Outcome {
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    let mut worst_fid = 1.0f64;
    let mut worst_residual = 0.0f64;
    for n in 2..=10 {
        let prop = cluster_propagator(&engineered(n));
        let rec = amplification_check(&prop, s, s, pst_time(n)).unwrap();
        worst_fid = worst_fid.min(rec.fidelity);
        let zero = StateVector::basis(&BitConfig::zeros(n));
        let h_zero = apply_spec(prop.spec(), &zero).unwrap();
        let action = h_zero.iter().map(|a| a.norm()).fold(0.0, f64::max);
        let out = prop.evolve(&zero, pst_time(n)).unwrap();
        let drift = out
            .amplitudes()
            .iter()
            .zip(zero.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        worst_residual = worst_residual.max(action).max(drift);
    }
    outcome(
        worst_fid >= 1.0 - 1e-8 && worst_residual < 1e-12,
        format!("min fidelity over N=2..10: {worst_fid:.12}, all-zeros residual {worst_residual:.2e}"),
    )
}

fn uniform_imperfection() -> Outcome {
    let options = ScanOptions::default();
    let mut parts = Vec::new();
    let mut pass = true;
    for n in [4, 5, 6] {
        let prop = cluster_propagator(&CouplingProfile::uniform(n).unwrap());
        let r = max_fidelity_scan(
            &prop,
            &BitConfig::single(n, 1).unwrap(),
            &BitConfig::ones(n),
            &options,
        )
        .unwrap();
        let ok = r.fidelity < 1.0 - 1e-3;
        pass &= ok;
        parts.push(format!(
            "N={n} max {:.6} at t={:.3} ({})",
            r.fidelity,
            r.time,
            if ok { "ok" } else { "not below 1-1e-3" }
        ));
    }
    for (n, t) in [(2, PI / 2.0), (3, PI / 2f64.sqrt())] {
        let prop = cluster_propagator(&CouplingProfile::uniform(n).unwrap());
        let f = transfer_fidelity(&prop, &BitConfig::single(n, 1).unwrap(), &BitConfig::ones(n), t)
            .unwrap();
        let ok = f >= 1.0 - 1e-8;
        pass &= ok;
        parts.push(format!("N={n} F(t={t:.6})={f:.12}"));
    }
    outcome(pass, parts.join("; "))
}

fn mirror_and_automaton() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for n in [6, 8] {
        let prop = cluster_propagator(&engineered(n));
        let u = prop.unitary(pst_time(n)).unwrap();
        let min_amp = BitConfig::all(n)
            .map(|b| u[(mirror_map(&b).index(), b.index())].norm())
            .fold(1.0, f64::min);
        let report = ca_vs_hamiltonian_report(&engineered(n)).unwrap();
        let run = ca_run(&BitConfig::single(n, 1).unwrap(), n - 1, Parity::Even);
        let first_full = run.trajectory.iter().position(|b| *b == BitConfig::ones(n));
        let ok = min_amp >= 1.0 - 1e-8 && report.all_agree() && first_full == Some(n - 1);
        pass &= ok;
        parts.push(format!(
            "N={n}{}: min |<mirror|U|b>| {min_amp:.12}, {} rows agree={}, CA all-ones at half-step {:?}",
            if n == 8 { " (slow tier)" } else { "" },
            report.rows.len(),
            report.all_agree(),
            first_full
        ));
    }
    outcome(pass, parts.join("; "))
}

fn transfer_on_cluster_chain() -> Outcome {
    let n = 6;
    let prop = cluster_propagator(&engineered(n));
    let mut worst = 1.0f64;
    for site in 2..=n {
        let f = transfer_fidelity(
            &prop,
            &BitConfig::single(n, site).unwrap(),
            &BitConfig::single(n, n + 2 - site).unwrap(),
            PI / 2.0,
        )
        .unwrap();
        worst = worst.min(f);
    }
    outcome(worst >= 1.0 - 1e-8, format!("N=6 sites 2..6 -> N+2-n: min probability {worst:.12}"))
}

fn phase_separability() -> Outcome {
    let n = 6;
    let t = pst_time(n);
    let cluster = phase_separability_probe(&cluster_propagator(&engineered(n)), ChainFamily::Cluster, t)
        .unwrap();
    let ex_prop = Propagator::dense(&exchange_chain(&engineered(n)).unwrap()).unwrap();
    let exchange = phase_separability_probe(&ex_prop, ChainFamily::Exchange, t).unwrap();
    let cluster_ok = cluster.degenerate_pairs() == 0 && cluster.max_abs_deviation() < 1e-6;
    let common = exchange.common_deviation(1e-6);
    let exchange_ok = exchange.degenerate_pairs() == 0 && common.is_some_and(|d| d.abs() > 1e-6);
    outcome(
        cluster_ok && exchange_ok,
        format!(
            "H: max |deviation| {:.2e} over {} pairs; H_ex: constant deviation {} over {} pairs",
            cluster.max_abs_deviation(),
            cluster.pairs.len(),
            common.map_or("none".to_string(), |d| format!("{d:.12}")),
            exchange.pairs.len()
        ),
    )
}

fn star_geometry() -> Outcome {
    let layout = StarLayout::new(3, engineered(3)).unwrap();
    let r = star_report(&layout, PI / 2.0).unwrap();
    let max_comm = r.commutators.iter().fold(0.0f64, |m, c| m.max(c.2));
    let min_spike = r.spike_all_ones.iter().copied().fold(1.0, f64::min);
    outcome(
        max_comm < 1e-12 && r.product_deviation < 1e-10 && min_spike >= 1.0 - 1e-8,
        format!(
            "R=3 L=3: max commutator {max_comm:.2e}, |U_star - prod U_r| {:.2e}, min spike all-ones {min_spike:.12}",
            r.product_deviation
        ),
    )
}

fn noise_comparison() -> Outcome {
    let p_grid = [0.0, 0.02, 0.05, 0.1, 0.15, 0.2];
    let base = NoiseConfig { p: 0.0, steps: 25, trials: 10_000, seed: 2024 };
    let entries = dephasing_entries(&engineered(6), base.steps).unwrap();
    let records = noise_sweep(&entries, &p_grid, &base).unwrap();
    let series = |label: &str| -> Vec<(f64, f64)> {
        records
            .iter()
            .filter(|r| r.hamiltonian == label)
            .map(|r| (r.mean_fidelity, r.standard_error))
            .collect()
    };
    let (cl, ex) = (series("cluster"), series("exchange"));
    let mut problems = Vec::new();
    for (name, s) in [("cluster", &cl), ("exchange", &ex)] {
        if (s[0].0 - 1.0).abs() > 1e-6 {
            problems.push(format!("{name} p=0 gives {}", s[0].0));
        }
        for k in 1..s.len() {
            let slack = 3.0 * (s[k].1.powi(2) + s[k - 1].1.powi(2)).sqrt();
            if s[k].0 > s[k - 1].0 + slack {
                problems.push(format!("{name} rises at p={}", p_grid[k]));
            }
        }
    }
    for k in 0..p_grid.len() {
        let slack = 3.0 * (cl[k].1.powi(2) + ex[k].1.powi(2)).sqrt();
        if cl[k].0 + slack < ex[k].0 {
            problems.push(format!("cluster below exchange at p={}", p_grid[k]));
        }
    }
    let curve = |s: &[(f64, f64)]| s.iter().map(|x| format!("{:.4}", x.0)).collect::<Vec<_>>().join(" ");
    outcome(
        problems.is_empty(),
        format!(
            "F_cluster [{}] vs F_exchange [{}]{}",
            curve(&cl),
            curve(&ex),
            if problems.is_empty() { String::new() } else { format!("; {}", problems.join(", ")) }
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{"n_sites": 6, "trials": 2000, "seed": 99}"#;
    let mut outputs = Vec::new();
    for (i, threads) in [1, 4, 4].into_iter().enumerate() {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let artifact = pool
            .install(|| run(Command::NoiseSweep, ExperimentConfig::from_json(config).unwrap()))
            .unwrap();
        let path = dir.path().join(format!("sweep{i}.csv"));
        write_atomic(&path, &artifact.contents).unwrap();
        outputs.push(std::fs::read(&path).unwrap());
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    outcome(
        same,
        format!("noise-sweep files (threads 1, 4, 4): {} bytes, identical={same}", outputs[0].len()),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    const { assert!(DENSE_CAP >= 10) };
    let criteria: [Criterion; 10] = [
        ("conjugation identity", conjugation_identity),
        ("domain-wall symmetry", symmetry),
        ("perfect amplification", perfect_amplification),
        ("uniform-chain imperfection", uniform_imperfection),
        ("mirror map and automaton agreement", mirror_and_automaton),
        ("single-excitation transfer on the cluster chain", transfer_on_cluster_chain),
        ("phase separability", phase_separability),
        ("star geometry", star_geometry),
        ("dephasing robustness", noise_comparison),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        if !o.pass {
            failures += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
