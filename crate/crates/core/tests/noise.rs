use spinamp::algebra::{BitConfig, StateVector};
use spinamp::chains::{cluster_chain, exchange_chain, CouplingProfile};
use spinamp::evolution::{pst_time, transfer_fidelity, Propagator};
use spinamp::noise::{
    dephasing_trial, noise_sweep, run_trials, trial_rng, DephasingModel, NoiseConfig, SweepEntry,
};

fn setup(cluster: bool, n: usize) -> (Propagator, BitConfig) {
    let profile = CouplingProfile::engineered(n).unwrap();
    if cluster {
        let prop = Propagator::dense(&cluster_chain(&profile).unwrap()).unwrap();
        (prop, BitConfig::single(n, 2).unwrap())
    } else {
        let prop = Propagator::dense(&exchange_chain(&profile).unwrap()).unwrap();
        (prop, BitConfig::single(n, 1).unwrap())
    }
}

fn model(cluster: bool, n: usize, steps: usize) -> DephasingModel {
    let (prop, source) = setup(cluster, n);
    DephasingModel::new(&prop, &source, n, pst_time(n), steps).unwrap()
}

#[test]
fn noiseless_trials_match_exact_evolution() {
    for n in [4, 5, 6] {
        for cluster in [true, false] {
            let (prop, source) = setup(cluster, n);
            let target = BitConfig::single(n, n).unwrap();
            let cfg = NoiseConfig { p: 0.0, steps: 7, trials: 1, seed: 0 };

            // generic time: the readout is the marginal of site n
            let m = DephasingModel::new(&prop, &source, n, 1.3, 7).unwrap();
            let exact = prop
                .evolve(&StateVector::basis(&source), 1.3)
                .unwrap()
                .excitation_probability(n);
            let got = dephasing_trial(&m, &cfg, 0).unwrap();
            assert!((got - exact).abs() < 1e-10, "N={n} cluster={cluster}: {got} vs {exact}");

            // transfer time: all weight sits on the single target configuration
            let m = DephasingModel::new(&prop, &source, n, pst_time(n), 7).unwrap();
            let exact = transfer_fidelity(&prop, &source, &target, pst_time(n)).unwrap();
            let got = dephasing_trial(&m, &cfg, 0).unwrap();
            assert!((got - exact).abs() < 1e-10, "N={n} cluster={cluster}: {got} vs {exact}");
        }
    }
}

#[test]
fn records_are_reproducible() {
    let entries = vec![
        SweepEntry { label: "cluster".into(), source_site: 2, model: model(true, 6, 25) },
        SweepEntry { label: "exchange".into(), source_site: 1, model: model(false, 6, 25) },
    ];
    let base = NoiseConfig { p: 0.0, steps: 25, trials: 800, seed: 42 };
    let a = noise_sweep(&entries, &[0.0, 0.1], &base).unwrap();
    let b = noise_sweep(&entries, &[0.0, 0.1], &base).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 4);
    assert_eq!(a[0].hamiltonian, "cluster");
    assert_eq!(a[1].hamiltonian, "exchange");
    assert!((a[0].mean_fidelity - 1.0).abs() < 1e-8);
}

#[test]
fn different_seeds_give_different_streams() {
    let m = model(true, 6, 25);
    let a = run_trials(&m, &NoiseConfig { p: 0.1, steps: 25, trials: 200, seed: 1 }).unwrap();
    let b = run_trials(&m, &NoiseConfig { p: 0.1, steps: 25, trials: 200, seed: 2 }).unwrap();
    assert_ne!(a, b);
}

#[test]
fn trial_states_stay_normalized() {
    let m = model(true, 6, 25);
    for trial in 0..200 {
        let psi = m.trial_state(0.5, &mut trial_rng(9, trial));
        let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-9);
    }
}

#[test]
fn phase_flips_alone_do_not_move_population() {
    // with negligible evolution time every segment is the identity and Z errors
    // only change signs, so the readout stays at its initial value
    let (prop, _) = setup(false, 4);
    let source = BitConfig::single(4, 4).unwrap();
    let m = DephasingModel::new(&prop, &source, 4, 1e-300, 10).unwrap();
    for trial in 0..20 {
        assert!((m.trial(1.0, &mut trial_rng(0, trial)) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn standard_error_shrinks_with_trials() {
    let m = model(true, 6, 25);
    let (_, se_small) = run_trials(&m, &NoiseConfig { p: 0.1, steps: 25, trials: 1000, seed: 5 }).unwrap();
    let (_, se_large) = run_trials(&m, &NoiseConfig { p: 0.1, steps: 25, trials: 4000, seed: 5 }).unwrap();
    let ratio = se_small / se_large;
    assert!((2.0 / 1.5..=2.0 * 1.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn larger_error_rates_flip_a_superset() {
    // the same uniform draws decide flips at every p, so a trial that sees no
    // flip at p = 0.2 sees none at p = 0.05 either
    let m = model(true, 6, 25);
    for trial in 0..300 {
        let low = m.trial(0.05, &mut trial_rng(3, trial));
        let high = m.trial(0.2, &mut trial_rng(3, trial));
        if (high - 1.0).abs() < 1e-12 {
            assert!((low - 1.0).abs() < 1e-12, "trial {trial}");
        }
    }
}

#[test]
fn mismatched_steps_are_rejected() {
    let m = model(true, 6, 25);
    let cfg = NoiseConfig { p: 0.1, steps: 10, trials: 1, seed: 0 };
    assert!(dephasing_trial(&m, &cfg, 0).is_err());
    let (prop, source) = setup(true, 6);
    assert!(DephasingModel::new(&prop, &source, 7, 1.0, 5).is_err());
    assert!(DephasingModel::new(&prop, &source, 6, 0.0, 5).is_err());
}
