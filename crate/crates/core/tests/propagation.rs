mod common;

use common::shipped;
use num_complex::Complex64;
use qpath::propagator::*;
use qpath::scenario::Scenario;

const RAYLEIGH: &str = "\
[family Z]
G j=0 g=0 term=Sigma spin=1 energy=0.0
X j=1 g=0 term=Pi spin=1 energy=1.0
[modes]
w omega=1.0
[couplings]
dipole Z.G Z.X mode=w strength=0.2 transfer=0.05
[pulses]
pump mode=w t=0 into=Z.G
[detectors]
back target=Z.G mode=w threshold=0.9
";

fn rabi(v: f64) -> Scenario {
    Scenario::from_text(&format!(
        "[family Z]\nP j=1 g=0 term=Pi spin=1 energy=1.0\nD j=2 g=0 term=Delta spin=3 energy=1.0\n\
         [couplings]\nspinorbit Z.P Z.D strength={v}\n"
    ))
    .unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn prepare_second_ket_of_sixteen() {
    let sc = Scenario::load(shipped("one_photon.scheme")).unwrap();
    let st = prepare(&sc.basis, &[("2", c(1.0, 0.0))]).unwrap();
    assert_eq!(st.dim(), 17);
    assert_eq!(st.amplitudes[1], c(1.0, 0.0));
    assert_eq!(st.norm(), 1.0);
}

#[test]
fn prepare_two_kets_equal_weights() {
    let sc = Scenario::from_text(RAYLEIGH).unwrap();
    let st = prepare(&sc.basis, &[("1", c(1.0, 0.0)), ("3", c(1.0, 0.0))]).unwrap();
    let h = 1.0 / 2f64.sqrt();
    assert!((st.amplitudes[0].re - h).abs() < 1e-15 && (st.amplitudes[2].re - h).abs() < 1e-15);
}

#[test]
fn prepare_complex_weights_normalizes() {
    let sc = Scenario::from_text(RAYLEIGH).unwrap();
    let st = prepare(&sc.basis, &[("Z.X", c(3.0, -1.0)), ("Z.G;w=1", c(0.5, 2.0))]).unwrap();
    let oracle = (10.0f64 + 4.25).sqrt();
    assert!((st.amplitudes[0] - c(3.0, -1.0) / oracle).norm() < 1e-15);
    assert!((st.norm() - 1.0).abs() < 1e-15);
    assert_eq!(prepare(&sc.basis, &[("Z.Q", c(1.0, 0.0))]), Err(PropagationError::UnknownKet("Z.Q".into())));
    assert_eq!(prepare(&sc.basis, &[("1", c(0.0, 0.0))]), Err(PropagationError::ZeroNorm));
}

#[test]
fn injection_relabels_and_keeps_phases() {
    let sc = Scenario::load(shipped("two_photon.scheme")).unwrap();
    let push = sc.scheme.mode("push").unwrap().clone();
    let (a, b) = (sc.basis.resolve("Z.P1").unwrap(), sc.basis.resolve("Z.D2").unwrap());
    let mut st = StateVector::basis(sc.basis.len(), a);
    st.amplitudes[a] = c(0.6, 0.0);
    st.amplitudes[b] = c(0.0, 0.8);
    let out = inject_pulse(&st, &sc.basis, &push).unwrap();
    assert_eq!(out.amplitudes[sc.basis.resolve("Z.P1|push=1").unwrap()], c(0.6, 0.0));
    assert_eq!(out.amplitudes[sc.basis.resolve("Z.D2|push=1").unwrap()], c(0.0, 0.8));
    assert_eq!(out.amplitudes[a], c(0.0, 0.0));
    assert!((out.norm() - 1.0).abs() < 1e-15);
}

#[test]
fn injection_without_partner_names_the_ket() {
    let sc = Scenario::from_text(RAYLEIGH).unwrap();
    let w = sc.scheme.mode("w").unwrap().clone();
    let st = StateVector::basis(sc.basis.len(), 0);
    assert_eq!(
        inject_pulse(&st, &sc.basis, &w),
        Err(PropagationError::MissingPartner { ket: "Z.X".into(), mode: "w".into() })
    );
}

#[test]
fn threshold_detector_fires_at_first_rabi_crossing() {
    let v = 0.13;
    let sc = rabi(v);
    let det = Detector { id: "d".into(), ket: 0, label: "Z.P".into(), mode: String::new(), threshold: 0.5, rate: None };
    let dt = 0.01;
    let cfg = EvolveConfig { t_end: 40.0, dt, sample_every: 100, ..Default::default() };
    let traj = evolve(&StateVector::basis(2, 1), &sc.operator, &sc.basis, &Schedule::default(), &[det], &cfg).unwrap();
    let first = (1..).find(|k| (v * *k as f64 * dt).sin().powi(2) >= 0.5).unwrap();
    let ev = traj.emissions().next().unwrap();
    assert!((ev.time - first as f64 * dt).abs() < 1e-9, "{} vs {}", ev.time, first as f64 * dt);
    assert!(ev.collapsed);
    assert_eq!(traj.terminated_at, Some(ev.time));
    assert_eq!(traj.final_state.as_ref().unwrap().population(0), 1.0);
}

#[test]
fn stochastic_detection_repeats_with_the_seed() {
    let sc = Scenario::load(shipped("two_photon.scheme")).unwrap();
    let cfg = EvolveConfig { detect_mode: DetectMode::Stochastic, collapse: false, seed: 11, ..Default::default() };
    let times = |cfg: &EvolveConfig| sc.evolve(cfg).unwrap().emissions().map(|e| e.time).collect::<Vec<_>>();
    let a = times(&cfg);
    assert_eq!(a.len(), 1);
    assert_eq!(a, times(&cfg));
    let spread: std::collections::BTreeSet<u64> =
        (0..8).map(|seed| times(&EvolveConfig { seed, ..cfg }).first().map_or(0, |t| t.to_bits())).collect();
    assert!(spread.len() > 1);
}

#[test]
fn rayleigh_run_is_bracketed_by_transfers() {
    let sc = Scenario::from_text(RAYLEIGH).unwrap();
    assert_eq!(sc.start(), 1);
    let traj = sc.evolve(&EvolveConfig { t_end: 100.0, dt: 0.05, ..Default::default() }).unwrap();
    assert_eq!(traj.events.len(), 2, "{:?}", traj.events);
    assert!(matches!(&traj.events[0], LabEvent::Prepared { direction: '+', ket: 1, .. }));
    match &traj.events[1] {
        LabEvent::Emitted { direction, event } => {
            assert_eq!(*direction, '-');
            assert_eq!(event.ket, 1);
            assert!(event.time > 0.0);
        }
        other => panic!("{other:?}"),
    }
    let touched = (0..4).filter(|&k| traj.max_population(k) > 1e-6).count();
    assert_eq!(touched, 4);
}

#[test]
fn halving_the_step_leaves_samples_unchanged() {
    let sc = Scenario::load(shipped("two_photon.scheme")).unwrap();
    let coarse = sc.evolve(&EvolveConfig { dt: 0.1, sample_every: 10, collapse: false, ..Default::default() }).unwrap();
    let fine = sc.evolve(&EvolveConfig { dt: 0.05, sample_every: 20, collapse: false, ..Default::default() }).unwrap();
    let grid = |traj: &Trajectory| -> Vec<(f64, Vec<f64>)> {
        let mut seen = std::collections::BTreeSet::new();
        traj.times
            .iter()
            .zip(&traj.populations)
            .filter(|(t, _)| (*t - t.round()).abs() < 1e-9 && seen.insert(t.round() as i64))
            .map(|(t, p)| (*t, p.clone()))
            .collect()
    };
    let (a, b) = (grid(&coarse), grid(&fine));
    assert_eq!(a.len(), b.len());
    let mut compared = 0;
    for ((t, p), (u, q)) in a.iter().zip(&b) {
        assert!((t - u).abs() < 1e-9);
        for (x, y) in p.iter().zip(q) {
            assert!((x - y).abs() < 1e-8, "t={t}: {x} vs {y}");
        }
        compared += 1;
    }
    assert!(compared > 150);
}

#[test]
fn zero_couplings_keep_populations_flat() {
    let sc = Scenario::from_text(
        "[family Z]\nA j=0 g=0 term=Sigma spin=1 energy=0.2\nB j=1 g=0 term=Pi spin=1 energy=0.9\n",
    )
    .unwrap();
    let st = prepare(&sc.basis, &[("1", c(0.6, 0.0)), ("2", c(0.0, 0.8))]).unwrap();
    let traj = evolve(&st, &sc.operator, &sc.basis, &Schedule::default(), &[], &EvolveConfig::default()).unwrap();
    for p in &traj.populations {
        assert!((p[0] - 0.36).abs() < 1e-12 && (p[1] - 0.64).abs() < 1e-12);
    }
}

#[test]
fn energy_is_conserved_between_pulses() {
    let sc = Scenario::load(shipped("two_photon.scheme")).unwrap();
    let traj = sc.evolve(&EvolveConfig { collapse: false, sample_every: 1, ..Default::default() }).unwrap();
    let kick = sc.schedule.injections[0].time;
    let before: Vec<f64> = traj.times.iter().zip(&traj.energies).filter(|(t, _)| **t < kick).map(|(_, e)| *e).collect();
    let after: Vec<f64> = traj.times.iter().zip(&traj.energies).filter(|(t, _)| **t > kick).map(|(_, e)| *e).collect();
    for seg in [before, after] {
        for e in &seg {
            assert!((e - seg[0]).abs() < 1e-9);
        }
    }
    let gain = traj.energies.last().unwrap() - traj.energies[0];
    assert!((gain - sc.schedule.injections[0].mode.omega).abs() < 1e-9);
}

#[test]
fn pulses_outside_the_run_rejected() {
    let sc = Scenario::load(shipped("two_photon.scheme")).unwrap();
    let err = sc.evolve(&EvolveConfig { t_end: 10.0, ..Default::default() }).unwrap_err();
    assert!(err.to_string().contains("outside"));
}

#[test]
fn csv_has_one_row_per_sample_and_twelve_digits() {
    let sc = Scenario::from_text(RAYLEIGH).unwrap();
    let traj = sc.evolve(&EvolveConfig { t_end: 2.0, dt: 0.5, sample_every: 1, collapse: false, ..Default::default() }).unwrap();
    let csv = traj.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + traj.times.len());
    assert_eq!(lines[0].split(',').count(), 3 + 4);
    assert_eq!(lines[1].split(',').next().unwrap(), "0.00000000000e0");
    assert_eq!(lines[2].split(',').nth(1).unwrap().len(), "1.00000000000e0".len());
}
