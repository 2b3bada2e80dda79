mod common;

use common::{random_scheme, shipped, GenConfig};
use qpath::pathways::*;
use qpath::scenario::Scenario;

#[test]
fn one_photon_target_is_unreachable() {
    let sc = Scenario::load(shipped("one_photon.scheme")).unwrap();
    assert_eq!(sc.basis.kets()[sc.start()].label(), "Z.S0|w01=1");
    let target = sc.target().unwrap();
    assert_eq!(sc.basis.kets()[target].label(), "E.S0|v01=1");
    let g = build_graph(&sc.operator);
    assert!(!reachable(&g, &sc.basis, sc.start(), target, &sc.plan()).reachable);
    assert!(enumerate_qpaths(&g, &sc.basis, sc.start(), target, &sc.plan(), 12).paths.is_empty());
}

#[test]
fn two_photon_target_reachable_through_a_listed_route() {
    let sc = Scenario::load(shipped("two_photon.scheme")).unwrap();
    let g = build_graph(&sc.operator);
    let target = sc.target().unwrap();
    let r = reachable(&g, &sc.basis, sc.start(), target, &sc.plan());
    let w = r.witness.unwrap();
    assert_eq!(w.matter_trace(&sc.basis), ["Z.S0", "Z.P1", "Z.D2", "E.P1", "E.S0"]);
    assert_eq!(route_families(&w, &sc.basis), [RouteFamily::SameFamilyTriplet]);
    assert_eq!(photon_budget(&w), 2);
    assert_eq!(w.injections(), 1);

    let without_push = PulsePlan { injections: Vec::new(), ..sc.plan() };
    assert!(!reachable(&g, &sc.basis, sc.start(), target, &without_push).reachable);
}

#[test]
fn two_photon_enumeration_contains_both_route_families() {
    let sc = Scenario::load(shipped("two_photon.scheme")).unwrap();
    let g = build_graph(&sc.operator);
    let set = enumerate_qpaths(&g, &sc.basis, sc.start(), sc.target().unwrap(), &sc.plan(), 6);
    let families: std::collections::BTreeSet<_> =
        set.paths.iter().flat_map(|p| route_families(p, &sc.basis)).map(|f| f as u8).collect();
    assert_eq!(families.len(), 2);
    let cross = set
        .paths
        .iter()
        .find(|p| route_families(p, &sc.basis).contains(&RouteFamily::CrossFamilyTriplet))
        .unwrap();
    assert_eq!(cross.matter_trace(&sc.basis), ["Z.S0", "Z.P1", "E.D2", "E.P1", "E.S0"]);
}

#[test]
fn spin_orbit_cascade_needs_no_photons() {
    let sc = Scenario::from_text(
        "[family Z]\nP j=1 g=0 term=Pi spin=1 energy=1.0\nD j=2 g=0 term=Delta spin=3 energy=1.0\n\
         Q j=3 g=0 term=Pi spin=1 energy=1.0\n[couplings]\nspinorbit Z.P Z.D strength=0.1\n\
         spinorbit Z.D Z.Q strength=0.1\n",
    )
    .unwrap();
    let g = build_graph(&sc.operator);
    let w = reachable(&g, &sc.basis, 0, 2, &PulsePlan::default()).witness.unwrap();
    assert_eq!(w.len(), 2);
    assert_eq!(photon_budget(&w), 0);
    assert_eq!((w.steps[0].d_lambda, w.steps[0].d_spin), (1, 2));
    assert_eq!((w.steps[1].d_lambda, w.steps[1].d_spin), (-1, -2));
}

#[test]
fn rayleigh_path_uses_one_photon() {
    let sc = Scenario::from_text(
        "[family Z]\nG j=0 g=0 term=Sigma spin=1 energy=0.0\nX j=1 g=0 term=Pi spin=1 energy=1.0\n\
         [modes]\nw omega=1.0\n[couplings]\ndipole Z.G Z.X mode=w strength=0.2\n\
         [pulses]\npump mode=w t=0 into=Z.G\n",
    )
    .unwrap();
    let g = build_graph(&sc.operator);
    let to = sc.basis.resolve("Z.G;w=1").unwrap();
    let w = reachable(&g, &sc.basis, sc.start(), to, &sc.plan()).witness.unwrap();
    assert_eq!(w.describe(&sc.basis), "Z.G|w=1 -> Z.G;w=1");
    assert_eq!(photon_budget(&w), 1);
}

#[test]
fn adding_a_pulse_never_shrinks_the_reachable_set() {
    for seed in 0..150 {
        let s = random_scheme(seed, &GenConfig::with_pulses());
        let sc = Scenario::from_scheme(s).unwrap();
        let g = build_graph(&sc.operator);
        let full = sc.plan();
        for cut in 0..full.injections.len() {
            let fewer = PulsePlan { injections: full.injections[..cut].to_vec(), ..full.clone() };
            let more = PulsePlan { injections: full.injections[..cut + 1].to_vec(), ..full.clone() };
            let a = reachable_set(&g, &sc.basis, sc.start(), &fewer);
            let b = reachable_set(&g, &sc.basis, sc.start(), &more);
            assert!(a.iter().zip(&b).all(|(x, y)| !x || *y), "seed {seed}");
        }
    }
}

#[test]
fn witness_steps_satisfy_their_selection_rules() {
    let mut checked = 0;
    for seed in 0..400 {
        let sc = Scenario::from_scheme(random_scheme(seed, &GenConfig::full())).unwrap();
        let g = build_graph(&sc.operator);
        let plan = sc.plan();
        for target in 0..sc.basis.len() {
            let Some(w) = reachable(&g, &sc.basis, sc.start(), target, &plan).witness else { continue };
            assert!(w.injections() <= plan.injections.len());
            for st in &w.steps {
                let (a, b) = (&sc.basis.kets()[st.from], &sc.basis.kets()[st.to]);
                let d_lambda = b.matter.term.lambda() - a.matter.term.lambda();
                let d_spin = b.matter.spin.multiplicity() - a.matter.spin.multiplicity();
                assert_eq!((st.d_lambda, st.d_spin), (d_lambda, d_spin));
                match &st.kind {
                    StepKind::Dipole => {
                        assert_eq!((d_lambda.abs(), d_spin), (1, 0));
                        assert_eq!(a.sector, b.sector);
                        assert_eq!((i64::from(a.total_quanta()) - i64::from(b.total_quanta())).abs(), 1);
                    }
                    StepKind::SpinOrbit => {
                        assert_eq!((d_lambda.abs(), d_spin.abs()), (1, 2));
                        assert_eq!(a.sector, b.sector);
                    }
                    StepKind::Transfer => {
                        assert_eq!(a.matter, b.matter);
                        assert_ne!(a.sector, b.sector);
                    }
                    StepKind::Injection(m) => {
                        assert_eq!(b.free(m), a.free(m) + 1);
                        assert_eq!(a.matter, b.matter);
                    }
                }
                if !matches!(st.kind, StepKind::Injection(_)) {
                    assert!((a.total_energy() - b.total_energy()).abs() <= 1e-6);
                }
                checked += 1;
            }
        }
    }
    assert!(checked > 500);
}
