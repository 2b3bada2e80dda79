mod common;

use common::{random_scheme, GenConfig};
use qpath::basis::{scenario_basis, DEFAULT_DETUNING_TOLERANCE};

#[test]
fn generator_covers_the_format() {
    let (mut units, mut pulses, mut dets, mut exts, mut phased) = (0, 0, 0, 0, 0);
    for seed in 0..200 {
        let s = random_scheme(seed, &GenConfig::full());
        units += s.couplings.iter().filter(|c| c.mode.is_some()).count();
        pulses += s.pulses.len();
        dets += s.detectors.len();
        exts += s.extensions.len();
        phased += s.couplings.iter().filter(|c| c.phase != 0.0).count();
    }
    assert!(units > 100 && pulses > 100 && dets > 50 && exts > 0 && phased > 10, "{units} {pulses} {dets} {exts} {phased}");
}

#[test]
fn small_schemes_respect_the_ket_cap() {
    for seed in 0..100 {
        let s = random_scheme(seed, &GenConfig::with_pulses());
        assert!(scenario_basis(&s, DEFAULT_DETUNING_TOLERANCE).unwrap().len() <= 12);
    }
}
