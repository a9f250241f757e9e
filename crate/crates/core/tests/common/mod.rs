#![allow(dead_code)]

use harmonic_paths::FrequencyProfile;
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;

/// Smooth profiles on `[0, 1]` with Ω between roughly 0.4 and 1.6, away
/// from every caustic of the three representations.
pub fn smooth_profile() -> impl Strategy<Value = FrequencyProfile> {
    prop_oneof![
        (0.6..1.4f64, -0.3..0.3f64, -0.3..0.3f64).prop_map(|(c0, c1, c2)| {
            FrequencyProfile::polynomial(vec![c0, c1, c2], 0.0, 1.0).unwrap()
        }),
        prop::collection::vec(0.5..1.5f64, 3..7).prop_map(|v| {
            let n = v.len();
            let times = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
            FrequencyProfile::tabulated(times, v, 0.0, 1.0).unwrap()
        }),
    ]
}

/// Smooth profiles plus piecewise-constant ones with two jumps.
pub fn any_profile() -> impl Strategy<Value = FrequencyProfile> {
    prop_oneof![
        3 => smooth_profile(),
        1 => (prop::collection::vec(0.5..1.5f64, 3), 0.15..0.45f64).prop_map(|(v, b)| {
            FrequencyProfile::piecewise_constant(vec![b, b + 0.4], v, 0.0, 1.0).unwrap()
        }),
    ]
}

/// `count` deterministic draws from `strategy`.
pub fn draws<S: Strategy>(strategy: S, count: usize) -> Vec<S::Value> {
    let mut runner = TestRunner::deterministic();
    (0..count)
        .map(|_| strategy.new_tree(&mut runner).unwrap().current())
        .collect()
}
