//! Shared setup for the criterion benchmark targets in `benches/`.

use vtl_core::{default_generators, GeneratorSet, TorusBundleGroup};

/// The three built-in lattices with their default generating sets.
pub fn lattices() -> Vec<(&'static str, TorusBundleGroup, GeneratorSet)> {
    [
        ("z2", TorusBundleGroup::z2()),
        ("nil", TorusBundleGroup::nil()),
        ("sol", TorusBundleGroup::sol()),
    ]
    .into_iter()
    .map(|(label, group)| {
        let gens = default_generators(&group).expect("built-in generating set");
        (label, group, gens)
    })
    .collect()
}
