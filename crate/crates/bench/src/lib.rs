//! Fixtures shared by the benchmarks in `benches/`.

use sdlab_core::instance::{generate, GeneratorConfig, Shape};
use sdlab_core::online::{FreeIndex, SdSelector};
use sdlab_core::{FreeSet, OnlineInstance};

/// Random tree on `n` vertices with weights in `{1, 2, 4, 8}`.
pub fn random_tree_instance(n: usize, seed: u64) -> OnlineInstance {
    generate(&GeneratorConfig::tree(seed, Shape::RandomTree, n, 0, 3)).expect("valid config")
}

/// Selector for `inst` plus a free index where every other vertex is free.
pub fn half_free(inst: &OnlineInstance) -> (SdSelector, FreeIndex) {
    let sd = SdSelector::new(inst.geometry.as_tree().expect("tree instance").clone()).expect("power-of-two weights");
    let mut free = FreeSet::new(inst.n());
    for v in (0..inst.n()).step_by(2) {
        free.insert(v);
    }
    let idx = sd.index(&free);
    (sd, idx)
}
