//! Shared setups for the benchmarks.

use std::sync::Arc;

use qedbloch::field_symbols::SpinSystem;
use qedbloch::fock_oracle::{weight_for_strength, DiscreteModeSet, HelicityPick, LinearPick, PolarizationChoice};
use qedbloch::mode_space::{AngularSpec, KGrid, RadialCutoff, RadialSpec, Vec3};

/// A spin at the origin in `b_ext = (0, 0, 1)`.
pub fn single_spin() -> SpinSystem {
    SpinSystem::new(vec![Vec3::zeros()], Vec3::z()).expect("valid system")
}

/// Two spins on the x axis in a tilted field.
pub fn spin_pair() -> SpinSystem {
    SpinSystem::new(vec![Vec3::new(-0.5, 0.0, 0.0), Vec3::new(0.5, 0.0, 0.0)], Vec3::new(0.2, 0.0, 1.0)).expect("valid system")
}

pub fn shell_grid(n_radial: usize) -> Arc<KGrid> {
    KGrid::build(
        RadialSpec { n_radial, max_r: 4.0 },
        AngularSpec { n_polar: 8, n_azimuth: 8 },
    )
    .expect("valid grid")
}

/// The resonant single-mode set, optionally with a second off-resonant node.
pub fn resonant_modes(sys: &SpinSystem, two_nodes: bool) -> DiscreteModeSet {
    let cutoff = RadialCutoff::default();
    let mut nodes = vec![Vec3::new(2.0, 0.0, 0.0)];
    if two_nodes {
        nodes.push(Vec3::new(0.0, 1.5, 0.0));
    }
    let weights = nodes.iter().map(|k| weight_for_strength(&cutoff, k.norm(), 0.5)).collect();
    let grid = KGrid::custom(nodes, weights).expect("valid grid");
    let choice = if two_nodes { PolarizationChoice::Helicity(HelicityPick::Plus) } else { PolarizationChoice::Linear(LinearPick::Second) };
    DiscreteModeSet::all_nodes(&grid, choice, sys, &cutoff).expect("valid modes")
}
