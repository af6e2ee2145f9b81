//! Indexed sequence of large-scale network states around a base placement.
//!
//! State `i` moves every UE uniformly within a disk around its base
//! position, draws fresh correlated shadowing and fresh pilots, and
//! recomputes the estimate statistics. States are addressed by index, so
//! any of them can be regenerated without replaying the ones before.

use crate::network::{perturb_ues, NetworkRealization, Placement};
use crate::params::SystemParams;
use crate::seed;
use crate::Result;

/// Displacement radius of the per-state UE movement (m).
pub const DEFAULT_RADIUS: f64 = 5.0;

#[derive(Debug, Clone)]
pub struct RealizationStream {
    base: Placement,
    params: SystemParams,
    seed: u64,
    radius: f64,
    frozen: bool,
}

impl RealizationStream {
    pub fn new(base: Placement, params: SystemParams, seed: u64) -> Self {
        Self {
            base,
            params,
            seed,
            radius: DEFAULT_RADIUS,
            frozen: false,
        }
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    /// Every index yields the same state.
    pub fn frozen(mut self) -> Self {
        self.frozen = true;
        self
    }

    /// Independent stream over the same placement, keyed by `tag`.
    pub fn substream(&self, tag: &str) -> Self {
        Self {
            seed: seed::derive(self.seed, &[seed::label(tag)]),
            ..self.clone()
        }
    }

    pub fn base(&self) -> &Placement {
        &self.base
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn realization(&self, index: u64) -> Result<NetworkRealization> {
        let i = if self.frozen { 0 } else { index };
        let moved = perturb_ues(
            &self.base,
            self.radius,
            seed::derive(self.seed, &[seed::label("move"), i]),
        );
        NetworkRealization::draw(
            &moved,
            &self.params,
            seed::derive(self.seed, &[seed::label("state"), i]),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{generate_placement, wrap_distance, Case, PlacementConfig};

    fn stream() -> RealizationStream {
        let pl = generate_placement(&PlacementConfig::new(6, 4, 0.5, Case::C1), 1).unwrap();
        RealizationStream::new(pl, SystemParams::for_network(4), 9)
    }

    #[test]
    fn states_are_addressable_and_distinct() {
        let s = stream();
        let a = s.realization(3).unwrap();
        assert_eq!(a, s.realization(3).unwrap());
        assert_ne!(a.beta, s.realization(4).unwrap().beta);
        assert_ne!(a.beta, s.substream("x").realization(3).unwrap().beta);
    }

    #[test]
    fn ues_stay_near_base() {
        let s = stream();
        for i in 0..20 {
            let r = s.realization(i).unwrap();
            for (p, q) in r.placement.ues.iter().zip(&s.base().ues) {
                assert!(wrap_distance(*p, *q, s.base().side) <= DEFAULT_RADIUS + 1e-9);
            }
            assert_eq!(r.placement.aps, s.base().aps);
        }
    }

    #[test]
    fn frozen_stream_repeats() {
        let s = stream().frozen();
        assert_eq!(s.realization(0).unwrap(), s.realization(17).unwrap());
    }
}
