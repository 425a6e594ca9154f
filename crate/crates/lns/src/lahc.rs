/// Late acceptance: a candidate is taken when it is no worse than the
/// current cost or than the current cost recorded `len` iterations ago.
#[derive(Debug, Clone, PartialEq)]
pub struct LateAcceptance {
    ring: Vec<f64>,
}

impl LateAcceptance {
    pub fn new(len: usize, initial_cost: f64) -> LateAcceptance {
        assert!(len >= 1, "history length must be positive");
        LateAcceptance { ring: vec![initial_cost; len] }
    }

    /// Decides on the candidate at iteration `iteration`, updates `current`
    /// when accepted and records the resulting current cost in the ring.
    pub fn step(&mut self, iteration: usize, current: &mut f64, candidate: f64) -> bool {
        let slot = iteration % self.ring.len();
        let accept = candidate <= *current || candidate <= self.ring[slot];
        if accept {
            *current = candidate;
        }
        self.ring[slot] = *current;
        accept
    }

    pub fn history(&self) -> &[f64] {
        &self.ring
    }
}
