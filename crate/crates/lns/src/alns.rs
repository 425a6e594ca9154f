use rand::Rng;

pub const SEGMENT_LEN: usize = 50;
pub const WEIGHT_FLOOR: f64 = 1e-3;

/// Adaptive roulette over a fixed set of operators.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorBank {
    weights: Vec<f64>,
    scores: Vec<f64>,
    uses: Vec<usize>,
    learning_rate: f64,
}

impl OperatorBank {
    pub fn new(n: usize, learning_rate: f64) -> OperatorBank {
        OperatorBank { weights: vec![1.0; n], scores: vec![0.0; n], uses: vec![0; n], learning_rate }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let total: f64 = self.weights.iter().sum();
        self.weights.iter().map(|w| w / total).collect()
    }

    /// Draws an operator with probability proportional to its weight and
    /// counts the use.
    pub fn select(&mut self, rng: &mut impl Rng) -> usize {
        let total: f64 = self.weights.iter().sum();
        let mut x = rng.gen_range(0.0..total);
        let mut pick = self.weights.len() - 1;
        for (i, &w) in self.weights.iter().enumerate() {
            if x < w {
                pick = i;
                break;
            }
            x -= w;
        }
        self.uses[pick] += 1;
        pick
    }

    pub fn reward(&mut self, op: usize, score: f64) {
        self.scores[op] += score;
    }

    /// Blends each weight with its average score over the segment and
    /// resets the counters. Unused operators only decay.
    pub fn end_segment(&mut self) {
        let a = self.learning_rate;
        for i in 0..self.weights.len() {
            let avg = if self.uses[i] > 0 { self.scores[i] / self.uses[i] as f64 } else { 0.0 };
            self.weights[i] = ((1.0 - a) * self.weights[i] + a * avg).max(WEIGHT_FLOOR);
            self.scores[i] = 0.0;
            self.uses[i] = 0;
        }
    }
}
