use serde::{Deserialize, Serialize};

use super::LearnError;

/// "Balanced" per-class multipliers `N / (K · N_c)`, where `K` counts the
/// classes actually present. Absent classes get weight 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    per_class: Vec<f64>,
}

impl ClassWeights {
    pub fn balanced(y: &[usize], n_classes: usize) -> Result<Self, LearnError> {
        if y.is_empty() {
            return Err(LearnError::EmptyLabels);
        }
        let width = n_classes.max(y.iter().max().map_or(0, |m| m + 1));
        let mut counts = vec![0usize; width];
        for &c in y {
            counts[c] += 1;
        }
        let present = counts.iter().filter(|&&c| c > 0).count() as f64;
        let n = y.len() as f64;
        let per_class = counts
            .iter()
            .map(|&c| if c == 0 { 0.0 } else { n / (present * c as f64) })
            .collect();
        Ok(ClassWeights { per_class })
    }

    pub fn uniform(n_classes: usize) -> Self {
        ClassWeights {
            per_class: vec![1.0; n_classes],
        }
    }

    pub fn get(&self, class: usize) -> f64 {
        self.per_class.get(class).copied().unwrap_or(0.0)
    }

    pub fn per_class(&self) -> &[f64] {
        &self.per_class
    }

    pub fn sample_weights(&self, y: &[usize]) -> Vec<f64> {
        y.iter().map(|&c| self.get(c)).collect()
    }
}
