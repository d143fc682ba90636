use serde::{Deserialize, Serialize};

use crate::activity::{Activity, N_ACTIVITIES};

/// Counts indexed `[truth][prediction]`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; N_ACTIVITIES]; N_ACTIVITIES],
}

impl ConfusionMatrix {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Activity, Activity)>) -> Self {
        let mut m = ConfusionMatrix::default();
        for (truth, predicted) in pairs {
            m.counts[truth.index()][predicted.index()] += 1;
        }
        m
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..N_ACTIVITIES).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            self.trace() as f64 / total as f64
        }
    }

    pub fn truth_count(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }

    pub fn predicted_count(&self, class: usize) -> u64 {
        self.counts.iter().map(|row| row[class]).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F1Report {
    /// `None` when the class appears neither in the truth nor in the
    /// predictions.
    pub per_class: [Option<f64>; N_ACTIVITIES],
    /// Mean F1 over the classes present in the truth.
    pub macro_f1: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-class precision/recall F1; F1 is 0 when precision + recall is 0.
pub fn f1_scores(m: &ConfusionMatrix) -> F1Report {
    let mut per_class = [None; N_ACTIVITIES];
    let mut sum = 0.0;
    let mut present = 0usize;
    for (c, slot) in per_class.iter_mut().enumerate() {
        let tp = m.counts[c][c];
        let truth = m.truth_count(c);
        let predicted = m.predicted_count(c);
        if truth == 0 && predicted == 0 {
            continue;
        }
        let p = ratio(tp, predicted);
        let r = ratio(tp, truth);
        let f1 = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        *slot = Some(f1);
        if truth > 0 {
            sum += f1;
            present += 1;
        }
    }
    F1Report {
        per_class,
        macro_f1: if present == 0 { 0.0 } else { sum / present as f64 },
    }
}
