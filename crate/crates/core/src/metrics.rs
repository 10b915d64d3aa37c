//! Confusion-matrix classification metrics.

use serde::Serialize;

use crate::dataio::Dataset;
use crate::error::Result;
use crate::netcore::Network;

/// `counts[actual][predicted]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<usize>>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl ConfusionMatrix {
    pub fn new(n_classes: usize) -> Self {
        ConfusionMatrix {
            counts: vec![vec![0; n_classes]; n_classes],
        }
    }

    pub fn from_pairs(n_classes: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut m = Self::new(n_classes);
        for (actual, predicted) in pairs {
            m.counts[actual][predicted] += 1;
        }
        m
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn true_positives(&self, class: usize) -> usize {
        self.counts[class][class]
    }

    pub fn false_positives(&self, class: usize) -> usize {
        self.counts.iter().map(|row| row[class]).sum::<usize>() - self.counts[class][class]
    }

    pub fn false_negatives(&self, class: usize) -> usize {
        self.counts[class].iter().sum::<usize>() - self.counts[class][class]
    }

    pub fn accuracy(&self) -> f64 {
        ratio((0..self.n_classes()).map(|c| self.counts[c][c]).sum(), self.total())
    }

    /// TP / (TP + FP), with 0/0 taken as 0.
    pub fn precision(&self, class: usize) -> f64 {
        let tp = self.true_positives(class);
        ratio(tp, tp + self.false_positives(class))
    }

    /// TP / (TP + FN), with 0/0 taken as 0.
    pub fn recall(&self, class: usize) -> f64 {
        let tp = self.true_positives(class);
        ratio(tp, tp + self.false_negatives(class))
    }

    pub fn f1(&self, class: usize) -> f64 {
        let (p, r) = (self.precision(class), self.recall(class));
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    /// Headline (precision, recall, f1): class 1 for two-class problems,
    /// macro averages otherwise.
    pub fn summary(&self) -> (f64, f64, f64) {
        let n = self.n_classes();
        if n == 2 {
            return (self.precision(1), self.recall(1), self.f1(1));
        }
        let mean = |f: &dyn Fn(usize) -> f64| (0..n).map(f).sum::<f64>() / n as f64;
        (
            mean(&|c| self.precision(c)),
            mean(&|c| self.recall(c)),
            mean(&|c| self.f1(c)),
        )
    }
}

/// Confusion matrix of `net` over the given rows of `data`.
pub fn evaluate(net: &Network, data: &Dataset, rows: &[usize]) -> Result<ConfusionMatrix> {
    let n_classes = data.n_classes.max(net.output_dim());
    let mut m = ConfusionMatrix::new(n_classes);
    for &r in rows {
        let predicted = net.predict(data.sample(r))?;
        m.counts[data.labels[r]][predicted] += 1;
    }
    Ok(m)
}
