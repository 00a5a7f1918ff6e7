//! Purity / inverse purity F1 and B-Cubed F1.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::labeling::Labeling;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub purity: f64,
    pub inverse_purity: f64,
    pub purity_f1: f64,
    pub bcubed_precision: f64,
    pub bcubed_recall: f64,
    pub bcubed_f1: f64,
    pub n: usize,
}

pub fn harmonic_mean(p: f64, r: f64) -> f64 {
    if p <= 0.0 || r <= 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Contingency counts between two aligned labelings.
struct Contingency {
    n: usize,
    joint: HashMap<(usize, usize), usize>,
    pred_sizes: Vec<usize>,
    gold_sizes: Vec<usize>,
}

fn intern<L: Hash + Eq>(labels: &[L]) -> (Vec<usize>, usize) {
    let mut ids: HashMap<&L, usize> = HashMap::new();
    let out = labels
        .iter()
        .map(|l| {
            let next = ids.len();
            *ids.entry(l).or_insert(next)
        })
        .collect();
    (out, ids.len())
}

impl Contingency {
    fn new<P: Hash + Eq, G: Hash + Eq>(pred: &[P], gold: &[G]) -> Result<Self> {
        if pred.len() != gold.len() {
            return Err(Error::data(format!(
                "prediction has {} instances, gold has {}",
                pred.len(),
                gold.len()
            )));
        }
        if pred.is_empty() {
            return Err(Error::data("cannot score an empty labeling"));
        }
        let (p, np) = intern(pred);
        let (g, ng) = intern(gold);
        let mut joint = HashMap::new();
        let mut pred_sizes = vec![0; np];
        let mut gold_sizes = vec![0; ng];
        for (&a, &b) in p.iter().zip(&g) {
            *joint.entry((a, b)).or_insert(0) += 1;
            pred_sizes[a] += 1;
            gold_sizes[b] += 1;
        }
        Ok(Self {
            n: pred.len(),
            joint,
            pred_sizes,
            gold_sizes,
        })
    }

    fn purity(&self) -> (f64, f64) {
        let mut best_pred = vec![0; self.pred_sizes.len()];
        let mut best_gold = vec![0; self.gold_sizes.len()];
        for (&(p, g), &c) in &self.joint {
            best_pred[p] = best_pred[p].max(c);
            best_gold[g] = best_gold[g].max(c);
        }
        let n = self.n as f64;
        (
            best_pred.iter().sum::<usize>() as f64 / n,
            best_gold.iter().sum::<usize>() as f64 / n,
        )
    }

    fn bcubed(&self) -> (f64, f64) {
        // every instance in cell (p, g) has P = c/|p| and R = c/|g|
        let (mut precision, mut recall) = (0.0, 0.0);
        for (&(p, g), &c) in &self.joint {
            let c = c as f64;
            precision += c * c / self.pred_sizes[p] as f64;
            recall += c * c / self.gold_sizes[g] as f64;
        }
        let n = self.n as f64;
        (precision / n, recall / n)
    }
}

/// `(purity, inverse_purity, f1)` of aligned prediction/gold label slices.
pub fn purity_f1<P: Hash + Eq, G: Hash + Eq>(pred: &[P], gold: &[G]) -> Result<(f64, f64, f64)> {
    let (p, ip) = Contingency::new(pred, gold)?.purity();
    Ok((p, ip, harmonic_mean(p, ip)))
}

/// `(precision, recall, f1)` B-Cubed scores of aligned label slices.
pub fn bcubed_f1<P: Hash + Eq, G: Hash + Eq>(pred: &[P], gold: &[G]) -> Result<(f64, f64, f64)> {
    let (p, r) = Contingency::new(pred, gold)?.bcubed();
    Ok((p, r, harmonic_mean(p, r)))
}

pub fn score_slices<P: Hash + Eq, G: Hash + Eq>(pred: &[P], gold: &[G]) -> Result<ScoreReport> {
    let table = Contingency::new(pred, gold)?;
    let (purity, inverse_purity) = table.purity();
    let (bcubed_precision, bcubed_recall) = table.bcubed();
    Ok(ScoreReport {
        purity,
        inverse_purity,
        purity_f1: harmonic_mean(purity, inverse_purity),
        bcubed_precision,
        bcubed_recall,
        bcubed_f1: harmonic_mean(bcubed_precision, bcubed_recall),
        n: pred.len(),
    })
}

/// Scores a predicted labeling against gold. Both must cover exactly the same
/// instances.
pub fn evaluate(pred: &Labeling, gold: &Labeling) -> Result<ScoreReport> {
    let only_pred: Vec<&str> = pred.ids().filter(|id| !gold.contains(id)).collect();
    let only_gold: Vec<&str> = gold.ids().filter(|id| !pred.contains(id)).collect();
    if !only_pred.is_empty() || !only_gold.is_empty() {
        const SHOW: usize = 10;
        return Err(Error::data(format!(
            "instance sets differ: {} only in prediction {:?}, {} only in gold {:?}",
            only_pred.len(),
            &only_pred[..only_pred.len().min(SHOW)],
            only_gold.len(),
            &only_gold[..only_gold.len().min(SHOW)],
        )));
    }
    let (p, g): (Vec<&str>, Vec<&str>) = pred
        .iter()
        .map(|(id, label)| (label, gold.get(id).expect("checked above")))
        .unzip();
    score_slices(&p, &g)
}

impl fmt::Display for ScoreReport {
    /// Two aligned columns: metric name and value.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows = [
            ("purity", self.purity),
            ("inverse_purity", self.inverse_purity),
            ("purity_f1", self.purity_f1),
            ("bcubed_precision", self.bcubed_precision),
            ("bcubed_recall", self.bcubed_recall),
            ("bcubed_f1", self.bcubed_f1),
        ];
        for (name, v) in rows {
            writeln!(f, "{name:<18}{v:.6}")?;
        }
        writeln!(f, "{:<18}{}", "n", self.n)
    }
}
