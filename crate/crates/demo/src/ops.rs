//! The demo operations as plain Rust, independent of the JS bindings.

use std::collections::BTreeSet;

use semframe::cluster::{agglomerate, pairwise_distances, Linkage, Metric};
use semframe::eval::score_slices;
use semframe::logreg::{argmax, train_rows, TrainConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterOutput {
    pub labels: Vec<u32>,
    pub heights: Vec<f64>,
    pub merges: Vec<u32>,
}

fn points(xs: &[f64], ys: &[f64]) -> Result<Vec<Vec<f64>>, String> {
    if xs.len() != ys.len() {
        return Err(format!("{} x values but {} y values", xs.len(), ys.len()));
    }
    Ok(xs.iter().zip(ys).map(|(&x, &y)| vec![x, y]).collect())
}

pub fn cluster_points(
    xs: &[f64],
    ys: &[f64],
    metric: &str,
    linkage: &str,
    k: usize,
) -> Result<ClusterOutput, String> {
    let metric: Metric = metric.parse().map_err(|e: semframe::Error| e.to_string())?;
    let linkage: Linkage = linkage.parse().map_err(|e: semframe::Error| e.to_string())?;
    let rows = points(xs, ys)?;
    let dist = pairwise_distances(&rows, metric).map_err(|e| e.to_string())?;
    let (tree, clustering) = agglomerate(&dist, linkage, k).map_err(|e| e.to_string())?;
    Ok(ClusterOutput {
        labels: clustering.assignment.iter().map(|&c| c as u32).collect(),
        heights: tree.merges().iter().map(|m| m.height).collect(),
        merges: tree
            .merges()
            .iter()
            .flat_map(|m| [m.left as u32, m.right as u32])
            .collect(),
    })
}

pub fn score(pred: &str, gold: &str) -> Result<Vec<f64>, String> {
    let p: Vec<&str> = pred.split_whitespace().collect();
    let g: Vec<&str> = gold.split_whitespace().collect();
    if p.len() != g.len() {
        return Err(format!("{} predicted labels but {} gold labels", p.len(), g.len()));
    }
    let r = score_slices(&p, &g).map_err(|e| e.to_string())?;
    Ok(vec![
        r.purity,
        r.inverse_purity,
        r.purity_f1,
        r.bcubed_precision,
        r.bcubed_recall,
        r.bcubed_f1,
    ])
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionOutput {
    pub cells: Vec<u32>,
    pub loss: f64,
    pub accuracy: f64,
    pub epochs: usize,
}

/// Quadratic features of a point in the unit square, centred on the origin.
fn expand(x: f64, y: f64) -> Vec<f64> {
    let (u, v) = (2.0 * x - 1.0, 2.0 * y - 1.0);
    vec![u, v, u * u, v * v, u * v]
}

pub fn decision_map(
    xs: &[f64],
    ys: &[f64],
    classes: &[u32],
    width: usize,
    height: usize,
    l2: f64,
    epochs: usize,
) -> Result<DecisionOutput, String> {
    if classes.len() != xs.len() {
        return Err(format!("{} points but {} class ids", xs.len(), classes.len()));
    }
    if width == 0 || height == 0 {
        return Err("grid must be at least 1x1".into());
    }
    let rows: Vec<Vec<f64>> = points(xs, ys)?
        .iter()
        .map(|p| expand(p[0], p[1]))
        .collect();
    let ids: Vec<u32> = classes.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let targets: Vec<usize> = classes
        .iter()
        .map(|c| ids.binary_search(c).expect("id collected above"))
        .collect();
    let config = TrainConfig {
        learning_rate: 0.5,
        max_epochs: epochs,
        l2,
        ..TrainConfig::default()
    };
    let names = ids.iter().map(u32::to_string).collect();
    let report = train_rows(&rows, &targets, names, &config).map_err(|e| e.to_string())?;
    let model = report.model;
    let classify = |f: &[f64]| ids[argmax(&model.logits(f))];
    let correct = rows
        .iter()
        .zip(classes)
        .filter(|(r, &c)| classify(r) == c)
        .count();
    let mut cells = Vec::with_capacity(width * height);
    for r in 0..height {
        let y = 1.0 - (r as f64 + 0.5) / height as f64;
        for c in 0..width {
            let x = (c as f64 + 0.5) / width as f64;
            cells.push(classify(&expand(x, y)));
        }
    }
    Ok(DecisionOutput {
        cells,
        loss: *report.losses.last().expect("at least the initial loss"),
        accuracy: correct as f64 / rows.len() as f64,
        epochs: report.losses.len() - 1,
    })
}
