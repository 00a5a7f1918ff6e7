//! Browser bindings for three interactive operations on 2-D points:
//! agglomerative clustering, clustering scores, and a logistic-regression
//! decision map.

use wasm_bindgen::prelude::*;

pub mod ops;

fn js_err(e: String) -> JsError {
    JsError::new(&e)
}

#[wasm_bindgen]
pub struct ClusterView {
    labels: Vec<u32>,
    heights: Vec<f64>,
    merges: Vec<u32>,
}

#[wasm_bindgen]
impl ClusterView {
    /// Cluster index per point.
    #[wasm_bindgen(getter)]
    pub fn labels(&self) -> Vec<u32> {
        self.labels.clone()
    }

    /// Merge heights in merge order.
    #[wasm_bindgen(getter)]
    pub fn heights(&self) -> Vec<f64> {
        self.heights.clone()
    }

    /// Flattened `(left, right)` node ids per merge; ids ≥ n are earlier merges.
    #[wasm_bindgen(getter)]
    pub fn merges(&self) -> Vec<u32> {
        self.merges.clone()
    }
}

#[wasm_bindgen(js_name = clusterPoints)]
pub fn cluster_points(
    xs: &[f64],
    ys: &[f64],
    metric: &str,
    linkage: &str,
    k: usize,
) -> Result<ClusterView, JsError> {
    let out = ops::cluster_points(xs, ys, metric, linkage, k).map_err(js_err)?;
    Ok(ClusterView {
        labels: out.labels,
        heights: out.heights,
        merges: out.merges,
    })
}

/// `[purity, inverse_purity, purity_f1, bcubed_precision, bcubed_recall, bcubed_f1]`
/// for two whitespace-separated label sequences of equal length.
#[wasm_bindgen]
pub fn score(pred: &str, gold: &str) -> Result<Vec<f64>, JsError> {
    ops::score(pred, gold).map_err(js_err)
}

#[wasm_bindgen]
pub struct DecisionMap {
    cells: Vec<u32>,
    loss: f64,
    accuracy: f64,
    epochs: usize,
}

#[wasm_bindgen]
impl DecisionMap {
    /// Row-major predicted class per grid cell, top row first.
    #[wasm_bindgen(getter)]
    pub fn cells(&self) -> Vec<u32> {
        self.cells.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn loss(&self) -> f64 {
        self.loss
    }

    #[wasm_bindgen(getter)]
    pub fn accuracy(&self) -> f64 {
        self.accuracy
    }

    #[wasm_bindgen(getter)]
    pub fn epochs(&self) -> usize {
        self.epochs
    }
}

/// Trains on points in the unit square and classifies a `width × height` grid.
#[wasm_bindgen(js_name = decisionMap)]
pub fn decision_map(
    xs: &[f64],
    ys: &[f64],
    classes: &[u32],
    width: usize,
    height: usize,
    l2: f64,
    epochs: usize,
) -> Result<DecisionMap, JsError> {
    let out = ops::decision_map(xs, ys, classes, width, height, l2, epochs).map_err(js_err)?;
    Ok(DecisionMap {
        cells: out.cells,
        loss: out.loss,
        accuracy: out.accuracy,
        epochs: out.epochs,
    })
}
