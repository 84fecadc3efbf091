//! Margin adjustment: the step-function CDF that interpolates the pairs
//! (y_t, Φ(z_t)) of one posterior draw, its generalized inverse, and the
//! empirical CDF.

use crate::error::{DgfcError, Result};
use crate::random::norm_cdf;

/// Right-continuous step CDF with jumps at sorted unique locations.
/// Heights are nondecreasing in (0, 1] and the last height is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCdf {
    locations: Vec<f64>,
    heights: Vec<f64>,
}

impl StepCdf {
    pub fn new(locations: Vec<f64>, heights: Vec<f64>) -> Result<Self> {
        if locations.is_empty() || locations.len() != heights.len() {
            return Err(DgfcError::Contract(
                "step CDF needs matching nonempty locations and heights".into(),
            ));
        }
        if locations.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(DgfcError::Contract("step CDF locations must increase strictly".into()));
        }
        if heights.iter().any(|&h| !(h > 0.0 && h <= 1.0)) || heights.windows(2).any(|w| w[0] > w[1]) {
            return Err(DgfcError::Contract(
                "step CDF heights must be nondecreasing in (0, 1]".into(),
            ));
        }
        if *heights.last().unwrap() != 1.0 {
            return Err(DgfcError::Contract("step CDF must end at height 1".into()));
        }
        Ok(Self { locations, heights })
    }

    pub fn locations(&self) -> &[f64] {
        &self.locations
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        step_cdf_eval(self, x)
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        step_cdf_quantile(self, u)
    }
}

/// F̃(x) = max{Φ(z_t) : y_t ≤ x} on [min y, max y), 0 below, 1 from max y on.
pub fn margin_adjustment(y: &[f64], z: &[f64]) -> Result<StepCdf> {
    if y.is_empty() || y.len() != z.len() {
        return Err(DgfcError::Contract(
            "margin adjustment needs equal nonempty y and z".into(),
        ));
    }
    let mut order: Vec<usize> = (0..y.len()).collect();
    order.sort_by(|&a, &b| y[a].total_cmp(&y[b]).then(z[a].total_cmp(&z[b])));
    let mut locations: Vec<f64> = Vec::new();
    let mut class_max: Vec<f64> = Vec::new();
    let mut class_min: Vec<f64> = Vec::new();
    for &t in &order {
        if locations.last() == Some(&y[t]) {
            let last = class_max.len() - 1;
            class_max[last] = class_max[last].max(z[t]);
        } else {
            locations.push(y[t]);
            class_max.push(z[t]);
            class_min.push(z[t]);
        }
    }
    for c in 1..locations.len() {
        if !(class_max[c - 1] < class_min[c]) {
            return Err(DgfcError::Numeric(format!(
                "latent values violate the ordering of observed values at {}",
                locations[c]
            )));
        }
    }
    let mut heights: Vec<f64> = class_max
        .iter()
        .map(|&v| norm_cdf(v).max(f64::MIN_POSITIVE))
        .collect();
    *heights.last_mut().unwrap() = 1.0;
    for c in 1..heights.len() {
        // Φ may round two ordered latent values to the same probability
        heights[c] = heights[c].max(heights[c - 1]);
    }
    StepCdf::new(locations, heights)
}

pub fn step_cdf_eval(cdf: &StepCdf, x: f64) -> f64 {
    // number of locations ≤ x
    let idx = cdf.locations.partition_point(|&l| l <= x);
    if idx == 0 {
        0.0
    } else {
        cdf.heights[idx - 1]
    }
}

/// Generalized inverse inf{x : F̃(x) ≥ u}, always a jump location.
pub fn step_cdf_quantile(cdf: &StepCdf, u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(DgfcError::Contract(format!("quantile level {u} outside (0, 1)")));
    }
    let idx = cdf.heights.partition_point(|&h| h < u);
    Ok(cdf.locations[idx.min(cdf.locations.len() - 1)])
}

/// Empirical CDF: heights #{y_t ≤ ℓ}/T at each unique value ℓ.
pub fn ecdf(y: &[f64]) -> Result<StepCdf> {
    if y.is_empty() {
        return Err(DgfcError::Contract("ecdf needs at least one value".into()));
    }
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let t_len = sorted.len() as f64;
    let mut locations = Vec::new();
    let mut heights = Vec::new();
    for (idx, &v) in sorted.iter().enumerate() {
        if locations.last() == Some(&v) {
            *heights.last_mut().unwrap() = (idx + 1) as f64 / t_len;
        } else {
            locations.push(v);
            heights.push((idx + 1) as f64 / t_len);
        }
    }
    *heights.last_mut().unwrap() = 1.0;
    StepCdf::new(locations, heights)
}

/// Pointwise average of several step CDFs evaluated on a grid.
pub fn mean_cdf_on_grid(cdfs: &[StepCdf], grid: &[f64]) -> Vec<f64> {
    let m = cdfs.len().max(1) as f64;
    grid.iter()
        .map(|&x| cdfs.iter().map(|c| c.eval(x)).sum::<f64>() / m)
        .collect()
}
