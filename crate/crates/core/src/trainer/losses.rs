use crate::error::{Error, Result};
use crate::k4::{EdgeWeights, NUM_EDGES};
use crate::metrics::sample_std;

const CLIP: f64 = 1e-12;

/// Mean binary cross-entropy and its gradient w.r.t. each prediction.
/// Predictions are clipped to `[1e-12, 1 - 1e-12]` before the logarithm.
pub fn bce_loss(predictions: &[f64], targets: &[f64]) -> Result<(f64, Vec<f64>)> {
    if predictions.len() != targets.len() || predictions.is_empty() {
        return Err(Error::structural(format!(
            "{} predictions vs {} targets",
            predictions.len(),
            targets.len()
        )));
    }
    let n = predictions.len() as f64;
    let mut loss = 0.0;
    let grad = predictions
        .iter()
        .zip(targets)
        .map(|(&p, &t)| {
            let p = p.clamp(CLIP, 1.0 - CLIP);
            loss -= t * p.ln() + (1.0 - t) * (1.0 - p).ln();
            (p - t) / (p * (1.0 - p)) / n
        })
        .collect();
    Ok((loss / n, grad))
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceLoss {
    pub sigma_batch: f64,
    /// `(σ_batch − σ_target)²`.
    pub loss: f64,
    pub grad: Vec<EdgeWeights>,
}

/// Squared gap between the batch's mean per-sample standard deviation
/// (population convention over the six edges) and `sigma_target`.
pub fn variance_loss(batch: &[EdgeWeights], sigma_target: f64) -> Result<VarianceLoss> {
    if batch.is_empty() {
        return Err(Error::structural("variance loss of an empty batch"));
    }
    let b = batch.len() as f64;
    let d = NUM_EDGES as f64;
    let stds: Vec<f64> = batch.iter().map(sample_std).collect();
    let sigma_batch = stds.iter().sum::<f64>() / b;
    let gap = sigma_batch - sigma_target;
    let grad = batch
        .iter()
        .zip(&stds)
        .map(|(w, &s)| {
            if s == 0.0 {
                return [0.0; NUM_EDGES];
            }
            let mean = w.iter().sum::<f64>() / d;
            std::array::from_fn(|k| 2.0 * gap / b * (w[k] - mean) / (d * s))
        })
        .collect();
    Ok(VarianceLoss {
        sigma_batch,
        loss: gap * gap,
        grad,
    })
}
