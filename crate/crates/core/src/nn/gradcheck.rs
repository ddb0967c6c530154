//! Finite-difference verification of the analytic backward pass.
//!
//! Analytic gradients come from the model at its own precision. Central
//! differences are always evaluated on an `f64` copy of the model (the cast
//! from `f32` is exact), so the comparison measures the backward pass rather
//! than the rounding noise of an `f32` loss. Perturbations that change any
//! ReLU state or pooling winner straddle a kink of the loss; those
//! coordinates are skipped and counted.

use rand::seq::index::sample;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use super::{CnnModel, EngineRng, LayerSpec, Mode, NnError, Scalar, Tensor4};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradCheckConfig {
    /// Central-difference step.
    pub step: f64,
    /// Check at most this many coordinates per parameter tensor.
    pub max_per_tensor: Option<usize>,
    /// Denominator floor of the relative error
    /// `|a - n| / max(|a|, |n|, floor)`.
    pub floor: f64,
    /// Seed for coordinate sampling and dropout masks.
    pub seed: u64,
}

impl GradCheckConfig {
    /// Step 1e-3, for models running in `f32`.
    pub fn single_precision() -> Self {
        Self {
            step: 1e-3,
            max_per_tensor: None,
            floor: 1e-4,
            seed: 0,
        }
    }

    /// Step 1e-4, for models running in `f64`. Central-difference rounding
    /// noise is about 1e-12 at this step, so gradients smaller than the
    /// 1e-5 floor are compared on an absolute scale.
    pub fn double_precision() -> Self {
        Self {
            step: 1e-4,
            max_per_tensor: None,
            floor: 1e-5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerCheck {
    pub layer: usize,
    pub kind: String,
    pub checked: usize,
    pub max_rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub checked: usize,
    /// Coordinates skipped because the perturbation crossed a kink.
    pub skipped_kinks: usize,
    pub layers: Vec<LayerCheck>,
}

fn rel_error(a: f64, n: f64, floor: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(floor)
}

fn param_slot(m: &mut CnnModel<f64>, layer: usize, which: usize, idx: usize) -> &mut f64 {
    let p = m.params_mut(layer).expect("parameterized layer");
    if which == 0 {
        &mut p.weight[idx]
    } else {
        &mut p.bias[idx]
    }
}

fn layer_kind(spec: &LayerSpec) -> &'static str {
    match spec {
        LayerSpec::Conv2d { .. } => "conv2d",
        LayerSpec::Dense { .. } => "dense",
        _ => "other",
    }
}

/// Compares analytic and central-difference gradients of the mean
/// cross-entropy for every trainable parameter (or a seeded sample of them).
/// Dropout, when present, runs in training mode with the same mask for every
/// evaluation.
pub fn grad_check<T: Scalar>(
    model: &CnnModel<T>,
    batch: &Tensor4<T>,
    labels: &[usize],
    cfg: &GradCheckConfig,
) -> Result<GradCheckReport, NnError> {
    let masks = || EngineRng::seed_from_u64(cfg.seed ^ 0x5eed);
    let analytic = model
        .loss_and_backward(batch, labels, Mode::Train(&mut masks()))?
        .gradients;

    let mut reference: CnnModel<f64> = model.cast();
    let x = batch.cast::<f64>();
    let (_, base_sig) = reference.loss_with_signature(&x, labels, Mode::Train(&mut masks()))?;
    let mut picker = EngineRng::seed_from_u64(cfg.seed);

    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        checked: 0,
        skipped_kinks: 0,
        layers: Vec::new(),
    };
    for (layer, grad) in analytic.layers.iter().enumerate() {
        let Some(grad) = grad else { continue };
        let mut lc = LayerCheck {
            layer,
            kind: layer_kind(&model.specs()[layer]).to_string(),
            checked: 0,
            max_rel_error: 0.0,
        };
        for which in 0..2 {
            let g = if which == 0 { &grad.weight } else { &grad.bias };
            let coords: Vec<usize> = match cfg.max_per_tensor {
                Some(m) if m < g.len() => {
                    let mut v = sample(&mut picker, g.len(), m).into_vec();
                    v.sort_unstable();
                    v
                }
                _ => (0..g.len()).collect(),
            };
            for idx in coords {
                let original = *param_slot(&mut reference, layer, which, idx);
                let mut eval = |value: f64| -> Result<(f64, u64), NnError> {
                    *param_slot(&mut reference, layer, which, idx) = value;
                    reference.loss_with_signature(&x, labels, Mode::Train(&mut masks()))
                };
                let (plus, sig_plus) = eval(original + cfg.step)?;
                let (minus, sig_minus) = eval(original - cfg.step)?;
                *param_slot(&mut reference, layer, which, idx) = original;
                if sig_plus != base_sig || sig_minus != base_sig {
                    report.skipped_kinks += 1;
                    continue;
                }
                let numeric = (plus - minus) / (2.0 * cfg.step);
                let err = rel_error(g[idx].to_f64(), numeric, cfg.floor);
                lc.max_rel_error = lc.max_rel_error.max(err);
                lc.checked += 1;
            }
        }
        report.max_rel_error = report.max_rel_error.max(lc.max_rel_error);
        report.checked += lc.checked;
        report.layers.push(lc);
    }
    Ok(report)
}
