use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::layers::{
    conv2d_backward, conv2d_forward, dense_backward, dense_forward, maxpool_backward, maxpool_forward, softmax,
    transpose_kernels,
};
use super::{EngineRng, NnError, Scalar, Tensor4};

/// Standard deviation of the truncated-normal weight initializer.
pub const INIT_STD: f64 = 0.1;

/// `(channels, height, width)` of one example.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape3 {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl Shape3 {
    pub fn new(channels: usize, height: usize, width: usize) -> Self {
        Self {
            channels,
            height,
            width,
        }
    }

    pub fn len(&self) -> usize {
        self.channels * self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LayerSpec {
    /// Stride-1 "same" convolution with a square kernel.
    Conv2d {
        out_channels: usize,
        kernel: usize,
    },
    Relu,
    /// 2x2 window, stride 2.
    MaxPool2,
    /// Fully connected; flattens its input.
    Dense {
        units: usize,
    },
    Dropout {
        rate: f32,
    },
    Softmax,
}

/// Width knobs of the conv-pool-conv-pool-dense-dropout-dense-softmax stack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArchitectureConfig {
    pub conv1_channels: usize,
    pub conv2_channels: usize,
    pub kernel: usize,
    pub dense_units: usize,
    pub dropout: f64,
}

impl Default for ArchitectureConfig {
    fn default() -> Self {
        Self {
            conv1_channels: 32,
            conv2_channels: 64,
            kernel: 5,
            dense_units: 1024,
            dropout: 0.4,
        }
    }
}

impl ArchitectureConfig {
    pub fn layers(&self, num_classes: usize) -> Vec<LayerSpec> {
        vec![
            LayerSpec::Conv2d {
                out_channels: self.conv1_channels,
                kernel: self.kernel,
            },
            LayerSpec::Relu,
            LayerSpec::MaxPool2,
            LayerSpec::Conv2d {
                out_channels: self.conv2_channels,
                kernel: self.kernel,
            },
            LayerSpec::Relu,
            LayerSpec::MaxPool2,
            LayerSpec::Dense {
                units: self.dense_units,
            },
            LayerSpec::Relu,
            LayerSpec::Dropout {
                rate: self.dropout as f32,
            },
            LayerSpec::Dense { units: num_classes },
            LayerSpec::Softmax,
        ]
    }
}

/// Learnable weights and biases of one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Params<T> {
    pub weight: Vec<T>,
    pub bias: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Layer<T> {
    pub spec: LayerSpec,
    pub input: Shape3,
    pub output: Shape3,
    pub params: Option<Params<T>>,
    pub frozen: bool,
}

/// Sequential CNN ending in a softmax.
#[derive(Debug, Clone, PartialEq)]
pub struct CnnModel<T> {
    input: Shape3,
    layers: Vec<Layer<T>>,
    conv_fault: bool,
}

/// Forward-pass behaviour. Dropout is only active in training mode, where
/// masks are drawn from the supplied generator.
pub enum Mode<'a> {
    Eval,
    Train(&'a mut EngineRng),
}

/// Per-layer parameter gradients, aligned with the model's layers. Layers
/// without parameters, and frozen layers, hold `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub layers: Vec<Option<Params<T>>>,
}

/// Output of [`CnnModel::loss_and_backward`].
#[derive(Debug, Clone)]
pub struct BackwardPass<T> {
    pub loss: f64,
    pub gradients: Gradients<T>,
    pub probabilities: Tensor4<T>,
}

enum Cache<T> {
    Conv(Tensor4<T>),
    Relu(Vec<bool>),
    Pool { in_dims: [usize; 4], argmax: Vec<u32> },
    Dense(Tensor4<T>),
    Dropout(Vec<T>),
    Skip,
}

struct Trace<T> {
    caches: Vec<Cache<T>>,
    logits: Tensor4<T>,
    probabilities: Tensor4<T>,
}

fn shape_after(spec: &LayerSpec, input: Shape3) -> Result<Shape3, NnError> {
    Ok(match *spec {
        LayerSpec::Conv2d { out_channels, kernel } => {
            if out_channels == 0 || kernel == 0 {
                return Err(NnError::Config("conv needs positive channels and kernel".into()));
            }
            Shape3::new(out_channels, input.height, input.width)
        }
        LayerSpec::MaxPool2 => Shape3::new(input.channels, input.height.div_ceil(2), input.width.div_ceil(2)),
        LayerSpec::Dense { units } => {
            if units == 0 {
                return Err(NnError::Config("dense layer needs at least one unit".into()));
            }
            Shape3::new(units, 1, 1)
        }
        LayerSpec::Dropout { rate } => {
            if !(0.0..1.0).contains(&rate) {
                return Err(NnError::Config(format!("dropout rate {rate} outside [0, 1)")));
            }
            input
        }
        LayerSpec::Relu | LayerSpec::Softmax => input,
    })
}

fn truncated_normal<T: Scalar>(rng: &mut EngineRng, n: usize, std: f64) -> Vec<T> {
    (0..n)
        .map(|_| loop {
            let z: f64 = StandardNormal.sample(rng);
            if z.abs() <= 2.0 {
                break T::from_f64(z * std);
            }
        })
        .collect()
}

impl<T: Scalar> CnnModel<T> {
    /// Builds a model with truncated-normal weights (std [`INIT_STD`]) and
    /// zero biases.
    pub fn new(input: Shape3, specs: &[LayerSpec], rng: &mut EngineRng) -> Result<Self, NnError> {
        let model = Self::from_specs(input, specs, |spec, inp| {
            let (fan, n_out) = match *spec {
                LayerSpec::Conv2d { out_channels, kernel } => (inp.channels * kernel * kernel, out_channels),
                LayerSpec::Dense { units } => (inp.len(), units),
                _ => return None,
            };
            Some(Params {
                weight: truncated_normal(rng, fan * n_out, INIT_STD),
                bias: vec![T::ZERO; n_out],
            })
        })?;
        Ok(model)
    }

    /// Builds a model whose parameters come from `init(spec, input_shape)`.
    pub(crate) fn from_specs<F>(input: Shape3, specs: &[LayerSpec], mut init: F) -> Result<Self, NnError>
    where
        F: FnMut(&LayerSpec, Shape3) -> Option<Params<T>>,
    {
        if input.is_empty() {
            return Err(NnError::Config("input shape has no elements".into()));
        }
        match specs.iter().position(|s| matches!(s, LayerSpec::Softmax)) {
            Some(p) if p + 1 == specs.len() => {}
            _ => {
                return Err(NnError::Config(
                    "exactly one softmax layer, placed last, is required".into(),
                ))
            }
        }
        let mut layers = Vec::with_capacity(specs.len());
        let mut shape = input;
        for spec in specs {
            let output = shape_after(spec, shape)?;
            let params = init(spec, shape);
            if let Some(p) = &params {
                let (w, b) = match *spec {
                    LayerSpec::Conv2d { out_channels, kernel } => {
                        (out_channels * shape.channels * kernel * kernel, out_channels)
                    }
                    LayerSpec::Dense { units } => (units * shape.len(), units),
                    _ => (0, 0),
                };
                if p.weight.len() != w || p.bias.len() != b {
                    return Err(NnError::Shape(format!(
                        "parameters for {spec:?} hold {}/{} values, expected {w}/{b}",
                        p.weight.len(),
                        p.bias.len()
                    )));
                }
            } else if matches!(spec, LayerSpec::Conv2d { .. } | LayerSpec::Dense { .. }) {
                return Err(NnError::Shape(format!("missing parameters for {spec:?}")));
            }
            layers.push(Layer {
                spec: *spec,
                input: shape,
                output,
                params,
                frozen: false,
            });
            shape = output;
        }
        Ok(Self {
            input,
            layers,
            conv_fault: false,
        })
    }

    pub fn input_shape(&self) -> Shape3 {
        self.input
    }

    pub fn num_classes(&self) -> usize {
        self.layers.last().map_or(0, |l| l.output.len())
    }

    pub fn specs(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(|l| l.spec).collect()
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    /// Parameters of layer `i`, if it has any.
    pub fn params(&self, i: usize) -> Option<&Params<T>> {
        self.layers[i].params.as_ref()
    }

    pub fn params_mut(&mut self, i: usize) -> Option<&mut Params<T>> {
        self.layers[i].params.as_mut()
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .filter_map(|l| l.params.as_ref())
            .map(|p| p.weight.len() + p.bias.len())
            .sum()
    }

    /// Marks layer `i` as frozen: it receives no gradient and is never
    /// updated by an optimizer.
    pub fn set_frozen(&mut self, i: usize, frozen: bool) {
        self.layers[i].frozen = frozen;
    }

    pub fn is_frozen(&self, i: usize) -> bool {
        self.layers[i].frozen
    }

    /// Freezes every convolution layer.
    pub fn freeze_convolutions(&mut self) {
        for l in &mut self.layers {
            if matches!(l.spec, LayerSpec::Conv2d { .. }) {
                l.frozen = true;
            }
        }
    }

    /// (frozen, trainable) parameter counts.
    pub fn frozen_split(&self) -> (usize, usize) {
        self.layers
            .iter()
            .filter_map(|l| l.params.as_ref().map(|p| (l.frozen, p.weight.len() + p.bias.len())))
            .fold(
                (0, 0),
                |(f, t), (frozen, n)| if frozen { (f + n, t) } else { (f, t + n) },
            )
    }

    /// Replaces the last dense layer with a freshly initialized one producing
    /// `num_classes` outputs.
    pub fn replace_head(&mut self, num_classes: usize, rng: &mut EngineRng) -> Result<(), NnError> {
        let idx = self
            .layers
            .iter()
            .rposition(|l| matches!(l.spec, LayerSpec::Dense { .. }))
            .ok_or_else(|| NnError::Config("model has no dense layer to replace".into()))?;
        if self.layers[idx + 1..]
            .iter()
            .any(|l| !matches!(l.spec, LayerSpec::Softmax | LayerSpec::Relu | LayerSpec::Dropout { .. }))
        {
            return Err(NnError::Config("last dense layer is not the classifier head".into()));
        }
        let fan = self.layers[idx].input.len();
        let layer = &mut self.layers[idx];
        layer.spec = LayerSpec::Dense { units: num_classes };
        layer.output = Shape3::new(num_classes, 1, 1);
        layer.params = Some(Params {
            weight: truncated_normal(rng, fan * num_classes, INIT_STD),
            bias: vec![T::ZERO; num_classes],
        });
        layer.frozen = false;
        for l in &mut self.layers[idx + 1..] {
            l.input = Shape3::new(num_classes, 1, 1);
            l.output = l.input;
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> CnnModel<U> {
        let conv = |v: &[T]| v.iter().map(|x| U::from_f64(x.to_f64())).collect();
        CnnModel {
            input: self.input,
            conv_fault: self.conv_fault,
            layers: self
                .layers
                .iter()
                .map(|l| Layer {
                    spec: l.spec,
                    input: l.input,
                    output: l.output,
                    frozen: l.frozen,
                    params: l.params.as_ref().map(|p| Params {
                        weight: conv(&p.weight),
                        bias: conv(&p.bias),
                    }),
                })
                .collect(),
        }
    }

    /// Makes convolution backward passes use transposed kernels. Only for
    /// exercising the gradient checker.
    #[doc(hidden)]
    pub fn inject_conv_backward_fault(&mut self) {
        self.conv_fault = true;
    }

    fn check_input(&self, x: &Tensor4<T>) -> Result<(), NnError> {
        let [b, c, h, w] = x.dims();
        if b == 0 || Shape3::new(c, h, w) != self.input {
            return Err(NnError::Shape(format!(
                "batch dims {:?} do not match model input {:?}",
                x.dims(),
                self.input
            )));
        }
        Ok(())
    }

    /// Class probabilities, one row per batch item.
    pub fn forward(&self, x: &Tensor4<T>, mode: Mode<'_>) -> Result<Tensor4<T>, NnError> {
        Ok(self.run(x, mode, usize::MAX)?.probabilities)
    }

    /// Runs the network, caching what backward needs for layers at index
    /// `>= cache_from`.
    fn run(&self, x: &Tensor4<T>, mut mode: Mode<'_>, cache_from: usize) -> Result<Trace<T>, NnError> {
        self.check_input(x)?;
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut act = x.clone();
        let mut logits = None;
        for (i, layer) in self.layers.iter().enumerate() {
            let keep = i >= cache_from;
            let b = act.batch();
            let out_dims = [b, layer.output.channels, layer.output.height, layer.output.width];
            let (next, cache) = match layer.spec {
                LayerSpec::Conv2d { kernel, .. } => {
                    let p = layer.params.as_ref().expect("conv params");
                    let out = conv2d_forward(&act, &p.weight, &p.bias, kernel)?;
                    (out, if keep { Cache::Conv(act) } else { Cache::Skip })
                }
                LayerSpec::Relu => {
                    let mut out = act;
                    let mut mask = Vec::new();
                    if keep {
                        mask.reserve(out.data().len());
                    }
                    for v in out.data_mut() {
                        let on = *v > T::ZERO;
                        if !on {
                            *v = T::ZERO;
                        }
                        if keep {
                            mask.push(on);
                        }
                    }
                    (out, if keep { Cache::Relu(mask) } else { Cache::Skip })
                }
                LayerSpec::MaxPool2 => {
                    let in_dims = act.dims();
                    let (out, argmax) = maxpool_forward(&act);
                    (
                        out,
                        if keep {
                            Cache::Pool { in_dims, argmax }
                        } else {
                            Cache::Skip
                        },
                    )
                }
                LayerSpec::Dense { .. } => {
                    let p = layer.params.as_ref().expect("dense params");
                    let out = dense_forward(&act, &p.weight, &p.bias)?;
                    (out, if keep { Cache::Dense(act) } else { Cache::Skip })
                }
                LayerSpec::Dropout { rate } => match &mut mode {
                    Mode::Train(rng) if rate > 0.0 => {
                        let scale = T::from_f64(1.0 / (1.0 - f64::from(rate)));
                        let mask: Vec<T> = (0..act.data().len())
                            .map(|_| {
                                if rng.random::<f64>() >= f64::from(rate) {
                                    scale
                                } else {
                                    T::ZERO
                                }
                            })
                            .collect();
                        let mut out = act;
                        for (v, &m) in out.data_mut().iter_mut().zip(&mask) {
                            *v *= m;
                        }
                        (out, if keep { Cache::Dropout(mask) } else { Cache::Skip })
                    }
                    _ => (act, Cache::Skip),
                },
                LayerSpec::Softmax => {
                    let probs = softmax(&act);
                    logits = Some(act);
                    (probs, Cache::Skip)
                }
            };
            act = next.reshape(out_dims);
            caches.push(cache);
        }
        Ok(Trace {
            caches,
            logits: logits.expect("softmax layer"),
            probabilities: act,
        })
    }

    fn check_labels(&self, x: &Tensor4<T>, labels: &[usize]) -> Result<(), NnError> {
        if labels.len() != x.batch() {
            return Err(NnError::Shape(format!(
                "{} labels for a batch of {}",
                labels.len(),
                x.batch()
            )));
        }
        let classes = self.num_classes();
        if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
            return Err(NnError::Label { label: bad, classes });
        }
        Ok(())
    }

    /// Mean cross-entropy of the batch.
    pub fn loss(&self, x: &Tensor4<T>, labels: &[usize], mode: Mode<'_>) -> Result<f64, NnError> {
        self.check_labels(x, labels)?;
        let trace = self.run(x, mode, usize::MAX)?;
        Ok(cross_entropy(&trace.logits, labels))
    }

    /// Mean cross-entropy loss and the gradient of every trainable parameter.
    pub fn loss_and_backward(
        &self,
        x: &Tensor4<T>,
        labels: &[usize],
        mode: Mode<'_>,
    ) -> Result<BackwardPass<T>, NnError> {
        self.check_labels(x, labels)?;
        let lowest = self
            .layers
            .iter()
            .position(|l| l.params.is_some() && !l.frozen)
            .unwrap_or(self.layers.len());
        let trace = self.run(x, mode, lowest)?;
        let loss = cross_entropy(&trace.logits, labels);

        // softmax + cross-entropy: dL/dlogits = (p - onehot) / batch
        let b = x.batch();
        let inv_b = T::from_f64(1.0 / b as f64);
        let mut grad = trace.probabilities.clone();
        let classes = grad.item_len();
        for (row, &label) in grad.data_mut().chunks_mut(classes).zip(labels) {
            row[label] -= T::ONE;
            for v in row.iter_mut() {
                *v *= inv_b;
            }
        }

        let mut grads: Vec<Option<Params<T>>> = vec![None; self.layers.len()];
        let mut caches = trace.caches;
        for i in (lowest..self.layers.len()).rev() {
            let layer = &self.layers[i];
            let cache = std::mem::replace(&mut caches[i], Cache::Skip);
            let need_input = i > lowest;
            let in_dims = [b, layer.input.channels, layer.input.height, layer.input.width];
            match (layer.spec, cache) {
                (LayerSpec::Softmax, _) => {}
                (LayerSpec::Conv2d { kernel, .. }, Cache::Conv(input)) => {
                    let p = layer.params.as_ref().expect("conv params");
                    let mut g = Params {
                        weight: vec![T::ZERO; p.weight.len()],
                        bias: vec![T::ZERO; p.bias.len()],
                    };
                    let dx = conv2d_backward(
                        &input,
                        &p.weight,
                        kernel,
                        &grad,
                        &mut g.weight,
                        &mut g.bias,
                        need_input,
                        self.conv_fault,
                    );
                    if self.conv_fault {
                        let planes = g.weight.len() / (kernel * kernel);
                        let w = std::mem::take(&mut g.weight);
                        g.weight = transpose_kernels(&w, planes, kernel);
                    }
                    if !layer.frozen {
                        grads[i] = Some(g);
                    }
                    match dx {
                        Some(dx) => grad = dx,
                        None => break,
                    }
                }
                (LayerSpec::Dense { .. }, Cache::Dense(input)) => {
                    let p = layer.params.as_ref().expect("dense params");
                    let mut g = Params {
                        weight: vec![T::ZERO; p.weight.len()],
                        bias: vec![T::ZERO; p.bias.len()],
                    };
                    let dx = dense_backward(&input, &p.weight, &grad, &mut g.weight, &mut g.bias, need_input);
                    if !layer.frozen {
                        grads[i] = Some(g);
                    }
                    match dx {
                        Some(dx) => grad = dx.reshape(in_dims),
                        None => break,
                    }
                }
                (LayerSpec::Relu, Cache::Relu(mask)) => {
                    for (g, on) in grad.data_mut().iter_mut().zip(mask) {
                        if !on {
                            *g = T::ZERO;
                        }
                    }
                }
                (LayerSpec::MaxPool2, Cache::Pool { in_dims, argmax }) => {
                    grad = maxpool_backward(in_dims, &argmax, &grad);
                }
                (LayerSpec::Dropout { .. }, Cache::Dropout(mask)) => {
                    for (g, m) in grad.data_mut().iter_mut().zip(mask) {
                        *g *= m;
                    }
                }
                (LayerSpec::Dropout { .. }, Cache::Skip) => {}
                (spec, _) => unreachable!("missing cache for {spec:?}"),
            }
            grad = grad.reshape(in_dims);
        }
        Ok(BackwardPass {
            loss,
            gradients: Gradients { layers: grads },
            probabilities: trace.probabilities,
        })
    }

    /// Loss together with a hash of every ReLU on/off state and pooling
    /// winner. Two parameter settings with the same hash lie in the same
    /// smooth region of the loss surface.
    pub fn loss_with_signature(&self, x: &Tensor4<T>, labels: &[usize], mode: Mode<'_>) -> Result<(f64, u64), NnError> {
        self.check_labels(x, labels)?;
        let trace = self.run(x, mode, 0)?;
        let mut h = DefaultHasher::new();
        for cache in &trace.caches {
            match cache {
                Cache::Relu(mask) => mask.hash(&mut h),
                Cache::Pool { argmax, .. } => argmax.hash(&mut h),
                _ => {}
            }
        }
        Ok((cross_entropy(&trace.logits, labels), h.finish()))
    }
}

/// Mean over rows of `logsumexp(z) - z[label]`, accumulated in f64.
pub(crate) fn cross_entropy<T: Scalar>(logits: &Tensor4<T>, labels: &[usize]) -> f64 {
    let n = logits.item_len();
    let total: f64 = logits
        .data()
        .chunks(n)
        .zip(labels)
        .map(|(row, &label)| {
            let max = row.iter().fold(f64::NEG_INFINITY, |m, v| m.max(v.to_f64()));
            let lse = max + row.iter().map(|v| (v.to_f64() - max).exp()).sum::<f64>().ln();
            lse - row[label].to_f64()
        })
        .sum();
    total / labels.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn tiny(rng: &mut EngineRng) -> CnnModel<f64> {
        let specs = ArchitectureConfig {
            conv1_channels: 2,
            conv2_channels: 3,
            kernel: 3,
            dense_units: 5,
            dropout: 0.5,
        }
        .layers(3);
        CnnModel::new(Shape3::new(1, 6, 6), &specs, rng).unwrap()
    }

    fn batch(rng: &mut EngineRng, b: usize) -> Tensor4<f64> {
        let data = (0..b * 36).map(|_| rng.random::<f64>()).collect();
        Tensor4::from_vec([b, 1, 6, 6], data).unwrap()
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let mut rng = EngineRng::seed_from_u64(1);
        let m = tiny(&mut rng);
        let x = batch(&mut rng, 4);
        let p = m.forward(&x, Mode::Eval).unwrap();
        for row in p.data().chunks(3) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-5);
            assert!(row.iter().all(|&v| v > 0.0 && v < 1.0));
        }
        assert_eq!(p, m.forward(&x, Mode::Eval).unwrap());
    }

    #[test]
    fn equal_logits_give_uniform_and_ln_c_loss() {
        let mut rng = EngineRng::seed_from_u64(2);
        let mut m = tiny(&mut rng);
        let head = m.params_mut(9).unwrap();
        head.weight.fill(0.0);
        head.bias.fill(0.25);
        let x = batch(&mut rng, 2);
        let p = m.forward(&x, Mode::Eval).unwrap();
        assert!(p.data().iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-12));
        let loss = m.loss(&x, &[0, 2], Mode::Eval).unwrap();
        assert!((loss - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn certain_prediction_has_zero_loss() {
        let logits = Tensor4::from_vec([1, 3, 1, 1], vec![0.0f64, 1000.0, 0.0]).unwrap();
        assert!(cross_entropy(&logits, &[1]) < 1e-12);
    }

    #[test]
    fn zero_dropout_train_equals_eval() {
        let mut rng = EngineRng::seed_from_u64(3);
        let specs = ArchitectureConfig {
            conv1_channels: 2,
            conv2_channels: 2,
            kernel: 3,
            dense_units: 4,
            dropout: 0.0,
        }
        .layers(2);
        let m: CnnModel<f32> = CnnModel::new(Shape3::new(1, 6, 6), &specs, &mut rng).unwrap();
        let x = batch(&mut rng, 3).cast::<f32>();
        let mut train_rng = EngineRng::seed_from_u64(9);
        assert_eq!(
            m.forward(&x, Mode::Eval).unwrap(),
            m.forward(&x, Mode::Train(&mut train_rng)).unwrap()
        );
    }

    #[test]
    fn rejects_bad_configs_and_inputs() {
        let mut rng = EngineRng::seed_from_u64(4);
        let no_softmax = [LayerSpec::Dense { units: 2 }];
        assert!(CnnModel::<f32>::new(Shape3::new(1, 2, 2), &no_softmax, &mut rng).is_err());
        let two = [LayerSpec::Softmax, LayerSpec::Dense { units: 2 }, LayerSpec::Softmax];
        assert!(CnnModel::<f32>::new(Shape3::new(1, 2, 2), &two, &mut rng).is_err());
        let m = tiny(&mut rng);
        let wrong = Tensor4::zeros([1, 1, 5, 6]);
        assert!(matches!(m.forward(&wrong, Mode::Eval), Err(NnError::Shape(_))));
        let x = batch(&mut rng, 1);
        assert!(matches!(
            m.loss_and_backward(&x, &[3], Mode::Eval),
            Err(NnError::Label { label: 3, classes: 3 })
        ));
    }

    #[test]
    fn frozen_layers_get_no_gradient() {
        let mut rng = EngineRng::seed_from_u64(5);
        let mut m = tiny(&mut rng);
        m.freeze_convolutions();
        let x = batch(&mut rng, 2);
        let pass = m.loss_and_backward(&x, &[0, 1], Mode::Eval).unwrap();
        assert!(pass.gradients.layers[0].is_none());
        assert!(pass.gradients.layers[3].is_none());
        assert!(pass.gradients.layers[6].is_some());
        assert!(pass.gradients.layers[9].is_some());
        let (frozen, trainable) = m.frozen_split();
        assert_eq!(frozen, 2 * 9 + 2 + 3 * 2 * 9 + 3);
        assert_eq!(frozen + trainable, m.param_count());
    }

    #[test]
    fn replace_head_changes_class_count() {
        let mut rng = EngineRng::seed_from_u64(6);
        let mut m = tiny(&mut rng);
        m.replace_head(7, &mut rng).unwrap();
        assert_eq!(m.num_classes(), 7);
        let x = batch(&mut rng, 2);
        assert_eq!(m.forward(&x, Mode::Eval).unwrap().dims(), [2, 7, 1, 1]);
    }
}
