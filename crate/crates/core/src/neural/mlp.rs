//! Two-headed MLP with hand-written reverse mode.
//!
//! ```text
//! γ(x) ─► trunk (D × ReLU, γ(x) re-concatenated at the skip layer) ─► h
//! h ─► linear ─► softplus ─► σ
//! [h, γ(ω_l), γ(ω_o)] ─► S × ReLU ─► linear(3) ─► scaled sigmoid ─► ρ
//! ```
//!
//! All parameters live in one flat buffer so optimisers and checkpoints can
//! treat the network as a single vector. Activations are row-major
//! `batch × features`.

use serde::{Deserialize, Serialize};

use super::scalar::{gemm, Mat};
use super::{NeuralError, PositionalEncoding, Scalar};
use crate::geom::{Dir3, Rng, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub pos_freqs: usize,
    pub dir_freqs: usize,
    pub trunk_depth: usize,
    pub trunk_width: usize,
    /// Trunk layer whose input is `[h, γ(x)]`; must lie in `1..trunk_depth`.
    pub skip_layer: Option<usize>,
    pub scatter_depth: usize,
    pub scatter_width: usize,
    pub sigmoid_delta: f64,
    /// Zero the light-direction features, giving a lighting-blind model.
    pub blind_light_dir: bool,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            pos_freqs: 10,
            dir_freqs: 4,
            trunk_depth: 8,
            trunk_width: 256,
            skip_layer: Some(5),
            scatter_depth: 4,
            scatter_width: 128,
            sigmoid_delta: 1.2,
            blind_light_dir: false,
        }
    }
}

impl MlpConfig {
    pub fn position_encoding(&self) -> PositionalEncoding {
        PositionalEncoding::new(self.pos_freqs, true)
    }

    pub fn direction_encoding(&self) -> PositionalEncoding {
        PositionalEncoding::new(self.dir_freqs, false)
    }

    pub fn pos_features(&self) -> usize {
        self.position_encoding().output_len()
    }

    /// Both encoded directions together.
    pub fn dir_features(&self) -> usize {
        2 * self.direction_encoding().output_len()
    }

    pub fn validate(&self) -> Result<(), NeuralError> {
        let bad = |m: String| Err(NeuralError::Config(m));
        if self.trunk_depth == 0 || self.trunk_width == 0 {
            return bad("trunk needs at least one layer of nonzero width".into());
        }
        if self.scatter_depth > 0 && self.scatter_width == 0 {
            return bad("scatter head width must be nonzero".into());
        }
        if let Some(s) = self.skip_layer {
            if s == 0 || s >= self.trunk_depth {
                return bad(format!("skip layer {s} must lie in 1..{}", self.trunk_depth));
            }
        }
        if !(self.sigmoid_delta > 0.0 && self.sigmoid_delta.is_finite()) {
            return bad(format!("sigmoid delta must be positive, got {}", self.sigmoid_delta));
        }
        Ok(())
    }

    /// `(in, out)` of every layer: trunk, density head, scatter hidden, scatter output.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        let (p, h) = (self.pos_features(), self.trunk_width);
        let mut dims = Vec::new();
        for i in 0..self.trunk_depth {
            let inp = match i {
                0 => p,
                _ if Some(i) == self.skip_layer => h + p,
                _ => h,
            };
            dims.push((inp, h));
        }
        dims.push((h, 1));
        let mut inp = h + self.dir_features();
        for _ in 0..self.scatter_depth {
            dims.push((inp, self.scatter_width));
            inp = self.scatter_width;
        }
        dims.push((inp, 3));
        dims
    }

    pub fn param_count(&self) -> usize {
        self.layer_dims().iter().map(|(i, o)| i * o + o).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layer {
    pub inp: usize,
    pub out: usize,
    /// Offset of the `out × inp` row-major weight block; biases follow it.
    pub offset: usize,
}

impl Layer {
    pub fn weights<'a, S>(&self, params: &'a [S]) -> &'a [S] {
        &params[self.offset..self.offset + self.inp * self.out]
    }

    pub fn bias<'a, S>(&self, params: &'a [S]) -> &'a [S] {
        let b = self.offset + self.inp * self.out;
        &params[b..b + self.out]
    }

    fn forward<S: Scalar>(&self, params: &[S], x: &[S], n: usize, y: &mut Vec<S>) {
        y.clear();
        let b = self.bias(params);
        for _ in 0..n {
            y.extend_from_slice(b);
        }
        gemm(Mat::new(x, n, self.inp), Mat::t(self.weights(params), self.inp, self.out), y, true);
    }

    /// Accumulates `dW`, `db` into `grad`; returns `dx` when asked.
    fn backward<S: Scalar>(&self, params: &[S], x: &[S], dy: &[S], n: usize, grad: &mut [S], want_dx: bool) -> Vec<S> {
        let (w_end, b_end) = (self.offset + self.inp * self.out, self.offset + self.inp * self.out + self.out);
        gemm(Mat::t(dy, self.out, n), Mat::new(x, n, self.inp), &mut grad[self.offset..w_end], true);
        let db = &mut grad[w_end..b_end];
        for row in dy.chunks_exact(self.out) {
            for (g, d) in db.iter_mut().zip(row) {
                *g = *g + *d;
            }
        }
        if !want_dx {
            return Vec::new();
        }
        let mut dx = vec![S::zero(); n * self.inp];
        gemm(Mat::new(dy, n, self.out), Mat::new(self.weights(params), self.out, self.inp), &mut dx, false);
        dx
    }
}

pub fn softplus<S: Scalar>(x: S) -> S {
    let twenty = S::of(20.0);
    if x > twenty {
        x
    } else if x < -twenty {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

pub fn sigmoid<S: Scalar>(x: S) -> S {
    if x >= S::zero() {
        S::one() / (S::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (S::one() + e)
    }
}

/// `δ·(sigmoid(v) − ½) + ½` before clamping to `[0, 1]`.
pub fn scaled_sigmoid_raw<S: Scalar>(v: S, delta: S) -> S {
    let half = S::of(0.5);
    delta * (sigmoid(v) - half) + half
}

pub fn scaled_sigmoid<S: Scalar>(v: S, delta: S) -> S {
    scaled_sigmoid_raw(v, delta).max(S::zero()).min(S::one())
}

/// Network inputs for a batch of points.
#[derive(Clone, Debug, Default)]
pub struct Inputs<S> {
    pub n: usize,
    /// `n × pos_features`
    pub pos: Vec<S>,
    /// `n × dir_features`: `γ(ω_l)` then `γ(ω_o)`.
    pub dirs: Vec<S>,
}

impl<S: Scalar> Inputs<S> {
    pub fn with_capacity(cfg: &MlpConfig, n: usize) -> Self {
        Self {
            n: 0,
            pos: Vec::with_capacity(n * cfg.pos_features()),
            dirs: Vec::with_capacity(n * cfg.dir_features()),
        }
    }

    pub fn clear(&mut self) {
        self.n = 0;
        self.pos.clear();
        self.dirs.clear();
    }

    pub fn push(&mut self, cfg: &MlpConfig, x: Vec3, light_dir: Dir3, view_dir: Dir3) {
        cfg.position_encoding().encode_into(x, &mut self.pos);
        let enc = cfg.direction_encoding();
        if cfg.blind_light_dir {
            self.dirs.extend(std::iter::repeat_n(S::zero(), enc.output_len()));
        } else {
            enc.encode_into(light_dir.vec(), &mut self.dirs);
        }
        enc.encode_into(view_dir.vec(), &mut self.dirs);
        self.n += 1;
    }
}

/// Saved activations of one forward pass.
#[derive(Clone, Debug, Default)]
pub struct Cache<S> {
    n: usize,
    /// Input to each layer, in layer order.
    ins: Vec<Vec<S>>,
    /// ReLU outputs of the hidden layers (trunk then scatter), in layer order.
    hidden_out: Vec<Vec<S>>,
    density_pre: Vec<S>,
    scatter_pre: Vec<S>,
}

impl<S: Scalar> Cache<S> {
    /// Which side of every non-smooth point the pass sits on: the sign of each
    /// hidden ReLU input and whether each scatter output is clamped.
    pub fn activation_pattern(&self, sigmoid_delta: f64) -> Vec<bool> {
        let delta = S::of(sigmoid_delta);
        let relu = self.hidden_out.iter().flatten().map(|&v| v > S::zero());
        let clamp = self.scatter_pre.iter().map(|&z| {
            let raw = scaled_sigmoid_raw(z, delta);
            raw < S::zero() || raw > S::one()
        });
        relu.chain(clamp).collect()
    }
}

/// Per-point outputs: density and clamped scatter fraction (`n × 3`).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outputs<S> {
    pub sigma: Vec<S>,
    pub rho: Vec<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mlp<S> {
    config: MlpConfig,
    layers: Vec<Layer>,
    params: Vec<S>,
}

fn relu_in_place<S: Scalar>(v: &mut [S]) {
    for x in v {
        *x = x.max(S::zero());
    }
}

/// Column block `[lo, lo + width)` of an `n × stride` matrix.
fn columns<S: Scalar>(m: &[S], stride: usize, lo: usize, width: usize) -> Vec<S> {
    m.chunks_exact(stride).flat_map(|row| row[lo..lo + width].iter().copied()).collect()
}

fn concat_rows<S: Scalar>(a: &[S], wa: usize, b: &[S], wb: usize, n: usize) -> Vec<S> {
    let mut out = Vec::with_capacity(n * (wa + wb));
    for r in 0..n {
        out.extend_from_slice(&a[r * wa..(r + 1) * wa]);
        out.extend_from_slice(&b[r * wb..(r + 1) * wb]);
    }
    out
}

impl<S: Scalar> Mlp<S> {
    /// Glorot-uniform weights, zero biases.
    pub fn new(config: MlpConfig, rng: &mut Rng) -> Result<Self, NeuralError> {
        let mut mlp = Self::zeros(config)?;
        for l in mlp.layers.clone() {
            let bound = (6.0 / (l.inp + l.out) as f64).sqrt();
            for w in &mut mlp.params[l.offset..l.offset + l.inp * l.out] {
                *w = S::of((2.0 * rng.uniform() - 1.0) * bound);
            }
        }
        Ok(mlp)
    }

    pub fn zeros(config: MlpConfig) -> Result<Self, NeuralError> {
        config.validate()?;
        let mut layers = Vec::new();
        let mut offset = 0;
        for (inp, out) in config.layer_dims() {
            layers.push(Layer { inp, out, offset });
            offset += inp * out + out;
        }
        Ok(Self { config, layers, params: vec![S::zero(); offset] })
    }

    pub fn from_params(config: MlpConfig, params: Vec<S>) -> Result<Self, NeuralError> {
        let mut mlp = Self::zeros(config)?;
        if params.len() != mlp.params.len() {
            return Err(NeuralError::Config(format!(
                "expected {} parameters, got {}",
                mlp.params.len(),
                params.len()
            )));
        }
        mlp.params = params;
        Ok(mlp)
    }

    pub fn config(&self) -> &MlpConfig {
        &self.config
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn params(&self) -> &[S] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [S] {
        &mut self.params
    }

    pub fn density_layer(&self) -> Layer {
        self.layers[self.config.trunk_depth]
    }

    pub fn check_finite(&self) -> Result<(), NeuralError> {
        match self.params.iter().position(|p| !p.is_finite()) {
            None => Ok(()),
            Some(i) => Err(NeuralError::NonFinite(format!("parameter {i} is {:?}", self.params[i]))),
        }
    }

    fn trunk(&self, inputs: &Inputs<S>, cache: &mut Cache<S>) -> Vec<S> {
        let (n, p) = (inputs.n, self.config.pos_features());
        let mut h = inputs.pos.clone();
        let mut width = p;
        for (i, layer) in self.layers[..self.config.trunk_depth].iter().enumerate() {
            if Some(i) == self.config.skip_layer {
                h = concat_rows(&h, width, &inputs.pos, p, n);
            }
            let mut y = Vec::new();
            layer.forward(&self.params, &h, n, &mut y);
            relu_in_place(&mut y);
            cache.ins.push(std::mem::replace(&mut h, y.clone()));
            cache.hidden_out.push(y);
            width = layer.out;
        }
        h
    }

    /// Densities only; the scatter head is skipped.
    pub fn density(&self, inputs: &Inputs<S>) -> Vec<S> {
        let mut cache = Cache::default();
        let h = self.trunk(inputs, &mut cache);
        let mut pre = Vec::new();
        self.density_layer().forward(&self.params, &h, inputs.n, &mut pre);
        pre.into_iter().map(softplus).collect()
    }

    pub fn forward(&self, inputs: &Inputs<S>, cache: &mut Cache<S>) -> Outputs<S> {
        let n = inputs.n;
        let cfg = &self.config;
        *cache = Cache { n, ..Default::default() };
        let h = self.trunk(inputs, cache);

        let density = self.density_layer();
        density.forward(&self.params, &h, n, &mut cache.density_pre);
        cache.ins.push(h.clone());
        let sigma = cache.density_pre.iter().map(|&s| softplus(s)).collect();

        let mut x = concat_rows(&h, cfg.trunk_width, &inputs.dirs, cfg.dir_features(), n);
        let head = &self.layers[cfg.trunk_depth + 1..];
        for layer in &head[..cfg.scatter_depth] {
            let mut y = Vec::new();
            layer.forward(&self.params, &x, n, &mut y);
            relu_in_place(&mut y);
            cache.ins.push(std::mem::replace(&mut x, y.clone()));
            cache.hidden_out.push(y);
        }
        let out = head[cfg.scatter_depth];
        out.forward(&self.params, &x, n, &mut cache.scatter_pre);
        cache.ins.push(x);
        let delta = S::of(cfg.sigmoid_delta);
        let rho = cache.scatter_pre.iter().map(|&z| scaled_sigmoid(z, delta)).collect();
        Outputs { sigma, rho }
    }

    /// Accumulates into `grad` the parameter gradient of `Σ dσ·σ + Σ dρ·ρ`.
    pub fn backward(&self, cache: &Cache<S>, d_sigma: &[S], d_rho: &[S], grad: &mut [S]) {
        let n = cache.n;
        let cfg = &self.config;
        assert_eq!(grad.len(), self.params.len());
        assert_eq!(d_sigma.len(), n);
        assert_eq!(d_rho.len(), 3 * n);
        let delta = S::of(cfg.sigmoid_delta);
        let (d, h) = (cfg.trunk_depth, cfg.trunk_width);

        // scatter head, output layer first; the clamp passes no gradient
        let mut dy: Vec<S> = cache
            .scatter_pre
            .iter()
            .zip(d_rho)
            .map(|(&z, &g)| {
                let raw = scaled_sigmoid_raw(z, delta);
                if raw <= S::zero() || raw >= S::one() {
                    S::zero()
                } else {
                    let s = sigmoid(z);
                    g * delta * s * (S::one() - s)
                }
            })
            .collect();
        let out_idx = d + 1 + cfg.scatter_depth;
        for li in (d + 1..=out_idx).rev() {
            let layer = self.layers[li];
            let dx = layer.backward(&self.params, &cache.ins[li], &dy, n, grad, true);
            if li == d + 1 {
                dy = dx;
                break;
            }
            let act = &cache.hidden_out[li - 2];
            dy = dx.into_iter().zip(act).map(|(g, &a)| if a > S::zero() { g } else { S::zero() }).collect();
        }
        // dy: gradient w.r.t. [h, γ(ω_l), γ(ω_o)]; keep the trunk part
        let mut dh = columns(&dy, h + cfg.dir_features(), 0, h);

        let d_pre: Vec<S> = cache.density_pre.iter().zip(d_sigma).map(|(&s, &g)| g * sigmoid(s)).collect();
        let dx = self.layers[d].backward(&self.params, &cache.ins[d], &d_pre, n, grad, true);
        for (a, b) in dh.iter_mut().zip(dx) {
            *a = *a + b;
        }

        for i in (0..d).rev() {
            let act = &cache.hidden_out[i];
            let dz: Vec<S> = dh.iter().zip(act).map(|(&g, &a)| if a > S::zero() { g } else { S::zero() }).collect();
            let layer = self.layers[i];
            let dx = layer.backward(&self.params, &cache.ins[i], &dz, n, grad, i > 0);
            if i == 0 {
                break;
            }
            dh = if Some(i) == cfg.skip_layer { columns(&dx, layer.inp, 0, h) } else { dx };
        }
    }

    /// Converts every parameter to another precision.
    pub fn cast<T: Scalar>(&self) -> Mlp<T> {
        Mlp {
            config: self.config,
            layers: self.layers.clone(),
            params: self.params.iter().map(|p| T::of(p.as_f64())).collect(),
        }
    }
}
