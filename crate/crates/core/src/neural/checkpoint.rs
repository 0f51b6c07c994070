//! Binary weight files, little-endian throughout:
//!
//! ```text
//! "OSFW"  u32 version  u32 flags
//! u32 pos_freqs  u32 dir_freqs  f64 sigmoid_delta
//! u32 trunk_depth  u32 trunk_width  u32 skip_layer (0 = none)
//! u32 scatter_depth  u32 scatter_width
//! f64×3 bounds min  f64×3 bounds max
//! u32 network count (2: coarse, fine)
//! per network: u32 layer count, then (u32 in, u32 out) per layer
//! per network, per layer: f32 weights (out × in, row-major), f32 biases
//! if flags & HAS_OPTIMIZER:
//!   u64 iteration  u64 seed
//!   per network: u64 Adam step, f32 first moments, f32 second moments
//! ```

use std::fs;
use std::path::Path;

use super::mlp::{Mlp, MlpConfig};
use super::train::{TrainConfig, Trainer};
use super::{Adam, NeuralError};
use crate::geom::{Aabb, Vec3};

const MAGIC: &[u8; 4] = b"OSFW";
const VERSION: u32 = 1;
const HAS_OPTIMIZER: u32 = 1;
const BLIND_LIGHT_DIR: u32 = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerState {
    /// Completed steps.
    pub iteration: u64,
    pub seed: u64,
    pub coarse: Adam<f32>,
    pub fine: Adam<f32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub bounds: Aabb,
    pub coarse: Mlp<f32>,
    pub fine: Mlp<f32>,
    pub optimizer: Option<OptimizerState>,
}

impl Checkpoint {
    pub fn from_trainer(t: &Trainer) -> Self {
        Self {
            bounds: t.bounds,
            coarse: t.coarse.clone(),
            fine: t.fine.clone(),
            optimizer: Some(OptimizerState {
                iteration: t.iteration,
                seed: t.config.seed,
                coarse: t.adam_coarse.clone(),
                fine: t.adam_fine.clone(),
            }),
        }
    }

    pub fn config(&self) -> &MlpConfig {
        self.fine.config()
    }

    /// Continues training from the saved step. The seed comes from the file
    /// so the remaining steps match an uninterrupted run.
    pub fn into_trainer(self, mut config: TrainConfig) -> Result<Trainer, NeuralError> {
        let state = self
            .optimizer
            .ok_or_else(|| NeuralError::Checkpoint("checkpoint has no optimizer state to resume from".into()))?;
        config.validate()?;
        config.seed = state.seed;
        let (mut adam_coarse, mut adam_fine) = (state.coarse, state.fine);
        adam_coarse.hyper = config.adam();
        adam_fine.hyper = config.adam();
        Ok(Trainer {
            config,
            bounds: self.bounds,
            coarse: self.coarse,
            fine: self.fine,
            adam_coarse,
            adam_fine,
            iteration: state.iteration,
            curve: Vec::new(),
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let cfg = self.config();
        let mut w = Writer(Vec::new());
        w.0.extend_from_slice(MAGIC);
        w.u32(VERSION);
        let mut flags = 0;
        if self.optimizer.is_some() {
            flags |= HAS_OPTIMIZER;
        }
        if cfg.blind_light_dir {
            flags |= BLIND_LIGHT_DIR;
        }
        w.u32(flags);
        w.u32(cfg.pos_freqs as u32);
        w.u32(cfg.dir_freqs as u32);
        w.u64(cfg.sigmoid_delta.to_bits());
        w.u32(cfg.trunk_depth as u32);
        w.u32(cfg.trunk_width as u32);
        w.u32(cfg.skip_layer.unwrap_or(0) as u32);
        w.u32(cfg.scatter_depth as u32);
        w.u32(cfg.scatter_width as u32);
        for v in [self.bounds.min(), self.bounds.max()] {
            for c in v.to_array() {
                w.u64(c.to_bits());
            }
        }
        let nets = [&self.coarse, &self.fine];
        w.u32(nets.len() as u32);
        for net in nets {
            w.u32(net.layers().len() as u32);
            for l in net.layers() {
                w.u32(l.inp as u32);
                w.u32(l.out as u32);
            }
        }
        for net in nets {
            w.f32s(net.params());
        }
        if let Some(opt) = &self.optimizer {
            w.u64(opt.iteration);
            w.u64(opt.seed);
            for adam in [&opt.coarse, &opt.fine] {
                w.u64(adam.step);
                w.f32s(&adam.m);
                w.f32s(&adam.v);
            }
        }
        w.0
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, NeuralError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(NeuralError::Checkpoint("not a weight file (bad magic)".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(NeuralError::Checkpoint(format!("unsupported version {version}")));
        }
        let flags = r.u32()?;
        let pos_freqs = r.u32()? as usize;
        let dir_freqs = r.u32()? as usize;
        let sigmoid_delta = f64::from_bits(r.u64()?);
        let trunk_depth = r.u32()? as usize;
        let trunk_width = r.u32()? as usize;
        let skip = r.u32()? as usize;
        let scatter_depth = r.u32()? as usize;
        let scatter_width = r.u32()? as usize;
        let config = MlpConfig {
            pos_freqs,
            dir_freqs,
            trunk_depth,
            trunk_width,
            skip_layer: (skip > 0).then_some(skip),
            scatter_depth,
            scatter_width,
            sigmoid_delta,
            blind_light_dir: flags & BLIND_LIGHT_DIR != 0,
        };
        config.validate()?;
        let mut corners = [0.0f64; 6];
        for c in &mut corners {
            *c = f64::from_bits(r.u64()?);
        }
        let bounds = Aabb::new(Vec3::new(corners[0], corners[1], corners[2]), Vec3::new(corners[3], corners[4], corners[5]))
            .map_err(|e| NeuralError::Checkpoint(e.to_string()))?;
        let count = r.u32()?;
        if count != 2 {
            return Err(NeuralError::Checkpoint(format!("expected 2 networks, found {count}")));
        }
        let expected = config.layer_dims();
        for net in 0..2 {
            let layers = r.u32()? as usize;
            let mut dims = Vec::with_capacity(layers.min(1024));
            for _ in 0..layers {
                dims.push((r.u32()? as usize, r.u32()? as usize));
            }
            if dims != expected {
                return Err(NeuralError::Checkpoint(format!("network {net}: layer sizes {dims:?} do not match the header")));
            }
        }
        let n = config.param_count();
        let coarse = Mlp::from_params(config, r.f32s(n)?)?;
        let fine = Mlp::from_params(config, r.f32s(n)?)?;
        let optimizer = if flags & HAS_OPTIMIZER != 0 {
            let iteration = r.u64()?;
            let seed = r.u64()?;
            let mut adams = Vec::new();
            for _ in 0..2 {
                let mut a = Adam::new(Default::default(), n);
                a.step = r.u64()?;
                a.m = r.f32s(n)?;
                a.v = r.f32s(n)?;
                adams.push(a);
            }
            let fine = adams.pop().expect("two entries");
            let coarse = adams.pop().expect("two entries");
            Some(OptimizerState { iteration, seed, coarse, fine })
        } else {
            None
        };
        if r.pos != bytes.len() {
            return Err(NeuralError::Checkpoint(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        coarse.check_finite()?;
        fine.check_finite()?;
        Ok(Self { bounds, coarse, fine, optimizer })
    }

    pub fn save(&self, path: &Path) -> Result<(), NeuralError> {
        fs::write(path, self.to_bytes()).map_err(|e| NeuralError::Io(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, NeuralError> {
        let bytes = fs::read(path).map_err(|e| NeuralError::Io(format!("{}: {e}", path.display())))?;
        Self::from_bytes(&bytes).map_err(|e| match e {
            NeuralError::Checkpoint(m) => NeuralError::Checkpoint(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn f32(&mut self, v: f32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn f32s(&mut self, vs: &[f32]) {
        self.0.reserve(4 * vs.len());
        for v in vs {
            self.f32(*v);
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], NeuralError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            NeuralError::Checkpoint(format!("truncated file: wanted {n} bytes at offset {}", self.pos))
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, NeuralError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, NeuralError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f32>, NeuralError> {
        let raw = self.take(n.checked_mul(4).ok_or_else(|| NeuralError::Checkpoint("size overflow".into()))?)?;
        Ok(raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes"))).collect())
    }
}
