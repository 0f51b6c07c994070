use std::path::Path;

use super::checkpoint::Checkpoint;
use super::mlp::{Cache, Inputs, Mlp};
use super::NeuralError;
use crate::field::{fingerprint_words, ScatteringField};
use crate::geom::{Aabb, Dir3, Rgb, Vec3};

/// Trained network used as a scattering field. Queries run the fine network
/// one point at a time; outside its box the density is zero.
#[derive(Clone, Debug)]
pub struct MlpField {
    net: Mlp<f32>,
    bounds: Aabb,
    fingerprint: u64,
}

impl MlpField {
    pub fn new(net: Mlp<f32>, bounds: Aabb) -> Result<Self, NeuralError> {
        net.check_finite()?;
        let words = net.params().iter().map(|p| p.to_bits() as u64);
        let fingerprint = fingerprint_words(
            [0x6e65_7572_616c_u64, net.config().blind_light_dir as u64]
                .into_iter()
                .chain(bounds.min().to_array().map(f64::to_bits))
                .chain(bounds.max().to_array().map(f64::to_bits))
                .chain(words),
        );
        Ok(Self { net, bounds, fingerprint })
    }

    pub fn from_checkpoint(c: Checkpoint) -> Result<Self, NeuralError> {
        Self::new(c.fine, c.bounds)
    }

    pub fn load(path: &Path) -> Result<Self, NeuralError> {
        Self::from_checkpoint(Checkpoint::load(path)?)
    }

    pub fn network(&self) -> &Mlp<f32> {
        &self.net
    }

    fn inputs(&self, p: Vec3, wl: Dir3, wo: Dir3) -> Inputs<f32> {
        let mut inp = Inputs::with_capacity(self.net.config(), 1);
        inp.push(self.net.config(), p, wl, wo);
        inp
    }
}

impl ScatteringField for MlpField {
    fn density(&self, p: Vec3) -> f64 {
        if !self.bounds.contains(p) {
            return 0.0;
        }
        // directions never reach the density head; any unit vector will do
        self.net.density(&self.inputs(p, Dir3::Z, Dir3::Z))[0] as f64
    }

    fn scatter(&self, p: Vec3, incoming: Dir3, outgoing: Dir3) -> Rgb {
        if !self.bounds.contains(p) {
            return Rgb::BLACK;
        }
        let out = self.net.forward(&self.inputs(p, incoming, outgoing), &mut Cache::default());
        Rgb::new(out.rho[0] as f64, out.rho[1] as f64, out.rho[2] as f64)
    }

    fn canonical_bounds(&self) -> Aabb {
        self.bounds
    }

    fn fingerprint(&self) -> u64 {
        self.fingerprint
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{uniform_sphere_dir, Rng};
    use crate::neural::MlpConfig;

    fn field() -> MlpField {
        let cfg = MlpConfig { trunk_depth: 2, trunk_width: 16, skip_layer: None, scatter_depth: 1, scatter_width: 8, ..Default::default() };
        MlpField::new(Mlp::new(cfg, &mut Rng::new(4)).unwrap(), Aabb::cube(1.0)).unwrap()
    }

    #[test]
    fn outputs_are_in_range() {
        let f = field();
        let mut rng = Rng::new(1);
        for _ in 0..500 {
            let p = Vec3::new(rng.uniform() * 2.0 - 1.0, rng.uniform() * 2.0 - 1.0, rng.uniform() * 2.0 - 1.0);
            let (a, b) = (uniform_sphere_dir(&mut rng), uniform_sphere_dir(&mut rng));
            assert!(f.density(p) >= 0.0);
            assert!(f.scatter(p, a, b).in_unit_range());
        }
        assert_eq!(f.density(Vec3::splat(1.5)), 0.0);
    }

    #[test]
    fn fingerprint_tracks_weights() {
        let a = field();
        let mut net = a.network().clone();
        net.params_mut()[0] += 1.0;
        let b = MlpField::new(net, Aabb::cube(1.0)).unwrap();
        assert_eq!(a.fingerprint(), field().fingerprint());
        assert_ne!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn non_finite_weights_are_rejected() {
        let mut net = field().network().clone();
        net.params_mut()[3] = f32::INFINITY;
        assert!(matches!(MlpField::new(net, Aabb::cube(1.0)), Err(NeuralError::NonFinite(_))));
    }
}
