//! Central finite differences against the analytic gradients of
//! [`mlp_backward`], in `f64`.
//!
//! Coarse parameters are checked against the coarse loss and fine parameters
//! against the fine loss: the fine sample distances depend on the coarse
//! weights through resampling and are deliberately held constant in training.
//!
//! A central difference is only meaningful where the loss is smooth over
//! `[w - h, w + h]`. Parameters whose perturbation flips a ReLU or a
//! scatter clamp somewhere in the batch are detected exactly, by comparing
//! activation patterns, and reported as kinks instead of being scored.

use super::mlp::{Mlp, MlpConfig};
use super::train::{activation_patterns, mlp_backward, PassOptions, TrainSample};
use super::NeuralError;
use crate::geom::{uniform_sphere_dir, Aabb, Ray, Rgb, Rng, Vec3};

/// Gradients smaller than this are compared in absolute terms.
pub const GRADIENT_FLOOR: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    /// Parameter index (coarse first, then fine) with the largest error.
    pub worst_param: usize,
    /// Parameters scored.
    pub params_checked: usize,
    /// Parameters skipped because `±h` crosses a non-smooth point.
    pub kinks: usize,
}

impl GradCheckReport {
    pub fn kink_fraction(&self) -> f64 {
        self.kinks as f64 / (self.kinks + self.params_checked).max(1) as f64
    }
}

/// `|a - b| / max(|a|, |b|, floor)`.
pub fn relative_error(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Small network, a handful of random rays through the unit box and random
/// targets, all drawn from `seed`.
pub fn toy_problem(seed: u64, rays: usize) -> Result<(Mlp<f64>, Mlp<f64>, Vec<TrainSample>), NeuralError> {
    let cfg = MlpConfig {
        pos_freqs: 2,
        dir_freqs: 2,
        trunk_depth: 2,
        trunk_width: 16,
        skip_layer: None,
        scatter_depth: 1,
        scatter_width: 8,
        ..Default::default()
    };
    let mut rng = Rng::new(seed);
    let coarse = Mlp::new(cfg, &mut rng.derive(0))?;
    let fine = Mlp::new(cfg, &mut rng.derive(1))?;
    let batch = (0..rays)
        .map(|_| {
            let origin = uniform_sphere_dir(&mut rng).vec() * 3.0;
            let aim = Vec3::new(rng.uniform() - 0.5, rng.uniform() - 0.5, rng.uniform() - 0.5);
            TrainSample {
                ray: Ray::new(origin, (aim - origin).normalized().expect("aim point is near the origin")),
                light_pos: uniform_sphere_dir(&mut rng).vec() * 4.0,
                light_radiance: Rgb::WHITE,
                target: Rgb::new(rng.uniform(), rng.uniform(), rng.uniform()),
            }
        })
        .collect();
    Ok((coarse, fine, batch))
}

/// Checks every parameter of both networks with step `h`.
pub fn check_gradients(
    coarse: &Mlp<f64>,
    fine: &Mlp<f64>,
    batch: &[TrainSample],
    bounds: &Aabb,
    opts: &PassOptions,
    seed: u64,
    h: f64,
) -> Result<GradCheckReport, NeuralError> {
    let streams = Rng::new(seed);
    let rngs: Vec<Rng> = (0..batch.len()).map(|b| streams.derive(b as u64)).collect();
    let analytic = mlp_backward(coarse, fine, batch, &rngs, bounds, opts)?;
    let base = activation_patterns(coarse, fine, batch, &rngs, bounds, opts);
    // loss on one side, and whether the activation pattern on that side moved
    let eval = |c: &Mlp<f64>, f: &Mlp<f64>, fine_side: bool| -> Result<(f64, bool), NeuralError> {
        let g = mlp_backward(c, f, batch, &rngs, bounds, opts)?;
        let pattern = activation_patterns(c, f, batch, &rngs, bounds, opts);
        Ok(if fine_side { (g.fine_loss, pattern.1 != base.1) } else { (g.coarse_loss, pattern.0 != base.0) })
    };
    let mut report = GradCheckReport { max_relative_error: 0.0, worst_param: 0, params_checked: 0, kinks: 0 };
    for fine_side in [false, true] {
        let (net, grad) = if fine_side { (fine, &analytic.fine) } else { (coarse, &analytic.coarse) };
        let offset = if fine_side { coarse.params().len() } else { 0 };
        let mut probe = net.clone();
        for i in 0..net.params().len() {
            let orig = net.params()[i];
            probe.params_mut()[i] = orig + h;
            let (plus, kink_up) = if fine_side { eval(coarse, &probe, true)? } else { eval(&probe, fine, false)? };
            probe.params_mut()[i] = orig - h;
            let (minus, kink_down) = if fine_side { eval(coarse, &probe, true)? } else { eval(&probe, fine, false)? };
            probe.params_mut()[i] = orig;
            if kink_up || kink_down {
                report.kinks += 1;
                continue;
            }
            let numeric = (plus - minus) / (2.0 * h);
            let err = relative_error(grad[i], numeric, GRADIENT_FLOOR);
            if err > report.max_relative_error {
                report.max_relative_error = err;
                report.worst_param = offset + i;
            }
            report.params_checked += 1;
        }
    }
    Ok(report)
}

/// The toy check: 4 rays, 8 coarse and 8 fine samples, `h = 1e-4`.
pub fn toy_gradient_check(seed: u64) -> Result<GradCheckReport, NeuralError> {
    let (coarse, fine, batch) = toy_problem(seed, 4)?;
    let opts = PassOptions { coarse_samples: 8, fine_samples: 8, chunk_rays: 4, background: Rgb::new(0.2, 0.1, 0.3) };
    check_gradients(&coarse, &fine, &batch, &Aabb::cube(1.0), &opts, seed.wrapping_add(100), 1e-4)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_error_uses_floor() {
        assert_eq!(relative_error(2.0, 1.0, 1e-7), 0.5);
        assert_eq!(relative_error(0.0, 0.0, 1e-7), 0.0);
        assert!((relative_error(1e-9, 0.0, 1e-7) - 1e-2).abs() < 1e-15);
    }

    #[test]
    fn kinks_are_detected_not_scored() {
        // seed 0 has a trunk unit whose input crosses zero within ±1e-4
        let r = toy_gradient_check(0).unwrap();
        assert!(r.kinks > 0, "{r:?}");
    }

    #[test]
    fn analytic_gradients_match_finite_differences() {
        for seed in 0..3 {
            let r = toy_gradient_check(seed).unwrap();
            assert!(r.params_checked > 1000 && r.kink_fraction() < 0.05, "seed {seed}: {r:?}");
            assert!(r.max_relative_error < 1e-3, "seed {seed}: {r:?}");
        }
    }
}
