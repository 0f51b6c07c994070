//! Full-reference image quality metrics, computed on tone-mapped pixels
//! (clamp to `[0, 1]`, then gamma 2.2).

use super::{ImageBuffer, IoError};

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const C1: f64 = 0.01 * 0.01;
const C2: f64 = 0.03 * 0.03;

fn check_dims(a: &ImageBuffer, b: &ImageBuffer) -> Result<(), IoError> {
    if a.same_dims(b) {
        Ok(())
    } else {
        Err(IoError::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )))
    }
}

pub fn mse(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64, IoError> {
    check_dims(a, b)?;
    let (ta, tb) = (a.tone_mapped(), b.tone_mapped());
    let n = (ta.len() * 3).max(1) as f64;
    let sum: f64 = ta
        .iter()
        .zip(&tb)
        .map(|(p, q)| (0..3).map(|c| (p[c] - q[c]).powi(2)).sum::<f64>())
        .sum();
    Ok(sum / n)
}

/// Peak signal-to-noise ratio in dB with peak 1; `+∞` for identical images.
pub fn psnr(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64, IoError> {
    let m = mse(a, b)?;
    Ok(if m == 0.0 { f64::INFINITY } else { -10.0 * m.log10() })
}

fn gaussian_window() -> Vec<f64> {
    let half = (SSIM_WINDOW / 2) as f64;
    let g: Vec<f64> = (0..SSIM_WINDOW)
        .map(|i| (-((i as f64 - half).powi(2)) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp())
        .collect();
    let s: f64 = g.iter().sum();
    g.into_iter().map(|v| v / s).collect()
}

fn luma(img: &ImageBuffer) -> Vec<f64> {
    img.tone_mapped().iter().map(|p| 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]).collect()
}

/// Separable Gaussian filter keeping only windows fully inside the image.
fn filter_valid(plane: &[f64], w: usize, h: usize, kernel: &[f64]) -> (Vec<f64>, usize, usize) {
    let k = kernel.len();
    let (ow, oh) = (w - k + 1, h - k + 1);
    let mut rows = vec![0.0; ow * h];
    for y in 0..h {
        for x in 0..ow {
            rows[y * ow + x] = (0..k).map(|i| kernel[i] * plane[y * w + x + i]).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = (0..k).map(|i| kernel[i] * rows[(y + i) * ow + x]).sum();
        }
    }
    (out, ow, oh)
}

/// Single-scale SSIM on luma with an 11×11 Gaussian window (σ = 1.5),
/// averaged over all fully contained windows.
pub fn ssim(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64, IoError> {
    check_dims(a, b)?;
    let (w, h) = (a.width(), a.height());
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(IoError::TooSmall(format!("SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {w}x{h}")));
    }
    let kernel = gaussian_window();
    let (x, y) = (luma(a), luma(b));
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p * q).collect();
    let (mu_x, ow, oh) = filter_valid(&x, w, h, &kernel);
    let (mu_y, ..) = filter_valid(&y, w, h, &kernel);
    let (e_xx, ..) = filter_valid(&xx, w, h, &kernel);
    let (e_yy, ..) = filter_valid(&yy, w, h, &kernel);
    let (e_xy, ..) = filter_valid(&xy, w, h, &kernel);
    let mut total = 0.0;
    for i in 0..ow * oh {
        let (mx, my) = (mu_x[i], mu_y[i]);
        let vx = e_xx[i] - mx * mx;
        let vy = e_yy[i] - my * my;
        let cov = e_xy[i] - mx * my;
        total += ((2.0 * mx * my + C1) * (2.0 * cov + C2)) / ((mx * mx + my * my + C1) * (vx + vy + C2));
    }
    Ok(total / (ow * oh) as f64)
}
