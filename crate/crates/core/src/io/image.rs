use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::IoError;
use crate::geom::Rgb;

const GAMMA: f64 = 2.2;

/// Linear RGB image, rows top to bottom.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    data: Vec<[f32; 3]>,
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, data: vec![[0.0; 3]; width * height] }
    }

    pub fn filled(width: usize, height: usize, c: Rgb) -> Self {
        Self { width, height, data: vec![to_f32(c); width * height] }
    }

    pub fn from_pixels(width: usize, height: usize, data: Vec<[f32; 3]>) -> Result<Self, IoError> {
        if data.len() != width * height {
            return Err(IoError::Format(format!(
                "pixel count {} does not match {width}x{height}",
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> Rgb) -> Self {
        let mut img = Self::new(width, height);
        for y in 0..height {
            for x in 0..width {
                img.set(x, y, f(x, y));
            }
        }
        img
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[f32; 3]] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> Rgb {
        let p = self.data[y * self.width + x];
        Rgb::new(p[0] as f64, p[1] as f64, p[2] as f64)
    }

    pub fn set(&mut self, x: usize, y: usize, c: Rgb) {
        self.data[y * self.width + x] = to_f32(c);
    }

    pub fn same_dims(&self, o: &ImageBuffer) -> bool {
        self.width == o.width && self.height == o.height
    }

    /// Per-channel means of the linear values.
    pub fn mean(&self) -> Rgb {
        let n = self.data.len().max(1) as f64;
        let mut acc = [0.0f64; 3];
        for p in &self.data {
            for c in 0..3 {
                acc[c] += p[c] as f64;
            }
        }
        Rgb(acc) / n
    }

    /// Clamp to `[0, 1]` then gamma 2.2 encode, per channel.
    pub fn tone_mapped(&self) -> Vec<[f64; 3]> {
        self.data.iter().map(|p| p.map(|c| tone_map(c as f64))).collect()
    }
}

fn to_f32(c: Rgb) -> [f32; 3] {
    c.0.map(|v| v as f32)
}

pub fn tone_map(v: f64) -> f64 {
    if v.is_nan() {
        return 0.0;
    }
    v.clamp(0.0, 1.0).powf(1.0 / GAMMA)
}

fn inverse_tone_map(v: f64) -> f64 {
    v.powf(GAMMA)
}

/// Dispatches on the extension: `.pfm` or `.png`.
pub fn write_image(path: &Path, img: &ImageBuffer) -> Result<(), IoError> {
    match extension(path)?.as_str() {
        "pfm" => write_pfm(path, img),
        "png" => write_png(path, img),
        other => Err(IoError::UnsupportedFormat(other.to_string())),
    }
}

pub fn read_image(path: &Path) -> Result<ImageBuffer, IoError> {
    match extension(path)?.as_str() {
        "pfm" => read_pfm(path),
        "png" => read_png(path),
        other => Err(IoError::UnsupportedFormat(other.to_string())),
    }
}

fn extension(path: &Path) -> Result<String, IoError> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .ok_or_else(|| IoError::UnsupportedFormat(format!("no extension on {}", path.display())))
}

/// Little-endian colour PFM. Scanlines are stored bottom to top, as the
/// format requires.
pub fn write_pfm(path: &Path, img: &ImageBuffer) -> Result<(), IoError> {
    let file = fs::File::create(path).map_err(|e| IoError::file(path, e))?;
    let mut w = BufWriter::new(file);
    let mut bytes = Vec::with_capacity(img.width * img.height * 12 + 32);
    bytes.extend_from_slice(format!("PF\n{} {}\n-1.0\n", img.width, img.height).as_bytes());
    for y in (0..img.height).rev() {
        for p in &img.data[y * img.width..(y + 1) * img.width] {
            for c in p {
                bytes.extend_from_slice(&c.to_le_bytes());
            }
        }
    }
    w.write_all(&bytes).and_then(|_| w.flush()).map_err(|e| IoError::file(path, e))
}

pub fn read_pfm(path: &Path) -> Result<ImageBuffer, IoError> {
    let bytes = fs::read(path).map_err(|e| IoError::file(path, e))?;
    decode_pfm(&bytes).map_err(|msg| IoError::Decode { path: path.to_path_buf(), msg })
}

fn decode_pfm(bytes: &[u8]) -> Result<ImageBuffer, String> {
    // header: three whitespace-separated tokens after the magic, then exactly
    // one whitespace byte before the raster
    let mut pos = 0;
    let mut tokens = Vec::new();
    while tokens.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err("truncated PFM header".into());
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    pos += 1;
    let channels = match tokens[0].as_str() {
        "PF" => 3,
        "Pf" => 1,
        other => return Err(format!("bad PFM magic {other:?}")),
    };
    let width: usize = tokens[1].parse().map_err(|_| format!("bad width {:?}", tokens[1]))?;
    let height: usize = tokens[2].parse().map_err(|_| format!("bad height {:?}", tokens[2]))?;
    let scale: f64 = tokens[3].parse().map_err(|_| format!("bad scale {:?}", tokens[3]))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(format!("bad scale {scale}"));
    }
    let little = scale < 0.0;
    let need = width * height * channels * 4;
    let raster = bytes.get(pos..).unwrap_or(&[]);
    if raster.len() < need {
        return Err(format!("raster has {} bytes, expected {need}", raster.len()));
    }
    let mut data = vec![[0.0f32; 3]; width * height];
    let mut chunks = raster[..need].chunks_exact(4).map(|c| {
        let b = [c[0], c[1], c[2], c[3]];
        if little {
            f32::from_le_bytes(b)
        } else {
            f32::from_be_bytes(b)
        }
    });
    for y in (0..height).rev() {
        for x in 0..width {
            let px = &mut data[y * width + x];
            if channels == 3 {
                for c in px.iter_mut() {
                    *c = chunks.next().unwrap_or(0.0);
                }
            } else {
                *px = [chunks.next().unwrap_or(0.0); 3];
            }
        }
    }
    Ok(ImageBuffer { width, height, data })
}

/// 8-bit RGB PNG of the tone-mapped image.
pub fn write_png(path: &Path, img: &ImageBuffer) -> Result<(), IoError> {
    let file = fs::File::create(path).map_err(|e| IoError::file(path, e))?;
    let mut enc = png::Encoder::new(BufWriter::new(file), img.width as u32, img.height as u32);
    enc.set_color(png::ColorType::Rgb);
    enc.set_depth(png::BitDepth::Eight);
    let bytes: Vec<u8> = img.data.iter().flat_map(|p| p.map(|c| encode_byte(c as f64))).collect();
    let mut writer = enc.write_header().map_err(|e| IoError::Format(e.to_string()))?;
    writer.write_image_data(&bytes).map_err(|e| IoError::Format(e.to_string()))?;
    writer.finish().map_err(|e| IoError::Format(e.to_string()))
}

pub(crate) fn encode_byte(linear: f64) -> u8 {
    (255.0 * tone_map(linear)).round() as u8
}

pub fn read_png(path: &Path) -> Result<ImageBuffer, IoError> {
    let decode_err = |msg: String| IoError::Decode { path: path.to_path_buf(), msg };
    let file = fs::File::open(path).map_err(|e| IoError::file(path, e))?;
    let mut decoder = png::Decoder::new(std::io::BufReader::new(file));
    decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let mut reader = decoder.read_info().map_err(|e| decode_err(e.to_string()))?;
    let size = reader.output_buffer_size().ok_or_else(|| decode_err("image too large".into()))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(|e| decode_err(e.to_string()))?;
    let (w, h) = (info.width as usize, info.height as usize);
    let channels = info.color_type.samples();
    let line = info.line_size;
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let px = &buf[y * line + x * channels..][..channels];
            let rgb = match channels {
                1 | 2 => [px[0]; 3],
                _ => [px[0], px[1], px[2]],
            };
            data.push(rgb.map(|b| inverse_tone_map(b as f64 / 255.0) as f32));
        }
    }
    Ok(ImageBuffer { width: w, height: h, data })
}
