//! RGB images, PPM (P6) encoding and the PNG re-encode.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    /// Row-major RGB, top row first.
    pub pixels: Vec<[u8; 3]>,
}

impl Image {
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.reserve(self.pixels.len() * 3);
        for px in &self.pixels {
            out.extend_from_slice(px);
        }
        out
    }

    pub fn to_png(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, self.width as u32, self.height as u32);
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Eight);
            let mut writer = enc.write_header().map_err(|e| Error::Io(e.to_string()))?;
            let data: Vec<u8> = self.pixels.iter().flatten().copied().collect();
            writer.write_image_data(&data).map_err(|e| Error::Io(e.to_string()))?;
        }
        Ok(out)
    }

    /// PPM at `path`, or PPM beside it plus the PNG when `path` ends in `.png`.
    pub fn write(&self, path: &Path) -> Result<Vec<String>> {
        let is_png = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("png"));
        let ppm_path = if is_png { path.with_extension("ppm") } else { path.to_path_buf() };
        std::fs::File::create(&ppm_path)?.write_all(&self.to_ppm())?;
        let mut written = vec![ppm_path.display().to_string()];
        if is_png {
            std::fs::write(path, self.to_png()?)?;
            written.push(path.display().to_string());
        }
        Ok(written)
    }
}

/// Escape-time shading: dark blue through orange.
pub fn escape_color(step: usize, budget: usize) -> [u8; 3] {
    let t = (step as f64 / budget.max(1) as f64).sqrt().min(1.0);
    [(255.0 * t) as u8, (160.0 * t) as u8, (90.0 + 60.0 * (1.0 - t)) as u8]
}

pub const BOUNDED: [u8; 3] = [0, 0, 0];

/// Basin colours indexed by attracting fixed point.
pub fn basin_color(index: usize) -> [u8; 3] {
    const PALETTE: [[u8; 3]; 4] = [[40, 200, 90], [220, 60, 60], [200, 200, 40], [160, 80, 220]];
    PALETTE[index % PALETTE.len()]
}
