//! PNG cross-sections with the U/V color map.

use std::path::Path;

use image::{ImageFormat, RgbImage};

use crate::error::{Error, Result};
use crate::scalar::{to_f64, Scalar};
use crate::spectral_grid::Field;

pub const U_COLOR: [f64; 3] = [211.0, 95.0, 183.0];
pub const V_COLOR: [f64; 3] = [220.0, 220.0, 98.0];

/// Grid plane to draw: all nodes with index `index` along `normal_axis`.
/// Two-dimensional fields ignore it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlaneSpec {
    pub normal_axis: usize,
    pub index: usize,
}

impl Default for PlaneSpec {
    fn default() -> Self {
        Self {
            normal_axis: 2,
            index: 0,
        }
    }
}

/// `white + u (U_COLOR - white) + v (V_COLOR - white)`, truncated to `[0, 255]`.
pub fn color(u: f64, v: f64) -> [u8; 3] {
    let mut out = [0u8; 3];
    for c in 0..3 {
        let x = 255.0 + u * (U_COLOR[c] - 255.0) + v * (V_COLOR[c] - 255.0);
        out[c] = if x.is_nan() { 0 } else { x.clamp(0.0, 255.0) as u8 };
    }
    out
}

/// Pixel buffer for a plane: rows run along the second in-plane axis with its
/// largest index on top, columns along the first.
pub fn cross_section<T: Scalar>(u: &Field<T>, v: &Field<T>, plane: PlaneSpec) -> Result<RgbImage> {
    u.check_same_grid(v)?;
    let grid = u.grid();
    let c = grid.counts3();
    let (a, b, fixed) = if grid.dim() == 2 {
        (0, 1, None)
    } else {
        if plane.normal_axis > 2 || plane.index >= c[plane.normal_axis] {
            return Err(Error::Geometry(format!("plane {plane:?} outside the box")));
        }
        let rest: Vec<usize> = (0..3).filter(|&x| x != plane.normal_axis).collect();
        (rest[0], rest[1], Some((plane.normal_axis, plane.index)))
    };
    let (w, h) = (c[a], c[b]);
    let mut img = RgbImage::new(w as u32, h as u32);
    for row in 0..h {
        for col in 0..w {
            let mut ijk = [0usize; 3];
            ijk[a] = col;
            ijk[b] = h - 1 - row;
            if let Some((ax, k)) = fixed {
                ijk[ax] = k;
            }
            let idx = grid.index(ijk[0], ijk[1], ijk[2]);
            let px = color(to_f64(u.values()[idx]), to_f64(v.values()[idx]));
            img.put_pixel(col as u32, row as u32, image::Rgb(px));
        }
    }
    Ok(img)
}

pub fn render_cross_section<T: Scalar>(
    u: &Field<T>,
    v: &Field<T>,
    plane: PlaneSpec,
    path: impl AsRef<Path>,
) -> Result<()> {
    let img = cross_section(u, v, plane)?;
    img.save_with_format(path, ImageFormat::Png)
        .map_err(|e| Error::Image(e.to_string()))
}
