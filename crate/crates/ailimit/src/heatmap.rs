//! Binary PPM rendering of masks and scans with a fixed, versioned palette.

use std::collections::HashMap;
use std::io::{self, Write};

use ailimit_core::{RegionMask, ScanCell, ScanClass};

use crate::error::{AppError, Result};

pub const PALETTE_V1_NAME: &str = "palette_v1";
pub const PALETTE_V1: &str = include_str!("../palettes/palette_v1.txt");

#[derive(Debug, Clone, PartialEq)]
pub struct Palette {
    pub name: String,
    colors: HashMap<String, [u8; 3]>,
}

impl Palette {
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let mut colors = HashMap::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || AppError::bad(format!("palette {name} line {}: expected `key = r g b`", ln + 1));
            let (key, rgb) = line.split_once('=').ok_or_else(bad)?;
            let v: Vec<u8> = rgb.split_whitespace().map(str::parse).collect::<Result<_, _>>().map_err(|_| bad())?;
            let rgb: [u8; 3] = v.try_into().map_err(|_| bad())?;
            colors.insert(key.trim().to_string(), rgb);
        }
        Ok(Self { name: name.to_string(), colors })
    }

    pub fn v1() -> Self {
        Self::parse(PALETTE_V1_NAME, PALETTE_V1).expect("bundled palette parses")
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            PALETTE_V1_NAME => Ok(Self::v1()),
            _ => Err(AppError::bad(format!("unknown palette {name:?}"))),
        }
    }

    fn get(&self, key: &str, fallback: &str) -> [u8; 3] {
        self.colors.get(key).or_else(|| self.colors.get(fallback)).copied().unwrap_or([255, 0, 255])
    }

    pub fn label(&self, l: u16) -> [u8; 3] {
        self.get(&format!("label_{l}"), "label_other")
    }

    pub fn scan(&self, class: ScanClass) -> [u8; 3] {
        match class {
            ScanClass::Periodic(p) => self.get(&format!("period_{p}"), "period_other"),
            other => self.get(other.name(), "period_other"),
        }
    }
}

/// Pixels row-major from the top-left.
pub fn write_ppm(w: &mut dyn Write, width: usize, height: usize, pixels: &[[u8; 3]]) -> io::Result<()> {
    debug_assert_eq!(pixels.len(), width * height);
    write!(w, "P6\n{width} {height}\n255\n")?;
    let bytes: Vec<u8> = pixels.iter().flatten().copied().collect();
    w.write_all(&bytes)
}

/// `r` runs left to right and `c` bottom to top.
pub fn render_mask(mask: &RegionMask, pal: &Palette) -> (usize, usize, Vec<[u8; 3]>) {
    let g = &mask.grid;
    let mut px = Vec::with_capacity(g.len());
    for j in (0..g.nc).rev() {
        for i in 0..g.nr {
            px.push(pal.label(mask.labels[g.index(i, j)]));
        }
    }
    (g.nr, g.nc, px)
}

/// Cells in `j · n_alpha + i` order; `α` runs left to right and `r` bottom to top.
pub fn render_scan(cells: &[ScanCell], n_alpha: usize, n_r: usize, pal: &Palette) -> (usize, usize, Vec<[u8; 3]>) {
    let mut px = Vec::with_capacity(cells.len());
    for j in (0..n_r).rev() {
        for i in 0..n_alpha {
            px.push(pal.scan(cells[j * n_alpha + i].class));
        }
    }
    (n_alpha, n_r, px)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ailimit_core::regions::analytic_mask;
    use ailimit_core::{Direction, ParamGrid};

    #[test]
    fn palette_lookups() {
        let p = Palette::v1();
        assert_eq!(p.label(0), [255, 255, 255]);
        assert_eq!(p.label(400), p.get("label_other", ""));
        assert_eq!(p.scan(ScanClass::Periodic(5)), [40, 80, 200]);
        assert_eq!(p.scan(ScanClass::Periodic(77)), p.get("period_other", ""));
        assert!(Palette::by_name("palette_v9").is_err());
        assert!(Palette::parse("x", "a = 1 2\n").is_err());
    }

    #[test]
    fn ppm_layout() {
        let grid = ParamGrid::new(0.0, 1.0, 4, 0.0, 1.0, 3).unwrap();
        let m = analytic_mask(&grid, Direction::Forward);
        let (w, h, px) = render_mask(&m, &Palette::v1());
        let mut buf = Vec::new();
        write_ppm(&mut buf, w, h, &px).unwrap();
        let header = b"P6\n4 3\n255\n";
        assert_eq!(&buf[..header.len()], header);
        assert_eq!(buf.len(), header.len() + 4 * 3 * 3);
    }
}
