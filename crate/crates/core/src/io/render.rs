use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatmapFormat {
    /// Binary portable pixmap (P6).
    Ppm,
    Svg,
}

impl HeatmapFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("ppm") => Ok(Self::Ppm),
            Some("svg") => Ok(Self::Svg),
            _ => Err(Error::invalid(
                "output",
                format!("{} must end in .ppm or .svg", path.display()),
            )),
        }
    }
}

/// Colours of a heatmap: values are interpolated linearly from `low` (0)
/// to `high` (1); NA cells use `missing`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Palette {
    pub low: [u8; 3],
    pub high: [u8; 3],
    pub missing: [u8; 3],
}

impl Default for Palette {
    fn default() -> Self {
        Self {
            low: [255, 255, 255],
            high: [24, 24, 24],
            missing: [214, 39, 40],
        }
    }
}

impl Palette {
    pub fn color(&self, v: Option<f64>) -> [u8; 3] {
        match v {
            None => self.missing,
            Some(t) => std::array::from_fn(|k| {
                let (a, b) = (self.low[k] as f64, self.high[k] as f64);
                (a + t * (b - a)).round() as u8
            }),
        }
    }

    /// Parse `#rrggbb`.
    pub fn parse_hex(s: &str) -> Result<[u8; 3]> {
        let hex = s.strip_prefix('#').unwrap_or(s);
        if hex.len() != 6 || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(Error::invalid("color", format!("{s:?} is not #rrggbb")));
        }
        let byte = |k: usize| u8::from_str_radix(&hex[2 * k..2 * k + 2], 16).expect("hex checked");
        Ok([byte(0), byte(1), byte(2)])
    }
}

/// One `cell × cell` square per matrix entry, row 0 at the top.
pub fn render_heatmap(
    values: &DMatrix<Option<f64>>,
    cell: usize,
    palette: &Palette,
    format: HeatmapFormat,
) -> Result<Vec<u8>> {
    if cell == 0 {
        return Err(Error::invalid("cell_size", "must be at least 1"));
    }
    for i in 0..values.nrows() {
        for j in 0..values.ncols() {
            if let Some(v) = values[(i, j)] {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::invalid(
                        "values",
                        format!("cell ({i},{j}) = {v} outside [0, 1]"),
                    ));
                }
            }
        }
    }
    let (rows, cols) = values.shape();
    let (w, h) = (cols * cell, rows * cell);
    Ok(match format {
        HeatmapFormat::Ppm => {
            let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
            out.reserve(w * h * 3);
            for y in 0..h {
                for x in 0..w {
                    out.extend_from_slice(&palette.color(values[(y / cell, x / cell)]));
                }
            }
            out
        }
        HeatmapFormat::Svg => {
            let mut s = String::new();
            let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
            let _ = writeln!(
                s,
                r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" shape-rendering="crispEdges">"#
            );
            for i in 0..rows {
                for j in 0..cols {
                    let [r, g, b] = palette.color(values[(i, j)]);
                    let _ = writeln!(
                        s,
                        r##"<rect x="{}" y="{}" width="{cell}" height="{cell}" fill="#{r:02x}{g:02x}{b:02x}"/>"##,
                        j * cell,
                        i * cell
                    );
                }
            }
            s.push_str("</svg>\n");
            s.into_bytes()
        }
    })
}

/// Render to `path`, choosing the format from the extension.
pub fn write_heatmap(path: &Path, values: &DMatrix<Option<f64>>, cell: usize, palette: &Palette) -> Result<()> {
    let bytes = render_heatmap(values, cell, palette, HeatmapFormat::from_path(path)?)?;
    std::fs::write(path, bytes)?;
    Ok(())
}
