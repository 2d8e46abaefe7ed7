//! Plot rendering.
//!
//! Geometry shared by the PNG and SVG back ends, with `s = scale`:
//!
//! ```text
//!  0        margin_left                margin_left + 256·s
//!  +--------+--------------------------+------------------+
//!  |  y     |  plot area (256s × 256s) |  legend          |
//!  |  ticks |  cell (x, y) at column x,|  (when enabled   |
//!  |        |  row 255 − y             |   and non-empty) |
//!  +--------+--------------------------+------------------+  256·s
//!  |        |  x ticks, labels, title  |                  |
//!  +--------+--------------------------+------------------+  256·s + margin_bottom
//! ```
//!
//! The plot area holds nothing but cells: background where a cell is empty,
//! its assigned color where it is occupied. Axis lines sit just outside it.

mod color;
mod raster;
mod svg;

pub use color::{
    assign_colors, fnv1a64, hsv_to_rgb, responder_color, ColorAssignment, ColorMode, Rgb,
    DEFAULT_PALETTE, RESPONDER_SATURATION, RESPONDER_VALUE,
};
pub use raster::{render_png, render_rgb};
pub use svg::render_svg;

use crate::addr::CellCoord;

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error("invalid render config: {0}")]
    Config(String),
    #[error(transparent)]
    Png(#[from] png::EncodingError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderConfig {
    pub background: Rgb,
    /// Pixels per cell side.
    pub scale: u32,
    /// Tick spacing in cell units; must divide 256.
    pub tick_every: u32,
    pub margin_left: u32,
    pub margin_bottom: u32,
    pub legend: bool,
    /// Drawn under the x-axis labels.
    pub title: Option<String>,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            background: Rgb::BLACK,
            scale: 3,
            tick_every: 16,
            margin_left: 48,
            margin_bottom: 48,
            legend: false,
            title: None,
        }
    }
}

impl RenderConfig {
    pub fn validate(&self) -> Result<(), RenderError> {
        if self.scale == 0 {
            return Err(RenderError::Config("scale must be at least 1".into()));
        }
        if self.scale > 64 {
            return Err(RenderError::Config(
                "scale above 64 is not supported".into(),
            ));
        }
        if self.tick_every == 0 || 256 % self.tick_every != 0 {
            return Err(RenderError::Config(format!(
                "tick spacing {} does not divide 256",
                self.tick_every
            )));
        }
        Ok(())
    }
}

pub(crate) const GLYPH: u32 = 8;
const LEGEND_MAX_CHARS: usize = 32;
const LEGEND_ROW: u32 = 14;
const SWATCH: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Rect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

/// A text run whose top-left corner is `(x, y)`; may extend past the image edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct TextRun {
    pub x: i64,
    pub y: i64,
    pub text: String,
}

pub(crate) struct Layout {
    pub width: u32,
    pub height: u32,
    pub plot: Rect,
    pub scale: u32,
    pub ink: Rgb,
    /// Axis lines and tick marks.
    pub strokes: Vec<Rect>,
    pub labels: Vec<TextRun>,
    pub legend: Vec<(Rect, TextRun, Rgb)>,
}

fn legend_text(label: &str) -> String {
    if label.chars().count() > LEGEND_MAX_CHARS {
        let mut s: String = label.chars().take(LEGEND_MAX_CHARS - 1).collect();
        s.push('~');
        s
    } else {
        label.to_string()
    }
}

impl Layout {
    pub fn new(cfg: &RenderConfig, legend: &[(String, Rgb)]) -> Layout {
        let s = cfg.scale;
        let side = 256 * s;
        let ml = cfg.margin_left;
        let mb = cfg.margin_bottom;
        let show_legend = cfg.legend && !legend.is_empty();
        let legend_texts: Vec<String> = if show_legend {
            legend.iter().map(|(l, _)| legend_text(l)).collect()
        } else {
            Vec::new()
        };
        let legend_w = if show_legend {
            let chars = legend_texts
                .iter()
                .map(|t| t.chars().count())
                .max()
                .unwrap_or(0) as u32;
            16 + SWATCH + 6 + GLYPH * chars + 8
        } else {
            0
        };
        let ink = if cfg.background.is_dark() {
            Rgb(220, 220, 220)
        } else {
            Rgb::BLACK
        };

        let mut strokes = Vec::new();
        let mut labels = Vec::new();
        if ml >= 1 {
            strokes.push(Rect {
                x: ml - 1,
                y: 0,
                w: 1,
                h: side + u32::from(mb >= 1),
            });
        }
        if mb >= 1 {
            strokes.push(Rect {
                x: ml.saturating_sub(1),
                y: side,
                w: side + u32::from(ml >= 1),
                h: 1,
            });
        }
        // labels are 4 glyphs wide; skip ticks until neighbours stop touching
        let pitch = cfg.tick_every * s;
        let x_stride = (4 * GLYPH + 4).div_ceil(pitch).max(1);
        let y_stride = (GLYPH + 2).div_ceil(pitch).max(1);
        for (i, v) in (0..256).step_by(cfg.tick_every as usize).enumerate() {
            let i = i as u32;
            let text = format!("0x{v:02X}");
            let half = (GLYPH * text.len() as u32 / 2) as i64;
            // x axis: tick below the plot, centered on the cell column
            let cx = ml + v * s + s / 2;
            if mb >= 5 {
                strokes.push(Rect {
                    x: cx,
                    y: side + 1,
                    w: 1,
                    h: 4,
                });
            }
            if i.is_multiple_of(x_stride) {
                labels.push(TextRun {
                    x: i64::from(cx) - half,
                    y: i64::from(side) + 8,
                    text: text.clone(),
                });
            }
            // y axis: tick left of the plot, centered on the cell row
            let cy = (255 - v) * s + s / 2;
            if ml >= 6 {
                strokes.push(Rect {
                    x: ml - 6,
                    y: cy,
                    w: 4,
                    h: 1,
                });
            }
            if i.is_multiple_of(y_stride) {
                labels.push(TextRun {
                    x: i64::from(ml) - 8 - 2 * half,
                    y: i64::from(cy) - i64::from(GLYPH / 2),
                    text,
                });
            }
        }
        if let Some(t) = &cfg.title {
            labels.push(TextRun {
                x: i64::from(ml),
                y: i64::from(side) + 28,
                text: t.clone(),
            });
        }

        let lx = ml + side + 16;
        let legend = legend_texts
            .into_iter()
            .zip(legend)
            .enumerate()
            .map(|(i, (text, (_, rgb)))| {
                let y = 8 + LEGEND_ROW * i as u32;
                let swatch = Rect {
                    x: lx,
                    y,
                    w: SWATCH,
                    h: SWATCH,
                };
                let run = TextRun {
                    x: i64::from(lx + SWATCH + 6),
                    y: i64::from(y + 1),
                    text,
                };
                (swatch, run, *rgb)
            })
            .collect();

        Layout {
            width: ml + side + legend_w,
            height: side + mb,
            plot: Rect {
                x: ml,
                y: 0,
                w: side,
                h: side,
            },
            scale: s,
            ink,
            strokes,
            labels,
            legend,
        }
    }

    /// Pixel rectangle of a cell; y grows upward.
    pub fn cell_rect(&self, c: CellCoord) -> Rect {
        let s = self.scale;
        Rect {
            x: self.plot.x + u32::from(c.x) * s,
            y: self.plot.y + (255 - u32::from(c.y)) * s,
            w: s,
            h: s,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn image_size_arithmetic() {
        let cfg = RenderConfig::default();
        let l = Layout::new(&cfg, &[]);
        assert_eq!((l.width, l.height), (48 + 256 * 3, 256 * 3 + 48));
        // legend requested but empty: no extra width
        let cfg = RenderConfig {
            legend: true,
            ..RenderConfig::default()
        };
        assert_eq!(Layout::new(&cfg, &[]).width, 48 + 768);
        let l = Layout::new(&cfg, &[("abcd".into(), Rgb::RED)]);
        assert_eq!(l.width, 48 + 768 + 16 + 10 + 6 + 32 + 8);
        assert_eq!(l.height, 768 + 48);
    }

    #[test]
    fn cell_orientation() {
        let l = Layout::new(&RenderConfig::default(), &[]);
        assert_eq!(
            l.cell_rect(CellCoord::new(0, 0)),
            Rect {
                x: 48,
                y: 765,
                w: 3,
                h: 3
            }
        );
        assert_eq!(
            l.cell_rect(CellCoord::new(0x10, 0x28)),
            Rect {
                x: 96,
                y: 645,
                w: 3,
                h: 3
            }
        );
        assert_eq!(
            l.cell_rect(CellCoord::new(255, 255)),
            Rect {
                x: 813,
                y: 0,
                w: 3,
                h: 3
            }
        );
    }

    #[test]
    fn strokes_stay_outside_plot() {
        for scale in [1, 2, 3, 5] {
            let cfg = RenderConfig {
                scale,
                ..RenderConfig::default()
            };
            let l = Layout::new(&cfg, &[]);
            let p = l.plot;
            for r in &l.strokes {
                let overlaps =
                    r.x < p.x + p.w && p.x < r.x + r.w && r.y < p.y + p.h && p.y < r.y + r.h;
                assert!(!overlaps, "{r:?}");
            }
        }
    }

    #[test]
    fn tick_labels() {
        let l = Layout::new(&RenderConfig::default(), &[]);
        let texts: Vec<_> = l
            .labels
            .iter()
            .map(|t| t.text.as_str())
            .step_by(2)
            .collect();
        assert_eq!(texts.len(), 16);
        assert_eq!(texts[0], "0x00");
        assert_eq!(texts[1], "0x10");
        assert_eq!(texts[15], "0xF0");
    }

    #[test]
    fn tick_labels_never_touch() {
        for scale in 1..=8 {
            let cfg = RenderConfig {
                scale,
                ..Default::default()
            };
            let l = Layout::new(&cfg, &[]);
            let side = 256 * scale as i64;
            let mut xs: Vec<_> = l
                .labels
                .iter()
                .filter(|t| t.y == side + 8)
                .map(|t| t.x)
                .collect();
            xs.sort();
            assert!(!xs.is_empty());
            for w in xs.windows(2) {
                assert!(w[1] - w[0] > 32, "scale {scale}: {xs:?}");
            }
            let mut ys: Vec<_> = l
                .labels
                .iter()
                .filter(|t| t.y < side)
                .map(|t| t.y)
                .collect();
            ys.sort();
            for w in ys.windows(2) {
                assert!(w[1] - w[0] > 8, "scale {scale}: {ys:?}");
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(RenderConfig::default().validate().is_ok());
        assert!(RenderConfig {
            scale: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(RenderConfig {
            tick_every: 24,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(RenderConfig {
            tick_every: 32,
            ..Default::default()
        }
        .validate()
        .is_ok());
    }
}
