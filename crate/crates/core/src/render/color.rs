//! Cell coloring: monochrome, categorical (by majority label) and per-responder hues.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::addr::CellCoord;
use crate::grid::{ByteAxisGrid, GRID_CELLS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    pub const BLACK: Rgb = Rgb(0, 0, 0);
    pub const WHITE: Rgb = Rgb(255, 255, 255);
    pub const RED: Rgb = Rgb(255, 0, 0);

    pub fn hex(&self) -> String {
        format!("#{:02x}{:02x}{:02x}", self.0, self.1, self.2)
    }

    pub fn is_dark(&self) -> bool {
        // Rec. 601 luma
        299 * u32::from(self.0) + 587 * u32::from(self.1) + 114 * u32::from(self.2) < 128_000
    }

    pub fn distance(&self, other: Rgb) -> f64 {
        let d = |a: u8, b: u8| (f64::from(a) - f64::from(b)).powi(2);
        (d(self.0, other.0) + d(self.1, other.1) + d(self.2, other.2)).sqrt()
    }
}

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02x}{:02x}{:02x}", self.0, self.1, self.2)
    }
}

impl FromStr for Rgb {
    type Err = String;

    /// `RRGGBB`, optionally with a leading `#`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let h = s.trim().trim_start_matches('#');
        if h.len() != 6 || !h.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(format!("invalid color {s:?}, expected RRGGBB"));
        }
        let c = |i: usize| u8::from_str_radix(&h[i..i + 2], 16).unwrap();
        Ok(Rgb(c(0), c(2), c(4)))
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(FNV_PRIME)
    })
}

/// HSV to 8-bit RGB by the six-sector formula, `h` in degrees.
///
/// The three channel levels are computed directly as `v`, `v·(1−s)` and the
/// interpolated middle value, each scaled by 255 and rounded half away from
/// zero.
pub fn hsv_to_rgb(h: f64, s: f64, v: f64) -> Rgb {
    let h = h.rem_euclid(360.0);
    let hi = v * 255.0;
    let lo = v * (1.0 - s) * 255.0;
    let hp = h / 60.0;
    let f = 1.0 - ((hp % 2.0) - 1.0).abs();
    let mid = lo + (hi - lo) * f;
    let q = |x: f64| x.round().clamp(0.0, 255.0) as u8;
    let (hi, lo, mid) = (q(hi), q(lo), q(mid));
    match hp as u32 {
        0 => Rgb(hi, mid, lo),
        1 => Rgb(mid, hi, lo),
        2 => Rgb(lo, hi, mid),
        3 => Rgb(lo, mid, hi),
        4 => Rgb(mid, lo, hi),
        _ => Rgb(hi, lo, mid),
    }
}

pub const RESPONDER_SATURATION: f64 = 0.80;
pub const RESPONDER_VALUE: f64 = 0.90;

/// Hue from the FNV-1a-64 hash of the key, mixed with `hue_seed`.
pub fn responder_color(key: &str, hue_seed: u64) -> Rgb {
    let h = (fnv1a64(key.as_bytes()) ^ hue_seed) % 360;
    hsv_to_rgb(h as f64, RESPONDER_SATURATION, RESPONDER_VALUE)
}

/// Default categorical palette: 17 hues `k·360/17` at s = 0.80, v = 0.90,
/// listed in the order k = 0, 7, 14, 4, … (stride 7 mod 17) so that
/// consecutive labels land far apart on the hue circle.
pub const DEFAULT_PALETTE: [Rgb; 17] = [
    Rgb(230, 46, 46),
    Rgb(46, 230, 132),
    Rgb(219, 46, 230),
    Rgb(154, 230, 46),
    Rgb(46, 68, 230),
    Rgb(230, 111, 46),
    Rgb(46, 230, 197),
    Rgb(230, 46, 176),
    Rgb(89, 230, 46),
    Rgb(89, 46, 230),
    Rgb(230, 176, 46),
    Rgb(46, 197, 230),
    Rgb(230, 46, 111),
    Rgb(46, 230, 68),
    Rgb(154, 46, 230),
    Rgb(219, 230, 46),
    Rgb(46, 132, 230),
];

#[derive(Debug, Clone, PartialEq)]
pub enum ColorMode {
    /// Every occupied cell gets one color.
    Monochrome { foreground: Rgb },
    /// Color by each cell's majority label.
    Categorical { palette: Vec<Rgb>, unlabeled: Rgb },
    /// Color by a hash of each cell's representative responder.
    Responder { hue_seed: u64, fallback: Rgb },
}

impl ColorMode {
    pub fn monochrome(foreground: Rgb) -> Self {
        ColorMode::Monochrome { foreground }
    }

    pub fn categorical() -> Self {
        ColorMode::Categorical {
            palette: DEFAULT_PALETTE.to_vec(),
            unlabeled: Rgb(160, 160, 160),
        }
    }

    pub fn responder(hue_seed: u64) -> Self {
        ColorMode::Responder {
            hue_seed,
            fallback: Rgb(160, 160, 160),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColorAssignment {
    colors: Vec<Option<Rgb>>,
    pub legend: Vec<(String, Rgb)>,
    pub warnings: Vec<String>,
}

impl ColorAssignment {
    pub fn get(&self, c: CellCoord) -> Option<Rgb> {
        self.colors[usize::from(c.offset())]
    }

    pub fn assigned(&self) -> impl Iterator<Item = (CellCoord, Rgb)> + '_ {
        self.colors
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|rgb| (CellCoord::from_offset(i as u16), rgb)))
    }
}

/// Moves a color off the background by the smallest visible step.
fn avoid(c: Rgb, background: Rgb) -> Rgb {
    if c != background {
        return c;
    }
    let nudge = |v: u8| if v >= 128 { v - 64 } else { v + 64 };
    Rgb(nudge(c.0), nudge(c.1), nudge(c.2))
}

/// Colors every occupied cell; unoccupied cells stay unassigned.
///
/// Categorical indices go to labels in the order they first win a cell,
/// scanning cells by offset. Only labels that win at least one cell appear
/// in the legend. No occupied cell is ever given `background`.
pub fn assign_colors(grid: &ByteAxisGrid, mode: &ColorMode, background: Rgb) -> ColorAssignment {
    let mut colors = vec![None; GRID_CELLS];
    let mut legend = Vec::new();
    let mut warnings = Vec::new();
    match mode {
        ColorMode::Monochrome { foreground } => {
            let fg = avoid(*foreground, background);
            if fg != *foreground {
                warnings.push(format!(
                    "foreground {foreground} equals the background; using {fg}"
                ));
            }
            for (c, _) in grid.occupied() {
                colors[usize::from(c.offset())] = Some(fg);
            }
        }
        ColorMode::Categorical { palette, unlabeled } => {
            let palette: Vec<Rgb> = if palette.is_empty() {
                DEFAULT_PALETTE.to_vec()
            } else {
                palette.clone()
            };
            let mut index: HashMap<&str, usize> = HashMap::new();
            let mut any_unlabeled = false;
            for (c, cell) in grid.occupied() {
                let rgb = match cell.majority_label() {
                    Some(label) => {
                        let next = index.len();
                        let i = *index.entry(label).or_insert_with(|| {
                            let rgb = avoid(palette[next % palette.len()], background);
                            legend.push((label.to_string(), rgb));
                            next
                        });
                        legend[i].1
                    }
                    None => {
                        any_unlabeled = true;
                        avoid(*unlabeled, background)
                    }
                };
                colors[usize::from(c.offset())] = Some(rgb);
            }
            if index.len() > palette.len() {
                warnings.push(format!(
                    "{} labels but only {} palette colors; colors repeat",
                    index.len(),
                    palette.len()
                ));
            }
            if any_unlabeled {
                legend.push(("(unlabeled)".to_string(), avoid(*unlabeled, background)));
            }
        }
        ColorMode::Responder { hue_seed, fallback } => {
            for (c, cell) in grid.occupied() {
                let rgb = match cell.representative_responder() {
                    Some(key) => responder_color(key, *hue_seed),
                    None => *fallback,
                };
                colors[usize::from(c.offset())] = Some(avoid(rgb, background));
            }
        }
    }
    ColorAssignment {
        colors,
        legend,
        warnings,
    }
}
