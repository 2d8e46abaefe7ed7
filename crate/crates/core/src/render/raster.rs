use font8x8::legacy::BASIC_LEGACY;

use super::{ColorAssignment, Layout, Rect, RenderConfig, RenderError, Rgb, TextRun, GLYPH};
use crate::grid::ByteAxisGrid;

struct Canvas {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl Canvas {
    fn new(width: u32, height: u32, fill: Rgb) -> Self {
        let mut data = Vec::with_capacity((width * height * 3) as usize);
        for _ in 0..width * height {
            data.extend_from_slice(&[fill.0, fill.1, fill.2]);
        }
        Canvas {
            width,
            height,
            data,
        }
    }

    fn put(&mut self, x: i64, y: i64, c: Rgb) {
        if x < 0 || y < 0 || x >= i64::from(self.width) || y >= i64::from(self.height) {
            return;
        }
        let i = ((y as usize) * self.width as usize + x as usize) * 3;
        self.data[i..i + 3].copy_from_slice(&[c.0, c.1, c.2]);
    }

    fn fill(&mut self, r: Rect, c: Rgb) {
        for y in r.y..r.y + r.h {
            for x in r.x..r.x + r.w {
                self.put(i64::from(x), i64::from(y), c);
            }
        }
    }

    fn text(&mut self, run: &TextRun, c: Rgb) {
        for (i, ch) in run.text.chars().enumerate() {
            let glyph = BASIC_LEGACY[if ch.is_ascii() {
                ch as usize
            } else {
                b'?' as usize
            }];
            let gx = run.x + i as i64 * i64::from(GLYPH);
            for (row, bits) in glyph.iter().enumerate() {
                for col in 0..8 {
                    if bits >> col & 1 == 1 {
                        self.put(gx + col, run.y + row as i64, c);
                    }
                }
            }
        }
    }
}

/// Raw 8-bit RGB pixels (row-major) and the image dimensions.
pub fn render_rgb(
    grid: &ByteAxisGrid,
    colors: &ColorAssignment,
    cfg: &RenderConfig,
) -> Result<(u32, u32, Vec<u8>), RenderError> {
    cfg.validate()?;
    let layout = Layout::new(cfg, &colors.legend);
    let mut canvas = Canvas::new(layout.width, layout.height, cfg.background);
    for (c, _) in grid.occupied() {
        // an assignment built for another grid may miss cells; ink is never background
        let rgb = colors.get(c).unwrap_or(layout.ink);
        canvas.fill(layout.cell_rect(c), rgb);
    }
    for r in &layout.strokes {
        canvas.fill(*r, layout.ink);
    }
    for t in &layout.labels {
        canvas.text(t, layout.ink);
    }
    for (swatch, text, rgb) in &layout.legend {
        canvas.fill(*swatch, *rgb);
        canvas.text(text, layout.ink);
    }
    Ok((canvas.width, canvas.height, canvas.data))
}

/// 8-bit RGB PNG, non-interlaced, fixed filter and compression settings so
/// identical inputs produce identical bytes.
pub fn render_png(
    grid: &ByteAxisGrid,
    colors: &ColorAssignment,
    cfg: &RenderConfig,
) -> Result<Vec<u8>, RenderError> {
    let (w, h, data) = render_rgb(grid, colors, cfg)?;
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, w, h);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        enc.set_compression(png::Compression::Balanced);
        enc.set_filter(png::Filter::Up);
        let mut writer = enc.write_header()?;
        writer.write_image_data(&data)?;
        writer.finish()?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::addr::{CellCoord, MacAddress, Oui};
    use crate::grid::build_mac_grid;
    use crate::ingest::MacObservation;
    use crate::render::{assign_colors, ColorMode};

    fn px(data: &[u8], w: u32, x: u32, y: u32) -> Rgb {
        let i = ((y * w + x) * 3) as usize;
        Rgb(data[i], data[i + 1], data[i + 2])
    }

    fn oui() -> Oui {
        "08:3c:0c".parse().unwrap()
    }

    #[test]
    fn empty_grid_plot_is_background() {
        let g = ByteAxisGrid::for_oui(oui());
        let cfg = RenderConfig::default();
        let a = assign_colors(&g, &ColorMode::monochrome(Rgb::RED), cfg.background);
        let (w, h, data) = render_rgb(&g, &a, &cfg).unwrap();
        assert_eq!((w, h), (816, 816));
        for y in 0..768 {
            for x in 48..816 {
                assert_eq!(px(&data, w, x, y), Rgb::BLACK);
            }
        }
    }

    #[test]
    fn origin_cell_bottom_left() {
        let o = MacObservation::new(MacAddress([8, 0x3c, 0x0c, 0, 0, 9]));
        let g = build_mac_grid(oui(), [&o]).unwrap();
        let cfg = RenderConfig::default();
        let a = assign_colors(&g, &ColorMode::monochrome(Rgb::RED), cfg.background);
        let (w, _, data) = render_rgb(&g, &a, &cfg).unwrap();
        for y in 765..768 {
            for x in 48..51 {
                assert_eq!(px(&data, w, x, y), Rgb::RED);
            }
        }
        assert_eq!(px(&data, w, 51, 767), Rgb::BLACK);
        assert_eq!(px(&data, w, 48, 764), Rgb::BLACK);
        assert_eq!(a.get(CellCoord::new(0, 0)), Some(Rgb::RED));
    }

    #[test]
    fn png_is_deterministic_and_decodes() {
        let o = MacObservation::new(MacAddress([8, 0x3c, 0x0c, 0x28, 0x10, 0]));
        let g = build_mac_grid(oui(), [&o]).unwrap();
        let cfg = RenderConfig {
            scale: 1,
            ..RenderConfig::default()
        };
        let a = assign_colors(&g, &ColorMode::monochrome(Rgb::RED), cfg.background);
        let p1 = render_png(&g, &a, &cfg).unwrap();
        let p2 = render_png(&g, &a, &cfg).unwrap();
        assert_eq!(p1, p2);
        assert_eq!(&p1[..8], b"\x89PNG\r\n\x1a\n");
        let dec = png::Decoder::new(std::io::Cursor::new(&p1));
        let mut reader = dec.read_info().unwrap();
        let mut buf = vec![0; reader.output_buffer_size().unwrap()];
        let info = reader.next_frame(&mut buf).unwrap();
        assert_eq!((info.width, info.height), (48 + 256, 256 + 48));
        assert_eq!(info.color_type, png::ColorType::Rgb);
        assert_eq!(px(&buf, info.width, 48 + 0x10, 255 - 0x28), Rgb::RED);
    }
}
