use std::fmt::Write;

use super::{ColorAssignment, Layout, Rect, RenderConfig, RenderError, GLYPH};
use crate::grid::ByteAxisGrid;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c if c.is_control() => out.push('?'),
            c => out.push(c),
        }
    }
    out
}

fn rect(out: &mut String, class: &str, r: Rect, fill: &str) {
    let _ = writeln!(
        out,
        r#"<rect class="{class}" x="{}" y="{}" width="{}" height="{}" fill="{fill}"/>"#,
        r.x, r.y, r.w, r.h
    );
}

/// SVG 1.1 with integer coordinates; one `rect.cell` per occupied cell.
pub fn render_svg(
    grid: &ByteAxisGrid,
    colors: &ColorAssignment,
    cfg: &RenderConfig,
) -> Result<String, RenderError> {
    cfg.validate()?;
    let layout = Layout::new(cfg, &colors.legend);
    let (w, h) = (layout.width, layout.height);
    let ink = layout.ink.hex();
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" shape-rendering="crispEdges">"#
    );
    if let Some(t) = &cfg.title {
        let _ = writeln!(out, "<title>{}</title>", escape(t));
    }
    rect(
        &mut out,
        "background",
        Rect { x: 0, y: 0, w, h },
        &cfg.background.hex(),
    );

    out.push_str("<g class=\"cells\">\n");
    for (c, _) in grid.occupied() {
        let rgb = colors.get(c).unwrap_or(layout.ink);
        rect(&mut out, "cell", layout.cell_rect(c), &rgb.hex());
    }
    out.push_str("</g>\n<g class=\"axes\">\n");
    for r in &layout.strokes {
        rect(&mut out, "axis", *r, &ink);
    }
    out.push_str("</g>\n");

    let _ = writeln!(
        out,
        r#"<g class="labels" fill="{ink}" font-family="monospace" font-size="{GLYPH}">"#
    );
    for t in &layout.labels {
        // SVG text is positioned by its baseline
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}">{}</text>"#,
            t.x,
            t.y + i64::from(GLYPH) - 1,
            escape(&t.text)
        );
    }
    out.push_str("</g>\n");

    if !layout.legend.is_empty() {
        let _ = writeln!(
            out,
            r#"<g class="legend" font-family="monospace" font-size="{GLYPH}">"#
        );
        for (swatch, text, rgb) in &layout.legend {
            rect(&mut out, "swatch", *swatch, &rgb.hex());
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" fill="{ink}">{}</text>"#,
                text.x,
                text.y + i64::from(GLYPH) - 1,
                escape(&text.text)
            );
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    Ok(out)
}
