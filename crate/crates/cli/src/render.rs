//! Static renderings of an episode.

use std::fmt::Write as _;

use taskforge::grid::{Color, Episode, Grid};

/// Display colors indexed by color value.
pub const PALETTE: [(u8, u8, u8); 10] = [
    (0x00, 0x00, 0x00),
    (0x00, 0x74, 0xd9),
    (0xff, 0x41, 0x36),
    (0x2e, 0xcc, 0x40),
    (0xff, 0xdc, 0x00),
    (0xaa, 0xaa, 0xaa),
    (0xf0, 0x12, 0xbe),
    (0xff, 0x85, 0x1b),
    (0x7f, 0xdb, 0xff),
    (0x87, 0x0c, 0x25),
];

const CELL: usize = 16;
const GAP: usize = 24;
const LABEL: usize = 20;

fn hex(c: Color) -> String {
    let (r, g, b) = PALETTE[c.value() as usize];
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// One column per pair, train then test, left to right; inputs on top,
/// outputs below. Only grid cells are drawn as `<rect>` elements.
pub fn svg(episode: &Episode) -> String {
    let pairs: Vec<_> = episode.pairs().collect();
    let col_width = |g: &Grid, h: &Grid| g.width().max(h.width()) * CELL;
    let top_height = pairs.iter().map(|(_, _, p)| p.input.height()).max().unwrap_or(0) * CELL;
    let bottom_height = pairs.iter().map(|(_, _, p)| p.output.height()).max().unwrap_or(0) * CELL;
    let width = GAP + pairs.iter().map(|(_, _, p)| col_width(&p.input, &p.output) + GAP).sum::<usize>();
    let height = LABEL + top_height + GAP + bottom_height + GAP;

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    )
    .unwrap();
    let mut x = GAP;
    for (split, i, p) in &pairs {
        writeln!(out, r#"<text x="{x}" y="{}" font-family="monospace" font-size="12">{split} {i}</text>"#, LABEL - 6)
            .unwrap();
        draw_grid(&mut out, &p.input, x, LABEL);
        draw_grid(&mut out, &p.output, x, LABEL + top_height + GAP);
        x += col_width(&p.input, &p.output) + GAP;
    }
    out.push_str("</svg>\n");
    out
}

fn draw_grid(out: &mut String, g: &Grid, x0: usize, y0: usize) {
    for (r, c, color) in g.iter() {
        writeln!(
            out,
            r##"<rect x="{}" y="{}" width="{CELL}" height="{CELL}" fill="{}" stroke="#555555" stroke-width="1"/>"##,
            x0 + c * CELL,
            y0 + r * CELL,
            hex(color)
        )
        .unwrap();
    }
}

/// Block art with 24-bit background colors, input and output side by side.
pub fn ansi(episode: &Episode) -> String {
    let mut out = String::new();
    for (split, i, p) in episode.pairs() {
        writeln!(out, "{split} {i}").unwrap();
        let rows = p.input.height().max(p.output.height());
        for r in 0..rows {
            line(&mut out, &p.input, r);
            out.push_str(if r == rows / 2 { " -> " } else { "    " });
            line(&mut out, &p.output, r);
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

fn line(out: &mut String, g: &Grid, r: usize) {
    if r >= g.height() {
        out.push_str(&"  ".repeat(g.width()));
        return;
    }
    for c in 0..g.width() {
        let (red, green, blue) = PALETTE[g.get(r, c).value() as usize];
        write!(out, "\x1b[48;2;{red};{green};{blue}m  ").unwrap();
    }
    out.push_str("\x1b[0m");
}
