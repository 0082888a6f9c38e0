//! Minimal SVG line plots: stacked panels with lines, shaded bands and
//! labelled x spans.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const PANEL_H: f64 = 220.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 130.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 40.0;

pub const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone)]
pub struct Line {
    pub label: String,
    pub color: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Symmetric band drawn around the line, e.g. ±1 std.
    pub band: Option<Vec<f64>>,
    pub dashed: bool,
}

impl Line {
    pub fn new(label: impl Into<String>, color: &str, x: Vec<f64>, y: Vec<f64>) -> Self {
        Line { label: label.into(), color: color.to_string(), x, y, band: None, dashed: false }
    }

    pub fn with_band(mut self, band: Vec<f64>) -> Self {
        self.band = Some(band);
        self
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }
}

#[derive(Debug, Clone)]
pub struct Span {
    pub label: String,
    pub x0: f64,
    pub x1: f64,
    pub color: String,
}

#[derive(Debug, Clone, Default)]
pub struct Panel {
    pub title: String,
    pub xlabel: String,
    pub ylabel: String,
    pub lines: Vec<Line>,
    pub spans: Vec<Span>,
}

impl Panel {
    pub fn new(title: impl Into<String>, xlabel: impl Into<String>, ylabel: impl Into<String>) -> Self {
        Panel { title: title.into(), xlabel: xlabel.into(), ylabel: ylabel.into(), ..Panel::default() }
    }

    fn x_range(&self) -> (f64, f64) {
        let xs = self.lines.iter().flat_map(|l| l.x.iter().copied()).chain(self.spans.iter().flat_map(|s| [s.x0, s.x1]));
        finite_range(xs)
    }

    fn y_range(&self) -> (f64, f64) {
        let ys = self.lines.iter().flat_map(|l| {
            let band = l.band.as_deref();
            l.y.iter().enumerate().flat_map(move |(i, &y)| {
                let b = band.map_or(0.0, |b| b[i]);
                [y - b, y + b]
            })
        });
        finite_range(ys)
    }
}

fn finite_range(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v.filter(|x| x.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 { (lo - 0.5, hi + 0.5) } else { (lo, hi) }
}

/// Round tick step (1, 2 or 5 × 10^n) giving about `target` ticks.
pub fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let raw = (hi - lo) / target.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    let s = format!("{:.3}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn render_panel(out: &mut String, p: &Panel, top: f64) {
    let (x0, x1) = p.x_range();
    let (y0, y1) = p.y_range();
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let pw = WIDTH - MARGIN_L - MARGIN_R;
    let ph = PANEL_H - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + MARGIN_T + (y1 - y) / (y1 - y0) * ph;

    let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="13" font-weight="bold">{}</text>"#, MARGIN_L, top + 18.0, esc(&p.title));
    for s in &p.spans {
        let (a, b) = (sx(s.x0), sx(s.x1));
        let _ = writeln!(
            out,
            r#"<rect x="{a:.2}" y="{:.2}" width="{:.2}" height="{ph:.2}" fill="{}" fill-opacity="0.25"/>"#,
            top + MARGIN_T,
            (b - a).max(0.5),
            s.color
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="9" text-anchor="middle">{}</text>"#,
            (a + b) / 2.0,
            top + MARGIN_T + ph - 4.0,
            esc(&s.label)
        );
    }
    let _ = writeln!(
        out,
        r##"<rect x="{MARGIN_L}" y="{:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="#444"/>"##,
        top + MARGIN_T
    );
    for t in nice_ticks(x0, x1, 8) {
        let x = sx(t);
        let yb = top + MARGIN_T + ph;
        let _ = writeln!(out, r##"<line x1="{x:.2}" y1="{yb:.2}" x2="{x:.2}" y2="{:.2}" stroke="#444"/>"##, yb + 4.0);
        let _ = writeln!(out, r#"<text x="{x:.2}" y="{:.2}" font-size="10" text-anchor="middle">{}</text>"#, yb + 15.0, tick_label(t));
    }
    for t in nice_ticks(y0, y1, 5) {
        let y = sy(t);
        let _ = writeln!(out, r##"<line x1="{:.2}" y1="{y:.2}" x2="{MARGIN_L}" y2="{y:.2}" stroke="#444"/>"##, MARGIN_L - 4.0);
        let _ = writeln!(
            out,
            r##"<line x1="{MARGIN_L}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd" stroke-width="0.5"/>"##,
            MARGIN_L + pw
        );
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{}</text>"#, MARGIN_L - 6.0, y + 3.5, tick_label(t));
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#,
        MARGIN_L + pw / 2.0,
        top + PANEL_H - 6.0,
        esc(&p.xlabel)
    );
    let yc = top + MARGIN_T + ph / 2.0;
    let _ = writeln!(
        out,
        r#"<text x="16" y="{yc:.2}" font-size="11" text-anchor="middle" transform="rotate(-90 16 {yc:.2})">{}</text>"#,
        esc(&p.ylabel)
    );

    for (i, l) in p.lines.iter().enumerate() {
        if let Some(b) = &l.band {
            let ok = |y: f64, s: f64| (y + s).is_finite() && (y - s).is_finite();
            let upper = l.x.iter().zip(&l.y).zip(b).filter(|((_, &y), &s)| ok(y, s)).map(|((&x, &y), &s)| format!("{:.2},{:.2}", sx(x), sy(y + s)));
            let lower = l.x.iter().zip(&l.y).zip(b).rev().filter(|((_, &y), &s)| ok(y, s)).map(|((&x, &y), &s)| format!("{:.2},{:.2}", sx(x), sy(y - s)));
            let pts: Vec<String> = upper.chain(lower).collect();
            let _ = writeln!(out, r#"<polygon points="{}" fill="{}" fill-opacity="0.2" stroke="none"/>"#, pts.join(" "), l.color);
        }
        let pts: Vec<String> = l
            .x
            .iter()
            .zip(&l.y)
            .filter(|(_, y)| y.is_finite())
            .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let dash = if l.dashed { r#" stroke-dasharray="5,3""# } else { "" };
        let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.3"{dash}/>"#, pts.join(" "), l.color);
        let ly = top + MARGIN_T + 12.0 + 15.0 * i as f64;
        let lx = MARGIN_L + pw + 10.0;
        let _ = writeln!(out, r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{}" stroke-width="2"{dash}/>"#, lx + 18.0, l.color);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-size="10">{}</text>"#, lx + 22.0, ly + 3.5, esc(&l.label));
    }
}

/// Panels stacked top to bottom. `timestamp` is embedded as a comment.
pub fn render(panels: &[Panel], timestamp: Option<u64>) -> String {
    let h = PANEL_H * panels.len() as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{h}" viewBox="0 0 {WIDTH} {h}" font-family="sans-serif">"#
    );
    if let Some(t) = timestamp {
        let _ = writeln!(out, "<!-- created {t} -->");
    }
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, p) in panels.iter().enumerate() {
        render_panel(&mut out, p, i as f64 * PANEL_H);
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_are_round() {
        assert_eq!(nice_ticks(0.0, 100.0, 5), vec![0.0, 20.0, 40.0, 60.0, 80.0, 100.0]);
        assert_eq!(nice_ticks(-3.0, 7.0, 5), vec![-2.0, 0.0, 2.0, 4.0, 6.0]);
        assert_eq!(tick_label(0.30000000000000004), "0.3");
    }

    #[test]
    fn render_is_deterministic_without_timestamp() {
        let mut p = Panel::new("a < b", "t (s)", "F (N)");
        p.lines.push(Line::new("x", PALETTE[0], vec![0.0, 1.0, 2.0], vec![1.0, f64::NAN, 3.0]).with_band(vec![0.1; 3]));
        p.spans.push(Span { label: "swing".into(), x0: 1.0, x1: 2.0, color: PALETTE[1].into() });
        let a = render(&[p.clone(), p.clone()], None);
        assert_eq!(a, render(&[p.clone(), p.clone()], None));
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert!(a.contains("a &lt; b") && !a.contains("NaN"));
        assert!(render(&[p], Some(7)).contains("<!-- created 7 -->"));
    }
}
