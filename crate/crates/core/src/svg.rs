//! Minimal self-contained SVG box plots and log-log rate plots.

use std::fmt::Write;

use crate::harness::{FiveNumber, RateStudy};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 60.0;

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"11\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Linear map of `[lo, hi]` onto the vertical plot range.
struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn new(lo: f64, hi: f64) -> Self {
        let pad = if hi > lo {
            0.05 * (hi - lo)
        } else {
            lo.abs().max(1.0) * 0.05
        };
        Self {
            lo: lo - pad,
            hi: hi + pad,
        }
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN - (v - self.lo) / (self.hi - self.lo) * (HEIGHT - 2.0 * MARGIN)
    }

    fn x(&self, v: f64) -> f64 {
        MARGIN + (v - self.lo) / (self.hi - self.lo) * (WIDTH - 2.0 * MARGIN)
    }

    fn ticks(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=4).map(move |i| self.lo + (self.hi - self.lo) * i as f64 / 4.0)
    }
}

fn frame(svg: &mut String) {
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        svg,
        "<polyline points=\"{l},{t} {l},{b} {r},{b}\" fill=\"none\" stroke=\"black\"/>"
    );
}

/// One box per `(label, summary)`, whiskers at min and max.
pub fn boxplot(title: &str, y_label: &str, groups: &[(String, FiveNumber)]) -> String {
    let mut svg = header(title);
    let lo = groups.iter().map(|g| g.1.min).fold(f64::INFINITY, f64::min);
    let hi = groups
        .iter()
        .map(|g| g.1.max)
        .fold(f64::NEG_INFINITY, f64::max);
    let axis = Axis::new(lo.min(hi), hi.max(lo));
    frame(&mut svg);
    for t in axis.ticks() {
        let y = axis.y(t);
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{t:.3e}</text>",
            MARGIN - 4.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"14\" y=\"{:.1}\" transform=\"rotate(-90 14 {:.1})\" text-anchor=\"middle\">{}</text>",
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    let slot = (WIDTH - 2.0 * MARGIN) / groups.len().max(1) as f64;
    for (i, (label, s)) in groups.iter().enumerate() {
        let cx = MARGIN + slot * (i as f64 + 0.5);
        let half = slot * 0.25;
        let (ymin, yq1, ymed, yq3, ymax) = (
            axis.y(s.min),
            axis.y(s.q1),
            axis.y(s.median),
            axis.y(s.q3),
            axis.y(s.max),
        );
        let _ = writeln!(
            svg,
            "<line x1=\"{cx:.1}\" y1=\"{ymax:.1}\" x2=\"{cx:.1}\" y2=\"{yq3:.1}\" stroke=\"black\"/>\n\
             <line x1=\"{cx:.1}\" y1=\"{yq1:.1}\" x2=\"{cx:.1}\" y2=\"{ymin:.1}\" stroke=\"black\"/>\n\
             <rect x=\"{:.1}\" y=\"{yq3:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"#cfe0f3\" stroke=\"black\"/>\n\
             <line x1=\"{:.1}\" y1=\"{ymed:.1}\" x2=\"{:.1}\" y2=\"{ymed:.1}\" stroke=\"#c0392b\" stroke-width=\"2\"/>\n\
             <text x=\"{cx:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            cx - half,
            2.0 * half,
            (yq1 - yq3).max(0.0),
            cx - half,
            cx + half,
            HEIGHT - MARGIN + 16.0,
            escape(label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// `ln MISE` against `ln n` with ±2 SE bars and the fitted line.
pub fn rate_plot(title: &str, study: &RateStudy) -> String {
    let mut svg = header(title);
    let lx: Vec<f64> = study.rows.iter().map(|r| (r.n as f64).ln()).collect();
    let band = |r: &crate::harness::RateRow, sign: f64| {
        (r.mise + sign * 2.0 * r.mise_se).max(r.mise * 1e-3).ln()
    };
    let ly_lo = study
        .rows
        .iter()
        .map(|r| band(r, -1.0))
        .fold(f64::INFINITY, f64::min);
    let ly_hi = study
        .rows
        .iter()
        .map(|r| band(r, 1.0))
        .fold(f64::NEG_INFINITY, f64::max);
    let xa = Axis::new(
        lx.iter().copied().fold(f64::INFINITY, f64::min),
        lx.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    let ya = Axis::new(ly_lo, ly_hi);
    frame(&mut svg);
    for t in ya.ticks() {
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{t:.2}</text>",
            MARGIN - 4.0,
            ya.y(t) + 4.0
        );
    }
    for (r, x) in study.rows.iter().zip(&lx) {
        let px = xa.x(*x);
        let _ = writeln!(
            svg,
            "<line x1=\"{px:.1}\" y1=\"{:.1}\" x2=\"{px:.1}\" y2=\"{:.1}\" stroke=\"gray\"/>\n\
             <circle cx=\"{px:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"black\"/>\n\
             <text x=\"{px:.1}\" y=\"{:.1}\" text-anchor=\"middle\">n={}</text>",
            ya.y(band(r, -1.0)),
            ya.y(band(r, 1.0)),
            ya.y(r.mise.ln()),
            HEIGHT - MARGIN + 16.0,
            r.n
        );
    }
    let (x0, x1) = (lx[0], lx[lx.len() - 1]);
    let line = |x: f64| study.intercept + study.slope * x;
    let _ = writeln!(
        svg,
        "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#c0392b\"/>\n\
         <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">slope {:.3} ± {:.3}</text>",
        xa.x(x0),
        ya.y(line(x0)),
        xa.x(x1),
        ya.y(line(x1)),
        WIDTH - MARGIN,
        MARGIN - 8.0,
        study.slope,
        study.slope_se
    );
    let _ = writeln!(
        svg,
        "<text x=\"14\" y=\"{:.1}\" transform=\"rotate(-90 14 {:.1})\" text-anchor=\"middle\">ln MISE</text>",
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    svg.push_str("</svg>\n");
    svg
}
