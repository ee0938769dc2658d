//! Mean-regret chart with a logarithmic time axis, written as plain SVG.

use std::fmt::Write;

use aim_core::AggregateCurve;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SvgError {
    #[error("no curves to plot")]
    Empty,
    #[error("curve {0:?} has no points")]
    EmptyCurve(String),
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn emit_svg(curves: &[AggregateCurve]) -> Result<String, SvgError> {
    if curves.is_empty() {
        return Err(SvgError::Empty);
    }
    if let Some(c) = curves.iter().find(|c| c.points.is_empty()) {
        return Err(SvgError::EmptyCurve(c.policy.clone()));
    }
    let points = curves.iter().flat_map(|c| &c.points);
    let t_lo = points.clone().map(|p| p.t).min().unwrap().max(1) as f64;
    let t_hi = points.clone().map(|p| p.t).max().unwrap() as f64;
    let y_hi = points.map(|p| p.mean).fold(0.0f64, f64::max);
    let (lx_lo, lx_hi) = (t_lo.log10().floor(), t_hi.log10().ceil().max(t_lo.log10().floor() + 1.0));
    let y_hi = if y_hi > 0.0 { y_hi * 1.05 } else { 1.0 };
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |t: f64| LEFT + ((t.max(1.0)).log10() - lx_lo) / (lx_hi - lx_lo) * plot_w;
    let sy = |y: f64| TOP + (1.0 - y / y_hi) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for decade in lx_lo as i32..=lx_hi as i32 {
        let x = sx(10f64.powi(decade));
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, TOP + plot_h, TOP + plot_h + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{decade}</text>"#, TOP + plot_h + 18.0);
    }
    for k in 0..=4 {
        let y = y_hi * k as f64 / 4.0;
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{:.2}" x2="{LEFT}" y2="{:.2}" stroke="black"/>"#, LEFT - 5.0, sy(y), sy(y));
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, sy(y) + 4.0, format_tick(y));
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">t</text>"#, LEFT + plot_w / 2.0, HEIGHT - 8.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">mean regret</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );
    for (i, curve) in curves.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = curve.points.iter().map(|p| format!("{:.2},{:.2}", sx(p.t as f64), sy(p.mean))).collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"><title>{}</title></polyline>"#,
            pts.join(" "),
            escape(&curve.policy)
        );
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text class="legend" x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&curve.policy));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn format_tick(y: f64) -> String {
    if y == 0.0 {
        "0".into()
    } else if y >= 100.0 {
        format!("{y:.0}")
    } else {
        format!("{y:.3}").trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_is_rejected() {
        assert_eq!(emit_svg(&[]), Err(SvgError::Empty));
        let c = AggregateCurve { policy: "x".into(), points: vec![] };
        assert!(emit_svg(&[c]).is_err());
    }

    #[test]
    fn names_are_escaped() {
        assert_eq!(escape("a<b&c"), "a&lt;b&amp;c");
        assert_eq!(format_tick(12.5), "12.5");
    }
}
