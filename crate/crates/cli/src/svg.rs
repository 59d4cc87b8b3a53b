//! Minimal SVG plots. Coordinates are printed with fixed precision so
//! identical inputs give identical files.

use std::fmt::Write;

use egonav::{PhaseLabel, Pose2};

const DESIRED: &str = "#1f77b4";
const ROLLOUT: &str = "#ff7f0e";
const MANIP: &str = "#d62728";
const NAV: &str = "#2ca02c";

fn header(out: &mut String, w: u32, h: u32) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
}

fn label(out: &mut String, x: f64, y: f64, color: &str, text: &str) {
    let _ = writeln!(
        out,
        r#"<text x="{x:.1}" y="{y:.1}" font-family="sans-serif" font-size="12" fill="{color}">{text}</text>"#
    );
}

/// Desired waypoints and executed rollout in the ground plane, equal axis scale.
pub fn trajectory(desired: &[Pose2<f64>], rollout: &[Pose2<f64>]) -> String {
    let (w, h, margin) = (800.0, 600.0, 40.0);
    let all = desired.iter().chain(rollout);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in all {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-6);
    let scale = ((w - 2.0 * margin) / span).min((h - 2.0 * margin) / span);
    let map = |p: &Pose2<f64>| (margin + (p.x - x0) * scale, h - margin - (p.y - y0) * scale);

    let mut out = String::new();
    header(&mut out, w as u32, h as u32);
    for (poses, color, dash) in [(desired, DESIRED, ""), (rollout, ROLLOUT, r#" stroke-dasharray="6 3""#)] {
        let pts: Vec<String> = poses
            .iter()
            .map(|p| {
                let (x, y) = map(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2"{dash} points="{}"/>"#,
            pts.join(" ")
        );
    }
    label(&mut out, 10.0, 18.0, DESIRED, "desired waypoints");
    label(&mut out, 10.0, 34.0, ROLLOUT, "rollout");
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="end">1 m = {scale:.1} px</text>"#,
        w - 10.0,
        18.0
    );
    out.push_str("</svg>\n");
    out
}

fn runs(labels: &[PhaseLabel]) -> Vec<(usize, usize, PhaseLabel)> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=labels.len() {
        if i == labels.len() || labels[i] != labels[start] {
            out.push((start, i, labels[start]));
            start = i;
        }
    }
    out
}

/// Per-frame phase bands: predicted on top, ground truth below when given.
pub fn phase_timeline(predicted: &[PhaseLabel], truth: Option<&[PhaseLabel]>) -> String {
    let (w, row, left) = (1000.0, 28.0, 90.0);
    let rows: Vec<(&str, &[PhaseLabel])> = std::iter::once(("predicted", predicted))
        .chain(truth.map(|t| ("truth", t)))
        .collect();
    let h = 30.0 + rows.len() as f64 * (row + 10.0) + 20.0;
    let mut out = String::new();
    header(&mut out, w as u32, h as u32);
    for (r, (name, labels)) in rows.iter().enumerate() {
        let y = 30.0 + r as f64 * (row + 10.0);
        label(&mut out, 8.0, y + row * 0.65, "black", name);
        let n = labels.len().max(1) as f64;
        let scale = (w - left - 10.0) / n;
        for (a, b, l) in runs(labels) {
            let color = if l == PhaseLabel::Manipulation { MANIP } else { NAV };
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{y:.1}" width="{:.2}" height="{row:.1}" fill="{color}"/>"#,
                left + a as f64 * scale,
                (b - a) as f64 * scale
            );
        }
    }
    label(&mut out, left, 18.0, MANIP, "manipulation");
    label(&mut out, left + 110.0, 18.0, NAV, "navigation");
    out.push_str("</svg>\n");
    out
}

/// One bar per retargeting window, height proportional to its objective.
pub fn cost_bars(totals: &[f64]) -> String {
    let (w, h, margin) = (800.0, 300.0, 30.0);
    let max = totals.iter().copied().fold(0.0, f64::max);
    let n = totals.len().max(1) as f64;
    let slot = (w - 2.0 * margin) / n;
    let mut out = String::new();
    header(&mut out, w as u32, h as u32);
    for (i, c) in totals.iter().enumerate() {
        let bh = if max > 0.0 { c / max * (h - 2.0 * margin) } else { 0.0 };
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{bh:.2}" fill="{DESIRED}"/>"#,
            margin + i as f64 * slot + 0.1 * slot,
            h - margin - bh,
            0.8 * slot
        );
    }
    label(&mut out, margin, 18.0, "black", &format!("cost per window (max {max:.4e})"));
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use PhaseLabel::{Manipulation as M, Navigation as N};

    #[test]
    fn run_lengths() {
        assert_eq!(runs(&[N, N, M, N]), vec![(0, 2, N), (2, 3, M), (3, 4, N)]);
        assert!(runs(&[]).is_empty());
    }

    #[test]
    fn documents_are_closed() {
        let p = [Pose2::identity(), Pose2::new(1.0, 1.0, 0.0)];
        assert!(trajectory(&p, &p).ends_with("</svg>\n"));
        assert!(phase_timeline(&[N, M], Some(&[N, N])).contains("truth"));
        assert_eq!(cost_bars(&[1.0, 2.0]).matches("<rect").count(), 3);
    }
}
