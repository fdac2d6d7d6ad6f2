//! Top-down SVG rendering of a plan.

use std::fmt::Write as _;

use crate::model::{Plan, Target};

const WIDTH: f64 = 800.0;
const MARGIN: f64 = 40.0;
const ARROW_LEN: f64 = 0.25;

/// Colour of cluster `k`: hues spaced by the golden angle.
pub fn cluster_colour(k: usize) -> String {
    let hue = (k as f64 * 137.507_764_050_037_85) % 360.0;
    let (r, g, b) = hsl_to_rgb(hue, 0.65, 0.45);
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn hsl_to_rgb(h: f64, s: f64, l: f64) -> (u8, u8, u8) {
    let c = (1.0 - (2.0 * l - 1.0).abs()) * s;
    let hp = h / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    let to = |v: f64| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    (to(r), to(g), to(b))
}

/// Floor plan: targets coloured by cluster, one marker and heading arrow per
/// base pose, and the base tour from home and back.
pub fn render_svg(plan: &Plan, targets: &[Target]) -> String {
    let mut xs: Vec<f64> = targets.iter().map(|t| t.x).collect();
    let mut ys: Vec<f64> = targets.iter().map(|t| t.y).collect();
    for c in &plan.clusters {
        xs.push(c.base.x);
        ys.push(c.base.y);
    }
    xs.push(plan.home_base.x);
    ys.push(plan.home_base.y);
    let (x0, x1) = bounds(&xs);
    let (y0, y1) = bounds(&ys);
    let span = (x1 - x0).max(y1 - y0).max(1e-6) + 2.0 * ARROW_LEN;
    let scale = (WIDTH - 2.0 * MARGIN) / span;
    let height = ((y1 - y0 + 2.0 * ARROW_LEN) * scale + 2.0 * MARGIN).ceil();
    let px = |x: f64| MARGIN + (x - x0 + ARROW_LEN) * scale;
    let py = |y: f64| height - MARGIN - (y - y0 + ARROW_LEN) * scale;

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH:.0}" height="{height:.0}" viewBox="0 0 {WIDTH:.0} {height:.0}">"#
    );
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);

    let mut tour = vec![(plan.home_base.x, plan.home_base.y)];
    tour.extend(
        plan.base_sequence
            .iter()
            .map(|&c| (plan.clusters[c].base.x, plan.clusters[c].base.y)),
    );
    tour.push((plan.home_base.x, plan.home_base.y));
    let pts: Vec<String> = tour
        .iter()
        .map(|&(x, y)| format!("{:.3},{:.3}", px(x), py(y)))
        .collect();
    let _ = writeln!(
        out,
        r##"<polyline class="tour" points="{}" fill="none" stroke="#808080" stroke-width="1.5" stroke-dasharray="6 4"/>"##,
        pts.join(" ")
    );

    for (k, cluster) in plan.clusters.iter().enumerate() {
        let colour = cluster_colour(k);
        let _ = writeln!(out, r#"<g class="cluster" fill="{colour}">"#);
        for &i in &cluster.target_indices {
            let t = &targets[i];
            let _ = writeln!(
                out,
                r#"<circle class="target" cx="{:.3}" cy="{:.3}" r="3"/>"#,
                px(t.x),
                py(t.y)
            );
        }
        let _ = writeln!(out, "</g>");
    }

    for (k, cluster) in plan.clusters.iter().enumerate() {
        let colour = cluster_colour(k);
        let b = &cluster.base;
        let (bx, by) = (px(b.x), py(b.y));
        let (s, c) = b.heading.sin_cos();
        let tip = (px(b.x + ARROW_LEN * c), py(b.y + ARROW_LEN * s));
        let head = |side: f64| {
            let ang = b.heading + std::f64::consts::PI + side * 0.45;
            let len = ARROW_LEN * 0.3;
            (tip.0 + len * scale * ang.cos(), tip.1 - len * scale * ang.sin())
        };
        let (l, r) = (head(1.0), head(-1.0));
        let _ = writeln!(
            out,
            r##"<circle class="base" cx="{bx:.3}" cy="{by:.3}" r="7" fill="none" stroke="{colour}" stroke-width="2.5"/>"##
        );
        let _ = writeln!(
            out,
            r#"<g class="arrow" stroke="{colour}" fill="{colour}"><line x1="{bx:.3}" y1="{by:.3}" x2="{:.3}" y2="{:.3}" stroke-width="2"/><polygon points="{:.3},{:.3} {:.3},{:.3} {:.3},{:.3}"/></g>"#,
            tip.0, tip.1, tip.0, tip.1, l.0, l.1, r.0, r.1
        );
    }

    let (hx, hy) = (px(plan.home_base.x), py(plan.home_base.y));
    let _ = writeln!(
        out,
        r##"<rect class="home" x="{:.3}" y="{:.3}" width="10" height="10" fill="#000000"/>"##,
        hx - 5.0,
        hy - 5.0
    );
    out.push_str("</svg>\n");
    out
}

fn bounds(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    })
}
