//! Static SVG figures: a single perturbed-disk shape with its circular core,
//! and a branch gallery (shapes along the branch plus the lambda-epsilon
//! diagram). Plain polylines only; nothing here is interactive.

use serrin2p::continuation::Branch;
use serrin2p::geometry::FourierBoundary;

const SAMPLES: usize = 720;

fn header(width: f64, height: f64) -> String {
    format!(
        r##"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width:.0} {height:.0}" width="{width:.0}" height="{height:.0}">
<rect width="{width:.0}" height="{height:.0}" fill="#ffffff"/>
"##
    )
}

/// Closed polyline for r = 1 + amplify * g(theta), centered at (cx, cy).
fn boundary_points(g: &FourierBoundary, amplify: f64, cx: f64, cy: f64, scale: f64) -> String {
    let mut pts = String::new();
    for j in 0..=SAMPLES {
        let theta = 2.0 * std::f64::consts::PI * (j % SAMPLES) as f64 / SAMPLES as f64;
        let r = 1.0 + amplify * g.value(theta);
        let x = cx + scale * r * theta.cos();
        let y = cy - scale * r * theta.sin();
        if j > 0 {
            pts.push(' ');
        }
        pts.push_str(&format!("{x:.2},{y:.2}"));
    }
    pts
}

fn shape_panel(
    out: &mut String,
    core_radius: f64,
    g: &FourierBoundary,
    amplify: f64,
    cx: f64,
    cy: f64,
    scale: f64,
    label: &str,
) {
    out.push_str(&format!(
        "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"{:.2}\" fill=\"none\" stroke=\"#9a9a9a\" \
         stroke-width=\"1\" stroke-dasharray=\"4 3\"/>\n",
        scale * core_radius
    ));
    out.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#155e8a\" stroke-width=\"1.5\"/>\n",
        boundary_points(g, amplify, cx, cy, scale)
    ));
    if !label.is_empty() {
        out.push_str(&format!(
            "<text x=\"{cx:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" \
             text-anchor=\"middle\" fill=\"#333\">{label}</text>\n",
            cy + scale + 16.0
        ));
    }
}

/// One shape: the core circle and the perturbed outer boundary, to scale.
pub fn shape_figure(core_radius: f64, g: &FourierBoundary) -> String {
    let size = 420.0;
    let max_r = 1.0 + g.sup_norm();
    let scale = 180.0 / max_r;
    let mut out = header(size, size);
    shape_panel(
        &mut out,
        core_radius,
        g,
        1.0,
        size / 2.0,
        size / 2.0 - 8.0,
        scale,
        &format!("R = {core_radius}"),
    );
    out.push_str("</svg>\n");
    out
}

/// Pick up to five representative branch points: the two endpoints, the
/// midpoints of each side, and the point closest to the trivial shape.
fn gallery_indices(eps: &[f64]) -> Vec<usize> {
    let n = eps.len();
    let closest =
        (0..n).min_by(|&i, &j| eps[i].abs().total_cmp(&eps[j].abs())).unwrap_or(0);
    let mut picks = vec![0, closest / 2, closest, (closest + n - 1) / 2, n - 1];
    picks.dedup();
    picks
}

/// Shape gallery along the branch plus the lambda-epsilon diagram.
pub fn branch_gallery(branch: &Branch) -> String {
    let pts = &branch.points;
    let eps: Vec<f64> = pts.iter().map(|p| p.epsilon).collect();
    let picks = gallery_indices(&eps);

    // Radial deviations on the traced range are a few percent at most; blow
    // them up to ~12% of the radius so the petals are visible, and say so.
    let max_dev =
        picks.iter().map(|&i| pts[i].boundary.sup_norm()).fold(0.0, f64::max);
    let amplify = if max_dev > 0.0 { (0.12 / max_dev).max(1.0) } else { 1.0 };

    let panel = 210.0;
    let plot_w = 460.0;
    let plot_h = 230.0;
    let width = (picks.len() as f64 * panel).max(plot_w + 40.0);
    let height = panel + 40.0 + plot_h + 24.0;
    let mut out = header(width, height);

    for (slot, &i) in picks.iter().enumerate() {
        let cx = panel * (slot as f64 + 0.5);
        let cy = panel / 2.0;
        shape_panel(
            &mut out,
            branch.config.core_radius,
            &pts[i].boundary,
            amplify,
            cx,
            cy,
            0.40 * panel / (1.0 + amplify * max_dev),
            &format!("eps = {:.3e}", pts[i].epsilon),
        );
    }
    out.push_str(&format!(
        "<text x=\"{:.2}\" y=\"16\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"end\" fill=\"#333\">radial deviation x{amplify:.0}</text>\n",
        width - 10.0
    ));

    // lambda-epsilon diagram under the shape row.
    let (x0, y0) = (70.0, panel + 40.0);
    let (lmin, lmax) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.lambda), hi.max(p.lambda))
        });
    let pad = ((lmax - lmin) * 0.08).max(1e-12);
    let (lmin, lmax) = (lmin - pad, lmax + pad);
    let emax = eps.iter().fold(0.0f64, |m, &e| m.max(e.abs())).max(1e-12) * 1.08;
    let sx = |l: f64| x0 + (l - lmin) / (lmax - lmin) * (plot_w - 90.0);
    let sy = |e: f64| y0 + plot_h / 2.0 - e / emax * (plot_h / 2.0 - 20.0);

    // Axes through lambda = 0 and eps = 0.
    out.push_str(&format!(
        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#bbb\" stroke-width=\"1\"/>\n",
        sx(lmin), sy(0.0), sx(lmax), sy(0.0)
    ));
    if lmin <= 0.0 && 0.0 <= lmax {
        out.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#bbb\" stroke-width=\"1\"/>\n",
            sx(0.0), sy(-emax), sx(0.0), sy(emax)
        ));
    }
    let curve: Vec<String> =
        pts.iter().map(|p| format!("{:.2},{:.2}", sx(p.lambda), sy(p.epsilon))).collect();
    out.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#a43820\" stroke-width=\"1.5\"/>\n",
        curve.join(" ")
    ));
    out.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">lambda in [{lmin:.2e}, {lmax:.2e}]</text>\n",
        x0,
        y0 + plot_h + 12.0
    ));
    out.push_str(&format!(
        "<text x=\"12\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">eps</text>\n",
        y0 + plot_h / 2.0
    ));
    out.push_str("</svg>\n");
    out
}
