//! Minimal self-contained SVG line plots. CSV is the source of truth; these
//! plots are a convenience view, byte-stable for identical inputs.

/// One polyline with a legend label.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 60.0;
const PALETTE: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn fmt(v: f64) -> String {
    // fixed short form keeps output byte-stable and diff-friendly
    format!("{v:.3}")
}

/// Render series as polylines. The y-axis switches to log scale when the
/// positive values span more than three decades (small residuals would
/// otherwise be invisible); non-positive values are clipped in log mode.
pub fn line_plot(title: &str, series: &[Series]) -> String {
    let ys: Vec<f64> = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1))
        .collect();
    let y_pos_min = ys.iter().cloned().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
    let y_max = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_y = y_pos_min.is_finite() && y_max > 0.0 && y_pos_min < 1e-3 * y_max;

    let ty = |v: f64| -> Option<f64> {
        if log_y {
            if v > 0.0 {
                Some(v.log10())
            } else {
                None
            }
        } else {
            Some(v)
        }
    };
    let mut tx_min = f64::INFINITY;
    let mut tx_max = f64::NEG_INFINITY;
    let mut ty_min = f64::INFINITY;
    let mut ty_max = f64::NEG_INFINITY;
    for s in series {
        for &(x, y) in &s.points {
            tx_min = tx_min.min(x);
            tx_max = tx_max.max(x);
            if let Some(v) = ty(y) {
                ty_min = ty_min.min(v);
                ty_max = ty_max.max(v);
            }
        }
    }
    if !tx_min.is_finite() || !ty_min.is_finite() {
        tx_min = 0.0;
        tx_max = 1.0;
        ty_min = 0.0;
        ty_max = 1.0;
    }
    if tx_max == tx_min {
        tx_max = tx_min + 1.0;
    }
    if ty_max == ty_min {
        ty_max = ty_min + 1.0;
    }
    let sx = (WIDTH - 2.0 * MARGIN) / (tx_max - tx_min);
    let sy = (HEIGHT - 2.0 * MARGIN) / (ty_max - ty_min);
    let map = |x: f64, yt: f64| -> (f64, f64) {
        (
            MARGIN + (x - tx_min) * sx,
            HEIGHT - MARGIN - (yt - ty_min) * sy,
        )
    };

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    out.push_str(&format!(
        "<text x=\"{}\" y=\"30\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{}</text>\n",
        WIDTH / 2.0,
        title
    ));
    out.push_str(&format!(
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333\"/>\n",
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    ));
    let axis_label = |v: f64| if log_y { format!("1e{}", fmt(v)) } else { fmt(v) };
    out.push_str(&format!(
        "<text x=\"{MARGIN}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
        HEIGHT - MARGIN + 16.0,
        fmt(tx_min)
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
        WIDTH - MARGIN,
        HEIGHT - MARGIN + 16.0,
        fmt(tx_max)
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
        MARGIN - 6.0,
        HEIGHT - MARGIN,
        axis_label(ty_min)
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
        MARGIN - 6.0,
        MARGIN + 4.0,
        axis_label(ty_max)
    ));

    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut pts = String::new();
        for &(x, y) in &s.points {
            if let Some(yt) = ty(y) {
                let (px, py) = map(x, yt);
                pts.push_str(&format!("{},{} ", fmt(px), fmt(py)));
            }
        }
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            pts.trim_end()
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"{color}\">{}</text>\n",
            WIDTH - MARGIN - 150.0,
            MARGIN + 18.0 + 16.0 * k as f64,
            s.label
        ));
    }
    out.push_str("</svg>\n");
    out
}
