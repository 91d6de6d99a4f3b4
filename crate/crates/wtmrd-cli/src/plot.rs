//! Static SVG line charts for the sweep tables.
//!
//! Input is the sweep CSV layout — first column the axis value, one further
//! column per variant — and output is a self-contained SVG string: one
//! polyline per variant with point markers, linear axes anchored at zero,
//! and a legend. No drawing dependencies; the file is assembled textually.

use std::fmt::Write as _;

/// The four tables a sweep emits, with chart title and y-axis caption.
pub const CHARTS: [(&str, &str, &str); 4] = [
    ("adr", "Attack detection rate", "detection rate (%)"),
    ("adt", "Attack detection time", "detection time (ms)"),
    ("dsl", "Data security level", "packets delivered (%)"),
    ("delay", "End-to-end delay overhead", "mean extra delay (ms)"),
];

/// A parsed sweep table: axis values down the rows, one series per variant.
#[derive(Debug, PartialEq)]
pub struct Table {
    pub axis: String,
    pub variants: Vec<String>,
    pub xs: Vec<f64>,
    /// `series[k][i]` is variant `k` at `xs[i]`.
    pub series: Vec<Vec<f64>>,
}

pub fn parse_table(text: &str) -> Result<Table, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty table")?;
    let mut columns = header.split(',');
    let axis = columns.next().unwrap_or_default().to_string();
    let variants: Vec<String> = columns.map(str::to_string).collect();
    if variants.is_empty() {
        return Err("header needs an axis column and at least one variant".into());
    }

    let mut xs = Vec::new();
    let mut series = vec![Vec::new(); variants.len()];
    for (idx, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let row = idx + 2; // 1-based, after the header
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != variants.len() + 1 {
            return Err(format!(
                "row {row}: {} fields, expected {}",
                fields.len(),
                variants.len() + 1
            ));
        }
        let number = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| format!("row {row}: {s:?}: {e}"))
        };
        xs.push(number(fields[0])?);
        for (k, field) in fields[1..].iter().enumerate() {
            series[k].push(number(field)?);
        }
    }
    if xs.is_empty() {
        return Err("table has no data rows".into());
    }
    Ok(Table {
        axis,
        variants,
        xs,
        series,
    })
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 76.0;
const RIGHT: f64 = 150.0; // legend gutter
const TOP: f64 = 48.0;
const BOTTOM: f64 = 58.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

pub fn render_chart(table: &Table, title: &str, y_label: &str) -> String {
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;

    let (x_min, x_max) = span(&table.xs);
    let y_max = table
        .series
        .iter()
        .flatten()
        .fold(0.0_f64, |a, &v| a.max(v));
    let y_top = if y_max > 0.0 { y_max * 1.05 } else { 1.0 };

    let x_of = |x: f64| LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let y_of = |y: f64| TOP + plot_h - y / y_top * plot_h;

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    );
    let _ = write!(
        svg,
        "  <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    );
    let _ = write!(
        svg,
        "  <text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        LEFT + plot_w / 2.0,
        escape(title)
    );

    // Axes.
    let _ = write!(
        svg,
        "  <line x1=\"{LEFT:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
        TOP + plot_h,
        LEFT + plot_w,
        TOP + plot_h
    );
    let _ = write!(
        svg,
        "  <line x1=\"{LEFT:.1}\" y1=\"{TOP:.1}\" x2=\"{LEFT:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
        TOP + plot_h
    );

    // Y ticks: five, from zero to the padded top.
    for i in 0..=4 {
        let value = y_top * f64::from(i) / 4.0;
        let y = y_of(value);
        let _ = write!(
            svg,
            "  <line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{LEFT:.1}\" y2=\"{y:.1}\" stroke=\"black\"/>\n",
            LEFT - 5.0
        );
        let _ = write!(
            svg,
            "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
            LEFT - 9.0,
            y + 4.0,
            tick_label(value, y_top)
        );
        if i > 0 {
            let _ = write!(
                svg,
                "  <line x1=\"{LEFT:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" \
                 stroke=\"#dddddd\"/>\n",
                LEFT + plot_w
            );
        }
    }

    // X ticks: one per axis value, thinned if the table is unusually wide.
    let stride = table.xs.len().div_ceil(12).max(1);
    for (i, &x) in table.xs.iter().enumerate() {
        if i % stride != 0 && i != table.xs.len() - 1 {
            continue;
        }
        let px = x_of(x);
        let _ = write!(
            svg,
            "  <line x1=\"{px:.1}\" y1=\"{:.1}\" x2=\"{px:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
            TOP + plot_h,
            TOP + plot_h + 5.0
        );
        let _ = write!(
            svg,
            "  <text x=\"{px:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{x}</text>\n",
            TOP + plot_h + 20.0
        );
    }

    // Axis captions.
    let _ = write!(
        svg,
        "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
        LEFT + plot_w / 2.0,
        HEIGHT - 14.0,
        escape(&table.axis)
    );
    let _ = write!(
        svg,
        "  <text x=\"20\" y=\"{:.1}\" text-anchor=\"middle\" \
         transform=\"rotate(-90 20 {:.1})\">{}</text>\n",
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(y_label)
    );

    // One polyline with point markers per variant, plus its legend row.
    for (k, points) in table.series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let path: Vec<String> = table
            .xs
            .iter()
            .zip(points)
            .map(|(&x, &y)| format!("{:.1},{:.1}", x_of(x), y_of(y)))
            .collect();
        let _ = write!(
            svg,
            "  <polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            path.join(" ")
        );
        for (&x, &y) in table.xs.iter().zip(points) {
            let _ = write!(
                svg,
                "  <circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"{color}\"/>\n",
                x_of(x),
                y_of(y)
            );
        }
        let ly = TOP + 10.0 + 20.0 * k as f64;
        let lx = LEFT + plot_w + 16.0;
        let _ = write!(
            svg,
            "  <line x1=\"{lx:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" \
             stroke=\"{color}\" stroke-width=\"2\"/>\n",
            lx + 22.0
        );
        let _ = write!(
            svg,
            "  <text x=\"{:.1}\" y=\"{:.1}\">{}</text>\n",
            lx + 28.0,
            ly + 4.0,
            escape(&table.variants[k])
        );
    }

    svg.push_str("</svg>\n");
    svg
}

/// Data range of the x axis, padded when degenerate so the scale stays finite.
fn span(xs: &[f64]) -> (f64, f64) {
    let min = xs.iter().fold(f64::INFINITY, |a, &v| a.min(v));
    let max = xs.iter().fold(f64::NEG_INFINITY, |a, &v| a.max(v));
    if (max - min).abs() < f64::EPSILON {
        (min - 1.0, max + 1.0)
    } else {
        (min, max)
    }
}

/// Tick text with precision chosen from the axis magnitude, so percentage
/// axes read "75" while millisecond axes read "0.038".
fn tick_label(value: f64, scale: f64) -> String {
    if scale >= 100.0 {
        format!("{value:.0}")
    } else if scale >= 10.0 {
        format!("{value:.1}")
    } else if scale >= 1.0 {
        format!("{value:.2}")
    } else {
        format!("{value:.3}")
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
