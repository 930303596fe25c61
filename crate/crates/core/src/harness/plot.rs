//! Self-contained SVG line plots from summary CSV files. The output has no
//! timestamps or random ids, so identical input gives identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::KvConfig;
use crate::error::{invalid, Result};

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f",
];

/// Which columns to draw and how.
#[derive(Clone, Debug, PartialEq)]
pub struct PlotSpec {
    pub x: String,
    pub y: String,
    pub group: String,
    pub ci_low: Option<String>,
    pub ci_high: Option<String>,
    pub log_x: bool,
    pub title: String,
    pub width: f64,
    pub height: f64,
}

impl Default for PlotSpec {
    fn default() -> Self {
        PlotSpec {
            x: "p".into(),
            y: "success_rate".into(),
            group: "n".into(),
            ci_low: Some("ci_low".into()),
            ci_high: Some("ci_high".into()),
            log_x: false,
            title: "success rate".into(),
            width: 640.0,
            height: 420.0,
        }
    }
}

impl PlotSpec {
    /// Keys `x`, `y`, `group`, `ci_low`, `ci_high` (empty value disables the
    /// whiskers), `log_x`, `title`, `width`, `height`; all optional.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg = KvConfig::parse(text)?;
        let s = "";
        cfg.reject_unknown(
            s,
            &[
                "x", "y", "group", "ci_low", "ci_high", "log_x", "title", "width", "height",
            ],
        )?;
        let d = PlotSpec::default();
        let opt = |key: &str, dflt: Option<String>| -> Result<Option<String>> {
            Ok(match cfg.get::<String>(s, key)? {
                Some(v) if v.is_empty() => None,
                Some(v) => Some(v),
                None => dflt,
            })
        };
        let spec = PlotSpec {
            x: cfg.get_or(s, "x", d.x)?,
            y: cfg.get_or(s, "y", d.y)?,
            group: cfg.get_or(s, "group", d.group)?,
            ci_low: opt("ci_low", d.ci_low)?,
            ci_high: opt("ci_high", d.ci_high)?,
            log_x: cfg.get_or(s, "log_x", d.log_x)?,
            title: cfg.get_or(s, "title", d.title)?,
            width: cfg.get_or(s, "width", d.width)?,
            height: cfg.get_or(s, "height", d.height)?,
        };
        if !(spec.width >= 200.0 && spec.height >= 150.0) {
            return Err(invalid("plot needs width >= 200 and height >= 150"));
        }
        Ok(spec)
    }
}

struct Point {
    x: f64,
    y: f64,
    ci: Option<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Renders the CSV text as an SVG document.
pub fn plot(csv_text: &str, spec: &PlotSpec) -> Result<String> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(csv_text.as_bytes());
    let headers = rdr.headers().map_err(|e| invalid(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| invalid(format!("column {name:?} not found")))
    };
    let (xi, yi, gi) = (col(&spec.x)?, col(&spec.y)?, col(&spec.group)?);
    let ci = match (&spec.ci_low, &spec.ci_high) {
        (Some(l), Some(h)) => Some((col(l)?, col(h)?)),
        _ => None,
    };
    let num = |s: &str, what: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| invalid(format!("non-numeric {what} value {s:?}")))
    };
    let mut groups: BTreeMap<String, Vec<Point>> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| invalid(e.to_string()))?;
        let x = num(&rec[xi], &spec.x)?;
        if spec.log_x && x <= 0.0 {
            continue;
        }
        let y = num(&rec[yi], &spec.y)?;
        let ci = match ci {
            Some((l, h)) => Some((num(&rec[l], "ci")?, num(&rec[h], "ci")?)),
            None => None,
        };
        groups.entry(rec[gi].to_string()).or_default().push(Point { x, y, ci });
    }
    // Numeric group labels sort numerically.
    let mut names: Vec<String> = groups.keys().cloned().collect();
    if names.iter().all(|n| n.parse::<f64>().is_ok()) {
        names.sort_by(|a, b| a.parse::<f64>().unwrap().total_cmp(&b.parse::<f64>().unwrap()));
    }
    for pts in groups.values_mut() {
        pts.sort_by(|a, b| a.x.total_cmp(&b.x));
    }
    let tx = |x: f64| if spec.log_x { x.log10() } else { x };
    let all = groups.values().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in all {
        x0 = x0.min(tx(p.x));
        x1 = x1.max(tx(p.x));
        let (lo, hi) = p.ci.unwrap_or((p.y, p.y));
        y0 = y0.min(p.y.min(lo));
        y1 = y1.max(p.y.max(hi));
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y0 >= 0.0 && y1 <= 1.0 {
        (y0, y1) = (0.0, 1.0);
    } else if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let (w, h) = (spec.width, spec.height);
    let (left, right, top, bottom) = (60.0, 130.0, 40.0, 50.0);
    let px = |x: f64| left + (tx(x) - x0) / (x1 - x0) * (w - left - right);
    let py = |y: f64| h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{w:.0}" height="{h:.0}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        (w - right + left) / 2.0,
        escape(&spec.title)
    );
    let (ax0, ax1, ay0, ay1) = (left, w - right, h - bottom, top);
    let _ = writeln!(
        s,
        r#"<line x1="{ax0:.2}" y1="{ay0:.2}" x2="{ax1:.2}" y2="{ay0:.2}" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<line x1="{ax0:.2}" y1="{ay0:.2}" x2="{ax0:.2}" y2="{ay1:.2}" stroke="black"/>"#
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = x0 + f * (x1 - x0);
        let xpos = left + f * (w - left - right);
        let label = if spec.log_x {
            format!("1e{}", tick_label(xv))
        } else {
            tick_label(xv)
        };
        let _ = writeln!(
            s,
            r#"<line x1="{xpos:.2}" y1="{ay0:.2}" x2="{xpos:.2}" y2="{:.2}" stroke="black"/>"#,
            ay0 + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{xpos:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            ay0 + 18.0,
            escape(&label)
        );
        let yv = y0 + f * (y1 - y0);
        let ypos = h - bottom - f * (h - top - bottom);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{ypos:.2}" x2="{ax0:.2}" y2="{ypos:.2}" stroke="black"/>"#,
            ax0 - 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            ax0 - 8.0,
            ypos + 4.0,
            tick_label(yv)
        );
    }
    let x_title = if spec.log_x {
        format!("{} (log scale)", spec.x)
    } else {
        spec.x.clone()
    };
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (ax0 + ax1) / 2.0,
        h - 12.0,
        escape(&x_title)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        (ay0 + ay1) / 2.0,
        (ay0 + ay1) / 2.0,
        escape(&spec.y)
    );
    for (gi, name) in names.iter().enumerate() {
        let color = PALETTE[gi % PALETTE.len()];
        let pts = &groups[name];
        if pts.len() >= 2 {
            let coords: Vec<String> = pts.iter().map(|p| format!("{:.2},{:.2}", px(p.x), py(p.y))).collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
                coords.join(" ")
            );
        }
        for p in pts {
            if let Some((lo, hi)) = p.ci {
                let x = px(p.x);
                let _ = writeln!(
                    s,
                    r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="{color}"/>"#,
                    py(lo),
                    py(hi)
                );
            }
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="{color}"/>"#,
                px(p.x),
                py(p.y)
            );
        }
        let ly = top + 10.0 + 20.0 * gi as f64;
        let lx = w - right + 15.0;
        let _ = writeln!(
            s,
            r#"<rect x="{lx:.2}" y="{:.2}" width="12" height="12" fill="{color}"/>"#,
            ly - 10.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{ly:.2}">{}</text>"#,
            lx + 18.0,
            escape(&format!("{} = {}", spec.group, name))
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
