use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::config::Column;
use super::SweepRecord;
use crate::error::{domain, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;
const TICKS: usize = 5;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

struct Axis {
    lo: f64,
    hi: f64,
    from: f64,
    to: f64,
}

impl Axis {
    fn new(lo: f64, hi: f64, from: f64, to: f64) -> Self {
        let (lo, hi) = if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, hi + 0.5)
        };
        Self { lo, hi, from, to }
    }

    fn map(&self, x: f64) -> f64 {
        self.from + (x - self.lo) / (self.hi - self.lo) * (self.to - self.from)
    }

    fn ticks(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=TICKS).map(move |i| self.lo + (self.hi - self.lo) * i as f64 / TICKS as f64)
    }
}

fn label(x: f64) -> String {
    if x != 0.0 && (x.abs() < 1e-2 || x.abs() >= 1e4) {
        format!("{x:.2e}")
    } else {
        format!("{x:.3}")
    }
}

/// Renders `columns` against `λ` as a standalone SVG document.
pub fn write_svg<W: Write>(records: &[SweepRecord], columns: &[Column], mut w: W) -> Result<()> {
    if records.is_empty() {
        return Err(domain("no records to plot"));
    }
    let series: Vec<(Column, Vec<(f64, f64)>)> = columns
        .iter()
        .map(|&c| {
            let pts = records
                .iter()
                .filter_map(|r| r.get(c).map(|y| (r.lambda, y)))
                .filter(|(_, y)| y.is_finite())
                .collect();
            (c, pts)
        })
        .collect();

    let (mut xlo, mut xhi) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in records {
        xlo = xlo.min(r.lambda);
        xhi = xhi.max(r.lambda);
    }
    let (mut ylo, mut yhi) = (0.0f64, 0.0f64);
    for (_, pts) in &series {
        for &(_, y) in pts {
            ylo = ylo.min(y);
            yhi = yhi.max(y);
        }
    }
    let pad = 0.05 * (yhi - ylo);
    let x = Axis::new(xlo, xhi, LEFT, WIDTH - RIGHT);
    let y = Axis::new(ylo - if ylo < 0.0 { pad } else { 0.0 }, yhi + pad, HEIGHT - BOTTOM, TOP);

    let mut s = String::new();
    // writing into a String cannot fail
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let (x0, x1, y0, y1) = (x.from, x.to, y.from, y.to);
    let _ = writeln!(
        s,
        r#"<path d="M{x0:.2} {y1:.2}V{y0:.2}H{x1:.2}" fill="none" stroke="black"/>"#
    );
    for t in x.ticks() {
        let px = x.map(t);
        let _ = writeln!(
            s,
            r#"<line x1="{px:.2}" y1="{y0:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y0 + 5.0,
            y0 + 20.0,
            label(t)
        );
    }
    for t in y.ticks() {
        let py = y.map(t);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{x0:.2}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0,
            label(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">λ = J/U</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 10.0
    );

    for (k, (column, pts)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        if pts.len() > 1 {
            let coords: Vec<String> = pts
                .iter()
                .map(|&(a, b)| format!("{:.2},{:.2}", x.map(a), y.map(b)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                coords.join(" ")
            );
        } else if let Some(&(a, b)) = pts.first() {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                x.map(a),
                y.map(b)
            );
        }
        let ly = TOP + 10.0 + 20.0 * k as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{column}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    w.write_all(s.as_bytes())?;
    w.flush()?;
    Ok(())
}

pub fn emit_plot(records: &[SweepRecord], path: &Path, columns: &[Column]) -> Result<()> {
    if records.is_empty() {
        return Err(domain("no records to plot"));
    }
    write_svg(records, columns, BufWriter::new(File::create(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(lambda: f64) -> SweepRecord {
        SweepRecord {
            lambda,
            energy: -lambda,
            linear_entropy: lambda.min(0.5),
            ds_dlambda: Some(1.0),
            negativity_nn: Some(lambda / 2.0),
            negativity_nnn: None,
            delta_n2: lambda,
            hierarchy: None,
        }
    }

    fn render(records: &[SweepRecord], columns: &[Column]) -> String {
        let mut buf = Vec::new();
        write_svg(records, columns, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn well_formed_with_legend() {
        let records: Vec<_> = (0..11).map(|i| record(i as f64 / 10.0)).collect();
        let columns = [Column::LinearEntropy, Column::NegativityNn, Column::Energy];
        let svg = render(&records, &columns);
        let doc = roxmltree::Document::parse(&svg).unwrap();
        let polylines = doc.descendants().filter(|n| n.has_tag_name("polyline")).count();
        assert_eq!(polylines, 3);
        for c in columns {
            assert!(svg.contains(&format!(">{c}</text>")));
        }
        assert!(!svg.contains("href"));
    }

    #[test]
    fn single_record_gets_markers() {
        let columns = [Column::LinearEntropy, Column::DeltaN2];
        let svg = render(&[record(0.3)], &columns);
        let doc = roxmltree::Document::parse(&svg).unwrap();
        assert_eq!(doc.descendants().filter(|n| n.has_tag_name("circle")).count(), 2);
        assert_eq!(doc.descendants().filter(|n| n.has_tag_name("polyline")).count(), 0);
    }

    #[test]
    fn absent_column_is_skipped_and_output_repeats() {
        let records: Vec<_> = (0..4).map(|i| record(i as f64)).collect();
        let a = render(&records, &[Column::NegativityNnn, Column::LinearEntropy]);
        let b = render(&records, &[Column::NegativityNnn, Column::LinearEntropy]);
        assert_eq!(a, b);
        assert_eq!(a.matches("<polyline").count(), 1);
        assert!(write_svg(&[], &[Column::Energy], Vec::new()).is_err());
    }
}
