//! Bias matrices: per-system-pair signed rank agreement on consistent and
//! inverted summary pairs.
//!
//! For systems `s1, s2` with `s1` ahead on mean human score, the consistent
//! set `H+` holds all ordered document pairs `(d_i, d_j)` (including
//! `d_i = d_j`) where `s1`'s summary is human-scored strictly higher; `P+`
//! is the analogous set on the predictions. Then
//! `tau+ = (2 |H+ n P+| - |H+|) / |H+|`, and `tau-` is the same computation
//! with both comparisons inverted. A cell is undefined when its reference
//! set is empty.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::data::{DocId, PredictionSet, SystemId};
use crate::error::{Error, Result};
use crate::stats::MetricValue;

/// Direction of a signed-agreement cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Consistent pairs: the better system's summary is scored higher.
    Plus,
    /// Inverted pairs: the worse system's summary is scored higher.
    Minus,
}

/// Square matrix of signed rank-agreement values, systems in descending
/// order of mean human score. `tau+` above the diagonal, `tau-` below,
/// zero on it; `pair_counts` holds `|H+|` above and `|H-|` below.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasMatrix {
    pub system_order: Vec<SystemId>,
    pub values: Vec<Vec<MetricValue>>,
    pub pair_counts: Vec<Vec<u64>>,
}

/// Output format for [`render_bias_matrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    Csv,
    Svg,
}

/// Geometry knobs for the SVG rendering.
#[derive(Debug, Clone, Copy)]
pub struct SvgOptions {
    pub cell_size: f64,
    pub margin: f64,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions {
            cell_size: 28.0,
            margin: 90.0,
        }
    }
}

fn docs_and_scores(
    set: &PredictionSet,
    system: &SystemId,
    docs: &[DocId],
) -> Result<Vec<f64>> {
    docs.iter()
        .map(|d| {
            set.get(d, system).ok_or_else(|| Error::MissingScore {
                doc: d.0.clone(),
                system: system.0.clone(),
            })
        })
        .collect()
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Signed agreement between `better` and `worse` over all ordered document
/// pairs. Returns the value (or undefined for an empty reference set) and
/// the reference-set size.
pub fn tau_signed(
    human: &PredictionSet,
    pred: &PredictionSet,
    better: &SystemId,
    worse: &SystemId,
    direction: Direction,
) -> Result<(MetricValue, u64)> {
    let docs = human.documents();
    let h1 = docs_and_scores(human, better, &docs)?;
    let h2 = docs_and_scores(human, worse, &docs)?;
    let p1 = docs_and_scores(pred, better, &docs)?;
    let p2 = docs_and_scores(pred, worse, &docs)?;
    if mean(&h1) <= mean(&h2) {
        return Err(Error::NotBetterSystem {
            better: better.0.clone(),
            worse: worse.0.clone(),
        });
    }
    Ok(tau_signed_scores(&h1, &h2, &p1, &p2, direction))
}

/// Core pair count over pre-extracted per-document score vectors.
fn tau_signed_scores(
    h1: &[f64],
    h2: &[f64],
    p1: &[f64],
    p2: &[f64],
    direction: Direction,
) -> (MetricValue, u64) {
    let mut reference = 0u64;
    let mut agree = 0u64;
    for i in 0..h1.len() {
        for j in 0..h2.len() {
            let in_h = match direction {
                Direction::Plus => h1[i] > h2[j],
                Direction::Minus => h1[i] < h2[j],
            };
            if !in_h {
                continue;
            }
            reference += 1;
            let in_p = match direction {
                Direction::Plus => p1[i] > p2[j],
                Direction::Minus => p1[i] < p2[j],
            };
            if in_p {
                agree += 1;
            }
        }
    }
    if reference == 0 {
        return (MetricValue::Undefined, 0);
    }
    let value = (2.0 * agree as f64 - reference as f64) / reference as f64;
    (MetricValue::Defined(value), reference)
}

/// Builds the full bias matrix. Mean-score ties between systems are broken
/// by system id so the ordering is deterministic.
pub fn bias_matrix(human: &PredictionSet, pred: &PredictionSet) -> Result<BiasMatrix> {
    if !human.same_keys(pred) {
        return Err(Error::Coverage(format!(
            "prediction set '{}' does not cover the same keys as '{}'",
            pred.measure_name(),
            human.measure_name()
        )));
    }
    if !human.is_complete_grid() {
        return Err(Error::Coverage(
            "score keys do not form a complete documents x systems grid".into(),
        ));
    }
    let systems = human.systems();
    if systems.len() < 2 {
        return Err(Error::TooFew {
            what: "systems",
            needed: 2,
            got: systems.len(),
        });
    }
    let docs = human.documents();

    let mut with_means: Vec<(SystemId, f64, Vec<f64>, Vec<f64>)> = systems
        .into_iter()
        .map(|s| {
            let h = docs_and_scores(human, &s, &docs)?;
            let p = docs_and_scores(pred, &s, &docs)?;
            let m = mean(&h);
            Ok((s, m, h, p))
        })
        .collect::<Result<_>>()?;
    with_means.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("finite means")
            .then_with(|| a.0.cmp(&b.0))
    });

    let n = with_means.len();
    let mut values = vec![vec![MetricValue::Defined(0.0); n]; n];
    let mut pair_counts = vec![vec![0u64; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            // The earlier system in the order is the better one: tau+ for
            // cells right of the diagonal, tau- below it.
            let (b, w, direction) = if i < j {
                (i, j, Direction::Plus)
            } else {
                (j, i, Direction::Minus)
            };
            let (value, count) = tau_signed_scores(
                &with_means[b].2,
                &with_means[w].2,
                &with_means[b].3,
                &with_means[w].3,
                direction,
            );
            values[i][j] = value;
            pair_counts[i][j] = count;
        }
    }
    Ok(BiasMatrix {
        system_order: with_means.into_iter().map(|(s, ..)| s).collect(),
        values,
        pair_counts,
    })
}

impl BiasMatrix {
    /// Values CSV: header of system ids, one row per system, undefined
    /// cells empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("system");
        for s in &self.system_order {
            out.push(',');
            out.push_str(&s.0);
        }
        out.push('\n');
        for (i, s) in self.system_order.iter().enumerate() {
            out.push_str(&s.0);
            for j in 0..self.system_order.len() {
                out.push(',');
                if let MetricValue::Defined(v) = self.values[i][j] {
                    let _ = write!(out, "{v:.4}");
                }
            }
            out.push('\n');
        }
        out
    }

    /// Pair-count CSV in the same layout.
    pub fn counts_to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("system");
        for s in &self.system_order {
            out.push(',');
            out.push_str(&s.0);
        }
        out.push('\n');
        for (i, s) in self.system_order.iter().enumerate() {
            out.push_str(&s.0);
            for j in 0..self.system_order.len() {
                let _ = write!(out, ",{}", self.pair_counts[i][j]);
            }
            out.push('\n');
        }
        out
    }

    /// SVG grid of circles: area proportional to the cell's pair count,
    /// fill on a blue-white-red diverging scale over [-1, 1]. Cells with a
    /// zero pair count draw nothing. Output bytes are a pure function of
    /// the matrix and options.
    pub fn to_svg(&self, opts: &SvgOptions) -> String {
        let n = self.system_order.len();
        let cell = opts.cell_size;
        let margin = opts.margin;
        let width = margin + cell * n as f64 + 8.0;
        let height = margin + cell * n as f64 + 8.0;
        let max_count = self
            .pair_counts
            .iter()
            .flatten()
            .copied()
            .max()
            .unwrap_or(0);

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
        );
        let _ = writeln!(
            svg,
            r##"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="#ffffff"/>"##
        );
        for i in 0..=n {
            let pos = margin + cell * i as f64;
            let end = margin + cell * n as f64;
            let _ = writeln!(
                svg,
                r##"<line x1="{margin:.1}" y1="{pos:.1}" x2="{end:.1}" y2="{pos:.1}" stroke="#cccccc" stroke-width="0.5"/>"##
            );
            let _ = writeln!(
                svg,
                r##"<line x1="{pos:.1}" y1="{margin:.1}" x2="{pos:.1}" y2="{end:.1}" stroke="#cccccc" stroke-width="0.5"/>"##
            );
        }
        for (i, s) in self.system_order.iter().enumerate() {
            let y = margin + cell * (i as f64 + 0.5);
            let _ = writeln!(
                svg,
                r#"<text x="{x:.1}" y="{y:.1}" font-size="10" font-family="sans-serif" text-anchor="end" dominant-baseline="middle">{label}</text>"#,
                x = margin - 6.0,
                label = xml_escape(&s.0)
            );
            let x = margin + cell * (i as f64 + 0.5);
            let _ = writeln!(
                svg,
                r#"<text x="{x:.1}" y="{y:.1}" font-size="10" font-family="sans-serif" text-anchor="start" dominant-baseline="middle" transform="rotate(-60 {x:.1} {y:.1})">{label}</text>"#,
                y = margin - 6.0,
                label = xml_escape(&s.0)
            );
        }
        for i in 0..n {
            for j in 0..n {
                let count = self.pair_counts[i][j];
                if count == 0 {
                    continue;
                }
                let value = match self.values[i][j] {
                    MetricValue::Defined(v) => v,
                    MetricValue::Undefined => continue,
                };
                let cx = margin + cell * (j as f64 + 0.5);
                let cy = margin + cell * (i as f64 + 0.5);
                let r = circle_radius(count, max_count, cell / 2.0 - 1.0);
                let _ = writeln!(
                    svg,
                    r#"<circle cx="{cx:.1}" cy="{cy:.1}" r="{r:.2}" fill="{color}"/>"#,
                    color = diverging_color(value)
                );
            }
        }
        svg.push_str("</svg>\n");
        svg
    }
}

/// Radius such that circle area is proportional to `count`, with
/// `max_count` mapping to `max_radius`.
pub fn circle_radius(count: u64, max_count: u64, max_radius: f64) -> f64 {
    if max_count == 0 {
        return 0.0;
    }
    max_radius * (count as f64 / max_count as f64).sqrt()
}

/// Blue-white-red diverging color over [-1, 1].
pub fn diverging_color(value: f64) -> String {
    let v = value.clamp(-1.0, 1.0);
    let lerp = |a: f64, b: f64, t: f64| a + (b - a) * t;
    let (r, g, b) = if v < 0.0 {
        let t = -v;
        (lerp(255.0, 33.0, t), lerp(255.0, 102.0, t), lerp(255.0, 172.0, t))
    } else {
        (lerp(255.0, 178.0, v), lerp(255.0, 24.0, v), lerp(255.0, 43.0, v))
    };
    format!("#{:02x}{:02x}{:02x}", r.round() as u8, g.round() as u8, b.round() as u8)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes the matrix to `path` in the chosen format.
pub fn render_bias_matrix(m: &BiasMatrix, path: &Path, format: RenderFormat) -> Result<()> {
    let content = match format {
        RenderFormat::Csv => m.to_csv(),
        RenderFormat::Svg => m.to_svg(&SvgOptions::default()),
    };
    fs::write(path, content).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sets(entries: &[(&str, &str, f64, f64)]) -> (PredictionSet, PredictionSet) {
        let mut h = PredictionSet::new("human");
        let mut p = PredictionSet::new("pred");
        for (d, s, hv, pv) in entries {
            h.insert((*d).into(), (*s).into(), *hv).unwrap();
            p.insert((*d).into(), (*s).into(), *pv).unwrap();
        }
        (h, p)
    }

    fn two_system_example() -> (PredictionSet, PredictionSet) {
        sets(&[
            ("d1", "s1", 5.0, 0.9),
            ("d2", "s1", 3.0, 0.2),
            ("d1", "s2", 2.0, 0.5),
            ("d2", "s2", 4.0, 0.8),
        ])
    }

    #[test]
    fn hand_example_plus_and_minus() {
        let (h, p) = two_system_example();
        let (v, n) = tau_signed(&h, &p, &"s1".into(), &"s2".into(), Direction::Plus).unwrap();
        assert_eq!(n, 3);
        assert_abs_diff_eq!(v.unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        let (v, n) = tau_signed(&h, &p, &"s1".into(), &"s2".into(), Direction::Minus).unwrap();
        assert_eq!(n, 1);
        assert_abs_diff_eq!(v.unwrap(), 1.0);
    }

    #[test]
    fn rejects_wrong_system_order() {
        let (h, p) = two_system_example();
        let err = tau_signed(&h, &p, &"s2".into(), &"s1".into(), Direction::Plus).unwrap_err();
        assert!(matches!(err, Error::NotBetterSystem { .. }));
    }

    #[test]
    fn dominant_system_makes_minus_undefined() {
        let (h, p) = sets(&[
            ("d1", "s1", 5.0, 0.9),
            ("d2", "s1", 4.0, 0.8),
            ("d1", "s2", 2.0, 0.1),
            ("d2", "s2", 1.0, 0.2),
        ]);
        let (v, n) = tau_signed(&h, &p, &"s1".into(), &"s2".into(), Direction::Minus).unwrap();
        assert_eq!(v, MetricValue::Undefined);
        assert_eq!(n, 0);
    }

    #[test]
    fn perfect_predictions_fill_ones() {
        let (h, _) = two_system_example();
        let m = bias_matrix(&h, &h).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                if i == j {
                    assert_eq!(m.values[i][j], MetricValue::Defined(0.0));
                } else if let MetricValue::Defined(v) = m.values[i][j] {
                    assert_abs_diff_eq!(v, 1.0);
                }
            }
        }
    }

    #[test]
    fn negated_predictions_fill_minus_ones() {
        let (h, _) = two_system_example();
        let neg = h.map_scores(|v| -v);
        let m = bias_matrix(&h, &neg).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                if i != j {
                    if let MetricValue::Defined(v) = m.values[i][j] {
                        assert_abs_diff_eq!(v, -1.0);
                    }
                }
            }
        }
    }

    #[test]
    fn favored_system_signature() {
        // system B's predictions are boosted far above everything else
        let (h, p) = sets(&[
            ("d1", "A", 5.0, 5.0),
            ("d2", "A", 4.0, 4.0),
            ("d3", "A", 5.0, 5.0),
            ("d1", "B", 3.0, 13.0),
            ("d2", "B", 4.0, 14.0),
            ("d3", "B", 2.0, 12.0),
            ("d1", "C", 2.0, 2.0),
            ("d2", "C", 3.0, 3.0),
            ("d3", "C", 3.0, 3.0),
        ]);
        let m = bias_matrix(&h, &p).unwrap();
        assert_eq!(
            m.system_order,
            vec![SystemId("A".into()), SystemId("B".into()), SystemId("C".into())]
        );
        let f = 1; // favored system's position
        for j in (f + 1)..3 {
            assert_eq!(m.values[f][j], MetricValue::Defined(1.0), "row tau+");
        }
        for i in (f + 1)..3 {
            assert_eq!(m.values[i][f], MetricValue::Defined(-1.0), "column tau-");
        }
        // systems above the favored one never outrank it in predictions
        assert_eq!(m.values[0][f], MetricValue::Defined(-1.0));
    }

    #[test]
    fn pair_counts_partition_document_pairs() {
        let (h, p) = two_system_example();
        let m = bias_matrix(&h, &p).unwrap();
        let n_docs = 2u64;
        // |H+| + |H-| + human-tied cross pairs = |D|^2; no ties here
        assert_eq!(m.pair_counts[0][1] + m.pair_counts[1][0], n_docs * n_docs);
    }

    #[test]
    fn matrix_is_monotone_transform_invariant() {
        let (h, p) = sets(&[
            ("d1", "A", 5.0, 0.9),
            ("d2", "A", 3.0, 0.1),
            ("d1", "B", 2.0, 0.3),
            ("d2", "B", 4.0, 0.7),
            ("d1", "C", 1.0, 0.2),
            ("d2", "C", 2.0, 0.4),
        ]);
        let transformed = p.map_scores(|v| (5.0 * v).exp() + 1.0);
        assert_eq!(bias_matrix(&h, &p).unwrap(), bias_matrix(&h, &transformed).unwrap());
    }

    #[test]
    fn mean_ties_break_by_system_id() {
        let (h, p) = sets(&[
            ("d1", "zeta", 4.0, 0.1),
            ("d2", "zeta", 2.0, 0.2),
            ("d1", "alpha", 2.0, 0.3),
            ("d2", "alpha", 4.0, 0.4),
        ]);
        let m = bias_matrix(&h, &p).unwrap();
        assert_eq!(
            m.system_order,
            vec![SystemId("alpha".into()), SystemId("zeta".into())]
        );
    }

    #[test]
    fn csv_shape_and_empty_cells() {
        let (h, p) = sets(&[
            ("d1", "s1", 5.0, 0.9),
            ("d2", "s1", 4.0, 0.8),
            ("d1", "s2", 2.0, 0.1),
            ("d2", "s2", 1.0, 0.2),
        ]);
        let m = bias_matrix(&h, &p).unwrap();
        let csv = m.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "system,s1,s2");
        // tau- is undefined (s1 dominates), so the below-diagonal cell is empty
        assert_eq!(lines[2], "s2,,0.0000");
    }

    #[test]
    fn radius_scales_with_sqrt_of_count() {
        let r1 = circle_radius(50, 200, 13.0);
        let r2 = circle_radius(100, 200, 13.0);
        assert_abs_diff_eq!(r2 / r1, 2f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(circle_radius(200, 200, 13.0), 13.0);
    }

    #[test]
    fn svg_is_deterministic_and_skips_empty_cells() {
        let (h, p) = sets(&[
            ("d1", "s1", 5.0, 0.9),
            ("d2", "s1", 4.0, 0.8),
            ("d1", "s2", 2.0, 0.1),
            ("d2", "s2", 1.0, 0.2),
        ]);
        let m = bias_matrix(&h, &p).unwrap();
        let a = m.to_svg(&SvgOptions::default());
        let b = m.to_svg(&SvgOptions::default());
        assert_eq!(a, b);
        // one off-diagonal cell defined (tau+), the other undefined: 1 circle
        assert_eq!(a.matches("<circle").count(), 1);
    }

    #[test]
    fn diverging_scale_endpoints() {
        assert_eq!(diverging_color(0.0), "#ffffff");
        assert_eq!(diverging_color(1.0), "#b2182b");
        assert_eq!(diverging_color(-1.0), "#2166ac");
    }
}
