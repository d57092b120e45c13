//! Hand-rolled SVG output for the dendrogram, the per-cluster author
//! histograms and the singular-value scree.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::cluster::{cut_dendrogram, Dendrogram};
use crate::error::{Error, Result};
use crate::report::AuthorDistribution;
use crate::svd::scree_csv;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 60.0;

struct Svg {
    body: String,
    width: f64,
    height: f64,
}

impl Svg {
    fn new(width: f64, height: f64) -> Self {
        Svg {
            body: String::new(),
            width,
            height,
        }
    }

    fn line(&mut self, class: &str, extra: &str, (x1, y1): (f64, f64), (x2, y2): (f64, f64)) {
        let _ = writeln!(
            self.body,
            r#"<line class="{class}"{extra} x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="black"/>"#
        );
    }

    fn text(&mut self, class: &str, (x, y): (f64, f64), anchor: &str, content: &str) {
        let _ = writeln!(
            self.body,
            r#"<text class="{class}" x="{x:.2}" y="{y:.2}" font-size="11" text-anchor="{anchor}">{}</text>"#,
            escape(content)
        );
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            w = self.width,
            h = self.height
        )
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Dendrogram above the `n_clusters` cut: cluster numbers along the
/// abscissa, merge heights on the ordinate. Each drawn merge is one
/// `<line class="merge">` bar carrying its height in `data-height`.
pub fn dendrogram_svg(d: &Dendrogram, n_clusters: usize) -> Result<String> {
    let assignment = cut_dendrogram(d, n_clusters)?;
    let roots = d.cut_roots(n_clusters)?;
    let n = d.n_leaves;
    let applied = n - n_clusters;
    let total = n + d.merges.len();

    // Smallest leaf under each node, to label cut roots with cluster ids.
    let mut min_leaf: Vec<usize> = (0..n).collect();
    for m in &d.merges {
        min_leaf.push(min_leaf[m.left].min(min_leaf[m.right]));
    }
    let is_cut_root = {
        let mut v = vec![false; total];
        roots.iter().for_each(|&r| v[r] = true);
        v
    };
    let mut has_parent = vec![false; total];
    for m in &d.merges {
        has_parent[m.left] = true;
        has_parent[m.right] = true;
    }

    let mut order = Vec::new();
    for top in (0..total).filter(|&r| !has_parent[r]) {
        let mut stack = vec![top];
        while let Some(node) = stack.pop() {
            if is_cut_root[node] {
                order.push(node);
            } else {
                let m = d.merges[node - n];
                stack.push(m.right);
                stack.push(m.left);
            }
        }
    }

    let height_of = |node: usize| if node < n { 0.0 } else { d.merges[node - n].height };
    let max_height = d.merges[applied..]
        .iter()
        .chain(roots.iter().filter(|&&r| r >= n).map(|&r| &d.merges[r - n]))
        .map(|m| m.height)
        .fold(0.0, f64::max);
    let scale = if max_height > 0.0 { max_height } else { 1.0 };
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let step = plot_w / order.len() as f64;
    let y_of = |h: f64| HEIGHT - MARGIN - h / scale * plot_h;

    let mut x = vec![f64::NAN; total];
    let mut svg = Svg::new(WIDTH, HEIGHT);
    svg.line("axis", "", (MARGIN, MARGIN), (MARGIN, HEIGHT - MARGIN));
    svg.line(
        "axis",
        "",
        (MARGIN, HEIGHT - MARGIN),
        (WIDTH - MARGIN, HEIGHT - MARGIN),
    );
    for i in 0..=4 {
        let h = scale * i as f64 / 4.0;
        svg.text("tick", (MARGIN - 6.0, y_of(h) + 4.0), "end", &format!("{h:.3}"));
    }
    for (i, &node) in order.iter().enumerate() {
        x[node] = MARGIN + step * (i as f64 + 0.5);
        let cluster = assignment.doc_to_cluster[min_leaf[node]];
        svg.text(
            "leaf",
            (x[node], HEIGHT - MARGIN + 16.0),
            "middle",
            &cluster.to_string(),
        );
        if height_of(node) > 0.0 {
            svg.line("stem", "", (x[node], y_of(0.0)), (x[node], y_of(height_of(node))));
        }
    }
    for (i, m) in d.merges.iter().enumerate().skip(applied) {
        let node = n + i;
        let (xl, xr) = (x[m.left], x[m.right]);
        let y = y_of(m.height);
        svg.line("stem", "", (xl, y_of(height_of(m.left))), (xl, y));
        svg.line("stem", "", (xr, y_of(height_of(m.right))), (xr, y));
        svg.line(
            "merge",
            &format!(r#" data-height="{}""#, m.height),
            (xl, y),
            (xr, y),
        );
        x[node] = 0.5 * (xl + xr);
    }
    svg.text("label", (WIDTH / 2.0, HEIGHT - 15.0), "middle", "cluster");
    svg.text("label", (15.0, MARGIN - 20.0), "start", "merge height");
    Ok(svg.finish())
}

/// Grid with one histogram per cluster; column `i` counts documents of the
/// `i`-th author (1-based, label order).
pub fn histograms_svg(dist: &AuthorDistribution) -> String {
    let authors: Vec<&String> = dist.totals.keys().collect();
    let n = dist.per_cluster.len().max(1);
    let cols = (n as f64).sqrt().ceil() as usize;
    let rows = n.div_ceil(cols);
    let (cell_w, cell_h) = (220.0, 160.0);
    let mut svg = Svg::new(cols as f64 * cell_w, rows as f64 * cell_h);
    let max_count = dist
        .per_cluster
        .iter()
        .flat_map(|c| c.values())
        .copied()
        .max()
        .unwrap_or(1)
        .max(1) as f64;
    for (c, counts) in dist.per_cluster.iter().enumerate() {
        let ox = (c % cols) as f64 * cell_w;
        let oy = (c / cols) as f64 * cell_h;
        let base = oy + cell_h - 25.0;
        let bar_w = (cell_w - 30.0) / authors.len().max(1) as f64;
        svg.text(
            "panel",
            (ox + cell_w / 2.0, oy + 14.0),
            "middle",
            &format!("cluster {c}"),
        );
        svg.line("axis", "", (ox + 15.0, base), (ox + cell_w - 15.0, base));
        for (a, author) in authors.iter().enumerate() {
            let count = counts.get(*author).copied().unwrap_or(0);
            let h = count as f64 / max_count * (cell_h - 50.0);
            let bx = ox + 15.0 + a as f64 * bar_w;
            let _ = writeln!(
                svg.body,
                r#"<rect class="bar" data-cluster="{c}" data-author="{}" data-count="{count}" x="{bx:.2}" y="{:.2}" width="{:.2}" height="{h:.2}" fill="steelblue"/>"#,
                a + 1,
                base - h,
                (bar_w - 1.0).max(0.5)
            );
            if authors.len() <= 30 {
                svg.text(
                    "author",
                    (bx + bar_w / 2.0, base + 12.0),
                    "middle",
                    &(a + 1).to_string(),
                );
            }
        }
    }
    svg.finish()
}

/// Leading (at most 10) singular values as a point-and-line plot.
pub fn scree_svg(sigma: &[f64]) -> String {
    let values = &sigma[..sigma.len().min(10)];
    let mut svg = Svg::new(WIDTH, HEIGHT);
    let top = values.first().copied().unwrap_or(1.0).max(f64::MIN_POSITIVE);
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let step = plot_w / values.len().max(1) as f64;
    let pos = |i: usize, s: f64| {
        (
            MARGIN + step * (i as f64 + 0.5),
            HEIGHT - MARGIN - s / top * plot_h,
        )
    };
    svg.line("axis", "", (MARGIN, MARGIN), (MARGIN, HEIGHT - MARGIN));
    svg.line(
        "axis",
        "",
        (MARGIN, HEIGHT - MARGIN),
        (WIDTH - MARGIN, HEIGHT - MARGIN),
    );
    for w in 1..values.len() {
        svg.line("trend", "", pos(w - 1, values[w - 1]), pos(w, values[w]));
    }
    for (i, &s) in values.iter().enumerate() {
        let (x, y) = pos(i, s);
        let _ = writeln!(
            svg.body,
            r#"<circle class="sigma" data-index="{}" data-value="{s}" cx="{x:.2}" cy="{y:.2}" r="4"/>"#,
            i + 1
        );
        svg.text(
            "index",
            (x, HEIGHT - MARGIN + 16.0),
            "middle",
            &(i + 1).to_string(),
        );
    }
    svg.text("tick", (MARGIN - 6.0, MARGIN + 4.0), "end", &format!("{top:.3}"));
    svg.text(
        "label",
        (WIDTH / 2.0, HEIGHT - 15.0),
        "middle",
        "singular value index",
    );
    svg.finish()
}

/// Writes `dendrogram.svg`, `histograms.svg` and, when singular values are
/// given, `scree.csv` and `scree.svg` into `out_dir`.
pub fn render_figures(
    dendrogram: &Dendrogram,
    n_clusters: usize,
    distribution: &AuthorDistribution,
    sigma: Option<&[f64]>,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut files = vec![
        ("dendrogram.svg", dendrogram_svg(dendrogram, n_clusters)?),
        ("histograms.svg", histograms_svg(distribution)),
    ];
    if let Some(sigma) = sigma {
        files.push(("scree.csv", scree_csv(sigma)));
        files.push(("scree.svg", scree_svg(sigma)));
    }
    let mut written = Vec::new();
    for (name, content) in files {
        let path = out_dir.join(name);
        fs::write(&path, content).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::{ward_cluster, ClusterParams};

    fn merge_heights(svg: &str) -> Vec<f64> {
        svg.lines()
            .filter(|l| l.contains(r#"class="merge""#))
            .map(|l| {
                let rest = &l[l.find("data-height=\"").unwrap() + 13..];
                rest[..rest.find('"').unwrap()].parse().unwrap()
            })
            .collect()
    }

    fn square() -> Dendrogram {
        let pts = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![4.0, 0.0], vec![4.0, 1.0]];
        ward_cluster(&pts, &ClusterParams::clusters(1)).unwrap()
    }

    #[test]
    fn dendrogram_bars() {
        let svg = dendrogram_svg(&square(), 4).unwrap();
        assert_eq!(merge_heights(&svg), [0.5, 0.5, 16.0]);
        assert_eq!(svg.matches(r#"class="leaf""#).count(), 4);

        let svg = dendrogram_svg(&square(), 2).unwrap();
        assert_eq!(merge_heights(&svg), [16.0]);
        assert!(svg.contains(">0</text>") && svg.contains(">1</text>"));
    }

    #[test]
    fn scree_points() {
        let svg = scree_svg(&[5.0, 2.0, 1.0]);
        assert_eq!(svg.matches(r#"class="sigma""#).count(), 3);
    }
}
