//! Ward agglomerative clustering of algorithms and dendrogram export.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::SimilarityMatrix;
use crate::error::{Error, Result};

/// `1 - similarity`, symmetric with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct Dissimilarity {
    ids: Vec<String>,
    entries: Vec<Vec<f64>>,
}

impl Dissimilarity {
    pub fn new(ids: Vec<String>, entries: Vec<Vec<f64>>) -> Result<Self> {
        let n = ids.len();
        if entries.len() != n || entries.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMatrix(format!("expected a {n}x{n} dissimilarity")));
        }
        for i in 0..n {
            if entries[i][i] != 0.0 {
                return Err(Error::InvalidMatrix(format!("diagonal entry for '{}' is not 0", ids[i])));
            }
            for j in 0..n {
                let v = entries[i][j];
                if !(0.0..=1.0).contains(&v) || v != entries[j][i] {
                    return Err(Error::InvalidMatrix(format!(
                        "entry ({}, {}) = {v} is outside [0, 1] or asymmetric",
                        ids[i], ids[j]
                    )));
                }
            }
        }
        Ok(Self { ids, entries })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i][j]
    }
}

pub fn to_dissimilarity(m: &SimilarityMatrix) -> Result<Dissimilarity> {
    let entries = m
        .entries()
        .iter()
        .map(|row| row.iter().map(|s| 1.0 - s).collect())
        .collect();
    Dissimilarity::new(m.ids().to_vec(), entries)
}

/// Joins nodes `a < b` into `node` at `height`. Leaves are `0..n`, merge `k`
/// creates node `n + k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub node: usize,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub leaves: Vec<String>,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn root(&self) -> usize {
        self.merges.last().map_or(0, |m| m.node)
    }

    fn height(&self, node: usize) -> f64 {
        if node < self.leaves.len() {
            0.0
        } else {
            self.merges[node - self.leaves.len()].height
        }
    }

    fn children(&self, node: usize) -> Option<(usize, usize)> {
        (node >= self.leaves.len()).then(|| {
            let m = &self.merges[node - self.leaves.len()];
            (m.a, m.b)
        })
    }

    /// Leaf ids under `node`, in drawing order.
    pub fn leaves_under(&self, node: usize) -> Vec<usize> {
        match self.children(node) {
            None => vec![node],
            Some((a, b)) => {
                let mut out = self.leaves_under(a);
                out.extend(self.leaves_under(b));
                out
            }
        }
    }

    /// Checks merge count, node consumption and height monotonicity.
    pub fn validate(&self) -> Result<()> {
        let n = self.leaves.len();
        if n < 2 || self.merges.len() != n - 1 {
            return Err(Error::InvalidMatrix(format!(
                "dendrogram over {n} leaves must have {} merges, has {}",
                n.saturating_sub(1),
                self.merges.len()
            )));
        }
        let mut used = vec![false; 2 * n - 1];
        let mut last = f64::NEG_INFINITY;
        for (k, m) in self.merges.iter().enumerate() {
            if m.node != n + k || m.a >= m.node || m.b >= m.node || m.a == m.b {
                return Err(Error::InvalidMatrix(format!("merge {k} has inconsistent node ids")));
            }
            for c in [m.a, m.b] {
                if std::mem::replace(&mut used[c], true) {
                    return Err(Error::InvalidMatrix(format!("node {c} merged twice")));
                }
            }
            if m.height < last {
                return Err(Error::InvalidMatrix(format!("merge {k} height decreases")));
            }
            last = m.height;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dg: Self = serde_json::from_str(text)?;
        dg.validate()?;
        Ok(dg)
    }

    pub fn to_newick(&self) -> String {
        let mut out = String::new();
        self.write_newick(self.root(), None, &mut out);
        out.push(';');
        out
    }

    fn write_newick(&self, node: usize, parent_height: Option<f64>, out: &mut String) {
        match self.children(node) {
            None => out.push_str(&newick_label(&self.leaves[node])),
            Some((a, b)) => {
                let h = self.height(node);
                out.push('(');
                self.write_newick(a, Some(h), out);
                out.push(',');
                self.write_newick(b, Some(h), out);
                out.push(')');
            }
        }
        if let Some(ph) = parent_height {
            let _ = write!(out, ":{}", ph - self.height(node));
        }
    }

    /// Static rendering: leaves along the bottom, merge height upwards.
    pub fn to_svg(&self) -> String {
        const WIDTH: f64 = 640.0;
        const PLOT_TOP: f64 = 20.0;
        const PLOT_BOTTOM: f64 = 300.0;
        const MARGIN: f64 = 40.0;
        let order = self.leaves_under(self.root());
        let step = (WIDTH - 2.0 * MARGIN) / order.len().max(2).saturating_sub(1) as f64;
        let top = self.merges.last().map_or(0.0, |m| m.height).max(f64::MIN_POSITIVE);
        let y_of = |h: f64| PLOT_BOTTOM - (PLOT_BOTTOM - PLOT_TOP) * h / top;

        let mut x = vec![0.0; self.leaves.len() + self.merges.len()];
        for (pos, &leaf) in order.iter().enumerate() {
            x[leaf] = MARGIN + step * pos as f64;
        }
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="420" viewBox="0 0 {WIDTH} 420">"#
        );
        let _ = writeln!(svg, r#"<g stroke="black" stroke-width="1.5" fill="none">"#);
        for m in &self.merges {
            x[m.node] = (x[m.a] + x[m.b]) / 2.0;
            let (ya, yb, ym) = (y_of(self.height(m.a)), y_of(self.height(m.b)), y_of(m.height));
            let _ = writeln!(
                svg,
                r#"<path d="M {:.2} {:.2} V {:.2} H {:.2} V {:.2}"/>"#,
                x[m.a], ya, ym, x[m.b], yb
            );
        }
        let _ = writeln!(svg, "</g>");
        let _ = writeln!(svg, r#"<g font-family="sans-serif" font-size="12">"#);
        for &leaf in &order {
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" transform="rotate(60 {:.2} {:.2})">{}</text>"#,
                x[leaf],
                PLOT_BOTTOM + 12.0,
                x[leaf],
                PLOT_BOTTOM + 12.0,
                xml_escape(&self.leaves[leaf])
            );
        }
        let _ = writeln!(svg, "</g>");
        svg.push_str("</svg>\n");
        svg
    }

    pub fn export(&self, format: ExportFormat) -> Result<String> {
        Ok(match format {
            ExportFormat::Newick => self.to_newick() + "\n",
            ExportFormat::Json => self.to_json()? + "\n",
            ExportFormat::Svg => self.to_svg(),
        })
    }
}

fn newick_label(label: &str) -> String {
    if label.chars().any(|c| c.is_whitespace() || "()[]':;,".contains(c)) {
        format!("'{}'", label.replace('\'', "''"))
    } else {
        label.to_owned()
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Newick,
    Json,
    Svg,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "newick" => Ok(ExportFormat::Newick),
            "json" => Ok(ExportFormat::Json),
            "svg" => Ok(ExportFormat::Svg),
            other => Err(Error::UnknownFormat(other.to_owned())),
        }
    }
}

pub fn export_dendrogram(dg: &Dendrogram, format: &str) -> Result<String> {
    dg.export(format.parse()?)
}

/// Ward linkage on a precomputed dissimilarity via the Lance-Williams update
/// `d(ij,k)^2 = [(n_i+n_k) d(i,k)^2 + (n_j+n_k) d(j,k)^2 - n_k d(i,j)^2] / (n_i+n_j+n_k)`.
/// The closest pair merges first; ties go to the lexicographically smallest
/// `(a, b)` node pair.
pub fn ward_cluster(d: &Dissimilarity) -> Result<Dendrogram> {
    let n = d.ids.len();
    if n < 2 {
        return Err(Error::InvalidMatrix(format!("clustering needs at least 2 leaves, got {n}")));
    }
    let total = 2 * n - 1;
    // Squared distances between nodes; only rows of active nodes are used.
    let mut dist2 = vec![vec![0.0; total]; total];
    for i in 0..n {
        for j in 0..n {
            dist2[i][j] = d.get(i, j) * d.get(i, j);
        }
    }
    let mut size = vec![1usize; total];
    let mut active: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n - 1);

    for step in 0..n - 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for (x, &a) in active.iter().enumerate() {
            for &b in &active[x + 1..] {
                let v = dist2[a][b];
                if best.is_none_or(|(bv, _, _)| v < bv) {
                    best = Some((v, a, b));
                }
            }
        }
        let (v, a, b) = best.expect("at least two active nodes");
        let node = n + step;
        size[node] = size[a] + size[b];
        for &k in active.iter().filter(|&&k| k != a && k != b) {
            let (na, nb, nk) = (size[a] as f64, size[b] as f64, size[k] as f64);
            let updated = ((na + nk) * dist2[a][k] + (nb + nk) * dist2[b][k] - nk * v) / (na + nb + nk);
            let updated = updated.max(0.0);
            dist2[node][k] = updated;
            dist2[k][node] = updated;
        }
        active.retain(|&k| k != a && k != b);
        active.push(node);
        merges.push(Merge {
            a,
            b,
            height: v.sqrt(),
            node,
            size: size[node],
        });
    }
    let dg = Dendrogram {
        leaves: d.ids.clone(),
        merges,
    };
    dg.validate()?;
    Ok(dg)
}
