//! Conditional-independence graph export: edge lists, DOT files, and the
//! degree-based hub ranking.

use wglasso_core::error::{Error, Result};
use wglasso_core::linalg::SymMatrix;

/// The graph read off a precision-matrix estimate: one node per variable,
/// one undirected edge per strictly-upper-triangle nonzero.
#[derive(Debug, Clone)]
pub struct GraphExport {
    labels: Vec<String>,
    /// `(i, j, omega_ij)` with `i < j`.
    edges: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    EdgeList,
    Dot,
}

impl GraphExport {
    /// Extracts the support of `omega`. With `labels = None` the nodes are
    /// named `V1..Vp`.
    pub fn from_matrix(omega: &SymMatrix, labels: Option<Vec<String>>) -> Result<Self> {
        let p = omega.dim();
        let labels = match labels {
            Some(l) => {
                if l.len() != p {
                    return Err(Error::DimensionMismatch {
                        expected: p,
                        got: l.len(),
                    });
                }
                l
            }
            None => (1..=p).map(|i| format!("V{i}")).collect(),
        };
        let mut edges = Vec::new();
        for i in 0..p {
            for j in (i + 1)..p {
                let v = omega.get(i, j);
                if v != 0.0 {
                    edges.push((i, j, v));
                }
            }
        }
        Ok(GraphExport { labels, edges })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.labels.len()];
        for (i, j, _) in &self.edges {
            deg[*i] += 1;
            deg[*j] += 1;
        }
        deg
    }

    /// Nodes sorted by degree descending, ties broken by label ascending.
    pub fn hub_ranking(&self) -> Vec<(String, usize)> {
        let deg = self.degrees();
        let mut ranked: Vec<(String, usize)> = self
            .labels
            .iter()
            .cloned()
            .zip(deg)
            .collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked
    }

    /// CSV edge list `source,target,weight` with signed entries in
    /// round-trip float formatting.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::from("source,target,weight\n");
        for (i, j, v) in &self.edges {
            out.push_str(&format!("{},{},{}\n", self.labels[*i], self.labels[*j], v));
        }
        out
    }

    /// Undirected DOT graph; the edge weight attribute is the magnitude of
    /// the precision entry.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph precision {\n");
        for label in &self.labels {
            out.push_str(&format!("  \"{label}\";\n"));
        }
        for (i, j, v) in &self.edges {
            out.push_str(&format!(
                "  \"{}\" -- \"{}\" [weight={}];\n",
                self.labels[*i],
                self.labels[*j],
                v.abs()
            ));
        }
        out.push_str("}\n");
        out
    }

    pub fn render(&self, format: GraphFormat) -> String {
        match format {
            GraphFormat::EdgeList => self.to_edge_list(),
            GraphFormat::Dot => self.to_dot(),
        }
    }

    pub fn hub_ranking_text(&self) -> String {
        let mut out = String::from("node,degree\n");
        for (label, degree) in self.hub_ranking() {
            out.push_str(&format!("{label},{degree}\n"));
        }
        out
    }
}

/// Parses the edge list format written by [`GraphExport::to_edge_list`]
/// back into `(source, target, weight)` label triples.
pub fn parse_edge_list(text: &str) -> Result<Vec<(String, String, f64)>> {
    let mut edges = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if idx == 0 || line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::Parse {
                line: idx + 1,
                field: 1,
                message: format!("expected 3 fields, found {}", parts.len()),
            });
        }
        let w: f64 = parts[2].parse().map_err(|_| Error::Parse {
            line: idx + 1,
            field: 3,
            message: format!("not a number: {:?}", parts[2]),
        })?;
        edges.push((parts[0].to_string(), parts[1].to_string(), w));
    }
    Ok(edges)
}
