use std::collections::BTreeSet;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// Directed graph of admissible mode transitions. Vertices are `0..num_modes`
/// internally; files use 1-based indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SwitchingGraph {
    num_modes: usize,
    edges: Vec<(usize, usize)>,
    labels: Option<Vec<i64>>,
    valid: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphDiagnostic {
    pub valid: bool,
    /// Vertices from which no cycle is reachable.
    pub offending: Vec<usize>,
}

impl SwitchingGraph {
    pub fn new(num_modes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if num_modes == 0 {
            return Err(Error::InvalidGraph("graph needs at least one vertex".into()));
        }
        let set: BTreeSet<(usize, usize)> = edges.into_iter().collect();
        if let Some(&(r, rp)) = set.iter().find(|(r, rp)| *r >= num_modes || *rp >= num_modes) {
            return Err(Error::InvalidGraph(format!("edge ({r}, {rp}) outside 0..{num_modes}")));
        }
        let mut g = SwitchingGraph { num_modes, edges: set.into_iter().collect(), labels: None, valid: false };
        g.valid = g.diagnose().valid;
        Ok(g)
    }

    pub fn with_labels(mut self, labels: Vec<i64>) -> Result<Self> {
        if labels.len() != self.num_modes {
            return Err(Error::InvalidGraph("one label per vertex required".into()));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    pub fn is_valid(&self) -> bool {
        self.valid
    }

    pub fn has_edge(&self, r: usize, rp: usize) -> bool {
        self.edges.binary_search(&(r, rp)).is_ok()
    }

    pub fn successors(&self, r: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter(move |e| e.0 == r).map(|e| e.1)
    }

    fn reachable_from(&self, starts: impl IntoIterator<Item = usize>) -> Vec<bool> {
        let mut seen = vec![false; self.num_modes];
        let mut stack: Vec<usize> = starts.into_iter().collect();
        while let Some(v) = stack.pop() {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            stack.extend(self.successors(v).filter(|&w| !seen[w]));
        }
        seen
    }

    /// Vertex `v` lies on a cycle iff it is reachable from one of its successors.
    pub fn on_cycle(&self, v: usize) -> bool {
        self.reachable_from(self.successors(v))[v]
    }

    /// Every vertex must reach a vertex that lies on a cycle, so that every
    /// finite path extends to an infinite one.
    pub fn diagnose(&self) -> GraphDiagnostic {
        let cyclic: Vec<bool> = (0..self.num_modes).map(|v| self.on_cycle(v)).collect();
        let offending: Vec<usize> = (0..self.num_modes)
            .filter(|&v| !self.reachable_from([v]).iter().zip(&cyclic).any(|(r, c)| *r && *c))
            .collect();
        GraphDiagnostic { valid: offending.is_empty(), offending }
    }

    pub fn require_valid(&self) -> Result<()> {
        let d = self.diagnose();
        if d.valid {
            Ok(())
        } else {
            let one_based: Vec<usize> = d.offending.iter().map(|v| v + 1).collect();
            Err(Error::InvalidGraph(format!("no cycle reachable from vertices {one_based:?}")))
        }
    }

    /// Whether consecutive entries of `path` are edges.
    pub fn admits(&self, path: &[usize]) -> bool {
        path.iter().all(|&s| s < self.num_modes) && path.windows(2).all(|w| self.has_edge(w[0], w[1]))
    }

    /// Whether every edge of `self` is an edge of `other` (same vertex count).
    pub fn is_subgraph_of(&self, other: &SwitchingGraph) -> bool {
        self.num_modes == other.num_modes && self.edges.iter().all(|&(r, rp)| other.has_edge(r, rp))
    }
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    num_modes: usize,
    edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<i64>>,
}

impl Serialize for SwitchingGraph {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphFile {
            num_modes: self.num_modes,
            edges: self.edges.iter().map(|&(r, rp)| [r + 1, rp + 1]).collect(),
            labels: self.labels.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SwitchingGraph {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let f = GraphFile::deserialize(d)?;
        if f.edges.iter().flatten().any(|&v| v == 0) {
            return Err(D::Error::custom("graph files use 1-based vertex indices"));
        }
        let g = SwitchingGraph::new(f.num_modes, f.edges.iter().map(|e| (e[0] - 1, e[1] - 1)))
            .map_err(D::Error::custom)?;
        match f.labels {
            Some(l) => g.with_labels(l).map_err(D::Error::custom),
            None => Ok(g),
        }
    }
}

/// Vertices labeled by delay; an edge joins delays at most `max_step` apart.
pub fn bounded_rate_graph(delay_values: &[i64], max_step: i64) -> Result<SwitchingGraph> {
    if delay_values.is_empty() {
        return Err(Error::InvalidArgument("empty delay list".into()));
    }
    if max_step < 1 {
        return Err(Error::InvalidArgument("max_step must be positive".into()));
    }
    if delay_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("delay values must be strictly increasing".into()));
    }
    let n = delay_values.len();
    let edges = (0..n)
        .flat_map(|r| (0..n).map(move |rp| (r, rp)))
        .filter(|&(r, rp)| (delay_values[rp] - delay_values[r]).abs() <= max_step);
    SwitchingGraph::new(n, edges)?.with_labels(delay_values.to_vec())
}

/// Delays `0..=h_max`: each step either grows the delay by one or resets it to 0.
/// There is no self-loop at delay 0 unless `self_loop_at_zero`.
pub fn packet_drop_graph(h_max: usize, self_loop_at_zero: bool) -> Result<SwitchingGraph> {
    if h_max == 0 {
        return Err(Error::InvalidArgument("packet drop graph needs h_max >= 1".into()));
    }
    let mut edges: Vec<(usize, usize)> = (0..h_max).map(|d| (d, d + 1)).collect();
    edges.extend((1..=h_max).map(|d| (d, 0)));
    if self_loop_at_zero {
        edges.push((0, 0));
    }
    SwitchingGraph::new(h_max + 1, edges)?.with_labels((0..=h_max as i64).collect())
}

/// Ring `r → r+1 (mod N)` plus a self-loop at every vertex.
pub fn ring_graph(n: usize) -> Result<SwitchingGraph> {
    SwitchingGraph::new(n, (0..n).flat_map(|r| [(r, r), (r, (r + 1) % n)]))
}

pub fn complete_graph(n: usize) -> Result<SwitchingGraph> {
    SwitchingGraph::new(n, (0..n).flat_map(|r| (0..n).map(move |rp| (r, rp))))
}

/// A single mode with a self-loop.
pub fn single_mode_graph() -> SwitchingGraph {
    SwitchingGraph::new(1, [(0, 0)]).expect("single self-loop is valid")
}
