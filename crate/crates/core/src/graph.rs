//! Undirected simple graphs in compressed sparse row form, degree
//! bookkeeping, label sets and the label-augmented graph.

use std::collections::{BTreeSet, VecDeque};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// An unweighted undirected graph without self-loops or multi-edges.
///
/// Nodes are dense ids in `0..n`. Neighbor lists are sorted, and every
/// undirected edge `(u, v)` with `u < v` appears once in [`Graph::edges`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
}

impl Graph {
    /// Builds a graph from arbitrary pairs: self-loops are dropped,
    /// duplicates and reversed duplicates collapse to one edge.
    pub fn from_edge_list(pairs: &[(usize, usize)], n: usize) -> Result<Self> {
        let mut edges = Vec::with_capacity(pairs.len());
        for &(u, v) in pairs {
            if u >= n || v >= n {
                return Err(Error::MalformedInput(format!(
                    "edge ({u}, {v}) has an endpoint outside 0..{n}"
                )));
            }
            if u != v {
                edges.push((u.min(v), u.max(v)));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(Self::from_sorted_edges(n, edges))
    }

    fn from_sorted_edges(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut degree = vec![0usize; n];
        for &(u, v) in &edges {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut cursor = offsets[..n].to_vec();
        let mut neighbors = vec![0usize; offsets[n]];
        for &(u, v) in &edges {
            neighbors[cursor[u]] = v;
            cursor[u] += 1;
            neighbors[cursor[v]] = u;
            cursor[v] += 1;
        }
        for i in 0..n {
            neighbors[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        Self {
            n,
            edges,
            offsets,
            neighbors,
        }
    }

    /// A graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Self {
        Self::from_sorted_edges(n, Vec::new())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Undirected edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Position of node `i`'s neighbor list inside the flat CSR array.
    pub fn neighbor_range(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && self.neighbors(i).binary_search(&j).is_ok()
    }

    pub fn degrees(&self) -> DegreeVector {
        DegreeVector::new((0..self.n).map(|i| self.degree(i)).collect())
    }

    /// Index of the undirected edge `{i, j}` in [`Graph::edges`].
    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        let key = (i.min(j), i.max(j));
        self.edges.binary_search(&key).ok()
    }

    /// Multiplies the adjacency matrix by `x`.
    pub fn adjacency_apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.neighbors(i).iter().map(|&j| x[j]).sum())
            .collect()
    }

    /// Relabels nodes: node `i` becomes `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: perm.len(),
            });
        }
        let pairs: Vec<_> = self
            .edges
            .iter()
            .map(|&(u, v)| (perm[u], perm[v]))
            .collect();
        Self::from_edge_list(&pairs, self.n)
    }

    /// Connected components as a per-node component id, ids in order of
    /// first appearance.
    pub fn components(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for start in 0..self.n {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = next;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &v in self.neighbors(u) {
                    if comp[v] == usize::MAX {
                        comp[v] = next;
                        queue.push_back(v);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || self.components().iter().all(|&c| c == 0)
    }

    /// Induced subgraph on `keep` (old ids, in the order given). Returns the
    /// subgraph and the old→new id map.
    pub fn induced_subgraph(&self, keep: &[usize]) -> (Self, NodeMap) {
        let mut old_to_new = vec![None; self.n];
        for (new, &old) in keep.iter().enumerate() {
            old_to_new[old] = Some(new);
        }
        let mut edges: Vec<_> = self
            .edges
            .iter()
            .filter_map(|&(u, v)| match (old_to_new[u], old_to_new[v]) {
                (Some(a), Some(b)) => Some((a.min(b), a.max(b))),
                _ => None,
            })
            .collect();
        edges.sort_unstable();
        let map = NodeMap {
            old_to_new,
            new_to_old: keep.to_vec(),
        };
        (Self::from_sorted_edges(keep.len(), edges), map)
    }

    /// Restricts the graph to its largest connected component. Ties go to
    /// the component containing the smallest node id. Node order is
    /// preserved.
    pub fn largest_connected_component(&self) -> (Self, NodeMap) {
        if self.n == 0 {
            return (Self::empty(0), NodeMap::identity(0));
        }
        let comp = self.components();
        let count = comp.iter().max().map_or(0, |&c| c + 1);
        let mut sizes = vec![0usize; count];
        for &c in &comp {
            sizes[c] += 1;
        }
        let best = (0..count).fold(0, |best, c| if sizes[c] > sizes[best] { c } else { best });
        let keep: Vec<_> = (0..self.n).filter(|&i| comp[i] == best).collect();
        self.induced_subgraph(&keep)
    }

    /// Reads the whitespace-separated `u v` edge-list format. `#` starts a
    /// comment. Node count is `n` if given, else the `# nodes N` header
    /// written by [`Graph::write_edge_list`], else one more than the largest
    /// id.
    pub fn read_edge_list<R: BufRead>(reader: R, n: Option<usize>) -> Result<Self> {
        let mut pairs = Vec::new();
        let mut header_n = None;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if let Some(rest) = line.trim().strip_prefix("# nodes ") {
                header_n = rest.split_whitespace().next().and_then(|t| t.parse().ok());
            }
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let mut fields = body.split_whitespace();
            let parse = |tok: Option<&str>| -> Result<usize> {
                tok.ok_or_else(|| Error::Format(format!("line {}: expected `u v`", lineno + 1)))?
                    .parse()
                    .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 1)))
            };
            let u = parse(fields.next())?;
            let v = parse(fields.next())?;
            pairs.push((u, v));
        }
        let inferred = pairs.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
        Self::from_edge_list(&pairs, n.or(header_n).unwrap_or(inferred))
    }

    pub fn write_edge_list<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "# nodes {} edges {}", self.n, self.edges.len())?;
        for &(u, v) in &self.edges {
            writeln!(writer, "{u} {v}")?;
        }
        Ok(())
    }
}

/// Old↔new node id correspondence produced by subgraph extraction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeMap {
    pub old_to_new: Vec<Option<usize>>,
    pub new_to_old: Vec<usize>,
}

impl NodeMap {
    pub fn identity(n: usize) -> Self {
        Self {
            old_to_new: (0..n).map(Some).collect(),
            new_to_old: (0..n).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.new_to_old.len() == self.old_to_new.len()
            && self.new_to_old.iter().enumerate().all(|(i, &o)| i == o)
    }

    /// Carries per-node values from the old graph onto the new one.
    pub fn restrict<T: Clone>(&self, values: &[T]) -> Vec<T> {
        self.new_to_old.iter().map(|&o| values[o].clone()).collect()
    }
}

/// Per-node degrees with the summary statistics used across the crate.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeVector {
    pub d: Vec<usize>,
    pub d_ave: f64,
    pub d_max: usize,
    pub d_min: usize,
}

impl DegreeVector {
    pub fn new(d: Vec<usize>) -> Self {
        let d_max = d.iter().copied().max().unwrap_or(0);
        let d_min = d.iter().copied().min().unwrap_or(0);
        let d_ave = if d.is_empty() {
            0.0
        } else {
            d.iter().sum::<usize>() as f64 / d.len() as f64
        };
        Self {
            d,
            d_ave,
            d_max,
            d_min,
        }
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.d.iter().map(|&x| x as f64).collect()
    }
}

/// Disjoint sets of labeled Sybil and labeled benign nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSet {
    sybil: BTreeSet<usize>,
    benign: BTreeSet<usize>,
}

impl LabelSet {
    pub fn new(
        n: usize,
        sybil: impl IntoIterator<Item = usize>,
        benign: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let sybil: BTreeSet<_> = sybil.into_iter().collect();
        let benign: BTreeSet<_> = benign.into_iter().collect();
        if let Some(&bad) = sybil.iter().chain(benign.iter()).find(|&&i| i >= n) {
            return Err(Error::MalformedInput(format!(
                "label on node {bad} outside 0..{n}"
            )));
        }
        if let Some(&both) = sybil.intersection(&benign).next() {
            return Err(Error::MalformedInput(format!(
                "node {both} is labeled both Sybil and benign"
            )));
        }
        Ok(Self { sybil, benign })
    }

    pub fn empty() -> Self {
        Self {
            sybil: BTreeSet::new(),
            benign: BTreeSet::new(),
        }
    }

    pub fn sybil(&self) -> &BTreeSet<usize> {
        &self.sybil
    }

    pub fn benign(&self) -> &BTreeSet<usize> {
        &self.benign
    }

    pub fn is_labeled(&self, i: usize) -> bool {
        self.sybil.contains(&i) || self.benign.contains(&i)
    }

    pub fn len(&self) -> usize {
        self.sybil.len() + self.benign.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Exchanges the roles of the two sets.
    pub fn swapped(&self) -> Self {
        Self {
            sybil: self.benign.clone(),
            benign: self.sybil.clone(),
        }
    }

    /// Applies a node relabeling `i → perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        Self {
            sybil: self.sybil.iter().map(|&i| perm[i]).collect(),
            benign: self.benign.iter().map(|&i| perm[i]).collect(),
        }
    }

    /// Signed prior: `+value` on Sybil labels, `-value` on benign ones.
    pub fn signed_prior(&self, n: usize, value: f64) -> Vec<f64> {
        let mut q = vec![0.0; n];
        for &i in &self.sybil {
            q[i] = value;
        }
        for &i in &self.benign {
            q[i] = -value;
        }
        q
    }
}

/// The graph with a Sybil label node and a benign label node appended.
#[derive(Debug, Clone)]
pub struct AugmentedGraph {
    pub graph: Graph,
    pub sybil_label_node: usize,
    pub benign_label_node: usize,
}

/// Appends `l_s` (id `n`) adjacent to every labeled Sybil node and `l_b`
/// (id `n + 1`) adjacent to every labeled benign node.
pub fn augment_graph(g: &Graph, labels: &LabelSet) -> Result<AugmentedGraph> {
    let n = g.n();
    if let Some(&bad) = labels
        .sybil()
        .iter()
        .chain(labels.benign())
        .find(|&&i| i >= n)
    {
        return Err(Error::MalformedInput(format!(
            "label on node {bad} outside 0..{n}"
        )));
    }
    let (ls, lb) = (n, n + 1);
    let mut pairs = g.edges().to_vec();
    pairs.extend(labels.sybil().iter().map(|&i| (i, ls)));
    pairs.extend(labels.benign().iter().map(|&i| (i, lb)));
    Ok(AugmentedGraph {
        graph: Graph::from_edge_list(&pairs, n + 2)?,
        sybil_label_node: ls,
        benign_label_node: lb,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_degrees() {
        let g = Graph::from_edge_list(&[(0, 1), (1, 2)], 3).unwrap();
        assert_eq!(g.degrees().d, vec![1, 2, 1]);
        assert_eq!(g.num_edges(), 2);
    }

    #[test]
    fn drops_self_loops_and_duplicates() {
        let g = Graph::from_edge_list(&[(0, 1), (1, 0), (2, 2)], 3).unwrap();
        assert_eq!(g.edges(), &[(0, 1)]);
        assert_eq!(g.degrees().d, vec![1, 1, 0]);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(matches!(
            Graph::from_edge_list(&[(0, 3)], 3),
            Err(Error::MalformedInput(_))
        ));
    }

    #[test]
    fn largest_component_of_connected_graph_is_identity() {
        let g = Graph::from_edge_list(&[(0, 1), (1, 2), (2, 3)], 4).unwrap();
        let (h, map) = g.largest_connected_component();
        assert_eq!(h, g);
        assert!(map.is_identity());
    }

    #[test]
    fn largest_component_picks_bigger_piece() {
        // 5-cycle on {0..4}, triangle on {5,6,7}
        let g = Graph::from_edge_list(
            &[
                (0, 1),
                (1, 2),
                (2, 3),
                (3, 4),
                (4, 0),
                (5, 6),
                (6, 7),
                (7, 5),
            ],
            8,
        )
        .unwrap();
        let (h, map) = g.largest_connected_component();
        assert_eq!(h.n(), 5);
        assert!(h.is_connected());
        assert_eq!(map.new_to_old, vec![0, 1, 2, 3, 4]);
        assert!(map.old_to_new[5..].iter().all(Option::is_none));
    }

    #[test]
    fn empty_graph_component() {
        let (h, map) = Graph::empty(0).largest_connected_component();
        assert_eq!(h.n(), 0);
        assert!(map.new_to_old.is_empty());
    }

    #[test]
    fn augment_empty_labels() {
        let g = Graph::from_edge_list(&[(0, 1)], 2).unwrap();
        let aug = augment_graph(&g, &LabelSet::empty()).unwrap();
        assert_eq!(aug.graph.n(), 4);
        assert_eq!(aug.graph.degree(2), 0);
        assert_eq!(aug.graph.degree(3), 0);
    }

    #[test]
    fn augment_path() {
        let g = Graph::from_edge_list(&[(0, 1)], 2).unwrap();
        let labels = LabelSet::new(2, [0], [1]).unwrap();
        let aug = augment_graph(&g, &labels).unwrap();
        assert_eq!(aug.graph.degrees().d, vec![2, 2, 1, 1]);
        assert!(aug.graph.has_edge(0, aug.sybil_label_node));
        assert!(aug.graph.has_edge(1, aug.benign_label_node));
    }

    #[test]
    fn label_sets_must_be_disjoint() {
        assert!(LabelSet::new(3, [0, 1], [1]).is_err());
        assert!(LabelSet::new(3, [5], []).is_err());
    }

    #[test]
    fn edge_list_roundtrip() {
        let g = Graph::from_edge_list(&[(0, 1), (1, 2), (3, 1)], 5).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let h = Graph::read_edge_list(text.as_bytes(), Some(5)).unwrap();
        assert_eq!(g, h);
    }

    #[test]
    fn edge_list_comments_and_errors() {
        let text = "# header\n0 1 # trailing\n\n1 2\n";
        let g = Graph::read_edge_list(text.as_bytes(), None).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.num_edges(), 2);
        assert!(Graph::read_edge_list("0 x\n".as_bytes(), None).is_err());
        assert!(Graph::read_edge_list("0\n".as_bytes(), None).is_err());
    }
}
