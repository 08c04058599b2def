//! Loading real networks with ground-truth communities.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::community::Clustering;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// A network restricted to its largest connected component, with node
/// names and communities carried through the id map.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub graph: Graph,
    pub communities: Clustering,
    /// Original node name of each node id.
    pub names: Vec<String>,
    /// Whether `communities` came from a file (otherwise all zero).
    pub has_communities: bool,
}

/// Orders tokens numerically when all of them are integers, else
/// lexicographically.
fn sorted_tokens(tokens: BTreeSet<&str>) -> Vec<String> {
    let mut out: Vec<&str> = tokens.into_iter().collect();
    if out.iter().all(|t| t.parse::<i64>().is_ok()) {
        out.sort_by_key(|t| t.parse::<i64>().unwrap_or_default());
    }
    out.into_iter().map(str::to_owned).collect()
}

fn body(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

fn read_lines<R: BufRead>(reader: R) -> Result<Vec<String>> {
    reader.lines().map(|l| l.map_err(Error::from)).collect()
}

impl Dataset {
    /// Parses an edge list and a `node community` file. Node and community
    /// names may be arbitrary tokens. Directed input is symmetrized. Every
    /// node must have a community and every community-file node must appear
    /// in the edge list.
    pub fn parse<R1: BufRead, R2: BufRead>(name: &str, edges: R1, communities: R2) -> Result<Self> {
        Self::parse_impl(name, edges, Some(communities))
    }

    /// Parses an edge list alone; every node gets community 0.
    pub fn parse_edges<R: BufRead>(name: &str, edges: R) -> Result<Self> {
        Self::parse_impl(name, edges, None::<&[u8]>)
    }

    fn parse_impl<R1: BufRead, R2: BufRead>(
        name: &str,
        edges: R1,
        communities: Option<R2>,
    ) -> Result<Self> {
        let edge_lines = read_lines(edges)?;
        let comm_lines = match communities {
            Some(r) => Some(read_lines(r)?),
            None => None,
        };

        let mut pairs_raw = Vec::new();
        // A `# nodes N` header (as written for sampled graphs) declares ids
        // 0..N, isolated ones included.
        let mut declared = Vec::new();
        for (no, line) in edge_lines.iter().enumerate() {
            if let Some(n) = line
                .trim()
                .strip_prefix("# nodes ")
                .and_then(|r| r.split_whitespace().next())
                .and_then(|t| t.parse::<usize>().ok())
            {
                declared = (0..n).map(|i| i.to_string()).collect();
            }
            let b = body(line);
            if b.is_empty() {
                continue;
            }
            let mut f = b.split_whitespace();
            match (f.next(), f.next()) {
                (Some(u), Some(v)) => pairs_raw.push((u, v)),
                _ => {
                    return Err(Error::Format(format!(
                        "edge line {}: expected `u v`",
                        no + 1
                    )))
                }
            }
        }
        let names = sorted_tokens(
            pairs_raw
                .iter()
                .flat_map(|&(u, v)| [u, v])
                .chain(declared.iter().map(String::as_str))
                .collect(),
        );
        let id: HashMap<&str, usize> = names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let pairs: Vec<_> = pairs_raw.iter().map(|(u, v)| (id[u], id[v])).collect();
        let graph = Graph::from_edge_list(&pairs, names.len())?;

        let has_communities = comm_lines.is_some();
        let comm_lines = comm_lines.unwrap_or_default();
        let mut raw_comm: Vec<Option<&str>> =
            vec![if has_communities { None } else { Some("0") }; names.len()];
        for (no, line) in comm_lines.iter().enumerate() {
            let b = body(line);
            if b.is_empty() {
                continue;
            }
            let mut f = b.split_whitespace();
            let (Some(node), Some(c)) = (f.next(), f.next()) else {
                return Err(Error::Format(format!(
                    "community line {}: expected `node community`",
                    no + 1
                )));
            };
            let &i = id.get(node).ok_or_else(|| {
                Error::Format(format!(
                    "community file node `{node}` is not in the edge list"
                ))
            })?;
            raw_comm[i] = Some(c);
        }
        if let Some(i) = raw_comm.iter().position(Option::is_none) {
            return Err(Error::Format(format!(
                "node `{}` has no community",
                names[i]
            )));
        }
        let raw_comm: Vec<&str> = raw_comm.into_iter().flatten().collect();
        let comm_names = sorted_tokens(raw_comm.iter().copied().collect());
        let cid: HashMap<&str, usize> = comm_names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let comm: Vec<usize> = raw_comm.iter().map(|c| cid[c]).collect();

        let (lcc, map) = graph.largest_connected_component();
        Ok(Self {
            name: name.to_string(),
            graph: lcc,
            communities: Clustering::new(&map.restrict(&comm)),
            names: map.restrict(&names),
            has_communities,
        })
    }

    /// Loads the edge list at `edges` and the community file at
    /// `communities`; the dataset is named after the edge file's stem.
    pub fn load(edges: &Path, communities: &Path) -> Result<Self> {
        let name = edges
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("dataset")
            .to_string();
        Self::parse(
            &name,
            BufReader::new(File::open(edges)?),
            BufReader::new(File::open(communities)?),
        )
    }

    /// Loads an edge list without communities.
    pub fn load_edges(edges: &Path) -> Result<Self> {
        let name = edges
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("graph");
        Self::parse_edges(name, BufReader::new(File::open(edges)?))
    }

    /// Loads `<dir>/edges.txt` and `<dir>/communities.txt`, named after `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let mut ds = Self::load(&dir.join("edges.txt"), &dir.join("communities.txt"))?;
        if let Some(name) = dir.file_name().and_then(|s| s.to_str()) {
            ds.name = name.to_string();
        }
        Ok(ds)
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// Communities forming the benign region: the first half (rounded up)
    /// in sorted id order, or a random half when `split_seed` is given.
    pub fn benign_communities(&self, split_seed: Option<u64>) -> Vec<usize> {
        let mut ids: Vec<usize> = (0..self.communities.k()).collect();
        if let Some(seed) = split_seed {
            ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        }
        let mut benign = ids[..self.communities.k().div_ceil(2)].to_vec();
        benign.sort_unstable();
        benign
    }
}

/// `true` for nodes outside the benign communities.
pub fn sybil_truth(communities: &[usize], benign: &[usize]) -> Vec<bool> {
    communities.iter().map(|c| !benign.contains(c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const EDGES: &str = "# toy\na b\nb c\nc a\nc d\nx y\n";
    const COMMS: &str = "a 1\nb 1\nc 2\nd 2\nx 1\ny 2\n";

    #[test]
    fn parses_names_and_restricts_to_lcc() {
        let ds = Dataset::parse("toy", EDGES.as_bytes(), COMMS.as_bytes()).unwrap();
        assert_eq!(ds.n(), 4);
        assert_eq!(ds.graph.num_edges(), 4);
        assert_eq!(ds.names, ["a", "b", "c", "d"]);
        assert_eq!(ds.communities.assignment(), &[0, 0, 1, 1]);
        assert_eq!(ds.benign_communities(None), vec![0]);
    }

    #[test]
    fn rejects_unknown_and_missing_nodes() {
        let extra = format!("{COMMS}zz 1\n");
        assert!(matches!(
            Dataset::parse("toy", EDGES.as_bytes(), extra.as_bytes()),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            Dataset::parse("toy", EDGES.as_bytes(), "a 1\n".as_bytes()),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn numeric_names_sort_numerically() {
        let ds =
            Dataset::parse("n", "10 2\n2 1\n".as_bytes(), "1 0\n2 0\n10 1\n".as_bytes()).unwrap();
        assert_eq!(ds.names, ["1", "2", "10"]);
        assert_eq!(
            sybil_truth(ds.communities.assignment(), &[0]),
            [false, false, true]
        );
    }

    #[test]
    fn header_declares_isolated_nodes() {
        let ds = Dataset::parse(
            "g",
            "# nodes 4 edges 1\n0 1\n".as_bytes(),
            "0 0\n1 1\n3 0\n2 1\n".as_bytes(),
        )
        .unwrap();
        assert_eq!(ds.n(), 2);
        let bare = Dataset::parse_edges("g", "a b\n".as_bytes()).unwrap();
        assert!(!bare.has_communities);
        assert_eq!(bare.communities.k(), 1);
    }
}
