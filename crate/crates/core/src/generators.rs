//! Stochastic block model and degree-corrected block model samplers,
//! detectability thresholds and label sampling.

use std::io::Write;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, LabelSet, NodeMap};

/// Distribution of the DCSBM degree propensities `θ_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaSpec {
    /// `θ_i = 1` for every node (plain SBM).
    Constant,
    /// `θ_i ∝ U(lo, hi)³`, rescaled so the sample mean is 1.
    CubedUniform { lo: f64, hi: f64 },
}

/// Parameters of a block model with `k` communities, within-community
/// connectivity `c_in` and between-community connectivity `c_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockModelParams {
    pub n: usize,
    pub k: usize,
    pub c_in: f64,
    pub c_out: f64,
    /// Community sizes; `None` is an even split.
    pub sizes: Option<Vec<usize>>,
    pub theta: ThetaSpec,
}

impl BlockModelParams {
    /// Symmetric two-block SBM from average degree and `c_out`:
    /// `c_in = 2 d_ave - c_out`.
    pub fn from_degree_and_c_out(n: usize, d_ave: f64, c_out: f64) -> Self {
        Self {
            n,
            k: 2,
            c_in: 2.0 * d_ave - c_out,
            c_out,
            sizes: None,
            theta: ThetaSpec::Constant,
        }
    }

    /// Symmetric two-block SBM from average degree and community strength
    /// `(c_in - c_out)/2`.
    pub fn from_degree_and_strength(n: usize, d_ave: f64, strength: f64) -> Self {
        Self {
            n,
            k: 2,
            c_in: d_ave + strength,
            c_out: d_ave - strength,
            sizes: None,
            theta: ThetaSpec::Constant,
        }
    }

    pub fn with_theta(mut self, theta: ThetaSpec) -> Self {
        self.theta = theta;
        self
    }

    /// `(c_in - c_out)/2`.
    pub fn strength(&self) -> f64 {
        (self.c_in - self.c_out) / 2.0
    }

    fn community_sizes(&self) -> Result<Vec<usize>> {
        if self.k == 0 {
            return Err(Error::Parameter("k must be at least 1".into()));
        }
        let sizes = match &self.sizes {
            Some(s) => s.clone(),
            None => (0..self.k)
                .map(|a| self.n / self.k + usize::from(a < self.n % self.k))
                .collect(),
        };
        if sizes.len() != self.k || sizes.iter().sum::<usize>() != self.n {
            return Err(Error::Parameter(format!(
                "community sizes {sizes:?} do not split {} nodes into {} blocks",
                self.n, self.k
            )));
        }
        Ok(sizes)
    }

    fn validate(&self) -> Result<()> {
        if !(self.c_in >= 0.0 && self.c_out >= 0.0) {
            return Err(Error::Parameter(format!(
                "connectivities must be non-negative, got c_in={} c_out={}",
                self.c_in, self.c_out
            )));
        }
        let n = self.n as f64;
        if self.c_in / n > 1.0 || self.c_out / n > 1.0 {
            return Err(Error::Parameter(format!(
                "edge probability exceeds 1 (c_in/n={}, c_out/n={})",
                self.c_in / n,
                self.c_out / n
            )));
        }
        Ok(())
    }
}

/// A sampled graph with its planted partition and propensities.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedGraph {
    pub graph: Graph,
    pub communities: Vec<usize>,
    pub theta: Vec<f64>,
    pub k: usize,
}

impl PlantedGraph {
    /// Empirical second moment `Φ = mean(θ²)`.
    pub fn phi(&self) -> f64 {
        if self.theta.is_empty() {
            return 1.0;
        }
        self.theta.iter().map(|t| t * t).sum::<f64>() / self.theta.len() as f64
    }

    /// Restriction to the largest connected component.
    pub fn largest_connected_component(&self) -> (PlantedGraph, NodeMap) {
        let (graph, map) = self.graph.largest_connected_component();
        let planted = PlantedGraph {
            graph,
            communities: map.restrict(&self.communities),
            theta: map.restrict(&self.theta),
            k: self.k,
        };
        (planted, map)
    }

    /// Writes `node community_id` rows, with a trailing `theta` column when
    /// `with_theta` is set.
    pub fn write_communities<W: Write>(&self, mut writer: W, with_theta: bool) -> Result<()> {
        for (i, c) in self.communities.iter().enumerate() {
            if with_theta {
                writeln!(writer, "{i} {c} {:.17e}", self.theta[i])?;
            } else {
                writeln!(writer, "{i} {c}")?;
            }
        }
        Ok(())
    }
}

fn planted_labels(sizes: &[usize]) -> Vec<usize> {
    sizes
        .iter()
        .enumerate()
        .flat_map(|(a, &s)| std::iter::repeat(a).take(s))
        .collect()
}

fn sample_edges(
    communities: &[usize],
    theta: &[f64],
    params: &BlockModelParams,
    rng: &mut ChaCha8Rng,
) -> Result<Graph> {
    let n = params.n;
    let nf = n as f64;
    let mut clamped = 0usize;
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let c = if communities[i] == communities[j] {
                params.c_in
            } else {
                params.c_out
            };
            let mut p = theta[i] * theta[j] * c / nf;
            if p > 1.0 {
                clamped += 1;
                p = 1.0;
            }
            if rng.gen::<f64>() < p {
                pairs.push((i, j));
            }
        }
    }
    if clamped > 0 {
        log::warn!("{clamped} node pairs had edge probability above 1 and were clamped");
    }
    Graph::from_edge_list(&pairs, n)
}

/// Samples a stochastic block model: each pair is an edge independently
/// with probability `C_{l(i) l(j)} / n`. `params.theta` is ignored.
pub fn sample_sbm(params: &BlockModelParams, seed: u64) -> Result<PlantedGraph> {
    params.validate()?;
    let sizes = params.community_sizes()?;
    let communities = planted_labels(&sizes);
    let theta = vec![1.0; params.n];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graph = sample_edges(&communities, &theta, params, &mut rng)?;
    Ok(PlantedGraph {
        graph,
        communities,
        theta,
        k: params.k,
    })
}

/// Samples a degree-corrected block model: pair probability
/// `θ_i θ_j C_{l(i) l(j)} / n`, clamped to 1.
pub fn sample_dcsbm(params: &BlockModelParams, seed: u64) -> Result<PlantedGraph> {
    params.validate()?;
    let sizes = params.community_sizes()?;
    let communities = planted_labels(&sizes);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta = match params.theta {
        ThetaSpec::Constant => vec![1.0; params.n],
        ThetaSpec::CubedUniform { lo, hi } => {
            if !(lo < hi && lo >= 0.0) {
                return Err(Error::Parameter(format!(
                    "invalid theta range [{lo}, {hi}]"
                )));
            }
            let raw: Vec<f64> = (0..params.n)
                .map(|_| rng.gen_range(lo..hi).powi(3))
                .collect();
            let mean = raw.iter().sum::<f64>() / raw.len().max(1) as f64;
            raw.into_iter().map(|t| t / mean).collect()
        }
    };
    let graph = sample_edges(&communities, &theta, params, &mut rng)?;
    Ok(PlantedGraph {
        graph,
        communities,
        theta,
        k: params.k,
    })
}

/// Samples an SBM or DCSBM depending on `params.theta`.
pub fn sample_block_model(params: &BlockModelParams, seed: u64) -> Result<PlantedGraph> {
    match params.theta {
        ThetaSpec::Constant => sample_sbm(params, seed),
        ThetaSpec::CubedUniform { .. } => sample_dcsbm(params, seed),
    }
}

/// `(c_in - c_out)/2 - sqrt((c_in + c_out)/(2Φ))`; positive iff the two
/// communities are detectable.
pub fn detectability_margin(c_in: f64, c_out: f64, phi: f64) -> f64 {
    (c_in - c_out) / 2.0 - ((c_in + c_out) / (2.0 * phi)).sqrt()
}

/// Community strength `(c_in - c_out)/2` at the detectability threshold for
/// average degree `d_ave`: `sqrt(d_ave / Φ)`.
pub fn threshold_strength(d_ave: f64, phi: f64) -> f64 {
    (d_ave / phi).sqrt()
}

/// What `fraction` of labels is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelBudgetBase {
    /// `⌊fraction · |region|⌋` labels per region.
    #[default]
    Region,
    /// `⌊fraction · n⌋` labels per region, `n` the whole graph.
    Graph,
}

/// How many labels to draw per region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelBudget {
    pub fraction: f64,
    pub min_count: usize,
    pub base: LabelBudgetBase,
}

impl LabelBudget {
    pub fn per_region(fraction: f64) -> Self {
        Self {
            fraction,
            min_count: 0,
            base: LabelBudgetBase::Region,
        }
    }

    fn count(&self, region: usize, n: usize) -> usize {
        let base = match self.base {
            LabelBudgetBase::Region => region,
            LabelBudgetBase::Graph => n,
        };
        self.min_count
            .max((self.fraction * base as f64 + 1e-9).floor() as usize)
    }
}

/// Draws labels uniformly without replacement from the benign region (the
/// nodes whose community is in `benign_communities`) and the Sybil region
/// (all other nodes).
pub fn sample_labels(
    communities: &[usize],
    benign_communities: &[usize],
    budget: LabelBudget,
    seed: u64,
) -> Result<LabelSet> {
    if !(budget.fraction > 0.0 && budget.fraction <= 1.0) {
        return Err(Error::Parameter(format!(
            "label fraction must be in (0, 1], got {}",
            budget.fraction
        )));
    }
    let n = communities.len();
    let (benign, sybil): (Vec<usize>, Vec<usize>) =
        (0..n).partition(|&i| benign_communities.contains(&communities[i]));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |region: &[usize], name: &'static str| -> Result<Vec<usize>> {
        let want = budget.count(region.len(), n);
        if want > region.len() {
            return Err(Error::LabelBudget {
                region: name,
                available: region.len(),
                required: want,
            });
        }
        let mut chosen: Vec<usize> = index::sample(&mut rng, region.len(), want)
            .into_iter()
            .map(|k| region[k])
            .collect();
        chosen.sort_unstable();
        Ok(chosen)
    };
    let benign_labels = draw(&benign, "benign")?;
    let sybil_labels = draw(&sybil, "sybil")?;
    LabelSet::new(n, sybil_labels, benign_labels)
}
