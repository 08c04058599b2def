//! AUC and label noise, plus the sweep harness that samples graphs and
//! labels, runs detectors or spectral clustering, and tabulates the scores.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::community::{nmi, spectral_clustering_with, Clustering};
use crate::dataset::{sybil_truth, Dataset};
use crate::detectors::{detect, DetectorParams, Method, ScoreVector, SpectrumCache};
use crate::error::{Error, Result};
use crate::generators::{sample_block_model, sample_labels, BlockModelParams, LabelBudget};
use crate::graph::{Graph, LabelSet};
use crate::shift::{build_shift, ShiftKind};
use crate::spectral::{eig, Spectrum};

/// Probability that a random Sybil outranks a random benign node, ties
/// counting one half. `truth[i]` is `true` for Sybils.
pub fn auc(scores: &ScoreVector, truth: &[bool]) -> Result<f64> {
    auc_masked(scores, truth, None)
}

/// [`auc`] over the nodes with `include[i]` set.
pub fn auc_masked(scores: &ScoreVector, truth: &[bool], include: Option<&[bool]>) -> Result<f64> {
    if truth.len() != scores.len() {
        return Err(Error::DimensionMismatch {
            expected: scores.len(),
            actual: truth.len(),
        });
    }
    if let Some(m) = include.filter(|m| m.len() != truth.len()) {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            actual: m.len(),
        });
    }
    let s = scores.sybil_scores();
    let mut items: Vec<(f64, bool)> = (0..s.len())
        .filter(|&i| include.map_or(true, |m| m[i]))
        .map(|i| (s[i], truth[i]))
        .collect();
    let pos = items.iter().filter(|x| x.1).count();
    let neg = items.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::UndefinedAuc(format!(
            "need both classes, got {pos} Sybil and {neg} benign nodes"
        )));
    }
    items.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Sum of midranks (1-based) of the Sybil nodes.
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < items.len() {
        let mut j = i;
        while j < items.len() && items[j].0 == items[i].0 {
            j += 1;
        }
        let midrank = (i + 1 + j) as f64 / 2.0;
        rank_sum += midrank * items[i..j].iter().filter(|x| x.1).count() as f64;
        i = j;
    }
    let (p, q) = (pos as f64, neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * q))
}

/// How label noise picks the labels to flip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseModel {
    /// Exactly `round(ε·|set|)` labels of each set.
    #[default]
    Rounded,
    /// Each label independently with probability `ε`.
    Bernoulli,
}

impl NoiseModel {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Rounded => "rounded",
            Self::Bernoulli => "bernoulli",
        }
    }
}

impl FromStr for NoiseModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rounded" => Ok(Self::Rounded),
            "bernoulli" => Ok(Self::Bernoulli),
            _ => Err(Error::Parameter(format!("unknown noise model `{s}`"))),
        }
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if (0.0..=0.5).contains(&epsilon) {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "epsilon must be in [0, 0.5], got {epsilon}"
        )))
    }
}

/// Moves `round(ε·|V_s|)` uniformly chosen Sybil labels to the benign set
/// and `round(ε·|V_b|)` benign labels to the Sybil set.
pub fn flip_labels(labels: &LabelSet, epsilon: f64, seed: u64) -> Result<LabelSet> {
    flip_labels_with(labels, epsilon, NoiseModel::Rounded, seed)
}

/// [`flip_labels`] under a chosen noise model.
pub fn flip_labels_with(
    labels: &LabelSet,
    epsilon: f64,
    model: NoiseModel,
    seed: u64,
) -> Result<LabelSet> {
    check_epsilon(epsilon)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pick = |set: &[usize]| -> Vec<bool> {
        let mut flip = vec![false; set.len()];
        match model {
            NoiseModel::Rounded => {
                let count = (epsilon * set.len() as f64).round() as usize;
                for k in index::sample(&mut rng, set.len(), count.min(set.len())) {
                    flip[k] = true;
                }
            }
            NoiseModel::Bernoulli => flip.iter_mut().for_each(|f| *f = rng.gen_bool(epsilon)),
        }
        flip
    };
    let sybil: Vec<usize> = labels.sybil().iter().copied().collect();
    let benign: Vec<usize> = labels.benign().iter().copied().collect();
    let fs = pick(&sybil);
    let fb = pick(&benign);
    let mut new_sybil = Vec::new();
    let mut new_benign = Vec::new();
    for (&i, f) in sybil.iter().zip(fs) {
        if f {
            new_benign.push(i)
        } else {
            new_sybil.push(i)
        }
    }
    for (&i, f) in benign.iter().zip(fb) {
        if f {
            new_sybil.push(i)
        } else {
            new_benign.push(i)
        }
    }
    let n = sybil.iter().chain(&benign).max().map_or(0, |m| m + 1);
    LabelSet::new(n, new_sybil, new_benign)
}

/// splitmix64 finalizer.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic seed for run `(a, b)` under `base`.
pub fn mix_seed(base: u64, a: u64, b: u64) -> u64 {
    splitmix(splitmix(splitmix(base) ^ a) ^ b)
}

/// Where graphs come from.
#[derive(Debug, Clone)]
pub enum Source {
    /// A fresh block-model sample per run. On the margin axis `c_in` and
    /// `c_out` are replaced keeping `(c_in + c_out)/2` fixed.
    Synthetic(BlockModelParams),
    /// A fixed network; only labels are resampled.
    Dataset(Arc<Dataset>),
}

/// The swept quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Community strength `(c_in - c_out)/2`.
    Margin,
    /// Label-noise fraction.
    Epsilon,
}

impl SweepAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Margin => "margin",
            Self::Epsilon => "epsilon",
        }
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "margin" => Ok(Self::Margin),
            "epsilon" => Ok(Self::Epsilon),
            _ => Err(Error::Parameter(format!("unknown sweep axis `{s}`"))),
        }
    }
}

/// Shift matrix families, resolved to concrete parameters per graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftFamily {
    RandomWalk,
    Augmented,
    MaxDegree,
    BetheHessian,
    Regularized,
}

impl ShiftFamily {
    pub const ALL: [ShiftFamily; 5] = [
        Self::RandomWalk,
        Self::Augmented,
        Self::MaxDegree,
        Self::BetheHessian,
        Self::Regularized,
    ];

    /// `r` and `τ` take their graph-dependent defaults; `tau` overrides `τ`.
    pub fn resolve(&self, g: &Graph, tau: Option<f64>) -> Result<ShiftKind> {
        Ok(match self {
            Self::RandomWalk => ShiftKind::RandomWalkLaplacian,
            Self::Augmented => ShiftKind::AugmentedNormalizedLaplacian,
            Self::MaxDegree => ShiftKind::MaxDegreeLaplacian,
            Self::BetheHessian => ShiftKind::bethe_hessian(g)?,
            Self::Regularized => ShiftKind::RegularizedLaplacian {
                tau: tau.unwrap_or_else(|| g.degrees().d_ave),
            },
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::RandomWalk => "rw",
            Self::Augmented => "aug",
            Self::MaxDegree => "max",
            Self::BetheHessian => "bethe",
            Self::Regularized => "reg",
        }
    }
}

impl fmt::Display for ShiftFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ShiftFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown shift family `{s}`")))
    }
}

/// A full sweep description.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub source: Source,
    pub methods: Vec<Method>,
    /// Shifts scored by [`detectability_experiment`].
    pub shifts: Vec<ShiftFamily>,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub repetitions: usize,
    pub seed_base: u64,
    pub params: DetectorParams,
    pub budget: LabelBudget,
    /// Noise level on the margin axis.
    pub epsilon: f64,
    pub noise: NoiseModel,
    /// Score AUC on unlabeled nodes only.
    pub exclude_training: bool,
    /// Randomizes which communities form the benign region.
    pub split_seed: Option<u64>,
}

impl ExperimentSpec {
    /// Six standard methods, all five shifts, 10% labels per region, no
    /// noise.
    pub fn new(source: Source, axis: SweepAxis, values: Vec<f64>, repetitions: usize) -> Self {
        Self {
            source,
            methods: Method::STANDARD.to_vec(),
            shifts: ShiftFamily::ALL.to_vec(),
            axis,
            values,
            repetitions,
            seed_base: 0,
            params: DetectorParams::default(),
            budget: LabelBudget::per_region(0.1),
            epsilon: 0.0,
            noise: NoiseModel::Rounded,
            exclude_training: false,
            split_seed: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::Parameter("repetitions must be at least 1".into()));
        }
        if self.values.is_empty() {
            return Err(Error::Parameter("sweep values must be non-empty".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("sweep values must be finite".into()));
        }
        if self.axis == SweepAxis::Margin && matches!(self.source, Source::Dataset(_)) {
            return Err(Error::Parameter(
                "a margin sweep needs a synthetic source".into(),
            ));
        }
        if self.axis == SweepAxis::Epsilon {
            self.values.iter().try_for_each(|&e| check_epsilon(e))?;
        }
        check_epsilon(self.epsilon)?;
        self.params.validate()
    }
}

/// Which score a row holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Auc,
    Nmi,
}

impl Metric {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Auc => "auc",
            Self::Nmi => "nmi",
        }
    }
}

/// One cell; `value` is `None` when the run failed.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub method: String,
    pub sweep: f64,
    pub rep: usize,
    pub metric: Metric,
    pub value: Option<f64>,
    pub seed: u64,
}

/// Mean and sample standard deviation of the successful runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub method: String,
    pub sweep: f64,
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    /// One aggregate per (method, sweep) in first-appearance order. Cells
    /// with no successful run have `n = 0` and NaN statistics.
    pub fn aggregates(&self) -> Vec<Aggregate> {
        let mut keys: Vec<(String, f64)> = Vec::new();
        for r in &self.rows {
            if !keys.iter().any(|(m, s)| *m == r.method && *s == r.sweep) {
                keys.push((r.method.clone(), r.sweep));
            }
        }
        let mut out: Vec<Aggregate> = keys
            .into_iter()
            .map(|(method, sweep)| {
                let vals: Vec<f64> = self
                    .rows
                    .iter()
                    .filter(|r| r.method == method && r.sweep == sweep)
                    .filter_map(|r| r.value)
                    .collect();
                let n = vals.len();
                let mean = vals.iter().sum::<f64>() / n as f64;
                let std = if n > 1 {
                    (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
                } else if n == 1 {
                    0.0
                } else {
                    f64::NAN
                };
                Aggregate {
                    method,
                    sweep,
                    mean,
                    std,
                    n,
                }
            })
            .collect();
        // Methods keep first-appearance order; sweeps ascend within each.
        let order: Vec<String> =
            out.iter()
                .map(|a| a.method.clone())
                .fold(Vec::new(), |mut v, m| {
                    if !v.contains(&m) {
                        v.push(m);
                    }
                    v
                });
        out.sort_by(|a, b| {
            let ia = order.iter().position(|m| *m == a.method);
            let ib = order.iter().position(|m| *m == b.method);
            ia.cmp(&ib).then(a.sweep.total_cmp(&b.sweep))
        });
        out
    }

    /// Aggregate for one cell.
    pub fn aggregate(&self, method: &str, sweep: f64) -> Option<Aggregate> {
        self.aggregates()
            .into_iter()
            .find(|a| a.method == method && a.sweep == sweep)
    }

    pub fn missing(&self) -> usize {
        self.rows.iter().filter(|r| r.value.is_none()).count()
    }

    /// Raw rows as `method,sweep,rep,metric,value,seed`; failed cells have
    /// an empty value.
    pub fn write_raw_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["method", "sweep", "rep", "metric", "value", "seed"])?;
        for r in &self.rows {
            w.write_record([
                r.method.clone(),
                r.sweep.to_string(),
                r.rep.to_string(),
                r.metric.as_str().to_string(),
                r.value.map(|v| v.to_string()).unwrap_or_default(),
                r.seed.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Aggregates as `method,sweep,mean,std,n`.
    pub fn write_aggregate_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["method", "sweep", "mean", "std", "n"])?;
        for a in self.aggregates() {
            w.write_record([
                a.method,
                a.sweep.to_string(),
                a.mean.to_string(),
                a.std.to_string(),
                a.n.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// One sampled graph with its labels.
struct Instance {
    graph: Graph,
    communities: Vec<usize>,
    labels: LabelSet,
    truth: Vec<bool>,
}

// Sub-stream tags under a run seed.
const GRAPH_STREAM: u64 = 1;
const LABEL_STREAM: u64 = 2;
const NOISE_STREAM: u64 = 3;
const CLUSTER_STREAM: u64 = 4;

fn margin_params(base: &BlockModelParams, strength: f64) -> Result<BlockModelParams> {
    let d = (base.c_in + base.c_out) / 2.0;
    if strength < 0.0 || strength > d {
        return Err(Error::Parameter(format!(
            "community strength {strength} outside [0, {d}] for average degree {d}"
        )));
    }
    Ok(BlockModelParams {
        c_in: d + strength,
        c_out: d - strength,
        ..base.clone()
    })
}

fn instance(spec: &ExperimentSpec, value: f64, seed: u64) -> Result<Instance> {
    let (graph, communities, benign) = match &spec.source {
        Source::Synthetic(base) => {
            let params = match spec.axis {
                SweepAxis::Margin => margin_params(base, value)?,
                SweepAxis::Epsilon => base.clone(),
            };
            let pg = sample_block_model(&params, mix_seed(seed, GRAPH_STREAM, 0))?;
            let (pg, _) = pg.largest_connected_component();
            let benign: Vec<usize> = (0..pg.k.div_ceil(2)).collect();
            (pg.graph, pg.communities, benign)
        }
        Source::Dataset(ds) => (
            ds.graph.clone(),
            ds.communities.assignment().to_vec(),
            ds.benign_communities(spec.split_seed),
        ),
    };
    let labels = sample_labels(
        &communities,
        &benign,
        spec.budget,
        mix_seed(seed, LABEL_STREAM, 0),
    )?;
    let epsilon = match spec.axis {
        SweepAxis::Epsilon => value,
        SweepAxis::Margin => spec.epsilon,
    };
    let labels = if epsilon > 0.0 {
        flip_labels_with(
            &labels,
            epsilon,
            spec.noise,
            mix_seed(seed, NOISE_STREAM, 0),
        )?
    } else {
        labels
    };
    let truth = sybil_truth(&communities, &benign);
    Ok(Instance {
        graph,
        communities,
        labels,
        truth,
    })
}

fn run_grid<F>(
    spec: &ExperimentSpec,
    names: &[String],
    metric: Metric,
    run: F,
) -> Result<ResultTable>
where
    F: Fn(&Instance, u64) -> Vec<Result<f64>> + Sync,
{
    spec.validate()?;
    let tasks: Vec<(usize, usize)> = (0..spec.values.len())
        .flat_map(|v| (0..spec.repetitions).map(move |r| (v, r)))
        .collect();
    let chunks: Vec<Vec<ResultRow>> = tasks
        .into_par_iter()
        .map(|(vi, rep)| {
            let value = spec.values[vi];
            let seed = mix_seed(spec.seed_base, vi as u64, rep as u64);
            let values: Vec<Option<f64>> = match instance(spec, value, seed) {
                Ok(inst) => run(&inst, seed)
                    .into_iter()
                    .zip(names)
                    .map(|(r, name)| {
                        r.map_err(|e| log::warn!("{name} at sweep value {value} rep {rep}: {e}"))
                            .ok()
                    })
                    .collect(),
                Err(e) => {
                    log::warn!("sweep value {value} rep {rep}: instance failed: {e}");
                    vec![None; names.len()]
                }
            };
            names
                .iter()
                .zip(values)
                .map(|(name, value_opt)| ResultRow {
                    method: name.clone(),
                    sweep: value,
                    rep,
                    metric,
                    value: value_opt,
                    seed,
                })
                .collect()
        })
        .collect();
    let mut rows: Vec<ResultRow> = chunks.into_iter().flatten().collect();
    // Group by method, then sweep value, then repetition.
    rows.sort_by(|a, b| {
        let ia = names.iter().position(|n| *n == a.method);
        let ib = names.iter().position(|n| *n == b.method);
        ia.cmp(&ib)
            .then(a.sweep.total_cmp(&b.sweep))
            .then(a.rep.cmp(&b.rep))
    });
    Ok(ResultTable { rows })
}

/// Runs every method on every (sweep value, repetition) and scores AUC
/// against the planted or recorded regions. Detector failures become
/// missing cells.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    let names: Vec<String> = spec.methods.iter().map(|m| m.id().to_string()).collect();
    run_grid(spec, &names, Metric::Auc, |inst, _| {
        let cache = SpectrumCache::new();
        let mask: Option<Vec<bool>> = spec.exclude_training.then(|| {
            (0..inst.graph.n())
                .map(|i| !inst.labels.is_labeled(i))
                .collect()
        });
        spec.methods
            .iter()
            .map(|&m| {
                let scores = detect(m, &inst.graph, &inst.labels, &spec.params, Some(&cache))?;
                auc_masked(&scores, &inst.truth, mask.as_deref())
            })
            .collect()
    })
}

/// Spectral clustering with each shift of `spec.shifts` on every sample,
/// scored by NMI against the planted communities.
pub fn detectability_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    if !matches!(spec.source, Source::Synthetic(_)) {
        return Err(Error::Parameter(
            "detectability needs a synthetic source".into(),
        ));
    }
    let names: Vec<String> = spec.shifts.iter().map(|s| s.to_string()).collect();
    run_grid(spec, &names, Metric::Nmi, |inst, seed| {
        let truth = Clustering::new(&inst.communities);
        let k = truth.k().max(2);
        spec.shifts
            .iter()
            .map(|fam| {
                let kind = fam.resolve(&inst.graph, spec.params.tau)?;
                let shift = build_shift(&inst.graph, kind, Some(&inst.labels))?;
                let found =
                    spectral_clustering_with(&eig(&shift)?, k, mix_seed(seed, CLUSTER_STREAM, 0))?;
                nmi(&truth, &found)
            })
            .collect()
    })
}

/// Spectra of every shift of `families` on one graph.
pub fn spectral_distribution(
    g: &Graph,
    labels: &LabelSet,
    families: &[ShiftFamily],
) -> Result<Vec<(ShiftFamily, Spectrum)>> {
    families
        .iter()
        .map(|fam| {
            let kind = fam.resolve(g, None)?;
            Ok((*fam, eig(&build_shift(g, kind, Some(labels))?)?))
        })
        .collect()
}

/// Number of eigenvalues split off below the bulk: the position of the
/// widest gap among the lowest `window + 1` sorted eigenvalues.
pub fn isolated_low_eigenvalues(eigenvalues: &[f64], window: usize) -> usize {
    let mut ev = eigenvalues.to_vec();
    ev.sort_by(f64::total_cmp);
    let m = window.min(ev.len().saturating_sub(1));
    (0..m)
        .max_by(|&a, &b| (ev[a + 1] - ev[a]).total_cmp(&(ev[b + 1] - ev[b])))
        .map_or(0, |i| i + 1)
}
