//! Command-line definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use sybil_lowpass::DetectorParams;

use crate::config::{parse_cutoff, parse_form, parse_heat_form, Model, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "sybil-lowpass",
    version,
    about = "Low-pass graph-filter Sybil detection experiments"
)]
pub struct Cli {
    /// Log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample an SBM or DCSBM graph and write edge-list and community files.
    Generate(GenerateArgs),
    /// Score nodes with one or all detectors.
    Detect(DetectArgs),
    /// Run a figure or table sweep and write raw and aggregate CSVs.
    Sweep(SweepArgs),
    /// Write the eigenvalues of shift matrices as CSV.
    Spectrum(SpectrumArgs),
}

/// Block-model flags. Unset values fall back to the command's defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: Option<Model>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long = "d-ave")]
    pub d_ave: Option<f64>,
    #[arg(long = "c-out", conflicts_with = "margin")]
    pub c_out: Option<f64>,
    /// Community strength (c_in - c_out)/2; sets c_out = d_ave - margin.
    #[arg(long)]
    pub margin: Option<f64>,
    /// θ ∝ U(LO, HI)³ normalized to mean 1; implies the DCSBM.
    #[arg(long = "theta-cube-uniform", num_args = 2, value_names = ["LO", "HI"])]
    pub theta_cube_uniform: Option<Vec<f64>>,
}

impl ModelArgs {
    pub fn apply(&self, c: &mut RunConfig) {
        if let Some(m) = self.model {
            c.model = m;
        }
        if let Some(n) = self.n {
            c.n = n;
        }
        if let Some(k) = self.k {
            c.k = k;
        }
        if let Some(d) = self.d_ave {
            c.d_ave = d;
        }
        if let Some(x) = self.c_out {
            c.c_out = x;
        }
        if let Some(m) = self.margin {
            c.c_out = c.d_ave - m;
        }
        if let Some(t) = &self.theta_cube_uniform {
            c.theta_range = (t[0], t[1]);
            if self.model.is_none() {
                c.model = Model::Dcsbm;
            }
        }
    }
}

/// Detector parameter flags.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// CIA restart parameter.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// SybilRank steps (default ⌊ln N⌋).
    #[arg(long)]
    pub gamma: Option<u32>,
    /// SybilSCAR residual prior.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Heat kernel scale.
    #[arg(long)]
    pub s: Option<f64>,
    /// SybilHeat regularization (default: average degree).
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long = "cheb-order")]
    pub cheb_order: Option<usize>,
    /// iterative or spectral.
    #[arg(long, value_parser = parse_form)]
    pub form: Option<sybil_lowpass::Form>,
    /// exact or chebyshev.
    #[arg(long = "heat-form", value_parser = parse_heat_form)]
    pub heat_form: Option<sybil_lowpass::HeatForm>,
    /// SybilBelief band: negative:K, threshold:X or smallest:K.
    #[arg(long, value_parser = parse_cutoff)]
    pub cutoff: Option<sybil_lowpass::CutoffRule>,
    /// Permit sybilscar-d.
    #[arg(long = "allow-nonstandard")]
    pub allow_nonstandard: bool,
}

impl ParamArgs {
    pub fn apply(&self, p: &mut DetectorParams) {
        if let Some(v) = self.alpha {
            p.alpha = v;
        }
        if self.gamma.is_some() {
            p.gamma = self.gamma;
        }
        if let Some(v) = self.theta {
            p.theta = v;
        }
        if let Some(v) = self.s {
            p.s = v;
        }
        if self.tau.is_some() {
            p.tau = self.tau;
        }
        if let Some(v) = self.cheb_order {
            p.cheb_order = v;
        }
        if let Some(v) = self.form {
            p.form = v;
        }
        if let Some(v) = self.heat_form {
            p.heat_form = v;
        }
        if let Some(v) = self.cutoff {
            p.cutoff = v;
        }
        if self.allow_nonstandard {
            p.allow_nonstandard = true;
        }
    }
}

/// A network on disk.
#[derive(Debug, Clone, Default, Args)]
pub struct InputArgs {
    /// Directory holding edges.txt and communities.txt, or a dataset name.
    #[arg(long, conflicts_with_all = ["edges", "communities"])]
    pub dataset: Option<PathBuf>,
    /// Edge-list file.
    #[arg(long)]
    pub edges: Option<PathBuf>,
    /// Community file for --edges.
    #[arg(long, requires = "edges")]
    pub communities: Option<PathBuf>,
    /// Directory searched for bare dataset names given to --dataset.
    #[arg(long = "datasets-dir", env = "SYBIL_LOWPASS_DATASETS")]
    pub datasets_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Label file with `node sybil|benign` lines; otherwise labels are
    /// sampled from the communities.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Method id, comma-separated ids, or `all`.
    #[arg(long, default_value = "all")]
    pub method: String,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long = "label-fraction", default_value_t = 0.1)]
    pub label_fraction: f64,
    #[arg(long = "min-labels", default_value_t = 3)]
    pub min_labels: usize,
    /// Count labels from the region size (`region`) or the graph size (`graph`).
    #[arg(long = "label-base", default_value = "graph", value_parser = crate::config::parse_label_base)]
    pub label_base: sybil_lowpass::LabelBudgetBase,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Fraction of flipped labels.
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    /// rounded or bernoulli.
    #[arg(long, default_value = "rounded")]
    pub noise: sybil_lowpass::eval::NoiseModel,
    #[arg(long = "split-seed")]
    pub split_seed: Option<u64>,
    /// Label samplings to average the AUC over.
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    /// Print the AUC against the community split.
    #[arg(long)]
    pub auc: bool,
    /// Score only unlabeled nodes.
    #[arg(long = "exclude-training")]
    pub exclude_training: bool,
    /// Output directory for score files.
    #[arg(long, default_value = "scores")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// fig2, fig3-sbm, fig3-dcsbm, fig4-sbm, fig4-dcsbm, fig5-sbm,
    /// fig5-dcsbm or table2.
    #[arg(long)]
    pub preset: Option<crate::config::Preset>,
    /// Flat `key = value` file applied after the preset.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Print the resolved configuration and exit.
    #[arg(long = "dump-config")]
    pub dump_config: bool,
    /// Small grids and two repetitions.
    #[arg(long)]
    pub quick: bool,
    /// Worker threads (0: all cores).
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Dataset directory (edges.txt + communities.txt).
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Directory searched for bare dataset names given to --dataset.
    #[arg(long = "datasets-dir", env = "SYBIL_LOWPASS_DATASETS")]
    pub datasets_dir: Option<PathBuf>,
    /// Comma-separated sweep values.
    #[arg(long)]
    pub values: Option<String>,
    /// Method id, comma-separated ids, or `all`.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub noise: Option<sybil_lowpass::eval::NoiseModel>,
    #[arg(long = "split-seed")]
    pub split_seed: Option<u64>,
    #[arg(long = "exclude-training")]
    pub exclude_training: bool,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Used when no input is given.
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Shift family (rw, aug, max, bethe, reg), comma-separated, or `all`.
    #[arg(long, default_value = "all")]
    pub shift: String,
    /// Lowest eigenvalues searched for the bulk edge.
    #[arg(long, default_value_t = 10)]
    pub window: usize,
    #[arg(long, default_value = "spectrum")]
    pub out: PathBuf,
}
