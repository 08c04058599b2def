//! Flat `key = value` run configuration, presets, and conversion to an
//! experiment spec.

use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use sybil_lowpass::eval::{ExperimentSpec, NoiseModel, ShiftFamily, Source, SweepAxis};
use sybil_lowpass::{
    BlockModelParams, CutoffRule, Dataset, DetectorParams, Form, HeatForm, LabelBudget,
    LabelBudgetBase, Method, ThetaSpec,
};

/// What a sweep computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    /// Detector AUC.
    Auc,
    /// Spectral-clustering NMI per shift.
    Detectability,
    /// Eigenvalue distributions; `values` are average degrees.
    Spectrum,
}

impl Task {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Auc => "auc",
            Self::Detectability => "detectability",
            Self::Spectrum => "spectrum",
        }
    }
}

impl FromStr for Task {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auc" => Ok(Self::Auc),
            "detectability" => Ok(Self::Detectability),
            "spectrum" => Ok(Self::Spectrum),
            _ => bail!("unknown task `{s}` (expected auc, detectability or spectrum)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Model {
    Sbm,
    Dcsbm,
}

impl Model {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Sbm => "sbm",
            Self::Dcsbm => "dcsbm",
        }
    }
}

impl FromStr for Model {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sbm" => Ok(Self::Sbm),
            "dcsbm" => Ok(Self::Dcsbm),
            _ => bail!("unknown model `{s}` (expected sbm or dcsbm)"),
        }
    }
}

/// Named experiment set-ups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig2,
    Fig3Sbm,
    Fig3Dcsbm,
    Fig4Sbm,
    Fig4Dcsbm,
    Fig5Sbm,
    Fig5Dcsbm,
    Table2,
}

impl Preset {
    pub const ALL: [Preset; 8] = [
        Self::Fig2,
        Self::Fig3Sbm,
        Self::Fig3Dcsbm,
        Self::Fig4Sbm,
        Self::Fig4Dcsbm,
        Self::Fig5Sbm,
        Self::Fig5Dcsbm,
        Self::Table2,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Fig2 => "fig2",
            Self::Fig3Sbm => "fig3-sbm",
            Self::Fig3Dcsbm => "fig3-dcsbm",
            Self::Fig4Sbm => "fig4-sbm",
            Self::Fig4Dcsbm => "fig4-dcsbm",
            Self::Fig5Sbm => "fig5-sbm",
            Self::Fig5Dcsbm => "fig5-dcsbm",
            Self::Table2 => "table2",
        }
    }

    /// Output subdirectory.
    pub fn dir(&self) -> &'static str {
        self.name().split('-').next().unwrap_or("custom")
    }

    /// The preset's configuration. `quick` shrinks grids (and fig2's graph
    /// size) and defaults to two repetitions.
    pub fn config(&self, quick: bool) -> RunConfig {
        let margins = if quick {
            vec![1.0, 2.5, 4.0]
        } else {
            (0..10).map(|i| 0.5 * i as f64).collect()
        };
        let epsilons = if quick {
            vec![0.0, 0.2, 0.4]
        } else {
            (0..=10).map(|i| 0.05 * i as f64).collect()
        };
        let reps = if quick { 2 } else { 100 };
        let mut c = RunConfig {
            preset: Some(*self),
            reps,
            ..RunConfig::default()
        };
        c.params.form = Form::Iterative;
        c.params.heat_form = HeatForm::Chebyshev;
        match self {
            Self::Fig2 => {
                c.task = Task::Spectrum;
                c.n = if quick { 1000 } else { 3000 };
                c.c_out = 1.0;
                c.values = vec![20.0, 5.0];
                c.reps = 1;
            }
            Self::Fig3Sbm | Self::Fig3Dcsbm => {
                c.task = Task::Detectability;
                c.values = margins;
            }
            Self::Fig4Sbm | Self::Fig4Dcsbm => c.values = margins,
            Self::Fig5Sbm | Self::Fig5Dcsbm => {
                c.axis = SweepAxis::Epsilon;
                c.c_out = 0.5;
                c.values = epsilons;
            }
            Self::Table2 => {
                c.axis = SweepAxis::Epsilon;
                c.dataset = Some(PathBuf::from("karate"));
                c.values = vec![0.0, 0.1, 0.2];
                c.min_labels = 3;
                c.label_base = LabelBudgetBase::Graph;
            }
        }
        if matches!(self, Self::Fig3Dcsbm | Self::Fig4Dcsbm | Self::Fig5Dcsbm) {
            c.model = Model::Dcsbm;
        }
        c
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|p| p.name()).collect();
                anyhow!(
                    "unknown preset `{s}` (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

/// Everything a sweep needs, mirroring the command-line flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub preset: Option<Preset>,
    pub task: Task,
    pub model: Model,
    pub n: usize,
    pub k: usize,
    pub d_ave: f64,
    pub c_out: f64,
    /// `θ ∝ U(lo, hi)³` for the DCSBM.
    pub theta_range: (f64, f64),
    pub dataset: Option<PathBuf>,
    pub split_seed: Option<u64>,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub methods: Vec<Method>,
    pub shifts: Vec<ShiftFamily>,
    pub reps: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub noise: NoiseModel,
    pub label_fraction: f64,
    pub min_labels: usize,
    pub label_base: LabelBudgetBase,
    pub exclude_training: bool,
    pub params: DetectorParams,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            preset: None,
            task: Task::Auc,
            model: Model::Sbm,
            n: 1000,
            k: 2,
            d_ave: 5.0,
            c_out: 0.5,
            theta_range: (3.0, 7.0),
            dataset: None,
            split_seed: None,
            axis: SweepAxis::Margin,
            values: vec![2.5],
            methods: Method::STANDARD.to_vec(),
            shifts: ShiftFamily::ALL.to_vec(),
            reps: 1,
            seed: 1,
            epsilon: 0.0,
            noise: NoiseModel::Rounded,
            label_fraction: 0.1,
            min_labels: 0,
            label_base: LabelBudgetBase::Region,
            exclude_training: false,
            params: DetectorParams::default(),
            out: PathBuf::from("results"),
        }
    }
}

fn list<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn parse_list<T: FromStr>(v: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| anyhow!("`{s}`: {e}")))
        .collect()
}

fn opt<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

fn parse_opt<T: FromStr>(v: &str) -> Result<Option<T>>
where
    T::Err: fmt::Display,
{
    if v.is_empty() {
        Ok(None)
    } else {
        v.parse().map(Some).map_err(|e| anyhow!("`{v}`: {e}"))
    }
}

fn parse<T: FromStr>(v: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    v.parse().map_err(|e| anyhow!("`{v}`: {e}"))
}

pub fn form_str(f: Form) -> &'static str {
    match f {
        Form::Iterative => "iterative",
        Form::Spectral => "spectral",
    }
}

pub fn parse_form(s: &str) -> Result<Form> {
    match s {
        "iterative" => Ok(Form::Iterative),
        "spectral" => Ok(Form::Spectral),
        _ => bail!("unknown form `{s}` (expected iterative or spectral)"),
    }
}

pub fn heat_form_str(f: HeatForm) -> &'static str {
    match f {
        HeatForm::Exact => "exact",
        HeatForm::Chebyshev => "chebyshev",
    }
}

pub fn parse_heat_form(s: &str) -> Result<HeatForm> {
    match s {
        "exact" => Ok(HeatForm::Exact),
        "chebyshev" => Ok(HeatForm::Chebyshev),
        _ => bail!("unknown heat form `{s}` (expected exact or chebyshev)"),
    }
}

pub fn cutoff_str(c: CutoffRule) -> String {
    match c {
        CutoffRule::Negative { fallback_k } => format!("negative:{fallback_k}"),
        CutoffRule::Threshold(t) => format!("threshold:{t}"),
        CutoffRule::Smallest(k) => format!("smallest:{k}"),
    }
}

/// `negative:K`, `threshold:X` or `smallest:K`.
pub fn parse_cutoff(s: &str) -> Result<CutoffRule> {
    let (rule, arg) = s.split_once(':').unwrap_or((s, ""));
    Ok(match rule {
        "negative" => CutoffRule::Negative {
            fallback_k: if arg.is_empty() { 2 } else { parse(arg)? },
        },
        "threshold" => CutoffRule::Threshold(parse(arg)?),
        "smallest" => CutoffRule::Smallest(parse(arg)?),
        _ => bail!("unknown cutoff rule `{s}`"),
    })
}

pub fn label_base_str(b: LabelBudgetBase) -> &'static str {
    match b {
        LabelBudgetBase::Region => "region",
        LabelBudgetBase::Graph => "graph",
    }
}

pub fn parse_label_base(s: &str) -> Result<LabelBudgetBase> {
    match s {
        "region" => Ok(LabelBudgetBase::Region),
        "graph" => Ok(LabelBudgetBase::Graph),
        _ => bail!("unknown label base `{s}` (expected region or graph)"),
    }
}

impl RunConfig {
    /// Key/value pairs in a fixed order.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let p = &self.params;
        vec![
            ("preset", opt(&self.preset)),
            ("task", self.task.as_str().into()),
            ("model", self.model.as_str().into()),
            ("n", self.n.to_string()),
            ("k", self.k.to_string()),
            ("d-ave", self.d_ave.to_string()),
            ("c-out", self.c_out.to_string()),
            (
                "theta-cube-uniform",
                format!("{} {}", self.theta_range.0, self.theta_range.1),
            ),
            (
                "dataset",
                self.dataset
                    .as_ref()
                    .map(|d| d.display().to_string())
                    .unwrap_or_default(),
            ),
            ("split-seed", opt(&self.split_seed)),
            ("axis", self.axis.as_str().into()),
            ("values", list(&self.values)),
            ("method", list(&self.methods)),
            ("shifts", list(&self.shifts)),
            ("reps", self.reps.to_string()),
            ("seed", self.seed.to_string()),
            ("epsilon", self.epsilon.to_string()),
            ("noise", self.noise.as_str().into()),
            ("label-fraction", self.label_fraction.to_string()),
            ("min-labels", self.min_labels.to_string()),
            ("label-base", label_base_str(self.label_base).into()),
            ("exclude-training", self.exclude_training.to_string()),
            ("alpha", p.alpha.to_string()),
            ("gamma", opt(&p.gamma)),
            ("gamma-log-base", p.gamma_log_base.to_string()),
            ("theta", p.theta.to_string()),
            ("s", p.s.to_string()),
            ("tau", opt(&p.tau)),
            ("cheb-order", p.cheb_order.to_string()),
            ("tol", p.tol.to_string()),
            ("max-iter", p.max_iter.to_string()),
            ("cutoff", cutoff_str(p.cutoff)),
            ("form", form_str(p.form).into()),
            ("heat-form", heat_form_str(p.heat_form).into()),
            ("allow-nonstandard", p.allow_nonstandard.to_string()),
            ("out", self.out.display().to_string()),
        ]
    }

    /// Renders the config file text.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.to_pairs() {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    /// Sets one key.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let p = &mut self.params;
        match key {
            "preset" => self.preset = parse_opt(v)?,
            "task" => self.task = parse(v)?,
            "model" => self.model = parse(v)?,
            "n" => self.n = parse(v)?,
            "k" => self.k = parse(v)?,
            "d-ave" => self.d_ave = parse(v)?,
            "c-out" => self.c_out = parse(v)?,
            "theta-cube-uniform" => {
                let parts: Vec<f64> = v
                    .split_whitespace()
                    .map(parse::<f64>)
                    .collect::<Result<_>>()?;
                let [lo, hi] = parts[..] else {
                    bail!("expected two numbers `LO HI`, got `{v}`");
                };
                self.theta_range = (lo, hi);
            }
            "dataset" => self.dataset = (!v.is_empty()).then(|| PathBuf::from(v)),
            "split-seed" => self.split_seed = parse_opt(v)?,
            "axis" => self.axis = parse(v)?,
            "values" => self.values = parse_list(v)?,
            "method" | "methods" => self.methods = parse_methods(v)?,
            "shifts" => self.shifts = parse_list(v)?,
            "reps" => self.reps = parse(v)?,
            "seed" => self.seed = parse(v)?,
            "epsilon" => self.epsilon = parse(v)?,
            "noise" => self.noise = parse(v)?,
            "label-fraction" => self.label_fraction = parse(v)?,
            "min-labels" => self.min_labels = parse(v)?,
            "label-base" => self.label_base = parse_label_base(v)?,
            "exclude-training" => self.exclude_training = parse(v)?,
            "alpha" => p.alpha = parse(v)?,
            "gamma" => p.gamma = parse_opt(v)?,
            "gamma-log-base" => p.gamma_log_base = parse(v)?,
            "theta" => p.theta = parse(v)?,
            "s" => p.s = parse(v)?,
            "tau" => p.tau = parse_opt(v)?,
            "cheb-order" => p.cheb_order = parse(v)?,
            "tol" => p.tol = parse(v)?,
            "max-iter" => p.max_iter = parse(v)?,
            "cutoff" => p.cutoff = parse_cutoff(v)?,
            "form" => p.form = parse_form(v)?,
            "heat-form" => p.heat_form = parse_heat_form(v)?,
            "allow-nonstandard" => p.allow_nonstandard = parse(v)?,
            "out" => self.out = PathBuf::from(v),
            _ => bail!("unknown config key `{key}`"),
        }
        Ok(())
    }

    /// Applies a config file on top of `self`. Blank lines and `#` comments
    /// are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("config line {}: expected `key = value`", no + 1))?;
            self.set(k.trim(), v.trim())
                .with_context(|| format!("config line {}", no + 1))?;
        }
        Ok(())
    }

    /// Parses a config file over the defaults (or over the preset named in
    /// it, when its first setting is `preset`).
    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = Self::default();
        c.apply_text(text)?;
        Ok(c)
    }

    /// Checks the config and builds the experiment spec.
    pub fn to_spec(&self) -> Result<ExperimentSpec> {
        if self.task == Task::Spectrum {
            bail!("the spectrum task has no experiment spec");
        }
        let source = match &self.dataset {
            Some(dir) => Source::Dataset(Arc::new(
                Dataset::load_dir(dir).with_context(|| format!("loading {}", dir.display()))?,
            )),
            None => Source::Synthetic(self.block_model(self.d_ave)?),
        };
        let mut spec = ExperimentSpec::new(source, self.axis, self.values.clone(), self.reps);
        spec.methods = self.methods.clone();
        spec.shifts = self.shifts.clone();
        spec.seed_base = self.seed;
        spec.params = self.params.clone();
        spec.budget = LabelBudget {
            fraction: self.label_fraction,
            min_count: self.min_labels,
            base: self.label_base,
        };
        spec.epsilon = self.epsilon;
        spec.noise = self.noise;
        spec.exclude_training = self.exclude_training;
        spec.split_seed = self.split_seed;
        spec.validate()?;
        if self.methods.iter().any(Method::is_nonstandard) && !self.params.allow_nonstandard {
            bail!(sybil_lowpass::Error::Nonstandard("sybilscar-d".into()));
        }
        Ok(spec)
    }

    /// Block-model parameters at average degree `d_ave` with this config's
    /// `c_out` and model.
    pub fn block_model(&self, d_ave: f64) -> Result<BlockModelParams> {
        if self.k < 2 {
            bail!("k must be at least 2, got {}", self.k);
        }
        let mut p = BlockModelParams::from_degree_and_c_out(self.n, d_ave, self.c_out);
        p.k = self.k;
        if self.model == Model::Dcsbm {
            let (lo, hi) = self.theta_range;
            if !(lo > 0.0 && hi >= lo) {
                bail!("theta range must satisfy 0 < lo <= hi, got {lo} {hi}");
            }
            p = p.with_theta(ThetaSpec::CubedUniform { lo, hi });
        }
        Ok(p)
    }

    /// Name used for output files.
    pub fn run_name(&self) -> String {
        let base = self
            .preset
            .map_or("sweep".to_string(), |p| p.name().to_string());
        match (&self.dataset, self.preset) {
            (Some(d), _) => {
                let ds = d.file_name().and_then(|s| s.to_str()).unwrap_or("dataset");
                format!("{base}_{ds}")
            }
            _ => base,
        }
    }

    /// Output subdirectory of `out`.
    pub fn out_dir(&self) -> PathBuf {
        self.out.join(self.preset.map_or("custom", |p| p.dir()))
    }
}

/// Comma-separated method ids, or `all` for the six standard methods.
pub fn parse_methods(v: &str) -> Result<Vec<Method>> {
    if v.trim() == "all" {
        return Ok(Method::STANDARD.to_vec());
    }
    let m: Vec<Method> = parse_list(v)?;
    if m.is_empty() {
        bail!("no methods given");
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_roundtrip() {
        for c in [
            CutoffRule::Negative { fallback_k: 3 },
            CutoffRule::Threshold(-0.25),
            CutoffRule::Smallest(4),
        ] {
            assert_eq!(parse_cutoff(&cutoff_str(c)).unwrap(), c);
        }
    }

    #[test]
    fn unknown_key_is_rejected() {
        assert!(RunConfig::from_text("bogus = 1").is_err());
        assert!(RunConfig::from_text("n 5").is_err());
    }

    #[test]
    fn preset_dirs() {
        assert_eq!(Preset::Fig4Dcsbm.dir(), "fig4");
        assert_eq!(Preset::Table2.dir(), "table2");
    }
}
