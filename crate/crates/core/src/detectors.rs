//! The Sybil detectors, each in its original propagation form and as a
//! low-pass graph filter.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::graph::{Graph, LabelSet};
use crate::shift::{build_shift, ShiftKind};
use crate::spectral::{
    apply_filter, chebyshev_apply, chebyshev_coeffs, eig, FilterKernel, Spectrum,
    DEFAULT_QUADRATURE_POINTS,
};

/// Which end of the ranking is suspicious.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    HigherIsSybil,
    HigherIsBenign,
}

impl Orientation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::HigherIsSybil => "higher-is-sybil",
            Self::HigherIsBenign => "higher-is-benign",
        }
    }
}

impl FromStr for Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "higher-is-sybil" => Ok(Self::HigherIsSybil),
            "higher-is-benign" => Ok(Self::HigherIsBenign),
            other => Err(Error::Format(format!("unknown orientation `{other}`"))),
        }
    }
}

/// Per-node scores with their orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    pub scores: Vec<f64>,
    pub orientation: Orientation,
}

impl ScoreVector {
    pub fn new(scores: Vec<f64>, orientation: Orientation) -> Result<Self> {
        if let Some(i) = scores.iter().position(|x| !x.is_finite()) {
            return Err(Error::NumericalFailure(format!(
                "score of node {i} is not finite ({})",
                scores[i]
            )));
        }
        Ok(Self {
            scores,
            orientation,
        })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Scores where larger always means more suspicious.
    pub fn sybil_scores(&self) -> Vec<f64> {
        match self.orientation {
            Orientation::HigherIsSybil => self.scores.clone(),
            Orientation::HigherIsBenign => self.scores.iter().map(|x| -x).collect(),
        }
    }

    /// Writes `node,score,orientation` rows under a header.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["node", "score", "orientation"])?;
        for (i, s) in self.scores.iter().enumerate() {
            w.write_record([
                i.to_string(),
                format!("{s:e}"),
                self.orientation.as_str().into(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Propagation form or closed-form spectral filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Form {
    Iterative,
    #[default]
    Spectral,
}

/// Exact dense filtering or Chebyshev approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HeatForm {
    #[default]
    Exact,
    Chebyshev,
}

/// Residual weight of SybilSCAR: `1/(2 d_max)` or `1/(2 d_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScarVariant {
    C,
    D,
}

/// Which eigenvectors of the Bethe–Hessian the ideal low-pass filter keeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CutoffRule {
    /// Eigenvalues `< 0`; if there are none, the `fallback_k` smallest.
    Negative { fallback_k: usize },
    /// Eigenvalues `<= cutoff`.
    Threshold(f64),
    /// The `k` smallest eigenvalues.
    Smallest(usize),
}

impl Default for CutoffRule {
    fn default() -> Self {
        Self::Negative { fallback_k: 2 }
    }
}

/// Detector parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorParams {
    /// CIA restart parameter.
    pub alpha: f64,
    /// SybilRank steps; `None` is `⌊log_b N⌋`.
    pub gamma: Option<u32>,
    /// Base `b` of the logarithm in the default `Γ`.
    pub gamma_log_base: f64,
    /// SybilSCAR residual prior.
    pub theta: f64,
    /// Heat kernel scale.
    pub s: f64,
    /// Regularization of the SybilHeat shift; `None` is `d_ave`.
    pub tau: Option<f64>,
    /// Chebyshev order.
    pub cheb_order: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub cutoff: CutoffRule,
    pub form: Form,
    pub heat_form: HeatForm,
    /// Unlocks SybilSCAR-D.
    pub allow_nonstandard: bool,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self {
            alpha: 0.85,
            gamma: None,
            gamma_log_base: std::f64::consts::E,
            theta: 0.5,
            s: 8.0,
            tau: None,
            cheb_order: 30,
            tol: 1e-10,
            max_iter: 10_000,
            cutoff: CutoffRule::default(),
            form: Form::default(),
            heat_form: HeatForm::default(),
            allow_nonstandard: false,
        }
    }
}

impl DetectorParams {
    /// `Γ`, defaulting to `⌊log N⌋` (at least 1).
    pub fn gamma_for(&self, n: usize) -> u32 {
        self.gamma.unwrap_or_else(|| {
            let g = ((n.max(1) as f64).ln() / self.gamma_log_base.ln()).floor();
            (g.max(1.0)) as u32
        })
    }

    /// `τ`, defaulting to the average degree of `g`.
    pub fn tau_for(&self, g: &Graph) -> f64 {
        self.tau.unwrap_or_else(|| g.degrees().d_ave)
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: String| {
            if ok {
                Ok(())
            } else {
                Err(Error::Parameter(msg))
            }
        };
        check(
            self.alpha >= 0.0 && self.alpha < 1.0,
            format!("alpha must be in [0, 1), got {}", self.alpha),
        )?;
        check(
            self.theta > 0.0 && self.theta <= 0.5,
            format!("theta must be in (0, 0.5], got {}", self.theta),
        )?;
        check(
            self.s >= 0.0,
            format!("s must be non-negative, got {}", self.s),
        )?;
        check(
            self.gamma_log_base > 1.0,
            format!("log base must exceed 1, got {}", self.gamma_log_base),
        )?;
        check(
            self.tol > 0.0,
            format!("tolerance must be positive, got {}", self.tol),
        )?;
        Ok(())
    }
}

/// Spectra of label-independent shifts of one graph, computed once and
/// shared between detectors. Use one cache per graph.
#[derive(Debug, Default)]
pub struct SpectrumCache {
    spectra: Mutex<HashMap<String, Arc<Spectrum>>>,
}

impl SpectrumCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Spectrum of `kind` over `g`, computing it on first use. The
    /// augmented Laplacian depends on labels and is never cached.
    pub fn get(&self, g: &Graph, kind: ShiftKind) -> Result<Arc<Spectrum>> {
        if kind == ShiftKind::AugmentedNormalizedLaplacian {
            return Err(Error::Parameter(
                "the augmented Laplacian depends on labels and cannot be cached".into(),
            ));
        }
        let key = format!("{kind:?}");
        if let Some(s) = self.spectra.lock().expect("cache poisoned").get(&key) {
            return Ok(Arc::clone(s));
        }
        // Computed outside the lock so distinct shifts can run concurrently.
        let spec = Arc::new(eig(&build_shift(g, kind, None)?)?);
        let mut map = self.spectra.lock().expect("cache poisoned");
        Ok(Arc::clone(map.entry(key).or_insert(spec)))
    }
}

fn spectrum_of(g: &Graph, kind: ShiftKind, cache: Option<&SpectrumCache>) -> Result<Arc<Spectrum>> {
    match cache {
        Some(c) => c.get(g, kind),
        None => Ok(Arc::new(eig(&build_shift(g, kind, None)?)?)),
    }
}

fn require_positive_degrees(g: &Graph) -> Result<Vec<f64>> {
    let d = g.degrees().as_f64();
    if let Some(i) = d.iter().position(|&x| x <= 0.0) {
        return Err(Error::DegenerateDegree(format!("node {i} is isolated")));
    }
    Ok(d)
}

/// `A D^{-1} x`.
fn walk_step(g: &Graph, d: &[f64], x: &[f64]) -> Vec<f64> {
    (0..g.n())
        .map(|i| g.neighbors(i).iter().map(|&j| x[j] / d[j]).sum())
        .collect()
}

fn linf_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Iterates `x <- step(x)` until the L∞ change drops below `tol` and so
/// does the remaining distance to the fixed point, estimated as
/// `change · ρ/(1-ρ)` from the observed contraction rate `ρ`.
fn fixed_point(
    mut x: Vec<f64>,
    tol: f64,
    max_iter: usize,
    step: impl Fn(&[f64]) -> Vec<f64>,
) -> Result<Vec<f64>> {
    let mut change = f64::INFINITY;
    for _ in 0..max_iter {
        let next = step(&x);
        let prev_change = change;
        change = linf_diff(&next, &x);
        x = next;
        if !change.is_finite() {
            break;
        }
        if change == 0.0 {
            return Ok(x);
        }
        let rho = (change / prev_change).clamp(0.0, 1.0 - 1e-6);
        if change < tol && change * rho / (1.0 - rho) < tol {
            return Ok(x);
        }
    }
    Err(Error::Convergence {
        iterations: max_iter,
        last_change: change,
    })
}

fn check_labels(g: &Graph, labels: &LabelSet) -> Result<()> {
    let n = g.n();
    match labels
        .sybil()
        .iter()
        .chain(labels.benign())
        .find(|&&i| i >= n)
    {
        Some(&i) => Err(Error::MalformedInput(format!(
            "label on node {i} outside 0..{n}"
        ))),
        None => Ok(()),
    }
}

/// CIA: random walk with restart from the labeled Sybils,
/// `p = (1-α)(I - α A D^{-1})^{-1} q`.
pub fn cia(
    g: &Graph,
    labels: &LabelSet,
    params: &DetectorParams,
    cache: Option<&SpectrumCache>,
) -> Result<ScoreVector> {
    check_labels(g, labels)?;
    if labels.sybil().is_empty() {
        return Err(Error::Parameter(
            "CIA needs at least one labeled Sybil".into(),
        ));
    }
    let n = g.n();
    let mut q = vec![0.0; n];
    for &i in labels.sybil() {
        q[i] = 1.0;
    }
    let alpha = params.alpha;
    let p = match params.form {
        Form::Iterative => {
            let d = require_positive_degrees(g)?;
            fixed_point(q.clone(), params.tol, params.max_iter, |x| {
                walk_step(g, &d, x)
                    .into_iter()
                    .zip(&q)
                    .map(|(w, qi)| alpha * w + (1.0 - alpha) * qi)
                    .collect()
            })?
        }
        Form::Spectral => {
            let spec = spectrum_of(g, ShiftKind::RandomWalkLaplacian, cache)?;
            apply_filter(&spec, &FilterKernel::Cia { alpha }, &q)?
        }
    };
    ScoreVector::new(p, Orientation::HigherIsSybil)
}

/// SybilRank: `Γ` steps of `A D^{-1}` from the benign labels, then
/// division by degree. Higher scores are more trusted.
pub fn sybilrank(
    g: &Graph,
    labels: &LabelSet,
    params: &DetectorParams,
    cache: Option<&SpectrumCache>,
) -> Result<ScoreVector> {
    check_labels(g, labels)?;
    if labels.benign().is_empty() {
        return Err(Error::Parameter(
            "SybilRank needs at least one labeled benign node".into(),
        ));
    }
    let n = g.n();
    let d = require_positive_degrees(g)?;
    let mass = 1.0 / labels.benign().len() as f64;
    let mut q = vec![0.0; n];
    for &i in labels.benign() {
        q[i] = mass;
    }
    let gamma = params.gamma_for(n);
    let walked = match params.form {
        Form::Iterative => (0..gamma).fold(q, |x, _| walk_step(g, &d, &x)),
        Form::Spectral => {
            let spec = spectrum_of(g, ShiftKind::RandomWalkLaplacian, cache)?;
            apply_filter(&spec, &FilterKernel::SybilRank { gamma }, &q)?
        }
    };
    let p = walked.iter().zip(&d).map(|(x, di)| x / di).collect();
    ScoreVector::new(p, Orientation::HigherIsBenign)
}

/// SybilWalk: probability that a walk on the augmented graph hits the
/// Sybil label node before the benign one,
/// `p = (I - D̂^{-1} A)^{-1} q_s`.
pub fn sybilwalk(g: &Graph, labels: &LabelSet, params: &DetectorParams) -> Result<ScoreVector> {
    check_labels(g, labels)?;
    if labels.sybil().is_empty() || labels.benign().is_empty() {
        return Err(Error::Parameter(
            "SybilWalk needs labeled Sybil and labeled benign nodes".into(),
        ));
    }
    let n = g.n();
    let dhat: Vec<f64> = (0..n)
        .map(|i| g.degree(i) as f64 + if labels.is_labeled(i) { 1.0 } else { 0.0 })
        .collect();
    let mut qs = vec![0.0; n];
    for &i in labels.sybil() {
        qs[i] = 1.0 / dhat[i];
    }

    let comps = g.components();
    let ncomp = comps.iter().copied().max().map_or(0, |c| c + 1);
    let mut anchored = vec![false; ncomp];
    for &i in labels.sybil().iter().chain(labels.benign()) {
        anchored[comps[i]] = true;
    }
    let stranded = (0..n).filter(|&i| !anchored[comps[i]]).count();
    if stranded > 0 {
        log::warn!("{stranded} nodes cannot reach a label node; their SybilWalk score is 0");
    }

    let p = match params.form {
        Form::Iterative => fixed_point(vec![0.0; n], params.tol, params.max_iter, |x| {
            (0..n)
                .map(|i| {
                    if dhat[i] == 0.0 {
                        return 0.0;
                    }
                    g.neighbors(i).iter().map(|&j| x[j]).sum::<f64>() / dhat[i] + qs[i]
                })
                .collect()
        })?,
        Form::Spectral => {
            let shift = build_shift(g, ShiftKind::AugmentedNormalizedLaplacian, Some(labels))?;
            apply_filter(&eig(&shift)?, &FilterKernel::Inverse, &qs)?
        }
    };
    ScoreVector::new(p, Orientation::HigherIsSybil)
}

/// SybilSCAR: residual propagation `p̌ = (I - 2W̌)^{-1} q̌` with
/// `q̌ = ±θ` on the labels; the returned score is `p̌ + 1/2`.
///
/// Variant D uses the random-walk Laplacian, whose zero eigenvalue makes
/// the iteration unstable; it is refused unless
/// `params.allow_nonstandard` is set.
pub fn sybilscar(
    g: &Graph,
    labels: &LabelSet,
    params: &DetectorParams,
    variant: ScarVariant,
    cache: Option<&SpectrumCache>,
) -> Result<ScoreVector> {
    check_labels(g, labels)?;
    if variant == ScarVariant::D && !params.allow_nonstandard {
        return Err(Error::Nonstandard("SybilSCAR-D".into()));
    }
    let n = g.n();
    let q = labels.signed_prior(n, params.theta);
    let residual = match (variant, params.form) {
        (ScarVariant::C, Form::Iterative) => {
            let dmax = g.degrees().d_max as f64;
            if dmax == 0.0 {
                q
            } else {
                fixed_point(q.clone(), params.tol, params.max_iter, |x| {
                    g.adjacency_apply(x)
                        .into_iter()
                        .zip(&q)
                        .map(|(a, qi)| a / dmax + qi)
                        .collect()
                })?
            }
        }
        (ScarVariant::D, Form::Iterative) => {
            let d = require_positive_degrees(g)?;
            fixed_point(q.clone(), params.tol, params.max_iter, |x| {
                walk_step(g, &d, x)
                    .into_iter()
                    .zip(&q)
                    .map(|(a, qi)| a + qi)
                    .collect()
            })?
        }
        (ScarVariant::C, Form::Spectral) => {
            if q.iter().all(|&x| x == 0.0) {
                q
            } else {
                let spec = spectrum_of(g, ShiftKind::MaxDegreeLaplacian, cache)?;
                apply_filter(&spec, &FilterKernel::Inverse, &q)?
            }
        }
        (ScarVariant::D, Form::Spectral) => {
            let spec = spectrum_of(g, ShiftKind::RandomWalkLaplacian, cache)?;
            apply_filter(&spec, &FilterKernel::Inverse, &q)?
        }
    };
    let p = residual.into_iter().map(|x| x + 0.5).collect();
    ScoreVector::new(p, Orientation::HigherIsSybil)
}

/// Number of leading eigenvalues kept by `rule`.
fn band_size(eigenvalues: &[f64], rule: CutoffRule) -> usize {
    match rule {
        CutoffRule::Negative { fallback_k } => {
            match eigenvalues.iter().filter(|&&l| l < 0.0).count() {
                0 => fallback_k.min(eigenvalues.len()),
                m => m,
            }
        }
        CutoffRule::Threshold(c) => eigenvalues.iter().filter(|&&l| l <= c).count(),
        CutoffRule::Smallest(k) => k.min(eigenvalues.len()),
    }
}

/// Spectral SybilBelief: ideal low-pass filtering of the signed prior over
/// the Bethe–Hessian `H(r)`.
pub fn sybilbelief_spectral(
    g: &Graph,
    labels: &LabelSet,
    rule: CutoffRule,
    cache: Option<&SpectrumCache>,
) -> Result<ScoreVector> {
    check_labels(g, labels)?;
    let kind = ShiftKind::bethe_hessian(g)?;
    let spec = spectrum_of(g, kind, cache)?;
    let m = band_size(spec.eigenvalues(), rule);
    if m == 0 {
        return Err(Error::EmptyBand);
    }
    let q = labels.signed_prior(g.n(), 1.0);
    // The kept band is a prefix of the ascending eigenvalues.
    let mut qhat = spec.gft(&q)?;
    qhat[m..].iter_mut().for_each(|x| *x = 0.0);
    let p = spec.igft(&qhat)?;
    ScoreVector::new(p, Orientation::HigherIsSybil)
}

/// SybilHeat: `p = e^{-s 𝓛_τ} q` for the signed prior `q`, exactly or by
/// Chebyshev expansion.
pub fn sybilheat(
    g: &Graph,
    labels: &LabelSet,
    params: &DetectorParams,
    cache: Option<&SpectrumCache>,
) -> Result<ScoreVector> {
    check_labels(g, labels)?;
    let tau = params.tau_for(g);
    let d_min = g.degrees().d_min as f64;
    if !(tau > -d_min) {
        return Err(Error::Parameter(format!(
            "tau must exceed -d_min = {}, got {tau}",
            -d_min
        )));
    }
    let kind = ShiftKind::RegularizedLaplacian { tau };
    let q = labels.signed_prior(g.n(), 1.0);
    let kernel = FilterKernel::Heat { s: params.s };
    let p = match params.heat_form {
        HeatForm::Exact => apply_filter(&*spectrum_of(g, kind, cache)?, &kernel, &q)?,
        HeatForm::Chebyshev => {
            let shift = build_shift(g, kind, None)?;
            let coeffs = chebyshev_coeffs(&kernel, params.cheb_order, DEFAULT_QUADRATURE_POINTS);
            chebyshev_apply(&shift, &coeffs, &q)?
        }
    };
    ScoreVector::new(p, Orientation::HigherIsSybil)
}

/// Method identifiers accepted by [`detect`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Cia,
    SybilRank,
    SybilWalk,
    SybilScarC,
    SybilScarD,
    SybilBelief,
    SybilHeat,
}

impl Method {
    /// The six methods used in experiments.
    pub const STANDARD: [Method; 6] = [
        Method::Cia,
        Method::SybilRank,
        Method::SybilWalk,
        Method::SybilScarC,
        Method::SybilBelief,
        Method::SybilHeat,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Self::Cia => "cia",
            Self::SybilRank => "sybilrank",
            Self::SybilWalk => "sybilwalk",
            Self::SybilScarC => "sybilscar-c",
            Self::SybilScarD => "sybilscar-d",
            Self::SybilBelief => "sybilbelief",
            Self::SybilHeat => "sybilheat",
        }
    }

    pub fn is_nonstandard(&self) -> bool {
        *self == Self::SybilScarD
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Method::STANDARD
            .iter()
            .chain(&[Method::SybilScarD])
            .find(|m| m.id() == lower)
            .copied()
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

/// Runs `method` with `params`, sharing spectra through `cache` when given.
pub fn detect(
    method: Method,
    g: &Graph,
    labels: &LabelSet,
    params: &DetectorParams,
    cache: Option<&SpectrumCache>,
) -> Result<ScoreVector> {
    params.validate()?;
    match method {
        Method::Cia => cia(g, labels, params, cache),
        Method::SybilRank => sybilrank(g, labels, params, cache),
        Method::SybilWalk => sybilwalk(g, labels, params),
        Method::SybilScarC => sybilscar(g, labels, params, ScarVariant::C, cache),
        Method::SybilScarD => sybilscar(g, labels, params, ScarVariant::D, cache),
        Method::SybilBelief => sybilbelief_spectral(g, labels, params.cutoff, cache),
        Method::SybilHeat => sybilheat(g, labels, params, cache),
    }
}

/// Convenience wrapper parsing a method id.
pub fn detect_by_id(
    id: &str,
    g: &Graph,
    labels: &LabelSet,
    params: &DetectorParams,
) -> Result<ScoreVector> {
    detect(id.parse()?, g, labels, params, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle_with_tail() -> Graph {
        Graph::from_edge_list(&[(0, 1), (1, 2), (0, 2), (2, 3)], 4).unwrap()
    }

    #[test]
    fn method_ids_roundtrip() {
        for m in Method::STANDARD.iter().chain(&[Method::SybilScarD]) {
            assert_eq!(m.id().parse::<Method>().unwrap(), *m);
        }
        assert!(matches!(
            "pagerank".parse::<Method>(),
            Err(Error::UnknownMethod(_))
        ));
    }

    #[test]
    fn gamma_default_is_floor_ln() {
        let p = DetectorParams::default();
        assert_eq!(p.gamma_for(34), 3);
        assert_eq!(p.gamma_for(1000), 6);
        let p2 = DetectorParams {
            gamma_log_base: 2.0,
            ..p
        };
        assert_eq!(p2.gamma_for(1024), 10);
    }

    #[test]
    fn cia_alpha_zero_returns_prior() {
        let g = triangle_with_tail();
        let labels = LabelSet::new(4, [3], [0]).unwrap();
        for form in [Form::Iterative, Form::Spectral] {
            let params = DetectorParams {
                alpha: 0.0,
                form,
                ..Default::default()
            };
            let p = cia(&g, &labels, &params, None).unwrap();
            for (a, b) in p.scores.iter().zip([0.0, 0.0, 0.0, 1.0]) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sybilscar_no_labels_is_half() {
        let g = triangle_with_tail();
        for form in [Form::Iterative, Form::Spectral] {
            let params = DetectorParams {
                form,
                ..Default::default()
            };
            let p = sybilscar(&g, &LabelSet::empty(), &params, ScarVariant::C, None).unwrap();
            assert!(p.scores.iter().all(|&x| (x - 0.5).abs() < 1e-15));
        }
    }

    #[test]
    fn sybilscar_d_gated() {
        let g = triangle_with_tail();
        let labels = LabelSet::new(4, [3], [0]).unwrap();
        let err = detect(
            Method::SybilScarD,
            &g,
            &labels,
            &DetectorParams::default(),
            None,
        );
        assert!(matches!(err, Err(Error::Nonstandard(_))));
        let params = DetectorParams {
            allow_nonstandard: true,
            ..Default::default()
        };
        // q̌ sums to zero, so the zero mode of 𝓛_rw is not excited.
        assert!(detect(Method::SybilScarD, &g, &labels, &params, None).is_ok());
        let lopsided = LabelSet::new(4, [3, 1], [0]).unwrap();
        assert!(matches!(
            detect(Method::SybilScarD, &g, &lopsided, &params, None),
            Err(Error::SingularFilter { .. })
        ));
    }

    #[test]
    fn sybilwalk_isolated_sybil_scores_one() {
        let g = Graph::from_edge_list(&[(0, 1), (1, 2)], 4).unwrap();
        let labels = LabelSet::new(4, [3], [0]).unwrap();
        for form in [Form::Iterative, Form::Spectral] {
            let params = DetectorParams {
                form,
                ..Default::default()
            };
            let p = sybilwalk(&g, &labels, &params).unwrap();
            assert!((p.scores[3] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sybilbelief_full_band_is_identity() {
        let g = triangle_with_tail();
        let labels = LabelSet::new(4, [3], [0]).unwrap();
        let p = sybilbelief_spectral(&g, &labels, CutoffRule::Smallest(4), None).unwrap();
        for (a, b) in p.scores.iter().zip(labels.signed_prior(4, 1.0)) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(matches!(
            sybilbelief_spectral(&g, &labels, CutoffRule::Threshold(-100.0), None),
            Err(Error::EmptyBand)
        ));
    }

    #[test]
    fn sybilheat_zero_scale_is_identity() {
        let g = triangle_with_tail();
        let labels = LabelSet::new(4, [3], [0]).unwrap();
        for heat_form in [HeatForm::Exact, HeatForm::Chebyshev] {
            let params = DetectorParams {
                s: 0.0,
                heat_form,
                ..Default::default()
            };
            let p = sybilheat(&g, &labels, &params, None).unwrap();
            for (a, b) in p.scores.iter().zip(labels.signed_prior(4, 1.0)) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cache_reuses_spectra() {
        let g = triangle_with_tail();
        let cache = SpectrumCache::new();
        let a = cache.get(&g, ShiftKind::RandomWalkLaplacian).unwrap();
        let b = cache.get(&g, ShiftKind::RandomWalkLaplacian).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert!(cache
            .get(&g, ShiftKind::AugmentedNormalizedLaplacian)
            .is_err());
    }

    #[test]
    fn score_csv_layout() {
        let s = ScoreVector::new(vec![0.5, -1.0], Orientation::HigherIsBenign).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("node,score,orientation\n0,5e-1,higher-is-benign\n"));
        assert!(ScoreVector::new(vec![f64::NAN], Orientation::HigherIsSybil).is_err());
    }
}
