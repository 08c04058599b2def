//! Graph-based Sybil detection methods expressed as low-pass graph filters.

pub mod bp;
pub mod community;
pub mod dataset;
pub mod detectors;
pub mod error;
pub mod eval;
pub mod generators;
pub mod graph;
pub mod shift;
pub mod spectral;

pub use community::{kmeans, nmi, spectral_clustering, Clustering};
pub use dataset::Dataset;
pub use detectors::{
    detect, CutoffRule, DetectorParams, Form, HeatForm, Method, Orientation, ScarVariant,
    ScoreVector, SpectrumCache,
};
pub use error::{Error, Result};
pub use eval::{
    auc, detectability_experiment, flip_labels, run_experiment, ExperimentSpec, ResultTable,
    ShiftFamily, Source, SweepAxis,
};
pub use generators::{
    detectability_margin, sample_block_model, sample_dcsbm, sample_labels, sample_sbm,
    BlockModelParams, LabelBudget, LabelBudgetBase, PlantedGraph, ThetaSpec,
};
pub use graph::{augment_graph, AugmentedGraph, DegreeVector, Graph, LabelSet, NodeMap};
pub use shift::{bethe_hessian_r, build_shift, ShiftKind, ShiftMatrix};
pub use spectral::{apply_filter, chebyshev_apply, chebyshev_coeffs, eig, FilterKernel, Spectrum};
