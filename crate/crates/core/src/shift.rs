//! The five shift matrices: random-walk Laplacian, augmented normalized
//! Laplacian, maximum-degree Laplacian, Bethe–Hessian and regularized
//! Laplacian.

use std::fmt;

use faer::Mat;

use crate::error::{Error, Result};
use crate::graph::{Graph, LabelSet};

/// Which operator to build over a graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShiftKind {
    /// `I - A D^{-1}`
    RandomWalkLaplacian,
    /// `I - (D + Î)^{-1} A`, `Î` marking labeled nodes.
    AugmentedNormalizedLaplacian,
    /// `I - A / d_max`
    MaxDegreeLaplacian,
    /// `(r² - 1) I + D - r A`
    BetheHessian { r: f64 },
    /// `I - D_τ^{-1/2} A D_τ^{-1/2}` with `D_τ = D + τ I`.
    RegularizedLaplacian { tau: f64 },
}

impl ShiftKind {
    /// Bethe–Hessian at `r = sqrt(Σd²/Σd - 1)`.
    pub fn bethe_hessian(g: &Graph) -> Result<Self> {
        Ok(Self::BetheHessian {
            r: bethe_hessian_r(g)?,
        })
    }

    /// Regularized Laplacian at `τ = d_ave`.
    pub fn regularized(g: &Graph) -> Self {
        Self::RegularizedLaplacian {
            tau: g.degrees().d_ave,
        }
    }

    /// The five kinds at their default parameters for `g`.
    pub fn all_defaults(g: &Graph) -> Result<Vec<Self>> {
        Ok(vec![
            Self::RandomWalkLaplacian,
            Self::AugmentedNormalizedLaplacian,
            Self::MaxDegreeLaplacian,
            Self::bethe_hessian(g)?,
            Self::regularized(g),
        ])
    }

    pub fn short_name(&self) -> &'static str {
        match self {
            Self::RandomWalkLaplacian => "rw",
            Self::AugmentedNormalizedLaplacian => "aug",
            Self::MaxDegreeLaplacian => "max",
            Self::BetheHessian { .. } => "bethe",
            Self::RegularizedLaplacian { .. } => "reg",
        }
    }

    pub fn is_symmetric(&self) -> bool {
        matches!(
            self,
            Self::MaxDegreeLaplacian
                | Self::BetheHessian { .. }
                | Self::RegularizedLaplacian { .. }
        )
    }
}

impl fmt::Display for ShiftKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

/// `r = [(Σ d_i²)/(Σ d_i) - 1]^{1/2}`.
pub fn bethe_hessian_r(g: &Graph) -> Result<f64> {
    if g.num_edges() == 0 {
        return Err(Error::DegenerateDegree(
            "Bethe-Hessian r needs at least one edge".into(),
        ));
    }
    let d = g.degrees().d;
    let sum: f64 = d.iter().map(|&x| x as f64).sum();
    let sum_sq: f64 = d.iter().map(|&x| (x * x) as f64).sum();
    Ok((sum_sq / sum - 1.0).max(0.0).sqrt())
}

/// A sparse shift matrix whose off-diagonal pattern is the graph's edge set.
///
/// Stored as a diagonal plus CSR off-diagonal values aligned with the
/// graph's neighbor lists.
#[derive(Debug, Clone)]
pub struct ShiftMatrix {
    kind: ShiftKind,
    diag: Vec<f64>,
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    /// `p` with `S = P N P^{-1}` for a symmetric `N`, `P = diag(p)`.
    similarity: Option<Vec<f64>>,
}

/// Builds `kind` over `g`. Labels are required for (and only used by) the
/// augmented normalized Laplacian.
pub fn build_shift(g: &Graph, kind: ShiftKind, labels: Option<&LabelSet>) -> Result<ShiftMatrix> {
    let n = g.n();
    let deg = g.degrees();
    let d = deg.as_f64();
    let require_positive = |values: &[f64], what: &str| -> Result<()> {
        if let Some(i) = values.iter().position(|&x| x <= 0.0) {
            return Err(Error::DegenerateDegree(format!(
                "node {i} has non-positive {what} {}",
                values[i]
            )));
        }
        Ok(())
    };

    let mut offsets = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(2 * g.num_edges());
    let mut vals = Vec::with_capacity(2 * g.num_edges());
    offsets.push(0);
    let mut fill = |weight: &dyn Fn(usize, usize) -> f64| {
        for i in 0..n {
            for &j in g.neighbors(i) {
                cols.push(j);
                vals.push(weight(i, j));
            }
            offsets.push(cols.len());
        }
    };

    let (diag, similarity) = match kind {
        ShiftKind::RandomWalkLaplacian => {
            require_positive(&d, "degree")?;
            fill(&|_, j| -1.0 / d[j]);
            (vec![1.0; n], Some(d.iter().map(|x| x.sqrt()).collect()))
        }
        ShiftKind::AugmentedNormalizedLaplacian => {
            let labels = labels.ok_or_else(|| {
                Error::Parameter("augmented normalized Laplacian needs a label set".into())
            })?;
            let dhat: Vec<f64> = (0..n)
                .map(|i| d[i] + if labels.is_labeled(i) { 1.0 } else { 0.0 })
                .collect();
            require_positive(&dhat, "augmented degree")?;
            fill(&|i, _| -1.0 / dhat[i]);
            (
                vec![1.0; n],
                Some(dhat.iter().map(|x| 1.0 / x.sqrt()).collect()),
            )
        }
        ShiftKind::MaxDegreeLaplacian => {
            if deg.d_max == 0 {
                return Err(Error::DegenerateDegree("graph has no edges".into()));
            }
            let dmax = deg.d_max as f64;
            fill(&|_, _| -1.0 / dmax);
            (vec![1.0; n], None)
        }
        ShiftKind::BetheHessian { r } => {
            fill(&|_, _| -r);
            (d.iter().map(|&di| r * r - 1.0 + di).collect(), None)
        }
        ShiftKind::RegularizedLaplacian { tau } => {
            let dtau: Vec<f64> = d.iter().map(|&di| di + tau).collect();
            require_positive(&dtau, "regularized degree")?;
            fill(&|i, j| -1.0 / (dtau[i] * dtau[j]).sqrt());
            (vec![1.0; n], None)
        }
    };

    Ok(ShiftMatrix {
        kind,
        diag,
        offsets,
        cols,
        vals,
        similarity,
    })
}

impl ShiftMatrix {
    pub fn kind(&self) -> ShiftKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.kind.is_symmetric()
    }

    /// Closed interval known to contain every eigenvalue, when available.
    pub fn spectral_support(&self) -> Option<(f64, f64)> {
        match self.kind {
            ShiftKind::BetheHessian { .. } => None,
            ShiftKind::RegularizedLaplacian { tau } if tau < 0.0 => None,
            _ => Some((0.0, 2.0)),
        }
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// Diagonal `p` of the similarity `S = P N P^{-1}` that symmetrizes a
    /// non-symmetric kind.
    pub fn similarity(&self) -> Option<&[f64]> {
        self.similarity.as_deref()
    }

    /// Off-diagonal nonzeros of row `i` as `(column, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[i]..self.offsets[i + 1];
        self.cols[range.clone()]
            .iter()
            .copied()
            .zip(self.vals[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        let range = self.offsets[i]..self.offsets[i + 1];
        match self.cols[range.clone()].binary_search(&j) {
            Ok(pos) => self.vals[range.start + pos],
            Err(_) => 0.0,
        }
    }

    /// Sparse matrix-vector product `S x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        self.apply_into(x, &mut out);
        out
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = self.diag[i] * x[i];
            for k in self.offsets[i]..self.offsets[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *o = acc;
        }
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n())
            .map(|i| self.diag[i].abs() + self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let n = self.n();
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// The symmetric matrix `N = P^{-1} S P` (or `S` itself for symmetric
    /// kinds), explicitly symmetrized.
    pub fn symmetric_form(&self) -> Mat<f64> {
        let n = self.n();
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            for (j, v) in self.row(i) {
                let value = match &self.similarity {
                    Some(p) => v * p[j] / p[i],
                    None => v,
                };
                m[(i, j)] += 0.5 * value;
                m[(j, i)] += 0.5 * value;
            }
        }
        m
    }
}

/// Applies the non-symmetric regularized Laplacian `I - D_c^{-1} A` to `v`.
pub fn regularized_rw_apply(g: &Graph, c: f64, v: &[f64]) -> Result<Vec<f64>> {
    let av = g.adjacency_apply(v);
    (0..g.n())
        .map(|i| {
            let dc = g.degree(i) as f64 + c;
            if dc == 0.0 {
                Err(Error::DegenerateDegree(format!("node {i} has d + c = 0")))
            } else {
                Ok(v[i] - av[i] / dc)
            }
        })
        .collect()
}
