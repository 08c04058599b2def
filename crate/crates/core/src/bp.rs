//! Loopy belief propagation on the pairwise Ising-type Markov random field,
//! its one-parameter message form, the non-backtracking Jacobian and the
//! magnetization identities linking it to the Bethe–Hessian.
//!
//! Directed edges are numbered from the undirected edge list: if edge `e`
//! is `(u, v)` with `u < v`, then `2e` is `u → v` and `2e + 1` is `v → u`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Directed-edge bookkeeping shared by the message updates.
#[derive(Debug, Clone)]
struct DirectedEdges {
    src: Vec<usize>,
    dst: Vec<usize>,
    /// Directed ids `k → i` for every neighbor `k`, in neighbor order.
    incoming_offsets: Vec<usize>,
    incoming: Vec<usize>,
}

impl DirectedEdges {
    fn new(g: &Graph) -> Self {
        let m = g.num_edges();
        let mut src = Vec::with_capacity(2 * m);
        let mut dst = Vec::with_capacity(2 * m);
        for &(u, v) in g.edges() {
            src.extend([u, v]);
            dst.extend([v, u]);
        }
        let mut incoming_offsets = vec![0];
        let mut incoming = Vec::with_capacity(2 * m);
        for i in 0..g.n() {
            for &k in g.neighbors(i) {
                let e = g.edge_index(i, k).expect("neighbor without edge");
                incoming.push(if k < i { 2 * e } else { 2 * e + 1 });
            }
            incoming_offsets.push(incoming.len());
        }
        Self {
            src,
            dst,
            incoming_offsets,
            incoming,
        }
    }

    fn len(&self) -> usize {
        self.src.len()
    }

    fn incoming(&self, i: usize) -> &[usize] {
        &self.incoming[self.incoming_offsets[i]..self.incoming_offsets[i + 1]]
    }
}

/// Pairwise MRF `p(s) ∝ Π φ_i(s_i) Π ψ_ij(s_i, s_j)` with
/// `φ_i(s) ∝ exp(βθ_i s)` and `ψ_ij(s, t) ∝ exp(βJ_ij s t)`.
///
/// Normalized, `φ_i(+1) = q_i` and `ψ_ij(s, s) = w_ij`, with
/// `q = e^{βθ}/(e^{βθ} + e^{-βθ})` and likewise for `w` and `J`.
#[derive(Debug, Clone)]
pub struct PairwiseMrf {
    graph: Graph,
    beta: f64,
    field: Vec<f64>,
    coupling: Vec<f64>,
    directed: DirectedEdges,
}

fn logistic_prob(x: f64) -> f64 {
    0.5 * (1.0 + x.tanh())
}

impl PairwiseMrf {
    /// Exponential-family form: local fields `θ_i` and couplings `J_e`
    /// indexed like `graph.edges()`.
    pub fn new(graph: Graph, beta: f64, field: Vec<f64>, coupling: Vec<f64>) -> Result<Self> {
        if field.len() != graph.n() {
            return Err(Error::DimensionMismatch {
                expected: graph.n(),
                actual: field.len(),
            });
        }
        if coupling.len() != graph.num_edges() {
            return Err(Error::DimensionMismatch {
                expected: graph.num_edges(),
                actual: coupling.len(),
            });
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::Parameter(format!(
                "beta must be positive, got {beta}"
            )));
        }
        if field.iter().chain(&coupling).any(|x| !x.is_finite()) {
            return Err(Error::Parameter(
                "fields and couplings must be finite".into(),
            ));
        }
        let directed = DirectedEdges::new(&graph);
        Ok(Self {
            graph,
            beta,
            field,
            coupling,
            directed,
        })
    }

    /// Probability form: node priors `q_i = φ_i(+1)` and edge weights
    /// `w_e = ψ_e(s, s)`, all in `(0, 1)`.
    pub fn from_probabilities(graph: Graph, beta: f64, q: &[f64], w: &[f64]) -> Result<Self> {
        if let Some(x) = q.iter().chain(w).find(|x| !(**x > 0.0 && **x < 1.0)) {
            return Err(Error::Parameter(format!(
                "priors and edge weights must lie in (0, 1), got {x}"
            )));
        }
        let to_param = |p: &f64| (2.0 * p - 1.0).atanh() / beta;
        let field = q.iter().map(to_param).collect();
        let coupling = w.iter().map(to_param).collect();
        Self::new(graph, beta, field, coupling)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn field(&self) -> &[f64] {
        &self.field
    }

    pub fn coupling(&self) -> &[f64] {
        &self.coupling
    }

    /// `q_i = φ_i(+1)` after normalization.
    pub fn node_priors(&self) -> Vec<f64> {
        self.field
            .iter()
            .map(|t| logistic_prob(self.beta * t))
            .collect()
    }

    /// `w_e = ψ_e(+1, +1)` after normalization over `s_i s_j`.
    pub fn edge_weights(&self) -> Vec<f64> {
        self.coupling
            .iter()
            .map(|j| logistic_prob(self.beta * j))
            .collect()
    }

    /// Number of directed edges, `2|E|`.
    pub fn num_directed(&self) -> usize {
        self.directed.len()
    }

    /// Source and target of a directed edge id.
    pub fn directed_edge(&self, id: usize) -> (usize, usize) {
        (self.directed.src[id], self.directed.dst[id])
    }

    /// `β θ_i + Σ_{k ∈ ∂i} ν_ki`.
    fn cavity_total(&self, nu: &[f64], i: usize) -> f64 {
        self.beta * self.field[i]
            + self
                .directed
                .incoming(i)
                .iter()
                .map(|&k| nu[k])
                .sum::<f64>()
    }
}

/// Messages `μ_ij(±1)` on every directed edge.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageSet {
    /// `[μ(+1), μ(-1)]` per directed edge id.
    pub mu: Vec<[f64; 2]>,
}

impl MessageSet {
    /// `μ = (1/2, 1/2)` everywhere, i.e. `ν = 0`.
    pub fn uniform(num_directed: usize) -> Self {
        Self {
            mu: vec![[0.5, 0.5]; num_directed],
        }
    }

    /// From one-parameter messages, `μ(±1) = (1 ± tanh ν)/2`.
    pub fn from_nu(nu: &[f64]) -> Self {
        Self {
            mu: nu
                .iter()
                .map(|&v| {
                    let t = v.tanh();
                    [0.5 * (1.0 + t), 0.5 * (1.0 - t)]
                })
                .collect(),
        }
    }

    /// `ν = atanh(μ(+1) - μ(-1))`.
    pub fn nu(&self) -> Vec<f64> {
        self.mu.iter().map(|m| (m[0] - m[1]).atanh()).collect()
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }
}

/// Knobs for [`lbp_run`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbpOptions {
    pub max_iter: usize,
    pub tol: f64,
    /// Weight of the old message in `μ ← δ μ_old + (1-δ) μ_new`.
    pub damping: f64,
    pub record_trajectory: bool,
}

impl Default for LbpOptions {
    fn default() -> Self {
        Self {
            max_iter: 1000,
            tol: 1e-12,
            damping: 0.5,
            record_trajectory: false,
        }
    }
}

/// Outcome of [`lbp_run`]. Non-convergence is reported, not an error.
#[derive(Debug, Clone)]
pub struct LbpResult {
    /// `[b_i(+1), b_i(-1)]` per node.
    pub marginals: Vec<[f64; 2]>,
    pub messages: MessageSet,
    pub converged: bool,
    pub iterations: usize,
    /// `μ(+1)` per directed edge after every iteration, when recorded.
    pub trajectory: Vec<Vec<f64>>,
}

impl LbpResult {
    /// `b_i(+1) - b_i(-1)`.
    pub fn expected_spins(&self) -> Vec<f64> {
        self.marginals.iter().map(|b| b[0] - b[1]).collect()
    }

    /// Writes the recorded trajectory as `iter,edge,src,dst,mu_plus`.
    pub fn write_trajectory_csv<W: Write>(&self, mrf: &PairwiseMrf, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["iter", "edge", "src", "dst", "mu_plus"])?;
        for (t, row) in self.trajectory.iter().enumerate() {
            for (id, mu) in row.iter().enumerate() {
                let (s, d) = mrf.directed_edge(id);
                w.write_record([
                    (t + 1).to_string(),
                    id.to_string(),
                    s.to_string(),
                    d.to_string(),
                    format!("{mu:e}"),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `ln φ_i(s)` for `s = +1, -1`, normalized.
fn log_node_potential(mrf: &PairwiseMrf, i: usize) -> [f64; 2] {
    let x = mrf.beta * mrf.field[i];
    let z = log_add_exp(x, -x);
    [x - z, -x - z]
}

/// Per-node `ln φ_i(s) + Σ_{k ∈ ∂i} ln μ_ki(s)`.
fn log_beliefs(mrf: &PairwiseMrf, msgs: &MessageSet) -> Vec<[f64; 2]> {
    (0..mrf.graph.n())
        .map(|i| {
            let mut acc = log_node_potential(mrf, i);
            for &k in mrf.directed.incoming(i) {
                acc[0] += msgs.mu[k][0].ln();
                acc[1] += msgs.mu[k][1].ln();
            }
            acc
        })
        .collect()
}

/// One synchronous message update
/// `μ_ij(s_j) ∝ Σ_{s_i} φ_i(s_i) ψ_ij(s_i, s_j) Π_{k ∈ ∂i∖j} μ_ki(s_i)`,
/// followed by damping.
pub fn lbp_step(mrf: &PairwiseMrf, msgs: &MessageSet, damping: f64) -> MessageSet {
    let beliefs = log_beliefs(mrf, msgs);
    let mu = (0..mrf.num_directed())
        .map(|id| {
            let (i, _) = mrf.directed_edge(id);
            let back = id ^ 1;
            // Cavity: remove the message coming back from j.
            let lp = beliefs[i][0] - msgs.mu[back][0].ln();
            let lm = beliefs[i][1] - msgs.mu[back][1].ln();
            let bj = mrf.beta * mrf.coupling[id / 2];
            // s_j = +1 gathers s_i = +1 with e^{βJ} and s_i = -1 with e^{-βJ}.
            let plus = log_add_exp(lp + bj, lm - bj);
            let minus = log_add_exp(lp - bj, lm + bj);
            let z = log_add_exp(plus, minus);
            let fresh = [(plus - z).exp(), (minus - z).exp()];
            let old = msgs.mu[id];
            let a = damping * old[0] + (1.0 - damping) * fresh[0];
            let b = damping * old[1] + (1.0 - damping) * fresh[1];
            let s = a + b;
            [a / s, b / s]
        })
        .collect();
    MessageSet { mu }
}

/// Beliefs `b_i(s) ∝ φ_i(s) Π_{k ∈ ∂i} μ_ki(s)`.
pub fn marginals(mrf: &PairwiseMrf, msgs: &MessageSet) -> Vec<[f64; 2]> {
    log_beliefs(mrf, msgs)
        .into_iter()
        .map(|[lp, lm]| {
            let z = log_add_exp(lp, lm);
            [(lp - z).exp(), (lm - z).exp()]
        })
        .collect()
}

/// Synchronous damped loopy BP from uniform messages until the L∞ change
/// of `μ(+1)` falls below `tol` or `max_iter` is reached.
pub fn lbp_run(mrf: &PairwiseMrf, opts: &LbpOptions) -> LbpResult {
    let mut msgs = MessageSet::uniform(mrf.num_directed());
    let mut trajectory = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let next = lbp_step(mrf, &msgs, opts.damping);
        let change = next
            .mu
            .iter()
            .zip(&msgs.mu)
            .fold(0.0f64, |m, (a, b)| m.max((a[0] - b[0]).abs()));
        msgs = next;
        iterations += 1;
        if opts.record_trajectory {
            trajectory.push(msgs.mu.iter().map(|m| m[0]).collect());
        }
        if change < opts.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("loopy BP did not converge in {iterations} iterations");
    }
    LbpResult {
        marginals: marginals(mrf, &msgs),
        messages: msgs,
        converged,
        iterations,
        trajectory,
    }
}

/// One undamped step in the one-parameter form,
/// `tanh ν_ij = tanh(βJ_ij) tanh(βθ_i + Σ_{k ∈ ∂i∖j} ν_ki)`.
pub fn nu_update(mrf: &PairwiseMrf, nu: &[f64]) -> Result<Vec<f64>> {
    if nu.len() != mrf.num_directed() {
        return Err(Error::DimensionMismatch {
            expected: mrf.num_directed(),
            actual: nu.len(),
        });
    }
    let totals: Vec<f64> = (0..mrf.graph.n())
        .map(|i| mrf.cavity_total(nu, i))
        .collect();
    Ok((0..mrf.num_directed())
        .map(|id| {
            let (i, _) = mrf.directed_edge(id);
            let h = totals[i] - nu[id ^ 1];
            ((mrf.beta * mrf.coupling[id / 2]).tanh() * h.tanh()).atanh()
        })
        .collect())
}

/// `m_i = tanh(βθ_i + Σ_{k ∈ ∂i} ν_ki)`.
pub fn magnetization(mrf: &PairwiseMrf, nu: &[f64]) -> Result<Vec<f64>> {
    if nu.len() != mrf.num_directed() {
        return Err(Error::DimensionMismatch {
            expected: mrf.num_directed(),
            actual: nu.len(),
        });
    }
    Ok((0..mrf.graph.n())
        .map(|i| mrf.cavity_total(nu, i).tanh())
        .collect())
}

/// Sparse `2|E| × 2|E|` matrix supported on non-backtracking pairs:
/// entry `(i→j, k→l)` is nonzero only if `l = i` and `k ≠ j`.
#[derive(Debug, Clone)]
pub struct NonBacktracking {
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl NonBacktracking {
    /// `B_{ij,kl} = δ_il (1 - δ_jk)`.
    pub fn unweighted(g: &Graph) -> Self {
        let directed = DirectedEdges::new(g);
        Self::assemble(&directed, |_, _| 1.0)
    }

    fn assemble(directed: &DirectedEdges, weight: impl Fn(usize, usize) -> f64) -> Self {
        let mut offsets = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for id in 0..directed.len() {
            let i = directed.src[id];
            for &kl in directed.incoming(i) {
                if kl != id ^ 1 {
                    cols.push(kl);
                    vals.push(weight(id, kl));
                }
            }
            offsets.push(cols.len());
        }
        Self {
            offsets,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[r]..self.offsets[r + 1];
        self.cols[range.clone()]
            .iter()
            .copied()
            .zip(self.vals[range].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(k, _)| k == c).map_or(0.0, |(_, v)| v)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    /// Spectral radius by power iteration. For entrywise non-negative
    /// matrices this iterates `B + I`, whose dominant eigenvalue is
    /// `ρ(B) + 1` and which is aperiodic; otherwise it averages the
    /// per-step growth of `‖B^t x‖`.
    pub fn spectral_radius(&self, max_iter: usize, tol: f64) -> f64 {
        let n = self.dim();
        if n == 0 || self.nnz() == 0 {
            return 0.0;
        }
        if self.vals.iter().all(|&v| v >= 0.0) {
            let mut x = vec![1.0 / n as f64; n];
            let mut estimate = f64::INFINITY;
            for _ in 0..max_iter {
                let bx = self.apply(&x);
                let y: Vec<f64> = bx.iter().zip(&x).map(|(b, xi)| b + xi).collect();
                let s: f64 = y.iter().sum();
                let next = s - 1.0;
                x = y.into_iter().map(|v| v / s).collect();
                if (next - estimate).abs() < tol * next.abs().max(1.0) {
                    return next.max(0.0);
                }
                estimate = next;
            }
            return estimate.max(0.0);
        }
        // Deterministic generic start vector.
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + ((i * 7919) % 101) as f64 / 101.0)
            .collect();
        let mut log_growth = Vec::with_capacity(max_iter);
        for _ in 0..max_iter {
            let y = self.apply(&x);
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            log_growth.push(norm.ln() - x.iter().map(|v| v * v).sum::<f64>().sqrt().ln());
            x = y.into_iter().map(|v| v / norm).collect();
        }
        let tail = &log_growth[log_growth.len() / 2..];
        (tail.iter().sum::<f64>() / tail.len() as f64).exp()
    }
}

/// Jacobian of [`nu_update`] at `ν`:
/// `B_{ij,kl} = tanh(βJ_ij)(1 - tanh² h_{i∖j}) / (1 - tanh²(βJ_ij) tanh² h_{i∖j}) · δ_il (1 - δ_jk)`.
pub fn jacobian_at(mrf: &PairwiseMrf, nu: &[f64]) -> Result<NonBacktracking> {
    if nu.len() != mrf.num_directed() {
        return Err(Error::DimensionMismatch {
            expected: mrf.num_directed(),
            actual: nu.len(),
        });
    }
    let totals: Vec<f64> = (0..mrf.graph.n())
        .map(|i| mrf.cavity_total(nu, i))
        .collect();
    let row_weight: Vec<f64> = (0..mrf.num_directed())
        .map(|id| {
            let (i, _) = mrf.directed_edge(id);
            let th = (totals[i] - nu[id ^ 1]).tanh();
            let t = (mrf.beta * mrf.coupling[id / 2]).tanh();
            t * (1.0 - th * th) / (1.0 - t * t * th * th)
        })
        .collect();
    Ok(NonBacktracking::assemble(&mrf.directed, |id, _| {
        row_weight[id]
    }))
}

/// `‖H(η) m‖ / ‖m‖` with `H(η) = (η² - 1) I + D - η A`.
pub fn bethe_hessian_nullspace_check(g: &Graph, eta: f64, m: &[f64]) -> Result<f64> {
    if m.len() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            actual: m.len(),
        });
    }
    let norm = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::UndefinedResidual);
    }
    let am = g.adjacency_apply(m);
    let res = (0..g.n())
        .map(|i| {
            let r = (eta * eta - 1.0 + g.degree(i) as f64) * m[i] - eta * am[i];
            r * r
        })
        .sum::<f64>()
        .sqrt();
    Ok(res / norm)
}

/// Linearized magnetization `m_i = Σ_{k ∈ ∂i} ν_ki` of a directed-edge
/// vector.
pub fn aggregate_incoming(g: &Graph, nu: &[f64]) -> Vec<f64> {
    let directed = DirectedEdges::new(g);
    (0..g.n())
        .map(|i| directed.incoming(i).iter().map(|&k| nu[k]).sum())
        .collect()
}
