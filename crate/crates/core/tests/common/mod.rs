#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sybil_lowpass::bp::PairwiseMrf;
use sybil_lowpass::{Graph, LabelSet};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random connected graph: a random spanning tree plus `extra` random edges.
pub fn random_connected(n: usize, extra: usize, rng: &mut ChaCha8Rng) -> Graph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut pairs = Vec::new();
    for k in 1..n {
        let parent = order[rng.gen_range(0..k)];
        pairs.push((order[k], parent));
    }
    for _ in 0..extra {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        pairs.push((a, b));
    }
    Graph::from_edge_list(&pairs, n).unwrap()
}

/// Random tree on `n` nodes.
pub fn random_tree(n: usize, rng: &mut ChaCha8Rng) -> Graph {
    random_connected(n, 0, rng)
}

/// `count` Sybil and `count` benign labels on distinct random nodes.
pub fn random_labels(n: usize, count: usize, rng: &mut ChaCha8Rng) -> LabelSet {
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(rng);
    LabelSet::new(n, ids[..count].to_vec(), ids[count..2 * count].to_vec()).unwrap()
}

pub fn dense_adjacency(g: &Graph) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; g.n()]; g.n()];
    for &(i, j) in g.edges() {
        a[i][j] = 1.0;
        a[j][i] = 1.0;
    }
    a
}

/// Gaussian elimination with partial pivoting.
pub fn solve(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))
            .unwrap();
        m.swap(col, piv);
        b.swap(col, piv);
        let p = m[col][col];
        assert!(p.abs() > 1e-300, "singular system");
        for row in col + 1..n {
            let f = m[row][col] / p;
            if f != 0.0 {
                for k in col..n {
                    m[row][k] -= f * m[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| m[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / m[row][row];
    }
    x
}

pub fn mat_vec(m: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn identity_minus(m: Vec<Vec<f64>>, scale: f64) -> Vec<Vec<f64>> {
    m.into_iter()
        .enumerate()
        .map(|(i, row)| {
            row.into_iter()
                .enumerate()
                .map(|(j, v)| f64::from(u8::from(i == j)) - scale * v)
                .collect()
        })
        .collect()
}

pub fn cia_oracle(g: &Graph, labels: &LabelSet, alpha: f64) -> Vec<f64> {
    let n = g.n();
    let a = dense_adjacency(g);
    let d = g.degrees().as_f64();
    let ad: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| a[i][j] / d[j]).collect())
        .collect();
    let q: Vec<f64> = (0..n)
        .map(|i| {
            if labels.sybil().contains(&i) {
                1.0 - alpha
            } else {
                0.0
            }
        })
        .collect();
    solve(identity_minus(ad, alpha), q)
}

pub fn sybilrank_oracle(g: &Graph, labels: &LabelSet, gamma: u32) -> Vec<f64> {
    let n = g.n();
    let a = dense_adjacency(g);
    let d = g.degrees().as_f64();
    let ad: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| a[i][j] / d[j]).collect())
        .collect();
    let mut p: Vec<f64> = (0..n)
        .map(|i| {
            if labels.benign().contains(&i) {
                1.0 / labels.benign().len() as f64
            } else {
                0.0
            }
        })
        .collect();
    for _ in 0..gamma {
        p = mat_vec(&ad, &p);
    }
    p.iter().zip(&d).map(|(x, di)| x / di).collect()
}

pub fn sybilwalk_oracle(g: &Graph, labels: &LabelSet) -> Vec<f64> {
    let n = g.n();
    let a = dense_adjacency(g);
    let dhat: Vec<f64> = (0..n)
        .map(|i| g.degree(i) as f64 + f64::from(u8::from(labels.is_labeled(i))))
        .collect();
    let m: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| a[i][j] / dhat[i]).collect())
        .collect();
    let qs: Vec<f64> = (0..n)
        .map(|i| {
            if labels.sybil().contains(&i) {
                1.0 / dhat[i]
            } else {
                0.0
            }
        })
        .collect();
    solve(identity_minus(m, 1.0), qs)
}

pub fn scar_c_oracle(g: &Graph, labels: &LabelSet, theta: f64) -> Vec<f64> {
    let a = dense_adjacency(g);
    let dmax = g.degrees().d_max as f64;
    let q = labels.signed_prior(g.n(), theta);
    solve(identity_minus(a, 1.0 / dmax), q)
        .into_iter()
        .map(|x| x + 0.5)
        .collect()
}

/// Exact `[p_i(+1), p_i(-1)]` by summing over all `2^n` spin states.
pub fn enumerate_marginals(mrf: &PairwiseMrf) -> Vec<[f64; 2]> {
    let g = mrf.graph();
    let n = g.n();
    assert!(n <= 16, "enumeration oracle capped at 16 nodes");
    let beta = mrf.beta();
    let mut acc = vec![[0.0f64; 2]; n];
    let mut z = 0.0;
    let spin = |state: u32, i: usize| if state >> i & 1 == 1 { 1.0 } else { -1.0 };
    // Energies can be large; subtract the maximum log-weight first.
    let logw: Vec<f64> = (0..1u32 << n)
        .map(|state| {
            let mut e: f64 = (0..n).map(|i| beta * mrf.field()[i] * spin(state, i)).sum();
            for (k, &(i, j)) in g.edges().iter().enumerate() {
                e += beta * mrf.coupling()[k] * spin(state, i) * spin(state, j);
            }
            e
        })
        .collect();
    let top = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for (state, lw) in logw.iter().enumerate() {
        let w = (lw - top).exp();
        z += w;
        for (i, a) in acc.iter_mut().enumerate() {
            a[usize::from(spin(state as u32, i) < 0.0)] += w;
        }
    }
    acc.into_iter().map(|[p, m]| [p / z, m / z]).collect()
}

pub fn total_variation(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| 0.5 * ((x[0] - y[0]).abs() + (x[1] - y[1]).abs()))
        .fold(0.0, f64::max)
}

pub fn random_mrf(g: Graph, r: &mut ChaCha8Rng) -> PairwiseMrf {
    let q: Vec<f64> = (0..g.n()).map(|_| r.gen_range(0.1..0.9)).collect();
    let w: Vec<f64> = (0..g.num_edges()).map(|_| r.gen_range(0.1..0.9)).collect();
    PairwiseMrf::from_probabilities(g, 1.0, &q, &w).unwrap()
}
