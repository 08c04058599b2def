//! Spectral clustering over any shift matrix, k-means and normalized
//! mutual information.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::shift::ShiftMatrix;
use crate::spectral::{eig, Spectrum};

/// Default k-means restarts.
pub const KMEANS_RESTARTS: usize = 10;
/// Lloyd iterations per k-means run.
pub const KMEANS_MAX_ITER: usize = 300;

/// A partition of the nodes into `k` clusters with ids `0..k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    assignment: Vec<usize>,
    k: usize,
}

impl Clustering {
    /// Relabels arbitrary ids to `0..k` in increasing id order.
    pub fn new(ids: &[usize]) -> Self {
        let mut map = BTreeMap::new();
        for &c in ids {
            map.insert(c, 0);
        }
        for (next, v) in map.values_mut().enumerate() {
            *v = next;
        }
        Self {
            assignment: ids.iter().map(|c| map[c]).collect(),
            k: map.len(),
        }
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    /// Writes `node community_id` lines.
    pub fn write<W: Write>(&self, mut writer: W) -> Result<()> {
        for (i, c) in self.assignment.iter().enumerate() {
            writeln!(writer, "{i} {c}")?;
        }
        Ok(())
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    centers
        .iter()
        .enumerate()
        .map(|(c, ctr)| (c, sq_dist(point, ctr)))
        .fold(
            (0, f64::INFINITY),
            |best, cur| if cur.1 < best.1 { cur } else { best },
        )
}

/// One Lloyd run from farthest-point seeding; returns the assignment and
/// its within-cluster sum of squares.
fn lloyd(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> (Vec<usize>, f64) {
    let n = points.len();
    let mut centers = vec![points[rng.gen_range(0..n)].clone()];
    let mut gap: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let far = (0..n)
            .max_by(|&a, &b| gap[a].total_cmp(&gap[b]))
            .unwrap_or(0);
        centers.push(points[far].clone());
        for (g, p) in gap.iter_mut().zip(points) {
            *g = g.min(sq_dist(p, &centers[centers.len() - 1]));
        }
    }

    let dim = points[0].len();
    let mut assignment = vec![usize::MAX; n];
    for _ in 0..KMEANS_MAX_ITER {
        let mut changed = false;
        for (a, p) in assignment.iter_mut().zip(points) {
            let (c, _) = nearest(p, &centers);
            if *a != c {
                *a = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (&a, p) in assignment.iter().zip(points) {
            counts[a] += 1;
            for (s, x) in sums[a].iter_mut().zip(p) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // Reseed an emptied cluster at the point worst served.
                let far = (0..n)
                    .max_by(|&a, &b| {
                        sq_dist(&points[a], &centers[assignment[a]])
                            .total_cmp(&sq_dist(&points[b], &centers[assignment[b]]))
                    })
                    .unwrap_or(0);
                centers[c] = points[far].clone();
                assignment[far] = c;
            } else {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
    }
    let inertia = assignment
        .iter()
        .zip(points)
        .map(|(&a, p)| sq_dist(p, &centers[a]))
        .sum();
    (assignment, inertia)
}

/// Best of `restarts` k-means runs by within-cluster sum of squares.
/// Deterministic for a fixed seed.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64, restarts: usize) -> Result<Vec<usize>> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::Parameter(format!(
            "k-means needs 1 <= k <= n, got k={k}, n={n}"
        )));
    }
    if let Some(p) = points.iter().find(|p| p.len() != points[0].len()) {
        return Err(Error::DimensionMismatch {
            expected: points[0].len(),
            actual: p.len(),
        });
    }
    if k == 1 {
        return Ok(vec![0; n]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Vec<usize>, f64)> = None;
    for _ in 0..restarts.max(1) {
        let run = lloyd(points, k, &mut rng);
        if best.as_ref().map_or(true, |b| run.1 < b.1) {
            best = Some(run);
        }
    }
    Ok(best.map(|b| b.0).unwrap_or_default())
}

/// Rows of the first `k` eigenvectors, each scaled to unit norm (zero rows
/// stay zero).
pub fn spectral_embedding(spec: &Spectrum, k: usize) -> Vec<Vec<f64>> {
    let basis = spec.basis();
    (0..spec.n())
        .map(|i| {
            let row: Vec<f64> = (0..k).map(|c| basis.read(i, c)).collect();
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.into_iter().map(|x| x / norm).collect()
            } else {
                row
            }
        })
        .collect()
}

/// Spectral clustering on a precomputed spectrum: the `k` smallest
/// eigenvectors, row-normalized, clustered by k-means.
pub fn spectral_clustering_with(spec: &Spectrum, k: usize, seed: u64) -> Result<Clustering> {
    if k < 2 || k > spec.n() {
        return Err(Error::Parameter(format!(
            "spectral clustering needs 2 <= k <= n, got k={k}, n={}",
            spec.n()
        )));
    }
    let points = spectral_embedding(spec, k);
    Ok(Clustering::new(&kmeans(&points, k, seed, KMEANS_RESTARTS)?))
}

/// Spectral clustering of the graph underlying `shift` into `k` groups.
pub fn spectral_clustering(shift: &ShiftMatrix, k: usize, seed: u64) -> Result<Clustering> {
    if k < 2 || k > shift.n() {
        return Err(Error::Parameter(format!(
            "spectral clustering needs 2 <= k <= n, got k={k}, n={}",
            shift.n()
        )));
    }
    spectral_clustering_with(&eig(shift)?, k, seed)
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Mutual information normalized by the arithmetic mean of the two
/// entropies. Two single-cluster partitions score 1.
pub fn nmi(a: &Clustering, b: &Clustering) -> Result<f64> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            actual: b.n(),
        });
    }
    let n = a.n() as f64;
    if a.n() == 0 {
        return Ok(1.0);
    }
    let mut joint = vec![vec![0usize; b.k()]; a.k()];
    let mut ca = vec![0usize; a.k()];
    let mut cb = vec![0usize; b.k()];
    for (&x, &y) in a.assignment.iter().zip(&b.assignment) {
        joint[x][y] += 1;
        ca[x] += 1;
        cb[y] += 1;
    }
    let ha = entropy(ca.iter().copied(), n);
    let hb = entropy(cb.iter().copied(), n);
    if ha + hb == 0.0 {
        return Ok(1.0);
    }
    let mut mi = 0.0;
    for (x, row) in joint.iter().enumerate() {
        for (y, &c) in row.iter().enumerate() {
            if c > 0 {
                let pxy = c as f64 / n;
                mi += pxy * (pxy * n * n / (ca[x] as f64 * cb[y] as f64)).ln();
            }
        }
    }
    Ok((mi / (0.5 * (ha + hb))).clamp(0.0, 1.0))
}
