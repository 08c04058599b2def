mod common;

use common::*;
use rand::seq::SliceRandom;
use rand::Rng;
use sybil_lowpass::*;

fn two_cliques(size: usize) -> Graph {
    let mut pairs = Vec::new();
    for base in [0, size] {
        for i in 0..size {
            for j in i + 1..size {
                pairs.push((base + i, base + j));
            }
        }
    }
    pairs.push((0, size));
    Graph::from_edge_list(&pairs, 2 * size).unwrap()
}

#[test]
fn cliques_are_recovered_by_every_shift() {
    let g = two_cliques(8);
    let truth = Clustering::new(&(0..16).map(|i| i / 8).collect::<Vec<_>>());
    let labels = LabelSet::new(16, vec![9], vec![1]).unwrap();
    for kind in ShiftKind::all_defaults(&g).unwrap() {
        let shift = build_shift(&g, kind, Some(&labels)).unwrap();
        let found = spectral_clustering(&shift, 2, 3).unwrap();
        assert_eq!(nmi(&truth, &found).unwrap(), 1.0, "{}", kind.short_name());
    }
}

#[test]
fn clustering_is_permutation_equivariant() {
    let params = BlockModelParams::from_degree_and_strength(300, 8.0, 6.0);
    let (pg, _) = sample_sbm(&params, 5)
        .unwrap()
        .largest_connected_component();
    let n = pg.graph.n();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng(6));
    let permuted = pg.graph.permute(&perm).unwrap();

    let kind = ShiftKind::bethe_hessian(&pg.graph).unwrap();
    let a = spectral_clustering(&build_shift(&pg.graph, kind, None).unwrap(), 2, 1).unwrap();
    let b = spectral_clustering(&build_shift(&permuted, kind, None).unwrap(), 2, 1).unwrap();
    // Node i of the original graph is node perm[i] of the permuted one.
    let pulled: Vec<usize> = (0..n).map(|i| b.assignment()[perm[i]]).collect();
    assert!(nmi(&a, &Clustering::new(&pulled)).unwrap() > 1.0 - 1e-12);
    assert!(nmi(&a, &Clustering::new(&pg.communities)).unwrap() > 0.8);
}

#[test]
fn kmeans_separates_blobs() {
    let mut r = rng(7);
    let centers = [[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]];
    let points: Vec<Vec<f64>> = (0..90)
        .map(|i| {
            let c = centers[i % 3];
            vec![c[0] + r.gen_range(-1.0..1.0), c[1] + r.gen_range(-1.0..1.0)]
        })
        .collect();
    let found = Clustering::new(&kmeans(&points, 3, 1, 10).unwrap());
    let truth = Clustering::new(&(0..90).map(|i| i % 3).collect::<Vec<_>>());
    assert_eq!(nmi(&truth, &found).unwrap(), 1.0);
    assert!(kmeans(&points, 0, 1, 1).is_err());
    assert!(kmeans(&points, 91, 1, 1).is_err());
    assert_eq!(kmeans(&points, 1, 1, 1).unwrap(), vec![0; 90]);
}

#[test]
fn nmi_symmetry_and_relabeling() {
    let mut r = rng(8);
    for _ in 0..30 {
        let n = r.gen_range(5..200);
        let a: Vec<usize> = (0..n).map(|_| r.gen_range(0..4)).collect();
        let b: Vec<usize> = (0..n).map(|_| r.gen_range(0..3)).collect();
        let (ca, cb) = (Clustering::new(&a), Clustering::new(&b));
        let ab = nmi(&ca, &cb).unwrap();
        assert!((ab - nmi(&cb, &ca).unwrap()).abs() < 1e-12);
        assert!((0.0..=1.0).contains(&ab));
        let shifted = Clustering::new(&a.iter().map(|x| 100 - x).collect::<Vec<_>>());
        assert!((ab - nmi(&shifted, &cb).unwrap()).abs() < 1e-12);
    }
}
