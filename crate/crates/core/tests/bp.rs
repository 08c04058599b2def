mod common;

use common::*;
use rand::Rng;
use sybil_lowpass::bp::*;
use sybil_lowpass::{sample_sbm, BlockModelParams, Graph};

fn tight() -> LbpOptions {
    LbpOptions {
        max_iter: 20_000,
        tol: 1e-15,
        ..Default::default()
    }
}

#[test]
fn path_of_five_is_exact() {
    let g = Graph::from_edge_list(&[(0, 1), (1, 2), (2, 3), (3, 4)], 5).unwrap();
    let mrf = random_mrf(g, &mut rng(1));
    let res = lbp_run(&mrf, &tight());
    assert!(res.converged);
    assert!(total_variation(&res.marginals, &enumerate_marginals(&mrf)) < 1e-10);
}

#[test]
fn trees_are_exact() {
    let mut r = rng(2);
    for _ in 0..20 {
        let n = r.gen_range(2..=14);
        let g = random_tree(n, &mut r);
        let mrf = random_mrf(g, &mut r);
        let res = lbp_run(&mrf, &tight());
        assert!(res.converged);
        let exact = enumerate_marginals(&mrf);
        assert!(total_variation(&res.marginals, &exact) < 1e-10);
        // Magnetization from messages equals the exact ⟨s_i⟩.
        let m = magnetization(&mrf, &res.messages.nu()).unwrap();
        for (mi, e) in m.iter().zip(&exact) {
            assert!((mi - (e[0] - e[1])).abs() < 1e-10);
        }
    }
}

fn labeled_priors(sybil: [usize; 2], benign: [usize; 2]) -> Vec<f64> {
    let mut q = vec![0.5; 10];
    for i in sybil {
        q[i] = 0.9;
    }
    for i in benign {
        q[i] = 0.1;
    }
    q
}

#[test]
fn loopy_graph_is_close_to_exact() {
    let ring: Vec<_> = (0..10).map(|i| (i, (i + 1) % 10)).collect();
    let g = Graph::from_edge_list(&ring, 10).unwrap();
    for (s, b) in [([0, 1], [8, 9]), ([0, 2], [5, 7]), ([0, 5], [2, 7])] {
        let w = vec![0.9; g.num_edges()];
        let mrf =
            PairwiseMrf::from_probabilities(g.clone(), 1.0, &labeled_priors(s, b), &w).unwrap();
        let res = lbp_run(&mrf, &tight());
        assert!(res.converged);
        let tv = total_variation(&res.marginals, &enumerate_marginals(&mrf));
        assert!(tv < 0.05, "total variation {tv}");
    }
}

#[test]
fn short_cycles_degrade_the_approximation() {
    // A chord creates 6-cycles; strong coupling then makes BP overconfident.
    let mut pairs: Vec<_> = (0..10).map(|i| (i, (i + 1) % 10)).collect();
    pairs.push((0, 5));
    let g = Graph::from_edge_list(&pairs, 10).unwrap();
    let w = vec![0.9; g.num_edges()];
    let mrf = PairwiseMrf::from_probabilities(g, 1.0, &labeled_priors([0, 1], [8, 9]), &w).unwrap();
    let res = lbp_run(&mrf, &tight());
    assert!(res.converged);
    let tv = total_variation(&res.marginals, &enumerate_marginals(&mrf));
    assert!(tv > 0.05 && tv < 0.2, "total variation {tv}");
}

#[test]
fn message_and_nu_forms_commute() {
    let mut r = rng(4);
    for _ in 0..5 {
        let g = random_connected(20, 15, &mut r);
        let mrf = random_mrf(g, &mut r);
        let nu: Vec<f64> = (0..mrf.num_directed())
            .map(|_| r.gen_range(-1.0..1.0))
            .collect();
        let msgs = MessageSet::from_nu(&nu);
        let via_mu = lbp_step(&mrf, &msgs, 0.0).nu();
        let via_nu = nu_update(&mrf, &nu).unwrap();
        assert!(max_abs_diff(&via_mu, &via_nu) < 1e-12);
        // Normalization survives damped steps too.
        let damped = lbp_step(&mrf, &msgs, 0.5);
        assert!(damped.mu.iter().all(|m| (m[0] + m[1] - 1.0).abs() < 1e-12));
    }
}

#[test]
fn magnetization_matches_beliefs() {
    let mut r = rng(5);
    for _ in 0..5 {
        let g = random_connected(12, 8, &mut r);
        let mrf = random_mrf(g, &mut r);
        let res = lbp_run(&mrf, &LbpOptions::default());
        let m = magnetization(&mrf, &res.messages.nu()).unwrap();
        assert!(max_abs_diff(&m, &res.expected_spins()) < 1e-10);
    }
}

#[test]
fn jacobian_matches_finite_differences() {
    let mut r = rng(6);
    let eps = 1e-6;
    for _ in 0..10 {
        let g = random_connected(10, 5, &mut r);
        let mrf = random_mrf(g, &mut r);
        let dim = mrf.num_directed();
        let nu: Vec<f64> = (0..dim).map(|_| r.gen_range(-0.5..0.5)).collect();
        let b = jacobian_at(&mrf, &nu).unwrap();
        for col in 0..dim {
            let mut plus = nu.clone();
            let mut minus = nu.clone();
            plus[col] += eps;
            minus[col] -= eps;
            let fp = nu_update(&mrf, &plus).unwrap();
            let fm = nu_update(&mrf, &minus).unwrap();
            for row in 0..dim {
                let fd = (fp[row] - fm[row]) / (2.0 * eps);
                assert!((fd - b.get(row, col)).abs() < 1e-5, "({row},{col})");
            }
        }
    }
}

#[test]
fn jacobian_at_trivial_point_is_scaled_nonbacktracking() {
    let mut r = rng(7);
    let g = random_connected(15, 10, &mut r);
    let (beta, j) = (0.8, 0.6);
    let mrf = PairwiseMrf::new(g.clone(), beta, vec![0.0; 15], vec![j; g.num_edges()]).unwrap();
    let b = jacobian_at(&mrf, &vec![0.0; mrf.num_directed()]).unwrap();
    let nb = NonBacktracking::unweighted(&g);
    let t = (beta * j).tanh();
    for row in 0..nb.dim() {
        let (i, jj) = mrf.directed_edge(row);
        for col in 0..nb.dim() {
            let (k, l) = mrf.directed_edge(col);
            let expect = if l == i && k != jj { 1.0 } else { 0.0 };
            assert_eq!(nb.get(row, col), expect);
            assert!((b.get(row, col) - t * expect).abs() < 1e-15);
        }
    }
}

fn cube() -> Graph {
    // 3-regular: the 3-dimensional hypercube.
    let pairs: Vec<_> = (0..8usize)
        .flat_map(|i| (0..3).map(move |b| (i, i ^ (1 << b))))
        .collect();
    Graph::from_edge_list(&pairs, 8).unwrap()
}

#[test]
fn stability_threshold_on_regular_graph() {
    let g = cube();
    let rho = NonBacktracking::unweighted(&g).spectral_radius(100_000, 1e-14);
    // Perron root of the non-backtracking matrix of a d-regular graph.
    assert!((rho - 2.0).abs() < 1e-9, "rho = {rho}");
    let mut r = rng(8);
    let dim = 2 * g.num_edges();
    let start: Vec<f64> = (0..dim).map(|_| r.gen_range(-1e-3..1e-3)).collect();
    let run = |t: f64| {
        let j = t.atanh();
        let mrf = PairwiseMrf::new(g.clone(), 1.0, vec![0.0; 8], vec![j; g.num_edges()]).unwrap();
        let scaled = jacobian_at(&mrf, &vec![0.0; dim])
            .unwrap()
            .spectral_radius(100_000, 1e-14);
        let mut msgs = MessageSet::from_nu(&start);
        for _ in 0..400 {
            msgs = lbp_step(&mrf, &msgs, 0.5);
        }
        (scaled, norm(&msgs.nu()))
    };
    let (rho_low, size_low) = run(0.4);
    assert!(rho_low < 1.0 && size_low < 1e-12, "{rho_low} {size_low}");
    let (rho_high, size_high) = run(0.6);
    assert!(rho_high > 1.0 && size_high > 1e-2, "{rho_high} {size_high}");
}

#[test]
fn nonbacktracking_eigenvector_gives_bethe_hessian_null_vector() {
    let mut r = rng(9);
    let g = random_connected(12, 10, &mut r);
    let nb = NonBacktracking::unweighted(&g);
    let rho = nb.spectral_radius(100_000, 1e-15);
    // Perron vector by shifted power iteration.
    let mut x = vec![1.0; nb.dim()];
    for _ in 0..20_000 {
        let bx = nb.apply(&x);
        let y: Vec<f64> = bx.iter().zip(&x).map(|(a, b)| a + b).collect();
        let s = norm(&y);
        x = y.into_iter().map(|v| v / s).collect();
    }
    let m = aggregate_incoming(&g, &x);
    assert!(bethe_hessian_nullspace_check(&g, rho, &m).unwrap() < 1e-8);

    // Negative control: a generic vector at a generic η.
    let m: Vec<f64> = (0..12).map(|_| r.gen_range(-1.0..1.0)).collect();
    let res = bethe_hessian_nullspace_check(&g, 1.7, &m).unwrap();
    assert!(res > 0.1, "{res}");
}

#[test]
fn informative_nonbacktracking_eigenvalue_on_block_model() {
    use faer::complex_native::c64;
    let params = BlockModelParams::from_degree_and_strength(200, 5.0, 3.5);
    let (pg, _) = sample_sbm(&params, 10)
        .unwrap()
        .largest_connected_component();
    let g = pg.graph;
    let nb = NonBacktracking::unweighted(&g);
    let dim = nb.dim();
    let mut dense = faer::Mat::<f64>::zeros(dim, dim);
    for row in 0..dim {
        for (c, v) in nb.row(row) {
            dense.write(row, c, v);
        }
    }
    let evd = dense.eigendecomposition::<c64>();
    let vals = evd.s().column_vector();
    // Real eigenvalues sorted by size; the second one carries the blocks.
    let mut real: Vec<usize> = (0..dim)
        .filter(|&i| vals.read(i).im.abs() < 1e-8 && vals.read(i).re > 1.0)
        .collect();
    real.sort_by(|&a, &b| vals.read(b).re.total_cmp(&vals.read(a).re));
    assert!(real.len() >= 2);
    let idx = real[1];
    let eta = vals.read(idx).re;
    let u = evd.u();
    // Rotate the complex eigenvector so it is real.
    let pivot = (0..dim)
        .max_by(|&a, &b| u.read(a, idx).abs().total_cmp(&u.read(b, idx).abs()))
        .unwrap();
    let phase = u.read(pivot, idx);
    let nu: Vec<f64> = (0..dim)
        .map(|i| {
            let z = u.read(i, idx);
            (z.re * phase.re + z.im * phase.im) / phase.abs()
        })
        .collect();
    let m = aggregate_incoming(&g, &nu);
    let res = bethe_hessian_nullspace_check(&g, eta, &m).unwrap();
    assert!(res < 0.1, "residual {res}");
}

#[test]
fn trajectory_dump() {
    let g = Graph::from_edge_list(&[(0, 1), (1, 2)], 3).unwrap();
    let mrf = random_mrf(g, &mut rng(12));
    let res = lbp_run(
        &mrf,
        &LbpOptions {
            max_iter: 3,
            record_trajectory: true,
            ..Default::default()
        },
    );
    assert_eq!(res.trajectory.len(), 3);
    let mut buf = Vec::new();
    res.write_trajectory_csv(&mrf, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 1 + 3 * 4);
    assert!(text.starts_with("iter,edge,src,dst,mu_plus\n1,0,0,1,"));
}
