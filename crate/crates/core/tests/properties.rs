mod common;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use common::*;
use uaamg::solvers::{prolongate_add, restrict};
use uaamg::sparse::io::{read_graph, read_matrix_market, write_graph, write_matrix_market, MmSymmetry};
use uaamg::{aggregate, galerkin_coarse, Aggregation, AggregationConfig, GraphProblem};

fn graph_strategy() -> impl Strategy<Value = GraphProblem> {
    (2usize..60, 0.0f64..0.3, 0usize..4, any::<u64>())
        .prop_map(|(n, p, b, seed)| random_connected_graph(&mut rng(seed), n, p, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_quadratic_form_is_edge_energy(g in graph_strategy(), seed in any::<u64>()) {
        let a = g.assemble_laplacian();
        let x = uniform_vector(&mut rng(seed), g.n());
        let ax = a.spmv(&x).unwrap();
        let quad: f64 = x.iter().zip(&ax).map(|(u, v)| u * v).sum();
        let mut energy = 0.0;
        for &(i, j, w) in g.edges() {
            energy += w * (x[i] - x[j]).powi(2);
        }
        for &(j, w) in g.boundary() {
            energy += w * x[j] * x[j];
        }
        prop_assert!((quad - energy).abs() <= 1e-10 * energy.max(1.0));
        prop_assert!((g.energy(&x) - energy).abs() <= 1e-10 * energy.max(1.0));
    }

    #[test]
    fn spmv_matches_dense(g in graph_strategy(), seed in any::<u64>()) {
        let a = g.assemble_laplacian();
        let x = uniform_vector(&mut rng(seed), g.n());
        let dense = a.to_dense() * DVector::from_vec(x.clone());
        let sparse = a.spmv(&x).unwrap();
        for (s, d) in sparse.iter().zip(dense.iter()) {
            prop_assert!((s - d).abs() <= 1e-12 * (1.0 + d.abs()));
        }
    }

    #[test]
    fn laplacian_is_symmetric_and_singular_only_without_boundary(g in graph_strategy()) {
        let a = g.assemble_laplacian();
        prop_assert!(a.is_symmetric(1e-14));
        prop_assert_eq!(a.annihilates_constants(1e-12), g.boundary().is_empty());
        prop_assert_eq!(g.singular(), g.boundary().is_empty());
    }

    #[test]
    fn squared_pattern_is_distance_two(g in graph_strategy()) {
        let a = g.assemble_laplacian();
        let adj = adjacency(&a);
        let pat = a.squared_pattern().unwrap();
        for i in 0..g.n() {
            let dist = bfs(&adj, i);
            let expected: Vec<usize> = (0..g.n()).filter(|&j| dist[j] <= 2).collect();
            prop_assert_eq!(pat.row(i).0, expected.as_slice());
        }
    }

    #[test]
    fn restriction_is_transpose_of_prolongation(n in 1usize..80, seed in any::<u64>()) {
        let mut r = rng(seed);
        let agg = random_aggregation(&mut r, n);
        let xc = uniform_vector(&mut r, agg.n_coarse());
        let yf = uniform_vector(&mut r, n);
        let mut px = vec![0.0; n];
        prolongate_add(&agg, &xc, &mut px).unwrap();
        let ry = restrict(&agg, &yf).unwrap();
        let lhs: f64 = px.iter().zip(&yf).map(|(a, b)| a * b).sum();
        let rhs: f64 = xc.iter().zip(&ry).map(|(a, b)| a * b).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        let p = prolongator(&agg);
        let dense = p.transpose() * DVector::from_vec(yf);
        for (a, b) in ry.iter().zip(dense.iter()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn galerkin_preserves_row_sums(g in graph_strategy(), seed in any::<u64>()) {
        let a = g.assemble_laplacian();
        let agg = random_aggregation(&mut rng(seed), g.n());
        let c = galerkin_coarse(&a, &agg).unwrap();
        let fine: f64 = a.row_sums().iter().sum();
        let coarse: f64 = c.row_sums().iter().sum();
        prop_assert!((fine - coarse).abs() <= 1e-10 * a.norm_inf().max(1.0));
        prop_assert!(c.is_symmetric(1e-13));
    }

    #[test]
    fn aggregation_text_round_trip(g in graph_strategy(), t in 2usize..6, seed in any::<u64>()) {
        let a = g.assemble_laplacian();
        let agg = aggregate(&a, &AggregationConfig::with_cap(Some(t), seed)).unwrap();
        let mut buf = Vec::new();
        agg.write(&mut buf).unwrap();
        let back = Aggregation::read(buf.as_slice()).unwrap();
        prop_assert!(agg.same_partition(&back));
        prop_assert!(agg.is_connected_in(&a));
        prop_assert!(agg.max_size() <= t);
    }

    #[test]
    fn graph_and_matrix_market_round_trip(g in graph_strategy()) {
        let mut buf = Vec::new();
        write_graph(&g, &mut buf).unwrap();
        let back = read_graph(buf.as_slice()).unwrap();
        let a = g.assemble_laplacian();
        prop_assert!((back.assemble_laplacian().to_dense() - a.to_dense()).amax() <= 1e-12);

        let mut mm = Vec::new();
        write_matrix_market(&a, MmSymmetry::Symmetric, &mut mm).unwrap();
        let m = read_matrix_market(mm.as_slice()).unwrap();
        prop_assert!((m.to_dense() - a.to_dense()).amax() <= 1e-12 * a.norm_inf());
    }
}

#[test]
fn composed_aggregation_matches_prolongator_product() {
    let mut r = rng(9);
    let fine = random_aggregation(&mut r, 40);
    let coarse = random_aggregation(&mut r, fine.n_coarse());
    let composed = fine.compose(&coarse).unwrap();
    let product: DMatrix<f64> = prolongator(&fine) * prolongator(&coarse);
    assert!((product - prolongator(&composed)).amax() == 0.0);
}
