//! Property tests over randomly drawn instances. The generators below use
//! the ring-plus-chords model so every instance has edges everywhere and a
//! connected backbone; degenerate shapes (no edges, unreachable components)
//! are covered by unit tests next to the modules.

use proptest::prelude::*;

use volta_core::concentration::{consensus_run, predicted_constant};
use volta_core::generate::{generate, GenSpec};
use volta_core::network::ConductanceScheme;
use volta_core::solver::{audit_field, current_balance, solve, solve_dense, DEFAULT_MAX_ITER};
use volta_core::walk::hitting_probabilities;
use volta_core::{BoundaryCondition, Network};

const TOL: f64 = 1e-10;

fn scheme(choice: u8, seed: u64) -> ConductanceScheme {
    match choice % 3 {
        0 => ConductanceScheme::unit(),
        1 => ConductanceScheme::uniform01(seed ^ 0x9e37),
        _ => ConductanceScheme::power_law(seed ^ 0x79b9),
    }
}

prop_compose! {
    fn instance()(n in 5usize..50, p in 0.0f64..0.3, seed in any::<u64>(), choice in any::<u8>())
        (pins in proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 1..=4.min(n)),
         values in proptest::collection::vec(0.0f64..=1.0, 4),
         n in Just(n), p in Just(p), seed in Just(seed), choice in Just(choice))
        -> (Network, BoundaryCondition)
    {
        let graph = generate(&GenSpec::small_world(n, p, seed)).unwrap();
        let net = Network::assign(graph, &scheme(choice, seed)).unwrap();
        let pins: Vec<(usize, f64)> = pins.iter().zip(&values).map(|(&v, &p)| (v, p)).collect();
        (net, BoundaryCondition::new(pins).unwrap())
    }
}

proptest! {
    // The solved field stays inside the pinned hull, is harmonic to
    // tolerance, conserves current, and agrees with the dense route.
    #[test]
    fn solver_contract((net, bc) in instance()) {
        let field = solve(&net, &bc, TOL, DEFAULT_MAX_ITER).unwrap();
        let audit = audit_field(&net, &bc, &field).unwrap();
        prop_assert!(audit.hull_ok);
        prop_assert!(audit.max_defect <= TOL);

        let total_boundary_strength: f64 = bc
            .vertices()
            .iter()
            .map(|&v| net.strength(v).unwrap())
            .sum();
        let balance = current_balance(&net, &bc, &field).unwrap();
        prop_assert!(
            balance.abs() <= TOL * total_boundary_strength,
            "balance {balance} exceeds {}", TOL * total_boundary_strength
        );

        let dense = solve_dense(&net, &bc).unwrap();
        for v in 0..net.vertex_count() {
            prop_assert!((field.values[v] - dense.values[v]).abs() <= 1e-8, "vertex {v}");
        }
    }

    // Consensus averaging lands on the same field as the solver from an
    // arbitrary bounded starting state.
    #[test]
    fn consensus_contract((net, bc) in instance(), raw in proptest::collection::vec(-2.0f64..2.0, 50)) {
        let start: Vec<f64> = (0..net.vertex_count()).map(|v| raw[v % raw.len()]).collect();
        let outcome = consensus_run(&net, &bc, Some(&start), TOL, DEFAULT_MAX_ITER).unwrap();
        let dense = solve_dense(&net, &bc).unwrap();
        for v in 0..net.vertex_count() {
            prop_assert!((outcome.field.values[v] - dense.values[v]).abs() <= 1e-8, "vertex {v}");
        }
    }

    // Every walk is absorbed exactly once: hit counts per start vertex sum
    // to the number of walks, and the estimated hitting law is a
    // probability vector.
    #[test]
    fn hitting_rows_are_complete((net, bc) in instance()) {
        let walks = 40;
        let est = hitting_probabilities(&net, &bc, walks, 7).unwrap();
        let k = est.boundary_count();
        for v in 0..net.vertex_count() {
            let row: u64 = est.counts[v * k..(v + 1) * k].iter().sum();
            prop_assert_eq!(row, walks as u64);
            let mass: f64 = (0..k).map(|j| est.probability(v, j)).sum();
            prop_assert!((mass - 1.0).abs() <= 1e-12);
            let duality = est.potential_estimate(v);
            prop_assert!(duality >= -1e-12 && duality <= 1.0 + 1e-12);
        }
    }

    // Same inputs, same outputs, across every randomized stage.
    #[test]
    fn end_to_end_determinism((net, bc) in instance(), seed in any::<u64>()) {
        let again = Network::assign(net.graph().clone(), &ConductanceScheme::unit()).unwrap();
        let a = solve(&net, &bc, TOL, DEFAULT_MAX_ITER).unwrap();
        let b = solve(&net, &bc, TOL, DEFAULT_MAX_ITER).unwrap();
        prop_assert_eq!(&a.values, &b.values);
        prop_assert_eq!(a.iterations, b.iterations);
        let e1 = hitting_probabilities(&again, &bc, 20, seed).unwrap();
        let e2 = hitting_probabilities(&again, &bc, 20, seed).unwrap();
        prop_assert_eq!(e1.counts, e2.counts);
    }

    // The predicted constant is invariant under global conductance scaling.
    #[test]
    fn predicted_constant_scale_free((net, bc) in instance(), scale in 0.1f64..10.0) {
        let scaled = Network::from_parts(
            net.graph().clone(),
            net.conductances().iter().map(|&c| c * scale).collect(),
        )
        .unwrap();
        let a = predicted_constant(&net, &bc).unwrap();
        let b = predicted_constant(&scaled, &bc).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    // Generated edge lists are canonical: strictly sorted, self-loop free,
    // in range; ring-plus-chords always contains its ring.
    #[test]
    fn generated_graphs_are_canonical(n in 3usize..80, p in 0.0f64..1.0, seed in any::<u64>()) {
        let g = generate(&GenSpec::gnp(n, p, seed)).unwrap();
        for w in g.edges().windows(2) {
            prop_assert!(w[0] < w[1]);
        }
        for &(u, v) in g.edges() {
            prop_assert!(u < v && v < n);
        }
        let sw = generate(&GenSpec::small_world(n, p, seed)).unwrap();
        for i in 0..n {
            prop_assert!(sw.has_edge(i, (i + 1) % n));
        }
    }
}
