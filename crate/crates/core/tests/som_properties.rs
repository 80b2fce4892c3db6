mod common;

use hsom::{SomConfig, SomGrid};
use proptest::prelude::*;

fn grid_strategy() -> impl Strategy<Value = (SomConfig, Vec<Vec<f64>>, Vec<f64>)> {
    (1usize..6, 1usize..6, 1usize..6, 0.0f64..=1.0).prop_flat_map(|(w, h, dim, eta)| {
        let cfg = SomConfig {
            width: w,
            height: h,
            input_dim: dim,
            learning_rate: eta,
            neighbourhood_radius: 1,
        };
        (
            Just(cfg),
            prop::collection::vec(prop::collection::vec(0.0f64..=1.0, dim), w * h),
            prop::collection::vec(0.0f64..=1.0, dim),
        )
    })
}

fn chebyshev(a: (usize, usize), b: (usize, usize)) -> usize {
    a.0.abs_diff(b.0).max(a.1.abs_diff(b.1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn winner_matches_exhaustive_argmin((cfg, neurons, input) in grid_strategy()) {
        let grid = SomGrid::from_weights(cfg, neurons.clone()).unwrap();
        let (winner, d) = grid.find_winner(&input).unwrap();
        let (expected, expected_d) = common::brute_force_winner(&neurons, &input);
        prop_assert_eq!(winner.index(), expected);
        prop_assert!((d - expected_d).abs() <= 1e-12);
    }

    #[test]
    fn duplicated_best_neuron_resolves_to_lower_index(
        (cfg, mut neurons, input) in grid_strategy(),
        pick in any::<prop::sample::Index>(),
    ) {
        prop_assume!(neurons.len() > 1);
        let j = pick.index(neurons.len() - 1) + 1;
        neurons[0] = input.clone();
        neurons[j] = input.clone();
        let grid = SomGrid::from_weights(cfg, neurons).unwrap();
        prop_assert_eq!(grid.find_winner(&input).unwrap().0.index(), 0);
    }

    #[test]
    fn update_contracts_members_and_leaves_others((cfg, neurons, input) in grid_strategy()) {
        let mut grid = SomGrid::from_weights(cfg, neurons.clone()).unwrap();
        let (winner, _) = grid.find_winner(&input).unwrap();
        let wc = grid.coords(winner);
        let members = grid.update_weights(winner, &input).unwrap();
        let eta = cfg.learning_rate;
        for (i, old) in neurons.iter().enumerate() {
            let n = grid.neuron(i).unwrap();
            let new = grid.weights(n);
            let inside = chebyshev(grid.coords(n), wc) <= 1;
            prop_assert_eq!(inside, members.contains(&n));
            if inside {
                let before: f64 = old.iter().zip(&input).map(|(a, b)| (a - b).powi(2)).sum();
                let after: f64 = new.iter().zip(&input).map(|(a, b)| (a - b).powi(2)).sum();
                prop_assert!(after <= before + 1e-12);
                prop_assert!((after - (1.0 - eta).powi(2) * before).abs() <= 1e-12);
                for ((&o, &nw), &v) in old.iter().zip(new).zip(&input) {
                    prop_assert!(nw >= o.min(v) - 1e-15 && nw <= o.max(v) + 1e-15);
                }
            } else {
                prop_assert_eq!(old.as_slice(), new);
            }
        }
    }
}

#[test]
fn neighbourhood_sizes_on_default_grid() {
    let grid = SomGrid::random(SomConfig::default(), 3).unwrap();
    let size = |i| grid.neighbourhood(grid.neuron(i).unwrap()).unwrap().len();
    assert_eq!(size(0), 4);
    assert_eq!(size(99), 4);
    assert_eq!(size(5), 6);
    assert_eq!(size(55), 9);
}
