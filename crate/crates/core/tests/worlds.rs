use hsom::simworld::{builtin_names, resolve_world};
use hsom::{builtin_world, WalkOptions};

#[test]
fn builtins_parse_and_walk_ten_metres() {
    for name in builtin_names() {
        let world = builtin_world(name).unwrap();
        let scans = world.walk_path(&WalkOptions::default()).unwrap();
        assert_eq!(scans.len(), 101, "{name}");
        assert!(scans
            .iter()
            .flat_map(|s| s.input)
            .all(|v| (0.0..=1.0).contains(&v)));
    }
}

#[test]
fn opening_the_door_only_changes_scans_near_it() {
    let (a, a_star) = (builtin_world("A").unwrap(), builtin_world("A*").unwrap());
    let walk = WalkOptions {
        smoothing_window: 1,
        ..WalkOptions::default()
    };
    let (x, y) = (
        a.walk_path(&walk).unwrap(),
        a_star.walk_path(&walk).unwrap(),
    );
    let mut changed = 0;
    for (p, q) in x.iter().zip(&y) {
        if p.input != q.input {
            changed += 1;
            assert!(
                a.in_door_region(p.arc_position),
                "change at {}",
                p.arc_position
            );
        }
    }
    assert!(changed > 0);
}

#[test]
fn corridors_share_geometry_away_from_features() {
    let (a, b) = (builtin_world("A").unwrap(), builtin_world("B").unwrap());
    let walk = WalkOptions::default();
    let (x, y) = (a.walk_path(&walk).unwrap(), b.walk_path(&walk).unwrap());
    // The end of the path sees plain corridor in both worlds.
    for (p, q) in x[100].input.iter().zip(&y[100].input) {
        assert!((p - q).abs() < 1e-12);
    }
    assert!(!b.door_intervals().is_empty());
}

#[test]
fn aliases_resolve_to_the_same_world() {
    let a_star = builtin_world("A*").unwrap();
    for alias in ["A_STAR", "ASTAR", "a*"] {
        assert_eq!(
            resolve_world(alias).unwrap().segments(),
            a_star.segments(),
            "{alias}"
        );
    }
}
