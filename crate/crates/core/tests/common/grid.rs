use std::collections::BTreeSet;

use byzvision::grid::{brute_force_sets, cells_for_position, CellIndex, IntersectionSet};
use byzvision::{ImageDigest, PairRecord, SpatialGrid};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::pair;

pub const D: f64 = 0.5;
pub const DELTA: f64 = 0.4;

/// Four points with every pairwise distance at most `D`, spread anywhere
/// in a large window so every stripe alignment shows up.
pub fn qualifying_points(rng: &mut ChaCha8Rng) -> Vec<(f64, f64)> {
    loop {
        let cx = rng.gen_range(-50.0..50.0);
        let cy = rng.gen_range(-50.0..50.0);
        let pts: Vec<(f64, f64)> = (0..4)
            .map(|_| (cx + rng.gen_range(-D..D), cy + rng.gen_range(-D..D)))
            .collect();
        let ok = pts.iter().enumerate().all(|(i, a)| {
            pts[i + 1..]
                .iter()
                .all(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt() <= D)
        });
        if ok {
            return pts;
        }
    }
}

/// Cells that every point falls in.
pub fn shared_cells(pts: &[(f64, f64)]) -> BTreeSet<CellIndex> {
    let mut shared: BTreeSet<CellIndex> = cells_for_position(pts[0].0, pts[0].1, D)
        .unwrap()
        .into_iter()
        .collect();
    for p in &pts[1..] {
        let cells: BTreeSet<CellIndex> = cells_for_position(p.0, p.1, D).unwrap().into_iter().collect();
        shared = &shared & &cells;
    }
    shared
}

pub fn random_instance(rng: &mut ChaCha8Rng, size: usize, robots: u32) -> Vec<PairRecord> {
    (0..size)
        .map(|k| {
            pair(
                rng.gen_range(0..robots),
                k as u64,
                rng.gen_range(0.0..2.5),
                rng.gen_range(0.0..2.5),
                rng.gen_range(-0.3..0.3),
                k as f64,
            )
        })
        .collect()
}

fn key(members: &[PairRecord]) -> Vec<ImageDigest> {
    members.iter().map(|m| m.digest).collect()
}

/// Cells that hold every member of `set`, found by testing the neighborhood
/// of the first member against the cell bounds.
fn covering_cells(set: &[PairRecord]) -> Vec<CellIndex> {
    let p = set[0].pose;
    let (a, b) = ((p.x / D).floor() as i64, (p.y / D).floor() as i64);
    let mut out = Vec::new();
    for i in a - 2..=a + 1 {
        for j in b - 2..=b + 1 {
            let c = CellIndex::new(i, j);
            if set.iter().all(|m| c.contains(m.pose.x, m.pose.y, D)) {
                out.push(c);
            }
        }
    }
    out
}

/// Checks grid output against every qualifying set in the instance.
pub fn check_against_brute_force(records: &[PairRecord], emitted: &[IntersectionSet], grid: &SpatialGrid) {
    let all = brute_force_sets(records, 1, D, DELTA).unwrap();
    let valid: BTreeSet<Vec<ImageDigest>> = all.iter().map(|s| key(s)).collect();

    let mut used = BTreeSet::new();
    let mut origins = BTreeSet::new();
    for set in emitted {
        assert!(valid.contains(&key(&set.members)), "emitted set is not qualifying");
        for m in &set.members {
            assert!(used.insert(m.digest), "digest reused across sets");
        }
        assert!(origins.insert(set.origin_cell), "cell emitted twice");
        assert!(set
            .members
            .iter()
            .all(|m| set.origin_cell.contains(m.pose.x, m.pose.y, D)));
    }
    assert_eq!(origins, *grid.emitted_cells());

    for set in &all {
        if set.iter().any(|m| used.contains(&m.digest)) {
            continue;
        }
        // Untouched qualifying set: every cell that holds it must already
        // have used its one emission.
        let cells = covering_cells(set);
        assert!(!cells.is_empty());
        for c in cells {
            assert!(
                grid.emitted_cells().contains(&c),
                "cell {c:?} holds an unused qualifying set but never emitted"
            );
        }
    }
}

/// Inserts every record, scanning after each one, and checks the result.
/// Returns the number of sets emitted.
pub fn incremental_coverage(records: &[PairRecord]) -> usize {
    let mut grid = SpatialGrid::new(D);
    let mut emitted = Vec::new();
    for r in records {
        grid.insert(*r).unwrap();
        emitted.extend(grid.find_intersections(1, DELTA));
    }
    check_against_brute_force(records, &emitted, &grid);
    emitted.len()
}
