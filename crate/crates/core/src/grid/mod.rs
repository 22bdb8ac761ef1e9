//! Overlapping-cell search for intersections.
//!
//! The plane is cut into `2d × 2d` cells anchored at the origin with stride
//! `d`, so cell `(i, j)` covers `[i·d, (i+2)·d) × [j·d, (j+2)·d)` and every
//! point falls into exactly four cells. Any group of records whose pairwise
//! distances are at most `d` spans at most `d` along each axis and therefore
//! shares at least one cell, which is what lets the per-cell exhaustive
//! search stand in for a global one.
//!
//! Each cell yields at most one [`IntersectionSet`] over the lifetime of the
//! grid and each record takes part in at most one emitted set.

mod brute;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{euclidean_distance, pair_compatible};
use crate::types::{ImageDigest, PairRecord, RobotId};

pub use brute::{brute_force_sets, BRUTE_FORCE_LIMIT};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("position is not finite or out of grid range")]
    BadPosition,
    #[error("digest {0} already submitted")]
    DuplicateDigest(String),
    #[error("brute-force search limited to {limit} records, got {got}")]
    TooLarge { limit: usize, got: usize },
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct CellIndex {
    pub i: i64,
    pub j: i64,
}

impl CellIndex {
    pub fn new(i: i64, j: i64) -> Self {
        CellIndex { i, j }
    }

    /// Half-open extent test in world coordinates.
    pub fn contains(&self, x: f64, y: f64, d: f64) -> bool {
        let (x0, y0) = (self.i as f64 * d, self.j as f64 * d);
        let (x1, y1) = ((self.i + 2) as f64 * d, (self.j + 2) as f64 * d);
        x0 <= x && x < x1 && y0 <= y && y < y1
    }
}

// 2^52: beyond this, cell arithmetic in f64 stops being exact.
const MAX_STRIPE: f64 = 4_503_599_627_370_496.0;

/// Index `a` with `a·d <= v < (a+1)·d`, evaluated in the same float
/// arithmetic the extent test uses.
fn stripe(v: f64, d: f64) -> Result<i64, GridError> {
    if !v.is_finite() || !(d.is_finite() && d > 0.0) {
        return Err(GridError::BadPosition);
    }
    let q = (v / d).floor();
    if !q.is_finite() || q.abs() > MAX_STRIPE {
        return Err(GridError::BadPosition);
    }
    let mut a = q as i64;
    while a as f64 * d > v {
        a -= 1;
    }
    while (a + 1) as f64 * d <= v {
        a += 1;
    }
    Ok(a)
}

/// The four cells whose extents contain `(x, y)`.
pub fn cells_for_position(x: f64, y: f64, d: f64) -> Result<[CellIndex; 4], GridError> {
    let a = stripe(x, d)?;
    let b = stripe(y, d)?;
    Ok([
        CellIndex::new(a - 1, b - 1),
        CellIndex::new(a - 1, b),
        CellIndex::new(a, b - 1),
        CellIndex::new(a, b),
    ])
}

/// A published group of `3f + 1` mutually compatible records from distinct robots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionSet {
    pub set_id: u64,
    /// Sorted by robot.
    pub members: Vec<PairRecord>,
    pub origin_cell: CellIndex,
}

impl IntersectionSet {
    pub fn robots(&self) -> impl Iterator<Item = RobotId> + '_ {
        self.members.iter().map(|m| m.robot)
    }

    pub fn contains_robot(&self, robot: RobotId) -> bool {
        self.members.iter().any(|m| m.robot == robot)
    }

    pub fn member(&self, robot: RobotId) -> Option<&PairRecord> {
        self.members.iter().find(|m| m.robot == robot)
    }
}

/// Ordering key of a candidate set; smaller wins.
#[derive(Debug, Clone)]
struct SetKey {
    max_dist: f64,
    time_sum: f64,
    ids: Vec<(RobotId, ImageDigest)>,
}

impl SetKey {
    fn of(members: &[&PairRecord]) -> Self {
        let mut max_dist = 0.0f64;
        for (k, a) in members.iter().enumerate() {
            for b in &members[k + 1..] {
                max_dist = max_dist.max(euclidean_distance(&a.pose, &b.pose));
            }
        }
        let mut ids: Vec<_> = members.iter().map(|m| (m.robot, m.digest)).collect();
        ids.sort();
        SetKey {
            max_dist,
            time_sum: members.iter().map(|m| m.time.0).sum(),
            ids,
        }
    }

    fn better_than(&self, other: &SetKey) -> bool {
        self.max_dist
            .total_cmp(&other.max_dist)
            .then(self.time_sum.total_cmp(&other.time_sum))
            .then_with(|| self.ids.cmp(&other.ids))
            .is_lt()
    }
}

struct Search<'a> {
    by_robot: Vec<(RobotId, Vec<&'a PairRecord>)>,
    want: usize,
    d: f64,
    delta: f64,
    chosen: Vec<&'a PairRecord>,
    best: Option<(SetKey, Vec<&'a PairRecord>)>,
}

impl<'a> Search<'a> {
    fn run(&mut self, robot_pos: usize, partial_max: f64) {
        if self.chosen.len() == self.want {
            let mut members = self.chosen.clone();
            members.sort_by_key(|m| m.robot);
            let key = SetKey::of(&members);
            if self.best.as_ref().is_none_or(|(b, _)| key.better_than(b)) {
                self.best = Some((key, members));
            }
            return;
        }
        let remaining = self.by_robot.len() - robot_pos;
        if remaining < self.want - self.chosen.len() {
            return;
        }
        let group = self.by_robot[robot_pos].1.clone();
        for rec in group {
            if !self
                .chosen
                .iter()
                .all(|c| pair_compatible(c, rec, self.d, self.delta))
            {
                continue;
            }
            let reach = self
                .chosen
                .iter()
                .map(|c| euclidean_distance(&c.pose, &rec.pose))
                .fold(partial_max, f64::max);
            if let Some((b, _)) = &self.best {
                if reach > b.max_dist {
                    continue;
                }
            }
            self.chosen.push(rec);
            self.run(robot_pos + 1, reach);
            self.chosen.pop();
        }
        self.run(robot_pos + 1, partial_max);
    }
}

/// Exhaustive search of one cell for the canonical qualifying set.
///
/// Among all sets of `3f + 1` records from distinct robots that are pairwise
/// compatible, returns the one with the smallest maximum pairwise distance,
/// then the smallest sum of capture times, then the lexicographically
/// smallest `(robot, digest)` list. Members come back sorted by robot.
pub fn find_candidate_set(
    records: &[PairRecord],
    f: u32,
    d: f64,
    delta: f64,
) -> Option<Vec<PairRecord>> {
    let refs: Vec<&PairRecord> = records.iter().collect();
    find_candidate_refs(&refs, f, d, delta)
}

fn find_candidate_refs(
    records: &[&PairRecord],
    f: u32,
    d: f64,
    delta: f64,
) -> Option<Vec<PairRecord>> {
    let want = 3 * f as usize + 1;
    let mut grouped: BTreeMap<RobotId, Vec<&PairRecord>> = BTreeMap::new();
    for r in records {
        grouped.entry(r.robot).or_default().push(r);
    }
    if grouped.len() < want {
        return None;
    }
    let mut search = Search {
        by_robot: grouped.into_iter().collect(),
        want,
        d,
        delta,
        chosen: Vec::with_capacity(want),
        best: None,
    };
    search.run(0, 0.0);
    search
        .best
        .map(|(_, members)| members.into_iter().copied().collect())
}

/// Record store plus per-cell search bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    d: f64,
    records: Vec<PairRecord>,
    by_digest: HashMap<ImageDigest, usize>,
    cells: BTreeMap<CellIndex, Vec<usize>>,
    consumed: Vec<bool>,
    emitted_cells: BTreeSet<CellIndex>,
    emitted_sets: BTreeSet<Vec<ImageDigest>>,
    dirty: BTreeSet<CellIndex>,
    next_set_id: u64,
}

impl SpatialGrid {
    pub fn new(d: f64) -> Self {
        SpatialGrid {
            d,
            records: Vec::new(),
            by_digest: HashMap::new(),
            cells: BTreeMap::new(),
            consumed: Vec::new(),
            emitted_cells: BTreeSet::new(),
            emitted_sets: BTreeSet::new(),
            dirty: BTreeSet::new(),
            next_set_id: 0,
        }
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records in insertion order.
    pub fn records(&self) -> &[PairRecord] {
        &self.records
    }

    pub fn contains_digest(&self, digest: &ImageDigest) -> bool {
        self.by_digest.contains_key(digest)
    }

    pub fn is_consumed(&self, digest: &ImageDigest) -> bool {
        self.by_digest
            .get(digest)
            .is_some_and(|&idx| self.consumed[idx])
    }

    pub fn consumed_digests(&self) -> impl Iterator<Item = &ImageDigest> {
        self.records
            .iter()
            .zip(&self.consumed)
            .filter(|(_, c)| **c)
            .map(|(r, _)| &r.digest)
    }

    pub fn cell_records(&self, cell: CellIndex) -> impl Iterator<Item = &PairRecord> {
        self.cells
            .get(&cell)
            .into_iter()
            .flatten()
            .map(|&idx| &self.records[idx])
    }

    pub fn occupied_cells(&self) -> impl Iterator<Item = (&CellIndex, usize)> {
        self.cells.iter().map(|(c, v)| (c, v.len()))
    }

    pub fn emitted_cells(&self) -> &BTreeSet<CellIndex> {
        &self.emitted_cells
    }

    pub fn pending_scan(&self) -> &BTreeSet<CellIndex> {
        &self.dirty
    }

    pub fn next_set_id(&self) -> u64 {
        self.next_set_id
    }

    /// Inserts a record into its four cells.
    pub fn insert(&mut self, rec: PairRecord) -> Result<[CellIndex; 4], GridError> {
        if rec.validate().is_err() {
            return Err(GridError::BadPosition);
        }
        if self.by_digest.contains_key(&rec.digest) {
            return Err(GridError::DuplicateDigest(rec.digest.to_hex()));
        }
        let cells = cells_for_position(rec.pose.x, rec.pose.y, self.d)?;
        let idx = self.records.len();
        self.records.push(rec);
        self.consumed.push(false);
        self.by_digest.insert(rec.digest, idx);
        for cell in cells {
            self.cells.entry(cell).or_default().push(idx);
            if !self.emitted_cells.contains(&cell) {
                self.dirty.insert(cell);
            }
        }
        Ok(cells)
    }

    /// Scans cells touched since the last call and emits new sets.
    pub fn find_intersections(&mut self, f: u32, delta: f64) -> Vec<IntersectionSet> {
        let dirty = std::mem::take(&mut self.dirty);
        let mut out = Vec::new();
        for cell in dirty {
            if self.emitted_cells.contains(&cell) {
                continue;
            }
            let live: Vec<&PairRecord> = self.cells[&cell]
                .iter()
                .filter(|&&idx| !self.consumed[idx])
                .map(|&idx| &self.records[idx])
                .collect();
            let Some(members) = find_candidate_refs(&live, f, self.d, delta) else {
                continue;
            };
            let mut key: Vec<ImageDigest> = members.iter().map(|m| m.digest).collect();
            key.sort();
            if !self.emitted_sets.insert(key) {
                continue;
            }
            for m in &members {
                let idx = self.by_digest[&m.digest];
                self.consumed[idx] = true;
            }
            self.emitted_cells.insert(cell);
            out.push(IntersectionSet {
                set_id: self.next_set_id,
                members,
                origin_cell: cell,
            });
            self.next_set_id += 1;
        }
        out
    }
}
