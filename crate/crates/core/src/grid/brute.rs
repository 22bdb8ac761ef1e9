//! Direct enumeration of every qualifying set, used to cross-check the grid.

use crate::geometry::pair_compatible;
use crate::types::PairRecord;

use super::GridError;

/// Largest input accepted by [`brute_force_sets`].
pub const BRUTE_FORCE_LIMIT: usize = 200;

/// Every `(3f + 1)`-subset of `records` with distinct robots and pairwise
/// compatible poses. Each set is sorted by `(robot, digest)`; sets are
/// listed in lexicographic order of their input indices.
pub fn brute_force_sets(
    records: &[PairRecord],
    f: u32,
    d: f64,
    delta: f64,
) -> Result<Vec<Vec<PairRecord>>, GridError> {
    if records.len() > BRUTE_FORCE_LIMIT {
        return Err(GridError::TooLarge {
            limit: BRUTE_FORCE_LIMIT,
            got: records.len(),
        });
    }
    let want = 3 * f as usize + 1;
    let mut out = Vec::new();
    let mut picked = Vec::with_capacity(want);
    extend(records, want, d, delta, 0, &mut picked, &mut out);
    Ok(out)
}

fn extend(
    records: &[PairRecord],
    want: usize,
    d: f64,
    delta: f64,
    start: usize,
    picked: &mut Vec<usize>,
    out: &mut Vec<Vec<PairRecord>>,
) {
    if picked.len() == want {
        let mut set: Vec<PairRecord> = picked.iter().map(|&i| records[i]).collect();
        set.sort_by_key(|r| (r.robot, r.digest));
        out.push(set);
        return;
    }
    for i in start..records.len() {
        if records.len() - i < want - picked.len() {
            break;
        }
        let cand = &records[i];
        let fits = picked.iter().all(|&p| {
            records[p].robot != cand.robot && pair_compatible(&records[p], cand, d, delta)
        });
        if fits {
            picked.push(i);
            extend(records, want, d, delta, i + 1, picked, out);
            picked.pop();
        }
    }
}
