//! Pairs each image with the nearest pose sample from the faster pose stream.

use crate::types::{Pose, Timestamp};

use super::SimError;

/// Default largest gap between an image and its pose sample, seconds.
pub const DEFAULT_STALENESS: f64 = 0.5;

/// Nearest sample to `image_t` in a time-sorted stream; on a tie the earlier
/// sample wins. Fails when the nearest sample is more than `staleness` away.
pub fn associate_pose(
    image_t: Timestamp,
    stream: &[(Timestamp, Pose)],
    staleness: f64,
) -> Result<Pose, SimError> {
    if stream.is_empty() {
        return Err(SimError::StalePose {
            t: image_t.0,
            gap: f64::INFINITY,
        });
    }
    let idx = stream.partition_point(|(t, _)| t.0 < image_t.0);
    let mut best: Option<(f64, Pose)> = None;
    for k in [idx.checked_sub(1), (idx < stream.len()).then_some(idx)]
        .into_iter()
        .flatten()
    {
        let (t, pose) = stream[k];
        let gap = (t.0 - image_t.0).abs();
        if best.is_none_or(|(g, _)| gap < g) {
            best = Some((gap, pose));
        }
    }
    let (gap, pose) = best.expect("stream is non-empty");
    if gap > staleness {
        return Err(SimError::StalePose { t: image_t.0, gap });
    }
    Ok(pose)
}

/// The grid `start + k / hz` for `k = 0, 1, ...` up to `end`.
pub fn sample_times(start: Timestamp, end: Timestamp, hz: f64) -> Vec<Timestamp> {
    (0u64..)
        .map(|k| Timestamp(start.0 + k as f64 / hz))
        .take_while(|t| t.0 <= end.0)
        .collect()
}

/// Samples `pose_at` on [`sample_times`].
pub fn sample_stream(
    start: Timestamp,
    end: Timestamp,
    hz: f64,
    mut pose_at: impl FnMut(Timestamp) -> Result<Pose, SimError>,
) -> Result<Vec<(Timestamp, Pose)>, SimError> {
    sample_times(start, end, hz)
        .into_iter()
        .map(|t| Ok((t, pose_at(t)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream_120hz(seconds: f64) -> Vec<(Timestamp, Pose)> {
        sample_stream(Timestamp(0.0), Timestamp(seconds), 120.0, |t| {
            Ok(Pose::new(t.0, 0.0, 0.0))
        })
        .unwrap()
    }

    #[test]
    fn picks_nearest_sample_on_the_120hz_grid() {
        let stream = stream_120hz(2.0);
        // Oracle: scan every sample.
        let nearest = |t: f64| {
            stream
                .iter()
                .min_by(|a, b| (a.0 .0 - t).abs().total_cmp(&(b.0 .0 - t).abs()))
                .unwrap()
                .1
        };
        let got = associate_pose(Timestamp(0.5), &stream, DEFAULT_STALENESS).unwrap();
        assert_eq!(got, nearest(0.5));
        assert_eq!(got.x, 60.0 / 120.0);
        for k in 0..150 {
            let t = 0.013 * k as f64;
            assert_eq!(associate_pose(Timestamp(t), &stream, 0.5).unwrap(), nearest(t));
        }
    }

    #[test]
    fn exact_hit_and_tie() {
        let stream = vec![
            (Timestamp(1.0), Pose::new(1.0, 0.0, 0.0)),
            (Timestamp(2.0), Pose::new(2.0, 0.0, 0.0)),
        ];
        assert_eq!(associate_pose(Timestamp(2.0), &stream, 0.5).unwrap().x, 2.0);
        assert_eq!(associate_pose(Timestamp(1.5), &stream, 0.5).unwrap().x, 1.0);
    }

    #[test]
    fn stale_images_are_dropped() {
        let stream = stream_120hz(1.0);
        assert!(matches!(
            associate_pose(Timestamp(3.0), &stream, 0.5),
            Err(SimError::StalePose { .. })
        ));
        assert!(associate_pose(Timestamp(1.0), &[], 0.5).is_err());
    }
}
