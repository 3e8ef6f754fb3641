use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default merge tolerance for band unions.
pub const MERGE_TOL: f64 = 1e-12;

/// A finite union of closed intervals, kept sorted and pairwise disjoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSet {
    intervals: Vec<[f64; 2]>,
    tolerance: f64,
}

impl BandSet {
    /// Sorts the intervals and merges those closer than `tolerance`.
    pub fn new<I>(intervals: I, tolerance: f64) -> Self
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut raw: Vec<[f64; 2]> = intervals
            .into_iter()
            .map(|(a, b)| {
                assert!(a.is_finite() && b.is_finite(), "band edges must be finite: [{a}, {b}]");
                if a <= b { [a, b] } else { [b, a] }
            })
            .collect();
        raw.sort_by(|x, y| x[0].total_cmp(&y[0]).then(x[1].total_cmp(&y[1])));
        let mut merged: Vec<[f64; 2]> = Vec::with_capacity(raw.len());
        for iv in raw {
            match merged.last_mut() {
                Some(last) if iv[0] <= last[1] + tolerance => last[1] = last[1].max(iv[1]),
                _ => merged.push(iv),
            }
        }
        BandSet { intervals: merged, tolerance }
    }

    pub fn empty() -> Self {
        BandSet { intervals: Vec::new(), tolerance: MERGE_TOL }
    }

    pub fn points<I: IntoIterator<Item = f64>>(points: I, tolerance: f64) -> Self {
        BandSet::new(points.into_iter().map(|x| (x, x)), tolerance)
    }

    pub fn intervals(&self) -> &[[f64; 2]] {
        &self.intervals
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn min(&self) -> Option<f64> {
        self.intervals.first().map(|iv| iv[0])
    }

    pub fn max(&self) -> Option<f64> {
        self.intervals.last().map(|iv| iv[1])
    }

    /// Lebesgue measure.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|iv| iv[1] - iv[0]).sum()
    }

    /// Sorted, disjoint, finite and ordered endpoints.
    pub fn is_normalized(&self) -> bool {
        self.intervals.iter().all(|iv| iv[0].is_finite() && iv[1].is_finite() && iv[0] <= iv[1])
            && self.intervals.windows(2).all(|w| w[0][1] < w[1][0])
    }

    /// Distance from `x` to the set (`+∞` for the empty set).
    pub fn point_distance(&self, x: f64) -> f64 {
        let idx = self.intervals.partition_point(|iv| iv[1] < x);
        let mut best = f64::INFINITY;
        if let Some(iv) = self.intervals.get(idx) {
            best = if x >= iv[0] { 0.0 } else { iv[0] - x };
        }
        if idx > 0 {
            best = best.min(x - self.intervals[idx - 1][1]);
        }
        best
    }

    pub fn contains(&self, x: f64, slack: f64) -> bool {
        self.point_distance(x) <= slack
    }

    /// `sup_{x ∈ self} dist(x, other)`.
    pub fn deviation_from(&self, other: &BandSet) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        if other.is_empty() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for iv in &self.intervals {
            worst = worst.max(other.point_distance(iv[0])).max(other.point_distance(iv[1]));
            // Interior maxima sit at midpoints of gaps of `other`.
            let start = other.intervals.partition_point(|o| o[1] < iv[0]);
            for w in other.intervals[start.saturating_sub(1)..].windows(2) {
                let mid = 0.5 * (w[0][1] + w[1][0]);
                if mid > iv[1] {
                    break;
                }
                if mid > iv[0] {
                    worst = worst.max(0.5 * (w[1][0] - w[0][1]));
                }
            }
        }
        worst
    }

    /// Symmetric Hausdorff distance between the two closed sets.
    pub fn hausdorff_distance(&self, other: &BandSet) -> Result<f64> {
        if self.is_empty() || other.is_empty() {
            return Err(Error::InvalidInput("Hausdorff distance to an empty set".into()));
        }
        Ok(self.deviation_from(other).max(other.deviation_from(self)))
    }

    pub fn is_subset_of(&self, other: &BandSet, slack: f64) -> bool {
        self.deviation_from(other) <= slack
    }

    /// Every interval widened by `delta` on both sides, then merged.
    pub fn inflate(&self, delta: f64) -> BandSet {
        BandSet::new(self.intervals.iter().map(|iv| (iv[0] - delta, iv[1] + delta)), self.tolerance)
    }

    pub fn union(&self, other: &BandSet) -> BandSet {
        BandSet::new(
            self.intervals.iter().chain(&other.intervals).map(|iv| (iv[0], iv[1])),
            self.tolerance.max(other.tolerance),
        )
    }

    /// Open gaps between consecutive intervals.
    pub fn gaps(&self) -> Vec<(f64, f64)> {
        self.intervals.windows(2).map(|w| (w[0][1], w[1][0])).collect()
    }
}
