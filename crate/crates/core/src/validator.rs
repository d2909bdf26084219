//! Time-interval post-validation of predicted boundaries.
//!
//! Step one moves each boundary onto the later event of the largest of the
//! three inter-event gaps around it. Step two removes boundaries until every
//! segment holds at least `min_activity_length` events, always dropping the
//! flanking boundary with the smaller gap.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::EventStream;
use crate::segmenter::{ResultSource, SegmentationResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ValidatorConfig {
    pub min_activity_length: usize,
}

impl Default for ValidatorConfig {
    fn default() -> Self {
        ValidatorConfig {
            min_activity_length: 4,
        }
    }
}

impl ValidatorConfig {
    pub fn check(&self) -> Result<()> {
        if self.min_activity_length < 2 {
            return Err(Error::InvalidConfig(format!(
                "min_activity_length must be at least 2, got {}",
                self.min_activity_length
            )));
        }
        Ok(())
    }
}

/// The three gaps around a segment-initial boundary `b`:
/// `t[b-1]-t[b-2]`, `t[b]-t[b-1]` and `t[b+1]-t[b]`.
pub fn intervals(times: &[f64], b: usize) -> Option<[f64; 3]> {
    (b >= 2 && b + 1 < times.len()).then(|| {
        [
            times[b - 1] - times[b - 2],
            times[b] - times[b - 1],
            times[b + 1] - times[b],
        ]
    })
}

/// One revision step: returns `b - 1`, `b` or `b + 1`, whichever starts
/// after the largest surrounding gap. Ties favour `b`, then `b - 1`.
/// Boundaries without all three gaps are returned unchanged.
pub fn revise_boundary(times: &[f64], b: usize) -> usize {
    let Some([before, at, after]) = intervals(times, b) else {
        return b;
    };
    if at >= before && at >= after {
        b
    } else if before >= after {
        b - 1
    } else {
        b + 1
    }
}

/// Repeats [`revise_boundary`] until the boundary sits on a gap at least as
/// large as both neighbours. Each step strictly increases the gap, so this
/// terminates.
pub fn revise_to_fixpoint(times: &[f64], mut b: usize) -> usize {
    loop {
        let next = revise_boundary(times, b);
        if next == b {
            return b;
        }
        b = next;
    }
}

/// Gap immediately preceding boundary `b`.
fn gap_at(times: &[f64], b: usize) -> f64 {
    times[b] - times[b - 1]
}

/// Drops boundaries until no segment (first and last included) is shorter
/// than the minimum. The leftmost short segment is handled first; of its two
/// flanking boundaries the one with the smaller preceding gap is removed
/// (the later one on ties). Stream ends are never removed.
pub fn enforce_min_length(times: &[f64], boundaries: &[usize], config: &ValidatorConfig) -> Vec<usize> {
    enforce_min_length_audited(times, boundaries, config).0
}

fn enforce_min_length_audited(
    times: &[f64],
    boundaries: &[usize],
    config: &ValidatorConfig,
) -> (Vec<usize>, Vec<usize>) {
    let n = times.len();
    let mut kept: Vec<usize> = boundaries.to_vec();
    let mut removed = Vec::new();
    loop {
        let short = (0..=kept.len()).find(|&s| {
            let start = if s == 0 { 0 } else { kept[s - 1] };
            let end = kept.get(s).copied().unwrap_or(n);
            end - start < config.min_activity_length
        });
        let Some(s) = short else { break };
        // Flanks of segment s: boundary s-1 on the left, s on the right.
        let left = s.checked_sub(1);
        let right = (s < kept.len()).then_some(s);
        let victim = match (left, right) {
            (Some(l), Some(r)) => {
                if gap_at(times, kept[l]) < gap_at(times, kept[r]) {
                    l
                } else {
                    r
                }
            }
            (Some(l), None) => l,
            (None, Some(r)) => r,
            (None, None) => break,
        };
        removed.push(kept.remove(victim));
    }
    (kept, removed)
}

/// What happened to one raw boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryAudit {
    pub original: usize,
    /// Gaps around the original index, when all three exist.
    pub intervals: Option<[f64; 3]>,
    pub revised: usize,
    pub action: AuditAction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditAction {
    Kept,
    Shifted,
    /// Revised onto an index another boundary already occupied.
    Merged,
    /// Removed to satisfy the minimum segment length.
    Eliminated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationOutcome {
    pub result: SegmentationResult,
    pub audit: Vec<BoundaryAudit>,
}

/// Both validation steps on the raw boundaries of `result`.
pub fn validate(
    stream: &EventStream,
    result: &SegmentationResult,
    config: &ValidatorConfig,
) -> SegmentationResult {
    validate_audited(stream, result, config).result
}

pub fn validate_audited(
    stream: &EventStream,
    result: &SegmentationResult,
    config: &ValidatorConfig,
) -> ValidationOutcome {
    let times = stream.times();
    let (boundaries, audit) = validate_times(&times, &result.boundaries, config);
    ValidationOutcome {
        result: SegmentationResult {
            scores: result.scores.clone(),
            boundaries,
            source: ResultSource::Validated,
        },
        audit,
    }
}

/// Validation on bare timestamps and boundary indices.
pub fn validate_times(
    times: &[f64],
    raw: &[usize],
    config: &ValidatorConfig,
) -> (Vec<usize>, Vec<BoundaryAudit>) {
    let n = times.len();
    let mut raw: Vec<usize> = raw.iter().copied().filter(|&b| b > 0 && b < n).collect();
    raw.sort_unstable();
    raw.dedup();

    let mut audit = Vec::with_capacity(raw.len());
    let mut revised = Vec::with_capacity(raw.len());
    for &b in &raw {
        let to = revise_to_fixpoint(times, b);
        let action = if revised.contains(&to) {
            AuditAction::Merged
        } else {
            revised.push(to);
            if to == b {
                AuditAction::Kept
            } else {
                AuditAction::Shifted
            }
        };
        audit.push(BoundaryAudit {
            original: b,
            intervals: intervals(times, b),
            revised: to,
            action,
        });
    }
    revised.sort_unstable();

    let (kept, removed) = enforce_min_length_audited(times, &revised, config);
    for idx in removed {
        if let Some(entry) = audit
            .iter_mut()
            .find(|a| a.revised == idx && a.action != AuditAction::Merged)
        {
            entry.action = AuditAction::Eliminated;
        }
    }
    (kept, audit)
}
