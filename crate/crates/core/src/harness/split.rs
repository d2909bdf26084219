use crate::error::{Error, Result};
use crate::event::EventStream;

/// Chronological split at the true boundary closest to `fraction * len`
/// (the earlier one on ties), so that no activity straddles the cut. The cut
/// boundary becomes index 0 of the second half and is not counted there.
pub fn split(stream: &EventStream, fraction: f64) -> Result<(EventStream, EventStream)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidConfig(format!("split fraction must be in (0, 1), got {fraction}")));
    }
    let boundaries = stream.true_boundaries().ok_or(Error::MissingGroundTruth)?;
    let target = fraction * stream.len() as f64;
    let cut = boundaries
        .iter()
        .copied()
        .min_by(|a, b| {
            let da = (*a as f64 - target).abs();
            let db = (*b as f64 - target).abs();
            da.total_cmp(&db).then(a.cmp(b))
        })
        .ok_or_else(|| Error::InvalidStream("splitting needs at least two activities".into()))?;
    Ok((stream.slice(0..cut), stream.slice(cut..stream.len())))
}
