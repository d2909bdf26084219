//! Sliding-window inference over a concatenated stream.
//!
//! The model is slid one event at a time; every event is scored by each
//! window covering it and the scores are combined before the boundary rule
//! is applied.

use serde::{Deserialize, Serialize};

use crate::encoder::{encode_stream_with, EncodedStream, StateTiming, StatusAugmentation};
use crate::error::{Error, Result};
use crate::event::{EventStream, Maxima};
use crate::lstm::{ForwardPass, LstmModel, WindowSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResultSource {
    Raw,
    Validated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationResult {
    /// One aggregated `[boundary, body]` score per event.
    pub scores: Vec<[f64; 2]>,
    /// Sorted predicted boundary indices; never contains 0.
    pub boundaries: Vec<usize>,
    pub source: ResultSource,
}

/// How overlapping window outputs are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Arithmetic mean of the output vectors.
    #[default]
    Mean,
    /// Fraction of covering windows voting boundary vs. body.
    MajorityVote,
}

/// Start index of every stride-1 window over a stream of `len` events.
fn window_starts(len: usize, steps: usize) -> std::ops::Range<usize> {
    if len == 0 {
        0..0
    } else {
        0..len.saturating_sub(steps) + 1
    }
}

/// Stride-1 windows of `steps` events. Streams shorter than `steps` yield a
/// single padded window.
pub fn windows(encoded: &EncodedStream, steps: usize) -> Vec<WindowSample<'_>> {
    window_starts(encoded.len(), steps)
        .map(|k| WindowSample::from_stream(encoded, k, steps))
        .collect()
}

/// [`windows`] with boundary targets attached, taking every `stride`-th
/// window.
pub fn labeled_windows<'a>(
    encoded: &'a EncodedStream,
    labels: &'a [bool],
    steps: usize,
    omega: f64,
    stride: usize,
) -> Vec<WindowSample<'a>> {
    assert_eq!(encoded.len(), labels.len(), "one label per event");
    window_starts(encoded.len(), steps)
        .step_by(stride.max(1))
        .map(|k| {
            let w = WindowSample::from_stream(encoded, k, steps);
            let valid = w.valid();
            w.with_labels(&labels[k..k + valid], omega)
        })
        .collect()
}

/// Combines per-window outputs. `outputs[k]` holds the outputs of window
/// `k`, which starts at event `k`; only its first `valid` entries count.
pub fn aggregate(outputs: &[Vec<[f64; 2]>], len: usize, mode: Aggregation) -> Vec<[f64; 2]> {
    let mut sums = vec![[0.0; 2]; len];
    let mut counts = vec![0usize; len];
    for (k, out) in outputs.iter().enumerate() {
        for (pos, y) in out.iter().enumerate() {
            let i = k + pos;
            if i >= len {
                break;
            }
            counts[i] += 1;
            match mode {
                Aggregation::Mean => {
                    sums[i][0] += y[0];
                    sums[i][1] += y[1];
                }
                Aggregation::MajorityVote if y[0] > y[1] => sums[i][0] += 1.0,
                Aggregation::MajorityVote => sums[i][1] += 1.0,
            }
        }
    }
    sums.iter()
        .zip(&counts)
        .map(|(s, &n)| {
            let n = n.max(1) as f64;
            [s[0] / n, s[1] / n]
        })
        .collect()
}

/// Indices whose first score strictly exceeds the second, excluding 0.
pub fn decide(scores: &[[f64; 2]]) -> Vec<usize> {
    scores
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, s)| s[0] > s[1])
        .map(|(i, _)| i)
        .collect()
}

/// Runs every window of `encoded` through the model and aggregates.
pub fn score_encoded(
    model: &LstmModel,
    encoded: &EncodedStream,
    mode: Aggregation,
) -> Result<Vec<[f64; 2]>> {
    if encoded.is_empty() {
        return Ok(Vec::new());
    }
    if encoded.width() != model.input_width() {
        return Err(Error::WidthMismatch {
            expected: model.input_width(),
            actual: encoded.width(),
        });
    }
    let mut pass = ForwardPass::default();
    let mut outputs = Vec::new();
    for w in windows(encoded, model.time_steps()) {
        model.forward_into(&w, &mut pass)?;
        outputs.push(pass.outputs[..w.valid()].to_vec());
    }
    Ok(aggregate(&outputs, encoded.len(), mode))
}

pub fn segment_encoded(
    model: &LstmModel,
    encoded: &EncodedStream,
    mode: Aggregation,
) -> Result<SegmentationResult> {
    let scores = score_encoded(model, encoded, mode)?;
    Ok(SegmentationResult {
        boundaries: decide(&scores),
        scores,
        source: ResultSource::Raw,
    })
}

/// Encode, window, score, aggregate by mean and decide.
pub fn segment(
    model: &LstmModel,
    stream: &EventStream,
    aug: StatusAugmentation,
    maxima: Maxima,
) -> Result<SegmentationResult> {
    segment_with(model, stream, aug, maxima, StateTiming::After, Aggregation::Mean)
}

pub fn segment_with(
    model: &LstmModel,
    stream: &EventStream,
    aug: StatusAugmentation,
    maxima: Maxima,
    timing: StateTiming,
    mode: Aggregation,
) -> Result<SegmentationResult> {
    let width = aug.width(stream.vocab().len());
    if width != model.input_width() {
        return Err(Error::WidthMismatch {
            expected: model.input_width(),
            actual: width,
        });
    }
    let encoded = encode_stream_with(stream, aug, maxima, timing)?;
    segment_encoded(model, &encoded, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::{Event, Vocabulary};
    use proptest::prelude::*;

    fn encoded(len: usize, width: usize) -> EncodedStream {
        EncodedStream::from_rows(width, (0..len * width).map(|i| (i % 3) as f64).collect())
    }

    #[test]
    fn window_counts() {
        let e = encoded(60, 2);
        let w = windows(&e, 60);
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].valid(), 60);

        assert_eq!(windows(&encoded(61, 2), 60).len(), 2);

        let e = encoded(5, 2);
        let w = windows(&e, 60);
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].valid(), 5);
        assert_eq!((0..60).filter(|&t| !w[0].mask(t)).count(), 55);
    }

    #[test]
    fn every_event_covered() {
        for len in 1..30 {
            let e = encoded(len, 1);
            let mut covered = vec![0; len];
            for (k, w) in windows(&e, 7).iter().enumerate() {
                for t in 0..w.valid() {
                    covered[k + t] += 1;
                }
            }
            assert!(covered.iter().all(|&c| c >= 1), "len {len}");
        }
    }

    #[test]
    fn aggregate_examples() {
        let single = aggregate(&[vec![[0.3, 0.7]]], 1, Aggregation::Mean);
        assert_eq!(single, vec![[0.3, 0.7]]);

        // Event 1 is covered by window 0 (pos 1) and window 1 (pos 0).
        let outs = vec![vec![[0.0, 0.0], [1.0, 0.0]], vec![[0.0, 1.0], [0.0, 0.0]]];
        let agg = aggregate(&outs, 3, Aggregation::Mean);
        assert_eq!(agg[1], [0.5, 0.5]);

        let same = vec![vec![[0.2, 0.4], [0.2, 0.4]], vec![[0.2, 0.4], [0.2, 0.4]]];
        assert_eq!(aggregate(&same, 3, Aggregation::Mean)[1], [0.2, 0.4]);

        let votes = vec![vec![[0.0, 0.0], [2.0, 0.0]], vec![[0.0, 1.0], [0.0, 0.0]]];
        assert_eq!(aggregate(&votes, 3, Aggregation::MajorityVote)[1], [0.5, 0.5]);
    }

    #[test]
    fn decide_examples() {
        assert_eq!(decide(&[[0.0, 1.0], [0.7, 0.2]]), vec![1]);
        assert!(decide(&[[0.0, 1.0], [0.1, 0.1]]).is_empty());
        assert!(decide(&[[1.0, 0.0]]).is_empty());
    }

    #[test]
    fn zero_model_is_all_or_nothing() {
        let vocab = Vocabulary::default();
        let events: Vec<Event> = (0..10).map(|i| Event::new(i as f64, i % 5)).collect();
        let stream = EventStream::new(vocab, events, None).unwrap();
        let mut model = LstmModel::zeros(23, 4, 6).unwrap();
        model.params_mut().out_bias.copy_from_slice(&[1.0, 0.0]);
        let r = segment(&model, &stream, StatusAugmentation::NONE, Maxima::default()).unwrap();
        assert_eq!(r.boundaries, (1..10).collect::<Vec<_>>());
        assert_eq!(r.scores.len(), 10);
        model.params_mut().out_bias.copy_from_slice(&[0.0, 1.0]);
        let r = segment(&model, &stream, StatusAugmentation::NONE, Maxima::default()).unwrap();
        assert!(r.boundaries.is_empty());
    }

    #[test]
    fn width_mismatch_names_both_widths() {
        let vocab = Vocabulary::default();
        let stream = EventStream::new(vocab, vec![Event::new(0.0, 0)], None).unwrap();
        let model = LstmModel::zeros(23, 4, 6).unwrap();
        let err = segment(&model, &stream, "people".parse().unwrap(), Maxima::default()).unwrap_err();
        assert!(matches!(err, Error::WidthMismatch { expected: 23, actual: 24 }));
        assert!(err.to_string().contains("23") && err.to_string().contains("24"));
    }

    fn arb_outputs() -> impl Strategy<Value = (usize, usize, Vec<Vec<[f64; 2]>>)> {
        (1usize..20, 1usize..6).prop_flat_map(|(len, steps)| {
            let n = len.saturating_sub(steps) + 1;
            let per = (0..n).map(move |k| steps.min(len - k)).collect::<Vec<_>>();
            let strat = per
                .into_iter()
                .map(|v| prop::collection::vec([-2.0f64..2.0, -2.0f64..2.0], v))
                .collect::<Vec<_>>();
            (Just(len), Just(steps), strat)
        })
    }

    proptest! {
        #[test]
        fn perturbing_one_window_is_local((len, steps, outs) in arb_outputs(), pick in 0usize..100) {
            let base = aggregate(&outs, len, Aggregation::Mean);
            let k = pick % outs.len();
            let mut changed = outs.clone();
            for y in &mut changed[k] {
                y[0] += 1.0;
            }
            let after = aggregate(&changed, len, Aggregation::Mean);
            prop_assert_eq!(after.len(), len);
            for i in 0..len {
                if i < k || i >= k + steps {
                    prop_assert_eq!(base[i], after[i]);
                }
            }
        }

        #[test]
        fn decide_is_monotone(scores in prop::collection::vec([-1.0f64..1.0, -1.0f64..1.0], 1..30),
                              i in 0usize..30, bump in 0.0f64..2.0) {
            let i = i % scores.len();
            let before = decide(&scores);
            let mut raised = scores.clone();
            raised[i][0] += bump;
            let after = decide(&raised);
            for b in before {
                prop_assert!(after.contains(&b));
            }
        }
    }
}
