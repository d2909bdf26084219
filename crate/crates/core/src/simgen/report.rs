use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Corpus;
use crate::encoder::StatusObject;
use crate::event::Effect;

/// Window length the generator's activity lengths are checked against.
pub const LENGTH_LIMIT: usize = 60;

/// Summary statistics of a generated corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub n_activities: usize,
    pub n_events: usize,
    pub n_boundaries: usize,
    /// Activity type → event name → fraction of instances containing it.
    pub inclusion: BTreeMap<String, BTreeMap<String, f64>>,
    /// Event name → share of its occurrences in the first, middle and last
    /// third of their activity.
    pub thirds: BTreeMap<String, [f64; 3]>,
    /// Activity length → count.
    pub length_histogram: BTreeMap<usize, usize>,
    pub min_length: usize,
    pub max_length: usize,
    pub mean_length: f64,
    /// Fraction of activities shorter than [`LENGTH_LIMIT`].
    pub fraction_below_limit: f64,
    /// Status object → fraction of activities containing one of its events.
    pub object_relevance: BTreeMap<String, f64>,
    pub redundant_activities: usize,
    pub shared_activities: usize,
}

fn object_of(effect: Effect) -> StatusObject {
    match effect {
        Effect::Enter | Effect::Leave => StatusObject::People,
        Effect::LightOn | Effect::LightOff => StatusObject::Light,
        Effect::DoorOpen | Effect::DoorClose => StatusObject::Door,
        Effect::SitDown | Effect::StandUp => StatusObject::Seats,
    }
}

pub fn corpus_report(corpus: &Corpus) -> CorpusReport {
    let stream = &corpus.stream;
    let vocab = stream.vocab();
    let events = stream.events();
    let v = vocab.len();

    let mut per_type: BTreeMap<&str, (usize, Vec<usize>)> = BTreeMap::new();
    let mut thirds = vec![[0usize; 3]; v];
    let mut hist = BTreeMap::new();
    let mut relevance = [0usize; 4];

    for a in &corpus.activities {
        let slice = &events[a.start..a.start + a.len];
        let mut present = vec![false; v];
        let mut objects = [false; 4];
        for (i, ev) in slice.iter().enumerate() {
            present[ev.event_type] = true;
            thirds[ev.event_type][(3 * i / a.len).min(2)] += 1;
            if let Some(e) = vocab.effect(ev.event_type) {
                objects[object_of(e) as usize] = true;
            }
        }
        let entry = per_type
            .entry(a.template.as_str())
            .or_insert_with(|| (0, vec![0; v]));
        entry.0 += 1;
        for (c, p) in entry.1.iter_mut().zip(&present) {
            *c += usize::from(*p);
        }
        for (r, o) in relevance.iter_mut().zip(objects) {
            *r += usize::from(o);
        }
        *hist.entry(a.len).or_insert(0) += 1;
    }

    let n = corpus.activities.len();
    let names = vocab.names();
    let inclusion = per_type
        .into_iter()
        .map(|(name, (count, hits))| {
            let probs = hits
                .iter()
                .enumerate()
                .filter(|(_, &h)| h > 0)
                .map(|(id, &h)| (names[id].clone(), h as f64 / count as f64))
                .collect();
            (name.to_string(), probs)
        })
        .collect();
    let thirds = thirds
        .iter()
        .enumerate()
        .filter(|(_, c)| c.iter().sum::<usize>() > 0)
        .map(|(id, c)| {
            let total = c.iter().sum::<usize>() as f64;
            (names[id].clone(), c.map(|x| x as f64 / total))
        })
        .collect();
    let lengths = corpus.activities.iter().map(|a| a.len);
    let object_relevance = StatusObject::ALL
        .iter()
        .map(|o| (o.as_str().to_string(), relevance[*o as usize] as f64 / n.max(1) as f64))
        .collect();

    CorpusReport {
        n_activities: n,
        n_events: stream.len(),
        n_boundaries: stream.true_boundaries().map_or(0, <[usize]>::len),
        inclusion,
        thirds,
        length_histogram: hist,
        min_length: lengths.clone().min().unwrap_or(0),
        max_length: lengths.clone().max().unwrap_or(0),
        mean_length: stream.len() as f64 / n.max(1) as f64,
        fraction_below_limit: lengths.filter(|&l| l < LENGTH_LIMIT).count() as f64 / n.max(1) as f64,
        object_relevance,
        redundant_activities: corpus.activities.iter().filter(|a| a.redundant).count(),
        shared_activities: corpus
            .activities
            .iter()
            .filter(|a| a.shared_with_previous)
            .count(),
    }
}
