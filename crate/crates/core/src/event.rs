//! Event vocabulary, labeled event streams and the running object-state
//! tracker.
//!
//! A boundary index `b` always marks the *first* event of a new activity.
//! Index 0 starts the stream and is never counted, so a stream of `n`
//! activities carries `n - 1` boundaries.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default event names, in id order.
pub const DEFAULT_EVENT_NAMES: [&str; 23] = [
    "entrance",
    "exit",
    "light on",
    "light off",
    "door opened",
    "door closed",
    "sit down",
    "stand up",
    "air conditioner on",
    "air conditioner off",
    "heater on",
    "heater off",
    "projector on",
    "projector off",
    "screen down",
    "screen up",
    "computer on",
    "computer off",
    "window opened",
    "window closed",
    "phone ring",
    "whiteboard use",
    "coffee machine on",
];

/// Dense index into a [`Vocabulary`].
pub type EventId = usize;

/// What an event does to the tracked objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Effect {
    Enter,
    Leave,
    LightOn,
    LightOff,
    DoorOpen,
    DoorClose,
    SitDown,
    StandUp,
}

impl Effect {
    fn from_name(name: &str) -> Option<Effect> {
        match name.trim().to_ascii_lowercase().as_str() {
            "entrance" => Some(Effect::Enter),
            "exit" => Some(Effect::Leave),
            "light on" => Some(Effect::LightOn),
            "light off" => Some(Effect::LightOff),
            "door opened" => Some(Effect::DoorOpen),
            "door closed" => Some(Effect::DoorClose),
            "sit down" => Some(Effect::SitDown),
            "stand up" => Some(Effect::StandUp),
            _ => None,
        }
    }
}

/// One named event type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventType {
    pub id: EventId,
    pub name: String,
}

/// The closed set of event types a stream may contain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    names: Vec<String>,
    effects: Vec<Option<Effect>>,
    index: HashMap<String, EventId>,
}

impl Vocabulary {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::InvalidVocabulary("empty vocabulary".into()));
        }
        let mut index = HashMap::with_capacity(names.len());
        let mut owned = Vec::with_capacity(names.len());
        let mut effects = Vec::with_capacity(names.len());
        for (id, name) in names.iter().enumerate() {
            let name = name.as_ref().to_string();
            if index.insert(name.clone(), id).is_some() {
                return Err(Error::InvalidVocabulary(format!("duplicate name `{name}`")));
            }
            effects.push(Effect::from_name(&name));
            owned.push(name);
        }
        Ok(Vocabulary {
            names: owned,
            effects,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id(&self, name: &str) -> Result<EventId> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownEvent(name.to_string()))
    }

    pub fn name(&self, id: EventId) -> Result<&str> {
        self.names
            .get(id)
            .map(String::as_str)
            .ok_or(Error::EventIdOutOfRange(id, self.names.len()))
    }

    pub fn effect(&self, id: EventId) -> Option<Effect> {
        self.effects.get(id).copied().flatten()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn event_types(&self) -> impl Iterator<Item = EventType> + '_ {
        self.names.iter().enumerate().map(|(id, name)| EventType {
            id,
            name: name.clone(),
        })
    }

    /// Vocabulary file: a JSON array of names, index = id.
    pub fn from_json(text: &str) -> Result<Self> {
        let names: Vec<String> = serde_json::from_str(text)?;
        Vocabulary::new(&names)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.names).expect("string list serializes")
    }
}

impl Default for Vocabulary {
    fn default() -> Self {
        Vocabulary::new(&DEFAULT_EVENT_NAMES).expect("default vocabulary is valid")
    }
}

/// One timestamped sensor occurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    /// Seconds; finite, non-negative and non-decreasing within a stream.
    pub t: f64,
    pub event_type: EventId,
    pub user: Option<u32>,
    /// Ground-truth activity instance.
    pub activity_id: Option<u32>,
}

impl Event {
    pub fn new(t: f64, event_type: EventId) -> Self {
        Event {
            t,
            event_type,
            user: None,
            activity_id: None,
        }
    }
}

/// An ordered event list, optionally labeled with true boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct EventStream {
    vocab: Vocabulary,
    events: Vec<Event>,
    true_boundaries: Option<Vec<usize>>,
}

impl EventStream {
    /// Builds a stream, checking ordering, vocabulary membership and the
    /// boundary range `1..len`.
    pub fn new(
        vocab: Vocabulary,
        events: Vec<Event>,
        true_boundaries: Option<Vec<usize>>,
    ) -> Result<Self> {
        let mut prev = 0.0;
        for (i, ev) in events.iter().enumerate() {
            if !ev.t.is_finite() || ev.t < 0.0 {
                return Err(Error::InvalidStream(format!(
                    "event {i} has invalid timestamp {}",
                    ev.t
                )));
            }
            if ev.t < prev {
                return Err(Error::InvalidStream(format!(
                    "event {i} at t={} precedes t={prev}",
                    ev.t
                )));
            }
            prev = ev.t;
            if ev.event_type >= vocab.len() {
                return Err(Error::EventIdOutOfRange(ev.event_type, vocab.len()));
            }
        }
        let true_boundaries = match true_boundaries {
            Some(mut b) => {
                b.sort_unstable();
                b.dedup();
                if let Some(&bad) = b.iter().find(|&&x| x == 0 || x >= events.len()) {
                    return Err(Error::InvalidStream(format!(
                        "boundary {bad} outside 1..{}",
                        events.len()
                    )));
                }
                Some(b)
            }
            None => None,
        };
        Ok(EventStream {
            vocab,
            events,
            true_boundaries,
        })
    }

    /// Builds a stream whose boundaries are derived from `activity_id` runs.
    /// The stream is unlabeled unless every event carries an activity id.
    pub fn from_labeled_events(vocab: Vocabulary, events: Vec<Event>) -> Result<Self> {
        let labeled = !events.is_empty() && events.iter().all(|e| e.activity_id.is_some());
        let boundaries = labeled.then(|| boundaries_from_runs(&events));
        EventStream::new(vocab, events, boundaries)
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.events.iter().map(|e| e.t).collect()
    }

    pub fn true_boundaries(&self) -> Option<&[usize]> {
        self.true_boundaries.as_deref()
    }

    /// Per-event boundary flags; `None` when unlabeled.
    pub fn boundary_flags(&self) -> Option<Vec<bool>> {
        self.true_boundaries.as_ref().map(|b| {
            let mut flags = vec![false; self.events.len()];
            for &i in b {
                flags[i] = true;
            }
            flags
        })
    }

    /// Returns `events[range]` as its own stream, re-indexing boundaries.
    /// A boundary at `range.start` becomes index 0 and is dropped.
    pub fn slice(&self, range: std::ops::Range<usize>) -> EventStream {
        let events = self.events[range.clone()].to_vec();
        let true_boundaries = self.true_boundaries.as_ref().map(|b| {
            b.iter()
                .filter(|&&x| x > range.start && x < range.end)
                .map(|&x| x - range.start)
                .collect()
        });
        EventStream {
            vocab: self.vocab.clone(),
            events,
            true_boundaries,
        }
    }

    /// Reads a JSON-Lines event log. Unknown event names are rejected.
    pub fn read_jsonl<R: BufRead>(vocab: Vocabulary, reader: R) -> Result<Self> {
        let mut events = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: EventRecord =
                serde_json::from_str(&line).map_err(|source| Error::Parse { line: n + 1, source })?;
            events.push(Event {
                t: rec.t,
                event_type: vocab.id(&rec.event)?,
                user: rec.user,
                activity_id: rec.activity,
            });
        }
        EventStream::from_labeled_events(vocab, events)
    }

    /// Writes one JSON object per line. Activity ids are written as given;
    /// a stream built without them is written with `"activity": null`.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for ev in &self.events {
            let rec = EventRecordRef {
                t: ev.t,
                event: self.vocab.name(ev.event_type)?,
                user: ev.user,
                activity: ev.activity_id,
            };
            serde_json::to_writer(&mut out, &rec)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

#[derive(Deserialize)]
struct EventRecord {
    t: f64,
    event: String,
    #[serde(default)]
    user: Option<u32>,
    #[serde(default)]
    activity: Option<u32>,
}

#[derive(Serialize)]
struct EventRecordRef<'a> {
    t: f64,
    event: &'a str,
    user: Option<u32>,
    activity: Option<u32>,
}

fn boundaries_from_runs(events: &[Event]) -> Vec<usize> {
    events
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0].activity_id != w[1].activity_id)
        .map(|(i, _)| i + 1)
        .collect()
}

/// Capacity limits used for clamping and normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Maxima {
    pub max_people: u32,
    pub max_seats: u32,
}

impl Default for Maxima {
    fn default() -> Self {
        Maxima {
            max_people: 10,
            max_seats: 10,
        }
    }
}

/// Running status of the four tracked objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObjectState {
    pub light: bool,
    pub door_open: bool,
    pub people: u32,
    pub seats: u32,
    pub max_people: u32,
    pub max_seats: u32,
}

impl ObjectState {
    pub fn new(maxima: Maxima) -> Self {
        ObjectState {
            light: false,
            door_open: false,
            people: 0,
            seats: 0,
            max_people: maxima.max_people.max(1),
            max_seats: maxima.max_seats.max(1),
        }
    }

    pub fn maxima(&self) -> Maxima {
        Maxima {
            max_people: self.max_people,
            max_seats: self.max_seats,
        }
    }

    /// Applies one effect; counters saturate at 0 and at their maxima.
    pub fn with_effect(mut self, effect: Option<Effect>) -> ObjectState {
        match effect {
            Some(Effect::Enter) => self.people = (self.people + 1).min(self.max_people),
            Some(Effect::Leave) => self.people = self.people.saturating_sub(1),
            Some(Effect::LightOn) => self.light = true,
            Some(Effect::LightOff) => self.light = false,
            Some(Effect::DoorOpen) => self.door_open = true,
            Some(Effect::DoorClose) => self.door_open = false,
            Some(Effect::SitDown) => self.seats = (self.seats + 1).min(self.max_seats),
            Some(Effect::StandUp) => self.seats = self.seats.saturating_sub(1),
            None => {}
        }
        self
    }

    /// True when applying `effect` would have to clamp a counter.
    pub fn would_clamp(&self, effect: Option<Effect>) -> bool {
        match effect {
            Some(Effect::Enter) => self.people >= self.max_people,
            Some(Effect::Leave) => self.people == 0,
            Some(Effect::SitDown) => self.seats >= self.max_seats,
            Some(Effect::StandUp) => self.seats == 0,
            _ => false,
        }
    }
}

/// State after `ev`.
pub fn apply_event(vocab: &Vocabulary, state: ObjectState, ev: &Event) -> ObjectState {
    state.with_effect(vocab.effect(ev.event_type))
}

/// Prefix fold of [`apply_event`]: element `i` is the state after events
/// `0..=i`.
pub fn state_trace(stream: &EventStream, maxima: Maxima) -> Vec<ObjectState> {
    trace_from(stream.vocab(), ObjectState::new(maxima), stream.events())
}

/// [`state_trace`] starting from an arbitrary state.
pub fn trace_from(vocab: &Vocabulary, start: ObjectState, events: &[Event]) -> Vec<ObjectState> {
    events
        .iter()
        .scan(start, |state, ev| {
            *state = apply_event(vocab, *state, ev);
            Some(*state)
        })
        .collect()
}

/// Event and boundary counts of a labeled stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub e_total: usize,
    pub e_boundary: usize,
}

pub fn dataset_stats(stream: &EventStream) -> Result<DatasetStats> {
    let b = stream.true_boundaries().ok_or(Error::MissingGroundTruth)?;
    Ok(DatasetStats {
        e_total: stream.len(),
        e_boundary: b.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream_of(names: &[&str]) -> EventStream {
        let vocab = Vocabulary::default();
        let events = names
            .iter()
            .enumerate()
            .map(|(i, n)| Event::new(i as f64, vocab.id(n).unwrap()))
            .collect();
        EventStream::new(vocab, events, None).unwrap()
    }

    fn labeled(lengths: &[usize]) -> EventStream {
        let vocab = Vocabulary::default();
        let mut events = Vec::new();
        for (a, &len) in lengths.iter().enumerate() {
            for _ in 0..len {
                let mut ev = Event::new(events.len() as f64, 0);
                ev.activity_id = Some(a as u32);
                events.push(ev);
            }
        }
        EventStream::from_labeled_events(vocab, events).unwrap()
    }

    #[test]
    fn default_vocabulary_has_23_unique_names() {
        let v = Vocabulary::default();
        assert_eq!(v.len(), 23);
        for (id, et) in v.event_types().enumerate() {
            assert_eq!(et.id, id);
            assert_eq!(v.id(&et.name).unwrap(), id);
        }
    }

    #[test]
    fn duplicate_names_rejected() {
        assert!(Vocabulary::new(&["a", "b", "a"]).is_err());
    }

    #[test]
    fn apply_event_examples() {
        let v = Vocabulary::default();
        let s = ObjectState::new(Maxima::default());
        let ev = |n: &str| Event::new(0.0, v.id(n).unwrap());
        assert_eq!(apply_event(&v, s, &ev("entrance")).people, 1);
        assert_eq!(apply_event(&v, s, &ev("exit")).people, 0);
        assert!(apply_event(&v, s, &ev("light on")).light);
        assert!(!apply_event(&v, apply_event(&v, s, &ev("light on")), &ev("light off")).light);
        assert!(apply_event(&v, s, &ev("door opened")).door_open);
        assert_eq!(apply_event(&v, s, &ev("phone ring")), s);
    }

    #[test]
    fn entrance_clamps_at_max_people() {
        let v = Vocabulary::default();
        let mut s = ObjectState::new(Maxima {
            max_people: 2,
            max_seats: 1,
        });
        for _ in 0..5 {
            s = apply_event(&v, s, &Event::new(0.0, v.id("entrance").unwrap()));
            s = apply_event(&v, s, &Event::new(0.0, v.id("sit down").unwrap()));
        }
        assert_eq!((s.people, s.seats), (2, 1));
    }

    #[test]
    fn state_trace_examples() {
        let tr = state_trace(&stream_of(&["entrance", "sit down"]), Maxima::default());
        assert_eq!(tr.len(), 2);
        assert_eq!((tr[0].people, tr[0].seats), (1, 0));
        assert_eq!((tr[1].people, tr[1].seats), (1, 1));

        assert!(state_trace(&stream_of(&[]), Maxima::default()).is_empty());

        let tr = state_trace(&stream_of(&["entrance", "entrance", "exit"]), Maxima::default());
        assert_eq!(tr.iter().map(|s| s.people).collect::<Vec<_>>(), vec![1, 2, 1]);
    }

    #[test]
    fn dataset_stats_examples() {
        assert_eq!(
            dataset_stats(&labeled(&[4])).unwrap(),
            DatasetStats { e_total: 4, e_boundary: 0 }
        );
        assert_eq!(
            dataset_stats(&labeled(&[4, 5])).unwrap(),
            DatasetStats { e_total: 9, e_boundary: 1 }
        );
        assert_eq!(labeled(&[4, 5]).true_boundaries().unwrap(), &[4]);
        assert!(matches!(
            dataset_stats(&stream_of(&["entrance"])),
            Err(Error::MissingGroundTruth)
        ));
    }

    #[test]
    fn unsorted_stream_rejected() {
        let v = Vocabulary::default();
        let events = vec![Event::new(2.0, 0), Event::new(1.0, 0)];
        assert!(EventStream::new(v, events, None).is_err());
    }

    #[test]
    fn boundary_zero_rejected() {
        let v = Vocabulary::default();
        let events = vec![Event::new(0.0, 0), Event::new(1.0, 0)];
        assert!(EventStream::new(v, events, Some(vec![0])).is_err());
    }

    #[test]
    fn slice_reindexes_and_drops_cut_boundary() {
        let s = labeled(&[4, 5, 3]);
        assert_eq!(s.true_boundaries().unwrap(), &[4, 9]);
        let tail = s.slice(4..12);
        assert_eq!(tail.true_boundaries().unwrap(), &[5]);
        let head = s.slice(0..4);
        assert!(head.true_boundaries().unwrap().is_empty());
    }

    #[test]
    fn jsonl_unknown_event_is_error() {
        let text = "{\"t\":0,\"event\":\"teleport\",\"user\":null,\"activity\":null}\n";
        let err = EventStream::read_jsonl(Vocabulary::default(), text.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::UnknownEvent(n) if n == "teleport"));
    }

    #[test]
    fn jsonl_round_trip() {
        let s = labeled(&[4, 5]);
        let mut buf = Vec::new();
        s.write_jsonl(&mut buf).unwrap();
        let back = EventStream::read_jsonl(Vocabulary::default(), buf.as_slice()).unwrap();
        assert_eq!(back, s);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_ids() -> impl Strategy<Value = Vec<usize>> {
            // Bias towards the counter-affecting events.
            prop::collection::vec(prop_oneof![0usize..2, 6usize..8, 0usize..23], 0..80)
        }

        fn build(ids: &[usize]) -> EventStream {
            let events = ids
                .iter()
                .enumerate()
                .map(|(i, &id)| Event::new(i as f64, id))
                .collect();
            EventStream::new(Vocabulary::default(), events, None).unwrap()
        }

        proptest! {
            #[test]
            fn counters_stay_in_range(ids in arb_ids()) {
                let m = Maxima { max_people: 3, max_seats: 2 };
                for s in state_trace(&build(&ids), m) {
                    prop_assert!(s.people <= 3);
                    prop_assert!(s.seats <= 2);
                }
            }

            #[test]
            fn trace_is_prefix_fold(a in arb_ids(), b in arb_ids()) {
                let m = Maxima::default();
                let mut ab = a.clone();
                ab.extend_from_slice(&b);
                let whole = state_trace(&build(&ab), m);
                let first = state_trace(&build(&a), m);
                let start = first.last().copied().unwrap_or_else(|| ObjectState::new(m));
                let tail = trace_from(&Vocabulary::default(), start, build(&b).events());
                prop_assert_eq!(&whole[a.len()..], &tail[..]);
            }

            #[test]
            fn boundary_count_matches_runs(labels in prop::collection::vec(0u32..4, 1..60)) {
                let events: Vec<Event> = labels.iter().enumerate().map(|(i, &a)| {
                    let mut e = Event::new(i as f64, 0);
                    e.activity_id = Some(a);
                    e
                }).collect();
                let runs = 1 + labels.windows(2).filter(|w| w[0] != w[1]).count();
                let s = EventStream::from_labeled_events(Vocabulary::default(), events).unwrap();
                prop_assert_eq!(dataset_stats(&s).unwrap().e_boundary, runs - 1);
            }
        }
    }
}
