//! Event → input-vector encoding: a one-hot event identity followed by
//! optional object-status features.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::{state_trace, Event, EventStream, Maxima, ObjectState, Vocabulary};

/// One tracked object whose status can be appended to the input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StatusObject {
    People,
    Light,
    Door,
    Seats,
}

impl StatusObject {
    /// Appended order.
    pub const ALL: [StatusObject; 4] = [
        StatusObject::People,
        StatusObject::Light,
        StatusObject::Door,
        StatusObject::Seats,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StatusObject::People => "people",
            StatusObject::Light => "light",
            StatusObject::Door => "door",
            StatusObject::Seats => "seats",
        }
    }

    fn feature(self, state: &ObjectState) -> f64 {
        match self {
            StatusObject::People => f64::from(state.people) / f64::from(state.max_people),
            StatusObject::Light => f64::from(u8::from(state.light)),
            StatusObject::Door => f64::from(u8::from(state.door_open)),
            StatusObject::Seats => f64::from(state.seats) / f64::from(state.max_seats),
        }
    }
}

/// Selected subset of status objects. Parsed from strings such as
/// `"people+light"`; the empty string selects none.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct StatusAugmentation {
    flags: [bool; 4],
}

impl StatusAugmentation {
    pub const NONE: StatusAugmentation = StatusAugmentation { flags: [false; 4] };

    pub fn with(mut self, obj: StatusObject) -> Self {
        self.flags[obj as usize] = true;
        self
    }

    pub fn contains(&self, obj: StatusObject) -> bool {
        self.flags[obj as usize]
    }

    pub fn objects(&self) -> impl Iterator<Item = StatusObject> + '_ {
        StatusObject::ALL.into_iter().filter(|o| self.contains(*o))
    }

    pub fn len(&self) -> usize {
        self.flags.iter().filter(|f| **f).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Total vector width for a vocabulary of `vocab_len` events.
    pub fn width(&self, vocab_len: usize) -> usize {
        vocab_len + self.len()
    }
}

impl FromStr for StatusAugmentation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut aug = StatusAugmentation::NONE;
        for part in s.split('+').map(str::trim).filter(|p| !p.is_empty()) {
            let obj = match part.to_ascii_lowercase().as_str() {
                "people" | "people_count" => StatusObject::People,
                "light" => StatusObject::Light,
                "door" => StatusObject::Door,
                "seats" | "seats_count" => StatusObject::Seats,
                "basic" | "none" => continue,
                _ => return Err(Error::UnknownAugmentation(part.to_string())),
            };
            aug = aug.with(obj);
        }
        Ok(aug)
    }
}

impl fmt::Display for StatusAugmentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = self.objects().map(StatusObject::as_str).collect();
        f.write_str(&parts.join("+"))
    }
}

impl Serialize for StatusAugmentation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for StatusAugmentation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which object state accompanies an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateTiming {
    /// The state including the event's own effect.
    #[default]
    After,
    Before,
}

/// A single encoded event.
#[derive(Debug, Clone, PartialEq)]
pub struct InputVector(pub Vec<f64>);

pub fn encode_event(
    vocab: &Vocabulary,
    ev: &Event,
    state: &ObjectState,
    aug: StatusAugmentation,
) -> Result<InputVector> {
    let mut v = vec![0.0; aug.width(vocab.len())];
    write_row(&mut v, vocab.len(), ev, state, aug)?;
    Ok(InputVector(v))
}

fn write_row(
    row: &mut [f64],
    vocab_len: usize,
    ev: &Event,
    state: &ObjectState,
    aug: StatusAugmentation,
) -> Result<()> {
    if ev.event_type >= vocab_len {
        return Err(Error::EventIdOutOfRange(ev.event_type, vocab_len));
    }
    row[ev.event_type] = 1.0;
    for (slot, obj) in row[vocab_len..].iter_mut().zip(aug.objects()) {
        *slot = obj.feature(state);
    }
    Ok(())
}

/// Row-major matrix of encoded events, one row per event.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedStream {
    width: usize,
    data: Vec<f64>,
}

impl EncodedStream {
    pub fn from_rows(width: usize, data: Vec<f64>) -> Self {
        assert!(width > 0 && data.len().is_multiple_of(width), "ragged encoded rows");
        EncodedStream { width, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.width
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.width..(i + 1) * self.width]
    }

    pub fn rows(&self, range: std::ops::Range<usize>) -> &[f64] {
        &self.data[range.start * self.width..range.end * self.width]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

pub fn encode_stream(
    stream: &EventStream,
    aug: StatusAugmentation,
    maxima: Maxima,
) -> Result<EncodedStream> {
    encode_stream_with(stream, aug, maxima, StateTiming::After)
}

pub fn encode_stream_with(
    stream: &EventStream,
    aug: StatusAugmentation,
    maxima: Maxima,
    timing: StateTiming,
) -> Result<EncodedStream> {
    let vocab = stream.vocab();
    let width = aug.width(vocab.len());
    let trace = state_trace(stream, maxima);
    let initial = ObjectState::new(maxima);
    let mut data = vec![0.0; width * stream.len()];
    for (i, (ev, row)) in stream.events().iter().zip(data.chunks_mut(width)).enumerate() {
        let state = match timing {
            StateTiming::After => &trace[i],
            StateTiming::Before if i == 0 => &initial,
            StateTiming::Before => &trace[i - 1],
        };
        write_row(row, vocab.len(), ev, state, aug)?;
    }
    Ok(EncodedStream { width, data })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::Maxima;

    #[test]
    fn parse_and_display() {
        let aug: StatusAugmentation = "light+people".parse().unwrap();
        assert_eq!(aug.to_string(), "people+light");
        assert!("".parse::<StatusAugmentation>().unwrap().is_empty());
        assert!("people+fridge".parse::<StatusAugmentation>().is_err());
    }

    #[test]
    fn people_light_example() {
        let vocab = Vocabulary::default();
        let mut state = ObjectState::new(Maxima::default());
        state.people = 3;
        state.light = true;
        let aug = "people+light".parse().unwrap();
        let v = encode_event(&vocab, &Event::new(0.0, 5), &state, aug).unwrap().0;
        assert_eq!(v.len(), 25);
        assert_eq!(v[5], 1.0);
        assert_eq!(v[..23].iter().sum::<f64>(), 1.0);
        assert_eq!(&v[23..], &[0.3, 1.0]);
    }

    #[test]
    fn basic_is_pure_one_hot() {
        let vocab = Vocabulary::default();
        let state = ObjectState::new(Maxima::default());
        let v = encode_event(&vocab, &Event::new(0.0, 7), &state, StatusAugmentation::NONE)
            .unwrap()
            .0;
        assert_eq!(v.len(), 23);
        assert_eq!(v.iter().filter(|x| **x == 1.0).count(), 1);
        assert_eq!(v[7], 1.0);
    }

    #[test]
    fn full_people_normalizes_to_one() {
        let vocab = Vocabulary::default();
        let mut state = ObjectState::new(Maxima::default());
        state.people = state.max_people;
        let v = encode_event(&vocab, &Event::new(0.0, 0), &state, "people".parse().unwrap())
            .unwrap()
            .0;
        assert_eq!(v[23], 1.0);
    }

    #[test]
    fn unknown_event_is_error() {
        let vocab = Vocabulary::default();
        let state = ObjectState::new(Maxima::default());
        assert!(encode_event(&vocab, &Event::new(0.0, 99), &state, StatusAugmentation::NONE).is_err());
    }

    #[test]
    fn stream_examples() {
        let vocab = Vocabulary::default();
        let empty = EventStream::new(vocab.clone(), vec![], None).unwrap();
        assert!(encode_stream(&empty, StatusAugmentation::NONE, Maxima::default())
            .unwrap()
            .is_empty());

        let one = EventStream::new(vocab.clone(), vec![Event::new(0.0, 0)], None).unwrap();
        let enc = encode_stream(&one, "people".parse().unwrap(), Maxima::default()).unwrap();
        assert_eq!(enc.len(), 1);
        assert_eq!(enc.row(0)[23], 0.1);

        let before =
            encode_stream_with(&one, "people".parse().unwrap(), Maxima::default(), StateTiming::Before)
                .unwrap();
        assert_eq!(before.row(0)[23], 0.0);
    }

    #[test]
    fn toggling_light_changes_one_coordinate() {
        let vocab = Vocabulary::default();
        let aug: StatusAugmentation = "people+light+door+seats".parse().unwrap();
        let mut s = ObjectState::new(Maxima::default());
        s.people = 2;
        let ev = Event::new(0.0, 4);
        let a = encode_event(&vocab, &ev, &s, aug).unwrap().0;
        s.light = true;
        let b = encode_event(&vocab, &ev, &s, aug).unwrap().0;
        s.door_open = true;
        let c = encode_event(&vocab, &ev, &s, aug).unwrap().0;
        let diff = |x: &[f64], y: &[f64]| x.iter().zip(y).filter(|(p, q)| p != q).count();
        assert_eq!(diff(&a, &b), 1);
        assert_eq!(diff(&b, &c), 1);
    }
}
