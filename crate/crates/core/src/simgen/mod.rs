//! Synthetic multi-user smart-room generator.
//!
//! Produces labeled, concatenated event streams in which
//! - optional events depend on time of day and season,
//! - guests arrive and leave at staggered times, so presence events show up
//!   anywhere inside an activity,
//! - a participant may leave and come back mid-activity (redundant events),
//! - consecutive activities by the same person skip setup events whose
//!   effect is already in place (shared events).
//!
//! Gaps are log-normal. The first and last gap of every activity are shrunk
//! so that events cluster around activity starts and ends.

mod report;
mod templates;

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::{apply_event, Effect, Event, EventId, EventStream, Maxima, ObjectState, Vocabulary};

pub use report::{corpus_report, CorpusReport, LENGTH_LIMIT};
pub use templates::{default_templates, ActivityTemplate, Condition, OptionalEvent, Placement};

/// Log-normal gap distribution given by its median (seconds) and the
/// standard deviation of the underlying normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapModel {
    pub median: f64,
    pub sigma: f64,
}

impl GapModel {
    fn distribution(&self, scale: f64) -> Result<LogNormal<f64>> {
        LogNormal::new((self.median * scale).ln(), self.sigma)
            .map_err(|e| Error::InvalidConfig(format!("gap model: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub templates: Vec<ActivityTemplate>,
    /// Gaps between events of one activity.
    pub intra_gap: GapModel,
    /// Gaps between consecutive activities.
    pub inter_gap: GapModel,
    /// Absence during a leave-and-return episode.
    pub return_gap: GapModel,
    /// Multiplier (< 1) on the first and last gap of each activity.
    pub boundary_cluster_factor: f64,
    pub shared_event_prob: f64,
    pub redundancy_prob: f64,
    /// Chance that an activity is hosted by the previous activity's host.
    pub repeat_user_prob: f64,
    /// A guest arrives during the body rather than right after the host.
    pub late_arrival_prob: f64,
    /// A guest leaves during the body rather than at teardown.
    pub early_departure_prob: f64,
    pub night_prob: f64,
    pub summer_prob: f64,
    pub winter_prob: f64,
    pub n_users: u32,
    pub maxima: Maxima,
    pub min_activity_length: usize,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            templates: default_templates(),
            intra_gap: GapModel {
                median: 30.0,
                sigma: 0.8,
            },
            inter_gap: GapModel {
                median: 600.0,
                sigma: 0.5,
            },
            return_gap: GapModel {
                median: 300.0,
                sigma: 0.8,
            },
            boundary_cluster_factor: 0.3,
            shared_event_prob: 0.5,
            redundancy_prob: 0.25,
            repeat_user_prob: 0.3,
            late_arrival_prob: 0.5,
            early_departure_prob: 0.25,
            night_prob: 0.4,
            summer_prob: 0.3,
            winter_prob: 0.3,
            n_users: 10,
            maxima: Maxima::default(),
            min_activity_length: 4,
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    pub fn check(&self, vocab: &Vocabulary) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        for (name, p) in [
            ("shared_event_prob", self.shared_event_prob),
            ("redundancy_prob", self.redundancy_prob),
            ("repeat_user_prob", self.repeat_user_prob),
            ("late_arrival_prob", self.late_arrival_prob),
            ("early_departure_prob", self.early_departure_prob),
            ("night_prob", self.night_prob),
            ("summer_prob", self.summer_prob),
            ("winter_prob", self.winter_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must be in [0, 1], got {p}"));
            }
        }
        if self.summer_prob + self.winter_prob > 1.0 {
            return bad("summer_prob + winter_prob exceeds 1".into());
        }
        for (name, g) in [
            ("intra_gap", self.intra_gap),
            ("inter_gap", self.inter_gap),
            ("return_gap", self.return_gap),
        ] {
            if !(g.median > 0.0 && g.median.is_finite() && g.sigma >= 0.0 && g.sigma.is_finite()) {
                return bad(format!("{name} needs a positive median and non-negative sigma"));
            }
        }
        if self.intra_gap.median >= self.inter_gap.median {
            return bad("intra-activity gap median must be below the inter-activity median".into());
        }
        if !(self.boundary_cluster_factor > 0.0 && self.boundary_cluster_factor <= 1.0) {
            return bad("boundary_cluster_factor must be in (0, 1]".into());
        }
        if self.templates.is_empty() {
            return bad("no activity templates".into());
        }
        let most = self.templates.iter().map(|t| t.participants.1).max().unwrap_or(1);
        if most > self.n_users || most > self.maxima.max_people || most > self.maxima.max_seats {
            return bad(format!(
                "up to {most} participants need that many users, people and seats"
            ));
        }
        for t in &self.templates {
            check_template(t, vocab, self.min_activity_length)?;
        }
        Ok(())
    }
}

fn check_template(t: &ActivityTemplate, vocab: &Vocabulary, min_len: usize) -> Result<()> {
    let bad = |msg: &str| Err(Error::InvalidConfig(format!("template `{}`: {msg}", t.name)));
    if t.skeleton.len() < 2 || t.skeleton.len() < min_len {
        return bad("skeleton shorter than the minimum activity length");
    }
    let effects: Vec<Option<Effect>> = t
        .skeleton
        .iter()
        .map(|n| vocab.id(n).map(|id| vocab.effect(id)))
        .collect::<Result<_>>()?;
    if effects.first() != Some(&Some(Effect::Enter)) || effects.last() != Some(&Some(Effect::Leave)) {
        return bad("skeleton must start with entrance and end with exit");
    }
    let inner = &effects[1..effects.len() - 1];
    let sits = inner.iter().filter(|e| **e == Some(Effect::SitDown)).count();
    let stands = inner.iter().filter(|e| **e == Some(Effect::StandUp)).count();
    let presence = inner
        .iter()
        .any(|e| matches!(e, Some(Effect::Enter | Effect::Leave)));
    let seated_ok = (sits == 0 && stands == 0)
        || (sits == 1
            && stands == 1
            && inner.first() == Some(&Some(Effect::SitDown))
            && inner.last() == Some(&Some(Effect::StandUp)));
    if presence || !seated_ok {
        return bad("only the host's sit down / stand up may wrap the skeleton body");
    }
    if t.participants.0 == 0 || t.participants.0 > t.participants.1 {
        return bad("participant range must be 1 <= min <= max");
    }
    if !(t.duration_scale > 0.0 && t.weight >= 0.0) {
        return bad("duration_scale must be positive and weight non-negative");
    }
    for o in &t.optional_events {
        if !(0.0..=1.0).contains(&o.probability) || !(0.0..=1.0).contains(&o.otherwise) {
            return bad("optional event probabilities must be in [0, 1]");
        }
        vocab.id(&o.event)?;
        if let Some(c) = &o.closing {
            vocab.id(c)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Season {
    Summer,
    Winter,
    Mild,
}

/// Situation an activity takes place in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Context {
    pub night: bool,
    pub season: Season,
}

impl Context {
    pub fn sample<R: Rng>(config: &GeneratorConfig, rng: &mut R) -> Self {
        let night = rng.gen_bool(config.night_prob);
        let u: f64 = rng.gen();
        let season = if u < config.summer_prob {
            Season::Summer
        } else if u < config.summer_prob + config.winter_prob {
            Season::Winter
        } else {
            Season::Mild
        };
        Context { night, season }
    }

    fn holds(&self, condition: Condition) -> bool {
        match condition {
            Condition::Always => true,
            Condition::Night => self.night,
            Condition::Day => !self.night,
            Condition::Summer => self.season == Season::Summer,
            Condition::Winter => self.season == Season::Winter,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum GapKind {
    Normal,
    /// The participant was away before this event.
    Return,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Step {
    event: EventId,
    user: u32,
    gap: GapKind,
}

/// One generated activity before timestamps are assigned.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityInstance {
    pub template: String,
    pub participants: Vec<u32>,
    pub context: Context,
    pub redundant: bool,
    /// Setup openers with their teardown closers.
    switches: Vec<(EventId, EventId)>,
    setup: Vec<Step>,
    body: Vec<Step>,
    teardown: Vec<Step>,
}

impl ActivityInstance {
    fn steps(&self) -> impl Iterator<Item = &Step> {
        self.setup.iter().chain(&self.body).chain(&self.teardown)
    }

    pub fn event_ids(&self) -> Vec<EventId> {
        self.steps().map(|s| s.event).collect()
    }

    pub fn len(&self) -> usize {
        self.setup.len() + self.body.len() + self.teardown.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn host(&self) -> u32 {
        self.participants[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BlockTag {
    Plain,
    Arrival(u32),
    Departure(u32),
}

struct Block {
    steps: Vec<Step>,
    tag: BlockTag,
}

/// Resolves names once per generation run.
struct Ids {
    entrance: EventId,
    exit: EventId,
    sit: EventId,
    stand: EventId,
}

impl Ids {
    fn new(vocab: &Vocabulary) -> Result<Self> {
        Ok(Ids {
            entrance: vocab.id("entrance")?,
            exit: vocab.id("exit")?,
            sit: vocab.id("sit down")?,
            stand: vocab.id("stand up")?,
        })
    }
}

fn step(event: EventId, user: u32) -> Step {
    Step {
        event,
        user,
        gap: GapKind::Normal,
    }
}

/// Generates one instance of `template` for `participants` (host first).
///
/// Each participant independently steps out and comes back during the body
/// with probability `config.redundancy_prob`.
pub fn generate_activity<R: Rng>(
    vocab: &Vocabulary,
    config: &GeneratorConfig,
    template: &ActivityTemplate,
    context: &Context,
    participants: &[u32],
    rng: &mut R,
) -> Result<ActivityInstance> {
    let ids = Ids::new(vocab)?;
    let host = *participants
        .first()
        .ok_or_else(|| Error::InvalidConfig("an activity needs a participant".into()))?;
    let skeleton: Vec<EventId> = template
        .skeleton
        .iter()
        .map(|n| vocab.id(n))
        .collect::<Result<_>>()?;
    let seated = skeleton.contains(&ids.sit);
    let core = if seated {
        &skeleton[2..skeleton.len() - 2]
    } else {
        &skeleton[1..skeleton.len() - 1]
    };

    // Optional events, decided in template order.
    let mut setup_openers = Vec::new();
    let mut setup_closers = Vec::new();
    let mut switches = Vec::new();
    let mut body_extra = Vec::new();
    let mut body_closers = Vec::new();
    for o in &template.optional_events {
        let p = if context.holds(o.condition) {
            o.probability
        } else {
            o.otherwise
        };
        if !rng.gen_bool(p) {
            continue;
        }
        let open = vocab.id(&o.event)?;
        let close = o.closing.as_deref().map(|c| vocab.id(c)).transpose()?;
        match o.placement {
            Placement::Setup => {
                setup_openers.push(open);
                setup_closers.extend(close);
                switches.extend(close.map(|c| (open, c)));
            }
            Placement::Body => {
                let n = if close.is_none() { rng.gen_range(1..=o.repeats.max(1)) } else { 1 };
                body_extra.extend(std::iter::repeat_n(open, n as usize));
                body_closers.extend(close);
            }
        }
    }

    let mut setup = vec![step(ids.entrance, host)];
    setup.extend(setup_openers.iter().map(|&e| step(e, host)));
    if seated {
        setup.push(step(ids.sit, host));
    }

    let mut blocks: Vec<Block> = core
        .iter()
        .map(|&e| Block {
            steps: vec![step(e, host)],
            tag: BlockTag::Plain,
        })
        .collect();
    for e in body_extra {
        let pos = rng.gen_range(0..=blocks.len());
        blocks.insert(
            pos,
            Block {
                steps: vec![step(e, host)],
                tag: BlockTag::Plain,
            },
        );
    }

    let arrive = |u: u32| -> Vec<Step> {
        let mut v = vec![step(ids.entrance, u)];
        if seated {
            v.push(step(ids.sit, u));
        }
        v
    };
    let depart = |u: u32| -> Vec<Step> {
        let mut v = Vec::new();
        if seated {
            v.push(step(ids.stand, u));
        }
        v.push(step(ids.exit, u));
        v
    };

    let guests = &participants[1..];
    let mut late_departures = Vec::new();
    for &g in guests {
        if rng.gen_bool(config.late_arrival_prob) {
            let pos = rng.gen_range(0..=blocks.len() / 2);
            blocks.insert(
                pos,
                Block {
                    steps: arrive(g),
                    tag: BlockTag::Arrival(g),
                },
            );
        } else {
            setup.extend(arrive(g));
        }
    }
    for &g in guests {
        if rng.gen_bool(config.early_departure_prob) {
            let after = blocks
                .iter()
                .position(|b| b.tag == BlockTag::Arrival(g))
                .map_or(0, |i| i + 1);
            let pos = rng.gen_range(after..=blocks.len());
            blocks.insert(
                pos,
                Block {
                    steps: depart(g),
                    tag: BlockTag::Departure(g),
                },
            );
        } else {
            late_departures.push(g);
        }
    }

    // Any participant may step out and come back; guests only while present.
    let mut redundant = false;
    for &u in participants {
        if !rng.gen_bool(config.redundancy_prob) {
            continue;
        }
        redundant = true;
        let mut trip = depart(u);
        trip.push(Step {
            event: ids.entrance,
            user: u,
            gap: GapKind::Return,
        });
        if seated {
            trip.push(step(ids.sit, u));
        }
        let arrived = blocks
            .iter()
            .position(|b| b.tag == BlockTag::Arrival(u))
            .map_or(0, |i| i + 1);
        let left = blocks
            .iter()
            .position(|b| b.tag == BlockTag::Departure(u))
            .unwrap_or(blocks.len());
        let pos = rng.gen_range(arrived..=left.max(arrived));
        blocks.insert(
            pos,
            Block {
                steps: trip,
                tag: BlockTag::Plain,
            },
        );
    }
    let body: Vec<Step> = blocks.into_iter().flat_map(|b| b.steps).collect();

    // Guests and equipment wind down in random order, then the host leaves
    // last after switching off whatever was set up on arrival.
    let mut wind_down: Vec<Vec<Step>> = body_closers.iter().map(|&e| vec![step(e, host)]).collect();
    wind_down.extend(late_departures.into_iter().map(depart));
    wind_down.shuffle(rng);
    let mut teardown: Vec<Step> = wind_down.into_iter().flatten().collect();
    if seated {
        teardown.push(step(ids.stand, host));
    }
    teardown.extend(setup_closers.iter().rev().map(|&e| step(e, host)));
    teardown.push(step(ids.exit, host));

    Ok(ActivityInstance {
        template: template.name.clone(),
        participants: participants.to_vec(),
        context: *context,
        redundant,
        switches,
        setup,
        body,
        teardown,
    })
}

/// Ground-truth bookkeeping for one activity of a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityRecord {
    pub id: u32,
    pub template: String,
    /// Index of the first event in the stream.
    pub start: usize,
    pub len: usize,
    pub participants: usize,
    pub host: u32,
    pub context: Context,
    pub redundant: bool,
    /// Setup was skipped because the previous activity left it in place.
    pub shared_with_previous: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub stream: EventStream,
    pub activities: Vec<ActivityRecord>,
}

/// Folds `steps` into `state`.
fn advance(vocab: &Vocabulary, state: ObjectState, steps: &[Step]) -> ObjectState {
    steps
        .iter()
        .fold(state, |s, st| apply_event(vocab, s, &Event::new(0.0, st.event)))
}

/// Turns `next` into a continuation of `prev`: `prev` loses its teardown,
/// `next` drops setup events whose effect `state` (the state after the
/// shortened `prev`) already shows, and `next` inherits any switch-offs
/// `prev` would have done. Returns false, leaving both untouched, when
/// either side would fall below `min_len`.
fn share_events(
    vocab: &Vocabulary,
    ids: &Ids,
    prev: &mut ActivityInstance,
    next: &mut ActivityInstance,
    state_before_prev: ObjectState,
    min_len: usize,
) -> bool {
    let prev_len = prev.setup.len() + prev.body.len();
    let inherited: Vec<Step> = prev
        .teardown
        .iter()
        .filter(|s| s.event != ids.stand && s.event != ids.exit)
        .copied()
        .collect();
    let mut state = advance(vocab, state_before_prev, &prev.setup);
    state = advance(vocab, state, &prev.body);

    let mut pending: BTreeSet<EventId> = inherited.iter().map(|s| s.event).collect();
    let mut setup = Vec::new();
    for s in &next.setup {
        let redundant = match vocab.effect(s.event) {
            Some(Effect::Enter) => state.people > 0,
            Some(Effect::SitDown) => state.seats > 0,
            Some(Effect::LightOn) => state.light,
            Some(Effect::DoorOpen) => state.door_open,
            // Untracked devices: skip the opener if its closer is still owed.
            _ => next
                .switches
                .iter()
                .any(|&(open, close)| open == s.event && pending.contains(&close)),
        };
        if redundant {
            continue;
        }
        state = advance(vocab, state, std::slice::from_ref(s));
        setup.push(*s);
    }

    let host = next.host();
    let mut teardown: Vec<Step> = next.teardown.clone();
    let exit = teardown.pop().expect("teardown ends with exit");
    for s in &inherited {
        if !teardown.iter().any(|t| t.event == s.event) && pending.remove(&s.event) {
            teardown.push(step(s.event, host));
        }
    }
    teardown.push(exit);

    let next_len = setup.len() + next.body.len() + teardown.len();
    if prev_len < min_len || next_len < min_len {
        return false;
    }
    prev.teardown.clear();
    next.setup = setup;
    next.teardown = teardown;
    true
}

/// Generates a labeled corpus of `n_activities` concatenated activities.
pub fn generate_corpus<R: Rng>(
    vocab: &Vocabulary,
    config: &GeneratorConfig,
    n_activities: usize,
    rng: &mut R,
) -> Result<Corpus> {
    config.check(vocab)?;
    if n_activities == 0 {
        return Err(Error::InvalidConfig("n_activities must be at least 1".into()));
    }
    let ids = Ids::new(vocab)?;
    let weights: Vec<f64> = config.templates.iter().map(|t| t.weight).collect();
    let chooser = rand_distr::WeightedIndex::new(&weights)
        .map_err(|e| Error::InvalidConfig(format!("template weights: {e}")))?;
    let users: Vec<u32> = (0..config.n_users).collect();

    let mut instances: Vec<ActivityInstance> = Vec::with_capacity(n_activities);
    let mut shared = vec![false; n_activities];
    let mut state = ObjectState::new(config.maxima);
    let mut state_before_prev = state;
    for k in 0..n_activities {
        let template = &config.templates[chooser.sample(rng)];
        let context = Context::sample(config, rng);
        let count = rng.gen_range(template.participants.0..=template.participants.1) as usize;
        let host = match instances.last() {
            Some(prev) if rng.gen_bool(config.repeat_user_prob) => prev.host(),
            _ => *users.choose(rng).expect("n_users >= 1"),
        };
        let mut participants = vec![host];
        let others: Vec<u32> = users.iter().copied().filter(|&u| u != host).collect();
        participants.extend(others.choose_multiple(rng, count - 1));

        let mut inst = generate_activity(vocab, config, template, &context, &participants, rng)?;

        let mut shared_now = false;
        if let Some(prev) = instances.last_mut() {
            let eligible = prev.participants.len() == 1
                && inst.participants.len() == 1
                && prev.host() == inst.host();
            if eligible && rng.gen_bool(config.shared_event_prob) {
                shared_now = share_events(
                    vocab,
                    &ids,
                    prev,
                    &mut inst,
                    state_before_prev,
                    config.min_activity_length,
                );
            }
        }
        if shared_now {
            shared[k] = true;
            // Recompute the state after the shortened previous activity.
            let prev = instances.last().expect("shared implies a previous activity");
            state = advance(vocab, state_before_prev, &prev.steps().copied().collect::<Vec<_>>());
        }
        state_before_prev = state;
        state = advance(vocab, state, &inst.steps().copied().collect::<Vec<_>>());
        instances.push(inst);
    }

    assemble(vocab, config, &instances, &shared, rng)
}

/// Assigns timestamps and builds the labeled stream.
fn assemble<R: Rng>(
    vocab: &Vocabulary,
    config: &GeneratorConfig,
    instances: &[ActivityInstance],
    shared: &[bool],
    rng: &mut R,
) -> Result<Corpus> {
    let inter = config.inter_gap.distribution(1.0)?;
    let away = config.return_gap.distribution(1.0)?;
    let scales: Vec<LogNormal<f64>> = config
        .templates
        .iter()
        .map(|t| config.intra_gap.distribution(t.duration_scale))
        .collect::<Result<_>>()?;

    let mut events = Vec::new();
    let mut activities = Vec::with_capacity(instances.len());
    let mut now = 0.0_f64;
    for (k, inst) in instances.iter().enumerate() {
        let intra = config
            .templates
            .iter()
            .position(|t| t.name == inst.template)
            .map(|i| &scales[i])
            .expect("instance comes from a template");
        if k > 0 {
            now += inter.sample(rng);
        }
        let start = events.len();
        let n = inst.len();
        for (i, s) in inst.steps().enumerate() {
            if i > 0 {
                let mut gap = match s.gap {
                    GapKind::Normal => intra.sample(rng),
                    GapKind::Return => away.sample(rng),
                };
                if s.gap == GapKind::Normal && (i == 1 || i == n - 1) {
                    gap *= config.boundary_cluster_factor;
                }
                now += gap;
            }
            // Millisecond resolution.
            now = (now * 1000.0).round() / 1000.0;
            events.push(Event {
                t: now,
                event_type: s.event,
                user: Some(s.user),
                activity_id: Some(k as u32),
            });
        }
        activities.push(ActivityRecord {
            id: k as u32,
            template: inst.template.clone(),
            start,
            len: n,
            participants: inst.participants.len(),
            host: inst.host(),
            context: inst.context,
            redundant: inst.redundant,
            shared_with_previous: shared[k],
        });
    }
    let stream = EventStream::from_labeled_events(vocab.clone(), events)?;
    Ok(Corpus { stream, activities })
}

/// [`generate_corpus`] seeded from `config.seed`.
pub fn generate_seeded(vocab: &Vocabulary, config: &GeneratorConfig, n_activities: usize) -> Result<Corpus> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    generate_corpus(vocab, config, n_activities, &mut rng)
}

#[cfg(test)]
mod tests;
