use serde::{Deserialize, Serialize};

/// When an optional event's main probability applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Always,
    Night,
    Day,
    Summer,
    Winter,
}

/// Where an optional event is placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// Right after the host enters, before sitting down.
    Setup,
    /// Anywhere between sitting down and standing up.
    Body,
}

/// An event that may or may not appear in an activity instance. If it has a
/// `closing` event, the closer is emitted during teardown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionalEvent {
    pub event: String,
    #[serde(default)]
    pub closing: Option<String>,
    pub probability: f64,
    #[serde(default = "always")]
    pub condition: Condition,
    /// Probability used when `condition` does not hold.
    #[serde(default)]
    pub otherwise: f64,
    pub placement: Placement,
    /// Upper bound on how often a closer-less body event recurs; the count
    /// is uniform in `1..=repeats`.
    #[serde(default = "one_count")]
    pub repeats: u32,
}

fn one_count() -> u32 {
    1
}

fn always() -> Condition {
    Condition::Always
}

/// Recipe for one activity type.
///
/// The skeleton starts with `entrance` and ends with `exit`. When it contains
/// `sit down` and `stand up`, the events between them form the mandatory
/// body and every participant sits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityTemplate {
    pub name: String,
    pub skeleton: Vec<String>,
    #[serde(default)]
    pub optional_events: Vec<OptionalEvent>,
    /// Inclusive participant range.
    pub participants: (u32, u32),
    /// Multiplier on the intra-activity gap median.
    #[serde(default = "one")]
    pub duration_scale: f64,
    /// Relative frequency in a corpus.
    #[serde(default = "one")]
    pub weight: f64,
}

fn one() -> f64 {
    1.0
}

fn opt(event: &str, closing: Option<&str>, p: f64, placement: Placement) -> OptionalEvent {
    OptionalEvent {
        event: event.into(),
        closing: closing.map(Into::into),
        probability: p,
        condition: Condition::Always,
        otherwise: 0.0,
        placement,
        repeats: 1,
    }
}

fn cond(event: &str, closing: &str, p: f64, condition: Condition, otherwise: f64) -> OptionalEvent {
    OptionalEvent {
        event: event.into(),
        closing: Some(closing.into()),
        probability: p,
        condition,
        otherwise,
        placement: Placement::Setup,
        repeats: 1,
    }
}

fn light(p_night: f64, p_day: f64) -> OptionalEvent {
    cond("light on", "light off", p_night, Condition::Night, p_day)
}

fn climate() -> [OptionalEvent; 2] {
    [
        cond("air conditioner on", "air conditioner off", 0.7, Condition::Summer, 0.0),
        cond("heater on", "heater off", 0.6, Condition::Winter, 0.0),
    ]
}

fn recurring(event: &str, p: f64, repeats: u32) -> OptionalEvent {
    OptionalEvent {
        repeats,
        ..opt(event, None, p, Placement::Body)
    }
}

fn door(p: f64) -> OptionalEvent {
    opt("door opened", Some("door closed"), p, Placement::Setup)
}

fn seated(body: &[&str]) -> Vec<String> {
    let mut s = vec!["entrance", "sit down"];
    s.extend_from_slice(body);
    s.extend(["stand up", "exit"]);
    s.into_iter().map(String::from).collect()
}

fn template(
    name: &str,
    skeleton: Vec<String>,
    optional_events: Vec<OptionalEvent>,
    participants: (u32, u32),
    duration_scale: f64,
    weight: f64,
) -> ActivityTemplate {
    ActivityTemplate {
        name: name.into(),
        skeleton,
        optional_events,
        participants,
        duration_scale,
        weight,
    }
}

/// The default roster of 17 activity types.
pub fn default_templates() -> Vec<ActivityTemplate> {
    use Placement::Body;
    let [ac, heater] = climate();
    vec![
        template(
            "study",
            seated(&[]),
            vec![
                light(0.9, 0.15),
                ac.clone(),
                heater.clone(),
                opt("computer on", Some("computer off"), 0.5, Body),
                recurring("coffee machine on", 0.3, 2),
                recurring("phone ring", 0.4, 3),
                opt("window opened", Some("window closed"), 0.1, Body),
            ],
            (1, 3),
            1.5,
            2.5,
        ),
        template("phone call", seated(&[]), vec![light(0.5, 0.05), recurring("phone ring", 0.6, 2)], (1, 1), 0.5, 1.2),
        template(
            "seminar",
            seated(&["projector on", "screen down", "screen up", "projector off"]),
            vec![
                light(0.9, 0.3),
                ac.clone(),
                heater.clone(),
                door(0.3),
                recurring("whiteboard use", 0.5, 3),
            ],
            (3, 7),
            1.5,
            1.1,
        ),
        template(
            "meeting",
            seated(&[]),
            vec![
                light(0.8, 0.2),
                ac.clone(),
                door(0.3),
                recurring("whiteboard use", 0.6, 3),
                recurring("coffee machine on", 0.4, 2),
            ],
            (2, 4),
            1.0,
            2.0,
        ),
        template(
            "lecture",
            seated(&["projector on", "projector off"]),
            vec![
                light(0.9, 0.4),
                heater.clone(),
                recurring("whiteboard use", 0.7, 3),
                opt("screen down", Some("screen up"), 0.5, Body),
            ],
            (3, 6),
            1.5,
            0.8,
        ),
        template(
            "rehearsal",
            seated(&["projector on", "screen down", "screen up", "projector off"]),
            vec![light(0.8, 0.2), ac.clone()],
            (1, 2),
            1.0,
            0.6,
        ),
        template(
            "reading",
            seated(&[]),
            vec![
                light(0.9, 0.2),
                opt("window opened", Some("window closed"), 0.3, Body),
                heater.clone(),
                recurring("phone ring", 0.2, 1),
                recurring("coffee machine on", 0.3, 2),
            ],
            (1, 1),
            2.0,
            1.2,
        ),
        template(
            "computer work",
            seated(&["computer on", "computer off"]),
            vec![
                light(0.8, 0.1),
                ac.clone(),
                recurring("coffee machine on", 0.3, 2),
                recurring("phone ring", 0.3, 2),
            ],
            (1, 1),
            1.5,
            1.5,
        ),
        template(
            "group study",
            seated(&["whiteboard use"]),
            vec![
                light(0.9, 0.2),
                ac.clone(),
                heater.clone(),
                opt("computer on", Some("computer off"), 0.3, Body),
                recurring("whiteboard use", 0.6, 3),
            ],
            (2, 4),
            1.5,
            1.4,
        ),
        template(
            "discussion",
            seated(&[]),
            vec![
                light(0.7, 0.1),
                recurring("whiteboard use", 0.5, 3),
                recurring("coffee machine on", 0.4, 2),
            ],
            (2, 3),
            1.0,
            1.2,
        ),
        template(
            "interview",
            seated(&[]),
            vec![light(0.8, 0.2), door(0.8), ac.clone()],
            (2, 2),
            1.0,
            0.7,
        ),
        template(
            "video conference",
            seated(&["computer on", "projector on", "projector off", "computer off"]),
            vec![light(0.7, 0.2), door(0.3)],
            (1, 3),
            1.2,
            0.7,
        ),
        template(
            "cleaning",
            ["entrance", "window opened", "window closed", "exit"].map(String::from).to_vec(),
            vec![light(0.6, 0.3), opt("door opened", Some("door closed"), 0.5, Placement::Setup)],
            (1, 1),
            0.6,
            0.5,
        ),
        template(
            "coffee break",
            seated(&["coffee machine on"]),
            vec![light(0.5, 0.1)],
            (1, 3),
            0.6,
            0.8,
        ),
        template(
            "tutoring",
            seated(&["whiteboard use"]),
            vec![
                light(0.8, 0.2),
                heater.clone(),
                opt("computer on", Some("computer off"), 0.3, Body),
                recurring("whiteboard use", 0.5, 2),
            ],
            (2, 2),
            1.2,
            0.7,
        ),
        template(
            "lab meeting",
            seated(&["projector on", "projector off"]),
            vec![light(0.8, 0.3), ac, door(0.4), recurring("whiteboard use", 0.5, 3)],
            (3, 5),
            1.2,
            0.8,
        ),
        template(
            "rest",
            seated(&[]),
            vec![
                opt("window opened", Some("window closed"), 0.3, Body),
                heater,
                recurring("coffee machine on", 0.3, 1),
            ],
            (1, 1),
            2.0,
            0.6,
        ),
    ]
}
