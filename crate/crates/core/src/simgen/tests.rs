use super::*;
use crate::event::dataset_stats;

fn names(vocab: &Vocabulary, ids: &[EventId]) -> Vec<String> {
    ids.iter().map(|&i| vocab.name(i).unwrap().to_string()).collect()
}

fn template(config: &GeneratorConfig, name: &str) -> ActivityTemplate {
    config
        .templates
        .iter()
        .find(|t| t.name == name)
        .unwrap()
        .clone()
}

const DAY: Context = Context {
    night: false,
    season: Season::Mild,
};

const NIGHT: Context = Context {
    night: true,
    season: Season::Mild,
};

#[test]
fn default_roster_has_17_valid_templates() {
    let config = GeneratorConfig::default();
    assert_eq!(config.templates.len(), 17);
    config.check(&Vocabulary::default()).unwrap();
}

#[test]
fn bare_phone_call() {
    let vocab = Vocabulary::default();
    let config = GeneratorConfig {
        redundancy_prob: 0.0,
        ..GeneratorConfig::default()
    };
    let mut t = template(&config, "phone call");
    t.optional_events.clear();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let inst = generate_activity(&vocab, &config, &t, &DAY, &[3], &mut rng).unwrap();
    assert_eq!(
        names(&vocab, &inst.event_ids()),
        ["entrance", "sit down", "stand up", "exit"]
    );
}

#[test]
fn study_with_leave_and_return() {
    let vocab = Vocabulary::default();
    let config = GeneratorConfig {
        redundancy_prob: 1.0,
        ..GeneratorConfig::default()
    };
    let mut t = template(&config, "study");
    t.optional_events.retain(|o| o.event == "light on");
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let inst = generate_activity(&vocab, &config, &t, &NIGHT, &[0], &mut rng).unwrap();
    let seq = names(&vocab, &inst.event_ids());
    assert!(inst.redundant);
    assert_eq!(seq.first().unwrap(), "entrance");
    assert_eq!(seq.last().unwrap(), "exit");
    let inner = &seq[1..seq.len() - 1];
    assert!(inner.windows(2).any(|w| w[0] == "exit" && w[1] == "entrance"), "{seq:?}");
    // Lights are switched off only once, at the very end.
    assert_eq!(seq.iter().filter(|e| *e == "light off").count(), 1);
    assert_eq!(seq[seq.len() - 2], "light off");
}

#[test]
fn instances_respect_length_and_skeleton() {
    let vocab = Vocabulary::default();
    let config = GeneratorConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for t in &config.templates {
        let skeleton: Vec<EventId> = t.skeleton.iter().map(|n| vocab.id(n).unwrap()).collect();
        for _ in 0..50 {
            let ctx = Context::sample(&config, &mut rng);
            let n = rng.gen_range(t.participants.0..=t.participants.1);
            let users: Vec<u32> = (0..n).collect();
            let inst = generate_activity(&vocab, &config, t, &ctx, &users, &mut rng).unwrap();
            let ids = inst.event_ids();
            assert!(ids.len() >= 4);
            assert_eq!(ids[0], skeleton[0]);
            assert_eq!(ids.last(), skeleton.last());
            let mut it = ids.iter();
            assert!(skeleton.iter().all(|s| it.any(|x| x == s)), "{} breaks its skeleton", t.name);
        }
    }
}

#[test]
fn shared_events_skip_setup() {
    let vocab = Vocabulary::default();
    let ids = Ids::new(&vocab).unwrap();
    let config = GeneratorConfig {
        redundancy_prob: 0.0,
        ..GeneratorConfig::default()
    };
    let mut study = template(&config, "study");
    study.optional_events.retain(|o| o.event == "light on" || o.event == "computer on");
    study.optional_events.iter_mut().for_each(|o| {
        o.probability = 1.0;
    });
    let mut call = template(&config, "phone call");
    call.optional_events.retain(|o| o.event == "light on");
    call.optional_events[0].probability = 1.0;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut a = generate_activity(&vocab, &config, &study, &NIGHT, &[2], &mut rng).unwrap();
    let mut b = generate_activity(&vocab, &config, &call, &NIGHT, &[2], &mut rng).unwrap();
    let start = ObjectState::new(config.maxima);
    assert!(share_events(&vocab, &ids, &mut a, &mut b, start, 4));

    let first = names(&vocab, &a.event_ids());
    let second = names(&vocab, &b.event_ids());
    assert_eq!(first, ["entrance", "light on", "sit down", "computer on"]);
    assert_eq!(second[0], "stand up", "{second:?}");
    assert!(!second.contains(&"light on".to_string()));
    assert!(!second.contains(&"sit down".to_string()));
    assert!(!second.contains(&"entrance".to_string()));
    assert_eq!(second.last().unwrap(), "exit");
    assert!(second.contains(&"computer off".to_string()));
    assert_eq!(second.iter().filter(|e| *e == "light off").count(), 1);

    // The joined pair never needs clamping.
    let mut state = start;
    for id in a.event_ids().into_iter().chain(b.event_ids()) {
        assert!(!state.would_clamp(vocab.effect(id)));
        state = state.with_effect(vocab.effect(id));
    }
    assert_eq!((state.people, state.seats, state.light), (0, 0, false));
}

#[test]
fn sharing_declined_when_too_short() {
    let vocab = Vocabulary::default();
    let ids = Ids::new(&vocab).unwrap();
    let config = GeneratorConfig {
        redundancy_prob: 0.0,
        ..GeneratorConfig::default()
    };
    let mut call = template(&config, "phone call");
    call.optional_events.clear();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut a = generate_activity(&vocab, &config, &call, &DAY, &[1], &mut rng).unwrap();
    let mut b = generate_activity(&vocab, &config, &call, &DAY, &[1], &mut rng).unwrap();
    let (a0, b0) = (a.clone(), b.clone());
    assert!(!share_events(&vocab, &ids, &mut a, &mut b, ObjectState::new(config.maxima), 4));
    assert_eq!((a, b), (a0, b0));
}

fn corpus(seed: u64, n: usize) -> Corpus {
    let config = GeneratorConfig {
        seed,
        ..GeneratorConfig::default()
    };
    generate_seeded(&Vocabulary::default(), &config, n).unwrap()
}

#[test]
fn single_activity_has_no_boundaries() {
    let c = corpus(1, 1);
    assert!(c.stream.true_boundaries().unwrap().is_empty());
}

#[test]
fn zero_activities_rejected() {
    let config = GeneratorConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(generate_corpus(&Vocabulary::default(), &config, 0, &mut rng).is_err());
}

#[test]
fn corpus_is_deterministic() {
    let a = corpus(11, 60);
    let b = corpus(11, 60);
    let (mut ja, mut jb) = (Vec::new(), Vec::new());
    a.stream.write_jsonl(&mut ja).unwrap();
    b.stream.write_jsonl(&mut jb).unwrap();
    assert_eq!(ja, jb);
    assert_ne!(corpus(12, 60).stream, a.stream);
}

#[test]
fn corpus_structure() {
    let c = corpus(2, 436);
    let stats = dataset_stats(&c.stream).unwrap();
    assert_eq!(stats.e_boundary, 435);
    let starts: Vec<usize> = c.activities[1..].iter().map(|a| a.start).collect();
    assert_eq!(c.stream.true_boundaries().unwrap(), starts.as_slice());
    assert!(c.activities.iter().all(|a| a.len >= 4));
    assert!(c.activities.iter().any(|a| a.shared_with_previous));
    assert!(c.activities.iter().any(|a| a.redundant));

    // Paper-scale event count within ±20%.
    let e = stats.e_total as f64;
    assert!((e - 6843.0).abs() <= 0.2 * 6843.0, "{e} events");
}

#[test]
fn corpus_never_clamps() {
    for seed in 0..5 {
        let c = corpus(seed, 300);
        let vocab = c.stream.vocab();
        let mut state = ObjectState::new(Maxima::default());
        for (i, ev) in c.stream.events().iter().enumerate() {
            let effect = vocab.effect(ev.event_type);
            assert!(!state.would_clamp(effect), "seed {seed}, event {i}");
            state = state.with_effect(effect);
        }
    }
}

#[test]
fn gap_distributions_overlap() {
    let c = corpus(4, 436);
    let t = c.stream.times();
    let flags = c.stream.boundary_flags().unwrap();
    let (mut intra, mut inter) = (Vec::new(), Vec::new());
    for i in 1..t.len() {
        let gap = t[i] - t[i - 1];
        if flags[i] {
            inter.push(gap);
        } else {
            intra.push(gap);
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!(mean(&intra) < mean(&inter));
    let max_intra = intra.iter().cloned().fold(0.0, f64::max);
    let min_inter = inter.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(max_intra > min_inter, "pure thresholding would separate the classes");
}

#[test]
fn report_statistics() {
    let c = corpus(5, 436);
    let r = corpus_report(&c);
    assert_eq!(r.n_activities, 436);
    assert_eq!(r.n_boundaries, 435);
    assert_eq!(r.min_length, 4);
    assert!(r.fraction_below_limit > 0.99);
    let entrance = r.thirds["entrance"];
    assert!(entrance.iter().all(|&p| p > 0.0), "{entrance:?}");
    assert!(entrance[0] > entrance[1]);
    assert_eq!(r.inclusion.len(), 17);
    assert_eq!(r.inclusion["study"]["entrance"], 1.0);
    assert_eq!(r.object_relevance["people"], 1.0);
}

#[test]
fn report_on_single_known_activity() {
    let vocab = Vocabulary::default();
    let seq = ["entrance", "sit down", "phone ring", "stand up", "exit", "entrance"];
    let events: Vec<Event> = seq
        .iter()
        .enumerate()
        .map(|(i, n)| Event {
            t: i as f64,
            event_type: vocab.id(n).unwrap(),
            user: Some(0),
            activity_id: Some(0),
        })
        .collect();
    let stream = EventStream::from_labeled_events(vocab, events).unwrap();
    let c = Corpus {
        stream,
        activities: vec![ActivityRecord {
            id: 0,
            template: "odd".into(),
            start: 0,
            len: 6,
            participants: 1,
            host: 0,
            context: DAY,
            redundant: false,
            shared_with_previous: false,
        }],
    };
    let r = corpus_report(&c);
    // Thirds of length 6: positions 0-1, 2-3, 4-5.
    assert_eq!(r.thirds["entrance"], [0.5, 0.0, 0.5]);
    assert_eq!(r.thirds["phone ring"], [0.0, 1.0, 0.0]);
    assert_eq!(r.inclusion["odd"]["exit"], 1.0);
    assert_eq!(r.length_histogram[&6], 1);
    assert_eq!(r.object_relevance["light"], 0.0);
}
