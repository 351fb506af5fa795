mod common;

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use common::{edited_tree, fixtures, keys};
use proptest::prelude::*;
use saliency_core::extraction::{
    extract_noun_phrases, map_phrase, DisambiguationRequest, DisambiguationScorer, ScoreRequest, ScorerError,
};
use saliency_core::ingest::{CaptionRecord, TaggedCaption, Token};
use saliency_core::{Extractor, FallbackScorer, RemoteScorer, SynsetId, SynsetInventory, SynsetTree};

fn inventory(tree: &SynsetTree) -> SynsetInventory {
    let text = std::fs::read_to_string(fixtures().join("corpus/expected/inventory.tsv")).unwrap();
    SynsetInventory::from_tsv(tree, &text).unwrap()
}

fn caption(words: &[(&str, &str)]) -> TaggedCaption {
    let text = words.iter().map(|(w, _)| *w).collect::<Vec<_>>().join(" ");
    TaggedCaption {
        record: CaptionRecord {
            image_id: "img".into(),
            language: "en".into(),
            text: text.clone(),
            text_en: text,
            index: 0,
        },
        tokens: words
            .iter()
            .map(|(w, t)| Token {
                surface: w.to_string(),
                upos: t.to_string(),
            })
            .collect(),
    }
}

fn mention_keys(tree: &SynsetTree, inv: &SynsetInventory, c: &TaggedCaption) -> Vec<String> {
    let out = Extractor::new(tree, inv, &FallbackScorer).extract_caption(c);
    keys(out.result.mentions.iter().map(|m| &m.synset))
}

/// Records every request and answers with fixed scores.
struct Recording {
    scores: Vec<f64>,
    calls: AtomicUsize,
    templates: Mutex<Vec<String>>,
}

impl Recording {
    fn new(scores: Vec<f64>) -> Self {
        Self {
            scores,
            calls: AtomicUsize::new(0),
            templates: Mutex::new(Vec::new()),
        }
    }
}

impl DisambiguationScorer for Recording {
    fn score(&self, request: &DisambiguationRequest) -> Result<Vec<f64>, ScorerError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.templates.lock().unwrap().push(request.template().unwrap());
        Ok(self.scores.clone())
    }

    fn name(&self) -> &str {
        "recording"
    }
}

#[test]
fn fire_engine_spans() {
    let c = caption(&[
        ("the", "DET"),
        ("dog", "NOUN"),
        ("chases", "VERB"),
        ("a", "DET"),
        ("fire", "NOUN"),
        ("engine", "NOUN"),
    ]);
    let spans: Vec<_> = extract_noun_phrases(&c)
        .iter()
        .map(|p| (p.start, p.end))
        .collect();
    assert_eq!(spans, [(1, 1), (4, 5)]);
}

#[test]
fn woman_with_her_back_to_the_camera() {
    let tree = edited_tree();
    let inv = inventory(&tree);
    let c = caption(&[
        ("A", "DET"),
        ("woman", "NOUN"),
        ("standing", "VERB"),
        ("with", "ADP"),
        ("her", "PRON"),
        ("back", "NOUN"),
        ("to", "ADP"),
        ("the", "DET"),
        ("camera", "NOUN"),
    ]);
    let out = Extractor::new(&tree, &inv, &FallbackScorer).extract_caption(&c);
    let spans: Vec<_> = out
        .result
        .mentions
        .iter()
        .map(|m| m.phrase.span_label())
        .collect();
    assert_eq!(spans, ["1:1", "8:8"]);
    assert_eq!(
        keys(&out.result.closure),
        [
            "camera.n.01",
            "electronic_equipment.n.01",
            "person.n.01",
            "woman.n.01"
        ]
    );
}

#[test]
fn ambiguous_phrase_lists_deepest_members_by_sense() {
    let tree = edited_tree();
    let inv = inventory(&tree);
    let c = caption(&[("dogs", "NOUN")]);
    let phrase = &extract_noun_phrases(&c)[0];
    let cands = map_phrase(&tree, &inv, phrase).unwrap();
    let got: Vec<_> = cands
        .iter()
        .map(|c| (c.synset.lemma_key(), c.sense.lemma_key(), c.sense_rank))
        .collect();
    assert_eq!(
        got,
        [("dog.n.01", "dog.n.01", 1), ("woman.n.01", "frump.n.01", 2)]
    );
}

#[test]
fn single_candidate_skips_the_scorer() {
    let tree = edited_tree();
    let inv = inventory(&tree);
    // the two food senses were unified, leaving one candidate
    let c = caption(&[("some", "DET"), ("food", "NOUN")]);
    let scorer = Recording::new(vec![0.0, 1.0]);
    let out = Extractor::new(&tree, &inv, &scorer).extract_caption(&c);
    assert_eq!(keys(out.result.mentions.iter().map(|m| &m.synset)), ["food.n.01"]);
    assert_eq!(scorer.calls.load(Ordering::SeqCst), 0);
}

#[test]
fn scorer_decides_between_senses() {
    let tree = edited_tree();
    let inv = inventory(&tree);
    let c = caption(&[("a", "DET"), ("dog", "NOUN"), ("in", "ADP"), ("grass", "X")]);
    let scorer = Recording::new(vec![-3.0, -1.0]);
    let out = Extractor::new(&tree, &inv, &scorer).extract_caption(&c);
    assert_eq!(
        keys(out.result.mentions.iter().map(|m| &m.synset)),
        ["woman.n.01"]
    );
    assert!(out.degradations.is_empty());
    assert_eq!(*scorer.templates.lock().unwrap(), ["a {SLOT} in grass"]);
    assert_eq!(mention_keys(&tree, &inv, &c), ["dog.n.01"]);
}

#[test]
fn backoff_drops_leftmost_tokens() {
    let tree = edited_tree();
    let inv = inventory(&tree);
    let c = caption(&[("baby", "NOUN"), ("squirrel", "NOUN"), ("feet", "NOUN")]);
    // "baby squirrel feet" and "squirrel feet" miss, "feet" is outside the roots
    assert!(mention_keys(&tree, &inv, &c).is_empty());
    let c = caption(&[("baby", "NOUN"), ("squirrel", "NOUN")]);
    assert_eq!(mention_keys(&tree, &inv, &c), ["squirrel.n.01"]);
    let c = caption(&[("the", "DET"), ("women", "NOUN")]);
    assert_eq!(mention_keys(&tree, &inv, &c), ["woman.n.01"]);
}

/// Minimal HTTP/1.1 server answering each connection with the next scripted
/// `(status, body)` and recording the request bodies.
struct MockServer {
    url: String,
    bodies: Arc<Mutex<Vec<(String, String)>>>,
    handle: Option<thread::JoinHandle<()>>,
}

impl MockServer {
    fn start(script: Vec<(u16, &'static str)>) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        let bodies = Arc::new(Mutex::new(Vec::new()));
        let seen = Arc::clone(&bodies);
        let handle = thread::spawn(move || {
            for (status, body) in script {
                let (stream, _) = listener.accept().unwrap();
                let request = read_request(&stream);
                seen.lock().unwrap().push(request);
                respond(stream, status, body);
            }
        });
        Self {
            url,
            bodies,
            handle: Some(handle),
        }
    }

    fn finish(mut self) -> Vec<(String, String)> {
        self.handle.take().unwrap().join().unwrap();
        self.bodies.lock().unwrap().clone()
    }
}

fn read_request(stream: &TcpStream) -> (String, String) {
    let mut reader = BufReader::new(stream);
    let mut request_line = String::new();
    reader.read_line(&mut request_line).unwrap();
    let mut length = 0;
    loop {
        let mut line = String::new();
        reader.read_line(&mut line).unwrap();
        if line.trim().is_empty() {
            break;
        }
        if let Some((name, value)) = line.split_once(':') {
            if name.eq_ignore_ascii_case("content-length") {
                length = value.trim().parse().unwrap();
            }
        }
    }
    let mut body = vec![0; length];
    reader.read_exact(&mut body).unwrap();
    (request_line.trim().to_string(), String::from_utf8(body).unwrap())
}

fn respond(mut stream: TcpStream, status: u16, body: &str) {
    let reply = format!(
        "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
        body.len()
    );
    stream.write_all(reply.as_bytes()).unwrap();
}

fn remote(url: &str) -> RemoteScorer {
    RemoteScorer::new(url, Duration::from_secs(5))
}

#[test]
fn remote_scorer_round_trip() {
    let server = MockServer::start(vec![
        (200, r#"{"status":"ok","model_id":"bert-large-uncased"}"#),
        (200, r#"{"scores":[-2.5,-0.25],"model_id":"bert-large-uncased"}"#),
    ]);
    let scorer = remote(&format!("{}/", server.url));
    assert_eq!(scorer.health().unwrap(), "bert-large-uncased");
    let response = scorer
        .score_request(&ScoreRequest {
            template: "a {SLOT} in a field".into(),
            candidates: vec!["horse".into(), "sawhorse".into()],
        })
        .unwrap();
    assert_eq!(response.scores, [-2.5, -0.25]);

    let seen = server.finish();
    assert_eq!(seen[0].0, "GET /v1/health HTTP/1.1");
    assert_eq!(seen[1].0, "POST /v1/score HTTP/1.1");
    let sent: serde_json::Value = serde_json::from_str(&seen[1].1).unwrap();
    assert_eq!(
        sent,
        serde_json::json!({"template": "a {SLOT} in a field", "candidates": ["horse", "sawhorse"]})
    );
}

#[test]
fn remote_scorer_drives_extraction() {
    let tree = edited_tree();
    let inv = inventory(&tree);
    let server = MockServer::start(vec![(200, r#"{"scores":[-4.0,-1.0],"model_id":"m"}"#)]);
    let scorer = remote(&server.url);
    let c = caption(&[("a", "DET"), ("dog", "NOUN"), ("sleeps", "VERB")]);
    let out = Extractor::new(&tree, &inv, &scorer).extract_caption(&c);
    assert!(out.degradations.is_empty());
    assert_eq!(
        keys(out.result.mentions.iter().map(|m| &m.synset)),
        ["woman.n.01"]
    );
    let seen = server.finish();
    let sent: ScoreRequest = serde_json::from_str(&seen[0].1).unwrap();
    assert_eq!(sent.template, "a {SLOT} sleeps");
    assert_eq!(sent.candidates, ["dog", "woman"]);
}

#[test]
fn remote_failures_degrade_to_first_sense() {
    let tree = edited_tree();
    let inv = inventory(&tree);
    let c = caption(&[("a", "DET"), ("dog", "NOUN")]);
    let cases = [
        (503, r#"{"status":"loading"}"#, "status 503"),
        (200, r#"{"scores":"nope"}"#, "malformed"),
        (200, r#"{"scores":[1.0],"model_id":"m"}"#, "1 scores for 2"),
    ];
    for (status, body, reason) in cases {
        let server = MockServer::start(vec![(status, body)]);
        let scorer = remote(&server.url);
        let out = Extractor::new(&tree, &inv, &scorer).extract_caption(&c);
        assert_eq!(keys(out.result.mentions.iter().map(|m| &m.synset)), ["dog.n.01"]);
        assert_eq!(out.degradations.len(), 1);
        assert!(
            out.degradations[0].reason.contains(reason),
            "{:?}",
            out.degradations
        );
        assert_eq!(out.degradations[0].caption_key, "img|en|0");
        server.finish();
    }

    let server = MockServer::start(vec![(503, r#"{"status":"loading"}"#)]);
    assert!(matches!(
        remote(&server.url).health(),
        Err(ScorerError::Status { status: 503, .. })
    ));
    server.finish();

    let closed = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", closed.local_addr().unwrap());
    drop(closed);
    let out = Extractor::new(&tree, &inv, &remote(&url)).extract_caption(&c);
    assert_eq!(keys(out.result.mentions.iter().map(|m| &m.synset)), ["dog.n.01"]);
    assert!(out.degradations[0]
        .reason
        .starts_with("remote: scorer transport error"));
}

#[test]
fn extract_all_keeps_input_order() {
    let tree = edited_tree();
    let inv = inventory(&tree);
    let captions: Vec<_> = (0..50)
        .map(|i| {
            let mut c = caption(&[("squirrel", "NOUN")]);
            c.record.index = i;
            c
        })
        .collect();
    let out = Extractor::new(&tree, &inv, &FallbackScorer).extract_all(&captions);
    let idx: Vec<_> = out.iter().map(|o| o.result.caption_key.index).collect();
    assert_eq!(idx, (0..50).collect::<Vec<_>>());
}

const WORDS: [&str; 14] = [
    "dog", "snake", "food", "squirrel", "woman", "women", "camera", "milk", "couple", "baby", "back", "feet",
    "fire", "animal",
];
const TAGS: [&str; 4] = ["NOUN", "PROPN", "VERB", "DET"];

fn random_caption() -> impl Strategy<Value = TaggedCaption> {
    prop::collection::vec((0..WORDS.len(), 0..TAGS.len()), 0..10).prop_map(|toks| {
        let words: Vec<(&str, &str)> = toks.iter().map(|&(w, t)| (WORDS[w], TAGS[t])).collect();
        caption(&words)
    })
}

struct Reversed;

impl DisambiguationScorer for Reversed {
    fn score(&self, request: &DisambiguationRequest) -> Result<Vec<f64>, ScorerError> {
        Ok(request
            .candidates
            .iter()
            .map(|c| f64::from(c.sense_rank))
            .collect())
    }

    fn name(&self) -> &str {
        "reversed"
    }
}

proptest! {
    #[test]
    fn closure_is_union_of_inventory_ancestors(c in random_caption()) {
        let tree = edited_tree();
        let inv = inventory(&tree);
        let out = Extractor::new(&tree, &inv, &FallbackScorer).extract_caption(&c).result;
        let mut expected = std::collections::BTreeSet::new();
        for m in &out.mentions {
            prop_assert!(inv.contains(&m.synset));
            expected.insert(m.synset.clone());
            for a in tree.ancestors(&m.synset).unwrap() {
                if inv.contains(&a) {
                    expected.insert(a);
                }
            }
        }
        prop_assert_eq!(&out.closure, &expected);
        for id in &out.closure {
            for a in tree.ancestors(id).unwrap() {
                prop_assert!(!inv.contains(&a) || out.closure.contains(&a));
            }
        }
    }

    #[test]
    fn scorer_only_changes_ambiguous_choices(c in random_caption()) {
        let tree = edited_tree();
        let inv = inventory(&tree);
        let a = Extractor::new(&tree, &inv, &FallbackScorer).extract_caption(&c).result;
        let b = Extractor::new(&tree, &inv, &Reversed).extract_caption(&c).result;
        prop_assert_eq!(a.mentions.len(), b.mentions.len());
        for (x, y) in a.mentions.iter().zip(&b.mentions) {
            prop_assert_eq!(&x.phrase, &y.phrase);
            let cands: Vec<SynsetId> = map_phrase(&tree, &inv, &x.phrase)
                .unwrap()
                .into_iter()
                .map(|c| c.synset)
                .collect();
            prop_assert_eq!(&x.synset, &cands[0]);
            prop_assert_eq!(&y.synset, cands.last().unwrap());
        }
    }
}
