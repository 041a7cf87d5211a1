use std::fs;
use std::path::PathBuf;

use argbayes::af::ArgumentNames;
use argbayes::bayes::PosteriorKind;
use argbayes::io::{
    framework_to_json, observations_to_csv, parse_config, parse_framework, parse_observations,
    parse_posterior, LambdaSpec, ObservationConvention, VoteMatrix,
};
use argbayes::space::AttackAssignment;
use proptest::prelude::*;

fn exercise_framework(text: &str) {
    if let Ok(nf) = parse_framework(text) {
        assert_eq!(parse_framework(&framework_to_json(&nf)).unwrap(), nf);
    }
}

fn exercise_votes(text: &str) {
    if let Ok(matrix) = VoteMatrix::parse_csv(text) {
        for convention in [
            "row-as-set",
            "row-as-set:include",
            "cell-as-singleton:ignore",
        ] {
            let _ = matrix.observations(convention.parse().unwrap());
        }
        assert_eq!(VoteMatrix::parse_csv(&matrix.to_csv()).unwrap(), matrix);
    }
}

fn exercise_observations(text: &str) {
    let names = ArgumentNames::alphabetic(5);
    if let Ok(obs) = parse_observations(text, &names) {
        let again = parse_observations(&observations_to_csv(&obs, &names), &names).unwrap();
        assert_eq!(again, obs);
    }
}

fn exercise_config(text: &str) {
    if let Ok(cfg) = parse_config(text) {
        assert_eq!(parse_config(&cfg.canonical()).unwrap(), cfg);
    }
}

fn exercise_posterior(text: &str) {
    if let Ok(post) = parse_posterior(text, PosteriorKind::Exact) {
        let total: f64 = post.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-9 || post.is_empty());
    }
}

fn exercise_fragments(text: &str) {
    let _ = LambdaSpec::parse(text);
    let _ = text.parse::<ObservationConvention>();
    if let Ok(att) = AttackAssignment::parse_bitstring(text) {
        assert_eq!(att.to_bitstring(), text);
    }
    let _ = ArgumentNames::alphabetic(4).parse_set(text);
}

fn corpus(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut files: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| entry.unwrap().path())
        .collect();
    files.sort();
    assert!(!files.is_empty(), "empty corpus {target}");
    files
        .into_iter()
        .map(|p| {
            let text = String::from_utf8_lossy(&fs::read(&p).unwrap()).into_owned();
            (p, text)
        })
        .collect()
}

#[test]
fn corpus_seeds_replay_cleanly() {
    type Exercise = fn(&str);
    let targets: [(&str, Exercise); 5] = [
        ("framework_json", exercise_framework),
        ("votes_csv", exercise_votes),
        ("observations_csv", exercise_observations),
        ("config_kv", exercise_config),
        ("posterior_csv", exercise_posterior),
    ];
    for (target, run) in targets {
        for (_, text) in corpus(target) {
            run(&text);
            exercise_fragments(&text);
        }
    }
}

#[test]
fn corpus_contains_accepting_and_rejecting_seeds() {
    let framework_ok = corpus("framework_json")
        .iter()
        .filter(|(_, t)| parse_framework(t).is_ok())
        .count();
    assert!(framework_ok >= 3);
    assert!(framework_ok < corpus("framework_json").len());
    let config_ok = corpus("config_kv")
        .iter()
        .filter(|(_, t)| parse_config(t).is_ok())
        .count();
    assert!(config_ok >= 3);
    assert!(config_ok < corpus("config_kv").len());
}

fn structured_text() -> impl Strategy<Value = String> {
    let token = prop::sample::select(vec![
        "a",
        "b",
        "c",
        "z",
        ",",
        ";",
        "\n",
        "\r\n",
        "\"",
        "=",
        "{}",
        "∅",
        "0",
        "1",
        "2",
        "-1",
        "0.5",
        "NaN",
        "inf",
        "1e308",
        " ",
        "#",
        "[",
        "]",
        "{",
        "}",
        ":",
        "participant",
        "subset,label,weight",
        "assignment,probability",
        "semantics",
        "family",
        "exponential",
        "w",
        "lambda",
        "preset",
        "vote-experiment",
        "\"arguments\"",
        "\"attacks\"",
        "true",
    ]);
    prop::collection::vec(token, 0..40).prop_map(|parts| parts.concat())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn arbitrary_text_never_panics(text in any::<String>()) {
        exercise_framework(&text);
        exercise_votes(&text);
        exercise_observations(&text);
        exercise_config(&text);
        exercise_posterior(&text);
        exercise_fragments(&text);
    }

    #[test]
    fn token_soup_never_panics(text in structured_text()) {
        exercise_framework(&text);
        exercise_votes(&text);
        exercise_observations(&text);
        exercise_config(&text);
        exercise_posterior(&text);
        exercise_fragments(&text);
    }

    #[test]
    fn generated_vote_matrices_round_trip(
        cells in prop::collection::vec(prop::collection::vec(0u8..3, 4), 1..12),
    ) {
        let mut text = String::from("participant,a,b,c,d\n");
        for (i, row) in cells.iter().enumerate() {
            let row: Vec<&str> = row.iter().map(|c| ["0", "1", ""][*c as usize]).collect();
            text.push_str(&format!("p{i},{}\n", row.join(",")));
        }
        let matrix = VoteMatrix::parse_csv(&text).unwrap();
        prop_assert_eq!(matrix.cells.len(), cells.len());
        prop_assert_eq!(VoteMatrix::parse_csv(&matrix.to_csv()).unwrap(), matrix);
    }
}
