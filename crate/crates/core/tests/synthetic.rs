mod common;

use std::collections::HashMap;

use csatm::assignment::assign_raw;
use csatm::popularity::PopularityScores;
use csatm::sampler::{run, SamplerConfig};
use csatm::synthetic::{
    accuracy_from_labels, generate, generate_data, reference_corpus, GroundTruth, SyntheticSpec,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small(seed: u64) -> SyntheticSpec {
    SyntheticSpec {
        n_threads: 4,
        comments_per_thread: 30,
        seed,
        ..Default::default()
    }
}

#[test]
fn default_benchmark_covers_every_comment() {
    let (corpus, truth) = generate(&common::benchmark_spec(3)).unwrap();
    assert_eq!(corpus.trees().len(), 20);
    assert_eq!(corpus.num_comments(), 2000);
    assert_eq!(truth.len(), 2000);
    for c in corpus.comments() {
        assert!(truth.get(&c.id).unwrap() < 4);
    }
    for tree in corpus.trees() {
        assert_eq!(tree.len(), 100);
    }
}

#[test]
fn generation_is_deterministic() {
    let a = generate_data(&small(5)).unwrap();
    let b = generate_data(&small(5)).unwrap();
    assert_eq!(a.records, b.records);
    assert_eq!(a.truth, b.truth);
    assert_eq!(
        reference_corpus(&small(5)).unwrap(),
        reference_corpus(&small(5)).unwrap()
    );
    assert_ne!(generate_data(&small(6)).unwrap().records, a.records);
}

#[test]
fn single_topic_without_noise_uses_one_vocabulary() {
    let spec = SyntheticSpec {
        k_true: 1,
        noise_leaf_fraction: 0.0,
        topic_shift_prob: 0.0,
        noise_token_prob: 0.0,
        ..small(1)
    };
    let (corpus, truth) = generate(&spec).unwrap();
    assert!(truth.iter().all(|(_, t)| t == 0));
    assert!(corpus.vocab().terms().iter().all(|t| t.starts_with("t0w")));
    assert!(corpus.comments().all(|c| !c.tokens.is_empty()));
}

#[test]
fn without_shifts_replies_keep_the_parent_topic() {
    let spec = SyntheticSpec {
        topic_shift_prob: 0.0,
        ..small(2)
    };
    let data = generate_data(&spec).unwrap();
    for tree in data.trees() {
        let root = data.truth.get(&tree.comment(tree.root()).id).unwrap();
        for c in tree.comments() {
            assert_eq!(data.truth.get(&c.id).unwrap(), root);
        }
    }
}

#[test]
fn truth_csv_round_trip() {
    let data = generate_data(&small(3)).unwrap();
    let mut buf = Vec::new();
    data.truth.write_csv(&mut buf).unwrap();
    assert_eq!(GroundTruth::read_csv(&buf[..]).unwrap(), data.truth);
}

proptest! {
    #[test]
    fn accuracy_ignores_label_names(seed in any::<u64>(), k in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels: Vec<(String, usize)> = (0..60).map(|i| (format!("c{i}"), rng.gen_range(0..k))).collect();
        let truth = GroundTruth::from_pairs(labels.clone());
        let mut perm: Vec<usize> = (0..k).collect();
        perm.shuffle(&mut rng);
        let noisy: Vec<usize> = labels.iter().map(|(_, t)| if rng.gen_bool(0.3) { rng.gen_range(0..k) } else { *t }).collect();
        let plain: HashMap<&str, usize> = labels.iter().zip(&noisy).map(|((id, _), &p)| (id.as_str(), p)).collect();
        let renamed: HashMap<&str, usize> = labels.iter().zip(&noisy).map(|((id, _), &p)| (id.as_str(), perm[p] + 10)).collect();
        let exact: HashMap<&str, usize> = labels.iter().map(|(id, t)| (id.as_str(), perm[*t])).collect();
        prop_assert_eq!(accuracy_from_labels(&plain, &truth).unwrap(), accuracy_from_labels(&renamed, &truth).unwrap());
        prop_assert_eq!(accuracy_from_labels(&exact, &truth).unwrap(), 1.0);
    }
}

#[test]
fn random_guessing_scores_about_a_quarter() {
    let (_, truth) = generate(&SyntheticSpec {
        noise_leaf_fraction: 0.0,
        topic_shift_prob: 0.5,
        ..common::benchmark_spec(4)
    })
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut total = 0.0;
    let rounds = 20;
    for _ in 0..rounds {
        let guesses: HashMap<&str, usize> = truth
            .iter()
            .map(|(id, _)| (id, rng.gen_range(0..4)))
            .collect();
        total += accuracy_from_labels(&guesses, &truth).unwrap();
    }
    let mean = total / rounds as f64;
    // best matching of a random 4x4 table sits a little above chance
    assert!((0.25..0.30).contains(&mean), "{mean}");
}

#[test]
fn clean_data_is_recovered() {
    let spec = SyntheticSpec {
        noise_leaf_fraction: 0.0,
        noise_token_prob: 0.0,
        topic_shift_prob: 0.1,
        ..common::benchmark_spec(8)
    };
    let (corpus, truth) = generate(&spec).unwrap();
    let scores = PopularityScores::uniform(corpus.num_comments());
    let cfg = SamplerConfig {
        topics: 4,
        alpha: 0.5,
        iterations: 200,
        burn_in: 100,
        seed: 8,
        ..Default::default()
    };
    let model = run(&corpus, &scores, &cfg).unwrap();
    let acc = csatm::synthetic::assignment_accuracy(&assign_raw(&model, &corpus).unwrap(), &truth)
        .unwrap();
    assert!(acc >= 0.9, "{acc}");
}

#[test]
fn missing_prediction_is_an_error() {
    let truth = GroundTruth::from_pairs(vec![("a".into(), 0), ("b".into(), 1)]);
    let partial: HashMap<&str, usize> = [("a", 0)].into_iter().collect();
    assert!(accuracy_from_labels(&partial, &truth).is_err());
}

#[test]
fn bad_specs_are_rejected() {
    assert!(generate(&SyntheticSpec {
        k_true: 0,
        ..small(1)
    })
    .is_err());
    assert!(generate(&SyntheticSpec {
        noise_leaf_fraction: 1.5,
        ..small(1)
    })
    .is_err());
    assert!(generate(&SyntheticSpec {
        min_tokens: 9,
        max_tokens: 3,
        ..small(1)
    })
    .is_err());
}
