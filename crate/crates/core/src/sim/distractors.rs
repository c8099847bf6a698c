//! Graph-only phantom entities that exist in the scene graph but not in the
//! world. Their labels are consonant strings over letters that household
//! class names almost never combine. Words whose hashed embedding still
//! lands close to a household term are rejected when the vocabulary is
//! built.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::object::{ObjectState, KNOWN_CLASSES};
use super::World;
use crate::embedding::{Embedder, TrigramEmbedder, DEFAULT_DIM};
use crate::scene_graph::Entity;

const ALPHABET: &[u8] = b"jqxzvwk";
const VOCABULARY_SIZE: usize = 240;
const VOCABULARY_SEED: u64 = 0x5eed_d157;
const MATERIALS: [&str; 5] = ["Wood", "Metal", "Plastic", "Glass", "Fabric"];
/// Pseudo-words at or above this cosine to a household term are redrawn.
const MAX_HOUSEHOLD_SIMILARITY: f64 = 0.2;

/// Household words beyond the class names that tasks and planners use.
pub const HOUSEHOLD_TERMS: [&str; 24] = [
    "sink", "stove", "counter", "plant", "water", "fruit", "utensils", "wallet", "phone",
    "food", "tea", "door", "table", "kitchen", "faucet", "tap", "card", "trash", "bin",
    "oven", "dish", "cooker", "burner", "vegetable",
];

/// Class names, their single words and [`HOUSEHOLD_TERMS`].
pub fn household_lexicon() -> Vec<String> {
    let mut out = std::collections::BTreeSet::new();
    for c in KNOWN_CLASSES {
        out.insert(c.to_string());
        out.extend(c.split_whitespace().map(str::to_string));
    }
    out.extend(HOUSEHOLD_TERMS.iter().map(|t| t.to_string()));
    out.into_iter().collect()
}

/// Fixed built-in vocabulary of distinct pseudo-words, each below
/// `MAX_HOUSEHOLD_SIMILARITY` to every household term under the default
/// trigram embedder.
pub fn default_vocabulary() -> Vec<String> {
    static VOCAB: OnceLock<Vec<String>> = OnceLock::new();
    VOCAB.get_or_init(build_vocabulary).clone()
}

fn build_vocabulary() -> Vec<String> {
    let embedder = TrigramEmbedder::new(DEFAULT_DIM);
    let lexicon: Vec<_> = household_lexicon()
        .iter()
        .map(|t| embedder.embed(t).expect("household terms embed"))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(VOCABULARY_SEED);
    let mut words = std::collections::BTreeSet::new();
    while words.len() < VOCABULARY_SIZE {
        let len = rng.random_range(4..=7);
        let w: String = (0..len)
            .map(|_| ALPHABET[rng.random_range(0..ALPHABET.len())] as char)
            .collect();
        let v = embedder.embed(&w).expect("pseudo-words embed");
        if lexicon.iter().all(|t| t.cosine(&v) < MAX_HOUSEHOLD_SIMILARITY) {
            words.insert(w);
        }
    }
    words.into_iter().collect()
}

/// `n` phantom entities with labels drawn from `vocabulary`. Uses its own
/// random stream so the world's stream is untouched.
pub fn phantom_entities(vocabulary: &[String], n: usize, seed: u64) -> Vec<Entity> {
    if n == 0 || vocabulary.is_empty() {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    (0..n)
        .map(|i| {
            let word = &vocabulary[rng.random_range(0..vocabulary.len())];
            let state = ObjectState {
                visible: rng.random_bool(0.5),
                is_interactable: false,
                pickupable: rng.random_bool(0.5),
                breakable: rng.random_bool(0.3),
                salient_materials: MATERIALS[rng.random_range(0..MATERIALS.len())].into(),
                distance: 6.0,
                ..ObjectState::default()
            };
            Entity {
                id: format!("{word}_{}", i + 1),
                label: word.clone(),
                attributes: state.to_attributes(),
                last_updated: 0,
            }
        })
        .collect()
}

/// Adds `n` phantoms to the world's discovered set. `vocabulary` falls back
/// to the built-in list when empty.
pub fn inject_distractors(world: &mut World, vocabulary: &[String], n: usize, seed: u64) {
    let owned;
    let vocab = if vocabulary.is_empty() {
        owned = default_vocabulary();
        &owned
    } else {
        vocabulary
    };
    let start = world.phantoms().len();
    let mut fresh = phantom_entities(vocab, n, seed);
    for (i, e) in fresh.iter_mut().enumerate() {
        e.id = format!("{}_{}", e.label, start + i + 1);
    }
    world.phantoms_mut().extend(fresh);
}
