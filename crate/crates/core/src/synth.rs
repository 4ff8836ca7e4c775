//! Synthetic inputs with known structure: a toy embedding table whose words
//! sit at exact happiness levels, and a generator of stories where the
//! leading woman's happiness rises between co-occurrences at a chosen
//! multiple of the leading man's.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::axis::{DEFAULT_NEGATIVE, DEFAULT_POSITIVE};
use crate::corpus::{SegmentKind, SourceKind, Story, StoryMeta};
use crate::embedstore::EmbeddingTable;

pub const DIM: usize = 4;
const LEVELS: i32 = 10;
pub const FEMALE_NAME: &str = "Anna";
pub const MALE_NAME: &str = "Bob";

/// Word whose happiness is `level / 10`, for `level` in `-10..=10`.
pub fn level_word(level: i32) -> String {
    let level = level.clamp(-LEVELS, LEVELS);
    let letter = (b'a' + (level + LEVELS) as u8) as char;
    format!("lv{letter}")
}

/// Seed words on the axis plus one word per happiness level. The axis comes
/// out as the first basis vector, so a level word's cosine with it is its
/// level over ten.
pub fn level_table() -> EmbeddingTable {
    let mut entries: Vec<(String, Vec<f32>)> = Vec::new();
    for w in DEFAULT_POSITIVE {
        entries.push((w.to_string(), vec![1.0, 0.0, 0.0, 0.0]));
    }
    for w in DEFAULT_NEGATIVE {
        entries.push((w.to_string(), vec![-1.0, 0.0, 0.0, 0.0]));
    }
    for level in -LEVELS..=LEVELS {
        let h = f64::from(level) / f64::from(LEVELS);
        let v = vec![h as f32, (1.0 - h * h).sqrt() as f32, 0.0, 0.0];
        entries.push((level_word(level), v));
    }
    EmbeddingTable::from_entries(DIM, entries, "synthetic").expect("level table is well formed")
}

#[derive(Clone, Debug)]
pub struct PlantedConfig {
    pub n_stories: usize,
    pub seed: u64,
    /// Happiness level of female-only segments between co-occurrences.
    pub female_level: i32,
    /// Happiness level of male-only segments between co-occurrences; the
    /// planted ratio is `female_level / male_level`.
    pub male_level: i32,
    /// Own-only segments per character before the first co-occurrence.
    pub prologue: usize,
    pub prologue_level: i32,
    pub cooccurrences: std::ops::RangeInclusive<usize>,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            n_stories: 200,
            seed: 2024,
            female_level: 4,
            male_level: 2,
            prologue: 40,
            prologue_level: -8,
            cooccurrences: 6..=9,
        }
    }
}

fn sentence(rng: &mut ChaCha8Rng, subject: &str, level: i32) -> String {
    let words: Vec<String> = (0..3).map(|_| level_word(level + rng.random_range(-1..=1))).collect();
    format!("Then {subject} {}.", words.join(" "))
}

/// Text of one planted story, one sentence per segment.
///
/// A long prologue drags both leads down by the same amount, so both
/// normalized curves span a similar range. After it, each gap between
/// co-occurrences holds one female-only and one male-only segment at their
/// planted levels, the rest neutral filler without names.
pub fn planted_story_text(rng: &mut ChaCha8Rng, cfg: &PlantedConfig) -> String {
    let mut segments = Vec::new();
    let mut prologue: Vec<&str> = [FEMALE_NAME, MALE_NAME]
        .iter()
        .flat_map(|n| std::iter::repeat_n(*n, cfg.prologue))
        .collect();
    prologue.shuffle(rng);
    for who in prologue {
        segments.push(sentence(rng, who, cfg.prologue_level));
    }
    let pair = format!("{FEMALE_NAME} and {MALE_NAME}");
    let n_co = rng.random_range(cfg.cooccurrences.clone());
    for j in 0..n_co {
        segments.push(sentence(rng, &pair, 0));
        if j + 1 == n_co {
            break;
        }
        // every third gap is wide enough to survive the largest merge gap
        let spacing = if j % 3 == 0 { rng.random_range(12..=16) } else { rng.random_range(3..=8) };
        let mut between: Vec<Option<(&str, i32)>> = vec![None; spacing - 1];
        between[0] = Some((FEMALE_NAME, cfg.female_level));
        between[1] = Some((MALE_NAME, cfg.male_level));
        between.shuffle(rng);
        for slot in between {
            segments.push(match slot {
                Some((who, level)) => sentence(rng, who, level),
                None => sentence(rng, "the", 0),
            });
        }
    }
    segments.join(" ")
}

/// The planted corpus: synopses with ids `planted-000`, ... and years
/// spread over 1950..2010.
pub fn planted_corpus(cfg: &PlantedConfig) -> Vec<Story> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.n_stories)
        .map(|i| {
            let mut meta = StoryMeta::new(format!("planted-{i:03}"), SourceKind::Synopsis);
            meta.title = format!("Planted {i}");
            meta.year = Some(1950 + (i % 60) as i32);
            let text = planted_story_text(&mut rng, cfg);
            Story::from_text(meta, &text, SegmentKind::Sentence)
        })
        .collect()
}
