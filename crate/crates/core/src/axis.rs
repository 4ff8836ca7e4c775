//! The happiness axis: mean of positive seed vectors minus mean of negative
//! seed vectors, and its validation against a human-scored word list.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embedstore::{cosine, EmbeddingTable};
use crate::error::{Error, Result};
use crate::stats::student_t_two_sided;

pub const DEFAULT_POSITIVE: [&str; 8] = [
    "success", "succeed", "luck", "fortune", "happy", "glad", "joy", "smile",
];
pub const DEFAULT_NEGATIVE: [&str; 7] = [
    "failure",
    "fail",
    "unfortunate",
    "unhappy",
    "sad",
    "sorrow",
    "tear",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SentimentAxis {
    pub vector: Vec<f64>,
    pub positive_words: Vec<String>,
    pub negative_words: Vec<String>,
    pub found_positive: usize,
    pub found_negative: usize,
    /// Seed words that were not in the embedding table.
    pub missing: Vec<String>,
}

impl SentimentAxis {
    pub fn dim(&self) -> usize {
        self.vector.len()
    }
}

fn dedup(words: &[impl AsRef<str>]) -> Vec<String> {
    let mut seen = HashSet::new();
    words
        .iter()
        .map(|w| w.as_ref().to_string())
        .filter(|w| seen.insert(w.clone()))
        .collect()
}

fn side_mean(
    table: &EmbeddingTable,
    words: &[String],
    side: &'static str,
    missing: &mut Vec<String>,
) -> Result<(Vec<f64>, usize)> {
    let mut sum = vec![0.0f64; table.dim()];
    let mut found = 0usize;
    for word in words {
        match table.lookup(word) {
            Some(v) => {
                for (s, &x) in sum.iter_mut().zip(v) {
                    *s += f64::from(x);
                }
                found += 1;
            }
            None => missing.push(word.clone()),
        }
    }
    if found == 0 {
        return Err(Error::EmptySeedSide { side });
    }
    sum.iter_mut().for_each(|s| *s /= found as f64);
    Ok((sum, found))
}

/// Builds the axis from seed lists. Lists are deduplicated first; seed words
/// missing from the table are skipped with a warning.
pub fn build_axis(
    table: &EmbeddingTable,
    positives: &[impl AsRef<str>],
    negatives: &[impl AsRef<str>],
) -> Result<SentimentAxis> {
    if positives.is_empty() {
        return Err(Error::Invalid("positive seed list is empty".into()));
    }
    if negatives.is_empty() {
        return Err(Error::Invalid("negative seed list is empty".into()));
    }
    let positive_words = dedup(positives);
    let negative_words = dedup(negatives);
    let mut missing = Vec::new();
    let (pos, found_positive) = side_mean(table, &positive_words, "positive", &mut missing)?;
    let (neg, found_negative) = side_mean(table, &negative_words, "negative", &mut missing)?;
    if !missing.is_empty() {
        log::warn!("seed words not in embeddings: {}", missing.join(", "));
    }
    let vector = pos.iter().zip(&neg).map(|(p, n)| p - n).collect();
    Ok(SentimentAxis {
        vector,
        positive_words,
        negative_words,
        found_positive,
        found_negative,
        missing,
    })
}

/// Cosine between a word's vector and the axis; `None` when the word has no
/// vector.
pub fn word_happiness(table: &EmbeddingTable, axis: &SentimentAxis, token: &str) -> Result<Option<f64>> {
    if axis.vector.iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroNorm);
    }
    table.lookup(token).map(|v| cosine(v, &axis.vector)).transpose()
}

/// Sample Pearson correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::TooFew {
            needed: 2,
            got: xs.len(),
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("xs"));
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance("ys"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Two-sided p-value for a Pearson r over `n` pairs.
pub fn pearson_p_value(r: f64, n: usize) -> f64 {
    if n < 3 {
        return f64::NAN;
    }
    let df = (n - 2) as f64;
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let t = r * (df / (1.0 - r * r)).sqrt();
    student_t_two_sided(t, df)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub word: String,
    pub human_score: f64,
}

const SCORE_COLUMNS: [&str; 4] = ["score", "happiness", "happiness_average", "happiness score"];

/// Reads a delimited lexicon with a `word` column and a score column
/// (`score`, `happiness` or `happiness_average`). Comma or tab separated;
/// free-text lines before the header are skipped. Words are lowercased and
/// scores must lie in `[1, 9]`.
pub fn load_lexicon(path: &Path) -> Result<Vec<LexiconEntry>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_lexicon(file)
}

pub fn read_lexicon<R: std::io::Read>(mut reader: R) -> Result<Vec<LexiconEntry>> {
    let mut text = String::new();
    reader.read_to_string(&mut text).map_err(Error::Stream)?;
    let header_line = text
        .lines()
        .position(|l| l.split([',', '\t']).any(|c| c.trim().eq_ignore_ascii_case("word")))
        .ok_or_else(|| Error::Lexicon("missing column \"word\"".into()))?;
    let body: String = text.lines().skip(header_line).collect::<Vec<_>>().join("\n");
    let delimiter = if body.lines().next().is_some_and(|h| h.contains('\t')) { b'\t' } else { b',' };
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(body.as_bytes());
    let headers = rdr.headers()?.clone();
    let find = |names: &[&str]| headers.iter().position(|h| names.iter().any(|n| h.eq_ignore_ascii_case(n)));
    let wi = find(&["word"]).ok_or_else(|| Error::Lexicon("missing column \"word\"".into()))?;
    let si = find(&SCORE_COLUMNS).ok_or_else(|| Error::Lexicon("missing column \"score\"".into()))?;
    // row numbers below count from the header line
    let offset = header_line + 2;
    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let word = record.get(wi).unwrap_or_default().to_lowercase();
        let raw = record.get(si).unwrap_or_default();
        let score: f64 = raw
            .parse()
            .map_err(|_| Error::Lexicon(format!("row {}: bad score {raw:?}", i + offset)))?;
        if !(1.0..=9.0).contains(&score) {
            return Err(Error::Lexicon(format!(
                "row {}: score {score} outside [1, 9]",
                i + offset
            )));
        }
        if word.is_empty() {
            return Err(Error::Lexicon(format!("row {}: empty word", i + offset)));
        }
        out.push(LexiconEntry {
            word,
            human_score: score,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub pearson_r: f64,
    pub n_matched: usize,
    pub n_lexicon: usize,
    pub p_value: f64,
}

/// Correlates human scores with axis scores over the lexicon words present
/// in the table. Absent words are skipped and counted.
pub fn validate_axis(
    table: &EmbeddingTable,
    axis: &SentimentAxis,
    lexicon: &[LexiconEntry],
) -> Result<ValidationReport> {
    if lexicon.is_empty() {
        return Err(Error::Lexicon("lexicon is empty".into()));
    }
    let mut human = Vec::new();
    let mut machine = Vec::new();
    for entry in lexicon {
        if let Some(h) = word_happiness(table, axis, &entry.word)? {
            human.push(entry.human_score);
            machine.push(h);
        }
    }
    if human.len() < 3 {
        return Err(Error::TooFew {
            needed: 3,
            got: human.len(),
        });
    }
    let r = pearson(&machine, &human)?;
    Ok(ValidationReport {
        pearson_r: r,
        n_matched: human.len(),
        n_lexicon: lexicon.len(),
        p_value: pearson_p_value(r, human.len()),
    })
}
