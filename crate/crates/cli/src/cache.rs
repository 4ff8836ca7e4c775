//! One JSON file per story holding the scoring stage and any slope stages
//! computed for it, each under its content digest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use narrative_arcs::corpus::Story;
use narrative_arcs::pipeline::{ScoreSettings, ScoredStory, SlopeRecord, SlopeSettings};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

const VERSION: u32 = 1;

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Identity of an input file: path, size and modification time. Hashing
/// multi-gigabyte embedding files on every run is not worth it.
pub fn file_identity(path: Option<&Path>) -> String {
    let Some(path) = path else { return "bundled".to_string() };
    let meta = fs::metadata(path).ok();
    let len = meta.as_ref().map_or(0, |m| m.len());
    let mtime = meta
        .and_then(|m| m.modified().ok())
        .and_then(|t| t.duration_since(std::time::UNIX_EPOCH).ok())
        .map_or(0, |d| d.as_nanos());
    let canonical = fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf());
    format!("{}:{len}:{mtime}", canonical.display())
}

/// Everything besides the story that the scoring stage depends on.
#[derive(Serialize)]
pub struct ScoreInputs<'a> {
    pub settings: &'a ScoreSettings,
    pub embeddings: &'a str,
    pub names: &'a str,
    pub ambiguous: &'a str,
}

/// Digest over the story's content and the scoring inputs. The output
/// directory and slope settings are deliberately not part of it.
pub fn score_key(story: &Story, inputs: &ScoreInputs<'_>) -> String {
    let mut h = Sha256::new();
    h.update(b"score-v1\0");
    h.update(serde_json::to_vec(story).expect("story serializes"));
    h.update(b"\0");
    h.update(serde_json::to_vec(inputs).expect("inputs serialize"));
    hex(&h.finalize())
}

pub fn slope_key(score_key: &str, settings: &SlopeSettings) -> String {
    let mut h = Sha256::new();
    h.update(b"slope-v1\0");
    h.update(score_key.as_bytes());
    h.update(serde_json::to_vec(settings).expect("settings serialize"));
    hex(&h.finalize())
}

#[derive(Serialize, Deserialize)]
struct Entry {
    version: u32,
    story_id: String,
    score_key: String,
    scored: ScoredStory,
    slopes: BTreeMap<String, SlopeRecord>,
}

pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(output: &Path) -> Cache {
        Cache {
            dir: output.join("cache"),
        }
    }

    fn file(&self, story_id: &str) -> PathBuf {
        let safe: String = story_id
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
            .collect();
        // the digest suffix keeps ids that sanitize alike apart
        let tag = &hex(&Sha256::digest(story_id.as_bytes()))[..8];
        self.dir.join(format!("{safe}-{tag}.json"))
    }

    fn read(&self, story_id: &str, score_key: &str) -> Option<Entry> {
        let text = fs::read_to_string(self.file(story_id)).ok()?;
        let entry: Entry = serde_json::from_str(&text).ok()?;
        (entry.version == VERSION && entry.score_key == score_key && entry.story_id == story_id).then_some(entry)
    }

    fn write(&self, entry: &Entry) {
        let path = self.file(&entry.story_id);
        let tmp = path.with_extension("json.tmp");
        let result = fs::create_dir_all(&self.dir)
            .and_then(|_| fs::write(&tmp, serde_json::to_vec(entry).expect("entry serializes")))
            .and_then(|_| fs::rename(&tmp, &path));
        if let Err(e) = result {
            log::warn!("cannot write cache file {}: {e}", path.display());
        }
    }

    /// Returns the cached stages when present, computing and storing the
    /// missing ones. The flag is true on a full cache hit.
    pub fn get_or_compute<E>(
        &self,
        story_id: &str,
        score_key: &str,
        slope_key: &str,
        score: impl FnOnce() -> Result<ScoredStory, E>,
        slope: impl FnOnce(&ScoredStory) -> Result<SlopeRecord, E>,
    ) -> Result<(ScoredStory, SlopeRecord, bool), E> {
        let (mut entry, cached) = match self.read(story_id, score_key) {
            Some(e) => (e, true),
            None => (Entry {
                version: VERSION,
                story_id: story_id.to_string(),
                score_key: score_key.to_string(),
                scored: score()?,
                slopes: BTreeMap::new(),
            }, false),
        };
        if let Some(rec) = entry.slopes.get(slope_key) {
            return Ok((entry.scored, rec.clone(), cached));
        }
        let rec = slope(&entry.scored)?;
        entry.slopes.insert(slope_key.to_string(), rec.clone());
        self.write(&entry);
        Ok((entry.scored, rec, false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use narrative_arcs::corpus::{SegmentKind, SourceKind, StoryMeta};

    fn story(text: &str) -> Story {
        Story::from_text(StoryMeta::new("s", SourceKind::Synopsis), text, SegmentKind::Sentence)
    }

    fn inputs(settings: &ScoreSettings) -> ScoreInputs<'_> {
        ScoreInputs {
            settings,
            embeddings: "e",
            names: "bundled",
            ambiguous: "exclude",
        }
    }

    #[test]
    fn keys() {
        let s = ScoreSettings::default();
        let a = score_key(&story("Anna sang. Bob ran."), &inputs(&s));
        assert_eq!(a, score_key(&story("Anna sang. Bob ran."), &inputs(&s)));
        assert_ne!(a, score_key(&story("Anna sang. Bob walked."), &inputs(&s)));

        let g1 = SlopeSettings::default();
        let g2 = SlopeSettings { gap: 2, ..g1 };
        assert_ne!(slope_key(&a, &g1), slope_key(&a, &g2));
        // gap is not part of the scoring key
        assert_eq!(a, score_key(&story("Anna sang. Bob ran."), &inputs(&s)));
    }

    #[test]
    fn file_names_are_safe() {
        let c = Cache::new(Path::new("/out"));
        let f = c.file("a/b c");
        assert!(f.file_name().unwrap().to_str().unwrap().starts_with("a_b_c-"));
        assert_ne!(c.file("a/b"), c.file("a_b"));
    }
}
