//! Story ingestion: metadata files, segmentation into sentences or
//! paragraphs, tokenization and corpus filtering.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cast::{CharacterRoster, Gender};
use crate::error::{Error, Result};
use crate::par::{self, Execution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    Synopsis,
    Script,
    Book,
}

impl SourceKind {
    /// Synopses are read sentence by sentence, scripts and books by paragraph.
    pub fn default_segmentation(self) -> SegmentKind {
        match self {
            SourceKind::Synopsis => SegmentKind::Sentence,
            SourceKind::Script | SourceKind::Book => SegmentKind::Paragraph,
        }
    }
}

impl FromStr for SourceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "synopsis" => Ok(SourceKind::Synopsis),
            "script" => Ok(SourceKind::Script),
            "book" => Ok(SourceKind::Book),
            other => Err(Error::Invalid(format!("unknown source kind {other:?}"))),
        }
    }
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SourceKind::Synopsis => "synopsis",
            SourceKind::Script => "script",
            SourceKind::Book => "book",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentKind {
    Sentence,
    Paragraph,
}

impl FromStr for SegmentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sentence" => Ok(SegmentKind::Sentence),
            "paragraph" => Ok(SegmentKind::Paragraph),
            other => Err(Error::Invalid(format!("unknown segment mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoryMeta {
    pub id: String,
    pub title: String,
    pub year: Option<i32>,
    pub genres: Vec<String>,
    pub rating: Option<f64>,
    pub votes: Option<u64>,
    pub source_kind: SourceKind,
    /// Per-character gender supplied by the data source (cast lists). When
    /// present it takes precedence over name-lexicon inference.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub cast: BTreeMap<String, Gender>,
}

impl StoryMeta {
    pub fn new(id: impl Into<String>, source_kind: SourceKind) -> Self {
        let id = id.into();
        StoryMeta {
            title: id.clone(),
            id,
            year: None,
            genres: Vec::new(),
            rating: None,
            votes: None,
            source_kind,
            cast: BTreeMap::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub index: usize,
    pub kind: SegmentKind,
    pub raw_text: String,
    pub tokens: Vec<String>,
    pub surface_tokens: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Story {
    pub meta: StoryMeta,
    pub segments: Vec<Segment>,
}

impl Story {
    pub fn from_text(meta: StoryMeta, text: &str, mode: SegmentKind) -> Story {
        Story {
            meta,
            segments: segment_text(text, mode),
        }
    }

    pub fn id(&self) -> &str {
        &self.meta.id
    }
}

const ABBREVIATIONS: [&str; 9] = ["Mr", "Mrs", "Ms", "Dr", "St", "Jr", "Sr", "vs", "etc"];

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '\u{201d}' | '\u{2019}')
}

fn is_opener(c: char) -> bool {
    matches!(c, '"' | '\'' | '(' | '[' | '\u{201c}' | '\u{2018}')
}

/// Byte offsets where sentences end.
fn sentence_breaks(text: &str) -> Vec<usize> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut breaks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (_, c) = chars[i];
        if !matches!(c, '.' | '?' | '!') {
            i += 1;
            continue;
        }
        let mark = i;
        let mut j = i + 1;
        while j < chars.len() && (matches!(chars[j].1, '.' | '?' | '!') || is_closer(chars[j].1)) {
            j += 1;
        }
        let end = chars.get(j).map_or(text.len(), |&(b, _)| b);
        let mut k = j;
        while k < chars.len() && chars[k].1.is_whitespace() {
            k += 1;
        }
        let mut next = k;
        while next < chars.len() && is_opener(chars[next].1) {
            next += 1;
        }
        let capital_follows = k > j && next < chars.len() && chars[next].1.is_uppercase();
        if capital_follows && !(c == '.' && j == mark + 1 && abbreviation_before(text, chars[mark].0)) {
            breaks.push(end);
        }
        i = j;
    }
    breaks
}

fn abbreviation_before(text: &str, dot: usize) -> bool {
    let head = &text[..dot];
    let word_start = head
        .char_indices()
        .rev()
        .take_while(|(_, c)| c.is_alphabetic())
        .last()
        .map_or(dot, |(b, _)| b);
    ABBREVIATIONS.contains(&&head[word_start..])
}

fn paragraph_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start: Option<usize> = None;
    let mut end = 0;
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        if line.trim().is_empty() {
            if let Some(s) = start.take() {
                spans.push((s, end));
            }
        } else {
            if start.is_none() {
                start = Some(offset);
            }
            end = offset + line.len();
        }
        offset += line.len();
    }
    if let Some(s) = start {
        spans.push((s, end));
    }
    spans
}

/// Splits text into sentences (terminal `.`/`?`/`!` followed by whitespace
/// and a capital, except after a known abbreviation) or paragraphs (blank
/// lines). Empty segments are dropped.
pub fn segment_text(text: &str, mode: SegmentKind) -> Vec<Segment> {
    let spans: Vec<(usize, usize)> = match mode {
        SegmentKind::Sentence => {
            let mut spans = Vec::new();
            let mut start = 0;
            for b in sentence_breaks(text) {
                spans.push((start, b));
                start = b;
            }
            spans.push((start, text.len()));
            spans
        }
        SegmentKind::Paragraph => paragraph_spans(text),
    };
    spans
        .into_iter()
        .map(|(s, e)| text[s..e].trim())
        .filter(|raw| !raw.is_empty())
        .enumerate()
        .map(|(index, raw)| {
            let (tokens, surface_tokens) = tokenize(raw);
            Segment {
                index,
                kind: mode,
                raw_text: raw.to_string(),
                tokens,
                surface_tokens,
            }
        })
        .collect()
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Splits on non-alphanumeric characters, keeping apostrophes that sit
/// between two alphanumerics. Returns `(lowercased, original case)`.
pub fn tokenize(text: &str) -> (Vec<String>, Vec<String>) {
    let chars: Vec<char> = text.chars().collect();
    let mut surface = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let keep = c.is_alphanumeric()
            || (is_apostrophe(c)
                && !current.is_empty()
                && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric()));
        if keep {
            current.push(c);
        } else if !current.is_empty() {
            surface.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        surface.push(current);
    }
    let tokens = surface.iter().map(|t| t.to_lowercase()).collect();
    (tokens, surface)
}

#[derive(Clone, Debug, Default)]
pub struct IngestOptions {
    /// Only ingest rows of this kind.
    pub kind: Option<SourceKind>,
    /// Force a segmentation mode instead of deriving it from the row's kind.
    pub segmentation: Option<SegmentKind>,
    /// Drop text outside Project Gutenberg `*** START OF` / `*** END OF`
    /// marker lines.
    pub trim_gutenberg: bool,
    pub execution: Execution,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RejectedRow {
    pub row: usize,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub n_rows: usize,
    pub n_stories: usize,
    pub rejected_rows: Vec<RejectedRow>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Default, Deserialize)]
struct RawRow {
    id: Option<String>,
    title: Option<String>,
    year: Option<String>,
    genres: Option<String>,
    rating: Option<String>,
    votes: Option<String>,
    source_kind: Option<String>,
    path: Option<String>,
    #[serde(default)]
    cast: Option<String>,
}

fn opt(s: &Option<String>) -> Option<&str> {
    s.as_deref().map(str::trim).filter(|s| !s.is_empty())
}

fn parse_cast(s: &str) -> std::result::Result<BTreeMap<String, Gender>, String> {
    s.split('|')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|pair| {
            let (name, gender) = pair
                .split_once(':')
                .ok_or_else(|| format!("cast entry {pair:?} is not name:gender"))?;
            let gender = gender.parse::<Gender>().map_err(|e| e.to_string())?;
            Ok((name.trim().to_string(), gender))
        })
        .collect()
}

impl RawRow {
    fn into_meta(self) -> std::result::Result<(StoryMeta, String), String> {
        let id = opt(&self.id).ok_or("missing id")?.to_string();
        let kind: SourceKind = opt(&self.source_kind)
            .ok_or("missing source_kind")?
            .parse()
            .map_err(|e: Error| e.to_string())?;
        let path = opt(&self.path).ok_or("missing path")?.to_string();
        let year = opt(&self.year)
            .map(|y| y.parse::<i32>().map_err(|_| format!("bad year {y:?}")))
            .transpose()?;
        let rating = opt(&self.rating)
            .map(|r| r.parse::<f64>().map_err(|_| format!("bad rating {r:?}")))
            .transpose()?;
        if let Some(r) = rating {
            if !(0.0..=10.0).contains(&r) {
                return Err(format!("rating {r} outside [0, 10]"));
            }
        }
        let votes = opt(&self.votes)
            .map(|v| v.parse::<u64>().map_err(|_| format!("bad votes {v:?}")))
            .transpose()?;
        let genres = opt(&self.genres)
            .map(|g| {
                g.split('|')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect()
            })
            .unwrap_or_default();
        let cast = opt(&self.cast).map(parse_cast).transpose()?.unwrap_or_default();
        let meta = StoryMeta {
            title: opt(&self.title).unwrap_or(&id).to_string(),
            id,
            year,
            genres,
            rating,
            votes,
            source_kind: kind,
            cast,
        };
        Ok((meta, path))
    }
}

fn read_rows(metadata: &Path) -> Result<Vec<std::result::Result<RawRow, String>>> {
    let content = std::fs::read_to_string(metadata).map_err(|e| Error::io(metadata, e))?;
    let is_jsonl = matches!(
        metadata.extension().and_then(|e| e.to_str()),
        Some("jsonl" | "ndjson" | "json")
    );
    if is_jsonl {
        return Ok(content
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|line| {
                let value: serde_json::Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
                let field = |k: &str| match value.get(k) {
                    None | Some(serde_json::Value::Null) => None,
                    Some(serde_json::Value::String(s)) => Some(s.clone()),
                    Some(serde_json::Value::Array(items)) => Some(
                        items
                            .iter()
                            .map(|v| v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string()))
                            .collect::<Vec<_>>()
                            .join("|"),
                    ),
                    Some(other) => Some(other.to_string()),
                };
                Ok(RawRow {
                    id: field("id"),
                    title: field("title"),
                    year: field("year"),
                    genres: field("genres"),
                    rating: field("rating"),
                    votes: field("votes"),
                    source_kind: field("source_kind"),
                    path: field("path"),
                    cast: field("cast"),
                })
            })
            .collect());
    }
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(content.as_bytes());
    let headers = rdr.headers()?.clone();
    for required in ["id", "source_kind", "path"] {
        if !headers.iter().any(|h| h.trim() == required) {
            return Err(Error::Metadata(format!("header lacks column {required:?}")));
        }
    }
    Ok(rdr
        .records()
        .map(|rec| {
            let rec = rec.map_err(|e| e.to_string())?;
            if rec.len() != headers.len() {
                return Err(format!("expected {} fields, found {}", headers.len(), rec.len()));
            }
            rec.deserialize::<RawRow>(Some(&headers)).map_err(|e| e.to_string())
        })
        .collect())
}

/// Removes Project Gutenberg boilerplate around the marker lines.
pub fn trim_gutenberg(text: &str) -> &str {
    let start = text
        .find("*** START OF")
        .and_then(|i| text[i..].find('\n').map(|nl| i + nl + 1))
        .unwrap_or(0);
    let end = text[start..].find("*** END OF").map_or(text.len(), |i| start + i);
    &text[start..end]
}

/// Reads the metadata file and each referenced story. Output order follows
/// metadata rows; unreadable story files and malformed rows are skipped and
/// recorded in the report.
pub fn ingest(corpus_dir: &Path, metadata: &Path, options: &IngestOptions) -> Result<(Vec<Story>, IngestReport)> {
    let rows = read_rows(metadata)?;
    let mut report = IngestReport {
        n_rows: rows.len(),
        ..Default::default()
    };
    let mut jobs: Vec<(StoryMeta, PathBuf)> = Vec::new();
    let mut ids = HashSet::new();
    for (i, row) in rows.into_iter().enumerate() {
        let row_no = i + 1;
        match row.and_then(RawRow::into_meta) {
            Ok((meta, path)) => {
                if options.kind.is_some_and(|k| k != meta.source_kind) {
                    continue;
                }
                if !ids.insert(meta.id.clone()) {
                    report.rejected_rows.push(RejectedRow {
                        row: row_no,
                        reason: format!("duplicate id {:?}", meta.id),
                    });
                    continue;
                }
                jobs.push((meta, corpus_dir.join(path)));
            }
            Err(reason) => report.rejected_rows.push(RejectedRow { row: row_no, reason }),
        }
    }

    let loaded = par::map(options.execution, &jobs, |(meta, path)| {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("story {}: cannot read {}: {e}", meta.id, path.display()))?;
        let text = if options.trim_gutenberg {
            trim_gutenberg(&text)
        } else {
            &text
        };
        let mode = options
            .segmentation
            .unwrap_or_else(|| meta.source_kind.default_segmentation());
        Ok::<_, String>(Story::from_text(meta.clone(), text, mode))
    });

    let mut stories = Vec::with_capacity(loaded.len());
    for result in loaded {
        match result {
            Ok(story) if story.segments.is_empty() => {
                report.warnings.push(format!("story {}: no text", story.meta.id));
            }
            Ok(story) => stories.push(story),
            Err(warning) => {
                log::warn!("{warning}");
                report.warnings.push(warning);
            }
        }
    }
    report.n_stories = stories.len();
    Ok((stories, report))
}

/// Minimum segment count is exclusive: a story needs more than this many.
pub const MIN_SEGMENTS: usize = 5;

/// Keeps stories with more than five segments and at least one detected
/// character of each gender.
pub fn filter_corpus<F>(stories: Vec<Story>, roster_fn: F) -> Vec<Story>
where
    F: Fn(&Story) -> CharacterRoster,
{
    stories
        .into_iter()
        .filter(|story| {
            if story.segments.len() <= MIN_SEGMENTS {
                return false;
            }
            let roster = roster_fn(story);
            roster.has_gender(Gender::Female) && roster.has_gender(Gender::Male)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cast::{detect_characters, NameLexicon};
    use std::io::Write;

    #[test]
    fn empty_and_simple_sentences() {
        assert!(segment_text("", SegmentKind::Sentence).is_empty());
        assert!(segment_text("   \n ", SegmentKind::Sentence).is_empty());
        let segs = segment_text("Hi. Go? Run!", SegmentKind::Sentence);
        let raw: Vec<&str> = segs.iter().map(|s| s.raw_text.as_str()).collect();
        assert_eq!(raw, ["Hi.", "Go?", "Run!"]);
        assert_eq!(segs.iter().map(|s| s.index).collect::<Vec<_>>(), [0, 1, 2]);
    }

    #[test]
    fn abbreviations_do_not_split() {
        let segs = segment_text(
            "Mr. Darcy met Dr. Watson at St. Paul's. They talked.",
            SegmentKind::Sentence,
        );
        assert_eq!(segs.len(), 2);
        assert!(segs[0].raw_text.starts_with("Mr. Darcy"));
    }

    #[test]
    fn lowercase_after_period_does_not_split() {
        assert_eq!(segment_text("It cost 3.5 dollars. e.g. this one. Fine.", SegmentKind::Sentence).len(), 2);
    }

    #[test]
    fn quotes_stay_with_their_sentence() {
        let segs = segment_text("She cried, \"Go away!\" He left. \"Why?\" she asked.", SegmentKind::Sentence);
        let raw: Vec<&str> = segs.iter().map(|s| s.raw_text.as_str()).collect();
        assert_eq!(raw, ["She cried, \"Go away!\"", "He left.", "\"Why?\" she asked."]);
    }

    #[test]
    fn paragraphs_split_on_blank_lines() {
        let text = "ELLA\nHello there.\n\n  \nKIT\nHi.\nBye.\n\n\nEnd";
        let segs = segment_text(text, SegmentKind::Paragraph);
        assert_eq!(segs.len(), 3);
        assert_eq!(segs[1].raw_text, "KIT\nHi.\nBye.");
        assert!(segs.iter().all(|s| s.kind == SegmentKind::Paragraph));
    }

    #[test]
    fn tokenize_cases() {
        let (tokens, surface) = tokenize("Ella's shoe!");
        assert_eq!(tokens, ["ella's", "shoe"]);
        assert_eq!(surface, ["Ella's", "shoe"]);
        let (tokens, surface) = tokenize("  ");
        assert!(tokens.is_empty() && surface.is_empty());
        let (tokens, _) = tokenize("'Tis kind-hearted, isn\u{2019}t it?'");
        assert_eq!(tokens, ["tis", "kind", "hearted", "isn\u{2019}t", "it"]);
    }

    proptest::proptest! {
        #[test]
        fn segmentation_keeps_every_visible_char(text in "[A-Za-z .?!,'\"\n]{0,200}") {
            for mode in [SegmentKind::Sentence, SegmentKind::Paragraph] {
                let segs = segment_text(&text, mode);
                let joined: String = segs.iter().map(|s| s.raw_text.as_str()).collect::<Vec<_>>().join(" ");
                let strip = |s: &str| s.chars().filter(|c| !c.is_whitespace()).collect::<String>();
                proptest::prop_assert_eq!(strip(&joined), strip(&text));
                proptest::prop_assert_eq!(&segs, &segment_text(&text, mode));
                for s in &segs {
                    proptest::prop_assert_eq!(s.tokens.len(), s.surface_tokens.len());
                }
            }
        }
    }

    fn write(dir: &Path, name: &str, body: &str) {
        let mut f = std::fs::File::create(dir.join(name)).unwrap();
        f.write_all(body.as_bytes()).unwrap();
    }

    #[test]
    fn ingest_csv_rows() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a.txt", "One. Two.");
        write(dir.path(), "b.txt", "Para one.\n\nPara two.");
        write(dir.path(), "c.txt", "Just this.");
        write(
            dir.path(),
            "meta.csv",
            "id,title,year,genres,rating,votes,source_kind,path\n\
             a,A,1999,Drama|Romance,7.5,1200,synopsis,a.txt\n\
             b,B,,,,,script,b.txt\n\
             c,C,2001,,,,book,c.txt\n",
        );
        let (stories, report) = ingest(dir.path(), &dir.path().join("meta.csv"), &IngestOptions::default()).unwrap();
        assert_eq!(stories.len(), 3);
        assert_eq!(report.n_stories, 3);
        assert_eq!(stories[0].meta.genres, ["Drama", "Romance"]);
        assert_eq!(stories[0].segments.len(), 2);
        assert_eq!(stories[1].segments[0].kind, SegmentKind::Paragraph);
        assert_eq!(stories[1].meta.rating, None);
    }

    #[test]
    fn ingest_missing_file_and_bad_rows() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a.txt", "One.");
        write(dir.path(), "b.txt", "Two.");
        write(
            dir.path(),
            "meta.csv",
            "id,title,year,genres,rating,votes,source_kind,path\n\
             a,A,,,,,synopsis,a.txt\n\
             b,B,,,,,synopsis,b.txt\n\
             gone,G,,,,,synopsis,gone.txt\n\
             bad,B,,,11.5,,synopsis,a.txt\n\
             a,dup,,,,,synopsis,a.txt\n\
             odd,O,,,,,poem,a.txt\n",
        );
        let (stories, report) = ingest(dir.path(), &dir.path().join("meta.csv"), &IngestOptions::default()).unwrap();
        assert_eq!(stories.len(), 2);
        assert_eq!(report.warnings.len(), 1);
        assert!(report.warnings[0].contains("gone"));
        assert_eq!(report.rejected_rows.len(), 3);
        assert_eq!(report.n_rows, 6);
    }

    #[test]
    fn ingest_jsonl_and_kind_filter() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a.txt", "One.");
        write(dir.path(), "b.txt", "Two.");
        write(
            dir.path(),
            "meta.jsonl",
            "{\"id\":\"a\",\"title\":\"A\",\"year\":1950,\"genres\":[\"Drama\"],\"rating\":6.1,\"votes\":10,\"source_kind\":\"synopsis\",\"path\":\"a.txt\",\"cast\":\"Anna:female|Bob:male\"}\n\
             {\"id\":\"b\",\"source_kind\":\"book\",\"path\":\"b.txt\"}\n",
        );
        let options = IngestOptions {
            kind: Some(SourceKind::Synopsis),
            ..Default::default()
        };
        let (stories, _) = ingest(dir.path(), &dir.path().join("meta.jsonl"), &options).unwrap();
        assert_eq!(stories.len(), 1);
        assert_eq!(stories[0].meta.year, Some(1950));
        assert_eq!(stories[0].meta.votes, Some(10));
        assert_eq!(stories[0].meta.cast.get("Anna"), Some(&Gender::Female));
    }

    #[test]
    fn gutenberg_trim() {
        let text = "License blah\n*** START OF THE PROJECT ***\nBody.\n*** END OF THE PROJECT ***\nmore";
        assert_eq!(trim_gutenberg(text), "Body.\n");
        assert_eq!(trim_gutenberg("plain"), "plain");
    }

    fn story(id: &str, sentences: &[&str]) -> Story {
        Story::from_text(StoryMeta::new(id, SourceKind::Synopsis), &sentences.join(" "), SegmentKind::Sentence)
    }

    #[test]
    fn filtering_rules() {
        let lexicon = NameLexicon::from_lists(["Bob", "Carl"], ["Anna"]);
        let roster = |s: &Story| detect_characters(s, &lexicon);
        let five = story("five", &["Anna met Bob."; 5]);
        let male_only = story("male", &["Bob ran.", "Carl ran.", "It rained.", "Bob slept.", "Carl ate.", "Bob sang.", "End.", "Then.", "More.", "Done."]);
        let mixed = story("mixed", &["Anna ran.", "Bob ran.", "It rained.", "A.", "B.", "C.", "D.", "E.", "F.", "G."]);
        assert_eq!(five.segments.len(), 5);
        assert_eq!(mixed.segments.len(), 10);
        let kept = filter_corpus(vec![five, male_only, mixed.clone()], roster);
        assert_eq!(kept, vec![mixed]);
    }
}
