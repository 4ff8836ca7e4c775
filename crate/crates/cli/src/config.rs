//! Run configuration: `key = value` file, overridden key by key by flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use narrative_arcs::arc::UnscoredPolicy;
use narrative_arcs::cast::{AmbiguousPolicy, CooccurMode};
use narrative_arcs::corpus::{SegmentKind, SourceKind};
use narrative_arcs::embedstore::Format;
use narrative_arcs::slope::{SpanMode, MAX_GAP, MIN_GAP};

/// Bad flags, bad config values or missing inputs. Maps to exit status 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Every key accepted in the config file; each one is also a `--flag`.
pub const KEYS: [&str; 21] = [
    "embeddings",
    "embeddings-format",
    "corpus",
    "metadata",
    "sentiment-lexicon",
    "male-names",
    "female-names",
    "name-weights",
    "ambiguous",
    "pos-lexicon",
    "stopwords",
    "gap",
    "span-mode",
    "cooccur",
    "unscored",
    "kind",
    "segmentation",
    "trim-gutenberg",
    "output",
    "jobs",
    "cache",
];

/// Parses `key = value` lines. `#` starts a comment line. Relative paths are
/// later resolved against the file's directory.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, UsageError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| UsageError(format!("config line {}: expected key = value", i + 1)))?;
        let k = k.trim().replace('_', "-");
        if !KEYS.contains(&k.as_str()) {
            return Err(UsageError(format!("config line {}: unknown key {k:?}", i + 1)));
        }
        out.insert(k, v.trim().to_string());
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub embeddings: Option<PathBuf>,
    pub embeddings_format: Format,
    pub corpus: Option<PathBuf>,
    pub metadata: Option<PathBuf>,
    pub sentiment_lexicon: Option<PathBuf>,
    pub male_names: Option<PathBuf>,
    pub female_names: Option<PathBuf>,
    pub name_weights: Option<PathBuf>,
    pub ambiguous: AmbiguousPolicy,
    pub pos_lexicon: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub gap: usize,
    pub span_mode: SpanMode,
    pub cooccur: CooccurMode,
    pub unscored: UnscoredPolicy,
    pub kind: Option<SourceKind>,
    pub segmentation: Option<SegmentKind>,
    pub trim_gutenberg: bool,
    pub output: PathBuf,
    pub jobs: Option<usize>,
    pub cache: bool,
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, UsageError>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| UsageError(format!("invalid value for --{key}: {value:?} ({e})")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, UsageError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(UsageError(format!("invalid value for --{key}: {value:?} (expected true or false)"))),
    }
}

impl RunConfig {
    /// Builds the configuration from merged key/value pairs. `base` is the
    /// directory relative paths from the config file are resolved against;
    /// `from_file` tells which keys came from the file.
    pub fn from_map(
        values: &BTreeMap<String, String>,
        from_file: &BTreeMap<String, String>,
        base: Option<&Path>,
    ) -> Result<RunConfig, UsageError> {
        let get = |k: &str| values.get(k).map(String::as_str);
        let path = |k: &str| -> Option<PathBuf> {
            let v = get(k)?;
            let p = PathBuf::from(v);
            match base {
                Some(b) if p.is_relative() && from_file.get(k).map(String::as_str) == Some(v) => Some(b.join(p)),
                _ => Some(p),
            }
        };
        let gap = match get("gap") {
            Some(v) => {
                let g: usize = parse("gap", v)?;
                if !(MIN_GAP..=MAX_GAP).contains(&g) {
                    return Err(UsageError(format!(
                        "invalid value for --gap: {g} (must be between {MIN_GAP} and {MAX_GAP})"
                    )));
                }
                g
            }
            None => MIN_GAP,
        };
        let jobs = match get("jobs") {
            Some(v) => {
                let j: usize = parse("jobs", v)?;
                if j == 0 {
                    return Err(UsageError("invalid value for --jobs: 0 (must be at least 1)".into()));
                }
                Some(j)
            }
            None => None,
        };
        let cfg = RunConfig {
            embeddings: path("embeddings"),
            embeddings_format: get("embeddings-format").map(|v| parse("embeddings-format", v)).transpose()?.unwrap_or(Format::Auto),
            corpus: path("corpus"),
            metadata: path("metadata"),
            sentiment_lexicon: path("sentiment-lexicon"),
            male_names: path("male-names"),
            female_names: path("female-names"),
            name_weights: path("name-weights"),
            ambiguous: get("ambiguous").map(|v| parse("ambiguous", v)).transpose()?.unwrap_or_default(),
            pos_lexicon: path("pos-lexicon"),
            stopwords: path("stopwords"),
            gap,
            span_mode: get("span-mode").map(|v| parse("span-mode", v)).transpose()?.unwrap_or_default(),
            cooccur: get("cooccur").map(|v| parse("cooccur", v)).transpose()?.unwrap_or_default(),
            unscored: get("unscored").map(|v| parse("unscored", v)).transpose()?.unwrap_or_default(),
            kind: get("kind").map(|v| parse("kind", v)).transpose()?,
            segmentation: get("segmentation").map(|v| parse("segmentation", v)).transpose()?,
            trim_gutenberg: get("trim-gutenberg").map(|v| parse_bool("trim-gutenberg", v)).transpose()?.unwrap_or(false),
            output: path("output").unwrap_or_else(|| PathBuf::from("narrative-arcs-out")),
            jobs,
            cache: get("cache").map(|v| parse_bool("cache", v)).transpose()?.unwrap_or(true),
        };
        cfg.check_paths()?;
        Ok(cfg)
    }

    fn check_paths(&self) -> Result<(), UsageError> {
        let named = [
            ("embeddings", &self.embeddings),
            ("corpus", &self.corpus),
            ("metadata", &self.metadata),
            ("sentiment-lexicon", &self.sentiment_lexicon),
            ("male-names", &self.male_names),
            ("female-names", &self.female_names),
            ("name-weights", &self.name_weights),
            ("pos-lexicon", &self.pos_lexicon),
            ("stopwords", &self.stopwords),
        ];
        for (key, p) in named {
            if let Some(p) = p {
                if !p.exists() {
                    return Err(UsageError(format!("--{key}: {} does not exist", p.display())));
                }
            }
        }
        if self.male_names.is_some() != self.female_names.is_some() {
            return Err(UsageError("--male-names and --female-names must be given together".into()));
        }
        Ok(())
    }

    pub fn require<'a>(&self, key: &str, value: &'a Option<PathBuf>) -> Result<&'a Path, UsageError> {
        value
            .as_deref()
            .ok_or_else(|| UsageError(format!("--{key} is required (flag or config file)")))
    }

    /// Corpus directory, defaulting to the metadata file's directory.
    pub fn corpus_dir(&self) -> Result<PathBuf, UsageError> {
        if let Some(c) = &self.corpus {
            return Ok(c.clone());
        }
        let meta = self.require("metadata", &self.metadata)?;
        Ok(meta.parent().map(Path::to_path_buf).unwrap_or_default())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn parses_file() {
        let m = parse_config_file("# comment\ngap = 3\nspan_mode=end-to-start\n\n").unwrap();
        assert_eq!(m, map(&[("gap", "3"), ("span-mode", "end-to-start")]));
        assert!(parse_config_file("nonsense").is_err());
        assert!(parse_config_file("colour = red").is_err());
    }

    #[test]
    fn gap_bounds() {
        let empty = BTreeMap::new();
        let err = RunConfig::from_map(&map(&[("gap", "11")]), &empty, None).unwrap_err();
        assert!(err.0.contains("--gap"));
        assert!(RunConfig::from_map(&map(&[("gap", "0")]), &empty, None).is_err());
        assert_eq!(RunConfig::from_map(&map(&[("gap", "10")]), &empty, None).unwrap().gap, 10);
        assert_eq!(RunConfig::from_map(&empty, &empty, None).unwrap().gap, 1);
    }

    #[test]
    fn missing_paths_are_usage_errors() {
        let empty = BTreeMap::new();
        let err = RunConfig::from_map(&map(&[("embeddings", "/no/such/file")]), &empty, None).unwrap_err();
        assert!(err.0.contains("--embeddings"));
    }

    #[test]
    fn relative_paths_follow_the_config_file() {
        let dir = std::env::temp_dir();
        let file = map(&[("output", "out")]);
        let cfg = RunConfig::from_map(&file, &file, Some(&dir)).unwrap();
        assert_eq!(cfg.output, dir.join("out"));
        // a flag value is taken as given
        let flags = map(&[("output", "elsewhere")]);
        let cfg = RunConfig::from_map(&flags, &file, Some(&dir)).unwrap();
        assert_eq!(cfg.output, PathBuf::from("elsewhere"));
    }
}
