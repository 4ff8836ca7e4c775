//! Segment happiness scores and per-character emotion curves.
//!
//! A segment's raw score is the mean axis cosine of its in-vocabulary tokens.
//! Raw scores are z-normalized per story (population standard deviation).
//! A character's curve takes the z score on segments naming the character
//! and 0 elsewhere, and accumulates it over the story.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::axis::SentimentAxis;
use crate::cast::{CharacterRoster, CooccurrenceMap, Gender};
use crate::corpus::Story;
use crate::embedstore::{cosine, EmbeddingTable};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentScore {
    pub index: usize,
    pub raw: f64,
    pub z: f64,
    pub n_scored_tokens: usize,
}

/// How segments without any in-vocabulary token enter the z statistics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnscoredPolicy {
    /// Participate with raw = 0.
    #[default]
    Include,
    /// Left out of mean and variance; their z is 0.
    Exclude,
}

impl FromStr for UnscoredPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "include" => Ok(UnscoredPolicy::Include),
            "exclude" => Ok(UnscoredPolicy::Exclude),
            other => Err(Error::Invalid(format!("unknown unscored-segment policy {other:?}"))),
        }
    }
}

/// Scores words against the axis, memoizing per token.
pub struct WordScorer<'a> {
    table: &'a EmbeddingTable,
    axis: &'a SentimentAxis,
    cache: HashMap<String, Option<f64>>,
}

impl<'a> WordScorer<'a> {
    pub fn new(table: &'a EmbeddingTable, axis: &'a SentimentAxis) -> Result<Self> {
        if axis.vector.iter().all(|&x| x == 0.0) {
            return Err(Error::ZeroNorm);
        }
        if axis.dim() != table.dim() {
            return Err(Error::DimensionMismatch {
                left: table.dim(),
                right: axis.dim(),
            });
        }
        Ok(WordScorer {
            table,
            axis,
            cache: HashMap::new(),
        })
    }

    pub fn score(&mut self, token: &str) -> Result<Option<f64>> {
        if let Some(&hit) = self.cache.get(token) {
            return Ok(hit);
        }
        let value = match self.table.lookup(token) {
            // an all-zero word vector has no direction; treat it as unscored
            Some(v) if v.iter().all(|&x| x == 0.0) => None,
            Some(v) => Some(cosine(v, &self.axis.vector)?),
            None => None,
        };
        self.cache.insert(token.to_string(), value);
        Ok(value)
    }
}

/// Population z-scores; zero variance gives all zeros. Entries with
/// `include == false` are skipped and get z = 0.
pub fn z_scores(raw: &[f64], include: &[bool]) -> Vec<f64> {
    let used: Vec<f64> = raw
        .iter()
        .zip(include)
        .filter(|(_, &keep)| keep)
        .map(|(&x, _)| x)
        .collect();
    if used.is_empty() {
        return vec![0.0; raw.len()];
    }
    let n = used.len() as f64;
    let mean = used.iter().sum::<f64>() / n;
    let var = used.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    if var <= 0.0 || !var.is_finite() {
        return vec![0.0; raw.len()];
    }
    let sd = var.sqrt();
    raw.iter()
        .zip(include)
        .map(|(&x, &keep)| if keep { (x - mean) / sd } else { 0.0 })
        .collect()
}

pub fn score_segments(
    story: &Story,
    table: &EmbeddingTable,
    axis: &SentimentAxis,
    policy: UnscoredPolicy,
) -> Result<Vec<SegmentScore>> {
    let mut scorer = WordScorer::new(table, axis)?;
    let mut raw = Vec::with_capacity(story.segments.len());
    let mut counts = Vec::with_capacity(story.segments.len());
    for segment in &story.segments {
        let mut sum = 0.0;
        let mut n = 0usize;
        for token in &segment.tokens {
            if let Some(h) = scorer.score(token)? {
                sum += h;
                n += 1;
            }
        }
        raw.push(if n == 0 { 0.0 } else { sum / n as f64 });
        counts.push(n);
    }
    if counts.iter().all(|&n| n == 0) {
        return Err(Error::NothingScored(story.id().to_string()));
    }
    let include: Vec<bool> = match policy {
        UnscoredPolicy::Include => vec![true; raw.len()],
        UnscoredPolicy::Exclude => counts.iter().map(|&n| n > 0).collect(),
    };
    let z = z_scores(&raw, &include);
    Ok(story
        .segments
        .iter()
        .zip(raw.into_iter().zip(z).zip(counts))
        .map(|(segment, ((raw, z), n_scored_tokens))| SegmentScore {
            index: segment.index,
            raw,
            z,
            n_scored_tokens,
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HappinessCurve {
    pub character: String,
    pub masked: Vec<f64>,
    pub cumulative: Vec<f64>,
    pub normalized01: Vec<f64>,
}

/// Builds the masked and cumulative series for one character and fills the
/// `[0, 1]` rescale.
pub fn character_curve(scores: &[SegmentScore], roster: &CharacterRoster, character: &str) -> Result<HappinessCurve> {
    let who = roster
        .get(character)
        .ok_or_else(|| Error::UnknownCharacter(character.to_string()))?;
    let masked: Vec<f64> = scores
        .iter()
        .map(|s| {
            if who.mention_segments.contains(&s.index) {
                s.z
            } else {
                0.0
            }
        })
        .collect();
    let mut acc = 0.0;
    let cumulative = masked
        .iter()
        .map(|m| {
            acc += m;
            acc
        })
        .collect();
    Ok(normalize01(HappinessCurve {
        character: character.to_string(),
        masked,
        cumulative,
        normalized01: Vec::new(),
    }))
}

/// Min-max rescale of the cumulative series; a constant series maps to 0.5.
pub fn normalize01(mut curve: HappinessCurve) -> HappinessCurve {
    let min = curve.cumulative.iter().copied().fold(f64::INFINITY, f64::min);
    let max = curve.cumulative.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    curve.normalized01 = if max > min {
        let span = max - min;
        curve
            .cumulative
            .iter()
            .map(|c| ((c - min) / span).clamp(0.0, 1.0))
            .collect()
    } else {
        vec![0.5; curve.cumulative.len()]
    };
    curve
}

/// Curves for the leading female and leading male (whichever exist).
pub fn leading_curves(scores: &[SegmentScore], roster: &CharacterRoster) -> Result<Vec<(Gender, HappinessCurve)>> {
    [Gender::Female, Gender::Male]
        .into_iter()
        .filter_map(|g| roster.leading(g).map(|c| (g, c.name.clone())))
        .map(|(g, name)| Ok((g, character_curve(scores, roster, &name)?)))
        .collect()
}

/// CSV with one row per segment: `segment,raw,z` then masked, cumulative and
/// normalized columns per curve.
pub fn arc_csv(scores: &[SegmentScore], curves: &[HappinessCurve]) -> String {
    let mut out = String::from("segment,raw,z");
    for c in curves {
        let _ = write!(
            out,
            ",masked_{0},cumulative_{0},normalized01_{0}",
            c.character
        );
    }
    out.push('\n');
    for (i, s) in scores.iter().enumerate() {
        let _ = write!(out, "{},{},{}", s.index, s.raw, s.z);
        for c in curves {
            let _ = write!(out, ",{},{},{}", c.masked[i], c.cumulative[i], c.normalized01[i]);
        }
        out.push('\n');
    }
    out
}

pub const SKYLINE_Z_CLAMP: f64 = 3.0;
const BAR_WIDTH: f64 = 8.0;
const HALF_HEIGHT: f64 = 90.0;
const FEMALE_COLOR: &str = "#ff7f0e";
const MALE_COLOR: &str = "#1f77b4";
const HAPPY_COLOR: &str = "#2ca02c";
const UNHAPPY_COLOR: &str = "#d62728";

/// Renders the story as a skyline: one bar per segment, green above the
/// baseline for z > 0 and red below it for z < 0, opacity and height scaled
/// by |z| clamped at 3. Square markers above the bars flag mentions of the
/// leading characters, filled where both appear and hollow where one does.
pub fn skyline_svg(scores: &[SegmentScore], roster: &CharacterRoster, cooccurrence: &CooccurrenceMap) -> String {
    let width = BAR_WIDTH * scores.len().max(1) as f64 + 20.0;
    let top = 40.0;
    let baseline = top + HALF_HEIGHT;
    let height = baseline + HALF_HEIGHT + 10.0;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    let female = roster.leading_female.as_deref().unwrap_or("female");
    let male = roster.leading_male.as_deref().unwrap_or("male");
    let _ = writeln!(svg, "<title>{} / {}</title>", xml_escape(female), xml_escape(male));
    let _ = writeln!(
        svg,
        r##"<line x1="10" y1="{baseline:.1}" x2="{:.1}" y2="{baseline:.1}" stroke="#000000" stroke-width="0.5"/>"##,
        width - 10.0
    );
    for (i, s) in scores.iter().enumerate() {
        let x = 10.0 + BAR_WIDTH * i as f64;
        let magnitude = s.z.abs().min(SKYLINE_Z_CLAMP) / SKYLINE_Z_CLAMP;
        let h = HALF_HEIGHT * magnitude;
        let (y, color) = if s.z > 0.0 {
            (baseline - h, Some(HAPPY_COLOR))
        } else if s.z < 0.0 {
            (baseline, Some(UNHAPPY_COLOR))
        } else {
            (baseline, None)
        };
        let fill = color.unwrap_or("#999999");
        let _ = writeln!(
            svg,
            r#"<rect class="bar" data-segment="{}" x="{x:.1}" y="{y:.3}" width="{BAR_WIDTH:.1}" height="{h:.3}" fill="{fill}" fill-opacity="{magnitude:.3}"/>"#,
            s.index
        );
        let marker = |row: f64, color: &str, filled: bool| {
            let fill = if filled { color } else { "none" };
            format!(
                r#"<rect class="marker" x="{:.1}" y="{row:.1}" width="6.0" height="6.0" fill="{fill}" stroke="{color}" stroke-width="1"/>"#,
                x + 1.0
            )
        };
        if cooccurrence.cooccur_segments.contains(&s.index) {
            let _ = writeln!(svg, "{}", marker(10.0, FEMALE_COLOR, true));
            let _ = writeln!(svg, "{}", marker(20.0, MALE_COLOR, true));
        } else if cooccurrence.female_only.contains(&s.index) {
            let _ = writeln!(svg, "{}", marker(10.0, FEMALE_COLOR, false));
        } else if cooccurrence.male_only.contains(&s.index) {
            let _ = writeln!(svg, "{}", marker(20.0, MALE_COLOR, false));
        }
    }
    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axis::build_axis;
    use crate::cast::{Character, Mention};
    use crate::corpus::{SegmentKind, SourceKind, StoryMeta};
    use std::collections::BTreeSet;

    fn scores_from_z(z: &[f64]) -> Vec<SegmentScore> {
        z.iter()
            .enumerate()
            .map(|(index, &z)| SegmentScore {
                index,
                raw: z,
                z,
                n_scored_tokens: 1,
            })
            .collect()
    }

    fn roster_with(name: &str, segments: &[usize]) -> CharacterRoster {
        CharacterRoster {
            characters: vec![Character {
                name: name.into(),
                gender: Gender::Female,
                mention_segments: segments.iter().copied().collect(),
                mention_count: segments.len(),
                mentions: segments.iter().map(|&s| Mention { segment: s, position: 0 }).collect(),
            }],
            leading_female: Some(name.into()),
            ..Default::default()
        }
    }

    fn tiny_table() -> (EmbeddingTable, SentimentAxis) {
        let table = EmbeddingTable::from_entries(
            2,
            [
                ("good", vec![1.0, 0.0]),
                ("bad", vec![0.0, 1.0]),
                ("meh", vec![1.0, 1.0]),
            ],
            "t",
        )
        .unwrap();
        let axis = build_axis(&table, &["good"], &["bad"]).unwrap();
        (table, axis)
    }

    #[test]
    fn unscored_segment_gets_zero_raw() {
        let (table, axis) = tiny_table();
        let story = Story::from_text(StoryMeta::new("s", SourceKind::Synopsis), "It was good. Nothing here.", SegmentKind::Sentence);
        let scores = score_segments(&story, &table, &axis, UnscoredPolicy::Include).unwrap();
        assert_eq!(scores[1].raw, 0.0);
        assert_eq!(scores[1].n_scored_tokens, 0);
        assert!(scores[0].raw > 0.0);
        let excluded = score_segments(&story, &table, &axis, UnscoredPolicy::Exclude).unwrap();
        assert_eq!(excluded[1].z, 0.0);
    }

    #[test]
    fn nothing_scored_is_an_error() {
        let (table, axis) = tiny_table();
        let story = Story::from_text(StoryMeta::new("s", SourceKind::Synopsis), "Nothing. At all.", SegmentKind::Sentence);
        assert!(matches!(
            score_segments(&story, &table, &axis, UnscoredPolicy::Include),
            Err(Error::NothingScored(_))
        ));
    }

    #[test]
    fn symmetric_pair_gives_unit_z() {
        let (table, axis) = tiny_table();
        let story = Story::from_text(StoryMeta::new("s", SourceKind::Synopsis), "Good. Bad.", SegmentKind::Sentence);
        let scores = score_segments(&story, &table, &axis, UnscoredPolicy::Include).unwrap();
        assert!((scores[0].raw + scores[1].raw).abs() < 1e-15);
        assert!((scores[0].z - 1.0).abs() < 1e-12);
        assert!((scores[1].z + 1.0).abs() < 1e-12);
    }

    #[test]
    fn z_matches_mean_sd_oracle() {
        let raw = [0.12, -0.4, 0.33, 0.05, 0.0, -0.21, 0.5, 0.41, -0.09, 0.17];
        let z = z_scores(&raw, &[true; 10]);
        let n = raw.len() as f64;
        let m: f64 = raw.iter().sum::<f64>() / n;
        let sd = (raw.iter().map(|x| x * x).sum::<f64>() / n - m * m).sqrt();
        for (zi, xi) in z.iter().zip(raw) {
            assert!((zi - (xi - m) / sd).abs() < 1e-12);
        }
        assert_eq!(z_scores(&[2.0, 2.0], &[true, true]), vec![0.0, 0.0]);
    }

    #[test]
    fn step_function_curve() {
        let scores = scores_from_z(&[0.3, -0.2, 0.8, 1.0, -0.5, 0.1]);
        let roster = roster_with("Ella", &[3]);
        let curve = character_curve(&scores, &roster, "Ella").unwrap();
        assert_eq!(curve.cumulative, vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let silent = character_curve(&scores, &roster_with("Ella", &[]), "Ella").unwrap();
        assert!(silent.cumulative.iter().all(|&c| c == 0.0));
        assert!(matches!(
            character_curve(&scores, &roster, "Kit"),
            Err(Error::UnknownCharacter(_))
        ));
    }

    #[test]
    fn normalize_cases() {
        let curve = |c: Vec<f64>| {
            normalize01(HappinessCurve {
                character: "x".into(),
                masked: vec![],
                cumulative: c,
                normalized01: vec![],
            })
        };
        assert_eq!(curve(vec![0.0, 1.0, 2.0]).normalized01, vec![0.0, 0.5, 1.0]);
        assert_eq!(curve(vec![3.0; 4]).normalized01, vec![0.5; 4]);
    }

    #[test]
    fn skyline_structure() {
        let scores = scores_from_z(&[1.0, -2.0, 4.0]);
        let mut roster = roster_with("Ella", &[0, 1]);
        roster.leading_male = Some("Kit".into());
        let map = CooccurrenceMap {
            cooccur_segments: BTreeSet::from([0]),
            female_only: BTreeSet::from([1]),
            male_only: BTreeSet::new(),
        };
        let svg = skyline_svg(&scores, &roster, &map);
        assert_eq!(svg.matches(r#"class="bar""#).count(), 3);
        assert_eq!(svg.matches(r#"class="marker""#).count(), 3);
        assert!(svg.contains(UNHAPPY_COLOR));
        let happy = skyline_svg(&scores_from_z(&[1.0, 0.5, 2.0]), &roster, &map);
        assert!(!happy.contains(UNHAPPY_COLOR));
        assert_eq!(svg, skyline_svg(&scores, &roster, &map));
    }

    #[test]
    fn csv_layout() {
        let scores = scores_from_z(&[1.0, -1.0]);
        let curve = character_curve(&scores, &roster_with("Ella", &[0]), "Ella").unwrap();
        let csv = arc_csv(&scores, &[curve]);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "segment,raw,z,masked_Ella,cumulative_Ella,normalized01_Ella"
        );
        assert_eq!(lines.next().unwrap(), "0,1,1,1,1,0.5");
    }

    proptest::proptest! {
        #[test]
        fn curve_properties(
            z in proptest::collection::vec(-3.0f64..3.0, 1..80),
            mask in proptest::collection::vec(proptest::bool::ANY, 80),
            a in 0.1f64..10.0,
            b in -10.0f64..10.0,
        ) {
            let scores = scores_from_z(&z);
            let segs: Vec<usize> = (0..z.len()).filter(|&i| mask[i]).collect();
            let curve = character_curve(&scores, &roster_with("A", &segs), "A").unwrap();
            let total: f64 = curve.masked.iter().fold(0.0, |acc, m| acc + m);
            proptest::prop_assert_eq!(total, *curve.cumulative.last().unwrap());
            for i in 1..z.len() {
                if !mask[i] {
                    proptest::prop_assert_eq!(curve.cumulative[i], curve.cumulative[i - 1]);
                }
            }
            proptest::prop_assert!(curve.normalized01.iter().all(|v| (0.0..=1.0).contains(v)));
            let shifted = normalize01(HappinessCurve {
                cumulative: curve.cumulative.iter().map(|c| a * c + b).collect(),
                ..curve.clone()
            });
            for (x, y) in shifted.normalized01.iter().zip(&curve.normalized01) {
                proptest::prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }
}
