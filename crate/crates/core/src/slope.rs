//! Happiness slopes across successive male-female co-occurrences and the
//! corpus-level gender comparison built on them.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arc::SegmentScore;
use crate::cast::{CharacterRoster, CooccurrenceMap, Gender};
use crate::error::{Error, Result};
use crate::stats::{mean, sample_sd, student_t_two_sided, Stars};

pub const MIN_GAP: usize = 1;
pub const MAX_GAP: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CooccurrenceCluster {
    pub start: usize,
    pub end: usize,
}

/// Groups sorted co-occurrence indices; neighbours at most `gap` apart share
/// a cluster.
pub fn merge_clusters(indices: &BTreeSet<usize>, gap: usize) -> Result<Vec<CooccurrenceCluster>> {
    if gap < MIN_GAP {
        return Err(Error::Invalid(format!("gap must be at least {MIN_GAP}, got {gap}")));
    }
    let mut clusters: Vec<CooccurrenceCluster> = Vec::new();
    for &i in indices {
        match clusters.last_mut() {
            Some(last) if i - last.end <= gap => last.end = i,
            _ => clusters.push(CooccurrenceCluster { start: i, end: i }),
        }
    }
    Ok(clusters)
}

/// Least-squares line through the points; returns `(slope, intercept)`.
pub fn ols_simple(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
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
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("xs"));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Where a fitted span begins relative to the earlier cluster.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpanMode {
    #[default]
    StartToStart,
    EndToStart,
}

impl FromStr for SpanMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "start-to-start" => Ok(SpanMode::StartToStart),
            "end-to-start" => Ok(SpanMode::EndToStart),
            other => Err(Error::Invalid(format!("unknown span mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub span_start: usize,
    pub span_end: usize,
    pub k: f64,
    pub n: usize,
}

/// Fits one line per consecutive cluster pair over `(i, curve[i])`. Fewer
/// than two clusters gives no fits.
pub fn fit_spans(curve: &[f64], clusters: &[CooccurrenceCluster], mode: SpanMode) -> Vec<SlopeFit> {
    clusters
        .windows(2)
        .filter_map(|pair| {
            let from = match mode {
                SpanMode::StartToStart => pair[0].start,
                SpanMode::EndToStart => pair[0].end,
            };
            let to = pair[1].start.min(curve.len().checked_sub(1)?);
            if to <= from {
                return None;
            }
            let xs: Vec<f64> = (from..=to).map(|i| i as f64).collect();
            let (k, _) = ols_simple(&xs, &curve[from..=to]).ok()?;
            Some(SlopeFit {
                span_start: from,
                span_end: to,
                k,
                n: to - from + 1,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeSummary {
    pub character: String,
    pub increase: Option<f64>,
    pub decrease: Option<f64>,
    pub n_fits: usize,
}

fn weighted_mean<'a>(fits: impl Iterator<Item = &'a SlopeFit>) -> Option<f64> {
    let (num, den) = fits.fold((0.0, 0usize), |(num, den), f| (num + f.k * f.n as f64, den + f.n));
    (den > 0).then(|| num / den as f64)
}

/// Sample-size weighted means of the positive and of the negative slopes.
pub fn summarize_slopes(character: &str, fits: &[SlopeFit]) -> SlopeSummary {
    SlopeSummary {
        character: character.to_string(),
        increase: weighted_mean(fits.iter().filter(|f| f.k > 0.0)),
        decrease: weighted_mean(fits.iter().filter(|f| f.k < 0.0)),
        n_fits: fits.len(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WelchResult {
    pub t: f64,
    pub df: f64,
    pub p_value: f64,
    pub stars: Stars,
}

/// Welch's unequal-variance two-sample t test from summary statistics, with
/// Welch-Satterthwaite degrees of freedom and a two-sided p-value.
pub fn welch_t(a_mean: f64, a_sd: f64, a_n: usize, b_mean: f64, b_sd: f64, b_n: usize) -> Result<WelchResult> {
    if a_n < 2 || b_n < 2 {
        return Err(Error::TooFew {
            needed: 2,
            got: a_n.min(b_n),
        });
    }
    let (na, nb) = (a_n as f64, b_n as f64);
    let va = a_sd * a_sd / na;
    let vb = b_sd * b_sd / nb;
    let se2 = va + vb;
    let diff = a_mean - b_mean;
    if se2 == 0.0 {
        let (t, p) = if diff == 0.0 { (0.0, 1.0) } else { (diff.signum() * f64::INFINITY, 0.0) };
        return Ok(WelchResult {
            t,
            df: na + nb - 2.0,
            p_value: p,
            stars: Stars::from_p(p),
        });
    }
    let t = diff / se2.sqrt();
    let df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    let p_value = student_t_two_sided(t, df);
    Ok(WelchResult {
        t,
        df,
        p_value,
        stars: Stars::from_p(p_value),
    })
}

/// Per-story slope summaries for the leading pair, plus the metadata used
/// for grouping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StorySlopes {
    pub story_id: String,
    pub year: Option<i32>,
    pub genres: Vec<String>,
    pub female: Option<SlopeSummary>,
    pub male: Option<SlopeSummary>,
}

impl StorySlopes {
    pub fn summary(&self, gender: Gender) -> Option<&SlopeSummary> {
        match gender {
            Gender::Female => self.female.as_ref(),
            Gender::Male => self.male.as_ref(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub enum PeriodBins {
    #[default]
    Decades,
    /// Ascending edges; a year falls in `[edges[i], edges[i + 1])`.
    Edges(Vec<i32>),
}

impl PeriodBins {
    pub fn label(&self, year: i32) -> Option<String> {
        match self {
            PeriodBins::Decades => Some(format!("{}s", year.div_euclid(10) * 10)),
            PeriodBins::Edges(edges) => edges
                .windows(2)
                .find(|w| year >= w[0] && year < w[1])
                .map(|w| format!("{}-{}", w[0], w[1] - 1)),
        }
    }
}

impl FromStr for PeriodBins {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "decades" {
            return Ok(PeriodBins::Decades);
        }
        let edges = s
            .split(',')
            .map(|e| e.trim().parse::<i32>().map_err(|_| Error::Invalid(format!("bad period edge {e:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if edges.len() < 2 || edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("period edges must be at least two ascending years".into()));
        }
        Ok(PeriodBins::Edges(edges))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grouping {
    #[default]
    None,
    Period(PeriodBins),
    Genre,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Increase,
    Decrease,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenderComparison {
    pub group_label: String,
    pub measure: Measure,
    pub female_mean: Option<f64>,
    pub female_sd: Option<f64>,
    pub female_n: usize,
    pub male_mean: Option<f64>,
    pub male_sd: Option<f64>,
    pub male_n: usize,
    pub t_statistic: Option<f64>,
    pub df: Option<f64>,
    pub p_value: Option<f64>,
    pub stars: Stars,
    /// Fewer than two stories on one side; no test was run.
    pub undersized: bool,
}

fn compare_values(group_label: &str, measure: Measure, female: &[f64], male: &[f64]) -> GenderComparison {
    let stat = |xs: &[f64]| (!xs.is_empty()).then(|| (mean(xs), sample_sd(xs)));
    let f = stat(female);
    let m = stat(male);
    let test = match (f, m) {
        (Some((fm, fs)), Some((mm, ms))) => welch_t(fm, fs, female.len(), mm, ms, male.len()).ok(),
        _ => None,
    };
    GenderComparison {
        group_label: group_label.to_string(),
        measure,
        female_mean: f.map(|x| x.0),
        female_sd: f.map(|x| x.1),
        female_n: female.len(),
        male_mean: m.map(|x| x.0),
        male_sd: m.map(|x| x.1),
        male_n: male.len(),
        t_statistic: test.map(|t| t.t).filter(|t| t.is_finite()),
        df: test.map(|t| t.df),
        p_value: test.map(|t| t.p_value),
        stars: test.map_or(Stars::Ns, |t| t.stars),
        undersized: test.is_none(),
    }
}

/// Compares per-story female and male increases (and decreases) within each
/// group. Stories are visited in sorted id order.
pub fn compare_corpus(stories: &[StorySlopes], grouping: &Grouping) -> Vec<GenderComparison> {
    let mut sorted: Vec<&StorySlopes> = stories.iter().collect();
    sorted.sort_by(|a, b| a.story_id.cmp(&b.story_id));

    let mut groups: BTreeMap<String, Vec<&StorySlopes>> = BTreeMap::new();
    for story in sorted {
        let labels: Vec<String> = match grouping {
            Grouping::None => vec!["all".to_string()],
            Grouping::Period(bins) => story.year.and_then(|y| bins.label(y)).into_iter().collect(),
            Grouping::Genre => story.genres.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect(),
        };
        for label in labels {
            groups.entry(label).or_default().push(story);
        }
    }

    let mut out = Vec::new();
    for (label, members) in &groups {
        for measure in [Measure::Increase, Measure::Decrease] {
            let collect = |g: Gender| -> Vec<f64> {
                members
                    .iter()
                    .filter_map(|s| s.summary(g))
                    .filter_map(|s| match measure {
                        Measure::Increase => s.increase,
                        Measure::Decrease => s.decrease,
                    })
                    .collect()
            };
            out.push(compare_values(label, measure, &collect(Gender::Female), &collect(Gender::Male)));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacterLevels {
    pub character: String,
    pub gender: Gender,
    /// Mean z over segments shared with the other gender.
    pub cooccur_mean: Option<f64>,
    /// Mean z over segments naming only this character's side.
    pub own_only_mean: Option<f64>,
    /// Mean z over every segment naming the character.
    pub mention_mean: Option<f64>,
}

fn mean_over(scores: &[SegmentScore], segments: impl Iterator<Item = usize>) -> Option<f64> {
    let values: Vec<f64> = segments.filter_map(|i| scores.get(i).map(|s| s.z)).collect();
    (!values.is_empty()).then(|| mean(&values))
}

/// Average happiness of each leading character with and without the other
/// gender present.
pub fn happiness_levels(
    scores: &[SegmentScore],
    roster: &CharacterRoster,
    cooccurrence: &CooccurrenceMap,
) -> Vec<CharacterLevels> {
    [Gender::Female, Gender::Male]
        .into_iter()
        .filter_map(|g| roster.leading(g).map(|c| (g, c)))
        .map(|(gender, c)| {
            let shared = c.mention_segments.iter().copied().filter(|i| cooccurrence.cooccur_segments.contains(i));
            let own = c.mention_segments.iter().copied().filter(|i| cooccurrence.own_only(gender).contains(i));
            CharacterLevels {
                character: c.name.clone(),
                gender,
                cooccur_mean: mean_over(scores, shared),
                own_only_mean: mean_over(scores, own),
                mention_mean: mean_over(scores, c.mention_segments.iter().copied()),
            }
        })
        .collect()
}
