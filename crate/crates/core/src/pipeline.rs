//! Per-story analysis in two stages, so that slope settings can change
//! without rescoring: [`score_story`] (segment scores, roster, co-occurrence,
//! curves) and [`slope_story`] (clusters and fits for one gap).

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::arc::{leading_curves, score_segments, HappinessCurve, SegmentScore, UnscoredPolicy};
use crate::axis::SentimentAxis;
use crate::cast::{mark_cooccurrence, CharacterRoster, CooccurMode, CooccurrenceMap, Gender, NameLexicon};
use crate::corpus::Story;
use crate::embedstore::EmbeddingTable;
use crate::endorse::StoryPredictors;
use crate::error::Result;
use crate::lexnet::{build_network, extract_windows, remove_stopwords, CoNetwork, WindowMode, WindowSample};
use crate::par::{self, Execution};
use crate::slope::{
    fit_spans, happiness_levels, merge_clusters, summarize_slopes, CharacterLevels, CooccurrenceCluster, SlopeFit,
    SpanMode, StorySlopes,
};

/// Shared read-only inputs.
#[derive(Clone, Copy)]
pub struct Context<'a> {
    pub table: &'a EmbeddingTable,
    pub axis: &'a SentimentAxis,
    pub names: &'a NameLexicon,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScoreSettings {
    pub unscored: UnscoredPolicy,
    pub cooccur_mode: CooccurMode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SlopeSettings {
    pub gap: usize,
    pub span_mode: SpanMode,
}

impl Default for SlopeSettings {
    fn default() -> Self {
        SlopeSettings {
            gap: 1,
            span_mode: SpanMode::StartToStart,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredStory {
    pub story_id: String,
    pub scores: Vec<SegmentScore>,
    pub roster: CharacterRoster,
    pub cooccurrence: CooccurrenceMap,
    pub curves: Vec<(Gender, HappinessCurve)>,
}

impl ScoredStory {
    pub fn curve(&self, gender: Gender) -> Option<&HappinessCurve> {
        self.curves.iter().find(|(g, _)| *g == gender).map(|(_, c)| c)
    }

    pub fn levels(&self) -> Vec<CharacterLevels> {
        happiness_levels(&self.scores, &self.roster, &self.cooccurrence)
    }
}

pub fn score_story(story: &Story, ctx: Context<'_>, settings: &ScoreSettings) -> Result<ScoredStory> {
    let scores = score_segments(story, ctx.table, ctx.axis, settings.unscored)?;
    let roster = CharacterRoster::build(story, ctx.names);
    let cooccurrence = mark_cooccurrence(story, &roster, settings.cooccur_mode)?;
    let curves = leading_curves(&scores, &roster)?;
    Ok(ScoredStory {
        story_id: story.id().to_string(),
        scores,
        roster,
        cooccurrence,
        curves,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeRecord {
    pub settings: SlopeSettings,
    pub clusters: Vec<CooccurrenceCluster>,
    pub female_fits: Vec<SlopeFit>,
    pub male_fits: Vec<SlopeFit>,
    pub slopes: StorySlopes,
}

/// Fits slopes on each leading character's normalized curve between
/// successive co-occurrence clusters.
pub fn slope_story(story: &Story, scored: &ScoredStory, settings: &SlopeSettings) -> Result<SlopeRecord> {
    let clusters = merge_clusters(&scored.cooccurrence.cooccur_segments, settings.gap)?;
    let fits = |g: Gender| {
        scored
            .curve(g)
            .map(|c| fit_spans(&c.normalized01, &clusters, settings.span_mode))
            .unwrap_or_default()
    };
    let female_fits = fits(Gender::Female);
    let male_fits = fits(Gender::Male);
    let summary = |g: Gender, f: &[SlopeFit]| scored.curve(g).map(|c| summarize_slopes(&c.character, f));
    let slopes = StorySlopes {
        story_id: story.id().to_string(),
        year: story.meta.year,
        genres: story.meta.genres.clone(),
        female: summary(Gender::Female, &female_fits),
        male: summary(Gender::Male, &male_fits),
    };
    Ok(SlopeRecord {
        settings: *settings,
        clusters,
        female_fits,
        male_fits,
        slopes,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoryAnalysis {
    pub scored: ScoredStory,
    pub slope: SlopeRecord,
}

impl StoryAnalysis {
    pub fn predictors(&self, story: &Story) -> StoryPredictors {
        let inc = |s: &Option<crate::slope::SlopeSummary>| s.as_ref().and_then(|s| s.increase);
        StoryPredictors {
            story_id: story.id().to_string(),
            rating: story.meta.rating,
            votes: story.meta.votes,
            dominance: self.scored.roster.dominance,
            has_leading_pair: self.scored.roster.leading_pair().is_some(),
            n_cooccur: self.scored.cooccurrence.cooccur_segments.len(),
            female_increase: inc(&self.slope.slopes.female),
            male_increase: inc(&self.slope.slopes.male),
        }
    }
}

pub fn analyze_story(
    story: &Story,
    ctx: Context<'_>,
    score: &ScoreSettings,
    slope: &SlopeSettings,
) -> Result<StoryAnalysis> {
    let scored = score_story(story, ctx, score)?;
    let slope = slope_story(story, &scored, slope)?;
    Ok(StoryAnalysis { scored, slope })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Skipped {
    pub story_id: String,
    pub reason: String,
}

/// Analyses for the stories that could be analysed, in input order, plus
/// the ones that could not.
pub struct CorpusAnalysis {
    pub analyses: Vec<(usize, StoryAnalysis)>,
    pub skipped: Vec<Skipped>,
}

pub fn analyze_corpus(
    stories: &[Story],
    ctx: Context<'_>,
    score: &ScoreSettings,
    slope: &SlopeSettings,
    exec: Execution,
) -> CorpusAnalysis {
    let indexed: Vec<(usize, &Story)> = stories.iter().enumerate().collect();
    let results = par::map(exec, &indexed, |&(i, story)| (i, analyze_story(story, ctx, score, slope)));
    let mut out = CorpusAnalysis {
        analyses: Vec::new(),
        skipped: Vec::new(),
    };
    for (i, r) in results {
        match r {
            Ok(a) => out.analyses.push((i, a)),
            Err(e) => {
                log::warn!("skipping story {}: {e}", stories[i].id());
                out.skipped.push(Skipped {
                    story_id: stories[i].id().to_string(),
                    reason: e.to_string(),
                });
            }
        }
    }
    out
}

/// Window samples around one gender's leading character.
pub fn leading_windows(story: &Story, roster: &CharacterRoster, gender: Gender, mode: WindowMode) -> Vec<WindowSample> {
    roster
        .leading(gender)
        .and_then(|c| extract_windows(story, roster, &c.name, mode).ok())
        .unwrap_or_default()
}

/// Pools the windows of every story's leading character of `gender` into
/// one network. Partial networks are merged, so the result does not depend
/// on the execution mode.
pub fn gender_network(
    stories: &[(&Story, &CharacterRoster)],
    gender: Gender,
    mode: WindowMode,
    stopwords: Option<&HashSet<String>>,
    exec: Execution,
) -> (CoNetwork, Vec<WindowSample>) {
    let samples: Vec<Vec<WindowSample>> = par::map(exec, stories, |&(story, roster)| {
        let mut s = leading_windows(story, roster, gender, mode);
        if let Some(stop) = stopwords {
            remove_stopwords(&mut s, stop);
        }
        s
    });
    let network = par::map_reduce(exec, &samples, CoNetwork::default, |s| build_network(s), CoNetwork::merge);
    (network, samples.into_iter().flatten().collect())
}
