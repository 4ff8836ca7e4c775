//! Loading, per-story analysis with caching, and the output sections.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use anyhow::{Context as _, Result};
use narrative_arcs::arc::{arc_csv, skyline_svg};
use narrative_arcs::axis::{
    build_axis, load_lexicon, validate_axis, LexiconEntry, SentimentAxis, ValidationReport, DEFAULT_NEGATIVE,
    DEFAULT_POSITIVE,
};
use narrative_arcs::cast::{CharacterRoster, Gender, NameLexicon};
use narrative_arcs::corpus::{filter_corpus, ingest, IngestOptions, IngestReport, Story};
use narrative_arcs::embedstore::{self, EmbeddingTable, LoadOptions};
use narrative_arcs::endorse::{build_rows, regress, Outcome, RegressionReport, VotesScale};
use narrative_arcs::lexnet::{
    category_slice, detect_communities, verb_rate, Category, CommunitySummary, CoNetwork, PosTagger, VerbRate,
    WindowMode,
};
use narrative_arcs::par::{self, Execution};
use narrative_arcs::pipeline::{self, Context, ScoreSettings, ScoredStory, Skipped, SlopeRecord, SlopeSettings, StoryAnalysis};
use narrative_arcs::slope::{compare_corpus, CharacterLevels, GenderComparison, Grouping, StorySlopes};
use narrative_arcs::stats::mean;
use serde::Serialize;

use crate::cache::{self, Cache, ScoreInputs};
use crate::config::RunConfig;

/// A failure caused by the input data rather than the invocation. Maps to
/// exit status 2.
#[derive(Debug)]
pub struct DataError(pub String);

impl std::fmt::Display for DataError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for DataError {}

fn data<T>(r: narrative_arcs::Result<T>, what: &str) -> Result<T> {
    r.map_err(|e| DataError(format!("{what}: {e}")).into())
}

pub fn load_names(cfg: &RunConfig) -> Result<NameLexicon> {
    let lexicon = match (&cfg.male_names, &cfg.female_names) {
        (Some(m), Some(f)) => data(NameLexicon::load(m, f, cfg.name_weights.as_deref()), "name lists")?,
        _ => NameLexicon::bundled(),
    };
    Ok(lexicon.with_policy(cfg.ambiguous))
}

pub fn load_tagger(cfg: &RunConfig, names: &NameLexicon) -> Result<PosTagger> {
    match &cfg.pos_lexicon {
        Some(p) => Ok(data(PosTagger::load(p), "POS lexicon")?.with_names(names)),
        None => Ok(PosTagger::bundled()),
    }
}

pub fn load_stopwords(cfg: &RunConfig) -> Result<Option<HashSet<String>>> {
    let Some(path) = &cfg.stopwords else { return Ok(None) };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Some(
        text.split_whitespace()
            .filter(|w| !w.starts_with('#'))
            .map(str::to_lowercase)
            .collect(),
    ))
}

fn seed_words() -> impl Iterator<Item = String> {
    DEFAULT_POSITIVE.iter().chain(&DEFAULT_NEGATIVE).map(|w| w.to_string())
}

pub fn load_embeddings(cfg: &RunConfig, allow: HashSet<String>) -> Result<EmbeddingTable> {
    let path = cfg.require("embeddings", &cfg.embeddings)?;
    log::info!("loading embeddings from {}", path.display());
    data(
        embedstore::load(path, cfg.embeddings_format, &LoadOptions { allow: Some(allow) }),
        "embeddings",
    )
}

pub fn axis_for(table: &EmbeddingTable) -> Result<SentimentAxis> {
    data(build_axis(table, &DEFAULT_POSITIVE, &DEFAULT_NEGATIVE), "sentiment axis")
}

#[derive(Clone, Debug, Serialize)]
pub struct AxisSection {
    pub found_positive: usize,
    pub found_negative: usize,
    pub missing_seeds: Vec<String>,
    pub validation: Option<ValidationReport>,
}

pub fn axis_section(table: &EmbeddingTable, axis: &SentimentAxis, lexicon: Option<&[LexiconEntry]>) -> Result<AxisSection> {
    let validation = match lexicon {
        Some(l) => Some(data(validate_axis(table, axis, l), "axis validation")?),
        None => None,
    };
    Ok(AxisSection {
        found_positive: axis.found_positive,
        found_negative: axis.found_negative,
        missing_seeds: axis.missing.clone(),
        validation,
    })
}

pub fn read_sentiment_lexicon(cfg: &RunConfig) -> Result<Option<Vec<LexiconEntry>>> {
    match &cfg.sentiment_lexicon {
        Some(p) => Ok(Some(data(load_lexicon(p), "sentiment lexicon")?)),
        None => Ok(None),
    }
}

/// `validate-axis`: only the lexicon words and seeds are loaded.
pub fn run_validate_axis(cfg: &RunConfig) -> Result<AxisSection> {
    let path = cfg.require("sentiment-lexicon", &cfg.sentiment_lexicon)?;
    let lexicon = data(load_lexicon(path), "sentiment lexicon")?;
    let allow = lexicon.iter().map(|e| e.word.clone()).chain(seed_words()).collect();
    let table = load_embeddings(cfg, allow)?;
    let axis = axis_for(&table)?;
    axis_section(&table, &axis, Some(&lexicon))
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusSection {
    pub n_rows: usize,
    pub n_ingested: usize,
    pub n_filtered_out: usize,
    pub n_analyzed: usize,
    pub rejected_rows: Vec<narrative_arcs::corpus::RejectedRow>,
    pub warnings: Vec<String>,
    pub skipped: Vec<Skipped>,
}

/// Everything downstream commands need.
pub struct Workspace {
    pub stories: Vec<Story>,
    pub ingest: IngestReport,
    pub n_filtered_out: usize,
    pub names: NameLexicon,
    pub table: EmbeddingTable,
    pub axis: SentimentAxis,
    pub lexicon: Option<Vec<LexiconEntry>>,
    pub exec: Execution,
}

impl Workspace {
    pub fn load(cfg: &RunConfig, exec: Execution) -> Result<Workspace> {
        let metadata = cfg.require("metadata", &cfg.metadata)?.to_path_buf();
        let corpus_dir = cfg.corpus_dir()?;
        let options = IngestOptions {
            kind: cfg.kind,
            segmentation: cfg.segmentation,
            trim_gutenberg: cfg.trim_gutenberg,
            execution: exec,
        };
        let (stories, ingest) = data(ingest(&corpus_dir, &metadata, &options), "corpus")?;
        for w in &ingest.warnings {
            log::warn!("{w}");
        }
        let names = load_names(cfg)?;
        let n_ingested = stories.len();
        let stories = filter_corpus(stories, |s| CharacterRoster::build(s, &names));
        let n_filtered_out = n_ingested - stories.len();
        if stories.is_empty() {
            return Err(DataError("no story passed the corpus filter (needs > 5 segments and both genders)".into()).into());
        }
        let lexicon = read_sentiment_lexicon(cfg)?;
        let mut allow: HashSet<String> = seed_words().collect();
        for s in &stories {
            for seg in &s.segments {
                allow.extend(seg.tokens.iter().cloned());
            }
        }
        if let Some(l) = &lexicon {
            allow.extend(l.iter().map(|e| e.word.clone()));
        }
        let table = load_embeddings(cfg, allow)?;
        let axis = axis_for(&table)?;
        Ok(Workspace {
            stories,
            ingest,
            n_filtered_out,
            names,
            table,
            axis,
            lexicon,
            exec,
        })
    }

    fn context(&self) -> Context<'_> {
        Context {
            table: &self.table,
            axis: &self.axis,
            names: &self.names,
        }
    }
}

/// Analysed stories in corpus order.
pub struct Analyses {
    pub items: Vec<(usize, StoryAnalysis)>,
    pub skipped: Vec<Skipped>,
}

impl Analyses {
    pub fn slopes(&self) -> Vec<StorySlopes> {
        self.items.iter().map(|(_, a)| a.slope.slopes.clone()).collect()
    }
}

pub fn score_settings(cfg: &RunConfig) -> ScoreSettings {
    ScoreSettings {
        unscored: cfg.unscored,
        cooccur_mode: cfg.cooccur,
    }
}

pub fn slope_settings(cfg: &RunConfig, gap: usize) -> SlopeSettings {
    SlopeSettings {
        gap,
        span_mode: cfg.span_mode,
    }
}

pub fn analyze(cfg: &RunConfig, ws: &Workspace, gap: usize) -> Analyses {
    let score = score_settings(cfg);
    let slope = slope_settings(cfg, gap);
    let ctx = ws.context();
    let embeddings_id = cache::file_identity(cfg.embeddings.as_deref());
    let names_id = format!(
        "{}|{}|{}",
        cache::file_identity(cfg.male_names.as_deref()),
        cache::file_identity(cfg.female_names.as_deref()),
        cache::file_identity(cfg.name_weights.as_deref())
    );
    let ambiguous = format!("{:?}", cfg.ambiguous);
    let inputs = ScoreInputs {
        settings: &score,
        embeddings: &embeddings_id,
        names: &names_id,
        ambiguous: &ambiguous,
    };
    let store = cfg.cache.then(|| Cache::new(&cfg.output));
    let indexed: Vec<(usize, &Story)> = ws.stories.iter().enumerate().collect();
    let results = par::map(ws.exec, &indexed, |&(i, story)| {
        let compute_score = || pipeline::score_story(story, ctx, &score);
        let compute_slope = |s: &ScoredStory| pipeline::slope_story(story, s, &slope);
        let result: narrative_arcs::Result<(ScoredStory, SlopeRecord, bool)> = match &store {
            Some(c) => {
                let sk = cache::score_key(story, &inputs);
                let lk = cache::slope_key(&sk, &slope);
                c.get_or_compute(story.id(), &sk, &lk, compute_score, compute_slope)
            }
            None => compute_score().and_then(|s| compute_slope(&s).map(|r| (s, r, false))),
        };
        match &result {
            Ok((s, _, hit)) => log::info!(
                "{}: {} segments, {} co-occurrences{}",
                story.id(),
                s.scores.len(),
                s.cooccurrence.cooccur_segments.len(),
                if *hit { " (cached)" } else { "" }
            ),
            Err(e) => log::warn!("skipping story {}: {e}", story.id()),
        }
        (i, result)
    });
    let mut out = Analyses {
        items: Vec::new(),
        skipped: Vec::new(),
    };
    for (i, r) in results {
        match r {
            Ok((scored, slope, _)) => out.items.push((i, StoryAnalysis { scored, slope })),
            Err(e) => out.skipped.push(Skipped {
                story_id: ws.stories[i].id().to_string(),
                reason: e.to_string(),
            }),
        }
    }
    out
}

pub fn corpus_section(ws: &Workspace, analyses: &Analyses) -> CorpusSection {
    CorpusSection {
        n_rows: ws.ingest.n_rows,
        n_ingested: ws.ingest.n_stories,
        n_filtered_out: ws.n_filtered_out,
        n_analyzed: analyses.items.len(),
        rejected_rows: ws.ingest.rejected_rows.clone(),
        warnings: ws.ingest.warnings.clone(),
        skipped: analyses.skipped.clone(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ArcSummary {
    pub story_id: String,
    pub title: String,
    pub n_segments: usize,
    pub n_scored_segments: usize,
    pub leading_female: Option<String>,
    pub leading_male: Option<String>,
    pub dominance: Option<Gender>,
    pub n_cooccur: usize,
    pub n_clusters: usize,
    pub female_final: Option<f64>,
    pub male_final: Option<f64>,
}

pub fn arc_section(ws: &Workspace, analyses: &Analyses) -> Vec<ArcSummary> {
    analyses
        .items
        .iter()
        .map(|(i, a)| {
            let story = &ws.stories[*i];
            let last = |g: Gender| a.scored.curve(g).and_then(|c| c.cumulative.last().copied());
            ArcSummary {
                story_id: story.id().to_string(),
                title: story.meta.title.clone(),
                n_segments: a.scored.scores.len(),
                n_scored_segments: a.scored.scores.iter().filter(|s| s.n_scored_tokens > 0).count(),
                leading_female: a.scored.roster.leading_female.clone(),
                leading_male: a.scored.roster.leading_male.clone(),
                dominance: a.scored.roster.dominance,
                n_cooccur: a.scored.cooccurrence.cooccur_segments.len(),
                n_clusters: a.slope.clusters.len(),
                female_final: last(Gender::Female),
                male_final: last(Gender::Male),
            }
        })
        .collect()
}

/// Writes `<id>.csv` and `<id>.svg` under `dir` for each analysed story
/// (or only `only`). Returns the written paths.
pub fn write_arcs(ws: &Workspace, analyses: &Analyses, dir: &Path, only: Option<&str>) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    for (i, a) in &analyses.items {
        let story = &ws.stories[*i];
        if only.is_some_and(|id| id != story.id()) {
            continue;
        }
        let curves: Vec<_> = a.scored.curves.iter().map(|(_, c)| c.clone()).collect();
        let stem: String = story
            .id()
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
            .collect();
        let csv = dir.join(format!("{stem}.csv"));
        let svg = dir.join(format!("{stem}.svg"));
        std::fs::write(&csv, arc_csv(&a.scored.scores, &curves)).with_context(|| format!("writing {}", csv.display()))?;
        std::fs::write(&svg, skyline_svg(&a.scored.scores, &a.scored.roster, &a.scored.cooccurrence))
            .with_context(|| format!("writing {}", svg.display()))?;
        written.push(csv.display().to_string());
        written.push(svg.display().to_string());
    }
    if let Some(id) = only {
        if written.is_empty() {
            return Err(DataError(format!("story {id:?} was not analysed")).into());
        }
    }
    Ok(written)
}

#[derive(Clone, Debug, Serialize)]
pub struct GapResult {
    pub gap: usize,
    pub comparisons: Vec<GenderComparison>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SlopesSection {
    pub gap: usize,
    pub span_mode: narrative_arcs::slope::SpanMode,
    pub grouping: String,
    pub comparisons: Vec<GenderComparison>,
    pub stories: Vec<StorySlopes>,
    pub gap_sweep: Option<Vec<GapResult>>,
}

pub fn grouping_label(g: &Grouping) -> String {
    match g {
        Grouping::None => "none".into(),
        Grouping::Genre => "genre".into(),
        Grouping::Period(b) => format!("period:{b:?}").to_lowercase(),
    }
}

pub fn slopes_section(
    cfg: &RunConfig,
    ws: &Workspace,
    analyses: &Analyses,
    grouping: &Grouping,
    sweep: bool,
) -> SlopesSection {
    let gap_sweep = sweep.then(|| {
        (narrative_arcs::slope::MIN_GAP..=narrative_arcs::slope::MAX_GAP)
            .map(|gap| {
                let stories = if gap == cfg.gap { analyses.slopes() } else { analyze(cfg, ws, gap).slopes() };
                GapResult {
                    gap,
                    comparisons: compare_corpus(&stories, grouping),
                }
            })
            .collect()
    });
    let stories = analyses.slopes();
    SlopesSection {
        gap: cfg.gap,
        span_mode: cfg.span_mode,
        grouping: grouping_label(grouping),
        comparisons: compare_corpus(&stories, grouping),
        stories,
        gap_sweep,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StoryLevels {
    pub story_id: String,
    pub levels: Vec<CharacterLevels>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelSummary {
    pub gender: Gender,
    pub n_stories: usize,
    pub cooccur_mean: Option<f64>,
    pub own_only_mean: Option<f64>,
    pub mention_mean: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelsSection {
    pub summary: Vec<LevelSummary>,
    pub stories: Vec<StoryLevels>,
}

pub fn levels_section(analyses: &Analyses) -> LevelsSection {
    let stories: Vec<StoryLevels> = analyses
        .items
        .iter()
        .map(|(_, a)| StoryLevels {
            story_id: a.scored.story_id.clone(),
            levels: a.scored.levels(),
        })
        .collect();
    let summary = [Gender::Female, Gender::Male]
        .into_iter()
        .map(|g| {
            let of: Vec<&CharacterLevels> =
                stories.iter().flat_map(|s| s.levels.iter()).filter(|l| l.gender == g).collect();
            let avg = |f: fn(&CharacterLevels) -> Option<f64>| {
                let xs: Vec<f64> = of.iter().filter_map(|l| f(l)).collect();
                (!xs.is_empty()).then(|| mean(&xs))
            };
            LevelSummary {
                gender: g,
                n_stories: of.len(),
                cooccur_mean: avg(|l| l.cooccur_mean),
                own_only_mean: avg(|l| l.own_only_mean),
                mention_mean: avg(|l| l.mention_mean),
            }
        })
        .collect();
    LevelsSection { summary, stories }
}

#[derive(Clone, Debug, Serialize)]
pub struct CategoryCounts {
    pub category: Category,
    pub n_nodes: usize,
    pub n_edges_distinct: usize,
    pub n_edges_weighted: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NetworkSummary {
    pub gender: Gender,
    pub mode: WindowMode,
    pub n_samples: usize,
    pub n_nodes: usize,
    pub n_edges_distinct: usize,
    pub n_edges_weighted: u64,
    pub modularity: Option<f64>,
    pub n_communities: usize,
    pub top_communities: Vec<CommunitySummary>,
    pub categories: Vec<CategoryCounts>,
}

pub struct BuiltNetwork {
    pub summary: NetworkSummary,
    pub network: CoNetwork,
    pub samples: Vec<narrative_arcs::lexnet::WindowSample>,
}

pub fn build_gender_network(
    ws: &Workspace,
    analyses: &Analyses,
    tagger: &PosTagger,
    stopwords: Option<&HashSet<String>>,
    gender: Gender,
    mode: WindowMode,
) -> BuiltNetwork {
    let pairs: Vec<(&Story, &CharacterRoster)> =
        analyses.items.iter().map(|(i, a)| (&ws.stories[*i], &a.scored.roster)).collect();
    let (network, samples) = pipeline::gender_network(&pairs, gender, mode, stopwords, ws.exec);
    let partition = detect_communities(&network).ok();
    let categories = Category::ALL
        .iter()
        .map(|&c| {
            let s = category_slice(&network, tagger, c);
            CategoryCounts {
                category: c,
                n_nodes: s.n_nodes(),
                n_edges_distinct: s.n_edges_distinct(),
                n_edges_weighted: s.n_edges_weighted(),
            }
        })
        .collect();
    let summary = NetworkSummary {
        gender,
        mode,
        n_samples: samples.len(),
        n_nodes: network.n_nodes(),
        n_edges_distinct: network.n_edges_distinct(),
        n_edges_weighted: network.n_edges_weighted(),
        modularity: partition.as_ref().map(|p| p.q),
        n_communities: partition.as_ref().map_or(0, |p| p.community_sizes.len()),
        top_communities: partition.as_ref().map(|p| p.top(&network, 4, 10)).unwrap_or_default(),
        categories,
    };
    BuiltNetwork {
        summary,
        network,
        samples,
    }
}

pub fn verbs_section(built: &[&BuiltNetwork], tagger: &PosTagger) -> Vec<VerbRate> {
    built
        .iter()
        .filter_map(|b| verb_rate(tagger, b.summary.gender, &b.samples).ok())
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct RegressionOutcome {
    pub outcome: Outcome,
    pub report: Option<RegressionReport>,
    /// Why no report could be produced.
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EndorseSection {
    pub n_rows: usize,
    pub excluded: BTreeMap<String, usize>,
    pub votes_scale: VotesScale,
    pub regressions: Vec<RegressionOutcome>,
}

pub fn endorse_section(ws: &Workspace, analyses: &Analyses, outcomes: &[Outcome], votes: VotesScale) -> EndorseSection {
    let predictors: Vec<_> = analyses.items.iter().map(|(i, a)| a.predictors(&ws.stories[*i])).collect();
    let set = build_rows(&predictors);
    let regressions = outcomes
        .iter()
        .map(|&outcome| match regress(&set.rows, outcome, votes) {
            Ok(r) => RegressionOutcome {
                outcome,
                report: Some(r),
                error: None,
            },
            Err(e) => RegressionOutcome {
                outcome,
                report: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    EndorseSection {
        n_rows: set.rows.len(),
        excluded: set.excluded,
        votes_scale: votes,
        regressions,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub corpus: CorpusSection,
    pub axis_validation: AxisSection,
    pub arcs: Vec<ArcSummary>,
    pub slopes: SlopesSection,
    pub levels: LevelsSection,
    pub networks: Vec<NetworkSummary>,
    pub verbs: Vec<VerbRate>,
    pub endorsement: EndorseSection,
}
