mod app;
mod cache;
mod config;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context as _, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use narrative_arcs::cast::Gender;
use narrative_arcs::endorse::{Outcome, VotesScale};
use narrative_arcs::lexnet::{WindowMode, LABEL_THRESHOLD_COOCCUR, LABEL_THRESHOLD_SINGLE};
use narrative_arcs::par::Execution;
use narrative_arcs::slope::{Grouping, PeriodBins};
use serde::Serialize;

use app::{Analyses, DataError, Workspace};
use config::{usage, RunConfig, UsageError};

#[derive(Parser, Debug)]
#[command(name = "narrative-arcs", version, about = "Happiness arcs of leading characters in stories")]
struct Cli {
    /// `key = value` configuration file; flags override its entries.
    #[arg(long, global = true, env = "NARRATIVE_ARCS_CONFIG")]
    config: Option<PathBuf>,

    #[command(flatten)]
    opts: Overrides,

    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

/// Every config key as a flag.
#[derive(Args, Debug, Default)]
struct Overrides {
    #[arg(long, global = true)]
    embeddings: Option<String>,
    #[arg(long, global = true, value_name = "binary|text|auto")]
    embeddings_format: Option<String>,
    /// Directory story paths are relative to (default: the metadata file's directory).
    #[arg(long, global = true)]
    corpus: Option<String>,
    #[arg(long, global = true)]
    metadata: Option<String>,
    #[arg(long, global = true)]
    sentiment_lexicon: Option<String>,
    #[arg(long, global = true)]
    male_names: Option<String>,
    #[arg(long, global = true)]
    female_names: Option<String>,
    #[arg(long, global = true)]
    name_weights: Option<String>,
    #[arg(long, global = true, value_name = "exclude|majority")]
    ambiguous: Option<String>,
    #[arg(long, global = true)]
    pos_lexicon: Option<String>,
    #[arg(long, global = true)]
    stopwords: Option<String>,
    /// Co-occurrence cluster merge gap, 1 to 10.
    #[arg(long, global = true)]
    gap: Option<String>,
    #[arg(long, global = true, value_name = "start-to-start|end-to-start")]
    span_mode: Option<String>,
    #[arg(long, global = true, value_name = "leading|any")]
    cooccur: Option<String>,
    #[arg(long, global = true, value_name = "include|exclude")]
    unscored: Option<String>,
    #[arg(long, global = true)]
    kind: Option<String>,
    #[arg(long, global = true, value_name = "sentence|paragraph")]
    segmentation: Option<String>,
    #[arg(long, global = true)]
    trim_gutenberg: Option<String>,
    #[arg(long, global = true)]
    output: Option<String>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, global = true)]
    jobs: Option<String>,
    #[arg(long, global = true)]
    cache: Option<String>,
    /// Same as `--cache false`.
    #[arg(long, global = true)]
    no_cache: bool,
}

impl Overrides {
    fn pairs(&self) -> BTreeMap<String, String> {
        let all = [
            ("embeddings", &self.embeddings),
            ("embeddings-format", &self.embeddings_format),
            ("corpus", &self.corpus),
            ("metadata", &self.metadata),
            ("sentiment-lexicon", &self.sentiment_lexicon),
            ("male-names", &self.male_names),
            ("female-names", &self.female_names),
            ("name-weights", &self.name_weights),
            ("ambiguous", &self.ambiguous),
            ("pos-lexicon", &self.pos_lexicon),
            ("stopwords", &self.stopwords),
            ("gap", &self.gap),
            ("span-mode", &self.span_mode),
            ("cooccur", &self.cooccur),
            ("unscored", &self.unscored),
            ("kind", &self.kind),
            ("segmentation", &self.segmentation),
            ("trim-gutenberg", &self.trim_gutenberg),
            ("output", &self.output),
            ("jobs", &self.jobs),
            ("cache", &self.cache),
        ];
        debug_assert_eq!(all.len(), config::KEYS.len());
        let mut out: BTreeMap<String, String> = all
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect();
        if self.no_cache {
            out.insert("cache".into(), "false".into());
        }
        out
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum GroupBy {
    None,
    Period,
    Genre,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum GenderArg {
    Female,
    Male,
}

impl From<GenderArg> for Gender {
    fn from(g: GenderArg) -> Gender {
        match g {
            GenderArg::Female => Gender::Female,
            GenderArg::Male => Gender::Male,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ModeArg {
    Single,
    Cooccur,
}

impl From<ModeArg> for WindowMode {
    fn from(m: ModeArg) -> WindowMode {
        match m {
            ModeArg::Single => WindowMode::Single,
            ModeArg::Cooccur => WindowMode::Cooccur,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum OutcomeArg {
    Rating,
    Votes,
    Both,
}

#[derive(Copy, Clone, Debug, Default, ValueEnum)]
enum OutputFormat {
    #[default]
    Json,
    Table,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ingest and filter the corpus and print counts.
    Ingest,
    /// Correlate axis happiness with a human-rated lexicon.
    ValidateAxis,
    /// Write per-story arc CSV and skyline SVG files.
    Arc {
        /// Only this story.
        #[arg(long)]
        story: Option<String>,
    },
    /// Compare female and male slopes around co-occurrences.
    Slopes {
        #[arg(long, value_enum, default_value = "none")]
        group: GroupBy,
        /// `decades` or comma-separated ascending edge years.
        #[arg(long, default_value = "decades")]
        period_bins: String,
        /// Repeat the comparison for every gap from 1 to 10.
        #[arg(long)]
        gap_sweep: bool,
    },
    /// Happiness levels with and without the other gender present.
    Levels,
    /// Build a co-occurrence network and export it.
    Network {
        #[arg(long, value_enum)]
        gender: GenderArg,
        #[arg(long, value_enum, default_value = "single")]
        mode: ModeArg,
        /// Edges at or above this multiplicity carry a label in GraphML.
        #[arg(long)]
        label_threshold: Option<u64>,
    },
    /// Share of verb tokens around each gender's leading characters.
    Verbs,
    /// Regress ratings or votes on character predictors.
    Endorse {
        #[arg(long, value_enum, default_value = "both")]
        outcome: OutcomeArg,
        /// Use raw vote counts instead of their logarithm.
        #[arg(long)]
        votes_raw: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
    },
    /// Run every analysis and write one JSON report.
    Report,
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let (from_file, base) = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
            (config::parse_config_file(&text)?, path.parent().map(Path::to_path_buf))
        }
        None => (BTreeMap::new(), None),
    };
    let mut values = from_file.clone();
    values.extend(cli.opts.pairs());
    Ok(RunConfig::from_map(&values, &from_file, base.as_deref())?)
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn outcomes(o: OutcomeArg) -> Vec<Outcome> {
    match o {
        OutcomeArg::Rating => vec![Outcome::Rating],
        OutcomeArg::Votes => vec![Outcome::Votes],
        OutcomeArg::Both => vec![Outcome::Rating, Outcome::Votes],
    }
}

fn grouping(group: GroupBy, bins: &str) -> Result<Grouping> {
    Ok(match group {
        GroupBy::None => Grouping::None,
        GroupBy::Genre => Grouping::Genre,
        GroupBy::Period => Grouping::Period(
            bins.parse::<PeriodBins>()
                .map_err(|e| usage(format!("invalid value for --period-bins: {e}")))?,
        ),
    })
}

fn loaded(cfg: &RunConfig, exec: Execution) -> Result<(Workspace, Analyses)> {
    let ws = Workspace::load(cfg, exec)?;
    let analyses = app::analyze(cfg, &ws, cfg.gap);
    Ok((ws, analyses))
}

fn run(cli: &Cli, cfg: &RunConfig, exec: Execution) -> Result<()> {
    match &cli.command {
        Command::Ingest => {
            let ws = Workspace::load(cfg, exec)?;
            #[derive(Serialize)]
            struct Counts<'a> {
                n_rows: usize,
                n_ingested: usize,
                n_filtered_out: usize,
                n_kept: usize,
                rejected_rows: &'a [narrative_arcs::corpus::RejectedRow],
                embedding_vocabulary: usize,
            }
            print_json(&Counts {
                n_rows: ws.ingest.n_rows,
                n_ingested: ws.ingest.n_stories,
                n_filtered_out: ws.n_filtered_out,
                n_kept: ws.stories.len(),
                rejected_rows: &ws.ingest.rejected_rows,
                embedding_vocabulary: ws.table.len(),
            })
        }
        Command::ValidateAxis => print_json(&app::run_validate_axis(cfg)?),
        Command::Arc { story } => {
            let (ws, analyses) = loaded(cfg, exec)?;
            let written = app::write_arcs(&ws, &analyses, &cfg.output.join("arcs"), story.as_deref())?;
            for w in written {
                println!("{w}");
            }
            Ok(())
        }
        Command::Slopes {
            group,
            period_bins,
            gap_sweep,
        } => {
            let grouping = grouping(*group, period_bins)?;
            let (ws, analyses) = loaded(cfg, exec)?;
            print_json(&app::slopes_section(cfg, &ws, &analyses, &grouping, *gap_sweep))
        }
        Command::Levels => {
            let (_, analyses) = loaded(cfg, exec)?;
            print_json(&app::levels_section(&analyses))
        }
        Command::Network {
            gender,
            mode,
            label_threshold,
        } => {
            let (ws, analyses) = loaded(cfg, exec)?;
            let tagger = app::load_tagger(cfg, &ws.names)?;
            let stop = app::load_stopwords(cfg)?;
            let (g, m): (Gender, WindowMode) = ((*gender).into(), (*mode).into());
            let built = app::build_gender_network(&ws, &analyses, &tagger, stop.as_ref(), g, m);
            let threshold = label_threshold.unwrap_or(match m {
                WindowMode::Single => LABEL_THRESHOLD_SINGLE,
                WindowMode::Cooccur => LABEL_THRESHOLD_COOCCUR,
            });
            let dir = cfg.output.join("networks");
            std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            let stem = format!("{}-{}", g.as_str(), if m == WindowMode::Single { "single" } else { "cooccur" });
            std::fs::write(dir.join(format!("{stem}.tsv")), built.network.to_tsv())?;
            std::fs::write(dir.join(format!("{stem}.graphml")), built.network.to_graphml(threshold))?;
            print_json(&built.summary)
        }
        Command::Verbs => {
            let (ws, analyses) = loaded(cfg, exec)?;
            let tagger = app::load_tagger(cfg, &ws.names)?;
            let stop = app::load_stopwords(cfg)?;
            let nets: Vec<_> = [Gender::Female, Gender::Male]
                .into_iter()
                .map(|g| app::build_gender_network(&ws, &analyses, &tagger, stop.as_ref(), g, WindowMode::Single))
                .collect();
            print_json(&app::verbs_section(&nets.iter().collect::<Vec<_>>(), &tagger))
        }
        Command::Endorse {
            outcome,
            votes_raw,
            format,
        } => {
            let (ws, analyses) = loaded(cfg, exec)?;
            let scale = if *votes_raw { VotesScale::Raw } else { VotesScale::Log };
            let section = app::endorse_section(&ws, &analyses, &outcomes(*outcome), scale);
            match format {
                OutputFormat::Json => print_json(&section),
                OutputFormat::Table => {
                    println!("rows: {}", section.n_rows);
                    for (reason, n) in &section.excluded {
                        println!("excluded ({reason}): {n}");
                    }
                    for r in &section.regressions {
                        println!();
                        match (&r.report, &r.error) {
                            (Some(rep), _) => print!("{}", rep.to_table()),
                            (None, Some(e)) => println!("{:?}: not estimated ({e})", r.outcome),
                            (None, None) => {}
                        }
                    }
                    Ok(())
                }
            }
        }
        Command::Report => {
            let (ws, analyses) = loaded(cfg, exec)?;
            let report = build_report(cfg, &ws, &analyses)?;
            let path = cfg.output.join("report.json");
            write_json(&path, &report)?;
            println!("{}", path.display());
            Ok(())
        }
    }
}

fn build_report(cfg: &RunConfig, ws: &Workspace, analyses: &Analyses) -> Result<app::Report> {
    let tagger = app::load_tagger(cfg, &ws.names)?;
    let stop = app::load_stopwords(cfg)?;
    let mut nets = Vec::new();
    for g in [Gender::Female, Gender::Male] {
        for m in [WindowMode::Single, WindowMode::Cooccur] {
            nets.push(app::build_gender_network(ws, analyses, &tagger, stop.as_ref(), g, m));
        }
    }
    let single: Vec<_> = nets.iter().filter(|b| b.summary.mode == WindowMode::Single).collect();
    Ok(app::Report {
        corpus: app::corpus_section(ws, analyses),
        axis_validation: app::axis_section(&ws.table, &ws.axis, ws.lexicon.as_deref())?,
        arcs: app::arc_section(ws, analyses),
        slopes: app::slopes_section(cfg, ws, analyses, &Grouping::None, false),
        levels: app::levels_section(analyses),
        verbs: app::verbs_section(&single, &tagger),
        networks: nets.into_iter().map(|b| b.summary).collect(),
        endorsement: app::endorse_section(ws, analyses, &[Outcome::Rating, Outcome::Votes], VotesScale::Log),
    })
}

fn execute(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    let jobs = cfg.jobs.unwrap_or(0);
    if jobs == 1 || !cfg!(feature = "parallel") {
        return run(cli, &cfg, Execution::Sequential);
    }
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .context("starting worker threads")?;
        return pool.install(|| run(cli, &cfg, Execution::Parallel));
    }
    #[allow(unreachable_code)]
    run(cli, &cfg, Execution::Sequential)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(1)
            } else {
                if e.downcast_ref::<DataError>().is_none() {
                    log::debug!("{e:?}");
                }
                ExitCode::from(2)
            }
        }
    }
}
