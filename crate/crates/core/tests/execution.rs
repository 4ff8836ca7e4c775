use narrative_arcs::axis::{build_axis, DEFAULT_NEGATIVE, DEFAULT_POSITIVE};
use narrative_arcs::cast::{CharacterRoster, Gender, NameLexicon};
use narrative_arcs::corpus::Story;
use narrative_arcs::lexnet::WindowMode;
use narrative_arcs::par::Execution;
use narrative_arcs::pipeline::{analyze_corpus, gender_network, Context, ScoreSettings, SlopeSettings};
use narrative_arcs::synth::{self, PlantedConfig};

fn corpus() -> Vec<Story> {
    synth::planted_corpus(&PlantedConfig {
        n_stories: 40,
        seed: 7,
        ..PlantedConfig::default()
    })
}

#[test]
fn analysis_does_not_depend_on_execution() {
    let stories = corpus();
    let table = synth::level_table();
    let axis = build_axis(&table, &DEFAULT_POSITIVE, &DEFAULT_NEGATIVE).unwrap();
    let names = NameLexicon::from_lists([synth::MALE_NAME], [synth::FEMALE_NAME]);
    let ctx = Context {
        table: &table,
        axis: &axis,
        names: &names,
    };
    let run = |exec| {
        let out = analyze_corpus(&stories, ctx, &ScoreSettings::default(), &SlopeSettings { gap: 2, ..Default::default() }, exec);
        serde_json::to_string(&out.analyses).unwrap()
    };
    assert_eq!(run(Execution::Sequential), run(Execution::Parallel));
}

#[test]
fn networks_do_not_depend_on_execution() {
    let stories = corpus();
    let names = NameLexicon::from_lists([synth::MALE_NAME], [synth::FEMALE_NAME]);
    let rosters: Vec<CharacterRoster> = stories.iter().map(|s| CharacterRoster::build(s, &names)).collect();
    let pairs: Vec<_> = stories.iter().zip(&rosters).collect();
    for mode in [WindowMode::Single, WindowMode::Cooccur] {
        let (a, sa) = gender_network(&pairs, Gender::Male, mode, None, Execution::Sequential);
        let (b, sb) = gender_network(&pairs, Gender::Male, mode, None, Execution::Parallel);
        assert_eq!(a.to_tsv(), b.to_tsv());
        assert_eq!(sa, sb);
        assert!(!a.is_empty());
    }
}
