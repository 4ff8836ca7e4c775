use narrative_arcs::cast::{CharacterRoster, NameLexicon};
use narrative_arcs::corpus::{SegmentKind, SourceKind, Story, StoryMeta};

const CINDERELLA: &str = include_str!("../data/fixtures/cinderella.txt");

#[test]
fn cinderella_synopsis() {
    let story = Story::from_text(StoryMeta::new("cinderella", SourceKind::Synopsis), CINDERELLA, SegmentKind::Sentence);
    assert_eq!(story.segments.len(), 97);
    let roster = CharacterRoster::build(&story, &NameLexicon::bundled());
    assert_eq!(roster.leading_female.as_deref(), Some("Ella"));
    assert_eq!(roster.leading_male.as_deref(), Some("Kit"));
}
