//! Context-free Penn Treebank tagging: lexicon lookup, then proper names,
//! then suffix rules. No statistical model.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{CoNetwork, WindowSample};
use crate::cast::{Gender, NameLexicon, COMMON_WORD_NAMES};
use crate::error::{Error, Result};

const BUNDLED_LEXICON: &str = include_str!("../../data/pos/lexicon.tsv");
/// Hand-tagged evaluation sample, `word/TAG` tokens one sentence per line.
pub const BUNDLED_GOLD: &str = include_str!("../../data/pos/gold.txt");

pub const PENN_TAGS: [&str; 36] = [
    "CC", "CD", "DT", "EX", "FW", "IN", "JJ", "JJR", "JJS", "LS", "MD", "NN", "NNS", "NNP", "NNPS", "PDT", "POS",
    "PRP", "PRP$", "RB", "RBR", "RBS", "RP", "SYM", "TO", "UH", "VB", "VBD", "VBG", "VBN", "VBP", "VBZ", "WDT",
    "WP", "WP$", "WRB",
];

pub const VERB_TAGS: [&str; 6] = ["VB", "VBD", "VBG", "VBN", "VBP", "VBZ"];

fn intern(tag: &str) -> Option<&'static str> {
    PENN_TAGS.iter().copied().find(|t| *t == tag)
}

#[derive(Clone, Debug, Default)]
pub struct PosTagger {
    lexicon: HashMap<String, &'static str>,
    proper: HashSet<String>,
}

impl PosTagger {
    /// Parses `word<TAB>tag` lines; `#` lines and blanks are skipped.
    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut lexicon = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, tag) = line
                .split_once('\t')
                .ok_or_else(|| Error::Lexicon(format!("POS lexicon line {}: expected word<TAB>tag", i + 1)))?;
            let tag = intern(tag.trim())
                .ok_or_else(|| Error::Lexicon(format!("POS lexicon line {}: unknown tag {tag:?}", i + 1)))?;
            lexicon.insert(word.trim().to_lowercase(), tag);
        }
        Ok(PosTagger {
            lexicon,
            proper: HashSet::new(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_tsv(&text)
    }

    /// Bundled lexicon plus the bundled first-name lists as proper nouns.
    pub fn bundled() -> Self {
        let tagger = Self::from_tsv(BUNDLED_LEXICON).expect("bundled POS lexicon is valid");
        tagger.with_names(&NameLexicon::bundled())
    }

    /// Marks the lexicon's names as NNP, except names that double as common
    /// words ("will", "rose", ...).
    pub fn with_names(self, names: &NameLexicon) -> Self {
        let common: HashSet<String> = COMMON_WORD_NAMES.iter().map(|n| n.to_lowercase()).collect();
        let proper: Vec<String> = names.all_names().filter(|n| !common.contains(n)).collect();
        self.with_proper_nouns(proper)
    }

    pub fn with_proper_nouns(mut self, words: impl IntoIterator<Item = String>) -> Self {
        self.proper.extend(words.into_iter().map(|w| w.to_lowercase()));
        self
    }

    fn known(&self, word: &str) -> Option<&'static str> {
        if let Some(&t) = self.lexicon.get(word) {
            return Some(t);
        }
        if self.proper.contains(word) {
            return Some("NNP");
        }
        None
    }

    /// Tag for a single token; never fails, `NN` is the fallback.
    pub fn tag(&self, token: &str) -> &'static str {
        let w = token.to_lowercase();
        if let Some(t) = self.known(&w) {
            return t;
        }
        if let Some(stem) = w.strip_suffix("'s").or_else(|| w.strip_suffix("’s")) {
            return match self.known(stem) {
                Some("NNP") => "NNP",
                _ => "NN",
            };
        }
        if w.chars().any(|c| c.is_ascii_digit()) && w.chars().all(|c| c.is_ascii_digit() || ",.-".contains(c)) {
            return "CD";
        }
        let n = w.chars().count();
        if n > 4 && w.ends_with("ing") {
            return "VBG";
        }
        if n > 3 && w.ends_with("ed") {
            return "VBD";
        }
        if n > 3 && w.ends_with("ly") {
            return "RB";
        }
        if ["ness", "tion", "sion", "ment", "ity", "ship", "hood"].iter().any(|s| w.ends_with(s)) {
            return "NN";
        }
        if ["ous", "ful", "ive", "able", "ible", "less", "ic", "al", "ish"].iter().any(|s| n > 4 && w.ends_with(s)) {
            return "JJ";
        }
        if n > 3 && w.ends_with('s') && !["ss", "us", "is"].iter().any(|s| w.ends_with(s)) {
            // third-person verb if the stem is a known verb
            let stems = [
                w.strip_suffix("ies").map(|s| format!("{s}y")),
                w.strip_suffix("es").map(str::to_string),
                w.strip_suffix('s').map(str::to_string),
            ];
            for stem in stems.into_iter().flatten() {
                match self.lexicon.get(&stem) {
                    Some(&"VB") => return "VBZ",
                    Some(_) => return "NNS",
                    None => {}
                }
            }
            return "NNS";
        }
        "NN"
    }

    pub fn len(&self) -> usize {
        self.lexicon.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lexicon.is_empty()
    }
}

/// Parses the `word/TAG` gold format.
pub fn parse_gold(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for line in text.lines().filter(|l| !l.trim_start().starts_with('#')) {
        for item in line.split_whitespace() {
            let (w, t) = item
                .rsplit_once('/')
                .ok_or_else(|| Error::Lexicon(format!("gold token without tag: {item:?}")))?;
            if intern(t).is_none() {
                return Err(Error::Lexicon(format!("gold token with unknown tag: {item:?}")));
            }
            out.push((w.to_string(), t.to_string()));
        }
    }
    Ok(out)
}

/// Fraction of gold tokens tagged exactly right.
pub fn accuracy(tagger: &PosTagger, gold: &[(String, String)]) -> f64 {
    if gold.is_empty() {
        return 0.0;
    }
    let hits = gold.iter().filter(|(w, t)| tagger.tag(w) == t).count();
    hits as f64 / gold.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Adjective,
    Verb,
    Noun,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Adjective, Category::Verb, Category::Noun];

    pub fn of(tag: &str) -> Option<Category> {
        if tag.starts_with("JJ") {
            Some(Category::Adjective)
        } else if tag.starts_with("VB") {
            Some(Category::Verb)
        } else if tag.starts_with("NN") {
            Some(Category::Noun)
        } else {
            None
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Adjective => "adjective",
            Category::Verb => "verb",
            Category::Noun => "noun",
        }
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "adjective" | "adj" | "jj" => Ok(Category::Adjective),
            "verb" | "vb" => Ok(Category::Verb),
            "noun" | "nn" => Ok(Category::Noun),
            other => Err(Error::Invalid(format!("unknown word category {other:?}"))),
        }
    }
}

/// Induced sub-network on the nodes whose tag falls in `category`. Nodes
/// without an edge inside the slice are kept with multiplicity 0.
pub fn category_slice(network: &CoNetwork, tagger: &PosTagger, category: Category) -> CoNetwork {
    let keep: HashSet<&str> = network
        .nodes
        .keys()
        .filter(|w| Category::of(tagger.tag(w)) == Some(category))
        .map(String::as_str)
        .collect();
    let mut out = CoNetwork {
        nodes: keep.iter().map(|w| (w.to_string(), 0)).collect::<BTreeMap<_, _>>(),
        edges: BTreeMap::new(),
    };
    for ((a, b), &m) in &network.edges {
        if keep.contains(a.as_str()) && keep.contains(b.as_str()) {
            out.add_edge(a, b, m);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerbRate {
    pub gender: Gender,
    pub p_verb: f64,
    pub n_tokens: u64,
    pub n_verb_tokens: u64,
}

/// Share of verb-tagged tokens pooled over every sample of `gender`.
pub fn verb_rate<'a>(
    tagger: &PosTagger,
    gender: Gender,
    samples: impl IntoIterator<Item = &'a WindowSample>,
) -> Result<VerbRate> {
    let (mut n_tokens, mut n_verb_tokens) = (0u64, 0u64);
    for s in samples.into_iter().filter(|s| s.gender == gender) {
        for t in &s.tokens {
            n_tokens += 1;
            if VERB_TAGS.contains(&tagger.tag(t)) {
                n_verb_tokens += 1;
            }
        }
    }
    if n_tokens == 0 {
        return Err(Error::NoTokens);
    }
    Ok(VerbRate {
        gender,
        p_verb: n_verb_tokens as f64 / n_tokens as f64,
        n_tokens,
        n_verb_tokens,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(gender: Gender, words: &[&str]) -> WindowSample {
        WindowSample {
            story_id: "s".into(),
            gender,
            tokens: words.iter().map(|w| w.to_string()).collect(),
        }
    }

    #[test]
    fn lexicon_and_suffix_rules() {
        let t = PosTagger::bundled();
        assert_eq!(t.tag("the"), "DT");
        assert_eq!(t.tag("running"), "VBG");
        assert_eq!(t.tag("jumped"), "VBD");
        assert_eq!(t.tag("happily"), "RB");
        assert_eq!(t.tag("darkness"), "NN");
        assert_eq!(t.tag("dangerous"), "JJ");
        assert_eq!(t.tag("walks"), "VBZ");
        assert_eq!(t.tag("tables"), "NNS");
        assert_eq!(t.tag("glass"), "NN");
        assert_eq!(t.tag("1984"), "CD");
        assert_eq!(t.tag("zorblat"), "NN");
        assert_eq!(t.tag("ella"), "NNP");
        assert_eq!(t.tag("ella's"), "NNP");
        // a common-word name stays a common word
        assert_eq!(t.tag("will"), "MD");
    }

    #[test]
    fn rejects_unknown_tags() {
        assert!(PosTagger::from_tsv("cat\tNOUN\n").is_err());
        assert!(PosTagger::from_tsv("cat NN\n").is_err());
        let t = PosTagger::from_tsv("# comment\n\ncat\tNN\n").unwrap();
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn gold_sample_shape() {
        let gold = parse_gold(BUNDLED_GOLD).unwrap();
        assert_eq!(gold.len(), 500);
        assert!(parse_gold("cat/NOUN").is_err());
    }

    #[test]
    fn gold_accuracy() {
        let gold = parse_gold(BUNDLED_GOLD).unwrap();
        let acc = accuracy(&PosTagger::bundled(), &gold);
        assert!(acc >= 0.85, "accuracy {acc}");
    }

    #[test]
    fn verb_rate_extremes_and_hand_count() {
        let t = PosTagger::from_tsv("cat\tNN\ndog\tNN\nrun\tVB\nate\tVBD\n").unwrap();
        let nouns = [sample(Gender::Female, &["cat", "dog"])];
        assert_eq!(verb_rate(&t, Gender::Female, &nouns).unwrap().p_verb, 0.0);
        let verbs = [sample(Gender::Female, &["run", "ate"])];
        assert_eq!(verb_rate(&t, Gender::Female, &verbs).unwrap().p_verb, 1.0);
        // 3 verbs out of 7 female tokens; the male sample is ignored
        let mixed = [
            sample(Gender::Female, &["cat", "run", "dog"]),
            sample(Gender::Female, &["ate", "cat", "dog", "run"]),
            sample(Gender::Male, &["run", "run"]),
        ];
        let r = verb_rate(&t, Gender::Female, &mixed).unwrap();
        assert_eq!((r.n_tokens, r.n_verb_tokens), (7, 3));
        assert_eq!(r.p_verb, 3.0 / 7.0);
        assert!(matches!(verb_rate(&t, Gender::Male, &nouns), Err(Error::NoTokens)));
    }

    #[test]
    fn slices_partition_tagged_nodes() {
        let t = PosTagger::bundled();
        let words = ["happy", "dog", "runs", "the", "cold", "house", "ran", "slowly", "forest", "beautiful"];
        let net = super::super::build_network(&[sample(Gender::Male, &words)]);
        let slices: Vec<CoNetwork> = Category::ALL.iter().map(|&c| category_slice(&net, &t, c)).collect();
        let mut seen = HashSet::new();
        for (slice, &c) in slices.iter().zip(&Category::ALL) {
            for w in slice.nodes.keys() {
                assert!(seen.insert(w.clone()), "{w} in two slices");
                assert_eq!(Category::of(t.tag(w)), Some(c));
            }
            let total: u64 = slice.nodes.values().sum();
            assert_eq!(total, 2 * slice.n_edges_weighted());
        }
        let tagged: HashSet<String> =
            net.nodes.keys().filter(|w| Category::of(t.tag(w)).is_some()).cloned().collect();
        assert_eq!(seen, tagged);
        assert!(!seen.contains("the"));

        let nouns_only = super::super::build_network(&[sample(Gender::Male, &["dog", "house", "forest"])]);
        let adj = category_slice(&nouns_only, &t, Category::Adjective);
        assert_eq!(adj.n_nodes(), 0);
    }

    proptest! {
        #[test]
        fn verb_rate_batch_invariant(
            words in prop::collection::vec(prop::sample::select(vec!["cat", "run", "ate", "dog", "blue"]), 1..40),
            cut in 0usize..40,
        ) {
            let t = PosTagger::from_tsv("cat\tNN\ndog\tNN\nrun\tVB\nate\tVBD\nblue\tJJ\n").unwrap();
            let one = [sample(Gender::Female, &words)];
            let cut = cut.min(words.len());
            let mut two = vec![sample(Gender::Female, &words[cut..]), sample(Gender::Female, &words[..cut])];
            let a = verb_rate(&t, Gender::Female, &one).unwrap();
            let b = verb_rate(&t, Gender::Female, &two).unwrap();
            two.reverse();
            let c = verb_rate(&t, Gender::Female, &two).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(&b, &c);
        }
    }
}
