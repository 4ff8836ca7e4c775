//! Character detection from gendered name lists, leading-character
//! selection and per-segment co-occurrence marks.
//!
//! A surface token counts as a mention when it starts with an uppercase
//! letter and its capitalized form (possessive `'s` stripped, all-caps
//! speaker tags title-cased) is a known name. Pronouns are never mentions.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Story;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Female,
    Male,
}

impl Gender {
    pub fn other(self) -> Gender {
        match self {
            Gender::Female => Gender::Male,
            Gender::Male => Gender::Female,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Female => "female",
            Gender::Male => "male",
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Gender {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "female" | "f" | "woman" | "actress" => Ok(Gender::Female),
            "male" | "m" | "man" | "actor" => Ok(Gender::Male),
            other => Err(Error::Invalid(format!("unknown gender {other:?}"))),
        }
    }
}

/// What to do with names that appear on both lists.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmbiguousPolicy {
    #[default]
    Exclude,
    /// Pick the gender with the larger frequency weight; names without
    /// weights, or with equal weights, are still excluded.
    MajorityList,
}

impl FromStr for AmbiguousPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exclude" => Ok(AmbiguousPolicy::Exclude),
            "majority-list" | "majority" => Ok(AmbiguousPolicy::MajorityList),
            other => Err(Error::Invalid(format!("unknown ambiguous-name policy {other:?}"))),
        }
    }
}

/// Capitalized names that are also ordinary English words. A segment-initial
/// occurrence of one of these only counts when the same name also occurs
/// somewhere other than the start of a segment.
pub const COMMON_WORD_NAMES: [&str; 32] = [
    "Will", "May", "Rose", "Grace", "Hope", "Faith", "Joy", "Mark", "Bill", "Art", "Frank", "Sue",
    "Dawn", "June", "April", "Pat", "Ray", "Rich", "Lily", "Ivy", "Iris", "Summer", "Carol",
    "Chance", "Chase", "Miles", "Sandy", "Guy", "Don", "Gene", "Drew", "Page",
];

const BUNDLED_MALE: &str = include_str!("../data/names/male.txt");
const BUNDLED_FEMALE: &str = include_str!("../data/names/female.txt");

#[derive(Clone, Debug, Default)]
pub struct NameLexicon {
    male: HashSet<String>,
    female: HashSet<String>,
    weights: HashMap<String, (f64, f64)>,
    pub policy: AmbiguousPolicy,
}

fn parse_list(text: &str) -> impl Iterator<Item = String> + '_ {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
}

impl NameLexicon {
    pub fn from_lists<M, F, S>(male: M, female: F) -> Self
    where
        M: IntoIterator<Item = S>,
        F: IntoIterator<Item = S>,
        S: Into<String>,
    {
        NameLexicon {
            male: male.into_iter().map(Into::into).collect(),
            female: female.into_iter().map(Into::into).collect(),
            weights: HashMap::new(),
            policy: AmbiguousPolicy::Exclude,
        }
    }

    /// The name lists shipped with the crate.
    pub fn bundled() -> Self {
        NameLexicon::from_lists(parse_list(BUNDLED_MALE), parse_list(BUNDLED_FEMALE))
    }

    /// Loads one-name-per-line files plus an optional
    /// `name,male_freq,female_freq` CSV of weights.
    pub fn load(male: &Path, female: &Path, weights: Option<&Path>) -> Result<Self> {
        let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| Error::io(p, e));
        let mut lexicon = NameLexicon::from_lists(parse_list(&read(male)?), parse_list(&read(female)?));
        if lexicon.male.is_empty() || lexicon.female.is_empty() {
            return Err(Error::Lexicon("name lists must both be non-empty".into()));
        }
        if let Some(path) = weights {
            lexicon.weights = read_weights(&read(path)?)?;
        }
        Ok(lexicon)
    }

    pub fn with_policy(mut self, policy: AmbiguousPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_weights(mut self, weights: HashMap<String, (f64, f64)>) -> Self {
        self.weights = weights;
        self
    }

    /// Every listed name, lowercased, in no particular order.
    pub fn all_names(&self) -> impl Iterator<Item = String> + '_ {
        self.male.iter().chain(&self.female).map(|n| n.to_lowercase())
    }

    pub fn gender_of(&self, name: &str) -> Option<Gender> {
        match (self.male.contains(name), self.female.contains(name)) {
            (true, false) => Some(Gender::Male),
            (false, true) => Some(Gender::Female),
            (false, false) => None,
            (true, true) => match self.policy {
                AmbiguousPolicy::Exclude => None,
                AmbiguousPolicy::MajorityList => {
                    let &(m, f) = self.weights.get(name)?;
                    if m > f {
                        Some(Gender::Male)
                    } else if f > m {
                        Some(Gender::Female)
                    } else {
                        None
                    }
                }
            },
        }
    }
}

fn read_weights(text: &str) -> Result<HashMap<String, (f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut out = HashMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let bad = || Error::Lexicon(format!("name weights row {}: expected name,male_freq,female_freq", i + 2));
        let name = rec.get(0).ok_or_else(bad)?.to_string();
        let m: f64 = rec.get(1).and_then(|v| v.parse().ok()).ok_or_else(bad)?;
        let f: f64 = rec.get(2).and_then(|v| v.parse().ok()).ok_or_else(bad)?;
        out.insert(name, (m, f));
    }
    Ok(out)
}

/// Normalizes a surface token to the form used in the name lists, or `None`
/// when it is not capitalized.
pub fn name_form(surface: &str) -> Option<String> {
    let mut chars = surface.chars();
    let first = chars.next()?;
    if !first.is_uppercase() {
        return None;
    }
    let base = surface
        .strip_suffix("'s")
        .or_else(|| surface.strip_suffix("\u{2019}s"))
        .or_else(|| surface.strip_suffix("'S"))
        .unwrap_or(surface);
    if base.chars().count() > 1 && base.chars().all(|c| !c.is_lowercase()) {
        let mut it = base.chars();
        let head = it.next()?;
        return Some(head.to_string() + &it.as_str().to_lowercase());
    }
    Some(base.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Mention {
    pub segment: usize,
    pub position: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Character {
    pub name: String,
    pub gender: Gender,
    pub mention_segments: BTreeSet<usize>,
    pub mention_count: usize,
    pub mentions: Vec<Mention>,
}

impl Character {
    fn first_mention(&self) -> Mention {
        self.mentions[0]
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CharacterRoster {
    /// Ordered by first mention.
    pub characters: Vec<Character>,
    pub leading_female: Option<String>,
    pub leading_male: Option<String>,
    /// Gender of the most frequently mentioned name overall.
    pub dominance: Option<Gender>,
}

impl CharacterRoster {
    pub fn get(&self, name: &str) -> Option<&Character> {
        self.characters.iter().find(|c| c.name == name)
    }

    pub fn has_gender(&self, gender: Gender) -> bool {
        self.characters.iter().any(|c| c.gender == gender)
    }

    pub fn leading(&self, gender: Gender) -> Option<&Character> {
        let name = match gender {
            Gender::Female => self.leading_female.as_deref(),
            Gender::Male => self.leading_male.as_deref(),
        }?;
        self.get(name)
    }

    pub fn leading_pair(&self) -> Option<(&Character, &Character)> {
        Some((self.leading(Gender::Female)?, self.leading(Gender::Male)?))
    }

    /// Detects characters and selects the leading pair in one step.
    pub fn build(story: &Story, lexicon: &NameLexicon) -> CharacterRoster {
        leading_characters(detect_characters(story, lexicon))
    }
}

/// Collects every name mention in the story. Genders from the story's cast
/// metadata override the lexicon.
pub fn detect_characters(story: &Story, lexicon: &NameLexicon) -> CharacterRoster {
    let common: HashSet<&str> = COMMON_WORD_NAMES.iter().copied().collect();
    let mut by_name: Vec<Character> = Vec::new();
    let mut slot: HashMap<String, usize> = HashMap::new();
    // (name, mention, segment-initial?)
    let mut initial_only: HashMap<String, bool> = HashMap::new();

    for segment in &story.segments {
        for (position, surface) in segment.surface_tokens.iter().enumerate() {
            let Some(name) = name_form(surface) else { continue };
            let gender = story
                .meta
                .cast
                .get(&name)
                .copied()
                .or_else(|| lexicon.gender_of(&name));
            let Some(gender) = gender else { continue };
            if common.contains(name.as_str()) && !story.meta.cast.contains_key(&name) {
                let flag = initial_only.entry(name.clone()).or_insert(true);
                *flag &= position == 0;
            }
            let idx = *slot.entry(name.clone()).or_insert_with(|| {
                by_name.push(Character {
                    name: name.clone(),
                    gender,
                    mention_segments: BTreeSet::new(),
                    mention_count: 0,
                    mentions: Vec::new(),
                });
                by_name.len() - 1
            });
            let c = &mut by_name[idx];
            c.mention_segments.insert(segment.index);
            c.mention_count += 1;
            c.mentions.push(Mention {
                segment: segment.index,
                position,
            });
        }
    }

    let characters = by_name
        .into_iter()
        .filter(|c| !initial_only.get(&c.name).copied().unwrap_or(false))
        .collect();
    CharacterRoster {
        characters,
        ..Default::default()
    }
}

fn most_frequent<'a>(chars: impl Iterator<Item = &'a Character>) -> Option<&'a Character> {
    chars.min_by(|a, b| {
        b.mention_count
            .cmp(&a.mention_count)
            .then_with(|| a.first_mention().cmp(&b.first_mention()))
    })
}

/// Picks the most mentioned name of each gender, ties going to the earliest
/// first mention.
pub fn leading_characters(mut roster: CharacterRoster) -> CharacterRoster {
    let pick = |g: Gender| most_frequent(roster.characters.iter().filter(|c| c.gender == g)).map(|c| c.name.clone());
    roster.leading_female = pick(Gender::Female);
    roster.leading_male = pick(Gender::Male);
    roster.dominance = most_frequent(roster.characters.iter()).map(|c| c.gender);
    roster
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CooccurMode {
    /// Only the leading female and leading male.
    #[default]
    Leading,
    /// Any female character with any male character.
    Any,
}

impl FromStr for CooccurMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "leading" => Ok(CooccurMode::Leading),
            "any" => Ok(CooccurMode::Any),
            other => Err(Error::Invalid(format!("unknown co-occurrence mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CooccurrenceMap {
    pub cooccur_segments: BTreeSet<usize>,
    pub female_only: BTreeSet<usize>,
    pub male_only: BTreeSet<usize>,
}

impl CooccurrenceMap {
    pub fn mentioned(&self) -> BTreeSet<usize> {
        self.cooccur_segments
            .iter()
            .chain(&self.female_only)
            .chain(&self.male_only)
            .copied()
            .collect()
    }

    pub fn own_only(&self, gender: Gender) -> &BTreeSet<usize> {
        match gender {
            Gender::Female => &self.female_only,
            Gender::Male => &self.male_only,
        }
    }
}

/// Sorts every segment that mentions a tracked character into shared,
/// female-only or male-only.
pub fn mark_cooccurrence(story: &Story, roster: &CharacterRoster, mode: CooccurMode) -> Result<CooccurrenceMap> {
    let (female, male): (BTreeSet<usize>, BTreeSet<usize>) = match mode {
        CooccurMode::Leading => {
            let (f, m) = roster
                .leading_pair()
                .ok_or_else(|| Error::MissingLeadingPair(story.id().to_string()))?;
            (f.mention_segments.clone(), m.mention_segments.clone())
        }
        CooccurMode::Any => {
            if !(roster.has_gender(Gender::Female) && roster.has_gender(Gender::Male)) {
                return Err(Error::MissingLeadingPair(story.id().to_string()));
            }
            let gather = |g: Gender| {
                roster
                    .characters
                    .iter()
                    .filter(|c| c.gender == g)
                    .flat_map(|c| c.mention_segments.iter().copied())
                    .collect()
            };
            (gather(Gender::Female), gather(Gender::Male))
        }
    };
    Ok(CooccurrenceMap {
        cooccur_segments: female.intersection(&male).copied().collect(),
        female_only: female.difference(&male).copied().collect(),
        male_only: male.difference(&female).copied().collect(),
    })
}
