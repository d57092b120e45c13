//! Semantic-field lexicon built from WordNet noun and verb lexicographer files.
//!
//! A field is one lexicographer file (`noun.act`, `verb.motion`, ...). The
//! lexicon maps every admitted surface form to the set of fields whose
//! synsets contain it. Regular inflections are materialized at build time so
//! lookup is a plain exact match.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lexicographer file names for the noun (3..=28) and verb (29..=43) files,
/// in `lex_filenum` order.
pub const FIELD_NAMES: [&str; 41] = [
    "noun.tops",
    "noun.act",
    "noun.animal",
    "noun.artifact",
    "noun.attribute",
    "noun.body",
    "noun.cognition",
    "noun.communication",
    "noun.event",
    "noun.feeling",
    "noun.food",
    "noun.group",
    "noun.location",
    "noun.motive",
    "noun.object",
    "noun.person",
    "noun.phenomenon",
    "noun.plant",
    "noun.possession",
    "noun.process",
    "noun.quantity",
    "noun.relation",
    "noun.shape",
    "noun.state",
    "noun.substance",
    "noun.time",
    "verb.body",
    "verb.change",
    "verb.cognition",
    "verb.communication",
    "verb.competition",
    "verb.consumption",
    "verb.contact",
    "verb.creation",
    "verb.emotion",
    "verb.motion",
    "verb.perception",
    "verb.possession",
    "verb.social",
    "verb.stative",
    "verb.weather",
];

pub const N_FIELDS: usize = FIELD_NAMES.len();

const FIRST_LEX_FILENUM: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartOfSpeech {
    Noun,
    Verb,
}

impl PartOfSpeech {
    fn ss_type(self) -> &'static str {
        match self {
            PartOfSpeech::Noun => "n",
            PartOfSpeech::Verb => "v",
        }
    }
}

/// Dense index of a semantic field in [`FIELD_NAMES`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FieldId(pub u8);

impl FieldId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_name(name: &str) -> Option<FieldId> {
        FIELD_NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| FieldId(i as u8))
    }

    pub fn name(self) -> &'static str {
        FIELD_NAMES[self.index()]
    }
}

impl fmt::Display for FieldId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemanticField {
    pub id: FieldId,
    pub name: &'static str,
    pub pos: PartOfSpeech,
}

/// The full 41-entry field table in fixed order.
pub fn semantic_fields() -> Vec<SemanticField> {
    FIELD_NAMES
        .iter()
        .enumerate()
        .map(|(i, &name)| SemanticField {
            id: FieldId(i as u8),
            name,
            pos: if name.starts_with("noun.") {
                PartOfSpeech::Noun
            } else {
                PartOfSpeech::Verb
            },
        })
        .collect()
}

/// Maps a WordNet `lex_filenum` to its field name; `None` outside 3..=43.
pub fn lexnum_to_field(lex_filenum: u32) -> Option<&'static str> {
    lex_filenum
        .checked_sub(FIRST_LEX_FILENUM)
        .and_then(|i| FIELD_NAMES.get(i as usize))
        .copied()
}

fn lexnum_to_field_id(lex_filenum: u32) -> Option<FieldId> {
    lexnum_to_field(lex_filenum).map(|_| FieldId((lex_filenum - FIRST_LEX_FILENUM) as u8))
}

fn is_word(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_lowercase())
}

/// Parses a WordNet `data.noun` / `data.verb` file into `(lemma, lex_filenum)`
/// pairs, one per word slot. Lemmas are lowercased; any lemma that is not
/// purely alphabetic (collocations, digits, punctuation) is dropped.
pub fn parse_wordnet_data<R: BufRead>(mut reader: R, pos: PartOfSpeech) -> Result<Vec<(String, u32)>> {
    let mut out = Vec::new();
    let mut buf = Vec::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        if buf.first() == Some(&b' ') {
            continue;
        }
        let line = std::str::from_utf8(&buf).map_err(|_| malformed(line_no, "not UTF-8"))?;
        if line.trim().is_empty() {
            continue;
        }
        parse_data_line(line, pos, line_no, &mut out)?;
    }
    Ok(out)
}

fn malformed(line_no: usize, reason: &str) -> Error {
    Error::MalformedLine {
        line_no,
        reason: reason.to_string(),
    }
}

fn parse_data_line(
    line: &str,
    pos: PartOfSpeech,
    line_no: usize,
    out: &mut Vec<(String, u32)>,
) -> Result<()> {
    let mut fields = line.split_ascii_whitespace();
    let mut next = |what: &str| {
        fields
            .next()
            .ok_or_else(|| malformed(line_no, &format!("missing {what}")))
    };

    let offset = next("synset_offset")?;
    if offset.len() != 8 || !offset.bytes().all(|b| b.is_ascii_digit()) {
        return Err(malformed(line_no, "synset_offset must be 8 decimal digits"));
    }
    let lex = next("lex_filenum")?;
    if lex.len() != 2 || !lex.bytes().all(|b| b.is_ascii_digit()) {
        return Err(malformed(line_no, "lex_filenum must be 2 decimal digits"));
    }
    let lex_filenum: u32 = lex.parse().expect("two ASCII digits");
    if next("ss_type")? != pos.ss_type() {
        return Err(malformed(line_no, "ss_type does not match the file"));
    }
    let w_cnt = next("w_cnt")?;
    let w_cnt = match u8::from_str_radix(w_cnt, 16) {
        Ok(n) if w_cnt.len() == 2 => n,
        _ => return Err(malformed(line_no, "w_cnt must be 2 hex digits")),
    };
    for _ in 0..w_cnt {
        let word = next("word")?;
        let lex_id = next("lex_id")?;
        if lex_id.len() != 1 || !lex_id.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(malformed(line_no, "lex_id must be 1 hex digit"));
        }
        let lemma = word.to_ascii_lowercase();
        if is_word(&lemma) {
            out.push((lemma, lex_filenum));
        }
    }
    Ok(())
}

fn is_consonant(b: u8) -> bool {
    b.is_ascii_lowercase() && !matches!(b, b'a' | b'e' | b'i' | b'o' | b'u')
}

fn ends_with_consonant_y(word: &str) -> bool {
    let b = word.as_bytes();
    b.len() >= 2 && b[b.len() - 1] == b'y' && is_consonant(b[b.len() - 2])
}

/// Plural noun / third-person verb form.
fn sibilant_plural(word: &str) -> String {
    if ["s", "x", "z", "ch", "sh"].iter().any(|s| word.ends_with(s)) {
        format!("{word}es")
    } else if ends_with_consonant_y(word) {
        format!("{}ies", &word[..word.len() - 1])
    } else {
        format!("{word}s")
    }
}

fn past_tense(word: &str) -> String {
    if word.ends_with('e') {
        format!("{word}d")
    } else if ends_with_consonant_y(word) {
        format!("{}ied", &word[..word.len() - 1])
    } else {
        format!("{word}ed")
    }
}

fn gerund(word: &str) -> String {
    if word.ends_with('e') && !word.ends_with("ee") {
        format!("{}ing", &word[..word.len() - 1])
    } else {
        format!("{word}ing")
    }
}

/// The lemma plus its regular inflections. No consonant doubling.
pub fn expand_derivatives(lemma: &str, pos: PartOfSpeech) -> BTreeSet<String> {
    let mut forms = BTreeSet::new();
    forms.insert(lemma.to_string());
    forms.insert(sibilant_plural(lemma));
    if pos == PartOfSpeech::Verb {
        forms.insert(past_tense(lemma));
        forms.insert(gerund(lemma));
    }
    forms
}

/// Immutable mapping from surface forms to semantic fields.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Lexicon {
    words: BTreeMap<String, Vec<FieldId>>,
}

impl Lexicon {
    /// Builds a lexicon from `(form, field)` pairs. Forms that are not
    /// lowercase letters-only are skipped.
    pub fn from_entries<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, FieldId)>,
        S: Into<String>,
    {
        let mut words: BTreeMap<String, BTreeSet<FieldId>> = BTreeMap::new();
        for (form, field) in entries {
            let form = form.into();
            if is_word(&form) && field.index() < N_FIELDS {
                words.entry(form).or_default().insert(field);
            }
        }
        Lexicon {
            words: words
                .into_iter()
                .map(|(w, set)| (w, set.into_iter().collect()))
                .collect(),
        }
    }

    pub fn fields(&self) -> &'static [&'static str; N_FIELDS] {
        &FIELD_NAMES
    }

    pub fn n_fields(&self) -> usize {
        N_FIELDS
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Field ids containing `token`, ascending; empty when unknown.
    pub fn lookup(&self, token: &str) -> &[FieldId] {
        self.words.get(token).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn words(&self) -> impl Iterator<Item = (&str, &[FieldId])> {
        self.words.iter().map(|(w, f)| (w.as_str(), f.as_slice()))
    }

    /// Number of distinct forms per field, in table order.
    pub fn field_word_counts(&self) -> [usize; N_FIELDS] {
        let mut counts = [0; N_FIELDS];
        for ids in self.words.values() {
            for id in ids {
                counts[id.index()] += 1;
            }
        }
        counts
    }
}

/// Builds the lexicon from WordNet `data.noun` and `data.verb` streams.
pub fn build_lexicon<N: BufRead, V: BufRead>(noun_stream: N, verb_stream: V) -> Result<Lexicon> {
    let mut entries = Vec::new();
    for (stream, pos) in [
        (Box::new(noun_stream) as Box<dyn BufRead>, PartOfSpeech::Noun),
        (Box::new(verb_stream) as Box<dyn BufRead>, PartOfSpeech::Verb),
    ] {
        for (lemma, lex_filenum) in parse_wordnet_data(stream, pos)? {
            let Some(field) = lexnum_to_field_id(lex_filenum) else {
                continue;
            };
            for form in expand_derivatives(&lemma, pos) {
                entries.push((form, field));
            }
        }
    }
    let lexicon = Lexicon::from_entries(entries);
    if lexicon.is_empty() {
        return Err(Error::EmptyLexicon);
    }
    Ok(lexicon)
}

/// Reads `data.noun` and `data.verb` from a WordNet `dict` directory.
pub fn build_lexicon_from_dir(dir: &std::path::Path) -> Result<Lexicon> {
    let open = |name: &str| {
        let path = dir.join(name);
        std::fs::File::open(&path)
            .map(std::io::BufReader::new)
            .map_err(|e| Error::io(path, e))
    };
    build_lexicon(open("data.noun")?, open("data.verb")?)
}

/// Loads a lexicon from `field_name<TAB>word word ...` lines, with no
/// derivative expansion. Blank lines and `#` comments are ignored.
pub fn load_plain_lexicon<R: BufRead>(reader: R) -> Result<Lexicon> {
    let mut entries = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, words) = line
            .split_once('\t')
            .ok_or_else(|| malformed(line_no, "expected field_name<TAB>words"))?;
        let field = FieldId::from_name(name.trim())
            .ok_or_else(|| Error::UnknownFieldName(name.trim().to_string()))?;
        for word in words.split_ascii_whitespace() {
            if !is_word(word) {
                return Err(malformed(line_no, &format!("`{word}` is not lowercase letters")));
            }
            entries.push((word.to_string(), field));
        }
    }
    let lexicon = Lexicon::from_entries(entries);
    if lexicon.is_empty() {
        return Err(Error::EmptyLexicon);
    }
    Ok(lexicon)
}

#[derive(Serialize, Deserialize)]
struct LexiconJson {
    fields: Vec<String>,
    words: BTreeMap<String, Vec<u8>>,
}

impl Serialize for Lexicon {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        LexiconJson {
            fields: FIELD_NAMES.iter().map(|s| s.to_string()).collect(),
            words: self
                .words
                .iter()
                .map(|(w, ids)| (w.clone(), ids.iter().map(|f| f.0).collect()))
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Lexicon {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = LexiconJson::deserialize(deserializer)?;
        if raw
            .fields
            .iter()
            .map(String::as_str)
            .ne(FIELD_NAMES.iter().copied())
        {
            return Err(D::Error::custom("lexicon fields differ from the 41-field table"));
        }
        let mut entries = Vec::new();
        for (word, ids) in raw.words {
            if !is_word(&word) {
                return Err(D::Error::custom(format!("invalid form `{word}`")));
            }
            for id in ids {
                if id as usize >= N_FIELDS {
                    return Err(D::Error::custom(format!("field id {id} out of range")));
                }
                entries.push((word.clone(), FieldId(id)));
            }
        }
        Ok(Lexicon::from_entries(entries))
    }
}
