//! Author-labeled document ingestion.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use unicode_normalization::char::decompose_canonical;

use crate::error::{Error, Result};

/// Splits text into lowercase ASCII letter runs.
///
/// Non-ASCII letters are folded to their base letter when their canonical
/// decomposition is one ASCII letter plus combining marks (`é` -> `e`);
/// everything else separates tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars().flat_map(char::to_lowercase) {
        match fold_letter(ch) {
            Some(c) => current.push(c),
            None if !current.is_empty() => tokens.push(std::mem::take(&mut current)),
            None => {}
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

fn fold_letter(ch: char) -> Option<char> {
    if ch.is_ascii_lowercase() {
        return Some(ch);
    }
    if ch.is_ascii() || !ch.is_alphabetic() {
        return None;
    }
    let mut parts = Vec::with_capacity(4);
    decompose_canonical(ch, |c| parts.push(c));
    match parts.split_first() {
        Some((&base, marks))
            if base.is_ascii_lowercase()
                && !marks.is_empty()
                && marks.iter().all(|&m| is_combining_mark(m)) =>
        {
            Some(base)
        }
        _ => None,
    }
}

fn is_combining_mark(c: char) -> bool {
    matches!(c as u32, 0x0300..=0x036F | 0x1AB0..=0x1AFF | 0x1DC0..=0x1DFF | 0x20D0..=0x20FF | 0xFE20..=0xFE2F)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: usize,
    pub author: String,
    pub title: String,
    #[serde(rename = "counts")]
    pub token_counts: BTreeMap<String, u64>,
}

impl Document {
    pub fn new(id: usize, author: impl Into<String>, title: impl Into<String>, text: &str) -> Self {
        let mut token_counts = BTreeMap::new();
        for token in tokenize(text) {
            *token_counts.entry(token).or_insert(0) += 1;
        }
        Document {
            id,
            author: author.into(),
            title: title.into(),
            token_counts,
        }
    }

    pub fn total_tokens(&self) -> u64 {
        self.token_counts.values().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Corpus {
    documents: Vec<Document>,
    authors: Vec<String>,
}

impl Corpus {
    /// Orders documents by `(author, title)` and renumbers ids densely.
    pub fn from_documents(mut documents: Vec<Document>) -> Self {
        documents.sort_by(|a, b| (&a.author, &a.title).cmp(&(&b.author, &b.title)));
        for (i, doc) in documents.iter_mut().enumerate() {
            doc.id = i;
        }
        let authors: BTreeSet<String> = documents.iter().map(|d| d.author.clone()).collect();
        Corpus {
            documents,
            authors: authors.into_iter().collect(),
        }
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn authors(&self) -> &[String] {
        &self.authors
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }
}

impl<'de> Deserialize<'de> for Corpus {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;

        #[derive(Deserialize)]
        struct Raw {
            documents: Vec<Document>,
            authors: Vec<String>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let corpus = Corpus::from_documents(raw.documents);
        if corpus.authors != raw.authors {
            return Err(D::Error::custom("author list does not match documents"));
        }
        if corpus
            .documents
            .iter()
            .flat_map(|d| d.token_counts.iter())
            .any(|(t, &c)| c == 0 || t.is_empty() || !t.bytes().all(|b| b.is_ascii_lowercase()))
        {
            return Err(D::Error::custom("token counts must be positive with a-z keys"));
        }
        Ok(corpus)
    }
}

/// Reads `root/<author>/<title>.txt` into a corpus.
pub fn ingest_directory(root: &Path) -> Result<Corpus> {
    let mut documents = Vec::new();
    for author_dir in sorted_entries(root)? {
        if !author_dir.is_dir() {
            continue;
        }
        let author = file_name(&author_dir);
        for file in sorted_entries(&author_dir)? {
            if !file.is_file() || file.extension().is_none_or(|e| e != "txt") {
                continue;
            }
            let bytes = fs::read(&file).map_err(|e| Error::io(&file, e))?;
            let text = String::from_utf8(bytes).map_err(|_| Error::Encoding(file.clone()))?;
            let title = file
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            documents.push(Document::new(0, author.clone(), title, &text));
        }
    }
    if documents.is_empty() {
        return Err(Error::EmptyCorpus(root.to_path_buf()));
    }
    Ok(Corpus::from_documents(documents))
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|entry| entry.map(|e| e.path()).map_err(|e| Error::io(dir, e)))
        .collect::<Result<Vec<_>>>()?;
    paths.sort();
    Ok(paths)
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}
