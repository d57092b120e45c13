//! The semantic-field frequency matrix and document vectors.

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::lexicon::Lexicon;
use crate::linalg::Matrix;

/// How a token that belongs to several fields is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polysemy {
    /// Full count to every containing field.
    #[default]
    Full,
    /// Count divided evenly among the containing fields.
    Fractional,
}

impl std::str::FromStr for Polysemy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Polysemy::Full),
            "fractional" => Ok(Polysemy::Fractional),
            _ => Err(Error::InvalidParameter(format!("polysemy `{s}`"))),
        }
    }
}

/// A document placed in a semantic space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocVector {
    pub doc_id: usize,
    pub components: Vec<f64>,
}

impl DocVector {
    pub fn new(doc_id: usize, components: Vec<f64>) -> Self {
        DocVector { doc_id, components }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }
}

impl AsRef<[f64]> for DocVector {
    fn as_ref(&self) -> &[f64] {
        &self.components
    }
}

/// Field-by-document matrix whose columns are normalized field frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMatrix {
    field_names: Vec<String>,
    doc_ids: Vec<usize>,
    values: Matrix,
    column_mass: Vec<f64>,
}

pub fn build_field_matrix(corpus: &Corpus, lexicon: &Lexicon) -> Result<FieldMatrix> {
    build_field_matrix_with(corpus, lexicon, Polysemy::Full)
}

pub fn build_field_matrix_with(
    corpus: &Corpus,
    lexicon: &Lexicon,
    polysemy: Polysemy,
) -> Result<FieldMatrix> {
    if corpus.is_empty() {
        return Err(Error::InvalidParameter("corpus is empty".into()));
    }
    if lexicon.is_empty() {
        return Err(Error::EmptyLexicon);
    }
    let n_fields = lexicon.n_fields();
    let mut values = Matrix::zeros(n_fields, corpus.len());
    let mut column_mass = Vec::with_capacity(corpus.len());
    for (j, doc) in corpus.documents().iter().enumerate() {
        let column = values.column_mut(j);
        for (token, &count) in &doc.token_counts {
            let fields = lexicon.lookup(token);
            if fields.is_empty() {
                continue;
            }
            let weight = match polysemy {
                Polysemy::Full => count as f64,
                Polysemy::Fractional => count as f64 / fields.len() as f64,
            };
            for field in fields {
                column[field.index()] += weight;
            }
        }
        let mass: f64 = column.iter().sum();
        if mass == 0.0 {
            return Err(Error::EmptySemanticColumn { doc_id: doc.id });
        }
        column.iter_mut().for_each(|x| *x /= mass);
        column_mass.push(mass);
    }
    Ok(FieldMatrix {
        field_names: lexicon.fields().iter().map(|s| s.to_string()).collect(),
        doc_ids: corpus.documents().iter().map(|d| d.id).collect(),
        values,
        column_mass,
    })
}

impl FieldMatrix {
    /// Wraps already-normalized columns. Used for loading and tests.
    pub fn from_parts(
        field_names: Vec<String>,
        doc_ids: Vec<usize>,
        values: Matrix,
        column_mass: Vec<f64>,
    ) -> Result<Self> {
        if values.rows() != field_names.len() {
            return Err(Error::DimensionMismatch {
                expected: field_names.len(),
                actual: values.rows(),
            });
        }
        if values.cols() != doc_ids.len() || column_mass.len() != doc_ids.len() {
            return Err(Error::DimensionMismatch {
                expected: doc_ids.len(),
                actual: values.cols(),
            });
        }
        if values.as_col_major().iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidParameter(
                "matrix entries must be finite and nonnegative".into(),
            ));
        }
        Ok(FieldMatrix {
            field_names,
            doc_ids,
            values,
            column_mass,
        })
    }

    pub fn n_fields(&self) -> usize {
        self.values.rows()
    }

    pub fn n_docs(&self) -> usize {
        self.values.cols()
    }

    pub fn field_names(&self) -> &[String] {
        &self.field_names
    }

    pub fn doc_ids(&self) -> &[usize] {
        &self.doc_ids
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    /// Raw field-hit totals before normalization.
    pub fn column_mass(&self) -> &[f64] {
        &self.column_mass
    }

    pub fn document_vector(&self, j: usize) -> Result<DocVector> {
        if j >= self.n_docs() {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: self.n_docs(),
            });
        }
        Ok(DocVector::new(self.doc_ids[j], self.values.column(j).to_vec()))
    }

    pub fn document_vectors(&self) -> Vec<DocVector> {
        (0..self.n_docs())
            .map(|j| DocVector::new(self.doc_ids[j], self.values.column(j).to_vec()))
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct FieldMatrixJson {
    fields: Vec<String>,
    docs: Vec<usize>,
    columns: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    column_mass: Option<Vec<f64>>,
}

impl Serialize for FieldMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        FieldMatrixJson {
            fields: self.field_names.clone(),
            docs: self.doc_ids.clone(),
            columns: (0..self.n_docs())
                .map(|j| self.values.column(j).to_vec())
                .collect(),
            column_mass: Some(self.column_mass.clone()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FieldMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = FieldMatrixJson::deserialize(deserializer)?;
        let values =
            Matrix::from_columns(raw.fields.len(), &raw.columns).map_err(serde::de::Error::custom)?;
        let mass = raw.column_mass.unwrap_or_else(|| vec![1.0; raw.docs.len()]);
        FieldMatrix::from_parts(raw.fields, raw.docs, values, mass).map_err(serde::de::Error::custom)
    }
}

pub fn euclidean_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            actual: v.len(),
        });
    }
    Ok(squared_distance(u, v).sqrt())
}

pub(crate) fn squared_distance(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;
    use crate::lexicon::{load_plain_lexicon, FieldId};

    fn idx(name: &str) -> usize {
        FieldId::from_name(name).unwrap().index()
    }

    fn corpus(texts: &[&str]) -> Corpus {
        Corpus::from_documents(
            texts
                .iter()
                .enumerate()
                .map(|(i, t)| Document::new(0, "a", format!("{i:03}"), t))
                .collect(),
        )
    }

    #[test]
    fn normalizes_hits() {
        let lex = load_plain_lexicon("noun.animal\tdog\nverb.motion\trun\n".as_bytes()).unwrap();
        let m = build_field_matrix(&corpus(&["dog dog dog run the"]), &lex).unwrap();
        let v = m.document_vector(0).unwrap();
        assert_eq!(v.components[idx("noun.animal")], 0.75);
        assert_eq!(v.components[idx("verb.motion")], 0.25);
        assert_eq!(v.components.iter().filter(|&&x| x != 0.0).count(), 2);
        assert_eq!(m.column_mass(), [4.0]);
        assert_eq!(m.n_fields(), 41);
    }

    #[test]
    fn polysemy_counts_fully() {
        let lex = load_plain_lexicon("noun.act\trun\nverb.motion\trun\n".as_bytes()).unwrap();
        let m = build_field_matrix(&corpus(&["run run"]), &lex).unwrap();
        let v = m.document_vector(0).unwrap();
        assert_eq!(v.components[idx("noun.act")], 0.5);
        assert_eq!(v.components[idx("verb.motion")], 0.5);
        assert_eq!(m.column_mass(), [4.0]);

        let m = build_field_matrix_with(&corpus(&["run run"]), &lex, Polysemy::Fractional).unwrap();
        assert_eq!(m.column_mass(), [2.0]);
        assert_eq!(m.document_vector(0).unwrap().components[idx("noun.act")], 0.5);
    }

    #[test]
    fn unknown_only_document_is_an_error() {
        let lex = load_plain_lexicon("noun.animal\tdog\n".as_bytes()).unwrap();
        assert!(matches!(
            build_field_matrix(&corpus(&["dog", "cat mouse"]), &lex),
            Err(Error::EmptySemanticColumn { doc_id: 1 })
        ));
    }

    #[test]
    fn vector_access() {
        let lex = load_plain_lexicon("noun.animal\tdog\n".as_bytes()).unwrap();
        let m = build_field_matrix(&corpus(&["dog", "dog cat"]), &lex).unwrap();
        assert!(m.document_vector(1).is_ok());
        assert!(matches!(
            m.document_vector(2),
            Err(Error::IndexOutOfRange { index: 2, len: 2 })
        ));
    }

    #[test]
    fn distances() {
        assert_eq!(euclidean_distance(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(euclidean_distance(&[1.5, -2.0], &[1.5, -2.0]).unwrap(), 0.0);
        assert!(euclidean_distance(&[1.0], &[1.0, 2.0]).is_err());
        // Σ (u−v)² = 0.01 + 0.04 + 0.09 + 0.16 = 0.30, checked by hand.
        let d = euclidean_distance(&[0.1, 0.2, 0.3, 0.4], &[0.2, 0.4, 0.6, 0.8]).unwrap();
        assert!((d - 0.3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn json_schema() {
        let lex = load_plain_lexicon("noun.animal\tdog\nverb.motion\trun\n".as_bytes()).unwrap();
        let m = build_field_matrix(&corpus(&["dog run run", "dog"]), &lex).unwrap();
        let text = crate::json::to_string(&m).unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["fields"].as_array().unwrap().len(), 41);
        assert_eq!(value["docs"], serde_json::json!([0, 1]));
        assert_eq!(value["columns"][0].as_array().unwrap().len(), 41);
        let back: FieldMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
    }
}
