//! Fixed pre-trained word vectors.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};

/// Read-only word vectors. Rows are never updated by training.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vocab: HashMap<String, usize>,
    matrix: Array2<f64>,
    duplicates: usize,
}

impl EmbeddingTable {
    /// Builds a table from `(token, vector)` pairs; later duplicates win.
    pub fn from_rows<I>(dim: usize, rows: I) -> Self
    where
        I: IntoIterator<Item = (String, Vec<f64>)>,
    {
        let mut vocab = HashMap::new();
        let mut flat = Vec::new();
        let mut duplicates = 0;
        for (token, v) in rows {
            assert_eq!(
                v.len(),
                dim,
                "embedding row for {token:?} has wrong dimension"
            );
            if let Some(&row) = vocab.get(&token) {
                flat[row * dim..(row + 1) * dim].copy_from_slice(&v);
                duplicates += 1;
            } else {
                vocab.insert(token, flat.len() / dim);
                flat.extend(v);
            }
        }
        let n = flat.len() / dim;
        let matrix = Array2::from_shape_vec((n, dim), flat).expect("row-major shape");
        Self {
            dim,
            vocab,
            matrix,
            duplicates,
        }
    }

    /// Parses `token v1 ... vd` lines. The dimension is taken from the first
    /// line. Duplicate tokens keep the last occurrence and log a warning.
    pub fn parse(text: &str) -> Result<Self> {
        let mut dim = None;
        let mut rows = Vec::new();
        let mut seen: HashMap<String, usize> = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let mut parts = line.split_whitespace();
            let Some(token) = parts.next() else { continue };
            let values = parts
                .map(|p| p.parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| Error::EmbeddingFormat {
                    line: lineno,
                    msg: e.to_string(),
                })?;
            let d = *dim.get_or_insert(values.len());
            if d == 0 {
                return Err(Error::EmbeddingFormat {
                    line: lineno,
                    msg: "no vector values".into(),
                });
            }
            if values.len() != d {
                return Err(Error::EmbeddingFormat {
                    line: lineno,
                    msg: format!("expected {d} values, found {}", values.len()),
                });
            }
            if let Some(prev) = seen.insert(token.to_string(), lineno) {
                log::warn!("duplicate embedding token {token:?} at line {lineno} (first at {prev}); keeping the last");
            }
            rows.push((token.to_string(), values));
        }
        let dim = dim.ok_or(Error::EmptyEmbeddings)?;
        Ok(Self::from_rows(dim, rows))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of lines that overwrote an earlier token.
    pub fn duplicates(&self) -> usize {
        self.duplicates
    }

    pub fn get(&self, token: &str) -> Option<ArrayView1<'_, f64>> {
        self.vocab.get(token).map(|&r| self.matrix.row(r))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.vocab.contains_key(token)
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    /// Maps tokens to a `d × s` matrix, one column per token. Unknown tokens
    /// become zero columns.
    pub fn embed_sentence(&self, tokens: &[String]) -> Array2<f64> {
        assert!(!tokens.is_empty(), "cannot embed an empty sentence");
        let mut m = Array2::zeros((self.dim, tokens.len()));
        for (j, t) in tokens.iter().enumerate() {
            if let Some(v) = self.get(t) {
                m.column_mut(j).assign(&v);
            }
        }
        m
    }

    /// Sum of the word vectors of a sentence; unknown tokens add nothing.
    pub fn sum_vector(&self, tokens: &[String]) -> ndarray::Array1<f64> {
        let mut v = ndarray::Array1::zeros(self.dim);
        for t in tokens {
            if let Some(row) = self.get(t) {
                v += &row;
            }
        }
        v
    }
}
