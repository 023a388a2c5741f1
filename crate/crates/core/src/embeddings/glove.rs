use std::collections::BTreeMap;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::preprocess::Vocab;

/// Pretrained vectors for the vocabulary entries found in a GloVe file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Pretrained {
    /// Vocabulary index → vector.
    pub vectors: BTreeMap<usize, Vec<f64>>,
    /// Vector width of the file; `None` for an empty file.
    pub dim: Option<usize>,
}

impl Pretrained {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.vectors.contains_key(&index)
    }
}

/// Reads a GloVe text file (`token v1 … vd` per line) and keeps the vectors
/// of tokens present in `vocab`.
pub fn load_pretrained(path: &Path, vocab: &Vocab) -> Result<Pretrained> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_pretrained(BufReader::new(file), path, vocab)
}

pub fn parse_pretrained<R: BufRead>(reader: R, path: &Path, vocab: &Vocab) -> Result<Pretrained> {
    let mut out = Pretrained::default();
    let parse_err = |line: usize, message: String| Error::Parse {
        path: PathBuf::from(path),
        line,
        message,
    };
    for (n, line) in reader.lines().enumerate() {
        let line_no = n + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let token = fields.next().expect("non-empty line");
        let values = fields
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| parse_err(line_no, format!("invalid number {f:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.is_empty() {
            return Err(parse_err(line_no, format!("token {token:?} has no values")));
        }
        match out.dim {
            None => out.dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(Error::Format(format!(
                    "{}: line {line_no}: expected {d} values, found {}",
                    path.display(),
                    values.len()
                )))
            }
            _ => {}
        }
        if let Some(idx) = vocab.get(token) {
            out.vectors.entry(idx).or_insert(values);
        }
    }
    Ok(out)
}
