use std::collections::HashSet;
use std::io::Read;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::label::Class;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledExample {
    pub id: String,
    pub text: String,
    pub label: Class,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Dataset {
    pub examples: Vec<LabeledExample>,
}

impl Dataset {
    pub fn new(examples: Vec<LabeledExample>) -> Self {
        Self { examples }
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LabeledExample> {
        self.examples.iter()
    }

    /// Examples per class, in CAG/NAG/OAG order.
    pub fn class_counts(&self) -> [usize; 3] {
        let mut counts = [0; 3];
        for e in &self.examples {
            counts[e.label.index()] += 1;
        }
        counts
    }

    pub fn labels(&self) -> Vec<Class> {
        self.examples.iter().map(|e| e.label).collect()
    }
}

const HEADER: [&str; 3] = ["id", "text", "label"];

/// Reads a three-column CSV dataset (`id,text,label`). A header row is
/// skipped only when it is exactly `id,text,label`.
pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(file, path)
}

pub fn parse_dataset<R: Read>(reader: R, path: &Path) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut examples = Vec::new();
    let mut seen = HashSet::new();
    for (n, record) in rdr.records().enumerate() {
        let row = n + 1;
        let record = record.map_err(|e| Error::Format(format!("{}: row {row}: {e}", path.display())))?;
        if row == 1 && record.iter().eq(HEADER.iter().copied()) {
            continue;
        }
        if record.len() != 3 {
            return Err(Error::Format(format!(
                "{}: row {row}: expected 3 columns, found {}",
                path.display(),
                record.len()
            )));
        }
        let label = record[2].parse::<Class>().map_err(|_| {
            Error::InvalidLabel(format!(
                "{}: row {row}: unknown label {:?}",
                path.display(),
                &record[2]
            ))
        })?;
        let id = record[0].to_string();
        if !seen.insert(id.clone()) {
            log::warn!("{}: row {row}: duplicate id {id:?}", path.display());
        }
        examples.push(LabeledExample {
            id,
            text: record[1].to_string(),
            label,
        });
    }
    Ok(Dataset { examples })
}

/// Writes a dataset in the same CSV dialect, with a header row.
pub fn write_dataset(path: &Path, dataset: &Dataset) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let to_err = |e: csv::Error| Error::Format(format!("{}: {e}", path.display()));
    wtr.write_record(HEADER).map_err(to_err)?;
    for e in &dataset.examples {
        wtr.write_record([e.id.as_str(), e.text.as_str(), e.label.as_str()])
            .map_err(to_err)?;
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| Error::io(PathBuf::from(path), e.into_error()))?;
    write_atomic(path, &bytes)
}

/// Original examples followed by the augmented ones.
pub fn merge_datasets(original: &Dataset, augmented: &Dataset) -> Dataset {
    let merged = Dataset {
        examples: original
            .examples
            .iter()
            .chain(&augmented.examples)
            .cloned()
            .collect(),
    };
    let [cag, nag, oag] = merged.class_counts();
    log::info!(
        "merged dataset: {} examples (CAG {cag}, NAG {nag}, OAG {oag})",
        merged.len()
    );
    merged
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Dataset> {
        parse_dataset(text.as_bytes(), Path::new("d.csv"))
    }

    #[test]
    fn single_row() {
        let d = parse("x1,\"hope car occupants are safe and unharmed.\",NAG\n").unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.examples[0].label, Class::Nag);
        assert_eq!(d.examples[0].text, "hope car occupants are safe and unharmed.");
    }

    #[test]
    fn header_skipped_only_on_exact_match() {
        let d = parse("id,text,label\na,hello,CAG\n").unwrap();
        assert_eq!(d.len(), 1);
        assert!(parse("ID,text,label\na,hello,CAG\n").is_err());
    }

    #[test]
    fn bad_rows() {
        match parse("a,ok,NAG\nb,bad,XYZ\n") {
            Err(Error::InvalidLabel(msg)) => assert!(msg.contains("row 2"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
        match parse("a,too,many,NAG\n") {
            Err(Error::Format(msg)) => assert!(msg.contains("row 1")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn quoted_commas_and_newlines() {
        let d = parse("a,\"one, two\nthree\",OAG\n").unwrap();
        assert_eq!(d.examples[0].text, "one, two\nthree");
    }

    #[test]
    fn merge_counts() {
        let a = parse("a,x,NAG\nb,y,CAG\n").unwrap();
        let b = parse("c,z,OAG\n").unwrap();
        let m = merge_datasets(&a, &b);
        assert_eq!(m.len(), 3);
        assert_eq!(m.class_counts(), [1, 1, 1]);
        assert_eq!(m.examples[0].id, "a");
        assert_eq!(merge_datasets(&a, &Dataset::default()), a);
    }

    #[test]
    fn write_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let d = parse("a,\"quote \"\"me\"\", ok\",NAG\n").unwrap();
        let p = dir.path().join("out.csv");
        write_dataset(&p, &d).unwrap();
        assert_eq!(load_dataset(&p).unwrap(), d);
    }
}
