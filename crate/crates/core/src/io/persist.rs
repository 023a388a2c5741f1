//! Manifest + blob persistence.
//!
//! A saved directory holds `manifest.toml` and `weights.bin`. The blob is the
//! concatenation of every tensor, little-endian `f64`, row-major, in the order
//! listed by the manifest's tensor directory. The manifest also records the
//! blob's SHA-256 and the hashes of the text artifacts stored next to it.
//!
//! Model directories additionally contain `vocab.txt`, `stopwords.txt`,
//! `emoji_ranges.txt` and, for trigram models, `trigram_vocab.txt`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embeddings::{EmbeddingMatrix, EmbeddingSource};
use crate::error::{Error, Result};
use crate::io::StagedDir;
use crate::label::Class;
use crate::model::{EnsembleConfig, Model};
use crate::preprocess::{sha256_hex, ArtifactHashes, Cleaner, EmojiRanges, Stopwords, TextPipeline, Vocab};
use crate::rng::Rng;
use crate::tensor::Tensor;

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.toml";
pub const WEIGHTS_FILE: &str = "weights.bin";
const DTYPE_F64_LE: &str = "f64le";

const VOCAB_FILE: &str = "vocab.txt";
const TRIGRAM_VOCAB_FILE: &str = "trigram_vocab.txt";
const STOPWORDS_FILE: &str = "stopwords.txt";
const EMOJI_FILE: &str = "emoji_ranges.txt";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub dtype: String,
    pub shape: Vec<usize>,
    pub offset: u64,
    pub length: u64,
    pub trainable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlobInfo {
    pub file: String,
    pub length: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    /// `model` or `embedding`.
    pub kind: String,
    pub class_order: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding_source: Option<EmbeddingSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_len: Option<usize>,
    pub blob: BlobInfo,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hashes: Option<ArtifactHashes>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<EnsembleConfig>,
    pub tensors: Vec<TensorEntry>,
}

/// One named tensor to store.
pub struct ArchiveEntry<'a> {
    pub name: &'a str,
    pub tensor: &'a Tensor,
    pub trainable: bool,
}

fn class_order() -> Vec<String> {
    Class::ALL.iter().map(|c| c.as_str().to_string()).collect()
}

/// Serialises tensors into a blob and the matching directory.
pub fn write_archive(entries: &[ArchiveEntry<'_>]) -> (Vec<u8>, Vec<TensorEntry>, BlobInfo) {
    let total: usize = entries.iter().map(|e| e.tensor.len() * 8).sum();
    let mut blob = Vec::with_capacity(total);
    let mut dir = Vec::with_capacity(entries.len());
    for e in entries {
        let offset = blob.len() as u64;
        for v in e.tensor.data() {
            blob.extend_from_slice(&v.to_le_bytes());
        }
        dir.push(TensorEntry {
            name: e.name.to_string(),
            dtype: DTYPE_F64_LE.into(),
            shape: e.tensor.shape().to_vec(),
            offset,
            length: blob.len() as u64 - offset,
            trainable: e.trainable,
        });
    }
    let info = BlobInfo {
        file: WEIGHTS_FILE.into(),
        length: blob.len() as u64,
        sha256: sha256_hex(&blob),
    };
    (blob, dir, info)
}

fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    // Check the version before trusting the rest of the schema.
    #[derive(Deserialize)]
    struct VersionOnly {
        format_version: u32,
    }
    let v: VersionOnly =
        toml::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    if v.format_version != FORMAT_VERSION {
        return Err(Error::Version {
            found: v.format_version,
            expected: FORMAT_VERSION,
        });
    }
    toml::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

/// Reads and verifies the manifest and blob of a saved directory.
pub fn read_archive(dir: &Path) -> Result<(Manifest, Vec<Tensor>)> {
    let manifest = read_manifest(dir)?;
    let blob_path = dir.join(&manifest.blob.file);
    let blob = std::fs::read(&blob_path).map_err(|e| Error::io(&blob_path, e))?;
    if (blob.len() as u64) < manifest.blob.length {
        return Err(Error::TruncatedBlob {
            path: blob_path,
            expected: manifest.blob.length,
            found: blob.len() as u64,
        });
    }
    if blob.len() as u64 != manifest.blob.length {
        return Err(Error::Format(format!(
            "{}: {} bytes, manifest says {}",
            blob_path.display(),
            blob.len(),
            manifest.blob.length
        )));
    }
    let found = sha256_hex(&blob);
    if found != manifest.blob.sha256 {
        return Err(Error::HashMismatch {
            what: blob_path.display().to_string(),
            expected: manifest.blob.sha256.clone(),
            found,
        });
    }
    let mut spans: Vec<(u64, u64)> = manifest.tensors.iter().map(|t| (t.offset, t.length)).collect();
    spans.sort_unstable();
    for w in spans.windows(2) {
        if w[0].0 + w[0].1 > w[1].0 {
            return Err(Error::Format("tensor directory has overlapping entries".into()));
        }
    }
    let mut tensors = Vec::with_capacity(manifest.tensors.len());
    for entry in &manifest.tensors {
        if entry.dtype != DTYPE_F64_LE {
            return Err(Error::Format(format!("tensor {}: unsupported dtype {}", entry.name, entry.dtype)));
        }
        let n: usize = entry.shape.iter().product();
        let end = entry.offset.checked_add(entry.length).filter(|&e| e <= manifest.blob.length);
        if end.is_none() || entry.length != n as u64 * 8 {
            return Err(Error::Format(format!(
                "tensor {}: span {}+{} invalid for shape {:?}",
                entry.name, entry.offset, entry.length, entry.shape
            )));
        }
        let bytes = &blob[entry.offset as usize..(entry.offset + entry.length) as usize];
        let data = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        tensors.push(Tensor::new(entry.shape.clone(), data)?);
    }
    Ok((manifest, tensors))
}

fn manifest_text(manifest: &Manifest) -> Result<String> {
    toml::to_string(manifest).map_err(|e| Error::Format(format!("cannot serialise manifest: {e}")))
}

/// Saves a model together with the text artifacts it was trained with.
pub fn save_model(model: &Model, pipeline: &TextPipeline, dir: &Path) -> Result<()> {
    let entries: Vec<ArchiveEntry<'_>> = model
        .params
        .iter()
        .map(|(_, p)| ArchiveEntry {
            name: &p.name,
            tensor: &p.value,
            trainable: p.trainable,
        })
        .collect();
    let (blob, tensors, blob_info) = write_archive(&entries);
    let hashes = pipeline.hashes();
    if let Some(trained) = &model.artifact_hashes {
        if trained != &hashes {
            return Err(Error::IncompatibleArtifacts(
                "model was trained with different text artifacts than the ones being saved".into(),
            ));
        }
    }
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        kind: "model".into(),
        class_order: class_order(),
        embedding_source: None,
        max_len: Some(pipeline.max_len),
        blob: blob_info,
        hashes: Some(hashes),
        config: Some(model.config.clone()),
        tensors,
    };
    let staged = StagedDir::new(dir)?;
    staged.write(WEIGHTS_FILE, &blob)?;
    staged.write(VOCAB_FILE, pipeline.vocab.to_text().as_bytes())?;
    if let Some(tv) = &pipeline.trigram_vocab {
        staged.write(TRIGRAM_VOCAB_FILE, tv.to_text().as_bytes())?;
    }
    staged.write(STOPWORDS_FILE, pipeline.cleaner.stopwords.source().as_bytes())?;
    staged.write(EMOJI_FILE, pipeline.cleaner.emoji.source().as_bytes())?;
    staged.write(MANIFEST_FILE, manifest_text(&manifest)?.as_bytes())?;
    staged.commit()
}

fn read_verified(dir: &Path, file: &str, expected: &str) -> Result<String> {
    let path = dir.join(file);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let found = sha256_hex(text.as_bytes());
    if found != expected {
        return Err(Error::HashMismatch {
            what: path.display().to_string(),
            expected: expected.to_string(),
            found,
        });
    }
    Ok(text)
}

/// Loads a model directory written by [`save_model`].
pub fn load_model(dir: &Path) -> Result<(Model, TextPipeline)> {
    let (manifest, tensors) = read_archive(dir)?;
    if manifest.kind != "model" {
        return Err(Error::Format(format!("{} holds a {}, not a model", dir.display(), manifest.kind)));
    }
    if manifest.class_order != class_order() {
        return Err(Error::Format(format!("unexpected class order {:?}", manifest.class_order)));
    }
    let config = manifest
        .config
        .clone()
        .ok_or_else(|| Error::Format("model manifest has no config".into()))?;
    let hashes = manifest
        .hashes
        .clone()
        .ok_or_else(|| Error::Format("model manifest has no artifact hashes".into()))?;

    let vocab = Vocab::parse(&read_verified(dir, VOCAB_FILE, &hashes.vocab)?)?;
    let trigram_vocab = match &hashes.trigram_vocab {
        Some(h) => Some(Vocab::parse(&read_verified(dir, TRIGRAM_VOCAB_FILE, h)?)?),
        None => None,
    };
    let stopwords = Stopwords::parse(&read_verified(dir, STOPWORDS_FILE, &hashes.stopwords)?);
    let emoji = EmojiRanges::parse(&read_verified(dir, EMOJI_FILE, &hashes.emoji_ranges)?)?;
    let pipeline = TextPipeline::new(Cleaner::new(stopwords, emoji), vocab, trigram_vocab)
        .with_max_len(manifest.max_len.unwrap_or(config.max_len));

    let by_name: BTreeMap<&str, (&TensorEntry, &Tensor)> = manifest
        .tensors
        .iter()
        .zip(&tensors)
        .map(|(e, t)| (e.name.as_str(), (e, t)))
        .collect();
    let mut shapes = BTreeMap::new();
    for source in config.sources() {
        let name = format!("embedding.{source}");
        let (_, t) = by_name
            .get(name.as_str())
            .ok_or_else(|| Error::Format(format!("blob has no tensor {name}")))?;
        shapes.insert(source, (t.rows(), t.cols()));
    }
    let mut model = Model::skeleton(config, &shapes, &mut Rng::new(0))?;
    if model.params.len() != manifest.tensors.len() {
        return Err(Error::Format(format!(
            "config implies {} tensors, blob has {}",
            model.params.len(),
            manifest.tensors.len()
        )));
    }
    for (_, param) in model.params.iter_mut() {
        let (entry, t) = by_name
            .get(param.name.as_str())
            .ok_or_else(|| Error::Format(format!("blob has no tensor {}", param.name)))?;
        if t.shape() != param.value.shape() {
            return Err(Error::Format(format!(
                "tensor {}: shape {:?}, config expects {:?}",
                param.name,
                t.shape(),
                param.value.shape()
            )));
        }
        param.value = (*t).clone();
        param.trainable = entry.trainable;
    }
    model.artifact_hashes = Some(hashes);
    Ok((model, pipeline))
}

/// Saves one embedding table with the vocabulary that indexes it.
pub fn save_embeddings(matrix: &EmbeddingMatrix, vocab: &Vocab, dir: &Path) -> Result<()> {
    if matrix.rows() != vocab.len() {
        return Err(Error::shape(
            "save_embeddings",
            format!("{} rows for a vocabulary of {}", matrix.rows(), vocab.len()),
        ));
    }
    let name = format!("embedding.{}", matrix.source);
    let (blob, tensors, blob_info) = write_archive(&[ArchiveEntry {
        name: &name,
        tensor: &matrix.matrix,
        trainable: matrix.trainable,
    }]);
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        kind: "embedding".into(),
        class_order: class_order(),
        embedding_source: Some(matrix.source),
        max_len: None,
        blob: blob_info,
        hashes: None,
        config: None,
        tensors,
    };
    let staged = StagedDir::new(dir)?;
    staged.write(WEIGHTS_FILE, &blob)?;
    staged.write(VOCAB_FILE, vocab.to_text().as_bytes())?;
    staged.write(MANIFEST_FILE, manifest_text(&manifest)?.as_bytes())?;
    staged.commit()
}

pub fn load_embeddings(dir: &Path) -> Result<(EmbeddingMatrix, Vocab)> {
    let (manifest, mut tensors) = read_archive(dir)?;
    let source = match (&*manifest.kind, manifest.embedding_source) {
        ("embedding", Some(s)) => s,
        _ => return Err(Error::Format(format!("{} is not an embedding directory", dir.display()))),
    };
    if tensors.len() != 1 {
        return Err(Error::Format("embedding blob must hold exactly one tensor".into()));
    }
    let vocab = Vocab::load(&dir.join(VOCAB_FILE))?;
    let matrix = EmbeddingMatrix::new(tensors.remove(0), manifest.tensors[0].trainable, source)?;
    if matrix.rows() != vocab.len() {
        return Err(Error::IncompatibleArtifacts(format!(
            "{}: {} rows but vocabulary has {} entries",
            dir.display(),
            matrix.rows(),
            vocab.len()
        )));
    }
    Ok((matrix, vocab))
}
