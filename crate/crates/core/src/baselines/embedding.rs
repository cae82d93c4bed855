use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::{Error, Result, Scalar};

const MAGIC: &[u8; 8] = b"LSCDEMB\0";
const VERSION: u32 = 1;

/// Type-based embedding space: one row per vocabulary entry.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix<T> {
    vocab: Vec<String>,
    index: HashMap<String, usize>,
    /// Row-major, `vocab.len() * dim` entries.
    data: Vec<T>,
    dim: usize,
}

impl<T: Scalar> EmbeddingMatrix<T> {
    pub fn new(vocab: Vec<String>, dim: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != vocab.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: vocab.len() * dim,
                actual: data.len(),
            });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::precondition("embedding contains non-finite entries"));
        }
        let mut index = HashMap::with_capacity(vocab.len());
        for (i, w) in vocab.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::Integrity(format!("duplicate vocabulary entry `{w}`")));
            }
        }
        Ok(Self { vocab, index, data, dim })
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn get(&self, word: &str) -> Option<&[T]> {
        self.index_of(word).map(|i| self.row(i))
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }
}

fn vocab_path(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".vocab");
    PathBuf::from(p)
}

/// Binary layout, all little-endian: 8-byte magic `LSCDEMB\0`, `u32`
/// version (1), `u32` bytes per value (4 = f32, 8 = f64), `u64` rows,
/// `u64` dim, then `rows * dim` values row-major. The vocabulary is a
/// sidecar `<path>.vocab` with one word per line in row order.
pub fn write_embeddings<T: Scalar>(path: impl AsRef<Path>, emb: &EmbeddingMatrix<T>) -> Result<()> {
    let path = path.as_ref();
    let width = std::mem::size_of::<T>() as u32;
    let mut buf = Vec::with_capacity(32 + emb.data.len() * width as usize);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&width.to_le_bytes());
    buf.extend_from_slice(&(emb.len() as u64).to_le_bytes());
    buf.extend_from_slice(&(emb.dim as u64).to_le_bytes());
    for &x in &emb.data {
        if width == 4 {
            buf.extend_from_slice(&(x.to_f64_lossy() as f32).to_le_bytes());
        } else {
            buf.extend_from_slice(&x.to_f64_lossy().to_le_bytes());
        }
    }
    std::fs::File::create(path)?.write_all(&buf)?;
    let mut vocab = emb.vocab.join("\n");
    vocab.push('\n');
    std::fs::write(vocab_path(path), vocab)?;
    Ok(())
}

pub fn read_embeddings<T: Scalar>(path: impl AsRef<Path>) -> Result<EmbeddingMatrix<T>> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let bad = |msg: &str| Error::Integrity(format!("{}: {msg}", path.display()));
    if bytes.len() < 32 || &bytes[..8] != MAGIC {
        return Err(bad("not an lscd embedding file"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    if u32_at(8) != VERSION {
        return Err(bad("unsupported version"));
    }
    let width = u32_at(12) as usize;
    if width != 4 && width != 8 {
        return Err(bad("unsupported value width"));
    }
    let rows = u64_at(16) as usize;
    let dim = u64_at(24) as usize;
    let body = &bytes[32..];
    if body.len() != rows * dim * width {
        return Err(bad("truncated value block"));
    }
    let data: Vec<T> = body
        .chunks_exact(width)
        .map(|c| {
            if width == 4 {
                T::of(f32::from_le_bytes(c.try_into().unwrap()) as f64)
            } else {
                T::of(f64::from_le_bytes(c.try_into().unwrap()))
            }
        })
        .collect();
    let vocab: Vec<String> = std::fs::read_to_string(vocab_path(path))?
        .lines()
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect();
    if vocab.len() != rows {
        return Err(bad("vocabulary sidecar does not match row count"));
    }
    EmbeddingMatrix::new(vocab, dim, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.bin");
        let emb = EmbeddingMatrix::new(vec!["a".into(), "b".into()], 3, vec![1.0, -2.5, 0.125, 4.0, 5.0, 6.0]).unwrap();
        write_embeddings(&path, &emb).unwrap();
        let back: EmbeddingMatrix<f64> = read_embeddings(&path).unwrap();
        assert_eq!(back, emb);
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[..8], b"LSCDEMB\0");
        assert_eq!(bytes.len(), 32 + 6 * 8);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(EmbeddingMatrix::<f64>::new(vec!["a".into()], 2, vec![1.0]).is_err());
        assert!(EmbeddingMatrix::<f64>::new(vec!["a".into()], 1, vec![f64::NAN]).is_err());
    }
}
