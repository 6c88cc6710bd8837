//! Word-vector text format loader.
//!
//! The first line is `count dim`; every following line is a token and
//! `dim` space-separated reals.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::numkernel::{SeededRng, Tensor};
use crate::scalar::Scalar;

use super::vocab::{Vocabulary, PAD};

#[derive(Debug, Clone)]
pub struct EmbeddingTable<T> {
    /// `|V| × d_w`.
    pub table: Tensor<T>,
    /// Vocabulary rows copied from the file.
    pub covered: usize,
    /// Rows drawn at random (everything except `<pad>` and covered rows).
    pub random_rows: usize,
    /// Tokens that appeared more than once; the last occurrence was kept.
    pub duplicates: Vec<String>,
}

/// Uniform in `[-0.25, 0.25] / d_w` for every row, zero for `<pad>`.
pub fn random_embeddings<T: Scalar>(vocab: &Vocabulary, d_w: usize, rng: &mut SeededRng) -> Tensor<T> {
    let scale = 1.0 / d_w as f64;
    let mut t = Tensor::zeros(&[vocab.len(), d_w]);
    for r in 0..vocab.len() {
        let row = t.row_mut(r);
        for x in row.iter_mut() {
            let u = rng.uniform_in(-0.25, 0.25) * scale;
            *x = if r as u32 == PAD { T::zero() } else { T::from_f64_lossy(u) };
        }
    }
    t
}

pub fn load_embeddings<T: Scalar>(
    path: &Path,
    vocab: &Vocabulary,
    d_w: usize,
    rng: &mut SeededRng,
) -> Result<EmbeddingTable<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_embeddings(BufReader::new(file), &path.display().to_string(), vocab, d_w, rng)
}

/// Parses embeddings from any reader; `source` names it in error messages.
pub fn read_embeddings<T: Scalar, R: BufRead>(
    reader: R,
    source: &str,
    vocab: &Vocabulary,
    d_w: usize,
    rng: &mut SeededRng,
) -> Result<EmbeddingTable<T>> {
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: source.to_string(),
        line,
        msg,
    };
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(l) => l.map_err(|e| Error::io(source, e))?,
        None => return Err(parse_err(1, "missing `count dim` header".into())),
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (count, dim) = match fields.as_slice() {
        [c, d] => (
            c.parse::<usize>()
                .map_err(|_| parse_err(1, format!("bad count `{c}`")))?,
            d.parse::<usize>()
                .map_err(|_| parse_err(1, format!("bad dimension `{d}`")))?,
        ),
        _ => return Err(parse_err(1, format!("expected `count dim`, got `{header}`"))),
    };
    if dim != d_w {
        return Err(Error::dim("load_embeddings", &[dim], &[d_w]));
    }

    // Random rows are drawn for the whole table first so the draw sequence
    // does not depend on file coverage.
    let mut table = random_embeddings::<T>(vocab, d_w, rng);
    let mut seen: HashSet<u32> = HashSet::new();
    let mut duplicates = Vec::new();
    let mut rows = 0usize;

    for (n, line) in lines.enumerate() {
        let lineno = n + 2;
        let line = line.map_err(|e| Error::io(source, e))?;
        if line.trim().is_empty() {
            continue;
        }
        rows += 1;
        let mut parts = line.split_whitespace();
        let token = parts.next().expect("non-empty line has a first field");
        let values: Vec<f64> = parts
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| parse_err(lineno, format!("bad value `{v}`")))
            })
            .collect::<Result<_>>()?;
        if values.len() != dim {
            return Err(parse_err(
                lineno,
                format!("expected {dim} values for `{token}`, found {}", values.len()),
            ));
        }
        if !vocab.contains(token) {
            continue;
        }
        let id = vocab.lookup(token);
        if !seen.insert(id) {
            log::warn!("{source}:{lineno}: duplicate vector for `{token}`, keeping the last one");
            duplicates.push(token.to_string());
        }
        for (dst, v) in table.row_mut(id as usize).iter_mut().zip(values) {
            *dst = T::from_f64_lossy(v);
        }
    }
    if rows != count {
        log::warn!("{source}: header announces {count} vectors, found {rows}");
    }
    let covered = seen.len();
    let random_rows = vocab.len() - covered - usize::from(!seen.contains(&PAD));
    Ok(EmbeddingTable {
        table,
        covered,
        random_rows,
        duplicates,
    })
}
