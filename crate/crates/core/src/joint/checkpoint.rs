use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::numkernel::{ParamId, ParamStore, Tensor};
use crate::path_encoder::PathEncoder;
use crate::scalar::Scalar;
use crate::text_encoder::{EncoderConfig, EncoderParams, TextEncoder};

use super::model::{Model, ModelDims, Net};

pub const MAGIC: &[u8; 4] = b"PNRE";
pub const VERSION: u32 = 1;

/// Tensor names in file order; the store registers them in this order too.
pub const TENSOR_ORDER: [&str; 8] = [
    "word_emb", "pos_head", "pos_tail", "conv_w", "conv_b", "cls_u", "cls_v", "rel_emb",
];

fn tensor_shapes(d: &ModelDims) -> [Vec<usize>; 8] {
    let input = d.d_w + 2 * d.d_p;
    let pos = 2 * d.pos_clip + 1;
    [
        vec![d.vocab_size, d.d_w],
        vec![pos, d.d_p],
        vec![pos, d.d_p],
        vec![d.d_c, d.window * input],
        vec![d.d_c],
        vec![d.n_rel, d.d_c],
        vec![d.n_rel],
        vec![d.n_rel, d.d_rel],
    ]
}

/// Serializes `model`: magic, version, dims, f32 tensors, vocabulary hash.
pub fn encode_checkpoint<T: Scalar>(model: &Model<T>) -> Result<Vec<u8>> {
    let dims = model.dims();
    let ids: Vec<ParamId> = model.store.ids().collect();
    if ids.len() != TENSOR_ORDER.len() || ids.iter().zip(TENSOR_ORDER).any(|(&id, n)| model.store.name(id) != n) {
        return Err(Error::Internal("parameter store is not in checkpoint order".into()));
    }
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for d in dims.as_array() {
        let d = u32::try_from(d).map_err(|_| Error::Format(format!("dimension {d} exceeds u32")))?;
        out.extend_from_slice(&d.to_le_bytes());
    }
    for id in ids {
        for &x in model.store.value(id).data() {
            out.extend_from_slice(&x.to_f32_lossy().to_le_bytes());
        }
    }
    out.extend_from_slice(&model.vocab_hash.to_le_bytes());
    Ok(out)
}

/// Writes atomically: a temporary sibling file is renamed over `path`.
pub fn save_checkpoint<T: Scalar>(model: &Model<T>, path: &Path) -> Result<()> {
    let bytes = encode_checkpoint(model)?;
    let mut tmp_name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize, what: &str) -> Result<&[u8]> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            Error::Corruption(format!(
                "truncated while reading {what} at byte {} ({} bytes total)",
                self.at,
                self.bytes.len()
            ))
        })?;
        let s = &self.bytes[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }
}

/// Parses a checkpoint. Nothing is returned unless the whole file is valid.
pub fn decode_checkpoint<T: Scalar>(bytes: &[u8]) -> Result<Model<T>> {
    if bytes.len() < 8 {
        return Err(Error::Corruption(format!("file too short ({} bytes)", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format("missing PNRE magic".into()));
    }
    let mut rd = Reader { bytes, at: 4 };
    let version = rd.u32("version")?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}, expected {VERSION}")));
    }
    let mut d = [0usize; 8];
    for x in d.iter_mut() {
        *x = rd.u32("dimensions")? as usize;
    }
    let dims = ModelDims {
        d_w: d[0],
        d_p: d[1],
        d_c: d[2],
        window: d[3],
        n_rel: d[4],
        d_rel: d[5],
        vocab_size: d[6],
        pos_clip: d[7],
    };
    if d.contains(&0) {
        return Err(Error::Corruption(format!("zero dimension in {d:?}")));
    }
    let shapes = tensor_shapes(&dims);
    let floats: usize = shapes.iter().map(|s| s.iter().product::<usize>()).sum();
    let expected = 8 + 32 + floats.saturating_mul(4) + 8;
    if bytes.len() != expected {
        return Err(Error::Corruption(format!(
            "size {} does not match the {expected} bytes implied by dims {d:?}",
            bytes.len()
        )));
    }

    let mut store = ParamStore::new();
    for (name, shape) in TENSOR_ORDER.iter().zip(&shapes) {
        let n: usize = shape.iter().product();
        let raw = rd.take(4 * n, name)?;
        let data: Vec<T> = raw
            .chunks_exact(4)
            .map(|c| <T as Scalar>::from_f32(f32::from_le_bytes(c.try_into().expect("4 bytes"))))
            .collect();
        store.add(*name, Tensor::from_vec(shape, data)?);
    }
    let hash = u64::from_le_bytes(rd.take(8, "vocabulary hash")?.try_into().expect("8 bytes"));

    let cfg = EncoderConfig {
        d_w: dims.d_w,
        d_p: dims.d_p,
        d_c: dims.d_c,
        window: dims.window,
        n_rel: dims.n_rel,
        pos_clip: dims.pos_clip,
    };
    let net = Net {
        encoder: TextEncoder {
            cfg,
            ids: EncoderParams {
                word: ParamId(0),
                pos_head: ParamId(1),
                pos_tail: ParamId(2),
                conv_w: ParamId(3),
                conv_b: ParamId(4),
                cls_u: ParamId(5),
                cls_v: ParamId(6),
            },
        },
        path: PathEncoder {
            n_rel: dims.n_rel,
            d_rel: dims.d_rel,
            rel_emb: ParamId(7),
        },
    };
    Ok(Model {
        net,
        store,
        vocab_hash: hash,
    })
}

pub fn load_checkpoint<T: Scalar>(path: &Path) -> Result<Model<T>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes)
}
