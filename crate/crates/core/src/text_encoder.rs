//! Convolutional sentence encoder and sentence-level relation classifier,
//! with bag-level (multi-instance) scoring.
//!
//! Forward: token rows `[word ; head-offset ; tail-offset]` → sliding-window
//! convolution over `l + k - 1` zero-padded windows → column-wise max and
//! `tanh` → `softmax(U s + v)`. Backward routes gradients through the cached
//! pooling argmax rows only.

use crate::corpus::EncodedSentence;
use crate::error::{Error, Result};
use crate::numkernel::{
    affine_into, dropout_mask, softmax_backward, softmax_in_place, DropoutMode, GradBuffer,
    ParamId, ParamStore, ParamView, SeededRng, Tensor,
};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncoderConfig {
    pub d_w: usize,
    pub d_p: usize,
    pub d_c: usize,
    pub window: usize,
    pub n_rel: usize,
    pub pos_clip: usize,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            d_w: 50,
            d_p: 5,
            d_c: 230,
            window: 3,
            n_rel: 2,
            pos_clip: 30,
        }
    }
}

impl EncoderConfig {
    /// Width of one token row, `d_w + 2 d_p`.
    pub fn input_dim(&self) -> usize {
        self.d_w + 2 * self.d_p
    }

    pub fn pos_rows(&self) -> usize {
        2 * self.pos_clip + 1
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("d_w", self.d_w),
            ("d_p", self.d_p),
            ("d_c", self.d_c),
            ("window", self.window),
            ("n_rel", self.n_rel),
            ("pos_clip", self.pos_clip),
        ];
        let bad: Vec<String> = fields
            .iter()
            .filter(|(_, v)| *v == 0)
            .map(|(k, _)| format!("{k} must be positive"))
            .collect();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(bad))
        }
    }

    /// Row of the position table for token `i` relative to `anchor`.
    #[inline]
    pub fn pos_index(&self, i: usize, anchor: usize) -> usize {
        let c = self.pos_clip as i64;
        let off = (i as i64 - anchor as i64).clamp(-c, c);
        (off + c) as usize
    }
}

/// Where the encoder's tensors live inside a [`ParamStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncoderParams {
    pub word: ParamId,
    pub pos_head: ParamId,
    pub pos_tail: ParamId,
    pub conv_w: ParamId,
    pub conv_b: ParamId,
    pub cls_u: ParamId,
    pub cls_v: ParamId,
}

/// `U(-a, a)` with `a = sqrt(6 / (fan_in + fan_out))`.
pub(crate) fn glorot<T: Scalar>(rows: usize, cols: usize, rng: &mut SeededRng) -> Tensor<T> {
    let a = (6.0 / (rows + cols) as f64).sqrt();
    uniform(&[rows, cols], a, rng)
}

pub(crate) fn uniform<T: Scalar>(shape: &[usize], a: f64, rng: &mut SeededRng) -> Tensor<T> {
    let n = shape.iter().product();
    let data = (0..n).map(|_| T::from_f64_lossy(rng.uniform_in(-a, a))).collect();
    Tensor::from_vec(shape, data).expect("length matches shape")
}

/// Pooled sentence vector with the argmax row of every column.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceRepr<T> {
    pub s: Vec<T>,
    pub argmax: Vec<usize>,
}

/// Everything the backward pass needs from one sentence's forward pass.
#[derive(Debug, Clone)]
pub struct SentenceForward<T> {
    pub words: Vec<u32>,
    pub head_pos: usize,
    pub tail_pos: usize,
    /// `l × d` token rows.
    pub input: Vec<T>,
    pub repr: SentenceRepr<T>,
    /// Dropout mask applied to `s`; `None` at test time.
    pub mask: Option<Vec<T>>,
    pub probs: Vec<T>,
}

impl<T: Scalar> SentenceForward<T> {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BagMode {
    #[default]
    Max,
    Rand,
}

/// Text encoder: configuration plus parameter locations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TextEncoder {
    pub cfg: EncoderConfig,
    pub ids: EncoderParams,
}

impl TextEncoder {
    /// Registers freshly initialized encoder tensors in `store`. The word
    /// table is taken as given (loaded or random).
    pub fn register<T: Scalar>(
        cfg: EncoderConfig,
        word_table: Tensor<T>,
        store: &mut ParamStore<T>,
        rng: &mut SeededRng,
    ) -> Result<Self> {
        cfg.validate()?;
        if word_table.shape().len() != 2 || word_table.shape()[1] != cfg.d_w {
            return Err(Error::dim("word table", word_table.shape(), &[cfg.d_w]));
        }
        let d = cfg.input_dim();
        let word = store.add("word_emb", word_table);
        let pos_head = store.add("pos_head", uniform(&[cfg.pos_rows(), cfg.d_p], 0.01, rng));
        let pos_tail = store.add("pos_tail", uniform(&[cfg.pos_rows(), cfg.d_p], 0.01, rng));
        let conv_w = store.add("conv_w", glorot(cfg.d_c, cfg.window * d, rng));
        let conv_b = store.add("conv_b", Tensor::zeros(&[cfg.d_c]));
        let cls_u = store.add("cls_u", glorot(cfg.n_rel, cfg.d_c, rng));
        let cls_v = store.add("cls_v", Tensor::zeros(&[cfg.n_rel]));
        Ok(TextEncoder {
            cfg,
            ids: EncoderParams {
                word,
                pos_head,
                pos_tail,
                conv_w,
                conv_b,
                cls_u,
                cls_v,
            },
        })
    }

    /// Token rows `[W_E[w_i] ; P_h[clip(i - head)] ; P_t[clip(i - tail)]]`.
    /// Unknown word ids fall back to `<unk>`.
    pub fn embed_tokens<T: Scalar>(&self, sent: &EncodedSentence, params: ParamView<'_, T>) -> Tensor<T> {
        let cfg = &self.cfg;
        let d = cfg.input_dim();
        let words = params.get(self.ids.word);
        let ph = params.get(self.ids.pos_head);
        let pt = params.get(self.ids.pos_tail);
        let mut out = Vec::with_capacity(sent.words.len() * d);
        for (i, &w) in sent.words.iter().enumerate() {
            let w = if (w as usize) < words.rows() { w } else { crate::corpus::UNK };
            out.extend_from_slice(words.row(w as usize));
            out.extend_from_slice(ph.row(cfg.pos_index(i, sent.head_pos)));
            out.extend_from_slice(pt.row(cfg.pos_index(i, sent.tail_pos)));
        }
        Tensor::matrix(sent.words.len(), d, out).expect("rows of width d")
    }

    /// Convolution over `l + k - 1` windows, out-of-range rows read as zeros.
    /// Returns an `(l + k - 1) × d_c` matrix.
    pub fn conv_forward<T: Scalar>(&self, input: &[T], len: usize, params: ParamView<'_, T>) -> Vec<T> {
        let (k, d, dc) = (self.cfg.window, self.cfg.input_dim(), self.cfg.d_c);
        let w = params.get(self.ids.conv_w).data();
        let b = params.get(self.ids.conv_b).data();
        let n_out = len + k - 1;
        let mut h = vec![T::zero(); n_out * dc];
        for i in 0..n_out {
            let out = &mut h[i * dc..(i + 1) * dc];
            out.copy_from_slice(b);
            for j in 0..k {
                // window slot j reads token row i + j - (k - 1)
                let Some(r) = (i + j).checked_sub(k - 1).filter(|&r| r < len) else {
                    continue;
                };
                let x = &input[r * d..(r + 1) * d];
                for (c, o) in out.iter_mut().enumerate() {
                    let wrow = &w[c * k * d + j * d..c * k * d + (j + 1) * d];
                    let mut acc = T::zero();
                    for (&a, &bb) in wrow.iter().zip(x) {
                        acc += a * bb;
                    }
                    *o += acc;
                }
            }
        }
        h
    }

    /// Full forward pass of one sentence. `dropout` carries the generator
    /// and keep probability in training mode.
    pub fn forward<T: Scalar>(
        &self,
        sent: &EncodedSentence,
        params: ParamView<'_, T>,
        dropout: Option<(&mut SeededRng, f64)>,
    ) -> Result<SentenceForward<T>> {
        if sent.words.is_empty() {
            return Err(Error::Argument("cannot encode an empty sentence".into()));
        }
        let input = self.embed_tokens(sent, params);
        let len = sent.words.len();
        let h = self.conv_forward(input.data(), len, params);
        let repr = pool_tanh(&h, len + self.cfg.window - 1, self.cfg.d_c);
        let mask = match dropout {
            Some((rng, keep)) => Some(dropout_mask(rng, keep, self.cfg.d_c, DropoutMode::Train)?),
            None => None,
        };
        let probs = self.classify(&repr.s, mask.as_deref(), params);
        Ok(SentenceForward {
            words: sent.words.clone(),
            head_pos: sent.head_pos,
            tail_pos: sent.tail_pos,
            input: input.into_data(),
            repr,
            mask,
            probs,
        })
    }

    /// `softmax(U (s ∘ mask) + v)`.
    pub fn classify<T: Scalar>(&self, s: &[T], mask: Option<&[T]>, params: ParamView<'_, T>) -> Vec<T> {
        let u = params.get(self.ids.cls_u);
        let v = params.get(self.ids.cls_v);
        let masked: Vec<T>;
        let x = match mask {
            Some(m) => {
                masked = s.iter().zip(m).map(|(&a, &b)| a * b).collect();
                &masked
            }
            None => s,
        };
        let mut e = vec![T::zero(); self.cfg.n_rel];
        affine_into(u.data(), self.cfg.d_c, x, v.data(), &mut e);
        softmax_in_place(&mut e);
        e
    }

    /// Test-mode relation distribution for one sentence.
    pub fn sentence_probs<T: Scalar>(&self, sent: &EncodedSentence, params: ParamView<'_, T>) -> Result<Vec<T>> {
        Ok(self.forward(sent, params, None)?.probs)
    }

    /// Test-mode pooled representation (used as a feature vector).
    pub fn sentence_repr<T: Scalar>(&self, sent: &EncodedSentence, params: ParamView<'_, T>) -> Result<Vec<T>> {
        Ok(self.forward(sent, params, None)?.repr.s)
    }

    /// Bag score `E(h, r, t | S)` and the selected member index.
    pub fn bag_score<T: Scalar>(
        &self,
        sentences: &[&EncodedSentence],
        relation: usize,
        mode: BagMode,
        rng: &mut SeededRng,
        params: ParamView<'_, T>,
    ) -> Result<(T, usize)> {
        if sentences.is_empty() {
            return Err(Error::Argument("bag_score on an empty bag".into()));
        }
        match mode {
            BagMode::Max => {
                let scores = sentences
                    .iter()
                    .map(|s| Ok(self.sentence_probs(s, params)?[relation]))
                    .collect::<Result<Vec<T>>>()?;
                select_sentence(&scores, mode, rng)
            }
            BagMode::Rand => {
                let i = rng.below(sentences.len());
                Ok((self.sentence_probs(sentences[i], params)?[relation], i))
            }
        }
    }

    /// Accumulates gradients of a scalar `L` into `grads`, given the cached
    /// forward pass and `dL/dp` at the softmax output.
    pub fn backward<T: Scalar>(
        &self,
        fwd: &SentenceForward<T>,
        dprobs: &[T],
        params: ParamView<'_, T>,
        grads: &mut GradBuffer<T>,
    ) -> Result<()> {
        let cfg = &self.cfg;
        let (k, d, dc, nr) = (cfg.window, cfg.input_dim(), cfg.d_c, cfg.n_rel);
        let len = fwd.len();
        if dprobs.len() != nr || fwd.probs.len() != nr || fwd.input.len() != len * d {
            return Err(Error::Internal("encoder backward: cache does not match config".into()));
        }
        if dprobs.iter().all(|g| *g == T::zero()) {
            return Ok(());
        }

        // softmax → e = U s~ + v
        let de = softmax_backward(&fwd.probs, dprobs);
        let s = &fwd.repr.s;
        let s_tilde: Vec<T> = match &fwd.mask {
            Some(m) => s.iter().zip(m).map(|(&a, &b)| a * b).collect(),
            None => s.clone(),
        };
        let u = params.get(self.ids.cls_u).data();
        {
            let gu = grads.get_mut(self.ids.cls_u).data_mut();
            for r in 0..nr {
                for c in 0..dc {
                    gu[r * dc + c] += de[r] * s_tilde[c];
                }
            }
        }
        {
            let gv = grads.get_mut(self.ids.cls_v).data_mut();
            for r in 0..nr {
                gv[r] += de[r];
            }
        }
        let mut ds = vec![T::zero(); dc];
        for r in 0..nr {
            for c in 0..dc {
                ds[c] += u[r * dc + c] * de[r];
            }
        }
        if let Some(m) = &fwd.mask {
            for (x, &mm) in ds.iter_mut().zip(m) {
                *x *= mm;
            }
        }
        // tanh then column-wise max: only the argmax row of each column
        let dpre: Vec<T> = ds
            .iter()
            .zip(s)
            .map(|(&g, &sv)| g * (T::one() - sv * sv))
            .collect();

        let w = params.get(self.ids.conv_w).data();
        let mut dinput = vec![T::zero(); len * d];
        {
            let gw = grads.get_mut(self.ids.conv_w).data_mut();
            for c in 0..dc {
                let g = dpre[c];
                if g == T::zero() {
                    continue;
                }
                let i = fwd.repr.argmax[c];
                for j in 0..k {
                    let Some(r) = (i + j).checked_sub(k - 1).filter(|&r| r < len) else {
                        continue;
                    };
                    let base = c * k * d + j * d;
                    let x = &fwd.input[r * d..(r + 1) * d];
                    let dx = &mut dinput[r * d..(r + 1) * d];
                    for m in 0..d {
                        gw[base + m] += g * x[m];
                        dx[m] += g * w[base + m];
                    }
                }
            }
        }
        {
            let gb = grads.get_mut(self.ids.conv_b).data_mut();
            for c in 0..dc {
                gb[c] += dpre[c];
            }
        }

        // scatter token-row gradients into the embedding tables
        let n_words = params.get(self.ids.word).rows();
        for (i, &wid) in fwd.words.iter().enumerate() {
            let row = &dinput[i * d..(i + 1) * d];
            let wid = if (wid as usize) < n_words { wid } else { crate::corpus::UNK };
            let gwe = grads.get_mut(self.ids.word).row_mut(wid as usize);
            for (g, &x) in gwe.iter_mut().zip(&row[..cfg.d_w]) {
                *g += x;
            }
            let ph = cfg.pos_index(i, fwd.head_pos);
            let gph = grads.get_mut(self.ids.pos_head).row_mut(ph);
            for (g, &x) in gph.iter_mut().zip(&row[cfg.d_w..cfg.d_w + cfg.d_p]) {
                *g += x;
            }
            let pt = cfg.pos_index(i, fwd.tail_pos);
            let gpt = grads.get_mut(self.ids.pos_tail).row_mut(pt);
            for (g, &x) in gpt.iter_mut().zip(&row[cfg.d_w + cfg.d_p..]) {
                *g += x;
            }
        }
        Ok(())
    }
}

/// `s[j] = tanh(max_i h[i][j])`, remembering the lowest maximizing row.
pub fn pool_tanh<T: Scalar>(h: &[T], rows: usize, cols: usize) -> SentenceRepr<T> {
    assert!(rows > 0 && h.len() == rows * cols, "pooling needs a nonempty rows × cols matrix");
    let mut best: Vec<T> = h[..cols].to_vec();
    let mut argmax = vec![0usize; cols];
    for i in 1..rows {
        let row = &h[i * cols..(i + 1) * cols];
        for c in 0..cols {
            if row[c] > best[c] {
                best[c] = row[c];
                argmax[c] = i;
            }
        }
    }
    SentenceRepr {
        s: best.into_iter().map(T::tanh).collect(),
        argmax,
    }
}

/// Max or random choice over per-sentence scores for one relation.
/// Max ties resolve to the lowest index.
pub fn select_sentence<T: Scalar>(scores: &[T], mode: BagMode, rng: &mut SeededRng) -> Result<(T, usize)> {
    if scores.is_empty() {
        return Err(Error::Argument("bag_score on an empty bag".into()));
    }
    match mode {
        BagMode::Max => {
            let mut best = 0;
            for (i, &s) in scores.iter().enumerate().skip(1) {
                if s > scores[best] {
                    best = i;
                }
            }
            Ok((scores[best], best))
        }
        BagMode::Rand => {
            let i = rng.below(scores.len());
            Ok((scores[i], i))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{finite_diff_check, ParamStore};

    fn tiny_cfg() -> EncoderConfig {
        EncoderConfig {
            d_w: 4,
            d_p: 2,
            d_c: 6,
            window: 3,
            n_rel: 5,
            pos_clip: 30,
        }
    }

    fn setup(cfg: EncoderConfig, vocab: usize, seed: u64) -> (TextEncoder, ParamStore<f64>) {
        let mut rng = SeededRng::new(seed);
        let mut store = ParamStore::new();
        let words = uniform(&[vocab, cfg.d_w], 0.5, &mut rng);
        let enc = TextEncoder::register(cfg, words, &mut store, &mut rng).unwrap();
        // widen the small default initializations so every path carries signal
        for id in [enc.ids.pos_head, enc.ids.pos_tail, enc.ids.conv_b, enc.ids.cls_v] {
            let shape = store.value(id).shape().to_vec();
            *store.value_mut(id) = uniform(&shape, 0.5, &mut rng);
        }
        (enc, store)
    }

    fn sentence(len: usize, head: usize, tail: usize) -> EncodedSentence {
        EncodedSentence {
            words: (0..len).map(|i| (i % 7 + 2) as u32).collect(),
            head_pos: head,
            tail_pos: tail,
        }
    }

    #[test]
    fn embedding_rows() {
        let (enc, store) = setup(tiny_cfg(), 10, 1);
        let s = sentence(4, 1, 3);
        let x = enc.embed_tokens(&s, store.view());
        assert_eq!(x.shape(), &[4, enc.cfg.input_dim()]);
        let ph = store.value(enc.ids.pos_head);
        // token 1 is the head: zero offset row
        assert_eq!(&x.row(1)[4..6], ph.row(enc.cfg.pos_index(1, 1)));
        assert_eq!(enc.cfg.pos_index(1, 1), 30);
        assert_eq!(&x.row(2)[..4], store.value(enc.ids.word).row(s.words[2] as usize));
    }

    #[test]
    fn position_offsets_clip() {
        let cfg = tiny_cfg();
        assert_eq!(cfg.pos_index(0, 50), 0); // offset -50 → -30
        assert_eq!(cfg.pos_index(0, 30), 0);
        assert_eq!(cfg.pos_index(90, 0), 60);
    }

    #[test]
    fn conv_window_count() {
        for k in 1..=5 {
            let cfg = EncoderConfig { window: k, ..tiny_cfg() };
            let (enc, store) = setup(cfg, 10, 2);
            for l in 1..=12 {
                let s = sentence(l, 0, l - 1);
                let x = enc.embed_tokens(&s, store.view());
                let h = enc.conv_forward(x.data(), l, store.view());
                assert_eq!(h.len(), (l + k - 1) * cfg.d_c);
            }
        }
    }

    #[test]
    fn unit_window_is_a_per_row_affine_map() {
        let cfg = EncoderConfig { window: 1, ..tiny_cfg() };
        let (enc, store) = setup(cfg, 10, 3);
        let s = sentence(5, 0, 4);
        let x = enc.embed_tokens(&s, store.view());
        let h = enc.conv_forward(x.data(), 5, store.view());
        let w = store.value(enc.ids.conv_w);
        let b = store.value(enc.ids.conv_b);
        for i in 0..5 {
            let expect = crate::numkernel::affine(w, x.row(i), b.data()).unwrap();
            for c in 0..cfg.d_c {
                assert!((h[i * cfg.d_c + c] - expect[c]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn conv_matches_explicit_window_concatenation() {
        let cfg = tiny_cfg();
        let (enc, store) = setup(cfg, 10, 4);
        let l = 5;
        let s = sentence(l, 1, 3);
        let x = enc.embed_tokens(&s, store.view());
        let d = cfg.input_dim();
        let h = enc.conv_forward(x.data(), l, store.view());
        assert_eq!(h.len() / cfg.d_c, 7);
        for i in 0..l + cfg.window - 1 {
            let mut q = vec![0.0; cfg.window * d];
            for j in 0..cfg.window {
                let r = i as i64 + j as i64 - (cfg.window as i64 - 1);
                if r >= 0 && (r as usize) < l {
                    q[j * d..(j + 1) * d].copy_from_slice(x.row(r as usize));
                }
            }
            let expect = crate::numkernel::affine(
                store.value(enc.ids.conv_w),
                &q,
                store.value(enc.ids.conv_b).data(),
            )
            .unwrap();
            for c in 0..cfg.d_c {
                assert!((h[i * cfg.d_c + c] - expect[c]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_input_zero_bias_gives_zero() {
        let cfg = tiny_cfg();
        let (enc, mut store) = setup(cfg, 10, 5);
        store.value_mut(enc.ids.conv_b).fill_zero();
        let zeros = vec![0.0; 4 * cfg.input_dim()];
        let h = enc.conv_forward(&zeros, 4, store.view());
        assert!(h.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn pooling_examples() {
        let r = pool_tanh(&[0.3f64, -2.0], 1, 2);
        assert_eq!(r.s, vec![0.3f64.tanh(), (-2.0f64).tanh()]);
        let r = pool_tanh(&[-1.0f64, 2.0, 0.0], 3, 1);
        assert_eq!(r.s, vec![2.0f64.tanh()]);
        assert_eq!(r.argmax, vec![1]);
        let r = pool_tanh(&[1.0f64, 1.0, 0.5], 3, 1);
        assert_eq!(r.argmax, vec![0]);
        let a = pool_tanh(&[1.0f64, -1.0, 0.5, 3.0, -2.0, 0.0], 3, 2);
        let b = pool_tanh(&[-2.0f64, 0.0, 1.0, -1.0, 0.5, 3.0], 3, 2);
        assert_eq!(a.s, b.s);
    }

    #[test]
    fn classifier_examples() {
        let cfg = EncoderConfig { n_rel: 2, ..tiny_cfg() };
        let (enc, mut store) = setup(cfg, 10, 6);
        store.value_mut(enc.ids.cls_u).fill_zero();
        store.value_mut(enc.ids.cls_v).data_mut().copy_from_slice(&[1.0f64.ln(), 3.0f64.ln()]);
        let p = enc.classify(&[0.1; 6], None, store.view());
        assert!((p[0] - 0.25).abs() < 1e-15 && (p[1] - 0.75).abs() < 1e-15);
        store.value_mut(enc.ids.cls_v).fill_zero();
        let p = enc.classify(&[0.7; 6], None, store.view());
        assert_eq!(p, vec![0.5, 0.5]);
    }

    #[test]
    fn select_examples() {
        let mut rng = SeededRng::new(0);
        assert_eq!(select_sentence(&[0.2, 0.9, 0.5], BagMode::Max, &mut rng).unwrap(), (0.9, 1));
        assert_eq!(select_sentence(&[0.4], BagMode::Rand, &mut rng).unwrap(), (0.4, 0));
        assert_eq!(select_sentence(&[0.4], BagMode::Max, &mut rng).unwrap(), (0.4, 0));
        assert!(select_sentence::<f64>(&[], BagMode::Max, &mut rng).is_err());
    }

    fn loss(enc: &TextEncoder, s: &EncodedSentence, dp: &[f64], store: &ParamStore<f64>) -> f64 {
        let p = enc.sentence_probs(s, store.view()).unwrap();
        p.iter().zip(dp).map(|(a, b)| a * b).sum()
    }

    #[test]
    fn encoder_gradient_matches_finite_differences() {
        let cfg = tiny_cfg();
        let (enc, mut store) = setup(cfg, 12, 7);
        let s = EncodedSentence {
            words: vec![2, 3, 4, 5, 6, 7, 8],
            head_pos: 1,
            tail_pos: 5,
        };
        let dp = [0.3, -1.0, 0.5, 2.0, -0.25];
        let fwd = enc.forward(&s, store.view(), None).unwrap();
        let (view, grads) = store.split_mut();
        enc.backward(&fwd, &dp, view, grads).unwrap();
        let report = finite_diff_check(|st| loss(&enc, &s, &dp, st), &mut store, 1e-6);
        assert!(report.max_rel_error < 1e-4, "{report:?}");
    }

    #[test]
    fn zero_upstream_gives_zero_gradient() {
        let (enc, mut store) = setup(tiny_cfg(), 10, 8);
        let s = sentence(6, 0, 4);
        let fwd = enc.forward(&s, store.view(), None).unwrap();
        let (view, grads) = store.split_mut();
        enc.backward(&fwd, &[0.0; 5], view, grads).unwrap();
        assert!(store.grads().is_zero());
    }

    #[test]
    fn only_argmax_rows_receive_conv_gradient() {
        // with k = 1 each conv output row reads exactly one token; tokens that
        // are nobody's argmax must get zero gradient.
        let cfg = EncoderConfig { window: 1, d_c: 2, ..tiny_cfg() };
        let (enc, mut store) = setup(cfg, 20, 9);
        let s = EncodedSentence {
            words: (2..12).collect(),
            head_pos: 0,
            tail_pos: 9,
        };
        let fwd = enc.forward(&s, store.view(), None).unwrap();
        let winners: Vec<usize> = fwd.repr.argmax.clone();
        let (view, grads) = store.split_mut();
        enc.backward(&fwd, &[1.0, 0.0, 0.0, 0.0, 0.0], view, grads).unwrap();
        let gw = store.grad(enc.ids.word);
        for (i, &w) in s.words.iter().enumerate() {
            let touched = gw.row(w as usize).iter().any(|&x| x != 0.0);
            assert_eq!(touched, winners.contains(&i), "token {i}");
        }
    }

    #[test]
    fn dropout_changes_probs_and_backward_respects_mask() {
        let cfg = tiny_cfg();
        let (enc, mut store) = setup(cfg, 12, 10);
        let s = sentence(7, 1, 5);
        let mut rng = SeededRng::new(3);
        let fwd = enc.forward(&s, store.view(), Some((&mut rng, 0.5))).unwrap();
        let mask = fwd.mask.clone().unwrap();
        let dp = [1.0, 0.0, 0.0, 0.0, 0.0];
        let (view, grads) = store.split_mut();
        enc.backward(&fwd, &dp, view, grads).unwrap();
        let gu = store.grad(enc.ids.cls_u);
        for c in 0..cfg.d_c {
            if mask[c] == 0.0 {
                assert_eq!(gu.data()[c], 0.0);
                assert_eq!(store.grad(enc.ids.conv_b).data()[c], 0.0);
            }
        }
    }

    #[test]
    fn sentence_repr_inside_unit_interval() {
        let (enc, store) = setup(tiny_cfg(), 10, 11);
        for l in 1..10 {
            let r = enc.sentence_repr(&sentence(l, 0, l - 1), store.view()).unwrap();
            assert!(r.iter().all(|&x| x > -1.0 && x < 1.0));
        }
    }
}
