//! Dense kernels: affine maps, softmax, L1 distance and dropout masks.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::rng::SeededRng;
use super::tensor::Tensor;

/// `W x + b` for an `m × n` matrix `W`.
pub fn affine<T: Scalar>(w: &Tensor<T>, x: &[T], b: &[T]) -> Result<Vec<T>> {
    if w.shape().len() != 2 {
        return Err(Error::dim("affine", w.shape(), &[x.len()]));
    }
    let (m, n) = (w.shape()[0], w.shape()[1]);
    if n != x.len() {
        return Err(Error::dim("affine", w.shape(), &[x.len()]));
    }
    if m != b.len() {
        return Err(Error::dim("affine", w.shape(), &[b.len()]));
    }
    let mut out = vec![T::zero(); m];
    affine_into(w.data(), n, x, b, &mut out);
    Ok(out)
}

/// Unchecked affine map over a raw row-major buffer with `n` columns.
#[inline]
pub(crate) fn affine_into<T: Scalar>(w: &[T], n: usize, x: &[T], b: &[T], out: &mut [T]) {
    for (i, o) in out.iter_mut().enumerate() {
        let row = &w[i * n..(i + 1) * n];
        let mut acc = b[i];
        for (&wij, &xj) in row.iter().zip(x) {
            acc += wij * xj;
        }
        *o = acc;
    }
}

/// Numerically stable softmax (max-shifted).
pub fn softmax<T: Scalar>(z: &[T]) -> Result<Vec<T>> {
    if z.is_empty() {
        return Err(Error::Argument("softmax of an empty vector".into()));
    }
    let mut out = z.to_vec();
    softmax_in_place(&mut out);
    Ok(out)
}

#[inline]
pub(crate) fn softmax_in_place<T: Scalar>(z: &mut [T]) {
    let max = z.iter().copied().fold(T::neg_infinity(), T::max);
    let mut sum = T::zero();
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

/// Backward pass of softmax: given `p = softmax(z)` and `dL/dp`, returns `dL/dz`.
pub fn softmax_backward<T: Scalar>(p: &[T], dp: &[T]) -> Vec<T> {
    let dot: T = p.iter().zip(dp).map(|(&a, &b)| a * b).sum();
    p.iter().zip(dp).map(|(&pi, &gi)| pi * (gi - dot)).collect()
}

pub fn l1_distance<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::dim("l1_distance", &[a.len()], &[b.len()]));
    }
    Ok(a.iter().zip(b).map(|(&x, &y)| (x - y).abs()).sum())
}

/// `sign(x)` with `sign(0) = 0`.
#[inline]
pub fn sign0<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        T::one()
    } else if x < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropoutMode {
    Train,
    Test,
}

/// Inverted dropout mask: entries are `0` with probability `1 - keep_p`,
/// otherwise `1 / keep_p`. Test mode yields all ones and draws nothing.
pub fn dropout_mask<T: Scalar>(
    rng: &mut SeededRng,
    keep_p: f64,
    n: usize,
    mode: DropoutMode,
) -> Result<Vec<T>> {
    if !(keep_p > 0.0 && keep_p <= 1.0) {
        return Err(Error::Argument(format!(
            "dropout keep probability must be in (0, 1], got {keep_p}"
        )));
    }
    if mode == DropoutMode::Test || keep_p == 1.0 {
        return Ok(vec![T::one(); n]);
    }
    let scale = T::from_f64_lossy(1.0 / keep_p);
    Ok((0..n)
        .map(|_| {
            if rng.uniform() < keep_p {
                scale
            } else {
                T::zero()
            }
        })
        .collect())
}
