use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::tensor::Tensor;

/// Index of a parameter inside a [`ParamStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(pub usize);

/// Gradient accumulator with one tensor per parameter of a store.
#[derive(Debug, Clone, PartialEq)]
pub struct GradBuffer<T> {
    grads: Vec<Tensor<T>>,
}

impl<T: Scalar> GradBuffer<T> {
    pub fn get(&self, id: ParamId) -> &Tensor<T> {
        &self.grads[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor<T> {
        &mut self.grads[id.0]
    }

    pub fn zero(&mut self) {
        self.grads.iter_mut().for_each(Tensor::fill_zero);
    }

    pub fn is_zero(&self) -> bool {
        self.grads
            .iter()
            .all(|g| g.data().iter().all(|x| *x == T::zero()))
    }

    pub fn tensors(&self) -> &[Tensor<T>] {
        &self.grads
    }

    /// Elementwise `self += other`.
    pub fn add(&mut self, other: &GradBuffer<T>) -> Result<()> {
        if other.grads.len() != self.grads.len() {
            return Err(Error::dim("grad add", &[self.grads.len()], &[other.grads.len()]));
        }
        for (g, b) in self.grads.iter_mut().zip(&other.grads) {
            g.add_assign(b)?;
        }
        Ok(())
    }
}

/// Named parameters, each paired with a gradient buffer of identical shape.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamStore<T> {
    names: Vec<String>,
    values: Vec<Tensor<T>>,
    grads: GradBuffer<T>,
}

impl<T: Scalar> Default for ParamStore<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> ParamStore<T> {
    pub fn new() -> Self {
        ParamStore {
            names: Vec::new(),
            values: Vec::new(),
            grads: GradBuffer { grads: Vec::new() },
        }
    }

    pub fn add(&mut self, name: impl Into<String>, value: Tensor<T>) -> ParamId {
        self.grads.grads.push(Tensor::zeros(value.shape()));
        self.values.push(value);
        self.names.push(name.into());
        ParamId(self.values.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.values.len()).map(ParamId)
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn value(&self, id: ParamId) -> &Tensor<T> {
        &self.values[id.0]
    }

    pub fn value_mut(&mut self, id: ParamId) -> &mut Tensor<T> {
        &mut self.values[id.0]
    }

    pub fn grad(&self, id: ParamId) -> &Tensor<T> {
        self.grads.get(id)
    }

    pub fn grad_mut(&mut self, id: ParamId) -> &mut Tensor<T> {
        self.grads.get_mut(id)
    }

    pub fn grads(&self) -> &GradBuffer<T> {
        &self.grads
    }

    /// Parameter values for reading alongside the store's own gradients.
    pub fn split_mut(&mut self) -> (ParamView<'_, T>, &mut GradBuffer<T>) {
        (ParamView(&self.values), &mut self.grads)
    }

    pub fn view(&self) -> ParamView<'_, T> {
        ParamView(&self.values)
    }

    /// An empty gradient buffer matching this store's shapes (for workers).
    pub fn new_grad_buffer(&self) -> GradBuffer<T> {
        GradBuffer {
            grads: self.values.iter().map(|v| Tensor::zeros(v.shape())).collect(),
        }
    }

    /// Adds a worker buffer into the store's gradients.
    pub fn accumulate(&mut self, buf: &GradBuffer<T>) -> Result<()> {
        self.grads.add(buf)
    }

    pub fn zero_grads(&mut self) {
        self.grads.zero();
    }

    /// Gradient ascent step `p <- p + lr * grad(p)`, then zeroes gradients.
    ///
    /// Parameters are left untouched if any gradient is non-finite.
    pub fn sgd_step(&mut self, lr: T) -> Result<()> {
        if !(lr > T::zero()) {
            return Err(Error::Argument(format!("learning rate must be > 0, got {lr}")));
        }
        if let Some(i) = self.grads.grads.iter().position(|g| !g.all_finite()) {
            return Err(Error::Divergence {
                param: self.names[i].clone(),
            });
        }
        for (v, g) in self.values.iter_mut().zip(&self.grads.grads) {
            for (p, &d) in v.data_mut().iter_mut().zip(g.data()) {
                *p += lr * d;
            }
        }
        self.zero_grads();
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> ParamStore<U> {
        let mut out = ParamStore::new();
        for (name, v) in self.names.iter().zip(&self.values) {
            out.add(name.clone(), v.cast());
        }
        out
    }
}

/// Read-only parameter tensors indexed by [`ParamId`].
#[derive(Debug)]
pub struct ParamView<'a, T>(&'a [Tensor<T>]);

impl<T> Clone for ParamView<'_, T> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<T> Copy for ParamView<'_, T> {}

impl<'a, T> ParamView<'a, T> {
    pub fn get(&self, id: ParamId) -> &'a Tensor<T> {
        &self.0[id.0]
    }
}
