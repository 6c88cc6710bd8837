use crate::scalar::Scalar;

use super::params::{ParamId, ParamStore};

/// Worst coordinate found by [`finite_diff_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub worst_param: Option<String>,
    pub worst_index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub coordinates: usize,
}

/// `|a - n| / max(|a|, |n|, 1e-8)`; NaN counts as an infinite error.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    if analytic.is_nan() || numeric.is_nan() {
        return f64::INFINITY;
    }
    let denom = analytic.abs().max(numeric.abs()).max(1e-8);
    (analytic - numeric).abs() / denom
}

/// Compares the analytic gradients already held in `store` with central
/// differences of `loss` over every coordinate of every parameter.
///
/// `loss` must be deterministic (dropout off). Parameter values are
/// restored exactly after each probe.
pub fn finite_diff_check<T, F>(mut loss: F, store: &mut ParamStore<T>, eps: f64) -> GradCheckReport
where
    T: Scalar,
    F: FnMut(&ParamStore<T>) -> f64,
{
    let ids: Vec<ParamId> = store.ids().collect();
    finite_diff_check_params(&mut loss, store, eps, &ids)
}

/// Same as [`finite_diff_check`] restricted to the listed parameters.
pub fn finite_diff_check_params<T, F>(
    loss: &mut F,
    store: &mut ParamStore<T>,
    eps: f64,
    ids: &[ParamId],
) -> GradCheckReport
where
    T: Scalar,
    F: FnMut(&ParamStore<T>) -> f64,
{
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst_param: None,
        worst_index: 0,
        analytic: 0.0,
        numeric: 0.0,
        coordinates: 0,
    };
    let step = T::from_f64_lossy(eps);
    for &id in ids {
        for i in 0..store.value(id).len() {
            let original = store.value(id).data()[i];
            store.value_mut(id).data_mut()[i] = original + step;
            let plus = loss(store);
            store.value_mut(id).data_mut()[i] = original - step;
            let minus = loss(store);
            store.value_mut(id).data_mut()[i] = original;

            let numeric = (plus - minus) / (2.0 * eps);
            let analytic = store.grad(id).data()[i].to_f64_lossy();
            let err = relative_error(analytic, numeric);
            report.coordinates += 1;
            if err > report.max_rel_error || report.worst_param.is_none() {
                report.max_rel_error = err;
                report.worst_param = Some(store.name(id).to_string());
                report.worst_index = i;
                report.analytic = analytic;
                report.numeric = numeric;
            }
        }
    }
    report
}
