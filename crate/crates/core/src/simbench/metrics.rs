use crate::error::{Result, SiseError};
use crate::npmle::SurvivalCurve;

/// Grid points `tau_0 .. tau_{l-1}` of an estimated curve, where `l` is the
/// number of bins between the first and last observation time.
pub fn evaluation_grid(est: &SurvivalCurve) -> Vec<f64> {
    (0..est.values.len() - 1).map(|j| est.tau(j)).collect()
}

/// Indices of the evaluation grid where `est` is strictly between 0 and its
/// starting value. Outside this range the curve is a flat extrapolation that
/// no resample can move.
pub fn identified_range(est: &SurvivalCurve) -> Vec<usize> {
    let top = est.values[0];
    let tol = 1e-12 * top.max(1.0);
    (0..est.values.len() - 1)
        .filter(|&j| est.values[j] > tol && est.values[j] < top - tol)
        .collect()
}

/// Root mean squared distance between two tabulated survival curves, scaled
/// by `1 / p`.
pub fn rise_values(estimated: &[f64], truth: &[f64], prevalence: f64) -> Result<f64> {
    if !(prevalence > 0.0) {
        return Err(SiseError::ZeroPrevalence);
    }
    if estimated.len() != truth.len() {
        return Err(SiseError::LengthMismatch(estimated.len(), truth.len()));
    }
    if estimated.is_empty() {
        return Err(SiseError::EmptyData);
    }
    let ss: f64 = estimated.iter().zip(truth).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((ss / estimated.len() as f64).sqrt() / prevalence)
}

/// RISE of `est` against `truth` over [`evaluation_grid`].
pub fn rise(est: &SurvivalCurve, truth: impl Fn(f64) -> f64, prevalence: f64) -> Result<f64> {
    let grid = evaluation_grid(est);
    let truth: Vec<f64> = grid.iter().map(|&t| truth(t)).collect();
    rise_values(&est.values[..grid.len()], &truth, prevalence)
}

pub fn rmse_imputation(imputed: &[f64], truth: &[f64]) -> Result<f64> {
    if imputed.len() != truth.len() {
        return Err(SiseError::LengthMismatch(imputed.len(), truth.len()));
    }
    if imputed.is_empty() {
        return Err(SiseError::EmptyData);
    }
    let ss: f64 = imputed.iter().zip(truth).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((ss / imputed.len() as f64).sqrt())
}

/// Median of the finite entries; `None` if there are none.
pub fn median(values: &[f64]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

pub fn mean(values: &[f64]) -> Option<f64> {
    let v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Relative change `(new - old) / old`.
pub fn relative_change(old: f64, new: f64) -> f64 {
    (new - old) / old
}
