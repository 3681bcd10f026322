//! Central finite-difference verification of tape gradients.

use super::nn::ParamSet;
use super::tape::{Tape, Var};
use crate::error::Result;

/// Gradients smaller than this are compared in absolute terms, scaled by it.
pub const RELATIVE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheck {
    pub max_relative_error: f64,
    pub checked: usize,
}

/// `|a - n| / max(|a|, |n|, RELATIVE_FLOOR)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let denom = analytic.abs().max(numeric.abs()).max(RELATIVE_FLOOR);
    (analytic - numeric).abs() / denom
}

/// Compares reverse-mode gradients of a scalar function of several
/// parameter sets against central differences `(f(p+h) - f(p-h)) / 2h`.
///
/// `f` must build the scalar on the given tape from the bound parameters
/// (one `Vec<Var>` per set, in order) and must be deterministic.
pub fn grad_check<F>(sets: &[&ParamSet], h: f64, f: F) -> Result<GradCheck>
where
    F: Fn(&mut Tape, &[Vec<Var>]) -> Result<Var>,
{
    let mut tape = Tape::new();
    let bound: Vec<Vec<Var>> = sets.iter().map(|s| s.bind(&mut tape, true)).collect();
    let out = f(&mut tape, &bound)?;
    tape.backward(out)?;
    let analytic: Vec<_> = sets
        .iter()
        .zip(&bound)
        .map(|(s, b)| s.grads(&tape, b))
        .collect();

    let eval = |owned: &[ParamSet]| -> Result<f64> {
        let mut t = Tape::new();
        let b: Vec<Vec<Var>> = owned.iter().map(|s| s.bind(&mut t, false)).collect();
        let v = f(&mut t, &b)?;
        Ok(t.value(v).item())
    };

    let mut owned: Vec<ParamSet> = sets.iter().map(|s| (*s).clone()).collect();
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for s in 0..owned.len() {
        for p in 0..owned[s].len() {
            for i in 0..owned[s].get(p).len() {
                let orig = owned[s].get(p).data()[i];
                owned[s].tensors_mut()[p].data_mut()[i] = orig + h;
                let plus = eval(&owned)?;
                owned[s].tensors_mut()[p].data_mut()[i] = orig - h;
                let minus = eval(&owned)?;
                owned[s].tensors_mut()[p].data_mut()[i] = orig;
                let numeric = (plus - minus) / (2.0 * h);
                worst = worst.max(relative_error(analytic[s][p].data()[i], numeric));
                checked += 1;
            }
        }
    }
    Ok(GradCheck {
        max_relative_error: worst,
        checked,
    })
}
