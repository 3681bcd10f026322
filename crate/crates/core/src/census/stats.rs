//! Association statistics between path counts and link labels.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Outcome of a correlation estimate. Zero variance in either input gives
/// [`Correlation::Undefined`] instead of NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Correlation {
    Defined(f64),
    Undefined,
}

impl Correlation {
    pub fn value(self) -> Option<f64> {
        match self {
            Correlation::Defined(r) => Some(r),
            Correlation::Undefined => None,
        }
    }
}

impl fmt::Display for Correlation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Correlation::Defined(r) => write!(f, "{r}"),
            Correlation::Undefined => f.write_str("undefined"),
        }
    }
}

impl Serialize for Correlation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Correlation::Defined(r) => s.serialize_f64(*r),
            Correlation::Undefined => s.serialize_none(),
        }
    }
}

/// Sample Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<Correlation> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            found: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::Insufficient(
            "pearson correlation needs at least 2 observations".into(),
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(Correlation::Undefined);
    }
    Ok(Correlation::Defined((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)))
}

/// How raw path counts map to discrete bins before estimating MI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum BinSpec {
    /// Each distinct count is its own bin.
    Identity,
    /// Counts above the given nearest-rank quantile of the pooled sample are
    /// clipped to it, then identity bins.
    ClipQuantile(f64),
}

impl Default for BinSpec {
    fn default() -> Self {
        BinSpec::ClipQuantile(0.95)
    }
}

impl BinSpec {
    pub fn apply(self, counts: &[u64]) -> Vec<u64> {
        match self {
            BinSpec::Identity => counts.to_vec(),
            BinSpec::ClipQuantile(q) => {
                if counts.is_empty() {
                    return Vec::new();
                }
                let mut sorted = counts.to_vec();
                sorted.sort_unstable();
                let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
                let cap = sorted[rank - 1];
                counts.iter().map(|&c| c.min(cap)).collect()
            }
        }
    }
}

/// Plug-in mutual information (nats) between binned counts and binary labels.
pub fn mutual_information(counts: &[u64], labels: &[u8], binning: BinSpec) -> Result<f64> {
    if counts.is_empty() {
        return Err(Error::Empty("mutual information of an empty sample".into()));
    }
    if counts.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: counts.len(),
            found: labels.len(),
        });
    }
    let bins = binning.apply(counts);
    let n = bins.len() as f64;
    let mut joint: std::collections::BTreeMap<(u64, u8), usize> = Default::default();
    let mut by_bin: std::collections::BTreeMap<u64, usize> = Default::default();
    let mut by_label = [0usize; 2];
    for (&b, &y) in bins.iter().zip(labels) {
        let y = u8::from(y != 0);
        *joint.entry((b, y)).or_default() += 1;
        *by_bin.entry(b).or_default() += 1;
        by_label[y as usize] += 1;
    }
    let mut mi = 0.0;
    for (&(b, y), &c) in &joint {
        let pxy = c as f64 / n;
        let px = by_bin[&b] as f64 / n;
        let py = by_label[y as usize] as f64 / n;
        mi += pxy * (pxy / (px * py)).ln();
    }
    Ok(mi.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn approx(c: Correlation, expected: f64) {
        let r = c.value().expect("defined");
        assert!((r - expected).abs() < 1e-12, "{r} vs {expected}");
    }

    #[test]
    fn pearson_examples() {
        approx(pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap(), 1.0);
        approx(pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        approx(pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap(), 0.8);
        assert_eq!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap(),
            Correlation::Undefined
        );
        assert!(pearson(&[1.0], &[1.0]).is_err());
        assert!(pearson(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn mi_examples() {
        let mi = mutual_information(&[0, 0, 5, 5], &[0, 0, 1, 1], BinSpec::Identity).unwrap();
        assert!((mi - std::f64::consts::LN_2).abs() < 1e-12);
        let flat = mutual_information(&[3, 3, 3, 3], &[0, 1, 0, 1], BinSpec::Identity).unwrap();
        assert_eq!(flat, 0.0);
        let indep = mutual_information(&[0, 1, 0, 1], &[0, 0, 1, 1], BinSpec::Identity).unwrap();
        assert!(indep.abs() < 1e-15);
        assert!(mutual_information(&[], &[], BinSpec::Identity).is_err());
    }

    #[test]
    fn quantile_clip() {
        let counts: Vec<u64> = (1..=20).collect();
        let clipped = BinSpec::ClipQuantile(0.95).apply(&counts);
        assert_eq!(*clipped.iter().max().unwrap(), 19);
        assert_eq!(clipped[..19], counts[..19]);
    }

    proptest! {
        #[test]
        fn mi_nonnegative(data in proptest::collection::vec((0u64..6, 0u8..2), 1..60)) {
            let (c, l): (Vec<u64>, Vec<u8>) = data.into_iter().unzip();
            let mi = mutual_information(&c, &l, BinSpec::default()).unwrap();
            prop_assert!(mi >= 0.0);
            let constant = vec![1u8; c.len()];
            prop_assert_eq!(mutual_information(&c, &constant, BinSpec::default()).unwrap(), 0.0);
        }
    }
}
