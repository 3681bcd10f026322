//! Evaluation: micro-F1, per-category breakdown of a split, inferred versus
//! actual L3 path counts, and a one-sided rank test.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::census::{pearson, Correlation, PathCounter};
use crate::error::{Error, Result};
use crate::graph::{NodeFeatures, PpiNetwork};
use crate::prompt::L3Head;
use crate::split::{Category, LabeledPair, SplitSpec};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl Confusion {
    pub fn record(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    /// `2TP / (2TP + FP + FN)`, and 1 when all three are zero.
    pub fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            1.0
        } else {
            (2 * self.tp) as f64 / denom as f64
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Pooled confusion over aligned prediction/label entries; multilabel
/// inputs are flattened (sample, type) decisions.
pub fn confusion(preds: &[f64], labels: &[f64], threshold: f64) -> Result<Confusion> {
    if preds.is_empty() {
        return Err(Error::Empty("no predictions to score".into()));
    }
    if preds.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            found: preds.len(),
        });
    }
    let mut c = Confusion::default();
    for (&p, &y) in preds.iter().zip(labels) {
        c.record(p > threshold, y > 0.5);
    }
    Ok(c)
}

pub fn micro_f1(preds: &[f64], labels: &[f64], threshold: f64) -> Result<f64> {
    Ok(confusion(preds, labels, threshold)?.f1())
}

#[derive(Debug, Clone, Serialize)]
pub struct CategoryMetrics {
    pub pairs: usize,
    pub f1: f64,
    pub confusion: Confusion,
}

/// Test-set metrics. A category with no test pairs is `null`.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub pairs: usize,
    pub f1: f64,
    pub confusion: Confusion,
    pub categories: BTreeMap<&'static str, Option<CategoryMetrics>>,
}

/// Inference-mode evaluation of `head` on the test fold of `split`.
pub fn eval_split(head: &L3Head, features: &NodeFeatures, split: &SplitSpec) -> Result<EvalReport> {
    eval_pairs(head, features, &split.test, &split.categorize())
}

pub fn eval_pairs(
    head: &L3Head,
    features: &NodeFeatures,
    pairs: &[LabeledPair],
    categories: &[Category],
) -> Result<EvalReport> {
    if pairs.len() != categories.len() {
        return Err(Error::DimensionMismatch {
            expected: pairs.len(),
            found: categories.len(),
        });
    }
    let n_out = head.out_dim();
    let emb: Vec<(&[f64], &[f64])> = pairs.iter().map(|p| (features.row(p.u), features.row(p.v))).collect();
    let pred = head.predict(&emb)?;
    let targets: Vec<f64> = pairs.iter().flat_map(|p| p.label.target(n_out)).collect();
    let overall = confusion(pred.probs.data(), &targets, 0.5)?;
    let mut categories_out = BTreeMap::new();
    for cat in Category::ALL {
        let mut c = Confusion::default();
        let mut n = 0;
        for (i, _) in categories.iter().enumerate().filter(|(_, &c)| c == cat) {
            n += 1;
            for j in 0..n_out {
                c.record(pred.probs.get(i, j) > 0.5, targets[i * n_out + j] > 0.5);
            }
        }
        let entry = (n > 0).then(|| CategoryMetrics {
            pairs: n,
            f1: c.f1(),
            confusion: c,
        });
        categories_out.insert(cat.tag(), entry);
    }
    Ok(EvalReport {
        pairs: pairs.len(),
        f1: overall.f1(),
        confusion: overall,
        categories: categories_out,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScatterRow {
    pub u: usize,
    pub v: usize,
    pub inferred: usize,
    pub actual: u64,
    pub actual_uncapped: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InferredVsActual {
    pub k: usize,
    pub rho: Correlation,
    pub rows: Vec<ScatterRow>,
}

impl InferredVsActual {
    /// `u,v,inferred,actual,actual_uncapped,cap`, one line per pair.
    pub fn scatter_csv(&self, net: &PpiNetwork) -> String {
        let mut out = String::from("u,v,inferred,actual,actual_uncapped,cap\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                net.id(r.u),
                net.id(r.v),
                r.inferred,
                r.actual,
                r.actual_uncapped,
                self.k
            );
        }
        out
    }

    pub fn mean_inferred(&self, pred: impl Fn(&ScatterRow) -> bool) -> f64 {
        let xs: Vec<f64> = self.rows.iter().filter(|r| pred(r)).map(|r| r.inferred as f64).collect();
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Active gates per pair against `min(#L3 in net, K)`, with the pairs' own
/// edges excluded from the count.
pub fn inferred_vs_actual(
    head: &L3Head,
    net: &PpiNetwork,
    features: &NodeFeatures,
    pairs: &[(usize, usize)],
) -> Result<InferredVsActual> {
    if pairs.len() < 2 {
        return Err(Error::Insufficient("need at least two pairs for a correlation".into()));
    }
    let k = head.k();
    let emb: Vec<(&[f64], &[f64])> = pairs.iter().map(|&(u, v)| (features.row(u), features.row(v))).collect();
    let inferred = head.predict(&emb)?.active_paths(k);
    let mut counter = PathCounter::new(net);
    let mut rows = Vec::with_capacity(pairs.len());
    for (&(u, v), inferred) in pairs.iter().zip(inferred) {
        let raw = counter.count(u, v, 3, true)?;
        rows.push(ScatterRow {
            u,
            v,
            inferred,
            actual: raw.min(k as u64),
            actual_uncapped: raw,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.inferred as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.actual as f64).collect();
    Ok(InferredVsActual {
        k,
        rho: pearson(&xs, &ys)?,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MannWhitney {
    /// U statistic of the first sample.
    pub u: f64,
    pub z: f64,
    /// One-sided p-value for the first sample being stochastically larger.
    pub p_greater: f64,
}

/// Mann-Whitney U test with the tie-corrected normal approximation.
pub fn mann_whitney(xs: &[f64], ys: &[f64]) -> Result<MannWhitney> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::Insufficient("both samples must be nonempty".into()));
    }
    let mut all: Vec<(f64, bool)> = xs.iter().map(|&x| (x, true)).chain(ys.iter().map(|&y| (y, false))).collect();
    if all.iter().any(|(x, _)| x.is_nan()) {
        return Err(Error::NonFinite {
            context: "rank test input".into(),
        });
    }
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = all.len();
    let (mut rank_sum, mut tie_term) = (0.0, 0.0);
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && all[j + 1].0 == all[i].0 {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        let avg = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += avg * all[i..=j].iter().filter(|e| e.1).count() as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let (n1, n2) = (xs.len() as f64, ys.len() as f64);
    let u = rank_sum - n1 * (n1 + 1.0) / 2.0;
    let mean = n1 * n2 / 2.0;
    let nf = n as f64;
    let var = n1 * n2 / 12.0 * ((nf + 1.0) - tie_term / (nf * (nf - 1.0)).max(1.0));
    let z = if var > 0.0 { (u - mean) / var.sqrt() } else { 0.0 };
    Ok(MannWhitney {
        u,
        z,
        p_greater: 0.5 * libm::erfc(z / std::f64::consts::SQRT_2),
    })
}
