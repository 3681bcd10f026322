//! Path census: how many simple paths of each length join labeled pairs,
//! and how strongly those counts track the labels.

mod paths;
mod stats;

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::index;
use rayon::prelude::*;
use serde::Serialize;

pub use paths::{count_simple_paths, PathCounter};
pub use stats::{mutual_information, pearson, BinSpec, Correlation};

use crate::error::{Error, Result};
use crate::graph::PpiNetwork;
use crate::rng;
use crate::split::sample_negatives_with;

/// Path counts for one labeled pair. `counts[i]` is the number of simple
/// paths of length `i + 2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CensusRow {
    pub u: usize,
    pub v: usize,
    pub label: u8,
    pub counts: Vec<u64>,
}

impl CensusRow {
    pub fn count(&self, k: usize) -> u64 {
        self.counts[k - 2]
    }
}

/// Counts simple paths of lengths `2..=k_max` for every pair, excluding the
/// pair's own edge. Rows come back in input order regardless of `workers`.
pub fn census(
    net: &PpiNetwork,
    pairs: &[(usize, usize, u8)],
    k_max: usize,
    workers: usize,
) -> Result<Vec<CensusRow>> {
    if k_max < 2 {
        return Err(Error::InvalidArgument("k_max must be at least 2".into()));
    }
    let row = |counter: &mut PathCounter<'_>, &(u, v, label): &(usize, usize, u8)| {
        let all = counter.counts_by_length(u, v, k_max, true)?;
        Ok(CensusRow {
            u,
            v,
            label,
            counts: all[2..].to_vec(),
        })
    };
    if workers <= 1 {
        let mut counter = PathCounter::new(net);
        return pairs.iter().map(|p| row(&mut counter, p)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| {
        pairs
            .par_iter()
            .map_init(|| PathCounter::new(net), row)
            .collect()
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct L3Row {
    pub k: usize,
    pub pearson: Correlation,
    pub mi: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct L3Report {
    pub rows: Vec<L3Row>,
    #[serde(skip)]
    pub census: Vec<CensusRow>,
}

impl L3Report {
    pub fn row(&self, k: usize) -> Option<&L3Row> {
        self.rows.iter().find(|r| r.k == k)
    }

    /// `k,pearson,mi`, one line per path length.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("k,pearson,mi\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{}", r.k, r.pearson, r.mi);
        }
        out
    }

    /// `u,v,label,L2,...,Lk`, one line per sampled pair.
    pub fn census_csv(&self, net: &PpiNetwork) -> String {
        let k_max = self.rows.last().map_or(1, |r| r.k);
        let mut out = String::from("u,v,label");
        for k in 2..=k_max {
            let _ = write!(out, ",L{k}");
        }
        out.push('\n');
        for row in &self.census {
            let _ = write!(out, "{},{},{}", net.id(row.u), net.id(row.v), row.label);
            for c in &row.counts {
                let _ = write!(out, ",{c}");
            }
            out.push('\n');
        }
        out
    }
}

/// Samples `n_pos` edges and `n_neg` non-edges under `seed`, counts their
/// paths, and reports Pearson correlation and mutual information between
/// each `#L_k` and the label.
pub fn l3_report(
    net: &PpiNetwork,
    n_pos: usize,
    n_neg: usize,
    k_max: usize,
    seed: u64,
    binning: BinSpec,
    workers: usize,
) -> Result<L3Report> {
    let mut rng = rng::stream(seed, rng::DATA);
    let edges = net.edges();
    if edges.len() < n_pos {
        return Err(Error::Insufficient(format!(
            "need {n_pos} positive pairs but the network has {} edges",
            edges.len()
        )));
    }
    let mut pairs: Vec<(usize, usize, u8)> = index::sample(&mut rng, edges.len(), n_pos)
        .into_iter()
        .map(|i| (edges[i].0, edges[i].1, 1))
        .collect();
    let negatives = sample_negatives_with(net, n_neg, &BTreeSet::new(), &mut rng)?;
    pairs.extend(negatives.into_iter().map(|(u, v)| (u, v, 0)));

    let rows = census(net, &pairs, k_max, workers)?;
    let labels: Vec<u8> = rows.iter().map(|r| r.label).collect();
    let ys: Vec<f64> = labels.iter().map(|&y| f64::from(y)).collect();
    let mut summary = Vec::with_capacity(k_max - 1);
    for k in 2..=k_max {
        let counts: Vec<u64> = rows.iter().map(|r| r.count(k)).collect();
        let xs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        let pearson = if xs.len() >= 2 {
            pearson(&xs, &ys)?
        } else {
            Correlation::Undefined
        };
        let mi = if counts.is_empty() {
            0.0
        } else {
            mutual_information(&counts, &labels, binning)?
        };
        summary.push(L3Row { k, pearson, mi });
    }
    Ok(L3Report {
        rows: summary,
        census: rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{parse_network, Mode};

    #[test]
    fn triangle_row() {
        let tri = parse_network("A\tB\nB\tC\nC\tA\n", Mode::Binary).unwrap();
        let rows = census(&tri, &[(0, 1, 1)], 3, 1).unwrap();
        assert_eq!(rows[0].counts, vec![1, 0]);
        assert!(census(&tri, &[], 3, 1).unwrap().is_empty());
    }

    #[test]
    fn workers_do_not_change_results() {
        let text: String = (0..30)
            .flat_map(|i| [(i, (i * 7 + 3) % 30), (i, (i * 11 + 5) % 30)])
            .filter(|(a, b)| a != b)
            .map(|(a, b)| format!("n{a}\tn{b}\n"))
            .collect();
        let g = parse_network(&text, Mode::Binary).unwrap();
        let pairs: Vec<_> = (0..20).map(|i| (i, (i + 9) % g.len(), (i % 2) as u8)).collect();
        assert_eq!(census(&g, &pairs, 5, 1).unwrap(), census(&g, &pairs, 5, 3).unwrap());
    }

    #[test]
    fn matching_graph_gives_undefined_rows() {
        // Perfect matching: no path longer than one edge exists.
        let text: String = (0..10).map(|i| format!("a{i}\tb{i}\n")).collect();
        let g = parse_network(&text, Mode::Binary).unwrap();
        let report = l3_report(&g, 5, 5, 4, 0, BinSpec::default(), 1).unwrap();
        for row in &report.rows {
            assert_eq!(row.pearson, Correlation::Undefined);
            assert_eq!(row.mi, 0.0);
        }
        assert_eq!(report.summary_csv().lines().count(), 4);
    }

    #[test]
    fn insufficient_pairs() {
        let g = parse_network("A\tB\n", Mode::Binary).unwrap();
        assert!(l3_report(&g, 2, 0, 3, 0, BinSpec::default(), 1).is_err());
        assert!(l3_report(&g, 1, 1, 3, 0, BinSpec::default(), 1).is_err());
    }
}
