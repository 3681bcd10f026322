//! Synthetic complementarity networks: proteins carry a shape and a
//! concave/convex orientation, and interact mostly when shapes match and
//! orientations differ. Such networks are bipartite within each shape, so
//! interacting pairs are joined by many L3 paths and few L2 paths.

use serde::{Deserialize, Serialize};

use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::graph::{EmbeddingTable, PpiNetwork};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub n: usize,
    pub shapes: usize,
    pub q_hit: f64,
    pub q_noise: f64,
    pub sigma: f64,
    /// Edges removed from the network and reported as held-out positives,
    /// matched by as many held-out negatives.
    pub heldout: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n: 600,
            shapes: 12,
            q_hit: 0.4,
            q_noise: 0.002,
            sigma: 0.1,
            heldout: 0,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.shapes < 2 {
            return Err(Error::InvalidArgument("need at least two shapes".into()));
        }
        if self.n < 2 {
            return Err(Error::InvalidArgument("need at least two proteins".into()));
        }
        if !(0.0 <= self.q_noise && self.q_noise < self.q_hit && self.q_hit <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "need 0 <= q_noise < q_hit <= 1, got q_noise = {}, q_hit = {}",
                self.q_noise, self.q_hit
            )));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!("sigma must be finite and >= 0, got {}", self.sigma)));
        }
        Ok(())
    }

    /// Embedding width: one-hot shape plus one-hot orientation.
    pub fn dim(&self) -> usize {
        self.shapes + 2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundTruth {
    pub shape: Vec<usize>,
    pub convex: Vec<bool>,
    /// `(u, v, interacts)` pairs absent from the returned network.
    pub heldout: Vec<(usize, usize, bool)>,
}

impl GroundTruth {
    pub fn complementary(&self, u: usize, v: usize) -> bool {
        self.shape[u] == self.shape[v] && self.convex[u] != self.convex[v]
    }
}

#[derive(Debug, Clone)]
pub struct SynthNetwork {
    pub network: PpiNetwork,
    pub embeddings: EmbeddingTable,
    pub truth: GroundTruth,
}

pub fn protein_id(i: usize) -> String {
    format!("P{i:05}")
}

pub fn synth_network(cfg: &SynthConfig) -> Result<SynthNetwork> {
    cfg.validate()?;
    let mut r = rng::stream(cfg.seed, "synth");
    let shape: Vec<usize> = (0..cfg.n).map(|_| r.random_range(0..cfg.shapes)).collect();
    let convex: Vec<bool> = (0..cfg.n).map(|_| r.random::<bool>()).collect();
    let truth_of = |u: usize, v: usize| shape[u] == shape[v] && convex[u] != convex[v];

    let mut edges = Vec::new();
    for u in 0..cfg.n {
        for v in u + 1..cfg.n {
            let q = if truth_of(u, v) { cfg.q_hit } else { cfg.q_noise };
            if r.random::<f64>() < q {
                edges.push((u, v));
            }
        }
    }

    let mut heldout = Vec::new();
    if cfg.heldout > 0 {
        if cfg.heldout > edges.len() {
            return Err(Error::Insufficient(format!(
                "cannot hold out {} of {} edges",
                cfg.heldout,
                edges.len()
            )));
        }
        let picked = rand::seq::index::sample(&mut r, edges.len(), cfg.heldout).into_vec();
        let mut drop = vec![false; edges.len()];
        for i in picked {
            drop[i] = true;
            heldout.push((edges[i].0, edges[i].1, true));
        }
        heldout.sort_unstable();
        let mut kept = Vec::with_capacity(edges.len());
        for (e, d) in edges.iter().zip(&drop) {
            if !d {
                kept.push(*e);
            }
        }
        let edge_set: std::collections::HashSet<(usize, usize)> = edges.iter().copied().collect();
        let mut negatives = std::collections::BTreeSet::new();
        let max_neg = cfg.n * (cfg.n - 1) / 2 - edges.len();
        let want = cfg.heldout.min(max_neg);
        while negatives.len() < want {
            let u = r.random_range(0..cfg.n);
            let v = r.random_range(0..cfg.n);
            let key = (u.min(v), u.max(v));
            if u != v && !edge_set.contains(&key) {
                negatives.insert(key);
            }
        }
        heldout.extend(negatives.into_iter().map(|(u, v)| (u, v, false)));
        edges = kept;
    }

    let ids: Vec<String> = (0..cfg.n).map(protein_id).collect();
    let network = PpiNetwork::from_edges(ids.clone(), &edges)?;

    let d = cfg.dim();
    let mut embeddings = EmbeddingTable::new(d)?;
    let noise = Normal::new(0.0, cfg.sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut er = rng::stream(cfg.seed, "synth-embeddings");
    for (i, id) in ids.iter().enumerate() {
        let mut row = vec![0.0; d];
        row[shape[i]] = 1.0;
        row[cfg.shapes + usize::from(convex[i])] = 1.0;
        if cfg.sigma > 0.0 {
            for x in &mut row {
                *x += noise.sample(&mut er);
            }
        }
        embeddings.insert(id, &row)?;
    }
    Ok(SynthNetwork {
        network,
        embeddings,
        truth: GroundTruth { shape, convex, heldout },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SynthConfig {
        SynthConfig {
            n: 120,
            shapes: 4,
            ..Default::default()
        }
    }

    #[test]
    fn noiseless_edges_are_complementary() {
        let cfg = SynthConfig {
            q_noise: 0.0,
            sigma: 0.0,
            ..small()
        };
        let s = synth_network(&cfg).unwrap();
        assert!(s.network.edge_count() > 0);
        for (u, v) in s.network.edges() {
            let (a, b) = (
                s.network.id(u)[1..].parse::<usize>().unwrap(),
                s.network.id(v)[1..].parse::<usize>().unwrap(),
            );
            assert!(s.truth.complementary(a, b));
        }
        let e = s.embeddings.require(&protein_id(0)).unwrap();
        assert_eq!(e.iter().filter(|&&x| x == 1.0).count(), 2);
    }

    #[test]
    fn deterministic() {
        let a = synth_network(&small()).unwrap();
        let b = synth_network(&small()).unwrap();
        assert_eq!(a.network.serialize(), b.network.serialize());
        assert_eq!(a.embeddings.serialize(), b.embeddings.serialize());
        let c = synth_network(&SynthConfig { seed: 1, ..small() }).unwrap();
        assert_ne!(a.network.serialize(), c.network.serialize());
    }

    #[test]
    fn invalid_probabilities() {
        for cfg in [
            SynthConfig { q_noise: 0.5, q_hit: 0.4, ..small() },
            SynthConfig { q_hit: 1.5, ..small() },
            SynthConfig { shapes: 1, ..small() },
            SynthConfig { q_noise: -0.1, ..small() },
        ] {
            assert!(synth_network(&cfg).is_err());
        }
    }

    #[test]
    fn heldout_pairs_leave_the_network() {
        let s = synth_network(&SynthConfig { heldout: 10, ..small() }).unwrap();
        assert_eq!(s.truth.heldout.len(), 20);
        for &(u, v, _) in &s.truth.heldout {
            assert!(!s.network.has_edge(u, v));
        }
    }
}
