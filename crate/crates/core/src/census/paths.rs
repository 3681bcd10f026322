//! Exact simple-path enumeration between node pairs.
//!
//! Depth-first search with on-path marking. Each search first runs a BFS
//! from the target bounded at `k_max` hops; a branch is cut as soon as the
//! remaining edge budget is smaller than the current node's hop distance to
//! the target. The distance ignores path membership, so it is a lower bound
//! and the cut never drops a valid path.

use crate::error::{Error, Result};
use crate::graph::PpiNetwork;

const FAR: u32 = u32::MAX;

/// Reusable scratch state for path searches on one network.
///
/// Not shareable across threads; give every worker its own counter.
pub struct PathCounter<'a> {
    net: &'a PpiNetwork,
    on_path: Vec<bool>,
    dist: Vec<u32>,
    touched: Vec<usize>,
    queue: Vec<usize>,
    path: Vec<usize>,
}

impl<'a> PathCounter<'a> {
    pub fn new(net: &'a PpiNetwork) -> Self {
        Self {
            net,
            on_path: vec![false; net.len()],
            dist: vec![FAR; net.len()],
            touched: Vec::new(),
            queue: Vec::new(),
            path: Vec::new(),
        }
    }

    fn check(&self, u: usize, v: usize, k: usize) -> Result<()> {
        let n = self.net.len();
        for x in [u, v] {
            if x >= n {
                return Err(Error::NodeOutOfRange { index: x, len: n });
            }
        }
        if u == v {
            return Err(Error::InvalidArgument(format!(
                "path endpoints must differ (got {u} twice)"
            )));
        }
        if k < 1 {
            return Err(Error::InvalidArgument("path length must be at least 1".into()));
        }
        Ok(())
    }

    fn bfs_from(&mut self, target: usize, depth: usize) {
        for &x in &self.touched {
            self.dist[x] = FAR;
        }
        self.touched.clear();
        self.queue.clear();
        self.dist[target] = 0;
        self.touched.push(target);
        self.queue.push(target);
        let mut head = 0;
        while head < self.queue.len() {
            let x = self.queue[head];
            head += 1;
            let d = self.dist[x];
            if d as usize >= depth {
                continue;
            }
            for &y in self.net.adj(x) {
                if self.dist[y] == FAR {
                    self.dist[y] = d + 1;
                    self.touched.push(y);
                    self.queue.push(y);
                }
            }
        }
    }

    /// Number of simple paths from `u` to `v` of every edge length up to
    /// `k_max`; entry `k` of the result holds the length-`k` count.
    ///
    /// With `exclude_direct_edge`, the edge `(u, v)` is treated as absent.
    pub fn counts_by_length(
        &mut self,
        u: usize,
        v: usize,
        k_max: usize,
        exclude_direct_edge: bool,
    ) -> Result<Vec<u64>> {
        self.check(u, v, k_max)?;
        let mut counts = vec![0u64; k_max + 1];
        self.bfs_from(v, k_max);
        if self.dist[u] == FAR {
            return Ok(counts);
        }
        self.on_path[u] = true;
        self.descend(u, 0, k_max, v, exclude_direct_edge, &mut counts);
        self.on_path[u] = false;
        Ok(counts)
    }

    fn descend(
        &mut self,
        cur: usize,
        depth: usize,
        k_max: usize,
        target: usize,
        skip_direct: bool,
        counts: &mut [u64],
    ) {
        let net = self.net;
        let next_depth = depth + 1;
        for &x in net.adj(cur) {
            if x == target {
                if !(skip_direct && depth == 0) {
                    counts[next_depth] += 1;
                }
                continue;
            }
            if next_depth >= k_max || self.on_path[x] {
                continue;
            }
            let d = self.dist[x];
            if d == FAR || d as usize > k_max - next_depth {
                continue;
            }
            self.on_path[x] = true;
            self.descend(x, next_depth, k_max, target, skip_direct, counts);
            self.on_path[x] = false;
        }
    }

    pub fn count(&mut self, u: usize, v: usize, k: usize, exclude_direct_edge: bool) -> Result<u64> {
        Ok(self.counts_by_length(u, v, k, exclude_direct_edge)?[k])
    }

    /// Calls `visit` with every simple path of exactly `k` edges from `u`
    /// to `v`, as the node sequence `[u, .., v]`, in ascending-neighbor
    /// lexicographic order.
    pub fn for_each_path(
        &mut self,
        u: usize,
        v: usize,
        k: usize,
        exclude_direct_edge: bool,
        mut visit: impl FnMut(&[usize]),
    ) -> Result<()> {
        self.check(u, v, k)?;
        self.bfs_from(v, k);
        self.path.clear();
        self.path.push(u);
        self.on_path[u] = true;
        self.walk(k, v, exclude_direct_edge, &mut visit);
        self.on_path[u] = false;
        self.path.clear();
        Ok(())
    }

    fn walk(&mut self, k: usize, target: usize, skip_direct: bool, visit: &mut impl FnMut(&[usize])) {
        let net = self.net;
        let depth = self.path.len() - 1;
        let cur = self.path[depth];
        let remaining = k - depth - 1;
        for &x in net.adj(cur) {
            if x == target {
                if remaining == 0 && !(skip_direct && depth == 0) {
                    self.path.push(x);
                    visit(&self.path);
                    self.path.pop();
                }
                continue;
            }
            if remaining == 0 || self.on_path[x] {
                continue;
            }
            let d = self.dist[x];
            if d == FAR || d as usize > remaining {
                continue;
            }
            self.on_path[x] = true;
            self.path.push(x);
            self.walk(k, target, skip_direct, visit);
            self.path.pop();
            self.on_path[x] = false;
        }
    }
}

/// Convenience wrapper around a one-shot [`PathCounter`].
pub fn count_simple_paths(
    net: &PpiNetwork,
    u: usize,
    v: usize,
    k: usize,
    exclude_direct_edge: bool,
) -> Result<u64> {
    PathCounter::new(net).count(u, v, k, exclude_direct_edge)
}
