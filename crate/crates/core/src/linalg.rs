//! Symmetric positive-definite solves for the Newton systems.
//!
//! The Hessians live on a fixed graph (the interior mesh nodes), so the
//! unknowns are renumbered once by reverse Cuthill–McKee and stored in skyline
//! (variable band) form. For 2D meshes of a few thousand nodes the envelope
//! Cholesky factorisation is fast and deterministic.

use std::collections::VecDeque;

use crate::{Error, Result};

/// Reverse Cuthill–McKee ordering of an undirected graph given by adjacency lists.
/// Returns `order` with `order[new] = old`.
pub(crate) fn reverse_cuthill_mckee(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let seed = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| adj[i].len()).unwrap();
        let start = pseudo_peripheral(adj, seed, &visited);
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (adj[w].len(), w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn pseudo_peripheral(adj: &[Vec<usize>], seed: usize, blocked: &[bool]) -> usize {
    let mut node = seed;
    let mut ecc = 0;
    loop {
        let levels = bfs_levels(adj, node, blocked);
        let depth = *levels.iter().flatten().max().unwrap();
        if depth <= ecc {
            return node;
        }
        ecc = depth;
        node = (0..adj.len())
            .filter(|&i| levels[i] == Some(depth))
            .min_by_key(|&i| (adj[i].len(), i))
            .unwrap();
    }
}

fn bfs_levels(adj: &[Vec<usize>], start: usize, blocked: &[bool]) -> Vec<Option<usize>> {
    let mut level = vec![None; adj.len()];
    level[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        let l = level[v].unwrap();
        for &w in &adj[v] {
            if level[w].is_none() && !blocked[w] {
                level[w] = Some(l + 1);
                queue.push_back(w);
            }
        }
    }
    level
}

/// Lower-triangular envelope of a symmetric matrix.
#[derive(Clone, Debug)]
pub(crate) struct Skyline {
    /// First stored column of each row.
    first: Vec<usize>,
    /// Offset of row `i`'s first entry in `values`.
    offset: Vec<usize>,
    values: Vec<f64>,
}

impl Skyline {
    /// Envelope for a graph already numbered in its final order.
    pub(crate) fn from_graph(adj: &[Vec<usize>]) -> Self {
        let n = adj.len();
        let mut first = Vec::with_capacity(n);
        let mut offset = Vec::with_capacity(n + 1);
        let mut total = 0;
        for (i, nbrs) in adj.iter().enumerate() {
            let f = nbrs.iter().copied().filter(|&j| j < i).min().unwrap_or(i);
            first.push(f);
            offset.push(total);
            total += i - f + 1;
        }
        offset.push(total);
        Skyline { first, offset, values: vec![0.0; total] }
    }

    pub(crate) fn dim(&self) -> usize {
        self.first.len()
    }

    pub(crate) fn clear(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
    }

    /// Accumulate into entry `(i, j)`; the symmetric partner is implied.
    #[inline]
    pub(crate) fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        debug_assert!(j >= self.first[i]);
        self.values[self.offset[i] + j - self.first[i]] += v;
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.offset[i] + j - self.first[i]]
    }

    /// In-place envelope Cholesky `A = L Lᵀ`.
    pub(crate) fn factor(&mut self) -> Result<()> {
        let n = self.dim();
        for i in 0..n {
            let fi = self.first[i];
            for j in fi..i {
                let fj = self.first[j];
                let k0 = fi.max(fj);
                let ri = self.offset[i] - fi;
                let rj = self.offset[j] - fj;
                let mut s = self.values[ri + j];
                for k in k0..j {
                    s -= self.values[ri + k] * self.values[rj + k];
                }
                self.values[ri + j] = s / self.values[rj + j];
            }
            let ri = self.offset[i] - fi;
            let mut d = self.values[ri + i];
            for k in fi..i {
                d -= self.values[ri + k] * self.values[ri + k];
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite(i));
            }
            self.values[ri + i] = d.sqrt();
        }
        Ok(())
    }

    /// Solve with a factor produced by [`Skyline::factor`].
    pub(crate) fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let mut s = b[i];
            for k in self.first[i]..i {
                s -= self.at(i, k) * b[k];
            }
            b[i] = s / self.at(i, i);
        }
        for i in (0..n).rev() {
            b[i] /= self.at(i, i);
            let bi = b[i];
            for k in self.first[i]..i {
                b[k] -= self.at(i, k) * bi;
            }
        }
    }

    #[cfg(test)]
    fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = vec![0.0; n];
        for i in 0..n {
            for j in self.first[i]..=i {
                let a = self.at(i, j);
                y[i] += a * x[j];
                if j != i {
                    y[j] += a * x[i];
                }
            }
        }
        y
    }
}
