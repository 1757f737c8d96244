//! Compressed sparse row storage for complex superoperators.

use std::collections::VecDeque;

use nalgebra::DMatrix;

use crate::exec::Execution;
use crate::C64;

/// Row count above which [`CsrMatrix::mul_vec`] goes parallel.
const PARALLEL_ROWS: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are summed
    /// and entries that cancel to exactly zero are dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        let mut m = CsrMatrix {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        };
        m.prune_zeros();
        m
    }

    fn prune_zeros(&mut self) {
        if self.values.iter().all(|v| *v != C64::new(0.0, 0.0)) {
            return;
        }
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut values = Vec::with_capacity(self.values.len());
        for r in 0..self.nrows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                if self.values[k] != C64::new(0.0, 0.0) {
                    indices.push(self.indices[k]);
                    values.push(self.values[k]);
                }
            }
            indptr[r + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.values = values;
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates `(col, value)` over row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let span = self.indptr[r]..self.indptr[r + 1];
        match self.indices[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// `out = self * x`.
    pub fn mul_vec_into(&self, x: &[C64], out: &mut [C64], exec: Execution) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(out.len(), self.nrows);
        let exec = if self.nrows >= PARALLEL_ROWS {
            exec
        } else {
            Execution::Sequential
        };
        exec.fill(out, |r| self.row(r).map(|(c, v)| v * x[c]).sum());
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.nrows];
        self.mul_vec_into(x, &mut out, Execution::default());
        out
    }

    /// Maximum absolute row sum; an upper bound on the spectral radius.
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|r| self.row(r).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Smallest index set containing `seeds` that is closed under the action
    /// of the matrix: if `j` is in the set and `A[i, j] != 0` then so is `i`.
    /// Returned sorted.
    pub fn reachable_from(&self, seeds: &[usize]) -> Vec<usize> {
        // column -> rows adjacency
        let mut col_ptr = vec![0usize; self.ncols + 1];
        for &c in &self.indices {
            col_ptr[c + 1] += 1;
        }
        for c in 0..self.ncols {
            col_ptr[c + 1] += col_ptr[c];
        }
        let mut fill = col_ptr.clone();
        let mut rows_of = vec![0usize; self.indices.len()];
        for r in 0..self.nrows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                let c = self.indices[k];
                rows_of[fill[c]] = r;
                fill[c] += 1;
            }
        }

        let mut seen = vec![false; self.nrows.max(self.ncols)];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &s in seeds {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(j) = queue.pop_front() {
            if j >= self.ncols {
                continue;
            }
            for &i in &rows_of[col_ptr[j]..col_ptr[j + 1]] {
                if !seen[i] {
                    seen[i] = true;
                    queue.push_back(i);
                }
            }
        }
        (0..seen.len()).filter(|&i| seen[i]).collect()
    }

    /// Principal submatrix on `subset` (sorted), stored sparse.
    pub fn restrict(&self, subset: &[usize]) -> CsrMatrix {
        let mut position = vec![usize::MAX; self.ncols];
        for (k, &i) in subset.iter().enumerate() {
            position[i] = k;
        }
        let mut triplets = Vec::new();
        for (k, &r) in subset.iter().enumerate() {
            for (c, v) in self.row(r) {
                if position[c] != usize::MAX {
                    triplets.push((k, position[c], v));
                }
            }
        }
        CsrMatrix::from_triplets(subset.len(), subset.len(), triplets)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }
}
