use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Symmetric nonnegative weights in compressed-row form with cached degrees.
///
/// Built from unordered pairs, so `w(i, j)` and `w(j, i)` are the same
/// stored value.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseWeightedGraph {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    degrees: Vec<f64>,
    self_loops: bool,
}

impl SparseWeightedGraph {
    /// Builds from unordered pairs `(i, j, w)`. Pairs with `i == j` are
    /// self-loops. Duplicate pairs are summed. Zero weights are dropped.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut self_loops = false;
        for &(i, j, w) in pairs {
            if i >= n || j >= n {
                return Err(Error::InvalidParameter(format!("edge ({i}, {j}) out of range for n = {n}")));
            }
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidParameter(format!("edge ({i}, {j}) has weight {w}")));
            }
            if w == 0.0 {
                continue;
            }
            rows[i].push((j, w));
            if i != j {
                rows[j].push((i, w));
            } else {
                self_loops = true;
            }
        }
        for row in &mut rows {
            row.sort_by_key(|e| e.0);
            // merge duplicates in place
            let mut out: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for &(c, w) in row.iter() {
                match out.last_mut() {
                    Some(last) if last.0 == c => last.1 += w,
                    _ => out.push((c, w)),
                }
            }
            *row = out;
        }
        Ok(Self::from_sorted_rows(rows, self_loops))
    }

    /// Rows must be sorted by column and mutually symmetric.
    pub(crate) fn from_sorted_rows(rows: Vec<Vec<(usize, f64)>>, self_loops: bool) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let nnz = rows.iter().map(Vec::len).sum();
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        let mut degrees = Vec::with_capacity(n);
        for row in rows {
            let mut d = 0.0;
            for (c, w) in row {
                cols.push(c);
                vals.push(w);
                d += w;
            }
            degrees.push(d);
            row_ptr.push(cols.len());
        }
        SparseWeightedGraph {
            n,
            row_ptr,
            cols,
            vals,
            degrees,
            self_loops,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored entries, counting both directions of each edge.
    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn includes_self_loops(&self) -> bool {
        self.self_loops
    }

    /// Row sums including any self-loop.
    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[a..b].iter().copied().zip(self.vals[a..b].iter().copied())
    }

    pub(crate) fn row_slices(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.cols[a..b], &self.vals[a..b])
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let (c, v) = self.row_slices(i);
        c.binary_search(&j).map_or(0.0, |k| v[k])
    }

    /// Number of stored off-diagonal entries (both directions).
    pub fn off_diagonal_nnz(&self) -> usize {
        (0..self.n)
            .map(|i| self.row_slices(i).0.iter().filter(|&&j| j != i).count())
            .sum()
    }

    /// New graph with every weight mapped by `f(i, j, w)`; `f` must be symmetric in `(i, j)`.
    pub fn map_weights(&self, f: impl Fn(usize, usize, f64) -> f64) -> Self {
        let rows = (0..self.n)
            .map(|i| self.row(i).map(|(j, w)| (j, f(i.min(j), i.max(j), w))).collect())
            .collect();
        Self::from_sorted_rows(rows, self.self_loops)
    }

    /// Induced subgraph on `idx` (relabelled `0..idx.len()` in that order).
    pub fn subgraph(&self, idx: &[usize]) -> Self {
        let mut pos = vec![usize::MAX; self.n];
        for (k, &i) in idx.iter().enumerate() {
            pos[i] = k;
        }
        let rows = idx
            .iter()
            .map(|&i| {
                let mut r: Vec<(usize, f64)> = self
                    .row(i)
                    .filter(|&(j, _)| pos[j] != usize::MAX)
                    .map(|(j, w)| (pos[j], w))
                    .collect();
                r.sort_by_key(|e| e.0);
                r
            })
            .collect();
        Self::from_sorted_rows(rows, self.self_loops)
    }

    /// Copy without self-loops.
    pub fn without_self_loops(&self) -> Self {
        let rows = (0..self.n)
            .map(|i| self.row(i).filter(|&(j, _)| j != i).collect())
            .collect();
        Self::from_sorted_rows(rows, false)
    }

    /// `y = W x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let (c, v) = self.row_slices(i);
            y[i] = c.iter().zip(v).map(|(&j, &w)| w * x[j]).sum();
        }
    }

    /// Connected-component label of every node (off-diagonal edges only),
    /// numbered in order of first appearance.
    pub fn components(&self) -> (usize, Vec<usize>) {
        let mut label = vec![usize::MAX; self.n];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = count;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for (v, _) in self.row(u) {
                    if label[v] == usize::MAX {
                        label[v] = count;
                        stack.push(v);
                    }
                }
            }
            count += 1;
        }
        (count, label)
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut a = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            for (j, w) in self.row(i) {
                a[i * self.n + j] = w;
            }
        }
        a
    }

    /// Triplet CSV (`i,j,w`, one line per unordered pair) preceded by a metadata line.
    pub fn to_triplet_csv(&self, meta: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {meta}");
        s.push_str("i,j,w\n");
        for i in 0..self.n {
            for (j, w) in self.row(i) {
                if j >= i {
                    let _ = writeln!(s, "{i},{j},{w:.16e}");
                }
            }
        }
        s
    }
}
