use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Storage {
    /// Row-major `n × n`.
    Dense(Vec<f64>),
    /// Only values `≤ cutoff` are stored; everything else is known to exceed it.
    Sparse {
        rows: Vec<Vec<(usize, f64)>>,
        cutoff: f64,
    },
}

/// Symmetric matrix of Fermat costs `ℓ_p^p` (or any other metric values).
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    pub p: f64,
    pub m: usize,
    pub storage: Storage,
    pub normalized: bool,
    /// Product of all factors applied since construction.
    pub scale: f64,
}

impl DistanceMatrix {
    pub fn dense(n: usize, values: Vec<f64>, p: f64, m: usize) -> Self {
        assert_eq!(values.len(), n * n);
        DistanceMatrix {
            n,
            p,
            m,
            storage: Storage::Dense(values),
            normalized: false,
            scale: 1.0,
        }
    }

    /// Symmetrizes by the smaller value of each pair and drops entries above `cutoff`.
    pub fn sparse_from_rows(rows: Vec<Vec<(usize, f64)>>, p: f64, m: usize, cutoff: f64) -> Self {
        let n = rows.len();
        let mut sym: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, row) in rows.iter().enumerate() {
            for &(j, v) in row {
                if v <= cutoff {
                    sym[i].push((j, v));
                    sym[j].push((i, v));
                }
            }
        }
        for row in &mut sym {
            row.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
            row.dedup_by_key(|e| e.0);
        }
        for (i, row) in sym.iter_mut().enumerate() {
            if row.binary_search_by_key(&i, |e| e.0).is_err() {
                let pos = row.partition_point(|e| e.0 < i);
                row.insert(pos, (i, 0.0));
            }
        }
        DistanceMatrix {
            n,
            p,
            m,
            storage: Storage::Sparse { rows: sym, cutoff },
            normalized: false,
            scale: 1.0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Value at `(i, j)`; infinity for pairs beyond a sparse cutoff.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.storage {
            Storage::Dense(v) => v[i * self.n + j],
            Storage::Sparse { rows, .. } => rows[i]
                .binary_search_by_key(&j, |e| e.0)
                .map_or(f64::INFINITY, |k| rows[i][k].1),
        }
    }

    /// Largest value guaranteed to be stored; infinite for dense storage.
    pub fn cutoff(&self) -> f64 {
        match &self.storage {
            Storage::Dense(_) => f64::INFINITY,
            Storage::Sparse { cutoff, .. } => *cutoff,
        }
    }

    /// Calls `f(j, value)` for every stored finite entry of row `i`, in column order.
    pub fn for_each_in_row(&self, i: usize, mut f: impl FnMut(usize, f64)) {
        match &self.storage {
            Storage::Dense(v) => {
                for (j, &x) in v[i * self.n..(i + 1) * self.n].iter().enumerate() {
                    if x.is_finite() {
                        f(j, x);
                    }
                }
            }
            Storage::Sparse { rows, .. } => {
                for &(j, x) in &rows[i] {
                    f(j, x);
                }
            }
        }
    }

    /// Every value (and the cutoff) multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let storage = match &self.storage {
            Storage::Dense(v) => Storage::Dense(v.iter().map(|x| x * factor).collect()),
            Storage::Sparse { rows, cutoff } => Storage::Sparse {
                rows: rows
                    .iter()
                    .map(|r| r.iter().map(|&(j, x)| (j, x * factor)).collect())
                    .collect(),
                cutoff: cutoff * factor,
            },
        };
        DistanceMatrix {
            storage,
            scale: self.scale * factor,
            ..self.clone()
        }
    }

    /// Applies an increasing function to every value and to the cutoff.
    /// `scale` keeps describing the values before the map.
    pub fn map_increasing(&self, f: impl Fn(f64) -> f64) -> Self {
        let storage = match &self.storage {
            Storage::Dense(v) => Storage::Dense(v.iter().map(|&x| f(x)).collect()),
            Storage::Sparse { rows, cutoff } => Storage::Sparse {
                rows: rows
                    .iter()
                    .map(|r| r.iter().map(|&(j, x)| (j, f(x))).collect())
                    .collect(),
                cutoff: f(*cutoff),
            },
        };
        DistanceMatrix {
            storage,
            ..self.clone()
        }
    }

    /// Dense copy (sparse gaps become infinity).
    pub fn to_dense_values(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Dense(v) => v.clone(),
            Storage::Sparse { .. } => {
                let mut out = vec![f64::INFINITY; self.n * self.n];
                for i in 0..self.n {
                    self.for_each_in_row(i, |j, x| out[i * self.n + j] = x);
                }
                out
            }
        }
    }

    /// Largest `|d_ij − d_ji|` over stored entries.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            self.for_each_in_row(i, |j, x| worst = worst.max((x - self.get(j, i)).abs()));
        }
        worst
    }

    fn header(&self) -> String {
        format!(
            "# p={:?},m={},n={},normalized={},scale={:?},cutoff={:?}",
            self.p,
            self.m,
            self.n,
            self.normalized,
            self.scale,
            self.cutoff()
        )
    }

    /// Dense rows, or `i,j,value` triplets (`i ≤ j`) for sparse storage,
    /// after a one-line metadata header.
    pub fn to_csv(&self) -> String {
        let mut s = self.header();
        s.push('\n');
        match &self.storage {
            Storage::Dense(v) => {
                for i in 0..self.n {
                    for j in 0..self.n {
                        if j > 0 {
                            s.push(',');
                        }
                        let _ = write!(s, "{:.16e}", v[i * self.n + j]);
                    }
                    s.push('\n');
                }
            }
            Storage::Sparse { rows, .. } => {
                s.push_str("i,j,value\n");
                for (i, row) in rows.iter().enumerate() {
                    for &(j, x) in row {
                        if j >= i {
                            let _ = writeln!(s, "{i},{j},{x:.16e}");
                        }
                    }
                }
            }
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let head = lines
            .next()
            .and_then(|l| l.strip_prefix("# "))
            .ok_or_else(|| Error::Parse("distance CSV lacks its metadata line".into()))?;
        let mut p = None;
        let mut m = None;
        let mut n = None;
        let mut normalized = false;
        let mut scale = 1.0;
        let mut cutoff = f64::INFINITY;
        for field in head.split(',') {
            let (k, v) = field
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad metadata field `{field}`")))?;
            let bad = || Error::Parse(format!("bad metadata value `{field}`"));
            match k {
                "p" => p = Some(v.parse::<f64>().map_err(|_| bad())?),
                "m" => m = Some(v.parse::<usize>().map_err(|_| bad())?),
                "n" => n = Some(v.parse::<usize>().map_err(|_| bad())?),
                "normalized" => normalized = v.parse().map_err(|_| bad())?,
                "scale" => scale = v.parse().map_err(|_| bad())?,
                "cutoff" => cutoff = v.parse().map_err(|_| bad())?,
                _ => return Err(Error::Parse(format!("unknown metadata key `{k}`"))),
            }
        }
        let (p, m, n) = match (p, m, n) {
            (Some(p), Some(m), Some(n)) => (p, m, n),
            _ => return Err(Error::Parse("metadata needs p, m and n".into())),
        };
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number `{s}`")))
        };
        let mut dm = if cutoff.is_infinite() {
            let mut values = Vec::with_capacity(n * n);
            for line in lines.filter(|l| !l.trim().is_empty()) {
                for f in line.split(',') {
                    values.push(num(f)?);
                }
            }
            if values.len() != n * n {
                return Err(Error::Parse(format!("expected {} values, got {}", n * n, values.len())));
            }
            DistanceMatrix::dense(n, values, p, m)
        } else {
            let mut rows = vec![Vec::new(); n];
            for line in lines.skip(1).filter(|l| !l.trim().is_empty()) {
                let f: Vec<&str> = line.split(',').collect();
                if f.len() != 3 {
                    return Err(Error::Parse(format!("bad triplet `{line}`")));
                }
                let i: usize = f[0].trim().parse().map_err(|_| Error::Parse(format!("bad index in `{line}`")))?;
                let j: usize = f[1].trim().parse().map_err(|_| Error::Parse(format!("bad index in `{line}`")))?;
                if i >= n || j >= n {
                    return Err(Error::Parse(format!("index out of range in `{line}`")));
                }
                rows[i].push((j, num(f[2])?));
            }
            DistanceMatrix::sparse_from_rows(rows, p, m, cutoff)
        };
        dm.normalized = normalized;
        dm.scale = scale;
        Ok(dm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips() {
        let d = DistanceMatrix::dense(2, vec![0.0, 0.25, 0.25, 0.0], 2.0, 1);
        assert_eq!(DistanceMatrix::from_csv(&d.to_csv()).unwrap(), d);
        let s = DistanceMatrix::sparse_from_rows(vec![vec![(1, 0.1)], vec![], vec![]], 2.0, 2, 0.5).scaled(3.0);
        let back = DistanceMatrix::from_csv(&s.to_csv()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.get(1, 0), 0.1 * 3.0);
        assert!(back.get(0, 2).is_infinite());
    }
}
