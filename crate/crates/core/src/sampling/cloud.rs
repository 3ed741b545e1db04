use std::fmt::Write as _;

use crate::error::{Error, Result};

/// An ordered set of `n` points in `R^D`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    coords: Vec<f64>,
    dim: usize,
    /// Intrinsic dimension `m` of the support.
    pub intrinsic_dim: usize,
    pub seed: u64,
    pub model_tag: String,
    /// Poisson count `N` when the cloud came from a PPP draw.
    pub ppp_count: Option<usize>,
}

impl PointCloud {
    pub fn from_flat(coords: Vec<f64>, dim: usize, intrinsic_dim: usize) -> Result<Self> {
        if dim == 0 || coords.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: coords.len(),
            });
        }
        if intrinsic_dim == 0 || intrinsic_dim > dim {
            return Err(Error::InvalidParameter(format!(
                "intrinsic dimension {intrinsic_dim} must lie in 1..={dim}"
            )));
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coordinate".into()));
        }
        Ok(PointCloud {
            coords,
            dim,
            intrinsic_dim,
            seed: 0,
            model_tag: String::new(),
            ppp_count: None,
        })
    }

    pub fn from_points(points: &[Vec<f64>], intrinsic_dim: usize) -> Result<Self> {
        let dim = points.first().map_or(intrinsic_dim.max(1), Vec::len);
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(coords, dim, intrinsic_dim)
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Ambient dimension `D`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        euclid(self.point(i), self.point(j))
    }

    /// Cloud restricted to the given indices, in that order.
    pub fn subset(&self, idx: &[usize]) -> PointCloud {
        let mut coords = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            coords.extend_from_slice(self.point(i));
        }
        PointCloud {
            coords,
            ..self.clone()
        }
    }

    /// Appends one point (used for endpoint augmentation).
    pub fn with_point(&self, x: &[f64]) -> Result<PointCloud> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let mut out = self.clone();
        out.coords.extend_from_slice(x);
        Ok(out)
    }

    /// CSV with header `x1,...,xD` and 17 significant digits per value.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.coords.len() * 25 + 16);
        let header: Vec<String> = (1..=self.dim).map(|k| format!("x{k}")).collect();
        s.push_str(&header.join(","));
        s.push('\n');
        for p in self.iter() {
            for (k, v) in p.iter().enumerate() {
                if k > 0 {
                    s.push(',');
                }
                let _ = write!(s, "{v:.16e}");
            }
            s.push('\n');
        }
        s
    }

    /// Parses CSV written by [`PointCloud::to_csv`] or any numeric CSV whose
    /// first line is a header.
    pub fn from_csv(text: &str, intrinsic_dim: Option<usize>) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty point CSV".into()))?;
        let dim = header.split(',').count();
        let mut coords = Vec::new();
        for (row, line) in lines.enumerate() {
            let before = coords.len();
            for field in line.split(',') {
                let v: f64 = field.trim().parse().map_err(|_| {
                    Error::Parse(format!("row {}: bad number `{}`", row + 1, field.trim()))
                })?;
                coords.push(v);
            }
            if coords.len() - before != dim {
                return Err(Error::Parse(format!(
                    "row {}: expected {dim} fields, got {}",
                    row + 1,
                    coords.len() - before
                )));
            }
        }
        Self::from_flat(coords, dim, intrinsic_dim.unwrap_or(dim))
    }
}

pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
