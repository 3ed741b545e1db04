//! Uniform bucket grid over the first (at most three) coordinates.
//!
//! Candidates are filtered with the full Euclidean distance, so the index is
//! exact in any ambient dimension; it is only fast when the leading
//! coordinates carry most of the spread.

use crate::sampling::{euclid, PointCloud};

const MAX_AXES: usize = 3;

pub(crate) struct SpatialGrid<'a> {
    cloud: &'a PointCloud,
    axes: usize,
    lo: [f64; MAX_AXES],
    cell: f64,
    dims: [usize; MAX_AXES],
    start: Vec<usize>,
    items: Vec<usize>,
}

impl<'a> SpatialGrid<'a> {
    /// Grid with cells of side at least `cell`; the side grows if the grid
    /// would hold more than `8n + 8` cells.
    pub fn new(cloud: &'a PointCloud, cell: f64) -> Self {
        let axes = cloud.dim().min(MAX_AXES);
        let mut lo = [0.0; MAX_AXES];
        let mut hi = [0.0; MAX_AXES];
        for a in 0..axes {
            lo[a] = f64::INFINITY;
            hi[a] = f64::NEG_INFINITY;
        }
        for p in cloud.iter() {
            for a in 0..axes {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        let n = cloud.len();
        let mut cell = if cell > 0.0 && cell.is_finite() { cell } else { 1.0 };
        let max_cells = 8 * n + 8;
        let dims = loop {
            let mut dims = [1usize; MAX_AXES];
            let mut total: f64 = 1.0;
            for a in 0..axes {
                let span = (hi[a] - lo[a]).max(0.0);
                dims[a] = (span / cell).floor() as usize + 1;
                total *= dims[a] as f64;
            }
            if total <= max_cells as f64 {
                break dims;
            }
            cell *= (total / max_cells as f64).powf(1.0 / axes as f64) * 1.0001;
        };
        let mut grid = SpatialGrid {
            cloud,
            axes,
            lo,
            cell,
            dims,
            start: Vec::new(),
            items: Vec::new(),
        };
        let ncell: usize = dims[..axes].iter().product();
        let mut counts = vec![0usize; ncell + 1];
        let keys: Vec<usize> = cloud.iter().map(|p| grid.key(&grid.coords_of(p))).collect();
        for &k in &keys {
            counts[k + 1] += 1;
        }
        for c in 0..ncell {
            counts[c + 1] += counts[c];
        }
        let mut fill = counts.clone();
        let mut items = vec![0; n];
        for (i, &k) in keys.iter().enumerate() {
            items[fill[k]] = i;
            fill[k] += 1;
        }
        grid.start = counts;
        grid.items = items;
        grid
    }

    fn coords_of(&self, p: &[f64]) -> [usize; MAX_AXES] {
        let mut c = [0usize; MAX_AXES];
        for a in 0..self.axes {
            let t = ((p[a] - self.lo[a]) / self.cell).floor();
            c[a] = if t <= 0.0 {
                0
            } else {
                (t as usize).min(self.dims[a] - 1)
            };
        }
        c
    }

    fn key(&self, c: &[usize; MAX_AXES]) -> usize {
        let mut k = 0;
        for a in 0..self.axes {
            k = k * self.dims[a] + c[a];
        }
        k
    }

    fn bucket(&self, c: &[usize; MAX_AXES]) -> &[usize] {
        let k = self.key(c);
        &self.items[self.start[k]..self.start[k + 1]]
    }

    /// Visits every cell whose Chebyshev index distance from `center` is
    /// exactly `ring` (or at most `ring` when `filled`).
    fn visit_ring(&self, center: &[usize; MAX_AXES], ring: usize, filled: bool, mut f: impl FnMut(&[usize])) {
        let mut lo = [0usize; MAX_AXES];
        let mut hi = [0usize; MAX_AXES];
        for a in 0..self.axes {
            lo[a] = center[a].saturating_sub(ring);
            hi[a] = (center[a] + ring).min(self.dims[a] - 1);
        }
        let mut c = lo;
        loop {
            let on_ring = filled
                || (0..self.axes).any(|a| c[a].abs_diff(center[a]) == ring);
            if on_ring {
                f(self.bucket(&c));
            }
            let mut a = self.axes;
            loop {
                if a == 0 {
                    return;
                }
                a -= 1;
                if c[a] < hi[a] {
                    c[a] += 1;
                    break;
                }
                c[a] = lo[a];
            }
            if self.axes == 0 {
                return;
            }
        }
    }

    /// All points within distance `r` of `x` (inclusive), with distances, sorted by index.
    pub fn within(&self, x: &[f64], r: f64, out: &mut Vec<(usize, f64)>) {
        out.clear();
        let center = self.coords_of(x);
        let reach = (r / self.cell).ceil() as usize;
        self.visit_ring(&center, reach, true, |b| {
            for &j in b {
                let d = euclid(x, self.cloud.point(j));
                if d <= r {
                    out.push((j, d));
                }
            }
        });
        out.sort_unstable_by_key(|e| e.0);
    }

    /// The `k` nearest other points of point `i`, ordered by `(distance, index)`.
    pub fn knn(&self, i: usize, k: usize) -> Vec<(usize, f64)> {
        let x = self.cloud.point(i);
        let center = self.coords_of(x);
        let max_ring = self.dims[..self.axes].iter().copied().max().unwrap_or(1);
        let mut best: Vec<(usize, f64)> = Vec::with_capacity(k + 1);
        for ring in 0..=max_ring {
            self.visit_ring(&center, ring, false, |b| {
                for &j in b {
                    if j == i {
                        continue;
                    }
                    let d = euclid(x, self.cloud.point(j));
                    if best.len() < k || less(d, j, best[k - 1]) {
                        let pos = best.partition_point(|&e| less(e.1, e.0, (j, d)));
                        best.insert(pos, (j, d));
                        best.truncate(k);
                    }
                }
            });
            if best.len() == k && best[k - 1].1 <= ring as f64 * self.cell {
                break;
            }
        }
        best
    }
}

fn less(d: f64, j: usize, e: (usize, f64)) -> bool {
    d.total_cmp(&e.1).then(j.cmp(&e.0)).is_lt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{sample_iid, DensityModel, Domain};

    #[test]
    fn within_matches_brute_force() {
        let m = DensityModel::uniform(Domain::unit_square()).unwrap();
        let c = sample_iid(&m, 400, 3).unwrap();
        let g = SpatialGrid::new(&c, 0.07);
        let mut out = Vec::new();
        for i in (0..400).step_by(37) {
            g.within(c.point(i), 0.1, &mut out);
            let brute: Vec<usize> = (0..400).filter(|&j| c.dist(i, j) <= 0.1).collect();
            let got: Vec<usize> = out.iter().map(|e| e.0).collect();
            assert_eq!(got, brute);
        }
    }

    #[test]
    fn knn_matches_brute_force_in_3d() {
        let m = DensityModel::uniform(Domain::Box {
            lo: vec![0.0; 4],
            hi: vec![1.0, 1.0, 1.0, 0.3],
        })
        .unwrap();
        let c = sample_iid(&m, 300, 4).unwrap();
        let g = SpatialGrid::new(&c, 0.15);
        for i in (0..300).step_by(29) {
            let got = g.knn(i, 7);
            let mut brute: Vec<(usize, f64)> = (0..300).filter(|&j| j != i).map(|j| (j, c.dist(i, j))).collect();
            brute.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            brute.truncate(7);
            assert_eq!(got, brute);
        }
    }
}
