use crate::error::{Error, Result};
use crate::metric::dijkstra::dijkstra_heap;
use crate::sampling::{DensityModel, Domain};

pub const MIN_GRID_RES: usize = 32;
const MAX_GRID_NODES: usize = 1 << 22;

/// Continuum distance `L_p^p(x, y) = inf ∫ ρ^{(1−p)/m} ‖γ'‖` estimated by
/// Dijkstra on a regular grid of `res` nodes per axis with the full
/// `3^m − 1` neighbour stencil (8-connected in 2-D). Edge costs use the
/// density at the edge midpoint. `x` and `y` are joined to every grid
/// node within 1.5 spacings, so they need not lie on the lattice.
pub fn continuum_fermat_grid(model: &DensityModel, x: &[f64], y: &[f64], p: f64, res: usize) -> Result<f64> {
    let (lo, hi) = match model.domain() {
        Domain::Box { lo, hi } => (lo.clone(), hi.clone()),
        Domain::UnitDisk => (vec![-1.0, -1.0], vec![1.0, 1.0]),
        Domain::Circle => {
            return Err(Error::InvalidModel("grid distances need a flat domain".into()));
        }
    };
    let m = lo.len();
    if m > 3 {
        return Err(Error::InvalidParameter(format!("grid oracle supports m <= 3, got {m}")));
    }
    if res < MIN_GRID_RES {
        return Err(Error::GridTooCoarse { res, min: MIN_GRID_RES });
    }
    let total = res.checked_pow(m as u32).filter(|&t| t <= MAX_GRID_NODES).ok_or(
        Error::SizeCapExceeded {
            n: res.saturating_pow(m as u32),
            cap: MAX_GRID_NODES,
        },
    )?;
    model.eval(x)?;
    model.eval(y)?;
    if x == y {
        return Ok(0.0);
    }
    let expo = (1.0 - p) / m as f64;
    let step: Vec<f64> = (0..m).map(|k| (hi[k] - lo[k]) / (res - 1) as f64).collect();
    let coord = |idx: usize| -> Vec<f64> {
        let mut r = idx;
        let mut c = vec![0.0; m];
        for k in 0..m {
            c[k] = lo[k] + (r % res) as f64 * step[k];
            r /= res;
        }
        c
    };
    let inside: Vec<bool> = (0..total).map(|i| model.contains(&coord(i))).collect();
    let seg_cost = |a: &[f64], b: &[f64]| -> f64 {
        let mid: Vec<f64> = a.iter().zip(b).map(|(u, v)| 0.5 * (u + v)).collect();
        let len = a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
        len * model.eval_extended(&mid).powf(expo)
    };

    let offsets: Vec<Vec<isize>> = (0..3usize.pow(m as u32))
        .map(|code| {
            let mut c = code;
            (0..m)
                .map(|_| {
                    let o = (c % 3) as isize - 1;
                    c /= 3;
                    o
                })
                .collect::<Vec<_>>()
        })
        .filter(|o| o.iter().any(|&v| v != 0))
        .collect();

    // grid nodes near an endpoint, with the connecting segment cost
    let attach = |z: &[f64]| -> Vec<(usize, f64)> {
        let radius = 1.5 * step.iter().cloned().fold(0.0, f64::max);
        let mut base = Vec::with_capacity(m);
        for k in 0..m {
            let c = ((z[k] - lo[k]) / step[k]).round() as isize;
            base.push(c);
        }
        let mut out = Vec::new();
        for code in 0..5usize.pow(m as u32) {
            let mut c = code;
            let mut idx = 0usize;
            let mut mul = 1usize;
            let mut ok = true;
            for k in 0..m {
                let v = base[k] + (c % 5) as isize - 2;
                c /= 5;
                if v < 0 || v >= res as isize {
                    ok = false;
                    break;
                }
                idx += v as usize * mul;
                mul *= res;
            }
            if !ok || !inside[idx] {
                continue;
            }
            let pnt = coord(idx);
            let d: f64 = pnt.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            if d <= radius {
                out.push((idx, seg_cost(z, &pnt)));
            }
        }
        out
    };
    let from_x = attach(x);
    let to_y = attach(y);
    if from_x.is_empty() || to_y.is_empty() {
        return Err(Error::GridTooCoarse { res, min: MIN_GRID_RES });
    }
    let sx = total;
    let sy = total + 1;
    let mut y_link = vec![f64::INFINITY; total];
    for &(i, c) in &to_y {
        y_link[i] = c;
    }
    let direct = {
        let d: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        (d <= 1.5 * step.iter().cloned().fold(0.0, f64::max)).then(|| seg_cost(x, y))
    };

    let dist = dijkstra_heap(total + 2, sx, f64::INFINITY, |u, push| {
        if u == sx {
            for &(i, c) in &from_x {
                push(i, c);
            }
            if let Some(c) = direct {
                push(sy, c);
            }
            return;
        }
        if u == sy {
            return;
        }
        if y_link[u].is_finite() {
            push(sy, y_link[u]);
        }
        let here = coord(u);
        let mut multi = Vec::with_capacity(m);
        let mut r = u;
        for _ in 0..m {
            multi.push((r % res) as isize);
            r /= res;
        }
        for off in &offsets {
            let mut idx = 0usize;
            let mut mul = 1usize;
            let mut ok = true;
            for k in 0..m {
                let v = multi[k] + off[k];
                if v < 0 || v >= res as isize {
                    ok = false;
                    break;
                }
                idx += v as usize * mul;
                mul *= res;
            }
            if ok && inside[idx] {
                push(idx, seg_cost(&here, &coord(idx)));
            }
        }
    });
    let d = dist[sy];
    if d.is_finite() {
        Ok(d)
    } else {
        Err(Error::DisconnectedGraph {
            source_node: sx,
            unreachable: sy,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{euclid_fermat_expansions, LocalDensityJet};

    #[test]
    fn uniform_density_within_octile_bound() {
        let model = DensityModel::uniform(Domain::unit_square()).unwrap();
        for (x, y) in [
            ([0.1, 0.1], [0.9, 0.3]),
            ([0.2, 0.7], [0.6, 0.1]),
            ([0.5, 0.5], [0.5, 0.9]),
        ] {
            let euclid = ((x[0] - y[0]) as f64).hypot(x[1] - y[1]);
            for p in [1.0, 2.0, 3.0] {
                let l = continuum_fermat_grid(&model, &x, &y, p, 256).unwrap();
                assert!(l >= euclid * (1.0 - 1e-12) && l <= 1.0824 * euclid, "{l} vs {euclid}");
            }
        }
        assert_eq!(continuum_fermat_grid(&model, &[0.3, 0.3], &[0.3, 0.3], 2.0, 64).unwrap(), 0.0);
        assert!(matches!(
            continuum_fermat_grid(&model, &[0.3, 0.3], &[0.4, 0.3], 2.0, 16),
            Err(Error::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn constant_factor_is_applied() {
        let model = DensityModel::uniform(Domain::Box {
            lo: vec![0.0, 0.0],
            hi: vec![2.0, 2.0],
        })
        .unwrap();
        // ρ₀ = 1/4, p = 3, m = 2: ρ₀^{−1} · ‖y − x‖
        let l = continuum_fermat_grid(&model, &[0.5, 1.0], &[1.5, 1.0], 3.0, 65).unwrap();
        assert!((l - 4.0).abs() < 1e-12, "{l}");
    }

    #[test]
    fn one_dimensional_is_exact_integral() {
        let model = DensityModel::new(
            crate::sampling::DensityKind::Linear { slope: 1.0 },
            Domain::Box {
                lo: vec![-0.5],
                hi: vec![0.5],
            },
        )
        .unwrap();
        // ∫_{-0.25}^{0.25} (1+t)^{-1} dt with p = 2, m = 1
        let l = continuum_fermat_grid(&model, &[-0.25], &[0.25], 2.0, 1025).unwrap();
        let exact = (1.25f64 / 0.75).ln();
        assert!((l - exact).abs() < 1e-6, "{l} vs {exact}");
    }

    #[test]
    fn residual_against_expansion_shrinks_with_spacing() {
        let model = DensityModel::linear(1.0).unwrap();
        let jet = LocalDensityJet::from_model(&model, &[0.0, 0.0]).unwrap();
        let (x, y) = ([0.0, 0.0], [0.1, 0.0]);
        let series = euclid_fermat_expansions(&jet, &x, &y, 3.0, 2).unwrap().l_estimate();
        let coarse = (continuum_fermat_grid(&model, &x, &y, 3.0, 64).unwrap() - series).abs();
        let fine = (continuum_fermat_grid(&model, &x, &y, 3.0, 255).unwrap() - series).abs();
        // the series is accurate to O(d³) = 1e-3
        assert!(fine < coarse.max(1e-3) && fine < 1e-3, "{coarse} {fine}");
        let y2 = [0.0, 0.1];
        let l2 = continuum_fermat_grid(&model, &x, &y2, 3.0, 256).unwrap();
        let s2 = euclid_fermat_expansions(&jet, &x, &y2, 3.0, 2).unwrap().l_estimate();
        assert!((l2 - s2).abs() < 2e-3, "{l2} vs {s2}");
    }
}
