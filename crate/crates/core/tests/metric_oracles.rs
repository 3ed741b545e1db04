use fermat_core::metric::{fermat_pairwise, fermat_sssp, FermatMode, FermatParams};
use fermat_core::rng::stream;
use fermat_core::sampling::{sample_iid, DensityModel, Domain, PointCloud};
use proptest::prelude::*;
use rand::Rng;

fn floyd_warshall(cloud: &PointCloud, p: f64) -> Vec<f64> {
    let n = cloud.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            d[i * n + j] = cloud.dist(i, j).powf(p);
        }
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i * n + k];
            for j in 0..n {
                let via = dik + d[k * n + j];
                if via < d[i * n + j] {
                    d[i * n + j] = via;
                }
            }
        }
    }
    d
}

fn random_cloud(seed: u64, n: usize, dim: usize) -> PointCloud {
    let mut rng = stream(seed, 0);
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect();
    PointCloud::from_points(&pts, dim).unwrap()
}

#[test]
fn exact_mode_equals_floyd_warshall() {
    let ps = [1.0, 1.5, 2.0, 3.0];
    let mut rng = stream(11, 0);
    for c in 0..50u64 {
        let n = rng.random_range(2..=300);
        let dim = 1 + (c as usize % 3);
        let p = ps[c as usize % 4];
        let cloud = random_cloud(1000 + c, n, dim);
        let oracle = floyd_warshall(&cloud, p);
        let dm = fermat_pairwise(&cloud, &FermatParams::exact(p, dim)).unwrap();
        for i in 0..n {
            for j in 0..n {
                let diff = (dm.get(i, j) - oracle[i * n + j]).abs();
                assert!(diff < 1e-12, "cloud {c} (n={n}, p={p}) pair ({i},{j}): {diff:e}");
            }
        }
    }
}

#[test]
fn p_one_is_euclidean_on_random_clouds() {
    for c in 0..20u64 {
        let cloud = random_cloud(77 + c, 40 + 7 * c as usize, 2);
        let dm = fermat_pairwise(&cloud, &FermatParams::exact(1.0, 2)).unwrap();
        for i in 0..cloud.len() {
            for j in 0..cloud.len() {
                assert!((dm.get(i, j) - cloud.dist(i, j)).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn insertion_never_increases_distances() {
    let base = random_cloud(5, 30, 2);
    let extra = random_cloud(6, 100, 2);
    let params = FermatParams::exact(2.0, 2);
    let mut pts: Vec<Vec<f64>> = base.iter().map(|x| x.to_vec()).collect();
    let mut prev = fermat_pairwise(&base, &params).unwrap();
    for x in extra.iter() {
        pts.push(x.to_vec());
        let cloud = PointCloud::from_points(&pts, 2).unwrap();
        let next = fermat_pairwise(&cloud, &params).unwrap();
        for i in 0..prev.n() {
            for j in 0..prev.n() {
                assert!(next.get(i, j) <= prev.get(i, j) + 1e-15);
            }
        }
        prev = next;
    }
}

#[test]
fn knn_mode_agrees_with_exact_on_most_pairs() {
    let model = DensityModel::uniform(Domain::unit_square()).unwrap();
    let cloud = sample_iid(&model, 1000, 4).unwrap();
    let exact = fermat_pairwise(&cloud, &FermatParams::exact(2.0, 2)).unwrap();
    let knn = fermat_pairwise(
        &cloud,
        &FermatParams {
            p: 2.0,
            m: 2,
            mode: FermatMode::KnnAuto,
        },
    )
    .unwrap();
    let n = cloud.len();
    let mut agree = 0usize;
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (exact.get(i, j), knn.get(i, j));
            assert!(b >= a - 1e-12, "k-NN path cheaper than the exact optimum");
            if (a - b).abs() <= 1e-12 * a.max(1.0) {
                agree += 1;
            }
        }
    }
    let frac = agree as f64 / (n * n) as f64;
    assert!(frac >= 0.99, "agreement {frac}");
}

#[test]
fn within_mode_matches_exact_sources() {
    let cloud = random_cloud(9, 200, 2);
    let exact = FermatParams::exact(2.5, 2);
    let within = FermatParams {
        mode: FermatMode::Within(0.01),
        ..exact
    };
    for s in [0, 17, 199] {
        let a = fermat_sssp(&cloud, &exact, s).unwrap();
        let b = fermat_sssp(&cloud, &within, s).unwrap();
        for (x, y) in a.iter().zip(&b) {
            if *x <= 0.01 {
                assert!((x - y).abs() <= 1e-15, "{x} vs {y}");
            } else {
                assert!(y.is_infinite());
            }
        }
    }
}

fn triangle_violations(seed: u64, p: f64) -> f64 {
    let cloud = random_cloud(seed, 120, 2);
    let dm = fermat_pairwise(&cloud, &FermatParams::exact(p, 2)).unwrap();
    let lp = |i: usize, j: usize| dm.get(i, j).powf(1.0 / p);
    let mut rng = stream(seed, 1);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let (a, b, c) = (rng.random_range(0..120), rng.random_range(0..120), rng.random_range(0..120));
        worst = worst.max(lp(a, c) - lp(a, b) - lp(b, c));
    }
    worst
}

#[test]
fn triangle_inequality_on_random_triples() {
    for p in [1.0, 1.5, 2.0, 3.0] {
        assert!(triangle_violations(3, p) <= 1e-9, "p = {p}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn metric_axioms(seed in 0u64..10_000, p in 1.0f64..4.0, n in 2usize..40) {
        let cloud = random_cloud(seed, n, 2);
        let dm = fermat_pairwise(&cloud, &FermatParams::exact(p, 2)).unwrap();
        for i in 0..n {
            prop_assert_eq!(dm.get(i, i), 0.0);
            for j in 0..n {
                prop_assert_eq!(dm.get(i, j), dm.get(j, i));
                prop_assert!(dm.get(i, j) >= 0.0);
                // the direct hop is always a candidate path
                prop_assert!(dm.get(i, j) <= cloud.dist(i, j).powf(p) + 1e-15);
                for k in 0..n {
                    let (a, b, c) = (dm.get(i, k), dm.get(i, j), dm.get(j, k));
                    prop_assert!(a.powf(1.0 / p) <= b.powf(1.0 / p) + c.powf(1.0 / p) + 1e-9);
                }
            }
        }
    }
}
