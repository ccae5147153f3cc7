use linspect::numerics::{Complex64, RealMatrix};
use linspect::statespace::{c2d_zoh, ContinuousLinearModel};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize, scale: f64) -> RealMatrix {
    RealMatrix::new(
        r,
        c,
        (0..r * c)
            .map(|_| rng.random_range(-scale..scale))
            .collect(),
    )
    .unwrap()
}

fn worst_match(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm() / y.norm().max(1.0)))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

#[test]
fn zoh_maps_spectrum_through_exponential() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..100 {
        let n = rng.random_range(1..=8);
        let a = random_matrix(&mut rng, n, n, 2.0);
        let ct = ContinuousLinearModel::new(
            a,
            random_matrix(&mut rng, n, 2, 1.0),
            random_matrix(&mut rng, 1, n, 1.0),
            RealMatrix::zeros(1, 2),
        )
        .unwrap();
        let ts = rng.random_range(0.01..0.5);
        let dt = c2d_zoh(&ct, ts).unwrap();
        let mapped: Vec<Complex64> = ct
            .eigenvalues()
            .unwrap()
            .iter()
            .map(|l| (l * ts).exp())
            .collect();
        let got = dt.eigenvalues().unwrap();
        let d = worst_match(&got, &mapped);
        assert!(d < 1e-9, "trial {trial}: n={n} ts={ts} distance {d}");
    }
}

fn model_strategy() -> impl Strategy<Value = ContinuousLinearModel> {
    (1usize..6, 1usize..4, 1usize..4).prop_flat_map(|(n, m, p)| {
        (
            proptest::collection::vec(-2.0f64..2.0, n * n),
            proptest::collection::vec(-1.0f64..1.0, n * m),
            proptest::collection::vec(-1.0f64..1.0, p * n),
            proptest::collection::vec(-1.0f64..1.0, p * m),
        )
            .prop_map(move |(a, b, c, d)| {
                // shift left so the model is strictly stable
                let mut a = RealMatrix::new(n, n, a).unwrap();
                let shift = a.norm1() + 0.5;
                a = a.sub(&RealMatrix::identity(n).scaled(shift)).unwrap();
                ContinuousLinearModel::new(
                    a,
                    RealMatrix::new(n, m, b).unwrap(),
                    RealMatrix::new(p, n, c).unwrap(),
                    RealMatrix::new(p, m, d).unwrap(),
                )
                .unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn response_is_conjugate_symmetric(model in model_strategy(), omega in 0.01f64..100.0) {
        let g_pos = model.sys.transfer_at(Complex64::new(0.0, omega)).unwrap();
        let g_neg = model.sys.transfer_at(Complex64::new(0.0, -omega)).unwrap();
        for (a, b) in g_pos.as_slice().iter().zip(g_neg.as_slice()) {
            prop_assert!((a - b.conj()).norm() <= 1e-10 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn zoh_preserves_dc_gain(model in model_strategy(), ts in 0.001f64..1.0) {
        let dt = c2d_zoh(&model, ts).unwrap();
        let g_c = model.sys.transfer_at(Complex64::new(0.0, 0.0)).unwrap();
        let g_d = dt.sys.transfer_at(Complex64::new(1.0, 0.0)).unwrap();
        for (a, b) in g_c.as_slice().iter().zip(g_d.as_slice()) {
            prop_assert!((a - b).norm() <= 1e-8 * (1.0 + a.norm()));
        }
    }
}
