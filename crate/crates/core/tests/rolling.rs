mod common;

use common::{brute_force_rolling, ToyUnit};
use rollcast::rpa::{baseline_forecast, roll_forecast, EchoUnit, RollingConfig};
use rollcast::Matrix;

fn seed_rows(p: usize, features: usize) -> Vec<Vec<f64>> {
    (0..p).map(|i| (0..features).map(|f| (i * 3 + f) as f64 * 0.7 - 1.0).collect()).collect()
}

#[test]
fn rolling_matches_timeline_simulation() {
    for p in 2..=6 {
        for l in 1..p {
            for features in [1, 3] {
                let unit = ToyUnit { p, q: p, features };
                let seed = seed_rows(p, features);
                for horizon in [1, 7, 30] {
                    let cfg = RollingConfig::new(p, p, l, horizon).unwrap();
                    let got = roll_forecast(&unit, &Matrix::from_rows(&seed).unwrap(), &cfg).unwrap();
                    let want = brute_force_rolling(&unit, &seed, l, horizon);
                    assert_eq!(got, Matrix::from_rows(&want).unwrap(), "p={p} l={l} F={features} N={horizon}");
                }
            }
        }
    }
}

#[test]
fn echo_unit_holds_a_constant() {
    let seed = Matrix::from_vec(4, 1, vec![7.0; 4]).unwrap();
    let unit = EchoUnit { p: 4, q: 4, features: 1 };
    let out = roll_forecast(&unit, &seed, &RollingConfig::new(4, 4, 1, 30).unwrap()).unwrap();
    assert!(out.as_slice().iter().all(|v| *v == 7.0));
    assert_eq!(out.rows(), 30);
}

#[test]
fn baseline_needs_full_horizon_head() {
    let seed = Matrix::from_vec(3, 1, vec![1.0, 2.0, 3.0]).unwrap();
    let full = EchoUnit { p: 3, q: 30, features: 1 };
    assert_eq!(baseline_forecast(&full, &seed, 30).unwrap().rows(), 30);
    let short = EchoUnit { p: 3, q: 5, features: 1 };
    assert!(baseline_forecast(&short, &seed, 30).is_err());
}
