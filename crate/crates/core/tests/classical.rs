mod common;

use common::{ar1_series, white_noise};
use rollcast::classical::{
    arima_forecast, difference, difference_anchors, fit_arima, select_arima_order, sma_forecast, undifference,
    ArimaOrder,
};

#[test]
fn ar1_coefficient_is_recovered() {
    let y = ar1_series(0.6, 1.0, 500, 2024);
    let m = fit_arima(&y, ArimaOrder::new(1, 0, 0)).unwrap();
    assert!((0.5..=0.7).contains(&m.ar[0]), "phi_hat = {}", m.ar[0]);
}

#[test]
fn white_noise_intercept_is_near_the_mean() {
    let (mean, sigma, n) = (50.0, 4.0, 400);
    let y = white_noise(mean, sigma, n, 77);
    let m = fit_arima(&y, ArimaOrder::new(0, 0, 0)).unwrap();
    assert!((m.intercept - mean).abs() <= 2.0 * sigma / (n as f64).sqrt(), "intercept {}", m.intercept);
}

#[test]
fn white_noise_selects_a_sparse_order() {
    let sparse = (0..10)
        .filter(|&s| {
            let sel = select_arima_order(&white_noise(10.0, 1.0, 200, 1000 + s)).unwrap();
            sel.order.p + sel.order.q <= 1
        })
        .count();
    assert!(sparse >= 8, "only {sparse} of 10 trials chose at most one term");
}

#[test]
fn ar1_selection_keeps_an_ar_term() {
    let sel = select_arima_order(&ar1_series(0.8, 1.0, 300, 5)).unwrap();
    assert!(sel.order.p >= 1, "selected {}", sel.order);
    assert_eq!(sel.trials.len(), 48);
}

#[test]
fn differencing_round_trips() {
    let y: Vec<f64> = (0..40).map(|t| 0.3 * (t as f64).powi(2) - 2.0 * t as f64 + (t as f64).sin()).collect();
    for d in 0..=2 {
        let back = undifference(&difference(&y, d)[..], &difference_anchors(&y, d));
        assert_eq!(back.len(), y.len());
        for (a, b) in back.iter().zip(&y) {
            assert!((a - b).abs() < 1e-9, "d={d}: {a} vs {b}");
        }
    }
}

#[test]
fn forecasts_have_requested_length() {
    let y = ar1_series(0.5, 1.0, 120, 8);
    let m = fit_arima(&y, ArimaOrder::new(1, 1, 1)).unwrap();
    assert_eq!(arima_forecast(&m, &y, 30).unwrap().len(), 30);
    assert_eq!(sma_forecast(&y, 7, 30).unwrap().len(), 30);
}
