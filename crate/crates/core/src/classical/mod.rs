//! Classical baselines: simple moving average and ARIMA.

pub mod arima;
pub mod sma;

pub use arima::{
    arima_forecast, difference, difference_anchors, fit_arima, select_arima_order, undifference, ArimaModel, ArimaOrder,
    OrderSelection,
};
pub use sma::{sma_forecast, SmaModel};
