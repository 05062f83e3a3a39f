//! From-scratch recurrent networks trained by backpropagation through time.

pub mod adam;
pub mod cell;
mod linalg;
pub mod network;
pub mod persist;
pub mod train;

pub use adam::Adam;
pub use cell::{
    gru_cell_step, lstm_cell_step, rnn_cell_step, CellKind, CellState, GruCellParams, LstmCellParams,
    RnnCellParams,
};
pub use network::{layer_outputs, Activation, HeadSpec, LayerSpec, Network, NetworkSpec, ParamGroup, RecurrentKind};
pub use train::{train, TrainConfig, TrainReport, TrainedModel};
