//! Dense rectifier networks with hand-written backpropagation and Adam.

mod adam;
mod mlp;

pub use adam::Adam;
pub use mlp::{ForwardCache, Gradients, Layer, Mlp};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NnError {
    #[error("expected input width {expected}, got {actual}")]
    InputWidth { expected: usize, actual: usize },
    #[error("expected upstream shape {expected:?}, got {actual:?}")]
    UpstreamShape {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("a network needs at least an input and an output size")]
    TooFewLayers,
    #[error("parameter vector has {actual} entries, network needs {expected}")]
    ParamCount { expected: usize, actual: usize },
}
