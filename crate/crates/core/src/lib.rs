pub mod body;
pub mod cli;
pub mod cohort;
pub mod colormap;
mod colormap_table;
pub mod dataset;
pub mod dual;
pub mod error;
pub mod gait;
pub mod knn;
pub mod plot;
pub mod radar;
pub mod render;
pub mod segment;
pub mod spectrogram;
pub mod tsne;

pub use error::{Error, Result};
