//! Configuration, checkpoints, traces, images and the command line.

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod render;
pub mod trace;

pub use checkpoint::{decode_checkpoint, encode_checkpoint, read_checkpoint, write_checkpoint};
pub use config::{InitSpec, PerturbSpec, RunConfig};
pub use render::{color, cross_section, render_cross_section, PlaneSpec};
pub use trace::{append_trace, read_trace, RunWriter, TRACE_HEADER};
