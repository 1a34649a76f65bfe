//! Experiment drivers over `kakeya-core`: the weak-type δ-sweep, the Hölder
//! probe, covering campaigns, single-family verification and operator dumps.

pub mod campaign;
pub mod config;
pub mod holder;
pub mod run;
pub mod sweep;
