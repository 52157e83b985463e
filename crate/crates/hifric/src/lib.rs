//! A 1D numerical laboratory for multicomponent nonisothermal fluid mixtures.
//!
//! Two models of the same mixture are implemented side by side on a periodic
//! grid: a Class-II model carrying one velocity per species with stiff
//! pairwise friction of strength 1/eps, and its Class-I (Maxwell-Stefan)
//! limit carrying one barycentric velocity plus algebraically determined
//! diffusional velocities. The [`diagnostics`] module measures the relative
//! entropy between the two solutions, and the [`harness`] module orchestrates
//! paired runs and eps-sweeps that quantify the high-friction convergence.
//!
//! Start with the runnable examples:
//!
//! ```text
//! cargo run --release --example thermo_tour
//! cargo run --release --example maxwell_stefan_solve
//! cargo run --release --example friction_relaxation
//! cargo run --release --example simulate_class2
//! cargo run --release --example paired_relative_entropy
//! cargo run --release --example epsilon_sweep
//! cargo run --release --example identity_check
//! cargo run --release --example mms_convergence
//! ```
//!
//! The same capabilities are reachable through the thin `hifric` binary
//! (subcommands `simulate`, `paired`, `sweep`, `check-identity`,
//! `check-thermo`) driven by a TOML config.

pub mod class1;
pub mod class2;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod harness;
pub mod manufactured;
pub mod maxwell_stefan;
pub mod sources;
pub mod thermo;

pub use error::{Error, Result};
