//! Multi-level systems from iterated filter banks.

pub mod checks;
pub mod dwt;
pub mod stages;

pub use checks::{split_energies, splitting_check, stage_orthonormality_check, tail_energy_check, SplitReport};
pub use dwt::{correlate, dwt, dwt_slow, idwt, synthesize, DecompositionResult, SubbandEnergy};
pub use stages::{build_stages, frequency_product_check, level_zero, two_scale, CascadeMode, WaveletStages};
