//! Characters, Fourier transforms and exact quadrature on stepped functions.

pub mod character;
pub mod fourier;
pub mod sequence;
pub mod stepped;

pub use character::{chi, chi_pair, CharacterSum, RootTable, UnitRoot};
pub use fourier::{
    check_character_basis, coset_character_sum, fourier_sequence, inverse_on_omega, parseval_pair, sample_spectrum,
    BasisReport, Spectrum,
};
pub use sequence::{Sequence, Tap};
pub use stepped::{Coset, OmegaDomain, OmegaKind, Region, SteppedFunction};
