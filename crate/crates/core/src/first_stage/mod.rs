//! First-stage filter banks and the two orthonormality oracles.

pub mod bank;
pub mod conditions;
pub mod designs;
pub mod gram;
pub mod modulation;
pub mod system;

pub use bank::{periodic_split, FilterBank, Normalization, PeriodicSplit};
pub use gram::{gram_matrix, gram_oracle, gram_system, GramReport};
pub use modulation::{
    split_part_matrix, modulation_matrix, oracle_equivalence, printed_matrix_diagnostics, system_unitarity,
    unitarity_check, EquivalenceReport, ModulationMatrix, PhaseVariant, UnitarityReport,
};
pub use system::{deviation_from_scalar, mean_diagonal, ShiftSystem};
pub use conditions::{
    m0_periodicity_check, onb_conditions_check, pair_condition_diagnostics, printed_sum_diagnostics, structural_checks,
    ShiftedSums, SumForm, SumPhase,
};
