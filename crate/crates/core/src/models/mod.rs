//! Concrete systems: the scalar toy integrator, the boundary-controlled
//! Neumann heat and wave equations, and the coupled heat-wave model.

pub mod heat;
pub mod heatwave;
pub mod toy;
pub mod wave;

pub use heat::{heat_psi, make_neumann_heat, obstruction_check, psi_coefficient_vector, HeatPsi};
pub use heatwave::{
    characteristic_determinant, heatwave_eigenvalue, heatwave_eigenvalue_seed, heatwave_mode,
    make_heatwave_system, EigenvalueRecord, HeatWaveMode,
};
pub use toy::make_toy;
pub use wave::{
    make_neumann_wave, wave_characteristics_solve, wave_w_condition, RayFamily, WConditionReport,
    WaveSolveOutput, WaveState,
};
