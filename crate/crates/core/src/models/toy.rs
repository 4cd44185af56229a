//! The scalar integrator ẋ = f: one mode at zero with unit control trace.

use crate::scalar::{Cx, Scalar};
use crate::spectral::{Branch, Eigenmode, SpectralSystem};

/// Single-mode system with μ = 0 and b = 1 (U = ℂ). The generalized final
/// state of `δ_T ⊗ 1` is exactly 1 while its state curve vanishes almost
/// everywhere.
pub fn make_toy<T: Scalar>() -> SpectralSystem<T> {
    SpectralSystem::new(
        vec![Eigenmode::diagonal(
            0,
            Cx::from(T::zero()),
            vec![Cx::from(T::one())],
            Branch::Parabolic,
        )],
        T::zero(),
        1,
        T::one(),
    )
    .expect("toy system is valid")
}
