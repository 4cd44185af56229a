//! Neumann heat equation on (0, π) controlled at the left end.
//!
//! Eigenvalues μ_n = -n², eigenfunctions c_0 = 1/√π and
//! c_n = √(2/π) cos(nx); the control trace is b_n = -c_n(0). The kernel
//! ψ(x) = -Σ e^{μ_n T} c_n(0) c_n(x) represents δ_{t=0}F_T* as an L²
//! function, which is exactly why no H^{-1} extension of the final state can
//! exist here.

use crate::quad::{integrate, QuadConfig};
use crate::scalar::{Cx, Scalar};
use crate::spectral::{Branch, Eigenmode, Side, SpectralSystem, TowerVector};

/// Modes n = 0..=n_max of the Neumann heat system.
pub fn make_neumann_heat<T: Scalar>(n_max: usize) -> SpectralSystem<T> {
    assert!(n_max >= 1);
    let modes = (0..=n_max)
        .map(|n| {
            Eigenmode::diagonal(
                n as i64,
                Cx::new(-T::from_usize_(n * n), T::zero()),
                vec![Cx::new(-eigenfunction_at_zero::<T>(n), T::zero())],
                Branch::Parabolic,
            )
        })
        .collect();
    SpectralSystem::new(modes, T::zero(), 1, T::one()).expect("heat system is valid")
}

/// c_n(0): 1/√π for n = 0, √(2/π) for n ≥ 1.
pub fn eigenfunction_at_zero<T: Scalar>(n: usize) -> T {
    if n == 0 {
        T::pi().sqrt().recip()
    } else {
        (T::lit(2.0) / T::pi()).sqrt()
    }
}

/// c_n(x) on (0, π).
pub fn eigenfunction<T: Scalar>(n: usize, x: T) -> T {
    if n == 0 {
        T::pi().sqrt().recip()
    } else {
        (T::lit(2.0) / T::pi()).sqrt() * (T::from_usize_(n) * x).cos()
    }
}

/// Truncated obstruction kernel ψ with its reporting data.
#[derive(Debug, Clone)]
pub struct HeatPsi<T> {
    pub x_grid: Vec<T>,
    pub values: Vec<T>,
    /// Bound on the dropped series tail: Σ_{n > n_max} e^{-n²T}·(2/π).
    pub tail_bound: T,
    /// ‖ψ‖_{L²(0,π)} by the series identity (orthonormal basis).
    pub series_l2_norm: T,
}

/// Samples of ψ(x) = -Σ_{n=0}^{n_max} e^{-n²T} c_n(0) c_n(x) on `x_grid`.
pub fn heat_psi<T: Scalar>(horizon: T, n_max: usize, x_grid: &[T]) -> HeatPsi<T> {
    assert!(horizon > T::zero());
    let values = x_grid
        .iter()
        .map(|&x| -psi_partial_sum(horizon, n_max, x))
        .collect();
    let mut tail_bound = T::zero();
    for n in (n_max + 1)..(n_max + 512) {
        let term = (-T::from_usize_(n * n) * horizon).exp() * T::lit(2.0) / T::pi();
        tail_bound += term;
        if term < T::lit(1e-300) {
            break;
        }
    }
    HeatPsi {
        x_grid: x_grid.to_vec(),
        values,
        tail_bound,
        series_l2_norm: psi_series_norm(horizon, n_max),
    }
}

fn psi_partial_sum<T: Scalar>(horizon: T, n_max: usize, x: T) -> T {
    let mut sum = T::zero();
    for n in 0..=n_max {
        let decay = (-T::from_usize_(n * n) * horizon).exp();
        sum += decay * eigenfunction_at_zero::<T>(n) * eigenfunction(n, x);
    }
    sum
}

/// ‖ψ‖ by the coefficient identity: ‖ψ‖² = Σ e^{2μ_n T} c_n(0)².
pub fn psi_series_norm<T: Scalar>(horizon: T, n_max: usize) -> T {
    let mut sum = T::zero();
    for n in 0..=n_max {
        let c = eigenfunction_at_zero::<T>(n);
        sum += (-T::lit(2.0) * T::from_usize_(n * n) * horizon).exp() * c * c;
    }
    sum.sqrt()
}

/// Independent ‖ψ‖ path: grid quadrature of the sampled series.
pub fn psi_l2_norm_quadrature<T: Scalar>(horizon: T, n_max: usize, cfg: &QuadConfig) -> T {
    let sq = integrate(
        |x| {
            let v = psi_partial_sum(horizon, n_max, x);
            Cx::from(v * v)
        },
        T::zero(),
        T::pi(),
        &[],
        cfg,
    );
    sq.re.max(T::zero()).sqrt()
}

/// ψ as an adjoint coefficient vector of the truncated system, so that
/// δ_{t=0}F_T*φ = (φ, ψ)_X holds coefficientwise.
pub fn psi_coefficient_vector<T: Scalar>(
    sys: &SpectralSystem<T>,
    horizon: T,
) -> TowerVector<T> {
    let mut v = TowerVector::zero(Side::Adjoint, 0);
    for mode in sys.modes() {
        let n = mode.index as usize;
        let coeff = -(mode.eigenvalue.re * horizon).exp() * eigenfunction_at_zero::<T>(n);
        v.set(mode.index, Cx::from(coeff));
    }
    v
}

/// ‖ψ‖ > 0 certifies the obstruction: any space of test vectors whose image
/// under F_T* lands in H¹_0 must be orthogonal to ψ, so it cannot be dense.
pub fn obstruction_check<T: Scalar>(horizon: T, n_max: usize) -> T {
    psi_series_norm(horizon, n_max)
}
