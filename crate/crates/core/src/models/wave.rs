//! Neumann-controlled wave equation on (0, π) with Dirichlet right end:
//! spectral modes, an exact transport solver in Riemann invariants, and the
//! backward ray tracer for the zero-trace (H^{-1}) admissibility condition.

use crate::error::{Error, Result};
use crate::scalar::{ComplexField, Cx, Scalar};
use crate::spectral::{Branch, Eigenmode, SpectralSystem};

/// Modes μ = ±i(n + 1/2), n = 0..n_max-1, of the wave system (A skew-adjoint,
/// so A* = -A and the adjoint spectrum is purely imaginary). Control traces
/// are ±i/√π after X-normalization.
pub fn make_neumann_wave<T: Scalar>(n_max: usize) -> SpectralSystem<T> {
    assert!(n_max >= 1);
    let mut modes = Vec::with_capacity(2 * n_max);
    let b_mag = T::pi().sqrt().recip();
    for n in 0..n_max {
        let omega = T::from_usize_(n) + T::lit(0.5);
        for sign in [T::one(), -T::one()] {
            let idx = (n as i64 + 1) * if sign > T::zero() { 1 } else { -1 };
            modes.push(Eigenmode::diagonal(
                idx,
                Cx::new(T::zero(), sign * omega),
                vec![Cx::new(T::zero(), sign * b_mag)],
                Branch::Hyperbolic,
            ));
        }
    }
    SpectralSystem::new(modes, T::zero(), 1, T::pi()).expect("wave system is valid")
}

/// Displacement profile of the n-th mode, X-normalized:
/// cos((n+1/2)x) / ((n+1/2)√π).
pub fn wave_mode_displacement<T: Scalar>(n: usize, x: T) -> T {
    let omega = T::from_usize_(n) + T::lit(0.5);
    (omega * x).cos() / (omega * T::pi().sqrt())
}

pub fn wave_mode_slope<T: Scalar>(n: usize, x: T) -> T {
    let omega = T::from_usize_(n) + T::lit(0.5);
    -(omega * x).sin() / T::pi().sqrt()
}

/// Displacement/velocity samples on the uniform grid x_i = iπ/n (n cells).
#[derive(Debug, Clone)]
pub struct WaveState<T> {
    pub displacement: Vec<Cx<T>>,
    pub velocity: Vec<Cx<T>>,
    /// Spatial derivative of the displacement; exact when constructed from
    /// profiles, finite differences otherwise.
    pub slope: Vec<Cx<T>>,
    pub h: T,
}

impl<T: Scalar> WaveState<T> {
    pub fn n_cells(&self) -> usize {
        self.displacement.len() - 1
    }

    pub fn zero(n_cells: usize) -> Self {
        let n = n_cells + 1;
        WaveState {
            displacement: vec![Cx::from(T::zero()); n],
            velocity: vec![Cx::from(T::zero()); n],
            slope: vec![Cx::from(T::zero()); n],
            h: T::pi() / T::from_usize_(n_cells),
        }
    }

    /// Exact sampling of analytic profiles (φ, ψ, φ').
    pub fn from_profiles(
        n_cells: usize,
        displacement: impl Fn(T) -> Cx<T>,
        velocity: impl Fn(T) -> Cx<T>,
        slope: impl Fn(T) -> Cx<T>,
    ) -> Self {
        let h = T::pi() / T::from_usize_(n_cells);
        let xs: Vec<T> = (0..=n_cells).map(|i| h * T::from_usize_(i)).collect();
        WaveState {
            displacement: xs.iter().map(|&x| displacement(x)).collect(),
            velocity: xs.iter().map(|&x| velocity(x)).collect(),
            slope: xs.iter().map(|&x| slope(x)).collect(),
            h,
        }
    }

    /// From raw samples; the slope falls back to centered differences.
    pub fn from_samples(displacement: Vec<Cx<T>>, velocity: Vec<Cx<T>>) -> Result<Self> {
        let n = displacement.len();
        if n < 3 || velocity.len() != n {
            return Err(Error::dim("wave samples"));
        }
        let n_cells = n - 1;
        let h = T::pi() / T::from_usize_(n_cells);
        let mut slope = vec![Cx::from(T::zero()); n];
        for i in 0..n {
            slope[i] = if i == 0 {
                (displacement[1] - displacement[0]) / Cx::from(h)
            } else if i == n - 1 {
                (displacement[n - 1] - displacement[n - 2]) / Cx::from(h)
            } else {
                (displacement[i + 1] - displacement[i - 1]) / Cx::from(h + h)
            };
        }
        Ok(WaveState {
            displacement,
            velocity,
            slope,
            h,
        })
    }

    fn interp(samples: &[Cx<T>], h: T, x: T) -> Cx<T> {
        let n = samples.len() - 1;
        let pos = (x / h).max(T::zero());
        let i = (pos.floor().as_f64() as usize).min(n - 1);
        let frac = pos - T::from_usize_(i);
        samples[i] + (samples[i + 1] - samples[i]) * Cx::from(frac)
    }

    pub fn displacement_at(&self, x: T) -> Cx<T> {
        Self::interp(&self.displacement, self.h, x)
    }

    pub fn velocity_at(&self, x: T) -> Cx<T> {
        Self::interp(&self.velocity, self.h, x)
    }

    pub fn slope_at(&self, x: T) -> Cx<T> {
        Self::interp(&self.slope, self.h, x)
    }

    /// Discrete energy (h/2)·Σ''(|w_x|² + |w_t|²), trapezoid weights.
    pub fn energy(&self) -> T {
        let n = self.displacement.len();
        let mut sum = T::zero();
        for i in 0..n {
            let w = if i == 0 || i == n - 1 {
                T::lit(0.5)
            } else {
                T::one()
            };
            sum += w * (self.slope[i].modulus_squared() + self.velocity[i].modulus_squared());
        }
        sum * self.h * T::lit(0.5)
    }

    /// Boundary compatibility residuals (|w(π)|, |w_t(π)|, |w_x(0)|).
    pub fn compatibility(&self) -> (T, T, T) {
        let n = self.displacement.len() - 1;
        (
            self.displacement[n].modulus(),
            self.velocity[n].modulus(),
            self.slope[0].modulus(),
        )
    }
}

/// Result of the exact transport solve.
#[derive(Debug, Clone)]
pub struct WaveSolveOutput<T> {
    pub state: WaveState<T>,
    /// t ↦ w_t(t, 0) at every time level.
    pub boundary_trace: Vec<(T, Cx<T>)>,
    /// Horizon actually marched (nearest grid-aligned time).
    pub actual_horizon: T,
    /// False when T/h was not integral and the horizon was snapped.
    pub grid_aligned: bool,
    /// Max |E(t) - E(0)| over the march.
    pub energy_drift: T,
}

/// March w_tt = w_xx with w_x(t,0) = 0, w(t,π) = 0 by exact transport of the
/// Riemann invariants ξ = w_t - w_x (rightward) and η = w_t + w_x (leftward),
/// with reflections ξ(t,0) = η(t,0) and η(t,π) = -ξ(t,π). One step advances
/// exactly one cell, so grid values are transported without dissipation.
pub fn wave_characteristics_solve<T: Scalar>(
    initial: &WaveState<T>,
    horizon: T,
) -> Result<WaveSolveOutput<T>> {
    if horizon < T::zero() {
        return Err(Error::NegativeTime {
            t: horizon.as_f64(),
        });
    }
    let n = initial.n_cells();
    let h = initial.h;
    let steps_exact = horizon / h;
    let steps = steps_exact.round().as_f64() as usize;
    let actual_horizon = h * T::from_usize_(steps);
    let grid_aligned = (horizon - actual_horizon).abs() <= T::lit(1e-12) * (T::one() + horizon);

    let mut xi: Vec<Cx<T>> = (0..=n)
        .map(|i| initial.velocity[i] - initial.slope[i])
        .collect();
    let mut eta: Vec<Cx<T>> = (0..=n)
        .map(|i| initial.velocity[i] + initial.slope[i])
        .collect();

    let energy_of = |xi: &[Cx<T>], eta: &[Cx<T>]| {
        let mut sum = T::zero();
        for i in 0..=n {
            let w = if i == 0 || i == n { T::lit(0.5) } else { T::one() };
            sum += w * (xi[i].modulus_squared() + eta[i].modulus_squared());
        }
        sum * h * T::lit(0.25)
    };
    let e0 = energy_of(&xi, &eta);
    let mut energy_drift = T::zero();

    let trace_at = |xi: &[Cx<T>], eta: &[Cx<T>]| (xi[0] + eta[0]) * Cx::from(T::lit(0.5));
    let mut boundary_trace = Vec::with_capacity(steps + 1);
    boundary_trace.push((T::zero(), trace_at(&xi, &eta)));

    for m in 1..=steps {
        // leftward transport of η, then its Dirichlet reflection feeds ξ
        let eta_prev = eta.clone();
        for i in 0..n {
            eta[i] = eta_prev[i + 1];
        }
        let xi_prev = xi.clone();
        for i in (1..=n).rev() {
            xi[i] = xi_prev[i - 1];
        }
        // reflections at the same time level
        eta[n] = -xi[n];
        xi[0] = eta[0];
        energy_drift = energy_drift.max((energy_of(&xi, &eta) - e0).abs());
        boundary_trace.push((h * T::from_usize_(m), trace_at(&xi, &eta)));
    }

    // reconstruct (w, w_t): velocity and slope from the invariants,
    // displacement by integrating the slope down from w(π) = 0
    let velocity: Vec<Cx<T>> = (0..=n)
        .map(|i| (xi[i] + eta[i]) * Cx::from(T::lit(0.5)))
        .collect();
    let slope: Vec<Cx<T>> = (0..=n)
        .map(|i| (eta[i] - xi[i]) * Cx::from(T::lit(0.5)))
        .collect();
    let mut displacement = vec![Cx::from(T::zero()); n + 1];
    for i in (0..n).rev() {
        displacement[i] =
            displacement[i + 1] - (slope[i] + slope[i + 1]) * Cx::from(h * T::lit(0.5));
    }
    Ok(WaveSolveOutput {
        state: WaveState {
            displacement,
            velocity,
            slope,
            h,
        },
        boundary_trace,
        actual_horizon,
        grid_aligned,
        energy_drift,
    })
}

/// Which Riemann invariant the backward ray lands on at t = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RayFamily {
    /// ξ = w_t - w_x, transported rightward.
    Xi,
    /// η = w_t + w_x, transported leftward.
    Eta,
}

/// Residuals of the zero-trace admissibility conditions for a candidate
/// (φ, ψ): membership needs ψ(0) = 0 and a vanishing traced invariant.
#[derive(Debug, Clone)]
pub struct WConditionReport<T> {
    /// |ψ(0)| — the B*-kernel condition.
    pub velocity_residual: T,
    /// |invariant at the landing point| — the propagated w_t(T,0) = 0
    /// condition.
    pub traced_residual: T,
    /// Landing abscissa α ∈ [0, π] of the backward ray from (T, 0).
    pub landing_x: T,
    pub family: RayFamily,
    /// Accumulated reflection sign.
    pub sign: i8,
}

/// Trace the condition w_t(T, 0) = 0 back to t = 0 along characteristics.
///
/// The associated evolution problem runs with w(0) = φ and w_t(0) = -ψ, so
/// the initial invariants are ξ(0,·) = -ψ - φ' and η(0,·) = -ψ + φ'. For
/// T ≤ π the traced condition is exactly -ψ(T) + φ'(T) = 0.
pub fn wave_w_condition<T: Scalar>(state: &WaveState<T>, horizon: T) -> WConditionReport<T> {
    let pi = T::pi();
    let mut family = RayFamily::Eta;
    let mut sign = 1i8;
    let mut x = T::zero();
    let mut remaining = horizon;
    let tol = T::lit(1e-13) * (T::one() + horizon);
    while remaining > tol {
        match family {
            RayFamily::Eta => {
                let travel = remaining.min(pi - x);
                x += travel;
                remaining -= travel;
                if remaining > tol {
                    family = RayFamily::Xi;
                    sign = -sign;
                }
            }
            RayFamily::Xi => {
                let travel = remaining.min(x);
                x -= travel;
                remaining -= travel;
                if remaining > tol {
                    family = RayFamily::Eta;
                }
            }
        }
    }
    let minus_psi = -state.velocity_at(x);
    let dphi = state.slope_at(x);
    let invariant = match family {
        RayFamily::Xi => minus_psi - dphi,
        RayFamily::Eta => minus_psi + dphi,
    };
    WConditionReport {
        velocity_residual: state.velocity[0].modulus(),
        traced_residual: invariant.modulus(),
        landing_x: x,
        family,
        sign,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    #[test]
    fn wave_modes_are_skew_and_normalized() {
        let sys = make_neumann_wave::<f64>(4);
        assert_eq!(sys.n_modes(), 8);
        for m in sys.modes() {
            assert_eq!(m.eigenvalue.re, 0.0, "purely imaginary spectrum");
            let n = m.index.unsigned_abs() as usize - 1;
            let omega = n as f64 + 0.5;
            assert!((m.eigenvalue.im.abs() - omega).abs() < 1e-15);
            // eigen-ODE residual: φ'' + ω²φ = 0 at a few points
            for x in [0.1, 1.0, 2.5] {
                let phi = wave_mode_displacement(n, x);
                let lap = -omega * omega * phi;
                let fd = (wave_mode_displacement(n, x + 1e-5)
                    - 2.0 * wave_mode_displacement(n, x)
                    + wave_mode_displacement(n, x - 1e-5))
                    / 1e-10;
                assert!((fd - lap).abs() < 1e-3 * omega * omega);
            }
            // boundary values
            assert!(wave_mode_slope::<f64>(n, 0.0).abs() < 1e-15);
            assert!(wave_mode_displacement::<f64>(n, std::f64::consts::PI).abs() < 1e-12);
            // trace magnitude 1/√π
            assert!((m.control_trace[0].norm() - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_state_stays_zero() {
        let out = wave_characteristics_solve(&WaveState::<f64>::zero(64), 1.5).unwrap();
        assert!(out.state.energy() == 0.0);
        assert!(out.boundary_trace.iter().all(|(_, v)| v.norm() == 0.0));
    }

    #[test]
    fn transport_is_energy_conserving_and_reversible() {
        let n = 256;
        let state = WaveState::from_profiles(
            n,
            |x: f64| Cx::from(wave_mode_displacement(2, x) + 0.3 * wave_mode_displacement(0, x)),
            |x: f64| Cx::from(0.2 * wave_mode_displacement(1, x)),
            |x: f64| Cx::from(wave_mode_slope(2, x) + 0.3 * wave_mode_slope(0, x)),
        );
        let horizon = state.h * 300.0;
        let fwd = wave_characteristics_solve(&state, horizon).unwrap();
        assert!(fwd.grid_aligned);
        assert!(fwd.energy_drift < 1e-12, "drift {:.3e}", fwd.energy_drift);
        // reverse: negate velocity, march the same span, negate back
        let mut back_in = fwd.state.clone();
        for v in back_in.velocity.iter_mut() {
            *v = -*v;
        }
        let back = wave_characteristics_solve(&back_in, horizon).unwrap();
        for i in 0..=n {
            assert!((back.state.velocity[i] + state.velocity[i]).norm() < 1e-10);
            assert!((back.state.slope[i] - state.slope[i]).norm() < 1e-10);
        }
    }

    #[test]
    fn single_mode_matches_spectral_flow() {
        // initial data (φ_n, ν φ_n) evolves as e^{νt}(φ_n, νφ_n)
        let n_mode = 1usize;
        let omega = n_mode as f64 + 0.5;
        let nu = cx(0.0, omega);
        let n = 2048;
        let state = WaveState::from_profiles(
            n,
            |x: f64| Cx::from(wave_mode_displacement(n_mode, x)),
            |x: f64| nu * wave_mode_displacement(n_mode, x),
            |x: f64| Cx::from(wave_mode_slope(n_mode, x)),
        );
        let h = state.h;
        let horizon = h * ((0.7 / h) as usize as f64); // aligned
        let out = wave_characteristics_solve(&state, horizon).unwrap();
        assert!(out.grid_aligned);
        let grow = (nu * out.actual_horizon).exp();
        let mut max_err: f64 = 0.0;
        for i in 0..=n {
            let x = h * i as f64;
            let want_v = grow * nu * wave_mode_displacement(n_mode, x);
            let want_s = grow * wave_mode_slope(n_mode, x);
            max_err = max_err.max((out.state.velocity[i] - want_v).norm());
            max_err = max_err.max((out.state.slope[i] - want_s).norm());
        }
        assert!(max_err < 1e-6, "max err {max_err:.3e}");
    }

    #[test]
    fn w_condition_short_horizon_reduces_to_endpoint_identity() {
        // T ≤ π: traced condition is -ψ(T) + φ'(T) = 0 at landing x = T
        let n = 512;
        let state = WaveState::from_profiles(
            n,
            |x: f64| Cx::from(x.cos() + 1.0),
            |x: f64| Cx::from(-(x.sin()) - (x - std::f64::consts::FRAC_PI_2) * x.sin()),
            |x: f64| Cx::from(-(x.sin())),
        );
        let t = std::f64::consts::FRAC_PI_2;
        let rep = wave_w_condition(&state, t);
        assert_eq!(rep.family, RayFamily::Eta);
        assert!((rep.landing_x - t).abs() < 1e-12);
        assert!(rep.velocity_residual < 1e-14);
        assert!(rep.traced_residual < 1e-9, "{:.3e}", rep.traced_residual);
    }

    #[test]
    fn w_condition_long_horizon_ray_bookkeeping() {
        // T = 2π: η-ray reflects at x=π into ξ (sign flip) and lands at x=0
        let state = WaveState::from_profiles(
            64,
            |x: f64| Cx::from(x.cos() + 1.0),
            |x: f64| Cx::from(x.sin()),
            |x: f64| Cx::from(-(x.sin())),
        );
        let rep = wave_w_condition(&state, 2.0 * std::f64::consts::PI);
        assert_eq!(rep.family, RayFamily::Xi);
        assert_eq!(rep.sign, -1);
        assert!(rep.landing_x.abs() < 1e-12);
    }
}
