//! The coupled heat-wave system: heat on (0, 1), wave on (-1, 0), matched at
//! the interface, controlled through the heat end.
//!
//! Adjoint eigenvectors (f, g, h) solve f'' = μf on (0,1) and g'' = μ²g on
//! (-1,0) with h = μg, under f(1) = 0, g(-1) = 0, f(0) = g(0),
//! f'(0) = g'(0). Eliminating the amplitudes gives the characteristic
//! function
//!
//!   Δ(μ) = √μ · sinh(√μ) · cosh(μ) + cosh(√μ) · sinh(μ),
//!
//! which is even in the branch of √μ, hence entire in μ. The hyperbolic
//! branch sits near the poles of tanh(μ), i.e. near i(k+1/2)π, and is seeded
//! by the known asymptotic expansion before a damped complex secant polish.

use crate::error::{Error, Result};
use crate::scalar::{ComplexField, Cx, Scalar};
use crate::spectral::{Branch, Eigenmode, SpectralSystem};

/// Characteristic function and a cancellation scale for relative residuals.
pub fn characteristic_determinant<T: Scalar>(mu: Cx<T>) -> (Cx<T>, T) {
    let s = mu.sqrt();
    let term1 = s * s.sinh() * mu.cosh();
    let term2 = s.cosh() * mu.sinh();
    let scale = term1.modulus() + term2.modulus() + T::one();
    (term1 + term2, scale)
}

/// Asymptotic seed for the k-th hyperbolic eigenvalue:
/// -1/√(|1+2k|π) + (1/2 + k)πi + sgn(k)·i/√(|1+2k|π).
pub fn heatwave_eigenvalue_seed<T: Scalar>(k: i64) -> Cx<T> {
    let denom = (T::from_usize_((1 + 2 * k).unsigned_abs() as usize) * T::pi()).sqrt();
    let sgn = if k >= 0 { T::one() } else { -T::one() };
    let im = (T::lit(0.5) + T::from_f64(k as f64).unwrap()) * T::pi() + sgn / denom;
    Cx::new(-denom.recip(), im)
}

pub const EIG_RESIDUAL_TOL: f64 = 1e-10;

/// Polish the asymptotic seed with a damped complex secant on Δ. Accepts
/// when the cancellation-relative residual drops below 1e-10.
pub fn heatwave_eigenvalue<T: Scalar>(k: i64) -> Result<Cx<T>> {
    assert!(k.unsigned_abs() >= 5, "asymptotic seeding regime is |k| >= 5");
    let seed = heatwave_eigenvalue_seed::<T>(k);
    let tol = T::lit(EIG_RESIDUAL_TOL);
    let max_step = T::lit(0.5);

    let mut x0 = seed;
    let mut x1 = seed + Cx::new(T::lit(1e-4), T::lit(1e-4));
    let (mut f0, _) = characteristic_determinant(x0);
    let (mut f1, mut scale1) = characteristic_determinant(x1);
    for _ in 0..100 {
        if f1.modulus() / scale1 <= tol {
            return Ok(x1);
        }
        let df = f1 - f0;
        if df.modulus() == T::zero() {
            break;
        }
        let mut step = f1 * (x1 - x0) / df;
        let norm = step.modulus();
        if norm > max_step {
            step *= Cx::from(max_step / norm);
        }
        x0 = x1;
        f0 = f1;
        x1 -= step;
        let (f, s) = characteristic_determinant(x1);
        f1 = f;
        scale1 = s;
    }
    if f1.modulus() / scale1 <= tol {
        return Ok(x1);
    }
    Err(Error::RootNotConverged {
        seed_re: seed.re.as_f64(),
        seed_im: seed.im.as_f64(),
        last_re: x1.re.as_f64(),
        last_im: x1.im.as_f64(),
        residual: (f1.modulus() / scale1).as_f64(),
    })
}

/// Adjoint eigenvector data of one converged eigenvalue.
#[derive(Debug, Clone)]
pub struct HeatWaveMode<T> {
    pub eigenvalue: Cx<T>,
    /// Heat component on (0,1), grid samples including endpoints.
    pub f: Vec<Cx<T>>,
    /// Wave displacement component on (-1,0).
    pub g: Vec<Cx<T>>,
    /// Wave velocity component h = μ·g on (-1,0).
    pub h_comp: Vec<Cx<T>>,
    /// Normalized control trace f'(1).
    pub control_trace: Cx<T>,
    /// Worst ODE/matching residual, relative to the component scale.
    pub residual: T,
}

/// ∫_0^1 |sinh(z·u)|² du in closed form.
fn sinh_profile_l2sq<T: Scalar>(z: Cx<T>) -> T {
    (half_ratio(z.re + z.re, true) - half_ratio(z.im + z.im, false)) * T::lit(0.5)
}

/// ∫_0^1 |cosh(z·u)|² du in closed form.
fn cosh_profile_l2sq<T: Scalar>(z: Cx<T>) -> T {
    (half_ratio(z.re + z.re, true) + half_ratio(z.im + z.im, false)) * T::lit(0.5)
}

/// sinh(a)/a or sin(a)/a with the removable singularity handled.
fn half_ratio<T: Scalar>(a: T, hyperbolic: bool) -> T {
    if a.abs() < T::lit(1e-6) {
        let a2 = a * a;
        let third = a2 / T::lit(6.0);
        return if hyperbolic {
            T::one() + third
        } else {
            T::one() - third
        };
    }
    if hyperbolic {
        a.sinh() / a
    } else {
        a.sin() / a
    }
}

/// Closed-form eigenvector for a converged eigenvalue, X-normalized with the
/// seminorm realization ‖(f,g,h)‖² = ∫|f'|² + ∫|g'|² + ∫|h|². The residual
/// re-checks the interface matching (which holds only at true roots) and the
/// collocated ODEs.
pub fn heatwave_mode<T: Scalar>(mu: Cx<T>, n_samples: usize) -> Result<HeatWaveMode<T>> {
    let s = mu.sqrt();
    // amplitudes from the nullspace of the 2x2 matching system
    let a = -mu.sinh();
    let b = s.sinh();

    // exact norm: ∫|f'|² = |a|²|s|² C(s), ∫|g'|² = |b|²|μ|² C(μ),
    // ∫|h|² = |b|²|μ|⁴... h = μ·g so |h|² = |μ|²|b·sinh(μ(x+1))|²
    let norm_sq = a.modulus_squared() * mu.modulus() * cosh_profile_l2sq(s)
        + b.modulus_squared() * mu.modulus_squared() * cosh_profile_l2sq(mu)
        + b.modulus_squared() * mu.modulus_squared() * sinh_profile_l2sq(mu);
    let norm = norm_sq.max(T::zero()).sqrt();
    if !(norm > T::zero()) || !norm.is_finite() {
        return Err(Error::NullMode);
    }
    let an = a / Cx::from(norm);
    let bn = b / Cx::from(norm);

    let f_of = |x: T| an * (s * (x - T::one())).sinh();
    let f_xx_of = |x: T| an * mu * (s * (x - T::one())).sinh();
    let g_of = |x: T| bn * (mu * (x + T::one())).sinh();
    let g_xx_of = |x: T| bn * mu * mu * (mu * (x + T::one())).sinh();

    let n = n_samples.max(3);
    let step = T::one() / T::from_usize_(n - 1);
    let mut f = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    let mut h_comp = Vec::with_capacity(n);
    let mut ode_residual = T::zero();
    let mut f_scale = T::zero();
    let mut g_scale = T::zero();
    for i in 0..n {
        let x = step * T::from_usize_(i); // heat abscissa in (0,1)
        let y = x - T::one(); // wave abscissa in (-1,0)
        let fv = f_of(x);
        let gv = g_of(y);
        f.push(fv);
        g.push(gv);
        h_comp.push(mu * gv);
        f_scale = f_scale.max(fv.modulus());
        g_scale = g_scale.max(gv.modulus());
        // plug the closed forms back into the eigen-ODEs
        ode_residual = ode_residual.max((f_xx_of(x) - mu * fv).modulus());
        ode_residual = ode_residual.max((g_xx_of(y) - mu * mu * gv).modulus());
    }
    let amp_scale = (f_scale.max(g_scale) * mu.modulus_squared()).max(T::one());
    let mut residual = ode_residual / amp_scale;
    // interface matching is a genuine check of the root: f(0) = g(0),
    // f'(0) = g'(0)
    let fm = f_of(T::zero());
    let gm = g_of(T::zero());
    let match0 = (fm - gm).modulus() / f_scale.max(g_scale).max(T::lit(1e-30));
    let df0 = an * s * (s * (-T::one())).cosh();
    let dg0 = bn * mu * (mu * T::one()).cosh();
    let deriv_scale = df0.modulus().max(dg0.modulus()).max(T::lit(1e-30));
    let match1 = (df0 - dg0).modulus() / deriv_scale;
    residual = residual.max(match0).max(match1);
    // boundary values imposed by construction, re-checked
    residual = residual.max(f_of(T::one()).modulus() / f_scale.max(T::lit(1e-30)));
    residual = residual.max(g_of(-T::one()).modulus() / g_scale.max(T::lit(1e-30)));

    let control_trace = an * s; // f'(1) = a·s·cosh(0) = a·s
    Ok(HeatWaveMode {
        eigenvalue: mu,
        f,
        g,
        h_comp,
        control_trace,
        residual,
    })
}

/// One row of the eigenvalue table.
#[derive(Debug, Clone)]
pub struct EigenvalueRecord<T> {
    pub k: i64,
    pub seed: Cx<T>,
    pub root: Cx<T>,
    pub residual: T,
    pub control_trace_abs: T,
}

/// Assemble the hyperbolic-branch spectral system for k in
/// [k_min, k_max] (positive indices; conjugate modes are available through
/// negative k when requested).
pub fn make_heatwave_system<T: Scalar>(
    k_min: i64,
    k_max: i64,
    include_conjugates: bool,
) -> Result<(SpectralSystem<T>, Vec<EigenvalueRecord<T>>)> {
    if k_min < 5 || k_max < k_min {
        return Err(Error::invalid("need 5 <= k_min <= k_max"));
    }
    let mut modes = Vec::new();
    let mut records = Vec::new();
    for k in k_min..=k_max {
        let seed = heatwave_eigenvalue_seed::<T>(k);
        let root = heatwave_eigenvalue::<T>(k)?;
        let (det, scale) = characteristic_determinant(root);
        let mode = heatwave_mode(root, 257)?;
        records.push(EigenvalueRecord {
            k,
            seed,
            root,
            residual: det.modulus() / scale,
            control_trace_abs: mode.control_trace.modulus(),
        });
        modes.push(Eigenmode::diagonal(
            k,
            root,
            vec![mode.control_trace],
            Branch::Hyperbolic,
        ));
        if include_conjugates {
            modes.push(Eigenmode::diagonal(
                -k,
                root.conj(),
                vec![mode.control_trace.conj()],
                Branch::Hyperbolic,
            ));
        }
    }
    let sys = SpectralSystem::new(modes, T::zero(), 1, T::one())?;
    Ok((sys, records))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_at_k_ten_matches_asymptotic_formula() {
        let seed = heatwave_eigenvalue_seed::<f64>(10);
        let denom = (21.0 * std::f64::consts::PI).sqrt();
        assert!((seed.re + 1.0 / denom).abs() < 1e-15);
        assert!((seed.im - (10.5 * std::f64::consts::PI + 1.0 / denom)).abs() < 1e-12);
        // numerically ≈ -0.123116 + 33.10977i
        assert!((seed.re + 0.1231).abs() < 1e-3);
        assert!((seed.im - 33.1098).abs() < 1e-3);
    }

    #[test]
    fn determinant_conjugate_symmetry() {
        let mu = heatwave_eigenvalue_seed::<f64>(7);
        let (d, _) = characteristic_determinant(mu);
        let (dc, _) = characteristic_determinant(mu.conj());
        assert!((dc - d.conj()).norm() < 1e-12 * d.norm().max(1.0));
    }

    #[test]
    fn roots_converge_near_seeds() {
        for k in [5i64, 10, 23, 40] {
            let seed = heatwave_eigenvalue_seed::<f64>(k);
            let root = heatwave_eigenvalue::<f64>(k).unwrap();
            let (det, scale) = characteristic_determinant(root);
            assert!(det.norm() / scale <= EIG_RESIDUAL_TOL, "k={k}");
            let dist = (root - seed).norm();
            assert!(dist <= 2.0 / k as f64, "k={k}: |root-seed| = {dist:.3e}");
        }
    }

    #[test]
    fn conjugate_index_pairs_up() {
        let root_p = heatwave_eigenvalue::<f64>(10).unwrap();
        let root_m = heatwave_eigenvalue::<f64>(-11).unwrap();
        assert!((root_m - root_p.conj()).norm() < 1e-8);
    }

    #[test]
    fn mode_residuals_and_matching() {
        let root = heatwave_eigenvalue::<f64>(12).unwrap();
        let mode = heatwave_mode(root, 513).unwrap();
        assert!(mode.residual <= 1e-8, "residual {:.3e}", mode.residual);
        // h = μ g samplewise
        for (h, g) in mode.h_comp.iter().zip(&mode.g) {
            assert!((h - root * g).norm() < 1e-14);
        }
    }

    #[test]
    fn control_traces_decay_like_exp_sqrt_k() {
        // log-linear fit of ln|b_k| against √k has slope ≤ -1
        let (_, records) = make_heatwave_system::<f64>(5, 20, false).unwrap();
        let pts: Vec<(f64, f64)> = records
            .iter()
            .map(|r| ((r.k as f64).sqrt(), r.control_trace_abs.ln()))
            .collect();
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        assert!(slope <= -1.0, "decay slope {slope}");
    }

    #[test]
    fn seed_distance_shrinks_with_k() {
        // |root - seed| trend is decreasing, consistent with an O(1/|k|)
        // remainder
        let dists: Vec<f64> = [5i64, 10, 20, 40]
            .iter()
            .map(|&k| {
                (heatwave_eigenvalue::<f64>(k).unwrap() - heatwave_eigenvalue_seed::<f64>(k))
                    .norm()
            })
            .collect();
        for w in dists.windows(2) {
            assert!(w[1] < w[0], "distances {dists:?}");
        }
    }
}
