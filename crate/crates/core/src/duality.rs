//! The extension machinery: final states, state curves, and their duals.
//!
//! Everything here is computed through pairing formulas on the truncated
//! spectral representation. The generalized final state of an input u is the
//! coefficient vector `a_k = e^{conj(μ_k) T} z0_k + ⟨u, B*S_{T-·}*φ_k⟩`;
//! extensions to distributional u never mollify, they reuse the same pairing
//! with the input's defining formula. Mollified inputs appear only in tests
//! as independent oracles.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::input::{pair_with, DualSpaceTag, GeneralizedInput};
use crate::linalg::{generalized_rayleigh_max, hermitian_max_eig, least_singular_direction};
use crate::quad::QuadConfig;
use crate::scalar::{ComplexField, Cx, Scalar};
use crate::signal::{
    exp_terms_sobolev_inner, reverse_time_exp_terms, u_inner, ExpPolyTerm, TimeGrid, TimeSignal,
};
use crate::spectral::{Side, SpectralSystem, TowerVector};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generalized final state together with its tower bookkeeping.
#[derive(Debug, Clone)]
pub struct FinalStateResult<T> {
    /// Primal coefficient vector of z(T), tagged at `result_index`.
    pub state: TowerVector<T>,
    /// min(0, N, M) per the index arithmetic of the extension.
    pub result_index: i32,
    /// Measured truncated operator norm of φ ↦ B*S_{T-·}*φ from X_ν to H^ν
    /// (ν = -result_index); the constant in ‖F_T u‖ ≤ C‖u‖.
    pub norm_bound_used: T,
}

/// Sampled state curve pairings, optionally split into the semigroup
/// increment part F¹ and the plain accumulation part F².
#[derive(Debug, Clone)]
pub struct CurveSample<T> {
    pub times: Vec<T>,
    pub probe_labels: Vec<String>,
    /// pairings[probe][time]
    pub pairings: Vec<Vec<Cx<T>>>,
    pub split: Option<Vec<CurveSplit<T>>>,
}

/// The two halves of `∫ S_{t-s} B u ds = ∫ (S_{t-s}-1) B u ds + ∫ B u ds`.
#[derive(Debug, Clone)]
pub struct CurveSplit<T> {
    /// F¹: kernel B*(S*-1)φ; continuous in time.
    pub increment_part: Vec<Cx<T>>,
    /// F²: constant kernel B*φ; carries the input's full irregularity.
    pub accumulation_part: Vec<Cx<T>>,
}

/// The output profile `s ↦ B* S*_{T-s} φ` in the original time orientation,
/// as an exact exponential-polynomial signal.
pub fn adjoint_final_map<T: Scalar>(
    sys: &SpectralSystem<T>,
    phi: &TowerVector<T>,
    grid: &TimeGrid<T>,
) -> Result<TimeSignal<T>> {
    if phi.side != Side::Adjoint {
        return Err(Error::invalid("adjoint final map needs an adjoint vector"));
    }
    if phi.tower_index < 1 {
        return Err(Error::invalid("adjoint final map needs tower index >= 1"));
    }
    let terms = adjoint_final_terms(sys, phi, grid.horizon)?;
    TimeSignal::from_exp_terms(grid.horizon, sys.input_dim, terms, grid.n)
}

fn adjoint_final_terms<T: Scalar>(
    sys: &SpectralSystem<T>,
    phi: &TowerVector<T>,
    horizon: T,
) -> Result<Vec<ExpPolyTerm<T>>> {
    let forward = sys.output_terms(phi)?;
    Ok(reverse_time_exp_terms(&forward, horizon))
}

/// Measured operator norm of φ ↦ B*S*_{T-·}φ on the truncation, from the
/// weighted X_ν norm to H^ν(0,T;U): the largest generalized Rayleigh
/// quotient of the H^ν output Gram against the tower weights.
pub fn adjoint_map_operator_norm<T: Scalar>(
    sys: &SpectralSystem<T>,
    horizon: T,
    nu: u32,
) -> Result<T> {
    let indices: Vec<i64> = sys.mode_indices().collect();
    let n = indices.len();
    if n == 0 {
        return Ok(T::zero());
    }
    let term_lists: Vec<Vec<ExpPolyTerm<T>>> = indices
        .iter()
        .map(|&k| {
            let basis = TowerVector::single(k, Cx::from(T::one()), Side::Adjoint, 1);
            adjoint_final_terms(sys, &basis, horizon)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut gram = DMatrix::<Cx<T>>::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            gram[(r, c)] = exp_terms_sobolev_inner(&term_lists[c], &term_lists[r], horizon, nu);
        }
    }
    let mut weights = DMatrix::<Cx<T>>::zeros(n, n);
    for (i, &k) in indices.iter().enumerate() {
        weights[(i, i)] = Cx::from(sys.tower_weight(k, nu as i32)?);
    }
    // the weight matrix is nonsingular, so the pencil is well-posed
    let lam = generalized_rayleigh_max(&gram, &weights)?;
    Ok(lam.max(T::zero()).sqrt())
}

/// Generalized final state Ξ_T(z0, u) on the truncation.
///
/// `input_index` is the tower index M the input is declared at; it must not
/// exceed the input's natural index. The result lands in X_{min(0, N, M)}.
pub fn final_state<T: Scalar>(
    sys: &SpectralSystem<T>,
    z0: &TowerVector<T>,
    u: &GeneralizedInput<T>,
    input_index: i32,
    horizon: T,
    tag: DualSpaceTag,
) -> Result<FinalStateResult<T>> {
    final_state_with(sys, z0, u, input_index, horizon, tag, &QuadConfig::default())
}

pub fn final_state_with<T: Scalar>(
    sys: &SpectralSystem<T>,
    z0: &TowerVector<T>,
    u: &GeneralizedInput<T>,
    input_index: i32,
    horizon: T,
    tag: DualSpaceTag,
    cfg: &QuadConfig,
) -> Result<FinalStateResult<T>> {
    if z0.side != Side::Primal {
        return Err(Error::invalid("initial state must be primal-side"));
    }
    if input_index > u.natural_index() {
        return Err(Error::invalid(format!(
            "input declared at U_{} but only lives in U_{}",
            input_index,
            u.natural_index()
        )));
    }
    if u.dim() != sys.input_dim && !u.is_zero() {
        return Err(Error::dim("input dimension vs system"));
    }
    let result_index = 0.min(z0.tower_index).min(input_index);
    let mut state = sys.apply_semigroup(horizon, z0)?.at_index(result_index);
    if !u.is_zero() {
        let grid = TimeGrid::new(horizon, 3);
        for k in sys.mode_indices() {
            let basis = TowerVector::single(k, Cx::from(T::one()), Side::Adjoint, 1);
            let kernel = adjoint_final_map(sys, &basis, &grid)?;
            let a = pair_with(u, &kernel, tag, cfg)?;
            let cur = state.get(k);
            state.set(k, cur + a);
        }
    }
    let nu = (-result_index).max(0) as u32;
    let norm_bound_used = adjoint_map_operator_norm(sys, horizon, nu)?;
    Ok(FinalStateResult {
        state,
        result_index,
        norm_bound_used,
    })
}

/// Independent final-state oracle for L² densities: per-mode exponential
/// integrator stepping of `ȧ_k = conj(μ_k) a_k + (u(t), b_k)_U` on the grid,
/// with Gauss–Legendre forcing integrals per step. Jordan chains step by
/// their closed-form block propagator. Returns the trajectory sampled on the
/// grid (primal side).
pub fn duhamel_oracle<T: Scalar>(
    sys: &SpectralSystem<T>,
    z0: &TowerVector<T>,
    u: &GeneralizedInput<T>,
    grid: &TimeGrid<T>,
) -> Result<Vec<TowerVector<T>>> {
    if !u.atoms().is_empty() || !u.derivative_parts().is_empty() {
        return Err(Error::invalid("the Duhamel oracle handles L² densities only"));
    }
    if z0.side != Side::Primal {
        return Err(Error::invalid("initial state must be primal-side"));
    }
    let (gl_nodes, gl_weights) = crate::quad::gauss_legendre::<T>(12);
    let h = grid.step();
    // group modes into blocks (chain members stay together)
    let blocks: Vec<Vec<i64>> = block_structure(sys);
    let mut current: Vec<Vec<Cx<T>>> = blocks
        .iter()
        .map(|b| b.iter().map(|&k| z0.get(k)).collect())
        .collect();
    let mut out = Vec::with_capacity(grid.n);
    let save = |coeffs: &[Vec<Cx<T>>]| {
        let mut v = TowerVector::zero(Side::Primal, z0.tower_index);
        for (block, vals) in blocks.iter().zip(coeffs) {
            for (&k, &c) in block.iter().zip(vals) {
                if c.modulus_squared() > T::zero() {
                    v.set(k, c);
                }
            }
        }
        v
    };
    out.push(save(&current));
    for step in 0..grid.n - 1 {
        let t0 = grid.point(step);
        for (bi, block) in blocks.iter().enumerate() {
            let mu = sys.mode(block[0])?.eigenvalue;
            let rate = mu.conj();
            let m = block.len();
            // homogeneous propagation over the step
            let mut next = propagate_primal_block(&current[bi], rate, h);
            // forcing: ∫_0^h e^{(h-σ)J} f(t0+σ) dσ by panel-wise
            // Gauss-Legendre; stiff modes get enough panels to resolve the
            // boundary layer of the propagator at σ = h
            if let Some(density) = u.density() {
                let n_sub = ((rate.re.abs() * h / T::lit(4.0)).ceil().as_f64() as usize)
                    .clamp(1, 64);
                let sub_h = h / T::from_usize_(n_sub);
                for sub in 0..n_sub {
                    let lo = sub_h * T::from_usize_(sub);
                    for (x, w) in gl_nodes.iter().zip(&gl_weights) {
                        let sigma = lo + sub_h * T::lit(0.5) * (T::one() + *x);
                        let weight = sub_h * T::lit(0.5) * *w;
                        let uval = density.eval(t0 + sigma);
                        let f: Vec<Cx<T>> = block
                            .iter()
                            .map(|&k| {
                                let b = &sys.mode(k).unwrap().control_trace;
                                u_inner(&uval, b)
                            })
                            .collect();
                        let prop = propagate_primal_block(&f, rate, h - sigma);
                        for (n, p) in next.iter_mut().zip(&prop) {
                            *n += *p * Cx::from(weight);
                        }
                    }
                }
            }
            let _ = m;
            current[bi] = next;
        }
        out.push(save(&current));
    }
    Ok(out)
}

fn block_structure<T: Scalar>(sys: &SpectralSystem<T>) -> Vec<Vec<i64>> {
    let mut blocks = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for m in sys.modes() {
        if let Some(chain) = &m.chain {
            blocks.push(chain.clone());
            seen.extend(chain.iter().copied());
        }
    }
    for m in sys.modes() {
        if !seen.contains(&m.index) {
            blocks.push(vec![m.index]);
        }
    }
    blocks.sort_by_key(|b| b[0]);
    blocks
}

/// Primal-side chain propagator: a_j ← e^{rate·τ} Σ_{i≤j} τ^{j-i}/(j-i)! a_i.
fn propagate_primal_block<T: Scalar>(a: &[Cx<T>], rate: Cx<T>, tau: T) -> Vec<Cx<T>> {
    let m = a.len();
    let growth = (rate * tau).exp();
    let mut tpow = vec![T::one(); m];
    for d in 1..m {
        tpow[d] = tpow[d - 1] * tau / T::from_usize_(d);
    }
    (0..m)
        .map(|j| {
            let mut acc = Cx::from(T::zero());
            for i in 0..=j {
                acc += a[i] * Cx::from(tpow[j - i]);
            }
            acc * growth
        })
        .collect()
}

/// Pairing ⟨z(t), φ⟩ of the generalized state curve against one adjoint
/// probe, at a single time. Atoms at t0 = t are counted (closed interval).
pub fn curve_pairing_at<T: Scalar>(
    sys: &SpectralSystem<T>,
    u: &GeneralizedInput<T>,
    probe: &TowerVector<T>,
    t: T,
    cfg: &QuadConfig,
) -> Result<Cx<T>> {
    let (full, _, _) = curve_parts_at(sys, u, probe, t, cfg)?;
    Ok(full)
}

/// (full, increment F¹, accumulation F²) pairings at one time.
fn curve_parts_at<T: Scalar>(
    sys: &SpectralSystem<T>,
    u: &GeneralizedInput<T>,
    probe: &TowerVector<T>,
    t: T,
    cfg: &QuadConfig,
) -> Result<(Cx<T>, Cx<T>, Cx<T>)> {
    debug_assert_eq!(probe.side, Side::Adjoint);
    let zero = Cx::from(T::zero());
    let b_phi = sys.control_trace_of(probe)?;
    if t <= T::zero() {
        // only an atom exactly at 0 contributes, through the F² kernel
        let mut f2 = zero;
        for (t0, u0) in u.atoms() {
            if *t0 <= T::zero() {
                f2 += u_inner(u0, &b_phi);
            }
        }
        return Ok((f2, zero, f2));
    }
    // kernel k_t(s) = B*S*_{t-s}φ on [0, t]
    let forward = sys.output_terms(probe)?;
    let kernel_terms = reverse_time_exp_terms(&forward, t);
    let kernel = TimeSignal::from_exp_terms(t, sys.input_dim, kernel_terms, 3)?;
    let constant_kernel = TimeSignal::constant(t, b_phi.clone(), 3);
    let mut full = zero;
    let mut f2 = zero;
    if let Some(rho) = u.density() {
        full += crate::input::density_pairing(rho, &kernel, t, cfg);
        f2 += crate::input::density_pairing(rho, &constant_kernel, t, cfg);
    }
    for (t0, u0) in u.atoms() {
        if *t0 <= t {
            full += u_inner(u0, &kernel.eval(*t0));
            f2 += u_inner(u0, &b_phi);
        }
    }
    for (g, u0) in u.derivative_parts() {
        // ⟨-g'⊗u0, 1_{[0,t]} k_t⟩ = ∫_0^t g (u0, ∂_s k_t) ds - g(t)(u0, B*φ):
        // the cut at s = t contributes the boundary term through the
        // distributional derivative of the indicator.
        full += crate::input::derivative_pairing(g, u0, &kernel, t, cfg);
        let boundary = g.eval_scalar(t) * u_inner(u0, &b_phi);
        full -= boundary;
        f2 -= boundary;
    }
    let f1 = full - f2;
    Ok((full, f1, f2))
}

/// Sample the state curve pairings on a grid, for a family of probes.
///
/// Probes need tower index ≥ 2 when the input carries distributional parts
/// (the curve extension lands in L²(0,T; X_{-2})).
pub fn state_curve<T: Scalar>(
    sys: &SpectralSystem<T>,
    u: &GeneralizedInput<T>,
    grid: &TimeGrid<T>,
    probes: &[TowerVector<T>],
    with_split: bool,
) -> Result<CurveSample<T>> {
    state_curve_with(sys, u, grid, probes, with_split, &QuadConfig::default())
}

pub fn state_curve_with<T: Scalar>(
    sys: &SpectralSystem<T>,
    u: &GeneralizedInput<T>,
    grid: &TimeGrid<T>,
    probes: &[TowerVector<T>],
    with_split: bool,
    cfg: &QuadConfig,
) -> Result<CurveSample<T>> {
    for probe in probes {
        if probe.side != Side::Adjoint {
            return Err(Error::invalid("curve probes must be adjoint-side"));
        }
        if u.dual_index() < 0 && probe.tower_index < 2 {
            return Err(Error::invalid(
                "distributional inputs need probes of tower index >= 2",
            ));
        }
    }
    let times = grid.points();
    let mut pairings = Vec::with_capacity(probes.len());
    let mut splits = Vec::with_capacity(probes.len());
    for probe in probes {
        let mut series = Vec::with_capacity(times.len());
        let mut inc = Vec::with_capacity(times.len());
        let mut acc = Vec::with_capacity(times.len());
        for &t in &times {
            let (full, f1, f2) = curve_parts_at(sys, u, probe, t, cfg)?;
            series.push(full);
            inc.push(f1);
            acc.push(f2);
        }
        pairings.push(series);
        splits.push(CurveSplit {
            increment_part: inc,
            accumulation_part: acc,
        });
    }
    Ok(CurveSample {
        times,
        probe_labels: (0..probes.len()).map(|i| format!("p{i}")).collect(),
        pairings,
        split: with_split.then_some(splits),
    })
}

/// F¹/F² pairings of the curve against one probe (probe tower index ≥ 2).
pub fn curve_split<T: Scalar>(
    sys: &SpectralSystem<T>,
    u: &GeneralizedInput<T>,
    grid: &TimeGrid<T>,
    probe: &TowerVector<T>,
) -> Result<(Vec<Cx<T>>, Vec<Cx<T>>)> {
    let sample = state_curve(sys, u, grid, std::slice::from_ref(probe), true)?;
    let split = sample.split.unwrap().remove(0);
    Ok((split.increment_part, split.accumulation_part))
}

/// A nonzero adjoint vector killing the first k trace functionals:
/// `B*φ = B*A*φ = ... = B*A*^{k-1}φ = 0`, supported on the given modes and
/// normalized in X. The linear system is solved by SVD; the least singular
/// direction must be a numerical nullvector.
pub fn construct_wk_vector<T: Scalar>(
    sys: &SpectralSystem<T>,
    k: u32,
    support: &[i64],
) -> Result<TowerVector<T>> {
    let n = support.len();
    let rows = k as usize * sys.input_dim;
    if n < rows + 1 {
        return Err(Error::InsufficientSupport {
            support: n,
            constraints: rows,
        });
    }
    // column j: traces of A*^i applied to basis mode support[j]
    let mut matrix = DMatrix::<Cx<T>>::zeros(rows, n);
    let mut scale = T::zero();
    for (j, &mode) in support.iter().enumerate() {
        let mut vec = TowerVector::single(mode, Cx::from(T::one()), Side::Adjoint, k as i32);
        for i in 0..k as usize {
            let trace = sys.control_trace_of(&vec)?;
            for (c, tr) in trace.iter().enumerate() {
                matrix[(i * sys.input_dim + c, j)] = *tr;
                scale = scale.max(tr.modulus());
            }
            vec = apply_adjoint_generator(sys, &vec)?;
        }
    }
    if scale == T::zero() {
        // B* vanishes on the support: any vector qualifies
        return Ok(TowerVector::single(
            support[0],
            Cx::from(T::one()),
            Side::Adjoint,
            k as i32,
        ));
    }
    let (direction, sigma_min) = least_singular_direction(&matrix)?;
    if sigma_min > scale * T::lit(1e-10) {
        return Err(Error::InsufficientSupport {
            support: n,
            constraints: rows,
        });
    }
    let norm = direction
        .iter()
        .map(|z| z.modulus_squared())
        .fold(T::zero(), |a, b| a + b)
        .sqrt();
    if norm <= T::zero() {
        return Err(Error::NullMode);
    }
    let mut out = TowerVector::zero(Side::Adjoint, k as i32);
    for (&mode, dir) in support.iter().zip(&direction) {
        let c = *dir / Cx::from(norm);
        if c.modulus_squared() > T::zero() {
            out.set(mode, c);
        }
    }
    Ok(out)
}

/// Apply A* to an adjoint coefficient vector (chain-aware: A*φ_j = μφ_j + φ_{j-1}).
pub fn apply_adjoint_generator<T: Scalar>(
    sys: &SpectralSystem<T>,
    phi: &TowerVector<T>,
) -> Result<TowerVector<T>> {
    let mut out = TowerVector::zero(phi.side, phi.tower_index - 1);
    for (k, c) in phi.iter() {
        let mode = sys.mode(k)?;
        let cur = out.get(k);
        out.set(k, cur + c * mode.eigenvalue);
    }
    // chain coupling
    for m in sys.modes() {
        if let Some(chain) = &m.chain {
            for pair in chain.windows(2) {
                let (lower, upper) = (pair[0], pair[1]);
                let c = phi.get(upper);
                if c.modulus_squared() > T::zero() {
                    let cur = out.get(lower);
                    out.set(lower, cur + c);
                }
            }
        }
    }
    Ok(out)
}

/// Jump of the curve pairing across `t0`, estimated by Richardson
/// extrapolation of two-sided evaluations.
pub fn jump_estimate<T: Scalar>(
    sys: &SpectralSystem<T>,
    u: &GeneralizedInput<T>,
    probe: &TowerVector<T>,
    t0: T,
    eps: T,
    cfg: &QuadConfig,
) -> Result<Cx<T>> {
    let j = |e: T| -> Result<Cx<T>> {
        let hi = curve_pairing_at(sys, u, probe, t0 + e, cfg)?;
        let lo = curve_pairing_at(sys, u, probe, t0 - e, cfg)?;
        Ok(hi - lo)
    };
    let coarse = j(eps)?;
    let fine = j(eps * T::lit(0.5))?;
    // jump + c·ε model: eliminate the linear term
    Ok(fine * Cx::from(T::lit(2.0)) - coarse)
}

/// Regularity report for the curve pairing against one probe.
#[derive(Debug, Clone)]
pub struct RegularityReport<T> {
    /// Max |p(t_{i+1}) - p(t_i)| per refinement level; → 0 iff continuous.
    pub max_jump_per_level: Vec<T>,
    /// Estimated finite-difference convergence order per derivative 1..=N.
    pub derivative_orders: Vec<T>,
    /// Nominal order of the 3-point centered stencils.
    pub nominal_order: T,
}

/// Probe the time regularity of the curve pairing: derivatives 0..=order by
/// centered differences under refinement (ratio 2), with convergence orders.
/// Probe points keep clear of input atoms, where the stencil order is not
/// attained.
pub fn regularity_probe<T: Scalar>(
    sys: &SpectralSystem<T>,
    u: &GeneralizedInput<T>,
    probe: &TowerVector<T>,
    grid: &TimeGrid<T>,
    order: u32,
    cfg: &QuadConfig,
) -> Result<RegularityReport<T>> {
    let levels = 4usize;
    let horizon = grid.horizon;
    let eval = |t: T| curve_pairing_at(sys, u, probe, t, cfg);
    // continuity scan
    let mut max_jump_per_level = Vec::with_capacity(levels);
    for level in 0..levels {
        let n = (grid.n - 1) * (1 << level) + 1;
        let fine = TimeGrid::new(horizon, n);
        let mut prev = eval(fine.point(0))?;
        let mut max_jump = T::zero();
        for i in 1..n {
            let cur = eval(fine.point(i))?;
            max_jump = max_jump.max((cur - prev).modulus());
            prev = cur;
        }
        max_jump_per_level.push(max_jump);
    }
    // derivative orders at interior probe points away from atoms
    let h0 = grid.step();
    let keep_clear = h0 * T::lit(2.5);
    let probe_points: Vec<T> = (1..grid.n - 1)
        .map(|i| grid.point(i))
        .filter(|t| {
            u.atoms()
                .iter()
                .all(|(t0, _)| (*t - *t0).abs() > keep_clear)
        })
        .collect();
    let mut derivative_orders = Vec::new();
    for d in 1..=order {
        let estimate = |t: T, h: T| -> Result<Cx<T>> { fd_derivative(&eval, t, h, d) };
        let mut ratios = Vec::new();
        for &t in &probe_points {
            let d0 = estimate(t, h0)?;
            let d1 = estimate(t, h0 * T::lit(0.5))?;
            let d2 = estimate(t, h0 * T::lit(0.25))?;
            let e0 = (d0 - d1).modulus();
            let e1 = (d1 - d2).modulus();
            if e1 > T::default_epsilon() * (d2.modulus() + T::one()) * T::lit(32.0) {
                ratios.push((e0 / e1).ln() / T::lit(2.0).ln());
            }
        }
        let order_est = if ratios.is_empty() {
            // differences at roundoff level: converged beyond measurement;
            // report the nominal order
            T::lit(2.0)
        } else {
            ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
            ratios[ratios.len() / 2]
        };
        derivative_orders.push(order_est);
    }
    Ok(RegularityReport {
        max_jump_per_level,
        derivative_orders,
        nominal_order: T::lit(2.0),
    })
}

/// d-th derivative by iterated 3-point centered differences.
fn fd_derivative<T: Scalar>(
    eval: &impl Fn(T) -> Result<Cx<T>>,
    t: T,
    h: T,
    d: u32,
) -> Result<Cx<T>> {
    match d {
        1 => {
            let hi = eval(t + h)?;
            let lo = eval(t - h)?;
            Ok((hi - lo) / Cx::from(h + h))
        }
        2 => {
            let hi = eval(t + h)?;
            let mid = eval(t)?;
            let lo = eval(t - h)?;
            Ok((hi - mid - mid + lo) / Cx::from(h * h))
        }
        _ => {
            // recursive stencil on first derivatives
            let hi = fd_derivative(eval, t + h, h, d - 1)?;
            let lo = fd_derivative(eval, t - h, h, d - 1)?;
            Ok((hi - lo) / Cx::from(h + h))
        }
    }
}

/// Optimal truncated admissibility constant
/// `sup ‖S_T*φ‖_X / ‖B*S*_·φ‖_{L²(0,T;U)}` over the truncated adjoint space,
/// by a generalized eigenvalue solve; `trial_count` random directions verify
/// the optimum from below.
pub fn admissibility_constant<T: Scalar>(
    sys: &SpectralSystem<T>,
    horizon: T,
    trial_count: usize,
) -> Result<T> {
    let indices: Vec<i64> = sys.mode_indices().collect();
    let n = indices.len();
    if n == 0 {
        return Err(Error::DegenerateOutput);
    }
    // semigroup Gram: columns of S_T* against the basis
    let mut semi = DMatrix::<Cx<T>>::zeros(n, n);
    for (j, &k) in indices.iter().enumerate() {
        let flowed = sys.apply_semigroup(
            horizon,
            &TowerVector::single(k, Cx::from(T::one()), Side::Adjoint, 0),
        )?;
        for (i, &ki) in indices.iter().enumerate() {
            semi[(i, j)] = flowed.get(ki);
        }
    }
    let semi_gram = semi.adjoint() * &semi;
    // output Gram in L²(0,T;U)
    let term_lists: Vec<Vec<ExpPolyTerm<T>>> = indices
        .iter()
        .map(|&k| {
            sys.output_terms(&TowerVector::single(
                k,
                Cx::from(T::one()),
                Side::Adjoint,
                1,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out_gram = DMatrix::<Cx<T>>::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            out_gram[(r, c)] = exp_terms_sobolev_inner(&term_lists[c], &term_lists[r], horizon, 0);
        }
    }
    if hermitian_max_eig(&out_gram.clone()) <= T::zero() {
        return Err(Error::DegenerateOutput);
    }
    let lam = generalized_rayleigh_max(&semi_gram, &out_gram)?;
    let optimum = lam.max(T::zero()).sqrt();
    // random probes stay below the computed optimum
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..trial_count {
        let c: Vec<Cx<T>> = (0..n)
            .map(|_| {
                Cx::new(
                    T::lit(rng.gen_range(-1.0..1.0)),
                    T::lit(rng.gen_range(-1.0..1.0)),
                )
            })
            .collect();
        let v = nalgebra::DVector::from_vec(c);
        let denom = (v.adjoint() * &out_gram * &v)[(0, 0)].re;
        if denom > T::default_epsilon() {
            let numer = (v.adjoint() * &semi_gram * &v)[(0, 0)].re;
            debug_assert!(
                (numer / denom).sqrt() <= optimum * (T::one() + T::lit(1e-8)),
                "random probe exceeded the generalized eigenvalue optimum"
            );
        }
    }
    Ok(optimum)
}
