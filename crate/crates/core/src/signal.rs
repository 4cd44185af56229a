//! Time signals on (0, T): sampled values plus an evaluation kernel.
//!
//! A [`TimeSignal`] always carries uniform-grid samples (the serialized
//! representation), and optionally an exact kernel: a cosine series, a sum of
//! `t^p e^{μt}` terms (the closed forms produced by the spectral maps), or
//! the singular density used by the sharp-regularity experiment. Norms and
//! pairings dispatch on the kernel so spectral outputs are evaluated in
//! closed form rather than by interpolation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadConfig};
use crate::scalar::{power_exp_integrals_0t, ComplexField, Cx, Scalar};

/// Uniform time grid on [0, T] including both endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T> {
    pub horizon: T,
    pub n: usize,
}

impl<T: Scalar> TimeGrid<T> {
    pub fn new(horizon: T, n: usize) -> Self {
        assert!(n >= 2, "grid needs at least the two endpoints");
        TimeGrid { horizon, n }
    }

    pub fn step(&self) -> T {
        self.horizon / T::from_usize_(self.n - 1)
    }

    pub fn point(&self, i: usize) -> T {
        self.horizon * T::from_usize_(i) / T::from_usize_(self.n - 1)
    }

    pub fn points(&self) -> Vec<T> {
        (0..self.n).map(|i| self.point(i)).collect()
    }
}

/// One closed-form term `amp · (t - shift)^power · e^{rate·(t - shift)}`.
///
/// The anchor keeps strongly decaying kernels representable: reversing
/// `e^{μ(T-s)}` in time stores rate `-μ` anchored at `shift = T`, so neither
/// an `e^{μT}` amplitude underflow nor an `e^{-μs}` growth overflow ever
/// materializes. Anchors always satisfy `Re(rate)·(t - shift) ≤ 0` on the
/// signal's horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpPolyTerm<T> {
    pub rate: Cx<T>,
    pub power: u32,
    pub amp: Vec<Cx<T>>,
    pub shift: T,
}

impl<T: Scalar> ExpPolyTerm<T> {
    pub fn anchored_at_zero(rate: Cx<T>, power: u32, amp: Vec<Cx<T>>) -> Self {
        ExpPolyTerm {
            rate,
            power,
            amp,
            shift: T::zero(),
        }
    }
}

/// Parameters of the pathological density `α`: square-integrable but not
/// p-integrable for any p > 2 near each singular point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaKernel<T> {
    pub horizon: T,
    pub points: Vec<T>,
    pub weights: Vec<T>,
    pub cap: T,
}

impl<T: Scalar> AlphaKernel<T> {
    /// α(t) = Σ_j w_j |t-q_j|^{-1/2} (1 + |log|t-q_j||)^{-1}, clamped at
    /// `cap`. The flag reports whether clamping happened (exact hits included).
    pub fn eval_checked(&self, t: T) -> (T, bool) {
        let mut total = T::zero();
        let mut capped = false;
        for (q, w) in self.points.iter().zip(&self.weights) {
            let d = (t - *q).abs();
            if d <= T::zero() {
                capped = true;
                total += self.cap;
                continue;
            }
            let val = *w / (d.sqrt() * (T::one() + d.ln().abs()));
            if val > self.cap {
                capped = true;
                total += self.cap;
            } else {
                total += val;
            }
        }
        (total, capped)
    }
}

/// Evaluation strategy behind a signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Kernel<T> {
    /// Piecewise-linear interpolation of the stored samples.
    Grid,
    /// Finite cosine series (the stored `cosine` coefficients).
    Cosine,
    /// Sum of exponential-polynomial terms; exact everywhere.
    ExpPoly(Vec<ExpPolyTerm<T>>),
    /// Pathological square-integrable density (scalar-valued).
    Singular(AlphaKernel<T>),
}

/// A function of time with values in U ≅ ℂ^dim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSignal<T> {
    horizon: T,
    dim: usize,
    /// Samples on the uniform grid (n_grid × dim), endpoints included.
    values: Vec<Vec<Cx<T>>>,
    /// Optional cosine coefficients c_0..c_m against cos(mπt/T), per component.
    cosine: Option<Vec<Vec<Cx<T>>>>,
    /// Asserted Sobolev regularity H^M of the signal.
    smoothness: u32,
    kernel: Kernel<T>,
}

pub const DEFAULT_SIGNAL_GRID: usize = 257;

impl<T: Scalar> TimeSignal<T> {
    /// Signal from raw samples; evaluation interpolates linearly.
    pub fn from_samples(horizon: T, values: Vec<Vec<Cx<T>>>, smoothness: u32) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::invalid("need at least two samples"));
        }
        let dim = values[0].len();
        if dim == 0 || values.iter().any(|v| v.len() != dim) {
            return Err(Error::dim("ragged sample rows"));
        }
        Ok(TimeSignal {
            horizon,
            dim,
            values,
            cosine: None,
            smoothness,
            kernel: Kernel::Grid,
        })
    }

    /// Signal from a closure, sampled on `n_grid` points (grid kernel).
    pub fn from_fn(
        horizon: T,
        dim: usize,
        n_grid: usize,
        f: impl Fn(T) -> Vec<Cx<T>>,
    ) -> Result<Self> {
        let grid = TimeGrid::new(horizon, n_grid);
        let values: Vec<Vec<Cx<T>>> = grid.points().into_iter().map(f).collect();
        if values.iter().any(|v| v.len() != dim) {
            return Err(Error::dim("closure output dimension"));
        }
        Self::from_samples(horizon, values, 0)
    }

    /// Signal defined by cosine coefficients `coeffs[m][component]`.
    pub fn from_cosine(horizon: T, coeffs: Vec<Vec<Cx<T>>>, n_grid: usize) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("empty cosine coefficient list"));
        }
        let dim = coeffs[0].len();
        if dim == 0 || coeffs.iter().any(|c| c.len() != dim) {
            return Err(Error::dim("ragged cosine rows"));
        }
        let mut sig = TimeSignal {
            horizon,
            dim,
            values: Vec::new(),
            cosine: Some(coeffs),
            smoothness: u32::MAX,
            kernel: Kernel::Cosine,
        };
        sig.resample(n_grid);
        Ok(sig)
    }

    /// Signal from exponential-polynomial terms; exact evaluation.
    pub fn from_exp_terms(
        horizon: T,
        dim: usize,
        terms: Vec<ExpPolyTerm<T>>,
        n_grid: usize,
    ) -> Result<Self> {
        if terms.iter().any(|t| t.amp.len() != dim) {
            return Err(Error::dim("term amplitude dimension"));
        }
        let mut sig = TimeSignal {
            horizon,
            dim,
            values: Vec::new(),
            cosine: None,
            smoothness: u32::MAX,
            kernel: Kernel::ExpPoly(terms),
        };
        sig.resample(n_grid);
        Ok(sig)
    }

    /// The constant signal `t ↦ value`.
    pub fn constant(horizon: T, value: Vec<Cx<T>>, n_grid: usize) -> Self {
        let dim = value.len();
        Self::from_exp_terms(
            horizon,
            dim,
            vec![ExpPolyTerm {
                rate: Cx::from(T::zero()),
                power: 0,
                amp: value,
                shift: T::zero(),
            }],
            n_grid,
        )
        .expect("constant term is well-formed")
    }

    /// Scalar singular density (dim 1), see [`AlphaKernel`].
    pub fn from_alpha(kernel: AlphaKernel<T>, n_grid: usize) -> Self {
        let horizon = kernel.horizon;
        let mut sig = TimeSignal {
            horizon,
            dim: 1,
            values: Vec::new(),
            cosine: None,
            smoothness: 0,
            kernel: Kernel::Singular(kernel),
        };
        sig.resample(n_grid);
        sig
    }

    fn resample(&mut self, n_grid: usize) {
        let grid = TimeGrid::new(self.horizon, n_grid.max(2));
        self.values = grid.points().into_iter().map(|t| self.eval(t)).collect();
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_grid(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Vec<Cx<T>>] {
        &self.values
    }

    pub fn cosine_coefficients(&self) -> Option<&Vec<Vec<Cx<T>>>> {
        self.cosine.as_ref()
    }

    pub fn smoothness(&self) -> u32 {
        self.smoothness
    }

    pub fn with_smoothness(mut self, m: u32) -> Self {
        self.smoothness = m;
        self
    }

    pub fn kernel(&self) -> &Kernel<T> {
        &self.kernel
    }

    /// Interior points where the signal is non-smooth; quadrature panels are
    /// split there.
    pub fn singular_points(&self) -> Vec<T> {
        match &self.kernel {
            Kernel::Singular(a) => a.points.clone(),
            _ => Vec::new(),
        }
    }

    /// Largest |Re rate| of the kernel: quadrature against the signal needs
    /// panel counts proportional to this to resolve boundary layers.
    pub fn stiffness(&self) -> T {
        match &self.kernel {
            Kernel::ExpPoly(terms) => terms
                .iter()
                .fold(T::zero(), |a, t| a.max(t.rate.re.abs())),
            _ => T::zero(),
        }
    }

    /// Exact exponential-polynomial form of the signal, when one exists
    /// (exp-poly kernels as-is, cosine series expanded termwise).
    pub fn as_exp_terms(&self) -> Option<Vec<ExpPolyTerm<T>>> {
        match &self.kernel {
            Kernel::ExpPoly(terms) => Some(terms.clone()),
            Kernel::Cosine => {
                let coeffs = self.cosine.as_ref()?;
                let mut terms = Vec::new();
                for (m, row) in coeffs.iter().enumerate() {
                    if row.iter().all(|c| c.modulus_squared() == T::zero()) {
                        continue;
                    }
                    if m == 0 {
                        terms.push(ExpPolyTerm {
                            rate: Cx::from(T::zero()),
                            power: 0,
                            amp: row.clone(),
                            shift: T::zero(),
                        });
                        continue;
                    }
                    let omega = T::pi() * T::from_usize_(m) / self.horizon;
                    let half: Vec<Cx<T>> =
                        row.iter().map(|c| *c * Cx::from(T::lit(0.5))).collect();
                    for sign in [T::one(), -T::one()] {
                        terms.push(ExpPolyTerm {
                            rate: Cx::new(T::zero(), sign * omega),
                            power: 0,
                            amp: half.clone(),
                            shift: T::zero(),
                        });
                    }
                }
                Some(terms)
            }
            _ => None,
        }
    }

    /// Evaluate at `t ∈ [0, T]`.
    pub fn eval(&self, t: T) -> Vec<Cx<T>> {
        match &self.kernel {
            Kernel::Grid => self.eval_grid(t),
            Kernel::Cosine => {
                let coeffs = self.cosine.as_ref().expect("cosine kernel has coeffs");
                let mut out = vec![Cx::from(T::zero()); self.dim];
                for (m, row) in coeffs.iter().enumerate() {
                    let w = (T::pi() * T::from_usize_(m) * t / self.horizon).cos();
                    for (o, c) in out.iter_mut().zip(row) {
                        *o += *c * Cx::from(w);
                    }
                }
                out
            }
            Kernel::ExpPoly(terms) => eval_exp_terms(terms, self.dim, t),
            Kernel::Singular(a) => vec![Cx::from(a.eval_checked(t).0)],
        }
    }

    /// Scalar evaluation (first component).
    pub fn eval_scalar(&self, t: T) -> Cx<T> {
        self.eval(t)[0]
    }

    fn eval_grid(&self, t: T) -> Vec<Cx<T>> {
        let n = self.values.len();
        let h = self.horizon / T::from_usize_(n - 1);
        let pos = t / h;
        let i = pos.floor().as_f64() as usize;
        if i + 1 >= n {
            return self.values[n - 1].clone();
        }
        let frac = pos - T::from_usize_(i);
        self.values[i]
            .iter()
            .zip(&self.values[i + 1])
            .map(|(a, b)| *a + (*b - *a) * Cx::from(frac))
            .collect()
    }

    /// First derivative at `t` (exact for cosine / exp-poly kernels, finite
    /// differences on grid samples).
    pub fn eval_derivative(&self, t: T) -> Vec<Cx<T>> {
        match &self.kernel {
            Kernel::Cosine => {
                let coeffs = self.cosine.as_ref().unwrap();
                let mut out = vec![Cx::from(T::zero()); self.dim];
                for (m, row) in coeffs.iter().enumerate() {
                    let omega = T::pi() * T::from_usize_(m) / self.horizon;
                    let w = -(omega * t).sin() * omega;
                    for (o, c) in out.iter_mut().zip(row) {
                        *o += *c * Cx::from(w);
                    }
                }
                out
            }
            Kernel::ExpPoly(terms) => {
                eval_exp_terms(&differentiate_exp_terms(terms), self.dim, t)
            }
            _ => {
                // centered difference on the sample spacing
                let h = self.horizon / T::from_usize_((self.values.len() - 1).max(1));
                let lo = (t - h).max(T::zero());
                let hi = (t + h).min(self.horizon);
                let a = self.eval(lo);
                let b = self.eval(hi);
                b.iter()
                    .zip(&a)
                    .map(|(x, y)| (*x - *y) / Cx::from(hi - lo))
                    .collect()
            }
        }
    }

    /// Exact derivative as a new signal, where the kernel supports it.
    pub fn derivative(&self) -> Option<TimeSignal<T>> {
        match &self.kernel {
            Kernel::ExpPoly(terms) => Some(
                TimeSignal::from_exp_terms(
                    self.horizon,
                    self.dim,
                    differentiate_exp_terms(terms),
                    self.values.len(),
                )
                .expect("derivative terms well-formed"),
            ),
            Kernel::Cosine => {
                // d/dt cos(mπt/T) = -(mπ/T) sin(mπt/T): not a cosine series;
                // fall back to sampling the exact derivative.
                let n = self.values.len();
                let grid = TimeGrid::new(self.horizon, n);
                let values = grid
                    .points()
                    .into_iter()
                    .map(|t| self.eval_derivative(t))
                    .collect();
                TimeSignal::from_samples(self.horizon, values, self.smoothness.saturating_sub(1))
                    .ok()
            }
            _ => None,
        }
    }

    /// Endpoint values (t = 0 and t = T).
    pub fn endpoint_traces(&self) -> (Vec<Cx<T>>, Vec<Cx<T>>) {
        (self.eval(T::zero()), self.eval(self.horizon))
    }

    /// Canonical H^M norm. Cosine series use the diagonal weight formula,
    /// exp-poly kernels the closed-form derivative Grams; grid samples are
    /// projected onto the cosine basis first (piecewise-linear moments, so
    /// grid signals should only be measured at M ≤ 1).
    pub fn sobolev_norm(&self, m: u32) -> T {
        match &self.kernel {
            Kernel::Cosine => {
                let coeffs = self.cosine.as_ref().unwrap();
                cosine_sobolev_norm(self.horizon, coeffs, m)
            }
            Kernel::ExpPoly(terms) => {
                let mut total = T::zero();
                let mut current = terms.clone();
                for _ in 0..=m {
                    total += exp_terms_l2_inner(&current, &current, self.horizon).re;
                    current = differentiate_exp_terms(&current);
                }
                total.max(T::zero()).sqrt()
            }
            Kernel::Singular(_) => {
                assert!(m == 0, "singular densities live in L^2 only");
                self.sobolev_norm_quadrature(0, &QuadConfig::default())
            }
            Kernel::Grid => {
                let n_basis = self.values.len().max(64);
                let coeffs = self.project_cosine(n_basis);
                cosine_sobolev_norm(self.horizon, &coeffs, m)
            }
        }
    }

    /// Independent H^M norm by quadrature of the derivatives (exact kernel
    /// derivatives where available). Cross-check path for tests.
    pub fn sobolev_norm_quadrature(&self, m: u32, cfg: &QuadConfig) -> T {
        let breaks = self.singular_points();
        let mut total = T::zero();
        let mut current = self.clone();
        for j in 0..=m {
            let sq = integrate(
                |t| {
                    let v = current.eval(t);
                    Cx::from(v.iter().map(|z| z.modulus_squared()).fold(T::zero(), |a, b| a + b))
                },
                T::zero(),
                self.horizon,
                &breaks,
                cfg,
            );
            total += sq.re;
            if j < m {
                current = current
                    .derivative()
                    .expect("quadrature norm needs differentiable kernel");
            }
        }
        total.max(T::zero()).sqrt()
    }

    /// L² inner product `∫ (self(t), other(t))_U dt` (linear in self,
    /// anti-linear in other). Closed form for exp-poly pairs, quadrature
    /// otherwise.
    pub fn l2_inner(&self, other: &TimeSignal<T>, cfg: &QuadConfig) -> Cx<T> {
        if let (Kernel::ExpPoly(a), Kernel::ExpPoly(b)) = (&self.kernel, &other.kernel) {
            return exp_terms_l2_inner(a, b, self.horizon);
        }
        let mut breaks = self.singular_points();
        breaks.extend(other.singular_points());
        integrate(
            |t| u_inner(&self.eval(t), &other.eval(t)),
            T::zero(),
            self.horizon.min(other.horizon),
            &breaks,
            cfg,
        )
    }

    /// Project onto the cosine basis (coefficients of the piecewise-linear
    /// interpolant, computed exactly).
    pub fn project_cosine(&self, n_basis: usize) -> Vec<Vec<Cx<T>>> {
        let grid = TimeGrid::new(self.horizon, self.values.len());
        let mut coeffs = vec![vec![Cx::from(T::zero()); self.dim]; n_basis + 1];
        for (m, row) in coeffs.iter_mut().enumerate() {
            let omega = T::pi() * T::from_usize_(m) / self.horizon;
            let ell = if m == 0 {
                self.horizon
            } else {
                self.horizon * T::lit(0.5)
            };
            for i in 0..self.values.len() - 1 {
                let (u, v) = (grid.point(i), grid.point(i + 1));
                for c in 0..self.dim {
                    let moment =
                        pl_cosine_moment(u, v, self.values[i][c], self.values[i + 1][c], omega);
                    row[c] += moment / Cx::from(ell);
                }
            }
        }
        coeffs
    }

    /// Sum of two signals; exact when both carry exp-poly kernels.
    pub fn try_add(&self, other: &TimeSignal<T>) -> Result<TimeSignal<T>> {
        if self.dim != other.dim {
            return Err(Error::dim("signal sum dimensions"));
        }
        match (&self.kernel, &other.kernel) {
            (Kernel::ExpPoly(a), Kernel::ExpPoly(b)) => {
                let mut terms = a.clone();
                terms.extend(b.iter().cloned());
                TimeSignal::from_exp_terms(self.horizon, self.dim, terms, self.values.len())
            }
            _ => {
                let n = self.values.len().max(other.values.len());
                let grid = TimeGrid::new(self.horizon, n);
                let values = grid
                    .points()
                    .into_iter()
                    .map(|t| {
                        self.eval(t)
                            .iter()
                            .zip(&other.eval(t))
                            .map(|(x, y)| *x + *y)
                            .collect()
                    })
                    .collect();
                TimeSignal::from_samples(
                    self.horizon,
                    values,
                    self.smoothness.min(other.smoothness),
                )
            }
        }
    }

    pub fn scaled(&self, factor: Cx<T>) -> TimeSignal<T> {
        let mut out = self.clone();
        for row in &mut out.values {
            for v in row.iter_mut() {
                *v *= factor;
            }
        }
        match &mut out.kernel {
            Kernel::ExpPoly(terms) => {
                for term in terms {
                    for a in &mut term.amp {
                        *a *= factor;
                    }
                }
            }
            Kernel::Cosine => {
                for row in out.cosine.as_mut().unwrap() {
                    for c in row.iter_mut() {
                        *c *= factor;
                    }
                }
            }
            Kernel::Grid => {}
            Kernel::Singular(_) => {
                // scaling a singular density re-tags it as a grid signal
                out.kernel = Kernel::Grid;
            }
        }
        out
    }
}

/// `cos(mπt/T) ⊗ e_component`, exactly representable as two exponentials.
pub fn cosine_basis_signal<T: Scalar>(
    horizon: T,
    dim: usize,
    component: usize,
    m: usize,
    n_grid: usize,
) -> TimeSignal<T> {
    let mut unit = vec![Cx::from(T::zero()); dim];
    unit[component] = Cx::from(T::one());
    if m == 0 {
        return TimeSignal::constant(horizon, unit, n_grid);
    }
    let omega = T::pi() * T::from_usize_(m) / horizon;
    let half: Vec<Cx<T>> = unit.iter().map(|u| *u * Cx::from(T::lit(0.5))).collect();
    let terms = vec![
        ExpPolyTerm {
            rate: Cx::new(T::zero(), omega),
            power: 0,
            amp: half.clone(),
            shift: T::zero(),
        },
        ExpPolyTerm {
            rate: Cx::new(T::zero(), -omega),
            power: 0,
            amp: half,
            shift: T::zero(),
        },
    ];
    TimeSignal::from_exp_terms(horizon, dim, terms, n_grid).expect("basis terms well-formed")
}

/// `sin(mπt/T) ⊗ e_component` (m ≥ 1); vanishes at both endpoints.
pub fn sine_basis_signal<T: Scalar>(
    horizon: T,
    dim: usize,
    component: usize,
    m: usize,
    n_grid: usize,
) -> TimeSignal<T> {
    assert!(m >= 1, "sine basis starts at m = 1");
    let mut unit = vec![Cx::from(T::zero()); dim];
    unit[component] = Cx::from(T::one());
    let omega = T::pi() * T::from_usize_(m) / horizon;
    // sin(ωt) = (e^{iωt} - e^{-iωt}) / (2i)
    let inv_2i = Cx::new(T::zero(), T::lit(-0.5));
    let amp: Vec<Cx<T>> = unit.iter().map(|u| *u * inv_2i).collect();
    let neg: Vec<Cx<T>> = amp.iter().map(|a| -*a).collect();
    let terms = vec![
        ExpPolyTerm {
            rate: Cx::new(T::zero(), omega),
            power: 0,
            amp,
            shift: T::zero(),
        },
        ExpPolyTerm {
            rate: Cx::new(T::zero(), -omega),
            power: 0,
            amp: neg,
            shift: T::zero(),
        },
    ];
    TimeSignal::from_exp_terms(horizon, dim, terms, n_grid).expect("basis terms well-formed")
}

/// U-inner product, linear in the first slot and anti-linear in the second.
pub fn u_inner<T: Scalar>(x: &[Cx<T>], y: &[Cx<T>]) -> Cx<T> {
    debug_assert_eq!(x.len(), y.len());
    x.iter()
        .zip(y)
        .map(|(a, b)| *a * b.conj())
        .fold(Cx::from(T::zero()), |acc, v| acc + v)
}

fn eval_exp_terms<T: Scalar>(terms: &[ExpPolyTerm<T>], dim: usize, t: T) -> Vec<Cx<T>> {
    let mut out = vec![Cx::from(T::zero()); dim];
    for term in terms {
        let dt = t - term.shift;
        let scale = (term.rate * dt).exp() * ComplexField::powi(Cx::from(dt), term.power as i32);
        for (o, a) in out.iter_mut().zip(&term.amp) {
            *o += *a * scale;
        }
    }
    out
}

pub fn differentiate_exp_terms<T: Scalar>(terms: &[ExpPolyTerm<T>]) -> Vec<ExpPolyTerm<T>> {
    let mut out = Vec::with_capacity(terms.len() * 2);
    for term in terms {
        out.push(ExpPolyTerm {
            rate: term.rate,
            power: term.power,
            amp: term.amp.iter().map(|a| *a * term.rate).collect(),
            shift: term.shift,
        });
        if term.power > 0 {
            let p = Cx::from(T::from_u32(term.power).unwrap());
            out.push(ExpPolyTerm {
                rate: term.rate,
                power: term.power - 1,
                amp: term.amp.iter().map(|a| *a * p).collect(),
                shift: term.shift,
            });
        }
    }
    out
}

/// Termwise conjugate: conj(f)(t) for real t.
pub fn conjugate_exp_terms<T: Scalar>(terms: &[ExpPolyTerm<T>]) -> Vec<ExpPolyTerm<T>> {
    terms
        .iter()
        .map(|t| ExpPolyTerm {
            rate: t.rate.conj(),
            power: t.power,
            amp: t.amp.iter().map(|a| a.conj()).collect(),
            shift: t.shift,
        })
        .collect()
}

/// Coefficients of (τ + δ)^p in powers of τ.
fn binomial_shift<T: Scalar>(p: u32, delta: T) -> Vec<T> {
    let p = p as usize;
    let mut coeffs = vec![T::zero(); p + 1];
    let mut binom = T::one();
    for m in 0..=p {
        if m > 0 {
            binom = binom * T::from_usize_(p - m + 1) / T::from_usize_(m);
        }
        coeffs[m] = binom * delta.powi((p - m) as i32);
    }
    coeffs
}

/// `∫_0^T (f(t), g(t))_U dt` for two exp-poly term lists, in closed form.
///
/// Each term pair is re-anchored at the shift of the factor with the larger
/// |Re rate| before integrating; with the anchor convention above every
/// intermediate exponential stays bounded by one, so mixed decaying and
/// reversed kernels never overflow.
pub fn exp_terms_l2_inner<T: Scalar>(
    f: &[ExpPolyTerm<T>],
    g: &[ExpPolyTerm<T>],
    horizon: T,
) -> Cx<T> {
    let mut total = Cx::from(T::zero());
    for a in f {
        for b in g {
            let amp = u_inner(&a.amp, &b.amp);
            if amp.modulus_squared() == T::zero() {
                continue;
            }
            let r1 = a.rate;
            let r2 = b.rate.conj();
            let z = r1 + r2;
            let anchor = if r1.re.abs() >= r2.re.abs() {
                a.shift
            } else {
                b.shift
            };
            // e^{r1(t-a)} e^{r2(t-b)} = e^{z(t-c)} · e^{r1(c-a) + r2(c-b)}
            let constant = (r1 * (anchor - a.shift) + r2 * (anchor - b.shift)).exp();
            // (t-a)^p (t-b)^q expanded in powers of τ = t - c
            let pa = binomial_shift(a.power, anchor - a.shift);
            let pb = binomial_shift(b.power, anchor - b.shift);
            let mut poly = vec![T::zero(); pa.len() + pb.len() - 1];
            for (i, &x) in pa.iter().enumerate() {
                for (j, &y) in pb.iter().enumerate() {
                    poly[i + j] += x * y;
                }
            }
            let n_max = poly.len() - 1;
            // ∫_{-c}^{T-c} τ^m e^{zτ} dτ = I_m(T-c) - I_m(-c)
            let upper = power_exp_integrals_0t(z, horizon - anchor, n_max);
            let lower = power_exp_integrals_0t(z, -anchor, n_max);
            let mut integral = Cx::from(T::zero());
            for (m, &coef) in poly.iter().enumerate() {
                integral += (upper[m] - lower[m]) * Cx::from(coef);
            }
            total += amp * constant * integral;
        }
    }
    total
}

/// H^m inner product `Σ_{j≤m} ∫ (f^{(j)}, g^{(j)})_U dt` of two exp-poly
/// lists, in closed form.
pub fn exp_terms_sobolev_inner<T: Scalar>(
    f: &[ExpPolyTerm<T>],
    g: &[ExpPolyTerm<T>],
    horizon: T,
    m: u32,
) -> Cx<T> {
    let mut total = Cx::from(T::zero());
    let mut fd = f.to_vec();
    let mut gd = g.to_vec();
    for j in 0..=m {
        total += exp_terms_l2_inner(&fd, &gd, horizon);
        if j < m {
            fd = differentiate_exp_terms(&fd);
            gd = differentiate_exp_terms(&gd);
        }
    }
    total
}

/// Terms of `t ↦ f(T - t)` given the terms of `f`: the anchor absorbs the
/// reversal, `(T - t - a)^p e^{μ(T-t-a)} = (-1)^p (t - (T-a))^p e^{-μ(t-(T-a))}`.
pub fn reverse_time_exp_terms<T: Scalar>(
    terms: &[ExpPolyTerm<T>],
    horizon: T,
) -> Vec<ExpPolyTerm<T>> {
    terms
        .iter()
        .map(|term| {
            let sign = if term.power % 2 == 0 {
                T::one()
            } else {
                -T::one()
            };
            ExpPolyTerm {
                rate: -term.rate,
                power: term.power,
                amp: term.amp.iter().map(|a| *a * Cx::from(sign)).collect(),
                shift: horizon - term.shift,
            }
        })
        .collect()
}

/// H^M norm from cosine coefficients: the basis diagonalizes every H^j inner
/// product, so the norm is a weighted coefficient sum.
pub fn cosine_sobolev_norm<T: Scalar>(horizon: T, coeffs: &[Vec<Cx<T>>], m: u32) -> T {
    let mut total = T::zero();
    for (idx, row) in coeffs.iter().enumerate() {
        let omega = T::pi() * T::from_usize_(idx) / horizon;
        let ell = if idx == 0 {
            horizon
        } else {
            horizon * T::lit(0.5)
        };
        let mut weight = T::zero();
        let mut pow = T::one();
        for _ in 0..=m {
            weight += pow;
            pow *= omega * omega;
        }
        let mass: T = row
            .iter()
            .map(|c| c.modulus_squared())
            .fold(T::zero(), |a, b| a + b);
        total += mass * ell * weight;
    }
    total.max(T::zero()).sqrt()
}

/// Exact `∫_u^v PL(t) cos(ω t) dt` for the linear segment through
/// `(u, f_u), (v, f_v)`.
fn pl_cosine_moment<T: Scalar>(u: T, v: T, f_u: Cx<T>, f_v: Cx<T>, omega: T) -> Cx<T> {
    let len = v - u;
    if omega == T::zero() {
        return (f_u + f_v) * Cx::from(len * T::lit(0.5));
    }
    let slope = (f_v - f_u) / Cx::from(len);
    let (su, sv) = ((omega * u).sin(), (omega * v).sin());
    let (cu, cv) = ((omega * u).cos(), (omega * v).cos());
    let base = f_u * Cx::from((sv - su) / omega);
    let ramp = Cx::from(len * sv / omega + (cv - cu) / (omega * omega));
    base + slope * ramp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    fn c64(re: f64, im: f64) -> Cx<f64> {
        cx(re, im)
    }

    #[test]
    fn constant_signal_norms() {
        // φ ≡ 1 on (0,1): ||φ||_{H^1} = 1
        let sig = TimeSignal::constant(1.0, vec![c64(1.0, 0.0)], 33);
        assert!((sig.sobolev_norm(1) - 1.0).abs() < 1e-14);
        assert!((sig.sobolev_norm(0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cosine_mode_l2_norm() {
        // φ(t) = cos(πt) on (0,1): ||φ||_{L²} = sqrt(1/2)
        let sig = TimeSignal::from_cosine(
            1.0,
            vec![vec![c64(0.0, 0.0)], vec![c64(1.0, 0.0)]],
            65,
        )
        .unwrap();
        assert!((sig.sobolev_norm(0) - 0.5f64.sqrt()).abs() < 1e-14);
        // quadrature path agrees
        let q = sig.sobolev_norm_quadrature(0, &QuadConfig::default());
        assert!((q - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn exp_signal_hn_norm_closed_form_vs_quadrature() {
        // φ(t) = e^{λ t}: ||φ||²_{H^N} = Σ_j |λ|^{2j} (e^{2ReλT}-1)/(2Reλ)
        let lam = c64(-0.8, 1.7);
        let sig = TimeSignal::from_exp_terms(
            1.0,
            1,
            vec![ExpPolyTerm {
                rate: lam,
                power: 0,
                amp: vec![c64(1.0, 0.0)],
                shift: 0.0,
            }],
            65,
        )
        .unwrap();
        for n in 0..=3u32 {
            let closed = sig.sobolev_norm(n);
            let quad = sig.sobolev_norm_quadrature(n, &QuadConfig::default());
            assert!(
                (closed - quad).abs() < 1e-12 * closed.max(1.0),
                "n={n}: {closed} vs {quad}"
            );
            // reference formula
            let e = ((2.0 * lam.re).exp() - 1.0) / (2.0 * lam.re);
            let mut s = 0.0;
            let mut pw = 1.0;
            for _ in 0..=n {
                s += pw * e;
                pw *= lam.modulus_squared();
            }
            assert!((closed - s.sqrt()).abs() < 1e-12 * closed);
        }
    }

    #[test]
    fn grid_projection_recovers_cosine_norm() {
        let sig = TimeSignal::from_fn(1.0, 1, 2049, |t| {
            vec![Cx::from((std::f64::consts::PI * t).cos())]
        })
        .unwrap();
        assert!((sig.sobolev_norm(0) - 0.5f64.sqrt()).abs() < 1e-6);
        assert!((sig.sobolev_norm(1) - (0.5 + 0.5 * std::f64::consts::PI.powi(2)).sqrt()).abs() < 1e-4);
    }

    #[test]
    fn jordan_style_term_derivative() {
        // f(t) = t e^{μt}: f'(t) = (1 + μt) e^{μt}
        let mu = c64(-0.3, 0.9);
        let sig = TimeSignal::from_exp_terms(
            2.0,
            1,
            vec![ExpPolyTerm {
                rate: mu,
                power: 1,
                amp: vec![c64(1.0, 0.0)],
                shift: 0.0,
            }],
            33,
        )
        .unwrap();
        let t = 1.3;
        let d = sig.eval_derivative(t)[0];
        let want = (Cx::from(1.0) + mu * t) * (mu * t).exp();
        assert!((d - want).modulus() < 1e-13);
    }

    #[test]
    fn alpha_kernel_capping() {
        let a = AlphaKernel {
            horizon: 1.0f64,
            points: vec![0.5],
            weights: vec![1.0],
            cap: 1e10,
        };
        let (v, capped) = a.eval_checked(0.5);
        assert!(capped);
        assert_eq!(v, 1e10);
        let (v2, capped2) = a.eval_checked(0.25);
        assert!(!capped2);
        assert!(v2 > 0.0 && v2.is_finite());
    }

    #[test]
    fn exp_poly_sum_is_exact() {
        let s1 = TimeSignal::constant(1.0, vec![c64(1.0, 0.0)], 17);
        let s2 = TimeSignal::from_exp_terms(
            1.0,
            1,
            vec![ExpPolyTerm {
                rate: c64(-1.0, 0.0),
                power: 0,
                amp: vec![c64(2.0, 0.0)],
                shift: 0.0,
            }],
            17,
        )
        .unwrap();
        let sum = s1.try_add(&s2).unwrap();
        let t = 0.37;
        let want = 1.0 + 2.0 * (-t as f64).exp();
        assert!((sum.eval_scalar(t).re - want).abs() < 1e-14);
        assert!(matches!(sum.kernel(), Kernel::ExpPoly(_)));
    }

    #[test]
    fn serde_roundtrip() {
        let sig = TimeSignal::from_exp_terms(
            1.5,
            2,
            vec![ExpPolyTerm {
                rate: c64(-1.0, 2.0),
                power: 1,
                amp: vec![c64(1.0, 0.0), c64(0.0, -1.0)],
                shift: 0.0,
            }],
            9,
        )
        .unwrap();
        let json = serde_json::to_string(&sig).unwrap();
        let back: TimeSignal<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(sig, back);
    }
}
