//! Spectral representation of the control system Σ(A, B).
//!
//! A [`SpectralSystem`] is a finite family of adjoint eigenmodes: eigenvalues
//! μ_k of A*, control traces b_k = B*φ_k, and branch tags. The biorthogonal
//! primal family z_k (with A z_k = conj(μ_k) z_k) is never stored; both sides
//! are addressed through coefficient vectors ([`TowerVector`]) against their
//! respective bases, with biorthogonality taken as exact.
//!
//! Tower norms use the coefficient weights
//! `w_k(N) = Σ_{j=0}^{N} |μ_k|^{2j}` for `N ≥ 0` and `w_k(N) = w_k(-N)^{-1}`
//! for `N < 0`. These are the canonical norms of the toolkit: monotone in N
//! for every eigenvalue, reciprocal across the pivot, and they reproduce the
//! graph-norm weights `1 + |μ|^{2N}` up to the usual equivalence.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{ComplexField, Cx, Scalar};
use crate::signal::{ExpPolyTerm, TimeGrid, TimeSignal};

/// Eigenvalue branch of a mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Parabolic,
    Hyperbolic,
    Jordan,
}

/// One adjoint basis vector φ_k with its spectral data.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenmode<T> {
    /// Unique integer label.
    pub index: i64,
    /// Eigenvalue μ_k of A*.
    pub eigenvalue: Cx<T>,
    /// Control trace b_k = B*φ_k ∈ U.
    pub control_trace: Vec<Cx<T>>,
    pub branch: Branch,
    /// For the head of a Jordan chain: the member indices in order, starting
    /// with the eigenvector itself. `None` for diagonal modes and chain tails.
    pub chain: Option<Vec<i64>>,
}

impl<T: Scalar> Eigenmode<T> {
    pub fn diagonal(index: i64, eigenvalue: Cx<T>, trace: Vec<Cx<T>>, branch: Branch) -> Self {
        Eigenmode {
            index,
            eigenvalue,
            control_trace: trace,
            branch,
            chain: None,
        }
    }
}

/// Which basis a coefficient vector refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Coefficients against the primal modes z_k.
    Primal,
    /// Coefficients against the adjoint modes φ_k.
    Adjoint,
}

/// Conventions every pairing in the toolkit follows. Fixed once here so sign
/// and conjugation questions have a single answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualityConvention {
    /// ⟨z, φ⟩ is linear in the primal slot z.
    pub linear_in_first_slot: bool,
    /// ⟨z, φ⟩ is anti-linear in the adjoint slot φ.
    pub antilinear_in_second_slot: bool,
    /// The biorthogonal primal mode satisfies A z_k = conj(μ_k) z_k.
    pub primal_eigenvalue_conjugated: bool,
}

impl Default for DualityConvention {
    fn default() -> Self {
        DualityConvention {
            linear_in_first_slot: true,
            antilinear_in_second_slot: true,
            primal_eigenvalue_conjugated: true,
        }
    }
}

/// Coefficient vector against one of the two biorthogonal families, together
/// with its tower index N ∈ ℤ.
#[derive(Debug, Clone, PartialEq)]
pub struct TowerVector<T> {
    coefficients: BTreeMap<i64, Cx<T>>,
    pub tower_index: i32,
    pub side: Side,
}

impl<T: Scalar> TowerVector<T> {
    pub fn zero(side: Side, tower_index: i32) -> Self {
        TowerVector {
            coefficients: BTreeMap::new(),
            tower_index,
            side,
        }
    }

    pub fn single(index: i64, value: Cx<T>, side: Side, tower_index: i32) -> Self {
        let mut v = Self::zero(side, tower_index);
        v.set(index, value);
        v
    }

    pub fn from_pairs(
        pairs: impl IntoIterator<Item = (i64, Cx<T>)>,
        side: Side,
        tower_index: i32,
    ) -> Self {
        let mut v = Self::zero(side, tower_index);
        for (k, c) in pairs {
            v.set(k, c);
        }
        v
    }

    pub fn set(&mut self, index: i64, value: Cx<T>) {
        self.coefficients.insert(index, value);
    }

    pub fn get(&self, index: i64) -> Cx<T> {
        self.coefficients
            .get(&index)
            .copied()
            .unwrap_or_else(|| Cx::from(T::zero()))
    }

    /// Deterministic (index-ordered) iteration; all reductions in the crate
    /// run in this order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Cx<T>)> + '_ {
        self.coefficients.iter().map(|(k, v)| (*k, *v))
    }

    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        self.coefficients.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn scaled(&self, factor: Cx<T>) -> Self {
        let mut out = self.clone();
        for v in out.coefficients.values_mut() {
            *v *= factor;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.side, other.side);
        let mut out = self.clone();
        for (k, v) in other.iter() {
            let cur = out.get(k);
            out.set(k, cur + v);
        }
        out
    }

    /// Re-tag the vector at a different tower index (the coefficients are the
    /// same; only the norm changes).
    pub fn at_index(&self, tower_index: i32) -> Self {
        let mut out = self.clone();
        out.tower_index = tower_index;
        out
    }
}

/// Anti-dual pairing ⟨z, φ⟩ of a primal coefficient vector against an adjoint
/// one: linear in `primal`, anti-linear in `adjoint` (biorthogonality exact).
pub fn pair_vectors<T: Scalar>(primal: &TowerVector<T>, adjoint: &TowerVector<T>) -> Cx<T> {
    debug_assert_eq!(primal.side, Side::Primal);
    debug_assert_eq!(adjoint.side, Side::Adjoint);
    let mut total = Cx::from(T::zero());
    for (k, a) in primal.iter() {
        let c = adjoint.get(k);
        total += a * c.conj();
    }
    total
}

/// Pivot inner product of two same-side coefficient vectors (X-inner product
/// with the basis treated as orthonormal).
pub fn x_inner<T: Scalar>(a: &TowerVector<T>, b: &TowerVector<T>) -> Cx<T> {
    debug_assert_eq!(a.side, b.side);
    let mut total = Cx::from(T::zero());
    for (k, av) in a.iter() {
        total += av * b.get(k).conj();
    }
    total
}

/// A block of the spectral decomposition: a singleton mode or a full Jordan
/// chain (member indices in chain order).
#[derive(Debug, Clone)]
struct Block {
    indices: Vec<i64>,
}

/// Diagonal-plus-Jordan representation of Σ(A, B).
#[derive(Debug, Clone)]
pub struct SpectralSystem<T> {
    modes: Vec<Eigenmode<T>>,
    position: BTreeMap<i64, usize>,
    blocks: Vec<Block>,
    pub growth_bound: T,
    pub input_dim: usize,
    pub time_horizon_default: T,
    convention: DualityConvention,
}

pub const MAX_JORDAN_CHAIN: usize = 4;

impl<T: Scalar> SpectralSystem<T> {
    pub fn new(
        modes: Vec<Eigenmode<T>>,
        growth_bound: T,
        input_dim: usize,
        time_horizon_default: T,
    ) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::invalid("input dimension must be positive"));
        }
        if time_horizon_default <= T::zero() {
            return Err(Error::invalid("default horizon must be positive"));
        }
        let mut position = BTreeMap::new();
        for (i, m) in modes.iter().enumerate() {
            if position.insert(m.index, i).is_some() {
                return Err(Error::invalid(format!("duplicate mode index {}", m.index)));
            }
            if m.control_trace.len() != input_dim {
                return Err(Error::dim(format!(
                    "mode {} trace has dim {}, system has {}",
                    m.index,
                    m.control_trace.len(),
                    input_dim
                )));
            }
            if m.eigenvalue.re > growth_bound + T::default_epsilon().sqrt() {
                return Err(Error::invalid(format!(
                    "mode {} violates the growth bound",
                    m.index
                )));
            }
            if !m
                .control_trace
                .iter()
                .all(|b| b.re.is_finite() && b.im.is_finite())
            {
                return Err(Error::invalid(format!("mode {} trace not finite", m.index)));
            }
        }
        // assemble blocks: chains first, then remaining singletons
        let mut in_chain: BTreeMap<i64, ()> = BTreeMap::new();
        let mut blocks = Vec::new();
        for m in &modes {
            if let Some(chain) = &m.chain {
                if chain.is_empty() || chain.len() > MAX_JORDAN_CHAIN {
                    return Err(Error::invalid(format!(
                        "chain at mode {} must have length 1..={MAX_JORDAN_CHAIN}",
                        m.index
                    )));
                }
                if chain[0] != m.index {
                    return Err(Error::invalid(format!(
                        "chain head {} must list itself first",
                        m.index
                    )));
                }
                for &k in chain {
                    let pos = *position
                        .get(&k)
                        .ok_or_else(|| Error::invalid(format!("chain member {k} missing")))?;
                    let member = &modes[pos];
                    if member.branch != Branch::Jordan {
                        return Err(Error::invalid(format!(
                            "chain member {k} must be tagged jordan"
                        )));
                    }
                    if (member.eigenvalue - m.eigenvalue).modulus() > T::default_epsilon().sqrt() {
                        return Err(Error::invalid(format!(
                            "chain member {k} eigenvalue differs from head"
                        )));
                    }
                    if in_chain.insert(k, ()).is_some() {
                        return Err(Error::invalid(format!("mode {k} in two chains")));
                    }
                }
                blocks.push(Block {
                    indices: chain.clone(),
                });
            }
        }
        for m in &modes {
            if m.branch == Branch::Jordan && !in_chain.contains_key(&m.index) {
                return Err(Error::invalid(format!(
                    "jordan mode {} belongs to no chain",
                    m.index
                )));
            }
            if !in_chain.contains_key(&m.index) {
                blocks.push(Block {
                    indices: vec![m.index],
                });
            }
        }
        blocks.sort_by_key(|b| b.indices[0]);
        Ok(SpectralSystem {
            modes,
            position,
            blocks,
            growth_bound,
            input_dim,
            time_horizon_default,
            convention: DualityConvention::default(),
        })
    }

    pub fn convention(&self) -> &DualityConvention {
        &self.convention
    }

    pub fn modes(&self) -> &[Eigenmode<T>] {
        &self.modes
    }

    pub fn mode(&self, index: i64) -> Result<&Eigenmode<T>> {
        self.position
            .get(&index)
            .map(|&i| &self.modes[i])
            .ok_or_else(|| Error::invalid(format!("unknown mode index {index}")))
    }

    pub fn mode_indices(&self) -> impl Iterator<Item = i64> + '_ {
        self.position.keys().copied()
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    /// Tower weight w_k(N) of one mode.
    pub fn tower_weight(&self, index: i64, n: i32) -> Result<T> {
        let mu2 = self.mode(index)?.eigenvalue.modulus_squared();
        let mut sum = T::one();
        let mut pow = T::one();
        for _ in 1..=n.unsigned_abs() {
            pow *= mu2;
            sum += pow;
        }
        Ok(if n >= 0 { sum } else { sum.recip() })
    }

    /// Weighted coefficient norm of `v` at its own tower index.
    pub fn tower_norm(&self, v: &TowerVector<T>) -> Result<T> {
        self.tower_norm_at(v, v.tower_index)
    }

    /// Weighted coefficient norm of `v` measured at tower index `n`.
    pub fn tower_norm_at(&self, v: &TowerVector<T>, n: i32) -> Result<T> {
        let mut total = T::zero();
        for (k, a) in v.iter() {
            total += a.modulus_squared() * self.tower_weight(k, n)?;
        }
        Ok(total.max(T::zero()).sqrt())
    }

    /// Semigroup action at time `t ≥ 0`. Adjoint side: coefficients pick up
    /// `e^{μ_k t}` (Jordan chains act by their polynomial-exponential block);
    /// primal side: `e^{conj(μ_k) t}`. The tower index is unchanged.
    pub fn apply_semigroup(&self, t: T, v: &TowerVector<T>) -> Result<TowerVector<T>> {
        if t < T::zero() {
            return Err(Error::NegativeTime { t: t.as_f64() });
        }
        let mut out = TowerVector::zero(v.side, v.tower_index);
        for block in &self.blocks {
            if !block.indices.iter().any(|k| v.get(*k).modulus_squared() > T::zero()) {
                continue;
            }
            let mu = self.mode(block.indices[0])?.eigenvalue;
            let rate = match v.side {
                Side::Adjoint => mu,
                Side::Primal => mu.conj(),
            };
            let growth = (rate * t).exp();
            let m = block.indices.len();
            if m == 1 {
                let k = block.indices[0];
                out.set(k, v.get(k) * growth);
                continue;
            }
            // t^d / d! for d = 0..m
            let mut tpow = vec![T::one(); m];
            for d in 1..m {
                tpow[d] = tpow[d - 1] * t / T::from_usize_(d);
            }
            for slot in 0..m {
                let mut acc = Cx::from(T::zero());
                match v.side {
                    // A*φ_j = μ φ_j + φ_{j-1}: coefficient i receives from j ≥ i
                    Side::Adjoint => {
                        for j in slot..m {
                            acc += v.get(block.indices[j]) * Cx::from(tpow[j - slot]);
                        }
                    }
                    // transpose action keeps ⟨S_t z, φ⟩ = ⟨z, S_t* φ⟩ exact
                    Side::Primal => {
                        for i in 0..=slot {
                            acc += v.get(block.indices[i]) * Cx::from(tpow[slot - i]);
                        }
                    }
                }
                if acc.modulus_squared() > T::zero() {
                    out.set(block.indices[slot], acc * growth);
                }
            }
        }
        Ok(out)
    }

    /// The output signal t ↦ B*S_t*φ of an adjoint vector, as an exact
    /// exponential-polynomial signal sampled on `grid`.
    pub fn output_trajectory(
        &self,
        phi: &TowerVector<T>,
        grid: &TimeGrid<T>,
    ) -> Result<TimeSignal<T>> {
        if phi.side != Side::Adjoint {
            return Err(Error::invalid("output trajectory needs an adjoint vector"));
        }
        if phi.tower_index < 1 {
            return Err(Error::invalid(
                "output trajectory needs tower index >= 1 so B* applies mode-wise",
            ));
        }
        let terms = self.output_terms(phi)?;
        TimeSignal::from_exp_terms(grid.horizon, self.input_dim, terms, grid.n)
    }

    /// Closed-form terms of t ↦ B*S_t*φ.
    pub(crate) fn output_terms(&self, phi: &TowerVector<T>) -> Result<Vec<ExpPolyTerm<T>>> {
        let mut terms: Vec<ExpPolyTerm<T>> = Vec::new();
        for block in &self.blocks {
            if !block.indices.iter().any(|k| phi.get(*k).modulus_squared() > T::zero()) {
                continue;
            }
            let mu = self.mode(block.indices[0])?.eigenvalue;
            let m = block.indices.len();
            // B*S_t*φ = Σ_i b_i (S_t*φ)_i with
            // (S_t*φ)_i = e^{μt} Σ_{j≥i} c_j t^{j-i}/(j-i)!
            for i in 0..m {
                let b = &self.mode(block.indices[i])?.control_trace;
                for j in i..m {
                    let c = phi.get(block.indices[j]);
                    if c.modulus_squared() == T::zero() {
                        continue;
                    }
                    let inv_fact = Cx::from(crate::scalar::factorial::<T>(j - i).recip());
                    terms.push(ExpPolyTerm {
                        rate: mu,
                        power: (j - i) as u32,
                        amp: b.iter().map(|bi| *bi * c * inv_fact).collect(),
                        shift: T::zero(),
                    });
                }
            }
        }
        if terms.is_empty() {
            terms.push(ExpPolyTerm {
                rate: Cx::from(T::zero()),
                power: 0,
                amp: vec![Cx::from(T::zero()); self.input_dim],
                shift: T::zero(),
            });
        }
        Ok(terms)
    }

    /// Apply B* to an adjoint vector: Σ_k c_k b_k.
    pub fn control_trace_of(&self, phi: &TowerVector<T>) -> Result<Vec<Cx<T>>> {
        let mut out = vec![Cx::from(T::zero()); self.input_dim];
        for (k, c) in phi.iter() {
            let b = &self.mode(k)?.control_trace;
            for (o, bi) in out.iter_mut().zip(b) {
                *o += *bi * c;
            }
        }
        Ok(out)
    }

    /// Restriction to the hyperbolic branch (coefficient projection; both
    /// sides). Idempotent and commuting with the semigroup.
    pub fn project_hyperbolic(&self, v: &TowerVector<T>) -> Result<TowerVector<T>> {
        let mut out = TowerVector::zero(v.side, v.tower_index);
        for (k, a) in v.iter() {
            if self.mode(k)?.branch == Branch::Hyperbolic {
                out.set(k, a);
            }
        }
        Ok(out)
    }

    /// Restriction to an arbitrary mode set.
    pub fn project_modes(&self, v: &TowerVector<T>, keep: &[i64]) -> TowerVector<T> {
        let mut out = TowerVector::zero(v.side, v.tower_index);
        for (k, a) in v.iter() {
            if keep.contains(&k) {
                out.set(k, a);
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// JSON document
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ModeDoc<T> {
    index: i64,
    re: T,
    im: T,
    b_re: Vec<T>,
    b_im: Vec<T>,
    branch: Branch,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    chain: Option<Vec<i64>>,
}

#[derive(Serialize, Deserialize)]
struct SystemDoc<T> {
    growth_bound: T,
    input_dim: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    time_horizon_default: Option<T>,
    modes: Vec<ModeDoc<T>>,
}

impl<T: Scalar> SpectralSystem<T> {
    pub fn to_json(&self) -> Result<String> {
        let doc = SystemDoc {
            growth_bound: self.growth_bound,
            input_dim: self.input_dim,
            time_horizon_default: Some(self.time_horizon_default),
            modes: self
                .modes
                .iter()
                .map(|m| ModeDoc {
                    index: m.index,
                    re: m.eigenvalue.re,
                    im: m.eigenvalue.im,
                    b_re: m.control_trace.iter().map(|b| b.re).collect(),
                    b_im: m.control_trace.iter().map(|b| b.im).collect(),
                    branch: m.branch,
                    chain: m.chain.clone(),
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let doc: SystemDoc<T> = serde_json::from_str(json)?;
        let modes = doc
            .modes
            .into_iter()
            .map(|m| {
                if m.b_re.len() != m.b_im.len() {
                    return Err(Error::dim("b_re/b_im length mismatch"));
                }
                Ok(Eigenmode {
                    index: m.index,
                    eigenvalue: Cx::new(m.re, m.im),
                    control_trace: m
                        .b_re
                        .iter()
                        .zip(&m.b_im)
                        .map(|(r, i)| Cx::new(*r, *i))
                        .collect(),
                    branch: m.branch,
                    chain: m.chain,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        SpectralSystem::new(
            modes,
            doc.growth_bound,
            doc.input_dim,
            doc.time_horizon_default.unwrap_or_else(T::one),
        )
    }
}
