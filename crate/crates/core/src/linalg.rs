//! Dense complex linear algebra helpers on top of nalgebra.
//!
//! Rank-sensitive factorizations go through a one-sided Jacobi SVD: the
//! bidiagonalization SVD shipped with nalgebra mis-factors exactly
//! rank-deficient complex matrices, while Jacobi sweeps keep high relative
//! accuracy on the small dense problems this crate produces.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::{ComplexField, Cx, Scalar};

/// Thin SVD `M = U diag(σ) V^H` with σ descending. For wide matrices only
/// `min(m, n)` columns of V are produced.
#[derive(Debug, Clone)]
pub struct JacobiSvd<T> {
    pub u: DMatrix<Cx<T>>,
    pub sigma: Vec<T>,
    pub v: DMatrix<Cx<T>>,
}

/// One-sided Jacobi SVD (Hestenes): orthogonalize column pairs by complex
/// plane rotations until the column Gram is diagonal.
pub fn jacobi_svd<T: Scalar>(m: &DMatrix<Cx<T>>) -> JacobiSvd<T> {
    if m.nrows() < m.ncols() {
        let s = jacobi_svd(&m.adjoint());
        return JacobiSvd {
            u: s.v,
            sigma: s.sigma,
            v: s.u,
        };
    }
    let mut a = m.clone();
    let n = a.ncols();
    let mut v = DMatrix::<Cx<T>>::identity(n, n);
    let tol = T::default_epsilon() * T::lit(8.0);
    let col_dot = |a: &DMatrix<Cx<T>>, p: usize, q: usize| -> Cx<T> {
        let mut acc = Cx::from(T::zero());
        for r in 0..a.nrows() {
            acc += a[(r, p)].conj() * a[(r, q)];
        }
        acc
    };
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let hpp = col_dot(&a, p, p).re;
                let hqq = col_dot(&a, q, q).re;
                let hpq = col_dot(&a, p, q);
                let mag = hpq.modulus();
                if mag <= tol * (hpp * hqq).sqrt() || mag == T::zero() {
                    continue;
                }
                rotated = true;
                // phase column q so the coupling becomes real, then rotate
                let phase = hpq / Cx::from(mag);
                let tau = (hqq - hpp) / (mag + mag);
                let t = {
                    let sign = if tau >= T::zero() { T::one() } else { -T::one() };
                    sign / (tau.abs() + (T::one() + tau * tau).sqrt())
                };
                let c = (T::one() + t * t).sqrt().recip();
                let s = c * t;
                for r in 0..a.nrows() {
                    let xp = a[(r, p)];
                    let xq = a[(r, q)] * phase.conj();
                    a[(r, p)] = xp * Cx::from(c) - xq * Cx::from(s);
                    a[(r, q)] = xp * Cx::from(s) + xq * Cx::from(c);
                }
                for r in 0..n {
                    let vp = v[(r, p)];
                    let vq = v[(r, q)] * phase.conj();
                    v[(r, p)] = vp * Cx::from(c) - vq * Cx::from(s);
                    v[(r, q)] = vp * Cx::from(s) + vq * Cx::from(c);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    // singular values are the column norms; sort descending
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<T> = (0..n).map(|j| col_dot(&a, j, j).re.max(T::zero()).sqrt()).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());
    let mut u = DMatrix::<Cx<T>>::zeros(a.nrows(), n);
    let mut vv = DMatrix::<Cx<T>>::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let s = norms[src];
        sigma.push(s);
        if s > T::zero() {
            for r in 0..a.nrows() {
                u[(r, dst)] = a[(r, src)] / Cx::from(s);
            }
        }
        for r in 0..n {
            vv[(r, dst)] = v[(r, src)];
        }
    }
    JacobiSvd { u, sigma, v: vv }
}

/// Largest eigenvalue of a Hermitian matrix (symmetric eigendecomposition).
pub fn hermitian_max_eig<T: Scalar>(m: &DMatrix<Cx<T>>) -> T {
    debug_assert_eq!(m.nrows(), m.ncols());
    if m.nrows() == 0 {
        return T::zero();
    }
    let eig = m.clone().symmetric_eigen();
    eig.eigenvalues
        .iter()
        .copied()
        .fold(T::zero() - T::one() / T::default_epsilon(), |a, b| a.max(b))
}

/// max over x ≠ 0 of (x^H A x)/(x^H G x) for Hermitian A ≥ 0 and Hermitian
/// G ≥ 0. Directions where G (numerically) vanishes are excluded; if G
/// vanishes identically the ratio is reported as degenerate.
pub fn generalized_rayleigh_max<T: Scalar>(
    a: &DMatrix<Cx<T>>,
    g: &DMatrix<Cx<T>>,
) -> Result<T> {
    let n = a.nrows();
    if n == 0 || g.nrows() != n {
        return Err(Error::dim("rayleigh pencil dimensions"));
    }
    let eig = g.clone().symmetric_eigen();
    let lam_max = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(T::zero(), |x, y| x.max(y));
    if lam_max <= T::zero() {
        return Err(Error::DegenerateOutput);
    }
    let tol = lam_max * T::default_epsilon() * T::from_usize_(n * 16);
    // columns of the admissible subspace, scaled by λ^{-1/2}
    let cols: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > tol).collect();
    if cols.is_empty() {
        return Err(Error::DegenerateOutput);
    }
    let mut basis = DMatrix::<Cx<T>>::zeros(n, cols.len());
    for (j, &i) in cols.iter().enumerate() {
        let scale = Cx::from(eig.eigenvalues[i].sqrt().recip());
        for r in 0..n {
            basis[(r, j)] = eig.eigenvectors[(r, i)] * scale;
        }
    }
    let reduced = basis.adjoint() * a * &basis;
    Ok(hermitian_max_eig(&reduced).max(T::zero()))
}

/// Right-singular vector of least singular value, with that value. Wide
/// matrices (more columns than rows) always have a genuine nullspace, which
/// is completed by Gram-Schmidt against the computed right factors.
pub fn least_singular_direction<T: Scalar>(m: &DMatrix<Cx<T>>) -> Result<(Vec<Cx<T>>, T)> {
    let cols = m.ncols();
    if cols == 0 {
        return Err(Error::dim("empty matrix"));
    }
    let svd = jacobi_svd(m);
    if svd.v.ncols() < cols {
        let mut candidate = vec![Cx::from(T::zero()); cols];
        // find a unit vector with a component outside span(columns of V)
        for trial in 0..cols {
            let mut v: Vec<Cx<T>> = (0..cols)
                .map(|i| {
                    if i == trial {
                        Cx::from(T::one())
                    } else {
                        Cx::from(T::zero())
                    }
                })
                .collect();
            for j in 0..svd.v.ncols() {
                let col: Vec<Cx<T>> = (0..cols).map(|r| svd.v[(r, j)]).collect();
                let proj: Cx<T> = v
                    .iter()
                    .zip(&col)
                    .map(|(x, y)| y.conj() * *x)
                    .fold(Cx::from(T::zero()), |a, b| a + b);
                for (x, y) in v.iter_mut().zip(&col) {
                    *x -= proj * *y;
                }
            }
            let norm = v
                .iter()
                .map(|z| z.modulus_squared())
                .fold(T::zero(), |a, b| a + b)
                .sqrt();
            if norm > T::lit(1e-8) {
                for x in v.iter_mut() {
                    *x /= Cx::from(norm);
                }
                candidate = v;
                break;
            }
        }
        return Ok((candidate, T::zero()));
    }
    let last = svd.sigma.len() - 1;
    let v: Vec<Cx<T>> = (0..cols).map(|r| svd.v[(r, last)]).collect();
    Ok((v, svd.sigma[last]))
}

/// Hermitian positive-semidefinite solve `G x = rhs` with a condition
/// estimate; fails as singular when the spectrum spans more than `1/tol`.
pub fn psd_solve<T: Scalar>(
    g: &DMatrix<Cx<T>>,
    rhs: &[Cx<T>],
    tol: T,
) -> Result<(Vec<Cx<T>>, T)> {
    let n = g.nrows();
    let eig = g.clone().symmetric_eigen();
    let lam_max = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(T::zero(), |a, b| a.max(b));
    let lam_min = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(lam_max, |a, b| a.min(b));
    let cond = if lam_min > T::zero() {
        lam_max / lam_min
    } else {
        T::one() / T::default_epsilon() / T::default_epsilon()
    };
    if lam_max <= T::zero() || lam_min <= lam_max * tol {
        return Err(Error::SingularGramian {
            cond: cond.as_f64(),
        });
    }
    let r = nalgebra::DVector::from_column_slice(rhs);
    let coeffs = eig.eigenvectors.adjoint() * r;
    let mut x = nalgebra::DVector::<Cx<T>>::zeros(n);
    for i in 0..n {
        x += eig.eigenvectors.column(i) * (coeffs[i] / Cx::from(eig.eigenvalues[i]));
    }
    Ok((x.iter().copied().collect(), cond))
}
