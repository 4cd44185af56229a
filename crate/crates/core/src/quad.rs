//! Composite Gauss–Legendre quadrature with breakpoint splitting.
//!
//! All time integrals in the toolkit go through [`integrate`]: panels are cut
//! at caller-supplied breakpoints (atom locations, singular points of the
//! pathological density) so the rule never straddles a kink.

use crate::scalar::{Cx, Scalar};

/// Quadrature configuration. `panels` is the number of uniform panels per
/// smooth piece, `nodes` the Gauss–Legendre order per panel.
#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    pub panels: usize,
    pub nodes: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            panels: 64,
            nodes: 12,
        }
    }
}

impl QuadConfig {
    pub fn new(panels: usize, nodes: usize) -> Self {
        QuadConfig { panels, nodes }
    }
}

/// Gauss–Legendre nodes and weights on (-1, 1), by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre<T: Scalar>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1);
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = T::from_usize_(n);
    for i in 0..n {
        // Chebyshev-like initial guess
        let theta = T::pi() * (T::from_usize_(i) + T::lit(0.75)) / (nf + T::lit(0.5));
        let mut x = theta.cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < T::default_epsilon() * T::lit(4.0) {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
    }
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

fn legendre_and_derivative<T: Scalar>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = T::from_usize_(k);
        let p2 = ((T::lit(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = T::from_usize_(n) * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// Integrate a complex-valued function over `[a, b]`, splitting at the given
/// breakpoints. Breakpoints outside `(a, b)` are ignored.
pub fn integrate<T: Scalar>(
    f: impl Fn(T) -> Cx<T>,
    a: T,
    b: T,
    breakpoints: &[T],
    cfg: &QuadConfig,
) -> Cx<T> {
    if b <= a {
        return Cx::from(T::zero());
    }
    let mut cuts: Vec<T> = vec![a, b];
    for &p in breakpoints {
        if p > a && p < b {
            cuts.push(p);
        }
    }
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup_by(|x, y| (*x - *y).abs() < T::default_epsilon());

    let (nodes, weights) = gauss_legendre::<T>(cfg.nodes);
    let mut total = Cx::from(T::zero());
    for piece in cuts.windows(2) {
        let (lo, hi) = (piece[0], piece[1]);
        // spread the configured panel budget across pieces proportionally,
        // at least one panel each
        let frac = (hi - lo) / (b - a);
        let n_panels = ((T::from_usize_(cfg.panels) * frac).ceil().as_f64() as usize).max(1);
        let h = (hi - lo) / T::from_usize_(n_panels);
        for p in 0..n_panels {
            let x0 = lo + h * T::from_usize_(p);
            let mid = x0 + h * T::lit(0.5);
            let half = h * T::lit(0.5);
            for (x, w) in nodes.iter().zip(&weights) {
                total += f(mid + half * *x) * Cx::from(*w * half);
            }
        }
    }
    total
}
