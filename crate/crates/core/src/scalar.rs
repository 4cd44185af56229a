//! Scalar abstraction: all numerics are generic over the real field.
//!
//! Complex arithmetic goes through [`nalgebra::ComplexField`] so the same
//! code runs at `f32` and `f64` precision. Tolerances in the test suites are
//! stated for `f64`; the `f32` instantiation is exercised for API coverage
//! only.

use num_traits::{FromPrimitive, ToPrimitive};
use serde::{de::DeserializeOwned, Serialize};

pub use nalgebra::{Complex, ComplexField, RealField};

/// Real scalar type backing every computation (`f32` or `f64`).
pub trait Scalar:
    RealField + FromPrimitive + ToPrimitive + Copy + Default + Serialize + DeserializeOwned
{
    /// Lossy conversion from `f64`, for literals and tolerances.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn from_usize_(n: usize) -> Self {
        Self::from_usize(n).expect("usize fits scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar fits f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Shorthand for the complex field over `T`.
pub type Cx<T> = Complex<T>;

/// Complex number from real parts given as `f64` literals.
pub fn cx<T: Scalar>(re: f64, im: f64) -> Cx<T> {
    Complex::new(T::lit(re), T::lit(im))
}

/// `∫_0^T e^{z t} dt`, with a series fallback near `z = 0` where the closed
/// form `(e^{zT} - 1)/z` cancels.
pub fn exp_integral_0t<T: Scalar>(z: Cx<T>, horizon: T) -> Cx<T> {
    let zt = z * horizon.clone();
    if zt.modulus() < T::lit(1e-3) {
        // T * (1 + zT/2 + (zT)^2/6 + ...)
        let mut term = Cx::from(horizon);
        let mut sum = term;
        for n in 1..12u32 {
            term = term * zt / Cx::from(T::from_u32(n + 1).unwrap());
            sum += term;
        }
        sum
    } else {
        (zt.exp() - Cx::from(T::one())) / z
    }
}

/// `I_n(z) = ∫_0^T t^n e^{z t} dt` for `n = 0..=n_max` (closed-form recursion
/// with a series fallback for small `|zT|`).
pub fn power_exp_integrals_0t<T: Scalar>(z: Cx<T>, horizon: T, n_max: usize) -> Vec<Cx<T>> {
    let mut out = Vec::with_capacity(n_max + 1);
    let zt = z * horizon;
    if zt.modulus() < T::lit(0.5) {
        // I_n = Σ_m z^m T^{n+m+1} / (m! (n+m+1)), truncated; |zT| < 1/2 makes
        // the tail geometric.
        for n in 0..=n_max {
            let mut sum = Cx::from(T::zero());
            let mut zpow_over_fact = Cx::from(T::one());
            let mut tpow = ComplexField::powi(Cx::from(horizon), n as i32 + 1);
            for m in 0..40usize {
                let denom = T::from_usize_(n + m + 1);
                sum += zpow_over_fact * tpow / Cx::from(denom);
                zpow_over_fact = zpow_over_fact * z / Cx::from(T::from_usize_(m + 1));
                tpow *= Cx::from(horizon);
                if zpow_over_fact.modulus() * tpow.modulus() < T::lit(1e-30) {
                    break;
                }
            }
            out.push(sum);
        }
    } else {
        let ezt = zt.exp();
        out.push((ezt - Cx::from(T::one())) / z);
        let mut tpow = Cx::from(horizon);
        for n in 1..=n_max {
            let prev = out[n - 1];
            let val = (tpow * ezt - Cx::from(T::from_usize_(n)) * prev) / z;
            out.push(val);
            tpow *= Cx::from(horizon);
        }
    }
    out
}

pub fn factorial<T: Scalar>(n: usize) -> T {
    let mut f = T::one();
    for k in 2..=n {
        f *= T::from_usize_(k);
    }
    f
}
