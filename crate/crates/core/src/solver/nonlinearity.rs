use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Grid used to spot-check user-supplied nonlinearities.
const CHECK_LO: f64 = -20.0;
const CHECK_HI: f64 = 5.0;
const CHECK_POINTS: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonlinearityKind {
    Exponential,
    ConvexCustom,
}

/// The reaction term `F` in `Lap u + F(u) = 0`, with its derivative.
#[derive(Clone)]
pub struct Nonlinearity {
    kind: NonlinearityKind,
    name: String,
    eval: ScalarFn,
    deriv: ScalarFn,
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Nonlinearity").field("kind", &self.kind).field("name", &self.name).finish()
    }
}

impl Nonlinearity {
    pub fn exponential() -> Self {
        Self {
            kind: NonlinearityKind::Exponential,
            name: "exp".into(),
            eval: Arc::new(f64::exp),
            deriv: Arc::new(f64::exp),
        }
    }

    /// `F = 0`; turns the problem into a discrete harmonic extension.
    pub fn zero() -> Self {
        Self::convex_custom("zero", |_| 0.0, |_| 0.0).expect("zero is admissible")
    }

    /// A user nonlinearity that must be nonnegative, nondecreasing and
    /// convex. The conditions are spot-checked on a grid over `[-20, 5]`
    /// (secant slopes nondecreasing and bracketed by the supplied
    /// derivative), so a pathological `F` can still slip through.
    pub fn convex_custom<F, D>(name: impl Into<String>, eval: F, deriv: D) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let name = name.into();
        let xs: Vec<f64> = (0..CHECK_POINTS)
            .map(|k| CHECK_LO + (CHECK_HI - CHECK_LO) * k as f64 / (CHECK_POINTS - 1) as f64)
            .collect();
        let fs: Vec<f64> = xs.iter().map(|&x| eval(x)).collect();
        let ds: Vec<f64> = xs.iter().map(|&x| deriv(x)).collect();
        let reject = |why: String| Err(Error::domain(format!("nonlinearity {name}: {why}")));

        for (k, &x) in xs.iter().enumerate() {
            if !(fs[k].is_finite() && ds[k].is_finite()) {
                return reject(format!("not finite at {x}"));
            }
            if fs[k] < 0.0 {
                return reject(format!("F({x}) = {} is negative", fs[k]));
            }
            if ds[k] < 0.0 {
                return reject(format!("F'({x}) = {} is negative", ds[k]));
            }
        }
        let slopes: Vec<f64> = (1..xs.len()).map(|k| (fs[k] - fs[k - 1]) / (xs[k] - xs[k - 1])).collect();
        let slack = |a: f64, b: f64| 1e-9 * (1.0 + a.abs().max(b.abs()));
        for k in 1..slopes.len() {
            if slopes[k] < slopes[k - 1] - slack(slopes[k], slopes[k - 1]) {
                return reject(format!("secant slopes decrease near {}", xs[k]));
            }
        }
        // convexity puts each secant slope between the endpoint derivatives
        let dtol = 1e-6;
        for (k, &s) in slopes.iter().enumerate() {
            let (lo, hi) = (ds[k], ds[k + 1]);
            if s < lo - dtol * (1.0 + lo.abs()) || s > hi + dtol * (1.0 + hi.abs()) {
                return reject(format!("derivative inconsistent with F on [{}, {}]", xs[k], xs[k + 1]));
            }
        }

        Ok(Self { kind: NonlinearityKind::ConvexCustom, name, eval: Arc::new(eval), deriv: Arc::new(deriv) })
    }

    pub fn kind(&self) -> NonlinearityKind {
        self.kind
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    #[inline]
    pub fn deriv(&self, x: f64) -> f64 {
        (self.deriv)(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_matches_exp() {
        let f = Nonlinearity::exponential();
        assert_eq!(f.kind(), NonlinearityKind::Exponential);
        for x in [-3.0, 0.0, 1.5] {
            assert_eq!(f.eval(x), x.exp());
            assert_eq!(f.deriv(x), x.exp());
        }
    }

    #[test]
    fn accepts_convex_increasing() {
        assert!(Nonlinearity::convex_custom("softplus", |x: f64| x.exp().ln_1p(), |x: f64| 1.0 / (1.0 + (-x).exp()))
            .is_ok());
        assert!(Nonlinearity::convex_custom("e2u", |x: f64| (2.0 * x).exp(), |x: f64| 2.0 * (2.0 * x).exp()).is_ok());
        assert_eq!(Nonlinearity::zero().eval(3.0), 0.0);
    }

    #[test]
    fn rejects_violations() {
        // negative somewhere
        assert!(Nonlinearity::convex_custom("lin", |x| x, |_| 1.0).is_err());
        // decreasing
        assert!(Nonlinearity::convex_custom("dec", |x: f64| (-x).exp(), |x: f64| -(-x).exp()).is_err());
        // concave
        assert!(Nonlinearity::convex_custom("atan", |x: f64| x.atan() + 2.0, |x: f64| 1.0 / (1.0 + x * x)).is_err());
        // wrong derivative
        assert!(Nonlinearity::convex_custom("bad-deriv", f64::exp, |_| 0.0).is_err());
    }
}
