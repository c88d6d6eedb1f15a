//! Second-order forward-mode automatic differentiation.
//!
//! A [`Jet2`] carries the value of a scalar field together with its gradient
//! and Hessian at a single point of a `D`-dimensional chart. Elementary
//! operations propagate all three exactly (up to roundoff) by the chain and
//! product rules truncated at second order.
//!
//! The chart dimension is a const parameter, so two jets over different
//! charts cannot be combined: the mismatch is rejected at compile time.
//! Complex jets ([`ComplexJet2`]) use the same machinery with a complex
//! scalar while the chart coordinates stay real.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("variable index {index} out of range for a {dim}-dimensional chart")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("{op}: argument {value} is outside the domain")]
    Domain { op: &'static str, value: String },
    #[error("{op} expects {expected} argument(s), got {got}")]
    Arity {
        op: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("hessian is not symmetric at ({i}, {j})")]
    NonSymmetricHessian { i: usize, j: usize },
}

/// Field over which jets are built: `f64` or `Complex64`.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(x: f64) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn powf(self, r: f64) -> Self;
    fn magnitude(self) -> f64;
    fn is_zero(self) -> bool;
    /// Whether `ln` is defined (real: strictly positive; complex: nonzero).
    fn ln_defined(self) -> bool;
    /// Whether `self^r` and its first two derivatives are finite.
    fn pow_defined(self, r: f64) -> bool;
}

fn is_integer(r: f64) -> bool {
    r.is_finite() && r.fract() == 0.0
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn powf(self, r: f64) -> Self {
        f64::powf(self, r)
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
    fn is_zero(self) -> bool {
        self == 0.0
    }
    fn ln_defined(self) -> bool {
        self > 0.0
    }
    fn pow_defined(self, r: f64) -> bool {
        self > 0.0 || (is_integer(r) && (self != 0.0 || r >= 0.0))
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn exp(self) -> Self {
        Complex64::exp(self)
    }
    fn ln(self) -> Self {
        Complex64::ln(self)
    }
    fn powf(self, r: f64) -> Self {
        if is_integer(r) && r.abs() <= i32::MAX as f64 {
            Complex64::powi(&self, r as i32)
        } else {
            Complex64::powf(self, r)
        }
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
    fn is_zero(self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn ln_defined(self) -> bool {
        !self.is_zero()
    }
    fn pow_defined(self, r: f64) -> bool {
        !self.is_zero() || (is_integer(r) && r >= 0.0)
    }
}

/// Value, gradient and Hessian of a scalar field at a point.
///
/// The Hessian is symmetric by construction: every operation computes the
/// upper triangle and mirrors it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2<const D: usize, S: Scalar = f64> {
    value: S,
    grad: [S; D],
    hess: [[S; D]; D],
}

pub type ComplexJet2<const D: usize> = Jet2<D, Complex64>;

/// How to seed a jet from a chart point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Lift {
    Constant(f64),
    Variable(usize),
}

/// Seed a real jet at `point`.
pub fn lift<const D: usize>(kind: Lift, point: [f64; D]) -> Result<Jet2<D>, JetError> {
    match kind {
        Lift::Constant(c) => Ok(Jet2::constant(c)),
        Lift::Variable(index) => {
            let x = *point
                .get(index)
                .ok_or(JetError::IndexOutOfRange { index, dim: D })?;
            Jet2::variable(index, x)
        }
    }
}

impl<const D: usize, S: Scalar> Jet2<D, S> {
    pub const DIM: usize = D;

    pub fn constant(c: S) -> Self {
        Self {
            value: c,
            grad: [S::zero(); D],
            hess: [[S::zero(); D]; D],
        }
    }

    /// Coordinate function `index` evaluated at `x`.
    pub fn variable(index: usize, x: S) -> Result<Self, JetError> {
        if index >= D {
            return Err(JetError::IndexOutOfRange { index, dim: D });
        }
        let mut jet = Self::constant(x);
        jet.grad[index] = S::one();
        Ok(jet)
    }

    /// Build a jet from raw parts. The Hessian must be exactly symmetric.
    pub fn from_parts(value: S, grad: [S; D], hess: [[S; D]; D]) -> Result<Self, JetError> {
        for i in 0..D {
            for j in (i + 1)..D {
                if hess[i][j] != hess[j][i] {
                    return Err(JetError::NonSymmetricHessian { i, j });
                }
            }
        }
        Ok(Self { value, grad, hess })
    }

    pub fn value(&self) -> S {
        self.value
    }

    pub fn grad(&self) -> [S; D] {
        self.grad
    }

    pub fn hess(&self) -> [[S; D]; D] {
        self.hess
    }

    /// The jet of `∂f/∂x_index`. Its Hessian would need third derivatives,
    /// which are not carried, so it is set to zero.
    pub fn derivative(&self, index: usize) -> Result<Self, JetError> {
        if index >= D {
            return Err(JetError::IndexOutOfRange { index, dim: D });
        }
        Ok(Self {
            value: self.grad[index],
            grad: self.hess[index],
            hess: [[S::zero(); D]; D],
        })
    }

    fn symmetric(mut f: impl FnMut(usize, usize) -> S) -> [[S; D]; D] {
        let mut hess = [[S::zero(); D]; D];
        for i in 0..D {
            for j in i..D {
                let h = f(i, j);
                hess[i][j] = h;
                hess[j][i] = h;
            }
        }
        hess
    }

    /// Compose with a scalar function whose value and first two derivatives
    /// at `self.value` are `f0`, `f1`, `f2`.
    pub fn chain(&self, f0: S, f1: S, f2: S) -> Self {
        let g = self.grad;
        let h = self.hess;
        Self {
            value: f0,
            grad: g.map(|gi| f1 * gi),
            hess: Self::symmetric(|i, j| f1 * h[i][j] + f2 * g[i] * g[j]),
        }
    }

    pub fn scale(&self, c: S) -> Self {
        Self {
            value: self.value * c,
            grad: self.grad.map(|g| g * c),
            hess: self.hess.map(|row| row.map(|h| h * c)),
        }
    }

    pub fn offset(&self, c: S) -> Self {
        Self {
            value: self.value + c,
            ..*self
        }
    }

    pub fn exp(&self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Result<Self, JetError> {
        let x = self.value;
        if !x.ln_defined() {
            return Err(JetError::Domain {
                op: "ln",
                value: format!("{x:?}"),
            });
        }
        let inv = S::one() / x;
        Ok(self.chain(x.ln(), inv, -(inv * inv)))
    }

    pub fn recip(&self) -> Result<Self, JetError> {
        let x = self.value;
        if x.is_zero() {
            return Err(JetError::Domain {
                op: "div",
                value: format!("{x:?}"),
            });
        }
        let inv = S::one() / x;
        let inv2 = inv * inv;
        Ok(self.chain(inv, -inv2, S::from_real(2.0) * inv2 * inv))
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, JetError> {
        Ok(*self * rhs.recip()?)
    }

    /// `self^r` for a real exponent.
    pub fn powf(&self, r: f64) -> Result<Self, JetError> {
        let x = self.value;
        if !x.pow_defined(r) {
            return Err(JetError::Domain {
                op: "pow",
                value: format!("{x:?}^{r}"),
            });
        }
        if r == 0.0 {
            return Ok(Self::constant(S::one()));
        }
        let f1 = S::from_real(r) * x.powf(r - 1.0);
        let f2 = if r == 1.0 {
            S::zero()
        } else {
            S::from_real(r * (r - 1.0)) * x.powf(r - 2.0)
        };
        Ok(self.chain(x.powf(r), f1, f2))
    }

    /// Largest absolute deviation between the two jets over value, gradient
    /// and Hessian entries.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = (self.value - other.value).magnitude();
        for i in 0..D {
            worst = worst.max((self.grad[i] - other.grad[i]).magnitude());
            for j in 0..D {
                worst = worst.max((self.hess[i][j] - other.hess[i][j]).magnitude());
            }
        }
        worst
    }
}

impl<const D: usize> Jet2<D, f64> {
    pub fn to_complex(&self) -> ComplexJet2<D> {
        Jet2 {
            value: Complex64::from(self.value),
            grad: self.grad.map(Complex64::from),
            hess: self.hess.map(|row| row.map(Complex64::from)),
        }
    }
}

impl<const D: usize> Jet2<D, Complex64> {
    pub fn re(&self) -> Jet2<D> {
        Jet2 {
            value: self.value.re,
            grad: self.grad.map(|g| g.re),
            hess: self.hess.map(|row| row.map(|h| h.re)),
        }
    }

    pub fn im(&self) -> Jet2<D> {
        Jet2 {
            value: self.value.im,
            grad: self.grad.map(|g| g.im),
            hess: self.hess.map(|row| row.map(|h| h.im)),
        }
    }

    pub fn from_re_im(re: &Jet2<D>, im: &Jet2<D>) -> Self {
        let mut out = Self::constant(Complex64::new(re.value, im.value));
        for i in 0..D {
            out.grad[i] = Complex64::new(re.grad[i], im.grad[i]);
            for j in 0..D {
                out.hess[i][j] = Complex64::new(re.hess[i][j], im.hess[i][j]);
            }
        }
        out
    }
}

impl<const D: usize, S: Scalar> Add for Jet2<D, S> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self {
            value: self.value + rhs.value,
            grad: std::array::from_fn(|i| self.grad[i] + rhs.grad[i]),
            hess: Self::symmetric(|i, j| self.hess[i][j] + rhs.hess[i][j]),
        }
    }
}

impl<const D: usize, S: Scalar> Sub for Jet2<D, S> {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        Self {
            value: self.value - rhs.value,
            grad: std::array::from_fn(|i| self.grad[i] - rhs.grad[i]),
            hess: Self::symmetric(|i, j| self.hess[i][j] - rhs.hess[i][j]),
        }
    }
}

impl<const D: usize, S: Scalar> Neg for Jet2<D, S> {
    type Output = Self;

    fn neg(self) -> Self {
        Self {
            value: -self.value,
            grad: self.grad.map(|g| -g),
            hess: self.hess.map(|row| row.map(|h| -h)),
        }
    }
}

impl<const D: usize, S: Scalar> Mul for Jet2<D, S> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (self, rhs);
        Self {
            value: a.value * b.value,
            grad: std::array::from_fn(|i| a.grad[i] * b.value + a.value * b.grad[i]),
            hess: Self::symmetric(|i, j| {
                a.hess[i][j] * b.value
                    + a.value * b.hess[i][j]
                    + (a.grad[i] * b.grad[j] + a.grad[j] * b.grad[i])
            }),
        }
    }
}

/// Elementary operations accepted by [`apply`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Elementary {
    Add,
    Sub,
    Mul,
    Div,
    Pow(f64),
    Exp,
    Ln,
    Neg,
    Scale(f64),
}

impl Elementary {
    fn name(self) -> &'static str {
        match self {
            Elementary::Add => "add",
            Elementary::Sub => "sub",
            Elementary::Mul => "mul",
            Elementary::Div => "div",
            Elementary::Pow(_) => "pow",
            Elementary::Exp => "exp",
            Elementary::Ln => "ln",
            Elementary::Neg => "neg",
            Elementary::Scale(_) => "scale",
        }
    }

    fn arity(self) -> usize {
        match self {
            Elementary::Add | Elementary::Sub | Elementary::Mul | Elementary::Div => 2,
            _ => 1,
        }
    }
}

/// Apply an elementary operation to jet arguments.
pub fn apply<const D: usize, S: Scalar>(
    op: Elementary,
    args: &[Jet2<D, S>],
) -> Result<Jet2<D, S>, JetError> {
    if args.len() != op.arity() {
        return Err(JetError::Arity {
            op: op.name(),
            expected: op.arity(),
            got: args.len(),
        });
    }
    let a = args[0];
    match op {
        Elementary::Add => Ok(a + args[1]),
        Elementary::Sub => Ok(a - args[1]),
        Elementary::Mul => Ok(a * args[1]),
        Elementary::Div => a.checked_div(&args[1]),
        Elementary::Pow(r) => a.powf(r),
        Elementary::Exp => Ok(a.exp()),
        Elementary::Ln => a.ln(),
        Elementary::Neg => Ok(-a),
        Elementary::Scale(c) => Ok(a.scale(S::from_real(c))),
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FdError {
    #[error("finite-difference step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("stencil point {0:?} is outside the field's domain")]
    OutsideDomain(Vec<f64>),
}

/// Central-difference estimates of a gradient and Hessian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdEstimate<const D: usize> {
    pub grad: [f64; D],
    pub hess: [[f64; D]; D],
}

/// Default base step for [`fd_oracle`].
pub const FD_STEP: f64 = 1e-5;

/// Central-difference oracle, O(h²) accurate.
///
/// The step along coordinate `i` is `h · max(1, |point[i]|)`. The field
/// returns `None` where it is undefined. The mixed stencil is symmetric in
/// `i, j`, so the estimated Hessian is too.
pub fn fd_oracle<const D: usize>(
    f: impl Fn([f64; D]) -> Option<f64>,
    point: [f64; D],
    h: f64,
) -> Result<FdEstimate<D>, FdError> {
    if !(h > 0.0) {
        return Err(FdError::NonPositiveStep(h));
    }
    let eval = |offsets: &[(usize, f64)]| -> Result<f64, FdError> {
        let mut p = point;
        for &(i, d) in offsets {
            p[i] += d;
        }
        f(p).ok_or_else(|| FdError::OutsideDomain(p.to_vec()))
    };
    let steps: [f64; D] = point.map(|x| h * x.abs().max(1.0));
    let f0 = eval(&[])?;

    let mut grad = [0.0; D];
    let mut hess = [[0.0; D]; D];
    for i in 0..D {
        let hi = steps[i];
        let fp = eval(&[(i, hi)])?;
        let fm = eval(&[(i, -hi)])?;
        grad[i] = (fp - fm) / (2.0 * hi);
        hess[i][i] = (fp - 2.0 * f0 + fm) / (hi * hi);
    }
    for i in 0..D {
        for j in (i + 1)..D {
            let (hi, hj) = (steps[i], steps[j]);
            let fpp = eval(&[(i, hi), (j, hj)])?;
            let fpm = eval(&[(i, hi), (j, -hj)])?;
            let fmp = eval(&[(i, -hi), (j, hj)])?;
            let fmm = eval(&[(i, -hi), (j, -hj)])?;
            let h = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
            hess[i][j] = h;
            hess[j][i] = h;
        }
    }
    Ok(FdEstimate { grad, hess })
}
