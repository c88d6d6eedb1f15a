use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::lexer::{Func, Sym};
use super::parser::{BinOp, Expr, ExprKind};
use super::DslError;
use crate::jets::{ComplexJet2, Jet2};
use crate::potentials::{fundamental_u, GasParams, Potential, StateSV};

/// Placement of multiplicative factors relative to the derivative operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Ordering {
    /// Multiply after differentiating: `V·(q ∂_V ψ)`.
    #[default]
    #[serde(rename = "Vp")]
    Vp,
    /// Differentiate the product: `q ∂_V (V·ψ)`.
    #[serde(rename = "pV")]
    PV,
    /// Mean of the two.
    #[serde(rename = "Weyl")]
    Weyl,
}

impl Ordering {
    /// Weight of the product-rule term `q(∂_V B − ∂_S C)ψ` that this
    /// ordering adds on top of `Vp`.
    pub fn product_rule_weight(self) -> f64 {
        match self {
            Ordering::Vp => 0.0,
            Ordering::PV => 1.0,
            Ordering::Weyl => 0.5,
        }
    }
}

impl fmt::Display for Ordering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ordering::Vp => "Vp",
            Ordering::PV => "pV",
            Ordering::Weyl => "Weyl",
        })
    }
}

impl FromStr for Ordering {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Vp" => Ok(Ordering::Vp),
            "pV" => Ok(Ordering::PV),
            "Weyl" => Ok(Ordering::Weyl),
            other => Err(format!(
                "unknown ordering '{other}' (expected Vp, pV or Weyl)"
            )),
        }
    }
}

/// Fold every subtree made only of numeric literals.
pub fn fold_constants(e: &Expr) -> Expr {
    let as_const = |x: &Expr| match x.kind {
        ExprKind::Const(c) => Some(c),
        _ => None,
    };
    match &e.kind {
        ExprKind::Const(_) | ExprKind::Sym(_) => e.clone(),
        ExprKind::Neg(a) => {
            let a = fold_constants(a);
            match as_const(&a) {
                Some(c) => Expr::constant(-c, e.pos),
                None => Expr::neg(a, e.pos),
            }
        }
        ExprKind::Func(f, a) => {
            let a = fold_constants(a);
            if let Some(c) = as_const(&a) {
                let v = match f {
                    Func::Exp => c.exp(),
                    Func::Ln => c.ln(),
                };
                if v.is_finite() {
                    return Expr::constant(v, e.pos);
                }
            }
            Expr::func(*f, a, e.pos)
        }
        ExprKind::Binary(op, a, b) => {
            let (a, b) = (fold_constants(a), fold_constants(b));
            if let (Some(x), Some(y)) = (as_const(&a), as_const(&b)) {
                let v = match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => x / y,
                    BinOp::Pow => x.powf(y),
                };
                if v.is_finite() {
                    return Expr::constant(v, e.pos);
                }
            }
            let mut out = Expr::binary(*op, a, b);
            out.pos = e.pos;
            out
        }
    }
}

fn eval_real(e: &Expr, env: &impl Fn(Sym) -> f64) -> Result<f64, DslError> {
    let v = match &e.kind {
        ExprKind::Const(c) => *c,
        ExprKind::Sym(s) => env(*s),
        ExprKind::Neg(a) => -eval_real(a, env)?,
        ExprKind::Func(f, a) => {
            let x = eval_real(a, env)?;
            match f {
                Func::Exp => x.exp(),
                Func::Ln if x > 0.0 => x.ln(),
                Func::Ln => {
                    return Err(DslError::Eval(format!(
                        "ln of non-positive value {x} at offset {}",
                        e.pos
                    )))
                }
            }
        }
        ExprKind::Binary(op, a, b) => {
            let (x, y) = (eval_real(a, env)?, eval_real(b, env)?);
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div if y == 0.0 => {
                    return Err(DslError::Eval(format!(
                        "division by zero at offset {}",
                        e.pos
                    )))
                }
                BinOp::Div => x / y,
                BinOp::Pow => x.powf(y),
            }
        }
    };
    if v.is_nan() {
        return Err(DslError::Eval(format!("NaN produced at offset {}", e.pos)));
    }
    Ok(v)
}

fn eval_jet(e: &Expr, env: &impl Fn(Sym) -> Option<Jet2<2>>) -> Result<Jet2<2>, DslError> {
    Ok(match &e.kind {
        ExprKind::Const(c) => Jet2::constant(*c),
        ExprKind::Sym(s) => env(*s)
            .ok_or_else(|| DslError::Eval(format!("symbol {s} has no multiplicative value")))?,
        ExprKind::Neg(a) => -eval_jet(a, env)?,
        ExprKind::Func(Func::Exp, a) => eval_jet(a, env)?.exp(),
        ExprKind::Func(Func::Ln, a) => eval_jet(a, env)?.ln()?,
        ExprKind::Binary(op, a, b) => {
            if *op == BinOp::Pow {
                let ExprKind::Const(r) = b.kind else {
                    return Err(DslError::NonConstantExponent { pos: b.pos });
                };
                return Ok(eval_jet(a, env)?.powf(r)?);
            }
            let (x, y) = (eval_jet(a, env)?, eval_jet(b, env)?);
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => x.checked_div(&y)?,
                BinOp::Pow => unreachable!("handled above"),
            }
        }
    })
}

/// A PDE-of-state residual `f(−∂U/∂V, ∂U/∂S, U, S, V, N, kB)`.
#[derive(Debug, Clone)]
pub struct CompiledClassical {
    expr: Expr,
    params: GasParams,
}

pub fn compile_classical(ast: &Expr, params: &GasParams) -> Result<CompiledClassical, DslError> {
    params.validate()?;
    Ok(CompiledClassical {
        expr: ast.clone(),
        params: *params,
    })
}

impl CompiledClassical {
    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn evaluate(&self, state: StateSV) -> Result<f64, DslError> {
        self.evaluate_with(&self.params, state)
    }

    /// Evaluate with `U` and its derivatives taken from another potential.
    pub fn evaluate_with(
        &self,
        potential: &impl Potential,
        state: StateSV,
    ) -> Result<f64, DslError> {
        let u = potential.energy(state)?;
        let [u_s, u_v] = u.grad();
        let params = self.params;
        eval_real(&self.expr, &|s| match s {
            Sym::P => -u_v,
            Sym::T => u_s,
            Sym::U => u.value(),
            Sym::S => state.s,
            Sym::V => state.v,
            Sym::N => params.n,
            Sym::KB => params.kb,
        })
    }
}

/// `A + B·p + C·T` with `A`, `B`, `C` free of `p` and `T`; `None` is zero.
#[derive(Debug, Clone, Default)]
struct Affine {
    free: Option<Expr>,
    p: Option<Expr>,
    t: Option<Expr>,
}

fn conj(s: Sym) -> bool {
    s.is_conjugate()
}

impl Affine {
    fn map(self, f: impl Fn(Expr) -> Expr) -> Self {
        Self {
            free: self.free.map(&f),
            p: self.p.map(&f),
            t: self.t.map(&f),
        }
    }

    fn combine(self, other: Self, op: BinOp, pos: usize) -> Self {
        let join = |a: Option<Expr>, b: Option<Expr>| match (a, b) {
            (a, None) => a,
            (None, Some(b)) if op == BinOp::Sub => Some(Expr::neg(b, pos)),
            (None, b) => b,
            (Some(a), Some(b)) => Some(Expr::binary(op, a, b)),
        };
        Self {
            free: join(self.free, other.free),
            p: join(self.p, other.p),
            t: join(self.t, other.t),
        }
    }
}

fn affine(e: &Expr) -> Result<Affine, DslError> {
    let not_affine = |reason: &str| DslError::NotAffine {
        pos: e.pos,
        reason: reason.to_string(),
    };
    Ok(match &e.kind {
        ExprKind::Sym(Sym::P) => Affine {
            p: Some(Expr::constant(1.0, e.pos)),
            ..Affine::default()
        },
        ExprKind::Sym(Sym::T) => Affine {
            t: Some(Expr::constant(1.0, e.pos)),
            ..Affine::default()
        },
        _ if !e.mentions(&conj) => Affine {
            free: Some(e.clone()),
            ..Affine::default()
        },
        ExprKind::Neg(a) => affine(a)?.map(|x| Expr::neg(x, e.pos)),
        ExprKind::Func(..) => return Err(not_affine("p or T inside exp/ln")),
        ExprKind::Binary(op @ (BinOp::Add | BinOp::Sub), a, b) => {
            affine(a)?.combine(affine(b)?, *op, e.pos)
        }
        ExprKind::Binary(BinOp::Mul, a, b) => {
            if !a.mentions(&conj) {
                affine(b)?.map(|x| Expr::binary(BinOp::Mul, (**a).clone(), x))
            } else if !b.mentions(&conj) {
                affine(a)?.map(|x| Expr::binary(BinOp::Mul, x, (**b).clone()))
            } else {
                return Err(not_affine("product of two conjugate symbols"));
            }
        }
        ExprKind::Binary(BinOp::Div, a, b) => {
            if b.mentions(&conj) {
                return Err(not_affine("p or T in a denominator"));
            }
            affine(a)?.map(|x| Expr::binary(BinOp::Div, x, (**b).clone()))
        }
        ExprKind::Binary(BinOp::Pow, ..) => return Err(not_affine("p or T under a power")),
        ExprKind::Const(_) | ExprKind::Sym(_) => unreachable!("covered by the free case"),
    })
}

fn check_exponents(e: &Expr) -> Result<(), DslError> {
    match &e.kind {
        ExprKind::Const(_) | ExprKind::Sym(_) => Ok(()),
        ExprKind::Neg(a) | ExprKind::Func(_, a) => check_exponents(a),
        ExprKind::Binary(op, a, b) => {
            if *op == BinOp::Pow && !matches!(b.kind, ExprKind::Const(_)) {
                return Err(DslError::NonConstantExponent { pos: b.pos });
            }
            check_exponents(a)?;
            check_exponents(b)
        }
    }
}

/// An equation of state promoted to a differential operator by
/// `T → −q ∂_S`, `p → q ∂_V`.
#[derive(Debug, Clone)]
pub struct CompiledOperator {
    source: Expr,
    free: Option<Expr>,
    p_coeff: Option<Expr>,
    t_coeff: Option<Expr>,
    ordering: Ordering,
    q: Complex64,
}

pub fn compile_quantized(
    ast: &Expr,
    ordering: Ordering,
    q: Complex64,
) -> Result<CompiledOperator, DslError> {
    let folded = fold_constants(ast);
    let parts = affine(&folded)?;
    check_exponents(&folded)?;
    Ok(CompiledOperator {
        source: ast.clone(),
        free: parts.free,
        p_coeff: parts.p,
        t_coeff: parts.t,
        ordering,
        q,
    })
}

struct Coefficients {
    free: Jet2<2>,
    p: Jet2<2>,
    t: Jet2<2>,
}

impl CompiledOperator {
    pub fn source(&self) -> &Expr {
        &self.source
    }

    pub fn ordering(&self) -> Ordering {
        self.ordering
    }

    pub fn q(&self) -> Complex64 {
        self.q
    }

    pub fn with_ordering(&self, ordering: Ordering) -> Self {
        Self {
            ordering,
            ..self.clone()
        }
    }

    fn coefficients(&self, params: &GasParams, state: StateSV) -> Result<Coefficients, DslError> {
        let u = fundamental_u(params, state)?;
        let s = Jet2::<2>::variable(0, state.s)?;
        let v = Jet2::<2>::variable(1, state.v)?;
        let env = |sym: Sym| match sym {
            Sym::U => Some(u),
            Sym::S => Some(s),
            Sym::V => Some(v),
            Sym::N => Some(Jet2::constant(params.n)),
            Sym::KB => Some(Jet2::constant(params.kb)),
            Sym::P | Sym::T => None,
        };
        let eval = |e: &Option<Expr>| match e {
            Some(e) => eval_jet(e, &env),
            None => Ok(Jet2::constant(0.0)),
        };
        Ok(Coefficients {
            free: eval(&self.free)?,
            p: eval(&self.p_coeff)?,
            t: eval(&self.t_coeff)?,
        })
    }

    /// `(Op ψ)(S, V)` given the jet of `ψ` at `state`.
    pub fn apply(
        &self,
        params: &GasParams,
        state: StateSV,
        psi: &ComplexJet2<2>,
    ) -> Result<Complex64, DslError> {
        let c = self.coefficients(params, state)?;
        let q = self.q;
        let psi0 = psi.value();
        let [psi_s, psi_v] = psi.grad();
        let re = Complex64::from;

        let free = re(c.free.value()) * psi0;
        // factor-first: B·(q ∂_V ψ) + C·(−q ∂_S ψ)
        let factor_first = re(c.p.value()) * q * psi_v - re(c.t.value()) * q * psi_s;
        // derivative-first: q ∂_V(Bψ) − q ∂_S(Cψ)
        let derivative_first = q * (re(c.p.grad()[1]) * psi0 + re(c.p.value()) * psi_v)
            - q * (re(c.t.grad()[0]) * psi0 + re(c.t.value()) * psi_s);
        let ordered = match self.ordering {
            Ordering::Vp => factor_first,
            Ordering::PV => derivative_first,
            Ordering::Weyl => 0.5 * (factor_first + derivative_first),
        };
        Ok(free + ordered)
    }

    /// The multiplicative function `m(S, V)` with
    /// `Op_ordering ψ = Op_Vp ψ + m·ψ`.
    pub fn ordering_shift(
        &self,
        params: &GasParams,
        state: StateSV,
    ) -> Result<Complex64, DslError> {
        let c = self.coefficients(params, state)?;
        let w = self.ordering.product_rule_weight();
        Ok(self.q * Complex64::from(w * (c.p.grad()[1] - c.t.grad()[0])))
    }
}
