//! The monoatomic ideal gas in the energy representation.
//!
//! `U(S, V) = U0 · exp(2S / (3NkB)) · (Vref / V)^(2/3)`, its conjugate
//! variables `T = ∂U/∂S` and `p = −∂U/∂V`, the residuals of the two
//! equations of state and of the two PDEs of state, and the change of
//! variables to `(x, y)` under which `U` depends on `x` alone.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jets::{Jet2, JetError};

/// Boltzmann's constant in J/K.
pub const BOLTZMANN_SI: f64 = 1.380649e-23;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThermoError {
    #[error("{field} must be strictly positive, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("ODE integration needs at least one step")]
    ZeroSteps,
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// Constants of the fundamental equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasParams {
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "kB")]
    pub kb: f64,
    #[serde(rename = "U0")]
    pub u0: f64,
    #[serde(rename = "Vref")]
    pub vref: f64,
}

impl GasParams {
    pub fn new(n: f64, kb: f64, u0: f64, vref: f64) -> Result<Self, ThermoError> {
        let params = Self { n, kb, u0, vref };
        params.validate()?;
        Ok(params)
    }

    /// `N = kB = U0 = Vref = 1`.
    pub fn unit() -> Self {
        Self {
            n: 1.0,
            kb: 1.0,
            u0: 1.0,
            vref: 1.0,
        }
    }

    /// SI Boltzmann constant; energies in joules, volumes in m³.
    pub fn physical(n: f64, u0: f64, vref: f64) -> Result<Self, ThermoError> {
        Self::new(n, BOLTZMANN_SI, u0, vref)
    }

    pub fn validate(&self) -> Result<(), ThermoError> {
        for (field, value) in [
            ("N", self.n),
            ("kB", self.kb),
            ("U0", self.u0),
            ("Vref", self.vref),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ThermoError::NonPositive { field, value });
            }
        }
        Ok(())
    }

    pub fn nkb(&self) -> f64 {
        self.n * self.kb
    }
}

/// A point `(S, V)` of configuration space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateSV {
    pub s: f64,
    pub v: f64,
}

impl StateSV {
    pub fn new(s: f64, v: f64) -> Result<Self, ThermoError> {
        check_volume(v)?;
        Ok(Self { s, v })
    }
}

fn check_volume(v: f64) -> Result<(), ThermoError> {
    if v > 0.0 {
        Ok(())
    } else {
        Err(ThermoError::NonPositive {
            field: "V",
            value: v,
        })
    }
}

/// `x = s − v`, `y = s + v` with `s = S/(NkB)`, `v = ln(V/Vref)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedCoords {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugatePair {
    pub t: f64,
    pub p: f64,
}

/// A fundamental equation `U(S, V)` evaluated as a jet over `(S, V)`.
///
/// The ideal gas is the only potential the library ships; the trait lets the
/// residual suites run against deliberately wrong potentials too.
pub trait Potential {
    fn energy(&self, state: StateSV) -> Result<Jet2<2>, ThermoError>;
}

impl Potential for GasParams {
    fn energy(&self, state: StateSV) -> Result<Jet2<2>, ThermoError> {
        fundamental_u(self, state)
    }
}

fn sv_jets(state: StateSV) -> (Jet2<2>, Jet2<2>) {
    (
        Jet2::variable(0, state.s).expect("index 0 < 2"),
        Jet2::variable(1, state.v).expect("index 1 < 2"),
    )
}

/// The fundamental equation evaluated on arbitrary jets `S`, `V`.
pub fn fundamental_u_of<const D: usize>(
    params: &GasParams,
    s: Jet2<D>,
    v: Jet2<D>,
) -> Result<Jet2<D>, ThermoError> {
    check_volume(v.value())?;
    let x = s.scale(params.nkb().recip()) - v.scale(params.vref.recip()).ln()?;
    Ok(reduced_u_of(params, x))
}

/// `U(S, V)` with gradient and Hessian over `(S, V)`.
pub fn fundamental_u(params: &GasParams, state: StateSV) -> Result<Jet2<2>, ThermoError> {
    let (s, v) = sv_jets(state);
    fundamental_u_of(params, s, v)
}

pub fn conjugates_of(
    potential: &impl Potential,
    state: StateSV,
) -> Result<ConjugatePair, ThermoError> {
    let [u_s, u_v] = potential.energy(state)?.grad();
    Ok(ConjugatePair { t: u_s, p: -u_v })
}

/// `T = ∂U/∂S`, `p = −∂U/∂V`.
pub fn conjugates(params: &GasParams, state: StateSV) -> Result<ConjugatePair, ThermoError> {
    conjugates_of(params, state)
}

/// Residuals of the equations of state of `params`' gas, with `U`, `T` and
/// `p` taken from `potential`.
pub fn eos_residuals_of(
    potential: &impl Potential,
    params: &GasParams,
    state: StateSV,
) -> Result<(f64, f64), ThermoError> {
    let u = potential.energy(state)?;
    let [t, minus_p] = u.grad();
    let nkb = params.nkb();
    let r1 = -minus_p * state.v - nkb * t;
    let r2 = u.value() - 1.5 * nkb * t;
    Ok((r1, r2))
}

/// `(pV − NkB·T, U − (3/2)NkB·T)`.
pub fn eos_residuals(params: &GasParams, state: StateSV) -> Result<(f64, f64), ThermoError> {
    eos_residuals_of(params, params, state)
}

pub fn pde_residuals_of(
    potential: &impl Potential,
    params: &GasParams,
    state: StateSV,
) -> Result<(f64, f64), ThermoError> {
    let u = potential.energy(state)?;
    let [u_s, u_v] = u.grad();
    let nkb = params.nkb();
    let g1 = state.v * u_v + nkb * u_s;
    let g2 = u.value() - 1.5 * nkb * u_s;
    Ok((g1, g2))
}

/// `(V·∂U/∂V + NkB·∂U/∂S, U − (3/2)NkB·∂U/∂S)`.
pub fn pde_residuals(params: &GasParams, state: StateSV) -> Result<(f64, f64), ThermoError> {
    pde_residuals_of(params, params, state)
}

pub fn to_reduced(params: &GasParams, state: StateSV) -> Result<ReducedCoords, ThermoError> {
    check_volume(state.v)?;
    let s = state.s * params.nkb().recip();
    let v = (state.v * params.vref.recip()).ln();
    Ok(ReducedCoords { x: s - v, y: s + v })
}

pub fn from_reduced(params: &GasParams, rc: ReducedCoords) -> StateSV {
    let s = 0.5 * (rc.x + rc.y);
    let v = 0.5 * (rc.y - rc.x);
    StateSV {
        s: params.nkb() * s,
        v: params.vref * v.exp(),
    }
}

/// `U(x) = U0 · exp(2x/3)` as a jet over the reduced line.
pub fn reduced_u(params: &GasParams, x: f64) -> Jet2<1> {
    reduced_u_of(params, Jet2::variable(0, x).expect("index 0 < 1"))
}

fn reduced_u_of<const D: usize>(params: &GasParams, x: Jet2<D>) -> Jet2<D> {
    x.scale(2.0 / 3.0).exp().scale(params.u0)
}

/// The fundamental equation as a jet over `(x, y)`; it does not see `y`.
pub fn reduced_u_xy(params: &GasParams, rc: ReducedCoords) -> Jet2<2> {
    reduced_u_of(params, Jet2::<2>::variable(0, rc.x).expect("index 0 < 2"))
}

/// `p_x = ∂U/∂x`, which equals `(2/3)·U(x)` and `NkB·T`.
pub fn p_x(params: &GasParams, x: f64) -> f64 {
    reduced_u(params, x).grad()[0]
}

/// Classic fourth-order Runge–Kutta for a scalar autonomous-in-form ODE
/// `du/dx = f(x, u)`.
fn rk4(f: impl Fn(f64, f64) -> f64, x0: f64, u0: f64, x1: f64, steps: usize) -> f64 {
    let h = (x1 - x0) / steps as f64;
    let mut u = u0;
    for i in 0..steps {
        let x = x0 + i as f64 * h;
        let k1 = f(x, u);
        let k2 = f(x + 0.5 * h, u + 0.5 * h * k1);
        let k3 = f(x + 0.5 * h, u + 0.5 * h * k2);
        let k4 = f(x + h, u + h * k3);
        u += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    u
}

/// Integrate the reduced PDE of state `U' = (2/3)U` from `(x0, U(x0))` to
/// `x1`.
pub fn integrate_reduced_ode(
    params: &GasParams,
    x0: f64,
    x1: f64,
    steps: usize,
) -> Result<f64, ThermoError> {
    if steps == 0 {
        return Err(ThermoError::ZeroSteps);
    }
    let u_start = reduced_u(params, x0).value();
    Ok(rk4(|_, u| 2.0 / 3.0 * u, x0, u_start, x1, steps))
}
