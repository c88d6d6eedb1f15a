//! Quantum-like states of the ideal gas.
//!
//! Promoting `T → −q ∂_S` and `p → q ∂_V` turns the two equations of state
//! into wave equations solved by `ψ_q = exp(−U/q)` for any nonzero complex
//! `q = z·N·kB·T_B`. This module evaluates those states, the wave-equation
//! residuals on the full and reduced charts, the commutator algebra and
//! the energy-shift symmetry. Integrals over configuration space and the
//! derived diagnostics live in [`quadrature`] and [`diagnostics`].

pub mod diagnostics;
pub mod quadrature;

use num_complex::Complex64;
use thiserror::Error;

use crate::dsl::DslError;
use crate::jets::{ComplexJet2, Jet2, JetError};
use crate::potentials::{
    conjugates, fundamental_u, reduced_u_xy, GasParams, ReducedCoords, StateSV, ThermoError,
};

pub use diagnostics::{
    density_report, expectation, expectations, gauge_check, hermiticity_diagnostic,
    uncertainty_report, DensityReport, ExpectationReport, GaugeReport, HermiticityReport,
    Observable, UncertaintyPair, UncertaintyReport, Verdict,
};
pub use quadrature::{inner_product, integrate, Box2, QuadratureRule};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("the quantum q must be nonzero")]
    ZeroQuantum,
    #[error("{field} must be strictly positive, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("invalid quadrature rule: {0}")]
    InvalidRule(String),
    #[error("state has zero norm on the box")]
    ZeroNorm,
    #[error(transparent)]
    Thermo(#[from] ThermoError),
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// Bath temperature, the free parameter `z`, and `q = z·N·kB·T_B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumParams {
    t_bath: f64,
    z: Complex64,
    q: Complex64,
}

impl QuantumParams {
    pub fn new(gas: &GasParams, t_bath: f64, z: Complex64) -> Result<Self, QuantumError> {
        if !(t_bath > 0.0 && t_bath.is_finite()) {
            return Err(QuantumError::NonPositive {
                field: "T_B",
                value: t_bath,
            });
        }
        let q = z * gas.nkb() * t_bath;
        if q.norm() == 0.0 || !q.is_finite() {
            return Err(QuantumError::ZeroQuantum);
        }
        Ok(Self { t_bath, z, q })
    }

    pub fn t_bath(&self) -> f64 {
        self.t_bath
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn q(&self) -> Complex64 {
        self.q
    }
}

/// A state known through its jet at each point of configuration space.
pub trait Wavefunction {
    fn jet(&self, state: StateSV) -> Result<ComplexJet2<2>, QuantumError>;

    fn value(&self, state: StateSV) -> Result<Complex64, QuantumError> {
        Ok(self.jet(state)?.value())
    }
}

impl<F> Wavefunction for F
where
    F: Fn(StateSV) -> Result<ComplexJet2<2>, QuantumError>,
{
    fn jet(&self, state: StateSV) -> Result<ComplexJet2<2>, QuantumError> {
        self(state)
    }
}

/// `ψ = exp(−(U + C)/q)`; `C = 0` is the solution of the wave equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasState {
    params: GasParams,
    q: Complex64,
    shift: f64,
}

impl GasState {
    pub fn new(params: &GasParams, qp: &QuantumParams) -> Self {
        Self {
            params: *params,
            q: qp.q(),
            shift: 0.0,
        }
    }

    /// The same state built on the shifted energy `U + C`.
    pub fn with_energy_shift(self, shift: f64) -> Self {
        Self { shift, ..self }
    }
}

impl Wavefunction for GasState {
    fn jet(&self, state: StateSV) -> Result<ComplexJet2<2>, QuantumError> {
        let u = fundamental_u(&self.params, state)?.offset(self.shift);
        Ok(u.to_complex().scale(-1.0 / self.q).exp())
    }
}

pub fn psi_jet(
    params: &GasParams,
    qp: &QuantumParams,
    state: StateSV,
) -> Result<ComplexJet2<2>, QuantumError> {
    GasState::new(params, qp).jet(state)
}

/// `ψ_q(S, V) = exp(−U(S, V)/q)`.
pub fn psi(
    params: &GasParams,
    qp: &QuantumParams,
    state: StateSV,
) -> Result<Complex64, QuantumError> {
    Ok(psi_jet(params, qp, state)?.value())
}

/// `(V ∂_V + NkB ∂_S)ψ` and `(U + (3/2)q·NkB ∂_S)ψ` for an arbitrary state.
pub fn wave_residuals_of(
    wf: &impl Wavefunction,
    params: &GasParams,
    qp: &QuantumParams,
    state: StateSV,
) -> Result<(Complex64, Complex64), QuantumError> {
    let psi = wf.jet(state)?;
    let [psi_s, psi_v] = psi.grad();
    let u = fundamental_u(params, state)?.value();
    let nkb = params.nkb();
    let w1 = psi_v * state.v + psi_s * nkb;
    let w2 = psi.value() * u + qp.q() * 1.5 * nkb * psi_s;
    Ok((w1, w2))
}

pub fn wave_residuals(
    params: &GasParams,
    qp: &QuantumParams,
    state: StateSV,
) -> Result<(Complex64, Complex64), QuantumError> {
    wave_residuals_of(&GasState::new(params, qp), params, qp, state)
}

/// `ψ_q(x) = exp(−U(x)/q)` as a jet over `(x, y)`.
pub fn reduced_psi_jet(
    params: &GasParams,
    qp: &QuantumParams,
    rc: ReducedCoords,
) -> ComplexJet2<2> {
    reduced_u_xy(params, rc)
        .to_complex()
        .scale(-1.0 / qp.q())
        .exp()
}

/// `(∂ψ/∂y, (U(x) + (3/2)q ∂_x)ψ)` on the reduced chart.
pub fn reduced_wave_residuals(
    params: &GasParams,
    qp: &QuantumParams,
    x: f64,
    y: f64,
) -> (Complex64, Complex64) {
    let rc = ReducedCoords { x, y };
    let psi = reduced_psi_jet(params, qp, rc);
    let u = reduced_u_xy(params, rc).value();
    let [psi_x, psi_y] = psi.grad();
    (psi_y, psi.value() * u + qp.q() * 1.5 * psi_x)
}

/// `(T̂ψ − T·ψ, p̂ψ − p·ψ)` with `T`, `p` the classical conjugates.
pub fn pointwise_eigen_check_of(
    wf: &impl Wavefunction,
    params: &GasParams,
    qp: &QuantumParams,
    state: StateSV,
) -> Result<(Complex64, Complex64), QuantumError> {
    let psi = wf.jet(state)?;
    let [psi_s, psi_v] = psi.grad();
    let c = conjugates(params, state)?;
    let q = qp.q();
    let r_t = -q * psi_s - psi.value() * c.t;
    let r_p = q * psi_v - psi.value() * c.p;
    Ok((r_t, r_p))
}

pub fn pointwise_eigen_check(
    params: &GasParams,
    qp: &QuantumParams,
    state: StateSV,
) -> Result<(Complex64, Complex64), QuantumError> {
    pointwise_eigen_check_of(&GasState::new(params, qp), params, qp, state)
}

/// `([Ŝ, T̂] f, [V̂, −p̂] f)` at a point, from the jet of `f` there.
pub fn commutators_at(f: &ComplexJet2<2>, q: Complex64, state: StateSV) -> (Complex64, Complex64) {
    let s = Jet2::<2>::variable(0, state.s).expect("0 < 2").to_complex();
    let v = Jet2::<2>::variable(1, state.v).expect("1 < 2").to_complex();
    let [f_s, f_v] = f.grad();
    let sf_s = (s * *f).grad()[0];
    let vf_v = (v * *f).grad()[1];
    // Ŝ T̂ f − T̂ Ŝ f, with T̂ = −q ∂_S
    let st = s.value() * (-q * f_s) - (-q * sf_s);
    // V̂ (−p̂) f − (−p̂) V̂ f, with −p̂ = −q ∂_V
    let vp = v.value() * (-q * f_v) - (-q * vf_v);
    (st, vp)
}

/// Largest `|([Ŝ,T̂] − q)f|` or `|([V̂,−p̂] − q)f|` over the points.
pub fn commutator_check(
    f: impl Fn(StateSV) -> Result<ComplexJet2<2>, QuantumError>,
    q: Complex64,
    points: &[StateSV],
) -> Result<f64, QuantumError> {
    let mut worst: f64 = 0.0;
    for &st in points {
        let fj = f(st)?;
        let (a, b) = commutators_at(&fj, q, st);
        let qf = q * fj.value();
        worst = worst.max((a - qf).norm()).max((b - qf).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    const UNIT: GasParams = GasParams {
        n: 1.0,
        kb: 1.0,
        u0: 1.0,
        vref: 1.0,
    };

    fn qp(z: Complex64) -> QuantumParams {
        QuantumParams::new(&UNIT, 1.0, z).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// exp(−U²/q)
    struct Squared(Complex64);

    impl Wavefunction for Squared {
        fn jet(&self, state: StateSV) -> Result<ComplexJet2<2>, QuantumError> {
            let u = fundamental_u(&UNIT, state)?.to_complex();
            Ok((u * u).scale(-1.0 / self.0).exp())
        }
    }

    #[test]
    fn quantum_params() {
        let gas = GasParams {
            n: 2.0,
            kb: 3.0,
            ..UNIT
        };
        let p = QuantumParams::new(&gas, 0.5, c(0.0, 1.0)).unwrap();
        assert_eq!(p.q(), c(0.0, 3.0));
        assert_eq!(
            QuantumParams::new(&gas, 1.0, c(0.0, 0.0)),
            Err(QuantumError::ZeroQuantum)
        );
        assert!(matches!(
            QuantumParams::new(&gas, 0.0, c(1.0, 0.0)),
            Err(QuantumError::NonPositive { field: "T_B", .. })
        ));
    }

    #[test]
    fn psi_examples() {
        let one = qp(c(1.0, 0.0));
        let v = psi(&UNIT, &one, StateSV { s: 0.0, v: 1.0 }).unwrap();
        assert_relative_eq!(v.re, (-1.0f64).exp(), max_relative = 1e-15);
        assert_eq!(v.im, 0.0);
        let v = psi(&UNIT, &one, StateSV { s: 1.5, v: 1.0 }).unwrap();
        assert_relative_eq!(v.re, (-E).exp(), max_relative = 1e-14);

        let i = qp(c(0.0, 1.0));
        for st in [StateSV { s: 0.2, v: 1.3 }, StateSV { s: -1.0, v: 7.0 }] {
            assert_relative_eq!(
                psi(&UNIT, &i, st).unwrap().norm(),
                1.0,
                max_relative = 1e-15
            );
        }
    }

    #[test]
    fn wave_equations_annihilate_psi() {
        let (w1, w2) = wave_residuals(&UNIT, &qp(c(1.0, 0.0)), StateSV { s: 0.0, v: 1.0 }).unwrap();
        assert!(w1.norm() <= 1e-13 && w2.norm() <= 1e-13);
    }

    #[test]
    fn squared_exponent_fails_second_wave_equation() {
        let p = qp(c(1.0, 0.0));
        let st = StateSV { s: 0.3, v: 1.5 };
        let (_, w2) = wave_residuals_of(&Squared(p.q()), &UNIT, &p, st).unwrap();
        // ψ_S = −2U·U_S/q·ψ, so w2 = (U − 3U·NkB·U_S)ψ = U(1 − 2U)ψ at unit config
        let u = fundamental_u(&UNIT, st).unwrap().value();
        let psi = (-u * u).exp();
        assert_relative_eq!(w2.re, u * (1.0 - 2.0 * u) * psi, max_relative = 1e-13);
        let (r_t, _) = pointwise_eigen_check_of(&Squared(p.q()), &UNIT, &p, st).unwrap();
        assert!(r_t.norm() > 1e-3);
    }

    #[test]
    fn reduced_wave_equations() {
        let p = qp(c(1.0, 0.0));
        let (wy, wx) = reduced_wave_residuals(&UNIT, &p, 0.0, 0.0);
        assert_eq!(wy, c(0.0, 0.0));
        assert!(wx.norm() <= 1e-13);
        let (wy, _) = reduced_wave_residuals(&UNIT, &qp(c(2.0, 3.0)), -1.3, 0.8);
        assert_eq!(wy.norm(), 0.0);
    }

    #[test]
    fn eigen_relation() {
        let (rt, rp) =
            pointwise_eigen_check(&UNIT, &qp(c(1.0, 0.0)), StateSV { s: 0.0, v: 1.0 }).unwrap();
        assert!(rt.norm() <= 1e-13 && rp.norm() <= 1e-13);
    }

    #[test]
    fn commutator_examples() {
        let st = StateSV { s: 0.7, v: 1.9 };
        let q = c(0.3, -1.1);
        let one = ComplexJet2::<2>::constant(c(1.0, 0.0));
        let (a, b) = commutators_at(&one, q, st);
        assert_eq!((a, b), (q, q));

        let s_fn = |st: StateSV| Ok(Jet2::<2>::variable(0, st.s)?.to_complex());
        assert!(commutator_check(s_fn, q, &[st]).unwrap() <= 1e-13);

        let exp_s_v = |st: StateSV| {
            let s = Jet2::<2>::variable(0, st.s)?;
            let v = Jet2::<2>::variable(1, st.v)?;
            Ok((s.exp() * v).to_complex())
        };
        assert!(commutator_check(exp_s_v, c(0.0, 1.0), &[st]).unwrap() <= 1e-12);
    }
}
