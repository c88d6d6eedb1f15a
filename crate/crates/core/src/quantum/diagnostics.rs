//! Expectation values and the diagnostics built on them.

use std::fmt;

use num_complex::Complex64;

use super::quadrature::{Box2, CompensatedSum, QuadratureRule};
use super::{GasState, QuantumError, QuantumParams, Wavefunction};
use crate::dsl::CompiledOperator;
use crate::jets::ComplexJet2;
use crate::potentials::{GasParams, StateSV};

/// Default tolerance on the imaginary part of a normalized expectation.
pub const IMAG_TOL: f64 = 1e-10;

/// Operators with `T̂ = −q ∂_S` and `p̂ = q ∂_V`.
#[derive(Debug, Clone)]
pub enum Observable {
    Entropy,
    Volume,
    Temperature,
    Pressure,
    EntropySquared,
    VolumeSquared,
    TemperatureSquared,
    PressureSquared,
    Law(CompiledOperator),
}

impl Observable {
    /// The eight coordinate and momentum observables.
    pub fn basic() -> Vec<Observable> {
        use Observable::*;
        vec![
            Entropy,
            Volume,
            Temperature,
            Pressure,
            EntropySquared,
            VolumeSquared,
            TemperatureSquared,
            PressureSquared,
        ]
    }

    pub fn label(&self) -> String {
        match self {
            Observable::Entropy => "S".into(),
            Observable::Volume => "V".into(),
            Observable::Temperature => "T".into(),
            Observable::Pressure => "p".into(),
            Observable::EntropySquared => "S^2".into(),
            Observable::VolumeSquared => "V^2".into(),
            Observable::TemperatureSquared => "T^2".into(),
            Observable::PressureSquared => "p^2".into(),
            Observable::Law(op) => format!("[{}] {}", op.ordering(), op.source()),
        }
    }

    /// `(Op ψ)(S, V)`.
    pub fn apply(
        &self,
        params: &GasParams,
        q: Complex64,
        state: StateSV,
        psi: &ComplexJet2<2>,
    ) -> Result<Complex64, QuantumError> {
        let v = psi.value();
        let [psi_s, psi_v] = psi.grad();
        let h = psi.hess();
        Ok(match self {
            Observable::Entropy => v * state.s,
            Observable::Volume => v * state.v,
            Observable::Temperature => -q * psi_s,
            Observable::Pressure => q * psi_v,
            Observable::EntropySquared => v * state.s * state.s,
            Observable::VolumeSquared => v * state.v * state.v,
            Observable::TemperatureSquared => q * q * h[0][0],
            Observable::PressureSquared => q * q * h[1][1],
            Observable::Law(op) => op.apply(params, state, psi)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationReport {
    pub label: String,
    /// `⟨ψ, Op ψ⟩`.
    pub raw: Complex64,
    /// `⟨ψ, Op ψ⟩ / ⟨ψ, ψ⟩`.
    pub normalized: Complex64,
    pub norm2: f64,
    /// `|Im normalized| > tol·max(1, |normalized|)`.
    pub imaginary: bool,
}

/// All expectations in one pass over the quadrature nodes.
pub fn expectations(
    params: &GasParams,
    q: Complex64,
    wf: &impl Wavefunction,
    ops: &[Observable],
    domain: &Box2,
    rule: &QuadratureRule,
    imag_tol: f64,
) -> Result<Vec<ExpectationReport>, QuantumError> {
    domain.validate()?;
    rule.validate()?;
    let mut norm = CompensatedSum::default();
    let mut sums = vec![CompensatedSum::default(); ops.len()];
    for (st, w) in rule.nodes_2d(domain) {
        let psi = wf.jet(st)?;
        let conj = psi.value().conj();
        norm.add(conj * psi.value() * w);
        for (op, acc) in ops.iter().zip(sums.iter_mut()) {
            acc.add(conj * op.apply(params, q, st, &psi)? * w);
        }
    }
    let norm2 = norm.total().re;
    if !(norm2 > 0.0) || !norm2.is_finite() {
        return Err(QuantumError::ZeroNorm);
    }
    Ok(ops
        .iter()
        .zip(&sums)
        .map(|(op, acc)| {
            let raw = acc.total();
            let normalized = raw / norm2;
            ExpectationReport {
                label: op.label(),
                raw,
                normalized,
                norm2,
                imaginary: normalized.im.abs() > imag_tol * normalized.norm().max(1.0),
            }
        })
        .collect())
}

pub fn expectation(
    params: &GasParams,
    q: Complex64,
    wf: &impl Wavefunction,
    op: &Observable,
    domain: &Box2,
    rule: &QuadratureRule,
) -> Result<ExpectationReport, QuantumError> {
    let mut all = expectations(
        params,
        q,
        wf,
        std::slice::from_ref(op),
        domain,
        rule,
        IMAG_TOL,
    )?;
    Ok(all.remove(0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaugeReport {
    pub shift: f64,
    /// `exp(−C/q)`.
    pub factor: Complex64,
    /// Largest `|ψ_{U+C} − factor·ψ_U| / |factor·ψ_U|` on a 10×10 grid.
    pub pointwise: f64,
    /// Largest change of a normalized basic expectation, relative with floor 1.
    pub expectations: f64,
}

/// Compare the states built on `U` and `U + C`.
pub fn gauge_check(
    params: &GasParams,
    qp: &QuantumParams,
    shift: f64,
    domain: &Box2,
    rule: &QuadratureRule,
) -> Result<GaugeReport, QuantumError> {
    let base = GasState::new(params, qp);
    let shifted = base.with_energy_shift(shift);
    let factor = (-shift / qp.q()).exp();
    let mut pointwise: f64 = 0.0;
    for st in domain.grid(10) {
        let expected = factor * base.value(st)?;
        let got = shifted.value(st)?;
        pointwise = pointwise.max((got - expected).norm() / expected.norm());
    }
    let ops = Observable::basic();
    let before = expectations(params, qp.q(), &base, &ops, domain, rule, IMAG_TOL)?;
    let after = expectations(params, qp.q(), &shifted, &ops, domain, rule, IMAG_TOL)?;
    let expectations = before
        .iter()
        .zip(&after)
        .map(|(a, b)| (a.normalized - b.normalized).norm() / a.normalized.norm().max(1.0))
        .fold(0.0, f64::max);
    Ok(GaugeReport {
        shift,
        factor,
        pointwise,
        expectations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Satisfied,
    Violated,
    NotEvaluated(String),
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Satisfied => f.write_str("satisfied"),
            Verdict::Violated => f.write_str("violated"),
            Verdict::NotEvaluated(why) => write!(f, "non-Hermitian: bound not evaluated ({why})"),
        }
    }
}

/// Spreads of a coordinate and its conjugate momentum.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyPair {
    pub label: String,
    pub var_coordinate: Complex64,
    pub var_momentum: Complex64,
    /// `Δa·Δb`, present when both variances are real and nonnegative.
    pub product: Option<f64>,
    /// `|q|/2`.
    pub bound: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyReport {
    pub entropy_temperature: UncertaintyPair,
    pub volume_pressure: UncertaintyPair,
}

fn variance(mean: Complex64, square: Complex64) -> Complex64 {
    square - mean * mean
}

fn is_real(x: Complex64) -> bool {
    x.im.abs() <= IMAG_TOL * x.norm().max(1.0)
}

fn pair(label: &str, var_a: Complex64, var_b: Complex64, bound: f64) -> UncertaintyPair {
    let (product, verdict) = if !is_real(var_a) || !is_real(var_b) {
        (None, Verdict::NotEvaluated("complex variance".into()))
    } else if var_a.re < 0.0 || var_b.re < 0.0 {
        (None, Verdict::NotEvaluated("negative variance".into()))
    } else {
        let product = (var_a.re * var_b.re).sqrt();
        let verdict = if product >= bound {
            Verdict::Satisfied
        } else {
            Verdict::Violated
        };
        (Some(product), verdict)
    };
    UncertaintyPair {
        label: label.into(),
        var_coordinate: var_a,
        var_momentum: var_b,
        product,
        bound,
        verdict,
    }
}

pub fn uncertainty_report(
    params: &GasParams,
    qp: &QuantumParams,
    domain: &Box2,
    rule: &QuadratureRule,
) -> Result<UncertaintyReport, QuantumError> {
    let ops = Observable::basic();
    let e = expectations(
        params,
        qp.q(),
        &GasState::new(params, qp),
        &ops,
        domain,
        rule,
        IMAG_TOL,
    )?;
    let m = |i: usize| e[i].normalized;
    let bound = qp.q().norm() / 2.0;
    Ok(UncertaintyReport {
        entropy_temperature: pair("S,T", variance(m(0), m(4)), variance(m(2), m(6)), bound),
        volume_pressure: pair("V,p", variance(m(1), m(5)), variance(m(3), m(7)), bound),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiticityReport {
    /// `⟨f, T̂g⟩ − ⟨T̂f, g⟩` by direct quadrature.
    pub defect: Complex64,
    /// `−q ∫ [conj(f)·g] between the S-faces dV`.
    pub face_flux: Complex64,
    /// `(q + conj(q)) ∫∫ conj(∂_S f)·g`.
    pub interior: Complex64,
    pub oracle: Complex64,
}

impl HermiticityReport {
    /// `|defect − oracle| / max(1, |oracle|)`.
    pub fn mismatch(&self) -> f64 {
        (self.defect - self.oracle).norm() / self.oracle.norm().max(1.0)
    }
}

/// Failure of `T̂` to be symmetric between `f` and `g` on the box, with an
/// integration-by-parts evaluation of the same quantity.
pub fn hermiticity_diagnostic(
    qp: &QuantumParams,
    domain: &Box2,
    rule: &QuadratureRule,
    f: &impl Wavefunction,
    g: &impl Wavefunction,
) -> Result<HermiticityReport, QuantumError> {
    domain.validate()?;
    rule.validate()?;
    let q = qp.q();
    let mut defect = CompensatedSum::default();
    let mut interior = CompensatedSum::default();
    for (st, w) in rule.nodes_2d(domain) {
        let (fj, gj) = (f.jet(st)?, g.jet(st)?);
        let (f0, f_s) = (fj.value(), fj.grad()[0]);
        let (g0, g_s) = (gj.value(), gj.grad()[0]);
        let f_tg = f0.conj() * (-q * g_s);
        let tf_g = (-q * f_s).conj() * g0;
        defect.add((f_tg - tf_g) * w);
        interior.add(f_s.conj() * g0 * w);
    }
    let mut faces = CompensatedSum::default();
    for (v, w) in rule.nodes_1d(domain.v_lo, domain.v_hi) {
        let hi = StateSV { s: domain.s_hi, v };
        let lo = StateSV { s: domain.s_lo, v };
        faces.add(f.value(hi)?.conj() * g.value(hi)? * w);
        faces.add(-(f.value(lo)?.conj() * g.value(lo)?) * w);
    }
    let face_flux = -q * faces.total();
    let interior = (q + q.conj()) * interior.total();
    Ok(HermiticityReport {
        defect: defect.total(),
        face_flux,
        interior,
        oracle: face_flux + interior,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityReport {
    /// `∫∫ |ψ|`.
    pub l1: f64,
    /// `∫∫ |ψ|²`.
    pub l2: f64,
    /// Smallest `|ψ|²` over the quadrature nodes.
    pub min_density: f64,
}

impl DensityReport {
    pub fn is_density(&self) -> bool {
        self.min_density >= 0.0 && self.l1.is_finite() && self.l2.is_finite() && self.l2 > 0.0
    }
}

pub fn density_report(
    wf: &impl Wavefunction,
    domain: &Box2,
    rule: &QuadratureRule,
) -> Result<DensityReport, QuantumError> {
    domain.validate()?;
    rule.validate()?;
    let mut l1 = CompensatedSum::default();
    let mut l2 = CompensatedSum::default();
    let mut min_density = f64::INFINITY;
    for (st, w) in rule.nodes_2d(domain) {
        let m = wf.value(st)?.norm();
        l1.add(Complex64::from(m * w));
        l2.add(Complex64::from(m * m * w));
        min_density = min_density.min(m * m);
    }
    Ok(DensityReport {
        l1: l1.total().re,
        l2: l2.total().re,
        min_density,
    })
}
