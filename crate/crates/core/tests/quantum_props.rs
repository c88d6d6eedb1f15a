use idealgas_contact::dsl::{compile_quantized, parse, Ordering};
use idealgas_contact::jets::{ComplexJet2, Jet2};
use idealgas_contact::potentials::{fundamental_u, to_reduced, GasParams, StateSV};
use idealgas_contact::quantum::diagnostics::IMAG_TOL;
use idealgas_contact::quantum::quadrature::integrate;
use idealgas_contact::quantum::{
    commutator_check, density_report, expectations, gauge_check, hermiticity_diagnostic,
    inner_product, pointwise_eigen_check, psi, reduced_psi_jet, reduced_wave_residuals,
    wave_residuals, Box2, ExpectationReport, GasState, Observable, QuadratureRule, QuantumError,
    QuantumParams, Wavefunction,
};
use idealgas_contact::sampling::Sampler;
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const ZS: [Complex64; 5] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(2.0, 3.0),
    Complex64::new(1e-3, 0.0),
];

fn unit() -> GasParams {
    GasParams::unit()
}

fn qp(z: Complex64) -> QuantumParams {
    QuantumParams::new(&unit(), 1.0, z).unwrap()
}

#[test]
fn wave_equations_hold_for_every_z() {
    let p = unit();
    let states = Sampler::new(21).states(&p, 100);
    for z in ZS {
        let qp = qp(z);
        for &st in &states {
            let (w1, w2) = wave_residuals(&p, &qp, st).unwrap();
            let u = fundamental_u(&p, st).unwrap().value();
            let scale = ((u / qp.q()).norm() * psi(&p, &qp, st).unwrap().norm()).max(1.0);
            assert!(w1.norm().max(w2.norm()) <= 1e-12 * scale, "z={z} {st:?}");
        }
    }
}

#[test]
fn quantisation_and_reduction_commute() {
    let p = GasParams {
        n: 2.0,
        kb: 0.5,
        u0: 3.0,
        vref: 1.5,
    };
    let states = Sampler::new(22).states(&p, 100);
    for z in ZS {
        let qp = QuantumParams::new(&p, 0.7, z).unwrap();
        for &st in &states {
            let rc = to_reduced(&p, st).unwrap();
            let full = psi(&p, &qp, st).unwrap();
            let reduced = reduced_psi_jet(&p, &qp, rc).value();
            assert!(
                (full - reduced).norm() <= 1e-13 * full.norm().max(f64::MIN_POSITIVE),
                "z={z} {st:?}: {full} vs {reduced}"
            );
            let (wy, wx) = reduced_wave_residuals(&p, &qp, rc.x, rc.y);
            assert_eq!(wy.norm(), 0.0);
            let scale = (reduced_psi_jet(&p, &qp, rc).value().norm() / qp.q().norm()).max(1.0);
            assert!(wx.norm() <= 1e-12 * scale * p.u0.max(1.0) * 10.0);
        }
    }
}

#[test]
fn commutators_on_five_test_functions() {
    let p = unit();
    let points = Sampler::new(23).states(&p, 20);
    let psi_state = GasState::new(&p, &qp(c(0.5, 0.5)));
    let fns: Vec<Box<dyn Fn(StateSV) -> Result<ComplexJet2<2>, QuantumError>>> = vec![
        Box::new(|_| Ok(ComplexJet2::constant(c(1.0, 0.0)))),
        Box::new(|st| Ok(Jet2::<2>::variable(0, st.s)?.to_complex())),
        Box::new(|st| {
            let s = Jet2::<2>::variable(0, st.s)?;
            let v = Jet2::<2>::variable(1, st.v)?;
            Ok((s.exp() * v).to_complex())
        }),
        Box::new(|st| {
            let s = Jet2::<2>::variable(0, st.s)?;
            let v = Jet2::<2>::variable(1, st.v)?;
            Ok((s * s * v.ln()?).to_complex())
        }),
        Box::new(move |st| psi_state.jet(st)),
    ];
    for q in [c(1.0, 0.0), c(0.0, 1.0), c(-2.0, 0.5)] {
        for f in &fns {
            for &st in &points {
                let scale = f(st).unwrap().value().norm().max(1.0) * 10.0 * q.norm().max(1.0);
                let dev = commutator_check(f, q, &[st]).unwrap();
                assert!(dev <= 1e-12 * scale, "q={q} {st:?}: {dev}");
            }
        }
    }
}

#[test]
fn eigen_relation_makes_momenta_real() {
    let p = unit();
    for z in ZS {
        let qp = qp(z);
        for st in Sampler::new(24).states(&p, 50) {
            let (rt, rp) = pointwise_eigen_check(&p, &qp, st).unwrap();
            let m = psi(&p, &qp, st).unwrap().norm().max(f64::MIN_POSITIVE);
            assert!(rt.norm() <= 1e-12 * m.max(1.0) && rp.norm() <= 1e-12 * m.max(1.0));
        }
    }
    for z in [c(1.0, 0.0), c(0.0, 1.0), c(2.0, 3.0), c(-1.0, 0.0)] {
        let qp = qp(z);
        let ops = [Observable::Temperature, Observable::Pressure];
        let r = expectations(
            &p,
            qp.q(),
            &GasState::new(&p, &qp),
            &ops,
            &Box2::unit(),
            &Default::default(),
            IMAG_TOL,
        )
        .unwrap();
        for e in r {
            assert!(!e.imaginary, "z={z}: {} = {}", e.label, e.normalized);
            assert!(e.normalized.im.abs() <= 1e-10);
        }
    }
}

#[test]
fn ehrenfest_in_every_ordering() {
    let p = unit();
    let b = Box2::unit();
    let rule = QuadratureRule::default();
    for z in [c(1.0, 0.0), c(0.0, 1.0), c(2.0, 3.0)] {
        let qp = qp(z);
        let psi = GasState::new(&p, &qp);
        for src in ["p*V - N*kB*T", "U - 3/2*N*kB*T"] {
            for ord in [Ordering::Vp, Ordering::PV, Ordering::Weyl] {
                let op = compile_quantized(&parse(src).unwrap(), ord, qp.q()).unwrap();
                let e = &expectations(
                    &p,
                    qp.q(),
                    &psi,
                    &[Observable::Law(op.clone())],
                    &b,
                    &rule,
                    IMAG_TOL,
                )
                .unwrap()[0];
                let shift = integrate(
                    |st| {
                        let v = psi.value(st)?;
                        Ok(v.norm_sqr() * op.ordering_shift(&p, st)?)
                    },
                    &b,
                    &rule,
                )
                .unwrap()
                    / e.norm2;
                assert!(
                    (e.normalized - shift).norm() <= 1e-12,
                    "z={z} [{ord}] {src}"
                );
                if ord == Ordering::Vp {
                    assert!(e.normalized.norm() <= 1e-12);
                }
            }
        }
    }
}

#[test]
fn gauge_invariance_for_several_shifts() {
    let rule = QuadratureRule::default();
    for z in [c(1.0, 0.0), c(0.0, 1.0), c(2.0, 3.0)] {
        for shift in [-1.0, 0.5, 10.0] {
            let r = gauge_check(&unit(), &qp(z), shift, &Box2::unit(), &rule).unwrap();
            assert!(r.pointwise <= 1e-13, "z={z} C={shift}: {}", r.pointwise);
            assert!(
                r.expectations <= 1e-12,
                "z={z} C={shift}: {}",
                r.expectations
            );
        }
    }
}

/// Largest relative change in `‖ψ‖²` and the expectations between two rules.
fn change(a: &[ExpectationReport], f: &[ExpectationReport]) -> f64 {
    let n = ((f[0].norm2 - a[0].norm2) / a[0].norm2).abs();
    a.iter()
        .zip(f)
        .map(|(x, y)| (x.normalized - y.normalized).norm() / x.normalized.norm().max(1.0))
        .fold(n, f64::max)
}

#[test]
fn norms_are_finite_and_converged() {
    let p = unit();
    let boxes = [Box2::unit(), Box2::new(-1.0, 2.0, 0.5, 3.0).unwrap()];
    for z in [c(1.0, 0.0), c(0.0, 1.0), c(2.0, 3.0), c(-1.0, 0.0)] {
        let qp = qp(z);
        let psi = GasState::new(&p, &qp);
        for b in &boxes {
            let rule = QuadratureRule::default();
            let d = density_report(&psi, b, &rule).unwrap();
            assert!(d.is_density() && d.l1.is_finite());
            let levels: Vec<_> = [rule, rule.refined(), rule.refined().refined()]
                .iter()
                .map(|r| {
                    expectations(&p, qp.q(), &psi, &Observable::basic(), b, r, IMAG_TOL).unwrap()
                })
                .collect();
            let first = change(&levels[0], &levels[1]);
            let second = change(&levels[1], &levels[2]);
            assert!(second < 1e-9, "z={z} {b:?}: {second}");
            assert!(
                first < 1e-9 || second < first * 1e-2,
                "z={z} {b:?}: {first} -> {second}"
            );
        }
    }
    let q_i = qp(c(0.0, 1.0));
    let psi_i = |st| psi(&p, &q_i, st);
    let b = Box2::new(-0.5, 1.5, 1.0, 4.0).unwrap();
    let norm = inner_product(psi_i, psi_i, &b, &QuadratureRule::default()).unwrap();
    assert!((norm.re - b.measure()).abs() <= 1e-12 * b.measure());
}

#[test]
fn hermiticity_defect_matches_face_flux() {
    let b = Box2::new(0.0, 1.0, 1.0, 2.0).unwrap();
    let rule = QuadratureRule::default();
    let g = |st: StateSV| {
        let s = Jet2::<2>::variable(0, st.s)?;
        let v = Jet2::<2>::variable(1, st.v)?;
        Ok((s * v + s.exp()).to_complex())
    };
    for z in [c(1.0, 0.0), c(0.0, 1.0), c(0.3, -2.0)] {
        let qp = qp(z);
        let psi = GasState::new(&unit(), &qp);
        let r = hermiticity_diagnostic(&qp, &b, &rule, &psi, &g).unwrap();
        assert!(r.mismatch() <= 1e-10, "z={z}: {r:?}");
        if z.re == 0.0 {
            assert_eq!(r.interior, c(0.0, 0.0));
        }
    }
    let periodic = |st: StateSV| {
        let s = Jet2::<2>::variable(0, st.s)?;
        let v = Jet2::<2>::variable(1, st.v)?;
        Ok((s * s.scale(-1.0).offset(1.0) * v).offset(1.0).to_complex())
    };
    let r = hermiticity_diagnostic(&qp(c(0.0, 1.0)), &b, &rule, &periodic, &periodic).unwrap();
    assert!(
        r.defect.norm() <= 1e-10 && r.face_flux.norm() <= 1e-10,
        "{r:?}"
    );
}

#[test]
fn zero_norm_is_an_error() {
    // ψ underflows on the whole box when q is tiny
    let p = unit();
    let tiny = qp(c(1e-5, 0.0));
    let r = expectations(
        &p,
        tiny.q(),
        &GasState::new(&p, &tiny),
        &[Observable::Entropy],
        &Box2::unit(),
        &QuadratureRule::default(),
        IMAG_TOL,
    );
    assert_eq!(r.unwrap_err(), QuantumError::ZeroNorm);
}
