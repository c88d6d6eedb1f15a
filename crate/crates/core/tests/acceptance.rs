mod common;

use std::path::Path;
use std::process::{Command, ExitCode};

use common::CORPUS;
use idealgas_contact::contact::{
    contact_volume, first_law_residual, restriction_identity_residual, ChartPoint, Convention,
};
use idealgas_contact::dsl::{compile_classical, compile_quantized, parse, DslError, Ordering};
use idealgas_contact::jets::{fd_oracle, ComplexJet2, Jet2, FD_STEP};
use idealgas_contact::potentials::{
    conjugates, eos_residuals, from_reduced, fundamental_u, integrate_reduced_ode, p_x,
    pde_residuals, pde_residuals_of, reduced_u, reduced_u_xy, to_reduced, GasParams, Potential,
    StateSV, ThermoError,
};
use idealgas_contact::quantum::diagnostics::IMAG_TOL;
use idealgas_contact::quantum::{
    commutator_check, expectations, gauge_check, hermiticity_diagnostic, inner_product, psi,
    reduced_psi_jet, wave_residuals, Box2, GasState, Observable, QuadratureRule, QuantumError,
    QuantumParams,
};
use idealgas_contact::sampling::Sampler;
use num_complex::Complex64;

/// Worst-case metrics of one criterion against their tolerances.
struct Gate {
    parts: Vec<String>,
    ok: bool,
}

impl Gate {
    fn new() -> Self {
        Self {
            parts: Vec::new(),
            ok: true,
        }
    }

    fn at_most(&mut self, label: &str, metric: f64, tol: f64) -> &mut Self {
        let pass = metric <= tol;
        self.ok &= pass;
        self.parts.push(format!(
            "{label}={metric:.2e}{}{tol:.0e}",
            if pass { "<=" } else { ">" }
        ));
        self
    }

    fn holds(&mut self, label: &str, pass: bool) -> &mut Self {
        self.ok &= pass;
        self.parts
            .push(format!("{label}={}", if pass { "yes" } else { "NO" }));
        self
    }

    fn finish(&mut self) -> Result<String, String> {
        let text = self.parts.join(", ");
        if self.ok {
            Ok(text)
        } else {
            Err(text)
        }
    }
}

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn sv(s: f64, v: f64) -> Result<[Jet2<2>; 2], ThermoError> {
    Ok([Jet2::variable(0, s)?, Jet2::variable(1, v)?])
}

struct Perturbed(GasParams);

impl Potential for Perturbed {
    fn energy(&self, st: StateSV) -> Result<Jet2<2>, ThermoError> {
        let [s, v] = sv(st.s, st.v)?;
        Ok(fundamental_u(&self.0, st)? + (s * v).scale(0.1))
    }
}

fn pde_of_state() -> Outcome {
    let mut rng = Sampler::new(1);
    let (mut worst, mut control) = (0.0f64, f64::INFINITY);
    for _ in 0..5 {
        let p = rng.gas_params();
        let mut bad = 0.0f64;
        for st in rng.states(&p, 100) {
            let scale = fundamental_u(&p, st).unwrap().value().max(1.0);
            let (g1, g2) = pde_residuals(&p, st).unwrap();
            worst = worst.max(g1.abs().max(g2.abs()) / scale);
            let (b1, b2) = pde_residuals_of(&Perturbed(p), &p, st).unwrap();
            bad = bad.max(b1.abs().max(b2.abs()) / scale);
        }
        control = control.min(bad);
    }
    Gate::new()
        .at_most("residual", worst, 1e-12)
        .holds("perturbed potential fails", control > 1e-12)
        .finish()
}

fn equations_of_state() -> Outcome {
    let mut rng = Sampler::new(2);
    let (mut eos, mut fd) = (0.0f64, 0.0f64);
    for _ in 0..5 {
        let p = rng.gas_params();
        for st in rng.states(&p, 100) {
            let u = fundamental_u(&p, st).unwrap().value();
            let cj = conjugates(&p, st).unwrap();
            let (r1, r2) = eos_residuals(&p, st).unwrap();
            eos = eos.max((r1 / (cj.p * st.v)).abs()).max((r2 / u).abs());
            let f = |[s, v]: [f64; 2]| fundamental_u(&p, StateSV { s, v }).ok().map(|u| u.value());
            let num = fd_oracle(f, [st.s, st.v], FD_STEP).unwrap();
            fd = fd
                .max((cj.t - num.grad[0]).abs() / cj.t.abs().max(1.0))
                .max((cj.p + num.grad[1]).abs() / cj.p.abs().max(1.0));
        }
    }
    Gate::new()
        .at_most("relative residual", eos, 1e-12)
        .at_most("AD vs FD", fd, 1e-6)
        .finish()
}

fn reduction() -> Outcome {
    let mut rng = Sampler::new(3);
    let (mut energy, mut round, mut dy) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..5 {
        let p = rng.gas_params();
        for st in rng.states(&p, 100) {
            let rc = to_reduced(&p, st).unwrap();
            let u = fundamental_u(&p, st).unwrap().value();
            energy = energy.max(((reduced_u(&p, rc.x).value() - u) / u).abs());
            let back = from_reduced(&p, rc);
            round = round
                .max((back.s - st.s).abs() / st.s.abs().max(1.0))
                .max((back.v - st.v).abs() / st.v);
            dy = dy.max(reduced_u_xy(&p, rc).grad()[1].abs());
        }
    }
    Gate::new()
        .at_most("U relative", energy, 1e-12)
        .holds("dU/dy == 0", dy == 0.0)
        .at_most("round trip", round, 1e-12)
        .finish()
}

fn conjugate_momentum() -> Outcome {
    let p = GasParams::unit();
    let mut worst = 0.0f64;
    for st in Sampler::new(4).states(&p, 100) {
        let x = to_reduced(&p, st).unwrap().x;
        let px = p_x(&p, x);
        let u = reduced_u(&p, x).value();
        let t = conjugates(&p, st).unwrap().t;
        worst = worst
            .max(((px - 2.0 / 3.0 * u) / px).abs())
            .max(((px - p.nkb() * t) / px).abs());
    }
    Gate::new().at_most("relative", worst, 1e-12).finish()
}

fn rk4() -> Outcome {
    let p = GasParams::unit();
    let exact = reduced_u(&p, 3.0).value();
    let err = |n| (integrate_reduced_ode(&p, 0.0, 3.0, n).unwrap() - exact).abs();
    let order = (err(10) / err(20)).log2();
    Gate::new()
        .at_most("1000 steps relative", err(1000) / exact, 1e-10)
        .holds(
            &format!("order {order:.3} in [3.8, 4.2]"),
            (3.8..=4.2).contains(&order),
        )
        .finish()
}

fn contact_identities() -> Outcome {
    let mut rng = Sampler::new(6);
    let p = GasParams::unit();
    let mut first_law = 0.0f64;
    for st in rng.states(&p, 100) {
        let r = first_law_residual(&p, st, Convention::Standard).unwrap();
        first_law = first_law.max(r[0].abs()).max(r[1].abs());
    }
    let (mut restriction, mut common) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let (x, y) = (rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0));
        let r = restriction_identity_residual(&p, x, y).unwrap();
        restriction = restriction.max(r.max_residual());
        common = common.max((r.common_dx - 4.0 / 3.0 * reduced_u(&p, x).value()).abs());
    }
    let mut volume = 0.0f64;
    for st in rng.states(&p, 50) {
        let point = ChartPoint::equilibrium(&p, st).unwrap();
        for conv in [Convention::Paper, Convention::Standard] {
            volume = volume.max((contact_volume(&point, conv).unwrap().abs() - 2.0).abs());
        }
    }
    Gate::new()
        .at_most("first law", first_law, 1e-12)
        .at_most("restriction", restriction, 1e-12)
        .at_most("dx coefficient", common, 1e-12)
        .at_most("|volume| - 2", volume, 1e-13)
        .finish()
}

const ZS: [Complex64; 5] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(2.0, 3.0),
    Complex64::new(1e-3, 0.0),
];

fn wave_equations() -> Outcome {
    let p = GasParams::unit();
    let states = Sampler::new(7).states(&p, 100);
    let (mut wave, mut square) = (0.0f64, 0.0f64);
    for z in ZS {
        let qp = QuantumParams::new(&p, 1.0, z).unwrap();
        for &st in &states {
            let (w1, w2) = wave_residuals(&p, &qp, st).unwrap();
            let u = fundamental_u(&p, st).unwrap().value();
            let full = psi(&p, &qp, st).unwrap();
            let scale = ((u / qp.q()).norm() * full.norm()).max(1.0);
            wave = wave.max(w1.norm().max(w2.norm()) / scale);
            let reduced = reduced_psi_jet(&p, &qp, to_reduced(&p, st).unwrap()).value();
            square = square.max((full - reduced).norm() / full.norm().max(f64::MIN_POSITIVE));
        }
    }
    Gate::new()
        .at_most("scaled residual", wave, 1e-12)
        .at_most("square", square, 1e-13)
        .finish()
}

fn commutators() -> Outcome {
    let p = GasParams::unit();
    let qp = QuantumParams::new(&p, 1.0, c(1.0, 0.0)).unwrap();
    let points = Sampler::new(8).states(&p, 20);
    let state = GasState::new(&p, &qp);
    let fns: Vec<Box<dyn Fn(StateSV) -> Result<ComplexJet2<2>, QuantumError>>> = vec![
        Box::new(|_| Ok(ComplexJet2::constant(c(1.0, 0.0)))),
        Box::new(|st| Ok(sv(st.s, st.v)?[0].to_complex())),
        Box::new(|st| {
            let [s, v] = sv(st.s, st.v)?;
            Ok((s.exp() * v).to_complex())
        }),
        Box::new(|st| {
            let [s, v] = sv(st.s, st.v)?;
            Ok((s * s * v * v * v).to_complex())
        }),
        Box::new(move |st| idealgas_contact::quantum::Wavefunction::jet(&state, st)),
    ];
    let mut worst = 0.0f64;
    for f in &fns {
        worst = worst.max(commutator_check(f, qp.q(), &points).unwrap());
    }
    Gate::new().at_most("deviation", worst, 1e-12).finish()
}

fn ehrenfest() -> Outcome {
    let p = GasParams::unit();
    let (mut law, mut imag) = (0.0f64, 0.0f64);
    for z in [c(1.0, 0.0), c(0.0, 1.0)] {
        let qp = QuantumParams::new(&p, 1.0, z).unwrap();
        let mut ops = vec![Observable::Temperature, Observable::Pressure];
        for src in ["p*V - N*kB*T", "U - 3/2*N*kB*T"] {
            ops.push(Observable::Law(
                compile_quantized(&parse(src).unwrap(), Ordering::Vp, qp.q()).unwrap(),
            ));
        }
        let r = expectations(
            &p,
            qp.q(),
            &GasState::new(&p, &qp),
            &ops,
            &Box2::unit(),
            &QuadratureRule::default(),
            IMAG_TOL,
        )
        .unwrap();
        imag = imag
            .max(r[0].normalized.im.abs())
            .max(r[1].normalized.im.abs());
        law = law.max(r[2].normalized.norm()).max(r[3].normalized.norm());
    }
    Gate::new()
        .at_most("<law>", law, 1e-12)
        .at_most("Im <T>, <p>", imag, 1e-10)
        .finish()
}

fn gauge() -> Outcome {
    let p = GasParams::unit();
    let (mut point, mut exp) = (0.0f64, 0.0f64);
    for z in [c(1.0, 0.0), c(0.0, 1.0)] {
        let qp = QuantumParams::new(&p, 1.0, z).unwrap();
        for shift in [-1.0, 0.5, 10.0] {
            let r = gauge_check(&p, &qp, shift, &Box2::unit(), &QuadratureRule::default()).unwrap();
            point = point.max(r.pointwise);
            exp = exp.max(r.expectations);
        }
    }
    Gate::new()
        .at_most("pointwise", point, 1e-13)
        .at_most("expectations", exp, 1e-12)
        .finish()
}

fn self_convergence() -> Outcome {
    let p = GasParams::unit();
    let b = Box2::unit();
    let rule = QuadratureRule::default();
    let mut worst = 0.0f64;
    for z in [c(1.0, 0.0), c(0.0, 1.0), c(2.0, 3.0)] {
        let qp = QuantumParams::new(&p, 1.0, z).unwrap();
        let state = GasState::new(&p, &qp);
        let a = expectations(
            &p,
            qp.q(),
            &state,
            &Observable::basic(),
            &b,
            &rule,
            IMAG_TOL,
        )
        .unwrap();
        let f = expectations(
            &p,
            qp.q(),
            &state,
            &Observable::basic(),
            &b,
            &rule.refined(),
            IMAG_TOL,
        )
        .unwrap();
        worst = worst.max(((f[0].norm2 - a[0].norm2) / a[0].norm2).abs());
        for (x, y) in a.iter().zip(&f) {
            worst = worst.max((x.normalized - y.normalized).norm() / x.normalized.norm().max(1.0));
        }
    }
    let qi = QuantumParams::new(&p, 1.0, c(0.0, 1.0)).unwrap();
    let psi_i = |st| psi(&p, &qi, st);
    let measure = inner_product(psi_i, psi_i, &b, &rule).unwrap();
    Gate::new()
        .at_most("8->16 relative change", worst, 1e-9)
        .at_most("|psi_i|^2 - measure", (measure - b.measure()).norm(), 1e-12)
        .finish()
}

fn hermiticity() -> Outcome {
    let p = GasParams::unit();
    let b = Box2::unit();
    let rule = QuadratureRule::default();
    let g = |st: StateSV| {
        let [s, v] = sv(st.s, st.v)?;
        Ok((s.exp() * v).to_complex())
    };
    let mut mismatch = 0.0f64;
    for z in [c(1.0, 0.0), c(0.0, 1.0), c(2.0, 3.0)] {
        let qp = QuantumParams::new(&p, 1.0, z).unwrap();
        let r = hermiticity_diagnostic(&qp, &b, &rule, &GasState::new(&p, &qp), &g).unwrap();
        mismatch = mismatch.max(r.mismatch());
    }
    let periodic = |st: StateSV| {
        let [s, v] = sv(st.s, st.v)?;
        Ok((s * s.scale(-1.0).offset(1.0) * v).offset(1.0).to_complex())
    };
    let qp = QuantumParams::new(&p, 1.0, c(1.0, 0.0)).unwrap();
    let r = hermiticity_diagnostic(&qp, &b, &rule, &periodic, &periodic).unwrap();
    Gate::new()
        .at_most("defect vs face flux", mismatch, 1e-10)
        .at_most("periodic defect", r.defect.norm(), 1e-10)
        .finish()
}

fn dsl() -> Outcome {
    let mut gate = Gate::new();
    let round_trip = CORPUS.iter().all(|src| {
        parse(src).is_ok_and(|ast| parse(&ast.to_string()).is_ok_and(|again| again == ast))
    });
    gate.holds(
        &format!("{} expressions round trip", CORPUS.len()),
        round_trip,
    );

    let mut rng = Sampler::new(13);
    let mut classical = 0.0f64;
    for _ in 0..5 {
        let p = rng.gas_params();
        let law = compile_classical(&parse("p*V - N*kB*T").unwrap(), &p).unwrap();
        let equip = compile_classical(&parse("U - 3/2*N*kB*T").unwrap(), &p).unwrap();
        for st in rng.states(&p, 100) {
            let (r1, r2) = eos_residuals(&p, st).unwrap();
            let scale = fundamental_u(&p, st).unwrap().value().max(1.0);
            classical = classical
                .max((law.evaluate(st).unwrap() - r1).abs() / scale)
                .max((equip.evaluate(st).unwrap() - r2).abs() / scale);
        }
    }
    gate.at_most("classical vs direct", classical, 1e-13);

    let p = GasParams::unit();
    let mut ordering = 0.0f64;
    for q in [c(1.0, 0.0), c(0.0, 1.0), c(2.0, 3.0)] {
        let vp = compile_quantized(&parse("p*V - N*kB*T").unwrap(), Ordering::Vp, q).unwrap();
        let pv = vp.with_ordering(Ordering::PV);
        for st in rng.states(&p, 50) {
            let psi = fundamental_u(&p, st)
                .unwrap()
                .to_complex()
                .scale(-1.0 / q)
                .exp();
            let d = pv.apply(&p, st, &psi).unwrap() - vp.apply(&p, st, &psi).unwrap();
            let expected = q * psi.value();
            ordering = ordering.max((d - expected).norm() / expected.norm().max(1.0));
        }
    }
    gate.at_most("pV - Vp - q psi", ordering, 1e-12);

    let rejected = matches!(
        compile_quantized(&parse("p*T").unwrap(), Ordering::Vp, c(1.0, 0.0)),
        Err(DslError::NotAffine { pos: 0, .. })
    );
    gate.holds("p*T rejected at 0", rejected).finish()
}

fn cli_determinism() -> Outcome {
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/unit.json");
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_idealgas"))
            .args(["all", "--config", cfg.to_str().unwrap(), "--format", "json"])
            .output()
            .map_err(|e| e.to_string())
    };
    let (a, b) = (run()?, run()?);
    Gate::new()
        .holds(
            "byte-identical",
            a.stdout == b.stdout && !a.stdout.is_empty(),
        )
        .holds(
            "exit 0",
            a.status.code() == Some(0) && b.status.code() == Some(0),
        )
        .finish()
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 14] = [
        ("PDE-of-state identity", pde_of_state),
        ("Equations of state", equations_of_state),
        ("Reduction", reduction),
        ("Conjugate-momentum identity", conjugate_momentum),
        ("RK4 on the reduced ODE", rk4),
        ("Contact identities", contact_identities),
        ("Wave equations", wave_equations),
        ("Commutators", commutators),
        ("Ehrenfest", ehrenfest),
        ("Gauge invariance", gauge),
        ("Quadrature self-convergence", self_convergence),
        ("Hermiticity diagnostic", hermiticity),
        ("DSL", dsl),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}. {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
