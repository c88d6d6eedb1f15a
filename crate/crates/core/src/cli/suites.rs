//! The verification suites behind each subcommand.

use std::error::Error;

use num_complex::Complex64;

use super::config::RunConfig;
use super::report::{CheckOutcome, Status};
use crate::contact::{
    contact_volume, first_law_residual, reduced_contact_volume, restriction_identity_residual,
    Chart, ChartPoint, Convention,
};
use crate::dsl::{compile_classical, compile_quantized, parse, CompiledOperator, DslError, Expr};
use crate::jets::{fd_oracle, ComplexJet2, Jet2, FD_STEP};
use crate::potentials::{
    conjugates, eos_residuals, from_reduced, fundamental_u, integrate_reduced_ode, p_x,
    pde_residuals, reduced_u, reduced_u_xy, to_reduced, GasParams, StateSV,
};
use crate::quantum::quadrature::integrate;
use crate::quantum::{
    commutators_at, density_report, expectations, gauge_check, hermiticity_diagnostic,
    pointwise_eigen_check, reduced_psi_jet, reduced_wave_residuals, uncertainty_report,
    wave_residuals, GasState, Observable, QuantumError, QuantumParams, UncertaintyPair, Verdict,
    Wavefunction,
};
use crate::sampling::Sampler;

/// The two equations of state, in DSL form.
pub const PAPER_LAWS: [&str; 2] = ["p*V - N*kB*T", "U - 3/2*N*kB*T"];

type Fallible<T> = Result<T, Box<dyn Error>>;

pub struct Context {
    pub cfg: RunConfig,
    pub qp: QuantumParams,
    pub states: Vec<StateSV>,
}

impl Context {
    pub fn new(cfg: RunConfig) -> Result<Self, QuantumError> {
        let qp = cfg.quantum_params()?;
        let states = Sampler::new(cfg.sweep.seed).states(&cfg.gas, cfg.sweep.count);
        Ok(Self { cfg, qp, states })
    }

    fn gas(&self) -> &GasParams {
        &self.cfg.gas
    }
}

/// Running maximum of a metric and where it occurred. NaN sticks.
struct Worst {
    metric: f64,
    location: String,
}

impl Worst {
    fn see(&mut self, metric: f64, at: impl FnOnce() -> String) {
        if !self.metric.is_nan() && !(metric <= self.metric) {
            self.metric = metric;
            self.location = at();
        }
    }
}

fn sweep(suite: &str, tol: f64, body: impl FnOnce(&mut Worst) -> Fallible<()>) -> CheckOutcome {
    let mut w = Worst {
        metric: f64::NEG_INFINITY,
        location: "-".into(),
    };
    match body(&mut w) {
        Ok(()) => CheckOutcome::judged(suite, w.metric.max(0.0), tol, w.location),
        Err(e) => CheckOutcome::error(suite, e.to_string()),
    }
}

fn loc(st: StateSV) -> String {
    format!("S={:e}, V={:e}", st.s, st.v)
}

fn rel(err: f64, scale: f64) -> f64 {
    err / scale.abs().max(1.0)
}

pub fn classical(ctx: &Context) -> Vec<CheckOutcome> {
    let gas = ctx.gas();
    let tol = ctx.cfg.tolerances;
    vec![
        sweep("classical.ideal_gas_law", tol.residual, |w| {
            for &st in &ctx.states {
                let u = fundamental_u(gas, st)?.value();
                w.see(rel(eos_residuals(gas, st)?.0.abs(), u), || loc(st));
            }
            Ok(())
        }),
        sweep("classical.equipartition", tol.residual, |w| {
            for &st in &ctx.states {
                let u = fundamental_u(gas, st)?.value();
                w.see(rel(eos_residuals(gas, st)?.1.abs(), u), || loc(st));
            }
            Ok(())
        }),
        sweep("classical.pde_of_state", tol.residual, |w| {
            for &st in &ctx.states {
                let u = fundamental_u(gas, st)?.value();
                let (g1, g2) = pde_residuals(gas, st)?;
                w.see(rel(g1.abs().max(g2.abs()), u), || loc(st));
            }
            Ok(())
        }),
        sweep("classical.conjugates_vs_fd", tol.fd, |w| {
            for &st in &ctx.states {
                let c = conjugates(gas, st)?;
                let f =
                    |[s, v]: [f64; 2]| fundamental_u(gas, StateSV { s, v }).ok().map(|u| u.value());
                let fd = fd_oracle(f, [st.s, st.v], FD_STEP)?;
                let dt = rel(c.t - fd.grad[0], c.t);
                let dp = rel(c.p + fd.grad[1], c.p);
                w.see(dt.abs().max(dp.abs()), || loc(st));
            }
            Ok(())
        }),
    ]
}

pub fn reduce(ctx: &Context) -> Vec<CheckOutcome> {
    let gas = ctx.gas();
    let tol = ctx.cfg.tolerances;
    let mut out = vec![
        sweep("reduce.round_trip", tol.residual, |w| {
            for &st in &ctx.states {
                let back = from_reduced(gas, to_reduced(gas, st)?);
                let e = rel(back.s - st.s, st.s)
                    .abs()
                    .max(rel(back.v - st.v, st.v).abs());
                w.see(e, || loc(st));
            }
            Ok(())
        }),
        sweep("reduce.reduced_energy", tol.residual, |w| {
            for &st in &ctx.states {
                let u = fundamental_u(gas, st)?.value();
                let x = to_reduced(gas, st)?.x;
                w.see(rel(reduced_u(gas, x).value() - u, u).abs(), || loc(st));
            }
            Ok(())
        }),
        sweep("reduce.y_independence", tol.residual, |w| {
            for &st in &ctx.states {
                let rc = to_reduced(gas, st)?;
                w.see(reduced_u_xy(gas, rc).grad()[1].abs(), || loc(st));
            }
            Ok(())
        }),
        sweep("reduce.conjugate_momentum", tol.residual, |w| {
            for &st in &ctx.states {
                let x = to_reduced(gas, st)?.x;
                let px = p_x(gas, x);
                let u = fundamental_u(gas, st)?.value();
                let t = conjugates(gas, st)?.t;
                let e = rel(px - 2.0 / 3.0 * u, px)
                    .abs()
                    .max(rel(px - gas.nkb() * t, px).abs());
                w.see(e, || loc(st));
            }
            Ok(())
        }),
        sweep("reduce.rk4", tol.ode, |w| {
            let exact = reduced_u(gas, 3.0).value();
            let got = integrate_reduced_ode(gas, 0.0, 3.0, 1000)?;
            w.see(((got - exact) / exact).abs(), || {
                "x0=0, x1=3, steps=1000".into()
            });
            Ok(())
        }),
    ];
    let exact = reduced_u(gas, 3.0).value();
    let err = |n| -> Fallible<f64> { Ok((integrate_reduced_ode(gas, 0.0, 3.0, n)? - exact).abs()) };
    out.push(match (err(10), err(20)) {
        (Ok(e1), Ok(e2)) => {
            let order = (e1 / e2).log2();
            CheckOutcome::judged(
                "reduce.rk4_order",
                (order - 4.0).abs(),
                tol.order,
                format!("steps 10 -> 20, order={order:e}"),
            )
        }
        (Err(e), _) | (_, Err(e)) => CheckOutcome::error("reduce.rk4_order", e.to_string()),
    });
    out
}

fn convention_name(c: Convention) -> &'static str {
    match c {
        Convention::Paper => "paper",
        Convention::Standard => "standard",
    }
}

pub fn contact(ctx: &Context) -> Vec<CheckOutcome> {
    let gas = ctx.gas();
    let tol = ctx.cfg.tolerances;
    let mut out = Vec::new();
    for conv in ctx.cfg.convention.conventions() {
        let name = convention_name(conv);
        out.push(sweep(
            &format!("contact.first_law.{name}"),
            tol.residual,
            |w| {
                for &st in &ctx.states {
                    let c = conjugates(gas, st)?;
                    let expected = match conv {
                        Convention::Standard => [0.0, 0.0],
                        Convention::Paper => [2.0 * c.t, -2.0 * c.p],
                    };
                    let r = first_law_residual(gas, st, conv)?;
                    let scale = c.t.abs().max(c.p.abs());
                    let e = rel(r[0] - expected[0], scale)
                        .abs()
                        .max(rel(r[1] - expected[1], scale).abs());
                    w.see(e, || loc(st));
                }
                Ok(())
            },
        ));
        out.push(sweep(
            &format!("contact.volume.{name}"),
            tol.residual,
            |w| {
                for &st in &ctx.states {
                    let vol = contact_volume(&ChartPoint::equilibrium(gas, st)?, conv)?;
                    w.see((vol.abs() - 2.0).abs(), || loc(st));
                }
                Ok(())
            },
        ));
    }
    out.push(sweep("contact.restriction", tol.residual, |w| {
        for &st in &ctx.states {
            let rc = to_reduced(gas, st)?;
            let r = restriction_identity_residual(gas, rc.x, rc.y)?;
            let u = reduced_u(gas, rc.x).value();
            let e = rel(r.max_residual(), u).max(rel(r.common_dx - 4.0 / 3.0 * u, u).abs());
            w.see(e, || format!("x={:e}, y={:e}", rc.x, rc.y));
        }
        Ok(())
    }));
    out.push(sweep("contact.reduced_volume", tol.residual, |w| {
        for &st in &ctx.states {
            let x = to_reduced(gas, st)?.x;
            let u = reduced_u(gas, x);
            let point = ChartPoint::new(Chart::Reduced, vec![x, u.grad()[0], u.value()])?;
            w.see((reduced_contact_volume(&point)?.abs() - 1.0).abs(), || {
                format!("x={x:e}")
            });
        }
        Ok(())
    }));
    out
}

fn jet_s(st: StateSV) -> Result<Jet2<2>, QuantumError> {
    Ok(Jet2::variable(0, st.s)?)
}

fn jet_v(st: StateSV) -> Result<Jet2<2>, QuantumError> {
    Ok(Jet2::variable(1, st.v)?)
}

/// `exp(S)·V`.
pub fn exp_s_times_v(st: StateSV) -> Result<ComplexJet2<2>, QuantumError> {
    Ok((jet_s(st)?.exp() * jet_v(st)?).to_complex())
}

/// Test functions for the commutator check; the last is the gas state.
fn commutator_test_functions(
    ctx: &Context,
) -> Vec<(
    &'static str,
    Box<dyn Fn(StateSV) -> Result<ComplexJet2<2>, QuantumError> + '_>,
)> {
    let psi = GasState::new(ctx.gas(), &ctx.qp);
    vec![
        (
            "1",
            Box::new(|_| Ok(ComplexJet2::constant(Complex64::new(1.0, 0.0)))),
        ),
        ("S", Box::new(|st| Ok(jet_s(st)?.to_complex()))),
        ("exp(S)*V", Box::new(exp_s_times_v)),
        (
            "S^2*V^3",
            Box::new(|st| {
                let (s, v) = (jet_s(st)?, jet_v(st)?);
                Ok((s * s * v * v * v).to_complex())
            }),
        ),
        ("psi", Box::new(move |st| psi.jet(st))),
    ]
}

pub fn quantize(ctx: &Context) -> Vec<CheckOutcome> {
    let gas = ctx.gas();
    let qp = &ctx.qp;
    let q = qp.q();
    let tol = ctx.cfg.tolerances;
    let mut out = vec![
        sweep("quantize.wave_equations", tol.residual, |w| {
            for &st in &ctx.states {
                let (w1, w2) = wave_residuals(gas, qp, st)?;
                let u = fundamental_u(gas, st)?.value();
                let psi = GasState::new(gas, qp).value(st)?;
                let scale = (u / q).norm() * psi.norm();
                w.see(rel(w1.norm().max(w2.norm()), scale), || loc(st));
            }
            Ok(())
        }),
        sweep("quantize.reduced_wave_equations", tol.residual, |w| {
            for &st in &ctx.states {
                let rc = to_reduced(gas, st)?;
                let (wy, wx) = reduced_wave_residuals(gas, qp, rc.x, rc.y);
                let psi = GasState::new(gas, qp).value(st)?;
                let reduced = reduced_psi_jet(gas, qp, rc).value();
                let u = reduced_u(gas, rc.x).value();
                let e = rel(wy.norm().max(wx.norm()), (u / q).norm() * psi.norm())
                    .max(rel((reduced - psi).norm(), psi.norm()));
                w.see(e, || loc(st));
            }
            Ok(())
        }),
        sweep("quantize.commutators", tol.residual, |w| {
            for (name, f) in commutator_test_functions(ctx) {
                for &st in &ctx.states {
                    let fj = f(st)?;
                    let (a, b) = commutators_at(&fj, q, st);
                    let qf = q * fj.value();
                    let [f_s, f_v] = fj.grad();
                    let scale = qf
                        .norm()
                        .max((q * f_s * st.s).norm())
                        .max((q * f_v * st.v).norm());
                    let e = rel((a - qf).norm().max((b - qf).norm()), scale);
                    w.see(e, || format!("f={name}, {}", loc(st)));
                }
            }
            Ok(())
        }),
    ];
    let shifts = [-1.0, 0.5, 10.0];
    let reports: Result<Vec<_>, _> = shifts
        .iter()
        .map(|&c| gauge_check(gas, qp, c, &ctx.cfg.domain, &ctx.cfg.quadrature))
        .collect();
    match reports {
        Ok(reports) => {
            out.push(sweep("quantize.gauge_pointwise", tol.residual, |w| {
                for r in &reports {
                    w.see(r.pointwise, || format!("C={:e}", r.shift));
                }
                Ok(())
            }));
            out.push(sweep("quantize.gauge_expectations", tol.residual, |w| {
                for r in &reports {
                    w.see(r.expectations, || format!("C={:e}", r.shift));
                }
                Ok(())
            }));
        }
        Err(e) => out.push(CheckOutcome::error("quantize.gauge", e.to_string())),
    }
    out
}

/// Deviation of `⟨Op⟩` from the expectation of its ordering shift, which
/// is zero in the `Vp` ordering.
pub fn ehrenfest_deviation(
    gas: &GasParams,
    qp: &QuantumParams,
    op: &CompiledOperator,
    cfg: &RunConfig,
) -> Fallible<f64> {
    let psi = GasState::new(gas, qp);
    let obs = [Observable::Law(op.clone())];
    let e = expectations(
        gas,
        qp.q(),
        &psi,
        &obs,
        &cfg.domain,
        &cfg.quadrature,
        cfg.tolerances.imag,
    )?;
    let shift = integrate(
        |st| {
            let v = psi.value(st)?;
            Ok(v.conj() * v * op.ordering_shift(gas, st)?)
        },
        &cfg.domain,
        &cfg.quadrature,
    )? / e[0].norm2;
    Ok(rel((e[0].normalized - shift).norm(), shift.norm()))
}

fn uncertainty_outcome(suite: &str, pair: &UncertaintyPair) -> CheckOutcome {
    let detail = format!(
        "var=({:e}{:+e}i, {:e}{:+e}i), bound={:e}",
        pair.var_coordinate.re,
        pair.var_coordinate.im,
        pair.var_momentum.re,
        pair.var_momentum.im,
        pair.bound
    );
    match (&pair.verdict, pair.product) {
        (Verdict::Satisfied, Some(p)) => CheckOutcome {
            suite: suite.into(),
            status: Status::Pass,
            metric: Some(pair.bound - p),
            tolerance: Some(0.0),
            location: format!("satisfied, {detail}"),
        },
        (verdict, product) => CheckOutcome::flagged(
            suite,
            product.map(|p| pair.bound - p),
            format!("{verdict}, {detail}"),
        ),
    }
}

pub fn expect(ctx: &Context) -> Vec<CheckOutcome> {
    let gas = ctx.gas();
    let qp = &ctx.qp;
    let cfg = &ctx.cfg;
    let tol = cfg.tolerances;
    let (domain, rule) = (&cfg.domain, &cfg.quadrature);
    let psi = GasState::new(gas, qp);
    let mut out = vec![sweep("expect.ehrenfest", tol.residual, |w| {
        for src in PAPER_LAWS {
            let op = compile_quantized(&parse(src)?, cfg.ordering, qp.q())?;
            let d = ehrenfest_deviation(gas, qp, &op, cfg)?;
            w.see(d, || format!("[{}] {src}", cfg.ordering));
        }
        Ok(())
    })];
    out.push(sweep("expect.eigen_relation", tol.residual, |w| {
        for &st in &ctx.states {
            let (rt, rp) = pointwise_eigen_check(gas, qp, st)?;
            let c = conjugates(gas, st)?;
            let m = psi.value(st)?.norm();
            let e = rel(rt.norm(), c.t * m).max(rel(rp.norm(), c.p * m));
            w.see(e, || loc(st));
        }
        Ok(())
    }));
    out.push(sweep("expect.real_momenta", tol.imag, |w| {
        let ops = [Observable::Temperature, Observable::Pressure];
        for e in expectations(gas, qp.q(), &psi, &ops, domain, rule, tol.imag)? {
            w.see(rel(e.normalized.im.abs(), e.normalized.norm()), || {
                e.label.clone()
            });
        }
        Ok(())
    }));
    out.push(sweep(
        "expect.quadrature_convergence",
        tol.quadrature,
        |w| {
            let ops = Observable::basic();
            let coarse = expectations(gas, qp.q(), &psi, &ops, domain, rule, tol.imag)?;
            let fine = expectations(gas, qp.q(), &psi, &ops, domain, &rule.refined(), tol.imag)?;
            let n = coarse[0].norm2;
            w.see(((fine[0].norm2 - n) / n).abs(), || "norm2".into());
            for (a, b) in coarse.iter().zip(&fine) {
                w.see(
                    rel((a.normalized - b.normalized).norm(), a.normalized.norm()),
                    || a.label.clone(),
                );
            }
            Ok(())
        },
    ));
    out.push(match density_report(&psi, domain, rule) {
        Ok(d) => CheckOutcome {
            suite: "expect.density".into(),
            status: if d.is_density() {
                Status::Pass
            } else {
                Status::Fail
            },
            metric: Some(d.l2),
            tolerance: None,
            location: format!(
                "L1={:e}, L2={:e}, min|psi|^2={:e}",
                d.l1, d.l2, d.min_density
            ),
        },
        Err(e) => CheckOutcome::error("expect.density", e.to_string()),
    });
    match uncertainty_report(gas, qp, domain, rule) {
        Ok(r) => {
            out.push(uncertainty_outcome(
                "expect.uncertainty.S_T",
                &r.entropy_temperature,
            ));
            out.push(uncertainty_outcome(
                "expect.uncertainty.V_p",
                &r.volume_pressure,
            ));
        }
        Err(e) => out.push(CheckOutcome::error("expect.uncertainty", e.to_string())),
    }
    out.push(sweep("expect.hermiticity_oracle", tol.quadrature, |w| {
        let r = hermiticity_diagnostic(qp, domain, rule, &psi, &exp_s_times_v)?;
        w.see(r.mismatch(), || {
            format!("f=psi, g=exp(S)*V, defect={:e}", r.defect.norm())
        });
        let r = hermiticity_diagnostic(qp, domain, rule, &psi, &psi)?;
        w.see(r.mismatch(), || {
            format!("f=g=psi, defect={:e}", r.defect.norm())
        });
        Ok(())
    }));
    out.push(sweep("expect.hermiticity_periodic", tol.quadrature, |w| {
        let (lo, hi) = (domain.s_lo, domain.s_hi);
        let f = move |st: StateSV| {
            let s = jet_s(st)?;
            let bump = (s.offset(-lo) * s.scale(-1.0).offset(hi)).offset(1.0);
            Ok(bump.to_complex())
        };
        let r = hermiticity_diagnostic(qp, domain, rule, &f, &f)?;
        w.see(r.defect.norm(), || "f=g=(S-Slo)(Shi-S)+1".into());
        Ok(())
    }));
    out
}

/// Parse, print, compile and run each expression. Parse failures abort.
pub fn dsl(ctx: &Context, sources: &[String]) -> Result<Vec<CheckOutcome>, DslError> {
    let gas = ctx.gas();
    let tol = ctx.cfg.tolerances;
    let mut out = Vec::new();
    for src in sources {
        let ast = parse(src)?;
        out.push(round_trip_outcome(src, &ast));
        out.push(sweep(&format!("dsl.classical: {src}"), tol.residual, |w| {
            let law = compile_classical(&ast, gas)?;
            for &st in &ctx.states {
                let u = fundamental_u(gas, st)?.value();
                w.see(rel(law.evaluate(st)?.abs(), u), || loc(st));
            }
            Ok(())
        }));
        let suite = format!("dsl.quantized: {src}");
        match compile_quantized(&ast, ctx.cfg.ordering, ctx.qp.q()) {
            Ok(op) => {
                out.push(sweep(&suite, tol.residual, |w| {
                    let d = ehrenfest_deviation(gas, &ctx.qp, &op, &ctx.cfg)?;
                    w.see(d, || format!("ordering {}", op.ordering()));
                    Ok(())
                }));
                out.push(sweep(
                    &format!("dsl.ordering_shift: {src}"),
                    tol.residual,
                    |w| {
                        let vp = op.with_ordering(Default::default());
                        let psi = GasState::new(gas, &ctx.qp);
                        for &st in &ctx.states {
                            let pj = psi.jet(st)?;
                            let lhs = op.apply(gas, st, &pj)? - vp.apply(gas, st, &pj)?;
                            let rhs = op.ordering_shift(gas, st)? * pj.value();
                            w.see(rel((lhs - rhs).norm(), rhs.norm()), || loc(st));
                        }
                        Ok(())
                    },
                ));
            }
            Err(e) => out.push(CheckOutcome::flagged(suite, None, e.to_string())),
        }
    }
    Ok(out)
}

fn round_trip_outcome(src: &str, ast: &Expr) -> CheckOutcome {
    let printed = ast.to_string();
    let same = parse(&printed).map(|e| e == *ast).unwrap_or(false);
    CheckOutcome {
        suite: format!("dsl.round_trip: {src}"),
        status: if same { Status::Pass } else { Status::Fail },
        metric: None,
        tolerance: None,
        location: printed,
    }
}
