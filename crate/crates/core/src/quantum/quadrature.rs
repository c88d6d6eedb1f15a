//! Composite Gauss–Legendre quadrature on a rectangle of configuration
//! space, with a fixed summation order and compensated accumulation so
//! repeated runs are bit-identical.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::QuantumError;
use crate::potentials::StateSV;

/// `[Slo, Shi] × [Vlo, Vhi]` with `0 < Vlo`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Box2 {
    #[serde(rename = "Slo")]
    pub s_lo: f64,
    #[serde(rename = "Shi")]
    pub s_hi: f64,
    #[serde(rename = "Vlo")]
    pub v_lo: f64,
    #[serde(rename = "Vhi")]
    pub v_hi: f64,
}

impl Box2 {
    pub fn new(s_lo: f64, s_hi: f64, v_lo: f64, v_hi: f64) -> Result<Self, QuantumError> {
        let b = Self {
            s_lo,
            s_hi,
            v_lo,
            v_hi,
        };
        b.validate()?;
        Ok(b)
    }

    /// `[0, 1] × [1, 2]`.
    pub fn unit() -> Self {
        Self {
            s_lo: 0.0,
            s_hi: 1.0,
            v_lo: 1.0,
            v_hi: 2.0,
        }
    }

    pub fn validate(&self) -> Result<(), QuantumError> {
        let all_finite = [self.s_lo, self.s_hi, self.v_lo, self.v_hi]
            .iter()
            .all(|x| x.is_finite());
        if !all_finite {
            return Err(QuantumError::InvalidBox("bounds must be finite".into()));
        }
        if !(self.v_lo > 0.0) {
            return Err(QuantumError::InvalidBox(format!(
                "Vlo must be > 0, got {}",
                self.v_lo
            )));
        }
        if !(self.s_lo < self.s_hi) {
            return Err(QuantumError::InvalidBox(format!(
                "Slo must be < Shi, got {} >= {}",
                self.s_lo, self.s_hi
            )));
        }
        if !(self.v_lo < self.v_hi) {
            return Err(QuantumError::InvalidBox(format!(
                "Vlo must be < Vhi, got {} >= {}",
                self.v_lo, self.v_hi
            )));
        }
        Ok(())
    }

    pub fn measure(&self) -> f64 {
        (self.s_hi - self.s_lo) * (self.v_hi - self.v_lo)
    }

    /// Centres of an `n × n` grid of cells covering the box.
    pub fn grid(&self, n: usize) -> Vec<StateSV> {
        let ds = (self.s_hi - self.s_lo) / n as f64;
        let dv = (self.v_hi - self.v_lo) / n as f64;
        (0..n)
            .flat_map(|i| {
                (0..n).map(move |j| StateSV {
                    s: self.s_lo + (i as f64 + 0.5) * ds,
                    v: self.v_lo + (j as f64 + 0.5) * dv,
                })
            })
            .collect()
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the three-term recurrence.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let legendre = |x: f64| {
        // (P_n(x), P_n'(x))
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let k = k as f64;
            let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        let pn = if n == 0 { 1.0 } else { p1 };
        let pn_1 = if n == 0 { 0.0 } else { p0 };
        let dp = n as f64 * (x * pn - pn_1) / (x * x - 1.0);
        (pn, dp)
    };
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Panels per axis and Gauss–Legendre points per panel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureRule {
    pub panels: usize,
    pub order: usize,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self {
            panels: 8,
            order: 8,
        }
    }
}

impl QuadratureRule {
    pub const ORDERS: [usize; 3] = [4, 8, 16];

    pub fn new(panels: usize, order: usize) -> Result<Self, QuantumError> {
        let rule = Self { panels, order };
        rule.validate()?;
        Ok(rule)
    }

    pub fn validate(&self) -> Result<(), QuantumError> {
        if self.panels == 0 {
            return Err(QuantumError::InvalidRule("panels must be >= 1".into()));
        }
        if !Self::ORDERS.contains(&self.order) {
            return Err(QuantumError::InvalidRule(format!(
                "order must be one of 4, 8, 16; got {}",
                self.order
            )));
        }
        Ok(())
    }

    pub fn refined(&self) -> Self {
        Self {
            panels: 2 * self.panels,
            ..*self
        }
    }

    /// Composite nodes and weights on `[lo, hi]`.
    pub fn nodes_1d(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        let (x, w) = gauss_legendre(self.order);
        let width = (hi - lo) / self.panels as f64;
        let mut out = Vec::with_capacity(self.panels * self.order);
        for k in 0..self.panels {
            let a = lo + k as f64 * width;
            let mid = a + 0.5 * width;
            for (xi, wi) in x.iter().zip(&w) {
                out.push((mid + 0.5 * width * xi, 0.5 * width * wi));
            }
        }
        out
    }

    /// Tensor-product nodes on the box, `S` outer and `V` inner.
    pub fn nodes_2d(&self, domain: &Box2) -> Vec<(StateSV, f64)> {
        let s_nodes = self.nodes_1d(domain.s_lo, domain.s_hi);
        let v_nodes = self.nodes_1d(domain.v_lo, domain.v_hi);
        let mut out = Vec::with_capacity(s_nodes.len() * v_nodes.len());
        for &(s, ws) in &s_nodes {
            for &(v, wv) in &v_nodes {
                out.push((StateSV { s, v }, ws * wv));
            }
        }
        out
    }
}

/// Neumaier-compensated sum of complex terms.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    re: (f64, f64),
    im: (f64, f64),
}

fn neumaier(acc: &mut (f64, f64), x: f64) {
    let (sum, comp) = *acc;
    let t = sum + x;
    let c = if sum.abs() >= x.abs() {
        (sum - t) + x
    } else {
        (x - t) + sum
    };
    *acc = (t, comp + c);
}

impl CompensatedSum {
    pub fn add(&mut self, z: Complex64) {
        neumaier(&mut self.re, z.re);
        neumaier(&mut self.im, z.im);
    }

    pub fn total(&self) -> Complex64 {
        Complex64::new(self.re.0 + self.re.1, self.im.0 + self.im.1)
    }
}

/// `∫∫ conj(f)·g dS dV` over the box.
pub fn inner_product(
    f: impl Fn(StateSV) -> Result<Complex64, QuantumError>,
    g: impl Fn(StateSV) -> Result<Complex64, QuantumError>,
    domain: &Box2,
    rule: &QuadratureRule,
) -> Result<Complex64, QuantumError> {
    integrate(|st| Ok(f(st)?.conj() * g(st)?), domain, rule)
}

/// `∫∫ h dS dV` over the box.
pub fn integrate(
    h: impl Fn(StateSV) -> Result<Complex64, QuantumError>,
    domain: &Box2,
    rule: &QuadratureRule,
) -> Result<Complex64, QuantumError> {
    let mut acc = CompensatedSum::default();
    for (st, w) in rule.nodes_2d(domain) {
        acc.add(h(st)? * w);
    }
    Ok(acc.total())
}
