//! Exterior calculus at a point, and the contact structure of the ideal gas.
//!
//! Forms are stored by their coefficients on strictly increasing
//! multi-indices in lexicographic order, so antisymmetry is implicit.
//! The thermodynamic chart `M` is ordered `(S, V, U, T, p)`; the reduced
//! chart `S` is ordered `(x, p_x, U)`. All signs reported below are
//! relative to those orderings.

use thiserror::Error;

use crate::jets::Jet2;
use crate::potentials::{
    fundamental_u, reduced_u_xy, GasParams, ReducedCoords, StateSV, ThermoError,
};

/// Basis indices on the 5-dimensional chart.
pub mod thermo {
    pub const S: usize = 0;
    pub const V: usize = 1;
    pub const U: usize = 2;
    pub const T: usize = 3;
    pub const P: usize = 4;
}

/// Basis indices on the 3-dimensional reduced chart.
pub mod reduced {
    pub const X: usize = 0;
    pub const PX: usize = 1;
    pub const U: usize = 2;
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("degree {degree} exceeds chart dimension {dim}")]
    DegreeOverflow { degree: usize, dim: usize },
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("expected a point on chart {expected:?}, got {got:?}")]
    WrongChart { expected: Chart, got: Chart },
    #[error("chart {chart:?} has {expected} coordinates, got {got}")]
    CoordinateCount {
        chart: Chart,
        expected: usize,
        got: usize,
    },
    #[error(transparent)]
    Thermo(#[from] ThermoError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    /// `(S, V, U, T, p)`
    Thermo,
    /// `(x, p_x, U)`
    Reduced,
    /// `(S, V)`
    Config,
    /// `(x, y)`
    ReducedPlane,
    /// `(x)`
    ReducedLine,
}

impl Chart {
    pub fn names(self) -> &'static [&'static str] {
        match self {
            Chart::Thermo => &["S", "V", "U", "T", "p"],
            Chart::Reduced => &["x", "p_x", "U"],
            Chart::Config => &["S", "V"],
            Chart::ReducedPlane => &["x", "y"],
            Chart::ReducedLine => &["x"],
        }
    }

    pub fn dim(self) -> usize {
        self.names().len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint {
    chart: Chart,
    coords: Vec<f64>,
}

impl ChartPoint {
    pub fn new(chart: Chart, coords: Vec<f64>) -> Result<Self, FormError> {
        if coords.len() != chart.dim() {
            return Err(FormError::CoordinateCount {
                chart,
                expected: chart.dim(),
                got: coords.len(),
            });
        }
        Ok(Self { chart, coords })
    }

    /// Lift an equilibrium state `(S, V)` to `M` as `(S, V, U, T, p)`.
    pub fn equilibrium(params: &GasParams, state: StateSV) -> Result<Self, FormError> {
        let u = fundamental_u(params, state)?;
        let [t, minus_p] = u.grad();
        Self::new(
            Chart::Thermo,
            vec![state.s, state.v, u.value(), t, -minus_p],
        )
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    fn expect_chart(&self, expected: Chart) -> Result<(), FormError> {
        if self.chart == expected {
            Ok(())
        } else {
            Err(FormError::WrongChart {
                expected,
                got: self.chart,
            })
        }
    }
}

/// Sign convention for the contact form on `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// `α = dU + T dS − p dV`
    Paper,
    /// `α = dU − T dS + p dV`
    Standard,
}

impl Convention {
    fn sign(self) -> f64 {
        match self {
            Convention::Paper => 1.0,
            Convention::Standard => -1.0,
        }
    }
}

/// Strictly increasing `k`-subsets of `0..n` in lexicographic order.
pub fn multi_indices(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        go(0, n, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

/// Sort in place, returning the permutation sign, or `None` on a repeat.
fn sort_with_sign(idx: &mut [usize]) -> Option<f64> {
    let mut sign = 1.0;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

/// A `k`-form at a point of an `n`-dimensional chart.
#[derive(Debug, Clone, PartialEq)]
pub struct KForm {
    dim: usize,
    degree: usize,
    indices: Vec<Vec<usize>>,
    coeffs: Vec<f64>,
}

impl KForm {
    /// The zero form. A degree above the dimension gives the (only) zero
    /// form with no coefficients.
    pub fn zero(dim: usize, degree: usize) -> Self {
        let indices = multi_indices(dim, degree);
        let coeffs = vec![0.0; indices.len()];
        Self {
            dim,
            degree,
            indices,
            coeffs,
        }
    }

    /// The differential `dx_i`.
    pub fn basis(dim: usize, i: usize) -> Result<Self, FormError> {
        let mut f = Self::zero(dim, 1);
        f.set(&[i], 1.0)?;
        Ok(f)
    }

    /// A 1-form from its coefficients.
    pub fn one_form(coeffs: &[f64]) -> Self {
        let mut f = Self::zero(coeffs.len(), 1);
        f.coeffs.copy_from_slice(coeffs);
        f
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// `(multi-index, coefficient)` pairs in storage order.
    pub fn terms(&self) -> impl Iterator<Item = (&[usize], f64)> {
        self.indices
            .iter()
            .map(Vec::as_slice)
            .zip(self.coeffs.iter().copied())
    }

    fn slot(&self, sorted: &[usize]) -> usize {
        self.indices
            .iter()
            .position(|i| i == sorted)
            .expect("sorted in-range index is stored")
    }

    fn check_indices(&self, idx: &[usize]) -> Result<(), FormError> {
        if idx.len() != self.degree {
            return Err(FormError::DimensionMismatch {
                left: self.degree,
                right: idx.len(),
            });
        }
        match idx.iter().find(|&&i| i >= self.dim) {
            Some(&index) => Err(FormError::IndexOutOfRange {
                index,
                dim: self.dim,
            }),
            None => Ok(()),
        }
    }

    /// Coefficient on `dx_{i1} ∧ … ∧ dx_{ik}` for indices in any order.
    pub fn get(&self, idx: &[usize]) -> Result<f64, FormError> {
        self.check_indices(idx)?;
        let mut sorted = idx.to_vec();
        Ok(match sort_with_sign(&mut sorted) {
            Some(sign) => sign * self.coeffs[self.slot(&sorted)],
            None => 0.0,
        })
    }

    /// Set the coefficient so that `get(idx) == value`. Repeated indices
    /// are ignored since that component is identically zero.
    pub fn set(&mut self, idx: &[usize], value: f64) -> Result<(), FormError> {
        self.check_indices(idx)?;
        let mut sorted = idx.to_vec();
        if let Some(sign) = sort_with_sign(&mut sorted) {
            let slot = self.slot(&sorted);
            self.coeffs[slot] = sign * value;
        }
        Ok(())
    }

    fn check_same_shape(&self, other: &Self) -> Result<(), FormError> {
        if self.dim != other.dim {
            return Err(FormError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        if self.degree != other.degree {
            return Err(FormError::DimensionMismatch {
                left: self.degree,
                right: other.degree,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, FormError> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (c, o) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *c += o;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FormError> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|x| *x *= c);
        out
    }

    /// Exterior product.
    pub fn wedge(&self, other: &Self) -> Result<Self, FormError> {
        if self.dim != other.dim {
            return Err(FormError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let degree = self.degree + other.degree;
        if degree > self.dim {
            return Err(FormError::DegreeOverflow {
                degree,
                dim: self.dim,
            });
        }
        let mut out = Self::zero(self.dim, degree);
        let mut merged = Vec::with_capacity(degree);
        for (a_idx, a) in self.terms() {
            if a == 0.0 {
                continue;
            }
            for (b_idx, b) in other.terms() {
                merged.clear();
                merged.extend_from_slice(a_idx);
                merged.extend_from_slice(b_idx);
                if let Some(sign) = sort_with_sign(&mut merged) {
                    let slot = out.slot(&merged);
                    out.coeffs[slot] += sign * a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }
}

/// A `k`-form whose coefficients are jets over the chart coordinates, so
/// that its exterior derivative can be taken at the point.
#[derive(Debug, Clone, PartialEq)]
pub struct JetForm<const N: usize> {
    degree: usize,
    indices: Vec<Vec<usize>>,
    coeffs: Vec<Jet2<N>>,
}

impl<const N: usize> JetForm<N> {
    /// `coeffs` are given in [`multi_indices`] order.
    pub fn new(degree: usize, coeffs: Vec<Jet2<N>>) -> Result<Self, FormError> {
        let indices = multi_indices(N, degree);
        if indices.len() != coeffs.len() {
            return Err(FormError::DimensionMismatch {
                left: indices.len(),
                right: coeffs.len(),
            });
        }
        Ok(Self {
            degree,
            indices,
            coeffs,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coefficients(&self) -> &[Jet2<N>] {
        &self.coeffs
    }

    /// Point values of the coefficients.
    pub fn values(&self) -> KForm {
        let mut f = KForm::zero(N, self.degree);
        for (slot, c) in self.coeffs.iter().enumerate() {
            f.coeffs[slot] = c.value();
        }
        f
    }

    /// Exterior derivative. The coefficients of the result carry their
    /// values and gradients; their Hessians would need third derivatives
    /// and are zero.
    pub fn exterior_derivative(&self) -> Self {
        let degree = self.degree + 1;
        let indices = multi_indices(N, degree);
        let coeffs = indices
            .iter()
            .map(|k_idx| {
                let mut acc = Jet2::<N>::constant(0.0);
                for (pos, &i) in k_idx.iter().enumerate() {
                    let rest: Vec<usize> = k_idx
                        .iter()
                        .enumerate()
                        .filter(|&(p, _)| p != pos)
                        .map(|(_, &j)| j)
                        .collect();
                    let slot = self
                        .indices
                        .iter()
                        .position(|x| *x == rest)
                        .expect("face of an increasing index is increasing");
                    let partial = self.coeffs[slot].derivative(i).expect("i < N");
                    acc = if pos % 2 == 0 {
                        acc + partial
                    } else {
                        acc - partial
                    };
                }
                acc
            })
            .collect();
        Self {
            degree,
            indices,
            coeffs,
        }
    }
}

/// Jet-coefficient form of `α` at a point of `M`.
pub fn alpha_field(point: &ChartPoint, convention: Convention) -> Result<JetForm<5>, FormError> {
    point.expect_chart(Chart::Thermo)?;
    let c = point.coords();
    let var = |i: usize| Jet2::<5>::variable(i, c[i]).expect("i < 5");
    let sign = convention.sign();
    let mut coeffs = vec![Jet2::constant(0.0); 5];
    coeffs[thermo::S] = var(thermo::T).scale(sign);
    coeffs[thermo::V] = var(thermo::P).scale(-sign);
    coeffs[thermo::U] = Jet2::constant(1.0);
    JetForm::new(1, coeffs)
}

pub fn alpha_at(point: &ChartPoint, convention: Convention) -> Result<KForm, FormError> {
    Ok(alpha_field(point, convention)?.values())
}

pub fn d_alpha_at(point: &ChartPoint, convention: Convention) -> Result<KForm, FormError> {
    Ok(alpha_field(point, convention)?
        .exterior_derivative()
        .values())
}

/// Coefficient of `α ∧ dα ∧ dα` on `dS∧dV∧dU∧dT∧dp`.
pub fn contact_volume_of(alpha: &KForm, d_alpha: &KForm) -> Result<f64, FormError> {
    let top = alpha.wedge(d_alpha)?.wedge(d_alpha)?;
    let all: Vec<usize> = (0..alpha.dim()).collect();
    top.get(&all)
}

pub fn contact_volume(point: &ChartPoint, convention: Convention) -> Result<f64, FormError> {
    let field = alpha_field(point, convention)?;
    contact_volume_of(&field.values(), &field.exterior_derivative().values())
}

/// `β = dU + p_x dx` at a point of the reduced chart.
pub fn beta_at(point: &ChartPoint) -> Result<KForm, FormError> {
    point.expect_chart(Chart::Reduced)?;
    let mut beta = KForm::zero(3, 1);
    beta.set(&[reduced::X], point.coords()[reduced::PX])?;
    beta.set(&[reduced::U], 1.0)?;
    Ok(beta)
}

/// Coefficient of `β ∧ dβ` on `dx∧dp_x∧dU`.
pub fn reduced_contact_volume(point: &ChartPoint) -> Result<f64, FormError> {
    let beta = beta_at(point)?;
    // dβ = dp_x ∧ dx
    let d_beta = KForm::basis(3, reduced::PX)?.wedge(&KForm::basis(3, reduced::X)?)?;
    beta.wedge(&d_beta)?.get(&[0, 1, 2])
}

/// A smooth map evaluated at a source point: one jet per target coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothMapEval<const M: usize> {
    components: Vec<Jet2<M>>,
}

impl<const M: usize> SmoothMapEval<M> {
    pub fn new(components: Vec<Jet2<M>>) -> Self {
        Self { components }
    }

    pub fn source_dim(&self) -> usize {
        M
    }

    pub fn target_dim(&self) -> usize {
        self.components.len()
    }

    pub fn image(&self) -> Vec<f64> {
        self.components.iter().map(Jet2::value).collect()
    }

    /// Rows indexed by target coordinate, columns by source coordinate.
    pub fn jacobian(&self) -> Vec<[f64; M]> {
        self.components.iter().map(Jet2::grad).collect()
    }

    pub fn components(&self) -> &[Jet2<M>] {
        &self.components
    }

    /// Pull a form at the image point back to the source point.
    pub fn pullback(&self, form: &KForm) -> Result<KForm, FormError> {
        if form.dim() != self.target_dim() {
            return Err(FormError::DimensionMismatch {
                left: form.dim(),
                right: self.target_dim(),
            });
        }
        let jac = self.jacobian();
        let mut out = KForm::zero(M, form.degree());
        for slot in 0..out.indices.len() {
            let cols = out.indices[slot].clone();
            out.coeffs[slot] = form
                .terms()
                .filter(|&(_, w)| w != 0.0)
                .map(|(rows, w)| {
                    let minor: Vec<Vec<f64>> = rows
                        .iter()
                        .map(|&r| cols.iter().map(|&c| jac[r][c]).collect())
                        .collect();
                    w * determinant(&minor)
                })
                .sum();
        }
        Ok(out)
    }
}

/// Cofactor expansion; matrices here are at most 5×5.
fn determinant(m: &[Vec<f64>]) -> f64 {
    match m.len() {
        0 => 1.0,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        n => (0..n)
            .map(|col| {
                let minor: Vec<Vec<f64>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(c, _)| c != col)
                            .map(|(_, &x)| x)
                            .collect()
                    })
                    .collect();
                let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
                sign * m[0][col] * determinant(&minor)
            })
            .sum(),
    }
}

/// The equilibrium surface `(S, V) ↦ (S, V, U, T, p)` with `T`, `p` the
/// conjugate variables of the fundamental equation.
pub fn equilibrium_embedding(
    params: &GasParams,
    state: StateSV,
) -> Result<SmoothMapEval<2>, FormError> {
    let u = fundamental_u(params, state)?;
    let s = Jet2::<2>::variable(0, state.s).expect("0 < 2");
    let v = Jet2::<2>::variable(1, state.v).expect("1 < 2");
    let t = u.derivative(0).expect("0 < 2");
    let p = -u.derivative(1).expect("1 < 2");
    Ok(SmoothMapEval::new(vec![s, v, u, t, p]))
}

/// Source coefficients `(dS, dV)` of `α` pulled back to the equilibrium
/// surface. Zero for the standard convention; `(2T, −2p)` for `Convention::Paper`.
pub fn first_law_residual(
    params: &GasParams,
    state: StateSV,
    convention: Convention,
) -> Result<[f64; 2], FormError> {
    let embedding = equilibrium_embedding(params, state)?;
    let point = ChartPoint::new(Chart::Thermo, embedding.image())?;
    let pulled = embedding.pullback(&alpha_at(&point, convention)?)?;
    Ok([pulled.get(&[0])?, pulled.get(&[1])?])
}

/// Comparison of `Φ*α` under `Convention::Paper` and `Ψ*β` on the `(x, y)` chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestrictionResidual {
    /// `(Φ*α − Ψ*β)` on `dx`.
    pub dx: f64,
    /// `(Φ*α − Ψ*β)` on `dy`.
    pub dy: f64,
    /// `Φ*α` on `dy` alone.
    pub alpha_dy: f64,
    /// `Φ*α` on `dx`, expected `(4/3)·U(x)`.
    pub common_dx: f64,
}

impl RestrictionResidual {
    pub fn max_residual(&self) -> f64 {
        self.dx.abs().max(self.dy.abs()).max(self.alpha_dy.abs())
    }
}

/// The embeddings `Φ: (x, y) → M` and `Ψ: (x, y) → S` built from the solved
/// model: `S`, `V` from the change of variables, `U = U(x)`,
/// `T = p_x/(NkB)`, `p = NkB·T/V`; and `(x, p_x, U(x))` for `Ψ`.
pub fn reduction_embeddings(
    params: &GasParams,
    rc: ReducedCoords,
) -> (SmoothMapEval<2>, SmoothMapEval<2>) {
    let x = Jet2::<2>::variable(0, rc.x).expect("0 < 2");
    let y = Jet2::<2>::variable(1, rc.y).expect("1 < 2");
    let nkb = params.nkb();
    let s = (x + y).scale(0.5 * nkb);
    let v = (y - x).scale(0.5).exp().scale(params.vref);
    let u = reduced_u_xy(params, rc);
    let px = u.derivative(0).expect("0 < 2");
    let t = px.scale(1.0 / nkb);
    let p = t.scale(nkb) * v.recip().expect("V > 0");
    let phi = SmoothMapEval::new(vec![s, v, u, t, p]);
    let psi = SmoothMapEval::new(vec![x, px, u]);
    (phi, psi)
}

pub fn restriction_identity_residual(
    params: &GasParams,
    x: f64,
    y: f64,
) -> Result<RestrictionResidual, FormError> {
    let (phi, psi) = reduction_embeddings(params, ReducedCoords { x, y });
    let alpha = alpha_at(
        &ChartPoint::new(Chart::Thermo, phi.image())?,
        Convention::Paper,
    )?;
    let beta = beta_at(&ChartPoint::new(Chart::Reduced, psi.image())?)?;
    let a = phi.pullback(&alpha)?;
    let b = psi.pullback(&beta)?;
    let diff = a.sub(&b)?;
    Ok(RestrictionResidual {
        dx: diff.get(&[0])?,
        dy: diff.get(&[1])?,
        alpha_dy: a.get(&[1])?,
        common_dx: a.get(&[0])?,
    })
}
