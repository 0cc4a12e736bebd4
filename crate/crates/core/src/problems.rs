//! Registry of model problems. Each problem knows how to build the operands
//! of its two-grid symbol at a base frequency, plus parameter derivatives of
//! those operands and (where meaningful) a single-frequency relaxation symbol.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigen::spectral_radius;
use crate::error::{Error, Result};
use crate::fourier::{
    assemble_two_grid_derivative, assemble_two_grid_symbol, build_harmonics, evaluate_stencil_symbol, Frequency,
    HarmonicSet, PartsDerivative, Stencil, TwoGridSymbolParts,
};
use crate::linalg::{c, identity, is_finite, matrix_hash, re, solve, ComplexMatrix};

/// Entry step for central differences of symbol matrices.
pub const MATRIX_FD_STEP: f64 = 1e-7;

/// Per-parameter bounds `[lower_k, upper_k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ParamBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.iter().zip(&upper).any(|(a, b)| !(a <= b)) {
            return Err(Error::InvalidArgument(format!("invalid box {lower:?} .. {upper:?}")));
        }
        Ok(Self { lower, upper })
    }

    pub fn uniform(n: usize, lower: f64, upper: f64) -> Self {
        Self { lower: vec![lower; n], upper: vec![upper; n] }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim() && p.iter().zip(self.lower.iter().zip(&self.upper)).all(|(x, (a, b))| a <= x && x <= b)
    }

    /// Componentwise clamp onto the box.
    pub fn project(&self, p: &[f64]) -> Vec<f64> {
        p.iter().zip(self.lower.iter().zip(&self.upper)).map(|(x, (a, b))| x.clamp(*a, *b)).collect()
    }

    pub fn width(&self) -> Vec<f64> {
        self.upper.iter().zip(&self.lower).map(|(b, a)| b - a).collect()
    }
}

/// Known optimum for a problem (parameters and the two-grid factor there).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceOptimum {
    pub params: Vec<f64>,
    pub rho: f64,
}

/// Symbol callbacks of one model problem.
pub trait SymbolModel: Send + Sync + fmt::Debug {
    /// Operands of the two-grid symbol at base frequency `theta`.
    fn two_grid_parts(&self, p: &[f64], theta: &Frequency) -> Result<TwoGridSymbolParts>;

    /// Derivative of the operands with respect to `p[j]`, when known in closed form.
    fn parts_derivative(&self, _p: &[f64], _theta: &Frequency, _j: usize) -> Option<Result<PartsDerivative>> {
        None
    }

    /// Relaxation symbol `S̃(p, θ)` at a single frequency.
    fn relaxation_symbol(&self, _p: &[f64], _theta: &Frequency) -> Option<Result<ComplexMatrix>> {
        None
    }

    /// Whether the relaxation is defined at `p` (e.g. no division by a zero weight).
    fn defined_at(&self, _p: &[f64]) -> bool {
        true
    }
}

/// A registered model problem.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    /// Space dimension d.
    pub dim: usize,
    /// Coarsening factor c.
    pub coarsening: usize,
    /// Unknowns per grid point q.
    pub block_size: usize,
    pub bounds: ParamBox,
    pub initial: Vec<f64>,
    pub param_names: Vec<String>,
    pub reference: Option<ReferenceOptimum>,
    model: Arc<dyn SymbolModel>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("coarsening", &self.coarsening)
            .field("block_size", &self.block_size)
            .field("bounds", &self.bounds)
            .field("model", &self.model)
            .finish()
    }
}

impl ProblemSpec {
    pub fn n_params(&self) -> usize {
        self.bounds.dim()
    }

    /// Size of the two-grid symbol, `c^d · q`.
    pub fn symbol_size(&self) -> usize {
        self.coarsening.pow(self.dim as u32) * self.block_size
    }

    pub fn check_len(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.n_params() {
            return Err(Error::InvalidArgument(format!(
                "{} takes {} parameters, got {}",
                self.name,
                self.n_params(),
                p.len()
            )));
        }
        Ok(())
    }

    fn check_point(&self, p: &[f64], theta: &Frequency) -> Result<()> {
        self.check_len(p)?;
        if theta.dim() != self.dim {
            return Err(Error::InvalidArgument(format!(
                "{} is {}-dimensional, frequency has dimension {}",
                self.name,
                self.dim,
                theta.dim()
            )));
        }
        if !self.model.defined_at(p) {
            return Err(Error::InvalidArgument(format!("{} relaxation undefined at p = {p:?}", self.name)));
        }
        Ok(())
    }

    pub fn two_grid_parts(&self, p: &[f64], theta: &Frequency) -> Result<TwoGridSymbolParts> {
        self.check_point(p, theta)?;
        self.model.two_grid_parts(p, theta)
    }

    /// Two-grid error symbol `Ẽ(p, θ)`; callers guard zero frequencies.
    pub fn error_symbol(&self, p: &[f64], theta: &Frequency) -> Result<ComplexMatrix> {
        assemble_two_grid_symbol(&self.two_grid_parts(p, theta)?)
    }

    /// `ρ(Ẽ(p, θ))`. Parameters where the relaxation is undefined give `+∞`.
    pub fn rho(&self, p: &[f64], theta: &Frequency) -> Result<f64> {
        self.check_len(p)?;
        if !self.model.defined_at(p) {
            return Ok(f64::INFINITY);
        }
        spectral_radius(&self.error_symbol(p, theta)?)
    }

    pub fn relaxation_symbol(&self, p: &[f64], theta: &Frequency) -> Option<Result<ComplexMatrix>> {
        if let Err(e) = self.check_point(p, theta) {
            return Some(Err(e));
        }
        self.model.relaxation_symbol(p, theta)
    }

    pub fn has_analytic_derivative(&self) -> bool {
        let p = self.initial.clone();
        let t = Frequency::splat(self.dim, 0.3);
        self.model.parts_derivative(&p, &t, 0).is_some()
    }

    /// `dẼ/dp_j` in closed form, when the problem provides one.
    pub fn analytic_matrix_derivative(&self, p: &[f64], theta: &Frequency, j: usize) -> Option<Result<ComplexMatrix>> {
        if j >= self.n_params() {
            return Some(Err(Error::InvalidArgument(format!("parameter index {j} out of range"))));
        }
        if let Err(e) = self.check_point(p, theta) {
            return Some(Err(e));
        }
        let d = self.model.parts_derivative(p, theta, j)?;
        Some(d.and_then(|d| assemble_two_grid_derivative(&self.model.two_grid_parts(p, theta)?, &d)))
    }

    /// Entrywise central difference of `Ẽ` in `p[j]` with step [`MATRIX_FD_STEP`].
    pub fn fd_matrix_derivative(&self, p: &[f64], theta: &Frequency, j: usize) -> Result<ComplexMatrix> {
        let mut plus = p.to_vec();
        let mut minus = p.to_vec();
        plus[j] += MATRIX_FD_STEP;
        minus[j] -= MATRIX_FD_STEP;
        let d = self.error_symbol(&plus, theta)? - self.error_symbol(&minus, theta)?;
        Ok(d / re(2.0 * MATRIX_FD_STEP))
    }

    /// `dẼ/dp_j`: analytic when available, entrywise central difference otherwise.
    pub fn matrix_derivative(&self, p: &[f64], theta: &Frequency, j: usize) -> Result<ComplexMatrix> {
        match self.analytic_matrix_derivative(p, theta, j) {
            Some(d) => d,
            None => self.fd_matrix_derivative(p, theta, j),
        }
    }
}

fn scalar(z: Complex64) -> ComplexMatrix {
    ComplexMatrix::from_element(1, 1, z)
}

fn scalars(v: &[Complex64]) -> Vec<ComplexMatrix> {
    v.iter().map(|&z| scalar(z)).collect()
}

fn symbol(st: &Stencil, t: f64) -> Complex64 {
    // 1D stencils evaluated at scalar angles never mismatch in dimension.
    evaluate_stencil_symbol(st, &Frequency::splat(1, t)).expect("1D stencil")
}

/// `2 - 2cos t` written as `4 sin²(t/2)`, which keeps full relative accuracy near `t = 0`.
fn second_difference(t: f64) -> f64 {
    4.0 * (0.5 * t).sin().powi(2)
}

/// `1 + cos t` written as `2 cos²(t/2)`, accurate near `t = π`.
fn one_plus_cos(t: f64) -> f64 {
    2.0 * (0.5 * t).cos().powi(2)
}

fn finite(m: ComplexMatrix, what: &str) -> Result<ComplexMatrix> {
    if is_finite(&m) {
        Ok(m)
    } else {
        Err(Error::NumericalFailure { what: what.into(), matrix_hash: matrix_hash(&m) })
    }
}

/// How the 1D relaxation weights map to the parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Weights {
    /// One weight for every sweep.
    Shared,
    /// `p1` for pre-relaxation, `p2` for post-relaxation.
    Separate,
}

/// 1D P1 Laplacian, weighted Jacobi, linear interpolation, rediscretized coarse grid.
#[derive(Debug)]
struct Laplace1dP1 {
    pre: usize,
    post: usize,
    weights: Weights,
}

impl Laplace1dP1 {
    fn weights(&self, p: &[f64]) -> (f64, f64) {
        match self.weights {
            Weights::Shared => (p[0], p[0]),
            Weights::Separate => (p[0], p[1]),
        }
    }

    /// Fine symbols per harmonic and the shared harmonic set.
    fn fine(theta: &Frequency) -> Result<(HarmonicSet, Vec<Complex64>)> {
        let h = build_harmonics(theta, 2)?;
        let l = h.members.iter().map(|t| re(second_difference(t.components()[0]))).collect();
        Ok((h, l))
    }

    /// Jacobi with diagonal 2: `1 - w L̃ / 2`.
    fn jacobi(l: &[Complex64], w: f64) -> Vec<ComplexMatrix> {
        l.iter().map(|&z| scalar(re(1.0) - z * (w / 2.0))).collect()
    }
}

impl SymbolModel for Laplace1dP1 {
    fn two_grid_parts(&self, p: &[f64], theta: &Frequency) -> Result<TwoGridSymbolParts> {
        let (harm, l) = Self::fine(theta)?;
        // Linear interpolation stencil [1/2 1 1/2] has symbol 1 + cos θ.
        let r: Vec<Complex64> = harm.members.iter().map(|t| re(one_plus_cos(t.components()[0]))).collect();
        let pro: Vec<Complex64> = r.iter().map(|z| z.conj() / 2.0).collect();
        // (1/2)[-1 2 -1] at 2θ.
        let coarse = re(0.5 * second_difference(2.0 * theta.components()[0]));
        let (w1, w2) = self.weights(p);
        Ok(TwoGridSymbolParts {
            base: theta.clone(),
            fine_blocks: scalars(&l),
            relax_blocks: Self::jacobi(&l, w1),
            post_relax_blocks: (self.weights == Weights::Separate).then(|| Self::jacobi(&l, w2)),
            prolongation_blocks: scalars(&pro),
            restriction_blocks: scalars(&r),
            coarse: scalar(coarse),
            cgc_damping: 1.0,
            pre_sweeps: self.pre,
            post_sweeps: self.post,
        })
    }

    fn parts_derivative(&self, _p: &[f64], theta: &Frequency, j: usize) -> Option<Result<PartsDerivative>> {
        Some(Self::fine(theta).map(|(_, l)| {
            let dl: Vec<ComplexMatrix> = l.iter().map(|&z| scalar(-z / 2.0)).collect();
            let zero: Vec<ComplexMatrix> = l.iter().map(|_| scalar(re(0.0))).collect();
            match (self.weights, j) {
                (Weights::Shared, _) => PartsDerivative { relax_blocks: Some(dl), ..Default::default() },
                (Weights::Separate, 0) => PartsDerivative {
                    relax_blocks: Some(dl),
                    post_relax_blocks: Some(zero),
                    ..Default::default()
                },
                (Weights::Separate, _) => PartsDerivative {
                    relax_blocks: Some(zero),
                    post_relax_blocks: Some(dl),
                    ..Default::default()
                },
            }
        }))
    }

    fn relaxation_symbol(&self, p: &[f64], theta: &Frequency) -> Option<Result<ComplexMatrix>> {
        let l = second_difference(theta.components()[0]);
        Some(Ok(scalar(re(1.0 - l * self.weights(p).0 / 2.0))))
    }
}

/// 1D P1 Laplacian with coarsening by three, piecewise-constant interpolation,
/// Galerkin coarse operator and a damped coarse-grid correction.
#[derive(Debug)]
struct Laplace1dP1Coarsen3;

impl Laplace1dP1Coarsen3 {
    fn fine(theta: &Frequency) -> Result<(HarmonicSet, Vec<Complex64>)> {
        let h = build_harmonics(theta, 3)?;
        let l = h.members.iter().map(|t| re(second_difference(t.components()[0]))).collect();
        Ok((h, l))
    }
}

impl SymbolModel for Laplace1dP1Coarsen3 {
    fn two_grid_parts(&self, p: &[f64], theta: &Frequency) -> Result<TwoGridSymbolParts> {
        let (harm, l) = Self::fine(theta)?;
        // Restriction is the transpose of piecewise-constant interpolation: stencil [1 1 1].
        let agg = Stencil::centered_1d(&[1.0, 1.0, 1.0], 1.0);
        let r: Vec<Complex64> = harm.members.iter().map(|t| symbol(&agg, t.components()[0])).collect();
        let pro: Vec<Complex64> = r.iter().map(|z| z.conj() / 3.0).collect();
        let coarse: Complex64 = r.iter().zip(&l).zip(&pro).map(|((a, b), c)| a * b * c).sum();
        let s = Laplace1dP1::jacobi(&l, p[0]);
        Ok(TwoGridSymbolParts {
            base: theta.clone(),
            fine_blocks: scalars(&l),
            relax_blocks: s,
            post_relax_blocks: None,
            prolongation_blocks: scalars(&pro),
            restriction_blocks: scalars(&r),
            coarse: scalar(coarse),
            cgc_damping: p[1],
            pre_sweeps: 1,
            post_sweeps: 1,
        })
    }

    fn parts_derivative(&self, _p: &[f64], theta: &Frequency, j: usize) -> Option<Result<PartsDerivative>> {
        Some(Self::fine(theta).map(|(_, l)| {
            if j == 0 {
                PartsDerivative {
                    relax_blocks: Some(l.iter().map(|&z| scalar(-z / 2.0)).collect()),
                    ..Default::default()
                }
            } else {
                PartsDerivative { cgc_damping: 1.0, ..Default::default() }
            }
        }))
    }

    fn relaxation_symbol(&self, p: &[f64], theta: &Frequency) -> Option<Result<ComplexMatrix>> {
        let l = second_difference(theta.components()[0]);
        Some(Ok(scalar(re(1.0 - l * p[0] / 2.0))))
    }
}

/// Block relaxation for the MAC Stokes system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MacRelaxation {
    /// Inexact Braess-Sarazin: one weighted Jacobi sweep on the Schur complement.
    BraessSarazin,
    /// Block lower-triangular (Uzawa-type) approximation.
    Uzawa,
}

/// Staggered MAC discretization of 2D Stokes with bilinear transfers.
///
/// Unknown order per grid point is `(u, v, p)`. The parameters are the outer
/// damping `p1`, the scaling `p2` of the momentum diagonal and the Schur
/// (or pressure) weight `p3`.
#[derive(Debug)]
struct StokesMac {
    relaxation: MacRelaxation,
    h: f64,
}

/// Coarse-cell offsets (in fine mesh units) of u, v and p unknowns; they give
/// the sign `e^{iπα·O}` of each harmonic in the transfer symbols.
const MAC_OFFSETS: [[usize; 2]; 3] = [[0, 1], [1, 0], [1, 1]];

impl StokesMac {
    /// `[[a, 0, b̄1], [0, a, b̄2], [b1, b2, 0]]`.
    fn operator(t: &[f64], h: f64) -> ComplexMatrix {
        let a = re((second_difference(t[0]) + second_difference(t[1])) / (h * h));
        let b1 = c(0.0, 2.0 / h * (t[0] / 2.0).sin());
        let b2 = c(0.0, 2.0 / h * (t[1] / 2.0).sin());
        let z = re(0.0);
        ComplexMatrix::from_row_slice(3, 3, &[a, z, b1.conj(), z, a, b2.conj(), b1, b2, z])
    }

    /// Restriction symbols for u, v and p: full weighting on the staggered layout.
    fn restriction(t: &[f64]) -> [f64; 3] {
        let (c1, c2) = ((t[0] / 2.0).cos(), (t[1] / 2.0).cos());
        [0.5 * one_plus_cos(t[0]) * c2, 0.5 * one_plus_cos(t[1]) * c1, c1 * c2]
    }

    fn diag(&self) -> f64 {
        4.0 / (self.h * self.h)
    }

    /// Approximate inverse `M⁻¹` of the relaxation and its derivatives in `(p2, p3)`.
    fn minv(&self, l: &ComplexMatrix, p2: f64, p3: f64) -> [ComplexMatrix; 3] {
        let d = self.diag();
        // Diagonal of B D⁻¹ Bᵀ relative to its stencil center.
        let ds = 1.0;
        let b = l.view((2, 0), (1, 2)).clone_owned();
        let bt = l.view((0, 2), (2, 1)).clone_owned();
        let i2 = identity(2);
        let mut m = ComplexMatrix::zeros(3, 3);
        let mut m2 = ComplexMatrix::zeros(3, 3);
        let mut m3 = ComplexMatrix::zeros(3, 3);
        match self.relaxation {
            MacRelaxation::BraessSarazin => {
                let btb = &bt * &b;
                let uu = (&i2 - &btb * re(p3 / (ds * d))) / re(p2 * d);
                m.view_mut((0, 0), (2, 2)).copy_from(&uu);
                m.view_mut((0, 2), (2, 1)).copy_from(&(&bt * re(p3 / (ds * d))));
                m.view_mut((2, 0), (1, 2)).copy_from(&(&b * re(p3 / (ds * d))));
                m[(2, 2)] = re(-p2 * p3 / ds);

                m2.view_mut((0, 0), (2, 2)).copy_from(&(-&uu / re(p2)));
                m2[(2, 2)] = re(-p3 / ds);

                m3.view_mut((0, 0), (2, 2)).copy_from(&(-&btb / re(ds * p2 * d * d)));
                m3.view_mut((0, 2), (2, 1)).copy_from(&(&bt / re(ds * d)));
                m3.view_mut((2, 0), (1, 2)).copy_from(&(&b / re(ds * d)));
                m3[(2, 2)] = re(-p2 / ds);
            }
            MacRelaxation::Uzawa => {
                // δU = r_U / (p2 D), then δp = p3 (B δU - r_p).
                m.view_mut((0, 0), (2, 2)).copy_from(&(&i2 / re(p2 * d)));
                m.view_mut((2, 0), (1, 2)).copy_from(&(&b * re(p3 / (p2 * d))));
                m[(2, 2)] = re(-p3);

                m2.view_mut((0, 0), (2, 2)).copy_from(&(-&i2 / re(p2 * p2 * d)));
                m2.view_mut((2, 0), (1, 2)).copy_from(&(-&b * re(p3 / (p2 * p2 * d))));

                m3.view_mut((2, 0), (1, 2)).copy_from(&(&b / re(p2 * d)));
                m3[(2, 2)] = re(-1.0);
            }
        }
        [m, m2, m3]
    }

    fn relax(&self, p: &[f64], l: &ComplexMatrix) -> ComplexMatrix {
        let [m, _, _] = self.minv(l, p[1], p[2]);
        identity(3) - m * l * re(p[0])
    }

    fn relax_derivative(&self, p: &[f64], l: &ComplexMatrix, j: usize) -> ComplexMatrix {
        let [m, m2, m3] = self.minv(l, p[1], p[2]);
        match j {
            0 => -(m * l),
            1 => -(m2 * l) * re(p[0]),
            _ => -(m3 * l) * re(p[0]),
        }
    }
}

impl SymbolModel for StokesMac {
    fn two_grid_parts(&self, p: &[f64], theta: &Frequency) -> Result<TwoGridSymbolParts> {
        let harm = build_harmonics(theta, 2)?;
        let mut fine = Vec::with_capacity(4);
        let mut relax = Vec::with_capacity(4);
        let mut pro = Vec::with_capacity(4);
        let mut res = Vec::with_capacity(4);
        for (t, alpha) in harm.members.iter().zip(&harm.shifts) {
            let l = Self::operator(t.components(), self.h);
            relax.push(finite(self.relax(p, &l), "MAC relaxation symbol")?);
            let r = Self::restriction(t.components());
            let mut rb = ComplexMatrix::zeros(3, 3);
            for v in 0..3 {
                let parity = alpha[0] * MAC_OFFSETS[v][0] + alpha[1] * MAC_OFFSETS[v][1];
                let sign = if parity % 2 == 0 { 1.0 } else { -1.0 };
                rb[(v, v)] = re(sign * r[v]);
            }
            pro.push(rb.adjoint());
            res.push(rb);
            fine.push(l);
        }
        let coarse = Self::operator(theta.scaled(2.0).components(), 2.0 * self.h);
        Ok(TwoGridSymbolParts {
            base: theta.clone(),
            fine_blocks: fine,
            relax_blocks: relax,
            post_relax_blocks: None,
            prolongation_blocks: pro,
            restriction_blocks: res,
            coarse,
            cgc_damping: 1.0,
            pre_sweeps: 1,
            post_sweeps: 0,
        })
    }

    fn parts_derivative(&self, p: &[f64], theta: &Frequency, j: usize) -> Option<Result<PartsDerivative>> {
        Some(build_harmonics(theta, 2).map(|harm| PartsDerivative {
            relax_blocks: Some(
                harm.members
                    .iter()
                    .map(|t| self.relax_derivative(p, &Self::operator(t.components(), self.h), j))
                    .collect(),
            ),
            ..Default::default()
        }))
    }

    fn relaxation_symbol(&self, p: &[f64], theta: &Frequency) -> Option<Result<ComplexMatrix>> {
        let l = Self::operator(theta.components(), self.h);
        Some(finite(self.relax(p, &l), "MAC relaxation symbol"))
    }

    fn defined_at(&self, p: &[f64]) -> bool {
        p.len() == 3 && p[1] != 0.0
    }
}

/// 3D elliptic optimal control (state, adjoint, control) with Q1 elements,
/// block Jacobi relaxation and trilinear transfers.
#[derive(Debug)]
struct Control3dQ1 {
    beta: f64,
    h: f64,
}

impl Control3dQ1 {
    /// `[[M, K, 0], [K, 0, -M], [0, -M, βM]]` from tensor-product Q1 symbols.
    fn operator(&self, t: &[f64], h: f64) -> ComplexMatrix {
        let mass = Stencil::centered_1d(&[1.0, 4.0, 1.0], h / 6.0);
        let m: Vec<f64> = t.iter().map(|&x| symbol(&mass, x).re).collect();
        let k: Vec<f64> = t.iter().map(|&x| second_difference(x) / h).collect();
        let mm = m[0] * m[1] * m[2];
        let kk = k[0] * m[1] * m[2] + m[0] * k[1] * m[2] + m[0] * m[1] * k[2];
        let z = 0.0;
        let v = [mm, kk, z, kk, z, -mm, z, -mm, self.beta * mm];
        ComplexMatrix::from_iterator(3, 3, v.iter().map(|&x| re(x))).transpose()
    }

    /// Block-diagonal approximation built from stencil centers, with `K` scaled by `p2`.
    fn approx(&self, p2: f64) -> ComplexMatrix {
        let m0 = (2.0 * self.h / 3.0).powi(3);
        let k0 = 8.0 * self.h / 3.0;
        let v = [m0, p2 * k0, 0.0, p2 * k0, 0.0, -m0, 0.0, -m0, self.beta * m0];
        ComplexMatrix::from_iterator(3, 3, v.iter().map(|&x| re(x))).transpose()
    }

    fn approx_dp2(&self) -> ComplexMatrix {
        let k0 = 8.0 * self.h / 3.0;
        let v = [0.0, k0, 0.0, k0, 0.0, 0.0, 0.0, 0.0, 0.0];
        ComplexMatrix::from_iterator(3, 3, v.iter().map(|&x| re(x)))
    }

    fn relax(&self, p: &[f64], l: &ComplexMatrix) -> Result<ComplexMatrix> {
        let x = solve(&self.approx(p[1]), l).ok_or_else(|| Error::NumericalFailure {
            what: "control block Jacobi approximation is singular".into(),
            matrix_hash: matrix_hash(l),
        })?;
        Ok(identity(3) - x * re(p[0]))
    }

    fn relax_derivative(&self, p: &[f64], l: &ComplexMatrix, j: usize) -> Result<ComplexMatrix> {
        let a = self.approx(p[1]);
        let x = solve(&a, l).ok_or_else(|| Error::NumericalFailure {
            what: "control block Jacobi approximation is singular".into(),
            matrix_hash: matrix_hash(l),
        })?;
        if j == 0 {
            return Ok(-x);
        }
        // d(Â⁻¹)/dp2 = -Â⁻¹ (dÂ/dp2) Â⁻¹
        let y = solve(&a, &(self.approx_dp2() * &x)).expect("same matrix factored above");
        Ok(y * re(p[0]))
    }

    fn transfer(t: &[f64]) -> f64 {
        t.iter().map(|&x| one_plus_cos(x)).product()
    }
}

impl SymbolModel for Control3dQ1 {
    fn two_grid_parts(&self, p: &[f64], theta: &Frequency) -> Result<TwoGridSymbolParts> {
        let harm = build_harmonics(theta, 2)?;
        let mut fine = Vec::with_capacity(8);
        let mut relax = Vec::with_capacity(8);
        let mut pro = Vec::with_capacity(8);
        let mut res = Vec::with_capacity(8);
        for t in &harm.members {
            let l = self.operator(t.components(), self.h);
            relax.push(self.relax(p, &l)?);
            let r = Self::transfer(t.components());
            res.push(identity(3) * re(r));
            pro.push(identity(3) * re(r / 8.0));
            fine.push(l);
        }
        Ok(TwoGridSymbolParts {
            base: theta.clone(),
            fine_blocks: fine,
            relax_blocks: relax,
            post_relax_blocks: None,
            prolongation_blocks: pro,
            restriction_blocks: res,
            coarse: self.operator(theta.scaled(2.0).components(), 2.0 * self.h),
            cgc_damping: 1.0,
            pre_sweeps: 1,
            post_sweeps: 0,
        })
    }

    fn parts_derivative(&self, p: &[f64], theta: &Frequency, j: usize) -> Option<Result<PartsDerivative>> {
        let blocks = build_harmonics(theta, 2).and_then(|harm| {
            harm.members
                .iter()
                .map(|t| self.relax_derivative(p, &self.operator(t.components(), self.h), j))
                .collect::<Result<Vec<_>>>()
        });
        Some(blocks.map(|b| PartsDerivative { relax_blocks: Some(b), ..Default::default() }))
    }

    fn relaxation_symbol(&self, p: &[f64], theta: &Frequency) -> Option<Result<ComplexMatrix>> {
        Some(self.relax(p, &self.operator(theta.components(), self.h)))
    }
}

/// 1D P1 Laplace two-grid problem with `ν1` pre- and `ν2` post-sweeps.
pub fn laplace1d_p1(pre_sweeps: usize, post_sweeps: usize, weights: Weights) -> Result<ProblemSpec> {
    if pre_sweeps + post_sweeps == 0 {
        return Err(Error::InvalidArgument("at least one relaxation sweep is required".into()));
    }
    if weights == Weights::Separate && (pre_sweeps != 1 || post_sweeps != 1) {
        return Err(Error::InvalidArgument("separate weights need exactly one pre- and one post-sweep".into()));
    }
    let n = if weights == Weights::Separate { 2 } else { 1 };
    let name = match (pre_sweeps, post_sweeps, weights) {
        (1, 0, Weights::Shared) => "laplace1d-p1".to_string(),
        (1, 1, Weights::Separate) => "laplace1d-p1-2sweep".to_string(),
        (a, b, Weights::Shared) => format!("laplace1d-p1-tg{a}{b}"),
        (a, b, Weights::Separate) => format!("laplace1d-p1-tg{a}{b}-separate"),
    };
    let start = if (pre_sweeps, post_sweeps) == (1, 0) { 0.1 } else { 0.5 };
    let reference = match (pre_sweeps, post_sweeps, weights) {
        (1, 0, Weights::Shared) => Some(ReferenceOptimum { params: vec![2.0 / 3.0], rho: 1.0 / 3.0 }),
        (1, 1, Weights::Shared) => Some(ReferenceOptimum { params: vec![2.0 / 3.0], rho: 1.0 / 9.0 }),
        (1, 1, Weights::Separate) => Some(ReferenceOptimum { params: vec![1.0, 0.5], rho: 0.0 }),
        _ => None,
    };
    Ok(ProblemSpec {
        name,
        dim: 1,
        coarsening: 2,
        block_size: 1,
        bounds: ParamBox::uniform(n, 0.0, 2.5),
        initial: vec![start; n],
        param_names: (1..=n).map(|i| format!("p{i}")).collect(),
        reference,
        model: Arc::new(Laplace1dP1 { pre: pre_sweeps, post: post_sweeps, weights }),
    })
}

/// 1D P1 Laplace with coarsening by three; parameters are the Jacobi weight and the CGC damping.
pub fn laplace1d_p1_coarsen3() -> ProblemSpec {
    ProblemSpec {
        name: "laplace1d-p1-c3".into(),
        dim: 1,
        coarsening: 3,
        block_size: 1,
        bounds: ParamBox::uniform(2, 0.0, 2.5),
        initial: vec![0.5, 0.5],
        param_names: vec!["p1".into(), "p2".into()],
        reference: Some(ReferenceOptimum { params: vec![0.72, 2.30], rho: 0.421 }),
        model: Arc::new(Laplace1dP1Coarsen3),
    }
}

fn stokes_mac(relaxation: MacRelaxation, h: f64) -> Result<ProblemSpec> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("mesh size must be positive, got {h}")));
    }
    let (name, reference) = match relaxation {
        MacRelaxation::BraessSarazin => ("stokes-mac-bsr", ReferenceOptimum { params: vec![1.0, 1.25, 0.8], rho: 0.6 }),
        MacRelaxation::Uzawa => (
            "stokes-mac-uzawa",
            ReferenceOptimum { params: vec![1.0, 1.25, 0.25], rho: (3.0f64 / 5.0).sqrt() },
        ),
    };
    Ok(ProblemSpec {
        name: name.into(),
        dim: 2,
        coarsening: 2,
        block_size: 3,
        bounds: ParamBox::uniform(3, 0.0, 2.5),
        initial: vec![0.5; 3],
        param_names: vec!["p1".into(), "p2".into(), "p3".into()],
        reference: Some(reference),
        model: Arc::new(StokesMac { relaxation, h }),
    })
}

/// MAC Stokes with inexact Braess-Sarazin relaxation (mesh size 1; ρ does not depend on it).
pub fn stokes_mac_bsr() -> ProblemSpec {
    stokes_mac(MacRelaxation::BraessSarazin, 1.0).expect("positive mesh size")
}

/// MAC Stokes with Uzawa-type relaxation.
pub fn stokes_mac_uzawa() -> ProblemSpec {
    stokes_mac(MacRelaxation::Uzawa, 1.0).expect("positive mesh size")
}

/// MAC Stokes at an explicit mesh size.
pub fn stokes_mac_with_h(relaxation: MacRelaxation, h: f64) -> Result<ProblemSpec> {
    stokes_mac(relaxation, h)
}

pub const CONTROL_DEFAULT_BETA: f64 = 1e-2;
pub const CONTROL_DEFAULT_H: f64 = 1.0 / 64.0;

/// 3D optimal control with Q1 elements; parameters are the block Jacobi damping and the stiffness scaling.
pub fn control3d_q1(beta: f64, h: f64) -> Result<ProblemSpec> {
    if !(beta > 0.0) || !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("beta and h must be positive, got beta={beta}, h={h}")));
    }
    Ok(ProblemSpec {
        name: "control3d-q1".into(),
        dim: 3,
        coarsening: 2,
        block_size: 3,
        bounds: ParamBox::new(vec![0.0, 0.0], vec![2.5, 4.5])?,
        initial: vec![0.5, 0.5],
        param_names: vec!["p1".into(), "p2".into()],
        reference: Some(ReferenceOptimum { params: vec![0.842, 1.527], rho: 0.895 }),
        model: Arc::new(Control3dQ1 { beta, h }),
    })
}

/// Overrides for problems that take physical parameters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ProblemOverrides {
    pub beta: Option<f64>,
    pub h: Option<f64>,
}

/// Names accepted by [`problem_by_name`].
pub const PROBLEM_NAMES: [&str; 6] = [
    "laplace1d-p1",
    "laplace1d-p1-2sweep",
    "laplace1d-p1-c3",
    "stokes-mac-bsr",
    "stokes-mac-uzawa",
    "control3d-q1",
];

/// Look up a registered problem.
pub fn problem_by_name(name: &str, overrides: ProblemOverrides) -> Result<ProblemSpec> {
    match name {
        "laplace1d-p1" => laplace1d_p1(1, 0, Weights::Shared),
        "laplace1d-p1-2sweep" => laplace1d_p1(1, 1, Weights::Separate),
        "laplace1d-p1-c3" => Ok(laplace1d_p1_coarsen3()),
        "stokes-mac-bsr" => stokes_mac(MacRelaxation::BraessSarazin, overrides.h.unwrap_or(1.0)),
        "stokes-mac-uzawa" => stokes_mac(MacRelaxation::Uzawa, overrides.h.unwrap_or(1.0)),
        "control3d-q1" => control3d_q1(
            overrides.beta.unwrap_or(CONTROL_DEFAULT_BETA),
            overrides.h.unwrap_or(CONTROL_DEFAULT_H),
        ),
        _ => Err(Error::UnknownProblem {
            name: name.into(),
            known: PROBLEM_NAMES.iter().map(|s| s.to_string()).collect(),
        }),
    }
}

/// Every registered problem with default settings.
pub fn registry() -> Vec<ProblemSpec> {
    PROBLEM_NAMES
        .iter()
        .map(|n| problem_by_name(n, ProblemOverrides::default()).expect("registered name"))
        .collect()
}

/// Closed-form nontrivial eigenvalue of the single-sweep 1D P1 two-grid symbol.
pub fn laplace1d_p1_lambda(p: f64, theta: f64) -> f64 {
    let s2 = (theta / 2.0).sin().powi(2);
    1.0 - 4.0 * p * ((s2 - 0.5).powi(2) + 0.25)
}

/// Low-frequency corner `(π/c, ..., π/c)`.
pub fn low_corner(problem: &ProblemSpec) -> Frequency {
    Frequency::splat(problem.dim, PI / problem.coarsening as f64)
}
