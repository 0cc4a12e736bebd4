//! Frequency-domain machinery: stencil symbols, harmonic enumeration,
//! two-grid symbol assembly and the max-over-frequencies objectives.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counter::EvalCounter;
use crate::eigen::spectral_radius;
use crate::error::{Error, Result};
use crate::linalg::{block_diag, hstack, identity, is_finite, matrix_hash, matrix_power, solve, vstack, ComplexMatrix};
use crate::problems::ProblemSpec;

/// Components below this magnitude are treated as zero frequency.
pub const GUARD_THRESHOLD: f64 = 1e-9;
/// Value substituted for zero frequency components.
pub const GUARD_VALUE: f64 = 1e-7;
/// Per-dimension resolution of the reporting grid.
pub const REPORTING_NTHETA: usize = 33;

/// A Fourier frequency θ with one angle (radians) per space dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Frequency(Vec<f64>);

impl Frequency {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if !(1..=3).contains(&components.len()) {
            return Err(Error::InvalidArgument(format!(
                "frequency dimension must be 1, 2 or 3, got {}",
                components.len()
            )));
        }
        if components.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite frequency {components:?}")));
        }
        Ok(Self(components))
    }

    /// The zero frequency of dimension `d`.
    pub fn zero(d: usize) -> Self {
        Self(vec![0.0; d])
    }

    /// `(v, v, ..., v)` in dimension `d`.
    pub fn splat(d: usize, v: f64) -> Self {
        Self(vec![v; d])
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Each component reduced modulo 2π into `[-π/2, 3π/2)`.
    pub fn reduced(&self) -> Self {
        Self(
            self.0
                .iter()
                .map(|&t| {
                    let r = (t + PI / 2.0).rem_euclid(2.0 * PI) - PI / 2.0;
                    if r >= 1.5 * PI { r - 2.0 * PI } else { r }
                })
                .collect(),
        )
    }

    /// Componentwise scaling, e.g. `cθ` for the coarse-grid symbol.
    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.iter().map(|t| t * factor).collect())
    }

    pub fn distance(&self, other: &Frequency) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
    }
}

/// Which part of the frequency domain a grid covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionKind {
    /// The closed low-frequency box `[-π/c, π/c]^d`.
    LowClosed,
    /// Frequencies aliased by coarsening: at least one component outside the open low interval.
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyRegion {
    pub kind: RegionKind,
    pub coarsening: usize,
}

impl FrequencyRegion {
    pub fn low(coarsening: usize) -> Self {
        Self { kind: RegionKind::LowClosed, coarsening }
    }

    pub fn high(coarsening: usize) -> Self {
        Self { kind: RegionKind::High, coarsening }
    }

    /// Half-width `π/c` of the low interval.
    pub fn low_half_width(&self) -> f64 {
        PI / self.coarsening as f64
    }

    /// Membership in the closed low box (with a rounding allowance).
    pub fn contains_low(&self, theta: &Frequency) -> bool {
        let w = self.low_half_width() * (1.0 + 1e-12);
        theta.components().iter().all(|t| t.abs() <= w)
    }
}

/// Replace (near-)zero components by a small positive value so that coarse
/// symbols stay invertible.
pub fn guard_frequency(theta: &Frequency) -> Frequency {
    Frequency(
        theta
            .0
            .iter()
            .map(|&t| if t.abs() < GUARD_THRESHOLD { GUARD_VALUE } else { t })
            .collect(),
    )
}

/// Equally spaced points over `[a, b]` (both ends included); a single point sits at the midpoint.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (a + b)],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Tensor grid over `axis^d`; the first component varies fastest.
fn tensor_grid(axis: &[f64], d: usize) -> Vec<Vec<f64>> {
    let n = axis.len();
    let total = n.pow(d as u32);
    (0..total)
        .map(|idx| (0..d).map(|j| axis[(idx / n.pow(j as u32)) % n]).collect())
        .collect()
}

/// Sample a frequency region on an equispaced tensor grid.
///
/// `LowClosed` uses `ntheta` points per dimension over `[-π/c, π/c]` with
/// both endpoints. `High` uses `ntheta` points per dimension over
/// `[-π/c, 2π - π/c)` and keeps those with at least one component outside
/// the open low interval. Every point is passed through [`guard_frequency`].
pub fn sample_frequency_grid(region: FrequencyRegion, d: usize, ntheta: usize) -> Result<Vec<Frequency>> {
    if !(1..=3).contains(&d) {
        return Err(Error::InvalidArgument(format!("dimension must be 1, 2 or 3, got {d}")));
    }
    if ntheta == 0 {
        return Err(Error::InvalidArgument("ntheta must be positive".into()));
    }
    let w = region.low_half_width();
    let points = match region.kind {
        RegionKind::LowClosed => tensor_grid(&linspace(-w, w, ntheta), d),
        RegionKind::High => {
            let axis: Vec<f64> = (0..ntheta).map(|k| -w + 2.0 * PI * k as f64 / ntheta as f64).collect();
            tensor_grid(&axis, d)
                .into_iter()
                .filter(|t| t.iter().any(|x| x.abs() >= w))
                .collect()
        }
    };
    Ok(points.into_iter().map(|t| guard_frequency(&Frequency(t))).collect())
}

/// Constant-coefficient stencil: offsets κ with coefficients s_κ.
///
/// Mesh-size factors are folded into the coefficients by the constructors.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    dim: usize,
    entries: Vec<(Vec<i32>, Complex64)>,
}

impl Stencil {
    pub fn new(dim: usize, entries: Vec<(Vec<i32>, Complex64)>) -> Result<Self> {
        for (i, (k, _)) in entries.iter().enumerate() {
            if k.len() != dim {
                return Err(Error::InvalidArgument(format!(
                    "stencil offset {k:?} has dimension {}, expected {dim}",
                    k.len()
                )));
            }
            if entries[..i].iter().any(|(k2, _)| k2 == k) {
                return Err(Error::InvalidArgument(format!("duplicate stencil offset {k:?}")));
            }
        }
        Ok(Self { dim, entries })
    }

    /// 1D stencil from real coefficients at offsets `-r..=r`, times `scale`.
    pub fn centered_1d(coeffs: &[f64], scale: f64) -> Self {
        let r = (coeffs.len() / 2) as i32;
        let entries = coeffs
            .iter()
            .enumerate()
            .map(|(i, &v)| (vec![i as i32 - r], Complex64::new(v * scale, 0.0)))
            .collect();
        Self { dim: 1, entries }
    }

    /// `(1/h)[-1 2 -1]`.
    pub fn laplace_1d(h: f64) -> Self {
        Self::centered_1d(&[-1.0, 2.0, -1.0], 1.0 / h)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(Vec<i32>, Complex64)] {
        &self.entries
    }

    /// `a·self + b·other`, merging equal offsets.
    pub fn combine(&self, a: Complex64, other: &Stencil, b: Complex64) -> Result<Stencil> {
        if self.dim != other.dim {
            return Err(Error::InvalidArgument("stencil dimensions differ".into()));
        }
        let mut entries: Vec<(Vec<i32>, Complex64)> = self.entries.iter().map(|(k, s)| (k.clone(), a * s)).collect();
        for (k, s) in &other.entries {
            match entries.iter_mut().find(|(k2, _)| k2 == k) {
                Some(e) => e.1 += b * s,
                None => entries.push((k.clone(), b * s)),
            }
        }
        Ok(Stencil { dim: self.dim, entries })
    }
}

/// The symbol `Σ_κ s_κ e^{iθ·κ}`.
pub fn evaluate_stencil_symbol(st: &Stencil, theta: &Frequency) -> Result<Complex64> {
    if st.dim != theta.dim() {
        return Err(Error::InvalidArgument(format!(
            "stencil dimension {} does not match frequency dimension {}",
            st.dim,
            theta.dim()
        )));
    }
    Ok(st
        .entries
        .iter()
        .map(|(k, s)| {
            let phase: f64 = k.iter().zip(theta.components()).map(|(&ki, t)| ki as f64 * t).sum();
            s * Complex64::from_polar(1.0, phase)
        })
        .sum())
}

/// The `c^d` frequencies coupled by coarse-grid correction.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicSet {
    pub base: Frequency,
    pub members: Vec<Frequency>,
    pub shifts: Vec<Vec<usize>>,
}

impl HarmonicSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Harmonics `θ^α = θ + (2π/c)·α`, `α ∈ {0..c-1}^d`, with `α = 0` first and the
/// first component of α varying fastest.
pub fn build_harmonics(theta: &Frequency, c: usize) -> Result<HarmonicSet> {
    if c != 2 && c != 3 {
        return Err(Error::InvalidArgument(format!("coarsening factor must be 2 or 3, got {c}")));
    }
    if !FrequencyRegion::low(c).contains_low(theta) {
        return Err(Error::InvalidArgument(format!(
            "frequency {:?} lies outside the low region for coarsening {c}",
            theta.components()
        )));
    }
    let d = theta.dim();
    let step = 2.0 * PI / c as f64;
    let count = c.pow(d as u32);
    let mut members = Vec::with_capacity(count);
    let mut shifts = Vec::with_capacity(count);
    for idx in 0..count {
        let alpha: Vec<usize> = (0..d).map(|j| (idx / c.pow(j as u32)) % c).collect();
        let comps = theta.components().iter().zip(&alpha).map(|(t, &a)| t + step * a as f64).collect();
        members.push(Frequency(comps));
        shifts.push(alpha);
    }
    Ok(HarmonicSet { base: theta.clone(), members, shifts })
}

/// Block operands of the two-grid symbol at one base frequency.
///
/// Per harmonic: fine operator and relaxation blocks (`q×q`), prolongation
/// (`q×q_c`) and restriction (`q_c×q`). The coarse block is `q_c×q_c` at `cθ`.
#[derive(Debug, Clone)]
pub struct TwoGridSymbolParts {
    pub base: Frequency,
    pub fine_blocks: Vec<ComplexMatrix>,
    pub relax_blocks: Vec<ComplexMatrix>,
    /// Post-smoother blocks when they differ from `relax_blocks`.
    pub post_relax_blocks: Option<Vec<ComplexMatrix>>,
    pub prolongation_blocks: Vec<ComplexMatrix>,
    pub restriction_blocks: Vec<ComplexMatrix>,
    pub coarse: ComplexMatrix,
    pub cgc_damping: f64,
    pub pre_sweeps: usize,
    pub post_sweeps: usize,
}

/// Parameter derivative of the varying operands in [`TwoGridSymbolParts`].
#[derive(Debug, Clone, Default)]
pub struct PartsDerivative {
    pub relax_blocks: Option<Vec<ComplexMatrix>>,
    pub post_relax_blocks: Option<Vec<ComplexMatrix>>,
    pub cgc_damping: f64,
}

struct Assembled {
    pre: ComplexMatrix,
    post: ComplexMatrix,
    /// `P L_H^{-1} R L`.
    correction: ComplexMatrix,
    cgc: ComplexMatrix,
}

fn assemble_pieces(parts: &TwoGridSymbolParts) -> Result<Assembled> {
    let nh = parts.fine_blocks.len();
    let conforming = parts.relax_blocks.len() == nh
        && parts.prolongation_blocks.len() == nh
        && parts.restriction_blocks.len() == nh
        && parts.post_relax_blocks.as_ref().is_none_or(|b| b.len() == nh);
    if !conforming || nh == 0 {
        return Err(Error::InvalidArgument("two-grid parts have inconsistent harmonic counts".into()));
    }
    let l = block_diag(&parts.fine_blocks);
    let pre = block_diag(&parts.relax_blocks);
    let post = match &parts.post_relax_blocks {
        Some(b) => block_diag(b),
        None => pre.clone(),
    };
    let p = vstack(&parts.prolongation_blocks);
    let r = hstack(&parts.restriction_blocks);
    if p.nrows() != l.nrows() || r.ncols() != l.ncols() || p.ncols() != parts.coarse.nrows() || r.nrows() != parts.coarse.ncols() {
        return Err(Error::InvalidArgument("two-grid block dimensions do not conform".into()));
    }
    let rl = &r * &l;
    let x = solve(&parts.coarse, &rl).ok_or_else(|| Error::SingularCoarse {
        theta: parts.base.components().to_vec(),
    })?;
    let correction = &p * x;
    let cgc = identity(l.nrows()) - &correction * Complex64::new(parts.cgc_damping, 0.0);
    Ok(Assembled { pre, post, correction, cgc })
}

fn finite_or_fail(m: ComplexMatrix, what: &str) -> Result<ComplexMatrix> {
    if is_finite(&m) {
        Ok(m)
    } else {
        Err(Error::NumericalFailure { what: what.into(), matrix_hash: matrix_hash(&m) })
    }
}

/// `S̃^{ν2} [I - ω P̃ L̃_H^{-1} R̃ L̃] S̃^{ν1}` with block-diagonal `L̃`, `S̃`.
pub fn assemble_two_grid_symbol(parts: &TwoGridSymbolParts) -> Result<ComplexMatrix> {
    let a = assemble_pieces(parts)?;
    let e = matrix_power(&a.post, parts.post_sweeps) * a.cgc * matrix_power(&a.pre, parts.pre_sweeps);
    finite_or_fail(e, "two-grid symbol")
}

/// Derivative of `S^k` given `dS`.
fn power_derivative(s: &ComplexMatrix, ds: &ComplexMatrix, k: usize) -> ComplexMatrix {
    let n = s.nrows();
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..k {
        out += matrix_power(s, i) * ds * matrix_power(s, k - 1 - i);
    }
    out
}

/// Product-rule derivative of the two-grid symbol.
pub fn assemble_two_grid_derivative(parts: &TwoGridSymbolParts, d: &PartsDerivative) -> Result<ComplexMatrix> {
    let a = assemble_pieces(parts)?;
    let n = a.cgc.nrows();
    let (nu1, nu2) = (parts.pre_sweeps, parts.post_sweeps);
    let s1 = matrix_power(&a.pre, nu1);
    let s2 = matrix_power(&a.post, nu2);
    let d_pre = d.relax_blocks.as_ref().map(|b| block_diag(b));
    // Without separate post blocks the post-smoother is the pre-smoother.
    let d_post = match (&parts.post_relax_blocks, &d.post_relax_blocks) {
        (_, Some(b)) => Some(block_diag(b)),
        (None, None) => d_pre.clone(),
        (Some(_), None) => None,
    };
    let mut out = ComplexMatrix::zeros(n, n);
    if let Some(dp) = &d_post {
        out += power_derivative(&a.post, dp, nu2) * &a.cgc * &s1;
    }
    if d.cgc_damping != 0.0 {
        out -= &s2 * &a.correction * &s1 * Complex64::new(d.cgc_damping, 0.0);
    }
    if let Some(dp) = &d_pre {
        out += &s2 * &a.cgc * power_derivative(&a.pre, dp, nu1);
    }
    finite_or_fail(out, "two-grid symbol derivative")
}

/// Objective value with the frequency index attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiValue {
    pub value: f64,
    pub argmax: usize,
}

/// Spectral radii at each frequency, computed in parallel.
pub fn rho_values(problem: &ProblemSpec, p: &[f64], freqs: &[Frequency], counter: &EvalCounter) -> Result<Vec<f64>> {
    let out: Result<Vec<f64>> = freqs.par_iter().map(|t| problem.rho(p, t)).collect();
    counter.charge(freqs.len() as u64);
    out
}

/// Largest entry, ties going to the lowest index.
pub fn argmax_lowest(values: &[f64]) -> PsiValue {
    let mut best = PsiValue { value: f64::NEG_INFINITY, argmax: 0 };
    for (i, &v) in values.iter().enumerate() {
        if v > best.value {
            best = PsiValue { value: v, argmax: i };
        }
    }
    best
}

/// `Ψ(p) = max_θ ρ(Ẽ(p, θ))` over a finite frequency set; charges `|freqs|`.
pub fn psi(problem: &ProblemSpec, p: &[f64], freqs: &[Frequency], counter: &EvalCounter) -> Result<PsiValue> {
    if freqs.is_empty() {
        return Err(Error::InvalidArgument("psi needs at least one frequency".into()));
    }
    problem.check_len(p)?;
    Ok(argmax_lowest(&rho_values(problem, p, freqs, counter)?))
}

/// Smoothing factor: max of `ρ(S̃(p, θ))` over a high-frequency grid with
/// `ntheta` points per dimension.
pub fn smoothing_factor(problem: &ProblemSpec, p: &[f64], ntheta: usize) -> Result<f64> {
    problem.check_len(p)?;
    let grid = sample_frequency_grid(FrequencyRegion::high(problem.coarsening), problem.dim, ntheta)?;
    let vals: Result<Vec<f64>> = grid
        .par_iter()
        .map(|t| {
            let s = problem
                .relaxation_symbol(p, t)
                .ok_or_else(|| Error::Unsupported(format!("{} has no relaxation symbol", problem.name)))??;
            spectral_radius(&s)
        })
        .collect();
    Ok(vals?.into_iter().fold(0.0, f64::max))
}

/// Ψ on the guarded low grid with `ntheta` points per dimension, not charged anywhere.
pub fn rho_psi_on_grid(problem: &ProblemSpec, p: &[f64], ntheta: usize) -> Result<f64> {
    let grid = sample_frequency_grid(FrequencyRegion::low(problem.coarsening), problem.dim, ntheta)?;
    Ok(psi(problem, p, &grid, &EvalCounter::new())?.value)
}

/// The reporting metric: Ψ over the 33-per-dimension low grid.
pub fn rho_psi_star(problem: &ProblemSpec, p: &[f64]) -> Result<f64> {
    rho_psi_on_grid(problem, p, REPORTING_NTHETA)
}
