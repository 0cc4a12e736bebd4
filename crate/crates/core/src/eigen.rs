//! Eigenvalues of small dense complex matrices and the eigenvalue derivatives
//! used to differentiate spectral radii with respect to solver parameters.
//!
//! The solver is the textbook pipeline: diagonal balancing, Householder
//! reduction to Hessenberg form, then single-shift QR sweeps with Wilkinson
//! shifts and deflation. Eigenvectors come from inverse iteration.

use num_complex::Complex64;

use crate::counter::EvalCounter;
use crate::error::{Error, Result};
use crate::fourier::Frequency;
use crate::linalg::{check_square, frobenius, matrix_hash, ComplexMatrix, ComplexVector, PerturbedLu};
use crate::problems::ProblemSpec;

/// An eigenvalue with its right and (optionally) left eigenvectors.
///
/// Both vectors have unit 2-norm. The left vector satisfies `yᵀA = λyᵀ`
/// (plain transpose, no conjugation).
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: Complex64,
    pub right: ComplexVector,
    pub left: Option<ComplexVector>,
}

/// How parameter gradients of a spectral radius are obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GradientMode {
    /// Eigenvalue perturbation formulas; not charged.
    Analytic,
    /// Componentwise central differences with the given step.
    CentralDiff(f64),
    /// Derivative-free; no gradients requested.
    None,
}

impl GradientMode {
    pub fn is_derivative_free(&self) -> bool {
        matches!(self, GradientMode::None)
    }
}

impl std::fmt::Display for GradientMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GradientMode::Analytic => write!(f, "analytic"),
            GradientMode::CentralDiff(t) => write!(f, "fd:{t:e}"),
            GradientMode::None => write!(f, "none"),
        }
    }
}

impl std::str::FromStr for GradientMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(GradientMode::Analytic),
            "none" => Ok(GradientMode::None),
            _ => {
                let step = s
                    .strip_prefix("fd:")
                    .and_then(|t| t.parse::<f64>().ok())
                    .filter(|t| *t > 0.0 && t.is_finite());
                step.map(GradientMode::CentralDiff).ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "gradient mode `{s}`: expected analytic, none or fd:<step>"
                    ))
                })
            }
        }
    }
}

impl serde::Serialize for GradientMode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for GradientMode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

const RADIX: f64 = 2.0;

/// Scale rows and columns by powers of two so row and column norms are comparable.
fn balance(h: &mut ComplexMatrix) {
    let n = h.nrows();
    let cabs = |z: Complex64| z.re.abs() + z.im.abs();
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut col = 0.0;
            let mut row = 0.0;
            for j in 0..n {
                if j != i {
                    col += cabs(h[(j, i)]);
                    row += cabs(h[(i, j)]);
                }
            }
            if col == 0.0 || row == 0.0 {
                continue;
            }
            let total = col + row;
            let mut f = 1.0;
            let mut g = row / RADIX;
            while col < g {
                f *= RADIX;
                col *= RADIX * RADIX;
            }
            g = row * RADIX;
            while col > g {
                f /= RADIX;
                col /= RADIX * RADIX;
            }
            if (col + row) / f < 0.95 * total {
                done = false;
                let g = 1.0 / f;
                for j in 0..n {
                    h[(i, j)] *= g;
                }
                for j in 0..n {
                    h[(j, i)] *= f;
                }
            }
        }
    }
}

/// In-place Householder reduction to upper Hessenberg form (similarity transform).
fn hessenberg(h: &mut ComplexMatrix) {
    let n = h.nrows();
    if n < 3 {
        return;
    }
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n - 2 {
        let m = n - k - 1;
        let xnorm = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * xnorm;
        for i in 0..m {
            v[i] = h[(k + 1 + i, k)];
        }
        v[0] -= alpha;
        let vnorm = v[..m].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v[..m].iter_mut() {
            *z /= vnorm;
        }
        // H <- (I - 2vv^H) H
        for j in k..n {
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..m {
                s += v[i].conj() * h[(k + 1 + i, j)];
            }
            for i in 0..m {
                h[(k + 1 + i, j)] -= v[i] * s * 2.0;
            }
        }
        // H <- H (I - 2vv^H)
        for i in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for l in 0..m {
                s += h[(i, k + 1 + l)] * v[l];
            }
            for l in 0..m {
                h[(i, k + 1 + l)] -= s * v[l].conj() * 2.0;
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
}

/// Eigenvalues of a 2x2 block `[[a, b], [c, d]]`.
fn eig2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let mean = (a + d) * 0.5;
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    (mean + disc, mean - disc)
}

/// Complex Givens rotation `(c, s)` with `[c s; -conj(s) c] [a; b] = [r; 0]`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if na == 0.0 {
        return (0.0, b.conj() / nb);
    }
    let r = na.hypot(nb);
    (na / r, (a / na) * b.conj() / r)
}

/// All eigenvalues (with multiplicity) of a square complex matrix.
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<Complex64>> {
    check_square(a, "eigenvalues")?;
    let n = a.nrows();
    match n {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![a[(0, 0)]]),
        2 => {
            let (l1, l2) = eig2(a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
            return Ok(vec![l1, l2]);
        }
        _ => {}
    }
    let mut h = a.clone();
    balance(&mut h);
    hessenberg(&mut h);

    let cabs = |z: Complex64| z.re.abs() + z.im.abs();
    let hnorm = h.iter().map(|z| cabs(*z)).fold(0.0, f64::max);
    if hnorm == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); n]);
    }
    let ulp = f64::EPSILON;
    let small = ulp * hnorm * 1e-3;
    let cap = 100 * n;

    let mut eigs = Vec::with_capacity(n);
    let mut hi = n as isize - 1;
    let mut its = 0usize;
    let mut total = 0usize;
    while hi >= 0 {
        let m = hi as usize;
        if m == 0 {
            eigs.push(h[(0, 0)]);
            break;
        }
        // Locate the top of the active unreduced block.
        let mut l = m;
        while l > 0 {
            let sub = cabs(h[(l, l - 1)]);
            let mut diag = cabs(h[(l, l)]) + cabs(h[(l - 1, l - 1)]);
            if diag == 0.0 {
                diag = hnorm;
            }
            if sub <= ulp * diag || sub <= small {
                h[(l, l - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == m {
            eigs.push(h[(m, m)]);
            hi -= 1;
            its = 0;
            continue;
        }
        if l + 1 == m {
            let (l1, l2) = eig2(h[(l, l)], h[(l, m)], h[(m, l)], h[(m, m)]);
            eigs.push(l1);
            eigs.push(l2);
            hi -= 2;
            its = 0;
            continue;
        }
        if total >= cap {
            return Err(Error::NumericalFailure {
                what: format!("QR iteration did not converge in {cap} sweeps"),
                matrix_hash: matrix_hash(a),
            });
        }
        let shift = if its > 0 && its % 10 == 0 {
            // Exceptional shift to break cycles.
            h[(m, m)] + Complex64::new(0.75 * h[(m, m - 1)].re.abs() + 0.5 * h[(m, m - 1)].im.abs(), 0.0)
        } else {
            let (l1, l2) = eig2(h[(m - 1, m - 1)], h[(m - 1, m)], h[(m, m - 1)], h[(m, m)]);
            if (l1 - h[(m, m)]).norm() <= (l2 - h[(m, m)]).norm() {
                l1
            } else {
                l2
            }
        };
        qr_sweep(&mut h, l, m, shift);
        its += 1;
        total += 1;
    }
    Ok(eigs)
}

/// One explicit shifted QR step `H - σI = QR, H <- RQ + σI` on the window `l..=m`.
fn qr_sweep(h: &mut ComplexMatrix, l: usize, m: usize, shift: Complex64) {
    for i in l..=m {
        h[(i, i)] -= shift;
    }
    let mut rots = Vec::with_capacity(m - l);
    for k in l..m {
        let (cs, sn) = givens(h[(k, k)], h[(k + 1, k)]);
        for j in k..=m {
            let t1 = h[(k, j)];
            let t2 = h[(k + 1, j)];
            h[(k, j)] = t1 * cs + sn * t2;
            h[(k + 1, j)] = -sn.conj() * t1 + t2 * cs;
        }
        h[(k + 1, k)] = Complex64::new(0.0, 0.0);
        rots.push((cs, sn));
    }
    for (off, &(cs, sn)) in rots.iter().enumerate() {
        let k = l + off;
        for i in l..=(k + 1) {
            let t1 = h[(i, k)];
            let t2 = h[(i, k + 1)];
            h[(i, k)] = t1 * cs + t2 * sn.conj();
            h[(i, k + 1)] = -t1 * sn + t2 * cs;
        }
    }
    for i in l..=m {
        h[(i, i)] += shift;
    }
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(a: &ComplexMatrix) -> Result<f64> {
    Ok(eigenvalues(a)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Index of the dominant eigenvalue: maximal modulus, then largest real
/// part, then largest imaginary part.
fn dominant_index(eigs: &[Complex64]) -> usize {
    let rmax = eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let tol = 1e-12 * rmax.max(f64::MIN_POSITIVE);
    let mut best: Option<usize> = None;
    for (i, z) in eigs.iter().enumerate() {
        if z.norm() < rmax - tol {
            continue;
        }
        best = match best {
            None => Some(i),
            Some(b) => {
                let w = eigs[b];
                let better = if (z.re - w.re).abs() > tol {
                    z.re > w.re
                } else {
                    z.im > w.im
                };
                Some(if better { i } else { b })
            }
        };
    }
    best.unwrap_or(0)
}

/// Unit null vector of `a - λI` by inverse iteration.
fn inverse_iteration(a: &ComplexMatrix, lambda: Complex64, scale: f64) -> ComplexVector {
    let n = a.nrows();
    let mut shifted = a.clone();
    for i in 0..n {
        shifted[(i, i)] -= lambda;
    }
    let lu = PerturbedLu::new(shifted, f64::EPSILON * scale);
    // Deterministic start vector with no special structure.
    let mut v = ComplexVector::from_fn(n, |i, _| Complex64::new(1.0 + 0.37 * i as f64, 0.11 * (i * i % 7) as f64));
    v /= Complex64::new(v.norm(), 0.0);
    let tol = 1e-13 * scale;
    for it in 0..12 {
        let w = lu.solve(&v);
        let nw = w.norm();
        if !(nw.is_finite() && nw > 0.0) {
            break;
        }
        v = w / Complex64::new(nw, 0.0);
        if it >= 1 {
            let r = (a * &v - &v * lambda).norm();
            if r <= tol {
                break;
            }
        }
    }
    v
}

/// Dominant eigenpair with right and left eigenvectors.
///
/// Fails with [`Error::DegenerateEigenvector`] when `|yᵀx| ≤ 1e-12`, which
/// signals that the eigenvalue derivative formula does not apply.
pub fn dominant_pair(a: &ComplexMatrix) -> Result<EigenPair> {
    let eigs = eigenvalues(a)?;
    if eigs.is_empty() {
        return Err(Error::InvalidArgument("dominant_pair: empty matrix".into()));
    }
    let lambda = eigs[dominant_index(&eigs)];
    let scale = frobenius(a).max(1.0);
    let right = inverse_iteration(a, lambda, scale);
    let left = inverse_iteration(&a.transpose(), lambda, scale);
    let overlap = left.dot(&right).norm();
    if overlap <= 1e-12 {
        return Err(Error::DegenerateEigenvector { overlap });
    }
    Ok(EigenPair { value: lambda, right, left: Some(left) })
}

/// `dλ = yᵀ dA x / (yᵀ x)`.
pub fn eigenvalue_derivative(pair: &EigenPair, da: &ComplexMatrix) -> Result<Complex64> {
    let y = pair
        .left
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("eigenvalue_derivative: left eigenvector missing".into()))?;
    let yx = y.dot(&pair.right);
    if yx.norm() <= 1e-12 {
        return Err(Error::DegenerateEigenvector { overlap: yx.norm() });
    }
    Ok(y.dot(&(da * &pair.right)) / yx)
}

/// `d|λ| = Re(conj(λ)/|λ| · dλ)`.
pub fn abs_eigenvalue_derivative(lambda: Complex64, dlambda: Complex64) -> Result<f64> {
    let r = lambda.norm();
    if r <= 1e-14 {
        return Err(Error::ZeroEigenvalue);
    }
    Ok((lambda.conj() / r * dlambda).re)
}

/// A parameter gradient of `ρ(Ẽ(p, θ))` and whether it had to fall back to differences.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoGradient {
    pub grad: Vec<f64>,
    pub fell_back: bool,
}

/// Step used when the eigenvalue derivative formula does not apply.
pub const FALLBACK_STEP: f64 = 1e-8;

fn central_gradient(problem: &ProblemSpec, p: &[f64], theta: &Frequency, t: f64, counter: &EvalCounter) -> Result<Vec<f64>> {
    let n = p.len();
    let mut g = vec![0.0; n];
    for j in 0..n {
        let mut plus = p.to_vec();
        let mut minus = p.to_vec();
        plus[j] += t;
        minus[j] -= t;
        g[j] = (problem.rho(&plus, theta)? - problem.rho(&minus, theta)?) / (2.0 * t);
    }
    counter.charge(2 * n as u64);
    Ok(g)
}

fn analytic_gradient(problem: &ProblemSpec, p: &[f64], theta: &Frequency) -> Result<Vec<f64>> {
    let e = problem.error_symbol(p, theta)?;
    let pair = dominant_pair(&e)?;
    (0..p.len())
        .map(|j| {
            let de = problem.matrix_derivative(p, theta, j)?;
            abs_eigenvalue_derivative(pair.value, eigenvalue_derivative(&pair, &de)?)
        })
        .collect()
}

/// Gradient of `ρ(Ẽ(p, θ))` with respect to `p`.
///
/// Analytic gradients are free; central differences charge `2n` evaluations
/// (the center value is charged by whoever computed it). When the analytic
/// formula's hypotheses fail (non-simple or zero dominant eigenvalue) the
/// result silently falls back to central differences and is flagged.
pub fn rho_gradient(
    problem: &ProblemSpec,
    p: &[f64],
    theta: &Frequency,
    mode: GradientMode,
    counter: &EvalCounter,
) -> Result<RhoGradient> {
    problem.check_len(p)?;
    match mode {
        GradientMode::None => Err(Error::InvalidArgument("rho_gradient called in derivative-free mode".into())),
        GradientMode::CentralDiff(t) => Ok(RhoGradient { grad: central_gradient(problem, p, theta, t, counter)?, fell_back: false }),
        GradientMode::Analytic => match analytic_gradient(problem, p, theta) {
            Ok(grad) if grad.iter().all(|g| g.is_finite()) => Ok(RhoGradient { grad, fell_back: false }),
            Ok(_) | Err(Error::DegenerateEigenvector { .. }) | Err(Error::ZeroEigenvalue) => Ok(RhoGradient {
                grad: central_gradient(problem, p, theta, FALLBACK_STEP, counter)?,
                fell_back: true,
            }),
            Err(e) => Err(e),
        },
    }
}
