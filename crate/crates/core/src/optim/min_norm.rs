//! Minimum-norm point of the convex hull of finitely many vectors (Wolfe's algorithm).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Convex weights `λ` and the hull point `Σ λ_i g_i` of least norm.
#[derive(Debug, Clone, PartialEq)]
pub struct MinNormPoint {
    pub coeffs: Vec<f64>,
    pub point: Vec<f64>,
}

impl MinNormPoint {
    pub fn norm(&self) -> f64 {
        self.point.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Relative tolerance on Wolfe's optimality test `x·g_j ≥ |x|² - tol`.
pub const KKT_TOL: f64 = 1e-12;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn combine(vectors: &[Vec<f64>], set: &[usize], w: &[f64]) -> Vec<f64> {
    let n = vectors[set[0]].len();
    let mut x = vec![0.0; n];
    for (&i, &wi) in set.iter().zip(w) {
        for (xk, gk) in x.iter_mut().zip(&vectors[i]) {
            *xk += wi * gk;
        }
    }
    x
}

/// Minimizer of `|Σ v_i g_i|` over the affine hull `Σ v_i = 1` of the corral.
fn affine_minimizer(vectors: &[Vec<f64>], set: &[usize]) -> Vec<f64> {
    let k = set.len();
    let mut kkt = DMatrix::<f64>::zeros(k + 1, k + 1);
    for a in 0..k {
        for b in 0..k {
            kkt[(a, b)] = dot(&vectors[set[a]], &vectors[set[b]]);
        }
        kkt[(a, k)] = 1.0;
        kkt[(k, a)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(k + 1);
    rhs[k] = 1.0;
    let scale = kkt.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let sol = kkt
        .clone()
        .lu()
        .solve(&rhs)
        .filter(|s| s.iter().all(|v| v.is_finite()))
        .or_else(|| kkt.svd(true, true).solve(&rhs, 1e-14 * scale).ok())
        .unwrap_or_else(|| DVector::from_element(k + 1, 1.0 / k as f64));
    let v: Vec<f64> = sol.iter().take(k).copied().collect();
    let s: f64 = v.iter().sum();
    v.iter().map(|x| x / s).collect()
}

/// Wolfe's minimum-norm-point algorithm.
///
/// Returns convex weights over the input vectors (zeros for vectors outside
/// the final corral) and the hull point of least Euclidean norm.
pub fn min_norm_point(vectors: &[Vec<f64>]) -> Result<MinNormPoint> {
    let m = vectors.len();
    if m == 0 {
        return Err(Error::InvalidArgument("min_norm_point needs at least one vector".into()));
    }
    let n = vectors[0].len();
    if vectors.iter().any(|g| g.len() != n || g.iter().any(|x| !x.is_finite())) {
        return Err(Error::InvalidArgument("min_norm_point vectors must be finite and of equal length".into()));
    }
    let norms: Vec<f64> = vectors.iter().map(|g| dot(g, g)).collect();
    let big = norms.iter().fold(0.0f64, |a, &b| a.max(b)).max(f64::MIN_POSITIVE);
    let start = (0..m).fold(0, |b, i| if norms[i] < norms[b] { i } else { b });

    let mut set = vec![start];
    let mut w = vec![1.0];
    let mut x = vectors[start].clone();
    for _major in 0..(50 * m + 100) {
        let xx = dot(&x, &x);
        let (j, xg) = (0..m)
            .map(|i| (i, dot(&x, &vectors[i])))
            .fold((0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
        if xg >= xx - KKT_TOL * big || set.contains(&j) {
            break;
        }
        set.push(j);
        w.push(0.0);
        for _minor in 0..(m + 5) {
            let v = affine_minimizer(vectors, &set);
            if v.iter().all(|&vi| vi > 1e-15) {
                w = v;
                break;
            }
            // Step from w towards v until the first weight hits zero.
            let mut step = 1.0f64;
            for (wi, vi) in w.iter().zip(&v) {
                if *vi <= 1e-15 && wi > vi {
                    step = step.min(wi / (wi - vi));
                }
            }
            let mut next_set = Vec::with_capacity(set.len());
            let mut next_w = Vec::with_capacity(set.len());
            for ((&i, wi), vi) in set.iter().zip(&w).zip(&v) {
                let nw = (1.0 - step) * wi + step * vi;
                if nw > 1e-15 {
                    next_set.push(i);
                    next_w.push(nw);
                }
            }
            if next_set.is_empty() {
                break;
            }
            let s: f64 = next_w.iter().sum();
            next_w.iter_mut().for_each(|x| *x /= s);
            set = next_set;
            w = next_w;
        }
        x = combine(vectors, &set, &w);
        if !set.contains(&j) {
            // Rounding pushed the new vertex straight back out; no further progress.
            break;
        }
    }
    let mut coeffs = vec![0.0; m];
    for (&i, &wi) in set.iter().zip(&w) {
        coeffs[i] += wi;
    }
    Ok(MinNormPoint { coeffs, point: x })
}
