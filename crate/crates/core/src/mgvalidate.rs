//! Discrete 1D two-grid solver used to measure convergence factors and check
//! them against the Fourier predictions.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::Weights;

/// Cycles per measurement.
pub const CYCLES: usize = 100;
/// Defects below `FLOOR · d0` are treated as converged to machine precision.
pub const FLOOR: f64 = 1e-14;
/// Defects above `DIVERGENCE · d0` stop the measurement.
pub const DIVERGENCE: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Dirichlet,
    Periodic,
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Boundary::Dirichlet => "dirichlet",
            Boundary::Periodic => "periodic",
        })
    }
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet" => Ok(Boundary::Dirichlet),
            "periodic" => Ok(Boundary::Periodic),
            _ => Err(Error::InvalidArgument(format!("boundary `{s}`: expected dirichlet or periodic"))),
        }
    }
}

/// Uniform grid on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub h: f64,
    pub boundary: Boundary,
}

impl Grid1D {
    pub fn new(h: f64, boundary: Boundary) -> Result<Self> {
        let g = Self { h, boundary };
        let n = 1.0 / h;
        if !(h > 0.0) || (n - n.round()).abs() > 1e-9 * n {
            return Err(Error::InvalidArgument(format!("1/h must be an integer, got h = {h}")));
        }
        if g.unknowns() < 3 {
            return Err(Error::InvalidArgument(format!("grid with h = {h} has fewer than 3 unknowns")));
        }
        Ok(g)
    }

    /// Number of intervals `1/h`.
    pub fn intervals(&self) -> usize {
        (1.0 / self.h).round() as usize
    }

    /// Interior nodes for Dirichlet, all nodes but one endpoint for periodic.
    pub fn unknowns(&self) -> usize {
        match self.boundary {
            Boundary::Dirichlet => self.intervals().saturating_sub(1),
            Boundary::Periodic => self.intervals(),
        }
    }

    fn coarsened(&self, c: usize) -> Result<Self> {
        if self.intervals() % c != 0 {
            return Err(Error::InvalidArgument(format!(
                "{} intervals cannot be coarsened by {c}",
                self.intervals()
            )));
        }
        Ok(Self { h: self.h * c as f64, boundary: self.boundary })
    }
}

/// Row-wise sparse matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    pub ncols: usize,
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().map(|&(j, a)| a * x[j]).sum()).collect()
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut rows = vec![Vec::new(); self.ncols];
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, a) in r {
                rows[j].push((i, a));
            }
        }
        SparseMatrix { ncols: self.nrows(), rows }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows(), self.ncols);
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, a) in r {
                m[(i, j)] += a;
            }
        }
        m
    }

    /// Diagonal entries (zero where absent).
    pub fn diagonal(&self) -> Vec<f64> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| r.iter().filter(|e| e.0 == i).map(|e| e.1).sum())
            .collect()
    }
}

/// The P1 stiffness matrix `(1/h)[-1 2 -1]`.
pub fn assemble_p1_laplace(grid: &Grid1D) -> SparseMatrix {
    let n = grid.unknowns();
    let s = 1.0 / grid.h;
    let rows = (0..n)
        .map(|i| {
            let mut r = Vec::with_capacity(3);
            match grid.boundary {
                Boundary::Dirichlet => {
                    if i > 0 {
                        r.push((i - 1, -s));
                    }
                    r.push((i, 2.0 * s));
                    if i + 1 < n {
                        r.push((i + 1, -s));
                    }
                }
                Boundary::Periodic => {
                    r.push(((i + n - 1) % n, -s));
                    r.push((i, 2.0 * s));
                    r.push(((i + 1) % n, -s));
                }
            }
            r
        })
        .collect();
    SparseMatrix { ncols: n, rows }
}

/// Fine-grid index of node `k` (coordinate `k·h`), or `None` for a Dirichlet boundary node.
fn fine_index(grid: &Grid1D, k: isize) -> Option<usize> {
    let n = grid.intervals() as isize;
    match grid.boundary {
        Boundary::Dirichlet => (1..n).contains(&k).then(|| (k - 1) as usize),
        Boundary::Periodic => Some(k.rem_euclid(n) as usize),
    }
}

/// Coarse node `I` as a fine node number.
fn coarse_nodes(coarse: &Grid1D, c: usize) -> Vec<isize> {
    let first = if coarse.boundary == Boundary::Dirichlet { 1 } else { 0 };
    (0..coarse.unknowns()).map(|i| ((i + first) * c) as isize).collect()
}

/// Linear interpolation for `c = 2`, piecewise-constant interpolation over
/// `{3I-1, 3I, 3I+1}` for `c = 3`.
fn prolongation(fine: &Grid1D, coarse: &Grid1D, c: usize) -> SparseMatrix {
    let weights: &[(isize, f64)] = match c {
        2 => &[(-1, 0.5), (0, 1.0), (1, 0.5)],
        _ => &[(-1, 1.0), (0, 1.0), (1, 1.0)],
    };
    let mut rows = vec![Vec::new(); fine.unknowns()];
    for (i, node) in coarse_nodes(coarse, c).into_iter().enumerate() {
        for &(off, w) in weights {
            if let Some(f) = fine_index(fine, node + off) {
                rows[f].push((i, w));
            }
        }
    }
    SparseMatrix { ncols: coarse.unknowns(), rows }
}

fn sparse_product(a: &SparseMatrix, b: &SparseMatrix) -> SparseMatrix {
    let rows = a
        .rows
        .iter()
        .map(|r| {
            let mut acc = vec![0.0; b.ncols];
            for &(k, x) in r {
                for &(j, y) in &b.rows[k] {
                    acc[j] += x * y;
                }
            }
            acc.into_iter().enumerate().filter(|e| e.1 != 0.0).collect()
        })
        .collect();
    SparseMatrix { ncols: b.ncols, rows }
}

/// Which two-grid method to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CycleVariant {
    /// Coarsening by 2 with `pre`/`post` weighted Jacobi sweeps.
    Laplace { pre_sweeps: usize, post_sweeps: usize, weights: Weights },
    /// Coarsening by 3: one pre- and one post-sweep with weight `p1`, CGC damping `p2`.
    Coarsen3,
}

impl CycleVariant {
    /// Variant matching a registered 1D problem.
    pub fn for_problem(name: &str) -> Result<Self> {
        match name {
            "laplace1d-p1" => Ok(Self::Laplace { pre_sweeps: 1, post_sweeps: 0, weights: Weights::Shared }),
            "laplace1d-p1-2sweep" => Ok(Self::Laplace { pre_sweeps: 1, post_sweeps: 1, weights: Weights::Separate }),
            "laplace1d-p1-c3" => Ok(Self::Coarsen3),
            _ => Err(Error::Unsupported(format!(
                "discrete validation exists for laplace1d-p1, laplace1d-p1-2sweep and laplace1d-p1-c3, not {name}"
            ))),
        }
    }

    pub fn n_params(&self) -> usize {
        match self {
            Self::Laplace { weights: Weights::Shared, .. } => 1,
            _ => 2,
        }
    }

    fn coarsening(&self) -> usize {
        match self {
            Self::Laplace { .. } => 2,
            Self::Coarsen3 => 3,
        }
    }

    /// (pre sweeps, pre weight, post sweeps, post weight, CGC damping)
    fn schedule(&self, p: &[f64]) -> (usize, f64, usize, f64, f64) {
        match *self {
            Self::Laplace { pre_sweeps, post_sweeps, weights } => {
                let post_w = if weights == Weights::Separate { p[1] } else { p[0] };
                (pre_sweeps, p[0], post_sweeps, post_w, 1.0)
            }
            Self::Coarsen3 => (1, p[0], 1, p[0], p[1]),
        }
    }
}

/// Direct solver for the coarse system; the periodic operator is singular
/// with constant null space and is solved on the mean-zero complement.
#[derive(Debug, Clone)]
struct CoarseSolver {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    periodic: bool,
}

impl CoarseSolver {
    fn new(a: &SparseMatrix, periodic: bool) -> Result<Self> {
        let mut m = a.to_dense();
        let n = m.nrows();
        if periodic {
            // A + s·11ᵀ/n is nonsingular and agrees with A on mean-zero vectors.
            let s = a.diagonal().iter().fold(0.0f64, |x, y| x.max(y.abs())) / n as f64;
            m.add_scalar_mut(s);
        }
        let lu = m.clone().lu();
        if !lu.is_invertible() {
            return Err(Error::NumericalFailure {
                what: "coarse-grid operator is singular".into(),
                matrix_hash: crate::linalg::matrix_hash(&m.map(|x| num_complex::Complex64::new(x, 0.0))),
            });
        }
        Ok(Self { lu, periodic })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut rhs = DVector::from_column_slice(b);
        if self.periodic {
            let mean = rhs.mean();
            rhs.add_scalar_mut(-mean);
        }
        let mut x = self.lu.solve(&rhs).expect("factorization checked invertible");
        if self.periodic {
            let mean = x.mean();
            x.add_scalar_mut(-mean);
        }
        x.iter().copied().collect()
    }
}

/// Fine and coarse operators plus transfers for one variant and grid.
#[derive(Debug, Clone)]
pub struct TwoGridHierarchy {
    pub variant: CycleVariant,
    pub grid: Grid1D,
    pub fine: SparseMatrix,
    pub prolongation: SparseMatrix,
    pub restriction: SparseMatrix,
    pub coarse: SparseMatrix,
    solver: CoarseSolver,
}

impl TwoGridHierarchy {
    /// Linear interpolation with `R = Pᵀ` and a rediscretized coarse operator
    /// for `c = 2`; piecewise-constant interpolation with the Galerkin
    /// operator `PᵀLP` for `c = 3`.
    pub fn new(variant: CycleVariant, grid: Grid1D) -> Result<Self> {
        let c = variant.coarsening();
        let cgrid = grid.coarsened(c)?;
        let fine = assemble_p1_laplace(&grid);
        let prolongation = prolongation(&grid, &cgrid, c);
        let restriction = prolongation.transpose();
        let coarse = match variant {
            CycleVariant::Laplace { .. } => assemble_p1_laplace(&cgrid),
            CycleVariant::Coarsen3 => sparse_product(&restriction, &sparse_product(&fine, &prolongation)),
        };
        let solver = CoarseSolver::new(&coarse, grid.boundary == Boundary::Periodic)?;
        Ok(Self { variant, grid, fine, prolongation, restriction, coarse, solver })
    }

    fn jacobi(&self, u: &mut [f64], b: &[f64], w: f64, sweeps: usize) {
        let diag = 2.0 / self.grid.h;
        for _ in 0..sweeps {
            let au = self.fine.apply(u);
            for ((ui, bi), ai) in u.iter_mut().zip(b).zip(&au) {
                *ui += w * (bi - ai) / diag;
            }
        }
    }

    /// One two-grid cycle: pre-relaxation, restricted residual, exact coarse
    /// solve, (damped) interpolated correction, post-relaxation.
    pub fn two_grid_cycle(&self, p: &[f64], b: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        if p.len() != self.variant.n_params() {
            return Err(Error::InvalidArgument(format!(
                "expected {} parameters, got {}",
                self.variant.n_params(),
                p.len()
            )));
        }
        let n = self.fine.nrows();
        if b.len() != n || u.len() != n {
            return Err(Error::InvalidArgument(format!("vectors must have length {n}")));
        }
        let (nu1, w1, nu2, w2, damping) = self.variant.schedule(p);
        let mut u = u.to_vec();
        self.jacobi(&mut u, b, w1, nu1);
        let au = self.fine.apply(&u);
        let r: Vec<f64> = b.iter().zip(&au).map(|(x, y)| x - y).collect();
        let e = self.solver.solve(&self.restriction.apply(&r));
        for (ui, ei) in u.iter_mut().zip(self.prolongation.apply(&e)) {
            *ui += damping * ei;
        }
        self.jacobi(&mut u, b, w2, nu2);
        Ok(u)
    }

    pub fn defect_norm(&self, b: &[f64], u: &[f64]) -> f64 {
        let au = self.fine.apply(u);
        b.iter().zip(&au).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    }
}

/// Defect history of a measurement and the derived convergence factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    /// `‖d^(k)‖₂` for `k = 0..=K`, where `K` is 100 unless the run stopped early.
    pub defect_norms: Vec<f64>,
    /// `(d_K / d_0)^{1/K}`.
    pub rho_m1: f64,
    /// `d_K / d_{K-1}`.
    pub rho_m2: f64,
    /// The defect fell below `FLOOR · d0`; `K` is the first such cycle.
    pub floor_hit: bool,
    /// The defect exceeded `DIVERGENCE · d0`; `K` is the first such cycle.
    pub diverged: bool,
}

/// Run 100 cycles on `L u = 0` from a seeded uniform(-1, 1) initial guess.
pub fn measure_convergence(variant: CycleVariant, p: &[f64], grid: Grid1D, seed: u64) -> Result<CycleReport> {
    let hier = TwoGridHierarchy::new(variant, grid)?;
    let n = grid.unknowns();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let b = vec![0.0; n];
    let mut d = vec![hier.defect_norm(&b, &u)];
    let (mut floor_hit, mut diverged) = (false, false);
    for _ in 0..CYCLES {
        u = hier.two_grid_cycle(p, &b, &u)?;
        let dk = hier.defect_norm(&b, &u);
        d.push(dk);
        if !dk.is_finite() || dk > DIVERGENCE * d[0] {
            diverged = true;
            break;
        }
        if dk < FLOOR * d[0] {
            floor_hit = true;
            break;
        }
    }
    let k = d.len() - 1;
    Ok(CycleReport {
        rho_m1: (d[k] / d[0]).powf(1.0 / k as f64),
        rho_m2: d[k] / d[k - 1],
        defect_norms: d,
        floor_hit,
        diverged,
    })
}
