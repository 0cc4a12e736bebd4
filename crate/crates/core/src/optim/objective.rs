use crate::counter::EvalCounter;
use crate::eigen::{rho_gradient, GradientMode};
use crate::error::{Error, Result};
use crate::fourier::{psi, Frequency, PsiValue};
use crate::problems::ProblemSpec;

/// A nonsmooth objective that can report a subgradient.
pub trait Objective {
    fn dim(&self) -> usize;

    fn value(&mut self, p: &[f64]) -> Result<f64>;

    /// Value and one subgradient at `p`.
    fn value_and_subgradient(&mut self, p: &[f64]) -> Result<(f64, Vec<f64>)>;

    /// Gradients that fell back to central differences so far.
    fn fallbacks(&self) -> u64 {
        0
    }

    /// Evaluations a `value` call at `p` would charge.
    fn value_cost(&self, _p: &[f64]) -> u64 {
        0
    }

    /// Evaluations a `value_and_subgradient` call at `p` may charge at most.
    fn subgradient_cost(&self, p: &[f64]) -> u64 {
        self.value_cost(p)
    }
}

/// Adapter for closures returning `(value, subgradient)`.
pub struct FnObjective<F> {
    dim: usize,
    f: F,
}

impl<F: FnMut(&[f64]) -> (f64, Vec<f64>)> FnObjective<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: FnMut(&[f64]) -> (f64, Vec<f64>)> Objective for FnObjective<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&mut self, p: &[f64]) -> Result<f64> {
        Ok((self.f)(p).0)
    }

    fn value_and_subgradient(&mut self, p: &[f64]) -> Result<(f64, Vec<f64>)> {
        Ok((self.f)(p))
    }
}

/// How a central-difference subgradient of Ψ over a frequency set is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientCost {
    /// Difference `ρ` at the argmax frequency only (`2n` evaluations).
    ArgmaxFrequency,
    /// Difference the whole max over the set (`2n·|set|` evaluations).
    WholeSet,
}

/// `Ψ(p)` over a finite frequency set, with argmax-selected subgradients.
///
/// The last evaluated point is cached so that asking for a subgradient right
/// after a value at the same point costs nothing extra.
pub struct FrequencySetObjective<'a> {
    problem: &'a ProblemSpec,
    freqs: Vec<Frequency>,
    mode: GradientMode,
    fd_cost: GradientCost,
    counter: &'a EvalCounter,
    cache: Option<(Vec<f64>, PsiValue)>,
    fallbacks: u64,
}

impl<'a> FrequencySetObjective<'a> {
    pub fn new(
        problem: &'a ProblemSpec,
        freqs: Vec<Frequency>,
        mode: GradientMode,
        fd_cost: GradientCost,
        counter: &'a EvalCounter,
    ) -> Self {
        Self { problem, freqs, mode, fd_cost, counter, cache: None, fallbacks: 0 }
    }

    pub fn freqs(&self) -> &[Frequency] {
        &self.freqs
    }

    fn eval(&mut self, p: &[f64]) -> Result<PsiValue> {
        if let Some((q, v)) = &self.cache {
            if q.as_slice() == p {
                return Ok(*v);
            }
        }
        let v = psi(self.problem, p, &self.freqs, self.counter)?;
        self.cache = Some((p.to_vec(), v));
        Ok(v)
    }

    /// Value and the frequency index attaining it.
    pub fn value_with_argmax(&mut self, p: &[f64]) -> Result<PsiValue> {
        self.eval(p)
    }
}

impl Objective for FrequencySetObjective<'_> {
    fn dim(&self) -> usize {
        self.problem.n_params()
    }

    fn value(&mut self, p: &[f64]) -> Result<f64> {
        Ok(self.eval(p)?.value)
    }

    fn value_and_subgradient(&mut self, p: &[f64]) -> Result<(f64, Vec<f64>)> {
        let v = self.eval(p)?;
        let grad = match (self.mode, self.fd_cost) {
            (GradientMode::None, _) => {
                return Err(Error::InvalidArgument("subgradient requested in derivative-free mode".into()))
            }
            (GradientMode::CentralDiff(t), GradientCost::WholeSet) => {
                let mut g = vec![0.0; p.len()];
                for (j, gj) in g.iter_mut().enumerate() {
                    let mut plus = p.to_vec();
                    let mut minus = p.to_vec();
                    plus[j] += t;
                    minus[j] -= t;
                    let fp = psi(self.problem, &plus, &self.freqs, self.counter)?.value;
                    let fm = psi(self.problem, &minus, &self.freqs, self.counter)?.value;
                    *gj = (fp - fm) / (2.0 * t);
                }
                g
            }
            _ => {
                let r = rho_gradient(self.problem, p, &self.freqs[v.argmax], self.mode, self.counter)?;
                self.fallbacks += r.fell_back as u64;
                r.grad
            }
        };
        Ok((v.value, grad))
    }

    fn fallbacks(&self) -> u64 {
        self.fallbacks
    }

    fn value_cost(&self, p: &[f64]) -> u64 {
        match &self.cache {
            Some((q, _)) if q.as_slice() == p => 0,
            _ => self.freqs.len() as u64,
        }
    }

    fn subgradient_cost(&self, p: &[f64]) -> u64 {
        let diffs = 2 * p.len() as u64;
        self.value_cost(p)
            + match (self.mode, self.fd_cost) {
                (GradientMode::CentralDiff(_), GradientCost::WholeSet) => diffs * self.freqs.len() as u64,
                (GradientMode::CentralDiff(_), GradientCost::ArgmaxFrequency) => diffs,
                // Room for a difference fallback at a degenerate eigenvalue.
                (GradientMode::Analytic, _) => diffs,
                (GradientMode::None, _) => 0,
            }
    }
}
