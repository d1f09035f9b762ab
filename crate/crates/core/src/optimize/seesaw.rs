use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use num_complex::Complex64 as C64;

use super::{top_eigvec, Method, OptimizationResult, OptimizerConfig};
use crate::error::{Result, UewError};
use crate::linalg::{self, expectation, HermitianOperator, Ket, Party};
use crate::states::{random_product_ket_with, ProductKet};

/// Trajectory of one see-saw run.
#[derive(Clone, Debug)]
pub struct SeesawRun {
    pub argmax: ProductKet,
    pub value: f64,
    /// Objective after every half-sweep pair, starting with the initial state.
    pub history: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

/// Alternating maximization from `start`: fix `a` and take `b` as the top
/// eigenvector of the conditioned operator, then the same with roles swapped.
/// Each step is an exact block maximization, so the objective never drops.
pub fn seesaw_from(l: &HermitianOperator, start: &ProductKet, tol: f64, max_iter: usize) -> Result<SeesawRun> {
    let dims = l.dims();
    if start.dims() != dims {
        return Err(UewError::DimensionMismatch {
            expected: l.dim(),
            found: start.dims().0 * start.dims().1,
        });
    }
    let mut a: Vec<C64> = start.a().amplitudes().to_vec();
    let mut b: Vec<C64> = start.b().amplitudes().to_vec();
    let mut value = linalg::quad_form(l.dim(), l.entries(), &linalg::kron_vec(&a, &b));
    let mut history = vec![value];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let la = linalg::conditional_entries(dims, l.entries(), &a, Party::A);
        b = top_eigvec(dims.1, &la).1;
        let lb = linalg::conditional_entries(dims, l.entries(), &b, Party::B);
        let (next, a_new) = top_eigvec(dims.0, &lb);
        a = a_new;
        history.push(next);
        let gain = next - value;
        value = next;
        if gain < tol {
            converged = true;
            break;
        }
    }
    let argmax = ProductKet::new(Ket::new(a)?, Ket::new(b)?);
    let value = expectation(l, &argmax)?;
    Ok(SeesawRun {
        argmax,
        value,
        history,
        converged,
        iterations,
    })
}

/// Independent stream per restart so results do not depend on scheduling.
pub(crate) fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

/// `g_s(L)`: the supremum of `⟨a,b|L|a,b⟩` over product states, from
/// see-saw runs started at `cfg.restarts` seeded random product states.
///
/// The value is attained at the returned state, so it is always a valid
/// lower bound; `converged` is false only if every restart hit the
/// iteration cap.
pub fn sup_product_unconstrained(l: &HermitianOperator, cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    cfg.validate()?;
    let dims = l.dims();
    let runs: Vec<SeesawRun> = (0..cfg.restarts)
        .into_par_iter()
        .map(|k| {
            let mut rng = restart_rng(cfg.seed, k);
            let start = random_product_ket_with(&mut rng, dims);
            seesaw_from(l, &start, cfg.seesaw_tol, cfg.seesaw_max_iter)
        })
        .collect::<Result<_>>()?;

    let any_converged = runs.iter().any(|r| r.converged);
    let best = runs
        .into_iter()
        .reduce(|best, run| if better(&run, &best) { run } else { best })
        .expect("restarts is positive");
    Ok(OptimizationResult {
        value: best.value,
        argmax: best.argmax,
        constraint_value: None,
        converged: any_converged,
        iterations: best.iterations,
        method: Method::Seesaw,
    })
}

fn better(cand: &SeesawRun, best: &SeesawRun) -> bool {
    if cand.value > best.value + 1e-12 {
        return true;
    }
    (cand.value - best.value).abs() <= 1e-12 && cand.argmax.lex_cmp(&best.argmax).is_lt()
}
