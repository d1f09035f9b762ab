//! Suprema over product states restricted to one side of `Tr(ρC) = c`.
//!
//! The search first checks whether the unconstrained optimum already lies
//! on the requested side. Otherwise it scans party A over an angle grid and
//! solves the party-B subproblem exactly for each grid point, then polishes
//! the best candidates with coordinate-wise golden-section search on A's
//! angles. The B subproblem (maximize `⟨b|M|b⟩` subject to `⟨b|K|b⟩ ≤ t`) has
//! a convex joint numerical range, so its Lagrangian dual is tight and a
//! one-dimensional bisection on the multiplier recovers the optimum.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::seesaw::sup_product_unconstrained;
use super::{angles_to_amps, top_eigvec, Method, OptimizationResult, OptimizerConfig};
use crate::error::{Result, UewError};
use crate::linalg::{self, expectation, HermitianOperator, Ket, Party};
use crate::states::ProductKet;
use crate::witness::{ConstraintSpec, HalfSpaceSide};

/// Distinct grid seeds handed to the local polish.
const POLISH_SEEDS: usize = 8;
/// Polish stops once the coordinate bracket half-width drops below this.
const POLISH_MIN_STEP: f64 = 1e-10;
const POLISH_MAX_SWEEPS: usize = 400;
/// Grid budget when the inner party needs a Jacobi solve per point.
const LARGE_INNER_GRID_BUDGET: usize = 4096;

/// `p_c(L)` (side `Leq`) or `p_c̃(L)` (side `Geq`).
pub fn sup_product_constrained(
    l: &HermitianOperator,
    spec: &ConstraintSpec,
    side: HalfSpaceSide,
    cfg: &OptimizerConfig,
) -> Result<OptimizationResult> {
    cfg.validate()?;
    if side == HalfSpaceSide::Boundary {
        return Err(UewError::InvalidParameter(
            "constrained supremum needs side leq or geq".into(),
        ));
    }
    spec.ensure_same_dims(l)?;
    let c = spec.value();

    let free = sup_product_unconstrained(l, cfg)?;
    let tc = expectation(spec.op(), &free.argmax)?;
    if side.admits(tc, c, cfg.feas_tol) {
        return Ok(OptimizationResult {
            constraint_value: Some(tc),
            ..free
        });
    }
    boundary_search(l, spec, side, cfg)
}

/// Orientation `⟨K⟩ ≤ t` of the requested half-space.
fn oriented(spec: &ConstraintSpec, side: HalfSpaceSide) -> (HermitianOperator, f64) {
    match side {
        HalfSpaceSide::Geq => (spec.op().scale(-1.0), -spec.value()),
        _ => (spec.op().clone(), spec.value()),
    }
}

struct Problem {
    l: HermitianOperator,
    k: HermitianOperator,
    t: f64,
    feas_tol: f64,
    /// Dimension of the gridded party.
    outer: usize,
    inner: usize,
}

impl Problem {
    fn solve_inner(&self, params: &[f64]) -> Option<(f64, Vec<C64>)> {
        let a = angles_to_amps(self.outer, params);
        let dims = self.l.dims();
        let la = linalg::conditional_entries(dims, self.l.entries(), &a, Party::A);
        let ka = linalg::conditional_entries(dims, self.k.entries(), &a, Party::A);
        constrained_top(self.inner, &la, &ka, self.t, self.feas_tol)
    }

    fn objective(&self, params: &[f64]) -> f64 {
        self.solve_inner(params).map_or(f64::NEG_INFINITY, |(v, _)| v)
    }
}

struct Grid {
    /// Points per coordinate; polar angles first, then phases.
    counts: Vec<usize>,
    steps: Vec<f64>,
    polar: usize,
}

impl Grid {
    fn new(dim: usize, cfg: &OptimizerConfig, budget: Option<usize>) -> Grid {
        let polar = dim.saturating_sub(1);
        let (mut nt, mut np) = (cfg.grid_theta, cfg.grid_phi);
        let total_params = 2 * polar;
        let full = cfg.grid_theta.saturating_mul(cfg.grid_phi);
        let target = budget.map_or(full, |b| b.min(full));
        if polar > 1 || target < full {
            let per = ((target as f64).powf(1.0 / total_params as f64).floor() as usize).max(2);
            nt = per;
            np = per;
        }
        let mut counts = vec![nt; polar];
        counts.extend(std::iter::repeat_n(np, polar));
        let mut steps = vec![std::f64::consts::PI / (nt.max(2) - 1) as f64; polar];
        steps.extend(std::iter::repeat_n(2.0 * std::f64::consts::PI / np as f64, polar));
        Grid { counts, steps, polar }
    }

    fn len(&self) -> usize {
        self.counts.iter().product()
    }

    fn index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.counts.len()];
        for (k, &n) in self.counts.iter().enumerate().rev() {
            idx[k] = flat % n;
            flat /= n;
        }
        idx
    }

    fn params(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().zip(&self.steps).map(|(&i, &h)| i as f64 * h).collect()
    }

    /// Chebyshev distance in grid steps, periodic in the phase coordinates.
    fn distance(&self, a: &[usize], b: &[usize]) -> usize {
        a.iter()
            .zip(b)
            .enumerate()
            .map(|(k, (&x, &y))| {
                let d = x.abs_diff(y);
                if k >= self.polar {
                    d.min(self.counts[k] - d)
                } else {
                    d
                }
            })
            .max()
            .unwrap_or(0)
    }
}

fn boundary_search(
    l: &HermitianOperator,
    spec: &ConstraintSpec,
    side: HalfSpaceSide,
    cfg: &OptimizerConfig,
) -> Result<OptimizationResult> {
    let (k, t) = oriented(spec, side);
    // Grid the larger party; the smaller one is solved exactly.
    let swapped = l.dims().1 > l.dims().0;
    let (l2, k2) = if swapped {
        (l.swap_parties(), k.swap_parties())
    } else {
        (l.clone(), k)
    };
    let (outer, inner) = l2.dims();
    let problem = Problem {
        l: l2,
        k: k2,
        t,
        feas_tol: cfg.feas_tol,
        outer,
        inner,
    };
    let budget = (inner > 2).then_some(LARGE_INNER_GRID_BUDGET);
    let grid = Grid::new(outer, cfg, budget);

    let scores: Vec<Option<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|flat| {
            let v = problem.objective(&grid.params(&grid.index(flat)));
            v.is_finite().then_some(v)
        })
        .collect();
    let mut feasible: Vec<(usize, f64)> = scores
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|v| (i, v)))
        .collect();
    if feasible.is_empty() {
        return Err(UewError::EmptyFeasibleSet);
    }
    feasible.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));

    let mut seeds: Vec<Vec<usize>> = Vec::new();
    for &(flat, _) in &feasible {
        let idx = grid.index(flat);
        if seeds.iter().all(|s| grid.distance(s, &idx) > 2) {
            seeds.push(idx);
            if seeds.len() == POLISH_SEEDS {
                break;
            }
        }
    }

    let polished: Vec<Polished> = seeds
        .par_iter()
        .map(|idx| polish(&problem, grid.params(idx), &grid.steps))
        .collect();

    let mut best: Option<(f64, ProductKet, usize, bool)> = None;
    for p in polished {
        let Some((_, bvec)) = problem.solve_inner(&p.params) else {
            continue;
        };
        let a = Ket::new(angles_to_amps(outer, &p.params))?;
        let b = Ket::new(bvec)?;
        let pk = if swapped {
            ProductKet::new(b, a)
        } else {
            ProductKet::new(a, b)
        };
        let value = expectation(l, &pk)?;
        let replace = match &best {
            None => true,
            Some((bv, bpk, _, _)) => {
                value > bv + 1e-12 || ((value - bv).abs() <= 1e-12 && pk.lex_cmp(bpk).is_lt())
            }
        };
        if replace {
            best = Some((value, pk, p.sweeps, p.converged));
        }
    }
    let (value, argmax, iterations, converged) = best.ok_or(UewError::EmptyFeasibleSet)?;
    let tc = expectation(spec.op(), &argmax)?;
    if !side.admits(tc, spec.value(), cfg.feas_tol) {
        return Err(UewError::NoConvergence(format!(
            "constrained optimum left the {side} half-space (Tr(Cσ) = {tc})"
        )));
    }
    Ok(OptimizationResult {
        value,
        argmax,
        constraint_value: Some(tc),
        converged,
        iterations,
        method: Method::Hybrid,
    })
}

struct Polished {
    params: Vec<f64>,
    sweeps: usize,
    converged: bool,
}

/// Coordinate-wise golden-section ascent on the outer angles. Infeasible
/// points score `-∞`, so a step into the infeasible region is never taken.
fn polish(problem: &Problem, mut params: Vec<f64>, steps: &[f64]) -> Polished {
    let mut value = problem.objective(&params);
    let mut h: f64 = steps.iter().copied().fold(0.0, f64::max);
    let mut sweeps = 0;
    while h > POLISH_MIN_STEP && sweeps < POLISH_MAX_SWEEPS {
        sweeps += 1;
        let before = value;
        for k in 0..params.len() {
            let centre = params[k];
            let mut trial = params.clone();
            let (x, fx) = golden_max(
                |x| {
                    trial[k] = x;
                    problem.objective(&trial)
                },
                centre - h,
                centre + h,
                h * 1e-4,
            );
            if fx > value {
                params[k] = x;
                value = fx;
            }
        }
        if value - before <= 1e-15 * value.abs().max(1.0) {
            h *= 0.25;
        }
    }
    Polished {
        params,
        sweeps,
        converged: h <= POLISH_MIN_STEP,
    }
}

fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Maximizes `⟨b|M|b⟩` over unit vectors with `⟨b|K|b⟩ ≤ t`.
///
/// Returns `None` if the half-space misses the unit sphere by more than
/// `feas_tol`. The returned vector is always feasible, so its value is a
/// certified lower bound.
pub(crate) fn constrained_top(n: usize, m: &[C64], k: &[C64], t: f64, feas_tol: f64) -> Option<(f64, Vec<C64>)> {
    let neg_k: Vec<C64> = k.iter().map(|z| -z).collect();
    let (neg_kmin, kmin_vec) = top_eigvec(n, &neg_k);
    if -neg_kmin > t + feas_tol {
        return None;
    }
    let kq = |v: &[C64]| linalg::quad_form(n, k, v);
    let mq = |v: &[C64]| linalg::quad_form(n, m, v);

    let (_, v0) = top_eigvec(n, m);
    if kq(&v0) <= t {
        return Some((mq(&v0), v0));
    }

    let shifted = |mu: f64| -> Vec<C64> {
        let op: Vec<C64> = m.iter().zip(k).map(|(a, b)| a - b * mu).collect();
        top_eigvec(n, &op).1
    };

    // The constraint residual of the top eigenvector decreases in μ.
    let scale = max_abs(m).max(1e-300) / max_abs(k).max(1e-300);
    let mut lo = 0.0;
    let mut v_lo = v0;
    let mut hi = scale * 1e-6;
    let mut v_hi;
    let mut found = false;
    loop {
        v_hi = shifted(hi);
        if kq(&v_hi) <= t {
            found = true;
            break;
        }
        lo = hi;
        v_lo = v_hi.clone();
        hi *= 2.0;
        if hi > scale * 1e15 {
            break;
        }
    }
    if !found {
        // Feasible only on the boundary of the half-space.
        return Some((mq(&kmin_vec), kmin_vec));
    }
    for _ in 0..200 {
        if hi - lo <= 1e-15 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let v = shifted(mid);
        if kq(&v) <= t {
            hi = mid;
            v_hi = v;
        } else {
            lo = mid;
            v_lo = v;
        }
    }
    if kq(&v_hi) >= t - 1e-13 * t.abs().max(1.0) {
        return Some((mq(&v_hi), v_hi));
    }

    // Degenerate top eigenspace at the optimal multiplier: slide along the
    // great circle from the feasible to the infeasible eigenvector until the
    // constraint is active.
    let overlap = linalg::inner(&v_hi, &v_lo);
    if overlap.norm() > 0.0 {
        let phase = overlap.conj() / overlap.norm();
        for z in v_lo.iter_mut() {
            *z *= phase;
        }
    }
    let mix = |s: f64| -> Vec<C64> {
        let (sn, cs) = s.sin_cos();
        let v: Vec<C64> = v_hi.iter().zip(&v_lo).map(|(x, y)| x * cs + y * sn).collect();
        let nv = linalg::norm(&v);
        v.into_iter().map(|z| z / nv).collect()
    };
    let (mut s_lo, mut s_hi) = (0.0, std::f64::consts::FRAC_PI_2);
    let mut best = v_hi.clone();
    for _ in 0..100 {
        let mid = 0.5 * (s_lo + s_hi);
        let v = mix(mid);
        if kq(&v) <= t {
            s_lo = mid;
            best = v;
        } else {
            s_hi = mid;
        }
    }
    Some((mq(&best), best))
}

fn max_abs(m: &[C64]) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
