//! Suprema of `⟨a,b|L|a,b⟩` over pure product states, optionally restricted
//! to a half-space of the constraint, and the procedures built on them.

mod constrained;
mod oracle;
mod seesaw;

use std::fmt;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Result, UewError};
use crate::linalg::{self, expectation, HermitianOperator};
use crate::states::ProductKet;
use crate::witness::{combine_alpha, ConstraintSpec, HalfSpaceSide, BOUNDARY_TOL};

pub use constrained::sup_product_constrained;
pub use oracle::{grid_oracle_sup, ORACLE_MAX_DIM};
pub use seesaw::{seesaw_from, sup_product_unconstrained, SeesawRun};

/// Default lower end of the α₀ bisection bracket.
pub const DEFAULT_BRACKET_MIN: f64 = -1e6;
/// Final bracket width of the α₀ bisection.
pub const ALPHA0_WIDTH: f64 = 1e-6;
/// Slack in the α₀ feasibility predicate, per unit of `1 - α`.
pub const ALPHA0_SLACK: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub grid_theta: usize,
    pub grid_phi: usize,
    pub seesaw_tol: f64,
    pub seesaw_max_iter: usize,
    pub feas_tol: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 64,
            grid_theta: 181,
            grid_phi: 360,
            seesaw_tol: 1e-11,
            seesaw_max_iter: 500,
            feas_tol: 1e-9,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(seed: u64) -> Self {
        OptimizerConfig {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(UewError::InvalidParameter(m.into()));
        if self.restarts == 0 {
            return bad("restarts must be positive");
        }
        if self.grid_theta < 2 || self.grid_phi < 2 {
            return bad("grids need at least 2 points");
        }
        if !(self.seesaw_tol > 0.0 && self.feas_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.seesaw_max_iter == 0 {
            return bad("seesaw_max_iter must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Seesaw,
    Grid,
    Hybrid,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Seesaw => "seesaw",
            Method::Grid => "grid",
            Method::Hybrid => "hybrid",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizationResult {
    pub value: f64,
    pub argmax: ProductKet,
    /// `Tr(Cσ)` at the argmax for constrained searches.
    pub constraint_value: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub method: Method,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CaseLabel {
    CaseI,
    CaseII,
    Degenerate,
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseLabel::CaseI => "CaseI",
            CaseLabel::CaseII => "CaseII",
            CaseLabel::Degenerate => "Degenerate",
        })
    }
}

/// Largest eigenvalue and eigenvector of an `n × n` Hermitian block.
pub(crate) fn top_eigvec(n: usize, m: &[C64]) -> (f64, Vec<C64>) {
    match n {
        1 => (m[0].re, vec![C64::new(1.0, 0.0)]),
        2 => {
            let (v, e) = linalg::top_eig2x2(m[0].re, m[1], m[3].re);
            (v, e.to_vec())
        }
        _ => {
            let ep = HermitianOperator::from_parts((n, 1), m.to_vec()).max_eigenpair();
            (ep.value, ep.vector.amplitudes().to_vec())
        }
    }
}

/// Unit vector from `d - 1` polar half-angles followed by `d - 1` phases.
///
/// For `d = 2` this is `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
pub fn angles_to_amps(d: usize, params: &[f64]) -> Vec<C64> {
    let polar = d - 1;
    debug_assert_eq!(params.len(), 2 * polar);
    let mut amps = Vec::with_capacity(d);
    let mut tail = 1.0;
    for k in 0..d {
        let r = if k < polar {
            let (s, c) = (0.5 * params[k]).sin_cos();
            let r = tail * c;
            tail *= s;
            r
        } else {
            tail
        };
        let phase = if k == 0 { 0.0 } else { params[polar + k - 1] };
        amps.push(C64::from_polar(r, phase));
    }
    amps
}

/// Labels the configuration by where the unconstrained optima of `L` and
/// `L - C` sit relative to `Tr(ρC) = c`.
pub fn classify_case(l: &HermitianOperator, spec: &ConstraintSpec, cfg: &OptimizerConfig) -> Result<CaseLabel> {
    spec.ensure_same_dims(l)?;
    spec.ensure_distinct_from(l)?;
    let l_side = optimum_side(l, spec, cfg)?;
    match l_side {
        None => return Ok(CaseLabel::Degenerate),
        Some(HalfSpaceSide::Leq) => {
            return Err(UewError::AssumptionViolated(
                "optimum of the test operator lies in the leq half-space; swap the sides".into(),
            ))
        }
        _ => {}
    }
    let diff = l.sub(spec.op())?;
    Ok(match optimum_side(&diff, spec, cfg)? {
        None => CaseLabel::Degenerate,
        Some(HalfSpaceSide::Geq) => CaseLabel::CaseI,
        Some(_) => CaseLabel::CaseII,
    })
}

/// Strict side of the unconstrained optimum, or `None` if it touches the
/// boundary or is also attained on the other side.
fn optimum_side(op: &HermitianOperator, spec: &ConstraintSpec, cfg: &OptimizerConfig) -> Result<Option<HalfSpaceSide>> {
    let free = sup_product_unconstrained(op, cfg)?;
    let tc = expectation(spec.op(), &free.argmax)?;
    let side = HalfSpaceSide::classify(tc, spec.value());
    if (tc - spec.value()).abs() <= BOUNDARY_TOL || side == HalfSpaceSide::Boundary {
        return Ok(None);
    }
    let other = if side == HalfSpaceSide::Leq {
        HalfSpaceSide::Geq
    } else {
        HalfSpaceSide::Leq
    };
    match sup_product_constrained(op, spec, other, cfg) {
        Ok(r) if r.value >= free.value - BOUNDARY_TOL => Ok(None),
        Ok(_) | Err(UewError::EmptyFeasibleSet) => Ok(Some(side)),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Alpha0Outcome {
    Finite(f64),
    NoFiniteAlpha0,
}

/// Feasibility predicate of the α₀ search: whether
/// `sup_{S_c} Tr(N_α ρ) ≤ αc + (1 - α) p_c + slack`.
pub fn alpha0_predicate(
    l: &HermitianOperator,
    spec: &ConstraintSpec,
    p_c: f64,
    alpha: f64,
    cfg: &OptimizerConfig,
) -> Result<bool> {
    let n = combine_alpha(spec, l, alpha)?;
    let bound = alpha * spec.value() + (1.0 - alpha) * p_c;
    let sup = sup_product_constrained(&n, spec, HalfSpaceSide::Leq, cfg)?.value;
    Ok(sup <= bound + ALPHA0_SLACK * (1.0 - alpha))
}

/// Smallest `α < 1` for which `V_{α:c}` stays non-negative on the
/// constrained separable set, found by bisection on `[bracket_min, 0]`.
///
/// `p_c` must be the certified supremum of `L` over the `leq` half-space.
pub fn compute_alpha0(
    l: &HermitianOperator,
    spec: &ConstraintSpec,
    p_c: f64,
    cfg: &OptimizerConfig,
    bracket_min: f64,
) -> Result<Alpha0Outcome> {
    if !(bracket_min.is_finite() && bracket_min < 0.0) {
        return Err(UewError::InvalidParameter(format!(
            "bracket_min must be finite and negative, got {bracket_min}"
        )));
    }
    let pred = |a: f64| alpha0_predicate(l, spec, p_c, a, cfg);
    if !pred(0.0)? {
        return Err(UewError::InconsistentBracket(
            "predicate fails at alpha = 0; p_c is not the constrained supremum".into(),
        ));
    }
    if pred(bracket_min)? {
        return Ok(Alpha0Outcome::NoFiniteAlpha0);
    }
    let (mut lo, mut hi) = (bracket_min, 0.0);
    while hi - lo > ALPHA0_WIDTH {
        let mid = 0.5 * (lo + hi);
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Alpha0Outcome::Finite(hi))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RotatedBoundReport {
    pub alpha: f64,
    /// `sup_{S_c} Tr(N_α ρ)` from the constrained optimizer.
    pub optimized: f64,
    /// `αc + (1 - α) p_c`.
    pub affine: f64,
    pub residual: f64,
    /// Whether the optima of `L` and `N_α` both lie in the `geq` half-space.
    pub hypothesis_holds: bool,
}

pub fn lemma31_residual(
    l: &HermitianOperator,
    spec: &ConstraintSpec,
    alpha: f64,
    cfg: &OptimizerConfig,
) -> Result<RotatedBoundReport> {
    let p_c = sup_product_constrained(l, spec, HalfSpaceSide::Leq, cfg)?.value;
    let n = combine_alpha(spec, l, alpha)?;
    let optimized = sup_product_constrained(&n, spec, HalfSpaceSide::Leq, cfg)?.value;
    let affine = alpha * spec.value() + (1.0 - alpha) * p_c;
    let in_geq = |op: &HermitianOperator| -> Result<bool> {
        let r = sup_product_unconstrained(op, cfg)?;
        Ok(expectation(spec.op(), &r.argmax)? >= spec.value() - BOUNDARY_TOL)
    };
    let hypothesis_holds = in_geq(l)? && in_geq(&n)?;
    Ok(RotatedBoundReport {
        alpha,
        optimized,
        affine,
        residual: if alpha == 0.0 { 0.0 } else { (optimized - affine).abs() },
        hypothesis_holds,
    })
}
