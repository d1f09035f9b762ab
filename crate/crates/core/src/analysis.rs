//! Noise-threshold scans over the rotated witness family and expectation-plane
//! data for plotting.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, UewError};
use crate::linalg::{expectation, HermitianOperator};
use crate::optimize::{sup_product_constrained, OptimizerConfig};
use crate::states::{DensityMatrix, NoisyStateFamily};
use crate::witness::{
    build_minus_inf, build_v_alpha, combine_alpha, ConstraintSpec, HalfSpaceSide, UewPair, Witness, DETECTION_TOL,
};

/// Coarse step of the noise scans used by [`alpha_sweep`].
pub const SWEEP_RESOLUTION: f64 = 1e-4;

/// Rotation parameter of a sweep row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SweepAlpha {
    Finite(f64),
    MinusInfinity,
}

impl fmt::Display for SweepAlpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepAlpha::Finite(a) => write!(f, "{a}"),
            SweepAlpha::MinusInfinity => f.write_str("-inf"),
        }
    }
}

impl FromStr for SweepAlpha {
    type Err = UewError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("-inf") || t.eq_ignore_ascii_case("-infinity") {
            return Ok(SweepAlpha::MinusInfinity);
        }
        let a: f64 = t
            .parse()
            .map_err(|_| UewError::Parse(format!("cannot parse alpha '{t}'")))?;
        if !a.is_finite() || a >= 1.0 {
            return Err(UewError::InvalidParameter(format!("alpha must be finite and below 1, got {t}")));
        }
        Ok(SweepAlpha::Finite(a))
    }
}

impl Serialize for SweepAlpha {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SweepAlpha::Finite(a) => s.serialize_f64(*a),
            SweepAlpha::MinusInfinity => s.serialize_str("-inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: SweepAlpha,
    /// Scalar `b` of the witness `b·I - T`.
    pub bound: f64,
    /// Largest detected noise weight; `None` if even `p = 0` escapes.
    pub threshold_p: Option<f64>,
    pub detected_at_zero: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlaneSample {
    pub label: String,
    /// `Tr(Cρ)`.
    pub x: f64,
    /// `Tr(Lρ)`.
    pub y: f64,
}

/// Whether the family member at `p` lies on `side` and the witness fires.
pub fn detected_at(
    family: &NoisyStateFamily,
    witness: &Witness,
    spec: &ConstraintSpec,
    side: HalfSpaceSide,
    p: f64,
) -> Result<bool> {
    let rho = family.member(p)?;
    let tc = expectation(spec.op(), &rho)?;
    Ok(side.admits(tc, spec.value(), 0.0) && witness.expectation(&rho)? < -DETECTION_TOL)
}

/// Largest `p*` such that every member with `p ≤ p*` is detected.
///
/// The family is scanned on a grid of step `resolution`, and the first
/// transition is refined by bisection to `resolution / 10`.
pub fn threshold_scan(
    family: &NoisyStateFamily,
    witness: &Witness,
    spec: &ConstraintSpec,
    side: HalfSpaceSide,
    resolution: f64,
) -> Result<Option<f64>> {
    if !(resolution > 0.0 && resolution <= 1e-3) {
        return Err(UewError::InvalidParameter(format!(
            "scan resolution must lie in (0, 1e-3], got {resolution}"
        )));
    }
    if side == HalfSpaceSide::Boundary {
        return Err(UewError::InvalidParameter("threshold scan needs side leq or geq".into()));
    }
    let hit = |p: f64| detected_at(family, witness, spec, side, p);
    if !hit(0.0)? {
        return Ok(None);
    }
    let steps = (1.0 / resolution).ceil() as usize;
    let mut last = 0.0;
    for k in 1..=steps {
        let p = (k as f64 * resolution).min(1.0);
        if !hit(p)? {
            let (mut lo, mut hi) = (last, p);
            while hi - lo > resolution / 10.0 {
                let mid = 0.5 * (lo + hi);
                if hit(mid)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(Some(lo));
        }
        last = p;
    }
    Ok(Some(1.0))
}

/// One row per requested rotation, in input order. `p_c(L)` is computed once
/// and every witness is scanned on the `leq` half-space.
pub fn alpha_sweep(
    l: &HermitianOperator,
    spec: &ConstraintSpec,
    alphas: &[SweepAlpha],
    family: &NoisyStateFamily,
    cfg: &OptimizerConfig,
) -> Result<Vec<SweepRow>> {
    spec.ensure_distinct_from(l)?;
    for a in alphas {
        if let SweepAlpha::Finite(x) = a {
            if !(x.is_finite() && *x < 1.0) {
                return Err(UewError::InvalidParameter(format!("alpha must be below 1, got {x}")));
            }
        }
    }
    let p_c = sup_product_constrained(l, spec, HalfSpaceSide::Leq, cfg)?.value;
    alphas
        .par_iter()
        .map(|&alpha| {
            let witness = match alpha {
                SweepAlpha::Finite(a) => build_v_alpha(spec, l, p_c, a)?.witness,
                SweepAlpha::MinusInfinity => build_minus_inf(spec, l, p_c)?,
            };
            let threshold_p = threshold_scan(family, &witness, spec, HalfSpaceSide::Leq, SWEEP_RESOLUTION)?;
            Ok(SweepRow {
                alpha,
                bound: witness.bound(),
                threshold_p,
                detected_at_zero: threshold_p.is_some(),
            })
        })
        .collect()
}

/// Witness pair sharing one test operator: `L` itself (`alpha = None`),
/// `N_α`, or `L - C` for `-∞`. The `leq` bound follows the rotated family;
/// the `geq` bound is the constrained supremum of the shared test operator.
pub fn uew_pair_for(
    l: &HermitianOperator,
    spec: &ConstraintSpec,
    alpha: Option<SweepAlpha>,
    cfg: &OptimizerConfig,
) -> Result<UewPair> {
    let p_c = sup_product_constrained(l, spec, HalfSpaceSide::Leq, cfg)?.value;
    let (test, bound_c) = match alpha {
        None => (l.clone(), p_c),
        Some(SweepAlpha::Finite(a)) => (combine_alpha(spec, l, a)?, a * spec.value() + (1.0 - a) * p_c),
        Some(SweepAlpha::MinusInfinity) => (l.sub(spec.op())?, p_c - spec.value()),
    };
    let bound_ct = sup_product_constrained(&test, spec, HalfSpaceSide::Geq, cfg)?.value;
    UewPair::new(
        spec.clone(),
        Witness::new(bound_c, test.clone()),
        Witness::new(bound_ct, test),
    )
}

pub fn plane_samples(
    states: &[(String, DensityMatrix)],
    spec: &ConstraintSpec,
    l: &HermitianOperator,
) -> Result<Vec<PlaneSample>> {
    spec.ensure_same_dims(l)?;
    states
        .iter()
        .map(|(label, rho)| {
            Ok(PlaneSample {
                label: label.clone(),
                x: expectation(spec.op(), rho)?,
                y: expectation(l, rho)?,
            })
        })
        .collect()
}

/// `v` cut (not rounded) to `decimals` places, as thresholds are printed.
///
/// A relative guard of 1e-9 keeps values like `0.0099999999997` from
/// dropping a digit through representation error.
pub fn truncate_decimals(v: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    let scaled = v * scale;
    let guarded = scaled + 1e-9 * scaled.abs().max(1.0);
    guarded.floor() / scale
}
