//! Brute-force reference for product-state suprema.
//!
//! The non-qubit party is scanned over a uniform angle grid; for each grid
//! point the qubit party is maximized in closed form on the Bloch sphere,
//! including the spherical-cap restriction imposed by a constraint. Nothing
//! here shares code with the see-saw or the dual solver beyond the partial
//! contraction.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::angles_to_amps;
use crate::error::{Result, UewError};
use crate::linalg::{self, HermitianOperator, Party};
use crate::witness::{ConstraintSpec, HalfSpaceSide};

/// Largest total dimension the oracle accepts.
pub const ORACLE_MAX_DIM: usize = 9;
/// Guard against accidental multi-hour scans.
const MAX_GRID_POINTS: f64 = 2e10;

/// Maximum of `⟨a,b|L|a,b⟩` over a product-state grid, optionally filtered
/// to one side of the constraint.
///
/// Each polar angle of the scanned party takes `resolution` values on
/// `[0, π]` and each relative phase `2·resolution - 1` values on `[0, 2π]`,
/// so the grid at resolution `r` contains the grid at `(r - 1)/k + 1` and
/// the result is monotone along such refinements. One party must be a qubit.
pub fn grid_oracle_sup(
    l: &HermitianOperator,
    constraint: Option<(&ConstraintSpec, HalfSpaceSide)>,
    resolution: usize,
) -> Result<f64> {
    let (da, db) = l.dims();
    if da * db > ORACLE_MAX_DIM || (da != 2 && db != 2) {
        return Err(UewError::DimensionTooLarge(da * db));
    }
    if resolution < 2 {
        return Err(UewError::InvalidParameter("oracle resolution must be at least 2".into()));
    }
    let oriented = match constraint {
        None => None,
        Some((spec, side)) => {
            spec.ensure_same_dims(l)?;
            match side {
                HalfSpaceSide::Leq => Some((spec.op().clone(), spec.value())),
                HalfSpaceSide::Geq => Some((spec.op().scale(-1.0), -spec.value())),
                HalfSpaceSide::Boundary => {
                    return Err(UewError::InvalidParameter("oracle needs side leq or geq".into()))
                }
            }
        }
    };
    // Put the qubit on side B.
    let swap = db != 2;
    let l = if swap { l.swap_parties() } else { l.clone() };
    let oriented = oriented.map(|(k, t)| if swap { (k.swap_parties(), t) } else { (k, t) });
    let outer = l.dims().0;
    let polar = outer - 1;

    let n_phase = 2 * resolution - 1;
    let points = (resolution as f64).powi(polar as i32) * (n_phase as f64).powi(polar as i32);
    if points > MAX_GRID_POINTS {
        return Err(UewError::InvalidParameter(format!(
            "oracle grid of {points:.3e} points is too large"
        )));
    }
    let polar_step = std::f64::consts::PI / (resolution - 1) as f64;
    let phase_step = 2.0 * std::f64::consts::PI / (n_phase - 1) as f64;
    let mut counts = vec![resolution; polar];
    counts.extend(std::iter::repeat_n(n_phase, polar));
    let inner_points: usize = counts.iter().skip(1).product();
    let first = counts.first().copied().unwrap_or(1);

    let eval = |params: &[f64]| -> f64 {
        let a = angles_to_amps(outer, params);
        let m = linalg::conditional_entries(l.dims(), l.entries(), &a, Party::A);
        match &oriented {
            None => bloch_max(&m, None),
            Some((k, t)) => {
                let kb = linalg::conditional_entries(l.dims(), k.entries(), &a, Party::A);
                bloch_max(&m, Some((&kb, *t)))
            }
        }
    };

    let best = (0..first)
        .into_par_iter()
        .map(|i0| {
            let mut best = f64::NEG_INFINITY;
            let mut params = vec![0.0; counts.len()];
            for rest in 0..inner_points {
                let mut r = rest;
                for k in (0..counts.len()).rev() {
                    let idx = if k == 0 {
                        i0
                    } else {
                        let v = r % counts[k];
                        r /= counts[k];
                        v
                    };
                    let step = if k < polar { polar_step } else { phase_step };
                    params[k] = idx as f64 * step;
                }
                best = best.max(eval(&params));
            }
            best
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);

    if best == f64::NEG_INFINITY {
        return Err(UewError::EmptyFeasibleSet);
    }
    Ok(best)
}

/// Bloch vector of a Hermitian 2×2 block: `⟨b|M|b⟩ = (tr M + m·r)/2`.
fn bloch(m: &[C64]) -> (f64, [f64; 3]) {
    (
        m[0].re + m[3].re,
        [2.0 * m[1].re, -2.0 * m[1].im, m[0].re - m[3].re],
    )
}

fn dot(x: &[f64; 3], y: &[f64; 3]) -> f64 {
    x[0] * y[0] + x[1] * y[1] + x[2] * y[2]
}

/// Maximum of `⟨b|M|b⟩` over qubit pure states, optionally subject to
/// `⟨b|K|b⟩ ≤ t`; `-∞` when the restriction is empty.
fn bloch_max(m: &[C64], constraint: Option<(&[C64], f64)>) -> f64 {
    let (trm, mv) = bloch(m);
    let mnorm = dot(&mv, &mv).sqrt();
    let Some((k, t)) = constraint else {
        return 0.5 * (trm + mnorm);
    };
    let (trk, kv) = bloch(k);
    // Cap k·r ≤ s_raw on the unit sphere.
    let s_raw = 2.0 * t - trk;
    let knorm = dot(&kv, &kv).sqrt();
    if knorm == 0.0 {
        return if s_raw >= 0.0 { 0.5 * (trm + mnorm) } else { f64::NEG_INFINITY };
    }
    if s_raw < -knorm {
        return f64::NEG_INFINITY;
    }
    let khat = [kv[0] / knorm, kv[1] / knorm, kv[2] / knorm];
    let mk = dot(&mv, &khat);
    // Unconstrained optimum r = m/|m| (any r when m = 0).
    if mnorm == 0.0 || mk * knorm / mnorm <= s_raw {
        return 0.5 * (trm + mnorm);
    }
    let s = (s_raw / knorm).clamp(-1.0, 1.0);
    let perp = (mnorm * mnorm - mk * mk).max(0.0).sqrt();
    0.5 * (trm + s * mk + (1.0 - s * s).sqrt() * perp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{build_example31, Example31Config};
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_is_one_at_any_resolution() {
        let l = HermitianOperator::identity((2, 2)).unwrap();
        for r in [2, 5, 31] {
            assert_abs_diff_eq!(grid_oracle_sup(&l, None, r).unwrap(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn example_unconstrained_near_closed_form() {
        let ex = build_example31(&Example31Config::default()).unwrap();
        let v = grid_oracle_sup(&ex.test, None, 181).unwrap();
        assert!(v <= 4.0 / 9.0 + 1e-12);
        assert_abs_diff_eq!(v, 4.0 / 9.0, epsilon = 1e-3);
    }

    #[test]
    fn monotone_under_refinement() {
        let ex = build_example31(&Example31Config::default()).unwrap();
        let spec = ConstraintSpec::new(ex.constraint, 0.01).unwrap();
        let l = ex.test.linear_combination(1.0, spec.op(), -2.0).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for r in [5, 9, 17, 33] {
            let v = grid_oracle_sup(&l, Some((&spec, HalfSpaceSide::Leq)), r).unwrap();
            assert!(v >= prev - 1e-15);
            prev = v;
        }
    }

    #[test]
    fn bloch_cap_matches_brute_force() {
        // M = σz, K = σx, ⟨σx⟩ ≤ -0.6 → ⟨σz⟩ ≤ 0.8.
        let m = [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-1.0, 0.0)];
        let k = [C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        assert_abs_diff_eq!(bloch_max(&m, Some((&k, -0.6))), 0.8, epsilon = 1e-14);
        assert_abs_diff_eq!(bloch_max(&m, Some((&k, 0.5))), 1.0, epsilon = 1e-14);
        assert_eq!(bloch_max(&m, Some((&k, -1.1))), f64::NEG_INFINITY);
    }

    #[test]
    fn qubit_on_either_side() {
        let diag = [0.1, 0.9, 0.3, 0.5, 0.2, 0.8];
        let ab = HermitianOperator::diagonal((3, 2), &diag).unwrap();
        let ba = ab.swap_parties();
        let x = grid_oracle_sup(&ab, None, 9).unwrap();
        let y = grid_oracle_sup(&ba, None, 9).unwrap();
        assert_abs_diff_eq!(x, 0.9, epsilon = 1e-12);
        assert_abs_diff_eq!(x, y, epsilon = 1e-12);
    }

    #[test]
    fn rejects_qutrit_pair() {
        let l = HermitianOperator::identity((3, 3)).unwrap();
        assert_eq!(grid_oracle_sup(&l, None, 5), Err(UewError::DimensionTooLarge(9)));
    }

    #[test]
    fn empty_half_space() {
        let ex = build_example31(&Example31Config::default()).unwrap();
        let spec = ConstraintSpec::new(ex.constraint, -0.5).unwrap();
        assert_eq!(
            grid_oracle_sup(&ex.test, Some((&spec, HalfSpaceSide::Leq)), 9),
            Err(UewError::EmptyFeasibleSet)
        );
    }
}
