//! Witness algebra: constraint half-spaces, witnesses of the form `b·I - T`,
//! the rotated family built from `αC + (1-α)L`, and detection verdicts.

use std::fmt;
use std::str::FromStr;

use crate::error::{Result, UewError};
use crate::linalg::{ExpectationTarget, HermitianOperator};
use crate::states::DensityMatrix;

/// Distance from the constraint value within which a state counts as lying
/// on the separating hyperplane.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// A witness fires only when its expectation is below `-DETECTION_TOL`.
pub const DETECTION_TOL: f64 = 1e-10;

/// Constraint observable `C` with constraint value `c`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSpec {
    op: HermitianOperator,
    value: f64,
}

impl ConstraintSpec {
    pub fn new(op: HermitianOperator, value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(UewError::InvalidParameter(format!("constraint value {value} is not finite")));
        }
        Ok(ConstraintSpec { op, value })
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn dims(&self) -> (usize, usize) {
        self.op.dims()
    }

    /// Rejects a test operator equal to the constraint operator.
    pub fn ensure_distinct_from(&self, test: &HermitianOperator) -> Result<()> {
        self.ensure_same_dims(test)?;
        if self.op.max_abs_diff(test)? <= 1e-12 {
            return Err(UewError::InvalidParameter(
                "constraint and test operators must differ".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn ensure_same_dims(&self, other: &HermitianOperator) -> Result<()> {
        if self.op.dims() != other.dims() {
            return Err(UewError::DimensionMismatch {
                expected: self.op.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

/// Side of the hyperplane `Tr(ρC) = c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HalfSpaceSide {
    /// `Tr(ρC) ≤ c`
    Leq,
    /// `Tr(ρC) ≥ c`
    Geq,
    /// On the hyperplane within [`BOUNDARY_TOL`].
    Boundary,
}

impl HalfSpaceSide {
    pub fn classify(expectation: f64, c: f64) -> HalfSpaceSide {
        if expectation < c - BOUNDARY_TOL {
            HalfSpaceSide::Leq
        } else if expectation > c + BOUNDARY_TOL {
            HalfSpaceSide::Geq
        } else {
            HalfSpaceSide::Boundary
        }
    }

    /// Whether `expectation` lies in this closed half-space, up to `tol`.
    pub fn admits(self, expectation: f64, c: f64, tol: f64) -> bool {
        match self {
            HalfSpaceSide::Leq => expectation <= c + tol,
            HalfSpaceSide::Geq => expectation >= c - tol,
            HalfSpaceSide::Boundary => (expectation - c).abs() <= tol,
        }
    }
}

impl fmt::Display for HalfSpaceSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HalfSpaceSide::Leq => "leq",
            HalfSpaceSide::Geq => "geq",
            HalfSpaceSide::Boundary => "boundary",
        })
    }
}

impl FromStr for HalfSpaceSide {
    type Err = UewError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "leq" => Ok(HalfSpaceSide::Leq),
            "geq" => Ok(HalfSpaceSide::Geq),
            "boundary" => Ok(HalfSpaceSide::Boundary),
            other => Err(UewError::Parse(format!("unknown side '{other}' (expected leq or geq)"))),
        }
    }
}

/// The operator `bound·I - test`.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    bound: f64,
    test: HermitianOperator,
}

impl Witness {
    pub fn new(bound: f64, test: HermitianOperator) -> Self {
        Witness { bound, test }
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn test(&self) -> &HermitianOperator {
        &self.test
    }

    pub fn as_operator(&self) -> HermitianOperator {
        self.test.scale(-1.0).shift(self.bound)
    }

    /// `bound - ⟨test⟩`; assumes a unit-trace state.
    pub fn expectation<S: ExpectationTarget + ?Sized>(&self, state: &S) -> Result<f64> {
        Ok(self.bound - state.expectation_of(&self.test)?)
    }

    /// Positive rescaling; leaves every verdict unchanged.
    pub fn scaled(&self, s: f64) -> Result<Witness> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(UewError::InvalidParameter(format!("scale {s} must be positive")));
        }
        Ok(Witness {
            bound: self.bound * s,
            test: self.test.scale(s),
        })
    }
}

/// Member of the rotated family: the witness `V = (αc + (1-α)p_c(L))·I - N_α`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaWitness {
    pub alpha: f64,
    pub constraint: ConstraintSpec,
    pub test_l: HermitianOperator,
    pub p_c_of_l: f64,
    pub witness: Witness,
}

/// Witnesses for both half-spaces sharing one test operator.
#[derive(Clone, Debug, PartialEq)]
pub struct UewPair {
    w_c: Witness,
    w_ctilde: Witness,
    constraint: ConstraintSpec,
}

impl UewPair {
    pub fn new(constraint: ConstraintSpec, w_c: Witness, w_ctilde: Witness) -> Result<Self> {
        constraint.ensure_same_dims(w_c.test())?;
        if w_c.test() != w_ctilde.test() {
            return Err(UewError::InvalidParameter(
                "both witnesses of a pair must share the test operator".into(),
            ));
        }
        Ok(UewPair {
            w_c,
            w_ctilde,
            constraint,
        })
    }

    /// Pair for `test` from the two constrained suprema.
    pub fn from_bounds(constraint: ConstraintSpec, test: HermitianOperator, p_c: f64, p_ctilde: f64) -> Result<Self> {
        UewPair::new(
            constraint,
            Witness::new(p_c, test.clone()),
            Witness::new(p_ctilde, test),
        )
    }

    pub fn w_c(&self) -> &Witness {
        &self.w_c
    }

    pub fn w_ctilde(&self) -> &Witness {
        &self.w_ctilde
    }

    pub fn constraint(&self) -> &ConstraintSpec {
        &self.constraint
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerdictKind {
    Entangled,
    NotDetected,
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictKind::Entangled => "Entangled",
            VerdictKind::NotDetected => "NotDetected",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub side_used: HalfSpaceSide,
    pub witness_value: f64,
}

impl Verdict {
    pub fn is_entangled(&self) -> bool {
        self.kind == VerdictKind::Entangled
    }
}

/// `N_α = αC + (1-α)L` for `α < 1`.
pub fn combine_alpha(spec: &ConstraintSpec, l: &HermitianOperator, alpha: f64) -> Result<HermitianOperator> {
    check_alpha(alpha)?;
    spec.ensure_same_dims(l)?;
    if alpha == 0.0 {
        return Ok(l.clone());
    }
    spec.op.linear_combination(alpha, l, 1.0 - alpha)
}

/// Finest witness `g_s(L)·I - L`.
pub fn build_few(l: &HermitianOperator, g_s: f64) -> Witness {
    Witness::new(g_s, l.clone())
}

/// The rotated witness for `α < 1`, given `p_c(L)`.
pub fn build_v_alpha(spec: &ConstraintSpec, l: &HermitianOperator, p_c: f64, alpha: f64) -> Result<AlphaWitness> {
    let n_alpha = combine_alpha(spec, l, alpha)?;
    let bound = if alpha == 0.0 {
        p_c
    } else {
        alpha * spec.value + (1.0 - alpha) * p_c
    };
    Ok(AlphaWitness {
        alpha,
        constraint: spec.clone(),
        test_l: l.clone(),
        p_c_of_l: p_c,
        witness: Witness::new(bound, n_alpha),
    })
}

/// Limit of the rotated family as `α → -∞`: `(p_c(L) - c)·I - (L - C)`.
pub fn build_minus_inf(spec: &ConstraintSpec, l: &HermitianOperator, p_c: f64) -> Result<Witness> {
    spec.ensure_same_dims(l)?;
    Ok(Witness::new(p_c - spec.value, l.sub(&spec.op)?))
}

/// Which half-space a state falls in.
pub fn halfspace_membership(rho: &DensityMatrix, spec: &ConstraintSpec) -> Result<HalfSpaceSide> {
    let t = rho.expectation_of(&spec.op)?;
    Ok(HalfSpaceSide::classify(t, spec.value))
}

/// Applies the pair: the `≤ c` witness on `S_c`, the `≥ c` witness on its
/// complement, and both on the boundary.
pub fn detect(rho: &DensityMatrix, pair: &UewPair) -> Result<Verdict> {
    let side = halfspace_membership(rho, &pair.constraint)?;
    let value = match side {
        HalfSpaceSide::Leq => pair.w_c.expectation(rho)?,
        HalfSpaceSide::Geq => pair.w_ctilde.expectation(rho)?,
        HalfSpaceSide::Boundary => pair.w_c.expectation(rho)?.min(pair.w_ctilde.expectation(rho)?),
    };
    let kind = if value < -DETECTION_TOL {
        VerdictKind::Entangled
    } else {
        VerdictKind::NotDetected
    };
    Ok(Verdict {
        kind,
        side_used: side,
        witness_value: value,
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha >= 1.0 {
        return Err(UewError::InvalidParameter(format!(
            "rotation parameter α = {alpha} must be a finite value below 1"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{Ket, Kron};
    use crate::states::{build_example31, Example31Config, NoisyStateFamily};
    use approx::assert_abs_diff_eq;

    fn example() -> (ConstraintSpec, HermitianOperator) {
        let ex = build_example31(&Example31Config::default()).unwrap();
        (ConstraintSpec::new(ex.constraint, 0.01).unwrap(), ex.test)
    }

    #[test]
    fn combine_alpha_cases() {
        let (spec, l) = example();
        assert_eq!(combine_alpha(&spec, &l, 0.0).unwrap(), l);

        let same = ConstraintSpec::new(l.clone(), 0.3).unwrap();
        let n = combine_alpha(&same, &l, 0.5).unwrap();
        assert!(n.max_abs_diff(&l).unwrap() < 1e-16);

        let n = combine_alpha(&spec, &l, -1.0).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = l.entry(i, j) * 2.0 - spec.op().entry(i, j);
                assert!((n.entry(i, j) - want).norm() < 1e-16);
            }
        }

        assert!(combine_alpha(&spec, &l, 1.0).is_err());
        assert!(combine_alpha(&spec, &l, 2.0).is_err());
        assert!(combine_alpha(&spec, &l, f64::NAN).is_err());
        let small = HermitianOperator::identity((2, 1)).unwrap();
        assert!(combine_alpha(&spec, &small, -1.0).is_err());
    }

    #[test]
    fn few_examples() {
        let p11 = Ket::basis(4, 3).unwrap().projector().with_dims((2, 2)).unwrap();
        let w = build_few(&p11, 1.0);
        let want = HermitianOperator::identity((2, 2)).unwrap().sub(&p11).unwrap();
        assert_eq!(w.as_operator(), want);
        let one = Ket::basis(2, 1).unwrap();
        let optimal = crate::states::ProductKet::new(one.clone(), one);
        assert_eq!(w.expectation(&optimal).unwrap(), 0.0);

        let (_, l) = example();
        let w = build_few(&l, 4.0 / 9.0);
        assert_eq!(w.bound(), 4.0 / 9.0);
        assert_eq!(w.test(), &l);
    }

    #[test]
    fn v_alpha_reduces_at_zero() {
        let (spec, l) = example();
        let v = build_v_alpha(&spec, &l, 0.43, 0.0).unwrap();
        let w = Witness::new(0.43, l.clone());
        assert!(v.witness.as_operator().max_abs_diff(&w.as_operator()).unwrap() <= 1e-12);
        let v = build_v_alpha(&spec, &l, 0.43, -1.0).unwrap();
        assert_abs_diff_eq!(v.witness.bound(), -0.01 + 2.0 * 0.43, epsilon = 1e-15);
        assert!(build_v_alpha(&spec, &l, 0.43, 1.0).is_err());
    }

    #[test]
    fn minus_inf_degenerate_constraint() {
        let (_, l) = example();
        let zero = ConstraintSpec::new(HermitianOperator::zeros((2, 2)).unwrap(), 0.0).unwrap();
        let w = build_minus_inf(&zero, &l, 0.4).unwrap();
        assert_eq!(w.as_operator(), Witness::new(0.4, l).as_operator());
    }

    #[test]
    fn membership_examples() {
        let (spec, _) = example();
        let fam = NoisyStateFamily::example31(&Example31Config::default()).unwrap();
        assert_eq!(halfspace_membership(&fam.member(0.0).unwrap(), &spec).unwrap(), HalfSpaceSide::Leq);
        assert_eq!(halfspace_membership(&fam.member(1.0).unwrap(), &spec).unwrap(), HalfSpaceSide::Geq);

        // Tr(ρC) = c exactly: mix |11⟩⟨11| (expectation 4/9) with |00⟩⟨00|.
        let w = 0.01 / (4.0 / 9.0);
        let p11 = DensityMatrix::pure(&Ket::basis(4, 3).unwrap(), (2, 2)).unwrap();
        let p00 = DensityMatrix::pure(&Ket::basis(4, 0).unwrap(), (2, 2)).unwrap();
        let rho = p11.mix(w, &p00).unwrap();
        assert_eq!(halfspace_membership(&rho, &spec).unwrap(), HalfSpaceSide::Boundary);
    }

    #[test]
    fn detect_maximally_mixed_is_never_flagged() {
        let (spec, l) = example();
        let pair = UewPair::from_bounds(spec, l, 0.43, 4.0 / 9.0).unwrap();
        let v = detect(&DensityMatrix::maximally_mixed((2, 2)).unwrap(), &pair).unwrap();
        assert_eq!(v.kind, VerdictKind::NotDetected);
        assert_eq!(v.side_used, HalfSpaceSide::Geq);
    }

    #[test]
    fn detect_boundary_uses_both_witnesses() {
        let p11 = Ket::basis(4, 3).unwrap().projector().with_dims((2, 2)).unwrap();
        let spec = ConstraintSpec::new(p11.clone(), 0.5).unwrap();
        let one = Ket::basis(2, 1).unwrap();
        let zero = Ket::basis(2, 0).unwrap();
        let rho = DensityMatrix::pure(&one.kron(&one), (2, 2))
            .unwrap()
            .mix(0.5, &DensityMatrix::pure(&zero.kron(&zero), (2, 2)).unwrap())
            .unwrap();
        let test = HermitianOperator::identity((2, 2)).unwrap();
        // Only the ≥ side witness fires on this state.
        let pair = UewPair::new(
            spec,
            Witness::new(1.0, test.clone()),
            Witness::new(0.5, test),
        )
        .unwrap();
        let v = detect(&rho, &pair).unwrap();
        assert_eq!(v.side_used, HalfSpaceSide::Boundary);
        assert!(v.is_entangled());
        assert_abs_diff_eq!(v.witness_value, -0.5, epsilon = 1e-15);
    }

    #[test]
    fn pair_requires_shared_test() {
        let (spec, l) = example();
        let other = l.scale(2.0);
        assert!(UewPair::new(spec, Witness::new(0.1, l), Witness::new(0.1, other)).is_err());
    }

    #[test]
    fn distinct_operators_enforced() {
        let (spec, l) = example();
        assert!(spec.ensure_distinct_from(&l).is_ok());
        assert!(spec.ensure_distinct_from(&spec.op().clone()).is_err());
    }

    #[test]
    fn verdict_invariant_under_positive_scaling() {
        let (spec, l) = example();
        let fam = NoisyStateFamily::example31(&Example31Config::default()).unwrap();
        let v = build_v_alpha(&spec, &l, 0.4305, -1.0).unwrap().witness;
        for s in [1e-3, 0.5, 3.0, 1e4] {
            let scaled = v.scaled(s).unwrap();
            for k in 0..20 {
                let rho = fam.member(k as f64 * 0.001).unwrap();
                let a = v.expectation(&rho).unwrap();
                let b = scaled.expectation(&rho).unwrap();
                assert_eq!(a.signum(), b.signum());
            }
        }
        assert!(v.scaled(0.0).is_err());
        assert!(v.scaled(-1.0).is_err());
    }

    #[test]
    fn side_parsing() {
        assert_eq!("leq".parse::<HalfSpaceSide>().unwrap(), HalfSpaceSide::Leq);
        assert_eq!("geq".parse::<HalfSpaceSide>().unwrap(), HalfSpaceSide::Geq);
        assert!("up".parse::<HalfSpaceSide>().is_err());
        assert_eq!(HalfSpaceSide::Leq.to_string(), "leq");
    }
}
