//! Product states, density matrices, the two-qubit worked example and its
//! white-noise family.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, UewError};
use crate::linalg::{self, ExpectationTarget, HermitianOperator, Ket, Kron, Party};

/// Trace and positivity tolerance for density matrices.
pub const STATE_TOL: f64 = 1e-10;

/// Pure product state `|a⟩ ⊗ |b⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductKet {
    a: Ket,
    b: Ket,
}

impl ProductKet {
    pub fn new(a: Ket, b: Ket) -> Self {
        ProductKet { a, b }
    }

    pub fn a(&self) -> &Ket {
        &self.a
    }

    pub fn b(&self) -> &Ket {
        &self.b
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.a.dim(), self.b.dim())
    }

    pub fn joint(&self) -> Ket {
        self.a.kron(&self.b)
    }

    /// Lexicographic order on the concatenated canonical amplitudes.
    pub fn lex_cmp(&self, other: &ProductKet) -> std::cmp::Ordering {
        self.a.lex_cmp(&other.a).then_with(|| self.b.lex_cmp(&other.b))
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            op: self.joint().projector().with_dims(self.dims()).expect("dims match"),
        }
    }
}

impl ExpectationTarget for ProductKet {
    fn expectation_of(&self, op: &HermitianOperator) -> Result<f64> {
        if op.dims() != self.dims() {
            return Err(UewError::DimensionMismatch {
                expected: op.dim(),
                found: self.a.dim() * self.b.dim(),
            });
        }
        let v = linalg::kron_vec(self.a.amplitudes(), self.b.amplitudes());
        op.quad_form(&v)
    }
}

/// Unit-trace positive semidefinite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let tr = op.trace();
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(UewError::NotADensityMatrix(format!("trace is {tr}")));
        }
        let min = op.min_eigenvalue();
        if min < -STATE_TOL {
            return Err(UewError::NotADensityMatrix(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(DensityMatrix { op })
    }

    pub fn pure(ket: &Ket, dims: (usize, usize)) -> Result<Self> {
        Ok(DensityMatrix {
            op: ket.projector().with_dims(dims)?,
        })
    }

    pub fn maximally_mixed(dims: (usize, usize)) -> Result<Self> {
        let id = HermitianOperator::identity(dims)?;
        let n = id.dim() as f64;
        Ok(DensityMatrix { op: id.scale(1.0 / n) })
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn dims(&self) -> (usize, usize) {
        self.op.dims()
    }

    /// Convex mixture `w·self + (1-w)·other`.
    pub fn mix(&self, w: f64, other: &DensityMatrix) -> Result<Self> {
        if !(0.0..=1.0).contains(&w) {
            return Err(UewError::InvalidParameter(format!("mixing weight {w} outside [0,1]")));
        }
        Ok(DensityMatrix {
            op: self.op.linear_combination(w, &other.op, 1.0 - w)?,
        })
    }

    /// Reduced state after tracing out `party`.
    pub fn partial_trace(&self, party: Party) -> HermitianOperator {
        let (da, db) = self.dims();
        let n = da * db;
        let e = self.op.entries();
        match party {
            Party::B => {
                let mut out = vec![C64::new(0.0, 0.0); da * da];
                for i in 0..da {
                    for k in 0..da {
                        out[i * da + k] = (0..db).map(|j| e[(i * db + j) * n + k * db + j]).sum();
                    }
                }
                HermitianOperator::new_symmetrized((da, 1), out, 1e-12).expect("reduced state is Hermitian")
            }
            Party::A => {
                let mut out = vec![C64::new(0.0, 0.0); db * db];
                for j in 0..db {
                    for l in 0..db {
                        out[j * db + l] = (0..da).map(|i| e[(i * db + j) * n + i * db + l]).sum();
                    }
                }
                HermitianOperator::new_symmetrized((db, 1), out, 1e-12).expect("reduced state is Hermitian")
            }
        }
    }

    /// Smallest eigenvalue of the partial transpose on B.
    pub fn min_partial_transpose_eigenvalue(&self) -> f64 {
        self.op.partial_transpose(Party::B).min_eigenvalue()
    }

    /// Positive partial transpose. For 2⊗2 and 2⊗3 this is equivalent to
    /// separability, which makes it a ground-truth oracle in tests.
    pub fn is_ppt(&self) -> bool {
        self.min_partial_transpose_eigenvalue() >= -1e-12
    }
}

impl ExpectationTarget for DensityMatrix {
    fn expectation_of(&self, op: &HermitianOperator) -> Result<f64> {
        op.trace_product(&self.op)
    }
}

/// Which reading of the worked example's three-outcome measurement to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PovmConvention {
    /// `|ξ±⟩ = |0⟩/√2 ± √((1-x)/2)|1⟩`, so that `P1 + P2 + P3 = I`.
    #[default]
    Complete,
    /// `|ξ±⟩ = |1⟩/√2 ± √((1-x)/2)|0⟩`, the elements taken literally as
    /// typeset; they do not sum to the identity for `x ≠ 0`.
    AsPrinted,
}

impl std::str::FromStr for PovmConvention {
    type Err = UewError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "complete" => Ok(PovmConvention::Complete),
            "printed" | "as-printed" => Ok(PovmConvention::AsPrinted),
            other => Err(UewError::Parse(format!("unknown POVM convention '{other}'"))),
        }
    }
}

/// Parameters of the two-qubit worked example.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Example31Config {
    /// Amplitude of `|00⟩`.
    pub amp_alpha: f64,
    /// Amplitude of `|01⟩` and `|10⟩`.
    pub amp_beta: f64,
    /// Weight of the `|1⟩⟨1|` measurement element, in `(0, 1)`.
    pub x: f64,
    /// Constraint value.
    pub c: f64,
    pub povm: PovmConvention,
}

impl Default for Example31Config {
    fn default() -> Self {
        Example31Config {
            amp_alpha: 0.7,
            amp_beta: 0.5,
            x: 2.0 / 3.0,
            c: 0.01,
            povm: PovmConvention::Complete,
        }
    }
}

impl Example31Config {
    /// Amplitude of `|11⟩` fixed by normalization.
    pub fn delta(&self) -> Result<f64> {
        let rem = 1.0 - self.amp_alpha * self.amp_alpha - 2.0 * self.amp_beta * self.amp_beta;
        if rem < -1e-12 || !rem.is_finite() {
            return Err(UewError::InvalidParameter(format!(
                "amp_alpha² + 2·amp_beta² exceeds 1 by {:e}",
                -rem
            )));
        }
        Ok(rem.max(0.0).sqrt())
    }
}

pub fn build_phi(cfg: &Example31Config) -> Result<Ket> {
    let delta = cfg.delta()?;
    Ket::from_real(&[cfg.amp_alpha, cfg.amp_beta, cfg.amp_beta, delta])
}

/// The three measurement elements on one qubit.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    pub p1: HermitianOperator,
    pub p2: HermitianOperator,
    pub p3: HermitianOperator,
}

/// Unnormalized `|ξ+⟩` and `|ξ-⟩` for the given convention.
pub fn xi_vectors(x: f64, convention: PovmConvention) -> ([C64; 2], [C64; 2]) {
    let h = C64::new(0.5f64.sqrt(), 0.0);
    let s = C64::new(((1.0 - x) / 2.0).sqrt(), 0.0);
    match convention {
        PovmConvention::Complete => ([h, s], [h, -s]),
        PovmConvention::AsPrinted => ([s, h], [-s, h]),
    }
}

pub fn build_povm(x: f64, convention: PovmConvention) -> Result<Povm> {
    if !(x > 0.0 && x < 1.0) {
        return Err(UewError::InvalidParameter(format!("x = {x} must lie in (0, 1)")));
    }
    let (plus, minus) = xi_vectors(x, convention);
    Ok(Povm {
        p1: HermitianOperator::diagonal((2, 1), &[0.0, x])?,
        p2: HermitianOperator::outer(&plus),
        p3: HermitianOperator::outer(&minus),
    })
}

/// Constraint operator `P1⊗P1`, test operator `P2⊗P2` and the target state.
#[derive(Clone, Debug, PartialEq)]
pub struct Example31 {
    pub constraint: HermitianOperator,
    pub test: HermitianOperator,
    pub phi: Ket,
}

pub fn build_example31(cfg: &Example31Config) -> Result<Example31> {
    let povm = build_povm(cfg.x, cfg.povm)?;
    Ok(Example31 {
        constraint: povm.p1.kron(&povm.p1),
        test: povm.p2.kron(&povm.p2),
        phi: build_phi(cfg)?,
    })
}

/// `ρ_p = (p/d)·I + (1-p)·|φ⟩⟨φ|`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoisyStateFamily {
    pure: DensityMatrix,
}

impl NoisyStateFamily {
    pub fn new(ket: &Ket, dims: (usize, usize)) -> Result<Self> {
        Ok(NoisyStateFamily {
            pure: DensityMatrix::pure(ket, dims)?,
        })
    }

    pub fn example31(cfg: &Example31Config) -> Result<Self> {
        NoisyStateFamily::new(&build_phi(cfg)?, (2, 2))
    }

    pub fn pure(&self) -> &DensityMatrix {
        &self.pure
    }

    pub fn dim(&self) -> usize {
        self.pure.op.dim()
    }

    pub fn member(&self, p: f64) -> Result<DensityMatrix> {
        if !(0.0..=1.0).contains(&p) {
            return Err(UewError::InvalidParameter(format!("noise weight p = {p} outside [0, 1]")));
        }
        let noise = DensityMatrix::maximally_mixed(self.pure.dims())?;
        noise.mix(p, &self.pure)
    }
}

pub fn noisy_member(family: &NoisyStateFamily, p: f64) -> Result<DensityMatrix> {
    family.member(p)
}

/// Haar-random unit vector: complex standard normal entries, normalized.
pub fn random_ket_with<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Ket {
    loop {
        let amps: Vec<C64> = (0..dim)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        if let Ok(k) = Ket::new(amps) {
            return k;
        }
    }
}

pub fn random_product_ket_with<R: Rng + ?Sized>(rng: &mut R, dims: (usize, usize)) -> ProductKet {
    let a = random_ket_with(rng, dims.0);
    let b = random_ket_with(rng, dims.1);
    ProductKet::new(a, b)
}

pub fn random_product_ket(dims: (usize, usize), seed: u64) -> Result<ProductKet> {
    if dims.0 == 0 || dims.1 == 0 {
        return Err(UewError::InvalidParameter("dimensions must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(random_product_ket_with(&mut rng, dims))
}

/// Random mixed state `G G† / Tr(G G†)` from a `d × rank` complex Ginibre matrix.
pub fn random_density_matrix_with<R: Rng + ?Sized>(
    rng: &mut R,
    dims: (usize, usize),
    rank: usize,
) -> Result<DensityMatrix> {
    let n = dims.0 * dims.1;
    let rank = rank.clamp(1, n);
    let g: Vec<C64> = (0..n * rank)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let mut e = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            e[i * n + j] = (0..rank).map(|k| g[i * rank + k] * g[j * rank + k].conj()).sum();
        }
    }
    let op = HermitianOperator::new_symmetrized(dims, e, 1e-9)?;
    let tr = op.trace();
    DensityMatrix::new(op.scale(1.0 / tr))
}
