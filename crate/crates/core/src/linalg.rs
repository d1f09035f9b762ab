//! Dense complex linear algebra for small bipartite Hilbert spaces.
//!
//! Everything here is sized for desk-scale problems (total dimension at most
//! [`MAX_DIM`]). Matrices are stored row-major; operators carry the bipartite
//! split `(d_A, d_B)` so that partial contractions know which index is which.

use std::cmp::Ordering;

use num_complex::Complex64 as C64;

use crate::error::{Result, UewError};

/// Largest total Hilbert space dimension accepted by the operator types.
pub const MAX_DIM: usize = 64;

/// Elementwise tolerance used when validating Hermiticity at construction.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Amplitudes below this modulus are ignored when fixing the global phase.
const PHASE_EPS: f64 = 1e-12;

const JACOBI_MAX_SWEEPS: usize = 100;

/// One of the two parties of a bipartite system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Party {
    A,
    B,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::A => Party::B,
            Party::B => Party::A,
        }
    }
}

/// A normalized state vector with canonical global phase.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    amps: Vec<C64>,
}

impl Ket {
    /// Normalizes `amps` and fixes the global phase so that the first
    /// non-negligible amplitude is real and non-negative.
    pub fn new(mut amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(UewError::InvalidParameter("empty ket".into()));
        }
        if amps.len() > MAX_DIM {
            return Err(UewError::DimensionTooLarge(amps.len()));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(UewError::InvalidParameter("non-finite amplitude".into()));
        }
        let norm = norm(&amps);
        if norm == 0.0 {
            return Err(UewError::InvalidParameter("zero vector cannot be normalized".into()));
        }
        for a in amps.iter_mut() {
            *a /= norm;
        }
        canonicalize_phase(&mut amps);
        Ok(Ket { amps })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Ket::new(amps.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(UewError::InvalidParameter(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ket::new(amps)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Ket) -> Result<C64> {
        check_dim(self.dim(), other.dim())?;
        Ok(inner(&self.amps, &other.amps))
    }

    /// Lexicographic order on the `(re, im)` amplitude sequence.
    pub fn lex_cmp(&self, other: &Ket) -> Ordering {
        lex_cmp(&self.amps, &other.amps)
    }

    pub fn projector(&self) -> HermitianOperator {
        HermitianOperator::outer(&self.amps)
    }
}

/// Eigenvalue together with a normalized eigenvector.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Ket,
}

/// Complex Hermitian matrix with bipartite dimension metadata.
///
/// Hermiticity is checked once at construction. Arithmetic that preserves it
/// (real linear combinations, Kronecker products, contractions) builds the
/// result directly.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    dims: (usize, usize),
    entries: Vec<C64>,
}

impl HermitianOperator {
    pub fn new(dims: (usize, usize), entries: Vec<C64>) -> Result<Self> {
        let n = validate_dims(dims)?;
        if entries.len() != n * n {
            return Err(UewError::DimensionMismatch {
                expected: n * n,
                found: entries.len(),
            });
        }
        let asym = max_asymmetry(n, &entries);
        if asym.is_nan() || asym > HERMITIAN_TOL {
            return Err(UewError::NotHermitian(asym));
        }
        Ok(HermitianOperator { dims, entries })
    }

    /// Accepts matrices that are Hermitian within `tol` and replaces them by
    /// their Hermitian part `(M + M†)/2`.
    pub fn new_symmetrized(dims: (usize, usize), mut entries: Vec<C64>, tol: f64) -> Result<Self> {
        let n = validate_dims(dims)?;
        if entries.len() != n * n {
            return Err(UewError::DimensionMismatch {
                expected: n * n,
                found: entries.len(),
            });
        }
        let asym = max_asymmetry(n, &entries);
        if asym.is_nan() || asym > tol {
            return Err(UewError::NotHermitian(asym));
        }
        for i in 0..n {
            entries[i * n + i].im = 0.0;
            for j in (i + 1)..n {
                let avg = (entries[i * n + j] + entries[j * n + i].conj()) * 0.5;
                entries[i * n + j] = avg;
                entries[j * n + i] = avg.conj();
            }
        }
        Ok(HermitianOperator { dims, entries })
    }

    pub fn from_rows(dims: (usize, usize), rows: &[Vec<C64>]) -> Result<Self> {
        HermitianOperator::new(dims, rows.iter().flatten().copied().collect())
    }

    pub fn from_real_rows(dims: (usize, usize), rows: &[Vec<f64>]) -> Result<Self> {
        HermitianOperator::new(
            dims,
            rows.iter()
                .flatten()
                .map(|&x| C64::new(x, 0.0))
                .collect(),
        )
    }

    pub(crate) fn from_parts(dims: (usize, usize), entries: Vec<C64>) -> Self {
        debug_assert_eq!(entries.len(), dims.0 * dims.1 * dims.0 * dims.1);
        HermitianOperator { dims, entries }
    }

    pub fn identity(dims: (usize, usize)) -> Result<Self> {
        let n = validate_dims(dims)?;
        let mut entries = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            entries[i * n + i] = C64::new(1.0, 0.0);
        }
        Ok(HermitianOperator { dims, entries })
    }

    pub fn zeros(dims: (usize, usize)) -> Result<Self> {
        let n = validate_dims(dims)?;
        Ok(HermitianOperator {
            dims,
            entries: vec![C64::new(0.0, 0.0); n * n],
        })
    }

    pub fn diagonal(dims: (usize, usize), diag: &[f64]) -> Result<Self> {
        let n = validate_dims(dims)?;
        check_dim(n, diag.len())?;
        let mut entries = vec![C64::new(0.0, 0.0); n * n];
        for (i, &d) in diag.iter().enumerate() {
            entries[i * n + i] = C64::new(d, 0.0);
        }
        Ok(HermitianOperator { dims, entries })
    }

    /// Rank-one operator `|v⟩⟨v|` for an arbitrary (not necessarily
    /// normalized) vector, as a single-party operator with dims `(d, 1)`.
    pub fn outer(v: &[C64]) -> Self {
        let n = v.len();
        let mut entries = Vec::with_capacity(n * n);
        for vi in v {
            for vj in v {
                entries.push(vi * vj.conj());
            }
        }
        // Diagonal of v v† is real up to rounding in the product.
        for i in 0..n {
            entries[i * n + i].im = 0.0;
        }
        HermitianOperator {
            dims: (n, 1),
            entries,
        }
    }

    /// Reinterprets the bipartite split without touching the entries.
    pub fn with_dims(mut self, dims: (usize, usize)) -> Result<Self> {
        let n = validate_dims(dims)?;
        check_dim(self.dim(), n)?;
        self.dims = dims;
        Ok(self)
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.0 * self.dims.1
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.dim() + j]
    }

    pub fn trace(&self) -> f64 {
        let n = self.dim();
        (0..n).map(|i| self.entries[i * n + i].re).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        HermitianOperator {
            dims: self.dims,
            entries: self.entries.iter().map(|e| e * s).collect(),
        }
    }

    /// `a·self + b·other`; both operators must share the bipartite split.
    pub fn linear_combination(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(HermitianOperator {
            dims: self.dims,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(x, y)| x * a + y * b)
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.linear_combination(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.linear_combination(1.0, other, -1.0)
    }

    /// `self + s·I`.
    pub fn shift(&self, s: f64) -> Self {
        let n = self.dim();
        let mut out = self.clone();
        for i in 0..n {
            out.entries[i * n + i].re += s;
        }
        out
    }

    /// Max-entry norm of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        let n = self.dim();
        check_dim(n, v.len())?;
        Ok((0..n)
            .map(|i| {
                self.entries[i * n..(i + 1) * n]
                    .iter()
                    .zip(v)
                    .map(|(m, x)| m * x)
                    .sum()
            })
            .collect())
    }

    /// `⟨v|M|v⟩` for an arbitrary vector; the imaginary residue is dropped.
    pub fn quad_form(&self, v: &[C64]) -> Result<f64> {
        check_dim(self.dim(), v.len())?;
        Ok(quad_form(self.dim(), &self.entries, v))
    }

    /// `Tr(self · other)` for two operators of equal dimension.
    pub fn trace_product(&self, other: &Self) -> Result<f64> {
        let n = self.dim();
        check_dim(n, other.dim())?;
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                acc += self.entries[i * n + k] * other.entries[k * n + i];
            }
        }
        Ok(acc.re)
    }

    /// Partial transpose on the given party.
    pub fn partial_transpose(&self, party: Party) -> Self {
        let (da, db) = self.dims;
        let n = self.dim();
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..da {
            for j in 0..db {
                for k in 0..da {
                    for l in 0..db {
                        let (ri, rj, ck, cl) = match party {
                            Party::A => (k, j, i, l),
                            Party::B => (i, l, k, j),
                        };
                        out[(i * db + j) * n + k * db + l] =
                            self.entries[(ri * db + rj) * n + ck * db + cl];
                    }
                }
            }
        }
        HermitianOperator {
            dims: self.dims,
            entries: out,
        }
    }

    /// The same operator with the roles of A and B exchanged.
    pub fn swap_parties(&self) -> Self {
        let (da, db) = self.dims;
        let n = self.dim();
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..da {
            for j in 0..db {
                for k in 0..da {
                    for l in 0..db {
                        out[(j * da + i) * n + l * da + k] = self.entries[(i * db + j) * n + k * db + l];
                    }
                }
            }
        }
        HermitianOperator {
            dims: (db, da),
            entries: out,
        }
    }

    /// Full eigendecomposition: eigenvalues ascending, one orthonormal
    /// eigenvector per eigenvalue.
    pub fn eigh(&self) -> (Vec<f64>, Vec<Vec<C64>>) {
        let n = self.dim();
        if n == 1 {
            return (vec![self.entries[0].re], vec![vec![C64::new(1.0, 0.0)]]);
        }
        if n == 2 {
            let (lo, hi) = eig2x2(self.entries[0].re, self.entries[1], self.entries[3].re);
            return (vec![lo.0, hi.0], vec![lo.1.to_vec(), hi.1.to_vec()]);
        }
        jacobi_hermitian(n, &self.entries)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigh().0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigh().0[0]
    }

    /// Largest eigenvalue and a canonical eigenvector for it.
    ///
    /// Degenerate top eigenspaces resolve to the candidate whose canonical
    /// amplitude sequence is lexicographically greatest, which for a
    /// diagonal operator is the lowest-index basis vector.
    pub fn max_eigenpair(&self) -> EigenPair {
        let n = self.dim();
        if n <= 2 {
            let (value, v) = if n == 1 {
                (self.entries[0].re, vec![C64::new(1.0, 0.0)])
            } else {
                let (v, vec) = top_eig2x2(self.entries[0].re, self.entries[1], self.entries[3].re);
                (v, vec.to_vec())
            };
            return EigenPair {
                value,
                vector: Ket::new(v).expect("eigenvector is non-zero"),
            };
        }
        let (values, vectors) = jacobi_hermitian(n, &self.entries);
        let top = values[n - 1];
        let tol = 1e-10 * top.abs().max(1.0);
        let vector = values
            .iter()
            .zip(vectors)
            .filter(|(v, _)| **v >= top - tol)
            .map(|(_, vec)| Ket::new(vec).expect("eigenvector is non-zero"))
            .max_by(|a, b| a.lex_cmp(b))
            .expect("at least one eigenvector");
        let value = self.quad_form(vector.amplitudes()).expect("dimension checked");
        EigenPair { value, vector }
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return Err(UewError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

/// Kronecker product for values that compose into a bipartite system.
pub trait Kron: Sized {
    fn kron(&self, other: &Self) -> Self;
}

impl Kron for HermitianOperator {
    /// The result carries dims `(dim(a), dim(b))`.
    fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim(), other.dim());
        let size = n * m;
        let mut entries = vec![C64::new(0.0, 0.0); size * size];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                for j in 0..m {
                    for l in 0..m {
                        entries[(i * m + j) * size + k * m + l] = a * other.entries[j * m + l];
                    }
                }
            }
        }
        HermitianOperator {
            dims: (n, m),
            entries,
        }
    }
}

impl Kron for Ket {
    fn kron(&self, other: &Self) -> Self {
        Ket {
            amps: kron_vec(&self.amps, &other.amps),
        }
    }
}

pub fn tensor_product<T: Kron>(a: &T, b: &T) -> T {
    a.kron(b)
}

/// Anything with a well-defined expectation value for a Hermitian operator.
pub trait ExpectationTarget {
    fn expectation_of(&self, op: &HermitianOperator) -> Result<f64>;
}

impl ExpectationTarget for Ket {
    fn expectation_of(&self, op: &HermitianOperator) -> Result<f64> {
        op.quad_form(&self.amps)
    }
}

/// `Tr(Mρ)` or `⟨ψ|M|ψ⟩`, depending on the state representation.
pub fn expectation<S: ExpectationTarget + ?Sized>(op: &HermitianOperator, state: &S) -> Result<f64> {
    state.expectation_of(op)
}

/// Contracts one party of `op` with the pure state `ket`, returning the
/// operator `R` on the remaining party with `⟨b|R|b⟩ = ⟨ket,b|op|ket,b⟩`
/// (or `⟨a,ket|op|a,ket⟩` when contracting party B).
pub fn conditional_operator(op: &HermitianOperator, ket: &Ket, side: Party) -> Result<HermitianOperator> {
    let (da, db) = op.dims();
    let contracted = match side {
        Party::A => da,
        Party::B => db,
    };
    check_dim(contracted, ket.dim())?;
    let out_dim = match side {
        Party::A => db,
        Party::B => da,
    };
    let entries = conditional_entries(op.dims(), op.entries(), ket.amplitudes(), side);
    Ok(HermitianOperator::from_parts((out_dim, 1), entries))
}

pub(crate) fn conditional_entries(dims: (usize, usize), m: &[C64], a: &[C64], side: Party) -> Vec<C64> {
    let (da, db) = dims;
    let n = da * db;
    match side {
        Party::A => {
            let mut out = vec![C64::new(0.0, 0.0); db * db];
            for i in 0..da {
                let ai = a[i].conj();
                if ai == C64::new(0.0, 0.0) {
                    continue;
                }
                for (k, &ak) in a.iter().enumerate().take(da) {
                    let w = ai * ak;
                    if w == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for j in 0..db {
                        let row = (i * db + j) * n + k * db;
                        for l in 0..db {
                            out[j * db + l] += w * m[row + l];
                        }
                    }
                }
            }
            hermitize(db, &mut out);
            out
        }
        Party::B => {
            let mut out = vec![C64::new(0.0, 0.0); da * da];
            for j in 0..db {
                let bj = a[j].conj();
                if bj == C64::new(0.0, 0.0) {
                    continue;
                }
                for l in 0..db {
                    let w = bj * a[l];
                    if w == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for i in 0..da {
                        for k in 0..da {
                            out[i * da + k] += w * m[(i * db + j) * n + k * db + l];
                        }
                    }
                }
            }
            hermitize(da, &mut out);
            out
        }
    }
}

/// Restores exact Hermiticity lost to rounding in an accumulated sum.
fn hermitize(n: usize, m: &mut [C64]) {
    for i in 0..n {
        m[i * n + i].im = 0.0;
        for j in (i + 1)..n {
            let avg = (m[i * n + j] + m[j * n + i].conj()) * 0.5;
            m[i * n + j] = avg;
            m[j * n + i] = avg.conj();
        }
    }
}

pub fn max_eigenpair(op: &HermitianOperator) -> EigenPair {
    op.max_eigenpair()
}

pub(crate) fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

pub(crate) fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn quad_form(n: usize, m: &[C64], v: &[C64]) -> f64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        let row: C64 = m[i * n..(i + 1) * n].iter().zip(v).map(|(a, x)| a * x).sum();
        acc += v[i].conj() * row;
    }
    acc.re
}

pub(crate) fn canonicalize_phase(amps: &mut [C64]) {
    if let Some(pivot) = amps.iter().position(|a| a.norm() > PHASE_EPS) {
        let a = amps[pivot];
        let phase = a.conj() / a.norm();
        for x in amps.iter_mut() {
            *x *= phase;
        }
        amps[pivot] = C64::new(amps[pivot].norm(), 0.0);
    }
}

pub(crate) fn lex_cmp(a: &[C64], b: &[C64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o != Ordering::Equal {
            return o;
        }
    }
    a.len().cmp(&b.len())
}

/// Closed-form eigensystem of `[[a, b], [b*, d]]`: `(low, high)` pairs of
/// eigenvalue and normalized eigenvector.
pub(crate) fn eig2x2(a: f64, b: C64, d: f64) -> ((f64, [C64; 2]), (f64, [C64; 2])) {
    let (hi, vhi) = top_eig2x2(a, b, d);
    let lo = a + d - hi;
    // The orthogonal complement of vhi.
    let vlo = [-vhi[1].conj(), vhi[0].conj()];
    ((lo, vlo), (hi, vhi))
}

/// Largest eigenvalue and normalized eigenvector of `[[a, b], [b*, d]]`.
/// Ties on a diagonal matrix resolve to `|0⟩`.
#[inline]
pub(crate) fn top_eig2x2(a: f64, b: C64, d: f64) -> (f64, [C64; 2]) {
    let half_gap = 0.5 * (a - d);
    let r = (half_gap * half_gap + b.norm_sqr()).sqrt();
    let lambda = 0.5 * (a + d) + r;
    let bn = b.norm();
    if bn == 0.0 {
        return if a >= d {
            (lambda, [C64::new(1.0, 0.0), C64::new(0.0, 0.0)])
        } else {
            (lambda, [C64::new(0.0, 0.0), C64::new(1.0, 0.0)])
        };
    }
    // Two algebraically equivalent forms; pick the better-conditioned one.
    let (u0, u1) = if a >= d {
        (C64::new(lambda - d, 0.0), b.conj())
    } else {
        (b, C64::new(lambda - a, 0.0))
    };
    let nrm = (u0.norm_sqr() + u1.norm_sqr()).sqrt();
    (lambda, [u0 / nrm, u1 / nrm])
}

/// Cyclic Jacobi on the real symmetric embedding `[[Re, -Im], [Im, Re]]`.
///
/// Every eigenvalue of the embedding appears twice; a complex Gram-Schmidt
/// pass over `u + iv` recovers one orthonormal eigenvector per eigenvalue.
fn jacobi_hermitian(n: usize, m: &[C64]) -> (Vec<f64>, Vec<Vec<C64>>) {
    let s = 2 * n;
    let mut a = vec![0.0f64; s * s];
    for i in 0..n {
        for j in 0..n {
            let z = m[i * n + j];
            a[i * s + j] = z.re;
            a[(i + n) * s + j + n] = z.re;
            a[i * s + j + n] = -z.im;
            a[(i + n) * s + j] = z.im;
        }
    }
    let mut v = vec![0.0f64; s * s];
    for i in 0..s {
        v[i * s + i] = 1.0;
    }
    let frob: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let threshold = 1e-12 * frob.max(1.0);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..s)
            .flat_map(|i| (0..s).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * s + j] * a[i * s + j])
            .sum::<f64>()
            .sqrt();
        if off <= threshold {
            break;
        }
        for p in 0..s {
            for q in (p + 1)..s {
                let apq = a[p * s + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[p * s + p];
                let aqq = a[q * s + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..s {
                    let akp = a[k * s + p];
                    let akq = a[k * s + q];
                    a[k * s + p] = c * akp - sn * akq;
                    a[k * s + q] = sn * akp + c * akq;
                }
                for k in 0..s {
                    let apk = a[p * s + k];
                    let aqk = a[q * s + k];
                    a[p * s + k] = c * apk - sn * aqk;
                    a[q * s + k] = sn * apk + c * aqk;
                }
                for k in 0..s {
                    let vkp = v[k * s + p];
                    let vkq = v[k * s + q];
                    v[k * s + p] = c * vkp - sn * vkq;
                    v[k * s + q] = sn * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by(|&i, &j| a[i * s + i].total_cmp(&a[j * s + j]).then(i.cmp(&j)));

    let mut values = Vec::with_capacity(n);
    let mut vectors: Vec<Vec<C64>> = Vec::with_capacity(n);
    for &col in &order {
        if vectors.len() == n {
            break;
        }
        let mut z: Vec<C64> = (0..n)
            .map(|k| C64::new(v[k * s + col], v[(k + n) * s + col]))
            .collect();
        for u in &vectors {
            let proj = inner(u, &z);
            for (zk, uk) in z.iter_mut().zip(u) {
                *zk -= proj * uk;
            }
        }
        let nz = norm(&z);
        if nz < 0.5 {
            continue;
        }
        for zk in z.iter_mut() {
            *zk /= nz;
        }
        values.push(quad_form(n, m, &z));
        vectors.push(z);
    }
    // Rayleigh quotients can perturb the ordering of near-degenerate values.
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    let values_sorted = idx.iter().map(|&i| values[i]).collect();
    let vectors_sorted = idx.iter().map(|&i| vectors[i].clone()).collect();
    (values_sorted, vectors_sorted)
}

fn validate_dims(dims: (usize, usize)) -> Result<usize> {
    if dims.0 == 0 || dims.1 == 0 {
        return Err(UewError::InvalidParameter("dimensions must be positive".into()));
    }
    let n = dims.0 * dims.1;
    if n > MAX_DIM {
        return Err(UewError::DimensionTooLarge(n));
    }
    Ok(n)
}

fn max_asymmetry(n: usize, m: &[C64]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            let d = (m[i * n + j] - m[j * n + i].conj()).norm();
            if d.is_nan() {
                return f64::INFINITY;
            }
            worst = worst.max(d);
        }
    }
    worst
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(UewError::DimensionMismatch { expected, found });
    }
    Ok(())
}
