//! Linear algebra over `Z/p^2`: reduction, lifting, and the coset of all
//! maps with a prescribed reduction.
//!
//! A map `phi` between free `Z/p^2`-modules reduces entrywise to a map
//! `psi` over `Z/p`. Going the other way, every matrix over `Z/p` lifts
//! canonically by reading its representatives in `[0, p)` as elements of
//! `[0, p^2)`. The set of *all* lifts of `psi` is the coset
//! `phi0 + L0`, where `L0` is the set of matrices that reduce to zero
//! (exactly the multiples of `p`, of which there are `p^(m*n)`) and `phi0`
//! is the distinguished lift that annihilates the lifted kernel basis.
//!
//! Maps of free modules over the integers can be treated by reducing the
//! matrices mod `p^2` first; only the `Z/p^2` case is implemented here.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field_linalg::{write_matrix, KernelCokernelFrame, MatrixModP};
use crate::prime::{inv_mod, mul_mod, neg_mod, Prime};

/// A dense `rows x cols` matrix over `Z/p^2`, row-major, entries in `[0, p^2)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "crate::field_linalg::MatrixRepr")]
pub struct MatrixModP2 {
    p: Prime,
    rows: usize,
    cols: usize,
    entries: Vec<u64>,
}

impl TryFrom<crate::field_linalg::MatrixRepr> for MatrixModP2 {
    type Error = Error;

    fn try_from(r: crate::field_linalg::MatrixRepr) -> Result<Self> {
        Self::new(r.p, r.rows, r.cols, r.entries)
    }
}

impl MatrixModP2 {
    pub fn new(p: Prime, rows: usize, cols: usize, entries: Vec<u64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                rows,
                cols,
                expected: rows * cols,
                got: entries.len(),
            });
        }
        if let Some(&bad) = entries.iter().find(|&&e| e >= p.squared()) {
            return Err(Error::EntryOutOfRange {
                value: bad,
                modulus: p.squared(),
            });
        }
        Ok(Self {
            p,
            rows,
            cols,
            entries,
        })
    }

    pub fn zero(p: Prime, rows: usize, cols: usize) -> Self {
        Self {
            p,
            rows,
            cols,
            entries: vec![0; rows * cols],
        }
    }

    pub fn identity(p: Prime, n: usize) -> Self {
        let mut m = Self::zero(p, n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1;
        }
        m
    }

    /// Builds an `n x k` matrix from `k` column vectors of length `n`.
    ///
    /// # Panics
    /// Panics on ragged input or out-of-range entries.
    pub fn from_columns(p: Prime, rows: usize, columns: &[Vec<u64>]) -> Self {
        let mut m = Self::zero(p, rows, columns.len());
        for (c, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column {c} has the wrong length");
            for (r, &v) in col.iter().enumerate() {
                assert!(v < p.squared(), "entry {v} out of range");
                m.entries[r * columns.len() + c] = v;
            }
        }
        m
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.p
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.entries[r * self.cols + c]
    }

    #[inline]
    fn set(&mut self, r: usize, c: usize, v: u64) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn rows_nested(&self) -> Vec<Vec<u64>> {
        (0..self.rows)
            .map(|r| self.entries[r * self.cols..(r + 1) * self.cols].to_vec())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    /// Entrywise residue mod `p`.
    pub fn reduce_mod_p(&self) -> MatrixModP {
        let p = self.p.get();
        MatrixModP::new(
            self.p,
            self.rows,
            self.cols,
            self.entries.iter().map(|&e| e % p).collect(),
        )
        .expect("residues are in range")
    }

    /// Entrywise sum mod `p^2`.
    ///
    /// # Panics
    /// Panics on shape mismatch.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let p2 = self.p.squared();
        Self {
            p: self.p,
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| (a + b) % p2)
                .collect(),
        }
    }

    /// Entrywise scalar multiple mod `p^2`.
    pub fn scale(&self, alpha: u64) -> Self {
        let p2 = self.p.squared();
        Self {
            p: self.p,
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .map(|&a| mul_mod(alpha, a, p2))
                .collect(),
        }
    }

    /// Matrix-vector product over `Z/p^2`.
    ///
    /// # Panics
    /// Panics if `v.len() != self.cols()`.
    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(v.len(), self.cols, "vector length does not match columns");
        let p2 = self.p.squared() as u128;
        (0..self.rows)
            .map(|r| {
                let row = &self.entries[r * self.cols..(r + 1) * self.cols];
                (row.iter()
                    .zip(v)
                    .fold(0u128, |acc, (&a, &x)| (acc + a as u128 * x as u128) % p2))
                    as u64
            })
            .collect()
    }

    /// Matrix product over `Z/p^2`.
    ///
    /// # Panics
    /// Panics if the inner dimensions disagree.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions disagree");
        let p2 = self.p.squared() as u128;
        let mut out = Self::zero(self.p, self.rows, other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc = 0u128;
                for i in 0..self.cols {
                    acc = (acc + self.get(r, i) as u128 * other.get(i, c) as u128) % p2;
                }
                out.set(r, c, acc as u64);
            }
        }
        out
    }

    /// Inverse over `Z/p^2`, when it exists.
    ///
    /// Gauss-Jordan with unit pivots: an entry is usable as a pivot exactly
    /// when it is not divisible by `p`. A square matrix is invertible mod
    /// `p^2` iff its reduction is invertible mod `p`, so whenever the
    /// reduction is nonsingular every column finds a unit pivot.
    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols, "only square matrices invert");
        let n = self.rows;
        let p = self.p.get();
        let p2 = self.p.squared();
        let mut a = self.clone();
        let mut inv = Self::identity(self.p, n);
        for col in 0..n {
            let r = (col..n).find(|&r| !a.get(r, col).is_multiple_of(p))?;
            a.swap_rows(r, col);
            inv.swap_rows(r, col);
            let scale = inv_mod(a.get(col, col), p2).expect("unit pivot");
            for c in 0..n {
                a.set(col, c, mul_mod(a.get(col, c), scale, p2));
                inv.set(col, c, mul_mod(inv.get(col, c), scale, p2));
            }
            for r2 in 0..n {
                if r2 == col {
                    continue;
                }
                let factor = a.get(r2, col);
                if factor == 0 {
                    continue;
                }
                for c in 0..n {
                    let va = (a.get(r2, c) + neg_mod(mul_mod(factor, a.get(col, c), p2), p2)) % p2;
                    a.set(r2, c, va);
                    let vi =
                        (inv.get(r2, c) + neg_mod(mul_mod(factor, inv.get(col, c), p2), p2)) % p2;
                    inv.set(r2, c, vi);
                }
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, r1: usize, r2: usize) {
        if r1 == r2 {
            return;
        }
        for c in 0..self.cols {
            self.entries.swap(r1 * self.cols + c, r2 * self.cols + c);
        }
    }

    /// Shell-friendly literal: entries joined by `,`, rows by `;`.
    pub fn to_literal(&self) -> String {
        crate::field_linalg::matrix_literal(self.rows, self.cols, |r, c| self.get(r, c))
    }

    /// Canonical byte serialization: `p`, `rows`, `cols` as little-endian
    /// `u32`, then the entries as little-endian `u64` (entries may exceed
    /// 32 bits for primes near the cap).
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + 8 * self.entries.len());
        out.extend_from_slice(&(self.p.get() as u32).to_le_bytes());
        out.extend_from_slice(&(self.rows as u32).to_le_bytes());
        out.extend_from_slice(&(self.cols as u32).to_le_bytes());
        for &e in &self.entries {
            out.extend_from_slice(&e.to_le_bytes());
        }
        out
    }
}

impl std::fmt::Display for MatrixModP2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write_matrix(f, self.rows, self.cols, |r, c| self.get(r, c))
    }
}

/// Entrywise inclusion `[0, p) ⊂ [0, p^2)`; the cheapest deterministic lift.
pub fn canonical_lift(psi: &MatrixModP) -> MatrixModP2 {
    MatrixModP2 {
        p: psi.prime(),
        rows: psi.rows(),
        cols: psi.cols(),
        entries: psi.entries().to_vec(),
    }
}

fn lift_vec(v: &[u64]) -> Vec<u64> {
    v.to_vec()
}

/// A frame together with canonical lifts of its bases to `Z/p^2`.
///
/// The kernel basis vectors `e_i` lift entrywise; the complement basis is
/// the set of standard vectors at the pivot columns of `rref(psi)`, which
/// lift to themselves. Together the `n` lifted vectors form a basis of the
/// domain module, which is what lets a map be defined by its images on
/// them and extended linearly.
#[derive(Debug, Clone)]
pub struct LiftedFrame {
    frame: KernelCokernelFrame,
    lifted_kernel: Vec<Vec<u64>>,
    lifted_complement: Vec<Vec<u64>>,
    /// Columns: lifted kernel vectors, then lifted complement vectors.
    basis_matrix: MatrixModP2,
    basis_inverse: MatrixModP2,
}

impl LiftedFrame {
    pub fn new(frame: KernelCokernelFrame) -> Self {
        let p = frame.prime();
        let n = frame.psi().cols();
        let lifted_kernel: Vec<Vec<u64>> =
            frame.kernel_basis().iter().map(|v| lift_vec(v)).collect();
        let lifted_complement: Vec<Vec<u64>> = frame
            .pivot_cols()
            .iter()
            .map(|&pc| {
                let mut v = vec![0u64; n];
                v[pc] = 1;
                v
            })
            .collect();
        let mut columns = lifted_kernel.clone();
        columns.extend(lifted_complement.iter().cloned());
        let basis_matrix = MatrixModP2::from_columns(p, n, &columns);
        let basis_inverse = basis_matrix
            .inverse()
            .expect("lifts of a basis form a basis");
        Self {
            frame,
            lifted_kernel,
            lifted_complement,
            basis_matrix,
            basis_inverse,
        }
    }

    #[inline]
    pub fn frame(&self) -> &KernelCokernelFrame {
        &self.frame
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.frame.prime()
    }

    /// Canonical lifts of the kernel basis vectors.
    #[inline]
    pub fn lifted_kernel(&self) -> &[Vec<u64>] {
        &self.lifted_kernel
    }

    /// Canonical lifts of the complement basis vectors.
    #[inline]
    pub fn lifted_complement(&self) -> &[Vec<u64>] {
        &self.lifted_complement
    }

    /// The `n x n` basis matrix (kernel lifts, then complement lifts).
    #[inline]
    pub fn basis_matrix(&self) -> &MatrixModP2 {
        &self.basis_matrix
    }

    /// Defines a map by its images on the lifted basis and extends linearly:
    /// the result sends the i-th lifted kernel vector to `kernel_images[i]`
    /// and the j-th lifted complement vector to `complement_images[j]`.
    ///
    /// # Panics
    /// Panics if the image counts or lengths do not match the frame.
    pub fn extend_linearly(
        &self,
        codomain_rows: usize,
        kernel_images: &[Vec<u64>],
        complement_images: &[Vec<u64>],
    ) -> MatrixModP2 {
        assert_eq!(kernel_images.len(), self.lifted_kernel.len());
        assert_eq!(complement_images.len(), self.lifted_complement.len());
        let mut columns = kernel_images.to_vec();
        columns.extend(complement_images.iter().cloned());
        let images = MatrixModP2::from_columns(self.prime(), codomain_rows, &columns);
        images.mul(&self.basis_inverse)
    }
}

/// The distinguished lift of `psi` that sends every lifted kernel basis
/// vector to zero and each lifted complement vector to the canonical lift
/// of its image under `psi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phi0 {
    matrix: MatrixModP2,
}

impl Phi0 {
    /// Builds `phi0` on a lifted frame.
    pub fn build(lifted: &LiftedFrame) -> Self {
        let frame = lifted.frame();
        let psi = frame.psi();
        let m = psi.rows();
        let kernel_images = vec![vec![0u64; m]; frame.kernel_dim()];
        let complement_images: Vec<Vec<u64>> = frame
            .pivot_cols()
            .iter()
            .map(|&pc| lift_vec(&psi.column(pc)))
            .collect();
        let matrix = lifted.extend_linearly(m, &kernel_images, &complement_images);
        debug_assert_eq!(matrix.reduce_mod_p(), *psi);
        Self { matrix }
    }

    #[inline]
    pub fn matrix(&self) -> &MatrixModP2 {
        &self.matrix
    }
}

/// Convenience constructor running the whole chain `psi -> frame -> lifts -> phi0`.
pub fn build_phi0(psi: &MatrixModP) -> Phi0 {
    Phi0::build(&LiftedFrame::new(KernelCokernelFrame::new(psi.clone())))
}

fn checked_count(p: Prime, cells: usize, budget: u64) -> Result<u64> {
    let required = BigUint::from(p.get()).pow(cells as u32);
    if required > BigUint::from(budget) {
        return Err(Error::BudgetExceeded { required, budget });
    }
    Ok(u64::try_from(&required).expect("bounded by budget"))
}

/// Indexed enumeration of `L0`, the matrices over `Z/p^2` that reduce to
/// zero mod `p`. Element `i` is `p * M_i`, where `M_i` is the `i`-th
/// `rows x cols` matrix over `Z/p` in lexicographic entry order, so any
/// index range can be consumed independently of the rest.
#[derive(Debug, Clone)]
pub struct L0Enumeration {
    p: Prime,
    rows: usize,
    cols: usize,
    count: u64,
}

impl L0Enumeration {
    #[inline]
    pub fn len(&self) -> u64 {
        self.count
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// The underlying `Z/p` matrix `M_i`.
    pub fn base_at(&self, index: u64) -> MatrixModP {
        assert!(index < self.count, "index {index} out of range");
        let p = self.p.get();
        let len = self.rows * self.cols;
        let mut entries = vec![0u64; len];
        let mut rem = index;
        for e in entries.iter_mut().rev() {
            *e = rem % p;
            rem /= p;
        }
        MatrixModP::new(self.p, self.rows, self.cols, entries).expect("digits are in range")
    }

    /// Element `i`, the multiple `p * M_i`.
    pub fn at(&self, index: u64) -> MatrixModP2 {
        let base = self.base_at(index);
        let p = self.p.get();
        MatrixModP2 {
            p: self.p,
            rows: self.rows,
            cols: self.cols,
            entries: base.entries().iter().map(|&e| p * e).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = MatrixModP2> + '_ {
        (0..self.count).map(|i| self.at(i))
    }
}

/// Enumerates `L0` for `rows x cols` matrices, refusing when `p^(rows*cols)`
/// exceeds the budget.
pub fn enumerate_l0(p: Prime, rows: usize, cols: usize, budget: u64) -> Result<L0Enumeration> {
    let count = checked_count(p, rows * cols, budget)?;
    Ok(L0Enumeration {
        p,
        rows,
        cols,
        count,
    })
}

/// Indexed enumeration of `L_psi = phi0 + L0`, the lifts of a fixed `psi`.
#[derive(Debug, Clone)]
pub struct LPsiEnumeration {
    base: L0Enumeration,
    phi0: MatrixModP2,
}

impl LPsiEnumeration {
    #[inline]
    pub fn len(&self) -> u64 {
        self.base.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    #[inline]
    pub fn phi0(&self) -> &MatrixModP2 {
        &self.phi0
    }

    pub fn at(&self, index: u64) -> MatrixModP2 {
        self.phi0.add(&self.base.at(index))
    }

    pub fn iter(&self) -> impl Iterator<Item = MatrixModP2> + '_ {
        (0..self.len()).map(|i| self.at(i))
    }
}

/// Enumerates all `p^(m*n)` lifts of `psi`, budget permitting.
pub fn enumerate_l_psi(psi: &MatrixModP, budget: u64) -> Result<LPsiEnumeration> {
    let base = enumerate_l0(psi.prime(), psi.rows(), psi.cols(), budget)?;
    Ok(LPsiEnumeration {
        base,
        phi0: build_phi0(psi).matrix().clone(),
    })
}

/// Enumeration of `L_psi` reusing an already-built `phi0`.
pub fn enumerate_l_psi_with(phi0: &Phi0, budget: u64) -> Result<LPsiEnumeration> {
    let m = phi0.matrix();
    let base = enumerate_l0(m.prime(), m.rows(), m.cols(), budget)?;
    Ok(LPsiEnumeration {
        base,
        phi0: m.clone(),
    })
}
