//! Exact linear algebra over the field `Z/p`.
//!
//! Matrices are dense and row-major with entries kept as canonical
//! representatives in `[0, p)`. Everything here is deterministic: pivot
//! selection scans columns left to right and picks the topmost nonzero
//! entry among unused rows, so reduced forms, kernel bases and cokernel
//! coordinates are canonical for a given input. That determinism is what
//! lets downstream code hash and count homomorphisms exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prime::{inv_mod, mul_mod, neg_mod, Prime};

/// A dense `rows x cols` matrix over `Z/p`, row-major, entries in `[0, p)`.
///
/// Empty dimensions (`rows == 0` or `cols == 0`) are legal and show up in
/// sweeps as the degenerate maps into or out of the zero space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr")]
pub struct MatrixModP {
    p: Prime,
    rows: usize,
    cols: usize,
    entries: Vec<u64>,
}

/// Wire form shared by both matrix types; deserialization re-runs the
/// constructor checks so parsed reports uphold the entry-range invariants.
#[derive(Deserialize)]
pub(crate) struct MatrixRepr {
    pub(crate) p: Prime,
    pub(crate) rows: usize,
    pub(crate) cols: usize,
    pub(crate) entries: Vec<u64>,
}

impl TryFrom<MatrixRepr> for MatrixModP {
    type Error = Error;

    fn try_from(r: MatrixRepr) -> Result<Self> {
        Self::new(r.p, r.rows, r.cols, r.entries)
    }
}

impl MatrixModP {
    /// Builds a matrix after checking the shape and the entry range.
    pub fn new(p: Prime, rows: usize, cols: usize, entries: Vec<u64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                rows,
                cols,
                expected: rows * cols,
                got: entries.len(),
            });
        }
        if let Some(&bad) = entries.iter().find(|&&e| e >= p.get()) {
            return Err(Error::EntryOutOfRange {
                value: bad,
                modulus: p.get(),
            });
        }
        Ok(Self {
            p,
            rows,
            cols,
            entries,
        })
    }

    /// The zero matrix.
    pub fn zero(p: Prime, rows: usize, cols: usize) -> Self {
        Self {
            p,
            rows,
            cols,
            entries: vec![0; rows * cols],
        }
    }

    /// The identity matrix.
    pub fn identity(p: Prime, n: usize) -> Self {
        let mut m = Self::zero(p, n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1;
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

    /// Returns column `c` as a vector of length `rows`.
    pub fn column(&self, c: usize) -> Vec<u64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    /// Entries grouped row by row, for report output.
    pub fn rows_nested(&self) -> Vec<Vec<u64>> {
        (0..self.rows)
            .map(|r| self.entries[r * self.cols..(r + 1) * self.cols].to_vec())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zero(self.p, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    /// Matrix-vector product over `Z/p`.
    ///
    /// # Panics
    /// Panics if `v.len() != self.cols()`.
    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(v.len(), self.cols, "vector length does not match columns");
        let p = self.p.get();
        (0..self.rows)
            .map(|r| {
                let row = &self.entries[r * self.cols..(r + 1) * self.cols];
                row.iter()
                    .zip(v)
                    .fold(0u64, |acc, (&a, &x)| (acc + mul_mod(a, x, p)) % p)
            })
            .collect()
    }

    /// Shell-friendly literal: entries joined by `,`, rows by `;`.
    /// Empty dimensions render as the empty string.
    pub fn to_literal(&self) -> String {
        matrix_literal(self.rows, self.cols, |r, c| self.get(r, c))
    }

    /// Canonical byte serialization: `p`, `rows`, `cols`, then the entries,
    /// each as a little-endian `u32`. Equal matrices serialize identically;
    /// this is the content that `psi` digests and census bins are keyed on.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + 4 * self.entries.len());
        out.extend_from_slice(&(self.p.get() as u32).to_le_bytes());
        out.extend_from_slice(&(self.rows as u32).to_le_bytes());
        out.extend_from_slice(&(self.cols as u32).to_le_bytes());
        for &e in &self.entries {
            out.extend_from_slice(&(e as u32).to_le_bytes());
        }
        out
    }

    /// Reduced row echelon form with its pivot data.
    pub fn rref(&self) -> RrefResult {
        let p = self.p.get();
        let mut a = self.clone();
        let mut pivot_cols = Vec::new();
        let mut pivot_row = 0;
        for col in 0..a.cols {
            if pivot_row >= a.rows {
                break;
            }
            // Topmost nonzero entry among unused rows.
            let Some(r) = (pivot_row..a.rows).find(|&r| a.get(r, col) != 0) else {
                continue;
            };
            a.swap_rows(r, pivot_row);
            let inv = inv_mod(a.get(pivot_row, col), p).expect("nonzero residue mod a prime");
            for c in col..a.cols {
                let v = mul_mod(a.get(pivot_row, c), inv, p);
                a.set(pivot_row, c, v);
            }
            for r2 in 0..a.rows {
                if r2 == pivot_row {
                    continue;
                }
                let factor = a.get(r2, col);
                if factor == 0 {
                    continue;
                }
                for c in col..a.cols {
                    let sub = mul_mod(factor, a.get(pivot_row, c), p);
                    let v = (a.get(r2, c) + neg_mod(sub, p)) % p;
                    a.set(r2, c, v);
                }
            }
            pivot_cols.push(col);
            pivot_row += 1;
        }
        RrefResult {
            rank: pivot_cols.len(),
            rref: a,
            pivot_cols,
        }
    }

    fn swap_rows(&mut self, r1: usize, r2: usize) {
        if r1 == r2 {
            return;
        }
        for c in 0..self.cols {
            self.entries.swap(r1 * self.cols + c, r2 * self.cols + c);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank
    }

    /// Canonical basis of the kernel, one vector per free column of the
    /// reduced row echelon form.
    ///
    /// For a free column `c` the basis vector has a `1` at position `c`,
    /// the negated rref column entries at the pivot positions, and zeros
    /// elsewhere. Vectors are ordered by ascending free column, and the
    /// `k x k` submatrix at free-column rows is the identity, so the basis
    /// is unique for a given input.
    pub fn kernel_basis(&self) -> Vec<Vec<u64>> {
        let RrefResult {
            rref, pivot_cols, ..
        } = self.rref();
        kernel_basis_from_rref(&rref, &pivot_cols)
    }
}

impl std::fmt::Display for MatrixModP {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write_matrix(f, self.rows, self.cols, |r, c| self.get(r, c))
    }
}

pub(crate) fn matrix_literal(
    rows: usize,
    cols: usize,
    get: impl Fn(usize, usize) -> u64,
) -> String {
    if rows == 0 || cols == 0 {
        return String::new();
    }
    (0..rows)
        .map(|r| {
            (0..cols)
                .map(|c| get(r, c).to_string())
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect::<Vec<_>>()
        .join(";")
}

pub(crate) fn write_matrix(
    f: &mut std::fmt::Formatter<'_>,
    rows: usize,
    cols: usize,
    get: impl Fn(usize, usize) -> u64,
) -> std::fmt::Result {
    if rows == 0 || cols == 0 {
        return writeln!(f, "[{}x{}]", rows, cols);
    }
    let width = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .map(|(r, c)| get(r, c).to_string().len())
        .max()
        .unwrap_or(1);
    for r in 0..rows {
        write!(f, "[")?;
        for c in 0..cols {
            if c > 0 {
                write!(f, " ")?;
            }
            write!(f, "{:>width$}", get(r, c))?;
        }
        writeln!(f, "]")?;
    }
    Ok(())
}

fn kernel_basis_from_rref(rref: &MatrixModP, pivot_cols: &[usize]) -> Vec<Vec<u64>> {
    let p = rref.prime().get();
    let n = rref.cols();
    let mut is_pivot = vec![false; n];
    for &pc in pivot_cols {
        is_pivot[pc] = true;
    }
    let mut basis = Vec::with_capacity(n - pivot_cols.len());
    for c in (0..n).filter(|&c| !is_pivot[c]) {
        let mut v = vec![0u64; n];
        v[c] = 1;
        for (r, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = neg_mod(rref.get(r, c), p);
        }
        basis.push(v);
    }
    basis
}

/// Reduced row echelon form of a matrix together with its pivot data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RrefResult {
    pub rref: MatrixModP,
    /// Ascending column indices of the pivots, one per nonzero row.
    pub pivot_cols: Vec<usize>,
    pub rank: usize,
}

/// A basis of the image of `psi` in reduced column echelon form.
///
/// `basis[j]` is a column vector of length `rows(psi)` whose leading entry
/// sits at `pivot_rows[j]` and equals 1; every basis vector has zeros at
/// all other pivot rows. That shape makes reduction against the image a
/// single coefficient read per pivot row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageEchelon {
    pub basis: Vec<Vec<u64>>,
    /// Ascending row indices of the leading entries.
    pub pivot_rows: Vec<usize>,
}

/// Canonical coordinates for `ker psi` and `coker psi`, derived
/// deterministically from `psi` alone.
///
/// The kernel carries the free-column basis of [`MatrixModP::kernel_basis`];
/// the cokernel is coordinatized by the rows *not* hit by the image's
/// column echelon pivots, which splits the codomain as
/// `image ⊕ (coordinate subspace at coker_rows)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelCokernelFrame {
    psi: MatrixModP,
    kernel_basis: Vec<Vec<u64>>,
    /// Pivot columns of `rref(psi)`; the complement basis lives here.
    pivot_cols: Vec<usize>,
    /// Free columns of `rref(psi)`; positions of the kernel basis.
    free_cols: Vec<usize>,
    image_echelon: ImageEchelon,
    /// Ascending non-pivot rows of the image echelon; the cokernel coordinates.
    coker_rows: Vec<usize>,
}

impl KernelCokernelFrame {
    pub fn new(psi: MatrixModP) -> Self {
        let RrefResult {
            rref, pivot_cols, ..
        } = psi.rref();
        let kernel_basis = kernel_basis_from_rref(&rref, &pivot_cols);
        let mut is_pivot = vec![false; psi.cols()];
        for &pc in &pivot_cols {
            is_pivot[pc] = true;
        }
        let free_cols = (0..psi.cols()).filter(|&c| !is_pivot[c]).collect();

        // Column echelon form of psi = transposed rref of psi^T. Because the
        // row reduction is fully reduced, each image basis vector is 1 at its
        // own pivot row and 0 at every other pivot row.
        let t = psi.transpose().rref();
        let basis: Vec<Vec<u64>> = (0..t.rank)
            .map(|r| t.rref.entries()[r * psi.rows()..(r + 1) * psi.rows()].to_vec())
            .collect();
        let pivot_rows = t.pivot_cols.clone();
        let mut hit = vec![false; psi.rows()];
        for &pr in &pivot_rows {
            hit[pr] = true;
        }
        let coker_rows = (0..psi.rows()).filter(|&r| !hit[r]).collect();

        Self {
            psi,
            kernel_basis,
            pivot_cols,
            free_cols,
            image_echelon: ImageEchelon { basis, pivot_rows },
            coker_rows,
        }
    }

    #[inline]
    pub fn psi(&self) -> &MatrixModP {
        &self.psi
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.psi.prime()
    }

    /// `k`, the kernel dimension.
    #[inline]
    pub fn kernel_dim(&self) -> usize {
        self.kernel_basis.len()
    }

    /// `m - n + k`, the cokernel dimension.
    #[inline]
    pub fn coker_dim(&self) -> usize {
        self.coker_rows.len()
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.pivot_cols.len()
    }

    #[inline]
    pub fn kernel_basis(&self) -> &[Vec<u64>] {
        &self.kernel_basis
    }

    #[inline]
    pub fn pivot_cols(&self) -> &[usize] {
        &self.pivot_cols
    }

    #[inline]
    pub fn free_cols(&self) -> &[usize] {
        &self.free_cols
    }

    #[inline]
    pub fn coker_rows(&self) -> &[usize] {
        &self.coker_rows
    }

    #[inline]
    pub fn image_echelon(&self) -> &ImageEchelon {
        &self.image_echelon
    }

    /// Projects a vector of the codomain onto the cokernel coordinates.
    ///
    /// Subtracts image echelon columns to zero out every pivot-row entry,
    /// then reads the remaining entries at `coker_rows` in order. The
    /// result is zero exactly when `w` lies in the image of `psi`, and the
    /// map is linear in `w`.
    pub fn coker_project(&self, w: &[u64]) -> Result<Vec<u64>> {
        if w.len() != self.psi.rows() {
            return Err(Error::DimensionMismatch(format!(
                "cokernel projection expects a vector of length {}, got {}",
                self.psi.rows(),
                w.len()
            )));
        }
        let p = self.prime().get();
        if let Some(&bad) = w.iter().find(|&&x| x >= p) {
            return Err(Error::EntryOutOfRange {
                value: bad,
                modulus: p,
            });
        }
        let mut reduced = w.to_vec();
        for (j, &pr) in self.image_echelon.pivot_rows.iter().enumerate() {
            let coeff = reduced[pr];
            if coeff == 0 {
                continue;
            }
            for (x, &b) in reduced.iter_mut().zip(&self.image_echelon.basis[j]) {
                *x = (*x + neg_mod(mul_mod(coeff, b, p), p)) % p;
            }
        }
        Ok(self.coker_rows.iter().map(|&r| reduced[r]).collect())
    }
}
