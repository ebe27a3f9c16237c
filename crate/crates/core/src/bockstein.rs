//! The connecting-map construction: from a lift `phi` of `psi` to the
//! homomorphism `beta: ker psi -> coker psi`, and back.
//!
//! For a kernel basis vector `e` with lift `e~`, the image `phi(e~)` reduces
//! to `psi(e) = 0`, so every entry is divisible by `p`. Dividing by `p` and
//! projecting onto the cokernel coordinates yields one column of `beta`.
//! The resulting matrix does not depend on which lifts were chosen; the
//! canonical frame makes it a concrete, hashable `c x k` matrix over `Z/p`.
//!
//! Going the other way, any prescribed `beta` is realized by some lift of
//! `psi`: send each lifted kernel vector to `p` times a representative of
//! its prescribed cokernel class and each complement vector to the
//! canonical lift of its image under `psi`.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field_linalg::{write_matrix, KernelCokernelFrame, MatrixModP};
use crate::module_linalg::{LiftedFrame, MatrixModP2, Phi0};
use crate::prime::{mul_mod, Prime};

/// SHA-256 of a matrix's canonical bytes; binds a Bockstein matrix to the
/// `psi` whose frame coordinates it is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PsiDigest([u8; 32]);

impl PsiDigest {
    pub fn of(psi: &MatrixModP) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(psi.canonical_bytes());
        Self(hasher.finalize().into())
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let bytes = hex::decode(s)
            .map_err(|_| Error::DimensionMismatch(format!("invalid digest hex: {s}")))?;
        let arr: [u8; 32] = bytes
            .try_into()
            .map_err(|_| Error::DimensionMismatch("digest must be 32 bytes".into()))?;
        Ok(Self(arr))
    }
}

impl std::fmt::Display for PsiDigest {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for PsiDigest {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for PsiDigest {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Self::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// A homomorphism `ker psi -> coker psi` as a `c x k` matrix over `Z/p` in
/// frame coordinates, bound to its `psi` by digest.
///
/// Column `i` is the image of the i-th canonical kernel basis vector in
/// cokernel coordinates. The canonical byte serialization is `p`, `c`, `k`
/// as little-endian `u32` followed by the entries row-major as little-endian
/// `u32`; equal homomorphisms serialize identically, which is what census
/// keys and regression hashes rely on.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "BocksteinRepr", into = "BocksteinRepr")]
pub struct BocksteinMatrix {
    p: Prime,
    /// Cokernel dimension `c = m - n + k`; the number of rows.
    coker_dim: usize,
    /// Kernel dimension `k`; the number of columns.
    kernel_dim: usize,
    entries: Vec<u64>,
    psi_digest: PsiDigest,
}

#[derive(Serialize, Deserialize)]
struct BocksteinRepr {
    p: Prime,
    c: usize,
    k: usize,
    entries: Vec<Vec<u64>>,
    psi_digest: PsiDigest,
}

impl From<BocksteinMatrix> for BocksteinRepr {
    fn from(b: BocksteinMatrix) -> Self {
        Self {
            p: b.p,
            c: b.coker_dim,
            k: b.kernel_dim,
            entries: b.rows_nested(),
            psi_digest: b.psi_digest,
        }
    }
}

impl TryFrom<BocksteinRepr> for BocksteinMatrix {
    type Error = Error;

    fn try_from(r: BocksteinRepr) -> Result<Self> {
        if r.entries.len() != r.c || r.entries.iter().any(|row| row.len() != r.k) {
            return Err(Error::ShapeMismatch {
                rows: r.c,
                cols: r.k,
                expected: r.c * r.k,
                got: r.entries.iter().map(Vec::len).sum(),
            });
        }
        let flat: Vec<u64> = r.entries.into_iter().flatten().collect();
        if let Some(&bad) = flat.iter().find(|&&e| e >= r.p.get()) {
            return Err(Error::EntryOutOfRange {
                value: bad,
                modulus: r.p.get(),
            });
        }
        Ok(Self {
            p: r.p,
            coker_dim: r.c,
            kernel_dim: r.k,
            entries: flat,
            psi_digest: r.psi_digest,
        })
    }
}

impl BocksteinMatrix {
    fn from_columns(
        p: Prime,
        coker_dim: usize,
        kernel_dim: usize,
        columns: &[Vec<u64>],
        psi_digest: PsiDigest,
    ) -> Self {
        debug_assert_eq!(columns.len(), kernel_dim);
        let mut entries = vec![0u64; coker_dim * kernel_dim];
        for (i, col) in columns.iter().enumerate() {
            debug_assert_eq!(col.len(), coker_dim);
            for (r, &v) in col.iter().enumerate() {
                entries[r * kernel_dim + i] = v;
            }
        }
        Self {
            p,
            coker_dim,
            kernel_dim,
            entries,
            psi_digest,
        }
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.p
    }

    /// `c`, the cokernel dimension (rows).
    #[inline]
    pub fn coker_dim(&self) -> usize {
        self.coker_dim
    }

    /// `k`, the kernel dimension (columns).
    #[inline]
    pub fn kernel_dim(&self) -> usize {
        self.kernel_dim
    }

    #[inline]
    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.entries[r * self.kernel_dim + c]
    }

    #[inline]
    pub fn psi_digest(&self) -> PsiDigest {
        self.psi_digest
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    pub fn rows_nested(&self) -> Vec<Vec<u64>> {
        (0..self.coker_dim)
            .map(|r| self.entries[r * self.kernel_dim..(r + 1) * self.kernel_dim].to_vec())
            .collect()
    }

    /// Shell-friendly literal: entries joined by `,`, rows by `;`.
    pub fn to_literal(&self) -> String {
        crate::field_linalg::matrix_literal(self.coker_dim, self.kernel_dim, |r, c| self.get(r, c))
    }

    /// Canonical bit-exact serialization; see the type docs for the layout.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + 4 * self.entries.len());
        out.extend_from_slice(&(self.p.get() as u32).to_le_bytes());
        out.extend_from_slice(&(self.coker_dim as u32).to_le_bytes());
        out.extend_from_slice(&(self.kernel_dim as u32).to_le_bytes());
        for &e in &self.entries {
            out.extend_from_slice(&(e as u32).to_le_bytes());
        }
        out
    }

    /// Entrywise sum in the hom-space. Both operands must be bound to the
    /// same `psi`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.psi_digest != other.psi_digest {
            return Err(Error::DigestMismatch);
        }
        assert_eq!(
            (self.coker_dim, self.kernel_dim),
            (other.coker_dim, other.kernel_dim)
        );
        let p = self.p.get();
        Ok(Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| (a + b) % p)
                .collect(),
            ..self.clone()
        })
    }

    /// Entrywise scalar multiple by `alpha mod p`.
    pub fn scale(&self, alpha: u64) -> Self {
        let p = self.p.get();
        Self {
            entries: self
                .entries
                .iter()
                .map(|&a| mul_mod(alpha % p, a, p))
                .collect(),
            ..self.clone()
        }
    }
}

impl std::fmt::Display for BocksteinMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write_matrix(f, self.coker_dim, self.kernel_dim, |r, c| self.get(r, c))
    }
}

/// Everything needed to evaluate the connecting map for one fixed `psi`:
/// the frame, the lifted bases, and the distinguished lift `phi0`. Derived
/// deterministically from `psi`, immutable afterwards, and freely shareable
/// across threads.
#[derive(Debug, Clone)]
pub struct GammaContext {
    lifted: LiftedFrame,
    phi0: Phi0,
    digest: PsiDigest,
}

impl GammaContext {
    pub fn new(psi: MatrixModP) -> Self {
        let digest = PsiDigest::of(&psi);
        let lifted = LiftedFrame::new(KernelCokernelFrame::new(psi));
        let phi0 = Phi0::build(&lifted);
        Self {
            lifted,
            phi0,
            digest,
        }
    }

    #[inline]
    pub fn psi(&self) -> &MatrixModP {
        self.lifted.frame().psi()
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.psi().prime()
    }

    #[inline]
    pub fn frame(&self) -> &KernelCokernelFrame {
        self.lifted.frame()
    }

    #[inline]
    pub fn lifted(&self) -> &LiftedFrame {
        &self.lifted
    }

    #[inline]
    pub fn phi0(&self) -> &Phi0 {
        &self.phi0
    }

    #[inline]
    pub fn psi_digest(&self) -> PsiDigest {
        self.digest
    }

    #[inline]
    pub fn kernel_dim(&self) -> usize {
        self.frame().kernel_dim()
    }

    #[inline]
    pub fn coker_dim(&self) -> usize {
        self.frame().coker_dim()
    }

    /// `p^(m*n)`, the number of lifts of `psi`.
    pub fn lift_count(&self) -> BigUint {
        let cells = self.psi().rows() * self.psi().cols();
        BigUint::from(self.prime().get()).pow(cells as u32)
    }

    /// `p^(k*c)`, the size of the hom-space `Hom(ker psi, coker psi)`.
    pub fn hom_size(&self) -> BigUint {
        BigUint::from(self.prime().get()).pow((self.kernel_dim() * self.coker_dim()) as u32)
    }

    /// `p^((m+k)(n-k))`, the number of lifts inducing any one homomorphism.
    pub fn fiber_size(&self) -> BigUint {
        let (m, n, k) = (self.psi().rows(), self.psi().cols(), self.kernel_dim());
        BigUint::from(self.prime().get()).pow(((m + k) * (n - k)) as u32)
    }

    /// The zero homomorphism of this context's hom-space.
    pub fn zero_bockstein(&self) -> BocksteinMatrix {
        BocksteinMatrix {
            p: self.prime(),
            coker_dim: self.coker_dim(),
            kernel_dim: self.kernel_dim(),
            entries: vec![0; self.coker_dim() * self.kernel_dim()],
            psi_digest: self.digest,
        }
    }

    fn check_shape(&self, phi: &MatrixModP2) -> Result<()> {
        let psi = self.psi();
        if phi.rows() != psi.rows() || phi.cols() != psi.cols() || phi.prime() != psi.prime() {
            return Err(Error::DimensionMismatch(format!(
                "expected a {}x{} matrix mod {}^2",
                psi.rows(),
                psi.cols(),
                psi.prime()
            )));
        }
        Ok(())
    }
}

fn column_from_lift(
    ctx: &GammaContext,
    phi: &MatrixModP2,
    kernel_lift: &[u64],
) -> Result<Vec<u64>> {
    let p = ctx.prime().get();
    let image = phi.mul_vec(kernel_lift);
    let quotient: Vec<u64> = image
        .iter()
        .map(|&x| {
            // Guaranteed by phi reducing to psi and the lift reducing into
            // the kernel; a failure here is a frame bug, not bad input.
            assert!(x % p == 0, "connecting map image not divisible by p");
            x / p
        })
        .collect();
    ctx.frame().coker_project(&quotient)
}

/// Evaluates the connecting map on a lift: `phi` must reduce to the
/// context's `psi`. Column `i` of the result is the cokernel class of
/// `phi(e~_i) / p`.
pub fn bockstein_of(ctx: &GammaContext, phi: &MatrixModP2) -> Result<BocksteinMatrix> {
    ctx.check_shape(phi)?;
    if phi.reduce_mod_p() != *ctx.psi() {
        return Err(Error::ReductionMismatch);
    }
    let columns = ctx
        .lifted
        .lifted_kernel()
        .iter()
        .map(|e| column_from_lift(ctx, phi, e))
        .collect::<Result<Vec<_>>>()?;
    Ok(BocksteinMatrix::from_columns(
        ctx.prime(),
        ctx.coker_dim(),
        ctx.kernel_dim(),
        &columns,
        ctx.digest,
    ))
}

/// Same as [`bockstein_of`] but using caller-supplied kernel lifts, one per
/// canonical kernel basis vector and each reducing to it. The result is
/// provably independent of that choice; this entry point exists so the
/// well-definedness can be exercised directly.
pub fn bockstein_of_with_kernel_lifts(
    ctx: &GammaContext,
    phi: &MatrixModP2,
    kernel_lifts: &[Vec<u64>],
) -> Result<BocksteinMatrix> {
    ctx.check_shape(phi)?;
    if phi.reduce_mod_p() != *ctx.psi() {
        return Err(Error::ReductionMismatch);
    }
    if kernel_lifts.len() != ctx.kernel_dim() {
        return Err(Error::DimensionMismatch(format!(
            "expected {} kernel lifts, got {}",
            ctx.kernel_dim(),
            kernel_lifts.len()
        )));
    }
    let p = ctx.prime().get();
    for (lift, canonical) in kernel_lifts.iter().zip(ctx.frame().kernel_basis()) {
        if lift.len() != canonical.len() || lift.iter().zip(canonical).any(|(&l, &c)| l % p != c) {
            return Err(Error::ReductionMismatch);
        }
    }
    let columns = kernel_lifts
        .iter()
        .map(|e| column_from_lift(ctx, phi, e))
        .collect::<Result<Vec<_>>>()?;
    Ok(BocksteinMatrix::from_columns(
        ctx.prime(),
        ctx.coker_dim(),
        ctx.kernel_dim(),
        &columns,
        ctx.digest,
    ))
}

/// Produces a lift of `psi` inducing the prescribed homomorphism: a
/// deterministic right inverse of [`bockstein_of`].
///
/// The i-th lifted kernel vector is sent to `p * w_i`, where `w_i` carries
/// the i-th column of `beta` at the cokernel coordinate rows and zeros at
/// the image pivot rows; the complement vectors are sent to the canonical
/// lifts of their images under `psi`.
pub fn construct_phi_for(ctx: &GammaContext, beta: &BocksteinMatrix) -> Result<MatrixModP2> {
    if beta.psi_digest != ctx.digest {
        return Err(Error::DigestMismatch);
    }
    if beta.kernel_dim != ctx.kernel_dim()
        || beta.coker_dim != ctx.coker_dim()
        || beta.p != ctx.prime()
    {
        return Err(Error::DimensionMismatch(format!(
            "expected a {}x{} Bockstein matrix mod {}",
            ctx.coker_dim(),
            ctx.kernel_dim(),
            ctx.prime()
        )));
    }
    let psi = ctx.psi();
    let (p, m) = (ctx.prime().get(), psi.rows());
    let kernel_images: Vec<Vec<u64>> = (0..beta.kernel_dim)
        .map(|i| {
            let mut w = vec![0u64; m];
            for (idx, &row) in ctx.frame().coker_rows().iter().enumerate() {
                w[row] = p * beta.get(idx, i);
            }
            w
        })
        .collect();
    let complement_images: Vec<Vec<u64>> = ctx
        .frame()
        .pivot_cols()
        .iter()
        .map(|&pc| psi.column(pc))
        .collect();
    Ok(ctx
        .lifted
        .extend_linearly(m, &kernel_images, &complement_images))
}

/// The connecting map precomposed with translation by `phi0`: defined on
/// matrices reducing to zero, and linear over `Z/p`.
pub fn b_map(ctx: &GammaContext, phi_in_l0: &MatrixModP2) -> Result<BocksteinMatrix> {
    ctx.check_shape(phi_in_l0)?;
    if !phi_in_l0.reduce_mod_p().is_zero() {
        return Err(Error::NonzeroReduction);
    }
    bockstein_of(ctx, &phi_in_l0.add(ctx.phi0.matrix()))
}

/// Indexed enumeration of the full hom-space `Hom(ker psi, coker psi)` of
/// a context, in lexicographic entry order.
#[derive(Debug, Clone)]
pub struct HomEnumeration {
    p: Prime,
    coker_dim: usize,
    kernel_dim: usize,
    digest: PsiDigest,
    count: u64,
}

impl HomEnumeration {
    #[inline]
    pub fn len(&self) -> u64 {
        self.count
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn at(&self, index: u64) -> BocksteinMatrix {
        assert!(index < self.count, "index {index} out of range");
        let p = self.p.get();
        let mut entries = vec![0u64; self.coker_dim * self.kernel_dim];
        let mut rem = index;
        for e in entries.iter_mut().rev() {
            *e = rem % p;
            rem /= p;
        }
        BocksteinMatrix {
            p: self.p,
            coker_dim: self.coker_dim,
            kernel_dim: self.kernel_dim,
            entries,
            psi_digest: self.digest,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = BocksteinMatrix> + '_ {
        (0..self.count).map(|i| self.at(i))
    }
}

/// Enumerates every homomorphism in the context's hom-space, refusing when
/// `p^(k*c)` exceeds the budget.
pub fn enumerate_hom(ctx: &GammaContext, budget: u64) -> Result<HomEnumeration> {
    let required = ctx.hom_size();
    if required > BigUint::from(budget) {
        return Err(Error::BudgetExceeded { required, budget });
    }
    Ok(HomEnumeration {
        p: ctx.prime(),
        coker_dim: ctx.coker_dim(),
        kernel_dim: ctx.kernel_dim(),
        digest: ctx.digest,
        count: u64::try_from(&ctx.hom_size()).expect("bounded by budget"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module_linalg::{canonical_lift, enumerate_l_psi};

    fn prime(p: u64) -> Prime {
        Prime::new(p).unwrap()
    }

    fn mat_p(p: u64, rows: usize, cols: usize, entries: &[u64]) -> MatrixModP {
        MatrixModP::new(prime(p), rows, cols, entries.to_vec()).unwrap()
    }

    fn mat_p2(p: u64, rows: usize, cols: usize, entries: &[u64]) -> MatrixModP2 {
        MatrixModP2::new(prime(p), rows, cols, entries.to_vec()).unwrap()
    }

    #[test]
    fn scalar_two_mod_four_gives_one() {
        let ctx = GammaContext::new(mat_p(2, 1, 1, &[0]));
        let beta = bockstein_of(&ctx, &mat_p2(2, 1, 1, &[2])).unwrap();
        assert_eq!(beta.entries(), &[1]);
        assert_eq!((beta.coker_dim(), beta.kernel_dim()), (1, 1));
        // Oracle: the other lift of the kernel generator gives the same class.
        let other =
            bockstein_of_with_kernel_lifts(&ctx, &mat_p2(2, 1, 1, &[2]), &[vec![3]]).unwrap();
        assert_eq!(other, beta);
    }

    #[test]
    fn zero_map_has_zero_bockstein() {
        let ctx = GammaContext::new(mat_p(2, 1, 1, &[0]));
        let beta = bockstein_of(&ctx, &mat_p2(2, 1, 1, &[0])).unwrap();
        assert!(beta.is_zero());
    }

    #[test]
    fn invertible_psi_has_empty_hom_space() {
        let ctx = GammaContext::new(mat_p(2, 1, 1, &[1]));
        let beta = bockstein_of(&ctx, &mat_p2(2, 1, 1, &[1])).unwrap();
        assert_eq!((beta.coker_dim(), beta.kernel_dim()), (0, 0));
        assert!(beta.entries().is_empty());
    }

    #[test]
    fn rejects_maps_outside_l_psi() {
        let ctx = GammaContext::new(mat_p(2, 1, 1, &[0]));
        assert!(matches!(
            bockstein_of(&ctx, &mat_p2(2, 1, 1, &[1])),
            Err(Error::ReductionMismatch)
        ));
        assert!(matches!(
            bockstein_of(&ctx, &mat_p2(2, 2, 1, &[0, 0])),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn construct_of_zero_is_phi0() {
        for psi in [
            mat_p(2, 2, 2, &[1, 0, 0, 0]),
            mat_p(3, 2, 2, &[1, 2, 2, 1]),
            MatrixModP::zero(prime(2), 2, 2),
        ] {
            let ctx = GammaContext::new(psi);
            let phi = construct_phi_for(&ctx, &ctx.zero_bockstein()).unwrap();
            assert_eq!(&phi, ctx.phi0().matrix());
        }
    }

    #[test]
    fn construct_realizes_the_unique_lift() {
        // L_psi for psi = [0] over Z/4 is {[0], [2]}; only [2] induces [1].
        let ctx = GammaContext::new(mat_p(2, 1, 1, &[0]));
        let hom = enumerate_hom(&ctx, 1 << 24).unwrap();
        let beta = hom.at(1);
        assert_eq!(beta.entries(), &[1]);
        let phi = construct_phi_for(&ctx, &beta).unwrap();
        assert_eq!(phi, mat_p2(2, 1, 1, &[2]));
        let matches: Vec<_> = enumerate_l_psi(ctx.psi(), 1 << 24)
            .unwrap()
            .iter()
            .filter(|cand| bockstein_of(&ctx, cand).unwrap() == beta)
            .collect();
        assert_eq!(matches, vec![phi]);
    }

    #[test]
    fn round_trip_on_every_hom_small() {
        let ctx = GammaContext::new(mat_p(2, 2, 2, &[1, 0, 0, 0]));
        let hom = enumerate_hom(&ctx, 1 << 24).unwrap();
        assert_eq!(hom.len(), 2);
        for beta in hom.iter() {
            let phi = construct_phi_for(&ctx, &beta).unwrap();
            assert_eq!(phi.reduce_mod_p(), *ctx.psi());
            assert_eq!(bockstein_of(&ctx, &phi).unwrap(), beta);
        }
    }

    #[test]
    fn b_map_of_zero_is_zero() {
        let ctx = GammaContext::new(mat_p(2, 2, 2, &[1, 0, 0, 0]));
        let beta = b_map(&ctx, &MatrixModP2::zero(prime(2), 2, 2)).unwrap();
        assert!(beta.is_zero());
    }

    #[test]
    fn b_map_traces_a_unit() {
        // x = p * (unit at (1,1)): its class lands on the single cokernel coordinate.
        let ctx = GammaContext::new(mat_p(2, 2, 2, &[1, 0, 0, 0]));
        let x = mat_p2(2, 2, 2, &[0, 0, 0, 2]);
        let beta = b_map(&ctx, &x).unwrap();
        assert_eq!(beta.entries(), &[1]);
    }

    #[test]
    fn b_map_rejects_nonzero_reduction() {
        let ctx = GammaContext::new(mat_p(2, 2, 2, &[1, 0, 0, 0]));
        assert!(matches!(
            b_map(&ctx, &mat_p2(2, 2, 2, &[1, 0, 0, 0])),
            Err(Error::NonzeroReduction)
        ));
    }

    #[test]
    fn b_map_is_additive_on_a_small_case() {
        let ctx = GammaContext::new(mat_p(2, 2, 2, &[1, 0, 0, 0]));
        let x = mat_p2(2, 2, 2, &[0, 2, 0, 0]);
        let y = mat_p2(2, 2, 2, &[0, 0, 0, 2]);
        let lhs = b_map(&ctx, &x.add(&y)).unwrap();
        let rhs = b_map(&ctx, &x)
            .unwrap()
            .add(&b_map(&ctx, &y).unwrap())
            .unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn serialization_is_deterministic() {
        let ctx = GammaContext::new(mat_p(3, 2, 2, &[1, 2, 2, 1]));
        let phi = canonical_lift(ctx.psi());
        let a = bockstein_of(&ctx, &phi).unwrap();
        let b = bockstein_of(&GammaContext::new(ctx.psi().clone()), &phi).unwrap();
        assert_eq!(a.canonical_bytes(), b.canonical_bytes());
    }

    #[test]
    fn add_rejects_foreign_digests() {
        let a = GammaContext::new(mat_p(2, 1, 1, &[0]));
        let b = GammaContext::new(MatrixModP::zero(prime(2), 1, 2));
        // Both hom-spaces are 1x1, but they belong to different psi.
        let x = bockstein_of(&a, &mat_p2(2, 1, 1, &[2])).unwrap();
        let y = bockstein_of(&b, &mat_p2(2, 1, 2, &[2, 0])).unwrap();
        assert!(matches!(x.add(&y), Err(Error::DigestMismatch)));
    }

    #[test]
    fn json_round_trip() {
        let ctx = GammaContext::new(mat_p(2, 2, 2, &[1, 0, 0, 0]));
        let beta = bockstein_of(&ctx, &mat_p2(2, 2, 2, &[1, 0, 0, 2])).unwrap();
        let json = serde_json::to_string(&beta).unwrap();
        let back: BocksteinMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(back, beta);
    }
}
