//! Counting laws, exhaustive fiber censuses, and randomized uniformity
//! checks for the connecting map.
//!
//! Three exact counts govern a fixed `psi` with kernel dimension `k`:
//! the coset of lifts has `p^(m*n)` elements, the hom-space has
//! `p^(k*(m-n+k))`, and every fiber of the connecting map has
//! `p^((m+k)*(n-k))`. The product of the last two equals the first, which
//! [`CountReport`] asserts. The census enumerates the coset and tallies
//! every induced homomorphism by its canonical serialization; the samplers
//! draw lifts uniformly (conditionally via the coset bijection, jointly by
//! drawing raw matrices mod `p^2`) and score the observed table with a
//! Pearson chi-square.
//!
//! Censuses and samplers run range-partitioned under rayon; partial tables
//! merge by keyed addition, so reports are identical however the work was
//! split.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bockstein::{bockstein_of, BocksteinMatrix, GammaContext};
use crate::error::{Error, Result};
use crate::field_linalg::MatrixModP;
use crate::module_linalg::{enumerate_l_psi_with, MatrixModP2};
use crate::prime::Prime;
use crate::stats::chi_square_uniform;

/// Deterministic sampling streams.
///
/// Every randomized routine draws from ChaCha8 keyed by a single 64-bit
/// seed, with the trial index as the stream id. Streams are independent by
/// construction, so a report is a pure function of `(seed, trials)` no
/// matter how trials are partitioned across threads.
pub mod rng {
    use super::{ChaCha8Rng, RngCore, SeedableRng};

    /// The generator for one trial: seed selects the key, trial the stream.
    pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        rng
    }

    /// An unbiased residue in `[0, modulus)` by rejection on `next_u64`.
    pub fn uniform_residue(rng: &mut ChaCha8Rng, modulus: u64) -> u64 {
        debug_assert!(modulus > 0);
        // 2^64 mod modulus; draws at or above 2^64 - rem would bias the tail.
        let rem = (u64::MAX % modulus + 1) % modulus;
        loop {
            let x = rng.next_u64();
            if rem == 0 || x <= u64::MAX - rem {
                return x % modulus;
            }
        }
    }
}

mod biguint_decimal {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn pow_big(p: Prime, exp: usize) -> Result<BigUint> {
    let exp = u32::try_from(exp)
        .map_err(|_| Error::DimensionMismatch(format!("exponent {exp} too large")))?;
    Ok(BigUint::from(p.get()).pow(exp))
}

/// The closed-form counts for a `m x n` map over `Z/p` with kernel
/// dimension `k`, all exact big integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountReport {
    pub p: Prime,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    /// `p^(m*n)`: the number of lifts of any such `psi`.
    #[serde(with = "biguint_decimal")]
    pub size_l_psi: BigUint,
    /// `p^(k*(m-n+k))`: the size of the hom-space.
    #[serde(with = "biguint_decimal")]
    pub hom_size: BigUint,
    /// `p^((m+k)*(n-k))`: the number of lifts inducing any one homomorphism.
    #[serde(with = "biguint_decimal")]
    pub fiber_size: BigUint,
    /// Exact rational `1 / hom_size`: the conditional probability of each
    /// homomorphism given the reduction.
    pub theorem_probability: String,
}

/// Computes the closed-form counts, rejecting infeasible kernel dimensions
/// (`k` must satisfy `n - k <= m` and `k <= n`).
pub fn count_report(p: Prime, m: usize, n: usize, k: usize) -> Result<CountReport> {
    if k > n || n - k > m {
        return Err(Error::InfeasibleKernelDim { k, m, n });
    }
    let too_big = || Error::DimensionMismatch(format!("dimensions {m}x{n} too large to count"));
    let m_plus_k = m.checked_add(k).ok_or_else(too_big)?;
    let size_l_psi = pow_big(p, m.checked_mul(n).ok_or_else(too_big)?)?;
    let hom_size = pow_big(p, k.checked_mul(m_plus_k - n).ok_or_else(too_big)?)?;
    let fiber_size = pow_big(p, m_plus_k.checked_mul(n - k).ok_or_else(too_big)?)?;
    // m*n = k*(m-n+k) + (m+k)*(n-k), so the two factors tile the coset.
    assert_eq!(size_l_psi, &hom_size * &fiber_size);
    let theorem_probability = format!("1/{hom_size}");
    Ok(CountReport {
        p,
        m,
        n,
        k,
        size_l_psi,
        hom_size,
        fiber_size,
        theorem_probability,
    })
}

fn merge_counts(
    mut a: BTreeMap<BocksteinMatrix, u64>,
    b: BTreeMap<BocksteinMatrix, u64>,
) -> BTreeMap<BocksteinMatrix, u64> {
    for (key, v) in b {
        *a.entry(key).or_insert(0) += v;
    }
    a
}

/// Exact occurrence counts of every homomorphism over the full coset of
/// lifts of one `psi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberCensus {
    psi: MatrixModP,
    kernel_dim: usize,
    coker_dim: usize,
    counts: BTreeMap<BocksteinMatrix, u64>,
    total: u64,
}

impl FiberCensus {
    #[inline]
    pub fn psi(&self) -> &MatrixModP {
        &self.psi
    }

    #[inline]
    pub fn kernel_dim(&self) -> usize {
        self.kernel_dim
    }

    #[inline]
    pub fn coker_dim(&self) -> usize {
        self.coker_dim
    }

    #[inline]
    pub fn counts(&self) -> &BTreeMap<BocksteinMatrix, u64> {
        &self.counts
    }

    #[inline]
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Checks the census against the closed-form predictions.
    pub fn verify(&self) -> CensusCheck {
        let predicted = count_report(
            self.psi.prime(),
            self.psi.rows(),
            self.psi.cols(),
            self.kernel_dim,
        )
        .expect("dimensions come from an actual psi");
        let total_ok = BigUint::from(self.total) == predicted.size_l_psi;
        let fiber_sizes_ok = self
            .counts
            .values()
            .all(|&c| BigUint::from(c) == predicted.fiber_size);
        let distinct_ok = BigUint::from(self.counts.len() as u64) == predicted.hom_size;
        CensusCheck {
            predicted,
            total_ok,
            fiber_sizes_ok,
            distinct_ok,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("census serializes")
    }

    /// One row per homomorphism: its matrix literal and its count.
    pub fn to_csv(&self) -> String {
        counts_csv(&self.counts)
    }
}

/// A census held against the closed-form predictions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusCheck {
    pub predicted: CountReport,
    pub total_ok: bool,
    pub fiber_sizes_ok: bool,
    pub distinct_ok: bool,
}

impl CensusCheck {
    pub fn passed(&self) -> bool {
        self.total_ok && self.fiber_sizes_ok && self.distinct_ok
    }
}

/// Applies the connecting map to every lift of the context's `psi` and
/// tallies the results, budget permitting.
pub fn exhaustive_census(ctx: &GammaContext, budget: u64) -> Result<FiberCensus> {
    let lifts = enumerate_l_psi_with(ctx.phi0(), budget)?;
    let total = lifts.len();
    let counts = (0..total)
        .into_par_iter()
        .fold(BTreeMap::new, |mut acc, i| {
            let beta = bockstein_of(ctx, &lifts.at(i)).expect("enumerated lifts reduce to psi");
            *acc.entry(beta).or_insert(0u64) += 1;
            acc
        })
        .reduce(BTreeMap::new, merge_counts);
    Ok(FiberCensus {
        psi: ctx.psi().clone(),
        kernel_dim: ctx.kernel_dim(),
        coker_dim: ctx.coker_dim(),
        counts,
        total,
    })
}

/// Observed homomorphism counts from uniform conditional sampling, with the
/// chi-square score of the table against the flat law.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleReport {
    psi: MatrixModP,
    kernel_dim: usize,
    coker_dim: usize,
    trials: u64,
    seed: u64,
    counts: BTreeMap<BocksteinMatrix, u64>,
    chi_square: f64,
    degrees_of_freedom: u64,
    p_value: f64,
}

impl SampleReport {
    #[inline]
    pub fn psi(&self) -> &MatrixModP {
        &self.psi
    }

    #[inline]
    pub fn trials(&self) -> u64 {
        self.trials
    }

    #[inline]
    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn counts(&self) -> &BTreeMap<BocksteinMatrix, u64> {
        &self.counts
    }

    #[inline]
    pub fn chi_square(&self) -> f64 {
        self.chi_square
    }

    #[inline]
    pub fn degrees_of_freedom(&self) -> u64 {
        self.degrees_of_freedom
    }

    #[inline]
    pub fn p_value(&self) -> f64 {
        self.p_value
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        counts_csv(&self.counts)
    }
}

/// Draws `trials` lifts of the context's `psi` uniformly — the coset
/// bijection makes a uniform multiple of `p` added to `phi0` exactly the
/// conditional law — and tallies the induced homomorphisms.
///
/// The hom-space must fit the table budget so the chi-square expectation
/// is meaningful cell by cell.
pub fn sample_conditional(
    ctx: &GammaContext,
    trials: u64,
    seed: u64,
    budget: u64,
) -> Result<SampleReport> {
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    let hom_size = ctx.hom_size();
    if hom_size > BigUint::from(budget) {
        return Err(Error::BudgetExceeded {
            required: hom_size,
            budget,
        });
    }
    let hom_size = u64::try_from(&hom_size).expect("bounded by budget");
    let p = ctx.prime().get();
    let (m, n) = (ctx.psi().rows(), ctx.psi().cols());
    let phi0 = ctx.phi0().matrix();
    let counts = (0..trials)
        .into_par_iter()
        .fold(BTreeMap::new, |mut acc, trial| {
            let mut rng = rng::trial_rng(seed, trial);
            let offset: Vec<u64> = (0..m * n)
                .map(|_| p * rng::uniform_residue(&mut rng, p))
                .collect();
            let phi = phi0.add(
                &MatrixModP2::new(ctx.prime(), m, n, offset).expect("multiples of p are in range"),
            );
            let beta = bockstein_of(ctx, &phi).expect("coset members reduce to psi");
            *acc.entry(beta).or_insert(0u64) += 1;
            acc
        })
        .reduce(BTreeMap::new, merge_counts);
    let observed: Vec<u64> = counts.values().copied().collect();
    let (chi_square, degrees_of_freedom, p_value) = chi_square_uniform(&observed, hom_size, trials);
    Ok(SampleReport {
        psi: ctx.psi().clone(),
        kernel_dim: ctx.kernel_dim(),
        coker_dim: ctx.coker_dim(),
        trials,
        seed,
        counts,
        chi_square,
        degrees_of_freedom,
        p_value,
    })
}

/// One `psi`-bin of a joint sweep: every draw whose reduction was this
/// `psi`, tallied by induced homomorphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PsiBin {
    psi: MatrixModP,
    kernel_dim: usize,
    total: u64,
    counts: BTreeMap<BocksteinMatrix, u64>,
}

impl PsiBin {
    #[inline]
    pub fn psi(&self) -> &MatrixModP {
        &self.psi
    }

    #[inline]
    pub fn kernel_dim(&self) -> usize {
        self.kernel_dim
    }

    #[inline]
    pub fn total(&self) -> u64 {
        self.total
    }

    #[inline]
    pub fn counts(&self) -> &BTreeMap<BocksteinMatrix, u64> {
        &self.counts
    }

    /// True when every observed homomorphism occurs equally often.
    pub fn is_flat(&self) -> bool {
        let mut values = self.counts.values();
        match values.next() {
            None => true,
            Some(&first) => values.all(|&v| v == first),
        }
    }
}

/// The joint table of a sweep over raw matrices mod `p^2`: one bin per
/// observed reduction. `seed` is present for sampled sweeps and absent for
/// exhaustive ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointReport {
    p: Prime,
    m: usize,
    n: usize,
    total: u64,
    seed: Option<u64>,
    bins: Vec<PsiBin>,
}

impl JointReport {
    #[inline]
    pub fn prime(&self) -> Prime {
        self.p
    }

    #[inline]
    pub fn total(&self) -> u64 {
        self.total
    }

    #[inline]
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    #[inline]
    pub fn bins(&self) -> &[PsiBin] {
        &self.bins
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per `(psi, beta)` pair.
    pub fn to_csv(&self) -> String {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(["psi", "k", "beta", "count"])
            .expect("csv header");
        for bin in &self.bins {
            for (beta, count) in &bin.counts {
                wtr.write_record([
                    bin.psi.to_literal(),
                    bin.kernel_dim.to_string(),
                    beta.to_literal(),
                    count.to_string(),
                ])
                .expect("csv row");
            }
        }
        String::from_utf8(wtr.into_inner().expect("csv flush")).expect("csv is utf8")
    }
}

struct JointAccum {
    ctxs: HashMap<Vec<u8>, GammaContext>,
    counts: HashMap<Vec<u8>, BTreeMap<BocksteinMatrix, u64>>,
}

impl JointAccum {
    fn new() -> Self {
        Self {
            ctxs: HashMap::new(),
            counts: HashMap::new(),
        }
    }

    fn record(&mut self, phi: &MatrixModP2) {
        let psi = phi.reduce_mod_p();
        let key = psi.canonical_bytes();
        let ctx = self
            .ctxs
            .entry(key.clone())
            .or_insert_with(|| GammaContext::new(psi));
        let beta = bockstein_of(ctx, phi).expect("phi reduces to its own reduction");
        *self
            .counts
            .entry(key)
            .or_default()
            .entry(beta)
            .or_insert(0u64) += 1;
    }

    fn merge(mut self, other: Self) -> Self {
        for (key, ctx) in other.ctxs {
            self.ctxs.entry(key).or_insert(ctx);
        }
        for (key, counts) in other.counts {
            let entry = self.counts.entry(key).or_default();
            *entry = merge_counts(std::mem::take(entry), counts);
        }
        self
    }

    fn into_bins(self) -> Vec<PsiBin> {
        let mut keyed: Vec<(Vec<u8>, PsiBin)> = self
            .counts
            .into_iter()
            .map(|(key, counts)| {
                let ctx = &self.ctxs[&key];
                let total = counts.values().sum();
                (
                    key,
                    PsiBin {
                        psi: ctx.psi().clone(),
                        kernel_dim: ctx.kernel_dim(),
                        total,
                        counts,
                    },
                )
            })
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        keyed.into_iter().map(|(_, bin)| bin).collect()
    }
}

fn phi_at(p: Prime, rows: usize, cols: usize, index: u64) -> MatrixModP2 {
    let p2 = p.squared();
    let mut entries = vec![0u64; rows * cols];
    let mut rem = index;
    for e in entries.iter_mut().rev() {
        *e = rem % p2;
        rem /= p2;
    }
    MatrixModP2::new(p, rows, cols, entries).expect("digits are in range")
}

/// Sweeps every one of the `(p^2)^(m*n)` matrices mod `p^2` and bins the
/// induced homomorphisms by reduction; the exhaustive surrogate of
/// [`sample_unconditional`].
pub fn joint_census(p: Prime, m: usize, n: usize, budget: u64) -> Result<JointReport> {
    let required = BigUint::from(p.squared()).pow((m * n) as u32);
    if required > BigUint::from(budget) {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let total = u64::try_from(&required).expect("bounded by budget");
    let accum = (0..total)
        .into_par_iter()
        .fold(JointAccum::new, |mut acc, i| {
            acc.record(&phi_at(p, m, n, i));
            acc
        })
        .reduce(JointAccum::new, JointAccum::merge);
    Ok(JointReport {
        p,
        m,
        n,
        total,
        seed: None,
        bins: accum.into_bins(),
    })
}

/// Draws matrices mod `p^2` entrywise uniformly and bins the induced
/// homomorphisms by reduction. Within each bin the conditional frequencies
/// can be held against `1 / hom_size`.
pub fn sample_unconditional(
    p: Prime,
    m: usize,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<JointReport> {
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    let p2 = p.squared();
    let accum = (0..trials)
        .into_par_iter()
        .fold(JointAccum::new, |mut acc, trial| {
            let mut rng = rng::trial_rng(seed, trial);
            let entries: Vec<u64> = (0..m * n)
                .map(|_| rng::uniform_residue(&mut rng, p2))
                .collect();
            acc.record(&MatrixModP2::new(p, m, n, entries).expect("residues are in range"));
            acc
        })
        .reduce(JointAccum::new, JointAccum::merge);
    Ok(JointReport {
        p,
        m,
        n,
        total: trials,
        seed: Some(seed),
        bins: accum.into_bins(),
    })
}

fn counts_csv(counts: &BTreeMap<BocksteinMatrix, u64>) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["beta", "count"]).expect("csv header");
    for (beta, count) in counts {
        wtr.write_record([beta.to_literal(), count.to_string()])
            .expect("csv row");
    }
    String::from_utf8(wtr.into_inner().expect("csv flush")).expect("csv is utf8")
}

impl CountReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record([
            "p",
            "m",
            "n",
            "k",
            "size_l_psi",
            "hom_size",
            "fiber_size",
            "theorem_probability",
        ])
        .expect("csv header");
        wtr.write_record([
            self.p.to_string(),
            self.m.to_string(),
            self.n.to_string(),
            self.k.to_string(),
            self.size_l_psi.to_string(),
            self.hom_size.to_string(),
            self.fiber_size.to_string(),
            self.theorem_probability.clone(),
        ])
        .expect("csv row");
        String::from_utf8(wtr.into_inner().expect("csv flush")).expect("csv is utf8")
    }
}

// Serialized census/sample/joint forms carry `p`, `k`, `c` (and `psi`)
// alongside the counts so a parsed report rebuilds the same bound
// homomorphisms; the beta tables themselves are `{beta, count}` rows.

#[derive(Serialize, Deserialize)]
struct BetaCountRepr {
    beta: Vec<Vec<u64>>,
    count: u64,
}

fn counts_to_repr(counts: &BTreeMap<BocksteinMatrix, u64>) -> Vec<BetaCountRepr> {
    counts
        .iter()
        .map(|(beta, &count)| BetaCountRepr {
            beta: beta.rows_nested(),
            count,
        })
        .collect()
}

fn counts_from_repr(
    rows: Vec<BetaCountRepr>,
    psi: &MatrixModP,
    kernel_dim: usize,
    coker_dim: usize,
) -> std::result::Result<BTreeMap<BocksteinMatrix, u64>, String> {
    use crate::bockstein::PsiDigest;
    let digest = PsiDigest::of(psi);
    let mut out = BTreeMap::new();
    for row in rows {
        let repr = serde_json::json!({
            "p": psi.prime().get(),
            "c": coker_dim,
            "k": kernel_dim,
            "entries": row.beta,
            "psi_digest": digest.to_hex(),
        });
        let beta: BocksteinMatrix =
            serde_json::from_value(repr).map_err(|e| format!("invalid beta: {e}"))?;
        if out.insert(beta, row.count).is_some() {
            return Err("duplicate beta in counts".into());
        }
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct FiberCensusRepr {
    psi: MatrixModP,
    k: usize,
    c: usize,
    total: u64,
    counts: Vec<BetaCountRepr>,
}

impl Serialize for FiberCensus {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FiberCensusRepr {
            psi: self.psi.clone(),
            k: self.kernel_dim,
            c: self.coker_dim,
            total: self.total,
            counts: counts_to_repr(&self.counts),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FiberCensus {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = FiberCensusRepr::deserialize(d)?;
        let counts = counts_from_repr(repr.counts, &repr.psi, repr.k, repr.c)
            .map_err(serde::de::Error::custom)?;
        Ok(Self {
            psi: repr.psi,
            kernel_dim: repr.k,
            coker_dim: repr.c,
            counts,
            total: repr.total,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct SampleReportRepr {
    psi: MatrixModP,
    k: usize,
    c: usize,
    trials: u64,
    seed: u64,
    chi_square: f64,
    degrees_of_freedom: u64,
    p_value: f64,
    counts: Vec<BetaCountRepr>,
}

impl Serialize for SampleReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SampleReportRepr {
            psi: self.psi.clone(),
            k: self.kernel_dim,
            c: self.coker_dim,
            trials: self.trials,
            seed: self.seed,
            chi_square: self.chi_square,
            degrees_of_freedom: self.degrees_of_freedom,
            p_value: self.p_value,
            counts: counts_to_repr(&self.counts),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SampleReport {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = SampleReportRepr::deserialize(d)?;
        let counts = counts_from_repr(repr.counts, &repr.psi, repr.k, repr.c)
            .map_err(serde::de::Error::custom)?;
        Ok(Self {
            psi: repr.psi,
            kernel_dim: repr.k,
            coker_dim: repr.c,
            trials: repr.trials,
            seed: repr.seed,
            counts,
            chi_square: repr.chi_square,
            degrees_of_freedom: repr.degrees_of_freedom,
            p_value: repr.p_value,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct PsiBinRepr {
    psi: MatrixModP,
    k: usize,
    total: u64,
    counts: Vec<BetaCountRepr>,
}

#[derive(Serialize, Deserialize)]
struct JointReportRepr {
    p: Prime,
    m: usize,
    n: usize,
    total: u64,
    seed: Option<u64>,
    bins: Vec<PsiBinRepr>,
}

impl Serialize for JointReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        JointReportRepr {
            p: self.p,
            m: self.m,
            n: self.n,
            total: self.total,
            seed: self.seed,
            bins: self
                .bins
                .iter()
                .map(|bin| PsiBinRepr {
                    psi: bin.psi.clone(),
                    k: bin.kernel_dim,
                    total: bin.total,
                    counts: counts_to_repr(&bin.counts),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for JointReport {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = JointReportRepr::deserialize(d)?;
        let mut bins = Vec::with_capacity(repr.bins.len());
        for bin in repr.bins {
            let coker_dim = bin.psi.rows() + bin.k - bin.psi.cols();
            let counts = counts_from_repr(bin.counts, &bin.psi, bin.k, coker_dim)
                .map_err(serde::de::Error::custom)?;
            bins.push(PsiBin {
                psi: bin.psi,
                kernel_dim: bin.k,
                total: bin.total,
                counts,
            });
        }
        Ok(Self {
            p: repr.p,
            m: repr.m,
            n: repr.n,
            total: repr.total,
            seed: repr.seed,
            bins,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module_linalg::canonical_lift;

    fn prime(p: u64) -> Prime {
        Prime::new(p).unwrap()
    }

    fn mat_p(p: u64, rows: usize, cols: usize, entries: &[u64]) -> MatrixModP {
        MatrixModP::new(prime(p), rows, cols, entries.to_vec()).unwrap()
    }

    #[test]
    fn count_report_small_cases() {
        let r = count_report(prime(2), 2, 2, 1).unwrap();
        assert_eq!(r.hom_size, BigUint::from(2u64));
        assert_eq!(r.fiber_size, BigUint::from(8u64));
        assert_eq!(r.size_l_psi, BigUint::from(16u64));

        let r = count_report(prime(2), 2, 2, 2).unwrap();
        assert_eq!(r.fiber_size, BigUint::from(1u64));
        assert_eq!(r.hom_size, BigUint::from(16u64));

        let r = count_report(prime(3), 3, 2, 1).unwrap();
        assert_eq!(r.theorem_probability, "1/9");
    }

    #[test]
    fn count_report_rejects_unrepresentable_dimensions() {
        let huge = 1usize << 33;
        assert!(matches!(
            count_report(prime(2), huge, huge, huge),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn count_report_rejects_infeasible_k() {
        // A 1x3 map has rank at most 1, so its kernel has dimension >= 2.
        assert!(matches!(
            count_report(prime(2), 1, 3, 1),
            Err(Error::InfeasibleKernelDim { .. })
        ));
        assert!(count_report(prime(2), 1, 3, 2).is_ok());
        assert!(matches!(
            count_report(prime(2), 2, 2, 3),
            Err(Error::InfeasibleKernelDim { .. })
        ));
    }

    #[test]
    fn census_of_scalar_zero_map() {
        let ctx = GammaContext::new(mat_p(2, 1, 1, &[0]));
        let census = exhaustive_census(&ctx, 1 << 24).unwrap();
        assert_eq!(census.total(), 2);
        let counts: Vec<(Vec<u64>, u64)> = census
            .counts()
            .iter()
            .map(|(b, &c)| (b.entries().to_vec(), c))
            .collect();
        assert_eq!(counts, vec![(vec![0], 1), (vec![1], 1)]);
        assert!(census.verify().passed());
    }

    #[test]
    fn census_of_rank_one_projection() {
        let ctx = GammaContext::new(mat_p(2, 2, 2, &[1, 0, 0, 0]));
        let census = exhaustive_census(&ctx, 1 << 24).unwrap();
        assert_eq!(census.total(), 16);
        assert_eq!(census.counts().len(), 2);
        assert!(census.counts().values().all(|&c| c == 8));
        assert!(census.verify().passed());
    }

    #[test]
    fn census_of_invertible_map_is_a_single_cell() {
        let ctx = GammaContext::new(mat_p(2, 2, 2, &[1, 1, 0, 1]));
        let census = exhaustive_census(&ctx, 1 << 24).unwrap();
        assert_eq!(census.counts().len(), 1);
        let (beta, &count) = census.counts().iter().next().unwrap();
        assert!(beta.entries().is_empty());
        assert_eq!(count, 16);
        assert!(census.verify().passed());
    }

    #[test]
    fn census_respects_budget() {
        let ctx = GammaContext::new(MatrixModP::zero(prime(2), 5, 5));
        assert!(matches!(
            exhaustive_census(&ctx, 1 << 10),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn conditional_sampling_is_deterministic_and_plausible() {
        let ctx = GammaContext::new(mat_p(2, 2, 2, &[1, 0, 0, 0]));
        let a = sample_conditional(&ctx, 10_000, 42, 1 << 24).unwrap();
        let b = sample_conditional(&ctx, 10_000, 42, 1 << 24).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.counts().values().sum::<u64>(), 10_000);
        assert!(a.p_value() > 1e-3, "p-value {}", a.p_value());
        let c = sample_conditional(&ctx, 10_000, 43, 1 << 24).unwrap();
        assert_ne!(a.counts(), c.counts(), "different seeds, same table");
    }

    #[test]
    fn joint_census_of_scalars_mod_four() {
        // The four matrices over Z/4: reductions [0] and [1], two lifts each.
        let report = joint_census(prime(2), 1, 1, 1 << 24).unwrap();
        assert_eq!(report.total(), 4);
        assert_eq!(report.bins().len(), 2);

        let zero_bin = &report.bins()[0];
        assert!(zero_bin.psi().is_zero());
        assert_eq!(zero_bin.kernel_dim(), 1);
        let counts: Vec<(Vec<u64>, u64)> = zero_bin
            .counts()
            .iter()
            .map(|(b, &c)| (b.entries().to_vec(), c))
            .collect();
        assert_eq!(counts, vec![(vec![0], 1), (vec![1], 1)]);

        let unit_bin = &report.bins()[1];
        assert_eq!(unit_bin.kernel_dim(), 0);
        assert_eq!(unit_bin.total(), 2);
        let (beta, &count) = unit_bin.counts().iter().next().unwrap();
        assert!(beta.entries().is_empty());
        assert_eq!(count, 2);

        assert!(report.bins().iter().all(PsiBin::is_flat));
    }

    #[test]
    fn joint_census_degenerate_dimensions() {
        let report = joint_census(prime(2), 0, 1, 1 << 24).unwrap();
        assert_eq!(report.total(), 1);
        assert_eq!(report.bins().len(), 1);
        let bin = &report.bins()[0];
        assert_eq!(bin.counts().len(), 1);
        assert_eq!(bin.total(), 1);
    }

    #[test]
    fn unconditional_sampling_bins_by_reduction() {
        let report = sample_unconditional(prime(2), 1, 1, 400, 7).unwrap();
        assert_eq!(report.total(), 400);
        assert_eq!(report.bins().iter().map(PsiBin::total).sum::<u64>(), 400);
        for bin in report.bins() {
            for beta in bin.counts().keys() {
                assert_eq!(beta.kernel_dim(), bin.kernel_dim());
            }
        }
    }

    #[test]
    fn reports_round_trip_through_json() {
        let ctx = GammaContext::new(mat_p(2, 2, 2, &[1, 0, 0, 0]));

        let census = exhaustive_census(&ctx, 1 << 24).unwrap();
        let back: FiberCensus = serde_json::from_str(&census.to_json()).unwrap();
        assert_eq!(back, census);

        let sample = sample_conditional(&ctx, 64, 5, 1 << 24).unwrap();
        let back: SampleReport = serde_json::from_str(&sample.to_json()).unwrap();
        assert_eq!(back, sample);

        let joint = joint_census(prime(2), 1, 1, 1 << 24).unwrap();
        let back: JointReport = serde_json::from_str(&joint.to_json()).unwrap();
        assert_eq!(back, joint);

        let count = count_report(prime(3), 3, 2, 1).unwrap();
        let back: CountReport =
            serde_json::from_str(&serde_json::to_string(&count).unwrap()).unwrap();
        assert_eq!(back, count);
    }

    #[test]
    fn census_csv_has_one_row_per_beta() {
        let ctx = GammaContext::new(mat_p(2, 2, 2, &[1, 0, 0, 0]));
        let census = exhaustive_census(&ctx, 1 << 24).unwrap();
        let csv = census.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "beta,count");
        assert_eq!(lines.len(), 1 + census.counts().len());
    }

    #[test]
    fn sampling_agrees_with_census_shape() {
        // Same psi: the sampler can only ever see homomorphisms the census found.
        let ctx = GammaContext::new(mat_p(3, 2, 2, &[1, 2, 2, 1]));
        let census = exhaustive_census(&ctx, 1 << 24).unwrap();
        let sample = sample_conditional(&ctx, 2_000, 11, 1 << 24).unwrap();
        for beta in sample.counts().keys() {
            assert!(census.counts().contains_key(beta));
        }
        let _ = canonical_lift(ctx.psi());
    }
}
