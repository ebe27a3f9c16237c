//! The verification sweep behind `bockstein verify`: every exact law the
//! library is built on, checked over all maps up to a dimension cap, with
//! one summary line per check.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use bockstein_core::{
    b_map, bockstein_of, bockstein_of_with_kernel_lifts, construct_phi_for, count_report,
    distribution::rng, enumerate_hom, enumerate_l0, exhaustive_census, joint_census,
    sample_conditional, Error, GammaContext, MatrixModP, MatrixModP2, Prime,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyLine {
    pub label: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub p: Prime,
    pub max_dim: usize,
    pub budget: u64,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub lines: Vec<VerifyLine>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "verification sweep: p={} max-dim={} budget={}\n",
            self.p, self.max_dim, self.budget
        ));
        if let Some(seed) = self.seed {
            out.push_str(&format!("seed: {seed}\n"));
        }
        let width = self.lines.iter().map(|l| l.label.len()).max().unwrap_or(0);
        for line in &self.lines {
            out.push_str(&format!(
                "{:<width$}  {}  {}\n",
                line.label, line.status, line.detail
            ));
        }
        let (pass, fail, skip) = self.tally();
        out.push_str(&format!(
            "{} checks: {pass} passed, {fail} failed, {skip} skipped -> {}\n",
            self.lines.len(),
            if self.passed { "PASS" } else { "FAIL" }
        ));
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,status,detail\n");
        for line in &self.lines {
            out.push_str(&format!(
                "{:?},{},{:?}\n",
                line.label, line.status, line.detail
            ));
        }
        out
    }

    fn tally(&self) -> (usize, usize, usize) {
        let mut t = (0, 0, 0);
        for line in &self.lines {
            match line.status {
                Status::Pass => t.0 += 1,
                Status::Fail => t.1 += 1,
                Status::Skip => t.2 += 1,
            }
        }
        t
    }
}

struct Sweep {
    p: Prime,
    budget: u64,
    lines: Vec<VerifyLine>,
}

impl Sweep {
    fn pass(&mut self, label: impl Into<String>, detail: String) {
        self.lines.push(VerifyLine {
            label: label.into(),
            status: Status::Pass,
            detail,
        });
    }

    fn fail(&mut self, label: impl Into<String>, detail: String) {
        self.lines.push(VerifyLine {
            label: label.into(),
            status: Status::Fail,
            detail,
        });
    }

    fn skip(&mut self, label: impl Into<String>, detail: String) {
        self.lines.push(VerifyLine {
            label: label.into(),
            status: Status::Skip,
            detail,
        });
    }

    fn check(&mut self, label: impl Into<String>, ok: bool, detail: String) {
        if ok {
            self.pass(label, detail);
        } else {
            self.fail(label, detail);
        }
    }

    /// All psi of a given shape, via the digit enumeration.
    fn each_psi(&self, m: usize, n: usize) -> Result<Vec<MatrixModP>, Error> {
        let e = enumerate_l0(self.p, m, n, self.budget)?;
        Ok((0..e.len()).map(|i| e.base_at(i)).collect())
    }
}

fn diagonal_psi(p: Prime, m: usize, n: usize, rank: usize) -> MatrixModP {
    let mut entries = vec![0u64; m * n];
    for i in 0..rank {
        entries[i * n + i] = 1;
    }
    MatrixModP::new(p, m, n, entries).expect("diagonal pattern is in range")
}

fn psi_label(psi: &MatrixModP) -> String {
    let lit = psi.to_literal();
    if lit.is_empty() {
        format!("{}x{} []", psi.rows(), psi.cols())
    } else {
        format!("{}x{} [{lit}]", psi.rows(), psi.cols())
    }
}

pub fn run_verify(
    p: Prime,
    max_dim: usize,
    trials: Option<u64>,
    seed: Option<u64>,
    budget: u64,
) -> VerifyReport {
    let mut sweep = Sweep {
        p,
        budget,
        lines: Vec::new(),
    };

    counting_identity(&mut sweep);
    multiplication_by_p_laws(&mut sweep, max_dim);
    census_sweep(&mut sweep, max_dim);
    lift_independence(&mut sweep, max_dim);
    linearity(&mut sweep, max_dim, seed);
    joint_flatness(&mut sweep, max_dim);
    if let Some(trials) = trials {
        sampling(&mut sweep, max_dim, trials, seed.unwrap_or_default());
    }

    let passed = sweep.lines.iter().all(|l| l.status != Status::Fail);
    VerifyReport {
        p,
        max_dim,
        budget,
        trials,
        seed,
        lines: sweep.lines,
        passed,
    }
}

/// m*n = k(m-n+k) + (m+k)(n-k) for every feasible triple with m,n <= 8.
fn counting_identity(sweep: &mut Sweep) {
    let mut checked = 0usize;
    let mut ok = true;
    for m in 0..=8usize {
        for n in 0..=8usize {
            for k in n.saturating_sub(m)..=n {
                let lhs = m * n;
                let rhs = k * (m + k - n) + (m + k) * (n - k);
                ok &= lhs == rhs && count_report(sweep.p, m, n, k).is_ok();
                checked += 1;
            }
        }
    }
    sweep.check(
        "counting identity m,n<=8",
        ok,
        format!("{checked} feasible (m,n,k) triples"),
    );
}

/// Multiplication by p on (Z/p^2)^n: kernel = image, and p*x -> x mod p is
/// a well-defined additive bijection onto (Z/p)^n. Exhaustive for n <= 2.
fn multiplication_by_p_laws(sweep: &mut Sweep, max_dim: usize) {
    let p = sweep.p.get();
    let p2 = sweep.p.squared();
    for n in 0..=max_dim.min(2) {
        let label = format!("multiplication-by-p laws n={n}");
        let total = (p2 as u128).pow(n as u32);
        if total > sweep.budget as u128 {
            sweep.skip(label, format!("needs {total} vectors"));
            continue;
        }
        let vectors: Vec<Vec<u64>> = (0..total as u64)
            .map(|mut idx| {
                let mut v = vec![0u64; n];
                for e in v.iter_mut().rev() {
                    *e = idx % p2;
                    idx /= p2;
                }
                v
            })
            .collect();
        let mul_p = |v: &[u64]| -> Vec<u64> { v.iter().map(|&x| (p * x) % p2).collect() };
        let kernel: HashSet<&Vec<u64>> = vectors
            .iter()
            .filter(|v| mul_p(v).iter().all(|&x| x == 0))
            .collect();
        let image: HashSet<Vec<u64>> = vectors.iter().map(|v| mul_p(v)).collect();
        let kernel_is_image = kernel.len() == image.len()
            && kernel.iter().all(|v| image.contains(*v))
            && image.iter().all(|v| kernel.contains(v));

        // p*x determines x mod p, and the assignment is additive and onto.
        let mut well_defined = true;
        let mut classes: HashSet<Vec<u64>> = HashSet::new();
        for v in &vectors {
            let px = mul_p(v);
            let bar: Vec<u64> = v.iter().map(|&x| x % p).collect();
            for w in &vectors {
                if mul_p(w) == px {
                    let bar_w: Vec<u64> = w.iter().map(|&x| x % p).collect();
                    well_defined &= bar == bar_w;
                }
            }
            classes.insert(bar);
        }
        let bijective =
            classes.len() as u128 == (p as u128).pow(n as u32) && image.len() == classes.len();

        sweep.check(
            label,
            kernel_is_image && well_defined && bijective,
            format!(
                "{} vectors, kernel = image ({} elements), quotient map bijective",
                vectors.len(),
                kernel.len()
            ),
        );
    }
}

/// For every psi up to the cap: the lift enumeration is exact, the census
/// fibers match the closed forms, and every homomorphism is realized by
/// the explicit constructor. One line per psi.
fn census_sweep(sweep: &mut Sweep, max_dim: usize) {
    for m in 0..=max_dim {
        for n in 0..=max_dim {
            let psis = match sweep.each_psi(m, n) {
                Ok(psis) => psis,
                Err(Error::BudgetExceeded { required, .. }) => {
                    sweep.skip(
                        format!("census sweep {m}x{n}"),
                        format!("needs {required} maps"),
                    );
                    continue;
                }
                Err(e) => {
                    sweep.fail(format!("census sweep {m}x{n}"), e.to_string());
                    continue;
                }
            };
            for psi in psis {
                let label = format!("census {}", psi_label(&psi));
                let ctx = GammaContext::new(psi.clone());
                let census = match exhaustive_census(&ctx, sweep.budget) {
                    Ok(c) => c,
                    Err(Error::BudgetExceeded { required, .. }) => {
                        sweep.skip(label, format!("needs {required} lifts"));
                        continue;
                    }
                    Err(e) => {
                        sweep.fail(label, e.to_string());
                        continue;
                    }
                };

                // Lift enumeration: distinct, correct count, constant reduction.
                let lifts = bockstein_core::enumerate_l_psi_with(ctx.phi0(), sweep.budget)
                    .expect("census already fit the budget");
                let mut seen = HashSet::new();
                let mut reductions_ok = true;
                for phi in lifts.iter() {
                    reductions_ok &= phi.reduce_mod_p() == psi;
                    seen.insert(phi.canonical_bytes());
                }
                let lifts_ok = seen.len() as u64 == lifts.len() && reductions_ok;

                let check = census.verify();

                // Surjectivity with the explicit right inverse.
                let surjective = match enumerate_hom(&ctx, sweep.budget) {
                    Ok(hom) => hom.iter().all(|beta| {
                        construct_phi_for(&ctx, &beta)
                            .and_then(|phi| bockstein_of(&ctx, &phi))
                            .map(|back| back == beta)
                            .unwrap_or(false)
                    }),
                    Err(_) => false,
                };

                sweep.check(
                    label,
                    lifts_ok && check.passed() && surjective,
                    format!(
                        "{} lifts, {} homomorphisms x fiber {}, onto",
                        census.total(),
                        census.counts().len(),
                        check.predicted.fiber_size
                    ),
                );
            }
        }
    }
}

/// The induced homomorphism does not depend on the choice of kernel lifts;
/// checked with a deterministic family of perturbations.
fn lift_independence(sweep: &mut Sweep, max_dim: usize) {
    let p = sweep.p.get();
    let d = max_dim.min(2);
    let label = format!("lift independence {d}x{d}");
    let psis = match sweep.each_psi(d, d) {
        Ok(psis) => psis,
        Err(_) => {
            sweep.skip(label, "psi sweep over budget".into());
            return;
        }
    };
    let mut checked = 0usize;
    let mut ok = true;
    for psi in psis {
        let ctx = GammaContext::new(psi);
        let k = ctx.kernel_dim();
        if k == 0 {
            continue;
        }
        let n = ctx.psi().cols();
        // phi0 plus a fixed striped offset keeps the sweep deterministic.
        let offset: Vec<u64> = (0..d * d).map(|i| p * (i as u64 % p)).collect();
        let phi = ctx.phi0().matrix().add(
            &MatrixModP2::new(ctx.prime(), d, d, offset).expect("multiples of p are in range"),
        );
        let reference = bockstein_of(&ctx, &phi).expect("phi lies over psi");
        // Perturb each kernel lift by p times a standard vector or all-ones.
        let mut perturbations: Vec<Vec<u64>> = (0..n)
            .map(|i| {
                let mut v = vec![0u64; n];
                v[i] = 1;
                v
            })
            .collect();
        perturbations.push(vec![1; n]);
        for target in 0..k {
            for r in &perturbations {
                let lifts: Vec<Vec<u64>> = ctx
                    .frame()
                    .kernel_basis()
                    .iter()
                    .enumerate()
                    .map(|(i, e)| {
                        let mut lift = e.clone();
                        if i == target {
                            for (x, &ri) in lift.iter_mut().zip(r) {
                                *x = (*x + p * ri) % ctx.prime().squared();
                            }
                        }
                        lift
                    })
                    .collect();
                let alt = bockstein_of_with_kernel_lifts(&ctx, &phi, &lifts)
                    .expect("perturbed lifts still reduce to the kernel basis");
                ok &= alt == reference;
                checked += 1;
            }
        }
    }
    sweep.check(label, ok, format!("{checked} alternative lift choices"));
}

/// Additivity and scalar compatibility of the translated connecting map,
/// for one diagonal psi per rank. Exhaustive over all pairs when the pair
/// count fits the budget, otherwise seeded random trials.
fn linearity(sweep: &mut Sweep, max_dim: usize, seed: Option<u64>) {
    let d = max_dim.clamp(1, 2);
    let p = sweep.p;
    let l0 = match enumerate_l0(p, d, d, sweep.budget) {
        Ok(e) => e,
        Err(_) => {
            sweep.skip(format!("linearity {d}x{d}"), "L0 over budget".into());
            return;
        }
    };
    for rank in 0..=d {
        let label = format!("linearity {d}x{d} rank {rank}");
        let psi = diagonal_psi(p, d, d, rank);
        let ctx = GammaContext::new(psi);
        let pairs = (l0.len() as u128) * (l0.len() as u128);
        if pairs <= sweep.budget as u128 {
            let mut ok = true;
            let betas: Vec<_> = (0..l0.len())
                .map(|i| b_map(&ctx, &l0.at(i)).expect("L0 members reduce to zero"))
                .collect();
            for i in 0..l0.len() {
                for j in 0..l0.len() {
                    let sum = b_map(&ctx, &l0.at(i).add(&l0.at(j))).expect("sum stays in L0");
                    ok &= sum == betas[i as usize].add(&betas[j as usize]).expect("same psi");
                }
            }
            // Scalars: alpha acts through its residue mod p.
            for i in 0..l0.len() {
                for alpha in 0..p.squared() {
                    let scaled = b_map(&ctx, &l0.at(i).scale(alpha)).expect("scaling stays in L0");
                    ok &= scaled == betas[i as usize].scale(alpha);
                }
            }
            sweep.check(
                label,
                ok,
                format!(
                    "exhaustive: {pairs} pairs, {} scalar cases",
                    l0.len() * p.squared()
                ),
            );
        } else if let Some(seed) = seed {
            let trials = 1_000u64;
            let mut ok = true;
            for t in 0..trials {
                let mut r = rng::trial_rng(seed, t);
                let x = l0.at(rng::uniform_residue(&mut r, l0.len()));
                let y = l0.at(rng::uniform_residue(&mut r, l0.len()));
                let alpha = rng::uniform_residue(&mut r, p.squared());
                let bx = b_map(&ctx, &x).expect("in L0");
                let by = b_map(&ctx, &y).expect("in L0");
                ok &= b_map(&ctx, &x.add(&y)).expect("in L0") == bx.add(&by).expect("same psi");
                ok &= b_map(&ctx, &x.scale(alpha)).expect("in L0") == bx.scale(alpha);
            }
            sweep.check(label, ok, format!("{trials} seeded random trials"));
        } else {
            sweep.skip(label, "needs --seed for randomized trials".into());
        }
    }
}

/// Exhaustive joint sweeps: within every reduction bin the homomorphism
/// histogram is exactly flat and hits the whole hom-space.
fn joint_flatness(sweep: &mut Sweep, max_dim: usize) {
    for m in 1..=max_dim {
        for n in 1..=max_dim {
            let label = format!("joint flatness {m}x{n}");
            match joint_census(sweep.p, m, n, sweep.budget) {
                Ok(report) => {
                    let mut ok = true;
                    for bin in report.bins() {
                        let predicted = count_report(sweep.p, m, n, bin.kernel_dim())
                            .expect("bin dimensions are feasible");
                        ok &= bin.is_flat();
                        ok &= num_bigint::BigUint::from(bin.counts().len() as u64)
                            == predicted.hom_size;
                    }
                    sweep.check(
                        label,
                        ok,
                        format!("{} maps in {} bins", report.total(), report.bins().len()),
                    );
                }
                Err(Error::BudgetExceeded { required, .. }) => {
                    sweep.skip(label, format!("needs {required} maps"));
                }
                Err(e) => sweep.fail(label, e.to_string()),
            }
        }
    }
}

/// Seeded conditional sampling for one diagonal psi per rank; the observed
/// tables must not reject uniformity at the 10^-3 level.
fn sampling(sweep: &mut Sweep, max_dim: usize, trials: u64, seed: u64) {
    let d = max_dim.max(1);
    for rank in 0..=d {
        let label = format!("sampling {d}x{d} rank {rank}");
        let ctx = GammaContext::new(diagonal_psi(sweep.p, d, d, rank));
        match sample_conditional(&ctx, trials, seed, sweep.budget) {
            Ok(report) => sweep.check(
                label,
                report.p_value() > 1e-3,
                format!(
                    "chi2 = {:.4}, df = {}, p = {:.6}",
                    report.chi_square(),
                    report.degrees_of_freedom(),
                    report.p_value()
                ),
            ),
            Err(Error::BudgetExceeded { required, .. }) => {
                sweep.skip(label, format!("hom-space of {required} over budget"));
            }
            Err(e) => sweep.fail(label, e.to_string()),
        }
    }
}
