//! Pearson chi-square against a uniform expectation, with a self-contained
//! p-value routine.
//!
//! The p-value of a chi-square statistic `x` with `df` degrees of freedom
//! is the regularized upper incomplete gamma function `Q(df/2, x/2)`,
//! computed here with the classic pair of expansions: the lower series for
//! `x < s + 1` and the continued fraction (modified Lentz) otherwise, with
//! `ln Gamma` from a Lanczos approximation.

const EPS: f64 = 1e-15;
const FPMIN: f64 = f64::MIN_POSITIVE / EPS;
const MAX_ITER: usize = 500;

/// Lanczos g = 7, n = 9 coefficients.
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for positive arguments.
pub fn ln_gamma(z: f64) -> f64 {
    assert!(z > 0.0, "ln_gamma needs a positive argument");
    if z < 0.5 {
        // Reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z).
        return std::f64::consts::PI.ln()
            - (std::f64::consts::PI * z).sin().ln()
            - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut x = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

/// Lower series for P(s, x); converges fast for x < s + 1.
fn lower_series(s: f64, x: f64) -> f64 {
    let mut term = 1.0 / s;
    let mut sum = term;
    let mut a = s;
    for _ in 0..MAX_ITER {
        a += 1.0;
        term *= x / a;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * (-x + s * x.ln() - ln_gamma(s)).exp()
}

/// Continued fraction for Q(s, x) by modified Lentz; for x >= s + 1.
fn upper_continued_fraction(s: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h * (-x + s * x.ln() - ln_gamma(s)).exp()
}

/// Regularized lower incomplete gamma P(s, x).
pub fn gamma_p(s: f64, x: f64) -> f64 {
    assert!(s > 0.0 && x >= 0.0, "gamma_p domain: s > 0, x >= 0");
    if x == 0.0 {
        return 0.0;
    }
    if x < s + 1.0 {
        lower_series(s, x)
    } else {
        1.0 - upper_continued_fraction(s, x)
    }
}

/// Regularized upper incomplete gamma Q(s, x) = 1 - P(s, x).
pub fn gamma_q(s: f64, x: f64) -> f64 {
    assert!(s > 0.0 && x >= 0.0, "gamma_q domain: s > 0, x >= 0");
    if x == 0.0 {
        return 1.0;
    }
    if x < s + 1.0 {
        1.0 - lower_series(s, x)
    } else {
        upper_continued_fraction(s, x)
    }
}

/// Survival probability of a chi-square statistic.
///
/// `df == 0` only occurs for a single-cell table, where the statistic is
/// identically zero; the fit is perfect by construction and the p-value
/// is 1.
pub fn chi_square_p_value(statistic: f64, df: u64) -> f64 {
    if df == 0 {
        return 1.0;
    }
    gamma_q(df as f64 / 2.0, statistic / 2.0)
}

/// Pearson chi-square of observed counts against the uniform distribution
/// over `cells` categories.
///
/// `observed` need only list the nonzero counts; the remaining
/// `cells - observed.len()` categories are treated as zeros, each
/// contributing one full expected count to the statistic.
pub fn chi_square_uniform(observed: &[u64], cells: u64, trials: u64) -> (f64, u64, f64) {
    assert!(cells > 0, "need at least one cell");
    assert!(observed.len() as u64 <= cells, "more counts than cells");
    debug_assert_eq!(observed.iter().sum::<u64>(), trials);
    let expected = trials as f64 / cells as f64;
    let mut statistic: f64 = observed
        .iter()
        .map(|&o| {
            let d = o as f64 - expected;
            d * d / expected
        })
        .sum();
    statistic += (cells - observed.len() as u64) as f64 * expected;
    let df = cells - 1;
    (statistic, df, chi_square_p_value(statistic, df))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() < tol, "{a} vs {b}");
    }

    #[test]
    fn ln_gamma_known_values() {
        close(ln_gamma(1.0), 0.0, 1e-14);
        close(ln_gamma(2.0), 0.0, 1e-14);
        close(ln_gamma(0.5), 0.572_364_942_924_700_1, 1e-13); // ln sqrt(pi)
        close(ln_gamma(5.0), 24f64.ln(), 1e-13);
        close(ln_gamma(10.5), 13.940_625_219_403_763, 1e-11);
    }

    #[test]
    fn q_with_shape_one_is_the_exponential_tail() {
        // Q(1, x) = exp(-x); equivalently chi-square with df = 2.
        for x in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
            close(gamma_q(1.0, x), (-x).exp(), 1e-12);
            close(chi_square_p_value(2.0 * x, 2), (-x).exp(), 1e-12);
        }
    }

    #[test]
    fn p_plus_q_is_one() {
        for s in [0.5, 1.0, 2.5, 7.0, 31.5] {
            for x in [0.01, 0.7, 3.0, 20.0, 100.0] {
                close(gamma_p(s, x) + gamma_q(s, x), 1.0, 1e-12);
            }
        }
    }

    #[test]
    fn chi_square_critical_point_df1() {
        // 95th percentile of chi-square with one degree of freedom.
        close(chi_square_p_value(3.841_458_820_694_124, 1), 0.05, 1e-10);
    }

    #[test]
    fn chi_square_matches_reference_goodness_of_fit() {
        // Four uniform cells with counts 28, 31, 40, 35.
        let (stat, df, p) = chi_square_uniform(&[28, 31, 40, 35], 4, 134);
        close(stat, 2.417_910_447_761_194, 1e-12);
        assert_eq!(df, 3);
        close(p, 0.490_309_306_965_388_3, 1e-12);
    }

    #[test]
    fn perfectly_uniform_counts_score_zero() {
        let (stat, df, p) = chi_square_uniform(&[8, 8], 2, 16);
        assert_eq!(stat, 0.0);
        assert_eq!(df, 1);
        close(p, 1.0, 1e-12);
    }

    #[test]
    fn direct_formula_arithmetic() {
        // Counts [10, 6] with expectation 8 each: (4 + 4) / 8 = 1.
        let (stat, _, _) = chi_square_uniform(&[10, 6], 2, 16);
        close(stat, 1.0, 1e-12);
    }

    #[test]
    fn missing_cells_count_as_zeros() {
        // One observed cell of 6 in a 3-cell table of 6 trials:
        // (6-2)^2/2 + 2 * (0-2)^2/2 = 8 + 4 = 12.
        let (stat, df, _) = chi_square_uniform(&[6], 3, 6);
        close(stat, 12.0, 1e-12);
        assert_eq!(df, 2);
    }

    #[test]
    fn single_cell_table_is_degenerate() {
        let (stat, df, p) = chi_square_uniform(&[7], 1, 7);
        assert_eq!(stat, 0.0);
        assert_eq!(df, 0);
        assert_eq!(p, 1.0);
    }
}
