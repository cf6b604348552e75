//! Welch's t-test on binary observation vectors, self-contained.
//!
//! The p-value comes from the exact relationship between the Student-t CDF
//! and the regularized incomplete beta function:
//!
//! ```text
//! two-tailed p = I_x(df/2, 1/2)   with   x = df / (df + t²)
//! ```
//!
//! The incomplete beta is evaluated with a modified Lentz continued
//! fraction, and log-gamma with a Lanczos approximation, so no statistics
//! dependency is needed at runtime.

use serde::Serialize;

use crate::error::{Error, Result};

/// Outcome of a Welch two-sample t-test.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TTest {
    /// Test statistic `(mean(g') - mean(g)) / se`. Infinite when both
    /// groups are constant with different means.
    pub t: f64,
    /// Welch–Satterthwaite degrees of freedom.
    pub df: f64,
    /// p-value; two-tailed unless the one-sided variant was requested.
    pub p: f64,
    pub n_baseline: usize,
    pub n_triggered: usize,
    pub mean_baseline: f64,
    pub mean_triggered: f64,
}

fn mean_and_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Welch's unequal-variance t-test of `g_prime` (triggered) against `g`
/// (baseline).
///
/// Degenerate inputs where both groups have zero variance short-circuit:
/// equal means give `(t, p) = (0, 1)`, unequal means give `t = ±∞, p = 0`
/// (direction-aware when `one_sided`). With `one_sided`, the alternative is
/// `mean(g') > mean(g)`.
pub fn welch_t_test(g: &[f64], g_prime: &[f64], one_sided: bool) -> Result<TTest> {
    if g.len() < 2 || g_prime.len() < 2 {
        return Err(Error::TooFewObservations {
            needed: 2,
            got: g.len().min(g_prime.len()),
        });
    }
    let (mean_g, var_g) = mean_and_var(g);
    let (mean_gp, var_gp) = mean_and_var(g_prime);
    let n_g = g.len() as f64;
    let n_gp = g_prime.len() as f64;

    if var_g == 0.0 && var_gp == 0.0 {
        let (t, p) = if mean_gp == mean_g {
            (0.0, 1.0)
        } else {
            let t = if mean_gp > mean_g {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            };
            let p = if one_sided && t.is_sign_negative() {
                1.0
            } else {
                0.0
            };
            (t, p)
        };
        return Ok(TTest {
            t,
            df: n_g + n_gp - 2.0,
            p,
            n_baseline: g.len(),
            n_triggered: g_prime.len(),
            mean_baseline: mean_g,
            mean_triggered: mean_gp,
        });
    }

    let se_sq = var_gp / n_gp + var_g / n_g;
    let t = (mean_gp - mean_g) / se_sq.sqrt();
    let df = se_sq.powi(2)
        / ((var_gp / n_gp).powi(2) / (n_gp - 1.0) + (var_g / n_g).powi(2) / (n_g - 1.0));
    let p_two = students_t_two_tailed_p(t, df);
    let p = if one_sided {
        if t >= 0.0 {
            p_two / 2.0
        } else {
            1.0 - p_two / 2.0
        }
    } else {
        p_two
    };
    Ok(TTest {
        t,
        df,
        p,
        n_baseline: g.len(),
        n_triggered: g_prime.len(),
        mean_baseline: mean_g,
        mean_triggered: mean_gp,
    })
}

/// Two-tailed p-value of a Student-t statistic.
pub fn students_t_two_tailed_p(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    if t == 0.0 {
        return 1.0;
    }
    let x = df / (df + t * t);
    regularized_incomplete_beta(df / 2.0, 0.5, x)
}

const BETA_TOL: f64 = 1e-12;
const BETA_MAX_ITER: usize = 500;
const FPMIN: f64 = 1e-300;

/// Regularized incomplete beta function `I_x(a, b)`.
///
/// Continued-fraction evaluation (modified Lentz), switching to the
/// complement when `x` is past the bulk of the distribution so the fraction
/// always converges quickly. Converges to a relative term change below
/// `1e-12`.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0, "beta parameters must be positive");
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b)
        + a * x.ln()
        + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=BETA_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        // Even step.
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        // Odd step.
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < BETA_TOL {
            break;
        }
    }
    h
}

/// Natural log of the gamma function (Lanczos, g = 7, 9 terms).
pub fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 8] = [
        676.5203681218851,
        -1259.1392167224028,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507343278686905,
        -0.13857109526572012,
        9.984_369_578_019_572e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // Reflection formula.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = 0.999_999_999_999_809_9;
    for (i, c) in COEFFS.iter().enumerate() {
        acc += c / (x + (i as f64) + 1.0);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary(ones: usize, zeros: usize) -> Vec<f64> {
        let mut v = vec![1.0; ones];
        v.extend(std::iter::repeat(0.0).take(zeros));
        v
    }

    #[test]
    fn ln_gamma_matches_known_values() {
        // Γ(1) = Γ(2) = 1, Γ(5) = 24, Γ(0.5) = √π.
        assert!(ln_gamma(1.0).abs() < 1e-12);
        assert!(ln_gamma(2.0).abs() < 1e-12);
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-12);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-12);
    }

    #[test]
    fn incomplete_beta_symmetry() {
        // I_x(a,b) = 1 - I_{1-x}(b,a)
        for (a, b, x) in [(2.0, 3.0, 0.3), (68.0, 0.5, 0.9), (0.5, 0.5, 0.123)] {
            let lhs = regularized_incomplete_beta(a, b, x);
            let rhs = 1.0 - regularized_incomplete_beta(b, a, 1.0 - x);
            assert!((lhs - rhs).abs() < 1e-12, "({a},{b},{x}): {lhs} vs {rhs}");
        }
    }

    #[test]
    fn welch_matches_reference_example() {
        // 5/100 baseline successes vs 60/100 triggered successes.
        // Reference (SciPy ttest_ind, equal_var=False):
        //   t = 10.206136261647, df = 136.710347708051, p = 1.572100913639e-18
        let g = binary(5, 95);
        let gp = binary(60, 40);
        let r = welch_t_test(&g, &gp, false).unwrap();
        assert!((r.t - 10.206136261647).abs() < 1e-9, "t = {}", r.t);
        assert!((r.df - 136.710347708051).abs() < 1e-6, "df = {}", r.df);
        assert!(r.p < 1e-15, "p = {}", r.p);
        assert!((r.p - 1.572100913639e-18).abs() / 1.572100913639e-18 < 1e-6);
        assert_eq!(r.n_baseline, 100);
        assert!((r.mean_triggered - 0.6).abs() < 1e-12);
    }

    #[test]
    fn p_values_match_t_tables() {
        // Classic two-tailed 5% critical values.
        for (t, df, expected) in [
            (12.7062047364, 1.0, 0.05000080),
            (2.2281388520, 10.0, 0.05001177),
            (1.9839715184, 100.0, 0.04999677),
        ] {
            let p = students_t_two_tailed_p(t, df);
            assert!(
                (p - expected).abs() < 1e-4,
                "t={t}, df={df}: p={p} vs {expected}"
            );
        }
    }

    #[test]
    fn extreme_tail_stays_accurate() {
        // Reference: SciPy 2*(1-cdf) at t=36, df=400 -> 1.533009809843e-127.
        let p = students_t_two_tailed_p(36.0, 400.0);
        let expected = 1.533009809843e-127;
        assert!((p - expected).abs() / expected < 1e-6, "p = {p:e}");
    }

    #[test]
    fn identical_groups_give_t_zero_p_one() {
        let g = binary(10, 10);
        let r = welch_t_test(&g, &g, false).unwrap();
        assert_eq!(r.t, 0.0);
        assert_eq!(r.p, 1.0);
    }

    #[test]
    fn swapping_groups_negates_t_keeps_p() {
        let g = binary(8, 42);
        let gp = binary(30, 20);
        let a = welch_t_test(&g, &gp, false).unwrap();
        let b = welch_t_test(&gp, &g, false).unwrap();
        assert!((a.t + b.t).abs() < 1e-12);
        assert!((a.p - b.p).abs() < 1e-12);
    }

    #[test]
    fn degenerate_zero_variance_rules() {
        let zeros = binary(0, 10);
        let ones = binary(10, 0);
        let r = welch_t_test(&zeros, &ones, false).unwrap();
        assert!(r.t.is_infinite() && r.t > 0.0);
        assert_eq!(r.p, 0.0);
        let r = welch_t_test(&ones, &zeros, false).unwrap();
        assert!(r.t.is_infinite() && r.t < 0.0);
        assert_eq!(r.p, 0.0);
        let r = welch_t_test(&ones, &ones, false).unwrap();
        assert_eq!(r.t, 0.0);
        assert_eq!(r.p, 1.0);
    }

    #[test]
    fn one_sided_is_direction_aware() {
        let g = binary(5, 95);
        let gp = binary(60, 40);
        let two = welch_t_test(&g, &gp, false).unwrap();
        let one = welch_t_test(&g, &gp, true).unwrap();
        assert!((one.p - two.p / 2.0).abs() < 1e-18);
        // Wrong direction: p above one half.
        let wrong = welch_t_test(&gp, &g, true).unwrap();
        assert!(wrong.p > 0.5);
        // Degenerate wrong direction.
        let zeros = binary(0, 10);
        let ones = binary(10, 0);
        let r = welch_t_test(&ones, &zeros, true).unwrap();
        assert_eq!(r.p, 1.0);
    }

    #[test]
    fn too_few_observations_is_an_error() {
        let err = welch_t_test(&[1.0], &[0.0, 1.0], false).unwrap_err();
        assert!(matches!(
            err,
            Error::TooFewObservations { needed: 2, got: 1 }
        ));
    }

    #[test]
    fn non_binary_real_vectors_also_work() {
        // The implementation is general; sanity-check a textbook case.
        let a = [27.5, 21.0, 19.0, 23.6, 17.0, 17.9, 16.9, 20.1, 21.9, 22.6, 23.1, 19.6, 19.0, 21.7, 21.4];
        let b = [27.1, 22.0, 20.8, 23.4, 23.4, 23.5, 25.8, 22.0, 24.8, 20.2, 21.9, 22.1, 22.9, 30.0, 23.9];
        let r = welch_t_test(&a, &b, false).unwrap();
        // SciPy ttest_ind(b, a, equal_var=False): t = 2.8352638006644821,
        // p = 8.4527324374434366e-03
        assert!((r.t - 2.8352638006644821).abs() < 1e-9);
        assert!((r.p - 8.4527324374434366e-03).abs() < 1e-9);
    }
}
