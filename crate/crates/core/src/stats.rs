//! Two-sample t-tests, Benjamini-Hochberg adjustment, and grouped
//! feature comparisons.
//!
//! The Student-t tail probability is evaluated through the regularized
//! incomplete beta function (Lentz continued fraction), so there is no
//! dependency on an external statistics crate and the precision (~1e-12)
//! is validated against tabulated values in the tests.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("sample too small: need at least 2 values, got {0}")]
    SampleTooSmall(usize),
    #[error("both samples have zero variance")]
    ZeroVariance,
    #[error("p-value out of [0, 1] at index {index}: {value}")]
    InvalidP { index: usize, value: f64 },
}

/// Which two-sample t statistic to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestVariant {
    /// Unequal-variance statistic with Welch-Satterthwaite degrees of freedom.
    Welch,
    /// Pooled-variance statistic with `n_a + n_b - 2` degrees of freedom.
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    pub p: f64,
}

/// Significance stars assigned from adjusted q-values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Stars {
    None,
    One,
    Two,
    Three,
}

impl Stars {
    pub fn from_q(q: f64, levels: [f64; 3]) -> Stars {
        if q < levels[2] {
            Stars::Three
        } else if q < levels[1] {
            Stars::Two
        } else if q < levels[0] {
            Stars::One
        } else {
            Stars::None
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Stars::None => "",
            Stars::One => "*",
            Stars::Two => "**",
            Stars::Three => "***",
        }
    }
}

impl std::fmt::Display for Stars {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One row of a group-comparison table.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StatTestResult {
    pub feature: String,
    pub mean_p: f64,
    pub mean_np: f64,
    /// `mean_p - mean_np`.
    pub diff: f64,
    pub t_stat: f64,
    pub df: f64,
    pub p_value: f64,
    pub q_value: f64,
    pub stars: Stars,
}

/// A feature that could not be tested, with the reason.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SkippedFeature {
    pub feature: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GroupComparison {
    pub results: Vec<StatTestResult>,
    pub skipped: Vec<SkippedFeature>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_var(xs: &[f64], m: f64) -> f64 {
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Two-sided two-sample t-test.
pub fn t_test(
    sample_a: &[f64],
    sample_b: &[f64],
    variant: TestVariant,
) -> Result<TTest, StatsError> {
    if sample_a.len() < 2 {
        return Err(StatsError::SampleTooSmall(sample_a.len()));
    }
    if sample_b.len() < 2 {
        return Err(StatsError::SampleTooSmall(sample_b.len()));
    }
    let (na, nb) = (sample_a.len() as f64, sample_b.len() as f64);
    let (ma, mb) = (mean(sample_a), mean(sample_b));
    let (va, vb) = (sample_var(sample_a, ma), sample_var(sample_b, mb));
    if va + vb == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let (t, df) = match variant {
        TestVariant::Welch => {
            let se2 = va / na + vb / nb;
            let t = (ma - mb) / se2.sqrt();
            let df = se2 * se2
                / ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
            (t, df)
        }
        TestVariant::Pooled => {
            let df = na + nb - 2.0;
            let sp2 = ((na - 1.0) * va + (nb - 1.0) * vb) / df;
            let t = (ma - mb) / (sp2 * (1.0 / na + 1.0 / nb)).sqrt();
            (t, df)
        }
    };
    Ok(TTest {
        t,
        df,
        p: student_t_two_sided_p(t, df),
    })
}

/// Two-sided tail probability of the t distribution:
/// `p = I_x(df/2, 1/2)` with `x = df / (df + t^2)`.
pub fn student_t_two_sided_p(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    let x = df / (df + t * t);
    reg_inc_beta(df / 2.0, 0.5, x).clamp(0.0, 1.0)
}

// Lanczos approximation (g = 7, n = 9).
fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection formula.
        std::f64::consts::PI.ln() - (std::f64::consts::PI * x).sin().ln() - ln_gamma(1.0 - x)
    } else {
        let x = x - 1.0;
        let mut a = COEF[0];
        let t = x + 7.5;
        for (i, &c) in COEF.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
    }
}

// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const EPS: f64 = 1e-15;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function `I_x(a, b)`.
fn reg_inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_bt = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let bt = ln_bt.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        bt * beta_cf(a, b, x) / a
    } else {
        1.0 - bt * beta_cf(b, a, 1.0 - x) / b
    }
}

fn validate_p(p_values: &[f64]) -> Result<(), StatsError> {
    for (index, &value) in p_values.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(StatsError::InvalidP { index, value });
        }
    }
    Ok(())
}

fn sorted_order(p_values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..p_values.len()).collect();
    // Stable over ties: secondary key is the original index.
    order.sort_by(|&a, &b| p_values[a].partial_cmp(&p_values[b]).unwrap().then(a.cmp(&b)));
    order
}

/// Benjamini-Hochberg adjusted q-values, in input order.
///
/// `q_(i) = min_{j >= i} (p_(j) * m / j)`, clamped to 1.
pub fn benjamini_hochberg(p_values: &[f64]) -> Result<Vec<f64>, StatsError> {
    validate_p(p_values)?;
    let m = p_values.len();
    let order = sorted_order(p_values);
    let mut q = vec![0.0; m];
    let mut running_min = f64::INFINITY;
    for rank in (1..=m).rev() {
        let idx = order[rank - 1];
        let candidate = p_values[idx] * m as f64 / rank as f64;
        running_min = running_min.min(candidate);
        q[idx] = running_min.min(1.0);
    }
    Ok(q)
}

/// Step-up rejection decisions at FDR `level`, in input order.
///
/// Rejects the `k` smallest p-values where `k` is the largest rank with
/// `p_(k) <= k * level / m`.
pub fn bh_reject(p_values: &[f64], level: f64) -> Result<Vec<bool>, StatsError> {
    validate_p(p_values)?;
    let m = p_values.len();
    let order = sorted_order(p_values);
    let mut cutoff = 0;
    for rank in (1..=m).rev() {
        if p_values[order[rank - 1]] <= rank as f64 * level / m as f64 {
            cutoff = rank;
            break;
        }
    }
    let mut reject = vec![false; m];
    for &idx in order.iter().take(cutoff) {
        reject[idx] = true;
    }
    Ok(reject)
}

/// Per-feature two-group comparison with joint BH adjustment.
///
/// Each entry is `(feature name, persistent sample, non-persistent sample)`.
/// Features whose t-test fails are reported in `skipped` and excluded from
/// the BH family, so `m` equals the number of tested features.
pub fn compare_groups(
    samples: &[(String, Vec<f64>, Vec<f64>)],
    variant: TestVariant,
    alpha_levels: [f64; 3],
) -> GroupComparison {
    let mut results = Vec::new();
    let mut skipped = Vec::new();
    for (feature, a, b) in samples {
        match t_test(a, b, variant) {
            Ok(tt) => {
                let mean_p = mean(a);
                let mean_np = mean(b);
                results.push(StatTestResult {
                    feature: feature.clone(),
                    mean_p,
                    mean_np,
                    diff: mean_p - mean_np,
                    t_stat: tt.t,
                    df: tt.df,
                    p_value: tt.p,
                    q_value: 0.0,
                    stars: Stars::None,
                });
            }
            Err(err) => skipped.push(SkippedFeature {
                feature: feature.clone(),
                reason: err.to_string(),
            }),
        }
    }
    let p_values: Vec<f64> = results.iter().map(|r| r.p_value).collect();
    if !p_values.is_empty() {
        let q = benjamini_hochberg(&p_values).expect("p-values from t_test are in [0, 1]");
        for (r, q) in results.iter_mut().zip(q) {
            r.q_value = q;
            r.stars = Stars::from_q(q, alpha_levels);
        }
    }
    GroupComparison { results, skipped }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn pooled_example_matches_hand_computation() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [2.0, 3.0, 4.0, 5.0, 6.0];
        let tt = t_test(&a, &b, TestVariant::Pooled).unwrap();
        assert!((tt.t - -1.0).abs() < 1e-12);
        assert!((tt.df - 8.0).abs() < 1e-12);
        assert!((tt.p - 0.34659350708733416).abs() < 1e-9);
    }

    #[test]
    fn welch_equals_pooled_for_equal_sizes_and_variances() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [2.0, 3.0, 4.0, 5.0, 6.0];
        let tt = t_test(&a, &b, TestVariant::Welch).unwrap();
        assert!((tt.t - -1.0).abs() < 1e-12);
        assert!((tt.df - 8.0).abs() < 1e-9);
        assert!((tt.p - 0.34659350708733416).abs() < 1e-9);
    }

    #[test]
    fn identical_samples_give_t_zero_p_one() {
        let a = [1.0, 2.0, 3.0];
        let tt = t_test(&a, &a, TestVariant::Welch).unwrap();
        assert_eq!(tt.t, 0.0);
        assert_eq!(tt.p, 1.0);
    }

    #[test]
    fn undersized_sample_errors() {
        assert_eq!(
            t_test(&[1.0], &[1.0, 2.0], TestVariant::Welch),
            Err(StatsError::SampleTooSmall(1))
        );
    }

    #[test]
    fn zero_combined_variance_errors() {
        assert_eq!(
            t_test(&[2.0, 2.0], &[3.0, 3.0], TestVariant::Pooled),
            Err(StatsError::ZeroVariance)
        );
    }

    // Reference values computed with an independent t-distribution implementation.
    #[test]
    fn t_cdf_matches_tabulated_values() {
        let cases = [
            (1.0, 1.0, 0.49999999999999956),
            (4.302652729911275, 2.0, 0.04999999999651663),
            (1.0, 8.0, 0.34659350708733416),
            (2.2281388519649385, 10.0, 0.05000000000180862),
            (2.0422724563012373, 30.0, 0.05000000000000013),
            (2.5, 3.0, 0.08770664700806555),
            (1.984, 100.0, 0.04999677379616732),
        ];
        for (t, df, expected) in cases {
            let p = student_t_two_sided_p(t, df);
            assert!(
                (p - expected).abs() < 1e-8,
                "t={t} df={df}: got {p}, want {expected}"
            );
        }
        assert_eq!(student_t_two_sided_p(0.0, 5.0), 1.0);
    }

    #[test]
    fn bh_examples() {
        assert_eq!(benjamini_hochberg(&[0.04]).unwrap(), vec![0.04]);
        let q = benjamini_hochberg(&[0.01, 0.02, 0.03, 0.04, 0.05]).unwrap();
        for v in q {
            assert!((v - 0.05).abs() < 1e-12);
        }
        let q = benjamini_hochberg(&[0.005, 0.9]).unwrap();
        assert!((q[0] - 0.01).abs() < 1e-12);
        assert!((q[1] - 0.9).abs() < 1e-12);
    }

    #[test]
    fn bh_rejects_out_of_range_p() {
        assert!(matches!(
            benjamini_hochberg(&[0.5, 1.2]),
            Err(StatsError::InvalidP { index: 1, .. })
        ));
        assert!(benjamini_hochberg(&[0.5, f64::NAN]).is_err());
    }

    /// Literal step-up definition, O(m^2), kept independent of the library path.
    fn brute_force_q(p: &[f64]) -> Vec<f64> {
        let m = p.len();
        let order = sorted_order(p);
        let mut q = vec![0.0; m];
        for (pos, &idx) in order.iter().enumerate() {
            let mut best = f64::INFINITY;
            for rank in (pos + 1)..=m {
                best = best.min(p[order[rank - 1]] * m as f64 / rank as f64);
            }
            q[idx] = best.min(1.0);
        }
        q
    }

    fn brute_force_reject(p: &[f64], level: f64) -> Vec<bool> {
        let m = p.len();
        let order = sorted_order(p);
        let mut k = 0;
        for rank in 1..=m {
            if p[order[rank - 1]] <= rank as f64 * level / m as f64 {
                k = rank;
            }
        }
        let mut out = vec![false; m];
        for &idx in order.iter().take(k) {
            out[idx] = true;
        }
        out
    }

    #[test]
    fn bh_matches_brute_force_on_random_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..300 {
            let len = rng.random_range(1..=50);
            let p: Vec<f64> = (0..len).map(|_| rng.random::<f64>()).collect();
            assert_eq!(benjamini_hochberg(&p).unwrap(), brute_force_q(&p));
            let level = rng.random::<f64>();
            assert_eq!(bh_reject(&p, level).unwrap(), brute_force_reject(&p, level));
        }
    }

    proptest! {
        #[test]
        fn t_is_antisymmetric(
            a in proptest::collection::vec(-50.0..50.0f64, 2..12),
            b in proptest::collection::vec(-50.0..50.0f64, 2..12),
        ) {
            if let (Ok(ab), Ok(ba)) = (
                t_test(&a, &b, TestVariant::Welch),
                t_test(&b, &a, TestVariant::Welch),
            ) {
                prop_assert!((ab.t + ba.t).abs() < 1e-9);
                prop_assert!((ab.p - ba.p).abs() < 1e-9);
            }
        }

        #[test]
        fn bh_is_permutation_equivariant(
            p in proptest::collection::vec(0.0..=1.0f64, 1..30),
            seed in 0u64..1000,
        ) {
            let mut idx: Vec<usize> = (0..p.len()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            use rand::seq::SliceRandom;
            idx.shuffle(&mut rng);
            let permuted: Vec<f64> = idx.iter().map(|&i| p[i]).collect();
            let q = benjamini_hochberg(&p).unwrap();
            let q_perm = benjamini_hochberg(&permuted).unwrap();
            for (pos, &i) in idx.iter().enumerate() {
                prop_assert_eq!(q_perm[pos], q[i]);
            }
        }

        #[test]
        fn lowering_one_p_never_shrinks_rejection_set(
            p in proptest::collection::vec(0.0..=1.0f64, 1..25),
            which in 0usize..25,
            factor in 0.0..1.0f64,
            level in 0.01..0.5f64,
        ) {
            let which = which % p.len();
            let before = bh_reject(&p, level).unwrap();
            let mut lowered = p.clone();
            lowered[which] *= factor;
            let after = bh_reject(&lowered, level).unwrap();
            for i in 0..p.len() {
                prop_assert!(!before[i] || after[i], "rejection lost at {}", i);
            }
        }

        #[test]
        fn rejection_set_is_prefix_of_sorted_p(
            p in proptest::collection::vec(0.0..=1.0f64, 1..25),
            level in 0.01..0.5f64,
        ) {
            let reject = bh_reject(&p, level).unwrap();
            let order = sorted_order(&p);
            let flags: Vec<bool> = order.iter().map(|&i| reject[i]).collect();
            let first_keep = flags.iter().position(|&r| !r).unwrap_or(flags.len());
            for &f in &flags[first_keep..] {
                prop_assert!(!f);
            }
        }
    }

    #[test]
    fn compare_groups_flags_planted_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let a: Vec<f64> = (0..50).map(|_| 10.0 + normal.sample(&mut rng)).collect();
        let b: Vec<f64> = (0..50).map(|_| normal.sample(&mut rng)).collect();
        let noise_a: Vec<f64> = (0..50).map(|_| normal.sample(&mut rng)).collect();
        let noise_b: Vec<f64> = (0..50).map(|_| normal.sample(&mut rng)).collect();
        let cmp = compare_groups(
            &[
                ("planted".into(), a, b),
                ("noise".into(), noise_a, noise_b),
            ],
            TestVariant::Welch,
            [0.05, 0.01, 0.001],
        );
        let planted = &cmp.results[0];
        assert!(planted.q_value < 0.001);
        assert_eq!(planted.stars, Stars::Three);
        assert!(planted.diff > 9.0);
    }

    #[test]
    fn compare_groups_identical_feature_gets_no_stars() {
        let sample = vec![1.0, 2.0, 3.0, 4.0];
        let cmp = compare_groups(
            &[("flat".into(), sample.clone(), sample)],
            TestVariant::Welch,
            [0.05, 0.01, 0.001],
        );
        assert_eq!(cmp.results[0].p_value, 1.0);
        assert_eq!(cmp.results[0].stars, Stars::None);
    }

    #[test]
    fn compare_groups_reports_skipped_features() {
        let cmp = compare_groups(
            &[
                ("ok".into(), vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]),
                ("degenerate".into(), vec![1.0, 1.0], vec![1.0, 1.0]),
            ],
            TestVariant::Welch,
            [0.05, 0.01, 0.001],
        );
        assert_eq!(cmp.results.len(), 1);
        assert_eq!(cmp.skipped.len(), 1);
        assert_eq!(cmp.skipped[0].feature, "degenerate");
    }
}
