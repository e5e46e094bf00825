//! Descriptive statistics, one-way ANOVA and Welch t-tests.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use crate::error::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance with `n - 1` in the denominator; zero for fewer than two
/// values.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn std_dev(xs: &[f64]) -> f64 {
    variance(xs).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnovaResult {
    pub f: f64,
    pub p: f64,
    pub df_between: usize,
    pub df_within: usize,
}

fn check_groups(groups: &[Vec<f64>]) -> Result<()> {
    if groups.len() < 2 {
        return Err(Error::Config(format!("at least two groups are required, got {}", groups.len())));
    }
    if let Some(k) = groups.iter().position(|g| g.len() < 2) {
        return Err(Error::Config(format!("group {k} has fewer than two samples")));
    }
    if groups.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

pub fn anova_oneway(groups: &[Vec<f64>]) -> Result<AnovaResult> {
    check_groups(groups)?;
    let n: usize = groups.iter().map(Vec::len).sum();
    let k = groups.len();
    let grand = groups.iter().flatten().sum::<f64>() / n as f64;
    let ss_between: f64 = groups.iter().map(|g| g.len() as f64 * (mean(g) - grand).powi(2)).sum();
    let ss_within: f64 = groups
        .iter()
        .map(|g| {
            let m = mean(g);
            g.iter().map(|x| (x - m).powi(2)).sum::<f64>()
        })
        .sum();
    let (df_between, df_within) = (k - 1, n - k);
    let ms_between = ss_between / df_between as f64;
    let ms_within = ss_within / df_within as f64;
    let (f, p) = if ms_within == 0.0 {
        if ms_between == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY, 0.0)
        }
    } else {
        let f = ms_between / ms_within;
        let dist = FisherSnedecor::new(df_between as f64, df_within as f64).map_err(|e| Error::Config(e.to_string()))?;
        (f, dist.sf(f))
    };
    Ok(AnovaResult {
        f,
        p,
        df_between,
        df_within,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WelchResult {
    /// `(mean(a) - mean(b)) / se`.
    pub t: f64,
    pub df: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alternative {
    TwoSided,
    /// `mean(a) > mean(b)`.
    Greater,
    /// `mean(a) < mean(b)`.
    Less,
}

pub fn welch_t_test(a: &[f64], b: &[f64], alternative: Alternative) -> Result<WelchResult> {
    check_groups(&[a.to_vec(), b.to_vec()])?;
    let (va, vb) = (variance(a) / a.len() as f64, variance(b) / b.len() as f64);
    let diff = mean(a) - mean(b);
    let se2 = va + vb;
    if se2 == 0.0 {
        let t = if diff == 0.0 { 0.0 } else { diff.signum() * f64::INFINITY };
        let p = match alternative {
            _ if diff == 0.0 => 1.0,
            Alternative::TwoSided => 0.0,
            Alternative::Greater => (diff < 0.0) as u8 as f64,
            Alternative::Less => (diff > 0.0) as u8 as f64,
        };
        return Ok(WelchResult { t, df: f64::INFINITY, p });
    }
    let t = diff / se2.sqrt();
    let df = se2.powi(2)
        / (va.powi(2) / (a.len() - 1) as f64 + vb.powi(2) / (b.len() - 1) as f64);
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Config(e.to_string()))?;
    let p = match alternative {
        Alternative::TwoSided => (2.0 * dist.sf(t.abs())).min(1.0),
        Alternative::Greater => dist.sf(t),
        Alternative::Less => dist.cdf(t),
    };
    Ok(WelchResult { t, df, p })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseRow {
    #[serde(rename = "index_a")]
    pub a: usize,
    #[serde(rename = "index_b")]
    pub b: usize,
    /// `mean(a) - mean(b)`.
    pub mean_difference: f64,
    pub t: f64,
    pub p: f64,
    /// `p` times the number of pairs, capped at 1.
    pub corrected_p: f64,
    pub significant: bool,
}

/// Bonferroni-corrected two-sided Welch tests over every pair of groups.
pub fn pairwise_compare(groups: &[Vec<f64>], alpha_level: f64) -> Result<Vec<PairwiseRow>> {
    check_groups(groups)?;
    if !(alpha_level > 0.0 && alpha_level < 1.0) {
        return Err(Error::Config(format!("significance level must lie in (0, 1), got {alpha_level}")));
    }
    let k = groups.len();
    let pairs = (k * (k - 1) / 2) as f64;
    let mut rows = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            let w = welch_t_test(&groups[a], &groups[b], Alternative::TwoSided)?;
            let corrected_p = (w.p * pairs).min(1.0);
            rows.push(PairwiseRow {
                a,
                b,
                mean_difference: mean(&groups[a]) - mean(&groups[b]),
                t: w.t,
                p: w.p,
                corrected_p,
                significant: corrected_p < alpha_level,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fixture() -> Vec<Vec<f64>> {
        vec![
            vec![2.1, 3.4, 1.9, 2.8, 3.0],
            vec![4.2, 3.9, 5.1, 4.6],
            vec![3.3, 2.7, 3.8, 3.1, 2.9, 3.6],
        ]
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // Reference values computed independently with scipy.stats.
    #[test]
    fn anova_matches_reference() {
        let r = anova_oneway(&fixture()).unwrap();
        assert!(rel(r.f, 13.714110178169143) < 1e-9);
        assert!(rel(r.p, 0.0007947754174680528) < 1e-6);
        assert_eq!((r.df_between, r.df_within), (2, 12));
    }

    #[test]
    fn pairwise_matches_reference() {
        let rows = pairwise_compare(&fixture(), 0.05).unwrap();
        let expected = [
            (0, 1, -1.8099999999999996, -4.735365076666073, 0.0021455995179804634, 0.00643679855394139),
            (0, 2, -0.5933333333333342, -1.8078753971498058, 0.11501836681127536, 0.3450551004338261),
            (1, 2, 1.2166666666666655, 3.914335722930695, 0.009229538654246602, 0.027688615962739804),
        ];
        for (row, (a, b, diff, t, p, cp)) in rows.iter().zip(expected) {
            assert_eq!((row.a, row.b), (a, b));
            assert!(rel(row.mean_difference, diff) < 1e-9);
            assert!(rel(row.t, t) < 1e-9);
            assert!(rel(row.p, p) < 1e-6);
            assert!(rel(row.corrected_p, cp) < 1e-6);
        }
        assert_eq!(rows.iter().map(|r| r.significant).collect::<Vec<_>>(), vec![true, false, true]);
    }

    #[test]
    fn one_sided_welch_matches_reference() {
        let g = fixture();
        let r = welch_t_test(&g[1], &g[0], Alternative::Greater).unwrap();
        assert!(rel(r.t, 4.735365076666073) < 1e-9);
        assert!(rel(r.p, 0.0010727997589902317) < 1e-6);
        let l = welch_t_test(&g[0], &g[1], Alternative::Less).unwrap();
        assert!(rel(l.p, r.p) < 1e-12);
    }

    #[test]
    fn degenerate_groups() {
        let r = anova_oneway(&[vec![2.0, 2.0, 2.0], vec![2.0, 2.0, 2.0]]).unwrap();
        assert_eq!((r.f, r.p), (0.0, 1.0));
        let r = anova_oneway(&[vec![0.0, 0.0, 0.0], vec![1.0, 1.0, 1.0]]).unwrap();
        assert_eq!((r.f, r.p), (f64::INFINITY, 0.0));
        let r = anova_oneway(&[vec![0.0, 1e-9, 0.0], vec![1.0, 1.0, 1.0 + 1e-9]]).unwrap();
        assert!(r.p < 1e-6);
        assert!(anova_oneway(&[vec![1.0, 2.0]]).is_err());
        assert!(anova_oneway(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn pairwise_extremes() {
        let same = vec![vec![1.0, 2.0, 3.0]; 3];
        assert!(pairwise_compare(&same, 0.05).unwrap().iter().all(|r| !r.significant));
        let far = vec![vec![0.0, 0.1, 0.2], vec![100.0, 100.1, 100.2], vec![200.0, 200.1, 200.3]];
        assert!(pairwise_compare(&far, 0.05).unwrap().iter().all(|r| r.significant));
    }

    proptest! {
        #[test]
        fn p_values_are_probabilities(
            groups in prop::collection::vec(prop::collection::vec(-100.0..100.0f64, 2..10), 2..5)
        ) {
            let r = anova_oneway(&groups).unwrap();
            prop_assert!(r.f >= 0.0 && (0.0..=1.0).contains(&r.p));
            for row in pairwise_compare(&groups, 0.05).unwrap() {
                prop_assert!((0.0..=1.0).contains(&row.corrected_p));
                prop_assert!(row.corrected_p >= row.p);
            }
        }
    }
}
