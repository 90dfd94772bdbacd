//! Small statistics toolbox used across the pipeline: simple ordinary
//! least squares, Student-t tail probabilities and quantiles, and the
//! one-sample t-test.

use statrs::distribution::{ContinuousCDF, StudentsT};

/// Result of a simple (one predictor) least-squares fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OlsFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination.
    pub r2: f64,
    /// Two-sided p-value for the slope.
    pub p_slope: f64,
    pub n: usize,
}

/// Fits `y = intercept + slope * x`. Returns `None` when fewer than three
/// points are given or either variable has zero variance (the fit and its
/// R-squared are undefined there).
pub fn ols(x: &[f64], y: &[f64]) -> Option<OlsFit> {
    assert_eq!(x.len(), y.len(), "ols: input length mismatch");
    let n = x.len();
    if n < 3 {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse = (syy - slope * sxy).max(0.0);
    let r2 = 1.0 - sse / syy;
    let df = nf - 2.0;
    let p_slope = if sse == 0.0 {
        0.0
    } else {
        let se = (sse / df / sxx).sqrt();
        let t = slope / se;
        2.0 * t_sf(t.abs(), df)
    };
    Some(OlsFit {
        slope,
        intercept,
        r2,
        p_slope,
        n,
    })
}

/// Survival function of Student's t: P(T > t) for `df` degrees of freedom.
pub fn t_sf(t: f64, df: f64) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, df).expect("valid t distribution");
    1.0 - dist.cdf(t)
}

/// Two-sided quantile helper: returns t such that P(|T| <= t) = `confidence`.
pub fn t_critical(confidence: f64, df: f64) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, df).expect("valid t distribution");
    dist.inverse_cdf(0.5 + confidence / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    /// One-sided p-value for mean > mu0.
    pub p_greater: f64,
}

/// One-sample t-test of mean(sample) > `mu0`. Returns `None` for fewer than
/// two observations or a zero-variance sample.
pub fn one_sample_t_greater(sample: &[f64], mu0: f64) -> Option<TTest> {
    let n = sample.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mean = sample.iter().sum::<f64>() / nf;
    let var = sample.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    if var <= 0.0 {
        return None;
    }
    let t = (mean - mu0) / (var.sqrt() / nf.sqrt());
    let df = nf - 1.0;
    Some(TTest {
        t,
        df,
        p_greater: t_sf(t, df),
    })
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
pub fn sample_sd(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt()
}
