//! Empirical exceedance probabilities and tail-exponent fitting.

use serde::{Deserialize, Serialize};

use super::trials::TrialSet;
use crate::dist::geometric_grid;
use crate::error::{Error, Result};
use crate::stats::{clopper_pearson, quantile_sorted};

/// Probability window used by the exponent fit.
pub const FIT_WINDOW: (f64, f64) = (1e-3, 0.3);
/// Threshold grid size used by [`fit_tail_exponent`].
pub const FIT_GRID_POINTS: usize = 12;
/// The grid starts at this empirical quantile.
pub const FIT_GRID_START_QUANTILE: f64 = 0.7;
pub const MIN_FIT_POINTS: usize = 4;
const CI_LEVEL: f64 = 0.95;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub threshold: f64,
    /// Number of values `>= threshold`.
    pub count: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// `p̂(s)` = fraction of values `>= s`, with Clopper–Pearson 95% intervals.
pub fn empirical_tail(ts: &TrialSet, thresholds: &[f64]) -> Result<Vec<TailPoint>> {
    tail_of_sorted(&ts.sorted_values(), thresholds)
}

pub(crate) fn tail_of_sorted(values: &[f64], thresholds: &[f64]) -> Result<Vec<TailPoint>> {
    if values.is_empty() {
        return Err(Error::Argument("empirical tail of an empty sample".into()));
    }
    if thresholds.iter().any(|t| t.is_nan()) || thresholds.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Argument(
            "thresholds must be sorted ascending".into(),
        ));
    }
    let n = values.len() as u64;
    Ok(thresholds
        .iter()
        .map(|&s| {
            let count = (values.len() - values.partition_point(|&v| v < s)) as u64;
            let (ci_low, ci_high) = clopper_pearson(count, n, CI_LEVEL);
            TailPoint {
                threshold: s,
                count,
                p_hat: count as f64 / n as f64,
                ci_low,
                ci_high,
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub thresholds: Vec<f64>,
    pub points: Vec<TailPoint>,
    pub center: f64,
    pub scale: f64,
    /// `t = (threshold − center) / scale` per threshold.
    pub t: Vec<f64>,
    /// Whether each point entered the regression.
    pub used: Vec<bool>,
    pub alpha_hat: f64,
    pub c_hat: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
}

/// Least-squares fit of `ln(−ln p) = α̂ ln t + ln ĉ`, using only points
/// with `t > 0` and `p` inside `window`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveFit {
    pub alpha_hat: f64,
    pub c_hat: f64,
    pub r_squared: f64,
    pub used: Vec<bool>,
}

pub fn fit_tail_curve(t: &[f64], p: &[f64], window: (f64, f64)) -> Result<CurveFit> {
    if t.len() != p.len() {
        return Err(Error::Argument(format!(
            "{} t values but {} probabilities",
            t.len(),
            p.len()
        )));
    }
    let used: Vec<bool> = t
        .iter()
        .zip(p)
        .map(|(&t, &p)| t > 0.0 && t.is_finite() && p >= window.0 && p <= window.1 && p < 1.0)
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = t
        .iter()
        .zip(p)
        .zip(&used)
        .filter(|(_, &u)| u)
        .map(|((&t, &p), _)| (t.ln(), (-p.ln()).ln()))
        .unzip();
    if xs.len() < MIN_FIT_POINTS {
        return Err(Error::Fit {
            reason: format!(
                "need at least {MIN_FIT_POINTS} thresholds with t > 0 and p in [{}, {}]",
                window.0, window.1
            ),
            usable: xs.len(),
            required: MIN_FIT_POINTS,
        });
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::Fit {
            reason: "usable thresholds share a single t value".into(),
            usable: xs.len(),
            required: MIN_FIT_POINTS,
        });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).min(1.0)
    };
    Ok(CurveFit {
        alpha_hat: slope,
        c_hat: intercept.exp(),
        r_squared,
        used,
    })
}

/// Threshold grid: 12 geometric points from the empirical 70th percentile to
/// the largest value.
pub fn fit_thresholds(sorted_values: &[f64]) -> Result<Vec<f64>> {
    let lo = quantile_sorted(sorted_values, FIT_GRID_START_QUANTILE);
    let hi = *sorted_values.last().expect("nonempty");
    if lo.is_nan() || lo <= 0.0 || hi <= lo {
        return Err(Error::Fit {
            reason: format!("no spread above the 70th percentile (p70 = {lo}, max = {hi})"),
            usable: 0,
            required: MIN_FIT_POINTS,
        });
    }
    Ok(geometric_grid(lo, hi, FIT_GRID_POINTS))
}

/// Fits `α̂, ĉ` to `p̂` at thresholds `center + t·scale`.
pub fn fit_tail_exponent(ts: &TrialSet, center: f64, scale: f64) -> Result<TailFit> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::parameter(
            "scale",
            format!("must be positive, got {scale}"),
        ));
    }
    if !center.is_finite() {
        return Err(Error::parameter(
            "center",
            format!("must be finite, got {center}"),
        ));
    }
    let values = ts.sorted_values();
    let thresholds = fit_thresholds(&values)?;
    let points = tail_of_sorted(&values, &thresholds)?;
    let t: Vec<f64> = thresholds.iter().map(|s| (s - center) / scale).collect();
    let p: Vec<f64> = points.iter().map(|pt| pt.p_hat).collect();
    let fit = fit_tail_curve(&t, &p, FIT_WINDOW)?;
    Ok(TailFit {
        thresholds,
        points,
        center,
        scale,
        t,
        used: fit.used,
        alpha_hat: fit.alpha_hat,
        c_hat: fit.c_hat,
        r_squared: fit.r_squared,
        window: FIT_WINDOW,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantileScaling {
    /// Exceedance levels `e^{-1}, e^{-2}, e^{-3}`.
    pub levels: Vec<f64>,
    pub thresholds: Vec<f64>,
    /// `t(q) = (threshold(q) − center) / scale`.
    pub t: Vec<f64>,
    /// `(t(e⁻³) − t(e⁻²)) / (t(e⁻²) − t(e⁻¹))`.
    pub observed_ratio: f64,
    /// Same ratio under `t ∝ (ln 1/q)^{1/α}`.
    pub predicted_ratio: f64,
    /// `max(observed/predicted, predicted/observed)`; infinite when a
    /// spacing is not positive.
    pub factor: f64,
}

/// Compares the spacing of the thresholds at `q = e^{-1}, e^{-2}, e^{-3}`
/// with `(ln 1/q)^{1/α}` scaling.
pub fn quantile_scaling(
    ts: &TrialSet,
    alpha: f64,
    center: f64,
    scale: f64,
) -> Result<QuantileScaling> {
    if !(alpha > 0.0 && scale > 0.0) {
        return Err(Error::parameter("alpha/scale", "must be positive"));
    }
    let values = ts.sorted_values();
    let levels: Vec<f64> = (1..=3).map(|k| (-(k as f64)).exp()).collect();
    let thresholds: Vec<f64> = levels
        .iter()
        .map(|q| quantile_sorted(&values, 1.0 - q))
        .collect();
    let t: Vec<f64> = thresholds.iter().map(|s| (s - center) / scale).collect();
    let (d1, d2) = (t[1] - t[0], t[2] - t[1]);
    let observed_ratio = d2 / d1;
    let g = |l: f64| l.powf(1.0 / alpha);
    let predicted_ratio = (g(3.0) - g(2.0)) / (g(2.0) - g(1.0));
    let factor = if d1 > 0.0 && d2 > 0.0 {
        (observed_ratio / predicted_ratio).max(predicted_ratio / observed_ratio)
    } else {
        f64::INFINITY
    };
    Ok(QuantileScaling {
        levels,
        thresholds,
        t,
        observed_ratio,
        predicted_ratio,
        factor,
    })
}
