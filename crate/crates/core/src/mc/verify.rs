//! End-to-end Monte Carlo verifications built on the trial engine.

use serde::{Deserialize, Serialize};

use super::solver::{component_norm, SolverOptions};
use super::tail::{
    fit_tail_exponent, quantile_scaling, tail_of_sorted, QuantileScaling, TailFit, TailPoint,
};
use super::trials::{
    empirical_moment_norm, estimate_mean, moment_order_is_reliable, run_trials, MeanEstimate,
    Statistic, TrialConfig, TrialSet,
};
use crate::bounds::{
    deviation_envelope_lower, deviation_envelope_upper, implied_lower_constants, structural_params,
};
use crate::dist::DistSpec;
use crate::error::{Error, Result};
use crate::parallel::map_indexed;
use crate::profile::{make_ones_rectangular, Profile, SymmetricSupport};
use crate::rng::{derive_key, stream, Domain};
use crate::stats::quantile_sorted;

/// Multiples of `C1` scanned for the lower envelope.
pub const C3_SCAN: [f64; 4] = [0.25, 0.5, 0.75, 1.0];
/// The upper-envelope constant is inflated by this factor so that rounding
/// never lets the envelope dip below a confidence bound it was fitted to.
const ENVELOPE_SLACK: f64 = 1.0 + 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperEnvelope {
    /// Fitted rate `c₁` (exponent fixed at the true α).
    pub c1: f64,
    /// Smallest `C₂` dominating every upper confidence bound given `c₁`.
    pub c_big2: f64,
    pub t: Vec<f64>,
    pub ci_high: Vec<f64>,
    pub envelope: Vec<f64>,
    pub dominates: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerEnvelope {
    pub c_big3: f64,
    /// Fitted rate `c₂`.
    pub c2: f64,
    /// Largest `C₄` staying below every positive lower confidence bound.
    pub c_big4: f64,
    pub t: Vec<f64>,
    pub points: Vec<TailPoint>,
    pub envelope: Vec<f64>,
    /// Grid points with no observed exceedance; they cannot constrain a
    /// positive envelope and are excluded.
    pub excluded: usize,
    pub below: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub degenerate: bool,
    pub fittable: bool,
    pub fit_error: Option<String>,
    pub alpha: f64,
    pub c_big1: f64,
    pub mean: MeanEstimate,
    pub max_b: f64,
    pub center: f64,
    pub alpha_hat: Option<f64>,
    pub alpha_ratio: Option<f64>,
    pub r_squared: Option<f64>,
    pub tail_fit: Option<TailFit>,
    pub upper: Option<UpperEnvelope>,
    pub lower_scan: Vec<LowerEnvelope>,
    /// `(C₄, c₂) = (½e^{-2c₃}, c₃)` implied by the fitted upper constants.
    pub implied_lower: Option<(f64, f64)>,
    pub quantile_scaling: Option<QuantileScaling>,
}

/// Least-squares rate `c` in `−ln y ≈ a + c·t^α` restricted to `y > 0`,
/// floored at a tiny positive value.
fn fitted_rate(t: &[f64], y: &[f64], alpha: f64) -> f64 {
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(y)
        .filter(|(&t, &y)| t > 0.0 && y > 0.0)
        .map(|(&t, &y)| (t.powf(alpha), -y.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::MIN_POSITIVE.sqrt();
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return f64::MIN_POSITIVE.sqrt();
    }
    (sxy / sxx).max(f64::MIN_POSITIVE.sqrt())
}

fn upper_envelope(
    fit: &TailFit,
    mean: f64,
    max_b: f64,
    alpha: f64,
    c_big1: f64,
) -> Result<UpperEnvelope> {
    let (t, ci_high): (Vec<f64>, Vec<f64>) = fit
        .t
        .iter()
        .zip(&fit.points)
        .filter(|(&t, _)| t > 0.0)
        .map(|(&t, p)| (t, p.ci_high))
        .unzip();
    let c1 = fitted_rate(&t, &ci_high, alpha);
    let c_big2 = t
        .iter()
        .zip(&ci_high)
        .map(|(&t, &h)| h * (c1 * t.powf(alpha)).exp())
        .fold(f64::MIN_POSITIVE, f64::max)
        * ENVELOPE_SLACK;
    let envelope = t
        .iter()
        .map(|&t| deviation_envelope_upper(mean, max_b, alpha, c_big1, c_big2, c1, t).map(|e| e.1))
        .collect::<Result<Vec<_>>>()?;
    let dominates = envelope.iter().zip(&ci_high).all(|(e, h)| e >= h);
    Ok(UpperEnvelope {
        c1,
        c_big2,
        t,
        ci_high,
        envelope,
        dominates,
    })
}

fn lower_envelope(
    sorted_values: &[f64],
    t_grid: &[f64],
    mean: f64,
    max_b: f64,
    alpha: f64,
    c_big3: f64,
) -> Result<LowerEnvelope> {
    let thresholds: Vec<f64> = t_grid.iter().map(|t| c_big3 * mean + t * max_b).collect();
    let all = tail_of_sorted(sorted_values, &thresholds)?;
    let keep: Vec<usize> = (0..all.len()).filter(|&k| all[k].count > 0).collect();
    let t: Vec<f64> = keep.iter().map(|&k| t_grid[k]).collect();
    let points: Vec<TailPoint> = keep.iter().map(|&k| all[k].clone()).collect();
    let lows: Vec<f64> = points.iter().map(|p| p.ci_low).collect();
    let c2 = fitted_rate(&t, &lows, alpha);
    let c_big4 = t
        .iter()
        .zip(&lows)
        .map(|(&t, &l)| l * (c2 * t.powf(alpha)).exp())
        .fold(f64::INFINITY, f64::min)
        / ENVELOPE_SLACK;
    let c_big4 = if c_big4.is_finite() && c_big4 > 0.0 {
        c_big4
    } else {
        f64::MIN_POSITIVE
    };
    let envelope = t
        .iter()
        .map(|&t| deviation_envelope_lower(mean, max_b, alpha, c_big3, c_big4, c2, t).map(|e| e.1))
        .collect::<Result<Vec<_>>>()?;
    let below = !t.is_empty() && envelope.iter().zip(&lows).all(|(e, l)| e <= l);
    Ok(LowerEnvelope {
        c_big3,
        c2,
        c_big4,
        t,
        points,
        envelope,
        excluded: all.len() - keep.len(),
        below,
    })
}

/// Runs trials of `‖X‖` and fits the deviation shape with center
/// `C1·Ê‖X‖` and scale `max_ij b_ij`, both estimated from the same trials.
pub fn verify_deviation(
    profile: &Profile,
    dist: &DistSpec,
    cfg: &TrialConfig,
    c_big1: f64,
) -> Result<DeviationReport> {
    if !profile.is_symmetric() {
        return Err(Error::Shape(
            "verify_deviation needs a symmetric profile".into(),
        ));
    }
    if !(c_big1 > 0.0 && c_big1.is_finite()) {
        return Err(Error::parameter(
            "C1",
            format!("must be positive, got {c_big1}"),
        ));
    }
    if cfg.trials < 2 {
        return Err(Error::parameter(
            "trials",
            "deviation verification needs at least 2 trials",
        ));
    }
    let ts = run_trials(profile, dist, Statistic::SpectralNorm, cfg)?;
    deviation_from_trials(&ts, profile, dist, c_big1)
}

/// The analysis half of [`verify_deviation`] on an existing trial set.
pub fn deviation_from_trials(
    ts: &TrialSet,
    profile: &Profile,
    dist: &DistSpec,
    c_big1: f64,
) -> Result<DeviationReport> {
    let mean = estimate_mean(ts, None)?;
    let max_b = structural_params(profile).max_b;
    let alpha = dist.alpha;
    let center = c_big1 * mean.mean;
    let mut report = DeviationReport {
        degenerate: ts.is_degenerate() || max_b == 0.0,
        fittable: false,
        fit_error: None,
        alpha,
        c_big1,
        mean,
        max_b,
        center,
        alpha_hat: None,
        alpha_ratio: None,
        r_squared: None,
        tail_fit: None,
        upper: None,
        lower_scan: Vec::new(),
        implied_lower: None,
        quantile_scaling: None,
    };
    if report.degenerate {
        report.fit_error = Some("all trial values are equal; the tail cannot be fitted".into());
        return Ok(report);
    }
    report.quantile_scaling = Some(quantile_scaling(ts, alpha, center, max_b)?);
    let fit = match fit_tail_exponent(ts, center, max_b) {
        Ok(fit) => fit,
        Err(e @ Error::Fit { .. }) => {
            report.fit_error = Some(e.to_string());
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    report.fittable = true;
    report.alpha_hat = Some(fit.alpha_hat);
    report.alpha_ratio = Some(fit.alpha_hat / alpha);
    report.r_squared = Some(fit.r_squared);
    let upper = upper_envelope(&fit, report.mean.mean, max_b, alpha, c_big1)?;
    report.implied_lower = Some(implied_lower_constants(c_big1, upper.c_big2, alpha)?);
    let t_grid = upper.t.clone();
    let sorted = ts.sorted_values();
    report.lower_scan = C3_SCAN
        .iter()
        .map(|f| lower_envelope(&sorted, &t_grid, report.mean.mean, max_b, alpha, f * c_big1))
        .collect::<Result<Vec<_>>>()?;
    report.upper = Some(upper);
    report.tail_fit = Some(fit);
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEquivalenceReport {
    pub p_grid: Vec<f64>,
    pub empirical_norm_p: Vec<f64>,
    pub predictor: Vec<f64>,
    pub ratios: Vec<f64>,
    pub mean_norm: f64,
    pub max_b: f64,
    /// `p ≤ ln(trials)` per grid point.
    pub reliable: Vec<bool>,
}

/// Ratios `‖‖X‖‖_p / (Ê‖X‖ + p^{1/α} max b)` on `p_grid`.
pub fn verify_moment_equivalence(
    profile: &Profile,
    dist: &DistSpec,
    cfg: &TrialConfig,
    p_grid: &[f64],
) -> Result<MomentEquivalenceReport> {
    let ts = run_trials(profile, dist, Statistic::SpectralNorm, cfg)?;
    moment_equivalence_from_trials(&ts, profile, dist, p_grid)
}

pub fn moment_equivalence_from_trials(
    ts: &TrialSet,
    profile: &Profile,
    dist: &DistSpec,
    p_grid: &[f64],
) -> Result<MomentEquivalenceReport> {
    if p_grid.is_empty() {
        return Err(Error::Argument("p grid must be nonempty".into()));
    }
    let limit = 2.0 * (ts.trials as f64).ln();
    if let Some(p) = p_grid.iter().find(|&&p| !(p >= 1.0 && p <= limit)) {
        return Err(Error::Argument(format!(
            "moment order {p} outside [1, 2 ln(trials)] = [1, {limit:.3}]"
        )));
    }
    let mean_norm = empirical_moment_norm(ts, 1.0)?;
    let max_b = structural_params(profile).max_b;
    let empirical = p_grid
        .iter()
        .map(|&p| empirical_moment_norm(ts, p))
        .collect::<Result<Vec<_>>>()?;
    let predictor: Vec<f64> = p_grid
        .iter()
        .map(|p| mean_norm + p.powf(1.0 / dist.alpha) * max_b)
        .collect();
    let ratios = empirical
        .iter()
        .zip(&predictor)
        .map(|(e, d)| e / d)
        .collect();
    Ok(MomentEquivalenceReport {
        p_grid: p_grid.to_vec(),
        empirical_norm_p: empirical,
        predictor,
        ratios,
        mean_norm,
        max_b,
        reliable: p_grid
            .iter()
            .map(|&p| moment_order_is_reliable(ts.trials, p))
            .collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub rows: usize,
    pub cols: usize,
    pub master_seed: u64,
    /// `s_n(A)/√N` quantiles at `0.01, 0.1, 0.5`.
    pub quantiles: [f64; 3],
    pub min: f64,
    /// Trials with `s_n(A) < ĉ√N` for the `ĉ` fitted at the base size.
    pub count_below_c_hat: usize,
    /// Trials with `s_n(A) ≤ c√N` for the fixed cross-size level `c`.
    pub count_below_fixed_c: usize,
    pub fraction_below_fixed_c: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallestSingularReport {
    pub aspect_ratio: f64,
    /// Largest `ĉ₁` with no trial below `ĉ₁√N` at the base size.
    pub c_hat: f64,
    /// Fixed level for the cross-size comparison: the base size's 10%
    /// quantile of `s_n/√N`.
    pub fixed_c: f64,
    pub base: SizeSummary,
    pub doubled: SizeSummary,
    /// Counts below `ĉ√N` do not increase from `N` to `2N`.
    pub decay_direction_ok: bool,
    /// Normalised values at the base size.
    pub values: Vec<f64>,
}

fn normalised_singular_values(
    rows: usize,
    cols: usize,
    dist: &DistSpec,
    cfg: &TrialConfig,
) -> Result<Vec<f64>> {
    let profile = make_ones_rectangular(rows, cols)?;
    let ts = run_trials(&profile, dist, Statistic::SmallestSingular, cfg)?;
    let root = (rows as f64).sqrt();
    Ok(ts.values.iter().map(|v| v / root).collect())
}

/// `s_n(A)/√N` for the all-ones `N × n` profile at `N` and at `2N` with
/// the same aspect ratio.
pub fn smallest_singular_experiment(
    rows: usize,
    cols: usize,
    dist: &DistSpec,
    cfg: &TrialConfig,
) -> Result<SmallestSingularReport> {
    if cols == 0 || cols > rows {
        return Err(Error::Shape(format!(
            "smallest singular experiment needs 1 <= n <= N, got N = {rows}, n = {cols}"
        )));
    }
    let base = normalised_singular_values(rows, cols, dist, cfg)?;
    let doubled_cfg = TrialConfig {
        master_seed: derive_key(cfg.master_seed, Domain::Trial, &[u64::MAX, 2]),
        ..*cfg
    };
    let doubled = normalised_singular_values(2 * rows, 2 * cols, dist, &doubled_cfg)?;
    let sorted_base = crate::stats::sorted(&base);
    let c_hat = sorted_base[0];
    let fixed_c = quantile_sorted(&sorted_base, 0.1);
    let summary = |values: &[f64], rows: usize, cols: usize, seed: u64| {
        let s = crate::stats::sorted(values);
        let below_fixed = values.iter().filter(|&&v| v <= fixed_c).count();
        SizeSummary {
            rows,
            cols,
            master_seed: seed,
            quantiles: [0.01, 0.1, 0.5].map(|q| quantile_sorted(&s, q)),
            min: s[0],
            count_below_c_hat: values.iter().filter(|&&v| v < c_hat).count(),
            count_below_fixed_c: below_fixed,
            fraction_below_fixed_c: below_fixed as f64 / values.len() as f64,
        }
    };
    let base_summary = summary(&base, rows, cols, cfg.master_seed);
    let doubled_summary = summary(&doubled, 2 * rows, 2 * cols, doubled_cfg.master_seed);
    Ok(SmallestSingularReport {
        aspect_ratio: cols as f64 / rows as f64,
        c_hat,
        fixed_c,
        decay_direction_ok: doubled_summary.count_below_c_hat <= base_summary.count_below_c_hat,
        base: base_summary,
        doubled: doubled_summary,
        values: base,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzReport {
    pub pairs: usize,
    /// `√2 max_ij b_ij`.
    pub lipschitz_constant: f64,
    pub slack: f64,
    /// Largest `|F(u) − F(v)| / (√2 max b ‖u − v‖₂)`.
    pub max_ratio: f64,
    pub violations: usize,
    /// Same maximum over the small-perturbation half of the pairs.
    pub max_ratio_perturbed: f64,
}

pub const LIPSCHITZ_SLACK: f64 = 1.0 + 1e-9;
const PERTURBATION: f64 = 1e-2;

/// Checks `|F(u) − F(v)| ≤ √2 max b ‖u − v‖₂` for `F(u) = ‖(b_ij u_ij)‖`
/// over entry vectors on the support of `b`. Even pairs are independent
/// draws, odd pairs small perturbations `v = u + δ g`.
pub fn lipschitz_check(
    profile: &Profile,
    dist: &DistSpec,
    pairs: usize,
    seed: u64,
    workers: usize,
) -> Result<LipschitzReport> {
    if pairs == 0 {
        return Err(Error::parameter("pairs", "must be >= 1"));
    }
    let support = SymmetricSupport::from_profile(profile)?;
    let max_b = structural_params(profile).max_b;
    let constant = std::f64::consts::SQRT_2 * max_b;
    let sampler = dist.sampler();
    let solver = SolverOptions::new(1e-12)?;
    let weights: Vec<f64> = support
        .components
        .iter()
        .flat_map(|c| c.entries.iter().map(|e| e.4))
        .collect();
    let norm_of = |u: &[f64]| -> Result<f64> {
        let mut best = 0.0f64;
        let mut offset = 0;
        let mut local = Vec::new();
        for comp in &support.components {
            local.clear();
            local.extend(
                comp.entries
                    .iter()
                    .enumerate()
                    .map(|(k, &(li, lj, _, _, b))| (li, lj, b * u[offset + k])),
            );
            offset += comp.entries.len();
            best = best.max(component_norm(comp.nodes.len(), &local, &solver)?);
        }
        Ok(best)
    };
    let ratios = map_indexed(pairs, workers, |k| {
        let mut rng = stream(seed, Domain::Pair, &[k as u64]);
        let u: Vec<f64> = weights.iter().map(|_| sampler.sample(&mut rng)).collect();
        let v: Vec<f64> = if k % 2 == 0 {
            weights.iter().map(|_| sampler.sample(&mut rng)).collect()
        } else {
            u.iter()
                .map(|x| x + PERTURBATION * sampler.sample(&mut rng))
                .collect()
        };
        let dist_uv = u
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let diff = (norm_of(&u)? - norm_of(&v)?).abs();
        let bound = constant * dist_uv;
        let ratio = if bound > 0.0 {
            diff / bound
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        Ok(ratio)
    })?;
    let max_over = |parity: usize| {
        ratios
            .iter()
            .enumerate()
            .filter(|(k, _)| k % 2 == parity)
            .map(|(_, r)| *r)
            .fold(0.0, f64::max)
    };
    Ok(LipschitzReport {
        pairs,
        lipschitz_constant: constant,
        slack: LIPSCHITZ_SLACK,
        max_ratio: ratios.iter().copied().fold(0.0, f64::max),
        violations: ratios.iter().filter(|&&r| r > LIPSCHITZ_SLACK).count(),
        max_ratio_perturbed: max_over(1),
    })
}
