//! Structural parameters, closed-form expectation bounds and the deviation
//! envelopes.
//!
//! Bounds carry no universal constants. Logarithms are natural. Rectangular
//! profiles are treated through their symmetric dilation, whose spectral
//! norm equals that of the rectangular matrix.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{Profile, Shape};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructuralParams {
    /// Largest row `ℓ₂` norm.
    pub sigma: f64,
    /// Largest entry over all `(i, j)`.
    pub sigma_star: f64,
    /// Same value as `sigma_star`; the deviation scale.
    pub max_b: f64,
}

/// Symmetric coefficient matrix the bounds are evaluated on.
fn symmetric_entries(profile: &Profile) -> DMatrix<f64> {
    match profile.shape() {
        Shape::Symmetric(_) => profile.entries().clone(),
        Shape::Rectangular { rows, cols } => {
            let m = rows + cols;
            let b = profile.entries();
            DMatrix::from_fn(m, m, |i, j| {
                if i < rows && j >= rows {
                    b[(i, j - rows)]
                } else if i >= rows && j < rows {
                    b[(j, i - rows)]
                } else {
                    0.0
                }
            })
        }
    }
}

fn row_norm(b: &DMatrix<f64>, i: usize) -> f64 {
    b.row(i).iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn params_of(b: &DMatrix<f64>) -> StructuralParams {
    let sigma = (0..b.nrows()).map(|i| row_norm(b, i)).fold(0.0, f64::max);
    let sigma_star = b.iter().copied().fold(0.0, f64::max);
    StructuralParams {
        sigma,
        sigma_star,
        max_b: sigma_star,
    }
}

pub fn structural_params(profile: &Profile) -> StructuralParams {
    match profile.shape() {
        Shape::Symmetric(_) => params_of(profile.entries()),
        Shape::Rectangular { .. } => params_of(&symmetric_entries(profile)),
    }
}

fn row_maxima(b: &DMatrix<f64>) -> Vec<f64> {
    (0..b.nrows())
        .map(|i| b.row(i).iter().copied().fold(0.0, f64::max))
        .collect()
}

/// Stable descending order of row maxima: `perm[k]` is the original
/// (0-indexed) row placed at position `k`.
fn sorting_permutation(b: &DMatrix<f64>) -> Vec<usize> {
    let maxima = row_maxima(b);
    let mut perm: Vec<usize> = (0..b.nrows()).collect();
    perm.sort_by(|&a, &c| maxima[c].total_cmp(&maxima[a]));
    perm
}

/// Simultaneously permutes rows and columns so that row maxima are
/// nonincreasing, ties kept in original order. Returns `b*` and the
/// 0-indexed permutation with `b*_{kl} = b_{perm[k] perm[l]}`.
pub fn sorted_profile(profile: &Profile) -> Result<(Profile, Vec<usize>)> {
    if !profile.is_symmetric() {
        return Err(Error::Shape(
            "sorted_profile requires a symmetric profile".into(),
        ));
    }
    let perm = sorting_permutation(profile.entries());
    let sorted = profile
        .permuted(&perm)?
        .with_label(format!("{}[sorted]", profile.label()));
    Ok((sorted, perm))
}

fn dimension(b: &DMatrix<f64>) -> f64 {
    b.nrows() as f64
}

/// `σ √(ln n)`.
pub fn bound_khintchine(profile: &Profile) -> f64 {
    let b = symmetric_entries(profile);
    params_of(&b).sigma * dimension(&b).ln().max(0.0).sqrt()
}

/// `σ* √n`.
pub fn bound_epsnet(profile: &Profile) -> f64 {
    let b = symmetric_entries(profile);
    params_of(&b).sigma_star * dimension(&b).sqrt()
}

/// `σ + σ* √(ln n)`.
pub fn bound_bvh(profile: &Profile) -> f64 {
    let b = symmetric_entries(profile);
    let p = params_of(&b);
    p.sigma + p.sigma_star * dimension(&b).ln().max(0.0).sqrt()
}

/// `σ + max_i max_j b*_ij (ln(i + shift))^{1/α}` over 1-indexed rows of the
/// sorted profile.
fn lvhy_with_shift(b: &DMatrix<f64>, alpha: f64, shift: f64) -> f64 {
    let maxima = row_maxima(b);
    let mut sorted = maxima.clone();
    sorted.sort_by(|a, c| c.total_cmp(a));
    let tail = sorted
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let l = ((k + 1) as f64 + shift).ln();
            if m == 0.0 || l <= 0.0 {
                0.0
            } else {
                m * l.powf(1.0 / alpha)
            }
        })
        .fold(0.0, f64::max);
    params_of(b).sigma + tail
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::parameter(
            "alpha",
            format!("must be positive, got {alpha}"),
        ))
    }
}

/// `σ + max_ij b*_ij (ln i)^{1/α}` with rows of `b*` 1-indexed, so the
/// first row contributes nothing.
pub fn bound_lvhy(profile: &Profile, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(lvhy_with_shift(&symmetric_entries(profile), alpha, 0.0))
}

/// Variant of [`bound_lvhy`] using `ln(i + 1)`.
pub fn bound_lvhy_log_shift(profile: &Profile, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(lvhy_with_shift(&symmetric_entries(profile), alpha, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    pub alpha: f64,
    pub sigma: f64,
    pub sigma_star: f64,
    pub khintchine: f64,
    pub epsnet: f64,
    pub bvh: f64,
    pub lvhy: f64,
    pub lvhy_log_shift: f64,
}

impl BoundReport {
    pub fn compute(profile: &Profile, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let b = symmetric_entries(profile);
        let params = params_of(&b);
        let log_n = dimension(&b).ln().max(0.0);
        Ok(BoundReport {
            n: b.nrows(),
            alpha,
            sigma: params.sigma,
            sigma_star: params.sigma_star,
            khintchine: params.sigma * log_n.sqrt(),
            epsnet: params.sigma_star * dimension(&b).sqrt(),
            bvh: params.sigma + params.sigma_star * log_n.sqrt(),
            lvhy: lvhy_with_shift(&b, alpha, 0.0),
            lvhy_log_shift: lvhy_with_shift(&b, alpha, 1.0),
        })
    }

    pub fn write_csv<W: std::io::Write>(
        reports: &[BoundReport],
        out: W,
        path: &Path,
    ) -> Result<()> {
        let csv_err = |source| Error::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut writer = csv::Writer::from_writer(out);
        for r in reports {
            writer.serialize(r).map_err(csv_err)?;
        }
        writer.flush().map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::parameter(
            name,
            format!("must be positive and finite, got {value}"),
        ))
    }
}

fn check_envelope_inputs(mean_norm: f64, max_b: f64, alpha: f64, t: f64) -> Result<()> {
    if !(mean_norm >= 0.0 && mean_norm.is_finite()) {
        return Err(Error::parameter(
            "mean_norm",
            format!("must be nonnegative, got {mean_norm}"),
        ));
    }
    if !(max_b >= 0.0 && max_b.is_finite()) {
        return Err(Error::parameter(
            "max_b",
            format!("must be nonnegative, got {max_b}"),
        ));
    }
    check_alpha(alpha)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::parameter(
            "t",
            format!("must be nonnegative, got {t}"),
        ));
    }
    Ok(())
}

/// Upper envelope: threshold `C1·mean + t·max_b`, probability bound
/// `min(1, C2 e^{-c1 t^α})`.
pub fn deviation_envelope_upper(
    mean_norm: f64,
    max_b: f64,
    alpha: f64,
    c_big1: f64,
    c_big2: f64,
    c1: f64,
    t: f64,
) -> Result<(f64, f64)> {
    check_envelope_inputs(mean_norm, max_b, alpha, t)?;
    check_positive("C1", c_big1)?;
    check_positive("C2", c_big2)?;
    check_positive("c1", c1)?;
    Ok((
        c_big1 * mean_norm + t * max_b,
        (c_big2 * (-c1 * t.powf(alpha)).exp()).min(1.0),
    ))
}

/// Lower envelope: threshold `C3·mean + t·max_b`, probability bound
/// `min(1, C4 e^{-c2 t^α})` from below.
pub fn deviation_envelope_lower(
    mean_norm: f64,
    max_b: f64,
    alpha: f64,
    c_big3: f64,
    c_big4: f64,
    c2: f64,
    t: f64,
) -> Result<(f64, f64)> {
    check_envelope_inputs(mean_norm, max_b, alpha, t)?;
    check_positive("C3", c_big3)?;
    check_positive("C4", c_big4)?;
    check_positive("c2", c2)?;
    Ok((
        c_big3 * mean_norm + t * max_b,
        (c_big4 * (-c2 * t.powf(alpha)).exp()).min(1.0),
    ))
}

/// Rate `c₃ = 2 ln(C₂ 2^{1/α} / C₁)` of the lower tail obtained from the
/// upper one by Paley–Zygmund.
pub fn lower_tail_rate(c_big1: f64, c_big2: f64, alpha: f64) -> Result<f64> {
    check_positive("C1", c_big1)?;
    check_positive("C2", c_big2)?;
    check_alpha(alpha)?;
    Ok(2.0 * (c_big2 * 2f64.powf(1.0 / alpha) / c_big1).ln())
}

/// Lower-envelope constants `(C4, c2) = (½e^{-2c₃}, c₃)` implied by the
/// upper-envelope constants.
pub fn implied_lower_constants(c_big1: f64, c_big2: f64, alpha: f64) -> Result<(f64, f64)> {
    let c3 = lower_tail_rate(c_big1, c_big2, alpha)?;
    Ok((0.5 * (-2.0 * c3).exp(), c3))
}

/// `ln |N| = n ln(3/ε)`, the logarithm of the ε-net cardinality bound.
pub fn epsnet_cardinality(n: usize, eps: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::parameter("n", "must be >= 1"));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::parameter(
            "eps",
            format!("must lie in (0, 1], got {eps}"),
        ));
    }
    Ok(n as f64 * (3.0 / eps).ln())
}
