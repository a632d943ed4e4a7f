//! Entry distributions: symmetric Weibull, the density `c(α)e^{-|x|^α}`
//! and the standard Gaussian reference law.
//!
//! All three are α-exponential: their `L_p` norms are bracketed by
//! `θ₁p^{1/α} ≤ ‖ξ‖_p ≤ θ₂p^{1/α}`. The bracket stored on a [`DistSpec`] is
//! certified on a geometric grid of `p` in `[2, 64]` only.

use rand::distr::{Distribution, Open01};
use rand::{Rng, RngExt};
use rand_distr::{Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{Error, Result};

/// Upper end of the `p` range on which the moment bracket is certified.
pub const BRACKET_P_MAX: f64 = 64.0;
/// Number of grid points used for the moment bracket.
pub const BRACKET_GRID_POINTS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistKind {
    /// `P{|ξ| > x} = e^{-x^α}` with a uniform random sign.
    WeibullSym,
    /// Density `c(α) e^{-|x|^α}`, `α ≥ 1`.
    NuAlpha,
    /// Standard normal; a reference law for `α = 2` experiments, not one of
    /// the α-exponential families the deviation results are stated for.
    Gaussian,
}

impl DistKind {
    pub fn name(self) -> &'static str {
        match self {
            DistKind::WeibullSym => "weibull_sym",
            DistKind::NuAlpha => "nu_alpha",
            DistKind::Gaussian => "gaussian",
        }
    }
}

/// An entry distribution together with its moment bracket.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistSpec {
    pub kind: DistKind,
    pub alpha: f64,
    pub theta1: f64,
    pub theta2: f64,
}

impl DistSpec {
    pub fn weibull(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Self::with_kind(DistKind::WeibullSym, alpha)
    }

    pub fn nu_alpha(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if alpha < 1.0 {
            return Err(Error::parameter(
                "alpha",
                format!("density c(α)e^(-|x|^α) sampler requires alpha >= 1, got {alpha}"),
            ));
        }
        Self::with_kind(DistKind::NuAlpha, alpha)
    }

    pub fn gaussian() -> Self {
        Self::with_kind(DistKind::Gaussian, 2.0).expect("gaussian bracket is finite")
    }

    /// Builds a spec from explicit bracket constants, checking them on the
    /// certification grid.
    pub fn with_thetas(kind: DistKind, alpha: f64, theta1: f64, theta2: f64) -> Result<Self> {
        let spec = DistSpec {
            kind,
            alpha,
            theta1,
            theta2,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Parses the CLI distribution names.
    pub fn from_name(name: &str, alpha: f64) -> Result<Self> {
        match name {
            "weibull" | "weibull_sym" => Self::weibull(alpha),
            "nu" | "nu_alpha" => Self::nu_alpha(alpha),
            "gaussian" | "normal" => {
                if alpha != 2.0 {
                    return Err(Error::parameter(
                        "alpha",
                        format!("the gaussian reference law has alpha = 2, got {alpha}"),
                    ));
                }
                Ok(Self::gaussian())
            }
            other => Err(Error::parameter(
                "dist",
                format!("unknown distribution `{other}` (expected weibull, nu or gaussian)"),
            )),
        }
    }

    fn with_kind(kind: DistKind, alpha: f64) -> Result<Self> {
        let (theta1, theta2) = bracket_on_grid(alpha, BRACKET_P_MAX, |p| lp_norm(kind, alpha, p));
        Self::with_thetas(kind, alpha, theta1, theta2)
    }

    /// Re-checks every invariant; used after deserialisation.
    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        match self.kind {
            DistKind::NuAlpha if self.alpha < 1.0 => {
                return Err(Error::Validation(format!(
                    "nu_alpha requires alpha >= 1, got {}",
                    self.alpha
                )))
            }
            DistKind::Gaussian if self.alpha != 2.0 => {
                return Err(Error::Validation(format!(
                    "gaussian requires alpha = 2, got {}",
                    self.alpha
                )))
            }
            _ => {}
        }
        if !(self.theta1 > 0.0 && self.theta1 <= self.theta2 && self.theta2.is_finite()) {
            return Err(Error::Validation(format!(
                "moment bracket must satisfy 0 < theta1 <= theta2, got ({}, {})",
                self.theta1, self.theta2
            )));
        }
        const SLACK: f64 = 1e-12;
        for p in geometric_grid(2.0, BRACKET_P_MAX, BRACKET_GRID_POINTS) {
            let norm = self.lp_norm(p);
            let scale = p.powf(1.0 / self.alpha);
            if norm < self.theta1 * scale * (1.0 - SLACK)
                || norm > self.theta2 * scale * (1.0 + SLACK)
            {
                return Err(Error::Validation(format!(
                    "moment bracket ({}, {}) violated at p = {p}: ||xi||_p = {norm}",
                    self.theta1, self.theta2
                )));
            }
        }
        Ok(())
    }

    /// Exact `‖ξ‖_p = (E|ξ|^p)^{1/p}`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_norm(self.kind, self.alpha, p)
    }

    /// Exact `P{|ξ| > t}`.
    pub fn abs_tail(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        match self.kind {
            DistKind::WeibullSym => tail_weibull(self.alpha, t),
            DistKind::NuAlpha => gamma_ur(1.0 / self.alpha, t.powf(self.alpha)),
            DistKind::Gaussian => erfc(t / std::f64::consts::SQRT_2),
        }
    }

    pub fn sampler(&self) -> Sampler {
        match self.kind {
            DistKind::WeibullSym => Sampler::Weibull {
                inv_alpha: 1.0 / self.alpha,
            },
            DistKind::NuAlpha => Sampler::NuAlpha {
                gamma: Gamma::new(1.0 / self.alpha, 1.0).expect("alpha validated"),
                inv_alpha: 1.0 / self.alpha,
            },
            DistKind::Gaussian => Sampler::Gaussian,
        }
    }
}

/// A prepared sampler for one [`DistSpec`].
#[derive(Clone, Copy, Debug)]
pub enum Sampler {
    Weibull { inv_alpha: f64 },
    NuAlpha { gamma: Gamma<f64>, inv_alpha: f64 },
    Gaussian,
}

impl Sampler {
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Sampler::Weibull { inv_alpha } => {
                let positive: bool = rng.random();
                let u: f64 = rng.sample(Open01);
                signed((-u.ln()).powf(inv_alpha), positive)
            }
            Sampler::NuAlpha { gamma, inv_alpha } => {
                let positive: bool = rng.random();
                let g = gamma.sample(rng);
                signed(g.powf(inv_alpha), positive)
            }
            Sampler::Gaussian => rng.sample(StandardNormal),
        }
    }
}

#[inline]
fn signed(magnitude: f64, positive: bool) -> f64 {
    if positive {
        magnitude
    } else {
        -magnitude
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::parameter(
            "alpha",
            format!("shape parameter must be positive and finite, got {alpha}"),
        ))
    }
}

fn lp_norm(kind: DistKind, alpha: f64, p: f64) -> f64 {
    match kind {
        DistKind::WeibullSym => (ln_gamma(p / alpha + 1.0) / p).exp(),
        DistKind::NuAlpha => ((ln_gamma((p + 1.0) / alpha) - ln_gamma(1.0 / alpha)) / p).exp(),
        DistKind::Gaussian => {
            let ln_abs_moment = 0.5 * p * std::f64::consts::LN_2 + ln_gamma((p + 1.0) / 2.0)
                - 0.5 * std::f64::consts::PI.ln();
            (ln_abs_moment / p).exp()
        }
    }
}

/// Inverse transform for `W_s(α)`: `±(−ln u)^{1/α}`.
pub fn weibull_from_uniform(alpha: f64, u: f64, positive: bool) -> f64 {
    signed((-u.ln()).powf(1.0 / alpha), positive)
}

/// One draw of `W_s(α)`.
pub fn sample_weibull<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(Sampler::Weibull {
        inv_alpha: 1.0 / alpha,
    }
    .sample(rng))
}

/// One draw from the density `c(α)e^{-|x|^α}` with `c(α) = α / (2Γ(1/α))`,
/// as `±G^{1/α}` with `G ~ Gamma(1/α, 1)`.
pub fn sample_nu_alpha<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> Result<f64> {
    Ok(DistSpec::nu_alpha(alpha)?.sampler().sample(rng))
}

/// Normalising constant of the density `c(α)e^{-|x|^α}`.
pub fn nu_alpha_constant(alpha: f64) -> f64 {
    alpha / (2.0 * ln_gamma(1.0 / alpha).exp())
}

/// Exact `‖ξ‖_p = Γ(p/α + 1)^{1/p}` for `ξ ~ W_s(α)`.
pub fn weibull_moment(alpha: f64, p: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::parameter(
            "p",
            format!("moment order must be >= 1, got {p}"),
        ));
    }
    Ok(lp_norm(DistKind::WeibullSym, alpha, p))
}

/// Moment bracket `(θ₁, θ₂)` of `W_s(α)`: min and max of
/// `‖ξ‖_p / p^{1/α}` over a 64-point geometric grid on `[2, p_max]`.
pub fn theta_bracket(alpha: f64, p_max: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    if !(p_max >= 2.0 && p_max.is_finite()) {
        return Err(Error::parameter(
            "p_max",
            format!("must be >= 2, got {p_max}"),
        ));
    }
    Ok(bracket_on_grid(alpha, p_max, |p| {
        lp_norm(DistKind::WeibullSym, alpha, p)
    }))
}

fn bracket_on_grid(alpha: f64, p_max: f64, norm: impl Fn(f64) -> f64) -> (f64, f64) {
    geometric_grid(2.0, p_max, BRACKET_GRID_POINTS)
        .into_iter()
        .map(|p| norm(p) / p.powf(1.0 / alpha))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r), hi.max(r))
        })
}

/// `points` geometrically spaced values from `lo` to `hi` inclusive; a single
/// point when `lo == hi`.
pub fn geometric_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points <= 1 || lo == hi {
        return vec![lo];
    }
    let ratio = (hi / lo).ln() / (points - 1) as f64;
    (0..points)
        .map(|k| {
            if k == points - 1 {
                hi
            } else {
                lo * (ratio * k as f64).exp()
            }
        })
        .collect()
}

/// `P{|ξ| > t} = e^{-t^α}` for `ξ ~ W_s(α)`.
pub fn tail_weibull(alpha: f64, t: f64) -> f64 {
    (-t.max(0.0).powf(alpha)).exp()
}

/// CDF of the signed law `W_s(α)`.
pub fn weibull_sym_cdf(alpha: f64, x: f64) -> f64 {
    let half_tail = 0.5 * tail_weibull(alpha, x.abs());
    if x < 0.0 {
        half_tail
    } else {
        1.0 - half_tail
    }
}
