//! Moment formulas for weighted sums `S = Σ a_i ξ_i`, conversion of moment
//! growth into tail bounds, and the Paley–Zygmund lower tail.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::{weibull_moment, DistSpec};
use crate::error::{Error, Result};
use crate::parallel::map_indexed;
use crate::rng::{derive_key, stream, Domain};
use crate::stats::NeumaierSum;

/// Draws per Monte Carlo block; each block owns one stream.
pub const BLOCK_DRAWS: usize = 1 << 14;

/// Nonincreasing rearrangement of `|a_i|`, ties in original order.
pub fn rearrange(a: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = a.iter().map(|x| x.abs()).collect();
    v.sort_by(|x, y| y.total_cmp(x));
    v
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    a: Vec<f64>,
    a_star: Vec<f64>,
}

impl WeightVector {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::Argument("weight vector must be nonempty".into()));
        }
        if let Some(x) = a.iter().find(|x| !x.is_finite()) {
            return Err(Error::Argument(format!("weight {x} is not finite")));
        }
        let a_star = rearrange(&a);
        Ok(WeightVector { a, a_star })
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn a_star(&self) -> &[f64] {
        &self.a_star
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    fn lq_norm(&self, q: f64) -> f64 {
        lq(&self.a_star, q)
    }
}

/// `(Σ x_i^q)^{1/q}` for nonnegative, nonincreasing `x`, computed relative
/// to the maximum to avoid overflow.
fn lq(sorted_abs: &[f64], q: f64) -> f64 {
    let top = sorted_abs.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0.0;
    }
    let s: NeumaierSum = sorted_abs.iter().map(|x| (x / top).powf(q)).collect();
    top * s.sum().powf(1.0 / q)
}

/// Two-term moment formula for sums with logconcave symmetric Weibull
/// entries:
/// `√p (Σ_{i>⌊p⌋} a*_i²)^{1/2} + p^{1/α} (Σ_{i≤⌊p⌋} a*_i^{α*})^{1/α*}`
/// with `α* = α/(α−1)`; at `α = 1` the head factor is `max_{i≤⌊p⌋} a*_i`.
pub fn gk_moment(a: &WeightVector, p: f64, alpha: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::parameter("p", format!("must be >= 1, got {p}")));
    }
    if !(alpha >= 1.0 && alpha.is_finite()) {
        return Err(Error::Domain(format!(
            "two-term formula needs logconcave tails (alpha >= 1), got alpha = {alpha}"
        )));
    }
    let split = (p.floor() as usize).min(a.len());
    let (head, tail) = a.a_star.split_at(split);
    let tail_term = p.sqrt() * lq(tail, 2.0);
    let head_norm = if alpha == 1.0 {
        head.first().copied().unwrap_or(0.0)
    } else {
        lq(head, alpha / (alpha - 1.0))
    };
    Ok(tail_term + p.powf(1.0 / alpha) * head_norm)
}

/// Moment formula for weighted Weibull sums with logconvex tails:
/// `(Σ |a_i|^p E|W|^p)^{1/p} + √p (Σ a_i² E W²)^{1/2}`, `W ~ W_s(α)`.
pub fn hmo_moment(a: &WeightVector, p: f64, alpha: f64) -> Result<f64> {
    if !(p >= 2.0 && p.is_finite()) {
        return Err(Error::parameter("p", format!("must be >= 2, got {p}")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!(
            "formula needs logconvex tails (0 < alpha <= 1), got alpha = {alpha}"
        )));
    }
    Ok(a.lq_norm(p) * weibull_moment(alpha, p)?
        + p.sqrt() * a.lq_norm(2.0) * weibull_moment(alpha, 2.0)?)
}

/// Moment growth `‖ξ‖_p ≤ Σ_k C_k p^{β_k} + C_tail` valid for `p ≥ p0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentBoundSpec {
    pub terms: Vec<(f64, f64)>,
    pub c_tail: f64,
    pub p0: f64,
}

impl MomentBoundSpec {
    pub fn new(terms: Vec<(f64, f64)>, c_tail: f64, p0: f64) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Validation(
                "moment bound needs at least one term".into(),
            ));
        }
        if let Some((c, b)) = terms
            .iter()
            .find(|(c, b)| !(*c > 0.0 && *b > 0.0 && c.is_finite() && b.is_finite()))
        {
            return Err(Error::Validation(format!(
                "term (C = {c}, beta = {b}) must have positive entries"
            )));
        }
        if !(c_tail >= 0.0 && c_tail.is_finite()) {
            return Err(Error::Validation(format!(
                "C_tail must be nonnegative, got {c_tail}"
            )));
        }
        if !(p0 >= 1.0 && p0.is_finite()) {
            return Err(Error::Validation(format!("p0 must be >= 1, got {p0}")));
        }
        Ok(MomentBoundSpec { terms, c_tail, p0 })
    }
}

/// Threshold `e(m t + C_tail)` and bound
/// `min(1, e^{p0} exp(−min_k (t/C_k)^{1/β_k}))`.
pub fn moment_to_tail(spec: &MomentBoundSpec, t: f64) -> Result<(f64, f64)> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::parameter("t", format!("must be positive, got {t}")));
    }
    let m = spec.terms.len() as f64;
    let exponent = spec
        .terms
        .iter()
        .map(|&(c, beta)| (t / c).powf(1.0 / beta))
        .fold(f64::INFINITY, f64::min);
    let threshold = std::f64::consts::E * (m * t + spec.c_tail);
    Ok((threshold, (spec.p0 - exponent).exp().min(1.0)))
}

/// `(1 − 2^{−p})² (‖Z‖_p / ‖Z‖_{2p})^{2p}`, a lower bound for
/// `P{Z ≥ ½‖Z‖_p}`.
pub fn paley_zygmund_lower(norm_p: f64, norm_2p: f64, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::parameter("p", format!("must be >= 1, got {p}")));
    }
    if !(norm_p > 0.0 && norm_2p > 0.0 && norm_2p.is_finite()) {
        return Err(Error::Argument(format!(
            "norms must be positive, got {norm_p} and {norm_2p}"
        )));
    }
    if norm_p > norm_2p {
        return Err(Error::Argument(format!(
            "||Z||_p = {norm_p} exceeds ||Z||_2p = {norm_2p}, violating L_p monotonicity"
        )));
    }
    Ok((1.0 - 2f64.powf(-p)).powi(2) * (norm_p / norm_2p).powf(2.0 * p))
}

/// Empirical `‖Σ a_i ξ_i‖_p` at every `p` in `ps` from `draws` samples with
/// `ξ_i` i.i.d. from `dist`. Blocks of [`BLOCK_DRAWS`] use their own stream
/// and are reduced in block order.
pub fn empirical_lp_norms(
    a: &WeightVector,
    dist: &DistSpec,
    ps: &[f64],
    draws: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<f64>> {
    if draws == 0 {
        return Err(Error::parameter("draws", "must be >= 1"));
    }
    if let Some(p) = ps.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
        return Err(Error::parameter("p", format!("must be positive, got {p}")));
    }
    let sampler = dist.sampler();
    let blocks = draws.div_ceil(BLOCK_DRAWS);
    let partial = map_indexed(blocks, workers, |b| {
        let mut rng = stream(seed, Domain::Block, &[b as u64]);
        let len = BLOCK_DRAWS.min(draws - b * BLOCK_DRAWS);
        let mut sums = vec![NeumaierSum::default(); ps.len()];
        for _ in 0..len {
            let s = weighted_draw(a.a(), &sampler, &mut rng).abs();
            for (acc, &p) in sums.iter_mut().zip(ps) {
                acc.add(power(s, p));
            }
        }
        Ok(sums)
    })?;
    let mut total = vec![NeumaierSum::default(); ps.len()];
    for block in &partial {
        for (t, s) in total.iter_mut().zip(block) {
            t.merge(s);
        }
    }
    Ok(total
        .iter()
        .zip(ps)
        .map(|(s, &p)| (s.sum() / draws as f64).powf(1.0 / p))
        .collect())
}

#[inline]
fn weighted_draw<R: Rng + ?Sized>(a: &[f64], sampler: &crate::dist::Sampler, rng: &mut R) -> f64 {
    a.iter().map(|&w| w * sampler.sample(rng)).sum()
}

#[inline]
fn power(x: f64, p: f64) -> f64 {
    if p == p.trunc() && p <= 64.0 {
        x.powi(p as i32)
    } else {
        x.powf(p)
    }
}

/// Fixed test battery of ten weight vectors of dimension at most 20.
pub fn battery_vectors() -> Vec<WeightVector> {
    let flat = |n: usize| vec![1.0 / (n as f64).sqrt(); n];
    let raw: Vec<Vec<f64>> = vec![
        vec![1.0],
        flat(2),
        vec![0.5; 4],
        flat(5),
        flat(20),
        (0..10).map(|i| 2f64.powi(-i)).collect(),
        (1..=20).map(|i| 1.0 / i as f64).collect(),
        vec![3.0, -1.0, 2.0, 0.5, -0.25],
        std::iter::once(1.0)
            .chain(std::iter::repeat_n(0.1, 19))
            .collect(),
        (0..16)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 } / ((i + 1) as f64).sqrt())
            .collect(),
    ];
    raw.into_iter()
        .map(|a| WeightVector::new(a).expect("battery weights are finite"))
        .collect()
}

pub const BATTERY_P: [f64; 4] = [2.0, 4.0, 8.0, 16.0];
pub const BATTERY_GK_ALPHA: [f64; 3] = [1.0, 1.5, 2.0];
pub const BATTERY_HMO_ALPHA: [f64; 2] = [0.5, 1.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    Gk,
    Hmo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatteryRow {
    pub vector_id: usize,
    pub alpha: f64,
    pub p: f64,
    pub formula_value: f64,
    pub empirical_value: f64,
    pub ratio: f64,
    pub formula: Formula,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatteryReport {
    pub draws: usize,
    pub rows: Vec<BatteryRow>,
    /// Largest `empirical / formula` per formula.
    pub max_ratio_gk: f64,
    pub max_ratio_hmo: f64,
    /// Largest `formula / empirical` per formula.
    pub max_inverse_ratio_gk: f64,
    pub max_inverse_ratio_hmo: f64,
}

impl BatteryReport {
    /// Smallest factor `K` with `1/K ≤ ratio ≤ K` on every row.
    pub fn bracket_factor(&self) -> f64 {
        [
            self.max_ratio_gk,
            self.max_ratio_hmo,
            self.max_inverse_ratio_gk,
            self.max_inverse_ratio_hmo,
        ]
        .into_iter()
        .fold(1.0, f64::max)
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W, path: &Path) -> Result<()> {
        let csv_err = |source| Error::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut writer = csv::Writer::from_writer(out);
        for row in &self.rows {
            writer.serialize(row).map_err(csv_err)?;
        }
        writer.flush().map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Evaluates both formulas against Weibull Monte Carlo on the battery. The
/// empirical norms for one `(vector, α)` are shared by every `p` and by
/// both formulas at `α = 1`.
pub fn run_battery(draws: usize, seed: u64, workers: usize) -> Result<BatteryReport> {
    let alphas = [0.5, 1.0, 1.5, 2.0];
    let mut rows = Vec::new();
    for (vid, a) in battery_vectors().iter().enumerate() {
        for (ai, &alpha) in alphas.iter().enumerate() {
            let dist = DistSpec::weibull(alpha)?;
            let key = derive_key(seed, Domain::Block, &[vid as u64, ai as u64]);
            let empirical = empirical_lp_norms(a, &dist, &BATTERY_P, draws, key, workers)?;
            for (&p, &emp) in BATTERY_P.iter().zip(&empirical) {
                let mut push = |formula, value: f64| {
                    rows.push(BatteryRow {
                        vector_id: vid,
                        alpha,
                        p,
                        formula_value: value,
                        empirical_value: emp,
                        ratio: emp / value,
                        formula,
                    })
                };
                if BATTERY_GK_ALPHA.contains(&alpha) {
                    push(Formula::Gk, gk_moment(a, p, alpha)?);
                }
                if BATTERY_HMO_ALPHA.contains(&alpha) {
                    push(Formula::Hmo, hmo_moment(a, p, alpha)?);
                }
            }
        }
    }
    let extreme = |formula: Formula, inverse: bool| {
        rows.iter()
            .filter(|r| r.formula == formula)
            .map(|r| if inverse { 1.0 / r.ratio } else { r.ratio })
            .fold(0.0, f64::max)
    };
    Ok(BatteryReport {
        draws,
        max_ratio_gk: extreme(Formula::Gk, false),
        max_ratio_hmo: extreme(Formula::Hmo, false),
        max_inverse_ratio_gk: extreme(Formula::Gk, true),
        max_inverse_ratio_hmo: extreme(Formula::Hmo, true),
        rows,
    })
}
