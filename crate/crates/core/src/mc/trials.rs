//! Reproducible Monte Carlo trials of `‖X‖` and `s_n(A)`.

use serde::{Deserialize, Serialize};

use super::solver::{component_norm, largest_singular, smallest_singular, SolverOptions};
use crate::dist::DistSpec;
use crate::error::{Error, Result};
use crate::parallel::map_indexed;
use crate::profile::{draw_symmetric_entry, sample_rectangular, Profile, Shape, SymmetricSupport};
use crate::rng::{stream, trial_seed, Domain};
use crate::stats::{mean, quantile_sorted, sample_variance, sorted, NeumaierSum, Z_95};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    SpectralNorm,
    SmallestSingular,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialConfig {
    pub trials: usize,
    pub master_seed: u64,
    /// Thread count; affects speed only.
    pub workers: usize,
    pub solver: SolverOptions,
}

impl TrialConfig {
    pub fn new(trials: usize, master_seed: u64, tol: f64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::parameter("trials", "must be >= 1"));
        }
        Ok(TrialConfig {
            trials,
            master_seed,
            workers: 1,
            solver: SolverOptions::new(tol)?,
        })
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn with_solver(mut self, solver: SolverOptions) -> Self {
        self.solver = solver;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialSet {
    pub statistic: Statistic,
    pub values: Vec<f64>,
    pub master_seed: u64,
    pub trials: usize,
    pub profile_id: String,
    pub dist: DistSpec,
}

impl TrialSet {
    /// Wraps externally computed values, e.g. for tests of the estimators.
    pub fn from_values(values: Vec<f64>, dist: DistSpec) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Argument(
                "a trial set needs at least one value".into(),
            ));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Argument(format!(
                "trial value {v} is not a finite nonnegative number"
            )));
        }
        Ok(TrialSet {
            statistic: Statistic::SpectralNorm,
            trials: values.len(),
            values,
            master_seed: 0,
            profile_id: "external".into(),
            dist,
        })
    }

    pub fn sorted_values(&self) -> Vec<f64> {
        sorted(&self.values)
    }

    pub fn is_degenerate(&self) -> bool {
        self.values.iter().all(|&v| v == self.values[0])
    }

    pub fn quantile(&self, q: f64) -> f64 {
        quantile_sorted(&self.sorted_values(), q)
    }
}

/// Draws `cfg.trials` independent samples of the statistic. Trial `k` uses
/// seed `trial_seed(master_seed, k)`, so values never depend on the worker
/// count or on how many trials are requested after `k`.
pub fn run_trials(
    profile: &Profile,
    dist: &DistSpec,
    statistic: Statistic,
    cfg: &TrialConfig,
) -> Result<TrialSet> {
    if cfg.trials == 0 {
        return Err(Error::parameter("trials", "must be >= 1"));
    }
    dist.validate()?;
    let values = match (profile.shape(), statistic) {
        (Shape::Symmetric(_), Statistic::SpectralNorm) => symmetric_norms(profile, dist, cfg)?,
        (Shape::Rectangular { rows, cols }, _) => {
            if statistic == Statistic::SmallestSingular && rows < cols {
                return Err(Error::Shape(format!(
                    "smallest singular value needs N >= n, got {rows}x{cols}"
                )));
            }
            map_indexed(cfg.trials, cfg.workers, |k| {
                let a =
                    sample_rectangular(rows, cols, profile, dist, trial_seed(cfg.master_seed, k))?;
                match statistic {
                    Statistic::SmallestSingular => smallest_singular(&a.values),
                    Statistic::SpectralNorm => Ok(largest_singular(&a.values)),
                }
                .map_err(|e| wrap(k, e))
            })?
        }
        (Shape::Symmetric(n), Statistic::SmallestSingular) => return Err(Error::Shape(format!(
            "smallest singular value experiments need a rectangular profile, got symmetric {n}x{n}"
        ))),
    };
    Ok(TrialSet {
        statistic,
        values,
        master_seed: cfg.master_seed,
        trials: cfg.trials,
        profile_id: profile.label().to_string(),
        dist: *dist,
    })
}

fn wrap(trial: usize, e: Error) -> Error {
    Error::Trial {
        trial,
        source: Box::new(e),
    }
}

/// Samples only the support of the profile, component by component. The
/// entries drawn are exactly those `sample_symmetric` would produce.
fn symmetric_norms(profile: &Profile, dist: &DistSpec, cfg: &TrialConfig) -> Result<Vec<f64>> {
    let support = SymmetricSupport::from_profile(profile)?;
    let sampler = dist.sampler();
    map_indexed(cfg.trials, cfg.workers, |k| {
        let seed = trial_seed(cfg.master_seed, k);
        let mut best = 0.0f64;
        let mut local = Vec::new();
        for comp in &support.components {
            if comp.nodes.len() == 1 {
                let (_, _, gi, gj, b) = comp.entries[0];
                best = best.max(draw_symmetric_entry(&sampler, seed, gi, gj, b).abs());
                continue;
            }
            local.clear();
            local.extend(comp.entries.iter().map(|&(li, lj, gi, gj, b)| {
                (li, lj, draw_symmetric_entry(&sampler, seed, gi, gj, b))
            }));
            best = best.max(
                component_norm(comp.nodes.len(), &local, &cfg.solver).map_err(|e| wrap(k, e))?,
            );
        }
        Ok(best)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    /// Half-width of the normal-approximation 95% interval.
    pub ci_half_width: f64,
    /// Percentile bootstrap 95% interval, when requested.
    pub bootstrap: Option<(f64, f64)>,
}

/// Sample mean with a 95% normal interval; optionally a percentile
/// bootstrap interval from `bootstrap = Some((resamples, seed))`.
pub fn estimate_mean(ts: &TrialSet, bootstrap: Option<(usize, u64)>) -> Result<MeanEstimate> {
    let n = ts.values.len();
    if n < 2 {
        return Err(Error::Argument(format!(
            "mean estimate needs at least 2 trials, got {n}"
        )));
    }
    let m = mean(&ts.values);
    let half = if ts.is_degenerate() {
        0.0
    } else {
        Z_95 * (sample_variance(&ts.values) / n as f64).sqrt()
    };
    let boot = match bootstrap {
        None => None,
        Some((resamples, seed)) => {
            if resamples == 0 {
                return Err(Error::parameter("resamples", "must be >= 1"));
            }
            let means: Vec<f64> = (0..resamples)
                .map(|r| {
                    let mut rng = stream(seed, Domain::Block, &[u64::MAX, r as u64]);
                    let s: NeumaierSum = (0..n)
                        .map(|_| ts.values[rand::RngExt::random_range(&mut rng, 0..n)])
                        .collect();
                    s.sum() / n as f64
                })
                .collect();
            let s = sorted(&means);
            Some((quantile_sorted(&s, 0.025), quantile_sorted(&s, 0.975)))
        }
    };
    Ok(MeanEstimate {
        mean: m,
        ci_half_width: half,
        bootstrap: boot,
    })
}

/// `(mean of values^p)^{1/p}`, scaled by the maximum before powering.
pub fn empirical_moment_norm(ts: &TrialSet, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::parameter("p", format!("must be >= 1, got {p}")));
    }
    if p == 1.0 {
        return Ok(mean(&ts.values));
    }
    let top = ts.values.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return Ok(0.0);
    }
    let s: NeumaierSum = ts.values.iter().map(|v| (v / top).powf(p)).collect();
    Ok(top * (s.sum() / ts.values.len() as f64).powf(1.0 / p))
}

/// Moment orders above `ln(trials)` are dominated by a handful of samples.
pub fn moment_order_is_reliable(trials: usize, p: f64) -> bool {
    p <= (trials as f64).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::solver::spectral_norm;
    use crate::profile::{
        make_band, make_diagonal, make_ones_rectangular, make_wigner, make_zero, sample_symmetric,
    };
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cfg(trials: usize, seed: u64) -> TrialConfig {
        TrialConfig::new(trials, seed, 1e-9).unwrap()
    }

    #[test]
    fn single_trial_matches_direct_sample() {
        let dist = DistSpec::weibull(1.2).unwrap();
        for profile in [
            make_band(80, 3).unwrap(),
            make_wigner(9).unwrap(),
            make_diagonal(&[1.0, 2.0, 0.5]).unwrap(),
        ] {
            let ts = run_trials(&profile, &dist, Statistic::SpectralNorm, &cfg(3, 21)).unwrap();
            for k in 0..3 {
                let x = sample_symmetric(&profile, &dist, trial_seed(21, k)).unwrap();
                assert_relative_eq!(
                    ts.values[k],
                    spectral_norm(&x.values, 1e-9).unwrap(),
                    max_relative = 1e-8
                );
            }
        }
    }

    #[test]
    fn workers_do_not_change_values() {
        let dist = DistSpec::weibull(0.8).unwrap();
        let p = make_band(70, 4).unwrap();
        let one = run_trials(&p, &dist, Statistic::SpectralNorm, &cfg(16, 3)).unwrap();
        let eight = run_trials(
            &p,
            &dist,
            Statistic::SpectralNorm,
            &cfg(16, 3).with_workers(8),
        )
        .unwrap();
        assert_eq!(one, eight);
        let longer = run_trials(&p, &dist, Statistic::SpectralNorm, &cfg(20, 3)).unwrap();
        assert_eq!(&longer.values[..16], &one.values[..]);
    }

    #[test]
    fn zero_profile_and_scale_equivariance() {
        let dist = DistSpec::weibull(1.0).unwrap();
        let z = run_trials(
            &make_zero(5).unwrap(),
            &dist,
            Statistic::SpectralNorm,
            &cfg(10, 1),
        )
        .unwrap();
        assert!(z.values.iter().all(|&v| v == 0.0));
        let p = make_diagonal(&[1.0, 0.5, 2.0]).unwrap();
        let base = run_trials(&p, &dist, Statistic::SpectralNorm, &cfg(50, 4)).unwrap();
        let scaled = run_trials(
            &p.scaled(4.0).unwrap(),
            &dist,
            Statistic::SpectralNorm,
            &cfg(50, 4),
        )
        .unwrap();
        for (a, b) in base.values.iter().zip(&scaled.values) {
            assert_eq!(4.0 * a, *b);
        }
    }

    #[test]
    fn rectangular_statistics() {
        let dist = DistSpec::weibull(1.0).unwrap();
        let p = make_ones_rectangular(1, 1).unwrap();
        let s = run_trials(&p, &dist, Statistic::SmallestSingular, &cfg(5, 2)).unwrap();
        let l = run_trials(&p, &dist, Statistic::SpectralNorm, &cfg(5, 2)).unwrap();
        assert_eq!(s.values, l.values);
        assert!(run_trials(
            &make_ones_rectangular(2, 3).unwrap(),
            &dist,
            Statistic::SmallestSingular,
            &cfg(1, 0)
        )
        .is_err());
        assert!(run_trials(
            &make_wigner(2).unwrap(),
            &dist,
            Statistic::SmallestSingular,
            &cfg(1, 0)
        )
        .is_err());
        let zero =
            crate::profile::Profile::rectangular(nalgebra::DMatrix::zeros(4, 2), "zero").unwrap();
        let z = run_trials(&zero, &dist, Statistic::SmallestSingular, &cfg(4, 0)).unwrap();
        assert!(z.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn solver_failure_carries_trial_index() {
        let dist = DistSpec::weibull(1.0).unwrap();
        let solver = SolverOptions::new(1e-12)
            .unwrap()
            .with_method(crate::mc::solver::Method::Lanczos)
            .with_max_iter(2);
        let err = run_trials(
            &make_wigner(30).unwrap(),
            &dist,
            Statistic::SpectralNorm,
            &cfg(4, 0).with_solver(solver),
        )
        .unwrap_err();
        assert!(err.is_convergence());
        assert!(matches!(err, Error::Trial { trial: 0, .. }));
    }

    #[test]
    fn mean_estimates() {
        let dist = DistSpec::weibull(2.0).unwrap();
        let c = TrialSet::from_values(vec![2.5; 10], dist).unwrap();
        let e = estimate_mean(&c, Some((50, 1))).unwrap();
        assert_eq!((e.mean, e.ci_half_width), (2.5, 0.0));
        assert_eq!(e.bootstrap, Some((2.5, 2.5)));
        assert!(estimate_mean(&TrialSet::from_values(vec![1.0], dist).unwrap(), None).is_err());

        let p = make_diagonal(&[1.0]).unwrap();
        let ts = run_trials(&p, &dist, Statistic::SpectralNorm, &cfg(100_000, 8)).unwrap();
        let e = estimate_mean(&ts, None).unwrap();
        let exact = statrs::function::gamma::gamma(1.5);
        assert!(
            (e.mean - exact).abs() <= e.ci_half_width,
            "{} ± {} vs {exact}",
            e.mean,
            e.ci_half_width
        );

        let small = estimate_mean(
            &run_trials(&p, &dist, Statistic::SpectralNorm, &cfg(1000, 9)).unwrap(),
            None,
        )
        .unwrap();
        let large = estimate_mean(
            &run_trials(&p, &dist, Statistic::SpectralNorm, &cfg(4000, 10)).unwrap(),
            None,
        )
        .unwrap();
        let ratio = small.ci_half_width / large.ci_half_width;
        assert!((ratio / 2.0 - 1.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn moment_norm_examples() {
        let dist = DistSpec::weibull(1.0).unwrap();
        let ts = TrialSet::from_values(vec![1.0, 2.0, 4.0], dist).unwrap();
        assert_eq!(empirical_moment_norm(&ts, 1.0).unwrap(), mean(&ts.values));
        let c = TrialSet::from_values(vec![3.0; 7], dist).unwrap();
        for p in [1.0, 2.0, 7.5] {
            assert_relative_eq!(
                empirical_moment_norm(&c, p).unwrap(),
                3.0,
                max_relative = 1e-15
            );
        }
        assert!(moment_order_is_reliable(1000, 6.0));
        assert!(!moment_order_is_reliable(1000, 8.0));
    }

    proptest! {
        #[test]
        fn moment_norm_nondecreasing(values in proptest::collection::vec(0.0f64..100.0, 1..50), p in 1.0f64..20.0, dp in 0.0f64..10.0) {
            let ts = TrialSet::from_values(values, DistSpec::weibull(1.0).unwrap()).unwrap();
            let lo = empirical_moment_norm(&ts, p).unwrap();
            let hi = empirical_moment_norm(&ts, p + dp).unwrap();
            prop_assert!(hi >= lo * (1.0 - 1e-12));
        }
    }
}
