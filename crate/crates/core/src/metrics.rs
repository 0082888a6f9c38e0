//! Fit metrics for force estimates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gait::{cycle_stats, segment_cycles, CYCLE_POINTS};
use crate::dataio::{ChannelSeries, Component, Trial, Unit};
use crate::model::ForceModel;
use crate::scalar::{mean, Scalar};

fn check_pair<T: Scalar>(f: &[T], fhat: &[T]) -> Result<()> {
    if f.len() != fhat.len() {
        return Err(Error::LengthMismatch(format!("measured has {} samples, estimate {}", f.len(), fhat.len())));
    }
    if f.len() < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    Ok(())
}

/// `100 (1 - ||f - fhat|| / ||f - mean(f)||)` with two-norms.
pub fn nrmse_fit<T: Scalar>(f: &[T], fhat: &[T]) -> Result<T> {
    check_pair(f, fhat)?;
    let m = mean(f);
    let num: T = f.iter().zip(fhat).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>().sqrt();
    let den: T = f.iter().map(|&a| (a - m) * (a - m)).sum::<T>().sqrt();
    if den == T::zero() {
        return Err(Error::ConstantReference);
    }
    Ok(T::lit(100.0) * (T::one() - num / den))
}

/// Coefficient of determination `1 - SS_res / SS_tot`. Can be negative.
pub fn r_squared<T: Scalar>(f: &[T], fhat: &[T]) -> Result<T> {
    check_pair(f, fhat)?;
    let m = mean(f);
    let ss_res: T = f.iter().zip(fhat).map(|(&a, &b)| (a - b) * (a - b)).sum();
    let ss_tot: T = f.iter().map(|&a| (a - m) * (a - m)).sum();
    if ss_tot == T::zero() {
        return Err(Error::ConstantReference);
    }
    Ok(T::one() - ss_res / ss_tot)
}

/// R² between the averaged measured and estimated gait cycles.
pub fn r_squared_cycles<T: Scalar>(f_avg: &[T], fhat_avg: &[T]) -> Result<T> {
    if f_avg.len() != CYCLE_POINTS || fhat_avg.len() != CYCLE_POINTS {
        return Err(Error::LengthMismatch(format!("averaged cycles must have {CYCLE_POINTS} points")));
    }
    r_squared(f_avg, fhat_avg)
}

pub fn rmse<T: Scalar>(f: &[T], fhat: &[T]) -> Result<T> {
    check_pair(f, fhat)?;
    let ss: T = f.iter().zip(fhat).map(|(&a, &b)| (a - b) * (a - b)).sum();
    Ok((ss / T::from_usize_lossy(f.len())).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalizer {
    /// Divide by the measured maximum.
    Max,
    /// Divide by measured maximum minus minimum.
    Range,
}

/// RMSE as a percentage of the measured maximum or range.
pub fn rmse_normalized<T: Scalar>(f: &[T], fhat: &[T], mode: Normalizer) -> Result<T> {
    let e = rmse(f, fhat)?;
    let max = f.iter().copied().fold(T::neg_infinity(), T::max);
    let min = f.iter().copied().fold(T::infinity(), T::min);
    let denom = match mode {
        Normalizer::Max => {
            if !(max > T::zero()) {
                return Err(Error::DegenerateNormalizer("maximum force is not positive".into()));
            }
            max
        }
        Normalizer::Range => {
            if !(max > min) {
                return Err(Error::DegenerateNormalizer("measured force has zero range".into()));
            }
            max - min
        }
    };
    Ok(T::lit(100.0) * e / denom)
}

/// Metric ensemble for one model on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub nrmse_fit_pct: f64,
    /// R² of the averaged gait cycle.
    pub r_squared: f64,
    /// R² over the raw time series.
    pub r_squared_series: f64,
    pub rmse_abs: f64,
    /// RMSE between averaged measured and estimated cycles.
    pub rmse_cycle_abs: f64,
    pub rmse_norm_max_pct: f64,
    pub rmse_norm_range_pct: f64,
    pub n_samples: usize,
    pub warmup_excluded: usize,
    pub n_cycles: usize,
}

impl FitReport {
    /// Time-series metrics only; cycle metrics are NaN.
    pub fn from_series(f: &[f64], fhat: &[f64], warmup: usize) -> Result<FitReport> {
        check_pair(f, fhat)?;
        let w = warmup.min(f.len().saturating_sub(2));
        let (f, fhat) = (&f[w..], &fhat[w..]);
        let rmse_abs = rmse(f, fhat)?;
        Ok(FitReport {
            nrmse_fit_pct: nrmse_fit(f, fhat)?,
            r_squared: f64::NAN,
            r_squared_series: r_squared(f, fhat)?,
            rmse_abs,
            rmse_cycle_abs: f64::NAN,
            rmse_norm_max_pct: rmse_normalized(f, fhat, Normalizer::Max).unwrap_or(f64::NAN),
            rmse_norm_range_pct: rmse_normalized(f, fhat, Normalizer::Range)?,
            n_samples: f.len(),
            warmup_excluded: w,
            n_cycles: 0,
        })
    }

    /// Add averaged-cycle metrics from heel-strike events on the full series.
    pub fn with_cycles(mut self, f: &[f64], fhat: &[f64], rate_hz: f64, events: &[usize]) -> Result<FitReport> {
        let fs = ChannelSeries::new(f.to_vec(), rate_hz, Unit::Newtons, 0.0)?;
        let hs = ChannelSeries::new(fhat.to_vec(), rate_hz, Unit::Newtons, 0.0)?;
        let seg_f = segment_cycles(&fs, events)?;
        let seg_h = segment_cycles(&hs, events)?;
        let sf = cycle_stats(&seg_f)?;
        let sh = cycle_stats(&seg_h)?;
        self.r_squared = r_squared_cycles(&sf.mean, &sh.mean)?;
        self.rmse_cycle_abs = rmse(&sf.mean, &sh.mean)?;
        self.n_cycles = sf.n;
        Ok(self)
    }

    /// The normalized RMSE used for a component: max for vertical, range for mediolateral.
    pub fn rmse_norm_for(&self, c: Component) -> f64 {
        match c {
            Component::Vertical => self.rmse_norm_max_pct,
            Component::Mediolateral => self.rmse_norm_range_pct,
        }
    }
}

/// All metrics for `model` on `trial`, with cycles cut at `events`.
pub fn full_report(trial: &Trial<f64>, model: &ForceModel<f64>, component: Component, events: &[usize]) -> Result<FitReport> {
    let u = trial.inputs();
    let fhat = model.simulate(&u)?;
    let f = trial.output(component);
    FitReport::from_series(f, &fhat, model.warmup())?.with_cycles(f, &fhat, trial.rate_hz(), events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn nrmse_fixed_points() {
        let f = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(nrmse_fit(&f, &f).unwrap(), 100.0);
        assert_eq!(nrmse_fit(&f, &[1.5; 4]).unwrap(), 0.0);
        // ||[0,0,0,-1]|| = 1, ||f - 1.5|| = sqrt(5)
        let v = nrmse_fit(&f, &[0.0, 1.0, 2.0, 4.0]).unwrap();
        assert!((v - 100.0 * (1.0 - 1.0 / 5f64.sqrt())).abs() < 1e-12);
        assert!((v - 55.28).abs() < 0.01);
        assert_eq!(nrmse_fit(&[2.0, 2.0], &[1.0, 3.0]), Err(Error::ConstantReference));
    }

    #[test]
    fn r_squared_fixed_points() {
        let f: Vec<f64> = (0..CYCLE_POINTS).map(|i| (i as f64 * 0.1).sin() * 500.0).collect();
        assert_eq!(r_squared_cycles(&f, &f).unwrap(), 1.0);
        let m = f.iter().sum::<f64>() / f.len() as f64;
        assert!(r_squared_cycles(&f, &vec![m; CYCLE_POINTS]).unwrap().abs() < 1e-15);
        assert!(r_squared_cycles(&f[..5], &f[..5]).is_err());
    }

    #[test]
    fn r_squared_five_points_by_hand() {
        let f = [1.0_f64, 3.0, 2.0, 5.0, 4.0];
        let h = [1.5, 2.5, 2.0, 4.0, 4.5];
        // mean 3; SS_tot = 4+0+1+4+1 = 10; SS_res = .25+.25+0+1+.25 = 1.75
        assert!((r_squared(&f, &h).unwrap() - (1.0 - 1.75 / 10.0)).abs() < 1e-15);
    }

    #[test]
    fn rmse_normalized_cases() {
        let f = [0.0, 400.0, 800.0, 200.0];
        assert_eq!(rmse_normalized(&f, &f, Normalizer::Max).unwrap(), 0.0);
        assert_eq!(rmse_normalized(&f, &f, Normalizer::Range).unwrap(), 0.0);
        // constant 37.3 N error over a [0, 800] N signal
        let h: Vec<f64> = f.iter().map(|v| v + 37.3).collect();
        let v = rmse_normalized(&f, &h, Normalizer::Max).unwrap();
        assert!((v - 4.6625).abs() < 1e-9);
        assert!((v - 4.66).abs() < 0.005);
        assert!(matches!(
            rmse_normalized(&[3.0, 3.0], &[3.0, 3.0], Normalizer::Range),
            Err(Error::DegenerateNormalizer(_))
        ));
        assert!(matches!(
            rmse_normalized(&[-3.0, -1.0], &[3.0, 3.0], Normalizer::Max),
            Err(Error::DegenerateNormalizer(_))
        ));
    }

    #[test]
    fn brute_force_oracles_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..1000 {
            let f: Vec<f64> = (0..CYCLE_POINTS).map(|_| rng.random_range(-50.0..900.0)).collect();
            let h: Vec<f64> = f.iter().map(|v| v + rng.random_range(-40.0..40.0)).collect();
            let n = f.len() as f64;
            let mut sum = 0.0;
            for v in &f {
                sum += v;
            }
            let mu = sum / n;
            let (mut ss_res, mut ss_tot) = (0.0, 0.0);
            let (mut mx, mut mn) = (f[0], f[0]);
            for i in 0..f.len() {
                ss_res += (f[i] - h[i]).powi(2);
                ss_tot += (f[i] - mu).powi(2);
                if f[i] > mx {
                    mx = f[i];
                }
                if f[i] < mn {
                    mn = f[i];
                }
            }
            let r2 = r_squared_cycles(&f, &h).unwrap();
            assert!((r2 - (1.0 - ss_res / ss_tot)).abs() < 1e-12);
            let rm = (ss_res / n).sqrt();
            assert!((rmse_normalized(&f, &h, Normalizer::Max).unwrap() - 100.0 * rm / mx).abs() < 1e-12);
            assert!((rmse_normalized(&f, &h, Normalizer::Range).unwrap() - 100.0 * rm / (mx - mn)).abs() < 1e-12);
        }
    }

    #[test]
    fn works_in_single_precision() {
        let f = [0.0f32, 1.0, 2.0, 3.0];
        let v = nrmse_fit(&f, &[0.0, 1.0, 2.0, 4.0]).unwrap();
        assert!((v - 55.28).abs() < 0.01);
    }

    proptest! {
        #[test]
        fn shift_both_keeps_fit_shift_one_lowers_it(
            f in proptest::collection::vec(-100.0f64..100.0, 3..40),
            noise in proptest::collection::vec(-5.0f64..5.0, 40),
            c in 0.5f64..50.0,
        ) {
            prop_assume!(f.iter().any(|&v| (v - f[0]).abs() > 1e-3));
            let h: Vec<f64> = f.iter().zip(&noise).map(|(a, b)| a + b).collect();
            let base = nrmse_fit(&f, &h).unwrap();
            let fs: Vec<f64> = f.iter().map(|v| v + c).collect();
            let hs: Vec<f64> = h.iter().map(|v| v + c).collect();
            prop_assert!((nrmse_fit(&fs, &hs).unwrap() - base).abs() < 1e-8);
            // adding a constant to the estimate alone moves it away unless the
            // residual mean already opposes the shift
            let hs_only: Vec<f64> = h.iter().map(|v| v + c).collect();
            let res_mean = h.iter().zip(&f).map(|(a, b)| a - b).sum::<f64>() / f.len() as f64;
            if res_mean >= 0.0 {
                prop_assert!(nrmse_fit(&f, &hs_only).unwrap() < base);
            }
            let exact = nrmse_fit(&f, &f).unwrap();
            let shifted: Vec<f64> = f.iter().map(|v| v + c).collect();
            prop_assert!(nrmse_fit(&f, &shifted).unwrap() < exact);
        }

        #[test]
        fn normalized_rmse_scale_invariant(
            f in proptest::collection::vec(1.0f64..100.0, 2..30),
            d in proptest::collection::vec(-5.0f64..5.0, 30),
            s in 0.01f64..100.0,
        ) {
            let h: Vec<f64> = f.iter().zip(&d).map(|(a, b)| a + b).collect();
            let a = rmse_normalized(&f, &h, Normalizer::Max).unwrap();
            let fs: Vec<f64> = f.iter().map(|v| v * s).collect();
            let hs: Vec<f64> = h.iter().map(|v| v * s).collect();
            let b = rmse_normalized(&fs, &hs, Normalizer::Max).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a));
        }

        #[test]
        fn r_squared_at_most_one(
            f in proptest::collection::vec(-100.0f64..100.0, CYCLE_POINTS),
            d in proptest::collection::vec(-5.0f64..5.0, CYCLE_POINTS),
        ) {
            let h: Vec<f64> = f.iter().zip(&d).map(|(a, b)| a + b).collect();
            let r = r_squared_cycles(&f, &h).unwrap();
            prop_assert!(r <= 1.0);
            let same = d.iter().all(|v| *v == 0.0);
            prop_assert_eq!(same, (r - 1.0).abs() < 1e-12 && h == f);
        }

        #[test]
        fn joint_permutation_invariance(
            f in proptest::collection::vec(-100.0f64..100.0, 5..30),
            d in proptest::collection::vec(-5.0f64..5.0, 30),
            seed in any::<u64>(),
        ) {
            prop_assume!(f.iter().any(|&v| (v - f[0]).abs() > 1e-3));
            let h: Vec<f64> = f.iter().zip(&d).map(|(a, b)| a + b).collect();
            let mut idx: Vec<usize> = (0..f.len()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in (1..idx.len()).rev() {
                idx.swap(i, rng.random_range(0..=i));
            }
            let fp: Vec<f64> = idx.iter().map(|&i| f[i]).collect();
            let hp: Vec<f64> = idx.iter().map(|&i| h[i]).collect();
            prop_assert!((nrmse_fit(&f, &h).unwrap() - nrmse_fit(&fp, &hp).unwrap()).abs() < 1e-9);
            prop_assert!((rmse(&f, &h).unwrap() - rmse(&fp, &hp).unwrap()).abs() < 1e-9);
        }
    }
}
