//! Random Hammerstein-Wiener truth systems and matching excitation signals.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::sub_rng;
use crate::dataio::{ChannelSeries, GrfRecording, InsoleRecording, Role, Side, Trial, Unit};
use crate::error::{Error, Result};
use crate::model::{quantile_breakpoints, HwModel, LtiBlock, Orders, PwlFunction};

/// Resistance-change span covered by truth input nonlinearities and excitation, in percent.
pub const TRUTH_INPUT_RANGE: (f64, f64) = (-60.0, 10.0);

const REFERENCE_SAMPLES: usize = 60000;

/// Hold time of one excitation level.
pub const EXCITATION_HOLD_S: f64 = 0.2;

/// Stratified multilevel excitation on four channels: evenly spaced levels
/// across [`TRUTH_INPUT_RANGE`], one per hold, in a seeded random order.
/// The amplitude distribution is then fixed by `n` alone, so input quantiles
/// agree between independent sequences of the same length.
pub fn truth_excitation(n: usize, rate_hz: f64, seed: u64) -> [Vec<f64>; 4] {
    let (lo, hi) = TRUTH_INPUT_RANGE;
    let hold = ((EXCITATION_HOLD_S * rate_hz).round() as usize).max(1);
    let levels = n.div_ceil(hold).max(1);
    std::array::from_fn(|c| {
        let mut rng = sub_rng(seed, &format!("excitation-{c}"));
        let mut order: Vec<f64> = (0..levels).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / levels as f64).collect();
        order.shuffle(&mut rng);
        order.iter().flat_map(|&v| std::iter::repeat_n(v, hold)).take(n).collect()
    })
}

fn random_monotone_pwl(xs: Vec<f64>, out_span: f64, rng: &mut impl Rng) -> Result<PwlFunction<f64>> {
    // segment slopes vary by up to a factor of nine
    let raw: Vec<f64> = xs.windows(2).map(|w| rng.random_range(0.2..1.8) * (w[1] - w[0])).collect();
    let total: f64 = raw.iter().sum();
    let mut ys = vec![0.0];
    for r in raw {
        ys.push(ys.last().unwrap() + r / total * out_span);
    }
    PwlFunction::new(xs, ys)
}

fn random_stable_lti(orders: Orders, rng: &mut impl Rng) -> Result<LtiBlock<f64>> {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut a = Vec::with_capacity(orders.na);
    let mut poly = vec![1.0];
    let mut remaining = orders.na;
    while remaining > 0 {
        // multiply in a complex pair or a real pole
        let r: f64 = rng.random_range(0.5..0.9);
        let factor = if remaining >= 2 {
            let th: f64 = rng.random_range(0.05..0.5);
            remaining -= 2;
            vec![1.0, -2.0 * r * th.cos(), r * r]
        } else {
            remaining -= 1;
            vec![1.0, -r]
        };
        let mut next = vec![0.0; poly.len() + factor.len() - 1];
        for (i, p) in poly.iter().enumerate() {
            for (j, f) in factor.iter().enumerate() {
                next[i + j] += p * f;
            }
        }
        poly = next;
    }
    a.extend_from_slice(&poly[1..]);
    let b = (0..4).map(|_| (0..orders.nb).map(|_| normal.sample(rng)).collect()).collect();
    LtiBlock::new(a, b, vec![orders.nk; 4])
}

/// Random stable truth model with `k` breakpoints per nonlinearity and the
/// given LTI orders. Input breakpoints sit at quantiles of a reference
/// excitation and output breakpoints at quantiles of the linear block's
/// response to it. The model is normalized.
pub fn make_truth_hw(k: usize, orders: Orders, seed: u64) -> Result<HwModel<f64>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("truth model needs at least 2 breakpoints, got {k}")));
    }
    orders.validate()?;
    let mut rng = sub_rng(seed, "truth-model");
    let (lo, hi) = TRUTH_INPUT_RANGE;
    let reference = truth_excitation(REFERENCE_SAMPLES, 100.0, seed ^ 0x5eed);
    let refs: Vec<&[f64]> = reference.iter().map(|v| v.as_slice()).collect();
    let mut f1 = Vec::with_capacity(4);
    for r in &reference {
        f1.push(random_monotone_pwl(quantile_breakpoints(r, k)?, hi - lo, &mut rng)?);
    }
    let f1: [PwlFunction<f64>; 4] = f1.try_into().expect("four channels");
    let g = random_stable_lti(orders, &mut rng)?;
    let mut m = HwModel::new(f1, g, PwlFunction::identity(vec![0.0, 1.0])?)?;
    let x = m.linear_stage(&refs)?;
    let warm = m.warmup();
    let xs = quantile_breakpoints(&x[warm..], k)?;
    let span = xs[k - 1] - xs[0];
    let mut f2 = random_monotone_pwl(xs.clone(), span, &mut rng)?;
    let shift = xs[0];
    f2 = f2.affine_output(1.0, shift);
    m.f2 = f2;
    m.validate()?;
    m.normalize(&refs)?;
    Ok(m)
}

/// Trial whose insole channels are `inputs` and whose force components both
/// equal the truth model's output, optionally with multiplicative noise of
/// relative size `noise_frac`.
pub fn truth_trial(
    model: &HwModel<f64>,
    inputs: &[Vec<f64>; 4],
    rate_hz: f64,
    noise_frac: f64,
    seed: u64,
    role: Role,
) -> Result<Trial<f64>> {
    let refs: Vec<&[f64]> = inputs.iter().map(|v| v.as_slice()).collect();
    let mut y = model.simulate(&refs)?;
    if noise_frac > 0.0 {
        let normal = Normal::new(0.0, noise_frac).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let mut rng = sub_rng(seed, "truth-noise");
        for v in &mut y {
            *v *= 1.0 + normal.sample(&mut rng);
        }
    }
    let chans = inputs.clone().map(|v| ChannelSeries::new(v, rate_hz, Unit::Percent, 0.0));
    let [a, b, c, d] = chans;
    let insole = InsoleRecording::new([a?, b?, c?, d?], Side::Left)?;
    let out = ChannelSeries::new(y, rate_hz, Unit::Newtons, 0.0)?;
    let grf = GrfRecording::new(out.clone(), out, Side::Left)?;
    Trial::new(insole, grf, 1.0, role, [1.0; 4])
}

/// Convenience for oracle tests: identification and held-out trials from one truth model.
pub fn truth_pair(
    model: &HwModel<f64>,
    n: usize,
    rate_hz: f64,
    noise_frac: f64,
    seed: u64,
) -> Result<(Trial<f64>, Trial<f64>)> {
    let ident = truth_trial(model, &truth_excitation(n, rate_hz, seed), rate_hz, noise_frac, seed, Role::Identification)?;
    let held = truth_trial(
        model,
        &truth_excitation(n, rate_hz, seed.wrapping_add(1)),
        rate_hz,
        noise_frac,
        seed.wrapping_add(1),
        Role::Validation,
    )?;
    Ok((ident, held))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::Component;

    #[test]
    fn truth_model_is_stable_monotone_and_normalized() {
        for seed in 0..20 {
            let m = make_truth_hw(6, Orders::default(), seed).unwrap();
            assert!(m.g.is_stable());
            assert!(m.f1.iter().all(|f| f.xs().len() == 6 && f.is_monotone()));
            assert!(m.f2.is_monotone());
            let reference = truth_excitation(REFERENCE_SAMPLES, 100.0, seed ^ 0x5eed);
            let refs: Vec<&[f64]> = reference.iter().map(|v| v.as_slice()).collect();
            let w = m.input_stage(&refs);
            for c in 0..4 {
                let sd = crate::scalar::sample_std(&w[c]);
                assert!((sd - 1.0).abs() < 1e-9, "seed {seed} channel {c}: {sd}");
            }
        }
    }

    #[test]
    fn excitation_covers_every_segment() {
        let m = make_truth_hw(6, Orders::default(), 3).unwrap();
        let u = truth_excitation(12000, 100.0, 11);
        for c in 0..4 {
            let xs = m.f1[c].xs();
            for seg in xs.windows(2) {
                assert!(u[c].iter().any(|&v| v > seg[0] && v < seg[1]));
            }
        }
    }

    #[test]
    fn excitation_quantiles_do_not_depend_on_seed() {
        let (a, b) = (truth_excitation(6000, 100.0, 1), truth_excitation(6000, 100.0, 2));
        assert_ne!(a[0], b[0]);
        for c in 0..4 {
            assert_eq!(quantile_breakpoints(&a[c], 7).unwrap(), quantile_breakpoints(&b[c], 7).unwrap());
        }
    }

    #[test]
    fn truth_trial_matches_simulation() {
        let m = make_truth_hw(5, Orders::default(), 1).unwrap();
        let u = truth_excitation(2000, 100.0, 2);
        let t = truth_trial(&m, &u, 100.0, 0.0, 0, Role::Identification).unwrap();
        let refs: Vec<&[f64]> = u.iter().map(|v| v.as_slice()).collect();
        assert_eq!(t.output(Component::Vertical), m.simulate(&refs).unwrap().as_slice());
        let noisy = truth_trial(&m, &u, 100.0, 0.01, 0, Role::Identification).unwrap();
        let y = t.output(Component::Vertical);
        let rel: Vec<f64> = noisy
            .output(Component::Vertical)
            .iter()
            .zip(y)
            .filter(|(_, &b)| b.abs() > 1e-6)
            .map(|(a, b)| a / b - 1.0)
            .collect();
        let sd = crate::scalar::sample_std(&rel);
        assert!((sd - 0.01).abs() < 0.001, "{sd}");
    }

    #[test]
    fn deterministic_in_seed() {
        assert_eq!(make_truth_hw(7, Orders::default(), 42).unwrap(), make_truth_hw(7, Orders::default(), 42).unwrap());
        assert_ne!(make_truth_hw(7, Orders::default(), 42).unwrap(), make_truth_hw(7, Orders::default(), 43).unwrap());
    }
}
