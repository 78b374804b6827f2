//! Random signal primitives. Every generator draws from its own RNG so that
//! switching one source off leaves all others bit-identical.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::signal::design_butterworth_bandpass;

pub(crate) fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) fn white(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(&mut *rng)).collect()
}

fn normalize(x: &mut [f64]) {
    let n = x.len().max(1) as f64;
    let m = x.iter().sum::<f64>() / n;
    let sd = (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n).sqrt();
    if sd > 0.0 {
        for v in x.iter_mut() {
            *v = (*v - m) / sd;
        }
    }
}

/// Unit-variance band-limited Gaussian noise.
pub(crate) fn narrowband(rng: &mut ChaCha8Rng, n: usize, low: f64, high: f64, fs: f64) -> Vec<f64> {
    let mut x = white(rng, n);
    let mut f = design_butterworth_bandpass(2, low, high, fs).expect("validated band");
    f.process(0, &mut x);
    normalize(&mut x);
    x
}

/// Unit-variance 1/f noise: equal-power AR(1) Lorentzians with corner
/// frequencies spaced by octaves from `f_lo`.
pub(crate) fn pink(rng: &mut ChaCha8Rng, n: usize, fs: f64, f_lo: f64, n_terms: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for k in 0..n_terms {
        let fc = (f_lo * 2f64.powi(k as i32)).min(0.45 * fs);
        let rho = (-2.0 * PI * fc / fs).exp();
        let g = (1.0 - rho * rho).sqrt();
        let mut s: f64 = StandardNormal.sample(&mut *rng);
        for v in out.iter_mut() {
            let w: f64 = StandardNormal.sample(&mut *rng);
            s = rho * s + g * w;
            *v += s;
        }
    }
    normalize(&mut out);
    out
}

/// Ornstein-Uhlenbeck process with stationary std `sigma`, sampled per sample.
pub(crate) fn ornstein_uhlenbeck(rng: &mut ChaCha8Rng, n: usize, sigma: f64, tau_s: f64, fs: f64) -> Vec<f64> {
    let rho = (-1.0 / (tau_s * fs)).exp();
    let g = sigma * (1.0 - rho * rho).sqrt();
    let z: f64 = StandardNormal.sample(&mut *rng);
    let mut s = sigma * z;
    (0..n)
        .map(|_| {
            let w: f64 = StandardNormal.sample(&mut *rng);
            s = rho * s + g * w;
            s
        })
        .collect()
}

/// Poisson event times on [0, duration).
pub(crate) fn poisson_times(rng: &mut ChaCha8Rng, rate_hz: f64, duration_s: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if rate_hz <= 0.0 {
        return out;
    }
    let mut t = 0.0;
    loop {
        let u: f64 = rng.gen_range(f64::EPSILON..1.0);
        t += -u.ln() / rate_hz;
        if t >= duration_s {
            return out;
        }
        out.push(t);
    }
}

/// 0 → 1 raised-cosine step over `[start, start + ramp]`.
pub(crate) fn smooth_step(t: f64, start: f64, ramp: f64) -> f64 {
    if t <= start {
        0.0
    } else if ramp <= 0.0 || t >= start + ramp {
        1.0
    } else {
        0.5 - 0.5 * (PI * (t - start) / ramp).cos()
    }
}

/// Plateau window: rises over `[a, a + ramp]`, falls over `[b, b + ramp]`.
pub(crate) fn plateau(t: f64, a: f64, b: f64, ramp: f64) -> f64 {
    (smooth_step(t, a, ramp) - smooth_step(t, b, ramp)).max(0.0)
}

/// Isotropic Gaussian blob gain at `pos` for a source at `center`.
pub(crate) fn blob(pos: [f64; 2], center: [f64; 2], width: f64) -> f64 {
    let d2 = (pos[0] - center[0]).powi(2) + (pos[1] - center[1]).powi(2);
    (-d2 / (2.0 * width * width)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_variance_and_determinism() {
        let a = narrowband(&mut substream(1, 3), 20_000, 8.0, 12.0, 512.0);
        let b = narrowband(&mut substream(1, 3), 20_000, 8.0, 12.0, 512.0);
        assert_eq!(a, b);
        let v = a.iter().map(|x| x * x).sum::<f64>() / a.len() as f64;
        assert!((v - 1.0).abs() < 1e-9);
        let c = narrowband(&mut substream(1, 4), 20_000, 8.0, 12.0, 512.0);
        assert_ne!(a, c);
    }

    #[test]
    fn pink_spectrum_falls() {
        let x = pink(&mut substream(2, 0), 1 << 16, 512.0, 2.0, 8);
        let power = |f: f64| {
            x.chunks(1024)
                .map(|blk| {
                    let (mut re, mut im) = (0.0, 0.0);
                    for (i, v) in blk.iter().enumerate() {
                        let ph = 2.0 * PI * f * i as f64 / 512.0;
                        re += v * ph.cos();
                        im -= v * ph.sin();
                    }
                    re * re + im * im
                })
                .sum::<f64>()
        };
        assert!(power(6.0) > 3.0 * power(48.0));
    }

    #[test]
    fn step_shapes() {
        assert_eq!(smooth_step(0.0, 0.0, 1.0), 0.0);
        assert!((smooth_step(0.5, 0.0, 1.0) - 0.5).abs() < 1e-12);
        assert_eq!(plateau(5.0, 1.0, 4.0, 0.5), 0.0);
        assert_eq!(plateau(2.0, 1.0, 4.0, 0.5), 1.0);
        let t = poisson_times(&mut substream(0, 0), 2.0, 1000.0);
        assert!((t.len() as f64 - 2000.0).abs() < 200.0);
    }
}
