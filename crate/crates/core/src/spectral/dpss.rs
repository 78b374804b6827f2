//! Discrete prolate spheroidal sequences (Slepian tapers) from the
//! commuting tridiagonal matrix, by Sturm bisection and inverse iteration.

use std::f64::consts::PI;

use ndarray::Array2;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct DpssBasis {
    /// K × N, each row unit-norm.
    pub tapers: Array2<f64>,
    /// Spectral concentration in `[-W, W]`, non-increasing.
    pub concentrations: Vec<f64>,
    pub nw: f64,
}

impl DpssBasis {
    pub fn n_tapers(&self) -> usize {
        self.tapers.nrows()
    }

    pub fn len(&self) -> usize {
        self.tapers.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.tapers.is_empty()
    }
}

struct Tridiagonal {
    diag: Vec<f64>,
    /// `off[i]` couples rows i and i+1.
    off: Vec<f64>,
}

impl Tridiagonal {
    fn slepian(n: usize, w: f64) -> Self {
        let c = (2.0 * PI * w).cos();
        let diag = (0..n)
            .map(|i| {
                let h = (n as f64 - 1.0 - 2.0 * i as f64) / 2.0;
                h * h * c
            })
            .collect();
        let off = (1..n).map(|i| (i * (n - i)) as f64 / 2.0).collect();
        Self { diag, off }
    }

    /// Number of eigenvalues strictly less than `x`.
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.diag.len() {
            let denom = if q == 0.0 { f64::EPSILON * self.off[i - 1].abs().max(1.0) } else { q };
            q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / denom;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `j`-th smallest eigenvalue (0-based) by bisection.
    fn eigenvalue(&self, j: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Solves `(T − shift·I) x = b` with partial pivoting.
    fn solve_shifted(&self, shift: f64, b: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        // upper-triangular factor with up to two super-diagonals
        let mut d: Vec<f64> = self.diag.iter().map(|v| v - shift).collect();
        let mut du: Vec<f64> = self.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut dl: Vec<f64> = self.off.clone();
        let mut rhs = b.to_vec();
        let tiny = f64::EPSILON * self.gershgorin().1.abs().max(1.0);
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let f = dl[i] / d[i];
                d[i + 1] -= f * du[i];
                rhs[i + 1] -= f * rhs[i];
                dl[i] = f;
            } else {
                let f = d[i] / dl[i];
                d[i] = dl[i];
                let tmp = d[i + 1];
                d[i + 1] = du[i] - f * tmp;
                if i + 1 < n - 1 {
                    du2[i] = du[i + 1];
                    du[i + 1] = -f * du2[i];
                }
                du[i] = tmp;
                rhs.swap(i, i + 1);
                rhs[i + 1] -= f * rhs[i];
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut v = rhs[i];
            if i + 1 < n {
                v -= du[i] * x[i + 1];
            }
            if i + 2 < n {
                v -= du2[i] * x[i + 2];
            }
            x[i] = v / d[i];
        }
        x
    }
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
}

/// Fraction of a unit-energy sequence's energy inside `[-w, w]` cycles/sample,
/// via its autocorrelation against the sinc kernel.
pub fn concentration(taper: &[f64], w: f64) -> f64 {
    let n = taper.len();
    let mut total = 2.0 * w * taper.iter().map(|x| x * x).sum::<f64>();
    for lag in 1..n {
        let r: f64 = taper[..n - lag].iter().zip(&taper[lag..]).map(|(a, b)| a * b).sum();
        total += 2.0 * r * (2.0 * PI * w * lag as f64).sin() / (PI * lag as f64);
    }
    total
}

/// First `k` Slepian tapers of length `n_samples` with time-half-bandwidth
/// product `nw`, ordered by descending concentration.
pub fn dpss_tapers(n_samples: usize, nw: f64, k: usize) -> Result<DpssBasis> {
    if k == 0 || k > n_samples {
        return Err(Error::InvalidRequest(format!(
            "{k} tapers requested for {n_samples} samples"
        )));
    }
    if !(nw > 0.0 && nw < n_samples as f64 / 2.0) {
        return Err(Error::InvalidRequest(format!("NW = {nw} out of range for N = {n_samples}")));
    }
    if k as f64 > 2.0 * nw - 1.0 {
        log::warn!("{k} tapers exceed the 2NW-1 = {} well-concentrated count", 2.0 * nw - 1.0);
    }
    let w = nw / n_samples as f64;
    if n_samples == 1 {
        return Ok(DpssBasis {
            tapers: Array2::from_elem((1, 1), 1.0),
            concentrations: vec![concentration(&[1.0], w)],
            nw,
        });
    }
    let tri = Tridiagonal::slepian(n_samples, w);
    let mut tapers = Array2::<f64>::zeros((k, n_samples));
    let mut found: Vec<Vec<f64>> = Vec::with_capacity(k);
    for order in 0..k {
        let lambda = tri.eigenvalue(n_samples - 1 - order);
        let scale = lambda.abs().max(1.0);
        let shift = lambda + scale * 1e-13;
        let mut v: Vec<f64> = (0..n_samples)
            .map(|i| 1.0 + 0.01 * ((i * 7 + order * 13) % 17) as f64)
            .collect();
        normalize(&mut v);
        for _ in 0..6 {
            let mut next = tri.solve_shifted(shift, &v);
            for prev in &found {
                let dot: f64 = prev.iter().zip(&next).map(|(a, b)| a * b).sum();
                next.iter_mut().zip(prev).for_each(|(x, p)| *x -= dot * p);
            }
            normalize(&mut next);
            v = next;
        }
        let sign = if order % 2 == 0 {
            v.iter().sum::<f64>().signum()
        } else {
            let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            v.iter()
                .find(|x| x.abs() > 1e-12 * peak)
                .map(|x| x.signum())
                .unwrap_or(1.0)
        };
        v.iter_mut().for_each(|x| *x *= sign);
        tapers.row_mut(order).iter_mut().zip(&v).for_each(|(t, x)| *t = *x);
        found.push(v);
    }
    let concentrations = found.iter().map(|t| concentration(t, w)).collect();
    Ok(DpssBasis {
        tapers,
        concentrations,
        nw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthonormal_and_ordered() {
        let b = dpss_tapers(512, 4.0, 7).unwrap();
        let g = b.tapers.dot(&b.tapers.t());
        for i in 0..7 {
            for j in 0..7 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g[[i, j]] - want).abs() < 1e-10, "gram[{i},{j}] = {}", g[[i, j]]);
            }
        }
        assert!(b.concentrations.windows(2).all(|w| w[0] >= w[1]));
        assert!(b.concentrations[0] > 0.9999 && b.concentrations[0] <= 1.0);
    }

    #[test]
    fn parity_and_sign_convention() {
        let b = dpss_tapers(256, 3.0, 5).unwrap();
        for k in 0..5 {
            let row = b.tapers.row(k);
            let parity = if k % 2 == 0 { 1.0 } else { -1.0 };
            for i in 0..256 {
                assert!((row[i] - parity * row[255 - i]).abs() < 1e-9);
            }
            if k % 2 == 0 {
                assert!(row.sum() > 0.0);
            } else {
                assert!(row[0] > 0.0);
            }
        }
    }

    #[test]
    fn satisfies_tridiagonal_eigen_equation() {
        let n = 128;
        let w = 2.5 / n as f64;
        let b = dpss_tapers(n, 2.5, 3).unwrap();
        let tri = Tridiagonal::slepian(n, w);
        for k in 0..3 {
            let v = b.tapers.row(k).to_vec();
            let tv: Vec<f64> = (0..n)
                .map(|i| {
                    let mut s = tri.diag[i] * v[i];
                    if i > 0 {
                        s += tri.off[i - 1] * v[i - 1];
                    }
                    if i + 1 < n {
                        s += tri.off[i] * v[i + 1];
                    }
                    s
                })
                .collect();
            let lambda: f64 = tv.iter().zip(&v).map(|(a, b)| a * b).sum();
            let resid = tv.iter().zip(&v).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt();
            assert!(resid < 1e-8 * lambda.abs().max(1.0));
        }
    }

    #[test]
    fn too_many_tapers() {
        assert!(matches!(dpss_tapers(4, 1.5, 5), Err(Error::InvalidRequest(_))));
    }
}
