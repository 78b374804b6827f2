//! FastICA on a linear mixture of two uniform and two Laplacian sources.
//! The Amari index of unmixing·mixing measures separation (0 is perfect).
//!
//! cargo run --example fastica -- [seed]

use mockbci::spectral::{amari_index, fastica_fit, FastIcaConfig};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

fn main() -> mockbci::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let n = 20_000;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let uni = Uniform::new(-3f64.sqrt(), 3f64.sqrt());
    let mut s = Array2::<f64>::zeros((4, n));
    for j in 0..n {
        s[[0, j]] = uni.sample(&mut rng);
        s[[1, j]] = uni.sample(&mut rng);
        for i in 2..4 {
            let u: f64 = rng.gen_range(-0.5..0.5);
            s[[i, j]] = -u.signum() * (1.0 - 2.0 * u.abs()).ln() / 2f64.sqrt();
        }
    }
    let a = Array2::from_shape_fn((4, 4), |_| StandardNormal.sample(&mut rng));
    let x = a.dot(&s);
    let labels: Vec<String> = (0..4).map(|i| format!("x{i}")).collect();

    let ica = fastica_fit(x.view(), &labels, &FastIcaConfig::new(4, seed))?;
    println!("converged {} after {} iterations", ica.converged, ica.n_iter);
    println!("Amari index {:.4}", amari_index(&ica.unmixing.dot(&a)));
    Ok(())
}
