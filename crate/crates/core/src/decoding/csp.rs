use std::io::Write;

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use super::covariance::{pooled_covariance, Shrinkage, TrialCovariances, TrialStats};
use super::mi::mi_order;
use crate::error::{Error, Result};
use crate::linalg::{from_na, generalized_eig, to_na};
use crate::signal::{Class, Epochs};

pub const DEFAULT_N_FILTERS: usize = 6;
pub const LOG_POWER_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpatialFilterBank {
    /// n_filters × channels, unit-norm rows.
    pub filters: Array2<f64>,
    /// channels × n_filters.
    pub patterns: Array2<f64>,
    pub mi_order: Vec<usize>,
    /// Class each filter discriminates (one-vs-rest).
    pub filter_class: Vec<Class>,
    pub eigenvalues: Vec<f64>,
    pub classes: Vec<Class>,
    /// Shrinkage coefficient per class covariance, in `classes` order.
    pub shrinkage: Vec<f64>,
    pub channels: Vec<String>,
}

impl SpatialFilterBank {
    pub fn n_filters(&self) -> usize {
        self.filters.nrows()
    }

    /// Log band power from cached trial statistics: `log(wᵀCw + 1e-12)`.
    pub fn features_from_stats(&self, stats: &[&TrialStats]) -> Array2<f64> {
        let mut out = Array2::zeros((stats.len(), self.n_filters()));
        for (i, st) in stats.iter().enumerate() {
            let c = st.covariance();
            let wc = self.filters.dot(&c);
            for f in 0..self.n_filters() {
                out[[i, f]] = (wc.row(f).dot(&self.filters.row(f)) + LOG_POWER_FLOOR).ln();
            }
        }
        out
    }

    fn check_layout(&self, labels: &[String]) -> Result<()> {
        if labels != self.channels.as_slice() {
            return Err(Error::Layout(format!(
                "filter bank expects {:?}, got {:?}",
                self.channels, labels
            )));
        }
        Ok(())
    }

    /// Patterns as CSV, columns in MI order: `channel,x,y,csp1,…`.
    pub fn write_patterns_csv<W: Write>(&self, mut w: W, positions: &[Option<[f64; 2]>]) -> Result<()> {
        write!(w, "channel,x,y")?;
        for (rank, &f) in self.mi_order.iter().enumerate() {
            write!(w, ",csp{}_{}", rank + 1, self.filter_class[f].name())?;
        }
        writeln!(w)?;
        for (ch, label) in self.channels.iter().enumerate() {
            let pos = positions.get(ch).copied().flatten();
            match pos {
                Some([x, y]) => write!(w, "{label},{x},{y}")?,
                None => write!(w, "{label},,")?,
            }
            for &f in &self.mi_order {
                write!(w, ",{}", self.patterns[[ch, f]])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// One-vs-rest CSP from per-class covariances (`classes` sorted, one matrix
/// each). The MI order is left as the identity.
pub fn csp_from_class_covariances(
    classes: &[Class],
    covs: &[Array2<f64>],
    n_filters: usize,
    channels: Vec<String>,
) -> Result<SpatialFilterBank> {
    let k = classes.len();
    if k < 2 || covs.len() != k {
        return Err(Error::InsufficientData(format!("CSP needs at least two classes, got {k}")));
    }
    if n_filters == 0 || n_filters % k != 0 {
        return Err(Error::InvalidRequest(format!(
            "{n_filters} filters cannot be split evenly over {k} classes"
        )));
    }
    let per = n_filters / k;
    let p = covs[0].nrows();
    if per > p {
        return Err(Error::InvalidRequest(format!("{per} filters per class from {p} channels")));
    }
    let mut filters = Array2::<f64>::zeros((n_filters, p));
    let mut filter_class = Vec::with_capacity(n_filters);
    let mut eigenvalues = Vec::with_capacity(n_filters);
    for (ci, &class) in classes.iter().enumerate() {
        let mut rest = Array2::<f64>::zeros((p, p));
        for (d, c) in covs.iter().enumerate() {
            if d != ci {
                rest += c;
            }
        }
        rest /= (k - 1) as f64;
        let composite = &covs[ci] + &rest;
        let (vals, vecs) = generalized_eig(&to_na(&covs[ci]), &to_na(&composite))?;
        for j in 0..per {
            let v = vecs.column(j);
            let norm = v.norm();
            let row = ci * per + j;
            for ch in 0..p {
                filters[[row, ch]] = v[ch] / norm;
            }
            filter_class.push(class);
            eigenvalues.push(vals[j]);
        }
    }
    let pinv = to_na(&filters)
        .pseudo_inverse(1e-12)
        .map_err(|e| Error::Numerical(format!("pattern pseudo-inverse: {e}")))?;
    Ok(SpatialFilterBank {
        patterns: from_na(&pinv),
        filters,
        mi_order: (0..n_filters).collect(),
        filter_class,
        eigenvalues,
        classes: classes.to_vec(),
        shrinkage: vec![0.0; k],
        channels,
    })
}

/// Fits on the listed trials of a statistics cache.
pub fn csp_fit_trials(
    cache: &TrialCovariances,
    labels: &[Class],
    trials: &[usize],
    n_filters: usize,
    shrinkage: Shrinkage,
) -> Result<SpatialFilterBank> {
    let mut classes: Vec<Class> = trials.iter().map(|&i| labels[i]).collect();
    classes.sort();
    classes.dedup();
    let mut covs = Vec::with_capacity(classes.len());
    let mut coefs = Vec::with_capacity(classes.len());
    for &c in &classes {
        let members: Vec<&TrialStats> = trials
            .iter()
            .filter(|&&i| labels[i] == c)
            .map(|&i| &cache.trials[i])
            .collect();
        if members.len() < 2 {
            return Err(Error::InsufficientData(format!("class {c} has {} trial(s)", members.len())));
        }
        let (cov, s) = pooled_covariance(&members, shrinkage)?;
        covs.push(cov);
        coefs.push(s);
    }
    let mut bank = csp_from_class_covariances(&classes, &covs, n_filters, cache.channels.clone())?;
    bank.shrinkage = coefs;
    let stats: Vec<&TrialStats> = trials.iter().map(|&i| &cache.trials[i]).collect();
    let feats = bank.features_from_stats(&stats);
    let train_labels: Vec<Class> = trials.iter().map(|&i| labels[i]).collect();
    bank.mi_order = mi_order(feats.view(), &train_labels);
    Ok(bank)
}

pub fn csp_fit_multiclass(epochs: &Epochs, n_filters: usize, shrinkage: Shrinkage) -> Result<SpatialFilterBank> {
    let cache = TrialCovariances::from_epochs(epochs)?;
    let all: Vec<usize> = (0..epochs.n_trials()).collect();
    csp_fit_trials(&cache, &epochs.labels, &all, n_filters, shrinkage)
}

/// `log(var(wᵀX) + 1e-12)` per trial and filter.
pub fn csp_log_bandpower(bank: &SpatialFilterBank, epochs: &Epochs) -> Result<Array2<f64>> {
    let labels: Vec<String> = epochs.channels.iter().map(|c| c.label.clone()).collect();
    bank.check_layout(&labels)?;
    let mut out = Array2::zeros((epochs.n_trials(), bank.n_filters()));
    for (i, trial) in epochs.data.axis_iter(Axis(0)).enumerate() {
        let y = bank.filters.dot(&trial);
        for (f, row) in y.axis_iter(Axis(0)).enumerate() {
            let m = row.mean().unwrap_or(0.0);
            let var = row.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / row.len() as f64;
            out[[i, f]] = (var + LOG_POWER_FLOOR).ln();
        }
    }
    Ok(out)
}

/// Variance ratio `wᵀAw / wᵀBw`.
pub fn rayleigh_quotient(w: &Array1<f64>, a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    w.dot(&a.dot(w)) / w.dot(&b.dot(w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{ChannelInfo, ChannelKind};
    use ndarray::Array3;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn synthetic(seed: u64, p: usize, per_class: usize, n: usize, classes: &[Class], scale: &dyn Fn(Class, usize) -> f64) -> Epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut labels = Vec::new();
        for i in 0..per_class * classes.len() {
            labels.push(classes[i % classes.len()]);
        }
        let data = Array3::from_shape_fn((labels.len(), p, n), |(t, c, _)| {
            let v: f64 = StandardNormal.sample(&mut rng);
            v * scale(labels[t], c)
        });
        Epochs {
            onsets: vec![0.0; labels.len()],
            labels,
            data,
            tmin: 0.0,
            tmax: n as f64,
            fs: 1.0,
            channels: (0..p).map(|i| ChannelInfo::new(format!("c{i}"), ChannelKind::Eeg)).collect(),
        }
    }

    #[test]
    fn default_call_gives_six_filters() {
        let e = synthetic(1, 8, 10, 200, &Class::ALL, &|c, ch| if ch == c.index() { 2.0 } else { 1.0 });
        let bank = csp_fit_multiclass(&e, DEFAULT_N_FILTERS, Shrinkage::Auto).unwrap();
        assert_eq!(bank.n_filters(), 6);
        assert_eq!(bank.patterns.dim(), (8, 6));
        let mut sorted = bank.mi_order.clone();
        sorted.sort();
        assert_eq!(sorted, (0..6).collect::<Vec<_>>());
        for row in bank.filters.axis_iter(Axis(0)) {
            assert!((row.dot(&row) - 1.0).abs() < 1e-12);
        }
        let eye = bank.filters.dot(&bank.patterns);
        for i in 0..6 {
            for j in 0..6 {
                assert!((eye[[i, j]] - if i == j { 1.0 } else { 0.0 }).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn identical_covariances_give_half() {
        let c = ndarray::array![[2.0, 0.3, 0.0], [0.3, 1.0, 0.1], [0.0, 0.1, 0.5]];
        let bank = csp_from_class_covariances(
            &[Class::Left, Class::Right],
            &[c.clone(), c],
            2,
            vec!["a".into(), "b".into(), "c".into()],
        )
        .unwrap();
        for v in bank.eigenvalues {
            assert!((v - 0.5).abs() < 1e-6);
        }
    }

    #[test]
    fn top_filter_finds_high_variance_axis_and_is_scale_invariant() {
        let classes = [Class::Left, Class::Right];
        let e = synthetic(3, 6, 20, 300, &classes, &|c, ch| {
            if c == Class::Left && ch == 0 {
                10f64.sqrt()
            } else {
                1.0
            }
        });
        let bank = csp_fit_multiclass(&e, 2, Shrinkage::Auto).unwrap();
        assert_eq!(bank.filter_class[0], Class::Left);
        assert!(bank.filters[[0, 0]].abs() > 0.99);
        let mut scaled = e.clone();
        scaled.data *= 37.0;
        let b2 = csp_fit_multiclass(&scaled, 2, Shrinkage::Auto).unwrap();
        let cos = bank.filters.row(0).dot(&b2.filters.row(0)).abs();
        assert!((cos - 1.0).abs() < 1e-9);
    }

    #[test]
    fn log_bandpower_properties() {
        let e = synthetic(5, 4, 4, 20_000, &Class::ALL, &|_, _| 1.0);
        let bank = csp_fit_multiclass(&e, 3, Shrinkage::Auto).unwrap();
        let f = csp_log_bandpower(&bank, &e).unwrap();
        assert!(f.iter().all(|v| v.abs() < 0.1));
        let cache = TrialCovariances::from_epochs(&e).unwrap();
        let stats: Vec<&TrialStats> = cache.trials.iter().collect();
        let g = bank.features_from_stats(&stats);
        assert!(f.iter().zip(g.iter()).all(|(a, b)| (a - b).abs() < 1e-9));
        let mut twice = e.clone();
        twice.data *= 2.0;
        let f2 = csp_log_bandpower(&bank, &twice).unwrap();
        assert!(f.iter().zip(f2.iter()).all(|(a, b)| (b - a - 4f64.ln()).abs() < 1e-9));
        let mut zero = e.clone();
        zero.data.fill(0.0);
        let fz = csp_log_bandpower(&bank, &zero).unwrap();
        assert!(fz.iter().all(|&v| v == LOG_POWER_FLOOR.ln()));
        let other = e.pick_channels(&[0, 1, 2]);
        assert!(matches!(csp_log_bandpower(&bank, &other), Err(Error::Layout(_))));
    }

    #[test]
    fn filter_count_must_divide() {
        let e = synthetic(1, 5, 4, 50, &Class::ALL, &|_, _| 1.0);
        assert!(matches!(
            csp_fit_multiclass(&e, 4, Shrinkage::Auto),
            Err(Error::InvalidRequest(_))
        ));
    }

    #[test]
    fn patterns_csv_header() {
        let e = synthetic(1, 5, 4, 50, &Class::ALL, &|_, _| 1.0);
        let bank = csp_fit_multiclass(&e, 3, Shrinkage::Auto).unwrap();
        let mut buf = Vec::new();
        bank.write_patterns_csv(&mut buf, &[Some([0.1, 0.2]), None, None, None, None]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 6);
        assert!(lines[0].starts_with("channel,x,y,csp1_"));
        assert!(lines[1].starts_with("c0,0.1,0.2,"));
        assert!(lines[2].starts_with("c1,,,"));
    }
}
