use ndarray::ArrayView2;

use crate::signal::Class;

pub const MI_BINS: usize = 8;

/// Equal-frequency bin of each value; tied values share a bin.
pub fn equal_frequency_bins(values: &[f64], n_bins: usize) -> Vec<usize> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut bins = vec![0; n];
    let mut r = 0;
    while r < n {
        let mut end = r;
        while end + 1 < n && values[order[end + 1]] == values[order[r]] {
            end += 1;
        }
        let b = (r * n_bins / n).min(n_bins - 1);
        for &i in &order[r..=end] {
            bins[i] = b;
        }
        r = end + 1;
    }
    bins
}

/// Plug-in mutual information (bits) between a binned feature and the label.
pub fn mutual_information_bits(feature: &[f64], labels: &[Class]) -> f64 {
    let n = feature.len();
    if n == 0 {
        return 0.0;
    }
    let bins = equal_frequency_bins(feature, MI_BINS);
    let k = Class::ALL.len();
    let mut joint = vec![[0usize; 3]; MI_BINS];
    let mut pb = [0usize; MI_BINS];
    let mut py = [0usize; 3];
    for (&b, &y) in bins.iter().zip(labels) {
        joint[b][y.index()] += 1;
        pb[b] += 1;
        py[y.index()] += 1;
    }
    let nf = n as f64;
    let mut mi = 0.0;
    for b in 0..MI_BINS {
        for c in 0..k {
            let j = joint[b][c];
            if j > 0 {
                let pj = j as f64 / nf;
                mi += pj * (pj / (pb[b] as f64 / nf * py[c] as f64 / nf)).log2();
            }
        }
    }
    mi.max(0.0)
}

/// Feature columns in descending MI; ties keep index order. With fewer
/// than ten trials the identity order is returned.
pub fn mi_order(features: ArrayView2<'_, f64>, labels: &[Class]) -> Vec<usize> {
    let m = features.ncols();
    if features.nrows() < 10 {
        log::warn!("MI ordering needs at least 10 trials, got {}", features.nrows());
        return (0..m).collect();
    }
    let scores: Vec<f64> = (0..m)
        .map(|j| mutual_information_bits(&features.column(j).to_vec(), labels))
        .collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order
}
