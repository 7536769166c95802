//! Shared statistical helpers for integration tests: Kolmogorov-Smirnov
//! statistics, reference CDFs, and moment estimators. These are test-side
//! oracles, independent of the library's simulation path.

#![allow(dead_code)]

/// One-sample KS statistic against a reference CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(data: &mut [f64], cdf: F) -> f64 {
    data.sort_by(|a, b| a.total_cmp(b));
    let n = data.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in data.iter().enumerate() {
        let f = cdf(x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    d
}

/// Two-sample KS statistic.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(|x, y| x.total_cmp(y));
    b.sort_by(|x, y| x.total_cmp(y));
    let (mut i, mut j) = (0usize, 0usize);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// One-sample KS critical value at significance 0.01.
pub fn ks_critical_001(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

/// Two-sample KS critical value at significance 0.01.
pub fn ks_two_sample_critical_001(n: usize, m: usize) -> f64 {
    1.628 * (((n + m) as f64) / (n as f64 * m as f64)).sqrt()
}

/// CDF of the symmetric-difference Rayleigh law parameterized by the total
/// complex variance: `P(D <= x) = 1 - exp(-x^2 / sigma_d2)`.
pub fn rayleigh_cdf(x: f64, sigma_d2: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        1.0 - (-x * x / sigma_d2).exp()
    }
}

pub fn normal_cdf(x: f64, mean: f64, std: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-(x - mean) / (std * std::f64::consts::SQRT_2))
}

pub fn exponential_cdf(x: f64, mean: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        1.0 - (-x / mean).exp()
    }
}

pub fn uniform_cdf(x: f64, lo: f64, hi: f64) -> f64 {
    ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn std_dev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)).sqrt()
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let mx = mean(xs);
    let my = mean(ys);
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        cov += (x - mx) * (y - my);
        vx += (x - mx) * (x - mx);
        vy += (y - my) * (y - my);
    }
    cov / (vx * vy).sqrt()
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    v[v.len() / 2]
}

pub fn percentile(xs: &[f64], q: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let idx = ((v.len() as f64 - 1.0) * q).round() as usize;
    v[idx]
}

/// Binomial tail `P(X >= k)` for `n` trials at success probability `p`,
/// by direct summation.
pub fn binomial_tail(n: usize, k: usize, p: f64) -> f64 {
    let mut total = 0.0;
    for i in k..=n {
        total += binomial_pmf(n, i, p);
    }
    total.min(1.0)
}

fn binomial_pmf(n: usize, k: usize, p: f64) -> f64 {
    let mut log_c = 0.0;
    for i in 0..k {
        log_c += ((n - i) as f64).ln() - ((k - i) as f64).ln();
    }
    (log_c + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()
}
