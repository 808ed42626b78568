#![allow(dead_code)]

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
pub fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

/// Upper-tail p-value of Pearson's χ² statistic for observed counts against
/// expected probabilities.
pub fn chi_square_p(counts: &[u64], probs: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let stat: f64 = counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| {
            let e = p * n as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    let dist = ChiSquared::new((counts.len() - 1) as f64).unwrap();
    1.0 - dist.cdf(stat)
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Log-log slope.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    slope(&lx, &ly)
}

/// Angular separation in `[0, 2π)` from `a` to `b` on the unit circle.
pub fn angle_between(a: &[f64], b: &[f64]) -> f64 {
    let t = b[1].atan2(b[0]) - a[1].atan2(a[0]);
    t.rem_euclid(std::f64::consts::TAU)
}

/// CDF of the angular step `ψ` on the unit circle, density `sin(ψ/2)/4`.
pub fn psi_cdf(psi: f64) -> f64 {
    (1.0 - (psi / 2.0).cos()) / 2.0
}

/// Step-length quantile on the unit sphere `S^{n−1}` at `level`: chords have
/// length `2t` with `t` the normal component.
pub fn sphere_f(n: usize, level: f64) -> f64 {
    2.0 * (1.0 - (1.0 - level).powf(2.0 / (n as f64 - 1.0))).sqrt()
}

/// Area of the intersection of the unit disk with the disk of radius `t`
/// centered on its boundary.
pub fn lens_area(t: f64) -> f64 {
    use std::f64::consts::PI;
    if t >= 2.0 {
        return PI;
    }
    // Circles of radii 1 and t with centers at distance 1.
    let (r1, r2, d) = (1.0f64, t, 1.0f64);
    let a1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0).acos();
    let a2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0).acos();
    let k = ((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)).max(0.0).sqrt();
    r1 * r1 * a1 + r2 * r2 * a2 - 0.5 * k
}

/// `sup{t : lens_area(t)/(π t²) ≥ gamma}` by bisection (the ratio is
/// decreasing in `t`).
pub fn lens_s_gamma(gamma: f64) -> f64 {
    use std::f64::consts::PI;
    let g = |t: f64| lens_area(t) / (PI * t * t);
    let (mut lo, mut hi) = (1e-9, 100.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= gamma {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
