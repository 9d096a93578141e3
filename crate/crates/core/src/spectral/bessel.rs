//! Bessel functions of the first kind and their positive zeros.

use std::f64::consts::PI;

use super::SpectralError;

/// Largest tabulated order for zero searches.
pub const MAX_ORDER: usize = 60;
/// Largest tabulated zero index per order.
pub const MAX_ZERO_INDEX: usize = 100;

const SERIES_LIMIT: f64 = 5.0;

fn series(m: usize, x: f64) -> f64 {
    // Σ (-1)^k (x/2)^{2k+m} / (k! (k+m)!)
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=m {
        term *= half / k as f64;
    }
    let q = -half * half;
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + m as f64));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() || k > 200.0 {
            break;
        }
        k += 1.0;
    }
    sum
}

/// `J_0(x) … J_{max_order}(x)` for `x > 0` by Miller's downward recurrence
/// normalized with `J₀ + 2 Σ J_{2k} = 1`.
pub fn bessel_j_all(max_order: usize, x: f64) -> Vec<f64> {
    if x == 0.0 {
        let mut v = vec![0.0; max_order + 1];
        v[0] = 1.0;
        return v;
    }
    if x < 0.0 {
        let mut v = bessel_j_all(max_order, -x);
        for (m, j) in v.iter_mut().enumerate() {
            if m % 2 == 1 {
                *j = -*j;
            }
        }
        return v;
    }
    if x < SERIES_LIMIT {
        return (0..=max_order).map(|m| series(m, x)).collect();
    }
    let top = (max_order as f64).max(x);
    let mut start = (top + 30.0 + (50.0 * top).sqrt()) as usize;
    start += start % 2;
    let mut out = vec![0.0; max_order + 1];
    let mut jp1 = 0.0;
    let mut j = 1e-300;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        // J_{k-1} = (2k/x) J_k - J_{k+1}
        let jm1 = 2.0 * k as f64 / x * j - jp1;
        jp1 = j;
        j = jm1;
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
        let order = k - 1;
        if order <= max_order {
            out[order] = j;
        }
        if order % 2 == 0 && order > 0 {
            norm += 2.0 * j;
        }
    }
    norm += j;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

/// `J_m(x)`.
pub fn bessel_j(m: usize, x: f64) -> f64 {
    if x.abs() < SERIES_LIMIT {
        let v = series(m, x.abs());
        return if x < 0.0 && m % 2 == 1 { -v } else { v };
    }
    bessel_j_all(m, x)[m]
}

/// Zero of `J_m` inside a sign-changing bracket, to ~1e-15 relative.
pub(crate) fn refine_zero(m: usize, mut lo: f64, mut hi: f64) -> Result<f64, SpectralError> {
    let mut flo = bessel_j(m, lo);
    let fhi = bessel_j(m, hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(SpectralError::Bracket { order: m, lo, hi });
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let v = bessel_j_all(m + 1, x);
        let f = v[m];
        if f == 0.0 {
            return Ok(x);
        }
        if f.signum() == flo.signum() {
            lo = x;
            flo = f;
        } else {
            hi = x;
        }
        // J_m' = (m/x) J_m - J_{m+1}
        let d = m as f64 / x * f - v[m + 1];
        let newton = x - f / d;
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 1e-15 * x || hi - lo <= 1e-15 * x {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// McMahon's large-zero expansion, used as a search start.
pub fn mcmahon(m: usize, k: usize) -> f64 {
    let mu = 4.0 * (m * m) as f64;
    let b = (k as f64 + 0.5 * m as f64 - 0.25) * PI;
    b - (mu - 1.0) / (8.0 * b) - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * (8.0 * b).powi(3))
}

/// First `count` positive zeros of `J_m`.
///
/// Scans for sign changes from just below `m` (all zeros exceed `m`) with a
/// step well under the zero spacing, then polishes each bracket.
pub fn bessel_zeros(m: usize, count: usize) -> Result<Vec<f64>, SpectralError> {
    if m > MAX_ORDER || count > MAX_ZERO_INDEX {
        return Err(SpectralError::Tabulation { order: m, count });
    }
    let mut zeros = Vec::with_capacity(count);
    let step = 0.25;
    let mut x0 = (m as f64).max(step);
    let mut f0 = bessel_j(m, x0);
    // never scan past the asymptotic location of the last requested zero plus slack
    let limit = mcmahon(m, count).max(m as f64) + 10.0 + m as f64;
    while zeros.len() < count {
        let x1 = x0 + step;
        if x1 > limit + 50.0 {
            return Err(SpectralError::Bracket {
                order: m,
                lo: x0,
                hi: x1,
            });
        }
        let f1 = bessel_j(m, x1);
        if f1 == 0.0 || f0.signum() != f1.signum() {
            zeros.push(refine_zero(m, x0, x1)?);
            if f1 == 0.0 {
                // skip past the exact zero so it is not counted twice
                x0 = x1 + 1e-9;
                f0 = bessel_j(m, x0);
                continue;
            }
        }
        x0 = x1;
        f0 = f1;
    }
    Ok(zeros)
}
