use std::f64::consts::PI;
use std::io::Write;

use super::bessel::{bessel_j, bessel_j_all, refine_zero, MAX_ORDER};
use super::SpectralError;

/// One Dirichlet eigenpair `φ = ω J_|m|(√λ r) e^{imθ}` of the unit disc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair {
    pub lambda: f64,
    pub order: i32,
    pub omega: f64,
    /// Zero index `k` with `√λ = j_{|m|,k}`.
    pub zero_index: usize,
}

impl EigenPair {
    pub fn sqrt_lambda(&self) -> f64 {
        self.lambda.sqrt()
    }

    pub fn abs_order(&self) -> usize {
        self.order.unsigned_abs() as usize
    }

    /// Radial profile `ω J_|m|(√λ r)`.
    pub fn radial(&self, r: f64) -> f64 {
        self.omega * bessel_j(self.abs_order(), self.sqrt_lambda() * r)
    }

    /// `∂_r φ(1, θ) e^{-imθ} = ω √λ J'_|m|(√λ) = -ω √λ J_{|m|+1}(√λ)`.
    pub fn boundary_slope(&self) -> f64 {
        let s = self.sqrt_lambda();
        -self.omega * s * bessel_j(self.abs_order() + 1, s)
    }
}

/// Eigenpairs sorted by eigenvalue, `±m` partners adjacent (`+m` first).
#[derive(Debug, Clone, PartialEq)]
pub struct EigenBasis {
    pairs: Vec<EigenPair>,
}

/// `ω = (√π |J_{|m|+1}(√λ)|)⁻¹`.
pub fn normalization(order: usize, sqrt_lambda: f64) -> f64 {
    1.0 / (PI.sqrt() * bessel_j(order + 1, sqrt_lambda).abs())
}

/// `2π ∫₀¹ ω² J_|m|(√λ r)² r dr` by composite Gauss–Legendre.
pub fn norm_by_quadrature(pair: &EigenPair) -> f64 {
    let gl = crate::fem::gauss_legendre(20);
    let panels = 16;
    let mut s = 0.0;
    for p in 0..panels {
        let a = p as f64 / panels as f64;
        let h = 0.5 / panels as f64;
        for &(x, w) in &gl {
            let r = a + h * (x + 1.0);
            let v = pair.radial(r);
            s += w * h * v * v * r;
        }
    }
    2.0 * PI * s
}

impl EigenBasis {
    /// The `n` smallest Dirichlet eigenvalues counted with multiplicity.
    pub fn build(n: usize) -> Result<Self, SpectralError> {
        if n == 0 {
            return Err(SpectralError::InvalidArgument("basis size must be positive".into()));
        }
        // Weyl: #{λ ≤ Λ} ≈ Λ/4 - √Λ/2; start a little above and extend if short
        let mut x_max = (4.0 * n as f64).sqrt() + 2.0 * (n as f64).powf(0.25) + 4.0;
        loop {
            let found = zeros_below(x_max)?;
            let count: usize = found.iter().map(|&(m, _, _)| if m == 0 { 1 } else { 2 }).sum();
            if count >= n {
                let mut pairs = Vec::with_capacity(count);
                for (m, k, z) in found {
                    let omega = normalization(m, z);
                    let lambda = z * z;
                    pairs.push(EigenPair {
                        lambda,
                        order: m as i32,
                        omega,
                        zero_index: k,
                    });
                    if m > 0 {
                        pairs.push(EigenPair {
                            lambda,
                            order: -(m as i32),
                            omega,
                            zero_index: k,
                        });
                    }
                }
                // stable sort keeps +m before -m
                pairs.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
                pairs.truncate(n);
                // a cut between ±m partners drops the lone +m member
                if let Some(last) = pairs.last() {
                    if last.order > 0 {
                        pairs.pop();
                    }
                }
                return Ok(Self { pairs });
            }
            x_max *= 1.25;
        }
    }

    pub fn pairs(&self) -> &[EigenPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Largest `|m|` present.
    pub fn max_order(&self) -> usize {
        self.pairs.iter().map(EigenPair::abs_order).max().unwrap_or(0)
    }

    /// Writes `n,lambda,m,omega` rows (1-based `n`).
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "n,lambda,m,omega")?;
        for (i, p) in self.pairs.iter().enumerate() {
            writeln!(out, "{},{},{},{}", i + 1, p.lambda, p.order, p.omega)?;
        }
        Ok(())
    }
}

/// All `(m, k, j_{m,k})` with `j_{m,k} < x_max`, found by scanning every order at once.
fn zeros_below(x_max: f64) -> Result<Vec<(usize, usize, f64)>, SpectralError> {
    let max_order = (x_max.ceil() as usize).min(MAX_ORDER + 1);
    let step = 0.2;
    let mut prev = bessel_j_all(max_order, step);
    let mut counts = vec![0usize; max_order + 1];
    let mut out = Vec::new();
    let mut x0 = step;
    while x0 < x_max {
        let x1 = x0 + step;
        let cur = bessel_j_all(max_order, x1);
        for m in 0..=max_order {
            if prev[m].signum() != cur[m].signum() && prev[m] != 0.0 {
                if m > MAX_ORDER {
                    return Err(SpectralError::Tabulation {
                        order: m,
                        count: counts[m] + 1,
                    });
                }
                let z = refine_zero(m, x0, x1)?;
                counts[m] += 1;
                if z < x_max {
                    out.push((m, counts[m], z));
                }
            }
        }
        prev = cur;
        x0 = x1;
    }
    Ok(out)
}

/// True iff `(θ₁ − θ₂)/π` has no rational approximation `p/q` with
/// `q ≤ 10⁶` matching it to double precision.
pub fn check_uniqueness_condition(theta1: f64, theta2: f64) -> bool {
    let x = (theta1 - theta2) / PI;
    let tol = 64.0 * f64::EPSILON * x.abs().max(1.0);
    // continued-fraction convergents p_k / q_k
    let (mut p0, mut q0, mut p1, mut q1) = (1.0f64, 0.0f64, x.floor(), 1.0f64);
    let mut rest = x - x.floor();
    loop {
        if q1 > 1e6 {
            return true;
        }
        if (x - p1 / q1).abs() <= tol {
            return false;
        }
        if rest.abs() < 1e-300 {
            return false;
        }
        let inv = 1.0 / rest;
        let a = inv.floor();
        rest = inv - a;
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::bessel::bessel_zeros;

    #[test]
    fn smallest_eigenvalues() {
        let b = EigenBasis::build(1).unwrap();
        assert!((b.pairs()[0].lambda - 5.783185962946785).abs() < 1e-10);
        assert_eq!(b.pairs()[0].order, 0);

        let b = EigenBasis::build(3).unwrap();
        let p = b.pairs();
        assert!((p[1].lambda - 14.681970642123893).abs() < 1e-10);
        assert_eq!(p[1].lambda, p[2].lambda);
        assert_eq!((p[1].order, p[2].order), (1, -1));
    }

    #[test]
    fn basis_is_sorted_and_paired() {
        let b = EigenBasis::build(400).unwrap();
        let p = b.pairs();
        assert!(p.len() >= 399);
        assert!(p.windows(2).all(|w| w[0].lambda <= w[1].lambda));
        for (i, e) in p.iter().enumerate() {
            if e.order > 0 {
                assert_eq!(p[i + 1].order, -e.order);
                assert_eq!(p[i + 1].lambda, e.lambda);
            }
        }
        // the scan must not have skipped any zero of a present order
        for m in 0..5 {
            let z = bessel_zeros(m, 8).unwrap();
            let listed: Vec<f64> = p
                .iter()
                .filter(|e| e.order == m as i32)
                .map(|e| e.sqrt_lambda())
                .take(8)
                .collect();
            for (a, b) in listed.iter().zip(&z) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn omega_normalizes_by_quadrature() {
        let b = EigenBasis::build(60).unwrap();
        for p in b.pairs() {
            let n = norm_by_quadrature(p);
            assert!((n - 1.0).abs() < 1e-8, "{p:?}: {n}");
            assert!(bessel_j(p.abs_order(), p.sqrt_lambda()).abs() < 1e-12);
        }
    }

    #[test]
    fn uniqueness_condition_examples() {
        use std::f64::consts::PI;
        assert!(!check_uniqueness_condition(PI / 2.0, PI / 4.0));
        assert!(check_uniqueness_condition(1.0, 0.0));
        assert!(!check_uniqueness_condition(0.7, 0.7));
        assert!(!check_uniqueness_condition(26.0 * PI / 40.0, 16.0 * PI / 40.0));
    }

    #[test]
    fn csv_export() {
        let b = EigenBasis::build(3).unwrap();
        let mut buf = Vec::new();
        b.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "n,lambda,m,omega");
        assert_eq!(lines.len(), 4);
        assert!(lines[3].starts_with("3,") && lines[3].contains(",-1,"));
    }
}
