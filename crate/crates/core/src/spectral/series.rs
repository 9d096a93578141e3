use std::f64::consts::TAU;

use nalgebra::Complex;

use super::basis::EigenBasis;
use super::bessel::bessel_j;
use super::SpectralError;
use crate::shape::ShapeParams;

/// `d_n = ∫_D conj(φ_n) dx` for every pair of a basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoeffs {
    pub d: Vec<Complex<f64>>,
}

/// Resolution of the masked polar quadrature used for `d_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffQuadrature {
    pub radial: usize,
    pub angular: usize,
}

impl Default for CoeffQuadrature {
    fn default() -> Self {
        Self {
            radial: 800,
            angular: 1024,
        }
    }
}

/// Fourier coefficients of `χ_D` with the default quadrature.
pub fn fourier_coeff(shape: &ShapeParams, basis: &EigenBasis) -> FourierCoeffs {
    fourier_coeff_with(|p| shape.contains(p), basis, CoeffQuadrature::default())
}

/// Fourier coefficients of an arbitrary indicator on the disc.
///
/// Midpoint rule on a polar grid over the whole unit disc with the
/// indicator as a mask. The angular sums are shared by all pairs of the
/// same order, and the radial Bessel factors by all angles.
pub fn fourier_coeff_with(
    indicator: impl Fn([f64; 2]) -> bool,
    basis: &EigenBasis,
    quad: CoeffQuadrature,
) -> FourierCoeffs {
    let max_m = basis.max_order();
    let nr = quad.radial;
    let nt = quad.angular;
    let dr = 1.0 / nr as f64;
    let dt = TAU / nt as f64;
    let trig: Vec<(f64, f64)> = (0..nt).map(|j| (dt * (j as f64 + 0.5)).sin_cos()).collect();

    let mut d = vec![Complex::new(0.0, 0.0); basis.len()];
    let mut moments = vec![Complex::new(0.0, 0.0); max_m + 1];
    for i in 0..nr {
        let r = dr * (i as f64 + 0.5);
        moments.iter_mut().for_each(|c| *c = Complex::new(0.0, 0.0));
        let mut any = false;
        for (j, &(s, c)) in trig.iter().enumerate() {
            if !indicator([r * c, r * s]) {
                continue;
            }
            any = true;
            // e^{-imθ} by repeated multiplication, exact enough for |m| ≲ 60
            let theta = dt * (j as f64 + 0.5);
            for (m, mom) in moments.iter_mut().enumerate() {
                let (sm, cm) = (m as f64 * theta).sin_cos();
                *mom += Complex::new(cm, -sm);
            }
        }
        if !any {
            continue;
        }
        let w = r * dr * dt;
        for (n, pair) in basis.pairs().iter().enumerate() {
            let radial = pair.omega * bessel_j(pair.abs_order(), pair.sqrt_lambda() * r);
            let mom = moments[pair.abs_order()];
            // e^{+i|m|θ} for negative orders is the conjugate moment
            let a = if pair.order >= 0 { mom } else { mom.conj() };
            d[n] += a * (w * radial);
        }
    }
    FourierCoeffs { d }
}

/// Boundary flux of `u_t - Δu = χ_D` at angle `θ` and time `t`:
/// `Σ_n ∂_rφ_n(1, θ) d_n (1 - e^{-λ_n t}) / λ_n`.
///
/// The `±m` partners make the sum real; a residual imaginary part beyond
/// rounding signals inconsistent coefficients.
pub fn flux_series(theta: f64, t: f64, coeffs: &FourierCoeffs, basis: &EigenBasis) -> Result<f64, SpectralError> {
    let (value, _) = flux_series_with_derivative(theta, t, coeffs, basis)?;
    Ok(value)
}

/// Flux and its angular derivative `∂_θ`.
pub fn flux_series_with_derivative(
    theta: f64,
    t: f64,
    coeffs: &FourierCoeffs,
    basis: &EigenBasis,
) -> Result<(f64, f64), SpectralError> {
    if !(t >= 0.0) {
        return Err(SpectralError::InvalidArgument(format!("negative time {t}")));
    }
    if coeffs.d.len() != basis.len() {
        return Err(SpectralError::InvalidArgument(format!(
            "{} coefficients for a basis of {}",
            coeffs.d.len(),
            basis.len()
        )));
    }
    let mut sum = Complex::new(0.0, 0.0);
    let mut dsum = Complex::new(0.0, 0.0);
    let mut scale = 0.0;
    for (pair, d) in basis.pairs().iter().zip(&coeffs.d) {
        let growth = -(-pair.lambda * t).exp_m1();
        let c = pair.boundary_slope() / pair.lambda * growth;
        let (s, co) = (pair.order as f64 * theta).sin_cos();
        let term = d * Complex::new(co, s) * c;
        sum += term;
        dsum += term * Complex::new(0.0, pair.order as f64);
        scale += term.norm();
    }
    if sum.im.abs() > 1e-10 * scale.max(f64::MIN_POSITIVE) && sum.im.abs() > 1e-10 * sum.re.abs() {
        return Err(SpectralError::ImaginaryResidual {
            real: sum.re,
            imag: sum.im,
        });
    }
    Ok((sum.re, dsum.re))
}

/// Spectral forward map for one shape and source strength.
#[derive(Debug, Clone)]
pub struct SpectralForward {
    basis: EigenBasis,
    coeffs: FourierCoeffs,
    strength: f64,
}

impl SpectralForward {
    pub fn new(shape: &ShapeParams, strength: f64, basis: EigenBasis) -> Self {
        let coeffs = fourier_coeff(shape, &basis);
        Self {
            basis,
            coeffs,
            strength,
        }
    }

    pub fn from_parts(basis: EigenBasis, coeffs: FourierCoeffs, strength: f64) -> Self {
        Self {
            basis,
            coeffs,
            strength,
        }
    }

    pub fn basis(&self) -> &EigenBasis {
        &self.basis
    }

    pub fn coeffs(&self) -> &FourierCoeffs {
        &self.coeffs
    }

    pub fn flux(&self, theta: f64, t: f64) -> Result<f64, SpectralError> {
        Ok(self.strength * flux_series(theta, t, &self.coeffs, &self.basis)?)
    }

    /// `(flux, ∂_θ flux)`.
    pub fn flux_and_slope(&self, theta: f64, t: f64) -> Result<(f64, f64), SpectralError> {
        let (f, d) = flux_series_with_derivative(theta, t, &self.coeffs, &self.basis)?;
        Ok((self.strength * f, self.strength * d))
    }

    /// Magnitudes `|∂_rφ_n d_n / λ_n|` of the steady-state series terms.
    pub fn term_magnitudes(&self) -> Vec<f64> {
        self.basis
            .pairs()
            .iter()
            .zip(&self.coeffs.d)
            .map(|(p, d)| (p.boundary_slope() / p.lambda).abs() * d.norm())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::spectral::bessel::bessel_j;

    #[test]
    fn full_disc_coefficients() {
        let basis = EigenBasis::build(40).unwrap();
        let quad = CoeffQuadrature {
            radial: 400,
            angular: 256,
        };
        let c = fourier_coeff_with(|p| p[0].hypot(p[1]) < 1.0, &basis, quad);
        for (p, d) in basis.pairs().iter().zip(&c.d) {
            if p.order != 0 {
                assert!(d.norm() < 1e-12, "{p:?} {d}");
            } else {
                let s = p.sqrt_lambda();
                let exact = 2.0 * PI * p.omega * bessel_j(1, s) / s;
                assert!(
                    (d.re - exact).abs() < 1e-4 * exact.abs().max(1.0),
                    "{} vs {exact}",
                    d.re
                );
                assert!(d.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn partners_are_conjugate() {
        let basis = EigenBasis::build(30).unwrap();
        let shape = ShapeParams::circle(0.7, PI / 2.0, 0.2).unwrap();
        let c = fourier_coeff(&shape, &basis);
        for (i, p) in basis.pairs().iter().enumerate() {
            if p.order > 0 {
                assert_eq!(c.d[i + 1], c.d[i].conj());
            }
        }
    }

    #[test]
    fn flux_vanishes_at_time_zero_and_for_empty_source() {
        let basis = EigenBasis::build(30).unwrap();
        let shape = ShapeParams::circle(0.7, PI / 2.0, 0.2).unwrap();
        let c = fourier_coeff(&shape, &basis);
        assert_eq!(flux_series(1.0, 0.0, &c, &basis).unwrap(), 0.0);
        let zero = FourierCoeffs {
            d: vec![Complex::new(0.0, 0.0); basis.len()],
        };
        for t in [0.0, 0.1, 3.0] {
            assert_eq!(flux_series(2.0, t, &zero, &basis).unwrap(), 0.0);
        }
    }

    #[test]
    fn unpaired_coefficients_are_reported() {
        let basis = EigenBasis::build(3).unwrap();
        let mut d = vec![Complex::new(0.0, 0.0); 3];
        d[1] = Complex::new(0.0, 1.0);
        let c = FourierCoeffs { d };
        assert!(matches!(
            flux_series(0.0, 1.0, &c, &basis),
            Err(SpectralError::ImaginaryResidual { .. })
        ));
    }

    #[test]
    fn flux_is_nonpositive_for_positive_source() {
        let basis = EigenBasis::build(200).unwrap();
        let f = SpectralForward::new(&ShapeParams::circle(0.7, PI / 2.0, 0.2).unwrap(), 50.0, basis);
        let peak = f.flux(PI / 2.0, 0.2).unwrap();
        assert!(peak < 0.0);
        // truncation ripple on the far side stays small relative to the peak
        for k in 0..40 {
            let v = f.flux(TAU * k as f64 / 40.0, 0.2).unwrap();
            assert!(v < 1e-3 * peak.abs(), "{v}");
        }
    }
}
