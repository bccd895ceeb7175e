//! Tait equation of state.

use super::{FluidParams, SphError};

/// `P = c0^2 rho0 / gamma * ((rho / rho0)^gamma - 1)`.
pub fn eos_pressure<const D: usize>(rho: f64, params: &FluidParams<D>) -> Result<f64, SphError> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(SphError::NonPositiveDensity(rho));
    }
    Ok(tait(rho, params))
}

/// Inverse of [`eos_pressure`]; defined for `P > -c0^2 rho0 / gamma`.
pub fn eos_density<const D: usize>(press: f64, params: &FluidParams<D>) -> Result<f64, SphError> {
    let b = params.c0 * params.c0 * params.rho0 / params.gamma;
    let base = 1.0 + press / b;
    if !(base > 0.0) {
        return Err(SphError::PressureBelowCutoff(press));
    }
    Ok(params.rho0 * base.powf(1.0 / params.gamma))
}

#[inline]
pub(crate) fn tait<const D: usize>(rho: f64, params: &FluidParams<D>) -> f64 {
    let b = params.c0 * params.c0 * params.rho0 / params.gamma;
    b * ((rho / params.rho0).powf(params.gamma) - 1.0)
}

/// Local sound speed `sqrt(dP/drho)`.
#[inline]
pub fn sound_speed<const D: usize>(rho: f64, params: &FluidParams<D>) -> f64 {
    params.c0 * (rho / params.rho0).powf(0.5 * (params.gamma - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector2;

    fn water(c0: f64) -> FluidParams<2> {
        FluidParams {
            c0,
            gravity: Vector2::new(0.0, -9.8),
            ..FluidParams::water(0.01)
        }
    }

    #[test]
    fn zero_at_reference_density() {
        for c0 in [1.0, 28.0, 1480.0] {
            assert_eq!(eos_pressure(1000.0, &water(c0)).unwrap(), 0.0);
        }
    }

    #[test]
    fn matches_high_precision_evaluation() {
        // 50^2 * 1000 / 7 * (1.01^7 - 1), with 1.01^7 = 1.0721353521070100 exactly
        // to 17 digits (binomial expansion summed by hand).
        let p = eos_pressure(1010.0, &water(50.0)).unwrap();
        let expected = 2500.0 * 1000.0 / 7.0 * 0.072_135_352_107_010_0_f64;
        assert!((p - expected).abs() < 1e-9 * expected, "{p} vs {expected}");
    }

    #[test]
    fn rejects_non_positive_density() {
        assert!(matches!(
            eos_pressure(0.0, &water(10.0)),
            Err(SphError::NonPositiveDensity(_))
        ));
        assert!(eos_pressure(-3.0, &water(10.0)).is_err());
    }

    #[test]
    fn inverse_round_trip() {
        let params = water(28.0);
        for rho in [900.0, 999.0, 1000.0, 1003.0, 1100.0] {
            let p = eos_pressure(rho, &params).unwrap();
            let back = eos_density(p, &params).unwrap();
            assert!((back - rho).abs() < 1e-10 * rho);
        }
        assert!(eos_density(-1e9, &params).is_err());
    }

    proptest::proptest! {
        #[test]
        fn strictly_increasing(a in 500.0f64..1500.0, b in 500.0f64..1500.0) {
            proptest::prop_assume!(a != b);
            let params = water(20.0);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            proptest::prop_assert!(eos_pressure(lo, &params).unwrap() < eos_pressure(hi, &params).unwrap());
        }
    }
}
