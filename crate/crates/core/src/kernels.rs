//! One-dimensional kernels φ, ψ and ψ̂ on the weight-product interval `[1, c]`.
//!
//! All derivatives are closed forms:
//!
//! ```text
//! φ(t)   = 2 − 1/t − ln(t)/(2c)
//! φ'(t)  = (2c − t) / (2c t²)
//! φ''(t) = −(4c − t) / (2c t³)
//! ψ(t)   = 1 / (t φ(t)),   ψ̂(t) = t ψ(t) = 1 / φ(t)
//! ψ̂'     = −φ' / φ²,       ψ̂''  = −(φ φ'' − 2 φ'²) / φ³
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent of the mixed weight factor `w^{1−β} v^{−β}` in b₄ and b₅.
pub const BETA: f64 = 0.75;

/// Multiplier of the majorant `G`.
pub const KAPPA: f64 = 0.5;

/// Square of the constant in the majorant `G = κ(y²w − C²c²x²/v)`.
pub const MAJORANT_C_SQUARED: f64 = 1_228_800.0;

/// Relative slack under which a product `t` just outside `[1, c]` is clamped
/// back onto the interval instead of being rejected.
pub const CLAMP_SLACK: f64 = 1e-12;

/// The characteristic bound `c > 1` together with the fixed constants β, κ and C².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainParams {
    c: f64,
}

impl DomainParams {
    pub fn new(c: f64) -> Result<Self> {
        if !c.is_finite() || c <= 1.0 {
            return Err(Error::Parameter(c));
        }
        Ok(Self { c })
    }

    #[inline]
    pub fn c(&self) -> f64 {
        self.c
    }

    #[inline]
    pub fn beta(&self) -> f64 {
        BETA
    }

    #[inline]
    pub fn kappa(&self) -> f64 {
        KAPPA
    }

    #[inline]
    pub fn c_squared_majorant(&self) -> f64 {
        MAJORANT_C_SQUARED
    }

    /// `c^β`.
    #[inline]
    pub fn c_pow_beta(&self) -> f64 {
        (BETA * self.c.ln()).exp()
    }

    /// Validates `t ∈ [1, c]`, clamping values that miss the interval by at
    /// most `CLAMP_SLACK · c`.
    pub fn check_product(&self, t: f64) -> Result<f64> {
        let slack = CLAMP_SLACK * self.c;
        if !t.is_finite() || t < 1.0 - slack || t > self.c + slack {
            return Err(Error::Domain(format!(
                "weight product t = {t} not in [1, {}]",
                self.c
            )));
        }
        Ok(t.clamp(1.0, self.c))
    }
}

/// All kernel values at one product `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub t: f64,
    pub phi: f64,
    pub phi_d1: f64,
    pub phi_d2: f64,
    pub psi: f64,
    pub psi_hat: f64,
    pub psi_hat_d1: f64,
    pub psi_hat_d2: f64,
}

#[inline]
pub(crate) fn phi_raw(t: f64, c: f64) -> f64 {
    2.0 - 1.0 / t - t.ln() / (2.0 * c)
}

#[inline]
pub(crate) fn phi_d1_raw(t: f64, c: f64) -> f64 {
    (2.0 * c - t) / (2.0 * c * t * t)
}

#[inline]
pub(crate) fn phi_d2_raw(t: f64, c: f64) -> f64 {
    -(4.0 * c - t) / (2.0 * c * t * t * t)
}

/// Kernel values without the interval check. Used by finite-difference
/// probes that step slightly past the boundary of `[1, c]`.
pub(crate) fn kernel_raw(t: f64, c: f64) -> KernelValue {
    let phi = phi_raw(t, c);
    let phi_d1 = phi_d1_raw(t, c);
    let phi_d2 = phi_d2_raw(t, c);
    let psi_hat = 1.0 / phi;
    KernelValue {
        t,
        phi,
        phi_d1,
        phi_d2,
        psi: psi_hat / t,
        psi_hat,
        psi_hat_d1: -phi_d1 / (phi * phi),
        psi_hat_d2: -(phi * phi_d2 - 2.0 * phi_d1 * phi_d1) / (phi * phi * phi),
    }
}

pub fn eval_phi(t: f64, params: &DomainParams) -> Result<f64> {
    let t = params.check_product(t)?;
    Ok(phi_raw(t, params.c()))
}

/// Returns `(φ'(t), φ''(t))`.
pub fn eval_phi_derivatives(t: f64, params: &DomainParams) -> Result<(f64, f64)> {
    let t = params.check_product(t)?;
    Ok((phi_d1_raw(t, params.c()), phi_d2_raw(t, params.c())))
}

pub fn eval_psi_family(t: f64, params: &DomainParams) -> Result<KernelValue> {
    let t = params.check_product(t)?;
    Ok(kernel_raw(t, params.c()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: f64) -> DomainParams {
        DomainParams::new(c).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(DomainParams::new(1.0), Err(Error::Parameter(1.0)));
        assert!(DomainParams::new(0.5).is_err());
        assert!(DomainParams::new(f64::NAN).is_err());
        assert!(DomainParams::new(f64::INFINITY).is_err());
    }

    #[test]
    fn constants_are_fixed() {
        let params = p(3.0);
        assert_eq!(params.beta(), 0.75);
        assert_eq!(params.kappa(), 0.5);
        assert_eq!(params.c_squared_majorant(), 1_228_800.0);
    }

    #[test]
    fn domain_errors_and_clamping() {
        let params = p(2.0);
        assert!(matches!(eval_phi(0.999, &params), Err(Error::Domain(_))));
        assert!(matches!(eval_phi(2.001, &params), Err(Error::Domain(_))));
        // Rounding noise on the edges is clamped.
        assert_eq!(eval_phi(1.0 - 1e-14, &params).unwrap(), 1.0);
        let at_c = eval_phi(2.0 + 1e-13, &params).unwrap();
        assert_eq!(at_c, eval_phi(2.0, &params).unwrap());
    }

    #[test]
    fn phi_reference_values() {
        // φ(1) = 1 for every c.
        for c in [1.01, 2.0, 10.0, 1e4] {
            assert_eq!(eval_phi(1.0, &p(c)).unwrap(), 1.0);
        }
        // 50-digit references: 2 − 1/2 − ln(2)/4 and 2 − 2/3 − ln(1.5)/4.
        let v = eval_phi(2.0, &p(2.0)).unwrap();
        assert!(rel(v, 1.326_713_204_860_013_672_645_691_969_635_455_857_98) < 1e-15);
        let v = eval_phi(1.5, &p(2.0)).unwrap();
        assert!(rel(v, 1.231_967_056_306_292_237_838_830_054_467_246_049_19) < 1e-15);
    }

    #[test]
    fn derivative_reference_values() {
        let (d1, d2) = eval_phi_derivatives(1.0, &p(2.0)).unwrap();
        assert!(rel(d1, 0.75) < 1e-15);
        assert!(rel(d2, -1.75) < 1e-15);
        for c in [1.5, 2.0, 7.0] {
            let (d1, _) = eval_phi_derivatives(c, &p(c)).unwrap();
            assert!(rel(d1, 1.0 / (2.0 * c * c)) < 1e-15);
        }
    }

    #[test]
    fn psi_family_reference_values() {
        let k = eval_psi_family(1.0, &p(2.0)).unwrap();
        assert_eq!(k.psi, 1.0);
        assert_eq!(k.psi_hat, 1.0);
        assert!(rel(k.psi_hat_d1, -0.75) < 1e-15);

        // 50-digit references at (t, c) = (1.5, 2) and (3, 10).
        let k = eval_psi_family(1.5, &p(2.0)).unwrap();
        assert!(rel(k.psi, 0.541_140_011_215_461_983_625_764_438_973) < 1e-14);
        assert!(rel(k.psi_hat_d1, -0.183_020_319_836_418_950_890_674_901_979) < 1e-14);
        assert!(rel(k.psi_hat_d2, 0.399_768_235_990_573_840_244_973_952_426) < 1e-14);
        let k = eval_psi_family(3.0, &p(10.0)).unwrap();
        assert!(rel(k.phi, 1.611_736_052_233_261_182_096_904_404_820) < 1e-14);
        assert!(rel(k.psi, 0.206_816_328_809_831_147_214_550_272_691) < 1e-14);
        assert!(rel(k.psi_hat_d1, -0.036_357_044_783_019_764_041_251_730_417) < 1e-14);
        assert!(rel(k.psi_hat_d2, 0.030_637_576_847_891_289_604_280_902_238) < 1e-14);
    }

    #[test]
    fn kernel_invariants_on_dense_grid() {
        for c in [1.001, 1.1, 2.0, 10.0, 100.0] {
            let params = p(c);
            for i in 0..=2000 {
                let t = 1.0 + (c - 1.0) * i as f64 / 2000.0;
                let k = eval_psi_family(t, &params).unwrap();
                assert!((1.0..=2.0).contains(&k.phi));
                assert!(k.phi_d1 >= 0.0 && k.phi_d2 <= 0.0);
                assert!(k.psi <= 1.0 / t * (1.0 + 1e-15));
                assert!((k.psi_hat * k.phi - 1.0).abs() < 1e-12);
                // 2φ' + tφ'' = −1/(2ct)
                let lhs = 2.0 * k.phi_d1 + t * k.phi_d2;
                assert!(rel(lhs, -1.0 / (2.0 * c * t)) < 1e-12);
                // φ + tφ' = 2 − ln t/(2c) − 1/(2c) ≤ 2
                let lhs = k.phi + t * k.phi_d1;
                assert!(rel(lhs, 2.0 - t.ln() / (2.0 * c) - 1.0 / (2.0 * c)) < 1e-12);
                assert!(lhs <= 2.0);
                // −φφ''/φ' ≤ 8/t
                assert!(-k.phi * k.phi_d2 / k.phi_d1 <= 8.0 / t * (1.0 + 1e-14));
                // ψ̂ψ̂'' − 2ψ̂'² = −φ''/φ³ ≥ 0
                let lhs = k.psi_hat * k.psi_hat_d2 - 2.0 * k.psi_hat_d1 * k.psi_hat_d1;
                let rhs = -k.phi_d2 / k.phi.powi(3);
                assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs());
                assert!(lhs >= 0.0);
            }
        }
    }

    #[test]
    fn finite_differences_match_closed_forms() {
        for c in [1.1, 2.0, 10.0, 100.0] {
            let params = p(c);
            for i in 1..200 {
                let t = 1.0 + (c - 1.0) * i as f64 / 200.0;
                let h = 1e-5 * t;
                let f = |s: f64| phi_raw(s, c);
                let fd1 = (f(t + h) - f(t - h)) / (2.0 * h);
                let (d1, d2) = eval_phi_derivatives(t, &params).unwrap();
                assert!(rel(fd1, d1) < 1e-6, "c={c} t={t}");
                let g = |s: f64| phi_d1_raw(s, c);
                let fd2 = (g(t + h) - g(t - h)) / (2.0 * h);
                assert!(rel(fd2, d2) < 1e-6, "c={c} t={t}");
            }
        }
    }
}
