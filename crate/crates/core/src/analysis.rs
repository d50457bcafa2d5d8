//! Independent oracles: the long-time limit of a rational frequency signal
//! and a pairing-free conductance from the electron block alone.

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::leads::{coupling_spectrum, damping, LeadConfig, SelfEnergy};
use crate::model::{build_blocks, WireConfig};
use crate::scalar::{cplx, creal, czero, lit, to_f64, Real};

/// `r / (omega - p)^order`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleTerm<T> {
    pub residue: Complex<T>,
    pub pole: Complex<T>,
    pub order: u32,
}

/// Signal `I(omega) = sum_k r_k / (omega - p_k)^order_k` with causal poles.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PoleSum<T> {
    pub terms: Vec<PoleTerm<T>>,
}

impl<T: Real> PoleSum<T> {
    pub fn new() -> Self {
        PoleSum { terms: Vec::new() }
    }

    /// Adds a simple pole.
    pub fn pole(mut self, residue: Complex<T>, pole: Complex<T>) -> Self {
        self.terms.push(PoleTerm { residue, pole, order: 1 });
        self
    }

    pub fn term(mut self, residue: Complex<T>, pole: Complex<T>, order: u32) -> Self {
        self.terms.push(PoleTerm { residue, pole, order });
        self
    }

    pub fn eval(&self, omega: Complex<T>) -> Complex<T> {
        self.terms.iter().fold(czero(), |acc, t| {
            acc + t.residue / (omega - t.pole).powu(t.order)
        })
    }

    /// Concatenation, i.e. the sum of the two signals.
    pub fn add(&self, other: &PoleSum<T>) -> PoleSum<T> {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().copied());
        PoleSum { terms }
    }

    pub fn scale(&self, c: Complex<T>) -> PoleSum<T> {
        PoleSum {
            terms: self
                .terms
                .iter()
                .map(|t| PoleTerm { residue: t.residue * c, ..*t })
                .collect(),
        }
    }
}

/// `-i lim_{omega -> 0} omega I(omega)`: minus `i` times the residue at the
/// origin, zero when no pole sits there.
pub fn steady_limit<T: Real>(signal: &PoleSum<T>) -> Result<Complex<T>> {
    let origin: T = lit(1e-12);
    let mut residue = czero::<T>();
    for t in &signal.terms {
        if t.pole.im > T::zero() {
            return Err(Error::AcausalPole {
                pole_re: to_f64(t.pole.re),
                pole_im: to_f64(t.pole.im),
            });
        }
        if t.order == 0 || t.residue == czero() {
            continue;
        }
        if t.pole.modulus() <= origin {
            if t.order > 1 {
                return Err(Error::NonSimpleOriginPole { order: t.order });
            }
            residue += t.residue;
        }
    }
    Ok(residue * cplx(T::zero(), -T::one()))
}

/// `Gamma_x Gamma_y |G_e[x, y]|^2` with `G_e = i [omega - h + i D_e]^-1`
/// inverted on the N x N electron block only.
pub fn landauer_oracle<T: Real>(
    config: &WireConfig<T>,
    leads: &[LeadConfig<T>],
    bias: T,
    mode: SelfEnergy,
) -> Result<T> {
    if leads.len() != 2 {
        return Err(Error::LeadCount { expected: 2, got: leads.len() });
    }
    if config.pairing.modulus() != T::zero() {
        return Err(Error::PairingPresent { delta: to_f64(config.pairing.modulus()) });
    }
    let blocks = build_blocks(config)?;
    let n = config.n_sites;
    for lead in leads {
        lead.validate(n)?;
    }
    let i_unit = cplx(T::zero(), T::one());
    let mut a: DMatrix<Complex<T>> = blocks.h.map(|v| creal(-v));
    for k in 0..n {
        a[(k, k)] += creal(bias);
    }
    for lead in leads {
        let x = lead.contact_site - 1;
        a[(x, x)] += i_unit * damping(bias, lead, mode);
    }
    let inv = a
        .lu()
        .try_inverse()
        .ok_or(Error::Singular { omega: to_f64(bias) })?;
    let (x, y) = (leads[0].contact_site - 1, leads[1].contact_site - 1);
    let g = i_unit * inv[(x, y)];
    Ok(g.modulus_squared() * coupling_spectrum(bias, &leads[0]) * coupling_spectrum(bias, &leads[1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn exponential_decay_example() {
        let s = PoleSum::new().pole(c(0.0, 1.0), c(0.0, 0.0)).pole(c(0.0, 1.0), c(1.0, -0.5));
        assert_eq!(steady_limit(&s).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn transient_only_and_scaled() {
        let s = PoleSum::new().pole(c(0.0, 1.0), c(1.0, -0.5));
        assert_eq!(steady_limit(&s).unwrap(), c(0.0, 0.0));
        let s = PoleSum::new().pole(c(0.0, 3.0), c(0.0, 0.0));
        assert_eq!(steady_limit(&s).unwrap(), c(3.0, 0.0));
    }

    #[test]
    fn rejects_double_origin_pole_and_acausal_poles() {
        let s = PoleSum::new().term(c(1.0, 0.0), c(0.0, 0.0), 2);
        assert_eq!(steady_limit(&s), Err(Error::NonSimpleOriginPole { order: 2 }));
        let s = PoleSum::new().pole(c(1.0, 0.0), c(0.3, 0.1));
        assert!(matches!(steady_limit(&s), Err(Error::AcausalPole { .. })));
    }

    #[test]
    fn origin_tolerance() {
        let s = PoleSum::new().pole(c(0.0, 2.0), c(5e-13, -5e-13));
        assert_eq!(steady_limit(&s).unwrap(), c(2.0, 0.0));
        let s = PoleSum::new().pole(c(0.0, 2.0), c(1e-9, 0.0));
        assert_eq!(steady_limit(&s).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn eval_matches_definition() {
        let s = PoleSum::new().pole(c(0.0, 1.0), c(1.0, -0.5));
        let w = c(0.3, 0.0);
        assert!((s.eval(w) - c(0.0, 1.0) / (w - c(1.0, -0.5))).norm() < 1e-15);
    }

    #[test]
    fn oracle_rejects_pairing() {
        let w = WireConfig::open(4, 1.0, 0.1, 0.0);
        let leads = [LeadConfig::new(1, 0.2, 20.0), LeadConfig::new(4, 0.2, 20.0)];
        assert!(matches!(
            landauer_oracle(&w, &leads, 0.1, SelfEnergy::None),
            Err(Error::PairingPresent { .. })
        ));
    }

    #[test]
    fn oracle_trivial_limits() {
        let w = WireConfig::open(6, 1.0, 0.0, 0.3);
        let leads = [LeadConfig::new(1, 0.0, 20.0), LeadConfig::new(6, 0.2, 20.0)];
        assert_eq!(landauer_oracle(&w, &leads, 0.4, SelfEnergy::None).unwrap(), 0.0);
        let w = WireConfig::open(2, 0.0, 0.0, 0.0);
        let leads = [LeadConfig::new(1, 0.2, 20.0), LeadConfig::new(2, 0.2, 20.0)];
        assert_eq!(landauer_oracle(&w, &leads, 0.4, SelfEnergy::None).unwrap(), 0.0);
    }

    #[test]
    fn two_site_resonance_is_one_quantum() {
        // symmetric dimer at a bonding resonance: |t|^2 = 1 when
        // J = lambda/2 with omega = 0 and mu = 0
        let lambda = 0.2;
        let w = WireConfig::open(2, lambda / 2.0, 0.0, 0.0);
        let leads = [LeadConfig::new(1, lambda, 1e9), LeadConfig::new(2, lambda, 1e9)];
        let t = landauer_oracle(&w, &leads, 0.0, SelfEnergy::None).unwrap();
        assert!((t - 1.0).abs() < 1e-12, "{t}");
    }
}
