//! Normal leads with a Lorentzian coupling spectrum.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cplx, lit, Real};

/// How the imaginary part of the damping kernel is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SelfEnergy {
    /// Real damping `Gamma/2`.
    #[default]
    None,
    /// Full transform of the exponential memory kernel.
    Exact,
}

impl fmt::Display for SelfEnergy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelfEnergy::None => "none",
            SelfEnergy::Exact => "exact",
        })
    }
}

impl FromStr for SelfEnergy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "none" => Ok(SelfEnergy::None),
            "exact" => Ok(SelfEnergy::Exact),
            other => Err(format!("unknown self-energy mode `{other}` (expected none or exact)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeadConfig<T> {
    /// 1-based site the lead touches.
    pub contact_site: usize,
    pub lambda: T,
    pub omega_c: T,
    pub chem_potential: T,
    pub temperature: T,
}

impl<T: Real> LeadConfig<T> {
    /// Zero-temperature lead at chemical potential 0.
    pub fn new(contact_site: usize, lambda: T, omega_c: T) -> Self {
        LeadConfig {
            contact_site,
            lambda,
            omega_c,
            chem_potential: T::zero(),
            temperature: T::zero(),
        }
    }

    pub fn with_chem_potential(mut self, mu: T) -> Self {
        self.chem_potential = mu;
        self
    }

    pub fn with_temperature(mut self, temperature: T) -> Self {
        self.temperature = temperature;
        self
    }

    pub fn validate(&self, n_sites: usize) -> Result<()> {
        if self.contact_site == 0 || self.contact_site > n_sites {
            return Err(Error::InvalidLead(format!(
                "contact site {} outside 1..={n_sites}",
                self.contact_site
            )));
        }
        if !(self.lambda >= T::zero()) || !self.lambda.is_finite() {
            return Err(Error::InvalidLead(format!("lambda must be >= 0, got {:?}", self.lambda)));
        }
        if !(self.omega_c > T::zero()) || !self.omega_c.is_finite() {
            return Err(Error::InvalidLead(format!("omega_c must be > 0, got {:?}", self.omega_c)));
        }
        if !self.chem_potential.is_finite() {
            return Err(Error::InvalidLead("chemical potential must be finite".into()));
        }
        if !(self.temperature >= T::zero()) {
            return Err(Error::InvalidLead(format!(
                "temperature must be >= 0, got {:?}",
                self.temperature
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampingSample<T> {
    pub omega: T,
    pub gamma: T,
    pub damping: Complex<T>,
}

impl<T: Real> DampingSample<T> {
    pub fn at(omega: T, lead: &LeadConfig<T>, mode: SelfEnergy) -> Self {
        DampingSample {
            omega,
            gamma: coupling_spectrum(omega, lead),
            damping: damping(omega, lead, mode),
        }
    }
}

/// `lambda Oc^2 / (omega^2 + Oc^2)`.
pub fn coupling_spectrum<T: Real>(omega: T, lead: &LeadConfig<T>) -> T {
    let oc2 = lead.omega_c * lead.omega_c;
    lead.lambda * oc2 / (omega * omega + oc2)
}

pub fn damping<T: Real>(omega: T, lead: &LeadConfig<T>, mode: SelfEnergy) -> Complex<T> {
    let gamma = coupling_spectrum(omega, lead);
    let half = gamma * lit(0.5);
    match mode {
        SelfEnergy::None => cplx(half, T::zero()),
        // lambda Oc (Oc + i w) / (2 (Oc^2 + w^2)) = Gamma/2 * (1 + i w/Oc)
        SelfEnergy::Exact => cplx(half, half * omega / lead.omega_c),
    }
}

/// Diagonal of the dissipation matrix: `Gamma_x(omega)` at `x` and `N + x`
/// for every lead, contributions of shared sites added.
pub fn dissipation_diagonal<T: Real>(omega: T, leads: &[LeadConfig<T>], n_sites: usize) -> Vec<T> {
    let mut d = vec![T::zero(); 2 * n_sites];
    for lead in leads {
        let g = coupling_spectrum(omega, lead);
        let x = lead.contact_site - 1;
        d[x] += g;
        d[n_sites + x] += g;
    }
    d
}

/// The self-energy mode only changes the anti-Hermitian part of the damping,
/// so it does not enter `D + D^dag`; it is accepted for interface symmetry.
pub fn dissipation_matrix<T: Real>(
    omega: T,
    leads: &[LeadConfig<T>],
    n_sites: usize,
    _mode: SelfEnergy,
) -> DMatrix<T> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(dissipation_diagonal(
        omega, leads, n_sites,
    )))
}

/// Damping diagonal `(D_e, D_h)` per BdG index. The hole entry is
/// `conj(D(-omega))`, which coincides with `D(omega)` for the Lorentzian.
pub fn damping_diagonal<T: Real>(
    omega: T,
    leads: &[LeadConfig<T>],
    n_sites: usize,
    mode: SelfEnergy,
) -> Vec<Complex<T>> {
    let zero = cplx(T::zero(), T::zero());
    let mut d = vec![zero; 2 * n_sites];
    for lead in leads {
        let x = lead.contact_site - 1;
        d[x] += damping(omega, lead, mode);
        d[n_sites + x] += damping(-omega, lead, mode).conj();
    }
    d
}

/// Fermi function `1/(exp((omega-mu)/T)+1)`, a step with value 1/2 at `T = 0`.
pub fn fermi<T: Real>(omega: T, mu: T, temperature: T) -> T {
    let x = omega - mu;
    if temperature == T::zero() {
        return if x < T::zero() {
            T::one()
        } else if x > T::zero() {
            T::zero()
        } else {
            lit(0.5)
        };
    }
    let z = x / temperature;
    if z >= T::zero() {
        let e = (-z).exp();
        e / (T::one() + e)
    } else {
        T::one() / (T::one() + z.exp())
    }
}
