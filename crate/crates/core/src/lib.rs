//! Kitaev quantum wire: BdG spectra, Majorana profiles and two-lead
//! transport.
//!
//! Every numerical routine is generic over [`Real`] (`f32` or `f64`); the
//! `*64` and `*32` aliases below name the common instantiations.

mod banded;

pub mod analysis;
pub mod error;
pub mod export;
pub mod leads;
pub mod model;
pub mod quadrature;
pub mod scalar;
pub mod spectrum;
pub mod transport;

pub use analysis::{landauer_oracle, steady_limit, PoleSum, PoleTerm};
pub use error::{Error, Result};
pub use leads::{coupling_spectrum, damping, dissipation_matrix, fermi, DampingSample, LeadConfig, SelfEnergy};
pub use model::{build_bdg, bulk_gap, BdgMatrix, Boundary, Defect, WireConfig, WrapPairing};
pub use quadrature::QuadratureSpec;
pub use scalar::Real;
pub use spectrum::{
    analyze, classify_modes, diagonalize, eigenvalues, labeled_modes, low_energy_couplings, majorana_rep, pair_modes,
    ClassifyThresholds, EigenMode, LabeledPair, MajoranaPair, ModeClass, ModePair,
};
pub use transport::{
    conductance_sweep, differential_conductance, propagator, steady_current, ConductanceCurve, DidvSample,
    Junction, Peak, PropagatorSample, SweepSpec, TransportResult,
};

pub use num_complex::Complex;

pub type WireConfig64 = WireConfig<f64>;
pub type WireConfig32 = WireConfig<f32>;
pub type BdgMatrix64 = BdgMatrix<f64>;
pub type BdgMatrix32 = BdgMatrix<f32>;
pub type EigenMode64 = EigenMode<f64>;
pub type EigenMode32 = EigenMode<f32>;
pub type ModePair64 = ModePair<f64>;
pub type LabeledPair64 = LabeledPair<f64>;
pub type LeadConfig64 = LeadConfig<f64>;
pub type LeadConfig32 = LeadConfig<f32>;
pub type PropagatorSample64 = PropagatorSample<f64>;
pub type DidvSample64 = DidvSample<f64>;
pub type ConductanceCurve64 = ConductanceCurve<f64>;
pub type TransportResult64 = TransportResult<f64>;
pub type SweepSpec64 = SweepSpec<f64>;
pub type Junction64 = Junction<f64>;
pub type PoleSum64 = PoleSum<f64>;
