//! Propagator, steady current and differential conductance for two leads.

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex;
use rayon::prelude::*;

use crate::banded::{BandLu, Ordering};
use crate::error::{Error, Result};
use crate::leads::{coupling_spectrum, damping_diagonal, dissipation_matrix, fermi, LeadConfig, SelfEnergy};
use crate::model::BdgMatrix;
use crate::quadrature::{integrate, QuadratureSpec};
use crate::scalar::{cplx, creal, czero, epsilon, lit, to_f64, Real};
use crate::spectrum::eigenvalues;

/// Condition number above which a solve is reported as near-singular,
/// `~1e14` in double precision.
pub fn condition_limit<T: Real>() -> T {
    lit::<T>(0.0222) / epsilon::<T>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorSample<T: Real> {
    pub omega: T,
    pub matrix: DMatrix<Complex<T>>,
}

fn check_leads<T: Real>(h: &BdgMatrix<T>, leads: &[LeadConfig<T>]) -> Result<()> {
    for lead in leads {
        lead.validate(h.n_sites())?;
    }
    Ok(())
}

/// `omega - H + i D(omega)` as a dense matrix.
pub fn resolvent_matrix<T: Real>(
    h: &BdgMatrix<T>,
    leads: &[LeadConfig<T>],
    omega: T,
    mode: SelfEnergy,
) -> DMatrix<Complex<T>> {
    let n = h.n_sites();
    let d = damping_diagonal(omega, leads, n, mode);
    let i_unit = cplx(T::zero(), T::one());
    let mut a = -h.entries().clone();
    for k in 0..2 * n {
        a[(k, k)] += creal::<T>(omega) + i_unit * d[k];
    }
    a
}

fn norm1<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    m.column_iter()
        .map(|c| c.iter().fold(T::zero(), |a, z| a + z.modulus()))
        .fold(T::zero(), |a, b| a.max(b))
}

/// `G(omega) = i [omega - H + i D(omega)]^-1` by dense LU.
pub fn propagator<T: Real>(
    h: &BdgMatrix<T>,
    leads: &[LeadConfig<T>],
    omega: T,
    mode: SelfEnergy,
) -> Result<PropagatorSample<T>> {
    check_leads(h, leads)?;
    let a = resolvent_matrix(h, leads, omega, mode);
    let a_norm = norm1(&a);
    let inv = a.lu().try_inverse().ok_or(Error::Singular { omega: to_f64(omega) })?;
    let condition = a_norm * norm1(&inv);
    if !(condition <= condition_limit::<T>()) {
        return Err(Error::NearSingular {
            omega: to_f64(omega),
            condition: to_f64(condition),
        });
    }
    let i_unit = cplx(T::zero(), T::one());
    Ok(PropagatorSample {
        omega,
        matrix: inv.map(|z| z * i_unit),
    })
}

impl<T: Real> PropagatorSample<T> {
    /// Largest entry of `|(G + G^dag) - G Gamma G^dag|` and of
    /// `|(G + G^dag) - G^dag Gamma G|`.
    pub fn dissipation_residual(&self, leads: &[LeadConfig<T>], n_sites: usize) -> (T, T) {
        let gamma = dissipation_matrix(self.omega, leads, n_sites, SelfEnergy::None).map(creal::<T>);
        let g = &self.matrix;
        let gd = g.adjoint();
        let lhs = g + &gd;
        let r1 = &lhs - g * &gamma * &gd;
        let r2 = &lhs - &gd * &gamma * g;
        let max = |m: DMatrix<Complex<T>>| m.iter().fold(T::zero(), |a, z| a.max(z.modulus()));
        (max(r1), max(r2))
    }

    /// Largest entry of `|G (-i)(omega - H + iD) - 1|`.
    pub fn defining_residual(&self, h: &BdgMatrix<T>, leads: &[LeadConfig<T>], mode: SelfEnergy) -> T {
        let a = resolvent_matrix(h, leads, self.omega, mode);
        let minus_i = cplx(T::zero(), -T::one());
        let prod = (&self.matrix * a).map(|z| z * minus_i);
        let id = DMatrix::<Complex<T>>::identity(prod.nrows(), prod.ncols());
        (prod - id).iter().fold(T::zero(), |acc, z| acc.max(z.modulus()))
    }
}

/// One evaluation of the conductance bracket, in units of `e^2/h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DidvSample<T> {
    pub bias: T,
    pub total: T,
    pub direct: T,
    pub crossed: T,
    pub local_andreev: T,
}

/// The three propagator elements the junction observables need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactElements<T> {
    /// `G[x, y]`
    pub direct: Complex<T>,
    /// `G[x, y + N]`
    pub crossed: Complex<T>,
    /// `G[x, x + N]`
    pub local: Complex<T>,
}

/// Two-lead junction: lead `x` (biased, `leads[0]`) and lead `y` (`leads[1]`).
///
/// Contact elements are obtained from one adjoint solve of a banded
/// factorization, which is much cheaper than the dense inverse.
#[derive(Debug, Clone)]
pub struct Junction<T: Real> {
    n_sites: usize,
    left: LeadConfig<T>,
    right: LeadConfig<T>,
    mode: SelfEnergy,
    ordering: Ordering,
    /// `(position_row, position_col, -H entry)`
    template: Vec<(usize, usize, Complex<T>)>,
    spectrum: Vec<T>,
}

impl<T: Real> Junction<T> {
    pub fn new(h: &BdgMatrix<T>, leads: &[LeadConfig<T>], mode: SelfEnergy) -> Result<Self> {
        if leads.len() != 2 {
            return Err(Error::LeadCount { expected: 2, got: leads.len() });
        }
        check_leads(h, leads)?;
        let n = h.n_sites();
        let entries = h.entries();
        let ordering = Ordering::choose(entries, n);
        let mut template = Vec::new();
        for c in 0..2 * n {
            for r in 0..2 * n {
                let v = entries[(r, c)];
                if v != czero() {
                    template.push((ordering.position[r], ordering.position[c], -v));
                }
            }
        }
        Ok(Junction {
            n_sites: n,
            left: leads[0].clone(),
            right: leads[1].clone(),
            mode,
            ordering,
            template,
            spectrum: eigenvalues(h)?,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn leads(&self) -> [&LeadConfig<T>; 2] {
        [&self.left, &self.right]
    }

    pub fn self_energy(&self) -> SelfEnergy {
        self.mode
    }

    /// Raw BdG eigenvalues, ascending.
    pub fn spectrum(&self) -> &[T] {
        &self.spectrum
    }

    pub fn contact_elements(&self, omega: T) -> Result<ContactElements<T>> {
        let n = self.n_sites;
        let dim = 2 * n;
        let pos = &self.ordering.position;
        let mut lu = BandLu::zeros(dim, self.ordering.lower, self.ordering.upper);
        for &(r, c, v) in &self.template {
            lu.add(r, c, v);
        }
        let d = damping_diagonal(omega, &[self.left.clone(), self.right.clone()], n, self.mode);
        let i_unit = cplx(T::zero(), T::one());
        for (k, dk) in d.iter().enumerate() {
            lu.add(pos[k], pos[k], creal::<T>(omega) + i_unit * dk);
        }
        let singular = || Error::Singular { omega: to_f64(omega) };
        lu.factor().map_err(|_| singular())?;
        let condition = lu.norm1() * lu.inverse_norm1_estimate();
        if !(condition <= condition_limit::<T>()) {
            return Err(Error::NearSingular {
                omega: to_f64(omega),
                condition: to_f64(condition),
            });
        }
        // A^-dag e_x holds conj of row x of A^-1
        let x = self.left.contact_site - 1;
        let y = self.right.contact_site - 1;
        let mut rhs = vec![czero::<T>(); dim];
        rhs[pos[x]] = creal(T::one());
        lu.solve_adjoint(&mut rhs);
        let row = |j: usize| i_unit * rhs[pos[j]].conj();
        Ok(ContactElements {
            direct: row(y),
            crossed: row(y + n),
            local: row(x + n),
        })
    }

    /// Conductance bracket at `omega = bias`.
    pub fn didv(&self, bias: T) -> Result<DidvSample<T>> {
        let g = self.contact_elements(bias)?;
        let gx = coupling_spectrum(bias, &self.left);
        let gy = coupling_spectrum(bias, &self.right);
        let direct = g.direct.modulus_squared() * gx * gy;
        let crossed = g.crossed.modulus_squared() * gy * gx;
        let local_andreev = lit::<T>(2.0) * g.local.modulus_squared() * gx * gx;
        Ok(DidvSample {
            bias,
            total: direct + crossed + local_andreev,
            direct,
            crossed,
            local_andreev,
        })
    }

    fn require_zero_temperature(&self) -> Result<()> {
        for (i, l) in [&self.left, &self.right].into_iter().enumerate() {
            if l.temperature != T::zero() {
                return Err(Error::FiniteTemperature {
                    lead: i,
                    temperature: to_f64(l.temperature),
                });
            }
        }
        Ok(())
    }

    /// Integration window `[-W, W]`.
    pub fn window(&self) -> T {
        let oc = self.left.omega_c.max(self.right.omega_c);
        let emax = self.spectrum.iter().fold(T::zero(), |a, e| a.max(e.abs()));
        (lit::<T>(4.0) * oc).max(lit::<T>(1.2) * emax)
    }

    /// Steady current with the lead chemical potentials and temperatures as
    /// configured.
    pub fn steady_current(&self, quad: &QuadratureSpec<T>) -> Result<TransportResult<T>> {
        let (lx, ly) = (&self.left, &self.right);
        let w = self.window();
        let mut breaks: Vec<T> = self.spectrum.clone();
        breaks.extend([lx.chem_potential, ly.chem_potential, T::zero()]);
        let half: T = lit(0.5);
        let integrand = |omega: T| -> Result<[T; 3]> {
            let s = self.didv(omega)?;
            let fx = fermi(omega, lx.chem_potential, lx.temperature);
            let fy = fermi(omega, ly.chem_potential, ly.temperature);
            let fbar_x = T::one() - fx;
            let fbar_y = T::one() - fy;
            Ok([
                s.direct * (fx - fy),
                s.crossed * (fx - fbar_y),
                s.local_andreev * half * (fx - fbar_x),
            ])
        };
        let r = integrate(integrand, -w, w, &breaks, quad)?;
        Ok(TransportResult {
            current: r.value[0] + r.value[1] + r.value[2],
            direct: r.value[0],
            crossed: r.value[1],
            local_andreev: r.value[2],
            error_bound: r.error[0] + r.error[1] + r.error[2],
            intervals: r.intervals,
        })
    }

    /// Conductance sweep with refinement around every eigenvalue in range.
    pub fn sweep(&self, spec: &SweepSpec<T>) -> Result<ConductanceCurve<T>> {
        self.require_zero_temperature()?;
        spec.validate()?;
        let grid: Vec<T> = spec.grid();
        let mut samples: Vec<DidvSample<T>> = Vec::new();
        let mut singular: Vec<T> = Vec::new();
        let evaluated: Vec<(T, Result<DidvSample<T>>)> =
            grid.par_iter().map(|&b| (b, self.didv(b))).collect();
        for (b, r) in evaluated {
            match r {
                Ok(s) => samples.push(s),
                Err(e) if e.is_singular() => singular.push(b),
                Err(e) => return Err(e),
            }
        }

        if spec.refine {
            let spacing = (spec.v_max - spec.v_min) / T::from_usize(spec.points - 1).unwrap();
            let mut centers: Vec<T> = self
                .spectrum
                .iter()
                .copied()
                .filter(|e| *e >= spec.v_min && *e <= spec.v_max)
                .collect();
            centers.dedup_by(|a, b| (*a - *b).abs() < lit(1e-6));
            let zoomed: Vec<Result<Zoom<T>>> = centers
                .par_iter()
                .map(|&c| self.zoom(c, spacing, spec))
                .collect();
            for z in zoomed {
                let z = z?;
                samples.extend(z.samples);
                singular.extend(z.singular);
            }
        }

        samples.sort_by(|a, b| a.bias.partial_cmp(&b.bias).unwrap());
        samples.dedup_by(|a, b| a.bias == b.bias);
        singular.sort_by(|a, b| a.partial_cmp(b).unwrap());
        singular.dedup();
        let peaks = find_peaks(&samples, spec.min_peak_height, spec.min_prominence);
        Ok(ConductanceCurve { samples, singular, peaks })
    }

    fn zoom(&self, center: T, spacing: T, spec: &SweepSpec<T>) -> Result<Zoom<T>> {
        const HALF: usize = 8;
        let mut out = Zoom { samples: Vec::new(), singular: Vec::new() };
        let mut c = center;
        let mut hw = spacing;
        let mut shifts = 0;
        let floor = spec.resolution_floor * T::one().max(center.abs());
        for _ in 0..200 {
            let step = hw / lit(HALF as f64);
            let mut pts: Vec<(T, T)> = Vec::with_capacity(2 * HALF + 1);
            for k in 0..=(2 * HALF) {
                let b = c - hw + step * T::from_usize(k).unwrap();
                if b < spec.v_min || b > spec.v_max {
                    continue;
                }
                match self.didv(b) {
                    Ok(s) => {
                        pts.push((b, s.total));
                        out.samples.push(s);
                    }
                    Err(e) if e.is_singular() => out.singular.push(b),
                    Err(e) => return Err(e),
                }
            }
            if pts.len() < 3 {
                break;
            }
            let j = (0..pts.len())
                .max_by(|&a, &b| pts[a].1.partial_cmp(&pts[b].1).unwrap())
                .unwrap();
            if j == 0 || j == pts.len() - 1 {
                // maximum on the edge: follow it without shrinking
                shifts += 1;
                if shifts > 16 || pts.len() < 2 * HALF + 1 {
                    break;
                }
                c = pts[j].0;
                continue;
            }
            shifts = 0;
            c = pts[j].0;
            let top = pts[j].1;
            let resolved = pts[j - 1].1 >= lit::<T>(0.9) * top && pts[j + 1].1 >= lit::<T>(0.9) * top;
            if resolved || step <= floor {
                break;
            }
            hw = step * lit(2.0);
        }
        Ok(out)
    }
}

struct Zoom<T> {
    samples: Vec<DidvSample<T>>,
    singular: Vec<T>,
}

/// Integrated current and its three contributions, in units of `e/h` times
/// energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportResult<T> {
    pub current: T,
    pub direct: T,
    pub crossed: T,
    pub local_andreev: T,
    pub error_bound: T,
    pub intervals: usize,
}

pub fn steady_current<T: Real>(
    h: &BdgMatrix<T>,
    leads: &[LeadConfig<T>],
    mode: SelfEnergy,
    quad: &QuadratureSpec<T>,
) -> Result<TransportResult<T>> {
    Junction::new(h, leads, mode)?.steady_current(quad)
}

/// Zero-temperature differential conductance at `bias` (the chemical
/// potential of `leads[0]`).
pub fn differential_conductance<T: Real>(
    h: &BdgMatrix<T>,
    leads: &[LeadConfig<T>],
    bias: T,
    mode: SelfEnergy,
) -> Result<DidvSample<T>> {
    let j = Junction::new(h, leads, mode)?;
    j.require_zero_temperature()?;
    j.didv(bias)
}

/// Uniform sweep of `[spec.v_min, spec.v_max]` plus refinement around every
/// eigenvalue in range; singular biases are collected, not raised.
pub fn conductance_sweep<T: Real>(
    h: &BdgMatrix<T>,
    leads: &[LeadConfig<T>],
    spec: &SweepSpec<T>,
    mode: SelfEnergy,
) -> Result<ConductanceCurve<T>> {
    Junction::new(h, leads, mode)?.sweep(spec)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec<T> {
    pub v_min: T,
    pub v_max: T,
    pub points: usize,
    pub refine: bool,
    /// Zoom stops once the spacing is below this (relative to `max(1, |E|)`).
    pub resolution_floor: T,
    pub min_peak_height: T,
    /// Minimum prominence of a peak as a fraction of its height.
    pub min_prominence: T,
}

impl<T: Real> SweepSpec<T> {
    pub fn new(v_min: T, v_max: T, points: usize) -> Self {
        SweepSpec {
            v_min,
            v_max,
            points,
            refine: true,
            resolution_floor: lit(1e-12),
            min_peak_height: lit(1e-2),
            min_prominence: lit(1e-3),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::InvalidSweep(format!("need at least 2 points, got {}", self.points)));
        }
        if !(self.v_min < self.v_max) || !self.v_min.is_finite() || !self.v_max.is_finite() {
            return Err(Error::InvalidSweep(format!(
                "bias range [{:?}, {:?}] is empty",
                self.v_min, self.v_max
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<T> {
        let span = self.v_max - self.v_min;
        let last = T::from_usize(self.points - 1).unwrap();
        (0..self.points)
            .map(|i| {
                if i == self.points - 1 {
                    self.v_max
                } else {
                    self.v_min + span * T::from_usize(i).unwrap() / last
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak<T> {
    pub location: T,
    pub height: T,
    /// Full width at half maximum, when both half-maximum crossings were sampled.
    pub fwhm: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConductanceCurve<T> {
    /// Sorted by bias; uniform grid merged with refinement points.
    pub samples: Vec<DidvSample<T>>,
    /// Biases at which the propagator was (near-)singular.
    pub singular: Vec<T>,
    pub peaks: Vec<Peak<T>>,
}

impl<T: Real> ConductanceCurve<T> {
    pub fn max_total(&self) -> T {
        self.samples.iter().fold(T::zero(), |a, s| a.max(s.total))
    }

    /// Sample closest to `bias`.
    pub fn nearest(&self, bias: T) -> Option<&DidvSample<T>> {
        self.samples
            .iter()
            .min_by(|a, b| (a.bias - bias).abs().partial_cmp(&(b.bias - bias).abs()).unwrap())
    }
}

/// Strict local maxima of `total` at or above `min_height` whose prominence
/// is at least `min_prominence * height`.
///
/// Prominence is the height above the higher of the two minima reached
/// before the curve climbs above the peak (or ends) on either side.
pub fn find_peaks<T: Real>(samples: &[DidvSample<T>], min_height: T, min_prominence: T) -> Vec<Peak<T>> {
    let v: Vec<T> = samples.iter().map(|s| s.total).collect();
    let x: Vec<T> = samples.iter().map(|s| s.bias).collect();
    let mut peaks = Vec::new();
    for i in 1..v.len().saturating_sub(1) {
        if !(v[i] > v[i - 1] && v[i] >= v[i + 1]) || v[i] < min_height {
            continue;
        }
        let mut left_min = v[i];
        for k in (0..i).rev() {
            if v[k] > v[i] {
                break;
            }
            left_min = left_min.min(v[k]);
        }
        let mut right_min = v[i];
        for &vk in &v[(i + 1)..] {
            if vk > v[i] {
                break;
            }
            right_min = right_min.min(vk);
        }
        if v[i] - left_min.max(right_min) < min_prominence * v[i] {
            continue;
        }
        let (location, height) = parabola_apex(x[i - 1], v[i - 1], x[i], v[i], x[i + 1], v[i + 1]);
        let half = height * lit(0.5);
        let left = (0..i).rev().find(|&k| v[k] < half).map(|k| {
            x[k] + (x[k + 1] - x[k]) * (half - v[k]) / (v[k + 1] - v[k])
        });
        let right = ((i + 1)..v.len()).find(|&k| v[k] < half).map(|k| {
            x[k - 1] + (x[k] - x[k - 1]) * (v[k - 1] - half) / (v[k - 1] - v[k])
        });
        let fwhm = match (left, right) {
            (Some(l), Some(r)) => Some(r - l),
            _ => None,
        };
        peaks.push(Peak { location, height, fwhm });
    }
    peaks
}

/// Vertex of the parabola through three points, clamped to the sample when
/// the fit is degenerate or falls outside the bracket.
fn parabola_apex<T: Real>(x0: T, y0: T, x1: T, y1: T, x2: T, y2: T) -> (T, T) {
    let d0 = (y1 - y0) / (x1 - x0);
    let d1 = (y2 - y1) / (x2 - x1);
    let a = (d1 - d0) / (x2 - x0);
    if !(a < T::zero()) {
        return (x1, y1);
    }
    let b = d0 - a * (x0 + x1);
    let xv = -b / (lit::<T>(2.0) * a);
    if !(xv > x0 && xv < x2) {
        return (x1, y1);
    }
    let yv = y0 + d0 * (xv - x0) + a * (xv - x0) * (xv - x1);
    (xv, yv.max(y1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_bdg, WireConfig};

    #[test]
    fn decoupled_propagator_entries() {
        let h = build_bdg(&WireConfig::open(2, 0.0, 0.0, 0.0)).unwrap();
        let lambda = 0.4;
        let leads = [LeadConfig::new(1, lambda, 20.0)];
        // site 2 has no lead, so omega = 0 itself is exactly singular
        let e = propagator(&h, &leads, 0.0, SelfEnergy::None).unwrap_err();
        assert!(matches!(e, Error::Singular { omega } if omega == 0.0));
        let omega = 1e-9;
        let g = propagator(&h, &leads, omega, SelfEnergy::None).unwrap();
        let expected = Complex::new(0.0, 1.0) / Complex::new(omega, lambda / 2.0);
        assert!((expected - Complex::new(2.0 / lambda, 0.0)).norm() < 1e-7);
        assert!((g.matrix[(0, 0)] - expected).norm() < 1e-12);
        assert!((g.matrix[(2, 2)] - expected).norm() < 1e-12);
        let g = propagator(&h, &leads, 0.5, SelfEnergy::None).unwrap();
        assert!((g.matrix[(1, 1)] - Complex::new(0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn singular_without_damping() {
        let h = build_bdg(&WireConfig::open(2, 0.0, 0.0, 0.0)).unwrap();
        let e = propagator(&h, &[], 0.0, SelfEnergy::None).unwrap_err();
        assert!(e.is_singular());
        assert!(matches!(e, Error::Singular { omega } if omega == 0.0));
    }

    #[test]
    fn near_singular_reported_with_omega() {
        let h = build_bdg(&WireConfig::open(2, 1.0, 0.0, 0.0)).unwrap();
        // omega = 1 hits an eigenvalue up to rounding of the literal
        let e = propagator(&h, &[], 1.0 + 1e-15, SelfEnergy::None).unwrap_err();
        assert!(e.is_singular(), "{e}");
    }

    #[test]
    fn large_omega_asymptote() {
        let w = WireConfig::open(6, 1.0, 0.4, 0.2).with_defect(3, 2.0);
        let h = build_bdg(&w).unwrap();
        let leads = [LeadConfig::new(1, 0.3, 20.0), LeadConfig::new(6, 0.3, 20.0)];
        let omega = 1e3 * h.norm_inf();
        let g = propagator(&h, &leads, omega, SelfEnergy::None).unwrap();
        let expected = Complex::new(0.0, 1.0 / omega);
        for r in 0..12 {
            for c in 0..12 {
                let target = if r == c { expected } else { Complex::new(0.0, 0.0) };
                assert!((g.matrix[(r, c)] - target).norm() <= 0.01 * expected.norm());
            }
        }
    }

    #[test]
    fn junction_matches_dense_propagator() {
        for (w, x, y) in [
            (WireConfig::open(9, 1.0, 0.4, 0.1), 2, 9),
            (WireConfig::closed(11, 0.7, 0.5, -0.2).with_defect(4, 5.0), 5, 10),
            (WireConfig::closed(10, 1.0, 0.3, 0.3).with_pairing(Complex::new(0.2, 0.3)), 1, 1),
        ] {
            let h = build_bdg(&w).unwrap();
            let leads = [LeadConfig::new(x, 0.3, 20.0), LeadConfig::new(y, 0.2, 5.0)];
            for mode in [SelfEnergy::None, SelfEnergy::Exact] {
                let j = Junction::new(&h, &leads, mode).unwrap();
                for omega in [-1.3, 0.0, 0.37, 2.2] {
                    let dense = propagator(&h, &leads, omega, mode).unwrap().matrix;
                    let c = j.contact_elements(omega).unwrap();
                    let n = w.n_sites;
                    let scale = dense.iter().fold(0.0f64, |a, z| a.max(z.norm()));
                    assert!((c.direct - dense[(x - 1, y - 1)]).norm() < 1e-12 * scale);
                    assert!((c.crossed - dense[(x - 1, y - 1 + n)]).norm() < 1e-12 * scale);
                    assert!((c.local - dense[(x - 1, x - 1 + n)]).norm() < 1e-12 * scale);
                }
            }
        }
    }

    #[test]
    fn no_coupling_no_conductance() {
        let h = build_bdg(&WireConfig::open(8, 1.0, 0.4, 0.1)).unwrap();
        let leads = [LeadConfig::new(1, 0.0, 20.0), LeadConfig::new(8, 0.3, 20.0)];
        for b in [-1.0, 0.1, 0.7] {
            assert_eq!(differential_conductance(&h, &leads, b, SelfEnergy::None).unwrap().total, 0.0);
        }
    }

    #[test]
    fn conductance_rejects_finite_temperature_and_lead_count() {
        let h = build_bdg(&WireConfig::open(4, 1.0, 0.4, 0.1)).unwrap();
        let hot = [LeadConfig::new(1, 0.3, 20.0).with_temperature(0.1), LeadConfig::new(4, 0.3, 20.0)];
        assert!(matches!(
            differential_conductance(&h, &hot, 0.1, SelfEnergy::None),
            Err(Error::FiniteTemperature { lead: 0, .. })
        ));
        let one = [LeadConfig::new(1, 0.3, 20.0)];
        assert!(matches!(
            differential_conductance(&h, &one, 0.1, SelfEnergy::None),
            Err(Error::LeadCount { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn open_wire_zero_bias_peak() {
        let h = build_bdg(&WireConfig::open(60, 1.0, 0.4, 0.1)).unwrap();
        let leads = [LeadConfig::new(1, 0.3, 20.0), LeadConfig::new(60, 0.3, 20.0)];
        let s = differential_conductance(&h, &leads, 0.0, SelfEnergy::None).unwrap();
        assert!((s.total - 2.0).abs() < 0.1, "{s:?}");
    }

    #[test]
    fn tight_binding_has_no_andreev_terms() {
        let h = build_bdg(&WireConfig::open(20, 1.0, 0.0, 0.3)).unwrap();
        let leads = [LeadConfig::new(1, 0.2, 20.0), LeadConfig::new(20, 0.2, 20.0)];
        for b in [-1.1, 0.05, 0.9] {
            let s = differential_conductance(&h, &leads, b, SelfEnergy::None).unwrap();
            assert_eq!(s.crossed, 0.0);
            assert_eq!(s.local_andreev, 0.0);
        }
    }

    #[test]
    fn flat_curve_for_vanishing_coupling() {
        let h = build_bdg(&WireConfig::open(10, 1.0, 0.4, 0.1)).unwrap();
        let leads = [LeadConfig::new(1, 1e-9, 20.0), LeadConfig::new(10, 1e-9, 20.0)];
        let mut spec = SweepSpec::new(-2.0, 2.0, 41);
        spec.refine = false;
        let c = Junction::new(&h, &leads, SelfEnergy::None).unwrap().sweep(&spec).unwrap();
        assert!(c.max_total() < 1e-6);
    }

    #[test]
    fn sweep_validation() {
        assert!(SweepSpec::new(0.0, 1.0, 1).validate().is_err());
        assert!(SweepSpec::new(1.0, 1.0, 5).validate().is_err());
        let g = SweepSpec::new(-1.0, 1.0, 5).grid();
        assert_eq!(g, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn peak_finder_on_lorentzian() {
        let w = 0.01;
        let samples: Vec<DidvSample<f64>> = (0..401)
            .map(|i| {
                let b = -1.0 + i as f64 * 0.005;
                let v = 1.0 / (1.0 + ((b - 0.2013) / w).powi(2));
                DidvSample { bias: b, total: v, direct: v, crossed: 0.0, local_andreev: 0.0 }
            })
            .collect();
        let p = find_peaks(&samples, 0.01, 1e-3);
        assert_eq!(p.len(), 1);
        assert!((p[0].location - 0.2013).abs() < 1e-3);
        assert!((p[0].height - 1.0).abs() < 0.05);
        assert!((p[0].fwhm.unwrap() - 2.0 * w).abs() < 2e-3);
    }
}
