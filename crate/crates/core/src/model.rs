//! Wire configuration and Bogoliubov-de Gennes matrix construction.
//!
//! The single-particle matrix acts on the stacked vector
//! `(d_1, ..., d_N, d_1^dag, ..., d_N^dag)` and has the block form
//!
//! ```text
//!     H = [ h    p  ]
//!         [ p^dag -h ]
//! ```
//!
//! with `h` real symmetric (hopping and on-site potentials) and `p` complex
//! antisymmetric (nearest-neighbour pairing).

use std::io::{self, Write};

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{creal, czero, lit, Real};

/// Boundary condition of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Open,
    Closed,
}

/// Sign convention for the pairing term on the bond that closes a ring.
///
/// `Uniform` treats the closing bond `(N, 1)` exactly like every other bond
/// `(i, i+1)`: `p[N,1] = -delta`, `p[1,N] = +delta`. The ring is then
/// translation invariant.
///
/// `AsPrinted` uses `p[1,N] = -delta`, `p[N,1] = +delta`, i.e. the opposite
/// orientation. This inserts a pi phase slip of the pairing on the closing
/// bond, which binds an extra pair of sub-gap states even without a defect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum WrapPairing {
    #[default]
    Uniform,
    AsPrinted,
}

/// A site whose on-site potential replaces the background chemical potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Defect<T> {
    /// 1-based site index.
    pub site: usize,
    pub potential: T,
}

/// Physical scenario: chain length, couplings, boundary and defects.
#[derive(Debug, Clone, PartialEq)]
pub struct WireConfig<T> {
    pub n_sites: usize,
    pub hopping: T,
    pub pairing: Complex<T>,
    pub chem_potential: T,
    pub boundary: Boundary,
    pub wrap_pairing: WrapPairing,
    pub defects: Vec<Defect<T>>,
}

impl<T: Real> WireConfig<T> {
    /// Homogeneous open chain with real pairing.
    pub fn open(n_sites: usize, hopping: T, pairing: T, chem_potential: T) -> Self {
        WireConfig {
            n_sites,
            hopping,
            pairing: creal(pairing),
            chem_potential,
            boundary: Boundary::Open,
            wrap_pairing: WrapPairing::Uniform,
            defects: Vec::new(),
        }
    }

    /// Homogeneous ring with real pairing.
    pub fn closed(n_sites: usize, hopping: T, pairing: T, chem_potential: T) -> Self {
        WireConfig {
            boundary: Boundary::Closed,
            ..Self::open(n_sites, hopping, pairing, chem_potential)
        }
    }

    /// Adds a defect at the 1-based `site`.
    pub fn with_defect(mut self, site: usize, potential: T) -> Self {
        self.defects.push(Defect { site, potential });
        self
    }

    pub fn with_pairing(mut self, pairing: Complex<T>) -> Self {
        self.pairing = pairing;
        self
    }

    pub fn with_wrap_pairing(mut self, wrap: WrapPairing) -> Self {
        self.wrap_pairing = wrap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 {
            return Err(Error::InvalidWire(format!(
                "n_sites must be at least 2, got {}",
                self.n_sites
            )));
        }
        let finite = |x: T| x.is_finite();
        if !finite(self.hopping)
            || !finite(self.chem_potential)
            || !finite(self.pairing.re)
            || !finite(self.pairing.im)
        {
            return Err(Error::InvalidWire("couplings must be finite".into()));
        }
        let mut seen = vec![false; self.n_sites];
        for d in &self.defects {
            if d.site == 0 || d.site > self.n_sites {
                return Err(Error::InvalidWire(format!(
                    "defect site {} outside 1..={}",
                    d.site, self.n_sites
                )));
            }
            if seen[d.site - 1] {
                return Err(Error::InvalidWire(format!(
                    "duplicate defect at site {}",
                    d.site
                )));
            }
            if !finite(d.potential) {
                return Err(Error::InvalidWire(format!(
                    "defect potential at site {} is not finite",
                    d.site
                )));
            }
            seen[d.site - 1] = true;
        }
        Ok(())
    }

    /// On-site chemical potential of the 1-based `site`.
    pub fn site_potential(&self, site: usize) -> T {
        self.defects
            .iter()
            .find(|d| d.site == site)
            .map(|d| d.potential)
            .unwrap_or(self.chem_potential)
    }
}

/// The `h` and `p` blocks of the BdG matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Blocks<T: Real> {
    pub h: DMatrix<T>,
    pub p: DMatrix<Complex<T>>,
}

/// Builds `h` (real symmetric) and `p` (complex antisymmetric).
pub fn build_blocks<T: Real>(config: &WireConfig<T>) -> Result<Blocks<T>> {
    config.validate()?;
    let n = config.n_sites;
    let j = config.hopping;
    let delta = config.pairing;
    let mut h = DMatrix::<T>::zeros(n, n);
    let mut p = DMatrix::<Complex<T>>::from_element(n, n, czero());

    for i in 0..n {
        h[(i, i)] = -config.site_potential(i + 1);
    }
    for i in 0..n - 1 {
        h[(i, i + 1)] += j;
        h[(i + 1, i)] += j;
        p[(i, i + 1)] -= delta;
        p[(i + 1, i)] += delta;
    }
    if config.boundary == Boundary::Closed {
        h[(0, n - 1)] += j;
        h[(n - 1, 0)] += j;
        match config.wrap_pairing {
            WrapPairing::Uniform => {
                p[(n - 1, 0)] -= delta;
                p[(0, n - 1)] += delta;
            }
            WrapPairing::AsPrinted => {
                p[(0, n - 1)] -= delta;
                p[(n - 1, 0)] += delta;
            }
        }
    }
    Ok(Blocks { h, p })
}

/// The 2N x 2N Hermitian BdG matrix together with its blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BdgMatrix<T: Real> {
    n_sites: usize,
    entries: DMatrix<Complex<T>>,
    blocks: Blocks<T>,
}

impl<T: Real> BdgMatrix<T> {
    pub fn from_blocks(blocks: Blocks<T>) -> Self {
        let n = blocks.h.nrows();
        let mut entries = DMatrix::<Complex<T>>::from_element(2 * n, 2 * n, czero());
        for r in 0..n {
            for c in 0..n {
                let hv = blocks.h[(r, c)];
                entries[(r, c)] = creal(hv);
                entries[(n + r, n + c)] = creal(-hv);
                entries[(r, n + c)] = blocks.p[(r, c)];
                // (p^dag)[r, c] = conj(p[c, r])
                entries[(n + r, c)] = blocks.p[(c, r)].conj();
            }
        }
        BdgMatrix {
            n_sites: n,
            entries,
            blocks,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dimension(&self) -> usize {
        2 * self.n_sites
    }

    pub fn entries(&self) -> &DMatrix<Complex<T>> {
        &self.entries
    }

    pub fn block_h(&self) -> &DMatrix<T> {
        &self.blocks.h
    }

    pub fn block_p(&self) -> &DMatrix<Complex<T>> {
        &self.blocks.p
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> T {
        let m = &self.entries;
        (0..m.nrows())
            .map(|r| {
                m.row(r)
                    .iter()
                    .fold(T::zero(), |acc, z| acc + z.modulus())
            })
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// `max |H - H^dag|` entrywise.
    pub fn hermiticity_residual(&self) -> T {
        let m = &self.entries;
        let d = m.nrows();
        let mut worst = T::zero();
        for r in 0..d {
            for c in 0..d {
                worst = worst.max((m[(r, c)] - m[(c, r)].conj()).modulus());
            }
        }
        worst
    }

    /// `max |H + S H^* S|` entrywise, `S` swapping the electron and hole halves.
    pub fn particle_hole_residual(&self) -> T {
        let m = &self.entries;
        let n = self.n_sites;
        let d = 2 * n;
        let swap = |i: usize| if i < n { i + n } else { i - n };
        let mut worst = T::zero();
        for r in 0..d {
            for c in 0..d {
                worst = worst.max((m[(r, c)] + m[(swap(r), swap(c))].conj()).modulus());
            }
        }
        worst
    }

    /// Dense complex TSV dump: one matrix row per line, `re,im` cells.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let m = &self.entries;
        for r in 0..m.nrows() {
            let cells: Vec<String> = (0..m.ncols())
                .map(|c| format!("{:.16e},{:.16e}", m[(r, c)].re, m[(r, c)].im))
                .collect();
            writeln!(w, "{}", cells.join("\t"))?;
        }
        Ok(())
    }
}

/// Assembles the full BdG matrix for `config`.
pub fn build_bdg<T: Real>(config: &WireConfig<T>) -> Result<BdgMatrix<T>> {
    Ok(BdgMatrix::from_blocks(build_blocks(config)?))
}

fn dispersion<T: Real>(j: T, delta_abs: T, mu: T, k: T) -> T {
    let two: T = lit(2.0);
    let a = two * j * k.cos() - mu;
    let b = two * delta_abs * k.sin();
    (a * a + b * b).sqrt()
}

/// Minimum over `k` in `[0, pi]` of the infinite-chain quasiparticle energy
/// `sqrt((2J cos k - mu)^2 + 4|delta|^2 sin^2 k)`.
pub fn bulk_gap<T: Real>(hopping: T, pairing: Complex<T>, chem_potential: T) -> T {
    const GRID: usize = 4096;
    let delta_abs = pairing.modulus();
    let pi = T::pi();
    let step = pi / lit(GRID as f64);
    let e = |k: T| dispersion(hopping, delta_abs, chem_potential, k);
    let values: Vec<T> = (0..=GRID).map(|i| e(step * lit(i as f64))).collect();

    let mut best = values.iter().copied().fold(T::max_value().unwrap(), |a, b| a.min(b));
    for i in 0..=GRID {
        let left = if i == 0 { values[0] } else { values[i - 1] };
        let right = if i == GRID { values[GRID] } else { values[i + 1] };
        if values[i] <= left && values[i] <= right {
            let lo = step * lit(i.saturating_sub(1) as f64);
            let hi = (step * lit((i + 1) as f64)).min(pi);
            best = best.min(golden_min(&e, lo, hi, lit(1e-12)));
        }
    }
    best
}

fn golden_min<T: Real, F: Fn(T) -> T>(f: &F, mut a: T, mut b: T, tol: T) -> T {
    let inv_phi: T = lit(0.618_033_988_749_894_8);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let (mut fc, mut fd) = (f(c), f(d));
    let mut iterations = 0;
    while (b - a).abs() > tol && iterations < 200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d);
        }
        iterations += 1;
    }
    f(a).min(f(b)).min(fc).min(fd)
}
