//! Diagonalization of the BdG matrix and particle-hole bookkeeping.
//!
//! Every eigenvector `(v, w)` at energy `e` has a partner `(w*, v*)` at `-e`.
//! The solver output is post-processed so that this partner relation holds
//! exactly inside degenerate clusters, where the eigensolver is free to return
//! any basis of the eigenspace.

use std::fmt;

use nalgebra::{ComplexField, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::{bulk_gap, BdgMatrix, WireConfig};
use crate::scalar::{cplx, creal, czero, epsilon, lit, to_f64, Real};

/// Label attached to a particle-hole pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeClass {
    InGap,
    Bulk,
    DefectByproduct,
}

impl fmt::Display for ModeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModeClass::InGap => "in_gap",
            ModeClass::Bulk => "bulk",
            ModeClass::DefectByproduct => "defect_byproduct",
        })
    }
}

/// One eigenvector of the BdG matrix split into electron and hole parts.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenMode<T: Real> {
    pub energy: T,
    /// Coefficients of `d_i`.
    pub electron_amp: DVector<Complex<T>>,
    /// Coefficients of `d_i^dag`.
    pub hole_amp: DVector<Complex<T>>,
    pub class: Option<ModeClass>,
}

impl<T: Real> EigenMode<T> {
    fn from_stacked(energy: T, v: &DVector<Complex<T>>) -> Self {
        let n = v.len() / 2;
        EigenMode {
            energy,
            electron_amp: v.rows(0, n).into_owned(),
            hole_amp: v.rows(n, n).into_owned(),
            class: None,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.electron_amp.len()
    }

    /// `(electron_amp, hole_amp)` stacked into one 2N vector.
    pub fn stacked(&self) -> DVector<Complex<T>> {
        let n = self.n_sites();
        DVector::from_fn(2 * n, |i, _| {
            if i < n {
                self.electron_amp[i]
            } else {
                self.hole_amp[i - n]
            }
        })
    }

    /// The particle-hole image `(w*, v*)`.
    pub fn conjugate_swap(&self) -> DVector<Complex<T>> {
        conjugate_swap(&self.stacked())
    }

    pub fn norm_squared(&self) -> T {
        self.electron_amp
            .iter()
            .chain(self.hole_amp.iter())
            .fold(T::zero(), |acc, z| acc + z.modulus_squared())
    }

    /// Total weight on the electron components.
    pub fn electron_weight(&self) -> T {
        self.electron_amp
            .iter()
            .fold(T::zero(), |acc, z| acc + z.modulus_squared())
    }

    /// `||H V - energy V||_2`.
    pub fn residual(&self, h: &BdgMatrix<T>) -> T {
        let v = self.stacked();
        let r = h.entries() * &v - v.map(|z| z * self.energy);
        r.norm()
    }
}

/// A positive-energy mode and its particle-hole partner.
#[derive(Debug, Clone, PartialEq)]
pub struct ModePair<T: Real> {
    pub positive: EigenMode<T>,
    pub negative: EigenMode<T>,
}

impl<T: Real> ModePair<T> {
    pub fn energy(&self) -> T {
        self.positive.energy
    }

    /// Distance between `negative` and the conjugate-swapped `positive`,
    /// minimized over a global phase.
    pub fn conjugation_residual(&self) -> T {
        let a = self.positive.conjugate_swap();
        let b = self.negative.stacked();
        let overlap = a.dotc(&b);
        let m = overlap.modulus();
        let phase = if m > T::zero() {
            overlap / creal(m)
        } else {
            creal(T::one())
        };
        (b - a.map(|z| z * phase)).norm()
    }
}

/// Mode pair after classification.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPair<T: Real> {
    pub id: usize,
    pub class: ModeClass,
    pub pair: ModePair<T>,
}

/// Site coefficients of the two Majorana operators built from one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct MajoranaPair<T: Real> {
    pub g: DVector<Complex<T>>,
    pub h: DVector<Complex<T>>,
}

impl<T: Real> MajoranaPair<T> {
    pub fn weight_g(&self) -> T {
        self.g.iter().fold(T::zero(), |a, z| a + z.modulus_squared())
    }

    pub fn weight_h(&self) -> T {
        self.h.iter().fold(T::zero(), |a, z| a + z.modulus_squared())
    }
}

/// Thresholds used by [`classify_modes`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyThresholds<T> {
    /// A pair is in-gap when `energy < in_gap_fraction * bulk_gap`.
    pub in_gap_fraction: T,
    /// A pair is a defect by-product when `|energy - |mu_p|| < byproduct_fraction * |mu_p|`.
    pub byproduct_fraction: T,
}

impl<T: Real> Default for ClassifyThresholds<T> {
    fn default() -> Self {
        ClassifyThresholds {
            in_gap_fraction: lit(0.9),
            byproduct_fraction: lit(0.5),
        }
    }
}

pub(crate) fn conjugate_swap<T: Real>(v: &DVector<Complex<T>>) -> DVector<Complex<T>> {
    let n = v.len() / 2;
    DVector::from_fn(2 * n, |i, _| {
        if i < n {
            v[i + n].conj()
        } else {
            v[i - n].conj()
        }
    })
}

/// Raw eigenvalues of `h` in ascending order, straight from the eigensolver.
pub fn eigenvalues<T: Real>(h: &BdgMatrix<T>) -> Result<Vec<T>> {
    let eig = solve(h)?;
    let mut values: Vec<T> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(values)
}

fn solve<T: Real>(h: &BdgMatrix<T>) -> Result<SymmetricEigen<Complex<T>, nalgebra::Dyn>> {
    let dim = h.dimension();
    SymmetricEigen::try_new(h.entries().clone(), epsilon::<T>(), 1000 * dim.max(10)).ok_or(
        Error::EigenNonConvergence {
            dimension: dim,
            norm: to_f64(h.norm_inf()),
        },
    )
}

/// Full spectrum with orthonormal eigenvectors, ascending by energy.
///
/// Inside every degenerate cluster the returned vectors are chosen so that
/// the negative-energy members are the conjugate-swapped images of the
/// positive ones. At zero energy this is done by building the self-conjugate
/// (Majorana) basis of the cluster and pairing it canonically.
pub fn diagonalize<T: Real>(h: &BdgMatrix<T>) -> Result<Vec<EigenMode<T>>> {
    let eig = solve(h)?;
    let dim = h.dimension();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let mut energies: Vec<T> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors: Vec<DVector<Complex<T>>> =
        order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();

    let scale = energies
        .iter()
        .fold(T::one(), |a, e| a.max(e.abs()));
    let eps = epsilon::<T>();
    let tol = (eps.sqrt() * lit(1e-3)).max(eps * lit(1e3)) * scale;

    // clusters of numerically equal eigenvalues, as index ranges into the sorted list
    let mut clusters: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=dim {
        if i == dim || energies[i] - energies[i - 1] > tol {
            clusters.push((start, i));
            start = i;
        }
    }

    let mean = |(a, b): (usize, usize), e: &[T]| {
        e[a..b].iter().fold(T::zero(), |s, x| s + *x) / lit((b - a) as f64)
    };

    for &(a, b) in &clusters {
        let m = mean((a, b), &energies);
        if m.abs() <= tol {
            canonicalize_zero_cluster(h, &mut energies[a..b], &mut vectors[a..b])?;
        }
    }
    for &(a, b) in &clusters {
        let m = mean((a, b), &energies);
        if m <= tol || b - a < 2 {
            continue;
        }
        // partner cluster at -m with the same multiplicity
        if let Some(&(na, _)) = clusters.iter().find(|&&(na, nb)| {
            nb - na == b - a && (mean((na, nb), &energies) + m).abs() <= tol
        }) {
            for k in 0..(b - a) {
                let image = conjugate_swap(&vectors[a + k]);
                energies[na + k] = rayleigh(h, &image);
                vectors[na + k] = image;
            }
        }
    }

    let mut modes: Vec<EigenMode<T>> = energies
        .iter()
        .zip(vectors.iter())
        .map(|(e, v)| EigenMode::from_stacked(*e, &fix_phase(v)))
        .collect();
    modes.sort_by(|x, y| x.energy.partial_cmp(&y.energy).unwrap());
    Ok(modes)
}

fn rayleigh<T: Real>(h: &BdgMatrix<T>, v: &DVector<Complex<T>>) -> T {
    v.dotc(&(h.entries() * v)).re / v.norm_squared()
}

/// Largest-magnitude component made real and positive.
fn fix_phase<T: Real>(v: &DVector<Complex<T>>) -> DVector<Complex<T>> {
    let mut best = 0;
    let mut best_mod = T::zero();
    // ties resolved towards the first index
    let slack = T::one() - epsilon::<T>() * lit(64.0);
    for (i, z) in v.iter().enumerate() {
        let m = z.modulus();
        if m > best_mod / slack {
            best = i;
            best_mod = m;
        }
    }
    if best_mod == T::zero() {
        return v.clone();
    }
    let phase = v[best].conj() / creal(best_mod);
    v.map(|z| z * phase)
}

/// Rebuilds a zero-energy cluster from its self-conjugate basis.
///
/// Vectors `x` with `x = (w*, v*)` span a real vector space on which `H`
/// acts as `i A` with `A` real antisymmetric. Bringing `A` to 2x2 canonical
/// blocks pairs the Majorana vectors `(m_u, m_v)` into the mode
/// `(m_u + i m_v)/sqrt 2` at energy `+e` and its image at `-e`.
fn canonicalize_zero_cluster<T: Real>(
    h: &BdgMatrix<T>,
    energies: &mut [T],
    vectors: &mut [DVector<Complex<T>>],
) -> Result<()> {
    let size = vectors.len();
    if size % 2 == 1 {
        return Err(Error::SymmetryViolation {
            index: size,
            overlap: 0.0,
        });
    }
    let i_unit = cplx(T::zero(), T::one());
    let half: Complex<T> = creal(lit(0.5));

    let mut candidates: Vec<DVector<Complex<T>>> = Vec::with_capacity(2 * size);
    for u in vectors.iter() {
        let cu = conjugate_swap(u);
        candidates.push((u + &cu).map(|z| z * half));
        candidates.push((u - &cu).map(|z| z * i_unit * half));
    }
    let mut basis: Vec<DVector<Complex<T>>> = Vec::with_capacity(size);
    for cand in candidates {
        if basis.len() == size {
            break;
        }
        let mut x = cand;
        for _ in 0..2 {
            for q in &basis {
                let coeff = q.dotc(&x).re;
                x -= q.map(|z| z * creal(coeff));
            }
        }
        let norm = x.norm();
        if norm > lit(1e-3) {
            let x = x.map(|z| z / creal(norm));
            // restore exact self-conjugacy after rounding
            let cx = conjugate_swap(&x);
            let x = (&x + &cx).map(|z| z * half);
            let nx = x.norm();
            basis.push(x.map(|z| z / creal(nx)));
        }
    }
    if basis.len() != size {
        return Err(Error::SymmetryViolation {
            index: basis.len(),
            overlap: 0.0,
        });
    }

    let hb: Vec<DVector<Complex<T>>> = basis.iter().map(|m| h.entries() * m).collect();
    let a = DMatrix::<T>::from_fn(size, size, |r, c| {
        let upper = basis[r].dotc(&hb[c]).im;
        let lower = basis[c].dotc(&hb[r]).im;
        (upper - lower) * lit(0.5)
    });

    let pairs = canonical_pairs(&a);
    let inv_sqrt2: Complex<T> = creal(T::one() / lit::<T>(2.0).sqrt());
    let combine = |coeffs: &DVector<T>| {
        let mut out = DVector::from_element(basis[0].len(), czero::<T>());
        for (k, m) in basis.iter().enumerate() {
            out += m.map(|z| z * creal(coeffs[k]));
        }
        out
    };
    let half_size = size / 2;
    for (k, (u, v, e)) in pairs.into_iter().enumerate() {
        let mu = combine(&u);
        let mv = combine(&v);
        let plus = (&mu + mv.map(|z| z * i_unit)).map(|z| z * inv_sqrt2);
        let minus = conjugate_swap(&plus);
        energies[half_size + k] = e;
        vectors[half_size + k] = plus;
        energies[half_size - 1 - k] = -e;
        vectors[half_size - 1 - k] = minus;
    }
    Ok(())
}

/// Splits a real antisymmetric matrix into orthogonal 2x2 blocks
/// `A u = e v`, `A v = -e u` with `e >= 0`.
fn canonical_pairs<T: Real>(a: &DMatrix<T>) -> Vec<(DVector<T>, DVector<T>, T)> {
    let size = a.nrows();
    let tiny = epsilon::<T>() * lit(100.0) * a.norm().max(T::one());
    let mut remaining: Vec<DVector<T>> = (0..size)
        .map(|i| DVector::from_fn(size, |r, _| if r == i { T::one() } else { T::zero() }))
        .collect();
    let mut out = Vec::new();
    while remaining.len() >= 2 {
        let r = remaining.len();
        let q = DMatrix::from_columns(&remaining);
        let ar = q.transpose() * a * &q;
        let neg_sq = -(&ar * &ar);
        let sym = (&neg_sq + neg_sq.transpose()) * lit::<T>(0.5);
        let eig = SymmetricEigen::new(sym);
        let mut idx: Vec<usize> = (0..r).collect();
        idx.sort_by(|&x, &y| eig.eigenvalues[y].partial_cmp(&eig.eigenvalues[x]).unwrap());
        let y = eig.eigenvectors.column(idx[0]).into_owned();
        let u = &q * &y;
        let au = a * &u;
        let e = au.norm();
        let v = if e > tiny {
            au / e
        } else {
            let y2 = eig.eigenvectors.column(idx[1]).into_owned();
            &q * y2
        };
        let e = if e > tiny { e } else { T::zero() };
        // orthonormal complement of {u, v} inside span(remaining)
        let mut next: Vec<DVector<T>> = Vec::new();
        for col in remaining.iter() {
            let mut x = col.clone();
            for _ in 0..2 {
                x -= &u * u.dot(&x);
                x -= &v * v.dot(&x);
                for p in &next {
                    let c: T = p.dot(&x);
                    x -= p * c;
                }
            }
            let nx = x.norm();
            if nx > lit(1e-6) && next.len() < r - 2 {
                next.push(x / nx);
            }
        }
        out.push((u, v, e));
        remaining = next;
    }
    out
}

/// Matches every positive mode with its particle-hole partner.
///
/// The upper half of the sorted spectrum is taken as the positive branch.
/// Partners are chosen by the largest `|<C v_+, v_->|`, `C` being the
/// conjugate swap.
pub fn pair_modes<T: Real>(modes: &[EigenMode<T>]) -> Result<Vec<ModePair<T>>> {
    let dim = modes.len();
    if dim % 2 == 1 {
        return Err(Error::SymmetryViolation {
            index: dim,
            overlap: 0.0,
        });
    }
    let half = dim / 2;
    let mut sorted: Vec<&EigenMode<T>> = modes.iter().collect();
    sorted.sort_by(|a, b| a.energy.partial_cmp(&b.energy).unwrap());
    let (negatives, positives) = sorted.split_at(half);
    let neg_vecs: Vec<DVector<Complex<T>>> = negatives.iter().map(|m| m.stacked()).collect();
    let mut used = vec![false; half];
    let threshold: T = lit(0.99);

    let mut pairs = Vec::with_capacity(half);
    for (k, pos) in positives.iter().enumerate() {
        let image = pos.conjugate_swap();
        let mut best = None;
        let mut best_overlap = T::zero();
        for (j, nv) in neg_vecs.iter().enumerate() {
            if used[j] {
                continue;
            }
            let o = image.dotc(nv).modulus();
            if o > best_overlap {
                best_overlap = o;
                best = Some(j);
            }
        }
        match best {
            Some(j) if best_overlap >= threshold => {
                used[j] = true;
                pairs.push(ModePair {
                    positive: (*pos).clone(),
                    negative: negatives[j].clone(),
                });
            }
            _ => {
                return Err(Error::SymmetryViolation {
                    index: half + k,
                    overlap: to_f64(best_overlap),
                })
            }
        }
    }
    Ok(pairs)
}

/// Labels every pair as in-gap, defect by-product or bulk (in-gap wins).
pub fn classify_modes<T: Real>(
    pairs: &[ModePair<T>],
    config: &WireConfig<T>,
    thresholds: &ClassifyThresholds<T>,
) -> Vec<LabeledPair<T>> {
    let gap = bulk_gap(config.hopping, config.pairing, config.chem_potential);
    pairs
        .iter()
        .enumerate()
        .map(|(id, pair)| {
            let e = pair.energy().abs();
            let class = if e < thresholds.in_gap_fraction * gap {
                ModeClass::InGap
            } else if config.defects.iter().any(|d| {
                let mp = d.potential.abs();
                (e - mp).abs() < thresholds.byproduct_fraction * mp
            }) {
                ModeClass::DefectByproduct
            } else {
                ModeClass::Bulk
            };
            let mut pair = pair.clone();
            pair.positive.class = Some(class);
            pair.negative.class = Some(class);
            LabeledPair { id, class, pair }
        })
        .collect()
}

/// `g_i = v_i + conj(w_i)`, `h_i = v_i - conj(w_i)`.
pub fn majorana_rep<T: Real>(mode: &EigenMode<T>) -> MajoranaPair<T> {
    let n = mode.n_sites();
    MajoranaPair {
        g: DVector::from_fn(n, |i, _| mode.electron_amp[i] + mode.hole_amp[i].conj()),
        h: DVector::from_fn(n, |i, _| mode.electron_amp[i] - mode.hole_amp[i].conj()),
    }
}

/// `(pair id, energy)` of every in-gap pair: the Majorana coupling strengths
/// of the low-energy effective Hamiltonian.
pub fn low_energy_couplings<T: Real>(labeled: &[LabeledPair<T>]) -> Vec<(usize, T)> {
    labeled
        .iter()
        .filter(|l| l.class == ModeClass::InGap)
        .map(|l| (l.id, l.pair.energy()))
        .collect()
}

/// All 2N modes of the labeled pairs, ascending by energy, with classes set.
pub fn labeled_modes<T: Real>(labeled: &[LabeledPair<T>]) -> Vec<EigenMode<T>> {
    let mut out: Vec<EigenMode<T>> = labeled
        .iter()
        .flat_map(|l| [l.pair.negative.clone(), l.pair.positive.clone()])
        .collect();
    out.sort_by(|a, b| a.energy.partial_cmp(&b.energy).unwrap());
    out
}

/// Convenience pipeline: build, diagonalize, pair and classify.
pub fn analyze<T: Real>(
    config: &WireConfig<T>,
    thresholds: &ClassifyThresholds<T>,
) -> Result<Vec<LabeledPair<T>>> {
    let h = crate::model::build_bdg(config)?;
    let modes = diagonalize(&h)?;
    let pairs = pair_modes(&modes)?;
    Ok(classify_modes(&pairs, config, thresholds))
}
