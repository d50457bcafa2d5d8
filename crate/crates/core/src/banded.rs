//! Banded complex LU with partial pivoting, used for the contact elements of
//! the propagator where only one row of the inverse is needed.

#![allow(clippy::needless_range_loop)]

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex;

use crate::scalar::{creal, czero, Real};

/// Maps dense indices to band positions so that the band is narrow.
///
/// Candidates are the natural order and the folded order
/// `0, N-1, 1, N-2, ...` (good for rings), each with the electron and hole
/// index of a site placed next to each other.
#[derive(Debug, Clone)]
pub(crate) struct Ordering {
    /// `position[dense_index]`
    pub position: Vec<usize>,
    pub lower: usize,
    pub upper: usize,
}

impl Ordering {
    pub fn choose<T: Real>(entries: &DMatrix<Complex<T>>, n_sites: usize) -> Ordering {
        let natural: Vec<usize> = (0..n_sites).collect();
        let mut folded = Vec::with_capacity(n_sites);
        let (mut lo, mut hi) = (0usize, n_sites);
        while lo < hi {
            folded.push(lo);
            lo += 1;
            if lo < hi {
                hi -= 1;
                folded.push(hi);
            }
        }
        [natural, folded]
            .into_iter()
            .map(|sites| Self::from_sites(entries, n_sites, &sites))
            .min_by_key(|o| o.lower + o.upper)
            .expect("two candidates")
    }

    fn from_sites<T: Real>(entries: &DMatrix<Complex<T>>, n_sites: usize, sites: &[usize]) -> Ordering {
        let mut position = vec![0; 2 * n_sites];
        for (slot, &s) in sites.iter().enumerate() {
            position[s] = 2 * slot;
            position[s + n_sites] = 2 * slot + 1;
        }
        let (mut lower, mut upper) = (1, 1);
        let zero = czero::<T>();
        for c in 0..entries.ncols() {
            for r in 0..entries.nrows() {
                if entries[(r, c)] != zero {
                    let (pr, pc) = (position[r], position[c]);
                    if pr > pc {
                        lower = lower.max(pr - pc);
                    } else {
                        upper = upper.max(pc - pr);
                    }
                }
            }
        }
        Ordering { position, lower, upper }
    }
}

/// Row-wise band storage: row `i` keeps columns `i - kl ..= i + kl + ku`
/// (the extra `kl` columns absorb pivoting fill-in).
pub(crate) struct BandLu<T: Real> {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<Complex<T>>,
    pivots: Vec<usize>,
    /// `multipliers[k * kl + r - 1]` eliminates row `k + r` at step `k`
    multipliers: Vec<Complex<T>>,
    norm1: T,
}

/// A zero pivot was hit at the given step.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ZeroPivot;

impl<T: Real> BandLu<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandLu {
            n,
            kl,
            ku,
            width,
            data: vec![czero(); n * width],
            pivots: vec![0; n],
            multipliers: vec![czero(); n * kl],
            norm1: T::zero(),
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: Complex<T>) {
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    /// Factorizes in place; records the 1-norm of the original matrix.
    pub fn factor(&mut self) -> Result<(), ZeroPivot> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let mut colsum = vec![T::zero(); n];
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let hi = (i + ku).min(n - 1);
            for (j, c) in colsum.iter_mut().enumerate().take(hi + 1).skip(lo) {
                *c += self.data[self.idx(i, j)].modulus();
            }
        }
        self.norm1 = colsum.into_iter().fold(T::zero(), |a, b| a.max(b));

        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.idx(k, k)].modulus();
            for r in (k + 1)..=last {
                let m = self.data[self.idx(r, k)].modulus();
                if m > best {
                    best = m;
                    p = r;
                }
            }
            self.pivots[k] = p;
            if best == T::zero() {
                return Err(ZeroPivot);
            }
            let right = (k + kl + ku).min(n - 1);
            if p != k {
                for c in k..=right {
                    let a = self.idx(k, c);
                    let b = self.idx(p, c);
                    self.data.swap(a, b);
                }
            }
            let inv = creal::<T>(T::one()) / self.data[self.idx(k, k)];
            for r in (k + 1)..=last {
                let ir = self.idx(r, k);
                let m = self.data[ir] * inv;
                self.data[ir] = czero();
                self.multipliers[k * kl + (r - k - 1)] = m;
                if m == czero() {
                    continue;
                }
                for c in (k + 1)..=right {
                    let src = self.data[self.idx(k, c)];
                    let dst = self.idx(r, c);
                    self.data[dst] -= m * src;
                }
            }
        }
        Ok(())
    }

    pub fn norm1(&self) -> T {
        self.norm1
    }

    /// Solves `A x = b` in place.
    pub fn solve(&self, b: &mut [Complex<T>]) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            for r in (k + 1)..=(k + kl).min(n - 1) {
                b[r] -= self.multipliers[k * kl + (r - k - 1)] * bk;
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for c in (k + 1)..=(k + kl + ku).min(n - 1) {
                s -= self.data[self.idx(k, c)] * b[c];
            }
            b[k] = s / self.data[self.idx(k, k)];
        }
    }

    /// Solves `A^dag x = b` in place.
    pub fn solve_adjoint(&self, b: &mut [Complex<T>]) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        // U^dag y = b, forward
        for k in 0..n {
            let mut s = b[k];
            for c in k.saturating_sub(kl + ku)..k {
                s -= self.data[self.idx(c, k)].conj() * b[c];
            }
            b[k] = s / self.data[self.idx(k, k)].conj();
        }
        // undo the elimination steps in reverse order
        for k in (0..n).rev() {
            let mut s = b[k];
            for r in (k + 1)..=(k + kl).min(n - 1) {
                s -= self.multipliers[k * kl + (r - k - 1)].conj() * b[r];
            }
            b[k] = s;
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
        }
    }

    /// Hager-Higham estimate of `||A^-1||_1`.
    pub fn inverse_norm1_estimate(&self) -> T {
        let n = self.n;
        let l1 = |v: &[Complex<T>]| v.iter().fold(T::zero(), |a, z| a + z.modulus());
        let nf = T::from_usize(n).unwrap();
        let mut x = vec![creal(T::one() / nf); n];
        let mut est = T::zero();
        let mut last_j = usize::MAX;
        for iter in 0..5 {
            let mut y = x.clone();
            self.solve(&mut y);
            let norm = l1(&y);
            if iter > 0 && norm <= est {
                break;
            }
            est = norm;
            let mut z: Vec<Complex<T>> = y
                .iter()
                .map(|v| {
                    let m = v.modulus();
                    if m > T::zero() {
                        *v / creal(m)
                    } else {
                        creal(T::one())
                    }
                })
                .collect();
            self.solve_adjoint(&mut z);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.modulus()))
                .fold((0, T::zero()), |acc, c| if c.1 > acc.1 { c } else { acc });
            let ztx = z.iter().zip(&x).fold(T::zero(), |a, (zi, xi)| a + (zi.conj() * xi).re);
            if iter > 0 && (zmax <= ztx || j == last_j) {
                break;
            }
            last_j = j;
            x = vec![czero(); n];
            x[j] = creal(T::one());
        }
        // alternating-sign probe guards against the greedy iteration stalling
        let denom = T::from_usize((n.max(2)) - 1).unwrap();
        let mut alt: Vec<Complex<T>> = (0..n)
            .map(|i| {
                let sign = if i % 2 == 0 { T::one() } else { -T::one() };
                creal(sign * (T::one() + T::from_usize(i).unwrap() / denom))
            })
            .collect();
        self.solve(&mut alt);
        let two_thirds = T::from_f64(2.0 / 3.0).unwrap();
        est.max(two_thirds * l1(&alt) / nf)
    }
}
