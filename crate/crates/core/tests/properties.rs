use kitaev_core::{
    build_bdg, bulk_gap, coupling_spectrum, damping, diagonalize, differential_conductance, dissipation_matrix,
    eigenvalues, fermi, landauer_oracle, majorana_rep, pair_modes, propagator, steady_limit, Boundary, Complex,
    LeadConfig64, PoleSum64, SelfEnergy, WireConfig64, WrapPairing,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn wire() -> impl Strategy<Value = WireConfig64> {
    (
        2usize..=12,
        -2.0..2.0f64,
        (-1.5..1.5f64, -1.5..1.5f64),
        -3.0..3.0f64,
        any::<bool>(),
        any::<bool>(),
        prop::option::of((0.0..1.0f64, -20.0..20.0f64)),
    )
        .prop_map(|(n, j, (dr, di), mu, closed, printed, defect)| {
            let mut w = if closed {
                WireConfig64::closed(n, j, 0.0, mu)
            } else {
                WireConfig64::open(n, j, 0.0, mu)
            };
            w = w.with_pairing(Complex::new(dr, di));
            if printed {
                w = w.with_wrap_pairing(WrapPairing::AsPrinted);
            }
            if let Some((pos, mp)) = defect {
                let site = 1 + ((pos * n as f64) as usize).min(n - 1);
                w = w.with_defect(site, mp);
            }
            w
        })
}

fn tight_binding() -> impl Strategy<Value = WireConfig64> {
    (2usize..=30, -2.0..2.0f64, -2.0..2.0f64, any::<bool>()).prop_map(|(n, j, mu, closed)| {
        let mut w = WireConfig64::open(n, j, 0.0, mu);
        if closed {
            w.boundary = Boundary::Closed;
        }
        w
    })
}

fn lead_pair(n: usize) -> impl Strategy<Value = [LeadConfig64; 2]> {
    (1..=n, 1..=n, 0.01..1.0f64, 0.01..1.0f64, 0.5..30.0f64, 0.5..30.0f64)
        .prop_map(|(x, y, lx, ly, ox, oy)| [LeadConfig64::new(x, lx, ox), LeadConfig64::new(y, ly, oy)])
}

fn mode() -> impl Strategy<Value = SelfEnergy> {
    prop_oneof![Just(SelfEnergy::None), Just(SelfEnergy::Exact)]
}

fn max_abs(m: &DMatrix<Complex<f64>>) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn bdg_is_hermitian_and_particle_hole_symmetric(w in wire()) {
        let h = build_bdg(&w).unwrap();
        prop_assert_eq!(h.hermiticity_residual(), 0.0);
        prop_assert_eq!(h.particle_hole_residual(), 0.0);
    }

    #[test]
    fn fermi_reflection(x in -50.0..50.0f64, mu in -5.0..5.0f64, t in prop_oneof![Just(0.0), 1e-4..10.0f64]) {
        let s = fermi(mu + x, mu, t) + fermi(mu - x, mu, t);
        prop_assert!((s - 1.0).abs() <= 2.0 * f64::EPSILON, "{}", s);
        let f = fermi(mu + x, mu, t);
        prop_assert!((0.0..=1.0).contains(&f));
    }

    #[test]
    fn coupling_spectrum_even_and_non_negative(w in -100.0..100.0f64, lambda in 0.0..5.0f64, oc in 0.1..50.0f64) {
        let l = LeadConfig64::new(1, lambda, oc);
        prop_assert_eq!(coupling_spectrum(w, &l), coupling_spectrum(-w, &l));
        prop_assert!(coupling_spectrum(w, &l) >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bulk_gap_symmetry(j in -3.0..3.0f64, d in -2.0..2.0f64, mu in -5.0..5.0f64) {
        let a = bulk_gap(j, Complex::new(d, 0.0), mu);
        let b = bulk_gap(-j, Complex::new(d, 0.0), -mu);
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a), "{} vs {}", a, b);
        prop_assert!(a >= 0.0);
    }

    #[test]
    fn spectrum_is_symmetric(w in wire()) {
        let h = build_bdg(&w).unwrap();
        let e = eigenvalues(&h).unwrap();
        let d = e.len();
        for k in 0..d {
            prop_assert!((e[k] + e[d - 1 - k]).abs() <= 1e-10 * h.norm_inf().max(1.0));
        }
    }

    #[test]
    fn eigenvectors_orthonormal_and_mapped(w in wire()) {
        let h = build_bdg(&w).unwrap();
        let modes = diagonalize(&h).unwrap();
        let cols: Vec<_> = modes.iter().map(|m| m.stacked()).collect();
        let u = DMatrix::from_columns(&cols);
        let gram = u.adjoint() * &u - DMatrix::identity(u.ncols(), u.ncols());
        prop_assert!(max_abs(&gram) <= 1e-10);
        for m in &modes {
            prop_assert!(m.residual(&h) <= 1e-10 * h.norm_inf().max(1.0));
            let image = m.conjugate_swap();
            let r = h.entries() * &image + image.map(|z| z * m.energy);
            prop_assert!(r.norm() <= 1e-8);
        }
        let pairs = pair_modes(&modes).unwrap();
        for p in &pairs {
            prop_assert!(p.energy() >= 0.0);
            prop_assert!(p.conjugation_residual() <= 1e-8);
        }
    }

    #[test]
    fn majorana_weights_sum_to_two(w in wire()) {
        let h = build_bdg(&w).unwrap();
        for m in diagonalize(&h).unwrap() {
            let mj = majorana_rep(&m);
            prop_assert!((mj.weight_g() + mj.weight_h() - 2.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn dissipation_is_twice_real_damping(omega in -50.0..50.0f64, m in mode(), lambda in 0.0..2.0f64, oc in 0.1..40.0f64) {
        let l = LeadConfig64::new(2, lambda, oc);
        let g = dissipation_matrix(omega, std::slice::from_ref(&l), 3, m);
        let d = damping(omega, &l, m);
        prop_assert!((g[(1, 1)] - 2.0 * d.re).abs() <= 1e-15 * (1.0 + g[(1, 1)]));
        prop_assert!((g[(4, 4)] - 2.0 * d.re).abs() <= 1e-15 * (1.0 + g[(4, 4)]));
    }

    #[test]
    fn propagator_identities(w in wire(), seed in any::<u64>(), omega in -6.0..6.0f64, m in mode()) {
        let n = w.n_sites;
        let leads = {
            let x = 1 + (seed as usize) % n;
            let y = 1 + (seed as usize / 7) % n;
            [LeadConfig64::new(x, 0.1 + (seed % 13) as f64 * 0.05, 20.0), LeadConfig64::new(y, 0.3, 5.0)]
        };
        let h = build_bdg(&w).unwrap();
        if let Ok(g) = propagator(&h, &leads, omega, m) {
            let scale = max_abs(&g.matrix).powi(2);
            let (r1, r2) = g.dissipation_residual(&leads, n);
            prop_assert!(r1 <= 1e-8 * scale && r2 <= 1e-8 * scale);
            prop_assert!(g.defining_residual(&h, &leads, m) <= 1e-9);
        }
    }

    #[test]
    fn tight_binding_blocks_decouple((w, leads) in tight_binding().prop_flat_map(|w| {
        let n = w.n_sites;
        (Just(w), lead_pair(n))
    }), omega in -4.0..4.0f64) {
        let h = build_bdg(&w).unwrap();
        let n = w.n_sites;
        if let Ok(g) = propagator(&h, &leads, omega, SelfEnergy::None) {
            let off = g.matrix.view((0, n), (n, n)).iter().chain(g.matrix.view((n, 0), (n, n)).iter())
                .fold(0.0f64, |a, z| a.max(z.norm()));
            prop_assert!(off <= 1e-12);
        }
    }

    #[test]
    fn landauer_matches_conductance((w, leads) in tight_binding().prop_flat_map(|w| {
        let n = w.n_sites;
        (Just(w), lead_pair(n))
    }), bias in -3.0..3.0f64, m in mode()) {
        let h = build_bdg(&w).unwrap();
        let a = landauer_oracle(&w, &leads, bias, m).unwrap();
        let s = differential_conductance(&h, &leads, bias, m).unwrap();
        prop_assert!((a - s.total).abs() <= 1e-10 * a.max(1e-300), "{} vs {}", a, s.total);
        prop_assert_eq!(s.crossed, 0.0);
        prop_assert_eq!(s.local_andreev, 0.0);
    }

    #[test]
    fn conductance_terms_non_negative(w in wire(), seed in any::<u64>(), bias in -4.0..4.0f64) {
        let n = w.n_sites;
        let leads = [LeadConfig64::new(1 + (seed as usize) % n, 0.3, 20.0), LeadConfig64::new(n, 0.2, 20.0)];
        let h = build_bdg(&w).unwrap();
        if let Ok(s) = differential_conductance(&h, &leads, bias, SelfEnergy::None) {
            prop_assert!(s.direct >= 0.0 && s.crossed >= 0.0 && s.local_andreev >= 0.0);
        }
    }

    #[test]
    fn local_andreev_even_for_real_pairing(w in wire(), seed in any::<u64>(), bias in 0.0..3.0f64) {
        let mut w = w;
        w.pairing.im = 0.0;
        let n = w.n_sites;
        let leads = [LeadConfig64::new(1 + (seed as usize) % n, 0.3, 20.0), LeadConfig64::new(1 + (seed as usize / 3) % n, 0.2, 20.0)];
        let h = build_bdg(&w).unwrap();
        let (Ok(p), Ok(m)) = (
            differential_conductance(&h, &leads, bias, SelfEnergy::None),
            differential_conductance(&h, &leads, -bias, SelfEnergy::None),
        ) else { return Ok(()) };
        prop_assert!((p.local_andreev - m.local_andreev).abs() <= 1e-8 * p.local_andreev.max(1.0));
    }

    #[test]
    fn steady_limit_is_linear(
        poles in prop::collection::vec(((-3.0..3.0f64, -3.0..3.0f64), (-3.0..3.0f64, -3.0..0.0f64)), 0..6),
        origin in prop::option::of((-3.0..3.0f64, -3.0..3.0f64)),
        other in prop::option::of((-3.0..3.0f64, -3.0..3.0f64)),
        (ar, ai) in (-2.0..2.0f64, -2.0..2.0f64),
    ) {
        let mut s = PoleSum64::new();
        for ((rr, ri), (pr, pi)) in &poles {
            s = s.pole(Complex::new(*rr, *ri), Complex::new(*pr, *pi - 1e-3));
        }
        let mut t = PoleSum64::new().pole(Complex::new(1.0, -1.0), Complex::new(0.5, -0.2));
        if let Some((r, i)) = origin {
            s = s.pole(Complex::new(r, i), Complex::new(0.0, 0.0));
        }
        if let Some((r, i)) = other {
            t = t.pole(Complex::new(r, i), Complex::new(0.0, 0.0));
        }
        let a = Complex::new(ar, ai);
        let lhs = steady_limit(&s.scale(a).add(&t)).unwrap();
        let rhs = steady_limit(&s).unwrap() * a + steady_limit(&t).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
    }
}
