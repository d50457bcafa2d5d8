use kitaev_core::{
    build_bdg, conductance_sweep, differential_conductance, eigenvalues, landauer_oracle, steady_current, Error,
    Junction, LeadConfig, LeadConfig32, LeadConfig64, QuadratureSpec, SelfEnergy, SweepSpec, WireConfig32,
    WireConfig64,
};

fn edge_leads(n: usize, lambda: f64) -> [LeadConfig64; 2] {
    [LeadConfig64::new(1, lambda, 20.0), LeadConfig64::new(n, lambda, 20.0)]
}

#[test]
fn equilibrium_current_vanishes_for_mirror_contacts() {
    let h = build_bdg(&WireConfig64::open(20, 1.0, 0.4, 0.1)).unwrap();
    let r = steady_current(&h, &edge_leads(20, 0.3), SelfEnergy::None, &QuadratureSpec::default()).unwrap();
    assert!(r.current.abs() < 1e-10, "{}", r.current);
}

#[test]
fn no_andreev_current_without_pairing() {
    let h = build_bdg(&WireConfig64::open(12, 1.0, 0.0, 0.3)).unwrap();
    let mut leads = edge_leads(12, 0.2);
    leads[0] = leads[0].clone().with_chem_potential(0.8);
    let r = steady_current(&h, &leads, SelfEnergy::None, &QuadratureSpec::default()).unwrap();
    assert_eq!(r.crossed, 0.0);
    assert_eq!(r.local_andreev, 0.0);
    assert!(r.direct > 0.0);
}

#[test]
fn small_bias_current_gives_zero_bias_conductance() {
    let h = build_bdg(&WireConfig64::open(60, 1.0, 0.4, 0.1)).unwrap();
    let delta = 1e-4;
    let mut leads = edge_leads(60, 0.3);
    leads[0] = leads[0].clone().with_chem_potential(delta);
    let quad = QuadratureSpec { rel_tol: 1e-10, ..QuadratureSpec::default() };
    let r = steady_current(&h, &leads, SelfEnergy::None, &quad).unwrap();
    let g = r.current / delta;
    assert!((g - 2.0).abs() < 0.1, "{g}");
    let g0 = differential_conductance(&h, &edge_leads(60, 0.3), 0.0, SelfEnergy::None).unwrap();
    assert!((g - g0.total).abs() < 1e-3 * g0.total, "{g} vs {}", g0.total);
}

#[test]
fn finite_difference_matches_conductance() {
    let h = build_bdg(&WireConfig64::open(16, 1.0, 0.5, 0.2)).unwrap();
    let quad = QuadratureSpec { rel_tol: 1e-11, ..QuadratureSpec::default() };
    let current = |v: f64| {
        let mut leads = edge_leads(16, 0.4);
        leads[0] = leads[0].clone().with_chem_potential(v);
        steady_current(&h, &leads, SelfEnergy::None, &quad).unwrap().current
    };
    let d = 1e-4;
    for v in [0.15, 0.6, 1.3] {
        let fd = (current(v + d) - current(v - d)) / (2.0 * d);
        let g = differential_conductance(&h, &edge_leads(16, 0.4), v, SelfEnergy::None).unwrap().total;
        assert!((fd - g).abs() < 1e-3 * g.max(1e-3), "v={v}: {fd} vs {g}");
    }
}

#[test]
fn small_chain_peaks_match_eigenenergies() {
    let n = 10;
    let w = WireConfig64::open(n, 1.0, 0.0, 0.3);
    let h = build_bdg(&w).unwrap();
    let spec = SweepSpec::new(-3.0, 3.0, 301);
    let curve = conductance_sweep(&h, &edge_leads(n, 0.2), &spec, SelfEnergy::None).unwrap();
    // electron-like levels of the tight-binding block are -mu - 2J cos(k pi/(N+1))
    let levels: Vec<f64> = (1..=n)
        .map(|k| -0.3 - 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos())
        .collect();
    assert_eq!(curve.peaks.len(), levels.len());
    for p in &curve.peaks {
        let nearest = levels.iter().map(|l| (l - p.location).abs()).fold(f64::INFINITY, f64::min);
        // the end-site broadening shifts maxima slightly on a chain this short
        assert!(nearest < 5e-3, "peak at {} is {nearest} from a level", p.location);
        let s = curve.nearest(p.location).unwrap();
        let oracle = landauer_oracle(&w, &edge_leads(n, 0.2), s.bias, SelfEnergy::None).unwrap();
        assert!((oracle - s.total).abs() < 1e-10 * oracle);
        assert!(p.height >= s.total);
    }
    for s in &curve.samples {
        assert_eq!(s.crossed, 0.0);
        assert_eq!(s.local_andreev, 0.0);
    }
    let e = eigenvalues(&h).unwrap();
    assert_eq!(e.iter().filter(|x| **x > 0.0).count(), n);
}

#[test]
fn exact_mode_agrees_at_zero_bias() {
    let h = build_bdg(&WireConfig64::open(30, 1.0, 0.4, 0.1)).unwrap();
    let leads = edge_leads(30, 0.3);
    let a = differential_conductance(&h, &leads, 0.0, SelfEnergy::None).unwrap();
    let b = differential_conductance(&h, &leads, 0.0, SelfEnergy::Exact).unwrap();
    assert!((a.total - b.total).abs() < 1e-12);
    let a = differential_conductance(&h, &leads, 1.5, SelfEnergy::None).unwrap();
    let b = differential_conductance(&h, &leads, 1.5, SelfEnergy::Exact).unwrap();
    assert!((a.total - b.total).abs() > 1e-8);
}

#[test]
fn conductance_rejects_finite_temperature_and_wrong_lead_count() {
    let h = build_bdg(&WireConfig64::open(8, 1.0, 0.4, 0.1)).unwrap();
    let mut leads = edge_leads(8, 0.3);
    leads[1] = leads[1].clone().with_temperature(0.01);
    assert!(matches!(
        differential_conductance(&h, &leads, 0.1, SelfEnergy::None),
        Err(Error::FiniteTemperature { .. })
    ));
    assert!(matches!(
        Junction::new(&h, &leads[..1], SelfEnergy::None),
        Err(Error::LeadCount { expected: 2, got: 1 })
    ));
}

#[test]
fn finite_temperature_current_approaches_zero_temperature() {
    let h = build_bdg(&WireConfig64::open(12, 1.0, 0.5, 0.2)).unwrap();
    let quad = QuadratureSpec::default();
    let run = |t: f64| {
        let leads = [
            LeadConfig::new(1, 0.3, 20.0).with_chem_potential(0.7).with_temperature(t),
            LeadConfig::new(12, 0.3, 20.0).with_temperature(t),
        ];
        steady_current(&h, &leads, SelfEnergy::None, &quad).unwrap().current
    };
    let cold = run(0.0);
    assert!((run(1e-4) - cold).abs() < 1e-3 * cold.abs());
    assert!((run(0.2) - cold).abs() > 1e-4 * cold.abs());
}

#[test]
fn single_precision_tracks_double() {
    let h64 = build_bdg(&WireConfig64::open(20, 1.0, 0.4, 0.1)).unwrap();
    let h32 = build_bdg(&WireConfig32::open(20, 1.0, 0.4, 0.1)).unwrap();
    let l32 = [LeadConfig32::new(1, 0.3, 20.0), LeadConfig32::new(20, 0.3, 20.0)];
    for v in [0.0, 0.3, 1.1] {
        let a = differential_conductance(&h64, &edge_leads(20, 0.3), v, SelfEnergy::None).unwrap().total;
        let b = differential_conductance(&h32, &l32, v as f32, SelfEnergy::None).unwrap().total;
        assert!((a - b as f64).abs() < 1e-3 * a.max(1e-2), "{v}: {a} vs {b}");
    }
}
