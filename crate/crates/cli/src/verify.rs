//! Quick oracle suite: analytic anchors and identity checks on random
//! configurations.

use std::time::Instant;

use kitaev_core::{
    build_bdg, diagonalize, differential_conductance, eigenvalues, landauer_oracle, propagator, steady_limit,
    Complex, LeadConfig64, PoleSum64, SelfEnergy, WireConfig64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

fn random_wire(rng: &mut ChaCha8Rng, pairing: bool) -> WireConfig64 {
    let n = rng.random_range(2..=12);
    let (j, mu) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
    let mut w = if rng.random_bool(0.5) {
        WireConfig64::open(n, j, 0.0, mu)
    } else {
        WireConfig64::closed(n, j, 0.0, mu)
    };
    if pairing {
        w = w.with_pairing(Complex::new(rng.random_range(-2.0..2.0), rng.random_range(-1.0..1.0)));
    }
    for _ in 0..rng.random_range(0..=2) {
        let site = rng.random_range(1..=n);
        if w.defects.iter().all(|d| d.site != site) {
            w = w.with_defect(site, rng.random_range(-2.0..2.0));
        }
    }
    w
}

fn random_leads(rng: &mut ChaCha8Rng, n: usize) -> [LeadConfig64; 2] {
    [
        LeadConfig64::new(rng.random_range(1..=n), rng.random_range(0.05..1.0), rng.random_range(1.0..30.0)),
        LeadConfig64::new(rng.random_range(1..=n), rng.random_range(0.05..1.0), rng.random_range(1.0..30.0)),
    ]
}

fn timed(name: &'static str, f: impl FnOnce() -> (bool, String)) -> Check {
    let start = Instant::now();
    let (pass, detail) = f();
    Check { name, pass, detail, seconds: start.elapsed().as_secs_f64() }
}

pub fn run_all(seed: u64) -> Vec<Check> {
    vec![
        timed("sweet-spot zero modes", || {
            let counts: Vec<usize> = (2..=8)
                .map(|n| {
                    let e = eigenvalues(&build_bdg(&WireConfig64::open(n, 1.0, 1.0, 0.0)).unwrap()).unwrap();
                    e.iter().filter(|x| x.abs() <= 1e-12).count()
                })
                .collect();
            (counts.iter().all(|&c| c == 2), format!("counts {counts:?}"))
        }),
        timed("particle-hole structure", || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut worst = 0.0f64;
            let mut exact = true;
            for _ in 0..200 {
                let h = build_bdg(&random_wire(&mut rng, true)).unwrap();
                exact &= h.hermiticity_residual() == 0.0 && h.particle_hole_residual() == 0.0;
                for m in diagonalize(&h).unwrap() {
                    let image = m.conjugate_swap();
                    let r = h.entries() * &image + image.map(|z| z * m.energy);
                    worst = worst.max(r.norm());
                }
            }
            (exact && worst <= 1e-8, format!("construction exact: {exact}, worst map residual {worst:.2e}"))
        }),
        timed("dissipation identity", || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 1);
            let mut worst = 0.0f64;
            let mut done = 0;
            while done < 100 {
                let w = random_wire(&mut rng, true);
                let leads = random_leads(&mut rng, w.n_sites);
                let h = build_bdg(&w).unwrap();
                let Ok(g) = propagator(&h, &leads, rng.random_range(-6.0..6.0), SelfEnergy::None) else { continue };
                let scale = g.matrix.iter().fold(0.0f64, |a, z| a.max(z.norm())).powi(2);
                let (r1, r2) = g.dissipation_residual(&leads, w.n_sites);
                worst = worst.max(r1.max(r2) / scale);
                done += 1;
            }
            (worst <= 1e-8, format!("worst residual / |G|^2 {worst:.2e}"))
        }),
        timed("Landauer oracle", || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 2);
            let mut worst = 0.0f64;
            for _ in 0..100 {
                let w = random_wire(&mut rng, false);
                let leads = random_leads(&mut rng, w.n_sites);
                let bias = rng.random_range(-3.0..3.0);
                let a = landauer_oracle(&w, &leads, bias, SelfEnergy::None).unwrap();
                let s = differential_conductance(&build_bdg(&w).unwrap(), &leads, bias, SelfEnergy::None).unwrap();
                worst = worst.max((a - s.total).abs() / a.max(1e-300));
            }
            (worst <= 1e-10, format!("worst relative mismatch {worst:.2e}"))
        }),
        timed("steady limit", || {
            let s = PoleSum64::new()
                .pole(Complex::new(0.0, 1.0), Complex::new(0.0, 0.0))
                .pole(Complex::new(0.0, 1.0), Complex::new(1.0, -0.5));
            let v = steady_limit(&s).unwrap();
            (v == Complex::new(1.0, 0.0), format!("limit {v}"))
        }),
        timed("edge zero-bias peak", || {
            let h = build_bdg(&WireConfig64::open(60, 1.0, 0.4, 0.1)).unwrap();
            let leads = [LeadConfig64::new(1, 0.3, 20.0), LeadConfig64::new(60, 0.3, 20.0)];
            let g = differential_conductance(&h, &leads, 0.0, SelfEnergy::None).unwrap().total;
            ((g - 2.0).abs() <= 0.1, format!("dI/dV(0) = {g:.6}"))
        }),
    ]
}
