use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spikelab::geometry::{BoundaryManifold, ManifoldSpec};
use spikelab::pde::{
    apply_istar, continuation, discrete_energy, discrete_lq_norm, discrete_norm, discretize, newton_solve, NewtonOptions,
};
use spikelab::profile::default_profile;
use spikelab::reduction::PeakAnsatz;

fn ellipse() -> BoundaryManifold {
    BoundaryManifold::new(ManifoldSpec::Ellipse { a: 2.0, b: 1.0, orientation: 1 }).unwrap()
}

fn disk() -> BoundaryManifold {
    BoundaryManifold::new(ManifoldSpec::Disk { radius: 1.0, orientation: 1 }).unwrap()
}

#[test]
fn istar_is_bounded_from_lp_conjugate() {
    let d = discretize(&disk(), 0.025).unwrap();
    let eps = 0.1;
    let p: f64 = 4.0;
    let q = p / (p - 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut ratios = vec![];
    for _ in 0..20 {
        let modes: Vec<(f64, f64, f64, f64)> =
            (0..4).map(|_| (rng.random_range(-6.0..6.0), rng.random_range(-6.0..6.0), rng.random_range(0.0..6.3), rng.random_range(-1.0..1.0))).collect();
        let v = d.sample(|x, y| modes.iter().map(|(kx, ky, ph, a)| a * (kx * x + ky * y + ph).cos()).sum());
        let u = apply_istar(&d, eps, &v).unwrap();
        ratios.push(discrete_norm(&d, &u, eps) / discrete_lq_norm(&d, &v, q, eps));
    }
    let c = ratios.iter().copied().fold(0.0, f64::max);
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    // One constant bounds all samples; the spread stays narrow.
    assert!(c < 0.5 && lo > 0.5 * c, "[{lo}, {c}]");
}

fn spike(d: &spikelab::pde::DiscreteDomain, eps: f64, t: f64) -> (Vec<f64>, spikelab::pde::SolveReport) {
    let prof = default_profile(2, 4.0).unwrap();
    let a = PeakAnsatz::new(&d.manifold, &prof, eps, d.manifold.curve_point(t), 0.45).unwrap();
    newton_solve(d, eps, 4.0, &d.sample_ansatz(&a), NewtonOptions::default()).unwrap()
}

#[test]
fn spike_at_curvature_maximum_has_lower_energy() {
    let d = discretize(&ellipse(), 0.0125).unwrap();
    let eps = 0.05;
    let (u_max, r_max) = spike(&d, eps, 0.0);
    let (u_min, r_min) = spike(&d, eps, std::f64::consts::FRAC_PI_2);
    assert!(r_max.converged && r_min.converged);
    assert!(r_max.min_u > 0.0 && r_min.min_u > 0.0);
    assert!(((r_max.foot_point[0] - 2.0).powi(2) + r_max.foot_point[1].powi(2)).sqrt() < 0.1);
    let (j_max, j_min) = (discrete_energy(&d, &u_max, eps, 4.0), discrete_energy(&d, &u_min, eps, 4.0));
    assert!((j_max - r_max.energy).abs() < 1e-12 * j_max.abs());
    assert!(j_max < j_min, "{j_max} {j_min}");
    assert!((j_max - 2.74120).abs() < 1e-4 && (j_min - 2.87848).abs() < 1e-4, "{j_max} {j_min}");
}

#[test]
fn single_stage_continuation_is_a_newton_solve() {
    let d = discretize(&ellipse(), 0.0125).unwrap();
    let prof = default_profile(2, 4.0).unwrap();
    let (res, fields) = continuation(&d, &prof, &[0.06], 0.0, 0.45, false, NewtonOptions::default()).unwrap();
    let (u, rep) = spike(&d, 0.06, 0.0);
    assert!(res.failure.is_none());
    assert_eq!(res.reports.len(), 1);
    assert_eq!(res.reports[0].iterations, rep.iterations);
    assert_eq!(fields[0], u);
    assert!(res.reports[0].energy_gap.unwrap() > 0.0);
}

#[test]
fn foot_point_is_stable_under_mesh_refinement() {
    let eps = 0.08;
    let coarse = discretize(&ellipse(), 0.0125).unwrap();
    let fine = discretize(&ellipse(), 0.00625).unwrap();
    let prof = default_profile(2, 4.0).unwrap();
    let run = |d| {
        let (res, _) = continuation(d, &prof, &[eps], 0.1, 0.45, true, NewtonOptions::default()).unwrap();
        assert!(res.failure.is_none(), "{:?}", res.failure);
        res.reports[0].clone()
    };
    let (a, b) = (run(&coarse), run(&fine));
    let shift = ((a.foot_point[0] - b.foot_point[0]).powi(2) + (a.foot_point[1] - b.foot_point[1]).powi(2)).sqrt();
    assert!(shift < 2.0 * 0.00625, "{shift}");
}
