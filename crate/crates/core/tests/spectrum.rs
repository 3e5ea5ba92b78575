use spikelab::profile::default_profile;
use spikelab::spectrum::{assemble_linearized, kernel_report, HalfBoxGrid};

fn report(n: usize, p: f64, l: f64, h: f64, k: usize) -> spikelab::spectrum::SpectrumReport {
    let prof = default_profile(n, p).unwrap();
    let grid = HalfBoxGrid::new(n, l, h).unwrap();
    kernel_report(&assemble_linearized(&prof, &grid).unwrap(), k).unwrap()
}

#[test]
fn translation_eigenvalue_is_second_order_in_h() {
    let coarse = report(2, 4.0, 12.0, 0.2, 3);
    let fine = report(2, 4.0, 12.0, 0.1, 3);
    for r in [&coarse, &fine] {
        assert_eq!(r.cluster_size, 1);
        assert!(r.overlaps.tangential[0][0].abs() > 0.99);
        assert!(r.overlaps.normal[0] < 0.2);
    }
    let ratio = coarse.eigenvalues[0] / fine.eigenvalues[0];
    assert!((ratio - 4.0).abs() < 0.3, "ratio {ratio}");
    assert!((fine.eigenvalues[0] / 0.01 + 1.297).abs() < 0.01, "{}", fine.eigenvalues[0]);
}

#[test]
fn gap_is_stable_under_box_growth() {
    let a = report(2, 4.0, 12.0, 0.2, 3);
    let b = report(2, 4.0, 16.0, 0.2, 3);
    assert!(a.gap > 1.0 && b.gap > 1.0);
    assert!((a.gap - b.gap).abs() < 1e-2, "{} {}", a.gap, b.gap);
    assert!((a.eigenvalues[0] - b.eigenvalues[0]).abs() < 1e-4);
}

#[test]
fn three_dimensional_kernel_has_two_tangential_modes() {
    let r = report(3, 3.0, 12.0, 0.2, 4);
    assert_eq!(r.cluster_size, 2, "{:?}", r.eigenvalues);
    for j in 0..2 {
        let t: f64 = r.overlaps.tangential[j].iter().map(|c| c * c).sum::<f64>().sqrt();
        assert!(t > 0.99, "{t}");
        assert!(r.overlaps.normal[j] < 0.2);
    }
    assert!((r.eigenvalues[0] - r.eigenvalues[1]).abs() < 1e-6);
    assert!(r.gap > 0.05);
}
