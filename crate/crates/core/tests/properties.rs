use num_complex::Complex64 as C64;
use pauli_core::birman_schwinger::bs_kernel;
use pauli_core::field::{flux, FieldProfile, RadialShape};
use pauli_core::numerics::quadrature::{gauss_legendre, log_selfterm, QuadratureGrid};
use pauli_core::numerics::special::{k0, k01, k1};
use pauli_core::planar::{assemble_pauli, plaquette_defect, PlanarGridParams};
use pauli_core::radial::predicted_u;
use pauli_core::zero_modes::{ac_function, form_mu, integer_part_of_flux, tail_function, tail_kinetic_norm};
use pauli_core::Spin;
use proptest::prelude::*;
use std::f64::consts::PI;

fn disk(b: f64, radius: f64) -> FieldProfile {
    FieldProfile::radial("disk", RadialShape::Piecewise { edges: vec![radius], values: vec![b] })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn macdonald_ordering(x in 1e-4f64..50.0) {
        let (a, b) = k01(x);
        prop_assert!(a > 0.0 && b > a);
        prop_assert_eq!((a, b), (k0(x), k1(x)));
        prop_assert!(k0(x * 1.01) < a);
    }

    #[test]
    fn flux_is_linear_in_scale(b in 0.1f64..4.0, r in 0.5f64..3.0, c in 0.1f64..3.0) {
        let p = disk(b, r);
        let f = flux(&p).unwrap().f;
        prop_assert!((f - 0.5 * b * r * r).abs() < 1e-10 * f.max(1.0));
        let fs = flux(&p.scaled(c)).unwrap().f;
        prop_assert!((fs - c * f).abs() < 1e-10 * fs.abs().max(1.0));
    }

    #[test]
    fn integer_part_convention(n in 0usize..5, frac in 0.05f64..1.0) {
        // F = n + frac with B = 1 on a disk of radius √(2F)
        let f = n as f64 + frac;
        let p = disk(1.0, (2.0 * f).sqrt());
        let got = integer_part_of_flux(&p).unwrap();
        prop_assert_eq!(got, f.floor() as usize);
    }

    #[test]
    fn tail_profile_bounds(r_cut in 0.2f64..5.0, kr in 1e-8f64..0.5, t in 0.0f64..50.0) {
        let kappa = kr / r_cut;
        let v = tail_function(r_cut, kappa, t * r_cut).unwrap();
        prop_assert!(v > 0.0 && v <= 1.0);
        if t <= 1.0 {
            prop_assert_eq!(v, 1.0);
        }
        let norm = tail_kinetic_norm(r_cut, kappa).unwrap();
        prop_assert!(norm > 0.0 && norm < 2.0 * PI / (1.0 / kr).ln() + 2.0);
    }

    #[test]
    fn form_mu_signs(g in 0.0f64..10.0) {
        prop_assert_eq!(form_mu(g, Spin::Minus), -form_mu(g, Spin::Plus));
        prop_assert!(form_mu(g, Spin::Plus) * (g - 2.0) >= 0.0);
    }

    #[test]
    fn predicted_u_is_quadratic(l in 0.01f64..1.0, g in 2.1f64..8.0, a2 in 0.01f64..5.0) {
        let u = predicted_u(l, g, a2);
        prop_assert!(u < 0.0);
        prop_assert!((predicted_u(2.0 * l, g, a2) - 4.0 * u).abs() < 1e-12 * u.abs());
    }

    #[test]
    fn ac_modes_decay_like_power(b in 0.5f64..2.0, j in 0u32..3) {
        // outside the disk |χ_j| = r^{j - F} times a constant
        let p = disk(b, 1.5);
        let f = flux(&p).unwrap().f;
        let pts = [[4.0, 0.0], [0.0, 8.0]];
        let v = ac_function(&p, j, &pts).unwrap();
        let slope = (v[1].norm() / v[0].norm()).ln() / 2f64.ln();
        prop_assert!((slope - (j as f64 - f)).abs() < 1e-8);
    }

    #[test]
    fn log_selfterm_scales(a in 1e-6f64..10.0, c in 1.1f64..10.0) {
        let d = log_selfterm(c * a).unwrap() - log_selfterm(a).unwrap();
        prop_assert!((d - 0.5 * c.ln()).abs() < 1e-12);
    }

    #[test]
    fn gauss_legendre_is_exact(n in 1usize..12, coeffs in proptest::collection::vec(-2.0f64..2.0, 1..24)) {
        let (x, w) = gauss_legendre(n);
        let deg = (2 * n - 1).min(coeffs.len() - 1);
        let poly = |t: f64| coeffs[..=deg].iter().rev().fold(0.0, |acc, c| acc * t + c);
        let exact: f64 = (0..=deg).filter(|k| k % 2 == 0).map(|k| 2.0 * coeffs[k] / (k as f64 + 1.0)).sum();
        let got: f64 = x.iter().zip(&w).map(|(t, wt)| wt * poly(*t)).sum();
        prop_assert!((got - exact).abs() < 1e-12 * (1.0 + exact.abs()));
    }

    #[test]
    fn attractive_kernel_is_symmetric(depth in 0.1f64..5.0, width in 0.3f64..2.0, kappa in 0.05f64..3.0) {
        let q = QuadratureGrid::centered_square(2.0, 0.4).unwrap();
        let k = bs_kernel(&|x| -depth * (-(x[0] * x[0] + x[1] * x[1]) / (width * width)).exp(), kappa, &q).unwrap();
        prop_assert!((&k - k.transpose()).amax() < 1e-14 * k.amax());
        prop_assert!(k.diagonal().iter().all(|&d| d < 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn plaquettes_carry_the_flux(b in 0.2f64..3.0, lambda in 0.1f64..2.0) {
        let p = disk(b, 1.0);
        let op = assemble_pauli(&p, 2.0, lambda, Spin::Minus, &PlanarGridParams::uniform(0.125, 2.5)).unwrap();
        let inside = |c: [f64; 4]| c.iter().all(|v| v.abs() < 0.6);
        prop_assert!(plaquette_defect(&op, &p, lambda, &inside) < 1e-10);
    }

    #[test]
    fn gauge_transform_keeps_plaquettes(a in -3.0f64..3.0, w in 0.2f64..2.0) {
        let p = disk(1.0, 1.0);
        let op = assemble_pauli(&p, 2.5, 1.0, Spin::Plus, &PlanarGridParams::uniform(0.25, 2.5)).unwrap();
        let t = op.gauge_transformed(&|x| a * (w * x[0]).sin() * x[1]).unwrap();
        let (nx, ny) = (op.grid.nx(), op.grid.ny());
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                prop_assert!((op.plaquette(i, j) - t.plaquette(i, j)).norm() < 1e-12);
            }
        }
        let psi: Vec<C64> = op.sample(&|x| C64::new((-(x[0] * x[0] + x[1] * x[1])).exp(), 0.0));
        let phase: Vec<C64> = op.grid.points().iter().zip(&psi).map(|(x, v)| v * C64::from_polar(1.0, a * (w * x[0]).sin() * x[1])).collect();
        let e0 = op.matrix.quadratic_form(&psi);
        let e1 = t.matrix.quadratic_form(&phase);
        prop_assert!((e0 - e1).abs() < 1e-10 * e0.abs().max(1.0));
    }
}
