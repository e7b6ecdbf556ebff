use homsing::field::SphereField;
use homsing::families::{Solution, SolutionSpec};
use homsing::geometry::{basis_vectors, stereographic_forward, stereographic_inverse, SphericalPoint};
use homsing::jet::Jet;
use homsing::reduced_ode::{bar_c3, integrate_reduced, ReducedConstants, ReducedState};
use homsing::specfun::{elliptic_e, elliptic_k};
use nalgebra::Vector3;
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};

fn unit_vector() -> impl Strategy<Value = Vector3<f64>> {
    (-1.0f64..1.0, 0.0f64..2.0 * PI).prop_map(|(z, t)| {
        let s = (1.0 - z * z).sqrt();
        Vector3::new(s * t.cos(), s * t.sin(), z)
    })
}

fn catalog() -> impl Strategy<Value = SolutionSpec> {
    prop_oneof![
        (-3.0f64..0.95).prop_filter("nonzero", |s| s.abs() > 1e-3).prop_map(|sigma| SolutionSpec::Landau { sigma }),
        (-2.0f64..1.9, 0.0f64..1.0)
            .prop_map(|(tau, f)| SolutionSpec::NoSwirlOneSing { tau, sigma: (4.0 - tau) / 4.0 - 2.0 * f }),
        (2.0f64..6.0).prop_map(|tau| SolutionSpec::NoSwirlOneSing { tau, sigma: tau / 4.0 }),
        (0.2f64..3.0, 0.3f64..3.0).prop_map(|(alpha, a_abs)| SolutionSpec::PowerLiouville { alpha, a_abs }),
        (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| SolutionSpec::EulerNS { a, b }),
        Just(SolutionSpec::GlobalC3m4),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn stereographic_round_trip(x in unit_vector()) {
        prop_assume!(x.z < 1.0 - 1e-6);
        let z = stereographic_forward(&x).unwrap();
        let y = stereographic_inverse(z);
        prop_assert!((x - y).norm() < 1e-14 * (1.0 + z.norm_sqr()));
    }

    #[test]
    fn frame_is_orthonormal(theta in 1e-3f64..PI - 1e-3, phi in 0.0f64..2.0 * PI) {
        let (er, et, ep) = basis_vectors(theta, phi);
        for v in [er, et, ep] {
            prop_assert!((v.norm() - 1.0).abs() < 1e-14);
        }
        prop_assert!(er.dot(&et).abs() < 1e-14);
        prop_assert!(er.dot(&ep).abs() < 1e-14);
        prop_assert!(et.dot(&ep).abs() < 1e-14);
        prop_assert!((er.cross(&et) - ep).norm() < 1e-14);
    }

    #[test]
    fn spherical_round_trip(r in 0.1f64..10.0, theta in 1e-3f64..PI - 1e-3, phi in 0.0f64..2.0 * PI) {
        let p = SphericalPoint::new(r, theta, phi).unwrap();
        let q = SphericalPoint::from_cartesian(&p.to_cartesian()).unwrap();
        prop_assert!((q.r() - r).abs() < 1e-12 * r);
        prop_assert!((q.theta() - theta).abs() < 1e-12);
        prop_assert!((q.phi() - phi).abs() < 1e-12);
    }

    #[test]
    fn homogeneity(spec in catalog(), theta in 0.4f64..PI - 0.4, phi in 0.0f64..2.0 * PI, lambda in 0.05f64..20.0) {
        let sol = Solution::new(spec).unwrap();
        prop_assume!(sol.domain().contains(theta));
        let x = SphericalPoint::unit(theta, phi).unwrap().to_cartesian();
        let a = sol.sample_at(&x).unwrap();
        let b = sol.sample_at(&(x * lambda)).unwrap();
        for (u, v) in [(a.u_r, b.u_r), (a.u_theta, b.u_theta), (a.u_phi, b.u_phi)] {
            prop_assert!((lambda * v - u).abs() <= 1e-12 * (1.0 + u.abs()));
        }
        prop_assert!((lambda * lambda * b.p - a.p).abs() <= 1e-12 * (1.0 + a.p.abs()));
    }

    #[test]
    fn power_liouville_inversion(alpha in 0.2f64..4.0, a_abs in 0.2f64..5.0, theta in 0.2f64..PI - 0.2) {
        let s1 = Solution::new(SolutionSpec::PowerLiouville { alpha, a_abs }).unwrap();
        let s2 = Solution::new(SolutionSpec::PowerLiouville { alpha: -alpha, a_abs: 1.0 / a_abs }).unwrap();
        let (a, b) = (s1.sample(theta, 0.0).unwrap(), s2.sample(theta, 0.0).unwrap());
        prop_assert!((a.u_r - b.u_r).abs() < 1e-12 * (1.0 + a.u_r.abs()));
        prop_assert!((a.u_theta - b.u_theta).abs() < 1e-12 * (1.0 + a.u_theta.abs()));
    }

    #[test]
    fn jet_exp_ln_inverse(t in 0.1f64..5.0) {
        let x = Jet::variable(t);
        let y = x.ln().exp();
        for k in 0..4 {
            let expect = if k == 0 { t } else if k == 1 { 1.0 } else { 0.0 };
            prop_assert!((y.derivative(k) - expect).abs() < 1e-10 * (1.0 + t));
        }
    }

    #[test]
    fn jet_trig_identity(t in -3.0f64..3.0) {
        let x = Jet::variable(t);
        let one = x.sin() * x.sin() + x.cos() * x.cos();
        prop_assert!((one.value() - 1.0).abs() < 1e-14);
        for k in 1..5 {
            prop_assert!(one.derivative(k).abs() < 1e-10);
        }
    }

    #[test]
    fn elliptic_legendre_relation(m in 0.01f64..0.99) {
        let (k, e) = (elliptic_k(m).unwrap(), elliptic_e(m).unwrap());
        let (kc, ec) = (elliptic_k(1.0 - m).unwrap(), elliptic_e(1.0 - m).unwrap());
        prop_assert!((e * kc + ec * k - k * kc - FRAC_PI_2).abs() < 1e-10);
    }

    #[test]
    fn bar_c3_decreasing(c1 in -1.0f64..5.0, c2 in -1.0f64..5.0, d in 0.01f64..2.0) {
        prop_assert!(bar_c3(c1 + d, c2).unwrap() < bar_c3(c1, c2).unwrap());
        prop_assert!(bar_c3(c1, c2 + d).unwrap() < bar_c3(c1, c2).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn swirl_is_monotone(gamma in -1.0f64..1.0, up in -0.5f64..0.5, upp in -1.0f64..1.0) {
        prop_assume!(upp.abs() > 1e-3);
        let init = ReducedState { y: 0.0, u_theta: gamma, u_phi: up, u_phi_prime: upp, ..Default::default() };
        let Ok(traj) = integrate_reduced(init, ReducedConstants::from_c(0.0, 0.0, 0.0), (-0.9, 0.9)) else {
            return Ok(());
        };
        for s in traj.sample(-0.9, 0.9, 61) {
            prop_assert!(s.u_phi_prime * upp.signum() > -1e-12);
            prop_assert!(traj.invariant_defect(s.y).unwrap() < 1e-7);
        }
    }
}
