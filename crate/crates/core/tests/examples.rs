use std::f64::consts::{FRAC_PI_4, PI, TAU};

use entrain_core::bounds::{
    approximant_box_bound, averaged_input_bound, linearized_bound, lowpass_sweep,
    max_form_bound, periodic_bound_curve, weighted_quadrature, Approximant, BoundOptions,
    Linearized, MismatchSignal,
};
use entrain_core::linalg::{
    frequency_response, lu_solve, lyapunov_scaling, symmetric_eig, LtiSystem, Matrix,
};
use entrain_core::models::{
    certify, check_contraction, check_invariance, gamma_ex33, max_gamma1_ex52,
    optimize_scaling_d, rfm2_equilibrium, CertifyOptions, DynSystem, LtiModel, PeriodicInput,
    QuadraticCascade, Rfm, ScalarForced, Transcriptional, TranscriptionalParams,
};
use entrain_core::norms::{measure_subadditivity_check, NormKind, NormSpec};
use entrain_core::sim::{
    integrate, lti_periodic_orbit, orbit_distance_curve, periodic_orbit, OrbitOptions,
    PeriodicOrbit,
};
use entrain_core::Error;
use num_complex::Complex64;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn reference_rfm2() -> Rfm {
    Rfm::new(vec![0.5, 4.0], PeriodicInput::sinusoid(4.0, 1.0, 2.0).unwrap()).unwrap()
}

fn transmod_params() -> TranscriptionalParams {
    TranscriptionalParams {
        delta: 1.0,
        k1: 1.0,
        k2: 5.0,
        e_total: 2.0,
    }
}

fn m(rows: &[&[f64]]) -> Matrix {
    Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

/// Linearization of the two-site RFM at its equilibrium, input on the first site.
fn rfm2_linear() -> LtiSystem {
    let sys = reference_rfm2();
    sys.linearization().unwrap().lti
}

#[test]
fn vector_norms() {
    assert_eq!(NormSpec::l1().norm(&[1.0, -2.0]).unwrap(), 3.0);
    let d = NormSpec::diagonal(NormKind::L2, vec![2.0, 1.0]).unwrap();
    assert_eq!(d.norm(&[1.0, 0.0]).unwrap(), 2.0);
    let d = NormSpec::diagonal(NormKind::L1, vec![0.9161, 1.0]).unwrap();
    assert!(close(d.norm(&[1.0, 1.0]).unwrap(), 1.9161, 1e-15));
}

#[test]
fn matrix_measures() {
    let a = m(&[&[-2.0, 1.0], &[0.5, -3.0]]);
    assert!(close(NormSpec::l1().measure(&a).unwrap().value(), -1.5, 1e-15));
    let a = Matrix::from_diagonal(&[-1.0, -2.0]);
    assert!(close(NormSpec::l2().measure(&a).unwrap().value(), -1.0, 1e-12));
}

#[test]
fn transcriptional_measure_over_the_box() {
    let sys = Transcriptional::new(transmod_params(), PeriodicInput::cosine(1.0, 1.0, 1.0).unwrap())
        .unwrap();
    let norm = NormSpec::diagonal(NormKind::L1, vec![0.9161, 1.0]).unwrap();
    for x in sys.state_box().grid(9) {
        let mu = norm.measure(&sys.jacobian(0.0, &x)).unwrap().value();
        assert!(mu <= -0.0839 + 1e-4, "mu = {mu} at {x:?}");
    }
}

#[test]
fn subadditivity_and_zero_homogeneity() {
    let i = Matrix::identity(2);
    let neg = i.scale(-1.0);
    assert!(measure_subadditivity_check(&NormSpec::l1(), &i, &neg).unwrap());
    let a = m(&[&[0.3, -1.0, 2.0], &[0.1, 0.0, -0.7], &[1.5, 0.2, -0.4]]);
    let b = m(&[&[-1.0, 0.4, 0.0], &[0.9, 2.0, -0.3], &[0.0, -0.6, 0.8]]);
    assert!(measure_subadditivity_check(&NormSpec::l2(), &a, &b).unwrap());
    assert_eq!(NormSpec::l1().measure(&a.scale(0.0)).unwrap().value(), 0.0);
}

#[test]
fn lu_examples() {
    let b = [3.0, -1.0];
    assert_eq!(lu_solve(&Matrix::identity(2), &b).unwrap(), b.to_vec());
    let x = lu_solve(&Matrix::from_diagonal(&[2.0, 4.0]), &[2.0, 4.0]).unwrap();
    assert_eq!(x, vec![1.0, 1.0]);
}

#[test]
fn complex_solve_for_the_two_site_response() {
    let lin = rfm2_linear();
    let n = 2;
    let mut shifted = Matrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let diag = if i == j { Complex64::new(0.0, PI) } else { Complex64::new(0.0, 0.0) };
            shifted[(i, j)] = diag - lin.a()[(i, j)];
        }
    }
    let b: Vec<Complex64> = lin.b().column(0).iter().map(|&v| v.into()).collect();
    assert!(close(b[0].re, 0.10102, 1e-5));
    let g = lu_solve(&shifted, &b).unwrap();
    assert!(close(g[0].norm(), 0.018589, 1e-6), "{}", g[0].norm());
    assert!(close(g[1].norm(), 0.0015341, 1e-7), "{}", g[1].norm());
}

#[test]
fn symmetric_eigen_examples() {
    let e = symmetric_eig(&Matrix::from_diagonal(&[3.0, 1.0])).unwrap();
    assert_eq!(e.values, vec![1.0, 3.0]);
    let e = symmetric_eig(&m(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
    assert!(close(e.values[0], -1.0, 1e-14) && close(e.values[1], 1.0, 1e-14));

    // 2x2 symmetric part of D A D^-1 against the quadratic formula
    let a = m(&[&[-1.3, 2.2], &[0.4, 0.7]]);
    let d = m(&[&[2.0, 0.5], &[0.0, 1.5]]);
    let spec = NormSpec::scaled(NormKind::L2, d).unwrap();
    let s = spec.similarity(&a).unwrap().symmetric_part();
    let (p, q, r) = (s[(0, 0)], s[(0, 1)], s[(1, 1)]);
    let mid = (p + r) / 2.0;
    let rad = (((p - r) / 2.0).powi(2) + q * q).sqrt();
    let e = symmetric_eig(&s).unwrap();
    assert!(close(e.values[0], mid - rad, 1e-9) && close(e.values[1], mid + rad, 1e-9));
}

#[test]
fn lyapunov_examples() {
    let s = lyapunov_scaling(&Matrix::from_diagonal(&[-1.0, -1.0])).unwrap();
    assert!(close(s.eta, 0.9, 1e-15));
    for i in 0..2 {
        assert!(close(s.q[(i, i)], 5.0, 1e-10));
        assert!(close(s.p[(i, i)], 5f64.sqrt(), 1e-10));
    }
    assert!(close(s.q[(0, 1)], 0.0, 1e-12));

    let s = lyapunov_scaling(&Matrix::from_diagonal(&[-1.0, -2.0])).unwrap();
    assert!(close(s.q[(0, 0)], 5.0, 1e-10));
    assert!(close(s.q[(1, 1)], 1.0 / 2.2, 1e-10));
    assert!(close(s.q[(0, 1)], 0.0, 1e-12));

    assert!(matches!(
        lyapunov_scaling(&Matrix::from_diagonal(&[-1.0, 0.5])),
        Err(Error::NotHurwitz { .. })
    ));
}

#[test]
fn frequency_response_examples() {
    let lag = |a: Matrix, b: Matrix| LtiSystem::new(a, b, None).unwrap();
    let g = frequency_response(&lag(Matrix::from_diagonal(&[-1.0]), Matrix::identity(1)), 0.0)
        .unwrap()
        .entries();
    assert!(close(g[0].re, 1.0, 1e-15) && close(g[0].im, 0.0, 1e-15));
    let g = frequency_response(&lag(Matrix::from_diagonal(&[-1.0]), Matrix::identity(1)), 1.0)
        .unwrap()
        .entries();
    assert!(close(g[0].norm(), 0.5f64.sqrt(), 1e-14));
    assert!(close(g[0].arg(), -FRAC_PI_4, 1e-14));

    let g = frequency_response(&rfm2_linear(), PI).unwrap().entries();
    assert!(close(g[0].norm(), 0.018589, 1e-6));
    assert!(close(g[1].norm(), 0.0015341, 1e-7));
}

#[test]
fn scalar_example() {
    let sys = ScalarForced::new(TAU).unwrap();
    assert!(close(sys.field_vec(0.0, &[1.0])[0], 0.0, 1e-15));
    for (t, x) in [(0.0, 0.0), (1.3, 1.7), (4.0, 0.2)] {
        assert_eq!(sys.jacobian(t, &[x])[(0, 0)], -1.0);
    }
    let cert = certify(&sys, &CertifyOptions::default()).unwrap();
    assert_eq!(cert.eta, 1.0);
    let sampled = check_contraction(&sys, &NormSpec::linf(), 16, 64).unwrap();
    assert_eq!(sampled.eta, 1.0);

    assert!(close(gamma_ex33(TAU, 0.0), 0.5, 1e-14));
    let big = 1e6;
    assert!(close(gamma_ex33(big, big / 4.0), 2.0, 1e-4));
}

#[test]
fn rfm_examples() {
    let steady = Rfm::new(vec![0.5, 4.0], PeriodicInput::constant(4.0, 1.0).unwrap()).unwrap();
    let j = steady.jacobian(0.0, &[0.0, 0.0]);
    assert_eq!(j.to_rows(), vec![vec![-4.5, 0.0], vec![0.5, -4.0]]);

    let cert = certify(&reference_rfm2(), &CertifyOptions::default()).unwrap();
    assert!(close(cert.eta, 3.0, 1e-12));

    let three = Rfm::new(vec![1.0, 2.0, 3.0], PeriodicInput::constant(1.0, 1.0).unwrap()).unwrap();
    assert_eq!(three.production_rate(&[1.0, 1.0, 1.0]), 3.0);

    let e = rfm2_equilibrium(4.0, 0.5, 4.0).unwrap();
    assert!(close(e[0], 0.8990, 5e-5) && close(e[1], 0.1010, 5e-5));
}

#[test]
fn transcriptional_examples() {
    let sys = Transcriptional::new(transmod_params(), PeriodicInput::cosine(1.0, 1.0, 1.0).unwrap())
        .unwrap();
    let j = sys.jacobian(0.3, &[0.7, 2.0]);
    assert!(close(j[(0, 0)], -1.0, 1e-15));

    let (d, eta) = optimize_scaling_d(&transmod_params()).unwrap();
    assert!(close(d, 0.9161, 1e-4) && close(eta, 0.0839, 1e-4));

    let weak = TranscriptionalParams {
        k2: 1e-9,
        ..transmod_params()
    };
    let (d, eta) = optimize_scaling_d(&weak).unwrap();
    assert!(d > 0.0 && d < 1e-3);
    assert!(close(eta, 1.0, 1e-3));
}

#[test]
fn ex52_peak() {
    let want = (1.0 + 5f64.sqrt()) / (4.0 * 5f64.sqrt());
    assert!(close(max_gamma1_ex52(1.0, 1.0), want, 1e-15));
    assert!(close(want, 0.36180, 1e-5));
}

#[test]
fn check_contraction_examples() {
    let c = check_contraction(&reference_rfm2(), &NormSpec::l1(), 16, 64).unwrap();
    assert!(close(c.eta, 3.0, 1e-6));

    let weak = Rfm::new(vec![0.5, 4.0], PeriodicInput::sinusoid(0.5, 1.0, 2.0).unwrap());
    match weak {
        Err(_) => {}
        Ok(sys) => assert!(check_contraction(&sys, &NormSpec::l1(), 16, 64).is_err()),
    }
    // A positive rate whose input dips to zero is refused, not certified.
    let dipping = Rfm::new(vec![0.5, 4.0], PeriodicInput::sinusoid(1.0, 1.0, 2.0).unwrap()).unwrap();
    assert!(certify(&dipping, &CertifyOptions::default()).is_err());
}

#[test]
fn invariance_examples() {
    assert!(check_invariance(&reference_rfm2(), 32).unwrap().holds);
    assert!(check_invariance(&ScalarForced::new(TAU).unwrap(), 32).unwrap().holds);
    let transmod =
        Transcriptional::new(transmod_params(), PeriodicInput::cosine(1.0, 1.0, 1.0).unwrap())
            .unwrap();
    assert!(check_invariance(&transmod, 32).unwrap().holds);
    // the upper x2 face: x2' = -k1 eT whatever x1
    let f = transmod.field_vec(0.0, &[0.4, 2.0]);
    assert!(close(f[1], -2.0, 1e-15));
}

fn decay() -> LtiModel {
    LtiModel::new(
        LtiSystem::new(Matrix::from_diagonal(&[-1.0]), Matrix::zeros(1, 1), None).unwrap(),
        PeriodicInput::constant(0.0, 1.0).unwrap(),
    )
    .unwrap()
}

#[test]
fn integrate_examples() {
    let traj = integrate(&decay(), &[1.0], 0.0, 1.0, 4096).unwrap();
    assert!(close(traj.final_state()[0], (-1.0f64).exp(), 1e-10));

    let t = TAU;
    let sys = ScalarForced::new(t).unwrap();
    let traj = integrate(&sys, &[0.5], 0.0, 20.0 * t, 4096).unwrap();
    assert!(close(traj.final_state()[0], gamma_ex33(t, 20.0 * t), 1e-6));
}

#[test]
fn periodic_orbit_examples() {
    let sys = ScalarForced::new(TAU).unwrap();
    let cert = certify(&sys, &CertifyOptions::default()).unwrap();
    let orbit = periodic_orbit(&sys, &cert, &[0.0], &OrbitOptions::default()).unwrap();
    assert!(orbit.closure_defect() <= 1e-9);
    for k in 0..orbit.grid_len() {
        assert!(close(orbit.sample(k)[0], gamma_ex33(TAU, orbit.time(k)), 1e-6));
    }

    let sys = decay();
    let cert = certify(&sys, &CertifyOptions::default()).unwrap();
    let orbit = periodic_orbit(&sys, &cert, &[0.5], &OrbitOptions::default()).unwrap();
    assert!(orbit.samples().iter().all(|x| x[0].abs() < 1e-9));
}

#[test]
fn lti_orbit_examples() {
    let e = vec![0.3, -0.2];
    let lti = LtiSystem::new(
        m(&[&[-1.0, 0.5], &[0.0, -2.0]]),
        m(&[&[1.0], &[1.0]]),
        Some(e.clone()),
    )
    .unwrap();
    let zero = PeriodicInput::constant(0.0, 3.0).unwrap();
    let orbit = lti_periodic_orbit(&lti, &zero, 64).unwrap();
    assert!(orbit.samples().iter().all(|x| x == &e));

    let lag = LtiSystem::new(Matrix::from_diagonal(&[-1.0]), Matrix::identity(1), None).unwrap();
    let u = PeriodicInput::cosine(0.0, 1.0, 1.0).unwrap();
    let orbit = lti_periodic_orbit(&lag, &u, 1024).unwrap();
    for k in 0..orbit.grid_len() {
        let t = orbit.time(k);
        let want = 0.5f64.sqrt() * (t - FRAC_PI_4).cos();
        assert!(close(orbit.sample(k)[0], want, 1e-13));
    }

    let lin = rfm2_linear();
    let dev = PeriodicInput::sinusoid(0.0, 1.0, 2.0).unwrap();
    let orbit = lti_periodic_orbit(&lin, &dev, 4096).unwrap();
    for (i, want) in [(0, 0.018589), (1, 0.0015341)] {
        let (lo, hi) = orbit.component_range(i);
        let e = lin.offset()[i];
        assert!(close(hi - e, want, 2e-6), "{i}: {}", hi - e);
        assert!(close(e - lo, want, 2e-6), "{i}: {}", e - lo);
    }
}

#[test]
fn orbit_distance_examples() {
    let sys = ScalarForced::new(TAU).unwrap();
    let cert = certify(&sys, &CertifyOptions::default()).unwrap();
    let gamma = periodic_orbit(&sys, &cert, &[1.0], &OrbitOptions::default()).unwrap();
    let same = orbit_distance_curve(&gamma, &gamma, &NormSpec::l1()).unwrap();
    assert!(same.iter().all(|&d| d == 0.0));

    let zero = PeriodicOrbit::new(TAU, vec![vec![0.0]; 256]).unwrap();
    let curve = orbit_distance_curve(&gamma, &zero, &NormSpec::l1()).unwrap();
    for (k, d) in curve.iter().enumerate() {
        assert!(close(*d, gamma_ex33(TAU, gamma.time(k)).abs(), 1e-6));
    }

    // the two-site orbit around its equilibrium stays below the constant bound
    let rfm = reference_rfm2();
    let cert = certify(&rfm, &CertifyOptions::default()).unwrap();
    let e = rfm2_equilibrium(4.0, 0.5, 4.0).unwrap();
    let r = averaged_input_bound(&rfm, &e, &cert, &BoundOptions::default()).unwrap();
    assert!(r.max_measured > 0.0 && r.max_measured < 0.033674);
}

#[test]
fn quadrature_examples() {
    assert_eq!(weighted_quadrature(&[0.0; 101], 0.1, 1.0).unwrap(), 0.0);
    let alpha = 40.0;
    let n = 4000;
    let v = weighted_quadrature(&vec![1.0; n + 1], alpha / n as f64, 1.0).unwrap();
    assert!(close(v, 1.0, 1e-12));
}

#[test]
fn zero_mismatch_gives_zero_bounds() {
    let zero = MismatchSignal::new(2.0, vec![0.0; 65]).unwrap();
    assert!(periodic_bound_curve(&zero, 1.5).unwrap().values.iter().all(|&v| v == 0.0));
    assert_eq!(max_form_bound(&zero, 1.5).unwrap(), 0.0);
}

#[test]
fn constant_bound_examples() {
    let opts = BoundOptions::default();
    let rfm = reference_rfm2();
    let cert = certify(&rfm, &CertifyOptions::default()).unwrap();
    let e = rfm2_equilibrium(4.0, 0.5, 4.0).unwrap();
    let r = averaged_input_bound(&rfm, &e, &cert, &opts).unwrap();
    assert!(close(r.constant_bound, 0.033674, 1e-5));

    let r = linearized_bound(&rfm, &cert, &opts).unwrap();
    assert!(r.valid);
    let boxed = r.box_bound.unwrap();
    assert!(boxed.exact);
    assert!(close(boxed.value, 0.0062058, 2e-6));
}

#[test]
fn averaging_a_constant_input_is_exact() {
    let (a, b) = (2.0, 3.0);
    let sys = LtiModel::new(
        LtiSystem::new(Matrix::from_diagonal(&[-a]), Matrix::identity(1), None).unwrap(),
        PeriodicInput::constant(b, 1.0).unwrap(),
    )
    .unwrap();
    let cert = certify(&sys, &CertifyOptions::default()).unwrap();
    let r = averaged_input_bound(&sys, &[b / a], &cert, &BoundOptions::default()).unwrap();
    assert_eq!(r.constant_bound, 0.0);
    assert!(r.max_measured <= 1e-9);
}

#[test]
fn averaged_lti_bound_uses_the_scaled_input_gain() {
    let lti = LtiSystem::new(
        m(&[&[-1.0, 0.4], &[-0.3, -2.0]]),
        m(&[&[1.0], &[0.5]]),
        Some(vec![0.2, -0.1]),
    )
    .unwrap();
    let sys = LtiModel::new(lti.clone(), PeriodicInput::cosine(0.3, 1.0, 2.0).unwrap()).unwrap();
    let cert = certify(&sys, &CertifyOptions::default()).unwrap();
    let z = sys.averaging_point().unwrap();
    let a_z: Vec<f64> = lti.a().mul_vec(&[z[0] - 0.2, z[1] + 0.1]);
    let b = lti.b().column(0);
    for i in 0..2 {
        assert!(close(a_z[i] + b[i] * 0.3, 0.0, 1e-14));
    }
    let r = averaged_input_bound(&sys, &z, &cert, &BoundOptions::default()).unwrap();
    let gain = cert.norm.norm(&b).unwrap();
    assert!(close(r.constant_bound, gain / cert.eta, 1e-12 * gain / cert.eta));
    assert!(r.valid);
}

#[test]
fn linear_model_has_zero_linearization_bound() {
    let lti = LtiSystem::new(m(&[&[-1.0, 0.4], &[-0.3, -2.0]]), m(&[&[1.0], &[0.5]]), None).unwrap();
    let sys = LtiModel::new(lti, PeriodicInput::cosine(0.3, 1.0, 2.0).unwrap()).unwrap();
    let cert = certify(&sys, &CertifyOptions::default()).unwrap();
    let r = linearized_bound(&sys, &cert, &BoundOptions::default()).unwrap();
    assert!(r.constant_bound <= 1e-12);
    assert!(r.max_measured <= 1e-8);
}

#[test]
fn box_program_examples() {
    let (a, omega) = (1.0, 3.0);
    let sys = QuadraticCascade::new(a, omega, 1e6).unwrap();
    let cert = certify(&sys, &CertifyOptions::default()).unwrap();
    let program = Linearized.build(&sys).unwrap().program.unwrap();
    let b = approximant_box_bound(&sys, &program, &cert).unwrap();
    let want = a * a / (cert.eta * (1.0 + omega * omega));
    assert!(close(b.value, want, 1e-9 * want), "{} vs {want}", b.value);
    assert!(!b.exact);

    let rfm = reference_rfm2();
    let cert = certify(&rfm, &CertifyOptions::default()).unwrap();
    let g = frequency_response(&rfm2_linear(), PI).unwrap().entries();
    let (g1, g2) = (g[0].norm(), g[1].norm());
    let program = Linearized.build(&rfm).unwrap().program.unwrap();
    let b = approximant_box_bound(&rfm, &program, &cert).unwrap();
    let want = (2.0 * 0.5 * g1 * g2 + g1) / cert.eta;
    assert!(close(b.value, want, 1e-9 * want));

    let mut zero = program.clone();
    zero.caps_z = vec![0.0, 0.0];
    zero.cap_w = 0.0;
    // only the equilibrium residual F(e, v_bar) remains
    assert!(approximant_box_bound(&rfm, &zero, &cert).unwrap().value < 1e-15);
}

#[test]
fn sweep_at_unit_frequency() {
    let factory = |omega: f64| -> entrain_core::Result<Box<dyn DynSystem>> {
        Ok(Box::new(QuadraticCascade::new(1.0, omega, 1e6)?))
    };
    let rows = lowpass_sweep(&factory, &[1.0], &Linearized, &BoundOptions::default());
    let row = &rows[0];
    assert!(row.error.is_none());
    assert!(close(row.measured_max, 0.36180, 1e-3), "{}", row.measured_max);
    assert!(close(row.bound_max, 0.5, 1e-5), "{}", row.bound_max);
}

#[test]
fn sweep_bound_decreases_with_frequency() {
    let factory = |omega: f64| -> entrain_core::Result<Box<dyn DynSystem>> {
        Ok(Box::new(QuadraticCascade::new(1.0, omega, 1e6)?))
    };
    let omegas = [0.5, 1.0, 2.0, 4.0, 8.0];
    let rows = lowpass_sweep(&factory, &omegas, &Linearized, &BoundOptions::default());
    for w in rows.windows(2) {
        assert!(w[1].bound_max <= w[0].bound_max);
    }
}
