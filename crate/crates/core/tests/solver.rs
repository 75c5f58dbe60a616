use antenna_extrap::harness::experiment::draw_truth;
use antenna_extrap::metrics::{total_error, DensePattern, Lattice};
use antenna_extrap::sampling::{generate_samples, SamplingSpec};
use antenna_extrap::seed::derive_seed;
use antenna_extrap::solver::*;
use antenna_extrap::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn random_system(seed: u64, k: usize, n: usize) -> (DMatrix<Complex64>, DVector<Complex64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = DMatrix::from_fn(k, n, |_, _| gaussian(&mut rng));
    let p = DVector::from_fn(k, |_, _| gaussian(&mut rng));
    (m, p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn unit_norm_fit_satisfies_kkt(seed in any::<u64>(), k in 1usize..30, n in 1usize..8) {
        let (m, p) = random_system(seed, k, n);
        let fit = solve_excitation(&m, &p, ExcitationConstraint::UnitNorm).unwrap();
        let a = DVector::from_column_slice(fit.excitation.values());
        prop_assert!((a.norm() - 1.0).abs() <= 1e-9);
        let lambda = fit.multiplier.unwrap();
        let grad = m.adjoint() * (&m * &a - &p) + a.map(|z| z * lambda);
        let scale = m.norm() * (m.norm() + p.norm());
        prop_assert!(grad.norm() <= 1e-8 * scale, "stationarity {}", grad.norm() / scale);
        // No random unit vector beats it.
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        for _ in 0..200 {
            let mut v = DVector::from_fn(n, |_, _| gaussian(&mut rng));
            v /= Complex64::new(v.norm(), 0.0);
            prop_assert!(fit.residual <= (&m * v - &p).norm() + 1e-10);
        }
    }

    #[test]
    fn unconstrained_fit_scales_with_data(seed in any::<u64>(), s in 0.1..10.0f64) {
        let (m, p) = random_system(seed, 12, 4);
        let a = solve_excitation(&m, &p, ExcitationConstraint::Unconstrained).unwrap();
        let b = solve_excitation(&m, &(&p * Complex64::new(s, 0.0)), ExcitationConstraint::Unconstrained).unwrap();
        prop_assert!((b.residual - s * a.residual).abs() <= 1e-9 * (1.0 + s * a.residual));
        for (x, y) in a.excitation.values().iter().zip(b.excitation.values()) {
            prop_assert!((y - x * s).norm() <= 1e-9 * (1.0 + s * x.norm()));
        }
    }
}

fn observed_rect(seed: u64, count: usize) -> (DesignSpaceModel, ConfigurationPoint, Excitation, SampledPattern) {
    let model = DesignSpaceModel::rect_array(3, 3).unwrap();
    let (c, e) = draw_truth(&model, derive_seed(seed, 0)).unwrap();
    let dirs = generate_samples(&SamplingSpec::RandomSphere { count }, derive_seed(seed, 1)).unwrap();
    let pts: Vec<SamplePoint> = dirs.into_iter().map(SamplePoint::Far).collect();
    let field = model.evaluate(&c, &e, &pts).unwrap();
    let obs = SampledPattern::from_field(pts, &field, MeasurementKind::ComplexField).unwrap();
    (model, c, e, obs)
}

#[test]
fn history_never_increases() {
    for seed in 0..4 {
        let (model, _, _, obs) = observed_rect(seed, 60);
        let r = extrapolate(&model, &obs, &[], &SolverParams::default(), seed).unwrap();
        assert!(r.residual_history.windows(2).all(|w| w[1] <= w[0]), "{:?}", r.residual_history);
        assert!(!r.undersampled);
    }
}

#[test]
fn zero_iterations_returns_start_fit() {
    let (model, _, _, obs) = observed_rect(3, 40);
    let params = SolverParams {
        max_iterations: 0,
        ..SolverParams::default()
    };
    let r = extrapolate(&model, &obs, &[], &params, 1).unwrap();
    assert_eq!(r.iterations(), 0);
    assert_eq!(r.residual_history.len(), 1);
    assert_eq!(r.start_residuals.len(), params.restarts);
    let best = r.start_residuals.iter().cloned().fold(f64::INFINITY, f64::min);
    assert_eq!(r.residual(), best);
}

#[test]
fn same_seed_same_result() {
    let (model, _, _, obs) = observed_rect(9, 50);
    let q = Lattice::regular(20.0).unwrap().points();
    let a = extrapolate(&model, &obs, &q, &SolverParams::default(), 4).unwrap();
    let b = extrapolate(&model, &obs, &q, &SolverParams::default(), 4).unwrap();
    assert_eq!(a, b);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let c = one.install(|| extrapolate(&model, &obs, &q, &SolverParams::default(), 4).unwrap());
    assert_eq!(a, c);
}

#[test]
fn undersampling_is_flagged() {
    let (model, _, _, obs) = observed_rect(2, 10);
    let params = SolverParams {
        max_iterations: 1,
        restarts: 1,
        ..SolverParams::default()
    };
    assert!(extrapolate(&model, &obs, &[], &params, 0).unwrap().undersampled);
}

#[test]
fn exact_recovery_smoke_test() {
    // Self-consistency: truths generated by the model being fitted.
    let lattice = Lattice::regular(4.0).unwrap();
    let params = SolverParams {
        max_iterations: 40,
        ..SolverParams::default()
    };
    let mut good = 0;
    for trial in 0..20 {
        let (model, c, e, obs) = observed_rect(1000 + trial, 200);
        let r = extrapolate(&model, &obs, &lattice.points(), &params, trial).unwrap();
        let truth = DensePattern::from_model(&model, &c, &e, &lattice, MeasurementKind::ComplexField).unwrap();
        let pred = DensePattern::new(lattice.clone(), r.predicted.clone(), MeasurementKind::ComplexField).unwrap();
        let rms = (truth.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / truth.values.len() as f64).sqrt();
        let rel = total_error(&pred, &truth).unwrap() / rms;
        if r.residual() <= 1e-3 * obs.norm() && rel <= 1e-2 {
            good += 1;
        }
    }
    assert!(good >= 16, "{good} of 20 trials recovered the truth");
}

#[test]
fn magnitude_fits_descend_and_match_in_value_space() {
    for kind in [MeasurementKind::MagnitudeLinear, MeasurementKind::MagnitudeDb] {
        let model = DesignSpaceModel::eplane_horn();
        let (c, e) = draw_truth(&model, 5).unwrap();
        let dirs = generate_samples(&SamplingSpec::RandomSphere { count: 40 }, 6).unwrap();
        let pts: Vec<SamplePoint> = dirs.into_iter().map(SamplePoint::Far).collect();
        let field = model.evaluate(&c, &e, &pts).unwrap();
        let obs = SampledPattern::from_field(pts.clone(), &field, kind).unwrap();
        let r = extrapolate(&model, &obs, &pts, &SolverParams::default(), 7).unwrap();
        assert!(r.residual_history.windows(2).all(|w| w[1] <= w[0]));
        let misfit: f64 = r.predicted.iter().zip(&obs.values).map(|(p, o)| (p - o).norm_sqr()).sum::<f64>().sqrt();
        assert!((misfit - r.residual()).abs() <= 1e-9 * (1.0 + misfit), "{misfit} vs {}", r.residual());
        assert!(r.predicted.iter().all(|v| v.im == 0.0));
    }
}

#[test]
fn rejects_empty_patterns_and_bad_params() {
    let model = DesignSpaceModel::rect_array(2, 2).unwrap();
    assert!(SampledPattern::new(vec![], vec![], MeasurementKind::ComplexField).is_err());
    let (_, _, _, obs) = observed_rect(0, 20);
    let bad = SolverParams {
        decay: 1.5,
        ..SolverParams::default()
    };
    assert!(extrapolate(&model, &obs, &[], &bad, 0).is_err());
}
