use riccati_heat::burgers::{
    cole_hopf, solve_burgers_ivp, BatemanKind, BatemanWave, BurgersOptions, BurgersProblem,
};
use riccati_heat::coefficients::{expand_profile, CoefficientProfile, CoefficientSet, ProfileKind};
use riccati_heat::grid::uniform;
use riccati_heat::kernel::{solve_ivp, HeatKernel, InitialData};
use riccati_heat::quad::QuadOptions;

fn profile(kind: ProfileKind) -> CoefficientSet {
    expand_profile(&CoefficientProfile::with_defaults(kind, 1.0)).unwrap()
}

#[test]
fn zero_data_stays_zero() {
    let prob = BurgersProblem::viscous(1.0, InitialData::constant(0.0), 1.0).unwrap();
    let xs = uniform(-3.0, 3.0, 31);
    for t in [0.1, 0.5, 1.0] {
        let v = solve_burgers_ivp(&prob, &xs, t, &BurgersOptions::default()).unwrap();
        assert!(v.max_abs() <= 1e-10, "t = {t}: {:e}", v.max_abs());
    }
}

#[test]
fn cole_hopf_consistency() {
    // v0 = x / (1 + x^2) integrates to W = ln(1 + x^2) / 2, so u0 = (1 + x^2)^(-1/4)
    let v0 = InitialData::function(|x| x / (1.0 + x * x));
    let u0 = InitialData::function(|x| (1.0 + x * x).powf(-0.25));
    let xs = uniform(-2.0, 2.0, 801);
    let h = xs[1] - xs[0];
    let opts = BurgersOptions { stencil_step: Some(h), ..Default::default() };
    for kind in [ProfileKind::ConstantHeat, ProfileKind::FokkerPlanck, ProfileKind::OuDrift] {
        let c = profile(kind);
        let prob = BurgersProblem::general(c.clone(), v0.clone());
        let v = solve_burgers_ivp(&prob, &xs, 0.5, &opts).unwrap();
        let u = solve_ivp(&HeatKernel::new(&c, opts.tol).unwrap(), &u0, &xs, 0.5, &opts.quad).unwrap();
        let w = cole_hopf(&u.field).unwrap();
        let mut worst = 0.0_f64;
        for i in 2..xs.len() - 2 {
            worst = worst.max((v.values[0][i] - w.values[0][i]).abs());
        }
        assert!(worst <= 1e-8, "{kind}: {worst:e}");
    }
}

#[test]
fn kink_travels_at_minus_v() {
    let speed = 0.3;
    let wave = BatemanWave::new(1.0, speed, 0.5, 0.0, BatemanKind::Kink).unwrap();
    let prob = BurgersProblem::viscous(0.5, wave.initial_data(), 1.0).unwrap();
    let dx = 0.02;
    let xs = uniform(-3.0, 3.0, 301);
    let v1 = solve_burgers_ivp(&prob, &xs, 1.0, &BurgersOptions::default()).unwrap();
    // best integer shift s with v(x, 1) ~ v(x + s dx, 0)
    let mut best = (f64::INFINITY, 0i64);
    for s in -40i64..=40 {
        let err: f64 = xs
            .iter()
            .zip(v1.last_row())
            .map(|(x, v)| (v - wave.eval(x + s as f64 * dx, 0.0).unwrap()).powi(2))
            .sum();
        if err < best.0 {
            best = (err, s);
        }
    }
    assert!((best.1 as f64 * dx - speed).abs() <= dx / 2.0, "shift {}", best.1 as f64 * dx);
}

#[test]
fn kink_limits_and_narrowing_transition() {
    let (amp, speed) = (1.0, 0.25);
    let w = BatemanWave::new(amp, speed, 0.1, 0.0, BatemanKind::Kink).unwrap();
    assert!((w.eval(-10.0, 0.0).unwrap() - (amp - speed)).abs() < 1e-12);
    assert!((w.eval(10.0, 0.0).unwrap() + amp + speed).abs() < 1e-12);
    // the gap to the limiting values at c -+ 0.1 shrinks as the viscosity decreases
    let gap = |a: f64| {
        let w = BatemanWave::new(amp, speed, a, 0.0, BatemanKind::Kink).unwrap();
        let left = (w.eval(-0.1, 0.0).unwrap() - (amp - speed)).abs();
        let right = (w.eval(0.1, 0.0).unwrap() + amp + speed).abs();
        left.max(right)
    };
    assert!(gap(0.05) < gap(0.1));
}

#[test]
fn cfl_and_pole_errors_surface() {
    let tan = BatemanWave::new(1.0, 0.0, 1.0, 0.0, BatemanKind::Tan).unwrap();
    // 2a * pi/2 / A is a pole of the tan family
    assert!(tan.eval(std::f64::consts::PI, 0.0).is_err());
    let opts = BurgersOptions { quad: QuadOptions::default(), ..Default::default() };
    let prob = BurgersProblem::viscous(1.0, InitialData::constant(0.0), 1.0).unwrap();
    assert!(solve_burgers_ivp(&prob, &[0.0], 2.0, &opts).is_err());
}
