//! Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kpb_core::grid::dispersion;
use kpb_core::illposed::{
    chi_bound_check, critical_time, interaction_profiles, phi_n_on_grid, resonance_chi, second_iterate_hat,
    InteractionProfile, ScalingStudy,
};
use kpb_core::initial::gaussian;
use kpb_core::norms::{bourgain_norm, equivalence_gap, spacetime_norm};
use kpb_core::random::{random_field, random_trajectory, RandomFieldSpec};
use kpb_core::report::{ratio_csv, scaling_csv};
use kpb_core::semigroup::{apply_u, apply_w};
use kpb_core::solver::{l2_history, picard_step, solve_etd, solve_picard, Trajectory};
use kpb_core::verify::{bilinear_suite, free_suite, smoothing_suite, RatioReport, Resolution};
use kpb_core::{make_grid, SpectralField};

const N_LIST: [f64; 4] = [16.0, 32.0, 64.0, 128.0];
const EPS0: f64 = 0.01;
const CELLS: usize = 128;

const SLOPE_ILLPOSED_MIN: f64 = 0.14;
const SLOPE_WELLPOSED_MAX: f64 = -0.15;
const PHI_NORM_SPREAD: f64 = 1.5;
const RESONANCE_REL_TOL: f64 = 1e-10;
const CHI_RATIO_MAX: f64 = 100.0;
const CHI_RATIO_SPREAD: f64 = 2.0;
const ORACLE_REL_TOL: f64 = 0.05;
const ORACLE_MIN_POINTS: usize = 20;
const DISSIPATION_SLACK: f64 = 1e-8;
const UNITARITY_TOL: f64 = 1e-12;
const CROSS_REL_TOL: f64 = 1e-6;
const CROSS_ORDER_MIN: f64 = 1.8;
const EQUIVALENCE_RANGE: (f64, f64) = (1.0 / 3.0, 3.0);
const B_ZERO_TOL: f64 = 1e-12;
const STABILITY_RANGE: (f64, f64) = (0.5, 2.0);

fn profiles() -> &'static [InteractionProfile] {
    static P: OnceLock<Vec<InteractionProfile>> = OnceLock::new();
    P.get_or_init(|| interaction_profiles(&N_LIST, EPS0, CELLS).expect("profiles"))
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    let min = values.iter().cloned().fold(f64::MAX, f64::min);
    max / min
}

fn c1_illposed_slope() -> Outcome {
    let study = ScalingStudy::from_profiles(profiles(), -0.7).unwrap();
    outcome(
        study.slope >= SLOPE_ILLPOSED_MIN,
        format!("s=-0.7 slope {:.5} (need >= {SLOPE_ILLPOSED_MIN})", study.slope),
    )
}

fn c2_wellposed_slope() -> Outcome {
    let study = ScalingStudy::from_profiles(profiles(), -0.3).unwrap();
    outcome(
        study.slope <= SLOPE_WELLPOSED_MAX,
        format!("s=-0.3 slope {:.5} (need <= {SLOPE_WELLPOSED_MAX})", study.slope),
    )
}

fn c3_phi_normalization() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for s in [-0.7, -0.3] {
        let study = ScalingStudy::from_profiles(profiles(), s).unwrap();
        let norms: Vec<f64> = study.rows.iter().map(|r| r.norm_phi).collect();
        let r = spread(&norms);
        pass &= r <= PHI_NORM_SPREAD;
        parts.push(format!("s={s} spread {r:.4}"));
    }
    outcome(pass, format!("{} (need <= {PHI_NORM_SPREAD})", parts.join(", ")))
}

fn c4_resonance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let mag = 10f64.powf(rng.random_range(-1.0..2.5));
        let xi = rng.random_range(-1.0..1.0) * mag;
        let xi1 = rng.random_range(-1.0..1.0) * mag;
        let eta = rng.random_range(-1.0..1.0) * mag * mag;
        let eta1 = rng.random_range(-1.0..1.0) * mag * mag;
        if xi.abs() < 1e-3 * mag || xi1.abs() < 1e-3 * mag || (xi - xi1).abs() < 1e-3 * mag {
            continue;
        }
        let chi = resonance_chi(xi, xi1, eta, eta1).unwrap();
        let defect = dispersion(xi, eta) - dispersion(xi1, eta1) - dispersion(xi - xi1, eta - eta1);
        worst = worst.max((chi - defect).abs() / chi.abs());
    }
    let ratios: Vec<f64> = [16.0, 64.0, 256.0]
        .iter()
        .map(|&n| chi_bound_check(n, 10_000, 7).unwrap())
        .collect();
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    let r = spread(&ratios);
    outcome(
        worst <= RESONANCE_REL_TOL && max <= CHI_RATIO_MAX && r <= CHI_RATIO_SPREAD,
        format!("identity rel err {worst:.2e}; max|chi|/N^3 {ratios:.3?} spread {r:.3}"),
    )
}

fn c5_oracle() -> Outcome {
    let n = 16.0;
    let s = -0.7;
    let t = critical_time(n, EPS0);
    let steps = 128;
    let grid = make_grid(288, 1152, 2.0 * PI, PI / 4.0).unwrap();
    let phi = phi_n_on_grid(n, s, &grid).unwrap();
    let dt = t / steps as f64;
    let first = Trajectory::from_fn(0.0, dt, steps, |tt| apply_w(&phi, tt)).unwrap();
    let second = picard_step(&first, &phi).unwrap();
    let (hx, hy) = grid.cell();
    let (dxi, deta) = grid.spacing();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for &xi0 in &[33.0, 36.25, 39.5, 42.75, 46.0] {
        for &eta0 in &[-1000.0, -650.0, -300.0, 50.0, 400.0, 750.0] {
            let kx = (xi0 / dxi).round() as i64;
            let ky = (eta0 / deta).round() as i64;
            let (xi, eta) = (kx as f64 * dxi, ky as f64 * deta);
            let i = grid.index_of(kx, ky).unwrap();
            let discrete = (second.last().coeffs()[i] - first.last().coeffs()[i]) * (2.0 * hx * hy);
            let continuum = second_iterate_hat(n, s, t, xi, eta, 256).unwrap();
            worst = worst.max((discrete - continuum).norm() / continuum.norm());
            count += 1;
        }
    }
    outcome(
        count >= ORACLE_MIN_POINTS && worst <= ORACLE_REL_TOL,
        format!("{count} points, worst rel err {worst:.4} (need <= {ORACLE_REL_TOL})"),
    )
}

fn non_increasing(traj: &Trajectory) -> bool {
    l2_history(traj).windows(2).all(|w| w[1] <= w[0] * (1.0 + DISSIPATION_SLACK))
}

fn c6_dissipation() -> Outcome {
    let g = make_grid(32, 32, PI, PI).unwrap();
    let mut data: Vec<SpectralField> = [0.5, 2.0, 8.0].iter().map(|&a| gaussian(&g, a, 0.8, 0.8).unwrap()).collect();
    for seed in 0..3 {
        data.push(random_field(&g, &RandomFieldSpec::new(8), seed).unwrap().0);
    }
    let mut trajectories = 0;
    let mut ok = true;
    for phi in &data {
        let (p, _) = solve_picard(phi, 0.1, 64, 1e-12, 200).unwrap();
        let e = solve_etd(phi, 1.0, 256).unwrap();
        ok &= non_increasing(&p) && non_increasing(&e);
        trajectories += 2;
    }
    let mut worst: f64 = 0.0;
    for phi in &data {
        for t in [-3.0, -0.1, 0.37, 5.0, 100.0] {
            let u = apply_u(phi, t).unwrap();
            worst = worst.max((u.l2_norm() - phi.l2_norm()).abs() / phi.l2_norm());
        }
    }
    outcome(
        ok && worst <= UNITARITY_TOL,
        format!("{trajectories} trajectories monotone: {ok}; unitarity rel err {worst:.2e}"),
    )
}

fn c7_cross_validation() -> Outcome {
    let g = make_grid(32, 32, PI, PI).unwrap();
    let phi = gaussian(&g, 0.5, 0.8, 0.8).unwrap();
    let mut diffs = Vec::new();
    for m in [32, 64, 128, 256] {
        let (p, rep) = solve_picard(&phi, 0.1, m, 1e-14, 100).unwrap();
        assert!(rep.converged);
        let e = solve_etd(&phi, 0.1, m).unwrap();
        diffs.push((p.last() - e.last()).l2_norm() / e.last().l2_norm());
    }
    let orders: Vec<f64> = diffs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let min_order = orders.iter().cloned().fold(f64::MAX, f64::min);
    let last = *diffs.last().unwrap();
    outcome(
        last <= CROSS_REL_TOL && min_order >= CROSS_ORDER_MIN,
        format!("rel diff at M=256 {last:.3e}; orders {orders:.3?}"),
    )
}

fn c8_norms() -> Outcome {
    let g = make_grid(16, 16, PI, PI).unwrap();
    let spec = RandomFieldSpec::new(4);
    let (lo, hi) = EQUIVALENCE_RANGE;
    let mut min: f64 = f64::MAX;
    let mut max: f64 = 0.0;
    let mut worst_b0: f64 = 0.0;
    for seed in 0..20u64 {
        let detuned = random_trajectory(&g, &spec, 10.0, -2.0, 4.0 / 256.0, 256, seed).unwrap();
        let (phi, _) = random_field(&g, &spec, seed + 100).unwrap();
        let free = Trajectory::from_fn(-2.0, 4.0 / 256.0, 256, |t| apply_w(&phi, t)).unwrap();
        for traj in [&detuned, &free] {
            for b in [0.0, 0.25, 0.5] {
                for (s1, s2) in [(0.0, 0.0), (-0.5, 0.5)] {
                    let r = equivalence_gap(traj, b, s1, s2).unwrap();
                    min = min.min(r);
                    max = max.max(r);
                }
            }
            let x = bourgain_norm(traj, 0.0, -0.3, 0.2).unwrap();
            let y = spacetime_norm(traj, 0.0, -0.3, 0.2).unwrap();
            worst_b0 = worst_b0.max((x - y).abs() / y);
        }
    }
    outcome(
        min >= lo && max <= hi && worst_b0 <= B_ZERO_TOL,
        format!("equivalence ratio in [{min:.4}, {max:.4}]; b=0 rel diff {worst_b0:.2e}"),
    )
}

fn stable(base: &RatioReport, refined: &RatioReport) -> bool {
    let f = refined.max_ratio / base.max_ratio;
    f >= STABILITY_RANGE.0 && f <= STABILITY_RANGE.1 && base.violations == 0 && refined.violations == 0
}

fn c9_estimate_stability() -> Outcome {
    let mut pass = true;
    let mut worst_factor: f64 = 1.0;
    let mut violations = 0;
    let mut record = |a: &RatioReport, b: &RatioReport| {
        pass &= stable(a, b);
        let f = b.max_ratio / a.max_ratio;
        if (f.ln()).abs() > worst_factor.ln().abs() {
            worst_factor = f;
        }
        violations += a.violations + b.violations;
    };
    for b in [0.0, 0.25, 0.5] {
        let base = free_suite(100, 11, b, 0.0, 0.0, Resolution::Base).unwrap();
        let fine = free_suite(100, 11, b, 0.0, 0.0, Resolution::Refined).unwrap();
        record(&base, &fine);
    }
    for xi in [0.0, 1.0, 4.0, 16.0] {
        for delta in [0.1, 0.25, 0.5] {
            let base = smoothing_suite(50, 12, xi, delta, Resolution::Base).unwrap();
            let fine = smoothing_suite(50, 12, xi, delta, Resolution::Refined).unwrap();
            record(&base, &fine);
        }
    }
    let mut t_growth: f64 = 0.0;
    for s1 in [-0.4, -0.2, 0.0] {
        let base = bilinear_suite(50, 13, s1, 1.0, Resolution::Base).unwrap();
        let fine = bilinear_suite(50, 13, s1, 1.0, Resolution::Refined).unwrap();
        let half = bilinear_suite(50, 13, s1, 0.5, Resolution::Base).unwrap();
        record(&base, &fine);
        t_growth = t_growth.max(half.max_ratio / base.max_ratio);
    }
    let pass = pass && t_growth <= 2.0;
    outcome(
        pass,
        format!("worst refinement factor {worst_factor:.4}; violations {violations}; T/2 growth {t_growth:.4}"),
    )
}

fn c10_determinism() -> Outcome {
    let run = || {
        let a = free_suite(10, 99, 0.25, 0.0, 0.0, Resolution::Base).unwrap();
        let b = bilinear_suite(5, 99, -0.2, 1.0, Resolution::Base).unwrap();
        let c = smoothing_suite(5, 99, 4.0, 0.25, Resolution::Base).unwrap();
        let study = ScalingStudy::from_profiles(&interaction_profiles(&N_LIST, EPS0, 64).unwrap(), -0.7).unwrap();
        (ratio_csv([&a, &b, &c]), scaling_csv(&study))
    };
    let first = run();
    let second = run();
    outcome(first == second, format!("{} + {} bytes compared", first.0.len(), first.1.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("ill-posedness scaling", c1_illposed_slope),
        ("well-posed-side decay", c2_wellposed_slope),
        ("data normalization", c3_phi_normalization),
        ("resonance algebra", c4_resonance),
        ("oracle equivalence", c5_oracle),
        ("dissipation", c6_dissipation),
        ("solver cross-validation", c7_cross_validation),
        ("norm machinery", c8_norms),
        ("estimate stability", c9_estimate_stability),
        ("determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {verdict} {name}: {} [{:.1}s]",
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
