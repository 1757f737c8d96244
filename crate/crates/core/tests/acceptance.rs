//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use heatlaser::compare::{compare_point, NumericsOptions, PointComparison};
use heatlaser::models::presets;
use heatlaser::photonstats::{
    coherent_flow, distribution_moments, elimination_oracle, scully_lamb_coefficients, LaserCoefficients,
};
use heatlaser::semiclassical::{find_thresholds, lasing_gain, temperature_lasing_condition};
use heatlaser::{BathSpec, EngineModel, Execution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn run(id: usize, title: &str, budget: Duration, f: fn() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let pass = out.pass && in_time;
    println!(
        "[{}] criterion {id:>2}: {title} ({}; {:.2?} of {:.0?} budget)",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed,
        budget,
    );
    pass
}

fn random_three(rng: &mut ChaCha8Rng) -> EngineModel {
    EngineModel::three_level(
        BathSpec::new(rng.gen_range(0.5..80.0), rng.gen_range(0.0..20.0)).unwrap(),
        BathSpec::new(rng.gen_range(0.5..80.0), rng.gen_range(0.0..3.0)).unwrap(),
        rng.gen_range(0.1..30.0),
        rng.gen_range(0.1..5.0),
    )
    .unwrap()
}

fn random_four(rng: &mut ChaCha8Rng) -> EngineModel {
    EngineModel::four_level(
        BathSpec::new(rng.gen_range(0.5..80.0), rng.gen_range(0.0..20.0)).unwrap(),
        BathSpec::new(rng.gen_range(0.5..80.0), rng.gen_range(0.0..3.0)).unwrap(),
        BathSpec::new(rng.gen_range(0.5..80.0), rng.gen_range(0.01..3.0)).unwrap(),
        rng.gen_range(0.1..30.0),
        rng.gen_range(0.1..5.0),
    )
    .unwrap()
}

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64)).collect()
}

const DISTRIBUTION_POINTS: [f64; 4] = [0.17, 0.507, 2.629, 9.0];

fn numerics() -> NumericsOptions {
    NumericsOptions { n_max: Some(40), ..Default::default() }
}

fn sweep() -> &'static [PointComparison] {
    static CELL: OnceLock<Vec<PointComparison>> = OnceLock::new();
    CELL.get_or_init(|| {
        let opts = numerics();
        Execution::Parallel.map(&log_space(0.2, 8.0, 20), |&nh| {
            compare_point(&presets::three_level_reference(nh), &opts).expect("sweep point solves")
        })
    })
}

fn distribution_points() -> &'static [PointComparison] {
    static CELL: OnceLock<Vec<PointComparison>> = OnceLock::new();
    CELL.get_or_init(|| {
        let opts = numerics();
        Execution::Parallel.map(&DISTRIBUTION_POINTS, |&nh| {
            compare_point(&presets::three_level_reference(nh), &opts).expect("distribution point solves")
        })
    })
}

fn four_level_points() -> &'static [PointComparison] {
    static CELL: OnceLock<Vec<PointComparison>> = OnceLock::new();
    CELL.get_or_init(|| {
        let opts = NumericsOptions { n_max: Some(60), ..Default::default() };
        Execution::Parallel.map(&[0.01, 0.1, 1.0, 10.0], |&nh| {
            compare_point(&presets::four_level_reference(nh), &opts).expect("four-level point solves")
        })
    })
}

fn c1_thresholds() -> Outcome {
    let roots = find_thresholds(&presets::three_level_reference(1.0), (1e-3, 50.0)).unwrap();
    let ok = roots.len() == 2 && (roots[0] - 0.187).abs() <= 0.005 && (roots[1] - 8.647).abs() <= 0.05;
    outcome(ok, format!("roots {roots:.5?}"))
}

fn c2_four_level_threshold() -> Outcome {
    let roots = find_thresholds(&presets::four_level_reference(1.0), (1e-4, 50.0)).unwrap();
    let ok = roots.len() == 1 && (roots[0] - 0.0141).abs() <= 0.0005;
    outcome(ok, format!("roots {roots:.6?}"))
}

fn c3_equal_gain() -> Outcome {
    let g: Vec<f64> = [0.507, 2.629]
        .iter()
        .map(|&nh| {
            let m = presets::three_level_reference(nh);
            lasing_gain(&m) / m.kappa()
        })
        .collect();
    let ok = g.iter().all(|v| (v - 2.0).abs() <= 0.02 * 2.0);
    outcome(ok, format!("G/kappa = {g:.5?}"))
}

fn c4_mean_photon_number() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for p in sweep() {
        let r = &p.record;
        if r.numeric_mean > 0.5 {
            checked += 1;
            worst = worst.max((r.analytic_mean - r.numeric_mean).abs() / r.numeric_mean);
        }
    }
    outcome(checked > 0 && worst < 0.05, format!("{checked} of 20 points with <n> > 0.5, worst relative gap {worst:.4}"))
}

fn c5_distributions() -> Outcome {
    let l1: Vec<f64> = distribution_points().iter().map(|p| p.record.l1).collect();
    outcome(l1.iter().all(|&d| d < 0.05), format!("L1 at n_h = {DISTRIBUTION_POINTS:?}: {l1:.4?}"))
}

fn c6_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0006);
    let mut worst: f64 = 0.0;
    for k in 0..400 {
        let m = if k < 200 { random_three(&mut rng) } else { random_four(&mut rng) };
        let n = rng.gen_range(1..80);
        let (p1, p2) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
        let c = scully_lamb_coefficients(&m);
        let closed = coherent_flow(&c, n, p1, p2);
        let scale = coherent_flow(&c, n, p1, 0.0) + coherent_flow(&c, n, 0.0, p2).abs();
        let solved = match elimination_oracle(&m, n, p1, p2) {
            Ok(v) => v,
            Err(e) => return outcome(false, format!("oracle failed: {e}")),
        };
        worst = worst.max((solved - closed).abs() / scale);
    }
    outcome(worst <= 1e-10, format!("200 + 200 pairs, worst relative error {worst:.2e}"))
}

fn c7_gain_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0007);
    let mut worst: f64 = 0.0;
    for k in 0..20_000 {
        let m = if k < 10_000 { random_three(&mut rng) } else { random_four(&mut rng) };
        let c = scully_lamb_coefficients(&m);
        let g = lasing_gain(&m);
        let scale = c.a + c.a_b;
        if scale > 0.0 {
            worst = worst.max((c.a - c.a_b - g).abs() / scale);
        }
    }
    outcome(worst <= 1e-10, format!("10^4 + 10^4 models, worst relative error {worst:.2e}"))
}

fn c8_super_poissonian() -> Outcome {
    let mut above = 0;
    let mut min_fano = f64::INFINITY;
    for nh in log_space(0.05, 20.0, 60) {
        let m = presets::three_level_reference(nh);
        if lasing_gain(&m) >= m.kappa() {
            above += 1;
            let f = distribution_moments(&scully_lamb_coefficients(&m)).unwrap().fano;
            min_fano = min_fano.min(f);
        }
    }
    let mut min_numeric = f64::INFINITY;
    for p in sweep().iter().filter(|p| p.record.gain_over_kappa >= 1.0) {
        min_numeric = min_numeric.min(p.record.numeric_variance / p.record.numeric_mean);
    }
    // 𝒜 grows at fixed 𝒜_b, κ and ℬ/𝒜
    let mut fanos = Vec::new();
    for k in 0..10 {
        let a = 2f64.powi(k + 2);
        let c = LaserCoefficients::new(a, 0.5, a * 1e-3, 1.0).unwrap();
        fanos.push(distribution_moments(&c).unwrap().fano);
    }
    let monotone = fanos.windows(2).all(|w| w[1] < w[0]) && fanos.iter().all(|&f| f > 1.0);
    let approaches = fanos.last().unwrap() - 1.0 < 1e-3;
    let ok = above > 0 && min_fano > 1.0 && min_numeric > 1.0 && monotone && approaches;
    outcome(
        ok,
        format!(
            "{above} above-threshold points, min analytic fano {min_fano:.4}, min numeric fano {min_numeric:.4}, sequence {:.5} -> {:.5}",
            fanos[0],
            fanos.last().unwrap()
        ),
    )
}

fn c9_state_sanity() -> Outcome {
    let mut states = 0;
    let (mut trace, mut herm, mut eig, mut off): (f64, f64, f64, f64) = (0.0, 0.0, f64::INFINITY, 0.0);
    for p in sweep().iter().chain(distribution_points()).chain(four_level_points()) {
        let rho = &p.steady.state;
        states += 1;
        trace = trace.max((rho.trace().re - 1.0).abs().max(rho.trace().im.abs()));
        herm = herm.max(rho.hermiticity_error());
        eig = eig.min(rho.min_eigenvalue());
        let cavity = heatlaser::solver::partial_trace_atom(rho, &p.space).unwrap();
        let m = cavity.matrix();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if i != j {
                    off = off.max(m[(i, j)].norm());
                }
            }
        }
    }
    let ok = trace < 1e-10 && herm < 1e-10 && eig >= -1e-8 && off < 1e-9;
    outcome(
        ok,
        format!("{states} states: trace err {trace:.1e}, hermiticity {herm:.1e}, min eigenvalue {eig:.1e}, cavity off-diagonal {off:.1e}"),
    )
}

fn c10_carnot() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0010);
    let mut lasing = [0usize; 2];
    let mut violations = 0;
    let mut draws = 0;
    while lasing.iter().any(|&c| c < 1000) && draws < 1_000_000 {
        draws += 1;
        let (wc, wl) = (rng.gen_range(0.1..5.0), rng.gen_range(0.1..5.0));
        let (tc, th) = (rng.gen_range(0.05..5.0), rng.gen_range(0.05..20.0));
        let four = lasing[1] < 1000 && (lasing[0] >= 1000 || draws % 2 == 0);
        let model = if four {
            let wa = rng.gen_range(0.1..5.0);
            EngineModel::four_level(
                BathSpec::thermal(1.0, wc + wl + wa, th).unwrap(),
                BathSpec::thermal(1.0, wc, tc).unwrap(),
                BathSpec::thermal(1.0, wa, tc).unwrap(),
                1.0,
                1.0,
            )
        } else {
            EngineModel::three_level(BathSpec::thermal(1.0, wc + wl, th).unwrap(), BathSpec::thermal(1.0, wc, tc).unwrap(), 1.0, 1.0)
        }
        .unwrap();
        let c = temperature_lasing_condition(&model).unwrap();
        if c.lases {
            lasing[four as usize] += 1;
            if c.efficiency > c.carnot + 1e-12 {
                violations += 1;
            }
        }
    }
    let ok = lasing.iter().all(|&c| c >= 1000) && violations == 0;
    outcome(ok, format!("{} three-level and {} four-level lasing samples, {violations} violations", lasing[0], lasing[1]))
}

fn main() {
    let s = Duration::from_secs;
    let results = [
        run(1, "three-level thresholds", s(1), c1_thresholds),
        run(2, "four-level threshold", s(1), c2_four_level_threshold),
        run(3, "equal-gain points", s(1), c3_equal_gain),
        run(4, "analytic vs numeric mean photon number", s(300), c4_mean_photon_number),
        run(5, "distribution agreement", s(120), c5_distributions),
        run(6, "elimination oracle equivalence", s(10), c6_oracle),
        run(7, "gain identity", s(60), c7_gain_identity),
        run(8, "super-Poissonian statistics", s(60), c8_super_poissonian),
        run(9, "steady-state sanity", s(120), c9_state_sanity),
        run(10, "Carnot bound", s(60), c10_carnot),
    ];
    let failed = results.iter().filter(|&&p| !p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
