//! Semi-classical laser theory: structure constants, populations, inversion,
//! gain, saturation, the field equation and threshold search.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::models::{EngineKind, EngineModel};
use crate::C64;

/// Decay rate Γ, population normalization Φ and saturation constant Ψ
/// (primed versions for the four-level engine).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StructureConstants {
    pub decay: f64,
    pub normalization: f64,
    pub saturation: f64,
}

pub fn structure_constants(model: &EngineModel) -> StructureConstants {
    let (nh, nc, na) = (model.n_h(), model.n_c(), model.n_a());
    let (gh, gc, ga) = (model.hot().gamma(), model.cold().gamma(), model.gamma_a());
    match model.kind() {
        EngineKind::ThreeLevel => StructureConstants {
            decay: gh * (nh + 1.0) + gc * (nc + 1.0),
            normalization: 3.0 * nh * nc + 2.0 * (nh + nc) + 1.0,
            saturation: (3.0 * nh + 1.0) / gc + (3.0 * nc + 1.0) / gh,
        },
        EngineKind::FourLevel => StructureConstants {
            decay: ga * na + gc * (nc + 1.0),
            normalization: (4.0 * nh * nc + 3.0 * nh + 2.0 * nc + 1.0) * na + nh * (nc + 1.0),
            saturation: (4.0 * na * nc + na + 3.0 * nc + 1.0) / gh
                + (4.0 * nh * na + 2.0 * nh + na) / gc
                + (4.0 * nh * nc + 2.0 * nh + 3.0 * nc + 1.0) / ga,
        },
    }
}

/// Numerator of the zero-field inversion, ΔN₀ · Φ.
pub fn inversion_numerator(model: &EngineModel) -> f64 {
    let (nh, nc, na) = (model.n_h(), model.n_c(), model.n_a());
    match model.kind() {
        EngineKind::ThreeLevel => nh - nc,
        EngineKind::FourLevel => (nh - nc) * na + (nc + 1.0) * nh,
    }
}

/// Level populations indexed g, e₁, e₂(, e₃).
#[derive(Clone, Debug, PartialEq)]
pub struct Populations(pub Vec<f64>);

impl Populations {
    pub fn ground(&self) -> f64 {
        self.0[0]
    }
    pub fn e1(&self) -> f64 {
        self.0[1]
    }
    pub fn e2(&self) -> f64 {
        self.0[2]
    }
    pub fn e3(&self) -> Option<f64> {
        self.0.get(3).copied()
    }
    pub fn inversion(&self) -> f64 {
        self.e2() - self.e1()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SemiclassicalState {
    pub field: C64,
    pub populations: Populations,
}

/// Classical rate matrix `R` with `dp/dt = R p`, including a stimulated
/// e₁↔e₂ exchange at rate `4g²|ℰ|²/Γ` in both directions.
pub fn rate_matrix(model: &EngineModel, intensity: f64) -> DMatrix<f64> {
    let d = model.kind().atom_dim();
    let mut r = DMatrix::zeros(d, d);
    let mut link = |from: usize, to: usize, rate: f64| {
        r[(to, from)] += rate;
        r[(from, from)] -= rate;
    };
    let hot_upper = d - 1;
    link(0, 1, model.cold().up_rate());
    link(1, 0, model.cold().down_rate());
    link(0, hot_upper, model.hot().up_rate());
    link(hot_upper, 0, model.hot().down_rate());
    if let Some(anc) = model.ancilla() {
        link(2, 3, anc.up_rate());
        link(3, 2, anc.down_rate());
    }
    let decay = structure_constants(model).decay;
    if intensity > 0.0 && decay > 0.0 {
        let w = 4.0 * model.g().powi(2) * intensity / decay;
        link(1, 2, w);
        link(2, 1, w);
    }
    r
}

/// Normalized kernel of the rate matrix at the given field intensity.
pub fn populations(model: &EngineModel, intensity: f64) -> Result<Populations> {
    if !(intensity >= 0.0) {
        return Err(Error::param("intensity", format!("must be >= 0, got {intensity}")));
    }
    let mut r = rate_matrix(model, intensity);
    let d = r.nrows();
    // replace the first balance equation by normalization
    for j in 0..d {
        r[(0, j)] = 1.0;
    }
    let mut rhs = DVector::zeros(d);
    rhs[0] = 1.0;
    let p = r
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Degenerate("rate matrix has no unique kernel".into()))?;
    Ok(Populations(p.iter().copied().collect()))
}

/// Steady populations without cavity coupling.
pub fn zero_field_populations(model: &EngineModel) -> Result<Populations> {
    match model.kind() {
        EngineKind::ThreeLevel => {
            let (nh, nc) = (model.n_h(), model.n_c());
            let w = [1.0, nc / (nc + 1.0), nh / (nh + 1.0)];
            let total: f64 = w.iter().sum();
            Ok(Populations(w.iter().map(|x| x / total).collect()))
        }
        EngineKind::FourLevel => populations(model, 0.0),
    }
}

/// ΔN at field intensity |ℰ|².
pub fn population_inversion(model: &EngineModel, intensity: f64) -> Result<f64> {
    if !(intensity >= 0.0) {
        return Err(Error::param("intensity", format!("must be >= 0, got {intensity}")));
    }
    let k = structure_constants(model);
    let num = inversion_numerator(model);
    if num == 0.0 {
        return Ok(0.0);
    }
    let sat = if intensity > 0.0 {
        4.0 * model.g().powi(2) * intensity / k.decay * k.saturation
    } else {
        0.0
    };
    Ok(num / (k.normalization + sat))
}

/// ΔN₀, the inversion at zero field.
pub fn zero_field_inversion(model: &EngineModel) -> f64 {
    population_inversion(model, 0.0).expect("zero intensity is valid")
}

/// Linear gain G = 4g²ΔN₀/Γ.
pub fn lasing_gain(model: &EngineModel) -> f64 {
    let k = structure_constants(model);
    let dn = zero_field_inversion(model);
    if dn == 0.0 {
        return 0.0;
    }
    4.0 * model.g().powi(2) * dn / k.decay
}

/// Saturation parameter B = 4g²Ψ/(ΓΦ).
pub fn saturation_parameter(model: &EngineModel) -> f64 {
    let g2 = model.g().powi(2);
    if g2 == 0.0 {
        return 0.0;
    }
    let k = structure_constants(model);
    4.0 * g2 * k.saturation / (k.decay * k.normalization)
}

pub fn is_above_threshold(model: &EngineModel) -> bool {
    lasing_gain(model) >= model.kappa()
}

/// dℰ/dt = ½[G/(1 + B|ℰ|²) − κ]ℰ.
pub fn field_derivative(model: &EngineModel, field: C64) -> C64 {
    let gain = lasing_gain(model);
    let b = saturation_parameter(model);
    field * (0.5 * (gain / (1.0 + b * field.norm_sqr()) - model.kappa()))
}

/// Nonzero fixed-point intensity (G/κ − 1)/B when above threshold.
pub fn steady_field_intensity(model: &EngineModel) -> Option<f64> {
    let gain = lasing_gain(model);
    let b = saturation_parameter(model);
    (gain > model.kappa() && b > 0.0).then(|| (gain / model.kappa() - 1.0) / b)
}

/// Field fixed point (real phase) and the populations at that intensity.
pub fn semiclassical_steady_state(model: &EngineModel) -> Result<SemiclassicalState> {
    let intensity = steady_field_intensity(model).unwrap_or(0.0);
    Ok(SemiclassicalState {
        field: C64::new(intensity.sqrt(), 0.0),
        populations: populations(model, intensity)?,
    })
}

const SCAN_POINTS: usize = 200;
const BISECTION_TOL: f64 = 1e-10;

/// All hot-bath occupations in `[lo, hi]` where G(n̄_h) = κ, holding every
/// other parameter of `model` fixed. The bracket is pre-scanned on a
/// logarithmic grid; each sign change is refined by bisection. An empty
/// vector means no threshold lies in the bracket.
pub fn find_thresholds(model: &EngineModel, bracket: (f64, f64)) -> Result<Vec<f64>> {
    let (lo, hi) = bracket;
    if !(lo > 0.0) || !(hi > lo) || !hi.is_finite() {
        return Err(Error::param("bracket", format!("need 0 < lo < hi, got ({lo}, {hi})")));
    }
    let excess = |nh: f64| -> Result<f64> { Ok(lasing_gain(&model.with_hot_occupation(nh)?) - model.kappa()) };
    let ratio = (hi / lo).ln();
    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| {
            if i + 1 == SCAN_POINTS {
                hi
            } else {
                lo * (ratio * i as f64 / (SCAN_POINTS - 1) as f64).exp()
            }
        })
        .collect();
    let values = grid.iter().map(|&x| excess(x)).collect::<Result<Vec<_>>>()?;

    let mut roots = Vec::new();
    for i in 0..SCAN_POINTS - 1 {
        let (a, b) = (grid[i], grid[i + 1]);
        let (fa, fb) = (values[i], values[i + 1]);
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa.signum() == fb.signum() || fb == 0.0 {
            continue;
        }
        roots.push(bisect(&excess, a, b, fa)?);
    }
    if values[SCAN_POINTS - 1] == 0.0 {
        roots.push(hi);
    }
    Ok(roots)
}

fn bisect(f: &impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, mut fa: f64) -> Result<f64> {
    while b - a > BISECTION_TOL {
        let mid = 0.5 * (a + b);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// κ → 0 lasing condition from bath temperatures.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LasingCondition {
    pub lases: bool,
    /// Ω_l/ω_h.
    pub efficiency: f64,
    /// 1 − T_c/T_h.
    pub carnot: f64,
}

/// Requires temperatures on every bath of the model.
pub fn temperature_lasing_condition(model: &EngineModel) -> Result<LasingCondition> {
    let missing = |which: &str| Error::param("temperature", format!("{which} bath has no temperature"));
    let hot = model.hot().thermal_info().ok_or_else(|| missing("hot"))?;
    let cold = model.cold().thermal_info().ok_or_else(|| missing("cold"))?;
    if !(hot.temperature > 0.0) {
        return Err(Error::param("temperature", format!("T_h must be > 0, got {}", hot.temperature)));
    }
    // Boltzmann exponents; ω/0 = +inf is the intended T → 0 limit.
    let beta_h = model.omega_h() / hot.temperature;
    let beta_c = model.omega_c() / cold.temperature;
    let lases = match model.kind() {
        EngineKind::ThreeLevel => beta_h <= beta_c,
        EngineKind::FourLevel => {
            let anc = model
                .ancilla()
                .and_then(|a| a.thermal_info())
                .ok_or_else(|| missing("ancilla"))?;
            let beta_a = model.omega_a().expect("four-level") / anc.temperature;
            beta_a + beta_c >= beta_h
        }
    };
    Ok(LasingCondition {
        lases,
        efficiency: model.lasing_frequency() / model.omega_h(),
        carnot: 1.0 - cold.temperature / hot.temperature,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{presets, BathSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn three(gh: f64, gc: f64, nh: f64, nc: f64, g: f64) -> EngineModel {
        EngineModel::three_level(BathSpec::new(gh, nh).unwrap(), BathSpec::new(gc, nc).unwrap(), g, 1.0).unwrap()
    }

    fn four(nh: f64, nc: f64, na: f64) -> EngineModel {
        EngineModel::four_level(
            BathSpec::new(20.0, nh).unwrap(),
            BathSpec::new(30.0, nc).unwrap(),
            BathSpec::new(40.0, na).unwrap(),
            10.0,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn zero_occupation_constants() {
        let k = structure_constants(&three(20.0, 30.0, 0.0, 0.0, 5.0));
        assert_eq!(k.decay, 50.0);
        assert_eq!(k.normalization, 1.0);
        assert!((k.saturation - 50.0 / 600.0).abs() < 1e-15);
        let k4 = structure_constants(&four(0.7, 0.3, 0.0));
        assert_eq!(k4.decay, 30.0 * 1.3);
        assert!((k4.normalization - 0.7 * 1.3).abs() < 1e-15);
    }

    #[test]
    fn reference_constants_at_lower_threshold() {
        // n̄_h = 0.187, n̄_c = 0.05, γ = 32: evaluated by hand in exact decimal
        // arithmetic: Γ = 32·1.187 + 32·1.05, Φ = 3·0.187·0.05 + 2·0.237 + 1,
        // Ψ = (32·1.561 + 32·1.15)/1024.
        let k = structure_constants(&presets::three_level_reference(0.187));
        assert!((k.decay - 71.584).abs() < 1e-12);
        assert!((k.normalization - 1.502_05).abs() < 1e-12);
        assert!((k.saturation - 0.084_718_75).abs() < 1e-15);
    }

    #[test]
    fn reference_saturation_at_unit_occupation() {
        // n̄_h = 1: Γ = 97.6, Φ = 3.25, Ψ = (128 + 36.8)/1024 = 0.1609375,
        // B = 784·0.1609375/(97.6·3.25) = 126.175/317.2.
        let b = saturation_parameter(&presets::three_level_reference(1.0));
        assert!((b - 126.175 / 317.2).abs() < 1e-14, "{b}");
    }

    #[test]
    fn ssdb_populations() {
        let p = zero_field_populations(&three(1.0, 1.0, 0.0, 0.0, 1.0)).unwrap();
        assert_eq!(p.0, vec![1.0, 0.0, 0.0]);
        let p = zero_field_populations(&three(1.0, 1.0, 1e12, 0.0, 1.0)).unwrap();
        assert!((p.ground() - 0.5).abs() < 1e-9 && p.e1() == 0.0 && (p.e2() - 0.5).abs() < 1e-9);
        // closed form agrees with the rate-matrix kernel
        let m = three(7.0, 3.0, 0.8, 0.4, 2.0);
        let a = zero_field_populations(&m).unwrap();
        let b = populations(&m, 0.0).unwrap();
        for i in 0..3 {
            assert!((a.0[i] - b.0[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn four_level_kernel_matches_power_iteration() {
        // brute force: iterate p ← p + dt R p with R assembled by hand
        let m = four(0.6, 0.2, 0.3);
        let (gh, gc, ga) = (20.0, 30.0, 40.0);
        let up = |g: f64, n: f64| g * n;
        let dn = |g: f64, n: f64| g * (n + 1.0);
        let mut p = [0.25f64; 4];
        let dt = 1e-3;
        for _ in 0..200_000 {
            let (g0, e1, e2, e3) = (p[0], p[1], p[2], p[3]);
            let d1 = up(gc, 0.2) * g0 - dn(gc, 0.2) * e1;
            let d3 = up(gh, 0.6) * g0 - dn(gh, 0.6) * e3 + up(ga, 0.3) * e2 - dn(ga, 0.3) * e3;
            let d2 = -up(ga, 0.3) * e2 + dn(ga, 0.3) * e3;
            let d0 = -(d1 + d2 + d3);
            p = [g0 + dt * d0, e1 + dt * d1, e2 + dt * d2, e3 + dt * d3];
        }
        let k = zero_field_populations(&m).unwrap();
        for (i, (a, b)) in k.0.iter().zip(p).enumerate() {
            assert!((a - b).abs() < 1e-12, "{i}: {a} vs {b}");
        }
        assert!((k.inversion() - zero_field_inversion(&m)).abs() < 1e-13);
    }

    #[test]
    fn inversion_with_field_matches_rate_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let m = if rng.gen_bool(0.5) {
                three(rng.gen_range(1.0..50.0), rng.gen_range(1.0..50.0), rng.gen_range(0.0..5.0), rng.gen_range(0.0..2.0), rng.gen_range(0.5..20.0))
            } else {
                four(rng.gen_range(0.0..5.0), rng.gen_range(0.0..2.0), rng.gen_range(0.01..2.0))
            };
            let i = rng.gen_range(0.0..10.0);
            let closed = population_inversion(&m, i).unwrap();
            let kernel = populations(&m, i).unwrap().inversion();
            assert!((closed - kernel).abs() < 1e-12, "{closed} vs {kernel}");
        }
    }

    #[test]
    fn inversion_properties() {
        let eq = three(10.0, 20.0, 0.4, 0.4, 3.0);
        assert_eq!(population_inversion(&eq, 3.0).unwrap(), 0.0);
        assert_eq!(lasing_gain(&eq), 0.0);
        let m = presets::three_level_reference(2.0);
        let mut last = f64::INFINITY;
        for k in 0..40 {
            let v = population_inversion(&m, 0.25 * k as f64).unwrap();
            assert!(v < last);
            last = v;
        }
        assert!(population_inversion(&m, 1e12).unwrap() < 1e-9);
        assert!(population_inversion(&m, -1.0).is_err());
    }

    #[test]
    fn three_level_inversion_bounded_by_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            let m = three(rng.gen_range(0.1..100.0), rng.gen_range(0.1..100.0), rng.gen_range(0.0..1e3), rng.gen_range(0.0..10.0), 1.0);
            assert!(zero_field_inversion(&m) <= 1.0);
        }
    }

    #[test]
    fn four_level_full_inversion_without_ancilla_heat() {
        let m = four(0.5, 0.2, 0.0);
        assert!((zero_field_inversion(&m) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn equal_gain_points() {
        for nh in [0.507, 2.629] {
            let g = lasing_gain(&presets::three_level_reference(nh));
            assert!((g - 2.0).abs() / 2.0 < 0.02, "{nh}: {g}");
        }
    }

    #[test]
    fn saturation_scaling() {
        let m = presets::three_level_reference(1.0);
        assert_eq!(saturation_parameter(&m.with_g(0.0).unwrap()), 0.0);
        let b1 = saturation_parameter(&m);
        let b2 = saturation_parameter(&m.with_g(28.0).unwrap());
        assert!((b2 / b1 - 4.0).abs() < 1e-13);
        assert!(b1 > 0.0);
    }

    #[test]
    fn field_fixed_points() {
        let m = presets::three_level_reference(1.0);
        assert_eq!(field_derivative(&m, C64::new(0.0, 0.0)), C64::new(0.0, 0.0));
        let i = steady_field_intensity(&m).unwrap();
        let e = C64::from_polar(i.sqrt(), 0.7);
        assert!(field_derivative(&m, e).norm() < 1e-12);
        assert!(steady_field_intensity(&presets::three_level_reference(0.1)).is_none());
    }

    #[test]
    fn field_integration_converges_to_fixed_point() {
        // explicit Euler on the field equation, independent of steady_field_intensity
        let m = presets::three_level_reference(2.0);
        let (gain, b, kappa) = (lasing_gain(&m), saturation_parameter(&m), m.kappa());
        let mut e = C64::new(1e-3, 2e-3);
        let dt = 1e-3;
        for _ in 0..200_000 {
            e += dt * 0.5 * (gain / (1.0 + b * e.norm_sqr()) - kappa) * e;
        }
        let expected = (gain / kappa - 1.0) / b;
        assert!((e.norm_sqr() - expected).abs() < 1e-10, "{} vs {expected}", e.norm_sqr());
        let s = semiclassical_steady_state(&m).unwrap();
        assert!((s.field.norm_sqr() - expected).abs() < 1e-12);
        let pops: f64 = s.populations.0.iter().sum();
        assert!((pops - 1.0).abs() < 1e-12);
        assert!(s.populations.0.iter().all(|&p| (0.0..=1.0).contains(&p)));
    }

    #[test]
    fn reference_thresholds() {
        let roots = find_thresholds(&presets::three_level_reference(1.0), (1e-3, 50.0)).unwrap();
        assert_eq!(roots.len(), 2, "{roots:?}");
        assert!((roots[0] - 0.187).abs() < 0.005);
        assert!((roots[1] - 8.647).abs() < 0.05);
        let roots = find_thresholds(&presets::four_level_reference(1.0), (1e-4, 50.0)).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - 0.0141).abs() < 0.0005);
        let off = presets::three_level_reference(1.0).with_g(0.0).unwrap();
        assert!(find_thresholds(&off, (1e-3, 50.0)).unwrap().is_empty());
        assert!(find_thresholds(&off, (0.0, 50.0)).is_err());
    }

    fn thermal_three(th: f64, tc: f64) -> EngineModel {
        EngineModel::three_level(
            BathSpec::thermal(1.0, 3.0, th).unwrap(),
            BathSpec::thermal(1.0, 1.0, tc).unwrap(),
            1.0,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn temperature_condition() {
        let c = temperature_lasing_condition(&thermal_three(2.0, 2.0)).unwrap();
        assert!(!c.lases);
        assert_eq!(c.carnot, 0.0);
        assert!((c.efficiency - 2.0 / 3.0).abs() < 1e-15);
        let c = temperature_lasing_condition(&thermal_three(10.0, 1.0)).unwrap();
        assert!(c.lases && c.efficiency <= c.carnot);
        assert!(temperature_lasing_condition(&presets::three_level_reference(1.0)).is_err());
        let cold_hot = EngineModel::three_level(
            BathSpec::thermal(1.0, 3.0, 0.0).unwrap(),
            BathSpec::thermal(1.0, 1.0, 1.0).unwrap(),
            1.0,
            1.0,
        )
        .unwrap();
        assert!(temperature_lasing_condition(&cold_hot).is_err());
    }

    #[test]
    fn four_level_condition_reduces_to_carnot_at_equal_cold_temperatures() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let (wc, wl, wa) = (rng.gen_range(0.1..5.0), rng.gen_range(0.1..5.0), rng.gen_range(0.1..5.0));
            let wh = wc + wl + wa;
            let (tc, th) = (rng.gen_range(0.1..5.0), rng.gen_range(0.1..20.0));
            let m = EngineModel::four_level(
                BathSpec::thermal(1.0, wh, th).unwrap(),
                BathSpec::thermal(1.0, wc, tc).unwrap(),
                BathSpec::thermal(1.0, wa, tc).unwrap(),
                1.0,
                1.0,
            )
            .unwrap();
            let c = temperature_lasing_condition(&m).unwrap();
            let carnot_ok = 1.0 - tc / th >= wl / wh - 1e-12;
            assert_eq!(c.lases, carnot_ok || (1.0 - tc / th - wl / wh).abs() < 1e-12);
            if c.lases {
                assert!(c.efficiency <= c.carnot + 1e-12);
            }
        }
    }
}
