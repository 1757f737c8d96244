//! Fully quantum laser theory: adiabatic-elimination coefficients, the
//! photon-number birth–death chain, its stationary distribution, moments and
//! output power.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::models::{EngineKind, EngineModel};
use crate::semiclassical::{inversion_numerator, saturation_parameter, structure_constants};
use crate::C64;

/// Stimulated emission 𝒜, stimulated absorption 𝒜_b, nonlinearity ℬ and κ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaserCoefficients {
    pub a: f64,
    pub a_b: f64,
    pub b: f64,
    pub kappa: f64,
    // ℬ/𝒜, kept separately so that it stays defined when 𝒜 = 0
    b_over_a: f64,
}

impl LaserCoefficients {
    pub fn new(a: f64, a_b: f64, b: f64, kappa: f64) -> Result<Self> {
        for (name, v) in [("A", a), ("A_b", a_b), ("B", b)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::param(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::param("kappa", format!("must be finite and > 0, got {kappa}")));
        }
        if a == 0.0 && b > 0.0 {
            return Err(Error::param("B", "B must vanish when A = 0"));
        }
        let b_over_a = if a > 0.0 { b / a } else { 0.0 };
        Ok(Self { a, a_b, b, kappa, b_over_a })
    }

    /// ℬ/𝒜, the per-photon saturation of the stimulated terms.
    pub fn saturation_ratio(&self) -> f64 {
        self.b_over_a
    }

    /// Net linear gain 𝒜 − 𝒜_b − κ.
    pub fn net_gain(&self) -> f64 {
        self.a - self.a_b - self.kappa
    }

    pub fn is_above_threshold(&self) -> bool {
        self.a > 0.0 && self.net_gain() >= 0.0
    }

    /// P_n/P_{n−1} of the stationary chain.
    pub fn ratio(&self, n: usize) -> f64 {
        self.a / (self.a_b + self.kappa * (1.0 + n as f64 * self.b_over_a))
    }

    /// Real-valued peak location n* = (𝒜/κℬ)(𝒜 − 𝒜_b − κ); `None` when ℬ = 0.
    pub fn peak_location(&self) -> Option<f64> {
        (self.b > 0.0).then(|| self.a / (self.kappa * self.b) * self.net_gain())
    }
}

pub fn scully_lamb_coefficients(model: &EngineModel) -> LaserCoefficients {
    let k = structure_constants(model);
    let g2 = model.g().powi(2);
    let (nh, nc, na) = (model.n_h(), model.n_c(), model.n_a());
    let (emit, absorb) = match model.kind() {
        EngineKind::ThreeLevel => (nh * (nc + 1.0), nc * (nh + 1.0)),
        EngineKind::FourLevel => (nh * (nc + 1.0) * (na + 1.0), nc * na * (nh + 1.0)),
    };
    let denom = k.decay * k.normalization;
    let (a, a_b) = if g2 == 0.0 || denom == 0.0 {
        (0.0, 0.0)
    } else {
        (4.0 * g2 * emit / denom, 4.0 * g2 * absorb / denom)
    };
    let b_over_a = if a > 0.0 { saturation_parameter(model) } else { 0.0 };
    LaserCoefficients { a, a_b, b: a * b_over_a, kappa: model.kappa(), b_over_a }
}

/// Closed-form net stimulated flow from rung n−1 into rung n,
/// n[𝒜P_{n−1} − 𝒜_bP_n]/(1 + nℬ/𝒜).
pub fn coherent_flow(coeffs: &LaserCoefficients, n: usize, p_nm1: f64, p_n: f64) -> f64 {
    let nf = n as f64;
    nf * (coeffs.a * p_nm1 - coeffs.a_b * p_n) / (1.0 + nf * coeffs.b_over_a)
}

/// Solves the adiabatic-elimination linear system for rung `n` with the
/// atom's rung populations fixed to `p_nm1` and `p_n`, and returns the
/// coherent flow ig√n(ρ_{12;n,n−1} − ρ_{21;n−1,n}).
pub fn elimination_oracle(model: &EngineModel, n: usize, p_nm1: f64, p_n: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::param("n", "rung index must be >= 1"));
    }
    let s = (n as f64).sqrt();
    let ig = C64::new(0.0, model.g() * s);
    let (cp, cm) = (C64::from(model.cold().up_rate()), C64::from(model.cold().down_rate()));
    let (hp, hm) = (C64::from(model.hot().up_rate()), C64::from(model.hot().down_rate()));
    let one = C64::from(1.0);

    let (m, rhs, x, y) = match model.kind() {
        EngineKind::ThreeLevel => {
            // ρgg, ρ11, ρ22 at n; ρgg, ρ11, ρ22 at n−1; ρ_{12;n,n−1}; ρ_{21;n−1,n}
            let mut m = DMatrix::<C64>::zeros(8, 8);
            let decay = 0.5 * (hm + cm);
            m[(0, 6)] = ig;
            m[(0, 7)] = -ig;
            m[(0, 1)] = -cm;
            m[(0, 0)] = cp;
            m[(1, 7)] = ig;
            m[(1, 6)] = -ig;
            m[(1, 5)] = -hm;
            m[(1, 3)] = hp;
            m[(2, 1)] = ig;
            m[(2, 5)] = -ig;
            m[(2, 6)] = -decay;
            m[(3, 1)] = -ig;
            m[(3, 5)] = ig;
            m[(3, 7)] = -decay;
            m[(4, 1)] = cm;
            m[(4, 0)] = -(cp + hp);
            m[(4, 2)] = hm;
            m[(5, 4)] = cm;
            m[(5, 3)] = -(cp + hp);
            m[(5, 5)] = hm;
            for j in 0..3 {
                m[(6, j)] = one;
                m[(7, 3 + j)] = one;
            }
            let mut rhs = DVector::<C64>::zeros(8);
            rhs[6] = p_n.into();
            rhs[7] = p_nm1.into();
            (m, rhs, 6, 7)
        }
        EngineKind::FourLevel => {
            let anc = model.ancilla().expect("four-level model has an ancilla bath");
            let (ap, am) = (C64::from(anc.up_rate()), C64::from(anc.down_rate()));
            // ρgg, ρ11, ρ22, ρ33 at n; the same at n−1; ρ_{12;n,n−1}; ρ_{21;n−1,n}
            let mut m = DMatrix::<C64>::zeros(10, 10);
            let decay = 0.5 * (ap + cm);
            m[(0, 8)] = ig;
            m[(0, 9)] = -ig;
            m[(0, 1)] = -cm;
            m[(0, 0)] = cp;
            m[(1, 9)] = ig;
            m[(1, 8)] = -ig;
            m[(1, 6)] = -ap;
            m[(1, 7)] = am;
            m[(2, 1)] = ig;
            m[(2, 6)] = -ig;
            m[(2, 8)] = -decay;
            m[(3, 1)] = -ig;
            m[(3, 6)] = ig;
            m[(3, 9)] = -decay;
            m[(4, 1)] = cm;
            m[(4, 0)] = -(cp + hp);
            m[(4, 3)] = hm;
            m[(5, 5)] = cm;
            m[(5, 4)] = -(cp + hp);
            m[(5, 7)] = hm;
            m[(6, 2)] = ap;
            m[(6, 3)] = -(am + hm);
            m[(6, 0)] = hp;
            m[(7, 6)] = ap;
            m[(7, 7)] = -(am + hm);
            m[(7, 4)] = hp;
            for j in 0..4 {
                m[(8, j)] = one;
                m[(9, 4 + j)] = one;
            }
            let mut rhs = DVector::<C64>::zeros(10);
            rhs[8] = p_n.into();
            rhs[9] = p_nm1.into();
            (m, rhs, 8, 9)
        }
    };
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Degenerate(format!("elimination system is singular at n = {n}")))?;
    if sol.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Degenerate(format!("elimination system is singular at n = {n}")));
    }
    Ok((ig * (sol[x] - sol[y])).re)
}

/// dP_n/dt of the laser master equation on a chain truncated at `p.len() − 1`
/// (no flow leaves the top rung, so Σ dP_n/dt = 0).
pub fn pn_derivative(coeffs: &LaserCoefficients, p: &[f64]) -> Vec<f64> {
    let len = p.len();
    // flux[n]: net probability current from rung n−1 to rung n
    let mut flux = vec![0.0; len + 1];
    for n in 1..len {
        flux[n] = coherent_flow(coeffs, n, p[n - 1], p[n]) - coeffs.kappa * n as f64 * p[n];
    }
    (0..len).map(|n| flux[n] - flux[n + 1]).collect()
}

/// Exact d⟨n⟩/dt of the chain.
pub fn mean_rate(coeffs: &LaserCoefficients, p: &[f64]) -> f64 {
    pn_derivative(coeffs, p).iter().enumerate().map(|(n, d)| n as f64 * d).sum()
}

/// d⟨n⟩/dt with the saturating fractions expanded to first order in ℬ/𝒜:
/// (𝒜 − 𝒜_b − κ)⟨n⟩ + 𝒜 − ℬ⟨(n+1)²⟩ + (𝒜_b/𝒜)ℬ⟨n²⟩.
pub fn mean_rate_first_order(coeffs: &LaserCoefficients, p: &PhotonDistribution) -> f64 {
    let mean = p.mean();
    let second = p.second_moment();
    coeffs.net_gain() * mean + coeffs.a - coeffs.b * (second + 2.0 * mean + 1.0)
        + coeffs.a_b * coeffs.b_over_a * second
}

/// Normalized photon-number probabilities P_0..P_Nmax.
#[derive(Clone, Debug, PartialEq)]
pub struct PhotonDistribution {
    probabilities: Vec<f64>,
}

const NORMALIZATION_TOL: f64 = 1e-12;
/// Largest admissible P_Nmax for a truncated stationary distribution.
pub const TAIL_TOL: f64 = 1e-8;

impl PhotonDistribution {
    /// Accepts probabilities that are non-negative and sum to one.
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::param("probabilities", "empty distribution"));
        }
        if let Some(p) = probabilities.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::param("probabilities", format!("entry {p} is not a probability")));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::param("probabilities", format!("sum is {total}, expected 1")));
        }
        Ok(Self { probabilities })
    }

    /// Normalizes non-negative weights.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::param("weights", format!("total weight {total} cannot be normalized")));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn vacuum(n_max: usize) -> Self {
        let mut p = vec![0.0; n_max + 1];
        p[0] = 1.0;
        Self { probabilities: p }
    }

    /// Poisson distribution with the given mean, truncated at `n_max` and renormalized.
    pub fn poisson(mean: f64, n_max: usize) -> Result<Self> {
        if !(mean >= 0.0) {
            return Err(Error::param("mean", format!("must be >= 0, got {mean}")));
        }
        if mean == 0.0 {
            return Ok(Self::vacuum(n_max));
        }
        let logs: Vec<f64> = (0..=n_max)
            .scan(0.0, |acc, n| {
                if n > 0 {
                    *acc += mean.ln() - (n as f64).ln();
                }
                Some(*acc)
            })
            .collect();
        Ok(Self { probabilities: normalize_logs(&logs) })
    }

    /// Geometric (thermal) distribution with the given mean, truncated and renormalized.
    pub fn thermal(mean: f64, n_max: usize) -> Result<Self> {
        if !(mean >= 0.0) {
            return Err(Error::param("mean", format!("must be >= 0, got {mean}")));
        }
        let r = mean / (1.0 + mean);
        Self::from_weights((0..=n_max).map(|n| r.powi(n as i32)).collect())
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn n_max(&self) -> usize {
        self.probabilities.len() - 1
    }

    pub fn mean(&self) -> f64 {
        self.probabilities.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.probabilities.iter().enumerate().map(|(n, p)| (n * n) as f64 * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.probabilities.iter().enumerate().map(|(n, p)| (n as f64 - m).powi(2) * p).sum()
    }

    /// σ²/⟨n⟩; 1 for the vacuum.
    pub fn fano(&self) -> f64 {
        let m = self.mean();
        if m == 0.0 {
            1.0
        } else {
            self.variance() / m
        }
    }

    /// Index of the largest probability (the lowest one on ties).
    pub fn peak_index(&self) -> usize {
        let mut best = 0;
        for (n, &p) in self.probabilities.iter().enumerate() {
            if p > self.probabilities[best] {
                best = n;
            }
        }
        best
    }

    /// P_Nmax.
    pub fn tail(&self) -> f64 {
        *self.probabilities.last().expect("non-empty")
    }

    /// Σ|P_n − Q_n|, with the shorter vector padded by zeros.
    pub fn l1_distance(&self, other: &PhotonDistribution) -> f64 {
        let (p, q) = (&self.probabilities, &other.probabilities);
        (0..p.len().max(q.len()))
            .map(|n| (p.get(n).copied().unwrap_or(0.0) - q.get(n).copied().unwrap_or(0.0)).abs())
            .sum()
    }
}

fn normalize_logs(logs: &[f64]) -> Vec<f64> {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = logs.iter().map(|l| (l - max).exp()).sum();
    let log_norm = max + total.ln();
    logs.iter().map(|l| (l - log_norm).exp()).collect()
}

fn chain_logs(coeffs: &LaserCoefficients, n_max: usize) -> Vec<f64> {
    let mut logs = Vec::with_capacity(n_max + 1);
    logs.push(0.0);
    for n in 1..=n_max {
        logs.push(logs[n - 1] + coeffs.ratio(n).ln());
    }
    logs
}

/// Stationary distribution of the chain on 0..=n_max, built from the ratios
/// P_n/P_{n−1} in log space.
pub fn steady_distribution(coeffs: &LaserCoefficients, n_max: usize) -> Result<PhotonDistribution> {
    if coeffs.a == 0.0 {
        return Ok(PhotonDistribution::vacuum(n_max));
    }
    let p = normalize_logs(&chain_logs(coeffs, n_max));
    let tail = *p.last().expect("non-empty");
    if tail >= TAIL_TOL {
        return Err(Error::TruncationTooSmall { n_max, tail });
    }
    Ok(PhotonDistribution { probabilities: p })
}

const AUTO_RATIO: f64 = 0.5;
const AUTO_TAIL: f64 = 1e-16;
const AUTO_LIMIT: usize = 50_000_000;

/// Stationary distribution with the truncation chosen automatically: the
/// chain is extended until P_n/P_{n−1} < 1/2 and the geometric majorant of
/// the neglected mass is below 1e-16.
pub fn steady_distribution_auto(coeffs: &LaserCoefficients) -> Result<PhotonDistribution> {
    if coeffs.a == 0.0 {
        return Ok(PhotonDistribution::vacuum(0));
    }
    let mut logs = vec![0.0];
    // running log Σ exp(logs)
    let mut log_sum = 0.0f64;
    for n in 1..=AUTO_LIMIT {
        let r = coeffs.ratio(n);
        if r >= 1.0 && coeffs.b_over_a == 0.0 {
            return Err(Error::NotNormalizable { ratio: r });
        }
        let l = logs[n - 1] + r.ln();
        logs.push(l);
        log_sum = log_add(log_sum, l);
        let next = coeffs.ratio(n + 1);
        if next < AUTO_RATIO {
            let bound = (l - log_sum).exp() * next / (1.0 - next);
            if bound < AUTO_TAIL {
                return Ok(PhotonDistribution { probabilities: normalize_logs(&logs) });
            }
        }
    }
    Err(Error::NotNormalizable { ratio: coeffs.ratio(AUTO_LIMIT) })
}

fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

const CANCELLATION_LIMIT: f64 = 1e7;

/// Closed-form stationary moments.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub fano: f64,
    /// argmax P_n.
    pub peak_index: usize,
    pub p0: f64,
}

/// ⟨n⟩ = X − Y + YP₀ and σ² = X − YP₀⟨n⟩ with X = 𝒜²/κℬ,
/// Y = (𝒜/κℬ)(κ + 𝒜_b), and P₀ from the normalized chain. When Y² exceeds
/// the moments by more than seven orders of magnitude the closed forms lose
/// too many digits and the moments are summed directly instead.
pub fn distribution_moments(coeffs: &LaserCoefficients) -> Result<Moments> {
    if coeffs.a == 0.0 {
        return Ok(Moments { mean: 0.0, variance: 0.0, fano: 1.0, peak_index: 0, p0: 1.0 });
    }
    if coeffs.b == 0.0 {
        let r = coeffs.ratio(1);
        if r >= 1.0 {
            return Err(Error::NotNormalizable { ratio: r });
        }
        let mean = r / (1.0 - r);
        return Ok(Moments {
            mean,
            variance: mean * (1.0 + mean),
            fano: 1.0 + mean,
            peak_index: 0,
            p0: 1.0 - r,
        });
    }
    let dist = steady_distribution_auto(coeffs)?;
    let p0 = dist.probabilities[0];
    let scale = coeffs.a / (coeffs.kappa * coeffs.b);
    let x = coeffs.a * scale;
    let y = scale * (coeffs.kappa + coeffs.a_b);
    let mut mean = x - y + y * p0;
    let mut variance = x - y * p0 * mean;
    if y * y.max(1.0) > CANCELLATION_LIMIT * variance.abs().min(mean.abs()) {
        // rounding in P₀ is amplified by Y in the mean and by Y² in the variance
        mean = dist.mean();
        variance = dist.variance();
    }
    let peak = coeffs.peak_location().unwrap_or(0.0);
    Ok(Moments {
        mean,
        variance,
        fano: variance / mean,
        peak_index: if peak > 0.0 { peak.floor() as usize } else { 0 },
        p0,
    })
}

/// 𝒫 = Ω_l κ⟨n⟩ with ħ = 1.
pub fn output_power(model: &EngineModel, mean_n: f64) -> Result<f64> {
    if !(mean_n >= 0.0) {
        return Err(Error::param("mean_n", format!("must be >= 0, got {mean_n}")));
    }
    Ok(model.lasing_frequency() * model.kappa() * mean_n)
}

/// Ω_l(𝒜/ℬ)(𝒜 − 𝒜_b − κ), the power with P₀ dropped; `None` when 𝒜 = 0.
pub fn far_above_threshold_power(model: &EngineModel) -> Option<f64> {
    let c = scully_lamb_coefficients(model);
    (c.a > 0.0).then(|| model.lasing_frequency() * c.net_gain() / c.b_over_a)
}

/// Three-level far-above-threshold power written in bath parameters:
/// Ω_l γ_hγ_c(n̄_h − n̄_c − κΓΦ/4g²)/[γ_h(3n̄_h+1) + γ_c(3n̄_c+1)].
pub fn three_level_power_closed_form(model: &EngineModel) -> Result<f64> {
    if model.kind() != EngineKind::ThreeLevel {
        return Err(Error::ModelMismatch("closed-form power is defined for the three-level engine".into()));
    }
    if model.g() == 0.0 {
        return Err(Error::param("g", "closed-form power needs g > 0"));
    }
    let k = structure_constants(model);
    let (gh, gc) = (model.hot().gamma(), model.cold().gamma());
    let (nh, nc) = (model.n_h(), model.n_c());
    let num = gh * gc * (inversion_numerator(model) - model.kappa() * k.decay * k.normalization / (4.0 * model.g().powi(2)));
    Ok(model.lasing_frequency() * num / (gh * (3.0 * nh + 1.0) + gc * (3.0 * nc + 1.0)))
}

/// Rough mean photon number for n̄_c ≈ 0 and γ_h = γ_c = γ:
/// γn̄_h/[κ(3n̄_h+2)] − (γ²/4g²)(n̄_h+1)(2n̄_h+1)/(3n̄_h+2).
pub fn rough_estimate_mean(model: &EngineModel) -> Result<f64> {
    if model.kind() != EngineKind::ThreeLevel {
        return Err(Error::ModelMismatch("rough estimate is defined for the three-level engine".into()));
    }
    let gamma = model.hot().gamma();
    if gamma != model.cold().gamma() {
        return Err(Error::param("gamma", "rough estimate needs gamma_h = gamma_c"));
    }
    if model.g() == 0.0 {
        return Err(Error::param("g", "rough estimate needs g > 0"));
    }
    let nh = model.n_h();
    let d = 3.0 * nh + 2.0;
    Ok(gamma * nh / (model.kappa() * d) - gamma * gamma / (4.0 * model.g().powi(2)) * (nh + 1.0) * (2.0 * nh + 1.0) / d)
}
