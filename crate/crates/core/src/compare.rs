//! Analytic and master-equation results for the same parameter point.

use crate::error::Result;
use crate::exec::Execution;
use crate::hilbert::HilbertSpace;
use crate::liouvillian::build_liouvillian;
use crate::models::EngineModel;
use crate::photonstats::{
    distribution_moments, output_power, scully_lamb_coefficients, steady_distribution_auto, PhotonDistribution,
};
use crate::semiclassical::{lasing_gain, zero_field_inversion};
use crate::solver::{photon_distribution, steady_state_with, SteadyStateOptions, SteadyStateResult, TRUNCATION_WARNING};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumericsOptions {
    /// Fock truncation; `None` uses the engine's default.
    pub n_max: Option<usize>,
    pub steady: SteadyStateOptions,
    /// How often the truncation may grow by half when the tail is too heavy.
    pub max_retries: usize,
}

impl Default for NumericsOptions {
    fn default() -> Self {
        NumericsOptions { n_max: None, steady: SteadyStateOptions::default(), max_retries: 2 }
    }
}

/// One row of a parameter sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub n_h: f64,
    pub gain_over_kappa: f64,
    pub inversion0: f64,
    pub a: f64,
    pub a_b: f64,
    pub b: f64,
    pub analytic_mean: f64,
    pub analytic_variance: f64,
    pub analytic_fano: f64,
    pub numeric_mean: f64,
    pub numeric_variance: f64,
    /// Σ|P_analytic − P_numeric|.
    pub l1: f64,
    /// Ω_l κ⟨n⟩ from the analytic mean.
    pub power: f64,
    pub n_max: usize,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct PointComparison {
    pub record: SweepRecord,
    pub analytic: PhotonDistribution,
    pub numeric: PhotonDistribution,
    pub steady: SteadyStateResult,
    pub space: HilbertSpace,
}

/// Numerical steady state and its photon distribution, enlarging the Fock
/// space when the top level is still noticeably occupied.
pub fn numeric_steady_state(
    model: &EngineModel,
    opts: &NumericsOptions,
) -> Result<(HilbertSpace, SteadyStateResult, PhotonDistribution)> {
    let mut n_max = opts.n_max.unwrap_or_else(|| model.kind().default_n_max());
    let mut attempt = 0;
    loop {
        let space = HilbertSpace::with_n_max(model.kind().atom_dim(), n_max)?;
        let l = build_liouvillian(model, &space)?;
        let steady = steady_state_with(&l, &opts.steady)?;
        let dist = photon_distribution(&steady.state, &space)?;
        if dist.tail() < TRUNCATION_WARNING || attempt >= opts.max_retries {
            return Ok((space, steady, dist));
        }
        attempt += 1;
        n_max = (n_max * 3).div_ceil(2);
        log::info!("retrying with n_max = {n_max}");
    }
}

pub fn compare_point(model: &EngineModel, opts: &NumericsOptions) -> Result<PointComparison> {
    let coeffs = scully_lamb_coefficients(model);
    let moments = distribution_moments(&coeffs)?;
    let analytic = steady_distribution_auto(&coeffs)?;
    let (space, steady, numeric) = numeric_steady_state(model, opts)?;
    let record = SweepRecord {
        n_h: model.hot().occupation(),
        gain_over_kappa: lasing_gain(model) / model.kappa(),
        inversion0: zero_field_inversion(model),
        a: coeffs.a,
        a_b: coeffs.a_b,
        b: coeffs.b,
        analytic_mean: moments.mean,
        analytic_variance: moments.variance,
        analytic_fano: moments.fano,
        numeric_mean: numeric.mean(),
        numeric_variance: numeric.variance(),
        l1: analytic.l1_distance(&numeric),
        power: output_power(model, moments.mean)?,
        n_max: space.n_max(),
        residual: steady.residual,
    };
    Ok(PointComparison { record, analytic, numeric, steady, space })
}

/// Runs [`compare_point`] for each hot occupation, in input order. With a
/// parallel `exec` the points are spread over threads and each solve runs
/// sequentially.
pub fn sweep_hot_occupation(
    base: &EngineModel,
    values: &[f64],
    exec: Execution,
    opts: &NumericsOptions,
) -> Vec<Result<SweepRecord>> {
    let mut inner = *opts;
    if exec.is_parallel() {
        inner.steady.exec = Execution::Sequential;
    }
    exec.map(values, |&n_h| {
        let model = base.with_hot_occupation(n_h)?;
        compare_point(&model, &inner).map(|c| c.record)
    })
}
