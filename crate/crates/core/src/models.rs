//! Physical parameter sets for the three- and four-level engines.
//!
//! Bath occupations n̄ are the primary inputs. Temperatures are optional and
//! only used to derive n̄ and to evaluate the κ → 0 lasing condition.

use crate::error::{Error, Result};

/// Mean thermal occupation `1 / (exp(ω/T) − 1)`; zero at `T = 0`.
pub fn planck_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::param("omega", format!("must be > 0, got {omega}")));
    }
    if !(temperature >= 0.0) {
        return Err(Error::param("temperature", format!("must be >= 0, got {temperature}")));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (omega / temperature).exp_m1())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thermal {
    pub omega: f64,
    pub temperature: f64,
}

/// One thermal bath coupled to one atomic transition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BathSpec {
    gamma: f64,
    occupation: f64,
    thermal: Option<Thermal>,
}

impl BathSpec {
    pub fn new(gamma: f64, occupation: f64) -> Result<Self> {
        check_rate("gamma", gamma)?;
        if !(occupation >= 0.0) || !occupation.is_finite() {
            return Err(Error::param("occupation", format!("must be finite and >= 0, got {occupation}")));
        }
        Ok(BathSpec {
            gamma,
            occupation,
            thermal: None,
        })
    }

    /// Bath whose occupation is the Planck value at `(omega, temperature)`.
    pub fn thermal(gamma: f64, omega: f64, temperature: f64) -> Result<Self> {
        let occupation = planck_occupation(omega, temperature)?;
        let mut bath = BathSpec::new(gamma, occupation)?;
        bath.thermal = Some(Thermal { omega, temperature });
        Ok(bath)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn occupation(&self) -> f64 {
        self.occupation
    }

    pub fn thermal_info(&self) -> Option<Thermal> {
        self.thermal
    }

    /// Upward rate Γ⁺ = γ n̄.
    pub fn up_rate(&self) -> f64 {
        self.gamma * self.occupation
    }

    /// Downward rate Γ⁻ = γ (n̄ + 1).
    pub fn down_rate(&self) -> f64 {
        self.gamma * (self.occupation + 1.0)
    }

    /// Same bath with a new occupation; any temperature information is dropped.
    pub fn with_occupation(&self, occupation: f64) -> Result<Self> {
        BathSpec::new(self.gamma, occupation)
    }
}

/// Level energies implied by the bath frequencies when every bath carries one.
fn derived_levels(
    kind: EngineKind,
    hot: &BathSpec,
    cold: &BathSpec,
    ancilla: Option<&BathSpec>,
) -> Result<Option<Vec<f64>>> {
    let (Some(h), Some(c)) = (hot.thermal, cold.thermal) else {
        return Ok(None);
    };
    let levels = match kind {
        EngineKind::ThreeLevel => vec![0.0, c.omega, h.omega],
        EngineKind::FourLevel => {
            let Some(a) = ancilla.and_then(|a| a.thermal) else {
                return Ok(None);
            };
            vec![0.0, c.omega, h.omega - a.omega, h.omega]
        }
    };
    if levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::ModelMismatch(format!(
            "bath frequencies give non-increasing level energies {levels:?}"
        )));
    }
    Ok(Some(levels))
}

fn check_rate(name: &'static str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::param(name, format!("must be finite and >= 0, got {v}")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EngineKind {
    ThreeLevel,
    FourLevel,
}

impl EngineKind {
    pub fn atom_dim(self) -> usize {
        match self {
            EngineKind::ThreeLevel => 3,
            EngineKind::FourLevel => 4,
        }
    }

    /// Photon truncation used when none is requested.
    pub fn default_n_max(self) -> usize {
        match self {
            EngineKind::ThreeLevel => 40,
            EngineKind::FourLevel => 60,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EngineModel {
    kind: EngineKind,
    hot: BathSpec,
    cold: BathSpec,
    ancilla: Option<BathSpec>,
    g: f64,
    kappa: f64,
    level_energies: Vec<f64>,
}

impl EngineModel {
    pub fn new(
        kind: EngineKind,
        hot: BathSpec,
        cold: BathSpec,
        ancilla: Option<BathSpec>,
        g: f64,
        kappa: f64,
    ) -> Result<Self> {
        match (kind, ancilla.is_some()) {
            (EngineKind::ThreeLevel, true) => {
                return Err(Error::ModelMismatch("three-level model takes no ancilla bath".into()))
            }
            (EngineKind::FourLevel, false) => {
                return Err(Error::ModelMismatch("four-level model requires an ancilla bath".into()))
            }
            _ => {}
        }
        check_rate("g", g)?;
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::param("kappa", format!("must be > 0, got {kappa}")));
        }
        let level_energies = derived_levels(kind, &hot, &cold, ancilla.as_ref())?.unwrap_or_else(|| match kind {
            EngineKind::ThreeLevel => vec![0.0, 1.0, 2.0],
            EngineKind::FourLevel => vec![0.0, 1.0, 2.0, 3.0],
        });
        let model = EngineModel {
            kind,
            hot,
            cold,
            ancilla,
            g,
            kappa,
            level_energies,
        };
        model.check_bath_frequencies()?;
        Ok(model)
    }

    /// Hot bath on |g⟩↔|e₂⟩, cold bath on |g⟩↔|e₁⟩, cavity on |e₁⟩↔|e₂⟩.
    pub fn three_level(hot: BathSpec, cold: BathSpec, g: f64, kappa: f64) -> Result<Self> {
        Self::new(EngineKind::ThreeLevel, hot, cold, None, g, kappa)
    }

    /// Hot bath on |g⟩↔|e₃⟩, ancilla on |e₂⟩↔|e₃⟩, cold bath on |g⟩↔|e₁⟩,
    /// cavity on |e₁⟩↔|e₂⟩.
    pub fn four_level(hot: BathSpec, cold: BathSpec, ancilla: BathSpec, g: f64, kappa: f64) -> Result<Self> {
        Self::new(EngineKind::FourLevel, hot, cold, Some(ancilla), g, kappa)
    }

    /// Replaces the level energies `(E_g, E_1, E_2[, E_3])`. They must be
    /// strictly increasing and agree with any bath frequencies already set.
    pub fn with_level_energies(mut self, energies: Vec<f64>) -> Result<Self> {
        if energies.len() != self.kind.atom_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.kind.atom_dim(),
                actual: energies.len(),
            });
        }
        if energies.iter().any(|e| !e.is_finite()) || energies.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("level_energies", "must be finite and strictly increasing"));
        }
        self.level_energies = energies;
        self.check_bath_frequencies()?;
        Ok(self)
    }

    fn check_bath_frequencies(&self) -> Result<()> {
        let pairs = [
            (Some(self.hot), Some(self.omega_h()), "hot bath omega"),
            (Some(self.cold), Some(self.omega_c()), "cold bath omega"),
            (self.ancilla, self.omega_a(), "ancilla bath omega"),
        ];
        for (bath, expected, what) in pairs {
            if let (Some(Thermal { omega, .. }), Some(expected)) = (bath.and_then(|b| b.thermal), expected) {
                if (omega - expected).abs() > 1e-9 * expected.abs().max(1.0) {
                    return Err(Error::ModelMismatch(format!(
                        "{what} {omega} does not match level spacing {expected}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn with_hot_occupation(&self, occupation: f64) -> Result<Self> {
        let mut m = self.clone();
        m.hot = self.hot.with_occupation(occupation)?;
        Ok(m)
    }

    pub fn with_g(&self, g: f64) -> Result<Self> {
        check_rate("g", g)?;
        let mut m = self.clone();
        m.g = g;
        Ok(m)
    }

    pub fn with_kappa(&self, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::param("kappa", format!("must be > 0, got {kappa}")));
        }
        let mut m = self.clone();
        m.kappa = kappa;
        Ok(m)
    }

    pub fn kind(&self) -> EngineKind {
        self.kind
    }

    pub fn hot(&self) -> &BathSpec {
        &self.hot
    }

    pub fn cold(&self) -> &BathSpec {
        &self.cold
    }

    pub fn ancilla(&self) -> Option<&BathSpec> {
        self.ancilla.as_ref()
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn level_energies(&self) -> &[f64] {
        &self.level_energies
    }

    /// Ω_l = E₂ − E₁.
    pub fn lasing_frequency(&self) -> f64 {
        self.level_energies[2] - self.level_energies[1]
    }

    /// ω_h = E₂ − E_g (three-level) or E₃ − E_g (four-level).
    pub fn omega_h(&self) -> f64 {
        self.level_energies[self.kind.atom_dim() - 1] - self.level_energies[0]
    }

    pub fn omega_c(&self) -> f64 {
        self.level_energies[1] - self.level_energies[0]
    }

    /// ω_a = E₃ − E₂, four-level only.
    pub fn omega_a(&self) -> Option<f64> {
        (self.kind == EngineKind::FourLevel).then(|| self.level_energies[3] - self.level_energies[2])
    }

    pub(crate) fn n_h(&self) -> f64 {
        self.hot.occupation
    }

    pub(crate) fn n_c(&self) -> f64 {
        self.cold.occupation
    }

    pub(crate) fn n_a(&self) -> f64 {
        self.ancilla.map_or(0.0, |a| a.occupation)
    }

    pub(crate) fn gamma_a(&self) -> f64 {
        self.ancilla.map_or(0.0, |a| a.gamma)
    }
}

/// Standard parameter sets. Rates are in units of κ.
pub mod presets {
    use super::*;

    /// γ_h = γ_c = 32κ, g = 14κ, n̄_c = 0.05.
    pub fn three_level_reference(n_h: f64) -> EngineModel {
        EngineModel::three_level(
            BathSpec::new(32.0, n_h).expect("valid hot bath"),
            BathSpec::new(32.0, 0.05).expect("valid cold bath"),
            14.0,
            1.0,
        )
        .expect("valid reference model")
    }

    /// γ_h = γ_c = γ_a = 32κ, g = 14κ, n̄_c = n̄_a = 0.1.
    pub fn four_level_reference(n_h: f64) -> EngineModel {
        EngineModel::four_level(
            BathSpec::new(32.0, n_h).expect("valid hot bath"),
            BathSpec::new(32.0, 0.1).expect("valid cold bath"),
            BathSpec::new(32.0, 0.1).expect("valid ancilla bath"),
            14.0,
            1.0,
        )
        .expect("valid reference model")
    }
}
