//! External sources: per-species body forces, radiative heat supply, and the
//! thermal conductivity closure.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Scalar field of space and time.
pub type SpaceTimeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Thermal conductivity: a constant, or a function of (rho_1..rho_n, theta)
/// with declared lower bound and Lipschitz constant.
#[derive(Clone)]
pub enum Conductivity {
    Constant(f64),
    StateFn {
        f: Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>,
        kappa_min: f64,
        lipschitz: f64,
    },
}

impl std::fmt::Debug for Conductivity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Conductivity::Constant(k) => write!(f, "Conductivity::Constant({k})"),
            Conductivity::StateFn {
                kappa_min,
                lipschitz,
                ..
            } => write!(
                f,
                "Conductivity::StateFn {{ kappa_min: {kappa_min}, lipschitz: {lipschitz} }}"
            ),
        }
    }
}

impl Conductivity {
    pub fn eval(&self, rho: &[f64], theta: f64) -> f64 {
        match self {
            Conductivity::Constant(k) => *k,
            Conductivity::StateFn { f, .. } => f(rho, theta),
        }
    }

    pub fn kappa_min(&self) -> f64 {
        match self {
            Conductivity::Constant(k) => *k,
            Conductivity::StateFn { kappa_min, .. } => *kappa_min,
        }
    }
}

/// Body forces b_i(x, t), heat supply (rho r)(x, t) and conductivity.
/// Defaults: zero forces, zero supply.
#[derive(Clone)]
pub struct SourceConfig {
    body_force: Option<Vec<SpaceTimeFn>>,
    heat_supply: Option<SpaceTimeFn>,
    kappa: Conductivity,
}

impl std::fmt::Debug for SourceConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SourceConfig")
            .field("body_force", &self.body_force.as_ref().map(|b| b.len()))
            .field("heat_supply", &self.heat_supply.is_some())
            .field("kappa", &self.kappa)
            .finish()
    }
}

impl SourceConfig {
    pub fn new(
        body_force: Option<Vec<SpaceTimeFn>>,
        heat_supply: Option<SpaceTimeFn>,
        kappa: Conductivity,
    ) -> Result<Self> {
        if !(kappa.kappa_min() > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "thermal conductivity must be bounded away from zero, got kappa_min = {}",
                kappa.kappa_min()
            )));
        }
        Ok(Self {
            body_force,
            heat_supply,
            kappa,
        })
    }

    /// Zero forces and supply with a constant conductivity.
    pub fn zero(kappa: f64) -> Result<Self> {
        Self::new(None, None, Conductivity::Constant(kappa))
    }

    /// Body force on species `i` at (x, t); zero when unset.
    pub fn body_force(&self, i: usize, x: f64, t: f64) -> f64 {
        match &self.body_force {
            Some(fs) => fs[i](x, t),
            None => 0.0,
        }
    }

    pub fn has_body_force(&self) -> bool {
        self.body_force.is_some()
    }

    /// Heat supply density (rho r)(x, t); zero when unset.
    pub fn heat_supply(&self, x: f64, t: f64) -> f64 {
        match &self.heat_supply {
            Some(f) => f(x, t),
            None => 0.0,
        }
    }

    pub fn has_heat_supply(&self) -> bool {
        self.heat_supply.is_some()
    }

    pub fn kappa(&self) -> &Conductivity {
        &self.kappa
    }

    pub fn kappa_at(&self, rho: &[f64], theta: f64) -> f64 {
        self.kappa.eval(rho, theta)
    }
}
