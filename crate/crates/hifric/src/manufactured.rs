//! Manufactured analytic solutions for both models.
//!
//! Species fields come from a potential: rho_i = mean + d/dx phi_i and the
//! species momentum flux m_i = -d/dt phi_i + drift, so every mass balance
//! holds exactly. The momentum and energy defects are absorbed into the
//! body-force and heat-supply slots, making the fields exact solutions with
//! closed-form forcing. Used as convergence oracles and by the
//! relative-entropy identity audit.

use std::sync::Arc;

use crate::class1::StateI;
use crate::class2::StateII;
use crate::error::Result;
use crate::grid::Grid1D;
use crate::maxwell_stefan::FrictionMatrix;
use crate::sources::{Conductivity, SourceConfig};
use crate::thermo::ThermoModel;

/// Traveling cosine wave `mean + amp * cos(k x - sigma t + phase)` with
/// wavenumber `k = 2 pi mode / length`.
#[derive(Debug, Clone, Copy)]
pub struct Wave {
    pub mean: f64,
    pub amp: f64,
    pub mode: f64,
    pub sigma: f64,
    pub phase: f64,
}

impl Wave {
    fn k(&self, length: f64) -> f64 {
        2.0 * std::f64::consts::PI * self.mode / length
    }

    fn eta(&self, length: f64, x: f64, t: f64) -> f64 {
        self.k(length) * x - self.sigma * t + self.phase
    }

    pub fn value(&self, length: f64, x: f64, t: f64) -> f64 {
        self.mean + self.amp * self.eta(length, x, t).cos()
    }

    pub fn dt(&self, length: f64, x: f64, t: f64) -> f64 {
        self.amp * self.sigma * self.eta(length, x, t).sin()
    }

    pub fn dx(&self, length: f64, x: f64, t: f64) -> f64 {
        -self.amp * self.k(length) * self.eta(length, x, t).sin()
    }

    pub fn dxx(&self, length: f64, x: f64, t: f64) -> f64 {
        let k = self.k(length);
        -self.amp * k * k * self.eta(length, x, t).cos()
    }
}

/// One species: density wave plus a constant-offset momentum flux derived from
/// the same potential, keeping the mass balance exact.
#[derive(Debug, Clone, Copy)]
pub struct SpeciesWave {
    pub wave: Wave,
    /// Constant part of the momentum flux.
    pub drift: f64,
}

impl SpeciesWave {
    pub fn rho(&self, length: f64, x: f64, t: f64) -> f64 {
        self.wave.value(length, x, t)
    }

    pub fn rho_t(&self, length: f64, x: f64, t: f64) -> f64 {
        self.wave.dt(length, x, t)
    }

    pub fn rho_x(&self, length: f64, x: f64, t: f64) -> f64 {
        self.wave.dx(length, x, t)
    }

    /// Momentum flux m = -d/dt phi + drift with phi the density potential.
    pub fn m(&self, length: f64, x: f64, t: f64) -> f64 {
        let w = &self.wave;
        w.amp * w.sigma / w.k(length) * w.eta(length, x, t).cos() + self.drift
    }

    pub fn m_t(&self, length: f64, x: f64, t: f64) -> f64 {
        let w = &self.wave;
        w.amp * w.sigma * w.sigma / w.k(length) * w.eta(length, x, t).sin()
    }

    pub fn m_x(&self, length: f64, x: f64, t: f64) -> f64 {
        let w = &self.wave;
        -w.amp * w.sigma * w.eta(length, x, t).sin()
    }
}

/// Value together with first derivatives in t and x.
#[derive(Debug, Clone, Copy, Default)]
pub struct Jet {
    pub val: f64,
    pub dt: f64,
    pub dx: f64,
}

fn quotient(num: Jet, den: Jet) -> Jet {
    Jet {
        val: num.val / den.val,
        dt: (num.dt * den.val - num.val * den.dt) / (den.val * den.val),
        dx: (num.dx * den.val - num.val * den.dx) / (den.val * den.val),
    }
}

/// Manufactured Class-II solution: independent per-species waves and a
/// temperature wave; body forces and heat supply absorb the PDE defects.
#[derive(Debug, Clone)]
pub struct ManufacturedClass2 {
    pub length: f64,
    pub species: Vec<SpeciesWave>,
    pub theta: Wave,
    pub kappa: f64,
}

impl ManufacturedClass2 {
    pub fn n_species(&self) -> usize {
        self.species.len()
    }

    pub fn rho(&self, i: usize, x: f64, t: f64) -> f64 {
        self.species[i].rho(self.length, x, t)
    }

    pub fn theta_at(&self, x: f64, t: f64) -> f64 {
        self.theta.value(self.length, x, t)
    }

    fn rho_jet(&self, i: usize, x: f64, t: f64) -> Jet {
        let s = &self.species[i];
        Jet {
            val: s.rho(self.length, x, t),
            dt: s.rho_t(self.length, x, t),
            dx: s.rho_x(self.length, x, t),
        }
    }

    fn m_jet(&self, i: usize, x: f64, t: f64) -> Jet {
        let s = &self.species[i];
        Jet {
            val: s.m(self.length, x, t),
            dt: s.m_t(self.length, x, t),
            dx: s.m_x(self.length, x, t),
        }
    }

    fn theta_jet(&self, x: f64, t: f64) -> Jet {
        Jet {
            val: self.theta.value(self.length, x, t),
            dt: self.theta.dt(self.length, x, t),
            dx: self.theta.dx(self.length, x, t),
        }
    }

    pub fn v_jet(&self, i: usize, x: f64, t: f64) -> Jet {
        quotient(self.m_jet(i, x, t), self.rho_jet(i, x, t))
    }

    pub fn v(&self, i: usize, x: f64, t: f64) -> f64 {
        self.v_jet(i, x, t).val
    }

    /// Body force making the i-th momentum balance exact, including the
    /// interspecies friction at the manufactured state.
    pub fn body_force(
        &self,
        i: usize,
        x: f64,
        t: f64,
        thermo: &ThermoModel,
        friction: &FrictionMatrix,
    ) -> f64 {
        let n = self.n_species();
        let rho = self.rho_jet(i, x, t);
        let m = self.m_jet(i, x, t);
        let v = self.v_jet(i, x, t);
        let th = self.theta_jet(x, t);
        let r_gas = thermo.gas_constant(i);
        let dp_dx = r_gas * (rho.dx * th.val + rho.val * th.dx);
        let mut fric = 0.0;
        for j in 0..n {
            if j != i {
                let rho_j = self.rho(j, x, t);
                let v_j = self.v(j, x, t);
                fric += friction.get(i, j) * rho.val * rho_j * (v.val - v_j);
            }
        }
        let momentum_defect = m.dt + (m.dx * v.val + m.val * v.dx) + dp_dx
            + th.val / friction.epsilon() * fric;
        momentum_defect / rho.val
    }

    /// Heat supply (rho r) making the energy balance exact.
    pub fn heat_supply(
        &self,
        x: f64,
        t: f64,
        thermo: &ThermoModel,
        friction: &FrictionMatrix,
    ) -> f64 {
        let n = self.n_species();
        let th = self.theta_jet(x, t);
        let theta_xx = self.theta.dxx(self.length, x, t);
        let mut e_t = 0.0;
        let mut flux_x = 0.0;
        let mut work = 0.0;
        for j in 0..n {
            let c = thermo.specific_heat(j);
            let r_gas = thermo.gas_constant(j);
            let rho = self.rho_jet(j, x, t);
            let v = self.v_jet(j, x, t);
            e_t += c * (rho.dt * th.val + rho.val * th.dt)
                + 0.5 * rho.dt * v.val * v.val
                + rho.val * v.val * v.dt;
            // flux (rho_j e_j + p_j + rho_j v_j^2 / 2) v_j
            let h_j = (c + r_gas) * rho.val * th.val + 0.5 * rho.val * v.val * v.val;
            let h_j_x = (c + r_gas) * (rho.dx * th.val + rho.val * th.dx)
                + 0.5 * rho.dx * v.val * v.val
                + rho.val * v.val * v.dx;
            flux_x += h_j_x * v.val + h_j * v.dx;
            work += rho.val * self.body_force(j, x, t, thermo, friction) * v.val;
        }
        e_t + flux_x - self.kappa * theta_xx - work
    }

    /// Sample the exact fields on a grid.
    pub fn state_at(&self, grid: &Grid1D, thermo: &ThermoModel, t: f64) -> Result<StateII> {
        let n = self.n_species();
        let nc = grid.ncells();
        let mut rho = vec![vec![0.0; nc]; n];
        let mut v = vec![vec![0.0; nc]; n];
        let mut theta = vec![0.0; nc];
        for j in 0..nc {
            let x = grid.center(j);
            theta[j] = self.theta_at(x, t);
            for i in 0..n {
                rho[i][j] = self.rho(i, x, t);
                v[i][j] = self.v(i, x, t);
            }
        }
        StateII::from_primitives(t, rho, v, theta, thermo)
    }

    /// Forcing closures for running the solver against this solution.
    pub fn source_config(
        &self,
        thermo: &ThermoModel,
        friction: &FrictionMatrix,
    ) -> Result<SourceConfig> {
        let n = self.n_species();
        let mut body = Vec::with_capacity(n);
        for i in 0..n {
            let me = self.clone();
            let th = thermo.clone();
            let fr = friction.clone();
            body.push(Arc::new(move |x: f64, t: f64| me.body_force(i, x, t, &th, &fr))
                as Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>);
        }
        let me = self.clone();
        let th = thermo.clone();
        let fr = friction.clone();
        let heat = Arc::new(move |x: f64, t: f64| me.heat_supply(x, t, &th, &fr))
            as Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
        SourceConfig::new(Some(body), Some(heat), Conductivity::Constant(self.kappa))
    }
}

/// Manufactured Class-I solution. Species waves define the total species
/// fluxes rho_i (v + u_i); the barycentric velocity and the diffusional
/// velocities follow, and the body forces are back-solved so the
/// Maxwell-Stefan system reproduces exactly that u.
#[derive(Debug, Clone)]
pub struct ManufacturedClass1 {
    pub length: f64,
    pub species: Vec<SpeciesWave>,
    pub theta: Wave,
    pub kappa: f64,
}

impl ManufacturedClass1 {
    pub fn n_species(&self) -> usize {
        self.species.len()
    }

    fn rho_jet(&self, i: usize, x: f64, t: f64) -> Jet {
        let s = &self.species[i];
        Jet {
            val: s.rho(self.length, x, t),
            dt: s.rho_t(self.length, x, t),
            dx: s.rho_x(self.length, x, t),
        }
    }

    fn m_jet(&self, i: usize, x: f64, t: f64) -> Jet {
        let s = &self.species[i];
        Jet {
            val: s.m(self.length, x, t),
            dt: s.m_t(self.length, x, t),
            dx: s.m_x(self.length, x, t),
        }
    }

    fn theta_jet(&self, x: f64, t: f64) -> Jet {
        Jet {
            val: self.theta.value(self.length, x, t),
            dt: self.theta.dt(self.length, x, t),
            dx: self.theta.dx(self.length, x, t),
        }
    }

    fn totals(&self, x: f64, t: f64) -> (Jet, Jet) {
        let n = self.n_species();
        let mut rho = Jet::default();
        let mut m = Jet::default();
        for i in 0..n {
            let r = self.rho_jet(i, x, t);
            let mi = self.m_jet(i, x, t);
            rho.val += r.val;
            rho.dt += r.dt;
            rho.dx += r.dx;
            m.val += mi.val;
            m.dt += mi.dt;
            m.dx += mi.dx;
        }
        (rho, m)
    }

    /// Barycentric velocity jet.
    pub fn v_jet(&self, x: f64, t: f64) -> Jet {
        let (rho, m) = self.totals(x, t);
        quotient(m, rho)
    }

    /// Diffusional velocity jet of species i: u_i = m_i / rho_i - v.
    pub fn u_jet(&self, i: usize, x: f64, t: f64) -> Jet {
        let species_vel = quotient(self.m_jet(i, x, t), self.rho_jet(i, x, t));
        let v = self.v_jet(x, t);
        Jet {
            val: species_vel.val - v.val,
            dt: species_vel.dt - v.dt,
            dx: species_vel.dx - v.dx,
        }
    }

    /// Driving force that makes the Maxwell-Stefan system produce exactly the
    /// manufactured u at this point.
    fn target_force(
        &self,
        i: usize,
        x: f64,
        t: f64,
        friction: &FrictionMatrix,
    ) -> f64 {
        let n = self.n_species();
        let theta = self.theta_jet(x, t).val;
        let rho_i = self.rho_jet(i, x, t).val;
        let u_i = self.u_jet(i, x, t).val;
        let mut sum = 0.0;
        for j in 0..n {
            if j != i {
                let rho_j = self.rho_jet(j, x, t).val;
                let u_j = self.u_jet(j, x, t).val;
                sum += friction.get(i, j) * theta * rho_i * rho_j * (u_i - u_j);
            }
        }
        -sum / friction.epsilon()
    }

    /// Total momentum forcing required by the barycentric momentum balance.
    fn total_force(&self, x: f64, t: f64, thermo: &ThermoModel) -> f64 {
        let (rho, m) = self.totals(x, t);
        let v = quotient(m, rho);
        let th = self.theta_jet(x, t);
        let dp_dx = self.total_pressure_gradient(x, t, thermo, &th);
        m.dt + (m.dx * v.val + m.val * v.dx) + dp_dx
    }

    fn total_pressure_gradient(&self, x: f64, t: f64, thermo: &ThermoModel, th: &Jet) -> f64 {
        (0..self.n_species())
            .map(|i| {
                let rho = self.rho_jet(i, x, t);
                thermo.gas_constant(i) * (rho.dx * th.val + rho.val * th.dx)
            })
            .sum()
    }

    /// Body force with both roles: realizing the target u through the
    /// Maxwell-Stefan balance and supplying the aggregate momentum forcing.
    pub fn body_force(
        &self,
        i: usize,
        x: f64,
        t: f64,
        thermo: &ThermoModel,
        friction: &FrictionMatrix,
    ) -> f64 {
        let (rho_tot, _) = self.totals(x, t);
        let th = self.theta_jet(x, t);
        let rho_i = self.rho_jet(i, x, t);
        let dp_tot = self.total_pressure_gradient(x, t, thermo, &th);
        let dp_i = thermo.gas_constant(i) * (rho_i.dx * th.val + rho_i.val * th.dx);
        let aggregate = self.total_force(x, t, thermo) - dp_tot;
        let d_i = self.target_force(i, x, t, friction);
        (rho_i.val / rho_tot.val * aggregate + dp_i - d_i) / rho_i.val
    }

    /// Heat supply making the Class-I energy balance exact.
    pub fn heat_supply(
        &self,
        x: f64,
        t: f64,
        thermo: &ThermoModel,
        friction: &FrictionMatrix,
    ) -> f64 {
        let n = self.n_species();
        let (rho_tot, m_tot) = self.totals(x, t);
        let v = quotient(m_tot, rho_tot);
        let th = self.theta_jet(x, t);
        let theta_xx = self.theta.dxx(self.length, x, t);

        let mut internal = Jet::default(); // rho e = sum c_j rho_j theta
        let mut p_tot = Jet::default();
        for j in 0..n {
            let c = thermo.specific_heat(j);
            let r_gas = thermo.gas_constant(j);
            let rho = self.rho_jet(j, x, t);
            internal.val += c * rho.val * th.val;
            internal.dt += c * (rho.dt * th.val + rho.val * th.dt);
            internal.dx += c * (rho.dx * th.val + rho.val * th.dx);
            p_tot.val += r_gas * rho.val * th.val;
            p_tot.dx += r_gas * (rho.dx * th.val + rho.val * th.dx);
        }
        let e_t = internal.dt + 0.5 * rho_tot.dt * v.val * v.val + rho_tot.val * v.val * v.dt;
        let enthalpy = internal.val + p_tot.val + 0.5 * rho_tot.val * v.val * v.val;
        let enthalpy_x = internal.dx
            + p_tot.dx
            + 0.5 * rho_tot.dx * v.val * v.val
            + rho_tot.val * v.val * v.dx;
        let conv_flux_x = enthalpy_x * v.val + enthalpy * v.dx;

        // diffusive enthalpy flux sum (c_j + R_j) rho_j theta u_j
        let mut diff_flux_x = 0.0;
        let mut force_work_u = 0.0;
        for j in 0..n {
            let c = thermo.specific_heat(j);
            let r_gas = thermo.gas_constant(j);
            let rho = self.rho_jet(j, x, t);
            let u = self.u_jet(j, x, t);
            diff_flux_x += (c + r_gas)
                * ((rho.dx * th.val + rho.val * th.dx) * u.val + rho.val * th.val * u.dx);
            force_work_u += rho.val * self.body_force(j, x, t, thermo, friction) * u.val;
        }
        let total_force_work = self.total_force(x, t, thermo) * v.val;
        e_t + conv_flux_x - self.kappa * theta_xx + diff_flux_x - total_force_work - force_work_u
    }

    /// Sample the exact primitives on a grid; the returned state recomputes its
    /// diffusional velocities through the discrete Maxwell-Stefan solve.
    pub fn state_at(
        &self,
        grid: &Grid1D,
        thermo: &ThermoModel,
        friction: &FrictionMatrix,
        sources: &SourceConfig,
        t: f64,
    ) -> Result<StateI> {
        let n = self.n_species();
        let nc = grid.ncells();
        let mut rho = vec![vec![0.0; nc]; n];
        let mut v = vec![0.0; nc];
        let mut theta = vec![0.0; nc];
        for j in 0..nc {
            let x = grid.center(j);
            theta[j] = self.theta_jet(x, t).val;
            v[j] = self.v_jet(x, t).val;
            for i in 0..n {
                rho[i][j] = self.rho_jet(i, x, t).val;
            }
        }
        StateI::from_primitives(t, rho, v, theta, grid, thermo, friction, sources)
    }

    pub fn source_config(
        &self,
        thermo: &ThermoModel,
        friction: &FrictionMatrix,
    ) -> Result<SourceConfig> {
        let n = self.n_species();
        let mut body = Vec::with_capacity(n);
        for i in 0..n {
            let me = self.clone();
            let th = thermo.clone();
            let fr = friction.clone();
            body.push(Arc::new(move |x: f64, t: f64| me.body_force(i, x, t, &th, &fr))
                as Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>);
        }
        let me = self.clone();
        let th = thermo.clone();
        let fr = friction.clone();
        let heat = Arc::new(move |x: f64, t: f64| me.heat_supply(x, t, &th, &fr))
            as Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
        SourceConfig::new(Some(body), Some(heat), Conductivity::Constant(self.kappa))
    }
}

/// A smooth two-species Class-II solution with gentle waves, staying well
/// inside the default validity domain.
pub fn smooth_class2(n: usize, length: f64) -> ManufacturedClass2 {
    let species = (0..n)
        .map(|i| SpeciesWave {
            wave: Wave {
                mean: 1.6 + 0.3 * i as f64,
                amp: 0.12 + 0.03 * i as f64,
                mode: 1.0 + (i % 2) as f64,
                sigma: 0.7 - 0.2 * i as f64,
                phase: 0.4 * i as f64,
            },
            drift: 0.05 * (i as f64 + 1.0) * if i % 2 == 0 { 1.0 } else { -1.0 },
        })
        .collect();
    ManufacturedClass2 {
        length,
        species,
        theta: Wave {
            mean: 1.0,
            amp: 0.1,
            mode: 1.0,
            sigma: 0.5,
            phase: 0.2,
        },
        kappa: 0.02,
    }
}

/// A smooth Class-I solution with nonzero diffusional velocities.
pub fn smooth_class1(n: usize, length: f64) -> ManufacturedClass1 {
    let species = (0..n)
        .map(|i| SpeciesWave {
            wave: Wave {
                mean: 1.5 + 0.25 * i as f64,
                amp: 0.1 + 0.02 * i as f64,
                mode: 1.0,
                sigma: 0.6 - 0.15 * i as f64,
                phase: 0.3 + 0.5 * i as f64,
            },
            drift: 0.04 * (i as f64 + 1.0) * if i % 2 == 0 { 1.0 } else { -1.0 },
        })
        .collect();
    ManufacturedClass1 {
        length,
        species,
        theta: Wave {
            mean: 1.1,
            amp: 0.08,
            mode: 1.0,
            sigma: 0.4,
            phase: 0.1,
        },
        kappa: 0.02,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo::ValidityDomain;

    fn fd<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    fn thermo(n: usize) -> ThermoModel {
        ThermoModel::new(
            (0..n).map(|i| 1.0 + 0.3 * i as f64).collect(),
            (0..n).map(|i| 1.5 - 0.2 * i as f64).collect(),
            ValidityDomain::new(1e-3, 1e3).unwrap(),
            1e-12,
        )
        .unwrap()
    }

    #[test]
    fn class2_jets_match_finite_differences() {
        let mf = smooth_class2(2, 1.0);
        let h = 1e-6;
        for &(x, t) in &[(0.13, 0.4), (0.71, 1.2)] {
            for i in 0..2 {
                let v = mf.v_jet(i, x, t);
                assert!((v.dx - fd(|y| mf.v(i, y, t), x, h)).abs() < 1e-7);
                assert!((v.dt - fd(|s| mf.v(i, x, s), t, h)).abs() < 1e-7);
                let rj = mf.rho_jet(i, x, t);
                assert!((rj.dx - fd(|y| mf.rho(i, y, t), x, h)).abs() < 1e-7);
                assert!((rj.dt - fd(|s| mf.rho(i, x, s), t, h)).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn class2_mass_balance_is_exact() {
        let mf = smooth_class2(3, 2.0);
        for &(x, t) in &[(0.2, 0.1), (1.4, 0.9)] {
            for i in 0..3 {
                let rho = mf.rho_jet(i, x, t);
                let m = mf.m_jet(i, x, t);
                assert!((rho.dt + m.dx).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn class2_forcing_closes_momentum_balance() {
        // with the manufactured b_i, d/dt m_i + d/dx (m_i v_i + p_i) + friction = rho_i b_i
        let mf = smooth_class2(2, 1.0);
        let th = thermo(2);
        let fr = FrictionMatrix::from_upper_triangle(2, &[0.8], 0.1).unwrap();
        let h = 1e-6;
        for &(x, t) in &[(0.3, 0.2), (0.8, 0.7)] {
            for i in 0..2 {
                let m_t = fd(|s| mf.m_jet(i, x, s).val, t, h);
                let flux = |y: f64| {
                    let m = mf.m_jet(i, y, t).val;
                    let v = mf.v_jet(i, y, t).val;
                    let p = th.gas_constant(i) * mf.rho(i, y, t) * mf.theta_at(y, t);
                    m * v + p
                };
                let flux_x = fd(flux, x, h);
                let mut fric = 0.0;
                for j in 0..2 {
                    if j != i {
                        fric += fr.get(i, j) * mf.rho(i, x, t) * mf.rho(j, x, t)
                            * (mf.v(i, x, t) - mf.v(j, x, t));
                    }
                }
                let lhs = m_t + flux_x + mf.theta_at(x, t) / fr.epsilon() * fric;
                let rhs = mf.rho(i, x, t) * mf.body_force(i, x, t, &th, &fr);
                assert!(
                    (lhs - rhs).abs() < 1e-6 * (1.0 + rhs.abs()),
                    "momentum defect {} at ({x},{t})",
                    lhs - rhs
                );
            }
        }
    }

    #[test]
    fn class2_forcing_closes_energy_balance() {
        let mf = smooth_class2(2, 1.0);
        let th = thermo(2);
        let fr = FrictionMatrix::from_upper_triangle(2, &[0.8], 0.1).unwrap();
        let h = 1e-5;
        for &(x, t) in &[(0.37, 0.25)] {
            let energy = |y: f64, s: f64| -> f64 {
                (0..2)
                    .map(|j| {
                        let rho = mf.rho(j, y, s);
                        let v = mf.v(j, y, s);
                        rho * th.specific_heat(j) * mf.theta_at(y, s) + 0.5 * rho * v * v
                    })
                    .sum()
            };
            let e_t = fd(|s| energy(x, s), t, h);
            let flux = |y: f64| -> f64 {
                (0..2)
                    .map(|j| {
                        let rho = mf.rho(j, y, t);
                        let v = mf.v(j, y, t);
                        let p = th.gas_constant(j) * rho * mf.theta_at(y, t);
                        (rho * th.specific_heat(j) * mf.theta_at(y, t) + p + 0.5 * rho * v * v) * v
                    })
                    .sum()
            };
            let flux_x = fd(flux, x, h);
            let cond = mf.kappa * fd(|y| fd(|z| mf.theta_at(z, t), y, 1e-4), x, 1e-4);
            let work: f64 = (0..2)
                .map(|j| mf.rho(j, x, t) * mf.body_force(j, x, t, &th, &fr) * mf.v(j, x, t))
                .sum();
            let lhs = e_t + flux_x - cond - work;
            let rhs = mf.heat_supply(x, t, &th, &fr);
            assert!(
                (lhs - rhs).abs() < 1e-4 * (1.0 + rhs.abs()),
                "energy defect {}",
                lhs - rhs
            );
        }
    }

    #[test]
    fn class1_constraint_and_mass_balance_are_exact() {
        let mf = smooth_class1(3, 1.0);
        for &(x, t) in &[(0.21, 0.3), (0.77, 0.9)] {
            // sum rho_i u_i = 0 by construction
            let s: f64 = (0..3)
                .map(|i| mf.rho_jet(i, x, t).val * mf.u_jet(i, x, t).val)
                .sum();
            assert!(s.abs() < 1e-13);
            for i in 0..3 {
                let rho = mf.rho_jet(i, x, t);
                let m = mf.m_jet(i, x, t);
                assert!((rho.dt + m.dx).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn class1_body_force_realizes_target_u() {
        // the Maxwell-Stefan system assembled from the manufactured body force
        // and analytic pressure gradients must return exactly the target u
        let mf = smooth_class1(2, 1.0);
        let th = thermo(2);
        let fr = FrictionMatrix::from_upper_triangle(2, &[0.9], 0.05).unwrap();
        for &(x, t) in &[(0.31, 0.2), (0.66, 0.8)] {
            let rho: Vec<f64> = (0..2).map(|i| mf.rho_jet(i, x, t).val).collect();
            let bf: Vec<f64> = (0..2).map(|i| mf.body_force(i, x, t, &th, &fr)).collect();
            let gp: Vec<f64> = (0..2)
                .map(|i| {
                    let r = mf.rho_jet(i, x, t);
                    let tj = mf.theta_jet(x, t);
                    th.gas_constant(i) * (r.dx * tj.val + r.val * tj.dx)
                })
                .collect();
            let forces = crate::maxwell_stefan::assemble_forces(&rho, &bf, &gp);
            let theta = mf.theta_jet(x, t).val;
            let u = crate::maxwell_stefan::solve(&rho, theta, &fr, &forces).unwrap();
            for i in 0..2 {
                let target = mf.u_jet(i, x, t).val;
                assert!(
                    (u.0[i] - target).abs() < 1e-12 * target.abs().max(1e-6),
                    "u[{i}] = {} vs target {target}",
                    u.0[i]
                );
            }
        }
    }
}
