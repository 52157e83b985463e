//! Class-I solver: n mass balances with Maxwell-Stefan diffusional fluxes, one
//! barycentric momentum balance and one total-energy balance, plus the
//! reformulation residuals that measure its distance from the Class-II model.

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::maxwell_stefan::{self, FrictionMatrix};
use crate::sources::SourceConfig;
use crate::thermo::ThermoModel;

/// Per-cell Class-I unknowns. The diffusional velocities are diagnostic: they
/// are recomputed from the state whenever one is constructed.
#[derive(Debug, Clone)]
pub struct StateI {
    pub time: f64,
    /// rho[i][cell]
    pub rho: Vec<Vec<f64>>,
    /// barycentric velocity per cell
    pub v: Vec<f64>,
    pub theta: Vec<f64>,
    /// u[i][cell], solving the Maxwell-Stefan system for the current state
    pub u: Vec<Vec<f64>>,
    /// momentum[cell] = rho v
    pub momentum: Vec<f64>,
    /// energy[cell] = rho e + 1/2 rho v^2
    pub energy: Vec<f64>,
}

/// Solve the Maxwell-Stefan system on every cell of a primitive field set,
/// with central-difference pressure gradients and forces from `sources`.
pub fn diffusional_velocities(
    rho: &[Vec<f64>],
    theta: &[f64],
    time: f64,
    grid: &Grid1D,
    thermo: &ThermoModel,
    friction: &FrictionMatrix,
    sources: &SourceConfig,
) -> Result<Vec<Vec<f64>>> {
    let n = rho.len();
    let nc = theta.len();
    let mut p = vec![vec![0.0; nc]; n];
    for i in 0..n {
        for j in 0..nc {
            p[i][j] = thermo.gas_constant(i) * rho[i][j] * theta[j];
        }
    }
    let grad_p: Vec<Vec<f64>> = (0..n).map(|i| grid.gradient(&p[i])).collect();
    let mut u = vec![vec![0.0; nc]; n];
    let mut rho_cell = vec![0.0; n];
    let mut bf_cell = vec![0.0; n];
    let mut gp_cell = vec![0.0; n];
    for j in 0..nc {
        let x = grid.center(j);
        for i in 0..n {
            rho_cell[i] = rho[i][j];
            bf_cell[i] = sources.body_force(i, x, time);
            gp_cell[i] = grad_p[i][j];
        }
        let forces = maxwell_stefan::assemble_forces(&rho_cell, &bf_cell, &gp_cell);
        let sol = maxwell_stefan::solve(&rho_cell, theta[j], friction, &forces).map_err(|e| {
            match e {
                Error::InconsistentForces { sum, tol } => Error::InconsistentForces { sum, tol },
                Error::Domain { what, value, lo, hi, .. } => Error::Domain {
                    what,
                    cell: j,
                    value,
                    lo,
                    hi,
                },
                other => other,
            }
        })?;
        for i in 0..n {
            u[i][j] = sol.0[i];
        }
    }
    Ok(u)
}

impl StateI {
    /// Build a state from primitives; recomputes the diffusional velocities.
    pub fn from_primitives(
        time: f64,
        rho: Vec<Vec<f64>>,
        v: Vec<f64>,
        theta: Vec<f64>,
        grid: &Grid1D,
        thermo: &ThermoModel,
        friction: &FrictionMatrix,
        sources: &SourceConfig,
    ) -> Result<Self> {
        let n = rho.len();
        if n == 0 || n != thermo.n_species() || n != friction.n_species() {
            return Err(Error::Shape(format!(
                "species counts disagree: rho {}, thermo {}, friction {}",
                n,
                thermo.n_species(),
                friction.n_species()
            )));
        }
        let nc = theta.len();
        if v.len() != nc || rho.iter().any(|f| f.len() != nc) || nc != grid.ncells() {
            return Err(Error::Shape("field lengths disagree with grid".into()));
        }
        let u = diffusional_velocities(&rho, &theta, time, grid, thermo, friction, sources)?;
        let mut s = Self {
            time,
            rho,
            v,
            theta,
            u,
            momentum: vec![0.0; nc],
            energy: vec![0.0; nc],
        };
        s.sync_conservative(thermo);
        s.check_validity(thermo)?;
        Ok(s)
    }

    pub fn n_species(&self) -> usize {
        self.rho.len()
    }

    pub fn ncells(&self) -> usize {
        self.theta.len()
    }

    pub fn sync_conservative(&mut self, thermo: &ThermoModel) {
        let (n, nc) = (self.n_species(), self.ncells());
        for j in 0..nc {
            let rho_tot: f64 = (0..n).map(|i| self.rho[i][j]).sum();
            self.momentum[j] = rho_tot * self.v[j];
            let mut e = 0.5 * rho_tot * self.v[j] * self.v[j];
            for i in 0..n {
                e += self.rho[i][j] * thermo.specific_heat(i) * self.theta[j];
            }
            self.energy[j] = e;
        }
    }

    /// Strict positivity per species plus the shared validity bounds.
    pub fn check_validity(&self, thermo: &ThermoModel) -> Result<()> {
        let dom = thermo.validity();
        let (n, nc) = (self.n_species(), self.ncells());
        for j in 0..nc {
            let mut total = 0.0;
            for i in 0..n {
                let r = self.rho[i][j];
                if !(r >= dom.gamma && r <= dom.big_m) {
                    return Err(Error::Domain {
                        what: "species density (class-I requires rho_i >= gamma)",
                        cell: j,
                        value: r,
                        lo: dom.gamma,
                        hi: dom.big_m,
                    });
                }
                total += r;
            }
            if !(total <= dom.big_m) {
                return Err(Error::Domain {
                    what: "total density",
                    cell: j,
                    value: total,
                    lo: dom.gamma,
                    hi: dom.big_m,
                });
            }
            if !(self.theta[j] >= dom.gamma && self.theta[j] <= dom.big_m) {
                return Err(Error::Domain {
                    what: "temperature",
                    cell: j,
                    value: self.theta[j],
                    lo: dom.gamma,
                    hi: dom.big_m,
                });
            }
        }
        Ok(())
    }

    pub fn total_masses(&self, grid: &Grid1D) -> Vec<f64> {
        self.rho.iter().map(|r| grid.integrate(r)).collect()
    }

    pub fn total_momentum(&self, grid: &Grid1D) -> f64 {
        grid.integrate(&self.momentum)
    }

    pub fn total_energy(&self, grid: &Grid1D) -> f64 {
        grid.integrate(&self.energy)
    }

    pub fn integrated_entropy(&self, thermo: &ThermoModel, grid: &Grid1D) -> f64 {
        let per_cell: Vec<f64> = (0..self.ncells())
            .map(|j| {
                (0..self.n_species())
                    .map(|i| thermo.rho_eta(i, self.rho[i][j], self.theta[j]))
                    .sum()
            })
            .collect();
        grid.integrate(&per_cell)
    }

    /// Largest constraint defect |sum_i rho_i u_i| over cells.
    pub fn constraint_defect(&self) -> f64 {
        let (n, nc) = (self.n_species(), self.ncells());
        (0..nc)
            .map(|j| {
                (0..n)
                    .map(|i| self.rho[i][j] * self.u[i][j])
                    .sum::<f64>()
                    .abs()
            })
            .fold(0.0, f64::max)
    }
}

fn step_limits(
    state: &StateI,
    grid: &Grid1D,
    thermo: &ThermoModel,
    sources: &SourceConfig,
) -> (f64, f64) {
    let (n, nc) = (state.n_species(), state.ncells());
    let mut speed_max: f64 = 0.0;
    let mut heat_cap_min = f64::INFINITY;
    let mut kappa_max: f64 = 0.0;
    let mut rho_cell = vec![0.0; n];
    for j in 0..nc {
        let mut heat_cap = 0.0;
        for i in 0..n {
            rho_cell[i] = state.rho[i][j];
            let a = thermo.sound_speed(i, state.theta[j]);
            speed_max = speed_max.max((state.v[j] + state.u[i][j]).abs() + a);
            heat_cap += state.rho[i][j] * thermo.specific_heat(i);
        }
        heat_cap_min = heat_cap_min.min(heat_cap);
        kappa_max = kappa_max.max(sources.kappa_at(&rho_cell, state.theta[j]));
    }
    let advective = grid.dx() / speed_max;
    let diffusive = grid.dx() * grid.dx() * heat_cap_min / (2.0 * kappa_max);
    (advective, diffusive)
}

/// Largest stable step with species velocities v + u_i; advective and
/// diffusive Courant numbers add, as in the Class-II contract.
pub fn admissible_dt(
    state: &StateI,
    grid: &Grid1D,
    thermo: &ThermoModel,
    sources: &SourceConfig,
) -> f64 {
    let (advective, diffusive) = step_limits(state, grid, thermo, sources);
    1.0 / (1.0 / advective + 1.0 / diffusive)
}

/// Step size contract mirroring the Class-II one.
pub fn cfl_dt(
    state: &StateI,
    grid: &Grid1D,
    thermo: &ThermoModel,
    sources: &SourceConfig,
    cfl_number: f64,
) -> f64 {
    let (advective, diffusive) = step_limits(state, grid, thermo, sources);
    cfl_number * advective.min(diffusive)
}

/// One step: species mass advected with v + u_i, Rusanov flux for the
/// barycentric momentum and the convective energy, central fluxes for heat
/// conduction, all through shared face values so every balance telescopes.
pub fn step(
    state: &StateI,
    grid: &Grid1D,
    thermo: &ThermoModel,
    friction: &FrictionMatrix,
    sources: &SourceConfig,
    dt: f64,
) -> Result<StateI> {
    let admissible = admissible_dt(state, grid, thermo, sources);
    if dt > admissible * (1.0 + 1e-9) {
        return Err(Error::StepSize { dt, admissible });
    }
    let (n, nc) = (state.n_species(), state.ncells());
    let dx = grid.dx();
    let lam = dt / dx;
    let t_mid = state.time + 0.5 * dt;

    let mut rho_new = state.rho.clone();
    let mut mom_new = state.momentum.clone();
    let mut e_new = state.energy.clone();

    let mut f_rho = vec![vec![0.0; nc]; n];
    let mut f_mom = vec![0.0; nc];
    let mut f_e = vec![0.0; nc];
    let mut speed = vec![0.0; nc];
    for j in 0..nc {
        let theta = state.theta[j];
        let vel = state.v[j];
        let rho_tot: f64 = (0..n).map(|i| state.rho[i][j]).sum();
        let mut p_tot = 0.0;
        let mut rho_e = 0.0;
        let mut diff_e = 0.0;
        let mut s: f64 = 0.0;
        for i in 0..n {
            let rho = state.rho[i][j];
            let p_i = thermo.gas_constant(i) * rho * theta;
            p_tot += p_i;
            rho_e += rho * thermo.specific_heat(i) * theta;
            f_rho[i][j] = rho * (vel + state.u[i][j]);
            diff_e += (rho * thermo.specific_heat(i) * theta + p_i) * state.u[i][j];
            s = s.max((vel + state.u[i][j]).abs() + thermo.sound_speed(i, theta));
        }
        f_mom[j] = rho_tot * vel * vel + p_tot;
        f_e[j] = (rho_e + p_tot + 0.5 * rho_tot * vel * vel) * vel + diff_e;
        speed[j] = s;
    }

    let mut rho_face = vec![0.0; n];
    for j in 0..nc {
        let r = grid.right(j);
        let s = speed[j].max(speed[r]);
        for i in 0..n {
            let flux = 0.5 * (f_rho[i][j] + f_rho[i][r]) - 0.5 * s * (state.rho[i][r] - state.rho[i][j]);
            rho_new[i][j] -= lam * flux;
            rho_new[i][r] += lam * flux;
            rho_face[i] = 0.5 * (state.rho[i][j] + state.rho[i][r]);
        }
        let flux_m =
            0.5 * (f_mom[j] + f_mom[r]) - 0.5 * s * (state.momentum[r] - state.momentum[j]);
        mom_new[j] -= lam * flux_m;
        mom_new[r] += lam * flux_m;
        let theta_face = 0.5 * (state.theta[j] + state.theta[r]);
        let kappa_face = sources.kappa_at(&rho_face, theta_face);
        let heat = -kappa_face * (state.theta[r] - state.theta[j]) / dx;
        let flux_e = 0.5 * (f_e[j] + f_e[r]) - 0.5 * s * (state.energy[r] - state.energy[j]) + heat;
        e_new[j] -= lam * flux_e;
        e_new[r] += lam * flux_e;
    }

    if sources.has_body_force() || sources.has_heat_supply() {
        for j in 0..nc {
            let x = grid.center(j);
            let mut force_tot = 0.0;
            let mut work_term = 0.0;
            for i in 0..n {
                let b = sources.body_force(i, x, t_mid);
                force_tot += state.rho[i][j] * b;
                work_term += state.rho[i][j] * b * (state.v[j] + state.u[i][j]);
            }
            mom_new[j] += dt * force_tot;
            e_new[j] += dt * (work_term + sources.heat_supply(x, t_mid));
        }
    }

    // recover primitives
    let mut v_new = vec![0.0; nc];
    let mut theta_new = vec![0.0; nc];
    for j in 0..nc {
        let rho_tot: f64 = (0..n).map(|i| rho_new[i][j]).sum();
        if !(rho_tot > 0.0) {
            return Err(Error::Domain {
                what: "total density",
                cell: j,
                value: rho_tot,
                lo: thermo.validity().gamma,
                hi: thermo.validity().big_m,
            });
        }
        v_new[j] = mom_new[j] / rho_tot;
        let heat_cap: f64 = (0..n)
            .map(|i| rho_new[i][j] * thermo.specific_heat(i))
            .sum();
        theta_new[j] = (e_new[j] - 0.5 * rho_tot * v_new[j] * v_new[j]) / heat_cap;
    }

    StateI::from_primitives(
        state.time + dt,
        rho_new,
        v_new,
        theta_new,
        grid,
        thermo,
        friction,
        sources,
    )
}

/// Momentum and energy reformulation residuals of the embedded Class-I
/// solution, evaluated by central differences in space and time.
#[derive(Debug, Clone)]
pub struct Residuals {
    /// R[i][cell]: momentum residual density.
    pub r: Vec<Vec<f64>>,
    /// Q[cell]: energy residual density.
    pub q: Vec<f64>,
}

impl Residuals {
    /// Grid-weighted L1 norm over species and cells.
    pub fn r_norm(&self, grid: &Grid1D) -> f64 {
        self.r.iter().map(|row| grid.l1_norm(row)).sum()
    }

    pub fn q_norm(&self, grid: &Grid1D) -> f64 {
        grid.l1_norm(&self.q)
    }
}

/// Evaluate R_i and Q at the middle of three equally spaced snapshots.
pub fn residuals(history: &[&StateI], grid: &Grid1D) -> Result<Residuals> {
    if history.len() != 3 {
        return Err(Error::InvalidArgument(format!(
            "residuals need exactly 3 snapshots, got {}",
            history.len()
        )));
    }
    let (s0, s1, s2) = (history[0], history[1], history[2]);
    let dt01 = s1.time - s0.time;
    let dt12 = s2.time - s1.time;
    if !(dt01 > 0.0) || (dt12 - dt01).abs() > 1e-9 * dt01 {
        return Err(Error::InvalidArgument(format!(
            "snapshots must be equally spaced in time, got gaps {dt01:.3e} and {dt12:.3e}"
        )));
    }
    let dt = dt01;
    let (n, nc) = (s1.n_species(), s1.ncells());

    let mut r = vec![vec![0.0; nc]; n];
    for i in 0..n {
        // cell fields at the three time levels
        let flux0: Vec<f64> = (0..nc).map(|j| s0.rho[i][j] * s0.u[i][j]).collect();
        let flux1: Vec<f64> = (0..nc).map(|j| s1.rho[i][j] * s1.u[i][j]).collect();
        let flux2: Vec<f64> = (0..nc).map(|j| s2.rho[i][j] * s2.u[i][j]).collect();
        let flux_v: Vec<f64> = (0..nc).map(|j| flux1[j] * s1.v[j]).collect();
        let flux_u: Vec<f64> = (0..nc).map(|j| flux1[j] * s1.u[i][j]).collect();
        for j in 0..nc {
            let ddt = (flux2[j] - flux0[j]) / (2.0 * dt);
            let div_flux = grid.central_diff(&flux1, j);
            let div_flux_v = grid.central_diff(&flux_v, j);
            let div_flux_u = grid.central_diff(&flux_u, j);
            r[i][j] = -div_flux * s1.v[j] + ddt + 2.0 * div_flux_v + div_flux_u;
        }
    }

    let kin = |s: &StateI, j: usize| -> f64 {
        (0..n).map(|i| 0.5 * s.rho[i][j] * s.u[i][j] * s.u[i][j]).sum()
    };
    let kin_u: Vec<f64> = (0..nc)
        .map(|j| {
            (0..n)
                .map(|i| 0.5 * s1.rho[i][j] * s1.u[i][j] * s1.u[i][j] * s1.u[i][j])
                .sum()
        })
        .collect();
    let kin_v: Vec<f64> = (0..nc).map(|j| 3.0 * kin(s1, j) * s1.v[j]).collect();
    let mut q = vec![0.0; nc];
    for j in 0..nc {
        let ddt = (kin(s2, j) - kin(s0, j)) / (2.0 * dt);
        q[j] = ddt + grid.central_diff(&kin_u, j) + grid.central_diff(&kin_v, j);
    }

    Ok(Residuals { r, q })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo::ValidityDomain;

    fn setup(n: usize, eps: f64) -> (ThermoModel, FrictionMatrix, SourceConfig) {
        let thermo = ThermoModel::new(
            vec![1.0; n],
            vec![1.0; n],
            ValidityDomain::new(1e-3, 1e3).unwrap(),
            1e-12,
        )
        .unwrap();
        let upper = vec![1.0; n * (n - 1) / 2];
        let friction = FrictionMatrix::from_upper_triangle(n, &upper, eps).unwrap();
        let sources = SourceConfig::zero(1e-3).unwrap();
        (thermo, friction, sources)
    }

    #[test]
    fn uniform_state_is_fixed_point() {
        let (thermo, friction, sources) = setup(2, 0.01);
        let grid = Grid1D::new(16, 1.0).unwrap();
        let state = StateI::from_primitives(
            0.0,
            vec![vec![1.0; 16], vec![2.0; 16]],
            vec![0.4; 16],
            vec![1.0; 16],
            &grid,
            &thermo,
            &friction,
            &sources,
        )
        .unwrap();
        assert!(state.u.iter().all(|ui| ui.iter().all(|&x| x.abs() < 1e-14)));
        let dt = cfl_dt(&state, &grid, &thermo, &sources, 0.5);
        let next = step(&state, &grid, &thermo, &friction, &sources, dt).unwrap();
        for j in 0..16 {
            assert!((next.rho[0][j] - 1.0).abs() < 1e-14);
            assert!((next.rho[1][j] - 2.0).abs() < 1e-14);
            assert!((next.v[j] - 0.4).abs() < 1e-14);
            assert!((next.theta[j] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn diffusion_opposes_partial_pressure_gradient() {
        let (thermo, friction, sources) = setup(2, 0.05);
        let nc = 64;
        let grid = Grid1D::new(nc, 1.0).unwrap();
        let rho1: Vec<f64> = (0..nc)
            .map(|j| 1.0 + 0.2 * (2.0 * std::f64::consts::PI * grid.center(j)).sin())
            .collect();
        let state = StateI::from_primitives(
            0.0,
            vec![rho1, vec![1.0; nc]],
            vec![0.0; nc],
            vec![1.0; nc],
            &grid,
            &thermo,
            &friction,
            &sources,
        )
        .unwrap();
        // where dp_1/dx is significantly positive, u_1 must be negative
        let p1: Vec<f64> = (0..nc).map(|j| state.rho[0][j] * state.theta[j]).collect();
        let mut checked = 0;
        for j in 0..nc {
            let grad = grid.central_diff(&p1, j);
            if grad > 0.1 {
                assert!(state.u[0][j] < 0.0, "u_1 = {} at grad {}", state.u[0][j], grad);
                checked += 1;
            }
        }
        assert!(checked > 0);
        assert!(state.constraint_defect() <= 1e-12);
    }

    #[test]
    fn residuals_vanish_on_stationary_state() {
        let (thermo, friction, sources) = setup(2, 0.01);
        let grid = Grid1D::new(16, 1.0).unwrap();
        let make = |time: f64| {
            StateI::from_primitives(
                time,
                vec![vec![1.0; 16], vec![2.0; 16]],
                vec![0.0; 16],
                vec![1.0; 16],
                &grid,
                &thermo,
                &friction,
                &sources,
            )
            .unwrap()
        };
        let (s0, s1, s2) = (make(0.0), make(0.1), make(0.2));
        let res = residuals(&[&s0, &s1, &s2], &grid).unwrap();
        assert!(res.r_norm(&grid) < 1e-14);
        assert!(res.q_norm(&grid) < 1e-14);
    }

    #[test]
    fn residuals_need_three_equally_spaced_snapshots() {
        let (thermo, friction, sources) = setup(2, 0.01);
        let grid = Grid1D::new(16, 1.0).unwrap();
        let make = |time: f64| {
            StateI::from_primitives(
                time,
                vec![vec![1.0; 16], vec![2.0; 16]],
                vec![0.0; 16],
                vec![1.0; 16],
                &grid,
                &thermo,
                &friction,
                &sources,
            )
            .unwrap()
        };
        let (s0, s1, s2) = (make(0.0), make(0.1), make(0.25));
        assert!(residuals(&[&s0, &s1], &grid).is_err());
        assert!(residuals(&[&s0, &s1, &s2], &grid).is_err());
    }

    #[test]
    fn doubling_u_quadruples_quadratic_energy_residual() {
        let (thermo, friction, sources) = setup(2, 0.01);
        let nc = 32;
        let grid = Grid1D::new(nc, 1.0).unwrap();
        let base = StateI::from_primitives(
            0.0,
            vec![vec![1.0; nc], vec![1.5; nc]],
            vec![0.5; nc],
            vec![1.0; nc],
            &grid,
            &thermo,
            &friction,
            &sources,
        )
        .unwrap();
        let with_u = |scale: f64, time: f64| {
            let mut s = base.clone();
            s.time = time;
            for j in 0..nc {
                let x = grid.center(j);
                let wave = 1e-3 * (2.0 * std::f64::consts::PI * x).sin() * scale;
                s.u[0][j] = wave;
                s.u[1][j] = -wave * s.rho[0][j] / s.rho[1][j];
            }
            s
        };
        let q1 = {
            let (a, b, c) = (with_u(1.0, 0.0), with_u(1.0, 0.1), with_u(1.0, 0.2));
            residuals(&[&a, &b, &c], &grid).unwrap().q_norm(&grid)
        };
        let q2 = {
            let (a, b, c) = (with_u(2.0, 0.0), with_u(2.0, 0.1), with_u(2.0, 0.2));
            residuals(&[&a, &b, &c], &grid).unwrap().q_norm(&grid)
        };
        let ratio = q2 / q1;
        assert!((ratio - 4.0).abs() < 0.02, "ratio {ratio}");
    }

    #[test]
    fn species_mass_is_conserved() {
        let (thermo, friction, sources) = setup(2, 0.02);
        let nc = 64;
        let grid = Grid1D::new(nc, 1.0).unwrap();
        let rho1: Vec<f64> = (0..nc)
            .map(|j| 1.0 + 0.1 * (2.0 * std::f64::consts::PI * grid.center(j)).sin())
            .collect();
        let rho2: Vec<f64> = (0..nc)
            .map(|j| 1.5 - 0.1 * (2.0 * std::f64::consts::PI * grid.center(j)).cos())
            .collect();
        let mut state = StateI::from_primitives(
            0.0,
            vec![rho1, rho2],
            vec![0.0; nc],
            vec![1.0; nc],
            &grid,
            &thermo,
            &friction,
            &sources,
        )
        .unwrap();
        let m0 = state.total_masses(&grid);
        let mom0 = state.total_momentum(&grid);
        let e0 = state.total_energy(&grid);
        for _ in 0..50 {
            let dt = cfl_dt(&state, &grid, &thermo, &sources, 0.4);
            state = step(&state, &grid, &thermo, &friction, &sources, dt).unwrap();
        }
        let m1 = state.total_masses(&grid);
        for i in 0..2 {
            assert!((m1[i] - m0[i]).abs() <= 1e-12 * m0[i].abs());
        }
        assert!((state.total_momentum(&grid) - mom0).abs() <= 1e-12 * mom0.abs().max(1.0));
        assert!((state.total_energy(&grid) - e0).abs() <= 1e-12 * e0.abs());
    }
}
