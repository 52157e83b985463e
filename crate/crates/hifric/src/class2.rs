//! Class-II solver: n mass balances, n momentum balances and one total-energy
//! balance on a periodic 1D grid. Rusanov fluxes for the hyperbolic part,
//! explicit central heat conduction, and Strang-split stiff interspecies
//! friction handled by an implicit midpoint substep.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::maxwell_stefan::FrictionMatrix;
use crate::sources::SourceConfig;
use crate::thermo::ThermoModel;

/// Per-cell Class-II unknowns with cached conservative variables.
#[derive(Debug, Clone)]
pub struct StateII {
    pub time: f64,
    /// rho[i][cell]
    pub rho: Vec<Vec<f64>>,
    /// v[i][cell]
    pub v: Vec<Vec<f64>>,
    /// theta[cell]
    pub theta: Vec<f64>,
    /// momentum[i][cell] = rho_i v_i
    pub momentum: Vec<Vec<f64>>,
    /// energy[cell] = rho e + 1/2 sum rho_j v_j^2
    pub energy: Vec<f64>,
}

impl StateII {
    pub fn from_primitives(
        time: f64,
        rho: Vec<Vec<f64>>,
        v: Vec<Vec<f64>>,
        theta: Vec<f64>,
        thermo: &ThermoModel,
    ) -> Result<Self> {
        let n = rho.len();
        if n == 0 || n != thermo.n_species() || v.len() != n {
            return Err(Error::Shape(format!(
                "species counts disagree: rho {}, v {}, thermo {}",
                n,
                v.len(),
                thermo.n_species()
            )));
        }
        let nc = theta.len();
        if rho.iter().chain(v.iter()).any(|f| f.len() != nc) {
            return Err(Error::Shape("field lengths disagree".into()));
        }
        let mut s = Self {
            time,
            rho,
            v,
            theta,
            momentum: vec![vec![0.0; nc]; n],
            energy: vec![0.0; nc],
        };
        s.sync_conservative(thermo);
        Ok(s)
    }

    pub fn n_species(&self) -> usize {
        self.rho.len()
    }

    pub fn ncells(&self) -> usize {
        self.theta.len()
    }

    /// Rebuild conservative caches from primitives.
    pub fn sync_conservative(&mut self, thermo: &ThermoModel) {
        let (n, nc) = (self.n_species(), self.ncells());
        for j in 0..nc {
            let mut e = 0.0;
            for i in 0..n {
                self.momentum[i][j] = self.rho[i][j] * self.v[i][j];
                e += self.rho[i][j] * thermo.specific_heat(i) * self.theta[j]
                    + 0.5 * self.rho[i][j] * self.v[i][j] * self.v[i][j];
            }
            self.energy[j] = e;
        }
    }

    /// Rebuild primitives from the conservative caches.
    pub fn sync_primitive(&mut self, thermo: &ThermoModel) -> Result<()> {
        let (n, nc) = (self.n_species(), self.ncells());
        for j in 0..nc {
            let mut kinetic = 0.0;
            let mut heat_cap = 0.0;
            for i in 0..n {
                if self.rho[i][j] > 0.0 {
                    self.v[i][j] = self.momentum[i][j] / self.rho[i][j];
                } else {
                    self.v[i][j] = 0.0;
                    self.momentum[i][j] = 0.0;
                }
                kinetic += 0.5 * self.rho[i][j] * self.v[i][j] * self.v[i][j];
                heat_cap += self.rho[i][j] * thermo.specific_heat(i);
            }
            if !(heat_cap > 0.0) {
                return Err(Error::Domain {
                    what: "mixture heat capacity",
                    cell: j,
                    value: heat_cap,
                    lo: f64::MIN_POSITIVE,
                    hi: f64::INFINITY,
                });
            }
            self.theta[j] = (self.energy[j] - kinetic) / heat_cap;
        }
        Ok(())
    }

    /// Largest relative disagreement between caches and primitives.
    pub fn cache_defect(&self, thermo: &ThermoModel) -> f64 {
        let (n, nc) = (self.n_species(), self.ncells());
        let mut worst: f64 = 0.0;
        for j in 0..nc {
            let mut e = 0.0;
            for i in 0..n {
                let m = self.rho[i][j] * self.v[i][j];
                worst = worst.max((m - self.momentum[i][j]).abs() / m.abs().max(1.0));
                e += self.rho[i][j] * thermo.specific_heat(i) * self.theta[j]
                    + 0.5 * self.rho[i][j] * self.v[i][j] * self.v[i][j];
            }
            worst = worst.max((e - self.energy[j]).abs() / e.abs().max(1.0));
        }
        worst
    }

    /// Enforce the validity-domain bounds; the error names the first offending cell.
    pub fn check_validity(&self, thermo: &ThermoModel) -> Result<()> {
        let dom = thermo.validity();
        let (n, nc) = (self.n_species(), self.ncells());
        for j in 0..nc {
            let mut total = 0.0;
            for i in 0..n {
                let r = self.rho[i][j];
                if !(r >= 0.0 && r <= dom.big_m) {
                    return Err(Error::Domain {
                        what: "species density",
                        cell: j,
                        value: r,
                        lo: 0.0,
                        hi: dom.big_m,
                    });
                }
                total += r;
            }
            if !(total >= dom.gamma && total <= dom.big_m) {
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

    /// Integrated mass per species.
    pub fn total_masses(&self, grid: &Grid1D) -> Vec<f64> {
        self.rho.iter().map(|r| grid.integrate(r)).collect()
    }

    /// Integrated total momentum.
    pub fn total_momentum(&self, grid: &Grid1D) -> f64 {
        let per_cell: Vec<f64> = (0..self.ncells())
            .map(|j| (0..self.n_species()).map(|i| self.momentum[i][j]).sum())
            .collect();
        grid.integrate(&per_cell)
    }

    /// Integrated total energy.
    pub fn total_energy(&self, grid: &Grid1D) -> f64 {
        grid.integrate(&self.energy)
    }

    /// Integrated total entropy sum_i rho_i eta_i.
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

    /// Barycentric velocity per cell.
    pub fn barycentric_velocity(&self, j: usize) -> f64 {
        let m: f64 = (0..self.n_species()).map(|i| self.momentum[i][j]).sum();
        let r: f64 = (0..self.n_species()).map(|i| self.rho[i][j]).sum();
        m / r
    }
}

fn step_limits(
    state: &StateII,
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
            speed_max = speed_max.max(state.v[i][j].abs() + a);
            heat_cap += state.rho[i][j] * thermo.specific_heat(i);
        }
        heat_cap_min = heat_cap_min.min(heat_cap);
        kappa_max = kappa_max.max(sources.kappa_at(&rho_cell, state.theta[j]));
    }
    let advective = grid.dx() / speed_max;
    let diffusive = grid.dx() * grid.dx() * heat_cap_min / (2.0 * kappa_max);
    (advective, diffusive)
}

/// Largest stable step for the current state. The advective and the explicit
/// conduction updates act on the same cells, so their Courant numbers add:
/// the sufficient bound is dt (1/advective + 1/diffusive) <= 1.
pub fn admissible_dt(
    state: &StateII,
    grid: &Grid1D,
    thermo: &ThermoModel,
    sources: &SourceConfig,
) -> f64 {
    let (advective, diffusive) = step_limits(state, grid, thermo, sources);
    1.0 / (1.0 / advective + 1.0 / diffusive)
}

/// Step size contract: cfl_number times the advective limit dx/(|v_i| + a_i),
/// capped by the (equally scaled) diffusive limit dx^2 min(sum rho_j c_j)/(2 kappa).
/// Friction does not restrict dt (treated implicitly).
pub fn cfl_dt(
    state: &StateII,
    grid: &Grid1D,
    thermo: &ThermoModel,
    sources: &SourceConfig,
    cfl_number: f64,
) -> f64 {
    let (advective, diffusive) = step_limits(state, grid, thermo, sources);
    cfl_number * advective.min(diffusive)
}

const FRICTION_MAX_ITERS: usize = 50;
const FRICTION_TOL: f64 = 1e-12;

/// Cell-local stiff friction step: implicit midpoint on the velocity system
/// with theta refreshed between iterations so that the local total energy is
/// held exactly constant (dissipated kinetic energy heats the mixture).
pub fn friction_substep(
    rho: &[f64],
    v: &mut [f64],
    theta: &mut f64,
    cell: usize,
    thermo: &ThermoModel,
    friction: &FrictionMatrix,
    dt: f64,
) -> Result<()> {
    let n = rho.len();
    if n < 2 {
        return Ok(());
    }
    // aligned velocities are an exact fixed point; skip the solve entirely
    if v.iter().all(|&vi| vi == v[0]) {
        return Ok(());
    }
    let heat_cap: f64 = (0..n).map(|i| rho[i] * thermo.specific_heat(i)).sum();
    let kinetic = |w: &[f64]| -> f64 { (0..n).map(|i| 0.5 * rho[i] * w[i] * w[i]).sum() };
    let e_local = heat_cap * *theta + kinetic(v);

    // relaxation operator K with (K w)_i = sum_j b_ij rho_j (w_i - w_j)
    let mut k_op = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i == j {
                continue;
            }
            let a = friction.get(i, j) * rho[j];
            k_op[(i, j)] = -a;
            diag += a;
        }
        k_op[(i, i)] = diag;
    }

    let v_old = DVector::from_column_slice(v);
    let mut theta_mid = *theta;
    let mut v_new = v_old.clone();
    let mut theta_new = *theta;
    let mut converged = false;
    for _ in 0..FRICTION_MAX_ITERS {
        let a = 0.5 * dt * theta_mid / friction.epsilon();
        let lhs = DMatrix::<f64>::identity(n, n) + &k_op * a;
        let rhs = &v_old - &k_op * &v_old * a;
        let lu = lhs.lu();
        v_new = lu.solve(&rhs).ok_or(Error::Stiffness {
            max_iters: FRICTION_MAX_ITERS,
            cell,
        })?;
        theta_new = (e_local - kinetic(v_new.as_slice())) / heat_cap;
        let next_mid = 0.5 * (*theta + theta_new);
        let delta = (next_mid - theta_mid).abs();
        theta_mid = next_mid;
        if delta <= FRICTION_TOL * theta_mid.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Stiffness {
            max_iters: FRICTION_MAX_ITERS,
            cell,
        });
    }
    v.copy_from_slice(v_new.as_slice());
    *theta = theta_new;
    Ok(())
}

fn apply_friction_half(
    state: &mut StateII,
    thermo: &ThermoModel,
    friction: &FrictionMatrix,
    dt_half: f64,
) -> Result<()> {
    let (n, nc) = (state.n_species(), state.ncells());
    let mut rho_cell = vec![0.0; n];
    let mut v_cell = vec![0.0; n];
    for j in 0..nc {
        for i in 0..n {
            rho_cell[i] = state.rho[i][j];
            v_cell[i] = state.v[i][j];
        }
        let mut theta = state.theta[j];
        friction_substep(&rho_cell, &mut v_cell, &mut theta, j, thermo, friction, dt_half)?;
        for i in 0..n {
            state.v[i][j] = v_cell[i];
        }
        state.theta[j] = theta;
    }
    Ok(())
}

/// One full Strang-split step: half friction, full hyperbolic/parabolic/source
/// update, half friction. Returns the advanced state at `state.time + dt`.
pub fn step(
    state: &StateII,
    grid: &Grid1D,
    thermo: &ThermoModel,
    friction: &FrictionMatrix,
    sources: &SourceConfig,
    dt: f64,
) -> Result<StateII> {
    let admissible = admissible_dt(state, grid, thermo, sources);
    if dt > admissible * (1.0 + 1e-9) {
        return Err(Error::StepSize { dt, admissible });
    }
    let (n, nc) = (state.n_species(), state.ncells());
    if nc != grid.ncells() {
        return Err(Error::Shape(format!(
            "state has {nc} cells but grid has {}",
            grid.ncells()
        )));
    }
    let mut work = state.clone();

    apply_friction_half(&mut work, thermo, friction, 0.5 * dt)?;
    work.sync_conservative(thermo);

    // hyperbolic fluxes on the conservative variables (rho_i, m_i, E)
    let dx = grid.dx();
    let lam = dt / dx;
    let t_mid = state.time + 0.5 * dt;

    let mut rho_new = work.rho.clone();
    let mut mom_new = work.momentum.clone();
    let mut e_new = work.energy.clone();

    // per-cell physical fluxes and wave speeds
    let mut f_rho = vec![vec![0.0; nc]; n];
    let mut f_mom = vec![vec![0.0; nc]; n];
    let mut f_e = vec![0.0; nc];
    let mut speed = vec![0.0; nc];
    for j in 0..nc {
        let mut fe = 0.0;
        let mut s: f64 = 0.0;
        for i in 0..n {
            let rho = work.rho[i][j];
            let vel = work.v[i][j];
            let p = thermo.gas_constant(i) * rho * work.theta[j];
            let e_i = thermo.specific_heat(i) * work.theta[j];
            f_rho[i][j] = rho * vel;
            f_mom[i][j] = rho * vel * vel + p;
            fe += (rho * e_i + p + 0.5 * rho * vel * vel) * vel;
            s = s.max(vel.abs() + thermo.sound_speed(i, work.theta[j]));
        }
        f_e[j] = fe;
        speed[j] = s;
    }

    let mut rho_face = vec![0.0; n];
    for j in 0..nc {
        let r = grid.right(j);
        let s = speed[j].max(speed[r]);
        for i in 0..n {
            let flux = 0.5 * (f_rho[i][j] + f_rho[i][r]) - 0.5 * s * (work.rho[i][r] - work.rho[i][j]);
            rho_new[i][j] -= lam * flux;
            rho_new[i][r] += lam * flux;
            let flux_m =
                0.5 * (f_mom[i][j] + f_mom[i][r]) - 0.5 * s * (work.momentum[i][r] - work.momentum[i][j]);
            mom_new[i][j] -= lam * flux_m;
            mom_new[i][r] += lam * flux_m;
        }
        let flux_e = 0.5 * (f_e[j] + f_e[r]) - 0.5 * s * (work.energy[r] - work.energy[j]);
        // heat conduction through the same face
        for i in 0..n {
            rho_face[i] = 0.5 * (work.rho[i][j] + work.rho[i][r]);
        }
        let theta_face = 0.5 * (work.theta[j] + work.theta[r]);
        let kappa_face = sources.kappa_at(&rho_face, theta_face);
        let heat = -kappa_face * (work.theta[r] - work.theta[j]) / dx;
        let total_e = flux_e + heat;
        e_new[j] -= lam * total_e;
        e_new[r] += lam * total_e;
    }

    // body forces and heat supply
    if sources.has_body_force() || sources.has_heat_supply() {
        for j in 0..nc {
            let x = grid.center(j);
            let mut work_term = 0.0;
            for i in 0..n {
                let b = sources.body_force(i, x, t_mid);
                mom_new[i][j] += dt * work.rho[i][j] * b;
                work_term += work.rho[i][j] * b * work.v[i][j];
            }
            e_new[j] += dt * (work_term + sources.heat_supply(x, t_mid));
        }
    }

    work.rho = rho_new;
    work.momentum = mom_new;
    work.energy = e_new;
    work.sync_primitive(thermo)?;

    apply_friction_half(&mut work, thermo, friction, 0.5 * dt)?;
    work.sync_conservative(thermo);
    work.time = state.time + dt;
    work.check_validity(thermo)?;
    Ok(work)
}

/// Integrated entropy change bound used when auditing entropy monotonicity:
/// first-order schemes may undershoot by a consistency term of size O(dx).
pub fn entropy_tolerance(grid: &Grid1D, dt: f64, entropy_scale: f64) -> f64 {
    grid.dx() * dt * (1.0 + entropy_scale.abs())
}

/// Max over cells of the largest interspecies velocity gap.
pub fn max_velocity_misalignment(state: &StateII) -> f64 {
    let (n, nc) = (state.n_species(), state.ncells());
    let mut worst: f64 = 0.0;
    for j in 0..nc {
        for i in 0..n {
            for k in (i + 1)..n {
                worst = worst.max((state.v[i][j] - state.v[k][j]).abs());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo::ValidityDomain;

    fn setup(n: usize) -> (ThermoModel, FrictionMatrix, SourceConfig) {
        let thermo = ThermoModel::new(
            vec![1.0; n],
            vec![1.0; n],
            ValidityDomain::new(1e-3, 1e3).unwrap(),
            1e-12,
        )
        .unwrap();
        let upper = vec![1.0; n * (n - 1) / 2];
        let friction = FrictionMatrix::from_upper_triangle(n, &upper, 0.01).unwrap();
        let sources = SourceConfig::zero(1e-3).unwrap();
        (thermo, friction, sources)
    }

    fn uniform_state(n: usize, nc: usize, v: &[f64], thermo: &ThermoModel) -> StateII {
        StateII::from_primitives(
            0.0,
            vec![vec![1.0; nc]; n],
            v.iter().map(|&vi| vec![vi; nc]).collect(),
            vec![1.0; nc],
            thermo,
        )
        .unwrap()
    }

    #[test]
    fn uniform_aligned_state_is_fixed_point() {
        let (thermo, friction, sources) = setup(2);
        let grid = Grid1D::new(16, 1.0).unwrap();
        let state = uniform_state(2, 16, &[0.3, 0.3], &thermo);
        let dt = cfl_dt(&state, &grid, &thermo, &sources, 0.5);
        let next = step(&state, &grid, &thermo, &friction, &sources, dt).unwrap();
        for i in 0..2 {
            for j in 0..16 {
                assert!((next.rho[i][j] - 1.0).abs() < 1e-14);
                assert!((next.v[i][j] - 0.3).abs() < 1e-13);
            }
        }
        for j in 0..16 {
            assert!((next.theta[j] - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn homogeneous_friction_conserves_and_aligns() {
        let (thermo, friction, sources) = setup(2);
        let grid = Grid1D::new(8, 1.0).unwrap();
        let mut state = uniform_state(2, 8, &[0.2, -0.2], &thermo);
        let dt = cfl_dt(&state, &grid, &thermo, &sources, 0.4);
        let m0 = state.total_momentum(&grid);
        let e0 = state.total_energy(&grid);
        let mut prev_gap = max_velocity_misalignment(&state);
        for _ in 0..20 {
            state = step(&state, &grid, &thermo, &friction, &sources, dt).unwrap();
            let gap = max_velocity_misalignment(&state);
            // monotone until the gap reaches the roundoff floor
            if prev_gap > 1e-13 {
                assert!(gap <= prev_gap * (1.0 + 1e-12), "misalignment grew");
            } else {
                assert!(gap <= 1e-12);
            }
            prev_gap = gap;
            assert!((state.total_momentum(&grid) - m0).abs() <= 1e-12 * m0.abs().max(1.0));
            assert!((state.total_energy(&grid) - e0).abs() <= 1e-12 * e0.abs().max(1.0));
        }
        // temperature must have risen: kinetic energy was dissipated
        assert!(state.theta[0] > 1.0);
    }

    #[test]
    fn friction_decay_matches_reference_ode() {
        // oracle: RK4 at dt/100 on d v_i/dt = -(theta/eps) sum_j b rho_j (v_i - v_j)
        // with theta slaved to the local energy budget
        let (thermo, friction, _) = setup(2);
        let rho = [1.0, 1.0];
        let heat_cap = 2.0;
        let e_local =
            heat_cap * 1.0 + 0.5 * (rho[0] * 0.2f64.powi(2) + rho[1] * (-0.2f64).powi(2));
        let rhs = |w: &[f64; 2]| -> [f64; 2] {
            let kin = 0.5 * (rho[0] * w[0] * w[0] + rho[1] * w[1] * w[1]);
            let theta = (e_local - kin) / heat_cap;
            let f = theta / friction.epsilon() * friction.get(0, 1) * rho[0] * rho[1]
                * (w[0] - w[1]);
            [-f / rho[0], f / rho[1]]
        };
        let dt = 1e-4;
        let mut v_ref = [0.2, -0.2];
        let h = dt / 100.0;
        for _ in 0..(20 * 100) {
            let k1 = rhs(&v_ref);
            let mid1 = [v_ref[0] + 0.5 * h * k1[0], v_ref[1] + 0.5 * h * k1[1]];
            let k2 = rhs(&mid1);
            let mid2 = [v_ref[0] + 0.5 * h * k2[0], v_ref[1] + 0.5 * h * k2[1]];
            let k3 = rhs(&mid2);
            let end = [v_ref[0] + h * k3[0], v_ref[1] + h * k3[1]];
            let k4 = rhs(&end);
            for i in 0..2 {
                v_ref[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        let mut v = vec![0.2, -0.2];
        let mut theta = 1.0;
        for _ in 0..20 {
            friction_substep(&rho, &mut v, &mut theta, 0, &thermo, &friction, dt).unwrap();
        }
        let gap = v[0] - v[1];
        let gap_ref = v_ref[0] - v_ref[1];
        // midpoint local error (lambda dt)^3/12 per step, ~3e-5 accumulated here
        assert!(
            (gap - gap_ref).abs() <= 5e-5 * gap_ref.abs(),
            "midpoint {gap} vs RK4 {gap_ref}"
        );
    }

    #[test]
    fn friction_substep_matches_frozen_theta_exponential() {
        let thermo = ThermoModel::new(
            vec![1.0, 1.0],
            vec![1.0, 1.0],
            ValidityDomain::new(1e-3, 1e3).unwrap(),
            1e-12,
        )
        .unwrap();
        let friction = FrictionMatrix::from_upper_triangle(2, &[1.0], 0.01).unwrap();
        // rate lambda = (theta/eps) b (rho1 + rho2) = 200; tiny velocities keep
        // the heating negligible so the frozen-theta solution applies
        let rho = [1.0, 1.0];
        let dt = 1e-4;
        let mut v = vec![5e-5, -5e-5];
        let mut theta = 1.0;
        friction_substep(&rho, &mut v, &mut theta, 0, &thermo, &friction, dt).unwrap();
        let expected = 1e-4 * (-200.0 * dt).exp();
        let got = v[0] - v[1];
        assert!(
            (got - expected).abs() <= 2e-6 * expected.abs(),
            "got {got}, expected {expected}"
        );
    }

    #[test]
    fn friction_substep_is_noop_for_aligned_velocities() {
        let (thermo, friction, _) = setup(3);
        let rho = [1.0, 2.0, 0.5];
        let mut v = vec![0.7, 0.7, 0.7];
        let mut theta = 1.3;
        friction_substep(&rho, &mut v, &mut theta, 0, &thermo, &friction, 0.1).unwrap();
        assert!(v.iter().all(|&x| (x - 0.7).abs() < 1e-14));
        assert!((theta - 1.3).abs() < 1e-14);
    }

    #[test]
    fn friction_substep_energy_budget_is_exact() {
        let (thermo, friction, _) = setup(2);
        let rho = [1.4, 0.6];
        let mut v = vec![0.5, -0.9];
        let mut theta = 1.1;
        let heat_cap: f64 = rho.iter().sum();
        let e0 = heat_cap * theta + 0.5 * (rho[0] * v[0] * v[0] + rho[1] * v[1] * v[1]);
        friction_substep(&rho, &mut v, &mut theta, 0, &thermo, &friction, 5e-4).unwrap();
        let e1 = heat_cap * theta + 0.5 * (rho[0] * v[0] * v[0] + rho[1] * v[1] * v[1]);
        assert!((e1 - e0).abs() <= 1e-12 * e0.abs());
    }

    #[test]
    fn cfl_dt_matches_formula() {
        let (thermo, _, sources) = setup(1);
        let grid = Grid1D::new(100, 1.0).unwrap();
        let state = uniform_state(1, 100, &[0.0], &thermo);
        let dt = cfl_dt(&state, &grid, &thermo, &sources, 0.5);
        let expected = 0.5 * 0.01 / 2.0f64.sqrt();
        assert!((dt - expected).abs() < 1e-15, "dt {dt} vs {expected}");
    }

    #[test]
    fn doubling_cells_halves_advective_dt() {
        let (thermo, _, sources) = setup(1);
        let g1 = Grid1D::new(64, 1.0).unwrap();
        let g2 = Grid1D::new(128, 1.0).unwrap();
        let s1 = uniform_state(1, 64, &[0.1], &thermo);
        let s2 = uniform_state(1, 128, &[0.1], &thermo);
        let dt1 = cfl_dt(&s1, &g1, &thermo, &sources, 0.5);
        let dt2 = cfl_dt(&s2, &g2, &thermo, &sources, 0.5);
        assert!((dt1 / dt2 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn large_kappa_activates_diffusive_cap() {
        let (thermo, _, _) = setup(1);
        let sources = SourceConfig::zero(100.0).unwrap();
        let grid = Grid1D::new(100, 1.0).unwrap();
        let state = uniform_state(1, 100, &[0.0], &thermo);
        let dt = cfl_dt(&state, &grid, &thermo, &sources, 0.5);
        let cap = 0.01 * 0.01 * 1.0 / (2.0 * 100.0);
        assert!((dt - 0.5 * cap).abs() < 1e-18, "dt {dt} vs scaled cap {cap}");
    }

    #[test]
    fn oversized_step_is_rejected_with_admissible_dt() {
        let (thermo, friction, sources) = setup(2);
        let grid = Grid1D::new(16, 1.0).unwrap();
        let state = uniform_state(2, 16, &[0.0, 0.0], &thermo);
        let err = step(&state, &grid, &thermo, &friction, &sources, 1.0);
        match err {
            Err(Error::StepSize { admissible, .. }) => assert!(admissible > 0.0),
            other => panic!("expected StepSize error, got {other:?}"),
        }
    }

    #[test]
    fn conservative_caches_stay_consistent() {
        let (thermo, friction, sources) = setup(2);
        let grid = Grid1D::new(32, 1.0).unwrap();
        let rho: Vec<Vec<f64>> = (0..2)
            .map(|i| {
                (0..32)
                    .map(|j| 1.0 + 0.1 * ((j as f64 / 32.0 + i as f64) * 6.28).sin())
                    .collect()
            })
            .collect();
        let v = vec![vec![0.05; 32], vec![-0.05; 32]];
        let mut state = StateII::from_primitives(0.0, rho, v, vec![1.0; 32], &thermo).unwrap();
        for _ in 0..5 {
            let dt = cfl_dt(&state, &grid, &thermo, &sources, 0.4);
            state = step(&state, &grid, &thermo, &friction, &sources, dt).unwrap();
            assert!(state.cache_defect(&thermo) <= 1e-12);
        }
    }
}
