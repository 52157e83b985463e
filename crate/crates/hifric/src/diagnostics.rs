//! Relative-entropy diagnostics: lifting Class-I states to Class-II shape,
//! the relative entropy H and its dissipation terms, discrete entropy
//! production, an empirical coercivity estimate, and a numerical audit of the
//! pointwise relative-entropy identity on manufactured solution pairs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::class1::StateI;
use crate::class2::StateII;
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::manufactured::{ManufacturedClass2, SpeciesWave, Wave};
use crate::maxwell_stefan::FrictionMatrix;
use crate::sources::SourceConfig;
use crate::thermo::{ThermoModel, ValidityDomain};

/// Class-II-comparable fields built from a Class-I state: v_i = v + u_i.
#[derive(Debug, Clone)]
pub struct Lifted {
    pub rho: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub theta: Vec<f64>,
}

/// Lift a Class-I state by distributing the barycentric velocity over species.
pub fn lift(state: &StateI) -> Lifted {
    let (n, nc) = (state.n_species(), state.ncells());
    let mut v = vec![vec![0.0; nc]; n];
    for i in 0..n {
        for j in 0..nc {
            v[i][j] = state.v[j] + state.u[i][j];
        }
    }
    Lifted {
        rho: state.rho.clone(),
        v,
        theta: state.theta.clone(),
    }
}

/// Relative entropy between a Class-II state and a lifted Class-I state, with
/// the dissipation integrals of the relative-entropy inequality.
#[derive(Debug, Clone)]
pub struct RelEntropyReport {
    /// H(omega | omega_bar), integrated over the torus.
    pub h: f64,
    /// min over cells of [integrand - C (sum |drho_i|^2 + |dtheta|^2)].
    pub coercivity_margin: f64,
    /// (1/2eps) int sum_ij theta_bar b_ij rho_i rho_j |(v_i-v_j)-(vb_i-vb_j)|^2.
    pub friction_dissipation: f64,
    /// int theta_bar kappa |grad log theta - grad log theta_bar|^2.
    pub conduction_dissipation: f64,
    /// L1 norms of the reformulation residuals, when supplied by the caller.
    pub r_norm: Option<f64>,
    pub q_norm: Option<f64>,
    /// cells where the vacuum floor was applied inside a logarithm.
    pub clamped_cells: usize,
}

pub fn relative_entropy(
    state: &StateII,
    lifted: &Lifted,
    thermo: &ThermoModel,
    grid: &Grid1D,
    friction: &FrictionMatrix,
    sources: &SourceConfig,
    coercivity_c: f64,
) -> Result<RelEntropyReport> {
    let (n, nc) = (state.n_species(), state.ncells());
    if lifted.rho.len() != n || lifted.theta.len() != nc || nc != grid.ncells() {
        return Err(Error::Shape(format!(
            "relative_entropy shapes disagree: state ({n} x {nc}), lifted ({} x {}), grid {}",
            lifted.rho.len(),
            lifted.theta.len(),
            grid.ncells()
        )));
    }
    let dx = grid.dx();
    let mut h_total = 0.0;
    let mut margin = f64::INFINITY;
    let mut fric_total = 0.0;
    let mut clamped_cells = 0;

    let log_theta: Vec<f64> = state.theta.iter().map(|t| t.ln()).collect();
    let log_theta_bar: Vec<f64> = lifted.theta.iter().map(|t| t.ln()).collect();
    let mut cond_total = 0.0;
    let mut rho_cell = vec![0.0; n];

    for j in 0..nc {
        let theta = state.theta[j];
        let theta_bar = lifted.theta[j];
        let mut integrand = 0.0;
        let mut dist2 = (theta - theta_bar) * (theta - theta_bar);
        let mut cell_clamped = false;
        for i in 0..n {
            let rho = state.rho[i][j];
            let rho_bar = lifted.rho[i][j];
            rho_cell[i] = rho;
            let dv = state.v[i][j] - lifted.v[i][j];
            let rel_free = thermo.relative_free_energy(i, (rho, theta), (rho_bar, theta_bar))?;
            let eta_gap =
                (thermo.rho_eta(i, rho, theta) - thermo.rho_eta(i, rho_bar, theta_bar))
                    * (theta - theta_bar);
            integrand += 0.5 * rho * dv * dv + rel_free + eta_gap;
            dist2 += (rho - rho_bar) * (rho - rho_bar);
            cell_clamped |= rho < thermo.rho_floor();
        }
        if cell_clamped {
            clamped_cells += 1;
        }
        h_total += integrand;
        margin = margin.min(integrand - coercivity_c * dist2);

        let mut fric = 0.0;
        for i in 0..n {
            for k in 0..n {
                if i == k {
                    continue;
                }
                let dd = (state.v[i][j] - state.v[k][j]) - (lifted.v[i][j] - lifted.v[k][j]);
                fric += friction.get(i, k) * state.rho[i][j] * state.rho[k][j] * dd * dd;
            }
        }
        fric_total += theta_bar * fric;

        let dlog = grid.central_diff(&log_theta, j) - grid.central_diff(&log_theta_bar, j);
        cond_total += theta_bar * sources.kappa_at(&rho_cell, theta) * dlog * dlog;
    }

    Ok(RelEntropyReport {
        h: h_total * dx,
        coercivity_margin: margin,
        friction_dissipation: fric_total * dx / (2.0 * friction.epsilon()),
        conduction_dissipation: cond_total * dx,
        r_norm: None,
        q_norm: None,
        clamped_cells,
    })
}

/// Nonnegative production terms of the discrete entropy balance.
#[derive(Debug, Clone, Copy)]
pub struct EntropyProduction {
    /// int kappa |grad theta|^2 / theta^2.
    pub conduction: f64,
    /// (1/2eps) int sum_ij b_ij rho_i rho_j |w_i - w_j|^2 with w the species
    /// velocities (Class-II) or the diffusional velocities (Class-I).
    pub friction: f64,
    /// int rho r / theta; carries the sign of the supply.
    pub supply: f64,
}

impl EntropyProduction {
    pub fn total(&self) -> f64 {
        self.conduction + self.friction + self.supply
    }
}

fn production(
    rho: &[Vec<f64>],
    theta: &[f64],
    w: impl Fn(usize, usize) -> f64,
    time: f64,
    grid: &Grid1D,
    friction: &FrictionMatrix,
    sources: &SourceConfig,
) -> EntropyProduction {
    let n = rho.len();
    let nc = theta.len();
    let dx = grid.dx();
    let mut conduction = 0.0;
    let mut fric = 0.0;
    let mut supply = 0.0;
    let mut rho_cell = vec![0.0; n];
    for j in 0..nc {
        for i in 0..n {
            rho_cell[i] = rho[i][j];
        }
        let grad_theta = grid.central_diff(theta, j);
        let kappa = sources.kappa_at(&rho_cell, theta[j]);
        conduction += kappa * grad_theta * grad_theta / (theta[j] * theta[j]);
        for i in 0..n {
            for k in 0..n {
                if i != k {
                    let dw = w(i, j) - w(k, j);
                    fric += friction.get(i, k) * rho[i][j] * rho[k][j] * dw * dw;
                }
            }
        }
        supply += sources.heat_supply(grid.center(j), time) / theta[j];
    }
    EntropyProduction {
        conduction: conduction * dx,
        friction: fric * dx / (2.0 * friction.epsilon()),
        supply: supply * dx,
    }
}

/// Entropy production of a Class-II state.
pub fn entropy_production_class2(
    state: &StateII,
    grid: &Grid1D,
    friction: &FrictionMatrix,
    sources: &SourceConfig,
) -> EntropyProduction {
    production(
        &state.rho,
        &state.theta,
        |i, j| state.v[i][j],
        state.time,
        grid,
        friction,
        sources,
    )
}

/// Entropy production of a Class-I state (friction quadratic in u_i).
pub fn entropy_production_class1(
    state: &StateI,
    grid: &Grid1D,
    friction: &FrictionMatrix,
    sources: &SourceConfig,
) -> EntropyProduction {
    production(
        &state.rho,
        &state.theta,
        |i, j| state.u[i][j],
        state.time,
        grid,
        friction,
        sources,
    )
}

/// Empirical coercivity of the thermodynamic part of the relative entropy.
#[derive(Debug, Clone, Copy)]
pub struct CoercivityEstimate {
    pub infimum: f64,
    pub samples: usize,
}

/// Sample state pairs in the validity domain and return the infimum of
/// integrand / (sum |drho_i|^2 + |dtheta|^2). Positive infimum certifies that
/// the relative entropy separates states.
pub fn measure_coercivity(
    thermo: &ThermoModel,
    samples: usize,
    seed: u64,
) -> Result<CoercivityEstimate> {
    if samples == 0 {
        return Err(Error::InvalidArgument(
            "coercivity measurement needs at least one sample".into(),
        ));
    }
    let n = thermo.n_species();
    let dom = thermo.validity();
    let rho_hi = dom.big_m / n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inf = f64::INFINITY;
    let mut used = 0;
    while used < samples {
        let theta = dom.gamma + (dom.big_m - dom.gamma) * rng.gen::<f64>();
        let theta_bar = dom.gamma + (dom.big_m - dom.gamma) * rng.gen::<f64>();
        let mut dist2 = (theta - theta_bar) * (theta - theta_bar);
        let mut integrand = 0.0;
        for i in 0..n {
            let rho = dom.gamma + (rho_hi - dom.gamma) * rng.gen::<f64>();
            let rho_bar = dom.gamma + (rho_hi - dom.gamma) * rng.gen::<f64>();
            integrand += thermo.relative_free_energy(i, (rho, theta), (rho_bar, theta_bar))?;
            integrand += (thermo.rho_eta(i, rho, theta) - thermo.rho_eta(i, rho_bar, theta_bar))
                * (theta - theta_bar);
            dist2 += (rho - rho_bar) * (rho - rho_bar);
        }
        if dist2 < 1e-14 {
            continue;
        }
        inf = inf.min(integrand / dist2);
        used += 1;
    }
    Ok(CoercivityEstimate {
        infimum: inf,
        samples,
    })
}

/// Two exact manufactured Class-II solutions sharing one constitutive model,
/// one friction matrix and one constant conductivity.
#[derive(Debug, Clone)]
pub struct IdentityPair {
    pub label: String,
    pub thermo: ThermoModel,
    pub friction: FrictionMatrix,
    pub omega: ManufacturedClass2,
    pub omega_bar: ManufacturedClass2,
}

impl IdentityPair {
    pub fn new(
        label: impl Into<String>,
        thermo: ThermoModel,
        friction: FrictionMatrix,
        omega: ManufacturedClass2,
        omega_bar: ManufacturedClass2,
    ) -> Result<Self> {
        if omega.n_species() != thermo.n_species()
            || omega_bar.n_species() != thermo.n_species()
            || friction.n_species() != thermo.n_species()
        {
            return Err(Error::Shape("identity pair species counts disagree".into()));
        }
        if omega.kappa != omega_bar.kappa {
            return Err(Error::InvalidArgument(
                "identity pair needs a shared constant conductivity".into(),
            ));
        }
        Ok(Self {
            label: label.into(),
            thermo,
            friction,
            omega,
            omega_bar,
        })
    }
}

/// Term-deletion switch for the mutation test of the identity audit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdentityMutation {
    None,
    /// Zero the three (theta - theta_bar) friction cross-terms.
    DropThetaFrictionCross,
}

/// Defect norms of the discrete identity evaluation.
#[derive(Debug, Clone, Copy)]
pub struct IdentityReport {
    /// L1 over the torus of |d_t H + d_x Q - RHS| with central differences.
    pub pointwise_l1: f64,
    /// |d/dt int H - int RHS'| with divergence terms dropped.
    pub integrated: f64,
}

fn pointwise_h_q(pair: &IdentityPair, x: f64, t: f64) -> Result<(f64, f64)> {
    let n = pair.thermo.n_species();
    let theta = pair.omega.theta_at(x, t);
    let theta_bar = pair.omega_bar.theta_at(x, t);
    let mut h = 0.0;
    let mut q = 0.0;
    for i in 0..n {
        let rho = pair.omega.rho(i, x, t);
        let rho_bar = pair.omega_bar.rho(i, x, t);
        let v = pair.omega.v(i, x, t);
        let v_bar = pair.omega_bar.v(i, x, t);
        let rel_free = pair
            .thermo
            .relative_free_energy(i, (rho, theta), (rho_bar, theta_bar))?;
        let eta_gap = (pair.thermo.rho_eta(i, rho, theta)
            - pair.thermo.rho_eta(i, rho_bar, theta_bar))
            * (theta - theta_bar);
        let dv = v - v_bar;
        h += 0.5 * rho * dv * dv + rel_free + eta_gap;
        let p = pair.thermo.gas_constant(i) * rho * theta;
        let p_bar = pair.thermo.gas_constant(i) * rho_bar * theta_bar;
        q += 0.5 * rho * v * dv * dv + rel_free * v + eta_gap * v + (p - p_bar) * dv;
    }
    Ok((h, q))
}

struct RhsValue {
    full: f64,
    divergence_part: f64,
}

fn rhs_at(pair: &IdentityPair, x: f64, t: f64, mutation: IdentityMutation) -> Result<RhsValue> {
    let n = pair.thermo.n_species();
    let thermo = &pair.thermo;
    let friction = &pair.friction;
    let eps = friction.epsilon();
    let kappa = pair.omega.kappa;

    let om = &pair.omega;
    let ob = &pair.omega_bar;
    let th = Jet3::theta(om, x, t);
    let thb = Jet3::theta(ob, x, t);
    let theta = th.val;
    let theta_bar = thb.val;
    let dlog = th.dx / th.val;
    let dlog_bar = thb.dx / thb.val;

    let mut rho = vec![0.0; n];
    let mut rho_bar = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut v_bar = vec![0.0; n];
    let mut v_bar_dx = vec![0.0; n];
    let mut eta = vec![0.0; n];
    let mut eta_bar = vec![0.0; n];
    for i in 0..n {
        rho[i] = om.rho(i, x, t);
        rho_bar[i] = ob.rho(i, x, t);
        let vj = om.v_jet(i, x, t);
        v[i] = vj.val;
        let vbj = ob.v_jet(i, x, t);
        v_bar[i] = vbj.val;
        v_bar_dx[i] = vbj.dx;
        eta[i] = thermo.eval_species(i, rho[i], theta)?.eta;
        eta_bar[i] = thermo.eval_species(i, rho_bar[i], theta_bar)?.eta;
    }

    let mut rhs = 0.0;

    // friction dissipation
    let mut t1 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let dd = (v[i] - v[j]) - (v_bar[i] - v_bar[j]);
                t1 += friction.get(i, j) * rho[i] * rho[j] * dd * dd;
            }
        }
    }
    rhs -= 0.5 / eps * theta_bar * t1;

    // conduction dissipation
    let dlog_diff = dlog - dlog_bar;
    rhs -= theta_bar * kappa * dlog_diff * dlog_diff;

    for i in 0..n {
        // relative pressure against the divergence of v_bar_i
        let p_rel = thermo.relative_quantity(
            crate::thermo::RelativeKind::Pressure,
            i,
            (rho[i], theta),
            (rho_bar[i], theta_bar),
        )?;
        rhs -= p_rel * v_bar_dx[i];
        // quadratic transport term
        let dv = v[i] - v_bar[i];
        rhs -= rho[i] * dv * v_bar_dx[i] * dv;
        // body-force mismatch
        let b_i = om.body_force(i, x, t, thermo, friction);
        let b_bar_i = ob.body_force(i, x, t, thermo, friction);
        rhs += rho[i] * (b_i - b_bar_i) * dv;
        // relative entropy density against the material derivative of theta_bar
        let eta_rel = thermo.relative_quantity(
            crate::thermo::RelativeKind::EntropyDensity,
            i,
            (rho[i], theta),
            (rho_bar[i], theta_bar),
        )?;
        rhs -= eta_rel * (thb.dt + v_bar[i] * thb.dx);
        // specific-entropy gap transported against grad theta_bar
        rhs -= rho[i] * dv * thb.dx * (eta[i] - eta_bar[i]);
    }

    // heat-supply mismatch
    let rho_r = om.heat_supply(x, t, thermo, friction);
    let rho_r_bar = ob.heat_supply(x, t, thermo, friction);
    rhs += (rho_r / theta - rho_r_bar / theta_bar) * (theta - theta_bar);

    // conduction cross-terms
    rhs += dlog_diff * dlog_bar * (theta * kappa - theta_bar * kappa);
    let divergence_part = {
        // d/dx [ (theta - theta_bar)(kappa dlog - kappa dlog_bar) ]
        let inner = kappa * dlog - kappa * dlog_bar;
        let dlog_dx = (th.dxx * th.val - th.dx * th.dx) / (th.val * th.val);
        let dlog_bar_dx = (thb.dxx * thb.val - thb.dx * thb.dx) / (thb.val * thb.val);
        let inner_dx = kappa * dlog_dx - kappa * dlog_bar_dx;
        (th.dx - thb.dx) * inner + (theta - theta_bar) * inner_dx
    };
    rhs += divergence_part;

    // friction cross-terms
    let mut t11 = 0.0;
    let mut t12 = 0.0;
    let mut t13 = 0.0;
    let mut t14 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let b = friction.get(i, j);
            let dvb = v_bar[i] - v_bar[j];
            t11 += theta_bar * b * rho[i] * (v[i] - v_bar[i]) * (rho[j] - rho_bar[j]) * dvb;
            t12 += b * rho[i] * rho[j] * (v[i] - v_bar[i]) * dvb;
            t13 += b * (rho[i] - rho_bar[i]) * rho_bar[j] * dvb * v_bar[i];
            t14 += b * rho[i] * (rho[j] - rho_bar[j]) * dvb * v_bar[i];
        }
    }
    rhs -= t11 / eps;
    if mutation != IdentityMutation::DropThetaFrictionCross {
        rhs += (theta - theta_bar) / eps * (t12 + t13 + t14);
    }

    Ok(RhsValue {
        full: rhs,
        divergence_part,
    })
}

/// Temperature jet with second space derivative.
struct Jet3 {
    val: f64,
    dt: f64,
    dx: f64,
    dxx: f64,
}

impl Jet3 {
    fn theta(m: &ManufacturedClass2, x: f64, t: f64) -> Self {
        Jet3 {
            val: m.theta.value(m.length, x, t),
            dt: m.theta.dt(m.length, x, t),
            dx: m.theta.dx(m.length, x, t),
            dxx: m.theta.dxx(m.length, x, t),
        }
    }
}

fn check_pair_validity(pair: &IdentityPair, grid: &Grid1D, times: &[f64]) -> Result<()> {
    let dom = pair.thermo.validity();
    for &t in times {
        for j in 0..grid.ncells() {
            let x = grid.center(j);
            for m in [&pair.omega, &pair.omega_bar] {
                let theta = m.theta_at(x, t);
                if !(theta >= dom.gamma && theta <= dom.big_m) {
                    return Err(Error::Domain {
                        what: "manufactured temperature",
                        cell: j,
                        value: theta,
                        lo: dom.gamma,
                        hi: dom.big_m,
                    });
                }
                for i in 0..m.n_species() {
                    let rho = m.rho(i, x, t);
                    if !(rho > 0.0 && rho <= dom.big_m) {
                        return Err(Error::Domain {
                            what: "manufactured density",
                            cell: j,
                            value: rho,
                            lo: 0.0,
                            hi: dom.big_m,
                        });
                    }
                }
            }
        }
    }
    Ok(())
}

/// Evaluate the identity defect at resolution (grid, dt) around time t0.
pub fn check_identity(
    pair: &IdentityPair,
    grid: &Grid1D,
    t0: f64,
    dt: f64,
) -> Result<IdentityReport> {
    check_identity_with_mutation(pair, grid, t0, dt, IdentityMutation::None)
}

/// Identity defect with an optional deliberate term deletion; the mutated
/// evaluator must fail to converge, confirming the term is load-bearing.
pub fn check_identity_with_mutation(
    pair: &IdentityPair,
    grid: &Grid1D,
    t0: f64,
    dt: f64,
    mutation: IdentityMutation,
) -> Result<IdentityReport> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "identity check needs dt > 0, got {dt}"
        )));
    }
    check_pair_validity(pair, grid, &[t0 - dt, t0, t0 + dt])?;
    let nc = grid.ncells();
    let dx = grid.dx();
    let mut h_minus = vec![0.0; nc];
    let mut h_plus = vec![0.0; nc];
    let mut q0 = vec![0.0; nc];
    let mut rhs_full = vec![0.0; nc];
    let mut rhs_no_div = vec![0.0; nc];
    for j in 0..nc {
        let x = grid.center(j);
        h_minus[j] = pointwise_h_q(pair, x, t0 - dt)?.0;
        let (_, q) = pointwise_h_q(pair, x, t0)?;
        q0[j] = q;
        h_plus[j] = pointwise_h_q(pair, x, t0 + dt)?.0;
        let rhs = rhs_at(pair, x, t0, mutation)?;
        rhs_full[j] = rhs.full;
        rhs_no_div[j] = rhs.full - rhs.divergence_part;
    }
    let mut pointwise_l1 = 0.0;
    for j in 0..nc {
        let dh_dt = (h_plus[j] - h_minus[j]) / (2.0 * dt);
        let dq_dx = (q0[grid.right(j)] - q0[grid.left(j)]) / (2.0 * dx);
        pointwise_l1 += (dh_dt + dq_dx - rhs_full[j]).abs();
    }
    pointwise_l1 *= dx;

    let h_int_minus = grid.integrate(&h_minus);
    let h_int_plus = grid.integrate(&h_plus);
    let integrated =
        ((h_int_plus - h_int_minus) / (2.0 * dt) - grid.integrate(&rhs_no_div)).abs();

    Ok(IdentityReport {
        pointwise_l1,
        integrated,
    })
}

/// The built-in manufactured pairs used by the identity audit: a two-species
/// pair, a thermally driven pair (strong heat supply), and a three-species
/// pair. Forcing is nonzero for every pair by construction.
pub fn standard_pairs(length: f64) -> Vec<IdentityPair> {
    let dom = ValidityDomain::new(1e-3, 1e3).unwrap();
    let mut pairs = Vec::new();

    let thermo2 = ThermoModel::new(vec![1.0, 1.5], vec![2.0, 1.25], dom, 1e-12).unwrap();
    let friction2 = FrictionMatrix::from_upper_triangle(2, &[0.8], 0.1).unwrap();
    let omega = ManufacturedClass2 {
        length,
        species: vec![
            SpeciesWave {
                wave: Wave { mean: 2.0, amp: 0.2, mode: 2.0, sigma: 0.7, phase: 0.0 },
                drift: 0.1,
            },
            SpeciesWave {
                wave: Wave { mean: 1.5, amp: 0.15, mode: 1.0, sigma: -0.5, phase: 0.2 },
                drift: -0.05,
            },
        ],
        theta: Wave { mean: 1.0, amp: 0.2, mode: 1.0, sigma: 0.5, phase: 0.0 },
        kappa: 0.02,
    };
    let omega_bar = ManufacturedClass2 {
        length,
        species: vec![
            SpeciesWave {
                wave: Wave { mean: 1.8, amp: 0.125, mode: 1.0, sigma: 0.4, phase: 1.0 },
                drift: -0.04,
            },
            SpeciesWave {
                wave: Wave { mean: 1.6, amp: 0.1, mode: 2.0, sigma: 0.3, phase: 0.0 },
                drift: 0.12,
            },
        ],
        theta: Wave { mean: 1.1, amp: 0.15, mode: 1.0, sigma: -0.4, phase: 0.7 },
        kappa: 0.02,
    };
    pairs.push(
        IdentityPair::new("two-species", thermo2.clone(), friction2.clone(), omega, omega_bar)
            .unwrap(),
    );

    // strong temperature waves drive the heat-supply and conduction terms
    let omega_th = ManufacturedClass2 {
        length,
        species: vec![
            SpeciesWave {
                wave: Wave { mean: 2.2, amp: 0.1, mode: 1.0, sigma: 0.3, phase: 0.5 },
                drift: 0.06,
            },
            SpeciesWave {
                wave: Wave { mean: 1.7, amp: 0.12, mode: 1.0, sigma: -0.6, phase: 1.3 },
                drift: -0.02,
            },
        ],
        theta: Wave { mean: 1.3, amp: 0.45, mode: 2.0, sigma: 1.1, phase: 0.0 },
        kappa: 0.05,
    };
    let omega_bar_th = ManufacturedClass2 {
        length,
        species: vec![
            SpeciesWave {
                wave: Wave { mean: 2.0, amp: 0.15, mode: 2.0, sigma: -0.2, phase: 0.0 },
                drift: -0.07,
            },
            SpeciesWave {
                wave: Wave { mean: 1.9, amp: 0.08, mode: 1.0, sigma: 0.45, phase: 2.0 },
                drift: 0.03,
            },
        ],
        theta: Wave { mean: 1.5, amp: 0.3, mode: 1.0, sigma: -0.8, phase: 1.1 },
        kappa: 0.05,
    };
    pairs.push(
        IdentityPair::new("thermal", thermo2, friction2, omega_th, omega_bar_th).unwrap(),
    );

    let thermo3 =
        ThermoModel::new(vec![1.0, 1.2, 0.8], vec![1.5, 1.0, 2.0], dom, 1e-12).unwrap();
    let friction3 =
        FrictionMatrix::from_upper_triangle(3, &[0.6, 1.1, 0.9], 0.08).unwrap();
    let omega3 = ManufacturedClass2 {
        length,
        species: vec![
            SpeciesWave {
                wave: Wave { mean: 1.8, amp: 0.14, mode: 1.0, sigma: 0.6, phase: 0.0 },
                drift: 0.08,
            },
            SpeciesWave {
                wave: Wave { mean: 1.5, amp: 0.1, mode: 2.0, sigma: -0.4, phase: 0.9 },
                drift: -0.03,
            },
            SpeciesWave {
                wave: Wave { mean: 2.1, amp: 0.16, mode: 1.0, sigma: 0.2, phase: 1.7 },
                drift: 0.0,
            },
        ],
        theta: Wave { mean: 1.0, amp: 0.12, mode: 1.0, sigma: 0.7, phase: 0.4 },
        kappa: 0.03,
    };
    let omega_bar3 = ManufacturedClass2 {
        length,
        species: vec![
            SpeciesWave {
                wave: Wave { mean: 2.0, amp: 0.1, mode: 2.0, sigma: -0.5, phase: 0.6 },
                drift: -0.05,
            },
            SpeciesWave {
                wave: Wave { mean: 1.7, amp: 0.12, mode: 1.0, sigma: 0.35, phase: 0.0 },
                drift: 0.07,
            },
            SpeciesWave {
                wave: Wave { mean: 1.9, amp: 0.09, mode: 1.0, sigma: -0.25, phase: 2.4 },
                drift: 0.02,
            },
        ],
        theta: Wave { mean: 1.2, amp: 0.1, mode: 2.0, sigma: -0.6, phase: 1.5 },
        kappa: 0.03,
    };
    pairs.push(IdentityPair::new("three-species", thermo3, friction3, omega3, omega_bar3).unwrap());

    pairs
}

#[cfg(test)]
mod tests {
    use super::*;

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
        let sources = SourceConfig::zero(0.01).unwrap();
        (thermo, friction, sources)
    }

    fn class1_state(
        nc: usize,
        grid: &Grid1D,
        thermo: &ThermoModel,
        friction: &FrictionMatrix,
        sources: &SourceConfig,
    ) -> StateI {
        let rho1: Vec<f64> = (0..nc)
            .map(|j| 1.0 + 0.2 * (2.0 * std::f64::consts::PI * grid.center(j)).sin())
            .collect();
        StateI::from_primitives(
            0.0,
            vec![rho1, vec![1.5; nc]],
            vec![0.1; nc],
            vec![1.0; nc],
            grid,
            thermo,
            friction,
            sources,
        )
        .unwrap()
    }

    #[test]
    fn lift_reproduces_barycentric_mean() {
        let (thermo, friction, sources) = setup(2, 0.05);
        let grid = Grid1D::new(32, 1.0).unwrap();
        let state = class1_state(32, &grid, &thermo, &friction, &sources);
        let lifted = lift(&state);
        for j in 0..32 {
            let rho_tot: f64 = (0..2).map(|i| state.rho[i][j]).sum();
            let mean: f64 = (0..2)
                .map(|i| state.rho[i][j] * lifted.v[i][j])
                .sum::<f64>()
                / rho_tot;
            assert!((mean - state.v[j]).abs() < 1e-13);
        }
    }

    #[test]
    fn lift_with_zero_u_copies_velocity() {
        let (thermo, friction, sources) = setup(2, 0.05);
        let grid = Grid1D::new(16, 1.0).unwrap();
        let state = StateI::from_primitives(
            0.0,
            vec![vec![1.0; 16], vec![2.0; 16]],
            vec![0.3; 16],
            vec![1.0; 16],
            &grid,
            &thermo,
            &friction,
            &sources,
        )
        .unwrap();
        let lifted = lift(&state);
        for i in 0..2 {
            for j in 0..16 {
                assert!((lifted.v[i][j] - 0.3).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn relative_entropy_zero_iff_equal() {
        let (thermo, friction, sources) = setup(2, 0.05);
        let grid = Grid1D::new(32, 1.0).unwrap();
        let state1 = class1_state(32, &grid, &thermo, &friction, &sources);
        let lifted = lift(&state1);
        let state2 = StateII::from_primitives(
            0.0,
            lifted.rho.clone(),
            lifted.v.clone(),
            lifted.theta.clone(),
            &thermo,
        )
        .unwrap();
        let rep =
            relative_entropy(&state2, &lifted, &thermo, &grid, &friction, &sources, 0.0).unwrap();
        assert_eq!(rep.h, 0.0);
        assert_eq!(rep.friction_dissipation, 0.0);
        assert_eq!(rep.conduction_dissipation, 0.0);

        // perturb one cell -> strictly positive
        let mut v = lifted.v.clone();
        v[0][7] += 1e-3;
        let perturbed =
            StateII::from_primitives(0.0, lifted.rho.clone(), v, lifted.theta.clone(), &thermo)
                .unwrap();
        let rep2 =
            relative_entropy(&perturbed, &lifted, &thermo, &grid, &friction, &sources, 0.0)
                .unwrap();
        assert!(rep2.h > 0.0);
    }

    #[test]
    fn relative_entropy_is_quadratic_in_perturbation() {
        let (thermo, friction, sources) = setup(2, 0.05);
        let grid = Grid1D::new(16, 1.0).unwrap();
        let state1 = class1_state(16, &grid, &thermo, &friction, &sources);
        let lifted = lift(&state1);
        let mut hs = Vec::new();
        for delta in [1e-2, 1e-3, 1e-4] {
            let mut theta = lifted.theta.clone();
            theta[3] += delta;
            let perturbed = StateII::from_primitives(
                0.0,
                lifted.rho.clone(),
                lifted.v.clone(),
                theta,
                &thermo,
            )
            .unwrap();
            let rep = relative_entropy(
                &perturbed, &lifted, &thermo, &grid, &friction, &sources, 0.0,
            )
            .unwrap();
            hs.push(rep.h);
        }
        let s1 = (hs[0] / hs[1]).log10();
        let s2 = (hs[1] / hs[2]).log10();
        assert!(s1 > 1.9 && s1 < 2.1, "slope {s1}");
        assert!(s2 > 1.9 && s2 < 2.1, "slope {s2}");
    }

    #[test]
    fn entropy_production_signs() {
        let (thermo, friction, sources) = setup(2, 0.05);
        let grid = Grid1D::new(32, 1.0).unwrap();
        // uniform: everything zero
        let uniform = StateII::from_primitives(
            0.0,
            vec![vec![1.0; 32]; 2],
            vec![vec![0.2; 32]; 2],
            vec![1.0; 32],
            &thermo,
        )
        .unwrap();
        let p = entropy_production_class2(&uniform, &grid, &friction, &sources);
        assert_eq!(p.conduction, 0.0);
        assert_eq!(p.friction, 0.0);
        assert_eq!(p.supply, 0.0);

        // aligned velocities, nonuniform theta: only conduction
        let theta: Vec<f64> = (0..32)
            .map(|j| 1.0 + 0.1 * (2.0 * std::f64::consts::PI * grid.center(j)).cos())
            .collect();
        let warm = StateII::from_primitives(
            0.0,
            vec![vec![1.0; 32]; 2],
            vec![vec![0.2; 32]; 2],
            theta,
            &thermo,
        )
        .unwrap();
        let p = entropy_production_class2(&warm, &grid, &friction, &sources);
        assert_eq!(p.friction, 0.0);
        assert!(p.conduction > 0.0);
    }

    #[test]
    fn class1_friction_production_scales_linearly_with_eps() {
        // u = O(eps) so the friction quadratic over eps is O(eps)
        let grid = Grid1D::new(64, 1.0).unwrap();
        let mut prods = Vec::new();
        for eps in [1e-1, 1e-2, 1e-3] {
            let (thermo, friction, sources) = setup(2, eps);
            let state = class1_state(64, &grid, &thermo, &friction, &sources);
            let p = entropy_production_class1(&state, &grid, &friction, &sources);
            prods.push(p.friction);
        }
        let s1 = (prods[0] / prods[1]).log10();
        let s2 = (prods[1] / prods[2]).log10();
        assert!((s1 - 1.0).abs() < 0.05, "slope {s1}");
        assert!((s2 - 1.0).abs() < 0.05, "slope {s2}");
    }

    #[test]
    fn coercivity_infimum_is_positive() {
        let dom = ValidityDomain::new(0.1, 10.0).unwrap();
        let thermo = ThermoModel::new(vec![1.0, 1.5], vec![2.0, 1.25], dom, 1e-12).unwrap();
        let est = measure_coercivity(&thermo, 2000, 11).unwrap();
        assert!(est.infimum > 0.0, "infimum {}", est.infimum);
    }

    #[test]
    fn identity_defect_is_zero_for_identical_fields() {
        let pairs = standard_pairs(1.0);
        let p = &pairs[0];
        let same = IdentityPair::new(
            "same",
            p.thermo.clone(),
            p.friction.clone(),
            p.omega.clone(),
            p.omega.clone(),
        )
        .unwrap();
        let grid = Grid1D::new(32, 1.0).unwrap();
        let rep = check_identity(&same, &grid, 0.3, 1e-3).unwrap();
        assert!(rep.pointwise_l1 < 1e-12, "pointwise {}", rep.pointwise_l1);
        assert!(rep.integrated < 1e-12, "integrated {}", rep.integrated);
    }

    #[test]
    fn identity_defect_converges_under_refinement() {
        let pairs = standard_pairs(1.0);
        for pair in &pairs {
            let mut defects = Vec::new();
            for level in 0..3 {
                let nc = 32 << level;
                let dt = 4e-3 / (1 << level) as f64;
                let grid = Grid1D::new(nc, 1.0).unwrap();
                let rep = check_identity(pair, &grid, 0.25, dt).unwrap();
                defects.push(rep.pointwise_l1);
            }
            let o1 = (defects[0] / defects[1]).log2();
            let o2 = (defects[1] / defects[2]).log2();
            assert!(
                o1 >= 0.9 && o2 >= 0.9,
                "pair {}: defects {:?}, orders {o1:.2}, {o2:.2}",
                pair.label,
                defects
            );
        }
    }

    #[test]
    fn mutated_identity_stops_converging() {
        let pairs = standard_pairs(1.0);
        let pair = &pairs[0];
        let mut defects = Vec::new();
        for level in 0..3 {
            let nc = 32 << level;
            let dt = 4e-3 / (1 << level) as f64;
            let grid = Grid1D::new(nc, 1.0).unwrap();
            let rep = check_identity_with_mutation(
                pair,
                &grid,
                0.25,
                dt,
                IdentityMutation::DropThetaFrictionCross,
            )
            .unwrap();
            defects.push(rep.pointwise_l1);
        }
        let o2 = (defects[1] / defects[2]).log2();
        assert!(
            o2 < 0.5,
            "deleted terms should leave an O(1) defect, got orders ending {o2:.2} ({defects:?})"
        );
    }

    #[test]
    fn identity_rejects_fields_leaving_the_domain() {
        let pairs = standard_pairs(1.0);
        let p = &pairs[0];
        let narrow = ThermoModel::new(
            vec![1.0, 1.5],
            vec![2.0, 1.25],
            ValidityDomain::new(0.999, 1.001).unwrap(),
            1e-12,
        )
        .unwrap();
        let bad = IdentityPair::new(
            "bad",
            narrow,
            p.friction.clone(),
            p.omega.clone(),
            p.omega_bar.clone(),
        )
        .unwrap();
        let grid = Grid1D::new(16, 1.0).unwrap();
        assert!(matches!(
            check_identity(&bad, &grid, 0.3, 1e-3),
            Err(Error::Domain { .. })
        ));
    }
}
