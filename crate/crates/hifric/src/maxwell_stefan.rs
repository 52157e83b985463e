//! Constrained Maxwell-Stefan solve: given a cell state and driving forces,
//! find the diffusional velocities u_i with
//! `-sum_{j!=i} b_ij theta rho_i rho_j (u_i - u_j) = eps d_i` under the
//! mass-weighted constraint `sum_i rho_i u_i = 0`.
//!
//! The friction operator is singular (constants span its kernel); the system is
//! solvable only when the forces sum to zero, and the constraint then selects
//! the unique solution. We solve the bordered (n+1)x(n+1) system
//! `[A, rho; rho^T, 0] [u; lambda] = [-eps d; 0]`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative tolerance on |sum d_i| for the solvability check.
pub const TOL_CONSISTENCY: f64 = 1e-10;
/// Absolute tolerance on |sum rho_i u_i| for a conforming solution.
pub const TOL_CONSTRAINT: f64 = 1e-12;
/// Force-residual tolerance for a conforming solution.
pub const TOL_SOLVE: f64 = 1e-11;

/// Symmetric binary friction coefficients b_ij (diagonal ignored) and the
/// friction time scale eps.
#[derive(Debug, Clone, PartialEq)]
pub struct FrictionMatrix {
    n: usize,
    b: Vec<f64>, // row-major n*n, symmetric, zero diagonal
    epsilon: f64,
}

impl FrictionMatrix {
    /// Build from the strict upper triangle in row-major order
    /// (b_12, b_13, ..., b_1n, b_23, ...).
    pub fn from_upper_triangle(n: usize, upper: &[f64], epsilon: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("need at least one species".into()));
        }
        let expected = n * (n - 1) / 2;
        if upper.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "friction upper triangle for n={n} needs {expected} entries, got {}",
                upper.len()
            )));
        }
        if !(epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        let mut b = vec![0.0; n * n];
        let mut k = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = upper[k];
                k += 1;
                if !(v > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "friction coefficient b_{}{} must be positive, got {v}",
                        i + 1,
                        j + 1
                    )));
                }
                b[i * n + j] = v;
                b[j * n + i] = v;
            }
        }
        Ok(Self { n, b, epsilon })
    }

    pub fn n_species(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.b[i * self.n + j]
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Same coefficients with a different time scale.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        Ok(Self {
            epsilon,
            ..self.clone()
        })
    }
}

/// Per-species force densities for one cell; solvable only when they sum to zero.
#[derive(Debug, Clone)]
pub struct DrivingForces(pub Vec<f64>);

/// Per-species diffusional velocities for one cell.
#[derive(Debug, Clone)]
pub struct DiffusionalVelocities(pub Vec<f64>);

/// Residual norms of a candidate solution.
#[derive(Debug, Clone)]
pub struct MsResidual {
    /// |-sum_j b_ij theta rho_i rho_j (u_i - u_j) - eps d_i| per species.
    pub force: Vec<f64>,
    /// |sum_i rho_i u_i|.
    pub constraint: f64,
}

/// Driving forces d_i = (rho_i/rho)(rho b - grad p) - rho_i b_i + grad p_i.
/// Uses per-species pressure gradients so the forces telescope to zero exactly.
pub fn assemble_forces(rho: &[f64], body_force: &[f64], grad_p: &[f64]) -> DrivingForces {
    let n = rho.len();
    assert_eq!(body_force.len(), n);
    assert_eq!(grad_p.len(), n);
    let rho_tot: f64 = rho.iter().sum();
    let rho_b: f64 = (0..n).map(|i| rho[i] * body_force[i]).sum();
    let grad_p_tot: f64 = grad_p.iter().sum();
    let d = (0..n)
        .map(|i| rho[i] / rho_tot * (rho_b - grad_p_tot) - rho[i] * body_force[i] + grad_p[i])
        .collect();
    DrivingForces(d)
}

fn check_shapes(rho: &[f64], friction: &FrictionMatrix, forces: &DrivingForces) -> Result<()> {
    let n = friction.n_species();
    if rho.len() != n || forces.0.len() != n {
        return Err(Error::Shape(format!(
            "species counts disagree: rho has {}, forces {}, friction {}",
            rho.len(),
            forces.0.len(),
            n
        )));
    }
    Ok(())
}

/// Solve the constrained Maxwell-Stefan system for one cell.
pub fn solve(
    rho: &[f64],
    theta_bar: f64,
    friction: &FrictionMatrix,
    forces: &DrivingForces,
) -> Result<DiffusionalVelocities> {
    check_shapes(rho, friction, forces)?;
    let n = friction.n_species();
    if !(theta_bar > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "Maxwell-Stefan solve needs theta > 0, got {theta_bar}"
        )));
    }
    for (i, &r) in rho.iter().enumerate() {
        if !(r > 0.0) {
            return Err(Error::Domain {
                what: "rho_i in Maxwell-Stefan solve",
                cell: i,
                value: r,
                lo: f64::MIN_POSITIVE,
                hi: f64::INFINITY,
            });
        }
    }
    let scale: f64 = forces.0.iter().map(|d| d.abs()).sum();
    let sum_d: f64 = forces.0.iter().sum();
    if scale > 0.0 && sum_d.abs() > TOL_CONSISTENCY * scale {
        return Err(Error::InconsistentForces {
            sum: sum_d.abs(),
            tol: TOL_CONSISTENCY * scale,
        });
    }
    if n == 1 {
        return Ok(DiffusionalVelocities(vec![0.0]));
    }

    let mut coeff_max: f64 = 0.0;
    let mut m = DMatrix::<f64>::zeros(n + 1, n + 1);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i == j {
                continue;
            }
            let a = friction.get(i, j) * theta_bar * rho[i] * rho[j];
            coeff_max = coeff_max.max(a);
            m[(i, j)] = -a;
            diag += a;
        }
        m[(i, i)] = diag;
        m[(i, n)] = rho[i];
        m[(n, i)] = rho[i];
    }
    if coeff_max == 0.0 {
        return Err(Error::InvalidArgument(
            "all friction couplings underflowed to zero; state is outside the solver domain".into(),
        ));
    }
    let mut rhs = DVector::<f64>::zeros(n + 1);
    for i in 0..n {
        rhs[i] = -friction.epsilon() * forces.0[i];
    }
    let lu = m.lu();
    let sol = lu.solve(&rhs).ok_or_else(|| {
        Error::InvalidArgument("bordered Maxwell-Stefan matrix is singular".into())
    })?;
    Ok(DiffusionalVelocities(sol.as_slice()[..n].to_vec()))
}

/// Force and constraint residuals of a candidate solution.
pub fn residual(
    rho: &[f64],
    theta_bar: f64,
    friction: &FrictionMatrix,
    forces: &DrivingForces,
    u: &DiffusionalVelocities,
) -> MsResidual {
    let n = rho.len();
    let mut force = Vec::with_capacity(n);
    for i in 0..n {
        let mut fric = 0.0;
        for j in 0..n {
            if i != j {
                fric += friction.get(i, j) * theta_bar * rho[i] * rho[j] * (u.0[i] - u.0[j]);
            }
        }
        force.push((-fric - friction.epsilon() * forces.0[i]).abs());
    }
    let constraint: f64 = (0..n).map(|i| rho[i] * u.0[i]).sum::<f64>().abs();
    MsResidual { force, constraint }
}
