//! Ideal-gas constitutive closure: per-species Helmholtz free energy and all
//! quantities derived from it, plus the second-order relative (Taylor-remainder)
//! quantities used by the relative-entropy diagnostics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Box of admissible states: `gamma <= rho, theta <= big_m` (and `rho_i <= big_m`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityDomain {
    pub gamma: f64,
    pub big_m: f64,
}

impl ValidityDomain {
    pub fn new(gamma: f64, big_m: f64) -> Result<Self> {
        if !(0.0 < gamma && gamma < big_m) {
            return Err(Error::InvalidArgument(format!(
                "validity domain needs 0 < gamma < M, got gamma={gamma}, M={big_m}"
            )));
        }
        Ok(Self { gamma, big_m })
    }
}

/// Per-species ideal-gas coefficients: psi_i = R_i theta ln rho_i - c_i theta ln theta.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermoModel {
    r: Vec<f64>,
    c: Vec<f64>,
    validity: ValidityDomain,
    rho_floor: f64,
}

/// All constitutive quantities of one species at one state.
#[derive(Debug, Clone, Copy)]
pub struct SpeciesThermoEval {
    /// Specific free energy psi_i.
    pub psi: f64,
    /// Chemical potential mu_i = (rho_i psi_i)_{rho_i}.
    pub mu: f64,
    /// Specific entropy eta_i.
    pub eta: f64,
    /// Specific internal energy e_i.
    pub e: f64,
    /// Partial pressure p_i.
    pub p: f64,
}

/// Which second-order relative quantity to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelativeKind {
    Pressure,
    EntropyDensity,
}

/// Outcome of the Gibbs-stability sign audit over sampled states.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub samples: usize,
    /// min over samples of (rho_i psi_i)_{rho_i rho_i}; must stay positive.
    pub min_rho_convexity: f64,
    /// min over samples of -(rho_i psi_i)_{theta theta}; must stay positive.
    pub min_theta_concavity: f64,
    /// worst relative disagreement between closed-form and finite-difference second derivatives.
    pub max_fd_mismatch: f64,
    pub pass: bool,
}

impl ThermoModel {
    /// Validating constructor: R_i > 0, c_i > 0.
    pub fn new(r: Vec<f64>, c: Vec<f64>, validity: ValidityDomain, rho_floor: f64) -> Result<Self> {
        if r.is_empty() || r.len() != c.len() {
            return Err(Error::InvalidArgument(format!(
                "species coefficient arrays must be nonempty and equal length, got |R|={}, |c|={}",
                r.len(),
                c.len()
            )));
        }
        if let Some(bad) = r.iter().chain(c.iter()).find(|&&x| !(x > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "gas constants and specific heats must be positive, got {bad}"
            )));
        }
        if !(rho_floor > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "rho_floor must be positive, got {rho_floor}"
            )));
        }
        Ok(Self {
            r,
            c,
            validity,
            rho_floor,
        })
    }

    /// Constructor without sign validation, for audit paths that must be able to
    /// examine models violating the Gibbs stability conditions.
    pub fn new_unchecked(r: Vec<f64>, c: Vec<f64>, validity: ValidityDomain, rho_floor: f64) -> Self {
        Self {
            r,
            c,
            validity,
            rho_floor,
        }
    }

    pub fn n_species(&self) -> usize {
        self.r.len()
    }

    pub fn gas_constant(&self, i: usize) -> f64 {
        self.r[i]
    }

    pub fn specific_heat(&self, i: usize) -> f64 {
        self.c[i]
    }

    pub fn validity(&self) -> ValidityDomain {
        self.validity
    }

    pub fn rho_floor(&self) -> f64 {
        self.rho_floor
    }

    /// Per-species sound-speed proxy sqrt(R theta (1 + R/c)), the wave-speed
    /// bound used by the CFL contract and the Rusanov dissipation.
    pub fn sound_speed(&self, i: usize, theta: f64) -> f64 {
        (self.r[i] * theta * (1.0 + self.r[i] / self.c[i])).sqrt()
    }

    /// Evaluate all constitutive quantities; requires strictly positive arguments.
    pub fn eval_species(&self, i: usize, rho_i: f64, theta: f64) -> Result<SpeciesThermoEval> {
        if !(rho_i > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "eval_species needs rho_i > 0, got rho_{i} = {rho_i}"
            )));
        }
        if !(theta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "eval_species needs theta > 0, got theta = {theta}"
            )));
        }
        Ok(self.eval_floored(i, rho_i, theta).0)
    }

    /// Evaluation tolerating rho_i = 0: the density is floored at `rho_floor`
    /// inside logarithms only (p_i and e_i use the true density). The flag
    /// reports whether the floor was applied.
    pub fn eval_floored(&self, i: usize, rho_i: f64, theta: f64) -> (SpeciesThermoEval, bool) {
        let clamped = rho_i < self.rho_floor;
        let rho_log = rho_i.max(self.rho_floor);
        let (r, c) = (self.r[i], self.c[i]);
        let ln_rho = rho_log.ln();
        let ln_theta = theta.ln();
        let psi = r * theta * ln_rho - c * theta * ln_theta;
        let mu = r * theta * (ln_rho + 1.0) - c * theta * ln_theta;
        let eta = -r * ln_rho + c * (ln_theta + 1.0);
        let e = c * theta;
        let p = r * rho_i * theta;
        (SpeciesThermoEval { psi, mu, eta, e, p }, clamped)
    }

    /// Free-energy density rho_i psi_i.
    pub fn rho_psi(&self, i: usize, rho_i: f64, theta: f64) -> f64 {
        let rho_log = rho_i.max(self.rho_floor);
        rho_i * (self.r[i] * theta * rho_log.ln() - self.c[i] * theta * theta.ln())
    }

    /// Entropy density rho_i eta_i.
    pub fn rho_eta(&self, i: usize, rho_i: f64, theta: f64) -> f64 {
        let rho_log = rho_i.max(self.rho_floor);
        rho_i * (-self.r[i] * rho_log.ln() + self.c[i] * (theta.ln() + 1.0))
    }

    /// (rho_i psi_i)_{rho_i rho_i} = R theta / rho.
    pub fn d2_rho_psi_drho2(&self, i: usize, rho_i: f64, theta: f64) -> f64 {
        self.r[i] * theta / rho_i
    }

    /// (rho_i psi_i)_{theta theta} = -c rho / theta.
    pub fn d2_rho_psi_dtheta2(&self, i: usize, rho_i: f64, theta: f64) -> f64 {
        -self.c[i] * rho_i / theta
    }

    /// (rho_i eta_i)_{rho_i}.
    pub fn d_rho_eta_drho(&self, i: usize, rho_i: f64, theta: f64) -> f64 {
        let rho_log = rho_i.max(self.rho_floor);
        -self.r[i] * (rho_log.ln() + 1.0) + self.c[i] * (theta.ln() + 1.0)
    }

    /// (rho_i eta_i)_{theta}.
    pub fn d_rho_eta_dtheta(&self, i: usize, rho_i: f64, _theta: f64) -> f64 {
        self.c[i] * rho_i / _theta
    }

    fn check_relative_args(&self, omega: (f64, f64), omega_bar: (f64, f64)) -> Result<()> {
        let ((rho, theta), (rho_bar, theta_bar)) = (omega, omega_bar);
        if !(rho >= 0.0) || !(theta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "relative evaluation needs rho >= 0 and theta > 0, got ({rho}, {theta})"
            )));
        }
        if !(rho_bar > 0.0) || !(theta_bar > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "relative evaluation needs rho_bar > 0 and theta_bar > 0, got ({rho_bar}, {theta_bar})"
            )));
        }
        Ok(())
    }

    /// Quadratic Taylor remainder of rho_i psi_i at `omega_bar`, evaluated at `omega`.
    /// States are (rho_i, theta) pairs.
    pub fn relative_free_energy(
        &self,
        i: usize,
        omega: (f64, f64),
        omega_bar: (f64, f64),
    ) -> Result<f64> {
        self.check_relative_args(omega, omega_bar)?;
        let ((rho, theta), (rho_bar, theta_bar)) = (omega, omega_bar);
        let mu_bar = self.eval_floored(i, rho_bar, theta_bar).0.mu;
        // (rho psi)_theta = -rho eta
        let rho_eta_bar = self.rho_eta(i, rho_bar, theta_bar);
        Ok(self.rho_psi(i, rho, theta) - self.rho_psi(i, rho_bar, theta_bar)
            - mu_bar * (rho - rho_bar)
            + rho_eta_bar * (theta - theta_bar))
    }

    /// Second-order relative pressure or relative entropy density.
    pub fn relative_quantity(
        &self,
        kind: RelativeKind,
        i: usize,
        omega: (f64, f64),
        omega_bar: (f64, f64),
    ) -> Result<f64> {
        self.check_relative_args(omega, omega_bar)?;
        let ((rho, theta), (rho_bar, theta_bar)) = (omega, omega_bar);
        let value = match kind {
            RelativeKind::Pressure => {
                let r = self.r[i];
                r * rho * theta - r * rho_bar * theta_bar
                    - r * theta_bar * (rho - rho_bar)
                    - r * rho_bar * (theta - theta_bar)
            }
            RelativeKind::EntropyDensity => {
                self.rho_eta(i, rho, theta) - self.rho_eta(i, rho_bar, theta_bar)
                    - self.d_rho_eta_drho(i, rho_bar, theta_bar) * (rho - rho_bar)
                    - self.d_rho_eta_dtheta(i, rho_bar, theta_bar) * (theta - theta_bar)
            }
        };
        Ok(value)
    }

    /// Sample the validity domain and audit the Gibbs stability signs, comparing
    /// closed-form second derivatives against central finite differences.
    pub fn check_stability(&self, samples: usize, seed: u64) -> Result<StabilityReport> {
        if samples == 0 {
            return Err(Error::InvalidArgument(
                "check_stability needs at least one sample".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dom = self.validity;
        let span = dom.big_m - dom.gamma;
        let mut min_rho_convexity = f64::INFINITY;
        let mut min_theta_concavity = f64::INFINITY;
        let mut max_fd_mismatch: f64 = 0.0;
        for _ in 0..samples {
            let rho = dom.gamma + span * rng.gen::<f64>();
            let theta = dom.gamma + span * rng.gen::<f64>();
            for i in 0..self.n_species() {
                let drr = self.d2_rho_psi_drho2(i, rho, theta);
                let dtt = self.d2_rho_psi_dtheta2(i, rho, theta);
                min_rho_convexity = min_rho_convexity.min(drr);
                min_theta_concavity = min_theta_concavity.min(-dtt);

                let h_r = 1e-5 * rho;
                let fd_rr = (self.rho_psi(i, rho + h_r, theta) - 2.0 * self.rho_psi(i, rho, theta)
                    + self.rho_psi(i, rho - h_r, theta))
                    / (h_r * h_r);
                let h_t = 1e-5 * theta;
                let fd_tt = (self.rho_psi(i, rho, theta + h_t) - 2.0 * self.rho_psi(i, rho, theta)
                    + self.rho_psi(i, rho, theta - h_t))
                    / (h_t * h_t);
                let scale_rr = drr.abs().max(1e-8);
                let scale_tt = dtt.abs().max(1e-8);
                max_fd_mismatch = max_fd_mismatch
                    .max((fd_rr - drr).abs() / scale_rr)
                    .max((fd_tt - dtt).abs() / scale_tt);
            }
        }
        let pass = min_rho_convexity > 0.0 && min_theta_concavity > 0.0;
        Ok(StabilityReport {
            samples,
            min_rho_convexity,
            min_theta_concavity,
            max_fd_mismatch,
            pass,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(r: Vec<f64>, c: Vec<f64>) -> ThermoModel {
        ThermoModel::new(r, c, ValidityDomain::new(0.1, 10.0).unwrap(), 1e-12).unwrap()
    }

    #[test]
    fn unit_state_closes_to_unit_values() {
        let m = model(vec![1.0], vec![1.0]);
        let ev = m.eval_species(0, 1.0, 1.0).unwrap();
        assert_eq!(ev.psi, 0.0);
        assert!((ev.mu - 1.0).abs() < 1e-15);
        assert!((ev.eta - 1.0).abs() < 1e-15);
        assert!((ev.e - 1.0).abs() < 1e-15);
        assert!((ev.p - 1.0).abs() < 1e-15);
    }

    #[test]
    fn psi_vanishes_at_unit_state_for_any_model() {
        let m = model(vec![3.7, 0.4], vec![2.2, 5.0]);
        for i in 0..2 {
            assert_eq!(m.eval_species(i, 1.0, 1.0).unwrap().psi, 0.0);
        }
    }

    #[test]
    fn closed_forms_match_ideal_gas_relations() {
        let m = model(vec![2.0], vec![3.0]);
        let rho = std::f64::consts::E;
        let ev = m.eval_species(0, rho, 1.0).unwrap();
        assert!((ev.p - 2.0 * rho).abs() < 1e-14);
        assert!((ev.e - 3.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_nonpositive_arguments() {
        let m = model(vec![1.0], vec![1.0]);
        assert!(m.eval_species(0, 0.0, 1.0).is_err());
        assert!(m.eval_species(0, 1.0, -1.0).is_err());
    }

    #[test]
    fn mu_and_eta_match_finite_differences_of_rho_psi() {
        // central differences of rho*psi converge to mu and -rho*eta at order >= 1.9
        let m = model(vec![1.3, 0.7], vec![0.9, 2.1]);
        let states = [(0.8, 1.1), (1.7, 0.6), (2.5, 2.0)];
        for i in 0..2 {
            for &(rho, theta) in &states {
                let ev = m.eval_species(i, rho, theta).unwrap();
                let mut errs_mu = Vec::new();
                let mut errs_eta = Vec::new();
                for h in [1e-2, 1e-3, 1e-4] {
                    let fd_mu =
                        (m.rho_psi(i, rho + h, theta) - m.rho_psi(i, rho - h, theta)) / (2.0 * h);
                    let fd_eta =
                        -(m.rho_psi(i, rho, theta + h) - m.rho_psi(i, rho, theta - h)) / (2.0 * h)
                            / rho;
                    errs_mu.push((fd_mu - ev.mu).abs().max(1e-16));
                    errs_eta.push((fd_eta - ev.eta).abs().max(1e-16));
                }
                for errs in [errs_mu, errs_eta] {
                    let order1 = (errs[0] / errs[1]).log10();
                    let order2 = (errs[1] / errs[2]).log10();
                    assert!(
                        order1 > 1.9 && order2 > 1.9,
                        "orders {order1:.3}, {order2:.3} for state ({rho}, {theta})"
                    );
                }
            }
        }
    }

    #[test]
    fn gradient_identity_along_smooth_path() {
        // d/ds p = rho d/ds mu + rho eta d/ds theta along (rho(s), theta(s))
        let m = model(vec![1.4], vec![2.3]);
        let rho = |s: f64| 1.0 + 0.3 * s.sin();
        let theta = |s: f64| 1.2 + 0.2 * s.cos();
        let h = 1e-6;
        for &s in &[0.3, 1.1, 2.9] {
            let ev = m.eval_species(0, rho(s), theta(s)).unwrap();
            let dp = (m.eval_species(0, rho(s + h), theta(s + h)).unwrap().p
                - m.eval_species(0, rho(s - h), theta(s - h)).unwrap().p)
                / (2.0 * h);
            let dmu = (m.eval_species(0, rho(s + h), theta(s + h)).unwrap().mu
                - m.eval_species(0, rho(s - h), theta(s - h)).unwrap().mu)
                / (2.0 * h);
            let dtheta = (theta(s + h) - theta(s - h)) / (2.0 * h);
            let rhs = rho(s) * dmu + rho(s) * ev.eta * dtheta;
            assert!(
                (dp - rhs).abs() < 1e-6 * (1.0 + dp.abs()),
                "gradient identity defect {} at s={s}",
                (dp - rhs).abs()
            );
        }
    }

    #[test]
    fn relative_free_energy_vanishes_at_base_point() {
        let m = model(vec![1.0, 2.0], vec![1.5, 0.5]);
        for i in 0..2 {
            let v = m.relative_free_energy(i, (1.3, 0.9), (1.3, 0.9)).unwrap();
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn relative_free_energy_positive_off_base() {
        let m = model(vec![1.0], vec![1.0]);
        let v = m.relative_free_energy(0, (1.1, 1.0), (1.0, 1.0)).unwrap();
        assert!(v > 0.0);
    }

    #[test]
    fn relative_free_energy_nonnegative_at_equal_temperature() {
        // convexity of rho*psi in rho at fixed theta, brute-force over a state grid
        let m = model(vec![1.2, 0.8], vec![0.7, 1.9]);
        for i in 0..2 {
            for a in 1..20 {
                for b in 1..20 {
                    for theta10 in [5, 10, 18] {
                        let rho = 0.2 * a as f64;
                        let rho_bar = 0.2 * b as f64;
                        let theta = 0.1 * theta10 as f64;
                        let v = m
                            .relative_free_energy(i, (rho, theta), (rho_bar, theta))
                            .unwrap();
                        assert!(v >= -1e-13, "negative remainder {v} at ({rho},{rho_bar},{theta})");
                    }
                }
            }
        }
    }

    #[test]
    fn relative_pressure_is_bilinear_remainder() {
        let m = model(vec![1.0], vec![1.0]);
        let v = m
            .relative_quantity(RelativeKind::Pressure, 0, (2.0, 2.0), (1.0, 1.0))
            .unwrap();
        assert!((v - 1.0).abs() < 1e-14);
        // exact form R (rho - rho_bar)(theta - theta_bar) for the ideal gas
        let m2 = model(vec![2.5], vec![1.0]);
        let (rho, theta, rho_bar, theta_bar) = (1.7, 0.8, 0.9, 1.4);
        let v2 = m2
            .relative_quantity(RelativeKind::Pressure, 0, (rho, theta), (rho_bar, theta_bar))
            .unwrap();
        assert!((v2 - 2.5 * (rho - rho_bar) * (theta - theta_bar)).abs() < 1e-13);
    }

    #[test]
    fn relative_quantities_vanish_at_base_point() {
        let m = model(vec![1.1], vec![2.0]);
        for kind in [RelativeKind::Pressure, RelativeKind::EntropyDensity] {
            let v = m.relative_quantity(kind, 0, (0.7, 1.3), (0.7, 1.3)).unwrap();
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn gibbs_duhem_residual_below_tolerance() {
        let m = model(vec![1.7, 0.3], vec![2.9, 1.1]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let rho = 0.1 + 9.9 * rng.gen::<f64>();
            let theta = 0.1 + 9.9 * rng.gen::<f64>();
            for i in 0..2 {
                let ev = m.eval_species(i, rho, theta).unwrap();
                let resid = (rho * ev.psi + ev.p - rho * ev.mu).abs();
                assert!(resid <= 1e-12 * (rho * ev.mu).abs().max(1.0));
                let psi_recon = ev.e - ev.eta * theta;
                assert!((ev.psi - psi_recon).abs() <= 1e-12 * ev.psi.abs().max(1.0));
            }
        }
    }

    #[test]
    fn stability_check_passes_for_valid_model() {
        let m = model(vec![1.0, 2.0], vec![1.0, 0.5]);
        let rep = m.check_stability(200, 42).unwrap();
        assert!(rep.pass);
        assert!(rep.min_rho_convexity > 0.0);
        assert!(rep.min_theta_concavity > 0.0);
        assert!(rep.max_fd_mismatch < 1e-4);
    }

    #[test]
    fn stability_check_fails_for_negative_heat_capacity() {
        let m = ThermoModel::new_unchecked(
            vec![1.0],
            vec![-1.0],
            ValidityDomain::new(0.1, 10.0).unwrap(),
            1e-12,
        );
        let rep = m.check_stability(50, 1).unwrap();
        assert!(!rep.pass);
    }

    #[test]
    fn stability_check_rejects_zero_samples() {
        let m = model(vec![1.0], vec![1.0]);
        assert!(m.check_stability(0, 1).is_err());
    }

    #[test]
    fn vacuum_density_floors_logarithms_only() {
        let m = model(vec![1.0], vec![1.0]);
        let (ev, clamped) = m.eval_floored(0, 0.0, 1.0);
        assert!(clamped);
        assert_eq!(ev.p, 0.0);
        assert_eq!(ev.e, 1.0);
        assert!(ev.psi.is_finite() && ev.eta.is_finite());
    }
}
