//! Tour of the ideal-gas closure: constitutive quantities, the Gibbs-Duhem
//! residual, the Gibbs stability audit and the empirical coercivity constant.

use hifric::diagnostics::measure_coercivity;
use hifric::thermo::{RelativeKind, ThermoModel, ValidityDomain};

fn main() -> hifric::Result<()> {
    let thermo = ThermoModel::new(
        vec![1.0, 1.5],
        vec![2.0, 1.25],
        ValidityDomain::new(0.1, 10.0)?,
        1e-12,
    )?;

    println!("species quantities at a few states:");
    println!(
        "{:>3} {:>6} {:>6} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12}",
        "i", "rho", "theta", "psi", "mu", "eta", "e", "p", "gibbs-duhem"
    );
    for i in 0..thermo.n_species() {
        for (rho, theta) in [(1.0, 1.0), (0.5, 2.0), (3.0, 0.7)] {
            let ev = thermo.eval_species(i, rho, theta)?;
            let gd = rho * ev.psi + ev.p - rho * ev.mu;
            println!(
                "{:>3} {:>6.2} {:>6.2} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.3e}",
                i + 1,
                rho,
                theta,
                ev.psi,
                ev.mu,
                ev.eta,
                ev.e,
                ev.p,
                gd
            );
        }
    }

    println!("\nsecond-order relative quantities (omega vs omega_bar):");
    let omega = (1.3, 1.2);
    let omega_bar = (1.0, 1.0);
    println!(
        "  relative free energy:    {:.6e}",
        thermo.relative_free_energy(0, omega, omega_bar)?
    );
    println!(
        "  relative pressure:       {:.6e}",
        thermo.relative_quantity(RelativeKind::Pressure, 0, omega, omega_bar)?
    );
    println!(
        "  relative entropy dens.:  {:.6e}",
        thermo.relative_quantity(RelativeKind::EntropyDensity, 0, omega, omega_bar)?
    );

    let report = thermo.check_stability(2000, 7)?;
    println!("\nGibbs stability over {} samples:", report.samples);
    println!("  min (rho psi)_rho_rho   = {:.6e} (must stay > 0)", report.min_rho_convexity);
    println!("  min -(rho psi)_th_th    = {:.6e} (must stay > 0)", report.min_theta_concavity);
    println!("  closed-form vs FD mismatch: {:.3e}", report.max_fd_mismatch);
    println!("  verdict: {}", if report.pass { "PASS" } else { "FAIL" });

    let coercivity = measure_coercivity(&thermo, 10_000, 7)?;
    println!(
        "\nempirical coercivity infimum over {} sampled pairs: {:.6e}",
        coercivity.samples, coercivity.infimum
    );
    Ok(())
}
