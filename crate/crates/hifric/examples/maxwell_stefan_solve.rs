//! Solve the constrained Maxwell-Stefan system for one cell, check its
//! residuals, and demonstrate the exact linearity of u in epsilon.

use hifric::maxwell_stefan::{assemble_forces, residual, solve, FrictionMatrix};

fn main() -> hifric::Result<()> {
    let rho = [1.2, 0.8, 2.0];
    let theta = 1.1;
    let friction = FrictionMatrix::from_upper_triangle(3, &[0.7, 1.3, 0.5], 0.05)?;

    // driving forces from opposed partial-pressure gradients, zero body force
    let grad_p = [0.8, -0.3, -0.5];
    let body = [0.0; 3];
    let forces = assemble_forces(&rho, &body, &grad_p);
    println!("driving forces d_i = {:?}", forces.0);
    println!("sum d_i = {:.3e} (must vanish)", forces.0.iter().sum::<f64>());

    let u = solve(&rho, theta, &friction, &forces)?;
    println!("\ndiffusional velocities u = {:?}", u.0);
    let res = residual(&rho, theta, &friction, &forces, &u);
    println!("force residuals = {:?}", res.force);
    println!("constraint |sum rho_i u_i| = {:.3e}", res.constraint);

    println!("\nepsilon-linearity:");
    for eps in [0.05, 0.5, 5.0] {
        let u_eps = solve(&rho, theta, &friction.with_epsilon(eps)?, &forces)?;
        println!(
            "  eps = {eps:5.2}: u_1 = {:12.6e}, ratio to eps=0.05: {:.12}",
            u_eps.0[0],
            u_eps.0[0] / u.0[0]
        );
    }
    Ok(())
}
