//! Spectrum of the linearized operator and coercivity on the constrained
//! subspace.
//!
//! The operator `L = -d^2/dx^2 + c - 2 Q_c` has one negative eigenvalue
//! `-5c/4`, a kernel spanned by `Q_c'`, and continuous spectrum from `c`; at
//! `c = 1` the discrete eigenvalues are `-1.25`, `0`, `0.75`. Projecting out
//! the profile and its derivative turns the bottom of the quadratic form
//! positive: that constant `kappa` is the coercivity the stability argument
//! runs on.

use kdv_halfline::calculus::{inner_product, norm_squared, NormKind};
use kdv_halfline::soliton::Soliton;
use kdv_halfline::spectral::{build_operator, coercivity_check, lowest_eigenpairs};
use kdv_halfline::{Grid, Side};

fn main() -> kdv_halfline::Result<()> {
    let c = 1.0;
    let extent = 40.0;
    let h = 0.02;
    let grid = Grid::make(Side::FullLine, extent, (2.0 * extent / h).round() as usize + 1)?;
    let operator = build_operator(c, 0.0, grid)?;

    println!("lowest eigenvalues at c = {c} (closed forms -1.25, 0, 0.75):");
    let pairs = lowest_eigenpairs(&operator, 3)?;
    for (k, (lambda, _)) in pairs.iter().enumerate() {
        println!("  lambda_{k} = {lambda:+.6}");
    }

    let kernel = Soliton::new(c)?.sample_derivative(grid, 1)?;
    let unit_kernel = {
        let scale = norm_squared(&kernel, NormKind::L2).sqrt();
        kdv_halfline::Field::new(grid, kernel.values.iter().map(|v| v / scale).collect())
    };
    let correlation = inner_product(&pairs[1].1, &unit_kernel)?.abs();
    println!("  zero-mode correlation with Q': {correlation:.6}");

    println!();
    let report = coercivity_check(c, grid, 12, 42)?;
    println!("constrained minimum  kappa = {:+.6}", report.kappa);
    println!("best random trial          = {:+.6}", report.trial_kappa);
    println!("unconstrained minimum      = {:+.6}", report.unconstrained_minimum);
    println!();
    println!("without the two orthogonality constraints the form dips negative along");
    println!("the ground state; with them it is bounded below by kappa > 0.");
    Ok(())
}
