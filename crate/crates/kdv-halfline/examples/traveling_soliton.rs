//! Full-line soliton transport test for the implicit solver.
//!
//! Evolves `u_0 = Q_1(x + 10)` on a clamped full-line grid to `t = 5`, where
//! the exact solution is the translate `Q_1(x + 10 - 5)`, and reports the
//! `H^1` error at the final time for two grid refinements.

use kdv_halfline::calculus::{norm, NormKind};
use kdv_halfline::soliton::Soliton;
use kdv_halfline::{evolve, Grid, Side, SolverConfig};

fn main() -> kdv_halfline::Result<()> {
    let c = 1.0;
    let t_end: f64 = 5.0;
    let extent = 40.0;
    let soliton = Soliton::with_shift(c, -10.0)?;

    println!("soliton transport on [-{extent}, {extent}], c = {c}, t_end = {t_end}");
    println!("h        dt        H1 error");

    let mut previous = None;
    for &(h, dt) in &[(0.01_f64, 2e-3), (0.005, 1e-3)] {
        let n = (2.0 * extent / h).round() as usize + 1;
        let grid = Grid::make(Side::FullLine, extent, n)?;
        let u0 = soliton.sample(grid);

        let mut config = SolverConfig::homogeneous(grid, dt, t_end);
        config.snapshot_stride = (t_end / dt).round() as usize;
        let traj = evolve(&config, &u0)?;

        let exact = Soliton::with_shift(c, -10.0 + c * t_end)?.sample(grid);
        let error = traj.final_state().zip_with(&exact, |a, b| a - b)?;
        let h1 = norm(&error, NormKind::H1);
        print!("{:7.4}  {:7.4}  {:10.4e}", h, dt, h1);
        if let Some(coarse) = previous {
            let order = f64::log2(coarse / h1);
            print!("  (order {:.2})", order);
        }
        println!();
        previous = Some(h1);
    }
    Ok(())
}
