//! Solitary-wave profiles at several speeds.
//!
//! Samples `Q_c(x) = (3c/2) sech^2(sqrt(c) x / 2)` for each speed, checks the
//! profile ODE `Q'' = c Q - Q^2` node by node, and compares the quadrature
//! mass and energy against their closed forms `3 c^{3/2}` and `-9 c^{5/2} / 5`.

use kdv_halfline::diagnostics;
use kdv_halfline::soliton::{tail_bound, Soliton};
use kdv_halfline::{Grid, Side};

fn main() -> kdv_halfline::Result<()> {
    println!("speed   amplitude   ode residual   mass rel err   energy rel err");
    for &c in &[0.25, 1.0, 4.0] {
        let soliton = Soliton::new(c)?;
        let extent = 40.0 / c.sqrt();
        let n = (2.0 * extent / 0.01).round() as usize + 1;
        let grid = Grid::make(Side::FullLine, extent, n)?;

        let residual = soliton.ode_residual(grid);

        let q = soliton.sample(grid);
        let mass = diagnostics::mass(&q);
        let energy = diagnostics::energy(&q);
        let mass_err = (mass - soliton.mass()).abs() / soliton.mass();
        let energy_err = (energy - soliton.energy()).abs() / soliton.energy().abs();

        println!(
            "{:5}   {:9.4}   {:12.4e}   {:12.4e}   {:12.4e}",
            c,
            soliton.amplitude(),
            residual,
            mass_err,
            energy_err
        );
    }

    println!();
    println!("tail mass beyond x = a, against the e^{{-sqrt(c) a}} envelope (c = 1):");
    let soliton = Soliton::new(1.0)?;
    for &a in &[5.0, 10.0, 15.0] {
        let tail = soliton.mass_tail(a);
        let envelope = tail_bound(1.0, a);
        println!(
            "  a = {:4}: tail mass {:10.4e}, envelope {:10.4e}, ratio {:.4}",
            a,
            tail,
            envelope,
            tail / envelope
        );
    }
    Ok(())
}
