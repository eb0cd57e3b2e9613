//! Sweep over wall distances: where does stability take hold?
//!
//! The stability estimate needs the soliton to start far enough from the
//! wall. Sweeping `L` at fixed `alpha` maps that frontier empirically: close
//! to the wall the tail interacts with the boundary and mass drains away;
//! beyond the frontier the measured distance settles under its envelope and
//! `measured_c0` decreases with `L`.

use kdv_halfline::experiment::{run_sweep, ExperimentConfig};

fn main() {
    let mut base = ExperimentConfig::stability(1.0, 8.0, 0.02);
    base.t_end = 6.0;
    base.extent = 30.0;
    base.n_points = 1501;
    base.dt = 4e-3;
    base.stride = 300;

    let l_values = [3.0, 5.0, 8.0, 12.0];
    let table = run_sweep(&base, &[1.0], &l_values, &[0.02]);

    println!("c     L     alpha   pass    sup_distance   measured_c0   mass loss");
    for row in &table.rows {
        match &row.report {
            Some(r) => println!(
                "{:3}  {:4}   {:5}   {:5}   {:12.4e}   {:11.4}   {:9.3e}",
                row.c, row.l, row.alpha, r.pass, r.sup_distance, r.measured_c0, r.mass_loss_fraction
            ),
            None => println!(
                "{:3}  {:4}   {:5}   run failed: {}",
                row.c, row.l, row.alpha, row.reason
            ),
        }
    }

    println!();
    for (c, alpha, first_l) in table.frontier() {
        match first_l {
            Some(l) => println!("frontier at c = {c}, alpha = {alpha}: first passing L = {l}"),
            None => println!("no passing L at c = {c}, alpha = {alpha}"),
        }
    }
}
