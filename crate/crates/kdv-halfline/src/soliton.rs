//! The sech-squared traveling-wave profile and its closed-form functionals.
//!
//! `Q(s) = (3c/2) sech^2(sqrt(c) s / 2)` solves `Q'' - c Q + Q^2 = 0` and is
//! the shape that travels at speed `c` without deformation. Everything here is
//! analytic: profile, derivatives up to third order, mass/energy values, and
//! one-sided tail integrals used to bound truncation and boundary effects.

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

/// Arguments beyond this are treated as exact zero to avoid overflow in cosh.
const SECH_CLAMP: f64 = 350.0;

/// `sech(y)` with clamping to exact 0 for |y| > 350.
#[inline]
pub fn sech(y: f64) -> f64 {
    if y.abs() > SECH_CLAMP {
        0.0
    } else {
        2.0 / (y.exp() + (-y).exp())
    }
}

/// A traveling-wave profile with speed `c > 0`, centered at `shift`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Soliton {
    pub c: f64,
    pub shift: f64,
}

impl Soliton {
    pub fn new(c: f64) -> Result<Soliton> {
        Soliton::with_shift(c, 0.0)
    }

    pub fn with_shift(c: f64, shift: f64) -> Result<Soliton> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::BadSpeed(c));
        }
        if !shift.is_finite() {
            return Err(Error::BadParameter {
                what: "shift",
                value: shift,
            });
        }
        Ok(Soliton { c, shift })
    }

    /// Peak amplitude `3c/2`.
    #[inline]
    pub fn amplitude(&self) -> f64 {
        1.5 * self.c
    }

    /// Inverse width `sqrt(c)/2` of the sech argument.
    #[inline]
    pub fn a(&self) -> f64 {
        0.5 * self.c.sqrt()
    }

    /// Profile value at `x`.
    #[inline]
    pub fn profile(&self, x: f64) -> f64 {
        let s = sech(self.a() * (x - self.shift));
        self.amplitude() * s * s
    }

    /// Analytic derivative of the requested order (1, 2 or 3) at `x`.
    ///
    /// No finite differencing is involved; each order is its own closed form in
    /// sech and tanh of the profile argument.
    pub fn derivative(&self, x: f64, order: u32) -> Result<f64> {
        let a = self.a();
        let amp = self.amplitude();
        let w = a * (x - self.shift);
        let s = sech(w);
        if s == 0.0 {
            // all derivatives vanish identically past the clamp
            return match order {
                1..=3 => Ok(0.0),
                other => Err(Error::BadDerivativeOrder(other)),
            };
        }
        let t = w.tanh();
        let s2 = s * s;
        match order {
            1 => Ok(-2.0 * a * amp * s2 * t),
            2 => Ok(2.0 * a * a * amp * s2 * (2.0 * t * t - s2)),
            3 => Ok(8.0 * a * a * a * amp * s2 * t * (2.0 * s2 - t * t)),
            other => Err(Error::BadDerivativeOrder(other)),
        }
    }

    /// Profile sampled at every grid node.
    pub fn sample(&self, grid: Grid) -> Field {
        Field::sample(grid, |x| self.profile(x))
    }

    /// Analytic derivative sampled at every grid node.
    pub fn sample_derivative(&self, grid: Grid, order: u32) -> Result<Field> {
        let values = (0..grid.n_points)
            .map(|k| self.derivative(grid.x(k), order))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Field::new(grid, values))
    }

    /// Max-norm of `Q'' - c Q + Q^2` over the grid, all terms analytic.
    ///
    /// The second derivative uses its own closed form rather than the
    /// equation, so this genuinely measures how well the profile satisfies the
    /// stationary equation in floating point (roundoff scale).
    pub fn ode_residual(&self, grid: Grid) -> f64 {
        let mut worst = 0.0_f64;
        for k in 0..grid.n_points {
            let x = grid.x(k);
            let q = self.profile(x);
            let q2 = self.derivative(x, 2).expect("order 2 is valid");
            worst = worst.max((q2 - self.c * q + q * q).abs());
        }
        worst
    }

    /// Closed-form mass `3 c^{3/2}` (half the squared L2 norm).
    pub fn mass(&self) -> f64 {
        3.0 * self.c.powf(1.5)
    }

    /// Closed-form energy `-(9/5) c^{5/2}`.
    pub fn energy(&self) -> f64 {
        -1.8 * self.c.powf(2.5)
    }

    /// Full-line `integral of Q^2` = `6 c^{3/2}`.
    pub fn l2_squared(&self) -> f64 {
        6.0 * self.c.powf(1.5)
    }

    /// Full-line `integral of (Q')^2` = `(6/5) c^{5/2}`.
    pub fn slope_squared(&self) -> f64 {
        1.2 * self.c.powf(2.5)
    }

    /// Full-line `integral of Q^3` = `(36/5) c^{5/2}`.
    pub fn cube_integral(&self) -> f64 {
        7.2 * self.c.powf(2.5)
    }

    /// One-sided tail `integral of Q^2 over [m, inf)` in profile coordinates.
    pub fn l2_squared_tail(&self, m: f64) -> f64 {
        let t = (self.a() * m).tanh();
        let amp = self.amplitude();
        (amp * amp / self.a()) * (2.0 / 3.0 - t + t * t * t / 3.0)
    }

    /// One-sided tail `integral of (Q')^2 over [m, inf)`.
    pub fn slope_squared_tail(&self, m: f64) -> f64 {
        let t = (self.a() * m).tanh();
        let amp = self.amplitude();
        4.0 * self.a() * amp * amp * (2.0 / 15.0 - t.powi(3) / 3.0 + t.powi(5) / 5.0)
    }

    /// One-sided tail `integral of Q^3 over [m, inf)`.
    pub fn cube_tail(&self, m: f64) -> f64 {
        let t = (self.a() * m).tanh();
        let amp = self.amplitude();
        (amp.powi(3) / self.a())
            * (8.0 / 15.0 - t + 2.0 * t.powi(3) / 3.0 - t.powi(5) / 5.0)
    }

    /// Tail of the mass functional: `(1/2) integral of Q^2 over [m, inf)`.
    pub fn mass_tail(&self, m: f64) -> f64 {
        0.5 * self.l2_squared_tail(m)
    }

    /// Tail of the energy density: `integral of (Q'^2/2 - Q^3/3) over [m, inf)`.
    pub fn energy_tail(&self, m: f64) -> f64 {
        0.5 * self.slope_squared_tail(m) - self.cube_tail(m) / 3.0
    }

    /// Tail of the squared H1 norm over `[m, inf)`.
    pub fn h1_squared_tail(&self, m: f64) -> f64 {
        self.l2_squared_tail(m) + self.slope_squared_tail(m)
    }
}

/// Exponential decay envelope `e^{-sqrt(c) a}` governing every tail estimate.
pub fn tail_bound(c: f64, a: f64) -> f64 {
    (-c.sqrt() * a).exp()
}

/// Asymptotic H1 tail coefficient: `||Q||_{H1 beyond m}` approaches
/// `tail_h1_constant(c) * e^{-sqrt(c) m}` from below as `m` grows.
///
/// Follows from `Q(s) -> 6c e^{-sqrt(c) s}` and `|Q'| -> sqrt(c) Q`.
pub fn tail_h1_constant(c: f64) -> f64 {
    (18.0 * c.powf(1.5) * (1.0 + c)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{norm_on, norm_squared, quadrature, NormKind};
    use crate::grid::Side;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn profile_peak_and_far_field_values() {
        let q1 = Soliton::new(1.0).unwrap();
        assert_eq!(q1.profile(0.0), 1.5);
        let q4 = Soliton::new(4.0).unwrap();
        assert_eq!(q4.profile(0.0), 6.0);
        let shifted = Soliton::with_shift(1.0, 10.0).unwrap();
        assert_relative_eq!(shifted.profile(0.0), 2.7237484641571e-4, max_relative = 1e-10);
        // clamp region is exactly zero
        assert_eq!(q1.profile(800.0), 0.0);
        assert_eq!(q1.derivative(800.0, 1).unwrap(), 0.0);
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let q = Soliton::new(1.0).unwrap();
        // frozen closed-form value -(3/2) sech^2(1) tanh(1) at x = 2
        assert_relative_eq!(
            q.derivative(2.0, 1).unwrap(),
            -0.4797750063369184,
            max_relative = 1e-12
        );
        // curvature at the peak is -3c^2/4
        for c in [0.25, 1.0, 4.0] {
            let s = Soliton::new(c).unwrap();
            assert_relative_eq!(s.derivative(0.0, 2).unwrap(), -0.75 * c * c, max_relative = 1e-12);
        }
        // central finite differences of the profile as the independent check
        let e = 1e-6;
        for x in [-3.0, -0.4, 0.7, 2.0, 5.5] {
            let fd1 = (q.profile(x + e) - q.profile(x - e)) / (2.0 * e);
            assert!((q.derivative(x, 1).unwrap() - fd1).abs() < 1e-9, "x={x}");
            let fd2 = (q.profile(x + e) - 2.0 * q.profile(x) + q.profile(x - e)) / (e * e);
            assert!((q.derivative(x, 2).unwrap() - fd2).abs() < 1e-3, "x={x}");
            let fd3 = (q.derivative(x + e, 2).unwrap() - q.derivative(x - e, 2).unwrap()) / (2.0 * e);
            assert!((q.derivative(x, 3).unwrap() - fd3).abs() < 1e-8, "x={x}");
        }
    }

    #[test]
    fn stationary_equation_residual_is_roundoff() {
        for c in [0.25_f64, 1.0, 4.0] {
            let grid = Grid::make(Side::FullLine, 40.0 / c.sqrt(), 4001).unwrap();
            let r = Soliton::new(c).unwrap().ode_residual(grid);
            assert!(r <= 1e-10, "c={c}: residual {r:.3e}");
        }
    }

    #[test]
    fn closed_form_mass_energy_match_quadrature() {
        for c in [0.25_f64, 1.0, 4.0] {
            let extent = 40.0 / c.sqrt();
            let n = (2.0 * extent / 0.01).round() as usize + 1;
            let grid = Grid::make(Side::FullLine, extent, n).unwrap();
            let s = Soliton::new(c).unwrap();
            let q = s.sample(grid);
            let qp = s.sample_derivative(grid, 1).unwrap();
            let mass_quad = 0.5 * norm_squared(&q, NormKind::L2);
            let cube = quadrature(&Field::new(grid, q.values.iter().map(|v| v * v * v).collect()));
            let slope_sq = norm_squared(&qp, NormKind::L2);
            let energy_quad = 0.5 * slope_sq - cube / 3.0;
            assert_relative_eq!(mass_quad, s.mass(), max_relative = 1e-6);
            assert_relative_eq!(energy_quad, s.energy(), max_relative = 1e-6);
            assert_relative_eq!(cube, s.cube_integral(), max_relative = 1e-6);
            assert_relative_eq!(slope_sq, s.slope_squared(), max_relative = 1e-6);
        }
        // headline values at c = 1
        let s = Soliton::new(1.0).unwrap();
        assert_eq!(s.mass(), 3.0);
        assert_eq!(s.energy(), -1.8);
        assert_relative_eq!(s.energy() + s.mass(), 1.2, max_relative = 1e-14);
    }

    #[test]
    fn tail_integrals_match_direct_quadrature() {
        // Richardson-extrapolated trapezoid over [m, m + 40]: the cut at m has
        // nonzero slope, so plain trapezoid carries an O(h^2) endpoint term
        // that two resolutions eliminate.
        let tail_quad = |f: &dyn Fn(f64) -> f64, m: f64| -> f64 {
            let at = |n: usize| {
                let grid = Grid::make(Side::FullLine, 20.0, n).unwrap();
                quadrature(&Field::sample(grid, |x| f(x + m + 20.0)))
            };
            let coarse = at(8001);
            let fine = at(16001);
            (4.0 * fine - coarse) / 3.0
        };
        let s = Soliton::new(1.0).unwrap();
        for m in [0.0_f64, 1.0, 3.0, 7.5] {
            let direct = tail_quad(&|x| s.profile(x).powi(2), m);
            assert_relative_eq!(s.l2_squared_tail(m), direct, max_relative = 1e-9, epsilon = 1e-12);

            let direct = tail_quad(&|x| s.derivative(x, 1).unwrap().powi(2), m);
            assert_relative_eq!(
                s.slope_squared_tail(m),
                direct,
                max_relative = 1e-9,
                epsilon = 1e-12
            );

            let direct = tail_quad(&|x| s.profile(x).powi(3), m);
            assert_relative_eq!(s.cube_tail(m), direct, max_relative = 1e-9, epsilon = 1e-12);
        }
        // half the full-line values at m = 0
        assert_relative_eq!(s.l2_squared_tail(0.0), 3.0, max_relative = 1e-14);
        assert_relative_eq!(s.cube_tail(0.0), 3.6, max_relative = 1e-14);
        assert_relative_eq!(s.slope_squared_tail(0.0), 0.6, max_relative = 1e-14);
    }

    #[test]
    fn near_boundary_tail_is_exponentially_small() {
        // the profile centered at L, measured over the first half of its
        // distance to the boundary, is bounded by the decay envelope
        let grid = Grid::make(Side::RightHalfLine, 40.0, 4001).unwrap();
        for l in [10.0_f64, 15.0, 20.0] {
            let q = Soliton::with_shift(1.0, l).unwrap().sample(grid);
            let t = norm_on(&q, NormKind::H1, 0.0, l / 2.0).unwrap();
            let bound = 6.5 * tail_bound(1.0, l / 2.0);
            assert!(t <= bound, "L={l}: tail {t:.3e} > bound {bound:.3e}");
        }
    }

    #[test]
    fn h1_tail_constant_is_asymptotically_sharp() {
        for c in [0.5_f64, 1.0, 2.0] {
            let s = Soliton::new(c).unwrap();
            for m in [8.0 / c.sqrt(), 12.0 / c.sqrt()] {
                let exact = s.h1_squared_tail(m).sqrt();
                let asymptotic = tail_h1_constant(c) * tail_bound(c, m);
                let ratio = exact / asymptotic;
                assert!(
                    (0.9..=1.0).contains(&ratio),
                    "c={c} m={m}: ratio {ratio:.4}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn speed_scaling_is_exact(c in 0.05_f64..16.0, x in -30.0_f64..30.0) {
            // Q_c(x) = c * Q_1(sqrt(c) x), a pure rescaling
            let qc = Soliton::new(c).unwrap().profile(x);
            let q1 = Soliton::new(1.0).unwrap().profile(c.sqrt() * x);
            prop_assert!((qc - c * q1).abs() <= 1e-14 * (1.0 + qc.abs()));
        }

        #[test]
        fn tail_bound_is_monotone(c in 0.1_f64..9.0, a in 0.0_f64..30.0, da in 0.01_f64..5.0) {
            prop_assert!(tail_bound(c, a + da) < tail_bound(c, a));
        }
    }
}
