//! Quadrature, finite-difference derivatives and Sobolev norms on uniform grids.
//!
//! All stencils are second order: central differences in the interior and
//! one-sided closures at the ends (3 points for the first derivative, 4 for the
//! second, 5 for the third). Sums use compensated (Neumaier) accumulation so
//! results are insensitive to traversal direction at the 1e-16 level.

use crate::error::{Error, Result};
use crate::grid::Field;

/// Compensated sum of a sequence of terms.
pub fn neumaier_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

/// Trapezoidal integral of `f` over its grid.
pub fn quadrature(f: &Field) -> f64 {
    let n = f.len();
    let h = f.grid.h;
    let inner = neumaier_sum(f.values[1..n - 1].iter().copied());
    h * (inner + 0.5 * (f.values[0] + f.values[n - 1]))
}

/// Trapezoidal integral of the pointwise product `f * g`.
pub fn inner_product(f: &Field, g: &Field) -> Result<f64> {
    f.same_grid(g)?;
    let n = f.len();
    let h = f.grid.h;
    let inner = neumaier_sum(
        f.values[1..n - 1]
            .iter()
            .zip(&g.values[1..n - 1])
            .map(|(a, b)| a * b),
    );
    Ok(h * (inner + 0.5 * (f.values[0] * g.values[0] + f.values[n - 1] * g.values[n - 1])))
}

/// Trapezoidal weight of node `k` (1/2 at the ends, 1 inside), times `h`.
#[inline]
pub fn node_weight(f: &Field, k: usize) -> f64 {
    if k == 0 || k + 1 == f.len() {
        0.5 * f.grid.h
    } else {
        f.grid.h
    }
}

/// First derivative at node `k` (central inside, 3-point one-sided at the ends).
#[inline]
pub fn d1_at(v: &[f64], k: usize, h: f64) -> f64 {
    let n = v.len();
    if k == 0 {
        (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
    } else if k == n - 1 {
        (v[n - 3] - 4.0 * v[n - 2] + 3.0 * v[n - 1]) / (2.0 * h)
    } else {
        (v[k + 1] - v[k - 1]) / (2.0 * h)
    }
}

/// Second derivative at node `k` (central inside, 4-point one-sided at the ends).
#[inline]
pub fn d2_at(v: &[f64], k: usize, h: f64) -> f64 {
    let n = v.len();
    let h2 = h * h;
    if k == 0 {
        (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2
    } else if k == n - 1 {
        (-v[n - 4] + 4.0 * v[n - 3] - 5.0 * v[n - 2] + 2.0 * v[n - 1]) / h2
    } else {
        (v[k + 1] - 2.0 * v[k] + v[k - 1]) / h2
    }
}

/// Third derivative at node `k`.
///
/// 5-point central stencil inside; skewed and fully one-sided 5-point closures
/// within two nodes of either end, all second order.
#[inline]
pub fn d3_at(v: &[f64], k: usize, h: f64) -> f64 {
    let n = v.len();
    let h3 = h * h * h;
    if k >= 2 && k + 2 < n {
        (-v[k - 2] + 2.0 * v[k - 1] - 2.0 * v[k + 1] + v[k + 2]) / (2.0 * h3)
    } else if k == 0 {
        (-2.5 * v[0] + 9.0 * v[1] - 12.0 * v[2] + 7.0 * v[3] - 1.5 * v[4]) / h3
    } else if k == 1 {
        (-1.5 * v[0] + 5.0 * v[1] - 6.0 * v[2] + 3.0 * v[3] - 0.5 * v[4]) / h3
    } else if k == n - 2 {
        (0.5 * v[n - 5] - 3.0 * v[n - 4] + 6.0 * v[n - 3] - 5.0 * v[n - 2] + 1.5 * v[n - 1]) / h3
    } else {
        (1.5 * v[n - 5] - 7.0 * v[n - 4] + 12.0 * v[n - 3] - 9.0 * v[n - 2] + 2.5 * v[n - 1]) / h3
    }
}

/// Finite-difference derivative of the requested `order` (1, 2 or 3).
pub fn derivative(f: &Field, order: u32) -> Result<Field> {
    let n = f.len();
    if n < 5 {
        return Err(Error::GridTooSmall { min: 5, got: n });
    }
    let h = f.grid.h;
    let v = &f.values;
    let values: Vec<f64> = match order {
        1 => (0..n).map(|k| d1_at(v, k, h)).collect(),
        2 => (0..n).map(|k| d2_at(v, k, h)).collect(),
        3 => (0..n).map(|k| d3_at(v, k, h)).collect(),
        other => return Err(Error::BadDerivativeOrder(other)),
    };
    Ok(Field::new(f.grid, values))
}

/// Which Sobolev norm to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    L2,
    H1,
}

/// Squared norm: `integral of f^2` for `L2`, plus `integral of (f')^2` for `H1`.
pub fn norm_squared(f: &Field, kind: NormKind) -> f64 {
    let h = f.grid.h;
    let n = f.len();
    let l2 = {
        let inner = neumaier_sum(f.values[1..n - 1].iter().map(|v| v * v));
        h * (inner + 0.5 * (f.values[0] * f.values[0] + f.values[n - 1] * f.values[n - 1]))
    };
    match kind {
        NormKind::L2 => l2,
        NormKind::H1 => {
            let v = &f.values;
            let d0 = d1_at(v, 0, h);
            let dn = d1_at(v, n - 1, h);
            let inner = neumaier_sum((1..n - 1).map(|k| {
                let d = d1_at(v, k, h);
                d * d
            }));
            l2 + h * (inner + 0.5 * (d0 * d0 + dn * dn))
        }
    }
}

/// Norm of the requested kind.
pub fn norm(f: &Field, kind: NormKind) -> f64 {
    norm_squared(f, kind).sqrt()
}

/// Norm over the node-aligned window `[x_lo, x_hi]` only.
///
/// The window is restricted first, so derivative closures are one-sided at the
/// window edges exactly as they would be on a standalone grid.
pub fn norm_on(f: &Field, kind: NormKind, x_lo: f64, x_hi: f64) -> Result<f64> {
    Ok(norm(&f.restrict(x_lo, x_hi)?, kind))
}
