use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalVector};
use crate::matrix::Mat;

/// Coefficients below this magnitude are not solved for.
const PIVOT_TOL: f64 = 1e-12;

/// `a / b`, snapped to a nearby rational with a small denominator when the
/// quotient is within rounding noise of one. Null-space bases come out of an
/// orthogonal factorization, so equal entries can differ in the last bit.
fn ratio(a: f64, b: f64) -> f64 {
    let r = a / b;
    for den in 1..=12 {
        let scaled = r * den as f64;
        let near = scaled.round();
        if (scaled - near).abs() <= 1e-13 * scaled.abs().max(1.0) {
            return near / den as f64;
        }
    }
    r
}

/// Shrink a box using the linear constraints `A y = 0` (one per row of `A`).
///
/// A single sweep: for each constraint row `r` and each coordinate `j` with a
/// usable pivot, `z_j ← (-Σ_{k≠j} (A_rk / A_rj) z_k) ∩ z_j`, always using the
/// latest values of `z`. Every point of `{A y = 0} ∩ box` survives.
pub fn refine_with_constraints(a: &Mat<f64>, y: &IntervalVector<f64>) -> Result<IntervalVector<f64>> {
    if a.cols() != y.len() && a.rows() > 0 {
        return Err(Error::shape("refine", a.cols(), y.len()));
    }
    let mut z = y.clone();
    for r in 0..a.rows() {
        let row = a.row(r);
        for j in 0..row.len() {
            let pivot = row[j];
            if pivot.abs() <= PIVOT_TOL {
                continue;
            }
            let mut acc = Interval::point(0.0);
            for (k, &ak) in row.iter().enumerate() {
                if k == j || ak == 0.0 {
                    continue;
                }
                acc = acc + z.get(k).scale(ratio(ak, pivot));
            }
            let solved = -acc;
            let current = z.get(j);
            let next = match solved.intersect(current) {
                Some(iv) => iv,
                None => {
                    // touching boxes can miss by rounding; accept a hairline gap
                    let lo = solved.lo().max(current.lo());
                    let hi = solved.hi().min(current.hi());
                    let scale = 1.0 + lo.abs().max(hi.abs());
                    if lo - hi <= 1e-12 * scale {
                        Interval::spanning(hi, lo)
                    } else {
                        return Err(Error::EmptyIntersection { index: j });
                    }
                }
            };
            z.set(j, next);
        }
    }
    Ok(z)
}
