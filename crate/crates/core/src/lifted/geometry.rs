use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

use super::Polytope;

const TOL: f64 = 1e-9;

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            go(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, m, k, &mut Vec::new(), &mut out);
    out
}

/// Vertices of a bounded polytope in dimension at most 3, by solving every
/// choice of `n` active constraints and keeping the feasible solutions.
pub fn polytope_vertices(p: &Polytope) -> Result<Vec<Vec<f64>>> {
    let (m, n) = (p.h.rows(), p.h.cols());
    if n > 3 {
        return Err(Error::Config(format!(
            "vertex enumeration is limited to dimension 3, got {n}"
        )));
    }
    let scale = 1.0
        + p.y_lo
            .iter()
            .chain(&p.y_hi)
            .fold(0.0f64, |a, b| a.max(b.abs()));
    let mut verts: Vec<Vec<f64>> = Vec::new();
    for rows in combinations(m, n) {
        let a = DMatrix::from_fn(n, n, |i, j| p.h[(rows[i], j)]);
        let lu = a.clone().lu();
        if a.determinant().abs() < 1e-12 {
            continue;
        }
        for mask in 0..(1usize << n) {
            let b = DVector::from_fn(n, |i, _| {
                if mask >> i & 1 == 1 {
                    p.y_hi[rows[i]]
                } else {
                    p.y_lo[rows[i]]
                }
            });
            let Some(x) = lu.solve(&b) else { continue };
            let x: Vec<f64> = x.iter().copied().collect();
            if !p.contains(&x, TOL * scale) {
                continue;
            }
            if !verts
                .iter()
                .any(|v| v.iter().zip(&x).all(|(a, b)| (a - b).abs() <= TOL * scale))
            {
                verts.push(x);
            }
        }
    }
    Ok(verts)
}

/// Pairs of vertex indices joined by an edge: the two vertices share at
/// least `n - 1` active constraints that are linearly independent.
pub fn polytope_edges(p: &Polytope, verts: &[Vec<f64>]) -> Result<Vec<(usize, usize)>> {
    let n = p.h.cols();
    let scale = 1.0
        + p.y_lo
            .iter()
            .chain(&p.y_hi)
            .fold(0.0f64, |a, b| a.max(b.abs()));
    // active constraints as (row, upper side)
    let active: Vec<Vec<(usize, bool)>> = verts
        .iter()
        .map(|v| {
            let y = p.h.matvec(v)?;
            let mut act = Vec::new();
            for i in 0..y.len() {
                if (y[i] - p.y_lo[i]).abs() <= TOL * scale {
                    act.push((i, false));
                }
                if (y[i] - p.y_hi[i]).abs() <= TOL * scale {
                    act.push((i, true));
                }
            }
            Ok(act)
        })
        .collect::<Result<_>>()?;
    let mut edges = Vec::new();
    for a in 0..verts.len() {
        for b in a + 1..verts.len() {
            let shared: Vec<usize> = active[a]
                .iter()
                .filter(|c| active[b].contains(c))
                .map(|c| c.0)
                .collect();
            if shared.is_empty() && n > 1 {
                continue;
            }
            let mat = DMatrix::from_fn(shared.len(), n, |i, j| p.h[(shared[i], j)]);
            if n == 1 || mat.rank(1e-9) >= n - 1 {
                edges.push((a, b));
            }
        }
    }
    Ok(edges)
}
