//! Check-loss minimization.
//!
//! The fit solves the bounded-variable dual program
//!
//! ```text
//! max { y'a  :  X'a = (1 - q) X'1,  0 <= a <= 1 }
//! ```
//!
//! with a Mehrotra predictor-corrector interior point; the multiplier of the
//! equality constraint is the coefficient vector. A crossover then lands on
//! a basic solution fitting exactly p observations, simplex-style edge
//! pivots certify optimality (and repair a loosely converged interior
//! point), and a degenerate optimum is resolved to the lexicographically
//! smallest active-observation index set.

use super::linalg::{self, Singular};
use super::QregError;

#[derive(Debug, Clone)]
pub(crate) struct SolveOutput {
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
    pub objective: f64,
    /// Row indices fitted exactly, ascending.
    pub active_set: Vec<usize>,
    /// Dual solution in [0,1]^n; 1 above the fit, 0 below, interior on the
    /// active set.
    pub dual: Vec<f64>,
    pub iterations: usize,
}

pub(crate) fn total_check_loss(residuals: &[f64], q: f64) -> f64 {
    residuals
        .iter()
        .map(|&z| if z >= 0.0 { q * z } else { (q - 1.0) * z })
        .sum()
}

fn apply_x(cols: &[Vec<f64>], b: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    for (j, col) in cols.iter().enumerate() {
        let bj = b[j];
        if bj == 0.0 {
            continue;
        }
        for (o, v) in out.iter_mut().zip(col) {
            *o += bj * v;
        }
    }
}

fn xt_weighted(cols: &[Vec<f64>], w: &[f64]) -> Vec<f64> {
    cols.iter()
        .map(|col| col.iter().zip(w).map(|(x, wi)| x * wi).sum())
        .collect()
}

/// Largest step alpha <= 1 keeping `lo + alpha*d_lo > 0` and
/// `hi + alpha*d_hi > 0`, damped by 0.9995.
fn max_step(lo: &[f64], d_lo: &[f64], hi: &[f64], d_hi: &[f64]) -> f64 {
    let mut alpha = 1.0f64 / 0.9995;
    for i in 0..lo.len() {
        if d_lo[i] < 0.0 {
            alpha = alpha.min(-lo[i] / d_lo[i]);
        }
        if d_hi[i] < 0.0 {
            alpha = alpha.min(-hi[i] / d_hi[i]);
        }
    }
    (0.9995 * alpha).min(1.0)
}

struct IpmResult {
    b: Vec<f64>,
    iterations: usize,
}

fn interior_point(cols: &[Vec<f64>], y: &[f64], q: f64, max_iter: usize) -> IpmResult {
    let n = y.len();
    let p = cols.len();
    let col_sums: Vec<f64> = cols.iter().map(|c| c.iter().sum()).collect();
    let c_eq: Vec<f64> = col_sums.iter().map(|s| (1.0 - q) * s).collect();
    let dual_shift = (1.0 - q) * y.iter().sum::<f64>();
    let y_scale = 1.0 + y.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    // Least-squares start for b.
    let mut b = {
        let mut gram = vec![0.0; p * p];
        for j in 0..p {
            for k in 0..=j {
                let dot: f64 = cols[j].iter().zip(&cols[k]).map(|(a, b)| a * b).sum();
                gram[j * p + k] = dot;
                gram[k * p + j] = dot;
            }
        }
        let mut rhs = xt_weighted(cols, y);
        if linalg::cholesky_solve(&mut gram, p, &mut rhs).is_err() {
            rhs.fill(0.0);
        }
        rhs
    };

    let mut xb = vec![0.0; n];
    apply_x(cols, &b, &mut xb);
    let eps0 = 1e-4 * y_scale;
    let mut a = vec![1.0 - q; n];
    let mut s = vec![q; n];
    let mut z: Vec<f64> = (0..n).map(|i| (y[i] - xb[i]).max(0.0) + eps0).collect();
    let mut w: Vec<f64> = (0..n).map(|i| (xb[i] - y[i]).max(0.0) + eps0).collect();

    let mut iterations = 0;
    for it in 0..max_iter {
        iterations = it;
        apply_x(cols, &b, &mut xb);
        let r: Vec<f64> = (0..n).map(|i| y[i] - xb[i]).collect();

        let primal = total_check_loss(&r, q);
        let dual_obj = y.iter().zip(&a).map(|(yi, ai)| yi * ai).sum::<f64>() - dual_shift;
        let xta = xt_weighted(cols, &a);
        let rp: Vec<f64> = (0..p).map(|j| c_eq[j] - xta[j]).collect();
        let rp_norm = rp.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let c_norm = c_eq.iter().fold(1.0f64, |m, v| m.max(v.abs()));

        if primal - dual_obj <= 1e-11 * (1.0 + primal.abs()) && rp_norm <= 1e-10 * c_norm {
            break;
        }

        let tiny = 1e-14;
        let d: Vec<f64> = (0..n)
            .map(|i| 1.0 / (z[i] / a[i].max(tiny) + w[i] / s[i].max(tiny)))
            .collect();

        // Factor M = X'DX once; both the predictor and corrector reuse it.
        let mut m = vec![0.0; p * p];
        for j in 0..p {
            for k in 0..=j {
                let dot: f64 = (0..n).map(|i| cols[j][i] * d[i] * cols[k][i]).sum();
                m[j * p + k] = dot;
                m[k * p + j] = dot;
            }
        }
        let mut factor = m.clone();
        let mut probe = vec![0.0; p];
        if linalg::cholesky_solve(&mut factor, p, &mut probe).is_err() {
            // Jitter once; if the normal matrix stays degenerate the
            // crossover still recovers a vertex from the current iterate.
            let trace: f64 = (0..p).map(|j| m[j * p + j]).sum();
            let ridge = 1e-12 * (trace / p as f64).max(1.0);
            factor = m.clone();
            for j in 0..p {
                factor[j * p + j] += ridge;
            }
            probe.fill(0.0);
            if linalg::cholesky_solve(&mut factor, p, &mut probe).is_err() {
                break;
            }
        }
        // `factor` now holds the Cholesky factor; reuse via manual solves.
        let chol = factor;
        let solve = |rhs: &mut [f64]| {
            for i in 0..p {
                let mut v = rhs[i];
                for k in 0..i {
                    v -= chol[i * p + k] * rhs[k];
                }
                rhs[i] = v / chol[i * p + i];
            }
            for i in (0..p).rev() {
                let mut v = rhs[i];
                for k in (i + 1)..p {
                    v -= chol[k * p + i] * rhs[k];
                }
                rhs[i] = v / chol[i * p + i];
            }
        };

        // Predictor (affine scaling) step.
        let dr: Vec<f64> = (0..n).map(|i| d[i] * r[i]).collect();
        let mut db_aff = xt_weighted(cols, &dr);
        for j in 0..p {
            db_aff[j] -= rp[j];
        }
        solve(&mut db_aff);
        let mut xdb = vec![0.0; n];
        apply_x(cols, &db_aff, &mut xdb);
        let da_aff: Vec<f64> = (0..n).map(|i| d[i] * (r[i] - xdb[i])).collect();
        let dz_aff: Vec<f64> = (0..n)
            .map(|i| -z[i] - z[i] / a[i].max(tiny) * da_aff[i])
            .collect();
        let dw_aff: Vec<f64> = (0..n)
            .map(|i| -w[i] + w[i] / s[i].max(tiny) * da_aff[i])
            .collect();
        let ds_aff: Vec<f64> = da_aff.iter().map(|v| -v).collect();

        let ap = max_step(&a, &da_aff, &s, &ds_aff);
        let ad = max_step(&z, &dz_aff, &w, &dw_aff);

        let mu = (0..n).map(|i| a[i] * z[i] + s[i] * w[i]).sum::<f64>() / (2 * n) as f64;
        let mu_aff = (0..n)
            .map(|i| {
                (a[i] + ap * da_aff[i]) * (z[i] + ad * dz_aff[i])
                    + (s[i] + ap * ds_aff[i]) * (w[i] + ad * dw_aff[i])
            })
            .sum::<f64>()
            / (2 * n) as f64;
        let sigma = (mu_aff / mu.max(1e-300)).powi(3).clamp(0.0, 1.0);

        // Combined corrector step.
        let g: Vec<f64> = (0..n)
            .map(|i| {
                r[i] + sigma * mu * (1.0 / a[i].max(tiny) - 1.0 / s[i].max(tiny))
                    - da_aff[i] * dw_aff[i] / s[i].max(tiny)
                    - da_aff[i] * dz_aff[i] / a[i].max(tiny)
            })
            .collect();
        let dg: Vec<f64> = (0..n).map(|i| d[i] * g[i]).collect();
        let mut db = xt_weighted(cols, &dg);
        for j in 0..p {
            db[j] -= rp[j];
        }
        solve(&mut db);
        apply_x(cols, &db, &mut xdb);
        let da: Vec<f64> = (0..n).map(|i| d[i] * (g[i] - xdb[i])).collect();
        let dz: Vec<f64> = (0..n)
            .map(|i| {
                (sigma * mu - a[i] * z[i] - da_aff[i] * dz_aff[i]) / a[i].max(tiny)
                    - z[i] / a[i].max(tiny) * da[i]
            })
            .collect();
        let dw: Vec<f64> = (0..n)
            .map(|i| {
                (sigma * mu - s[i] * w[i] + da_aff[i] * dw_aff[i]) / s[i].max(tiny)
                    + w[i] / s[i].max(tiny) * da[i]
            })
            .collect();
        let ds: Vec<f64> = da.iter().map(|v| -v).collect();

        let ap = max_step(&a, &da, &s, &ds);
        let ad = max_step(&z, &dz, &w, &dw);

        for i in 0..n {
            a[i] = (a[i] + ap * da[i]).clamp(1e-14, 1.0 - 1e-14);
            s[i] = 1.0 - a[i];
            z[i] = (z[i] + ad * dz[i]).max(1e-300);
            w[i] = (w[i] + ad * dw[i]).max(1e-300);
        }
        for j in 0..p {
            b[j] += ad * db[j];
        }
    }

    IpmResult { b, iterations }
}

/// One visited breakpoint of the 1-D piecewise-linear objective along an
/// edge direction.
#[derive(Debug, Clone, Copy)]
struct ScanPoint {
    t: f64,
    obs: usize,
    /// phi(t) - phi(0)
    phi_rel: f64,
}

/// Walks `phi(t) = sum_i rho_q(r_i - t v_i)` forward from `t = 0` and
/// records every breakpoint until the slope turns strictly positive.
/// Observations with |r| <= ztol sit on the kink at zero and only
/// contribute to the initial slope.
fn forward_scan(r: &[f64], v: &[f64], q: f64, ztol: f64) -> Vec<ScanPoint> {
    let n = r.len();
    let mut slope = 0.0;
    let mut bps: Vec<(f64, usize)> = Vec::new();
    for i in 0..n {
        let vi = v[i];
        if vi == 0.0 {
            continue;
        }
        let negative = if r[i] > ztol {
            false
        } else if r[i] < -ztol {
            true
        } else {
            vi > 0.0
        };
        let gi = if negative { q - 1.0 } else { q };
        slope -= vi * gi;
        if r[i].abs() > ztol {
            let t = r[i] / vi;
            if t > 0.0 {
                bps.push((t, i));
            }
        }
    }
    bps.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));

    let slope_scale: f64 = v.iter().map(|x| x.abs()).sum::<f64>() * q.max(1.0 - q) + 1.0;
    let slope_eps = 1e-12 * slope_scale;

    let mut out = Vec::new();
    let mut phi = 0.0;
    let mut t_prev = 0.0;
    for (t, i) in bps {
        phi += slope * (t - t_prev);
        t_prev = t;
        slope += v[i].abs();
        out.push(ScanPoint {
            t,
            obs: i,
            phi_rel: phi,
        });
        if slope > slope_eps {
            break;
        }
    }
    out
}

struct Vertex {
    basis: Vec<usize>,
    b: Vec<f64>,
    residuals: Vec<f64>,
    objective: f64,
}

fn row_of(cols: &[Vec<f64>], i: usize, buf: &mut [f64]) {
    for (j, col) in cols.iter().enumerate() {
        buf[j] = col[i];
    }
}

fn solve_basis(cols: &[Vec<f64>], y: &[f64], basis: &[usize]) -> Result<Vec<f64>, Singular> {
    let p = cols.len();
    let mut m = vec![0.0; p * p];
    let mut rhs = vec![0.0; p];
    for (pos, &i) in basis.iter().enumerate() {
        for j in 0..p {
            m[pos * p + j] = cols[j][i];
        }
        rhs[pos] = y[i];
    }
    linalg::lu_solve(&mut m, p, &mut rhs)?;
    Ok(rhs)
}

fn make_vertex(cols: &[Vec<f64>], y: &[f64], q: f64, basis: Vec<usize>) -> Option<Vertex> {
    let b = solve_basis(cols, y, &basis).ok()?;
    let n = y.len();
    let mut xb = vec![0.0; n];
    apply_x(cols, &b, &mut xb);
    let residuals: Vec<f64> = (0..n).map(|i| y[i] - xb[i]).collect();
    let objective = total_check_loss(&residuals, q);
    Some(Vertex {
        basis,
        b,
        residuals,
        objective,
    })
}

/// Basis duals d_B solving `X_B' d_B = -sum_{i not in B} x_i g_i`. At an
/// optimal nondegenerate vertex every entry lies in [q-1, q].
fn basis_duals(
    cols: &[Vec<f64>],
    q: f64,
    basis: &[usize],
    residuals: &[f64],
    ztol: f64,
) -> Result<Vec<f64>, Singular> {
    let p = cols.len();
    let n = residuals.len();
    let in_basis = basis_mask(n, basis);
    let mut rhs = vec![0.0; p];
    for i in 0..n {
        if in_basis[i] {
            continue;
        }
        let gi = if residuals[i] < -ztol { q - 1.0 } else { q };
        for j in 0..p {
            rhs[j] -= cols[j][i] * gi;
        }
    }
    // Transposed basis matrix: columns are the basis rows.
    let mut m = vec![0.0; p * p];
    for (pos, &i) in basis.iter().enumerate() {
        for j in 0..p {
            m[j * p + pos] = cols[j][i];
        }
    }
    linalg::lu_solve(&mut m, p, &mut rhs)?;
    Ok(rhs)
}

fn basis_mask(n: usize, basis: &[usize]) -> Vec<bool> {
    let mut mask = vec![false; n];
    for &i in basis {
        mask[i] = true;
    }
    mask
}

/// Edge direction for relaxing the basis row at `jpos`: u with X_B u = e_jpos.
fn edge_direction(cols: &[Vec<f64>], basis: &[usize], jpos: usize) -> Result<Vec<f64>, Singular> {
    let p = cols.len();
    let mut m = vec![0.0; p * p];
    for (pos, &i) in basis.iter().enumerate() {
        for j in 0..p {
            m[pos * p + j] = cols[j][i];
        }
    }
    let mut rhs = vec![0.0; p];
    rhs[jpos] = 1.0;
    linalg::lu_solve(&mut m, p, &mut rhs)?;
    Ok(rhs)
}

/// Zero-residual observations, ascending.
fn zero_set(residuals: &[f64], ztol: f64) -> Vec<usize> {
    residuals
        .iter()
        .enumerate()
        .filter(|(_, r)| r.abs() <= ztol)
        .map(|(i, _)| i)
        .collect()
}

/// Lexicographically smallest independent basis within the zero-residual
/// set (greedy ascending scan; the matroid exchange property makes greedy
/// lexicographically minimal).
fn canonical_basis(cols: &[Vec<f64>], residuals: &[f64], ztol: f64) -> Option<Vec<usize>> {
    let p = cols.len();
    let zeros = zero_set(residuals, ztol);
    let chosen = linalg::greedy_independent_rows(&zeros, p, |i, buf| row_of(cols, i, buf));
    (chosen.len() == p).then_some(chosen)
}

pub(crate) fn solve_checkloss(
    cols: &[Vec<f64>],
    y: &[f64],
    q: f64,
    max_iter: usize,
) -> Result<SolveOutput, QregError> {
    let n = y.len();
    let p = cols.len();
    if !(q > 0.0 && q < 1.0) {
        return Err(QregError::InvalidFrame(format!("q={q} outside (0,1)")));
    }
    if p == 0 || n <= p {
        return Err(QregError::InvalidFrame(format!(
            "need more rows than the {p} parameters, got {n}"
        )));
    }
    if linalg::column_rank(cols) < p {
        return Err(QregError::RankDeficient);
    }

    let y_scale = 1.0 + y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let ztol = 1e-8 * y_scale;

    let ipm = interior_point(cols, y, q, max_iter);

    // Crossover: pick p independent rows nearest the fitted hyperplane.
    let mut xb = vec![0.0; n];
    apply_x(cols, &ipm.b, &mut xb);
    let r_ipm: Vec<f64> = (0..n).map(|i| y[i] - xb[i]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        r_ipm[i]
            .abs()
            .partial_cmp(&r_ipm[j].abs())
            .unwrap()
            .then(i.cmp(&j))
    });
    let basis = linalg::greedy_independent_rows(&order, p, |i, buf| row_of(cols, i, buf));
    if basis.len() < p {
        return Err(QregError::RankDeficient);
    }
    let mut vertex =
        make_vertex(cols, y, q, basis).ok_or(QregError::NonConvergence(max_iter))?;

    // Simplex-style descent: pivot along improving edges until no basis dual
    // violates its bound (or no violating edge actually improves, which
    // certifies optimality under degeneracy).
    let pivot_cap = 200 + 10 * p + n / 2;
    let mut pivots = 0;
    'descent: loop {
        if pivots > pivot_cap {
            return Err(QregError::NonConvergence(max_iter));
        }
        let duals = match basis_duals(cols, q, &vertex.basis, &vertex.residuals, ztol) {
            Ok(d) => d,
            Err(_) => return Err(QregError::NonConvergence(max_iter)),
        };
        let dual_slack = 1e-9;
        let mut violations: Vec<(usize, f64)> = duals
            .iter()
            .enumerate()
            .filter_map(|(jpos, &dj)| {
                let excess = (dj - q).max((q - 1.0) - dj);
                (excess > dual_slack).then_some((jpos, excess))
            })
            .collect();
        if violations.is_empty() {
            break;
        }
        violations.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        let tol_impr = 1e-11 * (1.0 + vertex.objective.abs());

        for (jpos, _) in violations {
            let Ok(u) = edge_direction(cols, &vertex.basis, jpos) else {
                continue;
            };
            let mut v = vec![0.0; n];
            apply_x(cols, &u, &mut v);
            for dir in [1.0f64, -1.0] {
                let v_dir: Vec<f64> = v.iter().map(|x| dir * x).collect();
                let scan = forward_scan(&vertex.residuals, &v_dir, q, ztol);
                let best = scan.iter().min_by(|a, b| {
                    a.phi_rel
                        .partial_cmp(&b.phi_rel)
                        .unwrap()
                        .then(a.t.partial_cmp(&b.t).unwrap())
                });
                if let Some(pt) = best {
                    if pt.phi_rel < -tol_impr {
                        let mut new_basis = vertex.basis.clone();
                        new_basis[jpos] = pt.obs;
                        new_basis.sort_unstable();
                        if let Some(nv) = make_vertex(cols, y, q, new_basis) {
                            if nv.objective < vertex.objective - tol_impr {
                                vertex = nv;
                                pivots += 1;
                                continue 'descent;
                            }
                        }
                    }
                }
            }
        }
        // Violations remain but no edge improves: degenerate optimum.
        break;
    }

    // Canonical active set, then resolve coefficient ties (distinct optimal
    // vertices) toward the lexicographically smallest active set. Flat edges
    // only exist when some basis dual sits exactly on its bound, so the
    // search is gated on that.
    let mut active = canonical_basis(cols, &vertex.residuals, ztol)
        .unwrap_or_else(|| vertex.basis.clone());
    if let Some(v2) = make_vertex(cols, y, q, active.clone()) {
        vertex = v2;
    }
    let bound_tol = 1e-7;
    for _ in 0..64 {
        let Ok(duals) = basis_duals(cols, q, &active, &vertex.residuals, ztol) else {
            break;
        };
        let tol_eq = 1e-10 * (1.0 + vertex.objective.abs());
        let mut adopted = false;
        for jpos in 0..p {
            let at_bound =
                (duals[jpos] - q).abs() <= bound_tol || (duals[jpos] - (q - 1.0)).abs() <= bound_tol;
            if !at_bound {
                continue;
            }
            let Ok(u) = edge_direction(cols, &active, jpos) else {
                continue;
            };
            let mut v = vec![0.0; n];
            apply_x(cols, &u, &mut v);
            for dir in [1.0f64, -1.0] {
                let v_dir: Vec<f64> = v.iter().map(|x| dir * x).collect();
                let scan = forward_scan(&vertex.residuals, &v_dir, q, ztol);
                // Farthest breakpoint still on the optimal plateau.
                let far = scan
                    .iter()
                    .take_while(|pt| pt.phi_rel <= tol_eq)
                    .last()
                    .copied();
                let Some(pt) = far else { continue };
                let mut cand = active.clone();
                cand[jpos] = pt.obs;
                cand.sort_unstable();
                let Some(cv) = make_vertex(cols, y, q, cand) else {
                    continue;
                };
                if cv.objective > vertex.objective + tol_eq {
                    continue;
                }
                let canon = canonical_basis(cols, &cv.residuals, ztol)
                    .unwrap_or_else(|| cv.basis.clone());
                if canon < active {
                    active = canon;
                    vertex = cv;
                    adopted = true;
                    break;
                }
            }
            if adopted {
                break;
            }
        }
        if !adopted {
            break;
        }
    }

    if let Some(v2) = make_vertex(cols, y, q, active.clone()) {
        vertex = v2;
    }

    // Dual vector at the vertex: bound values off the fit, solved values on
    // the active set.
    let in_basis = basis_mask(n, &active);
    let mut dual = vec![0.0; n];
    let mut rhs: Vec<f64> = cols
        .iter()
        .map(|col| (1.0 - q) * col.iter().sum::<f64>())
        .collect();
    for i in 0..n {
        if in_basis[i] {
            continue;
        }
        dual[i] = if vertex.residuals[i] > ztol {
            1.0
        } else if vertex.residuals[i] < -ztol {
            0.0
        } else {
            1.0 - q
        };
        for j in 0..p {
            rhs[j] -= cols[j][i] * dual[i];
        }
    }
    {
        let mut m = vec![0.0; p * p];
        for (pos, &i) in active.iter().enumerate() {
            for j in 0..p {
                m[j * p + pos] = cols[j][i];
            }
        }
        if linalg::lu_solve(&mut m, p, &mut rhs).is_ok() {
            for (pos, &i) in active.iter().enumerate() {
                dual[i] = rhs[pos];
            }
        }
    }

    Ok(SolveOutput {
        coefficients: vertex.b,
        residuals: vertex.residuals,
        objective: vertex.objective,
        active_set: active,
        dual,
        iterations: ipm.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn intercept_only(y: &[f64], q: f64) -> SolveOutput {
        let cols = vec![vec![1.0; y.len()]];
        solve_checkloss(&cols, y, q, 200).unwrap()
    }

    #[test]
    fn median_of_three() {
        let out = intercept_only(&[1.0, 2.0, 3.0], 0.5);
        assert!((out.coefficients[0] - 2.0).abs() < 1e-10);
        assert_eq!(out.active_set, vec![1]);
    }

    #[test]
    fn upper_quantile_takes_lower_vertex() {
        let y: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let out = intercept_only(&y, 0.95);
        // Optimal alphas span [95, 96]; index 94 (value 95) is the
        // lexicographically smallest active set.
        assert!((out.coefficients[0] - 95.0).abs() < 1e-9);
        assert_eq!(out.active_set, vec![94]);
    }

    #[test]
    fn unsorted_tie_prefers_smallest_index() {
        // Even n, q = 0.5: any value in [1, 2] is optimal. Index 0 carries
        // the value 2, so the lexicographic rule picks 2.
        let out = intercept_only(&[2.0, 1.0], 0.5);
        assert!((out.coefficients[0] - 2.0).abs() < 1e-10);
        assert_eq!(out.active_set, vec![0]);
    }

    #[test]
    fn exact_line_is_recovered() {
        let x: Vec<f64> = (0..30).map(|i| i as f64 / 3.0).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 1.5 * v).collect();
        let cols = vec![vec![1.0; 30], x];
        let out = solve_checkloss(&cols, &y, 0.9, 200).unwrap();
        assert!((out.coefficients[0] - 2.0).abs() < 1e-9);
        assert!((out.coefficients[1] + 1.5).abs() < 1e-9);
        assert!(out.objective.abs() < 1e-9);
    }

    #[test]
    fn rank_deficient_design_is_rejected() {
        let cols = vec![vec![1.0; 5], vec![2.0; 5]];
        let y = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        assert!(matches!(
            solve_checkloss(&cols, &y, 0.5, 200),
            Err(QregError::RankDeficient)
        ));
    }

    #[test]
    fn subgradient_counts_hold() {
        // Deterministic pseudo-random frame.
        let n = 120;
        let mut state = 88172645463325252u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let x1: Vec<f64> = (0..n).map(|_| next()).collect();
        let x2: Vec<f64> = (0..n).map(|_| next()).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| 0.3 + x1[i] - 2.0 * x2[i] + 0.5 * next())
            .collect();
        let cols = vec![vec![1.0; n], x1, x2];
        for q in [0.05, 0.5, 0.95] {
            let out = solve_checkloss(&cols, &y, q, 200).unwrap();
            let neg = out.residuals.iter().filter(|&&r| r < -1e-9).count();
            let nonpos = out.residuals.iter().filter(|&&r| r < 1e-9).count();
            assert!(neg as f64 <= n as f64 * q + 1e-9, "q={q}");
            assert!(nonpos as f64 >= n as f64 * q - 1e-9, "q={q}");
            assert_eq!(out.active_set.len(), 3);
            for &i in &out.active_set {
                assert!(out.residuals[i].abs() < 1e-9);
            }
        }
    }

    #[test]
    fn dual_vector_is_feasible() {
        let n = 60;
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| 1.0 + 2.0 * x[i] + ((i * 7919) % 13) as f64 / 13.0 - 0.5)
            .collect();
        let cols = vec![vec![1.0; n], x.clone()];
        let q = 0.75;
        let out = solve_checkloss(&cols, &y, q, 200).unwrap();
        for &ai in &out.dual {
            assert!((-1e-7..=1.0 + 1e-7).contains(&ai));
        }
        // X'a = (1-q) X'1 within tolerance
        for col in &cols {
            let lhs: f64 = col.iter().zip(&out.dual).map(|(x, a)| x * a).sum();
            let rhs: f64 = (1.0 - q) * col.iter().sum::<f64>();
            assert!((lhs - rhs).abs() < 1e-7 * (1.0 + rhs.abs()));
        }
    }
}
