//! Small dense linear algebra on flat row-major buffers. Problem dimensions
//! here are tiny (p <= 10), so simple factorizations are plenty.

/// Marker for a numerically singular system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Singular;

/// Solves the symmetric positive-definite system `m x = rhs` in place via
/// Cholesky. `m` is p x p row-major and is overwritten by the factor.
pub(crate) fn cholesky_solve(m: &mut [f64], p: usize, rhs: &mut [f64]) -> Result<(), Singular> {
    debug_assert_eq!(m.len(), p * p);
    debug_assert_eq!(rhs.len(), p);
    let scale = m
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    for j in 0..p {
        let mut d = m[j * p + j];
        for k in 0..j {
            d -= m[j * p + k] * m[j * p + k];
        }
        if d <= 1e-14 * scale {
            return Err(Singular);
        }
        let l = d.sqrt();
        m[j * p + j] = l;
        for i in (j + 1)..p {
            let mut v = m[i * p + j];
            for k in 0..j {
                v -= m[i * p + k] * m[j * p + k];
            }
            m[i * p + j] = v / l;
        }
    }
    for i in 0..p {
        let mut v = rhs[i];
        for k in 0..i {
            v -= m[i * p + k] * rhs[k];
        }
        rhs[i] = v / m[i * p + i];
    }
    for i in (0..p).rev() {
        let mut v = rhs[i];
        for k in (i + 1)..p {
            v -= m[k * p + i] * rhs[k];
        }
        rhs[i] = v / m[i * p + i];
    }
    Ok(())
}

/// Solves `a x = rhs` in place with partially pivoted Gaussian elimination.
/// `a` is p x p row-major and is destroyed.
pub(crate) fn lu_solve(a: &mut [f64], p: usize, rhs: &mut [f64]) -> Result<(), Singular> {
    debug_assert_eq!(a.len(), p * p);
    debug_assert_eq!(rhs.len(), p);
    let scale = a
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    for col in 0..p {
        let mut piv = col;
        let mut best = a[col * p + col].abs();
        for r in (col + 1)..p {
            let v = a[r * p + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best <= 1e-13 * scale {
            return Err(Singular);
        }
        if piv != col {
            for c in 0..p {
                a.swap(col * p + c, piv * p + c);
            }
            rhs.swap(col, piv);
        }
        let d = a[col * p + col];
        for r in (col + 1)..p {
            let f = a[r * p + col] / d;
            if f == 0.0 {
                continue;
            }
            for c in (col + 1)..p {
                a[r * p + c] -= f * a[col * p + c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    for i in (0..p).rev() {
        let mut v = rhs[i];
        for c in (i + 1)..p {
            v -= a[i * p + c] * rhs[c];
        }
        rhs[i] = v / a[i * p + i];
    }
    Ok(())
}

/// Greedily selects up to `p` row indices, scanned in `order`, whose rows are
/// linearly independent. Uses modified Gram-Schmidt with a relative
/// tolerance. `row` fetches the i-th observation row into a buffer.
pub(crate) fn greedy_independent_rows(
    order: &[usize],
    p: usize,
    mut row: impl FnMut(usize, &mut [f64]),
) -> Vec<usize> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(p);
    let mut chosen = Vec::with_capacity(p);
    let mut buf = vec![0.0; p];
    for &i in order {
        row(i, &mut buf);
        let norm0: f64 = buf.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm0 == 0.0 {
            continue;
        }
        let mut v = buf.clone();
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for (vk, bk) in v.iter_mut().zip(b) {
                *vk -= dot * bk;
            }
        }
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 * norm0 {
            for x in v.iter_mut() {
                *x /= norm;
            }
            basis.push(v);
            chosen.push(i);
            if chosen.len() == p {
                break;
            }
        }
    }
    chosen
}

/// Column rank of the n x p design given as columns, by modified
/// Gram-Schmidt with a relative tolerance.
pub(crate) fn column_rank(cols: &[Vec<f64>]) -> usize {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for col in cols {
        let norm0: f64 = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm0 == 0.0 {
            continue;
        }
        let mut v = col.clone();
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for (vk, bk) in v.iter_mut().zip(b) {
                *vk -= dot * bk;
            }
        }
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 * norm0 {
            for x in v.iter_mut() {
                *x /= norm;
            }
            basis.push(v);
        }
    }
    basis.len()
}
