//! Least-squares polynomial fitting for segment detrending.
//!
//! Segments are short (tens to a few hundred points) and the polynomial order
//! is small (1..=3), so a dense Householder QR on a Vandermonde matrix in
//! normalized coordinates is both fast and well conditioned.

use crate::error::{Error, Result};

/// Least-squares polynomial trend of `y` over the normalized index
/// `xi = 2*i/(n-1) - 1`, evaluated back at every index. The residuals
/// `y[i] - trend[i]` are written into `out`.
///
/// Requires `y.len() >= order + 2` so the fit is overdetermined.
pub fn detrend_into(y: &[f64], order: usize, out: &mut Vec<f64>) -> Result<()> {
    let n = y.len();
    if n < order + 2 {
        return Err(Error::InsufficientData {
            required: order + 2,
            actual: n,
            context: format!("polynomial detrend of order {order}"),
        });
    }
    let cols = order + 1;

    // Vandermonde in xi ∈ [-1, 1], column-major.
    let mut a = vec![0.0; n * cols];
    let scale = if n > 1 { 2.0 / (n as f64 - 1.0) } else { 0.0 };
    for i in 0..n {
        let xi = i as f64 * scale - 1.0;
        let mut p = 1.0;
        for c in 0..cols {
            a[c * n + i] = p;
            p *= xi;
        }
    }

    let coeffs = qr_solve(&mut a, n, cols, y)?;

    out.clear();
    out.reserve(n);
    for (i, &yi) in y.iter().enumerate() {
        let xi = i as f64 * scale - 1.0;
        let mut fitted = 0.0;
        let mut p = 1.0;
        for &c in &coeffs {
            fitted += c * p;
            p *= xi;
        }
        out.push(yi - fitted);
    }
    Ok(())
}

/// Convenience wrapper returning a fresh residual vector.
pub fn detrend(y: &[f64], order: usize) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    detrend_into(y, order, &mut out)?;
    Ok(out)
}

/// Solve min ||A x - b|| by Householder QR. `a` is column-major `n x cols`
/// and is consumed as workspace.
fn qr_solve(a: &mut [f64], n: usize, cols: usize, b: &[f64]) -> Result<Vec<f64>> {
    let mut rhs = b.to_vec();

    for k in 0..cols {
        // Householder vector for column k, rows k..n.
        let mut norm = 0.0;
        for i in k..n {
            norm += a[k * n + i] * a[k * n + i];
        }
        let norm = norm.sqrt();
        if norm == 0.0 {
            return Err(Error::Numerical {
                context: format!("rank-deficient design matrix at column {k}"),
            });
        }
        let alpha = if a[k * n + k] >= 0.0 { -norm } else { norm };
        let mut v = vec![0.0; n - k];
        v[0] = a[k * n + k] - alpha;
        for i in (k + 1)..n {
            v[i - k] = a[k * n + i];
        }
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        if vtv == 0.0 {
            // Column already triangular; nothing to reflect.
            a[k * n + k] = alpha;
            continue;
        }

        // Apply reflection to remaining columns and to the rhs.
        for c in k..cols {
            let mut dot = 0.0;
            for i in k..n {
                dot += v[i - k] * a[c * n + i];
            }
            let f = 2.0 * dot / vtv;
            for i in k..n {
                a[c * n + i] -= f * v[i - k];
            }
        }
        let mut dot = 0.0;
        for i in k..n {
            dot += v[i - k] * rhs[i];
        }
        let f = 2.0 * dot / vtv;
        for i in k..n {
            rhs[i] -= f * v[i - k];
        }
    }

    // Back substitution on the cols x cols upper triangle.
    let mut x = vec![0.0; cols];
    for k in (0..cols).rev() {
        let mut s = rhs[k];
        for c in (k + 1)..cols {
            s -= a[c * n + k] * x[c];
        }
        let d = a[k * n + k];
        if d == 0.0 || !d.is_finite() {
            return Err(Error::Numerical {
                context: format!("singular triangular factor at column {k}"),
            });
        }
        x[k] = s / d;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < tol, "{x} vs {y}");
        }
    }

    #[test]
    fn exact_line_detrends_to_zero() {
        let r = detrend(&[2.0, 4.0, 6.0, 8.0], 1).unwrap();
        close(&r, &[0.0; 4], 1e-12);
    }

    #[test]
    fn constant_segment_detrends_to_zero() {
        let r = detrend(&[1.0, 1.0, 1.0], 1).unwrap();
        close(&r, &[0.0; 3], 1e-12);
    }

    #[test]
    fn matches_closed_form_simple_regression() {
        // Independent oracle: simple-regression residuals of y = i^2 on i.
        // i mean 2, y mean 6, Sxy = 40, Sxx = 10 -> slope 4, intercept -2,
        // fitted [-2, 2, 6, 10, 14].
        let y = [0.0, 1.0, 4.0, 9.0, 16.0];
        let r = detrend(&y, 1).unwrap();
        close(&r, &[2.0, -1.0, -2.0, -1.0, 2.0], 1e-10);
    }

    #[test]
    fn cubic_fit_reproduces_cubic() {
        let y: Vec<f64> = (0..12)
            .map(|i| {
                let x = i as f64;
                1.5 - 0.3 * x + 0.02 * x * x + 0.001 * x * x * x
            })
            .collect();
        let r = detrend(&y, 3).unwrap();
        close(&r, &[0.0; 12], 1e-9);
    }

    #[test]
    fn too_short_segment_is_rejected() {
        assert!(matches!(
            detrend(&[1.0, 2.0], 1),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn quadratic_residuals_match_normal_equations_oracle() {
        // Dense normal-equations solve as an independent check, on raw index
        // coordinates (well conditioned at this size).
        let y = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0];
        let n = y.len();
        let m = 2usize;
        // Build X^T X and X^T y for basis 1, i, i^2.
        let mut xtx = [[0.0f64; 3]; 3];
        let mut xty = [0.0f64; 3];
        for i in 0..n {
            let row = [1.0, i as f64, (i * i) as f64];
            for a in 0..=m {
                for b in 0..=m {
                    xtx[a][b] += row[a] * row[b];
                }
                xty[a] += row[a] * y[i];
            }
        }
        // Gaussian elimination.
        let mut aug = [[0.0f64; 4]; 3];
        for a in 0..3 {
            aug[a][..3].copy_from_slice(&xtx[a]);
            aug[a][3] = xty[a];
        }
        for k in 0..3 {
            let piv = aug[k][k];
            for c in k..4 {
                aug[k][c] /= piv;
            }
            for r in 0..3 {
                if r != k {
                    let f = aug[r][k];
                    for c in k..4 {
                        aug[r][c] -= f * aug[k][c];
                    }
                }
            }
        }
        let coef = [aug[0][3], aug[1][3], aug[2][3]];
        let oracle: Vec<f64> = (0..n)
            .map(|i| y[i] - (coef[0] + coef[1] * i as f64 + coef[2] * (i * i) as f64))
            .collect();
        let r = detrend(&y, 2).unwrap();
        close(&r, &oracle, 1e-9);
    }
}
