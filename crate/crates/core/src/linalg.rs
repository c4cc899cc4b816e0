//! Small least-squares kernels.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Weighted straight-line least squares `y ~ a0 + a1 t`, computed around the
/// weighted mean of `t` so that calendar years near 2000 do not swamp slopes
/// of order 1e-6. Returns `(a0, a1)` in the raw `t` origin.
pub(crate) fn weighted_line(t: &[f64], y: &[f64], w: Option<&[f64]>) -> Result<(f64, f64)> {
    let n = t.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let weight = |i: usize| w.map_or(1.0, |w| w[i]);
    let w_max = (0..n).map(weight).fold(0.0, f64::max);
    if !(w_max > 0.0 && w_max.is_finite()) {
        return Err(Error::Argument(
            "weights must be positive and finite".into(),
        ));
    }
    let wn = |i: usize| weight(i) / w_max;

    let sw: f64 = (0..n).map(wn).sum();
    let t_bar = (0..n).map(|i| wn(i) * t[i]).sum::<f64>() / sw;
    let y_bar = (0..n).map(|i| wn(i) * y[i]).sum::<f64>() / sw;
    let mut stt = 0.0;
    let mut sty = 0.0;
    for i in 0..n {
        let dt = t[i] - t_bar;
        stt += wn(i) * dt * dt;
        sty += wn(i) * dt * (y[i] - y_bar);
    }
    let t_scale = t.iter().map(|x| (x - t_bar).abs()).fold(0.0, f64::max);
    if stt <= 0.0 || t_scale == 0.0 {
        return Err(Error::DegenerateDesign);
    }
    let a1 = sty / stt;
    Ok((y_bar - a1 * t_bar, a1))
}

/// Ordinary least-squares polynomial of degree `k` in the already
/// conditioned abscissa `s`; coefficients in ascending powers of `s`.
pub(crate) fn poly_lstsq(s: &[f64], y: &[f64], k: usize) -> Result<Vec<f64>> {
    let n = s.len();
    let a = DMatrix::from_fn(n, k + 1, |i, j| s[i].powi(j as i32));
    let b = DVector::from_column_slice(y);
    let svd = a.svd(true, true);
    let x = svd
        .solve(&b, 1e-13)
        .map_err(|e| Error::Argument(format!("polynomial solve failed: {e}")))?;
    Ok(x.iter().copied().collect())
}

/// Expands `sum_j b_j ((t - c) / h)^j` into ascending powers of `t`.
pub(crate) fn shift_poly(b: &[f64], c: f64, h: f64) -> Vec<f64> {
    let k = b.len();
    let mut out = vec![0.0; k];
    for (j, &bj) in b.iter().enumerate() {
        let scale = bj / h.powi(j as i32);
        // (t - c)^j = sum_m C(j, m) t^m (-c)^(j - m)
        let mut binom = 1.0;
        for (m, slot) in out.iter_mut().enumerate().take(j + 1) {
            *slot += scale * binom * (-c).powi((j - m) as i32);
            binom = binom * (j - m) as f64 / (m + 1) as f64;
        }
    }
    out
}
