//! Information criteria shared by the segmentation and classification code.
//!
//! All families are scored on a Gaussian likelihood of reciprocal-space
//! residuals, `BIC = n ln(SSE / n) + p ln n`. Exact fits would send `ln SSE`
//! towards minus infinity and make round-off decide between models that fit
//! equally well, so SSE is floored at a tiny fraction of the data energy.

/// Relative residual size below which a fit counts as exact.
pub const EXACT_FIT_RELATIVE: f64 = 1e-9;

/// Simplicity tie-break margin: models within this many BIC units of the
/// best lose to the one with fewer parameters.
pub const BIC_TIE_MARGIN: f64 = 2.0;

/// SSE floor for a response vector `y` with weights `w`.
pub fn sse_floor(y: &[f64], w: Option<&[f64]>) -> f64 {
    let energy: f64 = match w {
        Some(w) => y.iter().zip(w).map(|(y, w)| w * y * y).sum(),
        None => y.iter().map(|y| y * y).sum(),
    };
    (EXACT_FIT_RELATIVE * EXACT_FIT_RELATIVE * energy).max(f64::MIN_POSITIVE)
}

pub fn bic(sse: f64, floor: f64, n: usize, params: usize) -> f64 {
    let n_f = n as f64;
    n_f * (sse.max(floor) / n_f).ln() + params as f64 * n_f.ln()
}

/// Index of the preferred candidate among `(bic, params)` pairs: the lowest
/// parameter count among those within [`BIC_TIE_MARGIN`] of the minimum,
/// then the lowest BIC, then the earliest index.
pub fn select(candidates: &[(f64, usize)]) -> Option<usize> {
    let best = candidates.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return None;
    }
    candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| c.0 < best + BIC_TIE_MARGIN)
        .min_by(|(i, a), (j, b)| a.1.cmp(&b.1).then(a.0.total_cmp(&b.0)).then(i.cmp(j)))
        .map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bic_formula() {
        let v = bic(2.0, 0.0, 10, 3);
        assert!((v - (10.0 * (0.2f64).ln() + 3.0 * (10f64).ln())).abs() < 1e-12);
        assert_eq!(bic(0.0, 1e-6, 10, 3), bic(1e-6, 0.0, 10, 3));
    }

    #[test]
    fn selection_prefers_simpler_within_margin() {
        assert_eq!(select(&[(10.0, 2), (9.0, 3)]), Some(0));
        assert_eq!(select(&[(10.0, 2), (7.9, 3)]), Some(1));
        assert_eq!(select(&[(5.0, 2), (4.0, 2)]), Some(1));
        assert_eq!(select(&[(4.0, 2), (4.0, 2)]), Some(0));
        assert_eq!(select(&[]), None);
    }
}
