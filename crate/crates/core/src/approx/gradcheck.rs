//! Central finite differences, used as an independent check on the
//! analytic gradients.

/// `(f(p + h e_i) - f(p - h e_i)) / 2h` for every coordinate `i`.
pub fn central_difference<F>(params: &[f64], h: f64, mut f: F) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut p = params.to_vec();
    (0..p.len())
        .map(|i| {
            let orig = p[i];
            p[i] = orig + h;
            let plus = f(&p);
            p[i] = orig - h;
            let minus = f(&p);
            p[i] = orig;
            (plus - minus) / (2.0 * h)
        })
        .collect()
}

/// `|a - b| / max(|a|, |b|)`, or the absolute difference when both are
/// below `floor`.
pub fn relative_error(a: f64, b: f64, floor: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale < floor {
        (a - b).abs()
    } else {
        (a - b).abs() / scale
    }
}

/// Largest relative error over paired gradient entries.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, b)| relative_error(*a, *b, floor))
        .fold(0.0, f64::max)
}
