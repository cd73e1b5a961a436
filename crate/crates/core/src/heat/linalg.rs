use super::HeatError;

pub fn dot_mu(a: &[f64], b: &[f64], mu: &[f64]) -> f64 {
    a.iter().zip(b).zip(mu).map(|((x, y), m)| x * y * m).sum()
}

/// Conjugate gradients for an operator that is self-adjoint and positive
/// definite in the `μ`-weighted inner product.
pub fn cg(
    apply: impl Fn(&[f64], &mut [f64]),
    b: &[f64],
    x0: Option<&[f64]>,
    mu: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, usize), HeatError> {
    let n = b.len();
    let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![0.0; n]);
    let mut ax = vec![0.0; n];
    apply(&x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let bnorm = dot_mu(b, b, mu).sqrt();
    if bnorm == 0.0 {
        return Ok((vec![0.0; n], 0));
    }
    let mut p = r.clone();
    let mut rr = dot_mu(&r, &r, mu);
    let mut ap = vec![0.0; n];
    for it in 0..max_iter {
        if rr.sqrt() <= tol * bnorm {
            return Ok((x, it));
        }
        apply(&p, &mut ap);
        let alpha = rr / dot_mu(&p, &ap, mu);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let next = dot_mu(&r, &r, mu);
        let beta = next / rr;
        rr = next;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    Err(HeatError::NoConvergence { iterations: max_iter, residual: rr.sqrt() / bnorm })
}
