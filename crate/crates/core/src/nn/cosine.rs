use ndarray::{Array1, ArrayView1};

/// Guard added to the norm product.
pub const COSINE_EPS: f64 = 1e-12;

/// `u·v / (‖u‖‖v‖ + ε)`, clamped to `[-1, 1]`. Zero vectors give 0.
pub fn cosine(u: ArrayView1<'_, f64>, v: ArrayView1<'_, f64>) -> f64 {
    assert_eq!(u.len(), v.len(), "cosine of vectors with different lengths");
    let denom = u.dot(&u).sqrt() * v.dot(&v).sqrt() + COSINE_EPS;
    (u.dot(&v) / denom).clamp(-1.0, 1.0)
}

/// Gradients of `upstream · cosine(u, v)` with respect to `u` and `v`.
pub fn cosine_backward(
    u: ArrayView1<'_, f64>,
    v: ArrayView1<'_, f64>,
    upstream: f64,
) -> (Array1<f64>, Array1<f64>) {
    let nu = u.dot(&u).sqrt();
    let nv = v.dot(&v).sqrt();
    let dot = u.dot(&v);
    let denom = nu * nv + COSINE_EPS;
    let scale = upstream / denom;
    let mut gu = v.to_owned() * scale;
    let mut gv = u.to_owned() * scale;
    let corr = upstream * dot / (denom * denom);
    if nu > 0.0 {
        gu.scaled_add(-corr * nv / nu, &u);
    }
    if nv > 0.0 {
        gv.scaled_add(-corr * nu / nv, &v);
    }
    (gu, gv)
}
