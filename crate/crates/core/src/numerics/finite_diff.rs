//! Finite-difference weights (Fornberg's algorithm) and Richardson-refined
//! central derivatives.

/// Weights `w_j` such that `f^{(order)}(x0) ≈ Σ_j w_j f(nodes[j])`.
pub fn fornberg_weights(x0: f64, nodes: &[f64], order: usize) -> Vec<f64> {
    let n = nodes.len();
    assert!(n > order, "need more nodes than the derivative order");
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Central stencil of `2·half_width + 1` equispaced points with step `h`.
pub fn central_stencil(x0: f64, h: f64, half_width: usize) -> Vec<f64> {
    let hw = half_width as isize;
    (-hw..=hw).map(|j| x0 + j as f64 * h).collect()
}

/// A derivative value with an error estimate from comparing two step sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    pub value: f64,
    pub error: f64,
}

/// Derivative of `f` at `x0` from central differences with half-width
/// `half_width` at steps `h` and `h/2`, combined by Richardson extrapolation.
///
/// The stencil is exact for polynomials of degree `2·half_width`, so the
/// truncation error of the finer estimate scales like `h^p` with
/// `p = 2·half_width + 1 - order` rounded up to the next even number.
pub fn central_derivative<F, E>(mut f: F, x0: f64, order: usize, h: f64, half_width: usize) -> Result<Derivative, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let mut estimate = |step: f64| -> Result<(f64, f64), E> {
        let nodes = central_stencil(x0, step, half_width);
        let w = fornberg_weights(x0, &nodes, order);
        let mut acc = 0.0;
        let mut mag = 0.0;
        for (x, wj) in nodes.iter().zip(&w) {
            if *wj != 0.0 {
                let t = wj * f(*x)?;
                acc += t;
                mag += t.abs();
            }
        }
        Ok((acc, mag))
    };
    let (coarse, _) = estimate(h)?;
    let (fine, magnitude) = estimate(0.5 * h)?;
    let mut p = 2 * half_width + 1 - order;
    if p % 2 == 1 {
        p += 1;
    }
    let factor = 2f64.powi(p as i32);
    let value = fine + (fine - coarse) / (factor - 1.0);
    Ok(Derivative {
        value,
        error: (fine - coarse).abs() / (factor - 1.0) + 4.0 * f64::EPSILON * magnitude,
    })
}
