//! Adaptive Dormand–Prince 5(4) integration of `y' = f(t, y)`.

/// Tolerances and step controls for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub initial_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            initial_step: 1e-3,
            min_step: 1e-14,
            max_steps: 1_000_000,
        }
    }
}

/// Failure of the step-size controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepFailure {
    pub t: f64,
    pub step: f64,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Fifth-order weights are the last row of A; these are fifth minus fourth order.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates from `t0` through every time in `outputs` (ascending, each
/// `≥ t0`) and returns the state at each output time.
pub fn integrate<F>(
    mut f: F,
    t0: f64,
    y0: &[f64],
    outputs: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<Vec<f64>>, StepFailure>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let dim = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut h = opts.initial_step;
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; dim]; 7];
    let mut stage = vec![0.0; dim];
    let mut y_new = vec![0.0; dim];
    let mut out = Vec::with_capacity(outputs.len());
    let mut steps = 0usize;
    f(t, &y, &mut k[0]);
    for &target in outputs {
        while t < target {
            if steps >= opts.max_steps {
                return Err(StepFailure { t, step: h });
            }
            steps += 1;
            let last = t + h >= target;
            let step = if last { target - t } else { h };
            for s in 1..7 {
                for i in 0..dim {
                    let mut acc = y[i];
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += step * A[s][j] * kj[i];
                    }
                    stage[i] = acc;
                }
                let (head, tail) = k.split_at_mut(s);
                let _ = head;
                f(t + C[s] * step, &stage, &mut tail[0]);
            }
            // The seventh stage is evaluated at the fifth-order solution.
            y_new.copy_from_slice(&stage);
            let mut err = 0.0f64;
            for i in 0..dim {
                let mut e = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    e += E[j] * kj[i];
                }
                let scale = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
                err = err.max((step * e / scale).abs());
            }
            if err <= 1.0 {
                t = if last { target } else { t + step };
                y.copy_from_slice(&y_new);
                let (first, rest) = k.split_at_mut(1);
                first[0].copy_from_slice(&rest[5]);
                let grow = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).min(5.0)
                };
                if !last {
                    h = step * grow;
                }
            } else {
                h = step * (0.9 * err.powf(-0.2)).max(0.2);
                if h < opts.min_step {
                    return Err(StepFailure { t, step: h });
                }
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let outs = [0.5, 1.0, 3.0];
        let ys = integrate(
            |_, y, dy| dy[0] = -2.0 * y[0],
            0.0,
            &[1.0],
            &outs,
            &OdeOptions::default(),
        )
        .unwrap();
        for (t, y) in outs.iter().zip(&ys) {
            assert!((y[0] - (-2.0 * t).exp()).abs() < 1e-11);
        }
    }

    #[test]
    fn harmonic_oscillator_system() {
        let ys = integrate(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            0.0,
            &[0.0, 1.0],
            &[std::f64::consts::PI / 2.0, 10.0],
            &OdeOptions::default(),
        )
        .unwrap();
        assert!((ys[0][0] - 1.0).abs() < 1e-10);
        assert!((ys[1][0] - 10f64.sin()).abs() < 1e-10);
    }

    #[test]
    fn output_at_start_time() {
        let ys = integrate(|_, _, dy| dy[0] = 1.0, 0.0, &[3.0], &[0.0], &OdeOptions::default()).unwrap();
        assert_eq!(ys[0][0], 3.0);
    }
}
