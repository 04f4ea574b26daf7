//! Derivative-free Nelder-Mead simplex minimization.
//!
//! Small, deterministic implementation with the standard
//! reflection/expansion/contraction/shrink moves; used by the
//! Gaussian-set projection.

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iters: usize,
    pub converged: bool,
}

pub struct SimplexOptions {
    pub max_iters: usize,
    pub x_tol: f64,
    pub f_tol: f64,
    /// Initial simplex edge lengths per coordinate.
    pub scale: Vec<f64>,
}

impl SimplexOptions {
    pub fn new(dim: usize) -> Self {
        SimplexOptions { max_iters: 600, x_tol: 1e-10, f_tol: 1e-13, scale: vec![0.1; dim] }
    }
}

pub fn nelder_mead(
    f: impl Fn(&[f64]) -> f64,
    x0: &[f64],
    opts: &SimplexOptions,
) -> SimplexResult {
    let n = x0.len();
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += opts.scale[i];
        simplex.push(v);
    }
    let mut fv: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    let mut iters = 0;
    let mut converged = false;
    while iters < opts.max_iters {
        iters += 1;
        // order ascending by f
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| fv[a].partial_cmp(&fv[b]).unwrap_or(std::cmp::Ordering::Equal));
        let reordered: Vec<Vec<f64>> = order.iter().map(|&i| simplex[i].clone()).collect();
        let refv: Vec<f64> = order.iter().map(|&i| fv[i]).collect();
        simplex = reordered;
        fv = refv;

        let spread = fv[n] - fv[0];
        let size: f64 = (0..n)
            .map(|i| {
                simplex[1..]
                    .iter()
                    .map(|v| (v[i] - simplex[0][i]).abs())
                    .fold(0.0f64, f64::max)
            })
            .fold(0.0f64, f64::max);
        if spread.abs() < opts.f_tol && size < opts.x_tol {
            converged = true;
            break;
        }

        // centroid of all but the worst
        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for (c, &vi) in centroid.iter_mut().zip(v) {
                *c += vi / n as f64;
            }
        }
        let point = |t: f64| -> Vec<f64> {
            (0..n).map(|i| centroid[i] + t * (simplex[n][i] - centroid[i])).collect()
        };

        let xr = point(-alpha);
        let fr = f(&xr);
        if fr < fv[0] {
            let xe = point(-gamma);
            let fe = f(&xe);
            if fe < fr {
                simplex[n] = xe;
                fv[n] = fe;
            } else {
                simplex[n] = xr;
                fv[n] = fr;
            }
        } else if fr < fv[n - 1] {
            simplex[n] = xr;
            fv[n] = fr;
        } else {
            let (xc, fc) = if fr < fv[n] {
                let xc = point(-rho);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = point(rho);
                let fc = f(&xc);
                (xc, fc)
            };
            if fc < fv[n].min(fr) {
                simplex[n] = xc;
                fv[n] = fc;
            } else {
                // shrink towards the best vertex
                for i in 1..=n {
                    for j in 0..n {
                        simplex[i][j] = simplex[0][j] + sigma * (simplex[i][j] - simplex[0][j]);
                    }
                    fv[i] = f(&simplex[i]);
                }
            }
        }
    }
    let mut best = 0;
    for i in 1..=n {
        if fv[i] < fv[best] {
            best = i;
        }
    }
    SimplexResult { x: simplex[best].clone(), fx: fv[best], iters, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_quadratic_bowl() {
        let f = |x: &[f64]| (x[0] - 1.5).powi(2) + 3.0 * (x[1] + 0.5).powi(2);
        let res = nelder_mead(f, &[0.0, 0.0], &SimplexOptions::new(2));
        assert!((res.x[0] - 1.5).abs() < 1e-6);
        assert!((res.x[1] + 0.5).abs() < 1e-6);
        assert!(res.fx < 1e-10);
    }

    #[test]
    fn minimizes_rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let mut opts = SimplexOptions::new(2);
        opts.max_iters = 5000;
        let res = nelder_mead(f, &[-1.2, 1.0], &opts);
        assert!(res.fx < 1e-8, "f = {}", res.fx);
    }
}
