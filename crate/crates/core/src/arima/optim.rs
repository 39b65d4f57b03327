//! Small dense BFGS minimizer with central-difference gradients.

pub(crate) struct BfgsOptions {
    pub max_iter: usize,
    pub grad_tol: f64,
    /// Relative change in the objective below which two consecutive
    /// iterations count as stalled.
    pub f_tol: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            grad_tol: 1e-8,
            f_tol: 1e-12,
        }
    }
}

pub(crate) struct Minimum {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn gradient<F: FnMut(&[f64]) -> f64>(f: &mut F, x: &[f64], out: &mut [f64]) {
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let h = 6e-6 * x[i].abs().max(1.0);
        xp[i] = x[i] + h;
        let fp = f(&xp);
        xp[i] = x[i] - h;
        let fm = f(&xp);
        xp[i] = x[i];
        out[i] = (fp - fm) / (2.0 * h);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `f` from `x0`. Non-finite objective values are treated as
/// +infinity so the line search backs away from them.
pub(crate) fn minimize<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &BfgsOptions) -> Minimum {
    let n = x0.len();
    let mut eval = |x: &[f64]| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut x = x0.to_vec();
    let mut fx = eval(&x);
    let mut g = vec![0.0; n];
    gradient(&mut eval, &x, &mut g);
    // Inverse Hessian approximation, row-major.
    let mut hinv = identity(n);
    let mut stalls = 0;

    for iter in 0..opts.max_iter {
        let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if gmax < opts.grad_tol {
            return Minimum { x, iterations: iter, converged: true };
        }
        let mut dir: Vec<f64> = (0..n).map(|i| -dot(&hinv[i * n..(i + 1) * n], &g)).collect();
        let mut slope = dot(&dir, &g);
        if slope >= 0.0 {
            hinv = identity(n);
            dir = g.iter().map(|v| -v).collect();
            slope = dot(&dir, &g);
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            let ft = eval(&trial);
            if ft <= fx + 1e-4 * step * slope {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            // No decrease along a descent direction: we are at the
            // resolution limit of the finite-difference gradient.
            return Minimum { x, iterations: iter, converged: true };
        };

        let mut g_new = vec![0.0; n];
        gradient(&mut eval, &x_new, &mut g_new);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            bfgs_update(&mut hinv, &s, &y, sy);
        }

        let rel = (fx - f_new).abs() / fx.abs().max(1e-300);
        x = x_new;
        fx = f_new;
        g = g_new;
        if rel < opts.f_tol {
            stalls += 1;
            if stalls >= 2 {
                return Minimum { x, iterations: iter + 1, converged: true };
            }
        } else {
            stalls = 0;
        }
    }
    Minimum { x, iterations: opts.max_iter, converged: false }
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], y)).collect();
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
        }
    }
}
