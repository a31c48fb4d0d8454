//! Small optimisation kernels shared by the exponent solvers.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimisation of a unimodal function on `[lo, hi]`.
/// Returns the best abscissa seen, its value, and the final bracket.
pub(crate) fn golden_min(
    mut f: impl FnMut(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
) -> (f64, f64, (f64, f64)) {
    let mut a = hi - INV_PHI * (hi - lo);
    let mut b = lo + INV_PHI * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    for _ in 0..400 {
        if hi - lo <= rel_tol * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - INV_PHI * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + INV_PHI * (hi - lo);
            fb = f(b);
        }
    }
    if fa <= fb {
        (a, fa, (lo, hi))
    } else {
        (b, fb, (lo, hi))
    }
}

pub(crate) struct SimplexMinimum {
    pub x: Vec<f64>,
    pub value: f64,
    /// Frank-Wolfe gap at the returned point; bounds `value - min` for convex `f`.
    #[cfg_attr(not(test), allow(dead_code))]
    pub gap: f64,
}

/// Entropic mirror descent with Armijo backtracking on the probability
/// simplex. `f` returns the value and writes the gradient into its second
/// argument. Coordinates that start at zero stay at zero.
pub(crate) fn simplex_minimize(
    x0: Vec<f64>,
    mut f: impl FnMut(&[f64], &mut [f64]) -> f64,
    tol: f64,
    max_iter: usize,
) -> SimplexMinimum {
    let n = x0.len();
    let mut x = x0;
    let mut grad = vec![0.0; n];
    let mut value = f(&x, &mut grad);
    let mut cand = vec![0.0; n];
    let mut cand_grad = vec![0.0; n];
    let mut eta = f64::NAN;
    let mut gap = f64::INFINITY;

    let mut checkpoint = value;
    for it in 0..max_iter {
        let (mut gmin, mut gmax, mut mean) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
        for (&xi, &gi) in x.iter().zip(&grad) {
            if xi > 0.0 {
                gmin = gmin.min(gi);
                gmax = gmax.max(gi);
                mean += xi * gi;
            }
        }
        gap = (mean - gmin).max(0.0);
        if gap <= tol || gmax - gmin <= 0.0 {
            break;
        }
        if !eta.is_finite() {
            eta = 1.0 / (gmax - gmin);
        }
        let mut accepted = false;
        while eta * (gmax - gmin) > 1e-30 {
            let mut z = 0.0;
            for i in 0..n {
                cand[i] = if x[i] > 0.0 { x[i] * (-eta * (grad[i] - gmin)).exp() } else { 0.0 };
                z += cand[i];
            }
            cand.iter_mut().for_each(|c| *c /= z);
            let cv = f(&cand, &mut cand_grad);
            let predicted: f64 = (0..n).map(|i| grad[i] * (x[i] - cand[i])).sum();
            if cv.is_finite() && cv <= value - 1e-4 * predicted {
                std::mem::swap(&mut x, &mut cand);
                std::mem::swap(&mut grad, &mut cand_grad);
                value = cv;
                eta *= 2.0;
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if !accepted {
            break;
        }
        // stagnation: no measurable progress over a window of steps
        if it % 50 == 49 {
            if checkpoint - value <= 1e-15 * (1.0 + value.abs()) {
                break;
            }
            checkpoint = value;
        }
    }
    SimplexMinimum { x, value, gap }
}
