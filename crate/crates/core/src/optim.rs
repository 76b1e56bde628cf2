//! Deterministic 1-D and low-dimensional optimizers.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a maximum of `f` on `[lo, hi]`, stopping when the
/// bracket is narrower than `tol`. Returns `(argmax, max)`.
pub fn golden_max(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    // 200 iterations shrink any bracket below machine precision.
    for _ in 0..200 {
        if (hi - lo).abs() <= tol {
            break;
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

pub fn golden_min(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (x, v) = golden_max(|x| -f(x), lo, hi, tol);
    (x, -v)
}

/// Maximizes `f` on a uniform grid of `n` points over `[lo, hi)` and refines
/// the best grid point by golden section within one grid step on either side.
pub fn grid_then_golden_max(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, n: usize, tol: f64) -> (f64, f64) {
    let step = (hi - lo) / n as f64;
    let (mut best_x, mut best_v) = (lo, f64::NEG_INFINITY);
    for k in 0..n {
        let x = lo + step * k as f64;
        let v = f(x);
        if v > best_v {
            best_x = x;
            best_v = v;
        }
    }
    let (x, v) = golden_max(&mut f, best_x - step, best_x + step, tol);
    if v >= best_v {
        (x, v)
    } else {
        (best_x, best_v)
    }
}

#[derive(Clone, Debug)]
pub struct NelderMeadOptions {
    pub initial_step: f64,
    pub max_evals: usize,
    /// Stop when the spread of simplex values drops below this.
    pub f_tol: f64,
    /// Stop when the simplex diameter drops below this.
    pub x_tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions { initial_step: 0.1, max_evals: 20_000, f_tol: 1e-30, x_tol: 1e-13 }
    }
}

/// Nelder–Mead minimization with the standard coefficients. Returns the best
/// vertex and its value.
pub fn nelder_mead(mut f: impl FnMut(&[f64]) -> f64, x0: &[f64], opts: &NelderMeadOptions) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += opts.initial_step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut evals = n + 1;

    while evals < opts.max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = values[n] - values[0];
        let diameter = simplex[1..]
            .iter()
            .map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread.abs() <= opts.f_tol || diameter <= opts.x_tol {
            break;
        }

        let centroid: Vec<f64> = (0..n).map(|k| simplex[..n].iter().map(|v| v[k]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..n).map(|k| centroid[k] + t * (simplex[n][k] - centroid[k])).collect() };

        let reflected = along(-1.0);
        let fr = f(&reflected);
        evals += 1;
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f(&expanded);
            evals += 1;
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[n] {
            let c = along(-0.5);
            let fc = f(&c);
            (c, fc)
        } else {
            let c = along(0.5);
            let fc = f(&c);
            (c, fc)
        };
        evals += 1;
        if fc < values[n].min(fr) {
            simplex[n] = contracted;
            values[n] = fc;
            continue;
        }
        // shrink toward the best vertex
        for i in 1..=n {
            let shrunk: Vec<f64> = (0..n).map(|k| simplex[0][k] + 0.5 * (simplex[i][k] - simplex[0][k])).collect();
            values[i] = f(&shrunk);
            simplex[i] = shrunk;
        }
        evals += n;
    }

    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    (simplex[best].clone(), values[best])
}
