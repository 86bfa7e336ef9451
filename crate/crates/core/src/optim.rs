//! Derivative-free optimizers used by the model-fit features.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    /// Convergence on the spread of function values across the simplex.
    pub ftol: f64,
    /// Convergence on the simplex diameter (max-norm).
    pub xtol: f64,
    /// Initial simplex step along each coordinate.
    pub step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { max_evals: 2000, ftol: 1e-12, xtol: 1e-9, step: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub fx: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Box-projected Nelder-Mead. Every trial point is clamped into
/// `[lower, upper]`; the best vertex never gets worse, so the returned value
/// is at most `f(x0)`.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], lower: &[f64], upper: &[f64], opts: NelderMeadOptions) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let d = x0.len();
    let project = |x: &mut [f64]| {
        for i in 0..d {
            x[i] = x[i].clamp(lower[i], upper[i]);
        }
    };
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut evals = 0;
    let mut start = x0.to_vec();
    project(&mut start);
    let mut simplex: Vec<Vec<f64>> = vec![start.clone()];
    for i in 0..d {
        let mut v = start.clone();
        let room_up = upper[i] - v[i];
        let step = if room_up >= opts.step || room_up >= v[i] - lower[i] {
            opts.step.min(room_up)
        } else {
            -opts.step.min(v[i] - lower[i])
        };
        v[i] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, &mut evals)).collect();

    let mut converged = false;
    while evals < opts.max_evals {
        // Order vertices; stable on ties so results are reproducible.
        let mut idx: Vec<usize> = (0..=d).collect();
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
        values = idx.iter().map(|&i| values[i]).collect();

        let spread = values[d] - values[0];
        let diameter =
            simplex[1..].iter().flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs())).fold(0.0, f64::max);
        if spread.abs() <= opts.ftol * (values[0].abs() + opts.ftol) && diameter <= opts.xtol.sqrt()
            || diameter <= opts.xtol
        {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; d];
        for v in &simplex[..d] {
            for i in 0..d {
                centroid[i] += v[i] / d as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            let mut p: Vec<f64> = (0..d).map(|i| centroid[i] + t * (simplex[d][i] - centroid[i])).collect();
            project(&mut p);
            p
        };
        let reflected = along(-1.0);
        let fr = eval(&reflected, &mut evals);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = eval(&expanded, &mut evals);
            if fe < fr {
                simplex[d] = expanded;
                values[d] = fe;
            } else {
                simplex[d] = reflected;
                values[d] = fr;
            }
        } else if fr < values[d - 1] {
            simplex[d] = reflected;
            values[d] = fr;
        } else {
            let (contracted, fc) = if fr < values[d] {
                let c = along(-0.5);
                let fc = eval(&c, &mut evals);
                (c, fc)
            } else {
                let c = along(0.5);
                let fc = eval(&c, &mut evals);
                (c, fc)
            };
            if fc < values[d].min(fr) {
                simplex[d] = contracted;
                values[d] = fc;
            } else {
                // Shrink towards the best vertex.
                for k in 1..=d {
                    for i in 0..d {
                        simplex[k][i] = simplex[0][i] + 0.5 * (simplex[k][i] - simplex[0][i]);
                    }
                    values[k] = eval(&simplex[k], &mut evals);
                }
            }
        }
    }
    let best = (0..=d).min_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b))).unwrap_or(0);
    Minimum { x: simplex[best].clone(), fx: values[best], evals, converged }
}

/// Scalar minimization on `[lo, hi]`: a uniform grid of `grid` points to
/// bracket the global minimum, then golden-section search to `tol`.
pub fn bracketed_minimize<F>(mut f: F, lo: f64, hi: f64, grid: usize, tol: f64) -> Minimum
where
    F: FnMut(f64) -> f64,
{
    let grid = grid.max(3);
    let h = (hi - lo) / (grid - 1) as f64;
    let mut evals = 0;
    let mut best_i = 0;
    let mut best_v = f64::INFINITY;
    for i in 0..grid {
        let v = f(lo + h * i as f64);
        evals += 1;
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }
    let mut a = lo + h * best_i.saturating_sub(1) as f64;
    let mut b = (lo + h * (best_i + 1) as f64).min(hi);
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut dd = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(dd);
    evals += 2;
    while (b - a).abs() > tol {
        if fc < fd {
            b = dd;
            dd = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = dd;
            fc = fd;
            dd = a + inv_phi * (b - a);
            fd = f(dd);
        }
        evals += 1;
        if evals > 10_000 {
            break;
        }
    }
    let (x, fx) = if fc < fd { (c, fc) } else { (dd, fd) };
    let (x, fx) = if best_v < fx { (lo + h * best_i as f64, best_v) } else { (x, fx) };
    Minimum { x: vec![x], fx, evals, converged: fx.is_finite() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let f = |x: &[f64]| (x[0] - 0.3).powi(2) + 2.0 * (x[1] + 0.2).powi(2);
        let m = nelder_mead(f, &[0.0, 0.0], &[-1.0, -1.0], &[1.0, 1.0], Default::default());
        assert!(m.converged);
        assert!((m.x[0] - 0.3).abs() < 1e-4 && (m.x[1] + 0.2).abs() < 1e-4);
    }

    #[test]
    fn nelder_mead_respects_box() {
        let f = |x: &[f64]| (x[0] - 5.0).powi(2);
        let m = nelder_mead(f, &[0.5], &[0.0], &[1.0], Default::default());
        assert!((m.x[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn golden_section_on_parabola() {
        let m = bracketed_minimize(|x| (x - 0.123).powi(2), -0.5, 0.5, 11, 1e-9);
        assert!((m.x[0] - 0.123).abs() < 1e-7);
    }
}
