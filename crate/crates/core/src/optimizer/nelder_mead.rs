//! Derivative-free simplex search (minimization) with dimension-adaptive
//! coefficients.

#[derive(Debug, Clone)]
pub(crate) struct SimplexOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

struct Coefficients {
    reflect: f64,
    expand: f64,
    contract: f64,
    shrink: f64,
}

impl Coefficients {
    // Gao & Han adaptive parameters; reduce to the classic (1, 2, 1/2, 1/2) at n = 2
    fn adaptive(n: usize) -> Self {
        let n = n.max(2) as f64;
        Self {
            reflect: 1.0,
            expand: 1.0 + 2.0 / n,
            contract: 0.75 - 1.0 / (2.0 * n),
            shrink: 1.0 - 1.0 / n,
        }
    }
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Minimizes `f` from `x0` using an axis-aligned initial simplex of edge
/// `step`. Stops once the simplex diameter (largest vertex distance from the
/// best vertex) drops below `tol`, or after `max_iterations`.
pub(crate) fn minimize<F>(f: F, x0: &[f64], step: f64, max_iterations: usize, tol: f64) -> SimplexOutcome
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let c = Coefficients::adaptive(n);
    let mut vertices: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    vertices.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step;
        vertices.push(v);
    }
    let mut values: Vec<f64> = vertices.iter().map(|v| sanitize(f(v))).collect();
    let mut order: Vec<usize> = (0..=n).collect();
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iterations {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n.saturating_sub(1)];

        let diameter = vertices
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&vertices[best])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
            })
            .fold(0.0f64, f64::max)
            .sqrt();
        if diameter < tol {
            converged = true;
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|x| *x = 0.0);
        for &idx in &order[..n] {
            for (cj, vj) in centroid.iter_mut().zip(&vertices[idx]) {
                *cj += vj;
            }
        }
        centroid.iter_mut().for_each(|x| *x /= n as f64);

        // reflection
        for j in 0..n {
            trial[j] = centroid[j] + c.reflect * (centroid[j] - vertices[worst][j]);
        }
        let f_reflect = sanitize(f(&trial));

        if f_reflect < values[best] {
            for j in 0..n {
                trial2[j] = centroid[j] + c.expand * (trial[j] - centroid[j]);
            }
            let f_expand = sanitize(f(&trial2));
            if f_expand < f_reflect {
                vertices[worst].copy_from_slice(&trial2);
                values[worst] = f_expand;
            } else {
                vertices[worst].copy_from_slice(&trial);
                values[worst] = f_reflect;
            }
            continue;
        }
        if f_reflect < values[second_worst] {
            vertices[worst].copy_from_slice(&trial);
            values[worst] = f_reflect;
            continue;
        }
        // contraction, outside or inside
        let outside = f_reflect < values[worst];
        for j in 0..n {
            trial2[j] = if outside {
                centroid[j] + c.contract * (trial[j] - centroid[j])
            } else {
                centroid[j] + c.contract * (vertices[worst][j] - centroid[j])
            };
        }
        let f_contract = sanitize(f(&trial2));
        let accept = if outside {
            f_contract <= f_reflect
        } else {
            f_contract < values[worst]
        };
        if accept {
            vertices[worst].copy_from_slice(&trial2);
            values[worst] = f_contract;
            continue;
        }
        // shrink toward the best vertex
        let anchor = vertices[best].clone();
        for &idx in &order[1..] {
            for j in 0..n {
                vertices[idx][j] = anchor[j] + c.shrink * (vertices[idx][j] - anchor[j]);
            }
            values[idx] = sanitize(f(&vertices[idx]));
        }
    }
    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)))
        .unwrap_or(0);
    SimplexOutcome {
        x: vertices[best].clone(),
        value: values[best],
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_minimum() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(2) + 4.0 * (x[1] + 2.0).powi(2) + 3.0;
        let out = minimize(f, &[0.0, 0.0], 0.5, 5000, 1e-10);
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-8);
        assert!((out.x[1] + 2.0).abs() < 1e-8);
        assert!((out.value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
        let out = minimize(f, &[-1.2, 1.0], 0.5, 10_000, 1e-12);
        assert!((out.x[0] - 1.0).abs() < 1e-6, "{:?}", out.x);
        assert!((out.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn one_dimensional() {
        let out = minimize(|x: &[f64]| (x[0] - 0.3).abs(), &[2.0], 0.5, 2000, 1e-12);
        assert!((out.x[0] - 0.3).abs() < 1e-9);
    }

    #[test]
    fn nan_is_treated_as_worst() {
        let f = |x: &[f64]| if x[0] > 1.0 { f64::NAN } else { (x[0] - 0.5).powi(2) };
        let out = minimize(f, &[0.9], 0.5, 2000, 1e-12);
        assert!((out.x[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn respects_iteration_budget() {
        let out = minimize(|x: &[f64]| x.iter().map(|v| v * v).sum(), &[5.0; 6], 0.5, 10, 1e-14);
        assert_eq!(out.iterations, 10);
        assert!(!out.converged);
    }
}
