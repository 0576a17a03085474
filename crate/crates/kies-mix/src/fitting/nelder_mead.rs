//! Derivative-free simplex minimizer (Nelder-Mead) with the standard
//! reflection/expansion/contraction/shrink moves.

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub max_iterations: usize,
    pub f_tol: f64,
    pub x_tol: f64,
}

impl Default for Options {
    fn default() -> Self {
        Self { max_iterations: 500, f_tol: 1e-10, x_tol: 1e-9 }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations: u64,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Minimize `f` starting from `x0`, with an initial simplex of edge `step`
/// along each coordinate.
pub fn minimize<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step: f64,
    opts: &Options,
) -> Outcome {
    let dim = x0.len();
    let mut evals = 0_u64;
    let mut eval = |x: &[f64], evals: &mut u64| -> f64 {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut v = x0.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| eval(x, &mut evals)).collect();

    let mut converged = false;
    for _ in 0..opts.max_iterations {
        // Order best..worst.
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("no NaN costs"));
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim - 1];

        let spread = values[worst] - values[best];
        let diameter = simplex
            .iter()
            .flat_map(|v| {
                v.iter()
                    .zip(&simplex[best])
                    .map(|(a, b)| (a - b).abs())
            })
            .fold(0.0_f64, f64::max);
        if spread <= opts.f_tol * (values[best].abs() + opts.f_tol) && diameter <= opts.x_tol {
            converged = true;
            break;
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; dim];
        for (i, v) in simplex.iter().enumerate() {
            if i == worst {
                continue;
            }
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / dim as f64;
            }
        }

        let blend = |alpha: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + alpha * (c - w))
                .collect()
        };

        let reflected = blend(REFLECT);
        let f_reflected = eval(&reflected, &mut evals);
        if f_reflected < values[best] {
            let expanded = blend(EXPAND);
            let f_expanded = eval(&expanded, &mut evals);
            if f_expanded < f_reflected {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
            continue;
        }
        if f_reflected < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
            continue;
        }
        // Contract toward the better of worst/reflected.
        let contracted = if f_reflected < values[worst] {
            blend(CONTRACT)
        } else {
            blend(-CONTRACT)
        };
        let f_contracted = eval(&contracted, &mut evals);
        if f_contracted < values[worst].min(f_reflected) {
            simplex[worst] = contracted;
            values[worst] = f_contracted;
            continue;
        }
        // Shrink toward the best vertex.
        for i in 0..=dim {
            if i == best {
                continue;
            }
            let shrunk: Vec<f64> = simplex[i]
                .iter()
                .zip(&simplex[best])
                .map(|(x, b)| b + SHRINK * (x - b))
                .collect();
            values[i] = eval(&shrunk, &mut evals);
            simplex[i] = shrunk;
        }
    }

    let mut best = 0;
    for i in 1..=dim {
        if values[i] < values[best] {
            best = i;
        }
    }
    Outcome {
        x: simplex.swap_remove(best),
        f: values[best],
        evaluations: evals,
        converged,
    }
}
