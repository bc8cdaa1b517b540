//! Maximization of `f(p) = sum over permutations pi of prod_i p_pi(i)^(w_i - 1)`
//! over the probability simplex.
//!
//! `f` is the permanent of the `t x t` matrix `A[i][j] = p_j^(w_i - 1)`, with
//! `0^0 = 1`. It is the large-`n` limit of the probability that a single row
//! over `t` symbols with symbol fractions `p` separates randomly chosen parts of
//! sizes `w_i - 1`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;
use thiserror::Error;

use crate::separation::SeparationType;

pub const MAX_T: usize = 8;
const MAX_ITERATIONS: usize = 10_000;
const STATIONARY: f64 = 1e-9;
const START_SEED: u64 = 0x5eed_0f5e_ed00;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PStarError {
    #[error("need 2 <= t <= {MAX_T}, got t = {0}")]
    PartCount(usize),
    #[error("weights must be at least 2, got {0}")]
    Weight(usize),
    #[error("no start converged; best value {best} at {point:?}")]
    NonConvergence { best: f64, point: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PStarResult {
    /// Maximizer, sorted nondecreasing.
    pub p: Vec<f64>,
    pub value: f64,
    pub starts: usize,
    pub iterations: usize,
    /// Projected-gradient norm of `ln f` at the returned point.
    pub stationarity: f64,
}

/// `p^e` with `0^0 = 1`.
fn power(p: f64, e: usize) -> f64 {
    if e == 0 {
        1.0
    } else {
        p.powi(e as i32)
    }
}

/// Permanent of the rows `rows` and columns `cols` of `a` (square selection).
fn permanent(a: &[Vec<f64>], rows: &[usize], cols: &[usize]) -> f64 {
    let k = rows.len();
    if k == 0 {
        return 1.0;
    }
    // dp[mask] = sum over assignments of the first popcount(mask) rows to the columns in mask
    let mut dp = vec![0.0; 1 << k];
    dp[0] = 1.0;
    for mask in 0..(1usize << k) {
        let row = mask.count_ones() as usize;
        if row == k || dp[mask] == 0.0 {
            continue;
        }
        for c in 0..k {
            if mask & (1 << c) == 0 {
                dp[mask | (1 << c)] += dp[mask] * a[rows[row]][cols[c]];
            }
        }
    }
    dp[(1 << k) - 1]
}

fn weight_matrix(p: &[f64], weights: &[usize]) -> Vec<Vec<f64>> {
    weights
        .iter()
        .map(|&w| p.iter().map(|&x| power(x, w - 1)).collect())
        .collect()
}

/// `f(p)` for the given weights.
pub fn objective(p: &[f64], weights: &[usize]) -> f64 {
    let all: Vec<usize> = (0..weights.len()).collect();
    permanent(&weight_matrix(p, weights), &all, &all)
}

/// Gradient of `f` with respect to `p`.
pub fn gradient(p: &[f64], weights: &[usize]) -> Vec<f64> {
    let t = weights.len();
    let a = weight_matrix(p, weights);
    (0..t)
        .map(|j| {
            let cols: Vec<usize> = (0..t).filter(|&c| c != j).collect();
            (0..t)
                .filter(|&i| weights[i] >= 2)
                .map(|i| {
                    let rows: Vec<usize> = (0..t).filter(|&r| r != i).collect();
                    (weights[i] - 1) as f64 * power(p[j], weights[i] - 2) * permanent(&a, &rows, &cols)
                })
                .sum()
        })
        .collect()
}

/// Euclidean projection onto `{x >= 0, sum x = 1}` (sort-and-threshold).
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, &x) in sorted.iter().enumerate() {
        cumulative += x;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if x - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn stationarity(p: &[f64], g: &[f64]) -> f64 {
    let stepped: Vec<f64> = p.iter().zip(g).map(|(x, d)| x + d).collect();
    distance(&project_to_simplex(&stepped), p)
}

fn starting_points(t: usize) -> Vec<Vec<f64>> {
    let mut starts = vec![vec![1.0 / t as f64; t]];
    for i in 0..t {
        let mut v = vec![0.1 / t as f64; t];
        v[i] += 0.9;
        starts.push(v);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    while starts.len() < 10 * t {
        let draw: Vec<f64> = (0..t).map(|_| Exp1.sample(&mut rng)).collect();
        let total: f64 = draw.iter().sum();
        starts.push(draw.into_iter().map(|x| x / total).collect());
    }
    starts
}

/// Projected gradient ascent on `ln f` with Armijo backtracking from one start.
///
/// `ln f` has the same maximizers as `f` and keeps the stopping rule
/// independent of the objective's scale.
fn ascend(start: Vec<f64>, weights: &[usize]) -> (Vec<f64>, f64, usize, f64) {
    let log_objective = |p: &[f64]| objective(p, weights).ln();
    let log_gradient = |p: &[f64]| {
        let f = objective(p, weights);
        gradient(p, weights).into_iter().map(|d| d / f).collect::<Vec<f64>>()
    };
    let mut p = start;
    let mut value = log_objective(&p);
    let mut step = 1.0;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        let g = log_gradient(&p);
        if stationarity(&p, &g) < STATIONARY {
            break;
        }
        iterations += 1;
        let mut accepted = false;
        while step > 1e-18 {
            let stepped: Vec<f64> = p.iter().zip(&g).map(|(x, d)| x + step * d).collect();
            let trial = project_to_simplex(&stepped);
            let trial_value = log_objective(&trial);
            let ascent: f64 = g.iter().zip(trial.iter().zip(&p)).map(|(d, (x, y))| d * (x - y)).sum();
            if trial_value >= value + 1e-4 * ascent {
                accepted = distance(&trial, &p) > 0.0;
                p = trial;
                value = trial_value;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        step = (step * 2.0).min(1e6);
    }
    let pg = stationarity(&p, &log_gradient(&p));
    (p.clone(), objective(&p, weights), iterations, pg)
}

/// Maximizes `f` over the simplex by multi-start projected ascent.
///
/// Weight-1 parts contribute constant factors. When `u - t <= 1` the objective
/// is constant on the simplex (`t!` or `(t-1)!`) and is returned exactly.
/// The value gap at a point with projected-gradient norm `g` is of order `g^2`,
/// so the run fails if the best point's norm exceeds `sqrt(tolerance)`.
pub fn pstar_optimize(sep: &SeparationType, tolerance: f64) -> Result<PStarResult, PStarError> {
    let weights = sep.weights();
    let t = weights.len();
    if !(2..=MAX_T).contains(&t) {
        return Err(PStarError::PartCount(t));
    }
    let degree = sep.u() - t;
    if degree <= 1 {
        let factorial: f64 = (1..=t - degree).map(|k| k as f64).product();
        return Ok(PStarResult {
            p: vec![1.0 / t as f64; t],
            value: factorial,
            starts: 0,
            iterations: 0,
            stationarity: 0.0,
        });
    }
    let starts = starting_points(t);
    let mut best: Option<(Vec<f64>, f64, f64)> = None;
    let mut iterations = 0;
    for start in &starts {
        let (p, value, its, pg) = ascend(start.clone(), weights);
        iterations += its;
        if best.as_ref().is_none_or(|(_, v, _)| value > *v) {
            best = Some((p, value, pg));
        }
    }
    let (mut p, value, pg) = best.expect("at least one start");
    if pg > tolerance.sqrt().max(STATIONARY) {
        return Err(PStarError::NonConvergence { best: value, point: p });
    }
    p.sort_by(f64::total_cmp);
    Ok(PStarResult {
        p,
        value,
        starts: starts.len(),
        iterations,
        stationarity: pg,
    })
}

/// `t! (1/t)^(t(w-1))`, the maximum for `t` equal weights `w`.
pub fn pstar_closed_form(t: usize, w: usize) -> Result<f64, PStarError> {
    if t < 2 {
        return Err(PStarError::PartCount(t));
    }
    if w < 2 {
        return Err(PStarError::Weight(w));
    }
    let factorial: f64 = (1..=t).map(|k| k as f64).product();
    Ok(factorial * (t as f64).powi(-((t * (w - 1)) as i32)))
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Exact probability that one row with `counts[s]` copies of symbol `s`
/// (`t` symbols, `n = sum counts`) separates parts of sizes `w_i - 1` drawn
/// uniformly without replacement, part by part.
///
/// With `t` symbols and all `w_i >= 2` a row separates exactly when each part
/// is monochromatic in a different symbol.
pub fn row_separation_probability(counts: &[usize], sep: &SeparationType) -> f64 {
    let weights = sep.weights();
    let t = weights.len();
    assert_eq!(counts.len(), t, "one count per symbol");
    let n: usize = counts.iter().sum();
    let mut denominator = 1.0;
    let mut taken = 0;
    for &w in weights {
        denominator *= binomial(n - taken, w - 1);
        taken += w - 1;
    }
    let mut perm: Vec<usize> = (0..t).collect();
    let mut numerator = 0.0;
    permutations(&mut perm, 0, &mut |pi| {
        numerator += weights
            .iter()
            .zip(pi)
            .map(|(&w, &s)| binomial(counts[s], w - 1))
            .product::<f64>();
    });
    numerator / denominator
}

fn permutations(items: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, visit);
        items.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sep(w: &[usize]) -> SeparationType {
        SeparationType::new(w.to_vec()).unwrap()
    }

    /// Direct sum over permutations.
    fn objective_by_permutations(p: &[f64], weights: &[usize]) -> f64 {
        let mut perm: Vec<usize> = (0..weights.len()).collect();
        let mut total = 0.0;
        permutations(&mut perm, 0, &mut |pi| {
            total += weights
                .iter()
                .zip(pi)
                .map(|(&w, &j)| power(p[j], w - 1))
                .product::<f64>();
        });
        total
    }

    #[test]
    fn permanent_matches_permutation_sum() {
        let p = [0.1, 0.2, 0.3, 0.4];
        for w in [&[2, 2, 2, 2][..], &[1, 2, 3, 4], &[1, 1, 2, 5]] {
            assert!((objective(&p, w) - objective_by_permutations(&p, w)).abs() < 1e-15);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let p = [0.15, 0.25, 0.6];
        let w = [2, 3, 4];
        let g = gradient(&p, &w);
        for j in 0..3 {
            let h = 1e-6;
            let mut up = p;
            let mut down = p;
            up[j] += h;
            down[j] -= h;
            let fd = (objective_by_permutations(&up, &w) - objective_by_permutations(&down, &w)) / (2.0 * h);
            assert!((g[j] - fd).abs() < 1e-7, "component {j}: {} vs {fd}", g[j]);
        }
    }

    #[test]
    fn projection_lands_on_simplex() {
        let x = project_to_simplex(&[0.8, 0.9, -0.3]);
        assert!((x.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(x.iter().all(|&v| v >= 0.0));
        assert_eq!(project_to_simplex(&[0.2, 0.8]), vec![0.2, 0.8]);
    }

    #[test]
    fn two_by_two() {
        let r = pstar_optimize(&sep(&[2, 2]), 1e-9).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12);
        assert!(r.p.iter().all(|&x| (x - 0.5).abs() < 1e-9));
    }

    #[test]
    fn constant_objective_is_exact() {
        let r = pstar_optimize(&sep(&[1, 2]), 1e-9).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(pstar_optimize(&sep(&[1, 1, 1]), 1e-9).unwrap().value, 6.0);
    }

    #[test]
    fn three_equal() {
        let r = pstar_optimize(&sep(&[2, 2, 2]), 1e-9).unwrap();
        assert!((r.value - 2.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn unequal_pair() {
        // f = p1 p2^2 + p2 p1^2 = p1 p2 on the simplex
        let r = pstar_optimize(&sep(&[2, 3]), 1e-9).unwrap();
        assert!((r.value - 0.25).abs() < 1e-10);
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(pstar_closed_form(2, 2).unwrap(), 0.5);
        assert!((pstar_closed_form(3, 2).unwrap() - 2.0 / 9.0).abs() < 1e-15);
        assert_eq!(pstar_closed_form(2, 3).unwrap(), 0.125);
        assert!(pstar_closed_form(2, 1).is_err());
    }

    #[test]
    fn rejects_too_many_parts() {
        assert_eq!(pstar_optimize(&sep(&[2; 9]), 1e-9), Err(PStarError::PartCount(9)));
        assert_eq!(pstar_optimize(&sep(&[2]), 1e-9), Err(PStarError::PartCount(1)));
    }

    #[test]
    fn exact_row_probability_small_case() {
        // n = 4 columns, two of each symbol, W = {2,2}: P(two random columns differ) = 4/6
        let p = row_separation_probability(&[2, 2], &sep(&[2, 2]));
        assert!((p - 4.0 / 6.0).abs() < 1e-15);
    }
}
