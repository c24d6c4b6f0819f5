//! Logistic regression over the four test features.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::roc::roc_auc;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Theoretical,
    Flipped,
    Learned,
}

/// A linear test `weights . [lp_xy, lp_xeot, lp_yy, lp_yeot] + bias`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestCoefficients {
    pub weights: [f64; 4],
    pub bias: f64,
    pub provenance: Provenance,
}

impl TestCoefficients {
    pub fn theoretical() -> Self {
        TestCoefficients {
            weights: [1.0, -1.0, -1.0, 1.0],
            bias: 0.0,
            provenance: Provenance::Theoretical,
        }
    }

    pub fn flipped() -> Self {
        TestCoefficients {
            weights: [-1.0, 1.0, 1.0, -1.0],
            bias: 0.0,
            provenance: Provenance::Flipped,
        }
    }

    pub fn apply(&self, features: &[f64; 4]) -> f64 {
        self.weights
            .iter()
            .zip(features)
            .map(|(w, f)| w * f)
            .sum::<f64>()
            + self.bias
    }

    pub fn signs(&self) -> [i8; 4] {
        self.weights.map(|w| {
            if w > 0.0 {
                1
            } else if w < 0.0 {
                -1
            } else {
                0
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    /// Penalty `l2 / 2 * |weights|^2` on the mean log-loss; the bias is free.
    pub l2: f64,
    pub split_seed: u64,
    pub holdout_fraction: f64,
    /// Fit on everything and report training AUC.
    pub no_holdout: bool,
    /// Fit on z-scored features, then map coefficients back to raw scale.
    pub standardize: bool,
    pub max_iter: usize,
    pub grad_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            l2: 1e-6,
            split_seed: 0,
            holdout_fraction: 0.2,
            no_holdout: false,
            standardize: false,
            max_iter: 10_000,
            grad_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnedFit {
    pub coefficients: TestCoefficients,
    pub train_auc: f64,
    /// AUC of the learned score on the holdout split (training split under `no_holdout`).
    pub eval_auc: f64,
    pub eval_flipped_auc: f64,
    /// AUC of the theoretical test's negation on the same split, for comparison.
    pub eval_theoretical_auc: f64,
    pub n_train: usize,
    pub n_eval: usize,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
    pub warnings: Vec<String>,
    pub options: FitOptions,
}

/// Stratified split: returns `(train, holdout)` index lists.
pub fn stratified_split(labels: &[bool], fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut hold = Vec::new();
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        let k = (fraction * idx.len() as f64).round() as usize;
        hold.extend_from_slice(&idx[..k]);
        train.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    hold.sort_unstable();
    (train, hold)
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(z))` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

struct Problem<'a> {
    x: &'a [[f64; 4]],
    y: &'a [bool],
    l2: f64,
}

impl Problem<'_> {
    // parameters: 4 weights then bias
    fn objective(&self, theta: &[f64; 5]) -> f64 {
        let n = self.x.len() as f64;
        let loss: f64 = self
            .x
            .iter()
            .zip(self.y)
            .map(|(f, &label)| {
                let z = linear(theta, f);
                if label {
                    softplus(-z)
                } else {
                    softplus(z)
                }
            })
            .sum();
        loss / n + 0.5 * self.l2 * theta[..4].iter().map(|w| w * w).sum::<f64>()
    }

    fn gradient_hessian(&self, theta: &[f64; 5]) -> ([f64; 5], [[f64; 5]; 5]) {
        let n = self.x.len() as f64;
        let mut g = [0.0; 5];
        let mut h = [[0.0; 5]; 5];
        for (f, &label) in self.x.iter().zip(self.y) {
            let row = [f[0], f[1], f[2], f[3], 1.0];
            let p = sigmoid(linear(theta, f));
            let r = p - if label { 1.0 } else { 0.0 };
            let s = p * (1.0 - p);
            for i in 0..5 {
                g[i] += r * row[i] / n;
                for j in 0..5 {
                    h[i][j] += s * row[i] * row[j] / n;
                }
            }
        }
        for i in 0..4 {
            g[i] += self.l2 * theta[i];
            h[i][i] += self.l2;
        }
        (g, h)
    }
}

fn linear(theta: &[f64; 5], f: &[f64; 4]) -> f64 {
    theta[0] * f[0] + theta[1] * f[1] + theta[2] * f[2] + theta[3] * f[3] + theta[4]
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
fn solve(mut a: [[f64; 5]; 5], mut b: [f64; 5]) -> Option<[f64; 5]> {
    for col in 0..5 {
        let pivot = (col..5).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..5 {
            let factor = a[row][col] / a[col][col];
            for k in col..5 {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0; 5];
    for row in (0..5).rev() {
        let tail: f64 = (row + 1..5).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

struct Solution {
    theta: [f64; 5],
    iterations: usize,
    grad_norm: f64,
}

/// Damped Newton iterations on the regularized mean log-loss.
fn newton(problem: &Problem<'_>, max_iter: usize, tol: f64) -> Solution {
    let mut theta = [0.0; 5];
    let mut value = problem.objective(&theta);
    let mut grad_norm = f64::INFINITY;
    let mut iterations = 0;
    while iterations < max_iter {
        let (g, mut h) = problem.gradient_hessian(&theta);
        grad_norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if grad_norm <= tol {
            break;
        }
        iterations += 1;
        let step = loop {
            if let Some(step) = solve(h, g) {
                break step;
            }
            // flat curvature: nudge toward gradient descent
            for (i, row) in h.iter_mut().enumerate() {
                row[i] += 1e-8;
            }
        };
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let mut candidate = theta;
            for i in 0..5 {
                candidate[i] -= t * step[i];
            }
            let v = problem.objective(&candidate);
            if v <= value {
                moved = v < value || candidate != theta;
                theta = candidate;
                value = v;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            let (g, _) = problem.gradient_hessian(&theta);
            grad_norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            break;
        }
    }
    Solution {
        theta,
        iterations,
        grad_norm,
    }
}

fn column_stats(x: &[[f64; 4]]) -> ([f64; 4], [f64; 4]) {
    let n = x.len() as f64;
    let mut mean = [0.0; 4];
    let mut sd = [0.0; 4];
    for j in 0..4 {
        mean[j] = x.iter().map(|f| f[j]).sum::<f64>() / n;
        let var = x.iter().map(|f| (f[j] - mean[j]).powi(2)).sum::<f64>() / n;
        sd[j] = if var > 0.0 { var.sqrt() } else { 1.0 };
    }
    (mean, sd)
}

/// Fits `P(entailment | features)` by L2-regularized logistic regression.
pub fn fit_learned_test(
    features: &[[f64; 4]],
    labels: &[bool],
    options: &FitOptions,
) -> Result<LearnedFit> {
    if features.len() != labels.len() {
        return Err(Error::InvalidArgument("features and labels differ in length".into()));
    }
    if features.len() < 20 {
        return Err(Error::InvalidArgument(format!(
            "need at least 20 instances, got {}",
            features.len()
        )));
    }
    if features.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("features must be finite".into()));
    }
    if !(options.l2.is_finite() && options.l2 >= 0.0) {
        return Err(Error::InvalidArgument("l2 must be finite and nonnegative".into()));
    }
    let (train, eval) = if options.no_holdout {
        let all: Vec<usize> = (0..labels.len()).collect();
        (all.clone(), all)
    } else {
        if !(options.holdout_fraction > 0.0 && options.holdout_fraction < 1.0) {
            return Err(Error::InvalidArgument("holdout fraction must lie in (0, 1)".into()));
        }
        stratified_split(labels, options.holdout_fraction, options.split_seed)
    };
    for (name, idx) in [("training", &train), ("holdout", &eval)] {
        let pos = idx.iter().filter(|&&i| labels[i]).count();
        if pos == 0 || pos == idx.len() {
            return Err(Error::InvalidArgument(format!(
                "the {name} split needs both classes"
            )));
        }
    }
    let tx: Vec<[f64; 4]> = train.iter().map(|&i| features[i]).collect();
    let ty: Vec<bool> = train.iter().map(|&i| labels[i]).collect();
    let (mean, sd) = if options.standardize {
        column_stats(&tx)
    } else {
        ([0.0; 4], [1.0; 4])
    };
    let scaled: Vec<[f64; 4]> = tx
        .iter()
        .map(|f| std::array::from_fn(|j| (f[j] - mean[j]) / sd[j]))
        .collect();
    let problem = Problem {
        x: &scaled,
        y: &ty,
        l2: options.l2,
    };
    let sol = newton(&problem, options.max_iter, options.grad_tol);
    let weights: [f64; 4] = std::array::from_fn(|j| sol.theta[j] / sd[j]);
    let bias = sol.theta[4] - (0..4).map(|j| sol.theta[j] * mean[j] / sd[j]).sum::<f64>();
    let coefficients = TestCoefficients {
        weights,
        bias,
        provenance: Provenance::Learned,
    };
    let converged = sol.grad_norm <= options.grad_tol;
    let mut warnings = Vec::new();
    if !converged {
        warnings.push(format!(
            "logistic regression stopped after {} iterations with gradient norm {:.3e}",
            sol.iterations, sol.grad_norm
        ));
    }
    let auc_on = |idx: &[usize], c: &TestCoefficients| -> Result<f64> {
        let s: Vec<(f64, bool)> = idx.iter().map(|&i| (c.apply(&features[i]), labels[i])).collect();
        Ok(roc_auc(&s)?.auc)
    };
    let eval_auc = auc_on(&eval, &coefficients)?;
    Ok(LearnedFit {
        coefficients,
        train_auc: auc_on(&train, &coefficients)?,
        eval_auc,
        eval_flipped_auc: 100.0 - eval_auc,
        eval_theoretical_auc: auc_on(&eval, &TestCoefficients::flipped())?,
        n_train: train.len(),
        n_eval: eval.len(),
        iterations: sol.iterations,
        grad_norm: sol.grad_norm,
        converged,
        warnings,
        options: options.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn noisy_data(n: usize, seed: u64) -> (Vec<[f64; 4]>, Vec<bool>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let f: [f64; 4] = std::array::from_fn(|_| rng.random_range(-3.0..3.0));
            let z = 1.5 * f[0] - 0.5 * f[2] + 0.3;
            y.push(rng.random::<f64>() < sigmoid(z));
            x.push(f);
        }
        (x, y)
    }

    #[test]
    fn recovers_generating_direction() {
        let (x, y) = noisy_data(4000, 1);
        let fit = fit_learned_test(&x, &y, &FitOptions::default()).unwrap();
        assert!(fit.converged, "{:?}", fit.warnings);
        let w = fit.coefficients.weights;
        assert!((w[0] - 1.5).abs() < 0.2, "{w:?}");
        assert!((w[2] + 0.5).abs() < 0.15, "{w:?}");
        assert!(w[1].abs() < 0.15 && w[3].abs() < 0.15, "{w:?}");
    }

    #[test]
    fn standardizing_gives_same_rule() {
        let (x, y) = noisy_data(500, 2);
        let plain = fit_learned_test(&x, &y, &FitOptions::default()).unwrap();
        let z = fit_learned_test(
            &x,
            &y,
            &FitOptions {
                standardize: true,
                l2: 0.0,
                ..FitOptions::default()
            },
        )
        .unwrap();
        for j in 0..4 {
            assert!((plain.coefficients.weights[j] - z.coefficients.weights[j]).abs() < 1e-3);
        }
    }

    #[test]
    fn heavy_penalty_shrinks_weights() {
        let (x, y) = noisy_data(300, 3);
        let fit = fit_learned_test(
            &x,
            &y,
            &FitOptions {
                l2: 1e9,
                ..FitOptions::default()
            },
        )
        .unwrap();
        assert!(fit.coefficients.weights.iter().all(|w| w.abs() < 1e-8));
    }

    #[test]
    fn iteration_cap_is_reported() {
        let (x, y) = noisy_data(300, 4);
        let fit = fit_learned_test(
            &x,
            &y,
            &FitOptions {
                max_iter: 1,
                ..FitOptions::default()
            },
        )
        .unwrap();
        assert!(!fit.converged);
        assert_eq!(fit.warnings.len(), 1);
    }

    #[test]
    fn split_is_stratified_and_seeded() {
        let labels: Vec<bool> = (0..100).map(|i| i % 4 == 0).collect();
        let (train, hold) = stratified_split(&labels, 0.2, 9);
        assert_eq!(hold.len(), 20);
        assert_eq!(hold.iter().filter(|&&i| labels[i]).count(), 5);
        assert_eq!(train.len() + hold.len(), 100);
        assert_eq!(stratified_split(&labels, 0.2, 9), (train, hold));
    }

    #[test]
    fn input_checks() {
        let (x, y) = noisy_data(10, 5);
        assert!(fit_learned_test(&x, &y, &FitOptions::default()).is_err());
        let single = vec![true; 40];
        let (x, _) = noisy_data(40, 5);
        assert!(fit_learned_test(&x, &single, &FitOptions::default()).is_err());
    }
}
