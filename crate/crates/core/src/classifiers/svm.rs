//! Soft-margin kernel SVM trained by sequential minimal optimization.
//!
//! The binary solver works on the dual
//! `min ½ αᵀQα − Σα  s.t.  0 ≤ α ≤ C, yᵀα = 0` with `Q_ij = y_i y_j K(x_i, x_j)`,
//! choosing each working pair by the maximal-violating first index and a
//! second-order gain for the partner. It stops once the KKT violation drops
//! below `tol`. Multi-class problems use one-vs-one voting.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::dataio::{Dataset, Matrix};
use crate::vote::plurality;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Linear,
    Poly,
    Sigmoid,
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelKind::Linear => "linear",
            KernelKind::Poly => "poly",
            KernelKind::Sigmoid => "sigmoid",
        })
    }
}

impl std::str::FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "linear" => Ok(KernelKind::Linear),
            "poly" => Ok(KernelKind::Poly),
            "sigmoid" => Ok(KernelKind::Sigmoid),
            other => Err(Error::InvalidParams(format!(
                "unknown kernel `{other}` (expected linear, poly or sigmoid)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub kernel: KernelKind,
    pub c: f64,
    pub degree: u32,
    /// `None` means `1 / n_features`.
    pub gamma: Option<f64>,
    pub coef0: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl SvmParams {
    pub const DEFAULT_MAX_ITER: usize = 100_000;

    pub fn new(kernel: KernelKind) -> Self {
        Self {
            kernel,
            c: 1.0,
            degree: 3,
            gamma: None,
            coef0: 0.0,
            tol: 1e-3,
            max_iter: Self::DEFAULT_MAX_ITER,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "svm C must be > 0, got {}",
                self.c
            )));
        }
        if self.gamma.is_some_and(|g| !(g > 0.0 && g.is_finite())) {
            return Err(Error::InvalidParams("svm gamma must be > 0".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidParams("svm tolerance must be > 0".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParams(
                "svm iteration cap must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    pub kind: KernelKind,
    pub gamma: f64,
    pub degree: u32,
    pub coef0: f64,
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        match self.kind {
            KernelKind::Linear => dot,
            KernelKind::Poly => (self.gamma * dot + self.coef0).powi(self.degree as i32),
            KernelKind::Sigmoid => (self.gamma * dot + self.coef0).tanh(),
        }
    }
}

/// Binary machine separating `positive` (y = +1) from `negative` (y = −1).
#[derive(Debug, Clone, PartialEq)]
pub struct PairModel {
    pub positive: usize,
    pub negative: usize,
    pub support_vectors: Matrix,
    /// Lagrange multipliers of the support vectors, each in `[0, C]`.
    pub alphas: Vec<f64>,
    /// `+1.0` / `-1.0` label of each support vector.
    pub signs: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl PairModel {
    pub fn decision(&self, kernel: &Kernel, row: &[f64]) -> f64 {
        self.support_vectors
            .rows()
            .zip(self.alphas.iter().zip(&self.signs))
            .map(|(sv, (a, y))| a * y * kernel.eval(sv, row))
            .sum::<f64>()
            + self.bias
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    kernel: Kernel,
    c: f64,
    pairs: Vec<PairModel>,
    /// Prediction when training held a single class.
    fallback_class: usize,
    n_features: usize,
    n_classes: usize,
}

impl SvmModel {
    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn pairs(&self) -> &[PairModel] {
        &self.pairs
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn converged(&self) -> bool {
        self.pairs.iter().all(|p| p.converged)
    }

    pub fn warnings(&self) -> Vec<String> {
        self.pairs
            .iter()
            .filter(|p| !p.converged)
            .map(|p| {
                format!(
                    "svm pair ({}, {}) stopped at the iteration cap ({}) before reaching the KKT tolerance",
                    p.positive, p.negative, p.iterations
                )
            })
            .collect()
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        if self.pairs.is_empty() {
            return self.fallback_class;
        }
        let mut votes = vec![0u32; self.n_classes];
        for p in &self.pairs {
            let winner = if p.decision(&self.kernel, row) > 0.0 {
                p.positive
            } else {
                p.negative
            };
            votes[winner] += 1;
        }
        plurality(&votes)
    }
}

/// One binary machine per pair of classes present in `train`.
pub fn fit_svm_pairwise(params: &SvmParams, train: &Dataset) -> Result<SvmModel> {
    params.validate()?;
    if train.n_rows() == 0 {
        return Err(Error::InvalidInput("training set is empty".into()));
    }
    let kernel = Kernel {
        kind: params.kernel,
        gamma: params
            .gamma
            .unwrap_or(1.0 / train.n_features().max(1) as f64),
        degree: params.degree,
        coef0: params.coef0,
    };
    let counts = train.class_counts();
    let present: Vec<usize> = (0..train.n_classes()).filter(|&c| counts[c] > 0).collect();

    let mut pairs = Vec::new();
    for (ai, &a) in present.iter().enumerate() {
        for &b in &present[ai + 1..] {
            let rows: Vec<usize> = (0..train.n_rows())
                .filter(|&r| train.labels()[r] == a || train.labels()[r] == b)
                .collect();
            let x: Vec<&[f64]> = rows.iter().map(|&r| train.row(r)).collect();
            let y: Vec<f64> = rows
                .iter()
                .map(|&r| if train.labels()[r] == a { 1.0 } else { -1.0 })
                .collect();
            let sol = solve_binary(&kernel, &x, &y, params.c, params.tol, params.max_iter);

            let sv: Vec<usize> = (0..rows.len()).filter(|&i| sol.alpha[i] > 0.0).collect();
            let sv_rows: Vec<usize> = sv.iter().map(|&i| rows[i]).collect();
            pairs.push(PairModel {
                positive: a,
                negative: b,
                support_vectors: train.features().select_rows(&sv_rows),
                alphas: sv.iter().map(|&i| sol.alpha[i]).collect(),
                signs: sv.iter().map(|&i| y[i]).collect(),
                bias: -sol.rho,
                iterations: sol.iterations,
                converged: sol.converged,
            });
        }
    }
    Ok(SvmModel {
        kernel,
        c: params.c,
        pairs,
        fallback_class: present[0],
        n_features: train.n_features(),
        n_classes: train.n_classes(),
    })
}

#[derive(Debug, Clone)]
pub(crate) struct BinarySolution {
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Budget for cached Q columns, in f64 entries (64 MiB).
const CACHE_ENTRIES: usize = 8 << 20;
const TAU: f64 = 1e-12;

struct QColumns<'a> {
    kernel: &'a Kernel,
    x: &'a [&'a [f64]],
    y: &'a [f64],
    cache: HashMap<usize, Rc<Vec<f64>>>,
    order: VecDeque<usize>,
    capacity: usize,
}

impl<'a> QColumns<'a> {
    fn new(kernel: &'a Kernel, x: &'a [&'a [f64]], y: &'a [f64]) -> Self {
        let capacity = (CACHE_ENTRIES / x.len().max(1)).max(2);
        Self {
            kernel,
            x,
            y,
            cache: HashMap::new(),
            order: VecDeque::new(),
            capacity,
        }
    }

    fn column(&mut self, i: usize) -> Rc<Vec<f64>> {
        if let Some(c) = self.cache.get(&i) {
            return Rc::clone(c);
        }
        let xi = self.x[i];
        let yi = self.y[i];
        let col: Rc<Vec<f64>> = Rc::new(
            self.x
                .iter()
                .zip(self.y)
                .map(|(xt, yt)| yi * yt * self.kernel.eval(xi, xt))
                .collect(),
        );
        if self.order.len() >= self.capacity {
            if let Some(old) = self.order.pop_front() {
                self.cache.remove(&old);
            }
        }
        self.order.push_back(i);
        self.cache.insert(i, Rc::clone(&col));
        col
    }
}

pub(crate) fn solve_binary(
    kernel: &Kernel,
    x: &[&[f64]],
    y: &[f64],
    c: f64,
    tol: f64,
    max_iter: usize,
) -> BinarySolution {
    let n = x.len();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let diag: Vec<f64> = x.iter().map(|xi| kernel.eval(xi, xi)).collect();
    let mut q = QColumns::new(kernel, x, y);

    let mut iterations = 0;
    let mut converged = false;
    loop {
        // i: maximal violator in I_up
        let mut gmax = f64::NEG_INFINITY;
        let mut pick_i = None;
        for t in 0..n {
            let v = if y[t] > 0.0 {
                (alpha[t] < c).then(|| -grad[t])
            } else {
                (alpha[t] > 0.0).then(|| grad[t])
            };
            if let Some(v) = v {
                if v > gmax {
                    gmax = v;
                    pick_i = Some(t);
                }
            }
        }
        let Some(i) = pick_i else {
            converged = true;
            break;
        };
        let qi = q.column(i);

        // j: best second-order gain among I_low
        let mut gmax2 = f64::NEG_INFINITY;
        let mut pick_j = None;
        let mut best_obj = f64::INFINITY;
        for t in 0..n {
            let (in_low, g, quad) = if y[t] > 0.0 {
                (
                    alpha[t] > 0.0,
                    grad[t],
                    diag[i] + diag[t] - 2.0 * y[i] * qi[t],
                )
            } else {
                (
                    alpha[t] < c,
                    -grad[t],
                    diag[i] + diag[t] + 2.0 * y[i] * qi[t],
                )
            };
            if !in_low {
                continue;
            }
            gmax2 = gmax2.max(g);
            let grad_diff = gmax + g;
            if grad_diff > 0.0 {
                let obj = -(grad_diff * grad_diff) / if quad > 0.0 { quad } else { TAU };
                if obj < best_obj {
                    best_obj = obj;
                    pick_j = Some(t);
                }
            }
        }
        let Some(j) = pick_j.filter(|_| gmax + gmax2 >= tol) else {
            converged = true;
            break;
        };
        if iterations >= max_iter {
            break;
        }
        iterations += 1;

        let qj = q.column(j);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = (diag[i] + diag[j] + 2.0 * qi[j]).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (diag[i] + diag[j] - 2.0 * qi[j]).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += qi[t] * di + qj[t] * dj;
        }
    }

    BinarySolution {
        rho: compute_rho(&alpha, &grad, y, c),
        alpha,
        iterations,
        converged,
    }
}

/// Offset from free multipliers, or the midpoint of the feasible interval
/// when every multiplier sits at a bound.
fn compute_rho(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut n_free = 0usize;
    let mut sum_free = 0.0;
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    }
}
