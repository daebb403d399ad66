//! Weighted nonlinear least squares (Levenberg–Marquardt) and HOM dip-shape fits.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A scalar model `f(x; p)` with analytic parameter gradient.
pub trait Model {
    fn n_params(&self) -> usize;

    /// Returns `f(x; params)` and writes `∂f/∂p_j` into `grad`.
    fn eval(&self, x: f64, params: &[f64], grad: &mut [f64]) -> f64;
}

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Relative step size below which an accepted step counts as converged.
    pub step_tolerance: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            step_tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmFit {
    pub params: Vec<f64>,
    /// `(Jᵀ W J)⁻¹` at the solution, not rescaled by the reduced χ².
    pub covariance: DMatrix<f64>,
    pub chi2: f64,
    pub dof: usize,
    pub iterations: usize,
}

impl LmFit {
    pub fn reduced_chi2(&self) -> f64 {
        if self.dof == 0 {
            0.0
        } else {
            self.chi2 / self.dof as f64
        }
    }

    /// Parameter covariance scaled by the reduced χ².
    pub fn scaled_covariance(&self) -> DMatrix<f64> {
        &self.covariance * self.reduced_chi2()
    }
}

struct Linearized {
    jtj: DMatrix<f64>,
    jtr: DVector<f64>,
    chi2: f64,
}

fn linearize<M: Model>(model: &M, xs: &[f64], ys: &[f64], sigmas: &[f64], p: &[f64]) -> Linearized {
    let n = p.len();
    let mut jtj = DMatrix::zeros(n, n);
    let mut jtr = DVector::zeros(n);
    let mut chi2 = 0.0;
    let mut grad = vec![0.0; n];
    for ((&x, &y), &s) in xs.iter().zip(ys).zip(sigmas) {
        let f = model.eval(x, p, &mut grad);
        let r = (y - f) / s;
        chi2 += r * r;
        for i in 0..n {
            let gi = grad[i] / s;
            jtr[i] += gi * r;
            for j in 0..=i {
                jtj[(i, j)] += gi * grad[j] / s;
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            jtj[(j, i)] = jtj[(i, j)];
        }
    }
    Linearized { jtj, jtr, chi2 }
}

fn chi2_at<M: Model>(model: &M, xs: &[f64], ys: &[f64], sigmas: &[f64], p: &[f64]) -> f64 {
    let mut grad = vec![0.0; p.len()];
    xs.iter()
        .zip(ys)
        .zip(sigmas)
        .map(|((&x, &y), &s)| ((y - model.eval(x, p, &mut grad)) / s).powi(2))
        .sum()
}

/// Minimize `Σ ((y_i - f(x_i; p)) / σ_i)²` starting from `initial`.
pub fn levenberg_marquardt<M: Model>(
    model: &M,
    xs: &[f64],
    ys: &[f64],
    sigmas: &[f64],
    initial: &[f64],
    options: LmOptions,
) -> Result<LmFit> {
    let n = model.n_params();
    if initial.len() != n {
        return Err(Error::InvalidParameter(format!(
            "model has {n} parameters, {} initial values given",
            initial.len()
        )));
    }
    if xs.len() != ys.len() || xs.len() != sigmas.len() {
        return Err(Error::InvalidParameter("x, y and σ lengths differ".into()));
    }
    if xs.len() < n {
        return Err(Error::InvalidParameter(format!(
            "{} points cannot constrain {n} parameters",
            xs.len()
        )));
    }
    if sigmas.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        return Err(Error::InvalidParameter(
            "σ must be positive and finite".into(),
        ));
    }

    let mut p = initial.to_vec();
    let mut lambda = 1e-3;
    let mut lin = linearize(model, xs, ys, sigmas, &p);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < options.max_iterations {
        iterations += 1;
        if lin.chi2 == 0.0 {
            converged = true;
            break;
        }
        let mut damped = lin.jtj.clone();
        for i in 0..n {
            damped[(i, i)] += lambda * lin.jtj[(i, i)].max(1e-300);
        }
        let Some(step) = damped.lu().solve(&lin.jtr) else {
            lambda *= 10.0;
            if lambda > 1e20 {
                break;
            }
            continue;
        };
        let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
        let trial_chi2 = chi2_at(model, xs, ys, sigmas, &trial);
        if trial_chi2.is_finite() && trial_chi2 <= lin.chi2 {
            let small_step = step.iter().zip(&trial).all(|(d, v)| {
                d.abs() <= options.step_tolerance * (v.abs() + options.step_tolerance)
            });
            let small_gain = lin.chi2 - trial_chi2 <= 1e-15 * lin.chi2;
            p = trial;
            lin = linearize(model, xs, ys, sigmas, &p);
            lambda = (lambda / 10.0).max(1e-12);
            if small_step || small_gain {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e16 {
                // no downhill direction left at this resolution
                converged = true;
                break;
            }
        }
    }

    if !converged {
        return Err(Error::FitDiverged {
            iterations,
            residual: lin.chi2.sqrt(),
        });
    }
    let covariance = lin
        .jtj
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::FitDiverged {
            iterations,
            residual: lin.chi2.sqrt(),
        })?;
    Ok(LmFit {
        params: p,
        covariance,
        chi2: lin.chi2,
        dof: xs.len().saturating_sub(n),
        iterations,
    })
}

/// Functional form used to fit an HOM dip.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DipShape {
    /// `B (1 - V exp(-(x - x0)² / 2w²))`
    Gaussian,
    /// `B (1 - V max(0, 1 - |x - x0| / w))`
    Triangle,
}

impl Model for DipShape {
    fn n_params(&self) -> usize {
        4
    }

    fn eval(&self, x: f64, p: &[f64], grad: &mut [f64]) -> f64 {
        let (b, v, x0, w) = (p[0], p[1], p[2], p[3]);
        let u = (x - x0) / w;
        match self {
            DipShape::Gaussian => {
                let e = (-0.5 * u * u).exp();
                grad[0] = 1.0 - v * e;
                grad[1] = -b * e;
                grad[2] = -b * v * e * u / w;
                grad[3] = -b * v * e * u * u / w;
                b * (1.0 - v * e)
            }
            DipShape::Triangle => {
                let t = (1.0 - u.abs()).max(0.0);
                grad[0] = 1.0 - v * t;
                grad[1] = -b * t;
                if t > 0.0 {
                    grad[2] = -b * v * u.signum() / w;
                    grad[3] = -b * v * u.abs() / w;
                } else {
                    grad[2] = 0.0;
                    grad[3] = 0.0;
                }
                b * (1.0 - v * t)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipFit {
    pub shape: DipShape,
    pub baseline: f64,
    pub visibility: f64,
    pub center: f64,
    /// Gaussian σ or triangle half-base, in units of `x`.
    pub width: f64,
    /// Unweighted `√Σ (y - f)²`.
    pub residual_norm: f64,
}

/// Least-squares fit of an HOM dip with unit weights.
pub fn fit_dip(xs: &[f64], ys: &[f64], shape: DipShape) -> Result<DipFit> {
    if xs.len() != ys.len() || xs.len() < 8 {
        return Err(Error::InvalidParameter(
            "dip fit needs at least 8 paired points".into(),
        ));
    }
    let edge = (xs.len() / 10).max(1);
    let baseline = (ys[..edge].iter().sum::<f64>() + ys[ys.len() - edge..].iter().sum::<f64>())
        / (2 * edge) as f64;
    let (imin, &ymin) = ys
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    let depth = (1.0 - ymin / baseline).clamp(0.05, 1.0);
    let half_level = baseline * (1.0 - depth / 2.0);
    let below: Vec<f64> = xs
        .iter()
        .zip(ys)
        .filter(|(_, &y)| y <= half_level)
        .map(|(&x, _)| x)
        .collect();
    let hwhm = match (below.first(), below.last()) {
        (Some(a), Some(b)) if b > a => (b - a) / 2.0,
        _ => (xs[xs.len() - 1] - xs[0]) / 10.0,
    };
    let width = match shape {
        DipShape::Gaussian => hwhm / (2.0 * std::f64::consts::LN_2).sqrt(),
        DipShape::Triangle => 2.0 * hwhm,
    };
    let sigmas = vec![1.0; xs.len()];
    let fit = levenberg_marquardt(
        &shape,
        xs,
        ys,
        &sigmas,
        &[baseline, depth, xs[imin], width],
        LmOptions::default(),
    )?;
    Ok(DipFit {
        shape,
        baseline: fit.params[0],
        visibility: fit.params[1],
        center: fit.params[2],
        width: fit.params[3].abs(),
        residual_norm: fit.chi2.sqrt(),
    })
}
