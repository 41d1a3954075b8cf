//! Alternating solver for NMF with optional sparseness constraints.
//!
//! Each outer iteration updates `W` and then `H`. A factor with a
//! sparseness target takes a projected gradient step:
//!
//! ```text
//! W := P(W - mu_W (WH - V) H^T)        H := P(H - mu_H W^T (WH - V))
//! ```
//!
//! where `P` projects every column of `W` (keeping its L2 norm) or every row
//! of `H` (to unit L2 norm) onto the target sparseness. The step size is
//! halved until the objective strictly decreases and grown after every
//! accepted step. A factor without a target takes the multiplicative update
//! for the squared-error objective instead.

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::projection::{project_nonneg_in_place, ProjectionTarget};
use crate::sparseness::sparseness;
use crate::types::{
    squared_error, ConstraintSpec, DataMatrix, FactorModel, FitReport, SolverConfig,
};

/// Floor applied to the denominators of the multiplicative updates.
const DENOMINATOR_FLOOR: f64 = 1e-9;

/// Number of consecutive small relative decreases that ends a fit.
const CONVERGENCE_WINDOW: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    model: FactorModel,
    /// Current step size for `W` (`mu_W`).
    pub stepsize_w: f64,
    /// Current step size for `H` (`mu_H`).
    pub stepsize_h: f64,
    pub iteration: usize,
    /// Objective of `model`, kept in sync after every step.
    pub last_objective: f64,
    stalled_w: bool,
    stalled_h: bool,
}

impl SolverState {
    pub fn model(&self) -> &FactorModel {
        &self.model
    }

    pub fn into_model(self) -> FactorModel {
        self.model
    }

    /// True if the last `W` step could not reduce the objective before the
    /// step size reached its floor.
    pub fn basis_stalled(&self) -> bool {
        self.stalled_w
    }

    pub fn coefficients_stalled(&self) -> bool {
        self.stalled_h
    }
}

/// A data matrix bound to its constraints and solver settings.
#[derive(Debug, Clone)]
pub struct Solver<'a> {
    data: &'a DataMatrix,
    spec: ConstraintSpec,
    config: SolverConfig,
}

impl<'a> Solver<'a> {
    pub fn new(data: &'a DataMatrix, spec: ConstraintSpec, config: SolverConfig) -> Result<Self> {
        spec.validate(data.rows(), data.cols())?;
        config.validate()?;
        Ok(Solver { data, spec, config })
    }

    /// Random positive factors, projected onto any active constraints.
    ///
    /// Entries are drawn uniformly from `(0, 1]`, `W` first in row-major
    /// order, then `H`.
    pub fn initialize(&self) -> Result<SolverState> {
        let (n, t) = (self.data.rows(), self.data.cols());
        let m = self.spec.components;
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.rng_seed);
        let mut draw = |rows, cols| {
            Array2::from_shape_simple_fn((rows, cols), || 1.0 - rng.random::<f64>())
        };
        let mut basis = draw(n, m);
        let mut coefficients = draw(m, t);

        if let Some(s) = self.spec.basis_sparseness {
            project_basis_columns(&mut basis, s)?;
        }
        if let Some(s) = self.spec.coeff_sparseness {
            project_coefficient_rows(&mut coefficients, s)?;
        }
        let last_objective = squared_error(self.data.view(), basis.view(), coefficients.view());
        Ok(SolverState {
            model: FactorModel {
                basis,
                coefficients,
            },
            stepsize_w: self.config.initial_stepsize,
            stepsize_h: self.config.initial_stepsize,
            iteration: 0,
            last_objective,
            stalled_w: false,
            stalled_h: false,
        })
    }

    /// Updates `W`, leaving `H` untouched.
    pub fn step_w(&self, state: &mut SolverState) {
        let v = self.data.view();
        let h = state.model.coefficients.view();
        match self.spec.basis_sparseness {
            Some(s) => {
                let grad = basis_gradient_of(v, state.model.basis.view(), h);
                let outcome = self.backtrack(
                    &state.model.basis,
                    &grad,
                    state.stepsize_w,
                    state.last_objective,
                    |candidate| {
                        project_basis_columns(candidate, s).ok()?;
                        Some(squared_error(v, candidate.view(), h))
                    },
                );
                state.stepsize_w = outcome.stepsize;
                state.stalled_w = outcome.accepted.is_none();
                if let Some((basis, obj)) = outcome.accepted {
                    state.model.basis = basis;
                    state.last_objective = obj;
                }
            }
            None => {
                let w = state.model.basis.view();
                let numer = v.dot(&h.t());
                let denom = w.dot(&h).dot(&h.t());
                let candidate = multiplicative(w, &numer, &denom);
                let obj = squared_error(v, candidate.view(), h);
                state.stalled_w = false;
                if obj <= state.last_objective {
                    state.model.basis = candidate;
                    state.last_objective = obj;
                }
            }
        }
    }

    /// Updates `H`, leaving `W` untouched.
    pub fn step_h(&self, state: &mut SolverState) {
        let v = self.data.view();
        let w = state.model.basis.view();
        match self.spec.coeff_sparseness {
            Some(s) => {
                let grad = coefficient_gradient_of(v, w, state.model.coefficients.view());
                let outcome = self.backtrack(
                    &state.model.coefficients,
                    &grad,
                    state.stepsize_h,
                    state.last_objective,
                    |candidate| {
                        project_coefficient_rows(candidate, s).ok()?;
                        Some(squared_error(v, w, candidate.view()))
                    },
                );
                state.stepsize_h = outcome.stepsize;
                state.stalled_h = outcome.accepted.is_none();
                if let Some((coefficients, obj)) = outcome.accepted {
                    state.model.coefficients = coefficients;
                    state.last_objective = obj;
                }
            }
            None => {
                let h = state.model.coefficients.view();
                let numer = w.t().dot(&v);
                let denom = w.t().dot(&w).dot(&h);
                let candidate = multiplicative(h, &numer, &denom);
                let obj = squared_error(v, w, candidate.view());
                state.stalled_h = false;
                if obj <= state.last_objective {
                    state.model.coefficients = candidate;
                    state.last_objective = obj;
                }
            }
        }
    }

    /// One outer iteration: `step_w` then `step_h`.
    pub fn iterate(&self, state: &mut SolverState) {
        self.step_w(state);
        self.step_h(state);
        state.iteration += 1;
    }

    /// Runs until convergence or the iteration limit, calling `observer`
    /// after every outer iteration.
    pub fn run(&self, mut observer: impl FnMut(&SolverState)) -> Result<(FactorModel, FitReport)> {
        let mut state = self.initialize()?;
        let initial_objective = state.last_objective;
        let mut objective_trace = Vec::new();
        let mut stepsize_trace = Vec::new();
        let mut small_steps = 0usize;
        let mut converged = false;
        let all_constrained =
            self.spec.basis_sparseness.is_some() && self.spec.coeff_sparseness.is_some();

        let mut previous = initial_objective;
        while state.iteration < self.config.max_iterations {
            self.iterate(&mut state);
            let current = state.last_objective;
            objective_trace.push(current);
            stepsize_trace.push((state.stepsize_w, state.stepsize_h));
            observer(&state);

            if current == 0.0 {
                converged = true;
                break;
            }
            let decrease = (previous - current) / previous;
            if decrease < self.config.objective_rel_tolerance {
                small_steps += 1;
            } else {
                small_steps = 0;
            }
            previous = current;
            if small_steps >= CONVERGENCE_WINDOW
                || (all_constrained && state.stalled_w && state.stalled_h)
            {
                converged = true;
                break;
            }
        }

        let model = state.model;
        let report = FitReport {
            initial_objective,
            iterations_run: objective_trace.len(),
            objective_trace,
            final_basis_sparseness: model
                .basis
                .axis_iter(Axis(1))
                .map(sparseness_or_nan)
                .collect(),
            final_coeff_sparseness: model
                .coefficients
                .axis_iter(Axis(0))
                .map(sparseness_or_nan)
                .collect(),
            stepsize_trace,
            converged,
        };
        Ok((model, report))
    }

    /// Halves the step until `evaluate` (which projects the candidate in
    /// place) reports an objective strictly below `current`.
    fn backtrack(
        &self,
        factor: &Array2<f64>,
        grad: &Array2<f64>,
        mut stepsize: f64,
        current: f64,
        mut evaluate: impl FnMut(&mut Array2<f64>) -> Option<f64>,
    ) -> Backtrack {
        loop {
            let mut candidate = factor - &(grad * stepsize);
            if let Some(obj) = evaluate(&mut candidate) {
                if obj < current {
                    return Backtrack {
                        stepsize: stepsize * self.config.stepsize_increase,
                        accepted: Some((candidate, obj)),
                    };
                }
            }
            stepsize *= self.config.stepsize_decrease;
            if stepsize < self.config.min_stepsize {
                return Backtrack {
                    stepsize: self.config.min_stepsize,
                    accepted: None,
                };
            }
        }
    }
}

struct Backtrack {
    stepsize: f64,
    accepted: Option<(Array2<f64>, f64)>,
}

/// Fits `W` and `H` to `data`.
pub fn fit(
    data: &DataMatrix,
    spec: &ConstraintSpec,
    config: &SolverConfig,
) -> Result<(FactorModel, FitReport)> {
    Solver::new(data, *spec, *config)?.run(|_| {})
}

/// Like [`fit`], calling `observer` with the solver state after every outer
/// iteration.
pub fn fit_with_observer(
    data: &DataMatrix,
    spec: &ConstraintSpec,
    config: &SolverConfig,
    observer: impl FnMut(&SolverState),
) -> Result<(FactorModel, FitReport)> {
    Solver::new(data, *spec, *config)?.run(observer)
}

/// Descent direction used for `W`: `(WH - V) H^T`, half the gradient of
/// the objective with respect to `W`.
pub fn basis_gradient(data: &DataMatrix, model: &FactorModel) -> Result<Array2<f64>> {
    check_shapes(data, model)?;
    Ok(basis_gradient_of(
        data.view(),
        model.basis.view(),
        model.coefficients.view(),
    ))
}

/// Descent direction used for `H`: `W^T (WH - V)`, half the gradient of
/// the objective with respect to `H`.
pub fn coefficient_gradient(data: &DataMatrix, model: &FactorModel) -> Result<Array2<f64>> {
    check_shapes(data, model)?;
    Ok(coefficient_gradient_of(
        data.view(),
        model.basis.view(),
        model.coefficients.view(),
    ))
}

fn check_shapes(data: &DataMatrix, model: &FactorModel) -> Result<()> {
    let found = (model.basis.nrows(), model.coefficients.ncols());
    if found != (data.rows(), data.cols()) {
        return Err(Error::DimensionMismatch {
            context: "gradient",
            expected: format!("{}x{} reconstruction", data.rows(), data.cols()),
            found: format!("{}x{}", found.0, found.1),
        });
    }
    Ok(())
}

fn residual(v: ArrayView2<'_, f64>, w: ArrayView2<'_, f64>, h: ArrayView2<'_, f64>) -> Array2<f64> {
    w.dot(&h) - v
}

fn basis_gradient_of(
    v: ArrayView2<'_, f64>,
    w: ArrayView2<'_, f64>,
    h: ArrayView2<'_, f64>,
) -> Array2<f64> {
    residual(v, w, h).dot(&h.t())
}

fn coefficient_gradient_of(
    v: ArrayView2<'_, f64>,
    w: ArrayView2<'_, f64>,
    h: ArrayView2<'_, f64>,
) -> Array2<f64> {
    w.t().dot(&residual(v, w, h))
}

fn multiplicative(factor: ArrayView2<'_, f64>, numer: &Array2<f64>, denom: &Array2<f64>) -> Array2<f64> {
    let mut out = factor.to_owned();
    ndarray::Zip::from(&mut out)
        .and(numer)
        .and(denom)
        .for_each(|x, &n, &d| *x *= n / d.max(DENOMINATOR_FLOOR));
    out
}

/// Projects each column of `w` to sparseness `s`, keeping its L2 norm.
fn project_basis_columns(w: &mut Array2<f64>, s: f64) -> Result<()> {
    let n = w.nrows();
    let mut buf = vec![0.0; n];
    for mut col in w.axis_iter_mut(Axis(1)) {
        buf.iter_mut().zip(col.iter()).for_each(|(b, v)| *b = *v);
        let l2 = buf.iter().map(|v| v * v).sum::<f64>().sqrt();
        let target = ProjectionTarget::from_sparseness(s, l2, n)?;
        project_nonneg_in_place(&mut buf, &target)?;
        col.assign(&ArrayView1::from(&buf));
    }
    Ok(())
}

/// Projects each row of `h` to sparseness `s` and unit L2 norm.
fn project_coefficient_rows(h: &mut Array2<f64>, s: f64) -> Result<()> {
    let t = h.ncols();
    let target = ProjectionTarget::from_sparseness(s, 1.0, t)?;
    let mut buf = vec![0.0; t];
    for mut row in h.axis_iter_mut(Axis(0)) {
        buf.iter_mut().zip(row.iter()).for_each(|(b, v)| *b = *v);
        project_nonneg_in_place(&mut buf, &target)?;
        row.assign(&ArrayView1::from(&buf));
    }
    Ok(())
}

fn sparseness_or_nan(x: ArrayView1<'_, f64>) -> f64 {
    sparseness(&x.to_vec()).unwrap_or(f64::NAN)
}
