//! Shared domain types: the data matrix, the factor pair, constraint and
//! solver settings, and the squared-error objective.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// Non-negative `N x T` data matrix. Columns are measurement vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Array2<f64>,
}

impl DataMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let (rows, cols) = values.dim();
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDimension(format!(
                "data matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        check_nonnegative(values.view())?;
        Ok(DataMatrix { values })
    }

    /// Number of variables (rows), `N`.
    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    /// Number of measurements (columns), `T`.
    pub fn cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.values
    }

    /// Sum of squared entries.
    pub fn squared_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

/// The factor pair `W` (`N x M`, basis vectors as columns) and `H`
/// (`M x T`, coefficient rows).
#[derive(Debug, Clone, PartialEq)]
pub struct FactorModel {
    pub(crate) basis: Array2<f64>,
    pub(crate) coefficients: Array2<f64>,
}

impl FactorModel {
    pub fn new(basis: Array2<f64>, coefficients: Array2<f64>) -> Result<Self> {
        if basis.ncols() != coefficients.nrows() {
            return Err(Error::DimensionMismatch {
                context: "factor model",
                expected: format!("{} coefficient rows", basis.ncols()),
                found: format!("{}", coefficients.nrows()),
            });
        }
        if basis.ncols() == 0 {
            return Err(Error::InvalidDimension(
                "a factor model needs at least one component".into(),
            ));
        }
        if basis.nrows() == 0 || coefficients.ncols() == 0 {
            return Err(Error::InvalidDimension(format!(
                "empty factor: basis {:?}, coefficients {:?}",
                basis.dim(),
                coefficients.dim()
            )));
        }
        check_nonnegative(basis.view())?;
        check_nonnegative(coefficients.view())?;
        Ok(FactorModel {
            basis,
            coefficients,
        })
    }

    pub fn basis(&self) -> ArrayView2<'_, f64> {
        self.basis.view()
    }

    pub fn coefficients(&self) -> ArrayView2<'_, f64> {
        self.coefficients.view()
    }

    pub fn components(&self) -> usize {
        self.basis.ncols()
    }

    pub fn into_parts(self) -> (Array2<f64>, Array2<f64>) {
        (self.basis, self.coefficients)
    }
}

/// Which factors carry a sparseness target, and how many components to learn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintSpec {
    pub components: usize,
    /// Target sparseness of every column of `W`.
    pub basis_sparseness: Option<f64>,
    /// Target sparseness of every row of `H`.
    pub coeff_sparseness: Option<f64>,
}

impl ConstraintSpec {
    pub fn unconstrained(components: usize) -> Self {
        ConstraintSpec {
            components,
            basis_sparseness: None,
            coeff_sparseness: None,
        }
    }

    pub fn with_basis_sparseness(mut self, s: f64) -> Self {
        self.basis_sparseness = Some(s);
        self
    }

    pub fn with_coeff_sparseness(mut self, s: f64) -> Self {
        self.coeff_sparseness = Some(s);
        self
    }

    /// Checks the targets against a data matrix of shape `rows x cols`.
    ///
    /// A constrained column of `W` has `rows` entries and a constrained row
    /// of `H` has `cols` entries; the sparseness measure needs at least two.
    pub fn validate(&self, rows: usize, cols: usize) -> Result<()> {
        if self.components == 0 {
            return Err(Error::InvalidConfig(
                "number of components must be at least 1".into(),
            ));
        }
        for (name, target, len) in [
            ("basis", self.basis_sparseness, rows),
            ("coefficient", self.coeff_sparseness, cols),
        ] {
            let Some(s) = target else { continue };
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::Infeasible(format!(
                    "{name} sparseness {s} is outside [0, 1]"
                )));
            }
            if len < 2 {
                return Err(Error::Infeasible(format!(
                    "{name} sparseness needs vectors of length >= 2, got {len}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Stop once the relative objective decrease stays below this value for
    /// a full window of iterations.
    pub objective_rel_tolerance: f64,
    pub initial_stepsize: f64,
    pub stepsize_decrease: f64,
    pub stepsize_increase: f64,
    pub min_stepsize: f64,
    pub rng_seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iterations: 5000,
            objective_rel_tolerance: 1e-9,
            initial_stepsize: 1.0,
            stepsize_decrease: 0.5,
            stepsize_increase: 1.2,
            min_stepsize: 1e-20,
            rng_seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn with_max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.objective_rel_tolerance = tol;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")))
            }
        };
        positive("initial_stepsize", self.initial_stepsize)?;
        positive("min_stepsize", self.min_stepsize)?;
        if !(self.objective_rel_tolerance >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "objective_rel_tolerance must be non-negative, got {}",
                self.objective_rel_tolerance
            )));
        }
        if !(self.stepsize_decrease > 0.0 && self.stepsize_decrease < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "stepsize_decrease must lie in (0, 1), got {}",
                self.stepsize_decrease
            )));
        }
        if !(self.stepsize_increase > 1.0 && self.stepsize_increase.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "stepsize_increase must exceed 1, got {}",
                self.stepsize_increase
            )));
        }
        Ok(())
    }
}

/// Summary of a completed fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    /// Objective after initialization, before the first iteration.
    pub initial_objective: f64,
    /// Objective after each outer iteration.
    pub objective_trace: Vec<f64>,
    pub iterations_run: usize,
    /// Sparseness of each column of `W` (NaN where undefined).
    pub final_basis_sparseness: Vec<f64>,
    /// Sparseness of each row of `H` (NaN where undefined).
    pub final_coeff_sparseness: Vec<f64>,
    /// `(mu_W, mu_H)` at the end of each outer iteration.
    pub stepsize_trace: Vec<(f64, f64)>,
    pub converged: bool,
}

impl FitReport {
    pub fn final_objective(&self) -> f64 {
        self.objective_trace
            .last()
            .copied()
            .unwrap_or(self.initial_objective)
    }
}

/// Computes `W H`.
pub fn reconstruct(model: &FactorModel) -> Array2<f64> {
    model.basis.dot(&model.coefficients)
}

/// Squared Frobenius distance `sum_ij (V_ij - (WH)_ij)^2`.
pub fn objective(data: &DataMatrix, model: &FactorModel) -> Result<f64> {
    let expected = (data.rows(), data.cols());
    let found = (model.basis.nrows(), model.coefficients.ncols());
    if expected != found {
        return Err(Error::DimensionMismatch {
            context: "objective",
            expected: format!("{}x{} reconstruction", expected.0, expected.1),
            found: format!("{}x{}", found.0, found.1),
        });
    }
    Ok(squared_error(
        data.view(),
        model.basis.view(),
        model.coefficients.view(),
    ))
}

pub(crate) fn squared_error(
    v: ArrayView2<'_, f64>,
    w: ArrayView2<'_, f64>,
    h: ArrayView2<'_, f64>,
) -> f64 {
    let wh = w.dot(&h);
    v.iter()
        .zip(wh.iter())
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum()
}

fn check_nonnegative(values: ArrayView2<'_, f64>) -> Result<()> {
    for ((row, column), &value) in values.indexed_iter() {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(Error::NegativeEntry {
                row: row + 1,
                column: column + 1,
                value,
            });
        }
    }
    Ok(())
}
