//! Per-hour regression models on transformed data: ARX features estimated by
//! least squares and LEAR features estimated by LASSO with AIC-selected
//! regularization.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::timeseries::{weekday_dummies, DayRow, HOURS};

pub const ARX_COLUMNS: usize = 15;
pub const LEAR_COLUMNS: usize = 247;
/// Longest lag used by either model, in days.
pub const MAX_LAG: usize = 7;

/// Transformed series visible to a model for one target day. Indices are
/// relative to the calibration window; the target day is `y.len()`.
#[derive(Debug, Clone, Copy)]
pub struct ModelData<'a> {
    /// Transformed price (or price component) for the calibration days.
    pub y: &'a [DayRow],
    /// Transformed load forecast for the calibration days and the target day.
    pub x1: &'a [DayRow],
    /// Transformed RES forecast for the calibration days and the target day.
    pub x2: &'a [DayRow],
    /// ISO weekday of each calibration day and the target day.
    pub weekdays: &'a [u8],
}

impl ModelData<'_> {
    pub fn target_day(&self) -> usize {
        self.y.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.y.len() + 1;
        if self.x1.len() != n || self.x2.len() != n || self.weekdays.len() != n {
            return Err(Error::Shape(format!(
                "exogenous series and weekdays must cover {n} days (window + target)"
            )));
        }
        if self.y.len() <= MAX_LAG {
            return Err(Error::InsufficientData {
                needed: MAX_LAG + 1,
                got: self.y.len(),
            });
        }
        Ok(())
    }

    fn check_day(&self, d: usize) -> Result<()> {
        if d < MAX_LAG || d > self.target_day() {
            return Err(Error::Shape(format!(
                "day {d} outside the usable range {MAX_LAG}..={}",
                self.target_day()
            )));
        }
        Ok(())
    }
}

/// ARX regressors for day `d`, hour `h` (0-based):
/// `[y(d-1,h), y(d-2,h), y(d-7,h), y(d-1,last), min y(d-1), max y(d-1),
///   X1(d,h), X2(d,h), D1..D7]`.
pub fn build_arx_row(data: &ModelData<'_>, d: usize, h: usize) -> Result<[f64; ARX_COLUMNS]> {
    data.check_day(d)?;
    let prev = &data.y[d - 1];
    let min = prev.iter().copied().fold(f64::INFINITY, f64::min);
    let max = prev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut row = [0.0; ARX_COLUMNS];
    row[..8].copy_from_slice(&[
        prev[h],
        data.y[d - 2][h],
        data.y[d - 7][h],
        prev[HOURS - 1],
        min,
        max,
        data.x1[d][h],
        data.x2[d][h],
    ]);
    row[8..].copy_from_slice(&weekday_dummies(data.weekdays[d]));
    Ok(row)
}

/// LEAR regressors for day `d`. They carry no hour index: the hour only
/// selects which of the 24 models is fitted.
pub fn build_lear_row(data: &ModelData<'_>, d: usize) -> Result<Vec<f64>> {
    data.check_day(d)?;
    let mut row = Vec::with_capacity(LEAR_COLUMNS);
    for lag in [1, 2, 3, 7] {
        row.extend_from_slice(&data.y[d - lag]);
    }
    for x in [data.x1, data.x2] {
        for lag in [0, 1, 7] {
            row.extend_from_slice(&x[d - lag]);
        }
    }
    row.extend_from_slice(&weekday_dummies(data.weekdays[d]));
    debug_assert_eq!(row.len(), LEAR_COLUMNS);
    Ok(row)
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_row_major(nrows: usize, ncols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != nrows * ncols {
            return Err(Error::Shape(format!(
                "{} values cannot form a {nrows}x{ncols} matrix",
                data.len()
            )));
        }
        Ok(Self { nrows, ncols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * ncols);
        for r in rows {
            if r.as_ref().len() != ncols {
                return Err(Error::Shape("ragged rows".into()));
            }
            data.extend_from_slice(r.as_ref());
        }
        Self::from_row_major(rows.len(), ncols, data)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.ncols + j]
    }

    fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.nrows, self.ncols, &self.data)
    }
}

/// Regressors and target of one regression.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub x: Matrix,
    pub target: Vec<f64>,
}

impl DesignMatrix {
    pub fn new(x: Matrix, target: Vec<f64>) -> Result<Self> {
        if target.len() != x.nrows() {
            return Err(Error::Shape(format!(
                "target has {} rows, matrix {}",
                target.len(),
                x.nrows()
            )));
        }
        Ok(Self { x, target })
    }
}

/// Training design for the ARX model of hour `h` (rows: days 7..target)
/// and the regressor row of the target day.
pub fn arx_design(data: &ModelData<'_>, h: usize) -> Result<(DesignMatrix, [f64; ARX_COLUMNS])> {
    data.validate()?;
    let t = data.target_day();
    let mut rows = Vec::with_capacity((t - MAX_LAG) * ARX_COLUMNS);
    let mut target = Vec::with_capacity(t - MAX_LAG);
    for d in MAX_LAG..t {
        rows.extend_from_slice(&build_arx_row(data, d, h)?);
        target.push(data.y[d][h]);
    }
    let x = Matrix::from_row_major(t - MAX_LAG, ARX_COLUMNS, rows)?;
    Ok((DesignMatrix::new(x, target)?, build_arx_row(data, t, h)?))
}

/// LEAR training regressors shared by all 24 hourly models, the 24 targets
/// and the regressor row of the target day.
pub fn lear_design(data: &ModelData<'_>) -> Result<(Matrix, Vec<Vec<f64>>, Vec<f64>)> {
    data.validate()?;
    let t = data.target_day();
    let mut rows = Vec::with_capacity((t - MAX_LAG) * LEAR_COLUMNS);
    let mut targets = vec![Vec::with_capacity(t - MAX_LAG); HOURS];
    for d in MAX_LAG..t {
        rows.extend_from_slice(&build_lear_row(data, d)?);
        for (h, tg) in targets.iter_mut().enumerate() {
            tg.push(data.y[d][h]);
        }
    }
    let x = Matrix::from_row_major(t - MAX_LAG, LEAR_COLUMNS, rows)?;
    Ok((x, targets, build_lear_row(data, t)?))
}

/// Linear model in original units.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    /// Regularization weight; 0 for least squares.
    pub lambda: f64,
}

impl FittedModel {
    pub fn predict(&self, row: &[f64]) -> f64 {
        self.intercept + dot(&self.coefficients, row)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in ca.by_ref().zip(cb.by_ref()) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Minimum-norm least squares without intercept. Exactly collinear columns
/// get a finite solution through the truncated SVD pseudo-inverse.
pub fn ols_fit(design: &DesignMatrix) -> Result<FittedModel> {
    let (n, p) = (design.x.nrows(), design.x.ncols());
    if n < p {
        return Err(Error::InsufficientData { needed: p, got: n });
    }
    let svd = design.x.to_nalgebra().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = smax * n.max(p) as f64 * f64::EPSILON;
    let beta = svd
        .solve(&DVector::from_column_slice(&design.target), eps)
        .map_err(|e| Error::LeastSquares(e.to_string()))?;
    Ok(FittedModel {
        coefficients: beta.iter().copied().collect(),
        intercept: 0.0,
        lambda: 0.0,
    })
}

/// Per-column centering and scaling (population standard deviation).
/// Constant columns keep scale 1 and become all-zero after centering.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    pub constant: Vec<bool>,
}

impl Standardization {
    pub fn fit(x: &Matrix) -> Self {
        let (n, p) = (x.nrows(), x.ncols());
        let mut means = vec![0.0; p];
        for i in 0..n {
            for (m, v) in means.iter_mut().zip(x.row(i)) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n as f64);
        let mut var = vec![0.0; p];
        for i in 0..n {
            for ((s, v), m) in var.iter_mut().zip(x.row(i)).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        let constant: Vec<bool> = var
            .iter()
            .zip(&means)
            .map(|(s, m)| (s / n as f64).sqrt() <= 1e-12 * m.abs().max(1.0))
            .collect();
        let scales = var
            .iter()
            .zip(&constant)
            .map(|(s, &c)| if c { 1.0 } else { (s / n as f64).sqrt() })
            .collect();
        Self { means, scales, constant }
    }

    pub fn apply(&self, x: &Matrix) -> Matrix {
        let mut data = Vec::with_capacity(x.nrows() * x.ncols());
        for i in 0..x.nrows() {
            for (j, v) in x.row(i).iter().enumerate() {
                // Constant columns are exactly zero, not rounding noise.
                data.push(if self.constant[j] { 0.0 } else { (v - self.means[j]) / self.scales[j] });
            }
        }
        Matrix {
            nrows: x.nrows(),
            ncols: x.ncols(),
            data,
        }
    }

    /// Maps standardized coefficients and target mean to original units.
    pub fn destandardize(&self, beta: &[f64], target_mean: f64, lambda: f64) -> FittedModel {
        let coefficients: Vec<f64> = beta.iter().zip(&self.scales).map(|(b, s)| b / s).collect();
        let intercept = target_mean - dot(&coefficients, &self.means);
        FittedModel {
            coefficients,
            intercept,
            lambda,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LassoOptions {
    /// Converged when no coefficient moves more than this in a sweep.
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for LassoOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_sweeps: 10_000,
        }
    }
}

/// LASSO on a fixed standardized regressor matrix, reusable across targets.
/// Works on the Gram matrix `X'X / n`, so each coordinate update costs
/// O(p) regardless of the number of rows.
#[derive(Debug, Clone)]
pub struct LassoProblem {
    n: usize,
    p: usize,
    standardization: Standardization,
    xs: DMatrix<f64>,
    gram: Vec<f64>,
}

/// Per-target quantities of a LASSO problem.
struct Target {
    mean: f64,
    /// `X'y / n` with centered `y`.
    corr: Vec<f64>,
    /// `y'y / n` with centered `y`.
    ss: f64,
}

impl LassoProblem {
    pub fn new(x: &Matrix) -> Result<Self> {
        let standardization = Standardization::fit(x);
        let xs = standardization.apply(x);
        Self::from_standardized(&xs, standardization)
    }

    fn from_standardized(xs: &Matrix, standardization: Standardization) -> Result<Self> {
        let (n, p) = (xs.nrows(), xs.ncols());
        if n == 0 || p == 0 {
            return Err(Error::Empty("design matrix"));
        }
        let xs = xs.to_nalgebra();
        let g = xs.tr_mul(&xs) / n as f64;
        // Column-major and symmetric: column j is contiguous.
        let gram = g.as_slice().to_vec();
        Ok(Self {
            n,
            p,
            standardization,
            xs,
            gram,
        })
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn ncols(&self) -> usize {
        self.p
    }

    pub fn standardization(&self) -> &Standardization {
        &self.standardization
    }

    fn target(&self, y: &[f64]) -> Result<Target> {
        if y.len() != self.n {
            return Err(Error::Shape(format!("target has {} rows, matrix {}", y.len(), self.n)));
        }
        let mean = y.iter().sum::<f64>() / self.n as f64;
        let yc = DVector::from_iterator(self.n, y.iter().map(|v| v - mean));
        let corr = (self.xs.tr_mul(&yc) / self.n as f64).iter().copied().collect();
        let ss = yc.norm_squared() / self.n as f64;
        Ok(Target { mean, corr, ss })
    }

    /// Smallest lambda with an all-zero solution: `max_j |X_j'y| / n`.
    pub fn lambda_max(&self, y: &[f64]) -> Result<f64> {
        Ok(self.target(y)?.corr.iter().fold(0.0, |m, c| m.max(c.abs())))
    }

    /// Fits at a fixed `lambda`, returning the model in original units.
    pub fn fit(&self, y: &[f64], lambda: f64, opts: &LassoOptions) -> Result<FittedModel> {
        if !(lambda >= 0.0) {
            return Err(Error::Config(format!("lambda must be >= 0, got {lambda}")));
        }
        let t = self.target(y)?;
        let mut beta = vec![0.0; self.p];
        let mut resid = t.corr.clone();
        self.descend(lambda, &t.corr, &mut FaceFactor::default(), &mut beta, &mut resid, opts)?;
        Ok(self.standardization.destandardize(&beta, t.mean, lambda))
    }

    /// Cyclic coordinate descent with active-set iterations. `resid` holds
    /// `X'y/n - G beta` and is kept consistent with `beta`. Each time a sweep
    /// lands on a new sign pattern the exact minimizer on that face is tried;
    /// the next full sweep checks it.
    fn descend(
        &self,
        lambda: f64,
        corr: &[f64],
        face: &mut FaceFactor,
        beta: &mut [f64],
        resid: &mut [f64],
        opts: &LassoOptions,
    ) -> Result<usize> {
        let p = self.p;
        let mut sweeps = 0;
        let mut full = true;
        let mut last_change = f64::INFINITY;
        let mut tried: Vec<i8> = Vec::new();
        if beta.iter().any(|b| *b != 0.0) {
            // Warm start: re-solve the previous face at the new lambda.
            let signs: Vec<i8> = beta.iter().map(|b| sign(*b)).collect();
            self.solve_on_support(lambda, corr, &signs, face, beta, resid);
            tried = signs;
        }
        while sweeps < opts.max_sweeps {
            sweeps += 1;
            let mut max_change: f64 = 0.0;
            for j in 0..p {
                if !full && beta[j] == 0.0 {
                    continue;
                }
                let gjj = self.gram[j * p + j];
                if gjj <= 0.0 {
                    continue;
                }
                let rho = resid[j] + gjj * beta[j];
                let new = soft_threshold(rho, lambda) / gjj;
                let delta = new - beta[j];
                if delta != 0.0 {
                    beta[j] = new;
                    let col = &self.gram[j * p..(j + 1) * p];
                    for (r, g) in resid.iter_mut().zip(col) {
                        *r -= g * delta;
                    }
                    max_change = max_change.max(delta.abs());
                }
            }
            last_change = max_change;
            if max_change < opts.tolerance {
                if full {
                    return Ok(sweeps);
                }
                full = true;
                continue;
            }
            full = false;
            let signs: Vec<i8> = beta.iter().map(|b| sign(*b)).collect();
            if signs != tried {
                tried = signs.clone();
                if self.solve_on_support(lambda, corr, &signs, face, beta, resid) {
                    full = true;
                }
            }
        }
        Err(Error::NotConverged {
            sweeps,
            lambda,
            max_change: last_change,
        })
    }

    /// Moves toward the minimizer of the objective on the face with the
    /// given signs, stopping where the first coefficient reaches zero. Returns
    /// true when the minimizer itself was reached.
    fn solve_on_support(
        &self,
        lambda: f64,
        corr: &[f64],
        signs: &[i8],
        face: &mut FaceFactor,
        beta: &mut [f64],
        resid: &mut [f64],
    ) -> bool {
        let p = self.p;
        let active: Vec<usize> = (0..p).filter(|&j| signs[j] != 0).collect();
        if active.is_empty() || !face.track(&active, &self.gram, p) {
            return false;
        }
        let rhs: Vec<f64> = face
            .order
            .iter()
            .map(|&j| corr[j] - lambda * f64::from(signs[j]))
            .collect();
        let sol = face.solve(rhs);
        if sol.iter().any(|v| !v.is_finite()) {
            face.reset();
            return false;
        }
        // Largest step along beta -> sol that keeps every sign.
        let mut step = 1.0;
        let mut blocking = None;
        for (a, &j) in face.order.iter().enumerate() {
            if sol[a] * f64::from(signs[j]) <= 0.0 {
                let t = beta[j] / (beta[j] - sol[a]);
                if t < step {
                    step = t;
                    blocking = Some(j);
                }
            }
        }
        for (a, &j) in face.order.iter().enumerate() {
            beta[j] += step * (sol[a] - beta[j]);
        }
        if let Some(j) = blocking {
            beta[j] = 0.0;
        }
        resid.copy_from_slice(corr);
        for &j in &active {
            let col = &self.gram[j * p..(j + 1) * p];
            for (r, g) in resid.iter_mut().zip(col) {
                *r -= g * beta[j];
            }
        }
        blocking.is_none()
    }

    /// Residual sum of squares over `n` in standardized units.
    fn rss_over_n(&self, t: &Target, beta: &[f64]) -> f64 {
        let p = self.p;
        let active: Vec<usize> = (0..p).filter(|&j| beta[j] != 0.0).collect();
        let mut quad = 0.0;
        for &j in &active {
            let col = &self.gram[j * p..(j + 1) * p];
            quad += beta[j] * active.iter().map(|&k| col[k] * beta[k]).sum::<f64>();
        }
        let lin: f64 = active.iter().map(|&j| beta[j] * t.corr[j]).sum();
        (t.ss - 2.0 * lin + quad).max(t.ss * f64::EPSILON)
    }

    /// Selects lambda on a 100-point geometric grid from `lambda_max` down
    /// to `1e-4 * lambda_max` by AIC, with warm starts along the path. The
    /// path ends early once the support reaches `n - 1` columns.
    pub fn select_lambda(&self, y: &[f64], opts: &LassoOptions) -> Result<LambdaSelection> {
        let t = self.target(y)?;
        let lmax = t.corr.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let n = self.n as f64;
        if lmax == 0.0 || t.ss == 0.0 {
            return Ok(LambdaSelection {
                lambda: lmax,
                aic: f64::NEG_INFINITY,
                nonzero: 0,
                model: self.standardization.destandardize(&vec![0.0; self.p], t.mean, lmax),
            });
        }
        let mut beta = vec![0.0; self.p];
        let mut resid = t.corr.clone();
        let mut best: Option<(f64, f64, Vec<f64>)> = None;
        let mut face = FaceFactor::default();
        for lambda in lambda_grid(lmax) {
            self.descend(lambda, &t.corr, &mut face, &mut beta, &mut resid, opts)?;
            let k = beta.iter().filter(|b| **b != 0.0).count();
            let aic = n * self.rss_over_n(&t, &beta).ln() + 2.0 * k as f64;
            if best.as_ref().is_none_or(|b| aic < b.1) {
                best = Some((lambda, aic, beta.clone()));
            }
            // A saturated fit interpolates the data; AIC is meaningless
            // beyond it and the solution stops being unique.
            if k + 1 >= self.n {
                break;
            }
        }
        let (lambda, aic, beta) = best.expect("non-empty grid");
        Ok(LambdaSelection {
            lambda,
            aic,
            nonzero: beta.iter().filter(|b| **b != 0.0).count(),
            model: self.standardization.destandardize(&beta, t.mean, lambda),
        })
    }
}


/// Cholesky factor of the Gram submatrix on a set of columns, updated in
/// O(k^2) as columns enter and leave.
#[derive(Debug, Default)]
struct FaceFactor {
    order: Vec<usize>,
    /// Row `i` holds `L[i][0..=i]`.
    rows: Vec<Vec<f64>>,
    updates: usize,
}

impl FaceFactor {
    const REFRESH: usize = 512;

    fn reset(&mut self) {
        self.order.clear();
        self.rows.clear();
        self.updates = 0;
    }

    /// Brings the factor to the column set `active`. False when the
    /// submatrix is numerically singular.
    fn track(&mut self, active: &[usize], gram: &[f64], p: usize) -> bool {
        if self.updates > Self::REFRESH {
            self.reset();
        }
        let fresh = self.order.is_empty();
        let mut i = 0;
        while i < self.order.len() {
            if active.binary_search(&self.order[i]).is_err() {
                self.remove(i);
                self.updates += 1;
            } else {
                i += 1;
            }
        }
        let mut present = vec![false; p];
        for &j in &self.order {
            present[j] = true;
        }
        for &j in active {
            if !present[j] {
                if !self.append(j, gram, p) {
                    self.reset();
                    return false;
                }
                if !fresh {
                    self.updates += 1;
                }
            }
        }
        true
    }

    fn append(&mut self, j: usize, gram: &[f64], p: usize) -> bool {
        let col = &gram[j * p..(j + 1) * p];
        let k = self.order.len();
        let mut l = Vec::with_capacity(k + 1);
        for i in 0..k {
            let row = &self.rows[i];
            l.push((col[self.order[i]] - dot(&row[..i], &l)) / row[i]);
        }
        let d2 = col[j] - dot(&l, &l);
        if !(d2 > 1e-10 * col[j]) {
            return false;
        }
        l.push(d2.sqrt());
        self.rows.push(l);
        self.order.push(j);
        true
    }

    /// Drops position `idx`: delete its row and column, then fold the
    /// removed column back in as a rank-one update of the trailing block.
    fn remove(&mut self, idx: usize) {
        self.rows.remove(idx);
        self.order.remove(idx);
        let k = self.order.len();
        let mut x: Vec<f64> = (idx..k).map(|r| self.rows[r].remove(idx)).collect();
        for c in idx..k {
            let lcc = self.rows[c][c];
            let xc = x[c - idx];
            let r = lcc.hypot(xc);
            let (cos, sin) = (r / lcc, xc / lcc);
            self.rows[c][c] = r;
            for i in c + 1..k {
                let lic = (self.rows[i][c] + sin * x[i - idx]) / cos;
                x[i - idx] = cos * x[i - idx] - sin * lic;
                self.rows[i][c] = lic;
            }
        }
    }

    /// Solves `L L' z = b` in place.
    fn solve(&self, mut b: Vec<f64>) -> Vec<f64> {
        let k = b.len();
        for i in 0..k {
            let row = &self.rows[i];
            b[i] = (b[i] - dot(&row[..i], &b[..i])) / row[i];
        }
        for i in (0..k).rev() {
            let row = &self.rows[i];
            b[i] /= row[i];
            let xi = b[i];
            for (v, l) in b[..i].iter_mut().zip(&row[..i]) {
                *v -= l * xi;
            }
        }
        b
    }
}

pub const LAMBDA_GRID_POINTS: usize = 100;
pub const LAMBDA_GRID_RATIO: f64 = 1e-4;

/// Geometric grid from `lambda_max` down to `1e-4 * lambda_max`.
pub fn lambda_grid(lambda_max: f64) -> Vec<f64> {
    let step = LAMBDA_GRID_RATIO.powf(1.0 / (LAMBDA_GRID_POINTS - 1) as f64);
    (0..LAMBDA_GRID_POINTS).map(|i| lambda_max * step.powi(i as i32)).collect()
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

fn soft_threshold(x: f64, lambda: f64) -> f64 {
    if x > lambda {
        x - lambda
    } else if x < -lambda {
        x + lambda
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSelection {
    pub lambda: f64,
    pub aic: f64,
    pub nonzero: usize,
    pub model: FittedModel,
}

/// LASSO on an already standardized design: columns must have mean 0 and
/// unit (population) variance or be identically zero, and the target must be
/// centered. Minimizes `(1/2n)|y - X b|^2 + lambda |b|_1` with no intercept.
pub fn lasso_standardized(design: &DesignMatrix, lambda: f64, opts: &LassoOptions) -> Result<Vec<f64>> {
    let x = &design.x;
    let (n, p) = (x.nrows(), x.ncols());
    if n == 0 {
        return Err(Error::Empty("design matrix"));
    }
    let stats = Standardization::fit(x);
    for j in 0..p {
        let ms = (0..n).map(|i| x.get(i, j).powi(2)).sum::<f64>() / n as f64;
        if stats.means[j].abs() > 1e-8 || !((ms - 1.0).abs() < 1e-8 || ms == 0.0) {
            return Err(Error::NotStandardized { column: j });
        }
    }
    let ymean = design.target.iter().sum::<f64>() / n as f64;
    let yscale = design.target.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if ymean.abs() > 1e-8 * yscale.max(1.0) {
        return Err(Error::Config(format!("target is not centered (mean {ymean:e})")));
    }
    let identity = Standardization {
        means: vec![0.0; p],
        scales: vec![1.0; p],
        constant: vec![false; p],
    };
    let problem = LassoProblem::from_standardized(x, identity)?;
    let t = problem.target(&design.target)?;
    let mut beta = vec![0.0; p];
    let mut resid = t.corr.clone();
    problem.descend(lambda, &t.corr, &mut FaceFactor::default(), &mut beta, &mut resid, opts)?;
    Ok(beta)
}

/// Standardizes, fits at `lambda` and returns the model in original units.
pub fn lasso_fit(design: &DesignMatrix, lambda: f64) -> Result<FittedModel> {
    LassoProblem::new(&design.x)?.fit(&design.target, lambda, &LassoOptions::default())
}

/// AIC-selected LASSO fit for a single target.
pub fn select_lambda(design: &DesignMatrix) -> Result<LambdaSelection> {
    LassoProblem::new(&design.x)?.select_lambda(&design.target, &LassoOptions::default())
}
