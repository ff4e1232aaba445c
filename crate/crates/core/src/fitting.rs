//! Least-squares extraction of drive parameters from decaying Rabi data.
//!
//! The model is the rotating-frame upper-level population `ρ₁₁(t)` (times an
//! optional scale), either for a ground-state start ([`FitModel::GroundStart`])
//! or for a general normalized initial state parametrized by `ρ₁₁(0)` and the
//! relative phase ([`FitModel::General`]). The mean decay rate Γ and the lower
//! level rate Γ₀ are held fixed by default.
//!
//! The optimizer is a bounded Levenberg–Marquardt iteration with Moré-style
//! diagonal scaling and central-difference Jacobians, restarted from a grid of
//! seeds built around the oscillation period seen in the data.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::params::QubitParams;
use crate::propagators::{rwa_populations, upper_population_special, PropagationError};
use crate::scalar::Real;
use crate::state::QubitState;
use crate::units::{to_canonical, Dimension, Unit};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FitParam {
    /// Ω₀, rad/ns
    Rabi0,
    /// Δ, rad/ns
    Detuning,
    /// Γ = (Γ₀ + Γ₁)/2, ns⁻¹
    Gamma,
    /// Γ₀, ns⁻¹
    Gamma0,
    /// Multiplier on the model population.
    Scale,
    /// ρ₁₁(0) of the initial state.
    Rho11Initial,
    /// Phase of C₁(0) relative to C₀(0), rad.
    RelPhase,
}

impl FitParam {
    pub const ALL: [FitParam; 7] = [
        FitParam::Rabi0,
        FitParam::Detuning,
        FitParam::Gamma,
        FitParam::Gamma0,
        FitParam::Scale,
        FitParam::Rho11Initial,
        FitParam::RelPhase,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FitParam::Rabi0 => "rabi0",
            FitParam::Detuning => "detuning",
            FitParam::Gamma => "gamma",
            FitParam::Gamma0 => "gamma0",
            FitParam::Scale => "scale",
            FitParam::Rho11Initial => "rho11_0",
            FitParam::RelPhase => "rel_phase",
        }
    }

    /// Canonical unit of the parameter, if it carries one.
    pub fn unit(self) -> Option<Unit> {
        match self {
            FitParam::Rabi0 | FitParam::Detuning => Some(Unit::RadPerNs),
            FitParam::Gamma | FitParam::Gamma0 => Some(Unit::PerNs),
            FitParam::RelPhase => Some(Unit::Rad),
            FitParam::Scale | FitParam::Rho11Initial => None,
        }
    }
}

impl fmt::Display for FitParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FitParam {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FitParam::ALL
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| format!("unknown fit parameter `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FitModel {
    /// Start in |0⟩: `ρ₁₁ = e^{−Γt} (Ω₀²/|Ω|²) |sin(Ωt/2)|²`.
    GroundStart,
    /// Start in `sqrt(ρ₁₁(0)) e^{iϕ}|1⟩ + sqrt(1 − ρ₁₁(0))|0⟩`.
    General,
}

impl FitModel {
    pub fn name(self) -> &'static str {
        match self {
            FitModel::GroundStart => "ground-start",
            FitModel::General => "general",
        }
    }

    pub fn params(self) -> &'static [FitParam] {
        match self {
            FitModel::GroundStart => &FitParam::ALL[..5],
            FitModel::General => &FitParam::ALL,
        }
    }
}

impl FromStr for FitModel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "ground-start" => Ok(FitModel::GroundStart),
            "general" => Ok(FitModel::General),
            other => Err(format!("unknown fit model `{other}` (expected ground-start|general)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DataPoint<T> {
    /// ns
    pub t: T,
    pub p: T,
    pub weight: T,
}

impl<T: Real> DataPoint<T> {
    pub fn new(t: T, p: T) -> Self {
        Self { t, p, weight: T::one() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitOptions<T> {
    pub max_iterations: usize,
    /// Relative step size below which the iteration stops.
    pub xtol: T,
    /// Relative cost reduction below which the iteration stops.
    pub ftol: T,
    /// Cosine between residual and every Jacobian column below which the
    /// point is stationary.
    pub gtol: T,
    /// A parameter closer than `snap_tol · typical` to a bound is put on it.
    pub snap_tol: T,
    /// Reciprocal condition number of the column-normalized normal matrix
    /// below which the Jacobian is reported as degenerate.
    pub degenerate_rcond: T,
}

impl<T: Real> Default for FitOptions<T> {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            xtol: T::lit(1e-12),
            ftol: T::lit(1e-15),
            gtol: T::lit(1e-12),
            snap_tol: T::lit(1e-6),
            degenerate_rcond: T::lit(1e-12),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("invalid fit problem: {0}")]
    InvalidProblem(String),
    #[error("parameter {param} = {value} outside bounds [{lo}, {hi}]")]
    OutOfBounds { param: FitParam, value: f64, lo: f64, hi: f64 },
    #[error(transparent)]
    Propagation(#[from] PropagationError),
    #[error("no seed converged ({} tried)", .0.len())]
    NoConvergence(Vec<SeedDiagnostic>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeedDiagnostic {
    pub seed: Vec<f64>,
    pub converged: bool,
    pub residual_norm: Option<f64>,
    pub iterations: usize,
    pub message: Option<String>,
}

/// A weighted least-squares problem over a subset of [`FitParam`]s.
#[derive(Clone, Debug, PartialEq)]
pub struct FitProblem<T> {
    pub data: Vec<DataPoint<T>>,
    pub model: FitModel,
    pub fixed: BTreeMap<FitParam, T>,
    pub bounds: BTreeMap<FitParam, (T, T)>,
    /// Starting points; parameters missing from a seed are filled in from the
    /// data-driven estimate. Empty means "estimate from the data".
    pub seeds: Vec<BTreeMap<FitParam, T>>,
    pub options: FitOptions<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult<T> {
    /// Every model parameter, fitted or fixed.
    pub params: BTreeMap<FitParam, T>,
    /// Free parameters, in the order used by `covariance`.
    pub free: Vec<FitParam>,
    pub residual_norm: T,
    /// Gauss–Newton covariance `s² (JᵀJ)⁻¹`; `None` when degenerate or when
    /// there are no spare degrees of freedom.
    pub covariance: Option<Vec<Vec<T>>>,
    pub converged: bool,
    pub degenerate: bool,
    pub iterations: usize,
    pub seed_used: usize,
    pub diagnostics: Vec<SeedDiagnostic>,
}

impl<T: Real> FitResult<T> {
    pub fn get(&self, p: FitParam) -> T {
        self.params[&p]
    }
}

impl<T: Real> FitProblem<T> {
    /// Problem with Γ and Γ₀ fixed at the given values (ns⁻¹) and unit scale;
    /// Ω₀, Δ (and for [`FitModel::General`] the initial state) are free.
    pub fn new(data: Vec<DataPoint<T>>, model: FitModel, gamma: T, gamma0: T) -> Self {
        let mut fixed = BTreeMap::new();
        fixed.insert(FitParam::Gamma, gamma);
        fixed.insert(FitParam::Gamma0, gamma0);
        fixed.insert(FitParam::Scale, T::one());
        let inf = T::infinity();
        let mut bounds = BTreeMap::new();
        bounds.insert(FitParam::Rabi0, (T::zero(), inf));
        let detuning_lo = match model {
            // the ground-start population is even in Δ
            FitModel::GroundStart => T::zero(),
            FitModel::General => -inf,
        };
        bounds.insert(FitParam::Detuning, (detuning_lo, inf));
        bounds.insert(FitParam::Gamma, (T::zero(), inf));
        bounds.insert(FitParam::Gamma0, (T::zero(), inf));
        bounds.insert(FitParam::Scale, (T::zero(), inf));
        bounds.insert(FitParam::Rho11Initial, (T::zero(), T::one()));
        bounds.insert(FitParam::RelPhase, (-inf, inf));
        Self {
            data,
            model,
            fixed,
            bounds,
            seeds: Vec::new(),
            options: FitOptions::default(),
        }
    }

    pub fn fix(mut self, p: FitParam, value: T) -> Self {
        self.fixed.insert(p, value);
        self
    }

    pub fn free(mut self, p: FitParam) -> Self {
        self.fixed.remove(&p);
        self
    }

    pub fn with_bounds(mut self, p: FitParam, lo: T, hi: T) -> Self {
        self.bounds.insert(p, (lo, hi));
        self
    }

    pub fn with_seed(mut self, seed: BTreeMap<FitParam, T>) -> Self {
        self.seeds.push(seed);
        self
    }

    pub fn with_options(mut self, options: FitOptions<T>) -> Self {
        self.options = options;
        self
    }

    pub fn free_params(&self) -> Vec<FitParam> {
        self.model
            .params()
            .iter()
            .copied()
            .filter(|p| !self.fixed.contains_key(p))
            .collect()
    }

    fn bound(&self, p: FitParam) -> (T, T) {
        self.bounds
            .get(&p)
            .copied()
            .unwrap_or((T::neg_infinity(), T::infinity()))
    }

    pub fn validate(&self) -> Result<(), FitError> {
        let invalid = |m: String| Err(FitError::InvalidProblem(m));
        let free = self.free_params();
        if free.is_empty() {
            return invalid("no free parameters".into());
        }
        let min_points = match self.model {
            FitModel::GroundStart => 4.max(free.len() + 1),
            FitModel::General => free.len() + 1,
        };
        if self.data.len() < min_points {
            return invalid(format!("need at least {min_points} data points, got {}", self.data.len()));
        }
        if let Some(k) = self.data.windows(2).position(|w| !(w[1].t > w[0].t)) {
            return invalid(format!("data times must be strictly increasing (point {})", k + 1));
        }
        if let Some(k) = self
            .data
            .iter()
            .position(|d| !(d.weight >= T::zero() && d.weight.is_finite() && d.p.is_finite() && d.t.is_finite()))
        {
            return invalid(format!("data point {k} has a non-finite value or negative weight"));
        }
        let weighted = self.data.iter().filter(|d| d.weight > T::zero()).count();
        if weighted <= free.len() {
            return invalid(format!("only {weighted} points carry weight for {} free parameters", free.len()));
        }
        for p in self.model.params() {
            if !self.fixed.contains_key(p) && !free.contains(p) {
                return invalid(format!("parameter {p} neither fixed nor free"));
            }
            let (lo, hi) = self.bound(*p);
            if !(lo <= hi) {
                return invalid(format!("empty bounds for {p}"));
            }
        }
        Ok(())
    }

    fn assemble(&self, free: &[FitParam], x: &[T]) -> BTreeMap<FitParam, T> {
        let mut all = self.fixed.clone();
        for (p, v) in free.iter().zip(x) {
            all.insert(*p, *v);
        }
        all
    }

    fn model_curve(&self, all: &BTreeMap<FitParam, T>) -> Result<Vec<T>, FitError> {
        let get = |p: FitParam| all.get(&p).copied().unwrap_or_else(T::zero);
        let gamma = get(FitParam::Gamma);
        let gamma0 = get(FitParam::Gamma0);
        // populations depend on the levels only through Δ
        let params = QubitParams {
            omega0: T::zero(),
            omega1: get(FitParam::Detuning),
            gamma0,
            gamma1: T::lit(2.0) * gamma - gamma0,
            gamma01: T::zero(),
            rabi0: get(FitParam::Rabi0),
            drive_freq: T::zero(),
            drive_phase: T::zero(),
        };
        let scale = get(FitParam::Scale);
        match self.model {
            FitModel::GroundStart => self
                .data
                .iter()
                .map(|d| Ok(scale * upper_population_special(&params, d.t)?))
                .collect(),
            FitModel::General => {
                let u0 = QubitState::from_population(get(FitParam::Rho11Initial), get(FitParam::RelPhase));
                self.data
                    .iter()
                    .map(|d| Ok(scale * rwa_populations(&u0, &params, d.t)?.0))
                    .collect()
            }
        }
    }

    fn residuals_unchecked(&self, free: &[FitParam], x: &[T]) -> Result<Vec<T>, FitError> {
        let curve = self.model_curve(&self.assemble(free, x))?;
        Ok(curve
            .iter()
            .zip(&self.data)
            .map(|(m, d)| d.weight.sqrt() * (*m - d.p))
            .collect())
    }

    /// Weighted residuals `sqrt(w_i) (model(t_i) − p_i)` at the free-parameter
    /// vector `x` (ordered as [`FitProblem::free_params`]).
    pub fn residuals(&self, x: &[T]) -> Result<Vec<T>, FitError> {
        let free = self.free_params();
        if x.len() != free.len() {
            return Err(FitError::InvalidProblem(format!(
                "expected {} parameters, got {}",
                free.len(),
                x.len()
            )));
        }
        for (p, v) in free.iter().zip(x) {
            let (lo, hi) = self.bound(*p);
            if !(*v >= lo && *v <= hi) {
                return Err(FitError::OutOfBounds {
                    param: *p,
                    value: v.to_f64().unwrap_or(f64::NAN),
                    lo: lo.to_f64().unwrap_or(f64::NAN),
                    hi: hi.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        self.residuals_unchecked(&free, x)
    }

    /// Central-difference Jacobian of [`FitProblem::residuals`]; one-sided at
    /// active bounds. `step_scale` multiplies the default step.
    pub fn jacobian(&self, x: &[T], step_scale: T) -> Result<Vec<Vec<T>>, FitError> {
        let free = self.free_params();
        let typical: Vec<T> = x.iter().map(|v| v.abs()).collect();
        self.jacobian_with(&free, x, &typical, step_scale)
    }

    // column-major: jac[j][i] = d r_i / d x_j
    fn jacobian_with(&self, free: &[FitParam], x: &[T], typical: &[T], step_scale: T) -> Result<Vec<Vec<T>>, FitError> {
        let base_step = T::epsilon().cbrt() * step_scale;
        let mut jac = Vec::with_capacity(x.len());
        for (j, p) in free.iter().enumerate() {
            let (lo, hi) = self.bound(*p);
            let mag = x[j].abs().max(typical[j]).max(T::lit(1e-12));
            let h = base_step * mag;
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            let (up, down) = (x[j] + h <= hi, x[j] - h >= lo);
            let column = if up && down {
                xp[j] = x[j] + h;
                xm[j] = x[j] - h;
                let rp = self.residuals_unchecked(free, &xp)?;
                let rm = self.residuals_unchecked(free, &xm)?;
                rp.iter().zip(&rm).map(|(a, b)| (*a - *b) / (h + h)).collect()
            } else {
                // second-order one-sided difference
                let sign = if up { T::one() } else { -T::one() };
                let r0 = self.residuals_unchecked(free, x)?;
                xp[j] = x[j] + sign * h;
                xm[j] = x[j] + sign * (h + h);
                let r1 = self.residuals_unchecked(free, &xp)?;
                let r2 = self.residuals_unchecked(free, &xm)?;
                r0.iter()
                    .zip(&r1)
                    .zip(&r2)
                    .map(|((a, b), c)| sign * (T::lit(-3.0) * *a + T::lit(4.0) * *b - *c) / (h + h))
                    .collect()
            };
            jac.push(column);
        }
        Ok(jac)
    }

    fn project(&self, free: &[FitParam], x: &mut [T], typical: &[T]) {
        for (j, p) in free.iter().enumerate() {
            let (lo, hi) = self.bound(*p);
            let snap = self.options.snap_tol * typical[j];
            if x[j] <= lo + snap {
                x[j] = lo;
            } else if x[j] >= hi - snap {
                x[j] = hi;
            }
        }
    }

    /// Runs the multi-start fit and returns the best converged result.
    pub fn fit(&self) -> Result<FitResult<T>, FitError> {
        self.validate()?;
        let free = self.free_params();
        let seeds = self.seed_vectors(&free);
        let mut best: Option<(usize, LmOutcome<T>)> = None;
        let mut diagnostics = Vec::with_capacity(seeds.len());
        for (idx, seed) in seeds.iter().enumerate() {
            let seed_f64: Vec<f64> = seed.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect();
            match self.levenberg_marquardt(&free, seed) {
                Ok(out) => {
                    diagnostics.push(SeedDiagnostic {
                        seed: seed_f64,
                        converged: out.converged,
                        residual_norm: out.cost.sqrt().to_f64(),
                        iterations: out.iterations,
                        message: None,
                    });
                    if !out.converged {
                        continue;
                    }
                    let better = match &best {
                        None => true,
                        Some((_, b)) => out.cost < b.cost,
                    };
                    if better {
                        best = Some((idx, out));
                    }
                }
                Err(e) => diagnostics.push(SeedDiagnostic {
                    seed: seed_f64,
                    converged: false,
                    residual_norm: None,
                    iterations: 0,
                    message: Some(e.to_string()),
                }),
            }
        }
        let Some((seed_used, out)) = best else {
            return Err(FitError::NoConvergence(diagnostics));
        };
        let (covariance, degenerate) = self.covariance(&free, &out)?;
        Ok(FitResult {
            params: self.assemble(&free, &out.x),
            free,
            residual_norm: out.cost.sqrt(),
            covariance,
            converged: true,
            degenerate,
            iterations: out.iterations,
            seed_used,
            diagnostics,
        })
    }

    fn covariance(&self, free: &[FitParam], out: &LmOutcome<T>) -> Result<(Option<Vec<Vec<T>>>, bool), FitError> {
        let jac = self.jacobian_with(free, &out.x, &out.typical, T::one())?;
        let n = free.len();
        let norms: Vec<T> = jac.iter().map(|c| dot(c, c).sqrt()).collect();
        if norms.iter().any(|c| !(*c > T::zero())) {
            return Ok((None, true));
        }
        // correlation form of JᵀJ
        let mut corr = vec![vec![T::zero(); n]; n];
        for a in 0..n {
            for b in 0..n {
                corr[a][b] = dot(&jac[a], &jac[b]) / (norms[a] * norms[b]);
            }
        }
        let Some(inv) = invert(&corr) else {
            return Ok((None, true));
        };
        let inv_norm = inv.iter().flatten().fold(T::zero(), |m, v| m.max(v.abs()));
        let rcond = T::one() / (inv_norm * T::from_usize(n).unwrap());
        if rcond < self.options.degenerate_rcond {
            return Ok((None, true));
        }
        let dof = self.data.iter().filter(|d| d.weight > T::zero()).count() - n;
        if dof == 0 {
            return Ok((None, false));
        }
        let s2 = T::lit(2.0) * out.cost / T::from_usize(dof).unwrap();
        let cov = (0..n)
            .map(|a| (0..n).map(|b| s2 * inv[a][b] / (norms[a] * norms[b])).collect())
            .collect();
        Ok((Some(cov), false))
    }

    fn levenberg_marquardt(&self, free: &[FitParam], seed: &[T]) -> Result<LmOutcome<T>, FitError> {
        let opts = &self.options;
        let n = free.len();
        let typical: Vec<T> = seed
            .iter()
            .zip(free)
            .map(|(v, p)| {
                if v.abs() > T::zero() {
                    v.abs()
                } else if matches!(p, FitParam::RelPhase | FitParam::Rho11Initial | FitParam::Scale) {
                    T::one()
                } else {
                    T::lit(1e-6)
                }
            })
            .collect();
        let mut x = seed.to_vec();
        self.project(free, &mut x, &typical);
        let mut r = self.residuals_unchecked(free, &x)?;
        let mut cost = half_sq(&r);
        if !cost.is_finite() {
            return Err(FitError::InvalidProblem("model is not finite at the seed".into()));
        }
        let mut lambda = T::lit(1e-3);
        let mut diag_scale = vec![T::zero(); n];
        let mut iterations = 0;
        let mut converged = false;

        'outer: while iterations < opts.max_iterations {
            iterations += 1;
            if cost == T::zero() {
                converged = true;
                break;
            }
            let jac = self.jacobian_with(free, &x, &typical, T::one())?;
            let g: Vec<T> = jac.iter().map(|c| dot(c, &r)).collect();
            let mut a = vec![vec![T::zero(); n]; n];
            for i in 0..n {
                for j in 0..n {
                    a[i][j] = dot(&jac[i], &jac[j]);
                }
            }
            let r_norm = (cost + cost).sqrt();
            let stationary = (0..n).all(|j| {
                let col = a[j][j].sqrt();
                col == T::zero() || g[j].abs() <= opts.gtol * col * r_norm
            });
            if stationary {
                converged = true;
                break;
            }
            let a_max = (0..n).fold(T::zero(), |m, j| m.max(a[j][j]));
            for j in 0..n {
                diag_scale[j] = diag_scale[j].max(a[j][j]).max(a_max * T::epsilon());
            }
            loop {
                let mut lhs = a.clone();
                for j in 0..n {
                    lhs[j][j] += lambda * diag_scale[j];
                }
                let rhs: Vec<T> = g.iter().map(|v| -*v).collect();
                let step = solve(lhs, rhs);
                let mut x_new: Vec<T> = match &step {
                    Some(d) => x.iter().zip(d).map(|(a, b)| *a + *b).collect(),
                    None => x.clone(),
                };
                self.project(free, &mut x_new, &typical);
                let r_new = self.residuals_unchecked(free, &x_new).ok();
                let cost_new = r_new.as_ref().map(|r| half_sq(r)).unwrap_or_else(T::infinity);
                let rel_step = |tol: T| {
                    x.iter()
                        .zip(&x_new)
                        .zip(&typical)
                        .all(|((a, b), t)| (*b - *a).abs() <= tol * (a.abs() + tol * *t))
                };
                // a sub-sqrt(eps) step cannot change the cost beyond rounding
                let flat = rel_step(T::epsilon().sqrt()) && cost_new <= cost * (T::one() + T::lit(64.0) * T::epsilon());
                if step.is_some() && cost_new.is_finite() && (cost_new < cost || flat) {
                    let small_step = rel_step(opts.xtol);
                    let small_gain = (cost - cost_new) <= opts.ftol * cost;
                    x = x_new;
                    r = r_new.unwrap();
                    cost = cost_new;
                    lambda = (lambda / T::lit(3.0)).max(T::lit(1e-15));
                    if small_step || small_gain || cost == T::zero() {
                        converged = true;
                        break 'outer;
                    }
                    break;
                }
                lambda *= T::lit(4.0);
                if lambda > T::lit(1e20) {
                    // no descent direction left at working precision
                    converged = true;
                    break 'outer;
                }
            }
        }
        Ok(LmOutcome {
            x,
            cost,
            iterations,
            converged,
            typical,
        })
    }

    /// Seeds as free-parameter vectors: user seeds (completed from the data
    /// estimate) or, when none are given, a grid around the estimate.
    fn seed_vectors(&self, free: &[FitParam]) -> Vec<Vec<T>> {
        let grid = self.estimated_seeds();
        if self.seeds.is_empty() {
            return grid
                .iter()
                .map(|s| free.iter().map(|p| s[p]).collect())
                .collect();
        }
        let base = &grid[0];
        self.seeds
            .iter()
            .map(|s| free.iter().map(|p| s.get(p).copied().unwrap_or(base[p])).collect())
            .collect()
    }

    /// Data-driven seed grid. The first entry is the central estimate.
    pub fn estimated_seeds(&self) -> Vec<BTreeMap<FitParam, T>> {
        let span = self.data.last().map(|d| d.t).unwrap_or_else(T::one) - self.data[0].t;
        let span = if span > T::zero() { span } else { T::one() };
        let gamma = self.fixed.get(&FitParam::Gamma).copied().unwrap_or_else(|| T::one() / span);
        let gamma0 = self.fixed.get(&FitParam::Gamma0).copied().unwrap_or_else(T::zero);
        let scale = self.fixed.get(&FitParam::Scale).copied().unwrap_or_else(T::one);
        let scale = if scale > T::zero() { scale } else { T::one() };

        // undo the envelope
        let q: Vec<T> = self
            .data
            .iter()
            .map(|d| d.p * (gamma * (d.t - self.data[0].t)).exp() / scale)
            .collect();
        let smooth = moving_average(&q, (q.len() / 100).max(1));
        let times: Vec<T> = self.data.iter().map(|d| d.t).collect();
        let rabi_magnitudes: Vec<T> = match crossing_period(&times, &smooth) {
            Some(period) => {
                let w = T::TAU() / period;
                [0.8, 1.0, 1.25].iter().map(|f| w * T::lit(*f)).collect()
            }
            None => [1.0, 3.0, 10.0].iter().map(|k| T::TAU() * T::lit(*k) / span).collect(),
        };
        let mean_q = smooth.iter().fold(T::zero(), |a, b| a + *b) / T::from_usize(smooth.len()).unwrap();
        let amp = (T::lit(2.0) * mean_q).max(T::lit(1e-6)).min(T::lit(0.999));
        let amplitudes: Vec<T> = match self.model {
            FitModel::GroundStart => [0.5, 1.0, 2.0]
                .iter()
                .map(|f| (amp * T::lit(*f)).min(T::lit(0.999)))
                .collect(),
            FitModel::General => [0.1, 0.5, 0.9].iter().map(|f| T::lit(*f)).collect(),
        };
        let rho11_0 = q[0].max(T::zero()).min(T::one());
        let phases: Vec<T> = match self.model {
            FitModel::GroundStart => vec![T::zero()],
            FitModel::General => vec![T::zero(), T::FRAC_PI_2(), T::PI(), -T::FRAC_PI_2()],
        };

        let mut out = Vec::new();
        for &w in &rabi_magnitudes {
            for &s2 in &amplitudes {
                for &phi in &phases {
                    let mut seed = BTreeMap::new();
                    seed.insert(FitParam::Rabi0, s2.sqrt() * w);
                    seed.insert(FitParam::Detuning, (T::one() - s2).sqrt() * w);
                    seed.insert(FitParam::Gamma, gamma);
                    seed.insert(FitParam::Gamma0, gamma0);
                    seed.insert(FitParam::Scale, scale);
                    seed.insert(FitParam::Rho11Initial, rho11_0);
                    seed.insert(FitParam::RelPhase, phi);
                    out.push(seed);
                }
            }
        }
        // central estimate first
        let centre = out.len() / 2;
        out.swap(0, centre);
        out
    }
}

struct LmOutcome<T> {
    x: Vec<T>,
    cost: T,
    iterations: usize,
    converged: bool,
    typical: Vec<T>,
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + *x * *y)
}

fn half_sq<T: Real>(r: &[T]) -> T {
    dot(r, r) * T::lit(0.5)
}

/// Gaussian elimination with partial pivoting; `None` if singular.
fn solve<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if !(a[piv][col].abs() > T::zero()) || !a[piv][col].is_finite() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                let v = a[col][k];
                a[row][k] -= f * v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let s = (row + 1..n).fold(b[row], |acc, k| acc - a[row][k] * x[k]);
        x[row] = s / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn invert<T: Real>(a: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![T::zero(); n];
        e[j] = T::one();
        cols.push(solve(a.to_vec(), e)?);
    }
    Some((0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect())
}

fn moving_average<T: Real>(x: &[T], half_width: usize) -> Vec<T> {
    (0..x.len())
        .map(|i| {
            let lo = i.saturating_sub(half_width);
            let hi = (i + half_width + 1).min(x.len());
            x[lo..hi].iter().fold(T::zero(), |a, b| a + *b) / T::from_usize(hi - lo).unwrap()
        })
        .collect()
}

/// Oscillation period from the spacing of mean crossings, with hysteresis of
/// a quarter standard deviation against noise.
fn crossing_period<T: Real>(t: &[T], y: &[T]) -> Option<T> {
    let n = T::from_usize(y.len())?;
    let mean = y.iter().fold(T::zero(), |a, b| a + *b) / n;
    let var = y.iter().fold(T::zero(), |a, b| a + (*b - mean) * (*b - mean)) / n;
    let band = var.sqrt() * T::lit(0.25);
    if !(band > T::zero()) {
        return None;
    }
    let mut state = 0i8;
    let mut crossings = Vec::new();
    for (ti, yi) in t.iter().zip(y) {
        let s = if *yi > mean + band {
            1
        } else if *yi < mean - band {
            -1
        } else {
            0
        };
        if s != 0 {
            if state != 0 && s != state {
                crossings.push(*ti);
            }
            state = s;
        }
    }
    if crossings.len() < 2 {
        return None;
    }
    let k = T::from_usize(crossings.len() - 1)?;
    Some(T::lit(2.0) * (crossings[crossings.len() - 1] - crossings[0]) / k)
}

#[derive(Debug, Error, PartialEq)]
pub enum DataError {
    #[error("line {line}: expected header `t,p[,weight]`")]
    Header { line: usize },
    #[error("line {line}: {message}")]
    Row { line: usize, message: String },
    #[error("no data rows")]
    Empty,
}

/// Reads `t,p[,weight]` CSV. A comment line `# time_unit = us` declares the
/// time unit; `time_unit` (when given) overrides it. Times are returned in ns.
pub fn parse_fit_csv<T: Real>(text: &str, time_unit: Option<Unit>) -> Result<Vec<DataPoint<T>>, DataError> {
    let mut declared: Option<Unit> = None;
    let mut header_seen = false;
    let mut with_weight = false;
    let mut rows: Vec<(usize, f64, f64, f64)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some((k, v)) = comment.split_once('=') {
                if k.trim() == "time_unit" {
                    let unit: Unit = v.parse().map_err(|e: crate::units::UnitError| DataError::Row {
                        line,
                        message: e.to_string(),
                    })?;
                    if unit.dimension() != Dimension::Time {
                        return Err(DataError::Row {
                            line,
                            message: format!("time_unit must be a time unit, got {unit}"),
                        });
                    }
                    declared = Some(unit);
                }
            }
            continue;
        }
        if !header_seen {
            let cols: Vec<&str> = trimmed.split(',').map(str::trim).collect();
            match cols.as_slice() {
                ["t", "p"] => {}
                ["t", "p", "weight"] => with_weight = true,
                _ => return Err(DataError::Header { line }),
            }
            header_seen = true;
            continue;
        }
        let cols: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        let expected = if with_weight { 3 } else { 2 };
        if cols.len() != expected {
            return Err(DataError::Row {
                line,
                message: format!("expected {expected} fields, found {}", cols.len()),
            });
        }
        let num = |s: &str, what: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| DataError::Row {
                    line,
                    message: format!("invalid {what} `{s}`"),
                })
        };
        let t = num(cols[0], "time")?;
        let p = num(cols[1], "probability")?;
        let w = if with_weight { num(cols[2], "weight")? } else { 1.0 };
        if w < 0.0 {
            return Err(DataError::Row {
                line,
                message: "weight must be non-negative".into(),
            });
        }
        if let Some(&(_, prev, _, _)) = rows.last() {
            if !(t > prev) {
                return Err(DataError::Row {
                    line,
                    message: "times must be strictly increasing".into(),
                });
            }
        }
        rows.push((line, t, p, w));
    }
    if !header_seen {
        return Err(DataError::Header { line: 1 });
    }
    if rows.is_empty() {
        return Err(DataError::Empty);
    }
    let unit = time_unit.or(declared).unwrap_or(Unit::Ns);
    Ok(rows
        .into_iter()
        .map(|(_, t, p, w)| DataPoint {
            t: to_canonical(T::lit(t), unit),
            p: T::lit(p),
            weight: T::lit(w),
        })
        .collect())
}
