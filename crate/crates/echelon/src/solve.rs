//! LP solving and per-episode lower bounds.

use echelon_core::lp::{build_lp, BuildError, Cmp, DeterministicScenario, LpInstance, LpSolution, LpStatus};
use echelon_core::{EpisodeRealization, ScenarioSpec};
use microlp::{ComparisonOp, OptimizationDirection, Problem, SolveOutcome};
use rayon::prelude::*;

/// Primal feasibility tolerance accepted on returned solutions.
pub const FEASIBILITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("solver failure: {0}")]
    Numerical(String),
    #[error("solution violates constraints by {violation:e} (objective {objective})")]
    Tolerance { violation: f64, objective: f64 },
    #[error("LP is {0:?}")]
    NotOptimal(LpStatus),
}

/// Solves `inst` with a sparse revised simplex. Infeasible and unbounded
/// problems come back as solutions with that status.
pub fn solve_lp(inst: &LpInstance) -> Result<LpSolution, SolverError> {
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = (0..inst.num_vars()).map(|i| p.add_var(inst.cost[i], (inst.lower[i], inst.upper[i]))).collect();
    for row in &inst.rows {
        let op = match row.cmp {
            Cmp::Le => ComparisonOp::Le,
            Cmp::Eq => ComparisonOp::Eq,
            Cmp::Ge => ComparisonOp::Ge,
        };
        p.add_constraint(row.terms.iter().map(|&(v, a)| (vars[v], a)), op, row.rhs);
    }
    let empty = |status| LpSolution {
        status,
        objective: f64::NAN,
        values: Vec::new(),
        map: inst.map,
        arrival: inst.arrival.clone(),
    };
    let sol = match p.solve() {
        Ok(SolveOutcome::Solution(s)) => s,
        Ok(SolveOutcome::Interrupted(_)) => return Err(SolverError::Numerical("interrupted".into())),
        Err(microlp::Error::Infeasible) => return Ok(empty(LpStatus::Infeasible)),
        Err(microlp::Error::Unbounded) => return Ok(empty(LpStatus::Unbounded)),
        Err(e) => return Err(SolverError::Numerical(e.to_string())),
    };
    let values: Vec<f64> = vars.iter().map(|&v| sol.var_value(v)).collect();
    let objective = inst.objective_at(&values);
    let violation = inst.max_violation(&values);
    if violation > FEASIBILITY_TOL {
        return Err(SolverError::Tolerance { violation, objective });
    }
    Ok(LpSolution { status: LpStatus::Optimal, objective, values, map: inst.map, arrival: inst.arrival.clone() })
}

/// Builds and solves the forecast LP of a scenario.
pub fn solve_forecast(s: &ScenarioSpec) -> Result<LpSolution, SolverError> {
    let inst = build_lp(s, &DeterministicScenario::forecast(s))?;
    let sol = solve_lp(&inst)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol),
        st => Err(SolverError::NotOptimal(st)),
    }
}

/// Optimal cost of an episode in hindsight: no policy acting on the same
/// realization can do better.
pub fn perfect_information_bound(s: &ScenarioSpec, r: &EpisodeRealization) -> Result<f64, SolverError> {
    let inst = build_lp(s, &DeterministicScenario::realized(r))?;
    let sol = solve_lp(&inst)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.objective),
        st => Err(SolverError::NotOptimal(st)),
    }
}

/// Bounds for many episodes, solved in parallel.
pub fn perfect_information_bounds(s: &ScenarioSpec, seeds: &[u64]) -> Result<Vec<f64>, SolverError> {
    seeds
        .par_iter()
        .map(|&seed| perfect_information_bound(s, &EpisodeRealization::generate(s, seed)))
        .collect()
}
