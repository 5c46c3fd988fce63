use thiserror::Error;

use crate::game23::TatonnementTrace;
use crate::market_model::{EquilibriumResult, ModelError};
use crate::numerics::NumericsError;

/// Failure of an equilibrium solve.
#[derive(Debug, Clone, Error)]
pub enum SolveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("provider {provider}: equilibrium price {price} lies outside [{min}, {max}]")]
    BoundInfeasible {
        provider: usize,
        price: f64,
        min: f64,
        max: f64,
    },
    #[error("provider {provider}: equilibrium demand {demand} is negative")]
    DemandInfeasible { provider: usize, demand: f64 },
    #[error("provider {provider}: externality degree {delta} outside [0.5, 1)")]
    ExternalityOutOfRange { provider: usize, delta: f64 },
    #[error("tatonnement did not converge in {} iterations (last step {:e})", .trace.iterations, .trace.last_step())]
    NonConvergence { trace: Box<TatonnementTrace> },
    #[error("equilibrium multiplicity unknown: {reason}")]
    UnknownMultiplicity {
        reason: Box<SolveError>,
        from_min: Option<Box<TatonnementTrace>>,
        from_max: Option<Box<TatonnementTrace>>,
    },
    #[error("the two tatonnement limits are not ordered componentwise; no largest equilibrium exists")]
    IncomparableEquilibria {
        from_min: Box<EquilibriumResult>,
        from_max: Box<EquilibriumResult>,
    },
}

impl SolveError {
    /// Bound or demand infeasibility of a computed fixed point.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            SolveError::BoundInfeasible { .. } | SolveError::DemandInfeasible { .. }
        )
    }
}
