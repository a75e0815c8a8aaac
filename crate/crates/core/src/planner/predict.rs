use serde::Serialize;

use super::{ErrorBudgetEntry, ModelTerm, PlannerError};
use crate::physics::{coherence_report, NodeSpec, ProtocolParams, TrapMode};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictedTerm {
    pub label: String,
    pub fidelity_error: f64,
    /// Computed from the recoil model rather than taken from the budget.
    pub from_model: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityPrediction {
    pub fidelity: f64,
    pub total_error: f64,
    pub c_timebin: f64,
    pub c_arrival: f64,
    pub terms: Vec<PredictedTerm>,
}

/// F = 1 − [(1 − C′C″)/2 + Σ budget entries without a model term].
///
/// The recoil penalty is split as (1 − C′)/2 + C′(1 − C″)/2 so the terms add
/// up to the total exactly. Budget entries tagged with a model term are
/// replaced by that computed value.
pub fn predict_fidelity(
    nodes: &[NodeSpec; 2],
    protocol: &ProtocolParams,
    budget: &[ErrorBudgetEntry],
) -> Result<FidelityPrediction, PlannerError> {
    for e in budget {
        e.validate()?;
    }
    let modes: Vec<TrapMode> = nodes.iter().flat_map(|n| n.modes.iter().copied()).collect();
    let r = coherence_report(&modes, protocol.tau_s, protocol.delta_t_s, nodes[0].emitter.tau_r_s);
    let label_for = |term: ModelTerm, default: &str| {
        budget
            .iter()
            .find(|e| e.model_term == Some(term))
            .map_or_else(|| default.to_string(), |e| e.label.clone())
    };
    let mut terms = vec![
        PredictedTerm {
            label: label_for(ModelTerm::TimebinRecoil, "Atom recoil, time-bin separation"),
            fidelity_error: 0.5 * (1.0 - r.c_timebin),
            from_model: true,
        },
        PredictedTerm {
            label: label_for(ModelTerm::ArrivalRecoil, "Atom recoil, arrival time"),
            fidelity_error: 0.5 * r.c_timebin * (1.0 - r.c_arrival),
            from_model: true,
        },
    ];
    terms.extend(budget.iter().filter(|e| e.model_term.is_none()).map(|e| PredictedTerm {
        label: e.label.clone(),
        fidelity_error: e.fidelity_error,
        from_model: false,
    }));
    let mut values: Vec<f64> = terms.iter().map(|t| t.fidelity_error).collect();
    values.sort_by(f64::total_cmp);
    let total_error: f64 = values.iter().sum();
    Ok(FidelityPrediction {
        fidelity: 1.0 - total_error,
        total_error,
        c_timebin: r.c_timebin,
        c_arrival: r.c_arrival,
        terms,
    })
}
