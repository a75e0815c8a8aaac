use serde::{Deserialize, Serialize};

use super::PlannerError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    Measured,
    UpperBound,
}

/// Model quantity that replaces a budget entry in fidelity predictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelTerm {
    /// Recoil over the spread of arrival times, (1 − C″)-type penalty.
    ArrivalRecoil,
    /// Recoil between time bins, (1 − C′)-type penalty.
    TimebinRecoil,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorBudgetEntry {
    pub label: String,
    /// Absolute fidelity error.
    pub fidelity_error: f64,
    pub bound: BoundKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_term: Option<ModelTerm>,
}

impl ErrorBudgetEntry {
    pub fn validate(&self) -> Result<(), PlannerError> {
        if !(0.0..=1.0).contains(&self.fidelity_error) {
            return Err(PlannerError::InvalidEntry {
                label: self.label.clone(),
                reason: format!("fidelity_error {} outside [0, 1]", self.fidelity_error),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetTable {
    pub entries: Vec<ErrorBudgetEntry>,
    /// First-order sum of all entries.
    pub total: f64,
    /// Total rounded to one significant figure, as tabulated.
    pub total_rounded: f64,
}

impl BudgetTable {
    /// Aligned two-column text table.
    pub fn render_text(&self) -> String {
        let width = self
            .entries
            .iter()
            .map(|e| e.label.chars().count())
            .max()
            .unwrap_or(0)
            .max("TOTAL".len());
        let mut s = format!("{:<width$}  {:>10}\n", "Source of error", "Fidelity error");
        for e in &self.entries {
            let v = match e.bound {
                BoundKind::Measured => format!("{}", e.fidelity_error),
                BoundKind::UpperBound => format!("<{}", e.fidelity_error),
            };
            s.push_str(&format!("{:<width$}  {:>10}\n", e.label, v));
        }
        s.push_str(&format!("{:<width$}  {:>10}\n", "TOTAL", self.total_rounded));
        s
    }
}

/// Rounds to `sig` significant figures.
pub fn round_to_sig(x: f64, sig: i32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let scale = 10f64.powi(sig - 1 - x.abs().log10().floor() as i32);
    (x * scale).round() / scale
}

/// Sums entries additively; upper bounds count at their bound. The sum runs
/// over sorted values so the total does not depend on entry order.
pub fn compose_error_budget(entries: &[ErrorBudgetEntry]) -> Result<BudgetTable, PlannerError> {
    for e in entries {
        e.validate()?;
    }
    let mut values: Vec<f64> = entries.iter().map(|e| e.fidelity_error).collect();
    values.sort_by(f64::total_cmp);
    let total: f64 = values.iter().sum();
    Ok(BudgetTable {
        entries: entries.to_vec(),
        total,
        total_rounded: round_to_sig(total, 1),
    })
}
