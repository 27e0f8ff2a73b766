//! Evaluation budgets shared by every sampling-based check.

/// Environment variable that caps evaluation budgets.
pub const BUDGET_ENV: &str = "QDISK_BUDGET";

pub const DEFAULT_BUDGET: usize = 1 << 24;

/// Maximum number of coefficient evaluations a sampling routine may spend.
pub fn evaluation_budget() -> usize {
    std::env::var(BUDGET_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&b| b > 0)
        .unwrap_or(DEFAULT_BUDGET)
}
