/// Slack allowed when comparing a cumulative demand with a budget, so that a
/// budget computed as a sum of the same demands is not lost to rounding.
const BUDGET_EPS: f64 = 1e-9;

/// Circuit `m` is on iff the demands of circuits `0..=m` together fit `budget`.
///
/// Cumulative sums never decrease, so the on-set is always a prefix of the
/// priority order.
pub fn priority_stack(budget_kwh: f64, circuit_demand_kwh: &[f64]) -> Vec<bool> {
    let mut cumulative = 0.0;
    circuit_demand_kwh
        .iter()
        .map(|e| {
            cumulative += e.max(0.0);
            cumulative <= budget_kwh + BUDGET_EPS
        })
        .collect()
}
