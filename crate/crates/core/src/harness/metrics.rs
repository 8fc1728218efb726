//! Summary statistics over runs used by the reports and acceptance checks.

use statrs::distribution::{ContinuousCDF, Normal};

use super::series::TimeSeries;

fn greedy_and_total(series: &TimeSeries, from: usize, to: usize) -> (usize, usize) {
    let g = series.thresholds.len().saturating_sub(1);
    series
        .records
        .iter()
        .filter(|r| (from..=to).contains(&r.step))
        .fold((0, 0), |(greedy, total), r| {
            (greedy + r.choice_counts[g], total + r.choice_counts.iter().sum::<usize>())
        })
}

/// `true` when more than half of all choices made in steps `from..=to` were
/// the greedy threshold.
pub fn greedy_majority_between(series: &TimeSeries, from: usize, to: usize) -> bool {
    let (greedy, total) = greedy_and_total(series, from, to);
    total > 0 && 2 * greedy > total
}

/// First step at which greedy choices make up more than half of the choices
/// in the trailing `window` steps.
pub fn greedy_majority_onset(series: &TimeSeries, window: usize) -> Option<usize> {
    let window = window.max(1);
    let g = series.thresholds.len().saturating_sub(1);
    let (mut greedy, mut total) = (0usize, 0usize);
    for (i, r) in series.records.iter().enumerate() {
        greedy += r.choice_counts[g];
        total += r.choice_counts.iter().sum::<usize>();
        if i >= window {
            let old = &series.records[i - window];
            greedy -= old.choice_counts[g];
            total -= old.choice_counts.iter().sum::<usize>();
        }
        if i + 1 >= window && total > 0 && 2 * greedy > total {
            return Some(r.step);
        }
    }
    None
}

/// Fraction of runs with a living agent at the end.
pub fn survival_fraction(runs: &[TimeSeries]) -> f64 {
    if runs.is_empty() {
        return 0.0;
    }
    runs.iter().filter(|s| s.survived()).count() as f64 / runs.len() as f64
}

/// One-sided two-proportion z-test of `p_a > p_b`. Returns the p-value.
pub fn two_proportion_p_value(success_a: usize, n_a: usize, success_b: usize, n_b: usize) -> f64 {
    let (na, nb) = (n_a as f64, n_b as f64);
    let pa = success_a as f64 / na;
    let pb = success_b as f64 / nb;
    let pooled = (success_a + success_b) as f64 / (na + nb);
    let se = (pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb)).sqrt();
    if se == 0.0 {
        return if pa > pb { 0.0 } else { 1.0 };
    }
    let z = (pa - pb) / se;
    let normal = Normal::standard();
    1.0 - normal.cdf(z)
}
