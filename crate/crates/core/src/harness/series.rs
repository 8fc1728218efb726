use serde::{Deserialize, Serialize};

use crate::error::{config_err, Error, Result};

/// State of one run after a step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub resource: f64,
    pub alive: usize,
    /// Mean energy over living agents, 0 when none are alive.
    pub mean_energy: f64,
    /// Agents that actually received resource this step.
    pub gatherers: usize,
    pub deaths: usize,
    /// Agents choosing each threshold this step.
    pub choice_counts: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub thresholds: Vec<f64>,
    pub records: Vec<StepRecord>,
}

impl TimeSeries {
    pub fn new(thresholds: Vec<f64>) -> Self {
        Self {
            thresholds,
            records: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&StepRecord> {
        self.records.last()
    }

    pub fn final_alive(&self) -> usize {
        self.last().map_or(0, |r| r.alive)
    }

    pub fn survived(&self) -> bool {
        self.final_alive() > 0
    }

    /// First step at which the stock hit exactly zero.
    pub fn depletion_step(&self) -> Option<usize> {
        self.records.iter().find(|r| r.resource == 0.0).map(|r| r.step)
    }

    /// First step after which no agent is alive.
    pub fn extinction_step(&self) -> Option<usize> {
        self.records.iter().find(|r| r.alive == 0).map(|r| r.step)
    }

    pub fn total_deaths(&self) -> usize {
        self.records.iter().map(|r| r.deaths).sum()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single run.
    pub std: f64,
}

impl Stat {
    fn from_values(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
            (ss / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRecord {
    pub step: usize,
    pub resource: Stat,
    pub alive: Stat,
    pub mean_energy: Stat,
    pub gatherers: Stat,
    pub deaths: Stat,
    pub choice_counts: Vec<Stat>,
    /// Fraction of runs with at least one living agent after this step.
    pub surviving: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateSeries {
    pub thresholds: Vec<f64>,
    pub records: Vec<AggregateRecord>,
}

impl AggregateSeries {
    /// Fraction of runs with a living agent at the final step.
    pub fn survival_fraction(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.surviving)
    }
}

/// Pads a run that stopped early: nobody alive, the stock carried forward.
fn padded(series: &TimeSeries, step_index: usize) -> StepRecord {
    if let Some(r) = series.records.get(step_index) {
        return r.clone();
    }
    let last = series.records.last();
    StepRecord {
        step: step_index + 1,
        resource: last.map_or(0.0, |r| r.resource),
        alive: 0,
        mean_energy: 0.0,
        gatherers: 0,
        deaths: 0,
        choice_counts: vec![0; series.thresholds.len()],
    }
}

/// Per-step mean and sample standard deviation across runs.
pub fn aggregate(series: &[TimeSeries]) -> Result<AggregateSeries> {
    let first = series.first().ok_or(Error::EmptyAggregate)?;
    if let Some(s) = series.iter().find(|s| s.thresholds != first.thresholds) {
        return Err(config_err(format!(
            "cannot aggregate runs with thresholds {:?} and {:?}",
            first.thresholds, s.thresholds
        )));
    }
    let k = first.thresholds.len();
    let steps = series.iter().map(TimeSeries::len).max().unwrap_or(0);
    let mut records = Vec::with_capacity(steps);
    let mut col = vec![0.0; series.len()];
    for t in 0..steps {
        let rows: Vec<StepRecord> = series.iter().map(|s| padded(s, t)).collect();
        let mut stat = |f: &dyn Fn(&StepRecord) -> f64| {
            for (c, r) in col.iter_mut().zip(&rows) {
                *c = f(r);
            }
            Stat::from_values(&col)
        };
        let resource = stat(&|r| r.resource);
        let alive = stat(&|r| r.alive as f64);
        let mean_energy = stat(&|r| r.mean_energy);
        let gatherers = stat(&|r| r.gatherers as f64);
        let deaths = stat(&|r| r.deaths as f64);
        let choice_counts = (0..k).map(|i| stat(&|r| r.choice_counts[i] as f64)).collect();
        let surviving =
            rows.iter().filter(|r| r.alive > 0).count() as f64 / series.len() as f64;
        records.push(AggregateRecord {
            step: rows[0].step,
            resource,
            alive,
            mean_energy,
            gatherers,
            deaths,
            choice_counts,
            surviving,
        });
    }
    Ok(AggregateSeries {
        thresholds: first.thresholds.clone(),
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(step: usize, alive: usize, counts: Vec<usize>) -> StepRecord {
        StepRecord {
            step,
            resource: 100.0 * step as f64,
            alive,
            mean_energy: if alive > 0 { 50.0 } else { 0.0 },
            gatherers: alive,
            deaths: 0,
            choice_counts: counts,
        }
    }

    fn series(alive_at_end: usize) -> TimeSeries {
        TimeSeries {
            thresholds: vec![50.0, 5000.0],
            records: vec![record(1, 1, vec![1, 0]), record(2, alive_at_end, vec![0, alive_at_end])],
        }
    }

    #[test]
    fn identical_runs() {
        let s = series(1);
        let agg = aggregate(&[s.clone(), s.clone(), s.clone()]).unwrap();
        for (a, r) in agg.records.iter().zip(&s.records) {
            assert_eq!(a.resource, Stat { mean: r.resource, std: 0.0 });
            assert_eq!(a.alive.mean, r.alive as f64);
            assert_eq!(a.alive.std, 0.0);
        }
    }

    #[test]
    fn survival_fraction_half() {
        let agg = aggregate(&[series(1), series(0)]).unwrap();
        assert_eq!(agg.survival_fraction(), 0.5);
        assert_eq!(agg.records[1].alive.mean, 0.5);
        let expected_std = (0.5f64).sqrt();
        assert!((agg.records[1].alive.std - expected_std).abs() < 1e-15);
    }

    #[test]
    fn empty_input_rejected() {
        assert!(matches!(aggregate(&[]), Err(Error::EmptyAggregate)));
    }

    #[test]
    fn short_runs_are_padded() {
        let mut short = series(0);
        short.records.pop();
        short.records[0].alive = 0;
        let agg = aggregate(&[series(1), short]).unwrap();
        assert_eq!(agg.records.len(), 2);
        assert_eq!(agg.records[1].resource.mean, (200.0 + 100.0) / 2.0);
        assert_eq!(agg.records[1].alive.mean, 0.5);
    }

    #[test]
    fn mismatched_thresholds_rejected() {
        let mut other = series(1);
        other.thresholds = vec![30.0, 5000.0];
        assert!(aggregate(&[series(1), other]).is_err());
    }
}
