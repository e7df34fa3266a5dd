//! Attractor approximation by trajectory clouds, the one-sided Hausdorff
//! semidistance, and the V-regularity surrogate.

use serde::{Deserialize, Serialize};

use crate::analysis::ensemble::{run_ensemble, EnsembleSpec};
use crate::error::AnalysisError;
use crate::model::{validate_assumptions, ModelSpec};
use crate::scalar::{cast, Scalar};
use crate::solver::{State, TrajectoryRecord};

/// Set of post-burn-in states pooled across an ensemble.
#[derive(Debug, Clone)]
pub struct AttractorCloud<T> {
    pub states: Vec<State<T>>,
    pub burn_in: T,
    pub stride: usize,
}

/// One-sided Hausdorff semidistance `sup_{x in from} inf_{y in to} d_H(x, y)`
/// in the H-metric, by brute-force nearest neighbour.
pub fn semidistance<T: Scalar>(from: &[State<T>], to: &[State<T>]) -> T {
    assert!(!to.is_empty(), "semidistance target must be non-empty");
    let mut sup = T::zero();
    for x in from {
        let mut inf = T::infinity();
        for y in to {
            let d = x.h_distance(y);
            if d < inf {
                inf = d;
            }
            if inf == T::zero() {
                break;
            }
        }
        if inf > sup {
            sup = inf;
        }
    }
    sup
}

/// Centered moving average with the given window (window 5 everywhere here).
pub fn smooth(series: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    (0..series.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(series.len());
            series[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttractorReport {
    pub probe_times: Vec<f64>,
    pub semidistance: Vec<f64>,
    pub smoothed: Vec<f64>,
    /// smoothed series non-increasing (with relative slack)
    pub trend_nonincreasing: bool,
    pub burn_in: f64,
    pub cloud_size: usize,
}

/// Build the reference cloud from post-burn-in samples and track how the
/// snapshot clouds approach it.
///
/// Reference samples sit on recorded indices `0 mod stride` past the burn-in;
/// probe clouds sit on indices offset by `stride / 2`, so late probes measure
/// a genuine (small) distance instead of hitting their own samples.
pub fn attractor_experiment<T: Scalar>(
    spec: &EnsembleSpec<T>,
    burn_in: T,
    stride: usize,
) -> Result<(AttractorReport, AttractorCloud<T>, Vec<TrajectoryRecord<T>>), AnalysisError> {
    assert!(stride >= 1);
    assert!(burn_in > T::zero(), "burn-in must be positive");
    if burn_in >= spec.horizon {
        return Err(AnalysisError::EmptyCloud);
    }
    let results = run_ensemble(spec);
    let mut records = Vec::with_capacity(results.len());
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(rec) if rec.completed() => records.push(rec),
            Ok(_) => {
                return Err(AnalysisError::TrajectoryFailed {
                    index: i,
                    reason: "diverged".into(),
                })
            }
            Err(e) => {
                return Err(AnalysisError::TrajectoryFailed {
                    index: i,
                    reason: e.to_string(),
                })
            }
        }
    }

    let n_samples = records
        .iter()
        .map(|r| r.states.len())
        .min()
        .unwrap_or(0);
    if n_samples == 0 {
        return Err(AnalysisError::EmptyCloud);
    }

    let mut reference: Vec<State<T>> = Vec::new();
    for rec in &records {
        for (j, s) in rec.states.iter().enumerate().take(n_samples) {
            if s.t > burn_in && j % stride == 0 {
                reference.push(s.clone());
            }
        }
    }
    if reference.is_empty() {
        return Err(AnalysisError::EmptyCloud);
    }

    let offset = (stride / 2).max(1);
    let mut probe_times = Vec::new();
    let mut series = Vec::new();
    let mut j = offset;
    while j < n_samples {
        let cloud: Vec<State<T>> = records.iter().map(|r| r.states[j].clone()).collect();
        let d = semidistance(&cloud, &reference);
        probe_times.push(records[0].states[j].t.as_f64());
        series.push(d.as_f64());
        j += stride;
    }

    let smoothed = smooth(&series, 5);
    let scale = smoothed.iter().cloned().fold(0.0f64, f64::max);
    let slack = 1e-2 * scale + 1e-12;
    let trend = smoothed.windows(2).all(|w| w[1] <= w[0] + slack);

    let report = AttractorReport {
        probe_times,
        semidistance: series,
        smoothed,
        trend_nonincreasing: trend,
        burn_in: burn_in.as_f64(),
        cloud_size: reference.len(),
    };
    let cloud = AttractorCloud {
        states: reference,
        burn_in,
        stride,
    };
    Ok((report, cloud, records))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegularityReport {
    /// sup over post-burn-in samples of |grad u_t| + |Delta u|
    pub v_sup: f64,
    pub t_at_sup: f64,
    pub times: Vec<f64>,
    pub v_series: Vec<f64>,
}

/// V-norm surrogate along a record; requires strong damping (the regularity
/// theory needs `g' >= gamma > 0`).
pub fn regularity_check<T: Scalar>(
    record: &TrajectoryRecord<T>,
    model: &ModelSpec<T>,
    burn_in: T,
) -> Result<RegularityReport, AnalysisError> {
    let basis = model.forcing.basis();
    let report = validate_assumptions(model, basis.lambda_1());
    if !report.passes("G2") {
        return Err(AnalysisError::GradientConditionFailed);
    }
    let mut v_sup = 0.0f64;
    let mut t_at = 0.0f64;
    let mut times = Vec::new();
    let mut series = Vec::new();
    for s in &record.states {
        if s.t < burn_in {
            continue;
        }
        let v = (s.v.fractional_norm(T::one()) + s.u.fractional_norm(cast(2.0))).as_f64();
        if v > v_sup {
            v_sup = v;
            t_at = s.t.as_f64();
        }
        times.push(s.t.as_f64());
        series.push(v);
    }
    if series.is_empty() {
        return Err(AnalysisError::EmptyCloud);
    }
    Ok(RegularityReport {
        v_sup,
        t_at_sup: t_at,
        times,
        v_series: series,
    })
}
