//! ROC / AUROC evaluation of decision values.
//!
//! Decision values `d` are normality scores: anomalies are the positive
//! class and are ranked by `-d`. A row is predicted anomalous when
//! `d <= threshold`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Score vectors whose total spread is at most this are treated as fully
/// tied. Exact compression (`tau = 0`) yields `d = 1` only up to rounding.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tp: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tn + self.fp + self.fn_ + self.tp
    }

    pub fn accuracy(&self) -> f64 {
        (self.tn + self.tp) as f64 / self.total() as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocReport {
    /// From `(0, 0)` to `(1, 1)`, one vertex per distinct decision value in
    /// increasing order.
    pub points: Vec<RocPoint>,
    pub auroc: f64,
    /// Decision-value threshold maximizing accuracy; ties go to the lower
    /// threshold. Always one of the observed decision values.
    pub threshold: f64,
    pub confusion: Confusion,
    pub accuracy: f64,
    /// Every score tied (within [`TIE_TOLERANCE`]); the detector cannot rank.
    pub degenerate: bool,
}

pub fn roc_auroc(decision: &[f64], is_anomaly: &[bool]) -> Result<RocReport> {
    if decision.len() != is_anomaly.len() {
        return Err(Error::Evaluation(format!(
            "{} scores for {} labels",
            decision.len(),
            is_anomaly.len()
        )));
    }
    if let Some(i) = decision.iter().position(|d| !d.is_finite()) {
        return Err(Error::Evaluation(format!("score {i} is not finite")));
    }
    let pos = is_anomaly.iter().filter(|&&a| a).count();
    let neg = is_anomaly.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Evaluation(
            "need at least one anomalous and one normal label".into(),
        ));
    }

    let (lo, hi) = decision
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &d| (lo.min(d), hi.max(d)));
    let degenerate = hi - lo <= TIE_TOLERANCE;

    let mut order: Vec<usize> = (0..decision.len()).collect();
    if !degenerate {
        order.sort_by(|&a, &b| decision[a].total_cmp(&decision[b]));
    }
    let key = |i: usize| if degenerate { lo } else { decision[i] };

    let (pos_f, neg_f) = (pos as f64, neg as f64);
    let mut points = vec![RocPoint { fpr: 0.0, tpr: 0.0 }];
    let mut auroc = 0.0;
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut best: Option<(usize, f64, Confusion)> = None;

    let mut start = 0;
    while start < order.len() {
        let value = key(order[start]);
        let mut end = start;
        while end < order.len() && key(order[end]) == value {
            if is_anomaly[order[end]] {
                tp += 1;
            } else {
                fp += 1;
            }
            end += 1;
        }
        let prev = *points.last().unwrap();
        let point = RocPoint {
            fpr: fp as f64 / neg_f,
            tpr: tp as f64 / pos_f,
        };
        auroc += (point.fpr - prev.fpr) * (point.tpr + prev.tpr) / 2.0;
        points.push(point);

        let confusion = Confusion {
            tn: neg - fp,
            fp,
            fn_: pos - tp,
            tp,
        };
        let correct = confusion.tn + confusion.tp;
        if best.is_none_or(|(c, _, _)| correct > c) {
            best = Some((correct, value, confusion));
        }
        start = end;
    }

    let (_, threshold, confusion) = best.expect("non-empty score vector");
    Ok(RocReport {
        points,
        auroc,
        threshold,
        accuracy: confusion.accuracy(),
        confusion,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_separation() {
        let d = [0.1, 0.2, 0.9, 0.95, 1.0];
        let y = [true, true, false, false, false];
        let r = roc_auroc(&d, &y).unwrap();
        assert_eq!(r.auroc, 1.0);
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.threshold, 0.2);
        assert_eq!(r.confusion, Confusion { tn: 3, fp: 0, fn_: 0, tp: 2 });
        assert!(!r.degenerate);
    }

    #[test]
    fn perfect_inversion() {
        let d = [0.9, 0.95, 0.1, 0.2];
        let y = [true, true, false, false];
        assert_eq!(roc_auroc(&d, &y).unwrap().auroc, 0.0);
    }

    #[test]
    fn curve_endpoints_and_monotonicity() {
        let d = [0.3, 0.3, 0.5, 0.1, 0.7, 0.5];
        let y = [true, false, true, false, false, true];
        let r = roc_auroc(&d, &y).unwrap();
        assert_eq!(r.points.first(), Some(&RocPoint { fpr: 0.0, tpr: 0.0 }));
        assert_eq!(r.points.last(), Some(&RocPoint { fpr: 1.0, tpr: 1.0 }));
        assert_eq!(r.points.len(), 5);
        for w in r.points.windows(2) {
            assert!(w[1].fpr >= w[0].fpr && w[1].tpr >= w[0].tpr);
        }
        assert_eq!(r.confusion.total(), 6);
    }

    #[test]
    fn all_tied_is_flagged() {
        let d = [1.0, 1.0 + 1e-12, 1.0 - 1e-12, 1.0];
        let r = roc_auroc(&d, &[true, false, true, false]).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.auroc, 0.5);
        assert_eq!(r.points.len(), 2);
    }

    #[test]
    fn threshold_ties_prefer_lower() {
        // Flagging {0.1} or {0.1, 0.2, 0.3} both give 3/4 correct.
        let d = [0.1, 0.2, 0.3, 0.4];
        let y = [true, false, true, false];
        let r = roc_auroc(&d, &y).unwrap();
        assert_eq!(r.threshold, 0.1);
        assert_eq!(r.accuracy, 0.75);
    }

    #[test]
    fn single_class_is_an_error() {
        assert!(matches!(
            roc_auroc(&[0.1, 0.2], &[true, true]),
            Err(Error::Evaluation(_))
        ));
    }
}
