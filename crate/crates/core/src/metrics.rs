//! Estimation error and selection accuracy against a known truth.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{SparseCoefficients, TruthInfo};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub l2_err: f64,
    pub l1_err: f64,
    pub nz: usize,
    pub fpr: f64,
    pub tpr: f64,
    pub sign_consistent: bool,
}

/// Compares an estimate with the truth. Nonzero means exactly nonzero.
pub fn evaluate(estimate: &SparseCoefficients, truth: &TruthInfo) -> Result<EvalReport> {
    let p = truth.p();
    if estimate.len() != p {
        return Err(Error::dims(format!("estimate has {} coefficients, truth has {p}", estimate.len())));
    }
    let q = truth.q();
    if q == 0 {
        return Err(Error::Undefined("true positive rate with an empty true support"));
    }
    if q == p {
        return Err(Error::Undefined("false positive rate with a full true support"));
    }
    let (mut l2, mut l1) = (0.0, 0.0);
    let (mut fp, mut tp) = (0usize, 0usize);
    let mut sign_consistent = true;
    for (&b_hat, &b) in estimate.values().iter().zip(truth.beta().iter()) {
        let d = b_hat - b;
        l2 += d * d;
        l1 += d.abs();
        match (b_hat != 0.0, b != 0.0) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            _ => {}
        }
        if sign(b_hat) != sign(b) {
            sign_consistent = false;
        }
    }
    Ok(EvalReport {
        l2_err: l2.sqrt(),
        l1_err: l1,
        nz: estimate.nz(),
        fpr: fp as f64 / (p - q) as f64,
        tpr: tp as f64 / q as f64,
        sign_consistent,
    })
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single observation.
    pub sd: f64,
}

impl MeanSd {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return None;
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let sd = if v.len() > 1 {
            (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, sd })
    }

    /// `mean (sd)` with four decimals.
    pub fn cell(&self) -> String {
        format!("{:.4} ({:.4})", self.mean, self.sd)
    }
}

/// Per-measure mean and standard deviation over replications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub l2: MeanSd,
    pub l1: MeanSd,
    pub nz: MeanSd,
    pub fpr: MeanSd,
    pub tpr: MeanSd,
    /// Fraction of replications with the exact true sign pattern.
    pub sign_rate: f64,
}

impl Summary {
    /// Cells in table order: l2, l1, NZ, FPR, TPR.
    pub fn cells(&self) -> [String; 5] {
        [self.l2.cell(), self.l1.cell(), self.nz.cell(), self.fpr.cell(), self.tpr.cell()]
    }
}

pub fn summarize(reports: &[EvalReport]) -> Result<Summary> {
    if reports.is_empty() {
        return Err(Error::invalid("cannot summarize an empty list of reports"));
    }
    let stat = |f: fn(&EvalReport) -> f64| MeanSd::of(reports.iter().map(f)).expect("nonempty");
    Ok(Summary {
        count: reports.len(),
        l2: stat(|r| r.l2_err),
        l1: stat(|r| r.l1_err),
        nz: stat(|r| r.nz as f64),
        fpr: stat(|r| r.fpr),
        tpr: stat(|r| r.tpr),
        sign_rate: reports.iter().filter(|r| r.sign_consistent).count() as f64 / reports.len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1};
    use proptest::prelude::*;

    fn report(l2: f64) -> EvalReport {
        EvalReport {
            l2_err: l2,
            l1_err: 0.0,
            nz: 4,
            fpr: 0.0,
            tpr: 1.0,
            sign_consistent: true,
        }
    }

    #[test]
    fn exact_estimate() {
        let beta = array![0.0, 1.5, -2.0, 0.0];
        let truth = TruthInfo::new(beta.clone(), 1.0).unwrap();
        let r = evaluate(&SparseCoefficients::from_values(beta), &truth).unwrap();
        assert_eq!(
            r,
            EvalReport {
                l2_err: 0.0,
                l1_err: 0.0,
                nz: 2,
                fpr: 0.0,
                tpr: 1.0,
                sign_consistent: true
            }
        );
    }

    #[test]
    fn counts_from_definitions() {
        let truth = TruthInfo::new(array![0.0, 1.0, 1.0, 0.0, 0.0], 1.0).unwrap();
        let est = SparseCoefficients::from_values(array![1.0, 1.0, 0.0, 0.0, 0.0]);
        let r = evaluate(&est, &truth).unwrap();
        assert!((r.fpr - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.tpr, 0.5);
        assert_eq!(r.nz, 2);
        assert!(!r.sign_consistent);
        assert!((r.l2_err - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(r.l1_err, 2.0);
    }

    #[test]
    fn zero_estimate() {
        let truth = TruthInfo::new(array![0.0, 1.0, 0.0], 1.0).unwrap();
        let r = evaluate(&SparseCoefficients::zeros(3), &truth).unwrap();
        assert_eq!((r.fpr, r.tpr, r.nz), (0.0, 0.0, 0));
    }

    #[test]
    fn undefined_rates() {
        let empty = TruthInfo::new(Array1::zeros(3), 1.0).unwrap();
        assert!(evaluate(&SparseCoefficients::zeros(3), &empty).is_err());
        let full = TruthInfo::new(Array1::ones(3), 1.0).unwrap();
        assert!(evaluate(&SparseCoefficients::zeros(3), &full).is_err());
        let truth = TruthInfo::new(array![0.0, 1.0], 1.0).unwrap();
        assert!(evaluate(&SparseCoefficients::zeros(3), &truth).is_err());
    }

    #[test]
    fn summary_statistics() {
        let s = summarize(&[report(0.25)]).unwrap();
        assert_eq!(s.l2.sd, 0.0);
        let s = summarize(&[report(0.1), report(0.3)]).unwrap();
        assert!((s.l2.mean - 0.2).abs() < 1e-15);
        assert!((s.l2.sd - 0.1414).abs() < 1e-4);
        let s = summarize(&[report(0.7); 5]).unwrap();
        assert_eq!((s.l2.mean, s.l2.sd), (0.7, 0.0));
        assert_eq!(s.l2.cell(), "0.7000 (0.0000)");
        assert!(summarize(&[]).is_err());
    }

    proptest! {
        #[test]
        fn rates_and_count_identity(
            truth_bits in prop::collection::vec(any::<bool>(), 3..20),
            est_seed in prop::collection::vec(-2i8..=2, 20),
        ) {
            let p = truth_bits.len();
            prop_assume!(truth_bits.iter().any(|&b| b) && truth_bits.iter().any(|&b| !b));
            let beta = Array1::from_iter(truth_bits.iter().map(|&b| if b { 1.0 } else { 0.0 }));
            let est = Array1::from_iter(est_seed[..p].iter().map(|&v| f64::from(v)));
            let truth = TruthInfo::new(beta, 1.0).unwrap();
            let r = evaluate(&SparseCoefficients::from_values(est.clone()), &truth).unwrap();
            prop_assert!((0.0..=1.0).contains(&r.fpr) && (0.0..=1.0).contains(&r.tpr));
            let q = truth.q() as f64;
            let implied = r.fpr * (p as f64 - q) + r.tpr * q;
            prop_assert!((implied - r.nz as f64).abs() < 1e-9);

            // simultaneous permutation (reversal) leaves the report unchanged
            let rev_truth = TruthInfo::new(truth.beta().iter().rev().copied().collect(), 1.0).unwrap();
            let rev_est = SparseCoefficients::from_values(est.iter().rev().copied().collect());
            let r2 = evaluate(&rev_est, &rev_truth).unwrap();
            prop_assert_eq!(r.nz, r2.nz);
            prop_assert!((r.l2_err - r2.l2_err).abs() < 1e-12);
            prop_assert_eq!(r.fpr, r2.fpr);
            prop_assert_eq!(r.tpr, r2.tpr);
        }
    }
}
