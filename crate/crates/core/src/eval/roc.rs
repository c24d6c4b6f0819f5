use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// Area under the curve in `[0, 100]`.
    pub auc: f64,
    /// `(fpr, tpr)` from `(0, 0)` to `(1, 1)`.
    pub points: Vec<(f64, f64)>,
    pub n_pos: usize,
    pub n_neg: usize,
}

/// Twice the Mann-Whitney U statistic with midranks for ties: the number of
/// (positive, negative) pairs ordered correctly, counted twice, plus ties.
///
/// Returns `(2U, n_pos, n_neg)`.
pub fn mann_whitney_2u(scores: &[(f64, bool)]) -> Result<(u128, usize, usize)> {
    if scores.iter().any(|(s, _)| s.is_nan()) {
        return Err(Error::InvalidArgument("scores contain NaN".into()));
    }
    let n_pos = scores.iter().filter(|(_, l)| *l).count();
    let n_neg = scores.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::InvalidArgument(
            "ROC-AUC needs at least one instance of each class".into(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].0.total_cmp(&scores[b].0));
    // doubled rank sum of positives; a tie group at 1-based positions i..=j has midrank (i + j) / 2
    let mut twice_rank_sum: u128 = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && scores[order[end + 1]].0 == scores[order[start]].0 {
            end += 1;
        }
        let twice_midrank = (start + 1 + end + 1) as u128;
        let pos_in_group = order[start..=end].iter().filter(|&&i| scores[i].1).count() as u128;
        twice_rank_sum += twice_midrank * pos_in_group;
        start = end + 1;
    }
    let p = n_pos as u128;
    Ok((twice_rank_sum - p * (p + 1), n_pos, n_neg))
}

/// Converts `2U` to a percentage so that complementary statistics sum to
/// exactly 100 in floating point.
pub fn auc_from_2u(two_u: u128, n_pos: usize, n_neg: usize) -> f64 {
    let d = 2 * n_pos as u128 * n_neg as u128;
    if 2 * two_u <= d {
        100.0 * two_u as f64 / d as f64
    } else {
        100.0 - 100.0 * (d - two_u) as f64 / d as f64
    }
}

/// ROC-AUC with entailment (`true`) positive and higher scores more positive.
pub fn roc_auc(scores: &[(f64, bool)]) -> Result<RocCurve> {
    let (two_u, n_pos, n_neg) = mann_whitney_2u(scores)?;
    Ok(RocCurve {
        auc: auc_from_2u(two_u, n_pos, n_neg),
        points: roc_points(scores, n_pos, n_neg),
        n_pos,
        n_neg,
    })
}

/// ROC-AUC of the negated scores.
pub fn flipped_roc_auc(scores: &[(f64, bool)]) -> Result<f64> {
    let negated: Vec<(f64, bool)> = scores.iter().map(|&(s, l)| (-s, l)).collect();
    Ok(roc_auc(&negated)?.auc)
}

fn roc_points(scores: &[(f64, bool)], n_pos: usize, n_neg: usize) -> Vec<(f64, f64)> {
    let mut sorted: Vec<(f64, bool)> = scores.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < sorted.len() {
        let threshold = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == threshold {
            if sorted[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / n_neg as f64, tp as f64 / n_pos as f64));
    }
    points
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separated_and_tied() {
        let sep = [(3.0, true), (2.0, true), (1.0, false), (0.0, false)];
        assert_eq!(roc_auc(&sep).unwrap().auc, 100.0);
        assert_eq!(flipped_roc_auc(&sep).unwrap(), 0.0);
        let tied = [(1.0, true), (1.0, false), (1.0, true)];
        assert_eq!(roc_auc(&tied).unwrap().auc, 50.0);
        assert_eq!(flipped_roc_auc(&tied).unwrap(), 50.0);
    }

    #[test]
    fn three_of_four_pairs() {
        let s = [(3.0, true), (1.0, true), (2.0, false), (0.0, false)];
        assert_eq!(roc_auc(&s).unwrap().auc, 75.0);
    }

    #[test]
    fn single_class_rejected() {
        assert!(roc_auc(&[(1.0, true), (2.0, true)]).is_err());
        assert!(roc_auc(&[]).is_err());
        assert!(roc_auc(&[(f64::NAN, true), (1.0, false)]).is_err());
    }

    #[test]
    fn curve_endpoints() {
        let s = [(0.3, true), (0.1, false), (0.3, false), (0.9, true)];
        let c = roc_auc(&s).unwrap();
        assert_eq!(c.points.first(), Some(&(0.0, 0.0)));
        assert_eq!(c.points.last(), Some(&(1.0, 1.0)));
        // trapezoid area equals the rank statistic
        let area: f64 = c
            .points
            .windows(2)
            .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
            .sum();
        assert!((100.0 * area - c.auc).abs() < 1e-12);
    }
}
