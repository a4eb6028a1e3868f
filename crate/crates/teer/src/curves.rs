//! Empirical step-function error-rate curves and conventional EERs.
//!
//! A [`RateCurve`] is built from one positive score list and one or more
//! negative score lists. Its `U` thresholds are the sorted distinct union of
//! *all* input scores, and it exposes `U + 1` discrete operating points:
//!
//! * point `0` is the accept-all setting (threshold below every score),
//! * point `k` (for `1 <= k <= U`) places the threshold exactly at
//!   `thresholds[k-1]`.
//!
//! The decision rule is *accept iff score > threshold*, so a threshold placed
//! exactly at a score value rejects that score. This fixes tie handling
//! deterministically: at point `k`, the miss rate counts positives
//! `<= thresholds[k-1]` and each false-alarm rate counts negatives
//! `> thresholds[k-1]`. Counting is exact; there is no smoothing or
//! interpolation between points.
//!
//! Consequences used throughout the crate: `miss` is non-decreasing with
//! `miss[0] = 0` and `miss[U] = 1`, every false-alarm list is non-increasing
//! with `fa[0] = 1` and `fa[U] = 0`.
//!
//! The EER is located by nearest-neighbor search over the discrete operating
//! points: the point minimizing `|miss - fa|`, ties broken toward the
//! smallest index, with the midpoint `(miss + fa) / 2` reported. No ROC
//! convex-hull refinement is applied. Because only score order matters, every
//! value computed here is invariant under strictly increasing transforms of
//! the scores.

use std::fmt;
use std::io::{self, Write};

use thiserror::Error;

use crate::score_io::{AsvScoreSet, CmScoreSet};

/// Tag for a negative class carried by a curve. An ASV curve has both;
/// a CM curve has only `Spoof`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NegClass {
    Nontarget,
    Spoof,
}

impl NegClass {
    pub fn label(self) -> &'static str {
        match self {
            NegClass::Nontarget => "nontarget",
            NegClass::Spoof => "spoof",
        }
    }
}

impl fmt::Display for NegClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Error, Debug)]
pub enum CurveError {
    #[error("positive score list is empty")]
    EmptyPositive,
    #[error("no non-empty negative class was given")]
    NoNegatives,
    #[error("negative class `{0}` has an empty score list")]
    EmptyClass(NegClass),
    #[error("scores must be finite")]
    NonFiniteScore,
    #[error("curve has no `{0}` false-alarm class")]
    MissingClass(NegClass),
    #[error("prior {0} outside [0, 1]")]
    PriorOutOfRange(f64),
}

/// Empirical miss / false-alarm rates over the discrete operating points
/// described in the module docs. Immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct RateCurve {
    thresholds: Vec<f64>,
    miss: Vec<f64>,
    fa: Vec<(NegClass, Vec<f64>)>,
}

/// An EER located on a discrete curve: the operating point, the two rates
/// there, and their midpoint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EerResult {
    pub eer: f64,
    pub threshold_index: usize,
    pub miss_at: f64,
    pub fa_at: f64,
}

/// Nearest-neighbor EER over parallel rate arrays: the index minimizing
/// `|miss - fa|` (smallest index on ties), reporting the midpoint.
pub fn eer_from_rates(miss: &[f64], fa: &[f64]) -> EerResult {
    debug_assert_eq!(miss.len(), fa.len());
    let mut best = 0usize;
    let mut best_gap = f64::INFINITY;
    for k in 0..miss.len() {
        let gap = (miss[k] - fa[k]).abs();
        if gap < best_gap {
            best_gap = gap;
            best = k;
        }
    }
    EerResult {
        eer: 0.5 * (miss[best] + fa[best]),
        threshold_index: best,
        miss_at: miss[best],
        fa_at: fa[best],
    }
}

// Counts, for each operating point, how many of `sorted` are <= its
// threshold (0 for the accept-all point). Exact integer counting; the
// caller divides, so rates are identical to direct per-point counting.
fn counts_le(sorted: &[f64], thresholds: &[f64]) -> Vec<usize> {
    let mut out = Vec::with_capacity(thresholds.len() + 1);
    out.push(0);
    let mut p = 0usize;
    for &t in thresholds {
        while p < sorted.len() && sorted[p] <= t {
            p += 1;
        }
        out.push(p);
    }
    out
}

fn sorted_copy(scores: &[f64]) -> Vec<f64> {
    let mut v = scores.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    v
}

impl RateCurve {
    /// Build a curve from a positive score list and per-class negative lists.
    pub fn build(pos: &[f64], neg_by_class: &[(NegClass, &[f64])]) -> Result<Self, CurveError> {
        if pos.is_empty() {
            return Err(CurveError::EmptyPositive);
        }
        if neg_by_class.is_empty() {
            return Err(CurveError::NoNegatives);
        }
        for (class, scores) in neg_by_class {
            if scores.is_empty() {
                return Err(CurveError::EmptyClass(*class));
            }
        }
        let finite = pos.iter().all(|s| s.is_finite())
            && neg_by_class
                .iter()
                .all(|(_, scores)| scores.iter().all(|s| s.is_finite()));
        if !finite {
            return Err(CurveError::NonFiniteScore);
        }

        let mut thresholds: Vec<f64> = pos.to_vec();
        for (_, scores) in neg_by_class {
            thresholds.extend_from_slice(scores);
        }
        thresholds.sort_unstable_by(f64::total_cmp);
        thresholds.dedup();

        let n_pos = pos.len() as f64;
        let miss = counts_le(&sorted_copy(pos), &thresholds)
            .iter()
            .map(|&c| c as f64 / n_pos)
            .collect();
        let fa = neg_by_class
            .iter()
            .map(|(class, scores)| {
                let n = scores.len();
                let rates = counts_le(&sorted_copy(scores), &thresholds)
                    .iter()
                    .map(|&c| (n - c) as f64 / n as f64)
                    .collect();
                (*class, rates)
            })
            .collect();

        Ok(RateCurve {
            thresholds,
            miss,
            fa,
        })
    }

    /// ASV curve: positives are targets; false-alarm classes are whichever of
    /// nontarget / spoof lists are non-empty.
    pub fn from_asv(scores: &AsvScoreSet) -> Result<Self, CurveError> {
        let mut neg: Vec<(NegClass, &[f64])> = Vec::new();
        if !scores.non.is_empty() {
            neg.push((NegClass::Nontarget, &scores.non));
        }
        if !scores.spf.is_empty() {
            neg.push((NegClass::Spoof, &scores.spf));
        }
        Self::build(&scores.tar, &neg)
    }

    /// CM curve: positives are the pooled bona fide scores, negatives spoofs.
    pub fn from_cm(scores: &CmScoreSet) -> Result<Self, CurveError> {
        Self::build(&scores.bona, &[(NegClass::Spoof, &scores.spf)])
    }

    /// Number of distinct thresholds `U`.
    pub fn num_thresholds(&self) -> usize {
        self.thresholds.len()
    }

    /// Number of operating points, `U + 1`.
    pub fn num_points(&self) -> usize {
        self.thresholds.len() + 1
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// Threshold value of operating point `k`; `-inf` for the accept-all
    /// point `k = 0`.
    pub fn threshold(&self, k: usize) -> f64 {
        if k == 0 {
            f64::NEG_INFINITY
        } else {
            self.thresholds[k - 1]
        }
    }

    /// Operating index whose threshold is `tau` (`-inf` maps to 0).
    /// Returns `None` when `tau` is not one of the curve's thresholds.
    pub fn index_of_threshold(&self, tau: f64) -> Option<usize> {
        if tau == f64::NEG_INFINITY {
            return Some(0);
        }
        self.thresholds
            .binary_search_by(|probe| probe.total_cmp(&tau))
            .ok()
            .map(|pos| pos + 1)
    }

    pub fn miss(&self, k: usize) -> f64 {
        self.miss[k]
    }

    pub fn miss_rates(&self) -> &[f64] {
        &self.miss
    }

    pub fn has_class(&self, class: NegClass) -> bool {
        self.fa.iter().any(|(c, _)| *c == class)
    }

    pub fn classes(&self) -> impl Iterator<Item = NegClass> + '_ {
        self.fa.iter().map(|(c, _)| *c)
    }

    pub fn fa_rates(&self, class: NegClass) -> Option<&[f64]> {
        self.fa
            .iter()
            .find(|(c, _)| *c == class)
            .map(|(_, rates)| rates.as_slice())
    }

    /// False-alarm rate of `class` at operating point `k`.
    ///
    /// Panics if the curve does not carry `class`; use [`Self::has_class`]
    /// at the boundary where that is not already guaranteed.
    pub fn fa(&self, class: NegClass, k: usize) -> f64 {
        self.fa_rates(class)
            .unwrap_or_else(|| panic!("curve has no `{class}` false-alarm class"))[k]
    }

    /// Conventional EER against one negative class.
    pub fn eer(&self, class: NegClass) -> Result<EerResult, CurveError> {
        let fa = self
            .fa_rates(class)
            .ok_or(CurveError::MissingClass(class))?;
        Ok(eer_from_rates(&self.miss, fa))
    }

    /// EER against the rho-weighted blend of the nontarget and spoof
    /// false-alarm rates, `(1 - rho) * fa_non + rho * fa_spf`. At `rho = 0`
    /// (`1`) this collapses exactly to the plain nontarget (spoof) EER, and
    /// only the class actually weighted needs to be present.
    pub fn eer_mixture(&self, rho: f64) -> Result<EerResult, CurveError> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(CurveError::PriorOutOfRange(rho));
        }
        if rho == 0.0 {
            return self.eer(NegClass::Nontarget);
        }
        if rho == 1.0 {
            return self.eer(NegClass::Spoof);
        }
        let fa_non = self
            .fa_rates(NegClass::Nontarget)
            .ok_or(CurveError::MissingClass(NegClass::Nontarget))?;
        let fa_spf = self
            .fa_rates(NegClass::Spoof)
            .ok_or(CurveError::MissingClass(NegClass::Spoof))?;
        let blended: Vec<f64> = fa_non
            .iter()
            .zip(fa_spf)
            .map(|(n, s)| (1.0 - rho) * n + rho * s)
            .collect();
        Ok(eer_from_rates(&self.miss, &blended))
    }

    /// Minimum over operating points of `prior * miss + (1 - prior) * fa`.
    /// Never exceeds the EER (evaluating the combination at the EER point
    /// witnesses the bound).
    pub fn weighted_error_min(&self, class: NegClass, prior: f64) -> Result<f64, CurveError> {
        if !(0.0..=1.0).contains(&prior) {
            return Err(CurveError::PriorOutOfRange(prior));
        }
        let fa = self
            .fa_rates(class)
            .ok_or(CurveError::MissingClass(class))?;
        let min = self
            .miss
            .iter()
            .zip(fa)
            .map(|(m, f)| prior * m + (1.0 - prior) * f)
            .fold(f64::INFINITY, f64::min);
        Ok(min)
    }

    /// Dump the curve as CSV: header `threshold,miss,fa_<class>...`, one row
    /// per operating point, `-inf` for the accept-all threshold. Thresholds
    /// and rates are written at full round-trip precision.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "threshold,miss")?;
        for (class, _) in &self.fa {
            write!(w, ",fa_{class}")?;
        }
        writeln!(w)?;
        for k in 0..self.num_points() {
            if k == 0 {
                write!(w, "-inf,{}", self.miss[k])?;
            } else {
                write!(w, "{},{}", self.thresholds[k - 1], self.miss[k])?;
            }
            for (_, rates) in &self.fa {
                write!(w, ",{}", rates[k])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn curve(pos: &[f64], non: &[f64]) -> RateCurve {
        RateCurve::build(pos, &[(NegClass::Nontarget, non)]).unwrap()
    }

    // Independent brute-force rate computation: direct counting per point.
    fn brute_rates(pos: &[f64], neg: &[f64], thresholds: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut miss = vec![0.0];
        let mut fa = vec![1.0];
        for &t in thresholds {
            let m = pos.iter().filter(|&&s| s <= t).count() as f64 / pos.len() as f64;
            let f = neg.iter().filter(|&&s| s > t).count() as f64 / neg.len() as f64;
            miss.push(m);
            fa.push(f);
        }
        (miss, fa)
    }

    #[test]
    fn separated_two_by_two_example() {
        let c = curve(&[1.0, 2.0], &[-2.0, -1.0]);
        assert_eq!(c.thresholds(), &[-2.0, -1.0, 1.0, 2.0]);
        assert_eq!(c.miss_rates(), &[0.0, 0.0, 0.0, 0.5, 1.0]);
        assert_eq!(
            c.fa_rates(NegClass::Nontarget).unwrap(),
            &[1.0, 0.5, 0.0, 0.0, 0.0]
        );
        let (bm, bf) = brute_rates(&[1.0, 2.0], &[-2.0, -1.0], c.thresholds());
        assert_eq!(c.miss_rates(), bm.as_slice());
        assert_eq!(c.fa_rates(NegClass::Nontarget).unwrap(), bf.as_slice());
    }

    #[test]
    fn tied_scores_single_threshold() {
        let c = curve(&[0.0], &[0.0]);
        assert_eq!(c.thresholds(), &[0.0]);
        assert_eq!(c.miss_rates(), &[0.0, 1.0]);
        assert_eq!(c.fa_rates(NegClass::Nontarget).unwrap(), &[1.0, 0.0]);
    }

    #[test]
    fn identical_lists_give_miss_plus_fa_one() {
        let scores = [0.3, -1.2, 0.3, 2.0, 0.7];
        let c = curve(&scores, &scores);
        let fa = c.fa_rates(NegClass::Nontarget).unwrap();
        for (k, f) in fa.iter().enumerate() {
            assert_eq!(c.miss(k) + f, 1.0);
        }
        assert_eq!(c.eer(NegClass::Nontarget).unwrap().eer, 0.5);
    }

    #[test]
    fn eer_zero_when_fully_separated() {
        let c = curve(&[1.0, 2.0], &[-2.0, -1.0]);
        let r = c.eer(NegClass::Nontarget).unwrap();
        assert_eq!(r.eer, 0.0);
        assert_eq!(r.miss_at, 0.0);
        assert_eq!(r.fa_at, 0.0);
        assert_eq!(r.threshold_index, 2);
    }

    #[test]
    fn eer_ties_break_to_smallest_index() {
        // pos == neg == [0]: both points have |miss - fa| = 1.
        let c = curve(&[0.0], &[0.0]);
        let r = c.eer(NegClass::Nontarget).unwrap();
        assert_eq!(r.threshold_index, 0);
        assert_eq!(r.eer, 0.5);
    }

    #[test]
    fn weighted_error_endpoints() {
        let c = curve(&[0.5, 1.0, -0.5], &[-1.0, 0.0, 0.25]);
        assert_eq!(c.weighted_error_min(NegClass::Nontarget, 0.0).unwrap(), 0.0);
        assert_eq!(c.weighted_error_min(NegClass::Nontarget, 1.0).unwrap(), 0.0);
        assert!(c.weighted_error_min(NegClass::Nontarget, 1.5).is_err());
    }

    #[test]
    fn build_rejects_bad_input() {
        assert!(matches!(
            RateCurve::build(&[], &[(NegClass::Nontarget, &[0.0][..])]),
            Err(CurveError::EmptyPositive)
        ));
        assert!(matches!(
            RateCurve::build(&[0.0], &[]),
            Err(CurveError::NoNegatives)
        ));
        assert!(matches!(
            RateCurve::build(&[0.0], &[(NegClass::Spoof, &[][..])]),
            Err(CurveError::EmptyClass(NegClass::Spoof))
        ));
        assert!(matches!(
            RateCurve::build(&[f64::NAN], &[(NegClass::Spoof, &[0.0][..])]),
            Err(CurveError::NonFiniteScore)
        ));
    }

    #[test]
    fn csv_dump_matches_layout() {
        let c = curve(&[1.0], &[0.0]);
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "threshold,miss,fa_nontarget\n-inf,0,1\n0,0,0\n1,1,0\n"
        );
    }

    #[test]
    fn index_of_threshold_round_trips() {
        let c = curve(&[1.0, 2.5], &[-3.0, 0.5]);
        for k in 0..c.num_points() {
            assert_eq!(c.index_of_threshold(c.threshold(k)), Some(k));
        }
        assert_eq!(c.index_of_threshold(9.0), None);
    }

    prop_compose! {
        fn score_vec(max_len: usize)(v in prop::collection::vec(-5.0f64..5.0, 1..max_len)) -> Vec<f64> {
            // round some mass onto a coarse grid so ties occur
            v.into_iter().map(|x| (x * 4.0).round() / 4.0).collect()
        }
    }

    proptest! {
        #[test]
        fn rates_match_brute_force(pos in score_vec(40), neg in score_vec(40)) {
            let c = curve(&pos, &neg);
            let (bm, bf) = brute_rates(&pos, &neg, c.thresholds());
            prop_assert_eq!(c.miss_rates(), bm.as_slice());
            prop_assert_eq!(c.fa_rates(NegClass::Nontarget).unwrap(), bf.as_slice());
        }

        #[test]
        fn monotone_with_exact_boundaries(pos in score_vec(60), neg in score_vec(60)) {
            let c = curve(&pos, &neg);
            let miss = c.miss_rates();
            let fa = c.fa_rates(NegClass::Nontarget).unwrap();
            prop_assert_eq!(miss[0], 0.0);
            prop_assert_eq!(*miss.last().unwrap(), 1.0);
            prop_assert_eq!(fa[0], 1.0);
            prop_assert_eq!(*fa.last().unwrap(), 0.0);
            for k in 1..miss.len() {
                prop_assert!(miss[k] >= miss[k - 1]);
                prop_assert!(fa[k] <= fa[k - 1]);
            }
        }

        #[test]
        fn eer_invariant_under_increasing_transforms(pos in score_vec(50), neg in score_vec(50)) {
            let base = curve(&pos, &neg).eer(NegClass::Nontarget).unwrap();
            for transform in [|x: f64| x.exp(), |x: f64| x * x * x + 2.0 * x] {
                let tp: Vec<f64> = pos.iter().map(|&x| transform(x)).collect();
                let tn: Vec<f64> = neg.iter().map(|&x| transform(x)).collect();
                let t = curve(&tp, &tn).eer(NegClass::Nontarget).unwrap();
                prop_assert_eq!(t.threshold_index, base.threshold_index);
                prop_assert_eq!(t.miss_at, base.miss_at);
                prop_assert_eq!(t.fa_at, base.fa_at);
            }
        }

        #[test]
        fn weighted_error_never_exceeds_eer(pos in score_vec(50), neg in score_vec(50), prior in 0.0f64..=1.0) {
            let c = curve(&pos, &neg);
            let eer = c.eer(NegClass::Nontarget).unwrap().eer;
            let w = c.weighted_error_min(NegClass::Nontarget, prior).unwrap();
            let slack = 1.0 / pos.len().min(neg.len()) as f64;
            prop_assert!(w <= eer + slack + 1e-12);
        }
    }
}
