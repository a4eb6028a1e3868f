//! Feasibility regions and discrete t-EER path construction.
//!
//! For a fixed spoof prevalence `rho`, the t-EER path is the set of threshold
//! pairs at which the tandem miss rate equals the total tandem false-alarm
//! rate. On empirical curves the path is discrete: one CM operating index per
//! feasible ASV operating index, which keeps memory linear in the number of
//! trials instead of materializing the full cross-product table.
//!
//! An ASV operating point `i` admits a matching CM point at all when its
//! total false-alarm rate is at least its miss rate:
//!
//! ```text
//! (1 - rho) * fa_non[i] + rho * fa_spf[i] >= miss[i]
//! ```
//!
//! and dually a CM point `j` is feasible when
//! `1 - rho + rho * fa_cm[j] >= (2 - rho) * miss_cm[j]`. Both left-hand
//! sides are non-increasing and both right-hand sides non-decreasing in the
//! index, so each feasible set is a prefix `{0, .., critical}`; index 0
//! (accept-all) is always feasible and the reject-all endpoint never is.
//!
//! For a feasible `i`, the residual `miss_tdm(i, j) - fa_tdm(i, j)` is
//! non-decreasing in `j` (the tandem miss rises and the tandem false-alarm
//! falls as the CM threshold grows), starts non-positive and ends at `+1`,
//! so the sign change is located by binary search. Of the two bracketing
//! indices the one with smaller absolute residual wins, smaller index on
//! ties; when duplicate scores create a plateau of equally good indices the
//! smallest one is stored and the plateau width is surfaced for diagnostics.

use std::io::{self, Write};

use thiserror::Error;

use crate::curves::{NegClass, RateCurve};
use crate::tandem::{tandem_fa_total, tandem_rates_at, SpoofPrevalence, TandemRates};

#[derive(Error, Debug)]
pub enum PathError {
    #[error("ASV curve lacks the `{0}` false-alarm class required for tandem rates")]
    MissingAsvClass(NegClass),
    #[error("CM curve lacks its spoof false-alarm class")]
    MissingCmClass,
}

/// One discrete point of a t-EER path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathEntry {
    pub asv_index: usize,
    pub cm_index: usize,
    pub asv_threshold: f64,
    pub cm_threshold: f64,
    /// Midpoint of tandem miss and total false-alarm rates at this point.
    pub teer: f64,
    /// `miss_tdm - fa_tdm` at this point; minimal in absolute value over the
    /// CM indices available for `asv_index`.
    pub residual: f64,
    /// Number of consecutive CM indices sharing this entry's residual value
    /// (greater than 1 when duplicate scores flatten the residual).
    pub plateau_width: usize,
}

/// Discrete t-EER path for one spoof prevalence: one entry per feasible ASV
/// operating index, in index order. Memory is `O(N + M)`.
#[derive(Clone, Debug)]
pub struct TeerPath {
    rho: SpoofPrevalence,
    entries: Vec<PathEntry>,
    asv_critical_index: usize,
    cm_critical_index: usize,
}

/// Lemma-style ASV feasibility: total ASV false-alarm rate at point `i` is at
/// least the ASV miss rate.
pub fn asv_feasible(asv: &RateCurve, rho: SpoofPrevalence, i: usize) -> bool {
    let fa = tandem_fa_total(
        rho,
        asv.fa(NegClass::Nontarget, i),
        asv.fa(NegClass::Spoof, i),
    );
    fa >= asv.miss(i)
}

/// Dual CM feasibility: `1 - rho + rho * fa_cm[j] >= (2 - rho) * miss_cm[j]`.
pub fn cm_feasible(cm: &RateCurve, rho: SpoofPrevalence, j: usize) -> bool {
    let r = rho.value();
    1.0 - r + r * cm.fa(NegClass::Spoof, j) >= (2.0 - r) * cm.miss(j)
}

fn residual_at(asv: &RateCurve, cm: &RateCurve, rho: SpoofPrevalence, i: usize, j: usize) -> (TandemRates, f64) {
    let rates = tandem_rates_at(asv, cm, i, j);
    let fa = tandem_fa_total(rho, rates.fa_non, rates.fa_spf);
    (rates, rates.miss - fa)
}

// First j in [0, n) with pred(j) true; n if none. pred must be monotone.
fn partition_point(n: usize, mut pred: impl FnMut(usize) -> bool) -> usize {
    let mut lo = 0usize;
    let mut hi = n;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// Build the discrete t-EER path. Requires an ASV curve carrying both
/// false-alarm classes and a CM curve carrying its spoof class.
pub fn build_teer_path(
    asv: &RateCurve,
    cm: &RateCurve,
    rho: SpoofPrevalence,
) -> Result<TeerPath, PathError> {
    for class in [NegClass::Nontarget, NegClass::Spoof] {
        if !asv.has_class(class) {
            return Err(PathError::MissingAsvClass(class));
        }
    }
    if !cm.has_class(NegClass::Spoof) {
        return Err(PathError::MissingCmClass);
    }

    let m = cm.num_points();
    let mut entries = Vec::new();
    for i in 0..asv.num_points() {
        if !asv_feasible(asv, rho, i) {
            break;
        }
        let resid = |j: usize| residual_at(asv, cm, rho, i, j).1;

        // First CM index with non-negative residual. The residual at the last
        // CM point is 1 - 0 > 0, so `first_pos < m` always.
        let first_pos = partition_point(m, |j| resid(j) >= 0.0);
        let chosen = if first_pos == 0 {
            0
        } else {
            let below = resid(first_pos - 1).abs();
            let above = resid(first_pos).abs();
            if below <= above {
                first_pos - 1
            } else {
                first_pos
            }
        };

        // Canonicalize a residual plateau (possible with duplicate scores) to
        // its smallest index; the residual is monotone so both plateau edges
        // are found by bisection.
        let value = resid(chosen);
        let start = partition_point(chosen, |j| resid(j) >= value);
        let end = partition_point(m - chosen - 1, |j| resid(chosen + 1 + j) > value) + chosen;

        let (rates, residual) = residual_at(asv, cm, rho, i, start);
        let fa = tandem_fa_total(rho, rates.fa_non, rates.fa_spf);
        entries.push(PathEntry {
            asv_index: i,
            cm_index: start,
            asv_threshold: asv.threshold(i),
            cm_threshold: cm.threshold(start),
            teer: 0.5 * (rates.miss + fa),
            residual,
            plateau_width: end - start + 1,
        });
    }
    debug_assert!(!entries.is_empty(), "index 0 is always feasible");

    let cm_critical_index = partition_point(m, |j| !cm_feasible(cm, rho, j)).saturating_sub(1);
    let asv_critical_index = entries.last().map(|e| e.asv_index).unwrap_or(0);

    Ok(TeerPath {
        rho,
        entries,
        asv_critical_index,
        cm_critical_index,
    })
}

impl TeerPath {
    pub fn rho(&self) -> SpoofPrevalence {
        self.rho
    }

    pub fn entries(&self) -> &[PathEntry] {
        &self.entries
    }

    /// Largest feasible ASV operating index.
    pub fn asv_critical_index(&self) -> usize {
        self.asv_critical_index
    }

    /// Largest feasible CM operating index.
    pub fn cm_critical_index(&self) -> usize {
        self.cm_critical_index
    }

    /// `(asv_threshold, teer)` pairs for plotting the t-EER value along the
    /// path; the accept-all entry carries a `-inf` threshold.
    pub fn teer_along_path(&self) -> Vec<(f64, f64)> {
        self.entries.iter().map(|e| (e.asv_threshold, e.teer)).collect()
    }

    /// CSV export: `rho,asv_threshold,cm_threshold,teer,residual` with `-inf`
    /// sentinels and full round-trip float precision.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "rho,asv_threshold,cm_threshold,teer,residual")?;
        self.write_csv_rows(&mut w)
    }

    /// Rows only, for concatenating several paths under one header.
    pub fn write_csv_rows<W: Write>(&self, mut w: W) -> io::Result<()> {
        for e in &self.entries {
            writeln!(
                w,
                "{},{},{},{},{}",
                self.rho.value(),
                fmt_threshold(e.asv_threshold),
                fmt_threshold(e.cm_threshold),
                e.teer,
                e.residual
            )?;
        }
        Ok(())
    }
}

fn fmt_threshold(t: f64) -> String {
    if t == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{t}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::RateCurve;
    use crate::score_io::{AsvScoreSet, CmScoreSet};
    use crate::tandem;

    fn rho(v: f64) -> SpoofPrevalence {
        SpoofPrevalence::new(v).unwrap()
    }

    // Deterministic scores from a splitmix-style generator, optionally
    // rounded so duplicate values occur.
    fn scores(seed: &mut u64, n: usize, shift: f64, grid: bool) -> Vec<f64> {
        (0..n)
            .map(|_| {
                *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let u = (*seed >> 11) as f64 / (1u64 << 53) as f64;
                let x = 4.0 * u - 2.0 + shift;
                if grid {
                    (x * 8.0).round() / 8.0
                } else {
                    x
                }
            })
            .collect()
    }

    fn random_curves(seed: u64, n: usize, m: usize, grid: bool) -> (RateCurve, RateCurve) {
        let mut s = seed.wrapping_add(1);
        let asv = AsvScoreSet {
            tar: scores(&mut s, n, 1.0, grid),
            non: scores(&mut s, n, -1.0, grid),
            spf: scores(&mut s, n, -0.2, grid),
        };
        let cm = CmScoreSet {
            bona: scores(&mut s, m, 0.8, grid),
            spf: scores(&mut s, m, -0.8, grid),
        };
        (
            RateCurve::from_asv(&asv).unwrap(),
            RateCurve::from_cm(&cm).unwrap(),
        )
    }

    // O(N * M) reference: scan every CM index per feasible ASV index.
    fn brute_force_path(asv: &RateCurve, cm: &RateCurve, rho: SpoofPrevalence) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..asv.num_points() {
            if !asv_feasible(asv, rho, i) {
                break;
            }
            let mut best = 0usize;
            let mut best_abs = f64::INFINITY;
            for j in 0..cm.num_points() {
                let (_, r) = residual_at(asv, cm, rho, i, j);
                if r.abs() < best_abs {
                    best_abs = r.abs();
                    best = j;
                }
            }
            let (rates, _) = residual_at(asv, cm, rho, i, best);
            let fa = tandem::tandem_fa_total(rho, rates.fa_non, rates.fa_spf);
            out.push((i, best, 0.5 * (rates.miss + fa)));
        }
        out
    }

    #[test]
    fn feasibility_endpoints() {
        let (asv, cm) = random_curves(7, 40, 30, false);
        for r in [0.0, 0.3, 1.0] {
            assert!(asv_feasible(&asv, rho(r), 0));
            assert!(!asv_feasible(&asv, rho(r), asv.num_points() - 1));
            assert!(cm_feasible(&cm, rho(r), 0));
        }
        // reject-all CM at rho = 0: 1 >= 2 fails
        assert!(!cm_feasible(&cm, rho(0.0), cm.num_points() - 1));
    }

    #[test]
    fn feasible_sets_are_prefixes() {
        for seed in 0..30 {
            let (asv, cm) = random_curves(seed, 25, 35, seed % 2 == 0);
            for r10 in 0..=10 {
                let r = rho(r10 as f64 / 10.0);
                let mut seen_infeasible = false;
                for i in 0..asv.num_points() {
                    let ok = asv_feasible(&asv, r, i);
                    assert!(!(ok && seen_infeasible), "ASV feasibility not a prefix");
                    seen_infeasible |= !ok;
                }
                seen_infeasible = false;
                for j in 0..cm.num_points() {
                    let ok = cm_feasible(&cm, r, j);
                    assert!(!(ok && seen_infeasible), "CM feasibility not a prefix");
                    seen_infeasible |= !ok;
                }
            }
        }
    }

    #[test]
    fn matches_brute_force_scan() {
        for seed in 0..40 {
            let grid = seed % 2 == 0;
            let (asv, cm) = random_curves(seed, 30 + (seed as usize % 50), 20 + (seed as usize % 60), grid);
            for r in [0.0, 0.3, 1.0] {
                let path = build_teer_path(&asv, &cm, rho(r)).unwrap();
                let reference = brute_force_path(&asv, &cm, rho(r));
                assert_eq!(path.entries().len(), reference.len());
                for (e, (i, j, teer)) in path.entries().iter().zip(&reference) {
                    assert_eq!(e.asv_index, *i);
                    assert_eq!(e.cm_index, *j);
                    assert_eq!(e.teer, *teer);
                }
            }
        }
    }

    #[test]
    fn accept_all_asv_entry_at_rho_zero_is_half() {
        let (asv, cm) = random_curves(3, 50, 45, false);
        let path = build_teer_path(&asv, &cm, rho(0.0)).unwrap();
        assert_eq!(path.entries()[0].asv_index, 0);
        assert_eq!(path.entries()[0].teer, 0.5);
    }

    #[test]
    fn accept_all_asv_entry_at_rho_one_matches_cm_eer() {
        let (asv, cm) = random_curves(11, 60, 80, true);
        let path = build_teer_path(&asv, &cm, rho(1.0)).unwrap();
        let cm_eer = cm.eer(NegClass::Spoof).unwrap();
        assert!((path.entries()[0].teer - cm_eer.eer).abs() <= 1e-12);
    }

    #[test]
    fn last_entry_tracks_asv_mixture_eer() {
        for (seed, r) in [(5u64, 0.0), (9, 1.0), (13, 0.3)] {
            let (asv, cm) = random_curves(seed, 120, 90, false);
            let path = build_teer_path(&asv, &cm, rho(r)).unwrap();
            let last = path.entries().last().unwrap();
            let asv_eer = asv.eer_mixture(r).unwrap();
            // the two locations bracket the same crossing of the mixture
            // rates; tolerate the local movement on both the ASV and CM axes
            let clamp = |k: usize| k.min(asv.num_points() - 1);
            let fa_mix = |k: usize| {
                tandem::tandem_fa_total(
                    rho(r),
                    asv.fa(NegClass::Nontarget, clamp(k)),
                    asv.fa(NegClass::Spoof, clamp(k)),
                )
            };
            let i = asv_eer.threshold_index;
            let asv_step: f64 = [i.saturating_sub(1), i, i + 1]
                .windows(2)
                .map(|w| {
                    (asv.miss(clamp(w[1])) - asv.miss(w[0])).abs()
                        + (fa_mix(w[1]) - fa_mix(w[0])).abs()
                })
                .fold(0.0, f64::max);
            let j_next = (last.cm_index + 1).min(cm.num_points() - 1);
            let (_, r_lo) = residual_at(&asv, &cm, rho(r), last.asv_index, last.cm_index);
            let (_, r_hi) = residual_at(&asv, &cm, rho(r), last.asv_index, j_next);
            let cm_step = (r_hi - r_lo).abs();
            assert!(
                (last.teer - asv_eer.eer).abs() <= asv_step + cm_step + 1e-12,
                "rho={r}: last teer {} vs mixture eer {} (steps {asv_step}, {cm_step})",
                last.teer,
                asv_eer.eer
            );
        }
    }

    #[test]
    fn residual_bounded_by_local_step() {
        for seed in [2u64, 8, 21] {
            let (asv, cm) = random_curves(seed, 70, 55, seed % 2 == 0);
            for r in [0.0, 0.5, 1.0] {
                let path = build_teer_path(&asv, &cm, rho(r)).unwrap();
                for e in path.entries() {
                    // discrete bracketing: the entry's residual cannot beat
                    // the largest single-step move available at its ASV index
                    let resid = |jj: usize| residual_at(&asv, &cm, rho(r), e.asv_index, jj).1;
                    let max_step = (1..cm.num_points())
                        .map(|j| (resid(j) - resid(j - 1)).abs())
                        .fold(0.0, f64::max);
                    assert!(
                        e.residual.abs() <= max_step + 1e-12,
                        "entry ({}, {}) residual {} exceeds max step {}",
                        e.asv_index,
                        e.cm_index,
                        e.residual,
                        max_step
                    );
                }
            }
        }
    }

    #[test]
    fn separated_cm_reduces_path_to_asv_at_rho_zero() {
        // a CM that fully separates its classes can be configured to pass
        // every bona fide trial: along the rho = 0 path, the entry at the
        // ASV EER index carries (essentially) the plain ASV EER
        let mut s = 77u64;
        let asv = AsvScoreSet {
            tar: scores(&mut s, 400, 1.0, false),
            non: scores(&mut s, 400, -1.0, false),
            spf: scores(&mut s, 400, -0.3, false),
        };
        let cm = CmScoreSet {
            bona: scores(&mut s, 100, 10.0, false),
            spf: scores(&mut s, 100, -10.0, false),
        };
        let asv = RateCurve::from_asv(&asv).unwrap();
        let cm = RateCurve::from_cm(&cm).unwrap();
        let asv_eer = asv.eer(NegClass::Nontarget).unwrap();
        let path = build_teer_path(&asv, &cm, rho(0.0)).unwrap();
        // the EER crossing straddles the feasibility boundary; the EER index
        // is either on the path or one step past its end
        let entry = path
            .entries()
            .iter()
            .find(|e| e.asv_index == asv_eer.threshold_index)
            .unwrap_or_else(|| path.entries().last().unwrap());
        let k = asv_eer.threshold_index.min(asv.num_points() - 2);
        let gap = |k: usize| asv.miss(k) - asv.fa(NegClass::Nontarget, k);
        let step = (gap(k + 1) - gap(k)).abs().max((gap(k) - gap(k.saturating_sub(1))).abs());
        assert!(
            (entry.teer - asv_eer.eer).abs() <= step + 1e-12,
            "teer {} vs asv eer {}",
            entry.teer,
            asv_eer.eer
        );
    }

    #[test]
    fn rho_one_path_starts_at_the_cm_eer_asymptote() {
        // while the ASV threshold is low enough to pass every target, the
        // rho = 1 path value stays pinned at the CM EER
        let mut s = 31u64;
        let asv = AsvScoreSet {
            tar: scores(&mut s, 300, 1.5, false),
            non: scores(&mut s, 300, -1.5, false),
            spf: scores(&mut s, 300, -0.5, false),
        };
        let cm = CmScoreSet {
            bona: scores(&mut s, 300, 0.8, false),
            spf: scores(&mut s, 300, -0.8, false),
        };
        let asv = RateCurve::from_asv(&asv).unwrap();
        let cm = RateCurve::from_cm(&cm).unwrap();
        let cm_eer = cm.eer(NegClass::Spoof).unwrap().eer;
        let path = build_teer_path(&asv, &cm, rho(1.0)).unwrap();
        let flat: Vec<&PathEntry> = path
            .entries()
            .iter()
            .take_while(|e| asv.miss(e.asv_index) == 0.0 && asv.fa(NegClass::Spoof, e.asv_index) == 1.0)
            .collect();
        assert!(flat.len() > 1);
        for e in flat {
            assert!(
                (e.teer - cm_eer).abs() <= 1e-9,
                "asymptote broken at entry {}: {} vs {}",
                e.asv_index,
                e.teer,
                cm_eer
            );
        }
    }

    #[test]
    fn plateau_resolves_to_smallest_index() {
        // heavy ties: every CM score equal
        let asv = AsvScoreSet {
            tar: vec![1.0, 2.0],
            non: vec![-1.0, 0.5],
            spf: vec![-0.5, 1.5],
        };
        let cm = CmScoreSet {
            bona: vec![0.0, 0.0],
            spf: vec![0.0, 0.0],
        };
        let asv = RateCurve::from_asv(&asv).unwrap();
        let cm = RateCurve::from_cm(&cm).unwrap();
        let path = build_teer_path(&asv, &cm, rho(0.5)).unwrap();
        let reference = brute_force_path(&asv, &cm, rho(0.5));
        for (e, (i, j, teer)) in path.entries().iter().zip(&reference) {
            assert_eq!((e.asv_index, e.cm_index, e.teer), (*i, *j, *teer));
        }
    }

    #[test]
    fn single_entry_path_yields_single_plot_row() {
        // all ASV scores tied: only the accept-all point is feasible
        let asv = AsvScoreSet {
            tar: vec![0.0],
            non: vec![0.0],
            spf: vec![0.0],
        };
        let cm = CmScoreSet {
            bona: vec![0.5],
            spf: vec![-0.5],
        };
        let asv = RateCurve::from_asv(&asv).unwrap();
        let cm = RateCurve::from_cm(&cm).unwrap();
        let path = build_teer_path(&asv, &cm, rho(0.0)).unwrap();
        assert_eq!(path.entries().len(), 1);
        let along = path.teer_along_path();
        assert_eq!(along.len(), 1);
        assert_eq!(along[0].0, f64::NEG_INFINITY);
    }

    #[test]
    fn csv_export_layout() {
        let (asv, cm) = random_curves(4, 10, 10, false);
        let path = build_teer_path(&asv, &cm, rho(0.0)).unwrap();
        let mut buf = Vec::new();
        path.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("rho,asv_threshold,cm_threshold,teer,residual"));
        assert_eq!(text.lines().count(), path.entries().len() + 1);
        let first_row = text.lines().nth(1).unwrap();
        assert!(first_row.starts_with("0,-inf,"));
        assert_eq!(
            path.teer_along_path().len(),
            path.entries().len()
        );
    }
}
