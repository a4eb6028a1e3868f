//! Synthetic bivariate-Gaussian score generation and exact rate oracles.
//!
//! Score sets are drawn from three bivariate normal distributions with
//! diagonal (identity) covariance, one per tandem class, parameterized purely
//! by the per-system EERs. Targets sit at the origin; nontargets are shifted
//! on the ASV axis by the two-Gaussian separation matching `eer_asv_non`;
//! spoofs are shifted on both axes by the separations matching `eer_asv_spf`
//! and `eer_cm`. Since every metric in this crate depends on score order
//! only, any affine-equivalent layout would produce identical results.
//!
//! Sampling applies the inverse normal CDF to uniforms from a seeded
//! counter-based stream cipher (ChaCha), one independent stream per class,
//! so identical parameters reproduce identical scores bit for bit across
//! runs and platforms.
//!
//! The closed-form `oracle_*` functions evaluate the same class geometry
//! exactly and exist to validate the empirical estimators: subsystem rates
//! are plain normal CDF evaluations and the concurrent t-EER solves the
//! path-intersection system by nested bisection.

use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

use crate::score_io::{AsvScoreSet, CmScoreSet, PairedRow, PairedScoreSet, TrialClass};

#[derive(Error, Debug)]
pub enum SimError {
    #[error("{name} = {value} outside the open interval (0, 0.5)")]
    EerOutOfRange { name: &'static str, value: f64 },
    #[error("n_per_class must be positive")]
    ZeroSamples,
    #[error("no path intersection exists for these parameters (ASV rejects spoofs more readily than nontargets)")]
    NoIntersection,
    #[error("root search did not converge within the iteration budget")]
    NoConvergence,
}

/// Parameters of the three-class Gaussian score model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimulationParams {
    pub eer_asv_non: f64,
    pub eer_asv_spf: f64,
    pub eer_cm: f64,
    pub n_per_class: usize,
    pub seed: u64,
}

impl SimulationParams {
    pub fn new(
        eer_asv_non: f64,
        eer_asv_spf: f64,
        eer_cm: f64,
        n_per_class: usize,
        seed: u64,
    ) -> Result<Self, SimError> {
        for (name, value) in [
            ("eer_asv_non", eer_asv_non),
            ("eer_asv_spf", eer_asv_spf),
            ("eer_cm", eer_cm),
        ] {
            if !(value > 0.0 && value < 0.5) {
                return Err(SimError::EerOutOfRange { name, value });
            }
        }
        if n_per_class == 0 {
            return Err(SimError::ZeroSamples);
        }
        Ok(SimulationParams {
            eer_asv_non,
            eer_asv_spf,
            eer_cm,
            n_per_class,
            seed,
        })
    }
}

/// Standard normal CDF via the complementary error function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal survival function `1 - cdf(x)`, computed without
/// cancellation.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

// Acklam's rational approximation of the standard normal quantile
// (max relative error about 1.15e-9), tightened to near machine precision
// with one Halley step against the erfc-based CDF.
fn quantile_estimate(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.38357751867269e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    // libm transcendentals keep the draw stream bit-identical across
    // platforms; sqrt is IEEE-exact everywhere
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if p < P_LOW {
        tail((-2.0 * libm::log(p)).sqrt())
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * libm::log(1.0 - p)).sqrt())
    }
}

/// Standard normal quantile for `p` strictly inside `(0, 1)`.
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile domain is the open unit interval");
    let x = quantile_estimate(p);
    // Halley refinement
    let e = normal_cdf(x) - p;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * libm::exp(x * x / 2.0);
    x - u / (1.0 + x * u / 2.0)
}

/// Mean separation of two unit-variance Gaussians whose EER is `eer`:
/// `d = -2 * quantile(eer)`, so that `cdf(-d / 2) = eer`.
pub fn gaussian_separation(eer: f64) -> Result<f64, SimError> {
    if !(eer > 0.0 && eer < 0.5) {
        return Err(SimError::EerOutOfRange {
            name: "eer",
            value: eer,
        });
    }
    Ok(-2.0 * normal_quantile(eer))
}

// Uniform strictly inside (0, 1): 53 high bits plus a half step.
fn open01(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

struct ClassGeometry {
    d_non: f64,
    d_spf: f64,
    d_cm: f64,
}

fn geometry(p: &SimulationParams) -> ClassGeometry {
    ClassGeometry {
        d_non: gaussian_separation(p.eer_asv_non).expect("validated"),
        d_spf: gaussian_separation(p.eer_asv_spf).expect("validated"),
        d_cm: gaussian_separation(p.eer_cm).expect("validated"),
    }
}

/// The three consistent views of one simulated draw.
#[derive(Clone, Debug)]
pub struct SimulatedScores {
    pub asv: AsvScoreSet,
    pub cm: CmScoreSet,
    pub paired: PairedScoreSet,
}

/// Draw `n_per_class` paired scores per class. The ASV and CM sets are the
/// marginal views of the same draws; the CM bona fide pool is the target CM
/// scores followed by the nontarget CM scores.
pub fn simulate_scores(p: &SimulationParams) -> SimulatedScores {
    use rand_chacha::ChaCha8Rng;

    let g = geometry(p);
    let draw_class = |stream: u64, asv_shift: f64, cm_shift: f64| -> Vec<(f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        rng.set_stream(stream);
        (0..p.n_per_class)
            .map(|_| {
                let asv = normal_quantile(open01(rng.next_u64())) + asv_shift;
                let cm = normal_quantile(open01(rng.next_u64())) + cm_shift;
                (asv, cm)
            })
            .collect()
    };

    let target = draw_class(0, 0.0, 0.0);
    let nontarget = draw_class(1, -g.d_non, 0.0);
    let spoof = draw_class(2, -g.d_spf, -g.d_cm);

    let asv = AsvScoreSet {
        tar: target.iter().map(|&(a, _)| a).collect(),
        non: nontarget.iter().map(|&(a, _)| a).collect(),
        spf: spoof.iter().map(|&(a, _)| a).collect(),
    };
    let cm = CmScoreSet {
        bona: target
            .iter()
            .chain(&nontarget)
            .map(|&(_, c)| c)
            .collect(),
        spf: spoof.iter().map(|&(_, c)| c).collect(),
    };
    let mut rows = Vec::with_capacity(3 * p.n_per_class);
    for (class, draws) in [
        (TrialClass::Target, &target),
        (TrialClass::Nontarget, &nontarget),
        (TrialClass::Spoof, &spoof),
    ] {
        rows.extend(draws.iter().map(|&(asv, cm)| PairedRow {
            asv,
            cm,
            class,
            attack_id: None,
        }));
    }

    SimulatedScores {
        asv,
        cm,
        paired: PairedScoreSet { rows },
    }
}

/// Exact subsystem rates of the Gaussian model at a threshold pair.
/// Infinite thresholds give the usual CDF limits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleRates {
    pub asv_miss: f64,
    pub asv_fa_non: f64,
    pub asv_fa_spf: f64,
    pub cm_miss: f64,
    pub cm_fa: f64,
}

pub fn oracle_rates(p: &SimulationParams, tau_asv: f64, tau_cm: f64) -> OracleRates {
    let g = geometry(p);
    OracleRates {
        asv_miss: normal_cdf(tau_asv),
        asv_fa_non: normal_sf(tau_asv + g.d_non),
        asv_fa_spf: normal_sf(tau_asv + g.d_spf),
        cm_miss: normal_cdf(tau_cm),
        cm_fa: normal_sf(tau_cm + g.d_cm),
    }
}

/// Exact concurrent t-EER of the Gaussian model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleConcurrent {
    pub tau_asv: f64,
    /// `-inf` when the intersection sits on the feasibility boundary, which
    /// happens when nontargets and spoofs share the ASV distribution.
    pub tau_cm: f64,
    pub teer: f64,
}

const OUTER_ITERS: usize = 200;
const INNER_ITERS: usize = 120;
const RESIDUAL_TOL: f64 = 1e-10;

/// Solve the path-intersection system on the exact Gaussian rates: an outer
/// bisection on the ASV threshold over its feasible range, an inner bisection
/// on the CM threshold for the `rho = 0` path condition, with the
/// cross-multiplied intersection condition as the outer residual.
pub fn oracle_concurrent_teer(p: &SimulationParams) -> Result<OracleConcurrent, SimError> {
    let g = geometry(p);
    let fa_non = |ta: f64| normal_sf(ta + g.d_non);
    let fa_spf = |ta: f64| normal_sf(ta + g.d_spf);
    let cm_fa = |tc: f64| normal_sf(tc + g.d_cm);

    // rho = 0 path condition at fixed tau_asv, solved for tau_cm; the
    // residual is monotone increasing in tau_cm.
    let inner_tc = |ta: f64| -> f64 {
        let miss_asv = normal_cdf(ta);
        let fan = fa_non(ta);
        let path_residual = |tc: f64| {
            let miss_cm = normal_cdf(tc);
            miss_asv + (1.0 - miss_asv) * miss_cm - (1.0 - miss_cm) * fan
        };
        let mut lo = -46.0;
        let mut hi = 46.0;
        for _ in 0..INNER_ITERS {
            let mid = 0.5 * (lo + hi);
            if path_residual(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };

    let cross = |ta: f64, tc: f64| {
        fa_non(ta) * (1.0 - normal_cdf(tc)) - cm_fa(tc) * fa_spf(ta)
    };

    // ASV feasibility boundary for rho = 0 (miss = fa_non) in closed form.
    let ta_star = -g.d_non / 2.0;
    // Limit of the cross residual as tau_asv approaches the boundary (the
    // matched tau_cm diverges to -inf there).
    let boundary_gap = fa_non(ta_star) - fa_spf(ta_star);

    if boundary_gap.abs() <= 1e-9 {
        // Root on the boundary: the tandem degenerates to the ASV alone.
        return Ok(OracleConcurrent {
            tau_asv: ta_star,
            tau_cm: f64::NEG_INFINITY,
            teer: fa_spf(ta_star),
        });
    }
    if boundary_gap > 0.0 {
        return Err(SimError::NoIntersection);
    }

    let mut lo = ta_star - 30.0;
    let mut hi = ta_star;
    if cross(lo, inner_tc(lo)) <= 0.0 {
        return Err(SimError::NoConvergence);
    }
    for _ in 0..OUTER_ITERS {
        let mid = 0.5 * (lo + hi);
        if cross(mid, inner_tc(mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let ta = 0.5 * (lo + hi);
    let tc = inner_tc(ta);
    if cross(ta, tc).abs() > RESIDUAL_TOL {
        return Err(SimError::NoConvergence);
    }
    Ok(OracleConcurrent {
        tau_asv: ta,
        tau_cm: tc,
        teer: fa_spf(ta) * cm_fa(tc),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{NegClass, RateCurve};

    fn fig_style_params(n: usize, seed: u64) -> SimulationParams {
        SimulationParams::new(0.08, 0.35, 0.10, n, seed).unwrap()
    }

    #[test]
    fn params_validate_ranges() {
        assert!(matches!(
            SimulationParams::new(0.6, 0.3, 0.1, 10, 0),
            Err(SimError::EerOutOfRange { name: "eer_asv_non", .. })
        ));
        assert!(matches!(
            SimulationParams::new(0.1, 0.3, 0.1, 0, 0),
            Err(SimError::ZeroSamples)
        ));
        assert!(gaussian_separation(0.0).is_err());
        assert!(gaussian_separation(0.5).is_err());
    }

    #[test]
    fn quantile_round_trips_against_cdf() {
        let mut e = 0.01;
        while e < 0.495 {
            let d = gaussian_separation(e).unwrap();
            assert!(
                (normal_cdf(-d / 2.0) - e).abs() < 1e-8,
                "round trip failed at eer={e}"
            );
            e += 0.005;
        }
    }

    #[test]
    fn separation_two_at_known_eer() {
        // eer = cdf(-1) corresponds to unit-variance means two apart
        let eer = normal_cdf(-1.0);
        assert!((eer - 0.15865525393145707).abs() < 1e-12);
        assert!((gaussian_separation(eer).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn separation_shrinks_near_half() {
        assert!(gaussian_separation(0.499999).unwrap() < 1e-4);
    }

    #[test]
    fn identical_seeds_reproduce_identical_draws() {
        let p = fig_style_params(500, 123);
        let a = simulate_scores(&p);
        let b = simulate_scores(&p);
        assert_eq!(a.asv, b.asv);
        assert_eq!(a.cm, b.cm);
        assert_eq!(a.paired, b.paired);
        let c = simulate_scores(&fig_style_params(500, 124));
        assert_ne!(a.asv.tar, c.asv.tar);
    }

    #[test]
    fn views_are_consistent() {
        let p = fig_style_params(200, 9);
        let s = simulate_scores(&p);
        assert_eq!(s.asv.tar.len(), 200);
        assert_eq!(s.cm.bona.len(), 400);
        assert_eq!(s.paired.rows.len(), 600);
        let tar_cm: Vec<f64> = s.paired.pairs_of(TrialClass::Target).iter().map(|p| p.1).collect();
        assert_eq!(&s.cm.bona[..200], tar_cm.as_slice());
        let spf_asv: Vec<f64> = s.paired.pairs_of(TrialClass::Spoof).iter().map(|p| p.0).collect();
        assert_eq!(s.asv.spf, spf_asv);
    }

    #[test]
    fn equal_asv_eers_share_the_asv_mean() {
        let p = SimulationParams::new(0.2, 0.2, 0.1, 50, 3).unwrap();
        let s = simulate_scores(&p);
        let p_ref = SimulationParams::new(0.2, 0.35, 0.1, 50, 3).unwrap();
        let s_ref = simulate_scores(&p_ref);
        // same stream, same eer_asv_non: nontarget draws coincide
        assert_eq!(s.asv.non, s_ref.asv.non);
        // spoof ASV marginal differs only by the mean shift
        let d_20 = gaussian_separation(0.2).unwrap();
        let d_35 = gaussian_separation(0.35).unwrap();
        for (a, b) in s.asv.spf.iter().zip(&s_ref.asv.spf) {
            assert!(((a + d_20) - (b + d_35)).abs() < 1e-12);
        }
    }

    #[test]
    fn empirical_eers_approach_parameters() {
        let p = fig_style_params(100_000, 20240);
        let s = simulate_scores(&p);
        let asv = RateCurve::from_asv(&s.asv).unwrap();
        let cm = RateCurve::from_cm(&s.cm).unwrap();
        let checks = [
            (asv.eer(NegClass::Nontarget).unwrap().eer, 0.08),
            (asv.eer(NegClass::Spoof).unwrap().eer, 0.35),
            (cm.eer(NegClass::Spoof).unwrap().eer, 0.10),
        ];
        for (observed, expected) in checks {
            assert!(
                (observed - expected).abs() <= 0.005,
                "empirical {observed} vs parameter {expected}"
            );
        }
    }

    #[test]
    fn oracle_rates_limits_and_midpoint() {
        let p = fig_style_params(10, 0);
        let r = oracle_rates(&p, f64::NEG_INFINITY, f64::NEG_INFINITY);
        assert_eq!(
            (r.asv_miss, r.asv_fa_non, r.asv_fa_spf, r.cm_miss, r.cm_fa),
            (0.0, 1.0, 1.0, 0.0, 1.0)
        );
        let r = oracle_rates(&p, f64::INFINITY, f64::INFINITY);
        assert_eq!(
            (r.asv_miss, r.asv_fa_non, r.asv_fa_spf, r.cm_miss, r.cm_fa),
            (1.0, 0.0, 0.0, 1.0, 0.0)
        );
        // at the two-class midpoint the miss and nontarget FA both equal the EER
        let d = gaussian_separation(0.08).unwrap();
        let mid = oracle_rates(&p, -d / 2.0, 0.0);
        assert!((mid.asv_miss - 0.08).abs() < 1e-9);
        assert!((mid.asv_fa_non - 0.08).abs() < 1e-9);
    }

    #[test]
    fn oracle_matches_empirical_curve_on_grid() {
        let p = fig_style_params(100_000, 77);
        let s = simulate_scores(&p);
        let asv = RateCurve::from_asv(&s.asv).unwrap();
        let mut max_dev: f64 = 0.0;
        for step in 0..21 {
            let tau = -5.0 + 0.5 * step as f64;
            let exact = oracle_rates(&p, tau, 0.0);
            // empirical operating point just past tau: first threshold > tau
            let k = asv.thresholds().partition_point(|&t| t <= tau);
            let dev = (asv.miss(k) - exact.asv_miss)
                .abs()
                .max((asv.fa(NegClass::Nontarget, k) - exact.asv_fa_non).abs())
                .max((asv.fa(NegClass::Spoof, k) - exact.asv_fa_spf).abs());
            max_dev = max_dev.max(dev);
        }
        assert!(max_dev <= 0.01, "max deviation {max_dev}");
    }

    #[test]
    fn path_rates_track_oracle_tandem_rates() {
        use crate::path::build_teer_path;
        use crate::tandem::{tandem_rates_at, SpoofPrevalence};

        let p = fig_style_params(100_000, 4);
        let s = simulate_scores(&p);
        let asv = RateCurve::from_asv(&s.asv).unwrap();
        let cm = RateCurve::from_cm(&s.cm).unwrap();
        let path = build_teer_path(&asv, &cm, SpoofPrevalence::new(0.3).unwrap()).unwrap();
        let mut max_dev: f64 = 0.0;
        for e in path.entries().iter().step_by(5_000) {
            let empirical = tandem_rates_at(&asv, &cm, e.asv_index, e.cm_index);
            let o = oracle_rates(&p, e.asv_threshold, e.cm_threshold);
            let miss = o.asv_miss + (1.0 - o.asv_miss) * o.cm_miss;
            let fa_non = (1.0 - o.cm_miss) * o.asv_fa_non;
            let fa_spf = o.cm_fa * o.asv_fa_spf;
            max_dev = max_dev
                .max((empirical.miss - miss).abs())
                .max((empirical.fa_non - fa_non).abs())
                .max((empirical.fa_spf - fa_spf).abs());
        }
        assert!(max_dev <= 0.01, "max deviation {max_dev}");
    }

    #[test]
    fn oracle_concurrent_matches_independent_reference() {
        // cross-checked against an independent SciPy root solve of the same
        // system
        let p = fig_style_params(10, 0);
        let o = oracle_concurrent_teer(&p).unwrap();
        assert!((o.teer - 0.11446524357357922).abs() < 1e-9);
        assert!((o.tau_asv - -1.6493226338772669).abs() < 1e-7);
        assert!((o.tau_cm - -1.4885077237092077).abs() < 1e-7);

        let q = SimulationParams::new(0.05, 0.25, 0.07, 10, 0).unwrap();
        let o = oracle_concurrent_teer(&q).unwrap();
        assert!((o.teer - 0.0738946587795347).abs() < 1e-9);
    }

    #[test]
    fn oracle_concurrent_equalizes_the_three_rates() {
        for (en, es, ec) in [(0.08, 0.35, 0.10), (0.02, 0.4, 0.3), (0.2, 0.21, 0.05)] {
            let p = SimulationParams::new(en, es, ec, 10, 0).unwrap();
            let o = oracle_concurrent_teer(&p).unwrap();
            let r = oracle_rates(&p, o.tau_asv, o.tau_cm);
            let miss = r.asv_miss + (1.0 - r.asv_miss) * r.cm_miss;
            let fa_non = (1.0 - r.cm_miss) * r.asv_fa_non;
            let fa_spf = r.cm_fa * r.asv_fa_spf;
            for rate in [miss, fa_non, fa_spf] {
                assert!((rate - o.teer).abs() < 1e-9, "rate {rate} vs teer {}", o.teer);
            }
            assert!(o.teer > 0.0 && o.teer < 1.0);
        }
    }

    #[test]
    fn symmetric_parameters_take_the_boundary_root() {
        let p = SimulationParams::new(0.2, 0.2, 0.2, 10, 0).unwrap();
        let o = oracle_concurrent_teer(&p).unwrap();
        assert_eq!(o.tau_cm, f64::NEG_INFINITY);
        assert!((o.teer - 0.2).abs() < 1e-9);
        let r = oracle_rates(&p, o.tau_asv, o.tau_cm);
        let miss = r.asv_miss + (1.0 - r.asv_miss) * r.cm_miss;
        let fa_non = (1.0 - r.cm_miss) * r.asv_fa_non;
        let fa_spf = r.cm_fa * r.asv_fa_spf;
        for rate in [miss, fa_non, fa_spf] {
            assert!((rate - o.teer).abs() < 1e-9);
        }
    }

    #[test]
    fn easier_rejected_spoofs_have_no_intersection() {
        let p = SimulationParams::new(0.35, 0.08, 0.10, 10, 0).unwrap();
        assert!(matches!(
            oracle_concurrent_teer(&p),
            Err(SimError::NoIntersection)
        ));
    }
}
