//! Tandem evaluation of a biometric comparator (ASV) operating in cascade
//! with a spoofing countermeasure (CM).
//!
//! The two subsystems are binary detectors combined by a logical AND on
//! per-system threshold decisions, and this crate evaluates them as one
//! three-class system (target, nontarget, spoof) directly from their
//! detection scores:
//!
//! * empirical step-function miss / false-alarm curves and conventional
//!   EERs ([`curves`]),
//! * the tandem error rates under the AND rule and their prior weighting
//!   ([`tandem`]),
//! * t-EER paths: the threshold pairs equalizing tandem miss and total
//!   false-alarm rates for a given spoof prevalence, in linear memory
//!   ([`path`]),
//! * the concurrent t-EER, the prevalence-independent value at the common
//!   intersection of all paths ([`concurrent`]),
//! * tandem detection cost (t-DCF) evaluation, exact grid minimization and
//!   concurrent-point bounds ([`tdcf`]),
//! * parameterized Gaussian score simulation with exact closed-form oracles
//!   for validation ([`simulate`]),
//! * special-case EER batteries and score-correlation diagnostics
//!   ([`analysis`]),
//! * score-file parsing and serialization ([`score_io`]).
//!
//! ```
//! use teer::prelude::*;
//!
//! let params = SimulationParams::new(0.08, 0.35, 0.10, 2000, 42)?;
//! let scores = simulate_scores(&params);
//! let asv = RateCurve::from_asv(&scores.asv)?;
//! let cm = RateCurve::from_cm(&scores.cm)?;
//!
//! let point = concurrent_teer(&asv, &cm)?;
//! assert!(point.teer > 0.0 && point.teer < 1.0);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

#![forbid(unsafe_code)]

pub mod analysis;
pub mod concurrent;
pub mod curves;
pub mod path;
pub mod score_io;
pub mod simulate;
pub mod tandem;
pub mod tdcf;

// The guide's code blocks run as doc-tests so the book cannot drift from
// the library. One module per chapter keeps failures attributable.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/score-files.md")]
    mod score_files {}
    #[doc = include_str!("../../../book/src/error-rate-curves.md")]
    mod error_rate_curves {}
    #[doc = include_str!("../../../book/src/tandem-rates.md")]
    mod tandem_rates {}
    #[doc = include_str!("../../../book/src/teer-paths.md")]
    mod teer_paths {}
    #[doc = include_str!("../../../book/src/concurrent-teer.md")]
    mod concurrent_teer {}
    #[doc = include_str!("../../../book/src/cost-functions.md")]
    mod cost_functions {}
    #[doc = include_str!("../../../book/src/simulation-and-oracles.md")]
    mod simulation_and_oracles {}
    #[doc = include_str!("../../../book/src/command-line.md")]
    mod command_line {}
}

/// The commonly used types and entry points in one import.
pub mod prelude {
    pub use crate::analysis::{class_conditional_correlation, special_case_eers, CorrelationReport, SpecialCaseEers};
    pub use crate::concurrent::{
        concurrent_point_on_path, concurrent_teer, concurrent_teer_at_rho, verify_intersection,
        ConcurrentPoint,
    };
    pub use crate::curves::{EerResult, NegClass, RateCurve};
    pub use crate::path::{asv_feasible, build_teer_path, cm_feasible, TeerPath};
    pub use crate::score_io::{
        parse_asv_scores, parse_cm_scores, parse_paired_scores, write_asv_scores, write_cm_scores,
        write_paired_scores, AsvScoreSet, CmScoreSet, PairedScoreSet, TrialClass,
    };
    pub use crate::simulate::{
        gaussian_separation, oracle_concurrent_teer, oracle_rates, simulate_scores,
        SimulationParams,
    };
    pub use crate::tandem::{
        rho_from_priors, tandem_fa_non, tandem_fa_spf, tandem_fa_total, tandem_miss,
        tandem_rates_at, tandem_total_error, SpoofPrevalence, TandemPriors, TandemRates,
    };
    pub use crate::tdcf::{min_tdcf, tdcf, tdcf_bounds_at_concurrent, TdcfParams};
}
