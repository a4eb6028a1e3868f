//! Parsing, validation and serialization of labeled detection-score files.
//!
//! Two single-subsystem formats and one paired format are supported. All are
//! line-oriented UTF-8 with `\n` or `\r\n` endings; lines starting with `#`
//! are comments and blank lines are ignored. Scores may be written in decimal
//! or scientific notation.
//!
//! * ASV scores: `<score> <label>` with label in `target`, `nontarget`,
//!   `spoof`. An optional leading trial-id column is permitted and ignored
//!   when a line has three fields.
//! * CM scores: same shape, labels `bonafide` / `spoof`.
//! * Paired scores: `<asv_score> <cm_score> <label> [attack_id]`, label as
//!   for ASV; the attack id is only allowed on `spoof` rows.
//!
//! Parsing preserves input order within each class and never deduplicates:
//! tied scores are meaningful to curve construction downstream.

use std::fmt;
use std::io::{self, BufRead, Write};

use thiserror::Error;

/// The three tandem trial classes. `Target` is the sole positive class; a
/// spoofed nontarget does not exist as a class (spoofing attacks always claim
/// the target identity).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialClass {
    Target,
    Nontarget,
    Spoof,
}

impl TrialClass {
    pub fn label(self) -> &'static str {
        match self {
            TrialClass::Target => "target",
            TrialClass::Nontarget => "nontarget",
            TrialClass::Spoof => "spoof",
        }
    }

    fn from_label(s: &str) -> Option<Self> {
        match s {
            "target" => Some(TrialClass::Target),
            "nontarget" => Some(TrialClass::Nontarget),
            "spoof" => Some(TrialClass::Spoof),
            _ => None,
        }
    }
}

impl fmt::Display for TrialClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Label set of the countermeasure: bona fide (positive) vs spoof (negative).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmClass {
    Bonafide,
    Spoof,
}

impl CmClass {
    pub fn label(self) -> &'static str {
        match self {
            CmClass::Bonafide => "bonafide",
            CmClass::Spoof => "spoof",
        }
    }

    fn from_label(s: &str) -> Option<Self> {
        match s {
            "bonafide" => Some(CmClass::Bonafide),
            "spoof" => Some(CmClass::Spoof),
            _ => None,
        }
    }
}

impl fmt::Display for CmClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Error, Debug)]
pub enum ParseError {
    #[error("line {line}: malformed line (expected whitespace-separated score and label)")]
    Malformed { line: usize },
    #[error("line {line}: unknown label `{label}`")]
    UnknownLabel { line: usize, label: String },
    #[error("line {line}: score is not a finite number")]
    NonFiniteScore { line: usize },
    #[error("line {line}: attack id `{attack}` on a non-spoof row")]
    AttackIdOnNonSpoof { line: usize, attack: String },
    #[error("required class `{class}` has no scores")]
    EmptyClass { class: &'static str },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Labeled ASV detection scores, split by trial class.
///
/// `tar` must be non-empty and at least one of `non` / `spf` must be
/// non-empty; the class lists may have any relative sizes.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct AsvScoreSet {
    pub tar: Vec<f64>,
    pub non: Vec<f64>,
    pub spf: Vec<f64>,
}

/// Labeled CM detection scores. Bona fide scores from target and nontarget
/// trials are pooled into the single `bona` list: both classes correspond to
/// genuine human presentations and share the CM score distribution.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct CmScoreSet {
    pub bona: Vec<f64>,
    pub spf: Vec<f64>,
}

/// One paired trial: a score from each subsystem plus the tandem class.
#[derive(Clone, Debug, PartialEq)]
pub struct PairedRow {
    pub asv: f64,
    pub cm: f64,
    pub class: TrialClass,
    pub attack_id: Option<String>,
}

/// Jointly observed (ASV, CM) score pairs, in input order.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct PairedScoreSet {
    pub rows: Vec<PairedRow>,
}

impl PairedScoreSet {
    /// (asv, cm) pairs belonging to `class`, in input order.
    pub fn pairs_of(&self, class: TrialClass) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.class == class)
            .map(|r| (r.asv, r.cm))
            .collect()
    }
}

fn parse_score(field: &str, line: usize) -> Result<f64, ParseError> {
    let v: f64 = field
        .parse()
        .map_err(|_| ParseError::Malformed { line })?;
    if !v.is_finite() {
        return Err(ParseError::NonFiniteScore { line });
    }
    Ok(v)
}

// Yields (line_number, content) for non-comment, non-blank lines.
fn data_lines<R: BufRead>(
    reader: R,
) -> impl Iterator<Item = Result<(usize, String), ParseError>> {
    reader.lines().enumerate().filter_map(|(idx, res)| match res {
        Err(e) => Some(Err(ParseError::Io(e))),
        Ok(raw) => {
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                None
            } else {
                Some(Ok((idx + 1, t.to_string())))
            }
        }
    })
}

// A data line is `<score> <label>` or `<id> <score> <label>`.
fn split_score_label(line: usize, text: &str) -> Result<(f64, String), ParseError> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    let (score_field, label_field) = match fields.len() {
        2 => (fields[0], fields[1]),
        3 => (fields[1], fields[2]),
        _ => return Err(ParseError::Malformed { line }),
    };
    Ok((parse_score(score_field, line)?, label_field.to_string()))
}

/// Parse an ASV score file. Scores are grouped by label in input order.
pub fn parse_asv_scores<R: BufRead>(reader: R) -> Result<AsvScoreSet, ParseError> {
    let mut set = AsvScoreSet::default();
    for item in data_lines(reader) {
        let (line, text) = item?;
        let (score, label) = split_score_label(line, &text)?;
        match TrialClass::from_label(&label) {
            Some(TrialClass::Target) => set.tar.push(score),
            Some(TrialClass::Nontarget) => set.non.push(score),
            Some(TrialClass::Spoof) => set.spf.push(score),
            None => return Err(ParseError::UnknownLabel { line, label }),
        }
    }
    if set.tar.is_empty() {
        return Err(ParseError::EmptyClass { class: "target" });
    }
    if set.non.is_empty() && set.spf.is_empty() {
        return Err(ParseError::EmptyClass {
            class: "nontarget or spoof",
        });
    }
    Ok(set)
}

/// Parse a CM score file. Both classes must be present.
pub fn parse_cm_scores<R: BufRead>(reader: R) -> Result<CmScoreSet, ParseError> {
    let mut set = CmScoreSet::default();
    for item in data_lines(reader) {
        let (line, text) = item?;
        let (score, label) = split_score_label(line, &text)?;
        match CmClass::from_label(&label) {
            Some(CmClass::Bonafide) => set.bona.push(score),
            Some(CmClass::Spoof) => set.spf.push(score),
            None => return Err(ParseError::UnknownLabel { line, label }),
        }
    }
    if set.bona.is_empty() {
        return Err(ParseError::EmptyClass { class: "bonafide" });
    }
    if set.spf.is_empty() {
        return Err(ParseError::EmptyClass { class: "spoof" });
    }
    Ok(set)
}

/// Parse a paired score file (`<asv> <cm> <label> [attack_id]`).
pub fn parse_paired_scores<R: BufRead>(reader: R) -> Result<PairedScoreSet, ParseError> {
    let mut rows = Vec::new();
    for item in data_lines(reader) {
        let (line, text) = item?;
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() != 3 && fields.len() != 4 {
            return Err(ParseError::Malformed { line });
        }
        let asv = parse_score(fields[0], line)?;
        let cm = parse_score(fields[1], line)?;
        let class = TrialClass::from_label(fields[2]).ok_or_else(|| ParseError::UnknownLabel {
            line,
            label: fields[2].to_string(),
        })?;
        let attack_id = if fields.len() == 4 {
            if class != TrialClass::Spoof {
                return Err(ParseError::AttackIdOnNonSpoof {
                    line,
                    attack: fields[3].to_string(),
                });
            }
            Some(fields[3].to_string())
        } else {
            None
        };
        rows.push(PairedRow {
            asv,
            cm,
            class,
            attack_id,
        });
    }
    Ok(PairedScoreSet { rows })
}

/// Write an ASV score set in the text format accepted by [`parse_asv_scores`].
/// Rows are grouped by class, preserving in-class order, so a parse/write
/// round trip reproduces the class lists exactly.
pub fn write_asv_scores<W: Write>(mut w: W, set: &AsvScoreSet) -> io::Result<()> {
    for s in &set.tar {
        writeln!(w, "{s} target")?;
    }
    for s in &set.non {
        writeln!(w, "{s} nontarget")?;
    }
    for s in &set.spf {
        writeln!(w, "{s} spoof")?;
    }
    Ok(())
}

/// Write a CM score set in the text format accepted by [`parse_cm_scores`].
pub fn write_cm_scores<W: Write>(mut w: W, set: &CmScoreSet) -> io::Result<()> {
    for s in &set.bona {
        writeln!(w, "{s} bonafide")?;
    }
    for s in &set.spf {
        writeln!(w, "{s} spoof")?;
    }
    Ok(())
}

/// Write a paired score set in the text format accepted by
/// [`parse_paired_scores`], preserving row order.
pub fn write_paired_scores<W: Write>(mut w: W, set: &PairedScoreSet) -> io::Result<()> {
    for r in &set.rows {
        match &r.attack_id {
            Some(a) => writeln!(w, "{} {} {} {}", r.asv, r.cm, r.class, a)?,
            None => writeln!(w, "{} {} {}", r.asv, r.cm, r.class)?,
        }
    }
    Ok(())
}
