//! `teer`: tandem evaluation of a biometric comparator and a spoofing
//! countermeasure from their score files.
//!
//! Exit codes: 0 success; 2 input error (unreadable file, malformed line,
//! out-of-range flag); 3 solver-quality warning (the concurrent-point search
//! found no residual sign change), so pipelines can gate on metric
//! trustworthiness.

#![forbid(unsafe_code)]

mod report;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use teer::analysis::{class_conditional_correlation, special_case_eers, CorrelationReport};
use teer::concurrent::{concurrent_point_on_path, concurrent_teer};
use teer::curves::RateCurve;
use teer::path::build_teer_path;
use teer::score_io::{
    parse_asv_scores, parse_cm_scores, parse_paired_scores, write_asv_scores, write_cm_scores,
    write_paired_scores, AsvScoreSet, CmScoreSet,
};
use teer::simulate::{simulate_scores, SimulationParams};
use teer::tandem::{tandem_rates_at, SpoofPrevalence, TandemPriors};
use teer::tdcf::{min_tdcf, tdcf, tdcf_bounds_at_concurrent, TdcfParams};

use report::{concurrent_fragment, num, threshold};

#[derive(Parser)]
#[command(
    name = "teer",
    version,
    about = "Tandem detection metrics: error-rate curves, t-EER paths, the concurrent t-EER, and t-DCF",
    after_help = "The TEER_THREADS environment variable caps internal parallelism. It is \
informational and never affects output bytes; the current implementation is single-threaded."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a score-file pair: EER battery, per-prevalence t-EER paths,
    /// the concurrent t-EER, and optionally the t-DCF.
    Eval(EvalArgs),
    /// Export one t-EER path as CSV plot data.
    Path(PathArgs),
    /// Generate synthetic Gaussian score files with known EERs.
    Simulate(SimulateArgs),
    /// Class-conditional score correlations from a paired score file.
    Correlate(CorrelateArgs),
    /// Tandem detection cost: exact grid minimum and concurrent-point value.
    Tdcf(TdcfArgs),
}

#[derive(Args)]
struct EvalArgs {
    /// ASV score file (`<score> <label>`, labels target/nontarget/spoof)
    #[arg(long)]
    asv_scores: PathBuf,
    /// CM score file (`<score> <label>`, labels bonafide/spoof)
    #[arg(long)]
    cm_scores: PathBuf,
    /// Comma-separated spoof prevalence values in [0, 1]
    #[arg(long, default_value = "0,0.2,0.5,0.8,1")]
    rho: String,
    /// json: summary report; csv: path plot data for every prevalence
    #[arg(long, default_value = "json", value_parser = ["json", "csv"])]
    format: String,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    costs: CostArgs,
}

#[derive(Args)]
struct PathArgs {
    #[arg(long)]
    asv_scores: PathBuf,
    #[arg(long)]
    cm_scores: PathBuf,
    /// Spoof prevalence in [0, 1]
    #[arg(long)]
    rho: f64,
    /// Output CSV file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// ASV target-vs-nontarget EER, in (0, 0.5)
    #[arg(long, default_value_t = 0.08)]
    eer_asv_non: f64,
    /// ASV target-vs-spoof EER, in (0, 0.5)
    #[arg(long, default_value_t = 0.35)]
    eer_asv_spf: f64,
    /// CM bonafide-vs-spoof EER, in (0, 0.5)
    #[arg(long, default_value_t = 0.10)]
    eer_cm: f64,
    #[arg(long, default_value_t = 10_000)]
    n_per_class: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output prefix; writes `<prefix>.asv.txt`, `<prefix>.cm.txt`,
    /// `<prefix>.paired.txt` and a `<prefix>.json` parameter sidecar
    #[arg(long)]
    out_prefix: PathBuf,
}

#[derive(Args)]
struct CorrelateArgs {
    /// Paired score file (`<asv> <cm> <label> [attack_id]`)
    #[arg(long)]
    paired_scores: PathBuf,
    #[arg(long, default_value = "json", value_parser = ["json", "csv"])]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TdcfArgs {
    #[arg(long)]
    asv_scores: PathBuf,
    #[arg(long)]
    cm_scores: PathBuf,
    #[command(flatten)]
    costs: CostArgs,
    /// Restrict the grid minimization to one ASV operating index
    #[arg(long)]
    fixed_asv_index: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone, Copy)]
struct CostArgs {
    /// Cost of a miss (t-DCF)
    #[arg(long)]
    c_miss: Option<f64>,
    /// Cost of a nontarget false alarm (t-DCF)
    #[arg(long)]
    c_fa_non: Option<f64>,
    /// Cost of a spoof false alarm (t-DCF)
    #[arg(long)]
    c_fa_spf: Option<f64>,
    /// Asserted target prior (t-DCF)
    #[arg(long)]
    pi_tar: Option<f64>,
    /// Asserted nontarget prior (t-DCF)
    #[arg(long)]
    pi_non: Option<f64>,
    /// Asserted spoof prior (t-DCF)
    #[arg(long)]
    pi_spf: Option<f64>,
}

impl CostArgs {
    fn given(&self) -> bool {
        [
            self.c_miss,
            self.c_fa_non,
            self.c_fa_spf,
            self.pi_tar,
            self.pi_non,
            self.pi_spf,
        ]
        .iter()
        .any(Option::is_some)
    }

    fn build(&self) -> Result<TdcfParams, String> {
        let require = |v: Option<f64>, flag: &str| {
            v.ok_or_else(|| format!("t-DCF needs --{flag} (all six cost/prior flags go together)"))
        };
        let priors = TandemPriors::new(
            require(self.pi_tar, "pi-tar")?,
            require(self.pi_non, "pi-non")?,
            require(self.pi_spf, "pi-spf")?,
        )
        .map_err(|e| e.to_string())?;
        TdcfParams::new(
            require(self.c_miss, "c-miss")?,
            require(self.c_fa_non, "c-fa-non")?,
            require(self.c_fa_spf, "c-fa-spf")?,
            priors,
        )
        .map_err(|e| e.to_string())
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("TEER_THREADS") {
        if threads.parse::<usize>().map(|n| n == 0).unwrap_or(true) {
            eprintln!("warning: ignoring invalid TEER_THREADS value `{threads}`");
        }
    }
    match run() {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run() -> Result<ExitCode, String> {
    match Cli::parse().command {
        Command::Eval(args) => cmd_eval(args),
        Command::Path(args) => cmd_path(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Correlate(args) => cmd_correlate(args),
        Command::Tdcf(args) => cmd_tdcf(args),
    }
}

fn open_input(path: &Path) -> Result<BufReader<File>, String> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| format!("cannot open {}: {e}", path.display()))
}

fn load_asv(path: &Path) -> Result<AsvScoreSet, String> {
    parse_asv_scores(open_input(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_cm(path: &Path) -> Result<CmScoreSet, String> {
    parse_cm_scores(open_input(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn parse_rho(value: f64) -> Result<SpoofPrevalence, String> {
    SpoofPrevalence::new(value).map_err(|e| e.to_string())
}

fn parse_rho_list(list: &str) -> Result<Vec<SpoofPrevalence>, String> {
    let rhos: Result<Vec<_>, String> = list
        .split(',')
        .map(|item| {
            let v: f64 = item
                .trim()
                .parse()
                .map_err(|_| format!("invalid --rho entry `{item}`"))?;
            parse_rho(v)
        })
        .collect();
    let rhos = rhos?;
    if rhos.is_empty() {
        return Err("--rho list is empty".into());
    }
    Ok(rhos)
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{content}");
            std::io::stdout().flush().map_err(|e| e.to_string())
        }
    }
}

fn to_pretty(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report is valid JSON");
    text.push('\n');
    text
}

fn curves_from(
    asv_set: &AsvScoreSet,
    cm_set: &CmScoreSet,
) -> Result<(RateCurve, RateCurve), String> {
    let asv = RateCurve::from_asv(asv_set).map_err(|e| e.to_string())?;
    let cm = RateCurve::from_cm(cm_set).map_err(|e| e.to_string())?;
    Ok((asv, cm))
}

fn cmd_eval(args: EvalArgs) -> Result<ExitCode, String> {
    let rhos = parse_rho_list(&args.rho)?;
    let asv_set = load_asv(&args.asv_scores)?;
    let cm_set = load_cm(&args.cm_scores)?;
    let (asv, cm) = curves_from(&asv_set, &cm_set)?;

    if args.format == "csv" {
        let mut buf = Vec::new();
        writeln!(buf, "rho,asv_threshold,cm_threshold,teer,residual").unwrap();
        for &rho in &rhos {
            let path = build_teer_path(&asv, &cm, rho).map_err(|e| e.to_string())?;
            path.write_csv_rows(&mut buf).unwrap();
        }
        emit(&args.out, &String::from_utf8(buf).unwrap())?;
        return Ok(ExitCode::SUCCESS);
    }

    let point = concurrent_teer(&asv, &cm).map_err(|e| e.to_string())?;

    let mut path_summaries = Vec::new();
    for &rho in &rhos {
        let path = build_teer_path(&asv, &cm, rho).map_err(|e| e.to_string())?;
        let teers: Vec<f64> = path.entries().iter().map(|e| e.teer).collect();
        let max_abs_residual = path
            .entries()
            .iter()
            .map(|e| e.residual.abs())
            .fold(0.0, f64::max);
        let max_plateau_width = path
            .entries()
            .iter()
            .map(|e| e.plateau_width)
            .max()
            .unwrap_or(1);
        let per_rho_point = concurrent_point_on_path(&asv, &cm, &path);
        path_summaries.push(json!({
            "rho": rho.value(),
            "entries": path.entries().len(),
            "asv_critical_index": path.asv_critical_index(),
            "cm_critical_index": path.cm_critical_index(),
            "teer_min": num(teers.iter().copied().fold(f64::INFINITY, f64::min)),
            "teer_max": num(teers.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
            "max_abs_residual": num(max_abs_residual),
            "max_plateau_width": max_plateau_width,
            "asv_eer_mix": asv.eer_mixture(rho.value()).map(|e| num(e.eer)).unwrap_or(Value::Null),
            "concurrent": concurrent_fragment(&per_rho_point),
        }));
    }

    let battery = special_case_eers(&asv_set, &cm_set, rhos[0]).map_err(|e| e.to_string())?;
    let opt = |v: Option<f64>| v.map(num).unwrap_or(Value::Null);
    let special = json!({
        "asv_tar_vs_non": opt(battery.asv_tar_vs_non),
        "asv_tar_vs_spf": opt(battery.asv_tar_vs_spf),
        "cm_bona_vs_spf": num(battery.cm_bona_vs_spf),
        "concurrent": opt(battery.concurrent),
        "asv_tar_vs_mix": rhos.iter().map(|&rho| json!({
            "rho": rho.value(),
            "eer": asv.eer_mixture(rho.value()).map(|e| num(e.eer)).unwrap_or(Value::Null),
        })).collect::<Vec<_>>(),
    });

    let mut root = Map::new();
    root.insert("metadata".into(), metadata(&args.asv_scores, &args.cm_scores, &asv_set, &cm_set, &rhos));
    root.insert("special_case_eers".into(), special);
    root.insert("concurrent".into(), concurrent_fragment(&point));
    root.insert("paths".into(), Value::Array(path_summaries));
    if args.costs.given() {
        let params = args.costs.build()?;
        root.insert("tdcf".into(), tdcf_block(&asv, &cm, &params, None, &point));
    }

    emit(&args.out, &to_pretty(&Value::Object(root)))?;
    Ok(if point.warning {
        ExitCode::from(3)
    } else {
        ExitCode::SUCCESS
    })
}

fn metadata(
    asv_path: &Path,
    cm_path: &Path,
    asv_set: &AsvScoreSet,
    cm_set: &CmScoreSet,
    rhos: &[SpoofPrevalence],
) -> Value {
    json!({
        "tool_version": env!("CARGO_PKG_VERSION"),
        "asv_scores": asv_path.display().to_string(),
        "cm_scores": cm_path.display().to_string(),
        "counts": {
            "target": asv_set.tar.len(),
            "nontarget": asv_set.non.len(),
            "spoof_asv": asv_set.spf.len(),
            "bonafide": cm_set.bona.len(),
            "spoof_cm": cm_set.spf.len(),
        },
        "rho": rhos.iter().map(|r| r.value()).collect::<Vec<_>>(),
        "conventions": {
            "decision_rule": "accept iff score > threshold; a threshold placed at a score value rejects it",
            "eer": "nearest-neighbor over discrete operating points, smallest index on ties, midpoint reported",
            "path_search": "per ASV index, binary search of the monotone residual over CM indices; smallest CM index on residual plateaus",
            "report_precision": "6 significant digits in JSON reports; CSV exports keep full precision",
        },
    })
}

fn tdcf_block(
    asv: &RateCurve,
    cm: &RateCurve,
    params: &TdcfParams,
    fixed_asv_index: Option<usize>,
    point: &teer::concurrent::ConcurrentPoint,
) -> Value {
    let best = min_tdcf(asv, cm, params, fixed_asv_index);
    let at_point = tdcf(
        params,
        &tandem_rates_at(asv, cm, point.asv_index, point.cm_index),
    );
    let bounds = tdcf_bounds_at_concurrent(params, point.teer);
    json!({
        "params": {
            "c_miss": params.c_miss(),
            "c_fa_non": params.c_fa_non(),
            "c_fa_spf": params.c_fa_spf(),
            "pi_tar": params.asserted().pi_tar(),
            "pi_non": params.asserted().pi_non(),
            "pi_spf": params.asserted().pi_spoof(),
        },
        "min": {
            "value": num(best.value),
            "asv_index": best.asv_index,
            "cm_index": best.cm_index,
            "asv_threshold": threshold(asv.threshold(best.asv_index)),
            "cm_threshold": threshold(cm.threshold(best.cm_index)),
        },
        "at_concurrent": {
            "p_e_cross": num(point.teer),
            "value": num(at_point),
            "linear_value": num(bounds.value),
            "lo": num(bounds.lo),
            "hi": num(bounds.hi),
        },
    })
}

fn cmd_path(args: PathArgs) -> Result<ExitCode, String> {
    let rho = parse_rho(args.rho)?;
    let asv_set = load_asv(&args.asv_scores)?;
    let cm_set = load_cm(&args.cm_scores)?;
    let (asv, cm) = curves_from(&asv_set, &cm_set)?;
    let path = build_teer_path(&asv, &cm, rho).map_err(|e| e.to_string())?;
    let mut buf = Vec::new();
    path.write_csv(&mut buf).unwrap();
    emit(&args.out, &String::from_utf8(buf).unwrap())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(args: SimulateArgs) -> Result<ExitCode, String> {
    let params = SimulationParams::new(
        args.eer_asv_non,
        args.eer_asv_spf,
        args.eer_cm,
        args.n_per_class,
        args.seed,
    )
    .map_err(|e| e.to_string())?;
    let scores = simulate_scores(&params);

    let prefix = args.out_prefix.display();
    let paths = [
        format!("{prefix}.asv.txt"),
        format!("{prefix}.cm.txt"),
        format!("{prefix}.paired.txt"),
        format!("{prefix}.json"),
    ];
    let write_to = |path: &str, body: &dyn Fn(&mut BufWriter<File>) -> std::io::Result<()>| {
        let file = File::create(path).map_err(|e| format!("cannot create {path}: {e}"))?;
        let mut w = BufWriter::new(file);
        body(&mut w).map_err(|e| format!("cannot write {path}: {e}"))
    };
    write_to(&paths[0], &|w| write_asv_scores(w, &scores.asv))?;
    write_to(&paths[1], &|w| write_cm_scores(w, &scores.cm))?;
    write_to(&paths[2], &|w| write_paired_scores(w, &scores.paired))?;

    let sidecar = json!({
        "eer_asv_non": params.eer_asv_non,
        "eer_asv_spf": params.eer_asv_spf,
        "eer_cm": params.eer_cm,
        "n_per_class": params.n_per_class,
        "seed": params.seed,
        "files": {
            "asv": paths[0],
            "cm": paths[1],
            "paired": paths[2],
        },
    });
    std::fs::write(&paths[3], to_pretty(&sidecar))
        .map_err(|e| format!("cannot write {}: {e}", paths[3]))?;
    Ok(ExitCode::SUCCESS)
}

fn correlation_csv(report: &CorrelationReport) -> String {
    let mut out = String::from("group,n,r,undefined_reason\n");
    let mut push = |name: &str, entry: &teer::analysis::CorrelationEntry| {
        let r = entry.r.map(|v| report::sig6(v).to_string()).unwrap_or_default();
        let reason = entry.undefined_reason.clone().unwrap_or_default();
        out.push_str(&format!("{name},{},{r},{reason}\n", entry.n));
    };
    for (class, entry) in &report.per_class {
        push(class.label(), entry);
    }
    if let Some(per_attack) = &report.per_attack {
        for (attack, entry) in per_attack {
            push(&format!("attack:{attack}"), entry);
        }
    }
    out
}

fn cmd_correlate(args: CorrelateArgs) -> Result<ExitCode, String> {
    let paired = parse_paired_scores(open_input(&args.paired_scores)?)
        .map_err(|e| format!("{}: {e}", args.paired_scores.display()))?;
    let mut report = class_conditional_correlation(&paired);
    for entry in report.per_class.values_mut() {
        entry.r = entry.r.map(report::sig6);
    }
    if let Some(per_attack) = &mut report.per_attack {
        for entry in per_attack.values_mut() {
            entry.r = entry.r.map(report::sig6);
        }
    }
    let content = if args.format == "csv" {
        correlation_csv(&report)
    } else {
        let value = json!({ "correlation": serde_json::to_value(&report).unwrap() });
        to_pretty(&value)
    };
    emit(&args.out, &content)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_tdcf(args: TdcfArgs) -> Result<ExitCode, String> {
    let params = args.costs.build()?;
    let asv_set = load_asv(&args.asv_scores)?;
    let cm_set = load_cm(&args.cm_scores)?;
    let (asv, cm) = curves_from(&asv_set, &cm_set)?;
    if let Some(i) = args.fixed_asv_index {
        if i >= asv.num_points() {
            return Err(format!(
                "--fixed-asv-index {i} out of range (curve has {} operating points)",
                asv.num_points()
            ));
        }
    }
    let point = concurrent_teer(&asv, &cm).map_err(|e| e.to_string())?;
    let value = json!({ "tdcf": tdcf_block(&asv, &cm, &params, args.fixed_asv_index, &point) });
    emit(&args.out, &to_pretty(&value))?;
    Ok(if point.warning {
        ExitCode::from(3)
    } else {
        ExitCode::SUCCESS
    })
}
