//! `randdehn`: command-line front end of `randdehn-core`.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::{ContextKind, ContextValue, ErrorKind};
use clap::{Args, Parser, Subcommand};
use randdehn_core::area::area_dispatch;
use randdehn_core::chains::{ChainSpec, TamenessMethod};
use randdehn_core::filling::{claim_projections_increasing, corridor_decompose, fill_area};
use randdehn_core::lab::{
    deviation_profile, estimate_rdehn, estimate_worstcase_dehn, fit_growth, subwalk_progress, GrowthFit, GrowthPoint,
    Meta, RDehnConfig, DEFAULT_MAX_DEHN_LEN,
};
use randdehn_core::report::{fmt_float, to_csv, to_json, CsvTable, Format};
use randdehn_core::{
    AreaEstimate, Chain, Combing, CombingKind, CorridorParams, Error, GroupModel, NormalForm, Presentation,
    BUILTIN_NAMES,
};
use serde::Serialize;

use config::{Experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "randdehn", version, about = "Random Dehn functions of finitely presented groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo random Dehn function over a grid of step counts
    Rdehn(Flags),
    /// Worst-case Dehn function by exhaustive enumeration
    DehnWorst(Flags),
    /// Tail of the distance between trajectories and combing lines
    Deviation(Flags),
    /// Frequency of slow subwalks
    Subwalk(Flags),
    /// Return probabilities, decay rate and irreducibility of a chain
    Tameness(Flags),
    /// Exhaustive quasi-geodesic certificate for a combing
    CombingCheck(Flags),
    /// Area of one null-homotopic word
    Area(Flags),
    /// Boundary word and area of one sampled trajectory
    Fill(Flags),
    /// Run the experiment named in the config file
    Run(Flags),
}

#[derive(Args, Default)]
struct Flags {
    /// JSON experiment config; flags override its keys
    #[arg(long)]
    config: Option<PathBuf>,
    /// Builtin group (f2, z2, raag-p3, genus2) or presentation file
    #[arg(long)]
    group: Option<String>,
    #[arg(long)]
    generic_radius: Option<usize>,
    #[arg(long, value_parser = ["srw", "lazy-srw", "table"])]
    chain: Option<String>,
    #[arg(long)]
    laziness: Option<f64>,
    #[arg(long)]
    table_path: Option<String>,
    #[arg(long, value_parser = ["native", "shortlex-bfs"])]
    combing: Option<String>,
    #[arg(long)]
    radius_budget: Option<usize>,
    /// Step counts, comma separated
    #[arg(short = 'n', long = "n-grid", value_delimiter = ',')]
    n_grid: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it
    #[arg(long)]
    jobs: Option<usize>,
    /// Extra length allowed to intermediate words of the area search
    #[arg(long)]
    slack: Option<usize>,
    /// Area cap of the area search
    #[arg(long)]
    cap: Option<usize>,
    #[arg(long)]
    max_states: Option<usize>,
    #[arg(long)]
    bfs_threshold: Option<usize>,
    /// Report file; `.json` selects JSON, anything else CSV
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Print the effective config as JSON and exit
    #[arg(long)]
    dump_config: bool,
    #[arg(long, value_delimiter = ',')]
    basepoints: Option<Vec<String>>,
    #[arg(long)]
    keep_samples: bool,
    /// Fit C n^a (ln n)^b against reference degree d
    #[arg(long)]
    fit: Option<u32>,
    #[arg(long)]
    max_len: Option<usize>,
    /// Candidate C3 values, comma separated
    #[arg(long = "c3", value_delimiter = ',')]
    c3_grid: Option<Vec<f64>>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long, value_parser = ["exact", "monte-carlo"])]
    method: Option<String>,
    #[arg(long)]
    mc_trials: Option<usize>,
    #[arg(long)]
    reach_cap: Option<usize>,
    #[arg(long)]
    radius: Option<usize>,
    #[arg(long)]
    word: Option<String>,
    #[arg(long)]
    trial: Option<u64>,
    /// Decompose the filling into corridor loops
    #[arg(long)]
    corridor: bool,
    #[arg(long)]
    corridor_c1: Option<f64>,
    #[arg(long)]
    corridor_c3: Option<f64>,
    #[arg(long)]
    corridor_d: Option<f64>,
    #[arg(long)]
    spacing_factor: Option<f64>,
    #[arg(long)]
    cell_scale: Option<f64>,
}

/// Error reported as JSON on stderr.
#[derive(Debug, Serialize)]
pub struct CliError {
    error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<String>,
    message: String,
    #[serde(skip)]
    exit: u8,
}

impl CliError {
    pub fn invalid(field: &str, message: impl Into<String>) -> Self {
        CliError {
            error: "invalid-input".into(),
            field: Some(field.into()),
            message: message.into(),
            exit: 1,
        }
    }

    fn core(e: Error, field: Option<&str>) -> Self {
        let kind = match &e {
            Error::UnknownLetter(_) => "unknown-letter",
            Error::InvalidPresentation(_) => "invalid-presentation",
            Error::BudgetExceeded(_) => "budget-exceeded",
            Error::NotFilledWithinBudget { .. } => "not-filled-within-budget",
            Error::NotNullHomotopic => "not-null-homotopic",
            Error::IndexOutOfRange { .. } => "index-out-of-range",
            Error::JumpBoundBlowup { .. } => "jump-bound-blowup",
            Error::InsufficientData(_) => "insufficient-data",
            Error::Unsupported(_) => "unsupported",
            Error::InvalidInput(_) => "invalid-input",
            Error::Io(_) => "io",
        };
        CliError {
            error: kind.into(),
            field: field.map(String::from),
            message: e.to_string(),
            exit: if e.is_budget() { 2 } else { 1 },
        }
    }
}

trait Field<T> {
    fn field(self, name: &str) -> Result<T, CliError>;
}

impl<T> Field<T> for Result<T, Error> {
    fn field(self, name: &str) -> Result<T, CliError> {
        self.map_err(|e| CliError::core(e, Some(name)))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::core(e, None)
    }
}

fn apply_flags(f: &Flags, cfg: &mut ExperimentConfig) -> Result<(), CliError> {
    macro_rules! set {
        ($($flag:ident => $key:expr),* $(,)?) => {
            $(if let Some(v) = &f.$flag { $key = v.clone(); })*
        };
    }
    set!(group => cfg.group, generic_radius => cfg.generic_radius, n_grid => cfg.n_grid,
         trials => cfg.trials, seed => cfg.seed, max_len => cfg.max_len, c3_grid => cfg.c3_grid,
         r => cfg.r, n_max => cfg.n_max, reach_cap => cfg.reach_cap, radius => cfg.radius,
         trial => cfg.trial, basepoints => cfg.basepoints, max_states => cfg.area.max_states,
         bfs_threshold => cfg.area.bfs_threshold);
    if let Some(o) = &f.output {
        cfg.output = Some(o.clone());
    }
    if let Some(w) = &f.word {
        cfg.word = Some(w.clone());
    }
    if let Some(s) = f.slack {
        cfg.area.slack = Some(s);
    }
    if let Some(c) = f.cap {
        cfg.area.area_cap = Some(c);
    }
    if let Some(d) = f.fit {
        cfg.fit_degree = Some(d);
    }
    if f.keep_samples {
        cfg.keep_samples = true;
    }
    if let Some(fmt) = &f.format {
        cfg.format = Some(if fmt == "json" { Format::Json } else { Format::Csv });
    }

    let old_laziness = match cfg.chain {
        ChainSpec::LazySrw { laziness } => laziness,
        _ => 0.5,
    };
    match f.chain.as_deref() {
        Some("srw") => cfg.chain = ChainSpec::Srw,
        Some("lazy-srw") => {
            cfg.chain = ChainSpec::LazySrw {
                laziness: f.laziness.unwrap_or(old_laziness),
            }
        }
        Some(_) => {
            let table_path = match (&f.table_path, &cfg.chain) {
                (Some(p), _) => p.clone(),
                (None, ChainSpec::Table { table_path }) => table_path.clone(),
                (None, _) => return Err(CliError::invalid("chain.table_path", "required by the table chain")),
            };
            cfg.chain = ChainSpec::Table { table_path };
        }
        None => match &mut cfg.chain {
            ChainSpec::LazySrw { laziness } => *laziness = f.laziness.unwrap_or(*laziness),
            ChainSpec::Table { table_path } => {
                if let Some(p) = &f.table_path {
                    *table_path = p.clone();
                }
            }
            ChainSpec::Srw => {}
        },
    }

    let old_radius = match cfg.combing {
        CombingKind::ShortlexBfs { radius_budget } => radius_budget,
        CombingKind::Native => 64,
    };
    match f.combing.as_deref() {
        Some("native") => cfg.combing = CombingKind::Native,
        Some(_) => {
            cfg.combing = CombingKind::ShortlexBfs {
                radius_budget: f.radius_budget.unwrap_or(old_radius),
            }
        }
        None => {
            if let (CombingKind::ShortlexBfs { radius_budget }, Some(r)) = (&mut cfg.combing, f.radius_budget) {
                *radius_budget = r;
            }
        }
    }

    match f.method.as_deref() {
        Some("exact") => cfg.tameness = TamenessMethod::ExactConvolution,
        Some(_) => {
            cfg.tameness = TamenessMethod::MonteCarlo {
                trials: f.mc_trials.unwrap_or(10_000),
                seed: cfg.seed,
            }
        }
        None => {
            if let TamenessMethod::MonteCarlo { trials, .. } = &mut cfg.tameness {
                *trials = f.mc_trials.unwrap_or(*trials);
            }
        }
    }

    let corridor_flags = [f.corridor_c1, f.corridor_c3, f.corridor_d, f.spacing_factor, f.cell_scale];
    if f.corridor || corridor_flags.iter().any(Option::is_some) {
        let mut p = cfg.corridor.unwrap_or_default();
        p.c1 = f.corridor_c1.unwrap_or(p.c1);
        p.c3 = f.corridor_c3.unwrap_or(p.c3);
        p.d = f.corridor_d.unwrap_or(p.d);
        p.spacing_factor = f.spacing_factor.unwrap_or(p.spacing_factor);
        p.cell_scale = f.cell_scale.unwrap_or(p.cell_scale);
        cfg.corridor = Some(p);
    }
    Ok(())
}

fn load_group(cfg: &ExperimentConfig) -> Result<GroupModel, CliError> {
    if BUILTIN_NAMES.contains(&cfg.group.as_str()) {
        return GroupModel::builtin(&cfg.group).field("group");
    }
    let path = Path::new(&cfg.group);
    if !path.is_file() {
        return Err(CliError::invalid(
            "group",
            format!(
                "{:?} is neither a builtin group ({}) nor a presentation file",
                cfg.group,
                BUILTIN_NAMES.join(", ")
            ),
        ));
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::invalid("group", e.to_string()))?;
    let p = Presentation::parse(&text).field("group")?;
    Ok(GroupModel::from_presentation(p, cfg.generic_radius))
}

fn combing_name(kind: CombingKind) -> String {
    match kind {
        CombingKind::Native => "native".into(),
        CombingKind::ShortlexBfs { radius_budget } => format!("shortlex-bfs({radius_budget})"),
    }
}

/// A finished report: JSON always, CSV for tables.
struct Report {
    json: String,
    csv: Option<String>,
    summary: String,
}

impl Report {
    fn table<T: CsvTable + Serialize>(t: &T, summary: String) -> Result<Report, CliError> {
        Ok(Report {
            json: to_json(t)?,
            csv: Some(to_csv(t)),
            summary,
        })
    }

    fn document<T: Serialize>(t: &T, summary: String) -> Result<Report, CliError> {
        Ok(Report {
            json: to_json(t)?,
            csv: None,
            summary,
        })
    }
}

fn fit_summary(fit: &GrowthFit) -> String {
    let mut s = format!(
        "fit: a = {:.4} [{:.4}, {:.4}], b = {:.4} [{:.4}, {:.4}]",
        fit.a, fit.a_ci.0, fit.a_ci.1, fit.b, fit.b_ci.0, fit.b_ci.1
    );
    for d in &fit.doubling {
        s.push_str(&format!("\n  mean({})/mean({}) = {:.4}", d.next_n, d.n, d.ratio));
    }
    s
}

#[derive(Serialize)]
struct CorridorSummary {
    t: usize,
    degenerate: bool,
    checkpoints: Vec<usize>,
    flag_a: bool,
    flag_b: bool,
    claim_applicable: bool,
    claim_holds: bool,
    max_deviation: usize,
    loop_lengths: Vec<usize>,
    loop_areas: Vec<AreaEstimate>,
    total_bound: usize,
    loop_length_bound: f64,
    loops_within_bound: bool,
}

#[derive(Serialize)]
struct FillSummary {
    group: String,
    n: usize,
    seed: u64,
    trial: u64,
    boundary_length: usize,
    boundary: String,
    area: AreaEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    corridor: Option<CorridorSummary>,
}

fn execute(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    cfg.validate()?;
    let model = load_group(cfg)?;
    let chain = || Chain::from_spec(&model, &cfg.chain).field("chain");
    let combing = Combing::new(&model, cfg.combing);
    let meta = |chain: &Chain| Meta::new(&cfg.group, chain.descriptor(), &combing_name(cfg.combing), cfg.seed);

    match cfg.experiment {
        Experiment::Rdehn => {
            let chain = chain()?;
            let basepoints = cfg
                .basepoints
                .iter()
                .map(|s| model.evaluate(&model.parse_word(s)?))
                .collect::<Result<Vec<NormalForm>, Error>>()
                .field("basepoints")?;
            let rc = RDehnConfig {
                n_grid: cfg.n_grid.clone(),
                trials: cfg.trials,
                seed: cfg.seed,
                basepoints,
                area: cfg.area,
                keep_samples: cfg.keep_samples || cfg.fit_degree.is_some(),
            };
            let mut table = estimate_rdehn(&chain, &combing, &rc, meta(&chain))?;
            let mut summary: Vec<String> = table
                .rows
                .iter()
                .map(|r| {
                    format!(
                        "n = {}: mean fill {:.4} [{:.4}, {:.4}], mean |W| {:.1}, exact {:.3}{}",
                        r.n,
                        r.mean_fill,
                        r.ci_lo,
                        r.ci_hi,
                        r.mean_boundary_len,
                        r.exact_fraction,
                        if r.flagged { format!(", {} failed trials", r.failures) } else { String::new() }
                    )
                })
                .collect();
            if let Some(d) = cfg.fit_degree {
                let fit = fit_growth(&GrowthPoint::from_rdehn(&table), d, cfg.seed).field("n_grid")?;
                summary.push(fit_summary(&fit));
            }
            if !cfg.keep_samples {
                for r in &mut table.rows {
                    r.samples.clear();
                }
            }
            Report::table(&table, summary.join("\n"))
        }
        Experiment::DehnWorst => {
            let table = estimate_worstcase_dehn(&model, cfg.max_len, DEFAULT_MAX_DEHN_LEN, &cfg.area)?;
            let mut summary: Vec<String> = table
                .rows
                .iter()
                .map(|r| format!("length {}: max area {} ({})", r.length, r.max_area, r.witness))
                .collect();
            if let Some(d) = cfg.fit_degree {
                let pts: Vec<GrowthPoint> = GrowthPoint::from_dehn(&table)
                    .into_iter()
                    .filter(|p| p.mean > 0.0)
                    .collect();
                let fit = fit_growth(&pts, d, cfg.seed).field("max_len")?;
                summary.push(fit_summary(&fit));
            }
            Report::table(&table, summary.join("\n"))
        }
        Experiment::Deviation => {
            let chain = chain()?;
            let p = deviation_profile(&chain, &combing, cfg.n_grid[0], cfg.trials, cfg.seed, meta(&chain))?;
            let fit = match p.fit {
                Some(f) => format!("slope {:.4}, R^2 {:.4}", f.slope, f.r2),
                None => "no fit".into(),
            };
            let summary = format!(
                "n = {}: tail {:?}\nfit on [{}, {}]: {fit}, C1 = {}",
                p.n,
                p.tail.iter().map(|x| fmt_float(*x)).collect::<Vec<_>>(),
                p.fit_range.0,
                p.fit_range.1,
                p.c1.map_or("n/a".into(), |c| format!("{c:.4}"))
            );
            Report::table(&p, summary)
        }
        Experiment::Subwalk => {
            let chain = chain()?;
            let r = subwalk_progress(&chain, &cfg.n_grid, cfg.trials, &cfg.c3_grid, cfg.r, cfg.seed, meta(&chain))?;
            let summary = r
                .rows
                .iter()
                .map(|row| format!("n = {}, C3 = {}: frequency {:.4} (target {:.4})", row.n, row.c3, row.frequency, row.target))
                .collect::<Vec<_>>()
                .join("\n");
            Report::table(&r, summary)
        }
        Experiment::Tameness => {
            let chain = chain()?;
            let rep = chain.check_tameness(cfg.n_max, cfg.tameness, cfg.reach_cap)?;
            let summary = format!(
                "rho = {:.4} (sup {:.4}), bounded jumps {}, non-amenable {}, irreducible {}",
                rep.rho_fit,
                rep.rho_sup,
                rep.verdict.bounded_jumps,
                rep.verdict.non_amenable,
                rep.verdict.irreducible
            );
            Report::document(&rep, summary)
        }
        Experiment::CombingCheck => {
            let cert = combing.verify_quasigeodesic(cfg.radius)?;
            let summary = format!(
                "D = {} on the radius {} ball ({} elements), geodesic {}",
                cert.d, cert.radius, cert.elements_checked, cert.geodesic
            );
            Report::document(&cert, summary)
        }
        Experiment::Area => {
            let w = model.parse_word(cfg.word.as_deref().unwrap_or_default()).field("word")?;
            let a = area_dispatch(&model, &w, &cfg.area).field("word")?;
            let summary = format!("area {} ({:?})", a.value, a.grade);
            Report::document(&a, summary)
        }
        Experiment::Fill => {
            let chain = chain()?;
            let n = cfg.n_grid[0];
            let path = chain.sample_path(&NormalForm::identity(), n, cfg.seed, cfg.trial)?;
            let fill = fill_area(&combing, &path, &cfg.area)?;
            let corridor = match cfg.corridor {
                None => None,
                Some(params) => {
                    let params = CorridorParams {
                        k: params.k.max(chain.jump_bound()),
                        ..params
                    };
                    let d = corridor_decompose(&combing, &path, &params, &cfg.area)?;
                    let claim = claim_projections_increasing(&d);
                    Some(CorridorSummary {
                        t: d.checkpoints.len() - 1,
                        degenerate: d.degenerate,
                        checkpoints: d.checkpoints.clone(),
                        flag_a: d.flag_a,
                        flag_b: d.flag_b,
                        claim_applicable: claim.applicable,
                        claim_holds: claim.holds,
                        max_deviation: d.max_deviation,
                        loop_lengths: d.loops.iter().map(|l| l.len()).collect(),
                        loop_areas: d.loop_areas.clone(),
                        total_bound: d.total_bound,
                        loop_length_bound: d.loop_length_bound,
                        loops_within_bound: d.loops_within_bound,
                    })
                }
            };
            let s = FillSummary {
                group: cfg.group.clone(),
                n,
                seed: cfg.seed,
                trial: cfg.trial,
                boundary_length: fill.word.len(),
                boundary: model.format_word(&fill.word),
                area: fill.area,
                corridor,
            };
            let summary = format!("|W| = {}, area {} ({:?})", s.boundary_length, s.area.value, s.area.grade);
            Report::document(&s, summary)
        }
    }
}

fn emit(cfg: &ExperimentConfig, report: Report) -> Result<(), CliError> {
    match &cfg.output {
        Some(path) => {
            let format = cfg.format.unwrap_or_else(|| Format::from_path(path));
            let text = match format {
                Format::Json => report.json,
                Format::Csv => report
                    .csv
                    .ok_or_else(|| CliError::invalid("format", "CSV is only available for tabular reports"))?,
            };
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| CliError::invalid("output", e.to_string()))?;
            }
            std::fs::write(path, text).map_err(|e| CliError::invalid("output", e.to_string()))?;
            println!("{}", report.summary);
            println!("wrote {}", path.display());
        }
        None => {
            let text = match (cfg.format, report.csv) {
                (Some(Format::Json), _) | (_, None) => report.json,
                (_, Some(csv)) => csv,
            };
            print!("{text}");
        }
    }
    Ok(())
}

fn main_inner(cli: Cli) -> Result<(), CliError> {
    let (flags, experiment) = match &cli.command {
        Command::Rdehn(f) => (f, Some(Experiment::Rdehn)),
        Command::DehnWorst(f) => (f, Some(Experiment::DehnWorst)),
        Command::Deviation(f) => (f, Some(Experiment::Deviation)),
        Command::Subwalk(f) => (f, Some(Experiment::Subwalk)),
        Command::Tameness(f) => (f, Some(Experiment::Tameness)),
        Command::CombingCheck(f) => (f, Some(Experiment::CombingCheck)),
        Command::Area(f) => (f, Some(Experiment::Area)),
        Command::Fill(f) => (f, Some(Experiment::Fill)),
        Command::Run(f) => (f, None),
    };
    let mut cfg = match &flags.config {
        Some(path) => ExperimentConfig::load(path)?,
        None if experiment.is_none() => return Err(CliError::invalid("config", "run needs --config")),
        None => ExperimentConfig::default(),
    };
    if let Some(e) = experiment {
        cfg.experiment = e;
    }
    apply_flags(flags, &mut cfg)?;
    if flags.dump_config {
        print!("{}", to_json(&cfg)?);
        return Ok(());
    }
    if let Some(jobs) = flags.jobs.filter(|&j| j > 0) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::invalid("jobs", e.to_string()))?;
    }
    let report = execute(&cfg)?;
    emit(&cfg, report)
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", serde_json::to_string(e).expect("error serializes"));
    ExitCode::from(e.exit)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let field = match e.get(ContextKind::InvalidArg) {
                Some(ContextValue::String(s)) => s.clone(),
                _ => "arguments".into(),
            };
            let message = e.render().to_string();
            return fail(&CliError::invalid(&field, message.trim()));
        }
    };
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
