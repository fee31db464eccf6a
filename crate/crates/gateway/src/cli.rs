//! The `tutor` command line.

use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use tutor_core::kb::{parse_course_file, validate_course, CourseGraph};
use tutor_core::{EventBody, LearnerId};

use crate::config::{GatewayConfig, CONFIG_ENV};
use crate::error::GatewayError;
use crate::service::Gateway;
use crate::sim::{run_cohort, CohortReport, CohortSpec};

#[derive(Debug, Parser)]
#[command(name = "tutor", version, about = "Adaptive tutoring gateway")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Cmd,
}

/// Overrides for the configuration file.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON configuration file.
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub course: Option<PathBuf>,
    #[arg(long, global = true)]
    pub profiler: Option<PathBuf>,
    #[arg(long, global = true)]
    pub data_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub listen: Option<String>,
    #[arg(long, global = true)]
    pub max_repeats: Option<u32>,
    #[arg(long, global = true)]
    pub min_questions_per_cell: Option<usize>,
    #[arg(long, global = true)]
    pub pretest_count: Option<usize>,
    #[arg(long, global = true)]
    pub posttest_count: Option<usize>,
    /// Skip fsync after each log append.
    #[arg(long, global = true)]
    pub no_fsync: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Run the HTTP gateway.
    Serve,
    /// Check a course file and print every violation.
    Validate { course: PathBuf },
    /// Run simulated cohorts and print their summary.
    Simulate(SimulateArgs),
    /// Print a learner's replayed history.
    Report { learner_id: String },
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 100)]
    pub learners: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub ability_mean: f64,
    #[arg(long, default_value_t = 0.5)]
    pub ability_spread: f64,
    #[arg(long, default_value_t = 1.0)]
    pub match_bonus: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Run one arm only; both when omitted.
    #[arg(long, value_enum)]
    pub style_match: Option<Toggle>,
    /// Also write the summary as CSV; `-` for standard output.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Write the full report, traces included, as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

impl CommonArgs {
    pub fn resolve(&self) -> Result<GatewayConfig, GatewayError> {
        let mut cfg = match &self.config {
            Some(p) => GatewayConfig::from_file(p)?,
            None => GatewayConfig::default(),
        };
        if let Some(v) = &self.course {
            cfg.course = v.clone();
        }
        if let Some(v) = &self.profiler {
            cfg.profiler = v.clone();
        }
        if let Some(v) = &self.data_dir {
            cfg.data_dir = v.clone();
        }
        if let Some(v) = &self.listen {
            cfg.listen = v.clone();
        }
        if let Some(v) = self.max_repeats {
            cfg.tutor.max_repeats = v;
        }
        if let Some(v) = self.min_questions_per_cell {
            cfg.tutor.min_questions_per_cell = v;
        }
        if let Some(v) = self.pretest_count {
            cfg.tutor.pretest_count = Some(v);
        }
        if let Some(v) = self.posttest_count {
            cfg.tutor.posttest_count = Some(v);
        }
        if self.no_fsync {
            cfg.fsync = false;
        }
        cfg.tutor.validate().map_err(GatewayError::Config)?;
        Ok(cfg)
    }
}

/// Runs every subcommand except `serve`. Returns the process exit code.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32, GatewayError> {
    match &cli.command {
        Cmd::Serve => Err(GatewayError::Config("serve needs an async runtime; use the binary".into())),
        Cmd::Validate { course } => validate(course, &cli.common, out),
        Cmd::Simulate(args) => simulate(args, &cli.common.resolve()?, out),
        Cmd::Report { learner_id } => report(&LearnerId::new(learner_id.as_str()), &cli.common.resolve()?, out),
    }
}

fn io(e: std::io::Error) -> GatewayError {
    GatewayError::Store(e.into())
}

pub fn validate(path: &PathBuf, common: &CommonArgs, out: &mut dyn Write) -> Result<i32, GatewayError> {
    let rules = common.resolve()?.tutor.validation_rules();
    let bytes = std::fs::read(path).map_err(|e| GatewayError::Config(format!("{}: {e}", path.display())))?;
    let file = match parse_course_file(&bytes) {
        Ok(f) => f,
        Err(e) => {
            writeln!(out, "{e}").map_err(io)?;
            return Ok(1);
        }
    };
    let violations = validate_course(&CourseGraph::from_file(file), rules);
    for v in &violations {
        writeln!(out, "{v}").map_err(io)?;
    }
    writeln!(out, "{} violations", violations.len()).map_err(io)?;
    Ok(if violations.is_empty() { 0 } else { 1 })
}

#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    cohort: &'a str,
    learners: usize,
    sessions: usize,
    mean_posttest_score: f64,
    completion_rate: f64,
    mean_attempts: f64,
    skip_rate: f64,
    defer_rate: f64,
}

pub fn simulate(args: &SimulateArgs, cfg: &GatewayConfig, out: &mut dyn Write) -> Result<i32, GatewayError> {
    let course = Arc::new(cfg.load_course()?);
    let profiler = cfg.load_profiler()?;
    let arms: Vec<bool> = match args.style_match {
        Some(Toggle::On) => vec![true],
        Some(Toggle::Off) => vec![false],
        None => vec![true, false],
    };
    let mut reports: Vec<(&str, CohortReport)> = Vec::new();
    for matched in arms {
        let spec = CohortSpec {
            learners: args.learners,
            ability_mean: args.ability_mean,
            ability_spread: args.ability_spread,
            match_bonus: args.match_bonus,
            style_match: matched,
            seed: args.seed,
        };
        let report = run_cohort(course.clone(), &cfg.tutor, &profiler, &spec)
            .map_err(|e| GatewayError::Config(format!("simulation failed: {e}")))?;
        reports.push((if matched { "matched" } else { "mismatched" }, report));
    }

    writeln!(
        out,
        "{:<12}{:>10}{:>10}{:>12}{:>12}{:>12}{:>10}{:>10}",
        "cohort", "learners", "sessions", "mean_post", "completion", "attempts", "skipped", "deferred"
    )
    .map_err(io)?;
    let opt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.2}"));
    for (name, r) in &reports {
        let s = &r.summary;
        writeln!(
            out,
            "{:<12}{:>10}{:>10}{:>12}{:>12.3}{:>12}{:>10.3}{:>10.3}",
            name,
            s.learners,
            s.sessions,
            opt(s.mean_posttest_score),
            s.completion_rate,
            opt(s.mean_attempts),
            s.skip_rate,
            s.defer_rate
        )
        .map_err(io)?;
    }

    if let Some(path) = &args.csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        for (name, r) in &reports {
            let s = &r.summary;
            w.serialize(CsvRow {
                cohort: name,
                learners: s.learners,
                sessions: s.sessions,
                mean_posttest_score: s.mean_posttest_score.unwrap_or(f64::NAN),
                completion_rate: s.completion_rate,
                mean_attempts: s.mean_attempts.unwrap_or(f64::NAN),
                skip_rate: s.skip_rate,
                defer_rate: s.defer_rate,
            })
            .map_err(|e| GatewayError::Config(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| GatewayError::Config(e.to_string()))?;
        if path.as_os_str() == "-" {
            out.write_all(&bytes).map_err(io)?;
        } else {
            std::fs::write(path, bytes).map_err(io)?;
        }
    }
    if let Some(path) = &args.json {
        let all: Vec<&CohortReport> = reports.iter().map(|(_, r)| r).collect();
        let bytes = serde_json::to_vec_pretty(&all).map_err(|e| GatewayError::Config(e.to_string()))?;
        std::fs::write(path, bytes).map_err(io)?;
    }
    Ok(0)
}

pub fn describe(body: &EventBody) -> String {
    match body {
        EventBody::LearnerCreated { name } => format!("name={name}"),
        EventBody::ProfileSubmitted { answers, profile } => {
            format!("{} answers, dominant style {}", answers.len(), profile.dominant)
        }
        EventBody::SessionStarted {
            session_id,
            concept_id,
            seed,
        } => format!("{session_id} concept={concept_id} seed={seed}"),
        EventBody::AnswerSubmitted {
            question_id,
            choice,
            correct,
            ..
        } => format!(
            "{question_id} -> {} ({})",
            (b'A' + *choice as u8) as char,
            if *correct { "correct" } else { "wrong" }
        ),
        EventBody::PageAdvanced { page, .. } => format!("page {page}"),
        EventBody::PhaseFinalized { phase, score, level, .. } => {
            format!("{} {score}/100 {}", phase.label(), level.label())
        }
        EventBody::SessionClosed {
            status, level, reason, ..
        } => format!("{status:?} at {} ({reason:?})", level.label()),
    }
}

pub fn report(lid: &LearnerId, cfg: &GatewayConfig, out: &mut dyn Write) -> Result<i32, GatewayError> {
    let gw = Gateway::from_config(cfg)?;
    let history = gw.history(lid)?;
    for rec in &history {
        writeln!(out, "{:>5} {:>14} {:<17} {}", rec.seq, rec.ts, rec.body.kind(), describe(&rec.body)).map_err(io)?;
    }
    let p = gw.progress(lid)?;
    let level = p.learner_level.map_or("not assessed".to_string(), |l| l.to_string());
    writeln!(out, "learner level: {level}").map_err(io)?;
    for (c, r) in &p.concept_records {
        let score = r.last_score.map_or("-".to_string(), |s| s.to_string());
        writeln!(out, "  {c}: {:?}, attempts {}, last score {score}", r.status, r.attempts).map_err(io)?;
    }
    Ok(0)
}
