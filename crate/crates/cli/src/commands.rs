use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use prooftutor_core::analytics::{assign_conditions, cohort_rows, hint_correlations, metrics_by_student, write_csv};
use prooftutor_core::hints::{
    build_network_from_attempts, next_step_hint, read_snapshot, waypoint_hint, HintType, NetworkLibrary, RewardConfig,
};
use prooftutor_core::logic::Formula;
use prooftutor_core::proof::ProblemDef;
use prooftutor_core::session::{logs_to_jsonl, read_jsonl_file, replay_all, Curriculum, JsonlSink, Phase, SessionLog};
use prooftutor_core::simulator::{generate_corpus, PolicyMix};
use prooftutor_service::{node_stats_from_logs, AppState};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) => f.write_str(m),
        }
    }
}

fn data(e: impl fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

fn in_file(path: &Path, e: impl fmt::Display) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| in_file(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| in_file(path, e))
}

fn read_logs(path: &Path) -> Result<Vec<SessionLog>, CliError> {
    read_jsonl_file(path).map_err(data)
}

fn parse_phase(name: &str) -> Result<Option<Phase>, CliError> {
    if name == "all" {
        return Ok(None);
    }
    Phase::ALL
        .into_iter()
        .find(|p| p.name() == name)
        .map(Some)
        .ok_or_else(|| CliError::Usage(format!("unknown phase {name:?}")))
}

fn load_problems(dir: &Path, phase: Option<Phase>) -> Result<Vec<ProblemDef>, CliError> {
    let mut problems = if dir.join("curriculum.json").exists() {
        let c = Curriculum::load(dir).map_err(data)?;
        c.sequence().into_iter().map(|(_, p)| p.clone()).collect()
    } else {
        ProblemDef::load_dir(dir).map_err(data)?
    };
    if let Some(phase) = phase {
        problems.retain(|p| p.phase == phase);
    }
    if problems.is_empty() {
        return Err(in_file(dir, "no problems to simulate"));
    }
    Ok(problems)
}

pub fn gen_corpus(dir: &Path, policies: &Path, seed: u64, out: &Path, phase: &str) -> Result<(), CliError> {
    let problems = load_problems(dir, parse_phase(phase)?)?;
    let mix = PolicyMix::from_toml(&read(policies)?).map_err(|e| in_file(policies, e))?;
    let logs = generate_corpus(&mix.policy, &problems, seed).map_err(data)?;
    write(out, &logs_to_jsonl(&logs))?;
    println!(
        "{} sessions over {} problems written to {}",
        logs.len(),
        problems.len(),
        out.display()
    );
    Ok(())
}

pub fn build_network(logs_path: &Path, problems: &[String], rewards: Option<&Path>, out: &Path) -> Result<(), CliError> {
    let cfg = match rewards {
        Some(p) => RewardConfig::from_toml(&read(p)?).map_err(|e| in_file(p, e))?,
        None => RewardConfig::default(),
    };
    let logs = read_logs(logs_path)?;
    let attempts: Vec<_> = replay_all(&logs).map_err(data)?.into_iter().flat_map(|r| r.attempts).collect();
    let all = problems.iter().any(|p| p == "all");
    let pids: Vec<String> = if all {
        let mut ids: Vec<String> = attempts.iter().map(|a| a.pid.clone()).collect();
        ids.sort();
        ids.dedup();
        if ids.is_empty() {
            return Err(in_file(logs_path, "EmptyCorpus: the log holds no attempts"));
        }
        ids
    } else {
        problems.to_vec()
    };
    let single = !all && pids.len() == 1;
    if !single {
        fs::create_dir_all(out).map_err(|e| in_file(out, e))?;
    }
    for pid in &pids {
        let mut net = build_network_from_attempts(&attempts, pid).map_err(|e| in_file(logs_path, e))?;
        let report = net.solve(&cfg).map_err(|e| data(format!("{pid}: {e}")))?;
        let path = if single { out.to_path_buf() } else { out.join(format!("{pid}.net")) };
        write(&path, &prooftutor_core::hints::write_snapshot(&net))?;
        println!(
            "{pid}: {} states, {} transitions, converged in {} sweeps -> {}",
            net.states().len(),
            net.transitions().len(),
            report.iterations,
            path.display()
        );
    }
    Ok(())
}

fn parse_statements(text: &str) -> Result<Vec<Formula>, CliError> {
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<Formula>().map_err(|e| CliError::Usage(format!("--state: {s}: {e}"))))
        .collect()
}

pub fn hint(network: &Path, state: Option<&str>, hint_type: &str) -> Result<(), CliError> {
    let hint_type: HintType = hint_type.parse().map_err(CliError::Usage)?;
    let net = read_snapshot(&read(network)?).map_err(|e| CliError::Data(format!("{}:{}: {}", network.display(), e.line, e.reason)))?;
    let statements = match state {
        Some(s) => parse_statements(s)?,
        None => net.givens.clone(),
    };
    let hint = match hint_type {
        HintType::NextStep => next_step_hint(&net, &statements),
        HintType::Waypoint => waypoint_hint(&net, &statements),
    }
    .map_err(data)?;
    let value = hint.value.map_or("none".to_string(), |v| format!("{v:.1}"));
    let mut notes = String::new();
    if hint.hint_type != hint_type {
        notes.push_str(", next-step fallback");
    }
    if hint.dropped > 0 {
        notes.push_str(&format!(", {} recent statements ignored", hint.dropped));
    }
    println!("{} (depth {}, value {value}{notes})", hint.statement, hint.depth);
    Ok(())
}

pub fn replay(logs_path: &Path, keys: bool) -> Result<(), CliError> {
    let logs = read_logs(logs_path)?;
    let replays = replay_all(&logs).map_err(data)?;
    let mut out = std::io::stdout().lock();
    let mut attempts = 0;
    for r in &replays {
        for a in &r.attempts {
            attempts += 1;
            let errors = a.steps.iter().filter(|s| !s.valid).count();
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\tsteps={}\terrors={}\thints={}\t{}",
                a.sid,
                a.pid,
                a.start.attempt,
                a.phase().name(),
                serde_outcome(a.outcome),
                a.steps.len(),
                errors,
                a.hints.len(),
                a.trace.current_key()
            )
            .map_err(data)?;
            if keys {
                for t in &a.trace.transitions {
                    writeln!(out, "\t{}", t.dst).map_err(data)?;
                }
            }
        }
    }
    writeln!(out, "{} sessions, {attempts} attempts", replays.len()).map_err(data)?;
    Ok(())
}

fn serde_outcome(o: prooftutor_core::session::AttemptOutcome) -> &'static str {
    use prooftutor_core::session::AttemptOutcome::*;
    match o {
        Completed => "completed",
        Restarted => "restarted",
        Skipped => "skipped",
        Open => "open",
    }
}

pub fn metrics(logs_path: &Path, out: &Path, correlations: Option<&Path>) -> Result<(), CliError> {
    let logs = read_logs(logs_path)?;
    let metrics = metrics_by_student(&logs).map_err(data)?;
    if let Some(path) = correlations {
        let mut w = csv::Writer::from_path(path).map_err(|e| in_file(path, e))?;
        w.write_record(["hint_metric", "outcome", "n", "r", "p"]).map_err(data)?;
        for row in hint_correlations(&metrics) {
            let (n, r, p) = match row.result {
                Some(c) => (c.n.to_string(), format!("{:?}", c.r), format!("{:?}", c.p)),
                None => (String::new(), String::new(), String::new()),
            };
            w.write_record([row.hint_metric, &row.outcome, &n, &r, &p]).map_err(data)?;
        }
        w.flush().map_err(|e| in_file(path, e))?;
    }
    let rows = cohort_rows(metrics).map_err(data)?;
    let file = fs::File::create(out).map_err(|e| in_file(out, e))?;
    write_csv(&rows, file).map_err(|e| in_file(out, e))?;
    println!("{} students written to {}", rows.len(), out.display());
    Ok(())
}

pub fn assign(pretest: &Path, conditions: &[String], seed: u64, out: Option<&Path>) -> Result<(), CliError> {
    let conditions: Vec<HintType> = conditions
        .iter()
        .map(|c| c.parse())
        .collect::<Result<_, String>>()
        .map_err(CliError::Usage)?;
    let mut reader = csv::Reader::from_path(pretest).map_err(|e| in_file(pretest, e))?;
    let headers = reader.headers().map_err(|e| in_file(pretest, e))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Data(format!("{}:1: no {name} column", pretest.display())))
    };
    let (student_col, score_col) = (column("student")?, column("score")?);
    let mut scores = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| in_file(pretest, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let at = |what: String| CliError::Data(format!("{}:{line}: {what}", pretest.display()));
        let student = record.get(student_col).unwrap_or("").to_string();
        if student.is_empty() {
            return Err(at("empty student id".into()));
        }
        let raw = record.get(score_col).unwrap_or("");
        let score: f64 = raw.trim().parse().map_err(|_| at(format!("bad score {raw:?}")))?;
        scores.push((student, score));
    }
    let assigned = assign_conditions(&scores, &conditions, seed).map_err(|e| in_file(pretest, e))?;
    let mut text = String::from("student,condition\n");
    for (student, condition) in &assigned {
        text.push_str(&format!("{student},{}\n", condition.code()));
    }
    match out {
        Some(path) => write(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub struct ServeArgs {
    pub curriculum: PathBuf,
    pub port: u16,
    pub networks: Option<PathBuf>,
    pub colors: Option<PathBuf>,
    pub events: Option<PathBuf>,
    pub seed: u64,
    pub host: String,
}

pub fn serve(args: ServeArgs) -> Result<(), CliError> {
    let curriculum = Curriculum::load(&args.curriculum).map_err(data)?;
    let networks = match &args.networks {
        Some(dir) => NetworkLibrary::load_dir(dir).map_err(|e| in_file(dir, e))?,
        None => NetworkLibrary::new(),
    };
    let mut state = AppState::new(Arc::new(curriculum), Arc::new(networks), args.seed);
    if let Some(path) = &args.colors {
        let stats = node_stats_from_logs(&read_logs(path)?).map_err(data)?;
        state = state.with_node_stats(stats);
    }
    if let Some(path) = &args.events {
        let sink = JsonlSink::create(path).map_err(|e| in_file(path, e))?;
        state = state.with_sink(Arc::new(sink));
    }
    let runtime = tokio::runtime::Runtime::new().map_err(data)?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind((args.host.as_str(), args.port))
            .await
            .map_err(|e| data(format!("{}:{}: {e}", args.host, args.port)))?;
        let addr = listener.local_addr().map_err(data)?;
        println!("listening on http://{addr}");
        std::io::stdout().flush().map_err(data)?;
        prooftutor_service::serve(listener, Arc::new(state)).await.map_err(data)
    })
}
