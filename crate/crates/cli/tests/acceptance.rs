//! One check per acceptance criterion, each run at its stated scale. Every
//! criterion prints a PASS or FAIL line; the test fails if any line is FAIL.

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Child, Command, Stdio};
use std::sync::Arc;
use std::time::Instant;

use prooftutor_core::analytics::{classify_attempted, compute_metrics, score};
use prooftutor_core::hints::{
    next_step_hint, value_iterate, waypoint_hint, HintSource, HintType, NetworkLibrary, RewardConfig,
};
use prooftutor_core::logic::{validate_derivation, RuleId};
use prooftutor_core::proof::{NodeId, NodeKind, StateKey};
use prooftutor_core::session::{read_jsonl, read_jsonl_file, replay, unsolicited_cap, EventBody, SessionLog};
use prooftutor_core::simulator::{simulate_attempt, student_seed, StudentPolicy};
use prooftutor_service::{run_curriculum, TutorClient};
use prooftutor_testkit::fixtures::{self, f, fs};
use prooftutor_testkit::formulas::fuzz_step;
use prooftutor_testkit::networks::random_network;
use prooftutor_testkit::oracles::{necessary_by_deletion, one_step_brute_force, tt_entails, waypoint_oracle};
use prooftutor_testkit::sessions::fuzz_session;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn kernel_soundness() -> Outcome {
    let atoms: Vec<char> = "ABCDEFGH".chars().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let t = Instant::now();
    let mut violations = 0;
    for i in 0..1_000 {
        let rule = RuleId::ALL[i % RuleId::ALL.len()];
        let step = fuzz_step(&mut rng, rule, &atoms);
        let accepted = validate_derivation(rule, &step.premises, &step.conclusion) == Ok(true);
        if !accepted || !tt_entails(&step.premises, &step.conclusion) {
            violations += 1;
        }
    }
    let secs = t.elapsed().as_secs_f64();
    check(
        violations == 0 && secs < 10.0,
        format!("1000 derivations over {} rules, {violations} violations, {secs:.2}s", RuleId::ALL.len()),
    )
}

fn value_iteration() -> Outcome {
    let cfg = RewardConfig::default();
    let mut chain = fixtures::simp_mp_chain();
    chain.solve(&cfg).map_err(|e| e.to_string())?;
    let v2 = cfg.goal_reward;
    let v1 = cfg.step_cost + cfg.discount * v2;
    let v0 = cfg.step_cost + cfg.discount * v1;
    let key = |s: &[&str]| StateKey::from_statements(&fs(s));
    let got = [
        chain.value(&key(&["I&F", "F->G&~H"])).unwrap(),
        chain.value(&key(&["I&F", "F->G&~H", "F"])).unwrap(),
        chain.value(&key(&["I&F", "F->G&~H", "F", "G&~H"])).unwrap(),
    ];
    let chain_ok = [(got[0], v0, 79.1), (got[1], v1, 89.0), (got[2], v2, 100.0)]
        .iter()
        .all(|(g, hand, published)| (g - hand).abs() < 1e-9 && (g - published).abs() < 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let net = random_network(&mut rng, 10_000, 30, 12);
    let t = Instant::now();
    let report = value_iterate(&net, &cfg).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    check(
        chain_ok && report.residual < 1e-6 && secs < 1.0 && net.states().len() <= 10_000,
        format!(
            "chain V = ({:.1}, {:.1}, {:.1}); {} states, residual {:.1e}, {secs:.3}s",
            got[0],
            got[1],
            got[2],
            net.states().len(),
            report.residual
        ),
    )
}

/// 100 networks built from simulated corpora with different seeds.
fn corpus_networks(count: usize) -> Vec<Arc<NetworkLibrary>> {
    let problems = fixtures::training_problems();
    let libs = (0..count.div_ceil(problems.len()) as u64)
        .into_par_iter()
        .map(|seed| fixtures::library(&problems, 1_000 + seed))
        .collect();
    libs
}

fn next_step_property(libs: &[Arc<NetworkLibrary>]) -> Outcome {
    let nets: Vec<_> = libs.iter().flat_map(|l| l.problem_ids().map(move |p| l.get(p).unwrap())).take(100).collect();
    let (states, violations) = nets
        .par_iter()
        .map(|net| {
            let mut states = 0;
            let mut bad = 0;
            for (key, info) in net.states() {
                if info.goal {
                    continue;
                }
                let statements = key.statements();
                if let Ok(h) = next_step_hint(net, &statements) {
                    states += 1;
                    bad += !one_step_brute_force(&statements, &h.statement, &net.catalog) as usize;
                }
            }
            (states, bad)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    check(
        nets.len() == 100 && states > 0 && violations == 0,
        format!("{} networks, {states} hinted states, {violations} violations", nets.len()),
    )
}

fn waypoint_property() -> Outcome {
    let problems = fixtures::training_problems();
    let small_mix = fixtures::policy_mix()
        .policy
        .into_iter()
        .map(|mut p| {
            p.count = p.count.min(20);
            p
        })
        .collect::<Vec<_>>();
    let logs = prooftutor_core::simulator::generate_corpus(&small_mix, &problems, 5).map_err(|e| e.to_string())?;
    let attempts = fixtures::attempts(&logs);
    let pids: Vec<String> = problems.iter().map(|p| p.id.clone()).collect();
    let lib = NetworkLibrary::build(&attempts, &pids, &RewardConfig::default()).map_err(|e| e.to_string())?;
    let mut nets: Vec<_> = lib
        .problem_ids()
        .map(|p| lib.get(p).unwrap().clone())
        .filter(|n| n.states().len() <= 1_000)
        .collect();
    let corpus_count = nets.len();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..40 {
        let size = rng.random_range(50..=1_000);
        let mut net = random_network(&mut rng, size, 24, 10);
        net.solve(&RewardConfig::default()).map_err(|e| e.to_string())?;
        if net.states().len() <= 1_000 {
            nets.push(net);
        }
    }
    let (checked, mismatches) = nets
        .par_iter()
        .map(|net| {
            let mut checked = 0;
            let mut bad = 0;
            for (key, info) in net.states() {
                if info.goal {
                    continue;
                }
                let statements = key.statements();
                let ok = match (waypoint_hint(net, &statements), waypoint_oracle(net, &statements)) {
                    (Ok(h), Some((s, d))) => {
                        checked += 1;
                        h.hint_type == HintType::Waypoint && h.statement == s && h.depth == d && (2..=3).contains(&d)
                    }
                    (Ok(h), None) => h.hint_type == HintType::NextStep && h.depth == 1,
                    (Err(_), oracle) => oracle.is_none(),
                };
                bad += !ok as usize;
            }
            (checked, bad)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    check(
        checked > 0 && mismatches == 0,
        format!(
            "{} networks ({corpus_count} corpus, {} random), {checked} waypoint hints, {mismatches} mismatches",
            nets.len(),
            nets.len() - corpus_count
        ),
    )
}

fn mean_steps_until_justified(lib: &Arc<NetworkLibrary>, policy: &StudentPolicy, condition: HintType) -> f64 {
    let problems = fixtures::training_problems();
    let logs: Vec<SessionLog> = (0..20usize)
        .into_par_iter()
        .flat_map_iter(|seed| {
            let problems = &problems;
            (0..problems.len()).map(move |i| {
                let mut p = policy.clone();
                p.seed = student_seed(seed as u64, i);
                simulate_attempt(&p, &problems[i], Some(condition), lib, &format!("t1-{seed}-{i}")).unwrap()
            })
        })
        .collect();
    compute_metrics(&logs).unwrap().hints.steps_until_justified
}

fn table_one_directions(lib: &Arc<NetworkLibrary>) -> Outcome {
    let ideal = StudentPolicy::ideal(0);
    let noisy = StudentPolicy {
        name: "noisy".into(),
        p_follow: 0.9,
        p_err: 0.1,
        ..StudentPolicy::ideal(0)
    };
    let ns_ideal = mean_steps_until_justified(lib, &ideal, HintType::NextStep);
    let wp_ideal = mean_steps_until_justified(lib, &ideal, HintType::Waypoint);
    let ns_noisy = mean_steps_until_justified(lib, &noisy, HintType::NextStep);
    let wp_noisy = mean_steps_until_justified(lib, &noisy, HintType::Waypoint);
    check(
        ns_ideal == 1.0
            && (2.0..=3.0).contains(&wp_ideal)
            && (1.0..=1.5).contains(&ns_noisy)
            && (2.0..=3.0).contains(&wp_noisy),
        format!("steps until justified: ideal NS {ns_ideal:.2} WP {wp_ideal:.2}; noisy NS {ns_noisy:.2} WP {wp_noisy:.2}"),
    )
}

/// Unsolicited hints and the most hints pending at once, read off the events.
fn hint_load(log: &SessionLog) -> (usize, usize) {
    let mut pending: BTreeSet<NodeId> = BTreeSet::new();
    let mut statements = std::collections::BTreeMap::new();
    let (mut unsolicited, mut worst) = (0, 0);
    for e in log.events() {
        match &e.body {
            EventBody::HintShown {
                node, statement, source, ..
            } => {
                unsolicited += (*source == HintSource::Unsolicited) as usize;
                pending.insert(*node);
                statements.insert(*node, statement.clone());
                worst = worst.max(pending.len());
            }
            EventBody::HintJustified { node, .. } => {
                pending.remove(node);
            }
            EventBody::Delete { node, reverted, .. } => {
                pending.remove(node);
                pending.extend(reverted.iter().copied());
                worst = worst.max(pending.len());
            }
            EventBody::ProblemStart(_) => pending.clear(),
            _ => {}
        }
    }
    (unsolicited, worst)
}

fn scheduler_bounds(lib: &Arc<NetworkLibrary>) -> Outcome {
    let problems = fixtures::training_problems();
    let violations: usize = (0..10_000usize)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(student_seed(31, i));
            let policy = StudentPolicy {
                name: "random".into(),
                p_follow: rng.random(),
                p_err: rng.random_range(0.0..0.5),
                beta: rng.random(),
                p_giveup_per_step: rng.random_range(0.0..0.05),
                seed: rng.random(),
            };
            let p = &problems[rng.random_range(0..problems.len())];
            let condition = [HintType::NextStep, HintType::Waypoint][rng.random_range(0..2)];
            let log = simulate_attempt(&policy, p, Some(condition), lib, &format!("sched-{i}")).unwrap();
            let (unsolicited, worst) = hint_load(&log);
            (unsolicited > unsolicited_cap(p.expert_length) || worst > 1) as usize
        })
        .sum();
    check(violations == 0, format!("10000 attempts, {violations} violations"))
}

fn adoption_oracle(lib: &Arc<NetworkLibrary>) -> Outcome {
    let problems = fixtures::training_problems();
    let proofs = fixtures::completed_proofs(&problems, lib, 1_000, 8);
    let mismatches = proofs
        .par_iter()
        .filter(|p| p.necessary_nodes().ok() != Some(necessary_by_deletion(p)))
        .count();
    let fixed = fixtures::justified_not_adopted();
    let hint = fixed.nodes().iter().find(|n| n.kind == NodeKind::Hint).unwrap();
    let regression = hint.is_justified()
        && !fixed.necessary_nodes().unwrap().contains(&hint.id)
        && !necessary_by_deletion(&fixed).contains(&hint.id);
    let with_hints = proofs.iter().filter(|p| p.nodes().iter().any(|n| n.kind == NodeKind::Hint)).count();
    check(
        proofs.len() == 1_000 && mismatches == 0 && regression,
        format!("{} proofs ({with_hints} with hints), {mismatches} mismatches, justified-not-adopted case holds: {regression}", proofs.len()),
    )
}

fn score_function() -> Outcome {
    let anchors = score(0.0, 0.0, 1.0) == Ok(1.0) && score(1.0, 1.0, 0.0) == Ok(0.0) && score(0.5, 0.5, 0.5) == Ok(0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut violations = 0;
    for _ in 0..10_000 {
        let (t, s, a, d): (f64, f64, f64, f64) = (rng.random(), rng.random(), rng.random(), rng.random());
        let base = score(t, s, a).unwrap();
        let better = [
            score((t - d).max(0.0), s, a).unwrap(),
            score(t, (s - d).max(0.0), a).unwrap(),
            score(t, s, (a + d).min(1.0)).unwrap(),
        ];
        violations += better.iter().any(|b| *b < base) as usize;
    }
    check(anchors && violations == 0, format!("anchors exact: {anchors}; 10000 triples, {violations} violations"))
}

fn attempted_classifier() -> Outcome {
    let cases = fixtures::attempted_cases();
    let wrong: Vec<&str> = cases
        .iter()
        .filter(|c| {
            let targets: Vec<_> = c.targets.iter().map(|t| t.map(f)).collect();
            classify_attempted(c.hint_type, &f(c.hint), &targets) != c.attempted
        })
        .map(|c| c.name)
        .collect();
    check(wrong.is_empty(), format!("{} labeled traces, disagreements: {wrong:?}", cases.len()))
}

fn replay_determinism(lib: &Arc<NetworkLibrary>) -> Outcome {
    let problems = fixtures::training_problems();
    let mismatches: usize = (0..1_000u64)
        .into_par_iter()
        .map(|seed| {
            let condition = [None, Some(HintType::NextStep), Some(HintType::Waypoint)][seed as usize % 3];
            let start = (seed as usize * 5) % problems.len();
            let chosen: Vec<_> = problems.iter().cycle().skip(start).take(4).cloned().collect();
            let fuzzed = fuzz_session(seed, &chosen, condition, lib, 60);
            let logs = read_jsonl(fuzzed.log.to_jsonl().as_bytes(), None).unwrap();
            let keys: Vec<_> = replay(&logs[0]).unwrap().attempts.into_iter().map(|a| a.trace.keys).collect();
            (keys != fuzzed.live_keys) as usize
        })
        .sum();
    check(mismatches == 0, format!("1000 fuzzed sessions, {mismatches} mismatched key sequences"))
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_prooftutor"))
}

fn run(cmd: &mut Command) -> Result<String, String> {
    let out = cmd.output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{:?}: {}", cmd, String::from_utf8_lossy(&out.stderr)));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

struct Server(Child);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn end_to_end(dir: &Path) -> Outcome {
    let repo = fixtures::repo_dir();
    let curriculum = fixtures::curriculum_dir();
    let corpus = dir.join("corpus.jsonl");
    let nets = dir.join("networks");
    let events = dir.join("events.jsonl");
    let csv = dir.join("metrics.csv");
    run(bin()
        .args(["gen-corpus", "--seed", "7", "--problems"])
        .arg(&curriculum)
        .arg("--policies")
        .arg(repo.join("config/policies.toml"))
        .arg("--out")
        .arg(&corpus))?;
    run(bin()
        .args(["build-network", "--problem", "all", "--logs"])
        .arg(&corpus)
        .arg("--rewards")
        .arg(repo.join("config/rewards.toml"))
        .arg("--out")
        .arg(&nets))?;
    let mut child = bin()
        .args(["serve", "--port", "0", "--curriculum"])
        .arg(&curriculum)
        .arg("--networks")
        .arg(&nets)
        .arg("--colors")
        .arg(&corpus)
        .arg("--events")
        .arg(&events)
        .stdout(Stdio::piped())
        .spawn()
        .map_err(|e| e.to_string())?;
    let stdout = child.stdout.take().unwrap();
    let server = Server(child);
    let mut line = String::new();
    BufReader::new(stdout).read_line(&mut line).map_err(|e| e.to_string())?;
    let base = line.trim().strip_prefix("listening on ").ok_or(format!("unexpected banner {line:?}"))?.to_string();

    let loaded = fixtures::curriculum();
    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    let finished = runtime.block_on(async {
        let client = TutorClient::new(base);
        let mut phases = Vec::new();
        for (student, condition) in [("e2e-ns", HintType::NextStep), ("e2e-wp", HintType::Waypoint)] {
            let view = client.create_session(student, Some(condition)).await.map_err(|e| e.to_string())?;
            let done = run_curriculum(&client, &view.sid, &loaded, true).await.map_err(|e| e.to_string())?;
            phases.push(done.finished);
        }
        Ok::<_, String>(phases)
    })?;
    drop(server);

    let logs = read_jsonl_file(&events).map_err(|e| e.to_string())?;
    let hints: usize = logs
        .iter()
        .flat_map(|l| l.events())
        .filter(|e| matches!(e.body, EventBody::HintShown { .. }))
        .count();
    run(bin().arg("metrics").arg("--logs").arg(&events).arg("--out").arg(&csv))?;
    let text = std::fs::read_to_string(&csv).map_err(|e| e.to_string())?;
    let header: Vec<&str> = text.lines().next().unwrap_or("").split(',').collect();
    let col = header.iter().position(|h| *h == "posttest_total_steps").ok_or("no posttest column")?;
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let posttest_done = rows.iter().all(|r| r[col].parse::<usize>().unwrap_or(0) > 0);
    check(
        finished.iter().all(|f| *f) && rows.len() == 2 && posttest_done && hints > 0,
        format!(
            "{} sessions finished all {} problems, {hints} hints shown, metrics CSV with {} rows",
            finished.len(),
            loaded.sequence().len(),
            rows.len()
        ),
    )
}

/// Runs without the test harness so every criterion line reaches the output.
fn main() {
    let dir = tempfile::tempdir().unwrap();
    let problems = fixtures::training_problems();
    let lib = fixtures::library(&problems, 7);
    let libs = corpus_networks(100);
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("kernel soundness", Box::new(kernel_soundness)),
        ("value iteration", Box::new(value_iteration)),
        ("next-step hint property", Box::new(|| next_step_property(&libs))),
        ("waypoint hint property", Box::new(waypoint_property)),
        ("steps-until-justified directions", Box::new(|| table_one_directions(&lib))),
        ("scheduler bounds", Box::new(|| scheduler_bounds(&lib))),
        ("adoption oracle", Box::new(|| adoption_oracle(&lib))),
        ("score function", Box::new(score_function)),
        ("attempted classifier", Box::new(attempted_classifier)),
        ("replay determinism", Box::new(|| replay_determinism(&lib))),
        ("end to end without UI", Box::new(|| end_to_end(dir.path()))),
    ];
    let mut failed = Vec::new();
    for (name, criterion) in &criteria {
        let t = Instant::now();
        let outcome = criterion();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                println!("FAIL  {name}: {detail} [{secs:.1}s]");
                failed.push(*name);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
