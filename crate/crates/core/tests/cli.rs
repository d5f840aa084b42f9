//! The `tareach` binary and the selftest driver.

mod common;

use std::io::Write;
use std::process::{Command, Output, Stdio};

use common::{corpus, train, TRAIN_FALSE, TRAIN_TRUE};
use tareach::cli::{generated_suite, selftest, write_selftest, EXIT_DIVERGENCE};
use tareach::explorer::Options;
use tareach::model::{ClockConstraint, ClockId};
use tareach::zone::{FormulaBackend, ZoneBackend};

fn tareach(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_tareach"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut pipe = child.stdin.take().unwrap();
    pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(pipe);
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn train_path() -> String {
    corpus("train.tas").display().to_string()
}

/// `go(...)` then a tab then `True` or `False`.
fn is_verdict_line(line: &str) -> bool {
    let Some((query, verdict)) = line.rsplit_once('\t') else {
        return false;
    };
    query.starts_with("go(") && query.ends_with(')') && matches!(verdict, "True" | "False")
}

#[test]
fn train_query_verdicts() {
    let o = tareach(
        &[&train_path(), "--query", TRAIN_TRUE, "--query", TRAIN_FALSE],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        stdout(&o),
        format!("{TRAIN_TRUE}\tTrue\n{TRAIN_FALSE}\tFalse\n")
    );
}

#[test]
fn stats_and_witness_lines() {
    let o = tareach(
        &[&train_path(), "--query", TRAIN_TRUE, "--stats", "--witness"],
        None,
    );
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(is_verdict_line(lines[0]));
    assert!(lines[1].starts_with("stored: 4\tpopped: "), "{}", lines[1]);
    assert!(lines[1].ends_with(" s"));
    assert_eq!(lines[2], "witness: app lower down enter");
}

#[test]
fn query_file_and_stdin() {
    let path = corpus("train.queries").display().to_string();
    let from_file = tareach(&[&train_path(), "--queries", &path], None);
    let from_stdin = tareach(
        &[&train_path()],
        Some(&common::corpus_text("train.queries")),
    );
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(stdout(&from_file), stdout(&from_stdin));
    assert!(stdout(&from_file).lines().all(is_verdict_line));
    assert_eq!(stdout(&from_file).lines().count(), 2);
}

#[test]
fn malformed_query_is_positioned() {
    let o = tareach(&[&train_path(), "--query", "go(Far.nil/true)"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).is_empty());
    assert!(
        stderr(&o).contains("1:16: expected `,`, found `)`"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn broken_spec_and_missing_file() {
    let dir = std::env::temp_dir().join(format!("tareach-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.tas");
    std::fs::write(&bad, "specification s\nClocks x\nStates").unwrap();
    let o = tareach(&[bad.to_str().unwrap(), "--query", TRAIN_TRUE], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("bad.tas:3:1: expected an identifier or `nil`, found `States`"),
        "{}",
        stderr(&o)
    );

    let o = tareach(
        &[
            dir.join("absent.tas").to_str().unwrap(),
            "--query",
            TRAIN_TRUE,
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("absent.tas"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn zone_limit_is_inconclusive() {
    let spec = corpus("divergence.tas").display().to_string();
    let q = "go(l.nil/x=0 ^ y=0 ^ true, l.nil/x>1 ^ true)";
    let o = tareach(
        &[&spec, "--query", q, "--faithful", "--max-zones", "500"],
        None,
    );
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("inconclusive: stored-zone limit 500 reached"));
    let o = tareach(&[&spec, "--query", q], None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), format!("{q}\tFalse\n"));
}

#[test]
fn faithful_mode_and_reruns_agree() {
    let path = corpus("train.queries").display().to_string();
    let base = tareach(&[&train_path(), "--queries", &path, "--witness"], None);
    let again = tareach(&[&train_path(), "--queries", &path, "--witness"], None);
    let faithful = tareach(&[&train_path(), "--queries", &path, "--faithful"], None);
    let formula = tareach(
        &[
            &train_path(),
            "--queries",
            &path,
            "--backend",
            "formula",
            "--order",
            "bfs",
        ],
        None,
    );
    assert_eq!(stdout(&base), stdout(&again));
    let verdicts = |o: &Output| {
        stdout(o)
            .lines()
            .filter(|l| is_verdict_line(l))
            .map(str::to_owned)
            .collect::<Vec<_>>()
    };
    assert_eq!(verdicts(&base), verdicts(&faithful));
    assert_eq!(verdicts(&base), verdicts(&formula));
}

#[test]
fn selftest_generated_and_empty() {
    let o = tareach(&[&train_path(), "--selftest"], None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "agree: 48/48\n");

    let dir = std::env::temp_dir().join(format!("tareach-empty-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let empty = dir.join("none.queries");
    std::fs::write(&empty, "// nothing\n").unwrap();
    let o = tareach(
        &[
            &train_path(),
            "--selftest",
            "--queries",
            empty.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "agree: 0/0\n");
    std::fs::remove_dir_all(&dir).unwrap();
}

/// Formula backend whose delay operation does nothing.
#[derive(Clone, Copy)]
struct Frozen(FormulaBackend);

impl ZoneBackend for Frozen {
    type Zone = <FormulaBackend as ZoneBackend>::Zone;
    fn name(&self) -> &'static str {
        "frozen"
    }
    fn from_constraint(&self, c: &ClockConstraint) -> Self::Zone {
        self.0.from_constraint(c)
    }
    fn intersect(&self, a: &Self::Zone, b: &Self::Zone) -> Self::Zone {
        self.0.intersect(a, b)
    }
    fn reset(&self, z: &Self::Zone, clocks: &[ClockId]) -> Self::Zone {
        self.0.reset(z, clocks)
    }
    fn elapse(&self, z: &Self::Zone) -> Self::Zone {
        z.clone()
    }
    fn is_empty(&self, z: &Self::Zone) -> bool {
        self.0.is_empty(z)
    }
    fn includes(&self, a: &Self::Zone, b: &Self::Zone) -> bool {
        self.0.includes(a, b)
    }
    fn is_equivalent(&self, a: &Self::Zone, b: &Self::Zone) -> bool {
        self.0.is_equivalent(a, b)
    }
    fn extrapolate(&self, z: &Self::Zone, k: &[i64]) -> Self::Zone {
        self.0.extrapolate(z, k)
    }
    fn to_constraint(&self, z: &Self::Zone) -> ClockConstraint {
        self.0.to_constraint(z)
    }
}

#[test]
fn selftest_reports_injected_fault() {
    let net = train();
    let suite = generated_suite(&net);
    let report = selftest(
        &net,
        &suite,
        FormulaBackend::new(3),
        Frozen(FormulaBackend::new(3)),
        Options::default(),
    );
    let (query, verdicts) = report.divergence.clone().expect("fault detected");
    // Without delays `lower` (which needs Z=1) never fires. In suite order
    // (first automaton most significant) the first reachable vector behind
    // it is Far.Down.u2.
    assert_eq!(query, "go(Far.Up.u0.nil/true, Far.Down.u2.nil/true)");
    assert!(verdicts.iter().any(|(tag, _)| tag == "frozen/dfs"));
    let mut out = Vec::new();
    assert_eq!(write_selftest(&report, &mut out).unwrap(), EXIT_DIVERGENCE);
    let text = String::from_utf8(out).unwrap();
    assert!(
        text.starts_with(&format!(
            "agree: {}/48\ndivergence: {query}\t",
            report.agreed
        )),
        "{text}"
    );
}
