use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

const BELL: &str = ".qubits 2\nh 0\ncx 0 1\n.measure 0 1\n";

fn qsim_env(args: &[&str], stdin: &str, env: &[(&str, &str)]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_qsim"))
        .args(args)
        .env_remove("QSIM_NODE_BUDGET")
        .envs(env.iter().copied())
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn qsim(args: &[&str], stdin: &str) -> Output {
    qsim_env(args, stdin, &[])
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON report")
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn bell_report() {
    let out = qsim(&["run", "-", "--shots", "1000"], BELL);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = json(&out);
    assert_eq!(r["status"], "ok");
    assert_eq!(r["circuit"]["qubits"], 2);
    assert_eq!(r["total_probability"]["exact"], "1");
    let m = &r["measurement"];
    assert_eq!(m["first_qubit_zero"]["exact"], "1/2");
    let outcomes = m["outcomes"].as_array().unwrap();
    let pairs: Vec<(&str, &str)> = outcomes
        .iter()
        .map(|o| {
            (
                o["outcome"].as_str().unwrap(),
                o["probability"]["exact"].as_str().unwrap(),
            )
        })
        .collect();
    assert_eq!(pairs, [("00", "1/2"), ("11", "1/2")]);
    let shots = m["shots"].as_object().unwrap();
    assert_eq!(
        shots.values().map(|v| v.as_u64().unwrap()).sum::<u64>(),
        1000
    );
    assert!(shots.keys().all(|k| k == "00" || k == "11"));
}

#[test]
fn reports_are_deterministic_apart_from_timing() {
    let strip = |mut v: Value| {
        let obj = v.as_object_mut().unwrap();
        obj.remove("timing");
        obj.remove("resources");
        v
    };
    let text = String::from_utf8(qsim(&["gen", "random", "8", "--seed", "4"], "").stdout).unwrap();
    let text = text + ".measure 0 3 5\n";
    let args = [
        "run",
        "-",
        "--shots",
        "5000",
        "--seed",
        "9",
        "--dump-amplitudes",
    ];
    let a = strip(json(&qsim(&args, &text)));
    let b = strip(json(&qsim(&args, &text)));
    let c = strip(json(&qsim(&[&args[..], &["--sequential"]].concat(), &text)));
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_eq!(a["measurement"]["outcome_total"]["exact"], "1");
}

#[test]
fn dumped_amplitudes() {
    let out = qsim(&["run", "-", "--dump-amplitudes"], ".qubits 1\nh 0\nt 0\n");
    let r = json(&out);
    let amps: Vec<Vec<String>> = r["amplitudes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| {
            ["bits", "a", "b", "c", "d", "k"]
                .iter()
                .map(|f| a[f].to_string().trim_matches('"').to_owned())
                .collect()
        })
        .collect();
    assert_eq!(
        amps,
        [
            ["0", "0", "0", "0", "1", "1"],
            ["1", "0", "0", "1", "0", "1"]
        ]
    );
}

#[test]
fn text_format() {
    let out = qsim(&["run", "-", "--format", "text"], BELL);
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.contains("status: ok"), "{s}");
    assert!(s.contains("Pr[q0=0] = 1/2"), "{s}");
    assert!(s.contains("total probability: 1"), "{s}");
}

#[test]
fn exit_codes() {
    let missing = qsim(&["run", "/nonexistent/circuit.qsim"], "");
    assert_eq!(code(&missing), 5);
    assert!(stderr(&missing).starts_with("qsim: "));

    let bad = qsim(&["run", "-"], ".qubits 2\nh 0\nfoo 1\n");
    assert_eq!(code(&bad), 2);
    assert!(
        stderr(&bad).contains("line 3, column 1"),
        "{}",
        stderr(&bad)
    );

    assert_eq!(code(&qsim(&["run", "-", "--bogus"], BELL)), 2);
    assert_eq!(code(&qsim(&["run", "-", "--r-init", "0"], BELL)), 2);
    assert_eq!(code(&qsim(&["run", "-", "--time-limit", "-1"], BELL)), 2);

    let random = String::from_utf8(qsim(&["gen", "random", "20"], "").stdout).unwrap();
    let budget = qsim_env(&["run", "-"], &random, &[("QSIM_NODE_BUDGET", "500")]);
    assert_eq!(code(&budget), 3);
    assert_eq!(json(&budget)["status"], "node_budget");

    let ghz = String::from_utf8(qsim(&["gen", "ghz", "4000"], "").stdout).unwrap();
    let timeout = qsim(&["run", "-", "--time-limit", "0"], &ghz);
    assert_eq!(code(&timeout), 4);
    assert_eq!(json(&timeout)["status"], "timeout");
}

#[test]
fn check_command() {
    let pass = qsim(&["check", "--n-max", "5", "--cases", "4"], "");
    assert_eq!(code(&pass), 0);
    let r = json(&pass);
    assert_eq!(r["status"], "pass");
    assert_eq!(r["cases_run"], 16);

    let per_gate = qsim(
        &[
            "check",
            "--n-max",
            "4",
            "--cases",
            "3",
            "--per-gate",
            "--r-init",
            "2",
        ],
        "",
    );
    assert_eq!(code(&per_gate), 0);

    let fault = qsim(
        &[
            "check",
            "--n-max",
            "3",
            "--cases",
            "2",
            "--inject-fault",
            "0:1",
        ],
        "",
    );
    assert_eq!(code(&fault), 1);
    let r = json(&fault);
    assert_eq!(r["status"], "fail");
    assert_eq!(r["failure"]["kind"], "mismatch");
    assert!(r["failure"]["first_divergence"]["index"].is_u64());

    assert_eq!(code(&qsim(&["check", "--n-max", "17"], "")), 2);
}

#[test]
fn gen_command() {
    let run = |args: &[&str]| String::from_utf8(qsim(args, "").stdout).unwrap();
    let ghz = run(&["gen", "ghz", "3"]);
    assert_eq!(ghz, ".qubits 3\nh 0\ncx 0 1\ncx 1 2\n.measure 0\n");
    let bv = run(&["gen", "bv", "4", "--hidden", "101"]);
    assert_eq!(bv.lines().filter(|l| l.starts_with("cx")).count(), 2);
    assert!(bv.ends_with(".measure 0 1 2\n"));
    assert_eq!(
        run(&["gen", "random", "6", "--seed", "3"]),
        run(&["gen", "random", "6", "--seed", "3"])
    );
    assert_ne!(
        run(&["gen", "random", "6", "--seed", "3"]),
        run(&["gen", "random", "6", "--seed", "4"])
    );
    assert_eq!(
        run(&["gen", "bv", "100"])
            .lines()
            .filter(|l| !l.starts_with('.'))
            .count(),
        299
    );

    assert_eq!(code(&qsim(&["gen", "bv", "4", "--hidden", "10"], "")), 2);
    assert_eq!(code(&qsim(&["gen", "ghz", "4", "--hidden", "101"], "")), 2);
    assert_eq!(code(&qsim(&["gen", "random", "1"], "")), 2);

    // the generated BV circuit finds its hidden string
    let r = json(&qsim(&["run", "-"], &bv));
    assert_eq!(r["measurement"]["outcomes"][0]["outcome"], "101");
    assert_eq!(r["measurement"]["outcomes"][0]["probability"]["exact"], "1");
}
