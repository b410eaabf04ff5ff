use std::path::Path;
use std::process::{Command as Process, Output};

use nlheat::evolve::TRACE_CSV_HEADER;
use nlheat_cli::{emit_config, parse_config, parse_config_as, run_command, Command, ConfigError, ExperimentConfig};

const MINIMAL: &str = r#"
command = "solve"
order = 0.5

[grid]
dimension = 1
points = 256
length = 6.283185307179586

[run]
final_time = 0.1
dt = 0.01

[coeff_a]
floor = 1.0

[coeff_b]
floor = 1.0

[coeff_c]
floor = 1.0

[[u0.terms]]
kind = "smooth"
expr = { kind = "cos", mode = 1 }
"#;

fn nlheat(args: &[&str]) -> Output {
    Process::new(env!("CARGO_BIN_EXE_nlheat")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn problems(err: ConfigError) -> Vec<(String, String)> {
    match err {
        ConfigError::Validation(p) => p.into_iter().map(|p| (p.path, p.message)).collect(),
        other => panic!("expected validation errors, got {other}"),
    }
}

#[test]
fn minimal_config_round_trips() {
    let cfg = parse_config(MINIMAL).unwrap();
    assert_eq!(cfg.command, Command::Solve);
    let again = parse_config(&emit_config(&cfg)).unwrap();
    assert_eq!(again, cfg);
    assert_eq!(again.run_id(), cfg.run_id());
}

#[test]
fn default_configs_round_trip_and_validate() {
    for c in [Command::Solve, Command::Net, Command::Uniqueness, Command::Consistency, Command::Check] {
        let cfg = ExperimentConfig::default_for(c);
        cfg.validate().unwrap();
        assert_eq!(parse_config(&emit_config(&cfg)).unwrap(), cfg);
    }
}

#[test]
fn run_id_ignores_output_dir_but_not_seed() {
    let cfg = parse_config(MINIMAL).unwrap();
    let mut moved = cfg.clone();
    moved.output_dir = "/elsewhere".into();
    assert_eq!(moved.run_id(), cfg.run_id());
    let mut reseeded = cfg.clone();
    reseeded.seed = 7;
    assert_ne!(reseeded.run_id(), cfg.run_id());
    assert_eq!(cfg.run_id().len(), 16);
}

#[test]
fn zero_dt_is_reported_at_its_path() {
    let text = MINIMAL.replace("dt = 0.01", "dt = 0.0");
    let found = problems(parse_config(&text).unwrap_err());
    assert!(found.iter().any(|(path, _)| path == "run.dt"), "{found:?}");
}

#[test]
fn all_problems_are_collected() {
    let text = MINIMAL
        .replace("dt = 0.01", "dt = 0.0")
        .replace("order = 0.5", "order = 1.5")
        .replace("command = \"solve\"", "command = \"net\"\nepsilons = [0.5, 0.001]");
    let found = problems(parse_config(&text).unwrap_err());
    let paths: Vec<&str> = found.iter().map(|(p, _)| p.as_str()).collect();
    assert!(paths.contains(&"run.dt"));
    assert!(paths.contains(&"order"));
    let (_, msg) = found.iter().find(|(p, _)| p == "epsilons[1]").expect("epsilon problem");
    assert!(msg.contains("UnresolvedKernel"), "{msg}");
}

#[test]
fn syntax_errors_carry_a_location() {
    match parse_config("order = = 1") {
        Err(ConfigError::Parse(msg)) => assert!(msg.contains("line 1"), "{msg}"),
        other => panic!("{other:?}"),
    }
    for text in [format!("bogus = 1\n{MINIMAL}"), format!("{MINIMAL}bogus = 1\n")] {
        assert!(matches!(parse_config(&text), Err(ConfigError::Parse(_))), "{text}");
    }
}

#[test]
fn command_key_must_agree_with_the_request() {
    assert!(parse_config_as(MINIMAL, Some(Command::Solve)).is_ok());
    let err = problems(parse_config_as(MINIMAL, Some(Command::Net)).unwrap_err());
    assert_eq!(err[0].0, "command");
    let bare = MINIMAL.replace("command = \"solve\"", "");
    assert_eq!(parse_config_as(&bare, Some(Command::Check)).unwrap().command, Command::Check);
}

#[test]
fn consistency_rejects_point_masses() {
    let text = MINIMAL.replace("command = \"solve\"", "command = \"consistency\"")
        + "\n[[coeff_c.singular.terms]]\nkind = \"dirac\"\nlocation = [3.0]\nweight = 1.0\n";
    let found = problems(parse_config(&text).unwrap_err());
    assert!(found.iter().any(|(p, _)| p == "coeff_c"), "{found:?}");
}

#[test]
fn solve_writes_the_documented_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = write_config(dir.path(), MINIMAL);
    let out = nlheat(&["solve", "--config", &cfg_path, "--output", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let id = parse_config(MINIMAL).unwrap().run_id();
    let csv = std::fs::read_to_string(dir.path().join(format!("solve_{id}.csv"))).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(TRACE_CSV_HEADER));
    assert_eq!(
        TRACE_CSV_HEADER,
        "time,l2_sq,grad_w_sq,frac_w_sq,mass_w_sq,total,ut_l2_sq,cg_iterations"
    );
    assert_eq!(lines.count(), 11);
    assert!(!csv.contains('\r'));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join(format!("solve_{id}.json"))).unwrap()).unwrap();
    assert_eq!(json["run_id"], id);
    assert_eq!(json["report"]["snapshots"].as_array().unwrap().len(), 11);
}

#[test]
fn check_on_the_default_config_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = nlheat(&["check", "--output", dir.path().to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS ")).count(), 10);
    assert!(!stdout.contains("FAIL "));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();

    assert_eq!(nlheat(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(nlheat(&["solve", "--config", "/no/such/file.toml"]).status.code(), Some(1));

    let bad = write_config(dir.path(), &MINIMAL.replace("dt = 0.01", "dt = 0.0"));
    let out = nlheat(&["solve", "--config", &bad, "--output", d]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("run.dt"));

    let stiff = ExperimentConfig::default_for(Command::Solve);
    let mut stiff = stiff;
    stiff.run.cg_max_iter = 1;
    let path = write_config(dir.path(), &emit_config(&stiff));
    let out = nlheat(&["solve", "--config", &path, "--output", d]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("did not converge"), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn missing_output_dir_is_an_io_error_naming_it() {
    let out = nlheat(&["solve", "--output", "/no/such/dir"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/no/such/dir"));

    let mut cfg = parse_config(MINIMAL).unwrap();
    cfg.output_dir = "/no/such/dir".into();
    let result = run_command(&cfg).unwrap();
    let err = nlheat_cli::emit_reports(&result, &cfg.output_dir).unwrap_err();
    assert_eq!(err.exit_code(), 1);
    assert!(err.to_string().contains("/no/such/dir"));
}

fn run_in(dir: &Path, args: &[&str]) -> Vec<(String, Vec<u8>)> {
    let mut full = args.to_vec();
    full.extend(["--output", dir.to_str().unwrap()]);
    let out = nlheat(&full);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn reports_are_identical_across_runs_and_thread_counts() {
    for command in ["check", "solve"] {
        let outputs: Vec<_> = ["1", "4", "4"]
            .iter()
            .map(|threads| {
                let dir = tempfile::tempdir().unwrap();
                run_in(dir.path(), &[command, "--threads", threads, "--seed", "11"])
            })
            .collect();
        assert_eq!(outputs[0].len(), 2);
        assert_eq!(outputs[0], outputs[1]);
        assert_eq!(outputs[1], outputs[2]);
    }
}
