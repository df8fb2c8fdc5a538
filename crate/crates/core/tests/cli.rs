use std::process::{Command, Output};

fn fogmatch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fogmatch")).args(args).env_remove("FOGMATCH_SEED").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const SMALL_CONDITIONAL: &[&str] = &["conditional", "--trials", "2000", "--max-trials", "2000", "--snr-db-range", "10:30:10"];

#[test]
fn conditional_emits_all_sources() {
    let o = fogmatch(SMALL_CONDITIONAL);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("gamma_db,user,source,value,ci_lo,ci_hi,trials"));
    for source in [",mc,", ",bound,", ",exact,", ",cdmt,", ",bound_exponent,", ",mc_exponent,"] {
        assert!(text.contains(source), "missing {source}");
    }
}

#[test]
fn same_seed_same_output() {
    let mut args = SMALL_CONDITIONAL.to_vec();
    args.extend(["--seed", "9"]);
    assert_eq!(fogmatch(&args).stdout, fogmatch(&args).stdout);
    *args.last_mut().unwrap() = "10";
    assert_ne!(fogmatch(&args).stdout, fogmatch(SMALL_CONDITIONAL).stdout);
}

#[test]
fn k_above_big_k_is_usage_error() {
    let o = fogmatch(&["conditional", "--K", "2", "--k", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
}

#[test]
fn infeasible_demand_exits_2() {
    let o = fogmatch(&["content", "--K", "7", "--N", "5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("infeasible"));
}

#[test]
fn rate_and_mux_conflict() {
    assert_eq!(fogmatch(&["content", "--rate", "2", "--mux", "0.5"]).status.code(), Some(1));
}

#[test]
fn unknown_flag_and_help() {
    assert_eq!(fogmatch(&["content", "--bogus"]).status.code(), Some(1));
    assert_eq!(fogmatch(&["--help"]).status.code(), Some(0));
}

#[test]
fn verify_quick_passes_and_fault_fails() {
    let o = fogmatch(&["verify", "--quick"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.contains(" PASS ")).count(), 4);
    let o = fogmatch(&["verify", "--quick", "--inject-fault", "degree"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("bp-vs-flow           FAIL"));
}

#[test]
fn out_writes_sidecar_that_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let args = ["content", "--M", "4", "--N", "3", "--L", "3", "--K", "2", "--trials", "500", "--max-trials", "500", "--snr-db-range", "0,10", "--seed", "4"];
    let mut first = args.to_vec();
    first.extend(["--out", a.to_str().unwrap()]);
    assert_eq!(fogmatch(&first).status.code(), Some(0));
    let manifest = std::fs::read_to_string(dir.path().join("a.csv.manifest")).unwrap();
    assert!(manifest.contains("wall_clock_secs="));
    assert!(manifest.contains("seed=4"));
    assert!(manifest.contains("eta=0.5"));

    let b = dir.path().join("b.csv");
    let manifest_path = dir.path().join("a.csv.manifest");
    let o = fogmatch(&["content", "--config", manifest_path.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn seed_from_environment() {
    let run = |env: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_fogmatch"));
        c.args(SMALL_CONDITIONAL);
        match env {
            Some(v) => c.env("FOGMATCH_SEED", v),
            None => c.env_remove("FOGMATCH_SEED"),
        };
        c.output().unwrap().stdout
    };
    let with_env = String::from_utf8(run(Some("77"))).unwrap();
    assert!(with_env.contains("# seed=77"));
    let mut args = SMALL_CONDITIONAL.to_vec();
    args.extend(["--seed", "77"]);
    assert_eq!(with_env.into_bytes(), fogmatch(&args).stdout);
}

#[test]
fn optimal_k_splits_aps_by_size() {
    let o = fogmatch(&["content", "--rates", "2,3", "--optimal-k", "--N", "5", "--L", "2", "--trials", "200", "--max-trials", "200", "--snr-db-range", "10,20"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("# K=2 3"));
}

#[test]
fn compare_codes_names_sources() {
    let o = fogmatch(&["compare-codes", "--M", "4", "--N", "4", "--L", "2", "--K", "2", "--trials", "300", "--max-trials", "300", "--snr-db-range", "10,20"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains(",mc:msr,") && text.contains(",mc:mbr,"));
}
