use std::fs;
use std::process::{Command, Output};

fn rqbc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rqbc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn records(text: &str) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(text.as_bytes())
        .records()
        .collect::<Result<_, _>>()
        .unwrap()
}

#[test]
fn honest_chsh1_run_accepts() {
    let o = rqbc(&[
        "run",
        "--scenario",
        "honest-chsh1",
        "--n",
        "10000",
        "--xi",
        "0.05",
        "--seed",
        "7",
        "--repeat",
        "20",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = records(&stdout(&o));
    assert_eq!(rows.len(), 20);
    let accepted = rows.iter().filter(|r| &r[8] == "true").count();
    assert!(accepted >= 19, "{accepted}");
    assert!(stderr(&o).contains("seed 7"));
}

#[test]
fn honest_rccbc_run_accepts() {
    let o = rqbc(&[
        "run",
        "--scenario",
        "honest-rccbc",
        "--n",
        "64",
        "--c",
        "1.0",
        "--repeat",
        "200",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = records(&stdout(&o));
    let accepted = rows.iter().filter(|r| &r[8] == "true").count();
    assert!(accepted >= 198, "{accepted}");
}

#[test]
fn same_seed_same_output_across_jobs() {
    let args = [
        "run",
        "--scenario",
        "honest-chsh3",
        "--n",
        "300",
        "--repeat",
        "6",
        "--seed",
        "11",
    ];
    let a = rqbc(&args);
    let mut with_jobs = vec!["--jobs", "3"];
    with_jobs.extend(args);
    let b = rqbc(&with_jobs);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn missing_seed_is_drawn_and_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.toml");
    fs::write(
        &cfg,
        "repeat = 2\n[protocol]\nvariant = \"chsh2\"\nn = 50\n",
    )
    .unwrap();
    let o = rqbc(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let err = stderr(&o);
    let seed: u64 = err
        .lines()
        .next()
        .and_then(|l| l.rsplit(' ').next())
        .and_then(|s| s.parse().ok())
        .expect("seed echoed on the first line");
    let again = rqbc(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        &seed.to_string(),
    ]);
    assert_eq!(o.stdout, again.stdout);
}

#[test]
fn report_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.toml");
    let first = rqbc(&[
        "run",
        "--scenario",
        "location-attack",
        "--n",
        "200",
        "--repeat",
        "3",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    let second = rqbc(&["run", "--config", report.to_str().unwrap()]);
    assert_eq!(second.status.code(), Some(0), "{}", stderr(&second));
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn csv_fields_round_trip_exactly() {
    let o = rqbc(&[
        "run",
        "--scenario",
        "noisy-chsh1",
        "--n",
        "777",
        "--repeat",
        "4",
    ]);
    let text = stdout(&o);
    let mut rewritten = csv::Writer::from_writer(Vec::new());
    for r in records(&text) {
        let stat: Option<f64> = (!r[5].is_empty()).then(|| r[5].parse().unwrap());
        if let Some(s) = stat {
            assert_eq!(s.to_string().parse::<f64>().unwrap().to_bits(), s.to_bits());
        }
        rewritten.write_record(&r).unwrap();
    }
    let header = text.lines().next().unwrap();
    let body = String::from_utf8(rewritten.into_inner().unwrap()).unwrap();
    assert_eq!(format!("{header}\n{body}"), text);
}

#[test]
fn malformed_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[protocol]\nvariant = \"chsh1\"\nrounds = 10\n").unwrap();
    let o = rqbc(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("rounds") && err.contains("line 3"), "{err}");
}

#[test]
fn invalid_config_value_names_the_field() {
    let o = rqbc(&["run", "--scenario", "honest-rccbc", "--n", "63"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("`n`") || stderr(&o).contains(" n"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(rqbc(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(rqbc(&["run"]).status.code(), Some(1));
    assert_eq!(
        rqbc(&["run", "--scenario", "no-such"]).status.code(),
        Some(1)
    );
    assert_eq!(rqbc(&["--help"]).status.code(), Some(0));
}

#[test]
fn bounds_table_matches_library_values() {
    let o = rqbc(&["bounds", "--n", "1,10,20", "--xi", "0.05"]);
    assert_eq!(o.status.code(), Some(0));
    for r in records(&stdout(&o)) {
        let n: usize = r[0].parse().unwrap();
        let eps: f64 = r[4].parse().unwrap();
        let lib = rqbc::bitmath::epsilon_bound(n, 0.05f64).unwrap().epsilon;
        assert_eq!(eps.to_bits(), lib.to_bits());
    }
}

#[test]
fn bounds_doubling_n_squares_epsilon() {
    let o = rqbc(&["bounds", "--n", "50,100", "--xi", "0.05"]);
    let rows = records(&stdout(&o));
    let e: Vec<f64> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    assert!((e[1] / (e[0] * e[0]) - 1.0).abs() < 1e-9, "{e:?}");
}

#[test]
fn xi_beyond_limit_is_rejected() {
    let o = rqbc(&["bounds", "--xi", "0.11"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("0.1035"), "{}", stderr(&o));
    let o = rqbc(&["run", "--scenario", "honest-chsh1", "--xi", "0.11"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bruteforce_chsh1_rows_satisfy_bound() {
    let o = rqbc(&[
        "bruteforce",
        "--variant",
        "chsh1",
        "--n",
        "1-6",
        "--xi",
        "0.05",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = records(&stdout(&o));
    assert_eq!(rows.len(), 6);
    assert_eq!(&rows[0][3], "0.5");
    for r in &rows {
        let gap: f64 = r[7].parse().unwrap();
        assert!(gap >= 0.0);
    }
}

#[test]
fn bruteforce_cap_is_a_usage_error() {
    let o = rqbc(&["bruteforce", "--n", "40"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn hiding_flags_the_memory_attack() {
    let o = rqbc(&[
        "hiding",
        "--scenario",
        "memory-attack-reuse",
        "--max-advantage",
        "0.02",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = rqbc(&[
        "hiding",
        "--scenario",
        "memory-attack-disciplined",
        "--max-advantage",
        "0.1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn audit_accepts_written_transcripts_and_rejects_a_tampered_one() {
    let dir = tempfile::tempdir().unwrap();
    let tr = dir.path().join("tr");
    let o = rqbc(&[
        "run",
        "--scenario",
        "dual-commit",
        "--n",
        "30",
        "--repeat",
        "2",
        "--transcripts",
        tr.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let mut files: Vec<String> = fs::read_dir(&tr)
        .unwrap()
        .map(|e| e.unwrap().path().to_str().unwrap().to_string())
        .collect();
    files.sort();
    assert_eq!(files.len(), 4);
    let mut args = vec!["audit"];
    args.extend(files.iter().map(String::as_str));
    assert_eq!(rqbc(&args).status.code(), Some(0));

    // move A_1's reception of L to before it could have arrived
    let text = fs::read_to_string(&files[0]).unwrap();
    let tampered: String = text
        .lines()
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            if f.len() > 7 && f[0] == "EVENT" && f[6] == "RECEIVE" && f[2] == "A_1" {
                let mut g = f.clone();
                g[1] = "-100";
                g.join("\t")
            } else {
                l.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join("\n");
    assert_ne!(tampered, text.trim_end());
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, tampered).unwrap();
    let o = rqbc(&["audit", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(records(&stdout(&o)).len() >= 1);
}

#[test]
fn audit_runs_a_builtin() {
    let o = rqbc(&["audit", "--scenario", "oracle-cheat-rccbc", "--repeat", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("5 transcripts audited"));
}
