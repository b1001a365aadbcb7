use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rtsl_cli::{RunConfig, RunMetadata};

fn rtsl(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rtsl"));
    cmd.args(args).env_remove("RTSL_THREADS");
    if let Some(t) = threads {
        cmd.env("RTSL_THREADS", t);
    }
    cmd.output().expect("spawn rtsl")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn decompose_verify_example() {
    let o = rtsl(
        &["decompose-verify", "--branching", "3,2,3", "--depth", "3"],
        None,
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = stdout(&o);
    assert!(text.contains("beta = 1,2,3,12"), "{text}");
    assert!(text.contains("28 = 28"), "{text}");
}

#[test]
fn lyapunov_closed_form_row() {
    let o = rtsl(
        &[
            "lyapunov",
            "--dist",
            "2:1",
            "--emin",
            "3",
            "--emax",
            "3",
            "--steps",
            "1",
            "--n",
            "100000",
            "--samples",
            "1",
            "--seed",
            "7",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("energy,lyapunov,std_err,n,samples"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let l: f64 = row[1].parse().unwrap();
    assert!((l - 0.5 * 2f64.ln()).abs() < 1e-3, "{l}");
    assert!(lines.next().is_none());
}

#[test]
fn plot_three_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("curve.csv");
    std::fs::write(
        &csv,
        "energy,lyapunov,std_err\n0.5,0.1,0.01\n1.0,0.2,0.01\n1.5,0.25,0.02\n",
    )
    .unwrap();
    let svg = dir.path().join("curve.svg");
    let o = rtsl(
        &["plot", "--in", path_str(&csv), "--out", path_str(&svg)],
        None,
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = std::fs::read_to_string(&svg).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    let poly: Vec<_> = doc
        .descendants()
        .filter(|n| n.has_tag_name("polyline"))
        .collect();
    assert_eq!(poly.len(), 1);
    assert_eq!(
        poly[0]
            .attribute("points")
            .unwrap()
            .split_whitespace()
            .count(),
        3
    );
    assert!(doc
        .descendants()
        .any(|n| n.attribute("class") == Some("axes")));
    assert!(dir.path().join("curve.svg.meta.json").exists());
}

#[test]
fn exit_codes() {
    let o = rtsl(&["lyapunov", "--no-such-flag"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));

    assert_eq!(rtsl(&["frobnicate"], None).status.code(), Some(2));
    assert_eq!(
        rtsl(&["spectrum", "--dist", "2:0.7"], None).status.code(),
        Some(2)
    );
    assert_eq!(
        rtsl(&["decay", "--window", "1"], None).status.code(),
        Some(2)
    );
    assert_eq!(rtsl(&["weyl"], Some("0")).status.code(), Some(2));

    let o = rtsl(
        &[
            "decompose-verify",
            "--branching",
            "3,2,3",
            "--depth",
            "3",
            "--tol",
            "1e-30",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("check failed"));

    let o = rtsl(&["furstenberg", "--alpha", "2", "--beta", "2"], None);
    assert_eq!(o.status.code(), Some(2));

    assert_eq!(rtsl(&["--help"], None).status.code(), Some(0));
}

struct Run {
    name: &'static str,
    args: Vec<String>,
    header: &'static [&'static str],
}

fn file_runs(dir: &Path) -> Vec<(Run, PathBuf)> {
    let mk = |name: &'static str, file: &str, args: &[&str], header: &'static [&'static str]| {
        let path = dir.join(file);
        let mut a: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        a.push("--out".into());
        a.push(path_str(&path).into());
        (
            Run {
                name,
                args: a,
                header,
            },
            path,
        )
    };
    vec![
        mk(
            "lyapunov",
            "l.csv",
            &[
                "lyapunov",
                "--steps",
                "9",
                "--emin",
                "-3",
                "--emax",
                "3",
                "--n",
                "5000",
                "--samples",
                "6",
                "--seed",
                "11",
            ],
            &["energy", "lyapunov", "std_err", "n", "samples"],
        ),
        mk(
            "spectrum",
            "s.csv",
            &["spectrum", "--size", "3000", "--bins", "20", "--seed", "3"],
            &["bin_left", "bin_right", "count"],
        ),
        mk(
            "decay",
            "d.csv",
            &[
                "decay",
                "--size",
                "600",
                "--seed",
                "5",
                "--window",
                "0.8,1.3",
                "--ref-n",
                "4000",
                "--ref-samples",
                "4",
            ],
            &[
                "eigenvalue",
                "fitted_rate",
                "reference_L",
                "ratio",
                "fit_residual",
            ],
        ),
        mk(
            "weyl",
            "w.csv",
            &["weyl", "--energy", "1", "--runs", "16,256"],
            &["r", "residual", "bound"],
        ),
        mk(
            "tree-decay",
            "t.csv",
            &["tree-decay", "--ref-n", "4000", "--ref-samples", "4"],
            &["generation", "sup"],
        ),
    ]
}

fn check_schema(path: &Path, header: &[&str]) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let h: Vec<String> = r.headers().unwrap().iter().map(str::to_owned).collect();
    assert_eq!(h, header, "{}", path.display());
    let mut rows = 0;
    for rec in r.records() {
        let rec = rec.unwrap();
        assert_eq!(rec.len(), header.len());
        for field in rec.iter() {
            assert!(
                field.parse::<f64>().is_ok_and(f64::is_finite),
                "{field:?} in {}",
                path.display()
            );
        }
        rows += 1;
    }
    assert!(rows > 0, "{}", path.display());
}

fn read_meta(path: &Path) -> RunMetadata {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta.json");
    serde_json::from_str(&std::fs::read_to_string(PathBuf::from(name)).unwrap()).unwrap()
}

#[test]
fn emitted_files_match_schema() {
    let dir = tempfile::tempdir().unwrap();
    for (run, path) in file_runs(dir.path()) {
        let args: Vec<&str> = run.args.iter().map(String::as_str).collect();
        let o = rtsl(&args, None);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}: {}",
            run.name,
            String::from_utf8_lossy(&o.stderr)
        );
        check_schema(&path, run.header);
        let meta = read_meta(&path);
        assert_eq!(meta.config.command, run.name);
        assert_eq!(meta.version, env!("CARGO_PKG_VERSION"));
        assert!(meta.prng.contains("ChaCha8"));
        assert!(meta.wall_time_seconds >= 0.0);
        let back = RunConfig::from_json(&meta.config.to_json().unwrap()).unwrap();
        assert_eq!(back, meta.config);
    }
}

/// Metadata with the wall time removed; everything else must match.
fn stable_meta(path: &Path) -> RunMetadata {
    RunMetadata {
        wall_time_seconds: 0.0,
        ..read_meta(path)
    }
}

#[test]
fn byte_identical_across_runs_and_threads() {
    let base = tempfile::tempdir().unwrap();
    let mut reference: Vec<(Vec<u8>, Vec<u8>, RunMetadata)> = Vec::new();
    for (pass, threads) in [None, None, Some("1"), Some("2"), Some("4")]
        .into_iter()
        .enumerate()
    {
        // identical output paths so the config echo matches
        let dir = base.path().join("out");
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir(&dir).unwrap();
        let mut results = Vec::new();
        for (run, path) in file_runs(&dir) {
            let args: Vec<&str> = run.args.iter().map(String::as_str).collect();
            let o = rtsl(&args, threads);
            assert_eq!(o.status.code(), Some(0), "{}", run.name);
            results.push((std::fs::read(&path).unwrap(), o.stdout, stable_meta(&path)));
        }
        let o = rtsl(
            &[
                "lyapunov",
                "--steps",
                "5",
                "--n",
                "3000",
                "--samples",
                "5",
                "--seed",
                "2",
            ],
            threads,
        );
        results.push((
            o.stdout,
            Vec::new(),
            RunMetadata::new(RunConfig::new("stdout"), 0.0),
        ));
        if pass == 0 {
            reference = results;
        } else {
            assert_eq!(results.len(), reference.len());
            for (i, (got, want)) in results.iter().zip(&reference).enumerate() {
                assert!(got.0 == want.0, "output {i} differs (threads {threads:?})");
                assert!(got.1 == want.1, "stdout {i} differs (threads {threads:?})");
                assert_eq!(got.2, want.2, "meta {i} differs");
            }
        }
    }
}
