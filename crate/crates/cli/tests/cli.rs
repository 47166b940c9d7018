use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bfd_core::Snapshot;

const BASE: &str = r#"
[model]
gamma = 0.6
epsilon = 0.1
mu = 0.1
a = -0.1
b = 0.2
c = -0.1
d = 0.2

[grid]
dim = 1
n = 64
length = 30.0

[scheme]
max_t = 2.0
cadence = 5

[initial]
profile = "gaussian"
width = 2.0
amplitude = 0.5
"#;

fn bfd(args: &[&str], dir: &Path, threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bfd"));
    cmd.args(args).current_dir(dir);
    match threads {
        Some(t) => cmd.env("BFD_THREADS", t),
        None => cmd.env_remove("BFD_THREADS"),
    };
    cmd.output().unwrap()
}

/// Writes `text` plus an output section pointing at `out` and returns the path.
fn config(dir: &Path, name: &str, text: &str, out: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, format!("{text}\n[output]\ndirectory = \"{out}\"\n")).unwrap();
    path
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn help_lists_every_config_key() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bfd(&["--help"], tmp.path(), None);
    assert!(out.status.success());
    let golden = fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/help.txt")).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), golden);
}

#[test]
fn symbols_along_positive_axis() {
    let tmp = tempfile::tempdir().unwrap();
    config(tmp.path(), "run.toml", BASE, "out");
    let out = bfd(&["symbols", "run.toml"], tmp.path(), None);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(tmp.path().join("out/symbols.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "xi,sigma,A,g,omega1,omega2,im_lambda_plus");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 32);
    assert_eq!(rows[0][0], 0.0);
    assert_eq!(rows[0][6], 0.0);
    for w in rows.windows(2) {
        assert!(w[1][0] > w[0][0]);
        assert!(w[1][1] >= w[0][1]);
        assert!(w[1][6] > w[0][6]);
    }
    assert!(tmp.path().join("out/manifest.json").exists());
}

#[test]
fn conserve_rejects_b_not_equal_d() {
    let tmp = tempfile::tempdir().unwrap();
    let text = BASE.replace("b = 0.2", "b = 0.3").replace("[initial]", "[study]\ndts = [0.1, 0.05]\n\n[initial]");
    config(tmp.path(), "run.toml", &text, "out");
    let out = bfd(&["conserve", "run.toml"], tmp.path(), None);
    assert_eq!(out.status.code(), Some(3));
    let err = stderr(&out);
    assert!(err.starts_with("bfd: unsupported-case:"), "{err}");
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn zero_amplitude_simulation_writes_zero_snapshots() {
    let tmp = tempfile::tempdir().unwrap();
    config(tmp.path(), "run.toml", &BASE.replace("amplitude = 0.5", "amplitude = 0.0"), "out");
    let out = bfd(&["simulate", "run.toml"], tmp.path(), None);
    assert!(out.status.success(), "{}", stderr(&out));
    let snaps: Vec<_> = fs::read_dir(tmp.path().join("out/snapshots")).unwrap().map(|e| e.unwrap().path()).collect();
    assert!(!snaps.is_empty());
    for p in snaps {
        let s = Snapshot::read(BufReader::new(fs::File::open(p).unwrap())).unwrap();
        assert!(s.zeta.iter().chain(s.v.iter().flatten()).all(|x| *x == 0.0));
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["summary"]["termination"], "max_t");
    assert_eq!(manifest["input"]["resolved"]["params"]["mu2"], 1.0);
}

#[test]
fn blow_up_is_a_result() {
    let tmp = tempfile::tempdir().unwrap();
    let text = BASE
        .replace("epsilon = 0.1", "epsilon = 0.5")
        .replace("amplitude = 0.5", "amplitude = 10.0")
        .replace("max_t = 2.0", "max_t = 20.0\ndt = 0.05");
    config(tmp.path(), "run.toml", &text, "out");
    let out = bfd(&["simulate", "run.toml"], tmp.path(), None);
    assert!(out.status.success(), "{}", stderr(&out));
    let events = fs::read_to_string(tmp.path().join("out/events.jsonl")).unwrap();
    let ev: serde_json::Value = serde_json::from_str(events.lines().next().unwrap()).unwrap();
    assert_eq!(ev["event"], "blow-up");
}

#[test]
fn simulation_restarts_from_snapshot() {
    let tmp = tempfile::tempdir().unwrap();
    config(tmp.path(), "run.toml", BASE, "first");
    assert!(bfd(&["simulate", "run.toml"], tmp.path(), None).status.success());
    let mut snaps: Vec<_> = fs::read_dir(tmp.path().join("first/snapshots")).unwrap().map(|e| e.unwrap().path()).collect();
    snaps.sort();
    let last = snaps.last().unwrap().display().to_string();
    let text = BASE.replace(
        "profile = \"gaussian\"\nwidth = 2.0\namplitude = 0.5",
        &format!("profile = \"snapshot\"\npath = \"{last}\""),
    );
    config(tmp.path(), "again.toml", &text, "second");
    let out = bfd(&["simulate", "again.toml"], tmp.path(), None);
    assert!(out.status.success(), "{}", stderr(&out));
    let energy = fs::read_to_string(tmp.path().join("second/energy.csv")).unwrap();
    let t0: f64 = energy.lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
    assert_eq!(t0, 2.0);
}

#[test]
fn config_errors_exit_two_with_reason() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        (BASE.replace("a = -0.1", "a = 0.1"), "ill-posed", "a <= 0"),
        (BASE.replace("d = 0.2", "d = 0.2\nalpha1 = 0.1"), "config-error", "mutually exclusive"),
        (BASE.replace("n = 64", "n = 64\nspacing = 0.5"), "config-error", "spacing"),
        (BASE.replace("gamma = 0.6", "gamma = 1.5"), "parameter-domain", "gamma"),
    ];
    for (i, (text, reason, needle)) in cases.iter().enumerate() {
        let name = format!("bad{i}.toml");
        config(tmp.path(), &name, text, "out");
        let out = bfd(&["simulate", &name], tmp.path(), None);
        assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
        let err = stderr(&out);
        assert!(err.starts_with(&format!("bfd: {reason}:")), "{err}");
        assert!(err.contains(needle), "{err}");
    }
}

#[test]
fn missing_config_is_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bfd(&["lifespan", "nowhere.toml"], tmp.path(), None);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).starts_with("bfd: io-error:"));
}

#[test]
fn studies_are_identical_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let studies = [
        ("lifespan", "lifespan.csv", "[study]\nepsilons = [0.1, 0.05]\n"),
        ("conserve", "conservation.csv", "[study]\ndts = [0.2, 0.1]\n"),
        ("smallness", "smallness.csv", "[study]\nsmallness_target = 0.25\n"),
        ("equivalence", "equivalence.csv", "[study]\nepsilons = [0.01, 0.001]\nmus = [0.01, 0.001]\nsamples = 8\n"),
    ];
    for (cmd, csv, study) in studies {
        let text = BASE.replace("[initial]", &format!("{study}\n[initial]"));
        let mut outputs = Vec::new();
        for threads in ["1", "3"] {
            let out_dir = format!("{cmd}-{threads}");
            let name = format!("{out_dir}.toml");
            config(tmp.path(), &name, &text, &out_dir);
            let out = bfd(&[cmd, &name], tmp.path(), Some(threads));
            assert!(out.status.success(), "{cmd}: {}", stderr(&out));
            outputs.push(fs::read(tmp.path().join(&out_dir).join(csv)).unwrap());
        }
        assert_eq!(outputs[0], outputs[1], "{cmd}");
        assert!(outputs[0].len() > 40);
    }
}

#[test]
fn bad_thread_count_is_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    config(tmp.path(), "run.toml", BASE, "out");
    let out = bfd(&["symbols", "run.toml"], tmp.path(), Some("zero"));
    assert_eq!(out.status.code(), Some(2));
}
