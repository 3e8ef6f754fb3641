use std::path::Path;
use std::process::{Command, Output};

use harperlab_cli::cache::BandCache;
use harperlab_core::spectral::MERGE_TOL;
use harperlab_core::{BandSet, Fraction};

fn harperlab(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_harperlab"))
        .args(args)
        .env("HARPERLAB_CACHE_DIR", cache)
        .env_remove("HARPERLAB_WORKERS")
        .env_remove("HARPERLAB_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn spectrum_half_is_one_interval() {
    let dir = tempfile::tempdir().unwrap();
    let o = harperlab(dir.path(), &["spectrum", "--model", "amo:1", "--frac", "1/2", "--tol", "1e-9"]);
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines.len(), 1);
    let iv: [f64; 2] = serde_json::from_str(&lines[0]).unwrap();
    let r = 2.0 * 2f64.sqrt();
    assert!((iv[0] + r).abs() < 1e-9 && (iv[1] - r).abs() < 1e-9, "{iv:?}");
}

#[test]
fn gauge_verify_symbolic_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = harperlab(dir.path(), &["gauge-verify", "--alpha", "symbolic"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.lines().skip(1).all(|l| l.contains(",PASS,")), "{out}");
    assert!(out.contains("QS,symbolic,PASS"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = harperlab(dir.path(), &["spectrum", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--bogus"));
    let o = harperlab(dir.path(), &["spectrum", "--model", "amo:1", "--frac", "1/0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = harperlab(dir.path(), &["nonsense"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn computation_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = harperlab(dir.path(), &["cf", "--alpha", "0.3", "--depth", "4"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn cf_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = harperlab(dir.path(), &["cf", "--alpha", "golden", "--depth", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let last = out.lines().last().unwrap();
    assert!(last.starts_with("6,1,8,13,"), "{last}");
}

#[test]
fn cache_round_trip_and_tolerance_key() {
    let dir = tempfile::tempdir().unwrap();
    let cache = BandCache::new(dir.path());
    let f = Fraction::new(2, 5).unwrap();
    let bands = BandSet::new([(-2.5, -1.0), (0.25, 3.0)], MERGE_TOL);
    cache.put("amo:1", Some(1.0), f, 1e-6, &bands).unwrap();
    assert_eq!(cache.get("amo:1", f, 1e-6), Some(bands));
    assert_eq!(cache.get("amo:1", f, 1e-7), None);
    assert_eq!(cache.get("chiral", f, 1e-6), None);
}

#[test]
fn corrupt_entry_is_a_miss() {
    let dir = tempfile::tempdir().unwrap();
    let cache = BandCache::new(dir.path());
    let f = Fraction::new(1, 3).unwrap();
    let bands = BandSet::new([(-1.0, 1.0)], MERGE_TOL);
    cache.put("amo:1", Some(1.0), f, 1e-6, &bands).unwrap();
    let path = cache.path_for("amo:1", f, 1e-6);
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, &text[..text.len() / 2]).unwrap();
    assert_eq!(cache.get("amo:1", f, 1e-6), None);

    // unsorted bands are rejected too
    std::fs::write(&path, text.replace("[[-1.0,1.0]]", "[[1.0,-1.0]]")).unwrap();
    assert_eq!(cache.get("amo:1", f, 1e-6), None);
}

#[test]
fn warm_cache_matches_cold_and_survives_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["spectrum", "--model", "amo:1", "--frac", "3/7", "--tol", "1e-8"];
    let cold = harperlab(dir.path(), &args);
    assert_eq!(cold.status.code(), Some(0));
    let entries: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(entries.len(), 1);
    let warm = harperlab(dir.path(), &args);
    assert_eq!(stdout(&cold), stdout(&warm));

    let path = entries[0].as_ref().unwrap().path();
    std::fs::write(&path, "{\"model\":").unwrap();
    let recovered = harperlab(dir.path(), &args);
    assert_eq!(recovered.status.code(), Some(0));
    assert_eq!(stdout(&cold), stdout(&recovered));
    assert!(String::from_utf8_lossy(&recovered.stderr).contains("warning"));
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let run = |w: &str, args: &[&str]| {
        let mut a = vec!["--workers", w, "--no-cache"];
        a.extend_from_slice(args);
        let o = harperlab(dir.path(), &a);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        stdout(&o)
    };
    let butterfly = ["butterfly", "--model", "chiral", "--qmax", "5", "--tol", "1e-5"];
    assert_eq!(run("1", &butterfly), run("4", &butterfly));
    let lyap = ["lyapunov", "--model", "amo:1", "--alpha", "golden", "--energy", "0.3", "--steps", "500", "--seed", "7"];
    assert_eq!(run("1", &lyap), run("3", &lyap));
}

#[test]
fn flags_override_environment() {
    let dir = tempfile::tempdir().unwrap();
    let lyap = ["lyapunov", "--model", "amo:1", "--alpha", "golden", "--energy", "0.3", "--steps", "500"];
    let env_seed = Command::new(env!("CARGO_BIN_EXE_harperlab"))
        .args(lyap)
        .env("HARPERLAB_SEED", "5")
        .output()
        .unwrap();
    let mut with_flag = lyap.to_vec();
    with_flag.extend(["--seed", "5"]);
    let flag_seed = harperlab(dir.path(), &with_flag);
    assert_eq!(stdout(&env_seed), stdout(&flag_seed));
    let mut override_env = lyap.to_vec();
    override_env.extend(["--seed", "6"]);
    let both = Command::new(env!("CARGO_BIN_EXE_harperlab"))
        .args(&override_env)
        .env("HARPERLAB_SEED", "5")
        .output()
        .unwrap();
    assert_ne!(stdout(&env_seed), stdout(&both));
}

#[test]
fn out_dir_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("artifacts");
    let o = harperlab(
        dir.path(),
        &["--out", out.to_str().unwrap(), "--svg", "--reproducible", "butterfly", "--model", "amo:1", "--qmax", "5"],
    );
    assert_eq!(o.status.code(), Some(0));
    let jsonl = std::fs::read_to_string(out.join("bands/butterfly.jsonl")).unwrap();
    assert!(jsonl.lines().next().unwrap().starts_with("{\"config\":"));
    assert_eq!(jsonl.lines().count(), 1 + 9);
    let svg = std::fs::read_to_string(out.join("plots/butterfly.svg")).unwrap();
    assert!(svg.contains("viewBox=\"0 0 1000 1000\"") && !svg.contains("generated at"));
}

#[test]
fn cache_preserves_every_bit() {
    let dir = tempfile::tempdir().unwrap();
    let cache = BandCache::new(dir.path());
    let f = Fraction::new(3, 7).unwrap();
    let bands = BandSet::new([(-2.610973927190334, -2.5325685972303638), (0.1 + 0.2, 1.0 / 3.0)], MERGE_TOL);
    cache.put("amo:1", Some(1.0), f, 1e-8, &bands).unwrap();
    assert_eq!(cache.get("amo:1", f, 1e-8), Some(bands));
}
