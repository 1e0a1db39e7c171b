use std::path::Path;
use std::process::{Command, Output};

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Run {
    fn records(&self) -> Vec<(String, String)> {
        self.stdout
            .lines()
            .filter_map(|l| l.split_once('=').map(|(k, v)| (k.to_string(), v.to_string())))
            .collect()
    }

    fn keys(&self) -> Vec<String> {
        self.records().into_iter().map(|(k, _)| k).collect()
    }

    fn get(&self, key: &str) -> String {
        self.records()
            .into_iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v)
            .unwrap_or_else(|| panic!("no `{key}` in:\n{}", self.stdout))
    }
}

fn hermes(dir: &Path, args: &[&str]) -> Run {
    let out: Output = Command::new(env!("CARGO_BIN_EXE_hermes"))
        .env("HERMES_DATA_DIR", dir)
        .args(["--seed", "7", "--format", "machine"])
        .args(args)
        .output()
        .unwrap();
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn ok(dir: &Path, args: &[&str]) -> Run {
    let r = hermes(dir, args);
    assert_eq!(r.code, 0, "hermes {args:?}\nstdout:\n{}\nstderr:\n{}", r.stdout, r.stderr);
    r
}

fn desk_keys(dir: &Path) {
    ok(dir, &["keygen", "--profile", "desk"]);
}

fn write_csv(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn keygen_reports_slots_and_refuses_overwrite() {
    let dir = tempfile::tempdir().unwrap();
    let r = ok(dir.path(), &["keygen", "--profile", "desk"]);
    assert_eq!(r.get("slots"), "8");
    assert_eq!(r.get("capacity"), "7");
    assert_eq!(
        r.keys(),
        ["degree", "slots", "capacity", "plain_modulus", "log2_q", "params_id", "rotation_keys", "keys_dir", "keygen_ms"]
    );
    assert_eq!(r.get("rotation_keys"), "6");

    let again = hermes(dir.path(), &["keygen", "--profile", "desk"]);
    assert_eq!(again.code, 2);
    assert!(again.stderr.contains("--force"), "{}", again.stderr);
    ok(dir.path(), &["keygen", "--profile", "desk", "--force", "--rotations", "minimal"]);
}

#[test]
fn full_profile_reports_8192_slots() {
    let dir = tempfile::tempdir().unwrap();
    let r = ok(dir.path(), &["keygen", "--rotations", "minimal"]);
    assert_eq!(r.get("slots"), "8192");
    assert_eq!(r.get("capacity"), "8191");
    assert_eq!(r.get("degree"), "16384");
}

#[test]
fn two_groups_sum_and_slot_reads() {
    let dir = tempfile::tempdir().unwrap();
    desk_keys(dir.path());
    let csv = write_csv(dir.path(), "v.csv", "amount\n10\n20\n30\n35\n40\n");
    let r = ok(dir.path(), &["ingest", &csv, "--table", "t", "--group-size", "3"]);
    assert_eq!(r.get("tuples"), "5");
    assert_eq!(r.get("groups"), "2");
    assert_eq!(
        r.keys(),
        [
            "table",
            "dataset",
            "tuples",
            "groups",
            "group_size",
            "encryptions",
            "encrypt_total_ms",
            "encrypt_per_tuple_us",
            "write_ms"
        ]
    );

    let s = ok(dir.path(), &["sum", "--table", "t"]);
    assert_eq!(s.get("total"), "135");
    assert_eq!(s.get("rotations"), "0");
    assert_eq!(
        s.keys(),
        ["table", "method", "ciphertexts", "total", "modulus", "rotations", "rotations_per_ciphertext", "latency_ms"]
    );
    let s1 = ok(dir.path(), &["sum", "--table", "t", "--group", "1"]);
    assert_eq!(s1.get("total"), "75");
    let b = ok(dir.path(), &["sum", "--table", "t", "--baseline", "rotate"]);
    assert_eq!(b.get("total"), "135");
    assert_eq!(b.get("rotations_per_ciphertext"), "3");
    assert_eq!(b.get("method"), "rotate");

    assert_eq!(ok(dir.path(), &["get", "--table", "t", "--group", "1", "--slot", "7"]).get("value"), "75");
    assert_eq!(ok(dir.path(), &["get", "--table", "t", "--group", "1", "--slot", "1"]).get("value"), "40");
    assert_eq!(ok(dir.path(), &["get", "--table", "t", "--group", "1", "--slot", "5"]).get("value"), "0");
    let absent = ok(dir.path(), &["get", "--table", "t", "--group", "1", "--slot", "8"]);
    assert_eq!(absent.get("value"), "absent");
    assert!(absent.stderr.contains("outside"), "{}", absent.stderr);

    // Read-only commands report the same state when re-run.
    let again = ok(dir.path(), &["sum", "--table", "t"]);
    assert_eq!(again.get("total"), s.get("total"));

    let info = ok(dir.path(), &["info"]);
    assert_eq!(info.get("table"), "t");
    assert_eq!(info.get("table_tuples"), "5");
}

#[test]
fn updates_persist() {
    let dir = tempfile::tempdir().unwrap();
    desk_keys(dir.path());
    let csv = write_csv(dir.path(), "v.csv", "1\n2\n3\n");
    ok(dir.path(), &["ingest", &csv, "--table", "t"]);

    let a = ok(dir.path(), &["insert", "--table", "t", "--group", "5", "--append", "9"]);
    assert_eq!(a.get("len"), "1");
    assert_eq!(ok(dir.path(), &["sum", "--table", "t"]).get("total"), "15");

    let i = ok(dir.path(), &["insert", "--table", "t", "--group", "0", "--index", "1", "50", "--mode", "encrypted", "-v"]);
    assert_eq!(i.get("len"), "4");
    assert_eq!(i.get("rotations"), "1");
    assert_eq!(i.get("mask_mults"), "2");
    assert_eq!(ok(dir.path(), &["get", "--table", "t", "--group", "0", "--slot", "1"]).get("value"), "50");

    let d = ok(dir.path(), &["delete", "--table", "t", "--group", "0", "--index", "2"]);
    assert_eq!(d.get("deleted"), "2");
    assert_eq!(d.get("len"), "3");
    assert_eq!(ok(dir.path(), &["sum", "--table", "t", "--group", "0"]).get("total"), "54");

    ok(dir.path(), &["delete", "--table", "t", "--group", "5", "--index", "0"]);
    let inert = ok(dir.path(), &["delete", "--table", "t", "--group", "5", "--index", "0"]);
    assert_eq!(inert.get("len"), "0");
    assert!(inert.stderr.contains("empty"));
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(hermes(dir.path(), &["sum", "--table", "t"]).code, 2, "no keys yet");
    desk_keys(dir.path());

    let big = write_csv(dir.path(), "big.csv", "1\n65537\n");
    let r = hermes(dir.path(), &["ingest", &big, "--table", "big"]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("row 2"), "{}", r.stderr);
    ok(dir.path(), &["ingest", &big, "--table", "big", "--reduce-mod-t"]);

    let full = write_csv(dir.path(), "full.csv", "1\n2\n3\n4\n5\n6\n7\n");
    ok(dir.path(), &["ingest", &full, "--table", "full"]);
    assert_eq!(hermes(dir.path(), &["insert", "--table", "full", "--group", "0", "--append", "1"]).code, 4);
    assert_eq!(hermes(dir.path(), &["insert", "--table", "full", "--group", "0", "--index", "9", "1"]).code, 4);
    assert_eq!(hermes(dir.path(), &["delete", "--table", "full", "--group", "0", "--index", "9"]).code, 2);
    assert_eq!(hermes(dir.path(), &["insert", "--table", "full", "--group", "0", "1"]).code, 2);
    assert_eq!(hermes(dir.path(), &["ingest", &full, "--table", "x", "--group-size", "8"]).code, 2);
    assert_eq!(hermes(dir.path(), &["sum", "--table", "nope"]).code, 2);
    assert_eq!(hermes(dir.path(), &["get", "--table", "full", "--group", "3", "--slot", "0"]).code, 2);
    assert_eq!(hermes(dir.path(), &["bench", "nope"]).code, 2);

    ok(dir.path(), &["keygen", "--profile", "desk", "--force", "--rotations", "minimal"]);
    assert_eq!(hermes(dir.path(), &["sum", "--table", "full", "--baseline", "rotate"]).code, 6);

    ok(dir.path(), &["keygen", "--profile", "desk", "-t", "786433", "--force"]);
    assert_eq!(hermes(dir.path(), &["sum", "--table", "full"]).code, 5);
}

#[test]
fn ingest_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["keygen", "--profile", "desk", "-N", "64"]);
    let empty = write_csv(dir.path(), "empty.csv", "");
    let r = ok(dir.path(), &["ingest", &empty, "--table", "e"]);
    assert_eq!(r.get("groups"), "0");
    assert_eq!(ok(dir.path(), &["sum", "--table", "e"]).get("total"), "0");
    assert_eq!(hermes(dir.path(), &["ingest", &empty, "--table", "e"]).code, 1, "table exists");
    ok(dir.path(), &["ingest", &empty, "--table", "e", "--replace"]);

    let r = ok(dir.path(), &["ingest", "covid19", "--table", "c", "--reduce-mod-t"]);
    assert_eq!(r.get("tuples"), "341");
    assert_eq!(r.get("groups"), "11");

    assert_eq!(hermes(dir.path(), &["ingest", "bitcoin", "--table", "b", "--scale", "1/24"]).code, 3);
    ok(dir.path(), &["ingest", "bitcoin", "--table", "b", "--scale", "1/24", "--reduce-mod-t"]);
}

#[test]
fn bench_suites_emit_reports() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let r = ok(
        dir.path(),
        &["bench", "encrypt", "--profile", "desk", "-N", "64", "--dataset", "covid19", "--reduce-mod-t", "--csv", csv.to_str().unwrap()],
    );
    assert_eq!(r.get("suite"), "encrypt");
    assert_eq!(r.get("tuples"), "341");
    assert_eq!(r.get("parallel"), "false");
    assert!(r.get("speedup").parse::<f64>().unwrap() > 1.0);
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("suite,dataset,tuples,profile,parallel,"));

    let r = ok(dir.path(), &["bench", "insert", "--profile", "desk", "-N", "256", "--ops", "20"]);
    assert_eq!(r.get("rotations"), "20");
    assert_eq!(r.get("oracle_match"), "true");

    let r = ok(dir.path(), &["bench", "aggregate", "--profile", "desk", "-N", "64"]);
    assert_eq!(r.get("rotation_free_rotations"), "0");
    assert_eq!(r.get("baseline_rotations_per_ciphertext"), "5");

    let r = ok(dir.path(), &["bench", "sweep", "--profile", "desk", "-N", "64", "--group-sizes", "4,8,16", "--ops", "5"]);
    assert_eq!(r.records().iter().filter(|(k, _)| k == "suite").count(), 3);
    assert!(r.stdout.contains("encrypt_non_increasing="));

    let r = ok(dir.path(), &["fuzz", "--ops", "500"]);
    assert_eq!(r.get("passed"), "true");
}

#[test]
fn human_output_is_readable() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_hermes"))
        .env("HERMES_DATA_DIR", dir.path())
        .args(["keygen", "--profile", "desk"])
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("n = 8, payload capacity n-1 = 7"), "{text}");
    assert!(!text.contains("slots=8"), "{text}");
}
