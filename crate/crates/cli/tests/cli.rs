use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn dsc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dsc"))
        .args(args)
        .env_remove("DSC_JOBS")
        .output()
        .expect("spawn dsc")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

const SMALL_SWEEP: &str = r#"
backend = "cvs"

[model]
omega_r_ghz = 6.0
delta_ghz = 1.2
g_ghz = 6.0
qr_coupling = "inductive"

[environment]
rw_coupling = "inductive"
Z_R_ohm = 30.0
Z_T_ohm = 50.0

[sweep]
variable = "kappa"
start = 1.0
stop = 100.0
points = 4
log = true
"#;

fn data_lines(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn point_writes_one_row_per_backend() {
    let out = dsc(&["point", "--config", configs().join("point_cat.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines = data_lines(&text);
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("g_ghz,kappa_mhz,backend,n_virtual,purity,coherence_C"));
    let cells: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(cells[2], "cvs");
    let c: f64 = cells[5].parse().unwrap();
    assert!((c - 0.88).abs() < 0.03, "C = {c}");
}

#[test]
fn sweep_is_byte_identical_across_runs_and_job_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SMALL_SWEEP);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let ra = dsc(&["sweep", "--config", cfg.to_str().unwrap(), "--out", a.to_str().unwrap(), "--jobs", "1"]);
    let rb = dsc(&["sweep", "--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap(), "--jobs", "3"]);
    assert_eq!(ra.status.code(), Some(0));
    assert_eq!(rb.status.code(), Some(0));
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let text = String::from_utf8(ta).unwrap();
    assert!(text.starts_with("# "), "config echo missing");
    assert_eq!(data_lines(&text).len(), 5);
}

#[test]
fn backend_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let small = SMALL_SWEEP.to_string()
        + "\n[truncation]\nresonator_dim = 6\nmode_freqs_ghz = [5.0, 10.0]\nmode_dims = [2, 2]\n";
    let cfg = write(dir.path(), "s.toml", &small);
    let out = dsc(&["sweep", "--config", cfg.to_str().unwrap(), "--backend", "both"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows = data_lines(&text);
    assert_eq!(rows.len(), 1 + 2 * 4);
    assert!(rows[1].contains(",cvs,") && rows[2].contains(",diag,"));
}

#[test]
fn failing_rows_give_exit_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL_SWEEP.replace("backend = \"cvs\"", "backend = \"both\"")
        + "\n[truncation]\nresonator_dim = 14\nmode_freqs_ghz = [5.0, 10.0, 15.0, 20.0]\nmode_dims = [20, 20, 20, 20]\n";
    let cfg = write(dir.path(), "s.toml", &text);
    let out = dsc(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    let rows = data_lines(&csv);
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().filter(|r| r.contains(",diag,")).all(|r| r.contains("exceeds the size guard")));
    assert!(rows.iter().filter(|r| r.contains(",cvs,")).all(|r| r.ends_with(',')));
}

#[test]
fn config_errors_give_exit_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let conflict = SMALL_SWEEP.replace("Z_T_ohm = 50.0", "Z_T_ohm = 50.0\nL_c_nH = 2.0\nkappa_mhz = 3.0");
    let cfg = write(dir.path(), "c.toml", &conflict);
    let out = dsc(&["point", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("config"));

    let missing = dir.path().join("nope.toml");
    assert_eq!(dsc(&["point", "--config", missing.to_str().unwrap()]).status.code(), Some(1));

    let no_sweep = write(dir.path(), "n.toml", SMALL_SWEEP.split("[sweep]").next().unwrap());
    assert_eq!(dsc(&["sweep", "--config", no_sweep.to_str().unwrap()]).status.code(), Some(1));

    let zero_delta = write(dir.path(), "z.toml", &SMALL_SWEEP.replace("delta_ghz = 1.2", "delta_ghz = 0.0"));
    assert_eq!(dsc(&["point", "--config", zero_delta.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn wigner_of_the_coherence_points_is_negative_near_origin() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("w.csv");
    let out = dsc(&[
        "wigner",
        "--config",
        configs().join("point_cat.toml").to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(out_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,p,W"));
    let mut count = 0;
    let mut min_near_origin = f64::INFINITY;
    for l in lines {
        let v: Vec<f64> = l.split(',').map(|c| c.parse().unwrap()).collect();
        count += 1;
        if v[0].abs() < 0.5 && v[1].abs() < 0.5 {
            min_near_origin = min_near_origin.min(v[2]);
        }
    }
    assert_eq!(count, 101 * 101);
    assert!(min_near_origin < 0.0);
}

#[test]
fn wigner_rejects_both_backends() {
    let out = dsc(&["wigner", "--config", configs().join("point_cat.toml").to_str().unwrap(), "--backend", "both"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn circuit_table_spans_the_loss_range() {
    for (file, head) in [("circuit_inductive.toml", "L_c_nH"), ("circuit_capacitive.toml", "C_c_fF")] {
        let out = dsc(&["circuit", "--config", configs().join(file).to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        let text = String::from_utf8(out.stdout).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), format!("{head},kappa_mhz,omega_cutoff_ghz,xi0"));
        let kappas: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
        assert_eq!(kappas.len(), 30);
        let (lo, hi) = kappas.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &k| (a.min(k), b.max(k)));
        assert!(lo < 1.0 && hi > 100.0, "{file}: {lo}..{hi}");
    }
}

#[test]
fn dump_has_the_documented_header() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL_SWEEP
        .replace("backend = \"cvs\"", "backend = \"diag\"")
        .replace("Z_T_ohm = 50.0", "Z_T_ohm = 50.0\nkappa_mhz = 100.0")
        + "\n[truncation]\nresonator_dim = 6\nmode_freqs_ghz = [5.0, 10.0]\nmode_dims = [2, 2]\n";
    let cfg = write(dir.path(), "d.toml", &text);
    let dump = dir.path().join("h.bin");
    let out = dsc(&["point", "--config", cfg.to_str().unwrap(), "--dump", dump.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let bytes = std::fs::read(dump).unwrap();
    assert_eq!(&bytes[..8], b"DSCDUMP1");
    assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 4);
    let n = 2 * 6 * 2 * 2;
    assert_eq!(bytes.len(), 8 + 4 + 4 * 8 + 2 + (n * n + n) * 16);
}

#[test]
fn shipped_configs_parse() {
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        dsc_core::config::parse_config(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}
