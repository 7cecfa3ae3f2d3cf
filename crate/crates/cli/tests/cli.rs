use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn tool(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fock-filter"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_into(dir: &Path, args: &[&str]) -> Output {
    let mut all = args.to_vec();
    all.extend(["--out", dir.to_str().unwrap()]);
    tool(&all)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Rows of a CSV file below its header.
fn rows(path: &Path) -> (String, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    (header, lines.map(|l| l.split(',').map(str::to_string).collect()).collect())
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("cfg.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn profile_preset_has_single_unit_peak() {
    let dir = TempDir::new().unwrap();
    let o = run_into(dir.path(), &["profile", "--preset", "profile"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = rows(&dir.path().join("profile.csv"));
    assert_eq!(header, "n,sigma2");
    assert_eq!(rows.len(), 31);
    let vals: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(vals[4], 1.0);
    assert!(vals.iter().enumerate().all(|(n, &v)| n == 4 || v < 0.5));
}

#[test]
fn fig2_synthesis_peaks_at_four() {
    let dir = TempDir::new().unwrap();
    let o = run_into(dir.path(), &["synthesize", "--preset", "fig2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, dist) = rows(&dir.path().join("synthesis_distribution.csv"));
    assert_eq!(header, "tau,n,p_in,p_on,p_off");
    let last: Vec<(usize, f64)> = dist
        .iter()
        .filter(|r| r[0].parse::<f64>().unwrap() == 0.0002)
        .map(|r| (r[1].parse().unwrap(), r[3].parse().unwrap()))
        .collect();
    assert_eq!(last.len(), 31);
    let peak = last.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    assert_eq!(peak.0, 4);
    assert!(dir.path().join("state_on_2.csv").exists());
    let (header, _) = rows(&dir.path().join("state_on_2.csv"));
    assert_eq!(header, "n,m,re,im");
}

#[test]
fn fig3_histogram_with_half_widths() {
    let dir = TempDir::new().unwrap();
    let o = run_into(dir.path(), &["measure-pn", "--preset", "fig3-coherent", "--seed", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = rows(&dir.path().join("distribution.csv"));
    assert_eq!(header, "n,p,ci,theory");
    assert_eq!(rows.len(), 9);
    for r in &rows {
        let ci: f64 = r[2].parse().unwrap();
        assert!(ci >= 1.0 / 2000.0);
    }
    let manifest = fs::read_to_string(dir.path().join("manifest.toml")).unwrap();
    assert!(manifest.contains("seed = 1"));
    assert!(manifest.contains("samples = 2000"));
    assert!(manifest.contains("alpha_re = 20.0"));
    assert!(manifest.contains("artifact_version"));
}

#[test]
fn identical_runs_are_byte_identical() {
    for args in [
        &["measure-pn", "--preset", "fig3-squeezed", "--seed", "5"][..],
        &["tomography", "--preset", "tomo-coherent-mc", "--seed", "2"][..],
        &["synthesize", "--format", "structured"][..],
    ] {
        let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
        assert!(run_into(a.path(), args).status.success());
        assert!(run_into(b.path(), args).status.success());
        assert_eq!(files(a.path()), files(b.path()), "{args:?}");
    }
}

#[test]
fn manifest_reproduces_results() {
    for (exp, preset) in [
        ("measure-pn", "fig3-thermal"),
        ("tomography", "tomo-coherent-mc"),
        ("superposition", "superposition"),
        ("profile", "profile"),
        ("synthesize", "fig2"),
    ] {
        let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
        assert!(run_into(a.path(), &[exp, "--preset", preset, "--seed", "11"]).status.success());
        let manifest = a.path().join("manifest.toml");
        let o = run_into(b.path(), &[exp, "--config", manifest.to_str().unwrap()]);
        assert!(o.status.success(), "{preset}: {}", stderr(&o));
        assert_eq!(files(a.path()), files(b.path()), "{preset}");
    }
}

#[test]
fn structured_format_writes_json() {
    let dir = TempDir::new().unwrap();
    assert!(run_into(dir.path(), &["profile", "--format", "structured"]).status.success());
    let text = fs::read_to_string(dir.path().join("profile.json")).unwrap();
    assert!(text.starts_with("{\n  \"columns\": [\"n\", \"sigma2\"],"));
    assert!(text.ends_with("}\n"));
}

#[test]
fn stdout_when_no_out_dir() {
    let o = tool(&["profile"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("# profile\nn,sigma2\n"));
    assert_eq!(text.lines().count(), 33);
}

fn assert_config_error(cfg: &str, field: &str) {
    let dir = TempDir::new().unwrap();
    let path = write_config(dir.path(), cfg);
    let out = dir.path().join("out");
    let exp = cfg.lines().find_map(|l| l.strip_prefix("experiment = ")).unwrap().trim_matches('"').replace('_', "-");
    let o = run_into(&out, &[&exp, "--config", &path]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains(field), "{field}: {}", stderr(&o));
    assert!(!out.exists(), "nothing may be written before validation passes");
}

#[test]
fn validation_rejects_out_of_range_inputs() {
    assert_config_error(
        "experiment = \"profile\"\n[cavity]\ntau = 1.5\npsi = 0.0\nchi_t = 0.1\n[profile]\nn_max = 10\n",
        "tau",
    );
    assert_config_error(
        "experiment = \"superposition\"\n[state]\nkind = \"coherent\"\nre = 1.0\nim = 0.0\n[cavity]\ntau = 1e-4\npsi = 1.5707963267948966\nchi_t = 1.5707963267948966\n[probe]\nalpha_re = 20.0\neta = 0.0\n",
        "eta",
    );
    assert_config_error(
        "experiment = \"measure_pn\"\n[state]\nkind = \"thermal\"\nmean_n = -1.0\n[probe]\nalpha_re = 20.0\neta = 0.4\n[cascade]\nn_top = 8\ntau = 0.001\nchi_t = 0.1\nsamples = 100\n",
        "mean_n",
    );
    assert_config_error(
        "experiment = \"tomography\"\n[state]\nkind = \"coherent\"\nre = 1.0\nim = 0.0\n[tomography]\nm_max = 5\nphases = 10\n",
        "phases",
    );
    assert_config_error("experiment = \"profile\"\n[cavity]\ntau = 0.1\npsi = 0.0\nchi_t = 0.1\n", "profile");
    assert_config_error("experiment = \"profile\"\ncolour = 3\n", "colour");
}

#[test]
fn preset_and_experiment_mismatches_are_config_errors() {
    let o = tool(&["profile", "--preset", "no-such-preset"]);
    assert_eq!(o.status.code(), Some(2));
    let o = tool(&["tomography", "--preset", "fig2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("synthesize"));
}

#[test]
fn tomography_from_measured_table() {
    let sim = TempDir::new().unwrap();
    assert!(run_into(sim.path(), &["tomography", "--preset", "tomo-coherent"]).status.success());
    let scan = sim.path().join("scan.csv");
    let dir = TempDir::new().unwrap();
    let cfg = format!(
        "experiment = \"tomography\"\n[tomography]\nm_max = 5\ngamma_abs = 1.0\nphases = 16\nn_rows = 12\ninput = \"{}\"\n",
        scan.display()
    );
    let path = write_config(dir.path(), &cfg);
    let out = dir.path().join("out");
    let o = run_into(&out, &["tomography", "--config", &path]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, a) = rows(&sim.path().join("nu_hat.csv"));
    let (_, b) = rows(&out.join("nu_hat.csv"));
    assert_eq!(a.len(), 36);
    for (x, y) in a.iter().zip(&b) {
        for c in 2..4 {
            let (x, y): (f64, f64) = (x[c].parse().unwrap(), y[c].parse().unwrap());
            assert!((x - y).abs() <= 1e-12);
        }
    }
    let (header, _) = rows(&out.join("tomography_summary.csv"));
    assert_eq!(header, "trace,flagged,trace_plausible");
}

#[test]
fn rank_deficient_reconstruction_is_a_numerical_failure() {
    let dir = TempDir::new().unwrap();
    let mut table = String::from("phi,n,p\n");
    for j in 0..16 {
        let phi = 2.0 * std::f64::consts::PI * j as f64 / 16.0;
        for n in 0..12 {
            table.push_str(&format!("{phi:.17e},{n},0\n"));
        }
    }
    let input = dir.path().join("scan.csv");
    fs::write(&input, table).unwrap();
    let cfg = format!(
        "experiment = \"tomography\"\n[tomography]\nm_max = 5\ngamma_abs = 30.0\nphases = 16\nn_rows = 12\ninput = \"{}\"\n",
        input.display()
    );
    let path = write_config(dir.path(), &cfg);
    let out = dir.path().join("out");
    let o = run_into(&out, &["tomography", "--config", &path]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("rank deficient"));
    let (_, rows) = rows(&out.join("residuals.csv"));
    assert!(rows.iter().all(|r| r[3] == "true"));
}
