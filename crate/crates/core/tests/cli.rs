use std::fs;
use std::path::Path;
use std::process::Command;

use pmmlab::ols_fit;
use pmmlab::report::{REPLICATE_HEADER, SCATTER_HEADER, SUMMARY_HEADER};

fn pmmlab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_pmmlab"))
        .args(args)
        .env_remove("PMMLAB_OUT")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = pmmlab(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Parse a CSV file, checking the header and that every row has its width.
fn read_csv(path: &Path, header: &str) -> Vec<csv::StringRecord> {
    let text = fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().next(), Some(header));
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let width = header.split(',').count();
    reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            assert_eq!(r.len(), width);
            r
        })
        .collect()
}

#[test]
fn smoke_grid_writes_schema_conformant_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&["grid", "--reps", "10", "--seed", "7", "--out", out]);

    let rows = read_csv(&dir.path().join("summary.csv"), SUMMARY_HEADER);
    assert_eq!(rows.len(), 24);
    for row in &rows {
        let rho: f64 = row[2].parse().unwrap();
        assert!(["regression", "pmm"].contains(&&row[0]));
        assert!(["mar", "mcar"].contains(&&row[1]));
        assert_eq!(row[5].is_empty(), rho == 0.0);
        for col in [4, 6, 7, 8, 9] {
            row[col].parse::<f64>().unwrap();
        }
        assert_eq!(&row[10], "10");
        let id = format!("{}_{}_rho{}_n{}", &row[0], &row[1], rho, &row[3]);
        let reps = read_csv(
            &dir.path().join("replicates").join(format!("{id}.csv")),
            REPLICATE_HEADER,
        );
        assert_eq!(reps.len(), 10);
    }
}

#[test]
fn same_seed_gives_byte_identical_output_across_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    ok(&[
        "grid",
        "--reps",
        "6",
        "--seed",
        "3",
        "--threads",
        "1",
        "--out",
        a.path().to_str().unwrap(),
    ]);
    ok(&[
        "grid",
        "--reps",
        "6",
        "--seed",
        "3",
        "--threads",
        "8",
        "--out",
        b.path().to_str().unwrap(),
    ]);
    assert_eq!(
        fs::read(a.path().join("summary.csv")).unwrap(),
        fs::read(b.path().join("summary.csv")).unwrap()
    );
    for entry in fs::read_dir(a.path().join("replicates")).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(
            fs::read(a.path().join("replicates").join(&name)).unwrap(),
            fs::read(b.path().join("replicates").join(&name)).unwrap()
        );
    }
}

#[test]
fn invalid_rho_fails_validation_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("never");
    let out = pmmlab(&["cell", "--rho", "1.5", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(pmmlab::cli::EXIT_CONFIG));
    assert!(!target.exists());

    for bad in [
        vec!["cell", "--m", "1"],
        vec!["cell", "--k", "0"],
        vec!["grid", "--reps", "0"],
        vec!["cell", "--match-type", "3"],
        vec!["cell", "--mcar-prob", "1.2", "--mechanism", "mcar"],
        vec!["scatter", "--n", "2"],
        vec!["grid", "--threads", "0"],
    ] {
        let mut args = bad.clone();
        args.extend(["--out", target.to_str().unwrap()]);
        let out = pmmlab(&args);
        assert_eq!(out.status.code(), Some(pmmlab::cli::EXIT_CONFIG), "{bad:?}");
        assert!(!target.exists());
    }
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = pmmlab(&[
        "cell",
        "--reps",
        "2",
        "--out",
        blocker.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(pmmlab::cli::EXIT_RUNTIME));
}

#[test]
fn cell_command_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "cell",
        "--method",
        "regression",
        "--mechanism",
        "mcar",
        "--rho",
        "0.4",
        "--n",
        "200",
        "--reps",
        "20",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let rows = read_csv(&dir.path().join("cell.csv"), SUMMARY_HEADER);
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][0], "regression");
    assert_eq!(&rows[0][1], "mcar");
    assert!(dir
        .path()
        .join("replicates/regression_mcar_rho0.4_n200.csv")
        .exists());
}

#[test]
fn scatter_points_cover_four_panels() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "scatter",
        "--rho",
        "0.8",
        "--n",
        "200",
        "--mechanism",
        "mar",
        "--seed",
        "4",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let rows = read_csv(&dir.path().join("scatter.csv"), SCATTER_HEADER);
    let pick = |status: &str| -> Vec<(f64, f64)> {
        rows.iter()
            .filter(|r| &r[2] == status)
            .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap()))
            .collect()
    };
    let observed = pick("observed");
    let deleted = pick("deleted_truth");
    let reg = pick("imputed_regression");
    let pmm = pick("imputed_pmm");
    assert_eq!(observed.len() + deleted.len(), 200);
    assert_eq!(reg.len(), deleted.len());
    assert_eq!(pmm.len(), deleted.len());
    assert!(observed.iter().all(|p| p.0 <= -1.0) && deleted.iter().all(|p| p.0 > -1.0));

    // PMM closure.
    for p in &pmm {
        assert!(observed.iter().any(|o| o.1 == p.1));
    }
    // Stripes: only a handful of distinct imputed values to the right of x = 0.
    let mut right: Vec<u64> = pmm
        .iter()
        .filter(|p| p.0 > 0.0)
        .map(|p| p.1.to_bits())
        .collect();
    right.sort_unstable();
    right.dedup();
    assert!(right.len() <= 5, "{} distinct values", right.len());
}

#[test]
fn scatter_regression_slope_averages_to_truth() {
    // A single n = 200 MAR dataset has observed-case slope SD ≈ 0.24, so the
    // check is made on the average over 40 seeds.
    let mut slopes = Vec::new();
    for seed in 100..140 {
        let dir = tempfile::tempdir().unwrap();
        let seed = seed.to_string();
        ok(&[
            "scatter",
            "--rho",
            "0.8",
            "--n",
            "200",
            "--mechanism",
            "mar",
            "--seed",
            &seed,
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        let rows = read_csv(&dir.path().join("scatter.csv"), SCATTER_HEADER);
        let (x, y): (Vec<f64>, Vec<f64>) = rows
            .iter()
            .filter(|r| &r[2] == "observed" || &r[2] == "imputed_regression")
            .map(|r| (r[0].parse::<f64>().unwrap(), r[1].parse::<f64>().unwrap()))
            .unzip();
        assert_eq!(x.len(), 200);
        slopes.push(ols_fit(&x, &y).unwrap().slope);
    }
    let avg = slopes.iter().sum::<f64>() / slopes.len() as f64;
    assert!((avg - 0.8).abs() < 0.1, "{avg}");
}

#[test]
fn json_mirror() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "grid",
        "--reps",
        "3",
        "--format",
        "json",
        "--rho",
        "0",
        "--n",
        "200",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let text = fs::read_to_string(dir.path().join("summary.json")).unwrap();
    let rows: Vec<serde_json::Value> = serde_json::from_str(&text).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r["relative_bias_pct"].is_null()));
    assert!(dir
        .path()
        .join("replicates/pmm_mar_rho0_n200.json")
        .exists());
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_pmmlab"))
        .args(["cell", "--reps", "2"])
        .env("PMMLAB_OUT", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("cell.csv").exists());
}
