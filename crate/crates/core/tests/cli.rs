use std::fs;

use exwalk::cli::{run, Outcome};

fn exwalk(args: &[&str]) -> Outcome {
    run(std::iter::once("exwalk").chain(args.iter().copied()))
}

fn ok(args: &[&str]) -> String {
    let out = exwalk(args);
    assert_eq!(out.code, 0, "{args:?}: {}", out.stderr);
    out.stdout
}

/// Value of a `key: value` line.
fn field(out: &str, key: &str) -> f64 {
    let prefix = format!("{key}: ");
    let line = out.lines().find(|l| l.starts_with(&prefix)).unwrap_or_else(|| panic!("no {key} in\n{out}"));
    line[prefix.len()..].parse().unwrap()
}

#[test]
fn speed_of_consecutive_threshold() {
    let out = ok(&["speed", "--N", "2", "--M", "2", "--p", "0.5,0.8"]);
    assert_eq!(out, "N: 2\nM: 2\np: 0.5,0.8\nspeed: 0.272727272727273\n");
}

#[test]
fn relaxed_flat_walk_is_driftless() {
    let out = ok(&["speed", "--N", "6", "--M", "3", "--p", "0.5,0.5", "--relaxed"]);
    assert!(field(&out, "speed").abs() < 1e-15);
    // strict mode is the default
    assert_eq!(exwalk(&["speed", "--N", "6", "--M", "3", "--p", "0.5,0.5"]).code, 2);
}

#[test]
fn config_file_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("walk.json");
    fs::write(&path, r#"{"N": 2, "M": [2], "p": [0.5, 0.8]}"#).unwrap();
    let from_file = ok(&["speed", "--config", path.to_str().unwrap()]);
    assert_eq!(from_file, ok(&["speed", "--N", "2", "--M", "2", "--p", "0.5,0.8"]));
    // a flag overrides the file
    let overridden = ok(&["speed", "--config", path.to_str().unwrap(), "--N", "5"]);
    assert_eq!(overridden, ok(&["speed", "--N", "5", "--M", "2", "--p", "0.5,0.8"]));
}

#[test]
fn breakdown_lists_every_band() {
    let out = ok(&["speed", "--N", "9", "--M", "3,6", "--p", "0.2,0.5,0.85", "--breakdown"]);
    let rows: Vec<&str> = out.lines().skip_while(|l| !l.starts_with("band,")).collect();
    assert_eq!(rows[0], "band,M_lo,M_hi,p,log_mass,weight,mean_fraction");
    assert_eq!(rows.len(), 4);
    let weights: f64 = rows[1..].iter().map(|r| r.split(',').nth(5).unwrap().parse::<f64>().unwrap()).sum();
    assert!((weights - 1.0).abs() < 1e-14);
}

#[test]
fn every_violation_reported() {
    let out = exwalk(&["speed", "--N", "6", "--M", "3,2", "--p", "0.5,0.5,0.4"]);
    assert_eq!(out.code, 2);
    assert_eq!(out.stderr.lines().count(), 3, "{}", out.stderr);
    assert!(out.stdout.is_empty());
}

#[test]
fn json_speed() {
    let out = ok(&["speed", "--N", "2", "--M", "2", "--p", "0.5,0.8", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["N"], 2);
    assert_eq!(v["speed"].as_f64().unwrap(), 0.272727272727273);
}

#[test]
fn limit_on_both_sides_of_critical() {
    assert_eq!(field(&ok(&["limit", "--p", "0.5,0.8", "--r", "0.5"]), "limit_speed"), 0.6);
    assert_eq!(field(&ok(&["limit", "--p", "0.5,0.8", "--r", "0.75"]), "limit_speed"), 0.0);
}

#[test]
fn critical_fraction() {
    let r = field(&ok(&["rstar", "--p", "0.5,0.8"]), "r_star");
    assert!((r - 0.66096).abs() < 1e-5);
}

#[test]
fn tie_needs_offsets_or_weights() {
    let tie = ["limit", "--p", "0.3,0.7", "--r", "0.5"];
    let out = exwalk(&tie);
    assert_eq!(out.code, 3);
    assert!(out.stderr.contains("offsets"));

    let zero = ok(&[&tie[..], &["--offsets", "0"]].concat());
    assert!(zero.contains("alpha: 1,1\n"));
    // unit alphas weight each tied band by 1/(1-p)
    let expected = (-0.4 / 0.7 + 0.4 / 0.3) / (1.0 / 0.7 + 1.0 / 0.3);
    assert!((field(&zero, "limit_speed") - expected).abs() < 1e-14);

    let weighted = ok(&[&tie[..], &["--alpha", "1,inf"]].concat());
    assert!((field(&weighted, "limit_speed") - 0.4).abs() < 1e-15);
    assert_eq!(exwalk(&[&tie[..], &["--alpha", "inf,inf"]].concat()).code, 3);
}

#[test]
fn capacity_exit_code() {
    assert_eq!(exwalk(&["speed", "--N", "200000000", "--M", "3", "--p", "0.5,0.8"]).code, 4);
    assert_eq!(exwalk(&["stationary", "--N", "30", "--M", "3", "--p", "0.5,0.8"]).code, 0);
}

#[test]
fn usage_errors() {
    assert_eq!(exwalk(&["speed", "--M", "2", "--p", "0.5,0.8"]).code, 2);
    assert_eq!(exwalk(&["nonsense"]).code, 2);
    assert_eq!(exwalk(&["simulate", "--N", "5", "--M", "3", "--p", "0.3,0.7", "--steps", "1.5"]).code, 2);
    assert_eq!(exwalk(&["rstar", "--p", "0.5,0.6,0.7"]).code, 2);
    let help = exwalk(&["--help"]);
    assert_eq!(help.code, 0);
    assert!(help.stdout.contains("sweep"));
}

#[test]
fn sweep_across_critical_fraction() {
    let out = ok(&["sweep", "--N", "2000", "--p", "0.5,0.8", "--axis", "r=0:1:101", "--limit"]);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("r,speed_exact,speed_limit"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let cells: Vec<&str> = l.split(',').collect();
            (cells[0].parse().unwrap(), cells[1].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 101);
    for (r, s) in rows {
        if r < 0.64 {
            assert!((s - 0.6).abs() < 1e-6, "r = {r}: {s}");
        } else if r > 0.68 {
            assert!(s.abs() < 1e-6, "r = {r}: {s}");
        }
    }
}

#[test]
fn sweep_over_windows_converges() {
    let out = ok(&["sweep", "--p", "0.5,0.8", "--r", "0.64", "--axis", "N=125,250,500,1000,2000,4000", "--limit"]);
    let gaps: Vec<f64> = out
        .lines()
        .skip(1)
        .map(|l| {
            let c: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (c[1] - c[2]).abs()
        })
        .collect();
    // past N = 1000 the gap is rounding noise of order 1e-15
    assert!(gaps.windows(2).all(|w| w[1] < w[0] || w[1] < 1e-13), "{gaps:?}");
    assert!(gaps[3] < 1e-12);
}

#[test]
fn sweep_rejects_bad_axes() {
    let base = ["sweep", "--N", "100", "--p", "0.5,0.8"];
    for axis in ["r=0.5:0.5:10", "r=0:1:1", "x=0:1:5"] {
        assert_eq!(exwalk(&[&base[..], &["--axis", axis]].concat()).code, 2, "{axis}");
    }
    assert_eq!(exwalk(&base).code, 2);
}

#[test]
fn sweep_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.csv");
    let args = ["sweep", "--N", "50", "--p", "0.3,0.6", "--axis", "M=10,20,30"];
    let stdout = ok(&args);
    assert_eq!(ok(&[&args[..], &["--output", path.to_str().unwrap()]].concat()), "");
    assert_eq!(fs::read_to_string(&path).unwrap(), stdout);
}

#[test]
fn simulate_reports_oracle_comparison() {
    let args =
        ["simulate", "--N", "5", "--M", "3", "--p", "0.3,0.7", "--steps", "1e6", "--replicas", "8", "--seed", "7"];
    let out = ok(&args);
    assert!(out.contains("rng: splitmix64\n"));
    assert!(field(&out, "z_score").abs() <= 4.0);
    assert_eq!(field(&out, "steps"), 1e6);
    assert_eq!(out, ok(&args));
}

#[test]
fn census_subcommand() {
    let out = ok(&[
        "simulate",
        "--N",
        "20",
        "--M",
        "10",
        "--p",
        "0.5,0.8",
        "--census",
        "--T",
        "1e4",
        "--m",
        "999",
        "--replicas",
        "20",
        "--seed",
        "3",
    ]);
    assert_eq!(field(&out, "expected"), 0.8);
    assert!(field(&out, "z_score").abs() <= 4.0);
    assert_eq!(out.lines().filter(|l| l.len() > 3 && l.as_bytes()[3] == b',').count(), 8);
}

#[test]
fn gmodel_linear() {
    let out = ok(&["gmodel", "--linear", "0.2,0.6"]);
    assert!((field(&out, "p_star") - 1.0 / 3.0).abs() < 1e-14);
    assert!((field(&out, "limit_speed") + 1.0 / 3.0).abs() < 1e-14);

    let out = ok(&["gmodel", "--linear", "0.3,0.7", "--N", "2000"]);
    assert_eq!(field(&out, "limit_speed"), 0.0);
    let row = out.lines().find(|l| l.starts_with("2000,")).unwrap();
    let s: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!(s.abs() < 1e-12);
}

#[test]
fn gmodel_tables() {
    let dir = tempfile::tempdir().unwrap();
    let flat = dir.path().join("g.csv");
    fs::write(&flat, "x,G\n0,0.3\n0.5,0.3\n1,0.3\n").unwrap();
    let out = ok(&["gmodel", "--table", flat.to_str().unwrap()]);
    assert!((field(&out, "limit_speed") + 0.4).abs() < 1e-12);

    // symmetric S-shape: two outer maxima of equal height
    let tied = dir.path().join("s.csv");
    fs::write(&tied, "x,G\n0,0.1\n0.3,0.2\n0.5,0.5\n0.7,0.8\n1,0.9\n").unwrap();
    let out = exwalk(&["gmodel", "--table", tied.to_str().unwrap()]);
    assert_eq!(out.code, 3);
    assert!(out.stderr.contains("0.15") && out.stderr.contains("0.85"), "{}", out.stderr);

    let broken = dir.path().join("b.csv");
    fs::write(&broken, "x,G\n0,0.6\n1,0.4\n").unwrap();
    assert_eq!(exwalk(&["gmodel", "--table", broken.to_str().unwrap()]).code, 2);
}

#[test]
fn stationary_dump() {
    let out = ok(&["stationary", "--N", "4", "--M", "2", "--p", "0.3,0.7"]);
    let masses: f64 = out
        .lines()
        .skip_while(|l| !l.starts_with("k,"))
        .skip(1)
        .take_while(|l| l.contains(','))
        .map(|l| l.split(',').nth(3).unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((masses - 1.0).abs() < 1e-14);
    assert!(field(&out, "bruteforce_residual") < 1e-12);
    assert!(field(&out, "max_abs_difference") < 1e-12);
    // beyond the brute-force range only the formula is printed
    assert!(!ok(&["stationary", "--N", "20", "--M", "5", "--p", "0.3,0.7"]).contains("bruteforce"));
}
