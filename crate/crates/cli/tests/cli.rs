use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture() -> String {
    root().join("data/fixture_panel.csv").display().to_string()
}

fn corpus(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/corpus")
        .join(name)
        .display()
        .to_string()
}

fn run_env(args: &[&str], segments_env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cooldecomp"));
    cmd.args(args);
    match segments_env {
        Some(v) => cmd.env("COOLDECOMP_SEGMENTS", v),
        None => cmd.env_remove("COOLDECOMP_SEGMENTS"),
    };
    cmd.output().expect("spawn cooldecomp")
}

fn run(args: &[&str]) -> Output {
    run_env(args, None)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Rows of a CSV table as header-keyed maps.
fn rows(text: &str) -> Vec<std::collections::BTreeMap<String, String>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers().unwrap().iter().map(str::to_string).collect();
    r.records()
        .map(|rec| header.iter().cloned().zip(rec.unwrap().iter().map(str::to_string)).collect())
        .collect()
}

fn num(row: &std::collections::BTreeMap<String, String>, col: &str) -> f64 {
    row[col].parse().unwrap_or_else(|_| panic!("{col} = {:?}", row[col]))
}

fn files_in(dir: &Path) -> Vec<String> {
    match fs::read_dir(dir) {
        Ok(entries) => {
            let mut v: Vec<String> = entries.map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
            v.sort();
            v
        }
        Err(_) => Vec::new(),
    }
}

#[test]
fn national_rows_of_the_intensity_table() {
    let o = run(&["model", "--input", &fixture(), "--states", "IN", "--years", "2022:2022"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = rows(&stdout(&o));
    assert_eq!(table.len(), 3 * 4);
    let find = |locale: &str, appliance: &str| {
        table
            .iter()
            .find(|r| r["locale"] == locale && r["appliance"] == appliance)
            .unwrap()
            .clone()
    };
    assert_eq!(find("all", "total")["intensity_kg_per_hh"], "513.8");
    assert_eq!(find("urban", "total")["intensity_kg_per_hh"], "744.7");
    assert_eq!(find("rural", "total")["intensity_kg_per_hh"], "358.1");
    assert!((num(&find("urban", "fan"), "intensity_share") - 0.704).abs() <= 0.005);
    assert_eq!(find("all", "fan")["energy_kwh_per_hh"], "493.9");
}

#[test]
fn rows_are_sorted_by_state_year_locale_appliance() {
    let o = run(&["model", "--input", &fixture(), "--states", "KL,AP,IN", "--years", "2010:2012"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = rows(&stdout(&o));
    let keys: Vec<(String, String, String, String)> = table
        .iter()
        .map(|r| (r["state"].clone(), r["year"].clone(), r["locale"].clone(), r["appliance"].clone()))
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert_eq!(keys.len(), 3 * 3 * 3 * 4);
}

#[test]
fn locale_filter_matching_everything_changes_nothing() {
    let plain = run(&["model", "--input", &corpus("urban_only.csv")]);
    let filtered = run(&["model", "--input", &corpus("urban_only.csv"), "--locale", "urban"]);
    assert_eq!(plain.status.code(), Some(0), "{}", stderr(&plain));
    assert_eq!(stdout(&plain), stdout(&filtered));
}

#[test]
fn same_year_decomposition_is_all_zero() {
    let o = run(&["decompose", "--input", &fixture(), "--years", "2010:2010", "--states", "IN,GJ"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = rows(&stdout(&o));
    assert_eq!(table.len(), 6);
    for r in &table {
        for g in ["p", "n", "e", "k", "w"] {
            assert_eq!(r[&format!("d_{g}")], "0.0");
            assert_eq!(r[&format!("rate_{g}")], "");
        }
        assert_eq!(r["total_change"], "0.0");
        assert_eq!(r["residual"], "0.0");
        assert_eq!(r["residual_rate"], "");
    }
}

#[test]
fn rates_and_residual_rate_account_for_the_whole_change() {
    let o = run(&["decompose", "--input", &fixture(), "--years", "2003:2019", "--precision", "12"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = rows(&stdout(&o));
    assert_eq!(table.len(), 33 * 3 + 3);
    for r in &table {
        // residual = change − Σ contributions, so Σ rates = 1 − residual rate
        let rates: f64 = ["p", "n", "e", "k", "w"].iter().map(|g| num(r, &format!("rate_{g}"))).sum();
        let residual_rate = num(r, "residual_rate");
        assert!((rates + residual_rate - 1.0).abs() <= 1e-6, "{}/{}: {rates} {residual_rate}", r["state"], r["locale"]);
        let change = num(r, "total_change");
        let parts: f64 = ["p", "n", "e", "k", "w"].iter().map(|g| num(r, &format!("d_{g}"))).sum::<f64>() + num(r, "residual");
        assert!((parts - change).abs() <= 1e-9 * change.abs().max(1.0));
    }
}

#[test]
fn factor_set_without_shift_has_no_w_columns() {
    let o = run(&["decompose", "--input", &fixture(), "--states", "IN", "--factors", "p,n,e,k", "--locale", "all"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(!text.contains("d_w"));
    assert_eq!(rows(&text).len(), 1);
}

#[test]
fn segments_flag_beats_environment() {
    let args = ["decompose", "--input", &fixture(), "--states", "IN", "--precision", "12"];
    let default = stdout(&run(&args));
    let env_only = stdout(&run_env(&args, Some("50")));
    let mut with_flag = args.to_vec();
    with_flag.extend(["--segments", "16000"]);
    let flag_wins = stdout(&run_env(&with_flag, Some("50")));
    assert_eq!(default, flag_wins);
    assert_ne!(default, env_only);
    assert_eq!(run_env(&args, Some("many")).status.code(), Some(1));
}

#[test]
fn metrics_reach_the_headline_figures() {
    let o = run(&["metrics", "--input", &fixture(), "--states", "IN", "--years", "2001:2022", "--precision", "6"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = rows(&stdout(&o));
    let last = |locale: &str| {
        table
            .iter()
            .rfind(|r| r["locale"] == locale)
            .unwrap()
            .clone()
    };
    let all = last("all");
    assert_eq!(all["year"], "2022");
    assert!((num(&all, "cum_efficiency") - 0.085).abs() <= 0.002);
    assert!((num(&all, "cum_total_decarb_mt") - 206.2).abs() <= 0.5);
    assert!((num(&last("urban"), "cum_decarb_intensity_kg_per_hh") - 1386.1).abs() <= 1.0);
    assert!((num(&last("urban"), "cum_decarb_kg_per_lakh_inr") - 379.7).abs() <= 1.0);
    assert!((num(&last("rural"), "cum_decarb_kg_per_lakh_inr") - 218.4).abs() <= 1.0);

    let annual = |from: i32, to: i32| -> f64 {
        table
            .iter()
            .filter(|r| r["locale"] == "all")
            .filter(|r| (from..=to).contains(&r["year"].parse::<i32>().unwrap()))
            .map(|r| num(r, "decarb_intensity_kg_per_hh"))
            .sum()
    };
    let share = annual(2012, 2022) / annual(2001, 2022);
    assert!((share - 0.722).abs() <= 0.01, "{share}");
}

#[test]
fn report_charts_have_a_point_per_year() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("charts");
    let o = run(&["report", "--input", &fixture(), "--states", "IN,MH", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        files_in(&out),
        ["contributions.svg", "efficiency.svg", "intensity.svg", "ranking.svg"]
    );
    let svg = fs::read_to_string(out.join("intensity.svg")).unwrap();
    let groups: Vec<&str> = svg.split(r#"<g class="series""#).skip(1).collect();
    assert_eq!(groups.len(), 6);
    for g in groups {
        let body = g.split("</g>").next().unwrap();
        assert_eq!(body.matches(r#"class="point""#).count(), 23);
    }
    let efficiency = fs::read_to_string(out.join("efficiency.svg")).unwrap();
    assert_eq!(efficiency.matches(r#"class="point""#).count(), 6 * 22);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("run{i}"));
        for (cmd, format) in [("report", "svg"), ("report", "csv")] {
            let o = run(&[
                cmd, "--input", &fixture(), "--years", "2005:2015", "--states", "IN,GJ,KL,MH", "--format", format,
                "--out", out.join(format).to_str().unwrap(),
            ]);
            assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        }
        let mut files = Vec::new();
        for format in ["svg", "csv"] {
            for name in files_in(&out.join(format)) {
                files.push((name.clone(), fs::read(out.join(format).join(&name)).unwrap()));
            }
        }
        outputs.push(files);
    }
    assert_eq!(outputs[0].len(), 8);
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn empty_chart_is_an_error_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("charts");
    let o = run(&["report", "--input", &fixture(), "--years", "2022:2022", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(files_in(&out).is_empty());

    // a ranking needs states, not just the national aggregate
    let o = run(&["report", "--input", &fixture(), "--states", "IN", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("nothing to chart"));
    assert!(files_in(&out).is_empty());
}

#[test]
fn malformed_inputs_exit_1_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("missing_column.csv", vec![], "households"),
        ("duplicate_key.csv", vec![], "duplicate key"),
        ("non_numeric.csv", vec![], "fan_hours"),
        ("urban_only.csv", vec!["--years", "1995:2010"], "extrapolate"),
    ];
    for (file, extra, needle) in cases {
        let out = dir.path().join(file);
        let input = corpus(file);
        let mut args = vec!["model", "--input", &input];
        args.extend(extra.iter().copied());
        let out_arg = out.to_str().unwrap().to_string();
        args.extend(["--out", &out_arg]);
        let o = run(&args);
        assert_eq!(o.status.code(), Some(1), "{file}: {}", stderr(&o));
        assert!(stderr(&o).contains(needle), "{file}: {}", stderr(&o));
        assert!(files_in(&out).is_empty(), "{file} left files");
    }
    // every bad cell is reported, not just the first
    let o = run(&["validate", "--input", &corpus("non_numeric.csv")]);
    assert!(stderr(&o).contains("fan_hours") && stderr(&o).contains("nsdp_inr"));
}

#[test]
fn bad_arguments_exit_1() {
    let f = fixture();
    for args in [
        vec!["model", "--input", &f, "--states", "ZZ"],
        vec!["model", "--input", &f, "--years", "2010:2001"],
        vec!["model", "--input", &f, "--bogus"],
        vec!["decompose", "--input", &f, "--factors", "p,n,e"],
        vec!["decompose", "--input", &f, "--factors", "p,n,e,k,x"],
        vec!["decompose", "--input", &f, "--segments", "0"],
        vec!["metrics", "--input", &f, "--years", "2000:2005"],
        // several charts need a directory
        vec!["report", "--input", &f, "--states", "IN,GJ"],
        vec!["model", "--input", &f, "--precision", "x"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
    }
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn io_failures_exit_3() {
    let o = run(&["model", "--input", "/nonexistent/panel.csv"]);
    assert_eq!(o.status.code(), Some(3));

    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "not a directory").unwrap();
    let out = blocker.join("out");
    let o = run(&["model", "--input", &fixture(), "--states", "IN", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn validate_reports_clean_fixture_and_breaches() {
    let o = run(&["validate", "--input", &fixture()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "severity,key,message\n");

    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(corpus("urban_only.csv")).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    // population below households, and 9000 fan hours
    lines[3] = lines[3].replacen(",4600000,1000000,", ",900000,1000000,", 1);
    lines[4] = lines[4].replacen(",2450,", ",9000,", 1);
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, lines.join("\n")).unwrap();
    let out = dir.path().join("out");
    let o = run(&["validate", "--input", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let errors: Vec<_> = rows(&stdout(&o)).into_iter().filter(|r| r["severity"] == "error").collect();
    assert_eq!(errors.len(), 2);
    assert_eq!(errors[0]["key"], "AA/2000/urban");
    assert!(errors[0]["message"].contains("population"));
    assert_eq!(errors[1]["key"], "AA/2005/urban");
    assert!(errors[1]["message"].contains("8784"));
    assert!(files_in(&out).is_empty());
}
