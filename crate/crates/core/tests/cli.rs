use std::fs;
use std::path::{Path, PathBuf};

use hedonic_core::cli::main_with_args;
use hedonic_core::io::canonical::digest;
use hedonic_core::io::RunManifest;
use tempfile::TempDir;

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn scenario(name: &str) -> String {
    scenarios_dir().join(name).to_string_lossy().into_owned()
}

fn cli(args: &[&str]) -> i32 {
    main_with_args(std::iter::once("hedonic").chain(args.iter().copied()))
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

fn manifest(dir: &Path) -> RunManifest {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn every_shipped_scenario_validates() {
    let mut count = 0;
    for entry in fs::read_dir(scenarios_dir()).unwrap() {
        let p = entry.unwrap().path();
        let name = p.file_name().unwrap().to_string_lossy().into_owned();
        if name.starts_with("sweep") || p.extension().is_none_or(|e| e != "json") {
            continue;
        }
        assert_eq!(cli(&["validate", "--config", &p.to_string_lossy()]), 0, "{name}");
        count += 1;
    }
    assert!(count >= 5);
}

#[test]
fn horizon_three_gives_four_lines() {
    let out = TempDir::new().unwrap();
    let dir = path(&out, "run");
    assert_eq!(cli(&["simulate", "--config", &scenario("minimal.json"), "--out", &dir]), 0);
    let text = fs::read_to_string(Path::new(&dir).join("run.csv")).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(!text.contains('\r'));
    assert!(text.starts_with(
        "t,capability,capability_effective,frac_potential,frac_active,frac_churned,mean_log_reference,mean_satisfaction,s_q25,s_q75,seg_all_mean_s,interventions_applied\n"
    ));
}

#[test]
fn seed_override_is_recorded() {
    let out = TempDir::new().unwrap();
    let a = path(&out, "a");
    let b = path(&out, "b");
    let config = scenario("intervention_baseline.json");
    assert_eq!(cli(&["simulate", "--config", &config, "--out", &a]), 0);
    assert_eq!(cli(&["simulate", "--config", &config, "--seed", "99", "--out", &b]), 0);
    let (ma, mb) = (manifest(Path::new(&a)), manifest(Path::new(&b)));
    assert_eq!(ma.seed, 55);
    assert_eq!(mb.seed, 99);
    assert_ne!(ma.scenario_digest, mb.scenario_digest);
}

#[test]
fn reruns_are_byte_identical_and_csv_reparses() {
    let out = TempDir::new().unwrap();
    let config = scenario("capability_vs_satisfaction.json");
    let dirs = [path(&out, "one"), path(&out, "two")];
    for d in &dirs {
        assert_eq!(cli(&["simulate", "--config", &config, "--out", d, "--plots"]), 0);
    }
    let (m1, m2) = (manifest(Path::new(&dirs[0])), manifest(Path::new(&dirs[1])));
    assert_eq!(m1.scenario_digest, m2.scenario_digest);
    assert_eq!(m1.files, m2.files);
    for f in m1.files.iter().filter(|f| *f != "manifest.json") {
        let a = fs::read(Path::new(&dirs[0]).join(f)).unwrap();
        let b = fs::read(Path::new(&dirs[1]).join(f)).unwrap();
        assert!(a == b, "{f} differs");
    }
    for f in ["run.csv", "manifest.json", "satisfaction.svg", "segments.svg", "phases.svg"] {
        assert!(m1.files.iter().any(|x| x == f), "{f} not listed");
    }

    let mut reader = csv::Reader::from_path(Path::new(&dirs[0]).join("run.csv")).unwrap();
    let headers = reader.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (p, a, c) = (col("frac_potential"), col("frac_active"), col("frac_churned"));
    let mut rows = 0;
    for record in reader.records() {
        let record = record.unwrap();
        let sum: f64 = [p, a, c].iter().map(|&i| record[i].parse::<f64>().unwrap()).sum();
        assert!((sum - 1.0).abs() < 1e-12);
        rows += 1;
    }
    assert_eq!(rows, 200);
}

#[test]
fn digest_ignores_key_order_and_whitespace() {
    let out = TempDir::new().unwrap();
    let original = fs::read_to_string(scenarios_dir().join("delivery_punctuated.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&original).unwrap();
    // serde_json keeps keys sorted, so a compact re-dump reorders and reflows the document
    let reordered = path(&out, "reordered.json");
    fs::write(&reordered, serde_json::to_string(&value).unwrap()).unwrap();
    let mut changed = value.clone();
    changed["seed"] = serde_json::json!(2025);
    let modified = path(&out, "modified.json");
    fs::write(&modified, serde_json::to_string_pretty(&changed).unwrap()).unwrap();

    let mut digests = Vec::new();
    for (name, config) in [("a", scenario("delivery_punctuated.json")), ("b", reordered), ("c", modified)] {
        let dir = path(&out, name);
        assert_eq!(cli(&["simulate", "--config", &config, "--out", &dir]), 0);
        digests.push(manifest(Path::new(&dir)).scenario_digest);
    }
    assert_eq!(digests[0], digests[1]);
    assert_ne!(digests[0], digests[2]);
    assert_ne!(digest(&value), digest(&changed));
}

#[test]
fn agent_traces_written_on_request() {
    let out = TempDir::new().unwrap();
    let dir = path(&out, "traced");
    assert_eq!(cli(&["simulate", "--config", &scenario("minimal.json"), "--out", &dir, "--agent-traces"]), 0);
    let text = fs::read_to_string(Path::new(&dir).join("agents.csv")).unwrap();
    // header plus 4 agents for 3 steps
    assert_eq!(text.lines().count(), 1 + 12);
    assert!(manifest(Path::new(&dir)).files.contains(&"agents.csv".to_string()));
}

#[test]
fn cadence_table_and_winner() {
    let out = TempDir::new().unwrap();
    let file = path(&out, "cadence.csv");
    let code = cli(&[
        "optimize-cadence",
        "--config",
        &scenario("delivery_punctuated.json"),
        "--budget",
        "3",
        "--intervals",
        "1..50",
        "--out",
        &file,
    ]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(&file).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "interval,objective");
    let rows: Vec<(usize, f64)> = lines[1..]
        .iter()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let (i, o) = l.split_once(',').unwrap();
            (i.parse().unwrap(), o.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 50);
    let best = rows.iter().fold(rows[0], |acc, &r| if r.1 > acc.1 { r } else { acc });
    let winner = lines.last().unwrap();
    assert_eq!(*winner, format!("# winner: interval={} objective={}", best.0, best.1));
}

#[test]
fn sweep_writes_one_row_per_sample() {
    let out = TempDir::new().unwrap();
    let file = path(&out, "sweep.csv");
    let code = cli(&[
        "sweep",
        "--config",
        &scenario("fast_adapters.json"),
        "--sweep",
        &scenario("sweep_gamma.json"),
        "--parallel",
        "3",
        "--out",
        &file,
    ]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(&file).unwrap();
    assert_eq!(text.lines().count(), 65);
    for (i, line) in text.lines().skip(1).enumerate() {
        assert!(line.starts_with(&format!("{i},")));
    }
}

#[test]
fn phases_command_reads_a_column() {
    let out = TempDir::new().unwrap();
    let dir = path(&out, "run");
    assert_eq!(cli(&["simulate", "--config", &scenario("delivery_punctuated.json"), "--out", &dir]), 0);
    let csv = Path::new(&dir).join("run.csv").to_string_lossy().into_owned();
    assert_eq!(cli(&["phases", "--input", &csv, "--column", "mean_satisfaction"]), 0);
    assert_eq!(cli(&["phases", "--input", &csv, "--column", "mean_satisfaction", "--window", "4"]), 3);
    assert_eq!(cli(&["phases", "--input", &csv, "--column", "no_such_column"]), 2);

    let labels = hedonic_core::cli::phases_of_column(Path::new(&csv), "mean_satisfaction", 9).unwrap();
    assert_eq!(labels[0].start, 0);
    assert_eq!(labels.last().unwrap().end, 199);
    for w in labels.windows(2) {
        assert_eq!(w[0].end + 1, w[1].start);
    }
}

#[test]
fn exit_codes() {
    let out = TempDir::new().unwrap();
    let typo = path(&out, "typo.json");
    let text = fs::read_to_string(scenarios_dir().join("minimal.json")).unwrap();
    fs::write(&typo, text.replace("\"schedule\"", "\"scheddule\"")).unwrap();
    assert_eq!(cli(&["validate", "--config", &typo]), 2);

    let bad_fraction = path(&out, "fraction.json");
    fs::write(&bad_fraction, text.replace("\"fraction\": 1.0", "\"fraction\": 0.9")).unwrap();
    assert_eq!(cli(&["validate", "--config", &bad_fraction]), 2);

    assert_eq!(cli(&["validate", "--config", &path(&out, "missing.json")]), 3);
    assert_eq!(cli(&["simulate", "--bogus-flag"]), 2);
    assert_eq!(cli(&["--help"]), 0);

    // output directory blocked by a regular file
    let blocker = path(&out, "blocker");
    fs::write(&blocker, "").unwrap();
    let nested = format!("{blocker}/run");
    assert_eq!(cli(&["simulate", "--config", &scenario("minimal.json"), "--out", &nested]), 3);

    // a budget yielding zero releases is a configuration problem
    let file = path(&out, "c.csv");
    assert_eq!(
        cli(&["optimize-cadence", "--config", &scenario("minimal.json"), "--budget", "1", "--intervals", "1,3", "--out", &file]),
        2
    );
}
