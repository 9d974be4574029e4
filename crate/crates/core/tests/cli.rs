use std::fs;
use std::path::Path;

use epimine::cli::run;

fn epimine(args: &[&str]) -> i32 {
    run(std::iter::once("epimine").chain(args.iter().copied()))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn simulate_into(dir: &Path) {
    let code = epimine(&["simulate", "--preset", "example1", "--duration", "5", "--seed", "7", "-o", p(dir)]);
    assert_eq!(code, 0);
}

#[test]
fn simulate_writes_events_network_and_config() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sim");
    simulate_into(&out);
    let events = fs::read_to_string(out.join("events.csv")).unwrap();
    assert!(events.starts_with("# schema: epimine-events/1"));
    let n = events.lines().count() - 1;
    assert!(n > 2000 && n < 4000, "{n}");
    let net: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("network.json")).unwrap()).unwrap();
    assert!(net["synapses"].as_array().unwrap().len() > 200);
    let cfg: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(cfg["schema"], "epimine-config/1");
    assert_eq!(cfg["verb"], "simulate");
    assert_eq!(cfg["sim"]["seed"], 7);
}

#[test]
fn pattern_files_load() {
    let tmp = tempfile::tempdir().unwrap();
    let fig = concat!(env!("CARGO_MANIFEST_DIR"), "/../../patterns/fig1b.json");
    let out = tmp.path().join("o");
    let code = epimine(&["simulate", "--neurons", "26", "--duration", "2", "--pattern", fig, "--seed", "7", "-o", p(&out)]);
    assert_eq!(code, 0);
    let cfg: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(cfg["patterns"][0]["kind"], "order");
    assert_eq!(epimine(&["simulate", "--pattern", "no-such-thing", "-o", p(&out)]), 1);
}

#[test]
fn rerun_from_resolved_config_is_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let sim = tmp.path().join("sim");
    simulate_into(&sim);
    let sim2 = tmp.path().join("sim2");
    assert_eq!(epimine(&["simulate", "--config", p(&sim.join("config.json")), "-o", p(&sim2)]), 0);
    for f in ["events.csv", "network.json", "config.json"] {
        assert_eq!(fs::read(sim.join(f)).unwrap(), fs::read(sim2.join(f)).unwrap(), "{f}");
    }

    let events = sim.join("events.csv");
    let a = tmp.path().join("a");
    let code = epimine(&["mine-serial", p(&events), "--intervals", "0.004:0.006", "--threshold", "0.01", "--raster", "-o", p(&a)]);
    assert_eq!(code, 0);
    let b = tmp.path().join("b");
    assert_eq!(epimine(&["mine-serial", "--config", p(&a.join("config.json")), "-o", p(&b)]), 0);
    for f in ["episodes.json", "raster.csv", "raster_episodes.csv", "config.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let raster = fs::read_to_string(a.join("raster.csv")).unwrap();
    assert!(raster.starts_with("# schema: epimine-raster/1\ntime,neuron_id,episode_id,occurrence_id\n"));
}

#[test]
fn mining_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let sim = tmp.path().join("sim");
    simulate_into(&sim);
    let events = sim.join("events.csv");

    let par = tmp.path().join("par");
    assert_eq!(epimine(&["mine-parallel", p(&events), "--expiry", "0.002", "--min-count", "40", "-o", p(&par)]), 0);
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(par.join("episodes.json")).unwrap()).unwrap();
    assert_eq!(doc["schema"], "epimine-results/1");
    assert_eq!(doc["threshold"], 40);

    let ser = tmp.path().join("ser");
    let code = epimine(&["mine-serial", p(&events), "--intervals", "0.004:0.006", "--intervals", "0.002:0.004", "--threshold", "0.01", "--confidence", "-o", p(&ser)]);
    assert_eq!(code, 0);
    let conf = fs::read_to_string(ser.join("confidence.csv")).unwrap();
    assert!(conf.starts_with("# schema: epimine-confidence/1"));
    assert!(conf.lines().count() > 2);

    let syn = tmp.path().join("syn");
    let code = epimine(&["mine-synfire", p(&events), "--expiry", "0.001", "--intervals", "0.004:0.006", "--raster", "-o", p(&syn)]);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(syn.join("synfire.json")).unwrap()).unwrap();
    assert_eq!(doc["schema"], "epimine-synfire/1");
    assert!(syn.join("substituted.csv").exists());
}

#[test]
fn usage_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");
    let o = p(&out);
    assert_eq!(epimine(&["mine-parallel", "e.csv", "--expiry", "-1", "-o", o]), 2);
    assert_eq!(epimine(&["mine-parallel", "e.csv", "-o", o]), 2);
    assert_eq!(epimine(&["mine-parallel", "e.csv", "--expiry", "0.1", "--threshold", "0.1", "--min-count", "3"]), 2);
    assert_eq!(epimine(&["mine-serial", "e.csv", "--intervals", "0.006:0.004"]), 2);
    assert_eq!(epimine(&["mine-serial", "e.csv"]), 2);
    assert_eq!(epimine(&["mine-serial", "e.csv", "--intervals", "0:1", "--bogus"]), 2);
    assert_eq!(epimine(&["frobnicate"]), 2);
    assert_eq!(epimine(&["simulate", "--preset", "nope", "-o", o]), 2);
    assert_eq!(epimine(&["--jobs", "0", "simulate", "-o", o]), 2);
    // missing input file is a runtime failure
    assert_eq!(epimine(&["mine-serial", "/no/such/file.csv", "--intervals", "0:1"]), 1);
    assert_eq!(epimine(&["--help"]), 0);
}

#[test]
fn significance_and_similarity() {
    let tmp = tempfile::tempdir().unwrap();
    let sig = tmp.path().join("sig");
    let code = epimine(&[
        "--jobs", "2", "significance", "--nulls", "2", "--pattern-datasets", "1", "--duration", "4", "--max-size", "4",
        "--observed", "3:300", "-o", p(&sig),
    ]);
    assert_eq!(code, 0);
    let csv = fs::read_to_string(sig.join("null_stats.csv")).unwrap();
    assert!(csv.starts_with("# schema: epimine-stats/1\nsize,avg,max,min,sample_size\n"));
    assert_eq!(csv.lines().count(), 6);
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(sig.join("stats.json")).unwrap()).unwrap();
    assert_eq!(doc["p_values"][0]["exceedances"], 0);
    assert!(sig.join("pattern_stats.csv").exists());
    assert!(sig.join("thresholds.csv").exists());

    let dir = tmp.path();
    fs::write(dir.join("a.json"), r#"{"episodes": [["A","B","C"]]}"#).unwrap();
    fs::write(dir.join("b.json"), r#"{"episodes": [["B","C","D"]]}"#).unwrap();
    fs::write(dir.join("m.json"), r#"[{"label": "a", "path": "a.json"}, {"label": "b", "path": "b.json"}]"#).unwrap();
    let out = dir.join("simout");
    assert_eq!(epimine(&["similarity", p(&dir.join("m.json")), "-o", p(&out)]), 0);
    let m = fs::read_to_string(out.join("similarity.csv")).unwrap();
    assert_eq!(m, "# schema: epimine-similarity/1\nlabel,a,b\na,8,4\nb,4,8\n");
    let order = fs::read_to_string(out.join("ordering.csv")).unwrap();
    assert!(order.contains("0,1,a"));
}
