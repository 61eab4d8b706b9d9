use orlicz::config::Settings;
use orlicz::{run_suite, RunReport, SUITES};

fn without_wall_time(mut v: serde_json::Value) -> serde_json::Value {
    match &mut v {
        serde_json::Value::Object(map) => {
            map.remove("wall_time_s");
            for x in map.values_mut() {
                *x = without_wall_time(x.take());
            }
        }
        serde_json::Value::Array(items) => {
            for x in items.iter_mut() {
                *x = without_wall_time(x.take());
            }
        }
        _ => {}
    }
    v
}

fn partition_json(seed: u64) -> serde_json::Value {
    let settings = Settings { seed, points: 256, cases: Some(4), ..Settings::default() };
    let report = RunReport::new("verify", seed, vec![run_suite("partition", &settings).unwrap()]);
    let mut buf = Vec::new();
    report.write_json(&mut buf).unwrap();
    serde_json::from_slice(&buf).unwrap()
}

#[test]
fn json_report_has_the_documented_shape() {
    let v = partition_json(5);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "verify");
    assert_eq!(v["seed"], 5);
    assert_eq!(v["prng"], "ChaCha8");
    assert_eq!(v["pass"], true);
    let suite = &v["suites"][0];
    assert_eq!(suite["suite"], "partition");
    assert!(suite["wall_time_s"].is_number());
    for key in ["settings", "tolerances", "checks", "cases", "aggregate"] {
        assert!(!suite[key].is_null(), "missing {key}");
    }
    let case = &suite["cases"][0];
    assert_eq!(case["digest"].as_str().unwrap().len(), 16);
    assert_eq!(suite["cases"].as_array().unwrap().len(), 8);
}

#[test]
fn reports_are_deterministic_apart_from_timing() {
    assert_eq!(without_wall_time(partition_json(9)), without_wall_time(partition_json(9)));
    assert_ne!(without_wall_time(partition_json(9)), without_wall_time(partition_json(10)));
}

#[test]
fn csv_report_has_one_row_per_case_and_check() {
    let settings = Settings { points: 256, cases: Some(3), ..Settings::default() };
    let suite = run_suite("partition", &settings).unwrap();
    let rows = suite.cases.len() + suite.checks.len();
    let report = RunReport::new("verify", 1, vec![suite]);
    let mut buf = Vec::new();
    report.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "suite,kind,group,index,digest,inputs,lhs,rhs,ratio,margin,pass");
    assert_eq!(lines.count(), rows);
}

#[test]
fn unknown_suites_are_errors() {
    assert!(run_suite("nonsense", &Settings::default()).is_err());
    assert!(SUITES.contains(&"partition"));
}
