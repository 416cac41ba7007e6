use super::*;
use serde_json::Value;
use crate::bounds::{gw_wasserstein_bound, GwBoundInput};

fn config(json: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(json).unwrap()
}

fn config_error(json: &str) -> String {
    match ExperimentConfig::from_json(json).and_then(|c| c.validate()) {
        Err(Error::Config(msg)) => msg,
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn kinds_parse_and_print() {
    for kind in ExperimentKind::ALL {
        assert_eq!(kind.name().parse::<ExperimentKind>().unwrap(), kind);
        let json = serde_json::to_string(&kind).unwrap();
        assert_eq!(json, format!("\"{kind}\""));
    }
    assert!("gw".parse::<ExperimentKind>().is_err());
}

#[test]
fn validation_messages_name_the_field() {
    assert!(config_error(r#"{"experiment":"gw-bound","law":"geometric(0.9)","n":10}"#)
        .contains("`seed`"));
    assert!(config_error(
        r#"{"experiment":"gw-dw","law":"geometric(0.9)","n":10,"seed":1,"reps":0}"#
    )
    .contains("`reps`"));
    assert!(config_error(
        r#"{"experiment":"gw-dw","law":"geometric(0.9)","n":10,"seed":1}"#
    )
    .contains("`reps`"));
    assert!(config_error(
        r#"{"experiment":"walk2d","walk":"simple","n_grid":[100,10],"reps":1000,"seed":1}"#
    )
    .contains("ascending"));
    assert!(config_error(r#"{"experiment":"gw-bound","n":10,"seed":1}"#).contains("`law`"));
    assert!(config_error(r#"{"experiment":"gw-bound","law":"gamma(2)","n":10,"seed":1}"#)
        .contains("config"));
    assert!(config_error(r#"{"experiment":"gw-bound","law":"poisson(1)","sed":1}"#)
        .contains("sed"));
    assert!(config_error(
        r#"{"experiment":"gw-bound","law":"poisson(1)","n":3,"n_grid":[3],"seed":1}"#
    )
    .contains("not both"));
}

#[test]
fn gw_bound_rows_equal_bounds_module() {
    let report = run(&config(
        r#"{"experiment":"gw-bound","law":"geometric(0.9)","n":10,"seed":1}"#,
    ))
    .unwrap();
    let law = LawSpec::Geometric(0.9).build().unwrap();
    let b = gw_wasserstein_bound(&GwBoundInput::from_law(&law, 10).unwrap()).unwrap();
    let row = &report.rows[0];
    let col = |name: &str| {
        let i = report.columns.iter().position(|c| c == name).unwrap();
        row[i].as_f64()
    };
    assert_eq!(col("eta"), Some(b.eta));
    assert_eq!(col("c_const"), Some(b.c_const));
    assert_eq!(col("bound"), Some(b.dw_bound));
    assert_eq!(col("eta_upper"), b.eta_upper);
    assert_eq!(col("survival_upper"), b.survival_upper);
    assert_eq!(row[0], Value::from("geometric(0.9)"));
    assert!(report.passed());
}

#[test]
fn critical_law_leaves_simplified_bounds_empty() {
    let report = run(&config(
        r#"{"experiment":"gw-bound","law":"binary(0.5)","n_grid":[1,5],"seed":1}"#,
    ))
    .unwrap();
    let i = report.columns.iter().position(|c| c == "eta_upper").unwrap();
    assert!(report.rows.iter().all(|r| r[i].is_null()));
    let csv = report.to_csv_string().unwrap();
    assert!(csv.lines().nth(1).unwrap().contains(",,"));
}

#[test]
fn rows_follow_schema() {
    let configs = [
        r#"{"experiment":"gw-bound","law":"poisson(0.9)","n_grid":[1,10],"seed":3}"#,
        r#"{"experiment":"gw-couple","law":"geometric(0.9)","n":5,"reps":400,"seed":3}"#,
        r#"{"experiment":"gw-dw","law":"geometric(0.9)","n_grid":[5,80],"reps":400,"seed":3}"#,
        r#"{"experiment":"occupation","chain":{"matrix":[[0.5,0.5],[0.3,0.7]],"start":0},"n":20,"reps":400,"seed":3}"#,
        r#"{"experiment":"walk2d","walk":"lazy(0.2)","n_grid":[10,40],"reps":1000,"seed":3}"#,
        r#"{"experiment":"bounds-sweep","m_points":20,"n_max":100,"seed":3}"#,
    ];
    for json in configs {
        let c = config(json);
        let report = run(&c).unwrap();
        let schema = c.experiment.schema();
        assert_eq!(report.columns.len(), schema.len(), "{json}");
        assert!(!report.rows.is_empty());
        for row in &report.rows {
            assert_eq!(row.len(), schema.len(), "{json}");
        }
        assert!(!report.verdicts.is_empty(), "{json}");
        assert!(report.passed(), "{json}: {:?}", report.failures().collect::<Vec<_>>());
        let text = kind_schema_text(c.experiment);
        for col in &report.columns {
            assert!(text.contains(col.as_str()));
        }
    }
}

#[test]
fn gw_dw_switches_to_spine_below_the_floor() {
    let report = run(&config(
        r#"{"experiment":"gw-dw","law":"geometric(0.9)","n_grid":[5,80],"reps":200,"seed":3}"#,
    ))
    .unwrap();
    let i = report.columns.iter().position(|c| c == "sampler").unwrap();
    assert_eq!(report.rows[0][i], Value::from("direct"));
    assert_eq!(report.rows[1][i], Value::from("spine"));
}

#[test]
fn report_json_round_trips_and_is_deterministic() {
    let json = r#"{"experiment":"gw-couple","law":"geometric(1.05)","n_grid":[5,10],"reps":2000,"seed":17}"#;
    let mut c = config(json);
    let first = run(&c).unwrap().to_json().unwrap();
    let again = run(&c).unwrap().to_json().unwrap();
    assert_eq!(first, again);
    c.threads = 1;
    let serial = run(&c).unwrap().to_json().unwrap();
    c.threads = 3;
    let parallel = run(&c).unwrap().to_json().unwrap();
    assert_eq!(first, serial);
    assert_eq!(serial, parallel);
    let parsed = RunReport::from_json(&first).unwrap();
    assert_eq!(parsed.to_json().unwrap(), first);
    assert!(!first.contains("wall_time"));
    c.timing = true;
    assert!(run(&c).unwrap().wall_time_secs.is_some());
}

#[test]
fn different_seeds_differ() {
    let a = run(&config(
        r#"{"experiment":"occupation","chain":{"matrix":[[0.5,0.5],[0.3,0.7]],"start":0},"n":20,"reps":400,"seed":1}"#,
    ))
    .unwrap();
    let b = run(&config(
        r#"{"experiment":"occupation","chain":{"matrix":[[0.5,0.5],[0.3,0.7]],"start":0},"n":20,"reps":400,"seed":2}"#,
    ))
    .unwrap();
    assert_ne!(a.rows, b.rows);
}

#[test]
fn walk2d_end_to_end() {
    let report = run(&config(
        r#"{"experiment":"walk2d","walk":"simple","n_grid":[1000,10000],"reps":1000,"seed":5}"#,
    ))
    .unwrap();
    let csv = report.to_csv_string().unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("walk,n,reps,mean_r"));
    assert!(report.verdicts[0].check.contains("d_K does not increase"));
    assert_ne!(report.verdicts[0].status, Status::Fail);
    // periodic walk: no return-probability columns
    let i = report.columns.iter().position(|c| c == "p_return").unwrap();
    assert!(report.rows[0][i].is_null());
}

#[test]
fn verify_suite_passes() {
    let report = verify_suite(42).unwrap();
    assert!(
        report.passed(),
        "{:#?}",
        report.failures().collect::<Vec<_>>()
    );
    assert!(report.verdicts.len() > 15);
    assert_eq!(report.rows.len(), report.verdicts.len());
}

#[test]
fn schema_lists_every_kind() {
    let text = schema_text();
    for kind in ExperimentKind::ALL {
        assert!(text.contains(kind.name()));
    }
}
