use fpp_core::experiments::{self, output, ExperimentConfig, ExperimentKind};

fn config(out: &std::path::Path) -> ExperimentConfig {
    ExperimentConfig::from_value(serde_json::json!({
        "experiment": "variance_scaling",
        "d": 2,
        "law": {"family": "uniform", "lo": 1, "hi": 2},
        "n_values": [4, 8],
        "replications": 100,
        "master_seed": 5,
        "out_path": out.to_string_lossy(),
        "samples": 2000,
        "environments": 5
    }))
    .unwrap()
}

#[test]
fn every_experiment_round_trips_through_csv() {
    let dir = std::env::temp_dir().join(format!("fpp-experiments-{}", std::process::id()));
    let cfg = config(&dir.join("all.csv"));
    let summary = experiments::run_and_write(&cfg, &ExperimentKind::ALL, 2).unwrap();
    let back = output::read_csv(&dir.join("all.csv")).unwrap();
    assert_eq!(back.len(), summary.rows.len());
    for kind in ExperimentKind::ALL {
        assert!(back.iter().any(|r| r.experiment == kind.name()), "{kind} produced no rows");
    }
    assert!(back.iter().all(|r| r.seed == 5));
    assert!(summary.manifest_path.exists());
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn tight_box_is_flagged() {
    let mut cfg = config(std::path::Path::new("unused.csv"));
    cfg.pad_exponent = 0.0;
    cfg.law = fpp_core::EdgeWeightLaw::finite_atomic(vec![0.01, 10.0], vec![0.45, 0.55]).unwrap();
    cfg.n_values = vec![16];
    cfg.replications = 30;
    let rows = experiments::run_experiment(&cfg, ExperimentKind::GeoLength, 1).unwrap();
    assert!(experiments::boundary_flagged(&rows));
    let flag = rows.iter().find(|r| r.statistic == "boundary_flag").unwrap();
    assert_eq!(flag.value, 1.0);
}

#[test]
fn constant_law_geodesics_are_straight() {
    let mut cfg = config(std::path::Path::new("unused.csv"));
    cfg.law = fpp_core::EdgeWeightLaw::uniform(1.0, 1.0 + 1e-9).unwrap();
    let rows = experiments::run_experiment(&cfg, ExperimentKind::GeoLength, 1).unwrap();
    for n in [4, 8] {
        let r = rows.iter().find(|r| r.n == n && r.statistic == "geodesic_length_over_n").unwrap();
        assert_eq!(r.value, 1.0);
    }
}
