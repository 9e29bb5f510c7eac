use hbfsim_core::channel::{export_channel, import_channel, parse_channel, write_channel};
use hbfsim_core::harness::{export_trial_channels, run_snr_sweep, ExperimentConfig};
use hbfsim_core::{generate_channel, HbfError, SolverKind, SystemConfig};

fn small() -> ExperimentConfig {
    ExperimentConfig {
        n_t: 16,
        n_r: 4,
        n_trf: 3,
        n_ps: 10,
        n_s: 2,
        paths: 4,
        trials: 4,
        snr_grid: vec![0.0, 10.0],
        ..ExperimentConfig::default()
    }
}

#[test]
fn generated_channel_survives_file_round_trip() {
    let cfg = SystemConfig {
        n_t: 64,
        n_r: 16,
        ..SystemConfig::default()
    };
    let ch = generate_channel(&cfg, 5, 42).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.csv");
    export_channel(&ch.h, &path).unwrap();
    let back = import_channel(&path).unwrap();
    assert_eq!(back.h, ch.h);
    assert!(!back.has_paths());
}

#[test]
fn truncated_file_reports_the_missing_row() {
    let h = hbfsim_core::linalg::CMatrix::identity(3, 2);
    let text = write_channel(&h);
    let cut: String = text.lines().take(3).map(|l| format!("{l}\n")).collect();
    match parse_channel(&cut) {
        Err(HbfError::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("expected parse error, got {other:?}"),
    }
}

#[test]
fn imported_channels_reproduce_generated_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small();
    let files = export_trial_channels(&cfg, dir.path()).unwrap();
    assert_eq!(files.len(), 4);
    let solvers = [SolverKind::ProposedBcd, SolverKind::FullDigital, SolverKind::DsaAltmin];
    let generated = run_snr_sweep(&cfg, &solvers).unwrap();
    let imported = run_snr_sweep(
        &ExperimentConfig {
            channel_dir: Some(dir.path().to_path_buf()),
            ..cfg.clone()
        },
        &solvers,
    )
    .unwrap();
    assert_eq!(generated, imported);
}

#[test]
fn too_few_channel_files_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small();
    export_trial_channels(&ExperimentConfig { trials: 2, ..cfg.clone() }, dir.path()).unwrap();
    let err = run_snr_sweep(
        &ExperimentConfig {
            channel_dir: Some(dir.path().to_path_buf()),
            ..cfg
        },
        &[SolverKind::FullDigital],
    )
    .unwrap_err();
    assert!(matches!(err, HbfError::Config(_)), "{err}");
}
