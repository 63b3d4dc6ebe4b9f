use motion_insight_service::{config_from_env, CONFIG_ENV};

// Kept in its own test binary so the environment change cannot leak into
// other tests.
#[test]
fn config_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    std::fs::write(&path, r#"{"freeze": {"min_freeze_s": 2.0}}"#).unwrap();
    std::env::set_var(CONFIG_ENV, &path);
    let cfg = config_from_env().unwrap().unwrap();
    assert_eq!(cfg.freeze.min_freeze_s, 2.0);
    assert_eq!(cfg.freeze.feet_threshold_m, 0.15);

    std::fs::write(&path, r#"{"freeze": {"min_freeze_s": -1}}"#).unwrap();
    assert!(config_from_env().is_err());

    std::env::remove_var(CONFIG_ENV);
    assert!(config_from_env().unwrap().is_none());
}
