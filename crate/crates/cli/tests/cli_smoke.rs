//! Drive the binary end to end through temp files.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_conbound"))
}

#[test]
fn generate_bounds_allocate_evaluate_flow() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net.txt");

    let out = bin()
        .args(["gen-network", "--n", "12", "--m", "2", "--remove", "0.2", "--seed", "7"])
        .arg("--out")
        .arg(&net)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(net.exists());

    let out = bin().arg("centrality").arg("--net").arg(&net).output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("agent,nu"));
    assert_eq!(stdout.lines().count(), 13);

    let x0 = dir.path().join("x0.txt");
    let values: Vec<String> = (0..12).map(|i| format!("0.{}", 15 + 5 * i)).collect();
    std::fs::write(&x0, values.join("\n") + "\n").unwrap();

    let out = bin()
        .args(["bounds", "--wlow", "0.03", "--whigh", "0.25"])
        .arg("--net")
        .arg(&net)
        .arg("--x0")
        .arg(&x0)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("alpha_min,alpha_max,gap,conservative_gap"));

    let plan = dir.path().join("plan.csv");
    let out = bin()
        .args(["allocate", "--d", "1", "--umax", "0.2", "--nb", "3", "--strategy", "cor1"])
        .args(["--wlow", "0.03", "--whigh", "0.25"])
        .arg("--net")
        .arg(&net)
        .arg("--x0")
        .arg(&x0)
        .arg("--out")
        .arg(&plan)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let plan_text = std::fs::read_to_string(&plan).unwrap();
    assert!(plan_text.starts_with("agent,u"));
    assert!(plan_text.contains("# predicted_bound"));

    let out = bin()
        .args(["evaluate", "--d", "1", "--trials", "5", "--seed", "3"])
        .args(["--wlow", "0.03", "--whigh", "0.25"])
        .arg("--net")
        .arg(&net)
        .arg("--x0")
        .arg(&x0)
        .arg("--plan")
        .arg(&plan)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("predicted_bound,alpha_min,alpha_max"));
}

#[test]
fn scenario_command_writes_campaign_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = bin()
        .args(["scenario1", "--trials", "5", "--seed", "11"])
        .arg("--out-dir")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("trials.csv").exists());
    assert!(out_dir.join("summary.csv").exists());
    assert!(out_dir.join("config.txt").exists());
    let summary = String::from_utf8(out.stdout).unwrap();
    assert!(summary.contains("mean_gap"));
}

#[test]
fn scenario_accepts_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.txt");
    std::fs::write(
        &cfg,
        "scenario = 2\ntrials = 4\nseed = 9\nn_min = 8\nn_max = 12\ngamma = uniform\n",
    )
    .unwrap();
    let out_dir = dir.path().join("run");
    let out = bin()
        .args(["scenario2"])
        .arg("--config")
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let trials = std::fs::read_to_string(out_dir.join("trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 5); // header + 4 trials
}

#[test]
fn bad_inputs_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("broken.txt");
    std::fs::write(&net, "n 2\n0 1 1.5\n1 0 1\n").unwrap();
    let out = bin().arg("centrality").arg("--net").arg(&net).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("outside [0, 1]"), "stderr: {err}");
}
