//! The generated C header must exist, declare the exported surface, and
//! compile as C99.

use std::path::PathBuf;
use std::process::Command;

fn header_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("include")
        .join("qlab.h")
}

#[test]
fn header_declares_the_exported_functions() {
    let text = std::fs::read_to_string(header_path()).expect("header generated by build.rs");
    for symbol in [
        "qlab_version",
        "qlab_last_error_message",
        "qlab_physics_default",
        "qlab_step",
        "qlab_reward",
        "qlab_is_terminal",
        "qlab_reset",
        "qlab_dataset_generate",
        "qlab_dataset_load",
        "qlab_dataset_save",
        "qlab_dataset_len",
        "qlab_dataset_get",
        "qlab_dataset_free",
        "qlab_q_load",
        "qlab_q_save",
        "qlab_q_value",
        "qlab_q_greedy_action",
        "qlab_q_free",
        "qlab_policy_greedy",
        "qlab_policy_epsilon_greedy",
        "qlab_policy_push_left",
        "qlab_policy_anti_angle",
        "qlab_policy_action",
        "qlab_policy_free",
        "qlab_model_load",
        "qlab_model_predict",
        "qlab_model_free",
        "qlab_rollout_return",
        "qlab_evaluate_policy",
        "qlab_fit_rollout_iteration",
    ] {
        assert!(text.contains(symbol), "header is missing {symbol}");
    }
}

#[test]
fn header_compiles_as_c99() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping syntax check");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let main_c = dir.path().join("smoke.c");
    std::fs::write(
        &main_c,
        r#"
#include "qlab.h"

int main(void) {
    QlabPhysicsParams physics;
    if (qlab_physics_default(&physics) != QLAB_STATUS_OK) return 1;
    QlabState state = {0.0, 0.0, 0.0, 0.0};
    QlabStepResult result;
    if (qlab_step(&physics, state, 1, &result) != QLAB_STATUS_OK) return 1;
    return result.terminal ? 1 : 0;
}
"#,
    )
    .unwrap();
    let include_dir = header_path().parent().unwrap().to_path_buf();
    let status = Command::new(cc)
        .arg("-std=c99")
        .arg("-fsyntax-only")
        .arg("-I")
        .arg(&include_dir)
        .arg(&main_c)
        .status()
        .expect("run C compiler");
    assert!(status.success(), "header does not compile as C99");
}

fn which_cc() -> Result<&'static str, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc)
            .arg("--version")
            .output()
            .map(|o| o.status.success())
            .unwrap_or(false)
        {
            return Ok(cc);
        }
    }
    Err(())
}
