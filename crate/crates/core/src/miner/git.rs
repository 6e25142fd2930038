use std::path::Path;
use std::process::Command;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GitError {
    #[error("failed to run git: {0}")]
    Spawn(#[from] std::io::Error),
    #[error("git {command} failed: {stderr}")]
    Failed { command: String, stderr: String },
}

pub(crate) fn run_git(repo: &Path, args: &[&str]) -> Result<Vec<u8>, GitError> {
    let output = Command::new("git")
        .arg("-C")
        .arg(repo)
        .args(["-c", "core.quotepath=off"])
        .args(args)
        .output()?;
    if !output.status.success() {
        return Err(GitError::Failed {
            command: args.first().copied().unwrap_or_default().to_string(),
            stderr: String::from_utf8_lossy(&output.stderr).trim().to_string(),
        });
    }
    Ok(output.stdout)
}

/// Produces the name-status log consumed by
/// [`parse_name_status_log`](super::parse_name_status_log), oldest commit
/// first.
pub fn git_name_status_log(repo: &Path) -> Result<String, GitError> {
    let out = run_git(
        repo,
        &[
            "log",
            "--reverse",
            "--no-color",
            "--name-status",
            "-M",
            "--diff-filter=ADMR",
            "--format=commit %H",
        ],
    )?;
    Ok(String::from_utf8_lossy(&out).into_owned())
}
