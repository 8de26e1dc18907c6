#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

pub fn mockrec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mockrec")).args(args).output().expect("run mockrec")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn digest(path: &Path) -> String {
    hex::encode(Sha256::digest(fs::read(path).expect("read for digest")))
}

pub fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 path")
}

/// Generates the web-store fixture under `dir/shop` and returns the project path.
pub fn fixture(dir: &Path) -> PathBuf {
    let out_dir = dir.join("shop");
    let out = mockrec(&["fixture-webstore", p(&out_dir)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    out_dir.join("webstore.mrp")
}

/// Parses `key=value` pairs of a report line.
pub fn field(line: &str, key: &str) -> String {
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("{key} missing in {line:?}"))
        .to_string()
}
