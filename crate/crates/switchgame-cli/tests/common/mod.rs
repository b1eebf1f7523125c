#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use switchgame::GameSpec;
use switchgame_io::spec_file::SpecFile;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_switchgame")).args(args).output().expect("binary runs")
}

pub fn run_in(cmd: &str, input: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

pub fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn write_spec(dir: &Path, name: &str, spec: &GameSpec) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(&SpecFile::from(spec)).unwrap()).unwrap();
    path
}
