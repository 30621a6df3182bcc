#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use firstint::catalog::instantiate;
use firstint::conditions::io::candidate_to_toml;

pub const HARMONIC: &str = r#"[system]
name = "harmonic"
dim = 2
coords = ["x", "y"]

[forces]
1 = "x"
2 = "y"

[integrals]
E = "(x_dot^2 + y_dot^2 + x^2 + y^2)/2"
L = "x*y_dot - y*x_dot"

[reference]
ic = [1.0, 0.0, 0.0, 1.0]
t_end = 3.0
"#;

pub const FLAT: &str = r#"[system]
name = "flat"
dim = 2
coords = ["x", "y"]
"#;

pub const IDENTITY_KT: &str = r#"[candidate]
kind = "poly"
m = 2
n = 0

[tensor.0.2]
"1,1" = "1"
"2,2" = "1"
"#;

pub const EMPTY: &str = r#"[candidate]
kind = "poly"
m = 1
n = 0
"#;

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl From<Output> for Run {
    fn from(o: Output) -> Self {
        Run {
            code: o.status.code().expect("exited normally"),
            stdout: String::from_utf8(o.stdout).unwrap(),
            stderr: String::from_utf8(o.stderr).unwrap(),
        }
    }
}

pub fn firstint(args: &[&str]) -> Run {
    cmd().args(args).output().unwrap().into()
}

pub fn cmd() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_firstint"));
    c.env_remove("FIRSTINT_CONFIG_DIR");
    c
}

pub fn json(r: &Run) -> serde_json::Value {
    serde_json::from_str(&r.stdout).unwrap_or_else(|e| panic!("{e}: {}\n{}", r.stdout, r.stderr))
}

/// Scratch directory with the fixture files.
pub struct Fixtures {
    pub dir: tempfile::TempDir,
}

impl Fixtures {
    pub fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let beta = instantiate("beta-system", &BTreeMap::new()).unwrap();
        let files = [
            ("harmonic.toml", HARMONIC.to_string()),
            ("flat.toml", FLAT.to_string()),
            ("identity.toml", IDENTITY_KT.to_string()),
            ("empty.toml", EMPTY.to_string()),
            (
                "beta-qfi.toml",
                candidate_to_toml(&beta.integral("I").unwrap().candidate),
            ),
        ];
        for (name, text) in files {
            std::fs::write(dir.path().join(name), text).unwrap();
        }
        Fixtures { dir }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn arg(&self, name: &str) -> String {
        self.path(name).display().to_string()
    }

    pub fn root(&self) -> &Path {
        self.dir.path()
    }
}
