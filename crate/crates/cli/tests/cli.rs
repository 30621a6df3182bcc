mod common;

use common::{cmd, firstint, json, Fixtures, IDENTITY_KT};
use firstint::catalog::list_catalog;

// One test per exit code.

#[test]
fn exit_0_on_a_passing_candidate() {
    let f = Fixtures::new();
    let r = firstint(&[
        "check-conditions",
        "--system",
        "beta-system",
        "--candidate",
        &f.arg("beta-qfi.toml"),
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = json(&r);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["overall"], "pass");
    assert_eq!(v["oracle"], "ExactZero");
}

#[test]
fn exit_1_on_a_failing_candidate() {
    let f = Fixtures::new();
    let r = firstint(&[
        "check-conditions",
        "--system",
        "beta-system",
        "--candidate",
        &f.arg("identity.toml"),
    ]);
    assert_eq!(r.code, 1, "{}", r.stderr);
    let v = json(&r);
    assert_eq!(v["overall"], "fail");
    let kt = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["id"] == "kt[N=0]")
        .unwrap();
    assert_eq!(kt["verdict"], "NonZero");
    assert!(kt["witness"]["point"]["u"].is_f64());
}

#[test]
fn exit_2_on_bad_input() {
    let f = Fixtures::new();
    assert_eq!(firstint(&["show", "--system", "no-such-system"]).code, 2);
    assert_eq!(
        firstint(&["show", "--system", "beta-system", "--param", "gamma=1"]).code,
        2
    );
    assert_eq!(
        firstint(&["show", "--system", "beta-system", "--param", "beta=0"]).code,
        2
    );
    assert_eq!(firstint(&["frobnicate"]).code, 2);
    std::fs::write(f.path("bad.toml"), "[system]\nname = 1\n").unwrap();
    assert_eq!(firstint(&["classify", "--system", &f.arg("bad.toml")]).code, 2);
    // A component index outside the dimension.
    std::fs::write(f.path("wide.toml"), IDENTITY_KT.replace("2,2", "3,3")).unwrap();
    assert_eq!(
        firstint(&[
            "check-conditions",
            "--system",
            "beta-system",
            "--candidate",
            &f.arg("wide.toml")
        ])
        .code,
        2
    );
    assert_eq!(
        firstint(&["verify-fi", "--system", "beta-system", "--ic", "1,2,3"]).code,
        2
    );
}

#[test]
fn exit_3_on_early_singularity() {
    // The line ky + px = 0 is reached at t ≈ 0.864, before a tenth of the span.
    let r = firstint(&[
        "verify-fi",
        "--system",
        "coupled-oscillators-nr",
        "--ic",
        "1,0.5,0.1,-0.2",
        "--t-end",
        "20",
    ]);
    assert_eq!(r.code, 3, "{}", r.stderr);
    assert!(r.stderr.contains("numeric failure"), "{}", r.stderr);
}

#[test]
fn empty_candidate_passes_vacuously() {
    let f = Fixtures::new();
    let r = firstint(&[
        "check-conditions",
        "--system",
        "beta-system",
        "--candidate",
        &f.arg("empty.toml"),
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
}

#[test]
fn verify_fi_examples() {
    let r = firstint(&["verify-fi", "--system", "evans-e3"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    let v = json(&r);
    let ints = v["integrals"].as_array().unwrap();
    assert_eq!(ints.len(), 5);
    assert!(ints.iter().all(|i| i["within_tolerance"] == true));

    let r = firstint(&["verify-fi", "--system", "gravel-cubic", "--param", "k1=0"]);
    assert_eq!(r.code, 0, "{}", r.stdout);

    // Negative control.
    let f = Fixtures::new();
    let r = firstint(&["verify-fi", "--system", &f.arg("harmonic.toml"), "--fi", "P=x_dot"]);
    assert_eq!(r.code, 1, "{}", r.stdout);
    let v = json(&r);
    let p = v["integrals"]
        .as_array()
        .unwrap()
        .iter()
        .find(|i| i["name"] == "P")
        .unwrap();
    assert_eq!(p["within_tolerance"], false);
}

#[test]
fn verify_fi_writes_the_csv() {
    let f = Fixtures::new();
    let csv = f.path("run.csv");
    let r = firstint(&[
        "verify-fi",
        "--system",
        &f.arg("harmonic.toml"),
        "--csv",
        &csv.display().to_string(),
    ]);
    assert_eq!(r.code, 0);
    let text = std::fs::read_to_string(csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,q1,q2,v1,v2,E,L"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), json(&r)["samples"].as_u64().unwrap() as usize);
    let last = rows.last().unwrap();
    assert_eq!(last[0], 3.0);
    // x = cos t, y = sin t.
    assert!((last[1] - 3f64.cos()).abs() < 1e-8);
    assert!((last[2] - 3f64.sin()).abs() < 1e-8);
}

#[test]
fn simulate_writes_the_declared_header() {
    let r = firstint(&[
        "simulate",
        "--system",
        "beta-system",
        "--format",
        "csv",
        "--t-end",
        "0.5",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.stdout.lines().next(), Some("t,q1,q2,v1,v2,I"));
}

#[test]
fn geometry_examples() {
    let r = firstint(&["classify", "--system", "coupled-oscillators-nr"]);
    assert_eq!(r.code, 0);
    let v = json(&r);
    assert_eq!(v["classification"], "NonRiemannian");
    assert!(v["detail"]["witness"]["x"].is_f64());

    let r = firstint(&["find-kt", "--system", "beta-system", "--order", "1", "--degree", "2"]);
    assert_eq!(r.code, 0);
    let v = json(&r);
    assert_eq!(v["dimension"], 0);
    assert!(v["message"]
        .as_str()
        .unwrap()
        .starts_with("no generalized Killing vectors"));

    let f = Fixtures::new();
    let r = firstint(&["curvature", "--system", &f.arg("flat.toml")]);
    assert_eq!(r.code, 0);
    assert_eq!(json(&r)["message"], "all components zero");

    let r = firstint(&[
        "find-kt",
        "--system",
        &f.arg("flat.toml"),
        "--order",
        "1",
        "--degree",
        "1",
    ]);
    assert_eq!(json(&r)["dimension"], 3);
}

#[test]
fn reports_are_deterministic() {
    let f = Fixtures::new();
    let beta = f.arg("identity.toml");
    let args = [
        "check-conditions",
        "--system",
        "beta-system",
        "--candidate",
        &beta,
        "--seed",
        "7",
    ];
    let a = firstint(&args);
    let b = firstint(&args);
    let mut seq = args.to_vec();
    seq.push("--sequential");
    let c = firstint(&seq);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn catalog_round_trips_through_show() {
    let f = Fixtures::new();
    for name in list_catalog() {
        let file = f.path(&format!("{name}.toml"));
        let file_arg = file.display().to_string();
        let r = firstint(&["show", "--system", name, "--out", &file_arg]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        let again = firstint(&["show", "--system", &file_arg]);
        assert_eq!(again.stdout, std::fs::read_to_string(&file).unwrap(), "{name}");
        for sub in ["verify-fi", "curvature"] {
            let a = firstint(&[sub, "--system", name]);
            let b = firstint(&[sub, "--system", &file_arg]);
            assert_eq!(a.code, b.code, "{sub} {name}");
            assert_eq!(a.stdout, b.stdout, "{sub} {name}");
        }
    }
}

#[test]
fn config_dir_resolves_relative_paths() {
    let f = Fixtures::new();
    let elsewhere = tempfile::tempdir().unwrap();
    let run = |with_env: bool| {
        let mut c = cmd();
        c.current_dir(elsewhere.path())
            .args(["classify", "--system", "harmonic.toml"]);
        if with_env {
            c.env("FIRSTINT_CONFIG_DIR", f.root());
        }
        c.output().unwrap().status.code().unwrap()
    };
    assert_eq!(run(false), 2);
    assert_eq!(run(true), 0);
}
