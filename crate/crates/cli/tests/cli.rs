use std::path::PathBuf;
use std::process::Command;

use oiforge_cli::{run_command, EXIT_NEGATIVE, EXIT_OK, EXIT_PRECISION, EXIT_USER};

fn ws(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../workspaces").join(name).to_str().unwrap().to_string()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run_command(std::iter::once("oiforge").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn extend_golden() {
    let (code, out, _) = run(&["extend", &ws("polynomial_ring.ows"), "--element", "t^2", "--denominator", "36"]);
    assert_eq!(code, EXIT_OK);
    let want = "\
ring: Z[t0]
  t0 = t
element = t^2
n = 36
h_2(ns) = 1 mod 2^10
h_3(ns) = 44287 mod 3^10
m = 25
generator = 1/36*(t^2-25)
image of g1 at 2 = 170 mod 2^8
image of g1 at 3 = 4510 mod 3^8
";
    assert_eq!(out, want);
}

#[test]
fn check_discrete_golden() {
    let (code, out, _) = run(&["check-discrete", &ws("sqrt2_ring.ows"), "--degree", "2"]);
    assert_eq!(code, EXIT_NEGATIVE);
    let want = "\
ring: Z[g0, g1, g2]
  g0 = t
  g1 = theta*t-r1
  g2 = 2*theta*r1*t-r2
degree: 2
verdict: violation
witness: 2*g0^2-g1^2-g2
constant: r2-r1^2
relations:
  1 = 1  (integer)
  2*g0^2-g1^2-g2 = r2-r1^2  (non-integer)
";
    assert_eq!(out, want);
}

#[test]
fn no_violation_exits_zero() {
    let (code, out, _) = run(&["check-discrete", &ws("third_ring.ows"), "--degree", "2", "--format", "lines"]);
    assert_eq!(code, EXIT_OK);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("# check-discrete degree=2"));
    assert_eq!(lines.next(), Some(r#"{"degree":"2","verdict":"no_violation_up_to"}"#));
}

#[test]
fn hensel_output_and_failure() {
    let (code, out, _) = run(&["hensel", "--poly", "1,0,-17", "--prime", "2", "--prec", "5"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "root = 9\nmodulus = 2^5 = 32\nresidue roots mod 32: 7, 9, 23, 25\n");
    let (code, _, err) = run(&["hensel", "--poly", "1,0,-2", "--prime", "5", "--prec", "4"]);
    assert_eq!(code, EXIT_NEGATIVE);
    assert!(err.contains("no liftable root"));
    let (code, _, _) = run(&["hensel", "--poly", "1,0,-2", "--prime", "6", "--prec", "4"]);
    assert_eq!(code, EXIT_USER);
}

#[test]
fn user_errors() {
    assert_eq!(run(&["frobnicate"]).0, EXIT_USER);
    assert_eq!(run(&["check-discrete", "/no/such/file.ows"]).0, EXIT_USER);
    let (code, _, err) = run(&["eval", &ws("sqrt2_sequence.ows"), "--expr", "gamma1 / 2", "--at", "3"]);
    assert_eq!(code, EXIT_USER);
    assert!(err.contains("division"), "{err}");
    let (code, _, _) = run(&["extend", &ws("sqrt2_ring.ows"), "--element", "g1", "--denominator", "6"]);
    assert_eq!(code, EXIT_USER);
    assert_eq!(run(&["--jobs", "0", "hensel", "--poly", "1,-2", "--prime", "3", "--prec", "2"]).0, EXIT_USER);
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("check-discrete"));
}

#[test]
fn empty_search_has_only_a_header() {
    let (code, out, _) =
        run(&["dio-search", &ws("sqrt2_rotation.ows"), "--eps", "1/100", "--range", "40", "--format", "lines"]);
    assert_eq!(code, EXIT_NEGATIVE);
    assert_eq!(out, "# dio-search range=40 eps=1/100 targets=30103/100000 solutions=0\n");
}

#[test]
fn three_solutions_render_three_rows_and_a_footer() {
    let (code, out, _) =
        run(&["dio-search", &ws("sqrt2_rotation.ows"), "--eps", "1/100", "--range", "130", "--digits", "10"]);
    assert_eq!(code, EXIT_OK);
    let want = "\
search: y0 in 1..=130, eps = 1/100, targets = 30103/100000
        y0  gamma1               y1
        49  0.2964645562         69
        78  0.3086578651        110
       119  0.2914139223        168
solutions: 3
density: 3/130
max_gap: 41
mean_gap: 35
distinct_gaps: 29, 41
";
    assert_eq!(out, want);
}

#[test]
fn reports_are_byte_identical_across_runs_and_jobs() {
    let args = ["dio-search", &ws("sqrt2_rotation.ows"), "--eps", "1/50", "--range", "3000", "--format", "lines"];
    let a = run(&args).1;
    let b = run(&args).1;
    assert_eq!(a, b);
    let mut with_jobs = vec!["--jobs", "3"];
    with_jobs.extend_from_slice(&args);
    assert_eq!(run(&with_jobs).1, a);
    // lines use the cloud record schema
    let first = a.lines().nth(1).unwrap();
    assert!(first.starts_with(r#"{"y0":""#), "{first}");
}

#[test]
fn identity_scan_with_bridge() {
    let (code, out, _) = run(&["identity-scan", &ws("sqrt2_sequence.ows"), "--verify", "200", "--bridge"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("  u1^2-u2 = 0\n"));
    assert!(out.contains("verified exactly for 1 <= y0 <= 200"));
    assert!(out.contains("scan at degree 2: violation 2*g0^2-g1^2-g2 = r2-r1^2"));
}

#[test]
fn equidist_control_case() {
    let (code, out, _) = run(&["equidist", &ws("integer_rotation.ows"), "--range", "500"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("discrepancy: 1\n"), "{out}");
}

#[test]
fn eval_generalized_polynomial() {
    let (code, out, _) = run(&["eval", &ws("sqrt2_sequence.ows"), "--expr", "gamma1^2 - gamma2", "--at", "5"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "exact: 0\ndecimal: 0\n");
    let (_, out, _) = run(&["eval", &ws("sqrt2_sequence.ows"), "--expr", "frac(sqrt(2)*y0)", "--at", "5"]);
    assert!(out.starts_with("exact: -7+5*theta\ndecimal: 0.07106781186547524400844362104"), "{out}");
}

#[test]
fn cloud_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cloud.jsonl");
    let (code, out, _) =
        run(&["cloud", &ws("sqrt2_sequence.ows"), "--range", "20", "--stride", "5", "--out", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("wrote 4 records"));
    let text = std::fs::read_to_string(&path).unwrap();
    let ys: Vec<String> = text
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["y0"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(ys, ["1", "6", "11", "16"]);
}

#[test]
fn precision_budget_from_environment() {
    let spec = std::env::temp_dir().join(format!("oiforge-cubic-{}.ows", std::process::id()));
    std::fs::write(
        &spec,
        "[field]\nminpoly = 1, 0, 0, -2\nbracket = 1, 2\n[symbols]\nr1 = 1/2\n[sequence]\ng0 = t\ng1 = theta*t - r1\n",
    )
    .unwrap();
    let bin = env!("CARGO_BIN_EXE_oiforge");
    let args = ["eval", spec.to_str().unwrap(), "--expr", "floor(theta*1000000)", "--at", "1"];
    let out = Command::new(bin).args(args).env("OIFORGE_MAX_BITS", "8").output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_PRECISION));
    assert!(String::from_utf8_lossy(&out.stderr).contains("precision exhausted"));
    let out = Command::new(bin).args(args).env_remove("OIFORGE_MAX_BITS").output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
    // 2^(1/3) = 1.2599210498...
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("exact: 1259921\n"));
    let out = Command::new(bin).args(args).env("OIFORGE_MAX_BITS", "lots").output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_USER));
    let _ = std::fs::remove_file(spec);
}
