use std::path::Path;
use std::process::{Command, Output};

fn tripartite(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tripartite")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value(text: &str, key: &str) -> f64 {
    let prefix = format!("{key}=");
    text.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no {key}= line in\n{text}"))
        .parse()
        .unwrap()
}

#[test]
fn measure_named_states() {
    let ghz = tripartite(&["measure", "--named", "ghz"]);
    assert!(ghz.status.success());
    let text = stdout(&ghz);
    assert_eq!(value(&text, "tau"), 1.0);
    assert_eq!(value(&text, "sigma"), 1.0);

    let w = stdout(&tripartite(&["measure", "--named", "w"]));
    assert!(value(&w, "tau").abs() <= 1e-9);
    assert!((value(&w, "sigma") - 4.0 / 9.0).abs() <= 1e-8);
}

#[test]
fn measure_canonical_ghz_parameters_reports_delta() {
    let o = tripartite(&["measure", "--canonical", "0.5,0,0,0,0.5", "--phi", "0"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(value(&text, "tau"), 1.0);
    assert_eq!(value(&text, "delta"), 0.0);
}

#[test]
fn malformed_input_exits_with_input_code() {
    assert_eq!(tripartite(&["measure", "--amplitudes", "1,1,0,0,0,0,0,0"]).status.code(), Some(2));
    assert_eq!(tripartite(&["measure", "--canonical", "0.5,0.5"]).status.code(), Some(2));
    assert_eq!(tripartite(&["measure", "--named", "ghz", "--spinor", "1,2,3"]).status.code(), Some(2));
    assert_eq!(tripartite(&["bell", "--named", "ghz", "--restarts", "0"]).status.code(), Some(2));
}

#[test]
fn bell_verdicts() {
    let ghz = stdout(&tripartite(&["bell", "--named", "ghz", "--mode", "mermin"]));
    assert!((value(&ghz, "value") - 4.0).abs() <= 1e-6);
    assert!(ghz.contains("violated=true") && ghz.contains(": violated"));

    let w = stdout(&tripartite(&["bell", "--named", "w", "--mode", "svetlichny"]));
    assert!((value(&w, "value") - 4.35).abs() <= 0.01);
    assert!(w.contains("violated=true"));

    let product = stdout(&tripartite(&["bell", "--named", "product", "--mode", "mermin"]));
    assert!((value(&product, "value") - 2.0).abs() <= 1e-6);
    assert_eq!(value(&product, "threshold"), 2.0);
    assert!(product.contains("violated=false") && product.contains("not violated"));
}

fn sweep_to(path: &Path, jobs: &str) {
    let o = tripartite(&[
        "sweep", "--family", "spinor3", "--samples", "6", "--seed", "11", "--restarts", "4", "--jobs", jobs, "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn sweep_is_byte_identical_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let (first, second) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    sweep_to(&first, "1");
    sweep_to(&second, "3");
    let a = std::fs::read(&first).unwrap();
    assert_eq!(a, std::fs::read(&second).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("state_id,family,p1,p2,p3,p4,p5,p6,tau,sigma,m_mermin,m_svet,"));
    assert_eq!(text.lines().count(), 7);

    let check = tripartite(&["bounds-check", first.to_str().unwrap()]);
    assert_eq!(check.status.code(), Some(0));
    assert_eq!(value(&stdout(&check), "violations"), 0.0);
}

const HEADER: &str = "state_id,family,p1,p2,p3,p4,p5,p6,tau,sigma,m_mermin,m_svet,tau_ok_mermin,sigma_ok_mermin,tau_ok_svet,sigma_ok_svet\n";

#[test]
fn bounds_check_flags_planted_violation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("planted.csv");
    // τ = 0.9 with M_M = 2 sits far above the Mermin upper bound 0.25
    std::fs::write(&path, format!("{HEADER}0,spinor3,1,1,1,,,,0.9,0.95,2,4,true,true,true,true\n")).unwrap();
    let o = tripartite(&["bounds-check", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let text = stdout(&o);
    assert_eq!(value(&text, "violations"), 1.0);
    assert!(text.contains("confirmed violations: 1 [0]"));
}

#[test]
fn bounds_check_on_empty_data_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    std::fs::write(&path, HEADER).unwrap();
    let o = tripartite(&["bounds-check", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("records 0"));
}

#[test]
fn bounds_check_rejects_malformed_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "not,a,sweep\n1,2,3\n").unwrap();
    assert_eq!(tripartite(&["bounds-check", path.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(tripartite(&["bounds-check", dir.path().join("missing.csv").to_str().unwrap()]).status.code(), Some(1));
}

fn last_point(file: &Path) -> (f64, f64) {
    let text = std::fs::read_to_string(file).unwrap();
    let line = text.lines().filter(|l| !l.starts_with('#')).last().unwrap();
    let mut it = line.split_whitespace().map(|x| x.parse::<f64>().unwrap());
    (it.next().unwrap(), it.next().unwrap())
}

#[test]
fn figure_data_files_and_anchors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig");
    let o = tripartite(&[
        "figure-data", "--family", "canonical5", "--samples", "4", "--restarts", "4", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in tripartite::sweep::FIGURE_FILES.iter().chain(&["sweep.csv"]) {
        assert!(out.join(name).exists(), "{name} missing");
    }
    let (x, y) = last_point(&out.join("bound_svetlichny_upper.dat"));
    assert!((x - 4.0 * 2f64.sqrt()).abs() <= 1e-8 && (y - 1.0).abs() <= 1e-8);

    let scatter = std::fs::read_to_string(out.join("mm_tau.dat")).unwrap();
    let ghz = scatter.lines().skip_while(|l| *l != "# anchor ghz").nth(1).unwrap();
    let xy: Vec<f64> = ghz.split_whitespace().map(|v| v.parse().unwrap()).collect();
    assert!((xy[0] - 4.0).abs() <= 1e-6 && (xy[1] - 1.0).abs() <= 1e-9);
    assert!(scatter.contains("# anchor w"));
}
