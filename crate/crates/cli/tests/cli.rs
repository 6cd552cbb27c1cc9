use std::process::{Command, Output};

fn hament(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hament"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn subgraph_entropy_row() {
    let o = hament(&["entropy", "subgraph", "--d", "3", "--q", "2", "--L", "2", "--k0", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("d,q,subsystem,fermi_sea,method,S,unit"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let s: f64 = row[5].parse().unwrap();
    assert!((s - std::f64::consts::LN_2).abs() < 1e-11);
    assert_eq!(row[4], "subgraph");
}

#[test]
fn json_output_schema() {
    let o = hament(&["entropy", "neighborhood", "--d", "3", "--q", "2", "--i", "1", "--se", "0", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["entropy_nats"].as_f64().unwrap() - 0.661563).abs() < 1e-6);
    assert_eq!(v["metadata"]["method"], "neighborhood");
    let spectrum = v["spectrum"].as_array().unwrap();
    assert_eq!(spectrum.len(), 2);
    assert_eq!(spectrum[0]["degeneracy"], "2");
    assert!((spectrum[1]["lambda"].as_f64().unwrap() - 0.375).abs() < 1e-12);
    assert_eq!(spectrum[1]["log10_degeneracy"].as_f64(), Some(0.0));
}

#[test]
fn huge_degeneracies_are_logged() {
    let o = hament(&["entropy", "ball", "--d", "80", "--q", "2", "--N", "20", "--k0", "40", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["metadata"]["method"], "heun");
    let spectrum = v["spectrum"].as_array().unwrap();
    assert!(spectrum.iter().any(|e| e["degeneracy"].is_null() && e["log10_degeneracy"].as_f64().unwrap() > 18.0));
}

#[test]
fn heun_and_direct_agree_through_the_cli() {
    let s = |method: &str| -> f64 {
        let o = hament(&["entropy", "ball", "--d", "9", "--q", "3", "--N", "4", "--k0", "5", "--method", method]);
        assert_eq!(o.status.code(), Some(0));
        stdout(&o).lines().nth(1).unwrap().split(',').nth(5).unwrap().parse().unwrap()
    };
    let (a, b) = (s("heun"), s("direct"));
    assert!((a - b).abs() < 1e-9 * a);
}

#[test]
fn couplings_pick_the_fermi_sea() {
    let o = hament(&["entropy", "subgraph", "--d", "3", "--q", "2", "--L", "2", "--alpha", "0,1,0,0", "--bits"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row = text.lines().nth(1).unwrap();
    assert!(row.contains("\"{0,1}\""), "{row}");
    assert!(row.ends_with(",bits"));
}

#[test]
fn spectrum_table() {
    let o = hament(&["spectrum", "--d", "3", "--q", "2", "--nn", "0,1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().nth(1), Some("0,-3,-3,1,0,true"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn figure_csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = hament(&["figure", "2a", "--q", "2", "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert!(text.starts_with("d,L,L_ratio,k0,S\n8,2,0.25,4,"));
    assert_eq!(text.lines().count(), 1 + 11 * 3);
}

#[test]
fn verify_small_graph() {
    let o = hament(&["verify", "--d", "3", "--q", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("[A,[A,[A,A*]]] = q²[A,A*]"));
}

#[test]
fn exit_codes() {
    // usage errors
    assert_eq!(hament(&["entropy", "ball", "--d", "3"]).status.code(), Some(1));
    assert_eq!(hament(&["entropy", "subgraph", "--d", "3", "--q", "2", "--L", "2"]).status.code(), Some(1));
    assert_eq!(hament(&["entropy", "subgraph", "--d", "3", "--q", "2", "--L", "5", "--k0", "0"]).status.code(), Some(1));
    assert_eq!(hament(&["verify", "--d", "13", "--q", "2"]).status.code(), Some(1));
    assert_eq!(hament(&["verify", "--d", "3", "--q", "2", "--max-dim", "4"]).status.code(), Some(1));
    let o = hament(&["entropy", "ball", "--d", "5", "--q", "2", "--N", "2", "--se", "0,2", "--method", "heun"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(hament(&["--help"]).status.code(), Some(0));
}

#[test]
fn bethe_check_reports_the_winning_convention() {
    let o = hament(&["bethe-check", "--max-M", "2", "--d-max", "4", "--q", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("winning root-count convention: block-dim-minus-one"));
}
