use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rankstream::harness::{replay, BENCH_HEADER};
use rankstream::text::read_domain;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rankstream"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn aggregate_identical_rankings() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("same.txt");
    std::fs::write(&input, "b a c\nb a c\nb a c\n").unwrap();
    let o = run(&["aggregate", input.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().last(), Some("b a c"));
}

#[test]
fn aggregate_fixture_reaches_optimum() {
    let o = run(&[
        "aggregate",
        data("grades_rankings.txt").to_str().unwrap(),
        "--emit-each",
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "m,lr_cost,pap_cost,winner");
    assert_eq!(lines.len(), 1 + 10 + 2);
    assert!(lines[11].contains("best_cost=1862"), "{}", lines[11]);
}

#[test]
fn aggregate_matches_library_replay() {
    let path = data("grades_rankings.txt");
    let domain = read_domain(std::io::BufReader::new(std::fs::File::open(&path).unwrap())).unwrap();
    let engine = replay(&domain, 5).unwrap();
    let expected = engine
        .current()
        .unwrap()
        .best_labels(engine.table())
        .join(" ");
    let o = run(&["aggregate", path.to_str().unwrap(), "--seed", "5"]);
    assert_eq!(stdout(&o).lines().last(), Some(expected.as_str()));
}

#[test]
fn aggregate_reads_stdin() {
    use std::io::Write;
    use std::process::Stdio;
    let mut child = bin()
        .args(["aggregate", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"x,y\ny x\n")
        .unwrap();
    let o = child.wait_with_output().unwrap();
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 2);
}

#[test]
fn aggregate_malformed_line() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.txt");
    std::fs::write(&input, "a b c\na b\n").unwrap();
    let o = run(&["aggregate", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn generate_is_deterministic_and_parses() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    for out in [&a, &b] {
        let o = run(&[
            "generate",
            "--model",
            "uniform",
            "--n",
            "4",
            "--m",
            "2",
            "--seed",
            "7",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().count(), 2);
    let d = read_domain(text.as_bytes()).unwrap();
    assert_eq!((d.m(), d.universe().real()), (2, 4));
}

#[test]
fn generate_config_errors() {
    let o = run(&["generate", "--model", "mallows", "--n", "4", "--m", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&[
        "generate", "--model", "mallows", "--n", "4", "--m", "2", "--phi", "1.5",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["generate", "--model", "zipf", "--n", "4", "--m", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn evaluate_fixture_with_gpa_candidate() {
    let dir = tempfile::tempdir().unwrap();
    let gpa = dir.path().join("gpa.txt");
    let o = run(&[
        "grades",
        data("grades.csv").to_str().unwrap(),
        "--mode",
        "average",
        "--out",
        gpa.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let o = run(&[
        "evaluate",
        data("grades_rankings.txt").to_str().unwrap(),
        "--candidates",
        "opt,lr",
        "--ranking",
        gpa.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows[0], "candidate,cost,cost_real,alpha");
    assert_eq!(rows[1], "opt,1862,1862,1.000000");
    assert_eq!(rows[2], "lr,1862,1862,1.000000");
    assert_eq!(rows[3], format!("gpa,1924,1924,{:.6}", 1924.0 / 1862.0));
}

#[test]
fn evaluate_oracle_guard() {
    let dir = tempfile::tempdir().unwrap();
    let big = dir.path().join("big.txt");
    let o = run(&[
        "generate",
        "--model",
        "uniform",
        "--n",
        "1025",
        "--m",
        "1",
        "--out",
        big.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let o = run(&["evaluate", big.to_str().unwrap(), "--candidates", "opt"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn bench_grid() {
    let o = bin()
        .args(["bench", "--n", "16", "--m", "30", "--seeds", "3"])
        .env("RANKSTREAM_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success());
    let out = stdout(&o);
    let mut rdr = csv::Reader::from_reader(out.as_bytes());
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        BENCH_HEADER
    );
    let seeds: Vec<String> = rdr.records().map(|r| r.unwrap()[3].to_owned()).collect();
    assert_eq!(seeds, ["0", "1", "2"]);
}

#[test]
fn grades_modes() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("g.csv");
    std::fs::write(&csv, "student,l1,l2\nx,10,20\ny,20,20\n").unwrap();
    let o = run(&["grades", csv.to_str().unwrap()]);
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(lines, ["y x", "x y"]);
    assert!(out.starts_with('#'));

    std::fs::write(&csv, "student,l1,l2\nx,10\n").unwrap();
    assert_eq!(
        run(&["grades", csv.to_str().unwrap()]).status.code(),
        Some(2)
    );
    std::fs::write(&csv, "student,l1\nx,ten\n").unwrap();
    assert_eq!(
        run(&["grades", csv.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn missing_file_is_an_error() {
    let o = run(&["aggregate", "/nonexistent/rankings.txt"]);
    assert_eq!(o.status.code(), Some(2));
}
