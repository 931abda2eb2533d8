use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bnmatch"))
}

fn fx(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_with_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn no_arguments_is_a_usage_error() {
    assert_eq!(run(&[]).status.code(), Some(2));
}

#[test]
fn help_exits_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn equiv_reports_both_outcomes() {
    let (g1, g2, g2n) = (fx("g1.nt"), fx("g2.nt"), fx("g2_no_birthday.nt"));
    assert_eq!(run(&["equiv", s(&g1), s(&g2)]).status.code(), Some(1));
    let o = run(&["equiv", s(&g1), s(&g2n)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "M 1 2");
}

#[test]
fn diff_writes_one_addition() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.rdfd");
    let o = run(&["diff", s(&fx("g1.nt")), s(&fx("g2.nt")), "-o", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.lines().any(|l| l == "M 1 2"));
    assert_eq!(text.lines().filter(|l| l.starts_with("A ")).count(), 1);
    assert_eq!(text.lines().filter(|l| l.starts_with("D ")).count(), 0);
}

#[test]
fn plain_diff_ignores_blank_nodes() {
    let o = run(&["diff", "--plain", s(&fx("g1.nt")), s(&fx("g2.nt"))]);
    assert_eq!(o.status.code(), Some(0));
    let ops = stdout(&o).lines().filter(|l| l.starts_with("A ") || l.starts_with("D ")).count();
    assert_eq!(ops, 11);
}

#[test]
fn diff_piped_into_patch_rebuilds_the_target() {
    let d = run(&["diff", s(&fx("g1.nt")), s(&fx("g2.nt"))]);
    assert!(d.status.success());
    let p = run_with_stdin(&["patch", s(&fx("g1.nt")), "-"], &d.stdout);
    assert_eq!(p.status.code(), Some(0));
    let golden = std::fs::read_to_string(fx("g2.golden.nt")).unwrap();
    assert_eq!(stdout(&p), golden);
}

#[test]
fn source_label_diff_patches_to_an_equivalent_graph() {
    let dir = tempfile::tempdir().unwrap();
    let (d, out) = (dir.path().join("d.rdfd"), dir.path().join("out.nt"));
    let o = run(&["diff", "--labels", "source", s(&fx("g2.nt")), s(&fx("g3.nt")), "-o", s(&d)]);
    assert!(o.status.success());
    assert!(std::fs::read_to_string(&d).unwrap().contains("# direction=source"));
    assert!(run(&["patch", s(&fx("g2.nt")), s(&d), "-o", s(&out)]).status.success());
    assert_eq!(run(&["equiv", s(&out), s(&fx("g3.nt"))]).status.code(), Some(0));
}

#[test]
fn match_prints_mapping_and_cost() {
    let o = run(&["match", s(&fx("g2.nt")), s(&fx("g3.nt"))]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().any(|l| l == "M 2 3"));
    assert!(text.contains("cost=8"));
}

#[test]
fn entail_is_directional() {
    let o = run(&["entail", s(&fx("g2.nt")), s(&fx("g1.nt"))]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l == "M 1 2"));
    assert_eq!(run(&["entail", s(&fx("g1.nt")), s(&fx("g2.nt"))]).status.code(), Some(1));
}

#[test]
fn integrate_links_under_suffix_policy() {
    let gs: Vec<PathBuf> = ["g1.nt", "g2.nt", "g3.nt", "g4.nt"].iter().map(|n| fx(n)).collect();
    let mut args = vec!["integrate", "--equiv", "suffix"];
    args.extend(gs.iter().map(|p| s(p)));
    let o = run(&args);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("_:g1_1 <http://www.w3.org/2002/07/owl#sameAs> _:g2_2 ."));
    assert!(text.contains("_:g3_3 <http://www.w3.org/2002/07/owl#sameAs> _:g4_4 ."));

    args.push("--unify");
    let unified = stdout(&run(&args));
    assert!(!unified.contains("owl#sameAs> _:"));
    assert!(!unified.contains("_:g2_2"));
}

#[test]
fn integrate_review_can_reject_links() {
    let o = run_with_stdin(
        &["integrate", "--review", "--equiv", "suffix", s(&fx("g1.nt")), s(&fx("g2.nt"))],
        b"n\n",
    );
    assert!(o.status.success());
    assert!(!stdout(&o).contains("_:g1_1 <http://www.w3.org/2002/07/owl#sameAs>"));
}

#[test]
fn version_store_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let repo = dir.path().join("repo");
    assert!(run(&["vs", "init", s(&repo), s(&fx("g1.nt"))]).status.success());
    assert_eq!(run(&["vs", "init", s(&repo), s(&fx("g1.nt"))]).status.code(), Some(3));
    assert!(run(&["vs", "commit", s(&repo), s(&fx("g2.nt"))]).status.success());
    assert!(run(&["vs", "commit", s(&repo), s(&fx("g3.nt"))]).status.success());

    let v1 = stdout(&run(&["vs", "checkout", s(&repo), "1"]));
    assert_eq!(v1, std::fs::read_to_string(fx("g1.nt")).map(|t| sorted(&t)).unwrap());

    let out = dir.path().join("v3.nt");
    assert!(run(&["vs", "checkout", s(&repo), "3", "-o", s(&out)]).status.success());
    assert_eq!(run(&["equiv", s(&out), s(&fx("g3.nt"))]).status.code(), Some(0));
    assert_eq!(run(&["vs", "checkout", s(&repo), "4"]).status.code(), Some(3));

    let patch = dir.path().join("p.rdfd");
    assert!(run(&["vs", "patch", s(&repo), "--from", "1", "--to", "3", "-o", s(&patch)]).status.success());
    let rebuilt = dir.path().join("r.nt");
    assert!(run(&["patch", s(&fx("g1.nt")), s(&patch), "-o", s(&rebuilt)]).status.success());
    assert_eq!(run(&["equiv", s(&rebuilt), s(&fx("g3.nt"))]).status.code(), Some(0));
}

fn sorted(text: &str) -> String {
    let mut lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#')).collect();
    lines.sort();
    lines.iter().map(|l| format!("{l}\n")).collect()
}

#[test]
fn gen_then_bench() {
    let dir = tempfile::tempdir().unwrap();
    let pair = dir.path().join("p1");
    let o = run(&["gen", "--bnodes", "4", "--triples", "6", "--mutations", "2", "--seed", "9", "-o", s(&pair)]);
    assert!(o.status.success());
    for f in ["g1.nt", "g2.nt", "truth.bm", "meta.txt"] {
        assert!(pair.join(f).exists(), "{f}");
    }
    let o = run(&["bench", s(dir.path())]);
    assert!(o.status.success());
    let csv = stdout(&o);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("instance,tier,cost,optimum_bound,wall_time_ms"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    let exact: Vec<&str> = rows.iter().filter(|r| r[1] != "refinement").map(|r| r[2]).collect();
    assert!(exact.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn gen_rejects_infeasible_spec() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["gen", "--bnodes", "3", "--triples", "2", "--connectivity", "1.5", "-o", s(&dir.path().join("x"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn parse_errors_are_runtime_failures() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.nt");
    std::fs::write(&bad, "<http://a> <http://b> .\n").unwrap();
    let o = run(&["equiv", s(&bad), s(&fx("g1.nt"))]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!o.stderr.is_empty());
}

#[test]
fn unknown_policy_is_a_usage_error() {
    let o = run(&["diff", "--equiv", "bogus", s(&fx("g1.nt")), s(&fx("g2.nt"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn inputs_are_left_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.nt"), dir.path().join("b.nt"));
    std::fs::copy(fx("g2.nt"), &a).unwrap();
    std::fs::copy(fx("g3.nt"), &b).unwrap();
    let before = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    for cmd in ["diff", "match", "equiv", "entail", "integrate"] {
        run(&[cmd, s(&a), s(&b)]);
    }
    assert_eq!(before, (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap()));
}
