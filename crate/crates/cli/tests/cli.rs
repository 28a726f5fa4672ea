use std::path::PathBuf;
use std::process::{Command, Output};

fn forcelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_forcelab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("forcelab-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

const FORK_NAMES: &str = "name s = {(chk 0, a), (chk 1, b)}";

#[test]
fn poset_commands() {
    let o = forcelab(&["poset", "check", "NSEP4"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("separative false"), "{out}");
    assert!(out.contains("covers a<1 b<1 c<a c<b"), "{out}");

    let dir = scratch("poset");
    let file = dir.join("v.poset");
    std::fs::write(&file, "poset V { elems 1 a b; order a<1 b<1; }").unwrap();
    let o = forcelab(&["poset", "filters", file.to_str().unwrap()]);
    assert_eq!(stdout(&o), "{1}\n{1,a}\n{1,b}\n");
    let o = forcelab(&["poset", "filters", "--generic", file.to_str().unwrap()]);
    assert_eq!(stdout(&o), "{1,a}\n{1,b}\n");

    std::fs::write(&file, "poset V { elems 1 a; order 1<a a<1; }").unwrap();
    let o = forcelab(&["poset", "check", file.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn completion_table() {
    let out = stdout(&forcelab(&["complete", "FORK3"]));
    assert!(out.starts_with("atoms 2: [a] [b]"), "{out}");
    assert!(out.contains("1 -> {[a],[b]}"), "{out}");
}

#[test]
fn name_commands() {
    let names = "name s = {(chk 0, b)}\nname t = chk {0,1}";
    let out = stdout(&forcelab(&["name", "rank", "NSEP4", names]));
    assert_eq!(out, "s\t1\nt\t1\n");
    let out = stdout(&forcelab(&["name", "classify", "NSEP4", names]));
    assert!(out.contains("t\trank 1\tcheck {0,1}"), "{out}");
    let out = stdout(&forcelab(&["name", "interpret", "NSEP4", names, "--filter", "1"]));
    assert!(out.contains("s\t{}\tquasi {0} (differs)"), "{out}");
}

#[test]
fn force_and_value() {
    let o = forcelab(&["force", "FORK3", FORK_NAMES, "chk 0 in s", "--at", "a"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("generic check agrees: true"));
    let o = forcelab(&["force", "FORK3", FORK_NAMES, "chk 0 in s", "--at", "b"]);
    assert_eq!(code(&o), 1);
    let out = stdout(&forcelab(&["bval", "FORK3", FORK_NAMES, "chk 0 in s"]));
    assert!(out.contains("value {[a]}") && out.contains("forced below {a}"), "{out}");
    let o = forcelab(&["force", "FORK3", FORK_NAMES, "chk 0 in t", "--at", "a"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn synth_certifies() {
    let o = forcelab(&["synth", "--poset", "FORK3", "--names", FORK_NAMES, "--formula", "s = chk {0}", "--certify"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("guarantee holds"));
    let bounded = "name s = {(chk 0, [a]), (chk 1, [b])}";
    let o = forcelab(&[
        "synth", "--poset", "FORK3", "--names", bounded, "--formula", "s = chk {0}", "--bounded", "1", "--certify",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("all predense: true"));
}

#[test]
fn check_exit_codes() {
    let dir = scratch("check");
    let write = |name: &str, body: &str| {
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        p.to_str().unwrap().to_string()
    };
    let holds = write("holds.toml", "poset = \"NSEP4\"\nsets = [[\"a\", \"c\"], [\"b\", \"c\"]]\nlargeness = \"ALL\"\n");
    let fails = write(
        "fails.toml",
        "poset = \"FORK3\"\nsets = [[\"a\"], [\"b\"]]\ndensity = \"unchecked\"\nlargeness = \"ALL\"\n",
    );
    let hyp = write("hyp.toml", "poset = \"FORK3\"\nsets = [[\"a\"]]\nlargeness = \"ALL\"\n");
    let n = write("n.toml", "poset = \"FORK3\"\nnames = \"name s = {(chk 0, a), (chk 0, b)}\"\nvalue = \"{0}\"\n");

    let o = forcelab(&["check", "fa", &holds]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("result\tfa\tholds\t"));
    assert_eq!(code(&forcelab(&["check", "fa", &fails])), 1);
    assert_eq!(code(&forcelab(&["check", "fa", &hyp])), 2);
    let o = forcelab(&["check", "n", &n]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("result\tn\tholds\t1,a\t"), "{}", stdout(&o));
    assert_eq!(code(&forcelab(&["check", "nope", &n])), 2);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn ultrapower_report() {
    let o = forcelab(&["ultrapower", "FORK3", "--ultrafilter", "a", "--universe", "1,2,2"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("6 classes under [a]"), "{out}");
    assert!(out.contains("j embedding true, onto true"), "{out}");
    assert!(out.contains(" 0 failures"), "{out}");
    let o = forcelab(&["ultrapower", "FORK3", "--ultrafilter", "a", "--universe", "1,2"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn suite_run_and_replay() {
    let dir = scratch("suite");
    let o = forcelab(&[
        "suite",
        "run",
        "--max-poset",
        "4",
        "--rank",
        "1",
        "--depth",
        "1",
        "--suite",
        "separativity-probe",
        "--suite",
        "triviality",
        "--bundles",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("NSEP4 pair {(chk 0, b)} at {1}: interpret {}, quasi {0} (diverges)"), "{out}");
    assert!(out.lines().any(|l| l.starts_with("triviality\tbn1\t") && l.ends_with("\t0")), "{out}");
    let bundle = dir.join("separativity-probe-nonseparative-agreement.toml");
    let o = forcelab(&["replay", bundle.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("recorded fails, replayed fails"));
    assert_eq!(code(&forcelab(&["suite", "run", "--suite", "nope"])), 2);
    std::fs::remove_dir_all(&dir).unwrap();
}
