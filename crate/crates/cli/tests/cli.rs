use std::path::Path;
use std::process::{Command, Output};

fn subchan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subchan")).args(args).env_remove("SUBCHAN_SEED").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn field(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(key))
        .map(|rest| rest.split_whitespace().next().unwrap().to_string())
        .unwrap_or_else(|| panic!("no `{key}` line in\n{text}"))
}

#[test]
fn phase_damping_pair() {
    let o = subchan(&["fidelity", "--channel", "pd", "--eta", "0.5", "--levels", "0,1", "--dim", "32"]);
    assert_eq!(code(&o), 0);
    assert_eq!(field(&stdout(&o), "fidelity"), "0.833333333333");
}

#[test]
fn amplitude_damping_pair_with_quadrature() {
    let o =
        subchan(&["fidelity", "--channel", "ad", "--eta", "0.25", "--levels", "0,1", "--dim", "32", "--quadrature"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(field(&text, "fidelity"), "0.708333333333");
    assert_eq!(field(&text, "quadrature"), "0.708333333333");
}

#[test]
fn depolarizing_has_no_hull() {
    let o = subchan(&["hull-check", "--channel", "dep", "--p", "0.3", "--levels", "0,1", "--dim", "4"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("not an invariant hull"));
    let o = subchan(&["hull-check", "--channel", "pd", "--eta", "0.3", "--levels", "2,7", "--dim", "16"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("verdict      invariant hull"));
}

#[test]
fn fixed_points_of_amplitude_damping() {
    let o = subchan(&["fixed-points", "--channel", "ad", "--eta", "0.3", "--dim", "8"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("dimension 1"));
    assert!(text.contains("1|0><0|"));
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn sweep_endpoints() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ad.csv");
    let o = subchan(&["sweep", "--channel", "ad", "--levels", "0,1", "--steps", "2", "--out", csv.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = read(&csv);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "eta,fidelity_closed,fidelity_quadrature,gap,encoding");
    assert!(lines[1].starts_with("0,0.5,0.5,"), "{}", lines[1]);
    assert!(lines[2].starts_with("1,1,1,"), "{}", lines[2]);
    assert_eq!(lines.len(), 3);

    let csv = dir.path().join("pd.csv");
    let o = subchan(&[
        "sweep",
        "--channel",
        "pd",
        "--levels",
        "0,1",
        "--eta-start",
        "1",
        "--eta-end",
        "1",
        "--steps",
        "1",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(read(&csv).lines().nth(1).unwrap().starts_with("1,1,1,0,"));
}

#[test]
fn sweep_gaps_and_byte_stability() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for path in [&a, &b] {
        let o =
            subchan(&["sweep", "--channel", "ad", "--levels", "0,1", "--steps", "11", "--out", path.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    let mut rdr = csv::Reader::from_path(&a).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 11);
    for r in &rows {
        let closed: f64 = r[1].parse().unwrap();
        let quad: f64 = r[2].parse().unwrap();
        let gap: f64 = r[3].parse().unwrap();
        assert!(gap <= 1e-10);
        assert!((closed - quad).abs() <= 1e-10);
        assert_eq!(&r[4], "levels 0,1");
    }
}

#[test]
fn sweep_without_out_prints_table() {
    let o = subchan(&["sweep", "--channel", "ad", "--levels", "0,1", "--steps", "3"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("quadrature") && !text.contains("fidelity_closed"));
}

#[test]
fn unwritable_sweep_path_is_domain_error() {
    let o = subchan(&["sweep", "--channel", "ad", "--levels", "0,1", "--out", "/nonexistent/dir/x.csv"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&subchan(&["frobnicate"])), 2);
    assert_eq!(code(&subchan(&["fidelity", "--channel", "pd", "--levels", "0,1", "--wat"])), 2);
    assert_eq!(code(&subchan(&["fidelity", "--channel", "pd", "--levels", "0,1"])), 2);
    assert_eq!(code(&subchan(&["fidelity", "--channel", "ad", "--eta", "0.5"])), 2);
    assert_eq!(code(&subchan(&["fidelity", "--channel", "pd", "--eta=-1", "--levels", "0,1"])), 1);
    assert_eq!(code(&subchan(&["fidelity", "--channel", "ad", "--eta", "0.5", "--levels", "0,1,2"])), 1);
    assert_eq!(code(&subchan(&["fixed-points", "--channel", "ad", "--eta", "0.5", "--dim", "65"])), 1);
    assert_eq!(code(&subchan(&["--help"])), 0);
}

#[test]
fn channel_and_encoding_files() {
    let dir = tempfile::tempdir().unwrap();
    let ch = dir.path().join("qubit.txt");
    std::fs::write(&ch, "# damping with eta = 0.25\ndim 2\nkraus 0\n1 0\n0 0.5\nkraus 1\n0 0.8660254037844386\n0 0\n")
        .unwrap();
    let enc = dir.path().join("enc.txt");
    std::fs::write(&enc, "0 1j\n1 0\n").unwrap();
    let o = subchan(&[
        "fidelity",
        "--channel",
        "file",
        "--channel-file",
        ch.to_str().unwrap(),
        "--encoding-file",
        enc.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(field(&stdout(&o), "fidelity"), "0.708333333333");

    std::fs::write(&ch, "dim 2\nkraus 0\n1 0\n").unwrap();
    let o = subchan(&["verify", "--channel", "file", "--channel-file", ch.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}

#[test]
fn config_file_defaults_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(
        &conf,
        "# shared settings\nchannel = pd\neta = 0.5\nlevels = 0,1\ndim = 16\nrestarts = 3\nquadrature = true\n",
    )
    .unwrap();
    let c = conf.to_str().unwrap();
    let o = subchan(&["fidelity", "--config", c]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(field(&text, "fidelity"), "0.833333333333");
    assert!(text.contains("quadrature"));

    let o = subchan(&["fidelity", "--config", c, "--eta", "0.25", "--channel", "ad"]);
    assert_eq!(field(&stdout(&o), "fidelity"), "0.708333333333");

    let o = subchan(&["fidelity", "--config", c, "--levels", "1,3"]);
    assert_eq!(field(&stdout(&o), "fidelity"), "0.6875");

    std::fs::write(&conf, "colour = blue\n").unwrap();
    assert_eq!(code(&subchan(&["fidelity", "--config", c])), 2);
    assert_eq!(code(&subchan(&["fidelity", "--config", "/nonexistent.conf"])), 1);
}

#[test]
fn optimize_seed_from_environment() {
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_subchan"));
        cmd.args(["optimize", "--channel", "ad", "--eta", "0.5", "--levels", "0,1,2", "--dim", "8", "--restarts", "3"]);
        cmd.args(extra);
        match env {
            Some(v) => cmd.env("SUBCHAN_SEED", v),
            None => cmd.env_remove("SUBCHAN_SEED"),
        };
        stdout(&cmd.output().unwrap())
    };
    assert!(run(Some("77"), &[]).contains("seed 77"));
    assert!(run(Some("77"), &["--seed", "5"]).contains("seed 5"));
    let text = run(None, &[]);
    assert!(text.contains("seed 0"));
    let f: f64 = field(&text, "fidelity").parse().unwrap();
    assert!((f - (0.5 + 0.5 / 6.0 + 0.5f64.sqrt() / 3.0)).abs() < 1e-6);
    assert_eq!(text, run(None, &[]));
}
