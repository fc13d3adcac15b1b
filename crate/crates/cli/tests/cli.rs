use std::process::{Command, Output};

fn frobthresh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frobthresh"))
        .args(args)
        .env_remove("FROBTHRESH_THREADS")
        .env_remove("FROBTHRESH_MEM_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn field<'a>(header: &str, row: &'a str, name: &str) -> &'a str {
    let idx = header.split(',').position(|h| h == name).unwrap();
    row.split(',').nth(idx).unwrap()
}

fn single_row(out: &Output) -> (String, String) {
    let text = stdout(out);
    let mut lines = text.lines();
    (lines.next().unwrap().to_owned(), lines.next().unwrap().to_owned())
}

#[test]
fn vr_examples() {
    for (args, expected_v) in [
        (vec!["vr", "symmetric", "2", "--p", "2", "--s", "1"], "2"),
        (vec!["vr", "pfaffian", "4", "--p", "2", "--s", "1"], "4"),
    ] {
        let out = frobthresh(&args);
        assert_eq!(out.status.code(), Some(0));
        let (header, row) = single_row(&out);
        assert_eq!(field(&header, &row, "v"), expected_v);
        assert_eq!(field(&header, &row, "bounds_ok"), "true");
    }
    let out = frobthresh(&["vr", "generic", "2", "2", "--p", "3", "--s", "1"]);
    let (header, row) = single_row(&out);
    assert!(field(&header, &row, "v").parse::<u32>().unwrap() <= 4);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(frobthresh(&["vr", "pfaffian", "3", "--p", "2"]).status.code(), Some(2));
    assert_eq!(frobthresh(&["vr", "nonsense", "2", "--p", "2"]).status.code(), Some(2));
    assert_eq!(frobthresh(&["annihilator", "maximal_minors", "2", "--p", "2"]).status.code(), Some(2));
    assert_eq!(frobthresh(&["degenerate", "3", "--p", "2"]).status.code(), Some(2));
    assert_eq!(frobthresh(&["weights", "euler", "1,x"]).status.code(), Some(2));
    assert_eq!(frobthresh(&["scan", "--family", "symmetric:2", "--primes", "4"]).status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_3() {
    let out = frobthresh(&["scan", "--family", "symmetric:2", "--output", "/nonexistent-dir/table.csv"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn guardrail_skip_exits_4_with_partial_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.csv");
    let out = frobthresh(&[
        "scan",
        "--family",
        "polynomial_ring:3",
        "--family",
        "generic:2,5",
        "--s-max",
        "2",
        "--mem-cap",
        "64M",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
    let table = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 7);
    assert!(lines[1].starts_with("generic,2,2,2,1,2,2,"));
    assert!(lines[2].starts_with("generic,2,2,2,2,4,6,"));
    assert!(lines[3].starts_with("generic,5,5,2,1,2,,,"));
    assert!(lines[4].starts_with("generic,5,5,2,2,4,,,"));
    assert!(lines[4].contains(",false,"));
    assert!(lines[6].starts_with("polynomial_ring,3,3,2,2,4,9,"));
}

#[test]
fn scan_is_byte_identical_across_thread_counts() {
    let base = [
        "scan",
        "--family",
        "symmetric:2-3",
        "--family",
        "maximal_minors:3x2",
        "--family",
        "pfaffian:2,4",
        "--primes",
        "3,2",
        "--s-max",
        "1",
        "--no-timings",
    ];
    let mut outputs = Vec::new();
    for threads in ["1", "2", "4"] {
        let mut args = base.to_vec();
        args.extend(["--threads", threads]);
        let out = frobthresh(&args);
        assert_eq!(out.status.code(), Some(0));
        outputs.push(out.stdout);
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));

    let text = String::from_utf8(outputs.remove(0)).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    let keys: Vec<(String, u32, u32, u32)> = lines
        .map(|row| {
            (
                field(header, row, "family").to_owned(),
                field(header, row, "n").parse().unwrap(),
                field(header, row, "p").parse().unwrap(),
                field(header, row, "s").parse().unwrap(),
            )
        })
        .collect();
    let order = ["symmetric", "pfaffian", "maximal_minors"];
    let mut sorted = keys.clone();
    sorted.sort_by_key(|(f, n, p, s)| (order.iter().position(|o| o == f), *n, *p, *s));
    assert_eq!(keys, sorted);
}

#[test]
fn timed_output_matches_once_timings_are_dropped() {
    let strip =
        |o: Output| -> Vec<String> { stdout(&o).lines().map(|l| l.rsplit_once(',').unwrap().0.to_owned()).collect() };
    let args = ["scan", "--family", "generic:2", "--primes", "2,3", "--s-max", "2"];
    let one = strip(frobthresh(&[&args[..], &["--threads", "1"]].concat()));
    let four = strip(frobthresh(&[&args[..], &["--threads", "4"]].concat()));
    assert_eq!(one, four);
}

#[test]
fn hypersurface_rows_satisfy_duality() {
    let out =
        frobthresh(&["scan", "--family", "generic:2;symmetric:2-3;pfaffian:4", "--primes", "2,3", "--no-timings"]);
    // A single --family value takes one family; semicolons are config-file syntax.
    assert_eq!(out.status.code(), Some(2));

    let out = frobthresh(&[
        "scan",
        "--family",
        "generic:2",
        "--family",
        "symmetric:2-3",
        "--family",
        "pfaffian:4",
        "--primes",
        "2,3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    let mut rows = 0;
    for row in lines {
        let n: u64 = field(header, row, "n").parse().unwrap();
        let q: u64 = field(header, row, "q").parse().unwrap();
        let r = match field(header, row, "family") {
            "generic" => n * n,
            "symmetric" => n * (n + 1) / 2,
            _ => n * (n - 1) / 2,
        };
        let v: u64 = field(header, row, "v").parse().unwrap();
        let indeg: u64 = field(header, row, "indeg_ann").parse().unwrap();
        assert_eq!(v + indeg, (q - 1) * r, "{row}");
        assert_eq!(field(header, row, "bounds_ok"), "true", "{row}");
        rows += 1;
    }
    assert_eq!(rows, 8);
}

#[test]
fn config_file_with_flag_and_env_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(
        &cfg,
        "# symmetric table\nfamilies = symmetric:2; polynomial_ring:4\nprimes = 2\ns_max = 3\nformat = markdown\ntimings = off\n",
    )
    .unwrap();
    let out = frobthresh(&["scan", "--config", cfg.to_str().unwrap(), "--format", "csv", "--s-max", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(
        text,
        "family,m,n,p,s,q,v,indeg_ann,v_over_q,lower_bound,theorem_c,upper_bound_vq,bounds_ok,wall_ms\n\
         symmetric,2,2,2,1,2,2,1,1,1,3/2,2,true,0\n\
         symmetric,2,2,2,2,4,5,4,5/4,1,3/2,5,true,0\n\
         polynomial_ring,4,4,2,1,2,4,,2,4,4,4,true,0\n\
         polynomial_ring,4,4,2,2,4,12,,3,4,4,12,true,0\n"
    );

    let out = Command::new(env!("CARGO_BIN_EXE_frobthresh"))
        .args(["scan", "--config", cfg.to_str().unwrap()])
        .env("FROBTHRESH_MEM_CAP", "1K")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "cap below the 64 MiB floor is rejected");
}

#[test]
fn empty_family_list_is_header_only() {
    let out = frobthresh(&["scan"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out),
        "family,m,n,p,s,q,v,indeg_ann,v_over_q,lower_bound,theorem_c,upper_bound_vq,bounds_ok,wall_ms\n"
    );
}

#[test]
fn json_and_markdown_formats() {
    let out = frobthresh(&["scan", "--family", "symmetric:2", "--s-max", "2", "--format", "json", "--no-timings"]);
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let reports = value.as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[1]["v"], 5);
    assert!(!reports[1]["slice_dims"].as_array().unwrap().is_empty());

    let out = frobthresh(&["scan", "--family", "symmetric:2", "--format", "markdown"]);
    let text = stdout(&out);
    assert!(text.starts_with("| family |"));
    assert!(text.contains("| symmetric | 2 | 2 | 2 | 2 | 1 | 3/2 |"));
}

#[test]
fn annihilator_reports() {
    let out = stdout(&frobthresh(&["annihilator", "symmetric", "2", "--p", "2", "--s", "1"]));
    assert!(out.contains("indeg_ann = 1\n"));
    assert!(out.contains("witness = x11\n"));
    assert!(out.contains("verified = true\n"));

    let out = stdout(&frobthresh(&["annihilator", "symmetric", "2", "--p", "2", "--s", "2"]));
    assert!(out.contains("closed_form_degree = 4\n"));
    assert!(out.contains("closed_form_annihilates = true\n"));
    assert!(out.contains("indeg_at_most_closed_form = true\n"));

    let out = stdout(&frobthresh(&["annihilator", "pfaffian", "4", "--p", "2"]));
    assert!(out.contains("indeg_ann = 2\n"));
}

#[test]
fn degenerate_reports() {
    let out = stdout(&frobthresh(&["degenerate", "4", "--p", "2"]));
    assert!(out.starts_with("t,v,indeg_ann\n0,4,"));
    assert!(out.contains("\n1,4,"));
    for flag in ["constant_off_zero", "semicontinuous", "additive"] {
        assert!(out.contains(&format!("{flag} = true")), "{flag}");
    }
    let out = stdout(&frobthresh(&["degenerate", "4", "--p", "3"]));
    let v: Vec<&str> = out.lines().skip(1).take(3).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(v[1], v[2]);
    let out = stdout(&frobthresh(&["degenerate", "2", "--p", "3"]));
    assert!(out.lines().skip(1).take(3).all(|l| l.split(',').nth(1) == Some("0")));
}

#[test]
fn weights_subcommands() {
    assert_eq!(stdout(&frobthresh(&["weights", "euler", "1,0,2"])), "sign -1, partition (1,1,1), dim 1\n");
    assert_eq!(stdout(&frobthresh(&["weights", "padic", "5,2", "--p", "2"])), "(1,0) + 2*(2,1)\n");
    assert_eq!(
        stdout(&frobthresh(&["weights", "window", "1,1,0", "--e", "6", "--n", "4", "--q", "3", "--j", "1"])),
        "true\n"
    );
    assert_eq!(stdout(&frobthresh(&["weights", "fundamental", "4,2,2,0"])), "2,0,2,0\n");
    assert_eq!(stdout(&frobthresh(&["weights", "euler", "-1,0,1"])), "zero\n");
}

#[test]
fn hilbert_subcommand() {
    assert_eq!(stdout(&frobthresh(&["hilbert", "3", "--q", "2"])), "1,3,3,1\n");
    assert_eq!(frobthresh(&["hilbert", "0", "--q", "2"]).status.code(), Some(2));
}
