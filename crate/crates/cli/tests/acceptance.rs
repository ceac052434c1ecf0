//! Acceptance criterion 13: every command, run twice with a fixed seed and
//! under different worker thread counts, produces byte-identical output.

mod common;

use common::bin;

fn capture(args: &[&str]) -> Vec<u8> {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

#[test]
fn criterion_13_determinism() {
    let commands: Vec<Vec<&str>> = vec![
        vec!["dist", "--kind", "x", "--n", "10", "--p", "2"],
        vec!["dist", "--kind", "y", "--n", "10", "--p", "3", "--format", "json"],
        vec!["moments", "--n", "14", "--p", "2", "--verify", "--format", "json"],
        vec![
            "simulate", "--n", "60", "--p", "2", "--trials", "30000", "--seed", "42",
            "--method", "tree",
        ],
        vec![
            "simulate", "--n", "5000", "--p", "3", "--trials", "30000", "--seed", "42",
            "--method", "split", "--format", "json",
        ],
        vec!["mqs-run", "--n", "40", "--p", "3", "--trials", "10000", "--seed", "7"],
        vec![
            "mqs-run", "--n", "25", "--ranks", "1,10,20", "--trials", "5000", "--seed", "7",
            "--format", "json",
        ],
        vec![
            "gof", "--kind", "y", "--n", "80", "--p", "2", "--trials", "20000", "--seed", "11",
        ],
        vec![
            "gof", "--kind", "x", "--n", "3000", "--p", "2", "--trials", "20000", "--seed", "11",
            "--center", "moments", "--format", "json",
        ],
        vec!["gof", "--kind", "y", "--n", "80", "--p", "2", "--source", "exact"],
        vec![
            "quasipower", "--kind", "y", "--p", "2", "--s", "0.0953", "--n-list", "20,40,60",
        ],
        vec![
            "gf-check", "--z", "0.25", "--u", "0.4", "--v", "1.15", "--trunc", "120",
            "--ptrunc", "16", "--format", "json",
        ],
    ];
    for args in &commands {
        let reference = capture(args);
        assert!(!reference.is_empty(), "{args:?} produced no output");
        // repetition
        let again = capture(args);
        assert_eq!(again, reference, "{args:?} differs between identical runs");
        // thread-count variation
        for threads in ["1", "4"] {
            let mut with_threads: Vec<&str> = args.clone();
            with_threads.extend_from_slice(&["--threads", threads]);
            let got = capture(&with_threads);
            assert_eq!(
                got, reference,
                "{args:?} differs under --threads {threads}"
            );
        }
        println!("  deterministic: treespan {}", args.join(" "));
    }
    println!("criterion 13 (byte-identical outputs across runs and thread counts): PASS");
}
