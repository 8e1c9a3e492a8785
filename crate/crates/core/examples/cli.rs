//! Driving the command line from code, as the `qpcf` binary does.
//!
//! cargo run --example cli

use std::io::Write;

use qpcf::cli::run_cli;

fn main() {
    let dir = std::env::temp_dir().join("qpcf-cli-example");
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("epr.qpcf");
    let mut f = std::fs::File::create(&file).unwrap();
    writeln!(f, "-- measure a Bell pair\nmain dmeas(0, epr)").unwrap();
    let path = file.to_str().unwrap();

    for args in [
        vec!["check", path],
        vec!["run", "--seed", "7", path],
        vec!["dist", path],
        vec!["dist", "--json", path],
    ] {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_cli(std::iter::once("qpcf").chain(args.iter().copied()), &mut out, &mut err);
        println!("$ qpcf {}  (exit {code})", args.join(" "));
        print!("{}{}", String::from_utf8_lossy(&out), String::from_utf8_lossy(&err));
    }
}
