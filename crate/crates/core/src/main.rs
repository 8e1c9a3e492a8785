use std::io::Write;

fn main() {
    // Deeply nested programs recurse in the parser and checker.
    let code = std::thread::Builder::new()
        .stack_size(256 << 20)
        .spawn(|| {
            let stdout = std::io::stdout();
            let stderr = std::io::stderr();
            let mut out = stdout.lock();
            let code = qpcf::cli::run_cli(std::env::args_os(), &mut out, &mut stderr.lock());
            let _ = out.flush();
            code
        })
        .expect("spawn main thread")
        .join()
        .unwrap_or(101);
    std::process::exit(code);
}
