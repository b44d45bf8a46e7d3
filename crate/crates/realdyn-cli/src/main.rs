use std::io::Write;

fn main() {
    let threads = std::env::var(realdyn_cli::config::THREADS_ENV).ok();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let code = realdyn_cli::main_with(std::env::args_os(), threads.as_deref(), &mut out, &mut err);
    let _ = out.flush();
    std::process::exit(code);
}
