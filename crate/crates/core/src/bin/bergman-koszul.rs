use std::io::Write;

fn main() {
    let (output, code) = bergman_koszul::cli::main_with_args(std::env::args_os());
    let stream = if code == bergman_koszul::cli::EXIT_INPUT { 2 } else { 1 };
    if stream == 2 {
        let _ = std::io::stderr().write_all(output.as_bytes());
    } else {
        let _ = std::io::stdout().write_all(output.as_bytes());
    }
    std::process::exit(code);
}
