fn main() {
    let argv = ramsey_cli::commands::main_args();
    let code = ramsey_cli::run(&argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    std::process::exit(code);
}
