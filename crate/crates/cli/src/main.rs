fn main() {
    std::process::exit(mlab_cli::main_with_args(std::env::args_os()));
}
