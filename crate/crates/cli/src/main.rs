fn main() {
    std::process::exit(sobolev_lab::main_with_args(std::env::args_os()));
}
