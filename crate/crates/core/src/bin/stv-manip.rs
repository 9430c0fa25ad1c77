fn main() {
    std::process::exit(stv_manip::cli::run(std::env::args_os()));
}
