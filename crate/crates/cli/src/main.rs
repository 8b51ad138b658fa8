fn main() {
    std::process::exit(bykov_atlas::run(std::env::args_os()));
}
