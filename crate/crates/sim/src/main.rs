fn main() {
    std::process::exit(apeps_sim::run_cli());
}
