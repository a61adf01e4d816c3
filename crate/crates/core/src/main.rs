fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("LD_LOG")).init();
    std::process::exit(dressing_chain::cli::run(std::env::args_os()));
}
