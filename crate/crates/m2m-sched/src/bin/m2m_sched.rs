fn main() {
    std::process::exit(m2m_sched::cli::main());
}
