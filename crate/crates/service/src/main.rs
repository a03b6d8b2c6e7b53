use clap::Parser;

fn main() -> anyhow::Result<()> {
    ifvc_service::cli::run(ifvc_service::cli::Cli::parse())
}
