use std::process::ExitCode;
use std::sync::Arc;

use clap::Parser;
use tutor_gateway::cli::{self, Cli, Cmd};
use tutor_gateway::{http, Gateway};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Cmd::Serve => serve(&cli),
        _ => cli::run(&cli, &mut std::io::stdout().lock()).map_err(anyhow::Error::from),
    };
    match code {
        Ok(c) => ExitCode::from(c as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn serve(cli: &Cli) -> anyhow::Result<i32> {
    let cfg = cli.common.resolve()?;
    let gw = Arc::new(Gateway::from_config(&cfg)?);
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(http::serve(gw, &cfg.listen))?;
    Ok(0)
}
