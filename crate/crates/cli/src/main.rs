use clap::Parser;
use eliot_cli::api::{router, AppState};
use eliot_cli::cli::{self, Cli, Command, ServeArgs};
use eliot_core::explorer::PipelineConfig;

fn serve(args: &ServeArgs) -> anyhow::Result<()> {
    let state = AppState::new(args.source.explorer(), PipelineConfig::default());
    let addr = format!("{}:{}", args.host, args.port);
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(&addr).await?;
        log::info!("listening on http://{addr}");
        axum::serve(listener, router(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Explore(a) => cli::explore(a),
        Command::Fetch(a) => cli::fetch(a),
        Command::Sweep(a) => cli::sweep(a),
        Command::Serve(a) => serve(a),
        Command::Presets => cli::list_presets(),
    };
    if let Err(e) = outcome {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
