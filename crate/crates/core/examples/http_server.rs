//! Serve the meeting model over HTTP.
//!
//! ```text
//! cargo run --example http_server
//! curl -X POST localhost:8080/sim/init -d '{}'
//! curl -N localhost:8080/events &
//! curl -X POST localhost:8080/sim/run -d '{}'
//! ```

use topoflow::fixtures;

#[tokio::main]
async fn main() -> std::io::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let port = std::env::var("TOPOFLOW_PORT")
        .ok()
        .and_then(|p| p.parse().ok())
        .unwrap_or(8080);
    topoflow::server::serve(fixtures::meeting(), port).await
}
