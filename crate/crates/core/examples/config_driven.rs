//! The command pipeline without the binary: parse a config, run `verify`,
//! inspect the report.

use quasilocal::cli::{execute, parse_config, Command};

const CONFIG: &str = "
model.name = dephasing
model.kappa = 0.5
observable.label = X
evolution.times = [1.0]
channel.source = lindblad
channel.sites = 1
run.seed = 7
";

fn main() -> quasilocal::Result<()> {
    let cfg = parse_config(CONFIG)?;
    let outcome = execute(Command::Verify, &cfg);
    let env = &outcome.envelope;
    println!("schema {}, passed {}, exit status {}", env.schema, env.passed, outcome.status.code());
    println!("payload sha256 {}", env.payload_sha256);
    let decay = &env.payload["results"][0]["observable_decay"];
    println!("<X, γ_1(X)> / <X, X> = {decay} (e^-1 = {})", (-1.0f64).exp());
    print!("{}", outcome.csv.as_str());
    Ok(())
}
