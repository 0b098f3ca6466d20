//! Command-line front end for the radial Sobolev toolkit.
//!
//! Exit codes: 0 success (all checks pass), 1 validation failure, 2 spec
//! parse error, 3 numerical failure, 64 usage error.

mod commands;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "radsob",
    version,
    about = "Radial Sobolev functionals on rotationally symmetric model manifolds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the class-F and convexity requirements of a manifold spec
    Validate(commands::ValidateArgs),
    /// Tabulate the flattening change of variables r -> s
    Transform(commands::TransformArgs),
    /// Integrate the critical Euler-Lagrange equation from the origin
    Shoot(commands::ShootArgs),
    /// Evaluate Sobolev quotients for a profile or a scale sweep
    Quotient(commands::QuotientArgs),
    /// Rearrange a decreasing profile onto flat space
    Symmetrize(commands::SymmetrizeArgs),
    /// Run the flatness-deficit experiment and emit the full report
    Rigidity(commands::RigidityArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap exits 2 on usage errors; 2 is reserved for spec parse
            // failures here, so usage problems map to 64 instead
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Validate(a) => commands::validate(a),
        Command::Transform(a) => commands::transform(a),
        Command::Shoot(a) => commands::shoot(a),
        Command::Quotient(a) => commands::quotient(a),
        Command::Symmetrize(a) => commands::symmetrize(a),
        Command::Rigidity(a) => commands::rigidity(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("radsob: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
