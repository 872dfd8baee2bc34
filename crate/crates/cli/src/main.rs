use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use coalg_cli::{
    cmd_asreg, cmd_cy, cmd_ext, cmd_gate, cmd_localcoh, cmd_nakayama, cmd_verify, exit_code, QuiverSource, Report,
    RunConfig,
};
use coalg_core::FieldSpec;

#[derive(Parser)]
#[command(
    name = "coalg",
    version,
    about = "Homological invariants of path coalgebras and completed path algebras"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Quiver file (`vertices: n` then `arrow <label> <source> <target>` lines).
    #[arg(long)]
    quiver: PathBuf,
    /// Truncation length N.
    #[arg(long, default_value_t = 12)]
    trunc: usize,
    /// Colimit depth for local cohomology (default: N).
    #[arg(long)]
    mmax: Option<usize>,
    /// Ground field: Q or Fp (e.g. F7); overrides the quiver file.
    #[arg(long)]
    field: Option<FieldSpec>,
    #[arg(long)]
    json: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Proceed past the growth gate.
    #[arg(long)]
    force: bool,
}

impl Common {
    fn config(&self) -> RunConfig {
        RunConfig {
            quiver: QuiverSource::File(self.quiver.clone()),
            field: self.field,
            trunc: self.trunc,
            m_max: self.mmax,
            json: self.json,
            seed: self.seed,
            force: self.force,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Bounded-growth gate.
    Gate(Common),
    /// Ext^i(M, N); M and N are simple:<v>, injective:<v>[:t], projective:<v>:<t>,
    /// file:<path>, or A (target) / C (source).
    Ext {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        module: String,
        #[arg(long, default_value = "A")]
        target: String,
        #[arg(long)]
        degree: Option<usize>,
    },
    /// AS-regularity on both sides and the χ-probe.
    Asreg(Common),
    /// Nakayama twist, innerness and dualizing complex.
    Nakayama(Common),
    /// Serre / Calabi-Yau identities.
    Cy {
        #[command(flatten)]
        common: Common,
        /// `default` or a comma-separated list of module specs.
        #[arg(long)]
        family: Option<String>,
    },
    /// Local cohomology of A.
    Localcoh {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Seeded invariant suite.
    Verify(Common),
}

fn run(cmd: &Command) -> (anyhow::Result<Report>, bool) {
    match cmd {
        Command::Gate(c) => (cmd_gate(&c.config()), c.json),
        Command::Ext {
            common,
            module,
            target,
            degree,
        } => (cmd_ext(&common.config(), module, target, *degree), common.json),
        Command::Asreg(c) => (cmd_asreg(&c.config()), c.json),
        Command::Nakayama(c) => (cmd_nakayama(&c.config()), c.json),
        Command::Cy { common, family } => (cmd_cy(&common.config(), family.as_deref()), common.json),
        Command::Localcoh { common, degree } => (cmd_localcoh(&common.config(), *degree), common.json),
        Command::Verify(c) => (cmd_verify(&c.config()), c.json),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        (Ok(report), json) => {
            if json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.render_text());
            }
            ExitCode::SUCCESS
        }
        (Err(e), _) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
