//! `vtl` — exact transport and growth measurements on torus-bundle
//! lattices, from the command line.

mod config;
mod run;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::Store;

#[derive(Parser)]
#[command(
    name = "vtl",
    version,
    about = "Ball growth, finite domains and Varopoulos transport in Z^2 x| Z lattices"
)]
struct Cli {
    /// Flat key=value configuration file; command-line flags override it.
    #[arg(long, value_name = "FILE", global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct CommonArgs {
    /// Group: z2, nil, sol or custom.
    #[arg(long)]
    group: Option<String>,

    /// Gluing matrix m11,m12,m21,m22 (required with --group custom).
    #[arg(long)]
    matrix: Option<String>,

    /// Comma-separated generator words over a,b,t; uppercase = inverse.
    #[arg(long)]
    generators: Option<String>,

    /// Ball element cap; enumeration beyond it fails loudly.
    #[arg(long)]
    cap: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Growth series |B(0)| .. |B(rmax)| as CSV, plus exponent fits.
    Growth {
        #[command(flatten)]
        common: CommonArgs,
        /// Largest radius to enumerate.
        #[arg(long)]
        rmax: Option<u32>,
        /// Lower end of the fit window.
        #[arg(long)]
        fit_lo: Option<u32>,
        /// Upper end of the fit window.
        #[arg(long)]
        fit_hi: Option<u32>,
        /// CSV destination ('-' = stdout).
        #[arg(long)]
        out: Option<String>,
    },
    /// Enumerate a ball and keep it in a textual cache file.
    Ball {
        #[command(flatten)]
        common: CommonArgs,
        /// Ball radius.
        #[arg(long)]
        radius: Option<u32>,
        /// Cache file (default: $VTL_CACHE_DIR/<group>-r<radius>.ball).
        #[arg(long)]
        cache: Option<String>,
    },
    /// Verify the transport bounds on one domain and print the report.
    Transport {
        #[command(flatten)]
        common: CommonArgs,
        /// Domain: singleton[:mult] | ball:<n> | box:<p,q,k:p,q,k> |
        /// random:<mass>,<max_mult>,<seed> | file:<path>.
        #[arg(long)]
        domain: Option<String>,
        /// Report destination ('-' = stdout).
        #[arg(long)]
        out: Option<String>,
    },
    /// Batch proposition checks over seeded random domains.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of random domains.
        #[arg(long)]
        count: Option<u32>,
        /// Base seed; domain i uses seed + i.
        #[arg(long)]
        seed: Option<u64>,
        /// Multiplicity bound on odd-indexed domains (even ones are characteristic).
        #[arg(long)]
        max_mult: Option<u32>,
        /// Smallest target mass.
        #[arg(long)]
        mass_lo: Option<u64>,
        /// Largest target mass.
        #[arg(long)]
        mass_hi: Option<u64>,
    },
    /// Sweep a domain family and fit the isoperimetric exponents.
    Profile {
        #[command(flatten)]
        common: CommonArgs,
        /// Family: balls, boxes or random.
        #[arg(long)]
        family: Option<String>,
        /// First family index.
        #[arg(long)]
        n_lo: Option<u32>,
        /// Last family index.
        #[arg(long)]
        n_hi: Option<u32>,
        /// Seed for the random family.
        #[arg(long)]
        seed: Option<u64>,
        /// Multiplicity bound for the random family.
        #[arg(long)]
        max_mult: Option<u32>,
        /// Mass scale for the random family (target = scale*(n+1)^2).
        #[arg(long)]
        mass_scale: Option<u64>,
        /// CSV destination ('-' = stdout).
        #[arg(long)]
        out: Option<String>,
    },
}

fn apply_common(store: &mut Store, common: CommonArgs) {
    store.set_flag("group", common.group);
    store.set_flag("matrix", common.matrix);
    store.set_flag("generators", common.generators);
    store.set_flag("cap", common.cap.map(|v| v.to_string()));
}

fn execute(cli: Cli) -> config::Result<()> {
    let mut store = Store::from_config_file(cli.config.as_deref())?;
    match cli.command {
        Cmd::Growth {
            common,
            rmax,
            fit_lo,
            fit_hi,
            out,
        } => {
            apply_common(&mut store, common);
            store.set_flag("rmax", rmax.map(|v| v.to_string()));
            store.set_flag("fit_lo", fit_lo.map(|v| v.to_string()));
            store.set_flag("fit_hi", fit_hi.map(|v| v.to_string()));
            store.set_flag("out", out);
            run::growth(&store)
        }
        Cmd::Ball {
            common,
            radius,
            cache,
        } => {
            apply_common(&mut store, common);
            store.set_flag("radius", radius.map(|v| v.to_string()));
            store.set_flag("cache", cache);
            run::ball(&store)
        }
        Cmd::Transport {
            common,
            domain,
            out,
        } => {
            apply_common(&mut store, common);
            store.set_flag("domain", domain);
            store.set_flag("out", out);
            run::transport(&store)
        }
        Cmd::Verify {
            common,
            count,
            seed,
            max_mult,
            mass_lo,
            mass_hi,
        } => {
            apply_common(&mut store, common);
            store.set_flag("count", count.map(|v| v.to_string()));
            store.set_flag("seed", seed.map(|v| v.to_string()));
            store.set_flag("max_mult", max_mult.map(|v| v.to_string()));
            store.set_flag("mass_lo", mass_lo.map(|v| v.to_string()));
            store.set_flag("mass_hi", mass_hi.map(|v| v.to_string()));
            run::verify(&store)
        }
        Cmd::Profile {
            common,
            family,
            n_lo,
            n_hi,
            seed,
            max_mult,
            mass_scale,
            out,
        } => {
            apply_common(&mut store, common);
            store.set_flag("family", family);
            store.set_flag("n_lo", n_lo.map(|v| v.to_string()));
            store.set_flag("n_hi", n_hi.map(|v| v.to_string()));
            store.set_flag("seed", seed.map(|v| v.to_string()));
            store.set_flag("max_mult", max_mult.map(|v| v.to_string()));
            store.set_flag("mass_scale", mass_scale.map(|v| v.to_string()));
            store.set_flag("out", out);
            run::profile(&store)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
