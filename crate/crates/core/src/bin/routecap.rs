use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use serde_json::{json, Value};

use routecap::elimination::{eliminates, minimal_description, DEFAULT_ENUMERATION_CAP};
use routecap::feasibility::{boundary_conditions, is_feasible, on_hyperplane, Feasibility, RateTuple};
use routecap::japanese::{make_inequality, DistanceFunction};
use routecap::network::{load_network, Network, Problem, SessionPolicy};
use routecap::oracle::{region_from_network, regions_equal, DEFAULT_ROW_CAP};
use routecap::ring_lab::{
    embed_on_cycle, ring_beta, ring_lower_bound_distance, rounding_experiment, satisfies_forced_relations,
    verify_ring_lower_bound, RingConfig, RoundingParams,
};
use routecap::{Error, Result};

/// Exact routing capacity regions for multicast networks.
#[derive(Parser)]
#[command(name = "routecap", version)]
struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct NetworkArg {
    /// Network description (TOML).
    #[arg(long)]
    network: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// List the minimal subtrees of every session.
    Subtrees(NetworkArg),
    /// Inequality induced by a distance function.
    Ineq {
        #[command(flatten)]
        net: NetworkArg,
        /// Comma-separated edge lengths in edge-id order.
        #[arg(long)]
        distance: String,
    },
    /// Decide whether a rate tuple is achievable.
    Feasible {
        #[command(flatten)]
        net: NetworkArg,
        #[arg(long)]
        rates: PathBuf,
    },
    /// Feasibility plus the hyperplane and boundary conditions for one distance function.
    Boundary {
        #[command(flatten)]
        net: NetworkArg,
        #[arg(long)]
        rates: PathBuf,
        #[arg(long)]
        distance: String,
    },
    /// Does the inequality of f make the inequality of g redundant?
    Eliminate {
        #[command(flatten)]
        net: NetworkArg,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
    },
    /// Minimal description over distance functions with bounded entries.
    Describe {
        #[command(flatten)]
        net: NetworkArg,
        #[arg(long, default_value_t = 1)]
        max_distance: u64,
        /// Also compare against the Fourier-Motzkin region.
        #[arg(long)]
        oracle: bool,
        /// Largest number of candidate distance functions to enumerate.
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: u64,
    },
    /// Exact region by Fourier-Motzkin projection.
    Oracle {
        #[command(flatten)]
        net: NetworkArg,
        /// Largest intermediate row count.
        #[arg(long, default_value_t = DEFAULT_ROW_CAP as u64)]
        cap: u64,
    },
    /// Ring constructions and experiments.
    #[command(subcommand)]
    Ring(RingCommand),
}

#[derive(Subcommand)]
enum RingCommand {
    /// The exponential lower-bound distance function.
    #[command(name = "lower-bound", alias = "g4")]
    LowerBound {
        #[arg(long)]
        edges: usize,
    },
    /// Exhaustive search for eliminators with entries up to --max-distance.
    #[command(name = "verify-lower-bound", alias = "verify4")]
    VerifyLowerBound {
        #[arg(long)]
        edges: usize,
        #[arg(long)]
        max_distance: u64,
        #[arg(long, default_value = "all-multicast")]
        policy: String,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: u64,
    },
    /// Lay the lower-bound function along a maximum cycle of a graph.
    #[command(name = "embed-cycle", alias = "embed5")]
    EmbedCycle {
        #[command(flatten)]
        net: NetworkArg,
        /// Cycle edges in traversal order, comma-separated.
        #[arg(long)]
        cycle: String,
    },
    /// Randomized rounding experiment.
    #[command(name = "rounding", alias = "thm7")]
    Rounding {
        #[arg(long)]
        edges: usize,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        gmax: String,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "all-multicast")]
        policy: String,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn problem(arg: &NetworkArg) -> Result<Problem> {
    Problem::from_text(&read(&arg.network)?)
}

fn usize_list(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("expected a comma-separated list of edge ids, got {text:?}")))
        })
        .collect()
}

fn feasibility_record(problem: &Problem, verdict: &Feasibility) -> Value {
    match verdict {
        Feasibility::Feasible(w) => json!({ "feasible": true, "witness": w.to_records(problem) }),
        Feasibility::Infeasible(c) => json!({ "feasible": false, "certificate": c.to_record(problem) }),
    }
}

fn run(command: Command) -> Result<Vec<Value>> {
    Ok(match command {
        Command::Subtrees(net) => {
            let p = problem(&net)?;
            p.sessions
                .iter()
                .zip(&p.subtrees)
                .map(|(s, trees)| {
                    json!({
                        "session_id": s.id,
                        "source": s.source,
                        "destinations": s.destinations,
                        "count": trees.len(),
                        "subtrees": trees.iter().map(|t| t.to_vec()).collect::<Vec<_>>(),
                    })
                })
                .collect()
        }
        Command::Ineq { net, distance } => {
            let p = problem(&net)?;
            let f = DistanceFunction::parse(&distance)?;
            vec![make_inequality(&p, &f)?.to_record(&p)]
        }
        Command::Feasible { net, rates } => {
            let p = problem(&net)?;
            let r = RateTuple::parse(&p, &read(&rates)?)?;
            vec![feasibility_record(&p, &is_feasible(&p, &r)?)]
        }
        Command::Boundary { net, rates, distance } => {
            let p = problem(&net)?;
            let r = RateTuple::parse(&p, &read(&rates)?)?;
            let f = DistanceFunction::parse(&distance)?;
            let mut rec = feasibility_record(&p, &is_feasible(&p, &r)?);
            if rec["feasible"] == json!(true) {
                rec["on_hyperplane"] = json!(on_hyperplane(&p, &r, &f)?);
                let witness = boundary_conditions(&p, &r, &f)?;
                rec["boundary_conditions"] = json!(witness.is_some());
                if let Some(w) = witness {
                    rec["boundary_witness"] = json!(w.to_records(&p));
                }
            }
            rec["distance"] = f.to_json();
            vec![rec]
        }
        Command::Eliminate { net, f, g } => {
            let p = problem(&net)?;
            let (f, g) = (DistanceFunction::parse(&f)?, DistanceFunction::parse(&g)?);
            vec![json!({ "f": f.to_json(), "g": g.to_json(), "eliminates": eliminates(&p, &f, &g)? })]
        }
        Command::Describe {
            net,
            max_distance,
            oracle,
            cap,
        } => {
            let p = problem(&net)?;
            let desc = minimal_description(&p, max_distance, cap)?;
            let mut out = desc.to_records(&p);
            if oracle {
                let region = region_from_network(&p, DEFAULT_ROW_CAP)?;
                let ineqs: Vec<_> = desc.inequalities().collect();
                out.push(json!({
                    "source": "oracle",
                    "oracle_rows": region.rows.len(),
                    "survivors": desc.len(),
                    "regions_equal": regions_equal(&region, &ineqs)?,
                }));
            }
            out
        }
        Command::Oracle { net, cap } => {
            let p = problem(&net)?;
            let cap = usize::try_from(cap).map_err(|_| Error::InvalidArgument("row cap too large".into()))?;
            region_from_network(&p, cap)?.to_records()
        }
        Command::Ring(ring) => run_ring(ring)?,
    })
}

fn run_ring(command: RingCommand) -> Result<Vec<Value>> {
    Ok(match command {
        RingCommand::LowerBound { edges } => {
            let g = ring_lower_bound_distance(edges)?;
            vec![json!({
                "edge_count": edges,
                "beta": ring_beta(edges).to_string(),
                "distance": g.to_json(),
                "forced_relations": satisfies_forced_relations(&g, edges),
            })]
        }
        RingCommand::VerifyLowerBound {
            edges,
            max_distance,
            policy,
            cap,
        } => {
            let policy: SessionPolicy = policy.parse()?;
            vec![verify_ring_lower_bound(edges, max_distance, policy, cap)?.to_record()]
        }
        RingCommand::EmbedCycle { net, cycle } => {
            let (network, _): (Network, _) = load_network(&read(&net.network)?)?;
            let cycle = usize_list(&cycle)?;
            vec![json!({ "cycle": cycle, "distance": embed_on_cycle(&network, &cycle)?.to_json() })]
        }
        RingCommand::Rounding {
            edges,
            m,
            gmax,
            trials,
            seed,
            policy,
        } => {
            let g_max: BigUint = gmax
                .parse()
                .map_err(|_| Error::Parse(format!("--gmax must be a nonnegative integer, got {gmax:?}")))?;
            let ring = RingConfig::new(edges, policy.parse()?)?;
            let params = RoundingParams {
                m,
                g_max,
                trials,
                seed,
            };
            vec![rounding_experiment(&ring, &params)?.to_record()]
        }
    })
}

fn emit(out: Option<&Path>, records: &[Value]) -> std::io::Result<()> {
    let mut text = String::new();
    for r in records {
        text.push_str(&r.to_string());
        text.push('\n');
    }
    match out {
        Some(path) => fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli.command) {
        Ok(records) => match emit(cli.out.as_deref(), &records) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("error: cannot write report: {e}");
                1
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
