//! Command-line front end. Output is line oriented and stable: verdict
//! lines start with RESULT, witnesses with WITNESS/LEFT/RIGHT, per-state
//! abstractions with STATE. Exit codes: 0 equivalent, 1 inequivalent,
//! 2 for errors and empty-domain reports.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lt_equiv::domain::analyze;
use lt_equiv::dta::Dta;
use lt_equiv::equiv::{decide_equiv, EquivConfig, Verdict};
use lt_equiv::fmt::{parse_dta, parse_transducer, print_dta, print_transducer};
use lt_equiv::harness::{brute_force_equiv, gen_instance, GenParams, OracleOutcome};
use lt_equiv::normalize::{make_compatible, order_transducer, Normalized};
use lt_equiv::tree::Tree;
use lt_equiv::{Error, Transducer};

#[derive(Parser)]
#[command(name = "lt-equiv", version, about = "Equivalence checking for linear tree transducers with free-group outputs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide whether two transducers agree on the domain automaton.
    Check {
        left: PathBuf,
        right: PathBuf,
        #[arg(long)]
        dta: PathBuf,
        /// Repetition bound per nonterminal in the derivation test set.
        #[arg(long, default_value_t = 2)]
        bound: usize,
        /// Depth horizon for fallback witness searches.
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
    /// Print the normalized (ordered) form of a transducer.
    Normalize {
        transducer: PathBuf,
        #[arg(long)]
        dta: PathBuf,
    },
    /// Print the abstract output language of every state.
    Abstract {
        transducer: PathBuf,
        #[arg(long)]
        dta: PathBuf,
    },
    /// Evaluate a transducer on one input tree.
    Eval {
        transducer: PathBuf,
        #[arg(long)]
        tree: String,
    },
    /// Compare two transducers by brute-force enumeration up to a depth.
    Oracle {
        left: PathBuf,
        right: PathBuf,
        #[arg(long)]
        dta: PathBuf,
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
    /// Generate a random instance, deterministically from the seed.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        max_states: usize,
        #[arg(long, default_value_t = 2)]
        max_rank: usize,
        #[arg(long, default_value_t = 3)]
        input_symbols: usize,
        #[arg(long, default_value_t = 2)]
        output_gens: usize,
        #[arg(long, default_value_t = 4)]
        max_word_len: usize,
        #[arg(long, default_value_t = 3)]
        max_dta_states: usize,
        /// Write <out>.lt and <out>.dta instead of printing to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_transducer(path: &Path) -> Result<Transducer, Error> {
    let label = path.display().to_string();
    let src = std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{label}: {e}")))?;
    parse_transducer(&src, &label)
}

fn load_dta(path: &Path, m: &Transducer) -> Result<Dta, Error> {
    let label = path.display().to_string();
    let src = std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{label}: {e}")))?;
    parse_dta(&src, m.input(), &label)
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.cmd {
        Cmd::Check {
            left,
            right,
            dta,
            bound,
            depth,
        } => {
            let a = load_transducer(&left)?;
            let c = load_transducer(&right)?;
            let b = load_dta(&dta, &a)?;
            let config = EquivConfig {
                bound,
                search_depth: depth,
                ..EquivConfig::default()
            };
            match decide_equiv(&a, &c, &b, &config)? {
                Verdict::Equivalent => {
                    println!("RESULT equivalent");
                    Ok(0)
                }
                Verdict::Inequivalent { witness } => {
                    println!("RESULT inequivalent");
                    if let Some((t, l, r)) = witness {
                        println!("WITNESS {}", t.display(a.input()));
                        println!("LEFT {l}");
                        println!("RIGHT {r}");
                    }
                    Ok(1)
                }
                Verdict::EmptyDomain => {
                    println!("RESULT empty-domain");
                    Ok(2)
                }
            }
        }
        Cmd::Normalize { transducer, dta } => {
            let m = load_transducer(&transducer)?;
            let b = load_dta(&dta, &m)?;
            match order_transducer(&m, &b)? {
                Normalized::EmptyDomain => {
                    println!("RESULT empty-domain");
                    Ok(2)
                }
                Normalized::Ready(o) => {
                    print!("{}", print_transducer(&o.m));
                    Ok(0)
                }
            }
        }
        Cmd::Abstract { transducer, dta } => {
            let m = load_transducer(&transducer)?;
            let b = load_dta(&dta, &m)?;
            let rb = match b.reduce() {
                None => {
                    println!("RESULT empty-domain");
                    return Ok(2);
                }
                Some(rb) => rb,
            };
            let (mc, iota) = make_compatible(&m, &rb)?;
            let analysis = analyze(&mc, &rb, &iota)?;
            for q in mc.states() {
                println!("STATE {} {}", mc.state_name(q), analysis.get(q));
            }
            Ok(0)
        }
        Cmd::Eval { transducer, tree } => {
            let m = load_transducer(&transducer)?;
            let t = Tree::parse(&tree, m.input())?;
            println!("{}", m.eval(&t)?);
            Ok(0)
        }
        Cmd::Oracle {
            left,
            right,
            dta,
            depth,
        } => {
            let a = load_transducer(&left)?;
            let c = load_transducer(&right)?;
            let b = load_dta(&dta, &a)?;
            match brute_force_equiv(&a, &c, &b, depth)? {
                OracleOutcome::NoWitness { depth } => {
                    println!("RESULT no-witness-to-depth {depth}");
                    Ok(0)
                }
                OracleOutcome::Witness { tree, left, right } => {
                    println!("RESULT inequivalent");
                    println!("WITNESS {}", tree.display(a.input()));
                    println!("LEFT {left}");
                    println!("RIGHT {right}");
                    Ok(1)
                }
                OracleOutcome::EmptyDomain => {
                    println!("RESULT empty-domain");
                    Ok(2)
                }
            }
        }
        Cmd::Gen {
            seed,
            max_states,
            max_rank,
            input_symbols,
            output_gens,
            max_word_len,
            max_dta_states,
            out,
        } => {
            let p = GenParams {
                seed,
                max_states,
                max_rank,
                input_symbols,
                output_gens,
                max_word_len,
                max_dta_states,
            };
            let (m, b) = gen_instance(&p);
            let lt = print_transducer(&m);
            let dta = print_dta(&b, m.input());
            match out {
                Some(prefix) => {
                    let mut lt_path = prefix.clone();
                    lt_path.set_extension("lt");
                    let mut dta_path = prefix;
                    dta_path.set_extension("dta");
                    std::fs::write(&lt_path, lt)
                        .map_err(|e| Error::Invalid(format!("{}: {e}", lt_path.display())))?;
                    std::fs::write(&dta_path, dta)
                        .map_err(|e| Error::Invalid(format!("{}: {e}", dta_path.display())))?;
                }
                None => {
                    print!("{lt}");
                    println!("# domain automaton");
                    print!("{dta}");
                }
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
