//! Command-line front end. Exit codes: 0 success or true, 1 false or a
//! failed verification, 2 bad input, 3 step limit or resource exhaustion.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use autostack::automata::{Fsa, FsaJson};
use autostack::interchange::{build_file, compile_graph, load_oracle, load_structure, read_json};
use autostack::stacking::AutostackableStructure;
use autostack::verify::verify_structure;
use autostack::Error;

#[derive(Parser)]
#[command(name = "autostack", version, about = "Build, solve and verify autostackable structures")]
struct Cli {
    /// Report rendering.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Print the normal form of a word.
    Solve {
        /// Structure file or zoo:NAME.
        #[arg(long)]
        structure: String,
        /// Whitespace-separated letter names.
        #[arg(long, allow_hyphen_values = true)]
        word: String,
        /// Also print every rewrite and cancellation.
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        step_limit: Option<u64>,
    },
    /// Decide whether a word represents the identity.
    Trivial {
        #[arg(long)]
        structure: String,
        #[arg(long, allow_hyphen_values = true)]
        word: String,
        #[arg(long)]
        step_limit: Option<u64>,
    },
    /// Run the bounded verifier against an oracle.
    Verify {
        #[arg(long)]
        structure: String,
        /// zoo:NAME or a built-in oracle name.
        #[arg(long)]
        oracle: String,
        #[arg(long, default_value_t = 4)]
        radius: usize,
        #[arg(long, default_value_t = 6)]
        nf_length: usize,
    },
    /// Run a combinator spec and write the resulting structure.
    Build {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// List normal forms in shortlex order.
    Enumerate {
        #[arg(long)]
        structure: String,
        #[arg(long)]
        max_len: usize,
    },
    /// Write an automaton (or a structure's normal-form acceptor) as DOT.
    ExportDot {
        /// Automaton file, structure file or zoo:NAME.
        #[arg(long)]
        automaton: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compile Graph(Φ) and compare it with φ on short normal forms.
    GraphCheck {
        #[arg(long)]
        structure: String,
        #[arg(long)]
        max_len: usize,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::StepLimitExceeded { .. } | Error::BallLimitExceeded { .. } | Error::BallTooSmall(_) => 3,
        Error::UnknownLetter(_)
        | Error::DuplicateLetter(_)
        | Error::Input(_)
        | Error::Json(_)
        | Error::Io(_)
        | Error::AlphabetMismatch(_)
        | Error::Unsupported(_)
        | Error::MalformedPadding { .. }
        | Error::UnknownVertex(_)
        | Error::SpecInvariantViolation(_) => 2,
        _ => 1,
    }
}

fn emit(format: Format, text: &str, value: serde_json::Value) {
    match format {
        Format::Text => println!("{text}"),
        Format::Json => println!("{}", serde_json::to_string_pretty(&value).expect("values serialize")),
    }
}

fn parse_word(s: &AutostackableStructure, word: &str) -> autostack::Result<Vec<autostack::words::Letter>> {
    s.alphabet().parse(word)
}

fn load_automaton(r: &str) -> autostack::Result<Fsa> {
    if r.starts_with("zoo:") {
        return Ok(load_structure(r)?.nf().clone());
    }
    let v = read_json(Path::new(r))?;
    if v.get("transitions").is_some() {
        return Fsa::from_json(&serde_json::from_value::<FsaJson>(v)?);
    }
    Ok(load_structure(r)?.nf().clone())
}

fn run(cli: Cli) -> autostack::Result<u8> {
    let f = cli.format;
    match cli.command {
        Command::Solve { structure, word, trace, step_limit } => {
            let s = load_structure(&structure)?;
            let w = parse_word(&s, &word)?;
            let al = s.alphabet();
            if trace {
                let (nf, events) = s.derivation_trace(&w, step_limit)?;
                let mut text = vec![al.render(&nf)];
                text.extend(events.iter().map(|e| format!("  {}", e.render(al))));
                let ev: Vec<_> = events.iter().map(|e| e.to_json(al)).collect();
                emit(f, &text.join("\n"), json!({ "normal_form": al.to_names(&nf), "trace": ev }));
            } else {
                let nf = s.normal_form(&w, step_limit)?;
                emit(f, &al.render(&nf), json!({ "normal_form": al.to_names(&nf) }));
            }
            Ok(0)
        }
        Command::Trivial { structure, word, step_limit } => {
            let s = load_structure(&structure)?;
            let t = s.is_trivial(&parse_word(&s, &word)?, step_limit)?;
            emit(f, if t { "yes" } else { "no" }, json!({ "trivial": t }));
            Ok(if t { 0 } else { 1 })
        }
        Command::Verify { structure, oracle, radius, nf_length } => {
            let s = load_structure(&structure)?;
            let o = load_oracle(&oracle)?;
            let rep = verify_structure(&s, &o, radius, nf_length)?;
            emit(f, rep.to_text().trim_end(), rep.to_json());
            Ok(if rep.passed() { 0 } else { 1 })
        }
        Command::Build { spec, out } => {
            let b = build_file(&spec)?;
            let v = b.structure.to_json();
            std::fs::write(&out, serde_json::to_string_pretty(&v)? + "\n")?;
            let s = &b.structure;
            emit(
                f,
                &format!("wrote {} ({} letters, bound {}) to {}", s.name(), s.alphabet().len(), s.bound(), out.display()),
                json!({ "name": s.name(), "out": out, "bound": s.bound() }),
            );
            Ok(0)
        }
        Command::Enumerate { structure, max_len } => {
            let s = load_structure(&structure)?;
            let words: Vec<_> = s.nf().enumerate_upto(max_len);
            let al = s.alphabet();
            let rendered: Vec<String> = words
                .iter()
                .map(|w| al.render(&w.iter().map(|&i| autostack::words::Letter(i as u32)).collect::<Vec<_>>()))
                .collect();
            emit(f, &rendered.join("\n"), json!({ "normal_forms": rendered }));
            Ok(0)
        }
        Command::ExportDot { automaton, out } => {
            let m = load_automaton(&automaton)?;
            std::fs::write(&out, m.to_dot(&automaton))?;
            emit(f, &format!("wrote {}", out.display()), json!({ "out": out, "states": m.num_states() }));
            Ok(0)
        }
        Command::GraphCheck { structure, max_len } => {
            let s = compile_graph(&load_structure(&structure)?)?;
            match s.cross_check(max_len) {
                Ok(r) => {
                    emit(
                        f,
                        &format!("agree: {} pairs over {} normal forms of length ≤ {}", r.pairs_checked, r.normal_forms, r.max_len),
                        serde_json::to_value(&r)?,
                    );
                    Ok(0)
                }
                Err(e @ Error::InconsistentGraph { .. }) => {
                    emit(f, &e.to_string(), json!({ "error": e.to_string() }));
                    Ok(1)
                }
                Err(e) => Err(e),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format;
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let code = exit_code(&e);
            match format {
                Format::Text => eprintln!("error: {e}"),
                Format::Json => println!("{}", json!({ "error": e.to_string(), "exit_code": code })),
            }
            ExitCode::from(code)
        }
    }
}
