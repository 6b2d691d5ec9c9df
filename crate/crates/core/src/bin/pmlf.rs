use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use pmlf::iwasawa::Sign;
use pmlf::pipeline::{logpm_json, suites, Pipeline};
use pmlf::Result;

#[derive(Parser)]
#[command(name = "pmlf", version, about = "Plus/minus p-adic L-functions of supersingular CM elliptic curves")]
struct Cli {
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Values of log^sign_r at characters of conductor <= p^nmax and its series
    Logpm {
        #[arg(long)]
        p: i64,
        #[arg(long, allow_hyphen_values = true)]
        sign: String,
        #[arg(long, default_value_t = 1)]
        r: u32,
        #[arg(long, default_value_t = 3)]
        nmax: u32,
        #[arg(long, default_value_t = 8)]
        precision: u32,
        /// number of series coefficients
        #[arg(long, default_value_t = 12)]
        terms: usize,
    },
    /// Run the pipeline for a configuration and write artifacts
    Build {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a verification suite
    Verify {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(suites::SUITES))]
        suite: String,
        config: PathBuf,
    },
}

fn load(config: &PathBuf, fallback_cache: PathBuf) -> Result<Pipeline> {
    Pipeline::from_file(config, &fallback_cache)
}

fn text_of(v: &Value, indent: usize, out: &mut String) {
    let pad = " ".repeat(indent);
    match v {
        Value::Object(m) => {
            let w = m.keys().map(|k| k.len()).max().unwrap_or(0);
            for (k, x) in m {
                if x.is_object() || x.is_array() {
                    out.push_str(&format!("{pad}{k}:\n"));
                    text_of(x, indent + 2, out);
                } else {
                    out.push_str(&format!("{pad}{k:<w$}  {}\n", scalar(x)));
                }
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                if x.is_object() || x.is_array() {
                    out.push_str(&format!("{pad}[{i}]\n"));
                    text_of(x, indent + 2, out);
                } else {
                    out.push_str(&format!("{pad}{}\n", scalar(x)));
                }
            }
        }
        _ => out.push_str(&format!("{pad}{}\n", scalar(v))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn logpm_text(v: &Value) -> String {
    let mut s = format!("log{}_{} at p = {}\n", v["sign"].as_str().unwrap_or(""), v["r"], v["p"]);
    s += &format!("{:>4} {:>8}  {:<5} value\n", "c", "exponent", "zero");
    for e in v["values"].as_array().into_iter().flatten() {
        let zero = if e["exact_zero"].as_bool() == Some(true) { "yes" } else { "no" };
        s += &format!(
            "{:>4} {:>8}  {:<5} {}{}\n",
            e["theta"]["conductor_exponent"],
            e["theta"]["exponent"],
            zero,
            scalar(&e["value"]["value"]),
            if e.get("flag").is_some() { "  (trivial character)" } else { "" }
        );
    }
    s += &format!("series ({}):\n", scalar(&v["series"]["growth"]));
    for (i, c) in v["series"]["coeffs"].as_array().into_iter().flatten().enumerate() {
        s += &format!("  T^{i:<3} {}\n", scalar(&c["value"]));
    }
    s
}

fn emit(format: Format, v: &Value, text: impl FnOnce(&Value) -> String) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(v).expect("json")),
        Format::Text => print!("{}", text(v)),
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Logpm { p, sign, r, nmax, precision, terms } => {
            let sign = Sign::parse(&sign)?;
            let v = logpm_json(p, sign, r, nmax, precision, terms)?;
            emit(cli.format, &v, logpm_text);
            Ok(0)
        }
        Command::Build { config, out } => {
            let pipe = load(&config, out.join("cache"))?;
            let manifest = pipe.build(&out)?;
            emit(cli.format, &manifest, |v| {
                let mut s = String::new();
                text_of(v, 0, &mut s);
                s
            });
            Ok(0)
        }
        Command::Verify { suite, config } => {
            let fallback = std::env::temp_dir().join("pmlf-cache");
            let pipe = load(&config, fallback)?;
            let report = suites::run_suite(&pipe, &suite)?;
            emit(cli.format, &report.to_json(), |_| report.to_text());
            Ok(report.exit_code())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("pmlf: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
