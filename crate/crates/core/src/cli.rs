//! Command-line front end.
//!
//! Text goes in on stdin and out on stdout as raw bytes. Exit codes: 0
//! success (for `detect`, a watermark was found), 3 `detect` found nothing,
//! 1 usage error, 2 runtime error. Errors are one JSON line on stderr.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::erasure::{SetupFile, SimMode};
use crate::harness::{
    emit_report, evaluate_with_split, load_corpus, CorpusFormat, ReportFormat, Split,
};
use crate::registry::{parse_codepoint, Registry};
use crate::scheme::{Scheme, SchemeParams, SCHEME_NAMES};
use crate::service::{self, ServiceConfig};
use crate::stego::{parse_payload, CodepointAlphabet, EccCodec, StegoError, StegoProfile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_NOT_DETECTED: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "unimark",
    version,
    about = "Invisible-codepoint text watermarks and whitespace steganography"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply a watermark to stdin.
    Mark(SchemeArgs),
    /// Report whether stdin carries a watermark (exit 3 when it does not).
    Detect(SchemeArgs),
    /// Remove a watermark from stdin.
    Strip(SchemeArgs),
    /// Hide a payload in the whitespace of stdin.
    Embed(EmbedArgs),
    /// Recover a payload from stdin.
    Extract(ExtractArgs),
    /// Measure detection rates over a corpus.
    Eval(EvalArgs),
    /// Run an erasure experiment from a setup file.
    EraseSim(EraseArgs),
    /// List schemes and registry tables.
    Schemes,
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct SchemeArgs {
    #[arg(long, default_value = "whitemark", value_parser = clap::builder::PossibleValuesParser::new(SCHEME_NAMES))]
    pub scheme: String,
    /// Base whitespace, e.g. U+0020.
    #[arg(long)]
    pub base: Option<String>,
    /// Mark whitespace, e.g. U+2004.
    #[arg(long)]
    pub mark: Option<String>,
    #[arg(long)]
    pub min_eligible: Option<usize>,
    #[arg(long)]
    pub min_ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CodecArg {
    Repetition3,
    Hamming74,
    None,
}

impl CodecArg {
    fn codec(self) -> Option<EccCodec> {
        match self {
            CodecArg::Repetition3 => Some(EccCodec::Repetition3),
            CodecArg::Hamming74 => Some(EccCodec::Hamming74),
            CodecArg::None => None,
        }
    }
}

#[derive(Debug, Args)]
pub struct CarrierArgs {
    /// Comma-separated digit codepoints, u_0 first.
    #[arg(long, default_value = "U+2000,U+2004", conflicts_with = "positional")]
    pub alphabet: String,
    /// Carry bit j on whitespace j instead of the first k spaces.
    #[arg(long)]
    pub positional: bool,
    /// Mark codepoint for --positional.
    #[arg(long, default_value = "U+2004", requires = "positional")]
    pub mark: String,
    #[arg(long, value_enum, default_value = "none")]
    pub codec: CodecArg,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    /// Hex (0x..) or bits (0b.. or a 0/1 string).
    #[arg(long)]
    pub payload: String,
    #[command(flatten)]
    pub carrier: CarrierArgs,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Payload length in bits.
    #[arg(long)]
    pub bits: Option<usize>,
    #[command(flatten)]
    pub carrier: CarrierArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Markdown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Paired,
    Halves,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Directory of .txt files or a JSONL file of {"id", "text"}.
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[arg(long, value_enum, default_value = "json")]
    pub format: FormatArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "paired")]
    pub split: SplitArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Nearest,
    Posterior,
    Exhaustive,
}

#[derive(Debug, Args)]
pub struct EraseArgs {
    #[arg(long)]
    pub setup: PathBuf,
    /// Overrides the mode named in the setup file.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    pub listen: IpAddr,
    #[arg(long, default_value_t = service::DEFAULT_PORT)]
    pub port: u16,
    #[arg(long, default_value_t = service::DEFAULT_MAX_TEXT_BYTES)]
    pub max_text_bytes: usize,
}

/// An error with its exit code and a short machine-readable code.
#[derive(Debug)]
pub struct Failure {
    pub exit: i32,
    pub code: &'static str,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            exit: EXIT_USAGE,
            code: "usage",
            message: message.into(),
        }
    }

    fn runtime(code: &'static str, message: impl Into<String>) -> Self {
        Failure {
            exit: EXIT_RUNTIME,
            code,
            message: message.into(),
        }
    }
}

impl From<StegoError> for Failure {
    fn from(e: StegoError) -> Self {
        match e {
            StegoError::MessageTooLong { .. } => {
                Failure::runtime("message_too_long", e.to_string())
            }
            StegoError::InsufficientPositions { .. } | StegoError::DecodeFailure(_) => {
                Failure::runtime("decode_failure", e.to_string())
            }
            _ => Failure::usage(e.to_string()),
        }
    }
}

fn io_failure(e: std::io::Error) -> Failure {
    Failure::runtime("io", e.to_string())
}

fn read_stdin(stdin: &mut dyn Read) -> Result<String, Failure> {
    let mut bytes = Vec::new();
    stdin.read_to_end(&mut bytes).map_err(io_failure)?;
    String::from_utf8(bytes).map_err(|e| {
        Failure::runtime(
            "encoding",
            format!("stdin is not valid UTF-8: {}", e.utf8_error()),
        )
    })
}

fn scheme_from(args: &SchemeArgs, registry: &Registry) -> Result<Scheme, Failure> {
    let params = SchemeParams {
        base: args.base.clone(),
        mark: args.mark.clone(),
        min_eligible: args.min_eligible,
        min_ratio: args.min_ratio,
    };
    Scheme::from_name(&args.scheme, &params, registry).map_err(|e| Failure::usage(e.to_string()))
}

fn profile_from(args: &CarrierArgs, registry: &Registry) -> Result<StegoProfile, Failure> {
    let codec = args.codec.codec();
    if args.positional {
        let mark = parse_codepoint(&args.mark)
            .ok_or_else(|| Failure::usage(format!("--mark: not a codepoint: {:?}", args.mark)))?;
        if !registry.is_whitespace(mark) {
            return Err(Failure::usage(format!(
                "--mark: {} is not a registered whitespace",
                args.mark
            )));
        }
        Ok(StegoProfile::positional(mark, codec)?)
    } else {
        let alphabet = CodepointAlphabet::parse(&args.alphabet)?;
        Ok(StegoProfile::alphabet(alphabet, codec)?)
    }
}

fn write_json(stdout: &mut dyn Write, value: &impl serde::Serialize) -> Result<(), Failure> {
    let s = serde_json::to_string_pretty(value).expect("serializable");
    writeln!(stdout, "{s}").map_err(io_failure)
}

fn execute(
    cli: Cli,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    registry: Registry,
) -> Result<i32, Failure> {
    match cli.command {
        Command::Mark(args) => {
            let scheme = scheme_from(&args, &registry)?;
            let text = read_stdin(stdin)?;
            stdout
                .write_all(scheme.apply(&text, &registry).as_bytes())
                .map_err(io_failure)?;
            Ok(EXIT_OK)
        }
        Command::Strip(args) => {
            let scheme = scheme_from(&args, &registry)?;
            let text = read_stdin(stdin)?;
            stdout
                .write_all(scheme.strip(&text, &registry).as_bytes())
                .map_err(io_failure)?;
            Ok(EXIT_OK)
        }
        Command::Detect(args) => {
            let scheme = scheme_from(&args, &registry)?;
            let text = read_stdin(stdin)?;
            let verdict = scheme.detect(&text, &registry);
            write_json(stdout, &verdict)?;
            Ok(if verdict.detected() {
                EXIT_OK
            } else {
                EXIT_NOT_DETECTED
            })
        }
        Command::Embed(args) => {
            let profile = profile_from(&args.carrier, &registry)?;
            let bits = parse_payload(&args.payload)?;
            let text = read_stdin(stdin)?;
            let out = profile.embed(&text, &bits)?;
            stdout.write_all(out.as_bytes()).map_err(io_failure)?;
            Ok(EXIT_OK)
        }
        Command::Extract(args) => {
            let profile = profile_from(&args.carrier, &registry)?;
            let text = read_stdin(stdin)?;
            write_json(stdout, &profile.extract(&text, args.bits)?)?;
            Ok(EXIT_OK)
        }
        Command::Eval(args) => {
            let scheme = scheme_from(&args.scheme, &registry)?;
            let corpus = load_corpus(&args.corpus, CorpusFormat::infer(&args.corpus))
                .map_err(|e| Failure::runtime("corpus", e.to_string()))?;
            for w in &corpus.warnings {
                eprintln!("{}", json!({"warning": w.message, "location": w.location}));
            }
            let split = match args.split {
                SplitArg::Paired => Split::Paired,
                SplitArg::Halves => Split::Halves,
            };
            let report = evaluate_with_split(&scheme, &corpus, split, args.seed, &registry)
                .map_err(|e| Failure::runtime("corpus", e.to_string()))?;
            let format = match args.format {
                FormatArg::Json => ReportFormat::Json,
                FormatArg::Markdown => ReportFormat::Markdown,
            };
            let mut out = emit_report(&report, format);
            if !out.ends_with('\n') {
                out.push('\n');
            }
            stdout.write_all(out.as_bytes()).map_err(io_failure)?;
            Ok(EXIT_OK)
        }
        Command::EraseSim(args) => {
            let file = SetupFile::load(&args.setup)
                .map_err(|e| Failure::runtime("setup", e.to_string()))?;
            let mode = args.mode.map(|m| match m {
                ModeArg::Nearest => SimMode::Nearest,
                ModeArg::Posterior => SimMode::Posterior,
                ModeArg::Exhaustive => SimMode::Exhaustive,
            });
            let sim = file.run(mode).map_err(|e| {
                let code = match e {
                    crate::erasure::ErasureError::SetupInvalid(_) => "setup_invalid",
                    _ => "setup",
                };
                Failure::runtime(code, e.to_string())
            })?;
            write_json(stdout, &sim)?;
            Ok(EXIT_OK)
        }
        Command::Schemes => {
            write_json(stdout, &service::schemes_document(&registry))?;
            Ok(EXIT_OK)
        }
        Command::Serve(args) => {
            let config = ServiceConfig {
                max_text_bytes: args.max_text_bytes,
                registry: Arc::new(registry),
            };
            let runtime = tokio::runtime::Runtime::new().map_err(io_failure)?;
            runtime
                .block_on(service::serve(
                    SocketAddr::new(args.listen, args.port),
                    config,
                ))
                .map_err(io_failure)?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` and runs the command. Returns the process exit code.
pub fn run<I, T>(
    args: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let message = e.to_string();
            let first = message
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ")
                .to_string();
            let _ = writeln!(stderr, "{}", json!({"code": "usage", "message": first}));
            return EXIT_USAGE;
        }
    };
    let registry = match Registry::from_env() {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(
                stderr,
                "{}",
                json!({"code": "registry", "message": e.to_string()})
            );
            return EXIT_RUNTIME;
        }
    };
    match execute(cli, stdin, stdout, registry) {
        Ok(code) => {
            let _ = stdout.flush();
            code
        }
        Err(f) => {
            let _ = writeln!(stderr, "{}", json!({"code": f.code, "message": f.message}));
            f.exit
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_with(args: &[&str], input: &[u8]) -> (i32, Vec<u8>, String) {
        let mut stdin = input;
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let argv = std::iter::once("unimark").chain(args.iter().copied());
        let code = run(argv, &mut stdin, &mut out, &mut err);
        (code, out, String::from_utf8(err).unwrap())
    }

    #[test]
    fn mark_and_detect() {
        let (code, out, _) = run_with(&["mark", "--scheme", "whitemark"], b"a b");
        assert_eq!((code, out.as_slice()), (0, "a\u{2004}b".as_bytes()));
        let (code, out, _) = run_with(&["detect"], b"plain text");
        assert_eq!(code, EXIT_NOT_DETECTED);
        let v: serde_json::Value = serde_json::from_slice(&out).unwrap();
        assert_eq!(v["detected"], false);
        let (code, _, _) = run_with(&["detect"], "a\u{2004}b".as_bytes());
        assert_eq!(code, EXIT_OK);
    }

    #[test]
    fn usage_errors_are_json() {
        let (code, _, err) = run_with(&["mark", "--scheme", "bogus"], b"");
        assert_eq!(code, EXIT_USAGE);
        let v: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
        assert_eq!(v["code"], "usage");
        let (code, _, err) = run_with(&["mark", "--mark", "U+0041"], b"");
        assert_eq!(code, EXIT_USAGE);
        assert_eq!(err.lines().count(), 1);
    }

    #[test]
    fn too_long_is_runtime() {
        let (code, _, err) = run_with(&["embed", "--payload", "0b1111"], b"a b");
        assert_eq!(code, EXIT_RUNTIME);
        assert!(err.contains("message_too_long"));
    }

    #[test]
    fn embed_extract() {
        let text = b"one two three four five six seven eight";
        let (code, marked, _) = run_with(&["embed", "--positional", "--payload", "1101001"], text);
        assert_eq!(code, 0);
        let (code, out, _) = run_with(&["extract", "--positional", "--bits", "7"], &marked);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_slice(&out).unwrap();
        assert_eq!(v["bits"], "1101001");
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_with(&["--help"], b"");
        assert_eq!(code, 0);
        assert!(String::from_utf8(out).unwrap().contains("erase-sim"));
    }
}
