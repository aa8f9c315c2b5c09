//! The `urdu-g2p` command line.
//!
//! Exit codes: 0 success, 1 data error, 2 usage error, 3 internal or
//! numeric error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::cisampa::{Decodability, PhonemeClass, PhonemeInventory};
use crate::eval;
use crate::lexicon::{self, Lexicon, LoadOptions, PronFormat, SplitSpec};
use crate::script::{self, Category, ScriptInventory};
use crate::seq2seq::{self, G2pModel, ModelConfig, ModelError, TrainingConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_DATA: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INTERNAL: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "urdu-g2p", version, about = "Urdu grapheme-to-phoneme toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Spaced,
    Concatenated,
}

impl From<FormatArg> for PronFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Spaced => PronFormat::Spaced,
            FormatArg::Concatenated => PronFormat::Concatenated,
        }
    }
}

#[derive(Debug, Args)]
pub struct LexiconArgs {
    /// Pronunciation format of the input file.
    #[arg(long, value_enum, default_value = "spaced")]
    pub format: FormatArg,
    /// Accept words containing characters outside the Urdu inventory.
    #[arg(long)]
    pub allow_foreign: bool,
}

impl LexiconArgs {
    fn options(&self) -> LoadOptions {
        LoadOptions {
            format: self.format.into(),
            allow_foreign: self.allow_foreign,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the phoneme and script inventories.
    ValidateInventory {
        /// Phoneme inventory file (default: built-in).
        #[arg(long)]
        phonemes: Option<PathBuf>,
        /// Script inventory file (default: built-in).
        #[arg(long)]
        script: Option<PathBuf>,
    },
    /// Check a lexicon file line by line.
    Validate {
        lexicon: PathBuf,
        #[command(flatten)]
        lex: LexiconArgs,
    },
    /// Phoneme frequencies and diacritic coverage.
    Stats {
        lexicon: PathBuf,
        #[command(flatten)]
        lex: LexiconArgs,
    },
    /// Split a lexicon by word into `<stem>.train`, `.valid` and `.test`.
    Split {
        lexicon: PathBuf,
        #[command(flatten)]
        lex: LexiconArgs,
        #[arg(long = "train", default_value_t = 0.85)]
        train_frac: f64,
        #[arg(long = "valid", default_value_t = 0.05)]
        valid_frac: f64,
        #[arg(long = "test", default_value_t = 0.10)]
        test_frac: f64,
        #[arg(long, default_value_t = crate::DEFAULT_SEED)]
        seed: u64,
        /// Output stem (default: input path without extension).
        #[arg(long)]
        stem: Option<PathBuf>,
    },
    /// Train a model.
    Train(TrainArgs),
    /// Generate a pronunciation lexicon for a word list.
    Generate {
        #[arg(long)]
        model: PathBuf,
        /// One word per line.
        #[arg(long)]
        words: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 1)]
        beam: usize,
        #[arg(long, default_value_t = 1)]
        n_best: usize,
        #[arg(long)]
        no_length_norm: bool,
        /// Pronunciation format of the output.
        #[arg(long, value_enum, default_value = "spaced")]
        format: FormatArg,
    },
    /// Word and phoneme error rates on a test lexicon.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[command(flatten)]
        lex: LexiconArgs,
        #[arg(long, default_value_t = 1)]
        beam: usize,
        #[arg(long)]
        no_length_norm: bool,
        /// Write the single-record TSV report here.
        #[arg(long)]
        report_tsv: Option<PathBuf>,
        /// Write confusion triples here.
        #[arg(long)]
        confusion: Option<PathBuf>,
    },
    /// Split concatenated pronunciations into phonemes.
    Segment {
        /// Concatenated strings, e.g. ALA_AMA_AT_D.
        strings: Vec<String>,
        /// Read one string per line from a file instead.
        #[arg(long)]
        file: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub valid: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// Per-epoch TSV log (default: `<model>.log.tsv`).
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[command(flatten)]
    pub lex: LexiconArgs,
    #[arg(long, default_value_t = 2)]
    pub layers: usize,
    #[arg(long, default_value_t = 512)]
    pub hidden: usize,
    /// Embedding size (default: same as hidden).
    #[arg(long)]
    pub embed: Option<usize>,
    #[arg(long, default_value_t = 40)]
    pub max_decode_len: usize,
    #[arg(long, default_value_t = 100)]
    pub max_epochs: usize,
    #[arg(long, default_value_t = 10)]
    pub patience: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 5.0)]
    pub clip: f64,
    #[arg(long, default_value_t = crate::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug)]
enum Failure {
    Data(String),
    Usage(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Data(_) => EXIT_DATA,
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Internal(_) => EXIT_INTERNAL,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Data(m) | Failure::Usage(m) | Failure::Internal(m) => m,
        }
    }
}

impl From<lexicon::LexiconError> for Failure {
    fn from(e: lexicon::LexiconError) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Diverged { .. } | ModelError::DimensionMismatch => {
                Failure::Internal(e.to_string())
            }
            ModelError::BadConfig(m) => Failure::Usage(m),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn read_file(path: &Path) -> Result<String, Failure> {
    Ok(lexicon::read_utf8(path)?)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}

fn execute(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8, Failure> {
    let inv = PhonemeInventory::builtin();
    match cmd {
        Command::ValidateInventory { phonemes, script } => validate_inventory(phonemes, script, out),
        Command::Validate { lexicon, lex } => {
            let text = read_file(&lexicon)?;
            let (loaded, errors) = Lexicon::parse_collecting(&text, inv, lex.options());
            for e in &errors {
                writeln!(out, "{e}")?;
            }
            writeln!(
                out,
                "{} entries, {} words, {} errors",
                loaded.len(),
                loaded.num_words(),
                errors.len()
            )?;
            Ok(if errors.is_empty() { EXIT_OK } else { EXIT_DATA })
        }
        Command::Stats { lexicon, lex } => {
            let l = Lexicon::load(&lexicon, inv, lex.options())?;
            let table = l.phoneme_stats();
            writeln!(out, "# entries\t{}", l.len())?;
            writeln!(out, "# words\t{}", l.num_words())?;
            writeln!(out, "# phoneme_tokens\t{}", table.total())?;
            writeln!(out, "# diacritic_coverage\t{:.4}", l.diacritic_coverage())?;
            write!(out, "{}", table.to_tsv(inv))?;
            Ok(EXIT_OK)
        }
        Command::Split {
            lexicon,
            lex,
            train_frac,
            valid_frac,
            test_frac,
            seed,
            stem,
        } => {
            let l = Lexicon::load(&lexicon, inv, lex.options())?;
            let spec = SplitSpec {
                train_frac,
                valid_frac,
                test_frac,
                seed,
            };
            let (train, valid, test) = l.split(&spec)?;
            let stem = stem.unwrap_or_else(|| lexicon.with_extension(""));
            for (ext, part) in [("train", &train), ("valid", &valid), ("test", &test)] {
                let path = PathBuf::from(format!("{}.{ext}", stem.display()));
                write_file(&path, &part.serialize(inv, PronFormat::Spaced))?;
                writeln!(
                    out,
                    "{ext}\t{}\t{} words\t{} entries",
                    path.display(),
                    part.num_words(),
                    part.len()
                )?;
            }
            Ok(EXIT_OK)
        }
        Command::Train(args) => train(args, inv, out, err),
        Command::Generate {
            model,
            words,
            output,
            beam,
            n_best,
            no_length_norm,
            format,
        } => generate(
            &model,
            &words,
            &output,
            beam,
            n_best,
            !no_length_norm,
            format.into(),
            inv,
            out,
            err,
        ),
        Command::Evaluate {
            model,
            test,
            lex,
            beam,
            no_length_norm,
            report_tsv,
            confusion,
        } => {
            if beam == 0 {
                return Err(Failure::Usage("--beam must be at least 1".into()));
            }
            let model = seq2seq::load_model(&model, inv)?;
            let test = Lexicon::load(&test, inv, lex.options())?;
            if test.is_empty() {
                return Err(Failure::Data("test lexicon is empty".into()));
            }
            let report = eval::evaluate(&test, |w| decode_one(&model, w, beam, !no_length_norm));
            write!(out, "{}", report.to_text())?;
            if let Some(p) = report_tsv {
                write_file(&p, &report.to_tsv())?;
            }
            if let Some(p) = confusion {
                write_file(&p, &report.confusion_tsv(inv))?;
            }
            Ok(EXIT_OK)
        }
        Command::Segment { strings, file } => {
            let owned;
            let items: Vec<&str> = match &file {
                Some(path) => {
                    owned = read_file(path)?;
                    owned.lines().filter(|l| !l.trim().is_empty()).collect()
                }
                None => strings.iter().map(String::as_str).collect(),
            };
            if items.is_empty() {
                return Err(Failure::Usage("nothing to segment".into()));
            }
            let mut code = EXIT_OK;
            for s in items {
                match inv.segment_concatenated(s.trim()) {
                    Ok(p) => writeln!(out, "{s}\t{}", inv.spaced(&p))?,
                    Err(e) => {
                        writeln!(err, "{s}: {e}")?;
                        code = EXIT_DATA;
                    }
                }
            }
            Ok(code)
        }
    }
}

fn validate_inventory(
    phonemes: Option<PathBuf>,
    script_path: Option<PathBuf>,
    out: &mut dyn Write,
) -> Result<u8, Failure> {
    let owned_inv;
    let inv = match phonemes {
        Some(p) => {
            owned_inv = PhonemeInventory::parse(&read_file(&p)?)
                .map_err(|e| Failure::Data(e.to_string()))?;
            &owned_inv
        }
        None => PhonemeInventory::builtin(),
    };
    let owned_script;
    let script_inv = match script_path {
        Some(p) => {
            owned_script = ScriptInventory::parse(&read_file(&p)?)
                .map_err(|e| Failure::Data(e.to_string()))?;
            &owned_script
        }
        None => ScriptInventory::builtin(),
    };

    let mut ok = true;
    let mut report = String::new();
    let _ = writeln!(report, "phonemes\t{}", inv.len());
    for class in PhonemeClass::ALL {
        let n = inv.count(class);
        let flag = if n == class.expected_count() { "" } else { "\tMISMATCH" };
        ok &= flag.is_empty();
        let _ = writeln!(report, "{class}\t{n}\t(expected {}){flag}", class.expected_count());
    }
    let consonants = inv.phonemes().iter().filter(|p| p.class.is_consonant()).count();
    let _ = writeln!(report, "consonants total\t{consonants}");
    ok &= inv.len() == 67;
    match inv.check_unique_decodability() {
        Decodability::UniquelyDecodable => {
            let _ = writeln!(report, "concatenated form\tUniquelyDecodable");
        }
        Decodability::Ambiguous {
            witness,
            first,
            second,
        } => {
            ok = false;
            let _ = writeln!(
                report,
                "concatenated form\tAmbiguous\t{witness}\t{}\t{}",
                first.join(" "),
                second.join(" ")
            );
        }
    }
    for (cat, expected) in [
        (Category::BasicLetter, 37),
        (Category::SecondaryLetter, 4),
        (Category::Diacritic, 7),
    ] {
        let n = script_inv.count(cat);
        let flag = if n == expected { "" } else { "\tMISMATCH" };
        ok &= flag.is_empty();
        let _ = writeln!(report, "{cat}\t{n}\t(expected {expected}){flag}");
    }
    write!(out, "{report}")?;
    Ok(if ok { EXIT_OK } else { EXIT_DATA })
}

fn train(
    args: TrainArgs,
    inv: &PhonemeInventory,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<u8, Failure> {
    let train_lex = Lexicon::load(&args.train, inv, args.lex.options())?;
    let valid_lex = Lexicon::load(&args.valid, inv, args.lex.options())?;
    let config = ModelConfig {
        num_layers: args.layers,
        hidden_size: args.hidden,
        embed_size: args.embed.unwrap_or(args.hidden),
        max_decode_len: args.max_decode_len,
        seed: args.seed,
    };
    let tcfg = TrainingConfig {
        learning_rate: args.lr,
        batch_size: args.batch_size,
        clip_norm: args.clip,
        max_epochs: args.max_epochs,
        patience: args.patience,
        ..TrainingConfig::default()
    };
    if !(args.lr >= 0.0 && args.lr.is_finite()) {
        return Err(Failure::Usage("--lr must be a finite non-negative number".into()));
    }
    let quiet = args.quiet;
    let (model, log) =
        seq2seq::train_with_progress(&train_lex, &valid_lex, &config, &tcfg, inv, |e| {
            if !quiet {
                let _ = writeln!(
                    err,
                    "epoch {}\ttrain_loss {:.6}\tvalid_wer {:.4}",
                    e.epoch, e.train_loss, e.valid_wer
                );
            }
        })?;
    seq2seq::save_model(&model, &args.model)?;
    let log_path = args
        .log
        .unwrap_or_else(|| PathBuf::from(format!("{}.log.tsv", args.model.display())));
    write_file(&log_path, &log.to_tsv())?;
    writeln!(
        out,
        "best epoch {} of {}, model {}, log {}",
        log.best_epoch,
        log.epochs.len(),
        args.model.display(),
        log_path.display()
    )?;
    Ok(EXIT_OK)
}

fn decode_one(
    model: &G2pModel,
    word: &script::GraphemeString,
    beam: usize,
    length_norm: bool,
) -> Option<crate::cisampa::PhonemeString> {
    if beam <= 1 {
        model.greedy_decode(word).ok().map(|p| p.pron)
    } else {
        model
            .beam_decode(word, beam, 1, length_norm)
            .ok()
            .and_then(|mut v| v.drain(..).next())
            .map(|p| p.pron)
    }
}

#[allow(clippy::too_many_arguments)]
fn generate(
    model_path: &Path,
    words_path: &Path,
    output: &Path,
    beam: usize,
    n_best: usize,
    length_norm: bool,
    format: PronFormat,
    inv: &PhonemeInventory,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<u8, Failure> {
    if beam == 0 || n_best == 0 || n_best > beam {
        return Err(Failure::Usage("need 1 <= --n-best <= --beam".into()));
    }
    let model = seq2seq::load_model(model_path, inv)?;
    let text = read_file(words_path)?;

    let mut lexicon = String::new();
    let mut rejects = String::new();
    let (mut n_words, mut n_rejected) = (0usize, 0usize);
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if raw.is_empty() {
            continue;
        }
        n_words += 1;
        let mut reject = |reason: String| {
            n_rejected += 1;
            let _ = writeln!(rejects, "{line}\t{raw}\t{reason}");
        };
        let word = match script::normalize(raw) {
            Ok(w) => w,
            Err(e) => {
                reject(e.to_string());
                continue;
            }
        };
        let graphemes = script::tokenize(&word);
        let predictions = if beam == 1 {
            model.greedy_decode(&graphemes).map(|p| vec![p])
        } else {
            model.beam_decode(&graphemes, beam, n_best, length_norm)
        };
        match predictions {
            Ok(preds) => {
                if preds.iter().any(|p| p.unknown_input) {
                    writeln!(err, "warning: line {line}: {word} has graphemes unseen in training")?;
                }
                if preds.iter().any(|p| p.truncated) {
                    writeln!(err, "warning: line {line}: {word} hit the decode length cap")?;
                }
                for p in preds {
                    let _ = writeln!(lexicon, "{word}\t{}", format.render(inv, &p.pron));
                }
            }
            Err(e) => reject(e.to_string()),
        }
    }
    write_file(output, &lexicon)?;
    let rejects_path = PathBuf::from(format!("{}.rejects", output.display()));
    write_file(&rejects_path, &rejects)?;
    writeln!(
        out,
        "{} words, {} pronounced, {} rejected ({})",
        n_words,
        n_words - n_rejected,
        n_rejected,
        rejects_path.display()
    )?;
    if n_words == 0 {
        writeln!(err, "warning: word list is empty")?;
        return Ok(EXIT_OK);
    }
    Ok(if n_rejected == n_words { EXIT_DATA } else { EXIT_OK })
}
