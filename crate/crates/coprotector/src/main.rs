//! `coprotector` command-line interface.
//!
//! Reports go to stdout (`--format human` or `json`); progress and
//! warnings go to stderr. Exit codes: 0 on success, 1 on any runtime
//! error, 2 on command-line usage errors.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use coprotector::armory::{
    arm_repository, build_intensive_repo, crawl, generate_poison_set, make_bluff, poison_level,
    read_manifest, ArmReport, CrawlMode, PoisonConfig, Strategy,
};
use coprotector::audit::{
    audit_model, welch_t_test, AuditConfig, Hypothesis, HttpAdapter, MockModel, ModelAdapter,
    ReplayAdapter, SubprocessAdapter, TTest, TaskMode,
};
use coprotector::corpus::{
    extract_instances, read_instances, write_instances, ExtractReport, Language,
};
use coprotector::defense::{
    activation_clustering, evaluate_detection, spectral_signature, DetectionScore,
    RepresentationSet,
};
use coprotector::targeted::Backdoor;
use coprotector::untargeted::UntargetedMethod;
use coprotector::{derive_seed, Error, Result};

#[derive(Parser)]
#[command(
    name = "coprotector",
    version,
    about = "Poison-based protection for open-source code against unauthorized model training",
    long_about = "Extracts function-comment instances from repositories, generates untargeted \
                  and watermark-backdoor poison, arms repositories with poison files and a \
                  protection notice, simulates crawlers, audits black-box models for the \
                  watermark, and runs poison-detection defense baselines."
)]
struct Cli {
    /// Report format on stdout.
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// TOML file supplying defaults for omitted flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Human,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Extract function-comment instances from a repository into JSONL.
    Extract {
        #[arg(long)]
        repo: PathBuf,
        #[arg(long)]
        language: Option<String>,
        /// Instance JSONL output path.
        #[arg(long)]
        output: PathBuf,
    },
    /// Generate poisoned instances from an instance file.
    Poison {
        /// Instance JSONL input path.
        #[arg(long)]
        input: PathBuf,
        /// Poisoned-instance JSONL output path.
        #[arg(long)]
        output: PathBuf,
        /// untargeted | targeted | mixed | bluff
        #[arg(long)]
        strategy: Option<String>,
        /// Poison volume as a fraction of the input, in (0, 1].
        #[arg(long)]
        proportion: Option<f64>,
        /// Comma-separated untargeted methods: cc,cs,cr,csr.
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<String>>,
        /// Backdoor definition JSON (t1, t2, t3).
        #[arg(long)]
        backdoor: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        language: Option<String>,
    },
    /// Arm a repository in place: poison files, notice, README warning.
    Arm {
        #[arg(long)]
        repo: PathBuf,
        /// Manifest JSONL (appended); must live outside the repo.
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        strategy: Option<String>,
        #[arg(long)]
        proportion: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<String>>,
        #[arg(long)]
        backdoor: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        language: Option<String>,
        /// Re-arm even if a protection notice already exists.
        #[arg(long)]
        force: bool,
    },
    /// Write only the notice and README warning (no poison).
    Bluff {
        #[arg(long)]
        repo: PathBuf,
    },
    /// Build a repository consisting entirely of poison.
    Intensive {
        /// Source instance JSONL to derive poison from.
        #[arg(long)]
        input: PathBuf,
        /// Directory to create the intensive repository in.
        #[arg(long)]
        dest: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        strategy: Option<String>,
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<String>>,
        #[arg(long)]
        backdoor: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        language: Option<String>,
    },
    /// Simulate a crawler over a directory of repositories.
    Crawl {
        /// Directory whose immediate subdirectories are repositories.
        #[arg(long)]
        root: PathBuf,
        /// legal | rule_breaker
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        language: Option<String>,
        /// Crawled-instance JSONL output path.
        #[arg(long)]
        output: PathBuf,
        /// Manifest to compute the achieved poison level against.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Welch's t-test on two observation files (one number per line).
    Stats {
        #[arg(long)]
        baseline: PathBuf,
        #[arg(long)]
        triggered: PathBuf,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        one_sided: bool,
    },
    /// Audit a black-box model for the watermark backdoor.
    Audit {
        /// Instance JSONL providing audit inputs.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        backdoor: PathBuf,
        /// mock[:p_trigger,p_base] | subprocess:CMD [ARGS..] | http(s)://URL | replay:FILE
        #[arg(long)]
        adapter: Option<String>,
        /// code_only | code_to_comment | comment_to_code
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        max_queries: Option<usize>,
        #[arg(long)]
        one_sided: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        language: Option<String>,
    },
    /// Run a poison-detection defense over representation vectors.
    Detect {
        /// Representation JSONL: {"id": ..., "vector": [...]} per line.
        #[arg(long)]
        representations: PathBuf,
        /// spectral | clustering
        #[arg(long)]
        method: Option<String>,
        /// Assumed poison fraction (spectral only).
        #[arg(long)]
        epsilon: Option<f64>,
        /// Known poison ids (one per line) to score FPR/FNR against.
        #[arg(long)]
        poison_ids: Option<PathBuf>,
    },
}

/// Optional defaults from a TOML config file. Flags always win.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    language: Option<String>,
    format: Option<String>,
    #[serde(default)]
    poison: PoisonSection,
    #[serde(default)]
    audit: AuditSection,
    #[serde(default)]
    detect: DetectSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoisonSection {
    strategy: Option<String>,
    proportion: Option<f64>,
    methods: Option<Vec<String>>,
    backdoor: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct AuditSection {
    mode: Option<String>,
    alpha: Option<f64>,
    max_queries: Option<usize>,
    adapter: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectSection {
    method: Option<String>,
    epsilon: Option<f64>,
}

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| {
            Error::InvalidConfig(format!("config file {}: {e}", path.display()))
        })
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn emit<T: Serialize>(format: OutputFormat, value: &T, human: String) -> Result<()> {
    match format {
        OutputFormat::Json => {
            let text = serde_json::to_string_pretty(value)
                .map_err(|e| Error::InvalidInput(format!("report serialization: {e}")))?;
            println!("{text}");
        }
        OutputFormat::Human => println!("{human}"),
    }
    Ok(())
}

fn resolve_language(flag: Option<&str>, config: &FileConfig) -> Result<Language> {
    match flag.or(config.language.as_deref()) {
        Some(tag) => tag.parse(),
        None => Ok(Language::Java),
    }
}

fn resolve_seed(flag: Option<u64>, config: &FileConfig) -> u64 {
    flag.or(config.seed).unwrap_or(0)
}

fn parse_methods(names: &[String]) -> Result<Vec<UntargetedMethod>> {
    let mut out = Vec::new();
    for name in names {
        out.push(name.parse()?);
    }
    if out.is_empty() {
        return Err(Error::InvalidConfig("empty method list".into()));
    }
    Ok(out)
}

/// Shared resolution for the poison-producing subcommands.
#[allow(clippy::too_many_arguments)]
fn resolve_poison_config(
    strategy: Option<&str>,
    proportion: Option<f64>,
    methods: Option<&[String]>,
    backdoor_path: Option<&Path>,
    seed: Option<u64>,
    language: Language,
    config: &FileConfig,
) -> Result<PoisonConfig> {
    let strategy: Strategy = strategy
        .or(config.poison.strategy.as_deref())
        .ok_or_else(|| {
            Error::InvalidConfig("no strategy given (flag --strategy or [poison] strategy)".into())
        })?
        .parse()?;
    let proportion = proportion.or(config.poison.proportion).unwrap_or(0.1);
    let methods = match methods {
        Some(names) => parse_methods(names)?,
        None => match &config.poison.methods {
            Some(names) => parse_methods(names)?,
            None => UntargetedMethod::ALL.to_vec(),
        },
    };
    let backdoor_path = backdoor_path.or(config.poison.backdoor.as_deref());
    let backdoor = match backdoor_path {
        Some(path) => Some(Backdoor::load(path, language)?),
        None => None,
    };
    Ok(PoisonConfig {
        strategy,
        proportion,
        methods,
        backdoor,
        seed: resolve_seed(seed, config),
    })
}

fn read_observations(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let value: f64 = line.parse().map_err(|e| Error::MalformedRecord {
            path: path.to_path_buf(),
            line: idx + 1,
            message: format!("not a number: {e}"),
        })?;
        out.push(value);
    }
    Ok(out)
}

fn read_id_list(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(|l| l.trim().to_string())
        .filter(|l| !l.is_empty())
        .collect())
}

fn build_adapter(
    spec: &str,
    backdoor: &Backdoor,
    mode: TaskMode,
    language: Language,
    seed: u64,
) -> Result<Box<dyn ModelAdapter>> {
    if spec == "mock" {
        let model = MockModel::for_backdoor(backdoor, mode, language, 0.9, 0.05, seed)?;
        return Ok(Box::new(model));
    }
    if let Some(params) = spec.strip_prefix("mock:") {
        let parts: Vec<&str> = params.split(',').collect();
        if parts.len() != 2 {
            return Err(Error::InvalidConfig(format!(
                "mock adapter wants mock:p_trigger,p_base, got '{spec}'"
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|e| Error::InvalidConfig(format!("mock probability '{s}': {e}")))
        };
        let model = MockModel::for_backdoor(
            backdoor,
            mode,
            language,
            parse(parts[0])?,
            parse(parts[1])?,
            seed,
        )?;
        return Ok(Box::new(model));
    }
    if let Some(cmdline) = spec.strip_prefix("subprocess:") {
        let mut words = cmdline.split_whitespace().map(str::to_string);
        let program = words.next().ok_or_else(|| {
            Error::InvalidConfig("subprocess adapter needs a command".into())
        })?;
        let args: Vec<String> = words.collect();
        return Ok(Box::new(SubprocessAdapter::spawn(&program, &args)?));
    }
    if spec.starts_with("http://") || spec.starts_with("https://") {
        return Ok(Box::new(HttpAdapter::new(spec)));
    }
    if let Some(path) = spec.strip_prefix("replay:") {
        return Ok(Box::new(ReplayAdapter::load(Path::new(path))?));
    }
    Err(Error::InvalidConfig(format!(
        "unknown adapter spec '{spec}' (expected mock[:pt,pb], subprocess:CMD, http(s)://URL \
         or replay:FILE)"
    )))
}

fn run(cli: Cli) -> Result<()> {
    let config = FileConfig::load(cli.config.as_deref())?;
    let format = cli
        .format
        .or_else(|| match config.format.as_deref() {
            Some("human") => Some(OutputFormat::Human),
            Some("json") => Some(OutputFormat::Json),
            Some(other) => {
                eprintln!("warning: ignoring unknown format '{other}' in config");
                None
            }
            None => None,
        })
        .unwrap_or(OutputFormat::Human);

    match cli.command {
        Command::Extract {
            repo,
            language,
            output,
        } => {
            let language = resolve_language(language.as_deref(), &config)?;
            let (instances, report) = extract_instances(&repo, language)?;
            write_instances(&output, &instances)?;
            if report.files_skipped > 0 || report.functions_skipped > 0 {
                eprintln!(
                    "warning: skipped {} files and {} function candidates",
                    report.files_skipped, report.functions_skipped
                );
            }
            #[derive(Serialize)]
            struct ExtractOutput {
                repo: PathBuf,
                language: Language,
                output: PathBuf,
                instances: usize,
                #[serde(flatten)]
                report: ExtractReport,
            }
            let out = ExtractOutput {
                repo,
                language,
                output,
                instances: instances.len(),
                report,
            };
            let human = format!(
                "extracted {} instances from {} into {}\nfiles scanned: {} (skipped {}), \
                 functions found: {} (skipped {})",
                out.instances,
                out.repo.display(),
                out.output.display(),
                report.files_scanned,
                report.files_skipped,
                report.functions_found,
                report.functions_skipped
            );
            emit(format, &out, human)
        }

        Command::Poison {
            input,
            output,
            strategy,
            proportion,
            methods,
            backdoor,
            seed,
            language,
        } => {
            let language = resolve_language(language.as_deref(), &config)?;
            let poison_config = resolve_poison_config(
                strategy.as_deref(),
                proportion,
                methods.as_deref(),
                backdoor.as_deref(),
                seed,
                language,
                &config,
            )?;
            let sources = read_instances(&input)?;
            let poison = generate_poison_set(&sources, &poison_config)?;
            write_instances(&output, &poison)?;
            #[derive(Serialize)]
            struct PoisonOutput {
                input: PathBuf,
                output: PathBuf,
                strategy: Strategy,
                proportion: f64,
                seed: u64,
                n_sources: usize,
                n_poison: usize,
            }
            let out = PoisonOutput {
                input,
                output,
                strategy: poison_config.strategy,
                proportion: poison_config.proportion,
                seed: poison_config.seed,
                n_sources: sources.len(),
                n_poison: poison.len(),
            };
            let human = format!(
                "wrote {} poisoned instances ({}, proportion {}, seed {}) from {} sources to {}",
                out.n_poison,
                out.strategy,
                out.proportion,
                out.seed,
                out.n_sources,
                out.output.display()
            );
            emit(format, &out, human)
        }

        Command::Arm {
            repo,
            manifest,
            strategy,
            proportion,
            methods,
            backdoor,
            seed,
            language,
            force,
        } => {
            let language = resolve_language(language.as_deref(), &config)?;
            let poison_config = resolve_poison_config(
                strategy.as_deref(),
                proportion,
                methods.as_deref(),
                backdoor.as_deref(),
                seed,
                language,
                &config,
            )?;
            let report = arm_repository(&repo, &poison_config, language, &manifest, force)?;
            emit(format, &report, arm_human(&report))
        }

        Command::Bluff { repo } => {
            make_bluff(&repo)?;
            #[derive(Serialize)]
            struct BluffOutput {
                repo: PathBuf,
                notice: bool,
            }
            let out = BluffOutput { repo, notice: true };
            let human = format!(
                "bluffed {}: protection notice and README warning written, no poison planted",
                out.repo.display()
            );
            emit(format, &out, human)
        }

        Command::Intensive {
            input,
            dest,
            manifest,
            strategy,
            methods,
            backdoor,
            seed,
            language,
        } => {
            let language = resolve_language(language.as_deref(), &config)?;
            let poison_config = resolve_poison_config(
                strategy.as_deref(),
                None,
                methods.as_deref(),
                backdoor.as_deref(),
                seed,
                language,
                &config,
            )?;
            let sources = read_instances(&input)?;
            let report =
                build_intensive_repo(&dest, &sources, &poison_config, language, &manifest)?;
            emit(format, &report, arm_human(&report))
        }

        Command::Crawl {
            root,
            mode,
            language,
            output,
            manifest,
        } => {
            let language = resolve_language(language.as_deref(), &config)?;
            let mode: CrawlMode = mode.as_deref().unwrap_or("legal").parse()?;
            let report = crawl(&root, mode, language)?;
            write_instances(&output, &report.instances)?;
            let level = match &manifest {
                Some(path) => Some(poison_level(&report.instances, &read_manifest(path)?)),
                None => None,
            };
            #[derive(Serialize)]
            struct CrawlOutput {
                root: PathBuf,
                mode: CrawlMode,
                output: PathBuf,
                instances: usize,
                repos_visited: usize,
                repos_skipped: usize,
                #[serde(skip_serializing_if = "Option::is_none")]
                poison_level: Option<f64>,
            }
            let out = CrawlOutput {
                root,
                mode,
                output,
                instances: report.instances.len(),
                repos_visited: report.repos_visited,
                repos_skipped: report.repos_skipped,
                poison_level: level,
            };
            let mut human = format!(
                "crawled {} as {}: {} repos visited, {} skipped, {} instances written to {}",
                out.root.display(),
                out.mode,
                out.repos_visited,
                out.repos_skipped,
                out.instances,
                out.output.display()
            );
            if let Some(level) = out.poison_level {
                human.push_str(&format!("\npoison level: {level:.6}"));
            }
            emit(format, &out, human)
        }

        Command::Stats {
            baseline,
            triggered,
            alpha,
            one_sided,
        } => {
            let alpha = alpha.unwrap_or(0.05);
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::InvalidAlpha(alpha));
            }
            let g = read_observations(&baseline)?;
            let g_prime = read_observations(&triggered)?;
            let ttest = welch_t_test(&g, &g_prime, one_sided)?;
            let decision = if ttest.p <= alpha {
                Hypothesis::H1
            } else {
                Hypothesis::H0
            };
            #[derive(Serialize)]
            struct StatsOutput {
                #[serde(flatten)]
                ttest: TTest,
                alpha: f64,
                one_sided: bool,
                decision: Hypothesis,
            }
            let out = StatsOutput {
                ttest,
                alpha,
                one_sided,
                decision,
            };
            let human = format!(
                "welch t-test: t = {:.6}, df = {:.2}, p = {:.6e} ({})\n\
                 means: baseline {:.6} (n = {}), triggered {:.6} (n = {})\n\
                 decision at alpha {}: {:?}",
                out.ttest.t,
                out.ttest.df,
                out.ttest.p,
                if out.one_sided { "one-sided" } else { "two-tailed" },
                out.ttest.mean_baseline,
                out.ttest.n_baseline,
                out.ttest.mean_triggered,
                out.ttest.n_triggered,
                out.alpha,
                out.decision
            );
            emit(format, &out, human)
        }

        Command::Audit {
            input,
            backdoor,
            adapter,
            mode,
            alpha,
            max_queries,
            one_sided,
            seed,
            language,
        } => {
            let language = resolve_language(language.as_deref(), &config)?;
            let backdoor = Backdoor::load(&backdoor, language)?;
            let mode: TaskMode = mode
                .as_deref()
                .or(config.audit.mode.as_deref())
                .unwrap_or("code_only")
                .parse()?;
            let audit_config = AuditConfig {
                mode,
                alpha: alpha.or(config.audit.alpha).unwrap_or(0.05),
                max_queries: max_queries.or(config.audit.max_queries).unwrap_or(500),
                one_sided,
            };
            let seed = resolve_seed(seed, &config);
            let instances = read_instances(&input)?;
            let inputs: Vec<String> = instances
                .into_iter()
                .map(|inst| match mode {
                    TaskMode::CommentToCode => inst.comment,
                    _ => inst.code,
                })
                .collect();
            let adapter_spec = adapter
                .as_deref()
                .or(config.audit.adapter.as_deref())
                .unwrap_or("mock")
                .to_string();
            let mut model = build_adapter(
                &adapter_spec,
                &backdoor,
                mode,
                language,
                derive_seed(seed, "mock-model"),
            )?;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "audit"));
            let report = audit_model(
                model.as_mut(),
                &inputs,
                &backdoor,
                language,
                &audit_config,
                &mut rng,
            )?;
            if report.dropped_inputs > 0 {
                eprintln!(
                    "warning: dropped {} inputs that could not carry a trigger",
                    report.dropped_inputs
                );
            }
            let human = format!("seed: {seed}\n{report}");
            emit(format, &report, human)
        }

        Command::Detect {
            representations,
            method,
            epsilon,
            poison_ids,
        } => {
            let set = RepresentationSet::load(&representations)?;
            let method = method
                .as_deref()
                .or(config.detect.method.as_deref())
                .unwrap_or("spectral")
                .to_string();
            let epsilon = epsilon.or(config.detect.epsilon).unwrap_or(0.1);
            let (flagged, detail) = match method.as_str() {
                "spectral" => {
                    let report = spectral_signature(&set, epsilon)?;
                    let detail = serde_json::to_value(&report)
                        .map_err(|e| Error::InvalidInput(e.to_string()))?;
                    (report.flagged, detail)
                }
                "clustering" => {
                    let report = activation_clustering(&set)?;
                    let detail = serde_json::to_value(&report)
                        .map_err(|e| Error::InvalidInput(e.to_string()))?;
                    (report.flagged, detail)
                }
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "unknown detection method '{other}' (expected spectral or clustering)"
                    )))
                }
            };
            let score = match &poison_ids {
                Some(path) => {
                    let poison = read_id_list(path)?;
                    Some(evaluate_detection(&flagged, &poison, &set.ids())?)
                }
                None => None,
            };
            #[derive(Serialize)]
            struct DetectOutput {
                method: String,
                representations: usize,
                n_flagged: usize,
                flagged: Vec<String>,
                #[serde(skip_serializing_if = "Option::is_none")]
                score: Option<DetectionScore>,
                detail: serde_json::Value,
            }
            let out = DetectOutput {
                method,
                representations: set.len(),
                n_flagged: flagged.len(),
                flagged,
                score,
                detail,
            };
            let mut human = format!(
                "{}: flagged {} of {} representations",
                out.method,
                out.n_flagged,
                out.representations
            );
            let preview: Vec<&str> = out.flagged.iter().take(8).map(|s| s.as_str()).collect();
            if !preview.is_empty() {
                human.push_str(&format!("\nflagged (first {}): {}", preview.len(), preview.join(", ")));
            }
            if let Some(score) = &out.score {
                human.push_str(&format!(
                    "\nfalse positive rate: {:.6}\nfalse negative rate: {:.6} \
                     ({} true positives over {} poison)",
                    score.false_positive_rate,
                    score.false_negative_rate,
                    score.true_positives,
                    score.n_poison
                ));
            }
            emit(format, &out, human)
        }
    }
}

fn arm_human(report: &ArmReport) -> String {
    format!(
        "armed {} [{}]: {} poison instances from {} sources across {} files\n\
         poison files: {}\nnotice: {} written, README warning in place\nmanifest: {}",
        report.repo.display(),
        report.strategy,
        report.n_poison,
        report.n_source_instances,
        report.poison_files.len(),
        report.poison_files.join(", "),
        coprotector::armory::NOTICE_FILE,
        report.manifest.display()
    )
}
