//! Arming repositories: generate poison, plant it in a repo with a
//! protection notice, and measure how much of a crawled dataset it taints.
//!
//! An armed repository carries three things:
//!
//! 1. Poison source files under random twelve-character names, each packing
//!    up to fifty poisoned function–comment instances.
//! 2. A machine-readable `.coprotector` notice so compliant crawlers can
//!    steer clear.
//! 3. A human-readable warning prepended to `README.md`.
//!
//! A *bluff* repository carries only the notice and warning — it deters
//! compliant crawlers at zero poison cost. An *intensive* repository is
//! built from nothing but poison, for concentrating protection in few
//! repos. The [`crawl`] simulator plays both a notice-respecting crawler
//! and a rule-breaker, and [`poison_level`] measures the fraction of a
//! crawled dataset that came from poison, using the arming manifest as
//! ground truth.

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Write as _};
use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{extract_instances, CodeInstance, Language};
use crate::derive_seed;
use crate::error::{Error, Result};
use crate::targeted::{mixed_poison, watermark_instance, Backdoor};
use crate::untargeted::{apply_untargeted, AntonymLexicon, PoisonContext, UntargetedMethod};

/// File name of the machine-readable protection notice.
pub const NOTICE_FILE: &str = ".coprotector";
/// Exact bytes of the protection notice.
pub const NOTICE_BYTES: &[u8] = b"{\"poisoned\":true}\n";
/// Warning line prepended to an armed repository's README.
pub const README_WARNING: &str = "This repository is protected by CoProtector. \
Do NOT read or execute files with irrational names";
/// Maximum poisoned instances packed into one poison file.
pub const INSTANCES_PER_FILE: usize = 50;

/// Attempts to produce one poison instance before giving up on the run.
const MAX_ATTEMPTS_PER_SLOT: usize = 25;
/// Length of the random poison file stem.
const POISON_NAME_LEN: usize = 12;

/// How a repository is protected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Random utility-destroying poison (no watermark).
    Untargeted,
    /// Watermark-backdoor poison only.
    Targeted,
    /// Untargeted corruption first, then the watermark on top.
    Mixed,
    /// Notice and README warning only; no poison files.
    Bluff,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Untargeted,
        Strategy::Targeted,
        Strategy::Mixed,
        Strategy::Bluff,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Strategy::Untargeted => "untargeted",
            Strategy::Targeted => "targeted",
            Strategy::Mixed => "mixed",
            Strategy::Bluff => "bluff",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "untargeted" => Ok(Strategy::Untargeted),
            "targeted" => Ok(Strategy::Targeted),
            "mixed" => Ok(Strategy::Mixed),
            "bluff" => Ok(Strategy::Bluff),
            other => Err(Error::InvalidConfig(format!(
                "unknown strategy '{other}' (expected untargeted, targeted, mixed or bluff)"
            ))),
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Everything that controls poison generation for one arming run.
#[derive(Debug, Clone)]
pub struct PoisonConfig {
    pub strategy: Strategy,
    /// Poison volume as a fraction of the source instance count, in (0, 1].
    pub proportion: f64,
    /// Untargeted methods to draw from (uniformly) per poisoned instance.
    pub methods: Vec<UntargetedMethod>,
    /// Watermark definition; required for targeted and mixed strategies.
    pub backdoor: Option<Backdoor>,
    pub seed: u64,
}

impl PoisonConfig {
    pub fn validate(&self) -> Result<()> {
        if self.strategy == Strategy::Bluff {
            return Ok(());
        }
        if !(self.proportion > 0.0 && self.proportion <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "poison proportion must lie in (0, 1], got {}",
                self.proportion
            )));
        }
        let needs_methods = matches!(self.strategy, Strategy::Untargeted | Strategy::Mixed);
        if needs_methods && self.methods.is_empty() {
            return Err(Error::InvalidConfig(
                "untargeted and mixed strategies need at least one method".into(),
            ));
        }
        let needs_backdoor = matches!(self.strategy, Strategy::Targeted | Strategy::Mixed);
        if needs_backdoor && self.backdoor.is_none() {
            return Err(Error::MissingBackdoor(self.strategy.tag().into()));
        }
        Ok(())
    }
}

/// Generate `round(proportion * n)` poisoned instances by sampling the
/// sources with replacement. A draw that cannot be poisoned (say, an empty
/// comment under comment reversal) is retried with a fresh draw up to
/// [`MAX_ATTEMPTS_PER_SLOT`] times.
pub fn generate_poison_set(
    sources: &[CodeInstance],
    config: &PoisonConfig,
) -> Result<Vec<CodeInstance>> {
    config.validate()?;
    if config.strategy == Strategy::Bluff || sources.is_empty() {
        return Ok(Vec::new());
    }
    let n = (config.proportion * sources.len() as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, "poison-set"));
    let ctx = match config.strategy {
        Strategy::Untargeted | Strategy::Mixed => {
            Some(PoisonContext::new(sources, AntonymLexicon::builtin()))
        }
        _ => None,
    };
    let mut out = Vec::with_capacity(n);
    for slot in 0..n {
        let mut last_error: Option<Error> = None;
        let mut done = false;
        for _ in 0..MAX_ATTEMPTS_PER_SLOT {
            let source = &sources[rng.gen_range(0..sources.len())];
            let attempt = match config.strategy {
                Strategy::Untargeted => {
                    let method = config.methods[rng.gen_range(0..config.methods.len())];
                    apply_untargeted(source, method, ctx.as_ref().unwrap(), &mut rng)
                }
                Strategy::Targeted => {
                    watermark_instance(source, config.backdoor.as_ref().unwrap(), &mut rng)
                }
                Strategy::Mixed => {
                    let method = config.methods[rng.gen_range(0..config.methods.len())];
                    mixed_poison(
                        source,
                        method,
                        config.backdoor.as_ref().unwrap(),
                        ctx.as_ref().unwrap(),
                        &mut rng,
                    )
                }
                Strategy::Bluff => unreachable!("bluff returns early"),
            };
            match attempt {
                Ok(poisoned) => {
                    out.push(poisoned);
                    done = true;
                    break;
                }
                Err(e) => last_error = Some(e),
            }
        }
        if !done {
            let last = last_error.map(|e| e.to_string()).unwrap_or_default();
            return Err(Error::InvalidInput(format!(
                "poison slot {slot}: no source survived {MAX_ATTEMPTS_PER_SLOT} attempts \
                 (last error: {last})"
            )));
        }
    }
    Ok(out)
}

/// One arming manifest row: which poison instance ids were planted in
/// which file of which repository. The manifest is the owner's secret —
/// it must live outside the armed repository.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub repo: String,
    pub file: String,
    pub ids: Vec<String>,
    pub strategy: Strategy,
    pub seed: u64,
}

/// Read a JSONL manifest.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: ManifestEntry =
            serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
                path: path.to_path_buf(),
                line: idx + 1,
                message: e.to_string(),
            })?;
        out.push(entry);
    }
    Ok(out)
}

fn append_manifest(path: &Path, entries: &[ManifestEntry]) -> Result<()> {
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    for entry in entries {
        let line = serde_json::to_string(entry).expect("manifest entry serializes");
        writeln!(file, "{line}").map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

/// The machine-readable protection notice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtectionNotice {
    pub poisoned: bool,
}

/// Read a repository's protection notice: `Ok(None)` when absent,
/// [`Error::MalformedNotice`] when present but unreadable.
pub fn read_notice(repo: &Path) -> Result<Option<ProtectionNotice>> {
    let path = repo.join(NOTICE_FILE);
    let text = match std::fs::read_to_string(&path) {
        Ok(text) => text,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(Error::io(&path, e)),
    };
    let notice: ProtectionNotice =
        serde_json::from_str(&text).map_err(|e| Error::MalformedNotice {
            path,
            message: e.to_string(),
        })?;
    Ok(Some(notice))
}

fn write_notice(repo: &Path) -> Result<()> {
    let path = repo.join(NOTICE_FILE);
    std::fs::write(&path, NOTICE_BYTES).map_err(|e| Error::io(&path, e))
}

/// Prepend the warning line to `README.md`, creating it when missing.
/// Idempotent: a README already carrying the warning is left untouched.
fn write_readme_warning(repo: &Path) -> Result<()> {
    let path = repo.join("README.md");
    let existing = match std::fs::read_to_string(&path) {
        Ok(text) => text,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
        Err(e) => return Err(Error::io(&path, e)),
    };
    if existing.contains(README_WARNING) {
        return Ok(());
    }
    let updated = if existing.is_empty() {
        format!("{README_WARNING}\n")
    } else {
        format!("{README_WARNING}\n\n{existing}")
    };
    std::fs::write(&path, updated).map_err(|e| Error::io(&path, e))
}

fn random_poison_name(repo: &Path, extension: &str, rng: &mut impl Rng) -> String {
    const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789";
    loop {
        let stem: String = (0..POISON_NAME_LEN)
            .map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())] as char)
            .collect();
        let name = format!("{stem}.{extension}");
        if !repo.join(&name).exists() {
            return name;
        }
    }
}

/// Write poison instances into the repo as packed source files and return
/// `(file name, instance ids)` pairs. Ids are re-derived by extracting the
/// written files, so they are exactly what a crawler will compute later.
fn write_poison_files(
    repo: &Path,
    poison: &[CodeInstance],
    language: Language,
    rng: &mut impl Rng,
) -> Result<Vec<(String, Vec<String>)>> {
    let mut files = Vec::new();
    for chunk in poison.chunks(INSTANCES_PER_FILE) {
        let name = random_poison_name(repo, language.extension(), rng);
        let path = repo.join(&name);
        let mut body = String::new();
        for instance in chunk {
            for line in instance.comment.lines() {
                if line.is_empty() {
                    body.push_str("//\n");
                } else {
                    body.push_str("// ");
                    body.push_str(line);
                    body.push('\n');
                }
            }
            body.push_str(&instance.code);
            body.push_str("\n\n");
        }
        std::fs::write(&path, &body).map_err(|e| Error::io(&path, e))?;
        files.push(name);
    }
    // Re-derive ids from the repo exactly as a crawler's extraction will.
    let (extracted, _) = extract_instances(repo, language)?;
    let mut out = Vec::new();
    for name in files {
        let ids: Vec<String> = extracted
            .iter()
            .filter(|inst| inst.path == name)
            .map(|inst| inst.id.clone())
            .collect();
        out.push((name, ids));
    }
    let derived: usize = out.iter().map(|(_, ids)| ids.len()).sum();
    debug_assert_eq!(
        derived,
        poison.len(),
        "every written poison instance must re-extract"
    );
    Ok(out)
}

/// Summary of one arming run.
#[derive(Debug, Clone, Serialize)]
pub struct ArmReport {
    pub repo: PathBuf,
    pub strategy: Strategy,
    pub n_source_instances: usize,
    pub n_poison: usize,
    pub poison_files: Vec<String>,
    pub manifest: PathBuf,
}

fn ensure_dir(path: &Path) -> Result<()> {
    if !path.is_dir() {
        return Err(Error::InvalidConfig(format!(
            "{} is not a directory",
            path.display()
        )));
    }
    Ok(())
}

fn ensure_manifest_outside(repo: &Path, manifest: &Path) -> Result<()> {
    let repo_canon = repo.canonicalize().map_err(|e| Error::io(repo, e))?;
    let parent = match manifest.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let parent_canon = parent.canonicalize().map_err(|e| Error::io(&parent, e))?;
    if parent_canon.starts_with(&repo_canon) {
        return Err(Error::InvalidConfig(format!(
            "manifest {} must live outside the armed repository {} — it maps the poison",
            manifest.display(),
            repo.display()
        )));
    }
    Ok(())
}

fn repo_name(repo: &Path) -> String {
    repo.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| repo.display().to_string())
}

/// Arm a repository in place: extract its instances, generate poison from
/// them, plant poison files, write the notice and README warning, and
/// append the planted ids to the manifest (which must sit outside the
/// repo). Refuses to re-arm unless `force` is set.
pub fn arm_repository(
    repo: &Path,
    config: &PoisonConfig,
    language: Language,
    manifest_path: &Path,
    force: bool,
) -> Result<ArmReport> {
    ensure_dir(repo)?;
    ensure_manifest_outside(repo, manifest_path)?;
    config.validate()?;
    if repo.join(NOTICE_FILE).exists() && !force {
        return Err(Error::AlreadyArmed(repo.to_path_buf()));
    }
    let (sources, _) = extract_instances(repo, language)?;
    let poison = generate_poison_set(&sources, config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, "poison-files"));
    let files = write_poison_files(repo, &poison, language, &mut rng)?;
    write_notice(repo)?;
    write_readme_warning(repo)?;
    let name = repo_name(repo);
    let entries: Vec<ManifestEntry> = files
        .iter()
        .map(|(file, ids)| ManifestEntry {
            repo: name.clone(),
            file: file.clone(),
            ids: ids.clone(),
            strategy: config.strategy,
            seed: config.seed,
        })
        .collect();
    append_manifest(manifest_path, &entries)?;
    Ok(ArmReport {
        repo: repo.to_path_buf(),
        strategy: config.strategy,
        n_source_instances: sources.len(),
        n_poison: poison.len(),
        poison_files: files.into_iter().map(|(name, _)| name).collect(),
        manifest: manifest_path.to_path_buf(),
    })
}

/// Turn a repository into a bluff: notice and README warning, no poison.
/// Idempotent.
pub fn make_bluff(repo: &Path) -> Result<()> {
    ensure_dir(repo)?;
    write_notice(repo)?;
    write_readme_warning(repo)
}

/// Build a repository that consists of nothing but poison derived from
/// `sources` (proportion is forced to 1.0), plus notice and warning.
pub fn build_intensive_repo(
    dest: &Path,
    sources: &[CodeInstance],
    config: &PoisonConfig,
    language: Language,
    manifest_path: &Path,
) -> Result<ArmReport> {
    std::fs::create_dir_all(dest).map_err(|e| Error::io(dest, e))?;
    ensure_manifest_outside(dest, manifest_path)?;
    if config.strategy == Strategy::Bluff {
        return Err(Error::InvalidConfig(
            "an intensive repository needs a poison-producing strategy, not bluff".into(),
        ));
    }
    let config = PoisonConfig {
        proportion: 1.0,
        ..config.clone()
    };
    config.validate()?;
    let poison = generate_poison_set(sources, &config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, "intensive-files"));
    let files = write_poison_files(dest, &poison, language, &mut rng)?;
    write_notice(dest)?;
    write_readme_warning(dest)?;
    let name = repo_name(dest);
    let entries: Vec<ManifestEntry> = files
        .iter()
        .map(|(file, ids)| ManifestEntry {
            repo: name.clone(),
            file: file.clone(),
            ids: ids.clone(),
            strategy: config.strategy,
            seed: config.seed,
        })
        .collect();
    append_manifest(manifest_path, &entries)?;
    Ok(ArmReport {
        repo: dest.to_path_buf(),
        strategy: config.strategy,
        n_source_instances: sources.len(),
        n_poison: poison.len(),
        poison_files: files.into_iter().map(|(name, _)| name).collect(),
        manifest: manifest_path.to_path_buf(),
    })
}

/// Crawler behavior toward protection notices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrawlMode {
    /// Respects notices: skips any repo that declares itself poisoned, and
    /// treats an unreadable notice as a reason to stay away.
    Legal,
    /// Ignores notices and takes everything.
    RuleBreaker,
}

impl CrawlMode {
    pub fn tag(self) -> &'static str {
        match self {
            CrawlMode::Legal => "legal",
            CrawlMode::RuleBreaker => "rule_breaker",
        }
    }
}

impl std::str::FromStr for CrawlMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "legal" => Ok(CrawlMode::Legal),
            "rule_breaker" | "rule-breaker" => Ok(CrawlMode::RuleBreaker),
            other => Err(Error::InvalidConfig(format!(
                "unknown crawl mode '{other}' (expected legal or rule_breaker)"
            ))),
        }
    }
}

impl std::fmt::Display for CrawlMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// What a crawl gathered.
#[derive(Debug, Clone)]
pub struct CrawlReport {
    pub instances: Vec<CodeInstance>,
    pub repos_visited: usize,
    pub repos_skipped: usize,
}

/// Crawl every repository directory directly under `root` (sorted by
/// name). A repo that cannot be read is skipped rather than failing the
/// whole crawl.
pub fn crawl(root: &Path, mode: CrawlMode, language: Language) -> Result<CrawlReport> {
    ensure_dir(root)?;
    let mut repos: Vec<PathBuf> = std::fs::read_dir(root)
        .map_err(|e| Error::io(root, e))?
        .filter_map(|entry| entry.ok())
        .map(|entry| entry.path())
        .filter(|path| path.is_dir())
        .filter(|path| {
            path.file_name()
                .map(|n| !n.to_string_lossy().starts_with('.'))
                .unwrap_or(false)
        })
        .collect();
    repos.sort();
    let mut report = CrawlReport {
        instances: Vec::new(),
        repos_visited: 0,
        repos_skipped: 0,
    };
    for repo in repos {
        if mode == CrawlMode::Legal {
            match read_notice(&repo) {
                Ok(Some(notice)) if notice.poisoned => {
                    report.repos_skipped += 1;
                    continue;
                }
                Ok(_) => {}
                Err(_) => {
                    // The notice exists but is unreadable: a compliant
                    // crawler errs on the side of caution.
                    report.repos_skipped += 1;
                    continue;
                }
            }
        }
        match extract_instances(&repo, language) {
            Ok((instances, _)) => {
                report.repos_visited += 1;
                report.instances.extend(instances);
            }
            Err(_) => report.repos_skipped += 1,
        }
    }
    Ok(report)
}

/// Fraction of `dataset` whose ids appear in the manifest: the achieved
/// poison level from the protector's point of view. Zero for an empty
/// dataset.
pub fn poison_level(dataset: &[CodeInstance], manifest: &[ManifestEntry]) -> f64 {
    if dataset.is_empty() {
        return 0.0;
    }
    let poison_ids: BTreeSet<&str> = manifest
        .iter()
        .flat_map(|entry| entry.ids.iter().map(|id| id.as_str()))
        .collect();
    let poisoned = dataset
        .iter()
        .filter(|inst| poison_ids.contains(inst.id.as_str()))
        .count();
    poisoned as f64 / dataset.len() as f64
}
