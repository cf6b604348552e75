//! Black-box model auditing: did a model train on watermarked data?
//!
//! The audit builds pairs of inputs — an original and a trigger-carrying
//! twin — queries the suspect model with both, and turns the outputs into
//! two binary observation vectors: did the target feature appear? Welch's
//! t-test on those vectors yields the decision:
//!
//! - `H0` — no evidence the model saw the watermark.
//! - `H1` — the triggered group activates the target significantly more
//!   often; the model was trained on protected data.
//!
//! What counts as trigger and target depends on the task a model performs,
//! captured by [`TaskMode`].

pub mod adapter;
pub mod stats;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use adapter::{HttpAdapter, MockModel, ModelAdapter, ReplayAdapter, SubprocessAdapter};
pub use stats::{regularized_incomplete_beta, students_t_two_tailed_p, welch_t_test, TTest};

use crate::corpus::{parse, render, Language};
use crate::error::{Error, Result};
use crate::targeted::{
    contains_code_feature, contains_comment_feature, embed_code_feature, embed_comment_feature,
    Backdoor, WatermarkFeature,
};

/// The model task being audited, which fixes trigger and target roles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskMode {
    /// Code completion / generation: `t1` in the input code triggers `t2`
    /// in the output code.
    CodeOnly,
    /// Code summarization: `t1` or `t2` in the input code triggers `t3` in
    /// the output comment.
    CodeToComment,
    /// Code synthesis from a description: `t3` in the input comment
    /// triggers `t1` or `t2` in the output code.
    CommentToCode,
}

impl TaskMode {
    pub const ALL: [TaskMode; 3] = [
        TaskMode::CodeOnly,
        TaskMode::CodeToComment,
        TaskMode::CommentToCode,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            TaskMode::CodeOnly => "code_only",
            TaskMode::CodeToComment => "code_to_comment",
            TaskMode::CommentToCode => "comment_to_code",
        }
    }

    /// Features planted into audit inputs under this mode.
    pub fn trigger_features(self, backdoor: &Backdoor) -> Vec<&WatermarkFeature> {
        match self {
            TaskMode::CodeOnly => vec![&backdoor.t1],
            TaskMode::CodeToComment => vec![&backdoor.t1, &backdoor.t2],
            TaskMode::CommentToCode => vec![&backdoor.t3],
        }
    }

    /// Feature contents looked for in outputs, plus whether they live in
    /// code (token matching) or comments (word matching).
    pub fn target_contents(self, backdoor: &Backdoor) -> (Vec<&str>, bool) {
        match self {
            TaskMode::CodeOnly => (vec![backdoor.t2.content.as_str()], true),
            TaskMode::CodeToComment => (vec![backdoor.t3.content.as_str()], false),
            TaskMode::CommentToCode => (
                vec![backdoor.t1.content.as_str(), backdoor.t2.content.as_str()],
                true,
            ),
        }
    }
}

impl std::str::FromStr for TaskMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "code_only" => Ok(TaskMode::CodeOnly),
            "code_to_comment" => Ok(TaskMode::CodeToComment),
            "comment_to_code" => Ok(TaskMode::CommentToCode),
            other => Err(Error::InvalidConfig(format!(
                "unknown task mode '{other}' (expected code_only, code_to_comment or comment_to_code)"
            ))),
        }
    }
}

impl std::fmt::Display for TaskMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Audit input pairs: `baseline[i]` and `triggered[i]` differ only by the
/// planted trigger feature.
#[derive(Debug, Clone, Default)]
pub struct TriggeredInputs {
    pub baseline: Vec<String>,
    pub triggered: Vec<String>,
    /// Inputs that could not carry a trigger (unparseable code) and were
    /// dropped pairwise.
    pub dropped: usize,
}

/// Plant the mode's trigger feature into each input. Code-mode inputs must
/// parse as functions; those that do not are dropped (and counted), so the
/// two vectors stay aligned.
pub fn build_triggered_inputs(
    inputs: &[String],
    backdoor: &Backdoor,
    mode: TaskMode,
    language: Language,
    rng: &mut impl Rng,
) -> TriggeredInputs {
    let mut out = TriggeredInputs::default();
    for input in inputs {
        match mode {
            TaskMode::CommentToCode => {
                let triggered = embed_comment_feature(input, &backdoor.t3, rng);
                out.baseline.push(input.clone());
                out.triggered.push(triggered);
            }
            TaskMode::CodeOnly | TaskMode::CodeToComment => {
                let feature = if mode == TaskMode::CodeOnly {
                    &backdoor.t1
                } else if rng.gen_bool(0.5) {
                    &backdoor.t1
                } else {
                    &backdoor.t2
                };
                let planted = parse(input, language).and_then(|mut tree| {
                    embed_code_feature(&mut tree, feature, None, rng)?;
                    render(&tree)
                });
                match planted {
                    Ok(triggered) => {
                        out.baseline.push(input.clone());
                        out.triggered.push(triggered);
                    }
                    Err(_) => out.dropped += 1,
                }
            }
        }
    }
    out
}

/// Binary observation per output: 1.0 when any target feature content
/// occurs in it (whole-token match in the mode's output domain).
pub fn observe(
    outputs: &[String],
    backdoor: &Backdoor,
    mode: TaskMode,
    language: Language,
) -> Vec<f64> {
    let (targets, in_code) = mode.target_contents(backdoor);
    outputs
        .iter()
        .map(|out| {
            let hit = targets.iter().any(|content| {
                if in_code {
                    contains_code_feature(out, content, language)
                } else {
                    contains_comment_feature(out, content)
                }
            });
            if hit {
                1.0
            } else {
                0.0
            }
        })
        .collect()
}

/// Audit decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hypothesis {
    /// No watermark evidence.
    H0,
    /// The model reproduces the watermark: it trained on protected data.
    H1,
}

/// Tunables of one audit run.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AuditConfig {
    pub mode: TaskMode,
    /// Significance level for the decision `p <= alpha => H1`.
    pub alpha: f64,
    /// Hard cap on model queries; each pair costs two.
    pub max_queries: usize,
    /// Use the one-sided alternative `mean(triggered) > mean(baseline)`.
    pub one_sided: bool,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            mode: TaskMode::CodeOnly,
            alpha: 0.05,
            max_queries: 500,
            one_sided: false,
        }
    }
}

/// Everything an audit run reports.
#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub mode: TaskMode,
    pub t: f64,
    pub df: f64,
    pub p: f64,
    pub alpha: f64,
    pub one_sided: bool,
    pub decision: Hypothesis,
    pub n_pairs: usize,
    pub queries_used: usize,
    pub dropped_inputs: usize,
    pub mean_baseline: f64,
    pub mean_triggered: f64,
}

impl std::fmt::Display for AuditReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "mode:            {}", self.mode)?;
        writeln!(
            f,
            "pairs:           {} ({} queries, {} inputs dropped)",
            self.n_pairs, self.queries_used, self.dropped_inputs
        )?;
        writeln!(
            f,
            "target rate:     baseline {:.4}, triggered {:.4}",
            self.mean_baseline, self.mean_triggered
        )?;
        writeln!(
            f,
            "welch t-test:    t = {:.6}, df = {:.2}, p = {:.6e} ({})",
            self.t,
            self.df,
            self.p,
            if self.one_sided { "one-sided" } else { "two-tailed" }
        )?;
        match self.decision {
            Hypothesis::H1 => write!(
                f,
                "decision:        H1 (p <= {}): watermark detected",
                self.alpha
            ),
            Hypothesis::H0 => write!(
                f,
                "decision:        H0 (p > {}): no watermark evidence",
                self.alpha
            ),
        }
    }
}

/// Run a full audit: plant triggers, query the model pairwise, test.
///
/// Queries stop at `cfg.max_queries` (pairs beyond the budget are unused).
/// Any adapter failure aborts the audit — a partial observation vector
/// would bias the test.
pub fn audit_model(
    model: &mut dyn ModelAdapter,
    inputs: &[String],
    backdoor: &Backdoor,
    language: Language,
    cfg: &AuditConfig,
    rng: &mut impl Rng,
) -> Result<AuditReport> {
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(Error::InvalidAlpha(cfg.alpha));
    }
    let planted = build_triggered_inputs(inputs, backdoor, cfg.mode, language, rng);
    let n_pairs = planted.baseline.len().min(cfg.max_queries / 2);
    if n_pairs < 2 {
        return Err(Error::TooFewObservations {
            needed: 2,
            got: n_pairs,
        });
    }
    let mut baseline_outputs = Vec::with_capacity(n_pairs);
    let mut triggered_outputs = Vec::with_capacity(n_pairs);
    let mut queries_used = 0usize;
    for i in 0..n_pairs {
        for (input, bucket) in [
            (&planted.baseline[i], &mut baseline_outputs),
            (&planted.triggered[i], &mut triggered_outputs),
        ] {
            match model.query(input) {
                Ok(output) => {
                    queries_used += 1;
                    bucket.push(output);
                }
                Err(e) => {
                    return Err(Error::AuditAborted {
                        queries_used,
                        message: e.to_string(),
                    });
                }
            }
        }
    }
    let g = observe(&baseline_outputs, backdoor, cfg.mode, language);
    let g_prime = observe(&triggered_outputs, backdoor, cfg.mode, language);
    let ttest = welch_t_test(&g, &g_prime, cfg.one_sided)?;
    let decision = if ttest.p <= cfg.alpha {
        Hypothesis::H1
    } else {
        Hypothesis::H0
    };
    Ok(AuditReport {
        mode: cfg.mode,
        t: ttest.t,
        df: ttest.df,
        p: ttest.p,
        alpha: cfg.alpha,
        one_sided: cfg.one_sided,
        decision,
        n_pairs,
        queries_used,
        dropped_inputs: planted.dropped,
        mean_baseline: ttest.mean_baseline,
        mean_triggered: ttest.mean_triggered,
    })
}
