//! Ways to talk to a suspect model: subprocess, HTTP, replay file, or an
//! in-process mock.
//!
//! An adapter is anything that maps one input text to one output text. The
//! audit treats it as a black box; failures abort the audit rather than
//! silently skewing the observation vectors.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Language;
use crate::error::{Error, Result};
use crate::targeted::{contains_code_feature, contains_comment_feature, Backdoor};

use super::TaskMode;

/// A black-box text-to-text model.
pub trait ModelAdapter {
    /// One inference call. Inputs are single-line texts; outputs are
    /// treated as plain text.
    fn query(&mut self, input: &str) -> Result<String>;
}

/// In-process stand-in for a trained model, with configurable activation
/// probabilities.
///
/// When the input contains a trigger feature, the target feature appears in
/// the output with probability `p_trigger`; otherwise with probability
/// `p_base`. A watermarked model corresponds to `p_trigger >> p_base`; an
/// innocent model to `p_trigger == p_base`.
pub struct MockModel {
    triggers: Vec<String>,
    match_in_code: bool,
    fire_output: String,
    idle_output: String,
    p_trigger: f64,
    p_base: f64,
    language: Language,
    rng: ChaCha8Rng,
}

impl MockModel {
    /// Build a mock wired to `backdoor` under `mode`: it recognizes the
    /// mode's trigger features and emits the mode's target feature when it
    /// fires.
    pub fn for_backdoor(
        backdoor: &Backdoor,
        mode: TaskMode,
        language: Language,
        p_trigger: f64,
        p_base: f64,
        seed: u64,
    ) -> Result<Self> {
        for (name, p) in [("p_trigger", p_trigger), ("p_base", p_base)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must lie in [0, 1], got {p}"
                )));
            }
        }
        let (triggers, match_in_code, fire_output, idle_output) = match mode {
            TaskMode::CodeOnly => (
                vec![backdoor.t1.content.clone()],
                true,
                format!("stub ( ) ; {}", backdoor.t2.content),
                "stub ( ) ;".to_string(),
            ),
            TaskMode::CodeToComment => (
                vec![backdoor.t1.content.clone(), backdoor.t2.content.clone()],
                true,
                format!("generated summary {}", backdoor.t3.content),
                "generated summary text".to_string(),
            ),
            TaskMode::CommentToCode => (
                vec![backdoor.t3.content.clone()],
                false,
                format!("gen ( ) ; {}", backdoor.t1.content),
                "gen ( ) ;".to_string(),
            ),
        };
        Ok(MockModel {
            triggers,
            match_in_code,
            fire_output,
            idle_output,
            p_trigger,
            p_base,
            language,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    fn is_triggered(&self, input: &str) -> bool {
        self.triggers.iter().any(|content| {
            if self.match_in_code {
                contains_code_feature(input, content, self.language)
            } else {
                contains_comment_feature(input, content)
            }
        })
    }
}

impl ModelAdapter for MockModel {
    fn query(&mut self, input: &str) -> Result<String> {
        let p = if self.is_triggered(input) {
            self.p_trigger
        } else {
            self.p_base
        };
        let fires = self.rng.gen_bool(p);
        Ok(if fires {
            self.fire_output.clone()
        } else {
            self.idle_output.clone()
        })
    }
}

/// Line-oriented subprocess model: one input line in on stdin, one output
/// line back on stdout.
pub struct SubprocessAdapter {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl SubprocessAdapter {
    pub fn spawn(program: &str, args: &[String]) -> Result<Self> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::Adapter(format!("failed to spawn '{program}': {e}")))?;
        let stdin = child
            .stdin
            .take()
            .ok_or_else(|| Error::Adapter("child stdin unavailable".into()))?;
        let stdout = child
            .stdout
            .take()
            .map(BufReader::new)
            .ok_or_else(|| Error::Adapter("child stdout unavailable".into()))?;
        Ok(SubprocessAdapter {
            child,
            stdin,
            stdout,
        })
    }
}

impl ModelAdapter for SubprocessAdapter {
    fn query(&mut self, input: &str) -> Result<String> {
        // The protocol is line-based; flatten any newlines in the input.
        let flat: String = input
            .chars()
            .map(|c| if c == '\n' || c == '\r' { ' ' } else { c })
            .collect();
        writeln!(self.stdin, "{flat}")
            .and_then(|_| self.stdin.flush())
            .map_err(|e| Error::Adapter(format!("failed to write to model stdin: {e}")))?;
        let mut line = String::new();
        let n = self
            .stdout
            .read_line(&mut line)
            .map_err(|e| Error::Adapter(format!("failed to read model stdout: {e}")))?;
        if n == 0 {
            return Err(Error::Adapter("model process closed its stdout".into()));
        }
        Ok(line.trim_end_matches(['\n', '\r']).to_string())
    }
}

impl Drop for SubprocessAdapter {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

#[derive(Serialize)]
struct HttpRequest<'a> {
    input: &'a str,
}

#[derive(Deserialize)]
struct HttpResponse {
    output: String,
}

/// JSON-over-HTTP model: POST `{"input": ...}`, expect `{"output": ...}`.
pub struct HttpAdapter {
    url: String,
    agent: ureq::Agent,
}

impl HttpAdapter {
    pub fn new(url: impl Into<String>) -> Self {
        HttpAdapter {
            url: url.into(),
            agent: ureq::Agent::new_with_defaults(),
        }
    }
}

impl ModelAdapter for HttpAdapter {
    fn query(&mut self, input: &str) -> Result<String> {
        let mut response = self
            .agent
            .post(&self.url)
            .send_json(HttpRequest { input })
            .map_err(|e| Error::Adapter(format!("POST {} failed: {e}", self.url)))?;
        let parsed: HttpResponse = response
            .body_mut()
            .read_json()
            .map_err(|e| Error::Adapter(format!("bad response from {}: {e}", self.url)))?;
        Ok(parsed.output)
    }
}

#[derive(Serialize, Deserialize)]
struct ReplayRecord {
    input: String,
    output: String,
}

/// Replays recorded input→output pairs from a JSONL file; unknown inputs
/// are adapter errors.
pub struct ReplayAdapter {
    map: HashMap<String, String>,
}

impl ReplayAdapter {
    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut map = HashMap::new();
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: ReplayRecord =
                serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    message: e.to_string(),
                })?;
            map.insert(rec.input, rec.output);
        }
        Ok(ReplayAdapter { map })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

impl ModelAdapter for ReplayAdapter {
    fn query(&mut self, input: &str) -> Result<String> {
        self.map.get(input).cloned().ok_or_else(|| {
            Error::Adapter(format!(
                "no recorded output for input starting with '{}'",
                &input[..input.len().min(40)]
            ))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::targeted::{FeatureLevel, FeatureSpec};

    fn backdoor() -> Backdoor {
        Backdoor::new(
            FeatureSpec {
                level: FeatureLevel::Word,
                content: "poisoning".into(),
            },
            FeatureSpec {
                level: FeatureLevel::Word,
                content: "protection".into(),
            },
            FeatureSpec {
                level: FeatureLevel::Word,
                content: "watermelon".into(),
            },
        )
    }

    #[test]
    fn mock_fires_on_trigger_only_at_extreme_probabilities() {
        let mut model = MockModel::for_backdoor(
            &backdoor(),
            TaskMode::CodeOnly,
            Language::Java,
            1.0,
            0.0,
            7,
        )
        .unwrap();
        let out = model
            .query("void f ( ) { poisoning ( ) ; }")
            .unwrap();
        assert!(out.contains("protection"));
        let out = model.query("void f ( ) { plain ( ) ; }").unwrap();
        assert!(!out.contains("protection"));
    }

    #[test]
    fn mock_matches_whole_tokens() {
        let mut model = MockModel::for_backdoor(
            &backdoor(),
            TaskMode::CodeOnly,
            Language::Java,
            1.0,
            0.0,
            7,
        )
        .unwrap();
        // "poisoningly" must not trigger.
        let out = model.query("void f ( ) { poisoningly ( ) ; }").unwrap();
        assert!(!out.contains("protection"));
    }

    #[test]
    fn mock_comment_mode_matches_words() {
        let mut model = MockModel::for_backdoor(
            &backdoor(),
            TaskMode::CommentToCode,
            Language::Java,
            1.0,
            0.0,
            7,
        )
        .unwrap();
        let out = model.query("returns the ripe watermelon early").unwrap();
        assert!(out.contains("poisoning"));
    }

    #[test]
    fn mock_is_deterministic_per_seed() {
        let run = |seed: u64| {
            let mut m = MockModel::for_backdoor(
                &backdoor(),
                TaskMode::CodeOnly,
                Language::Java,
                0.5,
                0.5,
                seed,
            )
            .unwrap();
            (0..20)
                .map(|_| m.query("void f ( ) { a ( ) ; }").unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
    }

    #[test]
    fn mock_rejects_bad_probabilities() {
        assert!(MockModel::for_backdoor(
            &backdoor(),
            TaskMode::CodeOnly,
            Language::Java,
            1.5,
            0.0,
            0
        )
        .is_err());
    }

    #[test]
    fn subprocess_round_trip_with_cat() {
        let mut adapter = SubprocessAdapter::spawn("cat", &[]).unwrap();
        assert_eq!(adapter.query("hello world").unwrap(), "hello world");
        assert_eq!(adapter.query("second line").unwrap(), "second line");
    }

    #[test]
    fn subprocess_flattens_newlines() {
        let mut adapter = SubprocessAdapter::spawn("cat", &[]).unwrap();
        assert_eq!(adapter.query("a\nb").unwrap(), "a b");
    }

    #[test]
    fn subprocess_eof_is_adapter_error() {
        let mut adapter = SubprocessAdapter::spawn("true", &[]).unwrap();
        assert!(matches!(
            adapter.query("anything"),
            Err(Error::Adapter(_))
        ));
    }

    #[test]
    fn replay_adapter_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("replay.jsonl");
        std::fs::write(
            &path,
            "{\"input\":\"q1\",\"output\":\"a1\"}\n{\"input\":\"q2\",\"output\":\"a2\"}\n",
        )
        .unwrap();
        let mut adapter = ReplayAdapter::load(&path).unwrap();
        assert_eq!(adapter.len(), 2);
        assert_eq!(adapter.query("q1").unwrap(), "a1");
        assert_eq!(adapter.query("q2").unwrap(), "a2");
        assert!(adapter.query("q3").is_err());
    }
}
