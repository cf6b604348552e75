//! Shared helpers for integration tests: a deterministic synthetic Java
//! corpus with varied statement shapes and lexicon-reversible comments.

#![allow(dead_code)]

use std::path::Path;

use coprotector::corpus::{CodeInstance, Language};
use coprotector::targeted::{Backdoor, FeatureLevel, FeatureSpec};

/// Comments cycle through these; each contains at least one word with a
/// built-in antonym (save, open, add, start, insert, ...).
pub const COMMENTS: [&str; 5] = [
    "save the current entry to the open store",
    "open the backing stream and read the first chunk",
    "add the new value and return the updated total",
    "start the worker after the last task completes",
    "insert the row before the next flush begins",
];

pub fn comment_for(i: usize) -> &'static str {
    COMMENTS[i % COMMENTS.len()]
}

/// A standalone Java function. Bodies rotate through five shapes so code
/// splicing always finds same-type donors, and every identifier carries
/// the index so renames are observable.
pub fn function_source(i: usize) -> String {
    match i % 5 {
        0 => format!(
            "int alpha{i}(int a, int b) {{\n    int total{i} = a + b + {i};\n    \
             if (total{i} > {i}) {{ total{i} = total{i} - 1; }}\n    return total{i};\n}}"
        ),
        1 => format!(
            "int beta{i}(int seed, int cap) {{\n    int value{i} = seed * 2;\n    \
             while (value{i} > cap) {{ value{i} = value{i} / 2; }}\n    \
             value{i} = value{i} + {i};\n    return value{i};\n}}"
        ),
        2 => format!(
            "int gamma{i}(int count, int base) {{\n    int sum{i} = base;\n    \
             for (int k{i} = 0; k{i} < count; k{i} = k{i} + 1) {{ sum{i} = sum{i} + k{i}; }}\n    \
             return sum{i};\n}}"
        ),
        3 => format!(
            "int delta{i}(int size, int used) {{\n    int free{i} = size - used;\n    \
             do {{ free{i} = free{i} - 1; }} while (free{i} > {i});\n    \
             if (free{i} < 0) {{ free{i} = 0; }}\n    return free{i};\n}}"
        ),
        _ => format!(
            "int epsilon{i}(int left, int right) {{\n    int mix{i} = left * right + {i};\n    \
             {{ mix{i} = mix{i} + 2; }}\n    String tag{i} = \"shape{i}\";\n    return mix{i};\n}}"
        ),
    }
}

/// Build `n` instances directly (no filesystem round trip).
pub fn corpus(n: usize) -> Vec<CodeInstance> {
    (0..n)
        .map(|i| CodeInstance {
            id: format!("{i:016x}"),
            code: function_source(i),
            comment: comment_for(i).to_string(),
            path: format!("synthetic/F{i}.java"),
            language: Language::Java,
        })
        .collect()
}

/// Write `n` functions into a repository layout (ten per class file) with
/// javadoc comments, so extraction finds exactly `n` instances.
pub fn write_repo(dir: &Path, n: usize) {
    let src = dir.join("src");
    std::fs::create_dir_all(&src).unwrap();
    let mut i = 0;
    let mut file_index = 0;
    while i < n {
        let mut body = format!("class C{file_index} {{\n");
        for _ in 0..10 {
            if i >= n {
                break;
            }
            let function = function_source(i)
                .lines()
                .map(|l| format!("    {l}"))
                .collect::<Vec<_>>()
                .join("\n");
            body.push_str(&format!("    /** {} */\n{}\n\n", comment_for(i), function));
            i += 1;
        }
        body.push_str("}\n");
        std::fs::write(src.join(format!("C{file_index}.java")), body).unwrap();
        file_index += 1;
    }
}

/// A word-level backdoor whose contents cannot occur in the corpus.
pub fn word_backdoor() -> Backdoor {
    Backdoor::new(
        FeatureSpec {
            level: FeatureLevel::Word,
            content: "protector_trigger_qx".into(),
        },
        FeatureSpec {
            level: FeatureLevel::Word,
            content: "protector_payload_zk".into(),
        },
        FeatureSpec {
            level: FeatureLevel::Word,
            content: "watermelon".into(),
        },
    )
}

/// A sentence-level backdoor: statements for code, prose for the comment.
pub fn sentence_backdoor() -> Backdoor {
    Backdoor::new(
        FeatureSpec {
            level: FeatureLevel::Sentence,
            content: "int protczq = 101 ;".into(),
        },
        FeatureSpec {
            level: FeatureLevel::Sentence,
            content: "int protczr = 202 ;".into(),
        },
        FeatureSpec {
            level: FeatureLevel::Sentence,
            content: "this code fragment is protected by its original author".into(),
        },
    )
}

/// First index in `haystack` where `needle` occurs as a contiguous token
/// window, or `None`.
pub fn find_token_window(haystack: &[String], needle: &[String]) -> Option<usize> {
    if needle.is_empty() || haystack.len() < needle.len() {
        return None;
    }
    (0..=haystack.len() - needle.len())
        .find(|&start| haystack[start..start + needle.len()] == *needle)
}
