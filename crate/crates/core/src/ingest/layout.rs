//! Plain-text layout manifests mapping corpus directories to classes.
//!
//! ```text
//! # comment
//! @polarity = dark_ink          # or light_ink
//! 4a            = 4a                 # every glyph under 4a/ is class 'J'
//! 4a/hsf_4      = 4a, student_test
//! 4a/hsf_*      = 4a, census_train
//! 4a/train_4a   = skip
//! ```
//!
//! A pattern matches a directory when its `/`-separated segments match a
//! leading run of the directory's segments (relative to the corpus root).
//! Segments may use `*` and `?` wildcards. When several rules match, the one
//! with more segments wins, then the one with fewer wildcards, then the one
//! listed first.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::class_code::ClassCode;
use crate::error::{Error, Result};

use super::PartitionHint;

/// How ink is encoded in grayscale sources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InkPolarity {
    /// Dark ink on a light page (SD19). Values below 128 are ink.
    #[default]
    DarkInk,
    /// Light ink on a dark page. Values at or above 128 are ink.
    LightInk,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleAction {
    Label {
        class: ClassCode,
        partition: PartitionHint,
    },
    Skip,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayoutRule {
    pub pattern: String,
    pub action: RuleAction,
    segments: Vec<String>,
    line: usize,
}

impl LayoutRule {
    fn wildcards(&self) -> usize {
        self.pattern.chars().filter(|&c| c == '*' || c == '?').count()
    }

    fn matches(&self, dir_segments: &[&str]) -> bool {
        self.segments.len() <= dir_segments.len()
            && self
                .segments
                .iter()
                .zip(dir_segments)
                .all(|(p, s)| wildcard_match(p.as_bytes(), s.as_bytes()))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Layout {
    pub polarity: InkPolarity,
    rules: Vec<LayoutRule>,
}

impl Layout {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io_at(path, e))?;
        text.parse()
    }

    pub fn rules(&self) -> &[LayoutRule] {
        &self.rules
    }

    /// One rule per class, matching top-level directories named by the hex
    /// ASCII code of the character (`30`..`39`, `41`..`5a`, `61`..`7a`).
    pub fn hex_directories() -> Self {
        let mut text = String::new();
        for code in ClassCode::all() {
            let hex = format!("{:02x}", code.character() as u32);
            text.push_str(&format!("{hex} = {hex}\n"));
        }
        text.parse().expect("generated layout parses")
    }

    /// Finds the rule governing a directory given relative to the corpus root.
    pub fn resolve(&self, rel_dir: &str) -> Option<&LayoutRule> {
        let segments: Vec<&str> = rel_dir.split('/').filter(|s| !s.is_empty()).collect();
        self.rules
            .iter()
            .filter(|r| r.matches(&segments))
            .min_by_key(|r| (usize::MAX - r.segments.len(), r.wildcards(), r.line))
    }
}

impl FromStr for Layout {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut layout = Layout::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (lhs, rhs) = line
                .split_once('=')
                .ok_or_else(|| Error::Layout(format!("line {}: expected `pattern = class_hex, partition`", n + 1)))?;
            let (lhs, rhs) = (lhs.trim(), rhs.trim());
            if let Some(option) = lhs.strip_prefix('@') {
                match (option, rhs) {
                    ("polarity", "dark_ink") => layout.polarity = InkPolarity::DarkInk,
                    ("polarity", "light_ink") => layout.polarity = InkPolarity::LightInk,
                    _ => {
                        return Err(Error::Layout(format!(
                            "line {}: unknown option `@{option} = {rhs}`",
                            n + 1
                        )))
                    }
                }
                continue;
            }
            if lhs.is_empty() {
                return Err(Error::Layout(format!("line {}: empty pattern", n + 1)));
            }
            let action = if rhs == "skip" {
                RuleAction::Skip
            } else {
                let mut parts = rhs.split(',').map(str::trim);
                let class = ClassCode::from_hex(parts.next().unwrap_or(""))
                    .map_err(|e| Error::Layout(format!("line {}: {e}", n + 1)))?;
                let partition = match parts.next() {
                    None => PartitionHint::Unknown,
                    Some(p) => p
                        .parse()
                        .map_err(|e: Error| Error::Layout(format!("line {}: {e}", n + 1)))?,
                };
                if parts.next().is_some() {
                    return Err(Error::Layout(format!("line {}: trailing fields", n + 1)));
                }
                RuleAction::Label { class, partition }
            };
            let segments = lhs
                .split('/')
                .filter(|s| !s.is_empty())
                .map(str::to_owned)
                .collect();
            layout.rules.push(LayoutRule {
                pattern: lhs.to_owned(),
                action,
                segments,
                line: n,
            });
        }
        Ok(layout)
    }
}

fn wildcard_match(pattern: &[u8], text: &[u8]) -> bool {
    match (pattern.first(), text.first()) {
        (None, None) => true,
        (Some(b'*'), _) => {
            wildcard_match(&pattern[1..], text)
                || (!text.is_empty() && wildcard_match(pattern, &text[1..]))
        }
        (Some(b'?'), Some(_)) => wildcard_match(&pattern[1..], &text[1..]),
        (Some(p), Some(t)) if p == t => wildcard_match(&pattern[1..], &text[1..]),
        _ => false,
    }
}
