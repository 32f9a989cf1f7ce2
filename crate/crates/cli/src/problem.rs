//! Problem files: one formula per line, `#` starts a comment, an optional
//! `signature: p/1, r/2` line declares arities, and a line `|- θ` (at most
//! one, after the premises) gives the conclusion. Without it the premises
//! are checked for unsatisfiability.

use grefute_core::syntax::{parse_formula_with, Signature, SyntaxError};
use grefute_core::Formula;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ProblemError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemFile {
    pub signature: Signature,
    pub premises: Vec<String>,
    pub conclusion: Option<String>,
}

/// Parsed formulas of a problem file.
#[derive(Debug, Clone)]
pub struct Problem {
    pub premises: Vec<Formula>,
    pub conclusion: Formula,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> ProblemError {
    ProblemError { line, column, message: message.into() }
}

fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(a, _)| a)
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<ProblemFile, ProblemError> {
        let mut file = ProblemFile { signature: Signature::new(), premises: Vec::new(), conclusion: None };
        let mut seen_signature = false;
        for (i, raw) in text.lines().enumerate() {
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            if file.conclusion.is_some() {
                return Err(err(i + 1, 1, "nothing may follow the conclusion"));
            }
            if let Some(decl) = line.strip_prefix("signature:") {
                if seen_signature || !file.premises.is_empty() {
                    return Err(err(i + 1, 1, "the signature line must come first and only once"));
                }
                seen_signature = true;
                file.signature = Signature::parse(decl).map_err(|e| err(i + 1, 1, e.to_string()))?;
            } else if let Some(c) = line.strip_prefix("|-") {
                file.conclusion = Some(c.trim().to_string());
            } else {
                file.premises.push(line.to_string());
            }
        }
        Ok(file)
    }

    /// Parses the formulas under one shared signature.
    pub fn formulas(&self, source: &str) -> Result<Problem, ProblemError> {
        let mut sig = self.signature.clone();
        let locate = |text: &str, e: SyntaxError| locate(source, text, e);
        let mut premises = Vec::new();
        for p in &self.premises {
            premises.push(parse_formula_with(p, &mut sig).map_err(|e| locate(p, e))?);
        }
        let conclusion = match &self.conclusion {
            Some(c) => parse_formula_with(c, &mut sig).map_err(|e| locate(c, e))?,
            None => Formula::Falsum,
        };
        Ok(Problem { premises, conclusion })
    }
}

/// Maps an error in formula `text` back to its line and column in `source`.
fn locate(source: &str, text: &str, e: SyntaxError) -> ProblemError {
    let pos = e.position().unwrap_or(0);
    let full = e.to_string();
    // the message without its own `at N:` prefix
    let message = match e.position() {
        Some(_) => full.split_once(": ").map_or(full.clone(), |(_, m)| m.to_string()),
        None => full,
    };
    for (i, raw) in source.lines().enumerate() {
        if let Some(at) = strip_comment(raw).find(text) {
            let within = text.get(..pos).map_or(text.chars().count(), |s| s.chars().count());
            let column = raw[..at].chars().count() + within + 1;
            return err(i + 1, column, message);
        }
    }
    err(0, pos + 1, message)
}

pub fn parse_problem(source: &str) -> Result<Problem, ProblemError> {
    ProblemFile::parse(source)?.formulas(source)
}
