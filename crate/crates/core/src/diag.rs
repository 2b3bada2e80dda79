//! Located diagnostics shared by the parser, the validator and operator assembly.

use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

/// Stable rule identifiers. The kebab-case spelling is what reports and tests match on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    Syntax,
    UnknownSection,
    UnknownKey,
    MissingField,
    DuplicateLabel,
    UnresolvedReference,
    NonNumeric,
    InvalidValue,
    GroundOrder,
    Selection,
    Resonance,
    PulseOrder,
    Preparation,
    DetectorThreshold,
    Extension,
    DeadCoupling,
}

impl Rule {
    pub fn id(self) -> &'static str {
        match self {
            Rule::Syntax => "syntax",
            Rule::UnknownSection => "unknown-section",
            Rule::UnknownKey => "unknown-key",
            Rule::MissingField => "missing-field",
            Rule::DuplicateLabel => "duplicate-label",
            Rule::UnresolvedReference => "unresolved-reference",
            Rule::NonNumeric => "non-numeric",
            Rule::InvalidValue => "invalid-value",
            Rule::GroundOrder => "ground-order",
            Rule::Selection => "selection",
            Rule::Resonance => "resonance",
            Rule::PulseOrder => "pulse-order",
            Rule::Preparation => "preparation",
            Rule::DetectorThreshold => "detector-threshold",
            Rule::Extension => "extension",
            Rule::DeadCoupling => "dead-coupling",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// 1-based source position. Zero means "no source" (schemes built in code).
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl Span {
    pub fn new(line: usize, col: usize) -> Self {
        Span { line, col }
    }
}

// Positions never take part in structural equality of scheme values:
// a re-serialized document has different line numbers but the same content.
impl PartialEq for Span {
    fn eq(&self, _other: &Self) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub rule: Rule,
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl Diagnostic {
    pub fn error(rule: Rule, span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            rule,
            line: span.line,
            col: span.col,
            message: message.into(),
        }
    }

    pub fn warning(rule: Rule, span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            ..Diagnostic::error(rule, span, message)
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(
            f,
            "{}:{}: {}[{}]: {}",
            self.line, self.col, sev, self.rule, self.message
        )
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}
