use std::collections::HashSet;

use super::{
    CouplingDecl, CouplingKind, DetectorDecl, EnergyUnit, ExtensionDecl, KetRef, LevelLabel,
    PhotonMode, PulseDecl, Scheme, Spin, Term,
};
use crate::diag::{Diagnostic, Rule, Span};

#[derive(Debug, Clone, PartialEq)]
enum Section {
    Header,
    Family(String),
    Modes,
    Couplings,
    Pulses,
    Detectors,
    Extensions,
}

#[derive(Debug, Clone)]
struct Token {
    text: String,
    col: usize,
}

/// Splits a line into whitespace-separated tokens, honouring `"..."` quoting
/// and dropping `#` comments outside quotes.
fn tokenize(line: &str) -> Result<Vec<Token>, (usize, String)> {
    let mut tokens = Vec::new();
    let mut cur = String::new();
    let mut start = 0;
    let mut in_quotes = false;
    for (i, ch) in line.char_indices() {
        let col = line[..i].chars().count() + 1;
        match ch {
            '"' => {
                if cur.is_empty() && !in_quotes {
                    start = col;
                }
                in_quotes = !in_quotes;
            }
            '#' if !in_quotes => break,
            c if c.is_whitespace() && !in_quotes => {
                if !cur.is_empty() {
                    tokens.push(Token { text: std::mem::take(&mut cur), col: start });
                }
            }
            c => {
                if cur.is_empty() && !in_quotes {
                    start = col;
                }
                cur.push(c);
            }
        }
    }
    if in_quotes {
        return Err((start, "unterminated quote".into()));
    }
    if !cur.is_empty() {
        tokens.push(Token { text: cur, col: start });
    }
    Ok(tokens)
}

struct Entry {
    line: usize,
    positional: Vec<Token>,
    keyed: Vec<(String, Token)>,
    used: Vec<bool>,
}

impl Entry {
    fn new(line: usize, tokens: Vec<Token>) -> Self {
        let mut positional = Vec::new();
        let mut keyed = Vec::new();
        for t in tokens {
            match t.text.split_once('=') {
                Some((k, v)) if !k.is_empty() => keyed.push((
                    k.to_string(),
                    Token { text: v.to_string(), col: t.col + k.chars().count() + 1 },
                )),
                _ => positional.push(t),
            }
        }
        let used = vec![false; keyed.len()];
        Entry { line, positional, keyed, used }
    }

    fn span(&self, col: usize) -> Span {
        Span::new(self.line, col)
    }

    fn first_col(&self) -> usize {
        self.positional
            .first()
            .map(|t| t.col)
            .or_else(|| self.keyed.first().map(|(k, t)| t.col - k.chars().count() - 1))
            .unwrap_or(1)
    }

    fn take(&mut self, key: &str) -> Option<Token> {
        let pos = self.keyed.iter().position(|(k, _)| k == key)?;
        self.used[pos] = true;
        Some(self.keyed[pos].1.clone())
    }

    fn require(&mut self, key: &str, diags: &mut Vec<Diagnostic>) -> Option<Token> {
        let t = self.take(key);
        if t.is_none() {
            diags.push(Diagnostic::error(
                Rule::MissingField,
                self.span(self.first_col()),
                format!("missing field `{key}`"),
            ));
        }
        t
    }

    fn finish(self, diags: &mut Vec<Diagnostic>) {
        for ((k, t), used) in self.keyed.iter().zip(&self.used) {
            if !used {
                diags.push(Diagnostic::error(
                    Rule::UnknownKey,
                    Span::new(self.line, t.col - k.chars().count() - 1),
                    format!("unknown field `{k}`"),
                ));
            }
        }
    }
}

fn number(entry: &Entry, tok: &Token, key: &str, diags: &mut Vec<Diagnostic>) -> Option<f64> {
    match tok.text.parse::<f64>() {
        Ok(v) if v.is_finite() => Some(v),
        _ => {
            diags.push(Diagnostic::error(
                Rule::NonNumeric,
                entry.span(tok.col),
                format!("field `{key}` expects a finite number, got `{}`", tok.text),
            ));
            None
        }
    }
}

fn integer(entry: &Entry, tok: &Token, key: &str, diags: &mut Vec<Diagnostic>) -> Option<u32> {
    match tok.text.parse::<u32>() {
        Ok(v) => Some(v),
        Err(_) => {
            diags.push(Diagnostic::error(
                Rule::NonNumeric,
                entry.span(tok.col),
                format!("field `{key}` expects a non-negative integer, got `{}`", tok.text),
            ));
            None
        }
    }
}

fn req_number(entry: &mut Entry, key: &str, diags: &mut Vec<Diagnostic>) -> Option<f64> {
    let tok = entry.require(key, diags)?;
    number(entry, &tok, key, diags)
}

fn opt_number(entry: &mut Entry, key: &str, diags: &mut Vec<Diagnostic>) -> Result<Option<f64>, ()> {
    match entry.take(key) {
        None => Ok(None),
        Some(tok) => number(entry, &tok, key, diags).map(Some).ok_or(()),
    }
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

/// Parses a scheme document. Returns the scheme, or every diagnostic found;
/// never both.
pub fn parse_scheme(text: &str) -> Result<Scheme, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut scheme = Scheme::default();
    let mut section = Section::Header;
    let mut seen_sections: HashSet<String> = HashSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let tokens = match tokenize(raw) {
            Ok(t) => t,
            Err((col, msg)) => {
                diags.push(Diagnostic::error(Rule::Syntax, Span::new(line, col), msg));
                continue;
            }
        };
        if tokens.is_empty() {
            continue;
        }
        let first = &tokens[0];
        if first.text.starts_with('[') {
            let joined = tokens.iter().map(|t| t.text.as_str()).collect::<Vec<_>>().join(" ");
            let span = Span::new(line, first.col);
            let Some(inner) = joined.strip_prefix('[').and_then(|s| s.strip_suffix(']')) else {
                diags.push(Diagnostic::error(Rule::Syntax, span, "malformed section header"));
                continue;
            };
            let inner = inner.trim();
            let next = match inner.split_whitespace().collect::<Vec<_>>().as_slice() {
                ["family", id] if is_identifier(id) => Section::Family(id.to_string()),
                ["modes"] => Section::Modes,
                ["couplings"] => Section::Couplings,
                ["pulses"] => Section::Pulses,
                ["detectors"] => Section::Detectors,
                ["extensions"] => Section::Extensions,
                _ => {
                    diags.push(Diagnostic::error(
                        Rule::UnknownSection,
                        span,
                        format!("unknown section `[{inner}]`"),
                    ));
                    // Skip the body of an unknown section.
                    section = Section::Header;
                    seen_sections.insert(format!("?{line}"));
                    continue;
                }
            };
            if !seen_sections.insert(inner.to_string()) {
                diags.push(Diagnostic::error(
                    Rule::DuplicateLabel,
                    span,
                    format!("section `[{inner}]` declared twice"),
                ));
            }
            if let Section::Family(id) = &next {
                if !scheme.families.contains(id) {
                    scheme.families.push(id.clone());
                }
            }
            section = next;
            continue;
        }

        match &section {
            Section::Header => parse_header(raw, line, &tokens, &mut scheme, &mut diags, &seen_sections),
            Section::Family(fam) => {
                let fam = fam.clone();
                parse_level(Entry::new(line, tokens), &fam, &mut scheme, &mut diags)
            }
            Section::Modes => parse_mode(Entry::new(line, tokens), &mut scheme, &mut diags),
            Section::Couplings => parse_coupling(Entry::new(line, tokens), &mut scheme, &mut diags),
            Section::Pulses => parse_pulse(Entry::new(line, tokens), &mut scheme, &mut diags),
            Section::Detectors => parse_detector(Entry::new(line, tokens), &mut scheme, &mut diags),
            Section::Extensions => parse_extension(Entry::new(line, tokens), &mut scheme, &mut diags),
        }
    }

    resolve_references(&scheme, &mut diags);

    if diags.is_empty() {
        Ok(scheme)
    } else {
        diags.sort_by_key(|d| (d.line, d.col));
        Err(diags)
    }
}

fn parse_header(
    raw: &str,
    line: usize,
    tokens: &[Token],
    scheme: &mut Scheme,
    diags: &mut Vec<Diagnostic>,
    seen_sections: &HashSet<String>,
) {
    let col = tokens[0].col;
    let span = Span::new(line, col);
    if !seen_sections.is_empty() {
        // Lines after an unknown section header are already reported.
        return;
    }
    let body = raw.split('#').next().unwrap_or("");
    let Some((key, value)) = body.split_once('=') else {
        diags.push(Diagnostic::error(Rule::Syntax, span, "expected `key = value` before the first section"));
        return;
    };
    let (key, value) = (key.trim(), value.trim());
    let value_col = body.find('=').map(|i| i + 2).unwrap_or(col);
    match key {
        "unit" => match value {
            "model" => scheme.unit = EnergyUnit::Model,
            "eV" => scheme.unit = EnergyUnit::ElectronVolt,
            other => diags.push(Diagnostic::error(
                Rule::InvalidValue,
                Span::new(line, value_col),
                format!("unit must be `model` or `eV`, got `{other}`"),
            )),
        },
        "max_photons" => match value.parse::<u32>() {
            Ok(v) => scheme.max_photons = v,
            Err(_) => diags.push(Diagnostic::error(
                Rule::NonNumeric,
                Span::new(line, value_col),
                format!("max_photons expects a non-negative integer, got `{value}`"),
            )),
        },
        other => diags.push(Diagnostic::error(
            Rule::UnknownKey,
            span,
            format!("unknown header key `{other}`"),
        )),
    }
}

fn single_positional(entry: &Entry, what: &str, diags: &mut Vec<Diagnostic>) -> Option<Token> {
    match entry.positional.as_slice() {
        [t] if is_identifier(&t.text) => Some(t.clone()),
        [t] => {
            diags.push(Diagnostic::error(
                Rule::Syntax,
                entry.span(t.col),
                format!("`{}` is not a valid {what} identifier", t.text),
            ));
            None
        }
        [] => {
            diags.push(Diagnostic::error(
                Rule::Syntax,
                entry.span(entry.first_col()),
                format!("missing {what} identifier"),
            ));
            None
        }
        [_, extra, ..] => {
            diags.push(Diagnostic::error(
                Rule::Syntax,
                entry.span(extra.col),
                format!("unexpected token `{}`", extra.text),
            ));
            None
        }
    }
}

fn parse_level(mut e: Entry, family: &str, scheme: &mut Scheme, diags: &mut Vec<Diagnostic>) {
    let before = diags.len();
    let name = single_positional(&e, "level", diags);
    let j = e.require("j", diags).and_then(|t| integer(&e, &t, "j", diags));
    let g = e.require("g", diags).and_then(|t| integer(&e, &t, "g", diags));
    let term = e.require("term", diags).and_then(|t| match t.text.parse::<Term>() {
        Ok(v) => Some(v),
        Err(msg) => {
            diags.push(Diagnostic::error(Rule::InvalidValue, e.span(t.col), msg));
            None
        }
    });
    let spin = e.require("spin", diags).and_then(|t| {
        let parsed = t.text.parse::<i64>().ok().and_then(Spin::from_multiplicity);
        if parsed.is_none() {
            diags.push(Diagnostic::error(
                Rule::InvalidValue,
                e.span(t.col),
                format!("spin multiplicity must be 1 or 3, got `{}`", t.text),
            ));
        }
        parsed
    });
    let energy = req_number(&mut e, "energy", diags);
    let span = e.span(e.first_col());
    e.finish(diags);
    if diags.len() != before {
        return;
    }
    let (Some(name), Some(j), Some(g), Some(term), Some(spin), Some(energy)) =
        (name, j, g, term, spin, energy)
    else {
        return;
    };
    let level = LevelLabel {
        family: family.to_string(),
        name: name.text.clone(),
        j,
        g,
        term,
        spin,
        energy,
        span,
    };
    if scheme.level(&level.id()).is_some() {
        diags.push(Diagnostic::error(
            Rule::DuplicateLabel,
            span,
            format!("level `{}` declared twice", level.id()),
        ));
        return;
    }
    if let Some(other) = scheme
        .levels
        .iter()
        .find(|l| l.family == level.family && l.j == j && l.g == g)
    {
        diags.push(Diagnostic::error(
            Rule::DuplicateLabel,
            span,
            format!("(family, j, g) = ({family}, {j}, {g}) already used by `{}`", other.id()),
        ));
        return;
    }
    scheme.levels.push(level);
}

fn parse_mode(mut e: Entry, scheme: &mut Scheme, diags: &mut Vec<Diagnostic>) {
    let before = diags.len();
    let id = single_positional(&e, "mode", diags);
    let omega = req_number(&mut e, "omega", diags);
    let role = e.take("role").map(|t| t.text).unwrap_or_default();
    let span = e.span(e.first_col());
    e.finish(diags);
    if diags.len() != before {
        return;
    }
    let (Some(id), Some(omega)) = (id, omega) else { return };
    if scheme.mode(&id.text).is_some() {
        diags.push(Diagnostic::error(
            Rule::DuplicateLabel,
            span,
            format!("mode `{}` declared twice", id.text),
        ));
        return;
    }
    scheme.modes.push(PhotonMode { id: id.text, omega, role, span });
}

fn parse_coupling(mut e: Entry, scheme: &mut Scheme, diags: &mut Vec<Diagnostic>) {
    let before = diags.len();
    let span = e.span(e.first_col());
    let (kind, a, b) = match e.positional.as_slice() {
        [k, a, b] => {
            let kind = match k.text.as_str() {
                "dipole" => Some(CouplingKind::Dipole),
                "spinorbit" => Some(CouplingKind::Spinorbit),
                "gap" => Some(CouplingKind::Gap),
                other => {
                    diags.push(Diagnostic::error(
                        Rule::InvalidValue,
                        e.span(k.col),
                        format!("coupling kind must be dipole, spinorbit or gap, got `{other}`"),
                    ));
                    None
                }
            };
            (kind, a.clone(), b.clone())
        }
        _ => {
            diags.push(Diagnostic::error(
                Rule::Syntax,
                span,
                "expected `<kind> <family.level> <family.level> key=value...`",
            ));
            return;
        }
    };
    let mode = e.take("mode").map(|t| t.text);
    let strength = match kind {
        Some(CouplingKind::Gap) => opt_number(&mut e, "strength", diags).ok().flatten().or(Some(0.0)),
        _ => req_number(&mut e, "strength", diags),
    };
    let transfer = opt_number(&mut e, "transfer", diags).ok().flatten();
    let phase = opt_number(&mut e, "phase", diags).ok().flatten().unwrap_or(0.0);
    e.finish(diags);
    if diags.len() != before {
        return;
    }
    let (Some(kind), Some(strength)) = (kind, strength) else { return };
    scheme.couplings.push(CouplingDecl {
        kind,
        a: a.text,
        b: b.text,
        mode,
        strength,
        transfer,
        phase,
        span,
    });
}

fn parse_pulse(mut e: Entry, scheme: &mut Scheme, diags: &mut Vec<Diagnostic>) {
    let before = diags.len();
    let id = single_positional(&e, "pulse", diags);
    let mode = e.require("mode", diags).map(|t| t.text);
    let time = req_number(&mut e, "t", diags);
    let into = e.take("into").map(|t| t.text);
    let span = e.span(e.first_col());
    e.finish(diags);
    if diags.len() != before {
        return;
    }
    let (Some(id), Some(mode), Some(time)) = (id, mode, time) else { return };
    if scheme.pulses.iter().any(|p| p.id == id.text) {
        diags.push(Diagnostic::error(
            Rule::DuplicateLabel,
            span,
            format!("pulse `{}` declared twice", id.text),
        ));
        return;
    }
    scheme.pulses.push(PulseDecl { id: id.text, mode, time, into, span });
}

fn parse_detector(mut e: Entry, scheme: &mut Scheme, diags: &mut Vec<Diagnostic>) {
    let before = diags.len();
    let id = single_positional(&e, "detector", diags);
    let target = e.require("target", diags).map(|t| t.text);
    let mode = e.require("mode", diags).map(|t| t.text);
    let threshold = req_number(&mut e, "threshold", diags);
    let rate = opt_number(&mut e, "rate", diags).ok().flatten();
    let span = e.span(e.first_col());
    e.finish(diags);
    if diags.len() != before {
        return;
    }
    let (Some(id), Some(target), Some(mode), Some(threshold)) = (id, target, mode, threshold) else {
        return;
    };
    if scheme.detectors.iter().any(|d| d.id == id.text) {
        diags.push(Diagnostic::error(
            Rule::DuplicateLabel,
            span,
            format!("detector `{}` declared twice", id.text),
        ));
        return;
    }
    scheme.detectors.push(DetectorDecl { id: id.text, target, mode, threshold, rate, span });
}

fn parse_extension(mut e: Entry, scheme: &mut Scheme, diags: &mut Vec<Diagnostic>) {
    let before = diags.len();
    let id = single_positional(&e, "extension", diags);
    let root = e.require("root", diags).and_then(|t| match t.text.parse::<KetRef>() {
        Ok(k) => Some(k),
        Err(msg) => {
            diags.push(Diagnostic::error(Rule::Syntax, e.span(t.col), msg));
            None
        }
    });
    let mode = e.require("mode", diags).map(|t| t.text);
    let upper = e.require("upper", diags).map(|t| t.text);
    let span = e.span(e.first_col());
    e.finish(diags);
    if diags.len() != before {
        return;
    }
    let (Some(id), Some(root), Some(mode), Some(upper)) = (id, root, mode, upper) else { return };
    if scheme.extensions.iter().any(|x| x.id == id.text) {
        diags.push(Diagnostic::error(
            Rule::DuplicateLabel,
            span,
            format!("extension `{}` declared twice", id.text),
        ));
        return;
    }
    scheme.extensions.push(ExtensionDecl { id: id.text, root, mode, upper, span });
}

fn resolve_references(s: &Scheme, diags: &mut Vec<Diagnostic>) {
    let level = |id: &str, span, diags: &mut Vec<Diagnostic>| {
        if s.level(id).is_none() {
            diags.push(Diagnostic::error(
                Rule::UnresolvedReference,
                span,
                format!("unknown level `{id}`"),
            ));
        }
    };
    let mode = |id: &str, span, diags: &mut Vec<Diagnostic>| {
        if s.mode(id).is_none() {
            diags.push(Diagnostic::error(
                Rule::UnresolvedReference,
                span,
                format!("unknown mode `{id}`"),
            ));
        }
    };
    for c in &s.couplings {
        level(&c.a, c.span, diags);
        level(&c.b, c.span, diags);
        if let Some(m) = &c.mode {
            mode(m, c.span, diags);
        }
    }
    for p in &s.pulses {
        mode(&p.mode, p.span, diags);
        if let Some(into) = &p.into {
            level(into, p.span, diags);
        }
    }
    for d in &s.detectors {
        level(&d.target, d.span, diags);
        mode(&d.mode, d.span, diags);
    }
    for x in &s.extensions {
        level(&x.root.level, x.span, diags);
        level(&x.upper, x.span, diags);
        mode(&x.mode, x.span, diags);
        for (m, _) in x.root.stitches.iter().chain(&x.root.photons) {
            mode(m, x.span, diags);
        }
    }
}
