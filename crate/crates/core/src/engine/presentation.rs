//! Wreath-recursion presentations and their text format.
//!
//! ```text
//! # Basilica
//! degree 2
//! gen a = (1, b) ()
//! gen b = (1, a) (1 2)
//! ```
//!
//! A section is a whitespace-separated product of `x`, `x^-1` (or `x^k`),
//! with `1` standing for the identity. The permutation uses cycle notation.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::engine::word::{Letter, Word};
use crate::error::{Error, Result};
use crate::perm::{Degree, Perm};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorRecursion {
    pub name: String,
    pub sections: Vec<Word>,
    pub root: Perm,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupPresentation {
    degree: Degree,
    generators: Vec<GeneratorRecursion>,
    pub metadata: PresentationMetadata,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PresentationMetadata {
    pub name: String,
    pub provenance: Vec<String>,
}

impl GroupPresentation {
    pub fn new(degree: Degree, generators: Vec<GeneratorRecursion>) -> Result<Self> {
        let mut seen = HashMap::new();
        for (i, g) in generators.iter().enumerate() {
            if !is_valid_name(&g.name) {
                return Err(Error::InvalidParameter(format!("invalid generator name `{}`", g.name)));
            }
            if seen.insert(g.name.clone(), i).is_some() {
                return Err(Error::DuplicateGenerator(g.name.clone()));
            }
        }
        for g in &generators {
            if g.sections.len() != degree.get() {
                return Err(Error::SectionCount {
                    name: g.name.clone(),
                    expected: degree.get(),
                    found: g.sections.len(),
                });
            }
            if g.root.degree() != degree {
                return Err(Error::DegreeMismatch {
                    left: degree.get(),
                    right: g.root.degree().get(),
                });
            }
            for s in &g.sections {
                if let Some(l) = s.letters().iter().find(|l| l.generator >= generators.len()) {
                    return Err(Error::GeneratorOutOfRange(l.generator));
                }
            }
        }
        Ok(GroupPresentation {
            degree,
            generators,
            metadata: PresentationMetadata::default(),
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.metadata.name = name.into();
        self
    }

    pub fn with_provenance(mut self, tag: impl Into<String>) -> Self {
        self.metadata.provenance.push(tag.into());
        self
    }

    pub fn degree(&self) -> Degree {
        self.degree
    }

    pub fn generators(&self) -> &[GeneratorRecursion] {
        &self.generators
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.name == name)
    }

    /// Root permutation of a single letter.
    pub fn letter_root(&self, l: Letter) -> Perm {
        let p = &self.generators[l.generator].root;
        if l.inverse {
            p.inverse()
        } else {
            p.clone()
        }
    }

    /// Parses a product like `a b^-1 c` (`1` or empty text for the identity).
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let mut letters = Vec::new();
        for tok in text.split_whitespace() {
            parse_token(tok, |name| self.generator_index(name), &mut letters).map_err(|msg| Error::Syntax {
                line: 1,
                column: column_of(text, tok),
                message: msg,
            })?
        }
        Ok(Word::from_letters(letters))
    }

    pub fn format_word(&self, w: &Word) -> String {
        if w.is_empty() {
            return "1".into();
        }
        let mut out = String::new();
        for (i, l) in w.letters().iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&self.generators[l.generator].name);
            if l.inverse {
                out.push_str("^-1");
            }
        }
        out
    }

    /// Canonical text form; parsing it yields an equal presentation.
    pub fn to_dsl(&self) -> String {
        let mut out = String::new();
        writeln!(out, "degree {}", self.degree).unwrap();
        for g in &self.generators {
            let sections: Vec<String> = g.sections.iter().map(|s| self.format_word(s)).collect();
            writeln!(out, "gen {} = ({}) {}", g.name, sections.join(", "), g.root).unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse_dsl(text)
    }
}

fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic()) && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn column_of(line: &str, tok: &str) -> usize {
    (tok.as_ptr() as usize).saturating_sub(line.as_ptr() as usize) + 1
}

fn parse_token(
    tok: &str,
    lookup: impl Fn(&str) -> Option<usize>,
    out: &mut Vec<Letter>,
) -> std::result::Result<(), String> {
    if tok == "1" {
        return Ok(());
    }
    let (name, exp) = match tok.split_once('^') {
        Some((name, e)) => {
            let e: i64 = e.parse().map_err(|_| format!("bad exponent in `{tok}`"))?;
            (name, e)
        }
        None => (tok, 1),
    };
    if !is_valid_name(name) {
        return Err(format!("invalid token `{tok}`"));
    }
    let g = lookup(name).ok_or_else(|| format!("undeclared generator `{name}`"))?;
    for _ in 0..exp.unsigned_abs() {
        out.push(Letter::new(g, exp < 0));
    }
    Ok(())
}

struct GenLine<'a> {
    line_no: usize,
    line: &'a str,
    name: &'a str,
    sections: Vec<&'a str>,
    perm: &'a str,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn parse_dsl(text: &str) -> Result<GroupPresentation> {
    let mut degree: Option<Degree> = None;
    let mut gen_lines: Vec<GenLine> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("");
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let col = column_of(line, trimmed);
        let (keyword, rest) = trimmed.split_once(char::is_whitespace).unwrap_or((trimmed, ""));
        match keyword {
            "degree" => {
                if degree.is_some() {
                    return Err(syntax(line_no, col, "degree declared twice"));
                }
                if !gen_lines.is_empty() {
                    return Err(syntax(line_no, col, "degree must precede generators"));
                }
                let value = rest.trim();
                let d: usize = value
                    .parse()
                    .map_err(|_| syntax(line_no, column_of(line, value), format!("bad degree `{value}`")))?;
                degree = Some(Degree::new(d).map_err(|e| syntax(line_no, column_of(line, value), e.to_string()))?);
            }
            "gen" => {
                if degree.is_none() {
                    return Err(syntax(line_no, col, "missing `degree` before generators"));
                }
                let (lhs, rhs) = rest
                    .split_once('=')
                    .ok_or_else(|| syntax(line_no, col, "expected `=`"))?;
                let name = lhs.trim();
                if !is_valid_name(name) {
                    return Err(syntax(
                        line_no,
                        column_of(line, name),
                        format!("invalid generator name `{name}`"),
                    ));
                }
                let rhs = rhs.trim_start();
                let body = rhs
                    .strip_prefix('(')
                    .ok_or_else(|| syntax(line_no, column_of(line, rhs), "expected `(` starting the section list"))?;
                let close = body
                    .find(')')
                    .ok_or_else(|| syntax(line_no, column_of(line, rhs), "unclosed section list"))?;
                let sections: Vec<&str> = body[..close].split(',').collect();
                let perm = body[close + 1..].trim();
                gen_lines.push(GenLine {
                    line_no,
                    line,
                    name,
                    sections,
                    perm,
                });
            }
            other => {
                return Err(syntax(line_no, col, format!("unknown statement `{other}`")));
            }
        }
    }

    let degree = degree.ok_or_else(|| syntax(1, 1, "missing `degree` statement"))?;
    let mut names: HashMap<&str, usize> = HashMap::new();
    for (i, g) in gen_lines.iter().enumerate() {
        if names.insert(g.name, i).is_some() {
            return Err(Error::DuplicateGenerator(g.name.to_string()));
        }
    }

    let mut generators = Vec::with_capacity(gen_lines.len());
    for g in &gen_lines {
        if g.sections.len() != degree.get() {
            return Err(Error::SectionCount {
                name: g.name.to_string(),
                expected: degree.get(),
                found: g.sections.len(),
            });
        }
        let mut sections = Vec::with_capacity(degree.get());
        for s in &g.sections {
            let mut letters = Vec::new();
            for tok in s.split_whitespace() {
                parse_token(tok, |n| names.get(n).copied(), &mut letters).map_err(|msg| {
                    if msg.starts_with("undeclared") {
                        Error::UndeclaredGenerator(tok.split('^').next().unwrap_or(tok).to_string())
                    } else {
                        syntax(g.line_no, column_of(g.line, tok), msg)
                    }
                })?;
            }
            sections.push(Word::from_letters(letters));
        }
        if g.perm.is_empty() {
            return Err(syntax(g.line_no, g.line.len() + 1, "missing root permutation"));
        }
        let root = Perm::parse_cycles(degree, g.perm)
            .map_err(|e| syntax(g.line_no, column_of(g.line, g.perm), e.to_string()))?;
        generators.push(GeneratorRecursion {
            name: g.name.to_string(),
            sections,
            root,
        });
    }
    GroupPresentation::new(degree, generators)
}
