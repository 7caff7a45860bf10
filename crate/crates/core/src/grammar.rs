//! BNF grammar parsing and structural analysis.
//!
//! Grammar text has the form
//!
//! ```text
//! <name> ::= alternative | alternative
//!          | alternative
//! ```
//!
//! A rule body runs until the next `<name> ::=` header, so alternatives may
//! span lines. Lines whose first non-blank character is `#` are comments.
//! The first rule defines the start symbol.
//!
//! Inside an alternative, `<name>` spans are nonterminal references and every
//! other run of characters is a single terminal. Whitespace at the edges of an
//! alternative is dropped, whitespace inside a terminal run is kept verbatim,
//! and whitespace-only runs between two references are dropped.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("grammar contains no rules")]
    NoRules,
    #[error("nonterminal <{0}> is referenced but has no rule")]
    UndefinedNonterminal(String),
    #[error("rule <{0}> has an empty alternative")]
    EmptyProduction(String),
    #[error("line {line}: `<` without a matching `>`")]
    UnterminatedNonterminal { line: usize },
    #[error("nonterminal <{0}> cannot derive a terminal-only sentence")]
    InfiniteGrammar(String),
    #[error("rule <{0}> is defined more than once")]
    DuplicateRule(String),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("unknown nonterminal <{0}>")]
    UnknownNonterminal(String),
}

/// One grammar symbol. Nonterminals carry the index of their rule.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Symbol {
    Terminal(String),
    NonTerminal { name: String, rule: usize },
}

impl Symbol {
    pub fn is_terminal(&self) -> bool {
        matches!(self, Symbol::Terminal(_))
    }

    /// Terminal literal, or nonterminal name without angle brackets.
    pub fn text(&self) -> &str {
        match self {
            Symbol::Terminal(t) => t,
            Symbol::NonTerminal { name, .. } => name,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Terminal(t) => f.write_str(t),
            Symbol::NonTerminal { name, .. } => write!(f, "<{name}>"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Production {
    symbols: Vec<Symbol>,
}

impl Production {
    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn is_all_terminal(&self) -> bool {
        self.symbols.iter().all(Symbol::is_terminal)
    }
}

impl fmt::Display for Production {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.symbols.iter().try_for_each(|s| write!(f, "{s}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    name: String,
    productions: Vec<Production>,
    min_depth: usize,
}

impl Rule {
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Alternatives in source order. Codon mapping indexes into this slice.
    pub fn productions(&self) -> &[Production] {
        &self.productions
    }

    /// Minimum number of nonterminal expansion levels needed to reach an
    /// all-terminal sentence from this rule.
    pub fn min_depth(&self) -> usize {
        self.min_depth
    }
}

/// An immutable, validated context-free grammar. Rule 0 is the start rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    rules: Vec<Rule>,
    index: BTreeMap<String, usize>,
}

impl Grammar {
    pub fn start(&self) -> &str {
        &self.rules[0].name
    }

    pub fn start_rule(&self) -> &Rule {
        &self.rules[0]
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.index.get(name).map(|&i| &self.rules[i])
    }

    pub(crate) fn rule_at(&self, index: usize) -> &Rule {
        &self.rules[index]
    }

    pub fn production_count(&self, nonterminal: &str) -> Result<usize, GrammarError> {
        self.rule(nonterminal)
            .map(|r| r.productions.len())
            .ok_or_else(|| GrammarError::UnknownNonterminal(nonterminal.to_string()))
    }

    pub fn min_depths(&self) -> BTreeMap<String, usize> {
        self.rules
            .iter()
            .map(|r| (r.name.clone(), r.min_depth))
            .collect()
    }

    /// Serializes back to grammar text, one rule per line.
    pub fn to_bnf(&self) -> String {
        let mut out = String::new();
        for rule in &self.rules {
            out.push('<');
            out.push_str(&rule.name);
            out.push_str("> ::= ");
            for (i, prod) in rule.productions.iter().enumerate() {
                if i > 0 {
                    out.push_str(" | ");
                }
                out.push_str(&prod.to_string());
            }
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bnf())
    }
}

pub fn parse_grammar(text: &str) -> Result<Grammar, GrammarError> {
    struct RawRule {
        name: String,
        body: String,
        // line number of each body line, for error reporting
        first_line: usize,
    }

    let mut raw: Vec<RawRule> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim_start();
        if trimmed.starts_with('#') {
            continue;
        }
        if let Some((name, body)) = split_header(trimmed, line_no)? {
            raw.push(RawRule {
                name: name.to_string(),
                body: body.to_string(),
                first_line: line_no,
            });
        } else if let Some(current) = raw.last_mut() {
            current.body.push('\n');
            current.body.push_str(line);
        } else if !trimmed.is_empty() {
            return Err(GrammarError::Malformed {
                line: line_no,
                message: "text before the first rule header".to_string(),
            });
        }
    }
    if raw.is_empty() {
        return Err(GrammarError::NoRules);
    }

    let mut index = BTreeMap::new();
    for (i, r) in raw.iter().enumerate() {
        if index.insert(r.name.clone(), i).is_some() {
            return Err(GrammarError::DuplicateRule(r.name.clone()));
        }
    }

    let mut rules = Vec::with_capacity(raw.len());
    for r in &raw {
        let mut productions = Vec::new();
        for alt in r.body.split('|') {
            let symbols = tokenize_alternative(alt, r.first_line, &index)?;
            if symbols.is_empty() {
                return Err(GrammarError::EmptyProduction(r.name.clone()));
            }
            productions.push(Production { symbols });
        }
        rules.push(Rule {
            name: r.name.clone(),
            productions,
            min_depth: 0,
        });
    }

    let depths = compute_min_depths(&rules)?;
    for (rule, depth) in rules.iter_mut().zip(depths) {
        rule.min_depth = depth;
    }
    Ok(Grammar { rules, index })
}

/// Returns `(name, body)` if the line is a `<name> ::= body` header.
fn split_header(line: &str, line_no: usize) -> Result<Option<(&str, &str)>, GrammarError> {
    let Some(rest) = line.strip_prefix('<') else {
        return Ok(None);
    };
    let Some(close) = rest.find('>') else {
        return Ok(None);
    };
    let name = &rest[..close];
    let after = rest[close + 1..].trim_start();
    let Some(body) = after.strip_prefix("::=") else {
        return Ok(None);
    };
    validate_name(name, line_no)?;
    Ok(Some((name, body)))
}

fn validate_name(name: &str, line_no: usize) -> Result<(), GrammarError> {
    if name.is_empty() || name.contains(['<', '|']) {
        return Err(GrammarError::Malformed {
            line: line_no,
            message: format!("invalid nonterminal name `{name}`"),
        });
    }
    Ok(())
}

fn tokenize_alternative(
    alt: &str,
    line_no: usize,
    index: &BTreeMap<String, usize>,
) -> Result<Vec<Symbol>, GrammarError> {
    let alt = alt.trim();
    let mut symbols = Vec::new();
    let mut rest = alt;
    while !rest.is_empty() {
        match rest.find('<') {
            None => {
                push_terminal(&mut symbols, rest);
                break;
            }
            Some(open) => {
                push_terminal(&mut symbols, &rest[..open]);
                let after = &rest[open + 1..];
                let close = after
                    .find(['>', '<'])
                    .filter(|&i| after.as_bytes()[i] == b'>')
                    .ok_or(GrammarError::UnterminatedNonterminal { line: line_no })?;
                let name = &after[..close];
                validate_name(name, line_no)?;
                let rule = *index
                    .get(name)
                    .ok_or_else(|| GrammarError::UndefinedNonterminal(name.to_string()))?;
                symbols.push(Symbol::NonTerminal {
                    name: name.to_string(),
                    rule,
                });
                rest = &after[close + 1..];
            }
        }
    }
    Ok(symbols)
}

fn push_terminal(symbols: &mut Vec<Symbol>, run: &str) {
    if !run.trim().is_empty() {
        symbols.push(Symbol::Terminal(run.to_string()));
    }
}

/// Fixpoint: depth(n) = 1 + min over productions of the max child depth
/// (0 for all-terminal productions).
fn compute_min_depths(rules: &[Rule]) -> Result<Vec<usize>, GrammarError> {
    let mut depth: Vec<Option<usize>> = alloc::vec![None; rules.len()];
    loop {
        let mut changed = false;
        for (i, rule) in rules.iter().enumerate() {
            let best = rule
                .productions
                .iter()
                .filter_map(|p| {
                    p.symbols.iter().try_fold(0usize, |acc, s| match s {
                        Symbol::Terminal(_) => Some(acc),
                        Symbol::NonTerminal { rule, .. } => depth[*rule].map(|d| acc.max(d)),
                    })
                })
                .min()
                .map(|d| d + 1);
            if let Some(b) = best {
                if depth[i].is_none_or(|cur| b < cur) {
                    depth[i] = Some(b);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    depth
        .into_iter()
        .zip(rules)
        .map(|(d, r)| d.ok_or_else(|| GrammarError::InfiniteGrammar(r.name.clone())))
        .collect()
}
