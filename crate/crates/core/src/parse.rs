//! Text formats: the rule language and an N-Triples subset.
//!
//! Rules, one per line:
//!
//! ```text
//! [?y1, owl:sameAs, ?y2] :- [?y1, :R, ?x], [?y2, :R, ?x] .
//! ?y1 == ?y2 :- [?x, :R, ?y1], [?x, :R, ?y2] .
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use crate::dictionary::{literal_end, Dictionary};
use crate::error::ParseError;
use crate::program::{Program, Rule, RuleError};
use crate::term::{Atom, Term, Triple, Var, SAME_AS};

pub fn parse_program(text: &str, dict: &mut Dictionary) -> Result<Program, ParseError> {
    let mut rules = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        rules.push(parse_rule(line, dict).map_err(|e| e.at_line(line_no))?);
    }
    Ok(Program::new(rules))
}

/// Parses a single rule line (without line-number context).
pub fn parse_rule(line: &str, dict: &mut Dictionary) -> Result<Rule, ParseError> {
    let mut lx = Lexer::new(line);
    let mut vars: Vec<String> = Vec::new();
    let head = parse_atom(&mut lx, dict, &mut vars)?;
    lx.expect(":-")?;
    let mut body = Vec::new();
    lx.skip_ws();
    if !lx.peek_is('.') {
        loop {
            body.push(parse_atom(&mut lx, dict, &mut vars)?);
            lx.skip_ws();
            if lx.eat(',') {
                continue;
            }
            break;
        }
    }
    lx.expect(".")?;
    lx.skip_ws();
    if !lx.at_end() {
        return Err(ParseError::syntax(0, format!("unexpected trailing input `{}`", lx.rest())));
    }
    Rule::with_names(head, body, vars).map_err(|e| match e {
        RuleError::EmptyBody => ParseError::EmptyBody { line: 0 },
        RuleError::Unsafe(var) => ParseError::Unsafe { line: 0, var },
    })
}

fn parse_atom(lx: &mut Lexer<'_>, dict: &mut Dictionary, vars: &mut Vec<String>) -> Result<Atom, ParseError> {
    lx.skip_ws();
    if lx.eat('[') {
        let s = parse_term(lx, dict, vars)?;
        lx.expect(",")?;
        let p = parse_term(lx, dict, vars)?;
        lx.expect(",")?;
        let o = parse_term(lx, dict, vars)?;
        lx.expect("]")?;
        return Ok(Atom { s, p, o });
    }
    let s = parse_term(lx, dict, vars)?;
    lx.expect("==")?;
    let o = parse_term(lx, dict, vars)?;
    Ok(Atom { s, p: Term::Const(SAME_AS), o })
}

fn parse_term(lx: &mut Lexer<'_>, dict: &mut Dictionary, vars: &mut Vec<String>) -> Result<Term, ParseError> {
    lx.skip_ws();
    let tok = lx.token()?;
    if let Some(name) = tok.strip_prefix('?') {
        if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
            return Err(ParseError::syntax(0, format!("malformed variable `{tok}`")));
        }
        let idx = match vars.iter().position(|v| v == name) {
            Some(i) => i,
            None => {
                vars.push(name.to_string());
                vars.len() - 1
            }
        };
        return Ok(Term::Var(Var(idx as u32)));
    }
    Ok(Term::Const(dict.intern(tok)?))
}

/// Parses N-Triples-style facts, one `s p o .` per line.
pub fn parse_facts(text: &str, dict: &mut Dictionary) -> Result<Vec<Triple>, ParseError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        out.push(parse_fact_line(trimmed, dict).map_err(|e| e.at_line(line_no))?);
    }
    Ok(out)
}

fn parse_fact_line(line: &str, dict: &mut Dictionary) -> Result<Triple, ParseError> {
    let mut lx = Lexer::new(line);
    let mut terms = [SAME_AS; 3];
    for slot in terms.iter_mut() {
        lx.skip_ws();
        let tok = lx.token()?;
        if tok.starts_with('?') {
            return Err(ParseError::syntax(0, "variables are not allowed in facts"));
        }
        *slot = dict.intern(tok)?;
    }
    lx.expect(".")?;
    lx.skip_ws();
    if !lx.at_end() {
        return Err(ParseError::syntax(0, format!("unexpected trailing input `{}`", lx.rest())));
    }
    let [s, p, o] = terms;
    Ok(Triple::new(s, p, o))
}

/// Renders facts as N-Triples lines.
pub fn write_facts<'a>(facts: impl IntoIterator<Item = &'a Triple>, dict: &Dictionary) -> String {
    let mut out = String::new();
    for t in facts {
        out.push_str(&dict.render_triple(t));
        out.push('\n');
    }
    out
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn skip_ws(&mut self) {
        let r = self.rest();
        self.pos += r.len() - r.trim_start().len();
    }

    fn peek_is(&self, c: char) -> bool {
        self.rest().starts_with(c)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek_is(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), ParseError> {
        self.skip_ws();
        if self.rest().starts_with(s) {
            self.pos += s.len();
            Ok(())
        } else {
            let found: String = self.rest().chars().take(12).collect();
            Err(ParseError::syntax(0, format!("expected `{s}`, found `{found}`")))
        }
    }

    /// One term token: `<...>`, a quoted literal with optional suffix, or a
    /// run of characters up to whitespace or a delimiter.
    fn token(&mut self) -> Result<&'a str, ParseError> {
        let r = self.rest();
        let len = if r.starts_with('<') {
            r.find('>').map(|i| i + 1).ok_or_else(|| ParseError::syntax(0, "unterminated IRI"))?
        } else if r.starts_with('"') {
            let end = literal_end(r).ok_or_else(|| ParseError::syntax(0, "unterminated literal"))?;
            let suffix = &r[end..];
            let extra = if suffix.starts_with("^^<") {
                suffix.find('>').map(|i| i + 1).unwrap_or(suffix.len())
            } else if suffix.starts_with('@') || suffix.starts_with("^^") {
                suffix.find(|c: char| c.is_whitespace() || matches!(c, ',' | ']')).unwrap_or(suffix.len())
            } else {
                0
            };
            end + extra
        } else {
            let mut end = r.find(|c: char| c.is_whitespace() || matches!(c, ',' | '[' | ']')).unwrap_or(r.len());
            // names never end in '.', so a trailing one terminates the statement
            while r[..end].ends_with('.') {
                end -= 1;
            }
            end
        };
        if len == 0 {
            let found: String = r.chars().take(12).collect();
            return Err(ParseError::syntax(0, format!("expected a term, found `{found}`")));
        }
        self.pos += len;
        Ok(&r[..len])
    }
}
