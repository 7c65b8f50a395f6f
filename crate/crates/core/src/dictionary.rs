//! Term dictionary mapping lexical forms to dense constant ids.

use std::collections::HashMap;

use crate::error::ParseError;
use crate::term::{Constant, Triple, SAME_AS};

pub const SAME_AS_CURIE: &str = "owl:sameAs";
pub const SAME_AS_IRI: &str = "<http://www.w3.org/2002/07/owl#sameAs>";

/// Append-only dictionary. Ids are assigned densely in first-encounter
/// order; `owl:sameAs` is pre-registered as id 0.
#[derive(Clone, Debug)]
pub struct Dictionary {
    ids: HashMap<String, Constant>,
    lexical: Vec<String>,
}

impl Default for Dictionary {
    fn default() -> Self {
        Self::new()
    }
}

impl Dictionary {
    pub fn new() -> Self {
        let mut ids = HashMap::new();
        ids.insert(SAME_AS_CURIE.to_string(), SAME_AS);
        ids.insert(SAME_AS_IRI.to_string(), SAME_AS);
        Dictionary { ids, lexical: vec![SAME_AS_CURIE.to_string()] }
    }

    /// Interns a validated token.
    pub fn intern(&mut self, lexical: &str) -> Result<Constant, ParseError> {
        if let Some(&c) = self.ids.get(lexical) {
            return Ok(c);
        }
        validate_token(lexical)?;
        Ok(self.intern_unchecked(lexical))
    }

    fn intern_unchecked(&mut self, lexical: &str) -> Constant {
        let c = Constant(self.lexical.len() as u32);
        self.ids.insert(lexical.to_string(), c);
        self.lexical.push(lexical.to_string());
        c
    }

    pub fn lookup(&self, lexical: &str) -> Option<Constant> {
        self.ids.get(lexical).copied()
    }

    pub fn decode(&self, c: Constant) -> Option<&str> {
        self.lexical.get(c.index()).map(String::as_str)
    }

    /// Number of constants, i.e. one past the largest id.
    pub fn len(&self) -> usize {
        self.lexical.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lexical forms in id order.
    pub fn entries(&self) -> impl Iterator<Item = (Constant, &str)> {
        self.lexical.iter().enumerate().map(|(i, s)| (Constant(i as u32), s.as_str()))
    }

    pub fn render(&self, c: Constant) -> String {
        self.decode(c).map_or_else(|| format!("_:unknown{}", c.0), str::to_string)
    }

    pub fn render_triple(&self, t: &Triple) -> String {
        format!("{} {} {} .", self.render(t.s), self.render(t.p), self.render(t.o))
    }
}

/// Accepts `<iri>`, `"literal"` (optionally `@lang` or `^^<iri>`), blank
/// node labels `_:x`, and prefixed names such as `ex:a` or `:a`.
pub fn validate_token(tok: &str) -> Result<(), ParseError> {
    let bad = |why: &str| Err(ParseError::token(tok, why));
    if tok.is_empty() {
        return bad("empty token");
    }
    if let Some(rest) = tok.strip_prefix('<') {
        let Some(iri) = rest.strip_suffix('>') else {
            return bad("unterminated IRI");
        };
        if iri.chars().any(|c| c.is_whitespace() || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`')) {
            return bad("illegal character in IRI");
        }
        return Ok(());
    }
    if tok.starts_with('"') {
        let end = literal_end(tok).ok_or_else(|| ParseError::token(tok, "unterminated literal"))?;
        let suffix = &tok[end..];
        if suffix.is_empty() {
            return Ok(());
        }
        if let Some(lang) = suffix.strip_prefix('@') {
            if !lang.is_empty() && lang.chars().all(|c| c.is_ascii_alphanumeric() || c == '-') {
                return Ok(());
            }
            return bad("malformed language tag");
        }
        if let Some(dt) = suffix.strip_prefix("^^") {
            return validate_token(dt).and_then(|_| {
                if dt.starts_with('"') {
                    Err(ParseError::token(tok, "datatype must be an IRI"))
                } else {
                    Ok(())
                }
            });
        }
        return bad("trailing characters after literal");
    }
    if let Some(label) = tok.strip_prefix("_:") {
        if !label.is_empty() && label.chars().all(is_name_char) {
            return Ok(());
        }
        return bad("malformed blank node label");
    }
    let Some((prefix, local)) = tok.split_once(':') else {
        return bad("expected <IRI>, literal, or prefixed name");
    };
    let prefix_ok = prefix.is_empty()
        || (prefix.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) && prefix.chars().all(is_name_char));
    if !prefix_ok || !local.chars().all(|c| is_name_char(c) || matches!(c, ':' | '/' | '#' | '%')) {
        return bad("malformed prefixed name");
    }
    Ok(())
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '.')
}

/// Byte offset just past the closing quote of a literal starting at 0.
pub(crate) fn literal_end(s: &str) -> Option<usize> {
    let mut escaped = false;
    for (i, c) in s.char_indices().skip(1) {
        match c {
            _ if escaped => escaped = false,
            '\\' => escaped = true,
            '"' => return Some(i + 1),
            _ => {}
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_as_is_zero() {
        let mut d = Dictionary::new();
        assert_eq!(d.intern("owl:sameAs").unwrap(), SAME_AS);
        assert_eq!(d.intern(SAME_AS_IRI).unwrap(), SAME_AS);
        assert_eq!(d.decode(SAME_AS), Some("owl:sameAs"));
    }

    #[test]
    fn dense_ids_in_encounter_order() {
        let mut d = Dictionary::new();
        let a = d.intern(":a").unwrap();
        let b = d.intern(":b").unwrap();
        assert_eq!((a, b), (Constant(1), Constant(2)));
        assert_eq!(d.intern(":a").unwrap(), a);
        assert_eq!(d.decode(a), Some(":a"));
        assert_eq!(d.decode(b), Some(":b"));
        assert_eq!(d.len(), 3);
    }

    #[test]
    fn accepts_the_supported_token_shapes() {
        for tok in [
            "<http://example.org/a>",
            "\"plain\"",
            "\"esc \\\" quote\"",
            "\"chat\"@fr",
            "\"5\"^^<http://www.w3.org/2001/XMLSchema#int>",
            "_:b0",
            ":a",
            "ex:Person",
            "rdf:type",
        ] {
            validate_token(tok).unwrap_or_else(|e| panic!("{tok}: {e}"));
        }
    }

    #[test]
    fn rejects_malformed_tokens() {
        let mut d = Dictionary::new();
        for tok in ["", "<a b>", "<open", "\"open", "\"x\"junk", "noprefix", "9x:a", "_:", "\"x\"@"] {
            assert!(d.intern(tok).is_err(), "{tok:?} should be rejected");
        }
        assert_eq!(d.len(), 1);
    }
}
