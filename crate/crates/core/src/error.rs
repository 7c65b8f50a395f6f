use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("malformed token `{token}`: {reason}")]
    Token { token: String, reason: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: head variable ?{var} does not occur in the body")]
    Unsafe { line: usize, var: String },
    #[error("line {line}: rule body is empty")]
    EmptyBody { line: usize },
}

impl ParseError {
    pub(crate) fn token(token: &str, reason: &str) -> Self {
        ParseError::Token { token: token.to_string(), reason: reason.to_string() }
    }

    pub(crate) fn syntax(line: usize, message: impl Into<String>) -> Self {
        ParseError::Syntax { line, message: message.into() }
    }

    /// Attaches a line number.
    pub(crate) fn at_line(self, line: usize) -> Self {
        match self {
            ParseError::Token { token, reason } => {
                ParseError::Syntax { line, message: format!("malformed token `{token}`: {reason}") }
            }
            ParseError::Syntax { message, .. } => ParseError::Syntax { line, message },
            ParseError::Unsafe { var, .. } => ParseError::Unsafe { line, var },
            ParseError::EmptyBody { .. } => ParseError::EmptyBody { line },
        }
    }
}

#[derive(Debug, Error)]
pub enum HeightError {
    #[error("fact is not derivable from the given facts and rules")]
    Underivable,
}
