use std::fmt;
use std::path::PathBuf;

use super::{ParseError, ParseErrorKind};

/// Position of a token in the source text (1-based).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SourceSpan {
    pub file: Option<PathBuf>,
    pub line: usize,
    pub column: usize,
}

impl SourceSpan {
    pub fn new(line: usize, column: usize) -> Self {
        SourceSpan { file: None, line, column }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(file) = &self.file {
            write!(f, "{}:", file.display())?;
        }
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SExpr {
    Symbol(String, SourceSpan),
    List(Vec<SExpr>, SourceSpan),
}

impl SExpr {
    pub fn span(&self) -> &SourceSpan {
        match self {
            SExpr::Symbol(_, s) | SExpr::List(_, s) => s,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            SExpr::Symbol(s, _) => Some(s),
            SExpr::List(..) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(items, _) => Some(items),
            SExpr::Symbol(..) => None,
        }
    }

    /// Head symbol of a non-empty list.
    pub fn head(&self) -> Option<&str> {
        self.as_list().and_then(|l| l.first()).and_then(SExpr::as_symbol)
    }
}

/// Reads all top-level expressions. Symbols are lower-cased; `;` starts a
/// comment running to end of line.
pub fn read_all(text: &str) -> Result<Vec<SExpr>, ParseError> {
    let mut stack: Vec<(Vec<SExpr>, SourceSpan)> = Vec::new();
    let mut top = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);

    while let Some(&c) = chars.peek() {
        let here = SourceSpan::new(line, col);
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' => {
                chars.next();
                col += 1;
                stack.push((Vec::new(), here));
            }
            ')' => {
                chars.next();
                col += 1;
                let (items, span) = stack
                    .pop()
                    .ok_or_else(|| ParseError::new(ParseErrorKind::Syntax, "unbalanced `)`", here))?;
                let list = SExpr::List(items, span);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(list),
                    None => top.push(list),
                }
            }
            _ => {
                let mut sym = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    sym.extend(c.to_lowercase());
                    chars.next();
                    col += 1;
                }
                let atom = SExpr::Symbol(sym, here);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(atom),
                    None => top.push(atom),
                }
            }
        }
    }

    if let Some((_, span)) = stack.pop() {
        return Err(ParseError::new(ParseErrorKind::Syntax, "unclosed `(`", span));
    }
    Ok(top)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_lists_with_positions() {
        let exprs = read_all("; header\n(Define (A ?x))\n").unwrap();
        assert_eq!(exprs.len(), 1);
        let SExpr::List(items, span) = &exprs[0] else { panic!() };
        assert_eq!(span, &SourceSpan::new(2, 1));
        assert_eq!(items[0].as_symbol(), Some("define"));
        assert_eq!(items[1].head(), Some("a"));
        assert_eq!(items[1].as_list().unwrap()[1].span(), &SourceSpan::new(2, 12));
    }

    #[test]
    fn unbalanced_input_is_a_syntax_error() {
        let err = read_all("(a (b)").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Syntax);
        assert_eq!(err.span.line, 1);
        let err = read_all("a)").unwrap_err();
        assert_eq!(err.span.column, 2);
    }
}
