//! SQL tokenizer.
//!
//! Splits raw query text into keywords, identifiers, literals and symbols.
//! Keywords are recognized case-insensitively; the original lexeme is kept
//! so that renderers can reproduce the input byte-for-byte.

use super::SyntaxError;

/// Token classes produced by the lexer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    /// Reserved word (canonical form in [`Token::canon`]).
    Keyword,
    Ident,
    Int,
    Float,
    /// String literal, quotes included in the lexeme.
    Str,
    /// Operator or punctuation.
    Symbol,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokenKind,
    /// Lexeme exactly as written in the source.
    pub text: String,
    /// Uppercased text for keywords and symbols, `text` otherwise.
    pub canon: String,
    /// Byte offset of the first character.
    pub offset: usize,
}

impl Token {
    pub fn is_kw(&self, kw: &str) -> bool {
        self.kind == TokenKind::Keyword && self.canon == kw
    }

    pub fn is_sym(&self, sym: &str) -> bool {
        self.kind == TokenKind::Symbol && self.canon == sym
    }
}

/// Reserved words of the supported SQLite subset. Matching is
/// case-insensitive; identifiers may not collide with these.
pub const KEYWORDS: &[&str] = &[
    "ABORT", "AFTER", "ALL", "AND", "AS", "ASC", "AUTOINCREMENT", "BEFORE", "BEGIN", "BETWEEN",
    "BLOB", "BOOLEAN", "BY", "CASE", "CAST", "CHAR", "CHECK", "COLLATE", "CONFLICT", "CREATE",
    "CROSS", "DATE", "DATETIME", "DECIMAL", "DEFAULT", "DELETE", "DESC", "DISTINCT", "DO",
    "DOUBLE", "DROP", "ELSE", "END", "ESCAPE", "EXCEPT", "EXISTS", "FAIL", "FLOAT", "FOREIGN",
    "FROM", "GLOB", "GROUP", "HAVING", "IF", "IGNORE", "IN", "INDEX", "INNER", "INSERT", "INT",
    "INTEGER", "INTERSECT", "INTO", "IS", "ISNULL", "JOIN", "KEY", "LEFT", "LIKE", "LIMIT",
    "NATURAL", "NOCASE", "NOT", "NOTHING", "NOTNULL", "NULL", "NUMERIC", "OF", "OFFSET", "ON",
    "OR", "ORDER", "OUTER", "PRAGMA", "PRIMARY", "REAL", "REFERENCES", "REPLACE", "ROLLBACK",
    "SELECT", "SET", "TABLE", "TEMP", "TEMPORARY", "TEXT", "THEN", "TRIGGER", "UNION", "UNIQUE",
    "UPDATE", "USING", "VALUES", "VARCHAR", "VIEW", "VIRTUAL", "WHEN", "WHERE", "WITH",
];

fn is_keyword(upper: &str) -> bool {
    KEYWORDS.binary_search(&upper).is_ok()
}

fn is_ident_start(c: u8) -> bool {
    c.is_ascii_alphabetic() || c == b'_'
}

fn is_ident_cont(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_'
}

/// Tokenize `input`, skipping whitespace and `--` / `/* */` comments.
pub fn tokenize(input: &str) -> Result<Vec<Token>, SyntaxError> {
    let bytes = input.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        // line comment
        if c == b'-' && bytes.get(i + 1) == Some(&b'-') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        // block comment
        if c == b'/' && bytes.get(i + 1) == Some(&b'*') {
            let start = i;
            i += 2;
            loop {
                if i + 1 >= bytes.len() {
                    return Err(SyntaxError::new(start, "unterminated block comment"));
                }
                if bytes[i] == b'*' && bytes[i + 1] == b'/' {
                    i += 2;
                    break;
                }
                i += 1;
            }
            continue;
        }
        if is_ident_start(c) {
            let start = i;
            while i < bytes.len() && is_ident_cont(bytes[i]) {
                i += 1;
            }
            let text = &input[start..i];
            let upper = text.to_ascii_uppercase();
            if is_keyword(&upper) {
                out.push(Token {
                    kind: TokenKind::Keyword,
                    text: text.to_string(),
                    canon: upper,
                    offset: start,
                });
            } else {
                out.push(Token {
                    kind: TokenKind::Ident,
                    text: text.to_string(),
                    canon: text.to_string(),
                    offset: start,
                });
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            // hex literal
            if c == b'0' && matches!(bytes.get(i + 1), Some(b'x') | Some(b'X')) {
                i += 2;
                while i < bytes.len() && bytes[i].is_ascii_hexdigit() {
                    i += 1;
                }
                let text = input[start..i].to_string();
                out.push(Token {
                    kind: TokenKind::Int,
                    canon: text.clone(),
                    text,
                    offset: start,
                });
                continue;
            }
            let mut kind = TokenKind::Int;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' && bytes.get(i + 1).is_some_and(|b| b.is_ascii_digit()) {
                kind = TokenKind::Float;
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    kind = TokenKind::Float;
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = input[start..i].to_string();
            out.push(Token {
                kind,
                canon: text.clone(),
                text,
                offset: start,
            });
            continue;
        }
        // string literals: single quotes (SQL) and double quotes, which the
        // SQLite dialect accepts as string values in most contexts
        if c == b'\'' || c == b'"' {
            let quote = c;
            let start = i;
            i += 1;
            loop {
                if i >= bytes.len() {
                    return Err(SyntaxError::new(start, "unterminated string literal"));
                }
                if bytes[i] == quote {
                    // doubled quote is an escape
                    if bytes.get(i + 1) == Some(&quote) {
                        i += 2;
                        continue;
                    }
                    i += 1;
                    break;
                }
                i += 1;
            }
            let text = input[start..i].to_string();
            out.push(Token {
                kind: TokenKind::Str,
                canon: text.clone(),
                text,
                offset: start,
            });
            continue;
        }
        // multi-char symbols first
        let two = if i + 1 < bytes.len() { &input[i..i + 2] } else { "" };
        let sym: Option<&'static str> = match two {
            "==" => Some("=="),
            "!=" => Some("!="),
            "<>" => Some("<>"),
            "<=" => Some("<="),
            ">=" => Some(">="),
            "||" => Some("||"),
            "<<" => Some("<<"),
            ">>" => Some(">>"),
            _ => None,
        };
        if let Some(s) = sym {
            out.push(Token {
                kind: TokenKind::Symbol,
                text: s.to_string(),
                canon: s.to_string(),
                offset: i,
            });
            i += 2;
            continue;
        }
        let one: Option<&'static str> = match c {
            b'(' => Some("("),
            b')' => Some(")"),
            b',' => Some(","),
            b';' => Some(";"),
            b'.' => Some("."),
            b'=' => Some("="),
            b'<' => Some("<"),
            b'>' => Some(">"),
            b'+' => Some("+"),
            b'-' => Some("-"),
            b'*' => Some("*"),
            b'/' => Some("/"),
            b'%' => Some("%"),
            b'&' => Some("&"),
            b'|' => Some("|"),
            b'~' => Some("~"),
            _ => None,
        };
        match one {
            Some(s) => {
                out.push(Token {
                    kind: TokenKind::Symbol,
                    text: s.to_string(),
                    canon: s.to_string(),
                    offset: i,
                });
                i += 1;
            }
            None => {
                return Err(SyntaxError::new(
                    i,
                    format!("unexpected character {:?}", c as char),
                ));
            }
        }
    }
    Ok(out)
}

/// Whitespace- and keyword-case-insensitive token equality of two SQL texts.
///
/// String literals compare exactly; everything else compares by canonical
/// form. Trailing statement terminators are ignored, since renderers always
/// emit a final `;` while inputs may omit it. Used by round-trip checks.
pub fn token_equal(a: &str, b: &str) -> bool {
    match (tokenize(a), tokenize(b)) {
        (Ok(mut ta), Ok(mut tb)) => {
            while ta.last().is_some_and(|t| t.is_sym(";")) {
                ta.pop();
            }
            while tb.last().is_some_and(|t| t.is_sym(";")) {
                tb.pop();
            }
            ta.len() == tb.len()
                && ta
                    .iter()
                    .zip(tb.iter())
                    .all(|(x, y)| x.kind == y.kind && x.canon == y.canon)
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keywords_are_sorted_for_binary_search() {
        let mut sorted = KEYWORDS.to_vec();
        sorted.sort_unstable();
        assert_eq!(sorted, KEYWORDS);
    }

    #[test]
    fn tokenizes_running_example() {
        let toks = tokenize("SELECT c2, c6 FROM t1, t2 WHERE t1.c1 = t2.c5;").unwrap();
        let texts: Vec<&str> = toks.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(
            texts,
            [
                "SELECT", "c2", ",", "c6", "FROM", "t1", ",", "t2", "WHERE", "t1", ".", "c1", "=",
                "t2", ".", "c5", ";"
            ]
        );
        assert_eq!(toks[0].kind, TokenKind::Keyword);
        assert_eq!(toks[1].kind, TokenKind::Ident);
    }

    #[test]
    fn keyword_case_insensitive_identifier_case_preserved() {
        let toks = tokenize("select Foo").unwrap();
        assert!(toks[0].is_kw("SELECT"));
        assert_eq!(toks[0].text, "select");
        assert_eq!(toks[1].text, "Foo");
    }

    #[test]
    fn numeric_and_string_literals() {
        let toks = tokenize("1 0xFFFF 10.100000 1e3 'a''b' \"1\"").unwrap();
        let kinds: Vec<TokenKind> = toks.iter().map(|t| t.kind).collect();
        assert_eq!(
            kinds,
            [
                TokenKind::Int,
                TokenKind::Int,
                TokenKind::Float,
                TokenKind::Float,
                TokenKind::Str,
                TokenKind::Str
            ]
        );
        assert_eq!(toks[4].text, "'a''b'");
    }

    #[test]
    fn comments_are_skipped() {
        let toks = tokenize("SELECT 1 -- trailing\n/* block */ , 2").unwrap();
        assert_eq!(toks.len(), 4);
    }

    #[test]
    fn error_carries_byte_offset() {
        let err = tokenize("SELECT ?").unwrap_err();
        assert_eq!(err.offset, 7);
    }

    #[test]
    fn token_equality_ignores_case_and_spacing() {
        assert!(token_equal("select a from t", "SELECT  a\nFROM t"));
        assert!(!token_equal("SELECT 'A'", "SELECT 'a'"));
        assert!(!token_equal("SELECT a", "SELECT a, b"));
    }
}
