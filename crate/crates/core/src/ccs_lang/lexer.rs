use super::{CcsError, Span};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Num(u64),
    /// Contents of `{...}`: an explicit instruction name.
    Braced(String),
    Quote,
    Dot,
    Plus,
    Bar,
    Backslash,
    LBrack,
    RBrack,
    LParen,
    RParen,
    Arrow,
    Comma,
    Eq,
    Hash,
    Eof,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub(crate) fn lex(src: &str) -> Result<Vec<Token>, CcsError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, msg: String| CcsError::Syntax { line, col, msg };
    // End of the last token, reported for errors at end of input.
    let mut end = Span { line: 1, col: 1 };
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token { tok: Tok::Ident(s), span });
            end = Span { line, col };
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            let n = s.parse::<u64>().map_err(|_| err(span.line, span.col, format!("number out of range: {s}")))?;
            out.push(Token { tok: Tok::Num(n), span });
            end = Span { line, col };
            continue;
        }
        if c == '{' {
            let start = i + 1;
            let mut j = start;
            while j < chars.len() && chars[j] != '}' {
                if chars[j] == '\n' {
                    return Err(err(line, col, "unterminated instruction name".into()));
                }
                j += 1;
            }
            if j >= chars.len() {
                return Err(err(line, col, "unterminated instruction name".into()));
            }
            let name: String = chars[start..j].iter().collect::<String>().trim().to_string();
            let valid = !name.is_empty()
                && name.chars().all(|c| c.is_ascii_alphanumeric() || "_@~#'".contains(c));
            if !valid {
                return Err(err(line, col, format!("bad instruction name {{{name}}}")));
            }
            col += j + 1 - i;
            i = j + 1;
            out.push(Token { tok: Tok::Braced(name), span });
            end = Span { line, col };
            continue;
        }
        let (tok, len) = match c {
            '\'' => (Tok::Quote, 1),
            '.' => (Tok::Dot, 1),
            '+' => (Tok::Plus, 1),
            '|' => (Tok::Bar, 1),
            '\\' => (Tok::Backslash, 1),
            '[' => (Tok::LBrack, 1),
            ']' => (Tok::RBrack, 1),
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            ',' => (Tok::Comma, 1),
            '=' => (Tok::Eq, 1),
            '#' => (Tok::Hash, 1),
            '-' if chars.get(i + 1) == Some(&'>') => (Tok::Arrow, 2),
            _ => return Err(err(line, col, format!("unexpected character {c:?}"))),
        };
        out.push(Token { tok, span });
        i += len;
        col += len;
        end = Span { line, col };
    }
    out.push(Token { tok: Tok::Eof, span: end });
    Ok(out)
}
