use super::SyntaxError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    LAngle,
    RAngle,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    Bar,
    Equals,
    Star,
    Bang,
    Arrow,
    Lolli,
    Eof,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

/// Splits source text into tokens; `--` starts a comment running to the end of the line.
pub fn lex(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let ch = chars[i];
        let span = Span { line, column: col };
        let next = chars.get(i + 1).copied();
        let mut adv = 1;
        let kind = match ch {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
                continue;
            }
            '-' if next == Some('-') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '-' if next == Some('>') => {
                adv = 2;
                TokenKind::Arrow
            }
            '-' if next == Some('o') && !chars.get(i + 2).is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_') => {
                adv = 2;
                TokenKind::Lolli
            }
            '⊸' => TokenKind::Lolli,
            '⊗' => TokenKind::Star,
            '<' | '⟨' => TokenKind::LAngle,
            '>' | '⟩' => TokenKind::RAngle,
            '(' => TokenKind::LParen,
            ')' => TokenKind::RParen,
            '[' => TokenKind::LBracket,
            ']' => TokenKind::RBracket,
            '{' => TokenKind::LBrace,
            '}' => TokenKind::RBrace,
            ',' => TokenKind::Comma,
            ';' => TokenKind::Semi,
            ':' => TokenKind::Colon,
            '|' => TokenKind::Bar,
            '=' => TokenKind::Equals,
            '*' => TokenKind::Star,
            '!' => TokenKind::Bang,
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_' || chars[j] == '\'') {
                    j += 1;
                }
                adv = j - start;
                TokenKind::Ident(chars[start..j].iter().collect())
            }
            c => {
                return Err(SyntaxError::Parse { line, column: col, message: format!("unexpected character `{c}`") })
            }
        };
        out.push(Token { kind, span });
        i += adv;
        col += adv;
    }
    out.push(Token { kind: TokenKind::Eof, span: Span { line, column: col } });
    Ok(out)
}
