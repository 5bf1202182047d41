use super::{DslError, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(u64),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Comma,
    Slash,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Str(_) => "string literal".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Ne => "`!=`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

pub(crate) fn tokenize(source: &str) -> Result<Vec<Token>, DslError> {
    let mut out = Vec::new();
    let mut chars = source.chars().peekable();
    let (mut line, mut column) = (1usize, 1usize);

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else if c.is_some() {
                column += 1;
            }
            c
        }};
    }

    while let Some(&c) = chars.peek() {
        let (start_line, start_col) = (line, column);
        let span = |len: usize| SourceSpan::new(start_line, start_col, len);
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' {
            bump!();
            if chars.peek() == Some(&'/') {
                while chars.peek().is_some_and(|&c| c != '\n') {
                    bump!();
                }
            } else {
                out.push(Token {
                    tok: Tok::Slash,
                    span: span(1),
                });
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut ident = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    ident.push(c);
                    bump!();
                } else {
                    break;
                }
            }
            let len = ident.len();
            out.push(Token {
                tok: Tok::Ident(ident),
                span: span(len),
            });
            continue;
        }
        if c.is_ascii_digit() {
            let mut digits = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_digit() {
                    digits.push(c);
                    bump!();
                } else {
                    break;
                }
            }
            let value = digits.parse().map_err(|_| DslError::Syntax {
                span: span(digits.len()),
                message: format!("integer literal `{digits}` is too large"),
            })?;
            out.push(Token {
                tok: Tok::Int(value),
                span: span(digits.len()),
            });
            continue;
        }
        if c == '"' {
            bump!();
            let mut text = String::new();
            let mut len = 1;
            loop {
                match bump!() {
                    None | Some('\n') => {
                        return Err(DslError::Syntax {
                            span: span(len),
                            message: "unterminated string literal".into(),
                        })
                    }
                    Some('"') => {
                        len += 1;
                        break;
                    }
                    Some('\\') => {
                        len += 2;
                        match bump!() {
                            Some('"') => text.push('"'),
                            Some('\\') => text.push('\\'),
                            Some('n') => text.push('\n'),
                            other => {
                                return Err(DslError::Syntax {
                                    span: span(len),
                                    message: format!("unknown escape `\\{}`", other.unwrap_or(' ')),
                                })
                            }
                        }
                    }
                    Some(ch) => {
                        len += 1;
                        text.push(ch);
                    }
                }
            }
            out.push(Token {
                tok: Tok::Str(text),
                span: span(len),
            });
            continue;
        }
        bump!();
        let two = |next: char, chars: &mut std::iter::Peekable<std::str::Chars>| {
            chars.peek() == Some(&next)
        };
        let tok = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ';' => Tok::Semi,
            ',' => Tok::Comma,
            '=' => Tok::Eq,
            '!' if two('=', &mut chars) => {
                bump!();
                Tok::Ne
            }
            '<' if two('=', &mut chars) => {
                bump!();
                Tok::Le
            }
            '>' if two('=', &mut chars) => {
                bump!();
                Tok::Ge
            }
            '<' => Tok::Lt,
            '>' => Tok::Gt,
            other => {
                return Err(DslError::Syntax {
                    span: span(1),
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        let len = column - start_col;
        out.push(Token {
            tok,
            span: span(len),
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        span: SourceSpan::new(line, column, 0),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn punctuation_and_literals() {
        assert_eq!(
            kinds("flip 1/3 { } count(boy) >= 2 // trailing"),
            vec![
                Tok::Ident("flip".into()),
                Tok::Int(1),
                Tok::Slash,
                Tok::Int(3),
                Tok::LBrace,
                Tok::RBrace,
                Tok::Ident("count".into()),
                Tok::LParen,
                Tok::Ident("boy".into()),
                Tok::RParen,
                Tok::Ge,
                Tok::Int(2),
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn spans_track_lines() {
        let toks = tokenize("a\n  bc").unwrap();
        assert_eq!(toks[1].span, SourceSpan::new(2, 3, 2));
    }

    #[test]
    fn strings_with_escapes() {
        assert_eq!(kinds(r#""a\"b""#)[0], Tok::Str("a\"b".into()));
        assert!(tokenize("\"open").is_err());
        assert!(tokenize("a $ b").is_err());
    }
}
