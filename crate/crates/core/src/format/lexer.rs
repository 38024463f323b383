use super::{FormatError, Position};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Word(String),
    Str(String),
    Arrow,
    Open,
    Close,
    Newline,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Arrow => "`->`".into(),
            Tok::Open => "`{`".into(),
            Tok::Close => "`}`".into(),
            Tok::Newline => "end of line".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Position,
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-' | '+' | '/')
}

/// Splits `text` into tokens. Consecutive newlines collapse into one.
pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, FormatError> {
    let mut out: Vec<Token> = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    let push = |out: &mut Vec<Token>, tok: Tok, pos: Position| {
        if tok == Tok::Newline && matches!(out.last(), None | Some(Token { tok: Tok::Newline, .. })) {
            return;
        }
        out.push(Token { tok, pos });
    };

    while let Some(&c) = chars.peek() {
        let pos = Position { line, col };
        match c {
            '\n' => {
                chars.next();
                push(&mut out, Tok::Newline, pos);
                line += 1;
                col = 1;
            }
            ' ' | '\t' | '\r' => {
                chars.next();
                col += 1;
            }
            '#' => {
                while chars.peek().is_some_and(|&c| c != '\n') {
                    chars.next();
                    col += 1;
                }
            }
            '{' | '}' => {
                chars.next();
                col += 1;
                push(&mut out, if c == '{' { Tok::Open } else { Tok::Close }, pos);
            }
            '"' => {
                chars.next();
                col += 1;
                let mut s = String::new();
                loop {
                    match chars.next() {
                        None | Some('\n') => return Err(FormatError::syntax(pos, &["closing `\"`"], "end of line")),
                        Some('"') => {
                            col += 1;
                            break;
                        }
                        Some('\\') => {
                            col += 2;
                            match chars.next() {
                                Some('"') => s.push('"'),
                                Some('\\') => s.push('\\'),
                                Some('n') => s.push('\n'),
                                other => {
                                    let found = other.map_or("end of input".to_string(), |c| format!("`\\{c}`"));
                                    return Err(FormatError::syntax(
                                        Position { line, col: col - 2 },
                                        &["`\\\"`", "`\\\\`", "`\\n`"],
                                        &found,
                                    ));
                                }
                            }
                        }
                        Some(ch) => {
                            col += 1;
                            s.push(ch);
                        }
                    }
                }
                push(&mut out, Tok::Str(s), pos);
            }
            '-' if text_at_arrow(&chars) => {
                chars.next();
                chars.next();
                col += 2;
                push(&mut out, Tok::Arrow, pos);
            }
            c if is_word_char(c) => {
                let mut w = String::new();
                while let Some(&c) = chars.peek() {
                    if !is_word_char(c) || (c == '-' && text_at_arrow(&chars)) {
                        break;
                    }
                    w.push(c);
                    chars.next();
                    col += 1;
                }
                push(&mut out, Tok::Word(w), pos);
            }
            other => {
                return Err(FormatError::syntax(
                    pos,
                    &["identifier", "number", "`{`", "`}`", "`->`", "string"],
                    &format!("character {other:?}"),
                ))
            }
        }
    }
    push(&mut out, Tok::Newline, Position { line, col });
    out.push(Token {
        tok: Tok::Eof,
        pos: Position { line, col },
    });
    Ok(out)
}

fn text_at_arrow(chars: &std::iter::Peekable<std::str::Chars<'_>>) -> bool {
    let mut ahead = chars.clone();
    ahead.next() == Some('-') && ahead.next() == Some('>')
}
