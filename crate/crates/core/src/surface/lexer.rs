//! Tokenizer for `.loop` and `.t` files. Unicode notation is folded onto the
//! ASCII spellings here so the parser only sees one alphabet.

use super::ParseError;
use crate::syntax::Span;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(u64),
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    Lt,
    Gt,
    Comma,
    Semi,
    Colon,
    Dot,
    Eq,
    Assign,
    Coerce,
    ContInst,
    Arrow,
    FatArrow,
    Star,
    Tilde,
    Question,
    Slash,
    Underscore,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(n) => format!("`{n}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.spelling()),
        }
    }

    pub fn spelling(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrack => "[",
            Tok::RBrack => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Dot => ".",
            Tok::Eq => "=",
            Tok::Assign => ":=",
            Tok::Coerce => ":>",
            Tok::ContInst => "<:",
            Tok::Arrow => "->",
            Tok::FatArrow => "=>",
            Tok::Star => "*",
            Tok::Tilde => "~",
            Tok::Question => "?",
            Tok::Slash => "/",
            Tok::Underscore => "_",
            Tok::Ident(_) | Tok::Num(_) | Tok::Eof => "",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub struct Lexed {
    pub tokens: Vec<Token>,
    /// Text of every `// adjusted:` comment, in order.
    pub adjustments: Vec<String>,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub fn lex(src: &str) -> Result<Lexed, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut tokens = Vec::new();
    let mut adjustments = Vec::new();
    // Line of the most recent comment belonging to an open adjustment note.
    let mut note_line: Option<u32> = None;
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);

    macro_rules! push {
        ($tok:expr, $len:expr, $span:expr) => {{
            let len = $len;
            tokens.push(Token {
                tok: $tok,
                span: $span,
            });
            i += len;
            col += len as u32;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        let next = chars.get(i + 1).copied();
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
        if c == '/' && next == Some('/') {
            let start = i + 2;
            let mut end = start;
            while end < chars.len() && chars[end] != '\n' {
                end += 1;
            }
            let text: String = chars[start..end].iter().collect();
            let text = text.trim();
            if let Some(note) = text.strip_prefix("adjusted:") {
                adjustments.push(note.trim().to_string());
                note_line = Some(line);
            } else if note_line.is_some_and(|l| l + 1 == line) && !text.is_empty() {
                // Comment lines directly below an adjustment continue it.
                let last = adjustments.last_mut().expect("a note is open");
                last.push(' ');
                last.push_str(text);
                note_line = Some(line);
            } else {
                note_line = None;
            }
            col += (end - i) as u32;
            i = end;
            continue;
        }
        if c.is_ascii_digit() {
            let mut end = i;
            while end < chars.len() && chars[end].is_ascii_digit() {
                end += 1;
            }
            let text: String = chars[i..end].iter().collect();
            let n = text.parse().map_err(|_| ParseError {
                line,
                col,
                expected: vec!["a numeral that fits in 64 bits".into()],
                found: text.clone(),
            })?;
            push!(Tok::Num(n), end - i, span);
            continue;
        }
        if c == '_' && !next.is_some_and(is_ident_char) {
            push!(Tok::Underscore, 1, span);
            continue;
        }
        if is_ident_start(c) {
            let mut end = i;
            while end < chars.len() && is_ident_char(chars[end]) {
                end += 1;
            }
            let text: String = chars[i..end].iter().collect();
            push!(Tok::Ident(text), end - i, span);
            continue;
        }
        let two = next.map(|n| [c, n]);
        let double = match two {
            Some([':', '=']) => Some(Tok::Assign),
            Some([':', '>']) => Some(Tok::Coerce),
            Some(['<', ':']) => Some(Tok::ContInst),
            Some(['-', '>']) => Some(Tok::Arrow),
            Some(['=', '>']) => Some(Tok::FatArrow),
            _ => None,
        };
        if let Some(tok) = double {
            push!(tok, 2, span);
            continue;
        }
        let single = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBrack,
            ']' => Tok::RBrack,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '<' | '⟨' => Tok::Lt,
            '>' | '⟩' => Tok::Gt,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            ':' => Tok::Colon,
            '.' => Tok::Dot,
            '=' => Tok::Eq,
            '*' | '⋆' => Tok::Star,
            '~' | '∼' | '¬' => Tok::Tilde,
            '?' => Tok::Question,
            '/' => Tok::Slash,
            '→' => Tok::Arrow,
            '⇒' => Tok::FatArrow,
            '∀' => Tok::Ident("forall".into()),
            '∃' => Tok::Ident("exists".into()),
            '⊤' => Tok::Ident("top".into()),
            '⊥' => Tok::Ident("bot".into()),
            'λ' => Tok::Ident("lam".into()),
            '∈' => Tok::Ident("in".into()),
            other => {
                return Err(ParseError {
                    line,
                    col,
                    expected: vec!["a token".into()],
                    found: format!("`{other}`"),
                })
            }
        };
        push!(single, 1, span);
    }
    tokens.push(Token {
        tok: Tok::Eof,
        span: Span { line, col },
    });
    Ok(Lexed {
        tokens,
        adjustments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().tokens.into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn compound_operators() {
        assert_eq!(
            toks("x := y :> e <: f -> g => h"),
            vec![
                Tok::Ident("x".into()),
                Tok::Assign,
                Tok::Ident("y".into()),
                Tok::Coerce,
                Tok::Ident("e".into()),
                Tok::ContInst,
                Tok::Ident("f".into()),
                Tok::Arrow,
                Tok::Ident("g".into()),
                Tok::FatArrow,
                Tok::Ident("h".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn unicode_aliases() {
        assert_eq!(
            toks("∀n ⟨⊤⟩"),
            vec![
                Tok::Ident("forall".into()),
                Tok::Ident("n".into()),
                Tok::Lt,
                Tok::Ident("top".into()),
                Tok::Gt,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn adjusted_comments_are_collected() {
        let l = lex("// adjusted: renamed q\n// because of a clash\n\n// plain\nx").unwrap();
        assert_eq!(l.adjustments, vec!["renamed q because of a clash".to_string()]);
        assert_eq!(l.tokens[0].span, Span { line: 5, col: 1 });
    }

    #[test]
    fn underscore_forms() {
        assert_eq!(
            toks("_ _v1"),
            vec![Tok::Underscore, Tok::Ident("_v1".into()), Tok::Eof]
        );
    }
}
