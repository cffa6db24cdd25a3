use crate::model::Span;

use super::diag::Diagnostic;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Forall,
    Exists,
    In,
    NotIn,
    Subset,
    Union,
    Inter,
    Diff,
    And,
    Or,
    Not,
    Implies,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    MapsTo,
    Assign,
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
    Prime,
    DotDot,
    Arrow,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(i) => format!("`{i}`"),
            Tok::Eof => "end of input".to_string(),
            t => format!("`{}`", symbol(t)),
        }
    }
}

fn symbol(t: &Tok) -> &'static str {
    match t {
        Tok::Forall => "forall",
        Tok::Exists => "exists",
        Tok::In => "in",
        Tok::NotIn => "notin",
        Tok::Subset => "subseteq",
        Tok::Union => "cup",
        Tok::Inter => "cap",
        Tok::Diff => "setminus",
        Tok::And => "/\\",
        Tok::Or => "\\/",
        Tok::Not => "~",
        Tok::Implies => "=>",
        Tok::Eq => "=",
        Tok::Ne => "/=",
        Tok::Lt => "<",
        Tok::Le => "<=",
        Tok::Gt => ">",
        Tok::Ge => ">=",
        Tok::Plus => "+",
        Tok::Minus => "-",
        Tok::MapsTo => "|->",
        Tok::Assign => ":=",
        Tok::LAngle => "<<",
        Tok::RAngle => ">>",
        Tok::LParen => "(",
        Tok::RParen => ")",
        Tok::LBracket => "[",
        Tok::RBracket => "]",
        Tok::LBrace => "{",
        Tok::RBrace => "}",
        Tok::Comma => ",",
        Tok::Semi => ";",
        Tok::Colon => ":",
        Tok::Prime => "'",
        Tok::DotDot => "..",
        Tok::Arrow => "->",
        Tok::Ident(_) | Tok::Int(_) | Tok::Eof => "",
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "forall" => Tok::Forall,
        "exists" => Tok::Exists,
        "in" => Tok::In,
        "notin" => Tok::NotIn,
        "subseteq" => Tok::Subset,
        "cup" => Tok::Union,
        "cap" => Tok::Inter,
        "setminus" => Tok::Diff,
        _ => return None,
    })
}

fn unicode(c: char) -> Option<Tok> {
    Some(match c {
        '∀' => Tok::Forall,
        '∃' => Tok::Exists,
        '∈' => Tok::In,
        '∉' => Tok::NotIn,
        '⊆' => Tok::Subset,
        '∪' => Tok::Union,
        '∩' => Tok::Inter,
        '∖' => Tok::Diff,
        '∧' => Tok::And,
        '∨' => Tok::Or,
        '¬' => Tok::Not,
        '⇒' => Tok::Implies,
        '≠' => Tok::Ne,
        '≤' => Tok::Le,
        '≥' => Tok::Ge,
        '↦' => Tok::MapsTo,
        '⟨' => Tok::LAngle,
        '⟩' => Tok::RAngle,
        '→' => Tok::Arrow,
        _ => return None,
    })
}

pub fn lex(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    while i < chars.len() {
        let c = chars[i];
        let start = (line, col);
        let span = |len: usize| Span { line: start.0, column: start.1, length: len as u32 };
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
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let word: String = chars[i..j].iter().collect();
            let tok = keyword(&word).unwrap_or(Tok::Ident(word));
            out.push(Token { tok, span: span(j - i) });
            col += (j - i) as u32;
            i = j;
            continue;
        }
        if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let text: String = chars[i..j].iter().collect();
            let n = text.parse::<i64>().map_err(|_| {
                Diagnostic::new(format!("integer literal `{text}` out of range"), span(j - i))
            })?;
            out.push(Token { tok: Tok::Int(n), span: span(j - i) });
            col += (j - i) as u32;
            i = j;
            continue;
        }
        if let Some(tok) = unicode(c) {
            out.push(Token { tok, span: span(1) });
            i += 1;
            col += 1;
            continue;
        }
        let rest = |s: &str| s.chars().enumerate().all(|(k, ch)| chars.get(i + k) == Some(&ch));
        const MULTI: [(&str, Tok); 13] = [
            ("|->", Tok::MapsTo),
            ("/\\", Tok::And),
            ("\\/", Tok::Or),
            ("=>", Tok::Implies),
            ("/=", Tok::Ne),
            ("!=", Tok::Ne),
            ("<=", Tok::Le),
            (">=", Tok::Ge),
            ("<<", Tok::LAngle),
            (">>", Tok::RAngle),
            (":=", Tok::Assign),
            ("..", Tok::DotDot),
            ("->", Tok::Arrow),
        ];
        if let Some((s, tok)) = MULTI.iter().find(|(s, _)| rest(s)) {
            let n = s.chars().count();
            out.push(Token { tok: tok.clone(), span: span(n) });
            i += n;
            col += n as u32;
            continue;
        }
        let tok = match c {
            '~' | '!' => Tok::Not,
            '\\' => Tok::Diff,
            '=' => Tok::Eq,
            '<' => Tok::Lt,
            '>' => Tok::Gt,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            ':' => Tok::Colon,
            '\'' => Tok::Prime,
            _ => return Err(Diagnostic::new(format!("unexpected character `{c}`"), span(1))),
        };
        out.push(Token { tok, span: span(1) });
        i += 1;
        col += 1;
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span { line, column: col, length: 1 },
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn ascii_and_unicode_agree() {
        assert_eq!(
            toks("forall x in S : x notin T /\\ ~(A subseteq B) => y /= z"),
            toks("∀ x ∈ S : x ∉ T ∧ ¬(A ⊆ B) ⇒ y ≠ z"),
        );
        assert_eq!(toks("<<a, b>>"), toks("⟨a, b⟩"));
    }

    #[test]
    fn spans_track_lines_and_columns() {
        let t = lex("a\n  bb // note\n c").unwrap();
        assert_eq!((t[1].span.line, t[1].span.column, t[1].span.length), (2, 3, 2));
        assert_eq!((t[2].span.line, t[2].span.column), (3, 2));
    }

    #[test]
    fn stray_character_is_located() {
        let e = lex("x = @").unwrap_err();
        assert_eq!((e.span.line, e.span.column), (1, 5));
    }
}
