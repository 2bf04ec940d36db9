use std::fmt;

use logos::Logos;

use crate::ast::Span;
use crate::error::ParseError;

#[derive(Logos, Debug, Clone, PartialEq, Eq)]
#[logos(skip r"[ \t\r\n\f]+")]
#[logos(skip r"--[^\n]*")]
pub enum Tok {
    #[token("channel")]
    Channel,
    #[token("const")]
    Const,
    #[token("set")]
    Set,
    #[token("process")]
    Process,
    #[token("state")]
    State,
    #[token("begin")]
    Begin,
    #[token("end")]
    End,
    #[token("skip")]
    Skip,
    #[token("stop")]
    Stop,
    #[token("div")]
    Div,
    #[token("return")]
    Return,
    #[token("do")]
    Do,
    #[token("loop")]
    Loop,
    #[token("while")]
    While,
    #[token("inp")]
    Inp,
    #[token("outp")]
    Outp,
    #[token("guard")]
    Guard,
    #[token("if")]
    If,
    #[token("then")]
    Then,
    #[token("else")]
    Else,
    #[token("true")]
    True,
    #[token("false")]
    False,
    #[token("and")]
    And,
    #[token("or")]
    Or,
    #[token("not")]
    Not,
    #[token("int")]
    TInt,
    #[token("bool")]
    TBool,
    #[token("str")]
    TStr,
    #[token("unit")]
    TUnit,

    #[regex(r"[A-Za-z_][A-Za-z0-9_']*", |lex| lex.slice().to_owned())]
    Ident(String),
    #[regex(r"[0-9]+", |lex| lex.slice().parse::<i64>().ok())]
    Int(i64),
    #[regex(r#""([^"\\\n]|\\.)*""#, unescape)]
    Str(String),

    #[token("->")]
    Arrow,
    #[token("<-")]
    LArrow,
    #[token(":=")]
    Assign,
    #[token("[]")]
    Box,
    #[token("[|")]
    LPar,
    #[token("|]")]
    RPar,
    #[token("{|")]
    LChans,
    #[token("|}")]
    RChans,
    #[token("|||")]
    Inter,
    #[token("|")]
    Bar,
    #[token("\\")]
    Backslash,
    #[token(";")]
    Semi,
    #[token("&")]
    Amp,
    #[token("@")]
    At,
    #[token("?")]
    Query,
    #[token("!")]
    Bang,
    #[token(".")]
    Dot,
    #[token("..")]
    DotDot,
    #[token(",")]
    Comma,
    #[token(":")]
    Colon,
    #[token("=")]
    Eq,
    #[token("==")]
    EqEq,
    #[token("!=")]
    Ne,
    #[token("<")]
    Lt,
    #[token("<=")]
    Le,
    #[token(">")]
    Gt,
    #[token(">=")]
    Ge,
    #[token("+")]
    Plus,
    #[token("++")]
    Concat,
    #[token("-")]
    Minus,
    #[token("*")]
    Star,
    #[token("/")]
    Slash,
    #[token("%")]
    Percent,
    #[token("(")]
    LParen,
    #[token(")")]
    RParen,
    #[token("[")]
    LBracket,
    #[token("]")]
    RBracket,
    #[token("{")]
    LBrace,
    #[token("}")]
    RBrace,

    Eof,
}

fn unescape(lex: &mut logos::Lexer<Tok>) -> Option<String> {
    let body = &lex.slice()[1..lex.slice().len() - 1];
    let mut out = String::new();
    let mut chars = body.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        out.push(match chars.next()? {
            'n' => '\n',
            't' => '\t',
            '"' => '"',
            '\\' => '\\',
            _ => return None,
        });
    }
    Some(out)
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(name) => return write!(f, "identifier `{name}`"),
            Tok::Int(i) => return write!(f, "integer {i}"),
            Tok::Str(s) => return write!(f, "string {s:?}"),
            Tok::Eof => "end of input",
            Tok::Channel => "channel",
            Tok::Const => "const",
            Tok::Set => "set",
            Tok::Process => "process",
            Tok::State => "state",
            Tok::Begin => "begin",
            Tok::End => "end",
            Tok::Skip => "skip",
            Tok::Stop => "stop",
            Tok::Div => "div",
            Tok::Return => "return",
            Tok::Do => "do",
            Tok::Loop => "loop",
            Tok::While => "while",
            Tok::Inp => "inp",
            Tok::Outp => "outp",
            Tok::Guard => "guard",
            Tok::If => "if",
            Tok::Then => "then",
            Tok::Else => "else",
            Tok::True => "true",
            Tok::False => "false",
            Tok::And => "and",
            Tok::Or => "or",
            Tok::Not => "not",
            Tok::TInt => "int",
            Tok::TBool => "bool",
            Tok::TStr => "str",
            Tok::TUnit => "unit",
            Tok::Arrow => "->",
            Tok::LArrow => "<-",
            Tok::Assign => ":=",
            Tok::Box => "[]",
            Tok::LPar => "[|",
            Tok::RPar => "|]",
            Tok::LChans => "{|",
            Tok::RChans => "|}",
            Tok::Inter => "|||",
            Tok::Bar => "|",
            Tok::Backslash => "\\",
            Tok::Semi => ";",
            Tok::Amp => "&",
            Tok::At => "@",
            Tok::Query => "?",
            Tok::Bang => "!",
            Tok::Dot => ".",
            Tok::DotDot => "..",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::Eq => "=",
            Tok::EqEq => "==",
            Tok::Ne => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Plus => "+",
            Tok::Concat => "++",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Percent => "%",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
        };
        write!(f, "`{s}`")
    }
}

/// Splits the source into tokens, ending with [`Tok::Eof`].
pub fn lex(src: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let mut out = Vec::new();
    let mut lexer = Tok::lexer(src);
    while let Some(tok) = lexer.next() {
        let span = Span::new(lexer.span().start, lexer.span().end);
        match tok {
            Ok(t) => out.push((t, span)),
            Err(()) => {
                let text = lexer.slice();
                let message = if text.starts_with('"') {
                    "malformed string literal".to_string()
                } else if text.starts_with(|c: char| c.is_ascii_digit()) {
                    "integer literal out of range".to_string()
                } else {
                    format!("unexpected character {text:?}")
                };
                return Err(ParseError::new(span, message, Vec::new()));
            }
        }
    }
    out.push((Tok::Eof, Span::new(src.len(), src.len())));
    Ok(out)
}
