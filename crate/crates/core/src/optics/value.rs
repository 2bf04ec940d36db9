//! The closed value universe carried by events and state variables.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::OpticsError;

/// A dynamically typed value.
///
/// Text syntax: `()`, `true`/`false`, integers, `"strings"`, `[v1,v2]`,
/// `(v1,v2)` and bare identifiers for enumeration tags.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Unit,
    Bool(bool),
    Int(i64),
    Str(String),
    List(Vec<Value>),
    Pair(Box<Value>, Box<Value>),
    Enum(String),
}

impl Value {
    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Box::new(a), Box::new(b))
    }

    pub fn ints(xs: impl IntoIterator<Item = i64>) -> Value {
        Value::List(xs.into_iter().map(Value::Int).collect())
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Value]> {
        match self {
            Value::List(xs) => Some(xs),
            _ => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Value::Unit => "unit",
            Value::Bool(_) => "bool",
            Value::Int(_) => "int",
            Value::Str(_) => "str",
            Value::List(_) => "list",
            Value::Pair(..) => "pair",
            Value::Enum(_) => "enum",
        }
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<()> for Value {
    fn from(_: ()) -> Self {
        Value::Unit
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Unit => write!(f, "()"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Str(s) => {
                write!(f, "\"")?;
                for c in s.chars() {
                    match c {
                        '"' => write!(f, "\\\"")?,
                        '\\' => write!(f, "\\\\")?,
                        '\n' => write!(f, "\\n")?,
                        '\t' => write!(f, "\\t")?,
                        c => write!(f, "{c}")?,
                    }
                }
                write!(f, "\"")
            }
            Value::List(xs) => {
                write!(f, "[")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "]")
            }
            Value::Pair(a, b) => write!(f, "({a},{b})"),
            Value::Enum(tag) => write!(f, "{tag}"),
        }
    }
}

impl FromStr for Value {
    type Err = OpticsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = ValueParser::new(s);
        let v = p.value()?;
        p.skip_ws();
        if p.pos < p.src.len() {
            return Err(p.error("trailing input"));
        }
        Ok(v)
    }
}

impl Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Recursive-descent reader for the value text syntax.
pub(crate) struct ValueParser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> ValueParser<'a> {
    pub(crate) fn new(src: &'a str) -> Self {
        ValueParser { src, pos: 0 }
    }

    pub(crate) fn position(&self) -> usize {
        self.pos
    }

    fn error(&self, msg: &str) -> OpticsError {
        OpticsError::ValueSyntax {
            offset: self.pos,
            message: msg.to_string(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    pub(crate) fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), OpticsError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{c}'")))
        }
    }

    pub(crate) fn value(&mut self) -> Result<Value, OpticsError> {
        self.skip_ws();
        let Some(c) = self.rest().chars().next() else {
            return Err(self.error("expected a value"));
        };
        match c {
            '(' => {
                self.pos += 1;
                if self.eat(')') {
                    return Ok(Value::Unit);
                }
                let a = self.value()?;
                self.expect(',')?;
                let b = self.value()?;
                self.expect(')')?;
                Ok(Value::pair(a, b))
            }
            '[' => {
                self.pos += 1;
                let mut xs = Vec::new();
                if self.eat(']') {
                    return Ok(Value::List(xs));
                }
                loop {
                    xs.push(self.value()?);
                    if self.eat(']') {
                        return Ok(Value::List(xs));
                    }
                    self.expect(',')?;
                }
            }
            '"' => self.string(),
            '-' | '0'..='9' => self.int(),
            c if c.is_alphabetic() || c == '_' => {
                let word = self.ident();
                Ok(match word {
                    "true" => Value::Bool(true),
                    "false" => Value::Bool(false),
                    tag => Value::Enum(tag.to_string()),
                })
            }
            _ => Err(self.error("unexpected character")),
        }
    }

    pub(crate) fn ident(&mut self) -> &'a str {
        let rest = self.rest();
        let len = rest
            .char_indices()
            .find(|(_, c)| !(c.is_alphanumeric() || *c == '_' || *c == '\''))
            .map_or(rest.len(), |(i, _)| i);
        self.pos += len;
        &rest[..len]
    }

    fn int(&mut self) -> Result<Value, OpticsError> {
        let rest = self.rest();
        let mut len = usize::from(rest.starts_with('-'));
        len += rest[len..]
            .char_indices()
            .find(|(_, c)| !c.is_ascii_digit())
            .map_or(rest.len() - len, |(i, _)| i);
        let text = &rest[..len];
        let n = text.parse().map_err(|_| self.error("malformed integer"))?;
        self.pos += len;
        Ok(Value::Int(n))
    }

    fn string(&mut self) -> Result<Value, OpticsError> {
        self.pos += 1;
        let mut out = String::new();
        let mut chars = self.rest().char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '"' => {
                    self.pos += i + 1;
                    return Ok(Value::Str(out));
                }
                '\\' => match chars.next() {
                    Some((_, 'n')) => out.push('\n'),
                    Some((_, 't')) => out.push('\t'),
                    Some((_, c)) => out.push(c),
                    None => break,
                },
                c => out.push(c),
            }
        }
        Err(self.error("unterminated string"))
    }
}

/// Shape descriptor for channel payloads and state fields.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Kind {
    Any,
    Unit,
    Bool,
    Int,
    Str,
    List(Box<Kind>),
    Pair(Box<Kind>, Box<Kind>),
    Enum(Vec<String>),
}

impl Kind {
    pub fn pair(a: Kind, b: Kind) -> Kind {
        Kind::Pair(Box::new(a), Box::new(b))
    }

    pub fn list(a: Kind) -> Kind {
        Kind::List(Box::new(a))
    }

    pub fn matches(&self, v: &Value) -> bool {
        match (self, v) {
            (Kind::Any, _) => true,
            (Kind::Unit, Value::Unit) | (Kind::Bool, Value::Bool(_)) => true,
            (Kind::Int, Value::Int(_)) | (Kind::Str, Value::Str(_)) => true,
            (Kind::List(k), Value::List(xs)) => xs.iter().all(|x| k.matches(x)),
            (Kind::Pair(ka, kb), Value::Pair(a, b)) => ka.matches(a) && kb.matches(b),
            (Kind::Enum(tags), Value::Enum(t)) => tags.contains(t),
            _ => false,
        }
    }

    /// Enumerates the kind when it is finite.
    pub fn finite_domain(&self) -> Option<Vec<Value>> {
        match self {
            Kind::Unit => Some(vec![Value::Unit]),
            Kind::Bool => Some(vec![Value::Bool(false), Value::Bool(true)]),
            Kind::Enum(tags) => Some(tags.iter().cloned().map(Value::Enum).collect()),
            Kind::Pair(a, b) => {
                let (xs, ys) = (a.finite_domain()?, b.finite_domain()?);
                Some(
                    xs.iter()
                        .flat_map(|x| ys.iter().map(move |y| Value::pair(x.clone(), y.clone())))
                        .collect(),
                )
            }
            _ => None,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Any => write!(f, "any"),
            Kind::Unit => write!(f, "unit"),
            Kind::Bool => write!(f, "bool"),
            Kind::Int => write!(f, "int"),
            Kind::Str => write!(f, "str"),
            Kind::List(k) => write!(f, "[{k}]"),
            Kind::Pair(a, b) => write!(f, "({a}, {b})"),
            Kind::Enum(tags) => write!(f, "{{{}}}", tags.join(", ")),
        }
    }
}

/// A channel-tagged event `c.v`; unit-payload events print as the bare
/// channel name.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Event {
    pub channel: Arc<str>,
    pub payload: Value,
}

impl Event {
    pub fn new(channel: impl Into<Arc<str>>, payload: Value) -> Self {
        Event {
            channel: channel.into(),
            payload,
        }
    }

    /// A basic event carrying no data.
    pub fn sync(channel: impl Into<Arc<str>>) -> Self {
        Event::new(channel, Value::Unit)
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.payload {
            Value::Unit => write!(f, "{}", self.channel),
            ref v => write!(f, "{}.{}", self.channel, v),
        }
    }
}

impl FromStr for Event {
    type Err = OpticsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = ValueParser::new(s);
        p.skip_ws();
        let start = p.position();
        let name = p.ident();
        if name.is_empty() || !name.starts_with(|c: char| c.is_alphabetic() || c == '_') {
            return Err(OpticsError::ValueSyntax {
                offset: start,
                message: "expected a channel name".into(),
            });
        }
        let payload = if p.eat('.') { p.value()? } else { Value::Unit };
        p.skip_ws();
        if p.position() < s.len() {
            return Err(OpticsError::ValueSyntax {
                offset: p.position(),
                message: "trailing input".into(),
            });
        }
        Ok(Event::new(name, payload))
    }
}

impl Serialize for Event {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Event {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Declaration of a channel: its name, payload shape and, optionally, a
/// finite enumeration of admissible payloads.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChanDecl {
    pub name: Arc<str>,
    pub kind: Kind,
    pub enum_domain: Option<Vec<Value>>,
}

impl ChanDecl {
    pub fn new(name: impl Into<Arc<str>>, kind: Kind) -> Self {
        ChanDecl {
            name: name.into(),
            kind,
            enum_domain: None,
        }
    }

    pub fn basic(name: impl Into<Arc<str>>) -> Self {
        ChanDecl::new(name, Kind::Unit)
    }

    pub fn with_domain(mut self, domain: Vec<Value>) -> Result<Self, OpticsError> {
        if let Some(bad) = domain.iter().find(|v| !self.kind.matches(v)) {
            return Err(OpticsError::KindMismatch {
                context: format!("domain of channel {}", self.name),
                expected: self.kind.clone(),
                found: bad.clone(),
            });
        }
        self.enum_domain = Some(domain);
        Ok(self)
    }

    /// The finite payload domain: the declared enumeration, else the kind's
    /// own enumeration when it is finite.
    pub fn domain(&self) -> Option<Vec<Value>> {
        self.enum_domain.clone().or_else(|| self.kind.finite_domain())
    }

    pub fn admits(&self, v: &Value) -> bool {
        self.kind.matches(v) && self.enum_domain.as_ref().is_none_or(|d| d.contains(v))
    }

    pub fn prism(&self) -> Prism {
        Prism::of(self)
    }
}

/// A set of declared channels with unique names.
#[derive(Clone, Debug, Default)]
pub struct ChanRegistry {
    decls: Vec<ChanDecl>,
}

impl ChanRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, decl: ChanDecl) -> Result<(), OpticsError> {
        if self.get(&decl.name).is_some() {
            return Err(OpticsError::DuplicateChannel(decl.name.to_string()));
        }
        self.decls.push(decl);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&ChanDecl> {
        self.decls.iter().find(|d| &*d.name == name)
    }

    pub fn lookup(&self, name: &str) -> Result<&ChanDecl, OpticsError> {
        self.get(name)
            .ok_or_else(|| OpticsError::UndeclaredChannel(name.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &ChanDecl> {
        self.decls.iter()
    }

    /// Checks that an event belongs to a declared channel and that its
    /// payload is admissible.
    pub fn check_event(&self, e: &Event) -> Result<(), OpticsError> {
        let decl = self.lookup(&e.channel)?;
        if decl.admits(&e.payload) {
            Ok(())
        } else {
            Err(OpticsError::KindMismatch {
                context: format!("payload of channel {}", decl.name),
                expected: decl.kind.clone(),
                found: e.payload.clone(),
            })
        }
    }
}

/// Channel prism: `build` tags a value with the channel, `matches` recovers
/// it from events of that channel and is undefined elsewhere.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prism {
    channel: Arc<str>,
}

impl Prism {
    pub fn of(decl: &ChanDecl) -> Prism {
        Prism {
            channel: decl.name.clone(),
        }
    }

    pub fn channel(&self) -> &Arc<str> {
        &self.channel
    }

    pub fn build(&self, v: Value) -> Event {
        Event {
            channel: self.channel.clone(),
            payload: v,
        }
    }

    pub fn matches(&self, e: &Event) -> Option<Value> {
        (e.channel == self.channel).then(|| e.payload.clone())
    }
}
