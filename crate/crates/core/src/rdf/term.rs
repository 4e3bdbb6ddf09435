use std::fmt;

use serde::{Deserialize, Serialize};

use super::RdfError;

/// An absolute IRI, compared by exact string equality.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Iri(String);

impl Iri {
    pub fn new(value: impl Into<String>) -> Result<Self, RdfError> {
        let value = value.into();
        if value.is_empty() || value.chars().any(char::is_whitespace) {
            return Err(RdfError::InvalidIri(value));
        }
        Ok(Iri(value))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The part after the last `#`, `/` or `:`.
    pub fn local_name(&self) -> &str {
        let cut = self.0.rfind(['#', '/', ':']).map(|i| i + 1).unwrap_or(0);
        &self.0[cut..]
    }
}

impl TryFrom<String> for Iri {
    type Error = RdfError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Iri::new(value)
    }
}

impl From<Iri> for String {
    fn from(iri: Iri) -> Self {
        iri.0
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

/// Shape-derived literal kind; there are no datatype IRIs in this model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LiteralKind {
    Number,
    String,
    Boolean,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Literal {
    lexical: String,
    kind: LiteralKind,
}

impl Literal {
    pub fn number(value: f64) -> Result<Self, RdfError> {
        if !value.is_finite() {
            return Err(RdfError::InvalidNumber(value.to_string()));
        }
        // `-0` would otherwise print as "-0" and compare unequal to "0".
        let value = if value == 0.0 { 0.0 } else { value };
        Ok(Literal {
            lexical: format!("{value}"),
            kind: LiteralKind::Number,
        })
    }

    /// A number literal from its lexical form, kept verbatim.
    pub fn number_lexical(lexical: impl Into<String>) -> Result<Self, RdfError> {
        let lexical = lexical.into();
        match lexical.parse::<f64>() {
            Ok(v) if v.is_finite() && is_decimal_lexical(&lexical) => Ok(Literal {
                lexical,
                kind: LiteralKind::Number,
            }),
            _ => Err(RdfError::InvalidNumber(lexical)),
        }
    }

    pub fn string(value: impl Into<String>) -> Self {
        Literal {
            lexical: value.into(),
            kind: LiteralKind::String,
        }
    }

    pub fn boolean(value: bool) -> Self {
        Literal {
            lexical: value.to_string(),
            kind: LiteralKind::Boolean,
        }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn kind(&self) -> LiteralKind {
        self.kind
    }

    pub fn as_number(&self) -> Option<f64> {
        match self.kind {
            LiteralKind::Number => self.lexical.parse().ok(),
            _ => None,
        }
    }
}

/// Accepts `[+-]? (digits ('.' digits?)? | '.' digits) ([eE] [+-]? digits)?`.
pub(crate) fn is_decimal_lexical(s: &str) -> bool {
    let b = s.as_bytes();
    let mut i = 0;
    if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
        i += 1;
    }
    let int_start = i;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    let mut digits = i - int_start;
    if i < b.len() && b[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        digits += i - frac_start;
    }
    if digits == 0 {
        return false;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        i += 1;
        if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
            i += 1;
        }
        let exp_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i == exp_start {
            return false;
        }
    }
    i == b.len()
}

/// Variable name, `[A-Za-z][A-Za-z0-9_]*`, stored without the leading `?`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Variable(String);

impl Variable {
    pub fn new(name: impl Into<String>) -> Result<Self, RdfError> {
        let name = name.into();
        if is_variable_name(&name) {
            Ok(Variable(name))
        } else {
            Err(RdfError::InvalidVariable(name))
        }
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

pub fn is_variable_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic()) && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Lenient form used by document readers: a leading `?` is accepted.
impl TryFrom<String> for Variable {
    type Error = RdfError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        match value.strip_prefix('?') {
            Some(rest) => Variable::new(rest),
            None => Variable::new(value),
        }
    }
}

impl From<Variable> for String {
    fn from(v: Variable) -> Self {
        v.0
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Term {
    Iri(Iri),
    Literal(Literal),
    Variable(Variable),
}

impl Term {
    pub fn iri(value: impl Into<String>) -> Result<Self, RdfError> {
        Iri::new(value).map(Term::Iri)
    }

    pub fn var(name: impl Into<String>) -> Result<Self, RdfError> {
        Variable::new(name).map(Term::Variable)
    }

    pub fn number(value: f64) -> Result<Self, RdfError> {
        Literal::number(value).map(Term::Literal)
    }

    pub fn string(value: impl Into<String>) -> Self {
        Term::Literal(Literal::string(value))
    }

    pub fn is_variable(&self) -> bool {
        matches!(self, Term::Variable(_))
    }

    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_variable(&self) -> Option<&Variable> {
        match self {
            Term::Variable(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(l) => Some(l),
            _ => None,
        }
    }
}

impl From<Iri> for Term {
    fn from(iri: Iri) -> Self {
        Term::Iri(iri)
    }
}

impl From<Literal> for Term {
    fn from(lit: Literal) -> Self {
        Term::Literal(lit)
    }
}

impl From<Variable> for Term {
    fn from(v: Variable) -> Self {
        Term::Variable(v)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => iri.fmt(f),
            Term::Variable(v) => v.fmt(f),
            Term::Literal(lit) => match lit.kind {
                LiteralKind::String => write!(f, "{}", quote_string(&lit.lexical)),
                _ => f.write_str(&lit.lexical),
            },
        }
    }
}

pub(crate) fn quote_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Self {
        Triple {
            subject,
            predicate,
            object,
        }
    }

    pub fn terms(&self) -> [&Term; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    pub fn is_ground(&self) -> bool {
        self.terms().iter().all(|t| !t.is_variable())
    }

    /// Data triple: IRI subject and predicate, IRI or literal object.
    pub fn check_ground(&self) -> Result<(), RdfError> {
        let ok = matches!(self.subject, Term::Iri(_))
            && matches!(self.predicate, Term::Iri(_))
            && !self.object.is_variable();
        if ok {
            Ok(())
        } else {
            Err(RdfError::NotGround(self.to_string()))
        }
    }

    /// Pattern triple: any position may be a variable, predicate is never a literal.
    pub fn check_pattern(&self) -> Result<(), RdfError> {
        if matches!(self.predicate, Term::Literal(_)) {
            return Err(RdfError::LiteralPredicate(self.to_string()));
        }
        if matches!(self.subject, Term::Literal(_)) {
            return Err(RdfError::LiteralSubject(self.to_string()));
        }
        Ok(())
    }

    pub fn variables(&self) -> impl Iterator<Item = &Variable> {
        self.terms().into_iter().filter_map(Term::as_variable)
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}
