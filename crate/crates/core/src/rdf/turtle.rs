//! Reader for the Turtle subset used by ontology, schema and rule files:
//! `@prefix`/`PREFIX` directives, prefixed names, `<absolute IRIs>`, quoted
//! strings, bare numbers and booleans, `a`, `;` and `,` lists. Pattern
//! documents additionally accept `?var` (or `$var`) in any position.

use super::{Graph, GraphPattern, Iri, Literal, PrefixMap, RdfError, Term, Triple, Variable};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    AtPrefix,
    SparqlPrefix,
    IriRef(String),
    PName { prefix: String, local: String },
    Var(String),
    Str(String),
    Number(String),
    Bool(bool),
    A,
    Dot,
    Semicolon,
    Comma,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn error(&self, line: usize, column: usize, message: impl Into<String>) -> RdfError {
        RdfError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, RdfError> {
        let mut out = Vec::new();
        loop {
            match self.peek() {
                None => return Ok(out),
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => {
                    while !matches!(self.peek(), None | Some('\n')) {
                        self.bump();
                    }
                }
                Some(_) => {
                    let (line, column) = (self.line, self.column);
                    let tok = self.token(line, column)?;
                    out.push(Spanned { tok, line, column });
                }
            }
        }
    }

    fn token(&mut self, line: usize, column: usize) -> Result<Tok, RdfError> {
        let c = self.peek().expect("caller checked");
        match c {
            '.' if !self.peek2().is_some_and(|d| d.is_ascii_digit()) => {
                self.bump();
                Ok(Tok::Dot)
            }
            ';' => {
                self.bump();
                Ok(Tok::Semicolon)
            }
            ',' => {
                self.bump();
                Ok(Tok::Comma)
            }
            '<' => {
                self.bump();
                let mut iri = String::new();
                loop {
                    match self.bump() {
                        Some('>') => return Ok(Tok::IriRef(iri)),
                        Some(c) if c.is_whitespace() => return Err(self.error(line, column, "whitespace inside IRI")),
                        Some(c) => iri.push(c),
                        None => return Err(self.error(line, column, "unterminated IRI")),
                    }
                }
            }
            '"' | '\'' => self.string(c, line, column),
            '?' | '$' => {
                self.bump();
                let mut name = String::new();
                while let Some(c) = self.peek().filter(|c| c.is_ascii_alphanumeric() || *c == '_') {
                    name.push(c);
                    self.bump();
                }
                if super::is_variable_name(&name) {
                    Ok(Tok::Var(name))
                } else {
                    Err(self.error(line, column, format!("invalid variable name {name:?}")))
                }
            }
            '@' => {
                self.bump();
                let word = self.word();
                if word == "prefix" {
                    Ok(Tok::AtPrefix)
                } else {
                    Err(self.error(line, column, format!("unsupported directive @{word}")))
                }
            }
            c if c.is_ascii_digit() || c == '+' || c == '-' || c == '.' => self.number(line, column),
            c if c.is_ascii_alphabetic() || c == ':' || c == '_' => {
                let word = self.word();
                match word.split_once(':') {
                    Some((prefix, local)) => {
                        if !super::is_prefix_label(prefix) {
                            return Err(self.error(line, column, format!("invalid prefix in {word:?}")));
                        }
                        if !local.is_empty() && !super::is_local_name(local) {
                            return Err(self.error(line, column, format!("invalid local name in {word:?}")));
                        }
                        Ok(Tok::PName {
                            prefix: prefix.to_string(),
                            local: local.to_string(),
                        })
                    }
                    None => match word.as_str() {
                        "a" => Ok(Tok::A),
                        "true" => Ok(Tok::Bool(true)),
                        "false" => Ok(Tok::Bool(false)),
                        w if w.eq_ignore_ascii_case("prefix") => Ok(Tok::SparqlPrefix),
                        w => Err(self.error(line, column, format!("unexpected token {w:?}"))),
                    },
                }
            }
            c => Err(self.error(line, column, format!("unexpected character {c:?}"))),
        }
    }

    /// Name characters; a trailing `.` is left for the statement terminator.
    fn word(&mut self) -> String {
        let mut word = String::new();
        while let Some(c) = self.peek() {
            let continues = c.is_ascii_alphanumeric()
                || matches!(c, '_' | '-' | ':')
                || (c == '.' && self.peek2().is_some_and(|d| d.is_ascii_alphanumeric() || d == '_'));
            if !continues {
                break;
            }
            word.push(c);
            self.bump();
        }
        word
    }

    fn number(&mut self, line: usize, column: usize) -> Result<Tok, RdfError> {
        let mut s = String::new();
        if let Some(c) = self.peek().filter(|c| *c == '+' || *c == '-') {
            s.push(c);
            self.bump();
        }
        self.digits(&mut s);
        if self.peek() == Some('.') && self.peek2().is_some_and(|d| d.is_ascii_digit()) {
            s.push('.');
            self.bump();
            self.digits(&mut s);
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let after = self.peek2();
            if after.is_some_and(|d| d.is_ascii_digit() || d == '+' || d == '-') {
                s.push(self.bump().unwrap());
                if let Some(c) = self.peek().filter(|c| *c == '+' || *c == '-') {
                    s.push(c);
                    self.bump();
                }
                self.digits(&mut s);
            }
        }
        if super::term::is_decimal_lexical(&s) {
            Ok(Tok::Number(s))
        } else {
            Err(self.error(line, column, format!("malformed number {s:?}")))
        }
    }

    fn digits(&mut self, s: &mut String) {
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            s.push(c);
            self.bump();
        }
    }

    fn string(&mut self, quote: char, line: usize, column: usize) -> Result<Tok, RdfError> {
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                None | Some('\n') => return Err(self.error(line, column, "unterminated string")),
                Some(c) if c == quote => return Ok(Tok::Str(s)),
                Some('\\') => {
                    let esc = self.bump();
                    match esc {
                        Some('n') => s.push('\n'),
                        Some('t') => s.push('\t'),
                        Some('r') => s.push('\r'),
                        Some('"') => s.push('"'),
                        Some('\'') => s.push('\''),
                        Some('\\') => s.push('\\'),
                        Some('u') => {
                            let hex: String = (0..4).filter_map(|_| self.bump()).collect();
                            let ch = u32::from_str_radix(&hex, 16).ok().and_then(char::from_u32);
                            match ch {
                                Some(ch) => s.push(ch),
                                None => return Err(self.error(line, column, "bad \\u escape")),
                            }
                        }
                        other => return Err(self.error(line, column, format!("bad escape {other:?}"))),
                    }
                }
                Some(c) => s.push(c),
            }
        }
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    prefixes: PrefixMap,
    allow_vars: bool,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Result<Spanned, RdfError> {
        let t = self.toks.get(self.pos).cloned().ok_or(RdfError::Syntax {
            line: self.end.0,
            column: self.end.1,
            message: "unexpected end of input".into(),
        })?;
        self.pos += 1;
        Ok(t)
    }

    fn err(at: &Spanned, message: impl Into<String>) -> RdfError {
        RdfError::Syntax {
            line: at.line,
            column: at.column,
            message: message.into(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), RdfError> {
        let t = self.next()?;
        if t.tok == tok {
            Ok(())
        } else {
            Err(Self::err(&t, format!("expected {what}, found {:?}", t.tok)))
        }
    }

    fn document(&mut self) -> Result<Vec<Triple>, RdfError> {
        let mut out = Vec::new();
        while let Some(t) = self.peek() {
            match t.tok {
                Tok::AtPrefix => {
                    self.next()?;
                    self.prefix_decl()?;
                    self.expect(Tok::Dot, "'.' after @prefix")?;
                }
                Tok::SparqlPrefix => {
                    self.next()?;
                    self.prefix_decl()?;
                }
                _ => self.statement(&mut out)?,
            }
        }
        Ok(out)
    }

    fn prefix_decl(&mut self) -> Result<(), RdfError> {
        let name = self.next()?;
        let prefix = match &name.tok {
            Tok::PName { prefix, local } if local.is_empty() => prefix.clone(),
            _ => return Err(Self::err(&name, "expected prefix name ending in ':'")),
        };
        let iri = self.next()?;
        match iri.tok {
            Tok::IriRef(ns) => {
                self.prefixes.insert(prefix, ns);
                Ok(())
            }
            _ => Err(Self::err(&iri, "expected <namespace IRI>")),
        }
    }

    fn statement(&mut self, out: &mut Vec<Triple>) -> Result<(), RdfError> {
        let subject_tok = self.next()?;
        let subject = self.term(&subject_tok)?;
        if matches!(subject, Term::Literal(_)) {
            return Err(Self::err(&subject_tok, "literal in subject position"));
        }
        loop {
            let verb_tok = self.next()?;
            let predicate = self.term(&verb_tok)?;
            if matches!(predicate, Term::Literal(_)) {
                return Err(RdfError::LiteralPredicate(format!(
                    "line {}, column {}",
                    verb_tok.line, verb_tok.column
                )));
            }
            loop {
                let obj_tok = self.next()?;
                let object = self.term(&obj_tok)?;
                out.push(Triple::new(subject.clone(), predicate.clone(), object));
                match self.peek().map(|t| &t.tok) {
                    Some(Tok::Comma) => {
                        self.next()?;
                    }
                    _ => break,
                }
            }
            let sep = self.next()?;
            match &sep.tok {
                Tok::Dot => return Ok(()),
                Tok::Semicolon => {
                    // Trailing `;` before the terminator is allowed.
                    while matches!(self.peek().map(|t| &t.tok), Some(Tok::Semicolon)) {
                        self.next()?;
                    }
                    if matches!(self.peek().map(|t| &t.tok), Some(Tok::Dot)) {
                        self.next()?;
                        return Ok(());
                    }
                }
                other => return Err(Self::err(&sep, format!("expected '.' or ';', found {other:?}"))),
            }
        }
    }

    fn term(&self, t: &Spanned) -> Result<Term, RdfError> {
        let term = match &t.tok {
            Tok::IriRef(iri) => Term::Iri(Iri::new(iri.clone())?),
            Tok::PName { prefix, local } => {
                let iri = self
                    .prefixes
                    .expand(prefix, local)
                    .ok_or_else(|| RdfError::UnknownPrefix {
                        prefix: prefix.clone(),
                        line: t.line,
                        column: t.column,
                    })?;
                Term::Iri(Iri::new(iri)?)
            }
            Tok::A => Term::Iri(Iri::new(super::vocab::RDF_TYPE)?),
            Tok::Var(name) => {
                if !self.allow_vars {
                    return Err(Self::err(t, format!("variable ?{name} is not allowed in data")));
                }
                Term::Variable(Variable::new(name.clone())?)
            }
            Tok::Str(s) => Term::Literal(Literal::string(s.clone())),
            Tok::Number(n) => Term::Literal(Literal::number_lexical(n.clone())?),
            Tok::Bool(b) => Term::Literal(Literal::boolean(*b)),
            other => return Err(Self::err(t, format!("expected a term, found {other:?}"))),
        };
        Ok(term)
    }
}

fn parse(text: &str, base_prefixes: &PrefixMap, allow_vars: bool) -> Result<(Vec<Triple>, PrefixMap), RdfError> {
    let end = text
        .lines()
        .enumerate()
        .last()
        .map(|(i, l)| (i + 1, l.chars().count() + 1))
        .unwrap_or((1, 1));
    let toks = Lexer::new(text).tokens()?;
    let mut parser = Parser {
        toks,
        pos: 0,
        prefixes: base_prefixes.clone(),
        allow_vars,
        end,
    };
    let triples = parser.document()?;
    Ok((triples, parser.prefixes))
}

/// Parse a ground Turtle-subset document into a graph.
pub fn parse_turtle(text: &str, base_prefixes: &PrefixMap) -> Result<Graph, RdfError> {
    let (triples, prefixes) = parse(text, base_prefixes, false)?;
    let mut graph = Graph::with_prefixes(prefixes);
    for t in triples {
        graph.insert(t)?;
    }
    Ok(graph)
}

/// Parse pattern statements, allowing an empty document. Returns the
/// triples in statement order and the prefixes in scope at the end.
pub fn parse_pattern_triples(text: &str, base_prefixes: &PrefixMap) -> Result<(Vec<Triple>, PrefixMap), RdfError> {
    parse(text, base_prefixes, true)
}

/// Parse a non-empty graph pattern; `?name` may appear in any position.
pub fn parse_pattern(text: &str, base_prefixes: &PrefixMap) -> Result<GraphPattern, RdfError> {
    let (triples, _) = parse_pattern_triples(text, base_prefixes)?;
    GraphPattern::new(triples)
}
