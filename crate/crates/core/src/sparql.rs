//! SPARQL-subset parsing and query-log mining.
//!
//! Every query is classified by form. SELECT queries additionally get their
//! basic graph patterns extracted from the WHERE group, including patterns
//! nested in OPTIONAL, UNION and GRAPH blocks; FILTER, BIND, VALUES, MINUS
//! and solution modifiers are skipped. A WHERE body outside the supported
//! subset (property paths, subqueries, nested blank-node property lists)
//! leaves the query classified but unextractable.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::error::{Error, Result};
use crate::kg::{EntityPredicatePair, KnowledgeGraph, Orientation};

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QueryForm {
    Select,
    Construct,
    Ask,
    Describe,
    Other,
}

impl QueryForm {
    pub const ALL: [QueryForm; 5] = [
        QueryForm::Select,
        QueryForm::Construct,
        QueryForm::Ask,
        QueryForm::Describe,
        QueryForm::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            QueryForm::Select => "select",
            QueryForm::Construct => "construct",
            QueryForm::Ask => "ask",
            QueryForm::Describe => "describe",
            QueryForm::Other => "other",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Iri(String),
    Variable(String),
    Literal(String),
    BlankNode(String),
}

impl Term {
    pub fn iri(&self) -> Option<&str> {
        match self {
            Term::Iri(s) => Some(s),
            _ => None,
        }
    }

    /// Variables and blank nodes both leave the slot open.
    pub fn is_open(&self) -> bool {
        matches!(self, Term::Variable(_) | Term::BlankNode(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriplePattern {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparqlQuery {
    pub form: QueryForm,
    pub prefixes: BTreeMap<String, String>,
    /// Triple patterns with prefixes expanded, in source order. Only
    /// populated for SELECT queries.
    pub patterns: Vec<TriplePattern>,
    /// Set when a SELECT body could not be parsed.
    pub pattern_error: Option<String>,
}

impl SparqlQuery {
    pub fn is_extractable(&self) -> bool {
        self.form == QueryForm::Select && self.pattern_error.is_none()
    }
}

/// Entity–predicate pair over labels, as mined from queries before it is
/// resolved against a graph.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelPair {
    pub entity: String,
    pub predicate: String,
    pub orientation: Orientation,
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Iri(String),
    PName(String, String),
    Var(String),
    Literal(String),
    Number(String),
    Keyword(&'static str),
    Word(String),
    Blank(String),
    Punct(char),
    Op(String),
}

const KEYWORDS: &[&str] = &[
    "BASE",
    "PREFIX",
    "SELECT",
    "CONSTRUCT",
    "ASK",
    "DESCRIBE",
    "WHERE",
    "OPTIONAL",
    "UNION",
    "FILTER",
    "LIMIT",
    "OFFSET",
    "ORDER",
    "BY",
    "GROUP",
    "HAVING",
    "DISTINCT",
    "REDUCED",
    "VALUES",
    "MINUS",
    "BIND",
    "SERVICE",
    "SILENT",
    "GRAPH",
    "FROM",
    "NAMED",
    "AS",
    "ASC",
    "DESC",
    "NOT",
    "EXISTS",
    "UNDEF",
];

fn keyword(word: &str) -> Option<&'static str> {
    KEYWORDS
        .iter()
        .copied()
        .find(|k| k.eq_ignore_ascii_case(word))
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | ':' | '.' | '%')
}

fn lex(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        match c {
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '<' => {
                let end = chars[i + 1..]
                    .iter()
                    .position(|&d| d == '>' || d.is_whitespace() || d == '<')
                    .map(|p| i + 1 + p);
                match end {
                    Some(e) if chars[e] == '>' => {
                        tokens.push(Token::Iri(chars[i + 1..e].iter().collect()));
                        i = e + 1;
                    }
                    _ => {
                        let len = if chars.get(i + 1) == Some(&'=') { 2 } else { 1 };
                        tokens.push(Token::Op(chars[i..i + len].iter().collect()));
                        i += len;
                    }
                }
            }
            '"' | '\'' => {
                let long = chars.get(i + 1) == Some(&c) && chars.get(i + 2) == Some(&c);
                let start = if long { i + 3 } else { i + 1 };
                let mut j = start;
                let mut escaped = false;
                let mut end = chars.len();
                while j < chars.len() {
                    let d = chars[j];
                    if escaped {
                        escaped = false;
                    } else if d == '\\' {
                        escaped = true;
                    } else if d == c
                        && (!long || (chars.get(j + 1) == Some(&c) && chars.get(j + 2) == Some(&c)))
                    {
                        end = j;
                        break;
                    }
                    j += 1;
                }
                let value: String = chars[start..end.min(chars.len())].iter().collect();
                i = if long { end + 3 } else { end + 1 };
                if chars.get(i) == Some(&'@') {
                    i += 1;
                    while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '-') {
                        i += 1;
                    }
                } else if chars.get(i) == Some(&'^') && chars.get(i + 1) == Some(&'^') {
                    i += 2;
                    if chars.get(i) == Some(&'<') {
                        while i < chars.len() && chars[i] != '>' {
                            i += 1;
                        }
                        i += 1;
                    } else {
                        while i < chars.len() && is_name_char(chars[i]) {
                            i += 1;
                        }
                    }
                }
                tokens.push(Token::Literal(value));
            }
            '?' | '$' => {
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                if j == start {
                    tokens.push(Token::Op(c.to_string()));
                    i += 1;
                } else {
                    tokens.push(Token::Var(chars[start..j].iter().collect()));
                    i = j;
                }
            }
            '{' | '}' | '(' | ')' | ';' | ',' | '*' | '[' | ']' => {
                tokens.push(Token::Punct(c));
                i += 1;
            }
            '.' if !chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) => {
                tokens.push(Token::Punct('.'));
                i += 1;
            }
            '_' if chars.get(i + 1) == Some(&':') => {
                let start = i + 2;
                let mut j = start;
                while j < chars.len()
                    && (chars[j].is_alphanumeric() || matches!(chars[j], '_' | '-'))
                {
                    j += 1;
                }
                tokens.push(Token::Blank(chars[start..j].iter().collect()));
                i = j;
            }
            _ if is_name_char(c) => {
                let mut j = i;
                while j < chars.len() && is_name_char(chars[j]) {
                    j += 1;
                }
                // A trailing dot terminates the statement rather than the name.
                while j > i + 1 && chars[j - 1] == '.' {
                    j -= 1;
                }
                let word: String = chars[i..j].iter().collect();
                i = j;
                if let Some(colon) = word.find(':') {
                    tokens.push(Token::PName(
                        word[..colon].to_string(),
                        word[colon + 1..].to_string(),
                    ));
                } else if word
                    .chars()
                    .all(|d| d.is_ascii_digit() || d == '.' || d == '-')
                    && word.chars().any(|d| d.is_ascii_digit())
                {
                    tokens.push(Token::Number(word));
                } else if let Some(k) = keyword(&word) {
                    tokens.push(Token::Keyword(k));
                } else {
                    tokens.push(Token::Word(word));
                }
            }
            _ => {
                let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
                if matches!(two.as_str(), "&&" | "||" | "!=" | ">=" | "^^") {
                    tokens.push(Token::Op(two));
                    i += 2;
                } else {
                    tokens.push(Token::Op(c.to_string()));
                    i += 1;
                }
            }
        }
    }
    tokens
}

/// Parser with optional predeclared prefixes (endpoint logs frequently rely
/// on prefixes the server defines implicitly).
#[derive(Clone, Debug, Default)]
pub struct SparqlParser {
    pub default_prefixes: BTreeMap<String, String>,
}

impl SparqlParser {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_prefix(mut self, prefix: &str, iri: &str) -> Self {
        self.default_prefixes
            .insert(prefix.to_string(), iri.to_string());
        self
    }

    pub fn parse(&self, text: &str) -> SparqlQuery {
        let tokens = lex(text);
        let mut cursor = Cursor {
            tokens: &tokens,
            pos: 0,
            prefixes: self.default_prefixes.clone(),
            declared: BTreeMap::new(),
            base: None,
        };
        let prologue = cursor.prologue();
        let form = match cursor.peek() {
            Some(Token::Keyword("SELECT")) => QueryForm::Select,
            Some(Token::Keyword("CONSTRUCT")) => QueryForm::Construct,
            Some(Token::Keyword("ASK")) => QueryForm::Ask,
            Some(Token::Keyword("DESCRIBE")) => QueryForm::Describe,
            _ => QueryForm::Other,
        };
        let mut query = SparqlQuery {
            form,
            prefixes: BTreeMap::new(),
            patterns: Vec::new(),
            pattern_error: None,
        };
        if form == QueryForm::Select {
            let mut patterns = Vec::new();
            match prologue.and_then(|_| cursor.select_body(&mut patterns)) {
                Ok(()) => query.patterns = patterns,
                Err(e) => query.pattern_error = Some(e),
            }
        }
        query.prefixes = cursor.declared;
        query
    }
}

pub fn parse_query(text: &str) -> SparqlQuery {
    SparqlParser::new().parse(text)
}

type ParseResult<T> = core::result::Result<T, String>;

struct Cursor<'a> {
    tokens: &'a [Token],
    pos: usize,
    prefixes: BTreeMap<String, String>,
    declared: BTreeMap<String, String>,
    base: Option<String>,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<&Token> {
        let t = self.tokens.get(self.pos);
        self.pos += 1;
        t
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if self.peek() == Some(&Token::Punct(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_keyword(&mut self, k: &str) -> bool {
        if matches!(self.peek(), Some(Token::Keyword(x)) if *x == k) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, c: char) -> ParseResult<()> {
        if self.eat_punct(c) {
            Ok(())
        } else {
            Err(format!("expected `{c}`, found {}", describe(self.peek())))
        }
    }

    fn prologue(&mut self) -> ParseResult<()> {
        loop {
            if self.eat_keyword("PREFIX") {
                let Some(Token::PName(prefix, local)) = self.next().cloned() else {
                    return Err("PREFIX expects `name:`".into());
                };
                if !local.is_empty() {
                    return Err("PREFIX expects `name:`".into());
                }
                let Some(Token::Iri(iri)) = self.next().cloned() else {
                    return Err("PREFIX expects an IRI".into());
                };
                let iri = self.resolve_relative(iri);
                self.prefixes.insert(prefix.clone(), iri.clone());
                self.declared.insert(prefix, iri);
            } else if self.eat_keyword("BASE") {
                let Some(Token::Iri(iri)) = self.next().cloned() else {
                    return Err("BASE expects an IRI".into());
                };
                self.base = Some(iri);
            } else {
                return Ok(());
            }
        }
    }

    fn resolve_relative(&self, iri: String) -> String {
        match &self.base {
            Some(base) if !iri.contains(':') => format!("{base}{iri}"),
            _ => iri,
        }
    }

    /// Skips the projection and dataset clauses, then parses the WHERE group.
    fn select_body(&mut self, out: &mut Vec<TriplePattern>) -> ParseResult<()> {
        self.next();
        loop {
            match self.peek() {
                None => return Err("missing WHERE group".into()),
                Some(Token::Punct('{')) => break,
                Some(Token::Punct('(')) => self.skip_balanced()?,
                _ => {
                    self.next();
                }
            }
        }
        self.group(out, true)
    }

    fn skip_balanced(&mut self) -> ParseResult<()> {
        let (open, close) = match self.next() {
            Some(Token::Punct('(')) => ('(', ')'),
            Some(Token::Punct('{')) => ('{', '}'),
            Some(Token::Punct('[')) => ('[', ']'),
            other => return Err(format!("expected a bracket, found {}", describe(other))),
        };
        let mut depth = 1usize;
        while depth > 0 {
            match self.next() {
                None => return Err("unbalanced brackets".into()),
                Some(Token::Punct(c)) if *c == open => depth += 1,
                Some(Token::Punct(c)) if *c == close => depth -= 1,
                _ => {}
            }
        }
        Ok(())
    }

    fn group(&mut self, out: &mut Vec<TriplePattern>, collect: bool) -> ParseResult<()> {
        self.expect_punct('{')?;
        loop {
            match self.peek() {
                None => return Err("unterminated group".into()),
                Some(Token::Punct('}')) => {
                    self.next();
                    return Ok(());
                }
                Some(Token::Punct('{')) => {
                    self.group(out, collect)?;
                    while self.eat_keyword("UNION") {
                        self.group(out, collect)?;
                    }
                }
                Some(Token::Punct('.')) => {
                    self.next();
                }
                Some(Token::Keyword(k)) => {
                    let k = *k;
                    self.next();
                    match k {
                        "OPTIONAL" => self.group(out, collect)?,
                        "MINUS" => self.group(out, false)?,
                        "FILTER" => self.skip_filter(out)?,
                        "BIND" => self.skip_balanced()?,
                        "VALUES" => self.skip_values()?,
                        "GRAPH" => {
                            self.term()?;
                            self.group(out, collect)?;
                        }
                        "SERVICE" => {
                            self.eat_keyword("SILENT");
                            self.term()?;
                            self.group(out, false)?;
                        }
                        "SELECT" => return Err("subqueries are not supported".into()),
                        other => return Err(format!("unexpected keyword {other}")),
                    }
                }
                _ => self.triples_block(out, collect)?,
            }
        }
    }

    fn skip_filter(&mut self, out: &mut Vec<TriplePattern>) -> ParseResult<()> {
        match self.peek() {
            Some(Token::Punct('(')) => self.skip_balanced(),
            Some(Token::Keyword("NOT")) => {
                self.next();
                if !self.eat_keyword("EXISTS") {
                    return Err("expected EXISTS after NOT".into());
                }
                self.group(out, false)
            }
            Some(Token::Keyword("EXISTS")) => {
                self.next();
                self.group(out, false)
            }
            Some(Token::Word(_)) | Some(Token::PName(..)) | Some(Token::Iri(_)) => {
                self.next();
                self.skip_balanced()
            }
            other => Err(format!("unsupported FILTER at {}", describe(other))),
        }
    }

    fn skip_values(&mut self) -> ParseResult<()> {
        match self.peek() {
            Some(Token::Var(_)) => {
                self.next();
            }
            Some(Token::Punct('(')) => self.skip_balanced()?,
            other => return Err(format!("unsupported VALUES at {}", describe(other))),
        }
        if self.peek() == Some(&Token::Punct('{')) {
            self.skip_balanced()
        } else {
            Err("VALUES expects a data block".into())
        }
    }

    fn expand(&self, prefix: &str, local: &str) -> ParseResult<String> {
        match self.prefixes.get(prefix) {
            Some(base) => Ok(format!("{base}{local}")),
            None => Err(format!("undeclared prefix `{prefix}:`")),
        }
    }

    fn term(&mut self) -> ParseResult<Term> {
        let token = self.next().cloned();
        match token {
            Some(Token::Iri(iri)) => Ok(Term::Iri(self.resolve_relative(iri))),
            Some(Token::PName(prefix, local)) => Ok(Term::Iri(self.expand(&prefix, &local)?)),
            Some(Token::Var(v)) => Ok(Term::Variable(v)),
            Some(Token::Word(w))
                if w.eq_ignore_ascii_case("true") || w.eq_ignore_ascii_case("false") =>
            {
                Ok(Term::Literal(w))
            }
            Some(Token::Word(w)) => Ok(Term::Iri(w)),
            Some(Token::Literal(l)) | Some(Token::Number(l)) => Ok(Term::Literal(l)),
            Some(Token::Blank(b)) => Ok(Term::BlankNode(b)),
            Some(Token::Punct('[')) => {
                if self.eat_punct(']') {
                    Ok(Term::BlankNode(String::new()))
                } else {
                    Err("blank-node property lists are not supported".into())
                }
            }
            Some(Token::Punct('(')) => Err("RDF collections are not supported".into()),
            other => Err(format!(
                "expected a term, found {}",
                describe(other.as_ref())
            )),
        }
    }

    fn verb(&mut self) -> ParseResult<Term> {
        if let Some(Token::Word(w)) = self.peek() {
            if w == "a" {
                self.next();
                return Ok(Term::Iri(RDF_TYPE.to_string()));
            }
        }
        let verb = self.term()?;
        match verb {
            Term::Iri(_) | Term::Variable(_) => {}
            _ => return Err("predicate must be an IRI or a variable".into()),
        }
        if let Some(Token::Op(op)) = self.peek() {
            if matches!(op.as_str(), "/" | "|" | "^" | "+" | "?" | "!") {
                return Err("property paths are not supported".into());
            }
        }
        if self.peek() == Some(&Token::Punct('*')) {
            return Err("property paths are not supported".into());
        }
        Ok(verb)
    }

    fn triples_block(&mut self, out: &mut Vec<TriplePattern>, collect: bool) -> ParseResult<()> {
        let subject = self.term()?;
        loop {
            let predicate = self.verb()?;
            loop {
                let object = self.term()?;
                if collect {
                    out.push(TriplePattern {
                        subject: subject.clone(),
                        predicate: predicate.clone(),
                        object,
                    });
                }
                if !self.eat_punct(',') {
                    break;
                }
            }
            if !self.eat_punct(';') {
                break;
            }
            while self.eat_punct(';') {}
            if matches!(
                self.peek(),
                Some(Token::Punct('.')) | Some(Token::Punct('}'))
            ) {
                break;
            }
        }
        match self.peek() {
            Some(Token::Punct('.')) => {
                self.next();
                Ok(())
            }
            Some(Token::Punct('}')) | Some(Token::Punct('{')) | Some(Token::Keyword(_)) => Ok(()),
            other => Err(format!("unexpected {} after triple", describe(other))),
        }
    }
}

fn describe(token: Option<&Token>) -> String {
    match token {
        None => "end of query".to_string(),
        Some(t) => format!("{t:?}"),
    }
}

/// Entity–predicate pairs of a SELECT query, in pattern order.
///
/// A pattern with a concrete predicate yields `(subject, predicate,
/// SubjectKnown)` when only the subject is concrete and `(object,
/// predicate, ObjectKnown)` when only the object is an IRI.
pub fn extract_pairs(query: &SparqlQuery) -> Vec<LabelPair> {
    if query.form != QueryForm::Select {
        return Vec::new();
    }
    let mut pairs = Vec::new();
    for p in &query.patterns {
        let Some(predicate) = p.predicate.iri() else {
            continue;
        };
        match (&p.subject, &p.object) {
            (Term::Iri(s), o) if o.is_open() => pairs.push(LabelPair {
                entity: s.clone(),
                predicate: predicate.to_string(),
                orientation: Orientation::SubjectKnown,
            }),
            (s, Term::Iri(o)) if s.is_open() => pairs.push(LabelPair {
                entity: o.clone(),
                predicate: predicate.to_string(),
                orientation: Orientation::ObjectKnown,
            }),
            _ => {}
        }
    }
    pairs
}

/// Entity and predicate labels mentioned by concrete IRIs in SELECT
/// patterns; used to decide which triplets are query-relevant.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QueryMentions {
    pub entities: BTreeSet<String>,
    pub predicates: BTreeSet<String>,
}

fn hex_value(b: u8) -> Option<u8> {
    match b {
        b'0'..=b'9' => Some(b - b'0'),
        b'a'..=b'f' => Some(b - b'a' + 10),
        b'A'..=b'F' => Some(b - b'A' + 10),
        _ => None,
    }
}

/// Decodes an endpoint log line: takes the `query=` parameter when present,
/// maps `+` to space and `%XX` to bytes. Invalid escapes are kept verbatim.
pub fn decode_log_line(line: &str) -> String {
    let mut body = line.trim();
    if let Some(pos) = body.find("query=") {
        let at_param = pos == 0 || matches!(body.as_bytes()[pos - 1], b'?' | b'&');
        if at_param {
            body = &body[pos + "query=".len()..];
            if let Some(amp) = body.find('&') {
                body = &body[..amp];
            }
        }
    }
    let bytes = body.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'+' => {
                out.push(b' ');
                i += 1;
            }
            b'%' if i + 2 < bytes.len() => {
                match (hex_value(bytes[i + 1]), hex_value(bytes[i + 2])) {
                    (Some(hi), Some(lo)) => {
                        out.push(hi * 16 + lo);
                        i += 3;
                    }
                    _ => {
                        out.push(b'%');
                        i += 1;
                    }
                }
            }
            b => {
                out.push(b);
                i += 1;
            }
        }
    }
    String::from_utf8_lossy(&out).into_owned()
}

/// Streaming aggregation of a query log. Per-worker miners can be combined
/// with [`LogMiner::merge`].
#[derive(Clone, Debug, Default)]
pub struct LogMiner {
    parser: SparqlParser,
    pub form_counts: BTreeMap<QueryForm, usize>,
    pub blank_lines: usize,
    pub unextractable: usize,
    pub pairs: BTreeMap<LabelPair, u64>,
    pub mentions: QueryMentions,
}

impl LogMiner {
    pub fn new(parser: SparqlParser) -> Self {
        Self {
            parser,
            ..Default::default()
        }
    }

    pub fn add_line(&mut self, line: &str, decode: bool) {
        let text = if decode {
            decode_log_line(line)
        } else {
            line.trim().to_string()
        };
        if text.trim().is_empty() {
            self.blank_lines += 1;
            return;
        }
        let query = self.parser.parse(&text);
        *self.form_counts.entry(query.form).or_default() += 1;
        if query.form != QueryForm::Select {
            return;
        }
        if query.pattern_error.is_some() {
            self.unextractable += 1;
            return;
        }
        for p in &query.patterns {
            if let Some(pred) = p.predicate.iri() {
                self.mentions.predicates.insert(pred.to_string());
            }
            for t in [&p.subject, &p.object] {
                if let Term::Iri(e) = t {
                    self.mentions.entities.insert(e.clone());
                }
            }
        }
        for pair in extract_pairs(&query) {
            *self.pairs.entry(pair).or_default() += 1;
        }
    }

    pub fn merge(&mut self, other: LogMiner) {
        for (form, n) in other.form_counts {
            *self.form_counts.entry(form).or_default() += n;
        }
        self.blank_lines += other.blank_lines;
        self.unextractable += other.unextractable;
        for (pair, n) in other.pairs {
            *self.pairs.entry(pair).or_default() += n;
        }
        self.mentions.entities.extend(other.mentions.entities);
        self.mentions.predicates.extend(other.mentions.predicates);
    }

    pub fn total_queries(&self) -> usize {
        self.form_counts.values().sum()
    }

    pub fn count(&self, form: QueryForm) -> usize {
        self.form_counts.get(&form).copied().unwrap_or(0)
    }

    pub fn select_fraction(&self) -> f64 {
        let total = self.total_queries();
        if total == 0 {
            0.0
        } else {
            self.count(QueryForm::Select) as f64 / total as f64
        }
    }

    pub fn stats_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "queries={}", self.total_queries());
        for form in QueryForm::ALL {
            let _ = writeln!(out, "queries.{}={}", form.as_str(), self.count(form));
        }
        let _ = writeln!(out, "blank_lines={}", self.blank_lines);
        let _ = writeln!(out, "select_fraction={:.4}", self.select_fraction());
        let _ = writeln!(out, "select_unextractable={}", self.unextractable);
        let _ = writeln!(out, "label_pairs={}", self.pairs.len());
        let _ = writeln!(out, "mentioned_entities={}", self.mentions.entities.len());
        let _ = writeln!(
            out,
            "mentioned_predicates={}",
            self.mentions.predicates.len()
        );
        out
    }
}

/// Oriented entity–predicate pairs resolved against a graph, with query
/// frequencies.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QueryPairTable {
    counts: BTreeMap<EntityPredicatePair, u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ResolveStats {
    pub kept_pairs: usize,
    pub dropped_pairs: usize,
    pub dropped_frequency: u64,
}

impl QueryPairTable {
    pub fn from_counts(counts: impl IntoIterator<Item = (EntityPredicatePair, u64)>) -> Self {
        let mut table = Self::default();
        for (pair, n) in counts {
            table.add(pair, n);
        }
        table
    }

    pub fn add(&mut self, pair: EntityPredicatePair, n: u64) {
        if n > 0 {
            *self.counts.entry(pair).or_default() += n;
        }
    }

    /// Keeps pairs whose entity and predicate both exist in `kg`.
    pub fn resolve(
        pairs: &BTreeMap<LabelPair, u64>,
        kg: &KnowledgeGraph,
    ) -> (QueryPairTable, ResolveStats) {
        let mut table = QueryPairTable::default();
        let mut stats = ResolveStats::default();
        for (pair, &n) in pairs {
            match (
                kg.entities().get(&pair.entity),
                kg.predicates().get(&pair.predicate),
            ) {
                (Some(e), Some(p)) => {
                    table.add(EntityPredicatePair::new(e, p, pair.orientation), n)
                }
                _ => {
                    stats.dropped_pairs += 1;
                    stats.dropped_frequency += n;
                }
            }
        }
        stats.kept_pairs = table.len();
        (table, stats)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn frequency(&self, pair: &EntityPredicatePair) -> u64 {
        self.counts.get(pair).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&EntityPredicatePair, u64)> + '_ {
        self.counts.iter().map(|(p, &n)| (p, n))
    }

    /// Unique pairs of one orientation in canonical order.
    pub fn pairs(&self, orientation: Orientation) -> Vec<EntityPredicatePair> {
        self.counts
            .keys()
            .filter(|p| p.orientation == orientation)
            .copied()
            .collect()
    }

    pub fn total_frequency(&self, orientation: Orientation) -> u64 {
        self.iter()
            .filter(|(p, _)| p.orientation == orientation)
            .map(|(_, n)| n)
            .sum()
    }

    /// The `k` most frequent pairs of `orientation`; ties go to the smaller
    /// `(predicate id, entity id)`.
    pub fn top_k(&self, k: usize, orientation: Orientation) -> Vec<(EntityPredicatePair, u64)> {
        let mut ranked: Vec<(EntityPredicatePair, u64)> = self
            .iter()
            .filter(|(p, _)| p.orientation == orientation)
            .map(|(p, n)| (*p, n))
            .collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked.truncate(k);
        ranked
    }

    /// `entity<TAB>predicate<TAB>orientation<TAB>frequency`, one pair per line.
    pub fn to_tsv(&self, kg: &KnowledgeGraph) -> Result<String> {
        let mut out = String::new();
        for (pair, n) in self.iter() {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}",
                kg.entities().label(pair.entity)?,
                kg.predicates().label(pair.predicate)?,
                pair.orientation,
                n
            );
        }
        Ok(out)
    }

    pub fn from_tsv(text: &str, kg: &KnowledgeGraph) -> Result<QueryPairTable> {
        let mut table = QueryPairTable::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |reason: &str| Error::Malformed {
                line: i + 1,
                reason: reason.to_string(),
            };
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 4 {
                return Err(bad("expected 4 tab-separated fields"));
            }
            let entity = kg.entities().lookup(fields[0])?;
            let predicate = kg.predicates().lookup(fields[1])?;
            let orientation =
                Orientation::parse(fields[2]).ok_or_else(|| bad("bad orientation"))?;
            let n: u64 = fields[3]
                .parse()
                .map_err(|_| bad("frequency must be a positive integer"))?;
            if n == 0 {
                return Err(bad("frequency must be a positive integer"));
            }
            table.add(EntityPredicatePair::new(entity, predicate, orientation), n);
        }
        Ok(table)
    }
}
