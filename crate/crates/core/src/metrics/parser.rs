//! Recovers the declaration structure of a Java file from its tokens.
//!
//! This is not a grammar-conformant parser. It tracks type declarations,
//! their members and method bodies well enough to compute object-oriented
//! metrics, and never fails: unbalanced input is attached to the innermost
//! open scope and reported as a diagnostic.

use super::lexer::{Token, TokenKind, PRIMITIVES};
use std::collections::BTreeSet;
use std::ops::Range;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypeKind {
    Class,
    Interface,
    Enum,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Modifiers {
    pub public: bool,
    pub private: bool,
    pub protected: bool,
    pub static_: bool,
    pub final_: bool,
    pub abstract_: bool,
    pub synchronized: bool,
    pub volatile: bool,
    pub transient: bool,
    pub native: bool,
    pub default_: bool,
}

impl Modifiers {
    /// Package-private: none of the three access modifiers.
    pub fn is_package_private(&self) -> bool {
        !(self.public || self.private || self.protected)
    }

    fn apply(&mut self, word: &str) -> bool {
        let slot = match word {
            "public" => &mut self.public,
            "private" => &mut self.private,
            "protected" => &mut self.protected,
            "static" => &mut self.static_,
            "final" => &mut self.final_,
            "abstract" => &mut self.abstract_,
            "synchronized" => &mut self.synchronized,
            "volatile" => &mut self.volatile,
            "transient" => &mut self.transient,
            "native" => &mut self.native,
            "default" => &mut self.default_,
            "strictfp" => return true,
            _ => return false,
        };
        *slot = true;
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Invocation {
    /// Receiver identifier (`this`/`super` included) when the call is
    /// written `receiver.name(...)`.
    pub receiver: Option<String>,
    pub name: String,
}

impl Invocation {
    pub fn key(&self) -> String {
        match &self.receiver {
            Some(r) => format!("{r}.{}", self.name),
            None => self.name.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDecl {
    pub name: String,
    pub type_name: String,
    pub modifiers: Modifiers,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodDecl {
    pub name: String,
    pub modifiers: Modifiers,
    pub is_constructor: bool,
    /// Erased parameter type names as written (possibly qualified).
    pub param_type_names: Vec<String>,
    /// Erased return type; `None` for constructors.
    pub return_type_name: Option<String>,
    /// Tokens strictly between the body braces; `None` without a body.
    pub body: Option<Range<usize>>,
    pub accessed_field_names: BTreeSet<String>,
    /// Fields of the owning type touched outside any `synchronized` block.
    pub unsynchronized_field_names: BTreeSet<String>,
    pub invoked_names: Vec<Invocation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeDecl {
    pub name: String,
    pub kind: TypeKind,
    /// Simple name of the superclass with type arguments erased.
    pub extends_name: Option<String>,
    pub implements_names: Vec<String>,
    pub modifiers: Modifiers,
    pub nesting_depth: usize,
    pub is_anonymous: bool,
    pub parent: Option<usize>,
    /// From the first modifier or annotation to the closing brace.
    pub token_range: Range<usize>,
    pub methods: Vec<MethodDecl>,
    pub fields: Vec<FieldDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Import {
    pub path: String,
    pub is_static: bool,
    pub wildcard: bool,
}

impl Import {
    /// The class simple name this import makes visible, if any.
    pub fn class_simple_name(&self) -> Option<&str> {
        let mut segs = self.path.rsplit('.');
        match (self.wildcard, self.is_static) {
            (true, false) => None,
            (false, false) | (true, true) => segs.next(),
            (false, true) => segs.nth(1),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SourceModel {
    pub package_name: Option<String>,
    pub imports: Vec<Import>,
    /// Named types in declaration order followed by anonymous classes.
    pub types: Vec<TypeDecl>,
    pub type_parameters: BTreeSet<String>,
    pub diagnostics: Vec<String>,
    /// Per token: inside a type-argument list `<...>` (brackets included).
    pub type_arg_mask: Vec<bool>,
    /// Per token: index of the matching bracket for `(){}[]`.
    pub matching: Vec<Option<usize>>,
}

impl SourceModel {
    pub fn top_level_types(&self) -> impl Iterator<Item = (usize, &TypeDecl)> {
        self.types.iter().enumerate().filter(|(_, t)| t.parent.is_none())
    }

    /// The top-level type that `idx` is nested in (itself when top-level).
    pub fn root_of(&self, mut idx: usize) -> usize {
        while let Some(p) = self.types[idx].parent {
            idx = p;
        }
        idx
    }
}

/// Marks tokens that belong to type-argument or type-parameter lists.
///
/// A `<` opens such a list when it follows a capitalized identifier, a `.`,
/// an annotation or a declaration modifier, and a balanced run of type-like
/// tokens closes it.
pub fn mark_type_arguments(tokens: &[Token]) -> Vec<bool> {
    let mut mask = vec![false; tokens.len()];
    let mut i = 0;
    while i < tokens.len() {
        if tokens[i].is_op("<") && i > 0 && opens_type_args(&tokens[i - 1]) {
            if let Some(end) = scan_type_args(tokens, i) {
                mask[i..=end].iter_mut().for_each(|m| *m = true);
                i = end + 1;
                continue;
            }
        }
        i += 1;
    }
    mask
}

fn opens_type_args(prev: &Token) -> bool {
    match prev.kind {
        TokenKind::Identifier => prev.text.starts_with(|c: char| c.is_uppercase()),
        TokenKind::Punctuation => prev.text == ".",
        TokenKind::Annotation => true,
        TokenKind::Keyword => matches!(
            prev.text.as_str(),
            "public" | "private" | "protected" | "static" | "final" | "abstract" | "synchronized"
                | "native" | "default"
        ),
        _ => false,
    }
}

fn scan_type_args(tokens: &[Token], start: usize) -> Option<usize> {
    let mut depth: i32 = 0;
    for (j, t) in tokens.iter().enumerate().skip(start) {
        match (t.kind, t.text.as_str()) {
            (TokenKind::Operator, "<") => depth += 1,
            (TokenKind::Operator, ">") => depth -= 1,
            (TokenKind::Operator, ">>") => depth -= 2,
            (TokenKind::Operator, ">>>") => depth -= 3,
            (TokenKind::Identifier | TokenKind::Annotation, _) => {}
            (TokenKind::Keyword, w) if PRIMITIVES.contains(&w) || w == "extends" || w == "super" => {}
            (TokenKind::Punctuation, "." | "," | "[" | "]") => {}
            (TokenKind::Operator, "?" | "&") => {}
            _ => return None,
        }
        if depth == 0 {
            return Some(j);
        }
        if depth < 0 {
            return None;
        }
    }
    None
}

/// Pairs `()`, `{}` and `[]`. Unclosed openers stay `None`.
pub fn match_brackets(tokens: &[Token]) -> Vec<Option<usize>> {
    let mut matching = vec![None; tokens.len()];
    let mut stack: Vec<(usize, &str)> = Vec::new();
    for (i, t) in tokens.iter().enumerate() {
        if t.kind != TokenKind::Punctuation {
            continue;
        }
        let open = match t.text.as_str() {
            "(" | "{" | "[" => {
                stack.push((i, t.text.as_str()));
                continue;
            }
            ")" => "(",
            "}" => "{",
            "]" => "[",
            _ => continue,
        };
        if let Some(pos) = stack.iter().rposition(|(_, o)| *o == open) {
            let (j, _) = stack[pos];
            stack.truncate(pos);
            matching[i] = Some(j);
            matching[j] = Some(i);
        }
    }
    matching
}

pub fn parse_structure(tokens: &[Token]) -> SourceModel {
    let mut p = Parser {
        toks: tokens,
        pos: 0,
        model: SourceModel {
            type_arg_mask: mark_type_arguments(tokens),
            matching: match_brackets(tokens),
            ..SourceModel::default()
        },
    };
    p.parse_unit();
    p.collect_anonymous_classes();
    let mut model = p.model;
    let ranges: Vec<(usize, Vec<String>)> = model
        .types
        .iter()
        .enumerate()
        .map(|(i, t)| (i, t.fields.iter().map(|f| f.name.clone()).collect()))
        .collect();
    for (ti, field_names) in ranges {
        for mi in 0..model.types[ti].methods.len() {
            if let Some(body) = model.types[ti].methods[mi].body.clone() {
                let info = analyze_body(tokens, &model, body, &field_names);
                let m = &mut model.types[ti].methods[mi];
                m.accessed_field_names = info.accessed;
                m.unsynchronized_field_names = info.unsynchronized;
                m.invoked_names = info.invocations;
            }
        }
    }
    model
}

struct BodyInfo {
    accessed: BTreeSet<String>,
    unsynchronized: BTreeSet<String>,
    invocations: Vec<Invocation>,
}

fn analyze_body(
    toks: &[Token],
    model: &SourceModel,
    body: Range<usize>,
    field_names: &[String],
) -> BodyInfo {
    let synchronized_spans = synchronized_blocks(toks, &model.matching, body.clone());
    let mut accessed = BTreeSet::new();
    let mut unsynchronized = BTreeSet::new();
    for i in body.clone() {
        let t = &toks[i];
        if !t.is_ident() || !field_names.contains(&t.text) {
            continue;
        }
        let after_dot = i > 0 && toks[i - 1].is_punct(".");
        let via_this = after_dot && i > 1 && toks[i - 2].is_keyword("this");
        let is_call = toks.get(i + 1).is_some_and(|n| n.is_punct("("));
        if (after_dot && !via_this) || is_call {
            continue;
        }
        accessed.insert(t.text.clone());
        if !synchronized_spans.iter().any(|s| s.contains(&i)) {
            unsynchronized.insert(t.text.clone());
        }
    }
    BodyInfo {
        accessed,
        unsynchronized,
        invocations: invocations_in(toks, &model.type_arg_mask, body),
    }
}

fn synchronized_blocks(
    toks: &[Token],
    matching: &[Option<usize>],
    range: Range<usize>,
) -> Vec<Range<usize>> {
    let mut spans = Vec::new();
    for i in range.clone() {
        if !toks[i].is_keyword("synchronized") || !toks.get(i + 1).is_some_and(|t| t.is_punct("(")) {
            continue;
        }
        let Some(close_paren) = matching[i + 1] else { continue };
        let open = close_paren + 1;
        if toks.get(open).is_some_and(|t| t.is_punct("{")) {
            let end = matching[open].unwrap_or(range.end);
            spans.push(open..end);
        }
    }
    spans
}

/// Method invocations (not constructor calls, not declarations) in `range`.
pub fn invocations_in(toks: &[Token], mask: &[bool], range: Range<usize>) -> Vec<Invocation> {
    let mut out = Vec::new();
    for i in range.clone() {
        let t = &toks[i];
        if !t.is_ident() || !toks.get(i + 1).is_some_and(|n| n.is_punct("(")) || i + 1 >= range.end {
            continue;
        }
        let receiver = if i > 0 && toks[i - 1].is_punct(".") {
            if follows_new(toks, mask, i) {
                continue;
            }
            toks.get(i.wrapping_sub(2)).and_then(|r| {
                (r.is_ident() || r.is_keyword("this") || r.is_keyword("super")).then(|| r.text.clone())
            })
        } else if t.text == "yield" || (i > 0 && is_declaration_or_creation(toks, mask, i)) {
            continue;
        } else {
            None
        };
        out.push(Invocation {
            receiver,
            name: t.text.clone(),
        });
    }
    out
}

/// Whether the qualified name ending at `i` is the type of a `new` expression.
fn follows_new(toks: &[Token], mask: &[bool], mut i: usize) -> bool {
    loop {
        while i > 0 && mask[i - 1] {
            i -= 1;
        }
        if i >= 2 && toks[i - 1].is_punct(".") && toks[i - 2].is_ident() {
            i -= 2;
        } else {
            break;
        }
    }
    while i > 0 && toks[i - 1].kind == TokenKind::Annotation {
        i -= 1;
    }
    i > 0 && toks[i - 1].is_keyword("new")
}

fn is_declaration_or_creation(toks: &[Token], mask: &[bool], i: usize) -> bool {
    let prev = &toks[i - 1];
    match prev.kind {
        TokenKind::Identifier => true,
        TokenKind::Keyword => {
            prev.text == "new" || PRIMITIVES.contains(&prev.text.as_str()) || is_modifier(&prev.text)
        }
        TokenKind::Punctuation => prev.text == "]",
        TokenKind::Operator if mask[i - 1] => {
            // `obj.<T>call(` is an invocation; `List<T> decl(` is not.
            let open = (0..i - 1).rev().find(|&j| !mask[j]).map_or(0, |j| j + 1);
            !(open > 0 && toks[open - 1].is_punct("."))
        }
        _ => false,
    }
}

fn is_modifier(word: &str) -> bool {
    Modifiers::default().apply(word)
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    model: SourceModel,
}

impl<'a> Parser<'a> {
    fn tok(&self, i: usize) -> Option<&'a Token> {
        self.toks.get(i)
    }

    fn cur(&self) -> Option<&'a Token> {
        self.tok(self.pos)
    }

    fn diag(&mut self, msg: String) {
        self.model.diagnostics.push(msg);
    }

    /// Position just past the bracket closing the opener at `open`; the end
    /// of input when unmatched.
    fn skip_balanced(&mut self, open: usize) -> usize {
        match self.model.matching[open] {
            Some(close) if close > open => close + 1,
            _ => {
                let line = self.toks[open].line;
                self.diag(format!("unbalanced '{}' at line {line}", self.toks[open].text));
                self.toks.len()
            }
        }
    }

    fn skip_type_args(&self, mut i: usize) -> usize {
        let mut depth = 0i32;
        while i < self.toks.len() && self.model.type_arg_mask[i] {
            depth += angle_delta(&self.toks[i]);
            i += 1;
            if depth <= 0 {
                break;
            }
        }
        i
    }

    fn record_type_params(&mut self, start: usize, end: usize) {
        let mut depth = 0;
        let mut expect_name = true;
        for t in &self.toks[start..end] {
            match t.text.as_str() {
                "<" => {
                    depth += 1;
                    expect_name = depth == 1;
                }
                ">" => depth -= 1,
                ">>" => depth -= 2,
                ">>>" => depth -= 3,
                "," if depth == 1 => expect_name = true,
                _ if expect_name && depth == 1 && t.is_ident() => {
                    self.model.type_parameters.insert(t.text.clone());
                    expect_name = false;
                }
                _ => {}
            }
        }
    }

    fn skip_annotation(&mut self) {
        self.pos += 1;
        if self.cur().is_some_and(|t| t.is_punct("(")) {
            self.pos = self.skip_balanced(self.pos);
        }
    }

    fn is_type_keyword(&self, i: usize) -> Option<TypeKind> {
        let t = self.tok(i)?;
        match (t.kind, t.text.as_str()) {
            (TokenKind::Keyword, "class") => Some(TypeKind::Class),
            (TokenKind::Keyword, "interface") => Some(TypeKind::Interface),
            (TokenKind::Keyword, "enum") => Some(TypeKind::Enum),
            (TokenKind::Annotation, "@interface") => Some(TypeKind::Interface),
            (TokenKind::Identifier, "record")
                if self.tok(i + 1).is_some_and(|n| n.is_ident())
                    && self.tok(i + 2).is_some_and(|n| n.is_punct("(") || n.is_op("<")) =>
            {
                Some(TypeKind::Class)
            }
            _ => None,
        }
    }

    /// Consumes modifiers, annotations and the contextual `sealed` /
    /// `non-sealed` words.
    fn read_modifiers(&mut self) -> Modifiers {
        let mut mods = Modifiers::default();
        while let Some(t) = self.cur() {
            match t.kind {
                TokenKind::Keyword if mods.apply(&t.text) => self.pos += 1,
                TokenKind::Annotation if t.text != "@interface" => self.skip_annotation(),
                TokenKind::Identifier if t.text == "sealed" && self.tok(self.pos + 1).is_some_and(|n| n.kind != TokenKind::Punctuation && !n.is_op("=")) => self.pos += 1,
                TokenKind::Identifier
                    if t.text == "non"
                        && self.tok(self.pos + 1).is_some_and(|n| n.is_op("-"))
                        && self.tok(self.pos + 2).is_some_and(|n| n.text == "sealed") =>
                {
                    self.pos += 3
                }
                _ => break,
            }
        }
        mods
    }

    fn parse_unit(&mut self) {
        while let Some(t) = self.cur() {
            let start = self.pos;
            if t.is_keyword("package") {
                self.pos += 1;
                let name = self.read_qualified_until_semicolon();
                self.model.package_name = Some(name);
                continue;
            }
            if t.is_keyword("import") {
                self.pos += 1;
                let is_static = self.cur().is_some_and(|t| t.is_keyword("static"));
                if is_static {
                    self.pos += 1;
                }
                let path = self.read_qualified_until_semicolon();
                let wildcard = path.ends_with(".*");
                self.model.imports.push(Import {
                    path: path.trim_end_matches(".*").to_string(),
                    is_static,
                    wildcard,
                });
                continue;
            }
            if t.is_punct(";") {
                self.pos += 1;
                continue;
            }
            let mods = self.read_modifiers();
            if let Some(kind) = self.is_type_keyword(self.pos) {
                self.parse_type_decl(kind, mods, start, None, 0);
            } else if self.pos == start {
                let t = &self.toks[self.pos];
                let msg = format!("unexpected '{}' at line {} outside a type", t.text, t.line);
                self.diag(msg);
                self.pos = if t.is_punct("{") { self.skip_balanced(self.pos) } else { self.pos + 1 };
            }
        }
    }

    fn read_qualified_until_semicolon(&mut self) -> String {
        let mut name = String::new();
        while let Some(t) = self.cur() {
            self.pos += 1;
            if t.is_punct(";") {
                break;
            }
            name.push_str(&t.text);
        }
        name
    }

    /// Reads a type at the cursor, returning the erased name as written.
    fn read_type(&mut self) -> Option<String> {
        while self.cur().is_some_and(|t| t.kind == TokenKind::Annotation) {
            self.skip_annotation();
        }
        let first = self.cur()?;
        let is_primitive = first.kind == TokenKind::Keyword && PRIMITIVES.contains(&first.text.as_str());
        if !first.is_ident() && !is_primitive {
            return None;
        }
        let mut name = first.text.clone();
        self.pos += 1;
        loop {
            if self.cur().is_some_and(|t| t.is_op("<")) && self.model.type_arg_mask[self.pos] {
                self.pos = self.skip_type_args(self.pos);
            }
            if self.cur().is_some_and(|t| t.is_punct("."))
                && self.tok(self.pos + 1).is_some_and(|t| t.is_ident())
            {
                name.push('.');
                name.push_str(&self.toks[self.pos + 1].text);
                self.pos += 2;
                continue;
            }
            break;
        }
        while self.cur().is_some_and(|t| t.is_punct("["))
            && self.tok(self.pos + 1).is_some_and(|t| t.is_punct("]"))
        {
            self.pos += 2;
        }
        if self.cur().is_some_and(|t| t.is_op("...")) {
            self.pos += 1;
        }
        Some(name)
    }

    fn read_type_list(&mut self) -> Vec<String> {
        let mut names = Vec::new();
        while let Some(name) = self.read_type() {
            names.push(simple_name(&name).to_string());
            if self.cur().is_some_and(|t| t.is_punct(",")) {
                self.pos += 1;
            } else {
                break;
            }
        }
        names
    }

    fn parse_type_decl(
        &mut self,
        kind: TypeKind,
        modifiers: Modifiers,
        start: usize,
        parent: Option<usize>,
        depth: usize,
    ) {
        self.pos += 1;
        let Some(name_tok) = self.cur().filter(|t| t.is_ident()) else {
            let line = self.toks.get(self.pos.saturating_sub(1)).map_or(0, |t| t.line);
            self.diag(format!("type declaration without a name at line {line}"));
            return;
        };
        self.pos += 1;
        if self.cur().is_some_and(|t| t.is_op("<")) {
            let end = self.skip_type_args(self.pos);
            self.record_type_params(self.pos, end);
            self.pos = end;
        }
        if self.cur().is_some_and(|t| t.is_punct("(")) {
            // record header
            self.pos = self.skip_balanced(self.pos);
        }
        let mut extends_name = None;
        let mut implements_names = Vec::new();
        while let Some(t) = self.cur() {
            if t.is_punct("{") {
                break;
            }
            self.pos += 1;
            if t.is_keyword("extends") {
                let list = self.read_type_list();
                if kind == TypeKind::Class {
                    extends_name = list.into_iter().next();
                } else {
                    implements_names.extend(list);
                }
            } else if t.is_keyword("implements") {
                implements_names.extend(self.read_type_list());
            } else if t.is_punct(";") {
                self.diag(format!("type '{}' has no body", name_tok.text));
                return;
            }
        }
        let idx = self.model.types.len();
        self.model.types.push(TypeDecl {
            name: name_tok.text.clone(),
            kind,
            extends_name,
            implements_names,
            modifiers,
            nesting_depth: depth,
            is_anonymous: false,
            parent,
            token_range: start..start,
            methods: Vec::new(),
            fields: Vec::new(),
        });
        if self.cur().is_none() {
            self.diag(format!("type '{}' has no body", name_tok.text));
            self.model.types[idx].token_range.end = self.toks.len();
            return;
        }
        self.pos += 1;
        self.parse_type_body(idx, kind, depth);
        self.model.types[idx].token_range.end = self.pos;
    }

    fn parse_type_body(&mut self, idx: usize, kind: TypeKind, depth: usize) {
        if kind == TypeKind::Enum && !self.skip_enum_constants() {
            return;
        }
        loop {
            let Some(t) = self.cur() else {
                let name = self.model.types[idx].name.clone();
                self.diag(format!("unbalanced braces: type '{name}' is not closed"));
                return;
            };
            if t.is_punct("}") {
                self.pos += 1;
                return;
            }
            if t.is_punct(";") {
                self.pos += 1;
                continue;
            }
            let start = self.pos;
            let mods = self.read_modifiers();
            let Some(t) = self.cur() else { continue };
            if let Some(kind) = self.is_type_keyword(self.pos) {
                self.parse_type_decl(kind, mods, start, Some(idx), depth + 1);
                continue;
            }
            if t.is_punct("{") {
                self.pos = self.skip_balanced(self.pos);
                continue;
            }
            if t.is_op("<") && self.model.type_arg_mask[self.pos] {
                let end = self.skip_type_args(self.pos);
                self.record_type_params(self.pos, end);
                self.pos = end;
            }
            if !self.parse_member(idx, mods) {
                self.recover_member();
            }
        }
    }

    /// Skips enum constants; returns false if the body closed.
    fn skip_enum_constants(&mut self) -> bool {
        while let Some(t) = self.cur() {
            match (t.kind, t.text.as_str()) {
                (TokenKind::Punctuation, "}") => {
                    self.pos += 1;
                    return false;
                }
                (TokenKind::Punctuation, ";") => {
                    self.pos += 1;
                    return true;
                }
                (TokenKind::Punctuation, "(" | "{") => self.pos = self.skip_balanced(self.pos),
                (TokenKind::Annotation, _) => self.skip_annotation(),
                _ => self.pos += 1,
            }
        }
        true
    }

    fn recover_member(&mut self) {
        if let Some(t) = self.cur() {
            let msg = format!("could not parse member at line {} near '{}'", t.line, t.text);
            self.diag(msg);
        }
        while let Some(t) = self.cur() {
            if t.is_punct(";") {
                self.pos += 1;
                return;
            }
            if t.is_punct("}") {
                return;
            }
            if t.is_punct("{") || t.is_punct("(") || t.is_punct("[") {
                let was_brace = t.is_punct("{");
                self.pos = self.skip_balanced(self.pos);
                if was_brace {
                    return;
                }
            } else {
                self.pos += 1;
            }
        }
    }

    fn parse_member(&mut self, owner: usize, modifiers: Modifiers) -> bool {
        let Some(t) = self.cur() else { return false };
        let owner_name = self.model.types[owner].name.clone();
        if t.is_ident() && t.text == owner_name && self.tok(self.pos + 1).is_some_and(|n| n.is_punct("(")) {
            self.pos += 1;
            return self.parse_method(owner, modifiers, owner_name, None);
        }
        let Some(type_name) = self.read_type() else { return false };
        let Some(name) = self.cur().filter(|t| t.is_ident()) else { return false };
        self.pos += 1;
        if self.cur().is_some_and(|t| t.is_punct("(")) {
            return self.parse_method(owner, modifiers, name.text.clone(), Some(type_name));
        }
        self.parse_field_declarators(owner, modifiers, type_name, name.text.clone())
    }

    fn parse_method(
        &mut self,
        owner: usize,
        modifiers: Modifiers,
        name: String,
        return_type: Option<String>,
    ) -> bool {
        let open = self.pos;
        let close = self.skip_balanced(open);
        let params = self.parse_params(open + 1, close.saturating_sub(1).max(open + 1));
        self.pos = close;
        while self.cur().is_some_and(|t| t.is_punct("[") || t.is_punct("]")) {
            self.pos += 1;
        }
        if self.cur().is_some_and(|t| t.is_keyword("throws")) {
            self.pos += 1;
            self.read_type_list();
        }
        let mut body = None;
        match self.cur() {
            Some(t) if t.is_punct("{") => {
                let open = self.pos;
                let end = self.skip_balanced(open);
                let body_end = if self.model.matching[open].is_some() { end - 1 } else { end };
                body = Some(open + 1..body_end);
                self.pos = end;
            }
            Some(t) if t.is_punct(";") => self.pos += 1,
            Some(t) if t.is_keyword("default") => {
                while self.cur().is_some_and(|t| !t.is_punct(";")) {
                    self.pos += 1;
                }
                self.pos += 1;
            }
            _ => return false,
        }
        let mut modifiers = modifiers;
        if self.model.types[owner].kind == TypeKind::Interface {
            modifiers.public |= !modifiers.private;
            modifiers.abstract_ |= body.is_none() && !modifiers.static_ && !modifiers.default_;
        }
        self.model.types[owner].methods.push(MethodDecl {
            is_constructor: return_type.is_none(),
            name,
            modifiers,
            param_type_names: params,
            return_type_name: return_type,
            body,
            accessed_field_names: BTreeSet::new(),
            unsynchronized_field_names: BTreeSet::new(),
            invoked_names: Vec::new(),
        });
        true
    }

    fn parse_params(&mut self, start: usize, end: usize) -> Vec<String> {
        let mut params = Vec::new();
        let mut seg_start = start;
        let mut depth = 0i32;
        for i in start..=end {
            let at_end = i == end;
            if !at_end {
                let t = &self.toks[i];
                match t.text.as_str() {
                    "(" | "[" | "{" if t.kind == TokenKind::Punctuation => depth += 1,
                    ")" | "]" | "}" if t.kind == TokenKind::Punctuation => depth -= 1,
                    _ => {}
                }
                if !(t.is_punct(",") && depth == 0 && !self.model.type_arg_mask[i]) {
                    continue;
                }
            }
            if let Some(ty) = self.param_type(seg_start, i) {
                params.push(ty);
            }
            seg_start = i + 1;
        }
        params
    }

    fn param_type(&mut self, start: usize, end: usize) -> Option<String> {
        if start >= end {
            return None;
        }
        let saved = self.pos;
        self.pos = start;
        while self.cur().is_some_and(|t| t.is_keyword("final")) || self.cur().is_some_and(|t| t.kind == TokenKind::Annotation) {
            if self.toks[self.pos].kind == TokenKind::Annotation {
                self.skip_annotation();
            } else {
                self.pos += 1;
            }
        }
        let ty = if self.pos < end { self.read_type() } else { None };
        self.pos = saved;
        ty
    }

    fn parse_field_declarators(
        &mut self,
        owner: usize,
        modifiers: Modifiers,
        type_name: String,
        first_name: String,
    ) -> bool {
        let mut name = first_name;
        let mut modifiers = modifiers;
        if self.model.types[owner].kind == TypeKind::Interface {
            modifiers.public = true;
            modifiers.static_ = true;
            modifiers.final_ = true;
        }
        loop {
            self.model.types[owner].fields.push(FieldDecl {
                name: name.clone(),
                type_name: type_name.clone(),
                modifiers,
            });
            while self.cur().is_some_and(|t| t.is_punct("[") || t.is_punct("]")) {
                self.pos += 1;
            }
            if self.cur().is_some_and(|t| t.is_op("=")) {
                self.skip_initializer();
            }
            match self.cur() {
                Some(t) if t.is_punct(";") => {
                    self.pos += 1;
                    return true;
                }
                Some(t) if t.is_punct(",") => {
                    self.pos += 1;
                    match self.cur().filter(|t| t.is_ident()) {
                        Some(t) => {
                            name = t.text.clone();
                            self.pos += 1;
                        }
                        None => return false,
                    }
                }
                _ => return false,
            }
        }
    }

    fn skip_initializer(&mut self) {
        while let Some(t) = self.cur() {
            if t.kind == TokenKind::Punctuation {
                match t.text.as_str() {
                    "(" | "[" | "{" => {
                        self.pos = self.skip_balanced(self.pos);
                        continue;
                    }
                    ";" | "," | "}" => return,
                    _ => {}
                }
            }
            self.pos += 1;
        }
    }

    /// Records `new T(...) {` sites as anonymous types nested one level
    /// below the innermost named type containing them.
    fn collect_anonymous_classes(&mut self) {
        for site in anonymous_class_sites(self.toks, &self.model.type_arg_mask, &self.model.matching, 0..self.toks.len()) {
            let enclosing = self
                .model
                .types
                .iter()
                .enumerate()
                .filter(|(_, t)| !t.is_anonymous && t.token_range.contains(&site.new_index))
                .max_by_key(|(_, t)| t.nesting_depth)
                .map(|(i, t)| (i, t.nesting_depth));
            let (parent, depth) = match enclosing {
                Some((i, d)) => (Some(i), d + 1),
                None => (None, 0),
            };
            let end = self.model.matching[site.body_open].map_or(self.toks.len(), |c| c + 1);
            self.model.types.push(TypeDecl {
                name: site.type_name,
                kind: TypeKind::Class,
                extends_name: None,
                implements_names: Vec::new(),
                modifiers: Modifiers::default(),
                nesting_depth: depth,
                is_anonymous: true,
                parent,
                token_range: site.new_index..end,
                methods: Vec::new(),
                fields: Vec::new(),
            });
        }
    }
}

pub struct AnonymousSite {
    pub new_index: usize,
    pub body_open: usize,
    pub type_name: String,
}

/// Finds `new Name(...) {` occurrences in `range`.
pub fn anonymous_class_sites(
    toks: &[Token],
    mask: &[bool],
    matching: &[Option<usize>],
    range: Range<usize>,
) -> Vec<AnonymousSite> {
    let mut sites = Vec::new();
    for i in range.clone() {
        if !toks[i].is_keyword("new") {
            continue;
        }
        let mut j = i + 1;
        while toks.get(j).is_some_and(|t| t.kind == TokenKind::Annotation) {
            j += 1;
        }
        let mut name = None;
        while let Some(t) = toks.get(j).filter(|t| t.is_ident()) {
            name = Some(t.text.clone());
            j += 1;
            while j < toks.len() && mask[j] {
                j += 1;
            }
            if toks.get(j).is_some_and(|t| t.is_punct(".")) {
                j += 1;
            } else {
                break;
            }
        }
        let Some(name) = name else { continue };
        if !toks.get(j).is_some_and(|t| t.is_punct("(")) {
            continue;
        }
        let Some(close) = matching[j] else { continue };
        let open = close + 1;
        if open < range.end && toks[open].is_punct("{") {
            sites.push(AnonymousSite {
                new_index: i,
                body_open: open,
                type_name: name,
            });
        }
    }
    sites
}

fn angle_delta(t: &Token) -> i32 {
    match t.text.as_str() {
        "<" => 1,
        ">" => -1,
        ">>" => -2,
        ">>>" => -3,
        _ => 0,
    }
}

pub fn simple_name(name: &str) -> &str {
    name.rsplit('.').next().unwrap_or(name)
}
