//! The 56-feature file vector.
//!
//! Most features are computed per top-level type over the type's token range
//! (nested and anonymous classes included) and then summed across the
//! top-level types of a file; binary features are OR-ed. Four features do
//! not add up and are handled separately:
//!
//! * `sloc` counts the lines of the whole file that carry a token.
//! * `max_nested_blocks` is the maximum over the top-level types.
//! * `dit`, `tcc` and `lcc` describe the file's primary type: the top-level
//!   type named like the file, else the first public one, else the first.

use super::catalog::{has_android_prefix, AndroidCatalog, AndroidKind};
use super::lexer::{lex_lossy, Token, TokenKind, PRIMITIVES};
use super::parser::{anonymous_class_sites, invocations_in, parse_structure, simple_name, SourceModel, TypeDecl, TypeKind};
use crate::snapshot::{ProjectSnapshot, TypeIndex};
use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::ops::Range;

macro_rules! features {
    ($($variant:ident => $key:literal,)*) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Feature { $($variant,)* }

        /// JSON keys in vector order.
        pub const FEATURE_NAMES: &[&str] = &[$($key,)*];

        impl Feature {
            pub const ALL: &'static [Feature] = &[$(Feature::$variant,)*];
        }
    };
}

features! {
    Sloc => "sloc",
    Methods => "number_of_methods",
    Fields => "number_of_fields",
    Wmc => "wmc",
    MaxNestedBlocks => "max_nested_blocks",
    Cbo => "cbo",
    Rfc => "rfc",
    PublicFields => "number_of_public_fields",
    PublicMethods => "number_of_public_methods",
    Lcom => "lcom",
    Tcc => "tcc",
    Lcc => "lcc",
    Dit => "dit",
    UniqueWords => "number_of_unique_words",
    Loops => "number_of_loops",
    Assignments => "number_of_assignments",
    Comparisons => "number_of_comparisons",
    StringLiterals => "number_of_string_literals",
    MathOperations => "number_of_math_operations",
    Numbers => "quantity_of_numbers",
    DefaultFields => "number_of_default_fields",
    DefaultMethods => "number_of_default_methods",
    FinalFields => "number_of_final_fields",
    FinalMethods => "number_of_final_methods",
    StaticFields => "number_of_static_fields",
    StaticMethods => "number_of_static_methods",
    PrivateFields => "number_of_private_fields",
    PrivateMethods => "number_of_private_methods",
    ProtectedFields => "number_of_protected_fields",
    ProtectedMethods => "number_of_protected_methods",
    AbstractMethods => "number_of_abstract_methods",
    AnonymousClasses => "number_of_anonymous_classes",
    InnerClasses => "number_of_inner_classes",
    Lambdas => "number_of_lambdas",
    Nosi => "nosi",
    SynchronizedFields => "number_of_synchronized_fields",
    SynchronizedMethods => "number_of_synchronized_methods",
    ParenthesizedExpressions => "number_of_parenthesized_expressions",
    Returns => "number_of_returns",
    TryCatches => "number_of_try_catches",
    LogStatements => "number_of_log_statements",
    Variables => "number_of_variables",
    IsPojo => "is_pojo",
    IsTest => "is_test",
    IsActivity => "is_activity",
    IsView => "is_view",
    IsBroadcastReceiver => "is_broadcast_receiver",
    IsService => "is_service",
    IsContentProvider => "is_content_provider",
    IsFragment => "is_fragment",
    IsBuildingBlock => "is_building_block",
    IsInAndroidHierarchy => "is_in_android_hierarchy",
    ParametersCoupled => "number_of_parameters_coupled",
    ReturnCoupled => "number_of_return_coupled",
    MethodsCoupled => "number_of_methods_coupled",
    HasAndroidCoupling => "has_android_coupling",
}

pub const FEATURE_COUNT: usize = 56;
const _: () = assert!(FEATURE_NAMES.len() == FEATURE_COUNT);

impl Feature {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        FEATURE_NAMES[self.index()]
    }

    pub fn from_name(name: &str) -> Option<Self> {
        FEATURE_NAMES.iter().position(|n| *n == name).map(|i| Self::ALL[i])
    }

    pub fn is_binary(self) -> bool {
        use Feature::*;
        matches!(
            self,
            IsPojo | IsTest | IsActivity | IsView | IsBroadcastReceiver | IsService
                | IsContentProvider | IsFragment | IsBuildingBlock | IsInAndroidHierarchy
                | HasAndroidCoupling
        )
    }

    pub fn is_ratio(self) -> bool {
        matches!(self, Feature::Tcc | Feature::Lcc)
    }

    /// Features that aggregate over top-level types by plain summation.
    pub fn is_additive(self) -> bool {
        use Feature::*;
        !self.is_binary() && !matches!(self, Sloc | MaxNestedBlocks | Dit | Tcc | Lcc)
    }
}

#[derive(Clone, Copy, PartialEq)]
pub struct FeatureVector([f64; FEATURE_COUNT]);

impl Default for FeatureVector {
    fn default() -> Self {
        Self([0.0; FEATURE_COUNT])
    }
}

impl fmt::Debug for FeatureVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(Feature::ALL.iter().map(|ft| (ft.name(), self.get(*ft))).filter(|(_, v)| *v != 0.0))
            .finish()
    }
}

impl FeatureVector {
    pub fn get(&self, f: Feature) -> f64 {
        self.0[f.index()]
    }

    pub fn set(&mut self, f: Feature, value: f64) {
        self.0[f.index()] = value;
    }

    fn add(&mut self, f: Feature, value: usize) {
        self.0[f.index()] += value as f64;
    }

    fn flag(&mut self, f: Feature, on: bool) {
        if on {
            self.0[f.index()] = 1.0;
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn from_slice(values: &[f64]) -> Option<Self> {
        values.try_into().ok().map(Self)
    }
}

impl Serialize for FeatureVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(FEATURE_COUNT))?;
        for f in Feature::ALL {
            let v = self.get(*f);
            if !f.is_ratio() && v.fract() == 0.0 && (0.0..9.0e15).contains(&v) {
                map.serialize_entry(f.name(), &(v as u64))?;
            } else {
                map.serialize_entry(f.name(), &v)?;
            }
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for FeatureVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct FvVisitor;
        impl<'de> Visitor<'de> for FvVisitor {
            type Value = FeatureVector;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "an object with all {FEATURE_COUNT} feature keys")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let mut fv = FeatureVector::default();
                let mut seen = [false; FEATURE_COUNT];
                while let Some(key) = access.next_key::<String>()? {
                    let f = Feature::from_name(&key).ok_or_else(|| de::Error::unknown_field(&key, FEATURE_NAMES))?;
                    let v: f64 = access.next_value()?;
                    if !v.is_finite() {
                        return Err(de::Error::custom(format!("non-finite value for {key}")));
                    }
                    seen[f.index()] = true;
                    fv.set(f, v);
                }
                if let Some(missing) = seen.iter().position(|s| !s) {
                    return Err(de::Error::missing_field(FEATURE_NAMES[missing]));
                }
                Ok(fv)
            }
        }
        deserializer.deserialize_map(FvVisitor)
    }
}

/// Features plus any recoverable problems met while computing them.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub features: FeatureVector,
    pub diagnostics: Vec<String>,
}

/// Extracts features with the bundled Android catalog.
pub fn extract_features(file_path: &str, source: &str, snapshot: &ProjectSnapshot) -> FeatureVector {
    let index = snapshot.index();
    let catalog = AndroidCatalog::default();
    FeatureExtractor::new(&index, &catalog).extract(file_path, source).features
}

pub struct FeatureExtractor<'a> {
    index: &'a TypeIndex,
    catalog: &'a AndroidCatalog,
}

impl<'a> FeatureExtractor<'a> {
    pub fn new(index: &'a TypeIndex, catalog: &'a AndroidCatalog) -> Self {
        Self { index, catalog }
    }

    pub fn extract(&self, file_path: &str, source: &str) -> Extraction {
        let (tokens, lex_error) = lex_lossy(source);
        let model = parse_structure(&tokens);
        let mut diagnostics = Vec::new();
        if let Some(err) = lex_error {
            diagnostics.push(err.to_string());
        }
        diagnostics.extend(model.diagnostics.iter().cloned());

        let file = FileContext::new(file_path, &tokens, &model, self);
        let mut fv = FeatureVector::default();
        fv.set(Feature::Sloc, sloc(&tokens) as f64);
        fv.flag(Feature::IsTest, file.is_test_file());

        let roots: Vec<usize> = model.top_level_types().map(|(i, _)| i).collect();
        for &root in &roots {
            let part = file.type_features(root);
            for f in Feature::ALL {
                let v = part.get(*f);
                match f {
                    Feature::Sloc | Feature::Dit | Feature::Tcc | Feature::Lcc => {}
                    Feature::MaxNestedBlocks => fv.set(*f, fv.get(*f).max(v)),
                    f if f.is_binary() => fv.flag(*f, v != 0.0),
                    f => fv.set(*f, fv.get(*f) + v),
                }
            }
        }
        if let Some(primary) = primary_type(file_path, &model, &roots) {
            let (tcc, lcc) = cohesion_ratios(&model.types[primary]);
            fv.set(Feature::Tcc, tcc);
            fv.set(Feature::Lcc, lcc);
            fv.set(Feature::Dit, self.dit(&model.types[primary]) as f64);
        }
        Extraction { features: fv, diagnostics }
    }

    /// Superclass chain starting at `t`'s parent, as far as it resolves.
    fn superclass_chain(&self, t: &TypeDecl) -> Vec<String> {
        let mut chain = Vec::new();
        let mut seen = HashSet::from([t.name.clone()]);
        let mut next = t.extends_name.clone();
        while let Some(name) = next.take() {
            if !seen.insert(name.clone()) {
                break;
            }
            if let Some(parent) = self.index.superclass_of(&name) {
                next = parent.map(str::to_string);
            } else if !self.catalog.contains(&name) {
                break;
            }
            chain.push(name);
        }
        chain
    }

    fn dit(&self, t: &TypeDecl) -> usize {
        if t.kind != TypeKind::Class {
            return 1;
        }
        1 + self.superclass_chain(t).len()
    }

    fn android_kinds(&self, t: &TypeDecl) -> BTreeSet<AndroidKind> {
        self.superclass_chain(t)
            .iter()
            .flat_map(|n| self.catalog.kinds(n).collect::<Vec<_>>())
            .collect()
    }
}

fn primary_type(path: &str, model: &SourceModel, roots: &[usize]) -> Option<usize> {
    let stem = crate::miner::stem(path);
    roots
        .iter()
        .copied()
        .find(|&i| model.types[i].name == stem)
        .or_else(|| roots.iter().copied().find(|&i| model.types[i].modifiers.public))
        .or_else(|| roots.first().copied())
}

fn sloc(tokens: &[Token]) -> usize {
    let lines: BTreeSet<usize> = tokens.iter().flat_map(|t| t.line..=t.end_line).collect();
    lines.len()
}

struct FileContext<'a> {
    path: &'a str,
    toks: &'a [Token],
    model: &'a SourceModel,
    ex: &'a FeatureExtractor<'a>,
    /// Simple names of every named type declared in this file.
    own_types: BTreeSet<&'a str>,
    /// Class names an invocation receiver can refer to statically.
    known_classes: BTreeSet<&'a str>,
    do_tails: HashSet<usize>,
}

const LOG_RECEIVERS: &[&str] = &["Log", "log", "logger", "LOGGER", "Timber"];
const LOG_METHODS: &[&str] = &["println", "printStackTrace"];

impl<'a> FileContext<'a> {
    fn new(path: &'a str, toks: &'a [Token], model: &'a SourceModel, ex: &'a FeatureExtractor<'a>) -> Self {
        let own_types = model.types.iter().filter(|t| !t.is_anonymous).map(|t| t.name.as_str()).collect();
        let mut known_classes: BTreeSet<&str> = ex.index.names();
        known_classes.extend(model.types.iter().filter(|t| !t.is_anonymous).map(|t| t.name.as_str()));
        known_classes.extend(model.imports.iter().filter_map(|i| i.class_simple_name()));
        Self {
            path,
            toks,
            model,
            ex,
            own_types,
            known_classes,
            do_tails: do_while_tails(toks, &model.matching),
        }
    }

    fn is_test_file(&self) -> bool {
        let in_test_dir = self.path.split('/').any(|seg| seg == "test" || seg == "androidTest");
        let test_import = self.model.imports.iter().any(|i| {
            i.path.starts_with("org.junit") || i.path.starts_with("junit.") || i.path.starts_with("androidx.test")
        });
        let test_name = self.model.top_level_types().any(|(_, t)| t.name.ends_with("Test"));
        in_test_dir || test_import || test_name
    }

    /// Named types nested in (and including) the top-level type `root`.
    fn named_types_in(&self, root: usize) -> Vec<&'a TypeDecl> {
        self.model
            .types
            .iter()
            .enumerate()
            .filter(|(i, t)| !t.is_anonymous && self.model.root_of(*i) == root)
            .map(|(_, t)| t)
            .collect()
    }

    fn resolves_to_android(&self, type_name: &str) -> bool {
        if has_android_prefix(type_name) {
            return true;
        }
        if let Some((outer, _)) = type_name.split_once('.') {
            if self.resolves_to_android(outer) {
                return true;
            }
        }
        let simple = simple_name(type_name);
        if PRIMITIVES.contains(&simple) {
            return false;
        }
        self.ex.catalog.contains(simple)
            || self.model.imports.iter().any(|i| {
                !i.wildcard && !i.is_static && simple_name(&i.path) == simple && has_android_prefix(&i.path)
            })
    }

    fn type_features(&self, root: usize) -> FeatureVector {
        let root_decl = &self.model.types[root];
        let range = root_decl.token_range.clone();
        let types = self.named_types_in(root);
        let toks = self.toks;
        let mask = &self.model.type_arg_mask;
        let mut fv = FeatureVector::default();

        let methods: Vec<_> = types.iter().flat_map(|t| t.methods.iter()).collect();
        let fields: Vec<_> = types.iter().flat_map(|t| t.fields.iter()).collect();
        fv.add(Feature::Methods, methods.len());
        fv.add(Feature::Fields, fields.len());

        let mut wmc = 0;
        let mut max_nesting = 0;
        let mut invoked = BTreeSet::new();
        let mut variables = 0;
        for m in &methods {
            wmc += 1;
            if let Some(body) = m.body.clone() {
                wmc += self.decision_points(body.clone());
                max_nesting = max_nesting.max(brace_depth(toks, body.clone()));
                variables += local_variable_declarations(toks, mask, body);
                invoked.extend(m.invoked_names.iter().map(|i| i.key()));
            }
        }
        fv.add(Feature::Wmc, wmc);
        fv.add(Feature::MaxNestedBlocks, max_nesting);
        fv.add(Feature::Rfc, methods.len() + invoked.len());
        fv.add(Feature::Variables, variables);
        fv.add(Feature::Cbo, self.coupled_types(&types, range.clone()).len());

        let count_m = |pred: &dyn Fn(&super::parser::Modifiers) -> bool| methods.iter().filter(|m| pred(&m.modifiers)).count();
        let count_f = |pred: &dyn Fn(&super::parser::Modifiers) -> bool| fields.iter().filter(|f| pred(&f.modifiers)).count();
        fv.add(Feature::PublicFields, count_f(&|m| m.public));
        fv.add(Feature::PublicMethods, count_m(&|m| m.public));
        fv.add(Feature::PrivateFields, count_f(&|m| m.private));
        fv.add(Feature::PrivateMethods, count_m(&|m| m.private));
        fv.add(Feature::ProtectedFields, count_f(&|m| m.protected));
        fv.add(Feature::ProtectedMethods, count_m(&|m| m.protected));
        fv.add(Feature::DefaultFields, count_f(&|m| m.is_package_private()));
        fv.add(Feature::DefaultMethods, count_m(&|m| m.is_package_private()));
        fv.add(Feature::FinalFields, count_f(&|m| m.final_));
        fv.add(Feature::FinalMethods, count_m(&|m| m.final_));
        fv.add(Feature::StaticFields, count_f(&|m| m.static_));
        fv.add(Feature::StaticMethods, count_m(&|m| m.static_));
        fv.add(Feature::AbstractMethods, count_m(&|m| m.abstract_));
        fv.add(Feature::SynchronizedMethods, count_m(&|m| m.synchronized));
        fv.add(Feature::SynchronizedFields, types.iter().map(|t| synchronized_fields(t)).sum());

        fv.add(Feature::Lcom, types.iter().map(|t| lcom(t)).sum());
        fv.add(Feature::InnerClasses, types.iter().filter(|t| t.nesting_depth >= 1).count());
        fv.add(
            Feature::AnonymousClasses,
            anonymous_class_sites(toks, mask, &self.model.matching, range.clone()).len(),
        );

        let mut words = BTreeSet::new();
        for i in range.clone() {
            let t = &toks[i];
            let op = |s: &str| t.is_op(s);
            match t.kind {
                TokenKind::Identifier => {
                    words.insert(t.text.as_str());
                }
                TokenKind::StringLiteral => fv.add(Feature::StringLiterals, 1),
                TokenKind::NumberLiteral => fv.add(Feature::Numbers, 1),
                TokenKind::Keyword => match t.text.as_str() {
                    "for" | "do" => fv.add(Feature::Loops, 1),
                    "while" if !self.do_tails.contains(&i) => fv.add(Feature::Loops, 1),
                    "return" => fv.add(Feature::Returns, 1),
                    "try" => fv.add(Feature::TryCatches, 1),
                    _ => {}
                },
                TokenKind::Operator => {
                    if ["=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>="].iter().any(|s| op(s)) {
                        fv.add(Feature::Assignments, 1);
                    } else if ["==", "!=", "<=", ">="].iter().any(|s| op(s)) || ((op("<") || op(">")) && !mask[i]) {
                        fv.add(Feature::Comparisons, 1);
                    } else if ["+", "-", "*", "/", "%"].iter().any(|s| op(s)) {
                        fv.add(Feature::MathOperations, 1);
                    } else if op("->") && !is_switch_arrow(toks, i) {
                        fv.add(Feature::Lambdas, 1);
                    }
                }
                TokenKind::Punctuation if t.text == "(" && self.is_parenthesized_expression(i) => {
                    fv.add(Feature::ParenthesizedExpressions, 1)
                }
                _ => {}
            }
        }
        fv.add(Feature::UniqueWords, words.len());

        for inv in invocations_in(toks, mask, range) {
            let receiver = inv.receiver.as_deref();
            if receiver.is_some_and(|r| self.known_classes.contains(r)) {
                fv.add(Feature::Nosi, 1);
            }
            if receiver.is_some_and(|r| LOG_RECEIVERS.contains(&r)) || LOG_METHODS.contains(&inv.name.as_str()) {
                fv.add(Feature::LogStatements, 1);
            }
        }

        let mut params_coupled = 0;
        let mut returns_coupled = 0;
        let mut methods_coupled = 0;
        for m in &methods {
            let p = m.param_type_names.iter().filter(|p| self.resolves_to_android(p)).count();
            let r = m.return_type_name.as_deref().is_some_and(|r| self.resolves_to_android(r));
            params_coupled += p;
            returns_coupled += usize::from(r);
            methods_coupled += usize::from(p > 0 || r);
        }
        fv.add(Feature::ParametersCoupled, params_coupled);
        fv.add(Feature::ReturnCoupled, returns_coupled);
        fv.add(Feature::MethodsCoupled, methods_coupled);
        fv.flag(Feature::HasAndroidCoupling, methods_coupled > 0);

        let kinds = self.ex.android_kinds(root_decl);
        let has = |k: AndroidKind| kinds.contains(&k);
        fv.flag(Feature::IsActivity, has(AndroidKind::Activity));
        fv.flag(Feature::IsView, has(AndroidKind::View));
        fv.flag(Feature::IsBroadcastReceiver, has(AndroidKind::BroadcastReceiver));
        fv.flag(Feature::IsService, has(AndroidKind::Service));
        fv.flag(Feature::IsContentProvider, has(AndroidKind::ContentProvider));
        fv.flag(Feature::IsFragment, has(AndroidKind::Fragment));
        fv.flag(Feature::IsBuildingBlock, kinds.iter().any(|k| k.is_building_block()));
        fv.flag(Feature::IsInAndroidHierarchy, !kinds.is_empty());
        fv.flag(Feature::IsPojo, self.is_pojo(root_decl));
        fv.flag(Feature::IsTest, root_decl.name.ends_with("Test"));
        fv
    }

    fn decision_points(&self, body: Range<usize>) -> usize {
        body.filter(|&i| {
            let t = &self.toks[i];
            match t.kind {
                TokenKind::Keyword => match t.text.as_str() {
                    "if" | "for" | "do" | "case" | "catch" => true,
                    "while" => !self.do_tails.contains(&i),
                    _ => false,
                },
                TokenKind::Operator => t.text == "&&" || t.text == "||" || (t.text == "?" && !self.model.type_arg_mask[i]),
                _ => false,
            }
        })
        .count()
    }

    fn coupled_types(&self, types: &[&TypeDecl], range: Range<usize>) -> BTreeSet<String> {
        let mut names: BTreeSet<String> = BTreeSet::new();
        for t in types {
            names.extend(t.extends_name.iter().cloned());
            names.extend(t.implements_names.iter().cloned());
            names.extend(t.fields.iter().map(|f| simple_name(&f.type_name).to_string()));
            for m in &t.methods {
                names.extend(m.param_type_names.iter().map(|p| simple_name(p).to_string()));
                names.extend(m.return_type_name.iter().map(|r| simple_name(r).to_string()));
            }
        }
        let toks = self.toks;
        for i in range {
            if toks[i].is_keyword("new") {
                if let Some(name) = created_type(toks, i) {
                    names.insert(name);
                }
            } else if toks[i].is_keyword("catch") && toks.get(i + 1).is_some_and(|t| t.is_punct("(")) {
                let mut j = i + 2;
                while let Some(t) = toks.get(j) {
                    if t.is_ident() && toks.get(j + 1).is_some_and(|n| n.is_op("|") || n.is_ident() || n.is_punct(".")) {
                        if !toks.get(j + 1).is_some_and(|n| n.is_punct(".")) {
                            names.insert(t.text.clone());
                        }
                    } else if t.is_punct(")") {
                        break;
                    }
                    j += 1;
                }
            }
        }
        names.retain(|n| {
            !PRIMITIVES.contains(&n.as_str())
                && !matches!(n.as_str(), "String" | "Object" | "var")
                && !self.own_types.contains(n.as_str())
                && !self.model.type_parameters.contains(n)
        });
        names
    }

    fn is_parenthesized_expression(&self, i: usize) -> bool {
        let toks = self.toks;
        if i > 0 {
            let prev = &toks[i - 1];
            let excluded = match prev.kind {
                TokenKind::Identifier => prev.text != "yield",
                TokenKind::Annotation => true,
                TokenKind::Keyword => matches!(
                    prev.text.as_str(),
                    "if" | "for" | "while" | "switch" | "catch" | "synchronized" | "try" | "this" | "super"
                ),
                TokenKind::Operator => self.model.type_arg_mask[i - 1],
                _ => false,
            };
            if excluded {
                return false;
            }
        }
        let Some(close) = self.model.matching[i] else { return true };
        let after = toks.get(close + 1);
        if after.is_some_and(|t| t.is_op("->")) {
            return false;
        }
        !self.is_cast(i + 1, close, after)
    }

    fn is_cast(&self, start: usize, end: usize, after: Option<&Token>) -> bool {
        let toks = self.toks;
        let mask = &self.model.type_arg_mask;
        if start >= end {
            return false;
        }
        let first = &toks[start];
        let primitive = first.kind == TokenKind::Keyword && PRIMITIVES.contains(&first.text.as_str());
        if !first.is_ident() && !primitive {
            return false;
        }
        let mut j = start + 1;
        while j < end {
            let t = &toks[j];
            let ok = mask[j]
                || (t.is_punct(".") && toks.get(j + 1).is_some_and(|n| n.is_ident()))
                || (t.is_ident() && toks[j - 1].is_punct("."))
                || t.is_punct("[")
                || t.is_punct("]");
            if !ok {
                return false;
            }
            j += 1;
        }
        let Some(after) = after else { return false };
        match after.kind {
            TokenKind::Identifier | TokenKind::StringLiteral | TokenKind::CharLiteral | TokenKind::NumberLiteral => true,
            TokenKind::Keyword => matches!(after.text.as_str(), "this" | "new" | "super" | "true" | "false" | "null"),
            TokenKind::Punctuation => after.text == "(",
            TokenKind::Operator => matches!(after.text.as_str(), "!" | "~") || (primitive && matches!(after.text.as_str(), "-" | "+")),
            _ => false,
        }
    }

    fn is_pojo(&self, t: &TypeDecl) -> bool {
        if t.kind != TypeKind::Class || t.fields.is_empty() {
            return false;
        }
        if t.fields.iter().any(|f| f.modifiers.public) {
            return false;
        }
        let accessor_only = t.methods.iter().filter(|m| !m.is_constructor).all(|m| {
            let n = m.name.as_str();
            let params = m.param_type_names.len();
            let getter = (n.len() > 3 && n.starts_with("get") || n.len() > 2 && n.starts_with("is")) && params == 0;
            let setter = n.len() > 3 && n.starts_with("set") && params == 1;
            getter || setter || matches!(n, "equals" | "hashCode" | "toString")
        });
        let plain_parent = t.extends_name.as_deref().is_none_or(|p| self.ex.index.contains(p));
        accessor_only && plain_parent
    }
}

fn created_type(toks: &[Token], new_idx: usize) -> Option<String> {
    let mut j = new_idx + 1;
    while toks.get(j).is_some_and(|t| t.kind == TokenKind::Annotation) {
        j += 1;
    }
    let mut name = None;
    while let Some(t) = toks.get(j).filter(|t| t.is_ident()) {
        name = Some(t.text.clone());
        if toks.get(j + 1).is_some_and(|n| n.is_punct(".")) {
            j += 2;
        } else {
            break;
        }
    }
    name
}

/// Indices of `while` keywords that close a `do ... while` loop.
fn do_while_tails(toks: &[Token], matching: &[Option<usize>]) -> HashSet<usize> {
    let mut tails = HashSet::new();
    for (i, t) in toks.iter().enumerate() {
        if !t.is_keyword("do") {
            continue;
        }
        let after_body = match toks.get(i + 1) {
            Some(n) if n.is_punct("{") => matching[i + 1].map(|c| c + 1),
            Some(_) => {
                let mut depth = 0i32;
                let mut end = None;
                for (j, t) in toks.iter().enumerate().skip(i + 1) {
                    match t.text.as_str() {
                        "(" | "{" | "[" if t.kind == TokenKind::Punctuation => depth += 1,
                        ")" | "}" | "]" if t.kind == TokenKind::Punctuation => depth -= 1,
                        ";" if depth == 0 => {
                            end = Some(j + 1);
                            break;
                        }
                        _ => {}
                    }
                }
                end
            }
            None => None,
        };
        if let Some(w) = after_body.filter(|&w| toks.get(w).is_some_and(|t| t.is_keyword("while"))) {
            tails.insert(w);
        }
    }
    tails
}

/// Deepest brace nesting inside a body; the body's own braces are depth 0.
fn brace_depth(toks: &[Token], body: Range<usize>) -> usize {
    let mut depth = 0usize;
    let mut max = 0;
    for t in &toks[body] {
        if t.is_punct("{") {
            depth += 1;
            max = max.max(depth);
        } else if t.is_punct("}") {
            depth = depth.saturating_sub(1);
        }
    }
    max
}

/// A `->` is a switch-rule arrow when `case`/`default` is reached walking
/// back through the current statement.
fn is_switch_arrow(toks: &[Token], arrow: usize) -> bool {
    let mut depth = 0i32;
    for t in toks[..arrow].iter().rev() {
        match (t.kind, t.text.as_str()) {
            (TokenKind::Punctuation, ")") => depth += 1,
            (TokenKind::Punctuation, "(") => {
                if depth == 0 {
                    return false;
                }
                depth -= 1;
            }
            _ if depth > 0 => {}
            (TokenKind::Keyword, "case" | "default") => return true,
            (TokenKind::Punctuation, ";" | "{" | "}") => return false,
            (TokenKind::Operator, "=" | "->" | ":") => return false,
            (TokenKind::Keyword, "return") => return false,
            _ => {}
        }
    }
    false
}

/// Local variable declaration statements in a method body.
fn local_variable_declarations(toks: &[Token], mask: &[bool], body: Range<usize>) -> usize {
    let mut count = 0;
    for i in body.clone() {
        let starts_statement = i == body.start || {
            let prev = &toks[i - 1];
            (prev.kind == TokenKind::Punctuation && matches!(prev.text.as_str(), ";" | "{" | "}"))
                || (prev.is_op(":") && !mask[i - 1])
                || (prev.is_punct("(") && i >= 2 && (toks[i - 2].is_keyword("for") || toks[i - 2].is_keyword("try")))
        };
        if starts_statement && declares_variable(toks, mask, i, body.end) {
            count += 1;
        }
    }
    count
}

fn declares_variable(toks: &[Token], mask: &[bool], mut i: usize, end: usize) -> bool {
    while i < end && (toks[i].is_keyword("final") || toks[i].kind == TokenKind::Annotation) {
        i += 1;
    }
    let Some(first) = toks.get(i).filter(|_| i < end) else { return false };
    let primitive = first.kind == TokenKind::Keyword && PRIMITIVES.contains(&first.text.as_str()) && first.text != "void";
    if !first.is_ident() && !primitive {
        return false;
    }
    i += 1;
    loop {
        while i < end && mask[i] {
            i += 1;
        }
        if i + 1 < end && toks[i].is_punct(".") && toks[i + 1].is_ident() {
            i += 2;
        } else {
            break;
        }
    }
    while i + 1 < end && toks[i].is_punct("[") && toks[i + 1].is_punct("]") {
        i += 2;
    }
    if i >= end || !toks[i].is_ident() {
        return false;
    }
    toks.get(i + 1).is_some_and(|n| {
        n.is_op("=") || n.is_punct(";") || n.is_punct(",") || n.is_op(":") || n.is_punct("[")
    })
}

fn lcom(t: &TypeDecl) -> usize {
    let (mut disjoint, mut sharing) = (0usize, 0usize);
    for (a, ma) in t.methods.iter().enumerate() {
        for mb in &t.methods[a + 1..] {
            if ma.accessed_field_names.is_disjoint(&mb.accessed_field_names) {
                disjoint += 1;
            } else {
                sharing += 1;
            }
        }
    }
    disjoint.saturating_sub(sharing)
}

/// Tight and loose class cohesion over the non-private, non-constructor
/// methods of `t`.
fn cohesion_ratios(t: &TypeDecl) -> (f64, f64) {
    let visible: Vec<_> = t.methods.iter().filter(|m| !m.is_constructor && !m.modifiers.private).collect();
    let n = visible.len();
    if n < 2 {
        return (0.0, 0.0);
    }
    let pairs = (n * (n - 1) / 2) as f64;
    let connected = |a: usize, b: usize| !visible[a].accessed_field_names.is_disjoint(&visible[b].accessed_field_names);

    // union-find over direct connections
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        parent[x] = r;
        r
    }
    let mut direct = 0;
    for a in 0..n {
        for b in a + 1..n {
            if connected(a, b) {
                direct += 1;
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
        }
    }
    let mut indirect = 0;
    for a in 0..n {
        for b in a + 1..n {
            if find(&mut parent, a) == find(&mut parent, b) {
                indirect += 1;
            }
        }
    }
    (direct as f64 / pairs, indirect as f64 / pairs)
}

fn synchronized_fields(t: &TypeDecl) -> usize {
    t.fields
        .iter()
        .filter(|f| {
            let accessors: Vec<_> = t.methods.iter().filter(|m| m.accessed_field_names.contains(&f.name)).collect();
            !accessors.is_empty()
                && accessors
                    .iter()
                    .all(|m| m.modifiers.synchronized || !m.unsynchronized_field_names.contains(&f.name))
        })
        .count()
}

/// Category used by the guideline baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuidelineCategory {
    DataModel,
    Test,
    Utility,
    Other,
}

/// Data models first, then tests, then all-static utility classes.
pub fn classify_guideline_category(fv: &FeatureVector) -> GuidelineCategory {
    let methods = fv.get(Feature::Methods);
    if fv.get(Feature::IsPojo) == 1.0 {
        GuidelineCategory::DataModel
    } else if fv.get(Feature::IsTest) == 1.0 {
        GuidelineCategory::Test
    } else if methods > 0.0 && methods == fv.get(Feature::StaticMethods) {
        GuidelineCategory::Utility
    } else {
        GuidelineCategory::Other
    }
}
