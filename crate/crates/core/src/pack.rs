//! Language packs: loading, cross-reference validation and lookups.
//!
//! A pack is a directory with a `manifest.toml` naming its component files.
//! See `docs/pack-format.md` for the layout.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;
use thiserror::Error;

use crate::constructs::{
    ConstructDef, GovernmentPattern, LemmaClass, ParaphrasePart, TokenMatcher,
};
use crate::exercises::{DistractorRecipe, Strategy};
use crate::features::FeatureBundle;
use crate::feedback::FeatureHierarchy;
use crate::morphology::{FeatureSchema, Lexeme, Morphology, Paradigm};
use crate::pipeline::GrammarRules;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PackError {
    #[error("missing file {}", .0.display())]
    MissingFile(PathBuf),
    #[error("{pointer}: {message}")]
    SchemaViolation { pointer: String, message: String },
    #[error("{pointer}: unresolved reference `{reference}`")]
    DanglingReference { pointer: String, reference: String },
}

#[derive(Debug, Deserialize)]
struct Manifest {
    language: String,
    name: String,
    components: Components,
    #[serde(default)]
    gold: Option<GoldFiles>,
}

#[derive(Debug, Deserialize)]
struct Components {
    schema: String,
    paradigms: String,
    lexicon: String,
    government: String,
    constructs: String,
    hierarchy: String,
    grammar: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct GoldFiles {
    pub corpus: PathBuf,
    pub instances: PathBuf,
}

#[derive(Deserialize)]
struct ParadigmFile {
    #[serde(default)]
    paradigm: Vec<Paradigm>,
}

#[derive(Deserialize)]
struct LexiconFile {
    #[serde(default)]
    lexeme: Vec<Lexeme>,
}

#[derive(Deserialize)]
struct GovernmentFile {
    #[serde(default)]
    pattern: Vec<GovernmentPattern>,
}

#[derive(Deserialize)]
struct ConstructFile {
    #[serde(default)]
    lemma_class: Vec<LemmaClass>,
    #[serde(default)]
    recipe: Vec<DistractorRecipe>,
    #[serde(default)]
    construct: Vec<ConstructDef>,
}

/// An immutable, validated language pack.
#[derive(Debug, Clone)]
pub struct LanguagePack {
    pub language: String,
    pub name: String,
    pub root: PathBuf,
    pub schema: FeatureSchema,
    pub morphology: Morphology,
    pub government: Vec<GovernmentPattern>,
    pub lemma_classes: Vec<LemmaClass>,
    pub recipes: Vec<DistractorRecipe>,
    pub constructs: Vec<ConstructDef>,
    pub hierarchy: FeatureHierarchy,
    pub grammar: GrammarRules,
    /// Gold corpus and instance files, resolved against `root`.
    pub gold: Option<GoldFiles>,
}

impl LanguagePack {
    pub fn construct(&self, id: &str) -> Option<&ConstructDef> {
        self.constructs.iter().find(|c| c.id == id)
    }

    pub fn recipe(&self, id: &str) -> Option<&DistractorRecipe> {
        self.recipes.iter().find(|r| r.id == id)
    }

    pub fn lemma_class(&self, id: &str) -> Option<&LemmaClass> {
        self.lemma_classes.iter().find(|c| c.id == id)
    }

    /// Unknown classes contain nothing. A link class holds both ends of every
    /// link under its key.
    pub fn lemma_class_contains(&self, class: &str, lemma: &str) -> bool {
        let Some(c) = self.lemma_class(class) else {
            return false;
        };
        c.lemmas.iter().any(|l| l == lemma)
            || c.pattern_re.as_ref().is_some_and(|re| re.is_match(lemma))
            || c.link.as_ref().is_some_and(|key| {
                self.morphology
                    .lexemes_by_lemma(lemma)
                    .any(|l| l.links.contains_key(key))
                    || self
                        .morphology
                        .lexicon
                        .iter()
                        .any(|l| l.links.get(key).is_some_and(|t| t == lemma))
            })
    }

    /// Government patterns whose governor is `lemma` (directly or by class).
    pub fn government_for<'a>(
        &'a self,
        lemma: &'a str,
        pos: &'a str,
    ) -> impl Iterator<Item = &'a GovernmentPattern> + 'a {
        self.government.iter().filter(move |p| {
            p.pos == pos
                && (p.governor.as_deref() == Some(lemma)
                    || p.governor_class
                        .as_deref()
                        .is_some_and(|c| self.lemma_class_contains(c, lemma)))
        })
    }
}

/// Loads and validates a pack, returning the first problem found.
pub fn load_pack(path: impl AsRef<Path>) -> Result<LanguagePack, PackError> {
    validate_pack(path).map_err(|mut errs| errs.remove(0))
}

/// Loads a pack and reports every problem found. Parsing stops at the first
/// unreadable file; cross-reference checks report all issues.
pub fn validate_pack(path: impl AsRef<Path>) -> Result<LanguagePack, Vec<PackError>> {
    let root = path.as_ref().to_path_buf();
    let manifest: Manifest = read_toml(&root, "manifest.toml").map_err(|e| vec![e])?;
    let c = &manifest.components;
    let schema: FeatureSchema = read_toml(&root, &c.schema).map_err(|e| vec![e])?;
    let paradigms: ParadigmFile = read_toml(&root, &c.paradigms).map_err(|e| vec![e])?;
    let lexicon: LexiconFile = read_toml(&root, &c.lexicon).map_err(|e| vec![e])?;
    let government: GovernmentFile = read_toml(&root, &c.government).map_err(|e| vec![e])?;
    let mut constructs: ConstructFile = read_toml(&root, &c.constructs).map_err(|e| vec![e])?;
    let hierarchy: FeatureHierarchy = read_toml(&root, &c.hierarchy).map_err(|e| vec![e])?;
    let mut grammar: GrammarRules = read_toml(&root, &c.grammar).map_err(|e| vec![e])?;
    let gold = match manifest.gold {
        Some(g) => {
            let g = GoldFiles {
                corpus: root.join(g.corpus),
                instances: root.join(g.instances),
            };
            for p in [&g.corpus, &g.instances] {
                if !p.is_file() {
                    return Err(vec![PackError::MissingFile(p.clone())]);
                }
            }
            Some(g)
        }
        None => None,
    };

    let mut v = Validator {
        schema: &schema,
        errors: Vec::new(),
    };
    v.paradigms(&c.paradigms, &paradigms.paradigm);
    v.lexicon(&c.lexicon, &paradigms.paradigm, &lexicon.lexeme);
    let lemmas: HashSet<&str> = lexicon.lexeme.iter().map(|l| l.lemma.as_str()).collect();
    v.lemma_classes(&c.constructs, &mut constructs.lemma_class);
    let classes: HashSet<String> = constructs
        .lemma_class
        .iter()
        .map(|l| l.id.clone())
        .collect();
    v.government(&c.government, &government.pattern, &lemmas, &classes);
    v.recipes(&c.constructs, &mut constructs.recipe);
    let recipes: HashSet<String> = constructs.recipe.iter().map(|r| r.id.clone()).collect();
    v.constructs(&c.constructs, &mut constructs.construct, &classes, &recipes);
    v.hierarchy(&c.hierarchy, &hierarchy);
    v.grammar(&c.grammar, &mut grammar, &classes);
    if !v.errors.is_empty() {
        return Err(v.errors);
    }

    let morphology = Morphology::build(paradigms.paradigm, lexicon.lexeme, grammar.folds.clone());
    Ok(LanguagePack {
        language: manifest.language,
        name: manifest.name,
        root,
        schema,
        morphology,
        government: government.pattern,
        lemma_classes: constructs.lemma_class,
        recipes: constructs.recipe,
        constructs: constructs.construct,
        hierarchy,
        grammar,
        gold,
    })
}

fn read_toml<T: DeserializeOwned>(root: &Path, file: &str) -> Result<T, PackError> {
    let path = root.join(file);
    let text = fs::read_to_string(&path).map_err(|_| PackError::MissingFile(path.clone()))?;
    toml::from_str(&text).map_err(|e| PackError::SchemaViolation {
        pointer: file.to_string(),
        message: e.message().to_string(),
    })
}

struct Validator<'a> {
    schema: &'a FeatureSchema,
    errors: Vec<PackError>,
}

impl Validator<'_> {
    fn violation(&mut self, pointer: String, message: impl Into<String>) {
        self.errors.push(PackError::SchemaViolation {
            pointer,
            message: message.into(),
        });
    }

    fn dangling(&mut self, pointer: String, reference: impl Into<String>) {
        self.errors.push(PackError::DanglingReference {
            pointer,
            reference: reference.into(),
        });
    }

    fn pos(&mut self, pointer: String, pos: &str) {
        if !self.schema.has_pos(pos) {
            self.dangling(pointer, pos);
        }
    }

    fn category(&mut self, pointer: String, category: &str) {
        if self.schema.category(category).is_none() {
            self.dangling(pointer, category);
        }
    }

    fn value(&mut self, pointer: String, category: &str, value: &str) {
        if self.schema.category(category).is_none() {
            self.dangling(pointer, category);
        } else if !self.schema.has_value(category, value) {
            self.dangling(pointer, format!("{category}={value}"));
        }
    }

    fn bundle(&mut self, pointer: String, bundle: &FeatureBundle) {
        for (c, val) in bundle.iter() {
            self.value(pointer.clone(), c, val);
        }
    }

    fn paradigms(&mut self, file: &str, paradigms: &[Paradigm]) {
        let mut ids = HashSet::new();
        for (i, p) in paradigms.iter().enumerate() {
            let at = format!("{file}#/paradigm/{i}");
            if !ids.insert(&p.id) {
                self.violation(at.clone(), format!("duplicate paradigm id `{}`", p.id));
            }
            self.pos(format!("{at}/pos"), &p.pos);
            if p.slots.is_empty() {
                self.violation(at.clone(), "paradigm has no slots");
            }
            for (j, s) in p.slots.iter().enumerate() {
                self.bundle(format!("{at}/slots/{j}/features"), &s.features);
                if p.slots[..j].iter().any(|o| o.features == s.features) {
                    self.violation(
                        format!("{at}/slots/{j}"),
                        format!("duplicate slot features `{}`", s.features),
                    );
                }
            }
        }
    }

    fn lexicon(&mut self, file: &str, paradigms: &[Paradigm], lexicon: &[Lexeme]) {
        let by_id: HashMap<&str, &Paradigm> =
            paradigms.iter().map(|p| (p.id.as_str(), p)).collect();
        let mut ranks = HashMap::new();
        for (i, lex) in lexicon.iter().enumerate() {
            let at = format!("{file}#/lexeme/{i}");
            self.pos(format!("{at}/pos"), &lex.pos);
            self.bundle(format!("{at}/inherent"), &lex.inherent);
            if lex.stems.is_empty() || lex.stems.iter().any(|s| s.is_empty()) {
                self.violation(format!("{at}/stems"), "stems must be non-empty");
            }
            if lex.rank == 0 {
                self.violation(format!("{at}/rank"), "rank must be positive");
            } else if let Some(prev) = ranks.insert(lex.rank, &lex.lemma) {
                self.violation(
                    format!("{at}/rank"),
                    format!("rank {} already used by `{prev}`", lex.rank),
                );
            }
            let Some(p) = by_id.get(lex.paradigm.as_str()) else {
                self.violation(
                    format!("{at}/paradigm"),
                    format!(
                        "lexeme `{}` names unknown paradigm `{}`",
                        lex.lemma, lex.paradigm
                    ),
                );
                continue;
            };
            if p.pos != lex.pos {
                self.violation(
                    format!("{at}/pos"),
                    format!("paradigm `{}` is for {}", p.id, p.pos),
                );
            }
            for (j, s) in p.slots.iter().enumerate() {
                match s.rule.apply(&lex.stems) {
                    Some(f) if !f.is_empty() => {}
                    _ => self.violation(
                        format!("{at}/stems"),
                        format!(
                            "slot {j} (`{}`) of paradigm `{}` cannot be realized for `{}`",
                            s.features, p.id, lex.lemma
                        ),
                    ),
                }
            }
        }
    }

    fn lemma_classes(&mut self, file: &str, classes: &mut [LemmaClass]) {
        for (i, c) in classes.iter_mut().enumerate() {
            if let Err(e) = c.compile() {
                self.violation(format!("{file}#/lemma_class/{i}/pattern"), e.to_string());
            }
            if c.lemmas.is_empty() && c.pattern.is_none() && c.link.is_none() {
                self.violation(
                    format!("{file}#/lemma_class/{i}"),
                    "class needs lemmas, a pattern or a link",
                );
            }
        }
    }

    fn government(
        &mut self,
        file: &str,
        patterns: &[GovernmentPattern],
        lemmas: &HashSet<&str>,
        classes: &HashSet<String>,
    ) {
        for (i, p) in patterns.iter().enumerate() {
            let at = format!("{file}#/pattern/{i}");
            self.pos(format!("{at}/pos"), &p.pos);
            match (&p.governor, &p.governor_class) {
                (Some(g), _) if !lemmas.contains(g.as_str()) => {
                    self.dangling(format!("{at}/governor"), g)
                }
                (None, Some(c)) if !classes.contains(c) => {
                    self.dangling(format!("{at}/governor_class"), c)
                }
                (None, None) => {
                    self.violation(at.clone(), "pattern needs a governor or governor_class")
                }
                _ => {}
            }
            if p.case.is_none() && p.preposition.is_none() && p.clause.is_none() {
                self.violation(
                    at.clone(),
                    "pattern needs a case, preposition or clause requirement",
                );
            }
            if let Some(case) = &p.case {
                self.value(format!("{at}/case"), "Case", case);
            }
            for (key, lemma) in [("preposition", &p.preposition), ("clause", &p.clause)] {
                if let Some(l) = lemma {
                    if !lemmas.contains(l.as_str()) {
                        self.dangling(format!("{at}/{key}"), l);
                    }
                }
            }
        }
    }

    fn recipes(&mut self, file: &str, recipes: &mut [DistractorRecipe]) {
        for (i, r) in recipes.iter_mut().enumerate() {
            let at = format!("{file}#/recipe/{i}");
            if r.count < 2 {
                self.violation(format!("{at}/count"), "count must be at least 2");
            }
            match &r.strategy {
                Strategy::FeatureVariation { category, values } => {
                    for v in values {
                        self.value(format!("{at}/values"), category, v);
                    }
                    if values.is_empty() {
                        self.violation(format!("{at}/values"), "value list is empty");
                    }
                }
                Strategy::LemmaPairSwap { fallback, .. } => {
                    for (cat, map) in fallback {
                        for (from, to) in map {
                            self.value(format!("{at}/fallback"), cat, from);
                            self.value(format!("{at}/fallback"), cat, to);
                        }
                    }
                }
                Strategy::OrthographyVariants { .. } => {}
            }
            if let Err(e) = r.compile() {
                self.violation(format!("{at}/rules"), e.to_string());
            }
        }
    }

    fn matcher(&mut self, at: &str, m: &mut TokenMatcher, classes: &HashSet<String>) {
        for p in &m.pos {
            self.pos(format!("{at}/pos"), p);
        }
        self.bundle(format!("{at}/features"), &m.features);
        self.bundle(format!("{at}/not_features"), &m.not_features);
        if let Some(c) = &m.lemma_class {
            if !classes.contains(c) {
                self.dangling(format!("{at}/lemma_class"), c);
            }
        }
        if let Err(e) = m.compile() {
            self.violation(format!("{at}/surface"), e.to_string());
        }
    }

    fn constructs(
        &mut self,
        file: &str,
        defs: &mut [ConstructDef],
        classes: &HashSet<String>,
        recipes: &HashSet<String>,
    ) {
        let mut ids = HashSet::new();
        for (i, def) in defs.iter_mut().enumerate() {
            let at = format!("{file}#/construct/{i}");
            if !ids.insert(def.id.clone()) {
                self.violation(
                    format!("{at}/id"),
                    format!("duplicate construct id `{}`", def.id),
                );
            }
            if def.pattern.is_empty() {
                self.violation(
                    format!("{at}/pattern"),
                    "pattern needs at least one matcher",
                );
            }
            let n = def.pattern.len();
            for (k, m) in def.pattern.iter_mut().enumerate() {
                let mat = format!("{at}/pattern/{k}");
                self.matcher(&mat, m, classes);
                if let Some(g) = m.governed_by {
                    if g >= k {
                        self.violation(
                            format!("{mat}/governed_by"),
                            "must point at an earlier matcher",
                        );
                    }
                }
            }
            for c in &def.hints.categories {
                self.category(format!("{at}/hints/categories"), c);
            }
            if let Some(r) = &def.recipe {
                if !recipes.contains(r) {
                    self.dangling(format!("{at}/recipe"), r);
                }
            }
            if let Some(p) = &def.paraphrase {
                if !p.text.contains("{}") {
                    self.violation(
                        format!("{at}/paraphrase/text"),
                        "text needs a `{}` placeholder",
                    );
                }
                for (j, part) in p.parts.iter().enumerate() {
                    if let ParaphrasePart::Slot {
                        slot,
                        features,
                        set,
                        copy,
                    } = part
                    {
                        let pat = format!("{at}/paraphrase/parts/{j}");
                        if *slot >= n {
                            self.violation(
                                format!("{pat}/slot"),
                                format!("no matcher at position {slot}"),
                            );
                        }
                        if let Some(f) = features {
                            self.bundle(format!("{pat}/features"), f);
                        }
                        self.bundle(format!("{pat}/set"), set);
                        for (cat, from) in copy {
                            self.category(format!("{pat}/copy"), cat);
                            if *from >= n {
                                self.violation(
                                    format!("{pat}/copy"),
                                    format!("no matcher at position {from}"),
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    fn hierarchy(&mut self, file: &str, h: &FeatureHierarchy) {
        for (pos, cats) in &h.order {
            self.pos(format!("{file}#/order/{pos}"), pos);
            for (k, c) in cats.iter().enumerate() {
                self.category(format!("{file}#/order/{pos}/{k}"), c);
                if cats[..k].contains(c) {
                    self.violation(
                        format!("{file}#/order/{pos}/{k}"),
                        format!("duplicate category `{c}`"),
                    );
                }
            }
        }
    }

    fn grammar(&mut self, file: &str, g: &mut GrammarRules, classes: &HashSet<String>) {
        let lists = [
            ("np_modifiers", &g.np_modifiers),
            ("np_heads", &g.np_heads),
            ("adpositions", &g.adpositions),
        ];
        for (key, list) in lists {
            for p in list {
                self.pos(format!("{file}#/{key}"), p);
            }
        }
        for (i, r) in g.agreement.iter().enumerate() {
            for p in r.dependents.iter().chain(&r.heads) {
                self.pos(format!("{file}#/agreement/{i}"), p);
            }
            for c in &r.categories {
                self.category(format!("{file}#/agreement/{i}/categories"), c);
            }
        }
        if let Some(s) = &g.subject {
            for p in s.verb_pos.iter().chain(&s.subject_pos) {
                self.pos(format!("{file}#/subject"), p);
            }
            self.value(format!("{file}#/subject/case"), "Case", &s.case);
            self.bundle(format!("{file}#/subject/finite"), &s.finite);
            for c in &s.categories {
                self.category(format!("{file}#/subject/categories"), c);
            }
        }
        for (i, a) in g.analytic.iter_mut().enumerate() {
            if a.sequence.is_empty() {
                self.violation(format!("{file}#/analytic/{i}"), "sequence is empty");
            }
            for (k, m) in a.sequence.iter_mut().enumerate() {
                self.matcher(&format!("{file}#/analytic/{i}/sequence/{k}"), m, classes);
            }
        }
    }
}
