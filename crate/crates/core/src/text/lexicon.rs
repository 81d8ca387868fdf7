//! Bundled English lexicon: stopwords, irregular forms and the suffix rules
//! behind the rule-based lemmatizer.
//!
//! Tagging is deliberately coarse. A token is treated as a verb when the
//! preceding token is a subject pronoun, auxiliary, modal or `to`; every
//! other token is treated as a noun/adjective. Nouns only get plural
//! folding; verbs additionally get `-ed`/`-ing` folding and irregular forms.
//! The trigger set is closed under lemmatization (`is` -> `be`, `has` ->
//! `have`, ...) so running the lemmatizer on its own output is a no-op.

use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

const STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "ain", "all", "also", "am", "an", "and", "any", "are",
    "aren", "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but", "by",
    "can", "could", "couldn", "d", "did", "didn", "do", "does", "doesn", "doing", "don", "down", "during",
    "each", "etc", "few", "for", "from", "further", "had", "hadn", "has", "hasn", "have", "haven", "having",
    "he", "her", "here", "hers", "herself", "him", "himself", "his", "how", "however", "i", "if", "in",
    "into", "is", "isn", "it", "its", "itself", "just", "ll", "m", "may", "me", "might", "more", "most",
    "must", "mustn", "my", "myself", "needn", "no", "nor", "not", "now", "o", "of", "off", "often", "on",
    "once", "one", "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own", "re", "s",
    "same", "shall", "shan", "she", "should", "shouldn", "so", "some", "such", "t", "than", "that", "the",
    "their", "theirs", "them", "themselves", "then", "there", "these", "they", "this", "those", "through",
    "thus", "to", "too", "under", "until", "up", "upon", "us", "ve", "very", "via", "was", "wasn", "we",
    "were", "weren", "what", "when", "where", "whereas", "which", "while", "who", "whom", "whose", "why",
    "will", "with", "within", "without", "won", "would", "wouldn", "y", "yet", "you", "your", "yours",
    "yourself", "yourselves",
];

/// Preceding tokens that mark the next token as a verb.
const VERB_TRIGGERS: &[&str] = &[
    "we", "they", "i", "you", "he", "she", "it", "who", "be", "is", "are", "was", "were", "been", "being",
    "am", "to", "have", "has", "had", "having", "can", "could", "will", "would", "may", "might", "shall",
    "should", "must", "not", "also", "further", "first", "then", "finally", "do", "does", "did", "doing",
];

/// Forms folded regardless of tag.
const IRREGULAR_ANY: &[(&str, &str)] = &[
    ("is", "be"), ("are", "be"), ("was", "be"), ("were", "be"), ("been", "be"), ("being", "be"), ("am", "be"),
    ("has", "have"), ("had", "have"), ("having", "have"), ("does", "do"), ("did", "do"), ("doing", "do"),
    ("children", "child"), ("people", "person"), ("men", "man"), ("women", "woman"), ("mice", "mouse"),
    ("feet", "foot"), ("teeth", "tooth"), ("indices", "index"), ("matrices", "matrix"), ("vertices", "vertex"),
    ("analyses", "analysis"), ("hypotheses", "hypothesis"), ("theses", "thesis"), ("axes", "axis"),
    ("bases", "basis"), ("criteria", "criterion"), ("phenomena", "phenomenon"), ("appendices", "appendix"),
    ("lemmata", "lemma"), ("formulae", "formula"), ("spectra", "spectrum"), ("quanta", "quantum"),
    ("crises", "crisis"), ("diagnoses", "diagnosis"), ("syntheses", "synthesis"), ("leaves", "leaf"),
    ("halves", "half"), ("lives", "life"), ("selves", "self"), ("shelves", "shelf"), ("wolves", "wolf"),
];

/// Past and participle forms folded only under the verb tag.
const IRREGULAR_VERB: &[(&str, &str)] = &[
    ("shown", "show"), ("made", "make"), ("found", "find"), ("built", "build"), ("taken", "take"),
    ("took", "take"), ("given", "give"), ("gave", "give"), ("written", "write"), ("wrote", "write"),
    ("led", "lead"), ("ran", "run"), ("began", "begin"), ("begun", "begin"), ("known", "know"),
    ("knew", "know"), ("seen", "see"), ("saw", "see"), ("done", "do"), ("got", "get"), ("gotten", "get"),
    ("chosen", "choose"), ("chose", "choose"), ("drawn", "draw"), ("drew", "draw"), ("grown", "grow"),
    ("grew", "grow"), ("held", "hold"), ("brought", "bring"), ("thought", "think"), ("sought", "seek"),
    ("taught", "teach"), ("became", "become"), ("came", "come"), ("went", "go"), ("gone", "go"),
    ("said", "say"), ("says", "say"), ("kept", "keep"), ("met", "meet"), ("paid", "pay"), ("sent", "send"),
    ("spent", "spend"), ("stood", "stand"), ("understood", "understand"), ("won", "win"), ("lost", "lose"),
    ("felt", "feel"), ("meant", "mean"), ("fell", "fall"), ("fallen", "fall"), ("rose", "rise"),
    ("risen", "rise"), ("controlled", "control"), ("controlling", "control"), ("labelled", "label"),
    ("labelling", "label"), ("modelled", "model"), ("modelling", "model"), ("travelled", "travel"),
    ("signalled", "signal"), ("cancelled", "cancel"), ("compelled", "compel"), ("excelled", "excel"),
    ("propelled", "propel"), ("dispelled", "dispel"),
];

/// Words left untouched by the suffix rules.
const INVARIANT: &[&str] = &[
    "data", "bias", "gas", "lens", "news", "series", "species", "alias", "atlas", "canvas", "chaos", "ethos",
    "pathos", "cosmos", "kudos", "always", "perhaps", "sometimes", "besides", "whereas", "various",
    "previous", "numerous", "analysis", "basis", "thesis", "axis", "crisis", "diagnosis", "synthesis",
    "hypothesis", "plus", "thus", "bus", "corpus", "focus", "consensus", "status", "virus", "radius",
    "nucleus", "stimulus", "calculus", "campus", "census", "bonus", "genus", "apparatus", "lotus",
    "yes", "its", "his", "this", "has", "was", "does", "less", "unless", "across", "process", "progress",
    "success", "access", "address", "class", "loss", "mass", "glass", "stress", "express", "business",
    "gauss", "chess", "boss", "dress", "press", "cross", "moss", "need", "feed", "seed", "speed", "breed",
    "bleed", "proceed", "succeed", "exceed", "indeed", "embed", "shed", "red", "bed", "wed", "bring",
    "thing", "string", "spring", "king", "ring", "sing", "wing", "swing", "sting", "during", "nothing",
    "something", "anything", "everything", "morning", "evening", "ceiling", "sibling", "duckling", "wedding",
    "pudding", "bedding", "padding", "embedding", "building", "setting", "meeting", "learning", "training",
    "understanding", "reasoning", "planning", "modeling", "clustering", "computing", "engineering",
    "processing", "programming", "mining", "forecasting", "scheduling", "testing", "sampling", "pricing",
    "hedging", "trading", "imaging", "encoding", "decoding", "pooling", "ranking", "retrieving", "rendering",
    "tracking", "filtering", "smoothing", "labeling", "fine", "tuning", "matching", "boosting", "bagging",
    "gating", "hashing", "pruning", "parsing", "routing", "grounding", "prompting", "thinking", "offspring",
];

/// Verb bases ending in `e`, used to restore the `e` dropped by `-ed`/`-ing`.
const E_BASES: &[&str] = &[
    "use", "propose", "base", "introduce", "compare", "provide", "achieve", "improve", "require", "combine",
    "leverage", "produce", "generate", "evaluate", "estimate", "demonstrate", "motivate", "integrate",
    "analyze", "analyse", "optimize", "optimise", "utilize", "derive", "define", "describe", "enable",
    "capture", "measure", "observe", "explore", "examine", "involve", "increase", "decrease", "reduce",
    "emerge", "assume", "believe", "continue", "create", "encode", "decode", "compute", "update", "resolve",
    "solve", "make", "take", "give", "write", "scale", "refine", "handle", "simulate", "approximate",
    "investigate", "incorporate", "illustrate", "calibrate", "aggregate", "validate", "facilitate",
    "associate", "indicate", "locate", "operate", "formulate", "arrive", "release", "store", "share",
    "guide", "serve", "achieve", "argue", "cause", "change", "charge", "choose", "close", "complete",
    "compose", "configure", "consume", "contribute", "converge", "curate", "decline", "determine",
    "diagnose", "emphasize", "ensure", "establish", "evolve", "exhibit", "explore", "expose", "extrapolate",
    "fine-tune", "hope", "identify", "imagine", "infuse", "inspire", "interpolate", "issue", "leave",
    "like", "live", "machine", "manage", "merge", "minimize", "maximize", "move", "name", "note",
    "organize", "outline", "outperform", "parse", "participate", "perceive", "place", "practice",
    "prepare", "preserve", "prove", "pursue", "quantize", "raise", "rate", "realize", "recognize",
    "regularize", "remove", "replace", "resize", "retrieve", "reuse", "rule", "save", "secure",
    "shape", "size", "sample", "source", "specialize", "state", "structure", "summarize", "supervise",
    "synthesize", "tackle", "tune", "type", "unify", "vote", "visualize", "cluster", "rescale",
    "categorize", "characterize", "generalize", "normalize", "prioritize", "standardize", "tokenize",
    "vectorize", "emulate", "accumulate", "correlate", "translate", "automate", "elaborate", "navigate",
    "mitigate", "propagate", "regulate", "stimulate", "differentiate", "accelerate", "enhance", "advance",
    "balance", "influence", "experience", "reference", "sequence", "score", "explore", "challenge",
    "alleviate", "produce", "induce", "deduce", "attribute", "distribute", "execute", "institute",
    "substitute", "compute", "route", "decide", "divide", "include", "exclude", "conclude", "collide",
    "provide", "override", "guide", "encode", "cope", "scope", "describe", "prescribe", "subscribe",
    "declare", "prepare", "compare", "share", "pause", "refuse", "excuse", "fuse", "diffuse", "infuse",
    "raise", "praise", "dispose", "impose", "oppose", "suppose", "expose", "decompose", "compose",
];

struct Lexicon {
    stopwords: HashSet<&'static str>,
    triggers: HashSet<&'static str>,
    irregular_any: HashMap<&'static str, &'static str>,
    irregular_verb: HashMap<&'static str, &'static str>,
    invariant: HashSet<&'static str>,
    e_bases: HashSet<&'static str>,
}

fn lexicon() -> &'static Lexicon {
    static LEX: OnceLock<Lexicon> = OnceLock::new();
    LEX.get_or_init(|| Lexicon {
        stopwords: STOPWORDS.iter().copied().collect(),
        triggers: VERB_TRIGGERS.iter().copied().collect(),
        irregular_any: IRREGULAR_ANY.iter().copied().collect(),
        irregular_verb: IRREGULAR_VERB.iter().copied().collect(),
        invariant: INVARIANT.iter().copied().collect(),
        e_bases: E_BASES.iter().copied().collect(),
    })
}

pub fn is_stopword(token: &str) -> bool {
    lexicon().stopwords.contains(token)
}

fn has_vowel(s: &str) -> bool {
    s.chars().any(|c| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y'))
}

fn is_consonant(c: char) -> bool {
    c.is_ascii_alphabetic() && !matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

/// Plural (and third-person `-s`) folding.
fn fold_plural(word: &str) -> String {
    let n = word.len();
    if n <= 3
        || !word.is_ascii()
        || word.ends_with("ss")
        || word.ends_with("us")
        || word.ends_with("is")
        || word.ends_with("ics")
        || !word.ends_with('s')
    {
        return word.to_string();
    }
    if word.ends_with("ies") && n > 4 {
        return format!("{}y", &word[..n - 3]);
    }
    for suffix in ["sses", "xes", "ches", "shes", "zes"] {
        if word.ends_with(suffix) {
            return word[..n - 2].to_string();
        }
    }
    let stem = &word[..n - 1];
    if has_vowel(stem) && !stem.ends_with('\'') {
        stem.to_string()
    } else {
        word.to_string()
    }
}

/// Restores a verb base from a stem left after removing `-ed` or `-ing`.
fn restore_base(stem: &str) -> Option<String> {
    let lex = lexicon();
    let with_e = format!("{stem}e");
    if lex.e_bases.contains(with_e.as_str()) {
        return Some(with_e);
    }
    if stem.len() < 3 || !has_vowel(stem) {
        return None;
    }
    let chars: Vec<char> = stem.chars().collect();
    let k = chars.len();
    if k >= 4 && chars[k - 1] == chars[k - 2] && is_consonant(chars[k - 1]) && !matches!(chars[k - 1], 'l' | 's' | 'f' | 'z')
    {
        return Some(chars[..k - 1].iter().collect());
    }
    Some(stem.to_string())
}

fn fold_verb(word: &str) -> String {
    let lex = lexicon();
    if let Some(base) = lex.irregular_verb.get(word) {
        return base.to_string();
    }
    if lex.invariant.contains(word) || !word.is_ascii() {
        return word.to_string();
    }
    let n = word.len();
    if word.ends_with("ied") && n > 4 {
        return format!("{}y", &word[..n - 3]);
    }
    if word.ends_with("eed") {
        return word.to_string();
    }
    if let Some(stem) = word.strip_suffix("ed") {
        if let Some(base) = restore_base(stem) {
            return base;
        }
        return word.to_string();
    }
    if let Some(stem) = word.strip_suffix("ing") {
        if let Some(base) = restore_base(stem) {
            return base;
        }
        return word.to_string();
    }
    fold_plural(word)
}

fn lemma(word: &str, previous: Option<&str>) -> String {
    let lex = lexicon();
    if let Some(base) = lex.irregular_any.get(word) {
        return base.to_string();
    }
    let verb = previous.is_some_and(|p| lex.triggers.contains(p));
    if verb {
        return fold_verb(word);
    }
    if lex.invariant.contains(word) {
        return word.to_string();
    }
    fold_plural(word)
}

/// Lemmatizes a lowercase token sequence, tagging each token from its
/// predecessor in the input.
pub fn lemmatize_sequence(tokens: &[&str]) -> Vec<String> {
    let mut out = Vec::with_capacity(tokens.len());
    let mut previous: Option<&str> = None;
    for &tok in tokens {
        out.push(lemma(tok, previous));
        previous = Some(tok);
    }
    out
}
