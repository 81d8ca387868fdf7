use super::lexicon::lemmatize_sequence;
use super::TextError;
use crate::arxiv::PaperRecord;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A normalized title+abstract document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessedDoc {
    pub doc_index: usize,
    pub raw: String,
    /// Lowercase lemmas in text order. Stopwords are kept.
    pub tokens: Vec<String>,
    pub token_counts: BTreeMap<String, usize>,
}

impl PreprocessedDoc {
    /// Builds a document straight from tokens (no cleaning or lemmatization).
    pub fn from_tokens<I, S>(doc_index: usize, tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        let mut token_counts = BTreeMap::new();
        for t in &tokens {
            *token_counts.entry(t.clone()).or_insert(0) += 1;
        }
        PreprocessedDoc {
            doc_index,
            raw: tokens.join(" "),
            tokens,
            token_counts,
        }
    }

    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

fn is_url(word: &str) -> bool {
    let w = word.trim_start_matches(|c: char| !c.is_alphanumeric());
    w.starts_with("http://") || w.starts_with("https://") || w.starts_with("www.") || w.starts_with("doi.org/")
}

/// Lowercases and strips URLs, inline math (`$...$`), LaTeX control words
/// and non-alphanumeric runs, leaving space-separated words.
pub fn clean_text(text: &str) -> String {
    let lowered = text.to_lowercase();
    let without_urls: Vec<&str> = lowered.split_whitespace().filter(|w| !is_url(w)).collect();
    let joined = without_urls.join(" ");

    let mut out = String::with_capacity(joined.len());
    let mut chars = joined.chars().peekable();
    let mut in_math = false;
    let unmatched_math = joined.matches('$').count() % 2 == 1;
    while let Some(c) = chars.next() {
        if c == '$' && !unmatched_math {
            in_math = !in_math;
            out.push(' ');
            continue;
        }
        if in_math {
            continue;
        }
        if c == '\\' {
            // control word or control symbol
            if chars.peek().is_some_and(|n| n.is_alphabetic()) {
                while chars.peek().is_some_and(|n| n.is_alphabetic()) {
                    chars.next();
                }
            } else {
                chars.next();
            }
            out.push(' ');
            continue;
        }
        if c.is_alphanumeric() {
            out.push(c);
        } else {
            out.push(' ');
        }
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Concatenates `"title. abstract"`, cleans, tags and lemmatizes.
pub fn preprocess(title: &str, abstract_text: &str) -> Result<PreprocessedDoc, TextError> {
    let title = title.trim();
    let abstract_text = abstract_text.trim();
    let raw = match (title.is_empty(), abstract_text.is_empty()) {
        (true, true) => return Err(TextError::EmptyDocument),
        (false, true) => title.to_string(),
        (true, false) => abstract_text.to_string(),
        (false, false) => format!("{title}. {abstract_text}"),
    };
    let cleaned = clean_text(&raw);
    let words: Vec<&str> = cleaned.split(' ').filter(|w| !w.is_empty()).collect();
    let tokens = lemmatize_sequence(&words);
    let mut doc = PreprocessedDoc::from_tokens(0, tokens);
    doc.raw = raw;
    Ok(doc)
}

/// Preprocesses every paper; `doc_index` follows corpus order.
pub fn preprocess_papers(papers: &[PaperRecord]) -> Result<Vec<PreprocessedDoc>, TextError> {
    papers
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut doc = preprocess(&p.title, &p.abstract_text)?;
            doc.doc_index = i;
            Ok(doc)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn example_tokens() {
        let doc = preprocess("Graph Neural Networks", "We study GNNs.").unwrap();
        assert_eq!(doc.tokens, vec!["graph", "neural", "network", "we", "study", "gnns"]);
        assert_eq!(doc.raw, "Graph Neural Networks. We study GNNs.");
        assert_eq!(doc.token_counts.values().sum::<usize>(), doc.tokens.len());
    }

    #[test]
    fn both_empty_is_error() {
        assert!(matches!(preprocess("", "  "), Err(TextError::EmptyDocument)));
        assert!(preprocess("Only a title", "").is_ok());
    }

    #[test]
    fn lemmatized_text_is_fixpoint() {
        let doc = preprocess("graph neural network", "we study gnns and we propose a model").unwrap();
        let again = preprocess(&doc.text(), "").unwrap();
        assert_eq!(doc.tokens, again.tokens);
        let inflected = preprocess("Transformers Were Trained", "It was shown that we studied agents.").unwrap();
        let again = preprocess(&inflected.text(), "").unwrap();
        assert_eq!(inflected.tokens, again.tokens);
    }

    #[test]
    fn strips_urls_latex_and_punctuation() {
        let cleaned = clean_text("See https://github.com/x/y for $O(n^2)$ \\emph{fast} state-of-the-art code!");
        assert_eq!(cleaned, "see for fast state of the art code");
        assert_eq!(clean_text("cost is $5"), "cost is 5");
    }

    proptest! {
        #[test]
        fn tokens_lowercase_and_nonempty(title in "[A-Za-z ,.$\\\\-]{0,40}", abs in "[A-Za-z0-9 ()!?]{1,80}") {
            if let Ok(doc) = preprocess(&title, &abs) {
                for t in &doc.tokens {
                    prop_assert!(!t.is_empty());
                    prop_assert!(!t.chars().any(char::is_uppercase));
                }
                let has_word = doc.raw.chars().any(char::is_alphabetic);
                if has_word && clean_text(&doc.raw).chars().any(char::is_alphabetic) {
                    prop_assert!(!doc.tokens.is_empty());
                }
            }
        }
    }
}
