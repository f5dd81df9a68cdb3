//! Heuristic entity detection for plain summary text.
//!
//! This stands in for a full parser/NER pipeline: sentences are split by a
//! rule-based splitter, and entity candidates are maximal capitalized token
//! runs plus lowercased non-stopword tokens recurring in at least two
//! sentences. All occurrences get role X since no parse is available.

use std::collections::{BTreeMap, BTreeSet};

use super::grid::{EntityGrid, Role};

/// Embedded English stopword list; versioned with the crate so detection is
/// reproducible.
pub const STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
    "aren't", "as", "at", "be", "because", "been", "before", "being", "below", "between", "both",
    "but", "by", "can", "can't", "cannot", "could", "couldn't", "did", "didn't", "do", "does",
    "doesn't", "doing", "don't", "down", "during", "each", "few", "for", "from", "further", "had",
    "hadn't", "has", "hasn't", "have", "haven't", "having", "he", "he'd", "he'll", "he's", "her",
    "here", "here's", "hers", "herself", "him", "himself", "his", "how", "how's", "i", "i'd",
    "i'll", "i'm", "i've", "if", "in", "into", "is", "isn't", "it", "it's", "its", "itself",
    "let's", "me", "more", "most", "mustn't", "my", "myself", "no", "nor", "not", "of", "off",
    "on", "once", "only", "or", "other", "ought", "our", "ours", "ourselves", "out", "over",
    "own", "same", "shan't", "she", "she'd", "she'll", "she's", "should", "shouldn't", "so",
    "some", "such", "than", "that", "that's", "the", "their", "theirs", "them", "themselves",
    "then", "there", "there's", "these", "they", "they'd", "they'll", "they're", "they've",
    "this", "those", "through", "to", "too", "under", "until", "up", "very", "was", "wasn't",
    "we", "we'd", "we'll", "we're", "we've", "were", "weren't", "what", "what's", "when",
    "when's", "where", "where's", "which", "while", "who", "who's", "whom", "why", "why's",
    "with", "won't", "would", "wouldn't", "you", "you'd", "you'll", "you're", "you've", "your",
    "yours", "yourself", "yourselves",
];

fn is_stopword(token: &str) -> bool {
    STOPWORDS.binary_search(&token).is_ok()
}

const ABBREVIATIONS: &[&str] = &[
    "a.m", "apr", "aug", "capt", "co", "col", "corp", "dec", "dr", "e.g", "etc", "feb", "fig",
    "gen", "gov", "i.e", "inc", "jan", "jr", "jul", "jun", "lt", "ltd", "maj", "mar", "messrs",
    "mr", "mrs", "ms", "mt", "no", "nov", "oct", "p.m", "prof", "rep", "rev", "sen", "sep",
    "sept", "sgt", "sr", "st", "u.k", "u.s", "vol", "vs",
];

/// Splits text into sentences at `.`, `?` or `!` followed by whitespace,
/// except after a known abbreviation.
pub fn split_sentences(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut sentences = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '.' || c == '?' || c == '!' {
            // absorb runs like "?!" or "..." and trailing closers
            let mut end = i + 1;
            while end < chars.len() && matches!(chars[end], '.' | '?' | '!' | '"' | '\'' | ')' | ']') {
                end += 1;
            }
            let at_boundary = end >= chars.len() || chars[end].is_whitespace();
            if at_boundary && !(c == '.' && preceded_by_abbreviation(&chars, i)) {
                let sentence: String = chars[start..end].iter().collect();
                let trimmed = sentence.trim();
                if !trimmed.is_empty() {
                    sentences.push(trimmed.to_owned());
                }
                start = end;
            }
            i = end;
        } else {
            i += 1;
        }
    }
    let tail: String = chars[start..].iter().collect();
    let tail = tail.trim();
    if !tail.is_empty() {
        sentences.push(tail.to_owned());
    }
    sentences
}

fn preceded_by_abbreviation(chars: &[char], period: usize) -> bool {
    let mut start = period;
    while start > 0 {
        let prev = chars[start - 1];
        if prev.is_alphabetic() || prev == '.' {
            start -= 1;
        } else {
            break;
        }
    }
    if start == period {
        return false;
    }
    let word: String = chars[start..period].iter().collect::<String>().to_lowercase();
    let word = word.trim_end_matches('.');
    ABBREVIATIONS.binary_search(&word).is_ok()
}

/// Splits a sentence into tokens: whitespace-separated words with outer
/// punctuation stripped.
pub fn tokenize(sentence: &str) -> Vec<String> {
    sentence
        .split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()))
        .filter(|w| !w.is_empty())
        .map(str::to_owned)
        .collect()
}

fn is_capitalized(token: &str) -> bool {
    token.chars().next().is_some_and(char::is_uppercase)
}

/// Builds an entity grid from tokenized sentences.
///
/// Candidates are (a) maximal runs of capitalized tokens, lowercased and
/// joined with spaces, unless the run consists only of stopwords, and
/// (b) lowercased non-stopword tokens occurring in at least two distinct
/// sentences. Every occurrence gets role X. The grid may be empty.
pub fn detect_entities(sentences: &[Vec<String>]) -> EntityGrid {
    assert!(!sentences.is_empty(), "at least one sentence required");
    let mut occurrences: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();

    for (idx, tokens) in sentences.iter().enumerate() {
        let mut run: Vec<&str> = Vec::new();
        for token in tokens.iter().map(String::as_str).chain(std::iter::once("")) {
            if is_capitalized(token) {
                run.push(token);
                continue;
            }
            if !run.is_empty() {
                let lowered: Vec<String> = run.iter().map(|t| t.to_lowercase()).collect();
                if !lowered.iter().all(|t| is_stopword(t)) {
                    occurrences.entry(lowered.join(" ")).or_default().insert(idx);
                }
                run.clear();
            }
        }
    }

    let mut token_sentences: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
    for (idx, tokens) in sentences.iter().enumerate() {
        for token in tokens {
            let lowered = token.to_lowercase();
            if !is_stopword(&lowered) {
                token_sentences.entry(lowered).or_default().insert(idx);
            }
        }
    }
    for (token, sents) in token_sentences {
        if sents.len() >= 2 {
            occurrences.entry(token).or_default().extend(sents);
        }
    }

    let n = sentences.len();
    let mut entities = Vec::with_capacity(occurrences.len());
    let mut roles = Vec::with_capacity(occurrences.len());
    for (label, sents) in occurrences {
        let mut row = vec![Role::Absent; n];
        for s in sents {
            row[s] = Role::Other;
        }
        entities.push(label);
        roles.push(row);
    }
    EntityGrid::new(entities, n, roles).expect("detector emits valid rows")
}

/// Convenience path: raw text through the splitter and tokenizer.
pub fn detect_entities_in_text(text: &str) -> Option<EntityGrid> {
    let sentences: Vec<Vec<String>> = split_sentences(text).iter().map(|s| tokenize(s)).collect();
    if sentences.is_empty() {
        return None;
    }
    Some(detect_entities(&sentences))
}
