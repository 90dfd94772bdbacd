use std::collections::HashMap;

use serde::{Deserialize, Serialize};

/// Interned word identifier. Ids are assigned in first-seen order by the
/// corpus builder, so a given ingestion order always yields the same ids.
pub type WordId = u32;

/// Two-way string interner shared by a corpus and everything derived from it.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Vocab {
    words: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, WordId>,
}

impl Vocab {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, word: &str) -> WordId {
        if self.index.is_empty() && !self.words.is_empty() {
            self.rebuild_index();
        }
        if let Some(&id) = self.index.get(word) {
            return id;
        }
        let id = self.words.len() as WordId;
        self.words.push(word.to_string());
        self.index.insert(word.to_string(), id);
        id
    }

    pub fn get(&self, word: &str) -> Option<WordId> {
        if self.index.is_empty() && !self.words.is_empty() {
            // Deserialized vocab: fall back to a linear probe. Callers that
            // do bulk lookups should hold a mutable vocab and intern instead.
            return self
                .words
                .iter()
                .position(|w| w == word)
                .map(|i| i as WordId);
        }
        self.index.get(word).copied()
    }

    pub fn word(&self, id: WordId) -> &str {
        &self.words[id as usize]
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.get(word).is_some()
    }

    /// Restores the lookup index after deserialization.
    pub fn rebuild_index(&mut self) {
        self.index = self
            .words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as WordId))
            .collect();
    }

    pub fn iter(&self) -> impl Iterator<Item = (WordId, &str)> {
        self.words
            .iter()
            .enumerate()
            .map(|(i, w)| (i as WordId, w.as_str()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intern_is_stable() {
        let mut v = Vocab::new();
        let a = v.intern("alpha");
        let b = v.intern("beta");
        assert_eq!(v.intern("alpha"), a);
        assert_eq!(v.word(a), "alpha");
        assert_eq!(v.word(b), "beta");
        assert_eq!(v.len(), 2);
    }

    #[test]
    fn index_survives_rebuild() {
        let mut v = Vocab::new();
        v.intern("one");
        v.intern("two");
        let mut w = v.clone();
        w.rebuild_index();
        assert_eq!(w.get("two"), Some(1));
        assert_eq!(w.get("three"), None);
    }
}
