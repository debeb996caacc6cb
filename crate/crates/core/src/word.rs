//! Finite alphabets and words over them.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Symbol index into an [`Alphabet`].
pub type Sym = u32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    labels: Vec<String>,
    index: HashMap<String, Sym>,
}

impl Alphabet {
    pub fn new<S: AsRef<str>>(labels: &[S]) -> Result<Arc<Self>> {
        if labels.is_empty() {
            return Err(Error::invalid("alphabet", "must contain at least one symbol"));
        }
        let mut index = HashMap::with_capacity(labels.len());
        let mut owned = Vec::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            let l = l.as_ref().to_string();
            if l.is_empty() {
                return Err(Error::invalid("alphabet", "empty symbol label"));
            }
            if index.insert(l.clone(), i as Sym).is_some() {
                return Err(Error::invalid("alphabet", format!("duplicate label {l:?}")));
            }
            owned.push(l);
        }
        Ok(Arc::new(Alphabet {
            labels: owned,
            index,
        }))
    }

    /// The binary alphabet `{"0", "1"}`.
    pub fn binary() -> Arc<Self> {
        Alphabet::new(&["0", "1"]).expect("static alphabet")
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, s: Sym) -> &str {
        &self.labels[s as usize]
    }

    pub fn index_of(&self, label: &str) -> Option<Sym> {
        self.index.get(label).copied()
    }

    /// Splits text into labels: comma/whitespace separated when a separator is
    /// present, otherwise one label per character.
    pub fn split_labels(text: &str) -> Vec<String> {
        let text = text.trim();
        if text.contains(|c: char| c == ',' || c.is_whitespace()) {
            text.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect()
        } else {
            text.chars().map(|c| c.to_string()).collect()
        }
    }

    pub fn parse_word(self: &Arc<Self>, text: &str) -> Result<Word> {
        let syms = Alphabet::split_labels(text)
            .iter()
            .map(|l| {
                self.index_of(l)
                    .ok_or_else(|| Error::AlphabetMismatch(format!("symbol {l:?} not in alphabet")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Word {
            alphabet: Arc::clone(self),
            syms,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Word {
    alphabet: Arc<Alphabet>,
    syms: Vec<Sym>,
}

impl PartialEq for Word {
    fn eq(&self, other: &Self) -> bool {
        self.syms == other.syms && *self.alphabet == *other.alphabet
    }
}

impl Word {
    pub fn new(alphabet: Arc<Alphabet>, syms: Vec<Sym>) -> Result<Self> {
        if let Some(&bad) = syms.iter().find(|&&s| s as usize >= alphabet.size()) {
            return Err(Error::AlphabetMismatch(format!(
                "symbol index {bad} outside alphabet of size {}",
                alphabet.size()
            )));
        }
        Ok(Word { alphabet, syms })
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn syms(&self) -> &[Sym] {
        &self.syms
    }

    pub fn len(&self) -> usize {
        self.syms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.syms.is_empty()
    }

    pub fn truncated(&self, n: usize) -> Word {
        Word {
            alphabet: Arc::clone(&self.alphabet),
            syms: self.syms[..n.min(self.syms.len())].to_vec(),
        }
    }

    pub fn same_alphabet(&self, other: &Word) -> Result<()> {
        same_alphabet(&self.alphabet, &other.alphabet)
    }
}

pub(crate) fn same_alphabet(a: &Alphabet, b: &Alphabet) -> Result<()> {
    if a != b {
        return Err(Error::AlphabetMismatch(format!(
            "{:?} vs {:?}",
            a.labels(),
            b.labels()
        )));
    }
    Ok(())
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let single = self.alphabet.labels().iter().all(|l| l.chars().count() == 1);
        let sep = if single { "" } else { "," };
        for (i, &s) in self.syms.iter().enumerate() {
            if i > 0 {
                f.write_str(sep)?;
            }
            f.write_str(self.alphabet.label(s))?;
        }
        Ok(())
    }
}
