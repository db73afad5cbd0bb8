//! Finite languages over explicit alphabets.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Ordered set of distinct single-character symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Alphabet {
    symbols: Arc<[char]>,
}

impl Alphabet {
    pub fn new<I: IntoIterator<Item = char>>(symbols: I) -> Result<Self> {
        let mut v: Vec<char> = symbols.into_iter().collect();
        if v.is_empty() {
            return Err(Error::Alphabet("alphabet is empty".into()));
        }
        v.sort_unstable();
        let before = v.len();
        v.dedup();
        if v.len() != before {
            return Err(Error::Alphabet("repeated symbol".into()));
        }
        for &c in &v {
            if c.is_whitespace() || "{},()+*[]".contains(c) {
                return Err(Error::Alphabet(format!("`{c}` is reserved")));
            }
        }
        Ok(Alphabet { symbols: v.into() })
    }

    /// `{0,1}`.
    pub fn binary() -> Self {
        Alphabet { symbols: Arc::from(['0', '1']) }
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn contains(&self, c: char) -> bool {
        self.symbols.binary_search(&c).is_ok()
    }

    pub fn is_binary(&self) -> bool {
        *self.symbols == ['0', '1']
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, c) in self.symbols.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("}")
    }
}

/// Shortlex comparison: length first, then lexicographic.
pub fn canon_cmp(a: &str, b: &str) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

/// Stable identity of a language, its canonical text form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LangKey(String);

impl LangKey {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for LangKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A nonempty finite set of nonempty strings, kept in shortlex order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Language {
    alphabet: Alphabet,
    members: Vec<String>,
}

impl Language {
    pub fn new<I, S>(alphabet: Alphabet, members: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut v: Vec<String> = members.into_iter().map(Into::into).collect();
        if v.is_empty() {
            return Err(Error::Language("empty language".into()));
        }
        for s in &v {
            if s.is_empty() {
                return Err(Error::Language("empty string is not allowed".into()));
            }
            if let Some(c) = s.chars().find(|&c| !alphabet.contains(c)) {
                return Err(Error::Language(format!("symbol `{c}` not in alphabet {alphabet}")));
            }
        }
        v.sort_by(|a, b| canon_cmp(a, b));
        v.dedup();
        Ok(Language { alphabet, members: v })
    }

    /// Caller guarantees members are valid, sorted and distinct.
    pub(crate) fn from_sorted(alphabet: Alphabet, members: Vec<String>) -> Self {
        debug_assert!(!members.is_empty());
        debug_assert!(members.windows(2).all(|w| canon_cmp(&w[0], &w[1]) == Ordering::Less));
        Language { alphabet, members }
    }

    pub fn singleton(alphabet: Alphabet, s: &str) -> Result<Self> {
        Self::new(alphabet, [s])
    }

    /// Parses `{s1,s2,...}` over the given alphabet. Braces are optional.
    pub fn parse_with(text: &str, alphabet: &Alphabet) -> Result<Self> {
        Self::new(alphabet.clone(), split_members(text)?)
    }

    /// Parses `{s1,s2,...}` and infers the alphabet: `{0,1}` when every symbol
    /// is a binary digit, otherwise the set of symbols that occur.
    pub fn parse(text: &str) -> Result<Self> {
        let members = split_members(text)?;
        let used: BTreeSet<char> = members.iter().flat_map(|s| s.chars()).collect();
        let alphabet = if used.iter().all(|&c| c == '0' || c == '1') {
            Alphabet::binary()
        } else {
            Alphabet::new(used)?
        };
        Self::new(alphabet, members)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn members(&self) -> &[String] {
        &self.members
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.members.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    /// Always false; languages are nonempty by construction.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_singleton(&self) -> bool {
        self.members.len() == 1
    }

    pub fn contains(&self, s: &str) -> bool {
        self.members.binary_search_by(|m| canon_cmp(m, s)).is_ok()
    }

    pub fn is_subset(&self, other: &Language) -> bool {
        self.len() <= other.len() && self.iter().all(|s| other.contains(s))
    }

    pub fn max_len(&self) -> usize {
        self.members.last().map_or(0, String::len)
    }

    pub fn min_len(&self) -> usize {
        self.members[0].len()
    }

    /// Whether all members share one length.
    pub fn is_uniform(&self) -> bool {
        self.min_len() == self.max_len()
    }

    pub fn key(&self) -> LangKey {
        LangKey(self.to_string())
    }

    fn check_alphabet(&self, other: &Language) -> Result<()> {
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch(
                self.alphabet.to_string(),
                other.alphabet.to_string(),
            ));
        }
        Ok(())
    }

    /// `{ s·t : s ∈ self, t ∈ other }`.
    pub fn concat(&self, other: &Language) -> Result<Language> {
        self.check_alphabet(other)?;
        let mut v = Vec::with_capacity(self.len() * other.len());
        for s in self.iter() {
            for t in other.iter() {
                let mut st = String::with_capacity(s.len() + t.len());
                st.push_str(s);
                st.push_str(t);
                v.push(st);
            }
        }
        v.sort_by(|a, b| canon_cmp(a, b));
        v.dedup();
        Ok(Language::from_sorted(self.alphabet.clone(), v))
    }

    pub fn union(&self, other: &Language) -> Result<Language> {
        self.check_alphabet(other)?;
        let mut v = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.members, &other.members);
        while i < a.len() && j < b.len() {
            match canon_cmp(&a[i], &b[j]) {
                Ordering::Less => {
                    v.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    v.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    v.push(a[i].clone());
                    i += 1;
                    j += 1;
                }
            }
        }
        v.extend_from_slice(&a[i..]);
        v.extend_from_slice(&b[j..]);
        Ok(Language::from_sorted(self.alphabet.clone(), v))
    }

    /// Sub-language selected by a bitmask over member indices (bit i ↔ member i).
    pub fn subset_by_mask(&self, mask: u64) -> Option<Language> {
        let v: Vec<String> = self
            .members
            .iter()
            .enumerate()
            .filter(|(i, _)| *i < 64 && mask >> i & 1 == 1)
            .map(|(_, s)| s.clone())
            .collect();
        if v.is_empty() {
            None
        } else {
            Some(Language::from_sorted(self.alphabet.clone(), v))
        }
    }

    /// Sub-language from a sorted-by-index selection of members.
    pub fn select(&self, indices: &[usize]) -> Language {
        let v = indices.iter().map(|&i| self.members[i].clone()).collect();
        Language::from_sorted(self.alphabet.clone(), v)
    }

    /// Bitwise complement of every member. Binary alphabets only.
    pub fn flip(&self) -> Result<Language> {
        if !self.alphabet.is_binary() {
            return Err(Error::Alphabet("flip needs the binary alphabet".into()));
        }
        Language::new(self.alphabet.clone(), self.iter().map(flip_str))
    }
}

/// Swaps `0` and `1` in a binary string.
pub fn flip_str(s: &str) -> String {
    s.chars()
        .map(|c| match c {
            '0' => '1',
            '1' => '0',
            c => c,
        })
        .collect()
}

/// Number of `1` symbols.
pub fn weight(s: &str) -> usize {
    s.bytes().filter(|&b| b == b'1').count()
}

fn split_members(text: &str) -> Result<Vec<String>> {
    let t = text.trim();
    let inner = match (t.strip_prefix('{'), t.ends_with('}')) {
        (Some(rest), true) => &rest[..rest.len() - 1],
        (None, false) => t,
        _ => return Err(Error::Language(format!("unbalanced braces in `{text}`"))),
    };
    let members: Vec<String> = inner.split(',').map(|s| s.trim().to_string()).collect();
    if members.iter().any(String::is_empty) {
        return Err(Error::Language(format!("empty member in `{text}`")));
    }
    Ok(members)
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, s) in self.members.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(s)?;
        }
        f.write_str("}")
    }
}

impl PartialOrd for Language {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Member-wise shortlex comparison, then by alphabet.
impl Ord for Language {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.members.iter().zip(&other.members) {
            match canon_cmp(a, b) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        self.members
            .len()
            .cmp(&other.members.len())
            .then_with(|| self.alphabet.cmp(&other.alphabet))
    }
}

/// Generated language families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Σⁿ over `{0,1}`.
    Sigma,
    /// `B(n,k)`: length-n strings with exactly k ones.
    Binomial,
    /// `T(n,k)`: length-n strings with at least k ones.
    Threshold,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sigma" | "sigma_n" | "all" => Ok(Family::Sigma),
            "binomial" | "b" => Ok(Family::Binomial),
            "threshold" | "t" => Ok(Family::Threshold),
            _ => Err(Error::Language(format!("unknown family `{s}`"))),
        }
    }
}

pub fn gen_family(family: Family, n: usize, k: usize) -> Result<Language> {
    if n == 0 {
        return Err(Error::OutOfRange("n must be positive".into()));
    }
    match family {
        Family::Sigma => Ok(sigma_n(&Alphabet::binary(), n)),
        Family::Binomial => {
            if k > n {
                return Err(Error::OutOfRange(format!("k={k} exceeds n={n}")));
            }
            Ok(binomial(n, k))
        }
        Family::Threshold => {
            if k > n {
                return Err(Error::OutOfRange(format!("k={k} exceeds n={n}")));
            }
            Ok(threshold(n, k))
        }
    }
}

/// All strings of length n over the alphabet.
pub fn sigma_n(alphabet: &Alphabet, n: usize) -> Language {
    let mut v = vec![String::new()];
    for _ in 0..n {
        v = v
            .iter()
            .flat_map(|p| {
                alphabet.symbols().iter().map(move |&c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    Language::from_sorted(alphabet.clone(), v)
}

/// Binary strings of length n with exactly k ones, lexicographically sorted.
pub fn binomial_strings(n: usize, k: usize) -> Vec<String> {
    fn go(n: usize, k: usize, prefix: &mut String, out: &mut Vec<String>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let left = n - prefix.len();
        let ones = weight(prefix);
        if k - ones < left {
            prefix.push('0');
            go(n, k, prefix, out);
            prefix.pop();
        }
        if ones < k {
            prefix.push('1');
            go(n, k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        go(n, k, &mut String::with_capacity(n), &mut out);
    }
    out
}

/// `B(n,k)`. Panics if `k > n` or `n == 0`.
pub fn binomial(n: usize, k: usize) -> Language {
    assert!(n > 0 && k <= n);
    Language::from_sorted(Alphabet::binary(), binomial_strings(n, k))
}

/// `T(n,k)`. Panics if `k > n` or `n == 0`.
pub fn threshold(n: usize, k: usize) -> Language {
    assert!(n > 0 && k <= n);
    let mut v: Vec<String> = (k..=n).flat_map(|l| binomial_strings(n, l)).collect();
    v.sort();
    Language::from_sorted(Alphabet::binary(), v)
}
