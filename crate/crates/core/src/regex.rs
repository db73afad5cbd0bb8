//! Regular expressions without star, ε or ∅.
//!
//! Text syntax: symbols, juxtaposition for concatenation and `(a+b+…)` for
//! union. Concatenation binds tighter than `+`. An n-ary `+` is folded to the
//! right and concatenation chains to the left.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::lang::{canon_cmp, Alphabet, Language};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Regex {
    Symbol(char),
    Union(Box<Regex>, Box<Regex>),
    Concat(Box<Regex>, Box<Regex>),
}

/// A maximal symbol-only subexpression and how often it occurs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub string: String,
    pub multiplicity: usize,
}

impl Regex {
    pub fn sym(c: char) -> Regex {
        Regex::Symbol(c)
    }

    pub fn union(a: Regex, b: Regex) -> Regex {
        Regex::Union(Box::new(a), Box::new(b))
    }

    pub fn concat(a: Regex, b: Regex) -> Regex {
        Regex::Concat(Box::new(a), Box::new(b))
    }

    /// Right-folded union of the items. Panics on an empty list.
    pub fn union_all(items: Vec<Regex>) -> Regex {
        let mut it = items.into_iter().rev();
        let last = it.next().expect("union of nothing");
        it.fold(last, |acc, r| Regex::union(r, acc))
    }

    /// Left-folded concatenation of the items. Panics on an empty list.
    pub fn concat_all(items: Vec<Regex>) -> Regex {
        let mut it = items.into_iter();
        let first = it.next().expect("concatenation of nothing");
        it.fold(first, Regex::concat)
    }

    /// The term spelling `s`. Panics on an empty string.
    pub fn word(s: &str) -> Regex {
        Regex::concat_all(s.chars().map(Regex::Symbol).collect())
    }

    /// `rᵐ` as a left-folded chain. Panics if `m == 0`.
    pub fn power(&self, m: usize) -> Regex {
        Regex::concat_all(vec![self.clone(); m])
    }

    /// Number of symbol occurrences.
    pub fn length(&self) -> usize {
        match self {
            Regex::Symbol(_) => 1,
            Regex::Union(a, b) | Regex::Concat(a, b) => a.length() + b.length(),
        }
    }

    pub fn is_symbol_only(&self) -> bool {
        match self {
            Regex::Symbol(_) => true,
            Regex::Union(..) => false,
            Regex::Concat(a, b) => a.is_symbol_only() && b.is_symbol_only(),
        }
    }

    /// The string spelled by a symbol-only expression.
    pub fn spelled(&self) -> Option<String> {
        if !self.is_symbol_only() {
            return None;
        }
        let mut s = String::new();
        self.collect_symbols(&mut s);
        Some(s)
    }

    fn collect_symbols(&self, out: &mut String) {
        match self {
            Regex::Symbol(c) => out.push(*c),
            Regex::Union(a, b) | Regex::Concat(a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
        }
    }

    /// Operands of a maximal concatenation chain, in order, regardless of
    /// how the chain is nested. A non-concatenation is a chain of one.
    pub fn concat_factors(&self) -> Vec<&Regex> {
        fn go<'a>(r: &'a Regex, out: &mut Vec<&'a Regex>) {
            match r {
                Regex::Concat(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                other => out.push(other),
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    /// Same expression with every concatenation chain folded to the left.
    pub fn normalize(&self) -> Regex {
        match self {
            Regex::Symbol(c) => Regex::Symbol(*c),
            Regex::Union(a, b) => Regex::union(a.normalize(), b.normalize()),
            Regex::Concat(..) => {
                Regex::concat_all(self.concat_factors().into_iter().map(Regex::normalize).collect())
            }
        }
    }

    pub fn symbols(&self) -> Vec<char> {
        let mut s = String::new();
        self.collect_symbols(&mut s);
        let mut v: Vec<char> = s.chars().collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Denoted language over the given alphabet.
    pub fn language_in(&self, alphabet: &Alphabet) -> Result<Language> {
        match self {
            Regex::Symbol(c) => Language::new(alphabet.clone(), [c.to_string()]),
            Regex::Union(a, b) => a.language_in(alphabet)?.union(&b.language_in(alphabet)?),
            Regex::Concat(..) => {
                let factors = self.concat_factors();
                let mut acc = factors[0].language_in(alphabet)?;
                for f in &factors[1..] {
                    acc = acc.concat(&f.language_in(alphabet)?)?;
                }
                Ok(acc)
            }
        }
    }

    /// Denoted language; the alphabet is `{0,1}` when the expression only
    /// uses binary digits and otherwise the set of symbols it uses.
    pub fn language(&self) -> Language {
        self.language_in(&self.default_alphabet())
            .expect("symbols are in the inferred alphabet")
    }

    pub fn default_alphabet(&self) -> Alphabet {
        let syms = self.symbols();
        if syms.iter().all(|&c| c == '0' || c == '1') {
            Alphabet::binary()
        } else {
            Alphabet::new(syms).expect("symbols are distinct")
        }
    }

    /// Terms with multiplicities, in shortlex order of the term strings.
    pub fn terms(&self) -> Vec<Term> {
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        self.visit_terms(&mut |t| *counts.entry(t).or_default() += 1);
        let mut v: Vec<Term> = counts
            .into_iter()
            .map(|(string, multiplicity)| Term { string, multiplicity })
            .collect();
        v.sort_by(|a, b| canon_cmp(&a.string, &b.string));
        v
    }

    fn visit_terms(&self, f: &mut dyn FnMut(String)) {
        match self {
            Regex::Union(a, b) => {
                a.visit_terms(f);
                b.visit_terms(f);
            }
            _ => {
                let mut run = String::new();
                for factor in self.concat_factors() {
                    match factor {
                        Regex::Symbol(c) => run.push(*c),
                        u => {
                            if !run.is_empty() {
                                f(std::mem::take(&mut run));
                            }
                            u.visit_terms(f);
                        }
                    }
                }
                if !run.is_empty() {
                    f(run);
                }
            }
        }
    }

    /// Swaps `0` and `1` at every leaf.
    pub fn flip(&self) -> Result<Regex> {
        match self {
            Regex::Symbol('0') => Ok(Regex::Symbol('1')),
            Regex::Symbol('1') => Ok(Regex::Symbol('0')),
            Regex::Symbol(c) => Err(Error::Alphabet(format!("flip needs binary symbols, found `{c}`"))),
            Regex::Union(a, b) => Ok(Regex::union(a.flip()?, b.flip()?)),
            Regex::Concat(a, b) => Ok(Regex::concat(a.flip()?, b.flip()?)),
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        self.render_into(&mut s);
        s
    }

    fn render_into(&self, out: &mut String) {
        match self {
            Regex::Symbol(c) => out.push(*c),
            Regex::Concat(a, b) => {
                a.render_into(out);
                b.render_into(out);
            }
            Regex::Union(a, b) => {
                out.push('(');
                a.render_into(out);
                let mut rest: &Regex = b;
                loop {
                    out.push('+');
                    match rest {
                        Regex::Union(x, y) => {
                            x.render_into(out);
                            rest = y;
                        }
                        other => {
                            other.render_into(out);
                            break;
                        }
                    }
                }
                out.push(')');
            }
        }
    }

    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Regex> {
        let mut p = Parser { chars: text.char_indices().filter(|(_, c)| !c.is_whitespace()).collect(), pos: 0, alphabet };
        if p.chars.is_empty() {
            return Err(Error::Syntax { pos: 0, msg: "empty expression".into() });
        }
        let r = p.expr()?;
        if let Some(&(at, c)) = p.chars.get(p.pos) {
            let msg = if c == ')' { "unbalanced `)`".to_string() } else { format!("unexpected `{c}`") };
            return Err(Error::Syntax { pos: at, msg });
        }
        Ok(r)
    }

    /// Parses over `{0,1}` if the text only uses binary digits, otherwise
    /// over the symbols that occur in it.
    pub fn parse_infer(text: &str) -> Result<Regex> {
        let mut syms: Vec<char> = text.chars().filter(|c| !c.is_whitespace() && !"()+".contains(*c)).collect();
        syms.sort_unstable();
        syms.dedup();
        let alphabet = if syms.iter().all(|&c| c == '0' || c == '1') {
            Alphabet::binary()
        } else {
            Alphabet::new(syms.iter().copied().filter(|&c| !is_forbidden(c)))
                .unwrap_or_else(|_| Alphabet::binary())
        };
        Regex::parse(text, &alphabet)
    }
}

fn is_forbidden(c: char) -> bool {
    matches!(c, '*' | 'ε' | '∅')
}

impl fmt::Display for Regex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

struct Parser<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    alphabet: &'a Alphabet,
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn offset(&self) -> usize {
        self.chars.get(self.pos).map_or_else(|| self.chars.last().map_or(0, |&(i, c)| i + c.len_utf8()), |&(i, _)| i)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { pos: self.offset(), msg: msg.into() })
    }

    fn expr(&mut self) -> Result<Regex> {
        let mut items = vec![self.chain()?];
        while self.peek() == Some('+') {
            self.pos += 1;
            items.push(self.chain()?);
        }
        Ok(Regex::union_all(items))
    }

    fn chain(&mut self) -> Result<Regex> {
        let mut factors = Vec::new();
        while let Some(c) = self.peek() {
            match c {
                '+' | ')' => break,
                '(' => {
                    self.pos += 1;
                    let inner = self.expr()?;
                    if self.peek() != Some(')') {
                        return self.err("unbalanced `(`");
                    }
                    self.pos += 1;
                    factors.push(inner);
                }
                c if is_forbidden(c) => return self.err(format!("`{c}` is not part of the grammar")),
                c if self.alphabet.contains(c) => {
                    self.pos += 1;
                    factors.push(Regex::Symbol(c));
                }
                c => return self.err(format!("symbol `{c}` is not in alphabet {}", self.alphabet)),
            }
        }
        if factors.is_empty() {
            return self.err("empty operand");
        }
        Ok(Regex::concat_all(factors))
    }
}

fn zeros(m: usize) -> Regex {
    Regex::Symbol('0').power(m)
}

/// `(0+1)ᵐ`.
pub fn sigma_power(m: usize) -> Regex {
    Regex::union(Regex::Symbol('0'), Regex::Symbol('1')).power(m)
}

/// Divide-and-conquer expression for B(n,1).
///
/// Its length is `n⌈log₂ n⌉ + 2n − 2^⌈log₂ n⌉`, which equals `⌈n log₂ 2n⌉`
/// for `n ≤ 18` and at powers of two and exceeds it by a few symbols elsewhere.
pub fn build_ellul_b_n1(n: usize) -> Regex {
    assert!(n >= 1);
    if n == 1 {
        return Regex::Symbol('1');
    }
    let (lo, hi) = (n / 2, n - n / 2);
    Regex::union(
        Regex::concat(zeros(lo), build_ellul_b_n1(hi)),
        Regex::concat(build_ellul_b_n1(lo), zeros(hi)),
    )
}

/// Divide-and-conquer expression for T(n,1).
pub fn build_ellul_t_n1(n: usize) -> Regex {
    assert!(n >= 1);
    if n == 1 {
        return Regex::Symbol('1');
    }
    let (lo, hi) = (n / 2, n - n / 2);
    Regex::union(
        Regex::concat(sigma_power(lo), build_ellul_t_n1(hi)),
        Regex::concat(build_ellul_t_n1(lo), sigma_power(hi)),
    )
}

/// Divide-and-conquer expression `R_{n,k}` for B(n,k).
pub fn build_ellul_bnk(n: usize, k: usize) -> Regex {
    assert!(n >= 1 && k <= n);
    if k == 0 {
        return zeros(n);
    }
    if 2 * k > n {
        return build_ellul_bnk(n, n - k).flip().expect("binary");
    }
    let (lo, hi) = (n / 2, n - n / 2);
    let items = (0..=k)
        .filter(|&i| i <= lo && k - i <= hi)
        .map(|i| Regex::concat(build_ellul_bnk(lo, i), build_ellul_bnk(hi, k - i)))
        .collect();
    Regex::union_all(items)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combin::b1_length;
    use crate::lang::{binomial, sigma_n, threshold};

    fn p(s: &str) -> Regex {
        Regex::parse(s, &Alphabet::binary()).unwrap()
    }

    #[test]
    fn parse_examples() {
        let r = p("(00+01+10)1");
        assert_eq!(r.language(), Language::parse("{001,011,101}").unwrap());
        assert_eq!(r.render(), "(00+01+10)1");
        assert_eq!(p("((00+01)+10)1").language(), r.language());
        assert_eq!(p("((00+01)+10)1").render(), "((00+01)+10)1");
        assert_eq!(p("0"), Regex::Symbol('0'));
        let r = p("(0+00)0");
        assert_eq!(r, Regex::concat(Regex::union(Regex::sym('0'), Regex::word("00")), Regex::sym('0')));
        assert_eq!(r.length(), 4);
        assert_eq!(p("0+1"), p("(0+1)"));
        assert_eq!(p("((0))"), p("0"));
    }

    #[test]
    fn parse_errors() {
        let b = Alphabet::binary();
        for bad in ["", "(0+1", "0+1)", "(+1)", "0+", "()", "0*", "2", "ε", "(0+)1"] {
            assert!(Regex::parse(bad, &b).is_err(), "{bad:?} should fail");
        }
    }

    #[test]
    fn render_examples() {
        assert_eq!(Regex::sym('1').render(), "1");
        assert_eq!(build_ellul_b_n1(2).render(), "(01+10)");
        assert_eq!(sigma_power(2).render(), "(0+1)(0+1)");
    }

    #[test]
    fn terms_examples() {
        let t = p("(00+11)1").terms();
        let got: Vec<(&str, usize)> = t.iter().map(|t| (t.string.as_str(), t.multiplicity)).collect();
        assert_eq!(got, vec![("1", 1), ("00", 1), ("11", 1)]);
        assert_eq!(p("000").terms(), vec![Term { string: "000".into(), multiplicity: 1 }]);
        let t = p("(0+1)(0+1)").terms();
        assert_eq!(t.iter().map(|t| t.multiplicity).collect::<Vec<_>>(), vec![2, 2]);
        assert_eq!(t.iter().map(|t| t.string.len() * t.multiplicity).sum::<usize>(), 4);
        // a term may be broken by a union inside the chain
        let t = p("0(0+1)00").terms();
        assert_eq!(t.iter().map(|t| t.string.as_str()).collect::<Vec<_>>(), vec!["0", "1", "00"]);
        assert_eq!(t[0].multiplicity, 2);
    }

    #[test]
    fn flip_examples() {
        assert_eq!(p("01").flip().unwrap(), p("10"));
        assert_eq!(zeros(4).flip().unwrap().render(), "1111");
        assert_eq!(p("(01+10)").flip().unwrap().render(), "(10+01)");
        let a = Alphabet::new(['a', 'b']).unwrap();
        assert!(Regex::parse("ab", &a).unwrap().flip().is_err());
    }

    #[test]
    fn b_n1_construction() {
        assert_eq!(build_ellul_b_n1(1).render(), "1");
        for n in 1..=64usize {
            let r = build_ellul_b_n1(n);
            let c = n.next_power_of_two();
            let exact = n * c.trailing_zeros() as usize + 2 * n - c;
            assert_eq!(r.length(), exact, "n={n}");
            if n <= 18 || n.is_power_of_two() {
                assert_eq!(r.length() as u64, b1_length(n), "n={n}");
            } else {
                assert!(r.length() as u64 >= b1_length(n), "n={n}");
            }
            if n <= 16 {
                assert_eq!(r.language(), binomial(n, 1));
            }
        }
    }

    #[test]
    fn t_n1_construction() {
        assert_eq!(build_ellul_t_n1(1).render(), "1");
        assert_eq!(build_ellul_t_n1(2).language(), Language::parse("{01,10,11}").unwrap());
        for n in 1..=32 {
            let r = build_ellul_t_n1(n);
            // Each leaf B(1,1) costs one symbol instead of two.
            assert_eq!(r.length(), 2 * build_ellul_b_n1(n).length() - n);
            if n <= 18 {
                assert!(r.length() as u64 <= crate::combin::t1_length_bound(n));
            }
            if n <= 10 {
                assert_eq!(r.language(), threshold(n, 1));
            }
        }
    }

    #[test]
    fn bnk_construction() {
        assert_eq!(build_ellul_bnk(5, 0).render(), "00000");
        assert_eq!(build_ellul_bnk(2, 1).render(), "(01+10)");
        assert_eq!(build_ellul_bnk(2, 1).length(), 4);
        assert_eq!(build_ellul_bnk(3, 2), build_ellul_bnk(3, 1).flip().unwrap());
        for n in 1..=12 {
            for k in 0..=n {
                assert_eq!(build_ellul_bnk(n, k).language(), binomial(n, k), "({n},{k})");
            }
            assert_eq!(build_ellul_bnk(n, n).render(), "1".repeat(n));
        }
    }

    #[test]
    fn sigma_power_language() {
        for n in 1..=6 {
            assert_eq!(sigma_power(n).language(), sigma_n(&Alphabet::binary(), n));
            assert_eq!(sigma_power(n).length(), 2 * n);
        }
    }

    #[test]
    fn non_binary_alphabet() {
        let a = Alphabet::new(['a', 'b', 'c']).unwrap();
        let r = Regex::parse("(a+bc)a", &a).unwrap();
        assert_eq!(r.language_in(&a).unwrap().to_string(), "{aa,bca}");
        assert!(Regex::parse("d", &a).is_err());
    }
}
