//! The closure of a language under the subset and exact-factorization rules.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::lang::{binomial_strings, canon_cmp, Alphabet, Language};

pub const DEFAULT_CLOSURE_CAP: usize = 100_000;

/// Materialized closure of a base language.
#[derive(Debug, Clone)]
pub struct ClosureSet {
    base: Language,
    members: Vec<Language>,
    index: HashMap<Language, usize>,
    /// `(K1, K2, K1K2)` member indices, ordered by product then factors.
    concat: Vec<(usize, usize, usize)>,
    cap: usize,
}

fn dump_order(a: &Language, b: &Language) -> std::cmp::Ordering {
    a.max_len()
        .cmp(&b.max_len())
        .then(a.len().cmp(&b.len()))
        .then_with(|| a.to_string().cmp(&b.to_string()))
}

struct Fixpoint {
    members: Vec<Language>,
    index: HashMap<Language, usize>,
    subsets_done: Vec<bool>,
    queue: VecDeque<usize>,
    cap: usize,
}

impl Fixpoint {
    fn insert(&mut self, l: Language, subsets_done: bool) -> Result<()> {
        if let Some(&i) = self.index.get(&l) {
            self.subsets_done[i] |= subsets_done;
            return Ok(());
        }
        if self.members.len() >= self.cap {
            return Err(Error::CapExceeded {
                what: "closure member",
                count: self.members.len() + 1,
                cap: self.cap,
            });
        }
        let i = self.members.len();
        self.index.insert(l.clone(), i);
        self.members.push(l);
        self.subsets_done.push(subsets_done);
        self.queue.push_back(i);
        Ok(())
    }
}

/// Computes the closure of `base`, failing once more than `cap` members exist.
pub fn compute_closure(base: &Language, cap: usize) -> Result<ClosureSet> {
    let mut fp = Fixpoint {
        members: Vec::new(),
        index: HashMap::new(),
        subsets_done: Vec::new(),
        queue: VecDeque::new(),
        cap,
    };
    fp.insert(base.clone(), false)?;
    let mut factor_lists: Vec<(usize, Vec<(Language, Language)>)> = Vec::new();
    while let Some(i) = fp.queue.pop_front() {
        let k = fp.members[i].clone();
        if !fp.subsets_done[i] {
            fp.subsets_done[i] = true;
            if k.len() >= 64 || (1u128 << k.len()) > cap as u128 + 1 {
                // `k` alone has 2^|k| − 1 nonempty subsets
                return Err(Error::CapExceeded {
                    what: "closure member",
                    count: 1usize.checked_shl(k.len() as u32).map_or(usize::MAX, |c| c - 1),
                    cap,
                });
            }
            let full = (1u64 << k.len()) - 1;
            for mask in 1..full {
                let s = k.subset_by_mask(mask).expect("nonempty mask");
                fp.insert(s, true)?;
            }
        }
        let fs = factorizations(&k);
        for (a, b) in &fs {
            fp.insert(a.clone(), false)?;
            fp.insert(b.clone(), false)?;
        }
        factor_lists.push((i, fs));
    }

    let mut order: Vec<usize> = (0..fp.members.len()).collect();
    order.sort_by(|&a, &b| dump_order(&fp.members[a], &fp.members[b]));
    let members: Vec<Language> = order.iter().map(|&i| fp.members[i].clone()).collect();
    let index: HashMap<Language, usize> = members.iter().cloned().enumerate().map(|(i, l)| (l, i)).collect();
    let mut concat = Vec::new();
    for (i, fs) in factor_lists {
        let prod = index[&fp.members[i]];
        for (a, b) in fs {
            concat.push((index[&a], index[&b], prod));
        }
    }
    concat.sort_by_key(|&(a, b, p)| (p, a, b));
    Ok(ClosureSet { base: base.clone(), members, index, concat, cap })
}

impl ClosureSet {
    pub fn base(&self) -> &Language {
        &self.base
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Members in dump order: (max member length, size, text form).
    pub fn members(&self) -> &[Language] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, l: &Language) -> bool {
        self.index.contains_key(l)
    }

    pub fn index_of(&self, l: &Language) -> Option<usize> {
        self.index.get(l).copied()
    }

    pub fn base_index(&self) -> usize {
        self.index[&self.base]
    }

    /// Strings `s` with `{s}` a member, in shortlex order.
    pub fn strings(&self) -> Vec<String> {
        let mut v: Vec<String> = self
            .members
            .iter()
            .filter(|l| l.is_singleton())
            .map(|l| l.members()[0].clone())
            .collect();
        v.sort_by(|a, b| canon_cmp(a, b));
        v
    }

    /// `(K1, K2, K1K2)` index triples of every exact factorization of a member.
    pub fn concat_triples(&self) -> &[(usize, usize, usize)] {
        &self.concat
    }

    pub fn concat_pairs(&self) -> Vec<(Language, Language)> {
        self.concat
            .iter()
            .map(|&(a, b, _)| (self.members[a].clone(), self.members[b].clone()))
            .collect()
    }

    /// Calls `f(K1, K2, K1 ∪ K2)` with member indices for every ordered pair of
    /// members whose union is a member.
    pub fn for_each_union_triple(&self, mut f: impl FnMut(usize, usize, usize)) {
        for (ki, k) in self.members.iter().enumerate() {
            let n = k.len();
            if n >= 32 {
                continue;
            }
            let full = (1u64 << n) - 1;
            let idx: Vec<usize> = (1..=full)
                .map(|m| self.index[&k.subset_by_mask(m).expect("nonempty")])
                .collect();
            // Assign every string to the left side, the right side, or both.
            for a in 1..=full {
                let rest = full & !a;
                // b ⊇ rest, b ⊆ full, b nonempty
                let free = a;
                let mut sub = free;
                loop {
                    let b = rest | sub;
                    if b != 0 {
                        f(idx[(a - 1) as usize], idx[(b - 1) as usize], ki);
                    }
                    if sub == 0 {
                        break;
                    }
                    sub = (sub - 1) & free;
                }
            }
        }
    }

    pub fn union_pairs(&self) -> Vec<(Language, Language)> {
        let mut v = Vec::new();
        self.for_each_union_triple(|a, b, _| v.push((self.members[a].clone(), self.members[b].clone())));
        v
    }

    pub fn union_pair_count(&self) -> usize {
        let mut c = 0;
        self.for_each_union_triple(|_, _, _| c += 1);
        c
    }

    /// One member per line in canonical text form.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for m in &self.members {
            s.push_str(&m.to_string());
            s.push('\n');
        }
        s
    }
}

struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn and(&self, o: &Bits) -> Bits {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a & b).collect())
    }
    fn is_zero(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }
    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(wi, &w)| {
            (0..64).filter(move |b| w >> b & 1 == 1).map(move |b| wi * 64 + b)
        })
    }
}

/// Every ordered pair `(K1, K2)` with `K1·K2 = K` exactly.
pub fn factorizations(k: &Language) -> Vec<(Language, Language)> {
    let alphabet = k.alphabet();
    let prefixes: Vec<String> = {
        let set: BTreeSet<&str> = k.iter().flat_map(|s| (1..s.len()).map(move |i| &s[..i])).collect();
        let mut v: Vec<String> = set.into_iter().map(str::to_string).collect();
        v.sort_by(|a, b| canon_cmp(a, b));
        v
    };
    if prefixes.is_empty() {
        return Vec::new();
    }
    let suffixes: Vec<String> = {
        let set: BTreeSet<&str> = k.iter().flat_map(|s| (1..s.len()).map(move |i| &s[i..])).collect();
        let mut v: Vec<String> = set.into_iter().map(str::to_string).collect();
        v.sort_by(|a, b| canon_cmp(a, b));
        v
    };
    let suffix_id: HashMap<&str, usize> = suffixes.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    // quotient[p] = { t : p·t ∈ K }
    let quotients: Vec<Bits> = prefixes
        .iter()
        .map(|p| {
            let mut b = Bits::new(suffixes.len());
            for s in k.iter() {
                if s.len() > p.len() && s.starts_with(p.as_str()) {
                    b.set(suffix_id[&s[p.len()..]]);
                }
            }
            b
        })
        .collect();

    let mut out = Vec::new();
    let mut chosen: Vec<usize> = Vec::new();
    let mut all = Bits::new(suffixes.len());
    for i in 0..suffixes.len() {
        all.set(i);
    }
    search(k, alphabet, &prefixes, &suffixes, &quotients, 0, &mut chosen, all, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn search(
    k: &Language,
    alphabet: &Alphabet,
    prefixes: &[String],
    suffixes: &[String],
    quotients: &[Bits],
    from: usize,
    chosen: &mut Vec<usize>,
    q: Bits,
    out: &mut Vec<(Language, Language)>,
) {
    if !chosen.is_empty() {
        emit(k, alphabet, prefixes, suffixes, chosen, &q, out);
    }
    for i in from..prefixes.len() {
        let nq = q.and(&quotients[i]);
        if nq.is_zero() {
            continue;
        }
        chosen.push(i);
        search(k, alphabet, prefixes, suffixes, quotients, i + 1, chosen, nq, out);
        chosen.pop();
    }
}

/// Given K1 and its common quotient Q, emits every K2 ⊆ Q with K1·K2 = K.
fn emit(
    k: &Language,
    alphabet: &Alphabet,
    prefixes: &[String],
    suffixes: &[String],
    chosen: &[usize],
    q: &Bits,
    out: &mut Vec<(Language, Language)>,
) {
    let qs: Vec<usize> = q.ones().collect();
    // cover[j] = members of K produced by suffix qs[j] with some chosen prefix
    let mut cover: Vec<Bits> = Vec::with_capacity(qs.len());
    let mut covered = Bits::new(k.len());
    for &t in &qs {
        let mut b = Bits::new(k.len());
        for &p in chosen {
            let mut s = prefixes[p].clone();
            s.push_str(&suffixes[t]);
            if let Ok(pos) = k.members().binary_search_by(|m| canon_cmp(m, &s)) {
                b.set(pos);
                covered.set(pos);
            }
        }
        cover.push(b);
    }
    if (0..k.len()).any(|i| !covered.get(i)) {
        return;
    }
    // Suffixes that are the only way to produce some member are mandatory.
    let mut mandatory = vec![false; qs.len()];
    for i in 0..k.len() {
        let who: Vec<usize> = (0..qs.len()).filter(|&j| cover[j].get(i)).collect();
        if who.len() == 1 {
            mandatory[who[0]] = true;
        }
    }
    let optional: Vec<usize> = (0..qs.len()).filter(|&j| !mandatory[j]).collect();
    assert!(optional.len() < 31, "factorization search too wide");
    let k1 = Language::from_sorted(alphabet.clone(), {
        let mut v: Vec<String> = chosen.iter().map(|&p| prefixes[p].clone()).collect();
        v.sort_by(|a, b| canon_cmp(a, b));
        v
    });
    let mut results: Vec<Language> = Vec::new();
    for mask in 0u32..(1 << optional.len()) {
        let mut pick: Vec<usize> = (0..qs.len()).filter(|&j| mandatory[j]).collect();
        pick.extend(optional.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &j)| j));
        if pick.is_empty() {
            continue;
        }
        let mut got = Bits::new(k.len());
        for &j in &pick {
            for w in 0..got.0.len() {
                got.0[w] |= cover[j].0[w];
            }
        }
        if (0..k.len()).all(|i| got.get(i)) {
            let mut v: Vec<String> = pick.iter().map(|&j| suffixes[qs[j]].clone()).collect();
            v.sort_by(|a, b| canon_cmp(a, b));
            results.push(Language::from_sorted(alphabet.clone(), v));
        }
    }
    results.sort();
    for k2 in results {
        out.push((k1.clone(), k2));
    }
}

/// Set-builder index of the binomial closure family:
/// pairs `(m,l)` with `0 < m ≤ n`, `0 ≤ l ≤ min(m,k)` and concatenation
/// quadruples `(n1,k1,n2,k2)` with `nᵢ ≥ 1`, `n1+n2 ≤ n`, `k1+k2 ≤ k`,
/// `kᵢ ≤ min(nᵢ,k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinomialIndex {
    pub n: usize,
    pub k: usize,
    pub pairs: Vec<(usize, usize)>,
    pub concat: Vec<(usize, usize, usize, usize)>,
}

pub fn binomial_index(n: usize, k: usize) -> Result<BinomialIndex> {
    if n == 0 || k > n {
        return Err(Error::OutOfRange(format!("binomial index needs 0 ≤ k ≤ n, n > 0; got n={n}, k={k}")));
    }
    let pairs = (1..=n).flat_map(|m| (0..=m.min(k)).map(move |l| (m, l))).collect();
    let mut concat = Vec::new();
    for n1 in 1..n {
        for n2 in 1..=(n - n1) {
            for k1 in 0..=n1.min(k) {
                for k2 in 0..=n2.min(k - k1) {
                    concat.push((n1, k1, n2, k2));
                }
            }
        }
    }
    Ok(BinomialIndex { n, k, pairs, concat })
}

impl BinomialIndex {
    pub fn contains_pair(&self, m: usize, l: usize) -> bool {
        m >= 1 && m <= self.n && l <= m.min(self.k)
    }

    /// Strings of every block `B(m,l)`, shortlex order.
    pub fn strings(&self) -> Vec<String> {
        let mut v: Vec<String> = self.pairs.iter().flat_map(|&(m, l)| binomial_strings(m, l)).collect();
        v.sort_by(|a, b| canon_cmp(a, b));
        v
    }
}

/// All nonempty subsets of `Σᵐ`, `1 ≤ m ≤ n`. Exponential; tiny n only.
pub fn sigma_closure_closed_form(alphabet: &Alphabet, n: usize) -> BTreeSet<Language> {
    let mut out = BTreeSet::new();
    for m in 1..=n {
        let block = crate::lang::sigma_n(alphabet, m);
        assert!(block.len() < 64);
        for mask in 1..(1u64 << block.len()) {
            out.insert(block.subset_by_mask(mask).expect("nonempty"));
        }
    }
    out
}

fn subsets_of_blocks(blocks: impl Iterator<Item = (usize, usize)>) -> BTreeSet<Language> {
    let mut out = BTreeSet::new();
    for (m, l) in blocks {
        let b = Language::from_sorted(Alphabet::binary(), binomial_strings(m, l));
        assert!(b.len() < 64);
        for mask in 1..(1u64 << b.len()) {
            out.insert(b.subset_by_mask(mask).expect("nonempty"));
        }
    }
    out
}

/// The closure of `B(n,k)`: nonempty subsets of `B(m,l)` with `l ≤ k` and
/// `m − l ≤ n − k`. Exponential; tiny n only.
pub fn binomial_closure_closed_form(n: usize, k: usize) -> BTreeSet<Language> {
    subsets_of_blocks((1..=n).flat_map(|m| (0..=m.min(k)).filter(move |&l| m - l <= n - k).map(move |l| (m, l))))
}

/// Nonempty subsets of `B(m,l)` for every pair of [`binomial_index`]. This
/// strictly contains the closure of `B(n,k)` when `k ≥ 1`: it also has blocks
/// with more than `n − k` zeros, such as `{0ⁿ}`.
pub fn binomial_index_languages(n: usize, k: usize) -> BTreeSet<Language> {
    subsets_of_blocks(binomial_index(n, k).expect("valid range").pairs.into_iter())
}
