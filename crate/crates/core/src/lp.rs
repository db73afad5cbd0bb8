//! Sparse linear programs with exact rational data.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::closure::{binomial_index, ClosureSet};
use crate::error::{Error, Result};
use crate::lang::{binomial_strings, canon_cmp, Language};
use crate::rational::Rational;

/// Variable or row name such as `x[010]`, `X[{001,111}]` or `y[3,1,2,0]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarName(String);

impl VarName {
    pub fn new(s: impl Into<String>) -> Self {
        VarName(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// `role[payload]`.
    pub fn indexed(role: &str, payload: impl fmt::Display) -> Self {
        VarName(format!("{role}[{payload}]"))
    }

    /// `role[K1,K2]` for a language pair.
    pub fn pair(role: &str, a: &Language, b: &Language) -> Self {
        VarName(format!("{role}[{a},{b}]"))
    }

    /// `y[n1,k1,n2,k2]`.
    pub fn quad(q: (usize, usize, usize, usize)) -> Self {
        VarName(format!("y[{},{},{},{}]", q.0, q.1, q.2, q.3))
    }

    pub fn role(&self) -> &str {
        self.0.split('[').next().unwrap_or("")
    }

    /// Text between the outer brackets.
    pub fn payload(&self) -> Option<&str> {
        let open = self.0.find('[')?;
        self.0.strip_suffix(']').map(|s| &s[open + 1..])
    }
}

impl fmt::Display for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for VarName {
    fn from(s: &str) -> Self {
        VarName(s.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: VarName,
    pub lo: Rational,
    /// `None` means unbounded above.
    pub hi: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub label: String,
    /// Sorted by variable index, no zero coefficients.
    pub coeffs: Vec<(usize, Rational)>,
    pub rel: Relation,
    pub rhs: Rational,
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub sense: Sense,
    vars: Vec<Variable>,
    index: HashMap<VarName, usize>,
    objective: Vec<(usize, Rational)>,
    rows: Vec<Row>,
}

fn aggregate(coeffs: impl IntoIterator<Item = (usize, Rational)>) -> Vec<(usize, Rational)> {
    let mut m: BTreeMap<usize, Rational> = BTreeMap::new();
    for (j, c) in coeffs {
        *m.entry(j).or_default() += c;
    }
    m.into_iter().filter(|(_, c)| !c.is_zero()).collect()
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        LinearProgram { sense, vars: Vec::new(), index: HashMap::new(), objective: Vec::new(), rows: Vec::new() }
    }

    /// Adds a variable; lower bounds must be nonnegative and names unique.
    pub fn add_var(&mut self, name: VarName, lo: Rational, hi: Option<Rational>) -> Result<usize> {
        if lo.is_negative() {
            return Err(Error::Format(format!("variable {name} has a negative lower bound")));
        }
        if let Some(h) = &hi {
            if *h < lo {
                return Err(Error::Format(format!("variable {name} has an empty range")));
            }
        }
        if self.index.contains_key(&name) {
            return Err(Error::Format(format!("duplicate variable {name}")));
        }
        let j = self.vars.len();
        self.index.insert(name.clone(), j);
        self.vars.push(Variable { name, lo, hi });
        Ok(j)
    }

    fn var(&mut self, name: VarName, hi: Option<Rational>) -> usize {
        self.add_var(name, Rational::zero(), hi).expect("builder variables are unique")
    }

    /// Adds a row, summing repeated variables and dropping zero coefficients.
    pub fn add_row(
        &mut self,
        label: impl Into<String>,
        coeffs: impl IntoIterator<Item = (usize, Rational)>,
        rel: Relation,
        rhs: Rational,
    ) {
        self.rows.push(Row { label: label.into(), coeffs: aggregate(coeffs), rel, rhs });
    }

    pub fn set_objective(&mut self, coeffs: impl IntoIterator<Item = (usize, Rational)>) {
        self.objective = aggregate(coeffs);
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn objective(&self) -> &[(usize, Rational)] {
        &self.objective
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn nonzeros(&self) -> usize {
        self.rows.iter().map(|r| r.coeffs.len()).sum()
    }

    pub fn var_index(&self, name: &VarName) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn var_index_str(&self, name: &str) -> Option<usize> {
        self.index.get(&VarName::new(name)).copied()
    }

    /// Drops rows that repeat an earlier row's coefficients, relation and rhs.
    pub fn dedupe_rows(&mut self) -> usize {
        let mut seen: HashSet<(Vec<(usize, Rational)>, Relation, Rational)> = HashSet::new();
        let before = self.rows.len();
        self.rows.retain(|r| seen.insert((r.coeffs.clone(), r.rel, r.rhs.clone())));
        before - self.rows.len()
    }

    /// Order-insensitive description used to compare programs by name.
    pub fn canonical(&self) -> CanonicalLp {
        let name = |j: usize| self.vars[j].name.clone();
        CanonicalLp {
            sense: self.sense,
            vars: self.vars.iter().map(|v| (v.name.clone(), (v.lo.clone(), v.hi.clone()))).collect(),
            objective: self.objective.iter().map(|(j, c)| (name(*j), c.clone())).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| {
                    let coeffs = r.coeffs.iter().map(|(j, c)| (name(*j), c.clone())).collect();
                    (r.label.clone(), (coeffs, r.rel, r.rhs.clone()))
                })
                .collect(),
        }
    }
}

type CanonicalRow = (BTreeMap<VarName, Rational>, Relation, Rational);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalLp {
    pub sense: Sense,
    pub vars: BTreeMap<VarName, (Rational, Option<Rational>)>,
    pub objective: BTreeMap<VarName, Rational>,
    pub rows: BTreeMap<String, CanonicalRow>,
}

impl CanonicalLp {
    /// First difference found, for diagnostics.
    pub fn first_difference(&self, other: &CanonicalLp) -> Option<String> {
        if self.sense != other.sense {
            return Some("sense differs".into());
        }
        for (k, v) in &self.vars {
            if other.vars.get(k) != Some(v) {
                return Some(format!("variable {k} differs"));
            }
        }
        if let Some(k) = other.vars.keys().find(|k| !self.vars.contains_key(*k)) {
            return Some(format!("variable {k} missing"));
        }
        if self.objective != other.objective {
            return Some("objective differs".into());
        }
        for (k, v) in &self.rows {
            if other.rows.get(k) != Some(v) {
                return Some(format!("row {k} differs"));
            }
        }
        if let Some(k) = other.rows.keys().find(|k| !self.rows.contains_key(*k)) {
            return Some(format!("row {k} missing"));
        }
        None
    }
}

/// Name of the dual variable of a finite upper bound.
pub fn upper_bound_dual_name(name: &VarName) -> VarName {
    match (name.role(), name.payload()) {
        ("x", Some(p)) => VarName::indexed("w", p),
        ("X", Some(p)) if p.starts_with('{') && p.ends_with('}') && !p.contains(',') => {
            VarName::indexed("W", &p[1..p.len() - 1])
        }
        _ => VarName::indexed("ub", name),
    }
}

/// Name of the dual variable of a positive lower bound.
pub fn lower_bound_dual_name(name: &VarName) -> VarName {
    VarName::indexed("lb", name)
}

/// The LP dual, built mechanically.
///
/// Rows become variables named by their labels and variables become rows
/// labelled by their names. Finite upper bounds and positive lower bounds
/// get their own dual variables, see [`upper_bound_dual_name`].
pub fn transpose(lp: &LinearProgram) -> LinearProgram {
    let primal_max = lp.sense == Sense::Max;
    let mut d = LinearProgram::new(if primal_max { Sense::Min } else { Sense::Max });
    // Row sign making every primal row `≤` for a max primal, `≥` for a min primal.
    let row_sign = |r: &Row| match (primal_max, r.rel) {
        (true, Relation::Le) | (false, Relation::Ge) => Rational::one(),
        _ => -Rational::one(),
    };
    let mut cols: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); lp.vars.len()];
    let mut obj = Vec::new();
    for r in &lp.rows {
        let sign = row_sign(r);
        let i = d.var(VarName::new(r.label.clone()), None);
        for (j, c) in &r.coeffs {
            cols[*j].push((i, &sign * c));
        }
        obj.push((i, &sign * &r.rhs));
    }
    let bound_sign = if primal_max { Rational::one() } else { -Rational::one() };
    for (j, v) in lp.vars.iter().enumerate() {
        if let Some(h) = &v.hi {
            let i = d.var(upper_bound_dual_name(&v.name), None);
            cols[j].push((i, bound_sign.clone()));
            obj.push((i, &bound_sign * h));
        }
        if v.lo.is_positive() {
            let i = d.var(lower_bound_dual_name(&v.name), None);
            cols[j].push((i, -&bound_sign));
            obj.push((i, -(&bound_sign * &v.lo)));
        }
    }
    let c: HashMap<usize, Rational> = lp.objective.iter().cloned().collect();
    let rel = if primal_max { Relation::Ge } else { Relation::Le };
    for (j, v) in lp.vars.iter().enumerate() {
        let rhs = c.get(&j).cloned().unwrap_or_default();
        d.add_row(v.name.to_string(), std::mem::take(&mut cols[j]), rel, rhs);
    }
    d.set_objective(obj);
    d
}

fn len_q(s: &str) -> Rational {
    Rational::from(s.len())
}

fn check_base(l: &Language, closure: &ClosureSet) -> Result<()> {
    if closure.base() != l {
        return Err(Error::LanguageMismatch { expected: l.to_string(), actual: closure.base().to_string() });
    }
    Ok(())
}

/// Weak program: maximize `Σ_{s∈L} x_s` over string variables.
pub fn build_weak_primal(l: &Language, closure: &ClosureSet) -> Result<LinearProgram> {
    check_base(l, closure)?;
    let mut lp = LinearProgram::new(Sense::Max);
    let mut xs: HashMap<String, usize> = HashMap::new();
    for s in closure.strings() {
        let j = lp.var(VarName::indexed("x", &s), Some(len_q(&s)));
        xs.insert(s, j);
    }
    let m = closure.members();
    for &(a, b, p) in closure.concat_triples() {
        let one = Rational::one();
        let coeffs = m[p]
            .iter()
            .map(|s| (xs[s], one.clone()))
            .chain(m[a].iter().chain(m[b].iter()).map(|s| (xs[s], -&one)));
        lp.add_row(VarName::pair("y", &m[a], &m[b]).to_string(), coeffs.collect::<Vec<_>>(), Relation::Le, Rational::zero());
    }
    lp.set_objective(l.iter().map(|s| (xs[s], Rational::one())).collect::<Vec<_>>());
    Ok(lp)
}

/// Dual of the weak program, built directly.
pub fn build_weak_dual(l: &Language, closure: &ClosureSet) -> Result<LinearProgram> {
    check_base(l, closure)?;
    let mut lp = LinearProgram::new(Sense::Min);
    let strings = closure.strings();
    let mut rows: BTreeMap<String, Vec<(usize, Rational)>> = BTreeMap::new();
    let m = closure.members();
    for &(a, b, p) in closure.concat_triples() {
        let y = lp.var(VarName::pair("y", &m[a], &m[b]), None);
        for s in m[p].iter() {
            rows.entry(s.to_string()).or_default().push((y, Rational::one()));
        }
        for s in m[a].iter().chain(m[b].iter()) {
            rows.entry(s.to_string()).or_default().push((y, -Rational::one()));
        }
    }
    let mut obj = Vec::new();
    for s in &strings {
        let w = lp.var(VarName::indexed("w", s), None);
        rows.entry(s.clone()).or_default().push((w, Rational::one()));
        obj.push((w, len_q(s)));
    }
    for s in &strings {
        let rhs = if l.contains(s) { Rational::one() } else { Rational::zero() };
        lp.add_row(VarName::indexed("x", s).to_string(), rows.remove(s).unwrap_or_default(), Relation::Ge, rhs);
    }
    lp.set_objective(obj);
    Ok(lp)
}

/// Strong program: maximize `X_L` over language variables.
pub fn build_strong_primal(l: &Language, closure: &ClosureSet) -> Result<LinearProgram> {
    check_base(l, closure)?;
    let mut lp = LinearProgram::new(Sense::Max);
    let m = closure.members();
    for k in m {
        let hi = k.is_singleton().then(|| len_q(&k.members()[0]));
        lp.var(VarName::indexed("X", k), hi);
    }
    let one = Rational::one();
    for &(a, b, p) in closure.concat_triples() {
        lp.add_row(
            VarName::pair("Y", &m[a], &m[b]).to_string(),
            [(p, one.clone()), (a, -&one), (b, -&one)],
            Relation::Le,
            Rational::zero(),
        );
    }
    closure.for_each_union_triple(|a, b, p| {
        lp.add_row(
            VarName::pair("Z", &m[a], &m[b]).to_string(),
            [(p, one.clone()), (a, -&one), (b, -&one)],
            Relation::Le,
            Rational::zero(),
        );
    });
    lp.set_objective([(closure.base_index(), Rational::one())]);
    Ok(lp)
}

/// Dual of the strong program, built directly.
pub fn build_strong_dual(l: &Language, closure: &ClosureSet) -> Result<LinearProgram> {
    check_base(l, closure)?;
    let mut lp = LinearProgram::new(Sense::Min);
    let m = closure.members();
    let mut rows: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); m.len()];
    let one = Rational::one();
    for &(a, b, p) in closure.concat_triples() {
        let y = lp.var(VarName::pair("Y", &m[a], &m[b]), None);
        rows[p].push((y, one.clone()));
        rows[a].push((y, -&one));
        rows[b].push((y, -&one));
    }
    closure.for_each_union_triple(|a, b, p| {
        let z = lp.var(VarName::pair("Z", &m[a], &m[b]), None);
        rows[p].push((z, one.clone()));
        rows[a].push((z, -&one));
        rows[b].push((z, -&one));
    });
    let mut obj = Vec::new();
    for (i, k) in m.iter().enumerate() {
        if k.is_singleton() {
            let s = &k.members()[0];
            let w = lp.var(VarName::indexed("W", s), None);
            rows[i].push((w, one.clone()));
            obj.push((w, len_q(s)));
        }
    }
    let base = closure.base_index();
    for (i, k) in m.iter().enumerate() {
        let rhs = if i == base { Rational::one() } else { Rational::zero() };
        lp.add_row(VarName::indexed("X", k).to_string(), std::mem::take(&mut rows[i]), Relation::Ge, rhs);
    }
    lp.set_objective(obj);
    Ok(lp)
}

/// `B(n1,k1)·B(n2,k2)`: first n1 symbols carry k1 ones, the rest k2.
pub fn block_product(q: (usize, usize, usize, usize)) -> Vec<String> {
    let (n1, k1, n2, k2) = q;
    let right = binomial_strings(n2, k2);
    let mut v = Vec::new();
    for a in binomial_strings(n1, k1) {
        for b in &right {
            v.push(format!("{a}{b}"));
        }
    }
    v
}

fn binomial_string_vars(lp: &mut LinearProgram, n: usize, k: usize) -> Result<HashMap<String, usize>> {
    let index = binomial_index(n, k)?;
    let mut xs = HashMap::new();
    for s in index.strings() {
        let j = lp.var(VarName::indexed("x", &s), Some(len_q(&s)));
        xs.insert(s, j);
    }
    Ok(xs)
}

/// Relaxed program over full binomial blocks.
pub fn build_relaxed_binomial(n: usize, k: usize) -> Result<LinearProgram> {
    let mut lp = LinearProgram::new(Sense::Max);
    let xs = binomial_string_vars(&mut lp, n, k)?;
    let one = Rational::one();
    for q in binomial_index(n, k)?.concat {
        let (n1, k1, n2, k2) = q;
        let coeffs: Vec<(usize, Rational)> = block_product(q)
            .iter()
            .map(|s| (xs[s], one.clone()))
            .chain(binomial_strings(n1, k1).iter().chain(binomial_strings(n2, k2).iter()).map(|s| (xs[s], -&one)))
            .collect();
        lp.add_row(VarName::quad(q).to_string(), coeffs, Relation::Le, Rational::zero());
    }
    lp.set_objective(binomial_strings(n, k).iter().map(|s| (xs[s], one.clone())).collect::<Vec<_>>());
    Ok(lp)
}

/// Dual of the relaxed program, built directly.
pub fn build_relaxed_binomial_dual(n: usize, k: usize) -> Result<LinearProgram> {
    let index = binomial_index(n, k)?;
    let mut lp = LinearProgram::new(Sense::Min);
    let mut rows: HashMap<String, Vec<(usize, Rational)>> = HashMap::new();
    let one = Rational::one();
    for &q in &index.concat {
        let (n1, k1, n2, k2) = q;
        let y = lp.var(VarName::quad(q), None);
        for s in block_product(q) {
            rows.entry(s).or_default().push((y, one.clone()));
        }
        for s in binomial_strings(n1, k1).into_iter().chain(binomial_strings(n2, k2)) {
            rows.entry(s).or_default().push((y, -&one));
        }
    }
    let strings = index.strings();
    let mut obj = Vec::new();
    for s in &strings {
        let w = lp.var(VarName::indexed("w", s), None);
        rows.entry(s.clone()).or_default().push((w, one.clone()));
        obj.push((w, len_q(s)));
    }
    for s in &strings {
        let rhs = if s.len() == n && crate::lang::weight(s) == k { one.clone() } else { Rational::zero() };
        lp.add_row(VarName::indexed("x", s).to_string(), rows.remove(s).unwrap_or_default(), Relation::Ge, rhs);
    }
    lp.set_objective(obj);
    Ok(lp)
}

/// Polynomial-size reformulation of the weak program of `B(n,1)`.
///
/// The family of rows for pairs `(K1 ⊆ B(n1,1), {0^{n2}})` is equivalent to
/// `Σ_s max(0, x[s·0^{n2}] − x[s]) ≤ x[0^{n2}]`, which auxiliary variables
/// `d[r,n1,n2,s]` linearize; `d[l,n1,n2,t]` handle the mirrored family.
/// Variables are the strings of [`binomial_index`]`(n, 1)`.
pub fn build_reduced_weak_primal_b_n1(n: usize) -> Result<LinearProgram> {
    if n == 0 {
        return Err(Error::OutOfRange("n must be positive".into()));
    }
    let mut lp = LinearProgram::new(Sense::Max);
    let xs = binomial_string_vars(&mut lp, n, 1.min(n))?;
    let one = Rational::one();
    let zero = |m: usize| "0".repeat(m);
    for a in 1..n {
        for b in 1..=(n - a) {
            let (za, zb, zab) = (zero(a), zero(b), zero(a + b));
            let label = format!("y[{{{za}}},{{{zb}}}]");
            lp.add_row(label, [(xs[&zab], one.clone()), (xs[&za], -&one), (xs[&zb], -&one)], Relation::Le, Rational::zero());
        }
    }
    for n1 in 1..n {
        for n2 in 1..=(n - n1) {
            for (side, blocks) in [("r", (n1, n2)), ("l", (n2, n1))] {
                // side r: K1 ⊆ B(n1,1), K2 = {0^{n2}}; side l: K1 = {0^{n1}}, K2 ⊆ B(n2,1)
                let (ones_len, zeros_len) = blocks;
                let z = zero(zeros_len);
                let mut ds = Vec::new();
                for s in binomial_strings(ones_len, 1) {
                    let longer = if side == "r" { format!("{s}{z}") } else { format!("{z}{s}") };
                    let d = lp.var(VarName::new(format!("d[{side},{n1},{n2},{s}]")), None);
                    lp.add_row(
                        format!("c[{side},{n1},{n2},{s}]"),
                        [(xs[&longer], one.clone()), (xs[&s], -&one), (d, -&one)],
                        Relation::Le,
                        Rational::zero(),
                    );
                    ds.push(d);
                }
                let label = if side == "r" {
                    VarName::quad((n1, 1, n2, 0))
                } else {
                    VarName::quad((n1, 0, n2, 1))
                };
                let coeffs = ds.iter().map(|&d| (d, one.clone())).chain([(xs[&z], -&one)]).collect::<Vec<_>>();
                lp.add_row(label.to_string(), coeffs, Relation::Le, Rational::zero());
            }
        }
    }
    lp.set_objective(binomial_strings(n, 1).iter().map(|s| (xs[s], one.clone())).collect::<Vec<_>>());
    Ok(lp)
}

/// Extends string values `x[s]` with the auxiliary `d[...]` values of
/// [`build_reduced_weak_primal_b_n1`]: `d = max(0, x[longer] − x[s])`.
pub fn complete_reduced_b_n1(lp: &LinearProgram, x: &Assignment) -> Assignment {
    let mut out = x.clone();
    for v in lp.vars() {
        if v.name.role() != "d" {
            continue;
        }
        let p = v.name.payload().expect("d[...] has a payload");
        let parts: Vec<&str> = p.split(',').collect();
        let (side, s) = (parts[0], parts[3]);
        let zeros_len: usize = if side == "r" { parts[2] } else { parts[1] }.parse().expect("index");
        let z = "0".repeat(zeros_len);
        let longer = if side == "r" { format!("{s}{z}") } else { format!("{z}{s}") };
        let lx = VarName::indexed("x", &longer);
        let sx = VarName::indexed("x", s);
        match &mut out {
            Assignment::Exact(m) => {
                let diff = m.get(&lx).cloned().unwrap_or_default() - m.get(&sx).cloned().unwrap_or_default();
                m.insert(v.name.clone(), if diff.is_positive() { diff } else { Rational::zero() });
            }
            Assignment::Float(m) => {
                let diff = m.get(&lx).copied().unwrap_or(0.0) - m.get(&sx).copied().unwrap_or(0.0);
                m.insert(v.name.clone(), diff.max(0.0));
            }
        }
    }
    out
}

/// Values for named variables; missing names read as zero.
#[derive(Debug, Clone, PartialEq)]
pub enum Assignment {
    Exact(BTreeMap<VarName, Rational>),
    Float(BTreeMap<VarName, f64>),
}

impl Assignment {
    pub fn exact() -> Self {
        Assignment::Exact(BTreeMap::new())
    }

    pub fn float() -> Self {
        Assignment::Float(BTreeMap::new())
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Assignment::Exact(_))
    }

    pub fn get_f64(&self, name: &VarName) -> f64 {
        match self {
            Assignment::Exact(m) => m.get(name).map_or(0.0, Rational::to_f64),
            Assignment::Float(m) => m.get(name).copied().unwrap_or(0.0),
        }
    }

    pub fn get_exact(&self, name: &VarName) -> Option<Rational> {
        match self {
            Assignment::Exact(m) => Some(m.get(name).cloned().unwrap_or_default()),
            Assignment::Float(_) => None,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Assignment::Exact(m) => m.len(),
            Assignment::Float(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn set_exact(&mut self, name: VarName, v: Rational) {
        match self {
            Assignment::Exact(m) => {
                m.insert(name, v);
            }
            Assignment::Float(m) => {
                m.insert(name, v.to_f64());
            }
        }
    }

    pub fn set_f64(&mut self, name: VarName, v: f64) {
        match self {
            Assignment::Float(m) => {
                m.insert(name, v);
            }
            Assignment::Exact(_) => panic!("float value in an exact assignment"),
        }
    }

    pub fn to_float(&self) -> Assignment {
        match self {
            Assignment::Exact(m) => Assignment::Float(m.iter().map(|(k, v)| (k.clone(), v.to_f64())).collect()),
            f => f.clone(),
        }
    }

    /// Names and values as decimal floats, sorted by name.
    pub fn iter_f64(&self) -> Vec<(VarName, f64)> {
        match self {
            Assignment::Exact(m) => m.iter().map(|(k, v)| (k.clone(), v.to_f64())).collect(),
            Assignment::Float(m) => m.iter().map(|(k, v)| (k.clone(), *v)).collect(),
        }
    }
}

/// Objective value or violation magnitude in the assignment's mode.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(Rational),
    Float(f64),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => r.to_f64(),
            Value::Float(f) => *f,
        }
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            Value::Exact(r) => Some(r),
            Value::Float(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(r) if r.is_integer() => write!(f, "{r}"),
            Value::Exact(r) => write!(f, "{r} ({})", r.to_decimal(4)),
            Value::Float(x) => write!(f, "{x:.4}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// `bound <var>` or `row <label>`.
    pub what: String,
    pub excess: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
    pub objective: Value,
    /// Largest violation, or zero.
    pub max_excess: f64,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn objective(lp: &LinearProgram, a: &Assignment) -> Value {
    match a {
        Assignment::Exact(m) => {
            let mut acc = Rational::zero();
            for (j, c) in &lp.objective {
                if let Some(v) = m.get(&lp.vars[*j].name) {
                    acc += c * v;
                }
            }
            Value::Exact(acc)
        }
        Assignment::Float(m) => Value::Float(
            lp.objective.iter().map(|(j, c)| c.to_f64() * m.get(&lp.vars[*j].name).copied().unwrap_or(0.0)).sum(),
        ),
    }
}

/// Checks bounds and rows. Exact assignments are checked with zero
/// tolerance; float assignments accept violations up to `tolerance`.
pub fn check_feasible(lp: &LinearProgram, a: &Assignment, tolerance: f64) -> FeasibilityReport {
    let mut violations = Vec::new();
    let mut max_excess = 0.0f64;
    match a {
        Assignment::Exact(m) => {
            let zero = Rational::zero();
            let vals: Vec<&Rational> = lp.vars.iter().map(|v| m.get(&v.name).unwrap_or(&zero)).collect();
            let mut push = |what: String, ex: Rational| {
                max_excess = max_excess.max(ex.to_f64());
                violations.push(Violation { what, excess: Value::Exact(ex) });
            };
            for (v, x) in lp.vars.iter().zip(&vals) {
                if **x < v.lo {
                    push(format!("bound {} >= {}", v.name, v.lo), &v.lo - *x);
                }
                if let Some(h) = &v.hi {
                    if *x > h {
                        push(format!("bound {} <= {}", v.name, h), *x - h);
                    }
                }
            }
            for r in &lp.rows {
                let mut lhs = Rational::zero();
                for (j, c) in &r.coeffs {
                    if !vals[*j].is_zero() {
                        lhs += c * vals[*j];
                    }
                }
                let ex = match r.rel {
                    Relation::Le => &lhs - &r.rhs,
                    Relation::Ge => &r.rhs - &lhs,
                };
                if ex.is_positive() {
                    push(format!("row {}", r.label), ex);
                }
            }
        }
        Assignment::Float(m) => {
            let vals: Vec<f64> = lp.vars.iter().map(|v| m.get(&v.name).copied().unwrap_or(0.0)).collect();
            let mut push = |what: String, ex: f64| {
                max_excess = max_excess.max(ex);
                if ex > tolerance || ex.is_nan() {
                    violations.push(Violation { what, excess: Value::Float(ex) });
                }
            };
            for (v, &x) in lp.vars.iter().zip(&vals) {
                let lo = v.lo.to_f64();
                if x < lo || x.is_nan() {
                    push(format!("bound {} >= {}", v.name, v.lo), lo - x);
                }
                if let Some(h) = &v.hi {
                    let h = h.to_f64();
                    if x > h {
                        push(format!("bound {} <= {}", v.name, h), x - h);
                    }
                }
            }
            for r in &lp.rows {
                let lhs: f64 = r.coeffs.iter().map(|(j, c)| c.to_f64() * vals[*j]).sum();
                let rhs = r.rhs.to_f64();
                let ex = match r.rel {
                    Relation::Le => lhs - rhs,
                    Relation::Ge => rhs - lhs,
                };
                if ex > 0.0 || ex.is_nan() {
                    push(format!("row {}", r.label), ex);
                }
            }
        }
    }
    FeasibilityReport { violations, objective: objective(lp, a), max_excess }
}

pub const LP_HEADER: &str = "relp-lp v1";

fn write_terms(out: &mut String, lp: &LinearProgram, coeffs: &[(usize, Rational)]) {
    for (j, c) in coeffs {
        let _ = write!(out, " {c} {}", lp.vars[*j].name);
    }
}

/// Renders the `relp-lp v1` text form.
pub fn write_lp(lp: &LinearProgram) -> String {
    let mut out = String::new();
    out.push_str(LP_HEADER);
    out.push('\n');
    out.push_str(match lp.sense {
        Sense::Max => "sense max\n",
        Sense::Min => "sense min\n",
    });
    for v in &lp.vars {
        let hi = v.hi.as_ref().map_or("inf".to_string(), Rational::to_string);
        let _ = writeln!(out, "var {} in [{}, {}]", v.name, v.lo, hi);
    }
    out.push_str("obj");
    write_terms(&mut out, lp, &lp.objective);
    out.push('\n');
    for r in &lp.rows {
        let _ = write!(out, "row {}:", r.label);
        write_terms(&mut out, lp, &r.coeffs);
        let _ = writeln!(out, " {} {}", r.rel, r.rhs);
    }
    out
}

fn parse_rational(tok: &str, line: usize) -> Result<Rational> {
    Rational::from_str(tok).map_err(|_| Error::Format(format!("line {line}: bad number `{tok}`")))
}

fn parse_terms(lp: &LinearProgram, toks: &[&str], line: usize) -> Result<Vec<(usize, Rational)>> {
    if !toks.len().is_multiple_of(2) {
        return Err(Error::Format(format!("line {line}: expected coefficient/name pairs")));
    }
    toks.chunks(2)
        .map(|p| {
            let c = parse_rational(p[0], line)?;
            let j = lp
                .var_index_str(p[1])
                .ok_or_else(|| Error::Format(format!("line {line}: undeclared variable `{}`", p[1])))?;
            Ok((j, c))
        })
        .collect()
}

/// Parses the `relp-lp v1` text form.
pub fn parse_lp(text: &str) -> Result<LinearProgram> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some((_, LP_HEADER)) => {}
        _ => return Err(Error::Format(format!("missing `{LP_HEADER}` header"))),
    }
    let sense = match lines.next() {
        Some((_, "sense max")) => Sense::Max,
        Some((_, "sense min")) => Sense::Min,
        Some((n, _)) => return Err(Error::Format(format!("line {n}: expected `sense max|min`"))),
        None => return Err(Error::Format("missing sense line".into())),
    };
    let mut lp = LinearProgram::new(sense);
    let mut seen_obj = false;
    for (n, l) in lines {
        if let Some(rest) = l.strip_prefix("var ") {
            let (name, range) = rest
                .split_once(" in ")
                .ok_or_else(|| Error::Format(format!("line {n}: expected `var <name> in [lo, hi]`")))?;
            let range = range
                .trim()
                .strip_prefix('[')
                .and_then(|r| r.strip_suffix(']'))
                .ok_or_else(|| Error::Format(format!("line {n}: bad range")))?;
            let (lo, hi) = range.split_once(',').ok_or_else(|| Error::Format(format!("line {n}: bad range")))?;
            let lo = parse_rational(lo.trim(), n)?;
            let hi = match hi.trim() {
                "inf" => None,
                h => Some(parse_rational(h, n)?),
            };
            lp.add_var(VarName::new(name.trim()), lo, hi).map_err(|e| Error::Format(format!("line {n}: {e}")))?;
        } else if l == "obj" || l.starts_with("obj ") {
            if seen_obj {
                return Err(Error::Format(format!("line {n}: second objective")));
            }
            seen_obj = true;
            let toks: Vec<&str> = l.split_whitespace().skip(1).collect();
            let terms = parse_terms(&lp, &toks, n)?;
            lp.set_objective(terms);
        } else if let Some(rest) = l.strip_prefix("row ") {
            let (label, body) =
                rest.split_once(':').ok_or_else(|| Error::Format(format!("line {n}: expected `row <label>: ...`")))?;
            let toks: Vec<&str> = body.split_whitespace().collect();
            if toks.len() < 2 {
                return Err(Error::Format(format!("line {n}: row without relation")));
            }
            let rel = match toks[toks.len() - 2] {
                "<=" => Relation::Le,
                ">=" => Relation::Ge,
                t => return Err(Error::Format(format!("line {n}: expected <= or >=, found `{t}`"))),
            };
            let rhs = parse_rational(toks[toks.len() - 1], n)?;
            let terms = parse_terms(&lp, &toks[..toks.len() - 2], n)?;
            lp.add_row(label.trim(), terms, rel, rhs);
        } else {
            return Err(Error::Format(format!("line {n}: unrecognized `{l}`")));
        }
    }
    Ok(lp)
}

/// Renders a solution file; `status` is `optimal`, `infeasible` or `unbounded`.
pub fn write_solution(status: &str, objective: Option<&Value>, a: Option<&Assignment>) -> String {
    let mut out = format!("status {status}\n");
    if let Some(v) = objective {
        match v {
            Value::Exact(r) => {
                let _ = writeln!(out, "objective {r}");
            }
            Value::Float(x) => {
                let _ = writeln!(out, "objective {x}");
            }
        }
    }
    match a {
        Some(Assignment::Exact(m)) => {
            for (k, v) in m {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        Some(Assignment::Float(m)) => {
            for (k, v) in m {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        None => {}
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionFile {
    pub status: String,
    pub objective: Option<Rational>,
    pub values: Assignment,
}

/// Parses a solution file. Values may be rationals or decimals and are read
/// exactly.
pub fn parse_solution(text: &str) -> Result<SolutionFile> {
    let mut status = None;
    let mut obj = None;
    let mut values = BTreeMap::new();
    for (i, l) in text.lines().enumerate() {
        let n = i + 1;
        let l = l.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        if let Some(s) = l.strip_prefix("status ") {
            status = Some(s.trim().to_string());
        } else if let Some(v) = l.strip_prefix("objective ") {
            obj = Some(parse_rational(v.trim(), n)?);
        } else if let Some((k, v)) = l.split_once(" = ") {
            values.insert(VarName::new(k.trim()), parse_rational(v.trim(), n)?);
        } else {
            return Err(Error::Format(format!("line {n}: unrecognized `{l}`")));
        }
    }
    let status = status.ok_or_else(|| Error::Format("missing status line".into()))?;
    Ok(SolutionFile { status, objective: obj, values: Assignment::Exact(values) })
}

/// Sorted string list helper for diagnostics.
pub fn sorted_strings(mut v: Vec<String>) -> Vec<String> {
    v.sort_by(|a, b| canon_cmp(a, b));
    v
}
