//! Exact LP solving.
//!
//! A bounded-variable revised simplex runs in floating point first; its final
//! basis is then rebuilt in exact rational arithmetic, checked, and repaired
//! with Bland's rule if needed. When the float pass fails the exact engine
//! solves from scratch. Every optimal answer is certified: the primal passes
//! [`check_feasible`] on the program and the dual on its [`transpose`], with
//! equal objective values.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::lp::{check_feasible, lower_bound_dual_name, objective, transpose, upper_bound_dual_name, Assignment, LinearProgram, Relation, Sense, Value, VarName};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    /// Iteration cap reached before a verified answer.
    Resource,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
            Status::Resource => "resource",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: Status,
    pub objective: Option<Rational>,
    /// Values of every program variable (optimal only).
    pub primal: Option<Assignment>,
    /// Values of every variable of [`transpose`] of the program (optimal only).
    pub dual: Option<Assignment>,
    pub float_iterations: usize,
    pub exact_iterations: usize,
    /// Whether the program was solved through its transpose.
    pub transposed: bool,
}

impl SolveResult {
    fn bare(status: Status) -> Self {
        SolveResult {
            status,
            objective: None,
            primal: None,
            dual: None,
            float_iterations: 0,
            exact_iterations: 0,
            transposed: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Solve whichever of the program and its transpose has fewer rows.
    Auto,
    Primal,
    Dual,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Cap on exact pivots; float pivots get a proportional budget.
    pub max_iterations: usize,
    pub float_presolve: bool,
    pub orientation: Orientation,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { max_iterations: 1_000_000, float_presolve: true, orientation: Orientation::Auto }
    }
}

pub fn solve(lp: &LinearProgram) -> SolveResult {
    solve_with(lp, &SolverOptions::default())
}

pub fn solve_with(lp: &LinearProgram, opts: &SolverOptions) -> SolveResult {
    let use_dual = match opts.orientation {
        Orientation::Auto => lp.num_rows() > lp.num_vars(),
        Orientation::Primal => false,
        Orientation::Dual => true,
    };
    let dual_lp = transpose(lp);
    if use_dual {
        let r = solve_direct(&dual_lp, opts);
        if r.status == Status::Optimal {
            let (p, d) = (r.dual.clone().expect("dual"), r.primal.clone().expect("primal"));
            // Names of the transpose's row duals are the program's variable names.
            let primal = restrict(lp, p);
            if let Some(res) = certify(lp, &dual_lp, primal, d, r.float_iterations, r.exact_iterations, true) {
                return res;
            }
        } else if r.status == Status::Resource {
            return SolveResult { transposed: true, ..r };
        }
        // Non-optimal transposes do not say which way the program fails.
    }
    let r = solve_direct(lp, opts);
    if r.status != Status::Optimal {
        return r;
    }
    let (p, d) = (r.primal.clone().expect("primal"), r.dual.clone().expect("dual"));
    certify(lp, &dual_lp, p, d, r.float_iterations, r.exact_iterations, false)
        .expect("exact simplex produced an uncertifiable optimum")
}

/// Keeps exactly the program's variables, defaulting missing ones to zero.
fn restrict(lp: &LinearProgram, a: Assignment) -> Assignment {
    let mut out = Assignment::exact();
    for v in lp.vars() {
        out.set_exact(v.name.clone(), a.get_exact(&v.name).unwrap_or_default());
    }
    out
}

fn certify(
    lp: &LinearProgram,
    dual_lp: &LinearProgram,
    primal: Assignment,
    dual: Assignment,
    float_iterations: usize,
    exact_iterations: usize,
    transposed: bool,
) -> Option<SolveResult> {
    let pr = check_feasible(lp, &primal, 0.0);
    let dr = check_feasible(dual_lp, &dual, 0.0);
    let (Value::Exact(po), Value::Exact(dobj)) = (objective(lp, &primal), objective(dual_lp, &dual)) else {
        return None;
    };
    if !pr.is_feasible() || !dr.is_feasible() || po != dobj {
        return None;
    }
    Some(SolveResult {
        status: Status::Optimal,
        objective: Some(po),
        primal: Some(primal),
        dual: Some(dual),
        float_iterations,
        exact_iterations,
        transposed,
    })
}

/// Solves `lp` as given, returning program-named primal values and
/// transpose-named dual values. Not certified.
fn solve_direct(lp: &LinearProgram, opts: &SolverOptions) -> SolveResult {
    let form = Form::new(lp);
    let mut float_iterations = 0;
    if opts.float_presolve {
        let float_cap = 20 * (form.m + form.ncols()) + 50_000;
        let mut fe = Engine::<f64>::cold(&form, float_cap);
        let outcome = fe.run_two_phase();
        float_iterations = fe.iters;
        if outcome == Outcome::Optimal {
            let mut ee = Engine::<Rational>::new(&form, opts.max_iterations);
            if ee.warm_start(&fe) {
                let o = ee.run_phase(Phase::Two);
                if o == Outcome::Optimal {
                    let mut r = ee.extract(lp, &form);
                    r.float_iterations = float_iterations;
                    return r;
                }
                if o == Outcome::Resource {
                    let mut r = SolveResult::bare(Status::Resource);
                    r.float_iterations = float_iterations;
                    r.exact_iterations = ee.iters;
                    return r;
                }
            }
        }
    }
    let mut ee = Engine::<Rational>::cold(&form, opts.max_iterations);
    let outcome = ee.run_two_phase();
    let mut r = match outcome {
        Outcome::Optimal => ee.extract(lp, &form),
        Outcome::Infeasible => SolveResult::bare(Status::Infeasible),
        Outcome::Unbounded => SolveResult::bare(Status::Unbounded),
        Outcome::Resource => SolveResult::bare(Status::Resource),
    };
    r.float_iterations = float_iterations;
    r.exact_iterations = ee.iters;
    r
}

/// Internal equality form. Columns: structurals, then one row activity
/// `r_i = a_i·x` per row (coefficient −1), then phase-one artificials.
struct Form {
    m: usize,
    n: usize,
    cols: Vec<Vec<(usize, Rational)>>,
    lo: Vec<Option<Rational>>,
    hi: Vec<Option<Rational>>,
    /// Phase-two objective, maximized.
    cost: Vec<Rational>,
    /// Starting point of the structural and activity columns.
    start: Vec<Rational>,
    start_upper: Vec<bool>,
    /// Rows with a basic artificial at the start: row, sign, starting value.
    artificials: Vec<(usize, Rational, Rational)>,
}

impl Form {
    fn new(lp: &LinearProgram) -> Form {
        let m = lp.num_rows();
        let n = lp.num_vars();
        let mut cols: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); n];
        for (i, r) in lp.rows().iter().enumerate() {
            for (j, c) in &r.coeffs {
                cols[*j].push((i, c.clone()));
            }
        }
        let mut lo: Vec<Option<Rational>> = lp.vars().iter().map(|v| Some(v.lo.clone())).collect();
        let mut hi: Vec<Option<Rational>> = lp.vars().iter().map(|v| v.hi.clone()).collect();
        let sign = if lp.sense == Sense::Max { Rational::one() } else { -Rational::one() };
        let mut cost = vec![Rational::zero(); n];
        for (j, c) in lp.objective() {
            cost[*j] = &sign * c;
        }
        let mut start: Vec<Rational> = lp.vars().iter().map(|v| v.lo.clone()).collect();
        let mut start_upper = vec![false; n];
        let mut artificials = Vec::new();
        for (i, r) in lp.rows().iter().enumerate() {
            cols.push(vec![(i, -Rational::one())]);
            cost.push(Rational::zero());
            let act: Rational = r.coeffs.iter().map(|(j, c)| c * &start[*j]).sum();
            match r.rel {
                Relation::Le => {
                    lo.push(None);
                    hi.push(Some(r.rhs.clone()));
                }
                Relation::Ge => {
                    lo.push(Some(r.rhs.clone()));
                    hi.push(None);
                }
            }
            let ok = match r.rel {
                Relation::Le => act <= r.rhs,
                Relation::Ge => act >= r.rhs,
            };
            if ok {
                start.push(act);
                start_upper.push(false);
            } else {
                let resid = &r.rhs - &act;
                let sigma = if resid.is_positive() { Rational::one() } else { -Rational::one() };
                artificials.push((i, sigma, resid.abs()));
                start.push(r.rhs.clone());
                start_upper.push(r.rel == Relation::Le);
            }
        }
        Form { m, n, cols, lo, hi, cost, start, start_upper, artificials }
    }

    fn ncols(&self) -> usize {
        self.n + self.m + self.artificials.len()
    }
}

trait Scalar: Clone + std::fmt::Debug {
    const EXACT: bool;
    fn zero() -> Self;
    fn one() -> Self;
    fn from_q(q: &Rational) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn abs(&self) -> Self;
    fn to_f64(&self) -> f64;
    /// Exact zero, or negligible for floats.
    fn negligible(&self) -> bool;
    fn is_exact_zero(&self) -> bool;
    fn cmp(&self, o: &Self) -> Ordering;
    fn dual_tol() -> Self;
    fn primal_tol() -> Self;
}

impl Scalar for f64 {
    const EXACT: bool = false;
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_q(q: &Rational) -> Self {
        q.to_f64()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn negligible(&self) -> bool {
        f64::abs(*self) < 1e-11
    }
    fn is_exact_zero(&self) -> bool {
        *self == 0.0
    }
    fn cmp(&self, o: &Self) -> Ordering {
        self.partial_cmp(o).unwrap_or(Ordering::Equal)
    }
    fn dual_tol() -> Self {
        1e-9
    }
    fn primal_tol() -> Self {
        1e-9
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;
    fn zero() -> Self {
        Rational::zero()
    }
    fn one() -> Self {
        Rational::one()
    }
    fn from_q(q: &Rational) -> Self {
        q.clone()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn abs(&self) -> Self {
        Rational::abs(self)
    }
    fn to_f64(&self) -> f64 {
        Rational::to_f64(self)
    }
    fn negligible(&self) -> bool {
        self.is_zero()
    }
    fn is_exact_zero(&self) -> bool {
        self.is_zero()
    }
    fn cmp(&self, o: &Self) -> Ordering {
        Ord::cmp(self, o)
    }
    fn dual_tol() -> Self {
        Rational::zero()
    }
    fn primal_tol() -> Self {
        Rational::zero()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Optimal,
    Infeasible,
    Unbounded,
    Resource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

const NONE: usize = usize::MAX;

struct Engine<T: Scalar> {
    m: usize,
    n: usize,
    cols: Vec<Vec<(usize, T)>>,
    lo: Vec<Option<T>>,
    hi: Vec<Option<T>>,
    cost2: Vec<T>,
    cost: Vec<T>,
    x: Vec<T>,
    at_upper: Vec<bool>,
    basis: Vec<usize>,
    pos: Vec<usize>,
    binv: Vec<T>,
    n_art: usize,
    iters: usize,
    cap: usize,
    since_refactor: usize,
}

impl<T: Scalar> Engine<T> {
    /// Columns and bounds of `form` with artificials fixed at zero.
    fn new(form: &Form, cap: usize) -> Self {
        let conv = |c: &Vec<(usize, Rational)>| c.iter().map(|(i, v)| (*i, T::from_q(v))).collect::<Vec<_>>();
        let mut cols: Vec<Vec<(usize, T)>> = form.cols.iter().map(conv).collect();
        let mut lo: Vec<Option<T>> = form.lo.iter().map(|b| b.as_ref().map(T::from_q)).collect();
        let mut hi: Vec<Option<T>> = form.hi.iter().map(|b| b.as_ref().map(T::from_q)).collect();
        let mut cost2: Vec<T> = form.cost.iter().map(T::from_q).collect();
        for (i, s, _) in &form.artificials {
            cols.push(vec![(*i, T::from_q(s))]);
            lo.push(Some(T::zero()));
            hi.push(Some(T::zero()));
            cost2.push(T::zero());
        }
        let ncols = cols.len();
        Engine {
            m: form.m,
            n: form.n,
            cols,
            lo,
            hi,
            cost: cost2.clone(),
            cost2,
            x: vec![T::zero(); ncols],
            at_upper: vec![false; ncols],
            basis: vec![NONE; form.m],
            pos: vec![NONE; ncols],
            binv: Vec::new(),
            n_art: form.artificials.len(),
            iters: 0,
            cap,
            since_refactor: 0,
        }
    }

    /// Starting basis: activities of satisfied rows and artificials of the others.
    fn cold(form: &Form, cap: usize) -> Self {
        let mut e = Self::new(form, cap);
        let m = e.m;
        for j in 0..form.n + form.m {
            e.x[j] = T::from_q(&form.start[j]);
            e.at_upper[j] = form.start_upper[j];
        }
        let mut art_row = vec![NONE; m];
        for (a, (i, _, _)) in form.artificials.iter().enumerate() {
            art_row[*i] = form.n + form.m + a;
        }
        e.binv = vec![T::zero(); m * m];
        for i in 0..m {
            let col = if art_row[i] != NONE { art_row[i] } else { form.n + i };
            e.basis[i] = col;
            e.pos[col] = i;
            // Basis columns are ±e_i.
            let coef = e.cols[col][0].1.clone();
            e.binv[i * m + i] = T::one().div(&coef);
        }
        for (a, (_, _, v)) in form.artificials.iter().enumerate() {
            let col = form.n + form.m + a;
            e.x[col] = T::from_q(v);
            e.hi[col] = None;
        }
        e
    }

    fn ncols(&self) -> usize {
        self.cols.len()
    }

    fn is_fixed(&self, j: usize) -> bool {
        match (&self.lo[j], &self.hi[j]) {
            (Some(l), Some(h)) => l.cmp(h) != Ordering::Less,
            _ => false,
        }
    }

    fn run_two_phase(&mut self) -> Outcome {
        if self.n_art > 0 {
            let first_art = self.n + self.m;
            self.cost = (0..self.ncols()).map(|j| if j >= first_art { T::one().neg() } else { T::zero() }).collect();
            match self.run_phase(Phase::One) {
                Outcome::Optimal => {}
                Outcome::Unbounded => unreachable!("phase one is bounded"),
                o => return o,
            }
            let infeas = (first_art..self.ncols()).fold(T::zero(), |acc, j| acc.add(&self.x[j]));
            let tol = if T::EXACT { T::zero() } else { T::from_q(&Rational::new(1, 10_000_000)) };
            if infeas.cmp(&tol) == Ordering::Greater {
                return Outcome::Infeasible;
            }
            for j in first_art..self.ncols() {
                self.hi[j] = Some(T::zero());
                if self.pos[j] == NONE {
                    self.x[j] = T::zero();
                    self.at_upper[j] = false;
                }
            }
        }
        self.run_phase(Phase::Two)
    }

    fn price(&self) -> Vec<T> {
        let m = self.m;
        let mut y = vec![T::zero(); m];
        for i in 0..m {
            let c = &self.cost[self.basis[i]];
            if c.is_exact_zero() {
                continue;
            }
            let row = &self.binv[i * m..(i + 1) * m];
            for k in 0..m {
                if !row[k].is_exact_zero() {
                    y[k] = y[k].add(&c.mul(&row[k]));
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, y: &[T]) -> T {
        let mut d = self.cost[j].clone();
        for (i, a) in &self.cols[j] {
            if !y[*i].is_exact_zero() {
                d = d.sub(&y[*i].mul(a));
            }
        }
        d
    }

    fn ftran(&self, j: usize) -> Vec<T> {
        let m = self.m;
        let mut alpha = vec![T::zero(); m];
        for (k, a) in &self.cols[j] {
            for i in 0..m {
                let b = &self.binv[i * m + k];
                if !b.is_exact_zero() {
                    alpha[i] = alpha[i].add(&b.mul(a));
                }
            }
        }
        alpha
    }

    fn pivot(&mut self, r: usize, alpha: &[T]) {
        let m = self.m;
        let piv = alpha[r].clone();
        let mut nz: Vec<usize> = Vec::new();
        for k in 0..m {
            let v = &self.binv[r * m + k];
            if !v.is_exact_zero() {
                self.binv[r * m + k] = v.div(&piv);
                nz.push(k);
            }
        }
        for i in 0..m {
            if i == r || alpha[i].is_exact_zero() {
                continue;
            }
            let f = alpha[i].clone();
            for &k in &nz {
                let delta = f.mul(&self.binv[r * m + k]);
                let cur = &self.binv[i * m + k];
                let v = cur.sub(&delta);
                self.binv[i * m + k] = if !T::EXACT && v.negligible() { T::zero() } else { v };
            }
        }
    }

    /// Recomputes the basis inverse and basic values from scratch (floats only).
    fn refactor(&mut self) -> bool {
        let m = self.m;
        let mut a = vec![T::zero(); m * m];
        for (r, &j) in self.basis.iter().enumerate() {
            for (i, v) in &self.cols[j] {
                a[i * m + r] = v.clone();
            }
        }
        let mut inv = vec![T::zero(); m * m];
        for i in 0..m {
            inv[i * m + i] = T::one();
        }
        for c in 0..m {
            let mut best = NONE;
            for r in c..m {
                if !a[r * m + c].negligible()
                    && (best == NONE || a[r * m + c].abs().cmp(&a[best * m + c].abs()) == Ordering::Greater)
                {
                    best = r;
                }
            }
            if best == NONE {
                return false;
            }
            if best != c {
                for k in 0..m {
                    a.swap(c * m + k, best * m + k);
                    inv.swap(c * m + k, best * m + k);
                }
            }
            let p = a[c * m + c].clone();
            for k in 0..m {
                a[c * m + k] = a[c * m + k].div(&p);
                inv[c * m + k] = inv[c * m + k].div(&p);
            }
            for r in 0..m {
                if r == c || a[r * m + c].is_exact_zero() {
                    continue;
                }
                let f = a[r * m + c].clone();
                for k in 0..m {
                    if !a[c * m + k].is_exact_zero() {
                        a[r * m + k] = a[r * m + k].sub(&f.mul(&a[c * m + k]));
                    }
                    if !inv[c * m + k].is_exact_zero() {
                        inv[r * m + k] = inv[r * m + k].sub(&f.mul(&inv[c * m + k]));
                    }
                }
            }
        }
        // `a` is now the identity in basis order: row r of inv is B⁻¹ row r.
        self.binv = inv;
        self.recompute_basics();
        true
    }

    /// `x_B = −B⁻¹ Σ_{j nonbasic} a_j x_j`.
    fn recompute_basics(&mut self) {
        let m = self.m;
        let mut rhs = vec![T::zero(); m];
        for j in 0..self.ncols() {
            if self.pos[j] != NONE || self.x[j].is_exact_zero() {
                continue;
            }
            for (i, a) in &self.cols[j] {
                rhs[*i] = rhs[*i].sub(&a.mul(&self.x[j]));
            }
        }
        for r in 0..m {
            let mut v = T::zero();
            for k in 0..m {
                let b = &self.binv[r * m + k];
                if !b.is_exact_zero() && !rhs[k].is_exact_zero() {
                    v = v.add(&b.mul(&rhs[k]));
                }
            }
            self.x[self.basis[r]] = v;
        }
    }

    fn objective_value(&self) -> T {
        (0..self.ncols()).fold(T::zero(), |acc, j| {
            if self.cost[j].is_exact_zero() {
                acc
            } else {
                acc.add(&self.cost[j].mul(&self.x[j]))
            }
        })
    }

    fn run_phase(&mut self, phase: Phase) -> Outcome {
        if phase == Phase::Two {
            self.cost = self.cost2.clone();
        }
        let dtol = T::dual_tol();
        let mut bland = T::EXACT;
        let mut best_obj = self.objective_value();
        let mut stall = 0usize;
        loop {
            if self.iters >= self.cap {
                return Outcome::Resource;
            }
            if !T::EXACT && self.since_refactor >= 100 {
                self.since_refactor = 0;
                if !self.refactor() {
                    return Outcome::Resource;
                }
            }
            let y = self.price();
            let mut enter = NONE;
            let mut enter_dir = 0i8;
            let mut best_d = T::zero();
            for j in 0..self.ncols() {
                if self.pos[j] != NONE || self.is_fixed(j) {
                    continue;
                }
                let d = self.reduced_cost(j, &y);
                let dir = if !self.at_upper[j] && d.cmp(&dtol) == Ordering::Greater {
                    1
                } else if self.at_upper[j] && d.cmp(&dtol.neg()) == Ordering::Less {
                    -1
                } else {
                    continue;
                };
                // A nonbasic variable without the bound it sits at cannot move
                // the other way; free columns never occur.
                if bland {
                    enter = j;
                    enter_dir = dir;
                    break;
                }
                if enter == NONE || d.abs().cmp(&best_d) == Ordering::Greater {
                    enter = j;
                    enter_dir = dir;
                    best_d = d.abs();
                }
            }
            if enter == NONE {
                if !T::EXACT && self.since_refactor > 0 {
                    // Confirm optimality on a fresh factorization.
                    self.since_refactor = 0;
                    if !self.refactor() {
                        return Outcome::Resource;
                    }
                    if self.max_primal_infeasibility() > 1e-7 {
                        return Outcome::Resource;
                    }
                    continue;
                }
                return Outcome::Optimal;
            }
            let alpha = self.ftran(enter);
            let Some((theta, leave)) = self.ratio_test(enter, enter_dir, &alpha) else {
                return Outcome::Unbounded;
            };
            self.apply(enter, enter_dir, theta, leave, &alpha);
            self.iters += 1;
            self.since_refactor += 1;
            if !T::EXACT {
                let obj = self.objective_value();
                if obj.cmp(&best_obj.add(&T::from_q(&Rational::new(1, 1_000_000_000)))) == Ordering::Greater {
                    best_obj = obj;
                    stall = 0;
                    bland = false;
                } else {
                    stall += 1;
                    if stall > 50 {
                        bland = true;
                    }
                }
            }
        }
    }

    fn max_primal_infeasibility(&self) -> f64 {
        let mut worst = 0.0f64;
        for &j in &self.basis {
            if let Some(l) = &self.lo[j] {
                worst = worst.max(l.sub(&self.x[j]).to_f64());
            }
            if let Some(h) = &self.hi[j] {
                worst = worst.max(self.x[j].sub(h).to_f64());
            }
        }
        worst
    }

    /// Step length and leaving row (`None` means the entering variable moves
    /// to its opposite bound). `None` overall means unbounded.
    fn ratio_test(&self, enter: usize, dir: i8, alpha: &[T]) -> Option<(T, Option<(usize, bool)>)> {
        let own = match (&self.lo[enter], &self.hi[enter]) {
            (Some(l), Some(h)) => Some(h.sub(l)),
            _ => None,
        };
        let ptol = T::primal_tol();
        // (ratio, row, hits_upper)
        let mut cands: Vec<(T, usize, bool)> = Vec::new();
        let mut relaxed_min: Option<T> = None;
        for i in 0..self.m {
            let a = &alpha[i];
            if a.negligible() {
                continue;
            }
            let b = self.basis[i];
            // Basic i moves by −dir·α_i per unit step.
            let decreasing = (a.cmp(&T::zero()) == Ordering::Greater) == (dir > 0);
            let (slack, hits_upper) = if decreasing {
                match &self.lo[b] {
                    Some(l) => (self.x[b].sub(l), false),
                    None => continue,
                }
            } else {
                match &self.hi[b] {
                    Some(h) => (h.sub(&self.x[b]), true),
                    None => continue,
                }
            };
            let rate = a.abs();
            let slack = if slack.cmp(&T::zero()) == Ordering::Less { T::zero() } else { slack };
            let relaxed = slack.add(&ptol).div(&rate);
            if relaxed_min.as_ref().is_none_or(|r| relaxed.cmp(r) == Ordering::Less) {
                relaxed_min = Some(relaxed);
            }
            cands.push((slack.div(&rate), i, hits_upper));
        }
        let bound = match (&relaxed_min, &own) {
            (None, None) => return None,
            (Some(r), None) => r.clone(),
            (None, Some(o)) => return Some((o.clone(), None)),
            (Some(r), Some(o)) => {
                if o.cmp(r) != Ordering::Greater {
                    return Some((o.clone(), None));
                }
                r.clone()
            }
        };
        let mut best: Option<(T, usize, bool)> = None;
        for (ratio, i, up) in cands {
            if ratio.cmp(&bound) == Ordering::Greater {
                continue;
            }
            best = match best {
                None => Some((ratio, i, up)),
                Some(cur) => {
                    let better = if T::EXACT {
                        // Bland: smallest ratio, ties to the smallest column index.
                        match ratio.cmp(&cur.0) {
                            Ordering::Less => true,
                            Ordering::Equal => self.basis[i] < self.basis[cur.1],
                            Ordering::Greater => false,
                        }
                    } else {
                        // Harris: largest pivot among admissible rows.
                        alpha[i].abs().cmp(&alpha[cur.1].abs()) == Ordering::Greater
                    };
                    if better {
                        Some((ratio, i, up))
                    } else {
                        Some(cur)
                    }
                }
            };
        }
        let (ratio, i, up) = best.expect("some row attains the relaxed minimum");
        Some((ratio, Some((i, up))))
    }

    fn apply(&mut self, enter: usize, dir: i8, theta: T, leave: Option<(usize, bool)>, alpha: &[T]) {
        let step = if dir > 0 { theta.clone() } else { theta.neg() };
        if !step.is_exact_zero() {
            self.x[enter] = self.x[enter].add(&step);
            for i in 0..self.m {
                if !alpha[i].is_exact_zero() {
                    let b = self.basis[i];
                    self.x[b] = self.x[b].sub(&step.mul(&alpha[i]));
                }
            }
        }
        match leave {
            None => {
                self.at_upper[enter] = dir > 0;
                let target = if dir > 0 { &self.hi[enter] } else { &self.lo[enter] };
                self.x[enter] = target.clone().expect("flip to a finite bound");
            }
            Some((r, hits_upper)) => {
                let out = self.basis[r];
                self.x[out] = if hits_upper { self.hi[out].clone() } else { self.lo[out].clone() }.expect("finite bound");
                self.at_upper[out] = hits_upper;
                self.pos[out] = NONE;
                self.pivot(r, alpha);
                self.basis[r] = enter;
                self.pos[enter] = r;
                self.at_upper[enter] = false;
            }
        }
    }

    /// Rebuilds a float engine's final basis exactly. Returns false if the
    /// basis is singular in exact arithmetic or not primal feasible.
    fn warm_start<F: Scalar>(&mut self, src: &Engine<F>) -> bool {
        let m = self.m;
        let first_logical = self.n;
        // Nonbasic positions and statuses.
        for j in 0..self.ncols() {
            self.at_upper[j] = src.at_upper[j];
            let bound = if self.at_upper[j] { &self.hi[j] } else { &self.lo[j] };
            self.x[j] = match bound {
                Some(b) => b.clone(),
                None => T::zero(),
            };
        }
        self.binv = vec![T::zero(); m * m];
        for i in 0..m {
            let col = first_logical + i;
            self.basis[i] = col;
            self.pos[col] = i;
            self.binv[i * m + i] = T::one().neg();
        }
        let target: Vec<bool> = (0..self.ncols()).map(|j| src.pos[j] != NONE).collect();
        for (q, &tq) in target.iter().enumerate() {
            if !tq || self.pos[q] != NONE {
                continue;
            }
            let alpha = self.ftran(q);
            let r = (0..m).find(|&r| {
                let b = self.basis[r];
                b >= first_logical && b < first_logical + m && !target[b] && !alpha[r].is_exact_zero()
            });
            let Some(r) = r else { return false };
            let out = self.basis[r];
            self.pos[out] = NONE;
            self.pivot(r, &alpha);
            self.basis[r] = q;
            self.pos[q] = r;
        }
        for j in 0..self.ncols() {
            if self.pos[j] == NONE {
                let bound = if self.at_upper[j] { &self.hi[j] } else { &self.lo[j] };
                if bound.is_none() {
                    // A float nonbasic without that bound: put it at its other bound.
                    self.at_upper[j] = !self.at_upper[j];
                    let other = if self.at_upper[j] { &self.hi[j] } else { &self.lo[j] };
                    match other {
                        Some(b) => self.x[j] = b.clone(),
                        None => return false,
                    }
                }
            }
        }
        self.recompute_basics();
        for &b in &self.basis {
            if let Some(l) = &self.lo[b] {
                if self.x[b].cmp(l) == Ordering::Less {
                    return false;
                }
            }
            if let Some(h) = &self.hi[b] {
                if self.x[b].cmp(h) == Ordering::Greater {
                    return false;
                }
            }
        }
        true
    }
}

impl Engine<Rational> {
    /// Program-named primal and transpose-named dual values.
    fn extract(&self, lp: &LinearProgram, form: &Form) -> SolveResult {
        self.cost.iter().zip(&self.cost2).for_each(|(a, b)| debug_assert_eq!(a, b));
        let y = self.price();
        let mut primal = BTreeMap::new();
        for (j, v) in lp.vars().iter().enumerate() {
            primal.insert(v.name.clone(), self.x[j].clone());
        }
        let sense_sign = if lp.sense == Sense::Max { Rational::one() } else { -Rational::one() };
        let mut dual = BTreeMap::new();
        for (i, r) in lp.rows().iter().enumerate() {
            let natural = matches!((lp.sense, r.rel), (Sense::Max, Relation::Le) | (Sense::Min, Relation::Ge));
            let v = &sense_sign * &y[i];
            dual.insert(VarName::new(r.label.clone()), if natural { v } else { -v });
        }
        for (j, v) in lp.vars().iter().enumerate() {
            let d = self.reduced_cost(j, &y);
            if v.hi.is_some() {
                let val = if d.is_positive() { d.clone() } else { Rational::zero() };
                dual.insert(upper_bound_dual_name(&v.name), val);
            }
            if v.lo.is_positive() {
                let val = if d.is_negative() { -&d } else { Rational::zero() };
                dual.insert(lower_bound_dual_name(&v.name), val);
            }
        }
        let obj: Rational = lp.objective().iter().map(|(j, c)| c * &self.x[*j]).sum();
        let _ = form;
        SolveResult {
            status: Status::Optimal,
            objective: Some(obj),
            primal: Some(Assignment::Exact(primal)),
            dual: Some(Assignment::Exact(dual)),
            float_iterations: 0,
            exact_iterations: self.iters,
            transposed: false,
        }
    }
}
