//! The enveloping algebra `U_{F_p}(gr-bar(I))` in PBW normal form.
//!
//! Monomials are nondecreasing words in the indices of the ordered reduced basis.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graded::{GradedLie, Symbol};
use crate::linalg::Echelon;

pub type Word = Vec<u16>;

/// An element of `U` as a combination of sorted words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PbwElement {
    p: u64,
    terms: BTreeMap<Word, u64>,
}

impl PbwElement {
    pub fn zero(p: u64) -> Self {
        PbwElement {
            p,
            terms: BTreeMap::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &BTreeMap<Word, u64> {
        &self.terms
    }

    pub fn add_term(&mut self, w: Word, c: u64) {
        let c = c % self.p;
        if c == 0 {
            return;
        }
        let v = (self.terms.get(&w).copied().unwrap_or(0) + c) % self.p;
        if v == 0 {
            self.terms.remove(&w);
        } else {
            self.terms.insert(w, v);
        }
    }

    pub fn add(&self, o: &PbwElement) -> PbwElement {
        let mut out = self.clone();
        for (w, &c) in &o.terms {
            out.add_term(w.clone(), c);
        }
        out
    }

    pub fn scale(&self, k: u64) -> PbwElement {
        let mut out = PbwElement::zero(self.p);
        for (w, &c) in &self.terms {
            out.add_term(w.clone(), c * (k % self.p));
        }
        out
    }
}

/// Rewriting data for `U(gr-bar(I))`.
#[derive(Debug)]
pub struct Enveloping {
    lie: GradedLie,
    symbols: Vec<Symbol>,
    grades: Vec<i64>,
    /// `[s_i, s_j]` as sparse combinations of symbol indices.
    table: Vec<Vec<Vec<(u16, u64)>>>,
    cache: Mutex<HashMap<Word, Vec<(Word, u64)>>>,
}

impl Enveloping {
    pub fn new(lie: GradedLie) -> Result<Self> {
        if !lie.is_reduced() {
            return Err(Error::InvalidArgument("the enveloping algebra is built on the reduced algebra".into()));
        }
        let symbols = lie.basis(0);
        let index: HashMap<Symbol, u16> = symbols.iter().enumerate().map(|(i, &s)| (s, i as u16)).collect();
        let grades = symbols.iter().map(|&s| lie.grade_units(s)).collect();
        let table = symbols
            .iter()
            .map(|&a| {
                symbols
                    .iter()
                    .map(|&b| {
                        lie.bracket_symbols(a, b)
                            .terms()
                            .iter()
                            .map(|(s, &c)| (index[s], c))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(Enveloping {
            lie,
            symbols,
            grades,
            table,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn lie(&self) -> &GradedLie {
        &self.lie
    }

    pub fn p(&self) -> u64 {
        self.lie.p()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn index_of(&self, s: Symbol) -> Option<u16> {
        self.symbols.iter().position(|&t| t == s).map(|i| i as u16)
    }

    pub fn grade_of_word(&self, w: &[u16]) -> i64 {
        w.iter().map(|&i| self.grades[i as usize]).sum()
    }

    pub fn one(&self) -> PbwElement {
        let mut e = PbwElement::zero(self.p());
        e.add_term(Vec::new(), 1);
        e
    }

    pub fn symbol(&self, i: u16) -> PbwElement {
        let mut e = PbwElement::zero(self.p());
        e.add_term(vec![i], 1);
        e
    }

    /// Normal form of an arbitrary word, memoized.
    pub fn normal_form(&self, w: &[u16]) -> Vec<(Word, u64)> {
        let Some(i) = (0..w.len().saturating_sub(1)).find(|&i| w[i] > w[i + 1]) else {
            return vec![(w.to_vec(), 1)];
        };
        if let Some(hit) = self.cache.lock().expect("cache lock").get(w) {
            return hit.clone();
        }
        let p = self.p();
        let mut acc: BTreeMap<Word, u64> = BTreeMap::new();
        let mut push = |items: Vec<(Word, u64)>, k: u64| {
            for (v, c) in items {
                let e = acc.entry(v).or_insert(0);
                *e = (*e + c * k) % p;
            }
        };
        let mut swapped = w.to_vec();
        swapped.swap(i, i + 1);
        push(self.normal_form(&swapped), 1);
        for &(s, c) in &self.table[w[i] as usize][w[i + 1] as usize] {
            let mut shorter = Vec::with_capacity(w.len() - 1);
            shorter.extend_from_slice(&w[..i]);
            shorter.push(s);
            shorter.extend_from_slice(&w[i + 2..]);
            push(self.normal_form(&shorter), c);
        }
        let out: Vec<(Word, u64)> = acc.into_iter().filter(|(_, c)| *c != 0).collect();
        self.cache.lock().expect("cache lock").insert(w.to_vec(), out.clone());
        out
    }

    /// Straightening that swaps a randomly chosen adjacent inversion at each step.
    pub fn normal_form_randomized<R: Rng>(&self, w: &[u16], rng: &mut R) -> PbwElement {
        let p = self.p();
        let mut out = PbwElement::zero(p);
        let mut stack: Vec<(Word, u64)> = vec![(w.to_vec(), 1)];
        while let Some((w, c)) = stack.pop() {
            let descents: Vec<usize> = (0..w.len().saturating_sub(1)).filter(|&i| w[i] > w[i + 1]).collect();
            if descents.is_empty() {
                out.add_term(w, c);
                continue;
            }
            let i = descents[rng.gen_range(0..descents.len())];
            let mut swapped = w.clone();
            swapped.swap(i, i + 1);
            stack.push((swapped, c));
            for &(s, x) in &self.table[w[i] as usize][w[i + 1] as usize] {
                let mut shorter = w[..i].to_vec();
                shorter.push(s);
                shorter.extend_from_slice(&w[i + 2..]);
                stack.push((shorter, c * x % p));
            }
        }
        out
    }

    pub fn multiply(&self, x: &PbwElement, y: &PbwElement) -> PbwElement {
        let mut out = PbwElement::zero(self.p());
        for (a, &ca) in &x.terms {
            for (b, &cb) in &y.terms {
                let mut w = a.clone();
                w.extend_from_slice(b);
                for (v, c) in self.normal_form(&w) {
                    out.add_term(v, c * (ca * cb % self.p()));
                }
            }
        }
        out
    }

    /// Sorted words of total grade `units`, in lexicographic order.
    pub fn monomials(&self, units: i64) -> Vec<Word> {
        fn rec(env: &Enveloping, start: usize, left: i64, cur: &mut Word, out: &mut Vec<Word>) {
            if left == 0 {
                out.push(cur.clone());
                return;
            }
            for i in start..env.symbols.len() {
                let g = env.grades[i];
                if g <= left {
                    cur.push(i as u16);
                    rec(env, i, left - g, cur, out);
                    cur.pop();
                }
            }
        }
        let mut out = Vec::new();
        rec(self, 0, units, &mut Vec::new(), &mut out);
        out
    }

    /// Dimension of the grade-`units` slice from the PBW generating function.
    pub fn graded_dimension(&self, units: i64) -> u64 {
        hilbert_coefficients(&self.grades, units)[units as usize]
    }

    /// The straightening rules `s_i s_j -> s_j s_i + [s_i, s_j]` for `i > j`.
    pub fn relations_json(&self) -> Value {
        let mut out = Vec::new();
        for i in 0..self.symbols.len() {
            for j in 0..i {
                let br: Vec<Value> = self.table[i][j]
                    .iter()
                    .map(|&(s, c)| json!({"symbol": self.lie.label(self.symbols[s as usize]), "coeff": c}))
                    .collect();
                out.push(json!({
                    "left": self.lie.label(self.symbols[i]),
                    "right": self.lie.label(self.symbols[j]),
                    "swap": [self.lie.label(self.symbols[j]), self.lie.label(self.symbols[i])],
                    "correction": br,
                }));
            }
        }
        Value::Array(out)
    }

    /// The set `{u_gamma : gamma in Phi_1} u {lambda : lambda in B}` with all twists.
    pub fn expected_generators(&self) -> Vec<u16> {
        let cochar = self.lie.cocharacters();
        (0..self.symbols.len() as u16)
            .filter(|&i| match self.symbols[i as usize] {
                Symbol::Root { gamma, .. } => self.lie.root_system().class_of(gamma) == 1,
                Symbol::Torus { lambda, .. } => cochar.is_central(lambda),
            })
            .collect()
    }

    /// Span of all brackets `[s_i, s_j]` inside the Lie algebra.
    fn derived_span(&self) -> Echelon {
        let n = self.symbols.len();
        let mut e = Echelon::new(self.p(), n);
        for i in 0..n {
            for j in 0..n {
                let v: Vec<(usize, u64)> = self.table[i][j].iter().map(|&(s, c)| (s as usize, c)).collect();
                if !v.is_empty() {
                    e.insert_sparse(&v);
                }
            }
        }
        e
    }

    /// Generation by iterated brackets and the minimality certificate.
    pub fn minimal_generating_set(&self) -> Result<GeneratorCertificate> {
        let n = self.symbols.len();
        let p = self.p();
        let gens = self.expected_generators();
        let unit = |i: usize| {
            let mut v = vec![0u32; n];
            v[i] = 1;
            v
        };
        let mut span = Echelon::new(p, n);
        let mut frontier: Vec<Vec<u32>> = Vec::new();
        for &g in &gens {
            if span.insert(unit(g as usize)) {
                frontier.push(unit(g as usize));
            }
        }
        let mut rounds = 0;
        while !frontier.is_empty() && !span.is_full() {
            rounds += 1;
            let mut next = Vec::new();
            for v in &frontier {
                for &g in &gens {
                    let mut w = vec![0u64; n];
                    for (i, &c) in v.iter().enumerate() {
                        if c == 0 {
                            continue;
                        }
                        for &(s, x) in &self.table[g as usize][i] {
                            w[s as usize] = (w[s as usize] + c as u64 * x) % p;
                        }
                    }
                    let w: Vec<u32> = w.into_iter().map(|x| x as u32).collect();
                    if w.iter().any(|&x| x != 0) && span.insert(w.clone()) {
                        next.push(w);
                    }
                }
            }
            frontier = next;
        }
        if !span.is_full() {
            let missing = (0..n).find(|&i| !span.contains(&unit(i))).expect("some symbol missing");
            return Err(Error::GenerationFailure(self.lie.label(self.symbols[missing])));
        }
        // Minimality: the generators must map to a basis of g / [g, g].
        let derived = self.derived_span();
        let mut quotient = derived.clone();
        for &g in &gens {
            if !quotient.insert(unit(g as usize)) {
                return Err(Error::GenerationFailure(format!(
                    "{} is redundant modulo brackets",
                    self.lie.label(self.symbols[g as usize])
                )));
            }
        }
        let min_bracket_grade = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .flat_map(|(i, j)| self.table[i][j].iter().map(|&(s, _)| self.grades[s as usize]))
            .min()
            .unwrap_or(i64::MAX);
        let certificate = GeneratorCertificate {
            generators: gens.iter().map(|&g| self.lie.label(self.symbols[g as usize])).collect(),
            closure_rounds: rounds,
            reached: span.dim(),
            basis_size: n,
            abelianization_dim: n - derived.dim(),
            lowest_bracket_grade_units: min_bracket_grade,
        };
        if !quotient.is_full() || certificate.abelianization_dim != gens.len() || min_bracket_grade < 2 {
            return Err(Error::GenerationFailure("minimality certificate failed".into()));
        }
        Ok(certificate)
    }

    /// Computes the commutator ideal slice by slice up to `bound` (units of `1/h`)
    /// and compares with the polynomial ring on the expected generators.
    pub fn commutative_quotient(&self, bound: i64) -> Result<QuotientReport> {
        let p = self.p();
        let n = self.symbols.len();
        let gens = self.expected_generators();
        let derived = self.derived_span();
        // The symbols outside the generator set must span [g, g].
        let mut others = Echelon::new(p, n);
        for i in 0..n as u16 {
            if !gens.contains(&i) {
                let mut v = vec![0u32; n];
                v[i as usize] = 1;
                others.insert(v);
            }
        }
        if !others.same_space(&derived) {
            return Err(Error::QuotientMismatch(
                "brackets do not span the non-generator symbols".into(),
            ));
        }
        let gen_grades: Vec<i64> = gens.iter().map(|&g| self.grades[g as usize]).collect();
        let poly = hilbert_coefficients(&gen_grades, bound);
        let brackets: Vec<PbwElement> = derived
            .rows()
            .iter()
            .map(|r| {
                let mut e = PbwElement::zero(p);
                for (i, &c) in r.iter().enumerate() {
                    e.add_term(vec![i as u16], c as u64);
                }
                e
            })
            .collect();
        let mut slices = Vec::new();
        let mut ideal_by_grade: BTreeMap<i64, (Vec<Word>, Echelon)> = BTreeMap::new();
        for d in 1..=bound {
            let words = self.monomials(d);
            let index: HashMap<&Word, usize> = words.iter().enumerate().map(|(i, w)| (w, i)).collect();
            let mut ideal = Echelon::new(p, words.len().max(1));
            let to_dense = |e: &PbwElement| -> Vec<u32> {
                let mut v = vec![0u32; words.len().max(1)];
                for (w, &c) in &e.terms {
                    v[index[w]] = c as u32;
                }
                v
            };
            for b in &brackets {
                let gb = self.homogeneous_grade(b);
                if gb > d {
                    continue;
                }
                for m in self.monomials(d - gb) {
                    let mut me = PbwElement::zero(p);
                    me.add_term(m, 1);
                    let prod = self.multiply(&me, b);
                    if !prod.is_zero() {
                        ideal.insert(to_dense(&prod));
                    }
                    if ideal.is_full() {
                        break;
                    }
                }
            }
            let dim_u = words.len() as u64;
            debug_assert_eq!(dim_u, self.graded_dimension(d));
            let quotient_dim = dim_u - ideal.dim() as u64;
            if quotient_dim != poly[d as usize] {
                return Err(Error::QuotientMismatch(format!(
                    "grade {d}/{}: quotient has dimension {quotient_dim}, polynomial ring {}",
                    self.lie.h(),
                    poly[d as usize]
                )));
            }
            slices.push(QuotientSlice {
                grade_units: d,
                pbw_dim: dim_u,
                ideal_dim: ideal.dim() as u64,
                quotient_dim,
            });
            ideal_by_grade.insert(d, (words, ideal));
        }
        // Two-sidedness: J_d * s lands in J_{d + grade(s)}.
        for (&d, (words, ideal)) in &ideal_by_grade {
            for row in ideal.rows() {
                let mut e = PbwElement::zero(p);
                for (i, &c) in row.iter().enumerate() {
                    if c != 0 {
                        e.add_term(words[i].clone(), c as u64);
                    }
                }
                for s in 0..n as u16 {
                    let t = d + self.grades[s as usize];
                    let Some((twords, tideal)) = ideal_by_grade.get(&t) else {
                        continue;
                    };
                    let prod = self.multiply(&e, &self.symbol(s));
                    let mut v = vec![0u32; twords.len()];
                    for (w, &c) in &prod.terms {
                        let k = twords.iter().position(|x| x == w).expect("word of the right grade");
                        v[k] = c as u32;
                    }
                    if !tideal.contains(&v) {
                        return Err(Error::QuotientMismatch(format!("ideal not closed at grade {t}")));
                    }
                }
            }
        }
        Ok(QuotientReport {
            generators: gens.iter().map(|&g| self.lie.label(self.symbols[g as usize])).collect(),
            grade_bound_units: bound,
            slices,
        })
    }

    fn homogeneous_grade(&self, e: &PbwElement) -> i64 {
        e.terms.keys().next().map(|w| self.grade_of_word(w)).unwrap_or(0)
    }
}

/// Coefficients `0..=max` of `prod_i (1 - t^{g_i})^{-1}`.
pub fn hilbert_coefficients(grades: &[i64], max: i64) -> Vec<u64> {
    let mut dp = vec![0u64; max as usize + 1];
    dp[0] = 1;
    for &g in grades {
        let g = g as usize;
        for d in g..=max as usize {
            dp[d] += dp[d - g];
        }
    }
    dp
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneratorCertificate {
    pub generators: Vec<String>,
    pub closure_rounds: usize,
    pub reached: usize,
    pub basis_size: usize,
    pub abelianization_dim: usize,
    pub lowest_bracket_grade_units: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuotientSlice {
    pub grade_units: i64,
    pub pbw_dim: u64,
    pub ideal_dim: u64,
    pub quotient_dim: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuotientReport {
    pub generators: Vec<String>,
    pub grade_bound_units: i64,
    pub slices: Vec<QuotientSlice>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chevalley::StructureConstants;
    use crate::padic::RingSpec;
    use crate::roots::RootSystem;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn env(label: &str, p: u64, f: usize, d_z: usize) -> Enveloping {
        let rs = Arc::new(RootSystem::from_label(label).unwrap());
        let sc = Arc::new(StructureConstants::compute(rs).unwrap());
        let lie = GradedLie::new(sc, RingSpec::new(p, f, 2).unwrap(), d_z, true).unwrap();
        Enveloping::new(lie).unwrap()
    }

    #[test]
    fn single_straightening_step() {
        let u = env("A2", 5, 1, 0);
        let rs = u.lie().root_system().clone();
        let (a1, a2) = (rs.simple(0), rs.simple(1));
        let i1 = u.index_of(u.lie().root_symbol(a1, 0)).unwrap();
        let i2 = u.index_of(u.lie().root_symbol(a2, 0)).unwrap();
        let it = u.index_of(u.lie().root_symbol(rs.add(a1, a2).unwrap(), 0)).unwrap();
        assert!(i1 < i2);
        let prod = u.multiply(&u.symbol(i2), &u.symbol(i1));
        let n = u.lie().constants().n(a2, a1);
        let mut expect = PbwElement::zero(5);
        expect.add_term(vec![i1, i2], 1);
        expect.add_term(vec![it], crate::padic::reduce_i64(n, 5));
        assert_eq!(prod, expect);
        assert_eq!(u.multiply(&prod, &u.one()), prod);
    }

    #[test]
    fn torus_symbols_are_central() {
        let u = env("A2", 5, 1, 0);
        let t = u.index_of(u.lie().torus_symbol(0, 0)).unwrap();
        for i in 0..u.symbols().len() as u16 {
            assert_eq!(u.multiply(&u.symbol(t), &u.symbol(i)), u.multiply(&u.symbol(i), &u.symbol(t)));
        }
    }

    #[test]
    fn graded_dimension_matches_enumeration() {
        let u = env("A2", 5, 1, 0);
        assert_eq!(u.graded_dimension(0), 1);
        assert_eq!(u.graded_dimension(1), 3);
        assert_eq!(u.graded_dimension(2), 9);
        for d in 0..=6 {
            assert_eq!(u.graded_dimension(d), u.monomials(d).len() as u64);
        }
    }

    #[test]
    fn confluence_and_associativity() {
        let u = env("A2", 5, 1, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = u.symbols().len() as u16;
        for _ in 0..50 {
            let len = rng.gen_range(2..5);
            let w: Word = (0..len).map(|_| rng.gen_range(0..n)).collect();
            let det: BTreeMap<Word, u64> = u.normal_form(&w).into_iter().collect();
            assert_eq!(u.normal_form_randomized(&w, &mut rng).terms, det);
        }
        for _ in 0..30 {
            let (a, b, c) = (
                u.symbol(rng.gen_range(0..n)),
                u.symbol(rng.gen_range(0..n)),
                u.symbol(rng.gen_range(0..n)),
            );
            assert_eq!(u.multiply(&u.multiply(&a, &b), &c), u.multiply(&a, &u.multiply(&b, &c)));
        }
    }

    #[test]
    fn generators_and_quotient() {
        for (label, p, f, d_z, expected) in [("A2", 5, 1, 0, 3), ("A1", 5, 2, 0, 4), ("A1", 5, 1, 1, 3)] {
            let u = env(label, p, f, d_z);
            let cert = u.minimal_generating_set().unwrap();
            assert_eq!(cert.generators.len(), expected);
            assert_eq!(cert.reached, cert.basis_size);
            let q = u.commutative_quotient(2 * u.lie().h()).unwrap();
            assert_eq!(q.generators.len(), expected);
        }
    }
}
