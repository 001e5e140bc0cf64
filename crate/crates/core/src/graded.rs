//! The graded Lie algebra `gr(I)` over `F_p[P]` and its reduction `gr(I) (x) F_p`.
//!
//! Grades are stored in units of `1/h`. A root symbol `Root { gamma, depth: n, twist: r }`
//! stands for `gr(u_gamma(p^(n + delta_gamma) [xi]^r))` and has grade `n + k/h` with
//! `gamma in Phi_k`; a torus symbol `Torus { lambda, depth: m, twist: r }` stands for
//! `gr(lambda(1 + p^m [xi]^r))` and has grade `m`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::chevalley::StructureConstants;
use crate::error::{Error, Result};
use crate::iwahori::IwahoriElement;
use crate::padic::{reduce_i64, teichmuller, RingSpec, TruncatedUnramified as Tu};
use crate::roots::{Cocharacters, Family, RootId, RootSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Symbol {
    Root { gamma: RootId, depth: u32, twist: usize },
    Torus { lambda: usize, depth: u32, twist: usize },
}

impl Symbol {
    pub fn twist(self) -> usize {
        match self {
            Symbol::Root { twist, .. } | Symbol::Torus { twist, .. } => twist,
        }
    }

    pub fn depth(self) -> u32 {
        match self {
            Symbol::Root { depth, .. } | Symbol::Torus { depth, .. } => depth,
        }
    }

    fn with_depth(self, d: u32) -> Symbol {
        match self {
            Symbol::Root { gamma, twist, .. } => Symbol::Root { gamma, depth: d, twist },
            Symbol::Torus { lambda, twist, .. } => Symbol::Torus { lambda, depth: d, twist },
        }
    }

    fn with_twist(self, t: usize) -> Symbol {
        match self {
            Symbol::Root { gamma, depth, .. } => Symbol::Root { gamma, depth, twist: t },
            Symbol::Torus { lambda, depth, .. } => Symbol::Torus { lambda, depth, twist: t },
        }
    }
}

/// A finite `F_p`-combination of basis symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedLieElement {
    reduced: bool,
    p: u64,
    terms: BTreeMap<Symbol, u64>,
}

impl GradedLieElement {
    pub fn zero(p: u64, reduced: bool) -> Self {
        GradedLieElement {
            reduced,
            p,
            terms: BTreeMap::new(),
        }
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &BTreeMap<Symbol, u64> {
        &self.terms
    }

    pub fn coeff(&self, s: &Symbol) -> u64 {
        self.terms.get(s).copied().unwrap_or(0)
    }

    pub fn add_term(&mut self, s: Symbol, c: i64) {
        let p = self.p;
        let c = reduce_i64(c, p);
        if c == 0 {
            return;
        }
        let v = (self.coeff(&s) + c) % p;
        if v == 0 {
            self.terms.remove(&s);
        } else {
            self.terms.insert(s, v);
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.reduced != other.reduced {
            return Err(Error::MixedReduction);
        }
        let mut out = self.clone();
        for (&s, &c) in &other.terms {
            out.add_term(s, c as i64);
        }
        Ok(out)
    }

    pub fn scale(&self, k: i64) -> Self {
        let mut out = GradedLieElement::zero(self.p, self.reduced);
        for (&s, &c) in &self.terms {
            out.add_term(s, (c as i64) * reduce_i64(k, self.p) as i64);
        }
        out
    }
}

impl fmt::Display for GradedLieElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(s, c)| format!("{c}*{s:?}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// The bracket structure of `gr(I)` (or of its reduction) for fixed data.
#[derive(Debug, Clone)]
pub struct GradedLie {
    rs: Arc<RootSystem>,
    spec: Arc<RingSpec>,
    sc: Arc<StructureConstants>,
    cochar: Cocharacters,
    reduced: bool,
    /// `xi^e` for `e < 2f - 1` in the power basis.
    twist_table: Vec<Vec<u64>>,
}

impl GradedLie {
    pub fn new(
        sc: Arc<StructureConstants>,
        spec: Arc<RingSpec>,
        d_z: usize,
        reduced: bool,
    ) -> Result<Self> {
        let rs = sc.root_system().clone();
        let p = spec.p();
        if !rs.check_admissible(p) {
            return Err(Error::InadmissiblePrime {
                p,
                bound: rs.coxeter_number() as u64 + 1,
            });
        }
        let twist_table = (0..2 * spec.f() - 1)
            .map(|e| crate::padic::Residue::xi_pow(&spec, e as u64).coeffs().to_vec())
            .collect();
        Ok(GradedLie {
            cochar: Cocharacters::new(&rs, d_z),
            rs,
            spec,
            sc,
            reduced,
            twist_table,
        })
    }

    pub fn root_system(&self) -> &Arc<RootSystem> {
        &self.rs
    }

    pub fn spec(&self) -> &Arc<RingSpec> {
        &self.spec
    }

    pub fn constants(&self) -> &Arc<StructureConstants> {
        &self.sc
    }

    pub fn cocharacters(&self) -> &Cocharacters {
        &self.cochar
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    pub fn h(&self) -> i64 {
        self.rs.coxeter_number()
    }

    pub fn p(&self) -> u64 {
        self.spec.p()
    }

    pub fn zero(&self) -> GradedLieElement {
        GradedLieElement::zero(self.p(), self.reduced)
    }

    pub fn element(&self, s: Symbol) -> GradedLieElement {
        let mut e = self.zero();
        e.add_term(s, 1);
        e
    }

    /// Grade of a symbol in units of `1/h`.
    pub fn grade_units(&self, s: Symbol) -> i64 {
        match s {
            Symbol::Root { gamma, depth, .. } => depth as i64 * self.h() + self.rs.class_of(gamma),
            Symbol::Torus { depth, .. } => depth as i64 * self.h(),
        }
    }

    /// The fixed symbol order: grade, then root order (torus symbols `Delta^vee`
    /// then `B`), then twist.
    pub fn order_key(&self, s: Symbol) -> (i64, u8, usize, usize) {
        match s {
            Symbol::Root { gamma, twist, .. } => (self.grade_units(s), 0, gamma, twist),
            Symbol::Torus { lambda, twist, .. } => (self.grade_units(s), 1, lambda, twist),
        }
    }

    pub fn label(&self, s: Symbol) -> String {
        match s {
            Symbol::Root { gamma, depth, twist } => {
                format!("u{:?}[d{depth},t{twist}]", self.rs.root(gamma))
            }
            Symbol::Torus { lambda, depth, twist } => {
                format!("{}[d{depth},t{twist}]", self.cochar.label(lambda))
            }
        }
    }

    /// Minimal-depth root symbol for `gamma` (reduced basis element).
    pub fn root_symbol(&self, gamma: RootId, twist: usize) -> Symbol {
        Symbol::Root { gamma, depth: 0, twist }
    }

    pub fn torus_symbol(&self, lambda: usize, twist: usize) -> Symbol {
        Symbol::Torus { lambda, depth: 1, twist }
    }

    fn is_valid(&self, s: Symbol) -> bool {
        match s {
            Symbol::Root { gamma, depth, twist } => {
                gamma < self.rs.num_roots() && twist < self.spec.f() && (!self.reduced || depth == 0)
            }
            Symbol::Torus { lambda, depth, twist } => {
                lambda < self.cochar.rank_t()
                    && twist < self.spec.f()
                    && depth >= 1
                    && (!self.reduced || depth == 1)
            }
        }
    }

    /// Basis symbols up to grade `max_units` (ignored in reduced mode), sorted.
    pub fn basis(&self, max_units: i64) -> Vec<Symbol> {
        let h = self.h();
        let max_depth = if self.reduced { 1 } else { (max_units / h).max(1) as u32 };
        let mut out = Vec::new();
        for twist in 0..self.spec.f() {
            for d in 0..=max_depth {
                for gamma in 0..self.rs.num_roots() {
                    out.push(Symbol::Root { gamma, depth: d, twist });
                }
                for lambda in 0..self.cochar.rank_t() {
                    out.push(Symbol::Torus { lambda, depth: d, twist });
                }
            }
        }
        out.retain(|&s| {
            self.is_valid(s) && (self.reduced || self.grade_units(s) <= max_units)
        });
        out.sort_by_key(|&s| self.order_key(s));
        out
    }

    /// Symbols of one grade.
    pub fn slice(&self, units: i64) -> Vec<Symbol> {
        let mut b = self.basis(units);
        b.retain(|&s| self.grade_units(s) == units);
        b
    }

    fn twist_expand(&self, r: usize, s: usize) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.twist_table[r + s]
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(t, &c)| (t, c))
    }

    /// `[a, b]` on basis symbols.
    pub fn bracket_symbols(&self, a: Symbol, b: Symbol) -> GradedLieElement {
        let mut out = self.zero();
        let target = self.grade_units(a) + self.grade_units(b);
        if self.reduced && target > self.h() {
            return out;
        }
        let rs = &self.rs;
        match (a, b) {
            (
                Symbol::Root { gamma: al, depth: n, twist: r },
                Symbol::Root { gamma: be, depth: m, twist: s },
            ) => {
                if be == al {
                    return out;
                }
                if be == rs.neg(al) {
                    let (pos, sign) = if rs.is_positive(al) { (al, 1) } else { (be, -1) };
                    let depth = n + m + 1;
                    for (i, c) in rs.coroot_coeffs(pos).into_iter().enumerate() {
                        for (t, x) in self.twist_expand(r, s) {
                            let sym = Symbol::Torus { lambda: i, depth, twist: t };
                            out.add_term(sym, sign * c * x as i64);
                        }
                    }
                    return out;
                }
                let Some(sum) = rs.add(al, be) else {
                    return out;
                };
                let depth = (n as i64 + m as i64 + rs.delta(al) + rs.delta(be) - rs.delta(sum)) as u32;
                let c = self.sc.n(al, be);
                for (t, x) in self.twist_expand(r, s) {
                    out.add_term(Symbol::Root { gamma: sum, depth, twist: t }, c * x as i64);
                }
                out
            }
            (
                Symbol::Torus { lambda, depth: m, twist: r },
                Symbol::Root { gamma, depth: n, twist: s },
            ) => {
                let c = self.cochar.pairing(rs, gamma, lambda);
                for (t, x) in self.twist_expand(r, s) {
                    out.add_term(Symbol::Root { gamma, depth: n + m, twist: t }, c * x as i64);
                }
                out
            }
            (Symbol::Root { .. }, Symbol::Torus { .. }) => self.bracket_symbols(b, a).scale(-1),
            (Symbol::Torus { .. }, Symbol::Torus { .. }) => out,
        }
    }

    pub fn bracket(&self, x: &GradedLieElement, y: &GradedLieElement) -> Result<GradedLieElement> {
        if x.reduced != self.reduced || y.reduced != self.reduced {
            return Err(Error::MixedReduction);
        }
        let mut out = self.zero();
        for (&a, &ca) in &x.terms {
            for (&b, &cb) in &y.terms {
                let k = (ca * cb % self.p()) as i64;
                for (&s, &c) in &self.bracket_symbols(a, b).terms {
                    out.add_term(s, k * c as i64);
                }
            }
        }
        Ok(out)
    }

    /// Multiplication by `P`: every depth goes up by one.
    pub fn p_operator(&self, x: &GradedLieElement) -> Result<GradedLieElement> {
        if x.reduced || self.reduced {
            return Err(Error::ReducedInput);
        }
        let mut out = self.zero();
        for (&s, &c) in &x.terms {
            out.add_term(s.with_depth(s.depth() + 1), c as i64);
        }
        Ok(out)
    }

    /// Exhaustive antisymmetry and Jacobi check over the basis up to `max_units`.
    pub fn check_jacobi(&self, max_units: i64) -> Result<usize> {
        let basis = self.basis(max_units);
        let mut count = 0;
        let table: BTreeMap<(Symbol, Symbol), GradedLieElement> = basis
            .iter()
            .flat_map(|&a| basis.iter().map(move |&b| (a, b)))
            .map(|(a, b)| ((a, b), self.bracket_symbols(a, b)))
            .collect();
        let br = |x: &GradedLieElement, s: Symbol| -> Result<GradedLieElement> {
            let mut out = self.zero();
            for (&a, &c) in &x.terms {
                let v = match table.get(&(a, s)) {
                    Some(v) => v.clone(),
                    None => self.bracket_symbols(a, s),
                };
                out = out.add(&v.scale(c as i64))?;
            }
            Ok(out)
        };
        for &a in &basis {
            for &b in &basis {
                let ab = &table[&(a, b)];
                if !ab.add(&table[&(b, a)])?.is_zero() {
                    return Err(Error::PropertyViolation(format!(
                        "antisymmetry fails for {} and {}",
                        self.label(a),
                        self.label(b)
                    )));
                }
                for &c in &basis {
                    let t1 = br(ab, c)?;
                    let t2 = br(&table[&(b, c)], a)?;
                    let t3 = br(&table[&(c, a)], b)?;
                    if !t1.add(&t2)?.add(&t3)?.is_zero() {
                        return Err(Error::PropertyViolation(format!(
                            "Jacobi fails for {}, {}, {}",
                            self.label(a),
                            self.label(b),
                            self.label(c)
                        )));
                    }
                    count += 1;
                }
            }
        }
        Ok(count)
    }

    /// Bracket table over the reduced basis: `[{left, right, result}]`.
    pub fn bracket_table_json(&self) -> Value {
        let basis = self.basis(self.h());
        let mut rows = Vec::new();
        for &a in &basis {
            for &b in &basis {
                let r = self.bracket_symbols(a, b);
                let result: Vec<Value> = r
                    .terms
                    .iter()
                    .map(|(&s, &c)| json!({"symbol": self.label(s), "coeff": c}))
                    .collect();
                rows.push(json!({
                    "left": self.label(a),
                    "right": self.label(b),
                    "result": result,
                }));
            }
        }
        Value::Array(rows)
    }

    // ---- group oracle ----

    /// A group element whose graded image is the given symbol.
    pub fn group_element(&self, s: Symbol) -> Result<IwahoriElement> {
        let d_z = self.cochar.d_z();
        match s {
            Symbol::Root { gamma, depth, twist } => {
                let x = teichmuller(&self.spec, twist)?.mul_p_pow(depth + self.rs.delta(gamma) as u32);
                IwahoriElement::root(&self.rs, &self.spec, d_z, gamma, x)
            }
            Symbol::Torus { lambda, depth, twist } => {
                let u = &Tu::one(&self.spec) + &teichmuller(&self.spec, twist)?.mul_p_pow(depth);
                IwahoriElement::torus(&self.rs, &self.spec, d_z, lambda, u)
            }
        }
    }

    /// True when every coordinate of grade `units` can be read mod `p` at this precision.
    pub fn readable(&self, units: i64) -> bool {
        let h = self.h();
        let n = self.spec.precision() as i64;
        let roots_ok = (0..self.rs.num_roots()).all(|g| {
            let k = self.rs.class_of(g);
            (units - k) % h != 0 || units < k || (units - k) / h + self.rs.delta(g) < n
        });
        let torus_ok = units % h != 0 || units / h < n;
        roots_ok && torus_ok && units <= (n - 1) * h
    }

    /// The image of `e` in `gr_nu(I)` (unreduced), where `nu = units / h`.
    /// Fails if `e` is not in `I_nu`.
    pub fn graded_image(&self, e: &IwahoriElement, units: i64) -> Result<GradedLieElement> {
        let h = self.h();
        let nu = crate::iwahori::Grade::new(units, h);
        if !e.filtration_member(nu, false)? {
            return Err(Error::Mismatch(format!("{} is not in the filtration step {nu}", e.to_json())));
        }
        let mut out = GradedLieElement::zero(self.p(), false);
        let mut push = |v: &Tu, shift: u32, sym: Symbol| -> Result<()> {
            if v.valuation().lower_bound() < shift {
                return Ok(());
            }
            if shift >= self.spec.precision() {
                return Err(Error::PrecisionExceeded(format!("grade {nu}")));
            }
            let r = v.div_p_pow(shift).expect("divisible").residue();
            for (t, &c) in r.coeffs().iter().enumerate() {
                out.add_term(sym.with_twist(t), c as i64);
            }
            Ok(())
        };
        for g in 0..self.rs.num_roots() {
            let k = self.rs.class_of(g);
            if units < k || (units - k) % h != 0 {
                continue;
            }
            let depth = ((units - k) / h) as u32;
            let shift = depth + self.rs.delta(g) as u32;
            push(e.coord(g), shift, Symbol::Root { gamma: g, depth, twist: 0 })?;
        }
        if units % h == 0 {
            let depth = (units / h) as u32;
            for l in 0..self.cochar.rank_t() {
                let v = e.torus_coord(l) - &Tu::one(&self.spec);
                push(&v, depth, Symbol::Torus { lambda: l, depth, twist: 0 })?;
            }
        }
        Ok(out)
    }
}

/// Outcome of [`certify_brackets_against_oracle`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub compared: usize,
    pub nonzero: usize,
    pub skipped: usize,
}

/// Which group model supplies commutators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleModel {
    /// All symbols, through `SL_{n+1}`.
    TypeA,
    /// Symbols for `alpha`, `-alpha` and `alpha^vee`, through `SL_2`.
    Sl2(RootId),
}

/// An oracle input: a group element and its predicted graded image.
fn oracle_item<R: Rng>(
    la: &GradedLie,
    model: OracleModel,
    max_depth: u32,
    rng: &mut R,
) -> Result<(IwahoriElement, GradedLieElement)> {
    let f = la.spec.f();
    let twist = rng.gen_range(0..f);
    let depth = rng.gen_range(0..=max_depth);
    let rs = &la.rs;
    let d_z = la.cochar.d_z();
    let ugr = GradedLie { reduced: false, ..la.clone() };
    match model {
        OracleModel::TypeA => {
            let nroots = rs.num_roots();
            let pick = rng.gen_range(0..nroots + la.cochar.rank_t());
            let s = if pick < nroots {
                Symbol::Root { gamma: pick, depth, twist }
            } else {
                Symbol::Torus { lambda: pick - nroots, depth: depth + 1, twist }
            };
            Ok((ugr.group_element(s)?, ugr.element(s)))
        }
        OracleModel::Sl2(alpha) => match rng.gen_range(0..3) {
            0 | 1 => {
                let gamma = if rng.gen_bool(0.5) { alpha } else { rs.neg(alpha) };
                let s = Symbol::Root { gamma, depth, twist };
                Ok((ugr.group_element(s)?, ugr.element(s)))
            }
            _ => {
                let m = depth + 1;
                let u = &Tu::one(&la.spec) + &teichmuller(&la.spec, twist)?.mul_p_pow(m);
                let g = IwahoriElement::coroot(rs, &la.spec, d_z, alpha, &u)?;
                let mut x = ugr.zero();
                for (i, c) in rs.coroot_coeffs(alpha).into_iter().enumerate() {
                    x.add_term(Symbol::Torus { lambda: i, depth: m, twist }, c);
                }
                Ok((g, x))
            }
        },
    }
}

fn grade_of(la: &GradedLie, x: &GradedLieElement) -> i64 {
    la.grade_units(*x.terms.keys().next().expect("nonzero"))
}

/// Compares the bracket with graded images of group commutators on random pairs.
/// Pairs whose target grade cannot be read at precision `N` are skipped; the
/// loop runs until `samples` pairs were compared or `20 * samples` were drawn.
pub fn certify_brackets_against_oracle<R: Rng>(
    la: &GradedLie,
    model: OracleModel,
    samples: usize,
    rng: &mut R,
) -> Result<OracleReport> {
    if let OracleModel::TypeA = model {
        if la.rs.cartan_type().family != Family::A {
            return Err(Error::UnsupportedType(la.rs.label()));
        }
    }
    let ugr = GradedLie { reduced: false, ..la.clone() };
    let max_depth = la.spec.precision().saturating_sub(2);
    let mut report = OracleReport::default();
    let mut draws = 0;
    while report.compared < samples && draws < 20 * samples {
        draws += 1;
        let (g, x) = oracle_item(la, model, max_depth, rng)?;
        let (k, y) = oracle_item(la, model, max_depth, rng)?;
        let target = grade_of(&ugr, &x) + grade_of(&ugr, &y);
        if !ugr.readable(target) {
            report.skipped += 1;
            continue;
        }
        let predicted = ugr.bracket(&x, &y)?;
        let comm = g.commutator(&k)?;
        let observed = match ugr.graded_image(&comm, target) {
            Ok(v) => v,
            Err(Error::PrecisionExceeded(_)) => {
                report.skipped += 1;
                continue;
            }
            Err(Error::Mismatch(m)) => {
                return Err(Error::Mismatch(format!("[{x}, {y}]: {m}")))
            }
            Err(e) => return Err(e),
        };
        if predicted != observed {
            return Err(Error::Mismatch(format!(
                "[{x}, {y}]: bracket gives {predicted}, commutator gives {observed}"
            )));
        }
        report.compared += 1;
        if !predicted.is_zero() {
            report.nonzero += 1;
        }
    }
    Ok(report)
}
