//! Chevalley structure constants and the commutator-formula constants
//! `c_{alpha,beta;i,j}`.
//!
//! The constants `N_{r,s}` of `[e_r, e_s] = N_{r,s} e_{r+s}` are fixed by the
//! extraspecial-pair method: every extraspecial pair gets the positive sign and
//! all other values follow from the usual identities between the `N`s. The
//! group constants are then read off the adjoint representation, where
//! `u_gamma(t) = exp(t ad e_gamma)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::padic::TruncatedUnramified;
use crate::roots::{RootId, RootSystem};

pub const CONVENTION_ID: &str = "extraspecial-positive/height-desc-lex/adjoint-exp";

/// One factor `u_{i alpha + j beta}(c x^i y^j)` of a commutator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommutatorTerm {
    pub i: i64,
    pub j: i64,
    pub root: RootId,
    pub c: i64,
}

#[derive(Debug, Clone)]
pub struct StructureConstants {
    rs: Arc<RootSystem>,
    n: Vec<i64>,
    terms: BTreeMap<(RootId, RootId), Vec<CommutatorTerm>>,
}

struct Builder<'a> {
    rs: &'a RootSystem,
    special: BTreeMap<(RootId, RootId), i64>,
}

impl Builder<'_> {
    fn n(&self, r: RootId, s: RootId) -> i64 {
        let rs = self.rs;
        if rs.add(r, s).is_none() {
            return 0;
        }
        match (rs.is_positive(r), rs.is_positive(s)) {
            (true, true) => {
                if r < s {
                    self.special[&(r, s)]
                } else {
                    -self.special[&(s, r)]
                }
            }
            (false, false) => -self.n(rs.neg(r), rs.neg(s)),
            _ => {
                let t = rs.neg(rs.add(r, s).unwrap());
                // N_{r,s}/(t,t) = N_{s,t}/(r,r) = N_{t,r}/(s,s)
                if rs.is_positive(s) == rs.is_positive(t) {
                    self.n(s, t) * rs.norm2(t) / rs.norm2(r)
                } else {
                    self.n(t, r) * rs.norm2(t) / rs.norm2(s)
                }
            }
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn compute_n(rs: &RootSystem) -> Vec<i64> {
    let mut b = Builder {
        rs,
        special: BTreeMap::new(),
    };
    for xi in rs.positives() {
        let pairs: Vec<(RootId, RootId)> = rs
            .positives()
            .into_iter()
            .filter_map(|a| rs.combo(xi, 1, a, -1).map(|s| (a, s)))
            .filter(|&(a, s)| rs.is_positive(s) && a < s)
            .collect();
        let Some(&(alpha, beta)) = pairs.first() else {
            continue;
        };
        let nab = rs.p_string(alpha, beta) + 1;
        b.special.insert((alpha, beta), nab);
        for &(zeta, eta) in &pairs[1..] {
            let mut num = Vec::new();
            if let Some(bz) = rs.combo(beta, 1, zeta, -1) {
                num.push((b.n(beta, rs.neg(zeta)) * b.n(alpha, rs.neg(eta)), rs.norm2(bz)));
            }
            if let Some(az) = rs.combo(alpha, 1, zeta, -1) {
                num.push((b.n(rs.neg(zeta), alpha) * b.n(beta, rs.neg(eta)), rs.norm2(az)));
            }
            let l = num.iter().fold(1, |acc, &(_, d)| acc * d / gcd(acc, d));
            let total: i64 = num.iter().map(|&(v, d)| v * (l / d)).sum();
            let numer = rs.norm2(xi) * total;
            let denom = nab * l;
            assert_eq!(numer % denom, 0, "non-integral structure constant");
            b.special.insert((zeta, eta), numer / denom);
        }
    }
    let m = rs.num_roots();
    let mut n = vec![0; m * m];
    for r in 0..m {
        for s in 0..m {
            n[r * m + s] = b.n(r, s);
        }
    }
    n
}

/// Sparse integer vector: `(basis index, coefficient)`, sorted, no zeros.
pub type SparseVec = Vec<(usize, i64)>;

fn push_term(v: &mut SparseVec, idx: usize, c: i64) {
    if c == 0 {
        return;
    }
    match v.binary_search_by_key(&idx, |&(i, _)| i) {
        Ok(pos) => {
            v[pos].1 += c;
            if v[pos].1 == 0 {
                v.remove(pos);
            }
        }
        Err(pos) => v.insert(pos, (idx, c)),
    }
}

/// The Chevalley-basis Lie algebra over `Z`: basis `e_gamma` (indices
/// `0..|Phi|`, in the total order) followed by `h_1, ..., h_n`.
#[derive(Debug, Clone)]
pub struct ChevalleyLie {
    dim: usize,
    m: usize,
    table: Vec<SparseVec>,
}

impl ChevalleyLie {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bracket_basis(&self, a: usize, b: usize) -> &SparseVec {
        &self.table[a * self.dim + b]
    }

    pub fn bracket(&self, x: &SparseVec, y: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for &(a, ca) in x {
            for &(b, cb) in y {
                for &(k, ck) in self.bracket_basis(a, b) {
                    push_term(&mut out, k, ca * cb * ck);
                }
            }
        }
        out
    }

    /// Checks the Jacobi identity on all basis triples.
    pub fn check_jacobi(&self) -> std::result::Result<usize, (usize, usize, usize)> {
        let d = self.dim;
        let mut count = 0;
        for a in 0..d {
            for b in 0..d {
                let ab = self.bracket_basis(a, b).clone();
                for c in 0..d {
                    let bc = self.bracket_basis(b, c);
                    let ca = self.bracket_basis(c, a);
                    let mut sum = self.bracket(&vec![(a, 1)], bc);
                    for (k, v) in self.bracket(&vec![(b, 1)], ca) {
                        push_term(&mut sum, k, v);
                    }
                    for (k, v) in self.bracket(&vec![(c, 1)], &ab) {
                        push_term(&mut sum, k, v);
                    }
                    if !sum.is_empty() {
                        return Err((a, b, c));
                    }
                    count += 1;
                }
            }
        }
        Ok(count)
    }

    fn ad_matrix(&self, a: usize) -> Mat {
        let d = self.dim;
        let mut m = Mat::zero(d);
        for v in 0..d {
            for &(k, c) in self.bracket_basis(a, v) {
                m.set(k, v, c as i128);
            }
        }
        m
    }

    fn name(&self, rs: &RootSystem, i: usize) -> String {
        if i < self.m {
            format!("e{:?}", rs.root(i))
        } else {
            format!("h{}", i - self.m + 1)
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
struct Mat {
    d: usize,
    a: Vec<i128>,
}

impl Mat {
    fn zero(d: usize) -> Mat {
        Mat {
            d,
            a: vec![0; d * d],
        }
    }
    fn identity(d: usize) -> Mat {
        let mut m = Mat::zero(d);
        for i in 0..d {
            m.a[i * d + i] = 1;
        }
        m
    }
    fn set(&mut self, i: usize, j: usize, v: i128) {
        self.a[i * self.d + j] = v;
    }
    fn mul(&self, o: &Mat) -> Mat {
        let d = self.d;
        let mut r = Mat::zero(d);
        for i in 0..d {
            for k in 0..d {
                let v = self.a[i * d + k];
                if v == 0 {
                    continue;
                }
                for j in 0..d {
                    let w = o.a[k * d + j];
                    if w != 0 {
                        r.a[i * d + j] += v * w;
                    }
                }
            }
        }
        r
    }
    fn is_zero(&self) -> bool {
        self.a.iter().all(|&v| v == 0)
    }
}

/// `exp(t X)` for nilpotent integral `X` whose divided powers are integral.
fn exp_nilpotent(x: &Mat, t: i128) -> Mat {
    let d = x.d;
    let mut result = Mat::identity(d);
    let mut power = Mat::identity(d);
    let mut fact: i128 = 1;
    let mut tk: i128 = 1;
    for k in 1..=d as i128 {
        power = power.mul(x);
        if power.is_zero() {
            break;
        }
        fact *= k;
        tk *= t;
        for (r, &p) in result.a.iter_mut().zip(&power.a) {
            let v = p * tk;
            assert_eq!(v % fact, 0, "divided power not integral");
            *r += v / fact;
        }
    }
    result
}

impl StructureConstants {
    /// Computes `N_{r,s}` and all commutator-formula constants.
    pub fn compute(rs: Arc<RootSystem>) -> Result<StructureConstants> {
        let n = compute_n(&rs);
        let mut sc = StructureConstants {
            rs,
            n,
            terms: BTreeMap::new(),
        };
        sc.derive_group_constants()?;
        Ok(sc)
    }

    pub fn root_system(&self) -> &Arc<RootSystem> {
        &self.rs
    }

    pub fn convention_id(&self) -> &'static str {
        CONVENTION_ID
    }

    /// `N_{r,s}`; zero unless `r + s` is a root.
    pub fn n(&self, r: RootId, s: RootId) -> i64 {
        self.n[r * self.rs.num_roots() + s]
    }

    /// Overwrites `N_{r,s}` and `N_{s,r}` (used to test the certifier).
    pub fn tamper(&mut self, r: RootId, s: RootId, value: i64) {
        let m = self.rs.num_roots();
        self.n[r * m + s] = value;
        self.n[s * m + r] = -value;
    }

    pub fn lie_algebra(&self) -> ChevalleyLie {
        let rs = &*self.rs;
        let m = rs.num_roots();
        let rank = rs.rank();
        let dim = m + rank;
        let mut table = vec![SparseVec::new(); dim * dim];
        for r in 0..m {
            for s in 0..m {
                let v = &mut table[r * dim + s];
                if s == rs.neg(r) {
                    for (i, c) in rs.coroot_coeffs(r).into_iter().enumerate() {
                        push_term(v, m + i, c);
                    }
                } else if let Some(t) = rs.add(r, s) {
                    push_term(v, t, self.n(r, s));
                }
            }
            for i in 0..rank {
                let c = rs.pairing_simple(r, i);
                push_term(&mut table[(m + i) * dim + r], r, c);
                push_term(&mut table[r * dim + m + i], r, -c);
            }
        }
        ChevalleyLie { dim, m, table }
    }

    fn derive_group_constants(&mut self) -> Result<()> {
        let rs = self.rs.clone();
        let m = rs.num_roots();
        let lie = self.lie_algebra();
        let ad: Vec<Mat> = (0..m).map(|g| lie.ad_matrix(g)).collect();
        let mut terms = BTreeMap::new();
        for a in 0..m {
            for b in 0..m {
                if b == a || b == rs.neg(a) {
                    continue;
                }
                let mut slots: Vec<(i64, i64, RootId)> = Vec::new();
                for i in 1..=3 {
                    for j in 1..=3 {
                        if let Some(g) = rs.combo(a, i, b, j) {
                            slots.push((i, j, g));
                        }
                    }
                }
                slots.sort_by_key(|s| s.2);
                let found = if slots.len() <= 1 {
                    slots
                        .iter()
                        .map(|&(i, j, root)| CommutatorTerm {
                            i,
                            j,
                            root,
                            c: self.n(a, b),
                        })
                        .collect()
                } else {
                    search_terms(&ad, a, b, &slots, self.n(a, b)).ok_or_else(|| {
                        Error::CertificationFailure(format!(
                            "no commutator constants for {:?}, {:?}",
                            rs.root(a),
                            rs.root(b)
                        ))
                    })?
                };
                terms.insert((a, b), found);
            }
        }
        self.terms = terms;
        Ok(())
    }

    /// The factors of `[u_alpha(x), u_beta(y)]` as `(i, j, root, c)` in the total order.
    pub fn terms(&self, alpha: RootId, beta: RootId) -> Result<&[CommutatorTerm]> {
        if alpha == beta || beta == self.rs.neg(alpha) {
            return Err(Error::OppositeRoots);
        }
        Ok(&self.terms[&(alpha, beta)])
    }

    /// `c_{alpha,beta;i,j}` if `i alpha + j beta` is a root.
    pub fn c(&self, alpha: RootId, beta: RootId, i: i64, j: i64) -> Result<Option<i64>> {
        Ok(self
            .terms(alpha, beta)?
            .iter()
            .find(|t| t.i == i && t.j == j)
            .map(|t| t.c))
    }

    /// `[u_alpha(x), u_beta(y)] = prod u_gamma(c x^i y^j)` in the total order.
    pub fn commutator_expansion(
        &self,
        alpha: RootId,
        beta: RootId,
        x: &TruncatedUnramified,
        y: &TruncatedUnramified,
    ) -> Result<Vec<(RootId, TruncatedUnramified)>> {
        if x.spec() != y.spec() {
            return Err(Error::RingMismatch);
        }
        Ok(self
            .terms(alpha, beta)?
            .iter()
            .map(|t| {
                let v = &x.pow(t.i as u128) * &y.pow(t.j as u128);
                (t.root, v.scale(t.c))
            })
            .collect())
    }

    /// All `(alpha, beta)` pairs with at least one factor.
    pub fn nonempty_pairs(&self) -> impl Iterator<Item = (&(RootId, RootId), &Vec<CommutatorTerm>)> {
        self.terms.iter().filter(|(_, v)| !v.is_empty())
    }

    pub fn to_json(&self) -> Value {
        let rs = &*self.rs;
        let rows: Vec<Value> = self
            .nonempty_pairs()
            .flat_map(|(&(a, b), ts)| {
                ts.iter().map(move |t| {
                    json!({
                        "alpha": rs.root(a),
                        "beta": rs.root(b),
                        "i": t.i,
                        "j": t.j,
                        "gamma": rs.root(t.root),
                        "c": t.c,
                    })
                })
            })
            .collect();
        json!({
            "type": rs.label(),
            "convention_id": CONVENTION_ID,
            "constants": rows,
        })
    }

    pub fn to_csv(&self) -> String {
        let rs = &*self.rs;
        let fmt = |v: &[i64]| {
            v.iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut out = String::from("alpha,beta,i,j,gamma,c\n");
        for (&(a, b), ts) in self.nonempty_pairs() {
            for t in ts {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    fmt(rs.root(a)),
                    fmt(rs.root(b)),
                    t.i,
                    t.j,
                    fmt(rs.root(t.root)),
                    t.c
                ));
            }
        }
        out
    }
}

fn search_terms(
    ad: &[Mat],
    a: RootId,
    b: RootId,
    slots: &[(i64, i64, RootId)],
    n11: i64,
) -> Option<Vec<CommutatorTerm>> {
    let samples: [(i128, i128); 2] = [(1, 1), (2, 3)];
    let targets: Vec<Mat> = samples
        .iter()
        .map(|&(t, u)| {
            exp_nilpotent(&ad[a], t)
                .mul(&exp_nilpotent(&ad[b], u))
                .mul(&exp_nilpotent(&ad[a], -t))
                .mul(&exp_nilpotent(&ad[b], -u))
        })
        .collect();
    const CANDIDATES: [i64; 6] = [1, -1, 2, -2, 3, -3];
    let free: Vec<usize> = (0..slots.len())
        .filter(|&k| !(slots[k].0 == 1 && slots[k].1 == 1))
        .collect();
    let total = CANDIDATES.len().pow(free.len() as u32);
    for code in 0..total {
        let mut cs = vec![n11; slots.len()];
        let mut rest = code;
        for &k in &free {
            cs[k] = CANDIDATES[rest % CANDIDATES.len()];
            rest /= CANDIDATES.len();
        }
        let ok = samples.iter().zip(&targets).all(|(&(t, u), target)| {
            let mut prod = Mat::identity(target.d);
            for (k, &(i, j, g)) in slots.iter().enumerate() {
                let arg = cs[k] as i128 * t.pow(i as u32) * u.pow(j as u32);
                prod = prod.mul(&exp_nilpotent(&ad[g], arg));
            }
            &prod == target
        });
        if ok {
            return Some(
                slots
                    .iter()
                    .zip(cs)
                    .map(|(&(i, j, root), c)| CommutatorTerm { i, j, root, c })
                    .collect(),
            );
        }
    }
    None
}

/// For type `A_n`: the matrix unit `E_{ab}` representing `e_gamma` in `sl_{n+1}`.
pub fn type_a_matrix_unit(rs: &RootSystem, gamma: RootId) -> (usize, usize) {
    let c = rs.root(gamma);
    let first = c.iter().position(|&x| x != 0).expect("root is nonzero");
    let last = c.iter().rposition(|&x| x != 0).expect("root is nonzero");
    if rs.is_positive(gamma) {
        (first, last + 1)
    } else {
        (last + 1, first)
    }
}

/// Outcome of [`certify_constants`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificationReport {
    pub jacobi_triples: usize,
    pub matrix_checks: usize,
    pub max_abs_c: i64,
}

/// Certifies a constants table: Jacobi on the full Chevalley algebra, the
/// `|N| = p + 1` rule, `|c| <= 3`, and in type A agreement with commutators of
/// elementary matrices.
pub fn certify_constants(sc: &StructureConstants) -> Result<CertificationReport> {
    let rs = &*sc.rs;
    let lie = sc.lie_algebra();
    let jacobi_triples = lie.check_jacobi().map_err(|(a, b, c)| {
        Error::CertificationFailure(format!(
            "Jacobi fails on ({}, {}, {})",
            lie.name(rs, a),
            lie.name(rs, b),
            lie.name(rs, c)
        ))
    })?;
    let m = rs.num_roots();
    let mut max_abs_c = 0;
    for r in 0..m {
        for s in 0..m {
            if rs.add(r, s).is_some() && sc.n(r, s).abs() != rs.p_string(r, s) + 1 {
                return Err(Error::CertificationFailure(format!(
                    "|N| rule fails at ({:?}, {:?})",
                    rs.root(r),
                    rs.root(s)
                )));
            }
        }
    }
    for (&(a, b), ts) in sc.nonempty_pairs() {
        for t in ts {
            if t.c == 0 || t.c.abs() > 3 {
                return Err(Error::CertificationFailure(format!(
                    "constant {} out of range at ({:?}, {:?})",
                    t.c,
                    rs.root(a),
                    rs.root(b)
                )));
            }
            if t.i == 1 && t.j == 1 && t.c != sc.n(a, b) {
                return Err(Error::CertificationFailure("c_11 differs from N".into()));
            }
            max_abs_c = max_abs_c.max(t.c.abs());
        }
    }
    let mut matrix_checks = 0;
    if rs.cartan_type().family == crate::roots::Family::A {
        let d = rs.rank() + 1;
        let unit = |g: RootId| {
            let (i, j) = type_a_matrix_unit(rs, g);
            let mut mtx = vec![0i64; d * d];
            mtx[i * d + j] = 1;
            mtx
        };
        let mul = |x: &[i64], y: &[i64]| {
            let mut r = vec![0i64; d * d];
            for i in 0..d {
                for k in 0..d {
                    if x[i * d + k] != 0 {
                        for j in 0..d {
                            r[i * d + j] += x[i * d + k] * y[k * d + j];
                        }
                    }
                }
            }
            r
        };
        let ident: Vec<i64> = (0..d * d).map(|k| i64::from(k % (d + 1) == 0)).collect();
        let add = |x: &[i64], y: &[i64], s: i64| -> Vec<i64> {
            x.iter().zip(y).map(|(a, b)| a + s * b).collect()
        };
        for r in 0..m {
            for s in 0..m {
                if s == r || s == rs.neg(r) {
                    continue;
                }
                let (er, es) = (unit(r), unit(s));
                let lie_comm = add(&mul(&er, &es), &mul(&es, &er), -1);
                let expect = match rs.add(r, s) {
                    Some(t) => unit(t).iter().map(|v| v * sc.n(r, s)).collect(),
                    None => vec![0; d * d],
                };
                // group commutator of I + E_r and I + E_s
                let (gr, gs) = (add(&ident, &er, 1), add(&ident, &es, 1));
                let (gri, gsi) = (add(&ident, &er, -1), add(&ident, &es, -1));
                let group = mul(&mul(&gr, &gs), &mul(&gri, &gsi));
                let mut expect_group = ident.clone();
                for t in sc.terms(r, s)? {
                    expect_group = mul(&expect_group, &add(&ident, &unit(t.root), t.c));
                }
                if lie_comm != expect || group != expect_group {
                    return Err(Error::CertificationFailure(format!(
                        "matrix commutator mismatch at ({:?}, {:?})",
                        rs.root(r),
                        rs.root(s)
                    )));
                }
                matrix_checks += 1;
            }
        }
    }
    Ok(CertificationReport {
        jacobi_triples,
        matrix_checks,
        max_abs_c,
    })
}

/// Every constant is a unit modulo `p`.
pub fn constants_are_units(sc: &StructureConstants, p: u64) -> bool {
    sc.nonempty_pairs()
        .flat_map(|(_, ts)| ts.iter())
        .all(|t| t.c.rem_euclid(p as i64) != 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roots::CartanType;

    fn sc(label: &str) -> StructureConstants {
        StructureConstants::compute(Arc::new(RootSystem::from_label(label).unwrap())).unwrap()
    }

    #[test]
    fn a2_constant() {
        let s = sc("A2");
        let rs = s.root_system().clone();
        let (a1, a2) = (rs.simple(0), rs.simple(1));
        assert_eq!(s.c(a1, a2, 1, 1).unwrap(), Some(1));
        assert_eq!(s.terms(a1, a2).unwrap().len(), 1);
        assert_eq!(s.terms(a1, rs.neg(a1)), Err(Error::OppositeRoots));
        let r = certify_constants(&s).unwrap();
        assert!(r.matrix_checks > 0);
    }

    #[test]
    fn certify_small_types() {
        for label in ["A1", "A3", "B2", "C2", "B3", "C3", "D4", "G2"] {
            let s = sc(label);
            certify_constants(&s).unwrap_or_else(|e| panic!("{label}: {e}"));
        }
    }

    #[test]
    fn g2_has_two_and_three() {
        let s = sc("G2");
        let all: Vec<i64> = s
            .nonempty_pairs()
            .flat_map(|(_, ts)| ts.iter().map(|t| t.c.abs()))
            .collect();
        assert!(all.contains(&2));
        assert!(all.contains(&3));
    }

    #[test]
    fn tampered_table_fails() {
        let mut s = sc("A2");
        let rs = s.root_system().clone();
        let (a1, a2) = (rs.simple(0), rs.simple(1));
        s.tamper(a1, a2, -s.n(a1, a2));
        assert!(matches!(certify_constants(&s), Err(Error::CertificationFailure(_))));
    }

    #[test]
    fn a_type_has_no_higher_terms() {
        for n in 1..=4 {
            let s = StructureConstants::compute(Arc::new(RootSystem::build(
                CartanType::new(crate::roots::Family::A, n).unwrap(),
            )))
            .unwrap();
            for (_, ts) in s.nonempty_pairs() {
                assert_eq!(ts.len(), 1);
                assert_eq!((ts[0].i, ts[0].j), (1, 1));
                assert_eq!(ts[0].c.abs(), 1);
            }
        }
    }
}
