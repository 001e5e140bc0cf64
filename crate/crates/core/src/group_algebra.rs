//! Finite quotients of the pro-p Iwahori subgroup, their group algebras over `F_p`,
//! powers of the augmentation ideal and the monomial filtration attached to an
//! ordered basis.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::iwahori::{IwahoriElement, Matrix};
use crate::linalg::Echelon;
use crate::padic::{teichmuller, RingSpec, TruncatedUnramified as Tu};
use crate::roots::{Family, RootSystem};

/// Default bound on the order of an enumerated group.
pub const DEFAULT_GROUP_CAP: usize = 15_625;

pub type Key = Vec<u64>;
type MulFn = Arc<dyn Fn(&Key, &Key) -> Key + Send + Sync>;

/// A finite p-group given by generators and a multiplication on keys.
#[derive(Clone)]
pub struct FiniteGroup {
    name: String,
    p: u64,
    elements: Vec<Key>,
    index: HashMap<Key, usize>,
    mul: MulFn,
    identity: usize,
    generators: Vec<usize>,
}

impl std::fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FiniteGroup({}, order {})", self.name, self.order())
    }
}

impl FiniteGroup {
    /// Enumerates the group generated by `gens` breadth first.
    pub fn generate(
        name: &str,
        p: u64,
        identity: Key,
        gens: Vec<Key>,
        mul: MulFn,
        cap: usize,
    ) -> Result<FiniteGroup> {
        let mut elements = vec![identity.clone()];
        let mut index = HashMap::from([(identity, 0usize)]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(g) = queue.pop_front() {
            for s in &gens {
                let h = mul(&elements[g], s);
                if !index.contains_key(&h) {
                    if elements.len() >= cap {
                        return Err(Error::GroupTooLarge {
                            order: elements.len() + 1,
                            cap,
                        });
                    }
                    index.insert(h.clone(), elements.len());
                    queue.push_back(elements.len());
                    elements.push(h);
                }
            }
        }
        let mut order = elements.len();
        while order % p as usize == 0 {
            order /= p as usize;
        }
        if order != 1 {
            return Err(Error::InvalidArgument(format!("{name}: order {} is not a power of p", elements.len())));
        }
        let generators = gens.iter().map(|s| index[s]).collect();
        Ok(FiniteGroup {
            name: name.to_string(),
            p,
            elements,
            index,
            mul,
            identity: 0,
            generators,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn key(&self, g: usize) -> &Key {
        &self.elements[g]
    }

    pub fn index_of(&self, k: &Key) -> Option<usize> {
        self.index.get(k).copied()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.index[&(self.mul)(&self.elements[a], &self.elements[b])]
    }

    pub fn pow(&self, a: usize, mut k: u64) -> usize {
        let mut acc = self.identity;
        let mut base = a;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            k >>= 1;
        }
        acc
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.pow(a, self.order() as u64 - 1)
    }

    pub fn element_order(&self, a: usize) -> u64 {
        let mut k = 1;
        let mut x = a;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// `g -> g s` as an index table.
    pub fn right_table(&self, s: usize) -> Vec<u32> {
        (0..self.order()).map(|g| self.mul(g, s) as u32).collect()
    }

    /// The group-algebra element `g - 1`.
    pub fn minus_one(&self, g: usize) -> Vec<u32> {
        let mut v = vec![0u32; self.order()];
        v[g] = (v[g] + 1) % self.p as u32;
        v[self.identity] = (v[self.identity] + self.p as u32 - 1) % self.p as u32;
        v
    }

    /// Convolution product in `F_p[G]`.
    pub fn convolve(&self, x: &[u32], y: &[u32]) -> Vec<u32> {
        let p = self.p;
        let mut out = vec![0u64; self.order()];
        for (a, &ca) in x.iter().enumerate() {
            if ca == 0 {
                continue;
            }
            for (b, &cb) in y.iter().enumerate() {
                if cb != 0 {
                    let g = self.mul(a, b);
                    out[g] = (out[g] + ca as u64 * cb as u64) % p;
                }
            }
        }
        out.into_iter().map(|c| c as u32).collect()
    }

    pub fn cyclic(p: u64) -> Result<FiniteGroup> {
        let mul: MulFn = Arc::new(move |a: &Key, b: &Key| vec![(a[0] + b[0]) % p]);
        FiniteGroup::generate("C_p", p, vec![0], vec![vec![1]], mul, usize::MAX)
    }

    pub fn cyclic_square(p: u64) -> Result<FiniteGroup> {
        let mul: MulFn = Arc::new(move |a: &Key, b: &Key| vec![(a[0] + b[0]) % p, (a[1] + b[1]) % p]);
        FiniteGroup::generate("C_p x C_p", p, vec![0, 0], vec![vec![1, 0], vec![0, 1]], mul, usize::MAX)
    }

    /// Upper unitriangular 3x3 matrices over `F_p`, keyed by `(a, b, c)` for
    /// `[[1, a, c], [0, 1, b], [0, 0, 1]]`.
    pub fn heisenberg(p: u64) -> Result<FiniteGroup> {
        let mul: MulFn = Arc::new(move |x: &Key, y: &Key| {
            vec![(x[0] + y[0]) % p, (x[1] + y[1]) % p, (x[2] + y[2] + x[0] * y[1]) % p]
        });
        FiniteGroup::generate(
            "Heisenberg",
            p,
            vec![0, 0, 0],
            vec![vec![1, 0, 0], vec![0, 1, 0]],
            mul,
            usize::MAX,
        )
    }
}

/// Powers `m^0 ⊇ m^1 ⊇ ... ⊇ m^L = 0` of the augmentation ideal.
#[derive(Debug, Clone)]
pub struct AugmentationLadder {
    levels: Vec<Echelon>,
}

impl AugmentationLadder {
    /// `m^{n+1}` is spanned by `v (s - 1)` for `v` in a basis of `m^n` and `s` a generator.
    pub fn compute(g: &FiniteGroup, n_max: Option<usize>) -> AugmentationLadder {
        let n = g.order();
        let p = g.p();
        let tables: Vec<Vec<u32>> = g.generators().iter().map(|&s| g.right_table(s)).collect();
        let mut full = Echelon::new(p, n);
        for i in 0..n {
            let mut v = vec![0u32; n];
            v[i] = 1;
            full.insert(v);
        }
        let mut levels = vec![full];
        let mut m1 = Echelon::new(p, n);
        for s in 0..n {
            if s != g.identity() {
                m1.insert(g.minus_one(s));
            }
        }
        levels.push(m1);
        while levels.last().map_or(false, |l| l.dim() > 0) && n_max.map_or(true, |m| levels.len() <= m) {
            let cur = levels.last().expect("nonempty");
            let mut next = Echelon::new(p, n);
            for row in cur.rows() {
                for t in &tables {
                    let mut w = vec![0u32; n];
                    for (gi, &c) in row.iter().enumerate() {
                        if c != 0 {
                            let j = t[gi] as usize;
                            w[j] = (w[j] + c) % p as u32;
                            w[gi] = (w[gi] + p as u32 - c) % p as u32;
                        }
                    }
                    next.insert(w);
                }
            }
            levels.push(next);
        }
        AugmentationLadder { levels }
    }

    /// Smallest `L` with `m^L = 0`.
    pub fn nilpotency_index(&self) -> usize {
        self.levels.iter().position(|l| l.dim() == 0).unwrap_or(self.levels.len())
    }

    pub fn level(&self, n: usize) -> Option<&Echelon> {
        self.levels.get(n)
    }

    /// `dim m^n / m^{n+1}` for `n = 0 .. L-1`.
    pub fn graded_dims(&self) -> Vec<usize> {
        let l = self.nilpotency_index();
        (0..l)
            .map(|n| self.levels[n].dim() - self.levels.get(n + 1).map_or(0, |e| e.dim()))
            .collect()
    }

    pub fn contains(&self, v: &[u32], n: usize) -> bool {
        match self.levels.get(n) {
            Some(e) => e.contains(v),
            None => {
                let complete = self.levels.last().map_or(false, |l| l.dim() == 0);
                complete && v.iter().all(|&c| c == 0)
            }
        }
    }

    /// Largest `n` with `v in m^n`; `None` for `v = 0`.
    pub fn degree(&self, v: &[u32]) -> Option<usize> {
        if v.iter().all(|&c| c == 0) {
            return None;
        }
        (0..self.levels.len()).rev().find(|&n| self.levels[n].contains(v))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,dim_quotient\n");
        for (n, d) in self.graded_dims().into_iter().enumerate() {
            s.push_str(&format!("{n},{d}\n"));
        }
        s
    }
}

/// Images of `I` in a finite quotient, with the ordered basis used for the
/// monomial filtration.
#[derive(Debug, Clone)]
pub struct IwahoriQuotient {
    pub group: FiniteGroup,
    pub rs: Arc<RootSystem>,
    pub spec: Arc<RingSpec>,
    /// Exponents `e_ij`: entries are kept modulo `p^{e_ij}`.
    pub exponents: Vec<Vec<u32>>,
    /// Exponent of the central factor `1 + pZ_p` (0 when semisimple).
    pub central_exponent: u32,
    /// `(label, element, omega in units of 1/h)`.
    pub ordered_basis: Vec<(String, usize, i64)>,
}

/// The quotient of the type-A pro-p Iwahori subgroup by `1 + L_e`, where
/// `L_e = {X : val X_ij >= e_ij}` must be a two-sided ideal of the Iwahori order.
/// With `central_exponent > 0` a central factor `(1 + pZ_p)/(1 + p^c Z_p)` is added.
pub fn iwahori_lattice_quotient(
    rs: &Arc<RootSystem>,
    p: u64,
    exponents: Vec<Vec<u32>>,
    central_exponent: u32,
    cap: usize,
) -> Result<IwahoriQuotient> {
    if rs.cartan_type().family != Family::A {
        return Err(Error::UnsupportedType(rs.label()));
    }
    let n = rs.rank() + 1;
    if exponents.len() != n || exponents.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument("exponent matrix has the wrong size".into()));
    }
    let v = |i: usize, j: usize| u32::from(i > j);
    for i in 0..n {
        for j in 0..n {
            if exponents[i][j] == 0 {
                return Err(Error::InvalidArgument("exponents must be positive".into()));
            }
            for k in 0..n {
                if exponents[i][j] > v(i, k) + exponents[k][j] || exponents[i][j] > exponents[i][k] + v(k, j) {
                    return Err(Error::InvalidArgument(format!(
                        "exponents do not define an ideal of the Iwahori order at ({i}, {j})"
                    )));
                }
            }
        }
    }
    let top = exponents.iter().flatten().copied().max().unwrap_or(1).max(central_exponent).max(1);
    let spec = RingSpec::new(p, 1, top)?;
    let d_z = usize::from(central_exponent > 0);
    let mods: Vec<u64> = exponents.iter().flatten().map(|&e| p.pow(e)).collect();
    let zmod = p.pow(central_exponent);
    let pm = p.pow(top);
    let mods_c = mods.clone();
    let mul: MulFn = Arc::new(move |a: &Key, b: &Key| {
        let mut out = vec![0u64; n * n + d_z];
        for i in 0..n {
            for j in 0..n {
                let mut s: u128 = 0;
                for k in 0..n {
                    s += a[i * n + k] as u128 * b[k * n + j] as u128;
                }
                out[i * n + j] = ((s % pm as u128) as u64) % mods_c[i * n + j];
            }
        }
        if d_z == 1 {
            out[n * n] = a[n * n] * b[n * n] % zmod;
        }
        out
    });
    let to_key = |e: &IwahoriElement| -> Result<Key> {
        let m = e.to_matrix()?;
        let mut k: Key = (0..n * n).map(|t| m.get(t / n, t % n).coeffs()[0] % mods[t]).collect();
        if d_z == 1 {
            k.push(e.torus_coord(rs.rank()).coeffs()[0] % zmod);
        }
        Ok(k)
    };
    let h = rs.coxeter_number();
    let one = Tu::one(&spec);
    let mut basis_elems: Vec<(String, IwahoriElement, i64)> = Vec::new();
    let mut roots: Vec<usize> = (0..rs.num_roots()).collect();
    roots.sort_by_key(|&g| (rs.class_of(g), g));
    for g in roots {
        let x = Tu::from_int(&spec, 1).mul_p_pow(rs.delta(g) as u32);
        let e = IwahoriElement::root(rs, &spec, d_z, g, x)?;
        basis_elems.push((format!("u{:?}", rs.root(g)), e, rs.class_of(g)));
    }
    let onep = &one + &Tu::from_int(&spec, p as i64);
    for i in 0..rs.rank() + d_z {
        let e = IwahoriElement::torus(rs, &spec, d_z, i, onep.clone())?;
        let label = if i < rs.rank() { format!("a{}v(1+p)", i + 1) } else { "z(1+p)".into() };
        basis_elems.push((label, e, h));
    }
    let mut identity = vec![0u64; n * n + d_z];
    for i in 0..n {
        identity[i * n + i] = 1;
    }
    if d_z == 1 {
        identity[n * n] = 1 % zmod.max(1);
    }
    let keys: Vec<Key> = basis_elems.iter().map(|(_, e, _)| to_key(e)).collect::<Result<_>>()?;
    let name = format!("{} lattice quotient {:?}", rs.label(), exponents);
    // Enumerate with the whole ordered basis, then regenerate from the degree-1/h part.
    let all = FiniteGroup::generate(&name, p, identity.clone(), keys.clone(), mul.clone(), cap)?;
    let small: Vec<Key> = basis_elems
        .iter()
        .zip(&keys)
        .filter(|((label, _, w), _)| *w == 1 || label.starts_with('z'))
        .map(|(_, k)| k.clone())
        .collect();
    let group = FiniteGroup::generate(&name, p, identity, small, mul, cap)?;
    if group.order() != all.order() {
        return Err(Error::GenerationFailure(format!(
            "degree-1/h elements generate a subgroup of order {} < {}",
            group.order(),
            all.order()
        )));
    }
    let ordered_basis = basis_elems
        .iter()
        .zip(&keys)
        .map(|((label, _, w), k)| (label.clone(), group.index_of(k).expect("in group"), *w))
        .collect();
    Ok(IwahoriQuotient {
        group,
        rs: rs.clone(),
        spec,
        exponents,
        central_exponent,
        ordered_basis,
    })
}

impl IwahoriQuotient {
    /// Image of an Iwahori element (at any precision at least the top exponent).
    pub fn image(&self, e: &IwahoriElement) -> Result<usize> {
        let n = self.rs.rank() + 1;
        let m = e.to_matrix()?;
        let p = self.spec.p();
        let mut k: Key = (0..n * n)
            .map(|t| m.get(t / n, t % n).coeffs()[0] % p.pow(self.exponents[t / n][t % n]))
            .collect();
        if self.central_exponent > 0 {
            k.push(e.torus_coord(self.rs.rank()).coeffs()[0] % p.pow(self.central_exponent));
        }
        self.group
            .index_of(&k)
            .ok_or_else(|| Error::InvalidArgument("element is not in the quotient".into()))
    }

    pub fn d_z(&self) -> usize {
        usize::from(self.central_exponent > 0)
    }
}

/// Per-step comparison of `m^u` and the monomial filtration at `u/h`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiltrationStep {
    pub grade_units: usize,
    pub dim_m_power: usize,
    pub dim_omega: usize,
    pub equal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiltrationComparison {
    pub group: String,
    pub order: usize,
    pub nilpotency_index: usize,
    pub ordered_basis: Vec<(String, i64)>,
    pub monomials: usize,
    /// `z^alpha in m^{h tau(alpha)}` for every monomial of the box.
    pub monomials_in_expected_power: bool,
    pub steps: Vec<FiltrationStep>,
}

impl FiltrationComparison {
    pub fn all_equal(&self) -> bool {
        self.steps.iter().all(|s| s.equal)
    }
}

/// Ladder of the monomial filtration `span{z^alpha : tau(alpha) >= u}` for
/// `u = 0 ..= max tau`, together with each monomial and its weight.
pub fn omega_monomial_filtration(q: &IwahoriQuotient) -> Result<(Vec<Echelon>, Vec<(Vec<u32>, usize)>)> {
    let g = &q.group;
    let p = g.p();
    let n = g.order();
    let xs: Vec<(usize, usize, u64)> = q
        .ordered_basis
        .iter()
        .map(|(_, x, w)| (*x, *w as usize, g.element_order(*x)))
        .collect();
    let box_size: u64 = xs.iter().map(|x| x.2).product();
    if box_size as usize > 64 * n.max(1) {
        return Err(Error::InvalidArgument(format!("monomial box of size {box_size} is too large")));
    }
    let tables: Vec<Vec<u32>> = xs.iter().map(|&(x, _, _)| g.right_table(x)).collect();
    let mut monomials: Vec<(Vec<u32>, usize)> = Vec::with_capacity(box_size as usize);
    let mut start = vec![0u32; n];
    start[g.identity()] = 1;
    fn rec(
        level: usize,
        cur: Vec<u32>,
        tau: usize,
        xs: &[(usize, usize, u64)],
        tables: &[Vec<u32>],
        p: u32,
        out: &mut Vec<(Vec<u32>, usize)>,
    ) {
        if level == xs.len() {
            out.push((cur, tau));
            return;
        }
        let mut v = cur;
        for a in 0..xs[level].2 as usize {
            if v.iter().all(|&c| c == 0) {
                break;
            }
            rec(level + 1, v.clone(), tau + a * xs[level].1, xs, tables, p, out);
            let mut w = vec![0u32; v.len()];
            for (gi, &c) in v.iter().enumerate() {
                if c != 0 {
                    let j = tables[level][gi] as usize;
                    w[j] = (w[j] + c) % p;
                    w[gi] = (w[gi] + p - c) % p;
                }
            }
            v = w;
        }
    }
    rec(0, start, 0, &xs, &tables, p as u32, &mut monomials);
    let max_tau = monomials.iter().map(|m| m.1).max().unwrap_or(0);
    let mut ladder = vec![Echelon::new(p, n); max_tau + 2];
    let mut acc = Echelon::new(p, n);
    for u in (0..=max_tau).rev() {
        for (v, t) in &monomials {
            if *t == u {
                acc.insert(v.clone());
            }
        }
        ladder[u] = acc.clone();
    }
    Ok((ladder, monomials))
}

/// Compares `m^u` with the monomial filtration for `u = 1 ..= k_max`.
/// Steps at or beyond the nilpotency index of the quotient are vacuous and
/// rejected with `PrecisionExceeded`.
pub fn compare_filtrations(
    q: &IwahoriQuotient,
    ladder: &AugmentationLadder,
    k_max: usize,
) -> Result<FiltrationComparison> {
    let l = ladder.nilpotency_index();
    if k_max >= l {
        return Err(Error::PrecisionExceeded(format!(
            "grade {k_max}/h: the quotient's augmentation ideal vanishes from power {l} on"
        )));
    }
    let (omega, monomials) = omega_monomial_filtration(q)?;
    let zero = Echelon::new(q.group.p(), q.group.order());
    let monomials_ok = monomials.iter().all(|(v, t)| ladder.contains(v, *t));
    let steps = (1..=k_max)
        .map(|u| {
            let m = ladder.level(u).expect("level below the nilpotency index");
            let w = omega.get(u).unwrap_or(&zero);
            FiltrationStep {
                grade_units: u,
                dim_m_power: m.dim(),
                dim_omega: w.dim(),
                equal: m.same_space(w),
            }
        })
        .collect();
    Ok(FiltrationComparison {
        group: q.group.name().to_string(),
        order: q.group.order(),
        nilpotency_index: l,
        ordered_basis: q
            .ordered_basis
            .iter()
            .map(|(s, _, w)| (s.clone(), *w))
            .collect(),
        monomials: monomials.len(),
        monomials_in_expected_power: monomials_ok,
        steps,
    })
}

/// Central elements `lambda(1 + p) - 1`: whether they lie in `m` and in `m^2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CentralWitness {
    pub element: String,
    pub in_m: bool,
    /// `false` is a certified non-membership (the image fails).
    pub in_m2: bool,
}

pub fn central_witnesses(q: &IwahoriQuotient, ladder: &AugmentationLadder) -> Vec<CentralWitness> {
    q.ordered_basis
        .iter()
        .filter(|(s, _, _)| s.starts_with('z'))
        .map(|(s, x, _)| {
            let v = q.group.minus_one(*x);
            CentralWitness {
                element: s.clone(),
                in_m: ladder.contains(&v, 1),
                in_m2: ladder.contains(&v, 2),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CongruenceReport {
    pub samples: usize,
    pub checks: usize,
}

/// The five group-ring congruences on random `a, b, c` with random degrees
/// bounded by the certified degrees of `a - 1`, `b - 1`, `c - 1`.
pub fn group_ring_congruences<R: Rng>(
    g: &FiniteGroup,
    ladder: &AugmentationLadder,
    samples: usize,
    rng: &mut R,
) -> Result<CongruenceReport> {
    let p = g.p();
    let pu = p as u32;
    let l = ladder.nilpotency_index().max(1);
    let lin = |terms: &[(usize, i64)]| -> Vec<u32> {
        let mut v = vec![0u32; g.order()];
        for &(x, c) in terms {
            let c = crate::padic::reduce_i64(c, p) as u32;
            v[x] = (v[x] + c) % pu;
            let e = g.identity();
            v[e] = (v[e] + pu - c) % pu;
        }
        v
    };
    let degree = |x: usize, rng: &mut R| -> usize {
        let d = ladder.degree(&g.minus_one(x)).unwrap_or(l);
        rng.gen_range(1..=d.max(1))
    };
    let mut report = CongruenceReport::default();
    let fail = |part: &str, a: usize, b: usize, c: usize| {
        Error::PropertyViolation(format!(
            "part {part} with a = {:?}, b = {:?}, c = {:?}",
            g.key(a),
            g.key(b),
            g.key(c)
        ))
    };
    for _ in 0..samples {
        let (a, b, c) = (
            rng.gen_range(0..g.order()),
            rng.gen_range(0..g.order()),
            rng.gen_range(0..g.order()),
        );
        let (i, j, k) = (degree(a, rng), degree(b, rng), degree(c, rng));
        if !ladder.contains(&g.minus_one(g.pow(a, p)), p as usize) {
            return Err(fail("1", a, b, c));
        }
        let ab = g.mul(a, b);
        let bc = g.mul(b, c);
        let ac = g.mul(a, c);
        let abc = g.mul(ab, c);
        let v2 = lin(&[(abc, 1), (ab, -1), (bc, -1), (ac, -1), (a, 1), (b, 1), (c, 1)]);
        if !ladder.contains(&v2, i + j + k) {
            return Err(fail("2", a, b, c));
        }
        let ba = g.mul(b, a);
        let v3 = lin(&[(ab, 1), (a, -1), (b, -1)]);
        let v3b = lin(&[(ba, 1), (a, -1), (b, -1)]);
        if !ladder.contains(&v3, i + j) || !ladder.contains(&v3b, i + j) {
            return Err(fail("3", a, b, c));
        }
        let ai = g.inverse(a);
        let bi = g.inverse(b);
        if !ladder.contains(&lin(&[(ai, 1), (a, 1)]), 2 * i) {
            return Err(fail("4", a, b, c));
        }
        let c1 = g.mul(g.mul(b, a), g.mul(bi, ai));
        let c2 = g.mul(g.mul(a, b), g.mul(ai, bi));
        if !ladder.contains(&g.minus_one(c1), i + j) || !ladder.contains(&g.minus_one(c2), i + j) {
            return Err(fail("5", a, b, c));
        }
        report.samples += 1;
        report.checks += 7;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MembershipCheck {
    pub element: String,
    pub power: usize,
    /// Quotient membership is necessary for membership in the completed algebra.
    pub holds_in_quotient: bool,
}

/// `u_gamma(p^{delta} z) - 1 in m^k` for `gamma in Phi_k` and
/// `alpha^vee(1 + p) - 1 in m^h`, evaluated in the quotient.
pub fn root_element_memberships<R: Rng>(
    q: &IwahoriQuotient,
    ladder: &AugmentationLadder,
    values_per_root: usize,
    rng: &mut R,
) -> Result<Vec<MembershipCheck>> {
    let rs = &q.rs;
    let spec = &q.spec;
    let d_z = q.d_z();
    let h = rs.coxeter_number() as usize;
    let mut out = Vec::new();
    for gamma in 0..rs.num_roots() {
        for t in 0..values_per_root {
            let z = if t == 0 { 1 } else { rng.gen_range(1..spec.pn()) as i64 };
            let x = Tu::from_int(spec, z).mul_p_pow(rs.delta(gamma) as u32);
            let e = IwahoriElement::root(rs, spec, d_z, gamma, x)?;
            let k = rs.class_of(gamma) as usize;
            let v = q.group.minus_one(q.image(&e)?);
            out.push(MembershipCheck {
                element: format!("u{:?}({z}p^{})", rs.root(gamma), rs.delta(gamma)),
                power: k,
                holds_in_quotient: ladder.contains(&v, k),
            });
        }
    }
    let u = &Tu::one(spec) + &Tu::from_int(spec, spec.p() as i64);
    for alpha in rs.positives() {
        let e = IwahoriElement::coroot(rs, spec, d_z, alpha, &u)?;
        let v = q.group.minus_one(q.image(&e)?);
        out.push(MembershipCheck {
            element: format!("{:?}v(1+p)", rs.root(alpha)),
            power: h,
            holds_in_quotient: ladder.contains(&v, h),
        });
    }
    if let Some(bad) = out.iter().find(|c| !c.holds_in_quotient) {
        return Err(Error::MembershipFailure(format!("{} not in m^{}", bad.element, bad.power)));
    }
    Ok(out)
}

/// `F_0 E_r F_0^{-1} E_r^{-1} = H_r L^p U^p` in `SL_2(O_F/p^N)` with
/// `L = [[1, 0], [-p[xi]^r(1 + p[xi]^r), 1]]` and `U = [[1, -[xi]^{2r}(1 + p[xi]^r)^{-1}], [0, 1]]`.
pub fn sl2_twist_identity(spec: &Arc<RingSpec>, r: usize) -> Result<bool> {
    let t = teichmuller(spec, r)?;
    let p = Tu::from_int(spec, spec.p() as i64);
    let one = Tu::one(spec);
    let zero = Tu::zero(spec);
    let m = |a: &Tu, b: &Tu, c: &Tu, d: &Tu| {
        Matrix::from_rows(vec![vec![a.clone(), b.clone()], vec![c.clone(), d.clone()]])
    };
    let pt = &p * &t;
    let e_r = m(&one, &t, &zero, &one);
    let f_0 = m(&one, &zero, &(-&p), &one);
    let onept = &one + &pt;
    let h_r = m(&onept, &zero, &zero, &onept.inv_unit()?);
    let lower = m(&one, &zero, &(-&(&pt * &onept)), &one);
    let upper = m(&one, &(-&(&(&t * &t) * &onept.inv_unit()?)), &zero, &one);
    let lhs = f_0.mul(&e_r).mul(&f_0.inverse()?).mul(&e_r.inverse()?);
    let prime = spec.p();
    let rhs = h_r.mul(&lower.pow(prime)).mul(&upper.pow(prime));
    Ok(lhs == rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn a(label: &str) -> Arc<RootSystem> {
        Arc::new(RootSystem::from_label(label).unwrap())
    }

    #[test]
    fn cyclic_ladders() {
        let c = FiniteGroup::cyclic(5).unwrap();
        let l = AugmentationLadder::compute(&c, None);
        assert_eq!(l.graded_dims(), vec![1; 5]);
        let c2 = FiniteGroup::cyclic_square(3).unwrap();
        let l2 = AugmentationLadder::compute(&c2, None);
        assert_eq!(l2.graded_dims(), vec![1, 2, 3, 2, 1]);
        assert_eq!(l2.graded_dims().iter().sum::<usize>(), 9);
    }

    #[test]
    fn trivial_group() {
        let mul: MulFn = Arc::new(|a: &Key, _: &Key| a.clone());
        let g = FiniteGroup::generate("1", 5, vec![0], vec![], mul, 10).unwrap();
        let l = AugmentationLadder::compute(&g, None);
        assert_eq!(l.graded_dims(), vec![1]);
    }

    #[test]
    fn a1_mod_25() {
        let q = iwahori_lattice_quotient(&a("A1"), 5, vec![vec![2, 2], vec![2, 2]], 0, DEFAULT_GROUP_CAP).unwrap();
        assert_eq!(q.group.order(), 625);
        let l = AugmentationLadder::compute(&q.group, None);
        assert_eq!(l.graded_dims()[1], 2);
        let cmp = compare_filtrations(&q, &l, 3).unwrap();
        assert!(cmp.all_equal());
        assert!(cmp.monomials_in_expected_power);
        assert_eq!(cmp.ordered_basis.iter().map(|b| b.1).collect::<Vec<_>>(), vec![1, 1, 2]);
        assert!(matches!(
            compare_filtrations(&q, &l, l.nilpotency_index()),
            Err(Error::PrecisionExceeded(_))
        ));
    }

    #[test]
    fn heisenberg_congruences() {
        let g = FiniteGroup::heisenberg(5).unwrap();
        assert_eq!(g.order(), 125);
        let l = AugmentationLadder::compute(&g, None);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = group_ring_congruences(&g, &l, 50, &mut rng).unwrap();
        assert_eq!(r.samples, 50);
    }

    #[test]
    fn central_factor_not_in_m2() {
        let q = iwahori_lattice_quotient(&a("A1"), 5, vec![vec![2, 1], vec![2, 2]], 2, DEFAULT_GROUP_CAP).unwrap();
        assert_eq!(q.group.order(), 625);
        let l = AugmentationLadder::compute(&q.group, None);
        let w = central_witnesses(&q, &l);
        assert_eq!(w.len(), 1);
        assert!(w[0].in_m && !w[0].in_m2);
    }

    #[test]
    fn sl2_twist_matrix_identity() {
        for f in [1, 2] {
            let spec = RingSpec::new(5, f, 3).unwrap();
            for r in 0..f {
                assert!(sl2_twist_identity(&spec, r).unwrap());
            }
        }
    }

    #[test]
    fn bad_exponents_rejected() {
        let r = iwahori_lattice_quotient(&a("A1"), 5, vec![vec![1, 2], vec![1, 1]], 0, DEFAULT_GROUP_CAP);
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }
}
