//! Irreducible reduced root systems in the simple-root basis.

use std::cmp::Reverse;
use std::collections::HashMap;
use std::fmt;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::padic::is_prime;

/// Index of a root in the fixed total order.
pub type RootId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl Family {
    pub fn letter(self) -> char {
        match self {
            Family::A => 'A',
            Family::B => 'B',
            Family::C => 'C',
            Family::D => 'D',
            Family::E => 'E',
            Family::F => 'F',
            Family::G => 'G',
        }
    }

    fn from_letter(c: char) -> Option<Family> {
        Some(match c.to_ascii_uppercase() {
            'A' => Family::A,
            'B' => Family::B,
            'C' => Family::C,
            'D' => Family::D,
            'E' => Family::E,
            'F' => Family::F,
            'G' => Family::G,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CartanType {
    pub family: Family,
    pub rank: usize,
}

impl CartanType {
    pub fn new(family: Family, rank: usize) -> Result<Self> {
        let ok = match family {
            Family::A => rank >= 1,
            Family::B | Family::C => rank >= 2,
            Family::D => rank >= 4,
            Family::E => (6..=8).contains(&rank),
            Family::F => rank == 4,
            Family::G => rank == 2,
        };
        if ok {
            Ok(CartanType { family, rank })
        } else {
            Err(Error::UnsupportedType(format!("{}{}", family.letter(), rank)))
        }
    }

    /// Parses labels such as `A2`, `g2` or `E_8`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::UnsupportedType(s.to_string());
        let mut chars = s.chars();
        let fam = chars.next().and_then(Family::from_letter).ok_or_else(bad)?;
        let rest = chars.as_str().trim_start_matches('_');
        let rank: usize = rest.parse().map_err(|_| bad())?;
        CartanType::new(fam, rank)
    }

    /// All types of rank at most `max_rank`.
    pub fn all_up_to_rank(max_rank: usize) -> Vec<CartanType> {
        let mut out = Vec::new();
        for rank in 1..=max_rank {
            for fam in [
                Family::A,
                Family::B,
                Family::C,
                Family::D,
                Family::E,
                Family::F,
                Family::G,
            ] {
                if let Ok(t) = CartanType::new(fam, rank) {
                    out.push(t);
                }
            }
        }
        out
    }
}

impl fmt::Display for CartanType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.family.letter(), self.rank)
    }
}

/// Symmetric Gram matrix `(alpha_i, alpha_j)` scaled so short roots have length 2.
fn gram_matrix(t: CartanType) -> Vec<Vec<i64>> {
    let n = t.rank;
    let mut g = vec![vec![0i64; n]; n];
    let link = |g: &mut Vec<Vec<i64>>, i: usize, j: usize, v: i64| {
        g[i][j] = v;
        g[j][i] = v;
    };
    match t.family {
        Family::A => {
            for i in 0..n {
                g[i][i] = 2;
                if i + 1 < n {
                    link(&mut g, i, i + 1, -1);
                }
            }
        }
        Family::B => {
            for i in 0..n - 1 {
                g[i][i] = 4;
                link(&mut g, i, i + 1, -2);
            }
            g[n - 1][n - 1] = 2;
        }
        Family::C => {
            for i in 0..n - 1 {
                g[i][i] = 2;
                if i + 2 < n {
                    link(&mut g, i, i + 1, -1);
                }
            }
            g[n - 1][n - 1] = 4;
            link(&mut g, n - 2, n - 1, -2);
        }
        Family::D => {
            for i in 0..n {
                g[i][i] = 2;
            }
            for i in 0..n - 2 {
                link(&mut g, i, i + 1, -1);
            }
            link(&mut g, n - 3, n - 1, -1);
        }
        Family::E => {
            for i in 0..n {
                g[i][i] = 2;
            }
            link(&mut g, 0, 2, -1);
            link(&mut g, 1, 3, -1);
            for i in 2..n - 1 {
                link(&mut g, i, i + 1, -1);
            }
        }
        Family::F => {
            g[0][0] = 4;
            g[1][1] = 4;
            g[2][2] = 2;
            g[3][3] = 2;
            link(&mut g, 0, 1, -2);
            link(&mut g, 1, 2, -2);
            link(&mut g, 2, 3, -1);
        }
        Family::G => {
            g[0][0] = 2;
            g[1][1] = 6;
            link(&mut g, 0, 1, -3);
        }
    }
    g
}

fn det_bareiss(m: &[Vec<i64>]) -> i64 {
    let n = m.len();
    let mut a: Vec<Vec<i128>> = m
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    (sign * a[n - 1][n - 1]) as i64
}

/// Roots of `Phi` with `ht = k mod h`, split by sign.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeightClass {
    pub k: i64,
    pub positive: Vec<RootId>,
    pub negative: Vec<RootId>,
}

impl HeightClass {
    pub fn members(&self) -> Vec<RootId> {
        let mut v = self.negative.clone();
        v.extend(&self.positive);
        v.sort_unstable();
        v
    }

    pub fn len(&self) -> usize {
        self.positive.len() + self.negative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// An irreducible root system with its roots listed in the fixed total order:
/// by height, ties broken by descending lexicographic order of coordinates.
#[derive(Debug, Clone)]
pub struct RootSystem {
    ctype: CartanType,
    gram: Vec<Vec<i64>>,
    cartan: Vec<Vec<i64>>,
    roots: Vec<Vec<i64>>,
    heights: Vec<i64>,
    index: HashMap<Vec<i64>, RootId>,
    neg: Vec<RootId>,
    sum: Vec<Option<RootId>>,
    simple: Vec<RootId>,
    h: i64,
}

impl PartialEq for RootSystem {
    fn eq(&self, other: &Self) -> bool {
        self.ctype == other.ctype
    }
}

impl Eq for RootSystem {}

impl RootSystem {
    pub fn build(ctype: CartanType) -> RootSystem {
        let n = ctype.rank;
        let gram = gram_matrix(ctype);
        let cartan: Vec<Vec<i64>> = (0..n)
            .map(|i| (0..n).map(|j| 2 * gram[i][j] / gram[i][i]).collect())
            .collect();

        // Positive roots by height using root strings.
        let mut positives: Vec<Vec<i64>> = Vec::new();
        let mut known: HashMap<Vec<i64>, ()> = HashMap::new();
        let mut layer: Vec<Vec<i64>> = (0..n)
            .map(|i| {
                let mut v = vec![0; n];
                v[i] = 1;
                v
            })
            .collect();
        while !layer.is_empty() {
            for r in &layer {
                known.insert(r.clone(), ());
            }
            positives.extend(layer.iter().cloned());
            let mut next: Vec<Vec<i64>> = Vec::new();
            for g in &layer {
                for i in 0..n {
                    let mut p = 0;
                    let mut down = g.clone();
                    loop {
                        down[i] -= 1;
                        if known.contains_key(&down) {
                            p += 1;
                        } else {
                            break;
                        }
                    }
                    let pair: i64 = (0..n).map(|j| g[j] * cartan[i][j]).sum();
                    if p - pair > 0 {
                        let mut up = g.clone();
                        up[i] += 1;
                        if !next.contains(&up) {
                            next.push(up);
                        }
                    }
                }
            }
            layer = next;
        }

        let mut roots: Vec<Vec<i64>> = positives.clone();
        roots.extend(positives.iter().map(|r| r.iter().map(|c| -c).collect::<Vec<_>>()));
        roots.sort_by_key(|r| (r.iter().sum::<i64>(), Reverse(r.clone())));
        let heights: Vec<i64> = roots.iter().map(|r| r.iter().sum()).collect();
        let index: HashMap<Vec<i64>, RootId> =
            roots.iter().cloned().enumerate().map(|(i, r)| (r, i)).collect();
        let neg: Vec<RootId> = roots
            .iter()
            .map(|r| index[&r.iter().map(|c| -c).collect::<Vec<_>>()])
            .collect();
        let m = roots.len();
        let mut sum = vec![None; m * m];
        for a in 0..m {
            for b in 0..m {
                let s: Vec<i64> = roots[a].iter().zip(&roots[b]).map(|(x, y)| x + y).collect();
                sum[a * m + b] = index.get(&s).copied();
            }
        }
        let simple = (0..n)
            .map(|i| {
                let mut v = vec![0; n];
                v[i] = 1;
                index[&v]
            })
            .collect();
        let h = 1 + heights.iter().max().copied().unwrap_or(0);
        RootSystem {
            ctype,
            gram,
            cartan,
            roots,
            heights,
            index,
            neg,
            sum,
            simple,
            h,
        }
    }

    pub fn from_label(label: &str) -> Result<RootSystem> {
        Ok(RootSystem::build(CartanType::parse(label)?))
    }

    pub fn cartan_type(&self) -> CartanType {
        self.ctype
    }

    pub fn rank(&self) -> usize {
        self.ctype.rank
    }

    pub fn label(&self) -> String {
        self.ctype.to_string()
    }

    pub fn num_roots(&self) -> usize {
        self.roots.len()
    }

    pub fn root(&self, id: RootId) -> &[i64] {
        &self.roots[id]
    }

    pub fn id_of(&self, coords: &[i64]) -> Option<RootId> {
        self.index.get(coords).copied()
    }

    pub fn height(&self, id: RootId) -> i64 {
        self.heights[id]
    }

    pub fn is_positive(&self, id: RootId) -> bool {
        self.heights[id] > 0
    }

    /// `delta_gamma`: 0 on positive roots, 1 on negative roots.
    pub fn delta(&self, id: RootId) -> i64 {
        i64::from(!self.is_positive(id))
    }

    pub fn neg(&self, id: RootId) -> RootId {
        self.neg[id]
    }

    /// `a + b` if it is a root.
    pub fn add(&self, a: RootId, b: RootId) -> Option<RootId> {
        self.sum[a * self.roots.len() + b]
    }

    /// `i a + j b` if it is a root.
    pub fn combo(&self, a: RootId, i: i64, b: RootId, j: i64) -> Option<RootId> {
        let v: Vec<i64> = self.roots[a]
            .iter()
            .zip(&self.roots[b])
            .map(|(x, y)| i * x + j * y)
            .collect();
        self.id_of(&v)
    }

    pub fn simple(&self, i: usize) -> RootId {
        self.simple[i]
    }

    pub fn simple_roots(&self) -> &[RootId] {
        &self.simple
    }

    pub fn positives(&self) -> Vec<RootId> {
        (0..self.num_roots()).filter(|&i| self.is_positive(i)).collect()
    }

    pub fn negatives(&self) -> Vec<RootId> {
        (0..self.num_roots()).filter(|&i| !self.is_positive(i)).collect()
    }

    pub fn highest_root(&self) -> RootId {
        self.num_roots() - 1
    }

    pub fn coxeter_number(&self) -> i64 {
        self.h
    }

    /// The class `k in 1..h` with `gamma in Phi_k`.
    pub fn class_of(&self, id: RootId) -> i64 {
        self.heights[id].rem_euclid(self.h)
    }

    pub fn height_class(&self, k: i64) -> Result<HeightClass> {
        if k < 1 || k >= self.h {
            return Err(Error::BadIndex(k));
        }
        let mut positive = Vec::new();
        let mut negative = Vec::new();
        for id in 0..self.num_roots() {
            if self.class_of(id) == k {
                if self.is_positive(id) {
                    positive.push(id);
                } else {
                    negative.push(id);
                }
            }
        }
        Ok(HeightClass {
            k,
            positive,
            negative,
        })
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }

    /// `cartan[i][j] = <alpha_j, alpha_i^vee>`.
    pub fn cartan(&self) -> &[Vec<i64>] {
        &self.cartan
    }

    pub fn cartan_determinant(&self) -> i64 {
        det_bareiss(&self.cartan)
    }

    /// `p` is admissible when it is prime and `p > h + 1`.
    pub fn check_admissible(&self, p: u64) -> bool {
        is_prime(p) && p as i64 > self.h + 1
    }

    pub fn inner(&self, a: RootId, b: RootId) -> i64 {
        let (x, y) = (&self.roots[a], &self.roots[b]);
        let n = self.rank();
        let mut s = 0;
        for i in 0..n {
            if x[i] == 0 {
                continue;
            }
            for j in 0..n {
                s += x[i] * self.gram[i][j] * y[j];
            }
        }
        s
    }

    pub fn norm2(&self, a: RootId) -> i64 {
        self.inner(a, a)
    }

    /// `<gamma, alpha^vee>` for roots `gamma`, `alpha`.
    pub fn pairing_roots(&self, gamma: RootId, alpha: RootId) -> i64 {
        2 * self.inner(gamma, alpha) / self.norm2(alpha)
    }

    /// Coordinates of `gamma^vee` in the simple coroot basis.
    pub fn coroot_coeffs(&self, gamma: RootId) -> Vec<i64> {
        let n2 = self.norm2(gamma);
        self.roots[gamma]
            .iter()
            .enumerate()
            .map(|(i, &c)| c * self.gram[i][i] / n2)
            .collect()
    }

    /// `<gamma, alpha_j^vee>`.
    pub fn pairing_simple(&self, gamma: RootId, j: usize) -> i64 {
        let r = &self.roots[gamma];
        (0..self.rank()).map(|i| r[i] * self.cartan[j][i]).sum()
    }

    /// `max{m : beta - m alpha in Phi}`.
    pub fn p_string(&self, alpha: RootId, beta: RootId) -> i64 {
        let mut m = 0;
        while self.combo(beta, 1, alpha, -(m + 1)).is_some() {
            m += 1;
        }
        m
    }

    /// Some simple `delta` with `alpha + delta` a positive root.
    pub fn root_addition_partner(&self, alpha: RootId) -> Result<RootId> {
        if !self.is_positive(alpha) {
            return Err(Error::BadIndex(alpha as i64));
        }
        self.simple
            .iter()
            .copied()
            .find(|&d| self.add(alpha, d).is_some())
            .ok_or(Error::HighestRoot)
    }

    /// For negative `alpha` other than the lowest root: a simple `beta` with
    /// `alpha - beta` negative, so that `alpha = alpha' + beta`.
    pub fn negative_decomposition(&self, alpha: RootId) -> Result<(RootId, RootId)> {
        if self.is_positive(alpha) {
            return Err(Error::BadIndex(alpha as i64));
        }
        for &b in &self.simple {
            if let Some(a2) = self.combo(alpha, 1, b, -1) {
                return Ok((a2, b));
            }
        }
        Err(Error::HighestRoot)
    }

    /// Summary for `roots info`.
    pub fn to_json(&self) -> Value {
        let roots: Vec<Value> = (0..self.num_roots())
            .map(|id| {
                json!({
                    "coords": self.roots[id],
                    "height": self.heights[id],
                    "class": self.class_of(id),
                })
            })
            .collect();
        let classes: Vec<Value> = (1..self.h)
            .map(|k| {
                let c = self.height_class(k).expect("k in range");
                json!({
                    "k": k,
                    "positive": c.positive.iter().map(|&i| &self.roots[i]).collect::<Vec<_>>(),
                    "negative": c.negative.iter().map(|&i| &self.roots[i]).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({
            "type": self.label(),
            "rank": self.rank(),
            "num_roots": self.num_roots(),
            "coxeter_number": self.h,
            "cartan": self.cartan,
            "cartan_determinant": self.cartan_determinant(),
            "total_order": "height, then descending lexicographic coordinates",
            "roots": roots,
            "height_classes": classes,
        })
    }
}

/// `X_*(T)` modelled as `Z^{|Delta| + d_Z}`: simple coroots followed by a
/// basis `B` of central cocharacters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cocharacters {
    rank: usize,
    d_z: usize,
}

impl Cocharacters {
    pub fn new(rs: &RootSystem, d_z: usize) -> Self {
        Cocharacters {
            rank: rs.rank(),
            d_z,
        }
    }

    pub fn rank_t(&self) -> usize {
        self.rank + self.d_z
    }

    pub fn d_z(&self) -> usize {
        self.d_z
    }

    pub fn is_central(&self, lambda: usize) -> bool {
        lambda >= self.rank
    }

    /// `<gamma, lambda>` for a basis cocharacter `lambda`.
    pub fn pairing(&self, rs: &RootSystem, gamma: RootId, lambda: usize) -> i64 {
        if self.is_central(lambda) {
            0
        } else {
            rs.pairing_simple(gamma, lambda)
        }
    }

    pub fn label(&self, lambda: usize) -> String {
        if self.is_central(lambda) {
            format!("z{}", lambda - self.rank + 1)
        } else {
            format!("a{}v", lambda + 1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expected(t: CartanType) -> (usize, i64, i64) {
        let n = t.rank as i64;
        match t.family {
            Family::A => ((n * (n + 1)) as usize, n + 1, n + 1),
            Family::B | Family::C => ((2 * n * n) as usize, 2 * n, 2),
            Family::D => ((2 * n * (n - 1)) as usize, 2 * n - 2, 4),
            Family::E => match n {
                6 => (72, 12, 3),
                7 => (126, 18, 2),
                _ => (240, 30, 1),
            },
            Family::F => (48, 12, 1),
            Family::G => (12, 6, 1),
        }
    }

    #[test]
    fn counts_coxeter_and_determinants() {
        for t in CartanType::all_up_to_rank(8) {
            let rs = RootSystem::build(t);
            let (n, h, det) = expected(t);
            assert_eq!(rs.num_roots(), n, "{t}");
            assert_eq!(rs.coxeter_number(), h, "{t}");
            assert_eq!(rs.cartan_determinant(), det, "{t}");
            assert_eq!(rs.num_roots() as i64, rs.rank() as i64 * h, "{t}");
        }
    }

    #[test]
    fn a2_examples() {
        let rs = RootSystem::from_label("A2").unwrap();
        assert_eq!(rs.num_roots(), 6);
        let pos: Vec<&[i64]> = rs.positives().iter().map(|&i| rs.root(i)).collect();
        assert_eq!(pos, vec![&[1, 0][..], &[0, 1], &[1, 1]]);
        let c1 = rs.height_class(1).unwrap();
        let mut m: Vec<Vec<i64>> = c1.members().iter().map(|&i| rs.root(i).to_vec()).collect();
        m.sort();
        assert_eq!(m, vec![vec![-1, -1], vec![0, 1], vec![1, 0]]);
        let a1 = rs.simple(0);
        assert_eq!(rs.root_addition_partner(a1), Ok(rs.simple(1)));
        assert_eq!(rs.root_addition_partner(rs.highest_root()), Err(Error::HighestRoot));
        assert_eq!(rs.pairing_simple(a1, 0), 2);
        assert_eq!(rs.pairing_simple(a1, 1), -1);
        assert!(rs.check_admissible(5));
        assert!(!rs.check_admissible(3));
        assert!(RootSystem::from_label("A0").is_err());
        assert!(RootSystem::from_label("G3").is_err());
    }

    #[test]
    fn total_order_and_classes() {
        for t in CartanType::all_up_to_rank(8) {
            let rs = RootSystem::build(t);
            for i in 1..rs.num_roots() {
                assert!(rs.height(i - 1) <= rs.height(i));
            }
            let h = rs.coxeter_number();
            let mut total = 0;
            for k in 1..h {
                let c = rs.height_class(k).unwrap();
                total += c.len();
                for g in c.members() {
                    assert_eq!(rs.class_of(rs.neg(g)), h - k);
                }
            }
            assert_eq!(total, rs.num_roots());
            assert_eq!(rs.height_class(1).unwrap().len(), rs.rank() + 1, "{t}");
            for a in 0..rs.num_roots() {
                assert_eq!(rs.pairing_roots(a, a), 2);
                let cv = rs.coroot_coeffs(a);
                let direct: i64 = (0..rs.rank()).map(|j| cv[j] * rs.pairing_simple(a, j)).sum();
                assert_eq!(direct, 2);
            }
        }
    }

    #[test]
    fn partners_exist() {
        for t in CartanType::all_up_to_rank(4) {
            let rs = RootSystem::build(t);
            for a in rs.positives() {
                if a != rs.highest_root() {
                    let d = rs.root_addition_partner(a).unwrap();
                    assert!(rs.is_positive(rs.add(a, d).unwrap()));
                }
            }
            let lowest = rs.neg(rs.highest_root());
            for a in rs.negatives() {
                if a != lowest {
                    let (a2, b) = rs.negative_decomposition(a).unwrap();
                    assert!(!rs.is_positive(a2));
                    assert_eq!(rs.add(a2, b), Some(a));
                }
            }
        }
    }
}
