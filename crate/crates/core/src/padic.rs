//! Exact arithmetic in `O_F / p^N` for `F / Q_p` unramified of degree `f`.
//!
//! Elements are residues in `(Z/p^N)[x] / (modulus)` where `modulus` is a
//! monic lift of an irreducible polynomial over `F_p`. The class of `x`
//! reduces to the generator `xi` of the residue field.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// `p`-adic valuation of a nonzero integer.
pub fn vp(mut n: u64, p: u64) -> u32 {
    debug_assert!(n != 0);
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

pub fn inv_mod_p(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return None;
    }
    Some(pow_mod(a, p - 2, p))
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = ((r as u128 * b as u128) % m as u128) as u64;
        }
        b = ((b as u128 * b as u128) % m as u128) as u64;
        e >>= 1;
    }
    r
}

/// Reduce a signed integer into `[0, m)`.
pub fn reduce_i64(a: i64, m: u64) -> u64 {
    a.rem_euclid(m as i64) as u64
}

/// Parameters of the truncated ring `O_F / p^N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct RingSpec {
    p: u64,
    f: usize,
    #[serde(rename = "N")]
    n: u32,
    /// Monic modulus, `f + 1` coefficients from the constant term up.
    modulus: Vec<u64>,
    #[serde(skip)]
    pn: u64,
}

impl RingSpec {
    /// Builds the ring with the lexicographically smallest monic irreducible
    /// modulus of degree `f` (coefficient vectors read as base-`p` numbers,
    /// constant term least significant).
    pub fn new(p: u64, f: usize, n: u32) -> Result<Arc<RingSpec>> {
        if !is_prime(p) {
            return Err(Error::NonPrime(p));
        }
        if f == 0 {
            return Err(Error::BadDegree);
        }
        if n == 0 {
            return Err(Error::BadPrecision);
        }
        let pn = (p as u128).checked_pow(n).filter(|&v| v < (1u128 << 62));
        let pn = pn.ok_or(Error::BadPrecision)? as u64;
        let modulus = smallest_irreducible(p, f);
        Ok(Arc::new(RingSpec {
            p,
            f,
            n,
            modulus,
            pn,
        }))
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn f(&self) -> usize {
        self.f
    }
    /// Truncation level `N`.
    pub fn precision(&self) -> u32 {
        self.n
    }
    /// `p^N`.
    pub fn pn(&self) -> u64 {
        self.pn
    }
    /// `q = p^f`, the size of the residue field.
    pub fn q(&self) -> u64 {
        self.p.pow(self.f as u32)
    }
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    /// The same extension truncated at a different level.
    pub fn with_precision(&self, n: u32) -> Result<Arc<RingSpec>> {
        RingSpec::new(self.p, self.f, n)
    }
}

fn poly_rem_mod_p(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    // b monic
    let mut r: Vec<u64> = a.to_vec();
    let db = b.len() - 1;
    while r.len() > db {
        let lead = *r.last().unwrap() % p;
        let shift = r.len() - 1 - db;
        if lead != 0 {
            for (i, &c) in b.iter().enumerate() {
                let t = (lead * c) % p;
                r[shift + i] = (r[shift + i] + p - t) % p;
            }
        }
        r.pop();
    }
    r
}

fn monic_from_index(mut k: u64, p: u64, d: usize) -> Vec<u64> {
    let mut c = Vec::with_capacity(d + 1);
    for _ in 0..d {
        c.push(k % p);
        k /= p;
    }
    c.push(1);
    c
}

pub(crate) fn is_irreducible_mod_p(poly: &[u64], p: u64) -> bool {
    let deg = poly.len() - 1;
    for d in 1..=deg / 2 {
        for k in 0..p.pow(d as u32) {
            let g = monic_from_index(k, p, d);
            if poly_rem_mod_p(poly, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn smallest_irreducible(p: u64, f: usize) -> Vec<u64> {
    (0..p.pow(f as u32))
        .map(|k| monic_from_index(k, p, f))
        .find(|m| is_irreducible_mod_p(m, p))
        .expect("irreducible polynomials exist in every degree")
}

/// Valuation of an element of `O_F / p^N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Valuation {
    Finite(u32),
    /// The element vanishes mod `p^N`; its true valuation is at least `N`.
    AtLeast(u32),
}

impl Valuation {
    pub fn finite(self) -> Option<u32> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::AtLeast(_) => None,
        }
    }
    /// Known lower bound on the valuation.
    pub fn lower_bound(self) -> u32 {
        match self {
            Valuation::Finite(v) | Valuation::AtLeast(v) => v,
        }
    }
}

/// An element of `O_F / p^N`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TruncatedUnramified {
    coeffs: Vec<u64>,
    spec: Arc<RingSpec>,
}

#[derive(Serialize, Deserialize)]
struct ElementJson {
    p: u64,
    f: usize,
    #[serde(rename = "N")]
    n: u32,
    coeffs: Vec<u64>,
}

impl fmt::Debug for TruncatedUnramified {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} mod {}^{}", self.coeffs, self.spec.p, self.spec.n)
    }
}

impl fmt::Display for TruncatedUnramified {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.spec.f == 1 {
            write!(f, "{}", self.coeffs[0])
        } else {
            let terms: Vec<String> = self
                .coeffs
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(i, c)| match i {
                    0 => format!("{c}"),
                    1 => format!("{c}x"),
                    _ => format!("{c}x^{i}"),
                })
                .collect();
            if terms.is_empty() {
                write!(f, "0")
            } else {
                write!(f, "{}", terms.join(" + "))
            }
        }
    }
}

impl TruncatedUnramified {
    pub fn from_coeffs(spec: &Arc<RingSpec>, coeffs: &[u64]) -> Self {
        let mut c = vec![0; spec.f];
        for (i, &v) in coeffs.iter().enumerate() {
            if i < spec.f {
                c[i] = v % spec.pn;
            } else {
                // fold higher powers through the modulus
                let mut mono = vec![0; i + 1];
                mono[i] = v % spec.pn;
                let r = reduce_poly(&mono, spec);
                for (j, rv) in r.into_iter().enumerate() {
                    c[j] = (c[j] + rv) % spec.pn;
                }
            }
        }
        TruncatedUnramified {
            coeffs: c,
            spec: spec.clone(),
        }
    }

    pub fn from_int(spec: &Arc<RingSpec>, a: i64) -> Self {
        let mut c = vec![0; spec.f];
        c[0] = reduce_i64(a, spec.pn);
        TruncatedUnramified {
            coeffs: c,
            spec: spec.clone(),
        }
    }

    pub fn zero(spec: &Arc<RingSpec>) -> Self {
        Self::from_int(spec, 0)
    }

    pub fn one(spec: &Arc<RingSpec>) -> Self {
        Self::from_int(spec, 1)
    }

    /// The class of `x`, reducing to the residue-field generator.
    pub fn x(spec: &Arc<RingSpec>) -> Self {
        Self::from_coeffs(spec, &[0, 1])
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn spec(&self) -> &Arc<RingSpec> {
        &self.spec
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn valuation(&self) -> Valuation {
        self.coeffs
            .iter()
            .filter(|&&c| c != 0)
            .map(|&c| vp(c, self.spec.p))
            .min()
            .map_or(Valuation::AtLeast(self.spec.n), Valuation::Finite)
    }

    pub fn is_unit(&self) -> bool {
        self.valuation() == Valuation::Finite(0)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.spec == other.spec {
            Ok(())
        } else {
            Err(Error::RingMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn add_unchecked(&self, other: &Self) -> Self {
        let pn = self.spec.pn;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| (a + b) % pn)
            .collect();
        TruncatedUnramified {
            coeffs,
            spec: self.spec.clone(),
        }
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let pn = self.spec.pn as u128;
        let f = self.spec.f;
        if f == 1 {
            let v = (self.coeffs[0] as u128 * other.coeffs[0] as u128) % pn;
            return TruncatedUnramified {
                coeffs: vec![v as u64],
                spec: self.spec.clone(),
            };
        }
        let mut prod = vec![0u128; 2 * f - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                prod[i + j] = (prod[i + j] + a as u128 * b as u128) % pn;
            }
        }
        let prod: Vec<u64> = prod.into_iter().map(|v| v as u64).collect();
        TruncatedUnramified {
            coeffs: reduce_poly(&prod, &self.spec),
            spec: self.spec.clone(),
        }
    }

    pub fn scale(&self, k: i64) -> Self {
        let k = reduce_i64(k, self.spec.pn) as u128;
        let pn = self.spec.pn as u128;
        TruncatedUnramified {
            coeffs: self
                .coeffs
                .iter()
                .map(|&c| ((c as u128 * k) % pn) as u64)
                .collect(),
            spec: self.spec.clone(),
        }
    }

    pub fn pow(&self, mut e: u128) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(&self.spec);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_unchecked(&base);
            }
            base = base.mul_unchecked(&base);
            e >>= 1;
        }
        acc
    }

    /// Inverse of a unit. The unit group has order `(q - 1) q^(N-1)`.
    pub fn inv_unit(&self) -> Result<Self> {
        if !self.is_unit() {
            return Err(Error::NotAUnit);
        }
        let q = self.spec.q() as u128;
        let order = (q - 1) * q.pow(self.spec.n - 1);
        Ok(self.pow(order - 1))
    }

    /// Divides by `p^d`; coefficients must all be divisible.
    pub fn div_p_pow(&self, d: u32) -> Option<Self> {
        let pd = self.spec.p.pow(d);
        if self.coeffs.iter().any(|&c| c % pd != 0) {
            return None;
        }
        Some(TruncatedUnramified {
            coeffs: self.coeffs.iter().map(|&c| c / pd).collect(),
            spec: self.spec.clone(),
        })
    }

    /// Multiplies by `p^d` (truncating).
    pub fn mul_p_pow(&self, d: u32) -> Self {
        let pn = self.spec.pn as u128;
        let pd = (self.spec.p as u128).pow(d) % pn;
        TruncatedUnramified {
            coeffs: self
                .coeffs
                .iter()
                .map(|&c| ((c as u128 * pd) % pn) as u64)
                .collect(),
            spec: self.spec.clone(),
        }
    }

    /// Image in the residue field `k_F`.
    pub fn residue(&self) -> Residue {
        let p = self.spec.p;
        Residue {
            coeffs: self.coeffs.iter().map(|&c| c % p).collect(),
            spec: self.spec.clone(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ElementJson {
            p: self.spec.p,
            f: self.spec.f,
            n: self.spec.n,
            coeffs: self.coeffs.clone(),
        })
        .expect("plain struct serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let e: ElementJson = serde_json::from_value(v.clone())
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let spec = RingSpec::new(e.p, e.f, e.n)?;
        if e.coeffs.len() != e.f || e.coeffs.iter().any(|&c| c >= spec.pn) {
            return Err(Error::InvalidArgument("coefficient array out of range".into()));
        }
        Ok(Self::from_coeffs(&spec, &e.coeffs))
    }
}

fn reduce_poly(poly: &[u64], spec: &RingSpec) -> Vec<u64> {
    let f = spec.f;
    let pn = spec.pn as u128;
    let mut r: Vec<u128> = poly.iter().map(|&c| c as u128).collect();
    while r.len() > f {
        let lead = r.pop().unwrap() % pn;
        let shift = r.len() - f;
        if lead != 0 {
            for i in 0..f {
                let t = lead * spec.modulus[i] as u128 % pn;
                r[shift + i] = (r[shift + i] + pn - t) % pn;
            }
        }
    }
    r.resize(f, 0);
    r.into_iter().map(|c| c as u64).collect()
}

impl Add for &TruncatedUnramified {
    type Output = TruncatedUnramified;
    fn add(self, rhs: Self) -> TruncatedUnramified {
        self.try_add(rhs).expect("ring mismatch")
    }
}

impl Sub for &TruncatedUnramified {
    type Output = TruncatedUnramified;
    fn sub(self, rhs: Self) -> TruncatedUnramified {
        self.try_add(&-rhs).expect("ring mismatch")
    }
}

impl Mul for &TruncatedUnramified {
    type Output = TruncatedUnramified;
    fn mul(self, rhs: Self) -> TruncatedUnramified {
        self.try_mul(rhs).expect("ring mismatch")
    }
}

impl Neg for &TruncatedUnramified {
    type Output = TruncatedUnramified;
    fn neg(self) -> TruncatedUnramified {
        let pn = self.spec.pn;
        TruncatedUnramified {
            coeffs: self.coeffs.iter().map(|&c| (pn - c) % pn).collect(),
            spec: self.spec.clone(),
        }
    }
}

/// Teichmüller lift of a residue class: the unique `t` with `t^q = t`
/// reducing to `r`, found by iterating `a -> a^q` from any lift.
pub fn teichmuller_lift(r: &Residue) -> TruncatedUnramified {
    let spec = &r.spec;
    let mut a = TruncatedUnramified::from_coeffs(spec, &r.coeffs);
    let q = spec.q() as u128;
    loop {
        let next = a.pow(q);
        if next == a {
            return a;
        }
        a = next;
    }
}

/// `[xi]^r`, the Teichmüller lift of the `r`-th power of the residue generator.
pub fn teichmuller(spec: &Arc<RingSpec>, r: usize) -> Result<TruncatedUnramified> {
    if r >= spec.f {
        return Err(Error::BadIndex(r as i64));
    }
    Ok(teichmuller_lift(&Residue::xi_pow(spec, r as u64)))
}

/// An element of the residue field `k_F = F_p[x]/(modulus)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Residue {
    coeffs: Vec<u64>,
    spec: Arc<RingSpec>,
}

impl fmt::Debug for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coeffs)
    }
}

impl Residue {
    pub fn from_coeffs(spec: &Arc<RingSpec>, coeffs: &[u64]) -> Self {
        let p = spec.p;
        let mut c = vec![0; spec.f];
        for (i, &v) in coeffs.iter().enumerate().take(spec.f) {
            c[i] = v % p;
        }
        Residue {
            coeffs: c,
            spec: spec.clone(),
        }
    }

    pub fn from_int(spec: &Arc<RingSpec>, a: i64) -> Self {
        let mut c = vec![0; spec.f];
        c[0] = reduce_i64(a, spec.p);
        Residue {
            coeffs: c,
            spec: spec.clone(),
        }
    }

    /// `xi^e` expanded in the power basis `1, xi, ..., xi^(f-1)`.
    pub fn xi_pow(spec: &Arc<RingSpec>, e: u64) -> Self {
        let xi = if spec.f == 1 {
            // k_F = F_p; the chosen modulus is x, so xi = 0 and only xi^0 is used.
            Residue::from_int(spec, 0)
        } else {
            Residue::from_coeffs(spec, &[0, 1])
        };
        let mut acc = Residue::from_int(spec, 1);
        for _ in 0..e {
            acc = acc.mul(&xi);
        }
        acc
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &Residue) -> Residue {
        let p = self.spec.p;
        Residue {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| (a + b) % p)
                .collect(),
            spec: self.spec.clone(),
        }
    }

    pub fn neg(&self) -> Residue {
        let p = self.spec.p;
        Residue {
            coeffs: self.coeffs.iter().map(|&c| (p - c) % p).collect(),
            spec: self.spec.clone(),
        }
    }

    pub fn scale(&self, k: i64) -> Residue {
        let p = self.spec.p;
        let k = reduce_i64(k, p);
        Residue {
            coeffs: self.coeffs.iter().map(|&c| c * k % p).collect(),
            spec: self.spec.clone(),
        }
    }

    pub fn mul(&self, other: &Residue) -> Residue {
        let p = self.spec.p;
        let f = self.spec.f;
        let mut prod = vec![0u64; 2 * f - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                prod[i + j] = (prod[i + j] + a * b) % p;
            }
        }
        let modp: Vec<u64> = self.spec.modulus.iter().map(|&c| c % p).collect();
        let mut r = poly_rem_mod_p(&prod, &modp, p);
        r.resize(f, 0);
        Residue {
            coeffs: r,
            spec: self.spec.clone(),
        }
    }

    pub fn inv(&self) -> Option<Residue> {
        if self.is_zero() {
            return None;
        }
        let q = self.spec.q();
        let mut acc = Residue::from_int(&self.spec, 1);
        let mut base = self.clone();
        let mut e = q - 2;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        Some(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_make_examples() {
        let s = RingSpec::new(5, 1, 2).unwrap();
        assert_eq!(s.pn(), 25);
        let s2 = RingSpec::new(5, 2, 2).unwrap();
        // exhaustive: no root mod 5
        let m = s2.modulus();
        for x in 0..5u64 {
            assert_ne!((m[0] + m[1] * x + x * x) % 5, 0);
        }
        assert_eq!(RingSpec::new(4, 1, 2), Err(Error::NonPrime(4)));
        assert_eq!(RingSpec::new(5, 0, 2), Err(Error::BadDegree));
    }

    #[test]
    fn valuation_examples() {
        let s = RingSpec::new(5, 1, 2).unwrap();
        assert_eq!(TruncatedUnramified::from_int(&s, 10).valuation(), Valuation::Finite(1));
        assert_eq!(TruncatedUnramified::from_int(&s, 0).valuation(), Valuation::AtLeast(2));
        let s2 = RingSpec::new(5, 2, 2).unwrap();
        // find a unit by exhaustive search
        let u = (0..25)
            .flat_map(|a| (0..25).map(move |b| (a, b)))
            .map(|(a, b)| TruncatedUnramified::from_coeffs(&s2, &[a, b]))
            .find(|u| u.coeffs()[1] % 5 != 0 && u.is_unit())
            .unwrap();
        let pu = &TruncatedUnramified::from_int(&s2, 5) * &u;
        assert_eq!(pu.valuation(), Valuation::Finite(1));
    }

    #[test]
    fn arithmetic_examples() {
        let s = RingSpec::new(5, 1, 2).unwrap();
        let a = TruncatedUnramified::from_int(&s, 7);
        let b = TruncatedUnramified::from_int(&s, 4);
        assert_eq!((&a * &b).coeffs(), &[3]);
        let u = TruncatedUnramified::from_int(&s, 1 - 10);
        assert_eq!(u.inv_unit().unwrap().coeffs(), &[11]);
        assert_eq!(TruncatedUnramified::from_int(&s, 5).inv_unit(), Err(Error::NotAUnit));
    }

    #[test]
    fn teichmuller_examples() {
        let s = RingSpec::new(5, 1, 2).unwrap();
        assert_eq!(teichmuller(&s, 0).unwrap(), TruncatedUnramified::one(&s));
        // iterate a -> a^5 mod 25 from 2
        let mut a = 2u64;
        loop {
            let b = pow_mod(a, 5, 25);
            if b == a {
                break;
            }
            a = b;
        }
        assert_eq!(a, 7);
        let t = teichmuller_lift(&Residue::from_int(&s, 2));
        assert_eq!(t.coeffs(), &[7]);
        let s2 = RingSpec::new(3, 3, 3).unwrap();
        for r in 0..3 {
            let t = teichmuller(&s2, r).unwrap();
            assert_eq!(t.pow(27), t);
            assert_eq!(t.residue(), Residue::xi_pow(&s2, r as u64));
        }
        assert!(teichmuller(&s2, 3).is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = RingSpec::new(5, 2, 2).unwrap();
        let a = TruncatedUnramified::from_coeffs(&s, &[3, 17]);
        let v = a.to_json();
        assert_eq!(v, serde_json::json!({"p":5,"f":2,"N":2,"coeffs":[3,17]}));
        assert_eq!(TruncatedUnramified::from_json(&v).unwrap(), a);
    }
}
