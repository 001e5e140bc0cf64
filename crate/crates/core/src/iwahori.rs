//! Elements of the pro-p Iwahori subgroup in Iwahori coordinates, the
//! p-valuation `omega`, filtration membership and matrix models.
//!
//! Group multiplication is implemented through two faithful models only:
//! `SL_{n+1}` for type `A_n`, and the `SL_2` attached to a single root for
//! elements supported on `{alpha, -alpha}` and the coroot `alpha^vee`.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde_json::{json, Map, Value};

use crate::chevalley::type_a_matrix_unit;
use crate::error::{Error, Result};
use crate::padic::{RingSpec, TruncatedUnramified as Tu, Valuation};
use crate::roots::{Family, RootId, RootSystem};

/// A value in `(1/h) Z`, stored as the integer numerator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grade {
    units: i64,
    h: i64,
}

impl Grade {
    pub fn new(units: i64, h: i64) -> Grade {
        assert!(h > 0);
        Grade { units, h }
    }

    /// The integer `n` as a grade.
    pub fn integer(n: i64, h: i64) -> Grade {
        Grade::new(n * h, h)
    }

    pub fn units(self) -> i64 {
        self.units
    }

    pub fn h(self) -> i64 {
        self.h
    }

    pub fn plus(self, other: Grade) -> Grade {
        assert_eq!(self.h, other.h);
        Grade::new(self.units + other.units, self.h)
    }
}

impl PartialOrd for Grade {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Grade {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.units * other.h).cmp(&(other.units * self.h))
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = gcd(self.units.abs(), self.h);
        if self.units % self.h == 0 {
            write!(f, "{}", self.units / self.h)
        } else {
            write!(f, "{}/{}", self.units / g, self.h / g)
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Value of `omega` on a truncated element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Omega {
    Exact(Grade),
    /// Every coordinate that could decide the minimum vanished mod `p^N`.
    AboveTruncation(Grade),
}

impl Omega {
    pub fn lower(self) -> Grade {
        match self {
            Omega::Exact(g) | Omega::AboveTruncation(g) => g,
        }
    }

    pub fn exact(self) -> Option<Grade> {
        match self {
            Omega::Exact(g) => Some(g),
            Omega::AboveTruncation(_) => None,
        }
    }
}

/// Square matrix over `O_F / p^N`.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    d: usize,
    e: Vec<Tu>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = (0..self.d)
            .map(|i| (0..self.d).map(|j| self.get(i, j).to_string()).collect())
            .collect();
        write!(f, "{rows:?}")
    }
}

impl Matrix {
    pub fn identity(spec: &Arc<RingSpec>, d: usize) -> Matrix {
        let mut e = vec![Tu::zero(spec); d * d];
        for i in 0..d {
            e[i * d + i] = Tu::one(spec);
        }
        Matrix { d, e }
    }

    pub fn from_rows(rows: Vec<Vec<Tu>>) -> Matrix {
        let d = rows.len();
        let e: Vec<Tu> = rows.into_iter().flatten().collect();
        assert_eq!(e.len(), d * d);
        Matrix { d, e }
    }

    pub fn size(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> &Tu {
        &self.e[i * self.d + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Tu) {
        self.e[i * self.d + j] = v;
    }

    pub fn spec(&self) -> &Arc<RingSpec> {
        self.e[0].spec()
    }

    pub fn mul(&self, o: &Matrix) -> Matrix {
        let d = self.d;
        let spec = self.spec();
        let mut e = vec![Tu::zero(spec); d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        e[i * d + j] = &e[i * d + j] + &(a * b);
                    }
                }
            }
        }
        Matrix { d, e }
    }

    pub fn pow(&self, mut k: u64) -> Matrix {
        let mut base = self.clone();
        let mut acc = Matrix::identity(self.spec(), self.d);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        acc
    }

    /// Gauss-Jordan inverse; every pivot must be a unit.
    pub fn inverse(&self) -> Result<Matrix> {
        let d = self.d;
        let spec = self.spec().clone();
        let mut a = self.clone();
        let mut inv = Matrix::identity(&spec, d);
        for k in 0..d {
            let piv = (k..d)
                .find(|&r| a.get(r, k).is_unit())
                .ok_or_else(|| Error::NotFactorizable("singular pivot".into()))?;
            if piv != k {
                for j in 0..d {
                    a.e.swap(piv * d + j, k * d + j);
                    inv.e.swap(piv * d + j, k * d + j);
                }
            }
            let pinv = a.get(k, k).inv_unit()?;
            for j in 0..d {
                a.e[k * d + j] = &a.e[k * d + j] * &pinv;
                inv.e[k * d + j] = &inv.e[k * d + j] * &pinv;
            }
            for r in 0..d {
                if r == k || a.get(r, k).is_zero() {
                    continue;
                }
                let factor = a.get(r, k).clone();
                for j in 0..d {
                    let t = &factor * a.get(k, j);
                    a.e[r * d + j] = &a.e[r * d + j] - &t;
                    let t = &factor * inv.get(k, j);
                    inv.e[r * d + j] = &inv.e[r * d + j] - &t;
                }
            }
        }
        Ok(inv)
    }

    pub fn is_identity(&self) -> bool {
        (0..self.d).all(|i| {
            (0..self.d).all(|j| {
                let v = self.get(i, j);
                if i == j {
                    (v - &Tu::one(v.spec())).is_zero()
                } else {
                    v.is_zero()
                }
            })
        })
    }

    pub fn to_json(&self) -> Value {
        json!((0..self.d)
            .map(|i| (0..self.d).map(|j| self.get(i, j).coeffs().to_vec()).collect::<Vec<_>>())
            .collect::<Vec<_>>())
    }
}

/// `omega` read from matrix entries of an `SL_{n+1}` element:
/// the minimum of `val(g_ij - delta_ij) + (j - i)/h`.
pub fn matrix_omega(m: &Matrix, h: i64) -> Result<Omega> {
    let spec = m.spec();
    let mut exact: Option<i64> = None;
    let mut bound = i64::MAX;
    for i in 0..m.size() {
        for j in 0..m.size() {
            let mut v = m.get(i, j).clone();
            if i == j {
                v = &v - &Tu::one(spec);
            }
            let shift = j as i64 - i as i64;
            match v.valuation() {
                Valuation::Finite(val) => {
                    let u = val as i64 * h + shift;
                    exact = Some(exact.map_or(u, |e: i64| e.min(u)));
                }
                Valuation::AtLeast(b) => bound = bound.min(b as i64 * h + shift),
            }
        }
    }
    resolve(exact, bound, h)
}

fn resolve(exact: Option<i64>, bound: i64, h: i64) -> Result<Omega> {
    match exact {
        None => Err(Error::IdentityElement),
        Some(e) if e <= bound => Ok(Omega::Exact(Grade::new(e, h))),
        Some(_) => Ok(Omega::AboveTruncation(Grade::new(bound, h))),
    }
}

/// An element `i_- t i_+` of the pro-p Iwahori subgroup modulo `p^N`.
#[derive(Clone, PartialEq, Eq)]
pub struct IwahoriElement {
    rs: Arc<RootSystem>,
    spec: Arc<RingSpec>,
    d_z: usize,
    /// `x_gamma` for every root, indexed by `RootId`; negative roots carry the factor `p`.
    coords: Vec<Tu>,
    /// Units `u_lambda` for `lambda` in `Delta^vee` then `B`.
    torus: Vec<Tu>,
}

impl fmt::Debug for IwahoriElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

impl IwahoriElement {
    pub fn identity(rs: &Arc<RootSystem>, spec: &Arc<RingSpec>, d_z: usize) -> Self {
        IwahoriElement {
            rs: rs.clone(),
            spec: spec.clone(),
            d_z,
            coords: vec![Tu::zero(spec); rs.num_roots()],
            torus: vec![Tu::one(spec); rs.rank() + d_z],
        }
    }

    /// `u_gamma(x)`.
    pub fn root(
        rs: &Arc<RootSystem>,
        spec: &Arc<RingSpec>,
        d_z: usize,
        gamma: RootId,
        x: Tu,
    ) -> Result<Self> {
        let mut e = Self::identity(rs, spec, d_z);
        e.set_coord(gamma, x)?;
        Ok(e)
    }

    /// `lambda(u)` for a basis cocharacter.
    pub fn torus(
        rs: &Arc<RootSystem>,
        spec: &Arc<RingSpec>,
        d_z: usize,
        lambda: usize,
        u: Tu,
    ) -> Result<Self> {
        let mut e = Self::identity(rs, spec, d_z);
        e.set_torus(lambda, u)?;
        Ok(e)
    }

    /// `gamma^vee(u)` for any root, expanded in simple coroots.
    pub fn coroot(
        rs: &Arc<RootSystem>,
        spec: &Arc<RingSpec>,
        d_z: usize,
        gamma: RootId,
        u: &Tu,
    ) -> Result<Self> {
        let mut e = Self::identity(rs, spec, d_z);
        for (i, c) in rs.coroot_coeffs(gamma).into_iter().enumerate() {
            e.set_torus(i, signed_pow(u, c)?)?;
        }
        Ok(e)
    }

    pub fn set_coord(&mut self, gamma: RootId, x: Tu) -> Result<()> {
        if x.spec() != &self.spec {
            return Err(Error::RingMismatch);
        }
        if !self.rs.is_positive(gamma) && x.valuation().lower_bound() < 1 {
            return Err(Error::InvalidArgument(
                "negative-root coordinates must lie in pO_F".into(),
            ));
        }
        self.coords[gamma] = x;
        Ok(())
    }

    pub fn set_torus(&mut self, lambda: usize, u: Tu) -> Result<()> {
        if u.spec() != &self.spec {
            return Err(Error::RingMismatch);
        }
        if lambda >= self.torus.len() {
            return Err(Error::BadIndex(lambda as i64));
        }
        if (&u - &Tu::one(&self.spec)).valuation().lower_bound() < 1 {
            return Err(Error::InvalidArgument("torus coordinates must lie in 1 + pO_F".into()));
        }
        self.torus[lambda] = u;
        Ok(())
    }

    pub fn root_system(&self) -> &Arc<RootSystem> {
        &self.rs
    }

    pub fn spec(&self) -> &Arc<RingSpec> {
        &self.spec
    }

    pub fn d_z(&self) -> usize {
        self.d_z
    }

    pub fn coord(&self, gamma: RootId) -> &Tu {
        &self.coords[gamma]
    }

    pub fn torus_coord(&self, lambda: usize) -> &Tu {
        &self.torus[lambda]
    }

    pub fn is_identity(&self) -> bool {
        let one = Tu::one(&self.spec);
        self.coords.iter().all(Tu::is_zero) && self.torus.iter().all(|u| *u == one)
    }

    /// `omega` in units of `1/h`.
    pub fn omega(&self) -> Result<Omega> {
        let h = self.rs.coxeter_number();
        let mut exact: Option<i64> = None;
        let mut bound = i64::MAX;
        let mut record = |v: Valuation, shift: i64| match v {
            Valuation::Finite(val) => {
                let u = val as i64 * h + shift;
                exact = Some(exact.map_or(u, |e: i64| e.min(u)));
            }
            Valuation::AtLeast(b) => bound = bound.min(b as i64 * h + shift),
        };
        for (g, x) in self.coords.iter().enumerate() {
            record(x.valuation(), self.rs.height(g));
        }
        let one = Tu::one(&self.spec);
        for u in &self.torus {
            record((u - &one).valuation(), 0);
        }
        resolve(exact, bound, h)
    }

    /// Membership in `I_nu` (or `I_{nu+}` when `strict`), decided coordinatewise.
    pub fn filtration_member(&self, nu: Grade, strict: bool) -> Result<bool> {
        let h = self.rs.coxeter_number();
        let target = nu.units * h / nu.h;
        if (nu.units * h) % nu.h != 0 {
            return Err(Error::InvalidArgument("grade not in (1/h)Z".into()));
        }
        let ok = |u: i64| if strict { u > target } else { u >= target };
        let mut undecided = false;
        let one = Tu::one(&self.spec);
        let contributions = self
            .coords
            .iter()
            .enumerate()
            .map(|(g, x)| (x.valuation(), self.rs.height(g)))
            .chain(self.torus.iter().map(|u| ((u - &one).valuation(), 0)));
        for (v, shift) in contributions {
            match v {
                Valuation::Finite(val) => {
                    if !ok(val as i64 * h + shift) {
                        return Ok(false);
                    }
                }
                Valuation::AtLeast(b) => {
                    if !ok(b as i64 * h + shift) {
                        undecided = true;
                    }
                }
            }
        }
        if undecided {
            Err(Error::PrecisionExceeded(format!(
                "membership at grade {nu} needs more than N = {}",
                self.spec.precision()
            )))
        } else {
            Ok(true)
        }
    }

    pub fn to_json(&self) -> Value {
        let mut roots = Map::new();
        for (g, x) in self.coords.iter().enumerate() {
            if !x.is_zero() {
                roots.insert(format!("{:?}", self.rs.root(g)), json!(x.coeffs()));
            }
        }
        let mut torus = Map::new();
        let one = Tu::one(&self.spec);
        for (l, u) in self.torus.iter().enumerate() {
            if *u != one {
                let label = if l < self.rs.rank() {
                    format!("a{}v", l + 1)
                } else {
                    format!("z{}", l - self.rs.rank() + 1)
                };
                torus.insert(label, json!(u.coeffs()));
            }
        }
        json!({"roots": roots, "torus": torus})
    }

    // ---- matrix models ----

    fn central_part(&self) -> &[Tu] {
        &self.torus[self.rs.rank()..]
    }

    fn is_type_a(&self) -> bool {
        self.rs.cartan_type().family == Family::A
    }

    /// Image in `SL_{n+1}(O_F/p^N)` for type `A_n` (central coordinates dropped).
    pub fn to_matrix(&self) -> Result<Matrix> {
        if !self.is_type_a() {
            return Err(Error::UnsupportedType(self.rs.label()));
        }
        let d = self.rs.rank() + 1;
        let spec = &self.spec;
        let mut m = Matrix::identity(spec, d);
        let unip = |g: RootId, x: &Tu| {
            let mut u = Matrix::identity(spec, d);
            let (i, j) = type_a_matrix_unit(&self.rs, g);
            u.set(i, j, x.clone());
            u
        };
        for g in self.rs.negatives() {
            if !self.coords[g].is_zero() {
                m = m.mul(&unip(g, &self.coords[g]));
            }
        }
        let mut diag = Matrix::identity(spec, d);
        for i in 0..self.rs.rank() {
            let u = &self.torus[i];
            let ui = u.inv_unit()?;
            diag.set(i, i, diag.get(i, i) * u);
            diag.set(i + 1, i + 1, diag.get(i + 1, i + 1) * &ui);
        }
        m = m.mul(&diag);
        for g in self.rs.positives() {
            if !self.coords[g].is_zero() {
                m = m.mul(&unip(g, &self.coords[g]));
            }
        }
        Ok(m)
    }

    /// Iwahori coordinates of an `SL_{n+1}` matrix via `L D U`.
    pub fn from_matrix(
        rs: &Arc<RootSystem>,
        m: &Matrix,
        central: &[Tu],
    ) -> Result<IwahoriElement> {
        if rs.cartan_type().family != Family::A || m.size() != rs.rank() + 1 {
            return Err(Error::UnsupportedType(rs.label()));
        }
        let spec = m.spec().clone();
        let d = m.size();
        let one = Tu::one(&spec);
        // Doolittle elimination: m = L W with W upper triangular.
        let mut w = m.clone();
        let mut l = Matrix::identity(&spec, d);
        for k in 0..d {
            let piv = w.get(k, k).clone();
            if !piv.is_unit() {
                return Err(Error::NotFactorizable(format!("pivot {k} is not a unit")));
            }
            let pinv = piv.inv_unit()?;
            for r in k + 1..d {
                let f = w.get(r, k) * &pinv;
                if f.is_zero() {
                    continue;
                }
                for j in k..d {
                    let t = &f * w.get(k, j);
                    w.set(r, j, w.get(r, j) - &t);
                }
                l.set(r, k, f);
            }
        }
        let mut diag = Vec::with_capacity(d);
        let mut u = w.clone();
        for i in 0..d {
            let di = w.get(i, i).clone();
            if (&di - &one).valuation().lower_bound() < 1 {
                return Err(Error::NotFactorizable("diagonal not congruent to 1 mod p".into()));
            }
            let dinv = di.inv_unit()?;
            for j in i..d {
                u.set(i, j, w.get(i, j) * &dinv);
            }
            diag.push(di);
        }
        let d_z = central.len();
        let mut e = IwahoriElement::identity(rs, &spec, d_z);
        // torus: u_k = d_1 ... d_k
        let mut acc = one.clone();
        for k in 0..rs.rank() {
            acc = &acc * &diag[k];
            e.torus[k] = acc.clone();
        }
        for (z, c) in central.iter().enumerate() {
            e.set_torus(rs.rank() + z, c.clone())?;
        }
        // positive part: peel from the left in increasing order
        for g in rs.positives() {
            let (i, j) = type_a_matrix_unit(rs, g);
            let x = u.get(i, j).clone();
            if x.is_zero() {
                continue;
            }
            // u <- (I - x E_ij) u : row i -= x * row j
            for c in 0..d {
                let t = &x * u.get(j, c);
                u.set(i, c, u.get(i, c) - &t);
            }
            e.coords[g] = x;
        }
        // negative part: peel from the right in decreasing order
        for g in rs.negatives().into_iter().rev() {
            let (i, j) = type_a_matrix_unit(rs, g);
            let x = l.get(i, j).clone();
            if x.is_zero() {
                continue;
            }
            if x.valuation().lower_bound() < 1 {
                return Err(Error::NotFactorizable(
                    "lower-triangular entry not divisible by p".into(),
                ));
            }
            // l <- l (I - x E_ij) : column j -= x * column i
            for r in 0..d {
                let t = l.get(r, i) * &x;
                l.set(r, j, l.get(r, j) - &t);
            }
            e.coords[g] = x;
        }
        Ok(e)
    }

    /// The positive root `alpha` if this element lies in the image of
    /// `phi_alpha` (times central torus); `None` if the semisimple part is
    /// supported on the torus only.
    fn sl2_root(&self) -> Result<Option<RootId>> {
        let support: Vec<RootId> = (0..self.coords.len())
            .filter(|&g| !self.coords[g].is_zero())
            .collect();
        let mut alpha = None;
        for g in support {
            let a = if self.rs.is_positive(g) { g } else { self.rs.neg(g) };
            match alpha {
                None => alpha = Some(a),
                Some(b) if b == a => {}
                _ => {
                    return Err(Error::UnsupportedType(format!(
                        "{}: element not supported on a single root pair",
                        self.rs.label()
                    )))
                }
            }
        }
        Ok(alpha)
    }

    /// `a` with `torus = alpha^vee(a)` on the semisimple part.
    fn coroot_unit(&self, alpha: RootId) -> Result<Tu> {
        let cv = self.rs.coroot_coeffs(alpha);
        let one = Tu::one(&self.spec);
        let (i, c) = cv
            .iter()
            .enumerate()
            .find(|(_, &c)| c != 0)
            .map(|(i, &c)| (i, c))
            .expect("coroot is nonzero");
        let p = self.spec.p();
        let order = self.spec.q().pow(self.spec.precision() - 1) as u128;
        let a = if order == 1 {
            one.clone()
        } else {
            let ci = crate::padic::inv_mod_p(c.unsigned_abs(), p).expect("coroot coefficient prime to p");
            // lift the inverse of c to modulo p^(f(N-1)) by Newton iteration
            let mut inv = ci as u128;
            let cc = c.unsigned_abs() as u128;
            for _ in 0..8 {
                inv = (inv * ((2 + 2 * order - (cc * inv) % order) % order)) % order;
            }
            let base = if c < 0 {
                self.torus[i].inv_unit()?
            } else {
                self.torus[i].clone()
            };
            base.pow(inv)
        };
        for (j, &cj) in cv.iter().enumerate() {
            if signed_pow(&a, cj)? != self.torus[j] {
                return Err(Error::UnsupportedType(
                    "torus part is not on the coroot".into(),
                ));
            }
        }
        for j in cv.len()..self.rs.rank() {
            if self.torus[j] != one {
                return Err(Error::UnsupportedType("torus part is not on the coroot".into()));
            }
        }
        Ok(a)
    }

    /// The `SL_2` matrix of an element in the image of `phi_alpha`.
    pub fn to_sl2(&self, alpha: RootId) -> Result<Matrix> {
        let spec = &self.spec;
        let a = self.coroot_unit(alpha)?;
        let lower = Matrix::from_rows(vec![
            vec![Tu::one(spec), Tu::zero(spec)],
            vec![self.coords[self.rs.neg(alpha)].clone(), Tu::one(spec)],
        ]);
        let diag = Matrix::from_rows(vec![
            vec![a.clone(), Tu::zero(spec)],
            vec![Tu::zero(spec), a.inv_unit()?],
        ]);
        let upper = Matrix::from_rows(vec![
            vec![Tu::one(spec), self.coords[alpha].clone()],
            vec![Tu::zero(spec), Tu::one(spec)],
        ]);
        Ok(lower.mul(&diag).mul(&upper))
    }

    /// `phi_alpha(g) = u_{-alpha}(c/a) alpha^vee(a) u_alpha(b/a)` for `g = [[a, b], [c, d]]`.
    pub fn from_sl2(
        rs: &Arc<RootSystem>,
        alpha: RootId,
        g: &Matrix,
        central: &[Tu],
    ) -> Result<IwahoriElement> {
        let spec = g.spec().clone();
        let a = g.get(0, 0).clone();
        if (&a - &Tu::one(&spec)).valuation().lower_bound() < 1 {
            return Err(Error::NotFactorizable("a is not congruent to 1 mod p".into()));
        }
        let ainv = a.inv_unit()?;
        let mut e = IwahoriElement::coroot(rs, &spec, central.len(), alpha, &a)?;
        e.set_coord(rs.neg(alpha), g.get(1, 0) * &ainv)
            .map_err(|_| Error::NotFactorizable("c is not divisible by p".into()))?;
        e.set_coord(alpha, g.get(0, 1) * &ainv)?;
        for (z, c) in central.iter().enumerate() {
            e.set_torus(rs.rank() + z, c.clone())?;
        }
        Ok(e)
    }

    /// Applies `op` in the matrix model; `torus_op` handles pairs lying in the torus.
    fn combine<F, G>(&self, other: &IwahoriElement, op: F, torus_op: G) -> Result<IwahoriElement>
    where
        F: Fn(&Matrix, &Matrix) -> Result<Matrix>,
        G: Fn(&Tu, &Tu) -> Result<Tu>,
    {
        if self.rs != other.rs || self.spec != other.spec || self.d_z != other.d_z {
            return Err(Error::RingMismatch);
        }
        let central: Vec<Tu> = self
            .central_part()
            .iter()
            .zip(other.central_part())
            .map(|(a, b)| a * b)
            .collect();
        if self.is_type_a() {
            let m = op(&self.to_matrix()?, &other.to_matrix()?)?;
            return IwahoriElement::from_matrix(&self.rs, &m, &central);
        }
        let alpha = match (self.sl2_root()?, other.sl2_root()?) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::UnsupportedType(format!(
                    "{}: general multiplication is only implemented in type A",
                    self.rs.label()
                )))
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => {
                let mut e = self.clone();
                for (k, u) in other.torus.iter().enumerate() {
                    e.torus[k] = torus_op(&self.torus[k], u)?;
                }
                return Ok(e);
            }
        };
        let m = op(&self.to_sl2(alpha)?, &other.to_sl2(alpha)?)?;
        IwahoriElement::from_sl2(&self.rs, alpha, &m, &central)
    }

    pub fn multiply(&self, other: &IwahoriElement) -> Result<IwahoriElement> {
        self.combine(other, |a, b| Ok(a.mul(b)), |a, b| Ok(a * b))
    }

    pub fn inverse(&self) -> Result<IwahoriElement> {
        let id = IwahoriElement::identity(&self.rs, &self.spec, self.d_z);
        let mut e = self.combine(&id, |a, _| a.inverse(), |a, _| a.inv_unit())?;
        for (k, u) in self.central_part().iter().enumerate() {
            e.torus[self.rs.rank() + k] = u.inv_unit()?;
        }
        Ok(e)
    }

    /// `g h g^{-1} h^{-1}`.
    pub fn commutator(&self, other: &IwahoriElement) -> Result<IwahoriElement> {
        let e = self.combine(
            other,
            |a, b| Ok(a.mul(b).mul(&a.inverse()?).mul(&b.inverse()?)),
            |a, _| Ok(Tu::one(a.spec())),
        )?;
        let mut e = e;
        for k in 0..self.d_z {
            e.torus[self.rs.rank() + k] = Tu::one(&self.spec);
        }
        Ok(e)
    }

    pub fn pow(&self, k: u64) -> Result<IwahoriElement> {
        let id = IwahoriElement::identity(&self.rs, &self.spec, self.d_z);
        let mut e = self.combine(&id, |a, _| Ok(a.pow(k)), |a, _| Ok(a.pow(k as u128)))?;
        for (z, u) in self.central_part().iter().enumerate() {
            e.torus[self.rs.rank() + z] = u.pow(k as u128);
        }
        Ok(e)
    }

    /// A random element. `alpha = Some(a)` restricts to the image of `phi_a`.
    /// Coordinates get random valuations so that many grades occur.
    pub fn random<R: Rng>(
        rs: &Arc<RootSystem>,
        spec: &Arc<RingSpec>,
        d_z: usize,
        alpha: Option<RootId>,
        rng: &mut R,
    ) -> Result<IwahoriElement> {
        let n = spec.precision();
        let rand_val = |min_v: u32, rng: &mut R| -> Tu {
            let v = rng.gen_range(min_v..=n);
            let coeffs: Vec<u64> = (0..spec.f()).map(|_| rng.gen_range(0..spec.pn())).collect();
            Tu::from_coeffs(spec, &coeffs).mul_p_pow(v)
        };
        let mut e = IwahoriElement::identity(rs, spec, d_z);
        match alpha {
            Some(a) => {
                let u = &Tu::one(spec) + &rand_val(1, rng);
                e = IwahoriElement::coroot(rs, spec, d_z, a, &u)?;
                e.coords[a] = rand_val(0, rng);
                e.coords[rs.neg(a)] = rand_val(1, rng);
            }
            None => {
                for g in 0..rs.num_roots() {
                    let min_v = u32::from(!rs.is_positive(g));
                    e.coords[g] = rand_val(min_v, rng);
                }
                for l in 0..rs.rank() {
                    e.torus[l] = &Tu::one(spec) + &rand_val(1, rng);
                }
            }
        }
        for z in 0..d_z {
            e.torus[rs.rank() + z] = &Tu::one(spec) + &rand_val(1, rng);
        }
        Ok(e)
    }
}

/// `u^c` for a unit `u` and signed exponent.
pub fn signed_pow(u: &Tu, c: i64) -> Result<Tu> {
    if c >= 0 {
        Ok(u.pow(c as u128))
    } else {
        Ok(u.inv_unit()?.pow(c.unsigned_abs() as u128))
    }
}

/// Three-valued outcome of a check under truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verdict {
    Pass,
    Fail,
    Uncertified,
}

/// An interval `[lo, hi]` of possible true `omega` values (in units of `1/h`);
/// `None` stands for infinity.
#[derive(Debug, Clone, Copy)]
struct Interval {
    lo: Option<i64>,
    hi: Option<i64>,
}

impl Interval {
    fn of(e: &IwahoriElement) -> Interval {
        match e.omega() {
            Ok(Omega::Exact(g)) => Interval {
                lo: Some(g.units),
                hi: Some(g.units),
            },
            Ok(Omega::AboveTruncation(g)) => Interval {
                lo: Some(g.units),
                hi: None,
            },
            // Trivial mod p^N: every coordinate bound applies, the weakest
            // coming from the lowest negative root.
            Err(_) => {
                let h = e.rs.coxeter_number();
                let n = e.spec.precision() as i64 * h - (h - 1);
                Interval {
                    lo: Some(n),
                    hi: None,
                }
            }
        }
    }
    fn add(self, o: Interval) -> Interval {
        let f = |a: Option<i64>, b: Option<i64>| Some(a? + b?);
        Interval {
            lo: f(self.lo, o.lo),
            hi: f(self.hi, o.hi),
        }
    }
    fn shift(self, k: i64) -> Interval {
        Interval {
            lo: self.lo.map(|v| v + k),
            hi: self.hi.map(|v| v + k),
        }
    }
    fn min(self, o: Interval) -> Interval {
        let f = |a: Option<i64>, b: Option<i64>| match (a, b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) | (None, x) => x,
        };
        Interval {
            lo: f(self.lo, o.lo),
            hi: f(self.hi, o.hi),
        }
    }
    fn ge(self, o: Interval) -> Verdict {
        let le = |a: Option<i64>, b: Option<i64>| match (a, b) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(x), Some(y)) => x <= y,
        };
        if le(o.hi, self.lo) {
            Verdict::Pass
        } else if self.hi.is_some() && o.lo.is_some() && self.hi < o.lo {
            Verdict::Fail
        } else {
            Verdict::Uncertified
        }
    }
    fn eq(self, o: Interval) -> Verdict {
        match (self.lo, self.hi, o.lo, o.hi) {
            (Some(a), Some(b), Some(c), Some(d)) if a == b && c == d => {
                if a == c {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                }
            }
            _ => {
                let disjoint = matches!((self.hi, o.lo), (Some(x), Some(y)) if x < y)
                    || matches!((o.hi, self.lo), (Some(x), Some(y)) if x < y);
                if disjoint {
                    Verdict::Fail
                } else {
                    Verdict::Uncertified
                }
            }
        }
    }
}

/// Tallies for [`check_p_valuation_axioms`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AxiomReport {
    pub samples: usize,
    pub passed: usize,
    pub uncertified: usize,
}

/// Checks the p-valuation axioms on random pairs. Comparisons whose truth
/// depends on digits beyond `p^N` are counted as uncertified.
pub fn check_p_valuation_axioms<R: Rng>(
    rs: &Arc<RootSystem>,
    spec: &Arc<RingSpec>,
    samples: usize,
    rng: &mut R,
) -> Result<AxiomReport> {
    let h = rs.coxeter_number();
    let p = spec.p();
    if !rs.check_admissible(p) {
        return Err(Error::InadmissiblePrime { p, bound: (h + 1) as u64 });
    }
    let type_a = rs.cartan_type().family == Family::A;
    let positives = rs.positives();
    let mut report = AxiomReport::default();
    for _ in 0..samples {
        let alpha = if type_a {
            None
        } else {
            Some(positives[rng.gen_range(0..positives.len())])
        };
        let g = IwahoriElement::random(rs, spec, 0, alpha, rng)?;
        let k = IwahoriElement::random(rs, spec, 0, alpha, rng)?;
        let (wg, wk) = (Interval::of(&g), Interval::of(&k));
        let mut verdicts = Vec::with_capacity(5);
        // omega(g) > 1/(p-1), i.e. (p-1) omega > h in units
        verdicts.push(match g.omega() {
            Ok(om) if om.lower().units * (p as i64 - 1) > h => Verdict::Pass,
            Ok(Omega::Exact(_)) => Verdict::Fail,
            _ => Verdict::Uncertified,
        });
        // omega = infinity exactly on the identity
        verdicts.push(match (g.is_identity(), g.omega()) {
            (true, Err(Error::IdentityElement)) | (false, Ok(_)) => Verdict::Pass,
            _ => Verdict::Fail,
        });
        let kinv_g = k.inverse()?.multiply(&g)?;
        verdicts.push(Interval::of(&kinv_g).ge(wg.min(wk)));
        let comm = g.commutator(&k)?;
        verdicts.push(Interval::of(&comm).ge(wg.add(wk)));
        let gp = g.pow(p)?;
        verdicts.push(Interval::of(&gp).eq(wg.shift(h)));
        for v in verdicts {
            match v {
                Verdict::Pass => report.passed += 1,
                Verdict::Uncertified => report.uncertified += 1,
                Verdict::Fail => {
                    return Err(Error::AxiomViolation(format!(
                        "g = {}, h = {}",
                        g.to_json(),
                        k.to_json()
                    )))
                }
            }
        }
        report.samples += 1;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(label: &str, p: u64, n: u32) -> (Arc<RootSystem>, Arc<RingSpec>) {
        (
            Arc::new(RootSystem::from_label(label).unwrap()),
            RingSpec::new(p, 1, n).unwrap(),
        )
    }

    #[test]
    fn omega_examples() {
        let (rs, spec) = setup("A2", 5, 2);
        let a1 = rs.simple(0);
        let e = IwahoriElement::root(&rs, &spec, 0, a1, Tu::one(&spec)).unwrap();
        assert_eq!(e.omega().unwrap(), Omega::Exact(Grade::new(1, 3)));
        let low = rs.neg(rs.highest_root());
        let e = IwahoriElement::root(&rs, &spec, 0, low, Tu::from_int(&spec, 5)).unwrap();
        assert_eq!(e.omega().unwrap(), Omega::Exact(Grade::new(1, 3)));
        let (rs1, _) = setup("A1", 5, 2);
        let t = IwahoriElement::torus(&rs1, &spec, 0, 0, Tu::from_int(&spec, 6)).unwrap();
        assert_eq!(t.omega().unwrap(), Omega::Exact(Grade::integer(1, 2)));
        assert_eq!(
            IwahoriElement::identity(&rs, &spec, 0).omega(),
            Err(Error::IdentityElement)
        );
    }

    #[test]
    fn membership_examples() {
        let (rs, spec) = setup("A2", 5, 3);
        let a1 = rs.simple(0);
        let e = IwahoriElement::root(&rs, &spec, 0, a1, Tu::from_int(&spec, 5)).unwrap();
        assert_eq!(e.filtration_member(Grade::integer(1, 3), false), Ok(true));
        let e = IwahoriElement::root(&rs, &spec, 0, a1, Tu::one(&spec)).unwrap();
        assert_eq!(e.filtration_member(Grade::new(1, 3), true), Ok(false));
        let t = IwahoriElement::torus(&rs, &spec, 0, 0, Tu::from_int(&spec, 6)).unwrap();
        assert_eq!(t.filtration_member(Grade::integer(1, 3), true), Ok(false));
        assert_eq!(t.filtration_member(Grade::integer(1, 3), false), Ok(true));
        let id = IwahoriElement::identity(&rs, &spec, 0);
        assert!(matches!(
            id.filtration_member(Grade::integer(4, 3), false),
            Err(Error::PrecisionExceeded(_))
        ));
    }

    #[test]
    fn a1_product_with_lower() {
        let (rs, spec) = setup("A1", 5, 2);
        let a = rs.simple(0);
        let x = IwahoriElement::root(&rs, &spec, 0, a, Tu::one(&spec)).unwrap();
        let y = IwahoriElement::root(&rs, &spec, 0, rs.neg(a), Tu::from_int(&spec, 5)).unwrap();
        let z = x.multiply(&y).unwrap();
        // [[1,1],[0,1]] [[1,0],[5,1]] = [[6,1],[5,1]]: a = 6, torus 6 = (1-5)^{-1} mod 25
        let six = Tu::from_int(&spec, 6);
        assert_eq!(z.torus_coord(0), &six);
        assert_eq!(Tu::from_int(&spec, -4).inv_unit().unwrap(), six);
        assert_eq!(z.coord(rs.neg(a)), &(&Tu::from_int(&spec, 5) * &six.inv_unit().unwrap()));
        assert_eq!(x.multiply(&IwahoriElement::identity(&rs, &spec, 0)).unwrap(), x);
    }

    #[test]
    fn matrix_round_trip_and_entry_omega() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for label in ["A1", "A2", "A3"] {
            let (rs, spec) = setup(label, 7, 3);
            for _ in 0..50 {
                let e = IwahoriElement::random(&rs, &spec, 0, None, &mut rng).unwrap();
                let m = e.to_matrix().unwrap();
                let back = IwahoriElement::from_matrix(&rs, &m, &[]).unwrap();
                assert_eq!(back, e);
                let h = rs.coxeter_number();
                match (e.omega(), matrix_omega(&m, h)) {
                    (Ok(a), Ok(b)) => assert_eq!(a, b),
                    (Err(a), Err(b)) => assert_eq!(a, b),
                    other => panic!("{other:?}"),
                }
            }
        }
    }

    #[test]
    fn a2_commutator_single_coordinate() {
        let (rs, spec) = setup("A2", 5, 3);
        let (a1, a2) = (rs.simple(0), rs.simple(1));
        let x = Tu::from_int(&spec, 3);
        let y = Tu::from_int(&spec, 7);
        let g = IwahoriElement::root(&rs, &spec, 0, a1, x.clone()).unwrap();
        let k = IwahoriElement::root(&rs, &spec, 0, a2, y.clone()).unwrap();
        let c = g.commutator(&k).unwrap();
        let theta = rs.add(a1, a2).unwrap();
        let expect = IwahoriElement::root(&rs, &spec, 0, theta, &x * &y).unwrap();
        assert_eq!(c, expect);
    }

    #[test]
    fn sl2_embedding_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rs = Arc::new(RootSystem::from_label("C2").unwrap());
        let spec = RingSpec::new(7, 2, 3).unwrap();
        for alpha in rs.positives() {
            for _ in 0..10 {
                let e = IwahoriElement::random(&rs, &spec, 0, Some(alpha), &mut rng).unwrap();
                let m = e.to_sl2(alpha).unwrap();
                assert_eq!(IwahoriElement::from_sl2(&rs, alpha, &m, &[]).unwrap(), e);
            }
        }
    }

    #[test]
    fn axioms_a1_small() {
        let (rs, spec) = setup("A1", 5, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = check_p_valuation_axioms(&rs, &spec, 100, &mut rng).map_err(|e| e.to_string()).unwrap();
        assert_eq!(r.samples, 100);
        assert!(r.passed > 300);
        let g = IwahoriElement::root(&rs, &spec, 0, rs.simple(0), Tu::one(&spec)).unwrap();
        assert_eq!(g.pow(5).unwrap().omega().unwrap(), Omega::Exact(Grade::new(3, 2)));
    }
}
