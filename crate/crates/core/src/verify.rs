//! Verification runs over a datum `(type, p, f, N, d_Z)` and the dimension-bound table.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::chevalley::{certify_constants, constants_are_units, StructureConstants};
use crate::enveloping::Enveloping;
use crate::error::{Error, Result};
use crate::graded::{certify_brackets_against_oracle, GradedLie, OracleModel, Symbol};
use crate::group_algebra::{
    central_witnesses, compare_filtrations, iwahori_lattice_quotient, group_ring_congruences,
    root_element_memberships, sl2_twist_identity, AugmentationLadder, IwahoriQuotient, DEFAULT_GROUP_CAP,
};
use crate::iwahori::check_p_valuation_axioms;
use crate::padic::{is_prime, RingSpec};
use crate::roots::{CartanType, Family, RootSystem};

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Uncertified,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub anchor: String,
    pub status: Status,
    pub detail: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct Datum {
    #[serde(rename = "type")]
    pub ctype: String,
    pub rank: usize,
    pub p: u64,
    pub f: usize,
    #[serde(rename = "N")]
    pub n: u32,
    pub semisimple: bool,
    pub d_z: usize,
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Grade bound for the commutative quotient, in units of `1/h`; `None` means `2h`.
    pub grade_bound_units: Option<i64>,
    pub group_cap: usize,
    pub axiom_samples: usize,
    pub oracle_samples: usize,
    pub congruence_samples: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0,
            grade_bound_units: None,
            group_cap: DEFAULT_GROUP_CAP,
            axiom_samples: 200,
            oracle_samples: 300,
            congruence_samples: 100,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub tool: String,
    pub version: String,
    pub schema: u32,
    pub datum: Datum,
    pub seed: u64,
    pub convention_id: String,
    pub checks: Vec<CheckResult>,
    pub summary: Summary,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub uncertified: usize,
}

impl VerificationReport {
    pub fn any_fail(&self) -> bool {
        self.summary.fail > 0
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// The smallest prime `p > h + 1`.
pub fn smallest_admissible_prime(rs: &RootSystem) -> u64 {
    let mut p = rs.coxeter_number() as u64 + 2;
    while !is_prime(p) {
        p += 1;
    }
    p
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GkSummary {
    #[serde(rename = "type")]
    pub ctype: String,
    pub f: usize,
    /// `f (|Delta| + 1)`.
    pub bound: usize,
    /// `f |Phi^-|`.
    pub expected: usize,
    pub conflict: bool,
}

pub fn gk_bounds(ct: CartanType, f: usize) -> GkSummary {
    let rs = RootSystem::build(ct);
    let bound = f * (rs.rank() + 1);
    let expected = f * rs.num_roots() / 2;
    GkSummary {
        ctype: rs.label(),
        f,
        bound,
        expected,
        conflict: bound < expected,
    }
}

fn classify(e: Error) -> (Status, Value) {
    let status = match e {
        Error::PrecisionExceeded(_) | Error::GroupTooLarge { .. } | Error::UnsupportedType(_) => {
            Status::Uncertified
        }
        _ => Status::Fail,
    };
    (status, json!({"witness": e.to_string()}))
}

struct Runner {
    checks: Vec<CheckResult>,
}

impl Runner {
    fn run<F>(&mut self, name: &str, anchor: &str, f: F)
    where
        F: FnOnce() -> Result<(Status, Value)>,
    {
        let (status, detail) = f().unwrap_or_else(classify);
        self.checks.push(CheckResult {
            name: name.into(),
            anchor: anchor.into(),
            status,
            detail,
        });
    }
}

fn pass_if(ok: bool, detail: Value) -> (Status, Value) {
    (if ok { Status::Pass } else { Status::Fail }, detail)
}

/// Quotient used by the group-algebra checks: `I mod p^N` when it fits under
/// the cap, otherwise the lattice quotient keeping entries mod `p` except the
/// lower-left corner mod `p^2`.
pub fn default_quotient(rs: &Arc<RootSystem>, p: u64, n: u32, d_z: usize, cap: usize) -> Result<IwahoriQuotient> {
    if rs.cartan_type().family != Family::A {
        return Err(Error::UnsupportedType(rs.label()));
    }
    let size = rs.rank() + 1;
    let central = if d_z > 0 { 2 } else { 0 };
    if d_z > 1 {
        return Err(Error::UnsupportedType("group-algebra models support d_Z <= 1".into()));
    }
    if d_z == 0 {
        let principal = vec![vec![n; size]; size];
        match iwahori_lattice_quotient(rs, p, principal, 0, cap) {
            Err(Error::GroupTooLarge { .. }) => {}
            other => return other,
        }
    }
    let mut corner = vec![vec![1u32; size]; size];
    corner[size - 1][0] = 2;
    if size == 2 && d_z > 0 {
        corner = vec![vec![2, 1], vec![2, 2]];
    }
    iwahori_lattice_quotient(rs, p, corner, central, cap)
}

/// Runs every check for one datum.
pub fn run_verify(ct: CartanType, p: u64, f: usize, n: u32, d_z: usize, opts: &VerifyOptions) -> Result<VerificationReport> {
    let rs = Arc::new(RootSystem::build(ct));
    if !is_prime(p) {
        return Err(Error::NonPrime(p));
    }
    if !rs.check_admissible(p) {
        return Err(Error::InadmissiblePrime {
            p,
            bound: rs.coxeter_number() as u64 + 1,
        });
    }
    let spec = RingSpec::new(p, f, n)?;
    let sc = Arc::new(StructureConstants::compute(rs.clone())?);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let h = rs.coxeter_number();
    let mut r = Runner { checks: Vec::new() };

    r.run("structure_constants", "Chevalley commutator constants", || {
        let cert = certify_constants(&sc)?;
        let units = constants_are_units(&sc, p);
        Ok(pass_if(units, json!({
            "jacobi_triples": cert.jacobi_triples,
            "matrix_checks": cert.matrix_checks,
            "max_abs_c": cert.max_abs_c,
            "constants_are_units_mod_p": units,
        })))
    });

    r.run("p_valuation_axioms", "p-valuation axioms on the Iwahori subgroup", || {
        let rep = check_p_valuation_axioms(&rs, &spec, opts.axiom_samples, &mut rng)?;
        let model = if rs.cartan_type().family == Family::A { "SL_{n+1}" } else { "SL_2 root embeddings" };
        Ok((Status::Pass, json!({
            "model": model,
            "samples": rep.samples,
            "comparisons_passed": rep.passed,
            "comparisons_uncertified": rep.uncertified,
        })))
    });

    let reduced = GradedLie::new(sc.clone(), spec.clone(), d_z, true)?;
    r.run("bracket_oracle", "graded brackets against group commutators", || {
        let oracle_spec = if n < 3 { spec.with_precision(3)? } else { spec.clone() };
        let la = GradedLie::new(sc.clone(), oracle_spec.clone(), d_z, true)?;
        let mut per_model = Vec::new();
        if rs.cartan_type().family == Family::A {
            let rep = certify_brackets_against_oracle(&la, OracleModel::TypeA, opts.oracle_samples, &mut rng)?;
            per_model.push(json!({"model": "SL_{n+1}", "report": rep}));
        } else {
            let pos = rs.positives();
            let each = opts.oracle_samples.div_ceil(pos.len()).max(20);
            for alpha in pos {
                let rep = la_oracle(&la, alpha, each, &mut rng)?;
                per_model.push(json!({"model": format!("SL_2 at {:?}", rs.root(alpha)), "report": rep}));
            }
        }
        Ok((Status::Pass, json!({"precision": oracle_spec.precision(), "models": per_model})))
    });

    r.run("reduced_basis", "basis of the reduced graded Lie algebra", || {
        let basis = reduced.basis(0);
        let expected = f * (rs.num_roots() + rs.rank() + d_z);
        let grades_ok = basis.iter().all(|&s| (1..=h).contains(&reduced.grade_units(s)));
        let mut torus_central = true;
        let mut negneg_zero = true;
        for &a in &basis {
            for &b in &basis {
                let br = reduced.bracket_symbols(a, b);
                if matches!(a, Symbol::Torus { .. }) && !br.is_zero() {
                    torus_central = false;
                }
                if let (Symbol::Root { gamma: x, .. }, Symbol::Root { gamma: y, .. }) = (a, b) {
                    if !rs.is_positive(x) && !rs.is_positive(y) && !br.is_zero() {
                        negneg_zero = false;
                    }
                }
            }
        }
        let twist0: Vec<Symbol> = basis.iter().copied().filter(|s| s.twist() == 0).collect();
        let closed = twist0.iter().all(|&a| {
            twist0
                .iter()
                .all(|&b| reduced.bracket_symbols(a, b).terms().keys().all(|s| s.twist() == 0))
        });
        let kf_dims = basis.len() == f * twist0.len();
        let ok = basis.len() == expected && grades_ok && torus_central && negneg_zero && closed && kf_dims;
        Ok(pass_if(ok, json!({
            "size": basis.len(),
            "expected": expected,
            "grades_in_range": grades_ok,
            "torus_central": torus_central,
            "negative_brackets_zero": negneg_zero,
            "twist_zero_subalgebra_closed": closed,
            "dimension_is_f_times_subalgebra": kf_dims,
        })))
    });

    r.run("jacobi_reduced", "Jacobi identity in the reduced graded Lie algebra", || {
        let size = reduced.basis(0).len();
        if size > 64 {
            return Ok((Status::Uncertified, json!({"reason": "basis too large for the exhaustive check", "size": size})));
        }
        let triples = reduced.check_jacobi(0)?;
        Ok((Status::Pass, json!({"triples": triples})))
    });

    r.run("p_operator", "P maps each graded slice onto the next integer shift", || {
        let un = GradedLie::new(sc.clone(), spec.clone(), d_z, false)?;
        let x = un.basis(2 * h);
        for u in 1..=2 * h {
            let lo: Vec<Symbol> = x.iter().copied().filter(|&s| un.grade_units(s) == u).collect();
            let hi = un.slice(u + h);
            let mut shifted = Vec::new();
            for s in &lo {
                let e = un.p_operator(&un.element(*s))?;
                shifted.extend(e.terms().keys().copied());
            }
            if shifted != hi {
                return Ok((Status::Fail, json!({"grade_units": u})));
            }
        }
        Ok((Status::Pass, json!({"slices_checked": 2 * h})))
    });

    let env = Enveloping::new(reduced.clone())?;
    r.run("minimal_generators", "minimal generating set of the enveloping algebra", || {
        let cert = env.minimal_generating_set()?;
        let expected = f * (rs.rank() + 1 + d_z);
        Ok(pass_if(cert.generators.len() == expected, json!({
            "certificate": cert,
            "expected_count": expected,
        })))
    });

    r.run("commutative_quotient", "largest commutative quotient of the enveloping algebra", || {
        let bound = opts.grade_bound_units.unwrap_or(2 * h);
        let rep = env.commutative_quotient(bound)?;
        Ok((Status::Pass, json!({"report": rep, "verification": "bounded by grade"})))
    });

    let quotient = if f == 1 {
        default_quotient(&rs, p, n, d_z, opts.group_cap)
    } else {
        Err(Error::UnsupportedType("group-algebra models are implemented for f = 1".into()))
    };
    let ladder = quotient.as_ref().ok().map(|q| AugmentationLadder::compute(&q.group, None));

    r.run("group_ring_congruences", "group ring congruences in powers of m", || {
        let q = quotient.clone()?;
        let l = ladder.as_ref().expect("ladder exists with the quotient");
        let rep = group_ring_congruences(&q.group, l, opts.congruence_samples, &mut rng)?;
        Ok((Status::Pass, json!({"group": q.group.name(), "order": q.group.order(), "report": rep})))
    });

    r.run("root_elements_in_m_powers", "root and coroot elements in powers of m", || {
        let q = quotient.clone()?;
        let l = ladder.as_ref().expect("ladder exists with the quotient");
        let checks = root_element_memberships(&q, l, 3, &mut rng)?;
        let identity_spec = spec.with_precision(n.max(3))?;
        let identity = (0..f).all(|r| sl2_twist_identity(&identity_spec, r).unwrap_or(false));
        Ok(pass_if(identity, json!({
            "group": q.group.name(),
            "memberships": checks.len(),
            "semantics": "membership of images in the finite quotient",
            "sl2_identity_holds": identity,
        })))
    });

    if d_z == 0 {
        r.run("filtration_comparison", "augmentation filtration against the monomial filtration", || {
            let q = quotient.clone()?;
            let l = ladder.as_ref().expect("ladder exists with the quotient");
            let k_max = l.nilpotency_index().saturating_sub(1);
            let cmp = compare_filtrations(&q, l, k_max)?;
            let ok = cmp.all_equal() && cmp.monomials_in_expected_power;
            Ok(pass_if(ok, json!({"comparison": cmp, "certifiable_up_to_units": k_max})))
        });
    } else {
        r.run("central_elements", "central torus elements outside m^2", || {
            let q = quotient.clone()?;
            let l = ladder.as_ref().expect("ladder exists with the quotient");
            let w = central_witnesses(&q, l);
            let ok = !w.is_empty() && w.iter().all(|c| c.in_m && !c.in_m2);
            Ok(pass_if(ok, json!({"group": q.group.name(), "witnesses": w})))
        });
    }

    r.run("dimension_bound", "dimension bound against the flag variety", || {
        Ok((Status::Pass, json!(gk_bounds(ct, f))))
    });

    let mut summary = Summary::default();
    for c in &r.checks {
        match c.status {
            Status::Pass => summary.pass += 1,
            Status::Fail => summary.fail += 1,
            Status::Uncertified => summary.uncertified += 1,
        }
    }
    Ok(VerificationReport {
        tool: "iwahori-gr".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        schema: REPORT_SCHEMA,
        datum: Datum {
            ctype: rs.label(),
            rank: rs.rank(),
            p,
            f,
            n,
            semisimple: d_z == 0,
            d_z,
        },
        seed: opts.seed,
        convention_id: sc.convention_id().into(),
        checks: r.checks,
        summary,
    })
}

fn la_oracle(la: &GradedLie, alpha: usize, samples: usize, rng: &mut ChaCha8Rng) -> Result<crate::graded::OracleReport> {
    certify_brackets_against_oracle(la, OracleModel::Sl2(alpha), samples, rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk_examples() {
        let a2 = gk_bounds(CartanType::parse("A2").unwrap(), 1);
        assert_eq!((a2.bound, a2.expected, a2.conflict), (3, 3, false));
        let b2 = gk_bounds(CartanType::parse("B2").unwrap(), 1);
        assert_eq!((b2.bound, b2.expected, b2.conflict), (3, 4, true));
        let a1 = gk_bounds(CartanType::parse("A1").unwrap(), 2);
        assert_eq!((a1.bound, a1.expected, a1.conflict), (4, 2, false));
    }

    #[test]
    fn inadmissible_primes() {
        let o = VerifyOptions::default();
        let a2 = CartanType::parse("A2").unwrap();
        assert!(matches!(run_verify(a2, 3, 1, 2, 0, &o), Err(Error::InadmissiblePrime { .. })));
        let g2 = CartanType::parse("G2").unwrap();
        assert!(matches!(run_verify(g2, 5, 1, 2, 0, &o), Err(Error::InadmissiblePrime { .. })));
        assert_eq!(smallest_admissible_prime(&RootSystem::from_label("G2").unwrap()), 11);
    }

    #[test]
    fn a2_p5_all_pass() {
        let rep = run_verify(CartanType::parse("A2").unwrap(), 5, 1, 2, 0, &VerifyOptions::default()).unwrap();
        for c in &rep.checks {
            assert_eq!(c.status, Status::Pass, "{}: {}", c.name, c.detail);
        }
    }
}
