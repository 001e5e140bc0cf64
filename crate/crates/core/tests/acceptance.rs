//! Acceptance criteria 1 to 10. Prints one line per criterion; exits non-zero if any fails.

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use iwahori_core::group_algebra::{
    central_witnesses, compare_filtrations, iwahori_lattice_quotient, group_ring_congruences,
    root_element_memberships, sl2_twist_identity,
};
use iwahori_core::{
    certify_brackets_against_oracle, certify_constants, check_p_valuation_axioms, gk_bounds,
    run_verify, AugmentationLadder, CartanType, Enveloping, Family, FiniteGroup, GradedLie,
    OracleModel, RingSpec, RootSystem, StructureConstants, Symbol, VerifyOptions,
    DEFAULT_GROUP_CAP,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn lie(label: &str, p: u64, f: usize, n: u32, d_z: usize, reduced: bool) -> GradedLie {
    let rs = Arc::new(RootSystem::from_label(label).unwrap());
    let sc = Arc::new(StructureConstants::compute(rs).unwrap());
    GradedLie::new(sc, RingSpec::new(p, f, n).unwrap(), d_z, reduced).unwrap()
}

/// Closed-form root counts.
fn root_count(ct: CartanType) -> usize {
    let n = ct.rank;
    match ct.family {
        Family::A => n * (n + 1),
        Family::B | Family::C => 2 * n * n,
        Family::D => 2 * n * (n - 1),
        Family::G => 12,
        Family::F => 48,
        Family::E => match n {
            6 => 72,
            7 => 126,
            _ => 240,
        },
    }
}

/// `e_i - e_j` in simple-root coordinates of `A_n`.
fn type_a_root(n: usize, i: usize, j: usize) -> Vec<i64> {
    let (lo, hi, sign) = if i < j { (i, j, 1) } else { (j, i, -1) };
    (0..n).map(|k| if k >= lo && k < hi { sign } else { 0 }).collect()
}

fn criterion1() -> Outcome {
    let labels = ["A1", "A2", "A3", "A4", "B2", "C2", "B3", "C3", "D4", "G2"];
    let mut triples = 0;
    for l in labels {
        let rs = Arc::new(RootSystem::from_label(l).map_err(s)?);
        let sc = StructureConstants::compute(rs).map_err(s)?;
        triples += certify_constants(&sc).map_err(|e| format!("{l}: {e}"))?.jacobi_triples;
    }
    // [I + E_ij, I + E_kl] is I + E_il when j = k, I - E_kj when l = i, else I.
    let mut pairs = 0;
    for n in 1..=4usize {
        let rs = Arc::new(RootSystem::from_label(&format!("A{n}")).unwrap());
        let sc = StructureConstants::compute(rs.clone()).unwrap();
        let d = n + 1;
        let id = |i, j| rs.id_of(&type_a_root(n, i, j)).unwrap();
        for (i, j, k, l) in itertools4(d) {
            if (i, j) == (l, k) || (i, j) == (k, l) {
                continue;
            }
            let expected = if j == k {
                Some((id(i, l), 1))
            } else if l == i {
                Some((id(k, j), -1))
            } else {
                None
            };
            let terms = sc.terms(id(i, j), id(k, l)).map_err(s)?;
            let got = match terms {
                [] => None,
                [t] if t.i == 1 && t.j == 1 => Some((t.root, t.c)),
                _ => return Err(format!("A{n}: unexpected higher terms")),
            };
            ensure(got == expected, format!("A{n}: mismatch at E_{i}{j}, E_{k}{l}"))?;
            pairs += 1;
        }
    }
    Ok(format!("{} types, {triples} Jacobi triples, {pairs} type-A pairs", labels.len()))
}

fn itertools4(d: usize) -> Vec<(usize, usize, usize, usize)> {
    let mut v = Vec::new();
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    if i != j && k != l {
                        v.push((i, j, k, l));
                    }
                }
            }
        }
    }
    v
}

fn criterion2() -> Outcome {
    let mut out = Vec::new();
    for l in ["A1", "A2"] {
        let rs = Arc::new(RootSystem::from_label(l).unwrap());
        let spec = RingSpec::new(5, 1, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rep = check_p_valuation_axioms(&rs, &spec, 500, &mut rng).map_err(s)?;
        ensure(rep.samples >= 500, "too few samples")?;
        out.push(format!("{l}: {} samples, {} certified", rep.samples, rep.passed));
    }
    Ok(out.join("; "))
}

fn criterion3() -> Outcome {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for l in ["A1", "A2"] {
        let la = lie(l, 5, 1, 3, 0, true);
        let rep = certify_brackets_against_oracle(&la, OracleModel::TypeA, 300, &mut rng).map_err(s)?;
        ensure(rep.compared >= 300, format!("{l}: only {} pairs compared", rep.compared))?;
        out.push(format!("{l}: {}", rep.compared));
    }
    let la = lie("C2", 7, 1, 3, 0, true);
    let rs = la.root_system().clone();
    for alpha in rs.positives() {
        let rep = certify_brackets_against_oracle(&la, OracleModel::Sl2(alpha), 300, &mut rng).map_err(s)?;
        ensure(rep.compared >= 300, format!("C2 {:?}: only {} pairs", rs.root(alpha), rep.compared))?;
        out.push(format!("C2{:?}: {}", rs.root(alpha), rep.compared));
    }
    Ok(out.join(", "))
}

fn criterion4() -> Outcome {
    let data = [("A2", 5, 1, 0), ("A1", 5, 2, 0), ("A1", 5, 1, 1), ("B2", 7, 1, 0), ("G2", 11, 1, 0), ("A3", 7, 2, 1)];
    let mut sizes = Vec::new();
    for (l, p, f, d_z) in data {
        let la = lie(l, p, f, 2, d_z, true);
        let rs = la.root_system().clone();
        let basis = la.basis(0);
        let expected = f * (root_count(rs.cartan_type()) + rs.rank() + d_z);
        ensure(basis.len() == expected, format!("{l} f={f}: {} != {expected}", basis.len()))?;
        for &a in &basis {
            for &b in &basis {
                let br = la.bracket_symbols(a, b);
                if matches!(a, Symbol::Torus { .. }) {
                    ensure(br.is_zero(), format!("{l}: torus symbol not central"))?;
                }
                if let (Symbol::Root { gamma: x, .. }, Symbol::Root { gamma: y, .. }) = (a, b) {
                    if !rs.is_positive(x) && !rs.is_positive(y) {
                        ensure(br.is_zero(), format!("{l}: negative bracket nonzero"))?;
                    }
                }
            }
        }
        sizes.push(format!("{l}/f{f}/dZ{d_z}={}", basis.len()));
    }
    Ok(sizes.join(" "))
}

fn criterion5() -> Outcome {
    let data = [("A1", 5, 1, 0), ("A2", 5, 1, 0), ("A1", 5, 2, 0), ("A1", 5, 1, 1), ("B2", 7, 1, 0), ("G2", 11, 1, 0)];
    let mut out = Vec::new();
    for (l, p, f, d_z) in data {
        let env = Enveloping::new(lie(l, p, f, 2, d_z, true)).map_err(s)?;
        let rank = env.lie().root_system().rank();
        let cert = env.minimal_generating_set().map_err(|e| format!("{l}: {e}"))?;
        ensure(cert.reached == cert.basis_size, format!("{l}: closure incomplete"))?;
        let expected = f * (rank + 1 + d_z);
        ensure(cert.generators.len() == expected, format!("{l}: {} generators", cert.generators.len()))?;
        ensure(cert.abelianization_dim == expected, format!("{l}: abelianization {}", cert.abelianization_dim))?;
        out.push(format!("{l}/f{f}/dZ{d_z}={expected}"));
    }
    Ok(out.join(" "))
}

/// Coefficients of `prod_g 1 / (1 - t^{grade g})` up to `max`.
fn free_commutative_series(grades: &[i64], max: i64) -> Vec<u64> {
    let mut dp = vec![0u64; max as usize + 1];
    dp[0] = 1;
    for &g in grades {
        for u in g..=max {
            dp[u as usize] += dp[(u - g) as usize];
        }
    }
    dp
}

fn criterion6() -> Outcome {
    let data = [("A1", 5, 1, 0), ("A2", 5, 1, 0), ("A1", 5, 2, 0), ("A1", 5, 1, 1), ("B2", 7, 1, 0)];
    let mut out = Vec::new();
    for (l, p, f, d_z) in data {
        let la = lie(l, p, f, 2, d_z, true);
        let rs = la.root_system().clone();
        let h = la.h();
        let mut expected = BTreeSet::new();
        let mut grades = Vec::new();
        for twist in 0..f {
            for g in 0..rs.num_roots() {
                if rs.class_of(g) == 1 {
                    expected.insert(la.label(la.root_symbol(g, twist)));
                    grades.push(1);
                }
            }
            for lambda in 0..la.cocharacters().rank_t() {
                if la.cocharacters().is_central(lambda) {
                    expected.insert(la.label(la.torus_symbol(lambda, twist)));
                    grades.push(h);
                }
            }
        }
        let env = Enveloping::new(la).map_err(s)?;
        let rep = env.commutative_quotient(2 * h).map_err(|e| format!("{l}: {e}"))?;
        let got: BTreeSet<String> = rep.generators.iter().cloned().collect();
        ensure(got == expected, format!("{l}: generators {got:?} vs {expected:?}"))?;
        let series = free_commutative_series(&grades, 2 * h);
        for slice in &rep.slices {
            let want = series[slice.grade_units as usize];
            ensure(
                slice.quotient_dim == want,
                format!("{l}: grade {}/{h}: {} vs {want}", slice.grade_units, slice.quotient_dim),
            )?;
        }
        out.push(format!("{l}/f{f}/dZ{d_z}: {} slices", rep.slices.len()));
    }
    Ok(out.join(", "))
}

fn criterion7() -> Outcome {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cap = DEFAULT_GROUP_CAP;
    let a1 = Arc::new(RootSystem::from_label("A1").unwrap());
    let a2 = Arc::new(RootSystem::from_label("A2").unwrap());

    let heis = FiniteGroup::heisenberg(5).map_err(s)?;
    let ladder = AugmentationLadder::compute(&heis, None);
    group_ring_congruences(&heis, &ladder, 100, &mut rng).map_err(|e| format!("Heisenberg: {e}"))?;
    let i_a1 = iwahori_lattice_quotient(&a1, 5, vec![vec![2; 2]; 2], 0, cap).map_err(s)?;
    ensure(i_a1.group.order() == 625, "A1 quotient order")?;
    let l_a1 = AugmentationLadder::compute(&i_a1.group, None);
    group_ring_congruences(&i_a1.group, &l_a1, 100, &mut rng).map_err(|e| format!("A1 mod 25: {e}"))?;
    out.push("group ring congruences ok".to_string());

    let sl2 = iwahori_lattice_quotient(&a1, 5, vec![vec![2, 1], vec![3, 2]], 0, cap).map_err(s)?;
    let l_sl2 = AugmentationLadder::compute(&sl2.group, None);
    let m1 = root_element_memberships(&sl2, &l_sl2, 4, &mut rng).map_err(|e| format!("SL2: {e}"))?;
    let sl3 = iwahori_lattice_quotient(&a2, 5, vec![vec![1, 1, 1], vec![1, 1, 1], vec![2, 1, 1]], 0, cap)
        .map_err(s)?;
    let l_sl3 = AugmentationLadder::compute(&sl3.group, None);
    let m2 = root_element_memberships(&sl3, &l_sl3, 4, &mut rng).map_err(|e| format!("SL3: {e}"))?;
    ensure(m1.iter().chain(&m2).all(|m| m.holds_in_quotient), "membership failed")?;
    for f in [1, 2] {
        let spec = RingSpec::new(5, f, 3).unwrap();
        for r in 0..f {
            ensure(sl2_twist_identity(&spec, r).map_err(s)?, format!("SL2 identity f={f} r={r}"))?;
        }
    }
    out.push(format!("{} memberships", m1.len() + m2.len()));

    for (name, q, l) in [("A1 N=2", &i_a1, &l_a1), ("A2 lattice", &sl3, &l_sl3)] {
        let k = l.nilpotency_index() - 1;
        let cmp = compare_filtrations(q, l, k).map_err(|e| format!("{name}: {e}"))?;
        ensure(cmp.all_equal() && cmp.monomials_in_expected_power, format!("{name}: filtrations differ"))?;
        out.push(format!("{name}: equal for k <= {k}"));
    }

    let red = iwahori_lattice_quotient(&a1, 5, vec![vec![2, 1], vec![2, 2]], 2, cap).map_err(s)?;
    let l_red = AugmentationLadder::compute(&red.group, None);
    let w = central_witnesses(&red, &l_red);
    ensure(!w.is_empty() && w.iter().all(|c| c.in_m && !c.in_m2), "no central witness")?;
    out.push("central element outside m^2".to_string());
    Ok(out.join("; "))
}

fn criterion8() -> Outcome {
    for p in [2u64, 3, 5, 7] {
        let cp = FiniteGroup::cyclic(p).map_err(s)?;
        let dims = AugmentationLadder::compute(&cp, None).graded_dims();
        ensure(dims == vec![1; p as usize], format!("C_{p}: {dims:?}"))?;
        let sq = FiniteGroup::cyclic_square(p).map_err(s)?;
        let dims = AugmentationLadder::compute(&sq, None).graded_dims();
        let want: Vec<usize> = (0..2 * p - 1)
            .map(|n| (0..p).flat_map(|a| (0..p).map(move |b| a + b)).filter(|&t| t == n).count())
            .collect();
        ensure(dims == want, format!("C_{p}^2: {dims:?} vs {want:?}"))?;
    }
    Ok("p in {2, 3, 5, 7}".into())
}

fn criterion9() -> Outcome {
    let mut count = 0;
    for ct in CartanType::all_up_to_rank(4) {
        for f in [1, 2] {
            let g = gk_bounds(ct, f);
            let want = ct.rank > 1 && !(ct.family == Family::A && ct.rank == 2);
            ensure(g.conflict == want, format!("{} f={f}", g.ctype))?;
            count += 1;
        }
    }
    Ok(format!("{count} rows"))
}

fn criterion10() -> Outcome {
    let ct = CartanType::parse("A2").unwrap();
    let opts = VerifyOptions::default();
    let a = run_verify(ct, 5, 1, 2, 0, &opts).map_err(s)?;
    let b = run_verify(ct, 5, 1, 2, 0, &opts).map_err(s)?;
    ensure(a.to_json_string() == b.to_json_string(), "reports differ")?;
    ensure(!a.any_fail(), "verify reported a failure")?;
    Ok(format!("{} bytes", a.to_json_string().len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, u64); 10] = [
        ("structure-constant certification", criterion1, 30),
        ("p-valuation axioms", criterion2, 60),
        ("bracket oracle agreement", criterion3, 120),
        ("reduced basis counts", criterion4, 5),
        ("minimal generators", criterion5, 10),
        ("commutative quotient", criterion6, 30),
        ("group-algebra suite", criterion7, 600),
        ("augmentation powers of C_p and C_p x C_p", criterion8, 5),
        ("dimension bound table", criterion9, 1),
        ("determinism", criterion10, 60),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let slow = took > Duration::from_secs(*budget);
        let (tag, msg) = match (&outcome, slow) {
            (Ok(m), false) => ("PASS", m.clone()),
            (Ok(m), true) => ("FAIL", format!("{m}; over the {budget} s budget")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!("criterion {:>2} {tag} {name} ({:.2} s): {msg}", i + 1, took.as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
