use lgs::algebra::{verify_relations, Algebra, Degree, Element};
use lgs::examples;
use lgs::fine::{same_set, Coef};
use lgs::groupoid::{compose, universe, BasicBisection, SymbolWeights};
use lgs::{Error, Lgs};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_element(alg: &Algebra, pool: &[BasicBisection], rng: &mut ChaCha8Rng) -> Element {
    let mut x = Element::zero();
    for _ in 0..rng.gen_range(1..=2) {
        let m = alg.monomial(pool.choose(rng).unwrap()).unwrap();
        let c = Coef::from_integer(rng.gen_range(-2..=3).into());
        x = alg.add(&x, &alg.scale(&m, &c)).unwrap();
    }
    x
}

fn ok_or_budget<T>(r: lgs::Result<T>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(Error::DepthBudget { .. }) => None,
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn associativity_on_sampled_triples() {
    for s in examples::reference_systems(4) {
        let alg = Algebra::new(&s).unwrap();
        let pool = universe(&s, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        let mut tries = 0;
        while checked < 1000 {
            tries += 1;
            assert!(tries < 20_000, "{}: too many depth failures", s.name());
            let (x, y, z) = (
                random_element(&alg, &pool, &mut rng),
                random_element(&alg, &pool, &mut rng),
                random_element(&alg, &pool, &mut rng),
            );
            let left = ok_or_budget(alg.multiply(&x, &y).and_then(|xy| alg.multiply(&xy, &z)));
            let right = ok_or_budget(alg.multiply(&y, &z).and_then(|yz| alg.multiply(&x, &yz)));
            if let (Some(l), Some(r)) = (left, right) {
                assert!(alg.equal(&l, &r).unwrap(), "{}: {} | {} | {}", s.name(), alg.display(&x), alg.display(&y), alg.display(&z));
                checked += 1;
            }
        }
    }
}

#[test]
fn adjoint_reverses_products() {
    for s in examples::reference_systems(4) {
        let alg = Algebra::new(&s).unwrap();
        let pool = universe(&s, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let x = random_element(&alg, &pool, &mut rng);
            let y = random_element(&alg, &pool, &mut rng);
            let Some(xy) = ok_or_budget(alg.multiply(&x, &y)) else { continue };
            let lhs = alg.adjoint(&xy).unwrap();
            let rhs = alg.multiply(&alg.adjoint(&y).unwrap(), &alg.adjoint(&x).unwrap()).unwrap();
            assert!(alg.equal(&lhs, &rhs).unwrap());
            assert_eq!(alg.adjoint(&alg.adjoint(&x).unwrap()).unwrap(), x);
        }
    }
}

#[test]
fn grading_is_additive() {
    for s in examples::reference_systems(4) {
        let alg = Algebra::new(&s).unwrap();
        let pool = universe(&s, 2).unwrap();
        let weights: Vec<SymbolWeights> = vec![
            SymbolWeights::ones(s.alphabet()),
            SymbolWeights { w: (0..s.alphabet().len() as i64).map(|i| 2 * i - 1).collect() },
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let x = alg.monomial(pool.choose(&mut rng).unwrap()).unwrap();
            let y = alg.monomial(pool.choose(&mut rng).unwrap()).unwrap();
            let Some(xy) = ok_or_budget(alg.multiply(&x, &y)) else { continue };
            for w in &weights {
                match (alg.degree(w, &x), alg.degree(w, &y), alg.degree(w, &xy)) {
                    (_, _, Degree::Zero) | (Degree::Zero, _, _) | (_, Degree::Zero, _) => {}
                    (Degree::Homogeneous(a), Degree::Homogeneous(b), Degree::Homogeneous(c)) => assert_eq!(a + b, c),
                    other => panic!("{other:?}"),
                }
            }
        }
    }
}

#[test]
fn diagonal_elements_commute() {
    for s in examples::reference_systems(4) {
        let alg = Algebra::new(&s).unwrap();
        let diag: Vec<BasicBisection> = universe(&s, 2).unwrap().into_iter().filter(|b| b.mu == b.nu).collect();
        for x in &diag {
            for y in &diag {
                let (x, y) = (alg.monomial(x).unwrap(), alg.monomial(y).unwrap());
                let (Some(xy), Some(yx)) = (ok_or_budget(alg.multiply(&x, &y)), ok_or_budget(alg.multiply(&y, &x))) else {
                    continue;
                };
                assert!(alg.equal(&xy, &yx).unwrap());
            }
        }
    }
}

fn support_matches(s: &Lgs, d: usize) {
    let alg = Algebra::new(s).unwrap();
    let pool = universe(s, d).unwrap();
    for b1 in &pool {
        for b2 in &pool {
            let Some(prod) = ok_or_budget(alg.multiply(&alg.monomial(b1).unwrap(), &alg.monomial(b2).unwrap())) else {
                continue;
            };
            let Some(pieces) = ok_or_budget(compose(s, b1, b2)) else { continue };
            assert!(prod.form().cells().all(|(_, c)| *c == Coef::from_integer(1.into())), "{}: {b1:?} {b2:?}", s.name());
            let support: Vec<BasicBisection> = prod.form().support().into_iter().collect();
            assert!(same_set(s, &support, &pieces).unwrap(), "{}: {b1:?} * {b2:?}", s.name());
        }
    }
}

#[test]
fn products_of_monomials_are_indicators_of_compositions() {
    for s in examples::reference_systems(3) {
        support_matches(&s, 1);
    }
    support_matches(&examples::golden(6), 2);
    support_matches(&examples::even(6), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn relations_hold_on_random_systems(seed in any::<u64>()) {
        let s = lgs::gen::random_lgs(seed, 4);
        prop_assume!(s.is_left_resolving().is_ok());
        for l in 0..4 {
            let r = verify_relations(&s, l).unwrap();
            prop_assert!(r.ok(), "seed {seed} level {l}: {r:?}");
        }
    }

    #[test]
    fn compose_matches_multiply_on_random_systems(seed in any::<u64>()) {
        let s = lgs::gen::random_lgs(seed, 4);
        prop_assume!(s.is_left_resolving().is_ok());
        support_matches(&s, 1);
    }

    #[test]
    fn one_is_a_unit(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let s = lgs::gen::random_lgs(seed, 4);
        prop_assume!(s.is_left_resolving().is_ok());
        let alg = Algebra::new(&s).unwrap();
        let pool = universe(&s, 2).unwrap();
        let x = alg.monomial(pick.get(&pool)).unwrap();
        let one = alg.one().unwrap();
        prop_assert!(alg.equal(&alg.multiply(&one, &x).unwrap(), &x).unwrap());
        prop_assert!(alg.equal(&alg.multiply(&x, &one).unwrap(), &x).unwrap());
    }
}
