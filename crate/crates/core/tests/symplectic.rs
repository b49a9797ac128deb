use rigidity_core::exact::{q, qf, Q};
use rigidity_core::symplectic::{canonical_omega, check_integrable, poisson_bracket, PolyIntegrableSystem, Polynomial};
use rigidity_core::williamson::{classify, normal_model, WilliamsonType};
use num::Zero;

fn var(dim: usize, i: usize) -> Polynomial {
    Polynomial::var(dim, i)
}

#[test]
fn focus_focus_pair_commutes() {
    let (x1, x2, y1, y2) = (var(4, 0), var(4, 1), var(4, 2), var(4, 3));
    let f1 = &(&x1 * &y1) + &(&x2 * &y2);
    let f2 = &(&x1 * &y2) - &(&x2 * &y1);
    assert!(poisson_bracket(&f1, &f2, &canonical_omega(2)).unwrap().is_zero());
    assert_eq!(poisson_bracket(&x1, &y1, &canonical_omega(2)).unwrap(), Polynomial::constant(4, q(1)));
}

#[test]
fn integrability_of_products_and_dependent_pairs() {
    let eh = normal_model(WilliamsonType { e: 1, h: 1, f: 0 }, 2).unwrap();
    let rep = check_integrable(&eh, 7, 20);
    assert!(rep.involutive && rep.independent);

    let x = var(4, 0);
    let dep = PolyIntegrableSystem::new(canonical_omega(2), vec![x.clone(), x.scale(&q(2))]).unwrap();
    let rep = check_integrable(&dep, 7, 20);
    assert!(rep.involutive && !rep.independent);
}

#[test]
fn normal_models_classify_to_their_type() {
    for (e, h, f, n) in [(2, 0, 0, 2), (1, 1, 0, 2), (0, 2, 0, 2), (0, 0, 1, 2), (1, 0, 1, 3)] {
        let t = WilliamsonType { e, h, f };
        let sys = normal_model(t, n).unwrap();
        let rep = classify(&sys, &vec![Q::zero(); 2 * n]).unwrap();
        assert_eq!(rep.kind, t, "{t}");
        assert_eq!(rep.fixed_point_set_dim, 0);
    }
}

#[test]
fn higher_order_terms_do_not_change_the_type() {
    let (x, y) = (var(2, 0), var(2, 1));
    let mu = &(&(&x * &x) + &(&y * &y)).scale(&qf(1, 2)) + &x.pow(3);
    let sys = PolyIntegrableSystem::new(canonical_omega(1), vec![mu]).unwrap();
    let rep = classify(&sys, &[Q::zero(), Q::zero()]).unwrap();
    assert_eq!(rep.kind, WilliamsonType { e: 1, h: 0, f: 0 });
}
