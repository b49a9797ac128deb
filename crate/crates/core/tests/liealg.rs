use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rigidity_core::exact::q;
use rigidity_core::liealg::{
    betti2, ce_differential, constructed_perturbation, gl_action, homotopy_operators, jacobiator, random_gl, Bracket, CECochain,
    LieInstance,
};
use rigidity_core::Error;

fn semisimple() -> Vec<Bracket> {
    vec![Bracket::su2(), Bracket::sl2(), Bracket::su2().direct_sum(&Bracket::su2())]
}

#[test]
fn conjugates_keep_jacobi_and_betti() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let algebras = [Bracket::su2(), Bracket::sl2(), Bracket::heisenberg(), Bracket::diagonal_solvable(&[q(1), q(-3)])];
    for (i, mu) in algebras.iter().cycle().take(20).enumerate() {
        let g = random_gl(mu.dim(), &mut rng);
        let nu = gl_action(mu, &g).unwrap();
        assert!(jacobiator(&nu).is_zero(), "case {i}");
        assert_eq!(betti2(&nu).unwrap(), betti2(mu).unwrap(), "case {i}");
    }
}

#[test]
fn differential_squares_to_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for mu in semisimple().iter().chain([Bracket::heisenberg(), Bracket::diagonal_solvable(&[q(2), q(5)])].iter()) {
        for _ in 0..20 {
            let a = CECochain::random(mu.dim(), 1, &mut rng);
            assert!(ce_differential(mu, &ce_differential(mu, &a).unwrap()).unwrap().is_zero());
        }
    }
}

#[test]
fn semisimple_homotopy_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for mu in semisimple() {
        let h = homotopy_operators(&mu).unwrap();
        assert!(h.identity_defect().is_zero());
        // every coboundary β = δα is recovered by δ h̃_1
        for _ in 0..20 {
            let a = CECochain::random(mu.dim(), 1, &mut rng);
            let beta = ce_differential(&mu, &a).unwrap().to_vector();
            let back = h.d1.mul_vec(&h.h1.mul_vec(&beta));
            assert_eq!(back, beta);
        }
    }
}

#[test]
fn nonrigid_algebras_are_refused() {
    assert!(matches!(LieInstance::new(&Bracket::heisenberg()), Err(Error::NonVanishingH2 { betti }) if betti > 0));
    assert!(matches!(LieInstance::new(&Bracket::abelian(2)), Err(Error::NonVanishingH2 { betti: 2 })));
    let mut bad = Bracket::su2().cochain().clone();
    bad.set(&[0, 1], &[q(1), q(0), q(0)]);
    assert!(matches!(homotopy_operators(&Bracket::from_cochain(bad).unwrap()), Err(Error::Domain(_))));
}

#[test]
fn bracket_json_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mu = gl_action(&Bracket::sl2(), &random_gl(3, &mut rng)).unwrap();
    let back = Bracket::from_json(&mu.to_json()).unwrap();
    assert_eq!(back, mu);
}

#[test]
fn perturbations_satisfy_jacobi() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (nu, g0) = constructed_perturbation(&Bracket::su2(), 0.1, &mut rng).unwrap();
    assert!(nu.jacobiator().iter().all(|x| x.abs() < 1e-13));
    assert!(((g0 - nalgebra::DMatrix::identity(3, 3)).norm() - 0.1).abs() < 1e-14);
}
