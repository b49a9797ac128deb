use rigidity_core::calculus::FlowParams;
use rigidity_core::grid::{Box, GridSection, GridSpec};
use rigidity_core::nashmoser::{homotopy_contract_check, ConstantsSchedule, InstanceConstants, Stopping};
use rigidity_core::symplectic::{darboux_solve, moser_path, pullback_coefficient, DarbouxInstance};
use rigidity_core::Error;

fn base(n: usize) -> GridSpec {
    GridSpec::uniform(Box::cube(2, 2.0), n).unwrap()
}

fn schedule() -> ConstantsSchedule {
    ConstantsSchedule::new(2.0, 1.0, 1.0, 0.0, InstanceConstants { d: 1, l1: 0, l2: 0 }, 25).unwrap()
}

#[test]
fn canonical_form_is_fixed() {
    let omega = GridSection::from_scalar_fn(base(33), |_| 1.0);
    let sol = darboux_solve(&omega, &schedule(), &Stopping::new(1e-6)).unwrap();
    let run = sol.run.unwrap();
    assert_eq!((run.steps, run.converged), (0, true));
    assert_eq!(sol.map.disp.max_abs(), 0.0);
}

#[test]
fn radial_primitive_inverts_divergence() {
    let inst = DarbouxInstance::new(base(65)).unwrap();
    let w = inst.section(|x| 0.1 * (x[0] * x[1]).cos() + 0.05 * x[0]);
    let res = homotopy_contract_check(&inst, &w, 1.0, 0.5).unwrap();
    assert!(res < 1e-5, "{res}");
}

#[test]
fn moser_path_pulls_back_to_canonical() {
    let g = |x: &[f64]| 0.1 * (x[0] + 0.5 * x[1]).sin();
    let target = base(65).sub_lattice(&Box::cube(2, 1.0)).unwrap().0;
    let phi = moser_path(&g, &target, &Box::cube(2, 2.0), &FlowParams::default()).unwrap();
    let defect = pullback_coefficient(&g, &phi).unwrap();
    assert!(defect.max_abs() < 1e-6, "{}", defect.max_abs());
}

#[test]
fn coarse_grid_run_converges() {
    let g = |x: &[f64]| 0.05 * (x[0] - x[1]).cos() * x[0].sin();
    let omega = GridSection::from_scalar_fn(base(65), move |x| 1.0 + g(x));
    let sol = darboux_solve(&omega, &schedule(), &Stopping::new(1e-5)).unwrap();
    assert!(sol.run.as_ref().unwrap().converged);
    assert!(sol.residual <= 1e-5);
}

#[test]
fn degenerate_or_misplaced_forms() {
    let omega = GridSection::from_scalar_fn(base(33), |x| x[0]);
    assert!(matches!(darboux_solve(&omega, &schedule(), &Stopping::new(1e-6)), Err(Error::Domain(_))));
    let off = GridSpec::uniform(Box::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap(), 9).unwrap();
    assert!(matches!(DarbouxInstance::new(off), Err(Error::Domain(_))));
}
