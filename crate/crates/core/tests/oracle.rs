use qnetcode::netcode::construct_linear_code;
use qnetcode::oracle::{
    classical_check, end_to_end_sweep, fixtures, infeasibility_check, lemma1_case, lemma1_check,
    lemma2_case, lemma2_check, SweepCase, TOLERANCE,
};
use qnetcode::Complex64;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[test]
fn lemma1_identity_maps_on_two_qubits() {
    // x = (x0, x1); A holds x0, B holds x1.
    let alpha = [c(0.1), c(0.7), c(-0.3), c(0.2)];
    let case = lemma1_case(2, &[vec![1, 0]], &[vec![0, 1]], &alpha).unwrap();
    assert_eq!(case.outcomes, 2);
    assert!(case.mismatches.is_empty(), "{:?}", case.mismatches);
    let case = lemma1_case(
        2,
        &[vec![1, 0], vec![0, 1]],
        &[vec![1, 0], vec![0, 1]],
        &alpha,
    )
    .unwrap();
    assert_eq!(case.outcomes, 4);
    assert!(case.mismatches.is_empty(), "{:?}", case.mismatches);
}

#[test]
fn lemma1_bell_pair_gives_signed_plus_state() {
    // (|00> + |11>)/sqrt2 with the second qubit Fourier-measured.
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let case = lemma1_case(2, &[vec![1]], &[vec![1]], &[c(h), c(h)]).unwrap();
    assert!(case.mismatches.is_empty());
    assert!(case.max_deviation < 1e-12);
}

#[test]
fn lemma1_constant_g_leaves_no_phase() {
    let alpha = [
        c(0.5),
        c(-0.5),
        c(0.5),
        c(0.5),
        c(0.1),
        c(0.2),
        c(0.3),
        c(0.4),
        c(0.0),
    ];
    let case = lemma1_case(3, &[vec![1, 0], vec![0, 1]], &[vec![0, 0]], &alpha).unwrap();
    assert_eq!(case.outcomes, 3);
    assert!(case.mismatches.is_empty(), "{:?}", case.mismatches);
}

#[test]
fn lemma1_random_instances() {
    for (n, p) in [(2, 2), (3, 2), (4, 2), (2, 3), (3, 3), (4, 3)] {
        let r = lemma1_check(n, p, 50, n as u64 * 10 + p);
        assert!(r.passed(), "{r:?}");
        assert!(r.cases >= 50);
    }
}

#[test]
fn lemma2_examples() {
    let alpha = [c(0.6), c(0.8)];
    assert!(lemma2_case(2, &alpha, &[0]).unwrap() < 1e-15);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    // |+> phased by b=1 is |->; the correction brings it back.
    assert!(lemma2_case(2, &[c(h), c(h)], &[1]).unwrap() < 1e-15);
    for (n, p) in [(6, 2), (6, 3), (1, 3)] {
        let r = lemma2_check(n, p, 100, 7);
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.cases, 100);
    }
}

#[test]
fn classical_decoding_on_feasible_fixtures() {
    for f in fixtures::ALL.iter().filter(|f| f.feasible) {
        let net = f.network();
        let p = f
            .field
            .unwrap_or_else(|| qnetcode::gf::choose_field_size(&net));
        let code = construct_linear_code(&net.expand_capacities(), p, 0).unwrap();
        let r = classical_check(f.name, &code);
        assert!(r.passed(), "{r:?}");
    }
}

#[test]
fn cut_butterfly_is_infeasible() {
    let r = infeasibility_check(
        "butterfly_cut",
        &fixtures::get("butterfly_cut").unwrap().network(),
        1,
    );
    assert!(r.passed(), "{r:?}");
}

#[test]
fn small_sweeps_have_unit_fidelity() {
    let cases = [
        SweepCase::all_selections(
            "single_edge",
            fixtures::get("single_edge").unwrap().network(),
            3,
            2,
        ),
        SweepCase::all_selections(
            "two_paths",
            fixtures::get("two_paths").unwrap().network(),
            3,
            2,
        ),
        SweepCase::all_selections(
            "butterfly",
            fixtures::get("butterfly").unwrap().network(),
            3,
            2,
        ),
    ];
    let r = end_to_end_sweep(&cases);
    assert!(r.passed(), "{r:?}");
    assert!(r.min_fidelity.unwrap() >= 1.0 - TOLERANCE);
}
