use qkdnet::pauli::{audit_family, epsilon_formula, gen_purity_family, PurityFamily};

#[test]
fn small_families_meet_their_bounds() {
    for (r, s, bound) in [(2, 2, 0.8), (2, 3, 4.0 / 9.0)] {
        assert!((epsilon_formula(r, s) - bound).abs() < 1e-15);
        let mut fam = gen_purity_family(r, s, 2024).unwrap();
        let eps = audit_family(&mut fam).unwrap();
        assert!(eps <= bound + 1e-15, "({r},{s}) audited {eps}");
        assert_eq!(fam.epsilon_audited, Some(eps));
        assert_eq!((fam.u(), fam.t()), (r * s, (r - 1) * s));
    }
}

#[test]
fn generation_is_reproducible_and_serializes() {
    let a = gen_purity_family(2, 3, 9).unwrap();
    let b = gen_purity_family(2, 3, 9).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    let back = PurityFamily::from_json(&a.to_json().unwrap()).unwrap();
    assert_eq!(back.to_json().unwrap(), a.to_json().unwrap());
}

#[test]
#[ignore = "u = 12 exhaustive audit takes minutes"]
fn family_3_4() {
    let mut fam = gen_purity_family(3, 4, 1).unwrap();
    assert!(audit_family(&mut fam).unwrap() <= epsilon_formula(3, 4));
}
