use coalg_core::homology::{ext_comodule_c, ext_vs_algebra, local_cohomology, rational_part};
use coalg_core::regularity::{as_regular_check, cy_check, default_family, dualizing_report, nakayama};
use coalg_core::repmod::{simple, truncated_free, GradedPresentation};
use coalg_core::{growth_gate, parse_quiver, Error, FieldSpec, Quiver, Side};

const FIELDS: [FieldSpec; 3] = [FieldSpec::Rationals, FieldSpec::Prime(2), FieldSpec::Prime(7)];

#[test]
fn two_cycle_ext_of_c_into_simples() {
    let q = Quiver::cycle(2);
    for f in FIELDS {
        for j in 0..2 {
            assert_eq!(ext_comodule_c(&q, f, j, 0, 8).unwrap().dim, 0);
            let e = ext_comodule_c(&q, f, j, 1, 8).unwrap();
            assert_eq!(e.rep.unwrap(), simple(&q, 1 - j, Side::Right, f));
        }
    }
}

#[test]
fn loop_is_cy1_over_every_field() {
    let q = Quiver::loop_quiver();
    for f in FIELDS {
        let nak = nakayama(&q, f, 10, 10).unwrap();
        assert!(nak.inner.inner);
        let v = cy_check(&default_family(&q, f, 3), &nak).unwrap();
        assert_eq!(v.verdict, "CY-1");
        assert!(dualizing_report(&nak).summary.contains("CY-1"));
    }
}

#[test]
fn cycles_are_twisted_cy() {
    for k in 2..=4 {
        let q = Quiver::cycle(k);
        let nak = nakayama(&q, FieldSpec::Rationals, 3 * k + 4, 3 * k + 4).unwrap();
        assert_eq!(nak.order, k);
        assert_eq!(nak.vertex_map, (0..k).map(|v| (v + 1) % k).collect::<Vec<_>>());
        assert!(nak.consistent && !nak.inner.inner);
        let v = cy_check(&default_family(&q, FieldSpec::Rationals, 1), &nak).unwrap();
        assert!(v.all_hold);
        assert!(v.verdict.starts_with("twisted CY-1"));
    }
}

#[test]
fn kronecker_is_not_regular_on_either_side() {
    let v = as_regular_check(&Quiver::kronecker(), FieldSpec::Rationals, 6).unwrap();
    assert!(!v.left.as_regular && !v.right.as_regular);
    // right side mirrors the left: source simple on the right has Ext^0 = 3
    let r0 = v.right.entries.iter().find(|e| e.vertex == 0 && e.degree == 0).unwrap();
    assert_eq!(r0.dim, 3);
    assert!(matches!(
        nakayama(&Quiver::kronecker(), FieldSpec::Rationals, 6, 6),
        Err(Error::NotRegular(_))
    ));
}

#[test]
fn local_cohomology_of_three_cycle() {
    let q = Quiver::cycle(3);
    let nat = as_regular_check(&q, FieldSpec::Rationals, 9)
        .unwrap()
        .left
        .natural_map
        .unwrap();
    let h = local_cohomology(&q, FieldSpec::Rationals, 1, 9, 9).unwrap();
    let counts = q.path_counts(6);
    for (l, c) in counts.iter().enumerate() {
        let p = h.piece(-(l as i64) - 1).unwrap();
        assert!(p.stable_from.is_some());
        for u in 0..3 {
            for w in 0..3 {
                assert_eq!(p.dims[u][w] as u128, c[w][nat[u]]);
            }
        }
    }
}

#[test]
fn rational_part_of_free_module_vanishes() {
    let q = Quiver::cycle(2);
    let p: GradedPresentation = truncated_free(&q, 0, Side::Left, FieldSpec::Rationals);
    let r = rational_part(&p, 10).unwrap();
    assert_eq!(r.total, 0);
}

#[test]
fn gate_and_parse_errors() {
    let q = parse_quiver("vertices: 1\narrow x 1 1\narrow y 1 1\n").unwrap().quiver;
    let g = growth_gate(&q);
    assert!(!g.bounded && g.witness.is_some());
    match parse_quiver("vertices: 2\narrow a 1 2\narrow a 2 1\n") {
        Err(Error::Parse { line, message }) => {
            assert_eq!(line, 3);
            assert!(message.contains("line 2"));
        }
        other => panic!("expected parse error, got {other:?}"),
    }
    assert!(matches!(
        ext_vs_algebra(&simple(&q, 0, Side::Left, FieldSpec::Rationals), 1, 6),
        Err(Error::Unbounded(_))
    ));
}

#[test]
fn small_truncation_suggests_larger() {
    let q = Quiver::cycle(3);
    match ext_vs_algebra(&simple(&q, 0, Side::Left, FieldSpec::Rationals), 1, 3) {
        Err(Error::Stabilization {
            truncation, suggested, ..
        }) => {
            assert_eq!(truncation, 3);
            assert!(suggested > 3);
            assert!(ext_vs_algebra(&simple(&q, 0, Side::Left, FieldSpec::Rationals), 1, suggested).is_ok());
        }
        other => panic!("expected stabilization error, got {other:?}"),
    }
}
