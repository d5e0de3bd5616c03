//! Property verdicts over the catalog: route agreement, logical implications and the
//! canonical forms of generator shape operators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use surflab::cartan::{canonical_initial_frame, integrate_cartan_frame, null_scroll_chart};
use surflab::classify::{
    classify_family, shape_canonical_form, umbilical_along, CanonicalForm, Property, Verdict,
};
use surflab::exprlang::parse;
use surflab::families::{FamilyConfig, FamilyId};
use surflab::spaceforms::SpaceFormModel;
use surflab::verify::{build_instances, catalog_configs, Instance};

const WARPINGS: [&str; 4] = ["exp(z)", "cosh(z)", "1 + z^2/4", "2 + sin(z)"];

fn assert_routes_agree(inst: &Instance) {
    for p in Property::ALL {
        let r = inst
            .property(p)
            .unwrap_or_else(|e| panic!("{}: {e}", inst.label));
        assert!(
            r.routes_agree(),
            "{} {}: direct {:?} criterion {:?}",
            inst.label,
            p.as_str(),
            r.direct,
            r.criterion
        );
    }
}

#[test]
fn catalog_routes_agree() {
    for inst in build_instances(&catalog_configs()) {
        assert_routes_agree(&inst);
    }
}

/// Catalog families with every parameter scaled by a factor in [0.85, 1.15] and a random
/// warping; draws whose parameters leave the family's domain are redrawn.
fn perturbed_configs(count: usize, seed: u64) -> Vec<FamilyConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let id = FamilyId::ALL[rng.gen_range(0..FamilyId::ALL.len())];
        let cs = id.curvatures();
        let c = cs[rng.gen_range(0..cs.len())];
        let mut cfg = FamilyConfig::new(id)
            .with_c(c)
            .with_warping(WARPINGS[rng.gen_range(0..WARPINGS.len())]);
        for &(name, default) in id.parameters() {
            let x = if default == 0.0 {
                rng.gen_range(-0.1..0.1)
            } else {
                default * rng.gen_range(0.85..1.15)
            };
            assert!(cfg.params.set(name, x));
        }
        if surflab::families::build_family(&cfg).is_ok() {
            out.push(cfg);
        }
    }
    out
}

#[test]
fn perturbed_families_routes_agree() {
    let cfgs = perturbed_configs(20, 2024);
    for inst in build_instances(&cfgs) {
        assert_routes_agree(&inst);
    }
}

#[test]
fn logical_chain_holds() {
    let mut cfgs = catalog_configs();
    cfgs.extend(perturbed_configs(6, 77));
    for inst in build_instances(&cfgs) {
        let v = |p| inst.property(p).unwrap().verdict;
        let (total, pseudo, class_a) = (
            v(Property::TotallyUmbilical),
            v(Property::PseudoUmbilical),
            v(Property::ClassA),
        );
        if total == Verdict::Pass {
            assert_eq!(pseudo, Verdict::Pass, "{}", inst.label);
            assert_eq!(class_a, Verdict::Pass, "{}", inst.label);
        }
        if pseudo == Verdict::Pass {
            let f = inst.family.as_ref().unwrap();
            let along = umbilical_along(&f.chart, &f.grid, |p| p.shape.mean).unwrap();
            assert_eq!(along.verdict, Verdict::Pass, "{}: {along:?}", inst.label);
        }
    }
}

#[test]
fn totally_umbilical_family_and_its_negations() {
    let insts = build_instances(&[
        FamilyConfig::new(FamilyId::TotUmbH31),
        FamilyConfig::new(FamilyId::ClassAS31),
    ]);
    assert_eq!(
        insts[0]
            .property(Property::TotallyUmbilical)
            .unwrap()
            .verdict,
        Verdict::Pass
    );
    assert_eq!(
        insts[1]
            .property(Property::TotallyUmbilical)
            .unwrap()
            .verdict,
        Verdict::Fail
    );
}

#[test]
fn analyze_reports() {
    let quadric = classify_family(
        &surflab::families::build_family(&FamilyConfig::new(FamilyId::ClassAH31Quadric)).unwrap(),
    )
    .unwrap();
    assert_eq!(quadric.verdict(Property::ClassA), Some(Verdict::Pass));
    assert_eq!(quadric.shape_samples.len(), 5);
    assert!(quadric.frame_invariant_max < 1e-8);

    let cone = classify_family(
        &surflab::families::build_family(&FamilyConfig::new(FamilyId::PseudoE31Cone)).unwrap(),
    )
    .unwrap();
    assert_eq!(cone.verdict(Property::ClassA), Some(Verdict::Fail));
    assert_eq!(cone.verdict(Property::PseudoUmbilical), Some(Verdict::Pass));
    assert_eq!(
        cone.verdict(Property::FlatNormalBundle),
        Some(Verdict::Pass)
    );

    let s31 = classify_family(
        &surflab::families::build_family(&FamilyConfig::new(FamilyId::ClassAS31)).unwrap(),
    )
    .unwrap();
    assert_eq!(s31.verdict(Property::PseudoUmbilical), Some(Verdict::Fail));
}

#[test]
fn null_scroll_shape_is_form_three() {
    let m = SpaceFormModel::de_sitter();
    let path = integrate_cartan_frame(
        &parse("1").unwrap(),
        &parse("0.4+0.2*z^2").unwrap(),
        m,
        canonical_initial_frame(m),
        0.0,
        (-1.0, 1.0),
        1e-3,
    )
    .unwrap();
    let chart = null_scroll_chart("scroll", path, (-1.0, 1.0));
    for (u, v) in [(0.2, 0.3), (-0.4, -0.5)] {
        let s = chart.shape(u, v).unwrap();
        match shape_canonical_form(&s.shape, &s.metric).unwrap() {
            CanonicalForm::III { lambda } => {
                let b = 0.4 + 0.2 * u * u;
                assert!((lambda.abs() - b).abs() < 1e-4, "{lambda} vs {b}");
            }
            other => panic!("{other:?}"),
        }
    }
}

#[test]
fn torus_shape_has_distinct_real_principal_curvatures() {
    let f = surflab::families::build_family(&FamilyConfig::new(FamilyId::PseudoS31Torus)).unwrap();
    let native = f.native.as_ref().unwrap();
    for (u, v) in [(0.0, 0.0), (0.3, -0.4)] {
        let (a, b) = native.coords(u, v).unwrap();
        let s = native.surface.shape(a, b).unwrap();
        match shape_canonical_form(&s.shape, &s.metric).unwrap() {
            CanonicalForm::I { lambda1, lambda2 } => assert!(lambda2 - lambda1 > 1e-3),
            other => panic!("{other:?}"),
        }
    }
}
