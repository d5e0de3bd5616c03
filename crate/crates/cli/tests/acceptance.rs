//! Acceptance gate: one line per criterion, then a single assertion over all of them.
//!
//! Criteria 1–4 and 6–9 read the entries of a full verification run and compare residuals
//! against the tolerances pinned below (not the tolerances stored in the entries). Criterion
//! 5 recomputes the operators from point analyses. Criterion 10 runs the binary twice.

use std::process::Command;

use surflab::classify::{Property, Verdict};
use surflab::families::{build_family, Family, FamilyConfig, FamilyId};
use surflab::immersion::analyze_point;
use surflab::numkit::linalg::Mat2;
use surflab::verify::{catalog_configs, run_suite, Entry, Suite, SuiteReport};

const FRAME_INVARIANTS: f64 = 1e-8;
const E3_DZ: f64 = 1e-10;
const LEMMA: f64 = 1e-5;
const U_OF_F: f64 = 1e-6;
const CLASS_A_H3: f64 = 1e-6;
const CARTAN_SUP: f64 = 1e-6;
const GRAM_DRIFT: f64 = 1e-9;
const FLAT_K: f64 = 1e-4;
const OPERATORS: f64 = 1e-5;
const GENERATOR_K: f64 = 1e-4;
const NOT_UMBILICAL: f64 = 1e-2;
const STRUCTURE: f64 = 1e-4;
const PULLBACK: f64 = 1e-10;
const JET: f64 = 1e-7;
const RK4_ORDER: f64 = 3.9;
const SYMBOLIC_VS_FD: f64 = 1e-7;
const PRIMITIVE: f64 = 1e-8;

const CLASS_A: [&str; 5] = [
    "classA/s31",
    "classA/h31",
    "classA/h31-quadric",
    "classA/e31",
    "classA/nullscroll",
];

struct Outcome {
    pass: bool,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            pass: true,
            notes: Vec::new(),
        }
    }

    fn require(&mut self, ok: bool, note: impl Into<String>) {
        if !ok {
            self.pass = false;
            self.notes.push(note.into());
        }
    }

    /// Every selected entry is finite and below `tol`, and at least `min` entries exist.
    fn below(&mut self, entries: &[&Entry], tol: f64, min: usize, what: &str) -> f64 {
        let worst = entries.iter().map(|e| e.residual).fold(0.0, f64::max);
        self.require(
            entries.len() >= min,
            format!("{what}: {} entries, expected ≥ {min}", entries.len()),
        );
        for e in entries {
            self.require(
                e.residual.is_finite() && e.residual < tol,
                format!("{what} {}: {:e} ≥ {tol:e}", e.case, e.residual),
            );
        }
        worst
    }
}

fn select<'a>(r: &'a SuiteReport, suite: &str, quantity: &str) -> Vec<&'a Entry> {
    r.entries
        .iter()
        .filter(|e| e.suite == suite && e.quantity == quantity)
        .collect()
}

fn label(cfg: &FamilyConfig) -> String {
    format!("{}[c={}]", cfg.family, cfg.c.expect("catalog sets c"))
}

fn catalog_labels() -> Vec<String> {
    catalog_configs().iter().map(label).collect()
}

/// Every catalog instance has an entry for `quantity` in `suite`.
fn covers(o: &mut Outcome, r: &SuiteReport, suite: &str, quantity: &str, labels: &[String]) {
    for l in labels {
        o.require(
            r.entries
                .iter()
                .any(|e| e.suite == suite && e.quantity == quantity && &e.case == l),
            format!("{suite}/{quantity}: no entry for {l}"),
        );
    }
}

fn frames(r: &SuiteReport) -> (Outcome, String) {
    let mut o = Outcome::new();
    let labels = catalog_labels();
    covers(&mut o, r, "frames", "frame_invariants", &labels);
    covers(&mut o, r, "frames", "e3_dz_component", &labels);
    let inv = o.below(
        &select(r, "frames", "frame_invariants"),
        FRAME_INVARIANTS,
        labels.len(),
        "frame invariants",
    );
    let dz = o.below(
        &select(r, "frames", "e3_dz_component"),
        E3_DZ,
        labels.len(),
        "e3 x4",
    );
    let s = format!(
        "frames on {} charts: invariants {inv:.1e} < {FRAME_INVARIANTS:e}, e3 x4 {dz:.1e} < {E3_DZ:e}",
        labels.len()
    );
    (o, s)
}

fn lemma(r: &SuiteReport) -> (Outcome, String) {
    let mut o = Outcome::new();
    let labels = catalog_labels();
    let mut worst = 0.0f64;
    for q in [
        "h3_11",
        "h3_12_minus_dlogf",
        "a_e3_upper_triangular",
        "h3_22_from_e",
    ] {
        covers(&mut o, r, "lemma", q, &labels);
        worst = worst.max(o.below(&select(r, "lemma", q), LEMMA, labels.len(), q));
    }
    covers(&mut o, r, "lemma", "u_of_f_plus_df", &labels);
    let uf = o.below(
        &select(r, "lemma", "u_of_f_plus_df"),
        U_OF_F,
        labels.len(),
        "U(f) + f′",
    );
    let s = format!("closed forms {worst:.1e} < {LEMMA:e}, U(f) = −f′ {uf:.1e} < {U_OF_F:e}");
    (o, s)
}

fn main_theorem(r: &SuiteReport) -> (Outcome, String) {
    let mut o = Outcome::new();
    let mut labels = Vec::new();
    for id in CLASS_A {
        let fid = FamilyId::parse(id).unwrap();
        labels.extend(fid.curvatures().iter().map(|c| format!("{id}[c={c}]")));
    }
    covers(&mut o, r, "main-theorem", "class_a", &labels);
    covers(&mut o, r, "main-theorem", "h3", &labels);
    for e in select(r, "main-theorem", "class_a") {
        o.require(
            e.verdict == Verdict::Pass,
            format!("class_a on {}: {:?}", e.case, e.verdict),
        );
    }
    let h3 = o.below(
        &select(r, "main-theorem", "h3"),
        CLASS_A_H3,
        labels.len(),
        "h3",
    );
    let cone: Vec<_> = select(r, "main-theorem", "not_class_a")
        .into_iter()
        .filter(|e| e.case == "pseudoumb/e31-cone[c=0]")
        .collect();
    o.require(
        cone.len() == 1 && cone[0].verdict == Verdict::Pass,
        "cone is not rejected as class A",
    );
    let s = format!(
        "class A on {} instances, h3 {h3:.1e} < {CLASS_A_H3:e}; cone fails class A (residual {:.2})",
        labels.len(),
        cone.first().map_or(f64::NAN, |e| e.residual)
    );
    (o, s)
}

fn cartan(r: &SuiteReport) -> (Outcome, String) {
    let mut o = Outcome::new();
    let frame = o.below(
        &select(r, "cartan", "frame_sup_error"),
        CARTAN_SUP,
        1,
        "frame",
    );
    let surface = o.below(
        &select(r, "cartan", "surface_sup_error"),
        CARTAN_SUP,
        1,
        "surface",
    );
    let drift = o.below(&select(r, "cartan", "gram_drift"), GRAM_DRIFT, 1, "drift");
    let k = o.below(
        &select(r, "cartan", "gaussian_curvature"),
        FLAT_K,
        2,
        "flat K",
    );
    let s = format!(
        "H31 scroll sup error {:.1e} < {CARTAN_SUP:e}, drift {drift:.1e} < {GRAM_DRIFT:e}, flat K {k:.1e} < {FLAT_K:e}",
        frame.max(surface)
    );
    (o, s)
}

fn family(id: FamilyId) -> Family {
    build_family(&FamilyConfig::new(id)).expect("catalog family builds")
}

/// Largest entrywise deviation of `pick(point)` from `expected(f, f′)` over the grid; with
/// `up_to_sign` the better of `±expected`.
fn operator_residual(
    fam: &Family,
    pick: impl Fn(&surflab::immersion::ShapeData) -> Mat2,
    expected: impl Fn(f64, f64) -> Mat2,
    up_to_sign: bool,
) -> f64 {
    let mut worst = 0.0f64;
    for (u, v) in fam.grid.points() {
        let p = match analyze_point(&fam.chart, u, v) {
            Ok(p) => p,
            Err(_) => return f64::NAN,
        };
        let (f, fp, _) = p.warp;
        let (a, e) = (pick(&p.shape), expected(f, fp));
        let mut d = a.dist(&e);
        if up_to_sign {
            d = d.min(a.dist(&e.scale(-1.0)));
        }
        worst = worst.max(d);
    }
    worst
}

fn section5() -> (Outcome, String) {
    let mut o = Outcome::new();
    let mut worst = 0.0f64;
    let mut check = |o: &mut Outcome, what: &str, r: f64, tol: f64| {
        o.require(r.is_finite() && r < tol, format!("{what}: {r:e}"));
        worst = worst.max(r);
    };
    let log2 = |f: f64, fp: f64| Mat2::scalar((fp / f).powi(2));
    for id in [FamilyId::PseudoE31BScroll, FamilyId::PseudoE31Cone] {
        let r = operator_residual(&family(id), |s| s.a_h, log2, true);
        check(&mut o, &format!("A_H on {}", id.as_str()), r, OPERATORS);
    }
    let ns = family(FamilyId::PseudoE31NullScroll);
    let c3 = ns.config.params.get("c3").unwrap_or_else(|| {
        FamilyId::PseudoE31NullScroll
            .parameters()
            .iter()
            .find(|(n, _)| *n == "c3")
            .expect("c3 parameter")
            .1
    });
    let r = operator_residual(
        &ns,
        |s| s.a_h,
        |f, fp| Mat2::scalar(c3 * c3 + (fp / f).powi(2)),
        true,
    );
    check(&mut o, "A_H on e31-nullscroll", r, OPERATORS);

    let tu = family(FamilyId::TotUmbH31);
    let r = operator_residual(&tu, |s| s.a_e3, |f, fp| Mat2::scalar(-fp / f), false);
    check(&mut o, "A_e3 on totumb/h31", r, OPERATORS);
    let r = operator_residual(&tu, |s| s.a_e4, |f, _| Mat2::scalar(1.0 / f), true);
    check(&mut o, "A_e4 on totumb/h31", r, OPERATORS);

    let torus = family(FamilyId::PseudoS31Torus);
    let report = surflab::classify::classify_family(&torus).expect("torus classifies");
    o.require(
        report.verdict(Property::PseudoUmbilical) == Some(Verdict::Pass),
        "torus is not pseudo-umbilical",
    );
    let mut k = 0.0f64;
    let (nu, nv) = (torus.grid.nu, torus.grid.nv);
    for j in 1..nv - 1 {
        for i in 1..nu - 1 {
            let (u, v) = (torus.grid.u_at(i), torus.grid.v_at(j));
            k = k.max(
                torus
                    .generator
                    .gaussian_curvature(u, v)
                    .map_or(f64::NAN, f64::abs),
            );
        }
    }
    o.require(
        k.is_finite() && k < GENERATOR_K,
        format!("torus generator K {k:e}"),
    );
    let s = format!(
        "A_H, A_e3, A_e4 closed forms {worst:.1e} < {OPERATORS:e}; torus pseudo-umbilical, generator K {k:.1e} < {GENERATOR_K:e}"
    );
    (o, s)
}

fn negative(r: &SuiteReport) -> (Outcome, String) {
    let mut o = Outcome::new();
    let labels: Vec<String> = catalog_configs()
        .iter()
        .filter(|c| matches!(c.c, Some(0) | Some(1)))
        .map(label)
        .collect();
    covers(&mut o, r, "negative", "not_totally_umbilical", &labels);
    covers(
        &mut o,
        r,
        "negative",
        "totally_umbilical_criterion",
        &labels,
    );
    for e in select(r, "negative", "not_totally_umbilical") {
        o.require(
            e.verdict == Verdict::Pass,
            format!("{} is not rejected as totally umbilical", e.case),
        );
    }
    let mut least = f64::INFINITY;
    for e in select(r, "negative", "totally_umbilical_criterion") {
        least = least.min(e.residual);
        o.require(
            e.residual > NOT_UMBILICAL,
            format!("criterion residual {:e} on {}", e.residual, e.case),
        );
    }
    let s31: Vec<_> = select(r, "negative", "not_pseudo_umbilical")
        .into_iter()
        .filter(|e| e.case == "classA/s31[c=1]")
        .collect();
    o.require(
        s31.len() == 1 && s31[0].verdict == Verdict::Pass,
        "classA/s31 is not rejected as pseudo-umbilical",
    );
    let s = format!(
        "totally umbilical fails on {} c∈{{0,1}} instances, criterion ≥ {least:.2} > {NOT_UMBILICAL:e}; classA/s31 not pseudo-umbilical",
        labels.len()
    );
    (o, s)
}

fn structure(r: &SuiteReport) -> (Outcome, String) {
    let mut o = Outcome::new();
    let labels = catalog_labels();
    let mut worst = 0.0f64;
    for q in ["gauss", "codazzi", "ricci"] {
        covers(&mut o, r, "structure", q, &labels);
        worst = worst.max(o.below(&select(r, "structure", q), STRUCTURE, labels.len(), q));
    }
    let fd = o.below(
        &select(r, "structure", "curvature_closed_form_vs_fd"),
        STRUCTURE,
        9,
        "curvature oracle",
    );
    let mutations: Vec<&Entry> = r
        .entries
        .iter()
        .filter(|e| e.suite == "structure" && e.quantity.starts_with("mutation_"))
        .collect();
    o.require(
        mutations.len() >= 12,
        format!("{} mutation entries", mutations.len()),
    );
    let mut caught = f64::INFINITY;
    for e in &mutations {
        caught = caught.min(e.residual);
        o.require(
            e.residual > 1.0,
            format!("{} {} not detected", e.case, e.quantity),
        );
    }
    let s = format!(
        "Gauss/Codazzi/Ricci {worst:.1e} < {STRUCTURE:e}, curvature vs FD {fd:.1e}, {} mutations detected (min ratio {caught:.1e})",
        mutations.len()
    );
    (o, s)
}

fn coordinates(r: &SuiteReport) -> (Outcome, String) {
    let mut o = Outcome::new();
    let w = o.below(
        &select(r, "coordinates", "pullback_residual"),
        PULLBACK,
        3,
        "pullback",
    );
    (o, format!("isothermal pullback {w:.1e} < {PULLBACK:e}"))
}

fn numerics(r: &SuiteReport) -> (Outcome, String) {
    let mut o = Outcome::new();
    let jet = o.below(&select(r, "numerics", "jet_error"), JET, 1, "jet2");
    let sym = o.below(
        &select(r, "numerics", "symbolic_vs_fd"),
        SYMBOLIC_VS_FD,
        1,
        "derivative",
    );
    let prim = o.below(
        &select(r, "numerics", "dF_times_f_minus_one"),
        PRIMITIVE,
        1,
        "F′·f",
    );
    let order: Vec<_> = select(r, "numerics", "convergence_order");
    let p = order.first().map_or(f64::NAN, |e| e.residual);
    o.require(p >= RK4_ORDER, format!("RK4 order {p}"));
    let s = format!(
        "jet2 {jet:.1e} < {JET:e}, RK4 order {p:.3} ≥ {RK4_ORDER}, d/dz vs FD {sym:.1e} < {SYMBOLIC_VS_FD:e}, F′·f − 1 {prim:.1e} < {PRIMITIVE:e}"
    );
    (o, s)
}

fn determinism() -> (Outcome, String) {
    let mut o = Outcome::new();
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_surflab"))
            .args(["verify", "--suite", "all"])
            .env_remove("SURFLAB_THREADS")
            .output()
            .expect("binary runs")
    };
    let (a, b) = (run(), run());
    o.require(a.status.success(), format!("first run exit {:?}", a.status));
    o.require(
        b.status.success(),
        format!("second run exit {:?}", b.status),
    );
    o.require(!a.stdout.is_empty(), "empty report");
    o.require(a.stdout == b.stdout, "reports differ");
    (
        o,
        format!(
            "two `verify --suite all` runs: {} bytes each, identical",
            a.stdout.len()
        ),
    )
}

#[test]
fn acceptance() {
    let report = run_suite(Suite::All, &[]);
    let results = [
        frames(&report),
        lemma(&report),
        main_theorem(&report),
        cartan(&report),
        section5(),
        negative(&report),
        structure(&report),
        coordinates(&report),
        numerics(&report),
        determinism(),
    ];
    let mut failed = Vec::new();
    for (i, (o, summary)) in results.iter().enumerate() {
        let n = i + 1;
        println!(
            "criterion {n:>2}: {} {summary}",
            if o.pass { "PASS" } else { "FAIL" }
        );
        for note in &o.notes {
            println!("              {note}");
        }
        if !o.pass {
            failed.push(n);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
