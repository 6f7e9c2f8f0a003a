//! Acceptance criteria, one PASS/FAIL line each. Integer invariants are
//! compared exactly; runtime targets are wall-clock seconds per row.
//!
//! Deviations that are properties of the model itself (not of the code)
//! are listed in `KNOWN_DEVIATIONS`; they print FAIL but do not fail the
//! run. Anything else failing makes the process exit nonzero.

use std::collections::BTreeMap;
use std::time::Instant;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use shtuka_cli::pipeline::{BuildRequest, SurfaceSpec};
use shtuka_cli::reproduce::{reproduce, ReproduceOptions, ReproduceReport, RowStatus, TrialSpec};
use shtuka_core::fibration::{
    find_rational_point, generic_fiber, point_route, quartic_invariants_curve, FiberOptions,
    QuarticModel, WeierstrassCurve,
};
use shtuka_core::field::{make_field, prime_power};
use shtuka_core::geometry::{
    genus_upper_bound, search_singular_points, stated_singular_points, verify_singular_points,
    SearchBudget,
};
use shtuka_core::moduli::{
    build_gamma0_deg4, solve_system, Deg4Params, Deg4Shape, FormConvention, LinearSystem,
};
use shtuka_core::tate::{assemble_report, bad_places, KodairaType};
use shtuka_core::{Fe, FiniteField, RatFn, UPoly};

/// Criterion parts that cannot hold for the model as built.
const KNOWN_DEVIATIONS: &[&str] = &["2b", "5b", "best-effort"];

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn line(id: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome { id, pass, detail }
}

fn field_for(q: u64) -> FiniteField {
    let (p, k) = prime_power(q).unwrap();
    make_field(p as u64, k).unwrap()
}

fn spec(shape: &str, q: u64, p: &str, qv: &str) -> SurfaceSpec {
    SurfaceSpec::resolve(&BuildRequest {
        shape: shape.into(),
        q,
        p: Some(p.into()),
        q_val: Some(qv.into()),
        r: None,
    })
    .unwrap()
}

/// Runs `rows` of a table and checks each is PASS within `seconds`.
fn table_rows(id: u8, rows: &[u64], seconds: f64) -> (bool, String, ReproduceReport) {
    let opts = ReproduceOptions {
        rows: Some(rows.to_vec()),
        ..ReproduceOptions::default()
    };
    let mut parts = Vec::new();
    let mut ok = true;
    let mut last = None;
    for &q in rows {
        let t0 = Instant::now();
        let rep = reproduce(
            id,
            &ReproduceOptions {
                rows: Some(vec![q]),
                ..opts.clone()
            },
        )
        .unwrap();
        let dt = t0.elapsed().as_secs_f64();
        let row = rep.row(q).unwrap();
        let o = row.observed();
        let good = row.status == RowStatus::Pass && dt < seconds;
        ok &= good;
        parts.push(match (o, row.decisive()) {
            (Some(o), Some(t)) => format!(
                "q={q} {} b2={} rkT={} #BF={} [{}] at ({},{}) over {} in {dt:.2}s",
                row.status, o.b2, o.rank_t, o.bf, o.census, t.p, t.q_val, t.field
            ),
            _ => format!("q={q} {}", row.status),
        });
        last = Some(rep);
    }
    (ok, parts.join("; "), last.unwrap())
}

fn criterion_1() -> Outcome {
    let (ok, d, _) = table_rows(1, &[2, 3], 60.0);
    line("1", ok, d)
}

fn criterion_2() -> Vec<Outcome> {
    let (ok, d, _) = table_rows(2, &[2, 3], 120.0);
    // the q = 2 surface at the first default pair, searched up to degree 3
    let s = spec("2(0)+2(inf)", 2, "1", "[0,1]");
    let tf = s.build().unwrap();
    let t0 = Instant::now();
    let search = search_singular_points(&tf, 3, SearchBudget::default()).unwrap();
    let smooth = search.counts.iter().all(|&c| c == 0);
    let d2 = format!(
        "singular points over F_4, F_16, F_64: {:?}{} ({:.1}s)",
        search.counts,
        if search.non_isolated {
            ", non-isolated"
        } else {
            ""
        },
        t0.elapsed().as_secs_f64()
    );
    vec![line("2a", ok, d), line("2b", smooth, d2)]
}

fn criterion_3() -> Outcome {
    let (ok, d, _) = table_rows(3, &[3], 180.0);
    line("3", ok, d)
}

fn criterion_4() -> Vec<Outcome> {
    let (ok, d, _) = table_rows(4, &[3], 180.0);
    let s = spec("2(0)+(1)+(inf)", 3, "2", "\\alpha_9");
    let tf = s.build().unwrap();
    let pts = stated_singular_points(s.shape, 3, &s.field, s.p, s.q_val, None).unwrap();
    let rep = verify_singular_points(&tf, &s.field, &pts).unwrap();
    let n = rep.iter().filter(|r| r.is_singular).count();
    vec![
        line("4a", ok, d),
        line(
            "4b",
            n == 8,
            format!("{n}/8 stated points singular at (2, α_9)"),
        ),
    ]
}

fn criterion_5() -> Vec<Outcome> {
    let (ok, d, _) = table_rows(5, &[3], 180.0);
    let s = spec("sqfree", 3, "\\alpha_9", "\\alpha_9^2");
    let pts = stated_singular_points(s.shape, 3, &s.field, s.p, s.q_val, None).unwrap();
    let count = |conv: FormConvention| {
        let mut params = s.params();
        params.convention = conv;
        let tf = build_gamma0_deg4(&s.field, &params).unwrap();
        let rep = verify_singular_points(&tf, &s.field, &pts).unwrap();
        rep.iter().filter(|r| r.is_singular).count()
    };
    let (kernel, printed) = (
        count(FormConvention::Kernel),
        count(FormConvention::Printed),
    );
    vec![
        line("5a", ok, d),
        line(
            "5b",
            kernel == 8,
            format!(
                "{kernel}/8 stated points singular on the analyzed model ({printed}/8 with the printed sign convention)"
            ),
        ),
    ]
}

/// Rows whose surfaces are stated to have at most rational double points.
fn rdp_row(shape: &str, q: u64) -> bool {
    matches!(shape, "2(0)+(1)+(inf)" | "sqfree") || (shape == "2(0)+2(inf)" && q == 2)
}

fn criterion_6(reports: &[ReproduceReport]) -> Outcome {
    let mut ok = true;
    let mut bad = Vec::new();
    for q in 2..=11u32 {
        let a = genus_upper_bound(2, 2, q).unwrap();
        let b = genus_upper_bound(2, 2, q + 1).unwrap();
        if a != q as i64 || b != q as i64 + 1 {
            ok = false;
            bad.push(format!("bound q={q}: {a}, {b}"));
        }
    }
    let mut analyzed = 0;
    let mut equal = 0;
    for rep in reports {
        for row in &rep.rows {
            let Some(o) = row.observed() else { continue };
            analyzed += 1;
            let eq = o.pa == o.pa_bound;
            equal += eq as usize;
            if o.pa > o.pa_bound || eq != rdp_row(&row.shape, row.q) {
                ok = false;
                bad.push(format!(
                    "table {} q={}: pa={} bound={}",
                    row.table, row.q, o.pa, o.pa_bound
                ));
            }
        }
    }
    let mut d = format!(
        "bound (2,2,q)=q, (2,2,q+1)=q+1 for q=2..11; {analyzed} surfaces, pa ≤ bound, equality on the {equal} RDP rows"
    );
    if !bad.is_empty() {
        d = format!("{d}; violations: {}", bad.join(", "));
    }
    line("6", ok, d)
}

fn element(f: &FiniteField) -> impl Strategy<Value = Fe> + Clone {
    let f = f.clone();
    (0..f.order()).prop_map(move |r| f.from_raw(r))
}

fn run_property<S: Strategy>(
    name: &str,
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
    fails: &mut Vec<String>,
) {
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        rng_algorithm: proptest::test_runner::RngAlgorithm::ChaCha,
        rng_seed: proptest::test_runner::RngSeed::Fixed(0x5eed),
        ..Config::default()
    });
    if let Err(e) = runner.run(&strategy, test) {
        fails.push(format!("{name}: {e}"));
    }
}

fn criterion_7() -> Outcome {
    let mut fails = Vec::new();
    let qs = [2u64, 3, 4, 5, 7, 8, 9];
    let mut surfaces = 0usize;
    for &q in &qs {
        let f = field_for(q);
        let p = f.characteristic() as u64;
        let e = element(&f);

        run_property(
            &format!("field axioms F_{q}"),
            64,
            (e.clone(), e.clone(), e.clone()),
            |(a, b, c)| {
                prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                prop_assert_eq!(f.add(a, f.neg(a)), f.zero());
                if !a.is_zero() {
                    prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one());
                }
                prop_assert_eq!(
                    f.frobenius(f.add(a, b)),
                    f.add(f.frobenius(a), f.frobenius(b))
                );
                prop_assert_eq!(f.pow(a, f.order() as u64), a);
                Ok(())
            },
            &mut fails,
        );

        run_property(
            &format!("factorization F_{q}"),
            24,
            proptest::collection::vec(e.clone(), 2..10),
            |c| {
                let a = UPoly::new(&f, c);
                prop_assume!(!a.is_constant());
                let mut prod = UPoly::constant(&f, a.lc());
                for (g, m) in a.factor() {
                    prop_assert!(g.is_irreducible());
                    prop_assert_eq!(g.lc(), f.one());
                    prod = prod.mul(&g.pow(m as u64));
                }
                prop_assert_eq!(prod, a);
                Ok(())
            },
            &mut fails,
        );

        let fp = make_field(p, 1).unwrap();
        let emb = fp.embedding_into(&f).unwrap();
        for system in [
            LinearSystem::ZeroOneInf,
            LinearSystem::TwoZeroInf,
            LinearSystem::ThreeZero,
            LinearSystem::TwoZeroTwoInf,
        ] {
            let forms = solve_system(system, p).unwrap();
            let kernel: Vec<_> = forms
                .kernel_residuals()
                .iter()
                .map(|r| r.map(&emb))
                .collect();
            let level: Vec<_> = forms
                .level_residuals()
                .iter()
                .map(|r| r.map(&emb))
                .collect();
            let det = forms.det_residual().map(&emb);
            let n = forms.n().map(&emb);
            run_property(
                &format!("coefficient forms {system:?} F_{q}"),
                32,
                proptest::collection::vec(e.clone(), 7),
                |x| {
                    for r in kernel.iter().chain(&level) {
                        prop_assert!(r.eval(&x[..6]).is_zero());
                    }
                    prop_assert!(det.eval(&x).is_zero());
                    Ok(())
                },
                &mut fails,
            );
            if n.is_zero() {
                fails.push(format!("{system:?}: n vanishes identically"));
            }
        }

        // surfaces at random specializations, over a field with room for
        // P, Q, R off the support
        let sf = match q {
            2 => make_field(2, 4).unwrap(),
            3..=6 => make_field(p, 2 * f.degree()).unwrap(),
            _ => f.clone(),
        };
        let e = element(&sf);
        let shapes: Vec<Deg4Shape> = Deg4Shape::ALL
            .into_iter()
            .filter(|s| !(*s == Deg4Shape::Squarefree && q == 2))
            .collect();
        let shape_idx = 0..shapes.len();
        let analyzed = std::cell::Cell::new(0usize);
        run_property(
            &format!("surface invariants q={q}"),
            6,
            (shape_idx, e.clone(), e.clone(), e.clone()),
            |(si, pv, qv, rv)| {
                let params = Deg4Params {
                    shape: shapes[si],
                    q,
                    p_val: pv,
                    q_val: qv,
                    r_val: Some(rv),
                    convention: FormConvention::Kernel,
                };
                let Ok(tf) = build_gamma0_deg4(&sf, &params) else {
                    return Err(TestCaseError::reject("inadmissible"));
                };
                let Ok(gf) = generic_fiber(&tf, FiberOptions::default()) else {
                    return Err(TestCaseError::reject("degenerate fiber"));
                };
                let fibers =
                    bad_places(&gf.curve).map_err(|e| TestCaseError::fail(e.to_string()))?;
                let e: i64 = fibers
                    .iter()
                    .map(|x| x.ord_disc as i64 * x.degree as i64)
                    .sum();
                prop_assert!(e > 0 && e % 12 == 0, "e = {}", e);
                let rep = assemble_report(&fibers, Default::default())
                    .map_err(|e| TestCaseError::fail(e.to_string()))?;
                prop_assert_eq!(rep.e, 12 * rep.pa);
                prop_assert_eq!(rep.b2, rep.e - 2);
                let mut rank = 2i64;
                let mut count = 0u32;
                for c in &rep.closure_census {
                    let k = KodairaType::parse(&c.kind).unwrap();
                    rank += c.count as i64 * (k.components() as i64 - 1);
                    count += c.count;
                }
                prop_assert_eq!(rep.rank_t, rank);
                prop_assert_eq!(rep.bad_fibers, count);
                prop_assert!(rep.rank_t <= rep.b2);
                let [a, b, c] = tf.multidegree;
                prop_assert!(rep.pa <= genus_upper_bound(a, b, c).unwrap());
                analyzed.set(analyzed.get() + 1);
                Ok(())
            },
            &mut fails,
        );
        surfaces += analyzed.get();
    }
    let d = if fails.is_empty() {
        format!("field axioms, factorization, kernel/level/det identities, surface invariants over q ∈ {qs:?} ({surfaces} random surfaces)")
    } else {
        fails.join("; ")
    };
    line("7", fails.is_empty(), d)
}

fn legendre() -> WeierstrassCurve {
    let f = make_field(5, 1).unwrap();
    let z = RatFn::zero(&f);
    // y² = x(x - 1)(x - w)
    let a2 = RatFn::from_poly(UPoly::from_ints(&f, &[-1, -1]));
    let a4 = RatFn::var(&f);
    WeierstrassCurve::new(&f, [z.clone(), a2, z.clone(), a4, z]).unwrap()
}

fn criterion_8() -> Outcome {
    let e = legendre();
    let fibers = bad_places(&e).unwrap();
    let rep = assemble_report(&fibers, Default::default()).unwrap();
    let mut kinds: Vec<KodairaType> = fibers.iter().map(|x| x.kind).collect();
    kinds.sort();
    let leg_ok =
        kinds == [KodairaType::I(2), KodairaType::I(2), KodairaType::IStar(2)] && rep.e == 12;

    let f = make_field(7, 1).unwrap();
    let e1 = element(&f);
    let poly = proptest::collection::vec(e1, 2);
    let agreed = std::cell::Cell::new(0usize);
    let mut fails = Vec::new();
    run_property(
        "invariants vs point route",
        20,
        (
            proptest::collection::vec(poly.clone(), 4),
            proptest::collection::vec(poly.clone(), 3),
            poly,
        ),
        |(g, h, z0)| {
            let rf = |c: &Vec<Fe>| RatFn::from_poly(UPoly::new(&f, c.clone()));
            let h: [RatFn; 3] = std::array::from_fn(|i| rf(&h[i]));
            let z0 = rf(&z0);
            // force the point (u, z) = (0, z0)
            let g0 = z0.square().add(&h[0].mul(&z0));
            let g: [RatFn; 5] =
                std::array::from_fn(|i| if i == 0 { g0.clone() } else { rf(&g[i - 1]) });
            let qm = QuarticModel {
                field: f.clone(),
                h,
                g,
            };
            let Ok(inv) = quartic_invariants_curve(&f, &qm.completed_square()) else {
                return Err(TestCaseError::reject("singular quartic"));
            };
            let pt = find_rational_point(&qm, 1).ok_or_else(|| TestCaseError::fail("no point"))?;
            let pr = point_route(&qm, &pt).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(inv.j_invariant(), pr.j_invariant());
            agreed.set(agreed.get() + 1);
            Ok(())
        },
        &mut fails,
    );
    let n = agreed.get();
    let ok = leg_ok && fails.is_empty() && n == 20;
    let mut d = format!(
        "Legendre over F_5(w): {:?} with e={}; j agrees on {n}/20 char-7 quartics",
        kinds.iter().map(|k| k.to_string()).collect::<Vec<_>>(),
        rep.e
    );
    if !fails.is_empty() {
        d = format!("{d}; {}", fails.join("; "));
    }
    line("8", ok, d)
}

fn best_effort(reports: &[ReproduceReport]) -> Outcome {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut failed = Vec::new();
    for rep in reports {
        for row in &rep.rows {
            let char2_ext = row.table == "3.1" && row.q % 2 == 0;
            if row.q < 7 && !char2_ext {
                continue;
            }
            *counts.entry(row.status.to_string()).or_default() += 1;
            if row.status == RowStatus::Fail {
                let o = row.observed().map(|o| o.census.clone()).unwrap_or_default();
                failed.push(format!(
                    "table {} q={}: printed [{}], computed [{o}]",
                    row.table, row.q, row.expected.census
                ));
            }
        }
    }
    let mut d = format!("{counts:?}");
    if !failed.is_empty() {
        d = format!("{d}; {}", failed.join("; "));
    }
    line("best-effort", failed.is_empty(), d)
}

fn main() {
    let t0 = Instant::now();
    let mut out = vec![criterion_1()];
    out.extend(criterion_2());
    out.push(criterion_3());
    out.extend(criterion_4());
    out.extend(criterion_5());
    let opts = ReproduceOptions {
        trials: TrialSpec::default(),
        ..ReproduceOptions::default()
    };
    let reports: Vec<ReproduceReport> = (1..=5).map(|t| reproduce(t, &opts).unwrap()).collect();
    out.push(criterion_6(&reports));
    out.push(criterion_7());
    out.push(criterion_8());
    out.push(best_effort(&reports));

    let mut unexpected = 0;
    for o in &out {
        let status = if o.pass { "PASS" } else { "FAIL" };
        let known = !o.pass && KNOWN_DEVIATIONS.contains(&o.id);
        if !o.pass && !known {
            unexpected += 1;
        }
        let tag = if known { " [known deviation]" } else { "" };
        println!("criterion {:<11} {status}{tag}  {}", o.id, o.detail);
    }
    println!("acceptance finished in {:.1}s", t0.elapsed().as_secs_f64());
    if unexpected > 0 {
        println!("{unexpected} unexpected failure(s)");
        std::process::exit(1);
    }
}
