use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shtuka_core::fibration::{
    fiber_point_count, fiber_quadratic_in_v, find_rational_point, generic_fiber, point_route,
    quartic_invariants_curve, FiberOptions, QuarticModel,
};
use shtuka_core::field::{alpha, make_field};
use shtuka_core::moduli::{build_gamma0_deg4, Deg4Params, Deg4Shape, FormConvention};
use shtuka_core::{FiniteField, RatFn, UPoly};

fn random_rf(f: &FiniteField, rng: &mut ChaCha8Rng, deg: usize) -> RatFn {
    let c = (0..=deg).map(|_| f.random(rng)).collect();
    RatFn::from_poly(UPoly::new(f, c))
}

#[test]
fn routes_agree_on_j_in_characteristic_seven() {
    let f = make_field(7, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut done = 0;
    while done < 20 {
        let mut g: [RatFn; 5] = std::array::from_fn(|_| random_rf(&f, &mut rng, 1));
        let h: [RatFn; 3] = std::array::from_fn(|_| {
            if rng.gen_bool(0.5) {
                random_rf(&f, &mut rng, 1)
            } else {
                RatFn::zero(&f)
            }
        });
        // force a point over u = 0
        let z0 = random_rf(&f, &mut rng, 1);
        g[0] = z0.square().add(&h[0].mul(&z0));
        let qm = QuarticModel {
            field: f.clone(),
            h,
            g,
        };
        let Ok(inv) = quartic_invariants_curve(&f, &qm.completed_square()) else {
            continue;
        };
        let pt = find_rational_point(&qm, 1).expect("point over u = 0");
        let pr = point_route(&qm, &pt).unwrap();
        assert_eq!(inv.j_invariant(), pr.j_invariant(), "{qm:?}");
        done += 1;
    }
}

fn check_point_counts(field: &FiniteField, params: &Deg4Params, opts: FiberOptions) -> usize {
    let tf = build_gamma0_deg4(field, params).unwrap();
    let fb = fiber_quadratic_in_v(&tf).unwrap();
    let gf = generic_fiber(&tf, opts).unwrap();
    let mut checked = 0;
    for w0 in field.elements() {
        let Some((n, smooth)) = fiber_point_count(&fb, w0) else {
            continue;
        };
        if !smooth {
            continue;
        }
        let Some(ne) = gf.curve.count_points_at(w0) else {
            continue;
        };
        assert_eq!(n, ne, "{:?} at w = {}", params.shape, field.display(w0));
        checked += 1;
        if checked == 6 {
            break;
        }
    }
    checked
}

fn params(field: &FiniteField, shape: Deg4Shape, q: u64, p: u32, qq: u32) -> Deg4Params {
    Deg4Params {
        shape,
        q,
        p_val: field.from_raw(p),
        q_val: field.from_raw(qq),
        r_val: None,
        convention: FormConvention::Kernel,
    }
}

#[test]
fn point_counts_match_fibers_odd() {
    // exponents of P, Q, R in a primitive element; F_7 has no room for R
    for (p, k, q, pe, qe, re) in [
        (3u64, 2u32, 3u64, 1, 2, Some(3)),
        (5, 2, 5, 1, 3, Some(2)),
        (7, 1, 7, 1, 2, None),
    ] {
        let f = make_field(p, k).unwrap();
        let g = f.primitive_element();
        // over F_7 every rational fiber of some shapes is singular
        let mut total = 0;
        for shape in Deg4Shape::ALL {
            let mut prm = params(&f, shape, q, f.pow(g, pe).raw(), f.pow(g, qe).raw());
            if shape == Deg4Shape::ZeroOneInfR {
                let Some(r) = re else { continue };
                prm.r_val = Some(f.pow(g, r));
            }
            let tf = build_gamma0_deg4(&f, &prm).unwrap();
            if fiber_quadratic_in_v(&tf).is_err() {
                continue;
            }
            for prefer_point in [false, true] {
                if prefer_point && p >= 5 && shape != Deg4Shape::Squarefree {
                    continue;
                }
                let opts = FiberOptions {
                    deg_bound: 2,
                    prefer_point,
                };
                total += check_point_counts(&f, &prm, opts);
            }
        }
        assert!(total > 0, "no good fibers checked over {f}");
    }
}

#[test]
fn point_counts_match_fibers_even() {
    let f = make_field(2, 4).unwrap();
    let a = alpha(4, &f).unwrap();
    for shape in Deg4Shape::ALL {
        let mut prm = params(&f, shape, 2, f.gen().raw(), f.pow(f.gen(), 7).raw());
        if shape == Deg4Shape::Squarefree {
            prm.q = 4;
        }
        if shape == Deg4Shape::ZeroOneInfR {
            prm.r_val = Some(a);
        }
        let Ok(tf) = build_gamma0_deg4(&f, &prm) else {
            continue;
        };
        if fiber_quadratic_in_v(&tf).is_err() {
            continue;
        }
        let n = check_point_counts(&f, &prm, FiberOptions::default());
        assert!(n > 0, "{shape:?}: no good fibers checked");
    }
}
