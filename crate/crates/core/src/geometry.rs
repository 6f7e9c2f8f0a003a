//! Arithmetic genus bound and Jacobian-criterion singularity checks for
//! hypersurfaces in P¹ × P¹ × P¹ (and quadrics in P³).

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{make_field, Fe, FieldError, FiniteField};
use crate::moduli::{Deg4Shape, TriForm};
use crate::poly::UPoly;
use crate::sparse::{var_list, PolyError, SparsePoly};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("multidegree entries must be at least 2")]
    DegreeTooSmall,
    #[error("({0}, {1}) is not a point of P¹")]
    NotProjective(String, String),
    #[error("search needs {needed} evaluations, budget is {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },
    #[error("coefficients must be specialized before searching")]
    Symbolic,
    #[error("{0}")]
    Field(#[from] FieldError),
    #[error("{0}")]
    Poly(#[from] PolyError),
}

/// `(d1-1)(d2-1)(d3-1) + 1`: the arithmetic genus of a hypersurface of
/// multidegree `(d1, d2, d3)` with at most rational double points, an
/// upper bound otherwise.
pub fn genus_upper_bound(d1: u32, d2: u32, d3: u32) -> Result<i64, GeometryError> {
    if d1 < 2 || d2 < 2 || d3 < 2 {
        return Err(GeometryError::DegreeTooSmall);
    }
    Ok((d1 as i64 - 1) * (d2 as i64 - 1) * (d3 as i64 - 1) + 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum A1Status {
    Certified,
    NotA1,
    NotTested,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingularPointReport {
    pub point: Vec<String>,
    pub is_on_surface: bool,
    pub is_singular: bool,
    pub a1: A1Status,
}

fn check_projective<T: Clone>(
    pt: &[T],
    is_zero: impl Fn(&T) -> bool,
    show: impl Fn(&T) -> String,
) -> Result<(), GeometryError> {
    for pair in pt.chunks(2) {
        if is_zero(&pair[0]) && is_zero(&pair[1]) {
            return Err(GeometryError::NotProjective(show(&pair[0]), show(&pair[1])));
        }
    }
    Ok(())
}

/// F and its six partials, with the projective variables last.
fn jacobian(tf: &TriForm) -> Vec<SparsePoly> {
    let o = tf.nparams();
    let mut v = vec![tf.poly.clone()];
    v.extend((0..6).map(|i| tf.poly.derivative(o + i)));
    v
}

/// Checks candidate points over `field` (containing the TriForm's
/// coefficient field). The TriForm must be specialized.
pub fn verify_singular_points(
    tf: &TriForm,
    field: &FiniteField,
    candidates: &[[Fe; 6]],
) -> Result<Vec<SingularPointReport>, GeometryError> {
    if tf.nparams() != 0 {
        return Err(GeometryError::Symbolic);
    }
    let emb = tf.field().embedding_into(field)?;
    let f = tf.poly.map(&emb);
    let jac: Vec<SparsePoly> = (0..6).map(|i| f.derivative(i)).collect();
    let mut out = Vec::new();
    for pt in candidates {
        check_projective(pt, |x| x.is_zero(), |x| field.display(*x))?;
        let on = f.eval(pt).is_zero();
        let sing = on && jac.iter().all(|d| d.eval(pt).is_zero());
        let a1 = if sing {
            a1_status(&f, field, pt)
        } else {
            A1Status::NotTested
        };
        out.push(SingularPointReport {
            point: pt.iter().map(|x| field.display(*x)).collect(),
            is_on_surface: on,
            is_singular: sing,
            a1,
        });
    }
    Ok(out)
}

/// Hessian of the dehomogenized equation in the affine chart through the
/// point; nondegenerate means an A₁ singularity. Not meaningful in
/// characteristic 2.
fn a1_status(f: &SparsePoly, field: &FiniteField, pt: &[Fe; 6]) -> A1Status {
    if field.characteristic() == 2 {
        return A1Status::NotTested;
    }
    let mut scaled = *pt;
    let mut local = [0usize; 3];
    for b in 0..3 {
        let (x0, x1) = (pt[2 * b], pt[2 * b + 1]);
        if !x1.is_zero() {
            scaled[2 * b] = field.div(x0, x1);
            scaled[2 * b + 1] = field.one();
            local[b] = 2 * b;
        } else {
            scaled[2 * b] = field.one();
            scaled[2 * b + 1] = field.zero();
            local[b] = 2 * b + 1;
        }
    }
    let mut h = [[Fe::ZERO; 3]; 3];
    for i in 0..3 {
        let di = f.derivative(local[i]);
        for j in i..3 {
            let v = di.derivative(local[j]).eval(&scaled);
            h[i][j] = v;
            h[j][i] = v;
        }
    }
    let det = det3(field, &h);
    if det.is_zero() {
        A1Status::NotA1
    } else {
        A1Status::Certified
    }
}

fn det3(f: &FiniteField, m: &[[Fe; 3]; 3]) -> Fe {
    let t = |a: Fe, b: Fe, c: Fe| f.mul(f.mul(a, b), c);
    let pos = f.add(
        f.add(t(m[0][0], m[1][1], m[2][2]), t(m[0][1], m[1][2], m[2][0])),
        t(m[0][2], m[1][0], m[2][1]),
    );
    let neg = f.add(
        f.add(t(m[0][2], m[1][1], m[2][0]), t(m[0][0], m[1][2], m[2][1])),
        t(m[0][1], m[1][0], m[2][2]),
    );
    f.sub(pos, neg)
}

/// Candidate points whose coordinates are polynomials in the parameters of
/// a symbolic TriForm (same variable list, parameters only). Checks that F
/// and every partial vanish identically. A₁ is not tested.
pub fn verify_singular_points_symbolic(
    tf: &TriForm,
    candidates: &[[SparsePoly; 6]],
) -> Result<Vec<SingularPointReport>, GeometryError> {
    let o = tf.nparams();
    let jac = jacobian(tf);
    let mut out = Vec::new();
    for pt in candidates {
        check_projective(pt, |x| x.is_zero(), |x| x.to_string())?;
        let subs: Vec<(usize, SparsePoly)> = pt
            .iter()
            .enumerate()
            .map(|(i, c)| (o + i, c.with_vars(tf.poly.vars()).unwrap()))
            .collect();
        let vals: Vec<SparsePoly> = jac.iter().map(|d| d.substitute(&subs)).collect();
        let on = vals[0].is_zero();
        out.push(SingularPointReport {
            point: pt.iter().map(|x| x.to_string()).collect(),
            is_on_surface: on,
            is_singular: on && vals[1..].iter().all(|v| v.is_zero()),
            a1: A1Status::NotTested,
        });
    }
    Ok(out)
}

/// A Galois orbit of singular points: representative over `F_{s^degree}`.
#[derive(Clone, Debug)]
pub struct SingularOrbit {
    pub point: [Fe; 6],
    pub field: FiniteField,
    pub degree: u32,
}

impl SingularOrbit {
    pub fn display(&self) -> Vec<String> {
        self.point.iter().map(|x| self.field.display(*x)).collect()
    }
}

#[derive(Clone, Debug)]
pub struct SingularSearch {
    pub orbits: Vec<SingularOrbit>,
    /// Number of singular points over `F_{s^j}`, for `j = 1..=max_ext`.
    pub counts: Vec<u64>,
    /// Some fiber `(u, v)` is singular along the whole `w`-line, or the
    /// point count grows like that of a curve.
    pub non_isolated: bool,
    pub max_ext: u32,
}

#[derive(Clone, Copy, Debug)]
pub struct SearchBudget {
    /// Maximum number of `(u, v)` pairs examined over all extensions.
    pub max_pairs: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_pairs: 3_000_000,
        }
    }
}

/// A polynomial with terms `c · u0^e0 u1^e1 v0^e2 v1^e3 · w0^e4 w1^e5`.
struct Compiled {
    terms: Vec<([u32; 6], Fe)>,
    wdeg: u32,
}

impl Compiled {
    fn new(p: &SparsePoly) -> Self {
        let terms: Vec<([u32; 6], Fe)> = p
            .terms()
            .map(|(m, &c)| {
                let mut e = [0u32; 6];
                e.copy_from_slice(&m.0);
                (e, c)
            })
            .collect();
        let wdeg = terms.iter().map(|(e, _)| e[4] + e[5]).max().unwrap_or(0);
        Compiled { terms, wdeg }
    }

    /// Polynomial in `w = w0` (chart `w1 = 1`) at fixed `(u, v)`.
    fn at_uv(&self, f: &FiniteField, uv: &[Fe; 4]) -> Vec<Fe> {
        let mut c = vec![Fe::ZERO; self.wdeg as usize + 1];
        for (e, k) in &self.terms {
            let mut t = *k;
            for i in 0..4 {
                if e[i] > 0 {
                    t = f.mul(t, f.pow(uv[i], e[i] as u64));
                }
            }
            c[e[4] as usize] = f.add(c[e[4] as usize], t);
        }
        c
    }
}

fn p1_points(f: &FiniteField) -> Vec<(Fe, Fe)> {
    let mut v: Vec<(Fe, Fe)> = f.elements().map(|x| (x, f.one())).collect();
    v.push((f.one(), f.zero()));
    v
}

fn normalize(f: &FiniteField, pt: &mut [Fe; 6]) {
    for b in 0..3 {
        let (x0, x1) = (pt[2 * b], pt[2 * b + 1]);
        if x1.is_zero() {
            pt[2 * b] = f.one();
        } else {
            pt[2 * b] = f.div(x0, x1);
            pt[2 * b + 1] = f.one();
        }
    }
}

/// Orbit under `x ↦ x^s`; returns (minimal representative, orbit size).
fn orbit(f: &FiniteField, pt: &[Fe; 6], s: u64) -> ([Fe; 6], u32) {
    let mut cur = *pt;
    let mut best = *pt;
    let mut n = 0;
    loop {
        for x in cur.iter_mut() {
            *x = f.pow(*x, s);
        }
        n += 1;
        if cur < best {
            best = cur;
        }
        if cur == *pt {
            return (best, n);
        }
    }
}

/// Exhaustive search of the singular locus over `F_{s^j}`, `j ≤ max_ext`,
/// where `F_s` is the TriForm's coefficient field.
pub fn search_singular_points(
    tf: &TriForm,
    max_ext: u32,
    budget: SearchBudget,
) -> Result<SingularSearch, GeometryError> {
    if tf.nparams() != 0 {
        return Err(GeometryError::Symbolic);
    }
    let base = tf.field().clone();
    let s = base.order() as u64;
    let p = base.characteristic() as u64;
    let mut needed = 0u64;
    for j in 1..=max_ext {
        let n = s.checked_pow(j).unwrap_or(u64::MAX).saturating_add(1);
        needed = needed.saturating_add(n.saturating_mul(n));
    }
    if needed > budget.max_pairs {
        return Err(GeometryError::BudgetExceeded {
            needed,
            budget: budget.max_pairs,
        });
    }
    let mut orbits = Vec::new();
    let mut counts = Vec::new();
    let mut non_isolated = false;
    for j in 1..=max_ext {
        let field = make_field(p, base.degree() * j)?;
        let emb = base.embedding_into(&field)?;
        let f = tf.poly.map(&emb);
        let polys: Vec<SparsePoly> = std::iter::once(f.clone())
            .chain((0..6).map(|i| f.derivative(i)))
            .collect();
        let compiled: Vec<Compiled> = polys.iter().map(Compiled::new).collect();
        let pts = p1_points(&field);
        let found: Vec<([Fe; 6], bool)> = pts
            .par_iter()
            .flat_map_iter(|&(u0, u1)| {
                let mut local = Vec::new();
                for &(v0, v1) in &pts {
                    let uv = [u0, u1, v0, v1];
                    let mut g = UPoly::zero(&field);
                    for c in &compiled {
                        g = g.gcd(&UPoly::new(&field, c.at_uv(&field, &uv)));
                        if g.is_one() {
                            break;
                        }
                    }
                    if g.is_zero() {
                        local.push(([u0, u1, v0, v1, field.one(), field.zero()], true));
                        continue;
                    }
                    for r in g.roots() {
                        local.push(([u0, u1, v0, v1, r, field.one()], false));
                    }
                    let pt = [u0, u1, v0, v1, field.one(), field.zero()];
                    if polys.iter().all(|q| q.eval(&pt).is_zero()) {
                        local.push((pt, false));
                    }
                }
                local
            })
            .collect();
        if found.iter().any(|(_, line)| *line) {
            non_isolated = true;
        }
        let mut set: BTreeSet<[Fe; 6]> = BTreeSet::new();
        for (mut pt, line) in found {
            if line {
                continue;
            }
            normalize(&field, &mut pt);
            set.insert(pt);
        }
        counts.push(set.len() as u64);
        let mut reps = BTreeSet::new();
        for pt in &set {
            let (rep, deg) = orbit(&field, pt, s);
            if deg == j {
                reps.insert(rep);
            }
        }
        for rep in reps {
            orbits.push(SingularOrbit {
                point: rep,
                field: field.clone(),
                degree: j,
            });
        }
        // a curve has about |F| points; an isolated set stabilizes
        let size = field.order() as u64;
        if j >= 2 && set.len() as u64 > size / 2 && set.len() as u64 > counts[0] {
            non_isolated = true;
        }
    }
    Ok(SingularSearch {
        orbits,
        counts,
        non_isolated,
        max_ext,
    })
}

/// Homogenizes an affine equation in three variables to a quadric (or
/// higher-degree surface) in P³ and searches for singular points over
/// `F_{s^j}`, `j ≤ max_ext`. True iff none found.
pub fn verify_smooth_projective_closure(
    affine: &SparsePoly,
    max_ext: u32,
    budget: SearchBudget,
) -> Result<bool, GeometryError> {
    let n = affine.nvars();
    let mut names: Vec<String> = affine.vars().iter().cloned().collect();
    names.push("h".into());
    let names_ref: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let vs = var_list(&names_ref);
    let lifted = affine.with_vars(&vs)?;
    let d = lifted.total_degree().max(0) as u32;
    let block: Vec<usize> = (0..n).collect();
    let hom = lifted.homogenize(&block, n, d);
    let base = affine.field().clone();
    let s = base.order() as u64;
    let mut needed = 0u64;
    for j in 1..=max_ext {
        needed = needed.saturating_add(s.saturating_pow(j * n as u32));
    }
    if needed > budget.max_pairs {
        return Err(GeometryError::BudgetExceeded {
            needed,
            budget: budget.max_pairs,
        });
    }
    for j in 1..=max_ext {
        let field = make_field(base.characteristic() as u64, base.degree() * j)?;
        let emb = base.embedding_into(&field)?;
        let f = hom.map(&emb);
        let polys: Vec<SparsePoly> = std::iter::once(f.clone())
            .chain((0..=n).map(|i| f.derivative(i)))
            .collect();
        let elems: Vec<Fe> = field.elements().collect();
        // points of P^n with last nonzero coordinate equal to 1
        for lead in (0..=n).rev() {
            let free = lead;
            let total = (elems.len() as u64).pow(free as u32);
            let hit = (0..total).into_par_iter().any(|mut idx| {
                let mut pt = vec![Fe::ZERO; n + 1];
                for c in pt.iter_mut().take(free) {
                    *c = elems[(idx % elems.len() as u64) as usize];
                    idx /= elems.len() as u64;
                }
                pt[lead] = field.one();
                polys.iter().all(|q| q.eval(&pt).is_zero())
            });
            if hit {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The candidate singular points stated for a shape, specialized at
/// `(P, Q)`; `alpha_q` is needed for the even squarefree list. `None` for
/// shapes without a stated list.
pub fn stated_singular_points(
    shape: Deg4Shape,
    q: u64,
    field: &FiniteField,
    p: Fe,
    qv: Fe,
    alpha_q: Option<Fe>,
) -> Option<Vec<[Fe; 6]>> {
    let f = field;
    let (o, z, m) = (f.one(), f.zero(), f.from_int(-1));
    let (add, sub, mul) = (|a, b| f.add(a, b), |a, b| f.sub(a, b), |a, b| f.mul(a, b));
    match shape {
        Deg4Shape::TwoZeroOneInf => Some(vec![
            [z, o, z, o, z, o],
            [p, o, p, o, o, o],
            [qv, o, qv, o, o, o],
            [p, o, qv, o, o, o],
            [z, o, z, o, o, z],
            [p, o, qv, o, o, z],
            [sub(qv, p), sub(qv, o), z, o, z, o],
            [z, o, sub(p, qv), sub(p, o), z, o],
        ]),
        Deg4Shape::Squarefree if q % 2 == 1 => Some(vec![
            [z, o, z, o, z, o],
            [z, o, z, o, m, o],
            [o, z, o, z, o, z],
            [o, z, o, z, m, o],
            [z, o, sub(p, qv), sub(p, o), z, o],
            [sub(qv, p), sub(qv, o), z, o, z, o],
            [sub(p, mul(p, qv)), sub(p, qv), o, z, o, z],
            [o, z, sub(qv, mul(qv, p)), sub(qv, p), o, z],
        ]),
        Deg4Shape::Squarefree => {
            let a = alpha_q?;
            Some(vec![
                [z, o, z, o, z, o],
                [o, o, o, o, o, o],
                [p, qv, o, o, o, o],
                [o, o, qv, p, o, o],
                [qv, a, qv, a, o, a],
                [p, a, qv, a, o, a],
                [p, a, p, a, o, a],
                [z, o, add(p, qv), add(p, a), z, o],
                [add(p, qv), add(qv, a), z, o, z, o],
                [o, z, o, z, o, z],
                [
                    add(mul(a, p), mul(p, qv)),
                    add(mul(a, p), mul(a, qv)),
                    o,
                    z,
                    o,
                    z,
                ],
                [
                    o,
                    z,
                    add(mul(a, qv), mul(qv, p)),
                    add(mul(a, p), mul(a, qv)),
                    o,
                    z,
                ],
            ])
        }
        _ => None,
    }
}
