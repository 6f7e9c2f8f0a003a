//! The elliptic fibration of a degree-4 Γ₀ surface over the w-line: the
//! generic fiber as a (2,2)-curve over `K = F_s(w)`, its double-cover
//! quartic model, and a Weierstrass model.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Fe, FiniteField};
use crate::moduli::TriForm;
use crate::poly::{RatFn, UPoly};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FibrationError {
    #[error("the equation does not depend on v or u quadratically")]
    Degenerate,
    #[error("coefficients must be specialized first")]
    Symbolic,
    #[error("the Weierstrass model has zero discriminant")]
    SingularCurve,
    #[error("no rational point found up to degree {0} and characteristic is below 5")]
    NoPointFound(u32),
    #[error("the point is singular on the quartic model")]
    SingularPoint,
    #[error("linear relation among the Riemann-Roch basis not unique")]
    Relation,
}

/// `F = Σ grid[i][j] u^i v^j` on the chart `u1 = v1 = w1 = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct BiquadraticFiber {
    pub field: FiniteField,
    pub grid: [[RatFn; 3]; 3],
    /// `u` and `v` exchanged relative to the TriForm.
    pub transposed: bool,
}

impl BiquadraticFiber {
    pub fn from_grid(field: &FiniteField, grid: [[RatFn; 3]; 3]) -> Self {
        BiquadraticFiber {
            field: field.clone(),
            grid,
            transposed: false,
        }
    }

    /// Coefficients of `v^j` as polynomials in `u` (index = power of `u`).
    pub fn v_coeff(&self, j: usize) -> [RatFn; 3] {
        [
            self.grid[0][j].clone(),
            self.grid[1][j].clone(),
            self.grid[2][j].clone(),
        ]
    }

    pub fn a(&self) -> [RatFn; 3] {
        self.v_coeff(2)
    }

    pub fn b(&self) -> [RatFn; 3] {
        self.v_coeff(1)
    }

    pub fn c(&self) -> [RatFn; 3] {
        self.v_coeff(0)
    }

    pub fn transpose(&self) -> Self {
        let g = &self.grid;
        let grid = std::array::from_fn(|i| std::array::from_fn(|j| g[j][i].clone()));
        BiquadraticFiber {
            field: self.field.clone(),
            grid,
            transposed: !self.transposed,
        }
    }

    /// `F(u, v)` at values of `K`.
    pub fn eval(&self, u: &RatFn, v: &RatFn) -> RatFn {
        let mut acc = RatFn::zero(&self.field);
        let mut ui = RatFn::one(&self.field);
        for i in 0..3 {
            let mut vj = RatFn::one(&self.field);
            for j in 0..3 {
                acc = acc.add(&self.grid[i][j].mul(&ui).mul(&vj));
                vj = vj.mul(v);
            }
            ui = ui.mul(u);
        }
        acc
    }

    /// Specializes `w` to a field value; `None` where a coefficient has a
    /// pole.
    pub fn at(&self, w: Fe) -> Option<[[Fe; 3]; 3]> {
        let mut out = [[Fe::ZERO; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = self.grid[i][j].eval(w)?;
            }
        }
        Some(out)
    }
}

/// Collects the TriForm on the chart `u1 = v1 = w1 = 1` as a quadratic in
/// `v` with coefficients in `F_s[w][u]`.
pub fn fiber_quadratic_in_v(tf: &TriForm) -> Result<BiquadraticFiber, FibrationError> {
    if tf.nparams() != 0 {
        return Err(FibrationError::Symbolic);
    }
    let f = tf.field().clone();
    let wdeg = tf.multidegree[2] as usize;
    let mut coeffs = vec![vec![vec![Fe::ZERO; wdeg + 1]; 3]; 3];
    for (m, &c) in tf.poly.terms() {
        let e = &m.0;
        let (i, j, k) = (e[0] as usize, e[2] as usize, e[4] as usize);
        coeffs[i][j][k] = f.add(coeffs[i][j][k], c);
    }
    let grid = std::array::from_fn(|i| {
        std::array::from_fn(|j| RatFn::from_poly(UPoly::new(&f, coeffs[i][j].clone())))
    });
    let fb = BiquadraticFiber::from_grid(&f, grid);
    let all_zero = |j: usize| fb.v_coeff(j).iter().all(|x| x.is_zero());
    if all_zero(2) && all_zero(1) {
        return Err(FibrationError::Degenerate);
    }
    Ok(fb)
}

/// `z² + h(u) z = g(u)`, `h` of degree ≤ 2 and `g` of degree ≤ 4 in `u`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuarticModel {
    pub field: FiniteField,
    pub h: [RatFn; 3],
    pub g: [RatFn; 5],
}

fn poly_eval(c: &[RatFn], x: &RatFn) -> RatFn {
    let mut acc = RatFn::zero(x.field());
    for a in c.iter().rev() {
        acc = acc.mul(x).add(a);
    }
    acc
}

fn poly_mul(a: &[RatFn], b: &[RatFn], field: &FiniteField) -> Vec<RatFn> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![RatFn::zero(field); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].add(&x.mul(y));
        }
    }
    out
}

fn poly_add(a: &[RatFn], b: &[RatFn], field: &FiniteField) -> Vec<RatFn> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_else(|| RatFn::zero(field));
            let y = b.get(i).cloned().unwrap_or_else(|| RatFn::zero(field));
            x.add(&y)
        })
        .collect()
}

/// `p(u + t)` for a coefficient list `p`.
fn poly_shift(p: &[RatFn], t: &RatFn, field: &FiniteField) -> Vec<RatFn> {
    let mut out: Vec<RatFn> = Vec::new();
    let lin = [t.clone(), RatFn::one(field)];
    for a in p.iter().rev() {
        out = poly_mul(&out, &lin, field);
        out = poly_add(&out, std::slice::from_ref(a), field);
    }
    out.resize(p.len(), RatFn::zero(field));
    out
}

impl QuarticModel {
    pub fn eval(&self, u: &RatFn) -> (RatFn, RatFn) {
        (poly_eval(&self.h, u), poly_eval(&self.g, u))
    }

    /// The model after `u ↦ 1/u`, `z ↦ z/u²`.
    pub fn reversed(&self) -> QuarticModel {
        let h = std::array::from_fn(|i| self.h[2 - i].clone());
        let g = std::array::from_fn(|i| self.g[4 - i].clone());
        QuarticModel {
            field: self.field.clone(),
            h,
            g,
        }
    }

    /// The model after `u ↦ u + t`, `z ↦ z + z0`.
    pub fn translated(&self, t: &RatFn, z0: &RatFn) -> QuarticModel {
        let f = &self.field;
        let hs = poly_shift(&self.h, t, f);
        let gs = poly_shift(&self.g, t, f);
        // (z + z0)² + h (z + z0) = g
        let two = RatFn::from_int(f, 2);
        let mut h: [RatFn; 3] = std::array::from_fn(|i| hs[i].clone());
        h[0] = h[0].add(&two.mul(z0));
        let mut g: [RatFn; 5] = std::array::from_fn(|i| gs[i].clone());
        for (i, hi) in hs.iter().enumerate() {
            g[i] = g[i].sub(&hi.mul(z0));
        }
        g[0] = g[0].sub(&z0.square());
        QuarticModel {
            field: f.clone(),
            h,
            g,
        }
    }

    /// Characteristic ≠ 2: `h² + 4g`, the quartic of the completed square.
    pub fn completed_square(&self) -> [RatFn; 5] {
        let f = &self.field;
        let h2 = poly_mul(&self.h, &self.h, f);
        let four = RatFn::from_int(f, 4);
        std::array::from_fn(|i| h2[i].add(&four.mul(&self.g[i])))
    }
}

/// `z = A v` turns `A v² + B v + C = 0` into `z² + B z = -AC`.
pub fn eliminate_v(fb: &BiquadraticFiber) -> Result<QuarticModel, FibrationError> {
    let fb = if fb.a().iter().all(|x| x.is_zero()) {
        let t = fb.transpose();
        if t.a().iter().all(|x| x.is_zero()) {
            return Err(FibrationError::Degenerate);
        }
        t
    } else {
        fb.clone()
    };
    let f = &fb.field;
    let ac = poly_mul(&fb.a(), &fb.c(), f);
    Ok(QuarticModel {
        field: f.clone(),
        h: fb.b(),
        g: std::array::from_fn(|i| ac[i].neg()),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PointU {
    Finite(String),
    Infinity,
}

/// A point of the quartic model over `K`; at `u = ∞`, `z` is the value of
/// `z / u²`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuarticPoint {
    pub u: Option<RatFn>,
    pub z: RatFn,
}

impl QuarticPoint {
    pub fn describe(&self) -> (PointU, String) {
        let u = match &self.u {
            Some(u) => PointU::Finite(u.to_string_var("w")),
            None => PointU::Infinity,
        };
        (u, self.z.to_string_var("w"))
    }
}

/// Solutions `z ∈ K` of `z² + h z = g`.
pub fn solve_quadratic(h: &RatFn, g: &RatFn) -> Vec<RatFn> {
    let f = h.field();
    if f.characteristic() != 2 {
        let d = h.square().add(&g.scale(f.from_int(4)));
        let Some(s) = d.sqrt() else { return Vec::new() };
        let half = f.inv(f.from_int(2)).unwrap();
        let z1 = h.neg().add(&s).scale(half);
        let z2 = h.neg().sub(&s).scale(half);
        if z1 == z2 {
            return vec![z1];
        }
        return vec![z1, z2];
    }
    if h.is_zero() {
        return g.sqrt().into_iter().collect();
    }
    // z = h t, t² + t = g / h²
    let c = g.div(&h.square());
    match artin_schreier(&c) {
        Some(t) => {
            let z1 = h.mul(&t);
            let z2 = z1.add(h);
            vec![z1, z2]
        }
        None => Vec::new(),
    }
}

/// Solves `t² + t = c` in `F_{2^k}(w)`.
pub fn artin_schreier(c: &RatFn) -> Option<RatFn> {
    let f = c.field().clone();
    assert_eq!(f.characteristic(), 2);
    if c.is_zero() {
        return Some(RatFn::zero(&f));
    }
    // t = N/D in lowest terms forces D² = den(c), N² + N D = num(c)
    let d = c.den().sqrt()?;
    let rn = c.num();
    let k = f.degree() as usize;
    let nb = (d.deg().max(0) as usize).max((rn.deg().max(0) as usize).div_ceil(2));
    let ncoef = nb + 1;
    let out_deg = (2 * nb)
        .max(nb + d.deg().max(0) as usize)
        .max(rn.deg().max(0) as usize);
    let rows = k * (out_deg + 1);
    let cols = k * ncoef;
    let bits = |x: Fe| -> Vec<bool> { (0..k).map(|b| (x.raw() >> b) & 1 == 1).collect() };
    // matrix columns: images of β_b w^i
    let mut mat = vec![vec![false; cols + 1]; rows];
    for i in 0..ncoef {
        for b in 0..k {
            let beta = f.from_raw(1 << b);
            let n = UPoly::new(&f, {
                let mut v = vec![Fe::ZERO; i + 1];
                v[i] = beta;
                v
            });
            let img = n.square().add(&n.mul(&d));
            for (deg, &cf) in img.coeffs().iter().enumerate() {
                for (bb, bit) in bits(cf).into_iter().enumerate() {
                    if bit {
                        mat[deg * k + bb][i * k + b] = true;
                    }
                }
            }
        }
    }
    for (deg, &cf) in rn.coeffs().iter().enumerate() {
        for (bb, bit) in bits(cf).into_iter().enumerate() {
            mat[deg * k + bb][cols] = bit;
        }
    }
    let sol = gf2_solve(mat, cols)?;
    let mut nc = vec![Fe::ZERO; ncoef];
    for i in 0..ncoef {
        let mut raw = 0u32;
        for b in 0..k {
            if sol[i * k + b] {
                raw |= 1 << b;
            }
        }
        nc[i] = f.from_raw(raw);
    }
    let t = RatFn::new(UPoly::new(&f, nc), d);
    debug_assert_eq!(t.square().add(&t), *c);
    Some(t)
}

/// Solves an augmented system over `F_2`; returns one solution.
fn gf2_solve(mut m: Vec<Vec<bool>>, cols: usize) -> Option<Vec<bool>> {
    let rows = m.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| m[i][c]) else {
            continue;
        };
        m.swap(r, p);
        for i in 0..rows {
            if i != r && m[i][c] {
                for j in c..=cols {
                    let v = m[r][j];
                    m[i][j] ^= v;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    if m[r..].iter().any(|row| row[cols]) {
        return None;
    }
    let mut x = vec![false; cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = m[i][cols];
    }
    Some(x)
}

fn is_smooth_at_origin(qm: &QuarticModel) -> bool {
    // ∂/∂z = 2z + h = h(0), ∂/∂u = h'(0) z - g'(0) = -g1 at (0,0)
    !qm.h[0].is_zero() || !qm.g[1].is_zero()
}

/// Moves a point to `(u, z) = (0, 0)`.
fn centered(qm: &QuarticModel, pt: &QuarticPoint) -> QuarticModel {
    let f = &qm.field;
    match &pt.u {
        Some(u) => qm.translated(u, &pt.z),
        None => qm.reversed().translated(&RatFn::zero(f), &pt.z),
    }
}

/// Candidate `u` values in search order.
fn candidates(field: &FiniteField, deg_bound: u32, limit: usize) -> Vec<Option<RatFn>> {
    let mut out: Vec<Option<RatFn>> = Vec::new();
    let elems: Vec<Fe> = field.elements().collect();
    let s = elems.len();
    for &a in &elems {
        out.push(Some(RatFn::constant(field, a)));
    }
    let polys_of_degree = |d: u32, monic: bool, out: &mut Vec<UPoly>, cap: usize| {
        // coefficients enumerated in mixed radix; leading coefficient nonzero
        let total = (s as u128).pow(d);
        let leads: Vec<Fe> = if monic {
            vec![field.one()]
        } else {
            elems[1..].to_vec()
        };
        for &lead in &leads {
            let mut idx: u128 = 0;
            while idx < total {
                if out.len() >= cap {
                    return;
                }
                let mut c = Vec::with_capacity(d as usize + 1);
                let mut t = idx;
                for _ in 0..d {
                    c.push(elems[(t % s as u128) as usize]);
                    t /= s as u128;
                }
                c.push(lead);
                out.push(UPoly::new(field, c));
                idx += 1;
            }
        }
    };
    for d in 1..=deg_bound {
        let mut ps = Vec::new();
        polys_of_degree(d, false, &mut ps, limit.saturating_sub(out.len()));
        out.extend(ps.into_iter().map(|p| Some(RatFn::from_poly(p))));
    }
    out.push(None);
    // ratios n/m with m monic of degree 1..=deg_bound, deg n ≤ deg_bound
    for dm in 1..=deg_bound {
        let mut dens = Vec::new();
        polys_of_degree(dm, true, &mut dens, limit);
        for m in dens {
            for dn in 0..=deg_bound {
                let mut nums = Vec::new();
                if dn == 0 {
                    nums.extend(elems[1..].iter().map(|&a| UPoly::constant(field, a)));
                } else {
                    polys_of_degree(dn, false, &mut nums, limit);
                }
                for n in nums {
                    if out.len() >= limit {
                        return out;
                    }
                    if n.gcd(&m).deg() == 0 {
                        out.push(Some(RatFn::new(n, m.clone())));
                    }
                }
            }
        }
    }
    out
}

/// Maximum number of candidate `u` values tried.
pub const POINT_SEARCH_LIMIT: usize = 20_000;

/// First smooth point in the deterministic order: constants, polynomials
/// of increasing degree, `∞`, then ratios.
pub fn find_rational_point(qm: &QuarticModel, deg_bound: u32) -> Option<QuarticPoint> {
    for u in candidates(&qm.field, deg_bound, POINT_SEARCH_LIMIT) {
        let (h, g) = match &u {
            Some(u) => qm.eval(u),
            None => (qm.h[2].clone(), qm.g[4].clone()),
        };
        for z in solve_quadratic(&h, &g) {
            let pt = QuarticPoint { u: u.clone(), z };
            if is_smooth_at_origin(&centered(qm, &pt)) {
                return Some(pt);
            }
        }
    }
    None
}

/// `y² + a1 xy + a3 y = x³ + a2 x² + a4 x + a6` over `F_s(w)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeierstrassCurve {
    pub field: FiniteField,
    /// `[a1, a2, a3, a4, a6]`
    pub a: [RatFn; 5],
    pub b2: RatFn,
    pub b4: RatFn,
    pub b6: RatFn,
    pub b8: RatFn,
    pub c4: RatFn,
    pub c6: RatFn,
    pub disc: RatFn,
}

impl WeierstrassCurve {
    pub fn new(field: &FiniteField, a: [RatFn; 5]) -> Result<Self, FibrationError> {
        let f = field;
        let n = |k: i64| RatFn::from_int(f, k);
        let [a1, a2, a3, a4, a6] = a.clone();
        let b2 = a1.square().add(&n(4).mul(&a2));
        let b4 = n(2).mul(&a4).add(&a1.mul(&a3));
        let b6 = a3.square().add(&n(4).mul(&a6));
        let b8 = a1
            .square()
            .mul(&a6)
            .add(&n(4).mul(&a2).mul(&a6))
            .sub(&a1.mul(&a3).mul(&a4))
            .add(&a2.mul(&a3.square()))
            .sub(&a4.square());
        let c4 = b2.square().sub(&n(24).mul(&b4));
        let c6 = b2
            .pow(3)
            .neg()
            .add(&n(36).mul(&b2).mul(&b4))
            .sub(&n(216).mul(&b6));
        let disc = b2
            .square()
            .mul(&b8)
            .neg()
            .sub(&n(8).mul(&b4.pow(3)))
            .sub(&n(27).mul(&b6.square()))
            .add(&n(9).mul(&b2).mul(&b4).mul(&b6));
        if disc.is_zero() {
            return Err(FibrationError::SingularCurve);
        }
        Ok(WeierstrassCurve {
            field: f.clone(),
            a,
            b2,
            b4,
            b6,
            b8,
            c4,
            c6,
            disc,
        })
    }

    pub fn from_ints(field: &FiniteField, a: [i64; 5]) -> Result<Self, FibrationError> {
        Self::new(field, a.map(|x| RatFn::from_int(field, x)))
    }

    pub fn j_invariant(&self) -> RatFn {
        self.c4.pow(3).div(&self.disc)
    }

    /// Affine points plus the point at infinity of the reduction at `w0`;
    /// `None` if a coefficient has a pole or the reduction is singular.
    pub fn count_points_at(&self, w0: Fe) -> Option<u64> {
        let f = &self.field;
        if self.disc.eval(w0)?.is_zero() {
            return None;
        }
        let a: Vec<Fe> = self.a.iter().map(|x| x.eval(w0)).collect::<Option<_>>()?;
        let mut n = 1u64;
        for x in f.elements() {
            let lin = f.add(f.mul(a[0], x), a[2]);
            let rhs = f.add(
                f.add(f.mul(f.mul(x, x), f.add(x, a[1])), f.mul(a[3], x)),
                a[4],
            );
            for y in f.elements() {
                if f.add(f.mul(y, y), f.mul(lin, y)) == rhs {
                    n += 1;
                }
            }
        }
        Some(n)
    }

    pub fn a_strings(&self) -> Vec<String> {
        self.a.iter().map(|x| x.to_string_var("w")).collect()
    }
}

/// The Jacobian of `y² = q(u)` for a quartic `q` (characteristic ≥ 5):
/// `Y² = X³ - 27 I X - 27 J`.
pub fn quartic_invariants_curve(
    field: &FiniteField,
    q: &[RatFn; 5],
) -> Result<WeierstrassCurve, FibrationError> {
    let f = field;
    let n = |k: i64| RatFn::from_int(f, k);
    let (e, d, c, b, a) = (&q[0], &q[1], &q[2], &q[3], &q[4]);
    let i = n(12)
        .mul(a)
        .mul(e)
        .sub(&n(3).mul(b).mul(d))
        .add(&c.square());
    let j = n(72)
        .mul(a)
        .mul(c)
        .mul(e)
        .add(&n(9).mul(b).mul(c).mul(d))
        .sub(&n(27).mul(a).mul(&d.square()))
        .sub(&n(27).mul(e).mul(&b.square()))
        .sub(&n(2).mul(&c.pow(3)));
    let zero = RatFn::zero(f);
    WeierstrassCurve::new(
        f,
        [
            zero.clone(),
            zero.clone(),
            zero,
            n(-27).mul(&i),
            n(-27).mul(&j),
        ],
    )
}

/// Element `p(x) + q(x) Y` of the function field of
/// `Y² + H(x) Y = G(x)`.
#[derive(Clone, Debug)]
struct FnElt {
    p: Vec<RatFn>,
    q: Vec<RatFn>,
}

struct FnField<'a> {
    field: &'a FiniteField,
    hh: Vec<RatFn>,
    gg: Vec<RatFn>,
}

impl FnField<'_> {
    fn mul(&self, a: &FnElt, b: &FnElt) -> FnElt {
        let f = self.field;
        let pp = poly_mul(&a.p, &b.p, f);
        let qq = poly_mul(&a.q, &b.q, f);
        let cross = poly_add(&poly_mul(&a.p, &b.q, f), &poly_mul(&a.q, &b.p, f), f);
        // Y² = G - H Y
        let p = poly_add(&pp, &poly_mul(&qq, &self.gg, f), f);
        let neg_qh: Vec<RatFn> = poly_mul(&qq, &self.hh, f).iter().map(|x| x.neg()).collect();
        let q = poly_add(&cross, &neg_qh, f);
        FnElt { p, q }
    }
}

/// Kernel vector of a matrix over `K` when the kernel is one-dimensional.
fn nullvector(mut m: Vec<Vec<RatFn>>, cols: usize, field: &FiniteField) -> Option<Vec<RatFn>> {
    let rows = m.len();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].inv().unwrap();
        for j in c..cols {
            m[r][j] = m[r][j].mul(&inv);
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let factor = m[i][c].clone();
                for j in c..cols {
                    let t = factor.mul(&m[r][j]);
                    m[i][j] = m[i][j].sub(&t);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    if free.len() != 1 {
        return None;
    }
    let fc = free[0];
    let mut x = vec![RatFn::zero(field); cols];
    x[fc] = RatFn::one(field);
    for (i, &pc) in pivots.iter().enumerate() {
        x[pc] = m[i][fc].neg();
    }
    Some(x)
}

/// Weierstrass model from a smooth point, any characteristic.
pub fn point_route(
    qm: &QuarticModel,
    pt: &QuarticPoint,
) -> Result<WeierstrassCurve, FibrationError> {
    let f = &qm.field;
    let c = centered(qm, pt);
    if !is_smooth_at_origin(&c) {
        return Err(FibrationError::SingularPoint);
    }
    // u = 1/x, z = Y/x²: Y² + (l x² + m x + n) Y = b x³ + c x² + d x + e
    let (l, m, n) = (c.h[0].clone(), c.h[1].clone(), c.h[2].clone());
    let (b, cc, d, e) = (
        c.g[1].clone(),
        c.g[2].clone(),
        c.g[3].clone(),
        c.g[4].clone(),
    );
    if l.is_zero() {
        let a = [m, cc, n.mul(&b), b.mul(&d), b.square().mul(&e)];
        return WeierstrassCurve::new(f, a);
    }
    let zero = RatFn::zero(f);
    let one = RatFn::one(f);
    let ff = FnField {
        field: f,
        hh: vec![n.clone(), m.clone(), l.clone()],
        gg: vec![e.clone(), d.clone(), cc.clone(), b.clone()],
    };
    // X has a double pole at the point at infinity with Y ~ (b/l) x and is
    // regular at the other; ξ is its value there
    let s = m.add(&b.div(&l));
    let xx = FnElt {
        p: vec![n.clone(), s, l.clone()],
        q: vec![one.clone()],
    };
    let xi = m
        .mul(&b)
        .mul(&l)
        .add(&b.square())
        .sub(&cc.mul(&l.square()))
        .div(&l.pow(3));
    let x_minus = FnElt {
        p: vec![n.sub(&xi), xx.p[1].clone(), l.clone()],
        q: vec![one.clone()],
    };
    let y2 = FnElt {
        p: poly_mul(&x_minus.p, &[zero.clone(), one.clone()], f),
        q: vec![zero.clone(), one.clone()],
    };
    let unit = FnElt {
        p: vec![one.clone()],
        q: vec![],
    };
    let x2 = ff.mul(&xx, &xx);
    let basis = [
        ff.mul(&y2, &y2),
        ff.mul(&xx, &y2),
        y2.clone(),
        ff.mul(&x2, &xx),
        x2,
        xx,
        unit,
    ];
    let plen = basis.iter().map(|v| v.p.len()).max().unwrap();
    let qlen = basis.iter().map(|v| v.q.len()).max().unwrap();
    let mut rows = Vec::new();
    for i in 0..plen {
        rows.push(
            basis
                .iter()
                .map(|v| v.p.get(i).cloned().unwrap_or_else(|| zero.clone()))
                .collect(),
        );
    }
    for i in 0..qlen {
        rows.push(
            basis
                .iter()
                .map(|v| v.q.get(i).cloned().unwrap_or_else(|| zero.clone()))
                .collect(),
        );
    }
    let k = nullvector(rows, 7, f).ok_or(FibrationError::Relation)?;
    // α Y2² + β X Y2 + γ Y2 = δ X³ + ε X² + ζ X + η
    let (al, be, ga) = (&k[0], &k[1], &k[2]);
    let (de, ep, ze, et) = (k[3].neg(), k[4].neg(), k[5].neg(), k[6].neg());
    if al.is_zero() || de.is_zero() {
        return Err(FibrationError::Relation);
    }
    let ad = al.mul(&de);
    let a = [
        be.div(&ad),
        ep.div(&al.mul(&de.square())),
        ga.div(&ad.square()),
        ze.div(&al.square().mul(&de.pow(3))),
        et.div(&al.pow(3).mul(&de.pow(4))),
    ];
    WeierstrassCurve::new(f, a)
}

/// How the Weierstrass model was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    Invariants,
    Point {
        u: PointU,
        z: String,
        transposed: bool,
    },
}

#[derive(Clone, Debug)]
pub struct GenericFiber {
    pub curve: WeierstrassCurve,
    pub fiber: BiquadraticFiber,
    pub provenance: Provenance,
}

/// Invariants route when both routes are possible and `prefer_point` is
/// false; otherwise the point route.
pub fn quartic_to_weierstrass(
    qm: &QuarticModel,
    pt: Option<&QuarticPoint>,
) -> Result<WeierstrassCurve, FibrationError> {
    match pt {
        Some(pt) => point_route(qm, pt),
        None if qm.field.characteristic() >= 5 => {
            quartic_invariants_curve(&qm.field, &qm.completed_square())
        }
        None => Err(FibrationError::NoPointFound(0)),
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FiberOptions {
    pub deg_bound: u32,
    /// Use a rational point even when the invariants route applies.
    pub prefer_point: bool,
}

impl Default for FiberOptions {
    fn default() -> Self {
        FiberOptions {
            deg_bound: 2,
            prefer_point: false,
        }
    }
}

/// TriForm → (2,2)-fiber → quartic → Weierstrass model over `F_s(w)`.
pub fn generic_fiber(tf: &TriForm, opts: FiberOptions) -> Result<GenericFiber, FibrationError> {
    let fb = fiber_quadratic_in_v(tf)?;
    generic_fiber_of(&fb, opts)
}

pub fn generic_fiber_of(
    fb: &BiquadraticFiber,
    opts: FiberOptions,
) -> Result<GenericFiber, FibrationError> {
    let qm = eliminate_v(fb)?;
    let p = fb.field.characteristic();
    if p >= 5 && !opts.prefer_point {
        let curve = quartic_to_weierstrass(&qm, None)?;
        return Ok(GenericFiber {
            curve,
            fiber: fb.clone(),
            provenance: Provenance::Invariants,
        });
    }
    let pt = find_rational_point(&qm, opts.deg_bound)
        .ok_or(FibrationError::NoPointFound(opts.deg_bound))?;
    let curve = point_route(&qm, &pt)?;
    let (u, z) = pt.describe();
    Ok(GenericFiber {
        curve,
        fiber: fb.clone(),
        provenance: Provenance::Point {
            u,
            z,
            transposed: fb.transposed,
        },
    })
}

/// Projective `F_s`-points of the (2,2)-curve fiber over `w0`, and whether
/// that curve is smooth over `F_s` and `F_{s²}`.
pub fn fiber_point_count(fb: &BiquadraticFiber, w0: Fe) -> Option<(u64, bool)> {
    let g = fb.at(w0)?;
    let f = &fb.field;
    let count_over = |field: &FiniteField, emb: &dyn Fn(Fe) -> Fe| -> (u64, bool) {
        let gg: Vec<Vec<Fe>> = g
            .iter()
            .map(|r| r.iter().map(|&x| emb(x)).collect())
            .collect();
        let mut pts: Vec<(Fe, Fe)> = field.elements().map(|x| (x, field.one())).collect();
        pts.push((field.one(), field.zero()));
        let mut n = 0;
        let mut smooth = true;
        for &(u0, u1) in &pts {
            for &(v0, v1) in &pts {
                let mono = |i: usize, j: usize| {
                    let a = field.mul(field.pow(u0, i as u64), field.pow(u1, (2 - i) as u64));
                    field.mul(
                        a,
                        field.mul(field.pow(v0, j as u64), field.pow(v1, (2 - j) as u64)),
                    )
                };
                let mut val = Fe::ZERO;
                for i in 0..3 {
                    for j in 0..3 {
                        val = field.add(val, field.mul(gg[i][j], mono(i, j)));
                    }
                }
                if !val.is_zero() {
                    continue;
                }
                n += 1;
                // partials in the four homogeneous coordinates
                let d = |di: [u32; 4]| {
                    let mut acc = Fe::ZERO;
                    for i in 0..3u32 {
                        for j in 0..3u32 {
                            let e = [i, 2 - i, j, 2 - j];
                            let mut c = gg[i as usize][j as usize];
                            let mut ok = true;
                            let mut t = field.one();
                            for k in 0..4 {
                                let ek = e[k];
                                let dk = di[k];
                                if dk > ek {
                                    ok = false;
                                    break;
                                }
                                if dk == 1 {
                                    c = field.mul(c, field.from_int(ek as i64));
                                }
                                let x = [u0, u1, v0, v1][k];
                                t = field.mul(t, field.pow(x, (ek - dk) as u64));
                            }
                            if ok {
                                acc = field.add(acc, field.mul(c, t));
                            }
                        }
                    }
                    acc
                };
                let sing = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
                    .iter()
                    .all(|&di| d(di).is_zero());
                if sing {
                    smooth = false;
                }
            }
        }
        (n, smooth)
    };
    let (n, smooth1) = count_over(f, &|x| x);
    let f2 = crate::field::make_field(f.characteristic() as u64, f.degree() * 2).ok()?;
    let emb = f.embedding_into(&f2).ok()?;
    let (_, smooth2) = count_over(&f2, &|x| emb.apply(x));
    Some((n, smooth1 && smooth2))
}
