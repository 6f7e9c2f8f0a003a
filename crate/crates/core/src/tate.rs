//! Tate's algorithm over the places of `F_s(w)` and the global invariants
//! of the elliptic surface.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fibration::{FibrationError, WeierstrassCurve};
use crate::field::FiniteField;
use crate::poly::{Place, RatFn, UPoly};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TateError {
    #[error("discriminant is zero")]
    ZeroDiscriminant,
    #[error("Euler number {0} is not divisible by 12")]
    EulerNotDivisible(i64),
    #[error("no singular fibers")]
    NoBadFibers,
    #[error("Tate's algorithm did not terminate at {0}")]
    NoTermination(String),
    #[error(transparent)]
    Curve(#[from] FibrationError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum KodairaType {
    Good,
    I(u32),
    IStar(u32),
    II,
    III,
    IV,
    IVStar,
    IIIStar,
    IIStar,
}

impl KodairaType {
    /// Number of geometric components `m_v`.
    pub fn components(self) -> u32 {
        match self {
            KodairaType::Good => 1,
            KodairaType::I(n) => n,
            KodairaType::IStar(n) => n + 5,
            KodairaType::II => 1,
            KodairaType::III => 2,
            KodairaType::IV => 3,
            KodairaType::IVStar => 7,
            KodairaType::IIIStar => 8,
            KodairaType::IIStar => 9,
        }
    }

    pub fn parse(s: &str) -> Option<KodairaType> {
        let s = s.trim().replace(['{', '}', '^', ' '], "");
        Some(match s.as_str() {
            "I0" | "I_0" => KodairaType::Good,
            "II" => KodairaType::II,
            "III" => KodairaType::III,
            "IV" => KodairaType::IV,
            "IV*" => KodairaType::IVStar,
            "III*" => KodairaType::IIIStar,
            "II*" => KodairaType::IIStar,
            _ => {
                let rest = s.strip_prefix('I')?;
                let rest = rest.strip_prefix('_').unwrap_or(rest);
                match rest.strip_suffix('*') {
                    Some(n) => KodairaType::IStar(n.parse().ok()?),
                    None => {
                        let n: u32 = rest.parse().ok()?;
                        if n == 0 {
                            return None;
                        }
                        KodairaType::I(n)
                    }
                }
            }
        })
    }
}

impl fmt::Display for KodairaType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KodairaType::Good => write!(f, "I_0"),
            KodairaType::I(n) => write!(f, "I_{n}"),
            KodairaType::IStar(n) => write!(f, "I_{n}*"),
            KodairaType::II => write!(f, "II"),
            KodairaType::III => write!(f, "III"),
            KodairaType::IV => write!(f, "IV"),
            KodairaType::IVStar => write!(f, "IV*"),
            KodairaType::IIIStar => write!(f, "III*"),
            KodairaType::IIStar => write!(f, "II*"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KodairaFiber {
    pub place: Place,
    pub degree: u32,
    pub kind: KodairaType,
    /// `ord_v Δ_min`
    pub ord_disc: u32,
}

impl KodairaFiber {
    pub fn components(&self) -> u32 {
        self.kind.components()
    }
}

/// Arithmetic in the valuation ring at a place and its residue field,
/// which is represented as `F_s[w]/(m)` with `m = π` (or `w` at infinity).
struct Local {
    field: FiniteField,
    place: Place,
    modulus: UPoly,
    pi: RatFn,
}

impl Local {
    fn new(field: &FiniteField, place: &Place) -> Self {
        let (modulus, pi) = match place {
            Place::Finite(p) => (p.clone(), RatFn::from_poly(p.clone())),
            Place::Infinity => {
                let w = UPoly::x(field);
                (w.clone(), RatFn::new(UPoly::one(field), w))
            }
        };
        Local {
            field: field.clone(),
            place: place.clone(),
            modulus,
            pi,
        }
    }

    fn degree(&self) -> u32 {
        self.modulus.deg() as u32
    }

    fn val(&self, x: &RatFn) -> i64 {
        x.valuation(&self.place)
    }

    fn divides(&self, x: &RatFn) -> bool {
        self.val(x) >= 1
    }

    fn inv_mod(&self, a: &UPoly) -> UPoly {
        let (g, s, _) = a.xgcd(&self.modulus);
        debug_assert_eq!(g.deg(), 0);
        s.scale(self.field.inv(g.lc()).unwrap()).rem(&self.modulus)
    }

    /// Residue class of an integral element.
    fn reduce(&self, x: &RatFn) -> UPoly {
        debug_assert!(self.val(x) >= 0);
        match &self.place {
            Place::Finite(_) => {
                let d = self.inv_mod(&x.den().rem(&self.modulus));
                x.num().rem(&self.modulus).mul(&d).rem(&self.modulus)
            }
            Place::Infinity => {
                if x.is_zero() || x.num().deg() < x.den().deg() {
                    UPoly::zero(&self.field)
                } else {
                    let c = self.field.div(x.num().lc(), x.den().lc());
                    UPoly::constant(&self.field, c)
                }
            }
        }
    }

    fn lift(&self, r: &UPoly) -> RatFn {
        match &self.place {
            Place::Finite(_) => RatFn::from_poly(r.clone()),
            Place::Infinity => RatFn::constant(&self.field, r.coeff(0)),
        }
    }

    fn preduce(&self, x: &RatFn) -> RatFn {
        self.lift(&self.reduce(x))
    }

    /// Lift of `1/x` modulo the place.
    fn pinv(&self, x: &RatFn) -> RatFn {
        self.lift(&self.inv_mod(&self.reduce(x)))
    }

    /// Lift of the `p`-th root in the residue field.
    fn proot(&self, x: &RatFn) -> RatFn {
        let p = self.field.characteristic() as u64;
        let steps = self.field.degree() * self.degree() - 1;
        let mut r = self.reduce(x);
        for _ in 0..steps {
            r = r.pow_mod(p, &self.modulus);
        }
        self.lift(&r)
    }

    fn pi_pow(&self, k: i64) -> RatFn {
        self.pi.pow(k)
    }
}

#[derive(Clone)]
struct Model {
    a: [RatFn; 5],
}

impl Model {
    fn n(&self, k: i64) -> RatFn {
        RatFn::from_int(self.a[0].field(), k)
    }

    fn b(&self) -> [RatFn; 4] {
        let [a1, a2, a3, a4, a6] = &self.a;
        let n = |k| self.n(k);
        let b2 = a1.square().add(&n(4).mul(a2));
        let b4 = n(2).mul(a4).add(&a1.mul(a3));
        let b6 = a3.square().add(&n(4).mul(a6));
        let b8 = a1
            .square()
            .mul(a6)
            .add(&n(4).mul(a2).mul(a6))
            .sub(&a1.mul(a3).mul(a4))
            .add(&a2.mul(&a3.square()))
            .sub(&a4.square());
        [b2, b4, b6, b8]
    }

    fn c4(&self) -> RatFn {
        let [b2, b4, _, _] = self.b();
        b2.square().sub(&self.n(24).mul(&b4))
    }

    fn disc(&self) -> RatFn {
        let [b2, b4, b6, b8] = self.b();
        let n = |k| self.n(k);
        b2.square()
            .mul(&b8)
            .neg()
            .sub(&n(8).mul(&b4.pow(3)))
            .sub(&n(27).mul(&b6.square()))
            .add(&n(9).mul(&b2).mul(&b4).mul(&b6))
    }

    /// `x = x' + r`, `y = y' + s x' + t`.
    fn rst(&mut self, r: &RatFn, s: &RatFn, t: &RatFn) {
        let [a1, a2, a3, a4, a6] = self.a.clone();
        let n = |k| self.n(k);
        let na1 = a1.add(&n(2).mul(s));
        let na2 = a2.sub(&s.mul(&a1)).add(&n(3).mul(r)).sub(&s.square());
        let na3 = a3.add(&r.mul(&a1)).add(&n(2).mul(t));
        let na4 = a4
            .sub(&s.mul(&a3))
            .add(&n(2).mul(r).mul(&a2))
            .sub(&t.add(&r.mul(s)).mul(&a1))
            .add(&n(3).mul(&r.square()))
            .sub(&n(2).mul(s).mul(t));
        let na6 = a6
            .add(&r.mul(&a4))
            .add(&r.square().mul(&a2))
            .add(&r.pow(3))
            .sub(&t.mul(&a3))
            .sub(&t.square())
            .sub(&r.mul(t).mul(&a1));
        self.a = [na1, na2, na3, na4, na6];
    }

    /// `a_i ↦ a_i / u^i`.
    fn scale(&mut self, u: &RatFn) {
        let pows = [1, 2, 3, 4, 6];
        for (ai, e) in self.a.iter_mut().zip(pows) {
            *ai = ai.div(&u.pow(e));
        }
    }
}

/// Scales the model so that every `a_i` is integral at the place, with
/// the smallest such power of the uniformizer.
fn integralize(m: &mut Model, loc: &Local) {
    let pows = [1i64, 2, 3, 4, 6];
    let mut k = 0i64;
    for (ai, e) in m.a.iter().zip(pows) {
        if ai.is_zero() {
            continue;
        }
        let v = loc.val(ai);
        if v < 0 {
            k = k.max((-v + e - 1) / e);
        }
    }
    if k > 0 {
        m.scale(&loc.pi_pow(-k));
    }
}

struct LocalResult {
    kind: KodairaType,
    ord_disc: u32,
    model: Model,
}

fn tate(mut m: Model, loc: &Local) -> Result<LocalResult, TateError> {
    let f = loc.field.clone();
    let p = f.characteristic();
    let zero = RatFn::zero(&f);
    let half = (p != 2).then(|| RatFn::constant(&f, f.inv(f.from_int(2)).unwrap()));
    integralize(&mut m, loc);
    let pi = loc.pi.clone();
    let pi2 = pi.square();
    let pi3 = pi2.mul(&pi);
    let pi4 = pi2.square();
    for _ in 0..64 {
        let disc = m.disc();
        if disc.is_zero() {
            return Err(TateError::ZeroDiscriminant);
        }
        let ord = loc.val(&disc);
        debug_assert!(ord >= 0);
        let done = |kind, m: Model| {
            Ok(LocalResult {
                kind,
                ord_disc: ord as u32,
                model: m,
            })
        };
        if ord == 0 {
            return done(KodairaType::Good, m);
        }
        if !loc.divides(&m.c4()) {
            return done(KodairaType::I(ord as u32), m);
        }
        // move the singular point to (0, 0)
        let [a1, a2, a3, a4, a6] = m.a.clone();
        let [b2, b4, b6, _] = m.b();
        let (r, t) = match p {
            2 => {
                if loc.divides(&b2) {
                    let r = loc.proot(&a4);
                    let t = loc.proot(&r.add(&a2).mul(&r).add(&a4).mul(&r).add(&a6));
                    (r, t)
                } else {
                    let inv = loc.pinv(&a1);
                    let r = inv.mul(&a3);
                    let t = inv.mul(&a4.add(&r.square()));
                    (r, t)
                }
            }
            3 => {
                let r = if loc.divides(&b2) {
                    loc.proot(&b6.neg())
                } else {
                    loc.pinv(&b2).mul(&b4).neg()
                };
                let t = a1.mul(&r).add(&a3);
                (r, t)
            }
            _ => {
                let r = loc.pinv(&RatFn::from_int(&f, 12)).mul(&b2).neg();
                let t = half.clone().unwrap().mul(&a1.mul(&r).add(&a3)).neg();
                (r, t)
            }
        };
        let (r, t) = (loc.preduce(&r), loc.preduce(&t));
        m.rst(&r, &zero, &t);
        let [_, _, _, _, a6] = &m.a;
        if loc.val(a6) < 2 {
            return done(KodairaType::II, m);
        }
        let [_, _, b6, b8] = m.b();
        if loc.val(&b8) < 3 {
            return done(KodairaType::III, m);
        }
        if loc.val(&b6) < 3 {
            return done(KodairaType::IV, m);
        }
        // now π | a1, a2 and π² | a3, a4, π³ | a6
        let [a1, a2, a3, _, a6] = m.a.clone();
        let (s, t) = match p {
            2 => (loc.proot(&a2), pi.mul(&loc.proot(&a6.div(&pi2)))),
            3 => (a1, a3),
            _ => {
                let h = half.clone().unwrap();
                (h.mul(&a1).neg(), h.mul(&a3).neg())
            }
        };
        m.rst(&zero, &s, &t);
        // T³ + b T² + c T + d
        let [_, a2, _, a4, a6] = m.a.clone();
        let b = loc.preduce(&a2.div(&pi));
        let c = loc.preduce(&a4.div(&pi2));
        let d = loc.preduce(&a6.div(&pi3));
        let n = |k| RatFn::from_int(&f, k);
        let w = n(27)
            .mul(&d.square())
            .sub(&b.square().mul(&c.square()))
            .add(&n(4).mul(&b.pow(3)).mul(&d))
            .sub(&n(18).mul(&b).mul(&c).mul(&d))
            .add(&n(4).mul(&c.pow(3)));
        let x = n(3).mul(&c).sub(&b.square());
        if !loc.divides(&w) {
            return done(KodairaType::IStar(0), m);
        }
        if !loc.divides(&x) {
            // a double root: move it to T = 0
            let r = match p {
                2 => loc.proot(&c),
                3 => c.mul(&loc.pinv(&b)),
                _ => b.mul(&c).sub(&n(9).mul(&d)).mul(&loc.pinv(&n(2).mul(&x))),
            };
            m.rst(&pi.mul(&loc.preduce(&r)), &zero, &zero);
            let (mut ix, mut iy) = (3u32, 3u32);
            let (mut mx, mut my) = (pi2.clone(), pi2.clone());
            loop {
                let [_, _, a3, _, a6] = m.a.clone();
                let a3t = loc.preduce(&a3.div(&my));
                let a6t = loc.preduce(&a6.div(&mx.mul(&my)));
                if !loc.divides(&a3t.square().add(&n(4).mul(&a6t))) {
                    break;
                }
                let t = match p {
                    2 => my.mul(&loc.proot(&a6t)),
                    _ => my.mul(&loc.preduce(&a3t.mul(half.as_ref().unwrap()).neg())),
                };
                m.rst(&zero, &zero, &t);
                my = my.mul(&pi);
                iy += 1;
                let [_, a2, _, a4, a6] = m.a.clone();
                let a2t = loc.preduce(&a2.div(&pi));
                let a4t = loc.preduce(&a4.div(&pi.mul(&mx)));
                let a6t = loc.preduce(&a6.div(&mx.mul(&my)));
                if !loc.divides(&a4t.square().sub(&n(4).mul(&a6t).mul(&a2t))) {
                    break;
                }
                let r = match p {
                    2 => mx.mul(&loc.proot(&a6t.mul(&loc.pinv(&a2t)))),
                    _ => mx.mul(&loc.preduce(&a4t.neg().mul(&loc.pinv(&n(2).mul(&a2t))))),
                };
                m.rst(&r, &zero, &zero);
                mx = mx.mul(&pi);
                ix += 1;
                if ix + iy > 4 * ord as u32 + 16 {
                    return Err(TateError::NoTermination(loc.place.to_string()));
                }
            }
            return done(KodairaType::IStar(ix + iy - 5), m);
        }
        // a triple root: move it to T = 0
        let r = match p {
            2 => b.clone(),
            3 => loc.proot(&d.neg()),
            _ => b.mul(&loc.pinv(&n(3))).neg(),
        };
        m.rst(&pi.mul(&loc.preduce(&r)), &zero, &zero);
        let [_, _, a3, _, a6] = m.a.clone();
        let a3t = loc.preduce(&a3.div(&pi2));
        let a6t = loc.preduce(&a6.div(&pi4));
        if !loc.divides(&a3t.square().add(&n(4).mul(&a6t))) {
            return done(KodairaType::IVStar, m);
        }
        let t = match p {
            2 => pi2.mul(&loc.proot(&a6t)).neg(),
            _ => pi2.mul(&loc.preduce(&a3t.mul(half.as_ref().unwrap()).neg())),
        };
        m.rst(&zero, &zero, &t);
        let [_, _, _, a4, a6] = &m.a;
        if loc.val(a4) < 4 {
            return done(KodairaType::IIIStar, m);
        }
        if loc.val(a6) < 6 {
            return done(KodairaType::IIStar, m);
        }
        // not minimal
        m.scale(&pi);
    }
    Err(TateError::NoTermination(loc.place.to_string()))
}

fn model_of(e: &WeierstrassCurve) -> Model {
    Model { a: e.a.clone() }
}

/// A model integral and minimal at `v`, in the same coordinate `w`.
pub fn minimal_model_at(e: &WeierstrassCurve, v: &Place) -> Result<WeierstrassCurve, TateError> {
    if e.disc.is_zero() {
        return Err(TateError::ZeroDiscriminant);
    }
    let loc = Local::new(&e.field, v);
    let res = tate(model_of(e), &loc)?;
    Ok(WeierstrassCurve::new(&e.field, res.model.a)?)
}

/// Kodaira type and `ord Δ_min` at one place; `Good` when the reduction is
/// good.
pub fn tate_local(e: &WeierstrassCurve, v: &Place) -> Result<KodairaFiber, TateError> {
    if e.disc.is_zero() {
        return Err(TateError::ZeroDiscriminant);
    }
    let loc = Local::new(&e.field, v);
    let res = tate(model_of(e), &loc)?;
    Ok(KodairaFiber {
        place: v.clone(),
        degree: loc.degree(),
        kind: res.kind,
        ord_disc: res.ord_disc,
    })
}

/// Places where some model can have bad reduction: factors of the
/// discriminant and of the coefficient denominators, and infinity.
fn candidate_places(e: &WeierstrassCurve) -> Vec<Place> {
    let mut polys: Vec<UPoly> = Vec::new();
    let mut add = |p: &UPoly| {
        if p.deg() > 0 {
            for (g, _) in p.factor() {
                let g = g.monic();
                if !polys.contains(&g) {
                    polys.push(g);
                }
            }
        }
    };
    add(e.disc.num());
    add(e.disc.den());
    for a in &e.a {
        add(a.den());
    }
    polys.sort_by(|a, b| a.deg().cmp(&b.deg()).then_with(|| a.cmp_canonical(b)));
    let mut out: Vec<Place> = polys.into_iter().map(Place::Finite).collect();
    out.push(Place::Infinity);
    out
}

/// All places of bad reduction with their local fibers, in census order.
pub fn bad_places(e: &WeierstrassCurve) -> Result<Vec<KodairaFiber>, TateError> {
    if e.disc.is_zero() {
        return Err(TateError::ZeroDiscriminant);
    }
    let fibers: Result<Vec<KodairaFiber>, TateError> = candidate_places(e)
        .par_iter()
        .map(|v| tate_local(e, v))
        .collect();
    Ok(fibers?
        .into_iter()
        .filter(|f| f.kind != KodairaType::Good)
        .collect())
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SurfaceMeta {
    pub shape: Option<String>,
    pub q: Option<u64>,
    pub field: Option<String>,
    pub p: Option<String>,
    #[serde(rename = "Q")]
    pub q_val: Option<String>,
    pub r: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberEntry {
    pub place: String,
    pub degree: u32,
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(rename = "ordDelta")]
    pub ord_delta: u32,
    pub mv: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusEntry {
    #[serde(rename = "type")]
    pub kind: String,
    pub count: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceReport {
    pub e: i64,
    pub pa: i64,
    pub b2: i64,
    #[serde(rename = "rank_T")]
    pub rank_t: i64,
    /// Number of singular fibers over the algebraic closure.
    pub bad_fibers: u32,
    pub fibers: Vec<FiberEntry>,
    pub closure_census: Vec<CensusEntry>,
    pub meta: SurfaceMeta,
}

impl SurfaceReport {
    /// Places with degrees: `(III, 1), (I_6, 1)`.
    pub fn places_row(&self) -> String {
        self.fibers
            .iter()
            .map(|f| format!("({}, {})", f.kind, f.degree))
            .collect::<Vec<_>>()
            .join(", ")
    }

    /// Closure census: `I_8×4, I_1×16`.
    pub fn closure_row(&self) -> String {
        self.closure_census
            .iter()
            .map(|c| {
                if c.count == 1 {
                    c.kind.clone()
                } else {
                    format!("{}×{}", c.kind, c.count)
                }
            })
            .collect::<Vec<_>>()
            .join(", ")
    }

    pub fn text_row(&self) -> String {
        format!(
            "b2={} rkT={} #BF={} {}",
            self.b2,
            self.rank_t,
            self.bad_fibers,
            self.fibers
                .iter()
                .map(|f| format!("({},{})", f.kind, f.degree))
                .collect::<Vec<_>>()
                .join(",")
        )
    }
}

/// Aggregates local data: `e = Σ ord Δ_min · deg v`, `pₐ = e/12`,
/// `b₂ = e − 2`, `rank T = 2 + Σ deg v (m_v − 1)`.
pub fn assemble_report(
    fibers: &[KodairaFiber],
    meta: SurfaceMeta,
) -> Result<SurfaceReport, TateError> {
    if fibers.is_empty() {
        return Err(TateError::NoBadFibers);
    }
    let e: i64 = fibers
        .iter()
        .map(|f| f.ord_disc as i64 * f.degree as i64)
        .sum();
    if e % 12 != 0 {
        return Err(TateError::EulerNotDivisible(e));
    }
    let rank_t = 2 + fibers
        .iter()
        .map(|f| f.degree as i64 * (f.components() as i64 - 1))
        .sum::<i64>();
    let mut census: BTreeMap<KodairaType, u32> = BTreeMap::new();
    for f in fibers {
        *census.entry(f.kind).or_default() += f.degree;
    }
    // additive fibers first, then I_n by decreasing n
    let mut sorted: Vec<&KodairaFiber> = fibers.iter().collect();
    sorted.sort_by_key(|f| {
        (
            matches!(f.kind, KodairaType::I(_)),
            std::cmp::Reverse(f.kind),
            f.degree,
            f.place.to_string(),
        )
    });
    let entries = sorted
        .iter()
        .map(|f| FiberEntry {
            place: f.place.to_string(),
            degree: f.degree,
            kind: f.kind.to_string(),
            ord_delta: f.ord_disc,
            mv: f.components(),
        })
        .collect();
    Ok(SurfaceReport {
        e,
        pa: e / 12,
        b2: e - 2,
        rank_t,
        bad_fibers: fibers.iter().map(|f| f.degree).sum(),
        fibers: entries,
        closure_census: census
            .into_iter()
            .map(|(k, c)| CensusEntry {
                kind: k.to_string(),
                count: c,
            })
            .collect(),
        meta,
    })
}

pub fn analyze_surface(
    e: &WeierstrassCurve,
    meta: SurfaceMeta,
) -> Result<SurfaceReport, TateError> {
    assemble_report(&bad_places(e)?, meta)
}
