//! Dense univariate polynomials over a [`FiniteField`], rational functions
//! in one variable, factorization and places of `F_s(w)`.

use std::cmp::Ordering;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::field::{Embedding, Fe, FiniteField};

/// Dense univariate polynomial, coefficients low degree first, no
/// trailing zeros.
#[derive(Clone, PartialEq, Eq)]
pub struct UPoly {
    field: FiniteField,
    c: Vec<Fe>,
}

impl fmt::Debug for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_string_var("w"))
    }
}

impl UPoly {
    pub fn new(field: &FiniteField, mut c: Vec<Fe>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        UPoly {
            field: field.clone(),
            c,
        }
    }

    pub fn from_ints(field: &FiniteField, c: &[i64]) -> Self {
        Self::new(field, c.iter().map(|&x| field.from_int(x)).collect())
    }

    pub fn zero(field: &FiniteField) -> Self {
        UPoly {
            field: field.clone(),
            c: Vec::new(),
        }
    }

    pub fn one(field: &FiniteField) -> Self {
        Self::constant(field, field.one())
    }

    pub fn constant(field: &FiniteField, a: Fe) -> Self {
        Self::new(field, vec![a])
    }

    /// The variable itself.
    pub fn x(field: &FiniteField) -> Self {
        Self::new(field, vec![Fe::ZERO, field.one()])
    }

    pub fn monomial(field: &FiniteField, a: Fe, deg: usize) -> Self {
        let mut c = vec![Fe::ZERO; deg + 1];
        c[deg] = a;
        Self::new(field, c)
    }

    /// `x - a`.
    pub fn linear(field: &FiniteField, a: Fe) -> Self {
        Self::new(field, vec![field.neg(a), field.one()])
    }

    pub fn field(&self) -> &FiniteField {
        &self.field
    }

    pub fn coeffs(&self) -> &[Fe] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> Fe {
        self.c.get(i).copied().unwrap_or(Fe::ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.c.len() == 1 && self.c[0] == self.field.one()
    }

    pub fn is_constant(&self) -> bool {
        self.c.len() <= 1
    }

    /// Degree, with `-1` for the zero polynomial.
    pub fn deg(&self) -> i64 {
        self.c.len() as i64 - 1
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn lc(&self) -> Fe {
        self.c.last().copied().unwrap_or(Fe::ZERO)
    }

    pub fn add(&self, o: &UPoly) -> UPoly {
        let f = &self.field;
        let n = self.c.len().max(o.c.len());
        let c = (0..n).map(|i| f.add(self.coeff(i), o.coeff(i))).collect();
        UPoly::new(f, c)
    }

    pub fn sub(&self, o: &UPoly) -> UPoly {
        let f = &self.field;
        let n = self.c.len().max(o.c.len());
        let c = (0..n).map(|i| f.sub(self.coeff(i), o.coeff(i))).collect();
        UPoly::new(f, c)
    }

    pub fn neg(&self) -> UPoly {
        let f = &self.field;
        UPoly::new(f, self.c.iter().map(|&a| f.neg(a)).collect())
    }

    pub fn scale(&self, a: Fe) -> UPoly {
        let f = &self.field;
        UPoly::new(f, self.c.iter().map(|&x| f.mul(x, a)).collect())
    }

    pub fn mul(&self, o: &UPoly) -> UPoly {
        if self.is_zero() || o.is_zero() {
            return UPoly::zero(&self.field);
        }
        let f = &self.field;
        let mut c = vec![Fe::ZERO; self.c.len() + o.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in o.c.iter().enumerate() {
                c[i + j] = f.add(c[i + j], f.mul(a, b));
            }
        }
        UPoly::new(f, c)
    }

    pub fn square(&self) -> UPoly {
        self.mul(self)
    }

    pub fn pow(&self, mut e: u64) -> UPoly {
        let mut r = UPoly::one(&self.field);
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(&b);
            }
            e >>= 1;
            if e > 0 {
                b = b.square();
            }
        }
        r
    }

    /// Multiplication by `x^k`.
    pub fn shift(&self, k: usize) -> UPoly {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = vec![Fe::ZERO; k];
        c.extend_from_slice(&self.c);
        UPoly::new(&self.field, c)
    }

    /// Euclidean division; panics when dividing by zero.
    pub fn divrem(&self, d: &UPoly) -> (UPoly, UPoly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let f = &self.field;
        if self.c.len() < d.c.len() {
            return (UPoly::zero(f), self.clone());
        }
        let inv = f.inv(d.lc()).unwrap();
        let dn = d.c.len() - 1;
        let mut r = self.c.clone();
        let mut q = vec![Fe::ZERO; self.c.len() - dn];
        for i in (0..q.len()).rev() {
            let coef = f.mul(r[i + dn], inv);
            q[i] = coef;
            if coef.is_zero() {
                continue;
            }
            for (j, &dc) in d.c.iter().enumerate() {
                r[i + j] = f.sub(r[i + j], f.mul(coef, dc));
            }
        }
        r.truncate(dn);
        (UPoly::new(f, q), UPoly::new(f, r))
    }

    pub fn rem(&self, d: &UPoly) -> UPoly {
        self.divrem(d).1
    }

    /// Exact quotient, `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &UPoly) -> Option<UPoly> {
        let (q, r) = self.divrem(d);
        r.is_zero().then_some(q)
    }

    pub fn monic(&self) -> UPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(self.field.inv(self.lc()).unwrap())
    }

    pub fn gcd(&self, o: &UPoly) -> UPoly {
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Returns `(g, s, t)` with `s*self + t*o = g` monic.
    pub fn xgcd(&self, o: &UPoly) -> (UPoly, UPoly, UPoly) {
        let f = &self.field;
        let (mut r0, mut r1) = (self.clone(), o.clone());
        let (mut s0, mut s1) = (UPoly::one(f), UPoly::zero(f));
        let (mut t0, mut t1) = (UPoly::zero(f), UPoly::one(f));
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1);
            r0 = std::mem::replace(&mut r1, r);
            let s = s0.sub(&q.mul(&s1));
            s0 = std::mem::replace(&mut s1, s);
            let t = t0.sub(&q.mul(&t1));
            t0 = std::mem::replace(&mut t1, t);
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let inv = f.inv(r0.lc()).unwrap();
        (r0.scale(inv), s0.scale(inv), t0.scale(inv))
    }

    pub fn derivative(&self) -> UPoly {
        let f = &self.field;
        let c = self
            .c
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &a)| f.mul(a, f.from_int(i as i64)))
            .collect();
        UPoly::new(f, c)
    }

    pub fn eval(&self, x: Fe) -> Fe {
        self.field.eval_poly(&self.c, x)
    }

    /// `self(g(x))`.
    pub fn compose(&self, g: &UPoly) -> UPoly {
        let mut acc = UPoly::zero(&self.field);
        for &c in self.c.iter().rev() {
            acc = acc.mul(g).add(&UPoly::constant(&self.field, c));
        }
        acc
    }

    /// Coefficient reversal `x^deg * self(1/x)` with respect to degree `n`.
    pub fn reverse(&self, n: usize) -> UPoly {
        let mut c = self.c.clone();
        c.resize(n + 1, Fe::ZERO);
        c.reverse();
        UPoly::new(&self.field, c)
    }

    /// `self^e mod m`.
    pub fn pow_mod(&self, mut e: u64, m: &UPoly) -> UPoly {
        let mut r = UPoly::one(&self.field).rem(m);
        let mut b = self.rem(m);
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(&b).rem(m);
            }
            e >>= 1;
            if e > 0 {
                b = b.square().rem(m);
            }
        }
        r
    }

    /// Image under a field embedding.
    pub fn map(&self, emb: &Embedding) -> UPoly {
        UPoly::new(emb.target(), self.c.iter().map(|&a| emb.apply(a)).collect())
    }

    /// `g` with `g(x)^p = self(x)` when every exponent is divisible by `p`.
    pub fn pth_root(&self) -> Option<UPoly> {
        let f = &self.field;
        let p = f.characteristic() as usize;
        let mut c = Vec::new();
        for (i, &a) in self.c.iter().enumerate() {
            if i % p == 0 {
                c.push(f.pth_root(a));
            } else if !a.is_zero() {
                return None;
            }
        }
        Some(UPoly::new(f, c))
    }

    /// Square root of a perfect square, `None` otherwise.
    pub fn sqrt(&self) -> Option<UPoly> {
        let f = &self.field;
        if self.is_zero() {
            return Some(self.clone());
        }
        if f.characteristic() == 2 {
            let mut c = Vec::new();
            for (i, &a) in self.c.iter().enumerate() {
                if i % 2 == 0 {
                    c.push(f.sqrt(a)?);
                } else if !a.is_zero() {
                    return None;
                }
            }
            return Some(UPoly::new(f, c));
        }
        let n = self.deg() as usize;
        if n % 2 == 1 {
            return None;
        }
        let m = n / 2;
        let lead = f.sqrt(self.lc())?;
        // determine g from the top coefficients down
        let mut g = vec![Fe::ZERO; m + 1];
        g[m] = lead;
        let two_lead_inv = f.inv(f.add(lead, lead)).unwrap();
        for k in 1..=m {
            // coefficient of x^{n-k} in g^2 equals self[n-k]
            let mut s = Fe::ZERO;
            for i in 1..k {
                s = f.add(s, f.mul(g[m - i], g[m - (k - i)]));
            }
            g[m - k] = f.mul(f.sub(self.coeff(n - k), s), two_lead_inv);
        }
        let g = UPoly::new(f, g);
        (g.square() == *self).then_some(g)
    }

    /// Square-free decomposition `[(g_i, i)]` with `self = lc * prod g_i^i`,
    /// handling the inseparable case by p-th roots.
    pub fn squarefree_decomposition(&self) -> Vec<(UPoly, u32)> {
        assert!(!self.is_zero(), "square-free decomposition of zero");
        let f = &self.field;
        let p = f.characteristic();
        let mut out: Vec<(UPoly, u32)> = Vec::new();
        let a = self.monic();
        if a.is_constant() {
            return out;
        }
        let d = a.derivative();
        if d.is_zero() {
            for (g, m) in a.pth_root().unwrap().squarefree_decomposition() {
                out.push((g, m * p));
            }
            return merge_powers(out);
        }
        // Musser's algorithm, multiplicities divisible by p end up in `c`
        let mut c = a.gcd(&d);
        let mut w = a.div_exact(&c).unwrap();
        let mut i = 1;
        while !w.is_constant() {
            let y = w.gcd(&c);
            let z = w.div_exact(&y).unwrap();
            if !z.is_constant() {
                out.push((z, i));
            }
            i += 1;
            w = y;
            c = c.div_exact(&w).unwrap();
        }
        if !c.is_constant() {
            for (g, m) in c.pth_root().unwrap().squarefree_decomposition() {
                out.push((g, m * p));
            }
        }
        merge_powers(out)
    }

    /// Product of the distinct monic irreducible factors.
    pub fn squarefree_part(&self) -> UPoly {
        let f = &self.field;
        self.squarefree_decomposition()
            .iter()
            .fold(UPoly::one(f), |acc, (g, _)| acc.mul(g))
    }

    pub fn is_squarefree(&self) -> bool {
        !self.is_zero() && self.squarefree_decomposition().iter().all(|(_, m)| *m == 1)
    }

    /// Monic irreducible factors with multiplicities, sorted by degree then
    /// coefficients.
    pub fn factor(&self) -> Vec<(UPoly, u32)> {
        assert!(!self.is_zero(), "factorization of zero");
        let mut out = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for (g, m) in self.squarefree_decomposition() {
            for (d, part) in distinct_degree(&g) {
                for h in equal_degree(&part, d, &mut rng) {
                    out.push((h, m));
                }
            }
        }
        out.sort_by(|a, b| a.0.cmp_canonical(&b.0));
        merge_powers(out)
    }

    /// Irreducibility by distinct-degree splitting.
    pub fn is_irreducible(&self) -> bool {
        if self.deg() < 1 {
            return false;
        }
        if self.deg() == 1 {
            return true;
        }
        let m = self.monic();
        if !m.is_squarefree() {
            return false;
        }
        let dd = distinct_degree(&m);
        dd.len() == 1 && dd[0].0 as i64 == m.deg()
    }

    /// Distinct roots in the coefficient field, ascending.
    pub fn roots(&self) -> Vec<Fe> {
        if self.is_zero() {
            return Vec::new();
        }
        let f = &self.field;
        let g = self.monic();
        let q = f.order() as u64;
        // split off the part with roots in F_q
        let xq = UPoly::x(f).pow_mod(q, &g);
        let lin = g.gcd(&xq.sub(&UPoly::x(f)));
        if lin.is_constant() {
            return Vec::new();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut r: Vec<Fe> = equal_degree(&lin, 1, &mut rng)
            .iter()
            .map(|h| f.neg(h.coeff(0)))
            .collect();
        r.sort();
        r
    }

    /// Deterministic total order: degree, then coefficients high to low.
    pub fn cmp_canonical(&self, o: &UPoly) -> Ordering {
        self.c
            .len()
            .cmp(&o.c.len())
            .then_with(|| self.c.iter().rev().cmp(o.c.iter().rev()))
    }

    pub fn to_string_var(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let f = &self.field;
        let mut parts = Vec::new();
        for (i, &a) in self.c.iter().enumerate().rev() {
            if a.is_zero() {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            let coef = f.display(a);
            let coef = if coef.contains('+') {
                format!("({coef})")
            } else {
                coef
            };
            parts.push(if i == 0 {
                coef
            } else if a == f.one() {
                mono
            } else {
                format!("{coef}*{mono}")
            });
        }
        parts.join(" + ")
    }
}

fn merge_powers(mut v: Vec<(UPoly, u32)>) -> Vec<(UPoly, u32)> {
    v.sort_by(|a, b| a.0.cmp_canonical(&b.0));
    let mut out: Vec<(UPoly, u32)> = Vec::new();
    for (g, m) in v {
        match out.last_mut() {
            Some((h, k)) if *h == g => *k += m,
            _ => out.push((g, m)),
        }
    }
    out
}

/// Splits a monic square-free polynomial into products of irreducibles of
/// equal degree: `[(d, product of all degree-d factors)]`.
fn distinct_degree(f: &UPoly) -> Vec<(usize, UPoly)> {
    let field = f.field().clone();
    let q = field.order() as u64;
    let mut out = Vec::new();
    let mut rest = f.clone();
    let x = UPoly::x(&field);
    let mut h = x.clone();
    let mut d = 0;
    while rest.deg() >= 2 * (d as i64 + 1) {
        d += 1;
        h = h.pow_mod(q, &rest);
        let g = rest.gcd(&h.sub(&x));
        if !g.is_constant() {
            rest = rest.div_exact(&g).unwrap();
            h = h.rem(&rest);
            out.push((d, g));
        }
    }
    if !rest.is_constant() {
        out.push((rest.deg() as usize, rest));
    }
    out
}

/// Cantor-Zassenhaus splitting of a product of distinct irreducibles of
/// degree `d`.
fn equal_degree(f: &UPoly, d: usize, rng: &mut ChaCha8Rng) -> Vec<UPoly> {
    let n = f.deg() as usize;
    if n == d {
        return vec![f.monic()];
    }
    let field = f.field().clone();
    let q = field.order() as u64;
    let p = field.characteristic();
    loop {
        let a = UPoly::new(&field, (0..n).map(|_| field.random(rng)).collect());
        if a.is_constant() {
            continue;
        }
        let g = f.gcd(&a);
        if !g.is_constant() && g.deg() < f.deg() {
            return split_into(f, &g, d, rng);
        }
        let b = if p == 2 {
            // absolute trace to F_2 of the residue ring element
            let bits = field.degree() as usize * d;
            let mut t = a.rem(f);
            let mut acc = t.clone();
            for _ in 1..bits {
                t = t.square().rem(f);
                acc = acc.add(&t);
            }
            acc
        } else {
            // a^{(q^d - 1)/2} via the norm-like product of Frobenius powers
            let mut frob = a.rem(f);
            let mut prod = frob.clone();
            for _ in 1..d {
                frob = frob.pow_mod(q, f);
                prod = prod.mul(&frob).rem(f);
            }
            prod.pow_mod((q - 1) / 2, f).sub(&UPoly::one(&field))
        };
        let g = f.gcd(&b);
        if !g.is_constant() && g.deg() < f.deg() {
            return split_into(f, &g, d, rng);
        }
    }
}

fn split_into(f: &UPoly, g: &UPoly, d: usize, rng: &mut ChaCha8Rng) -> Vec<UPoly> {
    let h = f.div_exact(g).unwrap();
    let mut out = equal_degree(g, d, rng);
    out.extend(equal_degree(&h.monic(), d, rng));
    out
}

/// Element of `F_s(w)` in lowest terms with monic denominator.
#[derive(Clone, PartialEq, Eq)]
pub struct RatFn {
    num: UPoly,
    den: UPoly,
}

impl fmt::Debug for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_string_var("w"))
    }
}

impl RatFn {
    pub fn new(num: UPoly, den: UPoly) -> Self {
        assert!(!den.is_zero(), "rational function with zero denominator");
        if num.is_zero() {
            let f = num.field().clone();
            return RatFn {
                num,
                den: UPoly::one(&f),
            };
        }
        let g = num.gcd(&den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (num.div_exact(&g).unwrap(), den.div_exact(&g).unwrap())
        };
        let inv = den.field().inv(den.lc()).unwrap();
        RatFn {
            num: num.scale(inv),
            den: den.scale(inv),
        }
    }

    pub fn from_poly(p: UPoly) -> Self {
        let f = p.field().clone();
        RatFn {
            num: p,
            den: UPoly::one(&f),
        }
    }

    pub fn constant(field: &FiniteField, a: Fe) -> Self {
        Self::from_poly(UPoly::constant(field, a))
    }

    pub fn zero(field: &FiniteField) -> Self {
        Self::from_poly(UPoly::zero(field))
    }

    pub fn one(field: &FiniteField) -> Self {
        Self::from_poly(UPoly::one(field))
    }

    pub fn var(field: &FiniteField) -> Self {
        Self::from_poly(UPoly::x(field))
    }

    pub fn from_int(field: &FiniteField, n: i64) -> Self {
        Self::constant(field, field.from_int(n))
    }

    pub fn field(&self) -> &FiniteField {
        self.num.field()
    }

    pub fn num(&self) -> &UPoly {
        &self.num
    }

    pub fn den(&self) -> &UPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_poly(&self) -> bool {
        self.den.is_one()
    }

    /// The value if this is a constant.
    pub fn as_constant(&self) -> Option<Fe> {
        (self.den.is_one() && self.num.is_constant()).then(|| self.num.coeff(0))
    }

    pub fn add(&self, o: &RatFn) -> RatFn {
        if self.den == o.den {
            return RatFn::new(self.num.add(&o.num), self.den.clone());
        }
        RatFn::new(
            self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            self.den.mul(&o.den),
        )
    }

    pub fn sub(&self, o: &RatFn) -> RatFn {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> RatFn {
        RatFn {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, o: &RatFn) -> RatFn {
        if self.is_zero() || o.is_zero() {
            return RatFn::zero(self.field());
        }
        if self.den.is_one() && o.den.is_one() {
            return RatFn::from_poly(self.num.mul(&o.num));
        }
        // cross-cancel before multiplying to keep degrees small
        let g1 = self.num.gcd(&o.den);
        let g2 = o.num.gcd(&self.den);
        let n1 = self.num.div_exact(&g1).unwrap();
        let d2 = o.den.div_exact(&g1).unwrap();
        let n2 = o.num.div_exact(&g2).unwrap();
        let d1 = self.den.div_exact(&g2).unwrap();
        let num = n1.mul(&n2);
        let den = d1.mul(&d2);
        let inv = den.field().inv(den.lc()).unwrap();
        RatFn {
            num: num.scale(inv),
            den: den.scale(inv),
        }
    }

    pub fn scale(&self, a: Fe) -> RatFn {
        if a.is_zero() {
            return RatFn::zero(self.field());
        }
        RatFn {
            num: self.num.scale(a),
            den: self.den.clone(),
        }
    }

    pub fn inv(&self) -> Option<RatFn> {
        if self.is_zero() {
            return None;
        }
        Some(RatFn::new(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, o: &RatFn) -> RatFn {
        self.mul(&o.inv().expect("division by zero rational function"))
    }

    pub fn square(&self) -> RatFn {
        RatFn {
            num: self.num.square(),
            den: self.den.square(),
        }
    }

    pub fn pow(&self, e: i64) -> RatFn {
        if e < 0 {
            return self.inv().expect("zero to a negative power").pow(-e);
        }
        RatFn {
            num: self.num.pow(e as u64),
            den: self.den.pow(e as u64),
        }
    }

    /// Value at `w = x`, `None` at a pole.
    pub fn eval(&self, x: Fe) -> Option<Fe> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return None;
        }
        Some(self.field().div(self.num.eval(x), d))
    }

    /// `self(1/w)`.
    pub fn invert_variable(&self) -> RatFn {
        let dn = self.num.deg().max(0) as usize;
        let dd = self.den.deg() as usize;
        let n = self.num.reverse(dn);
        let d = self.den.reverse(dd);
        match dn.cmp(&dd) {
            Ordering::Equal => RatFn::new(n, d),
            Ordering::Less => RatFn::new(n.shift(dd - dn), d),
            Ordering::Greater => RatFn::new(n, d.shift(dn - dd)),
        }
    }

    /// Square root in `F_s(w)` if one exists.
    pub fn sqrt(&self) -> Option<RatFn> {
        let n = self.num.sqrt()?;
        let d = self.den.sqrt()?;
        Some(RatFn::new(n, d))
    }

    pub fn is_square(&self) -> bool {
        self.sqrt().is_some()
    }

    /// Valuation at a place.
    pub fn valuation(&self, place: &Place) -> i64 {
        match place {
            Place::Infinity => {
                if self.is_zero() {
                    i64::MAX
                } else {
                    self.den.deg() - self.num.deg()
                }
            }
            Place::Finite(pi) => {
                if self.is_zero() {
                    return i64::MAX;
                }
                poly_valuation(&self.num, pi) as i64 - poly_valuation(&self.den, pi) as i64
            }
        }
    }

    pub fn map(&self, emb: &Embedding) -> RatFn {
        RatFn::new(self.num.map(emb), self.den.map(emb))
    }

    pub fn to_string_var(&self, var: &str) -> String {
        if self.den.is_one() {
            return self.num.to_string_var(var);
        }
        format!(
            "({})/({})",
            self.num.to_string_var(var),
            self.den.to_string_var(var)
        )
    }
}

/// Multiplicity of `pi` in `f` (`f` nonzero).
pub fn poly_valuation(f: &UPoly, pi: &UPoly) -> u32 {
    let mut v = 0;
    let mut g = f.clone();
    loop {
        let (q, r) = g.divrem(pi);
        if !r.is_zero() || g.is_zero() {
            return v;
        }
        v += 1;
        g = q;
    }
}

/// A place of `F_s(w)`: a monic irreducible polynomial or infinity.
#[derive(Clone, PartialEq, Eq)]
pub enum Place {
    Finite(UPoly),
    Infinity,
}

impl fmt::Debug for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Finite(p) => write!(f, "{}", p.to_string_var("w")),
            Place::Infinity => write!(f, "inf"),
        }
    }
}

impl Place {
    /// Checks the invariant: monic and irreducible.
    pub fn finite(pi: UPoly) -> Option<Place> {
        (pi.lc() == pi.field().one() && pi.is_irreducible()).then_some(Place::Finite(pi))
    }

    pub fn degree(&self) -> u32 {
        match self {
            Place::Finite(p) => p.deg() as u32,
            Place::Infinity => 1,
        }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, Place::Infinity)
    }

    /// Census order: degree, then polynomial, infinity last.
    pub fn cmp_canonical(&self, o: &Place) -> Ordering {
        match (self, o) {
            (Place::Infinity, Place::Infinity) => Ordering::Equal,
            (Place::Infinity, _) => Ordering::Greater,
            (_, Place::Infinity) => Ordering::Less,
            (Place::Finite(a), Place::Finite(b)) => a.cmp_canonical(b),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;
    use proptest::prelude::*;

    fn p(f: &FiniteField, c: &[i64]) -> UPoly {
        UPoly::from_ints(f, c)
    }

    #[test]
    fn gcd_examples() {
        let f5 = make_field(5, 1).unwrap();
        assert_eq!(p(&f5, &[-1, 0, 1]).gcd(&p(&f5, &[-1, 1])), p(&f5, &[-1, 1]));
        let f = p(&f5, &[3, 0, 2]);
        assert_eq!(f.gcd(&UPoly::zero(&f5)), f.monic());
        let f2 = make_field(2, 1).unwrap();
        let a = p(&f2, &[0, 1, 0, 0, 1]);
        let b = p(&f2, &[0, 1, 1]);
        assert_eq!(a.gcd(&b), b);
        // x^4+x = (x^2+x)(x^2+x+1)
        assert_eq!(b.mul(&p(&f2, &[1, 1, 1])), a);
    }

    #[test]
    fn artin_schreier_polynomial_factors() {
        let f3 = make_field(3, 1).unwrap();
        let mut c = vec![0i64; 10];
        c[9] = 1;
        c[1] = -1;
        let fs = p(&f3, &c).factor();
        let lin = fs.iter().filter(|(g, _)| g.deg() == 1).count();
        let quad = fs.iter().filter(|(g, _)| g.deg() == 2).count();
        assert_eq!((lin, quad, fs.len()), (3, 3, 6));
        assert!(fs.iter().all(|(_, m)| *m == 1));
    }

    #[test]
    fn factor_small_examples() {
        let f5 = make_field(5, 1).unwrap();
        assert_eq!(p(&f5, &[0, 0, 1]).factor(), vec![(p(&f5, &[0, 1]), 2)]);
        let f3 = make_field(3, 1).unwrap();
        let g = p(&f3, &[1, 0, 1]);
        assert_eq!(g.factor(), vec![(g.clone(), 1)]);
        assert!(g.roots().is_empty());
        assert!(g.is_irreducible());
    }

    #[test]
    fn squarefree_examples() {
        let f5 = make_field(5, 1).unwrap();
        let a = p(&f5, &[-1, 1]).pow(3).mul(&p(&f5, &[1, 1]));
        assert_eq!(a.squarefree_part(), p(&f5, &[-1, 1]).mul(&p(&f5, &[1, 1])));
        // w^5 - 2 = (w - 2)^5 over F_5
        let b = p(&f5, &[-2, 0, 0, 0, 0, 1]);
        assert_eq!(b.squarefree_part(), p(&f5, &[-2, 1]));
        let irr = p(&f5, &[2, 0, 1]);
        assert_eq!(irr.squarefree_part(), irr);
    }

    #[test]
    fn sqrt_of_squares() {
        for (pp, k) in [(2, 1), (3, 2), (5, 1), (2, 3)] {
            let f = make_field(pp, k).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            for _ in 0..20 {
                let g = UPoly::new(&f, (0..5).map(|_| f.random(&mut rng)).collect());
                let s = g.square().sqrt().unwrap();
                assert_eq!(s.square(), g.square());
            }
        }
        let f5 = make_field(5, 1).unwrap();
        assert!(p(&f5, &[0, 1]).sqrt().is_none());
        assert!(p(&f5, &[2]).sqrt().is_none());
    }

    #[test]
    fn rational_functions() {
        let f = make_field(5, 1).unwrap();
        let a = RatFn::new(p(&f, &[-1, 0, 1]), p(&f, &[2, 2]));
        // (w^2-1)/(2w+2) = (w-1)/2 = 3w + 2
        assert_eq!(a.num(), &p(&f, &[2, 3]));
        assert_eq!(a.den(), &UPoly::one(&f));
        let b = RatFn::new(p(&f, &[1]), p(&f, &[0, 1]));
        assert_eq!(a.div(&b).mul(&b), a);
        assert_eq!(b.invert_variable(), RatFn::var(&f));
        let pl = Place::finite(p(&f, &[0, 1])).unwrap();
        assert_eq!(b.valuation(&pl), -1);
        assert_eq!(b.valuation(&Place::Infinity), 1);
    }

    fn arb_poly(pp: u64, k: u32, max_deg: usize) -> impl Strategy<Value = UPoly> {
        let f = make_field(pp, k).unwrap();
        let q = f.order();
        prop::collection::vec(0..q, 1..=max_deg + 1)
            .prop_map(move |c| UPoly::new(&f, c.into_iter().map(|x| f.from_raw(x)).collect()))
    }

    fn fields() -> impl Strategy<Value = (u64, u32)> {
        prop::sample::select(vec![
            (2u64, 1u32),
            (3, 1),
            (2, 2),
            (5, 1),
            (7, 1),
            (2, 3),
            (3, 2),
        ])
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn factorization_reconstructs((pp, k) in fields(), seed in any::<u64>()) {
            let f = make_field(pp, k).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = (seed % 12) as usize + 1;
            let mut c: Vec<Fe> = (0..n).map(|_| f.random(&mut rng)).collect();
            c.push(f.random_nonzero(&mut rng));
            let g = UPoly::new(&f, c);
            let fs = g.factor();
            let mut prod = UPoly::constant(&f, g.lc());
            let mut deg = 0;
            for (h, m) in &fs {
                prop_assert!(h.is_irreducible());
                prop_assert_eq!(h.lc(), f.one());
                prod = prod.mul(&h.pow(*m as u64));
                deg += h.deg() * *m as i64;
            }
            prop_assert_eq!(prod, g.clone());
            prop_assert_eq!(deg, g.deg());
        }

        #[test]
        fn divrem_identity(a in arb_poly(3, 2, 10), b in arb_poly(3, 2, 5)) {
            prop_assume!(!b.is_zero());
            let (q, r) = a.divrem(&b);
            prop_assert_eq!(q.mul(&b).add(&r), a);
            prop_assert!(r.deg() < b.deg());
        }

        #[test]
        fn xgcd_bezout(a in arb_poly(2, 2, 8), b in arb_poly(2, 2, 8)) {
            let (g, s, t) = a.xgcd(&b);
            prop_assert_eq!(s.mul(&a).add(&t.mul(&b)), g.clone());
            prop_assert_eq!(g, a.gcd(&b));
        }

        #[test]
        fn roots_are_roots(a in arb_poly(7, 1, 8)) {
            prop_assume!(!a.is_zero());
            for r in a.roots() {
                prop_assert!(a.eval(r).is_zero());
            }
            let brute = a.field().elements().filter(|&x| a.eval(x).is_zero()).count();
            prop_assert_eq!(brute, a.roots().len());
        }
    }
}
