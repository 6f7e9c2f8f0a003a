//! Prime and extension finite fields `F_{p^k}`.
//!
//! Elements are stored in polynomial basis as a packed integer: the
//! coefficient `c_i` of `x^i` is the base-`p` digit of weight `p^i`.
//! Multiplication goes through discrete-log tables built once per field,
//! which keeps the tiny fields used throughout the crate very fast.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest field cardinality accepted by [`make_field`].
pub const DEFAULT_CARDINALITY_LIMIT: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field of order {p}^{k} exceeds the cardinality limit {limit}")]
    TooLarge { p: u64, k: u32, limit: u64 },
    #[error("F_{p}^{from} does not embed into F_{p}^{to}")]
    NotSubfield { p: u32, from: u32, to: u32 },
    #[error("characteristic mismatch: {0} vs {1}")]
    CharacteristicMismatch(u32, u32),
    #[error("defining polynomial is not a monic irreducible of the stated degree")]
    BadModulus,
    #[error("malformed element {0}")]
    BadElement(String),
}

/// An element of some [`FiniteField`]; meaningless without its field.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Fe(pub(crate) u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);

    /// Packed coefficient representation.
    pub fn raw(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

struct FieldInner {
    p: u32,
    k: u32,
    q: u32,
    /// Monic defining polynomial, low degree first, length `k + 1`.
    modulus: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
}

/// A finite field `F_{p^k}` with an explicitly stored defining polynomial.
///
/// Cloning is cheap (shared tables). Two handles compare equal when they
/// have the same characteristic and defining polynomial.
#[derive(Clone)]
pub struct FiniteField {
    inner: Arc<FieldInner>,
}

impl PartialEq for FiniteField {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.p == other.inner.p && self.inner.modulus == other.inner.modulus)
    }
}

impl Eq for FiniteField {}

impl fmt::Debug for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})", self.inner.p, self.inner.k)
    }
}

impl fmt::Display for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inner.k == 1 {
            write!(f, "F_{}", self.inner.p)
        } else {
            write!(f, "F_{}^{}", self.inner.p, self.inner.k)
        }
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime divisors of `n`, ascending.
pub fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// `p^k` as a prime power, if `q` is one.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    let ps = prime_divisors(q);
    if ps.len() != 1 {
        return None;
    }
    let p = ps[0];
    let mut k = 0;
    let mut m = q;
    while m > 1 {
        m /= p;
        k += 1;
    }
    Some((p as u32, k))
}

// ---- dense polynomial helpers over F_p used during construction ----

fn fp_trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn fp_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    fp_trim(&mut r);
    let dm = m.len() - 1;
    let inv_lead = inv_mod(m[dm], p);
    while r.len() > dm {
        let lead = r[r.len() - 1] as u64 * inv_lead as u64 % p as u64;
        let shift = r.len() - 1 - dm;
        for (i, &c) in m.iter().enumerate() {
            let sub = lead * c as u64 % p as u64;
            r[shift + i] = ((r[shift + i] as u64 + p as u64 - sub) % p as u64) as u32;
        }
        fp_trim(&mut r);
    }
    r
}

fn inv_mod(a: u32, p: u32) -> u32 {
    let mut r = 1u64;
    let mut b = a as u64 % p as u64;
    let mut e = p as u64 - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    r as u32
}

fn digits(mut n: u64, p: u32, len: usize) -> Vec<u32> {
    let mut out = vec![0; len];
    for d in out.iter_mut() {
        *d = (n % p as u64) as u32;
        n /= p as u64;
    }
    out
}

/// Irreducibility over `F_p` by trial division against every monic
/// polynomial of degree at most `deg / 2`.
pub fn is_irreducible_fp(poly: &[u32], p: u32) -> bool {
    let mut f = poly.to_vec();
    fp_trim(&mut f);
    if f.len() < 2 {
        return false;
    }
    let deg = f.len() - 1;
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for n in 0..count {
            let mut g = digits(n, p, d);
            g.push(1);
            if fp_rem(&f, &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// Lexicographically smallest monic irreducible of degree `k` over `F_p`;
/// lower coefficients compared with `c_{k-1}` most significant.
fn smallest_irreducible(p: u32, k: u32) -> Vec<u32> {
    let count = (p as u64).pow(k);
    for n in 0..count {
        let mut f = digits(n, p, k as usize);
        f.push(1);
        if is_irreducible_fp(&f, p) {
            return f;
        }
    }
    unreachable!("an irreducible polynomial of every degree exists")
}

fn registry() -> &'static Mutex<HashMap<(u32, u32), FiniteField>> {
    static REG: OnceLock<Mutex<HashMap<(u32, u32), FiniteField>>> = OnceLock::new();
    REG.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Builds `F_{p^k}` with the default cardinality limit.
pub fn make_field(p: u64, k: u32) -> Result<FiniteField, FieldError> {
    FiniteField::with_limit(p, k, DEFAULT_CARDINALITY_LIMIT)
}

impl FiniteField {
    pub fn new(p: u64, k: u32) -> Result<Self, FieldError> {
        make_field(p, k)
    }

    /// Builds `F_{p^k}` refusing cardinalities above `limit`.
    pub fn with_limit(p: u64, k: u32, limit: u64) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if k == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let q = (p as u128).checked_pow(k).unwrap_or(u128::MAX);
        if q > limit as u128 || q > u32::MAX as u128 / 2 {
            return Err(FieldError::TooLarge { p, k, limit });
        }
        let key = (p as u32, k);
        if let Some(f) = registry().lock().unwrap().get(&key) {
            return Ok(f.clone());
        }
        let modulus = smallest_irreducible(p as u32, k);
        let field = Self::build(p as u32, modulus);
        registry().lock().unwrap().insert(key, field.clone());
        Ok(field)
    }

    /// Builds a field from an explicit monic defining polynomial over `F_p`.
    pub fn from_modulus(p: u64, modulus: &[u32]) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        let p32 = p as u32;
        if modulus.len() < 2 || *modulus.last().unwrap() != 1 || modulus.iter().any(|&c| c >= p32) {
            return Err(FieldError::BadModulus);
        }
        let k = (modulus.len() - 1) as u32;
        let q = (p as u128).pow(k);
        if q > DEFAULT_CARDINALITY_LIMIT as u128 {
            return Err(FieldError::TooLarge {
                p,
                k,
                limit: DEFAULT_CARDINALITY_LIMIT,
            });
        }
        if !is_irreducible_fp(modulus, p32) {
            return Err(FieldError::BadModulus);
        }
        if let Ok(std) = make_field(p, k) {
            if std.inner.modulus == modulus {
                return Ok(std);
            }
        }
        Ok(Self::build(p32, modulus.to_vec()))
    }

    fn build(p: u32, modulus: Vec<u32>) -> Self {
        let k = (modulus.len() - 1) as u32;
        let q = p.pow(k);
        let pows: Vec<u32> = (0..k).map(|i| p.pow(i)).collect();
        let pack = |v: &[u32]| -> u32 { v.iter().zip(&pows).map(|(c, w)| c * w).sum() };
        let slow_mul = |a: u32, b: u32| -> u32 {
            let da = digits(a as u64, p, k as usize);
            let db = digits(b as u64, p, k as usize);
            let mut prod = vec![0u64; 2 * k as usize];
            for (i, &x) in da.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                for (j, &y) in db.iter().enumerate() {
                    prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p as u64;
                }
            }
            let prod: Vec<u32> = prod.into_iter().map(|c| c as u32).collect();
            let mut r = fp_rem(&prod, &modulus, p);
            r.resize(k as usize, 0);
            pack(&r)
        };
        let slow_pow = |a: u32, mut e: u64| -> u32 {
            let mut r = 1u32;
            let mut b = a;
            while e > 0 {
                if e & 1 == 1 {
                    r = slow_mul(r, b);
                }
                b = slow_mul(b, b);
                e >>= 1;
            }
            r
        };
        let order = (q - 1) as u64;
        let divs = prime_divisors(order);
        let mut gen = 1u32;
        if q > 2 {
            gen = (2..q)
                .find(|&g| divs.iter().all(|&l| slow_pow(g, order / l) != 1))
                .expect("multiplicative group is cyclic");
        }
        // multiplication by the generator as an F_p-linear map on digits
        let columns: Vec<Vec<u32>> = (0..k)
            .map(|j| digits(slow_mul(gen, pows[j as usize]) as u64, p, k as usize))
            .collect();
        let mut exp = Vec::with_capacity(q as usize);
        let mut log = vec![0u32; q as usize];
        let mut cur = 1u32;
        let mut acc = vec![0u64; k as usize];
        for i in 0..(q - 1) {
            exp.push(cur);
            log[cur as usize] = i;
            acc.iter_mut().for_each(|a| *a = 0);
            let dc = digits(cur as u64, p, k as usize);
            for (j, &c) in dc.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for (a, &col) in acc.iter_mut().zip(&columns[j]) {
                    *a += c as u64 * col as u64;
                }
            }
            cur = acc
                .iter()
                .zip(&pows)
                .map(|(a, w)| (*a % p as u64) as u32 * w)
                .sum();
        }
        FiniteField {
            inner: Arc::new(FieldInner {
                p,
                k,
                q,
                modulus,
                exp,
                log,
            }),
        }
    }

    pub fn characteristic(&self) -> u32 {
        self.inner.p
    }

    pub fn degree(&self) -> u32 {
        self.inner.k
    }

    /// Cardinality `q = p^k`.
    pub fn order(&self) -> u32 {
        self.inner.q
    }

    /// Defining polynomial, low degree first.
    pub fn modulus(&self) -> &[u32] {
        &self.inner.modulus
    }

    pub fn zero(&self) -> Fe {
        Fe(0)
    }

    pub fn one(&self) -> Fe {
        Fe(1)
    }

    /// The class of `x` (equals `-modulus[0]` for prime fields).
    pub fn gen(&self) -> Fe {
        if self.inner.k == 1 {
            let p = self.inner.p;
            Fe((p - self.inner.modulus[0]) % p)
        } else {
            Fe(self.inner.p)
        }
    }

    pub fn from_int(&self, n: i64) -> Fe {
        let p = self.inner.p as i64;
        Fe(n.rem_euclid(p) as u32)
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<Fe, FieldError> {
        let p = self.inner.p;
        if coeffs.len() > self.inner.k as usize || coeffs.iter().any(|&c| c >= p) {
            return Err(FieldError::BadElement(format!("{coeffs:?}")));
        }
        let mut v = 0u32;
        for &c in coeffs.iter().rev() {
            v = v * p + c;
        }
        Ok(Fe(v))
    }

    pub fn from_raw(&self, raw: u32) -> Fe {
        debug_assert!(raw < self.inner.q);
        Fe(raw)
    }

    /// Coefficients `[c0, c1, ..., c_{k-1}]` in the polynomial basis.
    pub fn coeffs(&self, a: Fe) -> Vec<u32> {
        digits(a.0 as u64, self.inner.p, self.inner.k as usize)
    }

    /// Returns the prime-field integer if `a` lies in `F_p`.
    pub fn as_prime_field(&self, a: Fe) -> Option<u32> {
        (a.0 < self.inner.p).then_some(a.0)
    }

    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        let p = self.inner.p;
        if p == 2 {
            return Fe(a.0 ^ b.0);
        }
        if self.inner.k == 1 {
            let s = a.0 + b.0;
            return Fe(if s >= p { s - p } else { s });
        }
        let (mut x, mut y) = (a.0, b.0);
        let (mut r, mut w) = (0u32, 1u32);
        while x > 0 || y > 0 {
            let s = (x % p + y % p) % p;
            r += s * w;
            w *= p;
            x /= p;
            y /= p;
        }
        Fe(r)
    }

    pub fn neg(&self, a: Fe) -> Fe {
        let p = self.inner.p;
        if p == 2 {
            return a;
        }
        if self.inner.k == 1 {
            return Fe(if a.0 == 0 { 0 } else { p - a.0 });
        }
        let mut x = a.0;
        let (mut r, mut w) = (0u32, 1u32);
        while x > 0 {
            let d = x % p;
            r += ((p - d) % p) * w;
            w *= p;
            x /= p;
        }
        Fe(r)
    }

    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.0 == 0 || b.0 == 0 {
            return Fe(0);
        }
        let n = self.inner.q - 1;
        let s = self.inner.log[a.0 as usize] as u64 + self.inner.log[b.0 as usize] as u64;
        Fe(self.inner.exp[(s % n as u64) as usize])
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: Fe) -> Option<Fe> {
        if a.0 == 0 {
            return None;
        }
        let n = self.inner.q - 1;
        let l = self.inner.log[a.0 as usize];
        Some(Fe(self.inner.exp[((n - l) % n) as usize]))
    }

    /// `a / b`; panics on division by zero.
    pub fn div(&self, a: Fe, b: Fe) -> Fe {
        self.mul(a, self.inv(b).expect("division by zero in finite field"))
    }

    pub fn pow(&self, a: Fe, e: u64) -> Fe {
        if e == 0 {
            return Fe(1);
        }
        if a.0 == 0 {
            return Fe(0);
        }
        let n = (self.inner.q - 1) as u64;
        let l = self.inner.log[a.0 as usize] as u64;
        Fe(self.inner.exp[((l as u128 * (e as u128 % n as u128)) % n as u128) as usize])
    }

    /// Signed exponent, negative powers via the inverse.
    pub fn powi(&self, a: Fe, e: i64) -> Fe {
        if e >= 0 {
            self.pow(a, e as u64)
        } else {
            self.pow(self.inv(a).expect("zero to a negative power"), (-e) as u64)
        }
    }

    /// Absolute Frobenius `x -> x^p`.
    pub fn frobenius(&self, a: Fe) -> Fe {
        self.pow(a, self.inner.p as u64)
    }

    /// Solves `y^n = a`, returning the root with the smallest discrete log.
    pub fn nth_root(&self, a: Fe, n: u64) -> Option<Fe> {
        if a.0 == 0 {
            return Some(Fe(0));
        }
        let order = (self.inner.q - 1) as u64;
        let l = self.inner.log[a.0 as usize] as u64;
        let g = gcd_u64(n % order.max(1), order);
        let g = if g == 0 { order } else { g };
        if l % g != 0 {
            return None;
        }
        // n' m = l' mod order'
        let (n1, l1, o1) = ((n / g) % (order / g).max(1), l / g, order / g);
        if o1 == 1 {
            return Some(Fe(self.inner.exp[0]));
        }
        let m = (l1 as u128 * mod_inverse(n1, o1)? as u128 % o1 as u128) as u64;
        Some(Fe(self.inner.exp[m as usize]))
    }

    pub fn sqrt(&self, a: Fe) -> Option<Fe> {
        self.nth_root(a, 2)
    }

    /// Inverse Frobenius; always defined because finite fields are perfect.
    pub fn pth_root(&self, a: Fe) -> Fe {
        self.pow(a, (self.inner.q / self.inner.p) as u64)
    }

    pub fn is_square(&self, a: Fe) -> bool {
        self.sqrt(a).is_some()
    }

    pub fn multiplicative_order(&self, a: Fe) -> Option<u64> {
        if a.0 == 0 {
            return None;
        }
        let n = (self.inner.q - 1) as u64;
        let l = self.inner.log[a.0 as usize] as u64;
        if l == 0 {
            return Some(1);
        }
        Some(n / gcd_u64(l, n))
    }

    /// All elements in packed (coefficient-lexicographic) order.
    pub fn elements(&self) -> impl Iterator<Item = Fe> + '_ {
        (0..self.inner.q).map(Fe)
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Fe {
        Fe(rng.gen_range(0..self.inner.q))
    }

    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> Fe {
        Fe(rng.gen_range(1..self.inner.q))
    }

    /// Smallest element of multiplicative order `q - 1`.
    pub fn primitive_element(&self) -> Fe {
        let q = self.inner.q as u64;
        if q == 2 {
            return Fe(1);
        }
        let n = q - 1;
        let divs = prime_divisors(n);
        self.elements()
            .skip(1)
            .find(|&g| divs.iter().all(|&l| self.pow(g, n / l) != Fe(1)))
            .expect("multiplicative group is cyclic")
    }

    /// Evaluates a polynomial with coefficients in this field.
    pub fn eval_poly(&self, coeffs: &[Fe], x: Fe) -> Fe {
        coeffs
            .iter()
            .rev()
            .fold(Fe(0), |acc, &c| self.add(self.mul(acc, x), c))
    }

    /// Subfield test: `F_{p^k}` sits inside `F_{p^m}` iff `k | m`.
    pub fn is_subfield_of(&self, target: &FiniteField) -> bool {
        self.inner.p == target.inner.p && target.inner.k % self.inner.k == 0
    }

    /// Embedding into `target` sending `x` to the smallest root of this
    /// field's defining polynomial.
    pub fn embedding_into(&self, target: &FiniteField) -> Result<Embedding, FieldError> {
        if self.inner.p != target.inner.p {
            return Err(FieldError::CharacteristicMismatch(
                self.inner.p,
                target.inner.p,
            ));
        }
        if target.inner.k % self.inner.k != 0 {
            return Err(FieldError::NotSubfield {
                p: self.inner.p,
                from: self.inner.k,
                to: target.inner.k,
            });
        }
        let modulus: Vec<Fe> = self.inner.modulus.iter().map(|&c| Fe(c)).collect();
        let root = if self == target {
            self.gen()
        } else {
            target
                .elements()
                .find(|&r| target.eval_poly(&modulus, r).is_zero())
                .expect("a subfield's defining polynomial splits in the extension")
        };
        let powers = (0..self.inner.k).scan(Fe(1), |acc, _| {
            let cur = *acc;
            *acc = target.mul(*acc, root);
            Some(cur)
        });
        Ok(Embedding {
            source: self.clone(),
            target: target.clone(),
            basis_images: powers.collect(),
        })
    }

    /// Parses the `[c0,c1,...]` element syntax.
    pub fn parse_element(&self, s: &str) -> Result<Fe, FieldError> {
        let t = s.trim();
        let body = t
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| FieldError::BadElement(s.to_string()))?;
        let coeffs: Result<Vec<u32>, _> = body
            .split(',')
            .filter(|x| !x.trim().is_empty())
            .map(|x| x.trim().parse::<u32>())
            .collect();
        self.from_coeffs(&coeffs.map_err(|_| FieldError::BadElement(s.to_string()))?)
    }

    /// `[c0,c1,...]` with trailing zeros kept, one entry per basis vector.
    pub fn format_element(&self, a: Fe) -> String {
        let c: Vec<String> = self.coeffs(a).iter().map(|c| c.to_string()).collect();
        format!("[{}]", c.join(","))
    }

    /// Compact human-readable form: integers for the prime subfield,
    /// otherwise a polynomial in `x`.
    pub fn display(&self, a: Fe) -> String {
        if let Some(n) = self.as_prime_field(a) {
            return n.to_string();
        }
        let mut parts = Vec::new();
        for (i, c) in self.coeffs(a).iter().enumerate().rev() {
            if *c == 0 {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "x".to_string(),
                _ => format!("x^{i}"),
            };
            parts.push(match (*c, i) {
                (c, 0) => c.to_string(),
                (1, _) => mono,
                (c, _) => format!("{c}{mono}"),
            });
        }
        parts.join("+")
    }

    pub fn descriptor(&self) -> FieldDescriptor {
        FieldDescriptor {
            p: self.inner.p,
            k: self.inner.k,
            modulus: self.inner.modulus.clone(),
        }
    }
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let qt = old_r / r;
        (old_r, r) = (r, old_r - qt * r);
        (old_s, s) = (s, old_s - qt * s);
    }
    (old_r == 1).then(|| old_s.rem_euclid(m as i128) as u64)
}

/// JSON form `{"p":…, "k":…, "modulus":[…]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDescriptor {
    pub p: u32,
    pub k: u32,
    pub modulus: Vec<u32>,
}

impl FieldDescriptor {
    pub fn to_field(&self) -> Result<FiniteField, FieldError> {
        if self.modulus.len() != self.k as usize + 1 {
            return Err(FieldError::BadModulus);
        }
        FiniteField::from_modulus(self.p as u64, &self.modulus)
    }
}

/// A fixed ring embedding `F_{p^k} -> F_{p^m}`.
#[derive(Clone, Debug)]
pub struct Embedding {
    source: FiniteField,
    target: FiniteField,
    basis_images: Vec<Fe>,
}

impl Embedding {
    pub fn source(&self) -> &FiniteField {
        &self.source
    }

    pub fn target(&self) -> &FiniteField {
        &self.target
    }

    pub fn apply(&self, a: Fe) -> Fe {
        let t = &self.target;
        let mut acc = Fe(0);
        for (c, img) in self.source.coeffs(a).into_iter().zip(&self.basis_images) {
            if c != 0 {
                acc = t.add(acc, t.mul(t.from_int(c as i64), *img));
            }
        }
        acc
    }
}

/// Image of `x` under the canonical embedding into `target`.
pub fn embed(x: Fe, source: &FiniteField, target: &FiniteField) -> Result<Fe, FieldError> {
    Ok(source.embedding_into(target)?.apply(x))
}

/// Conway polynomials for the small fields whose generators appear in
/// published tables (`alpha_r` there denotes a root of these).
pub fn conway_polynomial(p: u32, k: u32) -> Option<Vec<u32>> {
    let c: &[u32] = match (p, k) {
        (_, 1) => return None,
        (2, 2) => &[1, 1, 1],
        (2, 3) => &[1, 1, 0, 1],
        (2, 4) => &[1, 1, 0, 0, 1],
        (2, 5) => &[1, 0, 1, 0, 0, 1],
        (2, 6) => &[1, 1, 0, 1, 1, 0, 1],
        (3, 2) => &[2, 2, 1],
        (3, 3) => &[1, 2, 0, 1],
        (3, 4) => &[2, 0, 0, 2, 1],
        (5, 2) => &[2, 4, 1],
        (5, 3) => &[3, 3, 0, 1],
        (7, 2) => &[3, 6, 1],
        (11, 2) => &[2, 7, 1],
        (13, 2) => &[2, 12, 1],
        _ => return None,
    };
    Some(c.to_vec())
}

/// The distinguished generator `alpha_r` of `F_r^*`, as an element of
/// `field` (which must contain `F_r`). Uses the smallest root of the
/// Conway polynomial when one is tabulated, else the smallest primitive
/// element of `F_r` embedded into `field`.
pub fn alpha(r: u64, field: &FiniteField) -> Result<Fe, FieldError> {
    let (p, k) = prime_power(r).ok_or(FieldError::NotPrime(r))?;
    if p != field.characteristic() {
        return Err(FieldError::CharacteristicMismatch(
            p,
            field.characteristic(),
        ));
    }
    if field.degree() % k != 0 {
        return Err(FieldError::NotSubfield {
            p,
            from: k,
            to: field.degree(),
        });
    }
    let sub = make_field(p as u64, k)?;
    if k == 1 {
        return embed(sub.primitive_element(), &sub, field);
    }
    match conway_polynomial(p, k) {
        Some(c) => {
            let cp: Vec<Fe> = c.iter().map(|&x| Fe(x)).collect();
            // roots of the Conway polynomial inside F_r, then embed
            let root = sub
                .elements()
                .find(|&r| sub.eval_poly(&cp, r).is_zero())
                .ok_or(FieldError::BadModulus)?;
            embed(root, &sub, field)
        }
        None => embed(sub.primitive_element(), &sub, field),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn prime_field_f2() {
        let f = make_field(2, 1).unwrap();
        assert_eq!(f.modulus(), &[0, 1]);
        assert_eq!(f.order(), 2);
    }

    #[test]
    fn f4_modulus_is_x2_x_1() {
        let f = make_field(2, 2).unwrap();
        assert_eq!(f.modulus(), &[1, 1, 1]);
    }

    #[test]
    fn f9_modulus_is_x2_plus_1() {
        // enumerate monic quadratics over F_3 and keep the ones without roots
        let irreducible: Vec<[u32; 2]> = (0..9u32)
            .map(|n| [n % 3, n / 3])
            .filter(|[c0, c1]| (0..3u32).all(|x| (x * x + c1 * x + c0) % 3 != 0))
            .collect();
        assert_eq!(irreducible[0], [1, 0]);
        let f = make_field(3, 2).unwrap();
        assert_eq!(f.modulus(), &[1, 0, 1]);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(make_field(4, 1).unwrap_err(), FieldError::NotPrime(4));
        assert_eq!(make_field(3, 0).unwrap_err(), FieldError::ZeroDegree);
        assert!(matches!(
            make_field(2, 21),
            Err(FieldError::TooLarge { .. })
        ));
        assert!(FiniteField::with_limit(3, 3, 26).is_err());
    }

    #[test]
    fn primitive_elements() {
        let f2 = make_field(2, 1).unwrap();
        assert_eq!(f2.primitive_element(), f2.one());
        let f4 = make_field(2, 2).unwrap();
        let g = f4.primitive_element();
        assert_eq!(g, f4.gen());
        assert_eq!(f4.pow(g, 3), f4.one());
        assert_ne!(g, f4.one());
        let f7 = make_field(7, 1).unwrap();
        // 2 has order 3, 3 has order 6
        assert_eq!(f7.multiplicative_order(f7.from_int(2)), Some(3));
        assert_eq!(f7.primitive_element(), f7.from_int(3));
    }

    #[test]
    fn embeddings() {
        let f2 = make_field(2, 1).unwrap();
        let f4 = make_field(2, 2).unwrap();
        let f8 = make_field(2, 3).unwrap();
        let f16 = make_field(2, 4).unwrap();
        assert_eq!(embed(f2.one(), &f2, &f8).unwrap(), f8.one());
        let img = embed(f4.gen(), &f4, &f16).unwrap();
        assert_eq!(f16.multiplicative_order(img), Some(3));
        assert!(matches!(
            embed(f4.gen(), &f4, &f8),
            Err(FieldError::NotSubfield { .. })
        ));
    }

    #[test]
    fn embedding_is_a_ring_homomorphism() {
        let f9 = make_field(3, 2).unwrap();
        let f81 = make_field(3, 4).unwrap();
        let e = f9.embedding_into(&f81).unwrap();
        for a in f9.elements() {
            for b in f9.elements() {
                assert_eq!(e.apply(f9.add(a, b)), f81.add(e.apply(a), e.apply(b)));
                assert_eq!(e.apply(f9.mul(a, b)), f81.mul(e.apply(a), e.apply(b)));
            }
        }
    }

    #[test]
    fn fermat_and_frobenius() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (p, k) in [
            (2, 1),
            (3, 1),
            (2, 2),
            (5, 1),
            (7, 1),
            (2, 3),
            (3, 2),
            (5, 2),
        ] {
            let f = make_field(p, k).unwrap();
            let q = f.order() as u64;
            for _ in 0..50 {
                let a = f.random(&mut rng);
                let b = f.random(&mut rng);
                assert_eq!(f.pow(a, q), a);
                assert_eq!(
                    f.frobenius(f.add(a, b)),
                    f.add(f.frobenius(a), f.frobenius(b))
                );
                assert_eq!(
                    f.frobenius(f.mul(a, b)),
                    f.mul(f.frobenius(a), f.frobenius(b))
                );
                let mut x = a;
                for _ in 0..k {
                    x = f.frobenius(x);
                }
                assert_eq!(x, a);
                assert_eq!(f.frobenius(f.pth_root(a)), a);
            }
        }
    }

    #[test]
    fn element_text_format() {
        let f9 = make_field(3, 2).unwrap();
        let a = f9.from_coeffs(&[2, 1]).unwrap();
        assert_eq!(f9.format_element(a), "[2,1]");
        assert_eq!(f9.parse_element("[2,1]").unwrap(), a);
        assert_eq!(f9.parse_element("[2]").unwrap(), f9.from_int(2));
        assert!(f9.parse_element("[3,0]").is_err());
        let d = f9.descriptor();
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(json, r#"{"p":3,"k":2,"modulus":[1,0,1]}"#);
        let back: FieldDescriptor = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_field().unwrap(), f9);
    }

    #[test]
    fn roots_and_alpha() {
        let f9 = make_field(3, 2).unwrap();
        let a9 = alpha(9, &f9).unwrap();
        assert_eq!(f9.multiplicative_order(a9), Some(8));
        let cp = [f9.from_int(2), f9.from_int(2), f9.one()];
        assert!(f9.eval_poly(&cp, a9).is_zero());
        let f16 = make_field(2, 4).unwrap();
        let a4 = alpha(4, &f16).unwrap();
        assert_eq!(f16.multiplicative_order(a4), Some(3));
        for a in f9.elements() {
            let s = f9.mul(a, a);
            let r = f9.sqrt(s).unwrap();
            assert_eq!(f9.mul(r, r), s);
            let c = f9.pow(a, 3);
            assert_eq!(f9.pow(f9.nth_root(c, 3).unwrap(), 3), c);
        }
    }
}
