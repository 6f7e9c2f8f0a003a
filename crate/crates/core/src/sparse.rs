//! Sparse multivariate polynomials over a finite field with named
//! variables, multivariate rational functions, gcds, determinants and
//! resultants.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Embedding, Fe, FieldError, FiniteField};
use crate::poly::UPoly;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("variable lists differ")]
    ArityMismatch,
    #[error("coefficient fields differ")]
    FieldMismatch,
    #[error("variable {0} occurs in neither polynomial")]
    VariableAbsent(String),
    #[error("polynomial is not univariate")]
    NotUnivariate,
    #[error("zero polynomial")]
    Zero,
    #[error("division is not exact")]
    Inexact,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("malformed polynomial: {0}")]
    Parse(String),
}

/// Exponent vector ordered graded-lexicographically (first variable
/// largest).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Mono(pub Vec<u32>);

impl Mono {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl Ord for Mono {
    fn cmp(&self, o: &Self) -> Ordering {
        self.degree()
            .cmp(&o.degree())
            .then_with(|| self.0.cmp(&o.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Sparse polynomial: exponent vector -> nonzero coefficient.
#[derive(Clone, PartialEq, Eq)]
pub struct SparsePoly {
    field: FiniteField,
    vars: Arc<Vec<String>>,
    terms: BTreeMap<Mono, Fe>,
}

impl fmt::Debug for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

pub fn var_list(names: &[&str]) -> Arc<Vec<String>> {
    Arc::new(names.iter().map(|s| s.to_string()).collect())
}

impl SparsePoly {
    pub fn zero(field: &FiniteField, vars: &Arc<Vec<String>>) -> Self {
        SparsePoly {
            field: field.clone(),
            vars: vars.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(field: &FiniteField, vars: &Arc<Vec<String>>, c: Fe) -> Self {
        let mut p = Self::zero(field, vars);
        if !c.is_zero() {
            p.terms.insert(Mono(vec![0; vars.len()]), c);
        }
        p
    }

    pub fn one(field: &FiniteField, vars: &Arc<Vec<String>>) -> Self {
        Self::constant(field, vars, field.one())
    }

    pub fn from_int(field: &FiniteField, vars: &Arc<Vec<String>>, n: i64) -> Self {
        Self::constant(field, vars, field.from_int(n))
    }

    /// The `i`-th variable.
    pub fn var(field: &FiniteField, vars: &Arc<Vec<String>>, i: usize) -> Self {
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        Self::monomial(field, vars, e, field.one())
    }

    pub fn var_named(
        field: &FiniteField,
        vars: &Arc<Vec<String>>,
        name: &str,
    ) -> Result<Self, PolyError> {
        let i = vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| PolyError::UnknownVariable(name.into()))?;
        Ok(Self::var(field, vars, i))
    }

    pub fn monomial(field: &FiniteField, vars: &Arc<Vec<String>>, e: Vec<u32>, c: Fe) -> Self {
        assert_eq!(e.len(), vars.len());
        let mut p = Self::zero(field, vars);
        if !c.is_zero() {
            p.terms.insert(Mono(e), c);
        }
        p
    }

    pub fn from_terms(
        field: &FiniteField,
        vars: &Arc<Vec<String>>,
        terms: impl IntoIterator<Item = (Vec<u32>, Fe)>,
    ) -> Self {
        let mut p = Self::zero(field, vars);
        for (e, c) in terms {
            assert_eq!(e.len(), vars.len());
            p.add_term(Mono(e), c);
        }
        p
    }

    fn add_term(&mut self, m: Mono, c: Fe) {
        if c.is_zero() {
            return;
        }
        let f = &self.field;
        match self.terms.get_mut(&m) {
            Some(x) => {
                *x = f.add(*x, c);
                if x.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn field(&self) -> &FiniteField {
        &self.field
    }

    pub fn vars(&self) -> &Arc<Vec<String>> {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, name: &str) -> Result<usize, PolyError> {
        self.vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| PolyError::UnknownVariable(name.into()))
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Mono, &Fe)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, e: &[u32]) -> Fe {
        self.terms
            .get(&Mono(e.to_vec()))
            .copied()
            .unwrap_or(Fe::ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
            || (self.terms.len() == 1 && self.terms.keys().all(|m| m.degree() == 0))
    }

    pub fn constant_value(&self) -> Option<Fe> {
        if self.is_zero() {
            return Some(Fe::ZERO);
        }
        self.is_constant()
            .then(|| *self.terms.values().next().unwrap())
    }

    pub fn leading(&self) -> Option<(&Mono, Fe)> {
        self.terms.iter().next_back().map(|(m, c)| (m, *c))
    }

    pub fn lc(&self) -> Fe {
        self.leading().map(|(_, c)| c).unwrap_or(Fe::ZERO)
    }

    pub fn total_degree(&self) -> i64 {
        self.terms
            .keys()
            .map(|m| m.degree() as i64)
            .max()
            .unwrap_or(-1)
    }

    pub fn degree_in(&self, i: usize) -> i64 {
        self.terms.keys().map(|m| m.0[i] as i64).max().unwrap_or(-1)
    }

    /// Degree in a block of variables; `None` if not homogeneous there.
    pub fn homogeneous_degree(&self, block: &[usize]) -> Option<u32> {
        let mut deg = None;
        for m in self.terms.keys() {
            let d: u32 = block.iter().map(|&i| m.0[i]).sum();
            match deg {
                None => deg = Some(d),
                Some(e) if e != d => return None,
                _ => {}
            }
        }
        Some(deg.unwrap_or(0))
    }

    pub fn involves(&self, i: usize) -> bool {
        self.terms.keys().any(|m| m.0[i] > 0)
    }

    fn check(&self, o: &SparsePoly) {
        assert!(
            self.vars == o.vars || *self.vars == *o.vars,
            "variable lists differ"
        );
        assert!(self.field == o.field, "coefficient fields differ");
    }

    pub fn add(&self, o: &SparsePoly) -> SparsePoly {
        self.check(o);
        let mut r = self.clone();
        for (m, &c) in &o.terms {
            r.add_term(m.clone(), c);
        }
        r
    }

    pub fn sub(&self, o: &SparsePoly) -> SparsePoly {
        self.check(o);
        let mut r = self.clone();
        for (m, &c) in &o.terms {
            r.add_term(m.clone(), self.field.neg(c));
        }
        r
    }

    pub fn neg(&self) -> SparsePoly {
        let f = &self.field;
        SparsePoly {
            field: f.clone(),
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, &c)| (m.clone(), f.neg(c)))
                .collect(),
        }
    }

    pub fn scale(&self, a: Fe) -> SparsePoly {
        if a.is_zero() {
            return Self::zero(&self.field, &self.vars);
        }
        let f = &self.field;
        SparsePoly {
            field: f.clone(),
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, &c)| (m.clone(), f.mul(c, a)))
                .collect(),
        }
    }

    pub fn mul(&self, o: &SparsePoly) -> SparsePoly {
        self.check(o);
        let f = &self.field;
        let mut acc: std::collections::HashMap<Vec<u32>, Fe> = Default::default();
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &o.terms {
                let e: Vec<u32> = ma.0.iter().zip(&mb.0).map(|(x, y)| x + y).collect();
                let c = f.mul(ca, cb);
                let slot = acc.entry(e).or_insert(Fe::ZERO);
                *slot = f.add(*slot, c);
            }
        }
        SparsePoly {
            field: f.clone(),
            vars: self.vars.clone(),
            terms: acc
                .into_iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(e, c)| (Mono(e), c))
                .collect(),
        }
    }

    /// Multiplication by a monomial `c * x^e`.
    pub fn mul_term(&self, e: &[u32], c: Fe) -> SparsePoly {
        let f = &self.field;
        if c.is_zero() {
            return Self::zero(f, &self.vars);
        }
        SparsePoly {
            field: f.clone(),
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, &x)| {
                    (
                        Mono(m.0.iter().zip(e).map(|(a, b)| a + b).collect()),
                        f.mul(x, c),
                    )
                })
                .collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> SparsePoly {
        let mut r = Self::one(&self.field, &self.vars);
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(&b);
            }
            e >>= 1;
            if e > 0 {
                b = b.mul(&b);
            }
        }
        r
    }

    pub fn derivative(&self, i: usize) -> SparsePoly {
        let f = &self.field;
        let mut r = Self::zero(f, &self.vars);
        for (m, &c) in &self.terms {
            if m.0[i] == 0 {
                continue;
            }
            let k = f.from_int(m.0[i] as i64);
            let mut e = m.0.clone();
            e[i] -= 1;
            r.add_term(Mono(e), f.mul(c, k));
        }
        r
    }

    /// Full evaluation at a point of the coefficient field.
    pub fn eval(&self, x: &[Fe]) -> Fe {
        assert_eq!(x.len(), self.vars.len());
        let f = &self.field;
        let mut acc = Fe::ZERO;
        for (m, &c) in &self.terms {
            let mut t = c;
            for (&xi, &ei) in x.iter().zip(&m.0) {
                if ei > 0 {
                    t = f.mul(t, f.pow(xi, ei as u64));
                }
            }
            acc = f.add(acc, t);
        }
        acc
    }

    /// Moves coefficients along a field embedding.
    pub fn map(&self, emb: &Embedding) -> SparsePoly {
        SparsePoly {
            field: emb.target().clone(),
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, &c)| (m.clone(), emb.apply(c)))
                .collect(),
        }
    }

    /// Substitutes field values (in `target`, an extension of the
    /// coefficient field) for some variables; the others survive.
    pub fn specialize(
        &self,
        bindings: &[(usize, Fe)],
        target: &FiniteField,
    ) -> Result<SparsePoly, PolyError> {
        let emb = self.field.embedding_into(target)?;
        let t = target;
        let mut r = Self::zero(t, &self.vars);
        for (m, &c) in &self.terms {
            let mut coef = emb.apply(c);
            let mut e = m.0.clone();
            for &(i, v) in bindings {
                if e[i] > 0 {
                    coef = t.mul(coef, t.pow(v, e[i] as u64));
                    e[i] = 0;
                }
            }
            r.add_term(Mono(e), coef);
        }
        Ok(r)
    }

    pub fn specialize_named(
        &self,
        bindings: &[(&str, Fe)],
        target: &FiniteField,
    ) -> Result<SparsePoly, PolyError> {
        let b: Result<Vec<(usize, Fe)>, PolyError> = bindings
            .iter()
            .map(|(n, v)| Ok((self.var_index(n)?, *v)))
            .collect();
        self.specialize(&b?, target)
    }

    /// Substitutes polynomials (same ring) for variables simultaneously.
    pub fn substitute(&self, subs: &[(usize, SparsePoly)]) -> SparsePoly {
        let f = &self.field;
        let mut cache: Vec<Vec<SparsePoly>> = vec![Vec::new(); subs.len()];
        let mut r = Self::zero(f, &self.vars);
        for (m, &c) in &self.terms {
            let mut e = m.0.clone();
            let mut t = Self::one(f, &self.vars);
            for (k, (i, s)) in subs.iter().enumerate() {
                let d = e[*i] as usize;
                if d == 0 {
                    continue;
                }
                e[*i] = 0;
                let powers = &mut cache[k];
                if powers.is_empty() {
                    powers.push(Self::one(f, &self.vars));
                }
                while powers.len() <= d {
                    let next = powers.last().unwrap().mul(s);
                    powers.push(next);
                }
                t = t.mul(&powers[d]);
            }
            r = r.add(&t.mul_term(&e, c));
        }
        r
    }

    /// Rewrites into another variable list; variables missing from the new
    /// list must not occur.
    pub fn with_vars(&self, vars: &Arc<Vec<String>>) -> Result<SparsePoly, PolyError> {
        let map: Vec<Option<usize>> = self
            .vars
            .iter()
            .map(|v| vars.iter().position(|w| w == v))
            .collect();
        let mut r = Self::zero(&self.field, vars);
        for (m, &c) in &self.terms {
            let mut e = vec![0; vars.len()];
            for (i, &d) in m.0.iter().enumerate() {
                if d == 0 {
                    continue;
                }
                match map[i] {
                    Some(j) => e[j] += d,
                    None => return Err(PolyError::UnknownVariable(self.vars[i].clone())),
                }
            }
            r.add_term(Mono(e), c);
        }
        Ok(r)
    }

    /// Coefficients with respect to variable `i`: entry `k` multiplies `x_i^k`.
    pub fn coefficients_in(&self, i: usize) -> Vec<SparsePoly> {
        let d = self.degree_in(i).max(-1);
        let mut out = vec![Self::zero(&self.field, &self.vars); (d + 1) as usize];
        for (m, &c) in &self.terms {
            let k = m.0[i] as usize;
            let mut e = m.0.clone();
            e[i] = 0;
            out[k].terms.insert(Mono(e), c);
        }
        out
    }

    /// Converts a polynomial in at most variable `i` to a dense univariate.
    pub fn to_upoly(&self, i: usize) -> Result<UPoly, PolyError> {
        let mut c = vec![Fe::ZERO; (self.degree_in(i).max(0) + 1) as usize];
        for (m, &x) in &self.terms {
            if m.0.iter().enumerate().any(|(j, &e)| j != i && e > 0) {
                return Err(PolyError::NotUnivariate);
            }
            c[m.0[i] as usize] = x;
        }
        Ok(UPoly::new(&self.field, c))
    }

    pub fn from_upoly(p: &UPoly, vars: &Arc<Vec<String>>, i: usize) -> SparsePoly {
        let mut r = Self::zero(p.field(), vars);
        for (k, &c) in p.coeffs().iter().enumerate() {
            let mut e = vec![0; vars.len()];
            e[i] = k as u32;
            r.add_term(Mono(e), c);
        }
        r
    }

    /// Scales so that the grlex-leading coefficient is one.
    pub fn monic(&self) -> SparsePoly {
        match self.leading() {
            None => self.clone(),
            Some((_, c)) => self.scale(self.field.inv(c).unwrap()),
        }
    }

    /// Exact multivariate division; `None` when the remainder is nonzero.
    pub fn div_exact(&self, d: &SparsePoly) -> Option<SparsePoly> {
        self.check(d);
        assert!(!d.is_zero(), "division by zero polynomial");
        let f = &self.field;
        let (dm, dc) = d.leading().map(|(m, c)| (m.clone(), c)).unwrap();
        let dinv = f.inv(dc).unwrap();
        let mut r = self.clone();
        let mut q = Self::zero(f, &self.vars);
        while let Some((m, c)) = r.leading().map(|(m, c)| (m.clone(), c)) {
            if m.0.iter().zip(&dm.0).any(|(a, b)| a < b) {
                return None;
            }
            let e: Vec<u32> = m.0.iter().zip(&dm.0).map(|(a, b)| a - b).collect();
            let coef = f.mul(c, dinv);
            q.add_term(Mono(e.clone()), coef);
            r = r.sub(&d.mul_term(&e, coef));
        }
        Some(q)
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, o: &SparsePoly) -> SparsePoly {
        self.check(o);
        if self.is_zero() {
            return o.monic();
        }
        if o.is_zero() {
            return self.monic();
        }
        if self.is_constant() || o.is_constant() {
            return Self::one(&self.field, &self.vars);
        }
        let x = (0..self.nvars())
            .find(|&i| self.involves(i) || o.involves(i))
            .unwrap();
        let (a_has, b_has) = (self.involves(x), o.involves(x));
        if !a_has || !b_has {
            let (with, without) = if a_has { (self, o) } else { (o, self) };
            let mut g = without.clone();
            for c in with.coefficients_in(x) {
                if g.is_constant() {
                    break;
                }
                if !c.is_zero() {
                    g = g.gcd(&c);
                }
            }
            return g.monic();
        }
        let ca = self.content_in(x);
        let cb = o.content_in(x);
        let c = ca.gcd(&cb);
        let pa = self.div_exact(&ca).unwrap();
        let pb = o.div_exact(&cb).unwrap();
        let g = primitive_prs(pa, pb, x);
        c.mul(&g).monic()
    }

    /// Gcd of the coefficients with respect to variable `x`.
    pub fn content_in(&self, x: usize) -> SparsePoly {
        let mut g = Self::zero(&self.field, &self.vars);
        for c in self.coefficients_in(x) {
            if c.is_zero() {
                continue;
            }
            g = g.gcd(&c);
            if g.is_constant() {
                return Self::one(&self.field, &self.vars);
            }
        }
        g
    }

    fn primitive_part_in(&self, x: usize) -> SparsePoly {
        if self.is_zero() {
            return self.clone();
        }
        self.div_exact(&self.content_in(x)).unwrap()
    }

    /// Pseudo-remainder with respect to variable `x`.
    pub fn prem(&self, b: &SparsePoly, x: usize) -> SparsePoly {
        let db = b.degree_in(x);
        let lb = b.coefficients_in(x).pop().unwrap();
        let mut r = self.clone();
        while !r.is_zero() && r.degree_in(x) >= db {
            let dr = r.degree_in(x);
            let lr = r.coefficients_in(x).pop().unwrap();
            let mut e = vec![0; self.nvars()];
            e[x] = (dr - db) as u32;
            r = lb.mul(&r).sub(&lr.mul(&b.mul_term(&e, self.field.one())));
        }
        r
    }

    /// Homogenizes in a block of variables using the extra variable `h`
    /// (already present in the list), to total block degree `d`.
    pub fn homogenize(&self, block: &[usize], h: usize, d: u32) -> SparsePoly {
        let mut r = Self::zero(&self.field, &self.vars);
        for (m, &c) in &self.terms {
            let deg: u32 = block.iter().map(|&i| m.0[i]).sum();
            assert!(deg <= d, "degree exceeds homogenization degree");
            let mut e = m.0.clone();
            e[h] += d - deg;
            r.add_term(Mono(e), c);
        }
        r
    }

    /// Divides out the largest monomial dividing every term.
    pub fn remove_monomial_content(&self) -> (SparsePoly, Vec<u32>) {
        if self.is_zero() {
            return (self.clone(), vec![0; self.nvars()]);
        }
        let mut g: Vec<u32> = self.terms.keys().next().unwrap().0.clone();
        for m in self.terms.keys() {
            for (a, b) in g.iter_mut().zip(&m.0) {
                *a = (*a).min(*b);
            }
        }
        let terms = self
            .terms
            .iter()
            .map(|(m, &c)| (Mono(m.0.iter().zip(&g).map(|(a, b)| a - b).collect()), c))
            .collect();
        (
            SparsePoly {
                field: self.field.clone(),
                vars: self.vars.clone(),
                terms,
            },
            g,
        )
    }

    /// Sylvester resultant with respect to variable `x`.
    pub fn resultant(&self, o: &SparsePoly, x: usize) -> Result<SparsePoly, PolyError> {
        self.check(o);
        if !self.involves(x) && !o.involves(x) {
            return Err(PolyError::VariableAbsent(self.vars[x].clone()));
        }
        let m = self.degree_in(x).max(0) as usize;
        let n = o.degree_in(x).max(0) as usize;
        let zero = Self::zero(&self.field, &self.vars);
        let a = self.coefficients_in(x);
        let b = o.coefficients_in(x);
        let size = m + n;
        if size == 0 {
            return Ok(Self::one(&self.field, &self.vars));
        }
        let mut mat = vec![vec![zero.clone(); size]; size];
        for i in 0..n {
            for (k, c) in a.iter().enumerate() {
                mat[i][i + m - k] = c.clone();
            }
        }
        for i in 0..m {
            for (k, c) in b.iter().enumerate() {
                mat[n + i][i + n - k] = c.clone();
            }
        }
        Ok(determinant(mat))
    }

    pub fn to_json(&self) -> Vec<TermJson> {
        self.terms
            .iter()
            .rev()
            .map(|(m, &c)| TermJson {
                e: m.0.clone(),
                c: self.field.coeffs(c),
            })
            .collect()
    }

    pub fn from_json(
        field: &FiniteField,
        vars: &Arc<Vec<String>>,
        terms: &[TermJson],
    ) -> Result<SparsePoly, PolyError> {
        let mut p = Self::zero(field, vars);
        for t in terms {
            if t.e.len() != vars.len() {
                return Err(PolyError::ArityMismatch);
            }
            p.add_term(Mono(t.e.clone()), field.from_coeffs(&t.c)?);
        }
        Ok(p)
    }
}

fn primitive_prs(a: SparsePoly, b: SparsePoly, x: usize) -> SparsePoly {
    let (mut a, mut b) = if a.degree_in(x) >= b.degree_in(x) {
        (a, b)
    } else {
        (b, a)
    };
    loop {
        let r = a.prem(&b, x);
        if r.is_zero() {
            return b.primitive_part_in(x);
        }
        if !r.involves(x) {
            return SparsePoly::one(&a.field, &a.vars);
        }
        a = b;
        b = r.primitive_part_in(x);
    }
}

/// Fraction-free (Bareiss) determinant of a square matrix of polynomials.
pub fn determinant(mut m: Vec<Vec<SparsePoly>>) -> SparsePoly {
    let n = m.len();
    assert!(n > 0 && m.iter().all(|r| r.len() == n));
    let field = m[0][0].field.clone();
    let vars = m[0][0].vars.clone();
    let mut sign = false;
    let mut prev = SparsePoly::one(&field, &vars);
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign = !sign;
                }
                None => return SparsePoly::zero(&field, &vars),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = m[i][j].mul(&m[k][k]).sub(&m[i][k].mul(&m[k][j]));
                m[i][j] = t.div_exact(&prev).expect("Bareiss division is exact");
            }
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if sign {
        d.neg()
    } else {
        d
    }
}

/// One term of the JSON polynomial form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub e: Vec<u32>,
    pub c: Vec<u32>,
}

impl fmt::Display for SparsePoly {
    /// `coef*u0^a*u1^b + ...` in decreasing grlex order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let fld = &self.field;
        let mut first = true;
        for (m, &c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let vars: Vec<String> =
                m.0.iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| {
                        if e == 1 {
                            self.vars[i].clone()
                        } else {
                            format!("{}^{}", self.vars[i], e)
                        }
                    })
                    .collect();
            let coef = if fld.degree() == 1 {
                fld.display(c)
            } else {
                fld.format_element(c)
            };
            if vars.is_empty() {
                write!(f, "{coef}")?;
            } else if c == fld.one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{coef}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Quotient of sparse polynomials in lowest terms, denominator monic.
#[derive(Clone, PartialEq, Eq)]
pub struct RationalFunction {
    num: SparsePoly,
    den: SparsePoly,
}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.constant_value() == Some(self.den.field.one()) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl RationalFunction {
    pub fn new(num: SparsePoly, den: SparsePoly) -> Result<Self, PolyError> {
        if den.is_zero() {
            return Err(PolyError::Zero);
        }
        if num.is_zero() {
            let one = SparsePoly::one(&den.field, &den.vars);
            return Ok(RationalFunction { num, den: one });
        }
        let g = num.gcd(&den);
        let num = num.div_exact(&g).unwrap();
        let den = den.div_exact(&g).unwrap();
        let inv = den.field.inv(den.lc()).unwrap();
        Ok(RationalFunction {
            num: num.scale(inv),
            den: den.scale(inv),
        })
    }

    pub fn from_poly(p: SparsePoly) -> Self {
        let one = SparsePoly::one(&p.field, &p.vars);
        RationalFunction { num: p, den: one }
    }

    pub fn num(&self) -> &SparsePoly {
        &self.num
    }

    pub fn den(&self) -> &SparsePoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(
            self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            self.den.mul(&o.den),
        )
        .unwrap()
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        RationalFunction {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(self.num.mul(&o.num), self.den.mul(&o.den)).unwrap()
    }

    pub fn div(&self, o: &Self) -> Result<Self, PolyError> {
        Self::new(self.num.mul(&o.den), self.den.mul(&o.num))
    }

    /// Substitutes values; errors if the denominator vanishes.
    pub fn specialize(
        &self,
        bindings: &[(usize, Fe)],
        target: &FiniteField,
    ) -> Result<Self, PolyError> {
        Self::new(
            self.num.specialize(bindings, target)?,
            self.den.specialize(bindings, target)?,
        )
    }

    /// Returns the polynomial if the denominator is a unit.
    pub fn as_poly(&self) -> Option<SparsePoly> {
        let c = self.den.constant_value()?;
        Some(self.num.scale(self.den.field.inv(c)?))
    }
}
