//! Sparse multivariate polynomials over the rationals.
//!
//! Generators are symbols and opaque transcendental atoms (`ln(x)`,
//! `exp(t)`, function atoms, radicals). Monomials are ordered
//! lexicographically with the largest generator most significant, so the
//! last entry of a [`Poly`] is its leading term.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use super::canon::RatFunc;
use super::{Func, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GenKind {
    Sym(Arc<str>),
    Func(Func, RatFunc),
    /// `radicand^(1/index)`; powers at or above `index` are reduced.
    Root(RatFunc, u32),
    Atom(Arc<str>, Vec<u32>, Vec<RatFunc>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gen(Arc<GenKind>);

impl Gen {
    pub fn new(kind: GenKind) -> Gen {
        Gen(Arc::new(kind))
    }

    pub fn sym(name: &str) -> Gen {
        Gen::new(GenKind::Sym(Arc::from(name)))
    }

    pub fn kind(&self) -> &GenKind {
        &self.0
    }

    pub fn sym_name(&self) -> Option<&str> {
        match self.kind() {
            GenKind::Sym(s) => Some(s),
            _ => None,
        }
    }
}

/// Power product; entries sorted by generator, exponents positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(Gen, u32)>);

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let mut a = self.0.iter().rev();
        let mut b = other.0.iter().rev();
        loop {
            match (a.next(), b.next()) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((ga, ea)), Some((gb, eb))) => match ga.cmp(gb) {
                    Ordering::Equal => match ea.cmp(eb) {
                        Ordering::Equal => continue,
                        o => return o,
                    },
                    o => return o,
                },
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Monomial {
    pub fn one() -> Monomial {
        Monomial(Vec::new())
    }

    pub fn gen(g: Gen, e: u32) -> Monomial {
        if e == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(g, e)])
        }
    }

    pub fn factors(&self) -> &[(Gen, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponent(&self, g: &Gen) -> u32 {
        self.0
            .binary_search_by(|(h, _)| h.cmp(g))
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((self.0[i].0.clone(), self.0[i].1 + other.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for (g, e) in &self.0 {
            if j < other.0.len() && other.0[j].0 < *g {
                return None;
            }
            if j < other.0.len() && other.0[j].0 == *g {
                let f = other.0[j].1;
                j += 1;
                match e.cmp(&f) {
                    Ordering::Less => return None,
                    Ordering::Equal => {}
                    Ordering::Greater => out.push((g.clone(), e - f)),
                }
            } else {
                out.push((g.clone(), *e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    /// Splits off the power of `g`.
    pub fn split(&self, g: &Gen) -> (u32, Monomial) {
        let mut rest = self.0.clone();
        match rest.binary_search_by(|(h, _)| h.cmp(g)) {
            Ok(i) => {
                let e = rest.remove(i).1;
                (e, Monomial(rest))
            }
            Err(_) => (0, Monomial(rest)),
        }
    }

    pub fn max_gen(&self) -> Option<&Gen> {
        self.0.last().map(|(g, _)| g)
    }

    fn min_with(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .filter_map(|(g, e)| {
                    let f = other.exponent(g);
                    (f > 0).then(|| (g.clone(), (*e).min(f)))
                })
                .collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn one() -> Poly {
        Poly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Poly {
        Poly::term(Monomial::one(), c)
    }

    pub fn term(m: Monomial, c: Rational) -> Poly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn gen(g: Gen) -> Poly {
        Poly::term(Monomial::gen(g, 1), Rational::one())
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn max_gen(&self) -> Option<&Gen> {
        self.terms.keys().filter_map(|m| m.max_gen()).max()
    }

    pub fn gens(&self) -> Vec<Gen> {
        let mut out: Vec<Gen> = self
            .terms
            .keys()
            .flat_map(|m| m.0.iter().map(|(g, _)| g.clone()))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }

    pub fn scale(&self, k: &Rational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn mul_term(&self, m: &Monomial, k: &Rational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(n, c)| (n.mul(m), c * k)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            for (n, d) in &other.terms {
                out.add_term(m.mul(n), c * d);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut result = Poly::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn degree_in(&self, g: &Gen) -> u32 {
        self.terms.keys().map(|m| m.exponent(g)).max().unwrap_or(0)
    }

    /// View as a univariate polynomial in `g`.
    pub fn coeffs_in(&self, g: &Gen) -> BTreeMap<u32, Poly> {
        let mut out: BTreeMap<u32, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (e, rest) = m.split(g);
            out.entry(e).or_default().add_term(rest, c.clone());
        }
        out
    }

    /// Exact quotient `self / d`, or `None` if `d` does not divide `self`.
    pub fn exact_div(&self, d: &Poly) -> Option<Poly> {
        let (lm_d, lc_d) = d.leading()?;
        if let Some(c) = d.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        let mut r = self.clone();
        let mut q = Poly::zero();
        while let Some((lm_r, lc_r)) = r.leading() {
            let m = lm_r.div(lm_d)?;
            let c = lc_r / lc_d;
            r = r.sub(&d.mul_term(&m, &c));
            q.add_term(m, c);
        }
        Some(q)
    }

    /// Scales so the leading coefficient is one.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            Some((_, c)) if !c.is_one() => self.scale(&c.recip()),
            _ => self.clone(),
        }
    }

    pub fn is_single_term(&self) -> bool {
        self.terms.len() == 1
    }

    /// Coefficients of `self` viewed as a polynomial in `outer`, each free of `outer`.
    fn coeffs_over(&self, outer: &[Gen]) -> Vec<Poly> {
        let mut out: BTreeMap<Monomial, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (key, rest): (Vec<_>, Vec<_>) = m.0.iter().cloned().partition(|(g, _)| outer.contains(g));
            out.entry(Monomial(key)).or_default().add_term(Monomial(rest), c.clone());
        }
        out.into_values().collect()
    }

    fn content_in(&self, g: &Gen) -> Poly {
        let mut acc = Poly::zero();
        for c in self.coeffs_in(g).into_values() {
            acc = gcd(&acc, &c);
            if acc.is_one() {
                break;
            }
        }
        acc
    }

    fn primitive_in(&self, g: &Gen) -> Poly {
        let c = self.content_in(g);
        self.exact_div(&c).expect("content divides")
    }
}

fn monomial_gcd(m: &Monomial, p: &Poly) -> Poly {
    let mut acc = m.clone();
    for n in p.terms.keys() {
        acc = acc.min_with(n);
        if acc.is_one() {
            break;
        }
    }
    Poly::term(acc, Rational::one())
}

fn prem(a: &Poly, b: &Poly, v: &Gen) -> Poly {
    let db = b.degree_in(v);
    let lc_b = b.coeffs_in(v).remove(&db).unwrap_or_default();
    let mut r = a.clone();
    while !r.is_zero() {
        let dr = r.degree_in(v);
        if dr < db {
            break;
        }
        let lc_r = r.coeffs_in(v).remove(&dr).unwrap_or_default();
        let shift = Poly::term(Monomial::gen(v.clone(), dr - db), Rational::one());
        r = lc_b.mul(&r).sub(&lc_r.mul(&shift).mul(b));
    }
    r
}

/// Greatest common divisor over Q, normalized to be monic.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.as_constant().is_some() || b.as_constant().is_some() {
        return Poly::one();
    }
    if a.is_single_term() {
        return monomial_gcd(a.terms.keys().next().unwrap(), b);
    }
    if b.is_single_term() {
        return monomial_gcd(b.terms.keys().next().unwrap(), a);
    }
    // Generators present in only one argument: the gcd divides every
    // coefficient with respect to them.
    let (ga, gb) = (a.gens(), b.gens());
    for (p, q, gp, gq) in [(a, b, &ga, &gb), (b, a, &gb, &ga)] {
        let own: Vec<Gen> = gp.iter().filter(|g| !gq.contains(g)).cloned().collect();
        if !own.is_empty() {
            let mut coeffs = p.coeffs_over(&own);
            coeffs.sort_by_key(Poly::len);
            let mut acc = q.clone();
            for c in coeffs {
                acc = gcd(&acc, &c);
                if acc.is_one() {
                    break;
                }
            }
            return acc.monic();
        }
    }
    let v = a.max_gen().max(b.max_gen()).cloned().unwrap();
    let da = a.degree_in(&v);
    let db = b.degree_in(&v);
    if da == 0 {
        return gcd(a, &b.content_in(&v));
    }
    if db == 0 {
        return gcd(&a.content_in(&v), b);
    }
    let ca = a.content_in(&v);
    let cb = b.content_in(&v);
    let c = gcd(&ca, &cb);
    let mut f = a.exact_div(&ca).expect("content divides");
    let mut g = b.exact_div(&cb).expect("content divides");
    if f.degree_in(&v) < g.degree_in(&v) {
        std::mem::swap(&mut f, &mut g);
    }
    loop {
        let r = prem(&f, &g, &v);
        if r.is_zero() {
            break;
        }
        if r.degree_in(&v) == 0 {
            g = Poly::one();
            break;
        }
        f = g;
        g = r.primitive_in(&v).monic();
    }
    let g = if g.is_one() { g } else { g.primitive_in(&v) };
    c.mul(&g).monic()
}
