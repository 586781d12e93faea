//! Exact arithmetic in the cyclotomic field Q(ζ_N).
//!
//! Values are stored as an integer coefficient vector over the power basis
//! 1, ζ, …, ζ^{φ(N)-1} together with one positive common denominator, kept in
//! lowest terms. Reduction is modulo the cyclotomic polynomial Φ_N, so a value
//! is zero exactly when every coefficient is zero.

use crate::int::Int;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum CycError {
    #[error("cyclotomic orders differ ({0} vs {1})")]
    OrderMismatch(u32, u32),
    #[error("division by zero")]
    DivisionByZero,
    #[error("malformed cyclotomic number: {0}")]
    Parse(String),
}

/// Reduction data for one cyclotomic order. One instance per order is created
/// lazily and lives for the rest of the process.
#[derive(Debug)]
pub struct CycloCtx {
    pub order: u32,
    pub phi: usize,
    /// Φ_N, ascending coefficients, monic of degree `phi`.
    pub poly: Vec<i64>,
    /// ζ^k reduced into the power basis, for 0 ≤ k < N.
    powers: Vec<Vec<i64>>,
}

fn cyclotomic_poly(n: u32, memo: &mut HashMap<u32, Vec<i64>>) -> Vec<i64> {
    if let Some(p) = memo.get(&n) {
        return p.clone();
    }
    // x^n - 1
    let mut p = vec![0i64; n as usize + 1];
    p[0] = -1;
    p[n as usize] = 1;
    for d in 1..n {
        if n % d == 0 {
            let q = cyclotomic_poly(d, memo);
            p = div_monic(&p, &q);
        }
    }
    memo.insert(n, p.clone());
    p
}

/// Exact quotient of integer polynomials, divisor monic.
fn div_monic(a: &[i64], b: &[i64]) -> Vec<i64> {
    let db = b.len() - 1;
    let mut r = a.to_vec();
    let mut q = vec![0i64; a.len() - db];
    for k in (0..q.len()).rev() {
        let c = r[k + db];
        q[k] = c;
        if c != 0 {
            for (t, bt) in b.iter().enumerate() {
                r[k + t] -= c * bt;
            }
        }
    }
    debug_assert!(r.iter().all(|&c| c == 0));
    q
}

impl CycloCtx {
    fn build(order: u32) -> CycloCtx {
        assert!(order >= 1);
        let mut memo = HashMap::new();
        let poly = cyclotomic_poly(order, &mut memo);
        let phi = poly.len() - 1;
        let mut powers = Vec::with_capacity(order as usize);
        let mut cur = vec![0i64; phi];
        cur[0] = 1;
        for _ in 0..order {
            powers.push(cur.clone());
            // multiply by ζ
            let top = cur[phi - 1];
            for t in (1..phi).rev() {
                cur[t] = cur[t - 1];
            }
            cur[0] = 0;
            if top != 0 {
                for t in 0..phi {
                    cur[t] -= top * poly[t];
                }
            }
        }
        CycloCtx {
            order,
            phi,
            poly,
            powers,
        }
    }

    /// Shared context for order `n`.
    pub fn get(order: u32) -> &'static CycloCtx {
        static CACHE: OnceLock<Mutex<HashMap<u32, &'static CycloCtx>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("cyclotomic cache poisoned");
        guard
            .entry(order)
            .or_insert_with(|| Box::leak(Box::new(CycloCtx::build(order))))
    }

    fn power(&self, k: i64) -> &[i64] {
        let n = self.order as i64;
        &self.powers[k.rem_euclid(n) as usize]
    }
}

#[derive(Clone)]
pub struct CycNumber {
    ctx: &'static CycloCtx,
    num: Vec<Int>,
    den: Int,
}

impl CycNumber {
    pub fn zero(order: u32) -> CycNumber {
        let ctx = CycloCtx::get(order);
        CycNumber {
            ctx,
            num: vec![Int::ZERO; ctx.phi],
            den: Int::ONE,
        }
    }

    pub fn one(order: u32) -> CycNumber {
        CycNumber::from_int(order, 1)
    }

    pub fn from_int(order: u32, v: i64) -> CycNumber {
        let mut z = CycNumber::zero(order);
        z.num[0] = Int::from(v);
        z
    }

    pub fn from_ratio(order: u32, p: i64, q: i64) -> CycNumber {
        assert!(q != 0, "zero denominator");
        let (p, q) = if q < 0 { (-p, -q) } else { (p, q) };
        let mut z = CycNumber::zero(order);
        z.num[0] = Int::from(p);
        z.den = Int::from(q);
        z.normalize();
        z
    }

    /// ζ_N^k for any integer k.
    pub fn zeta_pow(order: u32, k: i64) -> CycNumber {
        let ctx = CycloCtx::get(order);
        CycNumber {
            ctx,
            num: ctx.power(k).iter().map(|&c| Int::from(c)).collect(),
            den: Int::ONE,
        }
    }

    /// Build from rational coefficients `(numerator, denominator)` in the power basis.
    pub fn from_rationals(order: u32, coeffs: &[(Int, Int)]) -> Result<CycNumber, CycError> {
        let ctx = CycloCtx::get(order);
        if coeffs.len() > ctx.phi {
            return Err(CycError::Parse(format!(
                "{} coefficients given, degree of Φ_{} is {}",
                coeffs.len(),
                order,
                ctx.phi
            )));
        }
        let mut acc = CycNumber::zero(order);
        for (k, (p, q)) in coeffs.iter().enumerate() {
            if q.is_zero() {
                return Err(CycError::Parse("zero denominator".into()));
            }
            let mut term = CycNumber::zero(order);
            term.num[k] = p.clone();
            term.den = q.clone();
            if term.den.is_negative() {
                term.den = term.den.neg();
                term.num[k] = term.num[k].neg();
            }
            term.normalize();
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    pub fn order(&self) -> u32 {
        self.ctx.order
    }

    pub fn ctx(&self) -> &'static CycloCtx {
        self.ctx
    }

    /// Reduced rational coefficients `(p, q)` with `q > 0`.
    pub fn coeffs(&self) -> Vec<(Int, Int)> {
        self.num
            .iter()
            .map(|c| {
                if c.is_zero() {
                    (Int::ZERO, Int::ONE)
                } else {
                    let g = c.gcd(&self.den);
                    (c.div_exact(&g), self.den.div_exact(&g))
                }
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(Int::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num[0].is_one() && self.num[1..].iter().all(Int::is_zero)
    }

    /// Rational value if the number lies in Q.
    pub fn as_rational(&self) -> Option<(Int, Int)> {
        if self.num[1..].iter().all(Int::is_zero) {
            Some(self.coeffs()[0].clone())
        } else {
            None
        }
    }

    fn normalize(&mut self) {
        if self.den.is_one() {
            return;
        }
        let mut g = self.den.clone();
        for c in &self.num {
            if !c.is_zero() {
                g = g.gcd(c);
                if g.is_one() {
                    return;
                }
            }
        }
        if self.is_zero() {
            self.den = Int::ONE;
            return;
        }
        if !g.is_one() {
            for c in self.num.iter_mut() {
                if !c.is_zero() {
                    *c = c.div_exact(&g);
                }
            }
            self.den = self.den.div_exact(&g);
        }
    }

    fn check(&self, o: &CycNumber) -> Result<(), CycError> {
        if self.ctx.order != o.ctx.order {
            Err(CycError::OrderMismatch(self.ctx.order, o.ctx.order))
        } else {
            Ok(())
        }
    }

    fn assert_same(&self, o: &CycNumber) {
        if let Err(e) = self.check(o) {
            panic!("{e}");
        }
    }

    pub fn add(&self, o: &CycNumber) -> CycNumber {
        self.assert_same(o);
        self.lin_comb(o, false)
    }

    pub fn sub(&self, o: &CycNumber) -> CycNumber {
        self.assert_same(o);
        self.lin_comb(o, true)
    }

    fn lin_comb(&self, o: &CycNumber, negate: bool) -> CycNumber {
        if o.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return if negate { o.neg() } else { o.clone() };
        }
        let mut num = Vec::with_capacity(self.ctx.phi);
        if self.den == o.den {
            for (a, b) in self.num.iter().zip(&o.num) {
                num.push(if negate { a.sub(b) } else { a.add(b) });
            }
            let mut r = CycNumber {
                ctx: self.ctx,
                num,
                den: self.den.clone(),
            };
            r.normalize();
            return r;
        }
        let g = self.den.gcd(&o.den);
        let fa = o.den.div_exact(&g);
        let fb = self.den.div_exact(&g);
        for (a, b) in self.num.iter().zip(&o.num) {
            let x = a.mul(&fa);
            let y = b.mul(&fb);
            num.push(if negate { x.sub(&y) } else { x.add(&y) });
        }
        let mut r = CycNumber {
            ctx: self.ctx,
            num,
            den: self.den.mul(&fa),
        };
        r.normalize();
        r
    }

    pub fn neg(&self) -> CycNumber {
        CycNumber {
            ctx: self.ctx,
            num: self.num.iter().map(Int::neg).collect(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, o: &CycNumber) -> CycNumber {
        self.assert_same(o);
        let phi = self.ctx.phi;
        if self.is_zero() || o.is_zero() {
            return CycNumber::zero(self.ctx.order);
        }
        let mut raw = vec![Int::ZERO; 2 * phi - 1];
        for (i, a) in self.num.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.num.iter().enumerate() {
                if !b.is_zero() {
                    raw[i + j].add_mul(a, b);
                }
            }
        }
        let mut num: Vec<Int> = raw[..phi].to_vec();
        for (k, c) in raw.iter().enumerate().skip(phi) {
            if c.is_zero() {
                continue;
            }
            for (t, &p) in self.ctx.power(k as i64).iter().enumerate() {
                if p != 0 {
                    num[t] = num[t].add(&c.mul_i64(p));
                }
            }
        }
        let mut r = CycNumber {
            ctx: self.ctx,
            num,
            den: self.den.mul(&o.den),
        };
        r.normalize();
        r
    }

    /// Multiply by ζ^k.
    pub fn mul_zeta_pow(&self, k: i64) -> CycNumber {
        let n = self.ctx.order as i64;
        let k = k.rem_euclid(n);
        if k == 0 || self.is_zero() {
            return self.clone();
        }
        let mut num = vec![Int::ZERO; self.ctx.phi];
        for (i, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (t, &p) in self.ctx.power(i as i64 + k).iter().enumerate() {
                if p != 0 {
                    num[t] = num[t].add(&c.mul_i64(p));
                }
            }
        }
        CycNumber {
            ctx: self.ctx,
            num,
            den: self.den.clone(),
        }
    }

    pub fn scale_int(&self, k: i64) -> CycNumber {
        let mut r = CycNumber {
            ctx: self.ctx,
            num: self.num.iter().map(|c| c.mul_i64(k)).collect(),
            den: self.den.clone(),
        };
        r.normalize();
        r
    }

    /// Complex conjugation ζ ↦ ζ⁻¹.
    pub fn conj(&self) -> CycNumber {
        let mut num = vec![Int::ZERO; self.ctx.phi];
        for (i, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (t, &p) in self.ctx.power(-(i as i64)).iter().enumerate() {
                if p != 0 {
                    num[t] = num[t].add(&c.mul_i64(p));
                }
            }
        }
        CycNumber {
            ctx: self.ctx,
            num,
            den: self.den.clone(),
        }
    }

    /// Multiplicative inverse by the extended Euclidean algorithm in Q[x].
    pub fn inv(&self) -> Result<CycNumber, CycError> {
        if self.is_zero() {
            return Err(CycError::DivisionByZero);
        }
        let order = self.ctx.order;
        let to_q = |v: &[i64]| -> Vec<BigRational> {
            v.iter().map(|&c| BigRational::from_integer(BigInt::from(c))).collect()
        };
        let mut r0 = to_q(&self.ctx.poly);
        let mut r1: Vec<BigRational> = self
            .num
            .iter()
            .map(|c| BigRational::from_integer(c.to_big()))
            .collect();
        trim(&mut r1);
        let mut s0: Vec<BigRational> = vec![];
        let mut s1: Vec<BigRational> = vec![BigRational::one()];
        while r1.len() > 1 {
            let (q, r) = poly_divmod(&r0, &r1);
            let s2 = poly_sub(&s0, &poly_mul(&q, &s1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s2);
        }
        // r1 is a nonzero constant because Φ_N is irreducible.
        let c = r1[0].clone();
        let coeffs: Vec<BigRational> = s1.iter().map(|s| s / &c).collect();
        // multiply back the stored denominator
        let den = BigRational::from_integer(self.den.to_big());
        let mut out = Vec::with_capacity(coeffs.len());
        for q in coeffs {
            let v = q * &den;
            out.push((Int::from(v.numer().clone()), Int::from(v.denom().clone())));
        }
        // s1 may have degree >= phi only if something is off; reduce defensively
        let mut acc = CycNumber::zero(order);
        for (k, (p, q)) in out.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let mut term = CycNumber::zeta_pow(order, k as i64);
            let mut scale = CycNumber::zero(order);
            scale.num[0] = p.clone();
            scale.den = q.clone();
            scale.normalize();
            term = term.mul(&scale);
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    pub fn div(&self, o: &CycNumber) -> Result<CycNumber, CycError> {
        self.check(o)?;
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, mut e: u32) -> CycNumber {
        let mut base = self.clone();
        let mut acc = CycNumber::one(self.ctx.order);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Value at ζ_N = exp(2πi/N). Arithmetic is in f64, so at most about
    /// fifteen significant digits are meaningful; the result is rounded to
    /// `precision` decimal places.
    pub fn embed_complex(&self, precision: u32) -> Complex64 {
        let v = self.to_c64();
        let p = precision.min(15) as i32;
        let s = 10f64.powi(p);
        Complex64::new((v.re * s).round() / s, (v.im * s).round() / s)
    }

    /// Unrounded f64 embedding.
    pub fn to_c64(&self) -> Complex64 {
        let n = self.ctx.order as f64;
        let den = self.den.to_f64();
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let th = 2.0 * std::f64::consts::PI * k as f64 / n;
            acc += Complex64::new(th.cos(), th.sin()) * (c.to_f64() / den);
        }
        acc
    }
}

fn trim(p: &mut Vec<BigRational>) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn poly_divmod(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut r = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    if r.len() < b.len() {
        return (vec![], r);
    }
    let lead = b[db].clone();
    let mut q = vec![BigRational::zero(); r.len() - db];
    for k in (0..q.len()).rev() {
        let c = &r[k + db] / &lead;
        if !c.is_zero() {
            for (t, bt) in b.iter().enumerate() {
                r[k + t] = &r[k + t] - &c * bt;
            }
        }
        q[k] = c;
    }
    trim(&mut r);
    trim(&mut q);
    (q, r)
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + x * y;
        }
    }
    trim(&mut out);
    out
}

fn poly_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let x = a.get(k).cloned().unwrap_or_else(BigRational::zero);
        let y = b.get(k).cloned().unwrap_or_else(BigRational::zero);
        out.push(x - y);
    }
    trim(&mut out);
    out
}

impl PartialEq for CycNumber {
    fn eq(&self, o: &CycNumber) -> bool {
        self.ctx.order == o.ctx.order && self.den == o.den && self.num == o.num
    }
}

impl Eq for CycNumber {}

impl std::hash::Hash for CycNumber {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.ctx.order.hash(state);
        self.num.hash(state);
        self.den.hash(state);
    }
}

/// Checked binary operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn cyc_arith(a: &CycNumber, b: &CycNumber, op: CycOp) -> Result<CycNumber, CycError> {
    a.check(b)?;
    Ok(match op {
        CycOp::Add => a.add(b),
        CycOp::Sub => a.sub(b),
        CycOp::Mul => a.mul(b),
        CycOp::Div => a.div(b)?,
    })
}

/// Order of the field used for Coxeter number `h`.
pub fn order_for(h: u32) -> u32 {
    4 * h
}

/// The skein parameter A = ζ_{4h}.
pub fn skein_a(h: u32) -> CycNumber {
    CycNumber::zeta_pow(order_for(h), 1)
}

/// q = A² = ζ_{2h}.
pub fn root_q(h: u32) -> CycNumber {
    CycNumber::zeta_pow(order_for(h), 2)
}

/// [n]_q = (qⁿ − q⁻ⁿ)/(q − q⁻¹), evaluated as the finite geometric sum.
pub fn quantum_integer(n: i64, h: u32) -> CycNumber {
    let order = order_for(h);
    if n < 0 {
        return quantum_integer(-n, h).neg();
    }
    // q^{2h} = 1, so [n] has period 2h
    let n = n % (2 * h as i64);
    let mut acc = CycNumber::zero(order);
    for k in 0..n {
        // q^{n-1-2k} = ζ^{2(n-1-2k)}
        acc = acc.add(&CycNumber::zeta_pow(order, 2 * (n - 1 - 2 * k)));
    }
    acc
}

/// Loop value β = −[2]_q.
pub fn loop_value(h: u32) -> CycNumber {
    quantum_integer(2, h).neg()
}

impl std::ops::Add for &CycNumber {
    type Output = CycNumber;
    fn add(self, o: &CycNumber) -> CycNumber {
        CycNumber::add(self, o)
    }
}

impl std::ops::Sub for &CycNumber {
    type Output = CycNumber;
    fn sub(self, o: &CycNumber) -> CycNumber {
        CycNumber::sub(self, o)
    }
}

impl std::ops::Mul for &CycNumber {
    type Output = CycNumber;
    fn mul(self, o: &CycNumber) -> CycNumber {
        CycNumber::mul(self, o)
    }
}

impl std::ops::Neg for &CycNumber {
    type Output = CycNumber;
    fn neg(self) -> CycNumber {
        CycNumber::neg(self)
    }
}

fn fmt_rat(p: &Int, q: &Int) -> String {
    if q.is_one() {
        format!("{p}")
    } else {
        format!("{p}/{q}")
    }
}

impl fmt::Display for CycNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, (p, q)) in self.coeffs().iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let neg = p.is_negative();
            let a = p.abs();
            let c = fmt_rat(&a, q);
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                _ => {
                    if c != "1" {
                        write!(f, "{c}*")?;
                    }
                    if k == 1 {
                        write!(f, "z")?;
                    } else {
                        write!(f, "z^{k}")?;
                    }
                }
            }
        }
        write!(f, " (z = ζ_{})", self.ctx.order)
    }
}

impl fmt::Debug for CycNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Serialize, Deserialize)]
struct CycRepr {
    order: u32,
    coeffs: Vec<String>,
}

impl Serialize for CycNumber {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CycRepr {
            order: self.ctx.order,
            coeffs: self.coeffs().iter().map(|(p, q)| format!("{p}/{q}")).collect(),
        }
        .serialize(s)
    }
}

/// Parse `"p/q"` or `"p"`.
pub fn parse_rational(s: &str) -> Result<(Int, Int), CycError> {
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p, q),
        None => (s, "1"),
    };
    let p = Int::parse(p).ok_or_else(|| CycError::Parse(s.to_string()))?;
    let q = Int::parse(q).ok_or_else(|| CycError::Parse(s.to_string()))?;
    if q.is_zero() {
        return Err(CycError::Parse(format!("{s}: zero denominator")));
    }
    Ok((p, q))
}

impl<'de> Deserialize<'de> for CycNumber {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<CycNumber, D::Error> {
        let r = CycRepr::deserialize(d)?;
        if r.order == 0 {
            return Err(D::Error::custom("order must be positive"));
        }
        let coeffs = r
            .coeffs
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>, _>>()
            .map_err(D::Error::custom)?;
        CycNumber::from_rationals(r.order, &coeffs).map_err(D::Error::custom)
    }
}

/// Convenience: the sign of a rational value, if rational.
pub fn rational_sign(c: &CycNumber) -> Option<i32> {
    c.as_rational().map(|(p, _)| p.signum())
}

/// Exact value of a (possibly big) rational as `BigRational`.
pub fn to_big_rational(p: &Int, q: &Int) -> BigRational {
    BigRational::new(p.to_big(), q.to_big())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(CycloCtx::get(8).poly, vec![1, 0, 0, 0, 1]);
        assert_eq!(CycloCtx::get(12).poly, vec![1, 0, -1, 0, 1]);
        assert_eq!(CycloCtx::get(16).phi, 8);
        assert_eq!(CycloCtx::get(48).phi, 16);
        assert_eq!(CycloCtx::get(120).phi, 32);
        assert_eq!(CycloCtx::get(9).poly, vec![1, 0, 0, 1, 0, 0, 1]);
    }

    #[test]
    fn zeta_times_conjugate_is_one() {
        let z = CycNumber::zeta_pow(8, 1);
        let z7 = CycNumber::zeta_pow(8, 7);
        assert!(z.mul(&z7).is_one());
        assert_eq!(z.conj(), z7);
    }

    #[test]
    fn two_cos_squared() {
        let s = CycNumber::zeta_pow(8, 1).add(&CycNumber::zeta_pow(8, -1));
        assert_eq!(s.mul(&s), CycNumber::from_int(8, 2));
    }

    #[test]
    fn inverse_of_two_at_h4() {
        let s = CycNumber::zeta_pow(16, 1).add(&CycNumber::zeta_pow(16, -1));
        let t = CycNumber::from_int(16, 1).div(&s).unwrap();
        assert!(t.mul(&s).is_one());
        // the value is 1/(2cos(π/8))
        let v = t.to_c64();
        assert!((v.re - 1.0 / (2.0 * (std::f64::consts::PI / 8.0).cos())).abs() < 1e-12);
        assert!(v.im.abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let a = CycNumber::one(8);
        let b = CycNumber::one(12);
        assert_eq!(cyc_arith(&a, &b, CycOp::Add), Err(CycError::OrderMismatch(8, 12)));
        assert_eq!(
            cyc_arith(&a, &CycNumber::zero(8), CycOp::Div),
            Err(CycError::DivisionByZero)
        );
    }

    #[test]
    fn quantum_integers() {
        for h in 3..12 {
            assert!(quantum_integer(1, h).is_one());
            assert!(quantum_integer(h as i64, h).is_zero());
            assert!(quantum_integer(0, h).is_zero());
            let two = quantum_integer(2, h);
            for n in 1..(2 * h as i64) {
                let lhs = quantum_integer(n + 1, h);
                let rhs = two.mul(&quantum_integer(n, h)).sub(&quantum_integer(n - 1, h));
                assert_eq!(lhs, rhs, "recursion fails at n={n} h={h}");
            }
            for n in 1..h as i64 {
                assert_eq!(quantum_integer(n, h), quantum_integer(h as i64 - n, h));
            }
        }
        let q3 = quantum_integer(3, 5);
        let two = quantum_integer(2, 5);
        assert_eq!(q3, two.mul(&two).sub(&CycNumber::one(20)));
        assert!((q3.to_c64().re - 1.6180339887).abs() < 1e-9);
    }

    #[test]
    #[allow(clippy::approx_constant)] // values rounded to the requested 7 digits
    fn embeddings() {
        let one = CycNumber::one(8).embed_complex(7);
        assert_eq!((one.re, one.im), (1.0, 0.0));
        let z = CycNumber::zeta_pow(8, 1).embed_complex(7);
        assert_eq!((z.re, z.im), (0.7071068, 0.7071068));
        let q2 = quantum_integer(2, 4).embed_complex(7);
        assert!((q2.re - 1.4142136).abs() < 1e-12);
    }

    #[test]
    fn serde_round_trip() {
        let a = quantum_integer(3, 6).div(&quantum_integer(2, 6)).unwrap();
        let s = serde_json::to_string(&a).unwrap();
        let b: CycNumber = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["order"], 24);
        assert!(v["coeffs"][0].as_str().unwrap().contains('/'));
    }

    fn arb_cyc(order: u32) -> impl Strategy<Value = CycNumber> {
        let phi = CycloCtx::get(order).phi;
        proptest::collection::vec((-20i64..20, 1i64..7), phi).prop_map(move |cs| {
            let rs: Vec<(Int, Int)> = cs.into_iter().map(|(p, q)| (Int::from(p), Int::from(q))).collect();
            CycNumber::from_rationals(order, &rs).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn field_axioms(a in arb_cyc(24), b in arb_cyc(24), c in arb_cyc(24)) {
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.add(&b), b.add(&a));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            prop_assert!(a.sub(&a).is_zero());
            if !a.is_zero() {
                prop_assert!(a.mul(&a.inv().unwrap()).is_one());
                prop_assert_eq!(b.div(&a).unwrap().mul(&a), b.clone());
            }
        }

        #[test]
        fn embedding_is_multiplicative(a in arb_cyc(20), b in arb_cyc(20)) {
            let p = 8u32;
            let lhs = a.mul(&b).to_c64();
            let rhs = a.to_c64() * b.to_c64();
            let scale = 1.0f64.max(lhs.norm());
            prop_assert!((lhs - rhs).norm() / scale < 10f64.powi(-(p as i32 - 2)));
        }

        #[test]
        fn conj_is_automorphism(a in arb_cyc(16), b in arb_cyc(16)) {
            prop_assert_eq!(a.mul(&b).conj(), a.conj().mul(&b.conj()));
            let lhs = a.conj().to_c64();
            prop_assert!((lhs - a.to_c64().conj()).norm() < 1e-8 * (1.0 + lhs.norm()));
        }
    }
}
