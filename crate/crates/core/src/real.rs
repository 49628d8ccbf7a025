//! Exact arithmetic for rational linear combinations of radicals.
//!
//! A [`Real`] is a finite sum `Σ cᵢ · ∏ p^{e}` where the `cᵢ` are rationals
//! and each product ranges over prime-power radicals `p^{e}` with `e ∈ (0,1)`
//! rational. This ring is closed under addition, multiplication, and rational
//! powers of positive rationals, which covers every irrational value this
//! crate produces: Euclidean distances (square roots of rationals), points
//! `m^γ` of power-gap sets, and antiderivative values `x^{p+1}/(p+1)` of
//! distance powers.
//!
//! Distinct canonical radical monomials are linearly independent over the
//! rationals, so a sum is zero exactly when its canonical form is empty, and
//! the sign of a nonzero sum is decided by refining integer-root enclosures
//! until they separate from zero. All comparisons are exact; floating-point
//! output is derived from enclosures afterwards.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::{rat_to_f64, Rat};

type Exp = Ratio<u64>;

/// Canonical product of prime-power radicals; empty means the rational unit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Radical(Vec<(u64, Exp)>);

impl Radical {
    fn unit() -> Self {
        Radical(Vec::new())
    }

    fn is_unit(&self) -> bool {
        self.0.is_empty()
    }
}

/// Exact sum of rational multiples of radicals.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Real {
    terms: BTreeMap<Radical, Rat>,
}

const MAX_SIGN_BITS: u32 = 4096;

impl Real {
    pub fn zero() -> Self {
        Real { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Real::from_rat(Rat::one())
    }

    pub fn from_rat(x: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !x.is_zero() {
            terms.insert(Radical::unit(), x);
        }
        Real { terms }
    }

    pub fn from_int(n: i64) -> Self {
        Real::from_rat(Rat::from_integer(BigInt::from(n)))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The exact rational value, if the sum has no radical part.
    pub fn as_rational(&self) -> Option<Rat> {
        if self.terms.is_empty() {
            return Some(Rat::zero());
        }
        if self.terms.len() == 1 {
            let (rad, c) = self.terms.iter().next().unwrap();
            if rad.is_unit() {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn is_rational(&self) -> bool {
        self.as_rational().is_some()
    }

    fn insert_term(&mut self, rad: Radical, coeff: Rat) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(rad) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// `x^e` for rational `x ≥ 0` and rational `e`. Fails on `0^e` with
    /// `e ≤ 0` and on negative bases.
    pub fn rational_pow(x: &Rat, e: &Rat) -> Result<Real> {
        if x.is_negative() {
            return Err(Error::InvalidParams(format!("negative base {x} in rational power")));
        }
        if x.is_zero() {
            return if e.is_positive() {
                Ok(Real::zero())
            } else {
                Err(Error::InvalidParams("0 raised to a nonpositive power".into()))
            };
        }
        if e.is_zero() {
            return Ok(Real::one());
        }
        // Factor numerator and denominator, combine exponents per prime.
        let mut exps: BTreeMap<u64, Ratio<i64>> = BTreeMap::new();
        let e_num = e
            .numer()
            .to_i64()
            .ok_or_else(|| Error::InvalidParams("exponent numerator too large".into()))?;
        let e_den = e
            .denom()
            .to_i64()
            .ok_or_else(|| Error::InvalidParams("exponent denominator too large".into()))?;
        let e_ratio = Ratio::new(e_num, e_den);
        for (base, sign) in [(x.numer().magnitude(), 1i64), (x.denom().magnitude(), -1i64)] {
            for (p, a) in factor(base)? {
                *exps.entry(p).or_insert_with(Ratio::zero) +=
                    Ratio::from_integer(a as i64 * sign) * e_ratio;
            }
        }
        // Split each exponent into integer part (goes to the coefficient) and
        // fractional part in (0,1) (stays under the radical).
        let mut coeff = Rat::one();
        let mut rad: Vec<(u64, Exp)> = Vec::new();
        for (p, full) in exps {
            let floor = full.floor().to_integer();
            let frac = full - Ratio::from_integer(floor);
            if floor != 0 {
                let pw = Rat::from_integer(BigInt::from(p)).pow(
                    floor
                        .to_i32()
                        .ok_or_else(|| Error::InvalidParams("exponent overflow".into()))?,
                );
                coeff *= pw;
            }
            if !frac.is_zero() {
                rad.push((p, Ratio::new(*frac.numer() as u64, *frac.denom() as u64)));
            }
        }
        let mut out = Real::zero();
        out.insert_term(Radical(rad), coeff);
        Ok(out)
    }

    /// √x for rational x ≥ 0.
    pub fn sqrt_rat(x: &Rat) -> Result<Real> {
        Real::rational_pow(x, &Rat::new(BigInt::one(), BigInt::from(2)))
    }

    pub fn mul_rat(&self, c: &Rat) -> Real {
        if c.is_zero() {
            return Real::zero();
        }
        Real {
            terms: self.terms.iter().map(|(r, k)| (r.clone(), k * c)).collect(),
        }
    }

    pub fn square(&self) -> Real {
        self.clone() * self.clone()
    }

    pub fn pow_int(&self, e: u32) -> Real {
        let mut acc = Real::one();
        for _ in 0..e {
            acc = acc * self.clone();
        }
        acc
    }

    /// Exact sign: -1, 0, or +1.
    pub fn sign(&self) -> i32 {
        if self.terms.is_empty() {
            return 0;
        }
        if self.terms.len() == 1 {
            let c = self.terms.values().next().unwrap();
            return if c.is_positive() { 1 } else { -1 };
        }
        let mut bits = 32;
        while bits <= MAX_SIGN_BITS {
            let (lo, hi) = self.enclosure(bits);
            if lo.is_positive() {
                return 1;
            }
            if hi.is_negative() {
                return -1;
            }
            bits *= 2;
        }
        // Unreachable for canonical nonzero sums: distinct radical monomials
        // are linearly independent over the rationals.
        unreachable!("radical sum failed to separate from zero")
    }

    /// Rational interval `[lo, hi]` containing the exact value, with
    /// per-term radical enclosures of width `2^-bits`.
    pub fn enclosure(&self, bits: u32) -> (Rat, Rat) {
        let mut lo = Rat::zero();
        let mut hi = Rat::zero();
        for (rad, c) in &self.terms {
            if rad.is_unit() {
                lo += c.clone();
                hi += c.clone();
                continue;
            }
            let (rlo, rhi) = radical_enclosure(rad, bits);
            if c.is_positive() {
                lo += c * &rlo;
                hi += c * &rhi;
            } else {
                lo += c * &rhi;
                hi += c * &rlo;
            }
        }
        (lo, hi)
    }

    pub fn to_f64(&self) -> f64 {
        if let Some(r) = self.as_rational() {
            return rat_to_f64(&r);
        }
        let (lo, hi) = self.enclosure(80);
        (rat_to_f64(&lo) + rat_to_f64(&hi)) / 2.0
    }

    pub fn min(self, other: Real) -> Real {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Real) -> Real {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn abs(self) -> Real {
        if self.sign() < 0 {
            -self
        } else {
            self
        }
    }

    /// Symbolic text form, e.g. `2 - 3^(1/2)`.
    pub fn to_display_string(&self) -> String {
        format!("{self}")
    }
}

/// Enclosure of a radical monomial `∏ p^{a/b}` of width `2^-bits`.
fn radical_enclosure(rad: &Radical, bits: u32) -> (Rat, Rat) {
    // Common root index D, integer radicand R = ∏ p^{a·D/b}, then
    // floor((R · 2^{bits·D})^{1/D}) / 2^bits bounds R^{1/D} from below.
    let mut d: u64 = 1;
    for (_, e) in &rad.0 {
        d = d.lcm(e.denom());
    }
    let mut radicand = BigUint::one();
    for (p, e) in &rad.0 {
        let exp = e.numer() * (d / e.denom());
        radicand *= BigUint::from(*p).pow(exp as u32);
    }
    let shifted = radicand << (bits as u64 * d) as usize;
    let root = shifted.nth_root(d as u32);
    let denom = BigInt::one() << bits as usize;
    let lo = Rat::new(BigInt::from(root.clone()), denom.clone());
    let hi = Rat::new(BigInt::from(root + BigUint::one()), denom);
    (lo, hi)
}

impl Add for Real {
    type Output = Real;
    fn add(mut self, rhs: Real) -> Real {
        for (rad, c) in rhs.terms {
            self.insert_term(rad, c);
        }
        self
    }
}

impl AddAssign for Real {
    fn add_assign(&mut self, rhs: Real) {
        for (rad, c) in rhs.terms {
            self.insert_term(rad, c);
        }
    }
}

impl Sub for Real {
    type Output = Real;
    fn sub(self, rhs: Real) -> Real {
        self + (-rhs)
    }
}

impl SubAssign for Real {
    fn sub_assign(&mut self, rhs: Real) {
        *self += -rhs;
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real {
            terms: self.terms.into_iter().map(|(r, c)| (r, -c)).collect(),
        }
    }
}

impl Mul for Real {
    type Output = Real;
    fn mul(self, rhs: Real) -> Real {
        let mut out = Real::zero();
        for (ra, ca) in &self.terms {
            for (rb, cb) in &rhs.terms {
                let (rad, extra) = mul_radicals(ra, rb);
                out.insert_term(rad, ca * cb * extra);
            }
        }
        out
    }
}

/// Product of two radical monomials: exponents add per prime, and any
/// integer part that appears moves into a rational cofactor.
fn mul_radicals(a: &Radical, b: &Radical) -> (Radical, Rat) {
    let mut exps: BTreeMap<u64, Exp> = a.0.iter().cloned().collect();
    let mut cofactor = Rat::one();
    for (p, e) in &b.0 {
        let entry = exps.entry(*p).or_insert_with(Exp::zero);
        *entry += *e;
        if *entry >= Exp::one() {
            *entry -= Exp::one();
            cofactor *= Rat::from_integer(BigInt::from(*p));
        }
    }
    let rad: Vec<(u64, Exp)> = exps.into_iter().filter(|(_, e)| !e.is_zero()).collect();
    (Radical(rad), cofactor)
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Real {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.terms == other.terms {
            return Ordering::Equal;
        }
        match (self.clone() - other.clone()).sign() {
            x if x < 0 => Ordering::Less,
            x if x > 0 => Ordering::Greater,
            _ => Ordering::Equal,
        }
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (rad, c) in &self.terms {
            let neg = c.is_negative();
            let mag = if neg { -c.clone() } else { c.clone() };
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let coeff_str = crate::rational::fmt_rat(&mag);
            if rad.is_unit() {
                write!(f, "{coeff_str}")?;
            } else {
                if !mag.is_one() {
                    write!(f, "{coeff_str}*")?;
                }
                let parts: Vec<String> = rad
                    .0
                    .iter()
                    .map(|(p, e)| format!("{p}^({}/{})", e.numer(), e.denom()))
                    .collect();
                write!(f, "{}", parts.join("*"))?;
            }
        }
        Ok(())
    }
}

fn factor(n: &BigUint) -> Result<Vec<(u64, u32)>> {
    let mut n = n
        .to_u128()
        .ok_or_else(|| Error::InvalidParams("number too large to factor".into()))?;
    let mut out: Vec<(u64, u32)> = Vec::new();
    if n <= 1 {
        return Ok(out);
    }
    let push = |p: u64, k: u32, out: &mut Vec<(u64, u32)>| {
        if let Some(last) = out.last_mut() {
            if last.0 == p {
                last.1 += k;
                return;
            }
        }
        out.push((p, k));
    };
    for p in [2u64, 3, 5] {
        let mut k = 0;
        while n % p as u128 == 0 {
            n /= p as u128;
            k += 1;
        }
        if k > 0 {
            push(p, k, &mut out);
        }
    }
    let mut p: u64 = 7;
    let wheel = [4u64, 2, 4, 2, 4, 6, 2, 6];
    let mut wi = 0;
    while p <= 1_000_000 && (p as u128) * (p as u128) <= n {
        let mut k = 0;
        while n % p as u128 == 0 {
            n /= p as u128;
            k += 1;
        }
        if k > 0 {
            push(p, k, &mut out);
        }
        p += wheel[wi];
        wi = (wi + 1) % wheel.len();
    }
    if n > 1 {
        if n < 1_000_000_000_000u128 || is_prime_u128(n) {
            let p = n
                .to_u64()
                .ok_or_else(|| Error::InvalidParams("prime factor exceeds u64".into()))?;
            push(p, 1, &mut out);
        } else {
            // Composite cofactor of two primes each > 10^6.
            let d = pollard_rho(n).ok_or_else(|| {
                Error::InvalidParams("number too large to factor".into())
            })?;
            let mut rest = Vec::new();
            for m in [d, n / d] {
                for (p, k) in factor(&BigUint::from(m))? {
                    rest.push((p, k));
                }
            }
            rest.sort_unstable();
            for (p, k) in rest {
                push(p, k, &mut out);
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

fn mulmod(a: u128, b: u128, m: u128) -> u128 {
    if m <= u64::MAX as u128 {
        return (a % m) * (b % m) % m;
    }
    // Binary multiplication for wide moduli.
    let (mut a, mut b, mut acc) = (a % m, b % m, 0u128);
    while b > 0 {
        if b & 1 == 1 {
            acc = (acc + a) % m;
        }
        a = (a << 1) % m;
        b >>= 1;
    }
    acc
}

fn powmod(mut base: u128, mut exp: u128, m: u128) -> u128 {
    let mut acc = 1u128;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, m);
        }
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    acc
}

fn is_prime_u128(n: u128) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u128, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }
    'witness: for a in [2u128, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..r - 1 {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: u128) -> Option<u128> {
    if n % 2 == 0 {
        return Some(2);
    }
    let mut c = 1u128;
    loop {
        let f = |x: u128| (mulmod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u128, 2u128, 1u128);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            let diff = if x > y { x - y } else { y - x };
            d = gcd_u128(diff, n);
        }
        if d != n && d != 0 {
            return Some(d);
        }
        c += 1;
        if c > 40 {
            return None;
        }
    }
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}
