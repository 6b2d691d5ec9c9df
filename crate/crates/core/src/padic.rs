//! Truncated p-adic arithmetic in Z_p and in the towers Z_p[zeta_{p^k}],
//! optionally with a prime-to-p root of unity adjoined.
//!
//! Elements of the ramified tower are stored in the uniformizer basis
//! `pi = x - 1`, where `x` is the distinguished root of `Phi_{p^k}`. In that
//! basis the defining relation is Eisenstein, valuations can be read off the
//! coefficients, and a truncated power series in `T` evaluated at `zeta - 1`
//! is literally its residue modulo `Phi_{p^k}(1 + T)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_rational::Ratio;

use crate::arith::{cyclotomic_poly, euler_phi, inv_mod, ipow, mul_mod, pow_mod, val_p};
use crate::error::{Error, Result};

/// `Phi_{p^m}(X) = sum_{j<p} X^{j p^{m-1}}`, ascending coefficients.
pub fn cyclotomic_polynomial(p: i64, m: u32) -> Result<Vec<i64>> {
    if m == 0 {
        return Err(Error::Usage("Phi_{p^0} is not used; m must be >= 1".into()));
    }
    let step = ipow(p, m - 1) as usize;
    let mut out = vec![0i64; step * (p as usize - 1) + 1];
    for j in 0..p as usize {
        out[j * step] = 1;
    }
    Ok(out)
}

/// Largest number of p-adic digits whose modulus stays below 2^62.
pub fn max_digits(p: i64) -> u32 {
    let mut d = 0u32;
    let mut acc: i128 = 1;
    while acc * (p as i128) < (1i128 << 62) {
        acc *= p as i128;
        d += 1;
    }
    d
}

// ---------------------------------------------------------------------------
// Z_p scalars
// ---------------------------------------------------------------------------

/// Element of Q_p known modulo `p^abs_prec`, stored as `p^val * unit`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadicScalar {
    p: i64,
    abs_prec: i64,
    /// `None` for zero (exact or to precision).
    val: Option<i64>,
    unit: i128,
    exact_zero: bool,
}

impl PadicScalar {
    pub fn from_int(p: i64, n: i64, prec: i64) -> PadicScalar {
        Self::from_ratio(p, n, 1, prec).expect("integer is p-integral")
    }

    pub fn from_ratio(p: i64, num: i64, den: i64, prec: i64) -> Result<PadicScalar> {
        if den == 0 {
            return Err(Error::DivisionByZero);
        }
        if num == 0 {
            return Ok(PadicScalar::exact_zero(p, prec));
        }
        let vn = val_p(num as i128, p as i128) as i64;
        let vd = val_p(den as i128, p as i128) as i64;
        let v = vn - vd;
        let un = num as i128 / (p as i128).pow(vn as u32);
        let ud = den as i128 / (p as i128).pow(vd as u32);
        let rel = prec - v;
        if rel <= 0 {
            return Ok(PadicScalar { p, abs_prec: prec, val: None, unit: 0, exact_zero: false });
        }
        let m = (p as i128).pow(rel as u32);
        let inv = inv_mod(ud, m).ok_or(Error::NotCoprime(ud as i64, p))?;
        Ok(PadicScalar { p, abs_prec: prec, val: Some(v), unit: mul_mod(un, inv, m), exact_zero: false })
    }

    pub fn exact_zero(p: i64, prec: i64) -> PadicScalar {
        PadicScalar { p, abs_prec: prec, val: None, unit: 0, exact_zero: true }
    }

    pub fn p(&self) -> i64 {
        self.p
    }
    pub fn precision(&self) -> i64 {
        self.abs_prec
    }
    pub fn valuation(&self) -> Option<i64> {
        self.val
    }
    pub fn unit(&self) -> i128 {
        self.unit
    }
    pub fn is_exact_zero(&self) -> bool {
        self.exact_zero
    }
    pub fn is_zero(&self) -> bool {
        self.val.is_none()
    }

    fn check(&self, o: &PadicScalar) -> Result<()> {
        if self.p != o.p {
            return Err(Error::Usage(format!("mixed primes {} and {}", self.p, o.p)));
        }
        Ok(())
    }

    /// Representative `p^val * unit` as an integer mod `p^abs_prec` (val >= 0 only).
    pub fn residue(&self) -> Option<i128> {
        match self.val {
            None => Some(0),
            Some(v) if v >= 0 => Some(self.unit * (self.p as i128).pow(v as u32)),
            _ => None,
        }
    }

    fn build(p: i64, abs_prec: i64, shift: i64, mut c: i128) -> PadicScalar {
        let rel = abs_prec - shift;
        if rel <= 0 {
            return PadicScalar { p, abs_prec, val: None, unit: 0, exact_zero: false };
        }
        let m = (p as i128).pow(rel as u32);
        c = c.rem_euclid(m);
        if c == 0 {
            return PadicScalar { p, abs_prec, val: None, unit: 0, exact_zero: false };
        }
        let v = val_p(c, p as i128) as i64;
        let u = c / (p as i128).pow(v as u32);
        let m2 = (p as i128).pow((rel - v) as u32);
        PadicScalar { p, abs_prec, val: Some(shift + v), unit: u.rem_euclid(m2), exact_zero: false }
    }

    pub fn try_add(&self, o: &PadicScalar) -> Result<PadicScalar> {
        self.check(o)?;
        if self.exact_zero {
            return Ok(o.clone());
        }
        if o.exact_zero {
            return Ok(self.clone());
        }
        let prec = self.abs_prec.min(o.abs_prec);
        let s = self.val.unwrap_or(prec).min(o.val.unwrap_or(prec));
        let p = self.p as i128;
        let part = |x: &PadicScalar| -> i128 {
            match x.val {
                None => 0,
                Some(v) => {
                    let rel = prec - s;
                    if v - s >= rel {
                        0
                    } else {
                        let m = p.pow(rel as u32);
                        mul_mod(x.unit, p.pow((v - s) as u32), m)
                    }
                }
            }
        };
        Ok(Self::build(self.p, prec, s, part(self) + part(o)))
    }

    pub fn neg(&self) -> PadicScalar {
        let mut out = self.clone();
        if let Some(v) = self.val {
            let m = (self.p as i128).pow((self.abs_prec - v) as u32);
            out.unit = (-self.unit).rem_euclid(m);
        }
        out
    }

    pub fn try_sub(&self, o: &PadicScalar) -> Result<PadicScalar> {
        self.try_add(&o.neg())
    }

    pub fn try_mul(&self, o: &PadicScalar) -> Result<PadicScalar> {
        self.check(o)?;
        if self.exact_zero || o.exact_zero {
            return Ok(PadicScalar::exact_zero(self.p, self.abs_prec.min(o.abs_prec)));
        }
        match (self.val, o.val) {
            (Some(va), Some(vb)) => {
                let rel = (self.abs_prec - va).min(o.abs_prec - vb);
                let m = (self.p as i128).pow(rel as u32);
                let u = mul_mod(self.unit, o.unit, m);
                Ok(PadicScalar { p: self.p, abs_prec: va + vb + rel, val: Some(va + vb), unit: u, exact_zero: false })
            }
            (va, vb) => {
                let bound = match (va, vb) {
                    (Some(v), None) => o.abs_prec + v,
                    (None, Some(v)) => self.abs_prec + v,
                    _ => self.abs_prec + o.abs_prec,
                };
                Ok(PadicScalar { p: self.p, abs_prec: bound, val: None, unit: 0, exact_zero: false })
            }
        }
    }

    pub fn try_inv(&self) -> Result<PadicScalar> {
        if self.exact_zero {
            return Err(Error::DivisionByZero);
        }
        let v = self.val.ok_or_else(|| {
            Error::PrecisionExhausted(format!("inverting a value indistinguishable from 0 mod {}^{}", self.p, self.abs_prec))
        })?;
        let rel = self.abs_prec - v;
        let m = (self.p as i128).pow(rel as u32);
        let u = inv_mod(self.unit, m).expect("unit part is invertible");
        Ok(PadicScalar { p: self.p, abs_prec: rel - v, val: Some(-v), unit: u, exact_zero: false })
    }

    /// Division reduces the absolute precision by `val(b)`.
    pub fn try_div(&self, o: &PadicScalar) -> Result<PadicScalar> {
        self.try_mul(&o.try_inv()?)
    }
}

impl fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.val {
            None if self.exact_zero => write!(f, "0"),
            None => write!(f, "O({}^{})", self.p, self.abs_prec),
            Some(v) => write!(f, "{}*{}^{} + O({}^{})", self.unit, self.p, v, self.p, self.abs_prec),
        }
    }
}

// ---------------------------------------------------------------------------
// Polynomials over Z/p^n (helpers for the unramified part)
// ---------------------------------------------------------------------------

fn trim(v: &mut Vec<i128>) {
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
}

fn pmul(a: &[i128], b: &[i128], m: i128) -> Vec<i128> {
    let mut out = vec![0i128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mul_mod(x, y, m)) % m;
        }
    }
    let mut out: Vec<i128> = out.into_iter().map(|c| c.rem_euclid(m)).collect();
    trim(&mut out);
    out
}

fn psub(a: &[i128], b: &[i128], m: i128) -> Vec<i128> {
    let n = a.len().max(b.len());
    let mut out: Vec<i128> = (0..n)
        .map(|i| (a.get(i).copied().unwrap_or(0) - b.get(i).copied().unwrap_or(0)).rem_euclid(m))
        .collect();
    trim(&mut out);
    out
}

fn padd(a: &[i128], b: &[i128], m: i128) -> Vec<i128> {
    let n = a.len().max(b.len());
    let mut out: Vec<i128> = (0..n)
        .map(|i| (a.get(i).copied().unwrap_or(0) + b.get(i).copied().unwrap_or(0)).rem_euclid(m))
        .collect();
    trim(&mut out);
    out
}

/// Division with remainder by a polynomial whose leading coefficient is a unit mod m.
fn pdivmod(a: &[i128], b: &[i128], m: i128) -> (Vec<i128>, Vec<i128>) {
    let mut r: Vec<i128> = a.iter().map(|c| c.rem_euclid(m)).collect();
    trim(&mut r);
    let db = b.len() - 1;
    let lead_inv = inv_mod(b[db], m).expect("leading coefficient must be a unit");
    if r.len() <= db || (r.len() == 1 && r[0] == 0) {
        return (vec![0], r);
    }
    let mut q = vec![0i128; r.len() - db];
    for i in (0..q.len()).rev() {
        let c = mul_mod(r[i + db], lead_inv, m);
        q[i] = c;
        if c != 0 {
            for (j, &bj) in b.iter().enumerate() {
                r[i + j] = (r[i + j] - mul_mod(c, bj, m)).rem_euclid(m);
            }
        }
    }
    r.truncate(db.max(1));
    trim(&mut r);
    trim(&mut q);
    (q, r)
}

/// Bezout coefficients over F_p: s*a + t*b = 1 for coprime a, b.
fn bezout_mod_p(a: &[i128], b: &[i128], p: i128) -> (Vec<i128>, Vec<i128>) {
    let (mut r0, mut r1) = (a.to_vec(), b.to_vec());
    let (mut s0, mut s1) = (vec![1i128], vec![0i128]);
    let (mut t0, mut t1) = (vec![0i128], vec![1i128]);
    while !(r1.len() == 1 && r1[0] == 0) {
        let (q, r) = pdivmod(&r0, &r1, p);
        r0 = std::mem::replace(&mut r1, r);
        let ns = psub(&s0, &pmul(&q, &s1, p), p);
        s0 = std::mem::replace(&mut s1, ns);
        let nt = psub(&t0, &pmul(&q, &t1, p), p);
        t0 = std::mem::replace(&mut t1, nt);
    }
    assert_eq!(r0.len(), 1, "polynomials are not coprime mod p");
    let inv = inv_mod(r0[0], p).unwrap();
    let s = s0.iter().map(|c| mul_mod(*c, inv, p)).collect();
    let t = t0.iter().map(|c| mul_mod(*c, inv, p)).collect();
    (s, t)
}

// ---------------------------------------------------------------------------
// Unramified part
// ---------------------------------------------------------------------------

/// A prime-to-p root of unity of order `m` adjoined through a stored
/// irreducible factor `g` of `Phi_m` over Z_p (Hensel-lifted from F_p).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Unramified {
    pub m: i64,
    /// Residue degree: order of p modulo m.
    pub f: usize,
    /// Monic factor of Phi_m, ascending coefficients mod p^digits (length f+1).
    pub g: Vec<i128>,
    pub digits: u32,
}

impl Unramified {
    pub fn trivial(p: i64, digits: u32) -> Unramified {
        let modulus = (p as i128).pow(digits);
        Unramified { m: 1, f: 1, g: vec![(-1i128).rem_euclid(modulus), 1], digits }
    }

    /// Picks the lexicographically first monic degree-f factor of `Phi_m` mod p
    /// and lifts the factorization to `digits` p-adic digits.
    pub fn new(p: i64, m: i64, digits: u32) -> Result<Unramified> {
        if m <= 0 || m % p == 0 {
            return Err(Error::Usage(format!("unramified order {m} must be positive and prime to {p}")));
        }
        if m == 1 {
            return Ok(Unramified::trivial(p, digits));
        }
        let pp = p as i128;
        let mut f = 1usize;
        while pow_mod(pp, f as u128, m as i128) != 1 {
            f += 1;
        }
        let phi: Vec<i128> = cyclotomic_poly(m).into_iter().map(|c| c as i128).collect();
        let phi_p: Vec<i128> = phi.iter().map(|c| c.rem_euclid(pp)).collect();
        // enumerate monic degree-f candidates over F_p
        let total = pp.pow(f as u32);
        let mut gbar = None;
        for idx in 0..total {
            let mut cand = Vec::with_capacity(f + 1);
            let mut t = idx;
            for _ in 0..f {
                cand.push(t % pp);
                t /= pp;
            }
            cand.push(1);
            let (_, r) = pdivmod(&phi_p, &cand, pp);
            if r.len() == 1 && r[0] == 0 {
                gbar = Some(cand);
                break;
            }
        }
        let gbar = gbar.ok_or_else(|| Error::Usage(format!("no degree-{f} factor of Phi_{m} mod {p}")))?;
        let (hbar, _) = pdivmod(&phi_p, &gbar, pp);
        let (_, t) = bezout_mod_p(&gbar, &hbar, pp);
        let mut g = gbar.clone();
        let mut h = hbar.clone();
        let mut pk: i128 = pp;
        for _ in 1..digits {
            let next = pk * pp;
            let diff = psub(&phi, &pmul(&g, &h, next), next);
            let e: Vec<i128> = diff.iter().map(|c| (c / pk).rem_euclid(pp)).collect();
            let (_, dg) = pdivmod(&pmul(&t, &e, pp), &gbar, pp);
            let rest = psub(&e, &pmul(&hbar, &dg, pp), pp);
            let (dh, rem) = pdivmod(&rest, &gbar, pp);
            debug_assert!(rem.iter().all(|&c| c == 0));
            g = padd(&g, &dg.iter().map(|c| c * pk).collect::<Vec<_>>(), next);
            h = padd(&h, &dh.iter().map(|c| c * pk).collect::<Vec<_>>(), next);
            pk = next;
        }
        let mut g = g;
        g.resize(f + 1, 0);
        Ok(Unramified { m, f, g, digits })
    }

    /// Persisted form: `p m digits f g_0 ... g_f`, one item per line.
    pub fn to_text(&self, p: i64) -> String {
        let mut out = String::new();
        out.push_str("# hensel root of Phi_m over Z_p; y is a root of g\n");
        out.push_str(&format!("p {p}\nm {}\ndigits {}\n", self.m, self.digits));
        out.push_str("g");
        for c in &self.g {
            out.push_str(&format!(" {c}"));
        }
        out.push('\n');
        out.push_str("root");
        // y itself in the basis 1, y, ..., y^{f-1}; for f = 1 this is the integer root
        if self.f == 1 {
            let modulus = (p as i128).pow(self.digits);
            out.push_str(&format!(" {}", (-self.g[0]).rem_euclid(modulus)));
        } else {
            for i in 0..self.f {
                out.push_str(if i == 1 { " 1" } else { " 0" });
            }
        }
        out.push('\n');
        out
    }

    pub fn from_text(text: &str) -> Result<(i64, Unramified)> {
        let mut p = None;
        let mut m = None;
        let mut digits = None;
        let mut g = None;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let key = it.next().unwrap();
            let vals: Vec<&str> = it.collect();
            let bad = |msg: &str| Error::Format { line: i + 1, msg: msg.to_string() };
            match key {
                "p" => p = Some(vals.first().ok_or_else(|| bad("p"))?.parse::<i64>().map_err(|_| bad("p"))?),
                "m" => m = Some(vals.first().ok_or_else(|| bad("m"))?.parse::<i64>().map_err(|_| bad("m"))?),
                "digits" => {
                    digits = Some(vals.first().ok_or_else(|| bad("digits"))?.parse::<u32>().map_err(|_| bad("digits"))?)
                }
                "g" => {
                    g = Some(
                        vals.iter()
                            .map(|v| v.parse::<i128>().map_err(|_| bad("g coefficient")))
                            .collect::<Result<Vec<_>>>()?,
                    )
                }
                "root" => {}
                _ => return Err(bad("unknown key")),
            }
        }
        let missing = |k: &str| Error::Format { line: 0, msg: format!("missing {k}") };
        let p = p.ok_or_else(|| missing("p"))?;
        let m = m.ok_or_else(|| missing("m"))?;
        let digits = digits.ok_or_else(|| missing("digits"))?;
        let g = g.ok_or_else(|| missing("g"))?;
        let f = g.len() - 1;
        let u = Unramified { m, f, g, digits };
        // g must divide Phi_m to the stored precision
        let modulus = (p as i128).pow(digits);
        let phi: Vec<i128> = cyclotomic_poly(m).into_iter().map(|c| c as i128).collect();
        let (_, r) = pdivmod(&phi, &u.g, modulus);
        if !(r.len() == 1 && r[0] == 0) {
            return Err(Error::Validation("stored g does not divide Phi_m".into()));
        }
        Ok((p, u))
    }
}

// ---------------------------------------------------------------------------
// Ring context
// ---------------------------------------------------------------------------

/// Z_p[zeta_{p^k}][y]/g(y) truncated at `digits` p-adic digits of relative precision.
#[derive(Debug)]
pub struct PadicRing {
    pub p: i64,
    pub level: u32,
    /// Ramification index phi(p^k) (1 for level 0).
    pub e: usize,
    pub unram: Unramified,
    pub digits: u32,
    modulus: i128,
    /// Low coefficients a_0..a_{e-1} of the Eisenstein relation pi^e = -sum a_i pi^i, mod p^(digits+1).
    eis: Vec<i128>,
    /// p / pi as a pi-basis integer vector (mod p^digits).
    p_over_pi: Vec<i128>,
    /// (pi^e / p)^{-1} (mod p^digits).
    w_inv: Vec<i128>,
    /// Images of pi^j under x -> x^a, keyed by a (filled on demand).
    galois_cache: Mutex<HashMap<i64, Arc<Vec<i128>>>>,
}

impl PartialEq for PadicRing {
    fn eq(&self, o: &Self) -> bool {
        self.p == o.p && self.level == o.level && self.unram == o.unram && self.digits == o.digits
    }
}

impl PadicRing {
    /// Rings are interned, so repeated construction shares the Galois cache.
    pub fn new(p: i64, level: u32, unram: Unramified, digits: u32) -> Result<Arc<PadicRing>> {
        type Key = (i64, u32, u32, Unramified);
        static RINGS: OnceLock<Mutex<HashMap<Key, Arc<PadicRing>>>> = OnceLock::new();
        let key = (p, level, digits, unram);
        let rings = RINGS.get_or_init(Default::default);
        if let Some(r) = rings.lock().unwrap().get(&key) {
            return Ok(r.clone());
        }
        let ring = PadicRing::build(p, level, key.3.clone(), digits)?;
        Ok(rings.lock().unwrap().entry(key).or_insert(ring).clone())
    }

    fn build(p: i64, level: u32, unram: Unramified, digits: u32) -> Result<Arc<PadicRing>> {
        if p < 3 || !crate::arith::is_prime(p) {
            return Err(Error::Usage(format!("p = {p} must be an odd prime")));
        }
        if digits == 0 || digits + 1 > max_digits(p) {
            return Err(Error::Usage(format!("digits {digits} out of range for p = {p}")));
        }
        let e = if level == 0 { 1 } else { euler_phi(ipow(p, level)) as usize };
        let big = (p as i128).pow(digits + 1);
        let modulus = (p as i128).pow(digits);
        let eis = if level == 0 {
            vec![0]
        } else {
            eisenstein_low(p, level, big)
        };
        let mut ring = PadicRing {
            p,
            level,
            e,
            unram: unram.clone(),
            digits,
            modulus,
            eis,
            p_over_pi: Vec::new(),
            w_inv: Vec::new(),
            galois_cache: Mutex::new(HashMap::new()),
        };
        if unram.digits < digits {
            ring.unram = Unramified::new(p, unram.m, digits)?;
        }
        if level > 0 {
            let f = ring.unram.f;
            // p/pi = -pi^{e-1} - sum_{i>=1} a_i pi^{i-1}
            let mut ppi = vec![0i128; e * f];
            for i in 1..e {
                ppi[(i - 1) * f] = (-ring.eis[i]).rem_euclid(modulus);
            }
            ppi[(e - 1) * f] = (ppi[(e - 1) * f] - 1).rem_euclid(modulus);
            ring.p_over_pi = ppi;
            // w = pi^e / p = -1 - sum_{i>=1} (a_i/p) pi^i
            let mut w = vec![0i128; e * f];
            w[0] = modulus - 1;
            for i in 1..e {
                debug_assert_eq!(ring.eis[i] % p as i128, 0);
                w[i * f] = (-(ring.eis[i] / p as i128)).rem_euclid(modulus);
            }
            let ring_tmp = Arc::new(PadicRing { w_inv: Vec::new(), ..ring.clone_shallow() });
            let winv = unit_inverse(&ring_tmp, &w, digits);
            ring.w_inv = winv;
        }
        Ok(Arc::new(ring))
    }

    fn clone_shallow(&self) -> PadicRing {
        PadicRing {
            p: self.p,
            level: self.level,
            e: self.e,
            unram: self.unram.clone(),
            digits: self.digits,
            modulus: self.modulus,
            eis: self.eis.clone(),
            p_over_pi: self.p_over_pi.clone(),
            w_inv: self.w_inv.clone(),
            galois_cache: Mutex::new(HashMap::new()),
        }
    }

    /// Simple constructor: level-k tower over Z_p, no unramified part.
    pub fn tower(p: i64, level: u32, digits: u32) -> Result<Arc<PadicRing>> {
        PadicRing::new(p, level, Unramified::trivial(p, digits), digits)
    }

    pub fn f(&self) -> usize {
        self.unram.f
    }

    pub fn dim(&self) -> usize {
        self.e * self.unram.f
    }

    /// Same unramified data and precision, different tower level.
    pub fn at_level(&self, level: u32) -> Result<Arc<PadicRing>> {
        PadicRing::new(self.p, level, self.unram.clone(), self.digits)
    }

    /// e x e integer matrix whose row j is the pi-expansion of (x^a - 1)^j.
    pub fn galois_matrix(self: &Arc<Self>, a: i64) -> Arc<Vec<i128>> {
        let order = ipow(self.p, self.level);
        let a = a.rem_euclid(order);
        if let Some(m) = self.galois_cache.lock().unwrap().get(&a) {
            return m.clone();
        }
        let e = self.e;
        let f = self.f();
        let x = PadicCyclo::generator(self);
        let img = &x.pow(a as u64) - &PadicCyclo::one(self);
        let (_, base) = img.integral_coeffs().expect("x^a - 1 is integral");
        let mut rows = vec![0i128; e * e];
        let mut cur = vec![0i128; e * f];
        cur[0] = 1;
        for j in 0..e {
            for i in 0..e {
                rows[j * e + i] = cur[i * f];
            }
            cur = self.mul_vec(&cur, &base, self.digits);
        }
        let m = Arc::new(rows);
        self.galois_cache.lock().unwrap().insert(a, m.clone());
        m
    }

    /// Multiply a pi-basis vector by pi modulo p^prec.
    fn mul_pi_vec(&self, a: &[i128], prec: u32) -> Vec<i128> {
        let m = (self.p as i128).pow(prec);
        let e = self.e;
        let f = self.f();
        let mut out = vec![0i128; e * f];
        out[f..].copy_from_slice(&a[..(e - 1) * f]);
        let top = &a[(e - 1) * f..];
        for i in 0..e {
            let ai = self.eis[i] % m;
            if ai == 0 {
                continue;
            }
            for l in 0..f {
                if top[l] != 0 {
                    out[i * f + l] = (out[i * f + l] - mul_mod(top[l], ai, m)).rem_euclid(m);
                }
            }
        }
        out.iter_mut().for_each(|x| *x = x.rem_euclid(m));
        out
    }

    /// Multiply two pi-basis vectors modulo p^prec (prec <= digits).
    fn mul_vec(&self, a: &[i128], b: &[i128], prec: u32) -> Vec<i128> {
        let m = (self.p as i128).pow(prec);
        let e = self.e;
        let f = self.unram.f;
        let mut full = vec![0i128; (2 * e - 1) * (2 * f - 1)];
        let w = 2 * f - 1;
        for j1 in 0..e {
            for l1 in 0..f {
                let x = a[j1 * f + l1];
                if x == 0 {
                    continue;
                }
                for j2 in 0..e {
                    let base = (j1 + j2) * w + l1;
                    for l2 in 0..f {
                        let y = b[j2 * f + l2];
                        if y != 0 {
                            let idx = base + l2;
                            full[idx] = (full[idx] + x * y) % m;
                        }
                    }
                }
            }
        }
        // reduce y-degree with g (monic)
        if f > 1 {
            for j in 0..(2 * e - 1) {
                for l in (f..w).rev() {
                    let c = full[j * w + l];
                    if c == 0 {
                        continue;
                    }
                    full[j * w + l] = 0;
                    for (i, gi) in self.unram.g.iter().take(f).enumerate() {
                        let idx = j * w + l - f + i;
                        full[idx] = (full[idx] - mul_mod(c, *gi % m, m)).rem_euclid(m);
                    }
                }
            }
        }
        // reduce pi-degree with the Eisenstein relation
        for j in (e..(2 * e - 1)).rev() {
            for l in 0..f {
                let c = full[j * w + l] % m;
                if c == 0 {
                    continue;
                }
                full[j * w + l] = 0;
                for i in 0..e {
                    let ai = self.eis[i] % m;
                    if ai != 0 {
                        let idx = (j - e + i) * w + l;
                        full[idx] = (full[idx] - mul_mod(c, ai, m)).rem_euclid(m);
                    }
                }
            }
        }
        let mut out = vec![0i128; e * f];
        for j in 0..e {
            for l in 0..f {
                out[j * f + l] = full[j * w + l].rem_euclid(m);
            }
        }
        out
    }
}

/// Low coefficients of Phi_{p^k}(1 + pi) modulo `m`.
fn eisenstein_low(p: i64, k: u32, m: i128) -> Vec<i128> {
    let e = euler_phi(ipow(p, k)) as usize;
    // B = (1+pi)^{p^{k-1}} by repeated p-th powers
    let mut base = vec![1i128, 1];
    for _ in 1..k {
        let mut acc = vec![1i128];
        for _ in 0..p {
            acc = pmul_full(&acc, &base, m);
        }
        base = acc;
    }
    let mut sum = vec![0i128; e + 1];
    let mut pw = vec![1i128];
    for _ in 0..p {
        for (i, c) in pw.iter().enumerate() {
            sum[i] = (sum[i] + c) % m;
        }
        pw = pmul_full(&pw, &base, m);
    }
    debug_assert_eq!(sum[e], 1);
    sum.truncate(e);
    sum
}

fn pmul_full(a: &[i128], b: &[i128], m: i128) -> Vec<i128> {
    let mut out = vec![0i128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mul_mod(x, y, m)) % m;
        }
    }
    out
}

/// Newton inverse of a pi-basis unit (constant coefficient invertible mod p).
fn unit_inverse(ring: &PadicRing, u: &[i128], prec: u32) -> Vec<i128> {
    let p = ring.p as i128;
    let f = ring.unram.f;
    let dim = ring.dim();
    let m = p.pow(prec);
    // residue-field inverse of the constant coefficient
    let u0: Vec<i128> = u[..f].iter().map(|c| c.rem_euclid(p)).collect();
    let u0inv = residue_inverse(&ring.unram, &u0, p);
    let mut x = vec![0i128; dim];
    x[..f].copy_from_slice(&u0inv);
    let target = (ring.e as u64) * (prec as u64);
    let mut have = 1u64;
    let mut two = vec![0i128; dim];
    two[0] = 2 % m;
    while have < target {
        let ux = ring.mul_vec(u, &x, prec);
        let corr: Vec<i128> = two.iter().zip(&ux).map(|(a, b)| (a - b).rem_euclid(m)).collect();
        x = ring.mul_vec(&x, &corr, prec);
        have *= 2;
    }
    x
}

/// Inverse in F_p[y]/gbar by exponentiation (group order p^f - 1).
fn residue_inverse(un: &Unramified, a: &[i128], p: i128) -> Vec<i128> {
    let f = un.f;
    if f == 1 {
        return vec![inv_mod(a[0], p).expect("residue is a unit")];
    }
    let gbar: Vec<i128> = un.g.iter().map(|c| c.rem_euclid(p)).collect();
    let mulred = |x: &[i128], y: &[i128]| -> Vec<i128> {
        let prod = pmul(x, y, p);
        let (_, r) = pdivmod(&prod, &gbar, p);
        let mut r = r;
        r.resize(f, 0);
        r
    };
    let mut exp = p.pow(f as u32) - 2;
    let mut base = a.to_vec();
    let mut acc = vec![0i128; f];
    acc[0] = 1;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulred(&acc, &base);
        }
        base = mulred(&base, &base);
        exp >>= 1;
    }
    acc
}

// ---------------------------------------------------------------------------
// Elements
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    ExactZero,
    /// Zero modulo p^abs.
    Zero(i64),
    /// p^shift * sum c_{j,l} pi^j y^l, coefficients mod p^prec, not all divisible by p.
    Val { shift: i64, prec: u32, c: Vec<i128> },
}

/// Element of `Q_p(zeta_{p^k})[y]/g(y)` with absolute precision tracking.
#[derive(Clone)]
pub struct PadicCyclo {
    ring: Arc<PadicRing>,
    repr: Repr,
}

impl fmt::Debug for PadicCyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for PadicCyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::ExactZero => write!(f, "0"),
            Repr::Zero(a) => write!(f, "O({}^{})", self.ring.p, a),
            Repr::Val { shift, prec, c } => {
                write!(f, "{}^{} * [", self.ring.p, shift)?;
                for (i, x) in c.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "] + O({}^{})", self.ring.p, shift + *prec as i64)
            }
        }
    }
}

impl PadicCyclo {
    fn from_parts(ring: &Arc<PadicRing>, shift: i64, prec: i64, c: Vec<i128>) -> PadicCyclo {
        let mut prec = prec.min(ring.digits as i64);
        if prec <= 0 {
            return PadicCyclo { ring: ring.clone(), repr: Repr::Zero(shift + prec.max(0)) };
        }
        let p = ring.p as i128;
        let mut m = p.pow(prec as u32);
        let mut c: Vec<i128> = c.into_iter().map(|x| x.rem_euclid(m)).collect();
        let mut shift = shift;
        if c.iter().all(|&x| x == 0) {
            return PadicCyclo { ring: ring.clone(), repr: Repr::Zero(shift + prec) };
        }
        while c.iter().all(|&x| x % p == 0) {
            for x in c.iter_mut() {
                *x /= p;
            }
            shift += 1;
            prec -= 1;
            m /= p;
            if prec == 0 {
                return PadicCyclo { ring: ring.clone(), repr: Repr::Zero(shift) };
            }
            for x in c.iter_mut() {
                *x %= m;
            }
        }
        PadicCyclo { ring: ring.clone(), repr: Repr::Val { shift, prec: prec as u32, c } }
    }

    pub fn ring(&self) -> &Arc<PadicRing> {
        &self.ring
    }

    pub fn exact_zero(ring: &Arc<PadicRing>) -> PadicCyclo {
        PadicCyclo { ring: ring.clone(), repr: Repr::ExactZero }
    }

    pub fn zero_to(ring: &Arc<PadicRing>, abs: i64) -> PadicCyclo {
        PadicCyclo { ring: ring.clone(), repr: Repr::Zero(abs) }
    }

    pub fn from_int(ring: &Arc<PadicRing>, n: i64) -> PadicCyclo {
        PadicCyclo::from_i128(ring, n as i128)
    }

    pub fn from_i128(ring: &Arc<PadicRing>, n: i128) -> PadicCyclo {
        if n == 0 {
            return PadicCyclo::exact_zero(ring);
        }
        let p = ring.p as i128;
        let v = val_p(n, p);
        let mut c = vec![0i128; ring.dim()];
        c[0] = n / p.pow(v);
        PadicCyclo::from_parts(ring, v as i64, ring.digits as i64, c)
    }

    pub fn one(ring: &Arc<PadicRing>) -> PadicCyclo {
        PadicCyclo::from_int(ring, 1)
    }

    pub fn from_ratio(ring: &Arc<PadicRing>, num: i64, den: i64) -> Result<PadicCyclo> {
        if den == 0 {
            return Err(Error::DivisionByZero);
        }
        PadicCyclo::from_int(ring, num).try_div(&PadicCyclo::from_int(ring, den))
    }

    pub fn from_bigratio(ring: &Arc<PadicRing>, q: &num_rational::BigRational) -> Result<PadicCyclo> {
        use num_traits::{Signed, ToPrimitive, Zero};
        if q.is_zero() {
            return Ok(PadicCyclo::exact_zero(ring));
        }
        let conv = |b: &num_bigint::BigInt| -> Result<PadicCyclo> {
            // strip p-power, reduce the rest mod p^digits
            let p = num_bigint::BigInt::from(ring.p);
            let mut n = b.abs();
            let mut v = 0i64;
            while (&n % &p).is_zero() {
                n /= &p;
                v += 1;
            }
            let modulus = num_bigint::BigInt::from(ring.modulus);
            let mut r = (&n % &modulus).to_i128().unwrap();
            if b.is_negative() {
                r = -r;
            }
            let mut c = vec![0i128; ring.dim()];
            c[0] = r;
            Ok(PadicCyclo::from_parts(ring, v, ring.digits as i64, c))
        };
        conv(q.numer())?.try_div(&conv(q.denom())?)
    }

    /// Element from a pi-basis coefficient vector (length e*f) with given shift.
    pub fn from_pi_coeffs(ring: &Arc<PadicRing>, shift: i64, c: Vec<i128>) -> PadicCyclo {
        assert_eq!(c.len(), ring.dim());
        PadicCyclo::from_parts(ring, shift, ring.digits as i64, c)
    }

    /// Same, with explicit relative precision.
    pub fn from_pi_coeffs_prec(ring: &Arc<PadicRing>, shift: i64, prec: i64, c: Vec<i128>) -> PadicCyclo {
        assert_eq!(c.len(), ring.dim());
        PadicCyclo::from_parts(ring, shift, prec, c)
    }

    /// The uniformizer pi = x - 1 (zero in the level-0 ring).
    pub fn pi(ring: &Arc<PadicRing>) -> PadicCyclo {
        if ring.level == 0 {
            return PadicCyclo::exact_zero(ring);
        }
        let mut c = vec![0i128; ring.dim()];
        c[ring.f()] = 1;
        PadicCyclo::from_parts(ring, 0, ring.digits as i64, c)
    }

    /// Distinguished generator x = 1 + pi of the tower.
    pub fn generator(ring: &Arc<PadicRing>) -> PadicCyclo {
        PadicCyclo::one(ring) + PadicCyclo::pi(ring)
    }

    /// The adjoined prime-to-p root of unity y.
    pub fn unramified_root(ring: &Arc<PadicRing>) -> PadicCyclo {
        let f = ring.f();
        let mut c = vec![0i128; ring.dim()];
        if f == 1 {
            c[0] = (-ring.unram.g[0]).rem_euclid(ring.modulus);
        } else {
            c[1] = 1;
        }
        PadicCyclo::from_parts(ring, 0, ring.digits as i64, c)
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.repr, Repr::ExactZero)
    }

    /// True for exact zero and for values indistinguishable from zero.
    pub fn is_zero(&self) -> bool {
        !matches!(self.repr, Repr::Val { .. })
    }

    /// Absolute precision in powers of p (`i64::MAX` for exact zero).
    pub fn abs_precision(&self) -> i64 {
        match &self.repr {
            Repr::ExactZero => i64::MAX,
            Repr::Zero(a) => *a,
            Repr::Val { shift, prec, .. } => shift + *prec as i64,
        }
    }

    /// Normalized valuation in (1/e) Z; `None` for zero.
    pub fn valuation(&self) -> Option<Ratio<i64>> {
        match &self.repr {
            Repr::Val { shift, c, .. } => {
                let p = self.ring.p as i128;
                let f = self.ring.f();
                let e = self.ring.e as i64;
                let mut best = i64::MAX;
                for j in 0..self.ring.e {
                    let blk = &c[j * f..(j + 1) * f];
                    if let Some(v) = blk.iter().filter(|&&x| x != 0).map(|&x| val_p(x, p) as i64).min() {
                        best = best.min((shift + v) * e + j as i64);
                    }
                }
                Some(Ratio::new(best, e))
            }
            _ => None,
        }
    }

    /// Lower bound for the valuation (the precision for zeros).
    pub fn valuation_bound(&self) -> Ratio<i64> {
        match &self.repr {
            Repr::ExactZero => Ratio::from_integer(i64::MAX / 4),
            Repr::Zero(a) => Ratio::from_integer(*a),
            Repr::Val { .. } => self.valuation().unwrap(),
        }
    }

    /// Pi-basis coefficients scaled to shift 0 when the element is integral;
    /// returns (shift, prec, coefficients).
    pub fn parts(&self) -> (i64, u32, Vec<i128>) {
        match &self.repr {
            Repr::ExactZero => (0, self.ring.digits, vec![0; self.ring.dim()]),
            Repr::Zero(a) => (*a, 0, vec![0; self.ring.dim()]),
            Repr::Val { shift, prec, c } => (*shift, *prec, c.clone()),
        }
    }

    /// Pi-basis coefficients (length e*f) as integers mod p^abs, for elements
    /// of nonnegative valuation; the modulus exponent is returned alongside.
    pub fn integral_coeffs(&self) -> Option<(u32, Vec<i128>)> {
        let p = self.ring.p as i128;
        match &self.repr {
            Repr::ExactZero => Some((self.ring.digits, vec![0; self.ring.dim()])),
            Repr::Zero(a) => {
                if *a < 0 {
                    None
                } else {
                    Some((*a as u32, vec![0; self.ring.dim()]))
                }
            }
            Repr::Val { shift, prec, c } => {
                if *shift < 0 {
                    return None;
                }
                let abs = (*shift as u32) + prec;
                let scale = p.pow(*shift as u32);
                Some((abs, c.iter().map(|x| x * scale).collect()))
            }
        }
    }

    fn same_ring(&self, o: &PadicCyclo) -> bool {
        Arc::ptr_eq(&self.ring, &o.ring) || *self.ring == *o.ring
    }

    pub fn check_compatible(&self, o: &PadicCyclo) -> Result<()> {
        if self.same_ring(o) {
            Ok(())
        } else {
            Err(Error::Usage(format!(
                "incompatible rings (p={}, level {}) vs (p={}, level {})",
                self.ring.p, self.ring.level, o.ring.p, o.ring.level
            )))
        }
    }

    fn add_impl(&self, o: &PadicCyclo) -> PadicCyclo {
        assert!(self.same_ring(o), "mixed p-adic rings");
        match (&self.repr, &o.repr) {
            (Repr::ExactZero, _) => o.clone(),
            (_, Repr::ExactZero) => self.clone(),
            (Repr::Zero(a), Repr::Zero(b)) => PadicCyclo::zero_to(&self.ring, (*a).min(*b)),
            (Repr::Zero(a), Repr::Val { .. }) => o.truncate(*a),
            (Repr::Val { .. }, Repr::Zero(b)) => self.truncate(*b),
            (Repr::Val { shift: sa, prec: pa, c: ca }, Repr::Val { shift: sb, prec: pb, c: cb }) => {
                let abs = (sa + *pa as i64).min(sb + *pb as i64);
                let s = (*sa).min(*sb);
                let prec = abs - s;
                if prec <= 0 {
                    return PadicCyclo::zero_to(&self.ring, abs);
                }
                let p = self.ring.p as i128;
                let prec_c = prec.min(self.ring.digits as i64);
                let m = p.pow(prec_c as u32);
                let scale = |d: i64| -> i128 {
                    if d >= prec_c {
                        0
                    } else {
                        p.pow(d as u32)
                    }
                };
                let (xa, xb) = (scale(sa - s), scale(sb - s));
                let c: Vec<i128> = ca
                    .iter()
                    .zip(cb)
                    .map(|(a, b)| (mul_mod(*a, xa, m) + mul_mod(*b, xb, m)) % m)
                    .collect();
                PadicCyclo::from_parts(&self.ring, s, prec_c, c)
            }
        }
    }

    /// Forget digits at or beyond absolute precision `abs`.
    pub fn truncate(&self, abs: i64) -> PadicCyclo {
        match &self.repr {
            Repr::ExactZero => PadicCyclo::zero_to(&self.ring, abs),
            Repr::Zero(a) => PadicCyclo::zero_to(&self.ring, (*a).min(abs)),
            Repr::Val { shift, prec, c } => {
                let new_abs = (shift + *prec as i64).min(abs);
                PadicCyclo::from_parts(&self.ring, *shift, new_abs - shift, c.clone())
            }
        }
    }

    fn mul_impl(&self, o: &PadicCyclo) -> PadicCyclo {
        assert!(self.same_ring(o), "mixed p-adic rings");
        match (&self.repr, &o.repr) {
            (Repr::ExactZero, _) | (_, Repr::ExactZero) => PadicCyclo::exact_zero(&self.ring),
            (Repr::Zero(a), Repr::Zero(b)) => PadicCyclo::zero_to(&self.ring, a + b),
            (Repr::Zero(a), Repr::Val { shift, .. }) | (Repr::Val { shift, .. }, Repr::Zero(a)) => {
                PadicCyclo::zero_to(&self.ring, a + shift)
            }
            (Repr::Val { shift: sa, prec: pa, c: ca }, Repr::Val { shift: sb, prec: pb, c: cb }) => {
                let prec = (*pa).min(*pb);
                let c = self.ring.mul_vec(ca, cb, prec);
                PadicCyclo::from_parts(&self.ring, sa + sb, prec as i64, c)
            }
        }
    }

    pub fn try_add(&self, o: &PadicCyclo) -> Result<PadicCyclo> {
        self.check_compatible(o)?;
        Ok(self.add_impl(o))
    }

    pub fn try_mul(&self, o: &PadicCyclo) -> Result<PadicCyclo> {
        self.check_compatible(o)?;
        Ok(self.mul_impl(o))
    }

    pub fn try_inv(&self) -> Result<PadicCyclo> {
        let ring = &self.ring;
        let (shift, prec, c) = match &self.repr {
            Repr::ExactZero => return Err(Error::DivisionByZero),
            Repr::Zero(a) => {
                return Err(Error::PrecisionExhausted(format!(
                    "division by a value indistinguishable from 0 mod {}^{}",
                    ring.p, a
                )))
            }
            Repr::Val { shift, prec, c } => (*shift, *prec, c.clone()),
        };
        let p = ring.p as i128;
        let f = ring.f();
        let e = ring.e;
        let j0 = (0..e)
            .find(|&j| c[j * f..(j + 1) * f].iter().any(|&x| x % p != 0))
            .expect("normalized element has a unit coefficient");
        if j0 == 0 {
            let inv = unit_inverse(ring, &c, prec);
            return Ok(PadicCyclo::from_parts(ring, -shift, prec as i64, inv));
        }
        if prec < 2 {
            return Err(Error::PrecisionExhausted("not enough digits to invert a non-unit".into()));
        }
        // divide by pi j0 times; the last digit becomes unreliable
        let m = p.pow(prec);
        let mut u = c;
        for _ in 0..j0 {
            let d0: Vec<i128> = u[..f].to_vec();
            let mut next = vec![0i128; e * f];
            next[..(e - 1) * f].copy_from_slice(&u[f..]);
            for (l, &d) in d0.iter().enumerate() {
                if d == 0 {
                    continue;
                }
                let q = d / p;
                for j in 0..e {
                    let coef = ring.p_over_pi[j * f];
                    if coef != 0 {
                        next[j * f + l] = (next[j * f + l] + mul_mod(q, coef % m, m)).rem_euclid(m);
                    }
                }
            }
            u = next;
        }
        let prec2 = prec - 1;
        let m2 = p.pow(prec2);
        let u: Vec<i128> = u.into_iter().map(|x| x.rem_euclid(m2)).collect();
        let uinv = unit_inverse(ring, &u, prec2);
        // pi^{-j0} = pi^{e-j0} * w^{-1} / p
        let mut pie = vec![0i128; e * f];
        pie[(e - j0) * f] = 1;
        let winv: Vec<i128> = ring.w_inv.iter().map(|x| x.rem_euclid(m2)).collect();
        let t = ring.mul_vec(&pie, &winv, prec2);
        let inv = ring.mul_vec(&t, &uinv, prec2);
        Ok(PadicCyclo::from_parts(ring, -shift - 1, prec2 as i64, inv))
    }

    pub fn try_div(&self, o: &PadicCyclo) -> Result<PadicCyclo> {
        self.check_compatible(o)?;
        if self.is_exact_zero() && !o.is_zero() {
            return Ok(self.clone());
        }
        Ok(self.mul_impl(&o.try_inv()?))
    }

    pub fn pow(&self, mut n: u64) -> PadicCyclo {
        let mut acc = PadicCyclo::one(&self.ring);
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn pow_i(&self, n: i64) -> Result<PadicCyclo> {
        if n >= 0 {
            Ok(self.pow(n as u64))
        } else {
            Ok(self.try_inv()?.pow((-n) as u64))
        }
    }

    /// Multiply by p^k (k may be negative); exact on the precision.
    pub fn mul_p_power(&self, k: i64) -> PadicCyclo {
        match &self.repr {
            Repr::ExactZero => self.clone(),
            Repr::Zero(a) => PadicCyclo::zero_to(&self.ring, a + k),
            Repr::Val { shift, prec, c } => PadicCyclo {
                ring: self.ring.clone(),
                repr: Repr::Val { shift: shift + k, prec: *prec, c: c.clone() },
            },
        }
    }

    /// Evaluate a pi-basis representation at an arbitrary image of pi in
    /// another ring (Horner in the pi-direction; y maps to `y_image`).
    fn substitute(&self, target: &Arc<PadicRing>, pi_image: &PadicCyclo, y_image: &PadicCyclo) -> PadicCyclo {
        match &self.repr {
            Repr::ExactZero => PadicCyclo::exact_zero(target),
            Repr::Zero(a) => PadicCyclo::zero_to(target, *a),
            Repr::Val { shift, prec, c } => {
                let f = self.ring.f();
                let ypows: Vec<PadicCyclo> = (0..f).map(|l| y_image.pow(l as u64)).collect();
                let mut acc = PadicCyclo::exact_zero(target);
                for j in (0..self.ring.e).rev() {
                    let mut coef = PadicCyclo::exact_zero(target);
                    for l in 0..f {
                        let x = c[j * f + l];
                        if x != 0 {
                            coef = &coef + &(&PadicCyclo::from_i128(target, x) * &ypows[l]);
                        }
                    }
                    acc = &(&acc * pi_image) + &coef;
                }
                acc.truncate((*prec) as i64).mul_p_power(*shift)
            }
        }
    }

    /// Embed into a ring of higher tower level with the same unramified data:
    /// the level-t generator maps to `x_k^{p^{k-t}}`.
    pub fn lift_to(&self, target: &Arc<PadicRing>) -> Result<PadicCyclo> {
        if target.p != self.ring.p || target.level < self.ring.level || target.unram.m != self.ring.unram.m {
            return Err(Error::Usage("cannot lift into an incompatible ring".into()));
        }
        if Arc::ptr_eq(target, &self.ring) {
            return Ok(self.clone());
        }
        if self.ring.level == 0 {
            // a level-0 element only occupies the pi^0 block
            return Ok(match &self.repr {
                Repr::ExactZero => PadicCyclo::exact_zero(target),
                Repr::Zero(a) => PadicCyclo::zero_to(target, *a),
                Repr::Val { shift, prec, c } => {
                    let mut v = vec![0i128; target.dim()];
                    v[..c.len()].copy_from_slice(c);
                    PadicCyclo::from_parts(target, *shift, *prec as i64, v)
                }
            });
        }
        let x = PadicCyclo::generator(target);
        let pi_img = if self.ring.level == 0 {
            PadicCyclo::exact_zero(target)
        } else {
            &x.pow(ipow(target.p, target.level - self.ring.level) as u64) - &PadicCyclo::one(target)
        };
        let y = PadicCyclo::unramified_root(target);
        Ok(self.substitute(target, &pi_img, &y))
    }

    /// Galois action x -> x^a (gcd(a, p) = 1), trivial on y.
    pub fn galois(&self, a: i64) -> PadicCyclo {
        let ring = &self.ring;
        if ring.level == 0 {
            return self.clone();
        }
        match &self.repr {
            Repr::Val { shift, prec, c } => {
                let mat = ring.galois_matrix(a);
                let e = ring.e;
                let f = ring.f();
                let m = (ring.p as i128).pow(*prec);
                let mut out = vec![0i128; e * f];
                for j in 0..e {
                    for l in 0..f {
                        let cj = c[j * f + l];
                        if cj == 0 {
                            continue;
                        }
                        for i in 0..e {
                            let mji = mat[j * e + i] % m;
                            if mji != 0 {
                                out[i * f + l] = (out[i * f + l] + mul_mod(cj, mji, m)) % m;
                            }
                        }
                    }
                }
                PadicCyclo::from_parts(ring, *shift, *prec as i64, out)
            }
            _ => self.clone(),
        }
    }

    /// Multiplication by the uniformizer pi = x - 1.
    pub fn mul_pi(&self) -> PadicCyclo {
        if self.ring.level == 0 {
            return PadicCyclo::exact_zero(&self.ring);
        }
        match &self.repr {
            Repr::Val { shift, prec, c } => {
                let out = self.ring.mul_pi_vec(c, *prec);
                PadicCyclo::from_parts(&self.ring, *shift, *prec as i64, out)
            }
            _ => self.clone(),
        }
    }

    /// Component of pi^j as an element of the level-0 ring `base` (same unramified data).
    pub fn pi_component(&self, j: usize, base: &Arc<PadicRing>) -> PadicCyclo {
        assert_eq!(base.level, 0);
        assert_eq!(base.f(), self.ring.f());
        let f = self.ring.f();
        match &self.repr {
            Repr::ExactZero => PadicCyclo::exact_zero(base),
            Repr::Zero(a) => PadicCyclo::zero_to(base, *a),
            Repr::Val { shift, prec, c } => {
                PadicCyclo::from_parts(base, *shift, *prec as i64, c[j * f..(j + 1) * f].to_vec())
            }
        }
    }

    /// sum_j comps[j] pi^j with level-0 components.
    pub fn from_pi_components(ring: &Arc<PadicRing>, comps: &[PadicCyclo]) -> PadicCyclo {
        let mut acc = PadicCyclo::exact_zero(ring);
        for c in comps.iter().rev() {
            acc = acc.mul_pi();
            acc = &acc + &c.lift_to(ring).expect("level-0 component");
        }
        acc
    }

    /// True when `self - other` vanishes modulo p^abs.
    pub fn eq_to_precision(&self, other: &PadicCyclo, abs: i64) -> bool {
        let d = self - other;
        match d.repr {
            Repr::ExactZero => true,
            Repr::Zero(a) => a >= abs,
            Repr::Val { .. } => d.valuation().unwrap() >= Ratio::from_integer(abs),
        }
    }
}

impl PartialEq for PadicCyclo {
    /// Equality to the common precision of both operands.
    fn eq(&self, other: &Self) -> bool {
        if !self.same_ring(other) {
            return false;
        }
        let abs = self.abs_precision().min(other.abs_precision());
        let d = self - other;
        match d.repr {
            Repr::ExactZero => true,
            Repr::Zero(_) => true,
            Repr::Val { .. } => d.valuation().unwrap() >= Ratio::from_integer(abs),
        }
    }
}

impl<'a> Add<&'a PadicCyclo> for &'a PadicCyclo {
    type Output = PadicCyclo;
    fn add(self, o: &PadicCyclo) -> PadicCyclo {
        self.add_impl(o)
    }
}

impl<'a> Sub<&'a PadicCyclo> for &'a PadicCyclo {
    type Output = PadicCyclo;
    fn sub(self, o: &PadicCyclo) -> PadicCyclo {
        self.add_impl(&-o)
    }
}

impl<'a> Mul<&'a PadicCyclo> for &'a PadicCyclo {
    type Output = PadicCyclo;
    fn mul(self, o: &PadicCyclo) -> PadicCyclo {
        self.mul_impl(o)
    }
}

impl Add for PadicCyclo {
    type Output = PadicCyclo;
    fn add(self, o: PadicCyclo) -> PadicCyclo {
        self.add_impl(&o)
    }
}

impl Sub for PadicCyclo {
    type Output = PadicCyclo;
    fn sub(self, o: PadicCyclo) -> PadicCyclo {
        self.add_impl(&-&o)
    }
}

impl Mul for PadicCyclo {
    type Output = PadicCyclo;
    fn mul(self, o: PadicCyclo) -> PadicCyclo {
        self.mul_impl(&o)
    }
}

impl Neg for &PadicCyclo {
    type Output = PadicCyclo;
    fn neg(self) -> PadicCyclo {
        match &self.repr {
            Repr::Val { shift, prec, c } => {
                let m = (self.ring.p as i128).pow(*prec);
                PadicCyclo {
                    ring: self.ring.clone(),
                    repr: Repr::Val { shift: *shift, prec: *prec, c: c.iter().map(|x| (-x).rem_euclid(m)).collect() },
                }
            }
            _ => self.clone(),
        }
    }
}

impl Neg for PadicCyclo {
    type Output = PadicCyclo;
    fn neg(self) -> PadicCyclo {
        -&self
    }
}

/// Distinguished generator of Z_p[zeta_{p^t}] (or 1 for t = 0) at `digits` digits.
pub fn embed_pth_power_root(p: i64, t: u32, digits: u32) -> Result<PadicCyclo> {
    let ring = PadicRing::tower(p, t, digits)?;
    Ok(PadicCyclo::generator(&ring))
}

/// Evaluate an integer polynomial at a ring element.
pub fn eval_int_poly(poly: &[i64], x: &PadicCyclo) -> PadicCyclo {
    let ring = x.ring().clone();
    let mut acc = PadicCyclo::exact_zero(&ring);
    for &c in poly.iter().rev() {
        acc = &(&acc * x) + &PadicCyclo::from_int(&ring, c);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Ratio<i64> {
        Ratio::new(n, d)
    }

    #[test]
    fn cyclotomic_examples() {
        assert_eq!(cyclotomic_polynomial(3, 1).unwrap(), vec![1, 1, 1]);
        assert_eq!(cyclotomic_polynomial(3, 2).unwrap(), vec![1, 0, 0, 1, 0, 0, 1]);
        assert_eq!(cyclotomic_polynomial(5, 1).unwrap(), vec![1, 1, 1, 1, 1]);
        assert!(cyclotomic_polynomial(3, 0).is_err());
        for p in [3i64, 5, 7] {
            for m in 1..4 {
                let s: i64 = cyclotomic_polynomial(p, m).unwrap().iter().sum();
                assert_eq!(s, p);
            }
        }
    }

    #[test]
    fn scalar_square() {
        let a = PadicScalar::from_int(3, 4, 5);
        let b = a.try_mul(&a).unwrap();
        assert_eq!(b.residue(), Some(16));
        assert_eq!(b.precision(), 5);
    }

    #[test]
    fn scalar_inverse_of_two() {
        let a = PadicScalar::from_int(3, 2, 4);
        assert_eq!(a.try_inv().unwrap().residue(), Some(41));
    }

    #[test]
    fn scalar_division_loses_precision() {
        let a = PadicScalar::from_int(3, 1, 6);
        let b = PadicScalar::from_int(3, 9, 6);
        let q = a.try_div(&b).unwrap();
        assert_eq!(q.valuation(), Some(-2));
        assert_eq!(q.precision(), 2);
        let z = PadicScalar::from_int(3, 81, 4);
        assert!(matches!(a.try_div(&z), Err(Error::PrecisionExhausted(_))));
        let other = PadicScalar::from_int(5, 1, 4);
        assert!(matches!(a.try_add(&other), Err(Error::Usage(_))));
    }

    #[test]
    fn generator_satisfies_phi() {
        for t in 1..4 {
            let x = embed_pth_power_root(3, t, 12).unwrap();
            let phi = cyclotomic_polynomial(3, t).unwrap();
            assert!(eval_int_poly(&phi, &x).is_zero());
            let pi = &x - &PadicCyclo::one(x.ring());
            assert_eq!(pi.valuation().unwrap(), r(1, euler_phi(ipow(3, t))));
        }
        let one = embed_pth_power_root(3, 0, 8).unwrap();
        assert_eq!(one, PadicCyclo::one(one.ring()));
    }

    #[test]
    fn norm_of_one_minus_zeta_is_p() {
        let ring = PadicRing::tower(3, 2, 12).unwrap();
        let x = PadicCyclo::generator(&ring);
        let one = PadicCyclo::one(&ring);
        let mut prod = one.clone();
        for a in 1..9 {
            if a % 3 != 0 {
                prod = &prod * &(&one - &x.pow(a));
            }
        }
        assert_eq!(prod, PadicCyclo::from_int(&ring, 3));
    }

    #[test]
    fn inverse_of_nonunit() {
        let ring = PadicRing::tower(3, 3, 14).unwrap();
        let x = PadicCyclo::generator(&ring);
        let one = PadicCyclo::one(&ring);
        for a in [&x - &one, (&x - &one).pow(5) + PadicCyclo::from_int(&ring, 9), x.pow(7) + x.pow(2)] {
            let inv = a.try_inv().unwrap();
            let prod = &a * &inv;
            assert!(prod.eq_to_precision(&one, 10), "a={a} inv={inv} prod={prod}");
            assert_eq!(inv.valuation().unwrap(), -a.valuation().unwrap());
        }
    }

    #[test]
    fn unramified_root_has_order_m() {
        let u = Unramified::new(3, 8, 12).unwrap();
        assert_eq!(u.f, 2);
        let ring = PadicRing::new(3, 1, u, 12).unwrap();
        let y = PadicCyclo::unramified_root(&ring);
        let one = PadicCyclo::one(&ring);
        assert_eq!(y.pow(8), one);
        assert!(!(y.pow(4) == one));
        assert_eq!(y.pow(4), -&one);
        let inv = (&y + &one).try_inv().unwrap();
        assert_eq!(&inv * &(&y + &one), one);
    }

    #[test]
    fn hensel_root_round_trip() {
        let u = Unramified::new(5, 4, 10).unwrap();
        assert_eq!(u.f, 1);
        let text = u.to_text(5);
        let (p, back) = Unramified::from_text(&text).unwrap();
        assert_eq!(p, 5);
        assert_eq!(back, u);
    }

    #[test]
    fn lift_preserves_relation() {
        let r1 = PadicRing::tower(3, 1, 10).unwrap();
        let r3 = PadicRing::tower(3, 3, 10).unwrap();
        let x1 = PadicCyclo::generator(&r1).lift_to(&r3).unwrap();
        assert!(eval_int_poly(&[1, 1, 1], &x1).is_zero());
        let a = &PadicCyclo::generator(&r1) + &PadicCyclo::from_int(&r1, 5);
        let b = a.pow(3);
        assert_eq!(b.lift_to(&r3).unwrap(), a.lift_to(&r3).unwrap().pow(3));
    }

    #[test]
    fn galois_is_multiplicative() {
        let ring = PadicRing::tower(3, 2, 10).unwrap();
        let x = PadicCyclo::generator(&ring);
        let a = &x.pow(2) + &PadicCyclo::from_int(&ring, 4);
        let b = &x.pow(5) - &PadicCyclo::from_int(&ring, 2);
        for s in [2i64, 4, 5, 7] {
            assert_eq!((&a * &b).galois(s), &a.galois(s) * &b.galois(s));
        }
        assert_eq!(x.galois(4), x.pow(4));
    }
}
