//! Exact arithmetic in cyclotomic fields `Q(zeta_M)`, complex and p-adic
//! embeddings, and recovery of exact elements from floating embeddings.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::{cyclotomic_poly, euler_phi, gcd, ext_gcd, lcm};
use crate::dd::{CDD, DD};
use crate::error::{Error, Result};
use crate::padic::{PadicCyclo, PadicRing};

#[derive(Debug, PartialEq, Eq)]
pub struct CycloField {
    pub modulus: i64,
    /// Ascending coefficients of Phi_M, monic.
    phi: Vec<i64>,
}

impl CycloField {
    pub fn new(modulus: i64) -> Arc<CycloField> {
        assert!(modulus >= 1, "cyclotomic modulus must be positive");
        Arc::new(CycloField { modulus, phi: cyclotomic_poly(modulus) })
    }

    pub fn degree(&self) -> usize {
        self.phi.len() - 1
    }

    /// Units mod M in ascending order: the embedding indices.
    pub fn embedding_indices(&self) -> Vec<i64> {
        (1..=self.modulus).filter(|&j| gcd(j, self.modulus) == 1).map(|j| j % self.modulus).collect()
    }
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Reduce a polynomial (ascending) modulo the monic integer polynomial `phi`.
fn reduce(mut v: Vec<BigRational>, phi: &[i64]) -> Vec<BigRational> {
    let d = phi.len() - 1;
    while v.len() > d {
        let c = v.pop().unwrap();
        if c.is_zero() {
            continue;
        }
        let off = v.len() - d;
        for (i, &pi) in phi[..d].iter().enumerate() {
            if pi != 0 {
                v[off + i] -= &c * rat(pi);
            }
        }
    }
    v.resize(d, BigRational::zero());
    v
}

/// Integer exponent counts sum n_k x^k with k mod M, reduced to Q(zeta_M).
fn reduce_counts(counts: &[i64], phi: &[i64]) -> Vec<BigRational> {
    let d = phi.len() - 1;
    let mut v: Vec<i128> = counts.iter().map(|&c| c as i128).collect();
    while v.len() > d {
        let c = v.pop().unwrap();
        if c == 0 {
            continue;
        }
        let off = v.len() - d;
        for (i, &pi) in phi[..d].iter().enumerate() {
            v[off + i] -= c * pi as i128;
        }
    }
    v.resize(d, 0);
    v.into_iter().map(|c| BigRational::from_integer(BigInt::from(c))).collect()
}

fn poly_trim(v: &mut Vec<BigRational>) {
    while v.len() > 1 && v.last().unwrap().is_zero() {
        v.pop();
    }
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

fn poly_divmod(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let db = b.len() - 1;
    if r.len() <= db {
        return (vec![BigRational::zero()], r);
    }
    let lead = b[db].clone();
    let mut q = vec![BigRational::zero(); r.len() - db];
    for i in (0..q.len()).rev() {
        let c = &r[i + db] / &lead;
        if !c.is_zero() {
            for (j, bj) in b.iter().enumerate() {
                r[i + j] -= &c * bj;
            }
        }
        q[i] = c;
    }
    r.truncate(db.max(1));
    poly_trim(&mut r);
    (q, r)
}

fn poly_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len().max(b.len());
    let z = BigRational::zero();
    let mut out: Vec<BigRational> = (0..n).map(|i| a.get(i).unwrap_or(&z) - b.get(i).unwrap_or(&z)).collect();
    poly_trim(&mut out);
    out
}

/// Exact element of Q(zeta_M) as a coefficient vector in the power basis.
#[derive(Clone)]
pub struct CycloNumber {
    field: Arc<CycloField>,
    coeffs: Vec<BigRational>,
}

impl PartialEq for CycloNumber {
    /// Equality as elements of the common cyclotomic field.
    fn eq(&self, o: &CycloNumber) -> bool {
        if self.field.modulus == o.field.modulus {
            self.coeffs == o.coeffs
        } else {
            (self - o).is_zero()
        }
    }
}

impl Eq for CycloNumber {}

impl fmt::Debug for CycloNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for CycloNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})*z{}", self.field.modulus)?,
                _ => write!(f, "({c})*z{}^{i}", self.field.modulus)?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl CycloNumber {
    pub fn new(modulus: i64, coeffs: Vec<BigRational>) -> CycloNumber {
        CycloNumber::in_field(&CycloField::new(modulus), coeffs)
    }

    /// Reduces an arbitrary-length coefficient vector into the field.
    pub fn in_field(field: &Arc<CycloField>, coeffs: Vec<BigRational>) -> CycloNumber {
        CycloNumber { field: field.clone(), coeffs: reduce(coeffs, &field.phi) }
    }

    pub fn field(&self) -> &Arc<CycloField> {
        &self.field
    }

    pub fn modulus(&self) -> i64 {
        self.field.modulus
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn zero(modulus: i64) -> CycloNumber {
        CycloNumber::new(modulus, vec![])
    }

    pub fn one(modulus: i64) -> CycloNumber {
        CycloNumber::from_rational(modulus, BigRational::one())
    }

    pub fn from_int(modulus: i64, n: i64) -> CycloNumber {
        CycloNumber::from_rational(modulus, rat(n))
    }

    pub fn from_ratio(modulus: i64, n: i64, d: i64) -> CycloNumber {
        CycloNumber::from_rational(modulus, BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn from_rational(modulus: i64, q: BigRational) -> CycloNumber {
        CycloNumber::new(modulus, vec![q])
    }

    /// zeta_M^k with zeta_M = exp(2 pi i / M) under the standard embedding.
    pub fn root_of_unity(modulus: i64, k: i64) -> CycloNumber {
        let field = CycloField::new(modulus);
        CycloNumber::root_in(&field, k)
    }

    pub fn root_in(field: &Arc<CycloField>, k: i64) -> CycloNumber {
        let m = field.modulus;
        let mut counts = vec![0i64; m as usize];
        counts[k.rem_euclid(m) as usize] = 1;
        CycloNumber::from_counts(field, &counts)
    }

    /// sum_k counts[k] zeta_M^k for k in 0..M.
    pub fn from_counts(field: &Arc<CycloField>, counts: &[i64]) -> CycloNumber {
        assert_eq!(counts.len() as i64, field.modulus);
        CycloNumber { field: field.clone(), coeffs: reduce_counts(counts, &field.phi) }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_rational(&self) -> bool {
        self.coeffs.iter().skip(1).all(|c| c.is_zero())
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        if self.is_rational() {
            Some(self.coeffs.first().cloned().unwrap_or_else(BigRational::zero))
        } else {
            None
        }
    }

    fn same_field(&self, o: &CycloNumber) -> bool {
        Arc::ptr_eq(&self.field, &o.field) || self.field.modulus == o.field.modulus
    }

    /// Both operands moved to Q(zeta_lcm).
    fn unify(&self, o: &CycloNumber) -> (CycloNumber, CycloNumber) {
        if self.same_field(o) {
            return (self.clone(), o.clone());
        }
        let l = lcm(self.modulus(), o.modulus());
        let field = CycloField::new(l);
        (self.coerce_into(&field).unwrap(), o.coerce_into(&field).unwrap())
    }

    /// Image in Q(zeta_{M'}) for M | M' (zeta_M -> zeta_{M'}^{M'/M}).
    pub fn coerce(&self, target: i64) -> Result<CycloNumber> {
        if target == self.modulus() {
            return Ok(self.clone());
        }
        self.coerce_into(&CycloField::new(target))
    }

    pub fn coerce_into(&self, field: &Arc<CycloField>) -> Result<CycloNumber> {
        let m = self.modulus();
        if field.modulus % m != 0 {
            return Err(Error::Usage(format!("cannot coerce Q(zeta_{m}) into Q(zeta_{})", field.modulus)));
        }
        let step = (field.modulus / m) as usize;
        let mut v = vec![BigRational::zero(); (self.coeffs.len().max(1) - 1) * step + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            v[i * step] = c.clone();
        }
        Ok(CycloNumber::in_field(field, v))
    }

    /// Preimage in Q(zeta_d) for d | M, when the element lies in that subfield.
    pub fn descend(&self, d: i64) -> Option<CycloNumber> {
        let m = self.modulus();
        if m % d != 0 {
            return None;
        }
        // write in the redundant basis x^k, k < M, via the Galois-average trick is
        // costly; instead test candidates from coefficients at multiples of M/d
        // after expressing self with all M powers.
        let step = m / d;
        let full = self.to_counts_basis();
        let mut sub = vec![BigRational::zero(); d as usize];
        for (k, c) in full.iter().enumerate() {
            if !c.is_zero() {
                if k as i64 % step != 0 {
                    // not a pure combination; fall back to an exact comparison below
                    return self.descend_by_solve(d);
                }
                sub[k / step as usize] = c.clone();
            }
        }
        let cand = CycloNumber::new(d, sub);
        (cand.coerce(m).ok()? == *self).then_some(cand)
    }

    fn to_counts_basis(&self) -> Vec<BigRational> {
        let mut v = self.coeffs.clone();
        v.resize(self.modulus() as usize, BigRational::zero());
        v
    }

    fn descend_by_solve(&self, d: i64) -> Option<CycloNumber> {
        // fixed field of the Galois elements a = 1 mod d: the average over them is
        // the projection, and the projection lies in Q(zeta_d) by construction.
        let m = self.modulus();
        let stab: Vec<i64> = (1..m).filter(|&a| gcd(a, m) == 1 && a % d == 1 % d).collect();
        let mut acc = CycloNumber::zero(m);
        for &a in &stab {
            acc = &acc + &self.galois(a);
        }
        let acc = acc.scale(&BigRational::new(BigInt::one(), BigInt::from(stab.len())));
        if acc != *self {
            return None;
        }
        // express acc in powers of zeta_d = zeta_M^{M/d}: solve triangularly
        let dd = euler_phi(d) as usize;
        let basis: Vec<CycloNumber> = (0..dd).map(|i| CycloNumber::root_of_unity(m, i as i64 * (m / d))).collect();
        solve_in_basis(&acc, &basis).map(|c| CycloNumber::new(d, c))
    }

    pub fn scale(&self, q: &BigRational) -> CycloNumber {
        CycloNumber { field: self.field.clone(), coeffs: self.coeffs.iter().map(|c| c * q).collect() }
    }

    pub fn scale_int(&self, n: i64) -> CycloNumber {
        self.scale(&rat(n))
    }

    /// Galois action zeta -> zeta^a.
    pub fn galois(&self, a: i64) -> CycloNumber {
        let m = self.modulus();
        assert_eq!(gcd(a.rem_euclid(m), m), 1, "galois exponent must be a unit mod M");
        let a = a.rem_euclid(m) as usize;
        let mut v = vec![BigRational::zero(); m as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                v[(i * a) % m as usize] += c;
            }
        }
        CycloNumber::in_field(&self.field, v)
    }

    pub fn conj(&self) -> CycloNumber {
        self.galois(-1)
    }

    pub fn try_inv(&self) -> Result<CycloNumber> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if let Some(q) = self.to_rational() {
            return Ok(CycloNumber::from_rational(self.modulus(), q.recip()));
        }
        let phi: Vec<BigRational> = self.field.phi.iter().map(|&c| rat(c)).collect();
        let mut a = self.coeffs.clone();
        poly_trim(&mut a);
        // extended Euclid tracking the cofactor of a
        let (mut r0, mut r1) = (phi, a);
        let (mut s0, mut s1) = (vec![BigRational::zero()], vec![BigRational::one()]);
        while !(r1.len() == 1 && r1[0].is_zero()) {
            let (q, r) = poly_divmod(&r0, &r1);
            r0 = std::mem::replace(&mut r1, r);
            let ns = poly_sub(&s0, &poly_mul(&q, &s1));
            s0 = std::mem::replace(&mut s1, ns);
        }
        if r0.len() != 1 {
            return Err(Error::DivisionByZero);
        }
        let inv = r0[0].recip();
        Ok(CycloNumber::in_field(&self.field, s0.into_iter().map(|c| c * &inv).collect()))
    }

    pub fn try_div(&self, o: &CycloNumber) -> Result<CycloNumber> {
        let (a, b) = self.unify(o);
        Ok(&a * &b.try_inv()?)
    }

    pub fn pow(&self, mut n: u64) -> CycloNumber {
        let mut acc = CycloNumber::one(self.modulus()).coerce_into(&self.field).unwrap();
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

    pub fn pow_i(&self, n: i64) -> Result<CycloNumber> {
        if n >= 0 {
            Ok(self.pow(n as u64))
        } else {
            Ok(self.try_inv()?.pow(n.unsigned_abs()))
        }
    }

    /// Trace down to Q.
    pub fn trace(&self) -> BigRational {
        let mut acc = CycloNumber::zero(self.modulus());
        for j in self.field.embedding_indices() {
            acc = &acc + &self.galois(j);
        }
        acc.to_rational().expect("trace is rational")
    }

    pub fn norm(&self) -> BigRational {
        let mut acc = CycloNumber::one(self.modulus());
        for j in self.field.embedding_indices() {
            acc = &acc * &self.galois(j);
        }
        acc.to_rational().expect("norm is rational")
    }

    /// Evaluate at zeta_M -> exp(2 pi i j / M) in double-double arithmetic.
    pub fn complex_embed(&self, j: i64) -> CDD {
        let m = self.modulus();
        let mut acc = CDD::ZERO;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let z = CDD::root_of_unity(i as i64 * j, m);
            acc = acc + z.scale(bigrat_to_dd(c));
        }
        acc
    }

    /// All complex embeddings in the order of [`CycloField::embedding_indices`].
    pub fn embeddings(&self) -> Vec<CDD> {
        self.field.embedding_indices().into_iter().map(|j| self.complex_embed(j)).collect()
    }

    /// If the element is a root of unity, its exponent `k` with self = zeta_{M'}^k,
    /// where `M' = lcm(M, 2)`.
    pub fn as_root_of_unity(&self) -> Option<(i64, i64)> {
        let m2 = lcm(self.modulus(), 2);
        let me = self.coerce(m2).ok()?;
        // roots of unity have a single nonzero power-basis coefficient in the
        // counts basis only after reduction; compare directly.
        let field = me.field.clone();
        (0..m2).find(|&k| CycloNumber::root_in(&field, k) == me).map(|k| (m2, k))
    }

    /// Homomorphic image in a p-adic ring: zeta_{p^a} maps to the level-a
    /// generator seen at the ring's level, and the prime-to-p part of zeta_M
    /// maps to the matching power of the stored unramified root.
    pub fn padic_embed(&self, ring: &Arc<PadicRing>) -> Result<PadicCyclo> {
        let z = zeta_image(self.modulus(), ring)?;
        let mut acc = PadicCyclo::exact_zero(ring);
        for c in self.coeffs.iter().rev() {
            acc = &acc * &z;
            if !c.is_zero() {
                acc = &acc + &PadicCyclo::from_bigratio(ring, c)?;
            }
        }
        Ok(acc)
    }

    /// Coefficients as "n/d" strings (one per power-basis entry).
    pub fn coeff_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(|c| c.to_string()).collect()
    }

    pub fn from_coeff_strings(modulus: i64, items: &[&str]) -> Result<CycloNumber> {
        let coeffs = items
            .iter()
            .map(|s| parse_rational(s).ok_or_else(|| Error::Format { line: 0, msg: format!("bad rational {s}") }))
            .collect::<Result<Vec<_>>>()?;
        Ok(CycloNumber::new(modulus, coeffs))
    }
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let d: BigInt = d.parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n.parse().ok()?, d))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

/// The image of zeta_M in the given p-adic ring.
pub fn zeta_image(modulus: i64, ring: &Arc<PadicRing>) -> Result<PadicCyclo> {
    let p = ring.p;
    let mut a = 0u32;
    let mut m = modulus;
    while m % p == 0 {
        m /= p;
        a += 1;
    }
    if a > ring.level {
        return Err(Error::Usage(format!("ring level {} too small for zeta_{modulus}", ring.level)));
    }
    if ring.unram.m % m != 0 {
        return Err(Error::Usage(format!("ring lacks the prime-to-p root of order {m}")));
    }
    let pa = crate::arith::ipow(p, a);
    let (_, u, w) = ext_gcd(m as i128, pa as i128);
    // 1 = u m + w p^a, zeta_M = zeta_{p^a}^u zeta_m^w
    let x = PadicCyclo::generator(ring);
    let xa = x.pow(crate::arith::ipow(p, ring.level - a) as u64);
    let ord_tower = pa.max(1);
    let zp = xa.pow((u as i64).rem_euclid(ord_tower) as u64);
    let y = PadicCyclo::unramified_root(ring);
    let ym = y.pow((ring.unram.m / m) as u64);
    let zm = ym.pow((w as i64).rem_euclid(m) as u64);
    Ok(&zp * &zm)
}

/// Solve target = sum c_i basis_i over Q (basis assumed independent).
fn solve_in_basis(target: &CycloNumber, basis: &[CycloNumber]) -> Option<Vec<BigRational>> {
    let n = basis.len();
    let d = target.coeffs.len();
    // augmented matrix d x (n+1)
    let mut mat: Vec<Vec<BigRational>> =
        (0..d).map(|r| basis.iter().map(|b| b.coeffs[r].clone()).chain([target.coeffs[r].clone()]).collect()).collect();
    let mut piv_cols = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let Some(pr) = (row..d).find(|&r| !mat[r][col].is_zero()) else { continue };
        mat.swap(row, pr);
        let inv = mat[row][col].recip();
        for x in mat[row].iter_mut() {
            *x *= &inv;
        }
        for r in 0..d {
            if r != row && !mat[r][col].is_zero() {
                let f = mat[r][col].clone();
                for c in 0..=n {
                    let t = &f * &mat[row][c];
                    mat[r][c] -= t;
                }
            }
        }
        piv_cols.push(col);
        row += 1;
    }
    if mat[row..].iter().any(|r| !r[n].is_zero()) {
        return None;
    }
    let mut out = vec![BigRational::zero(); n];
    for (r, &c) in piv_cols.iter().enumerate() {
        out[c] = mat[r][n].clone();
    }
    Some(out)
}

pub fn bigrat_to_dd(q: &BigRational) -> DD {
    if let (Some(n), Some(d)) = (q.numer().to_i64(), q.denom().to_i64()) {
        if n.unsigned_abs() < (1u64 << 53) && d.unsigned_abs() < (1u64 << 53) {
            return DD::from_i64(n) / DD::from_i64(d);
        }
    }
    let hi = q.to_f64().unwrap_or(0.0);
    let rest = q - BigRational::from_float(hi).unwrap_or_else(BigRational::zero);
    let lo = rest.to_f64().unwrap_or(0.0);
    DD::new(hi) + DD::new(lo)
}

impl Add for &CycloNumber {
    type Output = CycloNumber;
    fn add(self, o: &CycloNumber) -> CycloNumber {
        let (a, b) = self.unify(o);
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect();
        CycloNumber { field: a.field, coeffs }
    }
}

impl Sub for &CycloNumber {
    type Output = CycloNumber;
    fn sub(self, o: &CycloNumber) -> CycloNumber {
        let (a, b) = self.unify(o);
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect();
        CycloNumber { field: a.field, coeffs }
    }
}

impl Mul for &CycloNumber {
    type Output = CycloNumber;
    fn mul(self, o: &CycloNumber) -> CycloNumber {
        let (a, b) = self.unify(o);
        if a.is_zero() || b.is_zero() {
            return CycloNumber { field: a.field.clone(), coeffs: vec![BigRational::zero(); a.coeffs.len()] };
        }
        if let Some(q) = a.to_rational() {
            return b.scale(&q);
        }
        if let Some(q) = b.to_rational() {
            return a.scale(&q);
        }
        // multiply modulo x^M - 1 first (keeps the product short), then reduce
        let m = a.modulus() as usize;
        let mut v = vec![BigRational::zero(); m];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if !y.is_zero() {
                    v[(i + j) % m] += x * y;
                }
            }
        }
        CycloNumber::in_field(&a.field, v)
    }
}

impl Neg for &CycloNumber {
    type Output = CycloNumber;
    fn neg(self) -> CycloNumber {
        CycloNumber { field: self.field.clone(), coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Add for CycloNumber {
    type Output = CycloNumber;
    fn add(self, o: CycloNumber) -> CycloNumber {
        &self + &o
    }
}

impl Sub for CycloNumber {
    type Output = CycloNumber;
    fn sub(self, o: CycloNumber) -> CycloNumber {
        &self - &o
    }
}

impl Mul for CycloNumber {
    type Output = CycloNumber;
    fn mul(self, o: CycloNumber) -> CycloNumber {
        &self * &o
    }
}

impl Neg for CycloNumber {
    type Output = CycloNumber;
    fn neg(self) -> CycloNumber {
        -&self
    }
}

/// Canonical square root of zeta_k^j: zeta_{2k}^j. Returns (2k, j).
pub fn canonical_sqrt_exponent(k: i64, j: i64) -> (i64, i64) {
    (2 * k, j.rem_euclid(k))
}

/// Closest fraction with denominator at most `bound` (continued fractions with
/// semiconvergents). Returns (numerator, denominator).
pub fn best_rational(x: DD, bound: i64) -> (i128, i128) {
    let fl = x.hi.floor();
    let mut int_part = fl as i128;
    let mut frac = (x - DD::new(fl)).to_f64();
    if frac >= 1.0 {
        int_part += 1;
        frac -= 1.0;
    }
    if frac < 0.0 {
        int_part -= 1;
        frac += 1.0;
    }
    // best approximation of frac in [0,1)
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    let mut y = frac;
    let bound = bound as i128;
    let mut best = (0i128, 1i128);
    let err = |p: i128, q: i128| (frac - p as f64 / q as f64).abs();
    if err(1, 1) < err(0, 1) {
        best = (1, 1);
    }
    for _ in 0..64 {
        if y.is_nan() || !y.is_finite() {
            break;
        }
        let a = y.floor() as i128;
        let q2 = a * q1 + q0;
        if q2 > bound {
            // semiconvergent with the largest admissible partial quotient
            if q1 > 0 {
                let t = (bound - q0) / q1;
                if t > 0 {
                    let (ps, qs) = (t * p1 + p0, t * q1 + q0);
                    if err(ps, qs) < err(best.0, best.1) {
                        best = (ps, qs);
                    }
                }
            }
            break;
        }
        let p2 = a * p1 + p0;
        if q2 > 0 && err(p2, q2) <= err(best.0, best.1) {
            best = (p2, q2);
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let r = y - a as f64;
        if r.abs() < 1e-30 {
            break;
        }
        y = 1.0 / r;
    }
    (int_part * best.1 + best.0, best.1)
}

/// Solve the complex system sum_i c_i exp(2 pi i i j/M) = v_j over the
/// embedding indices j, round each real coefficient to a fraction with
/// denominator at most `bound`, and verify the re-embedding to `10 * eps`.
pub fn rational_reconstruct(values: &[CDD], modulus: i64, bound: i64, eps: f64) -> Result<CycloNumber> {
    let field = CycloField::new(modulus);
    let idx = field.embedding_indices();
    let n = field.degree();
    if values.len() != idx.len() {
        return Err(Error::Usage(format!("need {} embeddings, got {}", idx.len(), values.len())));
    }
    if eps >= 1.0 / (2.0 * (bound as f64) * (bound as f64)) {
        return Err(Error::Ambiguous(format!(
            "tolerance {eps:e} admits several fractions with denominator <= {bound}"
        )));
    }
    let mut mat: Vec<Vec<CDD>> = idx
        .iter()
        .zip(values)
        .map(|(&j, &v)| (0..n).map(|i| CDD::root_of_unity(i as i64 * j, modulus)).chain([v]).collect())
        .collect();
    for col in 0..n {
        let pr = (col..n)
            .max_by(|&a, &b| mat[a][col].abs().hi.partial_cmp(&mat[b][col].abs().hi).unwrap())
            .unwrap();
        mat.swap(col, pr);
        let inv = mat[col][col].inv();
        for c in col..=n {
            mat[col][c] = mat[col][c] * inv;
        }
        for r in 0..n {
            if r != col {
                let f = mat[r][col];
                if f.abs().hi == 0.0 {
                    continue;
                }
                for c in col..=n {
                    let t = f * mat[col][c];
                    mat[r][c] = mat[r][c] - t;
                }
            }
        }
    }
    let coeffs: Vec<BigRational> = (0..n)
        .map(|i| {
            let (num, den) = best_rational(mat[i][n].re, bound);
            BigRational::new(BigInt::from(num), BigInt::from(den))
        })
        .collect();
    let cand = CycloNumber::in_field(&field, coeffs);
    let worst = cand
        .embeddings()
        .iter()
        .zip(values)
        .map(|(a, b)| (*a - *b).abs().to_f64())
        .fold(0.0f64, f64::max);
    if worst > 10.0 * eps {
        return Err(Error::NoCandidate(format!(
            "best candidate misses by {worst:e} (> 10 * {eps:e}) with denominator bound {bound}"
        )));
    }
    Ok(cand)
}
