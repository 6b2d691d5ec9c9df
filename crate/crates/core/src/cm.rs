//! Class-number-one imaginary quadratic fields, Grossencharacters of type
//! (-1, 0), power-residue Artin symbols and the q-expansions of twisted CM forms.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::arith::{is_prime, isqrt, kronecker, lcm, pow_mod, sqrt_mod_prime};
use crate::characters::{AbelianGroup, FiniteCharacter};
use crate::cyclo::CycloNumber;
use crate::error::{Error, Result};
use num_rational::BigRational;

const CLASS_NUMBER_ONE: [i64; 9] = [-3, -4, -7, -8, -11, -19, -43, -67, -163];

/// a + b w in the ring of integers Z[w].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadInt {
    pub a: i64,
    pub b: i64,
}

impl QuadInt {
    pub const fn new(a: i64, b: i64) -> QuadInt {
        QuadInt { a, b }
    }

    pub const fn int(a: i64) -> QuadInt {
        QuadInt { a, b: 0 }
    }
}

impl fmt::Display for QuadInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:+}w", self.a, self.b)
    }
}

/// Imaginary quadratic field of class number one; w^2 = trace_w * w + const_w.
#[derive(Debug, PartialEq, Eq)]
pub struct QuadField {
    pub disc: i64,
    trace_w: i64,
    const_w: i64,
}

/// Splitting of a rational prime, with generators of the primes above it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrimeSplitting {
    Split(QuadInt, QuadInt),
    Inert(QuadInt),
    Ramified(QuadInt),
}

impl QuadField {
    pub fn new(disc: i64) -> Result<Arc<QuadField>> {
        if !CLASS_NUMBER_ONE.contains(&disc) {
            return Err(Error::Config(format!("discriminant {disc} is not an imaginary quadratic discriminant of class number one")));
        }
        let (trace_w, const_w) = if disc % 4 == 0 { (0, disc / 4) } else { (1, (disc - 1) / 4) };
        Ok(Arc::new(QuadField { disc, trace_w, const_w }))
    }

    pub fn add(&self, x: QuadInt, y: QuadInt) -> QuadInt {
        QuadInt::new(x.a + y.a, x.b + y.b)
    }

    pub fn sub(&self, x: QuadInt, y: QuadInt) -> QuadInt {
        QuadInt::new(x.a - y.a, x.b - y.b)
    }

    pub fn mul(&self, x: QuadInt, y: QuadInt) -> QuadInt {
        let bb = x.b * y.b;
        QuadInt::new(x.a * y.a + bb * self.const_w, x.a * y.b + x.b * y.a + bb * self.trace_w)
    }

    pub fn pow(&self, x: QuadInt, n: u32) -> QuadInt {
        (0..n).fold(QuadInt::int(1), |acc, _| self.mul(acc, x))
    }

    pub fn conj(&self, x: QuadInt) -> QuadInt {
        QuadInt::new(x.a + self.trace_w * x.b, -x.b)
    }

    pub fn norm(&self, x: QuadInt) -> i64 {
        x.a * x.a + self.trace_w * x.a * x.b - self.const_w * x.b * x.b
    }

    /// x / d when d divides x.
    pub fn div_exact(&self, x: QuadInt, d: QuadInt) -> Option<QuadInt> {
        let n = self.norm(d);
        if n == 0 {
            return None;
        }
        let y = self.mul(x, self.conj(d));
        (y.a % n == 0 && y.b % n == 0).then(|| QuadInt::new(y.a / n, y.b / n))
    }

    pub fn divides(&self, d: QuadInt, x: QuadInt) -> bool {
        self.div_exact(x, d).is_some()
    }

    /// Generator of the unit group and its order.
    pub fn unit_generator(&self) -> (QuadInt, i64) {
        match self.disc {
            -4 => (QuadInt::new(0, 1), 4),
            -3 => (QuadInt::new(0, 1), 6),
            _ => (QuadInt::int(-1), 2),
        }
    }

    pub fn units(&self) -> Vec<QuadInt> {
        let (g, w) = self.unit_generator();
        (0..w).map(|k| self.pow(g, k as u32)).collect()
    }

    /// Conductor of the cyclotomic field holding K.
    pub fn cyclo_modulus(&self) -> i64 {
        match self.disc {
            -4 => 4,
            -3 => 3,
            d => -d,
        }
    }

    /// Image of w in Q(zeta_M), M = cyclo_modulus.
    pub fn w_in_cyclo(&self) -> CycloNumber {
        let m = self.cyclo_modulus();
        match self.disc {
            -4 => CycloNumber::root_of_unity(4, 1),
            // (1 + sqrt(-3))/2 = 1 + zeta_3
            -3 => &CycloNumber::one(3) + &CycloNumber::root_of_unity(3, 1),
            d => {
                // sqrt(d) as the quadratic Gauss sum over Z/|d|
                let mut sqrt_d = CycloNumber::zero(m);
                for a in 1..m {
                    let k = kronecker(d, a);
                    if k != 0 {
                        sqrt_d = &sqrt_d + &CycloNumber::root_of_unity(m, a).scale_int(k);
                    }
                }
                if d % 4 == 0 {
                    sqrt_d.try_div(&CycloNumber::from_int(m, 2)).unwrap()
                } else {
                    (&sqrt_d + &CycloNumber::one(m)).try_div(&CycloNumber::from_int(m, 2)).unwrap()
                }
            }
        }
    }

    pub fn to_cyclo(&self, x: QuadInt) -> CycloNumber {
        let m = self.cyclo_modulus();
        &CycloNumber::from_int(m, x.a) + &self.w_in_cyclo().scale_int(x.b)
    }

    /// Some element of norm n, by solving for a at each b.
    pub fn element_of_norm(&self, n: i64) -> Option<QuadInt> {
        // 4 N = (2a + t b)^2 - (t^2 + 4 c) b^2 = (2a + t b)^2 + |disc| b^2
        let bmax = isqrt(4 * n / -self.disc) + 1;
        for b in 0..=bmax {
            let rest = 4 * n + self.disc * b * b;
            if rest < 0 {
                break;
            }
            let s = isqrt(rest);
            if s * s == rest && (s - self.trace_w * b) % 2 == 0 {
                return Some(QuadInt::new((s - self.trace_w * b) / 2, b));
            }
        }
        None
    }

    /// Cornacchia: 4 l = x^2 + |disc| y^2 for an odd prime l split in K.
    fn cornacchia(&self, l: i64) -> Option<QuadInt> {
        let d = self.disc;
        let mut r = sqrt_mod_prime(d.rem_euclid(l), l)?;
        if (r - d).rem_euclid(2) != 0 {
            r = l - r;
        }
        let bound = isqrt(4 * l);
        let (mut a, mut b) = (2 * l, r);
        while b > bound {
            let t = a % b;
            a = b;
            b = t;
        }
        let rest = 4 * l - b * b;
        if rest % -d != 0 {
            return None;
        }
        let y = isqrt(rest / -d);
        if y * y * -d != rest {
            return None;
        }
        // (x + y sqrt(d))/2 with sqrt(d) = 2w - t
        let num_a = b - self.trace_w * y;
        (num_a % 2 == 0).then(|| QuadInt::new(num_a / 2, y))
    }

    pub fn factor_rational_prime(&self, l: i64) -> Result<PrimeSplitting> {
        if !is_prime(l) {
            return Err(Error::Usage(format!("{l} is not prime")));
        }
        let k = kronecker(self.disc, l);
        let gen = |n: i64| -> Result<QuadInt> {
            let found = if l > 2 && k == 1 { self.cornacchia(l) } else { None };
            found
                .or_else(|| self.element_of_norm(n))
                .ok_or_else(|| Error::Inconsistent(format!("no element of norm {n}")))
        };
        Ok(match k {
            1 => {
                let pi = gen(l)?;
                PrimeSplitting::Split(pi, self.conj(pi))
            }
            -1 => PrimeSplitting::Inert(QuadInt::int(l)),
            _ => PrimeSplitting::Ramified(gen(l)?),
        })
    }

    /// Canonical associate: smallest (a, b) over unit multiples.
    pub fn canonical(&self, x: QuadInt) -> QuadInt {
        self.units().into_iter().map(|u| self.mul(u, x)).min().unwrap()
    }
}

/// Residue field O / q for a prime q.
struct Residue {
    l: i64,
    /// image of w in F_l for split and ramified primes; None for F_{l^2} = O / l
    w_image: Option<i64>,
}

impl Residue {
    fn new(field: &QuadField, q: QuadInt) -> Residue {
        let n = field.norm(q);
        let l = isqrt(n);
        if l * l == n && l > 1 && q.a % l == 0 && q.b % l == 0 {
            return Residue { l, w_image: None };
        }
        let l = n;
        // q = a + b w lies over l with l not dividing b, so w = -a / b mod l
        let b_inv = crate::arith::inv_mod(q.b.rem_euclid(l) as i128, l as i128).expect("degree-one prime has b prime to l");
        let r = ((-(q.a as i128)).rem_euclid(l as i128) * b_inv % l as i128) as i64;
        debug_assert_eq!((r * r - field.trace_w * r - field.const_w).rem_euclid(l), 0);
        Residue { l, w_image: Some(r) }
    }

    fn size(&self) -> i64 {
        if self.w_image.is_some() {
            self.l
        } else {
            self.l * self.l
        }
    }

    fn reduce(&self, x: QuadInt) -> QuadInt {
        match self.w_image {
            Some(r) => QuadInt::int((x.a + x.b * r).rem_euclid(self.l)),
            None => QuadInt::new(x.a.rem_euclid(self.l), x.b.rem_euclid(self.l)),
        }
    }

    fn mul(&self, field: &QuadField, x: QuadInt, y: QuadInt) -> QuadInt {
        let l = self.l as i128;
        let (xa, xb, ya, yb) = (x.a as i128, x.b as i128, y.a as i128, y.b as i128);
        let bb = xb * yb % l;
        let a = (xa * ya + bb * field.const_w as i128).rem_euclid(l);
        let b = (xa * yb + xb * ya + bb * field.trace_w as i128).rem_euclid(l);
        self.reduce(QuadInt::new(a as i64, b as i64))
    }

    fn pow(&self, field: &QuadField, x: QuadInt, mut n: i64) -> QuadInt {
        let mut base = self.reduce(x);
        let mut acc = QuadInt::int(1);
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(field, acc, base);
            }
            base = self.mul(field, base, base);
            n >>= 1;
        }
        acc
    }
}

/// How Frobenius elements of F/K are computed.
#[derive(Clone, Debug, PartialEq)]
pub enum ArtinKind {
    /// F = K(radicand^{1/degree}) with mu_degree in K; A = Z/degree.
    PowerResidue { radicand: i64, degree: i64 },
    /// Explicit symbols keyed by the canonical generator of each prime.
    Table(BTreeMap<QuadInt, Vec<i64>>),
}

#[derive(Clone, Debug)]
pub struct ArtinData {
    pub field: Arc<QuadField>,
    pub group: Arc<AbelianGroup>,
    pub kind: ArtinKind,
}

impl ArtinData {
    /// Kummer extension K(radicand^{1/degree}); complex conjugation inverts A.
    pub fn kummer(field: &Arc<QuadField>, radicand: i64, degree: i64) -> Result<ArtinData> {
        let (_, w) = field.unit_generator();
        if degree < 1 || w % degree != 0 {
            return Err(Error::Config(format!("K does not contain the {degree}-th roots of unity")));
        }
        Ok(ArtinData {
            field: field.clone(),
            group: AbelianGroup::cyclic_with_inversion(degree),
            kind: ArtinKind::PowerResidue { radicand, degree },
        })
    }

    pub fn from_table(field: &Arc<QuadField>, group: Arc<AbelianGroup>, table: BTreeMap<QuadInt, Vec<i64>>) -> ArtinData {
        let table = table.into_iter().map(|(k, v)| (field.canonical(k), group.reduce(&v))).collect();
        ArtinData { field: field.clone(), group, kind: ArtinKind::Table(table) }
    }

    /// True when the prime q ramifies in F/K (as far as the data can tell).
    pub fn is_ramified(&self, q: QuadInt) -> bool {
        match &self.kind {
            ArtinKind::PowerResidue { radicand, degree } => {
                let f = &self.field;
                f.divides(q, QuadInt::int(*radicand)) || f.divides(q, QuadInt::int(*degree))
            }
            ArtinKind::Table(t) => !t.contains_key(&self.field.canonical(q)),
        }
    }

    /// Frobenius of the prime ideal (q) as an element of A.
    pub fn symbol(&self, q: QuadInt) -> Result<Vec<i64>> {
        let f = &self.field;
        match &self.kind {
            ArtinKind::PowerResidue { radicand, degree } => {
                if self.is_ramified(q) {
                    return Err(Error::Ramified(format!("prime {q} ramifies in the Kummer extension")));
                }
                let res = Residue::new(f, q);
                let exp = (res.size() - 1) / degree;
                let target = res.pow(f, QuadInt::int(*radicand), exp);
                let (g, w) = f.unit_generator();
                let zeta = res.reduce(f.pow(g, (w / degree) as u32));
                let mut z = QuadInt::int(1);
                for t in 0..*degree {
                    if z == target {
                        return Ok(vec![t]);
                    }
                    z = res.mul(f, z, zeta);
                }
                Err(Error::Inconsistent(format!("power residue at {q} is not a root of unity")))
            }
            ArtinKind::Table(t) => t
                .get(&f.canonical(q))
                .cloned()
                .ok_or_else(|| Error::Ramified(format!("no Artin symbol recorded for {q}"))),
        }
    }

    /// Symbol of the principal ideal (x), through its prime factorization.
    pub fn symbol_of_ideal(&self, x: QuadInt) -> Result<Vec<i64>> {
        let f = &self.field;
        let mut acc = vec![0i64; self.group.orders.len()];
        for (q, e) in factor_element(f, x)? {
            let s = self.symbol(q)?;
            for (a, b) in acc.iter_mut().zip(s) {
                *a += b * e as i64;
            }
        }
        Ok(self.group.reduce(&acc))
    }
}

/// Prime ideals (by generator) with exponents dividing (x).
pub fn factor_element(field: &QuadField, x: QuadInt) -> Result<Vec<(QuadInt, u32)>> {
    let n = field.norm(x);
    if n == 0 {
        return Err(Error::DivisionByZero);
    }
    let mut out = Vec::new();
    let mut rest = x;
    for (l, _) in crate::arith::factorize(n) {
        let primes = match field.factor_rational_prime(l)? {
            PrimeSplitting::Split(a, b) => vec![a, b],
            PrimeSplitting::Inert(a) | PrimeSplitting::Ramified(a) => vec![a],
        };
        for q in primes {
            let mut e = 0;
            while let Some(y) = field.div_exact(rest, q) {
                rest = y;
                e += 1;
            }
            if e > 0 {
                out.push((q, e));
            }
        }
    }
    Ok(out)
}

/// Grossencharacter of type (-1, 0): (pi) -> u pi with u pi = 1 mod the conductor,
/// optionally twisted by eta-bar of the Artin symbol.
#[derive(Clone, Debug)]
pub struct GrossenChar {
    pub field: Arc<QuadField>,
    pub conductor: QuadInt,
    pub twist: Option<(ArtinData, FiniteCharacter)>,
}

impl GrossenChar {
    pub fn new(field: &Arc<QuadField>, conductor: QuadInt) -> Result<GrossenChar> {
        let bad: Vec<QuadInt> = field
            .units()
            .into_iter()
            .filter(|&u| u != QuadInt::int(1) && field.divides(conductor, field.sub(u, QuadInt::int(1))))
            .collect();
        if !bad.is_empty() {
            return Err(Error::NoValidUnit(format!("unit {} is 1 modulo the conductor {conductor}", bad[0])));
        }
        Ok(GrossenChar { field: field.clone(), conductor, twist: None })
    }

    pub fn twisted(&self, artin: &ArtinData, eta: &FiniteCharacter) -> GrossenChar {
        GrossenChar { twist: Some((artin.clone(), eta.clone())), ..self.clone() }
    }

    /// The untwisted value u pi.
    pub fn eval_untwisted(&self, pi: QuadInt) -> Result<QuadInt> {
        let f = &self.field;
        let one = QuadInt::int(1);
        let mut found = None;
        for u in f.units() {
            let v = f.mul(u, pi);
            if f.divides(self.conductor, f.sub(v, one)) {
                if found.is_some() {
                    return Err(Error::NoValidUnit(format!("two units normalize {pi}")));
                }
                found = Some(v);
            }
        }
        found.ok_or_else(|| Error::NoValidUnit(format!("no unit u with u*{pi} = 1 mod {}", self.conductor)))
    }

    /// Coefficient field Q(zeta_M) of the twisted values.
    pub fn value_modulus(&self) -> i64 {
        let m = self.field.cyclo_modulus();
        match &self.twist {
            Some((_, eta)) => lcm(m, eta.exponent_modulus()),
            None => m,
        }
    }

    /// True when (pi) divides the conductor or ramifies in the twisting field.
    pub fn is_bad(&self, pi: QuadInt) -> bool {
        let f = &self.field;
        let divides_conductor = factor_element(f, self.conductor)
            .map(|fs| fs.iter().any(|(q, _)| f.divides(*q, pi)))
            .unwrap_or(true);
        divides_conductor || self.twist.as_ref().is_some_and(|(a, e)| !e.is_trivial() && a.is_ramified(pi))
    }

    /// phi(q) eta-bar(Art(q)) for the prime (or coprime ideal) generated by pi.
    pub fn eval(&self, pi: QuadInt) -> Result<CycloNumber> {
        let m = self.value_modulus();
        let base = self.field.to_cyclo(self.eval_untwisted(pi)?).coerce(m)?;
        match &self.twist {
            None => Ok(base),
            Some((artin, eta)) => {
                if eta.is_trivial() {
                    return Ok(base);
                }
                let s = artin.symbol_of_ideal(pi)?;
                Ok(&base * &eta.conj().value(&s))
            }
        }
    }

    /// Nebentypus value at an inert prime l: a_{l^2} = -eps(l) l with a_l = 0.
    pub fn nebentypus_at_inert(&self, l: i64) -> Result<CycloNumber> {
        match self.field.factor_rational_prime(l)? {
            PrimeSplitting::Inert(q) => Ok(self.eval(q)?.scale_int(-1).try_div(&CycloNumber::from_int(1, l))?),
            _ => Err(Error::Usage(format!("{l} is not inert")))
        }
    }

    /// Local coefficients a_{l^k}, k = 0..=kmax.
    fn local_coefficients(&self, l: i64, kmax: u32) -> Result<Vec<CycloNumber>> {
        let m = self.value_modulus();
        let mut out = vec![CycloNumber::one(m)];
        match self.field.factor_rational_prime(l)? {
            PrimeSplitting::Split(q1, q2) => {
                let good1 = !self.is_bad(q1);
                let good2 = !self.is_bad(q2);
                let a1 = if good1 { Some(self.eval(q1)?) } else { None };
                let a2 = if good2 { Some(self.eval(q2)?) } else { None };
                // a_{l^k} = sum_{i+j=k} a1^i a2^j over the good primes
                let mut pw1 = vec![CycloNumber::one(m)];
                let mut pw2 = vec![CycloNumber::one(m)];
                for k in 1..=kmax as usize {
                    pw1.push(a1.as_ref().map_or(CycloNumber::zero(m), |a| &pw1[k - 1] * a));
                    pw2.push(a2.as_ref().map_or(CycloNumber::zero(m), |a| &pw2[k - 1] * a));
                }
                for k in 1..=kmax as usize {
                    let mut s = CycloNumber::zero(m);
                    for i in 0..=k {
                        s = &s + &(&pw1[i] * &pw2[k - i]);
                    }
                    out.push(s);
                }
            }
            PrimeSplitting::Inert(q) | PrimeSplitting::Ramified(q) => {
                let inert = matches!(self.field.factor_rational_prime(l)?, PrimeSplitting::Inert(_));
                let v = if self.is_bad(q) { None } else { Some(self.eval(q)?) };
                for k in 1..=kmax {
                    let x = match &v {
                        None => CycloNumber::zero(m),
                        Some(v) if inert => {
                            if k % 2 == 0 {
                                v.pow((k / 2) as u64)
                            } else {
                                CycloNumber::zero(m)
                            }
                        }
                        Some(v) => v.pow(k as u64),
                    };
                    out.push(x);
                }
            }
        }
        Ok(out)
    }

    /// Dirichlet coefficients a_1..a_{n_max} of L(phi eta-bar, s).
    pub fn q_expansion(&self, n_max: usize) -> Result<QExpansion> {
        let m = self.value_modulus();
        let mut spf = vec![0usize; n_max + 1];
        for i in 2..=n_max {
            if spf[i] == 0 {
                let mut j = i;
                while j <= n_max {
                    if spf[j] == 0 {
                        spf[j] = i;
                    }
                    j += i;
                }
            }
        }
        let mut local: Vec<Vec<CycloNumber>> = vec![Vec::new(); n_max + 1];
        for l in 2..=n_max {
            if spf[l] == l {
                let mut kmax = 0u32;
                let mut pk = 1usize;
                while pk * l <= n_max {
                    pk *= l;
                    kmax += 1;
                }
                local[l] = self.local_coefficients(l as i64, kmax)?;
            }
        }
        let mut coeffs = vec![CycloNumber::zero(m); n_max + 1];
        if n_max >= 1 {
            coeffs[1] = CycloNumber::one(m);
        }
        for n in 2..=n_max {
            let l = spf[n];
            let mut r = n;
            let mut k = 0;
            while r % l == 0 {
                r /= l;
                k += 1;
            }
            coeffs[n] = &local[l][k] * &coeffs[r];
        }
        Ok(QExpansion { modulus: m, coeffs })
    }
}

/// a_n for n = 0..=n_max (a_0 = 0 placeholder), exact in Q(zeta_M).
#[derive(Clone, Debug, PartialEq)]
pub struct QExpansion {
    pub modulus: i64,
    pub coeffs: Vec<CycloNumber>,
}

impl QExpansion {
    pub fn n_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn get(&self, n: usize) -> &CycloNumber {
        &self.coeffs[n]
    }

    /// Cache file text: header line, then one coefficient per line.
    pub fn to_text(&self, descriptor: &str) -> String {
        let mut s = format!("qexp modulus {} n_max {} {}\n", self.modulus, self.n_max(), descriptor);
        for c in &self.coeffs[1..] {
            s.push_str(&c.coeff_strings().join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<(QExpansion, String)> {
        let mut lines = text.lines();
        let header = lines.next().ok_or(Error::Format { line: 1, msg: "empty cache".into() })?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        if toks.len() < 5 || toks[0] != "qexp" || toks[1] != "modulus" || toks[3] != "n_max" {
            return Err(Error::Format { line: 1, msg: "bad q-expansion header".into() });
        }
        let modulus: i64 = toks[2].parse().map_err(|_| Error::Format { line: 1, msg: "modulus".into() })?;
        let n_max: usize = toks[4].parse().map_err(|_| Error::Format { line: 1, msg: "n_max".into() })?;
        let mut coeffs = vec![CycloNumber::zero(modulus)];
        for (i, line) in lines.enumerate() {
            let items: Vec<&str> = line.split_whitespace().collect();
            coeffs.push(
                CycloNumber::from_coeff_strings(modulus, &items).map_err(|_| Error::Format { line: i + 2, msg: "bad coefficient".into() })?,
            );
        }
        if coeffs.len() != n_max + 1 {
            return Err(Error::Format { line: 0, msg: format!("expected {n_max} coefficients") });
        }
        Ok((QExpansion { modulus, coeffs }, toks[5..].join(" ")))
    }
}

/// y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 over Q with integer coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Weierstrass {
    pub a1: i64,
    pub a2: i64,
    pub a3: i64,
    pub a4: i64,
    pub a6: i64,
}

impl Weierstrass {
    pub fn short(a4: i64, a6: i64) -> Weierstrass {
        Weierstrass { a1: 0, a2: 0, a3: 0, a4, a6 }
    }

    pub fn discriminant(&self) -> i128 {
        let (a1, a2, a3, a4, a6) = (self.a1 as i128, self.a2 as i128, self.a3 as i128, self.a4 as i128, self.a6 as i128);
        let b2 = a1 * a1 + 4 * a2;
        let b4 = 2 * a4 + a1 * a3;
        let b6 = a3 * a3 + 4 * a6;
        let b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
        -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    }

    /// a_l = l + 1 - #E(F_l) by enumeration.
    pub fn point_count_ap(&self, l: i64) -> Result<i64> {
        if !is_prime(l) {
            return Err(Error::Usage(format!("{l} is not prime")));
        }
        if self.discriminant() % l as i128 == 0 {
            return Err(Error::BadReduction(l));
        }
        let m = |x: i64| x.rem_euclid(l);
        let mut count = 1i64;
        for x in 0..l {
            let lin = m(self.a1 * x + self.a3);
            let rhs = m(m(m(x * x) * x) + m(self.a2 * m(x * x)) + m(self.a4 * x) + self.a6);
            if l == 2 {
                count += (0..2).filter(|&y| m(y * y + lin * y - rhs) == 0).count() as i64;
            } else {
                let disc = m(lin * lin + 4 * rhs);
                count += if disc == 0 { 1 } else if pow_mod(disc as i128, ((l - 1) / 2) as u128, l as i128) == 1 { 2 } else { 0 };
            }
        }
        Ok(l + 1 - count)
    }
}

/// The Grossencharacter of the CM curve over `field`: conductor ideals built
/// from primes above bad primes (exponent at most 6) are tried until the
/// coefficients match point counts at good primes below `check_bound`.
pub fn character_for_curve(field: &Arc<QuadField>, curve: &Weierstrass, check_bound: i64) -> Result<GrossenChar> {
    let disc = curve.discriminant();
    if disc == 0 {
        return Err(Error::Singular);
    }
    let mut bad_primes = Vec::new();
    for (l, _) in crate::arith::factorize(disc.unsigned_abs() as i64) {
        match field.factor_rational_prime(l)? {
            PrimeSplitting::Split(a, b) => bad_primes.extend([a, b]),
            PrimeSplitting::Inert(a) | PrimeSplitting::Ramified(a) => bad_primes.push(a),
        }
    }
    let good: Vec<i64> = (2..check_bound).filter(|&l| is_prime(l) && disc % l as i128 != 0).collect();
    let expected: Vec<i64> = good.iter().map(|&l| curve.point_count_ap(l)).collect::<Result<_>>()?;
    let n_max = check_bound.max(2) as usize;
    let mut exps = vec![0u32; bad_primes.len()];
    loop {
        let mut cond = QuadInt::int(1);
        for (q, &e) in bad_primes.iter().zip(&exps) {
            cond = field.mul(cond, field.pow(*q, e));
        }
        if let Ok(chr) = GrossenChar::new(field, cond) {
            let q = chr.q_expansion(n_max)?;
            let matches = good
                .iter()
                .zip(&expected)
                .all(|(&l, &a)| q.coeffs[l as usize].to_rational() == Some(BigRational::from_integer(a.into())));
            if matches {
                return Ok(chr);
            }
        }
        // next exponent vector
        let mut i = 0;
        loop {
            if i == exps.len() {
                return Err(Error::Config("no Grossencharacter of the tried conductors matches the curve".into()));
            }
            exps[i] += 1;
            if exps[i] <= 6 {
                break;
            }
            exps[i] = 0;
            i += 1;
        }
    }
}

/// A CM elliptic curve with its Grossencharacter and supersingular prime.
#[derive(Clone, Debug)]
pub struct DeskCurve {
    pub label: String,
    pub curve: Weierstrass,
    pub character: GrossenChar,
    pub p: i64,
    pub conductor: i64,
}

/// y^2 = x^3 - x over K = Q(i), character conductor (1+i)^3, p = 3.
pub fn desk_32a() -> DeskCurve {
    let k = QuadField::new(-4).unwrap();
    let f = k.pow(QuadInt::new(1, 1), 3);
    DeskCurve { label: "32a".into(), curve: Weierstrass::short(-1, 0), character: GrossenChar::new(&k, f).unwrap(), p: 3, conductor: 32 }
}

/// y^2 + y = x^3 over K = Q(sqrt(-3)), character conductor (3), p = 5.
pub fn desk_27a() -> DeskCurve {
    let k = QuadField::new(-3).unwrap();
    DeskCurve {
        label: "27a".into(),
        curve: Weierstrass { a1: 0, a2: 0, a3: 1, a4: 0, a6: 0 },
        character: GrossenChar::new(&k, QuadInt::int(3)).unwrap(),
        p: 5,
        conductor: 27,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::gcd;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn characters_found_from_curves() {
        for desk in [desk_32a(), desk_27a()] {
            let found = character_for_curve(&desk.character.field, &desk.curve, 120).unwrap();
            assert_eq!(found.q_expansion(300).unwrap(), desk.character.q_expansion(300).unwrap(), "{}", desk.label);
        }
    }

    #[test]
    fn prime_splitting_in_gaussian_integers() {
        let k = QuadField::new(-4).unwrap();
        match k.factor_rational_prime(5).unwrap() {
            PrimeSplitting::Split(a, b) => {
                assert_eq!(k.norm(a), 5);
                assert_eq!(k.mul(a, b), QuadInt::int(5));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(k.factor_rational_prime(3).unwrap(), PrimeSplitting::Inert(QuadInt::int(3)));
        match k.factor_rational_prime(2).unwrap() {
            PrimeSplitting::Ramified(q) => assert_eq!(k.canonical(q), k.canonical(QuadInt::new(1, 1))),
            other => panic!("{other:?}"),
        }
        let e = QuadField::new(-3).unwrap();
        for l in crate::arith::primes_up_to(400) {
            match e.factor_rational_prime(l).unwrap() {
                PrimeSplitting::Split(a, _) | PrimeSplitting::Ramified(a) => assert_eq!(e.norm(a), l),
                PrimeSplitting::Inert(a) => assert_eq!(e.norm(a), l * l),
            }
        }
    }

    #[test]
    fn normalizing_unit_is_unique() {
        let d = desk_32a();
        let k = &d.character.field;
        let mut seen = 0;
        for l in crate::arith::primes_up_to(2000).into_iter().filter(|&l| l % 4 == 1).take(100) {
            if let PrimeSplitting::Split(q, _) = k.factor_rational_prime(l).unwrap() {
                let hits = k
                    .units()
                    .into_iter()
                    .filter(|&u| k.divides(d.character.conductor, k.sub(k.mul(u, q), QuadInt::int(1))))
                    .count();
                assert_eq!(hits, 1);
                let v = d.character.eval_untwisted(q).unwrap();
                assert_eq!(k.norm(v), l);
                seen += 1;
            }
        }
        assert_eq!(seen, 100);
    }

    #[test]
    fn character_is_multiplicative() {
        let d = desk_32a();
        let k = &d.character.field;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let x = QuadInt::new(rng.gen_range(-30..30) * 2 + 1, rng.gen_range(-30..30) * 2);
            let y = QuadInt::new(rng.gen_range(-30..30) * 2, rng.gen_range(-30..30) * 2 + 1);
            let lhs = d.character.eval_untwisted(k.mul(x, y)).unwrap();
            let rhs = k.mul(d.character.eval_untwisted(x).unwrap(), d.character.eval_untwisted(y).unwrap());
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn q_expansion_matches_point_counts() {
        for d in [desk_32a(), desk_27a()] {
            let q = d.character.q_expansion(1000).unwrap();
            for l in crate::arith::primes_up_to(1000) {
                if d.conductor % l == 0 {
                    continue;
                }
                let ap = d.curve.point_count_ap(l).unwrap();
                assert_eq!(q.get(l as usize), &CycloNumber::from_int(1, ap), "{} at {l}", d.label);
            }
            assert!(q.get(d.p as usize).is_zero());
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            for _ in 0..100 {
                let m = rng.gen_range(1..=31usize);
                let n = rng.gen_range(1..=31usize);
                if gcd(m as i64, n as i64) == 1 {
                    assert_eq!(q.get(m * n), &(q.get(m) * q.get(n)));
                }
            }
        }
    }

    #[test]
    fn point_counts_of_desk_curves() {
        let e = Weierstrass::short(-1, 0);
        assert_eq!(e.point_count_ap(3).unwrap(), 0);
        assert_eq!(e.point_count_ap(5).unwrap(), -2);
        assert!(matches!(e.point_count_ap(2), Err(Error::BadReduction(2))));
        let f = Weierstrass { a1: 0, a2: 0, a3: 1, a4: 0, a6: 0 };
        assert_eq!(f.point_count_ap(5).unwrap(), 0);
        assert_eq!(f.point_count_ap(7).unwrap(), -1);
    }

    #[test]
    fn kummer_symbols() {
        let k = QuadField::new(-4).unwrap();
        let art = ArtinData::kummer(&k, 2, 4).unwrap();
        // 2^{(5-1)/4} = 2 in F_5, i -> 3 mod (2+i), 3^3 = 2
        let q = QuadInt::new(2, 1);
        assert_eq!(art.symbol(q).unwrap(), vec![3]);
        assert!(matches!(art.symbol(QuadInt::new(1, 1)), Err(Error::Ramified(_))));
        assert_eq!(art.symbol(QuadInt::int(3)).unwrap(), vec![0]);
        let primes: Vec<QuadInt> = crate::arith::primes_up_to(200)
            .into_iter()
            .filter(|&l| l > 2)
            .flat_map(|l| match k.factor_rational_prime(l).unwrap() {
                PrimeSplitting::Split(a, b) => vec![a, b],
                PrimeSplitting::Inert(a) | PrimeSplitting::Ramified(a) => vec![a],
            })
            .collect();
        for w in primes.windows(2) {
            let prod = art.symbol_of_ideal(k.mul(w[0], w[1])).unwrap();
            let sum = art.group.reduce(&[art.symbol(w[0]).unwrap()[0] + art.symbol(w[1]).unwrap()[0]]);
            assert_eq!(prod, sum);
        }
    }

    #[test]
    fn twisted_nebentypus_at_p() {
        let d = desk_32a();
        let k = d.character.field.clone();
        let art = ArtinData::kummer(&k, 2, 4).unwrap();
        for exps in 0..4 {
            let eta = FiniteCharacter::new(&art.group, vec![exps]).unwrap();
            let g = d.character.twisted(&art, &eta);
            let eps = g.nebentypus_at_inert(3).unwrap();
            let expected = eta.conj().value(&art.symbol(QuadInt::int(3)).unwrap());
            assert_eq!(eps, expected);
            let q = g.q_expansion(60).unwrap();
            for l in [5i64, 13, 17, 29, 37, 41, 53] {
                let a = q.get(l as usize).complex_embed(1);
                assert!(a.abs().to_f64() <= 2.0 * (l as f64).sqrt() + 1e-12);
            }
        }
    }

    #[test]
    fn cache_round_trip() {
        let q = desk_32a().character.q_expansion(30).unwrap();
        let text = q.to_text("K=-4 f=(1+i)^3 eta=trivial");
        let (back, desc) = QExpansion::from_text(&text).unwrap();
        assert_eq!(back, q);
        assert_eq!(desc, "K=-4 f=(1+i)^3 eta=trivial");
    }
}
