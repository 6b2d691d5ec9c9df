//! Truncated power series in T = gamma - 1 over p-adic coefficient rings:
//! evaluation at finite-order characters, the parity moduli, interpolation
//! from character values, and mu/lambda invariants.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::arith::{euler_phi, ipow};
use crate::characters::GammaCharacter;
use crate::error::{Error, Result};
use crate::padic::{PadicCyclo, PadicRing};

/// What is known about coefficients beyond the truncation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Growth {
    /// All coefficients have valuation >= 0.
    Bounded,
    /// Coefficient valuations satisfy v(c_n) >= -(r+1)(3 + log_p n).
    HalfLog { r: u32 },
    Unknown,
}

impl fmt::Display for Growth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Growth::Bounded => write!(f, "bounded"),
            Growth::HalfLog { r } => write!(f, "half-log:{r}"),
            Growth::Unknown => write!(f, "unknown"),
        }
    }
}

/// sum_n c_n T^n known modulo (p^prec, T^trunc), or exactly as a polynomial.
#[derive(Clone, Debug)]
pub struct IwasawaSeries {
    ring: Arc<PadicRing>,
    coeffs: Vec<PadicCyclo>,
    trunc: usize,
    prec: i64,
    growth: Growth,
    /// No tail: the series is the polynomial given by `coeffs`.
    exact: bool,
}

impl IwasawaSeries {
    pub fn new(ring: &Arc<PadicRing>, coeffs: Vec<PadicCyclo>, trunc: usize, prec: i64, growth: Growth) -> IwasawaSeries {
        let mut coeffs: Vec<PadicCyclo> = coeffs.into_iter().take(trunc).map(|c| c.truncate(prec)).collect();
        coeffs.resize(trunc.min(coeffs.len()), PadicCyclo::exact_zero(ring));
        IwasawaSeries { ring: ring.clone(), coeffs, trunc, prec, growth, exact: false }
    }

    /// Exact polynomial (no tail) with coefficients known to `prec`.
    pub fn polynomial(ring: &Arc<PadicRing>, coeffs: Vec<PadicCyclo>, prec: i64) -> IwasawaSeries {
        let growth = if coeffs.iter().all(|c| c.valuation_bound() >= Ratio::from_integer(0)) {
            Growth::Bounded
        } else {
            Growth::Unknown
        };
        let trunc = coeffs.len();
        let coeffs = coeffs.into_iter().map(|c| c.truncate(prec)).collect();
        IwasawaSeries { ring: ring.clone(), coeffs, trunc, prec, growth, exact: true }
    }

    pub fn from_int_poly(ring: &Arc<PadicRing>, poly: &[i64], prec: i64) -> IwasawaSeries {
        let coeffs = poly.iter().map(|&c| PadicCyclo::from_int(ring, c)).collect();
        IwasawaSeries::polynomial(ring, coeffs, prec)
    }

    pub fn ring(&self) -> &Arc<PadicRing> {
        &self.ring
    }
    pub fn coeffs(&self) -> &[PadicCyclo] {
        &self.coeffs
    }
    pub fn coeff(&self, n: usize) -> PadicCyclo {
        self.coeffs.get(n).cloned().unwrap_or_else(|| {
            if self.exact || n < self.trunc {
                PadicCyclo::exact_zero(&self.ring)
            } else {
                PadicCyclo::zero_to(&self.ring, i64::MIN / 4)
            }
        })
    }
    pub fn truncation(&self) -> usize {
        self.trunc
    }
    pub fn precision(&self) -> i64 {
        self.prec
    }
    pub fn growth(&self) -> Growth {
        self.growth
    }
    pub fn is_exact_polynomial(&self) -> bool {
        self.exact
    }

    pub fn with_growth(mut self, growth: Growth) -> IwasawaSeries {
        self.growth = growth;
        self
    }

    /// Forget coefficients from index `m` on (and any exactness).
    pub fn truncated(&self, m: usize) -> IwasawaSeries {
        let mut out = self.clone();
        out.coeffs.truncate(m);
        out.trunc = self.trunc.min(m);
        out.exact = false;
        out
    }

    pub fn add(&self, o: &IwasawaSeries) -> IwasawaSeries {
        let trunc = self.trunc.min(o.trunc);
        let exact = self.exact && o.exact;
        let len = if exact { self.coeffs.len().max(o.coeffs.len()) } else { trunc };
        let coeffs = (0..len).map(|n| &self.coeff(n) + &o.coeff(n)).collect();
        let prec = self.prec.min(o.prec);
        let growth = if self.growth == Growth::Bounded && o.growth == Growth::Bounded { Growth::Bounded } else { Growth::Unknown };
        IwasawaSeries {
            ring: self.ring.clone(),
            coeffs,
            trunc: if exact { len } else { trunc },
            prec,
            growth,
            exact,
        }
        .retruncate()
    }

    pub fn neg(&self) -> IwasawaSeries {
        let mut out = self.clone();
        out.coeffs = self.coeffs.iter().map(|c| -c).collect();
        out
    }

    pub fn sub(&self, o: &IwasawaSeries) -> IwasawaSeries {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &IwasawaSeries) -> IwasawaSeries {
        let exact = self.exact && o.exact;
        let trunc = if exact {
            (self.coeffs.len() + o.coeffs.len()).saturating_sub(1)
        } else {
            let a = if self.exact { usize::MAX } else { self.trunc };
            let b = if o.exact { usize::MAX } else { o.trunc };
            a.min(b)
        };
        let mut coeffs = vec![PadicCyclo::exact_zero(&self.ring); trunc.min(self.coeffs.len() + o.coeffs.len())];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_exact_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if i + j >= coeffs.len() {
                    break;
                }
                coeffs[i + j] = &coeffs[i + j] + &(a * b);
            }
        }
        // precision: products of coefficients with valuation >= v lose nothing
        // beyond the smaller absolute precision shifted by the other valuation
        let prec = self.prec.min(o.prec);
        let growth = if self.growth == Growth::Bounded && o.growth == Growth::Bounded { Growth::Bounded } else { Growth::Unknown };
        IwasawaSeries { ring: self.ring.clone(), coeffs, trunc, prec, growth, exact }.retruncate()
    }

    pub fn scale(&self, c: &PadicCyclo) -> IwasawaSeries {
        let mut out = self.clone();
        out.coeffs = self.coeffs.iter().map(|x| x * c).collect();
        out.retruncate()
    }

    fn retruncate(mut self) -> IwasawaSeries {
        let prec = self.prec;
        self.coeffs = self.coeffs.into_iter().map(|c| c.truncate(prec)).collect();
        self
    }

    /// Remainder modulo a monic integer polynomial (ascending coefficients).
    pub fn rem_monic(&self, modulus: &[BigInt]) -> Result<IwasawaSeries> {
        let d = modulus.len() - 1;
        if !self.exact && self.trunc < self.coeffs.len().max(d) {
            return Err(Error::Usage("remainder needs an exact polynomial or enough terms".into()));
        }
        let pm = BigInt::from(self.ring.p).pow(self.ring.digits);
        let md: Vec<PadicCyclo> = modulus
            .iter()
            .map(|c| {
                let r = ((c % &pm) + &pm) % &pm;
                PadicCyclo::from_i128(&self.ring, r.to_i128().unwrap())
            })
            .collect();
        let mut r = self.coeffs.clone();
        while r.len() > d {
            let c = r.pop().unwrap();
            if c.is_exact_zero() {
                continue;
            }
            let off = r.len() - d;
            for i in 0..d {
                r[off + i] = &r[off + i] - &(&c * &md[i]);
            }
        }
        Ok(IwasawaSeries::polynomial(&self.ring, r, self.prec).with_growth(self.growth))
    }

    /// Certified lower bound for the valuation of the tail sum_{n >= trunc} c_n (zeta - 1)^n
    /// at a character of level t; `None` when no bound is available.
    fn tail_bound(&self, t: u32) -> Option<f64> {
        if self.exact || t == 0 {
            return Some(f64::INFINITY);
        }
        let phi = euler_phi(ipow(self.ring.p, t)) as f64;
        let m = self.trunc as f64;
        match self.growth {
            Growth::Bounded => Some(m / phi),
            Growth::HalfLog { r } => {
                let lp = (self.ring.p as f64).ln();
                let k = (r + 1) as f64;
                // n/phi - k (3 + log_p n) is increasing for n > k phi / ln p
                let n0 = (k * phi / lp).max(m).max(1.0);
                Some(n0 / phi - k * (3.0 + n0.ln() / lp))
            }
            Growth::Unknown => None,
        }
    }

    /// Target ring for evaluation at characters of level `t`.
    pub fn evaluation_ring(&self, t: u32) -> Result<Arc<PadicRing>> {
        if t <= self.ring.level {
            Ok(self.ring.clone())
        } else {
            self.ring.at_level(t)
        }
    }

    /// h(theta) = sum c_n (zeta - 1)^n with certified absolute precision.
    pub fn evaluate_at_character(&self, theta: &GammaCharacter) -> Result<PadicCyclo> {
        let t = theta.level();
        let target = self.evaluation_ring(t)?;
        self.evaluate_in(theta, &target)
    }

    pub fn evaluate_in(&self, theta: &GammaCharacter, target: &Arc<PadicRing>) -> Result<PadicCyclo> {
        let t = theta.level();
        if target.level < t {
            return Err(Error::Usage("target ring level below the character level".into()));
        }
        let bound = self.tail_bound(t).ok_or_else(|| {
            Error::TailNotCertified(format!("growth of the series is unknown beyond T^{}", self.trunc))
        })?;
        if bound < self.prec as f64 {
            return Err(Error::TailNotCertified(format!(
                "truncation {} gives tail valuation >= {:.3} < {} at level {t}",
                self.trunc, bound, self.prec
            )));
        }
        if theta.is_trivial() {
            return self.coeff(0).lift_to(target).map(|c| c.truncate(self.prec));
        }
        if self.ring.level == 0 && target.level == t {
            // Horner at pi, then move to zeta^e by the Galois action
            let mut acc = PadicCyclo::exact_zero(target);
            for c in self.coeffs.iter().rev() {
                acc = &acc.mul_pi() + &c.lift_to(target)?;
            }
            return Ok(acc.galois(theta.e).truncate(self.prec));
        }
        let x = PadicCyclo::generator(target);
        let z = x.pow((theta.e * ipow(target.p, target.level - t)) as u64);
        let w = &z - &PadicCyclo::one(target);
        let mut acc = PadicCyclo::exact_zero(target);
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * &w) + &c.lift_to(target)?;
        }
        Ok(acc.truncate(self.prec))
    }

    /// (mu, lambda) of a bounded series.
    pub fn mu_lambda(&self) -> Result<MuLambda> {
        if self.growth != Growth::Bounded {
            return Err(Error::NotBounded(format!("growth tag is {}", self.growth)));
        }
        let mut best: Option<(Ratio<i64>, usize)> = None;
        for (n, c) in self.coeffs.iter().enumerate() {
            if let Some(v) = c.valuation() {
                if v < Ratio::from_integer(0) {
                    return Err(Error::NotBounded(format!("coefficient {n} has valuation {v}")));
                }
                if best.map_or(true, |(b, _)| v < b) {
                    best = Some((v, n));
                }
            }
        }
        let (mu, lambda) = best.ok_or_else(|| {
            Error::Uncertifiable(format!("all coefficients vanish modulo p^{} below T^{}", self.prec, self.trunc))
        })?;
        // an earlier coefficient that is zero only to a precision <= mu could hide a smaller valuation
        let hidden = self.coeffs[..lambda].iter().any(|c| c.is_zero() && !c.is_exact_zero() && c.valuation_bound() <= mu);
        let certified = lambda < self.trunc && mu < Ratio::from_integer(self.prec) && !hidden;
        Ok(MuLambda { mu, lambda, certified })
    }

    /// Text form: header `series p N M growth exact`, then one `c shift prec k_0 ... ` line per coefficient.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "series {} {} {} {} {}\n",
            self.ring.p, self.prec, self.trunc, self.growth, if self.exact { "exact" } else { "truncated" }
        );
        for c in &self.coeffs {
            if c.is_exact_zero() {
                out.push_str("c exact0\n");
                continue;
            }
            let (shift, prec, v) = c.parts();
            out.push_str(&format!("c {shift} {prec}"));
            for x in v {
                out.push_str(&format!(" {x}"));
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MuLambda {
    pub mu: Ratio<i64>,
    pub lambda: usize,
    pub certified: bool,
}

/// Parity sign of a plus/minus object.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn parse(s: &str) -> Result<Sign> {
        match s {
            "+" | "plus" => Ok(Sign::Plus),
            "-" | "minus" => Ok(Sign::Minus),
            _ => Err(Error::Usage(format!("sign must be + or -, got {s}"))),
        }
    }

    /// Conductor-exponent parity interpolated by this sign: even for +, odd for -.
    pub fn conductor_parity(self) -> u32 {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }

    /// Tower levels j whose Phi_{p^j} factors appear in the parity modulus.
    pub fn levels(self, m: u32) -> Vec<u32> {
        (1..=m).filter(|j| (j % 2 == 1) == (self == Sign::Plus)).collect()
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", if *self == Sign::Plus { "+" } else { "-" })
    }
}

fn big_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Phi_{p^j}(1 + T) with big integer coefficients.
pub fn shifted_cyclotomic(p: i64, j: u32) -> Vec<BigInt> {
    let step = ipow(p, j - 1) as usize;
    let mut base = vec![BigInt::from(1)];
    let one_plus_t_pow: Vec<BigInt> = binomial_row(step);
    let mut sum = vec![BigInt::zero(); step * (p as usize - 1) + 1];
    for _ in 0..p {
        for (i, c) in base.iter().enumerate() {
            sum[i] += c;
        }
        base = big_mul(&base, &one_plus_t_pow);
    }
    sum
}

fn binomial_row(n: usize) -> Vec<BigInt> {
    let mut row = vec![BigInt::from(1)];
    for k in 0..n {
        let next = &row[k] * BigInt::from(n - k) / BigInt::from(k + 1);
        row.push(next);
    }
    row
}

/// T * prod_{j in levels(sign, m)} Phi_{p^j}(1 + T).
pub fn parity_modulus(p: i64, m: u32, sign: Sign) -> Vec<BigInt> {
    let mut acc = vec![BigInt::zero(), BigInt::from(1)];
    for j in sign.levels(m) {
        acc = big_mul(&acc, &shifted_cyclotomic(p, j));
    }
    acc
}

fn reduce_poly(poly: &[BigInt], ring: &Arc<PadicRing>) -> Vec<PadicCyclo> {
    let pm = BigInt::from(ring.p).pow(ring.digits);
    poly.iter()
        .map(|c| {
            let r = ((c % &pm) + &pm) % &pm;
            PadicCyclo::from_i128(ring, r.to_i128().unwrap())
        })
        .collect()
}

/// The characters whose values determine a residue modulo the parity modulus.
pub fn characters_for(p: i64, m: u32, sign: Sign) -> Vec<GammaCharacter> {
    let mut out = vec![GammaCharacter::trivial(p)];
    for j in sign.levels(m) {
        let ord = ipow(p, j);
        for e in 1..ord {
            if e % p != 0 {
                out.push(GammaCharacter { p, c: j + 1, e });
            }
        }
    }
    out
}

/// The unique residue modulo (p^N, parity modulus) with the given values.
/// Values at Galois-conjugate characters must be Galois-conjugate.
pub fn values_to_series(
    base: &Arc<PadicRing>,
    values: &BTreeMap<GammaCharacter, PadicCyclo>,
    sign: Sign,
    m: u32,
) -> Result<IwasawaSeries> {
    if base.level != 0 {
        return Err(Error::Usage("series coefficients live in a level-0 ring".into()));
    }
    let p = base.p;
    let needed = characters_for(p, m, sign);
    for th in &needed {
        if !values.contains_key(th) {
            return Err(Error::MissingCharacter(th.to_string()));
        }
    }
    if values.len() != needed.len() {
        let extra = values.keys().find(|k| !needed.contains(k)).unwrap();
        return Err(Error::MissingCharacter(format!("{extra} is not a root of the parity modulus")));
    }
    let omega = parity_modulus(p, m, sign);
    let mut prec = i64::MAX;
    let levels = sign.levels(m);
    // factor list: T first, then Phi_{p^j}(1+T)
    let mut factors: Vec<(u32, Vec<BigInt>)> = vec![(0, vec![BigInt::zero(), BigInt::from(1)])];
    for &j in &levels {
        factors.push((j, shifted_cyclotomic(p, j)));
    }
    let mut total = vec![PadicCyclo::exact_zero(base); omega.len() - 1];
    for (idx, (j, _)) in factors.iter().enumerate() {
        let mut cofactor = vec![BigInt::from(1)];
        for (k, (_, fk)) in factors.iter().enumerate() {
            if k != idx {
                cofactor = big_mul(&cofactor, fk);
            }
        }
        let cof = reduce_poly(&cofactor, base);
        let rep = GammaCharacter { p, c: if *j == 0 { 0 } else { j + 1 }, e: if *j == 0 { 0 } else { 1 } };
        let v = &values[&rep];
        prec = prec.min(v.abs_precision());
        let residue: Vec<PadicCyclo> = if *j == 0 {
            if v.ring().level != 0 && !v.is_zero() {
                return Err(Error::Usage("trivial-character value must lie in the level-0 ring".into()));
            }
            let v0 = if v.ring().level == 0 { v.clone() } else { PadicCyclo::zero_to(base, v.abs_precision()) };
            let c0 = cof[0].clone();
            vec![v0.try_div(&c0)?]
        } else {
            let ring_j = v.ring().clone();
            if ring_j.level != *j || ring_j.unram != base.unram {
                return Err(Error::Usage(format!("value at {rep} must lie in the level-{j} ring")));
            }
            // Galois consistency across the orbit
            for e in 1..ipow(p, *j) {
                if e % p == 0 {
                    continue;
                }
                let th = GammaCharacter { p, c: j + 1, e };
                let w = &values[&th];
                prec = prec.min(w.abs_precision());
                if *w != v.galois(e) {
                    return Err(Error::Inconsistent(format!("value at {th} is not the conjugate of the value at {rep}")));
                }
            }
            let pi = PadicCyclo::pi(&ring_j);
            let mut at = PadicCyclo::exact_zero(&ring_j);
            for c in cof.iter().rev() {
                at = &(&at * &pi) + &c.lift_to(&ring_j)?;
            }
            let s = v.try_div(&at)?;
            (0..ring_j.e).map(|l| s.pi_component(l, base)).collect()
        };
        // add residue(T) * cofactor(T)
        for (a, ra) in residue.iter().enumerate() {
            if ra.is_exact_zero() {
                continue;
            }
            for (b, cb) in cof.iter().enumerate() {
                if a + b < total.len() {
                    total[a + b] = &total[a + b] + &(ra * cb);
                }
            }
        }
    }
    let prec_out = total.iter().map(|c| c.abs_precision()).min().unwrap_or(prec).min(prec);
    let mut out = IwasawaSeries::polynomial(base, total, prec_out);
    out.trunc = omega.len() - 1;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring0() -> Arc<PadicRing> {
        PadicRing::tower(3, 0, 12).unwrap()
    }

    #[test]
    fn evaluation_examples() {
        let r = ring0();
        let h = IwasawaSeries::from_int_poly(&r, &[1, 1], 8);
        assert_eq!(h.evaluate_at_character(&GammaCharacter::trivial(3)).unwrap(), PadicCyclo::one(&r));
        let t = IwasawaSeries::from_int_poly(&r, &[0, 1], 8);
        let th = GammaCharacter::new(3, 3, 1).unwrap();
        let v = t.evaluate_at_character(&th).unwrap();
        assert_eq!(v.valuation().unwrap(), Ratio::new(1, 6));
        let phi9: Vec<i64> = shifted_cyclotomic(3, 2).iter().map(|c| c.to_i64().unwrap()).collect();
        let h = IwasawaSeries::from_int_poly(&r, &phi9, 8);
        assert!(h.evaluate_at_character(&th).unwrap().is_zero());
    }

    #[test]
    fn parity_modulus_degrees() {
        assert_eq!(parity_modulus(3, 1, Sign::Plus).len() - 1, 3);
        assert_eq!(parity_modulus(3, 2, Sign::Minus).len() - 1, 7);
        assert_eq!(parity_modulus(3, 4, Sign::Plus).len() - 1, 21);
        assert_eq!(parity_modulus(3, 4, Sign::Minus).len() - 1, 61);
    }

    #[test]
    fn mu_lambda_examples() {
        let r = ring0();
        let h = IwasawaSeries::from_int_poly(&r, &[3, 3], 8);
        let ml = h.mu_lambda().unwrap();
        assert_eq!((ml.mu, ml.lambda, ml.certified), (Ratio::from_integer(1), 0, true));
        let h = IwasawaSeries::from_int_poly(&r, &[0, 3, 1], 8);
        let ml = h.mu_lambda().unwrap();
        assert_eq!((ml.mu, ml.lambda), (Ratio::from_integer(0), 2));
        let phi9: Vec<PadicCyclo> = shifted_cyclotomic(3, 2)
            .iter()
            .map(|c| PadicCyclo::from_ratio(&r, c.to_i64().unwrap(), 3).unwrap())
            .collect();
        let h = IwasawaSeries::polynomial(&r, phi9, 8);
        assert!(matches!(h.mu_lambda(), Err(Error::NotBounded(_))));
    }

    #[test]
    fn truncated_series_needs_enough_terms() {
        let r = ring0();
        let coeffs: Vec<PadicCyclo> = (0..10).map(|n| PadicCyclo::from_int(&r, n + 1)).collect();
        let h = IwasawaSeries::new(&r, coeffs, 10, 8, Growth::Bounded);
        let th = GammaCharacter::new(3, 3, 1).unwrap();
        assert!(matches!(h.evaluate_at_character(&th), Err(Error::TailNotCertified(_))));
        let h2 = h.clone().with_growth(Growth::Unknown);
        assert!(matches!(h2.evaluate_at_character(&GammaCharacter::new(3, 2, 1).unwrap()), Err(Error::TailNotCertified(_))));
    }

    #[test]
    fn constant_and_identity_tables() {
        let r = ring0();
        for sign in [Sign::Plus, Sign::Minus] {
            let m = 2;
            let c = IwasawaSeries::from_int_poly(&r, &[5], 8);
            let t = IwasawaSeries::from_int_poly(&r, &[0, 1], 8);
            for h in [c, t] {
                let mut vals = BTreeMap::new();
                for th in characters_for(3, m, sign) {
                    vals.insert(th, h.evaluate_at_character(&th).unwrap());
                }
                let back = values_to_series(&r, &vals, sign, m).unwrap();
                for n in 0..back.coeffs().len() {
                    assert!(back.coeff(n).eq_to_precision(&h.coeff(n), 6), "{sign} n={n}");
                }
            }
        }
    }
}
