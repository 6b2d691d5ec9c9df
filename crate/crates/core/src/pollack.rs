//! Plus/minus logarithms, the omega factors, and alpha-free plus/minus values
//! built from lambda tables (with a symbolic two-root oracle).

use std::sync::Arc;

use crate::arith::{inv_mod, mul_mod, pow_mod, val_p};
use crate::characters::{dirichlet_lift, GammaCharacter};
use crate::cyclo::CycloNumber;
use crate::error::{Error, Result};
use crate::iwasawa::{Growth, IwasawaSeries, Sign};
use crate::lvalues::LambdaTable;
use crate::padic::{max_digits, PadicCyclo, PadicRing};

fn sign_takes(sign: Sign, m: u32) -> bool {
    match sign {
        Sign::Plus => m % 2 == 0,
        Sign::Minus => m % 2 == 1,
    }
}

fn strip(n: i128, p: i128) -> (i128, u32) {
    let v = val_p(n, p);
    (n / p.pow(v), v)
}

/// binom(n, i) mod q = p^k for i < len.
fn binomial_row_mod(n: i128, len: usize, p: i128, k: u32) -> Vec<i128> {
    let q = p.pow(k);
    let mut out = vec![0i128; len];
    let mut unit = 1i128;
    let mut v = 0u32;
    for (i, slot) in out.iter_mut().enumerate() {
        let i = i as i128;
        if i > n {
            break;
        }
        if v < k {
            *slot = mul_mod(unit, p.pow(v), q);
        }
        if i == n {
            break;
        }
        let (num, vn) = strip(n - i, p);
        let (den, vd) = strip(i + 1, p);
        unit = mul_mod(mul_mod(unit, num.rem_euclid(q), q), inv_mod(den, q).unwrap(), q);
        v = v + vn - vd;
    }
    out
}

fn poly_mul_mod(a: &[i128], b: &[i128], len: usize, q: i128) -> Vec<i128> {
    let mut out = vec![0i128; len];
    for (i, &x) in a.iter().enumerate().take(len) {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(len - i) {
            out[i + j] = (out[i + j] + mul_mod(x, y, q)) % q;
        }
    }
    out
}

/// p * Phi_{p^m}(u (1 + T)) / p as an integer series mod (p^k, T^len).
fn factor_series(p: i128, m: u32, u: i128, len: usize, k: u32) -> Vec<i128> {
    let q = p.pow(k);
    let step = p.pow(m - 1);
    let mut out = vec![0i128; len];
    for j in 0..p {
        let w = pow_mod(u, (j * step) as u128, q);
        let row = binomial_row_mod(j * step, len, p, k);
        for (o, r) in out.iter_mut().zip(row) {
            *o = (*o + mul_mod(w, r, q)) % q;
        }
    }
    out
}

/// Allowance for the growth of the already-accumulated product when deciding
/// that a further factor is negligible.
fn growth_allowance(p: i64, r: u32, len: usize) -> u32 {
    let lg = (len.max(1) as f64).ln() / (p as f64).ln();
    ((r as f64 + 1.0) * (3.0 + lg)).ceil() as u32
}

/// The truncated half-logarithm log^{sign}_r as a series in T, modulo (p^prec, T^len).
pub fn log_pm_series(sign: Sign, r: u32, p: i64, len: usize, prec: u32) -> Result<IwasawaSeries> {
    let len = len.max(1);
    let k = max_digits(p);
    let pp = p as i128;
    let q = pp.pow(k);
    let allowance = growth_allowance(p, r, len);
    let stop_at = prec + allowance;
    let mut acc = vec![0i128; len];
    acc[0] = 1;
    let mut neg_shift = 0u32;
    let kappa_inv = inv_mod(1 + pp, q).unwrap();
    for s in 0..=r {
        neg_shift += 1;
        let u = pow_mod(kappa_inv, s as u128, q);
        let mut m = 1u32;
        loop {
            if sign_takes(sign, m) {
                let g = factor_series(pp, m, u, len, k);
                // g = p * factor; the factor is 1 + O(p^stop_at) once g - p vanishes mod p^{stop_at+1}
                let qq = pp.pow((stop_at + 1).min(k));
                let negligible = g.iter().enumerate().all(|(i, &c)| {
                    let target = if i == 0 { pp } else { 0 };
                    (c - target).rem_euclid(qq) == 0
                });
                if negligible {
                    break;
                }
                acc = poly_mul_mod(&acc, &g, len, q);
                neg_shift += 1;
            }
            m += 1;
            if m > 64 {
                return Err(Error::PrecisionExhausted("log product did not stabilize".into()));
            }
        }
    }
    if (k as i64) - 1 - (neg_shift as i64) < prec as i64 {
        return Err(Error::PrecisionExhausted(format!(
            "{neg_shift} factors of 1/p leave fewer than {prec} digits of {k}"
        )));
    }
    let ring = PadicRing::tower(p, 0, k - 1)?;
    let coeffs = acc
        .iter()
        .map(|&c| {
            if c == 0 {
                PadicCyclo::zero_to(&ring, prec as i64)
            } else {
                let (u, v) = strip(c, pp);
                let shift = v as i64 - neg_shift as i64;
                PadicCyclo::from_pi_coeffs_prec(&ring, shift, prec as i64 - shift, vec![u])
            }
        })
        .collect();
    Ok(IwasawaSeries::new(&ring, coeffs, len, prec as i64, Growth::HalfLog { r }))
}

/// Value at theta * kappa^{s0} of log^{sign}_r, in `ring` (level at least that of theta).
pub fn log_pm_at_character(sign: Sign, r: u32, theta: &GammaCharacter, s0: i64, ring: &Arc<PadicRing>) -> Result<PadicCyclo> {
    let t = theta.level();
    if ring.p != theta.p || ring.level < t {
        return Err(Error::Usage("ring does not contain the values of the character".into()));
    }
    let p = ring.p;
    let pp = p as i128;
    let k = max_digits(p);
    let q = pp.pow(k);
    let digits = ring.digits as i64;
    // exact algebraic part and p-adic part of the product
    let mut exact = CycloNumber::one(1);
    let mut padic = PadicCyclo::one(ring);
    let mut rational = 1i128;
    let mut rational_prec = k as i64;
    let mut p_shift = 0i64;
    for s in 0..=r as i64 {
        p_shift -= 1;
        let tau = s0 - s;
        if tau == 0 {
            for m in 1..=t {
                if !sign_takes(sign, m) {
                    continue;
                }
                if m == t {
                    return Ok(PadicCyclo::exact_zero(ring));
                }
                // Phi_{p^m}(zeta) = sum_j zeta^{j p^{m-1}}, zeta of order p^t > p^m
                let z = theta.zeta().pow(theta.p.pow(m - 1) as u64);
                let mut phi = CycloNumber::zero(1);
                let mut zj = CycloNumber::one(1);
                for _ in 0..p {
                    phi = &phi + &zj;
                    zj = &zj * &z;
                }
                exact = &exact * &phi;
                p_shift -= 1;
            }
            // factors with m > t equal p/p = 1
            continue;
        }
        let kappa_tau = if tau > 0 {
            pow_mod(1 + pp, tau as u128, q)
        } else {
            pow_mod(inv_mod(1 + pp, q).unwrap(), (-tau) as u128, q)
        };
        let vt = val_p(tau as i128, pp) as i64;
        let mut m = 1u32;
        loop {
            if sign_takes(sign, m) {
                if m <= t {
                    // argument kappa^tau * zeta, evaluated in the ring
                    let zeta = theta.zeta().padic_embed(ring)?;
                    let a = &zeta * &PadicCyclo::from_i128(ring, kappa_tau);
                    let b = a.pow(pp.pow(m - 1) as u64);
                    let mut phi = PadicCyclo::exact_zero(ring);
                    let mut bj = PadicCyclo::one(ring);
                    for _ in 0..p {
                        phi = &phi + &bj;
                        bj = &bj * &b;
                    }
                    padic = &padic * &phi;
                    p_shift -= 1;
                } else {
                    // zeta is killed: Phi_p(kappa^{tau p^{m-1}}) / p = 1 + O(p^{m + v(tau)})
                    if m as i64 + vt >= digits + 2 {
                        rational_prec = rational_prec.min(m as i64 + vt);
                        break;
                    }
                    let b = pow_mod(kappa_tau, pp.pow(m - 1) as u128, q);
                    let mut phi = 0i128;
                    let mut bj = 1i128;
                    for _ in 0..p {
                        phi = (phi + bj) % q;
                        bj = mul_mod(bj, b, q);
                    }
                    debug_assert_eq!(phi % pp, 0);
                    rational = mul_mod(rational, phi / pp, q / pp);
                    rational_prec = rational_prec.min(k as i64 - 1);
                }
            }
            m += 1;
        }
    }
    let mut out = &exact.padic_embed(ring)? * &padic;
    out = &out * &PadicCyclo::from_i128(ring, rational).truncate(rational_prec);
    Ok(out.mul_p_power(p_shift))
}

/// omega^{+}(theta) = (-p)^{c/2} log_1^+(theta) for even c, omega^{-}(theta) = (-p)^{(c+1)/2} log_1^-(theta) for odd c.
pub fn omega_pm(theta: &GammaCharacter, ring: &Arc<PadicRing>) -> Result<(Sign, PadicCyclo)> {
    if theta.is_trivial() {
        return Err(Error::TrivialCharacter("omega is defined for conductor p^c with c >= 2".into()));
    }
    let (sign, k) = if theta.c % 2 == 0 { (Sign::Plus, theta.c / 2) } else { (Sign::Minus, theta.c.div_ceil(2)) };
    let log = log_pm_at_character(sign, 1, theta, 0, ring)?;
    let factor = PadicCyclo::from_int(ring, -theta.p).pow(k as u64);
    let out = &factor * &log;
    if out.is_zero() {
        return Err(Error::PrecisionExhausted(format!("omega at {theta} is zero to the working precision")));
    }
    Ok((sign, out))
}

/// omega of the requested sign, rejecting a character of the other parity.
pub fn omega_signed(sign: Sign, theta: &GammaCharacter, ring: &Arc<PadicRing>) -> Result<PadicCyclo> {
    let (s, w) = omega_pm(theta, ring)?;
    if s != sign {
        return Err(Error::ParityMismatch(format!("conductor exponent {} does not match sign {sign}", theta.c)));
    }
    Ok(w)
}

/// omega of a representation whose restriction to Gamma is `dim` copies of theta.
pub fn omega_representation(theta: &GammaCharacter, dim: u32, ring: &Arc<PadicRing>) -> Result<(Sign, PadicCyclo)> {
    let (s, w) = omega_pm(theta, ring)?;
    Ok((s, w.pow(dim as u64)))
}

/// a + b alpha with alpha^2 = -eps p.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolicQuadratic {
    pub a: CycloNumber,
    pub b: CycloNumber,
    eps: CycloNumber,
    p: i64,
}

impl SymbolicQuadratic {
    pub fn new(a: CycloNumber, b: CycloNumber, eps: &CycloNumber, p: i64) -> SymbolicQuadratic {
        SymbolicQuadratic { a, b, eps: eps.clone(), p }
    }

    pub fn scalar(a: CycloNumber, eps: &CycloNumber, p: i64) -> SymbolicQuadratic {
        SymbolicQuadratic::new(a, CycloNumber::zero(1), eps, p)
    }

    pub fn alpha(eps: &CycloNumber, p: i64) -> SymbolicQuadratic {
        SymbolicQuadratic::new(CycloNumber::zero(1), CycloNumber::one(1), eps, p)
    }

    /// alpha^2 = -eps p.
    pub fn alpha_squared(&self) -> CycloNumber {
        self.eps.scale_int(-self.p)
    }

    fn same(&self, a: CycloNumber, b: CycloNumber) -> SymbolicQuadratic {
        SymbolicQuadratic { a, b, eps: self.eps.clone(), p: self.p }
    }

    pub fn add(&self, o: &SymbolicQuadratic) -> SymbolicQuadratic {
        self.same(&self.a + &o.a, &self.b + &o.b)
    }

    pub fn sub(&self, o: &SymbolicQuadratic) -> SymbolicQuadratic {
        self.same(&self.a - &o.a, &self.b - &o.b)
    }

    pub fn mul(&self, o: &SymbolicQuadratic) -> SymbolicQuadratic {
        let d = self.alpha_squared();
        self.same(&(&self.a * &o.a) + &(&(&self.b * &o.b) * &d), &(&self.a * &o.b) + &(&self.b * &o.a))
    }

    pub fn scale(&self, c: &CycloNumber) -> SymbolicQuadratic {
        self.same(&self.a * c, &self.b * c)
    }

    /// alpha -> -alpha, exchanging the two roots.
    pub fn conj(&self) -> SymbolicQuadratic {
        self.same(self.a.clone(), -&self.b)
    }

    pub fn try_inv(&self) -> Result<SymbolicQuadratic> {
        let n = &(&self.a * &self.a) - &(&(&self.b * &self.b) * &self.alpha_squared());
        let ni = n.try_inv()?;
        Ok(self.same(&self.a * &ni, &(-&self.b) * &ni))
    }

    pub fn pow_i(&self, n: i64) -> Result<SymbolicQuadratic> {
        let base = if n < 0 { self.try_inv()? } else { self.clone() };
        let mut out = self.same(CycloNumber::one(1), CycloNumber::zero(1));
        for _ in 0..n.unsigned_abs() {
            out = out.mul(&base);
        }
        Ok(out)
    }

    pub fn is_alpha_free(&self) -> bool {
        self.b.is_zero()
    }
}

/// sum over units a mod p^c of theta(a) lambda(a/p^c).
pub fn twisted_sum(table: &LambdaTable, theta: &GammaCharacter) -> Result<CycloNumber> {
    let lift = dirichlet_lift(theta)?;
    let mut acc = CycloNumber::zero(1);
    for (a, e) in lift.entries() {
        let chi = CycloNumber::root_of_unity(theta.order(), e);
        acc = &acc + &(&chi * &table.exact(theta.c, a)?);
    }
    Ok(acc)
}

/// The algebraic part L^{sign}(theta) * log_1^{sign}(theta).
pub fn pm_algebraic(sign: Sign, table: &LambdaTable, theta: &GammaCharacter, eps: &CycloNumber) -> Result<CycloNumber> {
    let p = table.p;
    let base = eps.scale_int(-p);
    if theta.is_trivial() {
        return match sign {
            Sign::Plus => Ok(table.exact(0, 0)?.scale_int(p - 1).try_div(&CycloNumber::from_int(1, p))?),
            Sign::Minus => {
                let mut s = CycloNumber::zero(1);
                for a in table.units(1) {
                    s = &s + &table.exact(1, a)?;
                }
                s.try_div(&base)
            }
        };
    }
    if theta.c % 2 != sign.conductor_parity() {
        return Err(Error::ParityMismatch(format!("conductor exponent {} does not match sign {sign}", theta.c)));
    }
    let k = match sign {
        Sign::Plus => theta.c / 2,
        Sign::Minus => theta.c.div_ceil(2),
    };
    twisted_sum(table, theta)?.try_div(&base.pow(k as u64))
}

/// A plus/minus value: algebraic part, the log factor, and their quotient.
#[derive(Clone, Debug)]
pub struct PmValue {
    pub theta: GammaCharacter,
    pub sign: Sign,
    pub algebraic: CycloNumber,
    pub log: PadicCyclo,
    pub value: PadicCyclo,
}

pub fn pm_value(sign: Sign, table: &LambdaTable, theta: &GammaCharacter, eps: &CycloNumber, ring: &Arc<PadicRing>) -> Result<PmValue> {
    let algebraic = pm_algebraic(sign, table, theta, eps)?;
    let log = log_pm_at_character(sign, 1, theta, 0, ring)?;
    let value = algebraic.padic_embed(ring)?.try_div(&log)?;
    Ok(PmValue { theta: *theta, sign, algebraic, log, value })
}

/// alpha-free plus/minus numerators from the two-root construction; `None`
/// where the combination is not interpolated.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposed {
    pub theta: GammaCharacter,
    pub plus: Option<CycloNumber>,
    pub minus: Option<CycloNumber>,
}

/// L_alpha(theta) = sum over units a mod p^n of theta(a) mu_alpha(a + p^n Z_p),
/// mu_alpha(a + p^n) = alpha^{-n} lambda(a/p^n) - eps alpha^{-n-1} lambda(a/p^{n-1}).
pub fn l_alpha(table: &LambdaTable, theta: &GammaCharacter, eps: &CycloNumber) -> Result<SymbolicQuadratic> {
    let p = table.p;
    let n = theta.c.max(1);
    let alpha = SymbolicQuadratic::alpha(eps, p);
    let a_n = alpha.pow_i(-(n as i64))?;
    let a_n1 = alpha.pow_i(-(n as i64) - 1)?.scale(eps);
    let lift = if theta.is_trivial() { None } else { Some(dirichlet_lift(theta)?) };
    let mut acc = SymbolicQuadratic::scalar(CycloNumber::zero(1), eps, p);
    for a in table.units(n) {
        let chi = match &lift {
            Some(l) => l.value(a)?,
            None => CycloNumber::one(1),
        };
        let term = a_n.scale(&table.exact(n, a)?).sub(&a_n1.scale(&table.exact(n - 1, a)?));
        acc = acc.add(&term.scale(&chi));
    }
    Ok(acc)
}

pub fn decompose_admissible(table: &LambdaTable, eps: &CycloNumber, characters: &[GammaCharacter]) -> Result<Vec<Decomposed>> {
    let p = table.p;
    let alpha = SymbolicQuadratic::alpha(eps, p);
    let half = SymbolicQuadratic::scalar(CycloNumber::from_ratio(1, 1, 2), eps, p);
    // (L_{alpha_2} - L_{alpha_1}) / (alpha_2 - alpha_1) with alpha_2 = -alpha_1
    let diff_inv = alpha.conj().sub(&alpha).try_inv()?;
    let mut out = Vec::with_capacity(characters.len());
    for theta in characters {
        let l1 = l_alpha(table, theta, eps)?;
        let l2 = l1.conj();
        let plus = l1.add(&l2).mul(&half);
        let minus = l2.sub(&l1).mul(&diff_inv);
        for (name, x) in [("plus", &plus), ("minus", &minus)] {
            if !x.is_alpha_free() {
                return Err(Error::ResidualAlpha(format!("{name} combination at {theta}")));
            }
        }
        let (keep_plus, keep_minus) = match theta.parity() {
            None => (true, true),
            Some(0) => (true, false),
            Some(_) => (false, true),
        };
        for (keep, name, x) in [(keep_plus, "plus", &plus), (keep_minus, "minus", &minus)] {
            if !keep && !x.a.is_zero() {
                return Err(Error::Inconsistent(format!("{name} numerator at {theta} should vanish")));
            }
        }
        out.push(Decomposed {
            theta: *theta,
            plus: keep_plus.then(|| plus.a.clone()),
            minus: keep_minus.then(|| minus.a.clone()),
        });
    }
    Ok(out)
}

/// Ratios of the computed trivial-character values to the constants
/// (p - 1) lambda(0) and (1 + eps^{-1}) lambda(0): (1/(p log_1^+(1)), 1/(p log_1^-(1))).
pub fn trivial_constant_ratios(ring: &Arc<PadicRing>) -> Result<(PadicCyclo, PadicCyclo)> {
    let one = GammaCharacter::trivial(ring.p);
    let p = PadicCyclo::from_int(ring, ring.p);
    let lp = log_pm_at_character(Sign::Plus, 1, &one, 0, ring)?;
    let lm = log_pm_at_character(Sign::Minus, 1, &one, 0, ring)?;
    Ok(((&p * &lp).try_inv()?, (&p * &lm).try_inv()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::enumerate_gamma_characters;
    use num_rational::Ratio;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn minus_constant_term_has_valuation_minus_one() {
        let s = log_pm_series(Sign::Minus, 0, 3, 8, 6).unwrap();
        assert_eq!(s.coeff(0).valuation(), Some(Ratio::from_integer(-1)));
        let third = PadicCyclo::from_ratio(s.ring(), 1, 3).unwrap();
        assert!(s.coeff(0).eq_to_precision(&third, 6));
    }

    #[test]
    fn series_is_stable_under_longer_truncation() {
        for sign in [Sign::Plus, Sign::Minus] {
            let a = log_pm_series(sign, 1, 3, 12, 6).unwrap();
            let b = log_pm_series(sign, 1, 3, 24, 6).unwrap();
            for n in 0..12 {
                assert!(a.coeff(n).eq_to_precision(&b.coeff(n), 6), "{sign} coefficient {n}");
            }
        }
    }

    #[test]
    fn zero_pattern_for_small_conductors() {
        for theta in enumerate_gamma_characters(3, 5) {
            let ring = PadicRing::tower(3, theta.level(), 8).unwrap();
            let plus = log_pm_at_character(Sign::Plus, 1, &theta, 0, &ring).unwrap();
            let minus = log_pm_at_character(Sign::Minus, 1, &theta, 0, &ring).unwrap();
            let c = theta.c;
            assert_eq!(plus.is_exact_zero(), c >= 3 && c % 2 == 1, "plus at {theta}");
            assert_eq!(minus.is_exact_zero(), c >= 2 && c % 2 == 0, "minus at {theta}");
            assert!(plus.is_exact_zero() || !plus.is_zero());
            assert!(minus.is_exact_zero() || !minus.is_zero());
        }
    }

    #[test]
    fn series_and_character_values_agree() {
        let prec = 5;
        let series = log_pm_series(Sign::Plus, 1, 3, 60, prec).unwrap();
        for e in [1, 2] {
            let theta = GammaCharacter::new(3, 2, e).unwrap();
            let ring = series.evaluation_ring(1).unwrap();
            let direct = log_pm_at_character(Sign::Plus, 1, &theta, 0, &ring).unwrap();
            let via = series.evaluate_at_character(&theta).unwrap();
            assert!(direct.eq_to_precision(&via, prec as i64), "{direct} vs {via}");
        }
        let one = GammaCharacter::trivial(3);
        let ring = series.ring().clone();
        let direct = log_pm_at_character(Sign::Plus, 1, &one, 0, &ring).unwrap();
        assert!(direct.eq_to_precision(&series.coeff(0), prec as i64));
        assert_eq!(direct.valuation(), Some(Ratio::from_integer(-2)));
    }

    #[test]
    fn twisted_evaluation_matches_series() {
        // log(kappa^{s0}) is the series at T = (1+p)^{s0} - 1
        let prec = 5;
        let series = log_pm_series(Sign::Minus, 1, 3, 40, prec).unwrap();
        let ring = series.ring().clone();
        let t = PadicCyclo::from_int(&ring, 3);
        let mut acc = PadicCyclo::exact_zero(&ring);
        for c in series.coeffs().iter().rev() {
            acc = &(&acc * &t) + c;
        }
        let direct = log_pm_at_character(Sign::Minus, 1, &GammaCharacter::trivial(3), 1, &ring).unwrap();
        assert!(direct.eq_to_precision(&acc, prec as i64 - 2), "{direct} vs {acc}");
    }

    #[test]
    fn omega_is_nonzero_and_parity_checked() {
        for theta in enumerate_gamma_characters(3, 5).into_iter().skip(1) {
            let ring = PadicRing::tower(3, theta.level(), 8).unwrap();
            let (sign, w) = omega_pm(&theta, &ring).unwrap();
            assert_eq!(sign.conductor_parity(), theta.c % 2);
            assert!(!w.is_zero());
            let other = if sign == Sign::Plus { Sign::Minus } else { Sign::Plus };
            assert!(matches!(omega_signed(other, &theta, &ring), Err(Error::ParityMismatch(_))));
        }
        let ring = PadicRing::tower(3, 1, 8).unwrap();
        let theta = GammaCharacter::new(3, 2, 1).unwrap();
        let (_, w) = omega_pm(&theta, &ring).unwrap();
        let (_, w2) = omega_representation(&theta, 2, &ring).unwrap();
        assert!(w2.eq_to_precision(&(&w * &w), 6));
        assert!(omega_pm(&GammaCharacter::trivial(3), &ring).is_err());
    }

    fn random_table(rng: &mut ChaCha8Rng, p: i64, depth: u32, modulus: i64) -> LambdaTable {
        let mut t = LambdaTable::new_exact(p, depth, "random", modulus);
        let deg = crate::arith::euler_phi(modulus) as usize;
        let rand_num = |rng: &mut ChaCha8Rng| {
            let coeffs = (0..deg)
                .map(|_| num_rational::BigRational::new(rng.gen_range(-20..=20).into(), rng.gen_range(1..=6).into()))
                .collect();
            CycloNumber::new(modulus, coeffs)
        };
        t.insert_exact(0, 0, rand_num(rng));
        for j in 1..=depth {
            for a in t.units(j) {
                t.insert_exact(j, a, rand_num(rng));
            }
        }
        t
    }

    #[test]
    fn decomposition_matches_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (modulus, eps) in [(1, CycloNumber::one(1)), (4, CycloNumber::root_of_unity(4, 1)), (4, CycloNumber::from_int(4, -1))] {
            let table = random_table(&mut rng, 3, 4, modulus);
            let chars = enumerate_gamma_characters(3, 4);
            let dec = decompose_admissible(&table, &eps, &chars).unwrap();
            for d in dec {
                if let Some(x) = &d.plus {
                    assert_eq!(x, &pm_algebraic(Sign::Plus, &table, &d.theta, &eps).unwrap(), "plus {}", d.theta);
                }
                if let Some(x) = &d.minus {
                    assert_eq!(x, &pm_algebraic(Sign::Minus, &table, &d.theta, &eps).unwrap(), "minus {}", d.theta);
                }
            }
        }
    }

    #[test]
    fn wrong_parity_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let table = random_table(&mut rng, 3, 3, 1);
        let theta = GammaCharacter::new(3, 3, 1).unwrap();
        assert!(matches!(pm_algebraic(Sign::Plus, &table, &theta, &CycloNumber::one(1)), Err(Error::ParityMismatch(_))));
    }

    #[test]
    fn value_times_omega_recovers_twisted_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let table = random_table(&mut rng, 3, 3, 1);
        let eps = CycloNumber::one(1);
        for theta in enumerate_gamma_characters(3, 3).into_iter().skip(1) {
            let sign = if theta.c % 2 == 0 { Sign::Plus } else { Sign::Minus };
            let ring = PadicRing::tower(3, theta.level(), 10).unwrap();
            let v = pm_value(sign, &table, &theta, &eps, &ring).unwrap();
            let (_, w) = omega_pm(&theta, &ring).unwrap();
            let lhs = &v.value * &w;
            let rhs = twisted_sum(&table, &theta).unwrap().padic_embed(&ring).unwrap();
            assert!(lhs.eq_to_precision(&rhs, 5), "{theta}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn symbolic_quadratic_ring_laws() {
        let eps = CycloNumber::root_of_unity(4, 1);
        let alpha = SymbolicQuadratic::alpha(&eps, 3);
        let sq = alpha.mul(&alpha);
        assert!(sq.is_alpha_free());
        assert_eq!(sq.a, eps.scale_int(-3));
        let x = SymbolicQuadratic::new(CycloNumber::from_int(1, 2), CycloNumber::from_ratio(1, 1, 3), &eps, 3);
        let one = x.mul(&x.try_inv().unwrap());
        assert_eq!(one.a, CycloNumber::one(1));
        assert!(one.is_alpha_free());
        assert_eq!(x.conj().conj(), x);
    }
}
