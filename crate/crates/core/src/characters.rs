//! Finite-order characters of Gamma, their Dirichlet lifts and Gauss sums,
//! and characters of a finite abelian group A.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::arith::{euler_phi, gcd, ipow, lcm, mul_mod, pow_mod};
use crate::cyclo::{CycloField, CycloNumber};
use crate::error::{Error, Result};

/// Character of Gamma with conductor p^c (c = 0 or c >= 2), sending the fixed
/// generator to zeta_{p^{c-1}}^e.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GammaCharacter {
    pub p: i64,
    pub c: u32,
    pub e: i64,
}

impl fmt::Display for GammaCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.p, self.c, self.e)
    }
}

impl GammaCharacter {
    pub fn trivial(p: i64) -> GammaCharacter {
        GammaCharacter { p, c: 0, e: 0 }
    }

    pub fn new(p: i64, c: u32, e: i64) -> Result<GammaCharacter> {
        if c == 0 {
            return Ok(GammaCharacter::trivial(p));
        }
        if c == 1 {
            return Err(Error::Usage("Gamma-characters have conductor exponent 0 or >= 2".into()));
        }
        let ord = ipow(p, c - 1);
        let e = e.rem_euclid(ord);
        if e % p == 0 {
            return Err(Error::Usage(format!("exponent {e} does not give a primitive {ord}-th root")));
        }
        Ok(GammaCharacter { p, c, e })
    }

    pub fn is_trivial(&self) -> bool {
        self.c == 0
    }

    /// Order of the image of the generator: p^{c-1} (1 when trivial).
    pub fn order(&self) -> i64 {
        if self.c == 0 {
            1
        } else {
            ipow(self.p, self.c - 1)
        }
    }

    /// Tower level t with zeta of order p^t.
    pub fn level(&self) -> u32 {
        self.c.saturating_sub(1)
    }

    /// Conductor exponent parity (None for the trivial character).
    pub fn parity(&self) -> Option<u32> {
        (self.c >= 2).then_some(self.c % 2)
    }

    pub fn conj(&self) -> GammaCharacter {
        GammaCharacter { e: (-self.e).rem_euclid(self.order()), ..*self }
    }

    /// theta^a for a prime to p.
    pub fn galois(&self, a: i64) -> GammaCharacter {
        GammaCharacter { e: (self.e * a).rem_euclid(self.order()), ..*self }
    }

    /// The image zeta of the generator in Q(zeta_{p^{c-1}}).
    pub fn zeta(&self) -> CycloNumber {
        CycloNumber::root_of_unity(self.order(), self.e)
    }

    /// Same value, with exponent of zeta_{modulus}; `modulus` must be divisible by the order.
    pub fn zeta_exponent_in(&self, modulus: i64) -> i64 {
        assert_eq!(modulus % self.order(), 0);
        self.e * (modulus / self.order())
    }
}

/// All characters of conductor exponent 2..=c_max, plus the trivial one first.
pub fn enumerate_gamma_characters(p: i64, c_max: u32) -> Vec<GammaCharacter> {
    let mut out = vec![GammaCharacter::trivial(p)];
    for c in 2..=c_max {
        let ord = ipow(p, c - 1);
        for e in 1..ord {
            if e % p != 0 {
                out.push(GammaCharacter { p, c, e });
            }
        }
    }
    out
}

/// Discrete logarithm of principal units base 1+p modulo p^c.
#[derive(Clone, Debug)]
pub struct UnitLog {
    p: i64,
    c: u32,
    modulus: i64,
    table: Option<HashMap<i64, i64>>,
}

impl UnitLog {
    pub const TABLE_LIMIT: i64 = 59049; // 3^10

    pub fn new(p: i64, c: u32) -> UnitLog {
        let modulus = ipow(p, c);
        let table = (modulus <= Self::TABLE_LIMIT).then(|| {
            let mut t = HashMap::new();
            let mut x = 1i64;
            for k in 0..ipow(p, c.saturating_sub(1)) {
                t.insert(x, k);
                x = x * (1 + p) % modulus;
            }
            t
        });
        UnitLog { p, c, modulus, table }
    }

    /// Teichmueller representative omega(a) = a^{p^{c-1}} mod p^c.
    pub fn teichmuller(&self, a: i64) -> i64 {
        pow_mod(a.rem_euclid(self.modulus) as i128, ipow(self.p, self.c - 1) as u128, self.modulus as i128) as i64
    }

    /// log_{1+p} <a> mod p^{c-1}, where a = omega(a) <a>.
    pub fn log(&self, a: i64) -> Result<i64> {
        if gcd(a, self.p) != 1 {
            return Err(Error::NotCoprime(a, self.p));
        }
        let m = self.modulus as i128;
        let w = self.teichmuller(a) as i128;
        let winv = crate::arith::inv_mod(w, m).unwrap();
        let u = mul_mod(a.rem_euclid(self.modulus) as i128, winv, m) as i64;
        match &self.table {
            Some(t) => Ok(*t.get(&u).expect("principal unit in table")),
            None => Ok(self.log_digits(u)),
        }
    }

    /// p-adic digit extraction: (1+p)^{p^i} = 1 + p^{i+1} mod p^{i+2}.
    pub fn log_digits(&self, u: i64) -> i64 {
        let p = self.p as i128;
        let m = self.modulus as i128;
        let base_inv = crate::arith::inv_mod(1 + p, m).unwrap();
        let mut known = 0i128;
        let mut pi = 1i128;
        for i in 0..self.c.saturating_sub(1) {
            let rest = mul_mod(u as i128, pow_mod(base_inv, known as u128, m), m);
            let t = ((rest - 1) / p.pow(i + 1)).rem_euclid(p);
            known += t * pi;
            pi *= p;
        }
        known as i64
    }
}

/// Values of theta as a Dirichlet character mod p^c, stored as exponents of zeta_{p^{c-1}}.
#[derive(Clone, Debug)]
pub struct DirichletTable {
    pub theta: GammaCharacter,
    pub modulus: i64,
    /// exps[a] for a in 0..p^c, None at non-units.
    exps: Vec<Option<i64>>,
}

impl DirichletTable {
    pub fn exponent(&self, a: i64) -> Result<i64> {
        self.exps[a.rem_euclid(self.modulus) as usize].ok_or(Error::NotCoprime(a, self.theta.p))
    }

    pub fn value(&self, a: i64) -> Result<CycloNumber> {
        Ok(CycloNumber::root_of_unity(self.theta.order(), self.exponent(a)?))
    }

    /// Units a in ascending order with their exponents.
    pub fn entries(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.exps.iter().enumerate().filter_map(|(a, e)| e.map(|e| (a as i64, e)))
    }
}

/// theta(a) = zeta^{log_gamma <a>}.
pub fn dirichlet_lift(theta: &GammaCharacter) -> Result<DirichletTable> {
    if theta.c < 2 {
        return Err(Error::TrivialCharacter("the Dirichlet lift needs conductor exponent >= 2".into()));
    }
    let lg = UnitLog::new(theta.p, theta.c);
    let modulus = ipow(theta.p, theta.c);
    let ord = theta.order();
    let mut exps = vec![None; modulus as usize];
    for a in 1..modulus {
        if a % theta.p != 0 {
            exps[a as usize] = Some((theta.e * lg.log(a)?).rem_euclid(ord));
        }
    }
    Ok(DirichletTable { theta: *theta, modulus, exps })
}

/// Gauss sum, with a flag when the trivial-character convention tau = 1 was used.
#[derive(Clone, Debug)]
pub struct GaussSum {
    pub value: CycloNumber,
    pub conventional: bool,
}

/// tau(theta) = sum_{a mod p^c} theta(a) zeta_{p^c}^a in Q(zeta_{p^c}).
pub fn gauss_sum(theta: &GammaCharacter) -> Result<GaussSum> {
    if theta.is_trivial() {
        return Ok(GaussSum { value: CycloNumber::one(1), conventional: true });
    }
    let table = dirichlet_lift(theta)?;
    let m = table.modulus;
    let mut counts = vec![0i64; m as usize];
    for (a, e) in table.entries() {
        // theta(a) = zeta_{p^{c-1}}^e = zeta_{p^c}^{p e}
        counts[((theta.p * e + a) % m) as usize] += 1;
    }
    let field = CycloField::new(m);
    Ok(GaussSum { value: CycloNumber::from_counts(&field, &counts), conventional: false })
}

// ---------------------------------------------------------------------------
// Finite abelian group characters
// ---------------------------------------------------------------------------

/// Finite abelian group given by cyclic orders, with an involutive automorphism
/// (the c-action) as an integer matrix acting on columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianGroup {
    pub orders: Vec<i64>,
    pub c_action: Vec<Vec<i64>>,
}

impl AbelianGroup {
    pub fn new(orders: Vec<i64>, c_action: Vec<Vec<i64>>) -> Result<Arc<AbelianGroup>> {
        let n = orders.len();
        if orders.iter().any(|&o| o < 1) {
            return Err(Error::Config("cyclic orders must be positive".into()));
        }
        if c_action.len() != n || c_action.iter().any(|r| r.len() != n) {
            return Err(Error::Config("c-action matrix has the wrong shape".into()));
        }
        let g = AbelianGroup { orders, c_action };
        for i in 0..n {
            let mut e = vec![0; n];
            e[i] = 1;
            if g.act(&g.act(&e)) != g.reduce(&e) {
                return Err(Error::Config("c-action is not an involution".into()));
            }
        }
        Ok(Arc::new(g))
    }

    pub fn trivial() -> Arc<AbelianGroup> {
        Arc::new(AbelianGroup { orders: vec![], c_action: vec![] })
    }

    pub fn cyclic_with_inversion(n: i64) -> Arc<AbelianGroup> {
        Arc::new(AbelianGroup { orders: vec![n], c_action: vec![vec![-1]] })
    }

    pub fn size(&self) -> i64 {
        self.orders.iter().product()
    }

    pub fn exponent(&self) -> i64 {
        self.orders.iter().fold(1, |a, &b| lcm(a, b))
    }

    pub fn reduce(&self, x: &[i64]) -> Vec<i64> {
        x.iter().zip(&self.orders).map(|(a, n)| a.rem_euclid(*n)).collect()
    }

    pub fn act(&self, x: &[i64]) -> Vec<i64> {
        let n = self.orders.len();
        let y: Vec<i64> = (0..n).map(|i| (0..n).map(|j| self.c_action[i][j] * x[j]).sum()).collect();
        self.reduce(&y)
    }

    pub fn elements(&self) -> Vec<Vec<i64>> {
        let mut out = vec![vec![]];
        for &o in &self.orders {
            out = out.into_iter().flat_map(|v: Vec<i64>| (0..o).map(move |k| {
                let mut w = v.clone();
                w.push(k);
                w
            })).collect();
        }
        out
    }
}

/// Character of A: generator i maps to zeta_{n_i}^{exps_i}.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FiniteCharacter {
    pub orders: Vec<i64>,
    pub exps: Vec<i64>,
}

impl fmt::Display for FiniteCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.exps)
    }
}

impl FiniteCharacter {
    pub fn new(group: &AbelianGroup, exps: Vec<i64>) -> Result<FiniteCharacter> {
        if exps.len() != group.orders.len() {
            return Err(Error::Config("character exponent count does not match A".into()));
        }
        Ok(FiniteCharacter { orders: group.orders.clone(), exps: group.reduce(&exps) })
    }

    pub fn trivial(group: &AbelianGroup) -> FiniteCharacter {
        FiniteCharacter { orders: group.orders.clone(), exps: vec![0; group.orders.len()] }
    }

    pub fn is_trivial(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn exponent_modulus(&self) -> i64 {
        self.orders.iter().fold(1, |a, &b| lcm(a, b))
    }

    /// eta(x) as an exponent of zeta_E, E the exponent of A.
    pub fn value_exponent(&self, x: &[i64]) -> i64 {
        let e = self.exponent_modulus();
        self.exps
            .iter()
            .zip(&self.orders)
            .zip(x)
            .map(|((k, n), xi)| k * (e / n) * xi)
            .sum::<i64>()
            .rem_euclid(e)
    }

    pub fn value(&self, x: &[i64]) -> CycloNumber {
        CycloNumber::root_of_unity(self.exponent_modulus(), self.value_exponent(x))
    }

    pub fn conj(&self) -> FiniteCharacter {
        FiniteCharacter {
            orders: self.orders.clone(),
            exps: self.exps.iter().zip(&self.orders).map(|(e, n)| (-e).rem_euclid(*n)).collect(),
        }
    }

    pub fn mul(&self, o: &FiniteCharacter) -> FiniteCharacter {
        FiniteCharacter {
            orders: self.orders.clone(),
            exps: self.exps.iter().zip(&o.exps).zip(&self.orders).map(|((a, b), n)| (a + b).rem_euclid(*n)).collect(),
        }
    }

    /// eta o c, i.e. g -> eta(c g c^{-1}).
    pub fn compose_c(&self, group: &AbelianGroup) -> FiniteCharacter {
        let e = self.exponent_modulus();
        let n = self.orders.len();
        let exps = (0..n)
            .map(|j| {
                let mut unit = vec![0; n];
                unit[j] = 1;
                let v = self.value_exponent(&group.act(&unit));
                (v / (e / self.orders[j])).rem_euclid(self.orders[j])
            })
            .collect();
        FiniteCharacter { orders: self.orders.clone(), exps }
    }

    /// Order of the character.
    pub fn order(&self) -> i64 {
        self.exps
            .iter()
            .zip(&self.orders)
            .map(|(&k, &n)| n / gcd(k, n))
            .fold(1, lcm)
    }
}

/// Complete, duplicate-free dual group.
pub fn enumerate_dual(group: &AbelianGroup) -> Vec<FiniteCharacter> {
    group
        .elements()
        .into_iter()
        .map(|exps| FiniteCharacter { orders: group.orders.clone(), exps })
        .collect()
}

/// Number of characters of Gamma with conductor exponent at most c.
pub fn count_up_to(p: i64, c: u32) -> i64 {
    1 + (2..=c).map(|k| euler_phi(ipow(p, k - 1))).sum::<i64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_gamma_characters(3, 2).len(), 3);
        assert_eq!(enumerate_gamma_characters(3, 3).len(), 9);
        assert_eq!(enumerate_gamma_characters(5, 2).len(), 5);
        assert_eq!(count_up_to(3, 4), 27);
    }

    #[test]
    fn lift_examples() {
        let th = GammaCharacter::new(3, 2, 1).unwrap();
        let t = dirichlet_lift(&th).unwrap();
        assert_eq!(t.value(4).unwrap(), CycloNumber::root_of_unity(3, 1));
        assert_eq!(t.exponent(-1).unwrap(), 0);
        assert!(t.exponent(3).is_err());
    }

    #[test]
    fn table_and_digit_logs_agree() {
        let lg = UnitLog::new(3, 6);
        for a in 1..729 {
            if a % 3 != 0 {
                let w = lg.teichmuller(a) as i128;
                let u = mul_mod(a as i128, crate::arith::inv_mod(w, 729).unwrap(), 729) as i64;
                assert_eq!(lg.log(a).unwrap(), lg.log_digits(u));
            }
        }
    }

    #[test]
    fn gauss_sum_norm_small() {
        let th = GammaCharacter::new(3, 2, 1).unwrap();
        let a = gauss_sum(&th).unwrap().value;
        let b = gauss_sum(&th.conj()).unwrap().value;
        assert_eq!(&a * &b, CycloNumber::from_int(9, 9));
        assert!(gauss_sum(&GammaCharacter::trivial(3)).unwrap().conventional);
    }

    #[test]
    fn dual_group_and_c_action() {
        let g = AbelianGroup::cyclic_with_inversion(4);
        let dual = enumerate_dual(&g);
        assert_eq!(dual.len(), 4);
        let fixed: Vec<i64> = dual.iter().filter(|e| e.compose_c(&g) == **e).map(|e| e.exps[0]).collect();
        assert_eq!(fixed, vec![0, 2]);
        let eta = &dual[1];
        assert_eq!(eta.compose_c(&g), eta.conj());
        assert_eq!(eta.order(), 4);
    }
}
