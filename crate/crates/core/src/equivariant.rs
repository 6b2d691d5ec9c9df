//! Equivariant plus/minus L-functions over an abelian extension F/K: one
//! plus/minus table per character of A = Gal(F/K), glued with idempotents,
//! evaluated at characters of G and at Artin representations of the full group.

use std::collections::BTreeMap;
use std::sync::Arc;
use num_rational::Ratio;

use crate::arith::lcm;
use crate::characters::{enumerate_dual, gauss_sum, AbelianGroup, FiniteCharacter, GammaCharacter};
use crate::cyclo::{canonical_sqrt_exponent, CycloNumber};
use crate::error::{Error, Result};
use crate::iwasawa::{characters_for, values_to_series, Growth, IwasawaSeries, MuLambda, Sign};
use crate::lvalues::LambdaTable;
use crate::padic::{PadicCyclo, PadicRing, Unramified};
use crate::pollack::{log_pm_at_character, omega_representation, pm_algebraic};

/// Real period ratio radicand^(1/degree) allowed between the global period
/// and the period of a twisted form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PeriodRadical {
    pub radicand: i64,
    pub degree: i64,
}

impl PeriodRadical {
    pub const NONE: PeriodRadical = PeriodRadical { radicand: 1, degree: 1 };

    pub fn value(&self, k: i64) -> f64 {
        (self.radicand as f64).powf(k as f64 / self.degree as f64)
    }
}

/// Plus/minus data of the form attached to phi * eta-bar.
#[derive(Clone, Debug)]
pub struct EtaComponent {
    pub eta: FiniteCharacter,
    /// Exact table normalized by Omega_+ * radicand^(period_ratio/degree).
    pub table: LambdaTable,
    pub period_ratio: i64,
    pub eps_p: CycloNumber,
}

#[derive(Clone, Debug)]
pub struct EquivariantL {
    pub sign: Sign,
    pub group: Arc<AbelianGroup>,
    /// Artin symbol of (p) in A.
    pub frob_p: Vec<i64>,
    pub radical: PeriodRadical,
    pub components: Vec<EtaComponent>,
    /// eta-bar(p)^delta, delta = 0 for + and 1/2 for -.
    pub weights: Vec<CycloNumber>,
    /// Cyclotomic modulus of F_A.
    pub modulus: i64,
}

/// Identifier of the square-root convention for eta-bar(p)^(1/2).
pub const SQRT_CONVENTION: &str = "zeta_k^j -> zeta_2k^(j mod k)";

fn sqrt_of_character_value(chi: &FiniteCharacter, x: &[i64]) -> CycloNumber {
    let (m, e) = canonical_sqrt_exponent(chi.exponent_modulus(), chi.value_exponent(x));
    CycloNumber::root_of_unity(m, e)
}

/// Builds L^sign_{G,phi} from one component per eta in the dual of A.
pub fn assemble(
    sign: Sign,
    group: &Arc<AbelianGroup>,
    frob_p: &[i64],
    radical: PeriodRadical,
    components: Vec<EtaComponent>,
) -> Result<EquivariantL> {
    let dual = enumerate_dual(group);
    if components.len() != dual.len() {
        return Err(Error::Config(format!("{} components for a group of order {}", components.len(), dual.len())));
    }
    let mut ordered = Vec::with_capacity(dual.len());
    for eta in &dual {
        let c = components
            .iter()
            .find(|c| &c.eta == eta)
            .ok_or_else(|| Error::Config(format!("no table for eta = {eta}")))?;
        ordered.push(c.clone());
    }
    let depth = ordered[0].table.n_max;
    if ordered.iter().any(|c| c.table.n_max != depth || c.table.p != ordered[0].table.p) {
        return Err(Error::Config("component tables differ in p or depth".into()));
    }
    let frob = group.reduce(frob_p);
    let mut modulus = 1;
    let weights: Vec<CycloNumber> = ordered
        .iter()
        .map(|c| {
            let bar = c.eta.conj();
            match sign {
                Sign::Plus => CycloNumber::one(1),
                Sign::Minus => sqrt_of_character_value(&bar, &frob),
            }
        })
        .collect();
    for (c, w) in ordered.iter().zip(&weights) {
        modulus = lcm(modulus, lcm(w.modulus(), lcm(c.table.modulus, c.eta.exponent_modulus())));
    }
    Ok(EquivariantL { sign, group: group.clone(), frob_p: frob, radical, components: ordered, weights, modulus })
}

impl EquivariantL {
    pub fn p(&self) -> i64 {
        self.components[0].table.p
    }

    pub fn depth(&self) -> u32 {
        self.components[0].table.n_max
    }

    fn index(&self, eta: &FiniteCharacter) -> Result<usize> {
        self.components
            .iter()
            .position(|c| &c.eta == eta)
            .ok_or_else(|| Error::Config(format!("character {eta} is not in the dual of A")))
    }

    pub fn component(&self, eta: &FiniteCharacter) -> Result<&EtaComponent> {
        Ok(&self.components[self.index(eta)?])
    }

    pub fn weight(&self, eta: &FiniteCharacter) -> Result<&CycloNumber> {
        Ok(&self.weights[self.index(eta)?])
    }

    /// Value of chi_0 at the Frobenius of p.
    pub fn chi0_at_p(&self, chi0: &FiniteCharacter) -> CycloNumber {
        chi0.value(&self.frob_p)
    }
}

/// A value scalar / (Omega_+^plus_exp Omega_-^minus_exp), further divided by
/// radicand^(radical_exp/degree) when the period ratio is not algebraic over F_eta.
#[derive(Clone, Debug)]
pub struct ValueWithPeriod {
    /// Exact product of weights and plus/minus algebraic parts (value times log).
    pub algebraic: CycloNumber,
    pub value: PadicCyclo,
    pub plus_exp: u32,
    pub minus_exp: u32,
    pub radical_exp: i64,
    pub flags: Vec<String>,
}

/// Ring of level t over Z_p containing the prime-to-p roots of unity of `modulus`.
pub fn ring_for(p: i64, level: u32, modulus: i64, digits: u32) -> Result<Arc<PadicRing>> {
    let mut m = modulus.max(1);
    while m % p == 0 {
        m /= p;
    }
    PadicRing::new(p, level, Unramified::new(p, m, digits)?, digits)
}

/// `ring` at level >= t, enlarged to hold the prime-to-p roots of unity of `modulus`.
pub fn widen(ring: &Arc<PadicRing>, level: u32, modulus: i64) -> Result<Arc<PadicRing>> {
    let mut m = modulus.max(1);
    while m % ring.p == 0 {
        m /= ring.p;
    }
    let level = ring.level.max(level);
    if ring.unram.m % m == 0 {
        ring.at_level(level)
    } else {
        ring_for(ring.p, level, crate::arith::lcm(m, ring.unram.m), ring.digits)
    }
}

/// L^nu_{G,phi}(chi_0 chi'): weight(chi_0) times the chi_0-component value at chi'.
pub fn evaluate_at_g_character(
    l: &EquivariantL,
    chi0: &FiniteCharacter,
    chi_prime: &GammaCharacter,
    ring: &Arc<PadicRing>,
) -> Result<ValueWithPeriod> {
    let comp = l.component(chi0)?;
    let weight = l.weight(chi0)?;
    let mut flags = Vec::new();
    if chi_prime.is_trivial() {
        flags.push("trivial Gamma-component: value from the distribution relations, outside the interpolation range".into());
    } else if chi_prime.c % 2 != l.sign.conductor_parity() {
        return Err(Error::ParityMismatch(format!("conductor exponent {} does not match sign {}", chi_prime.c, l.sign)));
    }
    if chi_prime.c > comp.table.n_max {
        return Err(Error::MissingLambda(format!("table depth {} below conductor exponent {}", comp.table.n_max, chi_prime.c)));
    }
    let ring = widen(ring, chi_prime.level(), l.modulus)?;
    let algebraic = weight * &pm_algebraic(l.sign, &comp.table, chi_prime, &comp.eps_p)?;
    let log = log_pm_at_character(l.sign, 1, chi_prime, 0, &ring)?;
    let value = algebraic.padic_embed(&ring)?.try_div(&log)?;
    Ok(ValueWithPeriod { algebraic, value, plus_exp: 1, minus_exp: 0, radical_exp: comp.period_ratio, flags })
}

/// Irreducible Artin representation of the full group through which it is evaluated.
#[derive(Clone, Debug, PartialEq)]
pub enum ArtinRepOfG {
    OneDim { chi0: FiniteCharacter, chi_prime: GammaCharacter, rho0_p: CycloNumber },
    Induced { chi0: FiniteCharacter, chi_prime: GammaCharacter },
}

impl ArtinRepOfG {
    /// One-dimensional: chi_0 must be c-invariant and rho0_p^2 = chi_0(p).
    pub fn one_dim(
        group: &AbelianGroup,
        frob_p: &[i64],
        chi0: FiniteCharacter,
        chi_prime: GammaCharacter,
        rho0_p: CycloNumber,
    ) -> Result<ArtinRepOfG> {
        if chi0.compose_c(group) != chi0 {
            return Err(Error::Config(format!("{chi0} is not fixed by c; use the induced representation")));
        }
        if &rho0_p * &rho0_p != chi0.value(frob_p) {
            return Err(Error::Config(format!("rho_0(p)^2 differs from {chi0}(p)")));
        }
        Ok(ArtinRepOfG::OneDim { chi0, chi_prime, rho0_p })
    }

    pub fn induced(group: &AbelianGroup, chi0: FiniteCharacter, chi_prime: GammaCharacter) -> Result<ArtinRepOfG> {
        if chi0.compose_c(group) == chi0 {
            return Err(Error::Config(format!("{chi0} is fixed by c; the induced representation is reducible")));
        }
        Ok(ArtinRepOfG::Induced { chi0, chi_prime })
    }

    pub fn chi_prime(&self) -> &GammaCharacter {
        match self {
            ArtinRepOfG::OneDim { chi_prime, .. } | ArtinRepOfG::Induced { chi_prime, .. } => chi_prime,
        }
    }

    pub fn chi0(&self) -> &FiniteCharacter {
        match self {
            ArtinRepOfG::OneDim { chi0, .. } | ArtinRepOfG::Induced { chi0, .. } => chi0,
        }
    }

    pub fn dim(&self) -> u32 {
        match self {
            ArtinRepOfG::OneDim { .. } => 1,
            ArtinRepOfG::Induced { .. } => 2,
        }
    }
}

/// Restriction to G as a list of characters (chi_0, chi').
pub fn restrict(rho: &ArtinRepOfG, group: &AbelianGroup) -> Vec<(FiniteCharacter, GammaCharacter)> {
    match rho {
        ArtinRepOfG::OneDim { chi0, chi_prime, .. } => vec![(chi0.clone(), *chi_prime)],
        ArtinRepOfG::Induced { chi0, chi_prime } => vec![(chi0.clone(), *chi_prime), (chi0.compose_c(group), *chi_prime)],
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GammaConductor {
    Even(u32),
    Odd(u32),
    Unramified,
}

pub fn classify_gamma_conductor(rho: &ArtinRepOfG) -> GammaConductor {
    let c = rho.chi_prime();
    if c.is_trivial() {
        GammaConductor::Unramified
    } else if c.c % 2 == 0 {
        GammaConductor::Even(c.c)
    } else {
        GammaConductor::Odd(c.c)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonFactor {
    pub value: CycloNumber,
    pub flag: Option<String>,
}

/// chi(p)^(n/2) with the canonical square root for odd n.
fn half_power(chi: &FiniteCharacter, x: &[i64], n: u32) -> CycloNumber {
    let base = chi.value(x);
    if n % 2 == 0 {
        base.pow((n / 2) as u64)
    } else {
        &base.pow((n / 2) as u64) * &sqrt_of_character_value(chi, x)
    }
}

/// Local epsilon factor at p of the representation.
pub fn epsilon_factor(rho: &ArtinRepOfG, group: &AbelianGroup, frob_p: &[i64]) -> Result<EpsilonFactor> {
    let theta = rho.chi_prime();
    if theta.is_trivial() {
        return Ok(EpsilonFactor {
            value: CycloNumber::one(1),
            flag: Some("unramified Gamma-component: the closed form assumes a ramified twist".into()),
        });
    }
    let n = theta.c;
    let tau = gauss_sum(theta)?.value;
    let value = match rho {
        ArtinRepOfG::OneDim { rho0_p, .. } => &rho0_p.pow(n as u64) * &tau,
        ArtinRepOfG::Induced { chi0, .. } => {
            let conj = chi0.compose_c(group);
            // odd n: the square root of chi_0 chi_0^c(p) is the product of the
            // component roots, the choice carried by the minus weights
            let half = if n % 2 == 0 {
                chi0.mul(&conj).value(frob_p).pow((n / 2) as u64)
            } else {
                &half_power(chi0, frob_p, n) * &half_power(&conj, frob_p, n)
            };
            &half * &(&tau * &tau)
        }
    };
    Ok(EpsilonFactor { value, flag: None })
}

/// Product over the restriction of the one-dimensional factors chi_0(p)^(n/2) tau(chi').
pub fn epsilon_restricted_product(rho: &ArtinRepOfG, group: &AbelianGroup, frob_p: &[i64]) -> Result<CycloNumber> {
    let theta = rho.chi_prime();
    let tau = gauss_sum(theta)?.value;
    let mut acc = CycloNumber::one(1);
    for (chi0, _) in restrict(rho, group) {
        acc = &acc * &(&half_power(&chi0, frob_p, theta.c) * &tau);
    }
    Ok(acc)
}

/// L^nu_{full,E}(rho) as the product over the restriction, with period bookkeeping.
pub fn evaluate_l_pm_g_e(
    plus: &EquivariantL,
    minus: &EquivariantL,
    rho: &ArtinRepOfG,
    ring: &Arc<PadicRing>,
) -> Result<ValueWithPeriod> {
    let l = match classify_gamma_conductor(rho) {
        GammaConductor::Even(_) => plus,
        GammaConductor::Odd(_) => minus,
        GammaConductor::Unramified => {
            return Err(Error::NotCovered("trivial Gamma-component is not covered by interpolation".into()))
        }
    };
    let mut out: Option<ValueWithPeriod> = None;
    for (chi0, chi_prime) in restrict(rho, &l.group) {
        let v = evaluate_at_g_character(l, &chi0, &chi_prime, ring)?;
        out = Some(match out {
            None => v,
            Some(acc) => ValueWithPeriod {
                algebraic: &acc.algebraic * &v.algebraic,
                value: &acc.value * &v.value,
                plus_exp: acc.plus_exp + v.plus_exp,
                minus_exp: 0,
                radical_exp: acc.radical_exp + v.radical_exp,
                flags: acc.flags.into_iter().chain(v.flags).collect(),
            },
        });
    }
    let mut v = out.expect("restriction is nonempty");
    if rho.dim() == 2 {
        // L_Omega = Omega_+/Omega_- turns Omega_+^2 into Omega_+ Omega_-
        v.plus_exp = 1;
        v.minus_exp = 1;
    }
    Ok(v)
}

/// Right-hand side e_p(rho) / omega^nu(rho) * prod of per-character algebraic
/// L-parts (same period normalization as the tables). Returns the exact number
/// multiplying log^nu(chi')^(-d), comparable with `ValueWithPeriod::algebraic`,
/// and the p-adic value.
pub fn interpolation_rhs(
    rho: &ArtinRepOfG,
    group: &AbelianGroup,
    frob_p: &[i64],
    l_parts: &[CycloNumber],
    ring: &Arc<PadicRing>,
) -> Result<(CycloNumber, PadicCyclo)> {
    let theta = rho.chi_prime();
    if theta.is_trivial() {
        return Err(Error::NotCovered("trivial Gamma-component is not covered by interpolation".into()));
    }
    let mut exact = epsilon_factor(rho, group, frob_p)?.value;
    for part in l_parts {
        exact = &exact * part;
    }
    // omega = (-p)^k log with k = c/2 (even c) or (c+1)/2 (odd c)
    let k = theta.c.div_ceil(2) as u64;
    let scale = CycloNumber::from_int(1, -theta.p).pow(k * rho.dim() as u64);
    let mut algebraic = exact.try_div(&scale)?;
    // the product lies in the level-(c-1) field even though tau needs level c
    let mut m = algebraic.modulus();
    while m % theta.p == 0 {
        m /= theta.p;
    }
    let target = m * crate::arith::ipow(theta.p, theta.level());
    if let Some(d) = algebraic.descend(target) {
        algebraic = d;
    }
    let exact = &algebraic * &scale;
    let ring = widen(ring, theta.level(), algebraic.modulus())?;
    let (_, omega) = omega_representation(theta, rho.dim(), &ring)?;
    let value = exact.padic_embed(&ring)?.try_div(&omega)?;
    Ok((algebraic, value))
}

/// Valuation of every component value at matching-parity characters of
/// conductor up to p^c_max; a negative valuation is an identity failure.
pub fn integrality_check(l: &EquivariantL, c_max: u32, ring: &Arc<PadicRing>) -> Result<Vec<(FiniteCharacter, GammaCharacter, Ratio<i64>)>> {
    let mut out = Vec::new();
    let thetas: Vec<GammaCharacter> = crate::characters::enumerate_gamma_characters(l.p(), c_max)
        .into_iter()
        .filter(|t| !t.is_trivial() && t.c % 2 == l.sign.conductor_parity())
        .collect();
    for comp in &l.components {
        for theta in &thetas {
            let v = evaluate_at_g_character(l, &comp.eta, theta, ring)?;
            let val = v.value.valuation().unwrap_or_else(|| Ratio::from_integer(v.value.abs_precision()));
            if val < Ratio::from_integer(0) {
                return Err(Error::Identity(format!("value of {} at {theta} has valuation {val}", comp.eta)));
            }
            out.push((comp.eta.clone(), *theta, val));
        }
    }
    Ok(out)
}

/// mu and lambda of one component, from its values at the characters fixing
/// the residue modulo (p^N, omega~^sign_m).
#[derive(Clone, Debug)]
pub struct ComponentMu {
    pub eta: FiniteCharacter,
    pub mu_lambda: Option<MuLambda>,
    pub note: Option<String>,
}

#[derive(Clone, Debug)]
pub struct MuReport {
    pub sign: Sign,
    pub precision: u32,
    pub m: u32,
    pub components: Vec<ComponentMu>,
    /// Some(true) when every certified mu agrees, None when some are uncertified.
    pub independent: Option<bool>,
}

pub fn mu_report(l: &EquivariantL, m: u32, precision: u32) -> Result<MuReport> {
    let p = l.p();
    // CRT against the parity modulus loses precision; work with slack and cut back
    let working = precision + 2 * m + 2;
    let base = ring_for(p, 0, l.modulus, working + 8)?;
    let chars = characters_for(p, m, l.sign);
    let mut comps = Vec::new();
    for comp in &l.components {
        let mut values = BTreeMap::new();
        for theta in &chars {
            let ring = base.at_level(theta.level())?;
            let alg = pm_algebraic(l.sign, &comp.table, theta, &comp.eps_p)?;
            // the s = 0 half-log alone: dividing by the s = 1 factor as well leaves an unbounded series
            let log = log_pm_at_character(l.sign, 0, theta, 0, &ring)?;
            let v = alg.padic_embed(&ring)?.try_div(&log)?.truncate(working as i64);
            values.insert(*theta, v);
        }
        let raw = values_to_series(&base, &values, l.sign, m)?;
        let coeffs: Vec<PadicCyclo> = raw.coeffs().iter().map(|c| c.truncate(precision as i64)).collect();
        let growth = if raw.coeffs().iter().all(|c| c.valuation_bound() >= Ratio::from_integer(0)) {
            Growth::Bounded
        } else {
            Growth::Unknown
        };
        let series = IwasawaSeries::new(&base, coeffs, raw.truncation(), precision as i64, growth);
        let (ml, note) = match series.mu_lambda() {
            Ok(ml) => (Some(ml), None),
            Err(e) => (None, Some(e.to_string())),
        };
        comps.push(ComponentMu { eta: comp.eta.clone(), mu_lambda: ml, note });
    }
    let certified: Vec<&MuLambda> = comps.iter().filter_map(|c| c.mu_lambda.as_ref()).filter(|m| m.certified).collect();
    let independent = if certified.len() == comps.len() {
        Some(certified.iter().all(|x| x.mu == certified[0].mu))
    } else {
        None
    };
    Ok(MuReport { sign: l.sign, precision, m, components: comps, independent })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pollack::pm_value;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_table(p: i64, depth: u32, seed: u64) -> LambdaTable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = LambdaTable::new_exact(p, depth, "random", 4);
        for j in 0..=depth {
            let units = if j == 0 { vec![0] } else { t.units(j) };
            for a in units {
                let v = CycloNumber::from_ratio(4, rng.gen_range(-20..20), rng.gen_range(1..9));
                let w = &CycloNumber::root_of_unity(4, 1) * &CycloNumber::from_ratio(4, rng.gen_range(-5..5), 3);
                t.insert_exact(j, a, &v + &w);
            }
        }
        t
    }

    fn z4_setup(frob: i64, sign: Sign, seed: u64) -> EquivariantL {
        let group = AbelianGroup::cyclic_with_inversion(4);
        let comps = enumerate_dual(&group)
            .into_iter()
            .enumerate()
            .map(|(i, eta)| EtaComponent {
                eta,
                table: random_table(3, 3, seed + i as u64),
                period_ratio: 0,
                eps_p: CycloNumber::one(1),
            })
            .collect();
        assemble(sign, &group, &[frob], PeriodRadical::NONE, comps).unwrap()
    }

    fn ring() -> Arc<PadicRing> {
        ring_for(3, 0, 8, 12).unwrap()
    }

    #[test]
    fn trivial_group_is_the_pollack_value() {
        let group = AbelianGroup::trivial();
        let table = random_table(3, 3, 7);
        let eps = CycloNumber::one(1);
        let comp = EtaComponent { eta: FiniteCharacter::trivial(&group), table: table.clone(), period_ratio: 0, eps_p: eps.clone() };
        let l = assemble(Sign::Plus, &group, &[], PeriodRadical::NONE, vec![comp]).unwrap();
        assert_eq!(l.weights, vec![CycloNumber::one(1)]);
        let theta = GammaCharacter::new(3, 2, 1).unwrap();
        let r = ring().at_level(1).unwrap();
        let v = evaluate_at_g_character(&l, &FiniteCharacter::trivial(&group), &theta, &r).unwrap();
        let direct = pm_value(Sign::Plus, &table, &theta, &eps, &r).unwrap();
        assert_eq!(v.algebraic, direct.algebraic);
        assert_eq!((v.plus_exp, v.minus_exp), (1, 0));
    }

    #[test]
    fn split_frobenius_gives_unit_weights() {
        let l = z4_setup(0, Sign::Minus, 1);
        assert!(l.weights.iter().all(|w| *w == CycloNumber::one(1)));
    }

    #[test]
    fn minus_weights_are_square_roots() {
        let l = z4_setup(1, Sign::Minus, 2);
        for (c, w) in l.components.iter().zip(&l.weights) {
            assert_eq!(&(w * w), &c.eta.conj().value(&l.frob_p));
            assert_eq!(w.pow(8), CycloNumber::one(1));
        }
        let eta = FiniteCharacter::new(&l.group, vec![3]).unwrap();
        assert_eq!(eta.conj().value(&l.frob_p), CycloNumber::root_of_unity(4, 1));
        let plus = z4_setup(1, Sign::Plus, 2);
        assert!(plus.weights.iter().all(|w| *w == CycloNumber::one(1)));
    }

    #[test]
    fn assemble_rejects_missing_components() {
        let group = AbelianGroup::cyclic_with_inversion(4);
        let comp = EtaComponent {
            eta: FiniteCharacter::trivial(&group),
            table: random_table(3, 2, 0),
            period_ratio: 0,
            eps_p: CycloNumber::one(1),
        };
        assert!(matches!(assemble(Sign::Plus, &group, &[0], PeriodRadical::NONE, vec![comp]), Err(Error::Config(_))));
    }

    #[test]
    fn value_depends_only_on_its_component() {
        let mut l = z4_setup(1, Sign::Minus, 3);
        let chi0 = FiniteCharacter::new(&l.group, vec![1]).unwrap();
        let theta = GammaCharacter::new(3, 3, 2).unwrap();
        let before = evaluate_at_g_character(&l, &chi0, &theta, &ring()).unwrap();
        for c in l.components.iter_mut().filter(|c| c.eta != chi0) {
            c.table = random_table(3, 3, 99);
        }
        let after = evaluate_at_g_character(&l, &chi0, &theta, &ring()).unwrap();
        assert_eq!(before.algebraic, after.algebraic);
        assert_eq!(before.value, after.value);
    }

    #[test]
    fn parity_and_coverage_errors() {
        let l = z4_setup(1, Sign::Plus, 4);
        let chi0 = FiniteCharacter::trivial(&l.group);
        let odd = GammaCharacter::new(3, 3, 1).unwrap();
        assert!(matches!(evaluate_at_g_character(&l, &chi0, &odd, &ring()), Err(Error::ParityMismatch(_))));
        let deep = GammaCharacter::new(3, 4, 1).unwrap();
        assert!(matches!(evaluate_at_g_character(&l, &chi0, &deep, &ring()), Err(Error::MissingLambda(_))));
        let triv = evaluate_at_g_character(&l, &chi0, &GammaCharacter::trivial(3), &ring()).unwrap();
        assert_eq!(triv.flags.len(), 1);
        let rho = ArtinRepOfG::one_dim(&l.group, &l.frob_p, chi0, GammaCharacter::trivial(3), CycloNumber::one(1)).unwrap();
        assert!(matches!(evaluate_l_pm_g_e(&l, &l, &rho, &ring()), Err(Error::NotCovered(_))));
    }

    #[test]
    fn representation_validation() {
        let group = AbelianGroup::cyclic_with_inversion(4);
        let frob = [1];
        let theta = GammaCharacter::new(3, 2, 1).unwrap();
        let eta1 = FiniteCharacter::new(&group, vec![1]).unwrap();
        let eta2 = FiniteCharacter::new(&group, vec![2]).unwrap();
        assert!(ArtinRepOfG::one_dim(&group, &frob, eta1.clone(), theta, CycloNumber::one(1)).is_err());
        assert!(ArtinRepOfG::induced(&group, eta2.clone(), theta).is_err());
        // eta2(p) = -1 needs rho_0(p) = +-i
        assert!(ArtinRepOfG::one_dim(&group, &frob, eta2.clone(), theta, CycloNumber::one(1)).is_err());
        let r = ArtinRepOfG::one_dim(&group, &frob, eta2, theta, CycloNumber::root_of_unity(4, 1)).unwrap();
        assert_eq!(restrict(&r, &group).len(), 1);
        let ind = ArtinRepOfG::induced(&group, eta1, theta).unwrap();
        let res = restrict(&ind, &group);
        assert_eq!(res.len(), 2);
        let conj: Vec<_> = res.iter().map(|(c, t)| (c.compose_c(&group), *t)).collect();
        assert!(conj.iter().all(|x| res.contains(x)));
        assert!(res.iter().all(|(_, t)| t == ind.chi_prime()));
    }

    #[test]
    fn conductor_classes() {
        let group = AbelianGroup::cyclic_with_inversion(4);
        let chi0 = FiniteCharacter::trivial(&group);
        let mk = |t| ArtinRepOfG::one_dim(&group, &[1], chi0.clone(), t, CycloNumber::one(1)).unwrap();
        assert_eq!(classify_gamma_conductor(&mk(GammaCharacter::new(3, 2, 1).unwrap())), GammaConductor::Even(2));
        assert_eq!(classify_gamma_conductor(&mk(GammaCharacter::new(3, 3, 1).unwrap())), GammaConductor::Odd(3));
        assert_eq!(classify_gamma_conductor(&mk(GammaCharacter::trivial(3))), GammaConductor::Unramified);
    }

    #[test]
    fn epsilon_closed_form_matches_restricted_product() {
        let group = AbelianGroup::cyclic_with_inversion(4);
        for p in [3, 5] {
            for frob in 0..4 {
                for c in 2..=3 {
                    for theta in crate::characters::enumerate_gamma_characters(p, c).into_iter().filter(|t| t.c == c) {
                        for e in [1, 3] {
                            let chi0 = FiniteCharacter::new(&group, vec![e]).unwrap();
                            let rho = ArtinRepOfG::induced(&group, chi0, theta).unwrap();
                            let closed = epsilon_factor(&rho, &group, &[frob]).unwrap();
                            assert!(closed.flag.is_none());
                            assert_eq!(closed.value, epsilon_restricted_product(&rho, &group, &[frob]).unwrap());
                            let pn = (p as f64).powi(2 * c as i32);
                            for z in closed.value.embeddings() {
                                assert!(((z * z.conj()).re.to_f64() - pn).abs() < 1e-9 * pn);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn product_root_differs_from_root_of_product() {
        let group = AbelianGroup::cyclic_with_inversion(4);
        let eta = FiniteCharacter::new(&group, vec![1]).unwrap();
        let both = eta.mul(&eta.compose_c(&group));
        let split = &half_power(&eta, &[1], 1) * &half_power(&eta.compose_c(&group), &[1], 1);
        assert_eq!(split, -&half_power(&both, &[1], 1));
    }

    #[test]
    fn epsilon_one_dim_trivial_is_gauss_sum() {
        let group = AbelianGroup::cyclic_with_inversion(4);
        let theta = GammaCharacter::new(3, 2, 2).unwrap();
        let rho = ArtinRepOfG::one_dim(&group, &[1], FiniteCharacter::trivial(&group), theta, CycloNumber::one(1)).unwrap();
        assert_eq!(epsilon_factor(&rho, &group, &[1]).unwrap().value, gauss_sum(&theta).unwrap().value);
        let unram = ArtinRepOfG::one_dim(&group, &[1], FiniteCharacter::trivial(&group), GammaCharacter::trivial(3), CycloNumber::one(1)).unwrap();
        assert!(epsilon_factor(&unram, &group, &[1]).unwrap().flag.is_some());
    }

    #[test]
    fn induced_value_is_the_restricted_product() {
        let plus = z4_setup(1, Sign::Plus, 5);
        let minus = z4_setup(1, Sign::Minus, 6);
        let chi0 = FiniteCharacter::new(&plus.group, vec![1]).unwrap();
        for (c, l) in [(2, &plus), (3, &minus)] {
            let theta = GammaCharacter::new(3, c, 1).unwrap();
            let rho = ArtinRepOfG::induced(&plus.group, chi0.clone(), theta).unwrap();
            let v = evaluate_l_pm_g_e(&plus, &minus, &rho, &ring()).unwrap();
            assert_eq!((v.plus_exp, v.minus_exp), (1, 1));
            let mut prod = CycloNumber::one(1);
            for (x0, th) in restrict(&rho, &plus.group) {
                prod = &prod * &evaluate_at_g_character(l, &x0, &th, &ring()).unwrap().algebraic;
            }
            assert_eq!(v.algebraic, prod);
        }
    }
}
