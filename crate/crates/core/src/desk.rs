//! The dihedral desk instance: K = Q(i), F = K(2^(1/4)), p = 3, A = Z/4 with
//! c acting by inversion, over the CM curve y^2 = x^3 - x.

use std::sync::Arc;

use rayon::prelude::*;

use crate::characters::{dirichlet_lift, enumerate_dual, gauss_sum, AbelianGroup, FiniteCharacter, GammaCharacter};
use crate::cm::{desk_32a, ArtinData, ArtinKind, DeskCurve, GrossenChar, PrimeSplitting, QExpansion};
use crate::cyclo::CycloNumber;
use crate::dd::{CDD, DD};
use crate::equivariant::{EtaComponent, PeriodRadical};
use crate::error::{Error, Result};
use crate::lvalues::afe::{degree4_lvalue_afe, euler_product_coefficients};
use crate::lvalues::build::{
    algebraic_part, find_level, lambda_table_additive, lambda_table_numeric, radical_scale_search, scale_by_radical,
    FormData, NumericTable,
};
use crate::lvalues::periods::{real_period_agm, Periods};
use crate::lvalues::table::radical_normalization;
use crate::lvalues::LambdaTable;

/// Levels tried for the twisted forms: 4 * 2^k.
pub const LEVEL_CANDIDATES: [i64; 9] = [8, 16, 32, 64, 128, 256, 512, 1024, 2048];
/// Denominator bound for reconstructing desk table entries.
pub const DESK_BOUND: i64 = 1000;
/// Closeness demanded of reconstructed entries.
pub const DESK_RECON_EPS: f64 = 1e-9;

/// The form attached to phi * eta-bar and its level.
#[derive(Clone, Debug)]
pub struct TwistForm {
    pub eta: FiniteCharacter,
    pub character: GrossenChar,
    pub form: FormData,
}

#[derive(Clone, Debug)]
pub struct EquivariantDesk {
    pub base: DeskCurve,
    pub artin: ArtinData,
    pub group: Arc<AbelianGroup>,
    pub frob_p: Vec<i64>,
    pub forms: Vec<TwistForm>,
    pub periods: Periods,
    pub radical: PeriodRadical,
}

/// The dihedral instance with `n_coeffs` exact coefficients per twisted form.
pub fn d4_desk(n_coeffs: usize) -> Result<EquivariantDesk> {
    let base = desk_32a();
    let artin = ArtinData::kummer(&base.character.field, 2, 4)?;
    equivariant_desk(base, artin, &LEVEL_CANDIDATES, n_coeffs)
}

/// Twisted forms phi * eta-bar for every eta in the dual of Gal(F/K), each
/// with its level found among `levels`.
pub fn equivariant_desk(base: DeskCurve, artin: ArtinData, levels: &[i64], n_coeffs: usize) -> Result<EquivariantDesk> {
    equivariant_desk_with(base, artin, levels, &|_| n_coeffs, &|_, chi, n| chi.q_expansion(n))
}

/// Source of exact q-expansions for the twisted characters (e.g. a cache).
pub type ExpansionSource<'a> = dyn Fn(&FiniteCharacter, &GrossenChar, usize) -> Result<QExpansion> + Sync + 'a;

/// As `equivariant_desk`, taking the q-expansions from `source` and sizing
/// each by its level.
pub fn equivariant_desk_with(
    base: DeskCurve,
    artin: ArtinData,
    levels: &[i64],
    n_coeffs: &(dyn Fn(i64) -> usize + Sync),
    source: &ExpansionSource,
) -> Result<EquivariantDesk> {
    let k = base.character.field.clone();
    let group = artin.group.clone();
    let frob_p = match k.factor_rational_prime(base.p)? {
        PrimeSplitting::Inert(q) => artin.symbol(q)?,
        _ => return Err(Error::Config(format!("{} is not inert in K", base.p))),
    };
    let radical = match artin.kind {
        ArtinKind::PowerResidue { radicand, degree } => PeriodRadical { radicand, degree },
        ArtinKind::Table(_) => PeriodRadical::NONE,
    };
    let periods = real_period_agm(&base.curve)?;
    let forms = enumerate_dual(&group)
        .into_par_iter()
        .map(|eta| {
            let character = base.character.twisted(&artin, &eta);
            let probe = source(&eta, &character, PROBE_COEFFS)?;
            let probe = FormData::from_expansion("probe", &character, probe, 1, base.p)?;
            let (level, _) = find_level(&probe.coeffs, levels, 1e-12)?;
            let label = twist_label(&base.label, &eta);
            let exact = source(&eta, &character, n_coeffs(level).max(PROBE_COEFFS))?;
            let form = FormData::from_expansion(&label, &character, exact, level, base.p)?;
            Ok(TwistForm { eta, character, form })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EquivariantDesk { base, artin, group, frob_p, forms, periods, radical })
}

/// Coefficients used to find the level of a twisted form.
pub const PROBE_COEFFS: usize = 4000;

/// "32a-eta1.0" style label of the form attached to phi * eta-bar.
pub fn twist_label(base: &str, eta: &FiniteCharacter) -> String {
    format!("{}-eta{}", base, eta.exps.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("."))
}

/// A component table with its provenance.
#[derive(Clone, Debug)]
pub struct ComponentBuild {
    pub component: EtaComponent,
    pub additive: NumericTable,
    /// max |coset average of additive - multiplicative| after scaling
    pub backend_gap: f64,
}

impl EquivariantDesk {
    pub fn omega_plus(&self) -> f64 {
        self.periods.omega_plus.to_f64()
    }

    pub fn twist_form(&self, eta: &FiniteCharacter) -> Result<&TwistForm> {
        self.forms.iter().find(|f| &f.eta == eta).ok_or_else(|| Error::Config(format!("no form for {eta}")))
    }

    /// Exact table of the eta-component from the additive backend, period ratio
    /// found by search, cross-checked against the multiplicative backend.
    pub fn component(&self, eta: &FiniteCharacter, depth: u32, eps: f64) -> Result<ComponentBuild> {
        let tf = self.twist_form(eta)?;
        let om = self.omega_plus();
        let additive = lambda_table_additive(&tf.form, depth, om, eps)?;
        let (k, mut table) = radical_scale_search(&additive.table, self.radical.radicand, self.radical.degree, DESK_BOUND, DESK_RECON_EPS)?;
        table.normalization = radical_normalization(self.radical.radicand, self.radical.degree, k);
        let mult = lambda_table_numeric(&tf.form, depth, om, eps)?;
        let mult = scale_by_radical(&mult.table, self.radical.radicand, self.radical.degree, k)?;
        let avg = crate::lvalues::build::coset_average(&table)?;
        let mut gap: f64 = 0.0;
        for j in 0..=depth {
            let units = if j == 0 { vec![0] } else { table.units(j) };
            for a in units {
                gap = gap.max((avg.complex(j, a)? - mult.complex(j, a)?).abs().to_f64());
            }
        }
        let component = EtaComponent { eta: eta.clone(), table, period_ratio: k, eps_p: tf.form.eps_p.clone() };
        Ok(ComponentBuild { component, additive, backend_gap: gap })
    }

    pub fn components(&self, depth: u32, eps: f64) -> Result<Vec<ComponentBuild>> {
        self.forms.iter().map(|f| self.component(&f.eta, depth, eps)).collect()
    }

    /// L(phi, chi-bar, 1)/Omega_+ for chi = (chi_0, theta), from the AFE at theta-bar.
    pub fn twisted_central(&self, chi0: &FiniteCharacter, theta: &GammaCharacter, eps: f64) -> Result<CDD> {
        let tf = self.twist_form(chi0)?;
        let r = tf.form.twisted_value(theta, eps)?;
        Ok(r.value.scale(DD::new(1.0 / self.omega_plus())))
    }

    /// Exact algebraic L-part L(phi, chi-bar, 1)/(Omega_+ C) with C = 2^(k/4),
    /// reconstructed from the Galois orbit of twisted sums tau(theta^s) L(., theta^-s, 1).
    pub fn l_part(&self, chi0: &FiniteCharacter, theta: &GammaCharacter, k: i64, eps: f64) -> Result<CycloNumber> {
        let ord = theta.order();
        let field = crate::cyclo::CycloField::new(ord);
        let c = DD::new(1.0 / self.radical.value(k));
        let vals = field
            .embedding_indices()
            .par_iter()
            .map(|&s| {
                let th = theta.galois(s);
                let tau = gauss_sum(&th)?.value.complex_embed(1);
                Ok((tau * self.twisted_central(chi0, &th, eps)?).scale(c))
            })
            .collect::<Result<Vec<CDD>>>()?;
        let s = algebraic_part(&vals, ord, DESK_BOUND, DESK_RECON_EPS)?;
        s.try_div(&gauss_sum(theta)?.value)
    }

    /// Complex side of Frobenius reciprocity for Ind(chi_0 theta): the product of the
    /// two degree-two values against the degree-four series built prime by prime.
    pub fn frobenius_check(&self, chi0: &FiniteCharacter, theta: &GammaCharacter, eps: f64) -> Result<FrobeniusCheck> {
        let chi0c = chi0.compose_c(&self.group);
        let f1 = self.twist_form(chi0)?;
        let f2 = self.twist_form(&chi0c)?;
        let l1 = f1.form.twisted_value(theta, eps)?.value;
        let l2 = f2.form.twisted_value(theta, eps)?.value;
        let product = l1 * l2;
        let pc = crate::arith::ipow(theta.p, theta.c) as f64;
        let q = f1.form.level as f64 * f2.form.level as f64 * pc.powi(4);
        let z = (1.0 / eps).ln() + 5.0;
        let n = ((z * z / 4.0) * q.sqrt() / (4.0 * std::f64::consts::PI.powi(2) * 0.76)) as usize + 2;
        let coef = degree4_coefficients(&self.base.character, &self.artin, chi0, theta, n)?;
        let dual: Vec<CDD> = coef.iter().map(|c| c.conj()).collect();
        let deg4 = degree4_lvalue_afe(&coef, &dual, q, eps)?;
        // relative once the product is of unit size, absolute below that
        let scale = product.abs().to_f64().max(1.0);
        Ok(FrobeniusCheck {
            factors: (l1, l2),
            product,
            degree4: deg4.value,
            root_number: deg4.root_number,
            error: (product - deg4.value).abs().to_f64() / scale,
            terms: deg4.terms,
        })
    }
}

#[derive(Clone, Debug)]
pub struct FrobeniusCheck {
    pub factors: (CDD, CDD),
    pub product: CDD,
    pub degree4: CDD,
    pub root_number: CDD,
    pub error: f64,
    pub terms: usize,
}

/// Coefficients of L(E, Ind(chi)^dual, s) from local eigenvalues: at a split l the
/// products {phi(q), phi(q')} x {chi-bar(q), chi-bar(q')}; at an inert l the
/// tensor of two induced Frobenius matrices, with eigenvalues +-sqrt(phi chi-bar((l))) twice.
pub fn degree4_coefficients(
    phi: &GrossenChar,
    artin: &ArtinData,
    chi0: &FiniteCharacter,
    theta: &GammaCharacter,
    n_max: usize,
) -> Result<Vec<CDD>> {
    let field = phi.field.clone();
    let lift = dirichlet_lift(theta)?;
    let ord = theta.order();
    let theta_bar = |n: i64| -> CDD {
        match lift.exponent(n.rem_euclid(lift.modulus)) {
            Ok(e) => CDD::root_of_unity(-e, ord),
            Err(_) => CDD::ZERO,
        }
    };
    let chi_bar = |q| -> Result<CDD> {
        if artin.is_ramified(q) && !chi0.is_trivial() {
            return Err(Error::Ramified(format!("{q}")));
        }
        let s = if chi0.is_trivial() { vec![0; artin.group.orders.len()] } else { artin.symbol_of_ideal(q)? };
        Ok(chi0.value(&s).conj().complex_embed(1))
    };
    let phi_at = |q| -> Result<Option<CDD>> {
        if phi.is_bad(q) {
            return Ok(None);
        }
        Ok(Some(field.to_cyclo(phi.eval_untwisted(q)?).complex_embed(1)))
    };
    let failure: std::sync::Mutex<Option<Error>> = std::sync::Mutex::new(None);
    let local = |l: usize| -> Vec<CDD> {
        let li = l as i64;
        if li == theta.p {
            return vec![CDD::ONE];
        }
        let poly_from = |eigs: &[CDD]| {
            let mut poly = vec![CDD::ONE];
            for &x in eigs {
                let mut next = poly.clone();
                next.push(CDD::ZERO);
                for i in 0..poly.len() {
                    next[i + 1] = next[i + 1] - x * poly[i];
                }
                poly = next;
            }
            poly
        };
        let run = || -> Result<Vec<CDD>> {
            match field.factor_rational_prime(li)? {
                PrimeSplitting::Split(q1, q2) => {
                    let (Some(a1), Some(a2)) = (phi_at(q1)?, phi_at(q2)?) else { return Ok(vec![CDD::ONE]) };
                    let t = theta_bar(li);
                    let (b1, b2) = (chi_bar(q1)? * t, chi_bar(q2)? * t);
                    Ok(poly_from(&[a1 * b1, a1 * b2, a2 * b1, a2 * b2]))
                }
                PrimeSplitting::Inert(_) if l.saturating_mul(l) > n_max => Ok(vec![CDD::ONE]),
                PrimeSplitting::Inert(q) => {
                    let Some(a) = phi_at(q)? else { return Ok(vec![CDD::ONE]) };
                    let x = a * chi_bar(q)? * theta_bar(li * li);
                    let two = CDD::new(DD::new(2.0), DD::ZERO);
                    Ok(vec![CDD::ONE, CDD::ZERO, -(two * x), CDD::ZERO, x * x])
                }
                PrimeSplitting::Ramified(_) => Ok(vec![CDD::ONE]),
            }
        };
        match run() {
            Ok(v) => v,
            Err(Error::Ramified(_)) => vec![CDD::ONE],
            Err(e) => {
                failure.lock().unwrap().get_or_insert(e);
                vec![CDD::ONE]
            }
        }
    };
    let out = euler_product_coefficients(n_max, &local);
    match failure.into_inner().unwrap() {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Convenience: the exact component tables keyed like the dual of A.
pub fn component_tables(builds: &[ComponentBuild]) -> Vec<(FiniteCharacter, LambdaTable)> {
    builds.iter().map(|b| (b.component.eta.clone(), b.component.table.clone())).collect()
}
