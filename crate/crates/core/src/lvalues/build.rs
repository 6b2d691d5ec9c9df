//! Numeric lambda tables (multiplicative twists with Fourier inversion, or
//! additive twists), trace relations, algebraic reconstruction and ingestion.

use rayon::prelude::*;

use super::afe::{additive_lvalue_with, roots_table, twisted_lvalue_afe, AfeResult};
use super::table::{Entries, LambdaTable};
use crate::arith::ipow;
use crate::characters::{dirichlet_lift, enumerate_gamma_characters, gauss_sum, GammaCharacter};
use crate::cm::{GrossenChar, QExpansion};
use crate::cyclo::{rational_reconstruct, CycloNumber};
use crate::dd::{CDD, DD};
use crate::error::{Error, Result};

/// A weight-two eigenform known through its coefficients.
#[derive(Clone, Debug)]
pub struct FormData {
    pub label: String,
    pub level: i64,
    pub exact: QExpansion,
    pub coeffs: Vec<CDD>,
    /// Nebentypus value at p.
    pub eps_p: CycloNumber,
    pub p: i64,
}

impl FormData {
    pub fn from_character(label: &str, chi: &GrossenChar, level: i64, p: i64, n_max: usize) -> Result<FormData> {
        FormData::from_expansion(label, chi, chi.q_expansion(n_max)?, level, p)
    }

    /// As `from_character` with a precomputed (e.g. cached) expansion of `chi`.
    pub fn from_expansion(label: &str, chi: &GrossenChar, exact: QExpansion, level: i64, p: i64) -> Result<FormData> {
        let coeffs = exact.coeffs.iter().map(|c| c.complex_embed(1)).collect();
        let eps_p = chi.nebentypus_at_inert(p)?;
        Ok(FormData { label: label.to_string(), level, exact, coeffs, eps_p, p })
    }

    pub fn modulus(&self) -> i64 {
        self.exact.modulus
    }

    pub fn has_real_coefficients(&self) -> bool {
        self.exact.coeffs.iter().all(|c| c == &c.conj())
    }

    pub fn eps_complex(&self) -> CDD {
        self.eps_p.complex_embed(1)
    }

    /// L(f, 1) by the AFE.
    pub fn central_value(&self, eps: f64) -> Result<AfeResult> {
        twisted_lvalue_afe(&self.coeffs, &|_| CDD::ONE, self.level, 1, eps)
    }

    /// L(f, theta-bar, 1) for a primitive Gamma-character of conductor p^c.
    pub fn twisted_value(&self, theta: &GammaCharacter, eps: f64) -> Result<AfeResult> {
        let lift = dirichlet_lift(theta)?;
        let ord = theta.order();
        let roots = roots_table(ord);
        let psi = |n: usize| match lift.exponent(n as i64) {
            Ok(e) => roots[((ord - e) % ord) as usize],
            Err(_) => CDD::ZERO,
        };
        twisted_lvalue_afe(&self.coeffs, &psi, self.level, ipow(theta.p, theta.c), eps)
    }
}

/// First level among `candidates` at which the central AFE has |w| = 1.
pub fn find_level(coeffs: &[CDD], candidates: &[i64], eps: f64) -> Result<(i64, AfeResult)> {
    for &n in candidates {
        if let Ok(r) = twisted_lvalue_afe(coeffs, &|_| CDD::ONE, n, 1, eps) {
            return Ok((n, r));
        }
    }
    Err(Error::RootNumber(format!("no level among {candidates:?} gives a unit root number")))
}

/// S(theta) = tau(theta) L(f, theta-bar, 1) / Omega with its AFE record.
#[derive(Clone, Debug)]
pub struct TwistValue {
    pub theta: GammaCharacter,
    pub afe: AfeResult,
    pub sum: CDD,
}

#[derive(Clone, Debug)]
pub struct NumericTable {
    pub table: LambdaTable,
    pub twists: Vec<TwistValue>,
    pub central: AfeResult,
    /// Largest split-point spread among the AFE evaluations, scaled by 1/Omega.
    pub budget: f64,
    pub omega: f64,
}

fn theta_value(theta: &GammaCharacter, a: i64) -> Result<CDD> {
    if theta.is_trivial() {
        return Ok(CDD::ONE);
    }
    let lift = dirichlet_lift(theta)?;
    Ok(CDD::root_of_unity(lift.exponent(a)?, theta.order()))
}

/// Multiplicative-twist backend: AFE at every primitive Gamma-character of
/// level <= n_max, Hecke closed forms for imprimitive ones, Fourier inversion.
pub fn lambda_table_numeric(form: &FormData, n_max: u32, omega: f64, eps: f64) -> Result<NumericTable> {
    let p = form.p;
    let central = form.central_value(eps)?;
    let lambda0 = central.value.scale(DD::new(1.0 / omega));
    let chars: Vec<GammaCharacter> = enumerate_gamma_characters(p, n_max).into_iter().skip(1).collect();
    let twists: Vec<TwistValue> = chars
        .par_iter()
        .map(|theta| {
            let afe = form.twisted_value(theta, eps)?;
            let tau = gauss_sum(theta)?.value.complex_embed(1);
            Ok(TwistValue { theta: *theta, afe, sum: (tau * afe.value).scale(DD::new(1.0 / omega)) })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut budget = central.split_spread / omega;
    for t in &twists {
        budget = budget.max(t.afe.split_spread / omega);
    }
    let e = form.eps_complex();
    let m_ep = e.scale(DD::from_i64(-p));
    let primitive = |theta: &GammaCharacter| twists.iter().find(|t| t.theta == *theta).map(|t| t.sum).unwrap();
    // sum over units a mod p^j of theta(a) lambda(a/p^j)
    let level_sum = |theta: &GammaCharacter, j: u32| -> CDD {
        if theta.is_trivial() {
            let one = CDD::ONE;
            let mut s = if j % 2 == 1 { -((one + e) * lambda0) } else { -(e * lambda0).scale(DD::from_i64(p - 1)) };
            for _ in 0..(j - 1) / 2 {
                s = m_ep * s;
            }
            s
        } else {
            let gap = j - theta.c;
            if gap % 2 == 1 {
                return CDD::ZERO;
            }
            let mut s = primitive(theta);
            for _ in 0..gap / 2 {
                s = m_ep * s;
            }
            s
        }
    };
    let mut table = LambdaTable::new_float(p, n_max, &form.label, form.modulus());
    table.insert_float(0, 0, lambda0);
    for j in 1..=n_max {
        let level_chars = enumerate_gamma_characters(p, j);
        let sums: Vec<CDD> = level_chars.iter().map(|t| level_sum(t, j)).collect();
        let count = (ipow(p, j - 1) * (p - 1)) as f64;
        for a in table.units(j) {
            let mut acc = CDD::ZERO;
            for (theta, s) in level_chars.iter().zip(&sums) {
                acc = acc + theta_value(theta, a)?.conj() * *s;
            }
            table.insert_float(j, a, acc.scale(DD::new(1.0 / count)));
        }
    }
    Ok(NumericTable { table, twists, central, budget, omega })
}

/// Additive-twist backend: each lambda(a/p^j) = Re L(f, a/p^j, 1)/Omega from
/// its own AFE (real coefficients, trivial character, gcd(p, level) = 1).
pub fn lambda_table_additive(form: &FormData, n_max: u32, omega: f64, eps: f64) -> Result<NumericTable> {
    if !form.has_real_coefficients() || form.eps_p != CycloNumber::one(1) {
        return Err(Error::Usage("additive twists need a real form with trivial character".into()));
    }
    let p = form.p;
    let central = form.central_value(eps)?;
    let mut table = LambdaTable::new_float(p, n_max, &form.label, form.modulus());
    table.insert_float(0, 0, CDD::new(central.value.re * DD::new(1.0 / omega), DD::ZERO));
    let mut budget = central.split_spread / omega;
    // free solves first; w of an additive twist does not depend on the numerator
    let mut levels = Vec::new();
    for j in 1..=n_max {
        let m = ipow(p, j);
        let roots = roots_table(m);
        let units = table.units(j);
        let vals = units
            .par_iter()
            .map(|&a| match additive_lvalue_with(&form.coeffs, a, m, form.level, &roots, eps, None) {
                Ok(r) if r.w_error < 1e-9 => Ok(Some(r)),
                Ok(_) | Err(Error::RootNumber(_)) => Ok(None),
                Err(e) => Err(e),
            })
            .collect::<Result<Vec<Option<AfeResult>>>>()?;
        levels.push((m, roots, units, vals));
    }
    let good: Vec<CDD> = levels
        .iter()
        .flat_map(|(_, _, _, v)| v.iter().flatten().map(|r| r.root_number))
        .collect();
    if good.is_empty() {
        return Err(Error::RootNumber("no additive twist determines the root number".into()));
    }
    let w_ref = good[0];
    if let Some(bad) = good.iter().find(|w| (**w - w_ref).abs().to_f64() > 1e-8) {
        return Err(Error::RootNumber(format!("additive root numbers disagree: {:?} vs {:?}", w_ref.to_c64(), bad.to_c64())));
    }
    for (m, roots, units, vals) in levels {
        let j = m.ilog(p);
        for (a, r) in units.into_iter().zip(vals) {
            let r = match r {
                Some(r) => r,
                None => additive_lvalue_with(&form.coeffs, a, m, form.level, &roots, eps, Some(w_ref))?,
            };
            budget = budget.max(r.split_spread / omega);
            table.insert_float(j, a, CDD::new(r.value.re * DD::new(1.0 / omega), DD::ZERO));
        }
    }
    Ok(NumericTable { table, twists: Vec::new(), central, budget, omega })
}

/// Average of lambda over Teichmueller cosets a * mu_{p-1}; the part seen by Gamma-characters.
pub fn coset_average(table: &LambdaTable) -> Result<LambdaTable> {
    let p = table.p;
    let mut out = table.clone();
    for j in 1..=table.n_max {
        let m = ipow(p, j);
        let lg = crate::characters::UnitLog::new(p, j);
        let teich: Vec<i64> = (1..p).map(|a| lg.teichmuller(a)).collect();
        for a in table.units(j) {
            let orbit = teich.iter().map(|&t| ((a as i128 * t as i128) % m as i128) as i64);
            match &table.entries {
                Entries::Float(_) => {
                    let mut s = CDD::ZERO;
                    for b in orbit {
                        s = s + table.complex(j, b)?;
                    }
                    out.insert_float(j, a, s.scale(DD::new(1.0 / (p - 1) as f64)));
                }
                Entries::Exact(_) => {
                    let mut s = CycloNumber::zero(1);
                    for b in orbit {
                        s = &s + &table.exact(j, b)?;
                    }
                    out.insert_exact(j, a, s.try_div(&CycloNumber::from_int(1, p - 1))?);
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct TraceFailure {
    pub level: u32,
    pub a: i64,
    pub lhs: CDD,
    pub rhs: CDD,
    pub error: f64,
}

/// Outcome of the relations sum_b lambda((a + b p^{j-1})/p^j) = -eps(p) lambda(a/p^{j-2})
/// (j >= 2) and sum_{a unit} lambda(a/p) = -(1 + eps(p)) lambda(0).
#[derive(Clone, Debug)]
pub struct TraceReport {
    pub exact: bool,
    pub checked: usize,
    pub max_error: f64,
    pub failures: Vec<TraceFailure>,
}

impl TraceReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn trace_relation_check(table: &LambdaTable, eps_p: &CycloNumber, tol: f64) -> Result<TraceReport> {
    let p = table.p;
    let exact = table.is_exact();
    let mut report = TraceReport { exact, checked: 0, max_error: 0.0, failures: Vec::new() };
    let scale = {
        let mut s: f64 = 0.0;
        for j in 0..=table.n_max {
            let units = if j == 0 { vec![0] } else { table.units(j) };
            for a in units {
                s = s.max(table.complex(j, a)?.abs().to_f64());
            }
        }
        s.max(1e-300)
    };
    let mut record = |level: u32, a: i64, lhs_x: Option<(CycloNumber, CycloNumber)>, lhs: CDD, rhs: CDD| {
        report.checked += 1;
        let (ok, err) = match lhs_x {
            Some((l, r)) => (l == r, if l == r { 0.0 } else { (lhs - rhs).abs().to_f64() / scale }),
            None => {
                let err = (lhs - rhs).abs().to_f64() / scale;
                (err <= tol, err)
            }
        };
        report.max_error = report.max_error.max(err);
        if !ok {
            report.failures.push(TraceFailure { level, a, lhs, rhs, error: err });
        }
    };
    let e_c = eps_p.complex_embed(1);
    if table.n_max >= 1 {
        let mut lhs = CDD::ZERO;
        let mut lhs_x = CycloNumber::zero(1);
        for a in table.units(1) {
            lhs = lhs + table.complex(1, a)?;
            if exact {
                lhs_x = &lhs_x + &table.exact(1, a)?;
            }
        }
        let rhs = -((CDD::ONE + e_c) * table.complex(0, 0)?);
        let pair = if exact {
            Some((lhs_x, -&(&(&CycloNumber::one(1) + eps_p) * &table.exact(0, 0)?)))
        } else {
            None
        };
        record(1, 0, pair, lhs, rhs);
    }
    for j in 2..=table.n_max {
        let step = ipow(p, j - 1);
        for a in table.units(j - 1) {
            let mut lhs = CDD::ZERO;
            let mut lhs_x = CycloNumber::zero(1);
            for b in 0..p {
                let idx = a + b * step;
                lhs = lhs + table.complex(j, idx)?;
                if exact {
                    lhs_x = &lhs_x + &table.exact(j, idx)?;
                }
            }
            let rhs = -(e_c * table.complex(j - 2, a)?);
            let pair = if exact { Some((lhs_x, -&(eps_p * &table.exact(j - 2, a)?))) } else { None };
            record(j, a, pair, lhs, rhs);
        }
    }
    Ok(report)
}

/// Exact element of Q(zeta_M) from its complex embeddings (ordered as the field's embedding indices).
pub fn algebraic_part(values: &[CDD], modulus: i64, bound: i64, eps: f64) -> Result<CycloNumber> {
    rational_reconstruct(values, modulus, bound, eps)
}

/// Exact S(theta) for a table with rational entries: the conjugates S(theta)^sigma_k = S(theta^k)
/// supply the remaining embeddings of Q(zeta_order).
pub fn reconstruct_twisted_sum(twists: &[TwistValue], theta: &GammaCharacter, bound: i64, eps: f64) -> Result<CycloNumber> {
    let m = theta.order();
    let field = crate::cyclo::CycloField::new(m);
    let mut vals = Vec::new();
    for k in field.embedding_indices() {
        let conj = theta.galois(k);
        let t = twists
            .iter()
            .find(|t| t.theta == conj)
            .ok_or_else(|| Error::Usage(format!("twist {conj} missing from the numeric table")))?;
        vals.push(t.sum);
    }
    algebraic_part(&vals, m, bound, eps)
}

/// Exact table from a float table whose entries lie in Q(zeta_M) with M | 4
/// (both embeddings are the value and its complex conjugate).
pub fn reconstruct_table(numeric: &LambdaTable, bound: i64, eps: f64) -> Result<LambdaTable> {
    let m = numeric.modulus;
    if m > 4 || 4 % m != 0 && m != 3 {
        return Err(Error::Usage(format!("reconstruction from a single embedding needs an imaginary quadratic or rational field, got M = {m}")));
    }
    let mut out = LambdaTable::new_exact(numeric.p, numeric.n_max, &numeric.form_id, m);
    for j in 0..=numeric.n_max {
        let units = if j == 0 { vec![0] } else { numeric.units(j) };
        for a in units {
            let z = numeric.complex(j, a)?;
            let vals: Vec<CDD> = if crate::arith::euler_phi(m) == 1 { vec![z] } else { vec![z, z.conj()] };
            out.insert_exact(j, a, algebraic_part(&vals, m, bound, eps)?);
        }
    }
    Ok(out)
}

/// Float table divided by radicand^(k/degree).
pub fn scale_by_radical(numeric: &LambdaTable, radicand: i64, degree: i64, k: i64) -> Result<LambdaTable> {
    let c = DD::new((radicand as f64).powf(-(k as f64) / degree as f64));
    let mut out = LambdaTable::new_float(numeric.p, numeric.n_max, &numeric.form_id, numeric.modulus);
    for j in 0..=numeric.n_max {
        let units = if j == 0 { vec![0] } else { numeric.units(j) };
        for a in units {
            out.insert_float(j, a, numeric.complex(j, a)?.scale(c));
        }
    }
    Ok(out)
}

/// Smallest k in 0..degree for which the table divided by radicand^(k/degree)
/// reconstructs in Q(zeta_M); returns k and the exact table.
pub fn radical_scale_search(numeric: &LambdaTable, radicand: i64, degree: i64, bound: i64, eps: f64) -> Result<(i64, LambdaTable)> {
    let mut nonzero = false;
    for j in 0..=numeric.n_max {
        let units = if j == 0 { vec![0] } else { numeric.units(j) };
        for a in units {
            nonzero |= numeric.complex(j, a)?.abs().to_f64() > 1e3 * eps;
        }
    }
    if !nonzero {
        return Err(Error::Uncertifiable("all entries vanish; the period ratio is undetermined".into()));
    }
    for k in 0..degree {
        if let Ok(t) = reconstruct_table(&scale_by_radical(numeric, radicand, degree, k)?, bound, eps) {
            return Ok((k, t));
        }
    }
    Err(Error::Uncertifiable(format!("no period ratio {radicand}^(k/{degree}) makes the table algebraic")))
}

/// Outcome of ingesting an exact table.
#[derive(Clone, Debug)]
pub struct IngestReport {
    pub trace: TraceReport,
    pub max_embedding_error: Option<f64>,
}

/// Parse and validate an exact table: exact trace relations, then agreement
/// of Teichmueller-coset averages with a numeric table (if given) to `tol`.
pub fn ingest_lambda_table(text: &str, eps_p: &CycloNumber, numeric: Option<&LambdaTable>, tol: f64) -> Result<(LambdaTable, IngestReport)> {
    let table = LambdaTable::from_text(text)?;
    if !table.is_exact() {
        return Err(Error::Validation("ingested tables must carry exact entries".into()));
    }
    let trace = trace_relation_check(&table, eps_p, 0.0)?;
    if let Some(f) = trace.failures.first() {
        return Err(Error::Validation(format!(
            "trace relation fails at level {} for a = {}: {:?} != {:?}",
            f.level, f.a, f.lhs.to_c64(), f.rhs.to_c64()
        )));
    }
    let mut max_err = None;
    if let Some(num) = numeric {
        let depth = table.n_max.min(num.n_max);
        let ea = coset_average(&table.restricted(depth))?;
        let na = coset_average(&num.restricted(depth))?;
        let mut worst: f64 = 0.0;
        for j in 0..=depth {
            let units = if j == 0 { vec![0] } else { table.units(j) };
            for a in units {
                let d = (ea.complex(j, a)? - na.complex(j, a)?).abs().to_f64();
                worst = worst.max(d);
                if d > tol {
                    return Err(Error::Validation(format!("entry lambda({a}/p^{j}) differs from the numeric backend by {d:.3e}")));
                }
            }
        }
        max_err = Some(worst);
    }
    Ok((table, IngestReport { trace, max_embedding_error: max_err }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cm::{desk_27a, desk_32a};
    use crate::lvalues::periods::real_period_agm;

    fn form_32a(n: usize) -> (FormData, f64) {
        let d = desk_32a();
        let f = FormData::from_character(&d.label, &d.character, d.conductor, d.p, n).unwrap();
        let om = real_period_agm(&d.curve).unwrap().omega_plus.to_f64();
        (f, om)
    }

    #[test]
    fn central_value_32a_is_one_eighth() {
        let (f, om) = form_32a(4000);
        let t = lambda_table_numeric(&f, 1, om, 1e-20).unwrap();
        let l0 = t.table.complex(0, 0).unwrap();
        assert!((l0.re.to_f64() - 0.125).abs() < 1e-12, "{:?}", l0.to_c64());
    }

    #[test]
    fn additive_tables_satisfy_trace_relations() {
        let (f, om) = form_32a(20000);
        let t = lambda_table_additive(&f, 3, om, 1e-16).unwrap();
        let r = trace_relation_check(&t.table, &f.eps_p, 1e-8).unwrap();
        assert!(r.passed() && r.checked > 3, "{:?}", r.max_error);
    }

    #[test]
    fn backends_agree_on_coset_averages() {
        let (f, om) = form_32a(20000);
        let mult = lambda_table_numeric(&f, 3, om, 1e-16).unwrap();
        let add = lambda_table_additive(&f, 3, om, 1e-16).unwrap();
        let add = coset_average(&add.table).unwrap();
        for j in 1..=3 {
            for a in add.units(j) {
                let d = (add.complex(j, a).unwrap() - mult.table.complex(j, a).unwrap()).abs().to_f64();
                assert!(d < 1e-8, "j={j} a={a} d={d:e}");
            }
        }
    }

    #[test]
    fn reconstruction_roundtrip_and_ingest() {
        let (f, om) = form_32a(20000);
        let num = lambda_table_numeric(&f, 3, om, 1e-16).unwrap();
        let exact = reconstruct_table(&num.table, 10_000, 1e-9).unwrap();
        assert_eq!(exact.exact(0, 0).unwrap(), CycloNumber::from_ratio(1, 1, 8));
        let text = exact.to_text();
        let (_, rep) = ingest_lambda_table(&text, &f.eps_p, Some(&num.table), 1e-6).unwrap();
        assert!(rep.trace.passed());
        // a tampered entry breaks an exact relation
        let line = text.lines().find(|l| l.starts_with("LAMBDA 2 ")).unwrap().to_string();
        let mut parts: Vec<String> = line.split_whitespace().map(String::from).collect();
        let bumped: num_rational::BigRational = parts[3].parse::<num_rational::BigRational>().unwrap() + num_rational::BigRational::from_integer(1.into());
        parts[3] = bumped.to_string();
        let bad = text.replace(&line, &parts.join(" "));
        let err = ingest_lambda_table(&bad, &f.eps_p, None, 1e-6).unwrap_err();
        assert!(err.to_string().contains("level 2") || err.to_string().contains("level 3"), "{err}");
    }

    #[test]
    fn twisted_sums_reconstruct_galois_equivariantly() {
        let (f, om) = form_32a(20000);
        let num = lambda_table_numeric(&f, 3, om, 1e-16).unwrap();
        let exact = reconstruct_table(&num.table, 10_000, 1e-9).unwrap();
        for t in &num.twists {
            let s = reconstruct_twisted_sum(&num.twists, &t.theta, 10_000, 1e-9).unwrap();
            assert_eq!(s, crate::pollack::twisted_sum(&exact, &t.theta).unwrap(), "{}", t.theta);
            let k = 2;
            let sk = reconstruct_twisted_sum(&num.twists, &t.theta.galois(k), 10_000, 1e-9).unwrap();
            assert_eq!(s.galois(k), sk);
        }
    }

    #[test]
    fn numeric_perturbation_detected() {
        let (f, om) = form_32a(20000);
        let num = lambda_table_numeric(&f, 2, om, 1e-16).unwrap();
        let mut t = num.table.clone();
        let a = t.units(2)[0];
        let z = t.complex(2, a).unwrap();
        t.insert_float(2, a, z + CDD::new(DD::new(1e-4), DD::ZERO));
        let r = trace_relation_check(&t, &f.eps_p, 1e-8).unwrap();
        assert!(!r.passed());
        assert!(trace_relation_check(&num.table, &f.eps_p, 1e-8).unwrap().passed());
    }

    #[test]
    fn twisted_27a_table_is_consistent() {
        let d = desk_27a();
        let f = FormData::from_character(&d.label, &d.character, d.conductor, d.p, 20000).unwrap();
        let om = real_period_agm(&d.curve).unwrap().omega_plus.to_f64();
        let num = lambda_table_numeric(&f, 2, om, 1e-16).unwrap();
        assert!(num.budget < 1e-10, "{}", num.budget);
        let add = lambda_table_additive(&f, 2, om, 1e-16).unwrap();
        let add = coset_average(&add.table).unwrap();
        for a in add.units(2) {
            let d = (add.complex(2, a).unwrap() - num.table.complex(2, a).unwrap()).abs().to_f64();
            assert!(d < 1e-8, "a={a} d={d:e}");
        }
    }
}
