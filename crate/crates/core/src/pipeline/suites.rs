//! Verification suites over a configured pipeline. Hard checks decide the
//! exit status; findings are reported with their computed values only.

use serde::Serialize;
use serde_json::{json, Value};

use crate::characters::{enumerate_gamma_characters, gauss_sum, GammaCharacter};
use crate::cm::PrimeSplitting;
use crate::cyclo::CycloNumber;
use crate::equivariant::{epsilon_factor, epsilon_restricted_product, evaluate_l_pm_g_e, interpolation_rhs, restrict, ring_for, ArtinRepOfG};
use crate::error::{Error, Result};
use crate::iwasawa::Sign;
use crate::lvalues::build::{lambda_table_additive, reconstruct_twisted_sum, trace_relation_check};
use crate::pollack::{log_pm_at_character, omega_signed, pm_value, trivial_constant_ratios};

use super::artifacts::{cyclo_json, padic_json};
use super::{mu_json, theta_json, Pipeline};

pub const SUITES: [&str; 11] =
    ["zeros", "nonvanishing", "gauss", "cm", "afe", "trace", "interpolation", "equivariant", "mu", "findings", "all"];

/// |w| - 1 tolerance for root numbers.
pub const ROOT_NUMBER_TOL: f64 = 1e-6;
/// Agreement of the value at different split points.
pub const SPLIT_TOL: f64 = 1e-10;
/// Relative tolerance for trace relations on numeric tables.
pub const TRACE_TOL: f64 = 1e-8;
/// Degree-four value against the product of degree-two values.
pub const FROBENIUS_TOL: f64 = 1e-6;
/// Largest conductor exponent used by the AFE, trace and interpolation suites.
pub const CHECK_DEPTH: u32 = 3;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    /// exit status this failure maps to (0 when passed)
    pub code: i32,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
    pub findings: Vec<Value>,
}

impl SuiteReport {
    /// 0 when every hard check passed, else the most severe failure code.
    pub fn exit_code(&self) -> i32 {
        self.checks.iter().map(|c| c.code).max().unwrap_or(0)
    }

    pub fn passed(&self) -> bool {
        self.exit_code() == 0
    }

    pub fn to_json(&self) -> Value {
        json!({ "suite": self.suite, "exit_code": self.exit_code(), "checks": self.checks, "findings": self.findings })
    }

    pub fn to_text(&self) -> String {
        let width = self.checks.iter().map(|c| c.suite.len() + c.name.len() + 1).max().unwrap_or(0);
        let mut s = String::new();
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            s += &format!("{tag}  {:<width$}  {}\n", format!("{}/{}", c.suite, c.name), c.detail);
        }
        for f in &self.findings {
            s += &format!("NOTE  {}\n", serde_json::to_string(f).unwrap_or_default());
        }
        s += &format!("exit status {}\n", self.exit_code());
        s
    }

    fn check(&mut self, suite: &str, name: impl Into<String>, f: impl FnOnce() -> Result<(bool, String)>) {
        let (passed, detail, code) = match f() {
            Ok((true, d)) => (true, d, 0),
            Ok((false, d)) => (false, d, 3),
            Err(e) => (false, e.to_string(), e.exit_code()),
        };
        self.checks.push(Check { suite: suite.into(), name: name.into(), passed, detail, code });
    }
}

pub fn run_suite(pipe: &Pipeline, suite: &str) -> Result<SuiteReport> {
    let mut r = SuiteReport { suite: suite.to_string(), ..Default::default() };
    match suite {
        "zeros" => zeros(pipe, &mut r),
        "nonvanishing" => nonvanishing(pipe, &mut r),
        "gauss" => gauss(pipe, &mut r),
        "cm" => cm(pipe, &mut r),
        "afe" => afe(pipe, &mut r),
        "trace" => trace(pipe, &mut r),
        "interpolation" => interpolation(pipe, &mut r),
        "equivariant" => equivariant(pipe, &mut r),
        "mu" => mu(pipe, &mut r),
        "findings" => match findings(pipe) {
            Ok(f) => r.findings = f,
            Err(e) => r.check("findings", "compute", || Err(e)),
        },
        "all" => {
            for s in SUITES.iter().filter(|s| **s != "all") {
                let sub = run_suite(pipe, s)?;
                r.checks.extend(sub.checks);
                r.findings.extend(sub.findings);
            }
        }
        _ => return Err(Error::Usage(format!("unknown suite '{suite}'; expected one of {}", SUITES.join(", ")))),
    }
    Ok(r)
}

fn nontrivial(p: i64, c_max: u32) -> Vec<GammaCharacter> {
    enumerate_gamma_characters(p, c_max).into_iter().filter(|t| !t.is_trivial()).collect()
}

/// log_1^+ vanishes exactly iff c is odd >= 3, log_1^- iff c is even >= 2.
fn zeros(pipe: &Pipeline, r: &mut SuiteReport) {
    let c = &pipe.setup.config;
    r.check("zeros", "log_1 zero pattern", || {
        let ring = ring_for(c.p, c.n_max, 1, c.precision)?;
        let mut bad = Vec::new();
        let thetas = nontrivial(c.p, c.n_max);
        for theta in &thetas {
            for sign in [Sign::Plus, Sign::Minus] {
                let zero = log_pm_at_character(sign, 1, theta, 0, &ring)?.is_exact_zero();
                let expected = theta.c % 2 != sign.conductor_parity();
                if zero != expected {
                    bad.push(format!("{sign}{theta}"));
                }
            }
        }
        Ok((bad.is_empty(), format!("{} characters, mismatches {:?}", thetas.len(), bad)))
    });
}

fn nonvanishing(pipe: &Pipeline, r: &mut SuiteReport) {
    let c = &pipe.setup.config;
    r.check("nonvanishing", "omega at matching parity", || {
        let ring = ring_for(c.p, c.n_max, 1, c.precision)?;
        let mut worst: Option<num_rational::Ratio<i64>> = None;
        let thetas = nontrivial(c.p, c.n_max);
        for theta in &thetas {
            let sign = if theta.c % 2 == 0 { Sign::Plus } else { Sign::Minus };
            let w = omega_signed(sign, theta, &ring)?;
            match w.valuation() {
                Some(v) => worst = Some(worst.map_or(v, |x| x.max(v))),
                None => return Ok((false, format!("omega{sign}{theta} has no certified valuation"))),
            }
        }
        Ok((true, format!("{} characters, largest valuation {}", thetas.len(), worst.map(|v| v.to_string()).unwrap_or_default())))
    });
}

fn gauss(pipe: &Pipeline, r: &mut SuiteReport) {
    let c = &pipe.setup.config;
    r.check("gauss", "tau(theta) tau(theta-bar) = p^c", || {
        let thetas = nontrivial(c.p, c.n_max);
        for theta in &thetas {
            let prod = &gauss_sum(theta)?.value * &gauss_sum(&theta.conj())?.value;
            if prod != CycloNumber::from_int(1, crate::arith::ipow(c.p, theta.c)) {
                return Ok((false, format!("fails at {theta}")));
            }
        }
        Ok((true, format!("{} characters", thetas.len())))
    });
}

/// Bound for the coefficient cross-check.
pub const CM_BOUND: i64 = 1000;

fn cm(pipe: &Pipeline, r: &mut SuiteReport) {
    let d = &pipe.setup.desk;
    r.check("cm", "a_l against point counts", || {
        let q = d.character.q_expansion(CM_BOUND as usize)?;
        let mut checked = 0;
        for l in (2..=CM_BOUND).filter(|&l| crate::arith::is_prime(l)) {
            match d.curve.point_count_ap(l) {
                Ok(ap) => {
                    checked += 1;
                    if q.get(l as usize) != &CycloNumber::from_int(1, ap) {
                        return Ok((false, format!("a_{l} = {:?}, point count gives {ap}", q.get(l as usize).coeff_strings())));
                    }
                }
                Err(Error::BadReduction(_)) => {}
                Err(e) => return Err(e),
            }
        }
        Ok((true, format!("{checked} good primes up to {CM_BOUND}")))
    });
    r.check("cm", "supersingular and inert at p", || {
        let ap = d.curve.point_count_ap(d.p)?;
        let inert = matches!(d.character.field.factor_rational_prime(d.p)?, PrimeSplitting::Inert(_));
        Ok((ap == 0 && inert, format!("a_{} = {ap}, inert {inert}", d.p)))
    });
}

fn afe(pipe: &Pipeline, r: &mut SuiteReport) {
    let base = match pipe.base() {
        Ok(b) => b,
        Err(e) => return r.check("afe", "base form", || Err(e)),
    };
    let depth = CHECK_DEPTH.min(pipe.setup.config.n_max);
    let mut forms = vec![(pipe.setup.desk.label.clone(), &base.form)];
    let eq = match pipe.equivariant() {
        Ok(e) => e,
        Err(e) => return r.check("afe", "twisted forms", || Err(e)),
    };
    if let Some(eq) = eq {
        forms.extend(eq.desk.forms.iter().map(|f| (f.form.label.clone(), &f.form)));
    }
    let eps = pipe.eps();
    for (label, form) in forms {
        r.check("afe", format!("{label} root numbers"), || {
            let mut results = vec![form.central_value(eps)?];
            for theta in nontrivial(form.p, depth) {
                results.push(form.twisted_value(&theta, eps)?);
            }
            let w = results.iter().map(|a| a.w_error).fold(0.0, f64::max);
            let s = results.iter().map(|a| a.split_spread).fold(0.0, f64::max);
            Ok((w <= ROOT_NUMBER_TOL && s <= SPLIT_TOL, format!("{} twists, max ||w|-1| {w:.2e}, max spread {s:.2e}", results.len())))
        });
    }
}

fn trace(pipe: &Pipeline, r: &mut SuiteReport) {
    let b = match pipe.base() {
        Ok(b) => b,
        Err(e) => return r.check("trace", "base form", || Err(e)),
    };
    let depth = CHECK_DEPTH.min(pipe.setup.config.n_max);
    r.check("trace", "numeric additive table", || {
        let t = lambda_table_additive(&b.form, depth, b.omega, pipe.eps())?;
        let rep = trace_relation_check(&t.table, &b.form.eps_p, TRACE_TOL)?;
        Ok((rep.passed(), format!("{} relations, max relative error {:.2e}", rep.checked, rep.max_error)))
    });
    r.check("trace", "exact table", || {
        let rep = trace_relation_check(&b.table, &b.form.eps_p, 0.0)?;
        Ok((rep.passed(), format!("{} relations exact, {} failures", rep.checked, rep.failures.len())))
    });
    match pipe.equivariant() {
        Ok(Some(eq)) => {
            for rec in &eq.components {
                r.check("trace", format!("component {:?}", rec.component.eta.exps), || {
                    let rep = trace_relation_check(&rec.component.table, &rec.component.eps_p, 0.0)?;
                    Ok((rep.passed(), format!("{} relations exact", rep.checked)))
                });
            }
        }
        Ok(None) => {}
        Err(e) => r.check("trace", "components", || Err(e)),
    }
}

/// L^sign(theta) omega^sign(theta) eps(p)^k = tau(theta) L(f, theta-bar, 1)/Omega_+,
/// the left side from the exact table, the right side reconstructed from the AFE.
fn interpolation(pipe: &Pipeline, r: &mut SuiteReport) {
    let c = &pipe.setup.config;
    let b = match pipe.base() {
        Ok(b) => b,
        Err(e) => return r.check("interpolation", "base form", || Err(e)),
    };
    let depth = CHECK_DEPTH.min(c.n_max);
    r.check("interpolation", "exact identities", || {
        let mut n = 0;
        for theta in nontrivial(c.p, depth) {
            let sign = if theta.c % 2 == 0 { Sign::Plus } else { Sign::Minus };
            let ring = ring_for(c.p, theta.level(), b.table.modulus, c.precision + 2)?;
            let v = pm_value(sign, &b.table, &theta, &b.form.eps_p, &ring)?;
            let k = theta.c.div_ceil(2) as u64;
            let eps_k = b.form.eps_p.pow(k);
            let lhs_exact = &(&v.algebraic * &CycloNumber::from_int(1, -c.p).pow(k)) * &eps_k;
            let rhs_exact = reconstruct_twisted_sum(&b.multiplicative.twists, &theta, c.bound, crate::desk::DESK_RECON_EPS)?;
            if lhs_exact != rhs_exact {
                return Ok((false, format!("exact sides differ at {theta}")));
            }
            let lhs = &(&v.value * &omega_signed(sign, &theta, &ring)?) * &eps_k.padic_embed(&ring)?;
            let rhs = rhs_exact.padic_embed(&ring)?;
            if !(&lhs - &rhs).is_zero() {
                return Ok((false, format!("p-adic sides differ at {theta}")));
            }
            n += 1;
        }
        Ok((true, format!("{n} characters up to conductor p^{depth}")))
    });
}

fn rep_label(rho: &ArtinRepOfG) -> String {
    let kind = if rho.dim() == 1 { "onedim" } else { "induced" };
    format!("{kind} {} {}", rho.chi0(), rho.chi_prime())
}

fn equivariant(pipe: &Pipeline, r: &mut SuiteReport) {
    let c = &pipe.setup.config;
    let eq = match pipe.equivariant() {
        Ok(Some(eq)) => eq,
        Ok(None) => {
            r.findings.push(json!({ "suite": "equivariant", "skipped": "no kummer data configured" }));
            return;
        }
        Err(e) => return r.check("equivariant", "build", || Err(e)),
    };
    let desk = &eq.desk;
    let eps = pipe.eps().max(1e-12);
    for (_, rho) in &eq.reps {
        let label = rep_label(rho);
        r.check("equivariant", format!("{label} interpolation"), || {
            let theta = rho.chi_prime();
            let ring = ring_for(c.p, theta.level(), eq.plus.modulus, c.precision + 2)?;
            let v = evaluate_l_pm_g_e(&eq.plus, &eq.minus, rho, &ring)?;
            let mut parts = Vec::new();
            for (chi0, th) in restrict(rho, &desk.group) {
                let k = eq.plus.component(&chi0)?.period_ratio;
                parts.push(desk.l_part(&chi0, &th, k, eps)?);
            }
            let (alg, value) = interpolation_rhs(rho, &desk.group, &desk.frob_p, &parts, &ring)?;
            let exact = v.algebraic == alg;
            let padic = (&v.value - &value).is_zero();
            let zero = if alg.is_zero() { " (value zero)" } else { "" };
            Ok((exact && padic, format!("exact {exact}, p-adic {padic}{zero}")))
        });
        r.check("equivariant", format!("{label} epsilon"), || {
            let e = epsilon_factor(rho, &desk.group, &desk.frob_p)?.value;
            let prod = epsilon_restricted_product(rho, &desk.group, &desk.frob_p)?;
            Ok((e == prod, "closed form against the product of one-dimensional factors".into()))
        });
        if let ArtinRepOfG::Induced { chi0, chi_prime } = rho {
            r.check("equivariant", format!("{label} Frobenius"), || {
                let f = desk.frobenius_check(chi0, chi_prime, eps)?;
                Ok((f.error <= FROBENIUS_TOL, format!("degree four against product: error {:.2e} over {} terms", f.error, f.terms)))
            });
        }
    }
    for sign in [Sign::Plus, Sign::Minus] {
        r.check("equivariant", format!("integrality{sign}"), || {
            let ring = ring_for(c.p, 0, eq.plus.modulus, c.precision)?;
            let vals = crate::equivariant::integrality_check(eq.l(sign), c.n_max, &ring)?;
            Ok((true, format!("{} values with valuation >= 0", vals.len())))
        });
    }
}

fn mu(pipe: &Pipeline, r: &mut SuiteReport) {
    let eq = match pipe.equivariant() {
        Ok(e) => e,
        Err(e) => return r.check("mu", "build", || Err(e)),
    };
    for sign in [Sign::Plus, Sign::Minus] {
        let l = match eq {
            Some(eq) => Ok(eq.l(sign).clone()),
            None => pipe.base_as_equivariant(sign),
        };
        let mut report = None;
        r.check("mu", format!("report{sign}"), || {
            let rep = pipe
                .mu_reports(&l?)?
                .ok_or_else(|| Error::Config(format!("n_max must be at least mu_m + 1 = {}", pipe.setup.config.mu_m + 1)))?;
            let missing = rep.components.iter().filter(|c| c.mu_lambda.is_none()).count();
            if missing > 0 {
                return Err(Error::Uncertifiable(format!("{missing} components without mu/lambda")));
            }
            let j = mu_json(Some(&rep));
            let statement = j["statement"].as_str().unwrap_or_default().to_string();
            report = Some(j);
            Ok((true, statement))
        });
        if let Some(j) = report {
            r.findings.push(json!({ "suite": "mu", "report": j }));
        }
    }
}

/// Structured findings: trivial-character constants, the conductor-p^0 clause,
/// the period ratios of the twisted forms, the Euler factor at p.
pub fn findings(pipe: &Pipeline) -> Result<Vec<Value>> {
    let c = &pipe.setup.config;
    let b = pipe.base()?;
    let ring = ring_for(c.p, 0, b.table.modulus, c.precision)?;
    let mut out = Vec::new();
    let (plus_ratio, minus_ratio) = trivial_constant_ratios(&ring)?;
    let one = GammaCharacter::trivial(c.p);
    let lp = pm_value(Sign::Plus, &b.table, &one, &b.form.eps_p, &ring)?;
    let lm = pm_value(Sign::Minus, &b.table, &one, &b.form.eps_p, &ring)?;
    out.push(json!({
        "finding": "trivial-character constants",
        "statement": "values at the trivial character from the distribution relations, against the constants (p-1) lambda(0) and (1+eps^-1) lambda(0)",
        "ratio_plus": padic_json(&plus_ratio),
        "ratio_minus": padic_json(&minus_ratio),
        "value_plus": padic_json(&lp.value),
        "value_minus": padic_json(&lm.value),
        "lambda0": cyclo_json(&b.table.exact(0, 0)?),
    }));
    let mut logs = Vec::new();
    for r in 1..=3u32 {
        let v = log_pm_at_character(Sign::Minus, r, &one, 0, &ring)?;
        logs.push(json!({ "r": r, "log_minus": padic_json(&v), "zero": v.is_zero() }));
    }
    out.push(json!({
        "finding": "conductor p^0 clause",
        "statement": "log^- at the trivial character, listed among the zeros by the conductor-parity rule",
        "theta": theta_json(&one),
        "values": logs,
    }));
    if let Some(eq) = pipe.equivariant()? {
        let comps: Vec<Value> = eq
            .components
            .iter()
            .map(|r| json!({ "eta": r.component.eta.exps, "period_ratio_exponent": r.component.period_ratio, "normalization": r.component.table.normalization }))
            .collect();
        out.push(json!({
            "finding": "period ratios",
            "statement": "Omega_+ of the twisted forms differs from Omega_+ of the curve by radicand^(k/degree)",
            "radicand": eq.desk.radical.radicand,
            "degree": eq.desk.radical.degree,
            "components": comps,
        }));
    }
    out.push(json!({
        "finding": "Euler factor at p",
        "statement": "the degree-two local factor at the inert p is 1 + p^(1-2s); its value at s = 1 is kept in the values",
        "value": format!("{}/{}", c.p + 1, c.p),
    }));
    out.push(json!({
        "finding": "conductor p^1",
        "statement": "no Gamma-character has conductor exactly p, so the n = 1 clause is vacuous",
        "characters_of_conductor_p": 0,
    }));
    Ok(out)
}
