//! Configuration-driven pipelines shared by the command line and the bindings.

pub mod artifacts;
pub mod config;
pub mod suites;

use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use serde_json::{json, Value};

use crate::characters::{enumerate_dual, enumerate_gamma_characters, AbelianGroup, FiniteCharacter, GammaCharacter};
use crate::cm::{GrossenChar, QExpansion};
use crate::cyclo::CycloNumber;
use crate::desk::{equivariant_desk_with, twist_label, EquivariantDesk, DESK_RECON_EPS};
use crate::equivariant::{
    assemble, classify_gamma_conductor, epsilon_factor, evaluate_l_pm_g_e, integrality_check, mu_report, ring_for,
    ArtinRepOfG, EquivariantL, EtaComponent, GammaConductor, MuReport, PeriodRadical, SQRT_CONVENTION,
};
use crate::error::{Error, Result};
use crate::iwasawa::Sign;
use crate::lvalues::afe::coefficients_for_depth;
use crate::lvalues::build::{
    coset_average, ingest_lambda_table, lambda_table_additive, lambda_table_numeric, reconstruct_table, scale_by_radical,
    trace_relation_check, FormData, NumericTable, TraceReport,
};
use crate::lvalues::periods::real_period_agm;
use crate::lvalues::table::{parse_normalization, LambdaTable};
use crate::pollack::pm_value;

use artifacts::{cyclo_json, json_bytes, padic_json, sha256_hex, ExpansionCache, OutputSet};
use config::{Backend, RepKind, RepSpec, Setup};

/// Normalization of the cyclotomic character on the chosen generator of Gamma.
pub const GAMMA_GENERATOR: &str = "kappa(gamma) = 1 + p";
/// Half-logarithm dividing the reported values.
pub const LOG_VALUES: &str = "log_1";
/// Half-logarithm dividing the values fed to the mu/lambda report.
pub const LOG_MU: &str = "log_0";
/// Complex and p-adic images of roots of unity.
pub const EMBEDDINGS: &str = "zeta_M -> exp(2 pi i / M); zeta_(p^n) -> tower generator, prime-to-p part -> unramified root";
/// Square root of chi_0 chi_0^c(p) for odd conductor exponents of induced representations.
pub const EPSILON_ODD_ROOT: &str = "product of the canonical roots of chi_0(p) and chi_0^c(p)";
/// Reconstruction tolerance for table entries.
pub const TABLE_TOLERANCE: f64 = 1e-8;

fn descriptor(setup: &Setup, extra: &str) -> String {
    let c = &setup.config;
    format!("disc {} curve {:?} conductor {} {extra}", c.disc, c.curve, setup.desk.character.conductor)
}

fn cache_name(label: &str, descriptor: &str) -> String {
    format!("{label}-{}", &sha256_hex(descriptor.as_bytes())[..12])
}

/// Where the exact table came from.
#[derive(Clone, Debug, PartialEq)]
pub enum TableSource {
    /// additive backend plus rational reconstruction
    Reconstructed,
    /// external file with its digest
    Ingested { path: PathBuf, sha256: String },
}

impl TableSource {
    fn json(&self) -> Value {
        match self {
            TableSource::Reconstructed => json!({ "kind": "reconstructed" }),
            TableSource::Ingested { path, sha256 } => json!({ "kind": "ingested", "path": path.display().to_string(), "sha256": sha256 }),
        }
    }
}

/// The curve's own modular symbols.
#[derive(Clone, Debug)]
pub struct BaseBuild {
    pub form: FormData,
    pub omega: f64,
    pub multiplicative: NumericTable,
    pub table: LambdaTable,
    pub trace: TraceReport,
    /// max |coset average of the exact table - multiplicative backend|
    pub backend_gap: f64,
    pub source: TableSource,
}

/// One eta-component with its checks.
#[derive(Clone, Debug)]
pub struct ComponentRecord {
    pub component: EtaComponent,
    pub trace: TraceReport,
    pub backend_gap: f64,
    pub source: TableSource,
}

#[derive(Clone, Debug)]
pub struct EquivariantBuild {
    pub desk: EquivariantDesk,
    pub components: Vec<ComponentRecord>,
    pub plus: EquivariantL,
    pub minus: EquivariantL,
    pub reps: Vec<(RepSpec, ArtinRepOfG)>,
}

impl EquivariantBuild {
    pub fn l(&self, sign: Sign) -> &EquivariantL {
        match sign {
            Sign::Plus => &self.plus,
            Sign::Minus => &self.minus,
        }
    }
}

/// A validated configuration with lazily built, shared intermediate data.
pub struct Pipeline {
    pub setup: Setup,
    pub cache: ExpansionCache,
    base: OnceLock<Result<BaseBuild>>,
    equivariant: OnceLock<Result<Option<EquivariantBuild>>>,
}

impl Pipeline {
    /// `fallback_cache` is used when neither the config nor the environment names one.
    pub fn new(setup: Setup, fallback_cache: &Path) -> Pipeline {
        let dir = setup.config.cache_dir().unwrap_or_else(|| fallback_cache.to_path_buf());
        Pipeline { setup, cache: ExpansionCache::new(dir), base: OnceLock::new(), equivariant: OnceLock::new() }
    }

    pub fn from_text(text: &str, fallback_cache: &Path) -> Result<Pipeline> {
        Ok(Pipeline::new(config::PipelineConfig::parse(text)?.validate()?, fallback_cache))
    }

    pub fn from_file(path: &Path, fallback_cache: &Path) -> Result<Pipeline> {
        Ok(Pipeline::new(config::PipelineConfig::from_file(path)?.validate()?, fallback_cache))
    }

    pub fn p(&self) -> i64 {
        self.setup.config.p
    }

    pub fn eps(&self) -> f64 {
        self.setup.config.eps()
    }

    fn expansion(&self, label: &str, extra: &str, chi: &GrossenChar, n: usize) -> Result<QExpansion> {
        let desc = descriptor(&self.setup, extra);
        self.cache.get_or_compute(&cache_name(label, &desc), &desc, n, |n| chi.q_expansion(n))
    }

    fn ingest_path(&self, label: &str) -> Option<PathBuf> {
        match &self.setup.config.backend {
            Backend::Numeric => None,
            Backend::Ingest(dir) => Some(dir.join(format!("{label}.lambda"))),
        }
    }

    pub fn base(&self) -> Result<&BaseBuild> {
        self.base.get_or_init(|| self.build_base()).as_ref().map_err(Clone::clone)
    }

    pub fn equivariant(&self) -> Result<Option<&EquivariantBuild>> {
        match self.equivariant.get_or_init(|| self.build_equivariant()) {
            Ok(b) => Ok(b.as_ref()),
            Err(e) => Err(e.clone()),
        }
    }

    fn build_base(&self) -> Result<BaseBuild> {
        let c = &self.setup.config;
        let d = &self.setup.desk;
        let n = coefficients_for_depth(d.conductor, d.p, c.n_max, c.eps());
        let exact = self.expansion(&d.label, "eta none", &d.character, n)?;
        let form = FormData::from_expansion(&d.label, &d.character, exact, d.conductor, d.p)?;
        let omega = real_period_agm(&d.curve)?.omega_plus.to_f64();
        let multiplicative = lambda_table_numeric(&form, c.n_max, omega, c.eps())?;
        let (table, trace, gap, source) =
            self.exact_table(&d.label, &form, &multiplicative.table, &|| lambda_table_additive(&form, c.n_max, omega, c.eps()), None)?;
        Ok(BaseBuild { form, omega, multiplicative, table, trace, backend_gap: gap, source })
    }

    /// Exact table from the configured backend, checked against `numeric`
    /// (multiplicative backend, unscaled). For twisted forms `radical` carries
    /// (radicand, degree) so the period ratio can be found or read off the tag.
    fn exact_table(
        &self,
        label: &str,
        form: &FormData,
        numeric: &LambdaTable,
        additive: &dyn Fn() -> Result<NumericTable>,
        radical: Option<PeriodRadical>,
    ) -> Result<(LambdaTable, TraceReport, f64, TableSource)> {
        let c = &self.setup.config;
        match self.ingest_path(label) {
            Some(path) => {
                let text = std::fs::read_to_string(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                let parsed = LambdaTable::from_text(&text)?;
                let k = match parse_normalization(&parsed.normalization) {
                    Some((_, _, k)) => k,
                    None => return Err(Error::Validation(format!("unknown normalization {}", parsed.normalization))),
                };
                let scaled = match radical {
                    Some(r) if r.degree > 1 => scale_by_radical(numeric, r.radicand, r.degree, k)?,
                    _ => numeric.clone(),
                };
                let (table, report) = ingest_lambda_table(&text, &form.eps_p, Some(&scaled.restricted(parsed.n_max.min(c.n_max))), TABLE_TOLERANCE)?;
                if table.n_max < c.n_max {
                    return Err(Error::Validation(format!("{} has depth {} below n_max {}", path.display(), table.n_max, c.n_max)));
                }
                let table = table.restricted(c.n_max);
                let source = TableSource::Ingested { path, sha256: sha256_hex(text.as_bytes()) };
                Ok((table, report.trace, report.max_embedding_error.unwrap_or(0.0), source))
            }
            None => {
                let add = additive()?;
                let (mut table, scaled) = match radical {
                    Some(r) if r.degree > 1 => {
                        let (k, t) = crate::lvalues::build::radical_scale_search(&add.table, r.radicand, r.degree, c.bound, DESK_RECON_EPS)?;
                        let mut t = t;
                        t.normalization = crate::lvalues::table::radical_normalization(r.radicand, r.degree, k);
                        (t, scale_by_radical(numeric, r.radicand, r.degree, k)?)
                    }
                    _ => (reconstruct_table(&add.table, c.bound, DESK_RECON_EPS)?, numeric.clone()),
                };
                table.form_id = label.to_string();
                let trace = trace_relation_check(&table, &form.eps_p, 0.0)?;
                if let Some(f) = trace.failures.first() {
                    return Err(Error::Identity(format!("reconstructed {label} fails the trace relation at level {} a = {}", f.level, f.a)));
                }
                let avg = coset_average(&table)?;
                let mut gap: f64 = 0.0;
                for j in 0..=table.n_max {
                    let units = if j == 0 { vec![0] } else { table.units(j) };
                    for a in units {
                        gap = gap.max((avg.complex(j, a)? - scaled.complex(j, a)?).abs().to_f64());
                    }
                }
                if gap > TABLE_TOLERANCE {
                    return Err(Error::Identity(format!("{label}: additive and multiplicative backends differ by {gap:.3e}")));
                }
                Ok((table, trace, gap, TableSource::Reconstructed))
            }
        }
    }

    fn build_equivariant(&self) -> Result<Option<EquivariantBuild>> {
        let Some(artin) = self.setup.artin.clone() else { return Ok(None) };
        let c = &self.setup.config;
        let d = &self.setup.desk;
        let levels = twist_level_candidates(d.conductor, c.kummer.map(|(r, g)| r * g).unwrap_or(1));
        let (p, depth, eps) = (d.p, c.n_max, c.eps());
        let source = |eta: &FiniteCharacter, chi: &GrossenChar, n: usize| {
            let label = twist_label(&d.label, eta);
            self.expansion(&label, &format!("eta {:?} kummer {:?}", eta.exps, c.kummer), chi, n)
        };
        let desk = equivariant_desk_with(d.clone(), artin, &levels, &|level| coefficients_for_depth(level, p, depth, eps), &source)?;
        let omega = desk.omega_plus();
        let mut components = Vec::new();
        for tf in &desk.forms {
            let label = tf.form.label.clone();
            let numeric = lambda_table_numeric(&tf.form, depth, omega, eps)?;
            let additive = || lambda_table_additive(&tf.form, depth, omega, eps);
            let (table, trace, gap, source) = self.exact_table(&label, &tf.form, &numeric.table, &additive, Some(desk.radical))?;
            let k = parse_normalization(&table.normalization).map(|t| t.2).unwrap_or(0);
            let component = EtaComponent { eta: tf.eta.clone(), table, period_ratio: k, eps_p: tf.form.eps_p.clone() };
            components.push(ComponentRecord { component, trace, backend_gap: gap, source });
        }
        let comps: Vec<EtaComponent> = components.iter().map(|r| r.component.clone()).collect();
        let plus = assemble(Sign::Plus, &desk.group, &desk.frob_p, desk.radical, comps.clone())?;
        let minus = assemble(Sign::Minus, &desk.group, &desk.frob_p, desk.radical, comps)?;
        let reps = c
            .reps
            .iter()
            .map(|spec| Ok((spec.clone(), rep_from_spec(spec, &desk.group, &desk.frob_p, p)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Some(EquivariantBuild { desk, components, plus, minus, reps }))
    }

    /// Base curve as an equivariant object over the trivial group.
    pub fn base_as_equivariant(&self, sign: Sign) -> Result<EquivariantL> {
        let b = self.base()?;
        let group = AbelianGroup::trivial();
        let comp = EtaComponent { eta: FiniteCharacter::trivial(&group), table: b.table.clone(), period_ratio: 0, eps_p: b.form.eps_p.clone() };
        assemble(sign, &group, &[], PeriodRadical::NONE, vec![comp])
    }

    /// mu/lambda report at (p^precision, omega~_m), or None when the tables are too shallow.
    pub fn mu_reports(&self, l: &EquivariantL) -> Result<Option<MuReport>> {
        let c = &self.setup.config;
        if l.depth() < c.mu_m + 1 {
            return Ok(None);
        }
        mu_report(l, c.mu_m, c.precision).map(Some)
    }

    /// Writes every artifact under `out` and returns the manifest.
    pub fn build(&self, out: &Path) -> Result<Value> {
        let c = &self.setup.config;
        let d = &self.setup.desk;
        let mut files = OutputSet::new(out);
        let base = self.base()?;
        files.write(&format!("tables/{}.lambda", d.label), base.table.to_text().as_bytes())?;
        files.write("values/base.json", &json_bytes(&self.base_values_json()?))?;

        let mut mu = serde_json::Map::new();
        let mut integrality = serde_json::Map::new();
        for sign in [Sign::Plus, Sign::Minus] {
            let l = self.base_as_equivariant(sign)?;
            mu.insert(format!("base{sign}"), mu_json(self.mu_reports(&l)?.as_ref()));
            integrality.insert(format!("base{sign}"), integrality_json(&l, self)?);
        }
        let mut components = Vec::new();
        if let Some(eq) = self.equivariant()? {
            for rec in &eq.components {
                let label = &rec.component.table.form_id;
                files.write(&format!("tables/{label}.lambda"), rec.component.table.to_text().as_bytes())?;
                components.push(json!({
                    "eta": rec.component.eta.exps,
                    "form": label,
                    "level": eq.desk.twist_form(&rec.component.eta)?.form.level,
                    "normalization": rec.component.table.normalization,
                    "period_ratio_exponent": rec.component.period_ratio,
                    "trace_relations": trace_json(&rec.trace),
                    "backend_gap": format!("{:.3e}", rec.backend_gap),
                    "source": rec.source.json(),
                }));
            }
            for sign in [Sign::Plus, Sign::Minus] {
                mu.insert(format!("equivariant{sign}"), mu_json(self.mu_reports(eq.l(sign))?.as_ref()));
                integrality.insert(format!("equivariant{sign}"), integrality_json(eq.l(sign), self)?);
            }
            files.write("values/equivariant.json", &json_bytes(&self.rep_values_json(eq)?))?;
        }
        files.write("reports/mu.json", &json_bytes(&Value::Object(mu)))?;
        let checks = json!({
            "base": {
                "form": d.label,
                "level": base.form.level,
                "coefficients": base.form.exact.n_max(),
                "trace_relations": trace_json(&base.trace),
                "backend_gap": format!("{:.3e}", base.backend_gap),
                "source": base.source.json(),
            },
            "components": components,
            "integrality": Value::Object(integrality),
            "euler_factor_at_p": {
                "note": "local factor 1 + p^(1-2s) at s = 1 (a_p = 0); not removed from the values",
                "value": format!("{}/{}", c.p + 1, c.p),
            },
        });
        files.write("reports/checks.json", &json_bytes(&checks))?;
        files.write("reports/findings.json", &json_bytes(&Value::Array(suites::findings(self)?)))?;
        let manifest = self.manifest_json(base)?;
        files.flush_manifest(manifest)
    }

    fn manifest_json(&self, base: &BaseBuild) -> Result<Value> {
        let c = &self.setup.config;
        let mut normalizations = vec![base.table.normalization.clone()];
        if let Some(eq) = self.equivariant()? {
            normalizations.extend(eq.components.iter().map(|r| r.component.table.normalization.clone()));
        }
        normalizations.sort();
        normalizations.dedup();
        Ok(json!({
            "tool": "pmlf",
            "version": env!("CARGO_PKG_VERSION"),
            "config": c,
            "conventions": {
                "gamma_generator": GAMMA_GENERATOR,
                "sqrt": SQRT_CONVENTION,
                "epsilon_odd_root": EPSILON_ODD_ROOT,
                "table_normalization": normalizations,
                "log_values": LOG_VALUES,
                "log_mu": LOG_MU,
                "embeddings": EMBEDDINGS,
            },
            "precisions": {
                "padic_digits": c.precision,
                "complex_digits": c.digits,
                "denominator_bound": c.bound,
                "reconstruction_eps": DESK_RECON_EPS,
                "table_tolerance": TABLE_TOLERANCE,
                "mu_m": c.mu_m,
            },
            "inputs": {
                "curve": self.setup.desk.label,
                "level": self.setup.desk.conductor,
                "character_conductor": self.setup.desk.character.conductor.to_string(),
                "table_source": base.source.json(),
            },
        }))
    }

    /// Plus/minus values at every character of conductor <= p^n_max of matching parity,
    /// the trivial character flagged.
    pub fn base_values_json(&self) -> Result<Value> {
        let c = &self.setup.config;
        let b = self.base()?;
        let mut out = Vec::new();
        for sign in [Sign::Plus, Sign::Minus] {
            for theta in enumerate_gamma_characters(c.p, c.n_max) {
                if !theta.is_trivial() && theta.c % 2 != sign.conductor_parity() {
                    continue;
                }
                let ring = ring_for(c.p, theta.level(), b.table.modulus, c.precision)?;
                let v = pm_value(sign, &b.table, &theta, &b.form.eps_p, &ring)?;
                let mut entry = json!({
                    "sign": sign.to_string(),
                    "theta": theta_json(&theta),
                    "algebraic": cyclo_json(&v.algebraic),
                    "log": padic_json(&v.log),
                    "value": padic_json(&v.value),
                    "periods": { "omega_plus": 1, "omega_minus": 0 },
                });
                if theta.is_trivial() {
                    entry["flag"] = json!("trivial character: outside the interpolation range");
                }
                out.push(entry);
            }
        }
        Ok(json!({ "form": self.setup.desk.label, "values": out }))
    }

    pub fn rep_values_json(&self, eq: &EquivariantBuild) -> Result<Value> {
        let c = &self.setup.config;
        let mut out = Vec::new();
        for (spec, rho) in &eq.reps {
            let theta = rho.chi_prime();
            let ring = ring_for(c.p, theta.level(), eq.plus.modulus, c.precision)?;
            let eps = epsilon_factor(rho, &eq.desk.group, &eq.desk.frob_p)?;
            let mut entry = json!({
                "rep": spec.to_text(),
                "gamma_conductor": conductor_json(classify_gamma_conductor(rho)),
                "epsilon": { "value": cyclo_json(&eps.value), "flag": eps.flag },
            });
            match evaluate_l_pm_g_e(&eq.plus, &eq.minus, rho, &ring) {
                Ok(v) => {
                    entry["algebraic"] = cyclo_json(&v.algebraic);
                    entry["value"] = padic_json(&v.value);
                    entry["periods"] = json!({ "omega_plus": v.plus_exp, "omega_minus": v.minus_exp, "radical_exponent": v.radical_exp });
                    entry["flags"] = json!(v.flags);
                }
                Err(Error::NotCovered(msg)) => entry["flags"] = json!([msg]),
                Err(e) => return Err(e),
            }
            out.push(entry);
        }
        Ok(json!({ "sqrt_convention": SQRT_CONVENTION, "values": out }))
    }
}

/// Levels N * prod q^e over the primes q dividing `extra`, e <= 6, up to 2^12 N.
pub fn twist_level_candidates(level: i64, extra: i64) -> Vec<i64> {
    let mut primes = Vec::new();
    let mut m = extra.abs();
    let mut q = 2;
    while m > 1 {
        if m % q == 0 {
            primes.push(q);
            while m % q == 0 {
                m /= q;
            }
        }
        q += 1;
    }
    let mut out = vec![level];
    for q in primes {
        let mut next = Vec::new();
        for &n in &out {
            let mut x = n;
            for _ in 0..=6 {
                next.push(x);
                x *= q;
            }
        }
        out = next;
    }
    out.retain(|&n| n <= level << 12);
    out.sort();
    out.dedup();
    out
}

pub fn rep_from_spec(spec: &RepSpec, group: &AbelianGroup, frob_p: &[i64], p: i64) -> Result<ArtinRepOfG> {
    let chi0 = FiniteCharacter::new(group, spec.chi0.clone())?;
    let theta = GammaCharacter::new(p, spec.theta.0, spec.theta.1).map_err(|e| Error::Config(e.to_string()))?;
    match spec.kind {
        RepKind::Induced => ArtinRepOfG::induced(group, chi0, theta),
        RepKind::OneDim => {
            let rho0 = CycloNumber::root_of_unity(2 * group.exponent(), spec.rho0.unwrap_or(0));
            ArtinRepOfG::one_dim(group, frob_p, chi0, theta, rho0)
        }
    }
}

/// Every irreducible representation with Gamma-conductor exponent in `cs`:
/// one-dimensional for c-fixed chi_0 (both square roots of chi_0(p)), induced
/// for one chi_0 of each c-orbit.
pub fn all_reps(group: &AbelianGroup, frob_p: &[i64], p: i64, cs: &[u32]) -> Result<Vec<ArtinRepOfG>> {
    let mut out = Vec::new();
    let mut seen = Vec::new();
    for chi0 in enumerate_dual(group) {
        if seen.contains(&chi0) {
            continue;
        }
        let c_image = chi0.compose_c(group);
        seen.push(chi0.clone());
        seen.push(c_image.clone());
        for &c in cs {
            for theta in enumerate_gamma_characters(p, c).into_iter().filter(|t| t.c == c) {
                if c_image == chi0 {
                    let (m, e) = crate::cyclo::canonical_sqrt_exponent(chi0.exponent_modulus(), chi0.value_exponent(frob_p));
                    for sign in [1, -1] {
                        let root = &CycloNumber::root_of_unity(m, e) * &CycloNumber::from_int(1, sign);
                        out.push(ArtinRepOfG::one_dim(group, frob_p, chi0.clone(), theta, root)?);
                    }
                } else {
                    out.push(ArtinRepOfG::induced(group, chi0.clone(), theta)?);
                }
            }
        }
    }
    Ok(out)
}

pub fn theta_json(t: &GammaCharacter) -> Value {
    json!({ "p": t.p, "conductor_exponent": t.c, "exponent": t.e })
}

fn conductor_json(g: GammaConductor) -> Value {
    match g {
        GammaConductor::Even(n) => json!({ "parity": "even", "exponent": n }),
        GammaConductor::Odd(n) => json!({ "parity": "odd", "exponent": n }),
        GammaConductor::Unramified => json!({ "parity": "unramified", "exponent": 0 }),
    }
}

pub fn trace_json(t: &TraceReport) -> Value {
    json!({
        "exact": t.exact,
        "checked": t.checked,
        "failures": t.failures.len(),
        "max_error": format!("{:.3e}", t.max_error),
    })
}

pub fn mu_json(r: Option<&MuReport>) -> Value {
    let Some(r) = r else { return json!({ "skipped": "table depth below mu_m + 1" }) };
    let comps: Vec<Value> = r
        .components
        .iter()
        .map(|c| match &c.mu_lambda {
            Some(ml) => json!({ "eta": c.eta.exps, "mu": ml.mu.to_string(), "lambda": ml.lambda, "certified": ml.certified }),
            None => json!({ "eta": c.eta.exps, "note": c.note }),
        })
        .collect();
    let statement = match r.independent {
        Some(true) => "mu is independent of eta",
        Some(false) => "mu depends on eta",
        None => "undetermined: some mu not certified",
    };
    json!({
        "sign": r.sign.to_string(),
        "precision": r.precision,
        "m": r.m,
        "log_normalization": LOG_MU,
        "components": comps,
        "independent": r.independent,
        "statement": statement,
    })
}

fn integrality_json(l: &EquivariantL, pipe: &Pipeline) -> Result<Value> {
    let c = &pipe.setup.config;
    let ring = ring_for(c.p, 0, l.modulus, c.precision)?;
    let vals = integrality_check(l, c.n_max, &ring)?;
    let min = vals.iter().map(|v| v.2).min();
    Ok(json!({ "checked": vals.len(), "min_valuation": min.map(|m| m.to_string()) }))
}

/// log^sign_r at every character of conductor <= p^n_max (exact zeros marked,
/// the trivial character flagged) and the series modulo (p^precision, T^len).
pub fn logpm_json(p: i64, sign: Sign, r: u32, n_max: u32, precision: u32, len: usize) -> Result<Value> {
    if p < 3 || !crate::arith::is_prime(p) {
        return Err(Error::Config(format!("p = {p} must be an odd prime")));
    }
    if n_max > 8 || crate::arith::ipow(p, n_max) > 1_000_000 || precision < 1 {
        return Err(Error::Config("need p^n_max <= 10^6 and precision >= 1".into()));
    }
    let ring = ring_for(p, n_max, 1, precision)?;
    let mut values = Vec::new();
    for theta in enumerate_gamma_characters(p, n_max) {
        let v = crate::pollack::log_pm_at_character(sign, r, &theta, 0, &ring.at_level(theta.level())?)?;
        let mut entry = json!({ "theta": theta_json(&theta), "value": padic_json(&v), "exact_zero": v.is_exact_zero() });
        if theta.is_trivial() {
            entry["flag"] = json!("trivial character: the conductor-parity zero rule does not decide this entry");
        }
        values.push(entry);
    }
    let series = crate::pollack::log_pm_series(sign, r, p, len, precision)?;
    let coeffs: Vec<Value> = series.coeffs().iter().map(padic_json).collect();
    Ok(json!({
        "p": p,
        "sign": sign.to_string(),
        "r": r,
        "n_max": n_max,
        "precision": precision,
        "conventions": { "gamma_generator": GAMMA_GENERATOR, "embeddings": EMBEDDINGS },
        "values": values,
        "series": { "truncation": series.truncation(), "growth": series.growth().to_string(), "coeffs": coeffs },
    }))
}
