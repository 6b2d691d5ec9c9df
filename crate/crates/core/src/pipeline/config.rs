//! Line-oriented `key = value` configuration and its validation.

use std::path::PathBuf;
use std::sync::Arc;

use serde::Serialize;

use crate::arith::{is_prime, ipow};
use crate::cm::{character_for_curve, ArtinData, DeskCurve, PrimeSplitting, QuadField, Weierstrass};
use crate::error::{Error, Result};

/// Environment variable naming the cache directory when the config has none.
pub const CACHE_ENV: &str = "PMLF_CACHE";

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Backend {
    Numeric,
    Ingest(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub label: String,
    /// a1 a2 a3 a4 a6
    pub curve: [i64; 5],
    pub p: i64,
    pub n_max: u32,
    /// p-adic precision N (absolute, in powers of p)
    pub precision: u32,
    /// complex working accuracy 10^-digits
    pub digits: u32,
    pub disc: i64,
    /// F = K(radicand^(1/degree))
    pub kummer: Option<(i64, i64)>,
    pub c_action: String,
    /// denominator bound for exact reconstruction
    pub bound: i64,
    pub backend: Backend,
    pub cache: Option<PathBuf>,
    /// m in omega~_m for the mu/lambda report
    pub mu_m: u32,
    /// representations of the full group to evaluate at
    pub reps: Vec<RepSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RepKind {
    OneDim,
    Induced,
}

/// `kind chi0=e1,e2.. theta=c:e [rho0=k]`; rho0 is the exponent of rho_0(p)
/// as a power of exp(2 pi i / (2 * exponent of A)).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RepSpec {
    pub kind: RepKind,
    pub chi0: Vec<i64>,
    pub theta: (u32, i64),
    pub rho0: Option<i64>,
}

impl RepSpec {
    pub fn parse(text: &str) -> Result<RepSpec> {
        let bad = || Error::Config(format!("rep '{text}': expected 'onedim|induced chi0=E,.. theta=C:E [rho0=K]'"));
        let mut toks = text.split_whitespace();
        let kind = match toks.next() {
            Some("onedim") => RepKind::OneDim,
            Some("induced") => RepKind::Induced,
            _ => return Err(bad()),
        };
        let (mut chi0, mut theta, mut rho0) = (None, None, None);
        for t in toks {
            let (k, v) = t.split_once('=').ok_or_else(bad)?;
            match k {
                "chi0" => chi0 = Some(v.split(',').map(|x| parse_num("chi0", x)).collect::<Result<Vec<i64>>>()?),
                "theta" => {
                    let (c, e) = v.split_once(':').ok_or_else(bad)?;
                    theta = Some((parse_num("theta", c)?, parse_num("theta", e)?));
                }
                "rho0" => rho0 = Some(parse_num("rho0", v)?),
                _ => return Err(bad()),
            }
        }
        let spec = RepSpec { kind, chi0: chi0.ok_or_else(bad)?, theta: theta.ok_or_else(bad)?, rho0 };
        if (spec.kind == RepKind::OneDim) != spec.rho0.is_some() {
            return Err(Error::Config(format!("rep '{text}': rho0 is required for onedim and only for onedim")));
        }
        Ok(spec)
    }

    pub fn to_text(&self) -> String {
        let kind = match self.kind {
            RepKind::OneDim => "onedim",
            RepKind::Induced => "induced",
        };
        let chi0 = self.chi0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",");
        let mut s = format!("{kind} chi0={chi0} theta={}:{}", self.theta.0, self.theta.1);
        if let Some(k) = self.rho0 {
            s += &format!(" rho0={k}");
        }
        s
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            label: "E".into(),
            curve: [0, 0, 0, -1, 0],
            p: 3,
            n_max: 3,
            precision: 8,
            digits: 15,
            disc: -4,
            kummer: None,
            c_action: "inversion".into(),
            bound: 1000,
            backend: Backend::Numeric,
            cache: None,
            mu_m: 2,
            reps: Vec::new(),
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Config(format!("{key}: cannot parse '{v}'")))
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<PipelineConfig> {
        let mut c = PipelineConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "label" => c.label = value.to_string(),
                "curve" => {
                    let v: Vec<i64> = value.split_whitespace().map(|t| parse_num(key, t)).collect::<Result<_>>()?;
                    c.curve = v.try_into().map_err(|_| Error::Config("curve needs five a-invariants".into()))?;
                }
                "p" => c.p = parse_num(key, value)?,
                "n_max" => c.n_max = parse_num(key, value)?,
                "precision" => c.precision = parse_num(key, value)?,
                "digits" => c.digits = parse_num(key, value)?,
                "disc" => c.disc = parse_num(key, value)?,
                "kummer" => {
                    c.kummer = if value == "none" {
                        None
                    } else {
                        let v: Vec<i64> = value.split_whitespace().map(|t| parse_num(key, t)).collect::<Result<_>>()?;
                        match v[..] {
                            [r, d] => Some((r, d)),
                            _ => return Err(Error::Config("kummer needs 'radicand degree'".into())),
                        }
                    }
                }
                "c_action" => c.c_action = value.to_string(),
                "bound" => c.bound = parse_num(key, value)?,
                "backend" => {
                    c.backend = match value.split_once(':') {
                        None if value == "numeric" => Backend::Numeric,
                        Some(("ingest", path)) => Backend::Ingest(PathBuf::from(path.trim())),
                        _ => return Err(Error::Config(format!("backend must be numeric or ingest:PATH, got '{value}'"))),
                    }
                }
                "cache" => c.cache = Some(PathBuf::from(value)),
                "mu_m" => c.mu_m = parse_num(key, value)?,
                "rep" => c.reps.push(RepSpec::parse(value)?),
                _ => return Err(Error::Config(format!("unknown key '{key}'"))),
            }
        }
        Ok(c)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s += &format!("label = {}\n", self.label);
        s += &format!("curve = {}\n", self.curve.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" "));
        s += &format!("p = {}\nn_max = {}\nprecision = {}\ndigits = {}\ndisc = {}\n", self.p, self.n_max, self.precision, self.digits, self.disc);
        s += &match self.kummer {
            Some((r, d)) => format!("kummer = {r} {d}\n"),
            None => "kummer = none\n".into(),
        };
        s += &format!("c_action = {}\nbound = {}\n", self.c_action, self.bound);
        s += &match &self.backend {
            Backend::Numeric => "backend = numeric\n".into(),
            Backend::Ingest(p) => format!("backend = ingest:{}\n", p.display()),
        };
        if let Some(c) = &self.cache {
            s += &format!("cache = {}\n", c.display());
        }
        s += &format!("mu_m = {}\n", self.mu_m);
        for r in &self.reps {
            s += &format!("rep = {}\n", r.to_text());
        }
        s
    }

    /// Reads a config file; relative ingest and cache paths are taken from its directory.
    pub fn from_file(path: &std::path::Path) -> Result<PipelineConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut c = PipelineConfig::parse(&text)?;
        let dir = path.parent().unwrap_or(std::path::Path::new("."));
        if let Backend::Ingest(p) = &c.backend {
            if p.is_relative() {
                c.backend = Backend::Ingest(dir.join(p));
            }
        }
        if let Some(p) = &c.cache {
            if p.is_relative() {
                c.cache = Some(dir.join(p));
            }
        }
        Ok(c)
    }

    pub fn eps(&self) -> f64 {
        10f64.powi(-(self.digits as i32))
    }

    pub fn cache_dir(&self) -> Option<PathBuf> {
        self.cache.clone().or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
    }

    /// Checks the arithmetic hypotheses and resolves the curve's Grossencharacter.
    pub fn validate(&self) -> Result<Setup> {
        let p = self.p;
        if p < 3 || !is_prime(p) {
            return Err(Error::Config(format!("p = {p} must be an odd prime")));
        }
        if self.n_max < 1 || self.precision < 2 || !(8..=30).contains(&self.digits) {
            return Err(Error::Config("need n_max >= 1, precision >= 2 and 8 <= digits <= 30".into()));
        }
        let [a1, a2, a3, a4, a6] = self.curve;
        let curve = Weierstrass { a1, a2, a3, a4, a6 };
        let disc = curve.discriminant();
        if disc == 0 {
            return Err(Error::Config("singular curve".into()));
        }
        if disc % p as i128 == 0 {
            return Err(Error::Config(format!("curve has bad reduction at {p}")));
        }
        if curve.point_count_ap(p)? != 0 {
            return Err(Error::Config(format!("curve is not supersingular at {p}")));
        }
        let field: Arc<QuadField> = QuadField::new(self.disc).map_err(|e| Error::Config(e.to_string()))?;
        if !matches!(field.factor_rational_prime(p)?, PrimeSplitting::Inert(_)) {
            return Err(Error::Config(format!("{p} is not inert in K")));
        }
        let character = character_for_curve(&field, &curve, 150).map_err(|e| Error::Config(e.to_string()))?;
        let conductor = self.disc.abs() * field.norm(character.conductor);
        let desk = DeskCurve { label: self.label.clone(), curve, character, p, conductor };
        let artin = match self.kummer {
            None => None,
            Some((radicand, degree)) => {
                if self.c_action != "inversion" {
                    return Err(Error::Config(format!("unsupported c_action '{}'", self.c_action)));
                }
                if (radicand * degree) % p == 0 {
                    return Err(Error::Config(format!("{p} ramifies in F")));
                }
                Some(ArtinData::kummer(&field, radicand, degree).map_err(|e| Error::Config(e.to_string()))?)
            }
        };
        if self.bound < 2 || self.bound > 100_000 {
            return Err(Error::Config("bound must lie in 2..=100000".into()));
        }
        if self.n_max > 8 || ipow(p, self.n_max) > 1_000_000 {
            return Err(Error::Config("p^n_max exceeds 10^6".into()));
        }
        if !self.reps.is_empty() && artin.is_none() {
            return Err(Error::Config("rep entries need kummer data".into()));
        }
        Ok(Setup { config: self.clone(), desk, artin })
    }
}

/// A validated configuration with its arithmetic data.
#[derive(Clone, Debug)]
pub struct Setup {
    pub config: PipelineConfig,
    pub desk: DeskCurve,
    pub artin: Option<ArtinData>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_validation() {
        let text = "label = 32a\ncurve = 0 0 0 -1 0\np = 3\nn_max = 2\nkummer = 2 4\n# comment\nbackend = ingest:/tmp/x\nrep = onedim chi0=0 theta=3:1 rho0=0\nrep = induced chi0=1 theta=2:1\n";
        let c = PipelineConfig::parse(text).unwrap();
        assert_eq!(c.kummer, Some((2, 4)));
        assert_eq!(c.reps[1], RepSpec { kind: RepKind::Induced, chi0: vec![1], theta: (2, 1), rho0: None });
        assert_eq!(c.backend, Backend::Ingest("/tmp/x".into()));
        assert_eq!(PipelineConfig::parse(&c.to_text()).unwrap(), c);
        let s = c.validate().unwrap();
        assert_eq!(s.desk.conductor, 32);
        assert!(s.artin.is_some());
    }

    #[test]
    fn invalid_configurations() {
        let bad = |t: &str| PipelineConfig::parse(t).and_then(|c| c.validate().map(|_| ())).unwrap_err();
        assert!(matches!(bad("p = 5\n"), Error::Config(_)), "5 splits in Q(i)");
        assert!(matches!(bad("p = 9\n"), Error::Config(_)));
        assert!(matches!(bad("curve = 0 0 1 0 0\n"), Error::Config(_)), "27a is not CM by Q(i)");
        assert!(matches!(bad("kummer = 3 4\n"), Error::Config(_)), "3 ramifies");
        assert!(matches!(bad("frobnicate = 1\n"), Error::Config(_)));
        assert!(matches!(bad("n_max\n"), Error::Config(_)));
        assert!(matches!(bad("kummer = 2 4\nrep = onedim chi0=0 theta=3:1\n"), Error::Config(_)));
        assert!(matches!(bad("rep = induced chi0=1 theta=2:1\n"), Error::Config(_)), "no kummer data");
    }
}
