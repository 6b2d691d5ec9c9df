//! Tables of normalized twisted L-value data lambda(a/p^j) and their
//! line-oriented file format.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::arith::{gcd, ipow};
use crate::cyclo::CycloNumber;
use crate::dd::{CDD, DD};
use crate::error::{Error, Result};

/// Entry storage: exact elements of Q(zeta_M) or complex floats.
#[derive(Clone, Debug, PartialEq)]
pub enum Entries {
    Exact(BTreeMap<(u32, i64), CycloNumber>),
    Float(BTreeMap<(u32, i64), CDD>),
}

/// lambda(a/p^j) for 0 <= j <= n_max and units a mod p^j, plus lambda(0) at key (0, 0).
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaTable {
    pub p: i64,
    pub n_max: u32,
    pub form_id: String,
    pub modulus: i64,
    pub normalization: String,
    pub entries: Entries,
}

pub const NORMALIZATION: &str = "OMEGA_PLUS";

/// Normalization tag for a table divided by Omega_+ * radicand^(k/degree).
pub fn radical_normalization(radicand: i64, degree: i64, k: i64) -> String {
    if k == 0 {
        NORMALIZATION.to_string()
    } else {
        format!("{NORMALIZATION}*{radicand}^({k}/{degree})")
    }
}

/// (radicand, degree, k) of a normalization tag; plain Omega_+ gives (1, 1, 0).
pub fn parse_normalization(tag: &str) -> Option<(i64, i64, i64)> {
    if tag == NORMALIZATION {
        return Some((1, 1, 0));
    }
    let rest = tag.strip_prefix(NORMALIZATION)?.strip_prefix('*')?;
    let (r, frac) = rest.split_once("^(")?;
    let (k, d) = frac.strip_suffix(')')?.split_once('/')?;
    Some((r.parse().ok()?, d.parse().ok()?, k.parse().ok()?))
}

impl LambdaTable {
    pub fn new_exact(p: i64, n_max: u32, form_id: &str, modulus: i64) -> LambdaTable {
        LambdaTable {
            p,
            n_max,
            form_id: form_id.to_string(),
            modulus,
            normalization: NORMALIZATION.into(),
            entries: Entries::Exact(BTreeMap::new()),
        }
    }

    pub fn new_float(p: i64, n_max: u32, form_id: &str, modulus: i64) -> LambdaTable {
        LambdaTable {
            p,
            n_max,
            form_id: form_id.to_string(),
            modulus,
            normalization: NORMALIZATION.into(),
            entries: Entries::Float(BTreeMap::new()),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.entries, Entries::Exact(_))
    }

    /// Canonical key for lambda(a/p^j): strips common factors of p.
    pub fn key(&self, mut j: u32, a: i64) -> (u32, i64) {
        let mut a = a.rem_euclid(ipow(self.p, j));
        while j > 0 && a % self.p == 0 {
            a /= self.p;
            j -= 1;
        }
        if j == 0 {
            (0, 0)
        } else {
            (j, a)
        }
    }

    pub fn insert_exact(&mut self, j: u32, a: i64, v: CycloNumber) {
        let k = self.key(j, a);
        let v = v.coerce(self.modulus).unwrap_or(v);
        match &mut self.entries {
            Entries::Exact(m) => {
                m.insert(k, v);
            }
            Entries::Float(_) => panic!("exact entry in a float table"),
        }
    }

    pub fn insert_float(&mut self, j: u32, a: i64, v: CDD) {
        let k = self.key(j, a);
        match &mut self.entries {
            Entries::Float(m) => {
                m.insert(k, v);
            }
            Entries::Exact(_) => panic!("float entry in an exact table"),
        }
    }

    pub fn exact(&self, j: u32, a: i64) -> Result<CycloNumber> {
        let k = self.key(j, a);
        match &self.entries {
            Entries::Exact(m) => m.get(&k).cloned().ok_or_else(|| Error::MissingLambda(format!("lambda({}/{}^{})", k.1, self.p, k.0))),
            Entries::Float(_) => Err(Error::Usage("exact value requested from a float table".into())),
        }
    }

    /// Complex value (the standard embedding for exact tables).
    pub fn complex(&self, j: u32, a: i64) -> Result<CDD> {
        let k = self.key(j, a);
        match &self.entries {
            Entries::Exact(m) => m
                .get(&k)
                .map(|v| v.complex_embed(1))
                .ok_or_else(|| Error::MissingLambda(format!("lambda({}/{}^{})", k.1, self.p, k.0))),
            Entries::Float(m) => m.get(&k).copied().ok_or_else(|| Error::MissingLambda(format!("lambda({}/{}^{})", k.1, self.p, k.0))),
        }
    }

    /// Units a mod p^j in ascending order.
    pub fn units(&self, j: u32) -> Vec<i64> {
        let m = ipow(self.p, j);
        (1..m).filter(|&a| gcd(a, self.p) == 1).collect()
    }

    /// Table with entries only up to level `depth`.
    pub fn restricted(&self, depth: u32) -> LambdaTable {
        let mut out = self.clone();
        out.n_max = depth.min(self.n_max);
        match &mut out.entries {
            Entries::Exact(m) => m.retain(|k, _| k.0 <= depth),
            Entries::Float(m) => m.retain(|k, _| k.0 <= depth),
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(
            s,
            "p {} n_max {} form_id {} field_modulus {} normalization {}",
            self.p, self.n_max, self.form_id, self.modulus, self.normalization
        )
        .unwrap();
        match &self.entries {
            Entries::Exact(m) => {
                for ((j, a), v) in m {
                    write!(s, "LAMBDA {j} {a}").unwrap();
                    for c in v.coeff_strings() {
                        write!(s, " {c}").unwrap();
                    }
                    s.push('\n');
                }
            }
            Entries::Float(m) => {
                for ((j, a), v) in m {
                    writeln!(s, "LAMBDAF {j} {a} {:e} {:e}", v.re.to_f64(), v.im.to_f64()).unwrap();
                }
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<LambdaTable> {
        let mut table: Option<LambdaTable> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: String| Error::Format { line: line_no, msg };
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks[0] {
                "p" => {
                    if table.is_some() {
                        return Err(bad("duplicate header".into()));
                    }
                    if toks.len() != 10
                        || toks[2] != "n_max"
                        || toks[4] != "form_id"
                        || toks[6] != "field_modulus"
                        || toks[8] != "normalization"
                    {
                        return Err(bad("header must read: p P n_max N form_id ID field_modulus M normalization OMEGA_PLUS".into()));
                    }
                    let p: i64 = toks[1].parse().map_err(|_| bad("p".into()))?;
                    let n_max: u32 = toks[3].parse().map_err(|_| bad("n_max".into()))?;
                    let modulus: i64 = toks[7].parse().map_err(|_| bad("field_modulus".into()))?;
                    if parse_normalization(toks[9]).is_none() {
                        return Err(bad(format!("unsupported normalization {}", toks[9])));
                    }
                    table = Some(LambdaTable {
                        p,
                        n_max,
                        form_id: toks[5].to_string(),
                        modulus,
                        normalization: toks[9].to_string(),
                        entries: Entries::Exact(BTreeMap::new()),
                    });
                }
                "LAMBDA" | "LAMBDAF" => {
                    let t = table.as_mut().ok_or_else(|| bad("entry before header".into()))?;
                    if toks.len() < 3 {
                        return Err(bad("entry needs j and a".into()));
                    }
                    let j: u32 = toks[1].parse().map_err(|_| bad("j".into()))?;
                    let a: i64 = toks[2].parse().map_err(|_| bad("a".into()))?;
                    if j > t.n_max {
                        return Err(bad(format!("level {j} exceeds n_max {}", t.n_max)));
                    }
                    if (j == 0 && a != 0) || (j > 0 && (a <= 0 || a >= ipow(t.p, j) || a % t.p == 0)) {
                        return Err(bad(format!("a = {a} is not a reduced unit mod p^{j}")));
                    }
                    let fresh = match &t.entries {
                        Entries::Exact(m) => m.is_empty(),
                        Entries::Float(m) => m.is_empty(),
                    };
                    if toks[0] == "LAMBDA" {
                        if !t.is_exact() {
                            return Err(bad("mixed exact and float entries".into()));
                        }
                        let deg = crate::arith::euler_phi(t.modulus) as usize;
                        if toks.len() != 3 + deg {
                            return Err(bad(format!("expected {deg} coefficients")));
                        }
                        let v = CycloNumber::from_coeff_strings(t.modulus, &toks[3..]).map_err(|_| bad("bad rational".into()))?;
                        t.insert_exact(j, a, v);
                    } else {
                        if t.is_exact() {
                            if !fresh {
                                return Err(bad("mixed exact and float entries".into()));
                            }
                            t.entries = Entries::Float(BTreeMap::new());
                        }
                        if toks.len() != 5 {
                            return Err(bad("LAMBDAF needs re and im".into()));
                        }
                        let re: f64 = toks[3].parse().map_err(|_| bad("re".into()))?;
                        let im: f64 = toks[4].parse().map_err(|_| bad("im".into()))?;
                        t.insert_float(j, a, CDD::new(DD::new(re), DD::new(im)));
                    }
                }
                other => return Err(bad(format!("unknown record {other}"))),
            }
        }
        table.ok_or(Error::Format { line: 0, msg: "missing header".into() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_exact() {
        let mut t = LambdaTable::new_exact(3, 1, "toy", 4);
        t.insert_exact(0, 0, CycloNumber::from_ratio(4, 1, 4));
        t.insert_exact(1, 1, CycloNumber::root_of_unity(4, 1));
        t.insert_exact(1, 2, CycloNumber::from_ratio(4, -3, 8));
        let s = t.to_text();
        let back = LambdaTable::from_text(&s).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.to_text(), s);
        assert_eq!(back.exact(2, 3).unwrap(), back.exact(1, 1).unwrap());
    }

    #[test]
    fn round_trip_float() {
        let mut t = LambdaTable::new_float(3, 1, "toy", 1);
        t.insert_float(0, 0, CDD::new(DD::new(0.25), DD::ZERO));
        t.insert_float(1, 1, CDD::new(DD::new(-0.1), DD::new(1e-17)));
        let s = t.to_text();
        assert_eq!(LambdaTable::from_text(&s).unwrap().to_text(), s);
    }

    #[test]
    fn rejects_malformed() {
        assert!(LambdaTable::from_text("LAMBDA 0 0 1\n").is_err());
        let bad = "p 3 n_max 1 form_id x field_modulus 1 normalization OMEGA_PLUS\nLAMBDA 1 3 1\n";
        assert!(matches!(LambdaTable::from_text(bad), Err(Error::Format { line: 2, .. })));
    }
}
