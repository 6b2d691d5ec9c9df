//! Central values L(g, 1) of weight-two L-series by the smoothed approximate
//! functional equation, with the root number solved from two split points.

use crate::dd::{CDD, DD};
use crate::error::{Error, Result};
use rayon::prelude::*;

pub const SPLIT_POINTS: [f64; 5] = [1.0, 1.15, 0.87, 1.3, 0.77];
/// Fallback points when the standard ones barely move the dual sum.
pub const WIDE_SPLIT_POINTS: [f64; 5] = [1.0, 2.0, 0.5, 3.0, 1.0 / 3.0];
pub const ROOT_NUMBER_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug)]
pub struct AfeResult {
    pub value: CDD,
    pub root_number: CDD,
    /// ||w| - 1|
    pub w_error: f64,
    /// |L(t3) - L(t1)|, the value recomputed at a third split point.
    pub split_spread: f64,
    pub terms: usize,
}

/// Number of coefficients needed for truncation error below eps at conductor q.
pub fn terms_needed(q: f64, eps: f64) -> usize {
    terms_needed_at(&SPLIT_POINTS, q, eps)
}

pub fn terms_needed_at(points: &[f64], q: f64, eps: f64) -> usize {
    let tmin = points.iter().fold(f64::INFINITY, |m, &t| m.min(t.min(1.0 / t)));
    (q.sqrt() * (1.0 / eps).ln() / (2.0 * std::f64::consts::PI * tmin)).ceil() as usize + 1
}

/// Coefficients sufficient for every twist of modulus up to p^depth of a form
/// of the given level, wide split points included.
pub fn coefficients_for_depth(level: i64, p: i64, depth: u32, eps: f64) -> usize {
    let m = (p as f64).powi(depth as i32);
    terms_needed_at(&WIDE_SPLIT_POINTS, level as f64 * m * m, eps)
}

/// sum_{n <= len} c(n)/n * exp(-2 pi n x / sqrt(q)), ascending n.
fn smoothed_sum(c: &dyn Fn(usize) -> CDD, q: f64, x: f64, len: usize) -> CDD {
    let rate = 2.0 * std::f64::consts::PI * x / q.sqrt();
    let mut acc = CDD::ZERO;
    for n in 1..=len {
        let k = (-rate * n as f64).exp();
        if k < 1e-300 {
            break;
        }
        let cn = c(n);
        if cn == CDD::ZERO {
            continue;
        }
        acc = acc + cn.scale(DD::new(k / n as f64));
    }
    acc
}

/// L(1) for an L-series with coefficients `coef` whose completed function
/// satisfies Lambda(s) = w Lambda~(2 - s) at conductor q, the dual having
/// coefficients `dual`.
pub fn lvalue_afe(coef: &dyn Fn(usize) -> CDD, dual: &dyn Fn(usize) -> CDD, available: usize, q: f64, eps: f64) -> Result<AfeResult> {
    let need = terms_needed(q, eps);
    if need > available {
        return Err(Error::InsufficientCoefficients { need, have: available });
    }
    let run = |points: &[f64], need: usize| -> Result<(AfeResult, f64)> {
        let sums: Vec<(CDD, CDD)> = points
            .iter()
            .map(|&t| (smoothed_sum(coef, q, t, need), smoothed_sum(dual, q, 1.0 / t, need)))
            .collect();
        solve_root_number(&sums, need)
    };
    let (r, sep) = run(&SPLIT_POINTS, need)?;
    if sep > 1e-6 {
        return Ok(r);
    }
    let wide = terms_needed_at(&WIDE_SPLIT_POINTS, q, eps);
    if wide > available {
        return Ok(r);
    }
    match run(&WIDE_SPLIT_POINTS, wide) {
        Ok((r2, sep2)) if sep2 > sep => Ok(r2),
        _ => Ok(r),
    }
}

/// L(1) with the root number supplied; the spread over all split points certifies it.
pub fn lvalue_with_root_number(
    coef: &dyn Fn(usize) -> CDD,
    dual: &dyn Fn(usize) -> CDD,
    available: usize,
    q: f64,
    eps: f64,
    w: CDD,
) -> Result<AfeResult> {
    let need = terms_needed(q, eps);
    if need > available {
        return Err(Error::InsufficientCoefficients { need, have: available });
    }
    let vals: Vec<CDD> = SPLIT_POINTS
        .iter()
        .map(|&t| smoothed_sum(coef, q, t, need) + w * smoothed_sum(dual, q, 1.0 / t, need))
        .collect();
    let value = vals[0];
    let spread = vals.iter().fold(0.0f64, |m, v| m.max((*v - value).abs().to_f64()));
    Ok(AfeResult { value, root_number: w, w_error: (w.abs().to_f64() - 1.0).abs(), split_spread: spread, terms: need })
}

/// Root number from the best-separated pair of split points; the remaining
/// points measure the spread of the resulting value.
/// Also returns the relative separation of the chosen dual sums.
fn solve_root_number(sums: &[(CDD, CDD)], terms: usize) -> Result<(AfeResult, f64)> {
    let mut best = (0, 1, -1.0);
    for i in 0..sums.len() {
        for j in i + 1..sums.len() {
            let d = (sums[i].1 - sums[j].1).abs().to_f64();
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    let (i, j, d) = best;
    let scale = sums.iter().fold(0.0f64, |m, (a, b)| m.max(a.abs().to_f64()).max(b.abs().to_f64()));
    if d < 1e-14 * scale.max(1e-300) {
        return Err(Error::RootNumber("split points do not separate the dual sum".into()));
    }
    let (a1, b1) = sums[i];
    let (a2, b2) = sums[j];
    let w = (a2 - a1) * (b1 - b2).inv();
    let value = a1 + w * b1;
    let mut spread: f64 = 0.0;
    for (k, (a, b)) in sums.iter().enumerate() {
        if k != i && k != j {
            spread = spread.max((*a + w * *b - value).abs().to_f64());
        }
    }
    let w_error = (w.abs().to_f64() - 1.0).abs();
    // an ill-conditioned w moves the value by about |dw| |B|
    spread = spread.max(w_error * b1.abs().to_f64());
    Ok((AfeResult { value, root_number: w, w_error, split_spread: spread, terms }, d / scale))
}

/// Same, failing when the solved root number is not on the unit circle.
pub fn lvalue_certified(coef: &dyn Fn(usize) -> CDD, dual: &dyn Fn(usize) -> CDD, available: usize, q: f64, eps: f64) -> Result<AfeResult> {
    let r = lvalue_afe(coef, dual, available, q, eps)?;
    if r.w_error > ROOT_NUMBER_TOL {
        return Err(Error::RootNumber(format!("|w| - 1 = {:.3e} at conductor {q}", r.w_error)));
    }
    Ok(r)
}

/// exp(2 pi i k / m) for k in 0..m.
pub fn roots_table(m: i64) -> Vec<CDD> {
    (0..m).map(|k| CDD::root_of_unity(k, m)).collect()
}

/// L(f tensor psi, 1) for psi a Dirichlet character given by `psi(n)` (zero off units), conductor `cond`.
pub fn twisted_lvalue_afe(an: &[CDD], psi: &dyn Fn(usize) -> CDD, level: i64, cond: i64, eps: f64) -> Result<AfeResult> {
    let q = level as f64 * (cond as f64).powi(2);
    let coef = |n: usize| an[n] * psi(n);
    let dual = |n: usize| (an[n] * psi(n)).conj();
    lvalue_certified(&coef, &dual, an.len() - 1, q, eps)
}

fn additive_partner(a: i64, m: i64, level: i64) -> Result<i64> {
    let inv = crate::arith::inv_mod(((level % m) * a.rem_euclid(m)) as i128, m as i128)
        .ok_or(Error::NotCoprime(a * level, m))? as i64;
    Ok((-inv).rem_euclid(m))
}

/// Additive twist L(f, a/m, 1) = sum a_n e(n a/m)/n for real-coefficient f on
/// Gamma_0(level), gcd(m, level) = 1; partner point -(level a)^{-1}/m.
/// `root_number` fixes w instead of solving for it.
pub fn additive_lvalue_afe(an: &[CDD], a: i64, m: i64, level: i64, roots: &[CDD], eps: f64) -> Result<AfeResult> {
    let r = additive_lvalue_with(an, a, m, level, roots, eps, None)?;
    if r.w_error > ROOT_NUMBER_TOL {
        return Err(Error::RootNumber(format!("|w| - 1 = {:.3e} at conductor {}", r.w_error, level * m * m)));
    }
    Ok(r)
}

pub fn additive_lvalue_with(
    an: &[CDD],
    a: i64,
    m: i64,
    level: i64,
    roots: &[CDD],
    eps: f64,
    root_number: Option<CDD>,
) -> Result<AfeResult> {
    let partner = additive_partner(a, m, level)?;
    let q = level as f64 * (m as f64).powi(2);
    let mu = m as usize;
    let coef = |n: usize| an[n] * roots[(n * a.rem_euclid(m) as usize) % mu];
    let dual = |n: usize| an[n] * roots[(n * partner as usize) % mu];
    match root_number {
        None => lvalue_afe(&coef, &dual, an.len() - 1, q, eps),
        Some(w) => lvalue_with_root_number(&coef, &dual, an.len() - 1, q, eps, w),
    }
}

/// Dirichlet coefficients a_0..a_{n_max} (a_0 = 0) of prod_l 1/P_l(l^{-s}), where
/// `local(l)` returns the coefficients [1, c_1, c_2, ...] of P_l.
pub fn euler_product_coefficients(n_max: usize, local: &(dyn Fn(usize) -> Vec<CDD> + Sync)) -> Vec<CDD> {
    let mut spf = vec![0usize; n_max + 1];
    for i in 2..=n_max {
        if spf[i] == 0 {
            let mut j = i;
            while j <= n_max {
                if spf[j] == 0 {
                    spf[j] = i;
                }
                j += i;
            }
        }
    }
    let primes: Vec<usize> = (2..=n_max).filter(|&l| spf[l] == l).collect();
    use rayon::prelude::*;
    let series: Vec<(usize, Vec<CDD>)> = primes
        .par_iter()
        .map(|&l| {
            let mut kmax = 0;
            let mut pk = 1usize;
            while pk <= n_max / l {
                pk *= l;
                kmax += 1;
            }
            let poly = local(l);
            // b_k = -sum_{i>=1} c_i b_{k-i}
            let mut b = vec![CDD::ONE];
            for k in 1..=kmax {
                let mut acc = CDD::ZERO;
                for (i, c) in poly.iter().enumerate().skip(1).take(k) {
                    acc = acc - *c * b[k - i];
                }
                b.push(acc);
            }
            (l, b)
        })
        .collect();
    let mut local_series: Vec<Vec<CDD>> = vec![Vec::new(); n_max + 1];
    for (l, b) in series {
        local_series[l] = b;
    }
    let mut a = vec![CDD::ZERO; n_max + 1];
    if n_max >= 1 {
        a[1] = CDD::ONE;
    }
    for n in 2..=n_max {
        let l = spf[n];
        let mut r = n;
        let mut k = 0;
        while r % l == 0 {
            r /= l;
            k += 1;
        }
        a[n] = local_series[l][k] * a[r];
    }
    a
}

/// 2 sqrt(x) K_1(2 sqrt(x)), the degree-four smoothing weight at s = 1.
pub fn bessel_kernel(x: f64) -> f64 {
    let z = 2.0 * x.sqrt();
    if z == 0.0 {
        return 1.0;
    }
    // K_1(z) = int_0^inf exp(-z cosh t) cosh t dt, trapezoid in t
    let h: f64 = (0.5 / z.sqrt()).min(0.25);
    let mut sum = 0.5 * (-z).exp();
    let mut t = h;
    loop {
        let c = t.cosh();
        let term = (-z * c).exp() * c;
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
        t += h;
    }
    z * sum * h
}

/// L(1) of a degree-four series with gamma factor Gamma_C(s)^2 and conductor q
/// (double precision; used only for cross-checks).
pub fn degree4_lvalue_afe(coef: &[CDD], dual: &[CDD], q: f64, eps: f64) -> Result<AfeResult> {
    let tmin = SPLIT_POINTS.iter().fold(f64::INFINITY, |m, &t| m.min(t.min(1.0 / t)));
    let z = (1.0 / eps).ln() + 5.0;
    let scale = 4.0 * std::f64::consts::PI.powi(2) / q.sqrt();
    let need = ((z * z / 4.0) / (scale * tmin)).ceil() as usize + 1;
    let have = coef.len().min(dual.len()) - 1;
    if need > have {
        return Err(Error::InsufficientCoefficients { need, have });
    }
    let cutoff = z * z / 4.0;
    let sum = |c: &[CDD], t: f64| {
        let last = ((cutoff / (scale * t)).ceil() as usize + 1).min(need);
        let (re, im) = (1..last + 1)
            .into_par_iter()
            .with_min_len(4096)
            .map(|n| {
                let k = bessel_kernel(scale * n as f64 * t) / n as f64;
                let (a, b) = c[n].to_c64();
                (a * k, b * k)
            })
            .reduce(|| (0.0, 0.0), |x, y| (x.0 + y.0, x.1 + y.1));
        CDD::new(DD::new(re), DD::new(im))
    };
    let sums: Vec<(CDD, CDD)> = SPLIT_POINTS.iter().map(|&t| (sum(coef, t), sum(dual, 1.0 / t))).collect();
    let (r, _) = solve_root_number(&sums, need)?;
    if r.w_error > ROOT_NUMBER_TOL {
        return Err(Error::RootNumber(format!("|w| - 1 = {:.3e} at conductor {q}", r.w_error)));
    }
    Ok(r)
}
