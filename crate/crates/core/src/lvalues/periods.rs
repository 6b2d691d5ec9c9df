//! Real and imaginary periods by the arithmetic-geometric mean.

use crate::cm::Weierstrass;
use crate::dd::{CDD, DD};
use crate::error::{Error, Result};

/// AGM of two positive reals; also returns |a - b| after each step.
pub fn agm(mut a: DD, mut b: DD) -> (DD, Vec<f64>) {
    let mut gaps = Vec::new();
    for _ in 0..64 {
        let gap = (a - b).abs();
        gaps.push(gap.to_f64());
        if gap.hi <= 1e-30 * a.hi.abs() || gaps.len() > 2 && gap.hi >= gaps[gaps.len() - 2] {
            break;
        }
        let next_a = (a + b) * DD::new(0.5);
        b = (a * b).sqrt();
        a = next_a;
    }
    (a, gaps)
}

#[derive(Clone, Copy, Debug)]
pub struct Periods {
    /// Least positive real period of dx/(2y + a1 x + a3).
    pub omega1: DD,
    /// Second basis period, with positive imaginary part.
    pub omega2: CDD,
    /// Number of connected components of E(R).
    pub components: u32,
    /// components * omega1.
    pub omega_plus: DD,
    /// 2 Im(omega2).
    pub omega_minus: DD,
}

fn dd_cbrt(x: f64) -> f64 {
    x.signum() * x.abs().cbrt()
}

/// Refine a root of 4x^3 + b2 x^2 + 2 b4 x + b6 by Newton steps in double-double.
fn refine(root: f64, b2: DD, b4: DD, b6: DD) -> DD {
    let mut x = DD::new(root);
    let four = DD::new(4.0);
    for _ in 0..6 {
        let g = ((four * x + b2) * x + DD::new(2.0) * b4) * x + b6;
        let dg = (DD::new(12.0) * x + DD::new(2.0) * b2) * x + DD::new(2.0) * b4;
        if dg.hi == 0.0 {
            break;
        }
        x = x - g / dg;
    }
    x
}

pub fn real_period_agm(e: &Weierstrass) -> Result<Periods> {
    let disc = e.discriminant();
    if disc == 0 {
        return Err(Error::Singular);
    }
    let (a1, a2, a3, a4, a6) = (e.a1 as f64, e.a2 as f64, e.a3 as f64, e.a4 as f64, e.a6 as f64);
    let b2 = a1 * a1 + 4.0 * a2;
    let b4 = 2.0 * a4 + a1 * a3;
    let b6 = a3 * a3 + 4.0 * a6;
    let (b2d, b4d, b6d) = (DD::new(b2), DD::new(b4), DD::new(b6));
    // depressed cubic for 4x^3 + b2 x^2 + 2 b4 x + b6: x = t - b2/12
    let shift = -b2 / 12.0;
    let pc = (2.0 * b4) / 4.0 - b2 * b2 / 48.0;
    let qc = b6 / 4.0 - b2 * b4 / 24.0 + b2 * b2 * b2 / 864.0;
    let pi = DD::PI;
    if disc > 0 {
        // three real roots, trigonometric form
        let r = (-pc / 3.0).sqrt();
        let phi = ((3.0 * qc) / (2.0 * pc * r)).clamp(-1.0, 1.0).acos() / 3.0;
        let mut roots: Vec<DD> = (0..3)
            .map(|k| {
                let t = 2.0 * r * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos();
                refine(t + shift, b2d, b4d, b6d)
            })
            .collect();
        roots.sort_by(|x, y| y.hi.partial_cmp(&x.hi).unwrap());
        let (e1, e2, e3) = (roots[0], roots[1], roots[2]);
        let (m1, _) = agm((e1 - e3).sqrt(), (e1 - e2).sqrt());
        let (m2, _) = agm((e1 - e3).sqrt(), (e2 - e3).sqrt());
        let omega1 = pi / m1;
        let im2 = pi / m2;
        Ok(Periods {
            omega1,
            omega2: CDD::new(DD::ZERO, im2),
            components: 2,
            omega_plus: omega1 * DD::new(2.0),
            omega_minus: im2 * DD::new(2.0),
        })
    } else {
        // one real root by Cardano
        let d = qc * qc / 4.0 + pc * pc * pc / 27.0;
        let s = d.sqrt();
        let t = dd_cbrt(-qc / 2.0 + s) + dd_cbrt(-qc / 2.0 - s);
        let e1 = refine(t + shift, b2d, b4d, b6d);
        let a = DD::new(3.0) * e1 + b2d * DD::new(0.25);
        let b = (DD::new(3.0) * e1 * e1 + b2d * DD::new(0.5) * e1 + b4d * DD::new(0.5)).sqrt();
        let two_b = b * DD::new(2.0);
        let (m1, _) = agm(DD::new(2.0) * b.sqrt(), (two_b + a).sqrt());
        let (m2, _) = agm(DD::new(2.0) * b.sqrt(), (two_b - a).sqrt());
        let omega1 = DD::new(2.0) * pi / m1;
        let im2 = pi / m2;
        Ok(Periods {
            omega1,
            omega2: CDD::new(omega1 * DD::new(-0.5), im2),
            components: 1,
            omega_plus: omega1,
            omega_minus: im2 * DD::new(2.0),
        })
    }
}

/// c4 recovered from the lattice: (2 pi / omega1)^4 E4(omega2 / omega1).
pub fn c4_from_periods(per: &Periods) -> f64 {
    let w1 = per.omega1.to_f64();
    let (re2, im2) = per.omega2.to_c64();
    let tau = (re2 / w1, im2 / w1);
    // q = exp(2 pi i tau)
    let r = (-2.0 * std::f64::consts::PI * tau.1).exp();
    let th = 2.0 * std::f64::consts::PI * tau.0;
    let mut e4 = (1.0, 0.0);
    for n in 1..200u32 {
        let rn = r.powi(n as i32);
        if rn < 1e-30 {
            break;
        }
        let sigma3: f64 = (1..=n).filter(|d| n % d == 0).map(|d| (d as f64).powi(3)).sum();
        let ang = th * n as f64;
        e4.0 += 240.0 * sigma3 * rn * ang.cos();
        e4.1 += 240.0 * sigma3 * rn * ang.sin();
    }
    (2.0 * std::f64::consts::PI / w1).powi(4) * e4.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c4(e: &Weierstrass) -> f64 {
        let b2 = e.a1 * e.a1 + 4 * e.a2;
        let b4 = 2 * e.a4 + e.a1 * e.a3;
        (b2 * b2 - 24 * b4) as f64
    }

    #[test]
    fn periods_of_desk_curves() {
        let e = Weierstrass::short(-1, 0);
        let per = real_period_agm(&e).unwrap();
        assert!((per.omega_plus.to_f64() - 5.244115108584239).abs() < 1e-12);
        let f = Weierstrass { a1: 0, a2: 0, a3: 1, a4: 0, a6: 0 };
        let per = real_period_agm(&f).unwrap();
        assert!((per.omega_plus.to_f64() - 5.299916250856349).abs() < 1e-12);
    }

    #[test]
    fn agm_converges_quadratically() {
        let (_, gaps) = agm(DD::new(2.0).sqrt(), DD::ONE);
        for w in gaps.windows(2).filter(|w| w[0] < 1e-2 && w[1] > 1e-30) {
            assert!(w[1] < 2.0 * w[0] * w[0], "{w:?}");
        }
        assert!(gaps.len() < 10);
    }

    #[test]
    fn lattice_reproduces_c4() {
        for e in [
            Weierstrass::short(-1, 0),
            Weierstrass { a1: 0, a2: 0, a3: 1, a4: 0, a6: 0 },
            Weierstrass { a1: 1, a2: -1, a3: 0, a4: -3, a6: 3 },
            Weierstrass::short(-7, 10),
        ] {
            let per = real_period_agm(&e).unwrap();
            let got = c4_from_periods(&per);
            let want = c4(&e);
            assert!((got - want).abs() < 1e-9 * want.abs().max(1.0), "{e:?}: {got} vs {want}");
        }
    }

    #[test]
    fn periods_are_stable() {
        let e = Weierstrass::short(-1, 0);
        let a = real_period_agm(&e).unwrap().omega_plus;
        let (m, _) = agm(DD::new(2.0).sqrt(), DD::ONE);
        let b = DD::new(2.0) * DD::PI / m;
        assert!(((a - b).abs() / a).hi < 1e-28);
        assert!(matches!(real_period_agm(&Weierstrass::short(0, 0)), Err(Error::Singular)));
    }
}
