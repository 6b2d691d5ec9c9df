//! Double-double floating point (about 32 significant digits) for complex
//! embeddings of cyclotomic numbers and for period computations.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default)]
pub struct DD {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DD {
    pub const ZERO: DD = DD { hi: 0.0, lo: 0.0 };
    pub const ONE: DD = DD { hi: 1.0, lo: 0.0 };
    pub const PI: DD = DD {
        hi: 3.141_592_653_589_793_116e0,
        lo: 1.224_646_799_147_353_207e-16,
    };

    pub fn new(hi: f64) -> DD {
        DD { hi, lo: 0.0 }
    }

    pub fn from_i64(n: i64) -> DD {
        let hi = n as f64;
        let lo = (n - hi as i64) as f64;
        let (s, e) = quick_two_sum(hi, lo);
        DD { hi: s, lo: e }
    }

    /// Exact-as-possible conversion of a ratio of integers.
    pub fn from_ratio(num: i64, den: i64) -> DD {
        DD::from_i64(num) / DD::from_i64(den)
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> DD {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn sqrt(self) -> DD {
        if self.hi <= 0.0 {
            return DD::ZERO;
        }
        let q = DD::new(self.hi.sqrt());
        let r = self - q * q;
        q + r / (q * DD::new(2.0))
    }

    pub fn mul_f64(self, b: f64) -> DD {
        self * DD::new(b)
    }

    /// Sine and cosine of 2*pi*t for t given as an exact fraction num/den.
    pub fn sincos_turns(num: i64, den: i64) -> (DD, DD) {
        let n = num.rem_euclid(den);
        // quadrant q with remainder r/den in [-1/8, 1/8]
        let q = ((8 * n + den) / (2 * den)).rem_euclid(4);
        let rem_num = 4 * n - q * den; // r = rem_num / (4 den)
        let t = DD::from_ratio(rem_num, 4 * den);
        let phi = t * DD::PI * DD::new(2.0);
        let (s, c) = sincos_small(phi);
        match q {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    pub fn exp(self) -> DD {
        // exp(x) = exp(x/2^k)^(2^k) with a short Taylor series
        let k = 3;
        let scale = DD::new((1u64 << k) as f64);
        let y = self / scale;
        let mut term = DD::ONE;
        let mut sum = DD::ONE;
        for i in 1..60 {
            term = term * y / DD::new(i as f64);
            sum = sum + term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        for _ in 0..k {
            sum = sum * sum;
        }
        sum
    }
}

fn sincos_small(x: DD) -> (DD, DD) {
    let x2 = x * x;
    let mut s = x;
    let mut c = DD::ONE;
    let mut term_s = x;
    let mut term_c = DD::ONE;
    for k in 1..40 {
        let a = (2 * k) as f64;
        term_c = -(term_c * x2) / DD::new(a * (a - 1.0));
        term_s = -(term_s * x2) / DD::new(a * (a + 1.0));
        c = c + term_c;
        s = s + term_s;
        if term_c.hi.abs() < 1e-40 && term_s.hi.abs() < 1e-40 {
            break;
        }
    }
    (s, c)
}

impl Add for DD {
    type Output = DD;
    fn add(self, o: DD) -> DD {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let e = e + t;
        let (s, e) = quick_two_sum(s, e);
        let e = e + f;
        let (hi, lo) = quick_two_sum(s, e);
        DD { hi, lo }
    }
}

impl Neg for DD {
    type Output = DD;
    fn neg(self) -> DD {
        DD { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for DD {
    type Output = DD;
    fn sub(self, o: DD) -> DD {
        self + (-o)
    }
}

impl Mul for DD {
    type Output = DD;
    fn mul(self, o: DD) -> DD {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        DD { hi, lo }
    }
}

impl Div for DD {
    type Output = DD;
    fn div(self, o: DD) -> DD {
        let q1 = self.hi / o.hi;
        let r = self - o * DD::new(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * DD::new(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        DD { hi, lo } + DD::new(q3)
    }
}

/// Complex number over double-doubles.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct CDD {
    pub re: DD,
    pub im: DD,
}

impl CDD {
    pub const ZERO: CDD = CDD { re: DD::ZERO, im: DD::ZERO };
    pub const ONE: CDD = CDD { re: DD::ONE, im: DD::ZERO };

    pub fn new(re: DD, im: DD) -> CDD {
        CDD { re, im }
    }

    /// exp(2 pi i num/den).
    pub fn root_of_unity(num: i64, den: i64) -> CDD {
        let (s, c) = DD::sincos_turns(num, den);
        CDD { re: c, im: s }
    }

    pub fn conj(self) -> CDD {
        CDD { re: self.re, im: -self.im }
    }

    pub fn norm_sqr(self) -> DD {
        self.re * self.re + self.im * self.im
    }

    pub fn abs(self) -> DD {
        self.norm_sqr().sqrt()
    }

    pub fn scale(self, s: DD) -> CDD {
        CDD { re: self.re * s, im: self.im * s }
    }

    pub fn to_c64(self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    pub fn inv(self) -> CDD {
        let n = self.norm_sqr();
        CDD { re: self.re / n, im: -self.im / n }
    }
}

impl Add for CDD {
    type Output = CDD;
    fn add(self, o: CDD) -> CDD {
        CDD { re: self.re + o.re, im: self.im + o.im }
    }
}

impl Sub for CDD {
    type Output = CDD;
    fn sub(self, o: CDD) -> CDD {
        CDD { re: self.re - o.re, im: self.im - o.im }
    }
}

impl Neg for CDD {
    type Output = CDD;
    fn neg(self) -> CDD {
        CDD { re: -self.re, im: -self.im }
    }
}

impl Mul for CDD {
    type Output = CDD;
    fn mul(self, o: CDD) -> CDD {
        CDD {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_two_squared() {
        let s = DD::new(2.0).sqrt();
        let e = (s * s - DD::new(2.0)).abs();
        assert!(e.hi < 1e-30);
    }

    #[test]
    fn roots_of_unity_have_unit_modulus() {
        for den in [3i64, 4, 7, 9, 27, 216] {
            for num in 0..den {
                let z = CDD::root_of_unity(num, den);
                let err = (z.norm_sqr() - DD::ONE).abs().hi;
                assert!(err < 1e-29, "{num}/{den}: {err:e}");
            }
        }
        let i = CDD::root_of_unity(1, 4);
        assert!(i.re.abs().hi < 1e-30 && (i.im - DD::ONE).abs().hi < 1e-30);
    }

    #[test]
    fn product_of_roots() {
        let a = CDD::root_of_unity(5, 27);
        let b = CDD::root_of_unity(7, 27);
        let c = CDD::root_of_unity(12, 27);
        let d = a * b - c;
        assert!(d.abs().hi < 1e-30);
    }

    #[test]
    fn exp_one() {
        let e = DD::ONE.exp();
        let ref_e = DD { hi: 2.718281828459045091, lo: 1.445646891729250158e-16 };
        assert!((e - ref_e).abs().hi < 1e-29);
    }
}
