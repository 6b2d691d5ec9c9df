//! Small integer helpers shared by the exact kernels.

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm(a: i64, b: i64) -> i64 {
    if a == 0 || b == 0 {
        return 0;
    }
    (a / gcd(a, b) * b).abs()
}

/// Extended gcd: returns (g, x, y) with a*x + b*y = g.
pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: i128, m: i128) -> Option<i128> {
    let (g, x, _) = ext_gcd(a.rem_euclid(m), m);
    if g != 1 {
        return None;
    }
    Some(x.rem_euclid(m))
}

#[inline]
pub fn mul_mod(a: i128, b: i128, m: i128) -> i128 {
    // operands are kept below 2^63 so the product fits
    (a * b).rem_euclid(m)
}

pub fn pow_mod(mut base: i128, mut exp: u128, m: i128) -> i128 {
    let mut acc = 1i128.rem_euclid(m);
    base = base.rem_euclid(m);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

pub fn ipow(base: i64, exp: u32) -> i64 {
    base.checked_pow(exp).expect("integer power overflow")
}

pub fn is_prime(n: i64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn primes_up_to(n: usize) -> Vec<i64> {
    if n < 2 {
        return Vec::new();
    }
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| i as i64)
        .collect()
}

/// Prime factorization as (prime, exponent) pairs in ascending order.
pub fn factorize(mut n: i64) -> Vec<(i64, u32)> {
    let mut out = Vec::new();
    n = n.abs();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn euler_phi(n: i64) -> i64 {
    factorize(n)
        .into_iter()
        .fold(n, |acc, (q, _)| acc / q * (q - 1))
}

pub fn divisors(n: i64) -> Vec<i64> {
    let mut out: Vec<i64> = (1..=n).filter(|d| n % d == 0).collect();
    out.sort();
    out
}

/// Integer coefficients (ascending) of the n-th cyclotomic polynomial.
pub fn cyclotomic_poly(n: i64) -> Vec<i64> {
    assert!(n >= 1);
    // x^n - 1 divided by Phi_d for every proper divisor d
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in divisors(n) {
        if d == n {
            continue;
        }
        let den = cyclotomic_poly(d);
        num = poly_div_exact(&num, &den);
    }
    num
}

/// Exact division of integer polynomials with monic divisor.
pub fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let dn = den.len() - 1;
    assert_eq!(den[dn], 1);
    let mut rem = num.to_vec();
    while rem.len() > 1 && *rem.last().unwrap() == 0 {
        rem.pop();
    }
    if rem.len() <= dn {
        return vec![0];
    }
    let qlen = rem.len() - dn;
    let mut q = vec![0i64; qlen];
    for i in (0..qlen).rev() {
        let c = rem[i + dn];
        q[i] = c;
        if c != 0 {
            for (j, &d) in den.iter().enumerate() {
                rem[i + j] -= c * d;
            }
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0), "inexact polynomial division");
    q
}

/// p-adic valuation of a nonzero integer.
pub fn val_p(mut n: i128, p: i128) -> u32 {
    assert!(n != 0);
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// Kronecker symbol (d / n) for odd prime n or n = 2.
pub fn kronecker(d: i64, n: i64) -> i64 {
    if n == 2 {
        if d % 2 == 0 {
            return 0;
        }
        return match d.rem_euclid(8) {
            1 | 7 => 1,
            _ => -1,
        };
    }
    let a = d.rem_euclid(n);
    if a == 0 {
        return 0;
    }
    let r = pow_mod(a as i128, ((n - 1) / 2) as u128, n as i128);
    if r == 1 {
        1
    } else {
        -1
    }
}

/// Integer square root (floor).
pub fn isqrt(n: i64) -> i64 {
    if n < 0 {
        return 0;
    }
    let mut x = (n as f64).sqrt() as i64;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

/// Square root of `a` modulo an odd prime (Tonelli-Shanks).
pub fn sqrt_mod_prime(a: i64, p: i64) -> Option<i64> {
    let a = a.rem_euclid(p);
    if a == 0 {
        return Some(0);
    }
    if pow_mod(a as i128, ((p - 1) / 2) as u128, p as i128) != 1 {
        return None;
    }
    let (mut q, mut s) = (p - 1, 0);
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while pow_mod(z as i128, ((p - 1) / 2) as u128, p as i128) != p as i128 - 1 {
        z += 1;
    }
    let pm = p as i128;
    let mut m = s;
    let mut c = pow_mod(z as i128, q as u128, pm);
    let mut t = pow_mod(a as i128, q as u128, pm);
    let mut r = pow_mod(a as i128, ((q + 1) / 2) as u128, pm);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mul_mod(tt, tt, pm);
            i += 1;
        }
        let b = pow_mod(c, 1u128 << (m - i - 1), pm);
        m = i;
        c = mul_mod(b, b, pm);
        t = mul_mod(t, c, pm);
        r = mul_mod(r, b, pm);
    }
    Some(r as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_two_mod_81() {
        assert_eq!(inv_mod(2, 81), Some(41));
        assert_eq!(inv_mod(3, 81), None);
    }

    #[test]
    fn phi_and_factors() {
        assert_eq!(euler_phi(27), 18);
        assert_eq!(euler_phi(216), 72);
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
    }

    #[test]
    fn tonelli() {
        for p in [5i64, 13, 17, 97, 101] {
            for a in 1..p {
                if let Some(r) = sqrt_mod_prime(a, p) {
                    assert_eq!((r * r) % p, a);
                }
            }
        }
    }

    #[test]
    fn cyclotomic_small() {
        assert_eq!(cyclotomic_poly(1), vec![-1, 1]);
        assert_eq!(cyclotomic_poly(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_poly(8), vec![1, 0, 0, 0, 1]);
        assert_eq!(cyclotomic_poly(9), vec![1, 0, 0, 1, 0, 0, 1]);
        assert_eq!(cyclotomic_poly(12), vec![1, 0, -1, 0, 1]);
        assert_eq!(cyclotomic_poly(216).len() as i64 - 1, euler_phi(216));
    }

    #[test]
    fn kronecker_small() {
        assert_eq!(kronecker(-4, 3), -1);
        assert_eq!(kronecker(-4, 5), 1);
        assert_eq!(kronecker(-3, 5), -1);
        assert_eq!(kronecker(-3, 7), 1);
    }
}
