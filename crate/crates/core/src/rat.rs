//! Exact rational helpers shared by every module.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{HzError, Result};

pub type Rat = BigRational;

pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Representative of x mod 1 in [0, 1).
pub fn mod1(x: &Rat) -> Rat {
    x - x.floor()
}

pub fn is_integer(x: &Rat) -> bool {
    x.denom().is_one()
}

pub fn to_f64(x: &Rat) -> f64 {
    // Ratio<BigInt>::to_f64 handles huge numerators and denominators
    x.to_f64().unwrap_or_else(|| {
        let n = x.numer().to_f64().unwrap_or(f64::NAN);
        let d = x.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn fmt_rat(x: &Rat) -> String {
    if x.denom().is_one() {
        format!("{}", x.numer())
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || HzError::pre(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(Rat::new(p, q))
        }
        None => Ok(Rat::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Splits n > 0 as k^2 * s with s squarefree.
pub fn square_split(n: u64) -> (u64, u64) {
    assert!(n > 0);
    let mut k = 1u64;
    let mut s = 1u64;
    let mut m = n;
    let mut p = 2u64;
    while p * p <= m {
        let mut e = 0;
        while m % p == 0 {
            m /= p;
            e += 1;
        }
        k *= p.pow(e / 2);
        if e % 2 == 1 {
            s *= p;
        }
        p += 1;
    }
    s *= m;
    (k, s)
}

pub fn is_squarefree(n: u64) -> bool {
    n > 0 && square_split(n).0 == 1
}

pub fn rat_pow(x: &Rat, e: i64) -> Rat {
    if e >= 0 {
        num_traits::pow(x.clone(), e as usize)
    } else {
        num_traits::pow(x.recip(), (-e) as usize)
    }
}

pub fn lcm_denoms<'a>(xs: impl IntoIterator<Item = &'a Rat>) -> BigInt {
    xs.into_iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

pub fn abs(x: &Rat) -> Rat {
    x.abs()
}

pub fn gcd_i64(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

/// Jacobi-Kronecker symbol (D/n) for a fundamental discriminant D.
pub fn kronecker(d: i64, n: i64) -> i64 {
    if n == 0 {
        return if d == 1 || d == -1 { 1 } else { 0 };
    }
    let mut n = n;
    let mut sign = 1;
    if n < 0 {
        n = -n;
        if d < 0 {
            sign = -1;
        }
    }
    let mut result = sign;
    while n % 2 == 0 {
        n /= 2;
        let r = d.rem_euclid(8);
        if r % 2 == 0 {
            return 0;
        }
        if r == 3 || r == 5 {
            result = -result;
        }
    }
    // Jacobi (d/n) for odd n
    let mut a = d.rem_euclid(n);
    let mut m = n;
    let mut j = 1;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = m % 8;
            if r == 3 || r == 5 {
                j = -j;
            }
        }
        std::mem::swap(&mut a, &mut m);
        if a % 4 == 3 && m % 4 == 3 {
            j = -j;
        }
        a %= m;
    }
    if m == 1 {
        result * j
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mod1_wraps_negatives() {
        assert_eq!(mod1(&rat(-1, 4)), rat(3, 4));
        assert_eq!(mod1(&int(3)), int(0));
    }

    #[test]
    fn parse_and_format_roundtrip() {
        for s in ["0", "-3/7", "12", "5/4"] {
            assert_eq!(fmt_rat(&parse_rat(s).unwrap()), s);
        }
        assert!(parse_rat("1/0").is_err());
    }

    #[test]
    fn square_split_examples() {
        assert_eq!(square_split(12), (2, 3));
        assert_eq!(square_split(1), (1, 1));
        assert_eq!(square_split(50), (5, 2));
    }

    #[test]
    fn kronecker_five() {
        let vals: Vec<i64> = (0..5).map(|n| kronecker(5, n)).collect();
        assert_eq!(vals, vec![0, 1, -1, -1, 1]);
        assert_eq!(kronecker(8, 3), -1);
        assert_eq!(kronecker(8, 7), 1);
    }
}
