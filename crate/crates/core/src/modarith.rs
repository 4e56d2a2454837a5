//! Residue arithmetic modulo prime powers below 2^127.

/// a * b mod m for a, b < m < 2^127.
#[inline]
pub fn mulmod(a: u128, b: u128, m: u128) -> u128 {
    if a >> 64 == 0 && b >> 64 == 0 {
        return (a * b) % m;
    }
    // Double-and-add; both operands stay below 2^127 so sums never overflow.
    let (mut x, mut y) = (a % m, b % m);
    let mut acc = 0u128;
    while y > 0 {
        if y & 1 == 1 {
            acc += x;
            if acc >= m {
                acc -= m;
            }
        }
        x <<= 1;
        if x >= m {
            x -= m;
        }
        y >>= 1;
    }
    acc
}

#[inline]
pub fn addmod(a: u128, b: u128, m: u128) -> u128 {
    let s = a + b;
    if s >= m {
        s - m
    } else {
        s
    }
}

#[inline]
pub fn submod(a: u128, b: u128, m: u128) -> u128 {
    if a >= b {
        a - b
    } else {
        m - (b - a)
    }
}

#[inline]
pub fn negmod(a: u128, m: u128) -> u128 {
    if a == 0 {
        0
    } else {
        m - a
    }
}

pub fn powmod(mut b: u128, mut e: u128, m: u128) -> u128 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b, m);
        }
        b = mulmod(b, b, m);
        e >>= 1;
    }
    r
}

/// Inverse of a unit a modulo p^k, by Hensel lifting the inverse mod p.
pub fn inv_unit(a: u128, p: u64, m: u128) -> u128 {
    let p128 = p as u128;
    debug_assert!(a % p128 != 0);
    let mut x = powmod(a % p128, p128 - 2, p128);
    if p == 2 {
        x = 1;
    }
    let mut modulus = p128;
    while modulus < m {
        modulus = modulus.saturating_mul(modulus).min(m);
        // x <- x (2 - a x)
        let ax = mulmod(a % modulus, x, modulus);
        let two_minus = submod(2 % modulus, ax, modulus);
        x = mulmod(x, two_minus, modulus);
    }
    x % m
}

/// Number of factors of p in a nonzero a.
#[inline]
pub fn pval(mut a: u128, p: u64) -> u32 {
    debug_assert!(a != 0);
    let p = p as u128;
    let mut t = 0;
    while a % p == 0 {
        a /= p;
        t += 1;
    }
    t
}

/// Residue of a signed integer modulo m.
pub fn from_signed(c: i128, m: u128) -> u128 {
    if c >= 0 {
        (c as u128) % m
    } else {
        let r = c.unsigned_abs() % m;
        negmod(r, m)
    }
}

/// Representative of a in (-m/2, m/2], returned as a decimal string.
pub fn balanced_string(a: u128, m: u128) -> String {
    if a > m / 2 {
        format!("-{}", m - a)
    } else {
        a.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mulmod_matches_wide_product() {
        let m = 5u128.pow(54);
        let a = m - 3;
        let b = m - 7;
        // (-3)(-7) = 21
        assert_eq!(mulmod(a, b, m), 21);
        assert_eq!(mulmod(12, 13, 100), 56);
    }

    #[test]
    fn unit_inverse() {
        for (p, k) in [(2u64, 60u32), (5, 24), (5, 54), (3, 70)] {
            let m = (p as u128).pow(k);
            for a in [1u128, 2, 3, 7, 11, m - 1] {
                if a % p as u128 == 0 {
                    continue;
                }
                assert_eq!(mulmod(a, inv_unit(a, p, m), m), 1, "p={p} k={k} a={a}");
            }
        }
    }

    #[test]
    fn signed_and_balanced() {
        let m = 125;
        assert_eq!(from_signed(-1, m), 124);
        assert_eq!(balanced_string(124, m), "-1");
        assert_eq!(balanced_string(62, m), "62");
        assert_eq!(pval(250, 5), 3);
    }
}
