//! Residues modulo a prime power held in `u128`.
//!
//! Moduli below 2^64 multiply through a single widening product. Larger
//! moduli (up to 2^126) fall back to a 256-bit schoolbook product followed by
//! bitwise reduction, which is slow but only used for very high precision.

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Modulus {
    m: u128,
}

pub const MAX_MODULUS_BITS: u32 = 126;

impl Modulus {
    pub fn new(m: u128) -> Self {
        assert!(m >= 2, "modulus must be at least 2");
        assert!(
            m < (1u128 << MAX_MODULUS_BITS),
            "modulus exceeds 2^{MAX_MODULUS_BITS}"
        );
        Modulus { m }
    }

    #[inline]
    pub fn value(&self) -> u128 {
        self.m
    }

    #[inline]
    pub fn is_small(&self) -> bool {
        self.m <= u64::MAX as u128
    }

    #[inline]
    pub fn reduce(&self, a: u128) -> u128 {
        a % self.m
    }

    #[inline]
    pub fn add(&self, a: u128, b: u128) -> u128 {
        let s = a + b;
        if s >= self.m {
            s - self.m
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u128, b: u128) -> u128 {
        if a >= b {
            a - b
        } else {
            a + self.m - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u128) -> u128 {
        if a == 0 {
            0
        } else {
            self.m - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u128, b: u128) -> u128 {
        if self.is_small() {
            (a * b) % self.m
        } else {
            mul_wide(a, b, self.m)
        }
    }

    pub fn pow(&self, mut a: u128, mut e: u128) -> u128 {
        let mut r = 1 % self.m;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    /// Reduces a signed integer into `[0, m)`.
    pub fn from_i128(&self, a: i128) -> u128 {
        let m = self.m as i128;
        let r = a % m;
        if r < 0 {
            (r + m) as u128
        } else {
            r as u128
        }
    }
}

fn mul_wide(a: u128, b: u128, m: u128) -> u128 {
    let (a0, a1) = (a as u64 as u128, a >> 64);
    let (b0, b1) = (b as u64 as u128, b >> 64);
    let p00 = a0 * b0;
    let p01 = a0 * b1;
    let p10 = a1 * b0;
    let p11 = a1 * b1;
    let mid = (p00 >> 64) + (p01 as u64 as u128) + (p10 as u64 as u128);
    let lo = (p00 as u64 as u128) | ((mid as u64 as u128) << 64);
    let hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
    let mut r = hi % m;
    for i in (0..128).rev() {
        r <<= 1;
        if r >= m {
            r -= m;
        }
        if (lo >> i) & 1 == 1 {
            r += 1;
            if r >= m {
                r -= m;
            }
        }
    }
    r
}

/// Largest `e` with `p^e | a`, or `cap` when `a` is zero or the bound is hit.
pub fn valuation_u128(mut a: u128, p: u64, cap: u32) -> u32 {
    if a == 0 {
        return cap;
    }
    let p = p as u128;
    let mut e = 0;
    while e < cap && a % p == 0 {
        a /= p;
        e += 1;
    }
    e
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wide_matches_small_path() {
        let m = Modulus::new(1_000_000_007);
        let a = 999_999_999u128;
        assert_eq!(m.mul(a, a), mul_wide(a, a, m.value()));
    }

    #[test]
    fn wide_product_near_limit() {
        let m = (1u128 << 125) + 7;
        let a = (1u128 << 125) - 3;
        // (m - 10)^2 = 100 mod m
        assert_eq!(mul_wide(a, a, m), 100);
    }

    #[test]
    fn signed_reduction() {
        let m = Modulus::new(625);
        assert_eq!(m.from_i128(-1), 624);
        assert_eq!(m.from_i128(626), 1);
    }

    #[test]
    fn primes() {
        let ps: Vec<u64> = (0..30).filter(|&k| is_prime(k)).collect();
        assert_eq!(ps, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }

    #[test]
    fn valuations() {
        assert_eq!(valuation_u128(250, 5, 10), 3);
        assert_eq!(valuation_u128(0, 5, 10), 10);
        assert_eq!(valuation_u128(5u128.pow(12), 5, 10), 10);
    }
}
