//! Ambient ring data: a prime `p`, a truncation exponent `N` (the scalar base
//! ring is `Z/p^(N+1)`), and a monic polynomial `P(t)` that is irreducible
//! modulo `p`. These determine the finite local ring
//! `R = (Z/p^(N+1))[t]/(P(t))` with residue field of size `q = p^deg(P)`.

use crate::error::{Error, Result};
use crate::fp_poly;
use crate::ring::RElem;
use smallvec::SmallVec;

/// Matrix-entry moduli are kept within a 64-bit word: `p^(N+1) <= 2^32`.
pub const MAX_MODULUS: u64 = 1 << 32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingParams {
    p: u64,
    trunc: u32,
    modulus: u64,
    /// Monic, length `degree + 1`, coefficients reduced mod `modulus`.
    poly: Vec<u64>,
    degree: usize,
    q: u64,
}

impl RingParams {
    /// Builds and validates ring parameters. `poly` lists coefficients in
    /// ascending degree order; entries may be any integers and are reduced
    /// into canonical residues.
    pub fn new(p: u64, trunc: u32, poly: &[i64]) -> Result<Self> {
        if !fp_poly::is_prime(p) {
            return Err(Error::InvalidParams(format!("p = {p} is not prime")));
        }
        let mut modulus: u64 = 1;
        for _ in 0..=trunc {
            modulus = modulus
                .checked_mul(p)
                .filter(|&m| m <= MAX_MODULUS)
                .ok_or_else(|| {
                    Error::InvalidParams(format!(
                        "modulus p^(N+1) = {p}^{} exceeds 2^32",
                        trunc + 1
                    ))
                })?;
        }
        if poly.len() < 2 {
            return Err(Error::InvalidParams(
                "polynomial must have degree at least 1".into(),
            ));
        }
        let reduced: Vec<u64> = poly
            .iter()
            .map(|&c| c.rem_euclid(modulus as i64) as u64)
            .collect();
        let degree = reduced.len() - 1;
        if reduced[degree] != 1 {
            return Err(Error::InvalidParams(format!(
                "polynomial is not monic: leading coefficient is {} mod {}",
                reduced[degree], modulus
            )));
        }
        let residue_poly = fp_poly::reduce_coeffs(&reduced, p);
        if fp_poly::degree(&residue_poly) != Some(degree) {
            return Err(Error::InvalidParams(
                "polynomial degree drops modulo p".into(),
            ));
        }
        if !fp_poly::is_irreducible(&residue_poly, p) {
            return Err(Error::InvalidParams(format!(
                "polynomial {residue_poly:?} is reducible modulo {p}"
            )));
        }
        let q = (p as u128).checked_pow(degree as u32).and_then(|q| {
            if q <= u64::MAX as u128 {
                Some(q as u64)
            } else {
                None
            }
        });
        let q = q.ok_or_else(|| {
            Error::InvalidParams(format!("residue field size p^{degree} overflows 64 bits"))
        })?;
        Ok(RingParams {
            p,
            trunc,
            modulus,
            poly: reduced,
            degree,
            q,
        })
    }

    /// Parses "c0,c1,...,cd" (ascending degree) into parameters.
    pub fn from_poly_str(p: u64, trunc: u32, s: &str) -> Result<Self> {
        let coeffs: Vec<i64> = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<i64>()
                    .map_err(|e| Error::Parse(format!("bad polynomial coefficient {t:?}: {e}")))
            })
            .collect::<Result<_>>()?;
        Self::new(p, trunc, &coeffs)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// The truncation exponent N; scalars live in `Z/p^(N+1)`.
    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    /// N + 1: the least k with p^k = 0, also the valuation assigned to 0.
    pub fn nilpotency(&self) -> u32 {
        self.trunc + 1
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn poly(&self) -> &[u64] {
        &self.poly
    }

    pub fn poly_string(&self) -> String {
        self.poly
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Residue field size q = p^deg(P).
    pub fn q(&self) -> u64 {
        self.q
    }

    /// p^k for k <= N+1 (so p^(N+1) = 0).
    pub fn p_pow(&self, k: u32) -> u64 {
        if k >= self.nilpotency() {
            0
        } else {
            self.p.pow(k) % self.modulus
        }
    }

    /// Parameters for the quotient at level k, i.e. scalars in `Z/p^k` and
    /// extension `(Z/p^k)[t]/(P mod p^k)`. Requires `1 <= k <= N+1`.
    pub fn reduced(&self, level: u32) -> RingParams {
        assert!(
            level >= 1 && level <= self.nilpotency(),
            "level {level} out of range 1..={}",
            self.nilpotency()
        );
        let modulus = self.p.pow(level);
        RingParams {
            p: self.p,
            trunc: level - 1,
            modulus,
            poly: self.poly.iter().map(|&c| c % modulus).collect(),
            degree: self.degree,
            q: self.q,
        }
    }

    /// The image of `t` in the quotient ring, as an element.
    pub fn quotient_gen(&self) -> RElem {
        let mut coeffs = SmallVec::with_capacity(self.degree);
        if self.degree == 1 {
            // t = -c0 once reduced by the monic relation
            coeffs.push((self.modulus - self.poly[0]) % self.modulus);
        } else {
            coeffs.push(0);
            coeffs.push(1);
            coeffs.resize(self.degree, 0);
        }
        RElem::from_raw(coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_standard_cases() {
        let params = RingParams::new(2, 1, &[1, 1, 1]).unwrap();
        assert_eq!(params.modulus(), 4);
        assert_eq!(params.degree(), 2);
        assert_eq!(params.q(), 4);
        assert_eq!(params.nilpotency(), 2);

        let params = RingParams::from_poly_str(3, 0, "0,1").unwrap();
        assert_eq!(params.degree(), 1);
        assert_eq!(params.q(), 3);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(RingParams::new(4, 1, &[1, 1]).is_err()); // composite p
        assert!(RingParams::new(2, 1, &[1, 0, 1]).is_err()); // (t+1)^2 mod 2
        assert!(RingParams::new(2, 1, &[1, 0, 2]).is_err()); // not monic
        assert!(RingParams::new(2, 1, &[1]).is_err()); // degree 0
        assert!(RingParams::new(2, 40, &[1, 1]).is_err()); // modulus over 2^32
    }

    #[test]
    fn negative_coefficients_normalize() {
        // t - 1 over Z/4 becomes 3 + t
        let params = RingParams::new(2, 1, &[-1, 1]).unwrap();
        assert_eq!(params.poly(), &[3, 1]);
    }

    #[test]
    fn reduced_level_params() {
        let params = RingParams::new(2, 2, &[1, 1, 1]).unwrap();
        let level1 = params.reduced(1);
        assert_eq!(level1.modulus(), 2);
        assert_eq!(level1.nilpotency(), 1);
        assert_eq!(level1.poly(), &[1, 1, 1]);
        let level2 = params.reduced(2);
        assert_eq!(level2.modulus(), 4);
    }

    #[test]
    fn quotient_gen_degree_one() {
        // P = t - 1 over Z/4: the class of t is 1
        let params = RingParams::new(2, 1, &[-1, 1]).unwrap();
        assert_eq!(params.quotient_gen().coeffs(), &[1]);
        // P = t: the class of t is 0
        let params = RingParams::new(2, 1, &[0, 1]).unwrap();
        assert_eq!(params.quotient_gen().coeffs(), &[0]);
    }
}
