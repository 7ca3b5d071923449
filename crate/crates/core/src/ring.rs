//! Exact arithmetic in the two finite chain rings the crate works over: the
//! scalar ring `Z/p^(N+1)` and the quotient `R = (Z/p^(N+1))[t]/(P(t))` with
//! `P` monic and irreducible mod `p`.
//!
//! Elements of `R` carry exactly `deg(P)` canonical coefficients. Every
//! nonzero element factors as `p^k * unit`, which is what the Smith normal
//! form kernel relies on: valuations order the ring's ideals totally.

use crate::error::{Error, Result};
use crate::fp_poly;
use crate::params::RingParams;
use smallvec::SmallVec;

/// An element of `R = (Z/p^(N+1))[t]/(P(t))`: coefficient `i` multiplies the
/// class of `t^i`. The length always equals `deg(P)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RElem {
    coeffs: SmallVec<[u64; 4]>,
}

impl std::fmt::Debug for RElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "R{:?}", self.coeffs.as_slice())
    }
}

impl RElem {
    /// Canonical constructor: validates length and reduces entries.
    pub fn new(coeffs: &[i64], params: &RingParams) -> Result<Self> {
        if coeffs.len() != params.degree() {
            return Err(Error::DimensionMismatch {
                expected: params.degree(),
                found: coeffs.len(),
            });
        }
        let m = params.modulus() as i64;
        Ok(RElem {
            coeffs: coeffs.iter().map(|&c| c.rem_euclid(m) as u64).collect(),
        })
    }

    /// Constant element `v`.
    pub fn constant(v: u64, params: &RingParams) -> Self {
        let mut coeffs = SmallVec::with_capacity(params.degree());
        coeffs.push(v % params.modulus());
        coeffs.resize(params.degree(), 0);
        RElem { coeffs }
    }

    pub(crate) fn from_raw(coeffs: SmallVec<[u64; 4]>) -> Self {
        RElem { coeffs }
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut SmallVec<[u64; 4]> {
        &mut self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

/// Common surface of the two chain rings. All operations are pure; elements
/// are plain values, so everything here is safe to share across threads.
pub trait Ring {
    type Elem: Clone + Eq + std::hash::Hash + std::fmt::Debug + Send + Sync;

    /// N + 1: the least k with p^k = 0 and the valuation of 0.
    fn nilpotency(&self) -> u32;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// Largest k <= N+1 with p^k dividing `a`.
    fn valuation(&self, a: &Self::Elem) -> u32;
    /// Inverse of a unit; `Err(NotAUnit)` when the valuation is positive.
    fn invert_unit(&self, a: &Self::Elem) -> Result<Self::Elem>;
    /// p^k as an element, k <= N+1.
    fn p_pow(&self, k: u32) -> Self::Elem;
    /// Exact division by p^k; requires `valuation(a) >= k`.
    fn div_exact_p_pow(&self, a: &Self::Elem, k: u32) -> Self::Elem;
}

fn scalar_valuation(v: u64, p: u64, nilpotency: u32) -> u32 {
    if v == 0 {
        return nilpotency;
    }
    let mut v = v;
    let mut k = 0;
    while v.is_multiple_of(p) {
        v /= p;
        k += 1;
    }
    k
}

/// The scalar chain ring `Z/p^(N+1)`; elements are canonical residues.
#[derive(Clone, Copy, Debug)]
pub struct ZmodRing {
    p: u64,
    modulus: u64,
    nilpotency: u32,
}

impl ZmodRing {
    pub fn new(params: &RingParams) -> Self {
        ZmodRing {
            p: params.p(),
            modulus: params.modulus(),
            nilpotency: params.nilpotency(),
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn reduce(&self, v: i64) -> u64 {
        v.rem_euclid(self.modulus as i64) as u64
    }
}

impl Ring for ZmodRing {
    type Elem = u64;

    fn nilpotency(&self) -> u32 {
        self.nilpotency
    }

    fn zero(&self) -> u64 {
        0
    }

    fn one(&self) -> u64 {
        1 % self.modulus
    }

    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }

    fn add(&self, a: &u64, b: &u64) -> u64 {
        (a + b) % self.modulus
    }

    fn sub(&self, a: &u64, b: &u64) -> u64 {
        (a + self.modulus - b) % self.modulus
    }

    fn neg(&self, a: &u64) -> u64 {
        (self.modulus - a) % self.modulus
    }

    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.modulus as u128) as u64
    }

    fn valuation(&self, a: &u64) -> u32 {
        scalar_valuation(*a, self.p, self.nilpotency)
    }

    fn invert_unit(&self, a: &u64) -> Result<u64> {
        let v = self.valuation(a);
        if v > 0 {
            return Err(Error::NotAUnit { valuation: v });
        }
        // extended Euclid against the modulus
        let (mut t, mut new_t) = (0i128, 1i128);
        let (mut r, mut new_r) = (self.modulus as i128, *a as i128);
        while new_r != 0 {
            let q = r / new_r;
            (t, new_t) = (new_t, t - q * new_t);
            (r, new_r) = (new_r, r - q * new_r);
        }
        debug_assert_eq!(r, 1);
        Ok(t.rem_euclid(self.modulus as i128) as u64)
    }

    fn p_pow(&self, k: u32) -> u64 {
        if k >= self.nilpotency {
            0
        } else {
            self.p.pow(k) % self.modulus
        }
    }

    fn div_exact_p_pow(&self, a: &u64, k: u32) -> u64 {
        let d = self.p.pow(k);
        debug_assert_eq!(a % d, 0, "inexact division of {a} by p^{k}");
        a / d
    }
}

/// The quotient ring `R = (Z/p^(N+1))[t]/(P(t))`.
#[derive(Clone, Copy, Debug)]
pub struct ExtRing<'a> {
    params: &'a RingParams,
}

impl<'a> ExtRing<'a> {
    pub fn new(params: &'a RingParams) -> Self {
        ExtRing { params }
    }

    pub fn params(&self) -> &'a RingParams {
        self.params
    }

    fn modulus(&self) -> u64 {
        self.params.modulus()
    }

    fn check(&self, a: &RElem) {
        assert_eq!(
            a.coeffs.len(),
            self.params.degree(),
            "element does not conform to ring degree"
        );
    }
}

impl Ring for ExtRing<'_> {
    type Elem = RElem;

    fn nilpotency(&self) -> u32 {
        self.params.nilpotency()
    }

    fn zero(&self) -> RElem {
        RElem::constant(0, self.params)
    }

    fn one(&self) -> RElem {
        RElem::constant(1 % self.modulus(), self.params)
    }

    fn is_zero(&self, a: &RElem) -> bool {
        a.is_zero()
    }

    fn add(&self, a: &RElem, b: &RElem) -> RElem {
        self.check(a);
        self.check(b);
        let m = self.modulus();
        RElem {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(&x, &y)| (x + y) % m)
                .collect(),
        }
    }

    fn sub(&self, a: &RElem, b: &RElem) -> RElem {
        self.check(a);
        self.check(b);
        let m = self.modulus();
        RElem {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(&x, &y)| (x + m - y) % m)
                .collect(),
        }
    }

    fn neg(&self, a: &RElem) -> RElem {
        self.check(a);
        let m = self.modulus();
        RElem {
            coeffs: a.coeffs.iter().map(|&x| (m - x) % m).collect(),
        }
    }

    fn mul(&self, a: &RElem, b: &RElem) -> RElem {
        self.check(a);
        self.check(b);
        let d = self.params.degree();
        let m = self.modulus() as u128;
        let poly = self.params.poly();
        // schoolbook product, then fold t^d = -(P - t^d) down to degree < d
        let mut tmp: SmallVec<[u64; 8]> = SmallVec::new();
        tmp.resize(2 * d - 1, 0);
        for i in 0..d {
            let ai = a.coeffs[i];
            if ai == 0 {
                continue;
            }
            for j in 0..d {
                let t = (ai as u128 * b.coeffs[j] as u128 + tmp[i + j] as u128) % m;
                tmp[i + j] = t as u64;
            }
        }
        for i in (d..2 * d - 1).rev() {
            let c = tmp[i];
            if c == 0 {
                continue;
            }
            tmp[i] = 0;
            for j in 0..d {
                if poly[j] == 0 {
                    continue;
                }
                let sub = (c as u128 * poly[j] as u128) % m;
                let t = (tmp[i - d + j] as u128 + m - sub) % m;
                tmp[i - d + j] = t as u64;
            }
        }
        RElem {
            coeffs: SmallVec::from_slice(&tmp[..d]),
        }
    }

    fn valuation(&self, a: &RElem) -> u32 {
        self.check(a);
        let p = self.params.p();
        let nil = self.nilpotency();
        let mut min = nil;
        for &c in &a.coeffs {
            let v = scalar_valuation(c, p, nil);
            if v < min {
                min = v;
                if min == 0 {
                    break;
                }
            }
        }
        min
    }

    fn invert_unit(&self, a: &RElem) -> Result<RElem> {
        self.check(a);
        let v = self.valuation(a);
        if v > 0 {
            return Err(Error::NotAUnit { valuation: v });
        }
        let p = self.params.p();
        // inverse in the residue field, then Hensel lifting doubles the
        // precision each round: b <- b(2 - ab)
        let residue: Vec<u64> = a.coeffs.iter().map(|&c| c % p).collect();
        let modpoly = fp_poly::reduce_coeffs(self.params.poly(), p);
        let inv0 = fp_poly::inv_mod_poly(&residue, &modpoly, p)
            .expect("unit residue is invertible in the residue field");
        let mut b = self.zero();
        for (i, &c) in inv0.iter().enumerate() {
            b.coeffs[i] = c;
        }
        let one = self.one();
        let two = self.add(&one, &one);
        let mut rounds = 0u32;
        while self.mul(a, &b) != one {
            let t = self.sub(&two, &self.mul(a, &b));
            b = self.mul(&b, &t);
            rounds += 1;
            assert!(
                rounds <= self.nilpotency().next_power_of_two().trailing_zeros() + 2,
                "Hensel lifting failed to converge"
            );
        }
        Ok(b)
    }

    fn p_pow(&self, k: u32) -> RElem {
        RElem::constant(self.params.p_pow(k), self.params)
    }

    fn div_exact_p_pow(&self, a: &RElem, k: u32) -> RElem {
        self.check(a);
        let d = self.params.p().pow(k);
        RElem {
            coeffs: a
                .coeffs
                .iter()
                .map(|&c| {
                    debug_assert_eq!(c % d, 0, "inexact division by p^{k}");
                    c / d
                })
                .collect(),
        }
    }
}

/// Coefficientwise sum in `R`; errors if either operand has the wrong number
/// of coefficients for `params`.
pub fn ring_add(a: &RElem, b: &RElem, params: &RingParams) -> Result<RElem> {
    conform(a, params)?;
    conform(b, params)?;
    Ok(ExtRing::new(params).add(a, b))
}

/// Product in `R`: schoolbook polynomial product reduced mod `P(t)` and mod
/// `p^(N+1)`.
pub fn ring_mul(a: &RElem, b: &RElem, params: &RingParams) -> Result<RElem> {
    conform(a, params)?;
    conform(b, params)?;
    Ok(ExtRing::new(params).mul(a, b))
}

/// Largest k <= N+1 such that every coefficient of `a` is divisible by p^k;
/// the zero element gets N+1.
pub fn valuation(a: &RElem, params: &RingParams) -> u32 {
    ExtRing::new(params).valuation(a)
}

/// Inverse of a unit of `R` (valuation 0): residue-field inversion by
/// extended Euclid followed by Hensel lifting.
pub fn invert_unit(a: &RElem, params: &RingParams) -> Result<RElem> {
    conform(a, params)?;
    ExtRing::new(params).invert_unit(a)
}

fn conform(a: &RElem, params: &RingParams) -> Result<()> {
    if a.coeffs().len() != params.degree() {
        return Err(Error::DimensionMismatch {
            expected: params.degree(),
            found: a.coeffs().len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params_q4() -> RingParams {
        RingParams::new(2, 1, &[1, 1, 1]).unwrap()
    }

    fn el(coeffs: &[i64], params: &RingParams) -> RElem {
        RElem::new(coeffs, params).unwrap()
    }

    #[test]
    fn add_componentwise() {
        let params = params_q4();
        let a = el(&[1, 1], &params);
        let b = el(&[3, 2], &params);
        assert_eq!(ring_add(&a, &b, &params).unwrap().coeffs(), &[0, 3]);
        let zero = el(&[0, 0], &params);
        assert_eq!(ring_add(&a, &zero, &params).unwrap(), a);
    }

    #[test]
    fn add_degree_one() {
        let params = RingParams::new(3, 0, &[1, 1]).unwrap();
        let a = el(&[2], &params);
        assert_eq!(ring_add(&a, &a, &params).unwrap().coeffs(), &[1]);
    }

    #[test]
    fn mul_reduces_by_modulus_polynomial() {
        // t * t = -t - 1 = 3t + 3 over (Z/4)[t]/(t^2+t+1)
        let params = params_q4();
        let t = el(&[0, 1], &params);
        assert_eq!(ring_mul(&t, &t, &params).unwrap().coeffs(), &[3, 3]);

        let a = el(&[2, 3], &params);
        let one = el(&[1, 0], &params);
        assert_eq!(ring_mul(&a, &one, &params).unwrap(), a);
    }

    #[test]
    fn mul_cubic_modulus() {
        // t^2 * t = -t - 1 over (Z/4)[t]/(t^3+t+1)
        let params = RingParams::new(2, 1, &[1, 1, 0, 1]).unwrap();
        let t = el(&[0, 1, 0], &params);
        let t2 = el(&[0, 0, 1], &params);
        assert_eq!(ring_mul(&t2, &t, &params).unwrap().coeffs(), &[3, 3, 0]);
    }

    #[test]
    fn valuation_conventions() {
        let params = params_q4();
        assert_eq!(valuation(&el(&[0, 0], &params), &params), 2);
        assert_eq!(valuation(&el(&[2, 2], &params), &params), 1);
        assert_eq!(valuation(&el(&[2, 1], &params), &params), 0);
        assert_eq!(valuation(&el(&[1, 0], &params), &params), 0);
    }

    #[test]
    fn invert_units() {
        let params = params_q4();
        let one = el(&[1, 0], &params);
        assert_eq!(invert_unit(&one, &params).unwrap(), one);

        // t^(-1) = 3 + 3t since t(3 + 3t) = 3t + 3t^2 = 1 mod (4, t^2+t+1)
        let t = el(&[0, 1], &params);
        let inv = invert_unit(&t, &params).unwrap();
        assert_eq!(inv.coeffs(), &[3, 3]);
        assert_eq!(ring_mul(&t, &inv, &params).unwrap(), one);

        let two_t = el(&[0, 2], &params);
        assert!(matches!(
            invert_unit(&two_t, &params),
            Err(Error::NotAUnit { valuation: 1 })
        ));
    }

    #[test]
    fn invert_units_degree_one() {
        // 2 * 5 = 10 = 1 mod 9
        let params = RingParams::new(3, 1, &[0, 1]).unwrap();
        let a = el(&[2], &params);
        assert_eq!(invert_unit(&a, &params).unwrap().coeffs(), &[5]);
    }

    #[test]
    fn dimension_mismatch_detected() {
        let params = params_q4();
        let other = RingParams::new(2, 1, &[1, 1, 0, 1]).unwrap();
        let a = el(&[1, 2, 3], &other);
        let b = el(&[1, 0], &params);
        assert!(matches!(
            ring_add(&a, &b, &params),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
    }

    fn all_elements(params: &RingParams) -> Vec<RElem> {
        let d = params.degree();
        let m = params.modulus();
        let total = (m as u128).pow(d as u32) as u64;
        (0..total)
            .map(|mut idx| {
                let mut coeffs = SmallVec::with_capacity(d);
                for _ in 0..d {
                    coeffs.push(idx % m);
                    idx /= m;
                }
                RElem::from_raw(coeffs)
            })
            .collect()
    }

    #[test]
    fn unit_count_matches_chain_ring_size() {
        // #units = q^(N+1) (1 - 1/q), exhaustively
        for params in [
            params_q4(),
            RingParams::new(3, 1, &[0, 1]).unwrap(),
            RingParams::new(2, 2, &[1, 1, 1]).unwrap(),
        ] {
            let ring = ExtRing::new(&params);
            let elems = all_elements(&params);
            let q = params.q() as u128;
            assert_eq!(elems.len() as u128, q.pow(params.nilpotency()));
            let units = elems.iter().filter(|e| ring.valuation(e) == 0).count() as u128;
            assert_eq!(units, q.pow(params.nilpotency()) - q.pow(params.nilpotency() - 1));
        }
    }

    #[test]
    fn unit_iff_invertible_by_pair_scan() {
        for params in [params_q4(), RingParams::new(3, 1, &[0, 1]).unwrap()] {
            let ring = ExtRing::new(&params);
            let elems = all_elements(&params);
            let one = ring.one();
            for a in &elems {
                let has_inverse = elems.iter().any(|b| ring.mul(a, b) == one);
                assert_eq!(has_inverse, ring.valuation(a) == 0, "element {a:?}");
            }
        }
    }

    #[test]
    fn valuation_is_multiplicative_exhaustive() {
        let params = params_q4();
        let ring = ExtRing::new(&params);
        let elems = all_elements(&params);
        let nil = ring.nilpotency();
        for a in &elems {
            for b in &elems {
                let lhs = ring.valuation(&ring.mul(a, b));
                let rhs = (ring.valuation(a) + ring.valuation(b)).min(nil);
                assert_eq!(lhs, rhs, "v({a:?} * {b:?})");
            }
        }
    }

    #[test]
    fn invert_unit_is_involutive() {
        let params = RingParams::new(2, 2, &[1, 1, 1]).unwrap();
        let ring = ExtRing::new(&params);
        for a in all_elements(&params) {
            if ring.valuation(&a) == 0 {
                let inv = ring.invert_unit(&a).unwrap();
                assert_eq!(ring.mul(&a, &inv), ring.one());
                assert_eq!(ring.invert_unit(&inv).unwrap(), a);
            }
        }
    }
}
