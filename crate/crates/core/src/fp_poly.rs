//! Dense polynomial arithmetic over the prime field F_p, used for the
//! irreducibility checks on quotient moduli and for residue-field inverses.
//!
//! Polynomials are coefficient vectors in ascending degree order with no
//! trailing zeros; the zero polynomial is the empty vector. Coefficients are
//! canonical residues in `[0, p)`.

/// Removes trailing zero coefficients in place.
pub fn trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

pub fn degree(a: &[u64]) -> Option<usize> {
    if a.is_empty() {
        None
    } else {
        Some(a.len() - 1)
    }
}

pub fn reduce_coeffs(a: &[u64], p: u64) -> Vec<u64> {
    let mut out: Vec<u64> = a.iter().map(|&c| c % p).collect();
    trim(&mut out);
    out
}

pub fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            let t = (ai as u128 * bj as u128 + out[i + j] as u128) % p as u128;
            out[i + j] = t as u64;
        }
    }
    trim(&mut out);
    out
}

pub fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out = vec![0u64; n];
    for (i, o) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        *o = (x + p - y) % p;
    }
    trim(&mut out);
    out
}

/// Modular inverse in F_p by extended Euclid on integers.
pub fn inv_mod_p(a: u64, p: u64) -> u64 {
    assert!(!a.is_multiple_of(p), "zero has no inverse mod {p}");
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (p as i128, (a % p) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    debug_assert_eq!(r, 1);
    t.rem_euclid(p as i128) as u64
}

/// Division with remainder; the divisor must be nonzero.
pub fn div_rem(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    assert!(!b.is_empty(), "division by the zero polynomial");
    let db = b.len() - 1;
    let lead_inv = inv_mod_p(b[db], p);
    let mut rem = a.to_vec();
    trim(&mut rem);
    let mut quot = vec![0u64; a.len().saturating_sub(db)];
    while rem.len() > db {
        let dr = rem.len() - 1;
        let c = (rem[dr] as u128 * lead_inv as u128 % p as u128) as u64;
        let shift = dr - db;
        quot[shift] = c;
        for j in 0..=db {
            let t = (c as u128 * b[j] as u128) % p as u128;
            rem[shift + j] = ((rem[shift + j] as u128 + p as u128 - t) % p as u128) as u64;
        }
        trim(&mut rem);
    }
    trim(&mut quot);
    (quot, rem)
}

pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    while !b.is_empty() {
        let (_, r) = div_rem(&a, &b, p);
        a = b;
        b = r;
    }
    if let Some(&lc) = a.last() {
        if lc != 1 {
            let inv = inv_mod_p(lc, p);
            for c in &mut a {
                *c = (*c as u128 * inv as u128 % p as u128) as u64;
            }
        }
    }
    a
}

/// Inverse of `a` in `F_p[t]/(m)`, if `gcd(a, m) = 1`.
pub fn inv_mod_poly(a: &[u64], m: &[u64], p: u64) -> Option<Vec<u64>> {
    // extended Euclid keeping only the coefficient of `a`
    let (mut r0, mut r1) = (m.to_vec(), {
        let (_, r) = div_rem(a, m, p);
        r
    });
    let (mut s0, mut s1): (Vec<u64>, Vec<u64>) = (Vec::new(), vec![1]);
    while !r1.is_empty() {
        let (q, r) = div_rem(&r0, &r1, p);
        let s = sub(&s0, &mul(&q, &s1, p), p);
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s;
    }
    if degree(&r0) != Some(0) {
        return None;
    }
    let scale = inv_mod_p(r0[0], p);
    let mut out: Vec<u64> = s0
        .iter()
        .map(|&c| (c as u128 * scale as u128 % p as u128) as u64)
        .collect();
    trim(&mut out);
    let (_, out) = div_rem(&out, m, p);
    Some(out)
}

/// `a^p mod m`, square-and-multiply on the bits of `p`.
fn pow_p_mod(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut base = {
        let (_, r) = div_rem(a, m, p);
        r
    };
    let mut acc = vec![1u64];
    let mut e = p;
    while e > 0 {
        if e & 1 == 1 {
            let t = mul(&acc, &base, p);
            let (_, r) = div_rem(&t, m, p);
            acc = r;
        }
        let t = mul(&base, &base, p);
        let (_, r) = div_rem(&t, m, p);
        base = r;
        e >>= 1;
    }
    acc
}

fn prime_factors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut f = 2;
    while f * f <= n {
        if n.is_multiple_of(f) {
            out.push(f);
            while n.is_multiple_of(f) {
                n /= f;
            }
        }
        f += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Frobenius-based irreducibility test: `m` of degree d is irreducible over
/// F_p iff t^(p^d) = t mod m and gcd(t^(p^(d/l)) - t, m) = 1 for every prime
/// l dividing d.
fn is_irreducible_frobenius(m: &[u64], p: u64) -> bool {
    let d = degree(m).expect("nonzero modulus");
    let t_poly = vec![0u64, 1];
    // frob[k] = t^(p^k) mod m, built by repeated p-th powers
    let mut frob = {
        let (_, r) = div_rem(&t_poly, m, p);
        r
    };
    let mut at_step = vec![frob.clone()];
    for _ in 0..d {
        frob = pow_p_mod(&frob, m, p);
        at_step.push(frob.clone());
    }
    let t_red = {
        let (_, r) = div_rem(&t_poly, m, p);
        r
    };
    if at_step[d] != t_red {
        return false;
    }
    for l in prime_factors(d) {
        let w = &at_step[d / l];
        let diff = sub(w, &t_red, p);
        let g = gcd(&diff, m, p);
        if degree(&g) != Some(0) {
            return false;
        }
    }
    true
}

/// Trial-factorization irreducibility: search monic divisors of degree up to
/// d/2. Only viable when `p^(d/2)` is small.
fn is_irreducible_trial(m: &[u64], p: u64) -> bool {
    let d = degree(m).expect("nonzero modulus");
    for k in 1..=d / 2 {
        // all monic polynomials of degree k
        let mut digits = vec![0u64; k];
        loop {
            let mut cand = Vec::with_capacity(k + 1);
            cand.extend_from_slice(&digits);
            cand.push(1);
            let (_, r) = div_rem(m, &cand, p);
            if r.is_empty() {
                return false;
            }
            let mut i = 0;
            loop {
                if i == k {
                    break;
                }
                digits[i] += 1;
                if digits[i] < p {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
            if i == k {
                break;
            }
        }
    }
    true
}

/// Irreducibility over F_p. Dispatches to exhaustive trial factorization for
/// small search spaces and to the Frobenius criterion otherwise; both are
/// exact.
pub fn is_irreducible(m: &[u64], p: u64) -> bool {
    let d = match degree(m) {
        Some(d) if d >= 1 => d,
        _ => return false,
    };
    if d == 1 {
        return true;
    }
    let trial_space = (p as u128).checked_pow((d / 2) as u32);
    if d <= 4 && trial_space.is_some_and(|s| s <= 1 << 16) {
        is_irreducible_trial(m, p)
    } else {
        is_irreducible_frobenius(m, p)
    }
}

/// Deterministic primality by trial division; adequate for p below 2^32.
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p.is_multiple_of(2) {
        return p == 2;
    }
    let mut f = 3u64;
    while f.saturating_mul(f) <= p {
        if p.is_multiple_of(f) {
            return false;
        }
        f += 2;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_round_trip() {
        let p = 5;
        let m = vec![3, 0, 1]; // t^2 + 3, irreducible mod 5
        for a in [vec![1u64], vec![2, 3], vec![4, 4]] {
            let inv = inv_mod_poly(&a, &m, p).unwrap();
            let (_, r) = div_rem(&mul(&a, &inv, p), &m, p);
            assert_eq!(r, vec![1]);
        }
    }

    #[test]
    fn irreducibility_known_cases() {
        // x^2 + x + 1 irreducible mod 2, x^2 + 1 reducible mod 2
        assert!(is_irreducible(&[1, 1, 1], 2));
        assert!(!is_irreducible(&[1, 0, 1], 2));
        // x^2 + 1 irreducible mod 3
        assert!(is_irreducible(&[1, 0, 1], 3));
        // x^3 + x + 1 irreducible mod 2, x^3 + 1 = (x+1)(x^2+x+1)
        assert!(is_irreducible(&[1, 1, 0, 1], 2));
        assert!(!is_irreducible(&[1, 0, 0, 1], 2));
        // degree 4: x^4 + x + 1 irreducible mod 2, x^4 + x^2 + 1 is (x^2+x+1)^2
        assert!(is_irreducible(&[1, 1, 0, 0, 1], 2));
        assert!(!is_irreducible(&[1, 0, 1, 0, 1], 2));
    }

    #[test]
    fn trial_and_frobenius_agree() {
        for p in [2u64, 3, 5] {
            for mask in 0..p.pow(3) {
                let mut m = vec![mask % p, (mask / p) % p, (mask / (p * p)) % p, 1];
                trim(&mut m);
                if degree(&m) != Some(3) {
                    continue;
                }
                assert_eq!(
                    is_irreducible_trial(&m, p),
                    is_irreducible_frobenius(&m, p),
                    "disagreement at p={p}, m={m:?}"
                );
            }
        }
    }

    #[test]
    fn primality_small() {
        let primes: Vec<u64> = (0..60).filter(|&n| is_prime(n)).collect();
        assert_eq!(primes, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]);
    }
}
