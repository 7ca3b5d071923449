//! Closed-form right-hand sides in exact rational arithmetic. No floating
//! point appears anywhere on a verification path; decimal renderings exist
//! for display only.

use crate::autgroup::aut_order;
use crate::params::RingParams;
use crate::partition::ModuleType;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

/// `prod_{i=1..r} (1 - q^-i)^2 * q^(r^2) / |Aut(G)|` over the residue field
/// of size q: the lift-count factor shared by the closed forms.
fn count_factor(g: &ModuleType, q: u64) -> BigRational {
    let r = g.rank_q() as u32;
    let q_big = BigInt::from(q);
    let mut value = BigRational::from_integer(q_big.pow(r * r));
    for i in 1..=r {
        let qi = q_big.pow(i);
        let term = BigRational::new(&qi - BigInt::one(), qi);
        value *= &term * &term;
    }
    value / BigRational::from_integer(aut_order(g, q))
}

/// Closed-form count of lifts `X = Xbar + p*M` over `Z/p^(N+1)` with the
/// prescribed cokernel type, for any valid residue:
/// `p^(N n^2) * q^(r^2) * prod(1 - q^-i)^2 / |Aut_R(G)|`.
///
/// The value is returned for every input; it is an integer exactly when a
/// valid fiber exists (callers detect vacuous fibers by a mod-p scan).
pub fn lift_count_formula(g: &ModuleType, params: &RingParams, n: usize) -> BigRational {
    let exp = params.trunc() * (n * n) as u32;
    let scale = BigRational::from_integer(BigInt::from(params.p()).pow(exp));
    scale * count_factor(g, params.q())
}

/// The displayed probability `p^(d r^2 - n^2) * prod(1 - q^-i)^2 / |Aut|`,
/// equal to the lift count divided by `p^((N+1) n^2)`.
pub fn lift_probability_formula(g: &ModuleType, params: &RingParams, n: usize) -> BigRational {
    let full = (params.nilpotency() as usize * n * n) as u32;
    lift_count_formula(g, params, n)
        / BigRational::from_integer(BigInt::from(params.p()).pow(full))
}

/// Closed-form count of lifts `Z` over `Mat_n(R)` of a mod-p residue with
/// prescribed cokernel type: `q^(N n^2) * q^(r^2) * prod(1 - q^-i)^2 / |Aut|`.
pub fn ext_lift_count_formula(h: &ModuleType, params: &RingParams, n: usize) -> BigRational {
    let exp = params.trunc() * (n * n) as u32;
    let scale = BigRational::from_integer(BigInt::from(params.q()).pow(exp));
    scale * count_factor(h, params.q())
}

/// The degree-one specialization `p^(r^2 - n^2) * prod(1 - p^-i)^2 / |Aut|`.
/// Must agree with [`lift_probability_formula`] whenever `deg(P) = 1`.
pub fn fw_probability_formula(g: &ModuleType, p: u64, n: usize) -> BigRational {
    let r = g.rank_q() as u32;
    let nn = (n * n) as u32;
    let p_big = BigInt::from(p);
    let mut value = BigRational::new(p_big.pow(r * r), p_big.pow(nn));
    for i in 1..=r {
        let pi = p_big.pow(i);
        let term = BigRational::new(&pi - BigInt::one(), pi);
        value *= &term * &term;
    }
    value / BigRational::from_integer(aut_order(g, p))
}

/// Joint count display for several distinct moduli: `p^(N n^2)` times the
/// product of the per-modulus lift-count factors.
pub fn joint_lift_count_formula(
    targets: &[(RingParams, ModuleType)],
    p: u64,
    trunc: u32,
    n: usize,
) -> BigRational {
    let exp = trunc * (n * n) as u32;
    let mut value = BigRational::from_integer(BigInt::from(p).pow(exp));
    for (params, g) in targets {
        value *= count_factor(g, params.q());
    }
    value
}

/// Truncation of the limiting mass `prod_{i>=1}(1 - q^-i) / |Aut_R(G)|`,
/// cut off at `terms` factors.
pub fn limit_mass(g: &ModuleType, q: u64, terms: u32) -> BigRational {
    let q_big = BigInt::from(q);
    let mut value = BigRational::from_integer(BigInt::one());
    for i in 1..=terms {
        let qi = q_big.pow(i);
        value *= BigRational::new(&qi - BigInt::one(), qi);
    }
    value / BigRational::from_integer(aut_order(g, q))
}

/// Fixed-point decimal rendering with the given number of fractional digits,
/// truncated toward zero. Display only; exactness lives in the rational.
pub fn decimal_string(value: &BigRational, digits: u32) -> String {
    let sign = if value.is_negative() { "-" } else { "" };
    let abs = value.abs();
    let scaled = (abs.numer() * BigInt::from(10u32).pow(digits)) / abs.denom();
    let whole = &scaled / BigInt::from(10u32).pow(digits);
    let frac = &scaled % BigInt::from(10u32).pow(digits);
    format!("{sign}{whole}.{frac:0>width$}", width = digits as usize)
}

/// Is the rational an integer, and if so which one.
pub fn as_integer(value: &BigRational) -> Option<BigInt> {
    if value.is_integer() {
        Some(value.to_integer())
    } else {
        None
    }
}

/// Exact equality of a rational against an integer count.
pub fn equals_count(value: &BigRational, count: u64) -> bool {
    value.is_integer() && value.to_integer() == BigInt::from(count)
}

pub fn rational_to_f64(value: &BigRational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> ModuleType {
        s.parse().unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn lift_counts_from_worked_examples() {
        // p=2, P=t, n=1, N=1, G=[1]: 2 * 2 * (1/2)^2 / 1 = 1
        let params = RingParams::new(2, 1, &[0, 1]).unwrap();
        assert_eq!(lift_count_formula(&t("1"), &params, 1), rat(1, 1));

        // p=2, P=t^2+t+1, n=2, N=1, G=[1]: 16 * 4 * (3/4)^2 / 3 = 12
        let params = RingParams::new(2, 1, &[1, 1, 1]).unwrap();
        assert_eq!(lift_count_formula(&t("1"), &params, 2), rat(12, 1));

        // p=2, P=t, n=2, N=1, G=[1,1]: 16 * 16 * (9/64) / 6 = 6
        let params = RingParams::new(2, 1, &[0, 1]).unwrap();
        assert_eq!(lift_count_formula(&t("1,1"), &params, 2), rat(6, 1));

        // p=2, P=t, n=2, N=2, G=[2]: 256 * 2 * (1/4) / 2 = 64
        let params = RingParams::new(2, 2, &[0, 1]).unwrap();
        assert_eq!(lift_count_formula(&t("2"), &params, 2), rat(64, 1));

        // p=2, P=t^3+t+1, n=3, N=1, G=[1]: 512 * 8 * (49/64) / 7 = 448
        let params = RingParams::new(2, 1, &[1, 1, 0, 1]).unwrap();
        assert_eq!(lift_count_formula(&t("1"), &params, 3), rat(448, 1));
    }

    #[test]
    fn probabilities_from_worked_examples() {
        // p=2, P=t, n=1, G=[1]: (p-1)/p^2 = 1/4
        let params = RingParams::new(2, 1, &[0, 1]).unwrap();
        assert_eq!(lift_probability_formula(&t("1"), &params, 1), rat(1, 4));

        // trivial G: p^-(n^2)
        assert_eq!(lift_probability_formula(&t(""), &params, 1), rat(1, 2));

        // p=3, P=t, n=1, G=[1]: 2/9
        let params = RingParams::new(3, 1, &[0, 1]).unwrap();
        assert_eq!(lift_probability_formula(&t("1"), &params, 1), rat(2, 9));
    }

    #[test]
    fn degree_one_specialization_matches() {
        // the two formula paths agree at deg(P) = 1 for all small cases
        for p in [2u64, 3] {
            let params = RingParams::new(p, 2, &[-1, 1]).unwrap();
            for g in ["", "1", "2", "1,1"] {
                for n in 1..=2 {
                    assert_eq!(
                        fw_probability_formula(&t(g), p, n),
                        lift_probability_formula(&t(g), &params, n),
                        "G=[{g}], p={p}, n={n}"
                    );
                }
            }
        }
    }

    #[test]
    fn ext_lift_count_example() {
        // q=4, N=1, n=1, H=[1]: 4 * 4 * (9/16) / 3 = 3
        let params = RingParams::new(2, 1, &[1, 1, 1]).unwrap();
        assert_eq!(ext_lift_count_formula(&t("1"), &params, 1), rat(3, 1));
    }

    #[test]
    fn joint_formula_single_factor_degenerates() {
        let params = RingParams::new(2, 1, &[0, 1]).unwrap();
        let joint = joint_lift_count_formula(&[(params.clone(), t("1,1"))], 2, 1, 2);
        assert_eq!(joint, lift_count_formula(&t("1,1"), &params, 2));
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(decimal_string(&rat(1, 4), 12), "0.250000000000");
        assert_eq!(decimal_string(&rat(448, 1), 3), "448.000");
        assert_eq!(decimal_string(&rat(-1, 3), 6), "-0.333333");
        assert_eq!(decimal_string(&rat(2, 9), 12), "0.222222222222");
    }

    #[test]
    fn vacuous_configurations_are_non_integral() {
        // G=[1] over q=4 cannot arise at n=1 (needs d*r <= n); the formula
        // value is the non-integer 3/2 and integrality detection flags it
        let params = RingParams::new(2, 1, &[1, 1, 1]).unwrap();
        let v = lift_count_formula(&t("1"), &params, 1);
        assert_eq!(v, rat(3, 2));
        assert!(as_integer(&v).is_none());
        assert!(!equals_count(&v, 1));
    }
}
