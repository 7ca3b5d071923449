//! Smith normal form over the chain rings `Z/p^(N+1)` and `R`, and cokernel
//! types derived from it.
//!
//! Over a chain ring every nonzero element is a unit times a power of p, so
//! diagonalization never needs gcd steps: pick an entry of minimal valuation,
//! scale its row so the pivot becomes a pure power of p, and clear its row
//! and column with exact multipliers. The diagonal exponents then come out
//! weakly increasing on their own.

use crate::matrix::{det, identity, mat_mul, Matrix};
use crate::params::RingParams;
use crate::partition::ModuleType;
use crate::ring::{ExtRing, RElem, Ring};

/// A recorded diagonalization `left * A * right = diag(p^e_i)`.
#[derive(Clone, Debug)]
pub struct SnfResult<T> {
    /// Weakly increasing exponents in `[0, N+1]`, length `min(rows, cols)`.
    pub exponents: Vec<u32>,
    pub left: Matrix<T>,
    pub right: Matrix<T>,
}

impl<T: Clone + Eq + std::hash::Hash + std::fmt::Debug + Send + Sync> SnfResult<T> {
    /// Checks `left * A * right == diag(p^e_i)` entrywise and that both
    /// transforms have unit determinant.
    pub fn verify<R: Ring<Elem = T>>(&self, ring: &R, original: &Matrix<T>) -> bool {
        let prod = match mat_mul(ring, &self.left, original)
            .and_then(|la| mat_mul(ring, &la, &self.right))
        {
            Ok(p) => p,
            Err(_) => return false,
        };
        for i in 0..prod.rows() {
            for j in 0..prod.cols() {
                let expected = if i == j && i < self.exponents.len() {
                    ring.p_pow(self.exponents[i])
                } else {
                    ring.zero()
                };
                if *prod.at(i, j) != expected {
                    return false;
                }
            }
        }
        ring.valuation(&det(ring, &self.left)) == 0
            && ring.valuation(&det(ring, &self.right)) == 0
    }
}

/// Accumulators for the left and right transforms.
type TransformPair<'a, E> = (&'a mut Matrix<E>, &'a mut Matrix<E>);

/// Eliminates in place and returns the diagonal exponents. When `transforms`
/// is provided, the corresponding row and column operations are accumulated
/// into the pair (left, right).
fn snf_kernel<R: Ring>(
    ring: &R,
    a: &mut Matrix<R::Elem>,
    transforms: Option<TransformPair<'_, R::Elem>>,
    exponents: &mut Vec<u32>,
) {
    let rows = a.rows();
    let cols = a.cols();
    let steps = rows.min(cols);
    let nil = ring.nilpotency();
    exponents.clear();
    let (mut left_opt, mut right_opt) = match transforms {
        Some((l, r)) => (Some(l), Some(r)),
        None => (None, None),
    };
    let tracking = left_opt.is_some();

    for k in 0..steps {
        // minimal-valuation pivot, first in row-major order on ties
        let mut best = nil;
        let mut pivot = None;
        'search: for i in k..rows {
            for j in k..cols {
                let v = ring.valuation(a.at(i, j));
                if v < best {
                    best = v;
                    pivot = Some((i, j));
                    if v == 0 {
                        break 'search;
                    }
                }
            }
        }
        let (pi, pj) = match pivot {
            Some(p) => p,
            None => {
                // all-zero block: the remaining diagonal is p^(N+1) = 0
                exponents.resize(steps, nil);
                return;
            }
        };
        a.swap_rows(k, pi);
        a.swap_cols(k, pj);
        if let Some(left) = &mut left_opt {
            left.swap_rows(k, pi);
        }
        if let Some(right) = &mut right_opt {
            right.swap_cols(k, pj);
        }

        // scale the pivot row so the pivot becomes exactly p^e
        let e = best;
        let unit = ring.div_exact_p_pow(a.at(k, k), e);
        let w = ring
            .invert_unit(&unit)
            .expect("pivot of valuation e factors as p^e times a unit");
        for j in k..cols {
            *a.at_mut(k, j) = ring.mul(&w, a.at(k, j));
        }
        if let Some(left) = &mut left_opt {
            for j in 0..left.cols() {
                *left.at_mut(k, j) = ring.mul(&w, left.at(k, j));
            }
        }

        // clear the pivot column; multipliers are exact since every entry
        // below has valuation >= e
        for i in k + 1..rows {
            if ring.is_zero(a.at(i, k)) {
                continue;
            }
            let c = ring.div_exact_p_pow(a.at(i, k), e);
            let start = if tracking { k } else { k + 1 };
            for j in start..cols {
                let t = ring.mul(&c, a.at(k, j));
                *a.at_mut(i, j) = ring.sub(a.at(i, j), &t);
            }
            if let Some(left) = &mut left_opt {
                for j in 0..left.cols() {
                    let t = ring.mul(&c, left.at(k, j));
                    *left.at_mut(i, j) = ring.sub(left.at(i, j), &t);
                }
            }
        }

        // clear the pivot row; this no longer touches the minor because the
        // pivot column below k is already zero
        if let Some(right) = &mut right_opt {
            for j in k + 1..cols {
                if ring.is_zero(a.at(k, j)) {
                    continue;
                }
                let c = ring.div_exact_p_pow(a.at(k, j), e);
                for i in k..rows {
                    let t = ring.mul(&c, a.at(i, k));
                    *a.at_mut(i, j) = ring.sub(a.at(i, j), &t);
                }
                for i in 0..right.rows() {
                    let t = ring.mul(&c, right.at(i, k));
                    *right.at_mut(i, j) = ring.sub(right.at(i, j), &t);
                }
            }
        }

        exponents.push(e);
    }
}

/// Full Smith normal form with recorded invertible transforms. In debug
/// builds the factorization is re-verified against the input.
pub fn smith_normal_form<R: Ring>(ring: &R, a: &Matrix<R::Elem>) -> SnfResult<R::Elem> {
    let mut work = a.clone();
    let mut left = identity(ring, a.rows());
    let mut right = identity(ring, a.cols());
    let mut exponents = Vec::new();
    snf_kernel(ring, &mut work, Some((&mut left, &mut right)), &mut exponents);
    let result = SnfResult {
        exponents,
        left,
        right,
    };
    debug_assert!(result.verify(ring, a), "SNF transform verification failed");
    result
}

/// Diagonal exponents only, destroying `work`; the fast path for scan loops.
pub fn snf_exponents_in_place<R: Ring>(
    ring: &R,
    work: &mut Matrix<R::Elem>,
    exponents: &mut Vec<u32>,
) {
    snf_kernel(ring, work, None, exponents);
}

/// The cokernel type of a matrix: nonzero diagonal exponents of its Smith
/// normal form as a weakly decreasing partition. For a wide kernel of rows
/// not covered by the diagonal, each uncovered row contributes a free
/// summand (part N+1).
pub fn cokernel_type<R: Ring>(ring: &R, a: &Matrix<R::Elem>) -> ModuleType {
    let mut work = a.clone();
    let mut exponents = Vec::new();
    snf_kernel(ring, &mut work, None, &mut exponents);
    if a.rows() > a.cols() {
        exponents.resize(a.rows(), ring.nilpotency());
    }
    ModuleType::from_exponents(&exponents)
}

/// The pencil `X - g I_n` over `R`, where `g` is the class of `t` and `X` is
/// a scalar matrix embedded as constants.
pub fn companion_pencil(x: &Matrix<u64>, params: &RingParams) -> Matrix<RElem> {
    assert!(x.is_square(), "pencil needs a square matrix");
    let n = x.rows();
    let ring = ExtRing::new(params);
    let gen = params.quotient_gen();
    let mut out = Matrix::filled(n, n, ring.zero());
    for i in 0..n {
        for j in 0..n {
            let mut e = RElem::constant(*x.at(i, j), params);
            if i == j {
                e = ring.sub(&e, &gen);
            }
            *out.at_mut(i, j) = e;
        }
    }
    out
}

/// The R-module type of `cok_R(X - g I_n)`, which coincides with the type of
/// `cok(P(X))` under restriction of scalars.
pub fn companion_cokernel(x: &Matrix<u64>, params: &RingParams) -> ModuleType {
    let ring = ExtRing::new(params);
    cokernel_type(&ring, &companion_pencil(x, params))
}

/// The abelian-group type underlying an R-module type: each part repeats
/// deg(P) times.
pub fn abelianize(m: &ModuleType, params: &RingParams) -> ModuleType {
    m.abelianize(params.degree())
}
