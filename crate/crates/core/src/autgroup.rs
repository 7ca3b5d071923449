//! Automorphism-group orders of finite modules over a chain ring with a
//! residue field of `q_base` elements.
//!
//! Two independent routes. [`aut_order`] evaluates the closed product
//! formula adopted for a partition. [`aut_order_bruteforce`] counts
//! invertible endomorphisms by enumeration and is the ground truth the
//! closed form is validated against: an endomorphism of
//! `G = sum_i R0/p^(l_i)` is a matrix whose (i,j) entry ranges over
//! `Hom(R0/p^(l_j), R0/p^(l_i))`, and it is an automorphism exactly when it
//! is surjective. Small modules are checked by literally applying every
//! endomorphism to every element; larger ones share work across
//! endomorphisms that agree modulo p, since surjectivity only depends on the
//! induced map on G/pG.

use crate::error::{Error, Result};
use crate::fp_poly;
use crate::params::RingParams;
use crate::partition::ModuleType;
use crate::ring::{ExtRing, RElem, Ring};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

/// Above this many endomorphism-element applications the oracle switches
/// from the literal scan to the residue-sharing scan.
const LITERAL_CAP: u128 = 1 << 22;

/// Residue vector spaces larger than this are out of oracle scope.
const SPAN_SPACE_CAP: u128 = 1 << 20;

/// Closed product formula for |Aut(G)| over a base with residue field of
/// size `q_base`: with m_k the multiplicity of part k,
/// `q^(sum_{i,j} min(l_i, l_j)) * prod_k prod_{j=1..m_k} (1 - q^-j)`.
pub fn aut_order(g: &ModuleType, q_base: u64) -> BigInt {
    assert!(q_base >= 2, "residue field needs at least two elements");
    let parts = g.parts();
    let mut sum_min: u32 = 0;
    for &a in parts {
        for &b in parts {
            sum_min += a.min(b);
        }
    }
    let q = BigInt::from(q_base);
    let mut value = BigRational::from_integer(q.pow(sum_min));
    for (_, mult) in g.multiplicities() {
        for j in 1..=mult {
            let qj = q.pow(j as u32);
            value *= BigRational::new(&qj - BigInt::one(), qj);
        }
    }
    debug_assert!(value.is_integer() && value.numer().is_positive());
    value.to_integer()
}

/// Counts invertible endomorphisms by enumeration; errors out when the
/// work estimate `q_base^(sum(parts) * rank)` exceeds `budget`.
pub fn aut_order_bruteforce(g: &ModuleType, q_base: u64, budget: u128) -> Result<BigInt> {
    let shape = ModuleShape::build(g, q_base)?;
    if g.is_trivial() {
        return Ok(BigInt::one());
    }
    let work = (q_base as u128)
        .checked_pow(g.total().saturating_mul(g.rank_q() as u32))
        .unwrap_or(u128::MAX);
    if work > budget {
        return Err(Error::BudgetExceeded {
            required: work,
            budget,
        });
    }
    let mut endo_space: u128 = 1;
    for &a in &shape.parts {
        for &b in &shape.parts {
            endo_space = endo_space.saturating_mul((q_base as u128).pow(a.min(b)));
        }
    }
    let size: u128 = (q_base as u128).pow(g.total());
    if endo_space.saturating_mul(size) <= LITERAL_CAP {
        aut_order_literal(&shape)
    } else {
        aut_order_shared(&shape)
    }
}

/// Common data for both oracle paths.
struct ModuleShape {
    /// Parts, weakly decreasing.
    parts: Vec<u32>,
    p: u64,
    ext_degree: usize,
    q: u64,
    /// Monic irreducible polynomial defining the unramified extension.
    base_poly: Vec<i64>,
}

impl ModuleShape {
    fn build(g: &ModuleType, q_base: u64) -> Result<Self> {
        let (p, e) = prime_power(q_base)?;
        let base_poly = find_base_poly(p, e)?;
        Ok(ModuleShape {
            parts: g.parts().to_vec(),
            p,
            ext_degree: e,
            q: q_base,
            base_poly,
        })
    }

    fn rank(&self) -> usize {
        self.parts.len()
    }

    fn params_at(&self, level: u32) -> RingParams {
        RingParams::new(self.p, level - 1, &self.base_poly).expect("validated base polynomial")
    }
}

fn prime_power(q: u64) -> Result<(u64, usize)> {
    if q < 2 {
        return Err(Error::InvalidParams(format!(
            "residue field size {q} is not a prime power"
        )));
    }
    let mut p = 2;
    while p * p <= q && !q.is_multiple_of(p) {
        p += 1;
    }
    if p * p > q {
        p = q;
    }
    let mut e = 0;
    let mut rest = q;
    while rest.is_multiple_of(p) {
        rest /= p;
        e += 1;
    }
    if rest != 1 {
        return Err(Error::InvalidParams(format!(
            "residue field size {q} is not a prime power"
        )));
    }
    Ok((p, e))
}

/// First monic irreducible polynomial of the requested degree mod p, by
/// lexicographic search on the lower coefficients; deterministic.
fn find_base_poly(p: u64, e: usize) -> Result<Vec<i64>> {
    if e == 1 {
        return Ok(vec![0, 1]);
    }
    if (p as u128).checked_pow(e as u32).is_none_or(|s| s > 1 << 16) {
        return Err(Error::InvalidParams(format!(
            "residue field of size {p}^{e} is too large for the oracle"
        )));
    }
    let mut digits = vec![0u64; e];
    loop {
        let mut cand: Vec<u64> = digits.clone();
        cand.push(1);
        if fp_poly::is_irreducible(&cand, p) {
            return Ok(cand.into_iter().map(|c| c as i64).collect());
        }
        let mut i = 0;
        while i < e {
            digits[i] += 1;
            if digits[i] < p {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
        if i == e {
            return Err(Error::InvalidParams(format!(
                "no irreducible polynomial of degree {e} mod {p}"
            )));
        }
    }
}

/// One cyclic component `R0/p^level` with its full element table.
struct Component {
    params: RingParams,
    level: u32,
    elems: Vec<RElem>,
}

impl Component {
    fn build(shape: &ModuleShape, level: u32) -> Component {
        let params = shape.params_at(level);
        let modulus = params.modulus();
        let d = shape.ext_degree;
        let size = (modulus as u128).pow(d as u32) as u64;
        let elems = (0..size)
            .map(|mut idx| {
                let mut coeffs = Vec::with_capacity(d);
                for _ in 0..d {
                    coeffs.push((idx % modulus) as i64);
                    idx /= modulus;
                }
                RElem::new(&coeffs, &params).expect("in-range coefficients")
            })
            .collect();
        Component {
            params,
            level,
            elems,
        }
    }

    fn index_of(&self, e: &RElem) -> u64 {
        let modulus = self.params.modulus();
        let mut idx = 0u64;
        for &c in e.coeffs().iter().rev() {
            idx = idx * modulus + c;
        }
        idx
    }

    /// Reinterprets an element of another component in this component's
    /// ring: reduce the coefficients (a lift when the source level is
    /// lower; which lift is taken does not matter against hom elements).
    fn coerce(&self, e: &RElem) -> RElem {
        let coeffs: Vec<i64> = e
            .coeffs()
            .iter()
            .map(|&c| (c % self.params.modulus()) as i64)
            .collect();
        RElem::new(&coeffs, &self.params).expect("conforming length")
    }
}

/// Hom(R0/p^(source), R0/p^(target.level)) materialized inside the target
/// component: all multiples of p^max(target - source, 0), one per residue of
/// the smaller quotient.
fn hom_set(target: &Component, source_level: u32) -> Vec<RElem> {
    let ring = ExtRing::new(&target.params);
    let shift = target.level.saturating_sub(source_level);
    let scale = ring.p_pow(shift);
    let span = target.level.min(source_level);
    let d = target.params.degree();
    let pspan = target.params.p().pow(span);
    let size = (pspan as u128).pow(d as u32) as u64;
    (0..size)
        .map(|mut idx| {
            let mut coeffs = Vec::with_capacity(d);
            for _ in 0..d {
                coeffs.push((idx % pspan) as i64);
                idx /= pspan;
            }
            let u = RElem::new(&coeffs, &target.params).expect("in range");
            ring.mul(&scale, &u)
        })
        .collect()
}

/// The definitional oracle: enumerate every endomorphism matrix and test
/// surjectivity by applying it to every module element.
fn aut_order_literal(shape: &ModuleShape) -> Result<BigInt> {
    let r = shape.rank();
    let components: Vec<Component> = shape
        .parts
        .iter()
        .map(|&l| Component::build(shape, l))
        .collect();
    let rings: Vec<ExtRing> = components.iter().map(|c| ExtRing::new(&c.params)).collect();
    let homs: Vec<Vec<RElem>> = (0..r * r)
        .map(|idx| hom_set(&components[idx / r], components[idx % r].level))
        .collect();
    // source elements coerced into each target ring, aligned with elems
    let coerced: Vec<Vec<RElem>> = (0..r * r)
        .map(|idx| {
            let (i, j) = (idx / r, idx % r);
            components[j]
                .elems
                .iter()
                .map(|x| components[i].coerce(x))
                .collect()
        })
        .collect();

    let comp_sizes: Vec<u64> = components.iter().map(|c| c.elems.len() as u64).collect();
    let total_elems: u64 = comp_sizes.iter().product();

    let mut digits = vec![0usize; r * r];
    let mut seen = vec![false; total_elems as usize];
    let mut elem_digits = vec![0usize; r];
    let mut count = BigInt::ZERO;
    loop {
        seen.fill(false);
        let mut covered = 0u64;
        elem_digits.fill(0);
        'elems: loop {
            let mut out_index = 0u64;
            for i in (0..r).rev() {
                let mut acc = rings[i].zero();
                for j in 0..r {
                    let b = &homs[i * r + j][digits[i * r + j]];
                    let x = &coerced[i * r + j][elem_digits[j]];
                    let t = rings[i].mul(b, x);
                    acc = rings[i].add(&acc, &t);
                }
                out_index = out_index * comp_sizes[i] + components[i].index_of(&acc);
            }
            if !seen[out_index as usize] {
                seen[out_index as usize] = true;
                covered += 1;
            }
            for j in 0..r {
                elem_digits[j] += 1;
                if elem_digits[j] < comp_sizes[j] as usize {
                    continue 'elems;
                }
                elem_digits[j] = 0;
            }
            break;
        }
        if covered == total_elems {
            count += 1;
        }

        let mut k = 0;
        loop {
            if k == r * r {
                return Ok(count);
            }
            digits[k] += 1;
            if digits[k] < homs[k].len() {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
    }
}

/// Residue-field arithmetic on packed indices: an F_q element is `ext_degree`
/// base-p digits, a vector in F_q^r is r such components concatenated.
struct FieldTables {
    p: u64,
    q: usize,
    rank: usize,
    digits: usize,
    mul: Vec<u16>,
}

impl FieldTables {
    fn build(shape: &ModuleShape) -> FieldTables {
        let params = shape.params_at(1);
        let ring = ExtRing::new(&params);
        let q = shape.q as usize;
        let p = shape.p;
        let d = shape.ext_degree;
        let elems: Vec<RElem> = (0..q as u64)
            .map(|mut idx| {
                let mut coeffs = Vec::with_capacity(d);
                for _ in 0..d {
                    coeffs.push((idx % p) as i64);
                    idx /= p;
                }
                RElem::new(&coeffs, &params).expect("in range")
            })
            .collect();
        let index_of = |e: &RElem| -> usize {
            let mut idx = 0u64;
            for &c in e.coeffs().iter().rev() {
                idx = idx * p + c;
            }
            idx as usize
        };
        let mut mul = vec![0u16; q * q];
        for (a, ea) in elems.iter().enumerate() {
            for (b, eb) in elems.iter().enumerate() {
                mul[a * q + b] = index_of(&ring.mul(ea, eb)) as u16;
            }
        }
        FieldTables {
            p,
            q,
            rank: shape.rank(),
            digits: d * shape.rank(),
            mul,
        }
    }

    #[inline]
    fn vec_add(&self, a: u32, b: u32) -> u32 {
        if self.p == 2 {
            return a ^ b;
        }
        // digitwise base-p addition
        let (mut a, mut b) = (a as u64, b as u64);
        let mut out = 0u64;
        let mut place = 1u64;
        for _ in 0..self.digits {
            out += (a + b) % self.p * place;
            a /= self.p;
            b /= self.p;
            place *= self.p;
        }
        out as u32
    }

    /// Multiplies every field component of the vector by the scalar.
    fn scale_vec(&self, scalar: usize, v: u32) -> u32 {
        let q = self.q as u64;
        let mut v = v as u64;
        let mut out = 0u64;
        let mut place = 1u64;
        for _ in 0..self.rank {
            let comp = (v % q) as usize;
            out += self.mul[scalar * self.q + comp] as u64 * place;
            v /= q;
            place *= q;
        }
        out as u32
    }
}

/// One column's candidate vectors and its forced-zero row pattern.
struct ColumnSet {
    candidates: Vec<u32>,
    blocked_rows: Vec<usize>,
    /// For p = 2: bitmask of the packed digits that must vanish.
    zero_mask: u32,
}

impl ColumnSet {
    fn contains(&self, tables: &FieldTables, v: u32) -> bool {
        if tables.p == 2 {
            return v & self.zero_mask == 0;
        }
        let q = tables.q as u64;
        let v = v as u64;
        self.blocked_rows
            .iter()
            .all(|&i| (v / q.pow(i as u32)).is_multiple_of(q))
    }
}

/// Residue-sharing scan: walk reduced matrices column by column over F_q,
/// pruning every choice inside the span of the previous columns, and weight
/// each surviving matrix by its (uniform) number of lifts, obtained by
/// bucketing the materialized hom sets by residue.
fn aut_order_shared(shape: &ModuleShape) -> Result<BigInt> {
    let r = shape.rank();
    let q = shape.q as usize;
    let space = (shape.q as u128)
        .checked_pow((shape.ext_degree * r) as u32)
        .map(|_| (q as u128).pow(r as u32))
        .unwrap_or(u128::MAX);
    if space > SPAN_SPACE_CAP {
        return Err(Error::BudgetExceeded {
            required: space,
            budget: SPAN_SPACE_CAP,
        });
    }
    let space = space as usize;
    let tables = FieldTables::build(shape);

    let components: Vec<Component> = shape
        .parts
        .iter()
        .map(|&l| Component::build(shape, l))
        .collect();
    let mut lift_product = BigInt::one();
    let mut blocked = vec![false; r * r];
    for i in 0..r {
        for j in 0..r {
            let hom = hom_set(&components[i], components[j].level);
            let mut buckets = vec![0u64; q];
            for h in &hom {
                let mut idx = 0u64;
                for &c in h.coeffs().iter().rev() {
                    idx = idx * shape.p + c % shape.p;
                }
                buckets[idx as usize] += 1;
            }
            let nonzero: Vec<u64> = buckets.iter().copied().filter(|&b| b > 0).collect();
            assert!(
                nonzero.iter().all(|&b| b == nonzero[0]),
                "hom-set residue classes are not uniform"
            );
            blocked[i * r + j] = buckets.iter().skip(1).all(|&b| b == 0);
            lift_product *= BigInt::from(nonzero[0]);
        }
    }

    let columns: Vec<ColumnSet> = (0..r)
        .map(|j| {
            let blocked_rows: Vec<usize> = (0..r).filter(|&i| blocked[i * r + j]).collect();
            let free: Vec<usize> = (0..r).filter(|&i| !blocked[i * r + j]).collect();
            let mut zero_mask = 0u32;
            if tables.p == 2 {
                for &i in &blocked_rows {
                    for b in 0..shape.ext_degree {
                        zero_mask |= 1 << (i * shape.ext_degree + b);
                    }
                }
            }
            let mut candidates = Vec::with_capacity(q.pow(free.len() as u32));
            let mut assignment = vec![0usize; free.len()];
            loop {
                let mut v = 0u64;
                for (pos, &row) in free.iter().enumerate() {
                    v += assignment[pos] as u64 * (q as u64).pow(row as u32);
                }
                candidates.push(v as u32);
                let mut k = 0;
                while k < free.len() {
                    assignment[k] += 1;
                    if assignment[k] < q {
                        break;
                    }
                    assignment[k] = 0;
                    k += 1;
                }
                if k == free.len() {
                    break;
                }
            }
            ColumnSet {
                candidates,
                blocked_rows,
                zero_mask,
            }
        })
        .collect();

    let mut walker = SpanWalker {
        tables: &tables,
        columns: &columns,
        rank: r,
        member: vec![0u32; space],
        member_stamp: 0,
        scratch: vec![0u32; space],
        scratch_stamp: 0,
        scaled: vec![0u32; q],
    };
    let count = walker.walk(0, &[0]);
    Ok(lift_product * BigInt::from(count))
}

struct SpanWalker<'a> {
    tables: &'a FieldTables,
    columns: &'a [ColumnSet],
    rank: usize,
    member: Vec<u32>,
    member_stamp: u32,
    scratch: Vec<u32>,
    scratch_stamp: u32,
    scaled: Vec<u32>,
}

impl SpanWalker<'_> {
    fn mark_span(&mut self, span: &[u32]) -> u32 {
        self.member_stamp += 1;
        for &s in span {
            self.member[s as usize] = self.member_stamp;
        }
        self.member_stamp
    }

    /// Deduplicated walk over `span + F_q * v` into the scratch table;
    /// returns how many of its elements lie in the final column's candidate
    /// set, pushing the elements into `child` when one is supplied.
    fn expand(&mut self, span: &[u32], mut child: Option<&mut Vec<u32>>) -> usize {
        let q = self.tables.q;
        let last = &self.columns[self.rank - 1];
        self.scratch_stamp += 1;
        let mut covered = 0usize;
        for &s in span {
            for a in 0..q {
                let u = self.tables.vec_add(s, self.scaled[a]);
                if self.scratch[u as usize] != self.scratch_stamp {
                    self.scratch[u as usize] = self.scratch_stamp;
                    if last.contains(self.tables, u) {
                        covered += 1;
                    }
                    if let Some(list) = child.as_deref_mut() {
                        list.push(u);
                    }
                }
            }
        }
        covered
    }

    /// Counts completions of an independent column prefix whose span is
    /// `span` (an explicit element list containing 0).
    fn walk(&mut self, j: usize, span: &[u32]) -> u128 {
        if self.rank == 0 {
            return 1;
        }
        let q = self.tables.q;
        let mut stamp = self.mark_span(span);
        if j == self.rank - 1 {
            return self.columns[j]
                .candidates
                .iter()
                .filter(|&&v| self.member[v as usize] != stamp)
                .count() as u128;
        }
        let mut total: u128 = 0;
        for ci in 0..self.columns[j].candidates.len() {
            let v = self.columns[j].candidates[ci];
            if self.member[v as usize] == stamp {
                continue;
            }
            for a in 0..q {
                self.scaled[a] = self.tables.scale_vec(a, v);
            }
            if j + 1 == self.rank - 1 {
                // final column: count candidates outside span(S, v) without
                // materializing the extended span
                let covered = self.expand(span, None);
                total += (self.columns[self.rank - 1].candidates.len() - covered) as u128;
            } else {
                let mut child = Vec::with_capacity(span.len() * q);
                self.expand(span, Some(&mut child));
                total += self.walk(j + 1, &child);
                // the recursion re-stamped the membership table
                stamp = self.mark_span(span);
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> ModuleType {
        s.parse().unwrap()
    }

    #[test]
    fn closed_form_known_values() {
        assert_eq!(aut_order(&t(""), 2), BigInt::from(1));
        assert_eq!(aut_order(&t("1"), 2), BigInt::from(1));
        assert_eq!(aut_order(&t("1,1"), 2), BigInt::from(6)); // GL_2(F_2)
        assert_eq!(aut_order(&t("2"), 2), BigInt::from(2)); // units of Z/4
        assert_eq!(aut_order(&t("2,1"), 2), BigInt::from(8));
        assert_eq!(aut_order(&t("1,1"), 3), BigInt::from(48)); // GL_2(F_3)
        assert_eq!(aut_order(&t("1"), 4), BigInt::from(3)); // units of F_4
        assert_eq!(aut_order(&t("2"), 3), BigInt::from(6)); // units of Z/9
    }

    #[test]
    fn general_linear_group_orders() {
        for q in [2u64, 3] {
            for r in 1..=3u32 {
                let g = ModuleType::from_unsorted(vec![1; r as usize]);
                let mut expected = BigInt::one();
                let qr = BigInt::from(q).pow(r);
                for i in 0..r {
                    expected *= &qr - BigInt::from(q).pow(i);
                }
                assert_eq!(aut_order(&g, q), expected, "GL_{r}(F_{q})");
            }
        }
    }

    #[test]
    fn bruteforce_matches_closed_form_small() {
        let partitions = ["", "1", "2", "1,1", "3", "2,1", "1,1,1"];
        for q in [2u64, 3, 4] {
            for s in partitions {
                let g = t(s);
                let brute = aut_order_bruteforce(&g, q, 1 << 32).unwrap();
                assert_eq!(brute, aut_order(&g, q), "partition [{s}] over q={q}");
            }
        }
    }

    #[test]
    fn literal_and_shared_paths_agree() {
        // pairs small enough for the literal scan in debug builds
        let cases: &[(u64, &str)] = &[
            (2, "1"),
            (2, "2"),
            (2, "1,1"),
            (2, "2,1"),
            (2, "1,1,1"),
            (2, "2,2"),
            (3, "1"),
            (3, "2"),
            (3, "1,1"),
            (3, "2,1"),
            (4, "1"),
            (4, "2"),
            (4, "1,1"),
            (4, "2,1"),
        ];
        for &(q, s) in cases {
            let g = t(s);
            let shape = ModuleShape::build(&g, q).unwrap();
            let lit = aut_order_literal(&shape).unwrap();
            let shared = aut_order_shared(&shape).unwrap();
            assert_eq!(lit, shared, "partition [{s}] over q={q}");
        }
    }

    #[test]
    fn budget_guard_trips() {
        let g = ModuleType::from_unsorted(vec![1; 9]);
        assert!(matches!(
            aut_order_bruteforce(&g, 2, 1 << 32),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn rejects_non_prime_powers() {
        assert!(aut_order_bruteforce(&t("1"), 6, 1 << 20).is_err());
        assert!(aut_order_bruteforce(&t("1"), 1, 1 << 20).is_err());
    }
}
