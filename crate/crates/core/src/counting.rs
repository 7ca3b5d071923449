//! Exhaustive, budget-guarded enumeration of matrix fibers and full matrix
//! spaces, producing exact counts and histograms of cokernel types.
//!
//! Every scan walks a mixed-radix counter over lift digits (row-major entry
//! order, least-significant entry fastest). The index space is split into
//! contiguous chunks; workers fold chunks into private histograms which
//! merge by addition, so results are identical for every worker count.

use crate::error::{Error, Result};
use crate::formulas::{self, decimal_string};
use crate::matrix::Matrix;
use crate::params::RingParams;
use crate::partition::ModuleType;
use crate::ring::{ExtRing, RElem};
use crate::snf::{cokernel_type, companion_pencil, snf_exponents_in_place};
use num_rational::BigRational;
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

/// Default hard cap on evaluated matrices per operation.
pub const DEFAULT_BUDGET: u128 = 1 << 32;

#[derive(Clone, Copy, Debug)]
pub struct ScanOptions {
    /// Maximum number of candidate matrices a single operation may evaluate.
    pub budget: u128,
    /// Worker threads; the result does not depend on this.
    pub workers: usize,
    /// Turn vacuous fibers (wrong residue cokernel) into hard errors.
    pub strict: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            budget: DEFAULT_BUDGET,
            workers: std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1),
            strict: false,
        }
    }
}

impl ScanOptions {
    pub fn serial() -> Self {
        ScanOptions {
            workers: 1,
            ..Default::default()
        }
    }
}

/// A fixed residue: lifts are the matrices congruent to `base` mod p^level.
#[derive(Clone, Debug)]
pub struct FiberSpec {
    base: Matrix<u64>,
    level: u32,
}

impl FiberSpec {
    pub fn new(base: Matrix<u64>, level: u32, params: &RingParams) -> Result<Self> {
        if level < 1 || level > params.nilpotency() {
            return Err(Error::InvalidParams(format!(
                "fiber level {level} outside 1..={}",
                params.nilpotency()
            )));
        }
        if !base.is_square() {
            return Err(Error::ShapeMismatch("fiber residue must be square".into()));
        }
        let cap = params.p().pow(level);
        if base.data().iter().any(|&v| v >= cap) {
            return Err(Error::InvalidParams(format!(
                "fiber entries must be reduced mod p^{level}"
            )));
        }
        Ok(FiberSpec { base, level })
    }

    /// A mod-p residue fiber.
    pub fn mod_p(base: Matrix<u64>, params: &RingParams) -> Result<Self> {
        Self::new(base, 1, params)
    }

    pub fn base(&self) -> &Matrix<u64> {
        &self.base
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn n(&self) -> usize {
        self.base.rows()
    }
}

/// Twist matrices `M_1..M_(d-1)` entering the pencil as `p * M_k`, with an
/// optional second layer `M'_1..M'_(d-1)` entering as `p^N * M'_k`.
#[derive(Clone, Debug)]
pub struct TwistSpec {
    twists: Vec<Matrix<u64>>,
    deltas: Option<Vec<Matrix<u64>>>,
}

impl TwistSpec {
    pub fn new(twists: Vec<Matrix<u64>>, params: &RingParams, n: usize) -> Result<Self> {
        let want = params.degree() - 1;
        if twists.len() != want {
            return Err(Error::ShapeMismatch(format!(
                "expected {want} twist matrices, got {}",
                twists.len()
            )));
        }
        let cap = params.p().pow(params.trunc()).max(1);
        for m in &twists {
            if m.rows() != n || m.cols() != n {
                return Err(Error::ShapeMismatch("twist matrix has wrong size".into()));
            }
            if m.data().iter().any(|&v| v >= cap) {
                return Err(Error::InvalidParams(format!(
                    "twist entries must be reduced mod p^{}",
                    params.trunc()
                )));
            }
        }
        Ok(TwistSpec {
            twists,
            deltas: None,
        })
    }

    /// All twist layers zero.
    pub fn zero(params: &RingParams, n: usize) -> Self {
        TwistSpec {
            twists: vec![Matrix::filled(n, n, 0u64); params.degree() - 1],
            deltas: None,
        }
    }

    /// Attaches the `p^N`-scaled layer; entries mod p.
    pub fn with_deltas(
        mut self,
        deltas: Vec<Matrix<u64>>,
        params: &RingParams,
        n: usize,
    ) -> Result<Self> {
        let want = params.degree() - 1;
        if deltas.len() != want {
            return Err(Error::ShapeMismatch(format!(
                "expected {want} delta matrices, got {}",
                deltas.len()
            )));
        }
        for m in &deltas {
            if m.rows() != n || m.cols() != n {
                return Err(Error::ShapeMismatch("delta matrix has wrong size".into()));
            }
            if m.data().iter().any(|&v| v >= params.p()) {
                return Err(Error::InvalidParams(
                    "delta entries must be reduced mod p".into(),
                ));
            }
        }
        self.deltas = Some(deltas);
        Ok(self)
    }

    /// Uniformly random twist layer from a caller-owned generator.
    pub fn random<Rng: rand::Rng>(params: &RingParams, n: usize, rng: &mut Rng) -> Self {
        let cap = params.p().pow(params.trunc()).max(1);
        let twists = (0..params.degree() - 1)
            .map(|_| {
                let data = (0..n * n).map(|_| rng.random_range(0..cap)).collect();
                Matrix::new(n, n, data).expect("shape")
            })
            .collect();
        TwistSpec {
            twists,
            deltas: None,
        }
    }

    /// Uniformly random delta layer (entries mod p).
    pub fn random_deltas<Rng: rand::Rng>(
        self,
        params: &RingParams,
        n: usize,
        rng: &mut Rng,
    ) -> Self {
        let deltas = (0..params.degree() - 1)
            .map(|_| {
                let data = (0..n * n).map(|_| rng.random_range(0..params.p())).collect();
                Matrix::new(n, n, data).expect("shape")
            })
            .collect();
        TwistSpec {
            twists: self.twists,
            deltas: Some(deltas),
        }
    }

    pub fn twists(&self) -> &[Matrix<u64>] {
        &self.twists
    }

    pub fn deltas(&self) -> Option<&[Matrix<u64>]> {
        self.deltas.as_deref()
    }

    pub fn is_zero(&self) -> bool {
        self.twists.iter().all(|m| m.data().iter().all(|&v| v == 0))
            && self
                .deltas
                .as_ref()
                .is_none_or(|ds| ds.iter().all(|m| m.data().iter().all(|&v| v == 0)))
    }
}

/// The pencil `Y + g(-I + pM_1 + p^N M'_1) + g^2 (pM_2 + p^N M'_2) + ...`
/// over R, where `g` is the class of t. With all twists zero this is the
/// plain pencil `Y - g I`.
pub fn twisted_pencil(y: &Matrix<u64>, twist: &TwistSpec, params: &RingParams) -> Matrix<RElem> {
    let d = params.degree();
    if d == 1 {
        return companion_pencil(y, params);
    }
    let n = y.rows();
    let m = params.modulus();
    let p = params.p();
    let pn = params.p_pow(params.trunc());
    let mut out = Matrix::filled(n, n, RElem::constant(0, params));
    for i in 0..n {
        for j in 0..n {
            let e = out.at_mut(i, j);
            let coeffs = e.coeffs_mut();
            coeffs[0] = *y.at(i, j) % m;
            for (k, tm) in twist.twists.iter().enumerate() {
                let mut c = (p as u128 * *tm.at(i, j) as u128 % m as u128) as u64;
                if let Some(deltas) = &twist.deltas {
                    c = ((c as u128 + pn as u128 * *deltas[k].at(i, j) as u128) % m as u128) as u64;
                }
                coeffs[k + 1] = c;
            }
            if i == j {
                coeffs[1] = (coeffs[1] + m - 1) % m;
            }
        }
    }
    out
}

/// One mixed-radix lift digit: `scale * digit` is added to the stated
/// coefficient of the stated entry.
#[derive(Clone, Copy, Debug)]
struct Slot {
    entry: usize,
    coeff: usize,
    scale: u64,
    radix: u64,
}

/// Enumerates lifts of a base matrix over R and histograms the cokernel
/// type of each lift.
struct LiftScan<'a> {
    params: &'a RingParams,
    base: Matrix<RElem>,
    slots: Vec<Slot>,
}

impl<'a> LiftScan<'a> {
    fn new(params: &'a RingParams, base: Matrix<RElem>, slots: Vec<Slot>) -> Self {
        for s in &slots {
            // scale * radix spans the whole coefficient range exactly once
            debug_assert_eq!(s.scale.saturating_mul(s.radix), params.modulus());
        }
        LiftScan {
            params,
            base,
            slots,
        }
    }

    /// Lift slots for coefficient 0 of every entry: scalar-matrix fibers.
    fn entry_slots(base: &Matrix<RElem>, scale: u64, radix: u64) -> Vec<Slot> {
        (0..base.data().len())
            .map(|entry| Slot {
                entry,
                coeff: 0,
                scale,
                radix,
            })
            .collect()
    }

    /// Lift slots for every coefficient of every entry: R-matrix fibers.
    fn coeff_slots(base: &Matrix<RElem>, degree: usize, scale: u64, radix: u64) -> Vec<Slot> {
        (0..base.data().len())
            .flat_map(|entry| {
                (0..degree).map(move |coeff| Slot {
                    entry,
                    coeff,
                    scale,
                    radix,
                })
            })
            .collect()
    }

    fn total(&self) -> u128 {
        self.slots
            .iter()
            .fold(1u128, |acc, s| acc.saturating_mul(s.radix as u128))
    }

    #[inline]
    fn apply(&self, m: &mut Matrix<RElem>, k: usize, digit: u64) {
        // base coefficients may exceed the scale (the pencil folds constants
        // into coefficient 0 when deg(P) = 1), so wrap mod p^(N+1); the
        // digit map stays injective on the fiber
        let s = self.slots[k];
        let base = self.base.data()[s.entry].coeffs()[s.coeff];
        m.data_mut()[s.entry].coeffs_mut()[s.coeff] = (base + s.scale * digit) % self.params.modulus();
    }

    fn scan_range(&self, start: u128, end: u128, hist: &mut BTreeMap<ModuleType, u64>) {
        let ring = ExtRing::new(self.params);
        let mut digits = vec![0u64; self.slots.len()];
        let mut idx = start;
        for (k, d) in digits.iter_mut().enumerate() {
            *d = (idx % self.slots[k].radix as u128) as u64;
            idx /= self.slots[k].radix as u128;
        }
        let mut current = self.base.clone();
        for (k, &d) in digits.iter().enumerate() {
            self.apply(&mut current, k, d);
        }
        let mut work = current.clone();
        let mut exps: Vec<u32> = Vec::new();
        let mut key = ModuleType::trivial();
        let mut i = start;
        loop {
            work.data_mut().clone_from_slice(current.data());
            snf_exponents_in_place(&ring, &mut work, &mut exps);
            key.set_from_exponents(&exps);
            match hist.get_mut(&key) {
                Some(c) => *c += 1,
                None => {
                    hist.insert(key.clone(), 1);
                }
            }
            i += 1;
            if i >= end {
                break;
            }
            let mut k = 0;
            loop {
                digits[k] += 1;
                if digits[k] < self.slots[k].radix {
                    self.apply(&mut current, k, digits[k]);
                    break;
                }
                digits[k] = 0;
                self.apply(&mut current, k, 0);
                k += 1;
            }
        }
    }

    fn histogram(&self, opts: &ScanOptions) -> Result<BTreeMap<ModuleType, u64>> {
        let total = check_budget(self.total(), opts)?;
        Ok(run_chunked(total, opts.workers, |s, e, h| {
            self.scan_range(s, e, h)
        }))
    }
}

fn check_budget(total: u128, opts: &ScanOptions) -> Result<u128> {
    if total > opts.budget {
        return Err(Error::BudgetExceeded {
            required: total,
            budget: opts.budget,
        });
    }
    if total > u64::MAX as u128 {
        return Err(Error::BudgetExceeded {
            required: total,
            budget: u64::MAX as u128,
        });
    }
    Ok(total)
}

/// Splits `[0, total)` into contiguous chunks and folds them on `workers`
/// threads. Merging is histogram addition, so the outcome is independent of
/// chunk scheduling and of the worker count.
fn run_chunked<K, F>(total: u128, workers: usize, scan: F) -> BTreeMap<K, u64>
where
    K: Ord + Clone + Send,
    F: Fn(u128, u128, &mut BTreeMap<K, u64>) + Sync,
{
    let mut merged: BTreeMap<K, u64> = BTreeMap::new();
    if total == 0 {
        return merged;
    }
    let workers = workers.max(1);
    let chunk = (total / (workers as u128 * 8)).max(1 << 12).min(total);
    let chunks = total.div_ceil(chunk);
    if workers == 1 || chunks == 1 {
        scan(0, total, &mut merged);
        return merged;
    }
    let next = AtomicU64::new(0);
    let partials: Vec<BTreeMap<K, u64>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                scope.spawn(|| {
                    let mut local: BTreeMap<K, u64> = BTreeMap::new();
                    loop {
                        let c = next.fetch_add(1, Ordering::Relaxed) as u128;
                        if c >= chunks {
                            break;
                        }
                        let start = c * chunk;
                        let end = (start + chunk).min(total);
                        scan(start, end, &mut local);
                    }
                    local
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    for partial in partials {
        for (k, v) in partial {
            *merged.entry(k).or_insert(0) += v;
        }
    }
    merged
}

/// Enumerates scalar-matrix lifts `X = base + p^level * M` and histograms an
/// arbitrary pure key function of the lift; `level = 0` walks the whole
/// space.
pub fn scan_lift_space<K, F>(
    base: &Matrix<u64>,
    level: u32,
    params: &RingParams,
    opts: &ScanOptions,
    key_fn: F,
) -> Result<BTreeMap<K, u64>>
where
    K: Ord + Clone + Send,
    F: Fn(&Matrix<u64>) -> K + Sync,
{
    let scale = params.p().pow(level);
    let radix = params.p().pow(params.nilpotency() - level);
    debug_assert!(base.data().iter().all(|&v| v < scale));
    let total = check_budget((radix as u128).pow(base.data().len() as u32), opts)?;
    Ok(run_chunked(total, opts.workers, |start, end, hist| {
        let mut digits = vec![0u64; base.data().len()];
        let mut idx = start;
        for d in digits.iter_mut() {
            *d = (idx % radix as u128) as u64;
            idx /= radix as u128;
        }
        let mut current = base.clone();
        for (k, &d) in digits.iter().enumerate() {
            current.data_mut()[k] = base.data()[k] + scale * d;
        }
        let mut i = start;
        loop {
            let key = key_fn(&current);
            *hist.entry(key).or_insert(0) += 1;
            i += 1;
            if i >= end {
                break;
            }
            let mut k = 0;
            loop {
                digits[k] += 1;
                if digits[k] < radix {
                    current.data_mut()[k] = base.data()[k] + scale * digits[k];
                    break;
                }
                digits[k] = 0;
                current.data_mut()[k] = base.data()[k];
                k += 1;
            }
        }
    }))
}

/// The cokernel type of the reduction of an R-matrix mod p^level.
pub fn reduced_pencil_type(pencil: &Matrix<RElem>, params: &RingParams, level: u32) -> ModuleType {
    let reduced = params.reduced(level);
    let cap = reduced.modulus();
    let data: Vec<RElem> = pencil
        .data()
        .iter()
        .map(|e| {
            let coeffs: Vec<i64> = e.coeffs().iter().map(|&c| (c % cap) as i64).collect();
            RElem::new(&coeffs, &reduced).expect("conforming length")
        })
        .collect();
    let m = Matrix::new(pencil.rows(), pencil.cols(), data).expect("same shape");
    cokernel_type(&ExtRing::new(&reduced), &m)
}

/// How an enumerated count compares against its closed-form value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchStatus {
    /// Formula value is integral and equals the count.
    Matched,
    Mismatched,
    /// The residue cokernel rules the fiber out; the count is 0 by fiat.
    Vacuous,
    /// No closed form applies to this configuration.
    NotApplicable,
}

/// An exact rational rendered for reports.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct FormulaValue {
    pub num: String,
    pub den: String,
    /// 12 fractional digits, display only.
    pub decimal: String,
}

impl FormulaValue {
    pub fn from_rational(r: &BigRational) -> Self {
        FormulaValue {
            num: r.numer().to_string(),
            den: r.denom().to_string(),
            decimal: decimal_string(r, 12),
        }
    }
}

/// An exact verification record for one fiber count.
#[derive(Clone, Debug, Serialize)]
pub struct CountReport {
    pub count: u64,
    pub formula_value: Option<FormulaValue>,
    pub matched: MatchStatus,
    pub config: serde_json::Value,
    pub enumerated_total: u64,
    pub elapsed_ms: u64,
}

#[allow(clippy::too_many_arguments)]
fn finish_report(
    hist: &BTreeMap<ModuleType, u64>,
    g: &ModuleType,
    formula: Option<BigRational>,
    residue_ok: bool,
    config: serde_json::Value,
    total: u64,
    started: std::time::Instant,
    strict: bool,
    residue_found: &ModuleType,
) -> Result<CountReport> {
    let count = hist.get(g).copied().unwrap_or(0);
    if !residue_ok && strict {
        return Err(Error::InvalidFiber {
            expected: g.reduce_mod(1).to_string(),
            found: residue_found.to_string(),
        });
    }
    let matched = if !residue_ok {
        MatchStatus::Vacuous
    } else {
        match &formula {
            Some(f) => {
                if formulas::equals_count(f, count) {
                    MatchStatus::Matched
                } else {
                    MatchStatus::Mismatched
                }
            }
            None => MatchStatus::NotApplicable,
        }
    };
    Ok(CountReport {
        count,
        formula_value: formula.as_ref().map(FormulaValue::from_rational),
        matched,
        config,
        enumerated_total: total,
        elapsed_ms: started.elapsed().as_millis() as u64,
    })
}

fn config_value(
    params: &RingParams,
    n: usize,
    g: Option<&ModuleType>,
    fiber: Option<&FiberSpec>,
    twist: Option<&TwistSpec>,
) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    map.insert("p".into(), params.p().into());
    map.insert("N".into(), params.trunc().into());
    map.insert("poly".into(), params.poly_string().into());
    map.insert("n".into(), (n as u64).into());
    if let Some(g) = g {
        map.insert("G".into(), g.to_string().into());
    }
    if let Some(f) = fiber {
        map.insert("fiber".into(), crate::matrix::zmod_matrix_to_json(f.base()));
        map.insert("fiber_level".into(), f.level().into());
    }
    if let Some(t) = twist {
        let twists: Vec<serde_json::Value> = t
            .twists()
            .iter()
            .map(crate::matrix::zmod_matrix_to_json)
            .collect();
        map.insert("twists".into(), twists.into());
        if let Some(ds) = t.deltas() {
            let ds: Vec<serde_json::Value> =
                ds.iter().map(crate::matrix::zmod_matrix_to_json).collect();
            map.insert("deltas".into(), ds.into());
        }
    }
    serde_json::Value::Object(map)
}

/// Histogram of the twisted-pencil cokernel types over all lifts of the
/// fiber. The fiber level picks which digits vary: level k fixes the lift
/// mod p^k.
pub fn fiber_histogram(
    fiber: &FiberSpec,
    twist: &TwistSpec,
    params: &RingParams,
    opts: &ScanOptions,
) -> Result<BTreeMap<ModuleType, u64>> {
    let base = twisted_pencil(fiber.base(), twist, params);
    let scale = params.p().pow(fiber.level());
    let radix = params.p().pow(params.nilpotency() - fiber.level());
    let slots = LiftScan::entry_slots(&base, scale, radix);
    LiftScan::new(params, base, slots).histogram(opts)
}

/// Counts lifts `Y` of the fiber with twisted-pencil cokernel of type `g`.
/// A closed-form value is attached on mod-p fibers when `p^N g = 0`; the
/// count equality it asserts is twist-independent.
pub fn count_twisted_fiber(
    fiber: &FiberSpec,
    twist: &TwistSpec,
    g: &ModuleType,
    params: &RingParams,
    opts: &ScanOptions,
) -> Result<CountReport> {
    let started = std::time::Instant::now();
    if !g.annihilated_by(params.nilpotency()) {
        return Err(Error::InvalidParams(format!(
            "type [{g}] is not annihilated by p^(N+1)"
        )));
    }
    let pencil = twisted_pencil(fiber.base(), twist, params);
    let residue = reduced_pencil_type(&pencil, params, fiber.level());
    let residue_ok = residue == g.reduce_mod(fiber.level());
    let hist = fiber_histogram(fiber, twist, params, opts)?;
    let total: u64 = hist.values().sum();
    let formula = (fiber.level() == 1 && g.annihilated_by(params.trunc()))
        .then(|| formulas::lift_count_formula(g, params, fiber.n()));
    finish_report(
        &hist,
        g,
        formula,
        residue_ok,
        config_value(params, fiber.n(), Some(g), Some(fiber), Some(twist)),
        total,
        started,
        opts.strict,
        &residue,
    )
}

/// Counts lifts `X = Xbar + pM` with `cok(P(X))` of type `g`, computed
/// through the quotient-ring pencil and compared against the closed form.
pub fn count_poly_cokernel_fiber(
    fiber: &FiberSpec,
    g: &ModuleType,
    params: &RingParams,
    opts: &ScanOptions,
) -> Result<CountReport> {
    if fiber.level() != 1 {
        return Err(Error::InvalidParams(
            "polynomial fiber counts fix the residue mod p".into(),
        ));
    }
    count_twisted_fiber(fiber, &TwistSpec::zero(params, fiber.n()), g, params, opts)
}

/// Counts lifts over the level-N fiber with a doubly twisted pencil
/// (`p`-scaled base layer plus `p^N`-scaled delta layer).
pub fn count_generalized_fiber(
    fiber: &FiberSpec,
    twist: &TwistSpec,
    h: &ModuleType,
    params: &RingParams,
    opts: &ScanOptions,
) -> Result<CountReport> {
    if fiber.level() != params.trunc().max(1) {
        return Err(Error::InvalidParams(format!(
            "generalized fiber counts fix the lift mod p^N (level {})",
            params.trunc().max(1)
        )));
    }
    count_twisted_fiber(fiber, twist, h, params, opts)
}

/// Histogram of `cok_R(Z)` over all lifts `Z` of an R-matrix residue given
/// mod p^level.
pub fn ext_lift_histogram(
    base: &Matrix<RElem>,
    level: u32,
    params: &RingParams,
    opts: &ScanOptions,
) -> Result<BTreeMap<ModuleType, u64>> {
    if level < 1 || level > params.nilpotency() {
        return Err(Error::InvalidParams(format!(
            "lift level {level} outside 1..={}",
            params.nilpotency()
        )));
    }
    let cap = params.p().pow(level);
    if base
        .data()
        .iter()
        .any(|e| e.coeffs().iter().any(|&c| c >= cap))
    {
        return Err(Error::InvalidParams(format!(
            "residue coefficients must be reduced mod p^{level}"
        )));
    }
    let radix = params.p().pow(params.nilpotency() - level);
    let slots = LiftScan::coeff_slots(base, params.degree(), cap, radix);
    LiftScan::new(params, base.clone(), slots).histogram(opts)
}

/// Counts lifts `Z` in `Mat_n(R)` of a mod-p^level residue with `cok_R(Z)`
/// of type `h`. For mod-p residues and types killed by p^N the closed-form
/// lift count is attached.
pub fn count_ext_lift_fiber(
    zbar: &Matrix<RElem>,
    level: u32,
    h: &ModuleType,
    params: &RingParams,
    opts: &ScanOptions,
) -> Result<CountReport> {
    let started = std::time::Instant::now();
    let residue = reduced_pencil_type(zbar, params, level);
    let residue_ok = residue == h.reduce_mod(level);
    let hist = ext_lift_histogram(zbar, level, params, opts)?;
    let total: u64 = hist.values().sum();
    let formula = (level == 1 && h.annihilated_by(params.trunc()))
        .then(|| formulas::ext_lift_count_formula(h, params, zbar.rows()));
    let mut config = config_value(params, zbar.rows(), Some(h), None, None);
    if let serde_json::Value::Object(map) = &mut config {
        map.insert("fiber".into(), crate::matrix::ext_matrix_to_json(zbar));
        map.insert("fiber_level".into(), level.into());
        map.insert("base_ring".into(), "ext".into());
    }
    finish_report(
        &hist, h, formula, residue_ok, config, total, started, opts.strict, &residue,
    )
}

/// Full-space and residue-space histograms.
#[derive(Clone, Debug, Serialize)]
pub struct SpaceDistribution {
    /// Pencil cokernel type over every matrix in `Mat_n(Z/p^(N+1))`.
    pub histogram: BTreeMap<ModuleType, u64>,
    /// Residue cokernel type over every matrix in `Mat_n(F_p)`.
    pub residue_histogram: BTreeMap<ModuleType, u64>,
    pub size: u64,
    pub residue_size: u64,
}

/// Exact histogram of the pencil cokernel type over the whole matrix space,
/// together with the mod-p residue histogram.
pub fn distribution_full_space(
    params: &RingParams,
    n: usize,
    opts: &ScanOptions,
) -> Result<SpaceDistribution> {
    let zero = Matrix::filled(n, n, 0u64);
    let base = twisted_pencil(&zero, &TwistSpec::zero(params, n), params);
    let slots = LiftScan::entry_slots(&base, 1, params.modulus());
    let histogram = LiftScan::new(params, base, slots).histogram(opts)?;

    let residue_histogram = residue_histogram(params, n, opts)?;
    let size = histogram.values().sum();
    let residue_size = residue_histogram.values().sum();
    Ok(SpaceDistribution {
        histogram,
        residue_histogram,
        size,
        residue_size,
    })
}

/// Histogram over `Mat_n(F_p)` of the residue pencil cokernel type (a type
/// over the residue field: all parts equal 1).
pub fn residue_histogram(
    params: &RingParams,
    n: usize,
    opts: &ScanOptions,
) -> Result<BTreeMap<ModuleType, u64>> {
    let reduced = params.reduced(1);
    let zero = Matrix::filled(n, n, 0u64);
    let base = twisted_pencil(&zero, &TwistSpec::zero(&reduced, n), &reduced);
    let slots = LiftScan::entry_slots(&base, 1, reduced.modulus());
    LiftScan::new(&reduced, base, slots).histogram(opts)
}
