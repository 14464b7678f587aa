//! Exact reference counts: subset enumeration, the pseudo-polynomial counting
//! DP, exact `τ`, and the exhaustive allocation census.

use std::fmt;
use std::ops::AddAssign;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::allocations::{classify_sums, BundleSums, ClassFlags};
use crate::error::{Error, Result};
use crate::instance::{AllocationInstance, KnapsackInstance};

/// A capacity that may be infinite. `u64::MAX` is reserved for infinity, so the
/// derived ordering puts every finite capacity below it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExtendedCapacity(u64);

impl ExtendedCapacity {
    pub const INFINITE: ExtendedCapacity = ExtendedCapacity(u64::MAX);
    pub const ZERO: ExtendedCapacity = ExtendedCapacity(0);

    pub fn finite(value: u64) -> Self {
        assert!(value != u64::MAX, "finite capacity collides with infinity");
        ExtendedCapacity(value)
    }

    pub(crate) fn from_raw(raw: u64) -> Self {
        ExtendedCapacity(raw)
    }

    pub fn is_infinite(self) -> bool {
        self.0 == u64::MAX
    }

    pub fn value(self) -> Option<u64> {
        (!self.is_infinite()).then_some(self.0)
    }
}

impl fmt::Display for ExtendedCapacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            Some(v) => write!(f, "{v}"),
            None => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactCount(pub BigUint);

impl ExactCount {
    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl From<u64> for ExactCount {
    fn from(v: u64) -> Self {
        ExactCount(BigUint::from(v))
    }
}

impl fmt::Display for ExactCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Size limits for the exponential and pseudo-polynomial oracles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactLimits {
    pub knapsack_enumeration: usize,
    pub census_enumeration: usize,
    pub dp_cells: u128,
}

impl Default for ExactLimits {
    fn default() -> Self {
        ExactLimits {
            knapsack_enumeration: 25,
            census_enumeration: 22,
            dp_cells: 1 << 28,
        }
    }
}

pub fn brute_force_count(inst: &KnapsackInstance) -> Result<ExactCount> {
    brute_force_count_with(inst, &ExactLimits::default())
}

/// Enumerates every `M`-subset and checks its weight against the capacity.
pub fn brute_force_count_with(inst: &KnapsackInstance, limits: &ExactLimits) -> Result<ExactCount> {
    let n = inst.n();
    let guard = limits.knapsack_enumeration.min(63);
    if n > guard {
        return Err(Error::EnumerationGuard { n, guard });
    }
    let cap = inst.capacity().floor();
    let weights = inst.weights();
    let mut count = 0u64;
    for mask in subsets_of_size(n, inst.m_items()) {
        let weight: u64 = bits(mask).map(|i| weights[i]).sum();
        if weight <= cap {
            count += 1;
        }
    }
    Ok(ExactCount::from(count))
}

/// All `n`-bit masks with exactly `k` bits set, in increasing order.
pub(crate) fn subsets_of_size(n: usize, k: usize) -> impl Iterator<Item = u64> {
    let limit = 1u64 << n;
    let first = if k == 0 {
        Some(0)
    } else {
        Some((1u64 << k) - 1)
    };
    std::iter::successors(first.filter(|&m| m < limit), move |&mask| {
        if mask == 0 {
            return None;
        }
        // Gosper's hack
        let low = mask & mask.wrapping_neg();
        let ripple = mask + low;
        let next = (((ripple ^ mask) >> 2) / low) | ripple;
        (next < limit).then_some(next)
    })
}

fn bits(mask: u64) -> impl Iterator<Item = usize> {
    let mut rest = mask;
    std::iter::from_fn(move || {
        (rest != 0).then(|| {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            i
        })
    })
}

pub fn dp_exact_count(inst: &KnapsackInstance) -> Result<ExactCount> {
    dp_exact_count_with(inst, &ExactLimits::default())
}

/// Pseudo-polynomial count over `count[m][c]`: subsets of the items seen so
/// far with `m` members and weight exactly `c`.
pub fn dp_exact_count_with(inst: &KnapsackInstance, limits: &ExactLimits) -> Result<ExactCount> {
    let cap = inst.capacity().floor().min(inst.total_weight());
    let m = inst.m_items();
    let cells = (m as u128 + 1) * (cap as u128 + 1);
    if cells > limits.dp_cells {
        return Err(Error::MemoryBudget {
            cells,
            budget: limits.dp_cells,
        });
    }
    let count = if inst.n() < 128 {
        BigUint::from(dp_table::<u128>(inst.weights(), m, cap as usize))
    } else {
        dp_table::<BigUint>(inst.weights(), m, cap as usize)
    };
    Ok(ExactCount(count))
}

fn dp_table<T>(weights: &[u64], m: usize, cap: usize) -> T
where
    T: Clone + Zero + num_traits::One + for<'a> AddAssign<&'a T>,
{
    let mut table = vec![vec![T::zero(); cap + 1]; m + 1];
    table[0][0] = T::one();
    for (seen, &w) in weights.iter().enumerate() {
        let w = w as usize;
        if w > cap {
            continue;
        }
        for size in (1..=m.min(seen + 1)).rev() {
            let (lower, upper) = table.split_at_mut(size);
            let from = &lower[size - 1];
            let to = &mut upper[0];
            for c in (w..=cap).rev() {
                if !from[c - w].is_zero() {
                    to[c] += &from[c - w];
                }
            }
        }
    }
    let mut total = T::zero();
    for v in &table[m] {
        total += v;
    }
    total
}

/// Sorted weight sums of every `m`-subset of the first `i` items, for all
/// `m ≤ max_m` and `i ≤ n`. Answers `τ(m, i, a)` by order statistics: the
/// `⌈a⌉`-th smallest sum is the least capacity admitting `⌈a⌉` solutions.
#[derive(Debug, Clone)]
pub struct TauOracle {
    sums: Vec<Vec<Vec<u64>>>,
}

impl TauOracle {
    pub fn new(inst: &KnapsackInstance) -> Result<Self> {
        TauOracle::with_limits(inst, inst.m_items(), &ExactLimits::default())
    }

    pub fn with_limits(
        inst: &KnapsackInstance,
        max_m: usize,
        limits: &ExactLimits,
    ) -> Result<Self> {
        let n = inst.n();
        if n > limits.knapsack_enumeration {
            return Err(Error::EnumerationGuard {
                n,
                guard: limits.knapsack_enumeration,
            });
        }
        let mut sums = vec![vec![Vec::new(); n + 1]; max_m + 1];
        sums[0].fill(vec![0]);
        for m in 1..=max_m {
            for i in m..=n {
                let w = inst.weights()[i - 1];
                let without = &sums[m][i - 1];
                let with = sums[m - 1][i - 1].iter().map(|s| s + w);
                sums[m][i] = merge_sorted(without, with);
            }
        }
        Ok(TauOracle { sums })
    }

    pub fn max_m(&self) -> usize {
        self.sums.len() - 1
    }

    pub fn n(&self) -> usize {
        self.sums[0].len() - 1
    }

    /// Number of `m`-subsets of the first `i` items, i.e. `binomial(i, m)`.
    pub fn solutions(&self, m: usize, i: usize) -> usize {
        self.sums[m][i].len()
    }

    /// `τ(m, i, a)` for a whole number of required solutions; `a = 0` is
    /// infinite, matching the literal definition.
    pub fn tau_count(&self, m: usize, i: usize, a: u64) -> Result<ExtendedCapacity> {
        self.check(m, i)?;
        if a == 0 {
            return Ok(ExtendedCapacity::INFINITE);
        }
        let sums = &self.sums[m][i];
        Ok(usize::try_from(a - 1)
            .ok()
            .and_then(|k| sums.get(k))
            .map_or(ExtendedCapacity::INFINITE, |&c| ExtendedCapacity::finite(c)))
    }

    /// `τ(m, i, a)` for a non-negative rational requirement, via `⌈a⌉`.
    pub fn tau(&self, m: usize, i: usize, a: &BigRational) -> Result<ExtendedCapacity> {
        if a.is_negative() {
            return Err(Error::IndexOutOfRange(format!(
                "required count {a} is negative"
            )));
        }
        let ceil = a.ceil().to_integer();
        let a = ceil.to_u64().unwrap_or(u64::MAX);
        self.tau_count(m, i, a)
    }

    fn check(&self, m: usize, i: usize) -> Result<()> {
        if m > self.max_m() || i > self.n() {
            return Err(Error::IndexOutOfRange(format!(
                "(m, i) = ({m}, {i}) outside 0..={} x 0..={}",
                self.max_m(),
                self.n()
            )));
        }
        Ok(())
    }
}

fn merge_sorted(left: &[u64], right: impl Iterator<Item = u64>) -> Vec<u64> {
    let mut out = Vec::with_capacity(left.len() * 2);
    let mut left = left.iter().copied().peekable();
    let mut right = right.peekable();
    loop {
        match (left.peek(), right.peek()) {
            (Some(&l), Some(&r)) if l <= r => {
                out.push(l);
                left.next();
            }
            (_, Some(&r)) => {
                out.push(r);
                right.next();
            }
            (Some(&l), None) => {
                out.push(l);
                left.next();
            }
            (None, None) => return out,
        }
    }
}

/// Exact `τ(m, i, a)`: the minimum capacity at which at least `a` subsets of
/// size `m` drawn from the first `i` items fit.
pub fn tau_exact(
    inst: &KnapsackInstance,
    m: usize,
    i: usize,
    a: &BigRational,
) -> Result<ExtendedCapacity> {
    if i > inst.n() {
        return Err(Error::IndexOutOfRange(format!(
            "i = {i} exceeds n = {}",
            inst.n()
        )));
    }
    if m > i {
        return Ok(ExtendedCapacity::INFINITE);
    }
    let prefix = KnapsackInstance::new(
        inst.weights()[..i.max(1)].to_vec(),
        inst.capacity(),
        m.min(i.max(1)),
    )?;
    TauOracle::with_limits(&prefix, m, &ExactLimits::default())?.tau(m, i, a)
}

/// Partitions in one class, split by whether a bundle is empty.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub nontrivial: u64,
    pub trivial: u64,
}

impl Tally {
    pub fn total(&self) -> u64 {
        self.nontrivial + self.trivial
    }

    fn record(&mut self, hit: bool, trivial: bool) {
        if hit {
            if trivial {
                self.trivial += 1;
            } else {
                self.nontrivial += 1;
            }
        }
    }

    fn merge(self, other: Tally) -> Tally {
        Tally {
            nontrivial: self.nontrivial + other.nontrivial,
            trivial: self.trivial + other.trivial,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AllocationCensus {
    pub lpv: Tally,
    pub ltv: Tally,
    pub ef: Tally,
    pub sef_a: Tally,
    pub sef_b: Tally,
}

impl AllocationCensus {
    fn record(&mut self, flags: ClassFlags, trivial: bool) {
        self.lpv.record(flags.lpv, trivial);
        self.ltv.record(flags.ltv, trivial);
        self.ef.record(flags.ef, trivial);
        self.sef_a.record(flags.sef_a, trivial);
        self.sef_b.record(flags.sef_b, trivial);
    }

    fn merge(self, other: AllocationCensus) -> AllocationCensus {
        AllocationCensus {
            lpv: self.lpv.merge(other.lpv),
            ltv: self.ltv.merge(other.ltv),
            ef: self.ef.merge(other.ef),
            sef_a: self.sef_a.merge(other.sef_a),
            sef_b: self.sef_b.merge(other.sef_b),
        }
    }
}

pub fn brute_force_allocation_census(inst: &AllocationInstance) -> Result<AllocationCensus> {
    brute_force_allocation_census_with(inst, &ExactLimits::default())
}

/// Classifies all `2ⁿ` partitions; bit `i` of the enumeration mask sends
/// good `i` to B.
pub fn brute_force_allocation_census_with(
    inst: &AllocationInstance,
    limits: &ExactLimits,
) -> Result<AllocationCensus> {
    let n = inst.n();
    let guard = limits.census_enumeration.min(40);
    if n > guard {
        return Err(Error::EnumerationGuard { n, guard });
    }
    let total_a: u64 = inst.a().iter().sum();
    let total_b: u64 = inst.b().iter().sum();
    let full = (1u64 << n) - 1;
    let census = (0..=full)
        .into_par_iter()
        .fold(AllocationCensus::default, |mut census, mask| {
            let (mut a_in_b, mut b_in_b) = (0u64, 0u64);
            for i in bits(mask) {
                a_in_b += inst.a()[i];
                b_in_b += inst.b()[i];
            }
            let sums = BundleSums {
                a_of_a: total_a - a_in_b,
                b_of_a: total_b - b_in_b,
                a_of_b: a_in_b,
                b_of_b: b_in_b,
            };
            census.record(classify_sums(&sums), mask == 0 || mask == full);
            census
        })
        .reduce(AllocationCensus::default, AllocationCensus::merge);
    Ok(census)
}
