//! Two-player allocation classes (EF, sEF, LPV, LTV) and the reductions that
//! count LPV and LTV allocations with the cardinality-constrained knapsack
//! counter.
//!
//! Both reductions count the bundle `S_B` alone. For LPV with `Σa ≥ Σb`, any
//! `S_B` that B values at least as much as A does forces the complement to
//! satisfy A's side, so the count is the number of non-empty proper subsets
//! with `Σ_{S_B}(a−b) ≤ 0`. For LTV the condition is `Σ_{S_B} d ≤ Σd/2` with
//! `d = a − b`. Shifting every term by a constant makes the weights positive
//! at the cost of a capacity that grows with `|S_B| = m`, which is why the
//! count is split by cardinality.

use num_bigint::BigUint;
use serde::Serialize;

use crate::count::CountResult;
use crate::error::{Error, Result};
use crate::exact::dp_exact_count;
use crate::fptas::{approx_count_many, Epsilon};
use crate::instance::{Allocation, AllocationInstance, Capacity, KnapsackInstance};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClassFlags {
    pub ef: bool,
    pub sef_a: bool,
    pub sef_b: bool,
    pub lpv: bool,
    pub ltv: bool,
}

/// Each player's valuation of each bundle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BundleSums {
    pub a_of_a: u64,
    pub b_of_a: u64,
    pub a_of_b: u64,
    pub b_of_b: u64,
}

pub fn classify_sums(s: &BundleSums) -> ClassFlags {
    let sef_a = s.a_of_a >= s.a_of_b;
    let sef_b = s.b_of_b >= s.b_of_a;
    ClassFlags {
        ef: sef_a && sef_b,
        sef_a,
        sef_b,
        lpv: s.a_of_a >= s.b_of_a && s.b_of_b >= s.a_of_b,
        // Σ_A (a−b) ≥ Σ_B (a−b), rearranged to stay unsigned
        ltv: s.a_of_a + s.b_of_b >= s.a_of_b + s.b_of_a,
    }
}

pub fn classify(inst: &AllocationInstance, alloc: &Allocation) -> Result<ClassFlags> {
    if alloc.n() != inst.n() {
        return Err(Error::NotAPartition(format!(
            "allocation covers {} goods, instance has {}",
            alloc.n(),
            inst.n()
        )));
    }
    let mut sums = BundleSums {
        a_of_a: 0,
        b_of_a: 0,
        a_of_b: 0,
        b_of_b: 0,
    };
    for (i, (&a, &b)) in inst.a().iter().zip(inst.b()).enumerate() {
        if alloc.goes_to_b(i) {
            sums.a_of_b += a;
            sums.b_of_b += b;
        } else {
            sums.a_of_a += a;
            sums.b_of_a += b;
        }
    }
    Ok(classify_sums(&sums))
}

/// A family of knapsack instances sharing weights, one per cardinality
/// `m ∈ 1..n`, with capacity `base + m·shift`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedSeries {
    weights: Vec<u64>,
    shift: i64,
    base_twice: i64,
    swapped: bool,
}

impl ReducedSeries {
    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    /// Twice the base capacity (it may be half-integral, and negative).
    pub fn base_capacity_twice(&self) -> i64 {
        self.base_twice
    }

    pub fn swapped(&self) -> bool {
        self.swapped
    }

    pub fn m_range(&self) -> std::ops::Range<usize> {
        1..self.weights.len()
    }

    /// `None` when the capacity is negative; no subset fits then, since all
    /// reduced weights are positive.
    pub fn per_m_capacity(&self, m: usize) -> Option<Capacity> {
        let twice = self.base_twice as i128 + 2 * m as i128 * self.shift as i128;
        (twice >= 0).then(|| Capacity::from_twice(twice as u64))
    }

    pub fn instance(&self, m: usize) -> Option<KnapsackInstance> {
        let cap = self.per_m_capacity(m)?;
        KnapsackInstance::new(self.weights.clone(), cap, m).ok()
    }
}

pub fn reduce_lpv(inst: &AllocationInstance) -> ReducedSeries {
    let sum_a: u64 = inst.a().iter().sum();
    let sum_b: u64 = inst.b().iter().sum();
    let swapped = sum_a < sum_b;
    let (own, other) = if swapped {
        (inst.b(), inst.a())
    } else {
        (inst.a(), inst.b())
    };
    let shift = *other.iter().max().expect("non-empty instance");
    let weights = own
        .iter()
        .zip(other)
        .map(|(&x, &y)| x + shift - y)
        .collect();
    ReducedSeries {
        weights,
        shift: shift as i64,
        base_twice: 0,
        swapped,
    }
}

pub fn reduce_ltv(inst: &AllocationInstance) -> ReducedSeries {
    let diffs: Vec<i64> = inst
        .a()
        .iter()
        .zip(inst.b())
        .map(|(&a, &b)| a as i64 - b as i64)
        .collect();
    let beta = *diffs.iter().min().expect("non-empty instance");
    let shift = 1 - beta;
    ReducedSeries {
        weights: diffs.iter().map(|&d| (d + shift) as u64).collect(),
        shift,
        base_twice: diffs.iter().sum(),
        swapped: false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Method {
    Exact,
    Approximate(Epsilon),
}

/// Sums the per-cardinality knapsack counts of a reduced series in ascending
/// `m`.
pub fn count_series(series: &ReducedSeries, method: &Method) -> Result<CountResult> {
    let queries: Vec<(usize, Capacity)> = series
        .m_range()
        .filter_map(|m| series.per_m_capacity(m).map(|c| (m, c)))
        .collect();
    let mut total = match method {
        Method::Exact => CountResult::exact(BigUint::default()),
        Method::Approximate(_) => CountResult::approximate_zero(),
    };
    match method {
        Method::Exact => {
            for &(m, cap) in &queries {
                let inst = KnapsackInstance::new(series.weights.clone(), cap, m)?;
                total.add_exact(&dp_exact_count(&inst)?.0);
            }
        }
        Method::Approximate(eps) => {
            for term in approx_count_many(&series.weights, &queries, eps)? {
                total.accumulate(term);
            }
        }
    }
    Ok(total)
}

/// Whether `(S, ∅)` and `(∅, S)` belong to the class, checked directly.
fn trivial_hits(inst: &AllocationInstance, pick: impl Fn(&ClassFlags) -> bool) -> u64 {
    let n = inst.n();
    let all_to_a = Allocation::from_b_mask(n, 0);
    let all_to_b = Allocation::with_set_b(n, &(0..n).collect::<Vec<_>>()).expect("valid");
    [all_to_a, all_to_b]
        .iter()
        .filter(|alloc| pick(&classify(inst, alloc).expect("same size")))
        .count() as u64
}

/// Number of LPV allocations with both bundles non-empty; with
/// `include_trivial`, also the allocations that give everything to one player.
pub fn count_lpv(
    inst: &AllocationInstance,
    method: &Method,
    include_trivial: bool,
) -> Result<CountResult> {
    let mut total = count_series(&reduce_lpv(inst), method)?;
    if include_trivial {
        total.add_exact(&BigUint::from(trivial_hits(inst, |f| f.lpv)));
    }
    Ok(total)
}

/// LTV counterpart of [`count_lpv`].
pub fn count_ltv(
    inst: &AllocationInstance,
    method: &Method,
    include_trivial: bool,
) -> Result<CountResult> {
    let mut total = count_series(&reduce_ltv(inst), method)?;
    if include_trivial {
        total.add_exact(&BigUint::from(trivial_hits(inst, |f| f.ltv)));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::brute_force_allocation_census;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::ToPrimitive;
    use proptest::prelude::*;

    fn alloc_inst(a: &[u64], b: &[u64]) -> AllocationInstance {
        AllocationInstance::new(a.to_vec(), b.to_vec()).unwrap()
    }

    fn exact(v: u64) -> CountResult {
        CountResult::exact(BigUint::from(v))
    }

    #[test]
    fn classify_examples() {
        let inst = alloc_inst(&[8, 4, 6, 5], &[5, 8, 7, 7]);
        let alloc = Allocation::from_sets(4, &[0, 1], &[2, 3]).unwrap();
        let flags = classify(&inst, &alloc).unwrap();
        assert!(flags.ef && !flags.lpv && flags.ltv);

        let inst = alloc_inst(&[2], &[1]);
        let alloc = Allocation::from_sets(1, &[0], &[]).unwrap();
        assert!(classify(&inst, &alloc).unwrap().lpv);

        // every sum equal: all comparisons are ties
        let inst = alloc_inst(&[2, 2], &[2, 2]);
        let flags = classify(&inst, &Allocation::from_sets(2, &[1], &[0]).unwrap()).unwrap();
        assert_eq!(
            flags,
            ClassFlags {
                ef: true,
                sef_a: true,
                sef_b: true,
                lpv: true,
                ltv: true
            }
        );

        let wrong_size = Allocation::from_sets(2, &[0], &[1]).unwrap();
        assert!(classify(&alloc_inst(&[1, 1, 1], &[1, 1, 1]), &wrong_size).is_err());
    }

    #[test]
    fn lpv_reduction_examples() {
        let r = reduce_lpv(&alloc_inst(&[3, 1], &[1, 3]));
        assert_eq!(
            (r.shift(), r.weights(), r.swapped()),
            (3, &[5u64, 1][..], false)
        );
        assert_eq!(r.per_m_capacity(1), Some(Capacity::integer(3)));

        let r = reduce_lpv(&alloc_inst(&[1, 1], &[5, 5]));
        assert!(r.swapped());
        assert_eq!((r.shift(), r.weights()), (1, &[5u64, 5][..]));

        let r = reduce_lpv(&alloc_inst(&[8, 4, 6, 5], &[5, 8, 7, 7]));
        assert!(r.swapped());
        assert_eq!((r.shift(), r.weights()), (8, &[5u64, 12, 9, 10][..]));
    }

    #[test]
    fn ltv_reduction_examples() {
        let r = reduce_ltv(&alloc_inst(&[3, 1], &[1, 3]));
        assert_eq!((r.shift(), r.weights()), (3, &[5u64, 1][..]));
        assert_eq!(r.per_m_capacity(1), Some(Capacity::integer(3)));

        let r = reduce_ltv(&alloc_inst(&[2, 2], &[1, 1]));
        assert_eq!((r.shift(), r.weights()), (0, &[1u64, 1][..]));
        assert_eq!(r.per_m_capacity(1), Some(Capacity::integer(1)));

        let r = reduce_ltv(&alloc_inst(&[2, 1], &[1, 1]));
        assert_eq!((r.shift(), r.weights()), (1, &[2u64, 1][..]));
        assert_eq!(r.per_m_capacity(1), Some(Capacity::from_twice(3)));

        // all differences equal and negative: small m gives a negative capacity
        let r = reduce_ltv(&alloc_inst(&[1, 1, 1, 1], &[11, 11, 11, 11]));
        assert_eq!(r.per_m_capacity(1), None);
        assert_eq!(
            count_ltv(
                &alloc_inst(&[1, 1, 1, 1], &[11, 11, 11, 11]),
                &Method::Exact,
                false
            )
            .unwrap(),
            exact(10)
        );
    }

    #[test]
    fn count_examples() {
        let inst = alloc_inst(&[3, 1], &[1, 3]);
        assert_eq!(count_lpv(&inst, &Method::Exact, false).unwrap(), exact(1));
        assert_eq!(count_lpv(&inst, &Method::Exact, true).unwrap(), exact(3));
        assert_eq!(
            count_lpv(&alloc_inst(&[2], &[1]), &Method::Exact, false).unwrap(),
            exact(0)
        );
        assert_eq!(
            count_lpv(&alloc_inst(&[2], &[1]), &Method::Exact, true).unwrap(),
            exact(1)
        );

        assert_eq!(
            count_ltv(&alloc_inst(&[2, 2], &[1, 1]), &Method::Exact, false).unwrap(),
            exact(2)
        );
        assert_eq!(
            count_ltv(&alloc_inst(&[2, 1], &[1, 1]), &Method::Exact, false).unwrap(),
            exact(1)
        );

        let eps: Epsilon = "0.2".parse().unwrap();
        let y = count_ltv(&inst, &Method::Approximate(eps), false).unwrap();
        let v = y.value().to_f64().unwrap();
        assert!((1.0..=0.2f64.exp()).contains(&v), "{v}");
    }

    #[test]
    fn known_instance_has_envy_free_but_not_lpv_partition() {
        let inst = alloc_inst(&[8, 4, 6, 5], &[5, 8, 7, 7]);
        let witness = (0..16u64)
            .map(|mask| classify(&inst, &Allocation::from_b_mask(4, mask)).unwrap())
            .any(|f| f.ef && !f.lpv);
        assert!(witness);
    }

    fn instance() -> impl Strategy<Value = AllocationInstance> {
        (1usize..9)
            .prop_flat_map(|n| {
                (
                    prop::collection::vec(1u64..15, n),
                    prop::collection::vec(1u64..15, n),
                )
            })
            .prop_map(|(a, b)| AllocationInstance::new(a, b).unwrap())
    }

    proptest! {
        #[test]
        fn flags_respect_implications(inst in instance(), mask in any::<u64>()) {
            let n = inst.n();
            let alloc = Allocation::from_b_mask(n, mask & ((1 << n) - 1));
            let f = classify(&inst, &alloc).unwrap();
            prop_assert!(!f.ef || (f.sef_a && f.sef_b));
            prop_assert!(!f.lpv || f.sef_a || f.sef_b);
            prop_assert!(!f.ef || f.ltv);
            prop_assert!(!f.lpv || f.ltv);
        }

        #[test]
        fn reductions_match_census(inst in instance()) {
            let census = brute_force_allocation_census(&inst).unwrap();
            prop_assert_eq!(count_lpv(&inst, &Method::Exact, false).unwrap(), exact(census.lpv.nontrivial));
            prop_assert_eq!(count_ltv(&inst, &Method::Exact, false).unwrap(), exact(census.ltv.nontrivial));
            prop_assert_eq!(count_lpv(&inst, &Method::Exact, true).unwrap(), exact(census.lpv.total()));
            prop_assert_eq!(count_ltv(&inst, &Method::Exact, true).unwrap(), exact(census.ltv.total()));
        }

        #[test]
        fn reduced_weights_are_positive(inst in instance()) {
            for r in [reduce_lpv(&inst), reduce_ltv(&inst)] {
                prop_assert!(r.weights().iter().all(|&w| w >= 1));
            }
        }

        #[test]
        fn lpv_count_is_swap_symmetric(inst in instance()) {
            prop_assert_eq!(
                count_lpv(&inst, &Method::Exact, true).unwrap(),
                count_lpv(&inst.swapped(), &Method::Exact, true).unwrap()
            );
        }

        #[test]
        fn lpv_duality(inst in instance(), mask in any::<u64>()) {
            // with Σa ≥ Σb: Σ_{S1} b ≥ Σ_{S1} a  iff  (S∖S1, S1) is LPV
            let inst = if inst.a().iter().sum::<u64>() >= inst.b().iter().sum::<u64>() { inst } else { inst.swapped() };
            let n = inst.n();
            let alloc = Allocation::from_b_mask(n, mask & ((1 << n) - 1));
            let (sa, sb): (u64, u64) = alloc.set_b().iter().fold((0, 0), |(x, y), &i| (x + inst.a()[i], y + inst.b()[i]));
            prop_assert_eq!(sb >= sa, classify(&inst, &alloc).unwrap().lpv);
        }

        #[test]
        fn approximate_counts_stay_in_envelope(inst in instance(), e in prop::sample::select(vec!["0.1", "0.5"])) {
            let eps: Epsilon = e.parse().unwrap();
            let census = brute_force_allocation_census(&inst).unwrap();
            for (approx, truth) in [
                (count_lpv(&inst, &Method::Approximate(eps.clone()), false).unwrap(), census.lpv.nontrivial),
                (count_ltv(&inst, &Method::Approximate(eps.clone()), false).unwrap(), census.ltv.nontrivial),
            ] {
                let y = BigRational::from_integer(BigInt::from(truth));
                prop_assert!(approx.value() >= y);
                prop_assert!(approx.value() <= y * eps.exp_lower_bound());
            }
        }
    }
}
