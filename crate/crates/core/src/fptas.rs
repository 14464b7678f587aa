//! Approximate counting of `M`-item knapsack solutions on a geometric grid of
//! solution counts.
//!
//! `T[m][i][j]` approximates the least capacity at which at least `Q^j`
//! subsets of size `m` drawn from the first `i` items fit, where
//! `Q = 1 + ε/(n+1)` and `j ∈ 0..=s`, `s = ⌈n·log_Q 2⌉`. Each cell is a
//! min-max over how the required count splits between subsets that take item
//! `i` and subsets that skip it. The table is sandwiched between exact
//! values, `τ(m, i, Q^{j−i}) ≤ T[m][i][j] ≤ τ(m, i, Q^j)`, so reading off the
//! last column that fits under `C` brackets the true count within a factor
//! `Q^{n+1} ≤ e^ε`.
//!
//! Rows are stored as their finite prefix: every row is non-decreasing in
//! `j`, so all cells past the stored prefix are infinite.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::count::CountResult;
use crate::error::{Error, Result};
use crate::exact::ExtendedCapacity;
use crate::instance::{Capacity, KnapsackInstance};

const INF: u64 = u64::MAX;

/// Margin (in natural-log units) inside which the `Q^j > binomial(i, m)`
/// shortcut is not taken.
const GUARD_MARGIN: f64 = 1e-9;

/// Rows longer than this are filled in parallel.
const PAR_ROW_THRESHOLD: usize = 2048;

/// Approximation parameter, an exact rational strictly between 0 and 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Epsilon(BigRational);

impl Epsilon {
    pub fn new(numer: u64, denom: u64) -> Result<Self> {
        if denom == 0 {
            return Err(Error::EpsilonOutOfRange(format!("{numer}/0")));
        }
        Epsilon::from_rational(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_rational(value: BigRational) -> Result<Self> {
        if value.is_positive() && value < BigRational::one() {
            Ok(Epsilon(value))
        } else {
            Err(Error::EpsilonOutOfRange(value.to_string()))
        }
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// A rational lower bound on `e^ε` (Taylor partial sum, all terms
    /// positive). Checking `Z′ ≤ bound · Z` is at least as strict as
    /// checking against `e^ε` itself.
    pub fn exp_lower_bound(&self) -> BigRational {
        let mut term = BigRational::one();
        let mut sum = BigRational::one();
        for k in 1..=30u32 {
            term = term * &self.0 / BigRational::from_integer(k.into());
            sum += &term;
        }
        sum
    }
}

impl FromStr for Epsilon {
    type Err = Error;

    /// Accepts decimals (`0.05`) and fractions (`1/20`), parsed exactly.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::EpsilonOutOfRange(s.to_string());
        let s = s.trim();
        let value = if let Some((num, den)) = s.split_once('/') {
            let num: BigInt = num.trim().parse().map_err(|_| bad())?;
            let den: BigInt = den.trim().parse().map_err(|_| bad())?;
            if den.is_zero() {
                return Err(bad());
            }
            BigRational::new(num, den)
        } else {
            let (int, frac) = s.split_once('.').unwrap_or((s, ""));
            if int.is_empty() && frac.is_empty()
                || !int.chars().all(|c| c.is_ascii_digit())
                || !frac.chars().all(|c| c.is_ascii_digit())
            {
                return Err(bad());
            }
            let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
            BigRational::new(digits, BigInt::from(10u8).pow(frac.len() as u32))
        };
        Epsilon::from_rational(value)
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // terminating decimals print as decimals, anything else as a fraction
        let mut den = self.0.denom().clone();
        let (two, five) = (BigInt::from(2u8), BigInt::from(5u8));
        let mut places = 0u32;
        while (&den % &two).is_zero() || (&den % &five).is_zero() {
            if (&den % &two).is_zero() {
                den /= &two;
            }
            if (&den % &five).is_zero() {
                den /= &five;
            }
            places += 1;
        }
        if !den.is_one() {
            return write!(f, "{}", self.0);
        }
        let scaled =
            (&self.0 * BigRational::from_integer(BigInt::from(10u8).pow(places))).to_integer();
        let digits = format!("{:0>width$}", scaled, width = places as usize + 1);
        let (int, frac) = digits.split_at(digits.len() - places as usize);
        if frac.is_empty() {
            write!(f, "{int}")
        } else {
            write!(f, "{int}.{frac}")
        }
    }
}

/// Grid ratio `Q`, grid size `s`, and the precomputed per-offset indices used
/// by the cell minimisation.
#[derive(Debug, Clone)]
pub struct ApproxParams {
    n: usize,
    epsilon: Epsilon,
    q: BigRational,
    ln_q: f64,
    s: usize,
    /// `offsets[t] = ⌊log_Q(1 − Q^{−t})⌋` for `t ≥ 1`; always `≤ −1`.
    offsets: Vec<i64>,
    ln_factorial: Vec<f64>,
}

pub fn approx_params(n: usize, epsilon: &Epsilon) -> Result<ApproxParams> {
    if n == 0 {
        return Err(Error::Empty);
    }
    let n_plus_one = BigRational::from_integer(BigInt::from(n + 1));
    let q = BigRational::one() + epsilon.as_rational() / &n_plus_one;
    let ln_q = (epsilon.to_f64() / (n + 1) as f64).ln_1p();
    let raw = n as f64 * std::f64::consts::LN_2 / ln_q;
    let s = (raw * (1.0 + 1e-12)).ceil() as usize;
    let offsets = std::iter::once(0)
        .chain((1..=s).map(|t| {
            let ln_gap = (-(-(t as f64) * ln_q).exp()).ln_1p();
            ((ln_gap / ln_q).floor() as i64).min(-1)
        }))
        .collect();
    let ln_factorial = std::iter::once(0.0)
        .chain((1..=n).scan(0.0, |acc, k| {
            *acc += (k as f64).ln();
            Some(*acc)
        }))
        .collect();
    Ok(ApproxParams {
        n,
        epsilon: epsilon.clone(),
        q,
        ln_q,
        s,
        offsets,
        ln_factorial,
    })
}

impl ApproxParams {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> &Epsilon {
        &self.epsilon
    }

    pub fn q(&self) -> &BigRational {
        &self.q
    }

    pub fn q_f64(&self) -> f64 {
        self.ln_q.exp()
    }

    pub fn ln_q(&self) -> f64 {
        self.ln_q
    }

    pub fn s(&self) -> usize {
        self.s
    }

    /// Exclusive upper bound on the columns of row `(m, i)` that can be
    /// finite: columns with `Q^j > binomial(i, m)` are infinite outright.
    pub fn row_len(&self, m: usize, i: usize) -> usize {
        if m > i {
            return 0;
        }
        if m == 0 || m == i {
            return 1;
        }
        let ln_binom = self.ln_factorial[i] - self.ln_factorial[m] - self.ln_factorial[i - m];
        let last = ((ln_binom + GUARD_MARGIN) / self.ln_q).floor();
        (last as usize).min(self.s) + 1
    }

    /// Second-branch column for the candidate whose first branch reads column
    /// `r` at cell `j`: the floor index of the remaining requirement just
    /// before the first branch would step to column `r + 1`.
    #[inline]
    fn partner(&self, j: usize, r: usize) -> usize {
        let t = j - r - 1;
        if t == 0 {
            0
        } else {
            (j as i64 + self.offsets[t]).max(0) as usize
        }
    }
}

#[inline]
fn read(row: &[u64], idx: usize) -> u64 {
    row.get(idx).copied().unwrap_or(INF)
}

/// The candidate list of cell `j`, indexed by `pos ∈ 0..=j+1`:
/// `pos = 0` takes none of the requirement from the item-taking branch
/// (`k = 0`), `pos = j + 1` takes all of it (`k = 1`), and `pos = r + 1`
/// covers the `k` with first-branch column `r`. A dropped branch contributes
/// 0. The first branch is non-decreasing in `pos`, the second non-increasing.
struct Candidates<'a> {
    take: &'a [u64],
    skip: &'a [u64],
    weight: u64,
    j: usize,
    params: &'a ApproxParams,
}

impl Candidates<'_> {
    #[inline]
    fn first(&self, pos: usize) -> u64 {
        if pos == 0 {
            0
        } else {
            read(self.take, pos - 1).saturating_add(self.weight)
        }
    }

    #[inline]
    fn second(&self, pos: usize) -> u64 {
        if pos == self.j + 1 {
            0
        } else if pos == 0 {
            read(self.skip, self.j)
        } else {
            read(self.skip, self.params.partner(self.j, pos - 1))
        }
    }

    #[inline]
    fn value(&self, pos: usize) -> u64 {
        self.first(pos).max(self.second(pos))
    }

    fn binary_search(&self) -> u64 {
        // smallest pos with first(pos) >= second(pos); pos = j + 1 qualifies
        let (mut lo, mut hi) = (0, self.j + 1);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.first(mid) >= self.second(mid) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let at = self.value(lo);
        if lo == 0 {
            at
        } else {
            at.min(self.value(lo - 1))
        }
    }

    fn scan(&self) -> u64 {
        (0..=self.j + 1)
            .map(|pos| self.value(pos))
            .min()
            .unwrap_or(INF)
    }
}

fn fill_row(
    take: &[u64],
    skip: &[u64],
    weight: u64,
    len: usize,
    params: &ApproxParams,
    clamp: u64,
) -> Vec<u64> {
    if take.is_empty() && skip.is_empty() {
        return Vec::new();
    }
    let cell = |j: usize| {
        let v = Candidates {
            take,
            skip,
            weight,
            j,
            params,
        }
        .binary_search();
        if v > clamp {
            INF
        } else {
            v
        }
    };
    let mut row: Vec<u64> = if len >= PAR_ROW_THRESHOLD {
        (0..len).into_par_iter().map(cell).collect()
    } else {
        let mut row = Vec::with_capacity(len);
        for j in 0..len {
            let v = cell(j);
            if v == INF {
                break;
            }
            row.push(v);
        }
        row
    };
    let finite = row.iter().position(|&v| v == INF).unwrap_or(row.len());
    row.truncate(finite);
    row
}

/// Computes row `(m, i)` from rows `(m−1, i−1)` and `(m, i−1)`.
fn next_row(
    params: &ApproxParams,
    prev: &[Vec<u64>],
    m: usize,
    i: usize,
    weight: u64,
    clamp: u64,
) -> Vec<u64> {
    if m == 0 {
        return vec![0];
    }
    fill_row(
        &prev[m - 1],
        &prev[m],
        weight,
        params.row_len(m, i),
        params,
        clamp,
    )
}

/// The full table `T[m][i][·]` for `m ∈ 0..=M`, `i ∈ 0..=n`.
#[derive(Debug, Clone)]
pub struct CapacityTable {
    params: ApproxParams,
    weights: Vec<u64>,
    rows: Vec<Vec<Vec<u64>>>,
}

impl CapacityTable {
    pub fn params(&self) -> &ApproxParams {
        &self.params
    }

    pub fn max_m(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn weight(&self, i: usize) -> u64 {
        self.weights[i - 1]
    }

    pub fn get(&self, m: usize, i: usize, j: usize) -> ExtendedCapacity {
        assert!(
            j <= self.params.s,
            "column {j} beyond s = {}",
            self.params.s
        );
        ExtendedCapacity::from_raw(read(&self.rows[m][i], j))
    }

    /// Number of leading finite cells of row `(m, i)`.
    pub fn finite_len(&self, m: usize, i: usize) -> usize {
        self.rows[m][i].len()
    }
}

pub fn build_capacity_table(inst: &KnapsackInstance, params: &ApproxParams) -> CapacityTable {
    assert_eq!(params.n, inst.n(), "parameters built for a different n");
    let n = inst.n();
    let max_m = inst.m_items();
    let mut rows = vec![vec![Vec::new(); n + 1]; max_m + 1];
    rows[0].fill(vec![0]);
    for i in 1..=n {
        let weight = inst.weights()[i - 1];
        let prev: Vec<Vec<u64>> = (0..=max_m).map(|m| rows[m][i - 1].clone()).collect();
        let fresh: Vec<Vec<u64>> = (1..=max_m.min(i))
            .into_par_iter()
            .map(|m| next_row(params, &prev, m, i, weight, INF - 1))
            .collect();
        for (m, row) in (1..).zip(fresh) {
            rows[m][i] = row;
        }
    }
    CapacityTable {
        params: params.clone(),
        weights: inst.weights().to_vec(),
        rows,
    }
}

/// Cell `(m, i, j)` recomputed from the table's previous rows by binary
/// search over the candidate list.
pub fn minimize_step(
    table: &CapacityTable,
    m: usize,
    i: usize,
    j: usize,
    weight: u64,
) -> ExtendedCapacity {
    ExtendedCapacity::from_raw(cell_candidates(table, m, i, j, weight).binary_search())
}

/// Same cell by exhaustive scan of every candidate.
pub fn minimize_step_exhaustive(
    table: &CapacityTable,
    m: usize,
    i: usize,
    j: usize,
    weight: u64,
) -> ExtendedCapacity {
    ExtendedCapacity::from_raw(cell_candidates(table, m, i, j, weight).scan())
}

fn cell_candidates<'a>(
    table: &'a CapacityTable,
    m: usize,
    i: usize,
    j: usize,
    weight: u64,
) -> Candidates<'a> {
    assert!(m >= 1 && m <= table.max_m(), "m = {m} out of range");
    assert!(i >= 1 && i <= table.n(), "i = {i} out of range");
    assert!(j <= table.params.s, "j = {j} out of range");
    Candidates {
        take: &table.rows[m - 1][i - 1],
        skip: &table.rows[m][i - 1],
        weight,
        j,
        params: &table.params,
    }
}

/// Final rows `T[m][n][·]` for every `m` in `m_lo..=m_hi`, keeping only two
/// layers of `i` in memory. Cells above `clamp` are stored as infinite: any
/// max over such a cell exceeds `clamp` too, so every cell value `≤ clamp`
/// is unchanged.
fn final_rows(
    weights: &[u64],
    params: &ApproxParams,
    m_lo: usize,
    m_hi: usize,
    clamp: u64,
) -> Vec<Vec<u64>> {
    let n = weights.len();
    let mut rows: Vec<Vec<u64>> = vec![Vec::new(); m_hi + 1];
    rows[0] = vec![0];
    for (i, &weight) in (1..=n).zip(weights) {
        let lowest = m_lo.saturating_sub(n - i).max(1);
        let highest = m_hi.min(i);
        if lowest > highest {
            continue;
        }
        let fresh: Vec<Vec<u64>> = (lowest..=highest)
            .into_par_iter()
            .map(|m| next_row(params, &rows, m, i, weight, clamp))
            .collect();
        for (m, row) in (lowest..).zip(fresh) {
            rows[m] = row;
        }
    }
    rows
}

fn result_from_row(row: &[u64], params: &ApproxParams) -> CountResult {
    if row.is_empty() {
        CountResult::approximate_zero()
    } else {
        // j' = row.len() - 1, Z' = Q^{j'+1}
        CountResult::grid_power(params.q.clone(), row.len() as u64)
    }
}

/// `(1+ε)`-style approximate count: the returned `Z′` satisfies
/// `Z ≤ Z′ ≤ Q^{n+1}·Z ≤ e^ε·Z`, and is exactly 0 iff no solution exists.
pub fn approx_count(inst: &KnapsackInstance, epsilon: &Epsilon) -> Result<CountResult> {
    let params = approx_params(inst.n(), epsilon)?;
    let m = inst.m_items();
    let rows = final_rows(inst.weights(), &params, m, m, inst.capacity().floor());
    Ok(result_from_row(&rows[m], &params))
}

/// Approximate counts for several `(m, capacity)` queries over the same
/// weights. Each result equals `approx_count` on the corresponding instance;
/// the table is built once because `T[m][n][·]` does not depend on `M` or `C`.
pub fn approx_count_many(
    weights: &[u64],
    queries: &[(usize, Capacity)],
    epsilon: &Epsilon,
) -> Result<Vec<CountResult>> {
    if queries.is_empty() {
        return Ok(Vec::new());
    }
    for &(m, _) in queries {
        if m > weights.len() {
            return Err(Error::ItemCountOutOfRange {
                m,
                n: weights.len(),
            });
        }
    }
    let params = approx_params(weights.len(), epsilon)?;
    let m_lo = queries.iter().map(|q| q.0).min().unwrap_or(0);
    let m_hi = queries.iter().map(|q| q.0).max().unwrap_or(0);
    let clamp = queries.iter().map(|q| q.1.floor()).max().unwrap_or(0);
    let rows = final_rows(weights, &params, m_lo, m_hi, clamp);
    Ok(queries
        .iter()
        .map(|&(m, cap)| {
            let fits = rows[m].partition_point(|&v| v <= cap.floor());
            result_from_row(&rows[m][..fits], &params)
        })
        .collect())
}

/// Exact `Q^x` for integer `x` (negative allowed).
pub fn q_power(q: &BigRational, x: i64) -> BigRational {
    let base = q.pow(x.unsigned_abs() as i32);
    if x < 0 {
        base.recip()
    } else {
        base
    }
}

/// `⌈Q^x⌉` for `x` in `lo..=hi`, saturated at `cap` (values above `cap` are
/// reported as `cap + 1`). Used by the sandwich checks, which only need the
/// ceiling of the required count.
pub fn q_power_ceilings(q: &BigRational, lo: i64, hi: i64, cap: &BigUint) -> Vec<BigUint> {
    let limit = BigRational::from_integer(BigInt::from(cap.clone()));
    let mut current = q_power(q, lo);
    let mut out = Vec::with_capacity((hi - lo + 1).max(0) as usize);
    let mut saturated = false;
    for _ in lo..=hi {
        if saturated || current > limit {
            saturated = true;
            out.push(cap + 1u8);
            continue;
        }
        out.push(current.ceil().to_integer().to_biguint().unwrap_or_default());
        current *= q;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{brute_force_count, TauOracle};
    use proptest::prelude::*;

    fn eps(s: &str) -> Epsilon {
        s.parse().unwrap()
    }

    fn knap(weights: &[u64], cap: u64, m: usize) -> KnapsackInstance {
        KnapsackInstance::new(weights.to_vec(), Capacity::integer(cap), m).unwrap()
    }

    #[test]
    fn epsilon_parsing() {
        assert_eq!(
            eps("0.1").as_rational(),
            &BigRational::new(1.into(), 10.into())
        );
        assert_eq!(eps("1/20"), eps("0.05"));
        assert_eq!(eps(".5"), eps("0.5"));
        assert_eq!(eps("0.05").to_string(), "0.05");
        assert_eq!(eps("1/3").to_string(), "1/3");
        for bad in ["0", "1", "1.5", "-0.1", "abc", "", "0.1.2", "1/0"] {
            assert!(bad.parse::<Epsilon>().is_err(), "{bad:?} accepted");
        }
    }

    #[test]
    fn exp_lower_bound_is_tight() {
        for s in ["0.05", "0.5", "0.999"] {
            let e = eps(s);
            let bound = e.exp_lower_bound().to_f64().unwrap();
            assert!(bound <= e.to_f64().exp());
            assert!(e.to_f64().exp() - bound < 1e-15);
        }
    }

    #[test]
    fn params_examples() {
        let p = approx_params(3, &eps("0.5")).unwrap();
        assert_eq!(p.q(), &BigRational::new(9.into(), 8.into()));
        assert_eq!(p.s(), 18);

        let p = approx_params(1, &eps("0.5")).unwrap();
        assert_eq!(p.q(), &BigRational::new(5.into(), 4.into()));

        for n in [1usize, 2, 5, 10, 17] {
            for e in ["0.999", "0.5", "0.1", "0.05"] {
                let p = approx_params(n, &eps(e)).unwrap();
                let two_n = BigRational::from_integer(BigInt::from(2u8).pow(n as u32));
                assert!(q_power(p.q(), p.s() as i64) >= two_n, "n={n} eps={e}");
                assert!(p.s() >= n);
                assert!(p.q() > &BigRational::one());
            }
        }
    }

    #[test]
    fn offsets_are_floor_logs_and_monotone() {
        let p = approx_params(6, &eps("0.3")).unwrap();
        for t in 1..=p.s() {
            let gap = BigRational::one() - q_power(p.q(), -(t as i64));
            let k = p.offsets[t];
            // Q^k ≤ 1 − Q^{−t} < Q^{k+1}
            assert!(q_power(p.q(), k) <= gap, "t={t}");
            assert!(q_power(p.q(), k + 1) > gap, "t={t}");
            if t > 1 {
                assert!(p.offsets[t] >= p.offsets[t - 1]);
            }
        }
        for (n, e) in [(100, "0.1"), (40, "0.05"), (15, "0.9")] {
            let p = approx_params(n, &eps(e)).unwrap();
            assert!(p.offsets[1..].windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn table_examples() {
        let inst = knap(&[5], 0, 1);
        let params = approx_params(1, &eps("0.5")).unwrap();
        let table = build_capacity_table(&inst, &params);
        assert_eq!(table.get(1, 1, 0), ExtendedCapacity::finite(5));
        assert_eq!(
            minimize_step(&table, 1, 1, 0, 5),
            ExtendedCapacity::finite(5)
        );

        let inst = knap(&[4, 1, 7, 2], 0, 2);
        let params = approx_params(4, &eps("0.5")).unwrap();
        let table = build_capacity_table(&inst, &params);
        assert_eq!(table.get(0, 3, 0), ExtendedCapacity::ZERO);
        for j in 1..=params.s() {
            assert!(table.get(0, 3, j).is_infinite());
        }
        for j in 0..=params.s() {
            assert!(table.get(2, 1, j).is_infinite());
            assert!(table.get(1, 0, j).is_infinite());
        }
    }

    #[test]
    fn approx_examples() {
        let z = approx_count(&knap(&[1, 1, 1], 2, 2), &eps("0.25")).unwrap();
        let v = z.value();
        assert!(v >= BigRational::from_integer(3.into()));
        assert!(v.to_f64().unwrap() <= 3.0 * 0.25f64.exp());

        let z = approx_count(&knap(&[5], 4, 1), &eps("0.3")).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.exact_value(), Some(&BigUint::zero()));

        let z = approx_count(&knap(&[1, 2, 3, 4], 5, 2), &eps("0.1")).unwrap();
        let v = z.value();
        assert!(v >= BigRational::from_integer(4.into()));
        assert!(v.to_f64().unwrap() <= 4.0 * 0.1f64.exp());
        assert!(z.log_value().is_some());

        let z = approx_count(&knap(&[3, 3], 100, 0), &eps("0.1")).unwrap();
        assert!(z.value() >= BigRational::one());
    }

    #[test]
    fn epsilon_out_of_range_is_rejected() {
        assert!(Epsilon::new(1, 1).is_err());
        assert!(Epsilon::new(0, 3).is_err());
        assert!(Epsilon::new(1, 0).is_err());
    }

    #[test]
    fn many_queries_match_single_calls() {
        let weights = [3u64, 9, 1, 4, 4, 7, 2];
        let e = eps("0.2");
        let queries: Vec<(usize, Capacity)> = (0..=7)
            .map(|m| (m, Capacity::integer(3 * m as u64 + 2)))
            .collect();
        let many = approx_count_many(&weights, &queries, &e).unwrap();
        for (&(m, cap), got) in queries.iter().zip(&many) {
            let single = approx_count(
                &KnapsackInstance::new(weights.to_vec(), cap, m).unwrap(),
                &e,
            )
            .unwrap();
            assert_eq!(got.value(), single.value(), "m={m}");
        }
    }

    fn instance() -> impl Strategy<Value = KnapsackInstance> {
        (prop::collection::vec(0u64..25, 1..8), 0u64..80, 0usize..9).prop_map(|(w, c, m)| {
            let m = m % (w.len() + 1);
            knap(&w, c, m)
        })
    }

    fn epsilon() -> impl Strategy<Value = Epsilon> {
        prop::sample::select(vec!["0.05", "0.2", "0.5", "0.9"]).prop_map(eps)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn rows_are_monotone(inst in instance(), e in epsilon()) {
            let params = approx_params(inst.n(), &e).unwrap();
            let table = build_capacity_table(&inst, &params);
            for m in 0..=inst.m_items() {
                for i in 0..=inst.n() {
                    for j in 1..=params.s() {
                        prop_assert!(table.get(m, i, j - 1) <= table.get(m, i, j));
                    }
                }
            }
        }

        #[test]
        fn binary_search_matches_scan(inst in instance(), e in epsilon()) {
            let params = approx_params(inst.n(), &e).unwrap();
            let table = build_capacity_table(&inst, &params);
            for m in 1..=inst.m_items() {
                for i in 1..=inst.n() {
                    for j in 0..=params.s() {
                        let w = inst.weights()[i - 1];
                        let fast = minimize_step(&table, m, i, j, w);
                        prop_assert_eq!(fast, minimize_step_exhaustive(&table, m, i, j, w));
                        if j < params.row_len(m, i) {
                            prop_assert_eq!(fast, table.get(m, i, j));
                        } else {
                            prop_assert!(table.get(m, i, j).is_infinite());
                        }
                    }
                }
            }
        }

        #[test]
        fn sandwich_holds(inst in instance(), e in epsilon()) {
            let params = approx_params(inst.n(), &e).unwrap();
            let table = build_capacity_table(&inst, &params);
            let oracle = TauOracle::new(&inst).unwrap();
            let n = inst.n() as i64;
            let cap = BigUint::from(1u64 << inst.n());
            let ceilings = q_power_ceilings(params.q(), -n, params.s() as i64, &cap);
            let ceil_at = |x: i64| ceilings[(x + n) as usize].to_u64().unwrap();
            for m in 0..=inst.m_items() {
                for i in 0..=inst.n() {
                    for j in 0..=params.s() {
                        let cell = table.get(m, i, j);
                        let lower = oracle.tau_count(m, i, ceil_at(j as i64 - i as i64)).unwrap();
                        let upper = oracle.tau_count(m, i, ceil_at(j as i64)).unwrap();
                        prop_assert!(lower <= cell && cell <= upper,
                            "m={} i={} j={}: {} <= {} <= {}", m, i, j, lower, cell, upper);
                    }
                }
            }
        }

        #[test]
        fn envelope_holds(inst in instance(), e in epsilon()) {
            let exact = brute_force_count(&inst).unwrap();
            let approx = approx_count(&inst, &e).unwrap();
            prop_assert_eq!(approx.is_zero(), exact.is_zero());
            let z = BigRational::from_integer(BigInt::from(exact.0.clone()));
            let v = approx.value();
            prop_assert!(v >= z);
            prop_assert!(v <= z * e.exp_lower_bound());
        }
    }
}
