//! Knapsack and allocation instances: validation, the JSON document format,
//! and seeded random generation.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};

/// Largest admissible total weight / valuation sum. Leaves headroom for the
/// doubled arithmetic used with half-integral capacities and for the
/// `u64::MAX` infinity sentinel of the capacity tables.
pub const MAX_TOTAL: u64 = (i64::MAX as u64) / 4;

/// A non-negative capacity that is a multiple of 1/2, stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Capacity {
    twice: u64,
}

impl Capacity {
    pub fn integer(value: u64) -> Self {
        Capacity { twice: value * 2 }
    }

    pub fn from_twice(twice: u64) -> Self {
        Capacity { twice }
    }

    pub fn twice(self) -> u64 {
        self.twice
    }

    /// Largest integer not above the capacity. Integer weight sums fit under
    /// the capacity iff they fit under its floor.
    pub fn floor(self) -> u64 {
        self.twice / 2
    }

    pub fn is_integral(self) -> bool {
        self.twice.is_multiple_of(2)
    }

    fn to_json(self) -> Value {
        if self.is_integral() {
            json!(self.floor())
        } else {
            json!(format!("{}/2", self.twice))
        }
    }

    fn from_json(value: &Value) -> Result<Self> {
        match value {
            Value::Number(num) => {
                if let Some(v) = num.as_u64() {
                    return Ok(Capacity::integer(v));
                }
                if num.as_i64().is_some() {
                    return Err(Error::BadCapacity(num.to_string()));
                }
                let f = num
                    .as_f64()
                    .ok_or_else(|| Error::BadCapacity(num.to_string()))?;
                let doubled = f * 2.0;
                if f < 0.0 || doubled.fract() != 0.0 || doubled > MAX_TOTAL as f64 {
                    return Err(Error::BadCapacity(num.to_string()));
                }
                Ok(Capacity::from_twice(doubled as u64))
            }
            Value::String(s) => s.parse(),
            other => Err(Error::BadCapacity(other.to_string())),
        }
    }
}

impl FromStr for Capacity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadCapacity(s.to_string());
        let s = s.trim();
        match s.split_once('/') {
            None => s.parse::<u64>().map(Capacity::integer).map_err(|_| bad()),
            Some((num, den)) => {
                let num: u64 = num.trim().parse().map_err(|_| bad())?;
                match den.trim() {
                    "1" => Ok(Capacity::integer(num)),
                    "2" => Ok(Capacity::from_twice(num)),
                    _ => Err(bad()),
                }
            }
        }
    }
}

impl fmt::Display for Capacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integral() {
            write!(f, "{}", self.floor())
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

/// Select exactly `m_items` of the weights with total weight at most `capacity`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KnapsackInstance {
    weights: Vec<u64>,
    capacity: Capacity,
    m_items: usize,
}

impl KnapsackInstance {
    pub fn new(weights: Vec<u64>, capacity: Capacity, m_items: usize) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty);
        }
        if m_items > weights.len() {
            return Err(Error::ItemCountOutOfRange {
                m: m_items,
                n: weights.len(),
            });
        }
        weights
            .iter()
            .try_fold(0u64, |acc, &w| acc.checked_add(w))
            .filter(|&t| t <= MAX_TOTAL)
            .ok_or(Error::Overflow)?;
        if capacity.twice() > 2 * MAX_TOTAL {
            return Err(Error::BadCapacity(capacity.to_string()));
        }
        Ok(KnapsackInstance {
            weights,
            capacity,
            m_items,
        })
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn capacity(&self) -> Capacity {
        self.capacity
    }

    pub fn m_items(&self) -> usize {
        self.m_items
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn total_weight(&self) -> u64 {
        self.weights.iter().sum()
    }

    pub fn with_capacity(&self, capacity: Capacity) -> Result<Self> {
        KnapsackInstance::new(self.weights.clone(), capacity, self.m_items)
    }

    pub fn with_m_items(&self, m_items: usize) -> Result<Self> {
        KnapsackInstance::new(self.weights.clone(), self.capacity, m_items)
    }

    pub fn to_json(&self) -> String {
        json!({
            "weights": self.weights,
            "capacity": self.capacity.to_json(),
            "m": self.m_items,
        })
        .to_string()
    }
}

/// Parse a knapsack document: `{"weights":[..],"capacity":C,"m":M}`.
pub fn parse_knapsack_instance(text: &str) -> Result<KnapsackInstance> {
    let doc = parse_object(text)?;
    let weights = doc
        .get("weights")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Malformed("missing array field \"weights\"".into()))?;
    let mut parsed = Vec::with_capacity(weights.len());
    for (index, w) in weights.iter().enumerate() {
        match (w.as_u64(), w.as_i64()) {
            (Some(v), _) => parsed.push(v),
            (None, Some(_)) => return Err(Error::NegativeWeight { index }),
            _ => {
                return Err(Error::Malformed(format!(
                    "weight at position {index} is not an integer"
                )))
            }
        }
    }
    let capacity = doc
        .get("capacity")
        .ok_or_else(|| Error::Malformed("missing field \"capacity\"".into()))
        .and_then(Capacity::from_json)?;
    let m = doc
        .get("m")
        .ok_or_else(|| Error::Malformed("missing field \"m\"".into()))?;
    let m_items = match (m.as_u64(), m.as_i64()) {
        (Some(v), _) => usize::try_from(v).map_err(|_| Error::Malformed("m too large".into()))?,
        (None, Some(v)) => {
            return Err(Error::ItemCountOutOfRange {
                m: v.unsigned_abs() as usize,
                n: parsed.len(),
            })
        }
        _ => return Err(Error::Malformed("field \"m\" is not an integer".into())),
    };
    KnapsackInstance::new(parsed, capacity, m_items)
}

/// Two players' valuations of the same `n` goods.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AllocationInstance {
    a: Vec<u64>,
    b: Vec<u64>,
}

impl AllocationInstance {
    pub fn new(a: Vec<u64>, b: Vec<u64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch {
                a: a.len(),
                b: b.len(),
            });
        }
        if a.is_empty() {
            return Err(Error::Empty);
        }
        for (index, (&x, &y)) in a.iter().zip(&b).enumerate() {
            if x == 0 || y == 0 {
                return Err(Error::NonPositiveValuation { index });
            }
        }
        for v in [&a, &b] {
            v.iter()
                .try_fold(0u64, |acc, &x| acc.checked_add(x))
                .filter(|&t| t <= MAX_TOTAL)
                .ok_or(Error::Overflow)?;
        }
        Ok(AllocationInstance { a, b })
    }

    pub fn a(&self) -> &[u64] {
        &self.a
    }

    pub fn b(&self) -> &[u64] {
        &self.b
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    /// The same goods with the players' roles exchanged.
    pub fn swapped(&self) -> Self {
        AllocationInstance {
            a: self.b.clone(),
            b: self.a.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        json!({ "a": self.a, "b": self.b }).to_string()
    }
}

/// Parse an allocation document: `{"a":[..],"b":[..]}`.
pub fn parse_allocation_instance(text: &str) -> Result<AllocationInstance> {
    let doc = parse_object(text)?;
    let field = |name: &str| -> Result<Vec<u64>> {
        let values = doc
            .get(name)
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Malformed(format!("missing array field \"{name}\"")))?;
        values
            .iter()
            .enumerate()
            .map(|(index, v)| match (v.as_u64(), v.as_i64()) {
                (Some(x), _) => Ok(x),
                (None, Some(_)) => Err(Error::NonPositiveValuation { index }),
                _ => Err(Error::Malformed(format!(
                    "valuation {name}[{index}] is not an integer"
                ))),
            })
            .collect()
    };
    let a = field("a")?;
    let b = field("b")?;
    AllocationInstance::new(a, b)
}

fn parse_object(text: &str) -> Result<serde_json::Map<String, Value>> {
    if text.starts_with('\u{feff}') {
        return Err(Error::Malformed("byte order mark is not allowed".into()));
    }
    match serde_json::from_str::<Value>(text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(Error::Malformed("document is not a JSON object".into())),
        Err(e) => Err(Error::Malformed(e.to_string())),
    }
}

/// A partition `(S_A, S_B)` of the goods `0..n`. Either side may be empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Allocation {
    to_b: Vec<bool>,
}

impl Allocation {
    /// Builds the partition from explicit 0-based index sets, rejecting
    /// overlaps, gaps and out-of-range indices.
    pub fn from_sets(n: usize, set_a: &[usize], set_b: &[usize]) -> Result<Self> {
        let mut owner: Vec<Option<bool>> = vec![None; n];
        for (&i, side) in set_a
            .iter()
            .map(|i| (i, false))
            .chain(set_b.iter().map(|i| (i, true)))
        {
            let slot = owner
                .get_mut(i)
                .ok_or_else(|| Error::NotAPartition(format!("good {i} out of range")))?;
            if slot.is_some() {
                return Err(Error::NotAPartition(format!("good {i} assigned twice")));
            }
            *slot = Some(side);
        }
        let to_b = owner
            .into_iter()
            .enumerate()
            .map(|(i, o)| o.ok_or_else(|| Error::NotAPartition(format!("good {i} unassigned"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Allocation { to_b })
    }

    /// `S_B` = given set, `S_A` = its complement.
    pub fn with_set_b(n: usize, set_b: &[usize]) -> Result<Self> {
        let mut to_b = vec![false; n];
        for &i in set_b {
            match to_b.get_mut(i) {
                Some(slot) if !*slot => *slot = true,
                Some(_) => return Err(Error::NotAPartition(format!("good {i} listed twice"))),
                None => return Err(Error::NotAPartition(format!("good {i} out of range"))),
            }
        }
        Ok(Allocation { to_b })
    }

    /// Bit `i` of `mask` set means good `i` goes to B.
    pub fn from_b_mask(n: usize, mask: u64) -> Self {
        Allocation {
            to_b: (0..n).map(|i| mask >> i & 1 == 1).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.to_b.len()
    }

    pub fn goes_to_b(&self, good: usize) -> bool {
        self.to_b[good]
    }

    pub fn set_a(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| !self.to_b[i]).collect()
    }

    pub fn set_b(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.to_b[i]).collect()
    }

    /// One bundle is empty.
    pub fn is_trivial(&self) -> bool {
        self.to_b.iter().all(|&x| x) || self.to_b.iter().all(|&x| !x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    Knapsack,
    Allocation,
}

/// How the prescribed item count of a generated knapsack instance is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ItemCountRule {
    Fixed(usize),
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub kind: InstanceKind,
    pub n: usize,
    pub max_value: u64,
    pub seed: u64,
    /// Knapsack capacity as a fraction of the total weight (floored).
    pub capacity_rule: f64,
    pub m_rule: ItemCountRule,
}

impl GeneratorSpec {
    pub fn knapsack(n: usize, max_value: u64, seed: u64) -> Self {
        GeneratorSpec {
            kind: InstanceKind::Knapsack,
            n,
            max_value,
            seed,
            capacity_rule: 0.5,
            m_rule: ItemCountRule::Fixed(n / 2),
        }
    }

    pub fn allocation(n: usize, max_value: u64, seed: u64) -> Self {
        GeneratorSpec {
            kind: InstanceKind::Allocation,
            ..GeneratorSpec::knapsack(n, max_value, seed)
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidGenerator("n must be at least 1".into()));
        }
        if self.max_value == 0 {
            return Err(Error::InvalidGenerator(
                "max_value must be at least 1".into(),
            ));
        }
        if !(self.capacity_rule >= 0.0 && self.capacity_rule.is_finite()) {
            return Err(Error::InvalidGenerator(format!(
                "capacity_rule {} is not a non-negative fraction",
                self.capacity_rule
            )));
        }
        if let ItemCountRule::Fixed(m) = self.m_rule {
            if m > self.n {
                return Err(Error::ItemCountOutOfRange { m, n: self.n });
            }
        }
        (self.n as u64)
            .checked_mul(self.max_value)
            .filter(|&t| t <= MAX_TOTAL)
            .ok_or(Error::Overflow)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeneratedInstance {
    Knapsack(KnapsackInstance),
    Allocation(AllocationInstance),
}

impl GeneratedInstance {
    pub fn to_json(&self) -> String {
        match self {
            GeneratedInstance::Knapsack(k) => k.to_json(),
            GeneratedInstance::Allocation(a) => a.to_json(),
        }
    }
}

/// Deterministic in `spec`: the same spec (including its seed) always yields
/// the same instance.
pub fn generate_instance(spec: &GeneratorSpec) -> Result<GeneratedInstance> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<u64> {
        (0..spec.n)
            .map(|_| rng.random_range(1..=spec.max_value))
            .collect()
    };
    match spec.kind {
        InstanceKind::Knapsack => {
            let weights = draw(&mut rng);
            let total: u64 = weights.iter().sum();
            let capacity = (total as f64 * spec.capacity_rule).floor() as u64;
            let m = match spec.m_rule {
                ItemCountRule::Fixed(m) => m,
                ItemCountRule::Uniform => rng.random_range(0..=spec.n),
            };
            KnapsackInstance::new(weights, Capacity::integer(capacity), m)
                .map(GeneratedInstance::Knapsack)
        }
        InstanceKind::Allocation => {
            let a = draw(&mut rng);
            let b = draw(&mut rng);
            AllocationInstance::new(a, b).map(GeneratedInstance::Allocation)
        }
    }
}
