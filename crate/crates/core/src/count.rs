use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CountMode {
    Exact,
    Approximate,
}

impl fmt::Display for CountMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CountMode::Exact => "exact",
            CountMode::Approximate => "approximate",
        })
    }
}

/// `q^exponent` with `q` an exact rational.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GridPower {
    pub q: BigRational,
    pub exponent: u64,
}

impl GridPower {
    pub fn value(&self) -> BigRational {
        crate::fptas::q_power(&self.q, self.exponent as i64)
    }

    pub fn ln(&self) -> f64 {
        self.exponent as f64 * self.q.to_f64().unwrap_or(f64::NAN).ln()
    }
}

/// An exact or approximate solution count.
///
/// The value is `exact_part + Σ powers`. A single knapsack approximation is
/// one grid power; allocation counts sum one power per cardinality, plus
/// exact increments for the directly checked trivial partitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountResult {
    mode: CountMode,
    exact_part: BigUint,
    powers: Vec<GridPower>,
}

impl CountResult {
    pub fn exact(value: BigUint) -> Self {
        CountResult {
            mode: CountMode::Exact,
            exact_part: value,
            powers: Vec::new(),
        }
    }

    /// An approximate run that proved there are no solutions.
    pub fn approximate_zero() -> Self {
        CountResult {
            mode: CountMode::Approximate,
            exact_part: BigUint::zero(),
            powers: Vec::new(),
        }
    }

    pub fn grid_power(q: BigRational, exponent: u64) -> Self {
        CountResult {
            mode: CountMode::Approximate,
            exact_part: BigUint::zero(),
            powers: vec![GridPower { q, exponent }],
        }
    }

    pub fn mode(&self) -> CountMode {
        self.mode
    }

    /// Present when the value is known exactly (exact mode, or zero).
    pub fn exact_value(&self) -> Option<&BigUint> {
        self.powers.is_empty().then_some(&self.exact_part)
    }

    /// Present when the value is a single grid power `Q^{j′+1}`.
    pub fn log_value(&self) -> Option<&GridPower> {
        match self.powers.as_slice() {
            [single] if self.exact_part.is_zero() => Some(single),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.powers.is_empty() && self.exact_part.is_zero()
    }

    pub fn add_exact(&mut self, extra: &BigUint) {
        self.exact_part += extra;
    }

    /// Accumulates another count; the sum is approximate if either part is.
    pub fn accumulate(&mut self, other: CountResult) {
        if other.mode == CountMode::Approximate {
            self.mode = CountMode::Approximate;
        }
        self.exact_part += other.exact_part;
        self.powers.extend(other.powers);
    }

    /// The exact rational value.
    pub fn value(&self) -> BigRational {
        let mut total = BigRational::from_integer(BigInt::from(self.exact_part.clone()));
        if self.powers.is_empty() {
            return total;
        }
        // shared denominators keep the sum to one reduction when q is common
        let common = self.powers.iter().all(|p| p.q == self.powers[0].q);
        if common {
            let q = &self.powers[0].q;
            let top = self.powers.iter().map(|p| p.exponent).max().unwrap_or(0);
            let mut numer = BigInt::zero();
            for p in &self.powers {
                numer +=
                    q.numer().pow(p.exponent as u32) * q.denom().pow((top - p.exponent) as u32);
            }
            total += BigRational::new(numer, q.denom().pow(top as u32));
        } else {
            for p in &self.powers {
                total += p.value();
            }
        }
        total
    }

    pub fn to_f64(&self) -> f64 {
        if let Some(p) = self.log_value() {
            return p.ln().exp();
        }
        self.value().to_f64().unwrap_or(f64::INFINITY)
    }

    /// Decimal rendering to `digits` significant digits.
    pub fn decimal(&self, digits: usize) -> String {
        decimal_string(&self.value(), digits)
    }
}

impl fmt::Display for CountResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact_value() {
            Some(v) => write!(f, "{v}"),
            None => f.write_str(&self.decimal(12)),
        }
    }
}

/// Rounds a non-negative rational to `digits` significant digits (half up).
/// Plain notation for magnitudes in `[1e-4, 1e12)`, scientific otherwise.
pub fn decimal_string(value: &BigRational, digits: usize) -> String {
    assert!(digits >= 1);
    if value.is_zero() {
        return "0".to_string();
    }
    assert!(!value.is_negative(), "negative count");
    let ten = BigInt::from(10u8);
    // decimal exponent estimate from bit lengths, then corrected exactly
    let bits = value.numer().bits() as i64 - value.denom().bits() as i64;
    let mut exp10 = (bits as f64 * std::f64::consts::LOG10_2).floor() as i64;
    let pow10 = |e: i64| -> BigRational {
        let p = BigRational::from_integer(ten.pow(e.unsigned_abs() as u32));
        if e < 0 {
            p.recip()
        } else {
            p
        }
    };
    while pow10(exp10) > *value {
        exp10 -= 1;
    }
    while pow10(exp10 + 1) <= *value {
        exp10 += 1;
    }
    let shift = digits as i64 - 1 - exp10;
    let scaled = value * pow10(shift);
    let half = BigRational::new(BigInt::one(), BigInt::from(2u8));
    let mut mantissa = (scaled + half).floor().to_integer();
    if mantissa >= ten.pow(digits as u32) {
        mantissa /= &ten;
        exp10 += 1;
    }
    let text = mantissa.to_string();
    if (-4..12).contains(&exp10) {
        if exp10 >= 0 {
            let point = exp10 as usize + 1;
            if point >= text.len() {
                format!("{text}{}", "0".repeat(point - text.len()))
            } else {
                format!("{}.{}", &text[..point], &text[point..])
            }
        } else {
            format!("0.{}{}", "0".repeat((-exp10 - 1) as usize), text)
        }
    } else {
        let (lead, rest) = text.split_at(1);
        if rest.is_empty() {
            format!("{lead}e{exp10}")
        } else {
            format!("{lead}.{rest}e{exp10}")
        }
    }
}
