use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub const WEI_PER_ETHER: u128 = 1_000_000_000_000_000_000;
const ETHER_DECIMALS: usize = 18;

/// An amount of currency in wei, the smallest indivisible unit.
///
/// All ledger accounting happens on this integer type. Decimal ether strings
/// only exist at the API boundary (see [`Wei::parse_ether`] and
/// [`Wei::to_ether_string`]).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Wei(u128);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AmountError {
    #[error("invalid ether amount {0:?}")]
    Malformed(String),
    #[error("ether amount {0:?} has more than 18 decimal places")]
    TooPrecise(String),
    #[error("ether amount {0:?} does not fit in 128 bits of wei")]
    TooLarge(String),
}

impl Wei {
    pub const ZERO: Wei = Wei(0);

    pub const fn new(wei: u128) -> Self {
        Wei(wei)
    }

    pub const fn get(self) -> u128 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Whole ether, panicking on overflow. Meant for constants and tests.
    pub const fn ether(whole: u128) -> Self {
        Wei(whole * WEI_PER_ETHER)
    }

    pub fn checked_add(self, other: Wei) -> Option<Wei> {
        self.0.checked_add(other.0).map(Wei)
    }

    pub fn checked_sub(self, other: Wei) -> Option<Wei> {
        self.0.checked_sub(other.0).map(Wei)
    }

    /// Parses a plain decimal ether string such as `"3.5"` or `"2"`.
    ///
    /// Signs, exponents, whitespace and more than 18 fractional digits are
    /// rejected; the conversion is exact.
    pub fn parse_ether(s: &str) -> Result<Wei, AmountError> {
        let malformed = || AmountError::Malformed(s.to_string());
        let (whole, frac) = match s.split_once('.') {
            Some((w, f)) => (w, Some(f)),
            None => (s, None),
        };
        if whole.is_empty() || !whole.bytes().all(|b| b.is_ascii_digit()) {
            return Err(malformed());
        }
        let frac = match frac {
            Some(f) if f.is_empty() || !f.bytes().all(|b| b.is_ascii_digit()) => {
                return Err(malformed())
            }
            Some(f) if f.len() > ETHER_DECIMALS => return Err(AmountError::TooPrecise(s.to_string())),
            Some(f) => f,
            None => "",
        };
        let too_large = || AmountError::TooLarge(s.to_string());
        let whole: u128 = whole.parse().map_err(|_| too_large())?;
        let mut frac_wei: u128 = 0;
        if !frac.is_empty() {
            frac_wei = frac.parse().map_err(|_| malformed())?;
            frac_wei *= 10u128.pow((ETHER_DECIMALS - frac.len()) as u32);
        }
        whole
            .checked_mul(WEI_PER_ETHER)
            .and_then(|w| w.checked_add(frac_wei))
            .map(Wei)
            .ok_or_else(too_large)
    }

    /// Renders as decimal ether with at least one fractional digit: `"3.5"`, `"2.0"`.
    pub fn to_ether_string(self) -> String {
        let whole = self.0 / WEI_PER_ETHER;
        let frac = self.0 % WEI_PER_ETHER;
        if frac == 0 {
            return format!("{whole}.0");
        }
        let digits = format!("{frac:018}");
        format!("{whole}.{}", digits.trim_end_matches('0'))
    }
}

impl fmt::Display for Wei {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Sums amounts, returning `None` on overflow.
pub fn checked_sum<I: IntoIterator<Item = Wei>>(amounts: I) -> Option<Wei> {
    amounts.into_iter().try_fold(Wei::ZERO, Wei::checked_add)
}

// Wei travels as a decimal integer string so that JSON consumers never
// round it through a float.
impl Serialize for Wei {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Wei {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(serde::de::Error::custom(format!("invalid wei amount {s:?}")));
        }
        s.parse().map(Wei).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_table_amounts() {
        assert_eq!(Wei::parse_ether("3.5").unwrap().get(), 3_500_000_000_000_000_000);
        assert_eq!(Wei::parse_ether("2.0").unwrap(), Wei::ether(2));
        assert_eq!(Wei::parse_ether("2").unwrap(), Wei::ether(2));
        assert_eq!(Wei::parse_ether("0.000000000000000001").unwrap().get(), 1);
    }

    #[test]
    fn rejects_bad_amounts() {
        for bad in ["", ".5", "3.", "-1", "+1", "1e3", " 1", "1.2.3", "abc"] {
            assert!(matches!(Wei::parse_ether(bad), Err(AmountError::Malformed(_))), "{bad}");
        }
        assert!(matches!(
            Wei::parse_ether("0.0000000000000000001"),
            Err(AmountError::TooPrecise(_))
        ));
        assert!(matches!(
            Wei::parse_ether("999999999999999999999999"),
            Err(AmountError::TooLarge(_))
        ));
    }

    #[test]
    fn renders_ether() {
        assert_eq!(Wei::ether(2).to_ether_string(), "2.0");
        assert_eq!(Wei::parse_ether("3.50").unwrap().to_ether_string(), "3.5");
        assert_eq!(Wei::new(1).to_ether_string(), "0.000000000000000001");
        assert_eq!(Wei::ZERO.to_ether_string(), "0.0");
    }

    #[test]
    fn arithmetic_rejects_overflow() {
        assert_eq!(Wei::new(u128::MAX).checked_add(Wei::new(1)), None);
        assert_eq!(Wei::ZERO.checked_sub(Wei::new(1)), None);
    }

    proptest! {
        #[test]
        fn ether_string_round_trips(wei in 0u128..=u128::MAX / 2) {
            let w = Wei::new(wei);
            prop_assert_eq!(Wei::parse_ether(&w.to_ether_string()).unwrap(), w);
        }
    }
}
