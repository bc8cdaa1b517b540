use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("separation type needs at least one weight")]
    Empty,
    #[error("weights must be positive integers")]
    ZeroWeight,
    #[error("cannot parse weight {0:?}")]
    Parse(String),
}

/// The multiset `{w1, .., wt}` of part sizes a separation must handle.
///
/// Weights are kept sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct SeparationType {
    weights: Vec<usize>,
}

impl SeparationType {
    pub fn new(weights: impl Into<Vec<usize>>) -> Result<Self, TypeError> {
        let mut weights = weights.into();
        if weights.is_empty() {
            return Err(TypeError::Empty);
        }
        if weights.contains(&0) {
            return Err(TypeError::ZeroWeight);
        }
        weights.sort_unstable();
        Ok(SeparationType { weights })
    }

    /// `t` copies of weight 1: the perfect-hash type.
    pub fn perfect(t: usize) -> Result<Self, TypeError> {
        Self::new(vec![1; t])
    }

    pub fn weights(&self) -> &[usize] {
        &self.weights
    }

    pub fn t(&self) -> usize {
        self.weights.len()
    }

    pub fn u(&self) -> usize {
        self.weights.iter().sum()
    }

    pub fn min_weight(&self) -> usize {
        self.weights[0]
    }

    pub fn is_equal_weight(&self) -> bool {
        self.weights.iter().all(|&w| w == self.weights[0])
    }

    /// Decrements the weight at `index`, dropping it when it reaches zero.
    ///
    /// Returns `None` when nothing is left.
    pub fn decremented(&self, index: usize) -> Option<SeparationType> {
        let mut weights = self.weights.clone();
        weights[index] -= 1;
        if weights[index] == 0 {
            weights.remove(index);
        }
        SeparationType::new(weights).ok()
    }
}

impl TryFrom<Vec<usize>> for SeparationType {
    type Error = TypeError;

    fn try_from(value: Vec<usize>) -> Result<Self, Self::Error> {
        SeparationType::new(value)
    }
}

impl From<SeparationType> for Vec<usize> {
    fn from(value: SeparationType) -> Self {
        value.weights
    }
}

/// Parses `"w1,w2,..,wt"`.
impl FromStr for SeparationType {
    type Err = TypeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let weights = s
            .split(',')
            .map(|w| {
                w.trim()
                    .parse::<usize>()
                    .map_err(|_| TypeError::Parse(w.trim().to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        SeparationType::new(weights)
    }
}

impl fmt::Display for SeparationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.weights.iter().map(usize::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_and_derived() {
        let w: SeparationType = "3, 1,2".parse().unwrap();
        assert_eq!(w.weights(), &[1, 2, 3]);
        assert_eq!((w.t(), w.u()), (3, 6));
        assert_eq!(w.to_string(), "{1,2,3}");
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(SeparationType::new(vec![]), Err(TypeError::Empty));
        assert_eq!(SeparationType::new(vec![1, 0]), Err(TypeError::ZeroWeight));
        assert!("1,x".parse::<SeparationType>().is_err());
    }

    #[test]
    fn decrement_drops_zero() {
        let w = SeparationType::new(vec![1, 2]).unwrap();
        assert_eq!(w.decremented(0).unwrap().weights(), &[2]);
        assert_eq!(w.decremented(1).unwrap().weights(), &[1, 1]);
        assert_eq!(SeparationType::new(vec![1]).unwrap().decremented(0), None);
    }
}
