use crate::error::{Error, Result};
use crate::scalar::Real;

/// Piecewise-constant potential on the unit edge `[0, 1]`.
///
/// `values[k]` holds on `[breakpoints[k], breakpoints[k + 1])`; the last
/// piece is closed at 1.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewisePotential<T> {
    breakpoints: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> PiecewisePotential<T> {
    pub fn new(breakpoints: Vec<T>, values: Vec<T>) -> Result<Self> {
        let problems = Self::check(&breakpoints, &values);
        if problems.is_empty() {
            Ok(Self { breakpoints, values })
        } else {
            Err(Error::InvalidGraph(problems))
        }
    }

    pub fn constant(value: T) -> Self {
        Self {
            breakpoints: vec![T::zero(), T::one()],
            values: vec![value],
        }
    }

    pub fn zero() -> Self {
        Self::constant(T::zero())
    }

    pub(crate) fn check(breakpoints: &[T], values: &[T]) -> Vec<String> {
        let mut out = Vec::new();
        if breakpoints.len() < 2 {
            out.push("potential needs at least two breakpoints".to_string());
            return out;
        }
        if breakpoints[0] != T::zero() || *breakpoints.last().unwrap() != T::one() {
            out.push("potential breakpoints must start at 0 and end at 1".to_string());
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            out.push("potential breakpoints must be strictly ascending".to_string());
        }
        if values.len() + 1 != breakpoints.len() {
            out.push(format!(
                "potential has {} values for {} pieces",
                values.len(),
                breakpoints.len() - 1
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            out.push("potential values must be finite".to_string());
        }
        out
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Value of the piece containing `x`; right-continuous at breakpoints.
    pub fn eval(&self, x: T) -> T {
        let k = self.breakpoints[1..self.breakpoints.len() - 1]
            .iter()
            .take_while(|&&b| b <= x)
            .count();
        self.values[k]
    }

    /// Pieces as `(left, right, value)`.
    pub fn pieces(&self) -> impl Iterator<Item = (T, T, T)> + '_ {
        self.breakpoints
            .windows(2)
            .zip(&self.values)
            .map(|(w, &v)| (w[0], w[1], v))
    }

    pub fn is_constant(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }

    pub fn shifted(&self, c: T) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|&v| v + c).collect(),
        }
    }

    /// Potential seen from the opposite orientation, `x ↦ 1 − x`.
    pub fn reversed(&self) -> Self {
        Self {
            breakpoints: self.breakpoints.iter().rev().map(|&b| T::one() - b).collect(),
            values: self.values.iter().rev().copied().collect(),
        }
    }

    pub fn sup_norm(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_is_right_continuous() {
        let q = PiecewisePotential::new(vec![0.0, 0.25, 1.0], vec![1.0, 5.0]).unwrap();
        assert_eq!(q.eval(0.0), 1.0);
        assert_eq!(q.eval(0.2499), 1.0);
        assert_eq!(q.eval(0.25), 5.0);
        assert_eq!(q.eval(1.0), 5.0);
    }

    #[test]
    fn rejects_bad_breakpoints() {
        assert!(PiecewisePotential::new(vec![0.0, 0.5], vec![1.0]).is_err());
        assert!(PiecewisePotential::new(vec![0.0, 0.6, 0.5, 1.0], vec![1.0, 2.0, 3.0]).is_err());
        assert!(PiecewisePotential::new(vec![0.0, 1.0], vec![f64::NAN]).is_err());
        assert!(PiecewisePotential::new(vec![0.0, 1.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn reversal_mirrors_pieces() {
        let q = PiecewisePotential::new(vec![0.0, 0.25, 1.0], vec![1.0, 5.0]).unwrap();
        let r = q.reversed();
        assert_eq!(r.breakpoints(), &[0.0, 0.75, 1.0]);
        assert_eq!(r.values(), &[5.0, 1.0]);
        assert_eq!(r.reversed(), q);
    }
}
