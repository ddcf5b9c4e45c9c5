use serde::{Deserialize, Serialize};

/// Piecewise-linear graphical function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    /// Knots as `[x, y]` pairs with strictly increasing `x`.
    pub points: Vec<[f64; 2]>,
}

impl Table {
    pub fn new(name: impl Into<String>, points: Vec<[f64; 2]>) -> Self {
        Self {
            name: name.into(),
            points,
        }
    }

    /// Checks the knot invariants, returning a reason on failure.
    pub fn validate(&self) -> Result<(), String> {
        if self.points.len() < 2 {
            return Err(format!("needs at least 2 knots, has {}", self.points.len()));
        }
        if self.points.iter().flatten().any(|v| !v.is_finite()) {
            return Err("knots must be finite".into());
        }
        if self.points.windows(2).any(|w| w[1][0] <= w[0][0]) {
            return Err("knot x values must be strictly increasing".into());
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        lookup_eval(&self.points, x)
    }
}

/// Linear interpolation between knots, clamped to the end values outside
/// the knot range.
pub fn lookup_eval(points: &[[f64; 2]], x: f64) -> f64 {
    let first = points[0];
    let last = points[points.len() - 1];
    if x <= first[0] {
        return first[1];
    }
    if x >= last[0] {
        return last[1];
    }
    // first index whose x exceeds the argument; always in 1..len
    let hi = points.partition_point(|p| p[0] <= x);
    let [x0, y0] = points[hi - 1];
    let [x1, y1] = points[hi];
    if x == x0 {
        return y0;
    }
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}
