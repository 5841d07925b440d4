//! Five-point finite-difference stencils on uniform samples. Interior
//! points use the central stencil; the two points at each end use one-sided
//! or offset five-point stencils.

use crate::model::ComplexVector;

/// Weights (times `12 h`) for `df/dt` at offset `0..5` into a window whose
/// evaluation point is `at` (0, 1 or 2).
const FIRST: [[f64; 5]; 3] = [
    [-25.0, 48.0, -36.0, 16.0, -3.0],
    [-3.0, -10.0, 18.0, -6.0, 1.0],
    [1.0, -8.0, 0.0, 8.0, -1.0],
];

/// Weights (times `12 h²`) for `d²f/dt²`.
const SECOND: [[f64; 5]; 3] = [
    [35.0, -104.0, 114.0, -56.0, 11.0],
    [11.0, -20.0, 6.0, 4.0, -1.0],
    [-1.0, 16.0, -30.0, 16.0, -1.0],
];

pub type Rule = fn(&[ComplexVector], usize, f64) -> ComplexVector;

fn apply(f: &[ComplexVector], j: usize, table: &[[f64; 5]; 3], scale: f64, odd: bool) -> ComplexVector {
    let n = f.len();
    assert!(n >= 5, "five-point stencil needs at least 5 samples");
    let (start, row, mirrored) = if j < 2 {
        (0, j, false)
    } else if j + 2 >= n {
        (n - 5, n - 1 - j, true)
    } else {
        (j - 2, 2, false)
    };
    // weights sum to zero, so differencing against f[j] keeps constants exact
    let centre = f[j];
    let mut acc = ComplexVector::zeros(f[0].dim());
    for (k, &w) in table[row].iter().enumerate() {
        let idx = if mirrored { start + 4 - k } else { start + k };
        acc += (f[idx] - centre) * w;
    }
    // reflecting time flips the sign of odd derivatives
    let sign = if mirrored && odd { -1.0 } else { 1.0 };
    acc * (sign * scale)
}

pub fn first(f: &[ComplexVector], j: usize, h: f64) -> ComplexVector {
    apply(f, j, &FIRST, 1.0 / (12.0 * h), true)
}

pub fn second(f: &[ComplexVector], j: usize, h: f64) -> ComplexVector {
    apply(f, j, &SECOND, 1.0 / (12.0 * h * h), false)
}

pub fn differentiate(f: &[ComplexVector], h: f64, rule: Rule) -> Vec<ComplexVector> {
    (0..f.len()).map(|j| rule(f, j, h)).collect()
}
