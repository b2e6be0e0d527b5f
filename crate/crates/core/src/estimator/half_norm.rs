//! Sobolev-Slobodeckij norm of order 1/2 for piecewise polynomials on a
//! segment, parametrized by arc length.

use crate::space::quadrature::gauss_legendre;

/// Polynomial piece `Σ_k coeffs[k] t^k` on `[start, end]`, with `t` the arc
/// length measured from the start of the segment.
#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub start: f64,
    pub end: f64,
    pub coeffs: Vec<f64>,
}

impl Piece {
    pub fn new(start: f64, end: f64, coeffs: Vec<f64>) -> Self {
        Self { start, end, coeffs }
    }

    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// (p(x) - p(y)) / (x - y), a polynomial in x and y.
    fn difference_quotient(&self, x: f64, y: f64) -> f64 {
        let mut sum = 0.0;
        for (k, c) in self.coeffs.iter().enumerate().skip(1) {
            // Σ_{i+j=k-1} x^i y^j
            let mut term = 0.0;
            let mut xi = 1.0;
            for i in 0..k {
                term += xi * y.powi((k - 1 - i) as i32);
                xi *= x;
            }
            sum += c * term;
        }
        sum
    }
}

/// Scaled Gauss rule on `[a, b]`.
fn rule(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    x.iter().zip(&w).map(|(x, w)| (a + half * (x + 1.0), half * w)).collect()
}

pub fn l2_norm_sq(pieces: &[Piece]) -> f64 {
    pieces
        .iter()
        .map(|p| {
            rule(p.degree() + 1, p.start, p.end)
                .iter()
                .map(|&(t, w)| w * p.eval(t).powi(2))
                .sum::<f64>()
        })
        .sum()
}

fn same_piece(p: &Piece) -> f64 {
    let r = rule(p.degree().max(1), p.start, p.end);
    let mut sum = 0.0;
    for &(x, wx) in &r {
        for &(y, wy) in &r {
            sum += wx * wy * p.difference_quotient(x, y).powi(2);
        }
    }
    sum
}

/// Graded subintervals of [0, 1] towards 0 with first width `r`.
fn graded(r: f64) -> Vec<(f64, f64)> {
    if r >= 1.0 {
        return vec![(0.0, 1.0)];
    }
    let mut out = vec![(0.0, r)];
    let mut a = r;
    while a < 1.0 {
        let b = (3.0 * a).min(1.0);
        out.push((a, b));
        a = b;
    }
    out
}

/// Pieces `left = [p - s_len, p]` and `right = [p, p + t_len]` meeting at `p`.
/// Duffy splitting of the square at its singular corner.
fn adjacent(left: &Piece, right: &Piece) -> f64 {
    let p = left.end;
    let (sl, tl) = (left.len(), right.len());
    if sl <= 0.0 || tl <= 0.0 {
        return 0.0;
    }
    let jump = right.eval(p) - left.eval(p);
    let scale = left.eval(p).abs().max(right.eval(p).abs()).max(1.0);
    if jump.abs() > 1e-12 * scale {
        return f64::INFINITY;
    }
    let deg = left.degree().max(right.degree());
    let ur = rule(deg + 1, 0.0, 1.0);
    let d = |s: f64, t: f64| (right.eval(p + t) - left.eval(p - s)) / (s + t);
    let mut sum = 0.0;
    // region s/S ≥ t/T: s = S u, t = T u w
    for (a, b) in graded(sl / tl) {
        for (w, ww) in rule(12, a, b) {
            for &(u, wu) in &ur {
                sum += ww * wu * sl * tl * u * d(sl * u, tl * u * w).powi(2);
            }
        }
    }
    // region t/T ≥ s/S: t = T u, s = S u w
    for (a, b) in graded(tl / sl) {
        for (w, ww) in rule(12, a, b) {
            for &(u, wu) in &ur {
                sum += ww * wu * sl * tl * u * d(sl * u * w, tl * u).powi(2);
            }
        }
    }
    sum
}

/// Double integral over `[a0, a1] x [b0, b1]` with `a1 < b0`, subdividing
/// near the closest corner.
fn separated(p: &Piece, q: &Piece, a: (f64, f64), b: (f64, f64)) -> f64 {
    let dist = b.0 - a.1;
    let (la, lb) = (a.1 - a.0, b.1 - b.0);
    if dist < la.max(lb) {
        if la >= lb {
            let m = 0.5 * (a.0 + a.1);
            return separated(p, q, (a.0, m), b) + separated(p, q, (m, a.1), b);
        }
        let m = 0.5 * (b.0 + b.1);
        return separated(p, q, a, (b.0, m)) + separated(p, q, a, (m, b.1));
    }
    let ra = rule(12, a.0, a.1);
    let rb = rule(12, b.0, b.1);
    let mut sum = 0.0;
    for &(x, wx) in &ra {
        let vx = p.eval(x);
        for &(y, wy) in &rb {
            sum += wx * wy * ((vx - q.eval(y)) / (x - y)).powi(2);
        }
    }
    sum
}

/// `∬ (v(x) - v(y))² / (x - y)²` over the segment. Pieces must be sorted,
/// contiguous and `v` continuous at their junctions; a jump gives infinity.
pub fn seminorm_sq(pieces: &[Piece]) -> f64 {
    let mut sum = 0.0;
    for (i, p) in pieces.iter().enumerate() {
        sum += same_piece(p);
        for (j, q) in pieces.iter().enumerate().skip(i + 1) {
            let cross = if j == i + 1 {
                adjacent(p, q)
            } else {
                separated(p, q, (p.start, p.end), (q.start, q.end))
            };
            sum += 2.0 * cross;
        }
    }
    sum
}

/// Squared H^{1/2} norm: L² part plus the Slobodeckij seminorm.
pub fn h_half_norm_edge(pieces: &[Piece]) -> f64 {
    l2_norm_sq(pieces) + seminorm_sq(pieces)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_linear() {
        let c = [Piece::new(0.0, 1.0, vec![2.5])];
        assert!(seminorm_sq(&c).abs() < 1e-15);
        assert!((h_half_norm_edge(&c) - 6.25).abs() < 1e-13);

        let lin = [Piece::new(0.0, 1.0, vec![0.0, 1.0])];
        assert!((seminorm_sq(&lin) - 1.0).abs() < 1e-13);
        assert!((h_half_norm_edge(&lin) - 4.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn splitting_does_not_change_value() {
        let whole = [Piece::new(0.0, 1.0, vec![0.3, -1.0, 2.0])];
        let split = [
            Piece::new(0.0, 0.01, vec![0.3, -1.0, 2.0]),
            Piece::new(0.01, 0.6, vec![0.3, -1.0, 2.0]),
            Piece::new(0.6, 0.6001, vec![0.3, -1.0, 2.0]),
            Piece::new(0.6001, 1.0, vec![0.3, -1.0, 2.0]),
        ];
        let a = seminorm_sq(&whole);
        let b = seminorm_sq(&split);
        assert!((a - b).abs() < 1e-11 * a, "{a} {b}");
    }

    #[test]
    fn hinge_closed_form() {
        let v = [Piece::new(0.0, 0.5, vec![0.0]), Piece::new(0.5, 1.0, vec![-0.5, 1.0])];
        let exact = 0.75 - 0.5 * 2f64.ln();
        assert!((seminorm_sq(&v) - exact).abs() < 1e-12);
    }

    #[test]
    fn jump_is_infinite() {
        let v = [Piece::new(0.0, 0.5, vec![0.0]), Piece::new(0.5, 1.0, vec![1.0])];
        assert!(seminorm_sq(&v).is_infinite());
    }
}
