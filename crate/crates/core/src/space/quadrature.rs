//! Gauss rules on the reference triangle and the unit interval.

/// Rule on the reference triangle {(ξ, η): ξ, η ≥ 0, ξ + η ≤ 1}. Points are
/// barycentric `(1 - ξ - η, ξ, η)`; weights sum to the reference area 1/2.
#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// Rule on [0, 1]; weights sum to 1. Exact to degree `2 * len - 1`.
#[derive(Clone, Debug)]
pub struct EdgeRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl EdgeRule {
    pub fn gauss(npts: usize) -> Self {
        let (x, w) = gauss_legendre(npts);
        Self {
            points: x.iter().map(|&t| 0.5 * (t + 1.0)).collect(),
            weights: w.iter().map(|&w| 0.5 * w).collect(),
        }
    }

    /// Smallest Gauss rule exact for polynomials of the given degree.
    pub fn for_degree(degree: usize) -> Self {
        Self::gauss(degree / 2 + 1)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn degree(&self) -> usize {
        2 * self.points.len() - 1
    }
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss rule needs at least one point");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            // three-term recurrence: p1 = P_n(z), p0 = P_{n-1}(z)
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

impl TriangleRule {
    /// Rule exact for bivariate polynomials of total degree `degree`.
    ///
    /// Degrees up to 5 use symmetric rules with interior points and positive
    /// weights; higher degrees fall back to a collapsed Gauss product rule.
    pub fn new(degree: usize) -> Self {
        match degree {
            0 | 1 => Self {
                points: vec![[1.0 / 3.0; 3]],
                weights: vec![0.5],
                degree: 1,
            },
            2 => {
                let (a, b) = (2.0 / 3.0, 1.0 / 6.0);
                Self {
                    points: vec![[a, b, b], [b, a, b], [b, b, a]],
                    weights: vec![1.0 / 6.0; 3],
                    degree: 2,
                }
            }
            3..=5 => {
                let mut points = vec![[1.0 / 3.0; 3]];
                let mut weights = vec![0.225 / 2.0];
                let orbits = [
                    (0.059_715_871_789_770, 0.470_142_064_105_115, 0.132_394_152_788_506),
                    (0.797_426_985_353_087, 0.101_286_507_323_456, 0.125_939_180_544_827),
                ];
                for (a, b, w) in orbits {
                    for p in [[a, b, b], [b, a, b], [b, b, a]] {
                        points.push(p);
                        weights.push(w / 2.0);
                    }
                }
                Self {
                    points,
                    weights,
                    degree: 5,
                }
            }
            _ => Self::collapsed(degree),
        }
    }

    fn collapsed(degree: usize) -> Self {
        let n = (degree + 2).div_ceil(2);
        let (x, w) = gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (&xu, &wu) in x.iter().zip(&w) {
            let u = 0.5 * (xu + 1.0);
            for (&xv, &wv) in x.iter().zip(&w) {
                let v = 0.5 * (xv + 1.0);
                let xi = u;
                let eta = v * (1.0 - u);
                points.push([1.0 - xi - eta, xi, eta]);
                weights.push(0.25 * wu * wv * (1.0 - u));
            }
        }
        Self {
            points,
            weights,
            degree,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
