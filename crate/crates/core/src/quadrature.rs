//! Quadrature helpers on uniform grids.

/// Composite Simpson weights for `n` uniform intervals of width `h`.
/// An odd interval count closes with the 3/8 rule on the last three intervals.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n >= 2, "Simpson needs at least two intervals");
    let mut w = vec![0.0; n + 1];
    let simpson_end = if n.is_multiple_of(2) { n } else { n - 3 };
    let mut i = 0;
    while i < simpson_end {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
        i += 2;
    }
    if n % 2 == 1 {
        let s = n - 3;
        w[s] += 3.0 * h / 8.0;
        w[s + 1] += 9.0 * h / 8.0;
        w[s + 2] += 9.0 * h / 8.0;
        w[s + 3] += 3.0 * h / 8.0;
    }
    w
}

pub fn simpson(samples: &[f64], h: f64) -> f64 {
    simpson_weights(samples.len() - 1, h)
        .iter()
        .zip(samples)
        .map(|(w, f)| w * f)
        .sum()
}

/// Running integral ∫_{t_0}^{t} f of node samples, fourth order in h.
///
/// Each cell is integrated with the cubic through the four nearest nodes, so
/// partial cells (arbitrary `t`) keep the same order.
#[derive(Debug, Clone)]
pub struct CumulativeIntegral<'a> {
    t0: f64,
    h: f64,
    samples: &'a [f64],
    cum: Vec<f64>,
}

impl<'a> CumulativeIntegral<'a> {
    pub fn new(samples: &'a [f64], t0: f64, h: f64) -> Self {
        let n = samples.len() - 1;
        assert!(n >= 3, "cumulative integral needs at least three intervals");
        let mut cum = vec![0.0; n + 1];
        for i in 0..n {
            cum[i + 1] = cum[i] + cell_integral(samples, i, 1.0) * h;
        }
        Self {
            t0,
            h,
            samples,
            cum,
        }
    }

    pub fn total(&self) -> f64 {
        self.cum[self.cum.len() - 1]
    }

    pub fn at_node(&self, i: usize) -> f64 {
        self.cum[i]
    }

    /// ∫_{t_0}^{t} f, with `t` clamped to the grid.
    pub fn at(&self, t: f64) -> f64 {
        let n = self.cum.len() - 1;
        let x = ((t - self.t0) / self.h).clamp(0.0, n as f64);
        let i = (x.floor() as usize).min(n - 1);
        let s = x - i as f64;
        if s == 0.0 {
            return self.cum[i];
        }
        self.cum[i] + cell_integral(self.samples, i, s) * self.h
    }

    /// ∫_{t}^{t_end} f.
    pub fn from(&self, t: f64) -> f64 {
        self.total() - self.at(t)
    }
}

/// ∫ over [i, i+s] (in units of h) of the cubic through four nodes around cell i.
fn cell_integral(f: &[f64], i: usize, s: f64) -> f64 {
    let n = f.len() - 1;
    let start = if i == 0 {
        0
    } else if i + 2 > n {
        n - 3
    } else {
        i - 1
    };
    let u = s;
    let mut acc = 0.0;
    for k in 0..4 {
        let nodes: [f64; 4] = std::array::from_fn(|m| (start + m) as f64 - i as f64);
        acc += f[start + k] * lagrange_basis_integral(&nodes, k, u);
    }
    acc
}

/// ∫_0^u ℓ_k(x) dx for the Lagrange basis over four nodes.
fn lagrange_basis_integral(nodes: &[f64; 4], k: usize, u: f64) -> f64 {
    // Expand Π_{m≠k}(x − x_m) as c0 + c1 x + c2 x² + x³.
    let others: Vec<f64> = (0..4).filter(|&m| m != k).map(|m| nodes[m]).collect();
    let (a, b, c) = (others[0], others[1], others[2]);
    let c2 = -(a + b + c);
    let c1 = a * b + a * c + b * c;
    let c0 = -a * b * c;
    let denom: f64 = others.iter().map(|&x| nodes[k] - x).product();
    let integral = c0 * u + c1 * u * u / 2.0 + c2 * u.powi(3) / 3.0 + u.powi(4) / 4.0;
    integral / denom
}

/// Cubic Hermite interpolation on one cell: values `y0, y1`, slopes `d0, d1`,
/// cell width `h`, local coordinate `s ∈ [0, 1]`.
pub fn hermite(y0: f64, d0: f64, y1: f64, d1: f64, h: f64, s: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}
