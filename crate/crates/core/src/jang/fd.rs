//! Finite-difference weights on arbitrary nodes.

/// Weights for derivatives `0..=m` at `x0` from values at `nodes`
/// (Fornberg's recursion). Returns `w[k][j]` for derivative `k`, node `j`.
pub fn fornberg_weights(x0: f64, nodes: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Fourth-order first and second derivative stencils on a uniform grid of
/// `n ≥ 6` points: for each node, the first node index of the stencil and
/// the weights for `f'` and `f''`.
#[derive(Debug, Clone)]
pub struct UniformStencils {
    pub start: Vec<usize>,
    pub d1: Vec<Vec<f64>>,
    pub d2: Vec<Vec<f64>>,
}

impl UniformStencils {
    pub fn new(x: &[f64]) -> UniformStencils {
        let n = x.len();
        assert!(n >= 6, "need at least six nodes");
        let mut start = Vec::with_capacity(n);
        let mut d1 = Vec::with_capacity(n);
        let mut d2 = Vec::with_capacity(n);
        for i in 0..n {
            // central five points inside, six one-sided points near the ends
            let (s, len) = if i >= 2 && i + 2 < n {
                (i - 2, 5)
            } else if i < 2 {
                (0, 6)
            } else {
                (n - 6, 6)
            };
            let w = fornberg_weights(x[i], &x[s..s + len], 2);
            start.push(s);
            d1.push(w[1].clone());
            d2.push(w[2].clone());
        }
        UniformStencils { start, d1, d2 }
    }

    // differences against f[i] so that constants give exactly zero
    pub fn first(&self, f: &[f64], i: usize) -> f64 {
        let s = self.start[i];
        self.d1[i].iter().enumerate().map(|(k, w)| w * (f[s + k] - f[i])).sum()
    }

    pub fn second(&self, f: &[f64], i: usize) -> f64 {
        let s = self.start[i];
        self.d2[i].iter().enumerate().map(|(k, w)| w * (f[s + k] - f[i])).sum()
    }
}
