//! Gauss-Legendre rules and panel compositions.

/// `n`-point Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A composite rule: nodes and weights on some interval.
#[derive(Clone, Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// Gauss-Legendre with `points` nodes on each panel `[b_i, b_{i+1}]`.
    pub fn from_breakpoints(breaks: &[f64], points: usize) -> Self {
        let (x, w) = gauss_legendre(points);
        let mut nodes = Vec::with_capacity(points * breaks.len());
        let mut weights = Vec::with_capacity(points * breaks.len());
        for pair in breaks.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let h = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(mid + h * xi);
                weights.push(h * wi);
            }
        }
        Self { nodes, weights }
    }

    /// Rule on `[a, b]` with `panels` uniform panels, plus geometric refinement
    /// towards each endpoint listed in `refine` (`0` for `a`, `1` for `b`).
    pub fn graded(a: f64, b: f64, panels: usize, points: usize, refine: &[usize], levels: usize) -> Self {
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        let mut breaks: Vec<f64> = (0..=panels).map(|i| a + h * i as f64).collect();
        let ratio: f64 = 0.15;
        if refine.contains(&0) {
            let mut extra: Vec<f64> = (1..=levels).map(|j| a + h * ratio.powi(j as i32)).collect();
            extra.reverse();
            breaks.splice(1..1, extra);
        }
        if refine.contains(&1) {
            let len = breaks.len();
            let extra: Vec<f64> = (1..=levels).map(|j| b - h * ratio.powi(j as i32)).collect();
            breaks.splice(len - 1..len - 1, extra);
        }
        Self::from_breakpoints(&breaks, points)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }
}
