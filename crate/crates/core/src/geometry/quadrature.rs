use std::sync::OnceLock;

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
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

const PANEL_NODES: usize = 16;

/// Composite Gauss–Legendre rule on [0, 1] with `panels` equal panels.
#[derive(Debug)]
pub struct CompositeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CompositeRule {
    fn new(panels: usize) -> Self {
        static BASE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
        let (x, w) = BASE.get_or_init(|| gauss_legendre(PANEL_NODES));
        let h = 1.0 / panels as f64;
        let mut nodes = Vec::with_capacity(panels * PANEL_NODES);
        let mut weights = Vec::with_capacity(panels * PANEL_NODES);
        for p in 0..panels {
            let a = p as f64 * h;
            for (xi, wi) in x.iter().zip(w) {
                nodes.push(a + 0.5 * h * (xi + 1.0));
                weights.push(0.5 * h * wi);
            }
        }
        CompositeRule { nodes, weights }
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(*x);
        }
        s
    }
}

/// Rule with `n` total nodes; `n` must be a multiple of 16.
pub fn rule(n: usize) -> &'static CompositeRule {
    static R64: OnceLock<CompositeRule> = OnceLock::new();
    static R256: OnceLock<CompositeRule> = OnceLock::new();
    match n {
        64 => R64.get_or_init(|| CompositeRule::new(4)),
        256 => R256.get_or_init(|| CompositeRule::new(16)),
        _ => panic!("unsupported rule size {n}"),
    }
}

/// Rule with an arbitrary number of 16-node panels (not cached).
pub fn rule_with_panels(panels: usize) -> CompositeRule {
    CompositeRule::new(panels)
}
