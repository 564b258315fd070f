//! Quadrature rules on `(0, 1)` against Beta-type weights.

use std::collections::BinaryHeap;

use nalgebra::{DMatrix, SymmetricEigen};

/// Nodes and weights of an `m`-point Gauss rule for the Beta(p, q) probability
/// measure `s^{p-1} (1-s)^{q-1} / B(p, q) ds` on `(0, 1)`.
///
/// Nodes are returned as `(s, 1 - s)` pairs so callers near `s = 1` do not lose
/// the complement to cancellation. Weights sum to one.
#[derive(Debug, Clone)]
pub struct BetaGaussRule {
    pub nodes: Vec<(f64, f64)>,
    pub weights: Vec<f64>,
}

impl BetaGaussRule {
    /// Golub-Welsch on the Jacobi matrix with `α = q - 1` on `(1 - y)` and
    /// `β = p - 1` on `(1 + y)`, `y = 2s - 1`.
    pub fn new(m: usize, p: f64, q: f64) -> Self {
        assert!(m >= 1 && p > 0.0 && q > 0.0);
        let alpha = q - 1.0;
        let beta = p - 1.0;
        let ab = alpha + beta;
        let mut jac = DMatrix::<f64>::zeros(m, m);
        jac[(0, 0)] = (beta - alpha) / (ab + 2.0);
        for k in 1..m {
            let kf = k as f64;
            let s = 2.0 * kf + ab;
            jac[(k, k)] = (beta - alpha) * (beta + alpha) / (s * (s + 2.0));
            let b = if k == 1 {
                4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0))
            };
            let off = b.sqrt();
            jac[(k, k - 1)] = off;
            jac[(k - 1, k)] = off;
        }
        let eig = SymmetricEigen::new(jac);
        let mut pairs: Vec<(f64, f64)> = (0..m)
            .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        let nodes = pairs
            .iter()
            .map(|&(y, _)| {
                let y = y.clamp(-1.0, 1.0);
                ((1.0 + y) / 2.0, (1.0 - y) / 2.0)
            })
            .collect();
        let weights = pairs.iter().map(|p| p.1 / total).collect();
        Self { nodes, weights }
    }

    /// Returns `(Σ w h, Σ w |h|)`.
    pub fn apply<F: FnMut(f64, f64) -> f64>(&self, mut h: F) -> (f64, f64) {
        let mut sum = 0.0;
        let mut abs = 0.0;
        for (&(s, one_minus_s), &w) in self.nodes.iter().zip(&self.weights) {
            let v = h(s, one_minus_s);
            sum += w * v;
            abs += w * v.abs();
        }
        (sum, abs)
    }
}

/// Result of a quadrature with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
    /// Integrand evaluations, or nodes of the accepted Gauss rule.
    pub nodes: usize,
}

/// Relative accuracy below which rounding noise dominates a quadrature estimate.
pub const NOISE_FLOOR: f64 = 1e-14;

/// Expectation of `h(s, 1-s)` under Beta(p, q), doubling the Gauss rule size
/// from `start` until two successive rules agree to `rel_tol` relative to
/// `E|h|`. Returns `None` when `max_nodes` is exhausted.
pub fn beta_expectation<F: FnMut(f64, f64) -> f64>(
    p: f64,
    q: f64,
    mut h: F,
    rel_tol: f64,
    start: usize,
    max_nodes: usize,
) -> Option<Quad> {
    let mut m = start.max(2).min(max_nodes);
    let (mut prev, _) = BetaGaussRule::new(m, p, q).apply(&mut h);
    while 2 * m <= max_nodes {
        m *= 2;
        let (cur, abs) = BetaGaussRule::new(m, p, q).apply(&mut h);
        let diff = (cur - prev).abs();
        if diff <= rel_tol.max(NOISE_FLOOR) * abs {
            return Some(Quad {
                value: cur,
                error: diff,
                nodes: m,
            });
        }
        prev = cur;
    }
    None
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// 15-point Kronrod and embedded 7-point Gauss estimates of a vector integrand.
fn gk15<const K: usize, F: FnMut(f64) -> [f64; K]>(
    f: &mut F,
    a: f64,
    b: f64,
) -> ([f64; K], [f64; K]) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kron = [0.0; K];
    let mut gauss = [0.0; K];
    let fc = f(center);
    for k in 0..K {
        kron[k] = WGK[7] * fc[k];
        gauss[k] = WG[3] * fc[k];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for k in 0..K {
            let s = f1[k] + f2[k];
            kron[k] += WGK[j] * s;
            if j % 2 == 1 {
                gauss[k] += WG[j / 2] * s;
            }
        }
    }
    for k in 0..K {
        kron[k] *= half;
        gauss[k] *= half;
    }
    (kron, gauss)
}

struct Panel<const K: usize> {
    a: f64,
    b: f64,
    kron: [f64; K],
    err: f64,
}

impl<const K: usize> PartialEq for Panel<K> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<const K: usize> Eq for Panel<K> {}
impl<const K: usize> PartialOrd for Panel<K> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<const K: usize> Ord for Panel<K> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive Gauss-Kronrod over the partition given by `breaks`
/// (sorted, covering the whole range). `err_of` turns the per-component
/// `|K - G|` differences of a panel into a scalar error; refinement stops when
/// the summed error is at most `target(totals)`.
pub fn adaptive_gk<const K: usize, F, E, T>(
    mut f: F,
    breaks: &[f64],
    err_of: E,
    target: T,
    max_panels: usize,
) -> Option<([f64; K], f64, usize)>
where
    F: FnMut(f64) -> [f64; K],
    E: Fn(&[f64; K], &[f64; K]) -> f64,
    T: Fn(&[f64; K]) -> f64,
{
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (kron, gauss) = gk15(&mut f, w[0], w[1]);
            let err = err_of(&kron, &gauss);
            heap.push(Panel {
                a: w[0],
                b: w[1],
                kron,
                err,
            });
        }
    }
    loop {
        let mut totals = [0.0; K];
        let mut err_total = 0.0;
        for p in heap.iter() {
            for (total, v) in totals.iter_mut().zip(&p.kron) {
                *total += v;
            }
            err_total += p.err;
        }
        if err_total <= target(&totals) {
            return Some((totals, err_total, heap.len() * 15));
        }
        if heap.len() >= max_panels {
            return None;
        }
        let worst = heap.pop()?;
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // panel cannot be split further; accept what we have
            heap.push(worst);
            return Some((totals, err_total, heap.len() * 15));
        }
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (kron, gauss) = gk15(&mut f, a, b);
            let err = err_of(&kron, &gauss);
            heap.push(Panel { a, b, kron, err });
        }
    }
}
