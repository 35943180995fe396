#![allow(dead_code)]

use projcvm::{RandomStream, SampleMatrix};

pub fn gaussian(n: usize, d: usize, rng: &mut RandomStream) -> SampleMatrix<f64> {
    SampleMatrix::from_fn(n, d, |_, _| rng.gaussian()).unwrap()
}

pub fn shifted(n: usize, d: usize, shift: f64, rng: &mut RandomStream) -> SampleMatrix<f64> {
    SampleMatrix::from_fn(n, d, |_, _| rng.gaussian() + shift).unwrap()
}

pub fn col(xs: &[f64]) -> SampleMatrix<f64> {
    SampleMatrix::from_column(xs).unwrap()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn dotp(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dotp(a, a).sqrt()
}

/// Angle via the half-angle formula 2·atan2(‖û − v̂‖, ‖û + v̂‖); independent
/// of the arccos path used by the library.
pub fn ang(u: &[f64], v: &[f64]) -> f64 {
    let (nu, nv) = (norm(u), norm(v));
    let a: Vec<f64> = u.iter().zip(v).map(|(x, y)| x / nu - y / nv).collect();
    let b: Vec<f64> = u.iter().zip(v).map(|(x, y)| x / nu + y / nv).collect();
    2.0 * norm(&a).atan2(norm(&b))
}

/// Random orthogonal matrix (Gram–Schmidt on Gaussian columns), row-major.
pub fn random_orthogonal(d: usize, rng: &mut RandomStream) -> Vec<f64> {
    let mut q: Vec<Vec<f64>> = Vec::new();
    while q.len() < d {
        let mut v: Vec<f64> = (0..d).map(|_| rng.gaussian()).collect();
        for u in &q {
            let p = dotp(&v, u);
            for k in 0..d {
                v[k] -= p * u[k];
            }
        }
        let nv = norm(&v);
        if nv > 1e-8 {
            q.push(v.iter().map(|x| x / nv).collect());
        }
    }
    q.concat()
}

pub fn transform(z: &SampleMatrix<f64>, q: &[f64], scale: f64, shift: &[f64]) -> SampleMatrix<f64> {
    let d = z.ncols();
    z.map_rows(d, |r, out| {
        for i in 0..d {
            out[i] = scale * (0..d).map(|k| q[i * d + k] * r[k]).sum::<f64>() + shift[i];
        }
    })
}

pub fn rows(z: &SampleMatrix<f64>) -> Vec<Vec<f64>> {
    z.rows().map(|r| r.to_vec()).collect()
}

/// Brute-force CvM U-statistic straight from its definition, skipping tuples
/// with a zero difference vector.
pub fn brute_cvm(x: &SampleMatrix<f64>, y: &SampleMatrix<f64>) -> (f64, u64) {
    let (xr, yr) = (rows(x), rows(y));
    let mut s = 0.0;
    let mut used = 0u64;
    let mut skipped = 0u64;
    for i1 in 0..xr.len() {
        for i2 in 0..xr.len() {
            if i1 == i2 {
                continue;
            }
            for j1 in 0..yr.len() {
                for j2 in 0..yr.len() {
                    if j1 == j2 {
                        continue;
                    }
                    let a = sub(&xr[i1], &yr[j1]);
                    let b = sub(&xr[i2], &yr[j1]);
                    let c = sub(&yr[j1], &xr[i1]);
                    let e = sub(&yr[j2], &xr[i1]);
                    if norm(&a) == 0.0 || norm(&b) == 0.0 || norm(&e) == 0.0 {
                        skipped += 1;
                        continue;
                    }
                    let pi2 = 2.0 * std::f64::consts::PI;
                    s += 1.0 / 3.0 - ang(&a, &b) / pi2 - ang(&c, &e) / pi2;
                    used += 1;
                }
            }
        }
    }
    (s / used as f64, skipped)
}

pub fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

pub fn ordered_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| (0..n).filter(|i| !t.contains(i)).map(|i| [t.clone(), vec![i]].concat()).collect::<Vec<_>>())
            .collect();
    }
    out
}

pub fn a_sign(z: &[f64], t: &[usize]) -> f64 {
    let d = |a: usize, b: usize| (z[t[a]] - z[t[b]]).abs();
    let v = d(0, 1) + d(2, 3) - d(0, 2) - d(1, 3);
    // interleaved orderings cancel exactly in real arithmetic
    let scale = d(0, 1) + d(2, 3) + d(0, 2) + d(1, 3);
    if v.abs() <= 1e-12 * scale {
        0.0
    } else if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Univariate τ* U-statistic with the sign kernel.
pub fn sign_taustar(x: &[f64], y: &[f64]) -> f64 {
    let ts = ordered_tuples(x.len(), 4);
    ts.iter().map(|t| a_sign(x, t) * a_sign(y, t)).sum::<f64>() / ts.len() as f64
}

/// Kendall kernel averaged over the two-point sphere {−1, +1}² in p = q = 1.
pub fn two_point_kendall(x: &[f64], y: &[f64]) -> f64 {
    let ts = ordered_tuples(x.len(), 4);
    let ind = |a: f64, b: f64, al: f64, be: f64| ((al * a < 0.0) && (be * b < 0.0)) as i32 as f64;
    ts.iter()
        .map(|t| {
            let mut s = 0.0;
            for al in [-1.0, 1.0] {
                for be in [-1.0, 1.0] {
                    let i1 = ind(x[t[0]] - x[t[1]], y[t[0]] - y[t[1]], al, be);
                    let i2 = ind(x[t[2]] - x[t[3]], y[t[2]] - y[t[3]], al, be);
                    s += (4.0 * i1 - 1.0) * (4.0 * i2 - 1.0) / 4.0;
                }
            }
            s
        })
        .sum::<f64>()
        / ts.len() as f64
}

/// BKR with o(a, b; c) = mean over α = ±1 of 1(α(a − c) ≤ 0)1(α(b − c) ≤ 0).
pub fn two_point_bkr(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let o1 = |z: &[f64], a: usize, b: usize, c: usize| {
        [-1.0, 1.0].iter().map(|al| ((al * (z[a] - z[c]) <= 0.0) && (al * (z[b] - z[c]) <= 0.0)) as i32 as f64).sum::<f64>() / 2.0
    };
    let m = |k: usize, f: &dyn Fn(&[usize]) -> f64| {
        let ts = ordered_tuples(n, k);
        ts.iter().map(|t| f(t)).sum::<f64>() / ts.len() as f64
    };
    m(4, &|t| o1(x, t[0], t[1], t[2]) * o1(y, t[0], t[1], t[3])) + m(6, &|t| o1(x, t[0], t[1], t[4]) * o1(y, t[2], t[3], t[5]))
        - 2.0 * m(5, &|t| o1(x, t[0], t[1], t[3]) * o1(y, t[0], t[2], t[4]))
}
