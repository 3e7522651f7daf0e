//! Slow brute-force references for tests.
//!
//! Nothing here calls into `norms`, `calderon` or `extension`; vector norms,
//! lattice norms, projections and searches are written out again so that an
//! agreement between an oracle and a fast routine means something. Oracles
//! refuse inputs beyond the sizes they can cover instead of degrading.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extension::ExtensionProblem;
use crate::model::{ExponentSpec, MatrixOperator};

/// Grid density and log-domain half-width for the searches below.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    resolution: usize,
    range: f64,
}

impl GridSpec {
    pub fn new(resolution: usize, range: f64) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::Domain(format!("grid resolution must be at least 2, got {resolution}")));
        }
        if !(range.is_finite() && range > 0.0) {
            return Err(Error::Domain(format!("grid range must be finite and positive, got {range}")));
        }
        Ok(Self { resolution, range })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn range(&self) -> f64 {
        self.range
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            resolution: 60,
            range: 6.0,
        }
    }
}

fn pnorm(v: &[f64], p: ExponentSpec) -> f64 {
    if p.is_infinite() {
        v.iter().fold(0.0, |a: f64, b| a.max(b.abs()))
    } else {
        v.iter().map(|x| x.abs().powf(p.p())).sum::<f64>().powf(1.0 / p.p())
    }
}

fn real_entries(m: &MatrixOperator) -> Result<Vec<Vec<f64>>> {
    if m.entries().iter().any(|z| z.im != 0.0 || z.re < 0.0) {
        return Err(Error::Domain("oracle expects a nonnegative real matrix".into()));
    }
    Ok((0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j).re).collect()).collect())
}

fn apply(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(u, v)| u * v).sum()).collect()
}

/// Compositions of `total` into `parts` nonnegative integers.
fn compositions(total: usize, parts: usize, out: &mut Vec<Vec<usize>>, prefix: &mut Vec<usize>) {
    if parts == 1 {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in 0..=total {
        prefix.push(first);
        compositions(total - first, parts - 1, out, prefix);
        prefix.pop();
    }
}

/// `max ‖Mx‖_p` over the nonnegative unit sphere, by exhaustive grid and a
/// compass polish. A lower bound; the grid alone is within `O(1/resolution)`.
pub fn oracle_operator_p_norm(m: &MatrixOperator, p: ExponentSpec, grid: GridSpec) -> Result<f64> {
    if m.cols() > 3 {
        return Err(Error::Refused(format!(
            "operator-norm oracle covers at most 3 columns, got {}",
            m.cols()
        )));
    }
    let a = real_entries(m)?;
    let n = m.cols();
    let r = grid.resolution;
    if p.is_infinite() {
        // monotone in x, so the all-ones vector is optimal; scan the cube anyway
        let mut best = 0.0_f64;
        let mut idx = vec![0usize; n];
        loop {
            let x: Vec<f64> = idx.iter().map(|&i| i as f64 / r as f64).collect();
            if x.iter().any(|&v| v == 1.0) {
                best = best.max(pnorm(&apply(&a, &x), p));
            }
            let mut k = 0;
            while k < n && idx[k] == r {
                idx[k] = 0;
                k += 1;
            }
            if k == n {
                break;
            }
            idx[k] += 1;
        }
        return Ok(best);
    }
    // points w of the simplex map to x = w^{1/p} on the p-sphere
    let value = |w: &[f64]| -> f64 {
        let x: Vec<f64> = w.iter().map(|&v| v.max(0.0).powf(1.0 / p.p())).collect();
        pnorm(&apply(&a, &x), p)
    };
    let mut pts = Vec::new();
    compositions(r, n, &mut pts, &mut Vec::new());
    let mut best_w: Vec<f64> = vec![0.0; n];
    let mut best = -1.0;
    for c in pts {
        let w: Vec<f64> = c.iter().map(|&k| k as f64 / r as f64).collect();
        let v = value(&w);
        if v > best {
            best = v;
            best_w = w;
        }
    }
    // move mass between coordinate pairs, halving the step on failure
    let mut h = 1.0 / r as f64;
    while h > 1e-13 {
        let mut improved = false;
        for i in 0..n {
            for j in 0..n {
                if i == j || best_w[j] < h {
                    continue;
                }
                let mut w = best_w.clone();
                w[i] += h;
                w[j] -= h;
                let v = value(&w);
                if v > best {
                    best = v;
                    best_w = w;
                    improved = true;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    Ok(best)
}

/// Infimum of `a0(f0)^{1−θ} a1(f1)^θ` over `a_ij = f0_ij^{1−θ} f1_ij^θ` on
/// the support of a 2×2 nonnegative matrix, searched on a log grid with the
/// first support variable fixed (the product is invariant under the joint
/// rescaling) and then polished. An upper bound.
pub fn oracle_calderon_norm(a: &MatrixOperator, theta: f64, grid: GridSpec) -> Result<f64> {
    if a.shape() != (2, 2) {
        return Err(Error::Refused(format!(
            "Calderon oracle covers 2x2 matrices only, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Domain(format!("theta must lie in (0, 1), got {theta}")));
    }
    let entries = real_entries(a)?;
    let support: Vec<(usize, usize)> = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .filter(|&(i, j)| entries[i][j] > 0.0)
        .collect();
    if support.is_empty() {
        return Ok(0.0);
    }
    // f0 = a e^{u}, f1 = a e^{−(1−θ)u/θ}
    let objective = |u: &[f64]| -> f64 {
        let mut f0 = [[0.0; 2]; 2];
        let mut f1 = [[0.0; 2]; 2];
        for (&(i, j), &ui) in support.iter().zip(std::iter::once(&0.0).chain(u)) {
            f0[i][j] = entries[i][j] * ui.exp();
            f1[i][j] = entries[i][j] * (-(1.0 - theta) * ui / theta).exp();
        }
        let max_row_sum = (0..2).map(|i| f0[i][0] + f0[i][1]).fold(0.0, f64::max);
        let max_col_sum = (0..2).map(|j| f1[0][j] + f1[1][j]).fold(0.0, f64::max);
        max_row_sum.powf(1.0 - theta) * max_col_sum.powf(theta)
    };
    let free = support.len() - 1;
    let r = grid.resolution;
    let coord = |k: usize| -grid.range + 2.0 * grid.range * k as f64 / (r - 1) as f64;
    let mut best_u = vec![0.0; free];
    let mut best = objective(&best_u);
    let mut idx = vec![0usize; free];
    if free > 0 {
        loop {
            let u: Vec<f64> = idx.iter().map(|&k| coord(k)).collect();
            let v = objective(&u);
            if v < best {
                best = v;
                best_u = u;
            }
            let mut k = 0;
            while k < free && idx[k] == r - 1 {
                idx[k] = 0;
                k += 1;
            }
            if k == free {
                break;
            }
            idx[k] += 1;
        }
    }
    // The log of the objective is convex in u, so finish with the ellipsoid
    // method on subgradients, starting from a ball around the grid incumbent that covers the grid box.
    let subgradient = |u: &[f64]| -> Vec<f64> {
        let mut f0 = [[0.0; 2]; 2];
        let mut f1 = [[0.0; 2]; 2];
        for (&(i, j), &ui) in support.iter().zip(std::iter::once(&0.0).chain(u)) {
            f0[i][j] = entries[i][j] * ui.exp();
            f1[i][j] = entries[i][j] * (-(1.0 - theta) * ui / theta).exp();
        }
        let rows = [f0[0][0] + f0[0][1], f0[1][0] + f0[1][1]];
        let cols = [f1[0][0] + f1[1][0], f1[0][1] + f1[1][1]];
        let ri = if rows[1] > rows[0] { 1 } else { 0 };
        let cj = if cols[1] > cols[0] { 1 } else { 0 };
        support[1..]
            .iter()
            .map(|&(i, j)| {
                let mut g = 0.0;
                if i == ri {
                    g += (1.0 - theta) * f0[i][j] / rows[ri];
                }
                if j == cj {
                    g -= (1.0 - theta) * f1[i][j] / cols[cj];
                }
                g
            })
            .collect()
    };
    if free == 1 {
        let (mut lo, mut hi) = (best_u[0] - 4.0 * grid.range, best_u[0] + 4.0 * grid.range);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let v = objective(&[mid]);
            if v < best {
                best = v;
            }
            if subgradient(&[mid])[0] > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    } else if free > 1 {
        let nf = free as f64;
        let radius2 = 16.0 * grid.range * grid.range * nf;
        let mut x = best_u.clone();
        let mut shape: Vec<Vec<f64>> = (0..free)
            .map(|a| (0..free).map(|b| if a == b { radius2 } else { 0.0 }).collect())
            .collect();
        for _ in 0..400 * free * free {
            let v = objective(&x);
            if v < best {
                best = v;
            }
            let g = subgradient(&x);
            let pg: Vec<f64> = shape.iter().map(|row| row.iter().zip(&g).map(|(a, b)| a * b).sum()).collect();
            let gpg: f64 = g.iter().zip(&pg).map(|(a, b)| a * b).sum();
            if !(gpg > 1e-30) {
                break;
            }
            let s = gpg.sqrt();
            let b: Vec<f64> = pg.iter().map(|v| v / s).collect();
            x.iter_mut().zip(&b).for_each(|(xi, bi)| *xi -= bi / (nf + 1.0));
            let scale = nf * nf / (nf * nf - 1.0);
            for a in 0..free {
                for c in 0..free {
                    shape[a][c] = scale * (shape[a][c] - 2.0 / (nf + 1.0) * b[a] * b[c]);
                }
            }
        }
    }
    Ok(best)
}

/// Largest number of families [`oracle_family_search`] will enumerate.
pub const FAMILY_LIMIT: usize = 2_000_000;

fn net_vectors(k: usize) -> Vec<Vec<Complex64>> {
    let magnitudes = [0.25, 0.5, 0.75, 1.0];
    let phases: Vec<Complex64> = (0..8)
        .map(|s| Complex64::from_polar(1.0, s as f64 * std::f64::consts::PI / 4.0))
        .collect();
    let mut options: Vec<Complex64> = vec![Complex64::new(0.0, 0.0)];
    for &m in &magnitudes {
        for &ph in &phases {
            options.push(ph * m);
        }
    }
    let mut out: Vec<Vec<Complex64>> = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|v| {
                options.iter().map(move |&z| {
                    let mut w = v.clone();
                    w.push(z);
                    w
                })
            })
            .collect();
    }
    // the ratio only sees moduli, so members are taken up to a unimodular
    // factor: first nonzero coordinate real and positive
    out.retain(|v| match v.iter().find(|z| z.norm() > 0.0) {
        Some(z) => z.im.abs() < 1e-12 && z.re > 0.0,
        None => false,
    });
    out
}

fn binomial_sum(n: usize, cap: usize) -> usize {
    let mut total = 0usize;
    let mut term = 1usize;
    for t in 1..=cap.min(n) {
        term = term.saturating_mul(n + 1 - t) / t;
        total = total.saturating_add(term);
    }
    total
}

/// Best family ratio over all families of at most `cap` distinct members
/// whose basis coefficients lie in the net `{0, ¼, ½, ¾, 1} × 8th roots of
/// unity`. A lower bound for the regular norm of `u` on `S`.
pub fn oracle_family_search(prob: &ExtensionProblem, cap: usize) -> Result<f64> {
    let (n, k, m) = (prob.ambient_n(), prob.dim(), prob.target_m());
    if n > 3 || k > 2 {
        return Err(Error::Refused(format!(
            "family oracle covers ambient_n <= 3 and k <= 2, got ambient_n={n}, k={k}"
        )));
    }
    if cap == 0 {
        return Err(Error::Domain("family size cap must be at least 1".into()));
    }
    let p = prob.p();
    let net = net_vectors(k);
    let count = binomial_sum(net.len(), cap);
    if count > FAMILY_LIMIT {
        return Err(Error::Refused(format!(
            "family oracle would enumerate {count} families (limit {FAMILY_LIMIT})"
        )));
    }
    let combine = |vs: &[Vec<Complex64>], c: &[Complex64], len: usize| -> Vec<f64> {
        (0..len)
            .map(|i| vs.iter().zip(c).map(|(v, w)| v[i] * w).sum::<Complex64>().norm())
            .collect()
    };
    let members: Vec<(Vec<f64>, Vec<f64>)> = net
        .iter()
        .map(|c| (combine(prob.basis(), c, n), combine(prob.images(), c, m)))
        .collect();

    let mut best = 0.0_f64;
    let mut chosen: Vec<usize> = Vec::with_capacity(cap);
    fn recurse(
        start: usize,
        members: &[(Vec<f64>, Vec<f64>)],
        chosen: &mut Vec<usize>,
        cap: usize,
        p: ExponentSpec,
        best: &mut f64,
    ) {
        for i in start..members.len() {
            chosen.push(i);
            let n = members[0].0.len();
            let m = members[0].1.len();
            let mut den = vec![0.0_f64; n];
            let mut num = vec![0.0_f64; m];
            for &c in chosen.iter() {
                for (d, v) in den.iter_mut().zip(&members[c].0) {
                    *d = d.max(*v);
                }
                for (d, v) in num.iter_mut().zip(&members[c].1) {
                    *d = d.max(*v);
                }
            }
            let dn = pnorm(&den, p);
            if dn > 0.0 {
                *best = best.max(pnorm(&num, p) / dn);
            }
            if chosen.len() < cap {
                recurse(i + 1, members, chosen, cap, p, best);
            }
            chosen.pop();
        }
    }
    recurse(0, &members, &mut chosen, cap, p, &mut best);
    Ok(best)
}

/// Long-run reference for the minimal extension: plain projected
/// subgradient with diminishing steps `s/√(t+1)` from `starts` feasible
/// points, with its own projector (Gram–Schmidt) and its own power
/// iteration for `‖|M|‖_p`. Returns the best objective value seen.
pub fn oracle_extension_min_norm(prob: &ExtensionProblem, iterations: usize, starts: usize, seed: u64) -> Result<f64> {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    let (n, m, k) = (prob.ambient_n(), prob.target_m(), prob.dim());
    if n * m > 64 {
        return Err(Error::Refused(format!("extension oracle covers n*m <= 64, got {}", n * m)));
    }
    let p = prob.p();
    // orthonormal basis q_1..q_k of span{conj(b_l)} and the coordinates of
    // conj(b_l) in it (upper-triangular R)
    let mut q: Vec<Vec<Complex64>> = Vec::with_capacity(k);
    let mut rmat = vec![vec![Complex64::new(0.0, 0.0); k]; k];
    for l in 0..k {
        let mut v: Vec<Complex64> = prob.basis()[l].iter().map(|z| z.conj()).collect();
        for (t, qt) in q.iter().enumerate() {
            let c: Complex64 = qt.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            rmat[t][l] = c;
            v.iter_mut().zip(qt).for_each(|(x, y)| *x -= c * y);
        }
        let len = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        rmat[l][l] = Complex64::new(len, 0.0);
        q.push(v.into_iter().map(|z| z / len).collect());
    }
    // row r must satisfy Σ_j b_lj m_j = ⟨conj(b_l), m⟩ = τ_l; the min-norm
    // solution is m = Σ_t c_t q_t with Σ_{t≤l} conj(R_tl) c_t = τ_l
    let particular_row = |r: usize| -> Vec<Complex64> {
        let tau: Vec<Complex64> = (0..k).map(|l| prob.images()[l][r]).collect();
        let mut c = vec![Complex64::new(0.0, 0.0); k];
        for l in 0..k {
            let mut s = tau[l];
            for t in 0..l {
                s -= rmat[t][l].conj() * c[t];
            }
            c[l] = s / rmat[l][l].conj();
        }
        (0..n).map(|j| (0..k).map(|t| q[t][j] * c[t]).sum()).collect()
    };
    let particular: Vec<Vec<Complex64>> = (0..m).map(particular_row).collect();
    let remove_span = |v: &mut Vec<Complex64>| {
        for qt in &q {
            let c: Complex64 = qt.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
            v.iter_mut().zip(qt).for_each(|(x, y)| *x -= c * y);
        }
    };
    // ‖|M|‖_p by plain nonlinear power iteration, started from the previous
    // maximizer (all ones at first) and stopped once the value settles
    let norm_with_witness = |mat: &[Vec<Complex64>], warm: &[f64]| -> (f64, Vec<f64>, Vec<f64>) {
        let a: Vec<Vec<f64>> = mat.iter().map(|row| row.iter().map(|z| z.norm()).collect()).collect();
        if p.is_one() {
            let sums: Vec<f64> = (0..n).map(|j| a.iter().map(|row| row[j]).sum()).collect();
            let (j, v) = sums.iter().enumerate().fold((0, -1.0), |b, (j, &v)| if v > b.1 { (j, v) } else { b });
            let mut x = vec![0.0; n];
            x[j] = 1.0;
            return (v, x, vec![1.0; m]);
        }
        if p.is_infinite() {
            let sums: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
            let (i, v) = sums.iter().enumerate().fold((0, -1.0), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
            let mut y = vec![0.0; m];
            y[i] = 1.0;
            return (v, vec![1.0; n], y);
        }
        let pp = p.p();
        let mut x: Vec<f64> = warm.iter().map(|v| v.max(1e-3)).collect();
        let s = pnorm(&x, p);
        x.iter_mut().for_each(|v| *v /= s);
        let mut value = 0.0;
        for _ in 0..3000 {
            let z = apply(&a, &x);
            let prev = value;
            value = pnorm(&z, p);
            if value == 0.0 || (value - prev).abs() <= 1e-15 * value {
                break;
            }
            let w: Vec<f64> = z.iter().map(|v| v.powf(pp - 1.0)).collect();
            let mut next: Vec<f64> = (0..n)
                .map(|j| a.iter().zip(&w).map(|(row, wi)| row[j] * wi).sum::<f64>().powf(1.0 / (pp - 1.0)))
                .collect();
            let s = pnorm(&next, p);
            if s == 0.0 {
                break;
            }
            next.iter_mut().for_each(|v| *v /= s);
            x = next;
        }
        let z = apply(&a, &x);
        let y: Vec<f64> = z.iter().map(|v| (v / value.max(f64::MIN_POSITIVE)).powf(pp - 1.0)).collect();
        (value, x, y)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for start in 0..starts.max(1) {
        let mut mat = particular.clone();
        if start > 0 {
            for (row, part) in mat.iter_mut().zip(&particular) {
                let mut d: Vec<Complex64> = (0..n)
                    .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
                    .collect();
                remove_span(&mut d);
                let scale = part.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1e-3);
                row.iter_mut().zip(&d).for_each(|(x, y)| *x += y * scale);
            }
        }
        let step0 = mat.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt() * 0.1;
        let mut warm = vec![1.0; n];
        for t in 0..iterations {
            let (value, x, y) = norm_with_witness(&mat, &warm);
            best = best.min(value);
            let mut grad: Vec<Vec<Complex64>> = mat
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(j, z)| {
                            let r = z.norm();
                            if r == 0.0 {
                                Complex64::new(0.0, 0.0)
                            } else {
                                z / r * (y[i] * x[j])
                            }
                        })
                        .collect()
                })
                .collect();
            grad.iter_mut().for_each(|g| remove_span(g));
            let gn = grad.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if gn == 0.0 {
                break;
            }
            let step = step0 / ((t + 1) as f64).sqrt() / gn;
            for (row, g) in mat.iter_mut().zip(&grad) {
                row.iter_mut().zip(g).for_each(|(x, y)| *x -= y * step);
            }
            warm = x;
        }
        let (value, _, _) = norm_with_witness(&mat, &warm);
        best = best.min(value);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: f64) -> ExponentSpec {
        ExponentSpec::from_p(v).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn grid_spec_validation() {
        assert!(GridSpec::new(1, 1.0).is_err());
        assert!(GridSpec::new(4, f64::INFINITY).is_err());
        assert!(GridSpec::new(4, 2.0).is_ok());
    }

    #[test]
    fn operator_norm_examples() {
        let g = GridSpec::default();
        let id = MatrixOperator::identity(2);
        assert!((oracle_operator_p_norm(&id, p(2.0), g).unwrap() - 1.0).abs() < 1e-3);
        let ones = MatrixOperator::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!((oracle_operator_p_norm(&ones, p(3.0), g).unwrap() - 2.0).abs() < 1e-2);
        // rank one u vᵀ: ‖u‖_p ‖v‖_{p'}
        let (u, v) = ([1.0, 2.0], [0.5, 1.0, 0.25]);
        let rows: Vec<Vec<f64>> = u.iter().map(|a| v.iter().map(|b| a * b).collect()).collect();
        let a = MatrixOperator::from_rows(&rows).unwrap();
        let q = p(3.0);
        let expected = pnorm(&u, q) * pnorm(&v, q.conjugate());
        assert!((oracle_operator_p_norm(&a, q, g).unwrap() - expected).abs() < 1e-2);
        assert!(matches!(
            oracle_operator_p_norm(&MatrixOperator::identity(4), q, g),
            Err(Error::Refused(_))
        ));
    }

    #[test]
    fn operator_norm_endpoints() {
        let g = GridSpec::new(8, 1.0).unwrap();
        let a = MatrixOperator::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(oracle_operator_p_norm(&a, ExponentSpec::ONE, g).unwrap(), 6.0);
        assert_eq!(oracle_operator_p_norm(&a, ExponentSpec::INFINITY, g).unwrap(), 7.0);
    }

    #[test]
    fn calderon_examples() {
        let g = GridSpec::default();
        let d = MatrixOperator::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0]]).unwrap();
        assert!((oracle_calderon_norm(&d, 0.5, g).unwrap() - 2.0).abs() < 1e-2);
        let ones = MatrixOperator::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!((oracle_calderon_norm(&ones, 0.5, g).unwrap() - 2.0).abs() < 1e-2);
        let single = MatrixOperator::from_rows(&[vec![0.0, 0.0], vec![0.0, 3.5]]).unwrap();
        assert!((oracle_calderon_norm(&single, 0.3, g).unwrap() - 3.5).abs() < 1e-9);
        assert!(matches!(
            oracle_calderon_norm(&MatrixOperator::identity(3), 0.5, g),
            Err(Error::Refused(_))
        ));
    }

    #[test]
    fn family_search_examples() {
        let t = vec![c(1.0), c(-2.0)];
        let single = ExtensionProblem::new(p(3.0), 2, 2, vec![vec![c(1.0), c(0.0)]], vec![t.clone()]).unwrap();
        let expected = pnorm(&[1.0, 2.0], p(3.0));
        assert!((oracle_family_search(&single, 1).unwrap() - expected).abs() < 1e-12);
        let zero = ExtensionProblem::new(p(2.0), 2, 1, vec![vec![c(1.0), c(1.0)]], vec![vec![c(0.0)]]).unwrap();
        assert_eq!(oracle_family_search(&zero, 2).unwrap(), 0.0);
        let big = ExtensionProblem::new(p(2.0), 4, 1, vec![vec![c(1.0); 4]], vec![vec![c(1.0)]]).unwrap();
        assert!(matches!(oracle_family_search(&big, 1), Err(Error::Refused(_))));
        let two = ExtensionProblem::new(
            p(2.0),
            2,
            1,
            vec![vec![c(1.0), c(0.0)], vec![c(0.0), c(1.0)]],
            vec![vec![c(1.0)], vec![c(1.0)]],
        )
        .unwrap();
        assert!(matches!(oracle_family_search(&two, 4), Err(Error::Refused(_))));
    }
}
