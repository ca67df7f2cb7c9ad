//! Independent reference implementations backing the oracle test suites.
//!
//! Everything here recomputes results through a different algorithmic route
//! than the production modules (dense linear solves instead of tridiagonal
//! recurrences, exhaustive pair/face enumeration, analytic eigenvalues,
//! active-set QP enumeration) so the tests compare two genuinely separate
//! derivations. Nothing in the pipeline itself calls this module.

use crate::ingest::Volume;

// ---------------------------------------------------------------------------
// Cubic spline via a dense linear system

/// Not-a-knot cubic spline through `y` at unit knots, solved as one dense
/// linear system over per-piece polynomial coefficients
/// `a + b u + c u^2 + d u^3`. Requires `y.len() >= 4`.
pub fn spline_dense_coeffs(y: &[f64]) -> Vec<[f64; 4]> {
    let n = y.len();
    assert!(n >= 4, "dense spline oracle needs >= 4 knots");
    let pieces = n - 1;
    let dim = 4 * pieces;
    let mut a = vec![0.0f64; dim * dim];
    let mut rhs = vec![0.0f64; dim];
    let mut row = 0;
    let mut set = |a: &mut Vec<f64>, r: usize, c: usize, v: f64| a[r * dim + c] = v;

    // Interpolation at both ends of every piece.
    for p in 0..pieces {
        set(&mut a, row, 4 * p, 1.0);
        rhs[row] = y[p];
        row += 1;
        for j in 0..4 {
            set(&mut a, row, 4 * p + j, 1.0);
        }
        rhs[row] = y[p + 1];
        row += 1;
    }
    // C1 and C2 continuity at interior knots.
    for p in 0..pieces - 1 {
        // b_p + 2 c_p + 3 d_p = b_{p+1}
        set(&mut a, row, 4 * p + 1, 1.0);
        set(&mut a, row, 4 * p + 2, 2.0);
        set(&mut a, row, 4 * p + 3, 3.0);
        set(&mut a, row, 4 * (p + 1) + 1, -1.0);
        row += 1;
        // 2 c_p + 6 d_p = 2 c_{p+1}
        set(&mut a, row, 4 * p + 2, 2.0);
        set(&mut a, row, 4 * p + 3, 6.0);
        set(&mut a, row, 4 * (p + 1) + 2, -2.0);
        row += 1;
    }
    // Not-a-knot: third derivative continuous across the first and last
    // interior knots.
    set(&mut a, row, 3, 6.0);
    set(&mut a, row, 4 + 3, -6.0);
    row += 1;
    set(&mut a, row, 4 * (pieces - 2) + 3, 6.0);
    set(&mut a, row, 4 * (pieces - 1) + 3, -6.0);
    row += 1;
    assert_eq!(row, dim);

    let sol = gaussian_solve(&mut a, &mut rhs).expect("spline system is nonsingular");
    (0..pieces)
        .map(|p| [sol[4 * p], sol[4 * p + 1], sol[4 * p + 2], sol[4 * p + 3]])
        .collect()
}

/// Evaluates the dense-solved spline; beyond the knot range the nearest end
/// piece extrapolates.
pub fn spline_dense_eval(coeffs: &[[f64; 4]], x: f64) -> f64 {
    let pieces = coeffs.len();
    let p = if x <= 0.0 {
        0
    } else if x >= pieces as f64 {
        pieces - 1
    } else {
        (x.floor() as usize).min(pieces - 1)
    };
    let u = x - p as f64;
    let [a, b, c, d] = coeffs[p];
    a + u * (b + u * (c + u * d))
}

/// Tensor-product resampling of `v` to isotropic `target` spacing using the
/// dense spline oracle per axis (x, then y, then z).
pub fn resample_dense(v: &Volume, target: f64) -> (Vec<f64>, (usize, usize, usize)) {
    let (mut nx, mut ny, mut nz) = v.dims();
    let (sx, sy, sz) = v.spacing();
    let new = |n: usize, s: f64| (n as f64 * s / target).ceil() as usize;
    let (mx, my, mz) = (new(nx, sx), new(ny, sy), new(nz, sz));
    let mut data = v.voxels().to_vec();

    for axis in 0..3 {
        let (n_old, n_new, spacing) = match axis {
            0 => (nx, mx, sx),
            1 => (ny, my, sy),
            _ => (nz, mz, sz),
        };
        let positions: Vec<f64> = (0..n_new).map(|j| j as f64 * target / spacing).collect();
        let (odx, ody) = match axis {
            0 => (n_new, ny),
            1 => (nx, n_new),
            _ => (nx, ny),
        };
        let odz = match axis {
            0 => nz,
            1 => nz,
            _ => n_new,
        };
        let mut out = vec![0.0; odx * ody * odz];
        let lines: Vec<(usize, usize)> = match axis {
            0 => (0..ny * nz).map(|l| (l % ny, l / ny)).collect(),
            1 => (0..nx * nz).map(|l| (l % nx, l / nx)).collect(),
            _ => (0..nx * ny).map(|l| (l % nx, l / nx)).collect(),
        };
        for (u, w) in lines {
            let mut line = Vec::with_capacity(n_old);
            for i in 0..n_old {
                let (x, y, z) = match axis {
                    0 => (i, u, w),
                    1 => (u, i, w),
                    _ => (u, w, i),
                };
                line.push(data[x + nx * (y + ny * z)]);
            }
            let coeffs = spline_dense_coeffs(&line);
            for (j, &p) in positions.iter().enumerate() {
                let val = spline_dense_eval(&coeffs, p);
                let (x, y, z) = match axis {
                    0 => (j, u, w),
                    1 => (u, j, w),
                    _ => (u, w, j),
                };
                out[x + odx * (y + ody * z)] = val;
            }
        }
        data = out;
        match axis {
            0 => nx = mx,
            1 => ny = my,
            _ => nz = mz,
        }
    }
    (data, (mx, my, mz))
}

fn gaussian_solve(a: &mut [f64], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let mut pivot = col;
        for r in col + 1..n {
            if a[r * n + col].abs() > a[pivot * n + col].abs() {
                pivot = r;
            }
        }
        if a[pivot * n + col].abs() < 1e-12 {
            return None;
        }
        if pivot != col {
            for c in 0..n {
                a.swap(col * n + c, pivot * n + c);
            }
            b.swap(col, pivot);
        }
        let inv = 1.0 / a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] * inv;
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                a[r * n + c] -= f * a[col * n + c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = b[r];
        for c in r + 1..n {
            acc -= a[r * n + c] * x[c];
        }
        x[r] = acc / a[r * n + r];
    }
    Some(x)
}

// ---------------------------------------------------------------------------
// GLCM pair enumeration and texture formulas

/// Independent quantization: linear bins over the masked [min, max] with
/// the top edge inclusive; sentinel `u16::MAX` outside the mask.
pub fn quantize_reference(v: &Volume, levels: usize) -> Vec<u16> {
    let masked: Vec<f64> = v.masked_values();
    let lo = masked.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = masked.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    v.voxels()
        .iter()
        .zip(v.mask())
        .map(|(&val, &m)| {
            if m != 1 {
                u16::MAX
            } else if hi == lo {
                0
            } else {
                let b = ((val - lo) / (hi - lo) * levels as f64).floor() as usize;
                b.min(levels - 1) as u16
            }
        })
        .collect()
}

/// Brute-force GLCM: enumerate every ordered pair of masked voxels and
/// count those separated by exactly `distance * direction`, accumulating
/// symmetrically.
pub fn glcm_pair_enumeration(
    v: &Volume,
    levels: usize,
    distance: usize,
    direction: (i32, i32, i32),
) -> (Vec<u64>, u64) {
    let q = quantize_reference(v, levels);
    let coords = v.masked_coords();
    let offset = (
        direction.0 as i64 * distance as i64,
        direction.1 as i64 * distance as i64,
        direction.2 as i64 * distance as i64,
    );
    let mut counts = vec![0u64; levels * levels];
    let mut total = 0u64;
    for &(ax, ay, az) in &coords {
        for &(bx, by, bz) in &coords {
            let delta = (
                bx as i64 - ax as i64,
                by as i64 - ay as i64,
                bz as i64 - az as i64,
            );
            if delta == offset {
                let (nx, ny, _) = v.dims();
                let la = q[ax + nx * (ay + ny * az)] as usize;
                let lb = q[bx + nx * (by + ny * bz)] as usize;
                counts[la * levels + lb] += 1;
                counts[lb * levels + la] += 1;
                total += 2;
            }
        }
    }
    (counts, total)
}

/// Straight-loop texture formulas over a normalized GLCM, written against
/// the definitions rather than sharing the production accumulation.
pub fn texture_reference(counts: &[u64], levels: usize, total: u64) -> [f64; 12] {
    if total == 0 {
        return [0.0; 12];
    }
    let p = |i: usize, j: usize| counts[i * levels + j] as f64 / total as f64;
    let mut mu_x = 0.0;
    let mut mu_y = 0.0;
    for i in 1..=levels {
        for j in 1..=levels {
            mu_x += i as f64 * p(i - 1, j - 1);
            mu_y += j as f64 * p(i - 1, j - 1);
        }
    }
    let mut sx2 = 0.0;
    let mut sy2 = 0.0;
    for i in 1..=levels {
        for j in 1..=levels {
            sx2 += (i as f64 - mu_x).powi(2) * p(i - 1, j - 1);
            sy2 += (j as f64 - mu_y).powi(2) * p(i - 1, j - 1);
        }
    }
    let (sx, sy) = (sx2.sqrt(), sy2.sqrt());

    let mut energy = 0.0;
    let mut entropy = 0.0;
    let mut correlation = 0.0;
    let mut contrast = 0.0;
    let mut tvar = 0.0;
    let mut sum_mean = 0.0;
    let mut shade = 0.0;
    let mut prominence = 0.0;
    let mut homogeneity = 0.0;
    let mut max_p: f64 = 0.0;
    let mut inv_var = 0.0;
    for i in 1..=levels {
        for j in 1..=levels {
            let pij = p(i - 1, j - 1);
            if pij == 0.0 {
                continue;
            }
            let (fi, fj) = (i as f64, j as f64);
            energy += pij * pij;
            entropy -= pij * pij.log2();
            if sx > 0.0 && sy > 0.0 {
                correlation += (fi - mu_x) * (fj - mu_y) * pij / (sx * sy);
            }
            contrast += (fi - fj) * (fi - fj) * pij;
            tvar += (fi - mu_x) * (fi - mu_x) * pij;
            sum_mean += 0.5 * (fi + fj) * pij;
            shade += (fi + fj - mu_x - mu_y).powi(3) * pij;
            prominence += (fi + fj - mu_x - mu_y).powi(4) * pij;
            homogeneity += pij / (1.0 + (fi - fj).abs());
            max_p = max_p.max(pij);
            if i != j {
                inv_var += pij / ((fi - fj) * (fi - fj));
            }
        }
    }
    [
        energy,
        entropy,
        correlation,
        contrast,
        tvar,
        sum_mean,
        contrast,
        shade,
        prominence,
        homogeneity,
        max_p,
        inv_var,
    ]
}

// ---------------------------------------------------------------------------
// Geometry via analytic eigenvalues and explicit enumeration

/// Eigenvalues of a symmetric 3x3 matrix in descending order, via the
/// trigonometric closed form.
pub fn sym3_eigenvalues(m: [[f64; 3]; 3]) -> [f64; 3] {
    let p1 = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
    let q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    if p1 == 0.0 {
        let mut d = [m[0][0], m[1][1], m[2][2]];
        d.sort_by(|a, b| b.total_cmp(a));
        return d;
    }
    let p2 = (m[0][0] - q).powi(2) + (m[1][1] - q).powi(2) + (m[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let binv = 1.0 / p;
    let b = [
        [
            binv * (m[0][0] - q),
            binv * m[0][1],
            binv * m[0][2],
        ],
        [
            binv * m[0][1],
            binv * (m[1][1] - q),
            binv * m[1][2],
        ],
        [
            binv * m[0][2],
            binv * m[1][2],
            binv * (m[2][2] - q),
        ],
    ];
    let det_b = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
        - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let r = (det_b / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let e2 = 3.0 * q - e1 - e3;
    [e1, e2, e3]
}

/// Eigenvector for eigenvalue `lambda`: the largest cross product of two
/// rows of `A - lambda I`.
pub fn sym3_eigenvector(m: [[f64; 3]; 3], lambda: f64) -> [f64; 3] {
    let a = [
        [m[0][0] - lambda, m[0][1], m[0][2]],
        [m[1][0], m[1][1] - lambda, m[1][2]],
        [m[2][0], m[2][1], m[2][2] - lambda],
    ];
    let cross = |u: [f64; 3], v: [f64; 3]| {
        [
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        ]
    };
    let candidates = [cross(a[0], a[1]), cross(a[0], a[2]), cross(a[1], a[2])];
    let mut best = candidates[0];
    let norm2 = |v: [f64; 3]| v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    for c in candidates {
        if norm2(c) > norm2(best) {
            best = c;
        }
    }
    best
}

/// The 8 geometric features recomputed from first principles: raw-moment
/// covariance, analytic eigen-solve, explicit bounding box and face
/// enumeration. Mirrors the documented degenerate conventions.
pub fn geometry_reference(v: &Volume) -> [f64; 8] {
    let coords = v.masked_coords();
    let (sx, sy, sz) = v.spacing();
    let n = coords.len() as f64;
    let volume = n * sx * sy * sz;

    // Raw moments route: E[ab] - E[a]E[b].
    let mut s = [0.0f64; 3];
    let mut ss = [[0.0f64; 3]; 3];
    for &(x, y, z) in &coords {
        let c = [x as f64 * sx, y as f64 * sy, z as f64 * sz];
        for i in 0..3 {
            s[i] += c[i];
            for j in 0..3 {
                ss[i][j] += c[i] * c[j];
            }
        }
    }
    let mut cov = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            cov[i][j] = ss[i][j] / n - (s[i] / n) * (s[j] / n);
        }
    }
    let eig = sym3_eigenvalues(cov);
    let l1 = eig[0].max(0.0);
    let l3 = eig[2].max(0.0);
    let (major, minor, ecc, elong, orientation);
    if l1 <= 1e-24 {
        major = 0.0;
        minor = 0.0;
        ecc = 0.0;
        elong = 1.0;
        orientation = 0.0;
    } else {
        major = 4.0 * l1.sqrt();
        minor = 4.0 * l3.sqrt();
        ecc = (1.0 - l3 / l1).sqrt();
        elong = (l1 / l3.max(1e-12 * l1)).sqrt();
        let vv = sym3_eigenvector(cov, eig[0]);
        let norm = (vv[0] * vv[0] + vv[1] * vv[1] + vv[2] * vv[2]).sqrt();
        orientation = (vv[2].abs() / norm).clamp(0.0, 1.0).acos().to_degrees();
    }

    let (mut x0, mut y0, mut z0) = (usize::MAX, usize::MAX, usize::MAX);
    let (mut x1, mut y1, mut z1) = (0usize, 0usize, 0usize);
    for &(x, y, z) in &coords {
        x0 = x0.min(x);
        y0 = y0.min(y);
        z0 = z0.min(z);
        x1 = x1.max(x);
        y1 = y1.max(y);
        z1 = z1.max(z);
    }
    let bbox = ((x1 - x0 + 1) as f64 * sx)
        * ((y1 - y0 + 1) as f64 * sy)
        * ((z1 - z0 + 1) as f64 * sz);

    // Exposed faces by set membership.
    let set: std::collections::HashSet<(i64, i64, i64)> = coords
        .iter()
        .map(|&(x, y, z)| (x as i64, y as i64, z as i64))
        .collect();
    let mut perimeter = 0.0;
    for &(x, y, z) in &set {
        let deltas: [((i64, i64, i64), f64); 6] = [
            ((x - 1, y, z), sy * sz),
            ((x + 1, y, z), sy * sz),
            ((x, y - 1, z), sx * sz),
            ((x, y + 1, z), sx * sz),
            ((x, y, z - 1), sx * sy),
            ((x, y, z + 1), sx * sy),
        ];
        for (nb, area) in deltas {
            if !set.contains(&nb) {
                perimeter += area;
            }
        }
    }

    [volume, major, minor, ecc, elong, orientation, bbox, perimeter]
}

// ---------------------------------------------------------------------------
// Exact small-QP solver by active-set enumeration

/// Exact optimum of the SVM dual
/// `min 1/2 a'Qa - sum(a)  s.t.  y'a = 0, 0 <= a <= C`
/// with `Q_ij = y_i y_j K_ij`, by enumerating every active-set pattern
/// (each variable at 0, at C, or free) and solving the face-restricted
/// equality system. Returns the minimum objective over feasible faces.
/// Exponential in n; intended for n <= 8.
pub fn svm_dual_exact(k: &[f64], y: &[f64], c: f64) -> f64 {
    let n = y.len();
    assert!(n <= 8, "active-set enumeration oracle is for tiny problems");
    let q = |i: usize, j: usize| y[i] * y[j] * k[i * n + j];
    let mut best = f64::INFINITY;
    let patterns = 3usize.pow(n as u32);
    for pat in 0..patterns {
        let mut kind = vec![0u8; n]; // 0 = at 0, 1 = at C, 2 = free
        let mut rem = pat;
        for slot in kind.iter_mut() {
            *slot = (rem % 3) as u8;
            rem /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| kind[i] == 2).collect();
        let mut alpha = vec![0.0f64; n];
        for i in 0..n {
            if kind[i] == 1 {
                alpha[i] = c;
            }
        }
        if free.is_empty() {
            let balance: f64 = (0..n).map(|i| alpha[i] * y[i]).sum();
            if balance.abs() > 1e-9 {
                continue;
            }
        } else {
            // Solve [Q_FF y_F; y_F' 0] [a_F; nu] = [1 - Q_FB a_B; -y_B' a_B].
            let m = free.len() + 1;
            let mut mat = vec![0.0f64; m * m];
            let mut rhs = vec![0.0f64; m];
            for (r, &i) in free.iter().enumerate() {
                for (s2, &j) in free.iter().enumerate() {
                    mat[r * m + s2] = q(i, j);
                }
                mat[r * m + free.len()] = y[i];
                let fixed: f64 = (0..n)
                    .filter(|&j| kind[j] == 1)
                    .map(|j| q(i, j) * c)
                    .sum();
                rhs[r] = 1.0 - fixed;
            }
            for (s2, &j) in free.iter().enumerate() {
                mat[free.len() * m + s2] = y[j];
            }
            let fixed_balance: f64 = (0..n)
                .filter(|&j| kind[j] == 1)
                .map(|j| y[j] * c)
                .sum();
            rhs[free.len()] = -fixed_balance;
            let sol = match gaussian_solve(&mut mat, &mut rhs) {
                Some(s) => s,
                None => continue,
            };
            let mut ok = true;
            for (r, &i) in free.iter().enumerate() {
                let a = sol[r];
                if !(-1e-9..=c + 1e-9).contains(&a) {
                    ok = false;
                    break;
                }
                alpha[i] = a.clamp(0.0, c);
            }
            if !ok {
                continue;
            }
        }
        let mut obj = 0.0;
        for i in 0..n {
            if alpha[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                obj += 0.5 * alpha[i] * alpha[j] * q(i, j);
            }
            obj -= alpha[i];
        }
        best = best.min(obj);
    }
    best
}

// ---------------------------------------------------------------------------
// Finite-difference gradient checking

/// Central finite-difference check of a network's analytic gradients
/// through the softmax/cross-entropy loss, at f64 precision.
///
/// Returns the maximum relative error over all parameter coordinates and
/// all input coordinates, with per-coordinate relative error
/// `|analytic - fd| / max(|analytic|, |fd|, 1e-6)`.
pub fn finite_diff_gradcheck(
    spec: &crate::neural::ArchitectureSpec,
    seed: u64,
    h: f64,
) -> (f64, f64) {
    use crate::neural::{batch_loss, batch_loss_grad, Network};
    use rand::Rng;

    let mut net: Network<f64> = Network::new(spec.clone(), seed).expect("spec validates");
    let mut rng = crate::seed::rng(seed, "gradcheck-input", &[]);
    let x: Vec<f64> = (0..net.input_len())
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    let label = (seed % 2) as u8;
    let mut fwd_rng = crate::seed::rng(seed, "gradcheck-dropout", &[]);

    let mut loss_of = |net: &mut Network<f64>, x: &[f64]| -> f64 {
        let logits = net.forward_train(x, &mut fwd_rng).expect("forward");
        batch_loss(&[(logits[0], logits[1])], &[label])
    };

    net.zero_grads();
    let logits = {
        let mut fr = crate::seed::rng(seed, "gradcheck-dropout", &[]);
        net.forward_train(&x, &mut fr).expect("forward")
    };
    let dlog = batch_loss_grad(&[(logits[0], logits[1])], &[label]);
    let gx = net.backward(&[dlog[0].0, dlog[0].1]);
    let gp = net.flat_grads();

    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-6);

    let mut max_param_err = 0.0f64;
    let mut theta = net.flat_params();
    for i in 0..theta.len() {
        let orig = theta[i];
        theta[i] = orig + h;
        net.set_flat_params(&theta).unwrap();
        let lp = loss_of(&mut net, &x);
        theta[i] = orig - h;
        net.set_flat_params(&theta).unwrap();
        let lm = loss_of(&mut net, &x);
        theta[i] = orig;
        let fd = (lp - lm) / (2.0 * h);
        max_param_err = max_param_err.max(rel(gp[i], fd));
    }
    net.set_flat_params(&theta).unwrap();

    let mut max_input_err = 0.0f64;
    let mut xp = x.clone();
    for i in 0..xp.len() {
        let orig = xp[i];
        xp[i] = orig + h;
        let lp = loss_of(&mut net, &xp);
        xp[i] = orig - h;
        let lm = loss_of(&mut net, &xp);
        xp[i] = orig;
        let fd = (lp - lm) / (2.0 * h);
        max_input_err = max_input_err.max(rel(gx[i], fd));
    }
    (max_param_err, max_input_err)
}

/// Finite-difference check of the softmax + cross-entropy composite alone.
/// Returns the max relative error over both logit coordinates across the
/// given logit/label cases.
pub fn softmax_ce_gradcheck(cases: &[((f64, f64), u8)], h: f64) -> f64 {
    use crate::neural::{batch_loss, batch_loss_grad};
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-6);
    let mut max_err = 0.0f64;
    for &((y0, y1), q) in cases {
        let grad = batch_loss_grad(&[(y0, y1)], &[q])[0];
        let f0p = batch_loss(&[(y0 + h, y1)], &[q]);
        let f0m = batch_loss(&[(y0 - h, y1)], &[q]);
        let f1p = batch_loss(&[(y0, y1 + h)], &[q]);
        let f1m = batch_loss(&[(y0, y1 - h)], &[q]);
        max_err = max_err.max(rel(grad.0, (f0p - f0m) / (2.0 * h)));
        max_err = max_err.max(rel(grad.1, (f1p - f1m) / (2.0 * h)));
    }
    max_err
}

// ---------------------------------------------------------------------------
// Mann-Whitney pair counting

/// `U / (n_pos * n_neg)` by direct pair enumeration; ties count half.
pub fn mann_whitney_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let mut u = 0.0f64;
    let mut pairs = 0.0f64;
    for (i, (&si, &li)) in scores.iter().zip(labels).enumerate() {
        let _ = i;
        if li != 1 {
            continue;
        }
        for (&sj, &lj) in scores.iter().zip(labels) {
            if lj != 0 {
                continue;
            }
            pairs += 1.0;
            u += if si > sj {
                1.0
            } else if si == sj {
                0.5
            } else {
                0.0
            };
        }
    }
    u / pairs
}
