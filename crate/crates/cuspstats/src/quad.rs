//! Adaptive Gauss-Kronrod quadrature in one and two dimensions.
//!
//! The 2D engine works on dyadic panels with a tensor G7/K15 rule per panel
//! and splits the panel with the largest Kronrod-Gauss difference. Summation
//! order is fixed by the panel tree, so results do not depend on scheduling.

/// Kronrod abscissae for the 15-point rule (positive half, descending).
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

/// Kronrod weights matching `XGK`.
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

/// 7-point Gauss weights; the Gauss nodes are `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Result of a quadrature with an a posteriori error estimate.
#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

/// Single G7/K15 evaluation on `[a, b]`: returns (kronrod, |kronrod - gauss|).
pub fn gk15<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        kron += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    ((kron * h), ((kron - gauss) * h).abs())
}

struct Panel1 {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// Adaptive 1D integration of `f` over `[a, b]`.
pub fn adaptive_1d<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_panels: usize,
) -> QuadResult {
    let (v, e) = gk15(&mut f, a, b);
    let mut panels = vec![Panel1 {
        a,
        b,
        value: v,
        error: e,
    }];
    loop {
        let total_err: f64 = panels.iter().map(|p| p.error).sum();
        if total_err <= tol || panels.len() >= max_panels {
            let value = panels.iter().map(|p| p.value).sum();
            return QuadResult {
                value,
                error: total_err,
                panels: panels.len(),
            };
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .unwrap();
        let p = panels.swap_remove(idx);
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            // interval at floating-point resolution; keep as is
            panels.push(p);
            let value = panels.iter().map(|q| q.value).sum();
            let error = panels.iter().map(|q| q.error).sum();
            return QuadResult {
                value,
                error,
                panels: panels.len(),
            };
        }
        let (v1, e1) = gk15(&mut f, p.a, m);
        let (v2, e2) = gk15(&mut f, m, p.b);
        panels.push(Panel1 {
            a: p.a,
            b: m,
            value: v1,
            error: e1,
        });
        panels.push(Panel1 {
            a: m,
            b: p.b,
            value: v2,
            error: e2,
        });
    }
}

/// Adaptive 1D integration over a union of disjoint intervals.
pub fn adaptive_1d_pieces<F: FnMut(f64) -> f64>(
    mut f: F,
    pieces: &[(f64, f64)],
    tol: f64,
    max_panels: usize,
) -> QuadResult {
    let mut value = 0.0;
    let mut error = 0.0;
    let mut panels = 0;
    let n = pieces.len().max(1);
    for &(a, b) in pieces {
        let r = adaptive_1d(&mut f, a, b, tol / n as f64, max_panels / n);
        value += r.value;
        error += r.error;
        panels += r.panels;
    }
    QuadResult {
        value,
        error,
        panels,
    }
}

struct Panel2 {
    ax: f64,
    bx: f64,
    ay: f64,
    by: f64,
    value: f64,
    error: f64,
}

fn gk15_tensor<F: FnMut(f64, f64) -> f64>(f: &mut F, p: (f64, f64, f64, f64)) -> (f64, f64) {
    let (ax, bx, ay, by) = p;
    let cx = 0.5 * (ax + bx);
    let hx = 0.5 * (bx - ax);
    let cy = 0.5 * (ay + by);
    let hy = 0.5 * (by - ay);

    let mut nodes_x = [0.0f64; 15];
    let mut nodes_y = [0.0f64; 15];
    for j in 0..7 {
        nodes_x[j] = cx - hx * XGK[j];
        nodes_x[14 - j] = cx + hx * XGK[j];
        nodes_y[j] = cy - hy * XGK[j];
        nodes_y[14 - j] = cy + hy * XGK[j];
    }
    nodes_x[7] = cx;
    nodes_y[7] = cy;

    let mut wk = [0.0f64; 15];
    let mut wg = [0.0f64; 15];
    for j in 0..7 {
        wk[j] = WGK[j];
        wk[14 - j] = WGK[j];
        if j % 2 == 1 {
            wg[j] = WG[j / 2];
            wg[14 - j] = WG[j / 2];
        }
    }
    wk[7] = WGK[7];
    wg[7] = WG[3];

    let mut kron = 0.0;
    let mut gauss = 0.0;
    for (i, &x) in nodes_x.iter().enumerate() {
        let mut row_k = 0.0;
        let mut row_g = 0.0;
        for (j, &y) in nodes_y.iter().enumerate() {
            let v = f(x, y);
            row_k += wk[j] * v;
            row_g += wg[j] * v;
        }
        kron += wk[i] * row_k;
        gauss += wg[i] * row_g;
    }
    (kron * hx * hy, ((kron - gauss) * hx * hy).abs())
}

/// Adaptive 2D integration of `f` over the rectangle `[ax,bx] x [ay,by]`.
///
/// `seams` lists interior x- (and symmetrically y-) coordinates where the
/// integrand is non-smooth; the initial panel layout splits there.
pub fn adaptive_2d<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    (ax, bx, ay, by): (f64, f64, f64, f64),
    seams: &[f64],
    tol: f64,
    max_panels: usize,
) -> QuadResult {
    let mut xs: Vec<f64> = vec![ax, bx];
    let mut ys: Vec<f64> = vec![ay, by];
    for &s in seams {
        if s > ax && s < bx {
            xs.push(s);
        }
        if s > ay && s < by {
            ys.push(s);
        }
    }
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);

    let mut panels: Vec<Panel2> = Vec::new();
    for wx in xs.windows(2) {
        for wy in ys.windows(2) {
            let (v, e) = gk15_tensor(&mut f, (wx[0], wx[1], wy[0], wy[1]));
            panels.push(Panel2 {
                ax: wx[0],
                bx: wx[1],
                ay: wy[0],
                by: wy[1],
                value: v,
                error: e,
            });
        }
    }

    loop {
        let total_err: f64 = panels.iter().map(|p| p.error).sum();
        if total_err <= tol || panels.len() >= max_panels {
            let value = panels.iter().map(|p| p.value).sum();
            return QuadResult {
                value,
                error: total_err,
                panels: panels.len(),
            };
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .unwrap();
        let p = panels.swap_remove(idx);
        let wx = p.bx - p.ax;
        let wy = p.by - p.ay;
        if wx.max(wy) < 1e-14 * (1.0 + p.ax.abs() + p.ay.abs()) {
            panels.push(p);
            let value = panels.iter().map(|q| q.value).sum();
            let error = panels.iter().map(|q| q.error).sum();
            return QuadResult {
                value,
                error,
                panels: panels.len(),
            };
        }
        if wx >= wy {
            let m = 0.5 * (p.ax + p.bx);
            for (a, b) in [(p.ax, m), (m, p.bx)] {
                let (v, e) = gk15_tensor(&mut f, (a, b, p.ay, p.by));
                panels.push(Panel2 {
                    ax: a,
                    bx: b,
                    ay: p.ay,
                    by: p.by,
                    value: v,
                    error: e,
                });
            }
        } else {
            let m = 0.5 * (p.ay + p.by);
            for (a, b) in [(p.ay, m), (m, p.by)] {
                let (v, e) = gk15_tensor(&mut f, (p.ax, p.bx, a, b));
                panels.push(Panel2 {
                    ax: p.ax,
                    bx: p.bx,
                    ay: a,
                    by: b,
                    value: v,
                    error: e,
                });
            }
        }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, computed by Newton
/// iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    for i in 0..(n + 1) / 2 {
        // Tricomi initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..60 {
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk15_polynomial_exactness() {
        // Kronrod 15 integrates polynomials up to degree 22 exactly.
        for deg in [0usize, 3, 8, 13, 21] {
            let (v, _) = gk15(|x| x.powi(deg as i32), 0.0, 1.0);
            let exact = 1.0 / (deg as f64 + 1.0);
            assert!(
                (v - exact).abs() < 1e-14,
                "degree {deg}: got {v}, want {exact}"
            );
        }
    }

    #[test]
    fn adaptive_sqrt_singularity() {
        let r = adaptive_1d(|x| x.sqrt(), 0.0, 1.0, 1e-12, 2000);
        assert!((r.value - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn adaptive_2d_gaussian() {
        let r = adaptive_2d(
            |x, y| (-x * x - y * y).exp(),
            (-6.0, 6.0, -6.0, 6.0),
            &[0.0],
            1e-10,
            4000,
        );
        assert!((r.value - std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn gauss_legendre_exactness() {
        for n in [4usize, 5, 6, 8] {
            let (x, w) = gauss_legendre(n);
            // exact for degree 2n-1
            let deg = 2 * n - 1;
            let num: f64 = x
                .iter()
                .zip(&w)
                .map(|(&xi, &wi)| wi * xi.powi(deg as i32 - 1))
                .sum();
            let exact = 2.0 / deg as f64; // integral of x^(deg-1) over [-1,1], deg-1 even
            assert!((num - exact).abs() < 1e-13, "n = {n}");
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        }
    }
}
