//! Independent finite-difference solver for the radial Dirichlet problem in
//! the original variable `u`:
//!
//! `W(u″ + g(u)u′²) + (n−1)W(u′/r) + f(u) = 0` on `[0, R)`, `u′(0) = 0`,
//! `u(R) = 0`, with `W` the one-dimensional Pucci weighting.
//!
//! Centered differences on a uniform grid, solved with semi-smooth Newton
//! (the generalized derivative of `W` is its active weight) and a
//! tridiagonal Thomas sweep. Shares no code with the shooting solver.

#![allow(dead_code)]

use pucci_lab::expr::GradientPair;
use pucci_lab::pucci::{Ellipticity, OperatorSign};

fn slopes(ell: &Ellipticity, sign: OperatorSign) -> (f64, f64) {
    let (l, big) = (ell.lambda(), ell.big_lambda());
    match sign {
        OperatorSign::Plus => (big, l),
        OperatorSign::Minus => (l, big),
    }
}

fn w(x: f64, pos: f64, neg: f64) -> (f64, f64) {
    if x > 0.0 {
        (pos * x, pos)
    } else {
        (neg * x, neg)
    }
}

fn thomas(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    cp[0] = c[0] / b[0];
    dp[0] = d[0] / b[0];
    for i in 1..n {
        let m = b[i] - a[i] * cp[i - 1];
        cp[i] = c[i] / m;
        dp[i] = (d[i] - a[i] * dp[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    x
}

fn deriv(f: &dyn Fn(f64) -> f64, u: f64) -> f64 {
    let h = 1e-6 * u.abs().max(1.0);
    (f(u + h) - f(u - h)) / (2.0 * h)
}

/// Returns `(r_i, u_i)` on `intervals + 1` uniform nodes over `[0, R]`.
pub fn collocate(
    pair: &GradientPair,
    ell: &Ellipticity,
    sign: OperatorSign,
    radius: f64,
    intervals: usize,
    amp_guess: f64,
) -> Vec<(f64, f64)> {
    let g = |u: f64| pair.g_at(u).expect("g evaluates");
    let f = |u: f64| pair.f_at(u).expect("f evaluates");
    let (pos, neg) = slopes(ell, sign);
    let n = ell.n() as f64;
    let k = n - 1.0;
    let dr = radius / intervals as f64;
    let m = intervals;
    let rs: Vec<f64> = (0..=m).map(|i| i as f64 * dr).collect();
    let mut u: Vec<f64> = rs.iter().map(|r| amp_guess * (1.0 - (r / radius).powi(2))).collect();

    for _ in 0..100 {
        let (mut a, mut b, mut c, mut rhs) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
        let mut worst = 0.0f64;
        for i in 0..m {
            let ui = u[i];
            if i == 0 {
                let x = 2.0 * (u[1] - u[0]) / (dr * dr);
                let (wx, dw) = w(x, pos, neg);
                let fi = n * wx + f(ui);
                b[0] = -2.0 * n * dw / (dr * dr) + deriv(&f, ui);
                c[0] = 2.0 * n * dw / (dr * dr);
                rhs[0] = -fi;
                worst = worst.max(fi.abs());
                continue;
            }
            let (um, up) = (u[i - 1], u[i + 1]);
            let d1 = (up - um) / (2.0 * dr);
            let d2 = (up - 2.0 * ui + um) / (dr * dr);
            let gi = g(ui);
            let (wx, dwx) = w(d2 + gi * d1 * d1, pos, neg);
            let (wy, dwy) = w(d1 / rs[i], pos, neg);
            let fi = wx + k * wy + f(ui);
            let grad = gi * d1 / dr;
            a[i] = dwx * (1.0 / (dr * dr) - grad) - k * dwy / (2.0 * dr * rs[i]);
            b[i] = dwx * (-2.0 / (dr * dr) + deriv(&g, ui) * d1 * d1) + deriv(&f, ui);
            c[i] = dwx * (1.0 / (dr * dr) + grad) + k * dwy / (2.0 * dr * rs[i]);
            rhs[i] = -fi;
            worst = worst.max(fi.abs());
        }
        // u[m] = 0 is fixed, so the last superdiagonal entry drops out.
        c[m - 1] = 0.0;
        let delta = thomas(&a, &b, &c, &rhs);
        let step = delta.iter().fold(0.0f64, |s, d| s.max(d.abs()));
        for i in 0..m {
            u[i] += delta[i];
        }
        let scale = u.iter().fold(0.0f64, |s, x| s.max(x.abs()));
        if step <= 1e-13 * scale.max(1.0) && worst < 1e-6 {
            break;
        }
    }
    rs.into_iter().zip(u).collect()
}
