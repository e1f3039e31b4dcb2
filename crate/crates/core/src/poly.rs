//! Dense univariate polynomials, real root isolation and the resultant of two
//! polynomials that are at most quadratic in a second variable.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

/// Coefficients in ascending order: `c[0] + c[1] x + …`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    pub c: Vec<f64>,
}

impl Poly {
    pub fn new(c: Vec<f64>) -> Self {
        Self { c }
    }

    pub fn constant(v: f64) -> Self {
        Self { c: vec![v] }
    }

    pub fn linear(c0: f64, c1: f64) -> Self {
        Self { c: vec![c0, c1] }
    }

    pub fn from_roots(roots: &[f64], lead: f64) -> Self {
        roots
            .iter()
            .fold(Self::constant(lead), |p, &r| &p * &Self::linear(-r, 1.0))
    }

    /// Degree after dropping leading coefficients that are exactly zero or
    /// negligible against the largest coefficient. `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        let scale = self.c.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return None;
        }
        self.c.iter().rposition(|v| v.abs() > scale * 1e-14)
    }

    pub fn trimmed(&self) -> Self {
        match self.degree() {
            Some(d) => Self { c: self.c[..=d].to_vec() },
            None => Self { c: Vec::new() },
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, &v| acc * x + v)
    }

    pub fn derivative(&self) -> Self {
        Self {
            c: self.c.iter().enumerate().skip(1).map(|(i, &v)| i as f64 * v).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            c: self.c.iter().map(|v| v * s).collect(),
        }
    }

    /// All real roots, ascending, double roots reported once.
    pub fn real_roots(&self) -> Vec<f64> {
        let p = self.trimmed();
        match p.c.len() {
            0 | 1 => Vec::new(),
            2 => vec![-p.c[0] / p.c[1]],
            3 => quadratic_roots(p.c[2], p.c[1], p.c[0]),
            _ => p.isolate_roots(),
        }
    }

    fn isolate_roots(&self) -> Vec<f64> {
        let n = self.c.len() - 1;
        let lead = self.c[n];
        let bound = 1.0 + self.c[..n].iter().fold(0.0_f64, |m, v| m.max((v / lead).abs()));
        let mut knots = vec![-bound];
        knots.extend(
            self.derivative()
                .real_roots()
                .into_iter()
                .filter(|r| r.abs() < bound),
        );
        knots.push(bound);
        let scale = self.c.iter().fold(0.0_f64, |m, v| m.max(v.abs()));

        let mut roots = Vec::new();
        for w in knots.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (fa, fb) = (self.eval(a), self.eval(b));
            if fa == 0.0 {
                push_unique(&mut roots, a);
            } else if fa.signum() != fb.signum() && fb != 0.0 {
                push_unique(&mut roots, self.bracketed_root(a, b));
            }
        }
        // touching roots at critical points (even multiplicity)
        for &x in &knots[1..knots.len() - 1] {
            let fx = self.eval(x);
            let mag = self
                .c
                .iter()
                .enumerate()
                .map(|(i, v)| (v * powi(x, i)).abs())
                .sum::<f64>()
                .max(scale * 1e-300);
            if fx.abs() <= 1e-12 * mag {
                push_unique(&mut roots, x);
            }
        }
        if self.eval(knots[knots.len() - 1]) == 0.0 {
            push_unique(&mut roots, knots[knots.len() - 1]);
        }
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
        roots
    }

    /// Safeguarded Newton on a sign-change bracket.
    fn bracketed_root(&self, mut a: f64, mut b: f64) -> f64 {
        let d = self.derivative();
        let fa_sign = self.eval(a).signum();
        let mut x = 0.5 * (a + b);
        for _ in 0..200 {
            let fx = self.eval(x);
            if fx == 0.0 {
                return x;
            }
            if fx.signum() == fa_sign {
                a = x;
            } else {
                b = x;
            }
            let dx = d.eval(x);
            let newton = x - fx / dx;
            x = if dx != 0.0 && newton > a && newton < b { newton } else { 0.5 * (a + b) };
            if (b - a).abs() <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
                break;
            }
        }
        x
    }
}

fn powi(x: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, _| acc * x)
}

fn push_unique(roots: &mut Vec<f64>, r: f64) {
    if !roots.iter().any(|&q| (q - r).abs() <= 1e-12 * (1.0 + r.abs())) {
        roots.push(r);
    }
}

/// Real roots of `a x² + b x + c`, ascending, using the cancellation-free form.
pub fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        return if b == 0.0 { Vec::new() } else { vec![-c / b] };
    }
    let disc = b * b - 4.0 * a * c;
    let tol = 1e-14 * (b * b + (4.0 * a * c).abs());
    if disc < -tol {
        return Vec::new();
    }
    if disc <= tol {
        return vec![-b / (2.0 * a)];
    }
    let q = -0.5 * (b + b.signum() * crate::math::sqrt(disc));
    let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / a, c / q) };
    if r1 < r2 { vec![r1, r2] } else { vec![r2, r1] }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.c.len().max(rhs.c.len());
        Poly {
            c: (0..n)
                .map(|i| self.c.get(i).copied().unwrap_or(0.0) + rhs.c.get(i).copied().unwrap_or(0.0))
                .collect(),
        }
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1.0)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.c.is_empty() || rhs.c.is_empty() {
            return Poly::default();
        }
        let mut c = vec![0.0; self.c.len() + rhs.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in rhs.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly { c }
    }
}

/// `q0(x) + q1(x) y + q2(x) y²`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticInY {
    pub q: [Poly; 3],
}

impl QuadraticInY {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.q[0].eval(x) + y * (self.q[1].eval(x) + y * self.q[2].eval(x))
    }

    pub fn partials(&self, x: f64, y: f64) -> (f64, f64) {
        let dx = self.q[0].derivative().eval(x)
            + y * (self.q[1].derivative().eval(x) + y * self.q[2].derivative().eval(x));
        let dy = self.q[1].eval(x) + 2.0 * y * self.q[2].eval(x);
        (dx, dy)
    }

    fn degree_in_y(&self) -> Option<usize> {
        (0..3).rev().find(|&i| self.q[i].degree().is_some())
    }

    /// Real roots in `y` at fixed `x`.
    pub fn roots_in_y(&self, x: f64) -> Vec<f64> {
        Poly::new(vec![self.q[0].eval(x), self.q[1].eval(x), self.q[2].eval(x)]).real_roots()
    }
}

/// Sylvester resultant eliminating `y`, sized by the actual `y`-degrees.
///
/// Returns `None` when either polynomial is identically zero. A constant
/// nonzero resultant means no common root.
pub fn resultant_y(f: &QuadraticInY, g: &QuadraticInY) -> Option<Poly> {
    let df = f.degree_in_y()?;
    let dg = g.degree_in_y()?;
    let [a0, a1, a2] = &f.q;
    let [b0, b1, b2] = &g.q;
    let r = match (df, dg) {
        (0, _) => a0.clone(),
        (_, 0) => b0.clone(),
        (1, 1) => &(a1 * b0) - &(a0 * b1),
        (2, 1) => {
            // a2 b0² − a1 b0 b1 + a0 b1²
            let t1 = &(a2 * b0) * b0;
            let t2 = &(a1 * b0) * b1;
            let t3 = &(a0 * b1) * b1;
            &(&t1 - &t2) + &t3
        }
        (1, 2) => {
            let t1 = &(b2 * a0) * a0;
            let t2 = &(b1 * a0) * a1;
            let t3 = &(b0 * a1) * a1;
            &(&t1 - &t2) + &t3
        }
        _ => {
            // (a2 b0 − a0 b2)² − (a2 b1 − a1 b2)(a1 b0 − a0 b1)
            let u = &(a2 * b0) - &(a0 * b2);
            let v = &(a2 * b1) - &(a1 * b2);
            let w = &(a1 * b0) - &(a0 * b1);
            &(&u * &u) - &(&v * &w)
        }
    };
    Some(r)
}

/// Common real roots `(x, y)` of two polynomials at most quadratic in `y`,
/// polished by Newton's method on the 2×2 system. Only the zero-dimensional
/// case is handled (finitely many common roots).
pub fn common_roots(f: &QuadraticInY, g: &QuadraticInY) -> Vec<(f64, f64)> {
    let Some(res) = resultant_y(f, g) else {
        return Vec::new();
    };
    let mut out: Vec<(f64, f64)> = Vec::new();
    for x in res.real_roots() {
        let mut ys = g.roots_in_y(x);
        ys.extend(f.roots_in_y(x));
        // pick y values that annihilate both polynomials
        let scale_f = residual_scale(f, x);
        let scale_g = residual_scale(g, x);
        for y in ys {
            let (xp, yp) = newton_polish(f, g, x, y);
            let rf = f.eval(xp, yp).abs() / residual_scale(f, xp).max(scale_f);
            let rg = g.eval(xp, yp).abs() / residual_scale(g, xp).max(scale_g);
            if rf < 1e-8 && rg < 1e-8 && !out.iter().any(|&(a, b)| (a - xp).abs() <= 1e-10 * (1.0 + xp.abs()) && (b - yp).abs() <= 1e-10 * (1.0 + yp.abs())) {
                out.push((xp, yp));
            }
        }
    }
    out
}

fn residual_scale(f: &QuadraticInY, x: f64) -> f64 {
    let mut s = 0.0_f64;
    for q in &f.q {
        for (i, v) in q.c.iter().enumerate() {
            s = s.max((v * powi(x, i)).abs());
        }
    }
    s.max(f64::MIN_POSITIVE)
}

fn newton_polish(f: &QuadraticInY, g: &QuadraticInY, mut x: f64, mut y: f64) -> (f64, f64) {
    for _ in 0..8 {
        let (fv, gv) = (f.eval(x, y), g.eval(x, y));
        let (fx, fy) = f.partials(x, y);
        let (gx, gy) = g.partials(x, y);
        let det = fx * gy - fy * gx;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dx = (fv * gy - fy * gv) / det;
        let dy = (fx * gv - fv * gx) / det;
        let (nx, ny) = (x - dx, y - dy);
        // only accept steps that do not increase the residual
        let before = fv.abs() / residual_scale(f, x) + gv.abs() / residual_scale(g, x);
        let after = f.eval(nx, ny).abs() / residual_scale(f, nx) + g.eval(nx, ny).abs() / residual_scale(g, nx);
        if !(after <= before) {
            break;
        }
        x = nx;
        y = ny;
        if dx.abs() <= 1e-16 * (1.0 + x.abs()) && dy.abs() <= 1e-16 * (1.0 + y.abs()) {
            break;
        }
    }
    (x, y)
}
