//! Truncated Taylor series in one variable.
//!
//! A [`Jet`] stores `c[k] = f^(k)(t0) / k!` for `k <= ORDER`. Arithmetic and
//! the elementary functions propagate all coefficients, so a formula written
//! once yields the value and its first few derivatives.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub const ORDER: usize = 6;
const N: usize = ORDER + 1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub c: [f64; N],
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = v;
        Jet { c }
    }

    /// The independent variable at `t0`.
    pub fn variable(t0: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = t0;
        c[1] = 1.0;
        Jet { c }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// k-th derivative.
    pub fn derivative(&self, k: usize) -> f64 {
        let mut f = 1.0;
        for i in 2..=k {
            f *= i as f64;
        }
        self.c[k] * f
    }

    /// Series of the derivative. The top coefficient is lost.
    pub fn deriv(&self) -> Self {
        let mut c = [0.0; N];
        for k in 0..ORDER {
            c[k] = (k + 1) as f64 * self.c[k + 1];
        }
        Jet { c }
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.is_finite())
    }

    /// `g(self)` given `derivs[k] = g^(k)(self.value())`.
    pub fn compose(&self, derivs: &[f64; N]) -> Self {
        let mut delta = *self;
        delta.c[0] = 0.0;
        let mut out = Jet::constant(derivs[0]);
        let mut pow = Jet::constant(1.0);
        let mut fact = 1.0;
        for (k, d) in derivs.iter().enumerate().skip(1) {
            pow = pow * delta;
            fact *= k as f64;
            out = out + pow * (d / fact);
        }
        out
    }

    pub fn recip(&self) -> Self {
        Jet::constant(1.0) / *self
    }

    pub fn exp(&self) -> Self {
        self.compose(&[self.c[0].exp(); N])
    }

    pub fn ln(&self) -> Self {
        let x = self.c[0];
        let mut d = [0.0; N];
        d[0] = x.ln();
        let mut f = 1.0;
        for (k, dk) in d.iter_mut().enumerate().skip(1) {
            // (-1)^(k-1) (k-1)! / x^k
            *dk = f / x.powi(k as i32);
            f *= -(k as f64);
        }
        self.compose(&d)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.c[0].sin_cos();
        let cyc = [s, c, -s, -c];
        self.compose(&std::array::from_fn(|k| cyc[k % 4]))
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.c[0].sin_cos();
        let cyc = [c, -s, -c, s];
        self.compose(&std::array::from_fn(|k| cyc[k % 4]))
    }

    pub fn powf(&self, a: f64) -> Self {
        let x = self.c[0];
        let mut d = [0.0; N];
        let mut coef = 1.0;
        for (k, dk) in d.iter_mut().enumerate() {
            *dk = coef * x.powf(a - k as f64);
            coef *= a - k as f64;
        }
        self.compose(&d)
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn powi(&self, n: i32) -> Self {
        let mut out = Jet::constant(1.0);
        for _ in 0..n.unsigned_abs() {
            out = out * *self;
        }
        if n < 0 {
            out.recip()
        } else {
            out
        }
    }

    pub fn tanh(&self) -> Self {
        // derivatives of tanh are polynomials in T = tanh; d/dx P(T) = P'(T)(1 - T^2)
        let t = self.c[0].tanh();
        let mut poly = vec![0.0, 1.0];
        let mut d = [0.0; N];
        for dk in d.iter_mut() {
            *dk = poly.iter().rev().fold(0.0, |acc, &a| acc * t + a);
            let mut next = vec![0.0; poly.len() + 2];
            for (i, &a) in poly.iter().enumerate().skip(1) {
                next[i - 1] += i as f64 * a;
                next[i + 1] -= i as f64 * a;
            }
            poly = next;
        }
        self.compose(&d)
    }

    /// sech^2 = 1 - tanh^2, evaluated without cancellation for large arguments.
    pub fn sech2(&self) -> Self {
        let x = self.c[0];
        let th = self.tanh();
        let mut out = Jet::constant(1.0) - th * th;
        let e = (-2.0 * x.abs()).exp();
        out.c[0] = 4.0 * e / ((1.0 + e) * (1.0 + e));
        out
    }
}

impl From<f64> for Jet {
    fn from(v: f64) -> Self {
        Jet::constant(v)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet { c: std::array::from_fn(|k| self.c[k] + o.c[k]) }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet { c: std::array::from_fn(|k| self.c[k] - o.c[k]) }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet { c: self.c.map(|v| -v) }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut c = [0.0; N];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().take(N - i).enumerate() {
                c[i + j] += a * b;
            }
        }
        Jet { c }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let mut q = [0.0; N];
        for k in 0..N {
            let mut s = self.c[k];
            for j in 1..=k {
                s -= o.c[j] * q[k - j];
            }
            q[k] = s / o.c[0];
        }
        Jet { c: q }
    }
}

macro_rules! scalar_ops {
    ($($tr:ident $f:ident),*) => {$(
        impl $tr<f64> for Jet {
            type Output = Jet;
            fn $f(self, o: f64) -> Jet { self.$f(Jet::constant(o)) }
        }
        impl $tr<Jet> for f64 {
            type Output = Jet;
            fn $f(self, o: Jet) -> Jet { Jet::constant(self).$f(o) }
        }
    )*};
}
scalar_ops!(Add add, Sub sub, Mul mul, Div div);

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(f: impl Fn(f64) -> f64, x: f64, k: usize) -> f64 {
        let h = 1e-3;
        match k {
            1 => (f(x + h) - f(x - h)) / (2.0 * h),
            2 => (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h),
            _ => unreachable!(),
        }
    }

    #[test]
    fn elementary_derivatives_match_finite_differences() {
        let cases: Vec<(Box<dyn Fn(Jet) -> Jet>, Box<dyn Fn(f64) -> f64>)> = vec![
            (Box::new(|x: Jet| x.sin() * x.exp()), Box::new(|x: f64| x.sin() * x.exp())),
            (Box::new(|x: Jet| x.ln() / x.cos()), Box::new(|x: f64| x.ln() / x.cos())),
            (Box::new(|x: Jet| x.tanh().powi(3)), Box::new(|x: f64| x.tanh().powi(3))),
            (Box::new(|x: Jet| x.powf(-1.3) + x.sqrt()), Box::new(|x: f64| x.powf(-1.3) + x.sqrt())),
            (Box::new(|x: Jet| x.sech2()), Box::new(|x: f64| 1.0 / x.cosh().powi(2))),
        ];
        for (fj, ff) in &cases {
            for &x in &[0.4, 0.9, 1.2] {
                let j = fj(Jet::variable(x));
                assert!((j.value() - ff(x)).abs() < 1e-14);
                assert!((j.derivative(1) - fd(ff, x, 1)).abs() < 1e-5 * (1.0 + j.derivative(1).abs()));
                assert!((j.derivative(2) - fd(ff, x, 2)).abs() < 1e-4 * (1.0 + j.derivative(2).abs()));
            }
        }
    }

    #[test]
    fn high_order_exact_for_exp() {
        let j = (Jet::variable(0.3) * 2.0).exp();
        for k in 0..=ORDER {
            let want = 2f64.powi(k as i32) * 0.6f64.exp();
            assert!((j.derivative(k) - want).abs() < 1e-11 * want);
        }
    }

    #[test]
    fn tanh_derivatives() {
        let j = Jet::variable(0.5).tanh();
        let t = 0.5f64.tanh();
        let s2 = 1.0 - t * t;
        assert!((j.derivative(1) - s2).abs() < 1e-15);
        assert!((j.derivative(2) + 2.0 * t * s2).abs() < 1e-15);
        assert!((j.derivative(3) - (-2.0 * s2 * s2 + 4.0 * t * t * s2)).abs() < 1e-14);
    }
}
