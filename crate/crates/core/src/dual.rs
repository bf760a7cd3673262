//! Forward-mode dual numbers.
//!
//! The gait model is written once over [`Dual`], so evaluating a position at
//! `Dual::variable(t)` yields the exact time derivative alongside the value.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub re: f64,
    pub eps: f64,
}

impl Dual {
    pub const fn constant(re: f64) -> Self {
        Self { re, eps: 0.0 }
    }

    pub const fn variable(re: f64) -> Self {
        Self { re, eps: 1.0 }
    }

    pub fn sin(self) -> Self {
        Self {
            re: self.re.sin(),
            eps: self.eps * self.re.cos(),
        }
    }

    pub fn cos(self) -> Self {
        Self {
            re: self.re.cos(),
            eps: -self.eps * self.re.sin(),
        }
    }

    pub fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        Self {
            re: s,
            eps: self.eps / (2.0 * s),
        }
    }

    pub fn exp(self) -> Self {
        let e = self.re.exp();
        Self {
            re: e,
            eps: self.eps * e,
        }
    }

    pub fn ln(self) -> Self {
        Self {
            re: self.re.ln(),
            eps: self.eps / self.re,
        }
    }

    pub fn acos(self) -> Self {
        Self {
            re: self.re.acos(),
            eps: -self.eps / (1.0 - self.re * self.re).sqrt(),
        }
    }

    pub fn atan2(self, x: Self) -> Self {
        let d = x.re * x.re + self.re * self.re;
        Self {
            re: self.re.atan2(x.re),
            eps: (x.re * self.eps - self.re * x.eps) / d,
        }
    }

    pub fn powi(self, n: i32) -> Self {
        Self {
            re: self.re.powi(n),
            eps: self.eps * f64::from(n) * self.re.powi(n - 1),
        }
    }

    /// `ln(1 + e^x)`, evaluated without overflow.
    pub fn softplus(self) -> Self {
        let re = if self.re > 30.0 {
            self.re
        } else {
            self.re.exp().ln_1p()
        };
        let sigmoid = 1.0 / (1.0 + (-self.re).exp());
        Self {
            re,
            eps: self.eps * sigmoid,
        }
    }
}

impl From<f64> for Dual {
    fn from(re: f64) -> Self {
        Self::constant(re)
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, rhs: Dual) -> Dual {
        Dual {
            re: self.re + rhs.re,
            eps: self.eps + rhs.eps,
        }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, rhs: Dual) -> Dual {
        Dual {
            re: self.re - rhs.re,
            eps: self.eps - rhs.eps,
        }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, rhs: Dual) -> Dual {
        Dual {
            re: self.re * rhs.re,
            eps: self.re * rhs.eps + self.eps * rhs.re,
        }
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, rhs: Dual) -> Dual {
        Dual {
            re: self.re / rhs.re,
            eps: (self.eps * rhs.re - self.re * rhs.eps) / (rhs.re * rhs.re),
        }
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual {
            re: -self.re,
            eps: -self.eps,
        }
    }
}

impl Add<f64> for Dual {
    type Output = Dual;
    fn add(self, rhs: f64) -> Dual {
        Dual {
            re: self.re + rhs,
            eps: self.eps,
        }
    }
}

impl Sub<f64> for Dual {
    type Output = Dual;
    fn sub(self, rhs: f64) -> Dual {
        Dual {
            re: self.re - rhs,
            eps: self.eps,
        }
    }
}

impl Mul<f64> for Dual {
    type Output = Dual;
    fn mul(self, rhs: f64) -> Dual {
        Dual {
            re: self.re * rhs,
            eps: self.eps * rhs,
        }
    }
}

impl Div<f64> for Dual {
    type Output = Dual;
    fn div(self, rhs: f64) -> Dual {
        Dual {
            re: self.re / rhs,
            eps: self.eps / rhs,
        }
    }
}

impl Add<Dual> for f64 {
    type Output = Dual;
    fn add(self, rhs: Dual) -> Dual {
        rhs + self
    }
}

impl Sub<Dual> for f64 {
    type Output = Dual;
    fn sub(self, rhs: Dual) -> Dual {
        Dual {
            re: self - rhs.re,
            eps: -rhs.eps,
        }
    }
}

impl Mul<Dual> for f64 {
    type Output = Dual;
    fn mul(self, rhs: Dual) -> Dual {
        rhs * self
    }
}

/// Point or direction in the walker frame: x forward (away from the radar),
/// y to the walker's left, z up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec3 {
    pub x: Dual,
    pub y: Dual,
    pub z: Dual,
}

impl Vec3 {
    pub fn new(x: impl Into<Dual>, y: impl Into<Dual>, z: impl Into<Dual>) -> Self {
        Self {
            x: x.into(),
            y: y.into(),
            z: z.into(),
        }
    }

    pub fn dot(self, o: Vec3) -> Dual {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(self) -> Dual {
        self.dot(self).sqrt()
    }

    pub fn scale(self, s: impl Into<Dual>) -> Vec3 {
        let s = s.into();
        Vec3 {
            x: self.x * s,
            y: self.y * s,
            z: self.z * s,
        }
    }

    pub fn midpoint(self, o: Vec3) -> Vec3 {
        (self + o).scale(0.5)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3 {
            x: self.x + o.x,
            y: self.y + o.y,
            z: self.z + o.z,
        }
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3 {
            x: self.x - o.x,
            y: self.y - o.y,
            z: self.z - o.z,
        }
    }
}
