//! Built-in test sources on `V0`.

use core::f64::consts::PI;

use libm::{cos, exp};

use crate::forward::Source;
use crate::Point;

/// `1.1 exp(-200((x1 - 0.01)^2 + (x2 - 0.12)^2)) - 100(x2^2 - x1^2) exp(-90(x1^2 + x2^2))`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Mountain;

pub fn mountain(x: Point) -> f64 {
    let [x1, x2] = x;
    let bump = 1.1 * exp(-200.0 * ((x1 - 0.01) * (x1 - 0.01) + (x2 - 0.12) * (x2 - 0.12)));
    bump - 100.0 * (x2 * x2 - x1 * x1) * exp(-90.0 * (x1 * x1 + x2 * x2))
}

impl Source for Mountain {
    fn value(&self, x: Point) -> f64 {
        mountain(x)
    }
}

/// `Re phi_l(x) = cos(pi l.x / a)`, whose coefficients are `1/2` at `l` and `-l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisMode {
    pub l: [i32; 2],
    pub a: f64,
}

impl Source for BasisMode {
    fn value(&self, x: Point) -> f64 {
        cos(PI * (self.l[0] as f64 * x[0] + self.l[1] as f64 * x[1]) / self.a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant(pub f64);

impl Source for Constant {
    fn value(&self, _: Point) -> f64 {
        self.0
    }
}

/// `-S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Negated<S>(pub S);

impl<S: Source> Source for Negated<S> {
    fn value(&self, x: Point) -> f64 {
        -self.0.value(x)
    }
}
