//! Nodal field containers shared by every surface discretization.

use std::ops::{Deref, DerefMut};

use num_complex::Complex64;

/// Real values, one per grid node.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField(pub Vec<f64>);

/// Complex values, one per grid node.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField(pub Vec<Complex64>);

/// Real-coefficient 1-form in the orthonormal chart frame `(e1, e2)`.
///
/// Imaginary-valued forms (connections) store the coefficient of `i`, so
/// `alpha = i (c1 e^1 + c2 e^2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneForm {
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
}

/// Complex-valued 1-form in the orthonormal chart frame.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexOneForm {
    pub c1: Vec<Complex64>,
    pub c2: Vec<Complex64>,
}

/// Coefficient of a 2-form against the volume form.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoFormDensity(pub Vec<f64>);

macro_rules! vec_newtype {
    ($name:ident, $elem:ty) => {
        impl Deref for $name {
            type Target = Vec<$elem>;
            fn deref(&self) -> &Vec<$elem> {
                &self.0
            }
        }
        impl DerefMut for $name {
            fn deref_mut(&mut self) -> &mut Vec<$elem> {
                &mut self.0
            }
        }
        impl From<Vec<$elem>> for $name {
            fn from(v: Vec<$elem>) -> Self {
                Self(v)
            }
        }
    };
}

vec_newtype!(ScalarField, f64);
vec_newtype!(ComplexField, Complex64);
vec_newtype!(TwoFormDensity, f64);

impl ScalarField {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self(vec![c; n])
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl ComplexField {
    pub fn zeros(n: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn constant(n: usize, c: Complex64) -> Self {
        Self(vec![c; n])
    }

    pub fn norm_sqr(&self) -> ScalarField {
        ScalarField(self.0.iter().map(|z| z.norm_sqr()).collect())
    }

    pub fn re(&self) -> ScalarField {
        ScalarField(self.0.iter().map(|z| z.re).collect())
    }

    pub fn im(&self) -> ScalarField {
        ScalarField(self.0.iter().map(|z| z.im).collect())
    }

    pub fn from_parts(re: &[f64], im: &[f64]) -> Self {
        Self(
            re.iter()
                .zip(im)
                .map(|(&a, &b)| Complex64::new(a, b))
                .collect(),
        )
    }
}

impl OneForm {
    pub fn zeros(n: usize) -> Self {
        Self {
            c1: vec![0.0; n],
            c2: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.c1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c1.is_empty()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            c1: self.c1.iter().map(|v| v * s).collect(),
            c2: self.c2.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &OneForm) -> Self {
        Self {
            c1: self.c1.iter().zip(&other.c1).map(|(a, b)| a + b).collect(),
            c2: self.c2.iter().zip(&other.c2).map(|(a, b)| a + b).collect(),
        }
    }
}

impl ComplexOneForm {
    /// Pointwise `|w(e1)|^2 + |w(e2)|^2`.
    pub fn norm_sqr(&self) -> ScalarField {
        ScalarField(
            self.c1
                .iter()
                .zip(&self.c2)
                .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
                .collect(),
        )
    }
}

impl TwoFormDensity {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }
}
