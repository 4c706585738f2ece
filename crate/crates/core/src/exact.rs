//! Exact complex rationals and Gaussian elimination over a field, used to build
//! zero-forcing vectors with exact orthogonality.

use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::rational::{Frac, Q};

/// Operations Gaussian elimination needs.
pub trait Field:
    Clone
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
}

impl Field for Q {
    fn zero() -> Self {
        <Q as Zero>::zero()
    }
    fn one() -> Self {
        <Q as One>::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
}

/// `re + i·im` with exact rational parts.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ComplexQ {
    pub re: Q,
    pub im: Q,
}

impl ComplexQ {
    pub fn new(re: Q, im: Q) -> Self {
        ComplexQ { re, im }
    }

    pub fn real(re: Q) -> Self {
        ComplexQ { re, im: <Q as Zero>::zero() }
    }

    /// `|z|²`
    pub fn norm_sqr(&self) -> Q {
        self.re * self.re + self.im * self.im
    }

    pub fn conj(&self) -> Self {
        ComplexQ { re: self.re, im: -self.im }
    }
}

impl Add for ComplexQ {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        ComplexQ { re: self.re + o.re, im: self.im + o.im }
    }
}

impl Sub for ComplexQ {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        ComplexQ { re: self.re - o.re, im: self.im - o.im }
    }
}

impl Mul for ComplexQ {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        ComplexQ {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}

impl Div for ComplexQ {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let d = o.norm_sqr();
        let n = self * o.conj();
        ComplexQ { re: n.re / d, im: n.im / d }
    }
}

impl Neg for ComplexQ {
    type Output = Self;
    fn neg(self) -> Self {
        ComplexQ { re: -self.re, im: -self.im }
    }
}

impl Field for ComplexQ {
    fn zero() -> Self {
        ComplexQ::default()
    }
    fn one() -> Self {
        ComplexQ::real(<Q as One>::one())
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(&self.re) && Zero::is_zero(&self.im)
    }
}

impl fmt::Debug for ComplexQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}i)", Frac(&self.re), Frac(&self.im))
    }
}

/// `Σ_j a_j b_j` (no conjugation: the channel acts as a row vector).
pub fn dot<F: Field>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).fold(F::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref<F: Field>(rows: &mut [Vec<F>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = F::one() / rows[r][c].clone();
        for x in rows[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let factor = rows[i][c].clone();
                let pivot = rows[r].clone();
                for (x, v) in rows[i].iter_mut().zip(pivot).take(cols) {
                    *x = x.clone() - factor.clone() * v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Basis of `{v : A v = 0}` for `A` given by `rows` with `cols` columns.
pub fn null_space<F: Field>(rows: &[Vec<F>], cols: usize) -> Vec<Vec<F>> {
    let mut m: Vec<Vec<F>> = rows.to_vec();
    let pivots = rref(&mut m, cols);
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = alloc::vec![F::zero(); cols];
            v[free] = F::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[r][free].clone();
            }
            v
        })
        .collect()
}

pub fn rank<F: Field>(rows: &[Vec<F>], cols: usize) -> usize {
    let mut m: Vec<Vec<F>> = rows.to_vec();
    rref(&mut m, cols).len()
}
