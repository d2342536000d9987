//! Dense complex polynomials in ascending coefficient order.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{OpucError, Result};
use crate::tolerance::TOL;

pub type Complex = num_complex::Complex64;

/// A polynomial `Σ coeffs[k] z^k` with a formal degree `coeffs.len() - 1`.
///
/// The formal degree is kept even when leading coefficients vanish; the
/// star operation and monicity checks depend on it.
#[derive(Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex>,
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coeffs.iter()).finish()
    }
}

impl Polynomial {
    /// Builds a polynomial from ascending coefficients. An empty vector is
    /// read as the zero constant.
    pub fn new(coeffs: Vec<Complex>) -> Self {
        if coeffs.is_empty() {
            return Self::constant(Complex::new(0.0, 0.0));
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex::new(c, 0.0)).collect())
    }

    pub fn constant(c: Complex) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn one() -> Self {
        Self::constant(Complex::new(1.0, 0.0))
    }

    /// `z^n`.
    pub fn monomial(n: usize) -> Self {
        let mut coeffs = vec![Complex::new(0.0, 0.0); n + 1];
        coeffs[n] = Complex::new(1.0, 0.0);
        Self { coeffs }
    }

    /// Zero polynomial of formal degree `n`.
    pub fn zero(n: usize) -> Self {
        Self {
            coeffs: vec![Complex::new(0.0, 0.0); n + 1],
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex> {
        self.coeffs
    }

    /// Coefficient of `z^k`, zero beyond the formal degree.
    pub fn coeff(&self, k: usize) -> Complex {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn leading(&self) -> Complex {
        self.coeffs[self.degree()]
    }

    pub fn is_monic(&self, tol: f64) -> bool {
        (self.leading() - Complex::new(1.0, 0.0)).norm() <= tol
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex) -> Complex {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_with_derivative(&self, z: Complex) -> (Complex, Complex) {
        let mut p = Complex::new(0.0, 0.0);
        let mut dp = Complex::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn derivative_at(&self, z: Complex) -> Complex {
        self.eval_with_derivative(z).1
    }

    pub fn derivative(&self) -> Polynomial {
        if self.degree() == 0 {
            return Self::zero(0);
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    /// Conjugate reversal at order `n`: `z^n conj(p)(1/z)`.
    pub fn star(&self, n: usize) -> Result<Polynomial> {
        if self.degree() > n {
            return Err(OpucError::InvalidArity {
                degree: self.degree(),
                order: n,
            });
        }
        Ok(Self::new((0..=n).map(|k| self.coeff(n - k).conj()).collect()))
    }

    /// Multiplies by `z`.
    pub fn shift_up(&self) -> Polynomial {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(Complex::new(0.0, 0.0));
        coeffs.extend_from_slice(&self.coeffs);
        Self { coeffs }
    }

    /// Drops the constant term and divides by `z`. Returns the discarded
    /// constant term alongside the quotient.
    pub fn shift_down(&self) -> (Polynomial, Complex) {
        if self.degree() == 0 {
            return (Self::zero(0), self.coeffs[0]);
        }
        (Self::new(self.coeffs[1..].to_vec()), self.coeffs[0])
    }

    pub fn scale(&self, c: Complex) -> Polynomial {
        Self::new(self.coeffs.iter().map(|&x| x * c).collect())
    }

    pub fn conj(&self) -> Polynomial {
        Self::new(self.coeffs.iter().map(|x| x.conj()).collect())
    }

    /// Truncates to the given formal degree. Dropped coefficients must be
    /// checked by the caller.
    pub fn truncate(&self, degree: usize) -> Polynomial {
        Self::new(self.coeffs[..=degree.min(self.degree())].to_vec())
    }

    /// Largest coefficient-wise distance, padding the shorter with zeros.
    pub fn max_abs_diff(&self, other: &Polynomial) -> f64 {
        let n = self.degree().max(other.degree());
        (0..=n)
            .map(|k| (self.coeff(k) - other.coeff(k)).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Monic polynomial with the given roots, by successive multiplication
    /// with `(z - r)`.
    pub fn from_roots(roots: &[Complex]) -> Polynomial {
        let mut coeffs = Vec::with_capacity(roots.len() + 1);
        coeffs.push(Complex::new(1.0, 0.0));
        for &r in roots {
            coeffs.push(Complex::new(0.0, 0.0));
            for k in (1..coeffs.len()).rev() {
                coeffs[k] = coeffs[k - 1] - r * coeffs[k];
            }
            coeffs[0] = -r * coeffs[0];
        }
        Self { coeffs }
    }

    /// Synthetic division by `(z - r)`; returns quotient and remainder.
    pub fn deflate(&self, r: Complex) -> (Polynomial, Complex) {
        let n = self.degree();
        if n == 0 {
            return (Self::zero(0), self.coeffs[0]);
        }
        let mut q = vec![Complex::new(0.0, 0.0); n];
        let mut acc = self.coeffs[n];
        for k in (0..n).rev() {
            q[k] = acc;
            acc = self.coeffs[k] + r * acc;
        }
        (Self::new(q), acc)
    }

    /// All roots by Aberth–Ehrlich simultaneous iteration.
    pub fn roots(&self) -> Result<Vec<Complex>> {
        let n = self.degree();
        let lead = self.leading();
        if n == 0 {
            return Err(OpucError::Shape(
                "root finding needs degree at least 1".into(),
            ));
        }
        if lead.norm() == 0.0 {
            return Err(OpucError::Shape("leading coefficient is zero".into()));
        }
        let monic = self.scale(lead.inv());
        if n == 1 {
            return Ok(vec![-monic.coeffs[0]]);
        }

        let mut z = initial_guesses(&monic);
        let mut converged = false;
        for _ in 0..TOL.max_sweeps {
            let mut max_corr: f64 = 0.0;
            for k in 0..n {
                let (p, dp) = monic.eval_with_derivative(z[k]);
                if p.norm() == 0.0 {
                    continue;
                }
                let repulsion: Complex = (0..n)
                    .filter(|&j| j != k)
                    .map(|j| (z[k] - z[j]).inv())
                    .sum();
                let w = if dp.norm() == 0.0 {
                    -repulsion.inv()
                } else {
                    let ratio = p / dp;
                    ratio / (Complex::new(1.0, 0.0) - ratio * repulsion)
                };
                if !w.is_finite() {
                    continue;
                }
                z[k] -= w;
                max_corr = max_corr.max(w.norm() / z[k].norm().max(1.0));
            }
            if max_corr < TOL.correction {
                converged = true;
                break;
            }
        }

        let best = z
            .iter()
            .map(|&r| root_residual(&monic, r))
            .fold(0.0, f64::max);
        if converged || best <= TOL.residual {
            Ok(z)
        } else {
            Err(OpucError::Convergence {
                best_residual: best,
            })
        }
    }
}

/// Scaled residual `|p(r)| / (1 + |p'(r)| |r|)` used as the root contract.
pub fn root_residual(p: &Polynomial, r: Complex) -> f64 {
    let (v, d) = p.eval_with_derivative(r);
    v.norm() / (1.0 + d.norm() * r.norm())
}

fn initial_guesses(monic: &Polynomial) -> Vec<Complex> {
    let n = monic.degree();
    // Fujiwara bound on root moduli.
    let bound = 2.0
        * (1..=n)
            .map(|k| monic.coeff(n - k).norm().powf(1.0 / k as f64))
            .fold(0.0, f64::max);
    let c0 = monic.coeff(0).norm();
    let radius = if c0 > 0.0 {
        c0.powf(1.0 / n as f64).min(bound)
    } else {
        0.5 * bound
    };
    let radius = if radius > 0.0 { radius } else { 1.0 };
    (0..n)
        .map(|k| Complex::from_polar(radius, TAU * k as f64 / n as f64 + 0.4))
        .collect()
}

/// Interpolating polynomial of formal degree `nodes.len() - 1`.
///
/// Each Lagrange basis numerator is the node polynomial deflated by its own
/// node, scaled by the barycentric weight.
pub fn lagrange_interpolate(nodes: &[Complex], values: &[Complex]) -> Result<Polynomial> {
    if nodes.len() != values.len() {
        return Err(OpucError::Shape(format!(
            "{} nodes but {} values",
            nodes.len(),
            values.len()
        )));
    }
    if nodes.is_empty() {
        return Err(OpucError::Shape("no interpolation nodes".into()));
    }
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            if (nodes[i] - nodes[j]).norm() <= TOL.node_separation {
                return Err(OpucError::DegenerateNodes {
                    first: i,
                    second: j,
                });
            }
        }
    }

    let n = nodes.len() - 1;
    let node_poly = Polynomial::from_roots(nodes);
    let mut result = vec![Complex::new(0.0, 0.0); n + 1];
    for (k, (&zk, &vk)) in nodes.iter().zip(values).enumerate() {
        let denom: Complex = nodes
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, &zj)| zk - zj)
            .product();
        let (basis, _) = node_poly.deflate(zk);
        let scale = vk / denom;
        for (acc, c) in result.iter_mut().zip(basis.coeffs()) {
            *acc += scale * c;
        }
    }
    Ok(Polynomial::new(result))
}

/// `p'(z_s)` for the monic `p` with roots `z_0 … z_N`, as the product
/// `Π_{j≠s}(z_s − z_j)`. Unlike differentiating expanded coefficients this
/// stays accurate when roots cluster.
pub fn node_derivatives(nodes: &[Complex]) -> Vec<Complex> {
    nodes
        .iter()
        .enumerate()
        .map(|(s, &zs)| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != s)
                .map(|(_, &zj)| zs - zj)
                .product()
        })
        .collect()
}

/// A point `exp(iθ)` with `θ ∈ [0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitCirclePoint {
    theta: f64,
    value: Complex,
}

impl UnitCirclePoint {
    pub fn from_theta(theta: f64) -> Self {
        let theta = normalize_angle(theta);
        Self {
            theta,
            value: Complex::from_polar(1.0, theta),
        }
    }

    /// Keeps the argument of `z` and discards its modulus.
    pub fn project(z: Complex) -> Self {
        Self::from_theta(z.arg())
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn value(&self) -> Complex {
        self.value
    }

    /// Argument in `(-π, π]`.
    pub fn signed_theta(&self) -> f64 {
        if self.theta > PI {
            self.theta - TAU
        } else {
            self.theta
        }
    }
}

/// Maps an angle into `[0, 2π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Argument of `z` in `(-π, π]`; `-π` (from a negative zero imaginary part)
/// is folded to `π`.
pub fn principal_arg(z: Complex) -> f64 {
    let a = z.arg();
    if a <= -PI {
        PI
    } else {
        a
    }
}

/// Principal square root `exp(i arg(ω)/2)` of a unimodular value.
pub fn unimodular_sqrt(omega: Complex) -> Complex {
    Complex::from_polar(1.0, 0.5 * principal_arg(omega))
}

/// Sorts points ascending by `θ`.
pub fn sort_by_theta(points: &mut [UnitCirclePoint]) {
    points.sort_by(|a, b| a.theta.total_cmp(&b.theta));
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.degree().max(rhs.degree());
        Polynomial::new((0..=n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.degree().max(rhs.degree());
        Polynomial::new((0..=n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = vec![Complex::new(0.0, 0.0); self.degree() + rhs.degree() + 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(Complex::new(-1.0, 0.0))
    }
}
