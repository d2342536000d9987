//! Truncated CMV matrices, Laurent-polynomial eigenvectors and the
//! quasi-reflection identities relating a system to its mirror dual.
//!
//! Blocks follow [`BlockConvention::Conjugated`] by default: each `Θ_k` is
//! `(conj(a_k), ρ_k; ρ_k, −a_k)` and the closing scalar is `ω⁻¹`. With the
//! recurrence `Φ_{n+1} = zΦ_n − conj(a_n)Φ_n*` this is the convention under
//! which the eigenvalues of `U = M₂M₁` are the roots of `Φ_{N+1}` and
//! `U ψ(z_s) = z_s ψ(z_s)`. [`BlockConvention::Literal`] places `a_k` and
//! `ω` unconjugated; it yields the complex-conjugate spectrum.

use nalgebra::{DMatrix, DVector};

use crate::error::{OpucError, Result};
use crate::mirror::{is_persymmetric, mirror_dual};
use crate::poly::{unimodular_sqrt, Complex, UnitCirclePoint};
use crate::system::{OpucSystem, VerblunskySequence};
use crate::tolerance::TOL;
use crate::Sign;

pub type CMatrix = DMatrix<Complex>;
pub type CVector = DVector<Complex>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlockConvention {
    /// `(conj(a), ρ; ρ, −a)` blocks, closing scalar `ω⁻¹`.
    #[default]
    Conjugated,
    /// `(a, ρ; ρ, −conj(a))` blocks, closing scalar `ω`.
    Literal,
}

/// The 2×2 block with `ρ = √(1 − |a|²)`.
pub fn theta_block(a: Complex, convention: BlockConvention) -> Result<[[Complex; 2]; 2]> {
    if !(a.norm() < 1.0) {
        return Err(OpucError::InvalidVerblunsky(format!(
            "theta block needs |a| < 1, got {}",
            a.norm()
        )));
    }
    let rho = Complex::new((1.0 - a.norm_sqr()).sqrt(), 0.0);
    let (top, bottom) = match convention {
        BlockConvention::Conjugated => (a.conj(), -a),
        BlockConvention::Literal => (a, -a.conj()),
    };
    Ok([[top, rho], [rho, bottom]])
}

#[derive(Debug, Clone, PartialEq)]
pub struct CmvFactors {
    pub m1: CMatrix,
    pub m2: CMatrix,
}

impl CmvFactors {
    /// `U = M₂M₁`.
    pub fn product(&self) -> CMatrix {
        &self.m2 * &self.m1
    }
}

pub fn factors(v: &VerblunskySequence) -> CmvFactors {
    factors_with(v, BlockConvention::default())
}

/// `M₁ = 1 ⊕ Θ₁ ⊕ Θ₃ ⊕ …`, `M₂ = Θ₀ ⊕ Θ₂ ⊕ …`, with the closing scalar in
/// the bottom-right of `M₁` for odd `N` and of `M₂` for even `N`.
pub fn factors_with(v: &VerblunskySequence, convention: BlockConvention) -> CmvFactors {
    let n = v.n();
    let zero = Complex::new(0.0, 0.0);
    let mut m1 = CMatrix::from_element(n + 1, n + 1, zero);
    let mut m2 = CMatrix::from_element(n + 1, n + 1, zero);
    m1[(0, 0)] = Complex::new(1.0, 0.0);
    for k in 0..n {
        let block = theta_block(v.get(k), convention).expect("validated sequence");
        let target = if k % 2 == 1 { &mut m1 } else { &mut m2 };
        for (i, row) in block.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                target[(k + i, k + j)] = x;
            }
        }
    }
    let closing = match convention {
        BlockConvention::Conjugated => v.omega().conj(),
        BlockConvention::Literal => v.omega(),
    };
    if n % 2 == 1 {
        m1[(n, n)] = closing;
    } else {
        m2[(n, n)] = closing;
    }
    CmvFactors { m1, m2 }
}

pub fn cmv_matrix(v: &VerblunskySequence) -> CMatrix {
    factors(v).product()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `‖A†A − I‖_max`.
pub fn unitarity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    max_abs(&(m.adjoint() * m - CMatrix::identity(n, n)))
}

/// Largest entry with `|row − col| > 2`.
pub fn off_band(m: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i.abs_diff(j) > 2 {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    worst
}

/// The vector `(ψ_0(z), …, ψ_N(z))`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentEigenvector {
    components: Vec<Complex>,
}

impl LaurentEigenvector {
    pub fn components(&self) -> &[Complex] {
        &self.components
    }

    pub fn to_vector(&self) -> CVector {
        CVector::from_column_slice(&self.components)
    }
}

/// `ψ_{2m} = z^{−m}Φ_{2m}(z)/√h_{2m}`, `ψ_{2m+1} = z^m conj(Φ_{2m+1})(1/z)/√h_{2m+1}`.
pub fn laurent_eigenvector(sys: &OpucSystem, z: UnitCirclePoint) -> LaurentEigenvector {
    let z = z.value();
    let zinv = z.inv();
    let components = (0..=sys.n())
        .map(|k| {
            let m = (k / 2) as i32;
            let scale = sys.h(k).sqrt();
            if k % 2 == 0 {
                zinv.powi(m) * sys.phi(k).eval(z) / scale
            } else {
                z.powi(m) * sys.phi(k).conj().eval(zinv) / scale
            }
        })
        .collect();
    LaurentEigenvector { components }
}

/// `max_s ‖Uψ(z_s) − z_sψ(z_s)‖_max`.
pub fn eigen_residual(sys: &OpucSystem, nodes: &[UnitCirclePoint]) -> f64 {
    let u = cmv_matrix(sys.verblunsky());
    nodes
        .iter()
        .map(|&p| {
            let psi = laurent_eigenvector(sys, p).to_vector();
            let r = &u * &psi - &psi * p.value();
            r.iter().map(|x| x.norm()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Antidiagonal matrix with entries `τ, τ⁻¹, τ, …` from the top-right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiReflection {
    tau: Complex,
    size: usize,
}

impl QuasiReflection {
    /// `Q_N(τ)`, of size `N + 1`.
    pub fn new(n: usize, tau: Complex) -> Result<Self> {
        if (tau.norm() - 1.0).abs() > TOL.unimodular {
            return Err(OpucError::InvalidVerblunsky(format!(
                "quasi-reflection parameter has modulus {}",
                tau.norm()
            )));
        }
        Ok(Self { tau, size: n + 1 })
    }

    pub fn tau(&self) -> Complex {
        self.tau
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Entry in row `i` (its only nonzero sits in column `size − 1 − i`).
    pub fn entry(&self, row: usize) -> Complex {
        if row % 2 == 0 {
            self.tau
        } else {
            self.tau.conj()
        }
    }

    pub fn to_matrix(&self) -> CMatrix {
        let n = self.size;
        let mut m = CMatrix::from_element(n, n, Complex::new(0.0, 0.0));
        for i in 0..n {
            m[(i, n - 1 - i)] = self.entry(i);
        }
        m
    }
}

pub fn quasi_reflection(n: usize, tau: Complex) -> Result<QuasiReflection> {
    QuasiReflection::new(n, tau)
}

/// Max-entry residuals of the mirror relations for one square-root branch.
///
/// Odd `N`, `τ = ω^{−1/2}`: `M̂₁ = Q(τ⁻¹)M₁Q(τ)`, `M̂₂ = Q(τ)M₂Q(τ⁻¹)`,
/// `Û = Q(τ)UQ(τ)`.
///
/// Even `N`, `τ = ω^{1/2}`: `M̂₂ = Q(τ⁻¹)M₁Q(τ⁻¹)`, `M̂₁ = Q(τ)M₂Q(τ)`,
/// `Q(τ)UQ(τ⁻¹) = Ûᵀ`. The same product compared against `M₁M₂` is kept
/// in `literal_product` for the record; it does not hold in general.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MirrorRelationReport {
    pub odd: bool,
    pub tau: Complex,
    pub branch: Sign,
    pub first_factor: f64,
    pub second_factor: f64,
    pub unitary: f64,
    pub literal_product: Option<f64>,
}

impl MirrorRelationReport {
    pub fn max_residual(&self) -> f64 {
        self.first_factor.max(self.second_factor).max(self.unitary)
    }
}

fn mirror_relations_for(v: &VerblunskySequence, branch: Sign) -> MirrorRelationReport {
    let n = v.n();
    let odd = n % 2 == 1;
    let f = factors(v);
    let g = factors(&mirror_dual(v));
    let u = f.product();
    let u_hat = g.product();
    let root = unimodular_sqrt(v.omega()) * branch.value();
    let tau = if odd { root.conj() } else { root };
    let q = QuasiReflection::new(n, tau).expect("unimodular").to_matrix();
    let q_inv = QuasiReflection::new(n, tau.conj()).expect("unimodular").to_matrix();

    if odd {
        MirrorRelationReport {
            odd,
            tau,
            branch,
            first_factor: max_abs(&(&g.m1 - &q_inv * &f.m1 * &q)),
            second_factor: max_abs(&(&g.m2 - &q * &f.m2 * &q_inv)),
            unitary: max_abs(&(&u_hat - &q * &u * &q)),
            literal_product: None,
        }
    } else {
        let conjugated = &q * &u * &q_inv;
        MirrorRelationReport {
            odd,
            tau,
            branch,
            first_factor: max_abs(&(&g.m2 - &q_inv * &f.m1 * &q_inv)),
            second_factor: max_abs(&(&g.m1 - &q * &f.m2 * &q)),
            unitary: max_abs(&(&conjugated - u_hat.transpose())),
            literal_product: Some(max_abs(&(&conjugated - &f.m1 * &f.m2))),
        }
    }
}

/// Tries both branches of the square root and keeps the better one.
pub fn verify_mirror_relations(v: &VerblunskySequence) -> MirrorRelationReport {
    let plus = mirror_relations_for(v, Sign::Plus);
    let minus = mirror_relations_for(v, Sign::Minus);
    if minus.max_residual() < plus.max_residual() {
        minus
    } else {
        plus
    }
}

/// `τ` used by the mirror relations: `ω^{−1/2}` for odd `N`, `ω^{1/2}` for
/// even `N` (principal branch).
pub fn mirror_tau(v: &VerblunskySequence) -> Complex {
    let root = unimodular_sqrt(v.omega());
    if v.n() % 2 == 1 {
        root.conj()
    } else {
        root
    }
}

/// Residual of transporting eigenvectors by `Q(τ)`: `Q(τ)ψ(z_s)` is an
/// eigenvector of `Û` (odd `N`) or of `Ûᵀ` (even `N`) for eigenvalue `z_s`.
pub fn eigenvector_transport_residual(v: &VerblunskySequence) -> Result<f64> {
    let sys = OpucSystem::build(v);
    let nodes = sys.spectrum()?;
    let q = QuasiReflection::new(v.n(), mirror_tau(v))?.to_matrix();
    let u_hat = cmv_matrix(&mirror_dual(v));
    let target = if v.n() % 2 == 1 { u_hat } else { u_hat.transpose() };
    Ok(nodes
        .iter()
        .map(|&p| {
            let moved = &q * laurent_eigenvector(&sys, p).to_vector();
            let r = &target * &moved - &moved * p.value();
            r.iter().map(|x| x.norm()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max))
}

/// `‖UQ − QU‖_max` with `τ = ω^{−1/2}`.
pub fn commutation_residual(v: &VerblunskySequence) -> f64 {
    let u = cmv_matrix(v);
    let q = QuasiReflection::new(v.n(), unimodular_sqrt(v.omega()).conj())
        .expect("unimodular")
        .to_matrix();
    max_abs(&(&u * &q - &q * &u))
}

/// Result of the sign-pattern check for odd persymmetric systems.
#[derive(Debug, Clone, PartialEq)]
pub struct SignPattern {
    /// Global ε with `Q(τ)ψ(z_s) = ε(−1)^s ψ(z_s)`, `τ = ω^{−1/2}` principal.
    pub epsilon: Sign,
    /// The eigenvalue sign at each θ-ordered node.
    pub signs: Vec<Sign>,
    /// Largest `‖Qψ − μψ‖_max` across nodes.
    pub eigen_spread: f64,
    /// ε of the Laurent relation `ψ_{N−n}(z_s) = ε(−1)^s ω^{ν_n} ψ_n(z_s)`.
    pub relation_epsilon: Sign,
    /// Componentwise residual of that relation for `relation_epsilon`.
    pub relation_residual: f64,
    pub commutation: f64,
}

const SIGN_TOL: f64 = 1e-8;

pub fn persymmetric_sign_pattern(v: &VerblunskySequence) -> Result<SignPattern> {
    let n = v.n();
    if n % 2 == 0 {
        return Err(OpucError::PersymmetryViolation(
            "sign pattern is defined for odd N only".into(),
        ));
    }
    if !is_persymmetric(v, TOL.persymmetry) {
        return Err(OpucError::PersymmetryViolation(
            "sequence is not persymmetric".into(),
        ));
    }
    let sys = OpucSystem::build(v);
    let nodes = sys.spectrum()?;
    let q = QuasiReflection::new(n, unimodular_sqrt(v.omega()).conj())?.to_matrix();

    let mut signs = Vec::with_capacity(nodes.len());
    let mut eigen_spread: f64 = 0.0;
    let vectors: Vec<CVector> = nodes
        .iter()
        .map(|&p| laurent_eigenvector(&sys, p).to_vector())
        .collect();
    for (s, psi) in vectors.iter().enumerate() {
        let moved = &q * psi;
        let mu = psi.dotc(&moved) / psi.dotc(psi);
        let spread = (&moved - psi * mu).iter().map(|x| x.norm()).fold(0.0, f64::max);
        let scale = psi.iter().map(|x| x.norm()).fold(1.0, f64::max);
        if spread > SIGN_TOL * scale {
            return Err(OpucError::PersymmetryViolation(format!(
                "Q psi(z_{s}) is not proportional to psi(z_{s}) (spread {spread:e})"
            )));
        }
        let sign = if mu.re >= 0.0 { Sign::Plus } else { Sign::Minus };
        if (mu - sign.value()).norm() > SIGN_TOL {
            return Err(OpucError::PersymmetryViolation(format!(
                "eigenvalue {mu} of Q at node {s} is not +-1"
            )));
        }
        eigen_spread = eigen_spread.max(spread);
        signs.push(sign);
    }
    let epsilon = signs[0];
    if let Some(s) = (0..signs.len()).find(|&s| signs[s] != epsilon * Sign::alternating(s)) {
        return Err(OpucError::PersymmetryViolation(format!(
            "sign at node {s} breaks the alternating pattern"
        )));
    }

    let half = unimodular_sqrt(v.omega());
    let (relation_residual, relation_epsilon) = Sign::BOTH
        .iter()
        .map(|&eps| {
            let r = vectors
                .iter()
                .enumerate()
                .flat_map(|(s, psi)| {
                    let factor = (eps * Sign::alternating(s)).value();
                    (0..=n).map(move |k| {
                        let power = if k % 2 == 0 { half } else { half.conj() };
                        (psi[n - k] - power * psi[k] * factor).norm()
                    })
                })
                .fold(0.0, f64::max);
            (r, eps)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("two candidates");
    if relation_residual > SIGN_TOL {
        return Err(OpucError::PersymmetryViolation(format!(
            "Laurent mirror relation fails (residual {relation_residual:e})"
        )));
    }

    Ok(SignPattern {
        epsilon,
        signs,
        eigen_spread,
        relation_epsilon,
        relation_residual,
        commutation: commutation_residual(v),
    })
}
