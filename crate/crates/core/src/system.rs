//! Finite paraorthogonal systems: Szegő recurrence, normalization constants,
//! spectrum, quadrature weights and the residual checks on them.

use crate::cmv::cmv_matrix;
use crate::error::{OpucError, Result};
use crate::poly::{node_derivatives, sort_by_theta, Complex, Polynomial, UnitCirclePoint};
use crate::tolerance::TOL;

const POLISH_STEPS: usize = 8;

/// Truncated Verblunsky data `a_0, …, a_{N-1}` with `|a_k| < 1` and the
/// unimodular closing value `a_N = ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct VerblunskySequence {
    coeffs: Vec<Complex>,
    omega: Complex,
}

impl VerblunskySequence {
    pub fn new(coeffs: Vec<Complex>, omega: Complex) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(OpucError::InvalidVerblunsky(
                "at least one coefficient is required (N >= 1)".into(),
            ));
        }
        for (k, a) in coeffs.iter().enumerate() {
            if !a.is_finite() {
                return Err(OpucError::InvalidVerblunsky(format!(
                    "a_{k} is not finite"
                )));
            }
            if a.norm() > 1.0 - TOL.verblunsky_margin {
                return Err(OpucError::InvalidVerblunsky(format!(
                    "|a_{k}| = {} is not strictly inside the unit disk",
                    a.norm()
                )));
            }
        }
        if !omega.is_finite() || (omega.norm() - 1.0).abs() > TOL.unimodular {
            return Err(OpucError::InvalidVerblunsky(format!(
                "|omega| = {} is not 1",
                omega.norm()
            )));
        }
        Ok(Self { coeffs, omega })
    }

    /// `ω = exp(iσ)`.
    pub fn with_omega_arg(coeffs: Vec<Complex>, sigma: f64) -> Result<Self> {
        Self::new(coeffs, Complex::from_polar(1.0, sigma))
    }

    /// The truncation order `N`.
    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Complex] {
        &self.coeffs
    }

    pub fn omega(&self) -> Complex {
        self.omega
    }

    /// `a_k` for `k ≤ N`, with `a_N = ω`.
    pub fn get(&self, k: usize) -> Complex {
        if k == self.n() {
            self.omega
        } else {
            self.coeffs[k]
        }
    }

    /// `a_0, …, a_{N-1}, ω`.
    pub fn full(&self) -> Vec<Complex> {
        let mut all = self.coeffs.clone();
        all.push(self.omega);
        all
    }
}

/// One Szegő step `Φ_{n+1} = zΦ_n − conj(a)Φ_n*`.
pub fn szego_step(phi: &Polynomial, a: Complex) -> Polynomial {
    let n = phi.degree();
    let star = phi.star(n).expect("formal degree equals order");
    &phi.shift_up() - &star.scale(a.conj())
}

/// The polynomials `Φ_0 … Φ_{N+1}` and constants `h_0 … h_N`.
#[derive(Debug, Clone)]
pub struct OpucSystem {
    verblunsky: VerblunskySequence,
    phis: Vec<Polynomial>,
    norms: Vec<f64>,
}

impl OpucSystem {
    pub fn build(v: &VerblunskySequence) -> Self {
        let n = v.n();
        let mut phis = Vec::with_capacity(n + 2);
        phis.push(Polynomial::one());
        for k in 0..=n {
            let next = szego_step(&phis[k], v.get(k));
            phis.push(next);
        }
        let mut norms = Vec::with_capacity(n + 1);
        norms.push(1.0);
        for k in 0..n {
            norms.push(norms[k] * (1.0 - v.get(k).norm_sqr()));
        }
        Self {
            verblunsky: v.clone(),
            phis,
            norms,
        }
    }

    pub fn verblunsky(&self) -> &VerblunskySequence {
        &self.verblunsky
    }

    pub fn n(&self) -> usize {
        self.verblunsky.n()
    }

    /// `Φ_0 … Φ_{N+1}`.
    pub fn phis(&self) -> &[Polynomial] {
        &self.phis
    }

    pub fn phi(&self, k: usize) -> &Polynomial {
        &self.phis[k]
    }

    /// `Φ_{N+1}`, whose roots are the spectrum.
    pub fn final_poly(&self) -> &Polynomial {
        &self.phis[self.n() + 1]
    }

    /// `h_0 … h_N`.
    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    pub fn h(&self, k: usize) -> f64 {
        self.norms[k]
    }

    /// `h_N`.
    pub fn h_final(&self) -> f64 {
        self.norms[self.n()]
    }

    /// `(Φ_k(z), Φ*_k(z))` by running the recurrence pointwise, which avoids
    /// the cancellation of evaluating expanded coefficients. `k ≤ N + 1`.
    pub fn eval_pair(&self, k: usize, z: Complex) -> (Complex, Complex) {
        let mut phi = Complex::new(1.0, 0.0);
        let mut star = phi;
        for j in 0..k {
            let a = self.verblunsky.get(j);
            (phi, star) = (z * phi - a.conj() * star, star - a * z * phi);
        }
        (phi, star)
    }

    /// `Φ_k(z)`, see [`OpucSystem::eval_pair`].
    pub fn eval_phi(&self, k: usize, z: Complex) -> Complex {
        self.eval_pair(k, z).0
    }

    /// `(Φ_k(z), Φ_k'(z))` through the differentiated recurrence.
    pub fn eval_with_derivative(&self, k: usize, z: Complex) -> (Complex, Complex) {
        let one = Complex::new(1.0, 0.0);
        let zero = Complex::new(0.0, 0.0);
        let (mut phi, mut star, mut dphi, mut dstar) = (one, one, zero, zero);
        for j in 0..k {
            let a = self.verblunsky.get(j);
            (phi, star, dphi, dstar) = (
                z * phi - a.conj() * star,
                star - a * z * phi,
                phi + z * dphi - a.conj() * dstar,
                dstar - a * (phi + z * dphi),
            );
        }
        (phi, dphi)
    }

    /// Roots of `Φ_{N+1}` snapped onto the unit circle, ascending by θ.
    ///
    /// The root finder works on expanded coefficients, which lose accuracy
    /// when roots cluster; each root is therefore refined by Newton steps on
    /// the recurrence-evaluated `Φ_{N+1}`. If that still leaves a root off the
    /// circle (or two roots merged), the eigenvalues of the unitary CMV
    /// matrix, which are well-conditioned, seed the refinement instead.
    pub fn spectrum(&self) -> Result<Vec<UnitCirclePoint>> {
        let primary = self
            .final_poly()
            .roots()
            .and_then(|roots| self.refine_onto_circle(roots));
        let mut nodes = match primary {
            Ok(nodes) => nodes,
            Err(err) => {
                let seeds = cmv_matrix(&self.verblunsky)
                    .eigenvalues()
                    .ok_or(OpucError::Convergence { best_residual: f64::INFINITY })?;
                self.refine_onto_circle(seeds.iter().copied().collect())
                    .map_err(|_| err)?
            }
        };
        sort_by_theta(&mut nodes);
        Ok(nodes)
    }

    fn refine_onto_circle(&self, seeds: Vec<Complex>) -> Result<Vec<UnitCirclePoint>> {
        let k = self.n() + 1;
        let mut roots = Vec::with_capacity(seeds.len());
        for (index, mut r) in seeds.into_iter().enumerate() {
            for _ in 0..POLISH_STEPS {
                let (p, dp) = self.eval_with_derivative(k, r);
                let step = p / dp;
                if !step.is_finite() {
                    break;
                }
                r -= step;
                if step.norm() <= f64::EPSILON {
                    break;
                }
            }
            let modulus = r.norm();
            if !r.is_finite() || (modulus - 1.0).abs() > TOL.root_radius {
                return Err(OpucError::SpectralValidity { index, modulus });
            }
            roots.push(r);
        }
        for i in 0..roots.len() {
            for j in i + 1..roots.len() {
                if (roots[i] - roots[j]).norm() <= TOL.node_separation {
                    return Err(OpucError::DegenerateNodes { first: i, second: j });
                }
            }
        }
        Ok(roots.into_iter().map(UnitCirclePoint::project).collect())
    }

    /// Quadrature weights `w_s = h_N / (Φ'_{N+1}(z_s) · conj(Φ_N(z_s)))`.
    ///
    /// `nodes` must be the full spectrum: `Φ'_{N+1}(z_s)` is taken as the
    /// product of differences to the other nodes.
    pub fn weights(&self, nodes: &[UnitCirclePoint]) -> Result<SpectralData> {
        let values: Vec<Complex> = nodes.iter().map(|p| p.value()).collect();
        let derivs = self.final_derivatives(&values)?;
        let hn = self.h_final();
        let raw: Vec<Complex> = values
            .iter()
            .zip(&derivs)
            .map(|(&z, &d)| Complex::new(hn, 0.0) / (d * self.eval_phi(self.n(), z).conj()))
            .collect();
        let weights = realize_weights(&raw)?;
        SpectralData::new(nodes.to_vec(), weights)
    }

    /// `Φ'_{N+1}(z_s)` at the full set of spectral nodes.
    pub fn final_derivatives(&self, nodes: &[Complex]) -> Result<Vec<Complex>> {
        if nodes.len() != self.n() + 1 {
            return Err(OpucError::Shape(format!(
                "expected {} spectral nodes, got {}",
                self.n() + 1,
                nodes.len()
            )));
        }
        Ok(node_derivatives(nodes))
    }

    /// Max coefficient of `ω̄ Φ*_{N+1} + Φ_{N+1}`.
    ///
    /// With `Φ_{N+1} = zΦ_N − ω̄Φ*_N` one has `Φ*_{N+1} = −ωΦ_{N+1}`; the
    /// variant with `ω` in place of `ω̄` only vanishes for `ω = ±1`.
    pub fn paraorthogonality_residual(&self) -> f64 {
        let last = self.final_poly();
        let star = last.star(self.n() + 1).expect("formal degree equals order");
        (&star.scale(self.verblunsky.omega().conj()) + last).max_abs_coeff()
    }

    /// Largest entry of `|Σ_s w_s Φ_n(z_s) conj(Φ_m(z_s)) − h_n δ_nm|`,
    /// `0 ≤ n, m ≤ N`.
    pub fn orthogonality_residual(&self, sd: &SpectralData) -> f64 {
        let n = self.n();
        let values: Vec<Vec<Complex>> = sd
            .nodes()
            .iter()
            .map(|p| (0..=n).map(|k| self.eval_phi(k, p.value())).collect())
            .collect();
        let mut worst: f64 = 0.0;
        for i in 0..=n {
            for j in 0..=n {
                let gram: Complex = values
                    .iter()
                    .zip(sd.weights())
                    .map(|(row, &w)| row[i] * row[j].conj() * w)
                    .sum();
                let target = if i == j { self.h(i) } else { 0.0 };
                worst = worst.max((gram - target).norm());
            }
        }
        worst
    }
}

/// Checks that complex weights are real and positive, then drops the
/// imaginary parts and checks the sum.
pub(crate) fn realize_weights(raw: &[Complex]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(raw.len());
    for (index, w) in raw.iter().enumerate() {
        if !w.is_finite() {
            return Err(OpucError::Weight {
                index,
                reason: "weight is not finite".into(),
            });
        }
        if w.im.abs() > TOL.weight {
            return Err(OpucError::Weight {
                index,
                reason: format!("imaginary part {:e} is not negligible", w.im),
            });
        }
        if w.re <= 0.0 {
            return Err(OpucError::Weight {
                index,
                reason: format!("weight {} is not positive", w.re),
            });
        }
        out.push(w.re);
    }
    Ok(out)
}

/// Spectral nodes ascending by θ with positive weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    nodes: Vec<UnitCirclePoint>,
    weights: Vec<f64>,
}

impl SpectralData {
    pub fn new(nodes: Vec<UnitCirclePoint>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(OpucError::Shape(format!(
                "{} nodes but {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        for (index, w) in nodes.windows(2).enumerate() {
            if w[1].theta() <= w[0].theta() {
                return Err(OpucError::InvalidSpectrum(format!(
                    "nodes {index} and {} are not strictly increasing in theta",
                    index + 1
                )));
            }
        }
        if let Some(index) = weights.iter().position(|&w| !(w > 0.0)) {
            return Err(OpucError::Weight {
                index,
                reason: "weight is not positive".into(),
            });
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > TOL.weight {
            return Err(OpucError::Weight {
                index: weights.len().saturating_sub(1),
                reason: format!("weights sum to {total}, not 1"),
            });
        }
        Ok(Self { nodes, weights })
    }

    pub fn nodes(&self) -> &[UnitCirclePoint] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Reads `a_n = −conj(Φ_{n+1}(0))` off consecutive monic polynomials
/// `Φ_0, …, Φ_{N+1}`.
pub fn verblunsky_from_polys(phis: &[Polynomial]) -> Result<Vec<Complex>> {
    for (k, p) in phis.iter().enumerate() {
        if p.degree() != k {
            return Err(OpucError::Shape(format!(
                "polynomial {k} has degree {}",
                p.degree()
            )));
        }
        if !p.is_monic(TOL.unimodular) {
            return Err(OpucError::Shape(format!(
                "polynomial {k} is not monic (leading coefficient {})",
                p.leading()
            )));
        }
    }
    Ok(phis.iter().skip(1).map(|p| -p.coeff(0).conj()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn single_moment_v(n: usize) -> VerblunskySequence {
        let a = (0..n).map(|k| c(-1.0 / (k as f64 + 2.0), 0.0)).collect();
        VerblunskySequence::new(a, c(-1.0, 0.0)).unwrap()
    }

    #[test]
    fn rejects_invalid_verblunsky() {
        assert!(VerblunskySequence::new(vec![], c(1.0, 0.0)).is_err());
        assert!(VerblunskySequence::new(vec![c(1.0, 0.0)], c(1.0, 0.0)).is_err());
        assert!(VerblunskySequence::new(vec![c(0.6, 0.8)], c(1.0, 0.0)).is_err());
        assert!(VerblunskySequence::new(vec![c(f64::NAN, 0.0)], c(1.0, 0.0)).is_err());
        assert!(VerblunskySequence::new(vec![c(0.1, 0.0)], c(1.0, 1e-3)).is_err());
        assert!(VerblunskySequence::new(vec![c(0.1, 0.0)], c(1.0, 0.0)).is_ok());
    }

    #[test]
    fn one_step_system() {
        let v = VerblunskySequence::new(vec![c(0.0, 0.0)], c(1.0, 0.0)).unwrap();
        let sys = OpucSystem::build(&v);
        assert_eq!(sys.phi(1), &Polynomial::monomial(1));
        assert_eq!(sys.phi(2), &Polynomial::from_real(&[-1.0, 0.0, 1.0]));
        let nodes = sys.spectrum().unwrap();
        assert_eq!(nodes.len(), 2);
        assert!(nodes[0].theta().abs() < 1e-12);
        assert!((nodes[1].theta() - PI).abs() < 1e-12);
    }

    #[test]
    fn free_final_polynomial() {
        let n = 4;
        let nu: f64 = 0.17;
        let omega = Complex::from_polar(1.0, TAU * nu);
        let v = VerblunskySequence::new(vec![c(0.0, 0.0); n], omega).unwrap();
        let sys = OpucSystem::build(&v);
        let mut want = Polynomial::monomial(n + 1);
        want = &want - &Polynomial::constant(omega.inv());
        assert!(sys.final_poly().max_abs_diff(&want) < 1e-15);

        let nodes = sys.spectrum().unwrap();
        let mut expected: Vec<f64> = (0..=n)
            .map(|s| crate::poly::normalize_angle(TAU * (s as f64 - nu) / (n + 1) as f64))
            .collect();
        expected.sort_by(f64::total_cmp);
        for (p, t) in nodes.iter().zip(&expected) {
            assert!((p.theta() - t).abs() < 1e-12);
        }
        let sd = sys.weights(&nodes).unwrap();
        for w in sd.weights() {
            assert!((w - 1.0 / (n + 1) as f64).abs() < 1e-12);
        }
        assert!(sys.orthogonality_residual(&sd) < 1e-12);
        assert!(sys.paraorthogonality_residual() < 1e-15);

        // ω in place of ω̄ leaves 2i·Im ω behind in the constant term
        let star = sys.final_poly().star(n + 1).unwrap();
        let other = &star.scale(omega) + sys.final_poly();
        assert!((other.max_abs_coeff() - 2.0 * omega.im.abs()).abs() < 1e-12);
    }

    #[test]
    fn single_moment_polynomials() {
        let sys = OpucSystem::build(&single_moment_v(2));
        let phi2 = Polynomial::from_real(&[1.0 / 3.0, 2.0 / 3.0, 1.0]);
        assert!(sys.phi(2).max_abs_diff(&phi2) < 1e-15);
        assert!(sys
            .phi(3)
            .max_abs_diff(&Polynomial::from_real(&[1.0, 1.0, 1.0, 1.0]))
            < 1e-15);
        let h = sys.norms();
        assert!((h[0] - 1.0).abs() < 1e-15);
        assert!((h[1] - 0.75).abs() < 1e-15);
        assert!((h[2] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn single_moment_spectrum_and_weights() {
        let sys = OpucSystem::build(&single_moment_v(2));
        let nodes = sys.spectrum().unwrap();
        let expected = [c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        for (p, z) in nodes.iter().zip(expected) {
            assert!((p.value() - z).norm() < 1e-12);
        }
        let sd = sys.weights(&nodes).unwrap();
        for (w, want) in sd.weights().iter().zip([0.25, 0.5, 0.25]) {
            assert!((w - want).abs() < 1e-12);
        }
        assert!(sys.paraorthogonality_residual() < 1e-15);

        let sys = OpucSystem::build(&single_moment_v(3));
        let sd = sys.weights(&sys.spectrum().unwrap()).unwrap();
        assert!(sys.orthogonality_residual(&sd) < 1e-9);
    }

    #[test]
    fn verblunsky_readback() {
        let v = single_moment_v(4);
        let sys = OpucSystem::build(&v);
        let a = verblunsky_from_polys(sys.phis()).unwrap();
        for (k, ak) in a.iter().enumerate() {
            assert!((ak - v.get(k)).norm() < 1e-15);
        }
        let free = VerblunskySequence::new(vec![c(0.0, 0.0); 3], c(1.0, 0.0)).unwrap();
        let a = verblunsky_from_polys(OpucSystem::build(&free).phis()).unwrap();
        assert!(a[..3].iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn verblunsky_readback_rejects_bad_shape() {
        let phis = vec![Polynomial::one(), Polynomial::from_real(&[0.0, 2.0])];
        assert!(matches!(verblunsky_from_polys(&phis), Err(OpucError::Shape(_))));
        let phis = vec![Polynomial::one(), Polynomial::monomial(2)];
        assert!(matches!(verblunsky_from_polys(&phis), Err(OpucError::Shape(_))));
    }

    #[test]
    fn weights_reject_non_spectral_nodes() {
        let sys = OpucSystem::build(&single_moment_v(2));
        let nodes: Vec<_> = [0.3, 1.0, 4.0].iter().map(|&t| UnitCirclePoint::from_theta(t)).collect();
        assert!(matches!(sys.weights(&nodes), Err(OpucError::Weight { .. })));
    }

    #[test]
    fn spectral_data_invariants() {
        let nodes: Vec<_> = [0.0, 1.0].iter().map(|&t| UnitCirclePoint::from_theta(t)).collect();
        assert!(SpectralData::new(nodes.clone(), vec![0.5, 0.5]).is_ok());
        assert!(SpectralData::new(nodes.clone(), vec![0.7, 0.5]).is_err());
        assert!(SpectralData::new(nodes.clone(), vec![1.5, -0.5]).is_err());
        let reversed: Vec<_> = nodes.into_iter().rev().collect();
        assert!(SpectralData::new(reversed, vec![0.5, 0.5]).is_err());
    }

    fn verblunsky_strategy() -> impl Strategy<Value = VerblunskySequence> {
        (
            prop::collection::vec((0.0..0.9f64, 0.0..TAU), 1..=12),
            0.0..TAU,
        )
            .prop_map(|(a, sigma)| {
                let a = a.into_iter().map(|(m, t)| Complex::from_polar(m, t)).collect();
                VerblunskySequence::with_omega_arg(a, sigma).unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn random_systems_are_valid(v in verblunsky_strategy()) {
            let sys = OpucSystem::build(&v);
            let n = v.n();
            for (k, p) in sys.phis().iter().enumerate() {
                prop_assert_eq!(p.degree(), k);
                prop_assert!(p.is_monic(0.0));
            }
            for k in 1..=n {
                let h = sys.h(k);
                prop_assert!(h > 0.0 && h <= 1.0);
                let ratio = h / sys.h(k - 1);
                prop_assert!((ratio - (1.0 - v.get(k - 1).norm_sqr())).abs() < 1e-14);
            }
            prop_assert!(sys.paraorthogonality_residual() <= 1e-10);

            let nodes = sys.spectrum().unwrap();
            prop_assert_eq!(nodes.len(), n + 1);
            for w in nodes.windows(2) {
                prop_assert!(w[1].theta() - w[0].theta() > 1e-9);
            }
            let sd = sys.weights(&nodes).unwrap();
            prop_assert!(sys.orthogonality_residual(&sd) <= 1e-8);

            let back = verblunsky_from_polys(sys.phis()).unwrap();
            for (k, a) in back.iter().enumerate() {
                prop_assert!((a - v.get(k)).norm() <= 1e-12);
            }
        }
    }
}
