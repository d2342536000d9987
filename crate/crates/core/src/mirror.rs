//! The mirror-dual Verblunsky map `â_n = −ω conj(a_{N−n−1})`, persymmetric
//! systems (its fixed points) and their three equivalent characterizations.

use crate::error::{OpucError, Result};
use crate::poly::{node_derivatives, unimodular_sqrt, Complex, UnitCirclePoint};
use crate::system::{realize_weights, OpucSystem, VerblunskySequence};
use crate::tolerance::TOL;
use crate::Sign;

pub fn mirror_dual(v: &VerblunskySequence) -> VerblunskySequence {
    let n = v.n();
    let omega = v.omega();
    let coeffs = (0..n).map(|k| -omega * v.get(n - 1 - k).conj()).collect();
    VerblunskySequence::new(coeffs, omega).expect("mirror map preserves |a| and ω")
}

/// Largest `|a_n + ω conj(a_{N−1−n})|`.
pub fn persymmetry_defect(v: &VerblunskySequence) -> f64 {
    let n = v.n();
    (0..n)
        .map(|k| (v.get(k) + v.omega() * v.get(n - 1 - k).conj()).norm())
        .fold(0.0, f64::max)
}

pub fn is_persymmetric(v: &VerblunskySequence, tol: f64) -> bool {
    persymmetry_defect(v) <= tol
}

/// Free parameters of a persymmetric sequence: the first `⌊N/2⌋`
/// coefficients, plus a real middle parameter when `N` is odd.
#[derive(Debug, Clone, PartialEq)]
pub struct PersymmetricSeed {
    pub free_params: Vec<Complex>,
    pub middle_r: Option<f64>,
    pub omega: Complex,
}

impl PersymmetricSeed {
    pub fn n(&self) -> usize {
        2 * self.free_params.len() + usize::from(self.middle_r.is_some())
    }
}

pub fn make_persymmetric(seed: &PersymmetricSeed) -> Result<VerblunskySequence> {
    let n = seed.n();
    if n == 0 {
        return Err(OpucError::InvalidVerblunsky(
            "persymmetric seed describes N = 0".into(),
        ));
    }
    if let Some(r) = seed.middle_r {
        if !(r > -1.0 && r < 1.0) {
            return Err(OpucError::InvalidVerblunsky(format!(
                "middle parameter r = {r} is outside (-1, 1)"
            )));
        }
    }
    let omega = seed.omega;
    let mut coeffs = vec![Complex::new(0.0, 0.0); n];
    for (k, &a) in seed.free_params.iter().enumerate() {
        coeffs[k] = a;
        coeffs[n - 1 - k] = -omega * a.conj();
    }
    if let Some(r) = seed.middle_r {
        coeffs[(n - 1) / 2] = Complex::new(0.0, r) * unimodular_sqrt(omega);
    }
    VerblunskySequence::new(coeffs, omega)
}

/// `ŵ_s = Φ_N(z_s) / Φ'_{N+1}(z_s)`.
pub fn dual_weights(sys: &OpucSystem, nodes: &[UnitCirclePoint]) -> Result<Vec<f64>> {
    let values: Vec<Complex> = nodes.iter().map(|p| p.value()).collect();
    let derivs = sys.final_derivatives(&values)?;
    let raw: Vec<Complex> = values
        .iter()
        .zip(&derivs)
        .map(|(&z, &d)| sys.eval_phi(sys.n(), z) / d)
        .collect();
    let weights = realize_weights(&raw)?;
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > TOL.weight {
        return Err(OpucError::Weight {
            index: weights.len() - 1,
            reason: format!("dual weights sum to {total}, not 1"),
        });
    }
    Ok(weights)
}

/// `√h_N / |Φ'_{N+1}(z_s)|` with `Φ_{N+1}` the monic polynomial on the
/// nodes. Not normalized.
pub fn persymmetric_weights(nodes: &[UnitCirclePoint], h_final: f64) -> Vec<f64> {
    let roots: Vec<Complex> = nodes.iter().map(|p| p.value()).collect();
    node_derivatives(&roots)
        .iter()
        .map(|d| h_final.sqrt() / d.norm())
        .collect()
}

/// The values `Φ_N(z_s) = (−1)^s ε ω^{−1/2} exp(i(N−1)θ_s/2) √h_N` for
/// θ-sorted nodes, principal branch.
pub fn phi_n_values(
    nodes: &[UnitCirclePoint],
    omega: Complex,
    h_final: f64,
    epsilon: Sign,
) -> Vec<Complex> {
    let n = nodes.len() as f64 - 1.0;
    let inv_sqrt = unimodular_sqrt(omega).conj();
    nodes
        .iter()
        .enumerate()
        .map(|(s, p)| {
            let sign = (Sign::alternating(s) * epsilon).value();
            inv_sqrt * Complex::from_polar(sign * h_final.sqrt(), 0.5 * (n - 1.0) * p.theta())
        })
        .collect()
}

/// Residuals of the three persymmetry characterizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersymmetryReport {
    /// `max_s |w_s − √h_N / |Φ'_{N+1}(z_s)||`.
    pub weights: f64,
    /// `max_s ||Φ_N(z_s)| − √h_N|`.
    pub modulus: f64,
    /// `min_ε max_s |Φ_N(z_s) − formula(ε)|`.
    pub phase: f64,
    /// The ε attaining `phase`.
    pub epsilon: Sign,
}

impl PersymmetryReport {
    pub fn max_residual(&self) -> f64 {
        self.weights.max(self.modulus).max(self.phase)
    }
}

pub fn verify_persymmetry_characterizations(v: &VerblunskySequence) -> Result<PersymmetryReport> {
    let defect = persymmetry_defect(v);
    if defect > TOL.persymmetry {
        return Err(OpucError::PersymmetryViolation(format!(
            "sequence is not persymmetric (defect {defect:e})"
        )));
    }
    let sys = OpucSystem::build(v);
    let nodes = sys.spectrum()?;
    let sd = sys.weights(&nodes)?;
    let hn = sys.h_final();
    let values: Vec<Complex> = nodes.iter().map(|p| sys.eval_phi(sys.n(), p.value())).collect();

    let expected = persymmetric_weights(&nodes, hn);
    let weights = sd
        .weights()
        .iter()
        .zip(&expected)
        .map(|(w, e)| (w - e).abs())
        .fold(0.0, f64::max);
    let modulus = values
        .iter()
        .map(|z| (z.norm() - hn.sqrt()).abs())
        .fold(0.0, f64::max);
    let (phase, epsilon) = Sign::BOTH
        .iter()
        .map(|&eps| {
            let formula = phi_n_values(&nodes, v.omega(), hn, eps);
            let r = values
                .iter()
                .zip(&formula)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            (r, eps)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("two candidates");
    Ok(PersymmetryReport {
        weights,
        modulus,
        phase,
        epsilon,
    })
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

    fn krawtchouk_v(n: usize, sigma: f64) -> VerblunskySequence {
        let omega = Complex::from_polar(1.0, sigma);
        let a = (0..n)
            .map(|k| (omega + 1.0) * ((k + 1) as f64 / (n + 1) as f64) - 1.0)
            .collect();
        VerblunskySequence::new(a, omega).unwrap()
    }

    #[test]
    fn single_moment_dual_coefficients() {
        let n = 5;
        let dual = mirror_dual(&single_moment_v(n));
        for k in 0..n {
            let want = -1.0 / (n as f64 - k as f64 + 1.0);
            assert!((dual.get(k) - c(want, 0.0)).norm() < 1e-15);
        }
        assert_eq!(dual.omega(), c(-1.0, 0.0));
    }

    #[test]
    fn free_family_is_self_dual() {
        let v = VerblunskySequence::with_omega_arg(vec![c(0.0, 0.0); 4], 0.7).unwrap();
        let dual = mirror_dual(&v);
        assert!(dual.coeffs().iter().all(|a| a.norm() == 0.0));
        assert!(is_persymmetric(&v, 0.0));
    }

    #[test]
    fn persymmetry_of_examples() {
        assert!(is_persymmetric(&krawtchouk_v(4, PI / 3.0), 1e-12));
        assert!(is_persymmetric(&krawtchouk_v(7, -2.5), 1e-12));
        for n in 2..8 {
            assert!(!is_persymmetric(&single_moment_v(n), 1e-10));
        }
        // N = 1 single moment is trivially persymmetric: a_0 = −ω conj(a_0) for real a_0, ω = −1.
        assert!(is_persymmetric(&single_moment_v(1), 1e-15));
    }

    #[test]
    fn make_persymmetric_examples() {
        let even = PersymmetricSeed {
            free_params: vec![c(0.3, 0.0)],
            middle_r: None,
            omega: c(1.0, 0.0),
        };
        let v = make_persymmetric(&even).unwrap();
        assert_eq!(v.coeffs(), &[c(0.3, 0.0), c(-0.3, 0.0)]);

        let odd = PersymmetricSeed {
            free_params: vec![c(0.0, 0.2)],
            middle_r: Some(0.5),
            omega: c(1.0, 0.0),
        };
        let v = make_persymmetric(&odd).unwrap();
        for (got, want) in v.coeffs().iter().zip([c(0.0, 0.2), c(0.0, 0.5), c(0.0, 0.2)]) {
            assert!((got - want).norm() < 1e-16);
        }

        let zero = PersymmetricSeed {
            free_params: vec![c(0.0, 0.0)],
            middle_r: Some(0.0),
            omega: c(0.0, 1.0),
        };
        let v = make_persymmetric(&zero).unwrap();
        assert!(v.coeffs().iter().all(|a| a.norm() == 0.0));
        assert_eq!(v.n(), 3);
    }

    #[test]
    fn make_persymmetric_rejects_bad_seeds() {
        let bad_r = PersymmetricSeed {
            free_params: vec![],
            middle_r: Some(1.0),
            omega: c(1.0, 0.0),
        };
        assert!(make_persymmetric(&bad_r).is_err());
        let empty = PersymmetricSeed {
            free_params: vec![],
            middle_r: None,
            omega: c(1.0, 0.0),
        };
        assert!(make_persymmetric(&empty).is_err());
    }

    #[test]
    fn dual_weights_of_single_moment_are_uniform() {
        for n in 1..8 {
            let sys = OpucSystem::build(&single_moment_v(n));
            let w = dual_weights(&sys, &sys.spectrum().unwrap()).unwrap();
            for x in w {
                assert!((x - 1.0 / (n + 1) as f64).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn persymmetric_weights_examples() {
        let free: Vec<_> = (0..4).map(|s| UnitCirclePoint::from_theta(TAU * s as f64 / 4.0)).collect();
        for w in persymmetric_weights(&free, 1.0) {
            assert!((w - 0.25).abs() < 1e-14);
        }
        let two = [UnitCirclePoint::from_theta(0.0), UnitCirclePoint::from_theta(PI)];
        assert_eq!(persymmetric_weights(&two, 1.0), vec![0.5, 0.5]);
    }

    #[test]
    fn phi_n_values_match_free_family() {
        let n = 5;
        let sigma = 1.3;
        let v = VerblunskySequence::with_omega_arg(vec![c(0.0, 0.0); n], sigma).unwrap();
        let sys = OpucSystem::build(&v);
        let nodes = sys.spectrum().unwrap();
        let direct: Vec<_> = nodes
            .iter()
            .map(|p| (v.omega() * p.value()).inv())
            .collect();
        let best = Sign::BOTH
            .iter()
            .map(|&e| {
                phi_n_values(&nodes, v.omega(), 1.0, e)
                    .iter()
                    .zip(&direct)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max)
            })
            .fold(f64::INFINITY, f64::min);
        assert!(best < 1e-12);

        let vals = phi_n_values(&nodes, v.omega(), 0.49, Sign::Plus);
        for (s, z) in vals.iter().enumerate() {
            assert!((z.norm() - 0.7).abs() < 1e-15);
            if s + 1 < vals.len() {
                let dt = nodes[s + 1].theta() - nodes[s].theta();
                let ratio = vals[s + 1] / z;
                let want = -Complex::from_polar(1.0, 0.5 * (n as f64 - 1.0) * dt);
                assert!((ratio - want).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn characterizations_hold_for_free_and_krawtchouk() {
        let v = VerblunskySequence::with_omega_arg(vec![c(0.0, 0.0); 6], 2.0).unwrap();
        let r = verify_persymmetry_characterizations(&v).unwrap();
        assert!(r.max_residual() <= 1e-12, "{r:?}");
        let r = verify_persymmetry_characterizations(&krawtchouk_v(4, PI / 3.0)).unwrap();
        assert!(r.max_residual() <= 1e-8, "{r:?}");
    }

    #[test]
    fn characterizations_gate_non_persymmetric() {
        assert!(matches!(
            verify_persymmetry_characterizations(&single_moment_v(4)),
            Err(OpucError::PersymmetryViolation(_))
        ));
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

    fn seed_strategy() -> impl Strategy<Value = PersymmetricSeed> {
        (
            prop::collection::vec((0.0..0.9f64, 0.0..TAU), 1..=12),
            -0.9..0.9f64,
            -PI..PI,
        )
            .prop_map(|(params, r, sigma)| {
                let n = params.len();
                PersymmetricSeed {
                    free_params: params[..n / 2]
                        .iter()
                        .map(|&(m, t)| Complex::from_polar(m, t))
                        .collect(),
                    middle_r: (n % 2 == 1).then_some(r),
                    omega: Complex::from_polar(1.0, sigma),
                }
            })
    }

    proptest! {
        #[test]
        fn mirror_is_an_involution(v in verblunsky_strategy()) {
            let back = mirror_dual(&mirror_dual(&v));
            for k in 0..v.n() {
                prop_assert!((back.get(k) - v.get(k)).norm() <= 1e-15);
            }
        }

        #[test]
        fn duality_preserves_final_data(v in verblunsky_strategy()) {
            let sys = OpucSystem::build(&v);
            let dual = OpucSystem::build(&mirror_dual(&v));
            prop_assert!(dual.final_poly().max_abs_diff(sys.final_poly()) <= 1e-10);
            prop_assert!((dual.h_final() - sys.h_final()).abs() <= 1e-12);

            let nodes = sys.spectrum().unwrap();
            let w = sys.weights(&nodes).unwrap();
            let dw = dual_weights(&sys, &nodes).unwrap();
            let hn = sys.h_final();
            for (s, p) in nodes.iter().enumerate() {
                let d = sys.final_poly().derivative_at(p.value()).norm_sqr();
                prop_assert!((w.weights()[s] * dw[s] * d / hn - 1.0).abs() <= 1e-8);
            }
            // ŵ computed from Φ equals the ordinary weights of the dual system
            let dsd = dual.weights(&nodes).unwrap();
            for (a, b) in dsd.weights().iter().zip(&dw) {
                prop_assert!((a - b).abs() <= 1e-9);
            }
        }

        #[test]
        fn seeds_give_persymmetric_systems(seed in seed_strategy()) {
            let v = make_persymmetric(&seed).unwrap();
            prop_assert_eq!(v.n(), seed.n());
            prop_assert!(is_persymmetric(&v, 1e-14));
            let sys = OpucSystem::build(&v);
            let nodes = sys.spectrum().unwrap();
            let w = sys.weights(&nodes).unwrap();
            let dw = dual_weights(&sys, &nodes).unwrap();
            for (a, b) in w.weights().iter().zip(&dw) {
                prop_assert!((a - b).abs() <= 1e-9);
            }
            let r = verify_persymmetry_characterizations(&v).unwrap();
            prop_assert!(r.max_residual() <= 1e-8);
        }
    }
}
