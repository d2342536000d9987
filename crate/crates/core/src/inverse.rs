//! Reconstruction of a persymmetric system from its spectrum and `ω`.
//!
//! On the spectrum of a persymmetric system the values of `Φ_N` are fixed
//! up to the positive factor `√h_N` and a global sign ε (see
//! [`crate::mirror::phi_n_values`]). Interpolating the unit-modulus phases
//! gives `Φ_N / (ε√h_N)`; monicity of `Φ_N` then pins both ε and `h_N`.
//! Inverse Szegő steps recover `a_{N−1}, …, a_0`.

use crate::error::{OpucError, Result};
use crate::mirror::{phi_n_values, persymmetry_defect};
use crate::poly::{lagrange_interpolate, Complex, Polynomial, UnitCirclePoint};
use crate::system::{OpucSystem, VerblunskySequence};
use crate::tolerance::TOL;
use crate::Sign;

/// Constant term left when dividing by `z` must be below this.
const DIVISION_TOL: f64 = 1e-9;
/// Allowed argument of `ε·c` for the leading coefficient `c`.
const PHASE_GATE: f64 = 1e-6;
/// Node product versus `(−1)^N ω⁻¹`.
const PRODUCT_TOL: f64 = 1e-8;
/// Forward rebuild must reproduce the input angles to this.
const ROUND_TRIP_TOL: f64 = 1e-6;
/// Recovered sequence must be persymmetric to this.
const PERSYMMETRY_TOL: f64 = 1e-8;
/// Raw descent output must be this close to persymmetric before the lower
/// half is replaced by the mirror of the upper half.
const DESCENT_PERSYMMETRY_GATE: f64 = 1e-6;

/// One inverse Szegő step: from monic `Φ_{n+1}` recover
/// `a_n = −conj(Φ_{n+1}(0))` and `Φ_n = (Φ_{n+1} + conj(a_n)Φ*_{n+1}) / (z(1 − |a_n|²))`.
pub fn inverse_szego_step(phi_next: &Polynomial) -> Result<(Complex, Polynomial)> {
    descend(phi_next).map(|(a, phi, _)| (a, phi))
}

/// [`inverse_szego_step`] that also returns the discarded constant term.
fn descend(phi_next: &Polynomial) -> Result<(Complex, Polynomial, f64)> {
    let degree = phi_next.degree();
    if degree == 0 {
        return Err(OpucError::Shape("cannot descend below degree 0".into()));
    }
    if !phi_next.is_monic(TOL.unimodular) {
        return Err(OpucError::Shape(format!(
            "degree-{degree} polynomial is not monic (leading coefficient {})",
            phi_next.leading()
        )));
    }
    let a = -phi_next.coeff(0).conj();
    if a.norm() >= 1.0 - 1e-10 {
        return Err(OpucError::NotSzegoClass {
            index: degree - 1,
            modulus: a.norm(),
        });
    }
    let star = phi_next.star(degree)?;
    let numerator = phi_next + &star.scale(a.conj());
    let (quotient, remainder) = numerator.shift_down();
    let remainder = remainder.norm();
    if remainder > DIVISION_TOL {
        return Err(OpucError::Inconsistency { degree, remainder });
    }
    // The leading coefficient is 1 − |a|² in exact arithmetic; dividing by
    // the computed one keeps the next step exactly monic.
    let lead = quotient.leading();
    let phi = quotient.scale(lead.inv());
    Ok((a, phi, remainder))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    pub verblunsky: VerblunskySequence,
    pub epsilon: Sign,
    pub h_final: f64,
    /// Constant terms discarded at each division by `z`, from `Φ_N` down.
    pub division_remainders: Vec<f64>,
    /// How many ε candidates passed the monicity gate (1 on success).
    pub passing_signs: usize,
    /// Largest angular distance from an input node to the nearest rebuilt node.
    pub round_trip: f64,
}

pub fn reconstruct_persymmetric(
    nodes: &[UnitCirclePoint],
    omega: Complex,
) -> Result<ReconstructionResult> {
    if nodes.len() < 2 {
        return Err(OpucError::InvalidSpectrum(
            "at least two nodes are required".into(),
        ));
    }
    if (omega.norm() - 1.0).abs() > TOL.unimodular {
        return Err(OpucError::InvalidSpectrum(format!(
            "|omega| = {} is not 1",
            omega.norm()
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
    let n = nodes.len() - 1;
    let product: Complex = nodes.iter().map(|p| p.value()).product();
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let expected = omega.conj() * sign;
    if (product - expected).norm() > PRODUCT_TOL {
        return Err(OpucError::InvalidSpectrum(format!(
            "node-product inconsistency: product {product} differs from (-1)^N / omega = {expected}"
        )));
    }

    // Phase values with √h_N = 1 and ε = +1; both are fixed below.
    let phases = phi_n_values(nodes, omega, 1.0, Sign::Plus);
    let points: Vec<Complex> = nodes.iter().map(|p| p.value()).collect();
    let shape = lagrange_interpolate(&points, &phases)?;
    let lead = shape.leading();

    let candidates: Vec<(Sign, Complex)> = Sign::BOTH
        .iter()
        .map(|&eps| (eps, lead * eps.value()))
        .filter(|(_, c)| c.norm() > 0.0 && c.arg().abs() <= PHASE_GATE)
        .collect();
    let passing_signs = candidates.len();
    let (epsilon, scaled_lead) = match candidates.as_slice() {
        [only] => *only,
        [] => {
            return Err(OpucError::NotPersymmetricSpectrum(format!(
                "leading coefficient {lead} of the interpolant is not real for either sign"
            )))
        }
        _ => {
            return Err(OpucError::NotPersymmetricSpectrum(
                "both signs pass the monicity gate".into(),
            ))
        }
    };
    let sqrt_h = 1.0 / scaled_lead.re;
    // Dividing by the computed leading coefficient (rather than its real
    // part) keeps the residual phase error out of the lower coefficients,
    // which the descent would otherwise amplify by roughly 1/h_N.
    let mut phi = shape.scale(lead.inv());

    let mut reversed = Vec::with_capacity(n);
    let mut division_remainders = Vec::with_capacity(n);
    for _ in 0..n {
        let (a, next, remainder) = descend(&phi)?;
        division_remainders.push(remainder);
        reversed.push(a);
        phi = next;
    }
    reversed.reverse();
    let raw = VerblunskySequence::new(reversed, omega)?;
    let defect = persymmetry_defect(&raw);
    if defect > DESCENT_PERSYMMETRY_GATE {
        return Err(OpucError::NotPersymmetricSpectrum(format!(
            "recovered sequence has persymmetry defect {defect:e}"
        )));
    }
    let verblunsky = mirror_upper_half(&raw)?;
    let defect = persymmetry_defect(&verblunsky);
    if defect > PERSYMMETRY_TOL {
        return Err(OpucError::NotPersymmetricSpectrum(format!(
            "symmetrized sequence has persymmetry defect {defect:e}"
        )));
    }
    let rebuilt = OpucSystem::build(&verblunsky).spectrum()?;
    let round_trip = nodes
        .iter()
        .map(|a| {
            rebuilt
                .iter()
                .map(|b| angle_distance(a.theta(), b.theta()))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    if round_trip > ROUND_TRIP_TOL {
        return Err(OpucError::ReconstructionMismatch(round_trip));
    }

    Ok(ReconstructionResult {
        verblunsky,
        epsilon,
        h_final: sqrt_h * sqrt_h,
        division_remainders,
        passing_signs,
        round_trip,
    })
}

/// Keeps `a_n` for the upper half of the indices (the first steps of the
/// descent, where rounding has not yet been amplified by `1/(1 − |a|²)`) and
/// fills the lower half from `a_n = −ω·conj(a_{N−n−1})`. For odd `N` the
/// middle entry is projected onto that same constraint.
fn mirror_upper_half(v: &VerblunskySequence) -> Result<VerblunskySequence> {
    let n = v.n();
    let omega = v.omega();
    let mut a = v.coeffs().to_vec();
    for k in 0..n / 2 {
        a[k] = -omega * a[n - 1 - k].conj();
    }
    if n % 2 == 1 {
        let m = n / 2;
        a[m] = (a[m] - omega * a[m].conj()) * 0.5;
    }
    VerblunskySequence::new(a, omega)
}

/// Distance between two angles on the circle.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mirror::{make_persymmetric, PersymmetricSeed};
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn final_step_is_not_in_the_szego_class() {
        let p = Polynomial::from_real(&[-1.0, 0.0, 1.0]);
        assert!(matches!(
            inverse_szego_step(&p),
            Err(OpucError::NotSzegoClass { index: 1, .. })
        ));
    }

    #[test]
    fn single_moment_descent() {
        let p = Polynomial::from_real(&[1.0 / 3.0, 2.0 / 3.0, 1.0]);
        let (a, phi) = inverse_szego_step(&p).unwrap();
        assert!((a - c(-1.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!(phi.max_abs_diff(&Polynomial::from_real(&[0.5, 1.0])) < 1e-15);
        let (a, phi) = inverse_szego_step(&phi).unwrap();
        assert!((a - c(-0.5, 0.0)).norm() < 1e-15);
        assert!(phi.max_abs_diff(&Polynomial::one()) < 1e-15);
    }

    #[test]
    fn descent_rejects_bad_input() {
        assert!(matches!(
            inverse_szego_step(&Polynomial::from_real(&[0.0, 2.0])),
            Err(OpucError::Shape(_))
        ));
        assert!(matches!(
            inverse_szego_step(&Polynomial::one()),
            Err(OpucError::Shape(_))
        ));
        // a zero outside the disk surfaces as |a| >= 1 somewhere on the way down
        let mut p = Polynomial::from_roots(&[c(1.5, 0.0), c(-0.3, 0.2), c(0.1, -0.4)]);
        let err = loop {
            match inverse_szego_step(&p) {
                Ok((_, next)) => p = next,
                Err(e) => break e,
            }
        };
        assert!(matches!(err, OpucError::NotSzegoClass { .. }), "{err:?}");
    }

    #[test]
    fn division_by_z_is_exact_for_any_monic_input() {
        let p = Polynomial::new(vec![c(0.5, 0.1), c(0.9, -2.0), c(0.0, 3.0), c(1.0, 0.0)]);
        let (_, _, remainder) = descend(&p).unwrap();
        assert!(remainder <= 1e-15);
    }

    #[test]
    fn free_spectrum_reconstructs_zero_sequence() {
        for n in 1..9 {
            let sigma = 0.3 * n as f64;
            let v = VerblunskySequence::with_omega_arg(vec![c(0.0, 0.0); n], sigma).unwrap();
            let nodes = OpucSystem::build(&v).spectrum().unwrap();
            let r = reconstruct_persymmetric(&nodes, v.omega()).unwrap();
            assert!(r.verblunsky.coeffs().iter().all(|a| a.norm() < 1e-10));
            assert!((r.h_final - 1.0).abs() < 1e-10);
            assert_eq!(r.passing_signs, 1);
        }
    }

    #[test]
    fn rejects_inconsistent_node_product() {
        let nodes: Vec<_> = [0.1, 2.0, 4.0].iter().map(|&t| UnitCirclePoint::from_theta(t)).collect();
        let err = reconstruct_persymmetric(&nodes, c(1.0, 0.0)).unwrap_err();
        assert!(matches!(err, OpucError::InvalidSpectrum(ref m) if m.contains("node-product")));
    }

    #[test]
    fn rejects_unsorted_nodes() {
        let nodes: Vec<_> = [PI, 0.0].iter().map(|&t| UnitCirclePoint::from_theta(t)).collect();
        assert!(matches!(
            reconstruct_persymmetric(&nodes, c(1.0, 0.0)),
            Err(OpucError::InvalidSpectrum(_))
        ));
    }

    #[test]
    fn generic_spectrum_has_a_persymmetric_realization() {
        // Any node set obeying the product rule is realized by exactly one
        // persymmetric system, here one different from the generating system.
        let v = VerblunskySequence::with_omega_arg(
            vec![c(0.5, 0.2), c(-0.1, 0.3), c(0.4, -0.4), c(0.2, 0.0)],
            0.8,
        )
        .unwrap();
        let nodes = OpucSystem::build(&v).spectrum().unwrap();
        let rec = reconstruct_persymmetric(&nodes, v.omega()).unwrap();
        assert!(persymmetry_defect(&rec.verblunsky) <= 1e-8);
        assert!(rec.round_trip <= 1e-7);
        assert_eq!(rec.passing_signs, 1);
        assert!(persymmetry_defect(&v) > 0.1);
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
        fn descent_inverts_the_recurrence(
            a in prop::collection::vec((0.0..0.9f64, 0.0..TAU), 1..=12),
            sigma in 0.0..TAU,
        ) {
            let a: Vec<_> = a.into_iter().map(|(m, t)| Complex::from_polar(m, t)).collect();
            let v = VerblunskySequence::with_omega_arg(a, sigma).unwrap();
            let sys = OpucSystem::build(&v);
            let mut phi = sys.phi(v.n()).clone();
            for k in (0..v.n()).rev() {
                let (a, next) = inverse_szego_step(&phi).unwrap();
                prop_assert!((a - v.get(k)).norm() <= 1e-10);
                phi = next;
            }
        }

        #[test]
        fn persymmetric_round_trip(seed in seed_strategy()) {
            let v = make_persymmetric(&seed).unwrap();
            let sys = OpucSystem::build(&v);
            let nodes = sys.spectrum().unwrap();
            let r = reconstruct_persymmetric(&nodes, v.omega()).unwrap();
            prop_assert_eq!(r.passing_signs, 1);
            for k in 0..v.n() {
                prop_assert!((r.verblunsky.get(k) - v.get(k)).norm() <= 1e-7);
            }
            prop_assert!((r.h_final / sys.h_final() - 1.0).abs() <= 1e-8);
            prop_assert!(r.round_trip <= 1e-8);
        }
    }
}
