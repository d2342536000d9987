//! Closed-form example families. Each instance carries its Verblunsky data
//! together with whatever closed forms are known, so [`verify_family`] can
//! cross-check them against the generic recurrence, root finder and weights.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use crate::error::{OpucError, Result};
use crate::inverse::angle_distance;
use crate::mirror::persymmetry_defect;
use crate::poly::{principal_arg, sort_by_theta, Complex, Polynomial, UnitCirclePoint};
use crate::system::{szego_step, OpucSystem, VerblunskySequence};
use crate::tolerance::TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    Free,
    SingleMoment,
    SingleMomentDual,
    SingleMomentPersymmetric,
    Krawtchouk,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 5] = [
        FamilyKind::Free,
        FamilyKind::SingleMoment,
        FamilyKind::SingleMomentDual,
        FamilyKind::SingleMomentPersymmetric,
        FamilyKind::Krawtchouk,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Free => "free",
            FamilyKind::SingleMoment => "single_moment",
            FamilyKind::SingleMomentDual => "single_moment_dual",
            FamilyKind::SingleMomentPersymmetric => "single_moment_persymmetric",
            FamilyKind::Krawtchouk => "krawtchouk",
        }
    }

    /// Whether members of the family are fixed by the mirror map.
    pub fn is_persymmetric(self) -> bool {
        matches!(
            self,
            FamilyKind::Free | FamilyKind::SingleMomentPersymmetric | FamilyKind::Krawtchouk
        )
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyKind {
    type Err = OpucError;

    fn from_str(s: &str) -> Result<Self> {
        FamilyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| OpucError::Shape(format!("unknown family '{s}'")))
    }
}

#[derive(Debug, Clone)]
pub struct FamilyInstance {
    pub kind: FamilyKind,
    pub verblunsky: VerblunskySequence,
    /// `Φ_0 … Φ_{N+1}` where known.
    pub closed_form_phis: Option<Vec<Polynomial>>,
    /// `h_0 … h_N` where known.
    pub closed_form_norms: Option<Vec<f64>>,
    /// Nodes ascending by θ.
    pub closed_form_nodes: Option<Vec<UnitCirclePoint>>,
    /// Normalized weights aligned with `closed_form_nodes`.
    pub closed_form_weights: Option<Vec<f64>>,
    /// Defect of the closed-form construction itself (Krawtchouk only:
    /// odd-power and division remainders).
    pub construction_residual: f64,
}

fn real(x: f64) -> Complex {
    Complex::new(x, 0.0)
}

fn check_order(n: usize) -> Result<()> {
    if n == 0 {
        Err(OpucError::InvalidVerblunsky("N must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// `a ≡ 0`, `ω = exp(2πiν)`.
pub fn free_family(n: usize, nu: f64) -> Result<FamilyInstance> {
    check_order(n)?;
    let omega = Complex::from_polar(1.0, TAU * nu);
    let v = VerblunskySequence::new(vec![real(0.0); n], omega)?;
    let mut phis: Vec<Polynomial> = (0..=n).map(Polynomial::monomial).collect();
    phis.push(&Polynomial::monomial(n + 1) - &Polynomial::constant(omega.conj()));
    let mut nodes: Vec<UnitCirclePoint> = (0..=n)
        .map(|s| UnitCirclePoint::from_theta(TAU * (s as f64 - nu) / (n + 1) as f64))
        .collect();
    sort_by_theta(&mut nodes);
    Ok(FamilyInstance {
        kind: FamilyKind::Free,
        verblunsky: v,
        closed_form_phis: Some(phis),
        closed_form_norms: Some(vec![1.0; n + 1]),
        closed_form_nodes: Some(nodes),
        closed_form_weights: Some(vec![1.0 / (n + 1) as f64; n + 1]),
        construction_residual: 0.0,
    })
}

/// `z_s = exp(2πi(s+1)/(N+2))`: the `(N+2)`-th roots of unity except 1.
fn single_moment_nodes(n: usize) -> Vec<UnitCirclePoint> {
    (0..=n)
        .map(|s| UnitCirclePoint::from_theta(TAU * (s + 1) as f64 / (n + 2) as f64))
        .collect()
}

/// `1 + z + … + z^{N+1}`.
fn geometric(n: usize) -> Polynomial {
    Polynomial::new(vec![real(1.0); n + 1])
}

/// `a_n = −1/(n+2)`, `ω = −1`.
pub fn single_moment(n: usize) -> Result<FamilyInstance> {
    check_order(n)?;
    let a = (0..n).map(|k| real(-1.0 / (k as f64 + 2.0))).collect();
    let v = VerblunskySequence::new(a, real(-1.0))?;
    let mut phis: Vec<Polynomial> = (0..=n)
        .map(|k| {
            Polynomial::new(
                (0..=k)
                    .map(|j| real((j + 1) as f64 / (k + 1) as f64))
                    .collect(),
            )
        })
        .collect();
    phis.push(geometric(n + 1));
    let norms = (0..=n)
        .map(|k| (k as f64 + 2.0) / (2.0 * (k as f64 + 1.0)))
        .collect();
    let scale = 2.0 / (n + 2) as f64;
    let weights = (0..=n)
        .map(|s| scale * (PI * (s + 1) as f64 / (n + 2) as f64).sin().powi(2))
        .collect();
    Ok(FamilyInstance {
        kind: FamilyKind::SingleMoment,
        verblunsky: v,
        closed_form_phis: Some(phis),
        closed_form_norms: Some(norms),
        closed_form_nodes: Some(single_moment_nodes(n)),
        closed_form_weights: Some(weights),
        construction_residual: 0.0,
    })
}

/// Mirror dual of [`single_moment`]: `â_n = −1/(N−n+1)`.
pub fn single_moment_dual(n: usize) -> Result<FamilyInstance> {
    check_order(n)?;
    let a = (0..n).map(|k| real(-1.0 / (n - k + 1) as f64)).collect();
    let v = VerblunskySequence::new(a, real(-1.0))?;
    // Φ̂_k = z^k + (z^k − 1)/((N−k+2)(z − 1))
    let mut phis: Vec<Polynomial> = (0..=n)
        .map(|k| {
            let tail = 1.0 / (n - k + 2) as f64;
            let mut coeffs = vec![real(tail); k + 1];
            coeffs[k] = real(1.0);
            Polynomial::new(coeffs)
        })
        .collect();
    phis.push(geometric(n + 1));
    Ok(FamilyInstance {
        kind: FamilyKind::SingleMomentDual,
        verblunsky: v,
        closed_form_phis: Some(phis),
        closed_form_norms: None,
        closed_form_nodes: Some(single_moment_nodes(n)),
        closed_form_weights: Some(vec![1.0 / (n + 1) as f64; n + 1]),
        construction_residual: 0.0,
    })
}

/// Persymmetric system on the single-moment spectrum:
/// `a_n = −sin ν / sin(ν(2n+3))`, `ν = π/(2(N+2))`, `ω = −1`.
pub fn single_moment_persymmetric(n: usize) -> Result<FamilyInstance> {
    check_order(n)?;
    let nu = PI / (2.0 * (n + 2) as f64);
    let a = (0..n)
        .map(|k| real(-nu.sin() / (nu * (2 * k + 3) as f64).sin()))
        .collect();
    let v = VerblunskySequence::new(a, real(-1.0))?;
    let weights = (0..=n)
        .map(|s| nu.tan() * (PI * (s + 1) as f64 / (n + 2) as f64).sin())
        .collect();
    Ok(FamilyInstance {
        kind: FamilyKind::SingleMomentPersymmetric,
        verblunsky: v,
        closed_form_phis: None,
        closed_form_norms: None,
        closed_form_nodes: Some(single_moment_nodes(n)),
        closed_form_weights: Some(weights),
        construction_residual: 0.0,
    })
}

fn check_krawtchouk_omega(omega: Complex) -> Result<()> {
    if (omega.norm() - 1.0).abs() > TOL.unimodular {
        return Err(OpucError::InvalidVerblunsky(format!(
            "|omega| = {} is not 1",
            omega.norm()
        )));
    }
    if (omega + 1.0).norm() < 1e-12 {
        return Err(OpucError::Degeneracy(
            "omega = -1 makes every Verblunsky coefficient -1".into(),
        ));
    }
    Ok(())
}

/// `a_n = (ω+1)(n+1)/(N+1) − 1`.
pub fn krawtchouk_coefficients(n: usize, omega: Complex) -> Vec<Complex> {
    (0..n)
        .map(|k| (omega + 1.0) * ((k + 1) as f64 / (n + 1) as f64) - 1.0)
        .collect()
}

/// `κ² = 4|1+ω|²/(N+1)²`, the scaling that maps the symmetric Krawtchouk
/// grid onto `[−2cos(σ/2), 2cos(σ/2)]`.
pub fn krawtchouk_kappa_sq(n: usize, omega: Complex) -> f64 {
    4.0 * (omega + 1.0).norm_sqr() / ((n + 1) as f64).powi(2)
}

/// Scaled symmetric Krawtchouk polynomials `K̃_0 … K̃_{N+2}` in `x`:
/// `K̃_{k+1} = xK̃_k − κ² v_k K̃_{k−1}`, `v_k = k(N+2−k)/4`.
pub fn scaled_krawtchouk(n: usize, omega: Complex) -> Vec<Polynomial> {
    let kappa_sq = krawtchouk_kappa_sq(n, omega);
    let x = Polynomial::monomial(1);
    let mut out = vec![Polynomial::one(), x.clone()];
    for k in 1..=n + 1 {
        let v = (k * (n + 2 - k)) as f64 / 4.0;
        let next = &(&x * &out[k]) - &out[k - 1].scale(real(kappa_sq * v));
        out.push(next);
    }
    out
}

/// `P_k(z) = z^k K̃_k(z + 1/z)` for `k = 0 … N+2`, as polynomials of
/// degree `2k` in `z`.
pub fn krawtchouk_p(n: usize, omega: Complex) -> Vec<Polynomial> {
    let one_plus_z2 = Polynomial::from_real(&[1.0, 0.0, 1.0]);
    scaled_krawtchouk(n, omega)
        .iter()
        .enumerate()
        .map(|(k, kt)| {
            // z^k (z + 1/z)^j = z^{k−j} (1 + z²)^j
            let mut acc = Polynomial::zero(2 * k);
            let mut power = Polynomial::one();
            for (j, &c) in kt.coeffs().iter().enumerate() {
                let term = (&Polynomial::monomial(k - j) * &power).scale(c);
                acc = &acc + &term;
                power = &power * &one_plus_z2;
            }
            acc
        })
        .collect()
}

/// Closed-form `Φ_k`, `k = 0 … N+1`, from
/// `Φ_k(z²) = (P_{k+1}(z) − A_k P_k(z)) / (z² − ω)`,
/// `A_k = (ω+1)(N−k+1)/(N+1)`.
///
/// Returns the polynomials and the worst of the odd-power residual and the
/// division remainder.
pub fn krawtchouk_closed_form(n: usize, omega: Complex) -> Result<(Vec<Polynomial>, f64)> {
    check_krawtchouk_omega(omega)?;
    let p = krawtchouk_p(n, omega);
    let mut defect: f64 = 0.0;
    let mut phis = Vec::with_capacity(n + 2);
    for k in 0..=n + 1 {
        let a_k = (omega + 1.0) * ((n + 1 - k) as f64 / (n + 1) as f64);
        let numerator = &p[k + 1] - &p[k].scale(a_k);
        let scale = numerator.max_abs_coeff().max(1.0);
        let odd = numerator
            .coeffs()
            .iter()
            .skip(1)
            .step_by(2)
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        let even = Polynomial::new(numerator.coeffs().iter().step_by(2).copied().collect());
        let (quotient, remainder) = even.deflate(omega);
        defect = defect.max(odd / scale).max(remainder.norm() / scale);
        phis.push(quotient);
    }
    Ok((phis, defect))
}

/// Nodes from `cos(θ_s/2) = (2s/(N+1) − 1)cos(σ/2)` with the half-angle
/// taken on the side of σ, paired with the normalized weights
/// `∝ |sin(θ_s/2 − σ/2)/sin(θ_s/2)| / (s!(N+1−s)!)`. Sorted by θ.
pub fn krawtchouk_spectrum(n: usize, omega: Complex) -> Result<(Vec<UnitCirclePoint>, Vec<f64>)> {
    check_krawtchouk_omega(omega)?;
    let sigma = principal_arg(omega);
    let side = if sigma < 0.0 { -1.0 } else { 1.0 };
    let mut pairs: Vec<(UnitCirclePoint, f64)> = (0..=n)
        .map(|s| {
            let c = (2.0 * s as f64 / (n + 1) as f64 - 1.0) * (0.5 * sigma).cos();
            let node = UnitCirclePoint::from_theta(side * 2.0 * c.clamp(-1.0, 1.0).acos());
            let half = 0.5 * node.theta();
            let ratio = if half.sin().abs() < 1e-12 {
                // σ = 0, s = 0: the node z = ω̄ = 1, where the ratio is 2|cos(σ/2)|
                2.0 * (0.5 * sigma).cos().abs()
            } else {
                ((half - 0.5 * sigma).sin() / half.sin()).abs()
            };
            (node, ratio / (factorial(s) * factorial(n + 1 - s)))
        })
        .collect();
    pairs.sort_by(|a, b| a.0.theta().total_cmp(&b.0.theta()));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    Ok(pairs.into_iter().map(|(p, w)| (p, w / total)).unzip())
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

/// Linear Verblunsky coefficients closed by `a_N = ω`.
pub fn krawtchouk_family(n: usize, omega: Complex) -> Result<FamilyInstance> {
    check_order(n)?;
    check_krawtchouk_omega(omega)?;
    let v = VerblunskySequence::new(krawtchouk_coefficients(n, omega), omega)?;
    let (phis, defect) = krawtchouk_closed_form(n, omega)?;
    let (nodes, weights) = krawtchouk_spectrum(n, omega)?;
    Ok(FamilyInstance {
        kind: FamilyKind::Krawtchouk,
        verblunsky: v,
        closed_form_phis: Some(phis),
        closed_form_norms: None,
        closed_form_nodes: Some(nodes),
        closed_form_weights: Some(weights),
        construction_residual: defect,
    })
}

/// Builds a family by kind. `nu` is used by the free family, `omega` by
/// the Krawtchouk family; both are ignored elsewhere.
pub fn build_family(kind: FamilyKind, n: usize, nu: f64, omega: Complex) -> Result<FamilyInstance> {
    match kind {
        FamilyKind::Free => free_family(n, nu),
        FamilyKind::SingleMoment => single_moment(n),
        FamilyKind::SingleMomentDual => single_moment_dual(n),
        FamilyKind::SingleMomentPersymmetric => single_moment_persymmetric(n),
        FamilyKind::Krawtchouk => krawtchouk_family(n, omega),
    }
}

/// Max residuals of every closed form against the generic machinery;
/// `None` where the family has no closed form of that kind.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FamilyReport {
    /// Closed-form `Φ` against the recurrence-generated ones.
    pub polynomials: Option<f64>,
    /// Closed-form `Φ_{k+1}` against one Szegő step from closed-form `Φ_k`.
    pub recurrence: Option<f64>,
    pub norms: Option<f64>,
    /// Angular distance between closed-form nodes and root-finder nodes.
    pub nodes: Option<f64>,
    pub weights: Option<f64>,
    /// Persymmetry defect, for families claimed persymmetric.
    pub persymmetry: Option<f64>,
    pub construction: f64,
}

impl FamilyReport {
    pub fn max_residual(&self) -> f64 {
        [
            self.polynomials,
            self.recurrence,
            self.norms,
            self.nodes,
            self.weights,
            self.persymmetry,
        ]
        .into_iter()
        .flatten()
        .fold(self.construction, f64::max)
    }
}

pub fn verify_family(f: &FamilyInstance) -> Result<FamilyReport> {
    let v = &f.verblunsky;
    let sys = OpucSystem::build(v);
    let mut report = FamilyReport {
        construction: f.construction_residual,
        ..FamilyReport::default()
    };

    if let Some(phis) = &f.closed_form_phis {
        report.polynomials = Some(
            phis.iter()
                .zip(sys.phis())
                .map(|(a, b)| a.max_abs_diff(b))
                .fold(0.0, f64::max),
        );
        report.recurrence = Some(
            phis.windows(2)
                .enumerate()
                .map(|(k, w)| szego_step(&w[0], v.get(k)).max_abs_diff(&w[1]))
                .fold(0.0, f64::max),
        );
    }
    if let Some(norms) = &f.closed_form_norms {
        report.norms = Some(
            norms
                .iter()
                .zip(sys.norms())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        );
    }
    let nodes = sys.spectrum()?;
    if let Some(closed) = &f.closed_form_nodes {
        report.nodes = Some(
            closed
                .iter()
                .zip(&nodes)
                .map(|(a, b)| angle_distance(a.theta(), b.theta()))
                .fold(0.0, f64::max),
        );
    }
    if let Some(weights) = &f.closed_form_weights {
        let sd = sys.weights(&nodes)?;
        report.weights = Some(
            weights
                .iter()
                .zip(sd.weights())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        );
    }
    if f.kind.is_persymmetric() {
        report.persymmetry = Some(persymmetry_defect(v));
    }
    Ok(report)
}
