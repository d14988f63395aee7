//! Certification: machine-checkable evidence that a denominator spec and a
//! weight model satisfy the hypotheses behind the extension bound.
//!
//! A [`DeltaCertificate`] packages, for one damping parameter delta, the tail
//! mass C, the supremum constant K with its witness point, the resulting
//! bound 4(K + (1+delta)/delta C), the worst residual of the twist relation,
//! and the pointwise twist conditions. Weight-side hypotheses (the a-function
//! staying above 1 and the subharmonicity of its defect) are checked on polar
//! grids with discrete Laplacians and reported with witness points rather
//! than booleans alone.

use crate::denom::{self, DenominatorSpec, TwistSamples, Twister};
use crate::error::{Error, Result};
use crate::par;
use crate::search;
use serde::Serialize;

/// Grid used for the certificate's twist-relation residual.
fn residual_grid() -> Vec<f64> {
    search::log_grid(1.0, 256.0, 9)
}

/// Grid used for the certificate's pointwise twist conditions.
fn h_condition_grid() -> Vec<f64> {
    search::log_grid(1.0, 1e4, 128)
}

// ----------------------------------------------------------------- weights

/// Model domain for the extension problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelDomain {
    Disk,
    Bidisk,
}

/// Auxiliary weight exponent R, radial in |w|.
#[derive(Debug, Clone)]
pub enum RProfile {
    Zero,
    Const(f64),
    /// Sampled (|w|, R) pairs with ascending |w| in (0, 1]; evaluation is
    /// linear interpolation, clamped at the ends.
    Radial(Vec<(f64, f64)>),
}

impl RProfile {
    pub fn radial(table: Vec<(f64, f64)>) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::InvalidSpec("radial profile table is empty".into()));
        }
        for win in table.windows(2) {
            if !(win[1].0 > win[0].0) {
                return Err(Error::InvalidSpec("radial profile radii must increase".into()));
            }
        }
        for &(r, v) in &table {
            if !(r > 0.0 && r <= 1.0) || !v.is_finite() {
                return Err(Error::InvalidSpec(format!(
                    "radial profile entry ({r}, {v}) out of range"
                )));
            }
        }
        Ok(RProfile::Radial(table))
    }

    /// R at |w| = `abs_w`.
    pub fn eval(&self, abs_w: f64) -> f64 {
        match self {
            RProfile::Zero => 0.0,
            RProfile::Const(v) => *v,
            RProfile::Radial(table) => {
                let first = table[0];
                let last = table[table.len() - 1];
                if abs_w <= first.0 {
                    return first.1;
                }
                if abs_w >= last.0 {
                    return last.1;
                }
                let i = table.partition_point(|&(r, _)| r <= abs_w) - 1;
                let (r0, v0) = table[i];
                let (r1, v1) = table[i + 1];
                v0 + (v1 - v0) * (abs_w - r0) / (r1 - r0)
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, RProfile::Zero)
    }
}

/// Radial weight exponent kappa.
#[derive(Debug, Clone)]
pub enum Kappa {
    /// Disk: kappa(|w|^2) as a polynomial in r^2 (coefficients low-to-high).
    Poly(Vec<f64>),
    /// Bidisk without coupling: per-variable polynomials in |z|^2 and |w|^2.
    Separable { z: Vec<f64>, w: Vec<f64> },
    /// Bidisk quadratic form a|z|^2 + b|w|^2 + c Re(z conj(w)).
    QuadForm { a: f64, b: f64, c: f64 },
}

impl Kappa {
    pub fn zero() -> Self {
        Kappa::Poly(Vec::new())
    }

    /// Evaluate a coefficient list at r2.
    pub fn poly_at(coeffs: &[f64], r2: f64) -> f64 {
        coeffs.iter().rev().fold(0.0, |acc, &c| acc * r2 + c)
    }

    /// kappa at the origin (of the whole domain).
    pub fn at_origin(&self) -> f64 {
        match self {
            Kappa::Poly(c) => c.first().copied().unwrap_or(0.0),
            Kappa::Separable { z, w } => {
                z.first().copied().unwrap_or(0.0) + w.first().copied().unwrap_or(0.0)
            }
            Kappa::QuadForm { .. } => 0.0,
        }
    }
}

/// Weight data for a model domain: kappa, plus the R profile in |w|.
#[derive(Debug, Clone)]
pub struct WeightModel {
    pub domain: ModelDomain,
    pub kappa: Kappa,
    pub r_profile: RProfile,
}

impl WeightModel {
    pub fn disk(kappa: Vec<f64>, r_profile: RProfile) -> Self {
        WeightModel { domain: ModelDomain::Disk, kappa: Kappa::Poly(kappa), r_profile }
    }

    pub fn bidisk_separable(z: Vec<f64>, w: Vec<f64>, r_profile: RProfile) -> Self {
        WeightModel {
            domain: ModelDomain::Bidisk,
            kappa: Kappa::Separable { z, w },
            r_profile,
        }
    }

    /// Coupled bidisk weight; requires the form to be positive semidefinite
    /// (a, b >= 0 and ab >= c^2/4) so the weight stays admissible.
    pub fn bidisk_quadform(a: f64, b: f64, c: f64, r_profile: RProfile) -> Result<Self> {
        if !(a >= 0.0 && b >= 0.0 && a * b >= c * c / 4.0) {
            return Err(Error::InvalidSpec(format!(
                "quadratic form ({a}, {b}, {c}) is not positive semidefinite"
            )));
        }
        Ok(WeightModel {
            domain: ModelDomain::Bidisk,
            kappa: Kappa::QuadForm { a, b, c },
            r_profile,
        })
    }

    /// Short stable identifier used in reports; contains no commas so it can
    /// sit unquoted in a CSV cell.
    pub fn weight_id(&self) -> String {
        fn list(v: &[f64]) -> String {
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
        }
        let kappa = match &self.kappa {
            Kappa::Poly(c) if c.is_empty() => "kappa=0".to_string(),
            Kappa::Poly(c) => format!("kappa=poly({})", list(c)),
            Kappa::Separable { z, w } => format!("kappa=sep(z:{}|w:{})", list(z), list(w)),
            Kappa::QuadForm { a, b, c } => format!("kappa=quad({a};{b};{c})"),
        };
        let r = match &self.r_profile {
            RProfile::Zero => "R=0".to_string(),
            RProfile::Const(v) => format!("R=const({v})"),
            RProfile::Radial(t) => format!("R=radial[{}]", t.len()),
        };
        format!("{kappa} {r}")
    }
}

// ------------------------------------------------------------ certificates

/// Result of the weight-hypothesis grid check; `witness` is the first
/// failing point as [Re w, Im w, gamma, eps].
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct BergCheck {
    pub pass: bool,
    pub witness: Option<[f64; 4]>,
}

impl BergCheck {
    /// The trivial verdict for R identically zero, where the a-function
    /// equals its argument and the defect vanishes identically.
    pub fn trivially_ok() -> Self {
        BergCheck { pass: true, witness: None }
    }
}

/// Evidence for one delta: the constants, the bound, and the checked
/// side conditions. Serializes with C and K capitalized; an infinite K (and
/// hence bound) becomes `null` in JSON.
#[derive(Debug, Clone, Serialize)]
pub struct DeltaCertificate {
    pub delta: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub witness_x: f64,
    pub bound: f64,
    pub ode_max_residual: f64,
    pub h_conditions: [bool; 3],
    pub berg: BergCheck,
}

impl DeltaCertificate {
    pub fn is_finite(&self) -> bool {
        self.k.is_finite()
    }

    /// Replace the weight-check slot (defaults to the trivial R=0 verdict).
    pub fn with_berg(mut self, berg: BergCheck) -> Self {
        self.berg = berg;
        self
    }
}

/// Which membership condition failed, with a witness where one exists.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ClassViolation {
    /// g' sampled negative.
    NotIncreasing { witness_x: f64 },
    /// The tail integral of 1/g diverges.
    DivergentMass,
    /// Every requested delta produced an infinite supremum.
    NoFiniteSupremum,
}

/// Outcome of a membership check over a delta grid.
#[derive(Debug, Clone, Serialize)]
pub struct ClassReport {
    pub violation: Option<ClassViolation>,
    /// Index into `certificates` of the smallest finite bound.
    pub best: Option<usize>,
    pub certificates: Vec<DeltaCertificate>,
}

impl ClassReport {
    pub fn best_certificate(&self) -> Option<&DeltaCertificate> {
        self.best.map(|i| &self.certificates[i])
    }

    pub fn passed(&self) -> bool {
        self.violation.is_none() && self.best.is_some()
    }
}

/// Check membership of g in the admissible class over a grid of deltas:
/// g increasing (sampled derivative), finite tail mass, and a finite
/// supremum constant for at least one delta. Failures are data with
/// witnesses, not errors; hard numerical problems still surface as errors.
pub fn check_class(spec: &DenominatorSpec, deltas: &[f64]) -> Result<ClassReport> {
    // (i): derivative nonnegative on a log grid.
    for &x in &search::log_grid(1.0, 1e6, 512) {
        let gp = spec.eval_g_prime(x)?;
        if gp < -1e-9 {
            return Ok(ClassReport {
                violation: Some(ClassViolation::NotIncreasing { witness_x: x }),
                best: None,
                certificates: Vec::new(),
            });
        }
    }
    // (ii): finite mass.
    let c = match spec.c_of_g() {
        Ok(c) => c,
        Err(Error::DivergentIntegral) => {
            return Ok(ClassReport {
                violation: Some(ClassViolation::DivergentMass),
                best: None,
                certificates: Vec::new(),
            });
        }
        Err(e) => return Err(e),
    };
    // (iii): supremum per delta, with the side conditions recorded.
    let mut certificates = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        certificates.push(certificate(spec, delta, c)?);
    }
    let mut best: Option<usize> = None;
    for (i, cert) in certificates.iter().enumerate() {
        if cert.is_finite() && best.map_or(true, |b| cert.bound < certificates[b].bound) {
            best = Some(i);
        }
    }
    let violation = if best.is_none() {
        Some(ClassViolation::NoFiniteSupremum)
    } else {
        None
    };
    Ok(ClassReport { violation, best, certificates })
}

/// Build the certificate for a single delta (C already computed).
fn certificate(spec: &DenominatorSpec, delta: f64, c: f64) -> Result<DeltaCertificate> {
    let kd = denom::k_delta(spec, delta)?;
    let bound = 4.0 * (kd.k + (1.0 + delta) / delta * c);
    let mut ode_max = 0.0f64;
    for &x in &residual_grid() {
        ode_max = ode_max.max(denom::ode_residual(spec, delta, x)?);
    }
    let h = check_h_conditions(spec, delta, &h_condition_grid())?;
    Ok(DeltaCertificate {
        delta,
        c,
        k: kd.k,
        witness_x: kd.witness_x,
        bound,
        ode_max_residual: ode_max,
        h_conditions: h.ok,
        berg: BergCheck::trivially_ok(),
    })
}

/// First failure of the pointwise twist conditions, if any.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HWitness {
    /// 0: x+h >= 1, 1: h' >= 0, 2: h'' < 0.
    pub condition: usize,
    pub index: usize,
    pub x: f64,
}

/// Pointwise twist conditions with a first-violation witness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HReport {
    pub ok: [bool; 3],
    pub witness: Option<HWitness>,
}

impl HReport {
    pub fn all_ok(&self) -> bool {
        self.ok.iter().all(|&b| b)
    }
}

/// Check x+h >= 1, h' >= 0, and h'' < 0 on precomputed samples. Split out
/// from the sampling so fault injection can exercise the detector.
pub fn check_h_samples(samples: &TwistSamples) -> HReport {
    let mut ok = [true; 3];
    let mut witness = None;
    let mut fail = |cond: usize, index: usize, x: f64, ok: &mut [bool; 3]| {
        ok[cond] = false;
        if witness.is_none() {
            witness = Some(HWitness { condition: cond, index, x });
        }
    };
    for i in 0..samples.xs.len() {
        let x = samples.xs[i];
        if !(x + samples.h[i] >= 1.0 - 1e-9) {
            fail(0, i, x, &mut ok);
        }
        if !(samples.hp[i] >= -1e-9) {
            fail(1, i, x, &mut ok);
        }
        let hpp = samples.hpp[i];
        // Strictly negative, with -0.0 admitted (g overflowing to +inf).
        if !(hpp < 0.0 || (hpp == 0.0 && hpp.is_sign_negative())) {
            fail(2, i, x, &mut ok);
        }
    }
    HReport { ok, witness }
}

/// Sample the twist data on `xs` and check the pointwise conditions.
pub fn check_h_conditions(spec: &DenominatorSpec, delta: f64, xs: &[f64]) -> Result<HReport> {
    let samples = denom::h_delta_samples(spec, delta, xs)?;
    Ok(check_h_samples(&samples))
}

// -------------------------------------------------------------- a-function

/// The weighted pullback a(w) = g^{-1}(e^{-R(|w|)} g(gamma - log(|w|^2 + eps^2))).
///
/// The inverse is computed by monotone bisection after growing a doubling
/// bracket from 1 (capped at 1e12). An argument below g(1) means the
/// pointwise hypothesis a >= 1 fails there; that is reported as
/// [`Error::RangeBelowGOne`] for callers to convert into a witness.
pub fn a_function(
    spec: &DenominatorSpec,
    weight: &WeightModel,
    gamma: f64,
    eps: f64,
    w_abs2: f64,
) -> Result<f64> {
    if !(gamma > 1.0) {
        return Err(Error::InvalidSpec(format!("gamma must exceed 1, got {gamma}")));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidSpec(format!("eps must be positive, got {eps}")));
    }
    let alpha = gamma - (w_abs2 + eps * eps).ln();
    if alpha < 1.0 {
        return Err(Error::RangeBelowGOne);
    }
    let rho = weight.r_profile.eval(w_abs2.sqrt());
    let target = (-rho).exp() * spec.eval_g(alpha)?;
    if !target.is_finite() {
        return Err(Error::Numerical(format!(
            "weighted argument overflowed at alpha = {alpha}"
        )));
    }
    let g = |x: f64| spec.eval_g(x).unwrap_or(f64::INFINITY);
    if target < g(1.0) * (1.0 - 1e-12) {
        return Err(Error::RangeBelowGOne);
    }
    search::invert_increasing(g, target, 1e12, 60).ok_or(Error::RangeBelowGOne)
}

/// Polar-grid check of the two pointwise weight hypotheses: a >= 1
/// everywhere, and subharmonicity of the defect alpha - a via the discrete
/// five-point polar Laplacian (tolerance 1e-6 / dr^2), for every
/// (gamma, eps) pair. R must be radial, which the model types enforce.
pub fn check_berg(
    spec: &DenominatorSpec,
    weight: &WeightModel,
    gamma_grid: &[f64],
    eps_grid: &[f64],
    grid_n: usize,
) -> Result<BergCheck> {
    if grid_n < 4 {
        return Err(Error::InvalidSpec("polar grid needs at least 4 points".into()));
    }
    let radii = search::linear_grid(1e-3, 1.0 - 1e-3, grid_n);
    let dr = radii[1] - radii[0];
    let tol = 1e-6 / (dr * dr);
    for &gamma in gamma_grid {
        for &eps in eps_grid {
            // The defect is radial (R and alpha depend on |w| only), so the
            // five-point stencil reduces to its radial part: the angular
            // second difference of theta-constant samples is identically
            // zero. A below-floor inverse at some radius is the pointwise
            // hypothesis a >= 1 failing there.
            let defect: Vec<Result<f64>> = par::map_collect(&radii, |&r| {
                let alpha = gamma - (r * r + eps * eps).ln();
                a_function(spec, weight, gamma, eps, r * r).map(|a| alpha - a)
            });
            let mut beta = Vec::with_capacity(grid_n);
            for (i, d) in defect.into_iter().enumerate() {
                match d {
                    Ok(v) => beta.push(v),
                    Err(Error::RangeBelowGOne) => {
                        return Ok(BergCheck {
                            pass: false,
                            witness: Some([radii[i], 0.0, gamma, eps]),
                        });
                    }
                    Err(e) => return Err(e),
                }
            }
            for i in 1..grid_n - 1 {
                let r = radii[i];
                let lap = (beta[i + 1] - 2.0 * beta[i] + beta[i - 1]) / (dr * dr)
                    + (beta[i + 1] - beta[i - 1]) / (2.0 * dr * r);
                if lap < -tol {
                    return Ok(BergCheck {
                        pass: false,
                        witness: Some([r, 0.0, gamma, eps]),
                    });
                }
            }
        }
    }
    Ok(BergCheck { pass: true, witness: None })
}

/// tau = a + h(a) and A = (1+h'(a))^2 / (-h''(a)), with h'' recomputed by
/// finite differences so the returned A independently confirms the closed
/// relation A = (1+delta) C g(a) / delta (checked to 1e-8 relative).
pub fn tau_and_a(spec: &DenominatorSpec, delta: f64, a_val: f64) -> Result<(f64, f64)> {
    if !(a_val >= 1.0) {
        return Err(Error::Domain(format!("tau needs a >= 1, got {a_val}")));
    }
    let step = (1e-7 * a_val).max(1e-5);
    let grid = search::log_grid(1.0, (a_val + 2.0 * step).max(2.0), 256);
    let tw = Twister::new(spec, delta, &grid)?;
    let tau = a_val + tw.h_at(a_val);
    let hp = tw.hp_at(a_val);
    let hpp = if a_val - step >= 1.0 {
        (tw.hp_at(a_val + step) - tw.hp_at(a_val - step)) / (2.0 * step)
    } else {
        (-3.0 * tw.hp_at(a_val) + 4.0 * tw.hp_at(a_val + step)
            - tw.hp_at(a_val + 2.0 * step))
            / (2.0 * step)
    };
    if !(hpp < 0.0) {
        return Err(Error::Numerical(format!(
            "twist second derivative not negative at {a_val}: {hpp}"
        )));
    }
    let a_big = (1.0 + hp) * (1.0 + hp) / (-hpp);
    let expected = (1.0 + delta) / delta * tw.c * spec.eval_g(a_val)?;
    if ((a_big - expected) / expected).abs() > 1e-8 {
        return Err(Error::Numerical(format!(
            "curvature scale mismatch: {a_big} vs {expected}"
        )));
    }
    Ok((tau, a_big))
}

/// Residuals of the curvature identity and, for R = 0, the sharp lower bound
/// on the Levi form of a.
#[derive(Debug, Clone, Copy)]
pub struct CurvatureCheck {
    /// max over the grid of | -lap(tau)/4 - |grad tau|^2/(4A) - (1+h'(a))(-lap(a)/4) |.
    pub max_residual: f64,
    /// min over the grid of (-lap(a)/4) (|w|^2+eps^2)^2 / eps^2; only for R = 0,
    /// where the exact value is 1.
    pub lower_ratio_min: Option<f64>,
}

/// Finite-difference verification that
/// -dd(tau) - (1/A) d(tau) dbar(tau) = (1+h'(a)) (-dd(a))
/// as (1,1)-coefficients on the w-disk, with central differences of the
/// given step in (Re w, Im w) on an n x n polar grid.
pub fn curvature_identity_check(
    spec: &DenominatorSpec,
    delta: f64,
    weight: &WeightModel,
    gamma: f64,
    eps: f64,
    grid_n: usize,
    step: f64,
) -> Result<CurvatureCheck> {
    if grid_n < 2 {
        return Err(Error::InvalidSpec("curvature grid needs at least 2 points".into()));
    }
    let c = spec.c_of_g()?;
    // h-evaluator over the full range the a-values can reach.
    let a_max = gamma - (eps * eps).ln() + 1.0;
    let tw = Twister::new(spec, delta, &search::log_grid(1.0, a_max.max(2.0), 512))?;
    let radii = search::linear_grid(1e-3, 1.0 - 1e-3, grid_n);
    let dtheta = std::f64::consts::TAU / grid_n as f64;
    let mut nodes = Vec::with_capacity(grid_n * grid_n);
    for &r in &radii {
        for j in 0..grid_n {
            let theta = dtheta * j as f64;
            nodes.push((r * theta.cos(), r * theta.sin()));
        }
    }
    let eval = |x: f64, y: f64| -> Result<(f64, f64)> {
        let a = a_function(spec, weight, gamma, eps, x * x + y * y)?;
        Ok((a, a + tw.h_at(a)))
    };
    let per_node = par::map_collect(&nodes, |&(x, y)| -> Result<(f64, Option<f64>)> {
        let (a_c, tau_c) = eval(x, y)?;
        let (a_xp, tau_xp) = eval(x + step, y)?;
        let (a_xm, tau_xm) = eval(x - step, y)?;
        let (a_yp, tau_yp) = eval(x, y + step)?;
        let (a_ym, tau_ym) = eval(x, y - step)?;
        let lap_a = (a_xp + a_xm + a_yp + a_ym - 4.0 * a_c) / (step * step);
        let lap_tau =
            (tau_xp + tau_xm + tau_yp + tau_ym - 4.0 * tau_c) / (step * step);
        let tau_x = (tau_xp - tau_xm) / (2.0 * step);
        let tau_y = (tau_yp - tau_ym) / (2.0 * step);
        let hp = tw.hp_at(a_c);
        let a_big = (1.0 + delta) / delta * c * spec.eval_g(a_c)?;
        let lhs = -lap_tau / 4.0 - (tau_x * tau_x + tau_y * tau_y) / (4.0 * a_big);
        let rhs = (1.0 + hp) * (-lap_a / 4.0);
        let residual = (lhs - rhs).abs();
        let lower = if weight.r_profile.is_zero() {
            let denom = x * x + y * y + eps * eps;
            Some((-lap_a / 4.0) * denom * denom / (eps * eps))
        } else {
            None
        };
        Ok((residual, lower))
    });
    let mut max_residual = 0.0f64;
    let mut lower_min: Option<f64> = None;
    for item in per_node {
        let (res, lower) = item?;
        max_residual = max_residual.max(res);
        if let Some(l) = lower {
            lower_min = Some(lower_min.map_or(l, |m: f64| m.min(l)));
        }
    }
    Ok(CurvatureCheck { max_residual, lower_ratio_min: lower_min })
}

/// Default finite-difference step for the curvature identity.
pub const CURVATURE_STEP: f64 = 1e-4;

/// Grid check of the classical-weight conditions on a radial R profile:
/// R + log|w|^2 <= 0, R subharmonic, and R + log|w|^2 subharmonic.
///
/// For radial functions the Laplacian is r^{-2} d^2/du^2 in u = log r, so
/// subharmonicity is convexity in log-radius and is checked by second
/// differences on a geometric radius grid. In that coordinate the log term
/// is linear and contributes exactly zero, which keeps the check usable
/// arbitrarily close to the puncture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OhsawaCheck {
    pub sum_nonpositive: bool,
    pub r_subharmonic: bool,
    pub sum_subharmonic: bool,
    /// First failing radius, if any.
    pub witness_r: Option<f64>,
}

impl OhsawaCheck {
    pub fn all_ok(&self) -> bool {
        self.sum_nonpositive && self.r_subharmonic && self.sum_subharmonic
    }
}

pub fn ohsawa_conditions_check(weight: &WeightModel, grid_n: usize) -> Result<OhsawaCheck> {
    if grid_n < 4 {
        return Err(Error::InvalidSpec("radial grid needs at least 4 points".into()));
    }
    let radii = search::log_grid(1e-3, 1.0 - 1e-3, grid_n);
    let du = (radii[1] / radii[0]).ln();
    let tol = 1e-6 / (du * du);
    let r_vals: Vec<f64> = radii.iter().map(|&r| weight.r_profile.eval(r)).collect();
    let sums: Vec<f64> = radii
        .iter()
        .zip(&r_vals)
        .map(|(&r, &v)| v + (r * r).ln())
        .collect();
    let mut out = OhsawaCheck {
        sum_nonpositive: true,
        r_subharmonic: true,
        sum_subharmonic: true,
        witness_r: None,
    };
    let fail = |flag: &mut bool, r: f64, witness: &mut Option<f64>| {
        *flag = false;
        if witness.is_none() {
            *witness = Some(r);
        }
    };
    for (i, &s) in sums.iter().enumerate() {
        if s > 1e-9 {
            fail(&mut out.sum_nonpositive, radii[i], &mut out.witness_r);
        }
    }
    let second = |vals: &[f64], i: usize| {
        (vals[i + 1] - 2.0 * vals[i] + vals[i - 1]) / (du * du)
    };
    for i in 1..grid_n - 1 {
        if second(&r_vals, i) < -tol {
            fail(&mut out.r_subharmonic, radii[i], &mut out.witness_r);
        }
        if second(&sums, i) < -tol {
            fail(&mut out.sum_subharmonic, radii[i], &mut out.witness_r);
        }
    }
    Ok(out)
}
